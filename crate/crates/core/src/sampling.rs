//! Seeded random draws used by property checks and searches.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn normal<R: Rng>(r: &mut R) -> f64 {
    r.sample(StandardNormal)
}

/// Uniform point on the unit sphere.
pub fn unit_axis<R: Rng>(r: &mut R) -> [f64; 3] {
    loop {
        let v = [normal(r), normal(r), normal(r)];
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > 1e-6 {
            return [v[0] / n, v[1] / n, v[2] / n];
        }
    }
}

/// Haar-uniform element of SU(2) as `[[a, −b̄], [b, ā]]`.
pub fn su2<R: Rng>(r: &mut R) -> [[Complex64; 2]; 2] {
    let q = loop {
        let v = [normal(r), normal(r), normal(r), normal(r)];
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-6 {
            break [v[0] / n, v[1] / n, v[2] / n, v[3] / n];
        }
    };
    let a = Complex64::new(q[0], q[1]);
    let b = Complex64::new(q[2], q[3]);
    [[a, -b.conj()], [b, a.conj()]]
}

/// Uniformly random unit vector in ℂⁿ.
pub fn complex_unit<R: Rng>(r: &mut R, n: usize) -> Vec<Complex64> {
    let v: Vec<Complex64> = (0..n).map(|_| Complex64::new(normal(r), normal(r))).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}

/// Standard complex Gaussian entries.
pub fn complex_gaussian<R: Rng>(r: &mut R, n: usize) -> Vec<Complex64> {
    (0..n).map(|_| Complex64::new(normal(r), normal(r))).collect()
}
