//! Independent matrix oracles: two spin-1/2 particles as Pauli matrices on ℂ⁴, and fermionic
//! modes in the occupation basis with Jordan–Wigner parity strings.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector, Matrix2, Matrix4, Vector4};
use num_complex::Complex64;

pub fn cx(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `σ·n`.
pub fn pauli(n: [f64; 3]) -> Matrix2<Complex64> {
    Matrix2::new(cx(n[2], 0.0), cx(n[0], -n[1]), cx(n[0], n[1]), cx(-n[2], 0.0))
}

/// Basis `|s_A s_B⟩` at index `2·s_A + s_B`, `s = 0` being spin up (mode 1).
pub fn state(c: [Complex64; 4]) -> Vector4<Complex64> {
    Vector4::new(c[0], c[1], c[2], c[3])
}

pub fn singlet() -> Vector4<Complex64> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    state([cx(0.0, 0.0), cx(h, 0.0), cx(-h, 0.0), cx(0.0, 0.0)])
}

pub fn kron(x: &Matrix2<Complex64>, y: &Matrix2<Complex64>) -> Matrix4<Complex64> {
    Matrix4::from_fn(|r, c| x[(r / 2, c / 2)] * y[(r % 2, c % 2)])
}

/// `⟨ψ| σ·m ⊗ σ·n |ψ⟩`.
pub fn correlation(psi: &Vector4<Complex64>, m: [f64; 3], n: [f64; 3]) -> f64 {
    let op = kron(&pauli(m), &pauli(n));
    psi.dotc(&(op * psi)).re
}

/// Probability that particle A (`first`) or B, measured in the basis given by the columns of
/// `u_near`, yields the first (`plus`) or second column, with the other particle measured in the
/// basis given by the columns of `u_far`.
pub fn marginal(
    psi: &Vector4<Complex64>,
    first: bool,
    u_near: &Matrix2<Complex64>,
    u_far: &Matrix2<Complex64>,
    plus: bool,
) -> f64 {
    let k = if plus { 0 } else { 1 };
    let near = u_near.column(k).into_owned();
    let mut total = 0.0;
    for j in 0..2 {
        let far = u_far.column(j).into_owned();
        let basis = if first {
            Vector4::from_fn(|r, _| near[r / 2] * far[r % 2])
        } else {
            Vector4::from_fn(|r, _| far[r / 2] * near[r % 2])
        };
        total += basis.dotc(psi).norm_sqr();
    }
    total
}

/// Annihilator of mode `k` among `n` fermionic modes; basis index `Σ n_j 2^j`.
pub fn jw_annihilator(n: usize, k: usize) -> DMatrix<f64> {
    let dim = 1 << n;
    let mut m = DMatrix::zeros(dim, dim);
    for s in 0..dim {
        if s & (1 << k) == 0 {
            continue;
        }
        let parity = (s & ((1 << k) - 1)).count_ones();
        let sign = if parity % 2 == 0 { 1.0 } else { -1.0 };
        m[(s ^ (1 << k), s)] = sign;
    }
    m
}

pub fn jw_vacuum(n: usize) -> DVector<f64> {
    let mut v = DVector::zeros(1 << n);
    v[0] = 1.0;
    v
}

/// Applies a word of `(mode, dagger)` letters, rightmost first, to `v`.
pub fn jw_apply(n: usize, word: &[(usize, bool)], v: &DVector<f64>) -> DVector<f64> {
    let mut out = v.clone();
    for &(k, dagger) in word.iter().rev() {
        let a = jw_annihilator(n, k);
        out = if dagger { a.transpose() * out } else { a * out };
    }
    out
}
