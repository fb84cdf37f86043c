//! The pipeline rebuilt with anticommutation relations, and the SU(2) representation
//! family on `(a₁†)^l (a₂†)^m |0⟩`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::algebra::{act_on_vacuum, vev, Expr, Generator, OperatorExpr, Qi2, Scalar};
use crate::spin::{su2_identities_hold, ChshAxes, Party, SpinError, SpinSystem};
use crate::td::{reduce_f_td, CaseSpec, ReducedChsh, TdError};

/// Fermionic analogue of the bosonic case: every relation is an anticommutator.
pub fn fermionic_case() -> CaseSpec {
    CaseSpec::fermionic()
}

pub fn fermionic_f_td(case: &CaseSpec) -> Result<ReducedChsh, TdError> {
    reduce_f_td(case)
}

#[derive(Clone, Debug, Serialize)]
pub struct FermionicSpinReport {
    pub su2_commutators: bool,
    pub singlet_annihilated: bool,
    pub chsh: String,
    pub chsh_float: f64,
    pub chsh_is_two_sqrt_two: bool,
    pub creator_squares_vanish: bool,
    pub number_spectrum_binary: bool,
}

impl FermionicSpinReport {
    pub fn passed(&self) -> bool {
        self.su2_commutators
            && self.singlet_annihilated
            && self.chsh_is_two_sqrt_two
            && self.creator_squares_vanish
            && self.number_spectrum_binary
    }
}

pub fn fermionic_spin_check() -> Result<FermionicSpinReport, SpinError> {
    let sys = SpinSystem::fermionic();
    let singlet = sys.singlet::<Scalar>();
    let mut annihilated = true;
    for k in 1..=3 {
        annihilated &= sys.apply(&sys.total_spin::<Scalar>(k)?, &singlet)?.is_zero();
    }
    let chsh = sys.chsh(&singlet, &ChshAxes::canonical())?;
    let target = Scalar::constant(Qi2::sqrt2().scale(2, 1));
    let mut squares = true;
    for party in [Party::A, Party::B] {
        for mode in 1..=2 {
            let c = OperatorExpr::gen(sys.ladder(party, mode).dag());
            squares &= act_on_vacuum(&c.times(&c), &sys.rules, &sys.vacuum)?.is_zero();
        }
    }
    Ok(FermionicSpinReport {
        su2_commutators: su2_identities_hold(&sys)?,
        singlet_annihilated: annihilated,
        chsh_float: chsh.constant_term().to_complex().re,
        chsh_is_two_sqrt_two: chsh == target,
        chsh: chsh.to_string(),
        creator_squares_vanish: squares,
        number_spectrum_binary: number_spectrum_binary(&sys)?,
    })
}

/// Every occupation basis state `c_{k1}† … c_{kr}† |0⟩` (distinct modes) is an eigenvector
/// of each `c_i† c_i` with eigenvalue 0 or 1.
fn number_spectrum_binary(sys: &SpinSystem) -> Result<bool, SpinError> {
    let modes: Vec<Generator> = SpinSystem::annihilators(sys.statistics);
    for mask in 0u32..16 {
        let mut state = OperatorExpr::one();
        for (k, g) in modes.iter().enumerate() {
            if mask & (1 << k) != 0 {
                state = state.times(&OperatorExpr::gen(g.dag()));
            }
        }
        for (k, g) in modes.iter().enumerate() {
            let n = OperatorExpr::word(vec![g.dag(), g.clone()]);
            let out = act_on_vacuum(&n.times(&state), &sys.rules, &sys.vacuum)?;
            let ket = act_on_vacuum(&state, &sys.rules, &sys.vacuum)?;
            let expected = if mask & (1 << k) != 0 { ket } else { Expr::zero() };
            if out != expected {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

type ExactMatrix = Vec<Vec<Qi2>>;

fn exact_mul(x: &ExactMatrix, y: &ExactMatrix) -> ExactMatrix {
    let n = x.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..n).fold(Qi2::zero(), |acc, k| acc + x[i][k].clone() * y[k][j].clone()))
                .collect()
        })
        .collect()
}

fn exact_sub(x: &ExactMatrix, y: &ExactMatrix) -> ExactMatrix {
    x.iter().zip(y).map(|(r, s)| r.iter().zip(s).map(|(a, b)| a.clone() - b.clone()).collect()).collect()
}

fn exact_scale(x: &ExactMatrix, c: &Qi2) -> ExactMatrix {
    x.iter().map(|r| r.iter().map(|a| a.clone() * c.clone()).collect()).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct Su2RepReport {
    pub n: usize,
    pub spin: f64,
    pub s3_eigenvalues: Vec<String>,
    pub casimir: String,
    pub casimir_float: f64,
    pub commutators_exact: bool,
    pub casimir_exact: bool,
    /// Largest deviation from Hermiticity of the spin matrices in the orthonormalized basis.
    pub hermiticity_defect: f64,
    /// Largest deviation of the numerically diagonalized Casimir spectrum from `s(s+1)`.
    pub casimir_spectrum_defect: f64,
}

impl Su2RepReport {
    pub fn passed(&self) -> bool {
        self.commutators_exact && self.casimir_exact && self.hermiticity_defect <= 1e-12 && self.casimir_spectrum_defect <= 1e-10
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RepError {
    #[error("dimension must satisfy 2 ≤ n ≤ 8, got {0}")]
    BadDimension(usize),
    #[error("basis states are not orthogonal")]
    NotOrthogonal,
    #[error(transparent)]
    Spin(#[from] SpinError),
    #[error(transparent)]
    Algebra(#[from] crate::algebra::AlgebraError),
}

/// Spin matrices of the bosonic states `(a₁†)^l (a₂†)^m |0⟩`, `l + m = n − 1`.
pub fn su2_rep_family(n: usize) -> Result<Su2RepReport, RepError> {
    if !(2..=8).contains(&n) {
        return Err(RepError::BadDimension(n));
    }
    let sys = SpinSystem::bosonic();
    let c1 = OperatorExpr::gen(sys.ladder(Party::A, 1).dag());
    let c2 = OperatorExpr::gen(sys.ladder(Party::A, 2).dag());
    let states: Vec<OperatorExpr> = (0..n)
        .rev()
        .map(|l| {
            let m = n - 1 - l;
            let mut s = OperatorExpr::one();
            for _ in 0..l {
                s = s.times(&c1);
            }
            for _ in 0..m {
                s = s.times(&c2);
            }
            s
        })
        .collect();
    let element = |op: &OperatorExpr, p: usize, q: usize| -> Result<Qi2, RepError> {
        let x = states[p].adjoint().times(op).times(&states[q]);
        let v = vev(&x, &sys.rules, &sys.vacuum)?;
        Ok(v.as_constant().expect("ladder expectations are constants"))
    };
    let one = OperatorExpr::one();
    let mut gram = vec![Qi2::zero(); n];
    for p in 0..n {
        for q in 0..n {
            let g = element(&one, p, q)?;
            if p == q {
                gram[p] = g;
            } else if !g.is_zero() {
                return Err(RepError::NotOrthogonal);
            }
        }
    }
    let mut mats: Vec<ExactMatrix> = Vec::new();
    for k in 1..=3 {
        let op: OperatorExpr = sys.spin_operator(Party::A, k)?;
        let mut m = vec![vec![Qi2::zero(); n]; n];
        for p in 0..n {
            let inv = gram[p].inverse().expect("nonzero norm");
            for q in 0..n {
                m[p][q] = element(&op, p, q)? * inv.clone();
            }
        }
        mats.push(m);
    }
    let mut commutators_exact = true;
    for (i, j, k) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
        let lhs = exact_sub(&exact_mul(&mats[i], &mats[j]), &exact_mul(&mats[j], &mats[i]));
        commutators_exact &= lhs == exact_scale(&mats[k], &Qi2::i());
    }
    let casimir = (0..3).fold(vec![vec![Qi2::zero(); n]; n], |acc, k| {
        let sq = exact_mul(&mats[k], &mats[k]);
        acc.iter().zip(&sq).map(|(r, s)| r.iter().zip(s).map(|(a, b)| a.clone() + b.clone()).collect()).collect()
    });
    // s(s+1) with s = (n−1)/2 is (n²−1)/4
    let expected = Qi2::rational((n * n - 1) as i64, 4);
    let mut casimir_exact = true;
    for p in 0..n {
        for q in 0..n {
            let target = if p == q { expected.clone() } else { Qi2::zero() };
            casimir_exact &= casimir[p][q] == target;
        }
    }
    let s3_eigenvalues = (0..n).map(|p| mats[2][p][p].to_string()).collect();
    // orthonormalize with the diagonal Gram matrix: M = G^{1/2} R G^{-1/2}
    let root: Vec<f64> = gram.iter().map(|g| g.to_complex().re.sqrt()).collect();
    let mut herm = 0.0f64;
    let mut floats = Vec::new();
    for m in &mats {
        let f = DMatrix::from_fn(n, n, |p, q| m[p][q].to_complex() * Complex64::new(root[p] / root[q], 0.0));
        herm = herm.max((&f - f.adjoint()).norm());
        floats.push(f);
    }
    let cas = floats.iter().fold(DMatrix::<Complex64>::zeros(n, n), |acc, f| acc + f * f);
    let herm_cas = DMatrix::from_fn(n, n, |p, q| 0.5 * (cas[(p, q)] + cas[(q, p)].conj()).re);
    let eig = herm_cas.symmetric_eigen();
    let target = expected.to_complex().re;
    let spec_defect = eig.eigenvalues.iter().map(|e| (e - target).abs()).fold(0.0, f64::max);
    Ok(Su2RepReport {
        n,
        spin: (n as f64 - 1.0) / 2.0,
        s3_eigenvalues,
        casimir: expected.to_string(),
        casimir_float: target,
        commutators_exact,
        casimir_exact,
        hermiticity_defect: herm,
        casimir_spectrum_defect: spec_defect,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spin_check_passes() {
        let r = fermionic_spin_check().unwrap();
        assert!(r.passed(), "{r:?}");
        assert_eq!(r.chsh, "2*sqrt2");
    }

    #[test]
    fn doublet_and_triplet() {
        let r = su2_rep_family(2).unwrap();
        assert!(r.passed());
        assert_eq!(r.s3_eigenvalues, ["(1/2)", "(-1/2)"]);
        let t = su2_rep_family(3).unwrap();
        assert_eq!(t.s3_eigenvalues, ["1", "0", "-1"]);
        assert_eq!(t.casimir, "2");
    }

    #[test]
    fn quintet_casimir_is_six() {
        let r = su2_rep_family(5).unwrap();
        assert!(r.passed());
        assert_eq!(r.casimir, "6");
        assert!((r.casimir_float - 6.0).abs() < 1e-12);
    }

    #[test]
    fn dimension_bounds() {
        assert!(su2_rep_family(1).is_err());
        assert!(su2_rep_family(9).is_err());
        assert!(su2_rep_family(8).unwrap().passed());
    }
}
