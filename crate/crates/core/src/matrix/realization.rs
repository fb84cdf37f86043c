use std::collections::HashMap;
use std::sync::{Arc, OnceLock};

use nalgebra::{DMatrix, DVector};
use nalgebra_sparse::{CooMatrix, CsrMatrix};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::fock::{adjoint, matvec, FockSpace, Mode, Occupation};
use super::MatrixError;
use crate::algebra::{Scalar, Statistics};
use crate::sampling::{complex_gaussian, rng};
use crate::td::{derive_f_td, mean_var, pair_var, CaseSpec};

const SQRT2: f64 = std::f64::consts::SQRT_2;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// One matrix element of a perturbation, addressed by occupations so that it does not depend on
/// the cutoff.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalEntry {
    pub row: Occupation,
    pub row_sector: usize,
    pub col: Occupation,
    pub col_sector: usize,
    pub re: f64,
    pub im: f64,
}

impl LocalEntry {
    pub fn value(&self) -> Complex64 {
        c(self.re, self.im)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealizationConfig {
    pub cutoff: usize,
    pub epsilon: f64,
    pub seed: u64,
}

impl Default for RealizationConfig {
    fn default() -> Self {
        Self { cutoff: 5, epsilon: 0.01, seed: 0 }
    }
}

/// `α_i = a_i + 𝒜_i`, `β_i = b_i + ℬ_i` with `ψ₀` the vacuum in the `+i` sector.
/// Operator slots are ordered `α₁, α₂, β₁, β₂`.
#[derive(Clone, Debug)]
pub struct MatrixRealization {
    space: Arc<FockSpace>,
    epsilon: f64,
    seed: u64,
    local: [Vec<LocalEntry>; 4],
    pert: [CsrMatrix<Complex64>; 4],
    pert_adj: [CsrMatrix<Complex64>; 4],
    psi0: DVector<Complex64>,
}

fn frobenius(entries: &[LocalEntry]) -> f64 {
    let mut sums: HashMap<(Occupation, usize, Occupation, usize), Complex64> = HashMap::new();
    for e in entries {
        *sums.entry((e.row, e.row_sector, e.col, e.col_sector)).or_default() += e.value();
    }
    sums.values().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

impl MatrixRealization {
    pub fn from_entries(
        space: Arc<FockSpace>,
        epsilon: f64,
        seed: u64,
        local: [Vec<LocalEntry>; 4],
    ) -> Result<Self, MatrixError> {
        if !epsilon.is_finite() || epsilon < 0.0 {
            return Err(MatrixError::BadScale(epsilon));
        }
        let n = space.dimension();
        let mut pert = Vec::with_capacity(4);
        for entries in &local {
            let norm = frobenius(entries);
            if norm > epsilon * (1.0 + 1e-12) {
                return Err(MatrixError::Invalid(format!("perturbation norm {norm} exceeds scale {epsilon}")));
            }
            let mut coo = CooMatrix::new(n, n);
            for e in entries {
                if e.row_sector == e.col_sector {
                    return Err(MatrixError::Invalid("perturbation entry inside an i_eff block".into()));
                }
                let (Some(p), Some(q)) = (space.index(&e.row, e.row_sector), space.index(&e.col, e.col_sector)) else {
                    return Err(MatrixError::OutsideCutoff(format!("{:?} / {:?}", e.row, e.col)));
                };
                coo.push(p, q, e.value());
            }
            pert.push(CsrMatrix::from(&coo));
        }
        let pert: [CsrMatrix<Complex64>; 4] = pert.try_into().expect("four slots");
        let pert_adj = [0, 1, 2, 3].map(|k| adjoint(&pert[k]));
        let psi0 = space.vacuum();
        Ok(Self { space, epsilon, seed, local, pert, pert_adj, psi0 })
    }

    pub fn space(&self) -> &FockSpace {
        &self.space
    }

    pub fn cutoff(&self) -> usize {
        self.space.cutoff()
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn entries(&self) -> &[Vec<LocalEntry>; 4] {
        &self.local
    }

    pub fn psi0(&self) -> &DVector<Complex64> {
        &self.psi0
    }

    /// The same perturbation on another cutoff.
    pub fn with_cutoff(&self, cutoff: usize) -> Result<Self, MatrixError> {
        let space = Arc::new(FockSpace::new(cutoff, self.space.is_emergent())?);
        Self::from_entries(space, self.epsilon, self.seed, self.local.clone())
    }

    /// `𝒜_i, ℬ_i → −𝒜_i, −ℬ_i`.
    pub fn sign_flip(&self) -> Self {
        let local = self.local.clone().map(|v| {
            v.into_iter()
                .map(|mut e| {
                    e.re = -e.re;
                    e.im = -e.im;
                    e
                })
                .collect()
        });
        Self::from_entries(self.space.clone(), self.epsilon, self.seed, local).expect("negation keeps validity")
    }

    /// `γ v` or `γ† v` for slot `k` (`α₁, α₂, β₁, β₂`).
    pub fn apply(&self, k: usize, dagger: bool, v: &DVector<Complex64>) -> DVector<Complex64> {
        let mode = Mode::ALL[k];
        if dagger {
            matvec(self.space.ladder_adj(mode), v) + matvec(&self.pert_adj[k], v)
        } else {
            matvec(self.space.ladder(mode), v) + matvec(&self.pert[k], v)
        }
    }

    fn apply_pert(&self, k: usize, dagger: bool, v: &DVector<Complex64>) -> DVector<Complex64> {
        matvec(if dagger { &self.pert_adj[k] } else { &self.pert[k] }, v)
    }

    fn apply_ladder(&self, k: usize, dagger: bool, v: &DVector<Complex64>) -> DVector<Complex64> {
        let mode = Mode::ALL[k];
        matvec(if dagger { self.space.ladder_adj(mode) } else { self.space.ladder(mode) }, v)
    }

    /// `γ_i† γ_j v`.
    fn bilinear(&self, i: usize, j: usize, v: &DVector<Complex64>) -> DVector<Complex64> {
        self.apply(i, true, &self.apply(j, false, v))
    }

    /// `X ψ₀` with `X = α₁†β₂† − α₂†β₁†`.
    pub fn pair_state(&self) -> DVector<Complex64> {
        let first = self.apply(0, true, &self.apply(3, true, &self.psi0));
        let second = self.apply(1, true, &self.apply(2, true, &self.psi0));
        first - second
    }

    fn chsh_operator(&self, v: &DVector<Complex64>) -> DVector<Complex64> {
        let diff = |i: usize, j: usize, v: &DVector<Complex64>| self.bilinear(i, i, v) - self.bilinear(j, j, v);
        let sum = |i: usize, j: usize, v: &DVector<Complex64>| self.bilinear(i, j, v) + self.bilinear(j, i, v);
        diff(0, 1, &diff(2, 3, v)) + sum(0, 1, &sum(2, 3, v))
    }

    /// `ψ₀† X† O X ψ₀`.
    pub fn sandwich(&self) -> Complex64 {
        let v = self.pair_state();
        v.dotc(&self.chsh_operator(&v))
    }

    /// `F_TD = |ψ₀† X† O X ψ₀| / √2`.
    pub fn numeric_f_td(&self) -> f64 {
        self.sandwich().norm() / SQRT2
    }

    /// `N = ½ ψ₀† X† X ψ₀`; the normalization requires `N = 1`.
    pub fn normalization(&self) -> f64 {
        0.5 * self.pair_state().norm_squared()
    }

    /// `P₀ = ψ₀† Σ_{i,j} (𝒜_i a_j† + ℬ_i b_j†) ψ₀`.
    pub fn numeric_p0(&self) -> Complex64 {
        let mut total = c(0.0, 0.0);
        for (first, second) in [(0, 2), (2, 4)] {
            for i in first..second {
                for j in first..second {
                    let v = self.apply_pert(i, false, &self.apply_ladder(j, true, &self.psi0));
                    total += self.psi0.dotc(&v);
                }
            }
        }
        total
    }

    /// Values of the symbolic indeterminates `x[A i a j]`, `x[B i b j]`, `m[A i]`, `m[B i]`.
    pub fn measured_indeterminates(&self) -> HashMap<Arc<str>, Complex64> {
        let mut out = HashMap::new();
        for second in [false, true] {
            let base = if second { 2 } else { 0 };
            for i in 1..=2u8 {
                let k = base + i as usize - 1;
                for j in 1..=2u8 {
                    let l = base + j as usize - 1;
                    let v = self.apply_pert(k, false, &self.apply_ladder(l, true, &self.psi0));
                    out.insert(pair_var(second, i, j).name, self.psi0.dotc(&v));
                }
                out.insert(mean_var(second, i).name, self.psi0.dotc(&self.apply_pert(k, false, &self.psi0)));
            }
        }
        out
    }

    /// `S(n)·v` for party A (`slots 0, 1`) or B (`slots 2, 3`).
    fn spin_along(&self, base: usize, n: [f64; 3], v: &DVector<Complex64>) -> DVector<Complex64> {
        let off12 = self.bilinear(base, base + 1, v);
        let off21 = self.bilinear(base + 1, base, v);
        let d = self.bilinear(base, base, v) - self.bilinear(base + 1, base + 1, v);
        let x = &off12 + &off21;
        let y = (off21 - off12) * c(0.0, 1.0);
        (x * c(n[0], 0.0) + y * c(n[1], 0.0) + d * c(n[2], 0.0)) * c(0.5, 0.0)
    }

    /// `4⟨S_A(m) S_B(n)⟩` in the normalized pair state `Xψ₀`.
    pub fn correlation(&self, m: [f64; 3], n: [f64; 3]) -> f64 {
        let v = self.pair_state();
        let w = self.spin_along(0, m, &self.spin_along(2, n, &v));
        4.0 * v.dotc(&w).re / v.norm_squared()
    }

    /// Columns of `f` on `window`, restricted to the same rows.
    fn block(&self, window: &[usize], f: impl Fn(&DVector<Complex64>) -> DVector<Complex64>) -> DMatrix<Complex64> {
        let n = self.space.dimension();
        let mut out = DMatrix::zeros(window.len(), window.len());
        for (col, &q) in window.iter().enumerate() {
            let mut e = DVector::zeros(n);
            e[q] = c(1.0, 0.0);
            let image = f(&e);
            for (row, &p) in window.iter().enumerate() {
                out[(row, col)] = image[p];
            }
        }
        out
    }

    /// Basis states with every occupation below `L − 1`, where raising is exact.
    fn sub_cutoff(&self) -> Vec<usize> {
        let l = self.cutoff();
        (0..self.space.dimension()).filter(|&p| self.space.state(p).0.iter().all(|&n| n + 1 < l)).collect()
    }

    fn unit(&self, window: &[usize]) -> DMatrix<Complex64> {
        let emergent = self.space.is_emergent();
        DMatrix::from_fn(window.len(), window.len(), |p, q| {
            if p != q {
                c(0.0, 0.0)
            } else if emergent && window[p] % 2 == 1 {
                c(-1.0, 0.0)
            } else {
                c(1.0, 0.0)
            }
        })
    }

    fn alpha_csr(&self, k: usize) -> CsrMatrix<Complex64> {
        let n = self.space.dimension();
        let mut coo = CooMatrix::new(n, n);
        for (p, q, v) in self.space.ladder(Mode::ALL[k]).triplet_iter().chain(self.pert[k].triplet_iter()) {
            coo.push(p, q, *v);
        }
        CsrMatrix::from(&coo)
    }

    pub fn invariants(&self) -> InvariantReport {
        let ieff = self.space.ieff();
        let mut split = 0.0f64;
        let mut commuting = 0.0f64;
        let mut anticommuting = 0.0f64;
        for k in 0..4 {
            let alpha = self.alpha_csr(k);
            let mut c_part: HashMap<(usize, usize), Complex64> = HashMap::new();
            let mut a_part: HashMap<(usize, usize), Complex64> = HashMap::new();
            for (p, q, v) in alpha.triplet_iter() {
                let m_eff = (v - ieff.diag(p) * v * ieff.diag(q)) * 0.5;
                *c_part.entry((p, q)).or_default() += m_eff;
                *a_part.entry((p, q)).or_default() += v - m_eff;
            }
            for (p, q, v) in self.space.ladder(Mode::ALL[k]).triplet_iter() {
                *c_part.entry((p, q)).or_default() -= v;
            }
            for (p, q, v) in self.pert[k].triplet_iter() {
                *a_part.entry((p, q)).or_default() -= v;
            }
            split = split.max(c_part.values().chain(a_part.values()).map(|z| z.norm()).fold(0.0, f64::max));
            let comm: f64 = self
                .space
                .ladder(Mode::ALL[k])
                .triplet_iter()
                .map(|(p, q, v)| (v * ieff.diag(q) - ieff.diag(p) * v).norm_sqr())
                .sum();
            let anti: f64 =
                self.pert[k].triplet_iter().map(|(p, q, v)| (v * ieff.diag(q) + ieff.diag(p) * v).norm_sqr()).sum();
            commuting = commuting.max(comm.sqrt());
            anticommuting = anticommuting.max(anti.sqrt());
        }
        let sub = self.sub_cutoff();
        let unit = self.unit(&sub);
        let mut ccr = 0.0f64;
        for i in 0..4 {
            for j in 0..4 {
                let m = self.block(&sub, |v| {
                    self.apply_ladder(i, false, &self.apply_ladder(j, true, v))
                        - self.apply_ladder(j, true, &self.apply_ladder(i, false, v))
                });
                let target = if i == j { unit.clone() } else { DMatrix::zeros(sub.len(), sub.len()) };
                ccr = ccr.max((m - target).norm());
            }
        }
        let vacuum = (0..4).map(|k| self.apply_ladder(k, false, &self.psi0).norm()).fold(0.0, f64::max);
        let window = self.space.window(2);
        let mut remainder_min = f64::INFINITY;
        for i in 0..4 {
            let first = if i < 2 { 0 } else { 2 };
            let mut best = 0.0f64;
            for j in first..first + 2 {
                let m = self.block(&window, |v| {
                    self.apply_ladder(j, false, &self.apply_pert(i, true, v))
                        - self.apply_pert(i, true, &self.apply_ladder(j, false, v))
                });
                best = best.max(m.norm());
            }
            remainder_min = remainder_min.min(best);
        }
        let norms = [0, 1, 2, 3].map(|k| frobenius(&self.local[k]));
        InvariantReport {
            epsilon: self.epsilon,
            split_defect: split,
            commuting_defect: commuting,
            anticommuting_defect: anticommuting,
            ccr_defect: ccr,
            vacuum_defect: vacuum,
            perturbation_norms: norms,
            remainder_norm_min: remainder_min,
            psi0_norm: self.psi0.norm(),
        }
    }

    /// `Σ_k [γ_k, γ_k†]` (or the anticommutator) on a window, one block per slot.
    fn per_term(&self, window: &[usize], anti: bool) -> Vec<DMatrix<Complex64>> {
        (0..4)
            .map(|k| {
                self.block(window, |v| {
                    let x = self.apply(k, false, &self.apply(k, true, v));
                    let y = self.apply(k, true, &self.apply(k, false, v));
                    if anti {
                        x + y
                    } else {
                        x - y
                    }
                })
            })
            .collect()
    }

    /// `C̃ = i Σ_k ([α_k, α_k†] + [β_k, β_k†])` on the states of total occupation ≤ 2.
    pub fn adler_millard(&self) -> WindowMatrix {
        let window = self.space.window(2);
        let sum = self.per_term(&window, false).into_iter().fold(DMatrix::zeros(window.len(), window.len()), |a, b| a + b);
        WindowMatrix { states: window, matrix: sum * c(0.0, 1.0) }
    }

    /// `½ Tr Σ_k ({α_k, α_k†} + {β_k, β_k†})` over the states of total occupation ≤ 2.
    pub fn trace_hamiltonian(&self) -> Complex64 {
        let window = self.space.window(2);
        self.per_term(&window, true).iter().map(|m| m.trace()).sum::<Complex64>() * 0.5
    }

    pub fn charge_report(&self) -> ChargeReport {
        let window = self.space.window(2);
        let terms = self.per_term(&window, false);
        let cm = self.adler_millard().matrix;
        let unit = self.unit(&window);
        let ieff = self.space.ieff();
        let eff = |m: &DMatrix<Complex64>| {
            DMatrix::from_fn(m.nrows(), m.ncols(), |p, q| {
                (m[(p, q)] - ieff.diag(window[p]) * m[(p, q)] * ieff.diag(window[q])) * 0.5
            })
        };
        let plus: Vec<usize> = (0..window.len()).filter(|&p| window[p] % 2 == 0).collect();
        let mut unit_defect = 0.0f64;
        let mut plus_defect = 0.0f64;
        for t in &terms {
            let e = eff(t);
            unit_defect = unit_defect.max((&e - &unit).norm());
            let ie = e * c(0.0, 1.0);
            let block = DMatrix::from_fn(plus.len(), plus.len(), |p, q| {
                ie[(plus[p], plus[q])] - if p == q { c(0.0, 1.0) } else { c(0.0, 0.0) }
            });
            plus_defect = plus_defect.max(block.norm());
        }
        let h = self.trace_hamiltonian();
        ChargeReport {
            emergent: self.space.is_emergent(),
            window_dimension: window.len(),
            charge_norm: cm.norm(),
            anti_self_adjoint_defect: (&cm + cm.adjoint()).norm(),
            effective_charge_norm: eff(&cm).norm(),
            unit_defect,
            plus_sector_defect: plus_defect,
            trace_hamiltonian_re: h.re,
            trace_hamiltonian_im: h.im,
        }
    }

    pub fn snapshot(&self) -> MatrixSnapshot {
        let mut matrices = Vec::new();
        for k in 0..4 {
            let name = ["alpha1", "alpha2", "beta1", "beta2"][k];
            matrices.push(SparseMatrixJson::from_csr(name, &self.alpha_csr(k)));
        }
        for (k, name) in ["A1", "A2", "B1", "B2"].iter().enumerate() {
            matrices.push(SparseMatrixJson::from_csr(name, &self.pert[k]));
        }
        MatrixSnapshot {
            schema_version: 1,
            cutoff: self.cutoff(),
            dimension: self.space.dimension(),
            internal_dimension: 2,
            emergent: self.space.is_emergent(),
            epsilon: self.epsilon,
            seed: self.seed,
            basis: "index = 2*(((n_a1*L + n_a2)*L + n_b1)*L + n_b2) + sector; sector 0 is the +i eigenspace of i_eff".into(),
            psi0_index: 0,
            matrices,
            perturbation: self.local.clone().to_vec(),
        }
    }

    pub fn from_snapshot(s: &MatrixSnapshot) -> Result<Self, MatrixError> {
        if s.schema_version != 1 {
            return Err(MatrixError::Invalid(format!("unknown schema version {}", s.schema_version)));
        }
        let local: [Vec<LocalEntry>; 4] = s
            .perturbation
            .clone()
            .try_into()
            .map_err(|_| MatrixError::Invalid("expected four perturbation blocks".into()))?;
        let space = Arc::new(FockSpace::new(s.cutoff, s.emergent)?);
        Self::from_entries(space, s.epsilon, s.seed, local)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvariantReport {
    pub epsilon: f64,
    /// Largest entry of `split(α) − (a, 𝒜)`.
    pub split_defect: f64,
    /// Largest `‖[a_i, i_eff]‖`.
    pub commuting_defect: f64,
    /// Largest `‖{𝒜_i, i_eff}‖`.
    pub anticommuting_defect: f64,
    /// `‖[a_i, a_j†] − δ_ij·1‖` below the cutoff (`1_eff` for emergent ladders).
    pub ccr_defect: f64,
    pub vacuum_defect: f64,
    pub perturbation_norms: [f64; 4],
    /// Smallest over `i` of `max_j ‖[a_j, 𝒜_i†]‖` on the low-occupation window.
    pub remainder_norm_min: f64,
    pub psi0_norm: f64,
}

impl InvariantReport {
    pub fn passed(&self) -> bool {
        let remainders = self.epsilon == 0.0 || self.remainder_norm_min > 0.0;
        self.split_defect <= 1e-12
            && self.commuting_defect <= 1e-12
            && self.anticommuting_defect <= 1e-14
            && self.ccr_defect <= 1e-12
            && self.vacuum_defect == 0.0
            && self.perturbation_norms.iter().all(|&n| n <= self.epsilon * (1.0 + 1e-12))
            && (self.psi0_norm - 1.0).abs() <= 1e-15
            && remainders
    }
}

#[derive(Clone, Debug)]
pub struct WindowMatrix {
    pub states: Vec<usize>,
    pub matrix: DMatrix<Complex64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChargeReport {
    pub emergent: bool,
    pub window_dimension: usize,
    pub charge_norm: f64,
    pub anti_self_adjoint_defect: f64,
    pub effective_charge_norm: f64,
    /// Largest `‖[γ_k, γ_k†]_eff − 1‖` on the window (`1_eff` for emergent ladders).
    pub unit_defect: f64,
    /// Largest `‖i[γ_k, γ_k†]_eff − i·1‖` on the `+i` part of the window.
    pub plus_sector_defect: f64,
    pub trace_hamiltonian_re: f64,
    pub trace_hamiltonian_im: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparseMatrixJson {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
    /// Nonzero entries in row-major order as `[row, col, re, im]`.
    pub entries: Vec<(usize, usize, f64, f64)>,
}

impl SparseMatrixJson {
    fn from_csr(name: &str, m: &CsrMatrix<Complex64>) -> Self {
        let entries = m.triplet_iter().filter(|(_, _, v)| v.norm() != 0.0).map(|(p, q, v)| (p, q, v.re, v.im)).collect();
        Self { name: name.into(), rows: m.nrows(), cols: m.ncols(), entries }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixSnapshot {
    pub schema_version: u32,
    pub cutoff: usize,
    pub dimension: usize,
    pub internal_dimension: usize,
    pub emergent: bool,
    pub epsilon: f64,
    pub seed: u64,
    pub basis: String,
    pub psi0_index: usize,
    pub matrices: Vec<SparseMatrixJson>,
    pub perturbation: Vec<Vec<LocalEntry>>,
}

/// Vacuum and the four one-particle occupations.
pub(crate) fn low_states() -> [Occupation; 5] {
    [[0, 0, 0, 0], [1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]
}

/// Random off-block perturbations supported on the vacuum and one-particle states, each of
/// Frobenius norm `ε`.
pub fn build_realization(cfg: &RealizationConfig) -> Result<MatrixRealization, MatrixError> {
    if !cfg.epsilon.is_finite() || cfg.epsilon < 0.0 {
        return Err(MatrixError::BadScale(cfg.epsilon));
    }
    let space = Arc::new(FockSpace::new(cfg.cutoff, false)?);
    random_on(space, cfg.epsilon, cfg.seed)
}

/// Random perturbations on the emergent ladders `a ⊗ P₊ + a† ⊗ P₋`.
pub fn emergent_realization(cfg: &RealizationConfig) -> Result<MatrixRealization, MatrixError> {
    if !cfg.epsilon.is_finite() || cfg.epsilon < 0.0 {
        return Err(MatrixError::BadScale(cfg.epsilon));
    }
    let space = Arc::new(FockSpace::new(cfg.cutoff, true)?);
    random_on(space, cfg.epsilon, cfg.seed)
}

fn random_on(space: Arc<FockSpace>, epsilon: f64, seed: u64) -> Result<MatrixRealization, MatrixError> {
    let mut r = rng(seed);
    let low = low_states();
    let local = [0, 1, 2, 3].map(|_| {
        let z = complex_gaussian(&mut r, 2 * low.len() * low.len());
        if epsilon == 0.0 {
            return Vec::new();
        }
        let norm = z.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        let mut out = Vec::with_capacity(z.len());
        let mut it = z.into_iter();
        for (row_sector, col_sector) in [(1, 0), (0, 1)] {
            for row in low {
                for col in low {
                    let v = it.next().expect("enough draws") * (epsilon / norm);
                    out.push(LocalEntry { row, row_sector, col, col_sector, re: v.re, im: v.im });
                }
            }
        }
        out
    });
    MatrixRealization::from_entries(space, epsilon, seed, local)
}

/// One CSV row of an ε scan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub epsilon: f64,
    pub seed: u64,
    #[serde(rename = "F_TD")]
    pub f_td: f64,
    #[serde(rename = "ReP0")]
    pub re_p0: f64,
    #[serde(rename = "ImP0")]
    pub im_p0: f64,
    /// `N − 1`.
    pub constraint_residual: f64,
    /// `F_TD − (2√2 + Re(P₀)/√2)`.
    pub formula_residual: f64,
}

pub fn scan_row(cutoff: usize, epsilon: f64, seed: u64) -> Result<ScanRow, MatrixError> {
    let r = build_realization(&RealizationConfig { cutoff, epsilon, seed })?;
    let f = r.numeric_f_td();
    let p0 = r.numeric_p0();
    Ok(ScanRow {
        epsilon,
        seed,
        f_td: f,
        re_p0: p0.re,
        im_p0: p0.im,
        constraint_residual: r.normalization() - 1.0,
        formula_residual: f - (2.0 * SQRT2 + p0.re / SQRT2),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConsistencyReport {
    pub epsilon: f64,
    pub numeric_f_td: f64,
    /// The symbolic first-order value evaluated at the measured indeterminates.
    pub predicted: f64,
    pub residual: f64,
    pub re_p0: f64,
    pub im_p0: f64,
    pub measured_max_abs: f64,
}

fn symbolic_value() -> Result<&'static Scalar, MatrixError> {
    static VALUE: OnceLock<Result<Scalar, String>> = OnceLock::new();
    VALUE
        .get_or_init(|| {
            let case = CaseSpec::new(Statistics::Bosonic, crate::td::Convention::Canonical);
            derive_f_td(&case).map(|d| d.value).map_err(|e| e.to_string())
        })
        .as_ref()
        .map_err(|e| MatrixError::Symbolic(e.clone()))
}

/// Substitutes the realization's measured indeterminates into the symbolic first-order value.
pub fn consistency_check(r: &MatrixRealization) -> Result<ConsistencyReport, MatrixError> {
    let value = symbolic_value()?;
    let measured = r.measured_indeterminates();
    let predicted = value
        .eval(&measured)
        .ok_or_else(|| MatrixError::Symbolic("value has an indeterminate without a measurement".into()))?;
    let numeric = r.numeric_f_td();
    let p0 = r.numeric_p0();
    Ok(ConsistencyReport {
        epsilon: r.epsilon(),
        numeric_f_td: numeric,
        predicted: predicted.re,
        residual: numeric - predicted.re,
        re_p0: p0.re,
        im_p0: p0.im,
        measured_max_abs: measured.values().map(|z| z.norm()).fold(0.0, f64::max),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(epsilon: f64, seed: u64) -> RealizationConfig {
        RealizationConfig { cutoff: 4, epsilon, seed }
    }

    #[test]
    fn quantum_limit() {
        let r = build_realization(&cfg(0.0, 1)).unwrap();
        assert!((r.numeric_f_td() - 2.0 * SQRT2).abs() <= 1e-10);
        assert!((r.normalization() - 1.0).abs() <= 1e-12);
        assert!(r.numeric_p0().norm() == 0.0);
        assert!(r.invariants().passed());
    }

    #[test]
    fn invariants_hold() {
        let r = build_realization(&cfg(0.05, 7)).unwrap();
        let inv = r.invariants();
        assert!(inv.passed(), "{inv:?}");
        assert!(inv.remainder_norm_min > 0.0);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert_eq!(build_realization(&cfg(-0.1, 0)).unwrap_err(), MatrixError::BadScale(-0.1));
        let mut c = cfg(0.1, 0);
        c.cutoff = 3;
        assert_eq!(build_realization(&c).unwrap_err(), MatrixError::CutoffTooSmall(3));
    }

    #[test]
    fn sign_flip_negates_p0() {
        let r = build_realization(&cfg(0.1, 2)).unwrap();
        let f = r.sign_flip();
        assert!((r.numeric_p0() + f.numeric_p0()).norm() <= 1e-12);
    }

    #[test]
    fn charges() {
        let r = build_realization(&cfg(0.1, 4)).unwrap();
        let ch = r.charge_report();
        assert!(ch.anti_self_adjoint_defect <= 1e-12);
        assert!(ch.trace_hamiltonian_im.abs() <= 1e-12);
        let e = emergent_realization(&cfg(0.0, 0)).unwrap();
        let ch = e.charge_report();
        assert!(ch.unit_defect <= 1e-12 && ch.plus_sector_defect <= 1e-12, "{ch:?}");
        assert!(e.invariants().passed(), "{:?}", e.invariants());
    }

    #[test]
    fn snapshot_round_trip() {
        let r = build_realization(&cfg(0.1, 5)).unwrap();
        let s = r.snapshot();
        let json = serde_json::to_string(&s).unwrap();
        let back: MatrixSnapshot = serde_json::from_str(&json).unwrap();
        let r2 = MatrixRealization::from_snapshot(&back).unwrap();
        assert_eq!(r.numeric_f_td().to_bits(), r2.numeric_f_td().to_bits());
    }
}
