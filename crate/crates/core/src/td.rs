//! Symbolic trace-dynamics CHSH reduction.
//!
//! The matrix variables are split as `α_i = a_i + 𝒜_i`, `β_i = b_i + ℬ_i`, where `𝒜, ℬ` carry
//! ε-grade 1. The reduction truncates at first order in ε, normal-orders under the case's
//! rules and evaluates the vacuum expectation.

use std::cmp::Ordering;

use num_complex::Complex64;
use serde::Serialize;

use crate::algebra::{
    normal_order, vev, word_grade, AlgebraError, Generator, OperatorExpr, Qi2, RewriteRules, Scalar, Statistics,
    Vacuum, Var,
};

#[derive(Debug, Clone, thiserror::Error)]
pub enum TdError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("derivation does not reach the expected value; residual = {}", .0.residual)]
    DerivationFailure(Box<Derivation>),
    #[error("normalization constraint is not a multiple of Re(diagonal P₀); residual = {0}")]
    ConstraintMismatch(Scalar),
    #[error("sign of the leading term of `{0}` is undecidable")]
    UndecidableSign(String),
}

/// How the commuting parts' commutators are realized.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Convention {
    /// `[a_i, a_j†] = δ_ij · 1`.
    Canonical,
    /// `[a_i, a_j†] = δ_ij · 1_eff`, with ψ₀ in the `+i` sector of `i_eff`.
    Emergent,
}

/// Rules, vacuum and indeterminate table for one family of constraints.
#[derive(Clone, Debug)]
pub struct CaseSpec {
    pub statistics: Statistics,
    pub convention: Convention,
    pub flipped: bool,
    pub rules: RewriteRules,
    pub vacuum: Vacuum,
}

pub fn a(i: u8, s: Statistics) -> Generator {
    Generator::a(i, s)
}

pub fn b(i: u8, s: Statistics) -> Generator {
    Generator::b(i, s)
}

pub fn cal_a(i: u8, s: Statistics) -> Generator {
    Generator::cal_a(i, s)
}

pub fn cal_b(i: u8, s: Statistics) -> Generator {
    Generator::cal_b(i, s)
}

/// The effective identity `1_eff = i_eff / i`.
pub fn eff_identity() -> Generator {
    Generator::abstract_gen("1_eff", 0, Statistics::Bosonic, true)
}

/// Remainder `[𝒜_i, a_j†]` (or `[ℬ_i, b_j†]` when `second` is set).
pub fn remainder_gen(second: bool, i: u8, j: u8) -> Generator {
    let name = if second { format!("K[B{i},b{j}†]") } else { format!("K[A{i},a{j}†]") };
    Generator::abstract_gen(&name, 1, Statistics::Bosonic, false)
}

/// Indeterminate for `ψ₀† 𝒜_i a_j† ψ₀` (or the `ℬ, b` analogue).
pub fn pair_var(second: bool, i: u8, j: u8) -> Var {
    Var::new(&if second { format!("x[B{i}b{j}]") } else { format!("x[A{i}a{j}]") })
}

/// Indeterminate for `ψ₀† 𝒜_i ψ₀` (or `ℬ_i`).
pub fn mean_var(second: bool, i: u8) -> Var {
    Var::new(&if second { format!("m[B{i}]") } else { format!("m[A{i}]") })
}

impl CaseSpec {
    pub fn new(statistics: Statistics, convention: Convention) -> Self {
        let s = statistics;
        let ladders = [a(1, s), a(2, s), b(1, s), b(2, s)];
        let mut rules = RewriteRules::new();
        let unit = match convention {
            Convention::Canonical => OperatorExpr::one(),
            Convention::Emergent => OperatorExpr::gen(eff_identity()),
        };
        let relate = |r: &mut RewriteRules, g: &Generator, h: &Generator, rem: OperatorExpr| match s {
            Statistics::Bosonic => r.set_commutator(g, h, rem),
            Statistics::Fermionic => r.set_anticommutator(g, h, rem),
        };
        for g in &ladders {
            for h in &ladders {
                let rem = if g == h { unit.clone() } else { OperatorExpr::zero() };
                relate(&mut rules, g, &h.dag(), rem);
            }
        }
        let mut vacuum = Vacuum::new(ladders.iter().cloned());
        for second in [false, true] {
            for i in 1..=2u8 {
                let pert = if second { cal_b(i, s) } else { cal_a(i, s) };
                for j in 1..=2u8 {
                    let partner = if second { b(j, s) } else { a(j, s) };
                    let k = remainder_gen(second, i, j);
                    relate(&mut rules, &pert, &partner.dag(), OperatorExpr::gen(k.clone()));
                    let x = Scalar::var(pair_var(second, i, j));
                    vacuum.declare(vec![k.adjoint()], x.conj());
                    vacuum.declare(vec![k], x);
                }
                let m = Scalar::var(mean_var(second, i));
                vacuum.declare(vec![pert.adjoint()], m.conj());
                vacuum.declare(vec![pert], m);
            }
        }
        if convention == Convention::Emergent {
            let e = eff_identity();
            let odd: Vec<Generator> = (1..=2u8)
                .flat_map(|i| [cal_a(i, s), cal_b(i, s)])
                .chain((1..=2u8).flat_map(|i| (1..=2u8).flat_map(move |j| [remainder_gen(false, i, j), remainder_gen(true, i, j)])))
                .collect();
            for g in odd {
                rules.set_anticommutator(&e, &g, OperatorExpr::zero());
                rules.set_anticommutator(&e, &g.adjoint(), OperatorExpr::zero());
            }
            vacuum.fixed.insert(e);
            vacuum.sector_parity = true;
        }
        Self { statistics, convention, flipped: false, rules, vacuum }
    }

    pub fn bosonic() -> Self {
        Self::new(Statistics::Bosonic, Convention::Canonical)
    }

    pub fn fermionic() -> Self {
        Self::new(Statistics::Fermionic, Convention::Canonical)
    }

    /// `𝒜, ℬ → −𝒜, −ℬ`: all ε-grade-1 expectations change sign.
    pub fn sign_flip(&self) -> Self {
        let mut out = self.clone();
        out.flipped = !self.flipped;
        for (w, v) in out.vacuum.indeterminates.iter_mut() {
            if word_grade(w) % 2 == 1 {
                *v = -v.clone();
            }
        }
        out
    }

    /// `P₀ = Σ_{i,j} ⟨𝒜_i a_j†⟩ + ⟨ℬ_i b_j†⟩`.
    pub fn p0(&self) -> Scalar {
        self.pair_sum(|_, _| true)
    }

    /// Diagonal part `Σ_i ⟨𝒜_i a_i†⟩ + ⟨ℬ_i b_i†⟩`.
    pub fn p0_diagonal(&self) -> Scalar {
        self.pair_sum(|i, j| i == j)
    }

    pub fn p0_off_diagonal(&self) -> Scalar {
        self.pair_sum(|i, j| i != j)
    }

    fn pair_sum(&self, keep: impl Fn(u8, u8) -> bool) -> Scalar {
        let mut out = Scalar::zero();
        for second in [false, true] {
            for i in 1..=2u8 {
                for j in 1..=2u8 {
                    if keep(i, j) {
                        let k = remainder_gen(second, i, j);
                        out = out + self.vacuum.indeterminates.get(&vec![k]).cloned().unwrap_or_default();
                    }
                }
            }
        }
        out
    }

    /// Generators of the CHSH sandwich that must appear in the rules.
    pub fn missing_generators(&self) -> Vec<Generator> {
        let known = self.rules.generators();
        let s = self.statistics;
        (1..=2u8)
            .flat_map(|i| [a(i, s), b(i, s), cal_a(i, s), cal_b(i, s)])
            .flat_map(|g| [g.adjoint(), g])
            .filter(|g| !known.contains(g))
            .collect()
    }
}

/// `α_i = a_i + 𝒜_i`.
pub fn alpha(i: u8, s: Statistics) -> OperatorExpr {
    OperatorExpr::gen(a(i, s)) + OperatorExpr::gen(cal_a(i, s))
}

/// `β_i = b_i + ℬ_i`.
pub fn beta(i: u8, s: Statistics) -> OperatorExpr {
    OperatorExpr::gen(b(i, s)) + OperatorExpr::gen(cal_b(i, s))
}

/// Pair creator `X = α₁†β₂† − α₂†β₁†` in terms of generators `α, β`.
pub fn pair_creator(s: Statistics) -> OperatorExpr {
    let g = |x: Generator| OperatorExpr::gen(x.dag());
    g(Generator::alpha(1, s)) * g(Generator::beta(2, s)) - g(Generator::alpha(2, s)) * g(Generator::beta(1, s))
}

/// `O = (α₁†α₁ − α₂†α₂)(β₁†β₁ − β₂†β₂) + (α₁†α₂ + α₂†α₁)(β₁†β₂ + β₂†β₁)`.
pub fn chsh_operator(s: Statistics) -> OperatorExpr {
    let bil = |f: fn(u8, Statistics) -> Generator, i: u8, j: u8| OperatorExpr::word(vec![f(i, s).dag(), f(j, s)]);
    let al = Generator::alpha;
    let be = Generator::beta;
    (bil(al, 1, 1) - bil(al, 2, 2)) * (bil(be, 1, 1) - bil(be, 2, 2))
        + (bil(al, 1, 2) + bil(al, 2, 1)) * (bil(be, 1, 2) + bil(be, 2, 1))
}

/// `X† O X` over `α, β`.
pub fn td_chsh_in_alpha(s: Statistics) -> OperatorExpr {
    let x = pair_creator(s);
    x.adjoint() * chsh_operator(s) * x
}

/// Replaces `α_i → a_i + 𝒜_i`, `β_i → b_i + ℬ_i` (and adjoints).
pub fn split_alpha_beta(x: &OperatorExpr, s: Statistics) -> OperatorExpr {
    x.substitute(|g| {
        let base = match (g.species, g.eps, g.name.starts_with("alpha"), g.name.starts_with("beta")) {
            (crate::algebra::Species::Alpha, 0, true, _) => alpha(g.mode, s),
            (crate::algebra::Species::Beta, 0, _, true) => beta(g.mode, s),
            _ => return None,
        };
        Some(if g.dagger { base.adjoint() } else { base })
    })
}

/// The sandwiched CHSH polynomial `X† O X` with `α = a + 𝒜`, `β = b + ℬ` substituted.
/// `F_TD = |ψ₀† X† O X ψ₀| / √2`.
pub fn td_chsh_expression(s: Statistics) -> OperatorExpr {
    split_alpha_beta(&td_chsh_in_alpha(s), s)
}

/// Prefactor turning `ψ₀† X† O X ψ₀` into `F_TD`.
pub fn chsh_prefactor() -> Qi2 {
    Qi2::inv_sqrt2()
}

/// Full record of a reduction, kept whether or not it reaches the expected value.
#[derive(Clone, Debug)]
pub struct Derivation {
    pub convention: Convention,
    pub statistics: Statistics,
    pub flipped: bool,
    /// `ψ₀† X† O X ψ₀` after truncation and normal ordering.
    pub sandwich: Scalar,
    /// `F_TD`, first order in ε (absolute value taken through the sign of the leading term).
    pub value: Scalar,
    /// Imaginary part of the sandwich; zero when it is self-conjugate.
    pub imaginary: Scalar,
    pub p0: Scalar,
    /// What the value is compared against.
    pub expected: Scalar,
    pub residual: Scalar,
    pub words_full: usize,
    pub words_truncated: usize,
}

impl Derivation {
    pub fn holds(&self) -> bool {
        self.residual.is_zero()
    }
}

/// `2√2 + (1/√2) Re(P₀)` for the canonical convention, `2√2` for the emergent one.
pub fn expected_value(case: &CaseSpec) -> Scalar {
    let base = Scalar::constant(Qi2::sqrt2().scale(2, 1));
    match case.convention {
        Convention::Canonical => base + case.p0().re().scale(&Qi2::inv_sqrt2()),
        Convention::Emergent => base,
    }
}

fn imaginary_part(x: &Scalar) -> Scalar {
    (x.clone() - x.conj()).scale(&(-Qi2::i() * Qi2::rational(1, 2)))
}

/// Runs truncation, normal ordering and vev on the CHSH sandwich without asserting.
pub fn derive_f_td(case: &CaseSpec) -> Result<Derivation, TdError> {
    case.rules.check_grading()?;
    let full = td_chsh_expression(case.statistics);
    let truncated = full.epsilon_truncate();
    let ordered = normal_order(&truncated, &case.rules)?;
    let sandwich = vev(&ordered, &case.rules, &case.vacuum)?;
    let lead = sandwich.constant_term();
    let sign = match (lead.is_real(), lead.re.signum()) {
        (true, Ordering::Greater) => 1,
        (true, Ordering::Less) => -1,
        _ => return Err(TdError::UndecidableSign(sandwich.to_string())),
    };
    let value = sandwich.re().scale(&(chsh_prefactor() * Qi2::int(sign)));
    let expected = expected_value(case);
    let residual = value.clone() - expected.clone();
    Ok(Derivation {
        convention: case.convention,
        statistics: case.statistics,
        flipped: case.flipped,
        imaginary: imaginary_part(&sandwich),
        sandwich,
        value,
        p0: case.p0(),
        expected,
        residual,
        words_full: full.len(),
        words_truncated: truncated.len(),
    })
}

/// Value and `P₀` of a successful reduction.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedChsh {
    pub value: Scalar,
    pub p0: Scalar,
}

/// Mechanical reduction of the CHSH sandwich; fails with the residual polynomial unless the
/// value equals [`expected_value`] identically.
pub fn reduce_f_td(case: &CaseSpec) -> Result<ReducedChsh, TdError> {
    let d = derive_f_td(case)?;
    if d.holds() {
        Ok(ReducedChsh { value: d.value, p0: d.p0 })
    } else {
        Err(TdError::DerivationFailure(Box::new(d)))
    }
}

/// Reduction of `(1/2) ψ₀† X† X ψ₀ = 1`.
#[derive(Clone, Debug)]
pub struct NormalizationConstraint {
    /// `(1/2) ψ₀† X† X ψ₀` to first order.
    pub norm: Scalar,
    /// `norm − 1`, which must vanish.
    pub constraint: Scalar,
    /// `c` with `constraint = c · Re(Σ_i diagonal)`.
    pub factor: Qi2,
    /// `Re(P₀)` once the constraint holds: `Re(Σ_{i≠j} …)`.
    pub reduced_re_p0: Scalar,
}

pub fn normalization_constraint(case: &CaseSpec) -> Result<NormalizationConstraint, TdError> {
    let x = split_alpha_beta(&pair_creator(case.statistics), case.statistics);
    let xx = x.adjoint().mul_bounded(&x, 1).scale_exact(&Qi2::rational(1, 2));
    let norm = vev(&normal_order(&xx, &case.rules)?, &case.rules, &case.vacuum)?;
    let constraint = norm.clone() - Scalar::one();
    let diag = case.p0_diagonal().re();
    let factor = proportionality(&constraint, &diag).ok_or_else(|| TdError::ConstraintMismatch(constraint.clone()))?;
    if factor.is_zero() && !diag.is_zero() {
        return Err(TdError::ConstraintMismatch(constraint));
    }
    Ok(NormalizationConstraint { norm, constraint, factor, reduced_re_p0: case.p0().re() - diag })
}

/// `c` with `x = c·y` exactly, if it exists.
fn proportionality(x: &Scalar, y: &Scalar) -> Option<Qi2> {
    if y.is_zero() {
        return x.is_zero().then(Qi2::zero);
    }
    let (m, cy) = y.terms().next()?;
    let cx = x.terms().find(|(mx, _)| *mx == m).map(|(_, c)| c.clone()).unwrap_or_default();
    let c = cx * cy.inverse()?;
    (y.scale(&c) == *x).then_some(c)
}

/// `C̃ = i Σ_k ([α_k, α_k†] + [β_k, β_k†])`, normal-ordered and truncated to first order.
/// Under the emergent convention only the `i_eff`-commuting part is kept.
pub fn adler_millard_symbolic(case: &CaseSpec) -> Result<OperatorExpr, TdError> {
    let s = case.statistics;
    let mut c = OperatorExpr::zero();
    for k in 1..=2 {
        for v in [alpha(k, s), beta(k, s)] {
            c = c + OperatorExpr::commutator(&v, &v.adjoint());
        }
    }
    finish_charge(case, c.scale_exact(&Qi2::i()))
}

/// Integrand of the trace Hamiltonian `(1/2) Σ_k ({α_k, α_k†} + {β_k, β_k†})`.
pub fn trace_hamiltonian_symbolic(case: &CaseSpec) -> Result<OperatorExpr, TdError> {
    let s = case.statistics;
    let mut h = OperatorExpr::zero();
    for k in 1..=2 {
        for v in [alpha(k, s), beta(k, s)] {
            h = h + OperatorExpr::anticommutator(&v, &v.adjoint());
        }
    }
    finish_charge(case, h.scale_exact(&Qi2::rational(1, 2)))
}

fn finish_charge(case: &CaseSpec, x: OperatorExpr) -> Result<OperatorExpr, TdError> {
    let x = normal_order(&x.epsilon_truncate(), &case.rules)?;
    Ok(match case.convention {
        Convention::Canonical => x,
        Convention::Emergent => x.effective_part(),
    })
}

/// Serializable summary of a [`Derivation`].
#[derive(Clone, Debug, Serialize)]
pub struct DerivationReport {
    pub schema_version: u32,
    pub statistics: Statistics,
    pub convention: Convention,
    pub flipped: bool,
    pub value: String,
    pub expected: String,
    pub residual: String,
    pub residual_zero: bool,
    pub p0: String,
    pub imaginary_part: String,
    pub value_at_zero_perturbation: f64,
    pub words_before_truncation: usize,
    pub words_after_truncation: usize,
}

impl From<&Derivation> for DerivationReport {
    fn from(d: &Derivation) -> Self {
        Self {
            schema_version: 1,
            statistics: d.statistics,
            convention: d.convention,
            flipped: d.flipped,
            value: d.value.to_string(),
            expected: d.expected.to_string(),
            residual: d.residual.to_string(),
            residual_zero: d.holds(),
            p0: d.p0.to_string(),
            imaginary_part: d.imaginary.to_string(),
            value_at_zero_perturbation: d.value.constant_term().to_complex().re,
            words_before_truncation: d.words_full,
            words_after_truncation: d.words_truncated,
        }
    }
}

/// Evaluates a polynomial in the case's indeterminates at numeric values keyed by name.
pub fn evaluate(x: &Scalar, values: &std::collections::HashMap<std::sync::Arc<str>, Complex64>) -> Option<Complex64> {
    x.eval(values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rules_are_consistent() {
        for s in [Statistics::Bosonic, Statistics::Fermionic] {
            for c in [Convention::Canonical, Convention::Emergent] {
                let case = CaseSpec::new(s, c);
                case.rules.check_adjoint_consistency().unwrap();
                case.rules.check_grading().unwrap();
                assert!(case.missing_generators().is_empty());
            }
        }
    }

    #[test]
    fn sandwich_is_self_adjoint() {
        let case = CaseSpec::bosonic();
        let w = td_chsh_expression(Statistics::Bosonic);
        assert!(w.len() > w.epsilon_truncate().len());
        let t = w.epsilon_truncate();
        let lhs = normal_order(&t.adjoint(), &case.rules).unwrap();
        assert!(lhs == normal_order(&t, &case.rules).unwrap());
    }

    #[test]
    fn zero_perturbation_matches_quantum_expression() {
        let s = Statistics::Bosonic;
        let w = td_chsh_expression(s).filter(|w| word_grade(w) == 0);
        let sys = crate::spin::SpinSystem::bosonic();
        let ops: Vec<OperatorExpr> = [(3, 3), (1, 1)]
            .iter()
            .map(|&(i, j)| {
                sys.spin_operator::<Scalar>(crate::spin::Party::A, i).unwrap()
                    * sys.spin_operator(crate::spin::Party::B, j).unwrap()
            })
            .collect();
        let o = (ops[0].clone() + ops[1].clone()).scale_exact(&Qi2::int(4));
        let x = sys.singlet::<Scalar>().creator;
        assert_eq!(x.adjoint() * o * x, w);
    }

    #[test]
    fn emergent_value_is_independent_of_perturbation() {
        let case = CaseSpec::new(Statistics::Bosonic, Convention::Emergent);
        let r = reduce_f_td(&case).unwrap();
        assert_eq!(r.value, Scalar::constant(Qi2::sqrt2().scale(2, 1)));
    }

    #[test]
    fn emergent_charge_is_four_i_eff() {
        let case = CaseSpec::new(Statistics::Bosonic, Convention::Emergent);
        let c = adler_millard_symbolic(&case).unwrap();
        assert_eq!(c, OperatorExpr::gen(eff_identity()).scale_exact(&(Qi2::i() * Qi2::int(4))));
    }
}
