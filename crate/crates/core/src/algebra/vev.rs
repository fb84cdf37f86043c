use std::collections::{BTreeMap, BTreeSet};

use super::coeff::Coeff;
use super::expr::{word_grade, word_text, Expr, Word};
use super::generator::Generator;
use super::rules::{normal_order, RewriteRules};
use super::scalar::Scalar;
use super::AlgebraError;

/// Description of the reference state ψ₀ used by [`vev`].
#[derive(Clone, Debug, Default)]
pub struct Vacuum {
    /// Generators `g` with `g ψ₀ = 0`.
    pub annihilators: BTreeSet<Generator>,
    /// Self-adjoint generators acting as the identity on ψ₀ from either side.
    pub fixed: BTreeSet<Generator>,
    /// When set, words of odd ε-grade have zero expectation (ψ₀ lies in one `i_eff` sector).
    pub sector_parity: bool,
    /// Declared expectations of irreducible words.
    pub indeterminates: BTreeMap<Word, Scalar>,
}

impl Vacuum {
    pub fn new(annihilators: impl IntoIterator<Item = Generator>) -> Self {
        Self { annihilators: annihilators.into_iter().collect(), ..Self::default() }
    }

    pub fn declare(&mut self, word: Word, value: Scalar) {
        self.indeterminates.insert(word, value);
    }

    fn is_creator(&self, g: &Generator) -> bool {
        g.dagger && self.annihilators.contains(&g.adjoint())
    }

    /// Sign picked up moving `w[k]` to the right end, if it passes everything freely.
    fn sign_to_right(w: &[Generator], k: usize, rules: &RewriteRules) -> Option<i8> {
        w[k + 1..].iter().try_fold(1i8, |s, h| rules.exchange_sign(&w[k], h).map(|t| s * t))
    }

    fn sign_to_left(w: &[Generator], k: usize, rules: &RewriteRules) -> Option<i8> {
        w[..k].iter().try_fold(1i8, |s, h| rules.exchange_sign(&w[k], h).map(|t| s * t))
    }

    /// Reduces a normal-ordered word acting on ψ₀ (ket side only): returns `None` if it
    /// annihilates ψ₀, otherwise the remaining word with its sign.
    fn reduce_ket(&self, w: &[Generator], rules: &RewriteRules) -> Option<(Word, i8)> {
        let mut w = w.to_vec();
        let mut sign = 1i8;
        loop {
            let mut changed = false;
            for k in (0..w.len()).rev() {
                let g = &w[k];
                let kills = self.annihilators.contains(g);
                let fixed = self.fixed.contains(g);
                if !(kills || fixed) {
                    continue;
                }
                if let Some(s) = Self::sign_to_right(&w, k, rules) {
                    if kills {
                        return None;
                    }
                    sign *= s;
                    w.remove(k);
                    changed = true;
                    break;
                }
            }
            if !changed {
                return Some((w, sign));
            }
        }
    }

    /// Reduces a normal-ordered word inside `⟨ψ₀| … |ψ₀⟩`.
    fn reduce(&self, w: &[Generator], rules: &RewriteRules) -> Option<(Word, i8)> {
        let (mut w, mut sign) = self.reduce_ket(w, rules)?;
        loop {
            let mut changed = false;
            for k in 0..w.len() {
                let g = &w[k];
                let kills = self.is_creator(g);
                let fixed = self.fixed.contains(g);
                if !(kills || fixed) {
                    continue;
                }
                if let Some(s) = Self::sign_to_left(&w, k, rules) {
                    if kills {
                        return None;
                    }
                    sign *= s;
                    w.remove(k);
                    changed = true;
                    break;
                }
            }
            if !changed {
                return Some((w, sign));
            }
            let (w2, s2) = self.reduce_ket(&w, rules)?;
            w = w2;
            sign *= s2;
        }
    }
}

/// `⟨ψ₀| x |ψ₀⟩`: normal-orders `x`, drops words that annihilate the vacuum on either side,
/// and resolves surviving words through the declared indeterminates.
pub fn vev<C: Coeff>(x: &Expr<C>, rules: &RewriteRules, vacuum: &Vacuum) -> Result<C, AlgebraError> {
    let nf = normal_order(x, rules)?;
    let mut acc = C::zero();
    for (w, c) in nf.terms() {
        if vacuum.sector_parity && word_grade(w) % 2 == 1 {
            continue;
        }
        let Some((rest, sign)) = vacuum.reduce(w, rules) else { continue };
        let c = if sign < 0 { -c.clone() } else { c.clone() };
        if rest.is_empty() {
            acc = acc + c;
            continue;
        }
        let value = vacuum
            .indeterminates
            .get(&rest)
            .and_then(C::from_scalar)
            .ok_or_else(|| AlgebraError::Unresolved(word_text(&rest)))?;
        acc = acc + c * value;
    }
    Ok(acc)
}

/// `x |ψ₀⟩` as a normal-ordered creator polynomial.
pub fn act_on_vacuum<C: Coeff>(x: &Expr<C>, rules: &RewriteRules, vacuum: &Vacuum) -> Result<Expr<C>, AlgebraError> {
    let nf = normal_order(x, rules)?;
    let mut out = Expr::zero();
    for (w, c) in nf.terms() {
        if let Some((rest, sign)) = vacuum.reduce_ket(w, rules) {
            let c = if sign < 0 { -c.clone() } else { c.clone() };
            out.add_term(rest, c);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::expr::OperatorExpr;
    use crate::algebra::generator::Statistics;

    fn setup() -> (RewriteRules, Vacuum, Vec<Generator>) {
        let s = Statistics::Bosonic;
        let gens = vec![Generator::a(1, s), Generator::a(2, s), Generator::b(1, s), Generator::b(2, s)];
        (RewriteRules::canonical(&gens, s), Vacuum::new(gens.clone()), gens)
    }

    #[test]
    fn vacuum_values() {
        let (r, v, g) = setup();
        let x = OperatorExpr::gen(g[0].clone()) * OperatorExpr::gen(g[0].dag());
        assert_eq!(vev(&x, &r, &v).unwrap(), Scalar::one());
        let y = OperatorExpr::gen(g[0].dag()) * OperatorExpr::gen(g[0].clone());
        assert!(vev(&y, &r, &v).unwrap().is_zero());
    }

    #[test]
    fn abstract_word_resolves_to_indeterminate() {
        let (mut r, mut v, g) = setup();
        let ca1 = Generator::cal_a(1, Statistics::Bosonic);
        let k = Generator::abstract_gen("K[A1,a2†]", 1, Statistics::Bosonic, false);
        r.set_commutator(&ca1, &g[1].dag(), OperatorExpr::gen(k.clone()));
        let x = Scalar::named("x_A1a2");
        v.declare(vec![k], x.clone());
        let w = vec![ca1.clone(), g[1].dag()];
        assert_eq!(vev(&OperatorExpr::word(w), &r, &v).unwrap(), x);
        let bare = OperatorExpr::gen(ca1);
        assert!(matches!(vev(&bare, &r, &v), Err(AlgebraError::Unresolved(_))));
    }
}
