use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use super::coeff::Coeff;
use super::field::Qi2;
use super::generator::Generator;
use super::scalar::Scalar;

pub type Word = Vec<Generator>;

/// Total ε-grade of a word.
pub fn word_grade(w: &[Generator]) -> u32 {
    w.iter().map(|g| g.eps as u32).sum()
}

/// Formal linear combination of words. Zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq)]
pub struct Expr<C> {
    terms: BTreeMap<Word, C>,
}

/// Exact operator expression.
pub type OperatorExpr = Expr<Scalar>;

impl<C: Coeff> Default for Expr<C> {
    fn default() -> Self {
        Self { terms: BTreeMap::new() }
    }
}

impl<C: Coeff> Expr<C> {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::scalar(C::one())
    }

    pub fn scalar(c: C) -> Self {
        Self::term(Vec::new(), c)
    }

    pub fn exact(c: &Qi2) -> Self {
        Self::scalar(C::from_exact(c))
    }

    pub fn gen(g: Generator) -> Self {
        Self::term(vec![g], C::one())
    }

    pub fn word(w: Word) -> Self {
        Self::term(w, C::one())
    }

    pub fn term(w: Word, c: C) -> Self {
        let mut e = Self::zero();
        e.add_term(w, c);
        e
    }

    pub fn add_term(&mut self, w: Word, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&w) {
            Some(existing) => {
                let sum = existing.clone() + c;
                if sum.is_zero() {
                    self.terms.remove(&w);
                } else {
                    *existing = sum;
                }
            }
            None => {
                self.terms.insert(w, c);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &C)> {
        self.terms.iter()
    }

    pub fn into_terms(self) -> impl Iterator<Item = (Word, C)> {
        self.terms.into_iter()
    }

    pub fn coefficient(&self, w: &[Generator]) -> C {
        self.terms.get(w).cloned().unwrap_or_else(C::zero)
    }

    pub fn scale(&self, c: &C) -> Self {
        let mut out = Self::zero();
        for (w, v) in &self.terms {
            out.add_term(w.clone(), v.clone() * c.clone());
        }
        out
    }

    pub fn scale_exact(&self, c: &Qi2) -> Self {
        self.scale(&C::from_exact(c))
    }

    /// Free concatenation product; no reordering.
    pub fn times(&self, other: &Self) -> Self {
        self.mul_bounded(other, u32::MAX)
    }

    /// Product keeping only words of ε-grade at most `max_grade`.
    pub fn mul_bounded(&self, other: &Self, max_grade: u32) -> Self {
        let mut out = Self::zero();
        for (w1, c1) in &self.terms {
            let g1 = word_grade(w1);
            if g1 > max_grade {
                continue;
            }
            for (w2, c2) in &other.terms {
                if g1 + word_grade(w2) > max_grade {
                    continue;
                }
                let mut w = w1.clone();
                w.extend(w2.iter().cloned());
                out.add_term(w, c1.clone() * c2.clone());
            }
        }
        out
    }

    /// Reverses words, daggers generators and conjugates coefficients.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zero();
        for (w, c) in &self.terms {
            let w2: Word = w.iter().rev().map(Generator::adjoint).collect();
            out.add_term(w2, c.conj());
        }
        out
    }

    /// Keeps words with fewer than two ε-grade-1 generators.
    pub fn epsilon_truncate(&self) -> Self {
        self.filter(|w| word_grade(w) < 2)
    }

    /// Keeps words of even ε-grade: the part commuting with `i_eff`.
    pub fn effective_part(&self) -> Self {
        self.filter(|w| word_grade(w) % 2 == 0)
    }

    pub fn filter(&self, keep: impl Fn(&Word) -> bool) -> Self {
        Self { terms: self.terms.iter().filter(|(w, _)| keep(w)).map(|(w, c)| (w.clone(), c.clone())).collect() }
    }

    /// Maps every generator to an expression and multiplies out.
    pub fn substitute(&self, f: impl Fn(&Generator) -> Option<Self>) -> Self {
        let mut out = Self::zero();
        for (w, c) in &self.terms {
            let mut t = Self::scalar(c.clone());
            for g in w {
                let r = f(g).unwrap_or_else(|| Self::gen(g.clone()));
                t = t.times(&r);
            }
            out = out + t;
        }
        out
    }

    pub fn map_coeffs<D: Coeff>(&self, f: impl Fn(&C) -> D) -> Expr<D> {
        let mut out = Expr::<D>::zero();
        for (w, c) in &self.terms {
            out.add_term(w.clone(), f(c));
        }
        out
    }

    pub fn max_grade(&self) -> u32 {
        self.terms.keys().map(|w| word_grade(w)).max().unwrap_or(0)
    }

    /// `x y − y x`.
    pub fn commutator(x: &Self, y: &Self) -> Self {
        x.times(y) - y.times(x)
    }

    /// `x y + y x`.
    pub fn anticommutator(x: &Self, y: &Self) -> Self {
        x.times(y) + y.times(x)
    }
}

impl<C: Coeff> Add for Expr<C> {
    type Output = Self;
    fn add(mut self, o: Self) -> Self {
        for (w, c) in o.terms {
            self.add_term(w, c);
        }
        self
    }
}

impl<C: Coeff> Sub for Expr<C> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl<C: Coeff> Neg for Expr<C> {
    type Output = Self;
    fn neg(self) -> Self {
        Self { terms: self.terms.into_iter().map(|(w, c)| (w, -c)).collect() }
    }
}

impl<C: Coeff> Mul for Expr<C> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        self.times(&o)
    }
}

impl<C: Coeff> Mul<&Expr<C>> for &Expr<C> {
    type Output = Expr<C>;
    fn mul(self, o: &Expr<C>) -> Expr<C> {
        self.times(o)
    }
}

pub fn word_text(w: &[Generator]) -> String {
    if w.is_empty() {
        "1".to_string()
    } else {
        w.iter().map(|g| g.to_string()).collect::<Vec<_>>().join(" ")
    }
}

impl<C: Coeff> fmt::Display for Expr<C> {
    /// Canonical text: sorted words, each as `(coefficient) word`, joined by ` + `.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self.terms.iter().map(|(w, c)| format!("({c}) {}", word_text(w))).collect();
        f.write_str(&parts.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::generator::Statistics;

    fn a(i: u8) -> OperatorExpr {
        Expr::gen(Generator::a(i, Statistics::Bosonic))
    }

    #[test]
    fn free_product_keeps_order() {
        let x = a(1).times(&a(1).adjoint());
        assert_eq!(x.len(), 1);
        assert_eq!(x.to_string(), "(1) a1 a1†");
        assert!(a(1).times(&OperatorExpr::zero()).is_zero());
        let b2d = Expr::gen(Generator::b(2, Statistics::Bosonic).dag());
        assert_ne!(a(1).adjoint().times(&b2d), b2d.times(&a(1).adjoint()));
    }

    #[test]
    fn adjoint_conjugates() {
        let x = a(1).scale_exact(&Qi2::i());
        assert_eq!(x.adjoint(), a(1).adjoint().scale_exact(&-Qi2::i()));
    }

    #[test]
    fn truncation() {
        let s = Statistics::Bosonic;
        let ca1 = Expr::<Scalar>::gen(Generator::cal_a(1, s));
        let ca2 = Expr::gen(Generator::cal_a(2, s));
        assert!(ca1.times(&ca2).epsilon_truncate().is_zero());
        let w = ca1.times(&a(1).adjoint());
        assert_eq!(w.epsilon_truncate(), w);
    }
}
