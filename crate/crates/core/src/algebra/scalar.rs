//! Polynomials over ℚ(i, √2) in named indeterminates.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex64;

use super::field::Qi2;

/// A named indeterminate or its declared conjugate partner.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var {
    pub name: Arc<str>,
    pub conj: bool,
}

impl Var {
    pub fn new(name: &str) -> Self {
        Self { name: Arc::from(name), conj: false }
    }

    pub fn conjugate(&self) -> Self {
        Self { name: self.name.clone(), conj: !self.conj }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.conj {
            write!(f, "conj({})", self.name)
        } else {
            f.write_str(&self.name)
        }
    }
}

/// Sorted list of (variable, exponent) pairs with positive exponents.
pub type Monomial = Vec<(Var, u32)>;

fn mono_mul(x: &Monomial, y: &Monomial) -> Monomial {
    let mut out: BTreeMap<Var, u32> = x.iter().cloned().collect();
    for (v, e) in y {
        *out.entry(v.clone()).or_insert(0) += e;
    }
    out.into_iter().collect()
}

/// Exact polynomial in `ℚ(i,√2)[x₁, x₁*, …]`. Zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Scalar {
    terms: BTreeMap<Monomial, Qi2>,
}

impl Scalar {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(Qi2::one())
    }

    pub fn constant(c: Qi2) -> Self {
        let mut s = Self::zero();
        s.add_term(Vec::new(), c);
        s
    }

    pub fn int(n: i64) -> Self {
        Self::constant(Qi2::int(n))
    }

    pub fn var(v: Var) -> Self {
        let mut s = Self::zero();
        s.add_term(vec![(v, 1)], Qi2::one());
        s
    }

    pub fn named(name: &str) -> Self {
        Self::var(Var::new(name))
    }

    fn add_term(&mut self, m: Monomial, c: Qi2) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(existing) => {
                let sum = existing.clone() + c;
                if sum.is_zero() {
                    self.terms.remove(&m);
                } else {
                    *existing = sum;
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Qi2)> {
        self.terms.iter()
    }

    /// The value if the polynomial has no indeterminates.
    pub fn as_constant(&self) -> Option<Qi2> {
        match self.terms.len() {
            0 => Some(Qi2::zero()),
            1 => self.terms.get(&Vec::new()).cloned(),
            _ => None,
        }
    }

    pub fn constant_term(&self) -> Qi2 {
        self.terms.get(&Vec::new()).cloned().unwrap_or_default()
    }

    /// Conjugation: `i → −i` and `x ↔ x*`.
    pub fn conj(&self) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let m2: Monomial = m.iter().map(|(v, e)| (v.conjugate(), *e)).collect();
            let mut m2 = m2;
            m2.sort();
            out.add_term(m2, c.conj());
        }
        out
    }

    /// `(x + x*)/2` through the declared conjugate pairing.
    pub fn re(&self) -> Self {
        (self.clone() + self.conj()) * Scalar::constant(Qi2::rational(1, 2))
    }

    pub fn scale(&self, c: &Qi2) -> Self {
        let mut out = Self::zero();
        for (m, v) in &self.terms {
            out.add_term(m.clone(), v.clone() * c.clone());
        }
        out
    }

    /// Indeterminates occurring in the polynomial.
    pub fn variables(&self) -> Vec<Var> {
        let mut vs: Vec<Var> = self.terms.keys().flat_map(|m| m.iter().map(|(v, _)| v.clone())).collect();
        vs.sort();
        vs.dedup();
        vs
    }

    /// Replaces indeterminates by polynomials; unmapped ones are kept.
    pub fn substitute(&self, map: &HashMap<Var, Scalar>) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let mut t = Scalar::constant(c.clone());
            for (v, e) in m {
                let base = map.get(v).cloned().unwrap_or_else(|| Scalar::var(v.clone()));
                for _ in 0..*e {
                    t = t * base.clone();
                }
            }
            out = out + t;
        }
        out
    }

    /// Numerical evaluation. Each conjugated indeterminate takes the conjugate of its partner's value.
    pub fn eval(&self, values: &HashMap<Arc<str>, Complex64>) -> Option<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for (m, c) in &self.terms {
            let mut t = c.to_complex();
            for (v, e) in m {
                let x = *values.get(&v.name)?;
                let x = if v.conj { x.conj() } else { x };
                t *= x.powu(*e);
            }
            acc += t;
        }
        Some(acc)
    }
}

impl From<Qi2> for Scalar {
    fn from(c: Qi2) -> Self {
        Scalar::constant(c)
    }
}

impl Add for Scalar {
    type Output = Scalar;
    fn add(mut self, o: Scalar) -> Scalar {
        for (m, c) in o.terms {
            self.add_term(m, c);
        }
        self
    }
}

impl Sub for Scalar {
    type Output = Scalar;
    fn sub(self, o: Scalar) -> Scalar {
        self + (-o)
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar { terms: self.terms.into_iter().map(|(m, c)| (m, -c)).collect() }
    }
}

impl Mul for Scalar {
    type Output = Scalar;
    fn mul(self, o: Scalar) -> Scalar {
        let mut out = Scalar::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                out.add_term(mono_mul(m1, m2), c1.clone() * c2.clone());
            }
        }
        out
    }
}

impl fmt::Display for Scalar {
    /// Terms in monomial order, each as `(coefficient)*x^e*…`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            if m.is_empty() {
                write!(f, "{c}")?;
                continue;
            }
            let t = c.to_string();
            if t == "-1" {
                f.write_str("-")?;
            } else if t.contains('+') || t[1..].contains('-') {
                write!(f, "({t})*")?;
            } else if t != "1" {
                write!(f, "{t}*")?;
            }
            let vars: Vec<String> = m
                .iter()
                .map(|(v, e)| if *e == 1 { v.to_string() } else { format!("{v}^{e}") })
                .collect();
            f.write_str(&vars.join("*"))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conj_pairs_variables() {
        let x = Scalar::named("x");
        let s = x.clone() * Scalar::constant(Qi2::i());
        let c = s.conj();
        assert_eq!(c, Scalar::var(Var::new("x").conjugate()) * Scalar::constant(-Qi2::i()));
        assert_eq!(c.conj(), s);
    }

    #[test]
    fn re_of_real_constant_is_itself() {
        let s = Scalar::constant(Qi2::sqrt2());
        assert_eq!(s.re(), s);
        assert!((Scalar::constant(Qi2::i())).re().is_zero());
    }

    #[test]
    fn cancellation_removes_terms() {
        let x = Scalar::named("x");
        assert!((x.clone() - x).is_zero());
    }

    #[test]
    fn eval_uses_conjugate_values() {
        let x = Var::new("x");
        let s = Scalar::var(x.clone()) + Scalar::var(x.conjugate());
        let mut vals = HashMap::new();
        vals.insert(x.name.clone(), Complex64::new(1.5, 2.0));
        let v = s.eval(&vals).unwrap();
        assert!((v - Complex64::new(3.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn substitution() {
        let x = Var::new("x");
        let s = Scalar::var(x.clone()) * Scalar::var(x.clone());
        let mut map = HashMap::new();
        map.insert(x, Scalar::int(3));
        assert_eq!(s.substitute(&map), Scalar::int(9));
    }
}
