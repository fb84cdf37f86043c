//! Exact arithmetic in the number fields ℚ(√2) and ℚ(i, √2).

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// A real number `r + s·√2` with rational `r`, `s`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct RealSurd {
    pub r: BigRational,
    pub s: BigRational,
}

impl RealSurd {
    pub fn new(r: BigRational, s: BigRational) -> Self {
        Self { r, s }
    }

    pub fn rational(n: i64, d: i64) -> Self {
        Self::new(rat(n, d), BigRational::zero())
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::rational(1, 1)
    }

    /// `√2`.
    pub fn sqrt2() -> Self {
        Self::new(BigRational::zero(), BigRational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.r.is_zero() && self.s.is_zero()
    }

    /// Exact sign, decided without floating point.
    pub fn signum(&self) -> Ordering {
        let sr = self.r.cmp(&BigRational::zero());
        let ss = self.s.cmp(&BigRational::zero());
        if sr == ss || ss == Ordering::Equal {
            return sr;
        }
        if sr == Ordering::Equal {
            return ss;
        }
        // r and s√2 have opposite signs: compare r² with 2s².
        let r2 = &self.r * &self.r;
        let s2 = &self.s * &self.s * BigRational::from_integer(BigInt::from(2));
        match r2.cmp(&s2) {
            Ordering::Greater => sr,
            Ordering::Less => ss,
            Ordering::Equal => Ordering::Equal,
        }
    }

    pub fn abs(&self) -> Self {
        if self.signum() == Ordering::Less {
            -self.clone()
        } else {
            self.clone()
        }
    }

    /// Galois conjugate `r − s·√2`.
    pub fn galois(&self) -> Self {
        Self::new(self.r.clone(), -self.s.clone())
    }

    /// Field norm `r² − 2s²`.
    pub fn norm(&self) -> BigRational {
        &self.r * &self.r - &self.s * &self.s * BigRational::from_integer(BigInt::from(2))
    }

    pub fn inverse(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let n = self.norm();
        let g = self.galois();
        Some(Self::new(g.r / &n, g.s / n))
    }

    pub fn to_f64(&self) -> f64 {
        self.r.to_f64().unwrap_or(f64::NAN) + self.s.to_f64().unwrap_or(f64::NAN) * std::f64::consts::SQRT_2
    }
}

impl Add for RealSurd {
    type Output = RealSurd;
    fn add(self, o: RealSurd) -> RealSurd {
        RealSurd::new(self.r + o.r, self.s + o.s)
    }
}

impl Sub for RealSurd {
    type Output = RealSurd;
    fn sub(self, o: RealSurd) -> RealSurd {
        RealSurd::new(self.r - o.r, self.s - o.s)
    }
}

impl Mul for RealSurd {
    type Output = RealSurd;
    fn mul(self, o: RealSurd) -> RealSurd {
        let two = BigRational::from_integer(BigInt::from(2));
        RealSurd::new(
            &self.r * &o.r + &self.s * &o.s * two,
            &self.r * &o.s + &self.s * &o.r,
        )
    }
}

impl Neg for RealSurd {
    type Output = RealSurd;
    fn neg(self) -> RealSurd {
        RealSurd::new(-self.r, -self.s)
    }
}

/// An element `x + i·y` of ℚ(i, √2), with `x, y ∈ ℚ(√2)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Qi2 {
    pub re: RealSurd,
    pub im: RealSurd,
}

impl Qi2 {
    pub fn new(re: RealSurd, im: RealSurd) -> Self {
        Self { re, im }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::int(1)
    }

    pub fn int(n: i64) -> Self {
        Self::rational(n, 1)
    }

    pub fn rational(n: i64, d: i64) -> Self {
        Self::real(RealSurd::rational(n, d))
    }

    pub fn real(re: RealSurd) -> Self {
        Self::new(re, RealSurd::zero())
    }

    pub fn i() -> Self {
        Self::new(RealSurd::zero(), RealSurd::one())
    }

    pub fn sqrt2() -> Self {
        Self::real(RealSurd::sqrt2())
    }

    /// `1/√2 = √2/2`.
    pub fn inv_sqrt2() -> Self {
        Self::real(RealSurd::new(BigRational::zero(), rat(1, 2)))
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    /// Complex conjugation `i → −i`.
    pub fn conj(&self) -> Self {
        Self::new(self.re.clone(), -self.im.clone())
    }

    /// `|z|²` as an element of ℚ(√2).
    pub fn norm_sqr(&self) -> RealSurd {
        self.re.clone() * self.re.clone() + self.im.clone() * self.im.clone()
    }

    pub fn inverse(&self) -> Option<Self> {
        let n = self.norm_sqr().inverse()?;
        let c = self.conj();
        Some(Self::new(c.re * n.clone(), c.im * n))
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }

    /// Multiplies by a rational `n/d`.
    pub fn scale(&self, n: i64, d: i64) -> Self {
        self.clone() * Self::rational(n, d)
    }
}

impl Add for Qi2 {
    type Output = Qi2;
    fn add(self, o: Qi2) -> Qi2 {
        Qi2::new(self.re + o.re, self.im + o.im)
    }
}

impl Sub for Qi2 {
    type Output = Qi2;
    fn sub(self, o: Qi2) -> Qi2 {
        Qi2::new(self.re - o.re, self.im - o.im)
    }
}

impl Mul for Qi2 {
    type Output = Qi2;
    fn mul(self, o: Qi2) -> Qi2 {
        let re = self.re.clone() * o.re.clone() - self.im.clone() * o.im.clone();
        let im = self.re * o.im + self.im * o.re;
        Qi2::new(re, im)
    }
}

impl Neg for Qi2 {
    type Output = Qi2;
    fn neg(self) -> Qi2 {
        Qi2::new(-self.re, -self.im)
    }
}

fn fmt_rational(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("({}/{})", q.numer(), q.denom())
    }
}

/// Writes one basis component such as `(1/2)*sqrt2*i` or `-i`.
fn fmt_component(c: &BigRational, basis: &str) -> String {
    if basis.is_empty() {
        return fmt_rational(c);
    }
    if c.is_one() {
        basis.to_string()
    } else if (-c.clone()).is_one() {
        format!("-{basis}")
    } else {
        format!("{}*{basis}", fmt_rational(c))
    }
}

impl fmt::Display for Qi2 {
    /// Canonical form: components in the order `1, sqrt2, i, sqrt2*i`, joined by `+`
    /// (a leading `-` replaces the `+`), e.g. `(3/2)+(1/2)*sqrt2*i` or `2*sqrt2`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts = [
            (&self.re.r, ""),
            (&self.re.s, "sqrt2"),
            (&self.im.r, "i"),
            (&self.im.s, "sqrt2*i"),
        ];
        let mut out = String::new();
        for (c, basis) in parts {
            if c.is_zero() {
                continue;
            }
            let piece = fmt_component(c, basis);
            if !out.is_empty() && !piece.starts_with('-') {
                out.push('+');
            }
            out.push_str(&piece);
        }
        if out.is_empty() {
            out.push('0');
        }
        f.write_str(&out)
    }
}

impl fmt::Display for RealSurd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        Qi2::real(self.clone()).fmt(f)
    }
}

/// Returns true when `q` is a negative rational; used by callers printing signs.
pub fn is_negative(q: &BigRational) -> bool {
    q.is_negative()
}
