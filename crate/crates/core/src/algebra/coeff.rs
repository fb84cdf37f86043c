use std::cmp::Ordering;
use std::fmt::{Debug, Display};
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use super::field::Qi2;
use super::scalar::Scalar;

/// Coefficient ring for operator expressions: exact [`Scalar`] or floating [`Complex64`].
pub trait Coeff:
    Clone
    + Debug
    + Display
    + PartialEq
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn from_exact(x: &Qi2) -> Self;
    /// Converts a declared expectation value; `None` if it carries indeterminates this ring cannot hold.
    fn from_scalar(x: &Scalar) -> Option<Self>;
    fn conj(&self) -> Self;
    fn to_complex(&self) -> Option<Complex64>;
    /// Absolute value when it is representable; for exact values only real constants qualify.
    fn abs_value(&self) -> Option<Self>;
}

impl Coeff for Scalar {
    fn zero() -> Self {
        Scalar::zero()
    }
    fn one() -> Self {
        Scalar::one()
    }
    fn is_zero(&self) -> bool {
        Scalar::is_zero(self)
    }
    fn from_exact(x: &Qi2) -> Self {
        Scalar::constant(x.clone())
    }
    fn from_scalar(x: &Scalar) -> Option<Self> {
        Some(x.clone())
    }
    fn conj(&self) -> Self {
        Scalar::conj(self)
    }
    fn to_complex(&self) -> Option<Complex64> {
        self.as_constant().map(|c| c.to_complex())
    }
    fn abs_value(&self) -> Option<Self> {
        let c = self.as_constant()?;
        if !c.is_real() {
            return None;
        }
        Some(Scalar::constant(Qi2::real(c.re.abs())))
    }
}

impl Coeff for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn from_exact(x: &Qi2) -> Self {
        x.to_complex()
    }
    fn from_scalar(x: &Scalar) -> Option<Self> {
        x.as_constant().map(|c| c.to_complex())
    }
    fn conj(&self) -> Self {
        Complex64::conj(self)
    }
    fn to_complex(&self) -> Option<Complex64> {
        Some(*self)
    }
    fn abs_value(&self) -> Option<Self> {
        Some(Complex64::new(self.norm(), 0.0))
    }
}

/// Sign of a real exact scalar constant, if decidable.
pub fn exact_sign(x: &Scalar) -> Option<Ordering> {
    let c = x.as_constant()?;
    c.is_real().then(|| c.re.signum())
}
