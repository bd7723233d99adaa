//! Forward-mode dual numbers.
//!
//! `Dual<S>` is generic over its own scalar so duals nest: `Dual<Dual<f64>>`
//! carries mixed second derivatives, which the Lie-derivative and bracket
//! code needs whenever a field is itself built from a gradient.

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

/// Arithmetic shared by `f64` and every level of [`Dual`].
pub trait Scalar:
    Copy
    + Debug
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
{
    fn cst(value: f64) -> Self;

    /// Innermost real part.
    fn re(&self) -> f64;

    fn sqrt(self) -> Self;
    fn ln(self) -> Self;
    fn tanh(self) -> Self;
    fn recip(self) -> Self;
    fn powi(self, n: i32) -> Self;

    /// True when every component at every nesting level is finite.
    fn all_finite(&self) -> bool;

    fn zero() -> Self {
        Self::cst(0.0)
    }

    fn one() -> Self {
        Self::cst(1.0)
    }

    fn scale(self, k: f64) -> Self {
        self * Self::cst(k)
    }
}

impl Scalar for f64 {
    #[inline]
    fn cst(value: f64) -> Self {
        value
    }
    #[inline]
    fn re(&self) -> f64 {
        *self
    }
    #[inline]
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    #[inline]
    fn ln(self) -> Self {
        f64::ln(self)
    }
    #[inline]
    fn tanh(self) -> Self {
        f64::tanh(self)
    }
    #[inline]
    fn recip(self) -> Self {
        1.0 / self
    }
    #[inline]
    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }
    #[inline]
    fn all_finite(&self) -> bool {
        self.is_finite()
    }
}

/// `re + eps·ε` with `ε² = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual<S> {
    pub re: S,
    pub eps: S,
}

impl<S: Scalar> Dual<S> {
    pub fn new(re: S, eps: S) -> Self {
        Self { re, eps }
    }

    /// A variable: derivative channel seeded with 1.
    pub fn variable(re: S) -> Self {
        Self { re, eps: S::one() }
    }

    pub fn constant(re: S) -> Self {
        Self { re, eps: S::zero() }
    }

    #[inline]
    fn chain(self, value: S, slope: S) -> Self {
        Self { re: value, eps: self.eps * slope }
    }
}

impl<S: Scalar> Add for Dual<S> {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        Self { re: self.re + rhs.re, eps: self.eps + rhs.eps }
    }
}

impl<S: Scalar> Sub for Dual<S> {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        Self { re: self.re - rhs.re, eps: self.eps - rhs.eps }
    }
}

impl<S: Scalar> Mul for Dual<S> {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        Self { re: self.re * rhs.re, eps: self.re * rhs.eps + self.eps * rhs.re }
    }
}

impl<S: Scalar> Div for Dual<S> {
    type Output = Self;
    #[inline]
    fn div(self, rhs: Self) -> Self {
        let inv = rhs.re.recip();
        let re = self.re * inv;
        Self { re, eps: (self.eps - re * rhs.eps) * inv }
    }
}

impl<S: Scalar> Neg for Dual<S> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self { re: -self.re, eps: -self.eps }
    }
}

impl<S: Scalar> AddAssign for Dual<S> {
    #[inline]
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl<S: Scalar> SubAssign for Dual<S> {
    #[inline]
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}

impl<S: Scalar> MulAssign for Dual<S> {
    #[inline]
    fn mul_assign(&mut self, rhs: Self) {
        *self = *self * rhs;
    }
}

impl<S: Scalar> Scalar for Dual<S> {
    #[inline]
    fn cst(value: f64) -> Self {
        Self::constant(S::cst(value))
    }

    #[inline]
    fn re(&self) -> f64 {
        self.re.re()
    }

    fn sqrt(self) -> Self {
        let r = self.re.sqrt();
        self.chain(r, (r + r).recip())
    }

    fn ln(self) -> Self {
        self.chain(self.re.ln(), self.re.recip())
    }

    fn tanh(self) -> Self {
        let t = self.re.tanh();
        self.chain(t, S::one() - t * t)
    }

    fn recip(self) -> Self {
        let inv = self.re.recip();
        self.chain(inv, -(inv * inv))
    }

    fn powi(self, n: i32) -> Self {
        if n == 0 {
            return Self::one();
        }
        let lower = self.re.powi(n - 1);
        self.chain(lower * self.re, lower.scale(n as f64))
    }

    fn all_finite(&self) -> bool {
        self.re.all_finite() && self.eps.all_finite()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_rule() {
        let a = Dual::new(2.0, 3.0);
        let b = Dual::new(5.0, 7.0);
        let c = a * b;
        assert_eq!(c.re, 10.0);
        assert_eq!(c.eps, 2.0 * 7.0 + 3.0 * 5.0);
    }

    #[test]
    fn constants_have_zero_derivative() {
        let c = Dual::<f64>::cst(4.2);
        assert_eq!(c.eps, 0.0);
        assert_eq!((c * c + c.sqrt()).eps, 0.0);
    }

    #[test]
    fn elementary_functions() {
        let x = Dual::variable(0.7_f64);
        assert!((x.sqrt().eps - 0.5 / 0.7_f64.sqrt()).abs() < 1e-15);
        assert!((x.ln().eps - 1.0 / 0.7).abs() < 1e-15);
        assert!((x.tanh().eps - (1.0 - 0.7_f64.tanh().powi(2))).abs() < 1e-15);
        assert!((x.powi(3).eps - 3.0 * 0.49).abs() < 1e-15);
        assert!((x.powi(-2).eps + 2.0 / 0.7_f64.powi(3)).abs() < 1e-12);
        assert!((x.recip().eps + 1.0 / 0.49).abs() < 1e-12);
    }

    #[test]
    fn nested_duals_give_second_derivatives() {
        // f(x) = x^3, f'' = 6x
        let x = Dual::new(Dual::variable(1.5_f64), Dual::cst(1.0));
        let y = x * x * x;
        assert!((y.eps.eps - 9.0).abs() < 1e-14);
        assert!((y.eps.re - 3.0 * 2.25).abs() < 1e-14);
    }
}
