//! Scalar abstractions.
//!
//! [`Scalar`] is the real floating-point type the numerics are written
//! against (`f32` or `f64`). [`Field`] is the much smaller algebraic surface
//! that the block-matrix routines need, so that the same code runs over plain
//! numbers, truncated Taylor jets, dual numbers and their complexifications.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex;
use num_traits::{Float, FromPrimitive, NumAssign};

/// Real floating-point scalar: `f32` or `f64`.
pub trait Scalar:
    Float
    + Field
    + FromPrimitive
    + NumAssign
    + Debug
    + Display
    + LowerExp
    + Default
    + Send
    + Sync
    + Sum
    + 'static
{
    /// Converts an `f64` literal into this scalar type.
    fn c(x: f64) -> Self {
        Self::from_f64(x).expect("constant representable in scalar type")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Ring-with-division operations shared by numbers, jets and dual numbers.
///
/// Constants are produced from an existing element (`zero_like`/`one_like`)
/// because jets need their layout to build a zero.
pub trait Field:
    Clone
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;

    /// Complex conjugate; identity for real fields.
    fn conj(&self) -> Self {
        self.clone()
    }

    /// Multiplies by a real constant.
    fn scale(&self, s: f64) -> Self;
}

macro_rules! real_field {
    ($t:ty) => {
        impl Field for $t {
            fn zero_like(&self) -> Self {
                0.0
            }
            fn one_like(&self) -> Self {
                1.0
            }
            fn scale(&self, s: f64) -> Self {
                self * (s as $t)
            }
        }
    };
}

real_field!(f32);
real_field!(f64);

impl<T: Scalar> Field for Complex<T> {
    fn zero_like(&self) -> Self {
        Complex::new(T::zero(), T::zero())
    }
    fn one_like(&self) -> Self {
        Complex::new(T::one(), T::zero())
    }
    fn conj(&self) -> Self {
        Complex::conj(self)
    }
    fn scale(&self, s: f64) -> Self {
        self * T::c(s)
    }
}

/// Complexification of an arbitrary real [`Field`].
///
/// `num_complex::Complex` needs `Num` (including `Rem`) on its parts, which
/// jets and dual numbers do not have; this type only needs field operations.
#[derive(Clone, Debug, PartialEq)]
pub struct Cx<F> {
    pub re: F,
    pub im: F,
}

impl<F: Field> Cx<F> {
    pub fn new(re: F, im: F) -> Self {
        Cx { re, im }
    }

    pub fn real(re: F) -> Self {
        let im = re.zero_like();
        Cx { re, im }
    }
}

impl<F: Field> Add for Cx<F> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Cx::new(self.re + o.re, self.im + o.im)
    }
}

impl<F: Field> Sub for Cx<F> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Cx::new(self.re - o.re, self.im - o.im)
    }
}

impl<F: Field> Mul for Cx<F> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let re = self.re.clone() * o.re.clone() - self.im.clone() * o.im.clone();
        let im = self.re * o.im + self.im * o.re;
        Cx::new(re, im)
    }
}

impl<F: Field> Div for Cx<F> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let den = o.re.clone() * o.re.clone() + o.im.clone() * o.im.clone();
        let re = self.re.clone() * o.re.clone() + self.im.clone() * o.im.clone();
        let im = self.im * o.re - self.re * o.im;
        Cx::new(re / den.clone(), im / den)
    }
}

impl<F: Field> Neg for Cx<F> {
    type Output = Self;
    fn neg(self) -> Self {
        Cx::new(-self.re, -self.im)
    }
}

impl<F: Field> Field for Cx<F> {
    fn zero_like(&self) -> Self {
        Cx::new(self.re.zero_like(), self.re.zero_like())
    }
    fn one_like(&self) -> Self {
        Cx::new(self.re.one_like(), self.re.zero_like())
    }
    fn conj(&self) -> Self {
        Cx::new(self.re.clone(), -self.im.clone())
    }
    fn scale(&self, s: f64) -> Self {
        Cx::new(self.re.scale(s), self.im.scale(s))
    }
}

/// First-order dual number `re + eps·ε` with `ε² = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Dual<T> {
    pub re: T,
    pub eps: T,
}

impl<T: Scalar> Dual<T> {
    pub fn new(re: T, eps: T) -> Self {
        Dual { re, eps }
    }

    pub fn ln(self) -> Self {
        Dual::new(self.re.ln(), self.eps / self.re)
    }
}

impl<T: Scalar> Add for Dual<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Dual::new(self.re + o.re, self.eps + o.eps)
    }
}

impl<T: Scalar> Sub for Dual<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Dual::new(self.re - o.re, self.eps - o.eps)
    }
}

impl<T: Scalar> Mul for Dual<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Dual::new(self.re * o.re, self.re * o.eps + self.eps * o.re)
    }
}

impl<T: Scalar> Div for Dual<T> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let inv = T::one() / o.re;
        Dual::new(self.re * inv, (self.eps * o.re - self.re * o.eps) * inv * inv)
    }
}

impl<T: Scalar> Neg for Dual<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Dual::new(-self.re, -self.eps)
    }
}

impl<T: Scalar> Field for Dual<T> {
    fn zero_like(&self) -> Self {
        Dual::new(T::zero(), T::zero())
    }
    fn one_like(&self) -> Self {
        Dual::new(T::one(), T::zero())
    }
    fn scale(&self, s: f64) -> Self {
        let s = T::c(s);
        Dual::new(self.re * s, self.eps * s)
    }
}

impl<T: Scalar> From<Complex<T>> for Cx<T> {
    fn from(z: Complex<T>) -> Self {
        Cx { re: z.re, im: z.im }
    }
}

impl<T: Scalar> From<Cx<T>> for Complex<T> {
    fn from(z: Cx<T>) -> Self {
        Complex::new(z.re, z.im)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cx_division_inverts_multiplication() {
        let a = Cx::new(1.5_f64, -0.25);
        let b = Cx::new(-0.75_f64, 2.0);
        let q = (a.clone() * b.clone()) / b;
        assert!((q.re - a.re).abs() < 1e-15);
        assert!((q.im - a.im).abs() < 1e-15);
    }

    #[test]
    fn dual_quotient_rule() {
        // d/dx (x^2 / (1 + x)) at x = 2 is (x^2 + 2x)/(1+x)^2 = 8/9
        let x = Dual::new(2.0_f64, 1.0);
        let one = x.one_like();
        let f = (x * x) / (one + x);
        assert!((f.re - 4.0 / 3.0).abs() < 1e-15);
        assert!((f.eps - 8.0 / 9.0).abs() < 1e-15);
    }
}
