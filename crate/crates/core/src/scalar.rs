//! Scalar types used by the geometry engine.
//!
//! Everything that touches a metric or a field is written against [`Real`],
//! which is implemented for the primitive floats and for [`Dual`] numbers
//! over any `Real`. Nesting gives higher derivatives: `Dual<Dual<f64>>` is a
//! hyper-dual number carrying two independent infinitesimals and their
//! product, which yields exact second derivatives in one evaluation.

use std::cmp::Ordering;
use std::fmt::{self, Debug, Display};
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Rem, Sub, SubAssign};

use num_traits::{FromPrimitive, Num, One, ToPrimitive, Zero};

/// A real scalar closed under the elementary functions the engine needs.
///
/// Comparisons on non-primitive implementors look only at the real part.
pub trait Real:
    Copy
    + Debug
    + PartialEq
    + PartialOrd
    + Num
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Send
    + Sync
{
    fn from_f64(v: f64) -> Self;
    /// Real part as `f64`.
    fn to_f64(self) -> f64;

    fn sqrt(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn sinh(self) -> Self;
    fn cosh(self) -> Self;
    fn tanh(self) -> Self;
    fn abs(self) -> Self;
    fn powi(self, n: i32) -> Self;

    fn powf(self, e: Self) -> Self {
        (e * self.ln()).exp()
    }
}

/// A primitive float (`f32` or `f64`), used where the numerics need
/// `num_traits::Float` directly. Every `FloatScalar` is also [`Real`].
pub trait FloatScalar:
    num_traits::Float + FromPrimitive + Debug + Display + AddAssign + SubAssign + MulAssign + DivAssign + Send + Sync + 'static
{
    /// Convert an `f64` literal.
    #[inline]
    fn of(v: f64) -> Self {
        <Self as FromPrimitive>::from_f64(v).expect("f64 representable")
    }
}

impl<T> FloatScalar for T where
    T: num_traits::Float + FromPrimitive + Debug + Display + AddAssign + SubAssign + MulAssign + DivAssign + Send + Sync + 'static
{
}

impl<T> Real for T
where
    T: num_traits::Float
        + FromPrimitive
        + Debug
        + AddAssign
        + SubAssign
        + MulAssign
        + DivAssign
        + Send
        + Sync,
{
    #[inline]
    fn from_f64(v: f64) -> Self {
        T::from_f64(v).expect("f64 representable")
    }
    #[inline]
    fn to_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
    #[inline]
    fn sqrt(self) -> Self {
        num_traits::Float::sqrt(self)
    }
    #[inline]
    fn exp(self) -> Self {
        num_traits::Float::exp(self)
    }
    #[inline]
    fn ln(self) -> Self {
        num_traits::Float::ln(self)
    }
    #[inline]
    fn sin(self) -> Self {
        num_traits::Float::sin(self)
    }
    #[inline]
    fn cos(self) -> Self {
        num_traits::Float::cos(self)
    }
    #[inline]
    fn sinh(self) -> Self {
        num_traits::Float::sinh(self)
    }
    #[inline]
    fn cosh(self) -> Self {
        num_traits::Float::cosh(self)
    }
    #[inline]
    fn tanh(self) -> Self {
        num_traits::Float::tanh(self)
    }
    #[inline]
    fn abs(self) -> Self {
        num_traits::Float::abs(self)
    }
    #[inline]
    fn powi(self, n: i32) -> Self {
        num_traits::Float::powi(self, n)
    }
    #[inline]
    fn powf(self, e: Self) -> Self {
        num_traits::Float::powf(self, e)
    }
}

/// First-order dual number `re + eps·ε` with `ε² = 0`.
#[derive(Clone, Copy, Default)]
pub struct Dual<S> {
    pub re: S,
    pub eps: S,
}

impl<S: Real> Dual<S> {
    #[inline]
    pub fn new(re: S, eps: S) -> Self {
        Self { re, eps }
    }

    /// A constant (zero infinitesimal part).
    #[inline]
    pub fn constant(re: S) -> Self {
        Self { re, eps: S::zero() }
    }

    /// An independent variable (unit infinitesimal part).
    #[inline]
    pub fn variable(re: S) -> Self {
        Self { re, eps: S::one() }
    }

    #[inline]
    fn chain(self, f: S, df: S) -> Self {
        Self { re: f, eps: df * self.eps }
    }
}

/// Hyper-dual number: two infinitesimals and their mixed product.
pub type HyperDual<S> = Dual<Dual<S>>;

impl<S: Debug> Debug for Dual<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} + {:?}ε", self.re, self.eps)
    }
}

impl<S: Display> Display for Dual<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + {}ε", self.re, self.eps)
    }
}

impl<S: PartialEq> PartialEq for Dual<S> {
    fn eq(&self, other: &Self) -> bool {
        self.re == other.re
    }
}

impl<S: PartialOrd> PartialOrd for Dual<S> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.re.partial_cmp(&other.re)
    }
}

impl<S: Real> Add for Dual<S> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::new(self.re + o.re, self.eps + o.eps)
    }
}

impl<S: Real> Sub for Dual<S> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self::new(self.re - o.re, self.eps - o.eps)
    }
}

impl<S: Real> Mul for Dual<S> {
    type Output = Self;
    #[inline]
    fn mul(self, o: Self) -> Self {
        Self::new(self.re * o.re, self.re * o.eps + self.eps * o.re)
    }
}

impl<S: Real> Div for Dual<S> {
    type Output = Self;
    #[inline]
    fn div(self, o: Self) -> Self {
        let inv = S::one() / o.re;
        let re = self.re * inv;
        Self::new(re, (self.eps - re * o.eps) * inv)
    }
}

impl<S: Real> Rem for Dual<S> {
    type Output = Self;
    /// Remainder is only meaningful on the real part; the infinitesimal part
    /// follows `a - n·b` with `n` held constant.
    fn rem(self, o: Self) -> Self {
        let q = self.re / o.re;
        let n = S::from_f64(q.to_f64().trunc());
        Self::new(self.re - n * o.re, self.eps - n * o.eps)
    }
}

impl<S: Real> Neg for Dual<S> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.re, -self.eps)
    }
}

impl<S: Real> AddAssign for Dual<S> {
    #[inline]
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<S: Real> SubAssign for Dual<S> {
    #[inline]
    fn sub_assign(&mut self, o: Self) {
        *self = *self - o;
    }
}

impl<S: Real> MulAssign for Dual<S> {
    #[inline]
    fn mul_assign(&mut self, o: Self) {
        *self = *self * o;
    }
}

impl<S: Real> DivAssign for Dual<S> {
    #[inline]
    fn div_assign(&mut self, o: Self) {
        *self = *self / o;
    }
}

impl<S: Real> Zero for Dual<S> {
    fn zero() -> Self {
        Self::constant(S::zero())
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.eps.is_zero()
    }
}

impl<S: Real> One for Dual<S> {
    fn one() -> Self {
        Self::constant(S::one())
    }
}

impl<S: Real> Num for Dual<S> {
    type FromStrRadixErr = S::FromStrRadixErr;
    fn from_str_radix(s: &str, radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        S::from_str_radix(s, radix).map(Self::constant)
    }
}

impl<S: Real> Real for Dual<S> {
    #[inline]
    fn from_f64(v: f64) -> Self {
        Self::constant(S::from_f64(v))
    }
    #[inline]
    fn to_f64(self) -> f64 {
        self.re.to_f64()
    }
    fn sqrt(self) -> Self {
        let r = self.re.sqrt();
        self.chain(r, S::one() / (S::from_f64(2.0) * r))
    }
    fn exp(self) -> Self {
        let e = self.re.exp();
        self.chain(e, e)
    }
    fn ln(self) -> Self {
        self.chain(self.re.ln(), S::one() / self.re)
    }
    fn sin(self) -> Self {
        self.chain(self.re.sin(), self.re.cos())
    }
    fn cos(self) -> Self {
        self.chain(self.re.cos(), -self.re.sin())
    }
    fn sinh(self) -> Self {
        self.chain(self.re.sinh(), self.re.cosh())
    }
    fn cosh(self) -> Self {
        self.chain(self.re.cosh(), self.re.sinh())
    }
    fn tanh(self) -> Self {
        let t = self.re.tanh();
        self.chain(t, S::one() - t * t)
    }
    fn abs(self) -> Self {
        if self.re < S::zero() {
            -self
        } else {
            self
        }
    }
    fn powi(self, n: i32) -> Self {
        if n == 0 {
            return Self::one();
        }
        let lower = self.re.powi(n - 1);
        self.chain(lower * self.re, S::from_f64(n as f64) * lower)
    }
}

/// Derivative of a scalar function of one variable.
pub fn derivative<S: Real>(f: impl Fn(Dual<S>) -> Dual<S>, x: S) -> S {
    f(Dual::variable(x)).eps
}

/// Value, first and second derivative of a scalar function of one variable.
pub fn second_derivative<S: Real>(f: impl Fn(HyperDual<S>) -> HyperDual<S>, x: S) -> (S, S, S) {
    let v = f(Dual::new(Dual::variable(x), Dual::constant(S::one())));
    (v.re.re, v.re.eps, v.eps.eps)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_and_quotient_rules() {
        let x = Dual::variable(3.0_f64);
        let y = x * x / (x + Dual::constant(1.0));
        // d/dx x²/(x+1) = (x² + 2x)/(x+1)²
        assert!((y.eps - 15.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn hyperdual_second_derivative_of_sinh() {
        let (v, d1, d2) = second_derivative(|x| x.sinh() * x.exp(), 0.7_f64);
        let e = 0.7_f64.exp();
        assert!((v - 0.7_f64.sinh() * e).abs() < 1e-14);
        assert!((d1 - (0.7_f64.cosh() + 0.7_f64.sinh()) * e).abs() < 1e-14);
        assert!((d2 - 2.0 * (0.7_f64.sinh() + 0.7_f64.cosh()) * e).abs() < 1e-13);
    }

    #[test]
    fn powi_and_powf_agree() {
        let x = 1.3_f64;
        let a = derivative(|t| t.powi(3), x);
        let b = derivative(|t| t.powf(Dual::constant(3.0)), x);
        assert!((a - 3.0 * x * x).abs() < 1e-13);
        assert!((a - b).abs() < 1e-12);
        assert_eq!(derivative(|t| t.powi(0), x), 0.0);
    }

    #[test]
    fn works_over_f32() {
        let d = derivative(|t| t.sin(), 0.5_f32);
        assert!((d - 0.5_f32.cos()).abs() < 1e-6);
    }
}
