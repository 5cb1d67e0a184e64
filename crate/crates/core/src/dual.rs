//! Forward-mode dual numbers that nest.
//!
//! `Dual<f64>` carries one directional derivative, `Dual<Dual<f64>>` a mixed
//! second derivative, and so on. Every metric family writes `F²` once,
//! generically over [`Real`], and the engine picks the nesting depth it needs.

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

/// Scalar arithmetic shared by `f64` and every nesting of [`Dual`].
pub trait Real:
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
    + Send
    + Sync
{
    fn cst(v: f64) -> Self;
    /// The innermost real value.
    fn value(&self) -> f64;
    fn sqrt(self) -> Self;
    fn recip(self) -> Self;

    fn zero() -> Self {
        Self::cst(0.0)
    }
    fn one() -> Self {
        Self::cst(1.0)
    }
    fn scale(self, k: f64) -> Self {
        self * Self::cst(k)
    }
    fn powi(self, k: u32) -> Self {
        let mut out = Self::one();
        for _ in 0..k {
            out *= self;
        }
        out
    }
}

impl Real for f64 {
    #[inline]
    fn cst(v: f64) -> Self {
        v
    }
    #[inline]
    fn value(&self) -> f64 {
        *self
    }
    #[inline]
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    #[inline]
    fn recip(self) -> Self {
        1.0 / self
    }
    #[inline]
    fn scale(self, k: f64) -> Self {
        self * k
    }
}

/// `re + du·ε` with `ε² = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual<T> {
    pub re: T,
    pub du: T,
}

impl<T: Real> Dual<T> {
    #[inline]
    pub fn new(re: T, du: T) -> Self {
        Self { re, du }
    }

    /// A variable: `re` with unit seed.
    #[inline]
    pub fn var(re: T) -> Self {
        Self { re, du: T::one() }
    }

    #[inline]
    pub fn constant(re: T) -> Self {
        Self { re, du: T::zero() }
    }
}

impl<T: Real> Add for Dual<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::new(self.re + o.re, self.du + o.du)
    }
}

impl<T: Real> Sub for Dual<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self::new(self.re - o.re, self.du - o.du)
    }
}

impl<T: Real> Mul for Dual<T> {
    type Output = Self;
    #[inline]
    fn mul(self, o: Self) -> Self {
        Self::new(self.re * o.re, self.re * o.du + self.du * o.re)
    }
}

impl<T: Real> Div for Dual<T> {
    type Output = Self;
    #[inline]
    fn div(self, o: Self) -> Self {
        let inv = o.re.recip();
        let q = self.re * inv;
        Self::new(q, (self.du - q * o.du) * inv)
    }
}

impl<T: Real> Neg for Dual<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.re, -self.du)
    }
}

impl<T: Real> AddAssign for Dual<T> {
    #[inline]
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<T: Real> SubAssign for Dual<T> {
    #[inline]
    fn sub_assign(&mut self, o: Self) {
        *self = *self - o;
    }
}

impl<T: Real> MulAssign for Dual<T> {
    #[inline]
    fn mul_assign(&mut self, o: Self) {
        *self = *self * o;
    }
}

impl<T: Real> Real for Dual<T> {
    #[inline]
    fn cst(v: f64) -> Self {
        Self::constant(T::cst(v))
    }
    #[inline]
    fn value(&self) -> f64 {
        self.re.value()
    }
    #[inline]
    fn sqrt(self) -> Self {
        let s = self.re.sqrt();
        Self::new(s, self.du / s.scale(2.0))
    }
    #[inline]
    fn recip(self) -> Self {
        let inv = self.re.recip();
        Self::new(inv, -(self.du * inv * inv))
    }
    #[inline]
    fn scale(self, k: f64) -> Self {
        Self::new(self.re.scale(k), self.du.scale(k))
    }
}

pub type D1 = Dual<f64>;
pub type D2<T = f64> = Dual<Dual<T>>;
pub type D3<T = f64> = Dual<Dual<Dual<T>>>;

/// Seeds for a second-order nest: `x + a·ε₁ + b·ε₂`.
#[inline]
pub fn seed2<T: Real>(x: T, a: f64, b: f64) -> D2<T> {
    Dual::new(Dual::new(x, T::cst(b)), Dual::new(T::cst(a), T::zero()))
}

/// Seeds for a third-order nest: `x + a·ε₁ + b·ε₂ + c·ε₃`.
#[inline]
pub fn seed3<T: Real>(x: T, a: f64, b: f64, c: f64) -> D3<T> {
    Dual::new(
        Dual::new(Dual::new(x, T::cst(c)), Dual::new(T::cst(b), T::zero())),
        Dual::new(Dual::new(T::cst(a), T::zero()), Dual::constant(T::zero())),
    )
}

/// `∂²/∂ε₁∂ε₂` of a second-order nest.
#[inline]
pub fn mixed2<T: Real>(v: &D2<T>) -> T {
    v.du.du
}

/// `∂³/∂ε₁∂ε₂∂ε₃` of a third-order nest.
#[inline]
pub fn mixed3<T: Real>(v: &D3<T>) -> T {
    v.du.du.du
}

/// Lift a slice into the next nesting level as constants.
pub fn lift<T: Real>(xs: &[T]) -> Vec<Dual<T>> {
    xs.iter().map(|&x| Dual::constant(x)).collect()
}
