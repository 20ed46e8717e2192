//! Real scalar abstraction shared by the whole evaluation pipeline.
//!
//! Every numerical routine in this crate is generic over [`Scalar`], which is
//! implemented by `f64` and by the forward-mode [`Dual`] number. Running the
//! same code path on `Dual` yields directional derivatives, which is how the
//! Poisson bracket engine obtains gradients.

use core::cmp::Ordering;
use core::fmt::{self, Debug, Display};
use core::ops::{
    Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Rem, RemAssign, Sub, SubAssign,
};

use num_complex::Complex;
use num_traits::{Num, NumAssign, One, Zero};

/// A real field element with the handful of transcendental functions the
/// spectral pipeline needs.
pub trait Scalar: NumAssign + Copy + Debug + Neg<Output = Self> + Send + Sync + 'static {
    fn cst(v: f64) -> Self;
    /// The primal (non-derivative) part.
    fn value(self) -> f64;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn exp(self) -> Self;
    fn sqrt(self) -> Self;
    fn abs(self) -> Self;
    /// Upper bound on the magnitude of every component; used for trimming
    /// negligible Fourier modes without discarding tangent information.
    fn magnitude(self) -> f64;

    #[inline]
    fn scale(self, f: f64) -> Self {
        self * Self::cst(f)
    }
}

impl Scalar for f64 {
    #[inline]
    fn cst(v: f64) -> Self {
        v
    }
    #[inline]
    fn value(self) -> f64 {
        self
    }
    #[inline]
    fn sin(self) -> Self {
        libm::sin(self)
    }
    #[inline]
    fn cos(self) -> Self {
        libm::cos(self)
    }
    #[inline]
    fn exp(self) -> Self {
        libm::exp(self)
    }
    #[inline]
    fn sqrt(self) -> Self {
        libm::sqrt(self)
    }
    #[inline]
    fn abs(self) -> Self {
        libm::fabs(self)
    }
    #[inline]
    fn magnitude(self) -> f64 {
        libm::fabs(self)
    }
    #[inline]
    fn scale(self, f: f64) -> Self {
        self * f
    }
}

/// First-order dual number `re + eps·ε` with `ε² = 0`.
///
/// Comparison operators only look at the real part.
#[derive(Clone, Copy, Default, PartialEq)]
pub struct Dual {
    pub re: f64,
    pub eps: f64,
}

impl Dual {
    #[inline]
    pub const fn new(re: f64, eps: f64) -> Self {
        Self { re, eps }
    }

    /// A dual seeded as the independent variable.
    #[inline]
    pub const fn variable(re: f64) -> Self {
        Self { re, eps: 1.0 }
    }

    #[inline]
    pub const fn constant(re: f64) -> Self {
        Self { re, eps: 0.0 }
    }
}

impl Debug for Dual {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Dual({:?} + {:?}ε)", self.re, self.eps)
    }
}

impl Display for Dual {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + {}ε", self.re, self.eps)
    }
}

impl PartialOrd for Dual {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.re.partial_cmp(&other.re)
    }
}

impl Add for Dual {
    type Output = Dual;
    #[inline]
    fn add(self, rhs: Dual) -> Dual {
        Dual::new(self.re + rhs.re, self.eps + rhs.eps)
    }
}

impl Sub for Dual {
    type Output = Dual;
    #[inline]
    fn sub(self, rhs: Dual) -> Dual {
        Dual::new(self.re - rhs.re, self.eps - rhs.eps)
    }
}

impl Mul for Dual {
    type Output = Dual;
    #[inline]
    fn mul(self, rhs: Dual) -> Dual {
        Dual::new(self.re * rhs.re, self.re * rhs.eps + self.eps * rhs.re)
    }
}

impl Div for Dual {
    type Output = Dual;
    #[inline]
    fn div(self, rhs: Dual) -> Dual {
        let inv = 1.0 / rhs.re;
        Dual::new(
            self.re * inv,
            (self.eps * rhs.re - self.re * rhs.eps) * inv * inv,
        )
    }
}

impl Rem for Dual {
    type Output = Dual;
    fn rem(self, rhs: Dual) -> Dual {
        // a mod b = a - b·trunc(a/b); trunc is locally constant.
        let q = libm::trunc(self.re / rhs.re);
        Dual::new(self.re - rhs.re * q, self.eps - rhs.eps * q)
    }
}

impl Neg for Dual {
    type Output = Dual;
    #[inline]
    fn neg(self) -> Dual {
        Dual::new(-self.re, -self.eps)
    }
}

impl AddAssign for Dual {
    #[inline]
    fn add_assign(&mut self, rhs: Dual) {
        *self = *self + rhs;
    }
}

impl SubAssign for Dual {
    #[inline]
    fn sub_assign(&mut self, rhs: Dual) {
        *self = *self - rhs;
    }
}

impl MulAssign for Dual {
    #[inline]
    fn mul_assign(&mut self, rhs: Dual) {
        *self = *self * rhs;
    }
}

impl DivAssign for Dual {
    #[inline]
    fn div_assign(&mut self, rhs: Dual) {
        *self = *self / rhs;
    }
}

impl RemAssign for Dual {
    #[inline]
    fn rem_assign(&mut self, rhs: Dual) {
        *self = *self % rhs;
    }
}

impl Zero for Dual {
    #[inline]
    fn zero() -> Self {
        Dual::constant(0.0)
    }
    #[inline]
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.eps == 0.0
    }
}

impl One for Dual {
    #[inline]
    fn one() -> Self {
        Dual::constant(1.0)
    }
}

impl Num for Dual {
    type FromStrRadixErr = <f64 as Num>::FromStrRadixErr;

    fn from_str_radix(s: &str, radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        f64::from_str_radix(s, radix).map(Dual::constant)
    }
}

impl Scalar for Dual {
    #[inline]
    fn cst(v: f64) -> Self {
        Dual::constant(v)
    }
    #[inline]
    fn value(self) -> f64 {
        self.re
    }
    #[inline]
    fn sin(self) -> Self {
        let (s, c) = libm::sincos(self.re);
        Dual::new(s, self.eps * c)
    }
    #[inline]
    fn cos(self) -> Self {
        let (s, c) = libm::sincos(self.re);
        Dual::new(c, -self.eps * s)
    }
    #[inline]
    fn exp(self) -> Self {
        let e = libm::exp(self.re);
        Dual::new(e, self.eps * e)
    }
    #[inline]
    fn sqrt(self) -> Self {
        let r = libm::sqrt(self.re);
        Dual::new(r, self.eps * 0.5 / r)
    }
    #[inline]
    fn abs(self) -> Self {
        if self.re < 0.0 {
            -self
        } else {
            self
        }
    }
    #[inline]
    fn magnitude(self) -> f64 {
        libm::fabs(self.re).max(libm::fabs(self.eps))
    }
    #[inline]
    fn scale(self, f: f64) -> Self {
        Dual::new(self.re * f, self.eps * f)
    }
}

/// `e^{iθ}` for a (possibly dual) angle.
#[inline]
pub fn cis<S: Scalar>(theta: S) -> Complex<S> {
    Complex::new(theta.cos(), theta.sin())
}

#[inline]
pub fn cplx<S: Scalar>(re: f64, im: f64) -> Complex<S> {
    Complex::new(S::cst(re), S::cst(im))
}

/// Multiplies a complex scalar by a plain `f64` factor.
#[inline]
pub fn cscale<S: Scalar>(z: Complex<S>, f: f64) -> Complex<S> {
    Complex::new(z.re.scale(f), z.im.scale(f))
}

/// Product of a generic complex number with a plain complex constant.
#[inline]
pub fn cmul_const<S: Scalar>(z: Complex<S>, w: Complex<f64>) -> Complex<S> {
    Complex::new(
        z.re.scale(w.re) - z.im.scale(w.im),
        z.re.scale(w.im) + z.im.scale(w.re),
    )
}

/// Primal part of a generic complex number.
#[inline]
pub fn cvalue<S: Scalar>(z: Complex<S>) -> Complex<f64> {
    Complex::new(z.re.value(), z.im.value())
}

#[inline]
pub fn cmagnitude<S: Scalar>(z: Complex<S>) -> f64 {
    z.re.magnitude().max(z.im.magnitude())
}

/// Lifts a plain complex number into any scalar type.
#[inline]
pub fn clift<S: Scalar>(z: Complex<f64>) -> Complex<S> {
    Complex::new(S::cst(z.re), S::cst(z.im))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dual_chain_rule() {
        // d/dx [sin(x)·exp(x)/sqrt(x)] at x = 0.7
        let x = Dual::variable(0.7);
        let f = x.sin() * x.exp() / x.sqrt();
        let h = 1e-6;
        let g = |x: f64| libm::sin(x) * libm::exp(x) / libm::sqrt(x);
        let fd = (g(0.7 + h) - g(0.7 - h)) / (2.0 * h);
        assert!((f.re - g(0.7)).abs() < 1e-15);
        assert!((f.eps - fd).abs() < 1e-8);
    }

    #[test]
    fn dual_complex_arithmetic() {
        let t = Dual::variable(0.3);
        let z = cis(t) * cis(t);
        // d/dt e^{2it} = 2i e^{2it}
        assert!((z.re.eps + 2.0 * libm::sin(0.6)).abs() < 1e-15);
        assert!((z.im.eps - 2.0 * libm::cos(0.6)).abs() < 1e-15);
    }

    #[test]
    fn dual_rem_keeps_derivative() {
        let a = Dual::new(7.5, 1.0);
        let b = Dual::constant(2.0);
        let r = a % b;
        assert_eq!(r.re, 1.5);
        assert_eq!(r.eps, 1.0);
    }
}
