//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Real floating point type the library is generic over (`f32` or `f64`).
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + LowerExp
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal into `Self`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// Converts an index or count into `Self`.
    #[inline]
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    /// Loose relative tolerance appropriate for checks that accumulate a few
    /// hundred rounding errors (`eps^(2/3)`).
    #[inline]
    fn loose_tol() -> Self {
        Self::epsilon().powf(Self::lit(2.0 / 3.0))
    }

    /// Wraps an angle into the half-open interval `(-pi, pi]`.
    fn wrap_angle(self) -> Self {
        let two_pi = Self::TAU();
        let mut a = self % two_pi;
        if a <= -Self::PI() {
            a += two_pi;
        } else if a > Self::PI() {
            a -= two_pi;
        }
        a
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex scalar over a [`Real`] type.
pub type C<T> = Complex<T>;

#[inline]
pub(crate) fn cplx<T: Real>(re: T, im: T) -> C<T> {
    Complex::new(re, im)
}

#[inline]
pub(crate) fn real<T: Real>(re: T) -> C<T> {
    Complex::new(re, T::zero())
}

/// `e^{i angle}`.
#[inline]
pub(crate) fn expi<T: Real>(angle: T) -> C<T> {
    Complex::new(angle.cos(), angle.sin())
}

/// Distance between two angles on the circle, in `[0, pi]`.
pub(crate) fn angular_distance<T: Real>(a: T, b: T) -> T {
    (a - b).wrap_angle().abs()
}

/// Complementary error function, fractional error below `1.2e-7`.
///
/// Chebyshev fit from Numerical Recipes (`erfcc`); used only for coverage
/// thresholds, never for reported values.
pub(crate) fn erfc<T: Real>(x: T) -> T {
    let z = x.abs().to_f64().unwrap_or(f64::INFINITY);
    let t = 1.0 / (1.0 + 0.5 * z);
    let poly = -z * z - 1.265_512_23
        + t * (1.000_023_68
            + t * (0.374_091_96
                + t * (0.096_784_18
                    + t * (-0.186_288_06
                        + t * (0.278_868_07
                            + t * (-1.135_203_98
                                + t * (1.488_515_87 + t * (-0.822_152_23 + t * 0.170_872_77))))))));
    let ans = t * poly.exp();
    T::lit(if x.to_f64().unwrap_or(0.0) >= 0.0 {
        ans
    } else {
        2.0 - ans
    })
}
