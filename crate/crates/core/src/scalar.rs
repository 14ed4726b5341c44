//! Scalar traits shared by the solvers.

use std::fmt::{Debug, Display};

use num_rational::BigRational;
use num_traits::{Float, FloatConst, FromPrimitive, Num, Signed, ToPrimitive};

/// Floating point type for the finite-difference side: `f32` or `f64`.
pub trait Real: Float + FloatConst + FromPrimitive + Debug + Display + Send + Sync + 'static {
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal fits in the scalar type")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Field type for the Riccati–Padé side: `f64`, `BigRational` or [`crate::mp::Mp`].
pub trait FieldScalar:
    Num + Signed + FromPrimitive + ToPrimitive + Clone + PartialOrd + Debug + Display
{
    /// Decimal digits carried, `None` when exact.
    const DIGITS: Option<u32>;

    fn from_rational(r: &BigRational) -> Self;

    fn from_f64_lossy(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl FieldScalar for f64 {
    const DIGITS: Option<u32> = Some(15);

    fn from_rational(r: &BigRational) -> Self {
        r.to_f64().unwrap_or(f64::NAN)
    }
}

impl FieldScalar for BigRational {
    const DIGITS: Option<u32> = None;

    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }
}

/// `sin(pi r)` and `cos(pi r)`, exact whenever `2r` is an integer.
pub fn sin_cos_pi<T: Real>(r: T) -> (T, T) {
    let two = T::lit(2.0);
    let m = r - two * (r / two).floor();
    let twice = m * two;
    if twice == twice.round() {
        return match twice.to_i32() {
            Some(0) | Some(4) => (T::zero(), T::one()),
            Some(1) => (T::one(), T::zero()),
            Some(2) => (T::zero(), -T::one()),
            Some(3) => (-T::one(), T::zero()),
            _ => unreachable!(),
        };
    }
    (m * T::PI()).sin_cos()
}
