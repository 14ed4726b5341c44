//! Fixed-precision binary floats for the Hankel determinants.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Rem, Sub};

use dashu_float::round::mode::HalfEven;
use dashu_float::FBig;
use dashu_int::IBig;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, One, Signed, ToPrimitive, Zero};

use crate::scalar::FieldScalar;

type Inner = FBig<HalfEven, 2>;

/// Binary float carrying `BITS` bits of significand.
#[derive(Clone, PartialEq)]
pub struct Mp<const BITS: usize>(Inner);

impl<const BITS: usize> Mp<BITS> {
    fn wrap(x: Inner) -> Self {
        Mp(x.with_precision(BITS).value())
    }

    pub fn from_ibig(i: IBig) -> Self {
        Self::wrap(Inner::from(i))
    }

    /// Parses a decimal literal such as `"1.21141098417527"`.
    pub fn from_decimal(s: &str) -> Option<Self> {
        let r = parse_decimal(s)?;
        Some(Self::from_rational(&r))
    }

    pub fn inner(&self) -> &Inner {
        &self.0
    }

    /// Decimal rendering with `digits` significant digits.
    pub fn to_decimal_string(&self, digits: usize) -> String {
        if self.0.repr().is_zero() {
            return "0".into();
        }
        let d = self.0.clone().with_base_and_precision::<10>(digits).value();
        d.to_string()
    }
}

fn parse_decimal(s: &str) -> Option<BigRational> {
    let s = s.trim();
    let (mant, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (int, frac) = mant.split_once('.').unwrap_or((mant, ""));
    let digits: String = format!("{int}{frac}");
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let n: num_bigint::BigInt = digits.parse().ok()?;
    let scale = exp - frac.len() as i32;
    let ten = BigRational::from_integer(10.into());
    let mut r = BigRational::from_integer(n);
    if scale >= 0 {
        r *= num_traits::pow(ten, scale as usize);
    } else {
        r /= num_traits::pow(ten, (-scale) as usize);
    }
    Some(if neg { -r } else { r })
}

fn bigint_to_ibig(b: &num_bigint::BigInt) -> IBig {
    IBig::from_str_radix(&b.to_str_radix(16), 16).expect("hex digits")
}

impl<const BITS: usize> fmt::Debug for Mp<BITS> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Mp<{BITS}>({})", self)
    }
}

impl<const BITS: usize> fmt::Display for Mp<BITS> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f.precision().unwrap_or((BITS as f64 * std::f64::consts::LOG10_2) as usize);
        f.write_str(&self.to_decimal_string(digits.max(1)))
    }
}

impl<const BITS: usize> PartialOrd for Mp<BITS> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.partial_cmp(&other.0)
    }
}

macro_rules! binop {
    ($tr:ident, $f:ident) => {
        impl<const BITS: usize> $tr for Mp<BITS> {
            type Output = Self;
            fn $f(self, rhs: Self) -> Self {
                Self::wrap($tr::$f(self.0, rhs.0))
            }
        }
        impl<'a, const BITS: usize> $tr<&'a Mp<BITS>> for &'a Mp<BITS> {
            type Output = Mp<BITS>;
            fn $f(self, rhs: &'a Mp<BITS>) -> Mp<BITS> {
                Mp::wrap($tr::$f(&self.0, &rhs.0))
            }
        }
    };
}

binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);
binop!(Div, div);

impl<const BITS: usize> Rem for Mp<BITS> {
    type Output = Self;
    fn rem(self, rhs: Self) -> Self {
        let q = (self.0.clone() / rhs.0.clone()).trunc();
        Self::wrap(self.0 - q * rhs.0)
    }
}

impl<const BITS: usize> Neg for Mp<BITS> {
    type Output = Self;
    fn neg(self) -> Self {
        Mp(-self.0)
    }
}

impl<const BITS: usize> Zero for Mp<BITS> {
    fn zero() -> Self {
        Self::wrap(Inner::ZERO)
    }
    fn is_zero(&self) -> bool {
        self.0.repr().is_zero()
    }
}

impl<const BITS: usize> One for Mp<BITS> {
    fn one() -> Self {
        Self::wrap(Inner::ONE)
    }
}

impl<const BITS: usize> Num for Mp<BITS> {
    type FromStrRadixErr = ();
    fn from_str_radix(s: &str, radix: u32) -> Result<Self, ()> {
        if radix != 10 {
            return Err(());
        }
        Self::from_decimal(s).ok_or(())
    }
}

impl<const BITS: usize> Signed for Mp<BITS> {
    fn abs(&self) -> Self {
        Mp(Signed::abs(&self.0))
    }
    fn abs_sub(&self, other: &Self) -> Self {
        if self <= other {
            Self::zero()
        } else {
            self.clone() - other.clone()
        }
    }
    fn signum(&self) -> Self {
        Self::wrap(Signed::signum(&self.0))
    }
    fn is_positive(&self) -> bool {
        Signed::is_positive(&self.0)
    }
    fn is_negative(&self) -> bool {
        Signed::is_negative(&self.0)
    }
}

impl<const BITS: usize> FromPrimitive for Mp<BITS> {
    fn from_i64(n: i64) -> Option<Self> {
        Some(Self::wrap(Inner::from(n)))
    }
    fn from_u64(n: u64) -> Option<Self> {
        Some(Self::wrap(Inner::from(n)))
    }
    fn from_f64(x: f64) -> Option<Self> {
        Inner::try_from(x).ok().map(Self::wrap)
    }
}

impl<const BITS: usize> ToPrimitive for Mp<BITS> {
    fn to_i64(&self) -> Option<i64> {
        self.0.to_int().value().try_into().ok()
    }
    fn to_u64(&self) -> Option<u64> {
        self.0.to_int().value().try_into().ok()
    }
    fn to_f64(&self) -> Option<f64> {
        Some(self.0.to_f64().value())
    }
}

impl<const BITS: usize> FieldScalar for Mp<BITS> {
    const DIGITS: Option<u32> = Some((BITS as f64 * std::f64::consts::LOG10_2) as u32);

    fn from_rational(r: &BigRational) -> Self {
        let n = Inner::from(bigint_to_ibig(r.numer())).with_precision(BITS + 64).value();
        let d = Inner::from(bigint_to_ibig(r.denom())).with_precision(BITS + 64).value();
        Self::wrap(n / d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type M = Mp<256>;

    #[test]
    fn arithmetic_keeps_precision() {
        let third = M::one() / M::from_i64(3).unwrap();
        let back = third.clone() * M::from_i64(3).unwrap();
        let err = (back - M::one()).abs().to_f64().unwrap();
        assert!(err < 1e-70, "{err}");
        assert!(third.inner().precision() == 256);
    }

    #[test]
    fn rational_conversion() {
        let r = BigRational::new(1.into(), 7.into());
        let x = M::from_rational(&r);
        assert!((x.to_f64().unwrap() - 1.0 / 7.0).abs() < 1e-16);
        assert!(x.to_string().starts_with("0.142857142857142857142857"));
    }

    #[test]
    fn decimal_parse() {
        let x = M::from_decimal("-1.25e2").unwrap();
        assert_eq!(x.to_f64(), Some(-125.0));
        assert!(M::from_decimal("1.2.3").is_none());
        assert_eq!(M::from_str_radix("0.5", 10).unwrap().to_f64(), Some(0.5));
    }

    #[test]
    fn ordering_and_sign() {
        let a = M::from_f64(-2.5).unwrap();
        assert!(a < M::zero());
        assert!(a.is_negative());
        assert_eq!(a.abs().to_f64(), Some(2.5));
        assert_eq!((M::from_i64(7).unwrap() % M::from_i64(3).unwrap()).to_f64(), Some(1.0));
    }
}
