//! The potential `V(z) = -(i sinh z)^alpha cosh^beta z` on its PT-symmetric branch.

use num_complex::Complex;

use crate::error::{domain, Error, Result};
use crate::scalar::{sin_cos_pi, Real};

/// Distance to a zero of `cosh` below which evaluation is refused.
pub const COSH_ZERO_GUARD: f64 = 1e-6;

/// Exponents of the potential, `alpha >= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialParams<T> {
    alpha: T,
    beta: T,
}

impl<T: Real> PotentialParams<T> {
    pub fn new(alpha: T, beta: T) -> Result<Self> {
        if !alpha.is_finite() || !beta.is_finite() {
            return domain("alpha and beta must be finite");
        }
        if alpha < T::zero() {
            return domain(format!("alpha = {alpha} must be >= 0"));
        }
        Ok(Self { alpha, beta })
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn beta(&self) -> T {
        self.beta
    }

    pub fn with_alpha(&self, alpha: T) -> Result<Self> {
        Self::new(alpha, self.beta)
    }

    /// `alpha + beta`, the exponential growth rate of `|V|`.
    pub fn growth(&self) -> T {
        self.alpha + self.beta
    }
}

/// A potential value together with the point it was taken at.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexSample<T> {
    pub z: Complex<T>,
    pub v: Complex<T>,
}

/// Sign of a real number, with zero kept distinct.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    fn of<T: Real>(x: T) -> Self {
        if x > T::zero() {
            Sign::Positive
        } else if x < T::zero() {
            Sign::Negative
        } else {
            Sign::Zero
        }
    }
}

/// `log sinh z` for `Re z >= 0`, continuous from the positive real axis.
fn log_sinh<T: Real>(z: Complex<T>) -> Complex<T> {
    if z.im.abs() < T::FRAC_PI_2() {
        return z.sinh().ln();
    }
    let one = Complex::new(T::one(), T::zero());
    z - T::LN_2() + (one - (-z - z).exp()).ln()
}

/// `log cosh z` for `Re z >= 0`, continuous from the positive real axis.
fn log_cosh<T: Real>(z: Complex<T>) -> Complex<T> {
    if z.im.abs() < T::FRAC_PI_2() {
        return z.cosh().ln();
    }
    let one = Complex::new(T::one(), T::zero());
    z - T::LN_2() + (one + (-z - z).exp()).ln()
}

/// Distance from `z` to the nearest zero `i(pi/2 + k pi)` of `cosh`.
pub fn cosh_zero_distance<T: Real>(z: Complex<T>) -> T {
    let pi = T::PI();
    let k = ((z.im - T::FRAC_PI_2()) / pi).round();
    let dy = z.im - (T::FRAC_PI_2() + k * pi);
    z.re.hypot(dy)
}

fn eval_right<T: Real>(p: &PotentialParams<T>, z: Complex<T>) -> Complex<T> {
    let two = T::lit(2.0);
    let (s, c) = sin_cos_pi((two + p.alpha) / two);
    let phase = Complex::new(c, s);
    if z.re == T::zero() && z.im == T::zero() {
        // sinh 0 = 0, cosh 0 = 1
        return if p.alpha > T::zero() { Complex::new(T::zero(), T::zero()) } else { phase };
    }
    let mut log = Complex::new(T::zero(), T::zero());
    if p.alpha != T::zero() {
        log = log + log_sinh(z) * p.alpha;
    }
    if p.beta != T::zero() {
        log = log + log_cosh(z) * p.beta;
    }
    phase * log.exp()
}

/// Evaluates `V(z)` on the branch that is real-positive-preserving on the real
/// axis for `Re z >= 0` and continued to `Re z < 0` by `V(-conj z) = conj V(z)`.
pub fn eval_potential<T: Real>(p: &PotentialParams<T>, z: Complex<T>) -> Result<Complex<T>> {
    if !z.re.is_finite() || !z.im.is_finite() {
        return domain("evaluation point must be finite");
    }
    if p.beta != T::zero() {
        let d = cosh_zero_distance(z);
        if d < T::lit(COSH_ZERO_GUARD) {
            return Err(Error::CoshZero { distance: d.to_f64_lossy() });
        }
    }
    let v = if z.re >= T::zero() {
        eval_right(p, z)
    } else {
        eval_right(p, -z.conj()).conj()
    };
    if z.re == T::zero() {
        return Ok(Complex::new(v.re, T::zero()));
    }
    Ok(v)
}

/// Signs of `(Re V, Im V)` on the positive real axis, periodic in `alpha` with period 4.
pub fn table1_signs<T: Real>(alpha: T) -> (Sign, Sign) {
    let two = T::lit(2.0);
    let (s, c) = sin_cos_pi((two + alpha) / two);
    (Sign::of(c), Sign::of(s))
}

/// Samples `V(x + i y)` at the given strictly increasing abscissae.
pub fn effective_potential<T: Real>(
    p: &PotentialParams<T>,
    y: T,
    xs: &[T],
) -> Result<Vec<ComplexSample<T>>> {
    if xs.windows(2).any(|w| !(w[1] > w[0])) {
        return domain("sample abscissae must be strictly increasing");
    }
    xs.iter()
        .map(|&x| {
            let z = Complex::new(x, y);
            eval_potential(p, z).map(|v| ComplexSample { z, v })
        })
        .collect()
}
