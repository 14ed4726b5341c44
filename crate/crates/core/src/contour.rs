//! Complex shifts `x -> x + i y` that keep the eigenfunctions inside the Stokes wedges.

use num_complex::Complex;

use crate::error::{domain, Error, Result};
use crate::potential::PotentialParams;
use crate::scalar::{sin_cos_pi, Real};

/// Which of the two asymptotic angles of a family is targeted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    Plus,
    Minus,
}

/// A family of eigenvalues, labelled by the `alpha_R = 2 + 4N` it is Hermitian-like at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FamilySelector {
    alpha_r: u32,
    branch: Branch,
}

impl FamilySelector {
    /// The family that is real on the real axis at `alpha = 2`.
    pub const PRIMARY: Self = Self { alpha_r: 2, branch: Branch::Plus };
    /// The lower branch of `alpha_R = 6`; its ground state lies above the primary one near `alpha = 3`.
    pub const ALT: Self = Self { alpha_r: 6, branch: Branch::Minus };

    pub fn new(alpha_r: u32, branch: Branch) -> Result<Self> {
        if alpha_r % 4 != 2 {
            return domain(format!("alpha_R = {alpha_r} is not of the form 2 + 4N"));
        }
        Ok(Self { alpha_r, branch })
    }

    pub fn alpha_r(&self) -> u32 {
        self.alpha_r
    }

    pub fn branch(&self) -> Branch {
        self.branch
    }

    /// Target phase of the asymptotic exponent, an integer multiple of `pi` (as that integer).
    fn target_turns(&self) -> i64 {
        let plus = (self.alpha_r as i64 + 2) / 4;
        match self.branch {
            Branch::Plus => plus,
            Branch::Minus => plus - 3,
        }
    }

    /// Target phase `theta` in radians.
    pub fn target_angle<T: Real>(&self) -> T {
        T::PI() * T::lit(self.target_turns() as f64)
    }

    /// Sign in front of the WKB exponent that gives the decaying solution.
    fn decay_sign<T: Real>(&self) -> T {
        if self.target_turns() % 2 == 0 {
            -T::one()
        } else {
            T::one()
        }
    }
}

impl std::fmt::Display for FamilySelector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let b = match self.branch {
            Branch::Plus => '+',
            Branch::Minus => '-',
        };
        write!(f, "{}{b}", self.alpha_r)
    }
}

/// Parses `"2+"`, `"6-"`; a bare number means the plus branch.
impl std::str::FromStr for FamilySelector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (num, branch) = match s.as_bytes().last() {
            Some(b'+') => (&s[..s.len() - 1], Branch::Plus),
            Some(b'-') => (&s[..s.len() - 1], Branch::Minus),
            _ => (s, Branch::Plus),
        };
        let alpha_r = num.parse().map_err(|_| Error::Domain(format!("bad family {s:?}")))?;
        Self::new(alpha_r, branch)
    }
}

/// Shift chosen for a family together with the admissible window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourSpec<T> {
    pub y: T,
    pub y_minus: T,
    pub y_plus: T,
    /// Asymptotic phase at the chosen `y`.
    pub theta: T,
    /// Shift before the PT clamp `y <= 0`.
    pub unclamped: T,
}

/// Phase `pi (alpha + 2) / 4 + y (alpha + beta) / 2` of the dominant exponent.
pub fn asymptotic_phase<T: Real>(p: &PotentialParams<T>, y: T) -> T {
    let two = T::lit(2.0);
    T::PI() * (p.alpha() + two) / T::lit(4.0) + y * p.growth() / two
}

/// The `y` at which the asymptotic phase equals `angle`.
pub fn shift_for_angle<T: Real>(p: &PotentialParams<T>, angle: T) -> Result<T> {
    let g = p.growth();
    if !(g > T::zero()) {
        return domain(format!("alpha + beta = {g} must be positive"));
    }
    let two = T::lit(2.0);
    Ok((angle - T::PI() * (p.alpha() + two) / T::lit(4.0)) * two / g)
}

/// Optimal shift for `family`, clamped to `y <= 0`.
pub fn optimal_shift<T: Real>(p: &PotentialParams<T>, family: FamilySelector) -> Result<ContourSpec<T>> {
    let target: T = family.target_angle();
    let half = T::FRAC_PI_2();
    let unclamped = shift_for_angle(p, target)?;
    let y_plus = shift_for_angle(p, target + half)?;
    let y_minus = shift_for_angle(p, target - half)?;
    if y_minus > T::zero() {
        return Err(Error::NoAdmissibleShift {
            alpha_r: family.alpha_r(),
            alpha: p.alpha().to_f64_lossy(),
        });
    }
    let y = unclamped.min(T::zero());
    Ok(ContourSpec {
        y,
        y_minus,
        y_plus: y_plus.min(T::zero()),
        theta: asymptotic_phase(p, y),
        unclamped,
    })
}

/// Leading WKB exponent `G(z)` with the family's decaying sign.
pub fn asymptotic_g_at<T: Real>(p: &PotentialParams<T>, family: FamilySelector, z: Complex<T>) -> Result<Complex<T>> {
    let g = p.growth();
    if !(g > T::zero()) {
        return domain(format!("alpha + beta = {g} must be positive"));
    }
    let two = T::lit(2.0);
    let (s, c) = sin_cos_pi((two + p.alpha()) / T::lit(4.0));
    let amplitude = two * family.decay_sign::<T>() / (two.powf(g / two) * g);
    Ok(Complex::new(c, s) * (z * (g / two)).exp() * amplitude)
}

/// `G(x)` on the real axis.
pub fn asymptotic_g<T: Real>(p: &PotentialParams<T>, family: FamilySelector, x: T) -> Result<Complex<T>> {
    asymptotic_g_at(p, family, Complex::new(x, T::zero()))
}

/// `-Re G(x + i y)`, large and positive when the wavefunction has decayed.
pub fn decay_margin<T: Real>(p: &PotentialParams<T>, family: FamilySelector, y: T, x: T) -> Result<T> {
    Ok(-asymptotic_g_at(p, family, Complex::new(x, y))?.re)
}
