//! Determinant recurrence, real-eigenvalue search and eigenvalue tracking.

mod eigvec;
mod sweep;

pub use eigvec::{eigenvector, WaveFunction};
pub use sweep::{continuation_sweep, special_level, Continuation, EventKind, LevelTrack, SweepConfig, TrackEvent};

use num_complex::Complex;

use crate::contour::FamilySelector;
use crate::discretization::{build_hamiltonian, GridPolicy, GridSpec, TridiagonalOperator};
use crate::error::{domain, Error, Result};
use crate::potential::PotentialParams;
use crate::scalar::Real;

/// `mantissa * 2^exponent` with `|mantissa|` in `[1, 2)` (or zero).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledDeterminant<T> {
    pub mantissa: Complex<T>,
    pub exponent: i64,
}

impl<T: Real> ScaledDeterminant<T> {
    /// Sign of `Re D` as -1, 0 or 1.
    pub fn re_sign(&self) -> i8 {
        if self.mantissa.re > T::zero() {
            1
        } else if self.mantissa.re < T::zero() {
            -1
        } else {
            0
        }
    }

    /// `|Im D| / |D|`.
    pub fn reality_defect(&self) -> T {
        let m = self.mantissa.norm();
        if m == T::zero() {
            T::zero()
        } else {
            self.mantissa.im.abs() / m
        }
    }

    /// `log2 |D|`.
    pub fn log2_abs(&self) -> T {
        self.mantissa.norm().log2() + T::from_i64(self.exponent).unwrap()
    }

    /// The determinant as a plain complex number (may overflow to infinity).
    pub fn value(&self) -> Complex<T> {
        self.mantissa * T::lit(2.0).powi(self.exponent.clamp(i32::MIN as i64, i32::MAX as i64) as i32)
    }

    /// Fails with [`Error::LossOfReality`] when `|Im D| / |D|` exceeds `tol`.
    pub fn check_reality(&self, energy: T, tol: T) -> Result<()> {
        let r = self.reality_defect();
        if r > tol {
            return Err(Error::LossOfReality { energy: energy.to_f64_lossy(), ratio: r.to_f64_lossy() });
        }
        Ok(())
    }
}

fn pow2<T: Real>(k: i32) -> T {
    T::lit(2.0).powi(k)
}

/// Leading minors `(D_k, D_{k-1})` of `diag` after `k` steps, with a shared power-of-two exponent.
fn minors<'a, T: Real>(diag: impl Iterator<Item = &'a Complex<T>>, e: T, b2: T) -> (Complex<T>, Complex<T>, i64) {
    let big = pow2::<T>(32);
    let small = pow2::<T>(-32);
    let mut prev = Complex::new(T::zero(), T::zero());
    let mut cur = Complex::new(T::one(), T::zero());
    let mut exponent: i64 = 0;
    for &a in diag {
        let next = (a - e) * cur - prev * b2;
        prev = cur;
        cur = next;
        let m = cur.re.abs().max(cur.im.abs());
        if m > big || (m < small && m > T::zero()) {
            let k = m.log2().floor().to_i32().unwrap_or(0);
            let s = pow2::<T>(-k);
            cur = cur * s;
            prev = prev * s;
            exponent += k as i64;
        }
    }
    (cur, prev, exponent)
}

/// `det(H - E)` from the three-term recurrence run inwards from both ends and joined at the middle.
///
/// On a grid whose diagonal is mirrored by conjugation the two halves are exact conjugates, so the
/// result is real to the last bit; a broken mirror shows up as an imaginary part.
pub fn det_n<T: Real>(op: &TridiagonalOperator<T>, e: T) -> ScaledDeterminant<T> {
    let b2 = op.off() * op.off();
    let d = op.diag();
    let n = d.len();
    let m = n / 2;
    let (l1, l0, el) = minors(d[..m].iter(), e, b2);
    let (r1, r0, er) = minors(d[n - m..].iter().rev(), e, b2);
    let z = if n.is_multiple_of(2) {
        l1 * r1 - l0 * r0 * b2
    } else {
        (l1 * r1) * (d[m] - e) - (l0 * r1 + l1 * r0) * b2
    };
    normalize(z, el + er)
}

fn normalize<T: Real>(z: Complex<T>, mut exponent: i64) -> ScaledDeterminant<T> {
    let m = z.norm();
    if m == T::zero() || !m.is_finite() {
        return ScaledDeterminant { mantissa: z, exponent };
    }
    let mut k = m.log2().floor().to_i32().unwrap_or(0);
    let mut w = z * pow2::<T>(-k);
    let two = T::lit(2.0);
    while w.norm() >= two {
        w = w / two;
        k += 1;
    }
    while w.norm() < T::one() {
        w = w * two;
        k -= 1;
    }
    exponent += k as i64;
    ScaledDeterminant { mantissa: w, exponent }
}

fn bisection_tol<T: Real>() -> T {
    T::lit(1e-12).max(T::epsilon() * T::lit(4.0))
}

/// Bisects a sign change of `Re D` on `[lo, hi]` to relative width `1e-12`.
pub fn bisect_root<T: Real>(op: &TridiagonalOperator<T>, lo: T, hi: T) -> Result<T> {
    let (mut a, mut b) = (lo.min(hi), lo.max(hi));
    let mut sa = det_n(op, a).re_sign();
    let sb = det_n(op, b).re_sign();
    if sa == 0 {
        return Ok(a);
    }
    if sb == 0 {
        return Ok(b);
    }
    if sa == sb {
        return Err(Error::NoSignChange { lo: a.to_f64_lossy(), hi: b.to_f64_lossy() });
    }
    let tol = bisection_tol::<T>();
    let two = T::lit(2.0);
    for _ in 0..200 {
        let m = (a + b) / two;
        if b - a <= tol * m.abs().max(T::one()) || m == a || m == b {
            break;
        }
        let sm = det_n(op, m).re_sign();
        if sm == 0 {
            return Ok(m);
        }
        if sm == sa {
            a = m;
            sa = sm;
        } else {
            b = m;
        }
    }
    Ok((a + b) / two)
}

/// Real eigenvalues in `[e_min, e_max]`: scan `Re D` with step `scan_step`, then bisect.
pub fn find_real_eigenvalues<T: Real>(op: &TridiagonalOperator<T>, e_min: T, e_max: T, scan_step: T) -> Result<Vec<T>> {
    if !(e_max > e_min) || !(scan_step > T::zero()) {
        return domain(format!("bad scan window [{e_min}, {e_max}] with step {scan_step}"));
    }
    let steps = ((e_max - e_min) / scan_step).ceil().to_usize().unwrap_or(0).max(1);
    let width = (e_max - e_min) / T::from_usize(steps).unwrap();
    let at = |i: usize| if i == steps { e_max } else { e_min + width * T::from_usize(i).unwrap() };
    let mut roots = Vec::new();
    let mut a = at(0);
    let mut sa = det_n(op, a).re_sign();
    if sa == 0 {
        roots.push(a);
    }
    for i in 1..=steps {
        let b = at(i);
        let sb = det_n(op, b).re_sign();
        if sb == 0 {
            roots.push(b);
        } else if sa != 0 && sa != sb {
            roots.push(bisect_root(op, a, b)?);
        }
        a = b;
        sa = sb;
    }
    Ok(roots)
}

/// Extrapolates `E(h)` to `h = 0` assuming `E = E0 + c2 h^2 + c4 h^4`.
pub fn richardson<T: Real>(hs: [T; 3], es: [T; 3]) -> T {
    let t = hs.map(|h| h * h);
    (0..3)
        .map(|i| {
            let w = (0..3)
                .filter(|&j| j != i)
                .fold(T::one(), |acc, j| acc * t[j] / (t[j] - t[i]));
            w * es[i]
        })
        .fold(T::zero(), |a, b| a + b)
}

/// A real eigenvalue that survives grid refinement with second-order convergence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfirmedLevel<T> {
    /// Value on the finest grid.
    pub energy: T,
    /// `h^2` extrapolation from the two finest grids.
    pub extrapolated: T,
    pub est_error: T,
    /// Observed order `log2((E_h - E_{h/2}) / (E_{h/2} - E_{h/4}))`, `NaN` when already converged.
    pub order: T,
}

fn nearest<T: Real>(xs: &[T], x: T) -> Option<T> {
    xs.iter().copied().min_by(|a, b| (*a - x).abs().partial_cmp(&(*b - x).abs()).unwrap())
}

/// Real eigenvalues present on `grid`, `grid.refined()` and its refinement, whose differences
/// contract and stay below `3e-3` relative, and that do not move when the box grows by a quarter.
///
/// Lattice and box artefacts of a non-decaying discretisation are dropped.
pub fn confirmed_real_eigenvalues<T: Real>(
    p: &PotentialParams<T>,
    grid: GridSpec<T>,
    e_min: T,
    e_max: T,
    scan_step: T,
) -> Result<Vec<ConfirmedLevel<T>>> {
    let grids = [grid, grid.refined(), grid.refined().refined()];
    let mut roots = Vec::with_capacity(3);
    for g in grids {
        let op = build_hamiltonian(p, g)?;
        roots.push(find_real_eigenvalues(&op, e_min, e_max, scan_step)?);
    }
    let wide = {
        let n = (grid.n() + 1) * 5 / 4 - 1;
        let g = GridSpec::new(grid.h() * T::lit((n + 1) as f64) / T::lit(2.0), n, grid.y())?;
        find_real_eigenvalues(&build_hamiltonian(p, g)?, e_min, e_max, scan_step)?
    };
    let converged = T::lit(1e-9);
    let box_tol = T::lit(1e-6);
    let mut out = Vec::new();
    for &e2 in &roots[2] {
        let (Some(e1), Some(e0)) = (nearest(&roots[1], e2), nearest(&roots[0], e2)) else {
            continue;
        };
        let scale = T::one() + e2.abs();
        let fine = e1 - e2;
        let coarse = e0 - e1;
        if fine.abs() > T::lit(3e-3) * scale {
            continue;
        }
        match nearest(&wide, e0) {
            Some(w) if (w - e0).abs() <= box_tol * scale => {}
            _ => continue,
        }
        let order = if fine.abs() <= converged * scale && coarse.abs() <= converged * scale {
            T::nan()
        } else {
            let ratio = coarse / fine;
            if !(ratio > T::one()) {
                continue;
            }
            ratio.log2()
        };
        out.push(ConfirmedLevel {
            energy: e2,
            extrapolated: e2 - fine / T::lit(3.0),
            est_error: fine.abs() / T::lit(3.0),
            order,
        });
    }
    Ok(out)
}

/// The `alpha` in `[lo, hi]` at which `E` is an eigenvalue of the family, found by bisection on `Re D`.
pub fn solve_alpha_for_energy<T: Real>(
    beta: T,
    family: FamilySelector,
    policy: &GridPolicy<T>,
    e: T,
    lo: T,
    hi: T,
) -> Result<T> {
    let sign_at = |alpha: T| -> Result<i8> {
        let p = PotentialParams::new(alpha, beta)?;
        let op = build_hamiltonian(&p, policy.resolve(&p, family)?)?;
        Ok(det_n(&op, e).re_sign())
    };
    let (mut a, mut b) = (lo.min(hi), lo.max(hi));
    let mut sa = sign_at(a)?;
    let sb = sign_at(b)?;
    if sa == 0 {
        return Ok(a);
    }
    if sb == 0 {
        return Ok(b);
    }
    if sa == sb {
        return Err(Error::NoSignChange { lo: a.to_f64_lossy(), hi: b.to_f64_lossy() });
    }
    let tol = bisection_tol::<T>();
    let two = T::lit(2.0);
    while b - a > tol * a.abs().max(T::one()) {
        let m = (a + b) / two;
        if m == a || m == b {
            break;
        }
        let sm = sign_at(m)?;
        if sm == 0 {
            return Ok(m);
        }
        if sm == sa {
            a = m;
            sa = sm;
        } else {
            b = m;
        }
    }
    Ok((a + b) / two)
}
