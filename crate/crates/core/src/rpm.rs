//! Riccati–Padé method: Hankel determinants built from the Taylor coefficients of the
//! logarithmic derivative of the wavefunction.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{domain, Error, Result};
use crate::potential::PotentialParams;
use crate::scalar::{FieldScalar, Real};

/// Exact Taylor terms generated by the transforms.
pub const DEFAULT_TERMS: usize = 96;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symmetry {
    /// Even potential: one Hankel determinant in `E`.
    Symmetric,
    /// Two Hankel determinants in `(E, f0)`.
    Nonsymmetric,
}

/// Change of variable that produced the series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transform {
    /// `x = i q`: potential `(-sin q)^alpha cos^beta q`.
    Iq,
    /// `x = i (u + pi/2)`: potential `(-cos u)^alpha`.
    U,
    /// Series supplied directly.
    Direct,
}

/// Power series of the (transformed) potential and the map from `E` to the Riccati parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct RpmProblem {
    kind: Symmetry,
    transform: Transform,
    series: Vec<BigRational>,
    energy_sign: i8,
    shift: usize,
    s: u32,
}

impl RpmProblem {
    /// `series[j]` is the coefficient of `q^j`; the Riccati parameter is `energy_sign * E`.
    pub fn from_series(kind: Symmetry, series: Vec<BigRational>, energy_sign: i8) -> Result<Self> {
        if energy_sign != 1 && energy_sign != -1 {
            return domain("energy_sign must be +1 or -1");
        }
        if series.is_empty() {
            return domain("empty potential series");
        }
        if kind == Symmetry::Symmetric && series.iter().skip(1).step_by(2).any(|c| !c.is_zero()) {
            return domain("symmetric problem needs an even potential series");
        }
        let shift = match kind {
            Symmetry::Symmetric => 1,
            Symmetry::Nonsymmetric => 0,
        };
        Ok(Self { kind, transform: Transform::Direct, series, energy_sign, shift, s: 0 })
    }

    /// Offset `d` of the Hankel entries `c_{i+j+d}`.
    pub fn with_shift(mut self, d: usize) -> Self {
        self.shift = d;
        self
    }

    /// Regularisation exponent `s` of the symmetric ansatz (`s = 0` for even states).
    pub fn with_s(mut self, s: u32) -> Self {
        self.s = s;
        self
    }

    pub fn kind(&self) -> Symmetry {
        self.kind
    }

    pub fn transform(&self) -> Transform {
        self.transform
    }

    pub fn series(&self) -> &[BigRational] {
        &self.series
    }

    pub fn shift(&self) -> usize {
        self.shift
    }

    /// Taylor coefficients `f_k` needed for Hankel dimension `dim`.
    pub fn coefficients_needed(&self, dim: usize) -> usize {
        let top = 2 * dim - 2 + self.shift;
        match self.kind {
            Symmetry::Symmetric => top + 1,
            Symmetry::Nonsymmetric => 2 * top + 2,
        }
    }

    fn check_order(&self, count: usize) -> Result<()> {
        let needed = match self.kind {
            Symmetry::Symmetric => 2 * count.saturating_sub(1) + 1,
            Symmetry::Nonsymmetric => count.saturating_sub(1),
        };
        if needed > self.series.len() {
            return domain(format!(
                "series order overflow: {needed} potential terms needed, {} available",
                self.series.len()
            ));
        }
        Ok(())
    }
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn factorial(k: usize) -> BigInt {
    (1..=k).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

/// Taylor coefficients of `sin q` up to `q^{terms-1}`.
pub fn sin_series(terms: usize) -> Vec<BigRational> {
    (0..terms)
        .map(|k| match k % 4 {
            1 => BigRational::from_integer(1.into()) / BigRational::from_integer(factorial(k)),
            3 => -BigRational::from_integer(1.into()) / BigRational::from_integer(factorial(k)),
            _ => BigRational::zero(),
        })
        .collect()
}

/// Taylor coefficients of `cos q` up to `q^{terms-1}`.
pub fn cos_series(terms: usize) -> Vec<BigRational> {
    (0..terms)
        .map(|k| match k % 4 {
            0 => BigRational::from_integer(1.into()) / BigRational::from_integer(factorial(k)),
            2 => -BigRational::from_integer(1.into()) / BigRational::from_integer(factorial(k)),
            _ => BigRational::zero(),
        })
        .collect()
}

fn mul_trunc(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let n = a.len().min(b.len());
    (0..n)
        .map(|k| (0..=k).fold(BigRational::zero(), |acc, i| acc + &a[i] * &b[k - i]))
        .collect()
}

fn pow_trunc(a: &[BigRational], e: u32) -> Vec<BigRational> {
    let mut out = vec![BigRational::zero(); a.len()];
    if !out.is_empty() {
        out[0] = BigRational::one();
    }
    (0..e).fold(out, |acc, _| mul_trunc(&acc, a))
}

fn integer_exponent<T: Real>(x: T, name: &str) -> Result<u32> {
    let r = x.round();
    if x != r || x < T::zero() || x > T::lit(64.0) {
        return domain(format!("{name} = {x} must be a small non-negative integer for the RPM"));
    }
    Ok(r.to_u32().unwrap())
}

/// Problem for `x = i q`; symmetric exactly when `alpha` is even.
pub fn transform_iq<T: Real>(p: &PotentialParams<T>) -> Result<RpmProblem> {
    let a = integer_exponent(p.alpha(), "alpha")?;
    let b = integer_exponent(p.beta(), "beta")?;
    let neg_sin: Vec<_> = sin_series(DEFAULT_TERMS).into_iter().map(|c| -c).collect();
    let series = mul_trunc(&pow_trunc(&neg_sin, a), &pow_trunc(&cos_series(DEFAULT_TERMS), b));
    let kind = if a % 2 == 0 { Symmetry::Symmetric } else { Symmetry::Nonsymmetric };
    let mut prob = RpmProblem::from_series(kind, series, -1)?;
    prob.transform = Transform::Iq;
    Ok(prob)
}

/// Problem for `x = i (u + pi/2)`, available for `beta = 0`.
pub fn transform_u<T: Real>(p: &PotentialParams<T>) -> Result<RpmProblem> {
    let a = integer_exponent(p.alpha(), "alpha")?;
    if p.beta() != T::zero() {
        return domain("the u transform needs beta = 0");
    }
    let neg_cos: Vec<_> = cos_series(DEFAULT_TERMS).into_iter().map(|c| -c).collect();
    let mut prob = RpmProblem::from_series(Symmetry::Symmetric, pow_trunc(&neg_cos, a), -1)?;
    prob.transform = Transform::U;
    Ok(prob)
}

/// `V(q) = q^2` with `E` entering directly; even states sit at `E = 1, 5, 9, ...`.
pub fn harmonic_oscillator() -> RpmProblem {
    let mut series = vec![BigRational::zero(); DEFAULT_TERMS];
    series[2] = rat(1, 1);
    RpmProblem::from_series(Symmetry::Symmetric, series, 1).expect("even series")
}

/// First `count` Taylor coefficients of the Riccati function at energy `e`.
///
/// Symmetric: `f = sum f_j q^{2j+1}`. Nonsymmetric: `f = sum f_j q^j` with `f_0` given.
pub fn riccati_coefficients<F: FieldScalar>(problem: &RpmProblem, e: &F, f0: Option<&F>, count: usize) -> Result<Vec<F>> {
    problem.check_order(count)?;
    let eps = if problem.energy_sign > 0 { e.clone() } else { -e.clone() };
    let v = |k: usize| F::from_rational(&problem.series[k]);
    let mut f: Vec<F> = Vec::with_capacity(count);
    match problem.kind {
        Symmetry::Symmetric => {
            for n in 0..count {
                let mut rhs = v(2 * n);
                if n == 0 {
                    rhs = rhs - eps.clone();
                }
                for k in 0..n {
                    rhs = rhs - f[k].clone() * f[n - 1 - k].clone();
                }
                let w = F::from_u64((2 * n + 1 + 2 * problem.s as usize) as u64).unwrap();
                f.push(rhs / w);
            }
        }
        Symmetry::Nonsymmetric => {
            let Some(f0) = f0 else {
                return domain("nonsymmetric problem needs f0");
            };
            if count == 0 {
                return Ok(f);
            }
            f.push(f0.clone());
            for n in 0..count - 1 {
                let mut rhs = F::zero() - v(n);
                if n == 0 {
                    rhs = rhs + eps.clone();
                }
                for k in 0..=n {
                    rhs = rhs + f[k].clone() * f[n - k].clone();
                }
                f.push(rhs / F::from_u64((n + 1) as u64).unwrap());
            }
        }
    }
    Ok(f)
}

/// Determinant by fraction-free elimination with row pivoting.
pub fn bareiss_det<F: FieldScalar>(mut m: Vec<Vec<F>>) -> F {
    let n = m.len();
    if n == 0 {
        return F::one();
    }
    let mut negate = false;
    let mut prev = F::one();
    for k in 0..n - 1 {
        let p = (k..n)
            .max_by(|&a, &b| m[a][k].abs().partial_cmp(&m[b][k].abs()).unwrap())
            .unwrap();
        if m[p][k].is_zero() {
            return F::zero();
        }
        if p != k {
            m.swap(p, k);
            negate = !negate;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (m[i][j].clone() * m[k][k].clone() - m[i][k].clone() * m[k][j].clone()) / prev.clone();
                m[i][j] = v;
            }
        }
        prev = m[k][k].clone();
    }
    let d = m[n - 1][n - 1].clone();
    if negate {
        -d
    } else {
        d
    }
}

/// `det [c_{i+j+d}]_{i,j<dim}`.
pub fn hankel_det<F: FieldScalar>(c: &[F], dim: usize, d: usize) -> F {
    let m = (0..dim).map(|i| (0..dim).map(|j| c[i + j + d].clone()).collect()).collect();
    bareiss_det(m)
}

/// Value of the symmetric determinant `H_D(E)`.
pub fn hankel_symmetric<F: FieldScalar>(problem: &RpmProblem, e: &F, dim: usize) -> Result<F> {
    if problem.kind != Symmetry::Symmetric {
        return domain("problem is not symmetric");
    }
    let f = riccati_coefficients(problem, e, None, problem.coefficients_needed(dim))?;
    Ok(hankel_det(&f, dim, problem.shift))
}

/// Odd- and even-power determinants `(H_odd, H_even)` of the nonsymmetric problem.
pub fn hankel_pair<F: FieldScalar>(problem: &RpmProblem, e: &F, f0: &F, dim: usize) -> Result<(F, F)> {
    if problem.kind != Symmetry::Nonsymmetric {
        return domain("problem is not nonsymmetric");
    }
    let f = riccati_coefficients(problem, e, Some(f0), problem.coefficients_needed(dim))?;
    let odd: Vec<F> = f.iter().skip(1).step_by(2).cloned().collect();
    let even: Vec<F> = f.iter().step_by(2).cloned().collect();
    Ok((hankel_det(&odd, dim, problem.shift), hankel_det(&even, dim, problem.shift)))
}

/// Starting point of a root search.
#[derive(Debug, Clone, PartialEq)]
pub struct Seed<F> {
    pub energy: F,
    /// `f(0)`, required for nonsymmetric problems.
    pub log_derivative: Option<F>,
}

impl<F: FieldScalar> Seed<F> {
    pub fn energy(e: F) -> Self {
        Self { energy: e, log_derivative: None }
    }

    pub fn pair(e: F, f0: F) -> Self {
        Self { energy: e, log_derivative: Some(f0) }
    }

    pub fn from_f64(e: f64, f0: Option<f64>) -> Self {
        Self { energy: F::from_f64_lossy(e), log_derivative: f0.map(F::from_f64_lossy) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RpmResult<F> {
    pub dim: usize,
    pub energy: F,
    /// `f(0) = -i psi'(0) / psi(0)` for the nonsymmetric problem.
    pub log_derivative: Option<F>,
    /// Leading digits shared with the previous dimension.
    pub converged_digits: Option<u32>,
}

fn tolerance<F: FieldScalar>() -> F {
    let digits = F::DIGITS.unwrap_or(40).saturating_sub(6).max(10) as i32;
    F::from_rational(&BigRational::new(1.into(), num_traits::pow(BigInt::from(10), digits as usize)))
}

fn two<F: FieldScalar>() -> F {
    F::one() + F::one()
}

fn scale_of<F: FieldScalar>(x: &F) -> F {
    x.abs().max_ref(F::one())
}

trait MaxRef: Sized {
    fn max_ref(self, other: Self) -> Self;
}

impl<F: PartialOrd> MaxRef for F {
    fn max_ref(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }
}

fn sign<F: FieldScalar>(x: &F) -> i8 {
    if x.is_positive() {
        1
    } else if x.is_negative() {
        -1
    } else {
        0
    }
}

/// Illinois regula falsi on a sign change `[a, b]`.
fn illinois<F: FieldScalar>(g: &mut dyn FnMut(&F) -> Result<F>, a: F, b: F, fa: F, fb: F) -> Result<F> {
    let tol = tolerance::<F>();
    let (mut a, mut b, mut fa, mut fb) = (a, b, fa, fb);
    let mut side = 0i8;
    for _ in 0..400 {
        let width = (b.clone() - a.clone()).abs();
        if width <= tol.clone() * scale_of(&b) {
            break;
        }
        let mut c = (a.clone() * fb.clone() - b.clone() * fa.clone()) / (fb.clone() - fa.clone());
        if !(c > a.clone().min_ref(b.clone()) && c < a.clone().max_ref(b.clone())) {
            c = (a.clone() + b.clone()) / two();
        }
        let fc = g(&c)?;
        if fc.is_zero() {
            return Ok(c);
        }
        if sign(&fc) == sign(&fb) {
            b = c;
            fb = fc;
            if side == -1 {
                fa = fa / two();
            }
            side = -1;
        } else {
            a = b;
            fa = fb;
            b = c;
            fb = fc;
            if side == 1 {
                fa = fa / two();
            }
            side = 1;
        }
    }
    Ok(b)
}

trait MinRef: Sized {
    fn min_ref(self, other: Self) -> Self;
}

impl<F: PartialOrd> MinRef for F {
    fn min_ref(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }
}

fn abs_lt<F: FieldScalar>(a: &F, b: &F) -> bool {
    a.abs() < b.abs()
}

/// Golden-section descent on `|g|` over `[a, b]`, stopping at the first sign opposite to `s`.
fn probe_minimum<F: FieldScalar>(g: &mut dyn FnMut(&F) -> Result<F>, a: F, b: F, s: i8) -> Result<Option<F>> {
    let ratio = F::from_f64_lossy(0.381_966_011_250_105_1);
    let (mut a, mut b) = (a, b);
    let mut c = a.clone() + (b.clone() - a.clone()) * ratio.clone();
    let mut d = b.clone() - (b.clone() - a.clone()) * ratio.clone();
    let (mut gc, mut gd) = (g(&c)?, g(&d)?);
    for _ in 0..60 {
        if sign(&gc) == -s {
            return Ok(Some(c));
        }
        if sign(&gd) == -s {
            return Ok(Some(d));
        }
        if abs_lt(&gc, &gd) {
            b = d;
            d = c;
            gd = gc;
            c = a.clone() + (b.clone() - a.clone()) * ratio.clone();
            gc = g(&c)?;
        } else {
            a = c;
            c = d;
            gc = gd;
            d = b.clone() - (b.clone() - a.clone()) * ratio.clone();
            gd = g(&d)?;
        }
    }
    Ok(None)
}

/// Root of `g` nearest `center`, scanning windows `center ± w` with `w` growing fourfold.
///
/// With `probe`, local minima of `|g|` between samples are searched for a hidden pair of roots.
pub fn nearest_root<F: FieldScalar>(
    g: &mut dyn FnMut(&F) -> Result<F>,
    center: &F,
    w0: F,
    w_max: F,
    probe: bool,
) -> Result<Option<F>> {
    const SAMPLES: u64 = 40;
    let mut w = w0;
    let four = two::<F>() * two::<F>();
    while w <= w_max {
        let step = (w.clone() * two()) / F::from_u64(SAMPLES).unwrap();
        let xs: Vec<F> = (0..=SAMPLES)
            .map(|k| center.clone() - w.clone() + step.clone() * F::from_u64(k).unwrap())
            .collect();
        let mut vals = Vec::with_capacity(xs.len());
        for x in &xs {
            vals.push(g(x)?);
        }
        let mut roots = Vec::new();
        for k in 0..xs.len() - 1 {
            if vals[k].is_zero() {
                roots.push(xs[k].clone());
            } else if sign(&vals[k]) * sign(&vals[k + 1]) < 0 {
                roots.push(illinois(g, xs[k].clone(), xs[k + 1].clone(), vals[k].clone(), vals[k + 1].clone())?);
            }
        }
        if probe {
            for k in 1..xs.len() - 1 {
                let s = sign(&vals[k]);
                let dip = s != 0
                    && sign(&vals[k - 1]) == s
                    && sign(&vals[k + 1]) == s
                    && abs_lt(&vals[k], &vals[k - 1])
                    && abs_lt(&vals[k], &vals[k + 1]);
                if !dip {
                    continue;
                }
                if let Some(m) = probe_minimum(g, xs[k - 1].clone(), xs[k + 1].clone(), s)? {
                    let gm = g(&m)?;
                    roots.push(illinois(g, xs[k - 1].clone(), m.clone(), vals[k - 1].clone(), gm.clone())?);
                    roots.push(illinois(g, m, xs[k + 1].clone(), gm, vals[k + 1].clone())?);
                }
            }
        }
        if let Some(r) = roots
            .into_iter()
            .min_by(|a, b| (a.clone() - center.clone()).abs().partial_cmp(&(b.clone() - center.clone()).abs()).unwrap())
        {
            return Ok(Some(r));
        }
        w = w * four.clone();
    }
    Ok(None)
}

fn initial_width<F: FieldScalar>(x: &F) -> F {
    scale_of(x) * F::from_f64_lossy(1e-12)
}

fn max_width<F: FieldScalar>(x: &F) -> F {
    scale_of(x) * F::from_f64_lossy(0.5)
}

/// 2D Newton on `(H_odd, H_even) = 0` with a finite-difference Jacobian.
fn newton_pair<F: FieldScalar>(problem: &RpmProblem, dim: usize, e: F, f0: F) -> Result<Option<(F, F)>> {
    let tol = tolerance::<F>();
    let h_rel = {
        let digits = F::DIGITS.unwrap_or(40) as usize / 2;
        F::from_rational(&BigRational::new(1.into(), num_traits::pow(BigInt::from(10), digits)))
    };
    let (mut e, mut f0) = (e, f0);
    for _ in 0..100 {
        let (p, q) = hankel_pair(problem, &e, &f0, dim)?;
        let de = h_rel.clone() * scale_of(&e);
        let df = h_rel.clone() * scale_of(&f0);
        let (pe, qe) = hankel_pair(problem, &(e.clone() + de.clone()), &f0, dim)?;
        let (pf, qf) = hankel_pair(problem, &e, &(f0.clone() + df.clone()), dim)?;
        let (a, b) = ((pe - p.clone()) / de.clone(), (pf - p.clone()) / df.clone());
        let (c, d) = ((qe - q.clone()) / de, (qf - q.clone()) / df);
        let det = a.clone() * d.clone() - b.clone() * c.clone();
        if det.is_zero() {
            return Err(Error::SingularJacobian);
        }
        let mut se = (d * p.clone() - b * q.clone()) / det.clone();
        let mut sf = (a * q - c * p) / det;
        // damping: keep each step within half the scale of the unknown
        let cap_e = scale_of(&e) / two();
        let cap_f = scale_of(&f0) / two();
        while se.abs() > cap_e || sf.abs() > cap_f {
            se = se / two();
            sf = sf / two();
        }
        e = e - se.clone();
        f0 = f0 - sf.clone();
        if se.abs() <= tol.clone() * scale_of(&e) && sf.abs() <= tol.clone() * scale_of(&f0) {
            return Ok(Some((e, f0)));
        }
    }
    Ok(None)
}

fn distance<F: FieldScalar>(a: &(F, F), seed: &(F, F)) -> f64 {
    let de = ((a.0.clone() - seed.0.clone()) / scale_of(&seed.0)).abs().to_f64_lossy();
    let df = ((a.1.clone() - seed.1.clone()) / scale_of(&seed.1)).abs().to_f64_lossy();
    de + df
}

/// Root of the Hankel determinant(s) of dimension `dim` closest to `seed`.
pub fn hankel_root<F: FieldScalar>(problem: &RpmProblem, dim: usize, seed: &Seed<F>) -> Result<RpmResult<F>> {
    if dim < 1 {
        return domain("hankel dimension must be at least 1");
    }
    match problem.kind {
        Symmetry::Symmetric => {
            let mut g = |e: &F| hankel_symmetric(problem, e, dim);
            let c = seed.energy.clone();
            let root = nearest_root(&mut g, &c, initial_width(&c), max_width(&c), true)?
                .ok_or_else(|| Error::NoConvergence(format!("no root of H_{dim} near {c}")))?;
            Ok(RpmResult { dim, energy: root, log_derivative: None, converged_digits: None })
        }
        Symmetry::Nonsymmetric => {
            let Some(f_seed) = seed.log_derivative.clone() else {
                return domain("nonsymmetric seed needs f0");
            };
            let e_seed = seed.energy.clone();
            let target = (e_seed.clone(), f_seed.clone());
            let mut candidates = Vec::new();
            if let Ok(Some(r)) = newton_pair(problem, dim, e_seed.clone(), f_seed.clone()) {
                candidates.push(r);
            }
            if let Some(r) = reduced_root(problem, dim, &e_seed, &f_seed)? {
                candidates.push(r);
            }
            let best = candidates
                .into_iter()
                .filter(|r| distance(r, &target) < 0.5)
                .min_by(|a, b| distance(a, &target).partial_cmp(&distance(b, &target)).unwrap())
                .ok_or_else(|| Error::NoConvergence(format!("no root of the D = {dim} pair near the seed")))?;
            Ok(RpmResult { dim, energy: best.0, log_derivative: Some(best.1), converged_digits: None })
        }
    }
}

/// Secant iteration for `H_odd(e, f) = 0` in `f` from `start`.
fn secant_f0<F: FieldScalar>(problem: &RpmProblem, dim: usize, e: &F, start: &F) -> Result<Option<F>> {
    let tol = tolerance::<F>();
    let mut a = start.clone();
    let mut b = start.clone() + scale_of(start) * F::from_f64_lossy(1e-9);
    let mut ga = hankel_pair(problem, e, &a, dim)?.0;
    let mut gb = hankel_pair(problem, e, &b, dim)?.0;
    for _ in 0..60 {
        if gb == ga {
            return Ok(None);
        }
        let c = b.clone() - gb.clone() * (b.clone() - a.clone()) / (gb.clone() - ga.clone());
        if (c.clone() - start.clone()).abs() > scale_of(start) * F::from_f64_lossy(1e-3) {
            return Ok(None);
        }
        let done = (c.clone() - b.clone()).abs() <= tol.clone() * scale_of(&c);
        a = b;
        ga = gb;
        b = c;
        gb = hankel_pair(problem, e, &b, dim)?.0;
        if done || gb.is_zero() {
            return Ok(Some(b));
        }
    }
    Ok(None)
}

/// Eliminates `f0` through the nearest root of `H_odd`, then solves `H_even` in `E`; polished by Newton.
fn reduced_root<F: FieldScalar>(problem: &RpmProblem, dim: usize, e_seed: &F, f_seed: &F) -> Result<Option<(F, F)>> {
    let f_star = |e: &F, warm: &mut Option<F>| -> Result<Option<F>> {
        if let Some(w) = warm.clone() {
            if let Some(f) = secant_f0(problem, dim, e, &w)? {
                *warm = Some(f.clone());
                return Ok(Some(f));
            }
        }
        let mut h = |f: &F| hankel_pair(problem, e, f, dim).map(|p| p.0);
        let f = nearest_root(&mut h, f_seed, initial_width(f_seed), max_width(f_seed) * two(), false)?;
        *warm = f.clone();
        Ok(f)
    };
    let mut warm = None;
    let mut failed = false;
    let mut g = |e: &F| -> Result<F> {
        match f_star(e, &mut warm)? {
            Some(f) => Ok(hankel_pair(problem, e, &f, dim)?.1),
            None => {
                failed = true;
                Ok(F::zero())
            }
        }
    };
    let root = nearest_root(&mut g, e_seed, initial_width(e_seed) * F::from_u64(1000).unwrap(), max_width(e_seed), false)?;
    if failed {
        return Ok(None);
    }
    let Some(e) = root else { return Ok(None) };
    let mut cold = None;
    let Some(f) = f_star(&e, &mut cold)? else { return Ok(None) };
    Ok(newton_pair(problem, dim, e.clone(), f.clone())?.or(Some((e, f))))
}

/// Leading decimal digits shared by `a` and `b`.
pub fn shared_digits<F: FieldScalar>(a: &F, b: &F) -> u32 {
    let diff = (a.clone() - b.clone()).abs();
    if diff.is_zero() {
        return F::DIGITS.unwrap_or(99);
    }
    let rel = (diff / scale_of(a)).to_f64_lossy();
    if rel >= 1.0 || rel.is_nan() {
        return 0;
    }
    if rel == 0.0 {
        return F::DIGITS.unwrap_or(99);
    }
    (-rel.log10()).floor().max(0.0) as u32
}

/// A row of a convergence table; `result` is `None` where the search failed.
#[derive(Debug, Clone, PartialEq)]
pub struct TableRow<F> {
    pub dim: usize,
    pub result: Option<RpmResult<F>>,
}

/// Where each dimension's root search starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedStrategy {
    /// Always the given seed.
    Fixed,
    /// The previous dimension's root once one has converged.
    Chained,
}

/// Roots for `dims`; digits are counted against the previous converged row.
pub fn convergence_table<F: FieldScalar>(
    problem: &RpmProblem,
    dims: std::ops::RangeInclusive<usize>,
    seed: &Seed<F>,
    strategy: SeedStrategy,
) -> Vec<TableRow<F>> {
    let mut rows: Vec<TableRow<F>> = Vec::new();
    let mut prev: Option<F> = None;
    let mut current = seed.clone();
    for dim in dims {
        let result = hankel_root(problem, dim, &current).ok().map(|mut r| {
            r.converged_digits = prev.as_ref().map(|p| shared_digits(&r.energy, p));
            r
        });
        if let Some(r) = &result {
            prev = Some(r.energy.clone());
            if strategy == SeedStrategy::Chained {
                current = Seed { energy: r.energy.clone(), log_derivative: r.log_derivative.clone() };
            }
        }
        rows.push(TableRow { dim, result });
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mp::Mp;

    type M = Mp<256>;

    #[test]
    fn series_of_sin_squared() {
        let p = PotentialParams::new(2.0, 0.0).unwrap();
        let prob = transform_iq(&p).unwrap();
        assert_eq!(prob.kind(), Symmetry::Symmetric);
        // sin^2 q = q^2 - q^4/3 + 2 q^6/45
        assert_eq!(prob.series()[2], rat(1, 1));
        assert_eq!(prob.series()[4], rat(-1, 3));
        assert_eq!(prob.series()[6], rat(2, 45));
    }

    #[test]
    fn transforms_validate() {
        assert!(transform_iq(&PotentialParams::new(1.5, 0.0).unwrap()).is_err());
        assert!(transform_u(&PotentialParams::new(1.0, 1.0).unwrap()).is_err());
        let odd = transform_iq(&PotentialParams::new(3.0, 0.0).unwrap()).unwrap();
        assert_eq!(odd.kind(), Symmetry::Nonsymmetric);
        assert_eq!(odd.series()[3], rat(-1, 1));
        let u = transform_u(&PotentialParams::new(1.0, 0.0).unwrap()).unwrap();
        assert_eq!(u.series()[0], rat(-1, 1));
        assert_eq!(u.series()[2], rat(1, 2));
        let bad = RpmProblem::from_series(Symmetry::Symmetric, vec![rat(0, 1), rat(1, 1)], 1);
        assert!(bad.is_err());
    }

    #[test]
    fn order_overflow_is_reported() {
        let prob = harmonic_oscillator();
        let r = riccati_coefficients::<f64>(&prob, &1.0, None, 200);
        assert!(matches!(r, Err(Error::Domain(m)) if m.contains("overflow")));
    }

    #[test]
    fn oscillator_coefficients() {
        // at E = 1 the exact f = -q, so every higher coefficient vanishes
        let prob = harmonic_oscillator();
        let f = riccati_coefficients::<BigRational>(&prob, &rat(1, 1), None, 4).unwrap();
        assert_eq!(f[0], rat(-1, 1));
        assert!(f[1..].iter().all(|c| c.is_zero()));
    }

    #[test]
    fn bareiss_matches_cofactor() {
        let m = vec![vec![rat(2, 1), rat(1, 3), rat(0, 1)], vec![rat(1, 3), rat(0, 1), rat(5, 1)], vec![rat(0, 1), rat(5, 1), rat(1, 7)]];
        // 2 (0 - 25) - 1/3 (1/21 - 0) = -50 - 1/63
        assert_eq!(bareiss_det(m), rat(-3151, 63));
    }

    #[test]
    fn oscillator_roots() {
        // E = 1 + 4k is a root of multiplicity D - k; pick dimensions where it is odd
        let prob = harmonic_oscillator();
        for (dim, want) in [(3, 1.0), (5, 1.0), (4, 5.0), (6, 5.0), (3, 9.0), (5, 9.0)] {
            let r = hankel_root::<M>(&prob, dim, &Seed::from_f64(want + 0.3, None)).unwrap();
            assert!((r.energy.to_f64_lossy() - want).abs() < 1e-12, "{dim} {want}");
        }
    }

    #[test]
    fn shared_digit_count() {
        assert_eq!(shared_digits(&1.2114, &1.2113), 4);
        assert_eq!(shared_digits(&1.0, &1.0), 15);
        assert_eq!(shared_digits(&1.0, &3.0), 0);
    }
}
