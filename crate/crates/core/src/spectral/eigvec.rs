use num_complex::Complex;

use crate::discretization::{GridSpec, TridiagonalOperator};
use crate::error::{Error, Result};
use crate::scalar::Real;

const MAX_ITER: usize = 50;

/// Eigenvector on the grid, normalised to `sum |psi|^2 h = 1` and phased to be PT-symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction<T> {
    pub grid: GridSpec<T>,
    pub energy: T,
    pub values: Vec<Complex<T>>,
}

/// Banded LU with partial pivoting for `(H - shift) x = r`.
struct Factor<T> {
    d: Vec<Complex<T>>,
    du: Vec<Complex<T>>,
    du2: Vec<Complex<T>>,
    dl: Vec<Complex<T>>,
    swapped: Vec<bool>,
}

impl<T: Real> Factor<T> {
    fn new(op: &TridiagonalOperator<T>, shift: T) -> Self {
        let n = op.n();
        let b = Complex::new(op.off(), T::zero());
        let zero = Complex::new(T::zero(), T::zero());
        let mut d: Vec<_> = op.diag().iter().map(|&a| a - shift).collect();
        let mut du = vec![b; n - 1];
        let mut dl = vec![b; n - 1];
        let mut du2 = vec![zero; n.saturating_sub(2)];
        let mut swapped = vec![false; n - 1];
        let tiny = T::epsilon() * op.off().abs();
        for i in 0..n - 1 {
            if d[i].norm() >= dl[i].norm() {
                if d[i] == zero {
                    d[i] = Complex::new(tiny, T::zero());
                }
                let f = dl[i] / d[i];
                dl[i] = f;
                d[i + 1] = d[i + 1] - f * du[i];
            } else {
                let f = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = f;
                let t = du[i];
                du[i] = d[i + 1];
                d[i + 1] = t - f * d[i + 1];
                if i + 1 < n - 1 {
                    du2[i] = du[i + 1];
                    du[i + 1] = -f * du[i + 1];
                }
                swapped[i] = true;
            }
        }
        if d[n - 1] == zero {
            d[n - 1] = Complex::new(tiny, T::zero());
        }
        Self { d, du, du2, dl, swapped }
    }

    fn solve(&self, r: &mut [Complex<T>]) {
        let n = r.len();
        for i in 0..n - 1 {
            if self.swapped[i] {
                r.swap(i, i + 1);
            }
            r[i + 1] = r[i + 1] - self.dl[i] * r[i];
        }
        r[n - 1] = r[n - 1] / self.d[n - 1];
        if n > 1 {
            r[n - 2] = (r[n - 2] - self.du[n - 2] * r[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            r[i] = (r[i] - self.du[i] * r[i + 1] - self.du2[i] * r[i + 2]) / self.d[i];
        }
    }
}

fn norm2<T: Real>(v: &[Complex<T>]) -> T {
    v.iter().map(|z| z.norm_sqr()).fold(T::zero(), |a, b| a + b).sqrt()
}

fn scale<T: Real>(v: &mut [Complex<T>], s: Complex<T>) {
    v.iter_mut().for_each(|z| *z = *z * s);
}

/// Inverse iteration at the (real) eigenvalue `e`.
pub fn eigenvector<T: Real>(op: &TridiagonalOperator<T>, e: T) -> Result<WaveFunction<T>> {
    let n = op.n();
    let lu = Factor::new(op, e);
    let mut v = vec![Complex::new(T::one(), T::zero()); n];
    let s = norm2(&v).recip();
    scale(&mut v, Complex::new(s, T::zero()));
    let tol = T::lit(1e-10).max(T::epsilon() * T::lit(100.0));
    let mut converged = false;
    for _ in 0..MAX_ITER {
        let mut w = v.clone();
        lu.solve(&mut w);
        let nw = norm2(&w);
        if !nw.is_finite() || nw == T::zero() {
            return Err(Error::InverseIteration(MAX_ITER));
        }
        scale(&mut w, Complex::new(nw.recip(), T::zero()));
        // align phase with the previous iterate before comparing
        let overlap: Complex<T> = v.iter().zip(&w).map(|(a, b)| a.conj() * b).fold(Complex::new(T::zero(), T::zero()), |x, y| x + y);
        if overlap.norm() > T::zero() {
            scale(&mut w, overlap.conj() / overlap.norm());
        }
        let diff = v.iter().zip(&w).map(|(a, b)| (a - b).norm_sqr()).fold(T::zero(), |x, y| x + y).sqrt();
        v = w;
        if diff < tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::InverseIteration(MAX_ITER));
    }
    pt_phase(&mut v);
    let h = op.grid().h();
    let s = (norm2(&v) * h.sqrt()).recip();
    scale(&mut v, Complex::new(s, T::zero()));
    Ok(WaveFunction { grid: *op.grid(), energy: e, values: v })
}

/// Rotates `v` so that `v_{n-1-k} = conj v_k`, with the largest amplitude in the right half-plane.
fn pt_phase<T: Real>(v: &mut [Complex<T>]) {
    let n = v.len();
    let s: Complex<T> = (0..n).map(|k| v[k] * v[n - 1 - k]).fold(Complex::new(T::zero(), T::zero()), |a, b| a + b);
    if s.norm() > T::zero() {
        let c = Complex::from_polar(T::one(), -s.arg() / T::lit(2.0));
        scale(v, c);
    }
    let big = v.iter().copied().max_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap()).unwrap();
    if big.re < T::zero() {
        scale(v, Complex::new(-T::one(), T::zero()));
    }
}

impl<T: Real> WaveFunction<T> {
    /// `(psi(0), psi'(0))` by central differences.
    pub fn value_and_slope_at_origin(&self) -> (Complex<T>, Complex<T>) {
        let h = self.grid.h();
        let n = self.values.len();
        let v = &self.values;
        let two = T::lit(2.0);
        match self.grid.center() {
            Some(c) => (v[c], (v[c + 1] - v[c - 1]) / (two * h)),
            None => {
                let (a, b) = (v[n / 2 - 1], v[n / 2]);
                ((a + b) / two, (b - a) / h)
            }
        }
    }

    /// `psi'(0) / psi(0)`; the contour must pass through the origin.
    pub fn log_derivative_at_origin(&self) -> Result<Complex<T>> {
        if self.grid.y() != T::zero() {
            return Err(Error::Domain(format!("contour y = {} misses the origin", self.grid.y())));
        }
        let (v, s) = self.value_and_slope_at_origin();
        Ok(s / v)
    }

    /// `-i psi'(0) / psi(0)`, real for a PT-symmetric eigenfunction.
    pub fn tabulated_log_derivative(&self) -> Result<Complex<T>> {
        Ok(self.log_derivative_at_origin()? * Complex::new(T::zero(), -T::one()))
    }

    /// `max_k |psi_{n-1-k} - conj psi_k|`, relative to the largest amplitude.
    pub fn pt_defect(&self) -> T {
        let n = self.values.len();
        let top = self.values.iter().map(|z| z.norm()).fold(T::zero(), T::max);
        (0..n)
            .map(|k| (self.values[n - 1 - k] - self.values[k].conj()).norm())
            .fold(T::zero(), T::max)
            / top
    }

    /// `||(H - E) psi|| / ||psi||`.
    pub fn residual(&self, op: &TridiagonalOperator<T>) -> T {
        let hv = op.apply(&self.values);
        let r: Vec<_> = hv.iter().zip(&self.values).map(|(a, b)| a - b * self.energy).collect();
        norm2(&r) / norm2(&self.values)
    }

    /// Sign of `Im psi` just to the right of the origin.
    pub fn imag_sign_right_of_origin(&self) -> i8 {
        let n = self.values.len();
        let k = self.grid.center().map_or(n / 2, |c| c + 1);
        let im = self.values[k].im;
        if im > T::zero() {
            1
        } else if im < T::zero() {
            -1
        } else {
            0
        }
    }
}
