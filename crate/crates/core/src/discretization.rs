//! Second-order finite-difference Hamiltonian on a shifted contour.

use num_complex::Complex;

use crate::contour::{decay_margin, optimal_shift, FamilySelector};
use crate::error::{domain, Result};
use crate::potential::{eval_potential, PotentialParams};
use crate::scalar::Real;

/// Uniform grid of `n` interior points on `[-x_max, x_max]`, shifted by `i y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec<T> {
    x_max: T,
    n: usize,
    y: T,
}

impl<T: Real> GridSpec<T> {
    pub fn new(x_max: T, n: usize, y: T) -> Result<Self> {
        if !(x_max > T::zero()) || !x_max.is_finite() {
            return domain(format!("x_max = {x_max} must be positive"));
        }
        if n < 2 {
            return domain(format!("n = {n} must be at least 2"));
        }
        if !y.is_finite() {
            return domain("shift must be finite");
        }
        Ok(Self { x_max, n, y })
    }

    pub fn x_max(&self) -> T {
        self.x_max
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn y(&self) -> T {
        self.y
    }

    pub fn h(&self) -> T {
        T::lit(2.0) * self.x_max / T::from_usize(self.n + 1).unwrap()
    }

    /// Same interval and shift with `2n + 1` points, so `h` halves exactly.
    pub fn refined(&self) -> Self {
        Self { n: 2 * self.n + 1, ..*self }
    }

    pub fn with_n(&self, n: usize) -> Result<Self> {
        Self::new(self.x_max, n, self.y)
    }

    /// Abscissae `x_k = -x_max + k h`, `k = 1..=n`, mirrored exactly about zero.
    pub fn abscissae(&self) -> Vec<T> {
        let h = self.h();
        let n = self.n;
        let mut xs = vec![T::zero(); n];
        for k in 0..n.div_ceil(2) {
            let x = -self.x_max + T::from_usize(k + 1).unwrap() * h;
            xs[k] = x;
            xs[n - 1 - k] = -x;
        }
        if n % 2 == 1 {
            xs[n / 2] = T::zero();
        }
        xs
    }

    /// Index of `x = 0` when it is a grid point.
    pub fn center(&self) -> Option<usize> {
        (self.n % 2 == 1).then_some(self.n / 2)
    }
}

/// How a grid is chosen for a given family: `n` fixed, `x_max` and `y` optional overrides.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPolicy<T> {
    pub n: usize,
    pub x_max: Option<T>,
    pub y: Option<T>,
}

impl<T: Real> GridPolicy<T> {
    pub fn new(n: usize) -> Self {
        Self { n, x_max: None, y: None }
    }

    pub fn with_x_max(mut self, x_max: T) -> Self {
        self.x_max = Some(x_max);
        self
    }

    pub fn with_y(mut self, y: T) -> Self {
        self.y = Some(y);
        self
    }

    pub fn resolve(&self, p: &PotentialParams<T>, family: FamilySelector) -> Result<GridSpec<T>> {
        let y = match self.y {
            Some(y) => y,
            None => optimal_shift(p, family)?.y,
        };
        let x_max = match self.x_max {
            Some(x) => x,
            None => default_x_max(p, family, y)?,
        };
        GridSpec::new(x_max, self.n, y)
    }
}

/// Smallest integer `x_max >= 8` (capped at 40) with decay margin `-Re G >= 30`.
pub fn default_x_max<T: Real>(p: &PotentialParams<T>, family: FamilySelector, y: T) -> Result<T> {
    let target = T::lit(30.0);
    for x in 8..=40 {
        let x = T::lit(x as f64);
        if decay_margin(p, family, y, x)? >= target {
            return Ok(x);
        }
    }
    Ok(T::lit(40.0))
}

/// Complex symmetric tridiagonal matrix with constant off-diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalOperator<T> {
    grid: GridSpec<T>,
    diag: Vec<Complex<T>>,
    off: T,
}

impl<T: Real> TridiagonalOperator<T> {
    /// Operator with an arbitrary diagonal on `grid`, off-diagonal `-1/h^2`.
    pub fn from_diagonal(grid: GridSpec<T>, diag: Vec<Complex<T>>) -> Result<Self> {
        if diag.len() != grid.n() {
            return domain(format!("diagonal has {} entries, grid has {}", diag.len(), grid.n()));
        }
        let h = grid.h();
        Ok(Self { grid, diag, off: -(h * h).recip() })
    }

    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    pub fn n(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[Complex<T>] {
        &self.diag
    }

    pub fn off(&self) -> T {
        self.off
    }

    /// `max_k |H_kk - conj H_{n+1-k, n+1-k}|`, zero for an exactly PT-symmetric operator.
    pub fn pt_defect(&self) -> T {
        let n = self.n();
        (0..n)
            .map(|k| (self.diag[k] - self.diag[n - 1 - k].conj()).norm())
            .fold(T::zero(), T::max)
    }

    /// `H v`.
    pub fn apply(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        let n = self.n();
        (0..n)
            .map(|k| {
                let mut s = self.diag[k] * v[k];
                if k > 0 {
                    s = s + v[k - 1] * self.off;
                }
                if k + 1 < n {
                    s = s + v[k + 1] * self.off;
                }
                s
            })
            .collect()
    }

    pub fn to_dense(&self) -> Vec<Vec<Complex<T>>> {
        let n = self.n();
        let zero = Complex::new(T::zero(), T::zero());
        let b = Complex::new(self.off, T::zero());
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| match i.abs_diff(j) {
                        0 => self.diag[i],
                        1 => b,
                        _ => zero,
                    })
                    .collect()
            })
            .collect()
    }
}

/// `H = -d^2/dx^2 + V(x + i y)` on `grid`; the diagonal is mirrored so PT symmetry is exact.
pub fn build_hamiltonian<T: Real>(p: &PotentialParams<T>, grid: GridSpec<T>) -> Result<TridiagonalOperator<T>> {
    let xs = grid.abscissae();
    let n = grid.n();
    let h = grid.h();
    let kinetic = T::lit(2.0) / (h * h);
    let mut diag = vec![Complex::new(T::zero(), T::zero()); n];
    for k in 0..n.div_ceil(2) {
        let v = eval_potential(p, Complex::new(xs[k], grid.y()))?;
        diag[k] = v + kinetic;
        diag[n - 1 - k] = diag[k].conj();
    }
    if let Some(c) = grid.center() {
        let v = eval_potential(p, Complex::new(T::zero(), grid.y()))?;
        diag[c] = v + kinetic;
    }
    TridiagonalOperator::from_diagonal(grid, diag)
}
