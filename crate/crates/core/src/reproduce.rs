//! Finite-difference seeds and the RPM convergence-table presets.

use crate::contour::FamilySelector;
use crate::discretization::{build_hamiltonian, default_x_max, GridPolicy, GridSpec};
use crate::error::{Error, Result};
use crate::potential::PotentialParams;
use crate::rpm::{convergence_table, transform_iq, transform_u, Seed, SeedStrategy, TableRow, Transform};
use crate::spectral::{confirmed_real_eigenvalues, eigenvector, find_real_eigenvalues, richardson, ConfirmedLevel};
use crate::scalar::FieldScalar;
use crate::Hp;

/// Grid size used for seeding.
pub const SEED_N: usize = 1000;
/// Lower end of every energy scan.
pub const E_FLOOR: f64 = -20.0;

/// Confirmed real levels of a family on its optimal contour, ascending.
pub fn family_levels(
    p: &PotentialParams<f64>,
    family: FamilySelector,
    n: usize,
    e_max: f64,
) -> Result<Vec<ConfirmedLevel<f64>>> {
    let grid = GridPolicy::new(n).resolve(p, family)?;
    let mut levels = confirmed_real_eigenvalues(p, grid, E_FLOOR, e_max, 0.05)?;
    levels.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    Ok(levels)
}

pub fn ground_state(p: &PotentialParams<f64>, family: FamilySelector, n: usize) -> Result<ConfirmedLevel<f64>> {
    family_levels(p, family, n, 30.0)?
        .into_iter()
        .next()
        .ok_or_else(|| Error::NoConvergence(format!("no confirmed real level at alpha = {}", p.alpha())))
}

/// Real-axis eigenvalue nearest `guess` and its `-i psi'(0)/psi(0)` on a grid of `n` points.
pub fn real_axis_log_derivative(p: &PotentialParams<f64>, guess: f64, n: usize) -> Result<(f64, f64)> {
    let x_max = default_x_max(p, FamilySelector::PRIMARY, 0.0)?;
    let op = build_hamiltonian(p, GridSpec::new(x_max, n, 0.0)?)?;
    let e = find_real_eigenvalues(&op, guess - 0.25, guess + 0.25, 0.01)?
        .into_iter()
        .min_by(|a, b| (a - guess).abs().total_cmp(&(b - guess).abs()))
        .ok_or(Error::NoSignChange { lo: guess - 0.25, hi: guess + 0.25 })?;
    let ld = eigenvector(&op, e)?.tabulated_log_derivative()?;
    Ok((e, ld.re))
}

/// [`real_axis_log_derivative`] on `n`, `2n+1`, `4n+3` points, extrapolated in `h^2`.
pub fn extrapolated_log_derivative(p: &PotentialParams<f64>, guess: f64, n: usize) -> Result<(f64, f64)> {
    let x_max = default_x_max(p, FamilySelector::PRIMARY, 0.0)?;
    let ns = [n, 2 * n + 1, 4 * n + 3];
    let mut hs = [0.0; 3];
    let mut es = [0.0; 3];
    let mut lds = [0.0; 3];
    for (k, &m) in ns.iter().enumerate() {
        hs[k] = GridSpec::new(x_max, m, 0.0)?.h();
        (es[k], lds[k]) = real_axis_log_derivative(p, guess, m)?;
    }
    Ok((richardson(hs, es), richardson(hs, lds)))
}

/// Number of distinct levels of `families` lying below `energy`; families without a contour are skipped.
pub fn merged_rank(p: &PotentialParams<f64>, energy: f64, families: &[FamilySelector], n: usize) -> Result<usize> {
    let mut below: Vec<f64> = Vec::new();
    for &fam in families {
        let levels = match family_levels(p, fam, n, energy + 1.0) {
            Ok(l) => l,
            Err(Error::NoAdmissibleShift { .. }) => continue,
            Err(e) => return Err(e),
        };
        let tol = 1e-4 * (1.0 + energy.abs());
        for l in levels {
            if l.extrapolated < energy - tol && below.iter().all(|b| (b - l.extrapolated).abs() > tol) {
                below.push(l.extrapolated);
            }
        }
    }
    Ok(below.len())
}

/// Named RPM tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RpmPreset {
    Table2,
    Table3,
    Table4,
}

/// One column of a convergence table.
#[derive(Debug, Clone)]
pub struct RpmColumn {
    pub alpha: f64,
    pub transform: Transform,
    pub seed: Seed<f64>,
    pub rows: Vec<TableRow<Hp>>,
    /// Position of the converged energy in the merged spectrum of the low families (0 = ground state).
    pub rank: Option<usize>,
}

impl RpmColumn {
    pub fn is_ground_state(&self) -> Option<bool> {
        self.rank.map(|r| r == 0)
    }
}

fn column(
    alpha: f64,
    transform: Transform,
    dims: std::ops::RangeInclusive<usize>,
    seed: Seed<f64>,
    strategy: SeedStrategy,
) -> Result<RpmColumn> {
    let p = PotentialParams::new(alpha, 0.0)?;
    let problem = match transform {
        Transform::Iq => transform_iq(&p)?,
        Transform::U => transform_u(&p)?,
        Transform::Direct => return Err(Error::Domain("direct transform has no table".into())),
    };
    let hp_seed = Seed::from_f64(seed.energy, seed.log_derivative);
    let rows = convergence_table::<Hp>(&problem, dims, &hp_seed, strategy);
    Ok(RpmColumn { alpha, transform, seed, rows, rank: None })
}

/// Finite-difference seed of the ground state of `family`, with the real-axis log-derivative when asked.
pub fn fd_seed(alpha: f64, family: FamilySelector, with_log_derivative: bool) -> Result<Seed<f64>> {
    let p = PotentialParams::new(alpha, 0.0)?;
    let e = ground_state(&p, family, SEED_N)?.extrapolated;
    if with_log_derivative {
        let (_, ld) = extrapolated_log_derivative(&p, e, SEED_N + 1)?;
        Ok(Seed::from_f64(e, Some(ld)))
    } else {
        Ok(Seed::from_f64(e, None))
    }
}

/// Runs a preset with seeds taken from the finite-difference solver.
pub fn rpm_preset(preset: RpmPreset) -> Result<Vec<RpmColumn>> {
    match preset {
        RpmPreset::Table2 => {
            let seed = fd_seed(2.0, FamilySelector::PRIMARY, false)?;
            Ok(vec![column(2.0, Transform::Iq, 2..=8, seed, SeedStrategy::Chained)?])
        }
        RpmPreset::Table3 => [1.0, 3.0]
            .into_iter()
            .map(|a| column(a, Transform::Iq, 2..=6, fd_seed(a, FamilySelector::PRIMARY, true)?, SeedStrategy::Fixed))
            .collect(),
        RpmPreset::Table4 => {
            let fams = [FamilySelector::PRIMARY, FamilySelector::ALT];
            let mut out = Vec::new();
            for (alpha, family) in [(1.0, FamilySelector::PRIMARY), (3.0, FamilySelector::ALT)] {
                let p = PotentialParams::new(alpha, 0.0)?;
                let seed = fd_seed(alpha, family, false)?;
                let mut col = column(alpha, Transform::U, 2..=8, seed, SeedStrategy::Chained)?;
                if let Some(r) = col.rows.iter().rev().find_map(|r| r.result.as_ref()) {
                    col.rank = Some(merged_rank(&p, r.energy.to_f64_lossy(), &fams, SEED_N)?);
                }
                out.push(col);
            }
            Ok(out)
        }
    }
}
