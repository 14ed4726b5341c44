//! Command-line driver: flat TOML config layered under flags, CSV out.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error as ThisError;

use crate::contour::{optimal_shift, FamilySelector};
use crate::discretization::{default_x_max, GridPolicy, GridSpec};
use crate::error::Error;
use crate::mp::Mp;
use crate::potential::{effective_potential, PotentialParams};
use crate::reproduce::{self, RpmColumn, RpmPreset};
use crate::rpm::{convergence_table, transform_iq, transform_u, RpmProblem, Seed, SeedStrategy, Symmetry, Transform};
use crate::spectral::{confirmed_real_eigenvalues, Continuation, EventKind, LevelTrack, SweepConfig};

#[derive(Debug, ThisError)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Solver(#[from] Error),
}

impl CliError {
    /// 2 for anything the user can fix in the configuration, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Solver(Error::Domain(_) | Error::CoshZero { .. } | Error::NoAdmissibleShift { .. }) => 2,
            CliError::Solver(_) => 3,
            CliError::Config(_) | CliError::Io(_) | CliError::Csv(_) => 2,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn config_err(msg: impl std::fmt::Display) -> CliError {
    CliError::Config(msg.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "pt-sinh", version, about = "Real spectra of -(i sinh x)^alpha cosh^beta x")]
pub struct Cli {
    /// Flat key-value TOML file; keys are the long flag names, flags win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Confirmed real eigenvalues on one contour.
    Solve(SolveArgs),
    /// Follow levels in alpha and record merge/reappear events.
    Sweep(SweepArgs),
    /// Optimal shift and admissible window against alpha.
    Contour(ContourArgs),
    /// The shifted potential V(x + i y) on the real line.
    Veff(VeffArgs),
    /// Riccati-Pade convergence table.
    Rpm(RpmArgs),
    /// Named reproduction presets: fig1..fig6, table2..table4.
    Table(TableArgs),
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct SolveArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<f64>,
    /// `2+`, `6-`, ...
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub x_max: Option<f64>,
    /// Override of the optimal shift; must lie in the admissible window.
    #[arg(long, allow_hyphen_values = true)]
    pub y: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub e_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub e_max: Option<f64>,
    #[arg(long)]
    pub scan_step: Option<f64>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct SweepArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<f64>,
    /// Repeatable; each family is swept independently.
    #[arg(long)]
    pub family: Option<Vec<String>>,
    #[arg(long)]
    pub alpha_start: Option<f64>,
    #[arg(long)]
    pub alpha_end: Option<f64>,
    #[arg(long)]
    pub step: Option<f64>,
    #[arg(long)]
    pub levels: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub x_max: Option<f64>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Also write a gnuplot script reading the CSV.
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct ContourArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long)]
    pub alpha_min: Option<f64>,
    #[arg(long)]
    pub alpha_max: Option<f64>,
    #[arg(long)]
    pub alpha_step: Option<f64>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct VeffArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub y: Option<f64>,
    #[arg(long)]
    pub x_max: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct RpmArgs {
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    /// `iq` or `u`.
    #[arg(long)]
    pub transform: Option<String>,
    #[arg(long)]
    pub dmin: Option<usize>,
    #[arg(long)]
    pub dmax: Option<usize>,
    /// Defaults to the finite-difference ground state of `family`.
    #[arg(long, allow_hyphen_values = true)]
    pub seed_e: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub seed_f0: Option<f64>,
    #[arg(long)]
    pub family: Option<String>,
    /// `chained` or `fixed`.
    #[arg(long)]
    pub seeding: Option<String>,
    /// Working precision in decimal digits (60..=300).
    #[arg(long)]
    pub precision: Option<u32>,
    /// Significant digits printed.
    #[arg(long)]
    pub digits: Option<usize>,
    /// Hankel shift `d`.
    #[arg(long)]
    pub shift: Option<usize>,
    /// Regularisation index of the symmetric recurrence.
    #[arg(long)]
    pub s: Option<u32>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct TableArgs {
    /// fig1..fig6 or table2..table4.
    pub preset: Option<String>,
    /// Directory receiving `<preset>.csv` (and `<preset>.gp` for figures).
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
}

/// Flags over config file keys.
fn layered<T: Serialize + DeserializeOwned>(flags: &T, config: &toml::Table) -> CliResult<T> {
    let mut merged = config.clone();
    match toml::Value::try_from(flags).map_err(config_err)? {
        toml::Value::Table(t) => merged.extend(t),
        other => return Err(config_err(format!("unexpected flag value {other}"))),
    }
    toml::Value::Table(merged).try_into().map_err(config_err)
}

fn echo<T: Serialize>(command: &str, args: &T) -> CliResult<Vec<String>> {
    let body = toml::to_string(args).map_err(config_err)?;
    let mut meta = vec![format!("pt-sinh {} {command}", env!("CARGO_PKG_VERSION"))];
    meta.extend(body.lines().filter(|l| !l.is_empty()).map(str::to_owned));
    Ok(meta)
}

/// Shortest representation that reads back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

/// CSV with `#` metadata lines, a header row and LF line endings.
pub fn write_csv<W: Write>(out: W, meta: &[String], header: &[&str], rows: &[Vec<String>]) -> CliResult<()> {
    let mut out = out;
    for m in meta {
        writeln!(out, "# {m}")?;
    }
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

fn sink(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| config_err(format!("{}: {e}", p.display())))?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn family_of(s: &Option<String>) -> CliResult<FamilySelector> {
    match s {
        Some(s) => Ok(s.parse()?),
        None => Ok(FamilySelector::PRIMARY),
    }
}

fn positive(name: &str, x: f64) -> CliResult<f64> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(config_err(format!("{name} must be positive, got {x}")))
    }
}

fn required<T>(name: &str, x: Option<T>) -> CliResult<T> {
    x.ok_or_else(|| config_err(format!("--{name} is required")))
}

pub fn run(cli: Cli) -> CliResult<()> {
    let config = match &cli.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| config_err(format!("{}: {e}", p.display())))?;
            text.parse::<toml::Table>().map_err(config_err)?
        }
        None => toml::Table::new(),
    };
    match cli.command {
        Command::Solve(a) => cmd_solve(&layered(&a, &config)?),
        Command::Sweep(a) => cmd_sweep(&layered(&a, &config)?),
        Command::Contour(a) => cmd_contour(&layered(&a, &config)?),
        Command::Veff(a) => cmd_veff(&layered(&a, &config)?),
        Command::Rpm(a) => cmd_rpm(&layered(&a, &config)?),
        Command::Table(a) => cmd_table(&layered(&a, &config)?),
    }
}

/// A solved level row: `(level_index, E, y_used, n, x_max, est_error)`.
pub fn solve_rows(a: &SolveArgs) -> CliResult<Vec<Vec<String>>> {
    let p = PotentialParams::new(required("alpha", a.alpha)?, a.beta.unwrap_or(0.0))?;
    let family = family_of(&a.family)?;
    let n = a.n.unwrap_or(1000);
    let spec = optimal_shift(&p, family)?;
    let mut policy = GridPolicy::new(n);
    if let Some(y) = a.y {
        let slack = 1e-12;
        if !(y >= spec.y_minus - slack && y <= spec.y_plus + slack) {
            return Err(config_err(format!("y = {y} outside the window [{}, {}]", spec.y_minus, spec.y_plus)));
        }
        policy = policy.with_y(y);
    }
    if let Some(x) = a.x_max {
        policy = policy.with_x_max(positive("x-max", x)?);
    }
    let grid = policy.resolve(&p, family)?;
    let e_min = a.e_min.unwrap_or(reproduce::E_FLOOR);
    let e_max = a.e_max.unwrap_or(30.0);
    if !(e_max > e_min) {
        return Err(config_err("e-max must exceed e-min"));
    }
    let step = positive("scan-step", a.scan_step.unwrap_or(0.05))?;
    let mut levels = confirmed_real_eigenvalues(&p, grid, e_min, e_max, step)?;
    levels.sort_by(|x, y| x.energy.total_cmp(&y.energy));
    Ok(levels
        .iter()
        .enumerate()
        .map(|(k, l)| {
            vec![
                (k + 1).to_string(),
                fmt_f64(l.extrapolated),
                fmt_f64(grid.y()),
                n.to_string(),
                fmt_f64(grid.x_max()),
                fmt_f64(l.est_error),
            ]
        })
        .collect())
}

pub fn cmd_solve(a: &SolveArgs) -> CliResult<()> {
    let rows = solve_rows(a)?;
    if rows.is_empty() {
        eprintln!("warning: no real eigenvalues on this contour");
    }
    let header = ["level_index", "E", "y_used", "n", "x_max", "est_error"];
    write_csv(sink(a.output.as_deref())?, &echo("solve", a)?, &header, &rows)
}

const EVENT_HEADER: [&str; 5] = ["family", "level_index", "alpha", "E", "event"];

/// Long-format rows of finished or partial tracks; `failure` marks every track's last point.
pub fn track_rows(tracks: &[LevelTrack<f64>], failure: bool) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for t in tracks {
        let fam = t.family.to_string();
        let row = |a: f64, e: f64, ev: &str| vec![fam.clone(), t.level_index.to_string(), fmt_f64(a), fmt_f64(e), ev.to_owned()];
        for &(a, e) in &t.points {
            rows.push(row(a, e, ""));
        }
        for ev in &t.events {
            let kind = match ev.kind {
                EventKind::Merge => "merge",
                EventKind::Reappear => "reappear",
            };
            rows.push(row(ev.alpha, ev.energy, kind));
        }
        if failure {
            if let Some(&(a, e)) = t.points.last() {
                rows.push(row(a, e, "terminated"));
            }
        }
    }
    rows
}

/// Runs independent sweeps in parallel; each returns its tracks and the error that stopped it, if any.
pub fn run_sweeps(cfgs: Vec<SweepConfig<f64>>) -> Vec<(Vec<LevelTrack<f64>>, Option<Error>)> {
    std::thread::scope(|s| {
        let handles: Vec<_> = cfgs
            .into_iter()
            .map(|cfg| {
                s.spawn(move || match Continuation::new(cfg) {
                    Err(e) => (Vec::new(), Some(e)),
                    Ok(mut c) => match c.run() {
                        Ok(t) => (t, None),
                        Err(e) => (c.tracks(), Some(e)),
                    },
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("sweep thread panicked")).collect()
    })
}

fn sweep_configs(a: &SweepArgs) -> CliResult<Vec<SweepConfig<f64>>> {
    let beta = a.beta.unwrap_or(0.0);
    let start = a.alpha_start.unwrap_or(2.0);
    let end = a.alpha_end.unwrap_or(1.0);
    PotentialParams::new(start, beta)?;
    PotentialParams::new(end, beta)?;
    let step = positive("step", a.step.unwrap_or(0.01))?;
    let levels = a.levels.unwrap_or(7);
    if levels == 0 {
        return Err(config_err("levels must be at least 1"));
    }
    let fams = a.family.clone().unwrap_or_else(|| vec!["2+".into()]);
    fams.iter()
        .map(|f| {
            let mut cfg = SweepConfig::new(f.parse()?, beta, start, end, step, levels);
            cfg.n = a.n.unwrap_or(1000);
            cfg.x_max = a.x_max.map(|x| positive("x-max", x)).transpose()?;
            Ok(cfg)
        })
        .collect()
}

fn gnuplot_script(csv: &Path, script: &Path, x: usize, y: usize, group: usize, xlabel: &str) -> String {
    let data = match (csv.parent(), script.parent()) {
        (Some(a), Some(b)) if a == b => csv.file_name().map(PathBuf::from).unwrap_or_else(|| csv.to_owned()),
        _ => csv.to_owned(),
    };
    let data = data.display();
    format!(
        "# generated by pt-sinh; reads only {data}\n\
         set datafile separator ','\n\
         set key off\n\
         set xlabel '{xlabel}'\n\
         set ylabel 'E'\n\
         plot '{data}' every ::1 using {x}:{y}:{group} with points pt 7 ps 0.3 lc variable\n\
         pause -1\n"
    )
}

fn sweep_output(a: &SweepArgs, meta: Vec<String>, results: Vec<(Vec<LevelTrack<f64>>, Option<Error>)>) -> CliResult<()> {
    let mut rows = Vec::new();
    let mut first_err = None;
    for (tracks, err) in results {
        rows.extend(track_rows(&tracks, err.is_some()));
        if let Some(e) = err {
            eprintln!("error: sweep stopped: {e}");
            first_err.get_or_insert(e);
        }
    }
    write_csv(sink(a.output.as_deref())?, &meta, &EVENT_HEADER, &rows)?;
    if let Some(plot) = &a.plot {
        let csv = a.output.as_deref().ok_or_else(|| config_err("--plot needs --output"))?;
        std::fs::write(plot, gnuplot_script(csv, plot, 3, 4, 2, "alpha"))?;
    }
    match first_err {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

pub fn cmd_sweep(a: &SweepArgs) -> CliResult<()> {
    let cfgs = sweep_configs(a)?;
    if a.plot.is_some() && a.output.is_none() {
        return Err(config_err("--plot needs --output"));
    }
    let meta = echo("sweep", a)?;
    sweep_output(a, meta, run_sweeps(cfgs))
}

pub fn contour_rows(beta: f64, family: FamilySelector, alphas: &[f64]) -> CliResult<Vec<Vec<String>>> {
    let mut rows = Vec::new();
    for &alpha in alphas {
        let p = PotentialParams::new(alpha, beta)?;
        match optimal_shift(&p, family) {
            Ok(c) => rows.push(vec![fmt_f64(alpha), fmt_f64(c.y), fmt_f64(c.y_plus), fmt_f64(c.y_minus)]),
            Err(Error::NoAdmissibleShift { .. }) => rows.push(vec![fmt_f64(alpha), String::new(), String::new(), String::new()]),
            Err(e) => return Err(e.into()),
        }
    }
    Ok(rows)
}

/// `lo, lo + step, ...` up to `hi` inclusive, built from integer multiples.
pub fn grid_points(lo: f64, hi: f64, step: f64) -> CliResult<Vec<f64>> {
    positive("step", step)?;
    if !(hi >= lo) {
        return Err(config_err("range end is below its start"));
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize;
    Ok((0..=count).map(|k| lo + step * k as f64).collect())
}

pub fn cmd_contour(a: &ContourArgs) -> CliResult<()> {
    let alphas = grid_points(a.alpha_min.unwrap_or(1.0), a.alpha_max.unwrap_or(10.0), a.alpha_step.unwrap_or(0.05))?;
    let rows = contour_rows(a.beta.unwrap_or(0.0), family_of(&a.family)?, &alphas)?;
    write_csv(sink(a.output.as_deref())?, &echo("contour", a)?, &["alpha", "y_opt", "y_plus", "y_minus"], &rows)
}

pub fn veff_rows(p: &PotentialParams<f64>, y: f64, x_max: f64, points: usize) -> CliResult<Vec<Vec<String>>> {
    if points < 2 {
        return Err(config_err("points must be at least 2"));
    }
    let h = 2.0 * positive("x-max", x_max)? / (points - 1) as f64;
    let half = (points - 1) as f64 / 2.0;
    // mirrored exactly about 0
    let xs: Vec<f64> = (0..points).map(|k| (k as f64 - half) * h).collect();
    Ok(effective_potential(p, y, &xs)?
        .iter()
        .map(|s| vec![fmt_f64(s.z.re), fmt_f64(s.v.re), fmt_f64(s.v.im)])
        .collect())
}

pub fn cmd_veff(a: &VeffArgs) -> CliResult<()> {
    let p = PotentialParams::new(required("alpha", a.alpha)?, a.beta.unwrap_or(0.0))?;
    let y = match a.y {
        Some(y) => y,
        None => optimal_shift(&p, family_of(&a.family)?)?.y,
    };
    let rows = veff_rows(&p, y, a.x_max.unwrap_or(4.0), a.points.unwrap_or(401))?;
    write_csv(sink(a.output.as_deref())?, &echo("veff", a)?, &["x", "re_veff", "im_veff"], &rows)
}

fn rpm_table_rows<const B: usize>(
    problem: &RpmProblem,
    dims: std::ops::RangeInclusive<usize>,
    seed: &Seed<f64>,
    strategy: SeedStrategy,
    digits: usize,
) -> Vec<Vec<String>> {
    let seed = Seed::<Mp<B>>::from_f64(seed.energy, seed.log_derivative);
    convergence_table(problem, dims, &seed, strategy)
        .into_iter()
        .map(|row| match row.result {
            Some(r) => vec![
                row.dim.to_string(),
                r.energy.to_decimal_string(digits),
                r.log_derivative.map(|f| f.to_decimal_string(digits)).unwrap_or_default(),
                r.converged_digits.map(|d| d.to_string()).unwrap_or_default(),
            ],
            None => vec![row.dim.to_string(), String::new(), String::new(), String::new()],
        })
        .collect()
}

pub fn rpm_rows(a: &RpmArgs) -> CliResult<Vec<Vec<String>>> {
    let alpha = required("alpha", a.alpha)?;
    let p = PotentialParams::new(alpha, a.beta.unwrap_or(0.0))?;
    let transform = match a.transform.as_deref().unwrap_or("iq") {
        "iq" => Transform::Iq,
        "u" => Transform::U,
        t => return Err(config_err(format!("unknown transform {t:?}"))),
    };
    let mut problem = match transform {
        Transform::U => transform_u(&p)?,
        _ => transform_iq(&p)?,
    };
    if let Some(d) = a.shift {
        problem = problem.with_shift(d);
    }
    if let Some(s) = a.s {
        problem = problem.with_s(s);
    }
    let (dmin, dmax) = (a.dmin.unwrap_or(2), a.dmax.unwrap_or(8));
    if dmin < 1 || dmax < dmin {
        return Err(config_err("need 1 <= dmin <= dmax"));
    }
    let nonsym = problem.kind() == Symmetry::Nonsymmetric;
    let seed = match a.seed_e {
        Some(e) => {
            if nonsym && a.seed_f0.is_none() {
                return Err(config_err("--seed-f0 is required with --seed-e for odd alpha"));
            }
            Seed::from_f64(e, a.seed_f0)
        }
        None => {
            let fam = family_of(&a.family)?;
            let mut s = reproduce::fd_seed(alpha, fam, nonsym)?;
            if a.seed_f0.is_some() {
                s.log_derivative = a.seed_f0;
            }
            s
        }
    };
    let strategy = match a.seeding.as_deref() {
        None if nonsym => SeedStrategy::Fixed,
        None | Some("chained") => SeedStrategy::Chained,
        Some("fixed") => SeedStrategy::Fixed,
        Some(s) => return Err(config_err(format!("unknown seeding {s:?}"))),
    };
    let precision = a.precision.unwrap_or(70);
    if !(60..=300).contains(&precision) {
        return Err(config_err(format!("precision {precision} outside 60..=300 digits")));
    }
    let digits = a.digits.unwrap_or(25).clamp(1, precision as usize);
    let bits = (precision as f64 * std::f64::consts::LOG2_10).ceil() as usize;
    let dims = dmin..=dmax;
    Ok(match bits {
        0..=256 => rpm_table_rows::<256>(&problem, dims, &seed, strategy, digits),
        257..=384 => rpm_table_rows::<384>(&problem, dims, &seed, strategy, digits),
        385..=512 => rpm_table_rows::<512>(&problem, dims, &seed, strategy, digits),
        513..=768 => rpm_table_rows::<768>(&problem, dims, &seed, strategy, digits),
        _ => rpm_table_rows::<1024>(&problem, dims, &seed, strategy, digits),
    })
}

pub fn cmd_rpm(a: &RpmArgs) -> CliResult<()> {
    let rows = rpm_rows(a)?;
    write_csv(sink(a.output.as_deref())?, &echo("rpm", a)?, &["D", "E", "f0", "converged_digits"], &rows)?;
    if rows.iter().all(|r| r[1].is_empty()) {
        return Err(Error::NoConvergence("no dimension produced a root".into()).into());
    }
    Ok(())
}

fn transform_name(t: Transform) -> &'static str {
    match t {
        Transform::Iq => "iq",
        Transform::U => "u",
        Transform::Direct => "direct",
    }
}

pub fn preset_rows(cols: &[RpmColumn], digits: usize) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for c in cols {
        for r in &c.rows {
            let (e, f, d) = match &r.result {
                Some(x) => (
                    x.energy.to_decimal_string(digits),
                    x.log_derivative.as_ref().map(|f| f.to_decimal_string(digits)).unwrap_or_default(),
                    x.converged_digits.map(|d| d.to_string()).unwrap_or_default(),
                ),
                None => Default::default(),
            };
            rows.push(vec![
                fmt_f64(c.alpha),
                transform_name(c.transform).into(),
                r.dim.to_string(),
                e,
                f,
                d,
                c.rank.map(|k| k.to_string()).unwrap_or_default(),
            ]);
        }
    }
    rows
}

fn figure_sweeps(name: &str) -> Vec<SweepConfig<f64>> {
    let two = FamilySelector::PRIMARY;
    let six: FamilySelector = "6+".parse().unwrap();
    let fam_cfg = |f, beta, a0, a1| SweepConfig::new(f, beta, a0, a1, 0.01, 7);
    match name {
        "fig3" => vec![
            fam_cfg(two, 0.0, 2.0, 1.0),
            fam_cfg(two, 0.0, 2.0, 8.0),
            fam_cfg(six, 0.0, 6.0, 4.05),
            fam_cfg(six, 0.0, 6.0, 8.0),
            fam_cfg(FamilySelector::ALT, 0.0, 3.95, 1.0),
        ],
        "fig4" => vec![fam_cfg(two, 0.0, 2.0, 0.95)],
        _ => [0.5, 0.25, 0.0, -0.25].into_iter().map(|b| fam_cfg(two, b, 2.0, 1.0)).collect(),
    }
}

/// Lowest confirmed real level on the real axis and on the optimal contour of the primary family.
pub fn fig1_rows(alphas: &[f64]) -> CliResult<Vec<Vec<String>>> {
    let six: FamilySelector = "6+".parse().unwrap();
    let n = 600;
    let per_alpha = |alpha: f64| -> CliResult<Vec<Vec<String>>> {
        let p = PotentialParams::new(alpha, 0.0)?;
        let mut out = Vec::new();
        let axis_family = if alpha < 4.0 { FamilySelector::PRIMARY } else { six };
        let x_max = default_x_max(&p, axis_family, 0.0)?;
        let lowest = |grid| -> CliResult<Option<f64>> {
            let levels = confirmed_real_eigenvalues(&p, grid, reproduce::E_FLOOR, 15.0, 0.05)?;
            Ok(levels.iter().map(|l| l.extrapolated).min_by(f64::total_cmp))
        };
        if let Some(e) = lowest(GridSpec::new(x_max, n, 0.0)?)? {
            out.push(vec![fmt_f64(alpha), "real-axis".into(), fmt_f64(e)]);
        }
        if let Ok(grid) = GridPolicy::new(n).resolve(&p, FamilySelector::PRIMARY) {
            if let Some(e) = lowest(grid)? {
                out.push(vec![fmt_f64(alpha), "contour-2+".into(), fmt_f64(e)]);
            }
        }
        Ok(out)
    };
    let chunks: Vec<CliResult<Vec<Vec<String>>>> = std::thread::scope(|s| {
        let handles: Vec<_> = alphas.iter().map(|&a| s.spawn(move || per_alpha(a))).collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    let mut rows = Vec::new();
    for c in chunks {
        rows.extend(c?);
    }
    Ok(rows)
}

pub fn cmd_table(a: &TableArgs) -> CliResult<()> {
    let name = required("preset", a.preset.clone())?;
    let dir = a.output_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    let csv = dir.join(format!("{name}.csv"));
    let script = dir.join(format!("{name}.gp"));
    let meta = echo("table", a)?;
    let rpm = |preset| -> CliResult<()> {
        let cols = reproduce::rpm_preset(preset)?;
        let header = ["alpha", "transform", "D", "E", "f0", "converged_digits", "level_rank"];
        write_csv(sink(Some(&csv))?, &meta, &header, &preset_rows(&cols, 25))
    };
    match name.as_str() {
        "table2" => rpm(RpmPreset::Table2),
        "table3" => rpm(RpmPreset::Table3),
        "table4" => rpm(RpmPreset::Table4),
        "fig1" => {
            let rows = fig1_rows(&grid_points(1.0, 8.0, 0.05)?)?;
            write_csv(sink(Some(&csv))?, &meta, &["alpha", "curve", "E"], &rows)?;
            let data = csv.file_name().unwrap().to_string_lossy().into_owned();
            std::fs::write(
                &script,
                format!(
                    "# generated by pt-sinh; reads only {data}\nset datafile separator ','\nset xlabel 'alpha'\nset ylabel 'E'\n\
                     plot '{data}' every ::1 using 1:(strcol(2) eq 'real-axis' ? column(3) : NaN) with points pt 7 title 'real axis', \
                     '' every ::1 using 1:(strcol(2) eq 'contour-2+' ? column(3) : NaN) with lines dt 2 title 'shifted contour'\npause -1\n"
                ),
            )?;
            Ok(())
        }
        "fig2" => {
            let rows = contour_rows(0.0, FamilySelector::PRIMARY, &grid_points(0.5, 10.0, 0.05)?)?;
            write_csv(sink(Some(&csv))?, &meta, &["alpha", "y_opt", "y_plus", "y_minus"], &rows)?;
            let data = csv.file_name().unwrap().to_string_lossy().into_owned();
            std::fs::write(
                &script,
                format!(
                    "# generated by pt-sinh; reads only {data}\nset datafile separator ','\nset xlabel 'alpha'\nset ylabel 'y'\n\
                     plot '{data}' every ::1 using 1:2 with lines title 'optimal', '' every ::1 using 1:3 with lines dt 2 title 'y+', \
                     '' every ::1 using 1:4 with lines dt 2 title 'y-'\npause -1\n"
                ),
            )?;
            Ok(())
        }
        "fig5" => {
            let mut rows = Vec::new();
            for alpha in [2.0, 3.0, 4.0] {
                let p = PotentialParams::new(alpha, 0.0)?;
                let y = optimal_shift(&p, FamilySelector::PRIMARY)?.y;
                for mut r in veff_rows(&p, y, 3.0, 301)? {
                    r.insert(0, fmt_f64(alpha));
                    rows.push(r);
                }
            }
            write_csv(sink(Some(&csv))?, &meta, &["alpha", "x", "re_veff", "im_veff"], &rows)?;
            let data = csv.file_name().unwrap().to_string_lossy().into_owned();
            std::fs::write(
                &script,
                format!(
                    "# generated by pt-sinh; reads only {data}\nset datafile separator ','\nset multiplot layout 1,2\nset xlabel 'x'\n\
                     plot for [a in '2 3 4'] '{data}' every ::1 using 2:(column(1) == a ? column(3) : NaN) with lines title 'alpha='.a\n\
                     plot for [a in '2 3 4'] '{data}' every ::1 using 2:(column(1) == a ? column(4) : NaN) with lines title 'alpha='.a\n\
                     unset multiplot\npause -1\n"
                ),
            )?;
            Ok(())
        }
        "fig3" | "fig4" => {
            let cfgs = figure_sweeps(&name);
            let args = SweepArgs { output: Some(csv.clone()), plot: Some(script.clone()), ..Default::default() };
            sweep_output(&args, meta, run_sweeps(cfgs))
        }
        "fig6" => {
            let cfgs = figure_sweeps("fig6");
            let betas: Vec<f64> = cfgs.iter().map(|c| c.beta).collect();
            let results = run_sweeps(cfgs);
            let mut rows = Vec::new();
            let mut first_err = None;
            for (beta, (tracks, err)) in betas.into_iter().zip(results) {
                for mut r in track_rows(&tracks, err.is_some()) {
                    r.insert(0, fmt_f64(beta));
                    rows.push(r);
                }
                if let Some(e) = err {
                    eprintln!("error: sweep at beta = {beta} stopped: {e}");
                    first_err.get_or_insert(e);
                }
            }
            let mut header = vec!["beta"];
            header.extend(EVENT_HEADER);
            write_csv(sink(Some(&csv))?, &meta, &header, &rows)?;
            let data = csv.file_name().unwrap().to_string_lossy().into_owned();
            std::fs::write(
                &script,
                format!(
                    "# generated by pt-sinh; reads only {data}\nset datafile separator ','\nset multiplot layout 2,2\nset key off\n\
                     do for [b in '0.5 0.25 0 -0.25'] {{\n  set title 'beta = '.b\n  \
                     plot '{data}' every ::1 using 4:(column(1) == b ? column(5) : NaN):3 with points pt 7 ps 0.3 lc variable\n}}\n\
                     unset multiplot\npause -1\n"
                ),
            )?;
            match first_err {
                Some(e) => Err(e.into()),
                None => Ok(()),
            }
        }
        other => Err(config_err(format!("unknown preset {other:?}; expected fig1..fig6 or table2..table4"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_config() {
        let config: toml::Table = "alpha = 3.0\nbeta = 0.5\nn = 200\n".parse().unwrap();
        let flags = SolveArgs { alpha: Some(2.0), ..Default::default() };
        let merged = layered(&flags, &config).unwrap();
        assert_eq!(merged.alpha, Some(2.0));
        assert_eq!(merged.beta, Some(0.5));
        assert_eq!(merged.n, Some(200));
    }

    #[test]
    fn unknown_config_key_is_rejected() {
        let config: toml::Table = "alpah = 3.0\n".parse().unwrap();
        let err = layered(&SolveArgs::default(), &config).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        let rows = vec![vec![fmt_f64(0.1), fmt_f64(1.0 / 3.0)]];
        write_csv(&mut buf, &["k = 1".into()], &["a", "b"], &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "# k = 1\na,b\n0.1,0.3333333333333333\n");
    }

    #[test]
    fn window_is_enforced() {
        let a = SolveArgs { alpha: Some(3.0), y: Some(0.5), ..Default::default() };
        assert_eq!(solve_rows(&a).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn grid_points_hit_the_end() {
        let xs = grid_points(1.0, 2.0, 0.1).unwrap();
        assert_eq!(xs.len(), 11);
        assert!((xs[10] - 2.0).abs() < 1e-12);
    }
}
