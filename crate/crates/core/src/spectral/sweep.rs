use crate::contour::FamilySelector;
use crate::discretization::{build_hamiltonian, default_x_max, GridPolicy};
use crate::error::{Error, Result};
use crate::potential::PotentialParams;
use crate::scalar::Real;

use super::{find_real_eigenvalues, solve_alpha_for_energy};

/// Levels tracked above the requested ones so the top level has a partner.
const SENTINELS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepConfig<T> {
    pub family: FamilySelector,
    pub beta: T,
    pub alpha_start: T,
    pub alpha_end: T,
    pub step: T,
    pub levels: usize,
    pub n: usize,
    pub x_max: Option<T>,
    pub scan_step: T,
    /// Width in `alpha` below which a lost pair is accepted as a merge.
    pub event_tol: T,
    /// Step at which an unresolved loss becomes [`Error::StepCollapse`].
    pub min_step: T,
    /// Lower end of every energy scan.
    pub e_floor: T,
}

impl<T: Real> SweepConfig<T> {
    pub fn new(family: FamilySelector, beta: T, alpha_start: T, alpha_end: T, step: T, levels: usize) -> Self {
        Self {
            family,
            beta,
            alpha_start,
            alpha_end,
            step,
            levels,
            n: 1000,
            x_max: None,
            scan_step: T::lit(0.05),
            event_tol: T::lit(1e-4),
            min_step: T::lit(1e-6),
            e_floor: T::lit(-20.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    /// Two real levels coalesce and leave the real axis as a complex pair.
    Merge,
    /// A complex pair returns to the real axis.
    Reappear,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackEvent<T> {
    pub kind: EventKind,
    pub alpha: T,
    pub energy: T,
    /// 1-based index of the other level; may exceed the number of reported tracks.
    pub partner: usize,
}

/// One real level followed in `alpha`.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelTrack<T> {
    pub family: FamilySelector,
    /// 1-based, ground state is 1.
    pub level_index: usize,
    pub points: Vec<(T, T)>,
    pub events: Vec<TrackEvent<T>>,
}

impl<T: Real> LevelTrack<T> {
    pub fn first_event(&self, kind: EventKind) -> Option<&TrackEvent<T>> {
        self.events.iter().find(|e| e.kind == kind)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum State<T> {
    Active,
    Dormant { partner: usize, energy: T },
    Retired,
}

/// Step-by-step tracker; partial tracks stay available if [`Continuation::run`] fails.
#[derive(Debug, Clone)]
pub struct Continuation<T> {
    cfg: SweepConfig<T>,
    policy: GridPolicy<T>,
    tracks: Vec<LevelTrack<T>>,
    states: Vec<State<T>>,
    alpha: T,
    roots: Vec<T>,
}

struct Matching<T> {
    roots: Vec<T>,
    assigned: Vec<Option<T>>,
    lost: Vec<usize>,
}

impl<T: Real> Continuation<T> {
    pub fn new(cfg: SweepConfig<T>) -> Result<Self> {
        if cfg.levels == 0 || !(cfg.step > T::zero()) || !(cfg.scan_step > T::zero()) {
            return Err(Error::Domain("levels, step and scan_step must be positive".into()));
        }
        let start = PotentialParams::new(cfg.alpha_start, cfg.beta)?;
        let end = PotentialParams::new(cfg.alpha_end, cfg.beta)?;
        let x_max = match cfg.x_max {
            Some(x) => x,
            None => {
                let y0 = crate::contour::optimal_shift(&start, cfg.family)?.y;
                let y1 = crate::contour::optimal_shift(&end, cfg.family)?.y;
                default_x_max(&start, cfg.family, y0)?.max(default_x_max(&end, cfg.family, y1)?)
            }
        };
        let policy = GridPolicy::new(cfg.n).with_x_max(x_max);
        let total = cfg.levels + SENTINELS;
        let roots = seed_levels(&start, cfg.family, &policy, cfg.e_floor, cfg.scan_step, total)?;
        let tracks = (0..total)
            .map(|k| LevelTrack {
                family: cfg.family,
                level_index: k + 1,
                points: vec![(cfg.alpha_start, roots[k])],
                events: Vec::new(),
            })
            .collect();
        Ok(Self {
            cfg,
            policy,
            tracks,
            states: vec![State::Active; total],
            alpha: cfg.alpha_start,
            roots,
        })
    }

    pub fn x_max(&self) -> T {
        self.policy.x_max.unwrap()
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn is_done(&self) -> bool {
        self.alpha == self.cfg.alpha_end
    }

    /// The requested tracks in their current state.
    pub fn tracks(&self) -> Vec<LevelTrack<T>> {
        self.tracks[..self.cfg.levels].to_vec()
    }

    pub fn run(&mut self) -> Result<Vec<LevelTrack<T>>> {
        while !self.is_done() {
            self.advance()?;
        }
        Ok(self.tracks())
    }

    fn roots_at(&self, alpha: T, lo: T, hi: T, step: T) -> Result<Vec<T>> {
        let p = PotentialParams::new(alpha, self.cfg.beta)?;
        let op = build_hamiltonian(&p, self.policy.resolve(&p, self.cfg.family)?)?;
        find_real_eigenvalues(&op, lo, hi, step)
    }

    fn predict(&self, k: usize, alpha: T) -> (T, T) {
        let pts = &self.tracks[k].points;
        let (a1, e1) = pts[pts.len() - 1];
        if pts.len() < 2 {
            return (e1, e1);
        }
        let (a0, e0) = pts[pts.len() - 2];
        if a1 == a0 {
            return (e1, e1);
        }
        (e1 + (e1 - e0) / (a1 - a0) * (alpha - a1), e1)
    }

    fn try_match(&self, alpha: T) -> Result<Matching<T>> {
        let active: Vec<usize> = (0..self.tracks.len()).filter(|&k| self.states[k] == State::Active).collect();
        let preds: Vec<(T, T)> = active.iter().map(|&k| self.predict(k, alpha)).collect();
        let mut lo = T::infinity();
        let mut hi = T::neg_infinity();
        let mut jump = T::zero();
        for &(p, last) in &preds {
            lo = lo.min(p).min(last);
            hi = hi.max(p).max(last);
            jump = jump.max((p - last).abs());
        }
        for s in &self.states {
            if let State::Dormant { energy, .. } = *s {
                lo = lo.min(energy);
                hi = hi.max(energy);
            }
        }
        let margin = T::lit(0.5) + jump * T::lit(2.0);
        let lo = (lo - margin).max(self.cfg.e_floor);
        let hi = hi + margin;
        let mut step = self.cfg.scan_step;
        for w in preds.windows(2) {
            let gap = (w[1].0 - w[0].0).abs();
            if gap > T::zero() {
                step = step.min(gap / T::lit(8.0));
            }
        }
        let step = step.max(T::lit(1e-4));
        let roots = self.roots_at(alpha, lo, hi, step)?;
        let mut assigned = vec![None; self.tracks.len()];
        let mut lost = Vec::new();
        let mut floor = T::neg_infinity();
        for (&k, &(pred, last)) in active.iter().zip(&preds) {
            let tol = (pred - last).abs() * T::lit(0.5) + T::lit(0.01) * (T::one() + last.abs());
            let best = roots
                .iter()
                .copied()
                .filter(|&r| r > floor)
                .min_by(|a, b| (*a - pred).abs().partial_cmp(&(*b - pred).abs()).unwrap());
            match best {
                Some(r) if (r - pred).abs() <= tol => {
                    assigned[k] = Some(r);
                    floor = r;
                }
                _ => lost.push(k),
            }
        }
        Ok(Matching { roots, assigned, lost })
    }

    /// Groups lost tracks into merging pairs; `None` if some loss is unexplained.
    fn classify(&self, lost: &[usize]) -> Option<Vec<(usize, usize)>> {
        let top = (0..self.tracks.len()).rev().find(|&k| self.states[k] == State::Active);
        let mut pairs = Vec::new();
        let mut i = 0;
        while i < lost.len() {
            let k = lost[i];
            if i + 1 < lost.len() && lost[i + 1] == k + 1 {
                pairs.push((k, k + 1));
                i += 2;
            } else if Some(k) == top && k + 1 == self.tracks.len() {
                pairs.push((k, k + 1));
                i += 1;
            } else {
                return None;
            }
        }
        Some(pairs)
    }

    /// Extremal `alpha` of the parabola `alpha(E)` joining two real roots `e_a < e_b` at `alpha_real`.
    fn turning_point(&self, alpha_real: T, alpha_complex: T, e_a: T, e_b: T) -> (T, T) {
        let eval = |e: T| -> T {
            solve_alpha_for_energy(self.cfg.beta, self.cfg.family, &self.policy, e, alpha_real, alpha_complex)
                .map(|a| (a - alpha_complex).abs())
                .unwrap_or((alpha_real - alpha_complex).abs())
        };
        let g = T::lit(0.618_033_988_749_894_8);
        let (mut a, mut b) = (e_a, e_b);
        let mut c = b - (b - a) * g;
        let mut d = a + (b - a) * g;
        let (mut fc, mut fd) = (eval(c), eval(d));
        let tol = T::lit(1e-9) * (T::one() + e_a.abs());
        for _ in 0..80 {
            if b - a <= tol {
                break;
            }
            if fc < fd {
                b = d;
                d = c;
                fd = fc;
                c = b - (b - a) * g;
                fc = eval(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + (b - a) * g;
                fd = eval(d);
            }
        }
        let e = (a + b) / T::lit(2.0);
        let dist = eval(e);
        let dir = if alpha_complex > alpha_real { T::one() } else { -T::one() };
        (alpha_complex - dir * dist, e)
    }

    fn partner_energy(&self, roots: &[T], e: T) -> Option<T> {
        roots.iter().copied().find(|&r| r > e)
    }

    fn advance(&mut self) -> Result<()> {
        let dir = if self.cfg.alpha_end > self.alpha { T::one() } else { -T::one() };
        let mut step = self.cfg.step;
        loop {
            let mut target = self.alpha + dir * step;
            if (target - self.cfg.alpha_end) * dir >= T::zero() {
                target = self.cfg.alpha_end;
            }
            let m = self.try_match(target)?;
            if m.lost.is_empty() {
                self.commit(target, &m);
                self.detect_reappearance(target)?;
                return Ok(());
            }
            if step > self.cfg.event_tol {
                step = step / T::lit(2.0);
                continue;
            }
            let sentinel = |k: &usize| *k >= self.cfg.levels;
            let pairs = self.classify(&m.lost);
            if pairs.is_none() && step > self.cfg.min_step {
                step = step / T::lit(2.0);
                continue;
            }
            match pairs {
                Some(pairs) => {
                    for (a, b) in pairs {
                        let e_a = self.tracks[a].points.last().unwrap().1;
                        let e_b = if b < self.tracks.len() {
                            self.tracks[b].points.last().unwrap().1
                        } else {
                            match self.partner_energy(&self.roots, e_a) {
                                Some(e) => e,
                                None => e_a,
                            }
                        };
                        let (alpha_star, e_star) = self.turning_point(self.alpha, target, e_a, e_b);
                        for (k, other) in [(a, b), (b, a)] {
                            if k >= self.tracks.len() {
                                continue;
                            }
                            let tr = &mut self.tracks[k];
                            tr.points.push((alpha_star, e_star));
                            tr.events.push(TrackEvent {
                                kind: EventKind::Merge,
                                alpha: alpha_star,
                                energy: e_star,
                                partner: other + 1,
                            });
                            self.states[k] = State::Dormant { partner: other, energy: e_star };
                        }
                    }
                }
                None if m.lost.iter().all(sentinel) => {
                    for &k in &m.lost {
                        self.states[k] = State::Retired;
                    }
                }
                None => {
                    let level = m.lost.iter().copied().find(|k| !sentinel(k)).unwrap() + 1;
                    return Err(Error::StepCollapse {
                        alpha: self.alpha.to_f64_lossy(),
                        level,
                        min_step: self.cfg.min_step.to_f64_lossy(),
                    });
                }
            }
            self.commit(target, &m);
            return Ok(());
        }
    }

    fn commit(&mut self, alpha: T, m: &Matching<T>) {
        for (k, r) in m.assigned.iter().enumerate() {
            if let (Some(r), State::Active) = (r, self.states[k]) {
                self.tracks[k].points.push((alpha, *r));
            }
        }
        self.roots = m.roots.clone();
        self.alpha = alpha;
    }

    fn detect_reappearance(&mut self, alpha: T) -> Result<()> {
        let prev_alpha = self.tracks.iter().flat_map(|t| t.points.iter().map(|p| p.0)).fold(self.alpha, |acc, a| {
            if a != alpha && (a - alpha).abs() < (acc - alpha).abs() || acc == alpha {
                a
            } else {
                acc
            }
        });
        let n = self.tracks.len();
        for a in 0..n {
            let State::Dormant { partner, energy } = self.states[a] else { continue };
            if partner < a {
                continue;
            }
            let current = |k: usize| -> Option<T> {
                match self.states[k] {
                    State::Active => self.tracks[k].points.last().filter(|p| p.0 == alpha).map(|p| p.1),
                    _ => None,
                }
            };
            let below = (0..a).rev().find_map(current);
            let above = (partner + 1..n).find_map(current);
            let lower = below.unwrap_or(self.cfg.e_floor);
            let upper = above.unwrap_or(energy + (energy - lower).abs().max(T::one()));
            let taken: Vec<T> = (0..n).filter_map(current).collect();
            let free: Vec<T> = self
                .roots
                .iter()
                .copied()
                .filter(|&r| r > lower && r < upper && !taken.contains(&r))
                .collect();
            if free.len() < 2 {
                continue;
            }
            let (i, _) = free
                .windows(2)
                .enumerate()
                .min_by(|x, y| (x.1[1] - x.1[0]).partial_cmp(&(y.1[1] - y.1[0])).unwrap())
                .unwrap();
            let (e_a, e_b) = (free[i], free[i + 1]);
            let (alpha_star, e_star) = self.turning_point(alpha, prev_alpha, e_a, e_b);
            for (k, other, e) in [(a, partner, e_a), (partner, a, e_b)] {
                if k >= n {
                    continue;
                }
                let tr = &mut self.tracks[k];
                tr.events.push(TrackEvent {
                    kind: EventKind::Reappear,
                    alpha: alpha_star,
                    energy: e_star,
                    partner: other + 1,
                });
                tr.points.push((alpha_star, e_star));
                tr.points.push((alpha, e));
                self.states[k] = State::Active;
            }
        }
        Ok(())
    }
}

fn seed_levels<T: Real>(
    p: &PotentialParams<T>,
    family: FamilySelector,
    policy: &GridPolicy<T>,
    e_floor: T,
    scan_step: T,
    count: usize,
) -> Result<Vec<T>> {
    let op = build_hamiltonian(p, policy.resolve(p, family)?)?;
    let mut hi = T::lit(20.0);
    loop {
        let roots = find_real_eigenvalues(&op, e_floor, hi, scan_step)?;
        if roots.len() >= count {
            return Ok(roots[..count].to_vec());
        }
        if hi > T::lit(1e4) {
            return Err(Error::Domain(format!("only {} real levels found below {hi}", roots.len())));
        }
        hi = hi * T::lit(2.0);
    }
}

/// Tracks the lowest `cfg.levels` real levels from `alpha_start` to `alpha_end`.
pub fn continuation_sweep<T: Real>(cfg: SweepConfig<T>) -> Result<Vec<LevelTrack<T>>> {
    Continuation::new(cfg)?.run()
}

/// The level just below the lowest pair that merges at some `alpha >= alpha_min`.
///
/// Every level beneath it stays real over the whole range. `None` when no merge is recorded
/// there or the lowest pair starts at the ground state.
pub fn special_level<T: Real>(tracks: &[LevelTrack<T>], alpha_min: T) -> Option<usize> {
    tracks
        .iter()
        .flat_map(|t| t.events.iter().map(move |e| (t.level_index.min(e.partner), e)))
        .filter(|(_, e)| e.kind == EventKind::Merge && e.alpha >= alpha_min)
        .map(|(lower, _)| lower)
        .min()
        .and_then(|lower| lower.checked_sub(1).filter(|&k| k > 0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn track(level: usize, events: Vec<(EventKind, f64, usize)>) -> LevelTrack<f64> {
        LevelTrack {
            family: FamilySelector::PRIMARY,
            level_index: level,
            points: vec![(2.0, level as f64)],
            events: events
                .into_iter()
                .map(|(kind, alpha, partner)| TrackEvent { kind, alpha, energy: 0.0, partner })
                .collect(),
        }
    }

    #[test]
    fn special_level_is_below_the_lowest_merging_pair() {
        let m = EventKind::Merge;
        let tracks = vec![
            track(1, vec![]),
            track(2, vec![]),
            track(3, vec![(m, 0.98, 4)]),
            track(4, vec![(m, 1.18, 5), (EventKind::Reappear, 1.01, 5), (m, 0.98, 3)]),
            track(5, vec![(m, 1.18, 4)]),
            track(6, vec![(m, 1.27, 7)]),
            track(7, vec![(m, 1.27, 6), (m, 1.00001, 8)]),
        ];
        assert_eq!(special_level(&tracks, 1.0), Some(3));
        assert_eq!(special_level(&tracks, 0.9), Some(2));
        assert_eq!(special_level(&tracks, 1.3), None);
    }

    #[test]
    fn short_sweep_keeps_every_level() {
        let mut cfg = SweepConfig::new(FamilySelector::PRIMARY, 0.0, 2.0, 2.1, 0.05, 3);
        cfg.n = 300;
        let tracks = continuation_sweep(cfg).unwrap();
        assert_eq!(tracks.len(), 3);
        for t in &tracks {
            assert_eq!(t.points.last().unwrap().0, 2.1);
            assert!(t.events.is_empty());
        }
        assert!(tracks[0].points[0].1 < tracks[1].points[0].1);
    }

    #[test]
    fn bad_config_is_rejected() {
        let cfg = SweepConfig::new(FamilySelector::PRIMARY, 0.0, 2.0, 1.0, 0.0, 3);
        assert!(matches!(Continuation::new(cfg), Err(Error::Domain(_))));
    }
}
