//! Monte Carlo estimates of coupling and hitting times, and the scaling
//! fits built on them.

use rand::seq::index::sample;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::circle::CircleSim;
use crate::engine::clock::{ClockField, Dir};
use crate::engine::hitting::{circle_hitting, first_hitting, HitPredicate};
use crate::engine::obep::{simulate_obep, ObepParams};
use crate::engine::path::{extremal_coupling_time, HeightEvent, HeightSim};
use crate::error::{Error, Result};
use crate::lattice_path::{eta_minus, to_path};
use crate::mappings::{default_tag, obep_view, CircleZrpTracker, SegmentZrpTracker};
use crate::state::{special_configs, CircleConfig, SegmentConfig};

/// Largest tolerated censored fraction.
pub const CENSOR_LIMIT: f64 = 0.05;

/// One replicate: `value` is `None` when censored.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub replicate: usize,
    pub seed: u64,
    pub value: Option<f64>,
    /// Horizon the replicate was last run to.
    pub horizon: f64,
}

/// Summary of replicate values; censored values count as `+∞` in the
/// quantiles, reported as `None`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub count: usize,
    pub uncensored: usize,
    /// Mean of the uncensored values.
    pub mean: Option<f64>,
    pub std_err: Option<f64>,
    pub q05: Option<f64>,
    pub q50: Option<f64>,
    pub q95: Option<f64>,
    pub censored_fraction: f64,
}

impl SummaryStats {
    pub fn from_values(values: &[Option<f64>]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::TooFewPoints { need: 1, have: 0 });
        }
        let mut done: Vec<f64> = values.iter().flatten().copied().collect();
        done.sort_by(f64::total_cmp);
        let count = values.len();
        let m = done.len();
        let mean = (m > 0).then(|| done.iter().sum::<f64>() / m as f64);
        let std_err = mean.filter(|_| m > 1).map(|mu| {
            let var = done.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / (m - 1) as f64;
            (var / m as f64).sqrt()
        });
        let at = |i: usize| if i < m { done[i] } else { f64::INFINITY };
        let quantile = |q: f64| {
            let h = (count - 1) as f64 * q;
            let lo = h.floor() as usize;
            let frac = h - lo as f64;
            let v = if frac == 0.0 { at(lo) } else { at(lo) + frac * (at(lo + 1) - at(lo)) };
            v.is_finite().then_some(v)
        };
        Ok(Self {
            count,
            uncensored: m,
            mean,
            std_err,
            q05: quantile(0.05),
            q50: quantile(0.5),
            q95: quantile(0.95),
            censored_fraction: (count - m) as f64 / count as f64,
        })
    }

    pub fn from_samples(samples: &[Sample]) -> Result<Self> {
        Self::from_values(&samples.iter().map(|s| s.value).collect::<Vec<_>>())
    }
}

/// Seed of replicate `r` at grid point `block`: blocks are `2^32` apart.
pub fn replicate_seed(base: u64, block: usize, r: usize) -> u64 {
    base.wrapping_add((block as u64) << 32).wrapping_add(r as u64)
}

/// Initial horizon, then doubled while more than `trigger` of the
/// replicates are censored, at most `max_doublings` times.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HorizonPolicy {
    pub initial: f64,
    pub max_doublings: u32,
    pub trigger: f64,
}

impl HorizonPolicy {
    pub fn new(initial: f64) -> Self {
        Self { initial, max_doublings: 3, trigger: 0.01 }
    }

    pub fn fixed(initial: f64) -> Self {
        Self { initial, max_doublings: 0, trigger: 1.0 }
    }
}

/// Runs `run(seed, horizon)` for every replicate in parallel; censored
/// replicates are rerun under the horizon policy. Results are in
/// replicate order.
pub fn run_replicates(
    reps: usize,
    base: u64,
    block: usize,
    policy: HorizonPolicy,
    run: impl Fn(u64, f64) -> Option<f64> + Sync,
) -> Vec<Sample> {
    let mut samples: Vec<Sample> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let seed = replicate_seed(base, block, r);
            Sample { replicate: r, seed, value: run(seed, policy.initial), horizon: policy.initial }
        })
        .collect();
    let mut horizon = policy.initial;
    for _ in 0..policy.max_doublings {
        let censored = samples.iter().filter(|s| s.value.is_none()).count();
        if censored as f64 <= policy.trigger * reps as f64 {
            break;
        }
        horizon *= 2.0;
        samples.par_iter_mut().filter(|s| s.value.is_none()).for_each(|s| {
            s.value = run(s.seed, horizon);
            s.horizon = horizon;
        });
    }
    samples
}

/// Replicates and their summary at one grid point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub n: usize,
    pub k: usize,
    pub p: f64,
    pub statistic: String,
    pub samples: Vec<Sample>,
    pub stats: SummaryStats,
}

/// `10 N² log N`.
pub fn default_diffusive_horizon(n: usize) -> f64 {
    let n = n as f64;
    10.0 * n * n * n.ln().max(1.0)
}

fn check_nk(n: usize, k: usize) -> Result<()> {
    if 2 * k <= n || k > n {
        return Err(Error::Parameter(format!("need N/2 < k <= N, got N={n}, k={k}")));
    }
    Ok(())
}

/// Coupling time of `η⁺` and `η⁻` under one clock field per replicate.
pub fn coupling_time(n: usize, k: usize, p: f64, reps: usize, seed: u64, block: usize, policy: HorizonPolicy) -> Result<GridResult> {
    check_nk(n, k)?;
    if reps < 2 {
        return Err(Error::Parameter("need at least 2 replicates".into()));
    }
    ClockField::fep(p, 0)?;
    let samples = run_replicates(reps, seed, block, policy, |s, h| {
        let field = ClockField::fep(p, s).expect("p validated");
        extremal_coupling_time(n, k, &field, h)
    });
    let stats = SummaryStats::from_samples(&samples)?;
    if stats.censored_fraction > CENSOR_LIMIT {
        return Err(Error::Censoring { fraction: stats.censored_fraction, limit: CENSOR_LIMIT });
    }
    Ok(GridResult { n, k, p, statistic: "coupling-time".into(), samples, stats })
}

/// Symmetric coupling time with the default horizon `10 N² log N`.
pub fn coupling_time_sfep(n: usize, k: usize, reps: usize, seed: u64) -> Result<GridResult> {
    coupling_time(n, k, 0.5, reps, seed, 0, HorizonPolicy::new(default_diffusive_horizon(n)))
}

/// Fraction of replicates with `η⁺_t ≠ η⁻_t` and its standard error.
/// A censored replicate counts as uncoupled at any `t` up to its horizon.
pub fn uncoupled_fraction(samples: &[Sample], t: f64) -> Result<(f64, f64)> {
    let mut bad = 0usize;
    for s in samples {
        match s.value {
            Some(v) if v <= t => {}
            Some(_) => bad += 1,
            None if t <= s.horizon => bad += 1,
            None => return Err(Error::Parameter(format!("replicate {} censored before t = {t}", s.replicate))),
        }
    }
    let m = samples.len() as f64;
    let f = bad as f64 / m;
    Ok((f, (f * (1.0 - f) / m).sqrt()))
}

/// Initial conditions for hitting-time studies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Start {
    /// `ξ⁻` on the segment.
    Minus,
    /// `ξ⁺` on the segment.
    Plus,
    /// The element of `H_{N,k}` with holes at `1, 3, ..., 2(N-k)-1`.
    HSample,
    /// `k` consecutive particles on the circle: one ergodic region.
    CircleBlock,
}

impl Start {
    pub fn segment_config(self, n: usize, k: usize) -> Result<SegmentConfig> {
        let s = special_configs(n, k)?;
        match self {
            Start::Minus => Ok(s.minus),
            Start::Plus => Ok(s.plus),
            Start::HSample => Ok(s.h_sample),
            Start::CircleBlock => Err(Error::Parameter("circle start used on the segment".into())),
        }
    }

    pub fn circle_config(self, n: usize, k: usize) -> Result<CircleConfig> {
        match self {
            Start::CircleBlock => CircleConfig::new((0..n).map(|x| x < k).collect()),
            _ => Err(Error::Parameter("segment start used on the circle".into())),
        }
    }
}

/// Hitting time of the ergodic component from `start`. Segment starts use
/// the clock field with right rate `p`; the circle is symmetric.
pub fn hitting_time(
    start: Start,
    n: usize,
    k: usize,
    p: f64,
    reps: usize,
    seed: u64,
    block: usize,
    policy: HorizonPolicy,
) -> Result<GridResult> {
    check_nk(n, k)?;
    if reps < 2 {
        return Err(Error::Parameter("need at least 2 replicates".into()));
    }
    let samples = match start {
        Start::CircleBlock => {
            if p != 0.5 {
                return Err(Error::Parameter("circle dynamics are symmetric; use p = 0.5".into()));
            }
            let c0 = start.circle_config(n, k)?;
            run_replicates(reps, seed, block, policy, |s, h| circle_hitting(&c0, s, h).time)
        }
        _ => {
            ClockField::fep(p, 0)?;
            let p0 = to_path(&start.segment_config(n, k)?)?;
            run_replicates(reps, seed, block, policy, |s, h| {
                let field = ClockField::fep(p, s).expect("p validated");
                first_hitting(&p0, &field, HitPredicate::ReachErgodic, h).time
            })
        }
    };
    let stats = SummaryStats::from_samples(&samples)?;
    Ok(GridResult { n, k, p, statistic: "hitting-time".into(), samples, stats })
}

/// Site jump `(from, to)` (1-based) made by particle `coord` in a path
/// event.
pub fn particle_jump(ev: &HeightEvent) -> (usize, usize) {
    let i = ev.coord as i64;
    let before = match ev.dir {
        Dir::Up => ev.height - 2,
        Dir::Down => ev.height + 2,
    };
    let x = ((before + 3 * i - 1) / 2) as usize;
    match ev.dir {
        Dir::Up => (x, x + 1),
        Dir::Down => (x, x - 1),
    }
}

/// First entrance times into the ergodic component and into "no empty
/// pile" for the image zero-range process, along one trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HitAgreement {
    pub tau_ergodic: Option<f64>,
    pub tau_zrp: Option<f64>,
}

impl HitAgreement {
    pub fn agrees(&self) -> bool {
        self.tau_ergodic == self.tau_zrp
    }
}

/// Runs the segment FEP from `cfg` and feeds every jump to the
/// zero-range tracker.
pub fn hit_agreement_segment(cfg: &SegmentConfig, p: f64, seed: u64, horizon: f64) -> Result<HitAgreement> {
    let field = ClockField::fep(p, seed)?;
    let p0 = to_path(cfg)?;
    let mut sim = HeightSim::fep(&field, &p0);
    let mut tracker = SegmentZrpTracker::new(cfg);
    let mut out = HitAgreement { tau_ergodic: None, tau_zrp: None };
    if sim.is_ergodic() {
        out.tau_ergodic = Some(0.0);
    }
    if tracker.all_piles_occupied() {
        out.tau_zrp = Some(0.0);
    }
    while out.tau_ergodic.is_none() || out.tau_zrp.is_none() {
        let Some(ev) = sim.step(horizon) else { break };
        let (from, to) = particle_jump(&ev);
        tracker.apply(from, to)?;
        if out.tau_ergodic.is_none() && sim.is_ergodic() {
            out.tau_ergodic = Some(ev.t);
        }
        if out.tau_zrp.is_none() && tracker.all_piles_occupied() {
            out.tau_zrp = Some(ev.t);
        }
    }
    Ok(out)
}

/// Circle version with the tagged-hole zero-range process on `T_{N-k}`.
pub fn hit_agreement_circle(cfg: &CircleConfig, seed: u64, horizon: f64) -> Result<HitAgreement> {
    let tag = default_tag(cfg).ok_or_else(|| Error::InvalidConfig("circle without holes".into()))?;
    let mut sim = CircleSim::new(cfg, seed);
    let mut tracker = CircleZrpTracker::new(cfg, tag)?;
    let mut out = HitAgreement { tau_ergodic: None, tau_zrp: None };
    if sim.is_ergodic() {
        out.tau_ergodic = Some(0.0);
    }
    if tracker.all_piles_occupied() {
        out.tau_zrp = Some(0.0);
    }
    while out.tau_ergodic.is_none() || out.tau_zrp.is_none() {
        let Some(j) = sim.step(horizon) else { break };
        tracker.apply(j.from, j.to)?;
        if out.tau_ergodic.is_none() && sim.is_ergodic() {
            out.tau_ergodic = Some(j.t);
        }
        if out.tau_zrp.is_none() && tracker.all_piles_occupied() {
            out.tau_zrp = Some(j.t);
        }
    }
    Ok(out)
}

/// Uniformly random configuration with `k` particles on `n` sites.
pub fn random_occupation(n: usize, k: usize, seed: u64) -> Vec<bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut occ = vec![false; n];
    for x in sample(&mut rng, n, k) {
        occ[x] = true;
    }
    occ
}

/// Comparison of the OBEP read off `η⁻` with a direct OBEP run on the
/// same clock field, up to the time `η⁻` enters the ergodic component.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObepRingCheck {
    pub tau: Option<f64>,
    pub events: usize,
    pub mismatches: usize,
}

pub fn obep_ring_check(n: usize, k: usize, p: f64, seed: u64, horizon: f64) -> Result<ObepRingCheck> {
    check_nk(n, k)?;
    let field = ClockField::fep(p, seed)?;
    let p0 = eta_minus(n, k);
    let mut sim = HeightSim::fep(&field, &p0).with_recording();
    let tau = sim.run_until(horizon, |s, _| s.is_ergodic());
    let until = tau.unwrap_or(horizon);
    let (_, from_path) = obep_view(&p0, &sim.take_recorded())?;
    let (direct, _) = simulate_obep(&vec![false; k - 1], &ObepParams::right_entry(1.0 - p)?, seed, until)?;
    let a: Vec<_> = from_path.events.iter().filter(|e| e.t <= until).collect();
    let b: Vec<_> = direct.events.iter().filter(|e| e.t <= until).collect();
    let mut mismatches = a.len().abs_diff(b.len());
    mismatches += a.iter().zip(&b).filter(|(x, y)| x != y).count();
    Ok(ObepRingCheck { tau, events: a.len(), mismatches })
}

/// Scaling statistics over a grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitKind {
    /// max/min of mean coupling time over `N² log(N-k)`.
    SfepRatio,
    /// Least-squares slope of `log(mean)` against `N-k`.
    AfepSlope,
    /// max/min of mean hitting time over `N² log N`.
    CircleRatio,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitPoint {
    pub n: usize,
    pub k: usize,
    pub x: f64,
    pub y: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub kind: FitKind,
    pub points: Vec<FitPoint>,
    /// max/min ratio, or the slope.
    pub statistic: f64,
    pub slope_se: Option<f64>,
    pub intercept: Option<f64>,
    /// `log(p/q)` for the slope fit.
    pub target: Option<f64>,
}

pub fn scaling_fit(kind: FitKind, grid: &[GridResult]) -> Result<FitResult> {
    let usable: Vec<&GridResult> =
        grid.iter().filter(|g| g.stats.mean.is_some() && g.stats.censored_fraction <= CENSOR_LIMIT).collect();
    if usable.len() < 3 {
        return Err(Error::TooFewPoints { need: 3, have: usable.len() });
    }
    let mean = |g: &GridResult| g.stats.mean.expect("filtered");
    match kind {
        FitKind::SfepRatio | FitKind::CircleRatio => {
            let points: Vec<FitPoint> = usable
                .iter()
                .map(|g| {
                    let nn = (g.n * g.n) as f64;
                    let scale = match kind {
                        FitKind::SfepRatio => nn * ((g.n - g.k) as f64).ln(),
                        _ => nn * (g.n as f64).ln(),
                    };
                    FitPoint { n: g.n, k: g.k, x: g.n as f64, y: mean(g) / scale }
                })
                .collect();
            let hi = points.iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max);
            let lo = points.iter().map(|p| p.y).fold(f64::INFINITY, f64::min);
            Ok(FitResult { kind, points, statistic: hi / lo, slope_se: None, intercept: None, target: None })
        }
        FitKind::AfepSlope => {
            let points: Vec<FitPoint> =
                usable.iter().map(|g| FitPoint { n: g.n, k: g.k, x: (g.n - g.k) as f64, y: mean(g).ln() }).collect();
            let (slope, intercept, se) = least_squares(&points)?;
            let p = usable[0].p;
            Ok(FitResult { kind, points, statistic: slope, slope_se: Some(se), intercept: Some(intercept), target: Some((p / (1.0 - p)).ln()) })
        }
    }
}

/// Ordinary least squares `y = a + b x`, returning `(b, a, se(b))`.
pub fn least_squares(points: &[FitPoint]) -> Result<(f64, f64, f64)> {
    let m = points.len();
    if m < 3 {
        return Err(Error::TooFewPoints { need: 3, have: m });
    }
    let mf = m as f64;
    let xm = points.iter().map(|p| p.x).sum::<f64>() / mf;
    let ym = points.iter().map(|p| p.y).sum::<f64>() / mf;
    let sxx: f64 = points.iter().map(|p| (p.x - xm).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::TooFewPoints { need: 2, have: 1 });
    }
    let sxy: f64 = points.iter().map(|p| (p.x - xm) * (p.y - ym)).sum();
    let b = sxy / sxx;
    let a = ym - b * xm;
    let rss: f64 = points.iter().map(|p| (p.y - a - b * p.x).powi(2)).sum();
    let se = (rss / (mf - 2.0) / sxx).sqrt();
    Ok((b, a, se))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_with_censoring() {
        let s = SummaryStats::from_values(&[Some(1.0), Some(3.0), None, Some(2.0)]).unwrap();
        assert_eq!(s.mean, Some(2.0));
        assert_eq!(s.censored_fraction, 0.25);
        assert_eq!(s.q50, Some(2.5));
        assert_eq!(s.q95, None);
        assert!(s.q05.unwrap() >= 1.0);
        let all = SummaryStats::from_values(&[None, None]).unwrap();
        assert_eq!(all.mean, None);
        assert!(SummaryStats::from_values(&[]).is_err());
    }

    #[test]
    fn quantiles_type_seven() {
        let v: Vec<Option<f64>> = (1..=10).map(|x| Some(x as f64)).collect();
        let s = SummaryStats::from_values(&v).unwrap();
        assert!((s.q05.unwrap() - 1.45).abs() < 1e-12);
        assert!((s.q50.unwrap() - 5.5).abs() < 1e-12);
        assert!((s.q95.unwrap() - 9.55).abs() < 1e-12);
    }

    #[test]
    fn coupling_is_deterministic() {
        let a = coupling_time_sfep(8, 6, 4, 11).unwrap();
        let b = coupling_time_sfep(8, 6, 4, 11).unwrap();
        assert_eq!(a, b);
        assert!(a.stats.mean.unwrap() > 0.0);
    }

    #[test]
    fn full_segment_couples_at_zero() {
        let r = coupling_time_sfep(6, 6, 3, 1).unwrap();
        assert!(r.samples.iter().all(|s| s.value == Some(0.0)));
    }

    #[test]
    fn ergodic_start_hits_at_zero() {
        let p0 = to_path(&"1101101".parse().unwrap()).unwrap();
        let field = ClockField::fep(0.5, 3).unwrap();
        assert_eq!(first_hitting(&p0, &field, HitPredicate::ReachErgodic, 10.0).time, Some(0.0));
    }

    #[test]
    fn hit_agreement_on_random_starts() {
        for seed in 0..200 {
            let occ = random_occupation(14, 9, seed);
            let seg = SegmentConfig::new(occ.clone()).unwrap();
            let o = hit_agreement_segment(&seg, 0.5, seed, 1e5).unwrap();
            assert!(o.agrees(), "{seg} {o:?}");
            let circ = CircleConfig::new(occ).unwrap();
            let o = hit_agreement_circle(&circ, seed, 1e5).unwrap();
            assert!(o.agrees(), "{circ} {o:?}");
        }
    }

    #[test]
    fn obep_rings_match() {
        for seed in 0..20 {
            let c = obep_ring_check(12, 8, 0.6, seed, 1e5).unwrap();
            assert!(c.tau.is_some());
            assert_eq!(c.mismatches, 0, "{c:?}");
        }
    }

    #[test]
    fn constant_data_has_zero_slope() {
        let pts: Vec<FitPoint> = (0..4).map(|i| FitPoint { n: 0, k: 0, x: i as f64, y: 2.0 }).collect();
        let (b, a, se) = least_squares(&pts).unwrap();
        assert_eq!((b, a, se), (0.0, 2.0, 0.0));
    }

    #[test]
    fn fit_needs_three_points() {
        let g = coupling_time_sfep(8, 6, 3, 1).unwrap();
        assert!(matches!(scaling_fit(FitKind::SfepRatio, &[g.clone(), g]), Err(Error::TooFewPoints { .. })));
    }

    #[test]
    fn uncoupled_fraction_counts() {
        let s = vec![
            Sample { replicate: 0, seed: 0, value: Some(1.0), horizon: 10.0 },
            Sample { replicate: 1, seed: 1, value: Some(5.0), horizon: 10.0 },
            Sample { replicate: 2, seed: 2, value: None, horizon: 10.0 },
        ];
        assert_eq!(uncoupled_fraction(&s, 2.0).unwrap().0, 2.0 / 3.0);
        assert!(uncoupled_fraction(&s, 20.0).is_err());
    }
}
