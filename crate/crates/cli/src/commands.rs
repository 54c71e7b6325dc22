//! Subcommand handlers.

use std::fmt;
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use fep_core::engine::circle::simulate_circle;
use fep_core::engine::clock::ClockField;
use fep_core::engine::obep::{simulate_obep, ObepParams};
use fep_core::engine::path::simulate_path;
use fep_core::exact::aldous_brown::aldous_brown_check;
use fep_core::exact::ensembles::{correlation_ratio_canonical, equivalence_error};
use fep_core::exact::matrix::state_label;
use fep_core::exact::spectral::spectrum;
use fep_core::exact::{
    build_generator, correlation_ratio_gc, eigencheck_a1, eigencheck_a1_lifted, formula_stationary,
    kernel_stationary, tv_distance, A1Variant, Domain, Family,
};
use fep_core::experiments::{
    coupling_time, default_diffusive_horizon, hitting_time, scaling_fit, FitKind, FitResult, GridResult,
    HorizonPolicy, Start, SummaryStats,
};
use fep_core::lattice_path::to_path;
use fep_core::state::{special_configs, CircleConfig, SegmentConfig};

use crate::args::*;
use crate::checks::{self, Outcome};
use crate::config::{config_err, family_name, flags, resolve, system_overlay};
use crate::output::OutDir;
use crate::plot;

/// A failed property check; maps to exit code 1.
#[derive(Debug)]
pub struct CheckFailed(pub String);

impl fmt::Display for CheckFailed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "check failed: {}", self.0)
    }
}

impl std::error::Error for CheckFailed {}

/// Settings shared by every subcommand.
pub struct Ctx<'a> {
    pub config: Option<&'a Path>,
    pub out: Option<&'a Path>,
    pub verbose: u8,
    pub quiet: bool,
}

impl Ctx<'_> {
    fn say(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            println!("{}", msg.as_ref());
        }
    }

    fn debug(&self, msg: impl AsRef<str>) {
        if self.verbose > 0 {
            eprintln!("{}", msg.as_ref());
        }
    }
}

pub fn run(cmd: Command, ctx: &Ctx) -> Result<()> {
    match cmd {
        Command::Verify(a) => verify(a, ctx),
        Command::Exact(c) => match c {
            ExactCmd::Tv(a) => exact_tv(a, ctx),
            ExactCmd::Stationary(a) => exact_stationary(a, ctx),
            ExactCmd::Gap(a) => exact_gap(a, ctx),
            ExactCmd::Eigen(a) => exact_eigen(a, ctx),
            ExactCmd::Equivalence(a) => exact_equivalence(a, ctx),
            ExactCmd::AldousBrown(a) => exact_aldous_brown(a, ctx),
        },
        Command::Simulate(c) => match c {
            SimulateCmd::Path(a) => simulate_path_cmd(a, ctx),
            SimulateCmd::Circle(a) => simulate_circle_cmd(a, ctx),
            SimulateCmd::Obep(a) => simulate_obep_cmd(a, ctx),
        },
        Command::Hit(a) => hit(a, ctx),
        Command::Sweep(c) => match c {
            SweepCmd::SfepRatio(a) => sweep_ratio(a, FitKind::SfepRatio, ctx),
            SweepCmd::AfepSlope(a) => sweep_slope(a, ctx),
            SweepCmd::CircleRatio(a) => sweep_ratio(a, FitKind::CircleRatio, ctx),
        },
        Command::Plotdata(a) => plot::plotdata(&a.results, ctx.out, ctx.quiet),
    }
}

fn params<P: for<'de> Deserialize<'de>>(ctx: &Ctx, overlay: Map<String, Value>) -> Result<P> {
    Ok(resolve::<P>(ctx.config, overlay)?.0)
}

fn with_system(ctx: &Ctx, args: impl Serialize, sys: &SystemArgs) -> Result<Map<String, Value>> {
    let mut overlay = flags(args);
    let fam = family_name(sys.family.as_deref(), ctx.config)?;
    let s = system_overlay(fam.as_deref(), sys.n, sys.k, sys.m, sys.p)?;
    if !s.is_empty() {
        overlay.insert("system".into(), Value::Object(s));
    }
    Ok(overlay)
}

fn require_system(s: Option<Family>) -> Result<Family> {
    s.ok_or_else(|| config_err("no system given (use --family and its parameters, or `system` in the config)"))
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
struct VerifyParams {
    max_n: usize,
    reps: usize,
    seed: u64,
}

impl Default for VerifyParams {
    fn default() -> Self {
        Self { max_n: 12, reps: 2000, seed: 1 }
    }
}

#[derive(Serialize)]
struct VerifyRow<'a> {
    id: u32,
    name: &'a str,
    pass: bool,
    detail: &'a str,
}

fn verify(a: VerifyArgs, ctx: &Ctx) -> Result<()> {
    let p: VerifyParams = params(ctx, flags(&a))?;
    if p.max_n < 4 {
        return Err(config_err("max_n must be at least 4"));
    }
    let n = p.max_n;
    let small = n.min(10);
    let reps = p.reps;
    let seed = p.seed;
    let list: Vec<(u32, &str, Box<dyn FnOnce() -> Result<(bool, String)>>)> = vec![
        (1, "ergodic counts", Box::new(move || checks::counting(n))),
        (2, "bijections", Box::new(move || checks::bijections(n.min(12)))),
        (3, "monotone coupling", Box::new(move || checks::monotone_coupling(12, 8, reps.min(1000), 100.0, seed))),
        (4, "generator intertwining", Box::new(move || checks::intertwining(n))),
        (5, "stationary laws", Box::new(move || checks::stationarity(n))),
        (6, "first Fourier mode with label offset", Box::new(move || checks::eigenfunction_lifted(n))),
        (7, "hitting-time identity", Box::new(move || checks::hitting_identity(14, 9, reps, reps / 10 + 1, seed))),
        (8, "coupling bound", Box::new(move || checks::coupling_bound(small, reps, seed))),
        (12, "rare-set hitting bound", Box::new(|| checks::aldous_brown(6, 6))),
        (13, "equivalence of ensembles", Box::new(checks::equivalence)),
    ];
    let mut outcomes: Vec<Outcome> = Vec::new();
    for (id, name, f) in list {
        ctx.debug(format!("running check {id}"));
        let o = checks::run_check(id, name, f);
        ctx.say(o.line());
        outcomes.push(o);
    }
    let mut out = OutDir::resolve(ctx.out, "verify")?;
    let rows: Vec<VerifyRow> =
        outcomes.iter().map(|o| VerifyRow { id: o.id, name: &o.name, pass: o.pass, detail: &o.detail }).collect();
    out.write_csv("verify.csv", &rows)?;
    out.finish(&["verify"], serde_json::to_value(&p)?)?;
    let failed: Vec<u32> = outcomes.iter().filter(|o| !o.pass).map(|o| o.id).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CheckFailed(format!("checks {failed:?}")).into())
    }
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
struct TvParams {
    system: Option<Family>,
    domain: Domain,
    eps: f64,
    points: usize,
    /// `None` means three times `T(ε)`.
    t_max: Option<f64>,
}

impl Default for TvParams {
    fn default() -> Self {
        Self { system: None, domain: Domain::Full, eps: 0.25, points: 40, t_max: None }
    }
}

#[derive(Serialize)]
struct TvRow {
    t: f64,
    d: f64,
    argmax: String,
}

fn exact_tv(a: TvArgs, ctx: &Ctx) -> Result<()> {
    let overlay = with_system(ctx, &a, &a.system)?;
    let p: TvParams = params(ctx, overlay)?;
    let fam = require_system(p.system)?;
    let (eps, points) = (p.eps, p.points);
    if points < 2 {
        return Err(config_err("points must be at least 2"));
    }
    let l = build_generator(&fam, p.domain)?;
    let pi = kernel_stationary(&l)?;
    let mt = fep_core::exact::uniformize::mixing_time_with(&l, &pi, eps)?;
    let t_max = p.t_max.unwrap_or(if mt.t > 0.0 { 3.0 * mt.t } else { 1.0 });
    let times: Vec<f64> = (0..points).map(|i| t_max * i as f64 / (points - 1) as f64).collect();
    let curve = fep_core::exact::uniformize::tv_curve_with(&l, &pi, &times)?;
    let rows: Vec<TvRow> =
        curve.iter().map(|c| TvRow { t: c.t, d: c.d, argmax: state_label(l.state(c.argmax)) }).collect();
    ctx.say(format!("T({eps}) = {:.6} (bracket [{:.6}, {:.6}], {} states)", mt.t, mt.t_lo, mt.t, l.dim()));
    let mut out = OutDir::resolve(ctx.out, "exact-tv")?;
    out.write_csv("tv_curve.csv", &rows)?;
    out.write_json("summary.json", &json!({ "states": l.dim(), "mixing_time": mt }))?;
    out.finish(&["exact", "tv"], serde_json::to_value(&p)?)?;
    Ok(())
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
struct DomainParams {
    system: Option<Family>,
    domain: Domain,
}

#[derive(Serialize)]
struct StationaryRow {
    state: String,
    kernel: f64,
    formula: Option<f64>,
}

fn exact_stationary(a: DomainArgs, ctx: &Ctx) -> Result<()> {
    let overlay = with_system(ctx, &a, &a.system)?;
    let p: DomainParams = params(ctx, overlay)?;
    let fam = require_system(p.system)?;
    let l = build_generator(&fam, p.domain)?;
    let kernel = kernel_stationary(&l)?;
    let formula = formula_stationary(&fam, &l).ok();
    let rows: Vec<StationaryRow> = (0..l.dim())
        .map(|i| StationaryRow {
            state: state_label(l.state(i)),
            kernel: kernel[i],
            formula: formula.as_ref().map(|f| f[i]),
        })
        .collect();
    let summary = json!({
        "states": l.dim(),
        "kernel_residual": l.stationary_residual(&kernel),
        "formula_residual": formula.as_ref().map(|f| l.stationary_residual(f)),
        "formula_detailed_balance_error": formula.as_ref().map(|f| l.detailed_balance_error(f)),
        "kernel_vs_formula_tv": formula.as_ref().map(|f| tv_distance(f, &kernel)),
    });
    ctx.say(serde_json::to_string_pretty(&summary)?);
    let mut out = OutDir::resolve(ctx.out, "exact-stationary")?;
    out.write_csv("stationary.csv", &rows)?;
    out.write_json("summary.json", &summary)?;
    out.finish(&["exact", "stationary"], serde_json::to_value(&p)?)?;
    Ok(())
}

#[derive(Serialize)]
struct SpectrumRow {
    index: usize,
    eigenvalue: f64,
}

fn exact_gap(a: DomainArgs, ctx: &Ctx) -> Result<()> {
    let overlay = with_system(ctx, &a, &a.system)?;
    let p: DomainParams = params(ctx, overlay)?;
    let fam = require_system(p.system)?;
    let l = build_generator(&fam, p.domain)?;
    let pi = kernel_stationary(&l)?;
    let ev = spectrum(&l, &pi)?;
    let gap = ev.get(1).copied().unwrap_or(0.0).max(0.0);
    ctx.say(format!("gap = {gap:.12} ({} states)", l.dim()));
    let mut out = OutDir::resolve(ctx.out, "exact-gap")?;
    let rows: Vec<SpectrumRow> = ev.iter().enumerate().map(|(index, &eigenvalue)| SpectrumRow { index, eigenvalue }).collect();
    out.write_csv("spectrum.csv", &rows)?;
    out.write_json("summary.json", &json!({ "states": l.dim(), "gap": gap }))?;
    out.finish(&["exact", "gap"], serde_json::to_value(&p)?)?;
    Ok(())
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
struct EigenParams {
    n: usize,
    k: usize,
    /// `None` runs every variant whose density range contains `k/N`.
    variant: Option<A1Variant>,
    lifted: bool,
}

impl Default for EigenParams {
    fn default() -> Self {
        Self { n: 6, k: 4, variant: None, lifted: false }
    }
}

fn exact_eigen(a: EigenArgs, ctx: &Ctx) -> Result<()> {
    let p: EigenParams = params(ctx, flags(&a))?;
    let (n, k) = (p.n, p.k);
    if 2 * k <= n || k >= n {
        return Err(config_err(format!("need N/2 < k < N, got N={n} k={k}")));
    }
    let variants = match p.variant {
        Some(v) => vec![v],
        None => A1Variant::applicable(n, k),
    };
    let mut rows = Vec::new();
    for v in variants {
        let c = if p.lifted { eigencheck_a1_lifted(n, k, v)? } else { eigencheck_a1(n, k, v)? };
        ctx.say(format!("{v:?}: eigenvalue {:.6}, residual {:.3e}, ‖a₁‖∞ {:.3}, {} states", c.eigenvalue, c.residual, c.norm, c.states));
        rows.push(c);
    }
    let mut out = OutDir::resolve(ctx.out, "exact-eigen")?;
    out.write_csv("eigen.csv", &rows)?;
    out.finish(&["exact", "eigen"], serde_json::to_value(&p)?)?;
    Ok(())
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
struct EquivalenceParams {
    rho: f64,
    ell: usize,
    sizes: Vec<usize>,
    max_ell: usize,
}

impl Default for EquivalenceParams {
    fn default() -> Self {
        Self { rho: 0.7, ell: 4, sizes: vec![50, 100, 200, 500, 1000, 2000], max_ell: 20 }
    }
}

#[derive(Serialize)]
struct EquivalenceRow {
    n: usize,
    k: usize,
    deviation: f64,
}

#[derive(Serialize)]
struct RatioRow {
    ell: usize,
    grand_canonical: f64,
    canonical: Option<f64>,
}

fn exact_equivalence(a: EquivalenceArgs, ctx: &Ctx) -> Result<()> {
    let p: EquivalenceParams = params(ctx, flags(&a))?;
    let (rho, ell, max_ell) = (p.rho, p.ell, p.max_ell);
    let sizes = p.sizes.clone();
    let mut rows = Vec::new();
    for &n in &sizes {
        let k = (rho * n as f64).round() as usize;
        let deviation = equivalence_error(n, k, ell)?;
        ctx.say(format!("N={n} k={k}: deviation {deviation:.3e}"));
        rows.push(EquivalenceRow { n, k, deviation });
    }
    let big = *sizes.iter().max().unwrap_or(&200);
    let kbig = (rho * big as f64).round() as usize;
    let mut ratios = Vec::new();
    for l in 2..=max_ell {
        ratios.push(RatioRow {
            ell: l,
            grand_canonical: correlation_ratio_gc(rho, l)?.max_deviation(),
            canonical: correlation_ratio_canonical(big, kbig, l).ok().map(|c| c.max_deviation()),
        });
    }
    let mut out = OutDir::resolve(ctx.out, "exact-equivalence")?;
    out.write_csv("equivalence.csv", &rows)?;
    out.write_csv("correlation.csv", &ratios)?;
    out.finish(&["exact", "equivalence"], serde_json::to_value(&p)?)?;
    Ok(())
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
struct AldousBrownParams {
    n: usize,
    m: usize,
    p: f64,
    points: usize,
    span: f64,
}

impl Default for AldousBrownParams {
    fn default() -> Self {
        Self { n: 3, m: 3, p: 0.7, points: 50, span: 3.0 }
    }
}

fn exact_aldous_brown(a: AldousBrownArgs, ctx: &Ctx) -> Result<()> {
    let p: AldousBrownParams = params(ctx, flags(&a))?;
    let (n, m, rate, points, span) = (p.n, p.m, p.p, p.points, p.span);
    let scale = aldous_brown_check(n, m, rate, &[])?.scale();
    let grid: Vec<f64> = (1..=points).map(|j| span * scale * j as f64 / points as f64).collect();
    let r = aldous_brown_check(n, m, rate, &grid)?;
    ctx.say(format!(
        "π(E^c) = {:.6}, capacity = {:.6e} (formula {:.6e}), min(survival - bound) = {:.3e}",
        r.pi_ec, r.capacity, r.capacity_formula, r.min_margin()
    ));
    let mut out = OutDir::resolve(ctx.out, "exact-aldous-brown")?;
    out.write_csv("survival.csv", &r.points)?;
    out.write_json("summary.json", &json!({"pi_ec": r.pi_ec, "capacity": r.capacity, "capacity_formula": r.capacity_formula, "min_margin": r.min_margin()}))?;
    out.finish(&["exact", "aldous-brown"], serde_json::to_value(&p)?)?;
    Ok(())
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
struct PathParams {
    n: usize,
    k: usize,
    p: f64,
    start: String,
    horizon: f64,
    seed: u64,
}

impl Default for PathParams {
    fn default() -> Self {
        Self { n: 12, k: 8, p: 0.5, start: "minus".into(), horizon: 100.0, seed: 1 }
    }
}

fn segment_start(start: &str, n: usize, k: usize) -> Result<SegmentConfig> {
    let named = || special_configs(n, k).map_err(|e| config_err(e.to_string()));
    Ok(match start {
        "minus" => named()?.minus,
        "plus" => named()?.plus,
        "vee" => named()?.vee,
        "wedge" => named()?.wedge,
        "h-sample" => named()?.h_sample,
        s => {
            let c: SegmentConfig = s.parse().map_err(|e: fep_core::Error| config_err(e.to_string()))?;
            if c.n() != n || c.k() != k {
                return Err(config_err(format!("start {s} does not have N={n}, k={k}")));
            }
            c
        }
    })
}

fn simulate_path_cmd(a: PathArgs, ctx: &Ctx) -> Result<()> {
    let p: PathParams = params(ctx, flags(&a))?;
    let cfg = segment_start(&p.start, p.n, p.k)?;
    let field = ClockField::fep(p.p, p.seed)?;
    let (traj, end) = simulate_path(&to_path(&cfg)?, &field, p.horizon);
    ctx.say(format!("{} events, final configuration {}", traj.events.len(), fep_core::lattice_path::from_path(&end)));
    let mut out = OutDir::resolve(ctx.out, "simulate-path")?;
    out.write("trajectory.csv", traj.to_csv().as_bytes())?;
    out.finish(&["simulate", "path"], serde_json::to_value(&p)?)?;
    Ok(())
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
struct CircleParams {
    n: usize,
    k: usize,
    start: String,
    horizon: f64,
    seed: u64,
}

impl Default for CircleParams {
    fn default() -> Self {
        Self { n: 12, k: 8, start: "block".into(), horizon: 100.0, seed: 1 }
    }
}

fn simulate_circle_cmd(a: CircleArgs, ctx: &Ctx) -> Result<()> {
    let p: CircleParams = params(ctx, flags(&a))?;
    let (n, k) = (p.n, p.k);
    let c0 = match p.start.as_str() {
        "block" => Start::CircleBlock.circle_config(n, k).map_err(|e| config_err(e.to_string()))?,
        s => {
            let c: CircleConfig = s.parse().map_err(|e: fep_core::Error| config_err(e.to_string()))?;
            if c.n() != n || c.k() != k {
                return Err(config_err(format!("start {s} does not have N={n}, k={k}")));
            }
            c
        }
    };
    let (traj, end) = simulate_circle(&c0, p.seed, p.horizon);
    ctx.say(format!("{} events, final configuration {end}", traj.events.len()));
    let mut out = OutDir::resolve(ctx.out, "simulate-circle")?;
    out.write("trajectory.csv", traj.to_csv().as_bytes())?;
    out.finish(&["simulate", "circle"], serde_json::to_value(&p)?)?;
    Ok(())
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
struct ObepSimParams {
    z0: String,
    q: f64,
    alpha: f64,
    beta: f64,
    gamma: f64,
    delta: f64,
    horizon: f64,
    seed: u64,
}

impl Default for ObepSimParams {
    fn default() -> Self {
        Self { z0: "00000".into(), q: 0.5, alpha: 0.0, beta: 0.0, gamma: 0.0, delta: 0.5, horizon: 100.0, seed: 1 }
    }
}

fn simulate_obep_cmd(a: ObepArgs, ctx: &Ctx) -> Result<()> {
    let p: ObepSimParams = params(ctx, flags(&a))?;
    let z0: Vec<bool> = p
        .z0
        .chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(config_err(format!("z0 must be a 0/1 string, found {other:?}"))),
        })
        .collect::<Result<_>>()?;
    let rates = ObepParams::new(p.q, p.alpha, p.beta, p.gamma, p.delta)?;
    let (traj, end) = simulate_obep(&z0, &rates, p.seed, p.horizon)?;
    let end: String = end.iter().map(|&b| if b { '1' } else { '0' }).collect();
    ctx.say(format!("{} events, final configuration {end}", traj.events.len()));
    let mut out = OutDir::resolve(ctx.out, "simulate-obep")?;
    out.write("trajectory.csv", traj.to_csv().as_bytes())?;
    out.finish(&["simulate", "obep"], serde_json::to_value(&p)?)?;
    Ok(())
}

/// Experiment CSV schema, version 1.
#[derive(Serialize)]
pub struct SampleRow<'a> {
    #[serde(rename = "N")]
    pub n: usize,
    pub k: usize,
    pub p: f64,
    pub replicate: usize,
    pub seed: u64,
    pub statistic: &'a str,
    pub value: Option<f64>,
    pub censored: bool,
}

pub fn sample_rows(grid: &[GridResult]) -> Vec<SampleRow<'_>> {
    grid.iter()
        .flat_map(|g| {
            g.samples.iter().map(move |s| SampleRow {
                n: g.n,
                k: g.k,
                p: g.p,
                replicate: s.replicate,
                seed: s.seed,
                statistic: &g.statistic,
                value: s.value,
                censored: s.value.is_none(),
            })
        })
        .collect()
}

#[derive(Serialize, Deserialize)]
pub struct GridSummary {
    pub n: usize,
    pub k: usize,
    pub p: f64,
    pub stats: SummaryStats,
}

#[derive(Serialize, Deserialize)]
pub struct SweepSummary {
    pub grid: Vec<GridSummary>,
    pub fit: Option<FitResult>,
}

fn summarize(grid: &[GridResult], fit: Option<FitResult>) -> SweepSummary {
    SweepSummary {
        grid: grid.iter().map(|g| GridSummary { n: g.n, k: g.k, p: g.p, stats: g.stats.clone() }).collect(),
        fit,
    }
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
struct HitParams {
    start: Start,
    n: usize,
    k: usize,
    p: f64,
    reps: usize,
    /// `None` means `10 N² log N`, times `(p/q)^(N-k)` on the asymmetric segment.
    horizon: Option<f64>,
    seed: u64,
}

impl Default for HitParams {
    fn default() -> Self {
        Self { start: Start::Minus, n: 12, k: 8, p: 0.5, reps: 100, horizon: None, seed: 1 }
    }
}

fn hit(a: HitArgs, ctx: &Ctx) -> Result<()> {
    let p: HitParams = params(ctx, flags(&a))?;
    let (start, n, k, rate, reps) = (p.start, p.n, p.k, p.p, p.reps);
    let horizon = p.horizon.unwrap_or_else(|| {
        let base = default_diffusive_horizon(n);
        if start == Start::CircleBlock || rate <= 0.5 {
            base
        } else {
            base * (rate / (1.0 - rate)).powi(n.saturating_sub(k) as i32)
        }
    });
    let g = hitting_time(start, n, k, rate, reps, p.seed, 0, HorizonPolicy::new(horizon))?;
    ctx.say(format!(
        "mean {:?} ± {:?}, median {:?}, censored {:.3}",
        g.stats.mean, g.stats.std_err, g.stats.q50, g.stats.censored_fraction
    ));
    let grid = [g];
    let mut out = OutDir::resolve(ctx.out, "hit")?;
    out.write_csv("samples.csv", &sample_rows(&grid))?;
    out.write_json("summary.json", &summarize(&grid, None))?;
    out.finish(&["hit"], serde_json::to_value(&p)?)?;
    Ok(())
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
struct RatioParams {
    /// `None` means 64,128,256 for coupling and 32,64,128 on the circle.
    ns: Option<Vec<usize>>,
    rho: f64,
    /// `None` means 100 for coupling and 1000 on the circle.
    reps: Option<usize>,
    seed: u64,
}

impl Default for RatioParams {
    fn default() -> Self {
        Self { ns: None, rho: 0.75, reps: None, seed: 1 }
    }
}

fn sweep_ratio(a: RatioArgs, kind: FitKind, ctx: &Ctx) -> Result<()> {
    let mut p: RatioParams = params(ctx, flags(&a))?;
    let circle = kind == FitKind::CircleRatio;
    let ns = p.ns.get_or_insert_with(|| if circle { vec![32, 64, 128] } else { vec![64, 128, 256] }).clone();
    let reps = *p.reps.get_or_insert(if circle { 1000 } else { 100 });
    let rho = p.rho;
    let mut grid = Vec::new();
    for (block, &n) in ns.iter().enumerate() {
        let k = ((rho * n as f64) - 1e-9).ceil() as usize;
        let policy = HorizonPolicy::new(default_diffusive_horizon(n));
        ctx.debug(format!("N={n} k={k}"));
        let g = if circle {
            hitting_time(Start::CircleBlock, n, k, 0.5, reps, p.seed, block, policy)?
        } else {
            coupling_time(n, k, 0.5, reps, p.seed, block, policy)?
        };
        grid.push(g);
    }
    let fit = scaling_fit(kind, &grid)?;
    ctx.say(format!("max/min ratio {:.4}", fit.statistic));
    let (slug, name) = if circle { ("sweep-circle-ratio", "circle-ratio") } else { ("sweep-sfep-ratio", "sfep-ratio") };
    let mut out = OutDir::resolve(ctx.out, slug)?;
    out.write_csv("samples.csv", &sample_rows(&grid))?;
    out.write_json("summary.json", &summarize(&grid, Some(fit)))?;
    out.finish(&["sweep", name], serde_json::to_value(&p)?)?;
    Ok(())
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
struct SlopeParams {
    p: f64,
    gaps: Vec<usize>,
    m: usize,
    reps: usize,
    seed: u64,
}

impl Default for SlopeParams {
    fn default() -> Self {
        Self { p: 0.7, gaps: vec![4, 6, 8, 10], m: 3, reps: 200, seed: 1 }
    }
}

fn sweep_slope(a: SlopeArgs, ctx: &Ctx) -> Result<()> {
    let p: SlopeParams = params(ctx, flags(&a))?;
    let rate = p.p;
    if !(rate > 0.5 && rate < 1.0) {
        return Err(config_err(format!("need 1/2 < p < 1, got {rate}")));
    }
    let (_, _, grid) = checks::afep_slope(rate, &p.gaps, p.m, p.reps, p.seed)?;
    let fit = scaling_fit(FitKind::AfepSlope, &grid)?;
    ctx.say(format!(
        "slope {:.4} ± {:.4} (log(p/q) = {:.4})",
        fit.statistic,
        fit.slope_se.unwrap_or(f64::NAN),
        fit.target.unwrap_or(f64::NAN)
    ));
    let mut out = OutDir::resolve(ctx.out, "sweep-afep-slope")?;
    out.write_csv("samples.csv", &sample_rows(&grid))?;
    out.write_json("summary.json", &summarize(&grid, Some(fit)))?;
    out.finish(&["sweep", "afep-slope"], serde_json::to_value(&p)?)?;
    Ok(())
}

/// Exit code for an error: 2 for configuration problems, 1 otherwise.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    use fep_core::Error as E;
    for cause in err.chain() {
        if cause.downcast_ref::<crate::config::ConfigError>().is_some() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<E>() {
            return match e {
                E::InvalidConfig(_)
                | E::InvalidPath(_)
                | E::Parameter(_)
                | E::Dimension { .. }
                | E::StateSpaceOverflow { .. }
                | E::TooFewPoints { .. } => 2,
                _ => 1,
            };
        }
    }
    1
}

pub fn load_summary(dir: &Path) -> Result<SweepSummary> {
    let path = dir.join("summary.json");
    let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| config_err(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&config_err("x")), 2);
        assert_eq!(exit_code(&anyhow::Error::from(fep_core::Error::Parameter("x".into()))), 2);
        assert_eq!(exit_code(&anyhow::Error::from(CheckFailed("x".into()))), 1);
        let cens = fep_core::Error::Censoring { fraction: 0.5, limit: 0.05 };
        assert_eq!(exit_code(&anyhow::Error::from(cens)), 1);
    }

    #[test]
    fn named_segment_starts() {
        assert_eq!(segment_start("minus", 6, 4).unwrap().to_string(), "111100");
        assert!(segment_start("1101", 6, 4).is_err());
        assert!(segment_start("bogus", 6, 4).is_err());
    }
}
