use itertools::Itertools;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use super::matrix::{RateMatrix, State};
use crate::engine::obep::ObepParams;
use crate::error::{Error, Result};
use crate::state::binomial;

/// Default cap on the number of enumerated states.
pub const DEFAULT_MAX_STATES: usize = 1_000_000;

/// Process families with an exact generator.
///
/// FEP and exclusion states are 0/1 vectors over sites `0..n`; zero-range
/// states are pile sizes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Family {
    /// FEP on `[n]`: right jumps at rate `p`, left jumps at rate `1 - p`.
    #[serde(rename = "fep-seg")]
    FepSegment { n: usize, k: usize, p: f64 },
    /// FEP on `T_n`; the symmetric process has `p = 1/2`.
    #[serde(rename = "fep-circle")]
    FepCircle { n: usize, k: usize, p: f64 },
    /// Exclusion on `[n]` with `m` particles, right rate `right`, left rate
    /// `1 - right`.
    Sep { n: usize, m: usize, right: f64 },
    /// Open-boundary exclusion on `[n]`.
    Obep { n: usize, params: ObepParams },
    /// Zero-range on sites `0..sites` with rate `1{pile >= 2}` times `p`
    /// (right) or `1 - p` (left).
    #[serde(rename = "zrp-seg")]
    ZrpSegment { sites: usize, particles: usize, p: f64 },
    /// Zero-range on the discrete circle with rate `1{pile >= 2}`.
    #[serde(rename = "zrp-circle")]
    ZrpCircle { sites: usize, particles: usize, p: f64 },
    /// Zero-range on `[n]` with `m` particles and rate `1{pile >= 1}`.
    #[serde(rename = "zrp-constant-rate")]
    ZrpConstantRate { n: usize, m: usize, p: f64 },
}

/// Which states to enumerate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Domain {
    #[default]
    Full,
    /// FEP: the ergodic component. Zero-range with rate `1{pile >= 2}`:
    /// every pile nonempty. Other families ignore it.
    Ergodic,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::FepSegment { .. } => "fep-seg",
            Family::FepCircle { .. } => "fep-circle",
            Family::Sep { .. } => "sep",
            Family::Obep { .. } => "obep",
            Family::ZrpSegment { .. } => "zrp-seg",
            Family::ZrpCircle { .. } => "zrp-circle",
            Family::ZrpConstantRate { .. } => "zrp-constant-rate",
        }
    }

    fn validate(&self) -> Result<()> {
        let prob = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::Parameter(format!("{name} must lie in [0, 1], got {v}")))
            }
        };
        match *self {
            Family::FepSegment { n, k, p } | Family::FepCircle { n, k, p } => {
                prob("p", p)?;
                if k > n || n == 0 {
                    return Err(Error::Parameter(format!("need 0 < n and k <= n, got n={n}, k={k}")));
                }
            }
            Family::Sep { n, m, right } => {
                prob("right", right)?;
                if m > n {
                    return Err(Error::Parameter(format!("{m} particles do not fit on {n} sites")));
                }
            }
            Family::Obep { n, params } => {
                params.validate()?;
                if n == 0 {
                    return Err(Error::Parameter("OBEP needs at least one site".into()));
                }
            }
            Family::ZrpSegment { sites, p, .. }
            | Family::ZrpCircle { sites, p, .. }
            | Family::ZrpConstantRate { n: sites, p, .. } => {
                prob("p", p)?;
                if sites == 0 {
                    return Err(Error::Parameter("zero-range process needs at least one site".into()));
                }
            }
        }
        Ok(())
    }

    /// Number of states in the full space, saturating.
    pub fn full_size(&self) -> usize {
        let big = |n: usize, r: usize| binomial(n as u64, r as u64).to_usize().unwrap_or(usize::MAX);
        match *self {
            Family::FepSegment { n, k, .. } | Family::FepCircle { n, k, .. } => big(n, k),
            Family::Sep { n, m, .. } => big(n, m),
            Family::Obep { n, .. } => 1usize.checked_shl(n as u32).filter(|_| n < usize::BITS as usize).unwrap_or(usize::MAX),
            Family::ZrpSegment { sites, particles, .. } | Family::ZrpCircle { sites, particles, .. } => {
                big(particles + sites - 1, sites - 1)
            }
            Family::ZrpConstantRate { n, m, .. } => big(m + n - 1, n - 1),
        }
    }
}

/// Builds the generator with the default state cap.
pub fn build_generator(family: &Family, domain: Domain) -> Result<RateMatrix> {
    build_generator_capped(family, domain, DEFAULT_MAX_STATES)
}

pub fn build_generator_capped(family: &Family, domain: Domain, max_states: usize) -> Result<RateMatrix> {
    family.validate()?;
    let size = family.full_size();
    if size > max_states {
        return Err(Error::StateSpaceOverflow { size, cap: max_states });
    }
    match *family {
        Family::FepSegment { n, k, p } => {
            let mut states = binary_states(n, k);
            if domain == Domain::Ergodic {
                states.retain(|s| fep_segment_ergodic(s));
            }
            RateMatrix::build(states, |s| fep_moves(s, p, false))
        }
        Family::FepCircle { n, k, p } => {
            let mut states = binary_states(n, k);
            if domain == Domain::Ergodic {
                states.retain(|s| fep_circle_ergodic(s));
            }
            RateMatrix::build(states, |s| fep_moves(s, p, true))
        }
        Family::Sep { n, m, right } => RateMatrix::build(binary_states(n, m), |s| sep_moves(s, right)),
        Family::Obep { n, params } => {
            let states: Vec<State> = (0..n).map(|_| 0..2u32).multi_cartesian_product().collect();
            RateMatrix::build(states, |s| obep_moves(s, &params))
        }
        Family::ZrpSegment { sites, particles, p } => {
            let mut states = compositions(particles, sites);
            if domain == Domain::Ergodic {
                states.retain(|s| s.iter().all(|&w| w >= 1));
            }
            RateMatrix::build(states, |s| zrp_moves(s, p, 2, false))
        }
        Family::ZrpCircle { sites, particles, p } => {
            let mut states = compositions(particles, sites);
            if domain == Domain::Ergodic {
                states.retain(|s| s.iter().all(|&w| w >= 1));
            }
            RateMatrix::build(states, |s| zrp_moves(s, p, 2, true))
        }
        Family::ZrpConstantRate { n, m, p } => RateMatrix::build(compositions(m, n), |s| zrp_moves(s, p, 1, false)),
    }
}

/// All 0/1 vectors of length `n` with `k` ones, in lexicographic order of
/// the occupied sites.
pub fn binary_states(n: usize, k: usize) -> Vec<State> {
    (0..n)
        .combinations(k)
        .map(|c| {
            let mut s = vec![0u32; n];
            for x in c {
                s[x] = 1;
            }
            s
        })
        .collect()
}

/// All ways to put `m` indistinguishable particles on `n` sites.
pub fn compositions(m: usize, n: usize) -> Vec<State> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; n];
    fn rec(i: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<State>) {
        if i + 1 == cur.len() {
            cur[i] = left;
            out.push(cur.clone());
            return;
        }
        for a in (0..=left).rev() {
            cur[i] = a;
            rec(i + 1, left - a, cur, out);
        }
    }
    if n > 0 {
        rec(0, m as u32, &mut cur, &mut out);
    }
    out
}

pub fn fep_segment_ergodic(s: &[u32]) -> bool {
    let n = s.len();
    n > 0 && s[0] == 1 && s[n - 1] == 1 && s.windows(2).all(|w| w[0] + w[1] >= 1)
}

pub fn fep_circle_ergodic(s: &[u32]) -> bool {
    let n = s.len();
    (0..n).all(|x| s[x] + s[(x + 1) % n] >= 1)
}

fn moved(s: &[u32], from: usize, to: usize) -> State {
    let mut t = s.to_vec();
    t[from] -= 1;
    t[to] += 1;
    t
}

fn fep_moves(s: &[u32], p: f64, circle: bool) -> Vec<(State, f64)> {
    let n = s.len();
    let q = 1.0 - p;
    let mut out = Vec::new();
    if circle && n < 3 {
        return out;
    }
    let at = |x: isize| -> Option<u32> {
        if circle {
            Some(s[x.rem_euclid(n as isize) as usize])
        } else if x >= 0 && (x as usize) < n {
            Some(s[x as usize])
        } else {
            None
        }
    };
    let wrap = |x: isize| x.rem_euclid(n as isize) as usize;
    for x in 0..n {
        if s[x] == 0 {
            continue;
        }
        let xi = x as isize;
        if at(xi - 1) == Some(1) && at(xi + 1) == Some(0) {
            out.push((moved(s, x, wrap(xi + 1)), p));
        }
        if at(xi + 1) == Some(1) && at(xi - 1) == Some(0) {
            out.push((moved(s, x, wrap(xi - 1)), q));
        }
    }
    out
}

fn sep_moves(s: &[u32], right: f64) -> Vec<(State, f64)> {
    let mut out = Vec::new();
    for x in 0..s.len().saturating_sub(1) {
        match (s[x], s[x + 1]) {
            (1, 0) => out.push((moved(s, x, x + 1), right)),
            (0, 1) => out.push((moved(s, x + 1, x), 1.0 - right)),
            _ => {}
        }
    }
    out
}

fn obep_moves(s: &[u32], pr: &ObepParams) -> Vec<(State, f64)> {
    let n = s.len();
    let mut out = sep_moves(s, pr.q);
    let flip = |x: usize| {
        let mut t = s.to_vec();
        t[x] = 1 - t[x];
        t
    };
    out.push((flip(0), if s[0] == 1 { pr.gamma } else { pr.alpha }));
    out.push((flip(n - 1), if s[n - 1] == 1 { pr.beta } else { pr.delta }));
    out
}

fn zrp_moves(s: &[u32], p: f64, threshold: u32, circle: bool) -> Vec<(State, f64)> {
    let n = s.len();
    let q = 1.0 - p;
    let mut out = Vec::new();
    for x in 0..n {
        if s[x] < threshold {
            continue;
        }
        if circle {
            if n > 1 {
                out.push((moved(s, x, (x + 1) % n), p));
                out.push((moved(s, x, (x + n - 1) % n), q));
            }
        } else {
            if x + 1 < n {
                out.push((moved(s, x, x + 1), p));
            }
            if x > 0 {
                out.push((moved(s, x, x - 1), q));
            }
        }
    }
    out
}
