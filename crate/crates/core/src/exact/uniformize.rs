//! `μ ↦ μ exp(tL)` by uniformization, worst-case total-variation curves
//! and exact mixing times.

use serde::{Deserialize, Serialize};
use statrs::distribution::{Discrete, Poisson};

use super::matrix::{tv_distance, DistVec, RateMatrix};
use super::stationary::kernel_stationary;
use crate::error::{Error, Result};

/// Bound on the total-variation truncation error of one [`evolve`] call.
pub const TRUNCATION_TOL: f64 = 1e-12;
/// Largest `Λ Δt` per chunk.
const CHUNK_MASS: f64 = 32.0;
const MAX_TERMS: usize = 2_000;

/// Evolves a row vector for time `t`. Sub-stochastic generators are
/// allowed; the lost mass is the killed mass.
pub fn evolve(d0: &[f64], l: &RateMatrix, t: f64) -> Result<DistVec> {
    if d0.len() != l.dim() {
        return Err(Error::Dimension { expected: l.dim(), got: d0.len() });
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Parameter(format!("time must be finite and >= 0, got {t}")));
    }
    let rate = l.max_exit();
    if t == 0.0 || rate == 0.0 {
        return Ok(d0.to_vec());
    }
    let chunks = (rate * t / CHUNK_MASS).ceil().max(1.0);
    if chunks > 1e7 {
        return Err(Error::Uniformization(format!("Λt = {} needs too many chunks", rate * t)));
    }
    let chunks = chunks as usize;
    let dt = t / chunks as f64;
    let tol = TRUNCATION_TOL / chunks as f64;
    let mut v = d0.to_vec();
    for _ in 0..chunks {
        v = chunk(&v, l, rate, rate * dt, tol)?;
    }
    Ok(v)
}

fn chunk(v: &[f64], l: &RateMatrix, rate: f64, a: f64, tol: f64) -> Result<Vec<f64>> {
    let pois = Poisson::new(a).map_err(|e| Error::Uniformization(e.to_string()))?;
    let mut term = v.to_vec();
    let mut out: Vec<f64> = term.iter().map(|x| x * pois.pmf(0)).collect();
    let mut used = pois.pmf(0);
    let mass: f64 = v.iter().map(|x| x.abs()).sum();
    for n in 0..MAX_TERMS {
        let next = pois.pmf(n as u64 + 1);
        let ratio = a / (n as f64 + 2.0);
        if ratio < 1.0 && next / (1.0 - ratio) * mass <= tol {
            // The neglected Poisson tail is charged to the last term.
            let rest = (1.0 - used).max(0.0);
            for (o, t) in out.iter_mut().zip(&term) {
                *o += rest * t;
            }
            return Ok(out);
        }
        let lt = l.apply_left(&term);
        for (t, d) in term.iter_mut().zip(lt) {
            *t += d / rate;
        }
        for (o, t) in out.iter_mut().zip(&term) {
            *o += next * t;
        }
        used += next;
    }
    Err(Error::Uniformization(format!("Poisson tail above {tol} after {MAX_TERMS} terms")))
}

/// Worst-case distance at one time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TvPoint {
    pub t: f64,
    pub d: f64,
    /// Index of the maximizing initial state.
    pub argmax: usize,
}

/// Point masses of every state, evolved together.
struct Ensemble<'a> {
    l: &'a RateMatrix,
    pi: &'a [f64],
    t: f64,
    rows: Vec<Vec<f64>>,
}

impl<'a> Ensemble<'a> {
    fn new(l: &'a RateMatrix, pi: &'a [f64]) -> Self {
        let n = l.dim();
        let rows = (0..n)
            .map(|i| {
                let mut e = vec![0.0; n];
                e[i] = 1.0;
                e
            })
            .collect();
        Self { l, pi, t: 0.0, rows }
    }

    fn advanced(&self, t: f64) -> Result<Self> {
        let dt = t - self.t;
        let rows = self.rows.iter().map(|r| evolve(r, self.l, dt)).collect::<Result<Vec<_>>>()?;
        Ok(Self { l: self.l, pi: self.pi, t, rows })
    }

    fn worst(&self) -> TvPoint {
        let mut best = TvPoint { t: self.t, d: f64::NEG_INFINITY, argmax: 0 };
        for (i, r) in self.rows.iter().enumerate() {
            let d = tv_distance(r, self.pi);
            if d > best.d {
                best = TvPoint { t: self.t, d, argmax: i };
            }
        }
        best
    }
}

/// Slack allowed when checking that `d(t)` does not increase.
pub const MONOTONE_SLACK: f64 = 1e-10;

/// `d(t) = max_x ‖δ_x e^{tL} - π‖_TV` on a sorted grid of times, with
/// `π` the unique stationary law of `l`.
pub fn tv_curve(l: &RateMatrix, times: &[f64]) -> Result<Vec<TvPoint>> {
    let pi = kernel_stationary(l)?;
    tv_curve_with(l, &pi, times)
}

pub fn tv_curve_with(l: &RateMatrix, pi: &[f64], times: &[f64]) -> Result<Vec<TvPoint>> {
    if times.windows(2).any(|w| w[1] < w[0]) || times.first().is_some_and(|&t| t < 0.0) {
        return Err(Error::Parameter("time grid must be sorted and nonnegative".into()));
    }
    let mut ens = Ensemble::new(l, pi);
    let mut out: Vec<TvPoint> = Vec::with_capacity(times.len());
    for &t in times {
        ens = ens.advanced(t)?;
        let pt = ens.worst();
        if let Some(prev) = out.last() {
            if pt.d > prev.d + MONOTONE_SLACK {
                return Err(Error::Uniformization(format!(
                    "d increased from {} at t={} to {} at t={}",
                    prev.d, prev.t, pt.d, pt.t
                )));
            }
        }
        out.push(pt);
    }
    Ok(out)
}

/// `T(ε) = inf{t : d(t) <= ε}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixingTime {
    pub eps: f64,
    /// Upper end of the final bracket.
    pub t: f64,
    pub t_lo: f64,
    pub d_at_t: f64,
    /// Initial state attaining `d` at the upper end.
    pub argmax: usize,
}

/// Relative width of the final bisection bracket.
pub const MIXING_REL_TOL: f64 = 1e-3;
const MAX_T: f64 = 1e12;

pub fn mixing_time_exact(l: &RateMatrix, eps: f64) -> Result<MixingTime> {
    let pi = kernel_stationary(l)?;
    mixing_time_with(l, &pi, eps)
}

pub fn mixing_time_with(l: &RateMatrix, pi: &[f64], eps: f64) -> Result<MixingTime> {
    if !(eps > 0.0) {
        return Err(Error::Parameter(format!("eps must be positive, got {eps}")));
    }
    let lo = Ensemble::new(l, pi);
    let w0 = lo.worst();
    if w0.d <= eps {
        return Ok(MixingTime { eps, t: 0.0, t_lo: 0.0, d_at_t: w0.d, argmax: w0.argmax });
    }
    let mut lo = lo;
    let mut t_hi = 1.0;
    let mut hi = loop {
        let cand = lo.advanced(t_hi)?;
        if cand.worst().d <= eps {
            break cand;
        }
        lo = cand;
        t_hi *= 2.0;
        if t_hi > MAX_T {
            return Err(Error::Uniformization(format!("d(t) stays above {eps} up to t = {MAX_T}")));
        }
    };
    while hi.t - lo.t > MIXING_REL_TOL * hi.t {
        let mid = lo.advanced(0.5 * (lo.t + hi.t))?;
        if mid.worst().d <= eps {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let w = hi.worst();
    Ok(MixingTime { eps, t: hi.t, t_lo: lo.t, d_at_t: w.d, argmax: w.argmax })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::families::{build_generator, Domain, Family};

    fn two_state(a: f64, b: f64) -> RateMatrix {
        RateMatrix::build(vec![vec![0], vec![1]], |s| if s[0] == 0 { vec![(vec![1], a)] } else { vec![(vec![0], b)] })
            .unwrap()
    }

    #[test]
    fn two_state_closed_form() {
        let (a, b) = (0.3, 1.1);
        let l = two_state(a, b);
        for t in [0.0, 0.1, 1.0, 7.5, 200.0] {
            let v = evolve(&[1.0, 0.0], &l, t).unwrap();
            let exact = b / (a + b) + a / (a + b) * (-(a + b) * t).exp();
            assert!((v[0] - exact).abs() < 1e-12, "t={t}: {} vs {exact}", v[0]);
        }
    }

    #[test]
    fn absorbing_and_zero_time() {
        let l = two_state(1.0, 0.0);
        assert_eq!(evolve(&[0.0, 1.0], &l, 5.0).unwrap(), vec![0.0, 1.0]);
        assert_eq!(evolve(&[0.4, 0.6], &l, 0.0).unwrap(), vec![0.4, 0.6]);
        assert!(evolve(&[1.0], &l, 1.0).is_err());
    }

    #[test]
    fn long_time_reaches_stationary() {
        let l = build_generator(&Family::FepSegment { n: 8, k: 5, p: 0.6 }, Domain::Full).unwrap();
        let pi = kernel_stationary(&l).unwrap();
        let mut d0 = vec![0.0; l.dim()];
        d0[0] = 1.0;
        let v = evolve(&d0, &l, 400.0).unwrap();
        assert!(tv_distance(&v, &pi) < 1e-9);
    }

    #[test]
    fn eps_one_gives_zero() {
        let l = build_generator(&Family::FepSegment { n: 4, k: 3, p: 0.5 }, Domain::Full).unwrap();
        assert_eq!(mixing_time_exact(&l, 1.0).unwrap().t, 0.0);
    }

    #[test]
    fn mixing_time_brackets_eps() {
        let l = build_generator(&Family::FepSegment { n: 4, k: 3, p: 0.5 }, Domain::Full).unwrap();
        let m = mixing_time_exact(&l, 0.25).unwrap();
        assert!(m.t.is_finite() && m.t > 0.0);
        let pts = tv_curve(&l, &[m.t_lo, m.t]).unwrap();
        assert!(pts[0].d > 0.25 && pts[1].d <= 0.25);
        assert!(m.t - m.t_lo <= MIXING_REL_TOL * m.t);
    }

    #[test]
    fn two_state_mixing_time() {
        let l = two_state(0.5, 0.5);
        let m = mixing_time_exact(&l, 0.25).unwrap();
        let exact = 2f64.ln();
        assert!((m.t - exact).abs() <= MIXING_REL_TOL * exact);
    }
}
