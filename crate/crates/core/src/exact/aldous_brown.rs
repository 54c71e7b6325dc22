//! Hitting of the rare set `E = {ω(1) >= 1}` by the constant-rate
//! zero-range process started from its stationary law.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::families::{build_generator, compositions, Domain, Family};
use super::stationary::formula_stationary;
use super::uniformize::evolve;
use crate::error::{Error, Result};

/// Survival against the bound at one time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AbPoint {
    pub t: f64,
    /// `P_π(τ_E > t)`.
    pub survival: f64,
    /// `π(E^c) exp(-t q(E,E^c) / π(E^c))`.
    pub bound: f64,
}

impl AbPoint {
    pub fn margin(&self) -> f64 {
        self.survival - self.bound
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AbReport {
    pub n: usize,
    pub m: usize,
    pub p: f64,
    pub pi_ec: f64,
    /// `Σ_{ω∈E, ω'∈E^c} π(ω) L(ω, ω')`.
    pub capacity: f64,
    /// `p π(ω(1) = 1)`.
    pub capacity_formula: f64,
    pub points: Vec<AbPoint>,
}

impl AbReport {
    pub fn min_margin(&self) -> f64 {
        self.points.iter().map(AbPoint::margin).fold(f64::INFINITY, f64::min)
    }

    /// Mean time scale `π(E^c) / q(E, E^c)`.
    pub fn scale(&self) -> f64 {
        self.pi_ec / self.capacity
    }
}

/// Exact survival from `π_{n,m}` on the sub-generator killed on entering
/// `E`, compared with the rare-set bound on `grid`.
pub fn aldous_brown_check(n: usize, m: usize, p: f64, grid: &[f64]) -> Result<AbReport> {
    if n < 2 || m == 0 {
        return Err(Error::Parameter(format!("need n >= 2 and m >= 1, got n={n}, m={m}")));
    }
    let fam = Family::ZrpConstantRate { n, m, p };
    let l = build_generator(&fam, Domain::Full)?;
    let pi = formula_stationary(&fam, &l)?;
    let in_e = |s: &[u32]| s[0] >= 1;
    let mut capacity = 0.0;
    let mut pi_ec = 0.0;
    let mut pi_one = 0.0;
    for i in 0..l.dim() {
        let s = l.state(i);
        if in_e(s) {
            if s[0] == 1 {
                pi_one += pi[i];
            }
            for &(j, r) in l.row(i) {
                if !in_e(l.state(j)) {
                    capacity += pi[i] * r;
                }
            }
        } else {
            pi_ec += pi[i];
        }
    }
    let sub = l.restrict(|s| !in_e(s));
    let start: Vec<f64> = (0..l.dim()).filter(|&i| !in_e(l.state(i))).map(|i| pi[i]).collect();
    let mut points = Vec::with_capacity(grid.len());
    let mut cur = start;
    let mut now = 0.0;
    for &t in grid {
        if t < now {
            return Err(Error::Parameter("time grid must be sorted".into()));
        }
        cur = evolve(&cur, &sub, t - now)?;
        now = t;
        let survival: f64 = cur.iter().sum();
        let bound = pi_ec * (-t * capacity / pi_ec).exp();
        points.push(AbPoint { t, survival, bound });
    }
    Ok(AbReport { n, m, p, pi_ec, capacity, capacity_formula: p * pi_one, points })
}

/// `π_{n,m}(ω(1) = 1)` in exact arithmetic for rational `λ = q/p`.
pub fn pi_first_site_one(n: usize, m: usize, lambda: &BigRational) -> BigRational {
    let mut num = BigRational::zero();
    let mut z = BigRational::zero();
    for s in compositions(m, n) {
        let e: usize = s.iter().enumerate().map(|(x, &w)| (n - x) * w as usize).sum();
        let w = pow(lambda, e);
        if s[0] == 1 {
            num += &w;
        }
        z += w;
    }
    num / z
}

/// Whether `π_{n,m}(ω(1) = 1) <= λ^{n-1}` holds exactly, for `p = a/b`.
pub fn first_site_bound_holds(n: usize, m: usize, a: i64, b: i64) -> Result<(bool, BigRational, BigRational)> {
    if !(0 < b - a && b - a < a) {
        return Err(Error::Parameter(format!("need 1/2 < a/b < 1, got {a}/{b}")));
    }
    let lambda = BigRational::new(BigInt::from(b - a), BigInt::from(a));
    let lhs = pi_first_site_one(n, m, &lambda);
    let rhs = pow(&lambda, n - 1);
    Ok((lhs <= rhs, lhs, rhs))
}

fn pow(x: &BigRational, e: usize) -> BigRational {
    let mut out = BigRational::one();
    for _ in 0..e {
        out *= x;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::ensembles::to_f64;

    #[test]
    fn three_three_integer_grid() {
        let grid: Vec<f64> = (0..=50).map(f64::from).collect();
        let r = aldous_brown_check(3, 3, 0.7, &grid).unwrap();
        assert!((r.capacity - r.capacity_formula).abs() < 1e-14);
        assert!((r.points[0].survival - r.pi_ec).abs() < 1e-15);
        assert!(r.min_margin() >= -1e-12, "{r:?}");
    }

    #[test]
    fn exact_first_site_bound() {
        for (a, b) in [(3, 5), (7, 10), (4, 5)] {
            for n in 2..=5 {
                for m in 1..=4 {
                    let (ok, lhs, rhs) = first_site_bound_holds(n, m, a, b).unwrap();
                    assert!(ok, "{n} {m} {a}/{b}: {lhs} > {rhs}");
                }
            }
        }
        let lam = BigRational::new(3.into(), 7.into());
        let two_two = to_f64(&pi_first_site_one(2, 2, &lam));
        let l: f64 = 3.0 / 7.0;
        assert!((two_two - l.powi(3) / (l.powi(4) + l.powi(3) + l.powi(2))).abs() < 1e-15);
    }

    #[test]
    fn small_lambda_makes_e_rare() {
        let lam = BigRational::new(1.into(), 1000.into());
        assert!(to_f64(&pi_first_site_one(3, 2, &lam)) < 1e-5);
    }
}
