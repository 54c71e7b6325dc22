//! Grand canonical measures of the circle FEP, canonical marginals of the
//! uniform law on `G_{N,k}`, and two-point correlations.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::state::{binomial, enumerate_circle};

fn check_rho(rho: f64) -> Result<()> {
    if rho > 0.5 && rho < 1.0 {
        Ok(())
    } else {
        Err(Error::Parameter(format!("density must lie in (1/2, 1), got {rho}")))
    }
}

/// No two adjacent zeros in the window.
pub fn in_g_hat(sigma: &[bool]) -> bool {
    sigma.windows(2).all(|w| w[0] || w[1])
}

/// `π_ρ(η|_{[ℓ]} = σ) = 1_{Ĝ}(σ) ρ^{σ₁+σ_ℓ-n} (1-ρ)^{ℓ-n} (2ρ-1)^{2n+1-ℓ-σ₁-σ_ℓ}`.
pub fn grand_canonical(rho: f64, sigma: &[bool]) -> Result<f64> {
    check_rho(rho)?;
    if sigma.is_empty() {
        return Ok(1.0);
    }
    if !in_g_hat(sigma) {
        return Ok(0.0);
    }
    let l = sigma.len() as i64;
    let n = sigma.iter().filter(|&&b| b).count() as i64;
    let ends = sigma[0] as i64 + sigma[sigma.len() - 1] as i64;
    Ok(rho.powi((ends - n) as i32) * (1.0 - rho).powi((l - n) as i32) * (2.0 * rho - 1.0).powi((2 * n + 1 - l - ends) as i32))
}

/// `π_ρ` as a stationary two-state chain: after a hole comes a particle,
/// after a particle a hole with probability `(1-ρ)/ρ`. Indexed
/// `[from][to]` with `0` a hole.
pub fn grand_canonical_chain(rho: f64) -> Result<[[f64; 2]; 2]> {
    check_rho(rho)?;
    let a = (1.0 - rho) / rho;
    Ok([[0.0, 1.0], [a, 1.0 - a]])
}

/// `Σ_σ π_ρ(σ)` over `{0,1}^ℓ`, with compensated summation.
pub fn grand_canonical_total(rho: f64, ell: usize) -> Result<f64> {
    let mut acc = Neumaier::default();
    for sigma in windows(ell) {
        acc.add(grand_canonical(rho, &sigma)?);
    }
    Ok(acc.sum())
}

/// Every `σ ∈ {0,1}^ℓ`, ordered as binary numbers with site 1 first.
pub fn windows(ell: usize) -> impl Iterator<Item = Vec<bool>> {
    (0u64..1u64 << ell).map(move |b| (0..ell).map(|i| b >> (ell - 1 - i) & 1 == 1).collect())
}

/// Kahan–Babuška–Neumaier summation.
#[derive(Clone, Copy, Debug, Default)]
pub struct Neumaier {
    s: f64,
    c: f64,
}

impl Neumaier {
    pub fn add(&mut self, x: f64) {
        let t = self.s + x;
        if self.s.abs() >= x.abs() {
            self.c += (self.s - t) + x;
        } else {
            self.c += (x - t) + self.s;
        }
        self.s = t;
    }

    pub fn sum(&self) -> f64 {
        self.s + self.c
    }
}

/// `ln C(a, b)`, `-∞` when the coefficient vanishes.
pub fn ln_binomial(a: i64, b: i64) -> f64 {
    if a < 0 || b < 0 || b > a {
        return f64::NEG_INFINITY;
    }
    ln_gamma(a as f64 + 1.0) - ln_gamma(b as f64 + 1.0) - ln_gamma((a - b) as f64 + 1.0)
}

fn marginal_args(n: usize, k: usize, sigma: &[bool]) -> (i64, i64) {
    let ell = sigma.len() as i64;
    let m = sigma.iter().filter(|&&b| b).count() as i64;
    let ends = sigma[0] as i64 + sigma[sigma.len() - 1] as i64;
    let (n, k) = (n as i64, k as i64);
    (k - m - 1 + ends, n - ell - k + m)
}

/// `ν_{N,k}(η|_{[ℓ]} = σ) = C(k-n-1+σ₁+σ_ℓ, N-ℓ-k+n) / |G_{N,k}|` with
/// `n = |σ|`, through log-gamma.
pub fn canonical_marginal(n: usize, k: usize, sigma: &[bool]) -> Result<f64> {
    check_canonical(n, k, sigma)?;
    if !in_g_hat(sigma) {
        return Ok(0.0);
    }
    let (a, b) = marginal_args(n, k, sigma);
    let ln_g = (n as f64 / k as f64).ln() + ln_binomial(k as i64, (n - k) as i64);
    Ok((ln_binomial(a, b) - ln_g).exp())
}

/// The same marginal in exact arithmetic.
pub fn canonical_marginal_exact(n: usize, k: usize, sigma: &[bool]) -> Result<BigRational> {
    check_canonical(n, k, sigma)?;
    if !in_g_hat(sigma) {
        return Ok(BigRational::zero());
    }
    let (a, b) = marginal_args(n, k, sigma);
    let num = if a < 0 || b < 0 || b > a { BigUint::zero() } else { binomial(a as u64, b as u64) };
    let g = binomial(k as u64, (n - k) as u64) * BigUint::from(n) / BigUint::from(k);
    Ok(BigRational::new(num.into(), g.into()))
}

/// The marginal by enumerating `G_{N,k}`.
pub fn canonical_marginal_enumerated(n: usize, k: usize, sigma: &[bool]) -> Result<f64> {
    check_canonical(n, k, sigma)?;
    let mut total = 0u64;
    let mut hit = 0u64;
    for c in enumerate_circle(n, k).filter(|c| c.is_ergodic()) {
        total += 1;
        if c.occ()[..sigma.len()] == *sigma {
            hit += 1;
        }
    }
    Ok(hit as f64 / total as f64)
}

fn check_canonical(n: usize, k: usize, sigma: &[bool]) -> Result<()> {
    if sigma.is_empty() || sigma.len() >= n {
        return Err(Error::Parameter(format!("window of {} sites must be nonempty and shorter than N = {n}", sigma.len())));
    }
    if 2 * k <= n || k >= n {
        return Err(Error::Parameter(format!("need N/2 < k < N, got N={n}, k={k}")));
    }
    Ok(())
}

/// `max_σ |ν_{N,k}(σ) - π_{k/N}(σ)|` over `{0,1}^ℓ`.
pub fn equivalence_error(n: usize, k: usize, ell: usize) -> Result<f64> {
    let rho = k as f64 / n as f64;
    let mut worst: f64 = 0.0;
    for sigma in windows(ell) {
        worst = worst.max((canonical_marginal(n, k, &sigma)? - grand_canonical(rho, &sigma)?).abs());
    }
    Ok(worst)
}

/// `P(η(1)=i, η(ℓ)=j) / (P(η(1)=i) P(η(ℓ)=j))` for the four sign pairs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRatios {
    pub ell: usize,
    /// Indexed `[i][j]`.
    pub ratio: [[f64; 2]; 2],
}

impl CorrelationRatios {
    /// `max_{i,j} |ratio - 1|`.
    pub fn max_deviation(&self) -> f64 {
        self.ratio.iter().flatten().map(|r| (r - 1.0).abs()).fold(0.0, f64::max)
    }
}

/// Ratios under any window law given as a function of `σ ∈ {0,1}^ℓ`.
pub fn correlation_ratio_from(ell: usize, mut law: impl FnMut(&[bool]) -> Result<f64>) -> Result<CorrelationRatios> {
    if ell < 2 {
        return Err(Error::Parameter("window must have at least two sites".into()));
    }
    let mut joint = [[Neumaier::default(); 2]; 2];
    for sigma in windows(ell) {
        let w = law(&sigma)?;
        joint[sigma[0] as usize][sigma[ell - 1] as usize].add(w);
    }
    let j = joint.map(|r| r.map(|a| a.sum()));
    let first = [j[0][0] + j[0][1], j[1][0] + j[1][1]];
    let last = [j[0][0] + j[1][0], j[0][1] + j[1][1]];
    let mut ratio = [[0.0; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            ratio[a][b] = j[a][b] / (first[a] * last[b]);
        }
    }
    Ok(CorrelationRatios { ell, ratio })
}

/// Grand canonical ratios from the chain representation.
pub fn correlation_ratio_gc(rho: f64, ell: usize) -> Result<CorrelationRatios> {
    if ell < 2 {
        return Err(Error::Parameter("window must have at least two sites".into()));
    }
    let p = grand_canonical_chain(rho)?;
    let stat = [1.0 - rho, rho];
    let mut m = [[1.0, 0.0], [0.0, 1.0]];
    for _ in 1..ell {
        let mut next = [[0.0; 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                next[a][b] = m[a][0] * p[0][b] + m[a][1] * p[1][b];
            }
        }
        m = next;
    }
    let mut ratio = [[0.0; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            ratio[a][b] = stat[a] * m[a][b] / (stat[a] * stat[b]);
        }
    }
    Ok(CorrelationRatios { ell, ratio })
}

/// Canonical ratios from the binomial marginals.
pub fn correlation_ratio_canonical(n: usize, k: usize, ell: usize) -> Result<CorrelationRatios> {
    correlation_ratio_from(ell, |s| canonical_marginal(n, k, s))
}

/// Converts an exact probability for reporting.
pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}
