//! Spectral gaps of reversible generators and the first Fourier mode of
//! the circle FEP.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::families::{build_generator, fep_circle_ergodic, Domain, Family};
use super::matrix::{RateMatrix, State};
use super::stationary::kernel_stationary;
use crate::error::{Error, Result};

/// Largest dimension handled by the dense eigensolver.
pub const EIGEN_CAP: usize = 5_000;
/// Tolerance on detailed balance for treating a generator as reversible.
pub const REVERSIBILITY_TOL: f64 = 1e-10;

/// Eigenvalues of `-L`, ascending, for a reversible generator with a
/// fully supported stationary law `pi`.
pub fn spectrum(l: &RateMatrix, pi: &[f64]) -> Result<Vec<f64>> {
    let n = l.dim();
    if n > EIGEN_CAP {
        return Err(Error::StateSpaceOverflow { size: n, cap: EIGEN_CAP });
    }
    if pi.iter().any(|&v| v <= 0.0) {
        return Err(Error::Parameter("stationary law must charge every state".into()));
    }
    let db = l.detailed_balance_error(pi);
    if db > REVERSIBILITY_TOL {
        return Err(Error::Parameter(format!("generator is not reversible (detailed balance error {db:e})")));
    }
    let sq: Vec<f64> = pi.iter().map(|v| v.sqrt()).collect();
    let mut s = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        s[(i, i)] = l.exit(i);
        for &(j, r) in l.row(i) {
            let v = -0.5 * (sq[i] / sq[j] * r + sq[j] / sq[i] * l.rate(j, i));
            s[(i, j)] = v;
        }
    }
    let mut ev: Vec<f64> = SymmetricEigen::new(s).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// Smallest nonzero eigenvalue of `-L`; zero when the chain is reducible.
pub fn spectral_gap(l: &RateMatrix) -> Result<f64> {
    let pi = kernel_stationary(l)?;
    let ev = spectrum(l, &pi)?;
    Ok(ev.get(1).copied().unwrap_or(0.0).max(0.0))
}

/// Which neighbour marks a particle in `a₁`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum A1Variant {
    /// `ζ(i) = 1(ξ(x_i + 1) = 0)`, used when `k >= 2N/3`.
    HoleAfter,
    /// `ζ(i) = 1(ξ(x_i + 1) = 1)`, used when `k <= 2N/3`.
    ParticleAfter,
}

impl A1Variant {
    /// Variants whose range contains `(n, k)`.
    pub fn applicable(n: usize, k: usize) -> Vec<A1Variant> {
        let mut out = Vec::new();
        if 3 * k >= 2 * n {
            out.push(A1Variant::HoleAfter);
        }
        if 3 * k <= 2 * n {
            out.push(A1Variant::ParticleAfter);
        }
        out
    }

    fn mark(self, next: u32) -> bool {
        match self {
            A1Variant::HoleAfter => next == 0,
            A1Variant::ParticleAfter => next == 1,
        }
    }
}

/// `Σ_i ζ(i) cos(2π(i + shift)/k)` with particles labelled `0..k` from
/// site 0 clockwise.
pub fn a1_value(s: &[u32], variant: A1Variant, shift: usize) -> f64 {
    let n = s.len();
    let k = s.iter().filter(|&&b| b == 1).count();
    let mut total = 0.0;
    let mut i = 0;
    for x in 0..n {
        if s[x] == 1 {
            if variant.mark(s[(x + 1) % n]) {
                total += (2.0 * PI * ((i + shift) % k) as f64 / k as f64).cos();
            }
            i += 1;
        }
    }
    total
}

/// Outcome of an eigenfunction check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenCheck {
    pub n: usize,
    pub k: usize,
    pub variant: A1Variant,
    pub lifted: bool,
    pub eigenvalue: f64,
    /// `‖L a₁ - (cos(2π/k) - 1) a₁‖∞`.
    pub residual: f64,
    /// `‖a₁‖∞`, to rule out the zero function.
    pub norm: f64,
    pub states: usize,
}

/// Applies the symmetric circle generator on `G_{N,k}` to `a₁` with the
/// labels fixed at site 0.
pub fn eigencheck_a1(n: usize, k: usize, variant: A1Variant) -> Result<EigenCheck> {
    let l = build_generator(&Family::FepCircle { n, k, p: 0.5 }, Domain::Ergodic)?;
    let f: Vec<f64> = l.states().iter().map(|s| a1_value(s, variant, 0)).collect();
    Ok(check(n, k, variant, false, &l, &f))
}

/// Same check on the chain that also tracks the label offset `r ∈ Z_k`:
/// a particle crossing from `N-1` to `0` sends `r` to `r - 1`, the reverse
/// crossing to `r + 1`, and the test function uses labels `i + r`.
pub fn eigencheck_a1_lifted(n: usize, k: usize, variant: A1Variant) -> Result<EigenCheck> {
    let l = lifted_circle_generator(n, k)?;
    let f: Vec<f64> = l
        .states()
        .iter()
        .map(|s| {
            let (cfg, r) = s.split_at(n);
            a1_value(cfg, variant, r[0] as usize)
        })
        .collect();
    Ok(check(n, k, variant, true, &l, &f))
}

fn check(n: usize, k: usize, variant: A1Variant, lifted: bool, l: &RateMatrix, f: &[f64]) -> EigenCheck {
    let eigenvalue = (2.0 * PI / k as f64).cos() - 1.0;
    let lf = l.apply(f);
    let residual = lf.iter().zip(f).map(|(a, b)| (a - eigenvalue * b).abs()).fold(0.0, f64::max);
    let norm = f.iter().map(|v| v.abs()).fold(0.0, f64::max);
    EigenCheck { n, k, variant, lifted, eigenvalue, residual, norm, states: l.dim() }
}

/// Symmetric circle FEP on `G_{N,k} × Z_k`; a state is the occupation
/// vector followed by the offset.
pub fn lifted_circle_generator(n: usize, k: usize) -> Result<RateMatrix> {
    let base = build_generator(&Family::FepCircle { n, k, p: 0.5 }, Domain::Ergodic)?;
    if k == 0 {
        return Err(Error::Parameter("need at least one particle".into()));
    }
    let states: Vec<State> = base
        .states()
        .iter()
        .flat_map(|s| {
            (0..k as u32).map(move |r| {
                let mut v = s.clone();
                v.push(r);
                v
            })
        })
        .collect();
    RateMatrix::build(states, |s| {
        let (cfg, r) = s.split_at(n);
        let r = r[0] as usize;
        let mut out = Vec::new();
        if n < 3 || !fep_circle_ergodic(cfg) {
            return out;
        }
        for x in 0..n {
            if cfg[x] == 0 {
                continue;
            }
            let (l, rt) = ((x + n - 1) % n, (x + 1) % n);
            for (back, to) in [(l, rt), (rt, l)] {
                if cfg[back] == 1 && cfg[to] == 0 {
                    let mut t = cfg.to_vec();
                    t[x] = 0;
                    t[to] = 1;
                    let r2 = if x == n - 1 && to == 0 {
                        (r + k - 1) % k
                    } else if x == 0 && to == n - 1 {
                        (r + 1) % k
                    } else {
                        r
                    };
                    t.push(r2 as u32);
                    out.push((t, 0.5));
                }
            }
        }
        out
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_state_gap_is_one() {
        let l = build_generator(&Family::FepSegment { n: 4, k: 3, p: 0.5 }, Domain::Ergodic).unwrap();
        assert_eq!(l.dim(), 2);
        assert!((spectral_gap(&l).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn asymmetric_two_state_gap() {
        let l = build_generator(&Family::FepSegment { n: 4, k: 3, p: 0.8 }, Domain::Ergodic).unwrap();
        assert!((spectral_gap(&l).unwrap() - 1.0).abs() < 1e-12);
        let l = build_generator(&Family::FepSegment { n: 7, k: 5, p: 0.7 }, Domain::Ergodic).unwrap();
        let ev = spectrum(&l, &kernel_stationary(&l).unwrap()).unwrap();
        assert!(ev[0].abs() < 1e-12 && ev[1] > 1e-6);
    }

    #[test]
    fn literal_labels_six_four() {
        let c = eigencheck_a1(6, 4, A1Variant::HoleAfter).unwrap();
        assert!((c.eigenvalue + 1.0).abs() < 1e-12);
        assert!(c.residual < 1e-10, "{c:?}");
        assert!(c.norm > 0.5);
        let c = eigencheck_a1(5, 4, A1Variant::HoleAfter).unwrap();
        assert!((c.residual - 0.5).abs() < 1e-12, "{c:?}");
        let l = build_generator(&Family::FepCircle { n: 6, k: 4, p: 0.5 }, Domain::Ergodic).unwrap();
        let ev = spectrum(&l, &kernel_stationary(&l).unwrap()).unwrap();
        assert!(ev.iter().any(|v| (v - 1.0).abs() < 1e-10));
    }

    #[test]
    fn lifted_chain_is_exact() {
        for (n, k) in [(5, 4), (7, 5), (9, 6), (10, 7), (11, 7)] {
            for v in [A1Variant::HoleAfter, A1Variant::ParticleAfter] {
                let c = eigencheck_a1_lifted(n, k, v).unwrap();
                assert!(c.residual < 1e-10, "{c:?}");
                assert!(c.norm > 0.5);
            }
        }
    }

    #[test]
    fn literal_labels_break_for_larger_n() {
        let c = eigencheck_a1(9, 6, A1Variant::HoleAfter).unwrap();
        assert!(c.residual > 1e-3, "{c:?}");
    }
}
