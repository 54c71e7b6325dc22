use nalgebra::{DMatrix, DVector};
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use super::families::Family;
use super::matrix::{DistVec, RateMatrix};
use crate::error::{Error, Result};

/// Largest closed class solved densely.
pub const DENSE_CAP: usize = 6_000;

/// Closed communicating classes, each sorted, ordered by first state.
pub fn closed_classes(l: &RateMatrix) -> Vec<Vec<usize>> {
    let n = l.dim();
    let mut g = DiGraph::<(), ()>::with_capacity(n, l.nnz());
    let nodes: Vec<_> = (0..n).map(|_| g.add_node(())).collect();
    for i in 0..n {
        for &(j, _) in l.row(i) {
            g.add_edge(nodes[i], nodes[j], ());
        }
    }
    let sccs = tarjan_scc(&g);
    let mut comp = vec![0usize; n];
    for (c, scc) in sccs.iter().enumerate() {
        for v in scc {
            comp[v.index()] = c;
        }
    }
    let mut out: Vec<Vec<usize>> = sccs
        .iter()
        .enumerate()
        .filter(|(c, scc)| {
            scc.iter().all(|v| {
                let i = v.index();
                l.killing(i) == 0.0 && l.row(i).iter().all(|&(j, _)| comp[j] == *c)
            })
        })
        .map(|(_, scc)| {
            let mut s: Vec<usize> = scc.iter().map(|v| v.index()).collect();
            s.sort_unstable();
            s
        })
        .collect();
    out.sort();
    out
}

/// Stationary law from the kernel of `Lᵀ` on the unique closed class.
pub fn kernel_stationary(l: &RateMatrix) -> Result<DistVec> {
    let classes = closed_classes(l);
    if classes.len() != 1 {
        return Err(Error::NonUniqueKernel { classes: classes.len(), sizes: classes.iter().map(Vec::len).collect() });
    }
    let class = &classes[0];
    let m = class.len();
    if m > DENSE_CAP {
        return Err(Error::StateSpaceOverflow { size: m, cap: DENSE_CAP });
    }
    let mut local = vec![usize::MAX; l.dim()];
    for (a, &i) in class.iter().enumerate() {
        local[i] = a;
    }
    // Rows of Lᵀ with the last equation replaced by normalization.
    let mut a = DMatrix::<f64>::zeros(m, m);
    for (ai, &i) in class.iter().enumerate() {
        a[(ai, ai)] -= l.exit(i);
        for &(j, r) in l.row(i) {
            a[(local[j], ai)] += r;
        }
    }
    let mut b = DVector::<f64>::zeros(m);
    for c in 0..m {
        a[(m - 1, c)] = 1.0;
    }
    b[m - 1] = 1.0;
    let x = a
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::NonUniqueKernel { classes: 1, sizes: vec![m] })?;
    let mut pi = vec![0.0; l.dim()];
    for (ai, &i) in class.iter().enumerate() {
        pi[i] = x[ai].max(0.0);
    }
    let s: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|v| *v /= s);
    Ok(pi)
}

/// Closed-form stationary law aligned with `l`, when the family has one.
///
/// - FEP segment: `μ ∝ λ^{A}` on the ergodic component, `λ = q/p` and `A`
///   the sum of the 1-based hole positions;
/// - FEP circle: uniform on the ergodic component;
/// - SEP: `∝ (r/(1-r))^{Σ x}` over particle positions;
/// - constant-rate ZRP: `π ∝ Π_x λ^{(n+1-x) ω(x)}`;
/// - ZRP with rate `1{pile >= 2}`: the image of the matching FEP law,
///   supported on configurations without empty piles.
pub fn formula_stationary(family: &Family, l: &RateMatrix) -> Result<DistVec> {
    let lam = |p: f64| {
        if p <= 0.0 || p >= 1.0 {
            Err(Error::Parameter(format!("need 0 < p < 1 for λ = q/p, got {p}")))
        } else {
            Ok((1.0 - p) / p)
        }
    };
    let logw: Vec<f64> = match *family {
        Family::FepSegment { p, .. } => {
            let ll = lam(p)?.ln();
            l.states()
                .iter()
                .map(|s| {
                    if super::families::fep_segment_ergodic(s) {
                        ll * hole_sum(s) as f64
                    } else {
                        f64::NEG_INFINITY
                    }
                })
                .collect()
        }
        Family::FepCircle { .. } => l
            .states()
            .iter()
            .map(|s| if super::families::fep_circle_ergodic(s) { 0.0 } else { f64::NEG_INFINITY })
            .collect(),
        Family::Sep { right, .. } => {
            let lr = lam(1.0 - right)?.ln();
            l.states()
                .iter()
                .map(|s| lr * s.iter().enumerate().map(|(x, &b)| x as f64 * b as f64).sum::<f64>())
                .collect()
        }
        Family::ZrpConstantRate { n, p, .. } => {
            let ll = lam(p)?.ln();
            l.states()
                .iter()
                .map(|s| ll * s.iter().enumerate().map(|(x, &w)| ((n - x) * w as usize) as f64).sum::<f64>())
                .collect()
        }
        Family::ZrpSegment { p, .. } => {
            let ll = lam(p)?.ln();
            l.states()
                .iter()
                .map(|s| {
                    if s.iter().all(|&w| w >= 1) {
                        // Hole j sits at y(j) = Σ_{i<j} (w_i + 1).
                        let mut y = 0u64;
                        let mut a = 0u64;
                        for &w in &s[..s.len() - 1] {
                            y += w as u64 + 1;
                            a += y;
                        }
                        ll * a as f64
                    } else {
                        f64::NEG_INFINITY
                    }
                })
                .collect()
        }
        Family::ZrpCircle { .. } => {
            l.states().iter().map(|s| if s.iter().all(|&w| w >= 1) { 0.0 } else { f64::NEG_INFINITY }).collect()
        }
        Family::Obep { .. } => {
            return Err(Error::Parameter("no closed-form stationary law for the OBEP; use the kernel solve".into()))
        }
    };
    normalize_log(&logw)
}

fn hole_sum(s: &[u32]) -> u64 {
    s.iter().enumerate().filter(|(_, &b)| b == 0).map(|(x, _)| x as u64 + 1).sum()
}

/// Normalizes `exp(logw)` without overflow.
pub fn normalize_log(logw: &[f64]) -> Result<DistVec> {
    let top = logw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return Err(Error::InvalidConfig("empty support".into()));
    }
    let w: Vec<f64> = logw.iter().map(|&v| (v - top).exp()).collect();
    let s: f64 = w.iter().sum();
    Ok(w.into_iter().map(|v| v / s).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::families::{build_generator, Domain};

    #[test]
    fn fep_four_three_ratio() {
        let p = 0.8;
        let fam = Family::FepSegment { n: 4, k: 3, p };
        let l = build_generator(&fam, Domain::Full).unwrap();
        let mu = kernel_stationary(&l).unwrap();
        let f = formula_stationary(&fam, &l).unwrap();
        let i = l.index_of(&[1, 1, 0, 1]).unwrap();
        let j = l.index_of(&[1, 0, 1, 1]).unwrap();
        assert!((mu[i] / mu[j] - (1.0 - p) / p).abs() < 1e-12);
        for (a, b) in mu.iter().zip(&f) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(mu[l.index_of(&[1, 1, 1, 0]).unwrap()], 0.0);
    }

    #[test]
    fn symmetric_is_uniform_on_ergodic() {
        let l = build_generator(&Family::FepSegment { n: 9, k: 6, p: 0.5 }, Domain::Full).unwrap();
        let mu = kernel_stationary(&l).unwrap();
        let support: Vec<f64> = mu.iter().copied().filter(|&v| v > 1e-13).collect();
        assert_eq!(support.len(), 10);
        for v in support {
            assert!((v - 0.1).abs() < 1e-12);
        }
    }

    #[test]
    fn zrp_two_two_weights() {
        let p = 0.7;
        let lam: f64 = 0.3 / 0.7;
        let fam = Family::ZrpConstantRate { n: 2, m: 2, p };
        let l = build_generator(&fam, Domain::Full).unwrap();
        let pi = kernel_stationary(&l).unwrap();
        let f = formula_stationary(&fam, &l).unwrap();
        let w = [lam.powi(4), lam.powi(3), lam.powi(2)];
        let z: f64 = w.iter().sum();
        for (s, expect) in [([2u32, 0u32], w[0] / z), ([1, 1], w[1] / z), ([0, 2], w[2] / z)] {
            let i = l.index_of(&s).unwrap();
            assert!((pi[i] - expect).abs() < 1e-13);
            assert!((f[i] - expect).abs() < 1e-13);
        }
    }

    #[test]
    fn disconnected_reports_classes() {
        let l = build_generator(&Family::FepSegment { n: 6, k: 2, p: 0.5 }, Domain::Full).unwrap();
        match kernel_stationary(&l) {
            Err(Error::NonUniqueKernel { classes, sizes }) => {
                assert_eq!(classes, 10);
                assert!(sizes.iter().all(|&s| s == 1));
            }
            other => panic!("{other:?}"),
        }
    }
}
