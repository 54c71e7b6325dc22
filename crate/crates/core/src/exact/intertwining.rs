//! Entrywise comparison of the FEP generator with the generators of the
//! processes it maps to.

use serde::{Deserialize, Serialize};

use super::families::{build_generator, Domain, Family};
use super::matrix::{state_label, RateMatrix, State};
use crate::engine::obep::{obep_config, ObepParams};
use crate::error::{Error, Result};
use crate::lattice_path::{cap, path_to_sep, to_path};
use crate::mappings::zrp_of_segment;
use crate::state::SegmentConfig;

/// Result of comparing a generator with its image.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntertwiningReport {
    pub name: String,
    pub n: usize,
    pub k: usize,
    pub p: f64,
    /// Source states compared.
    pub states: usize,
    /// `max |L(a, b) - L'(φa, φb)|` over distinct `a, b`.
    pub max_offdiag_diff: f64,
    /// `max |exit'(φa) - exit(a) - expected(φa)|`.
    pub max_exit_diff: f64,
    /// States whose exit rates differ by the expected boundary term.
    pub boundary_states: usize,
    /// Rate from compared source states to states outside the compared set.
    pub source_leak: f64,
    pub worst: Option<String>,
}

impl IntertwiningReport {
    pub fn max_diff(&self) -> f64 {
        self.max_offdiag_diff.max(self.max_exit_diff)
    }
}

fn to_cfg(s: &[u32]) -> SegmentConfig {
    SegmentConfig::new(s.iter().map(|&b| b == 1).collect()).expect("nonempty state")
}

fn bits(v: &[bool]) -> State {
    v.iter().map(|&b| b as u32).collect()
}

#[allow(clippy::too_many_arguments)]
fn compare(
    name: &str,
    (n, k, p): (usize, usize, f64),
    source: &RateMatrix,
    subset: &[usize],
    map: impl Fn(&State) -> Result<State>,
    target: &RateMatrix,
    expected_excess: impl Fn(&State) -> f64,
) -> Result<IntertwiningReport> {
    let mut image = Vec::with_capacity(subset.len());
    for &a in subset {
        let t = map(source.state(a))?;
        let ti = target
            .index_of(&t)
            .ok_or_else(|| Error::InvalidConfig(format!("image {} of {} is not a target state", state_label(&t), state_label(source.state(a)))))?;
        image.push(ti);
    }
    let mut sorted = image.clone();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != image.len() {
        return Err(Error::InvalidConfig(format!("{name}: map is not injective")));
    }
    let mut in_subset = vec![usize::MAX; source.dim()];
    for (pos, &a) in subset.iter().enumerate() {
        in_subset[a] = pos;
    }
    let mut max_offdiag: f64 = 0.0;
    let mut max_exit: f64 = 0.0;
    let mut boundary = 0;
    let mut leak = 0.0;
    let mut worst = None;
    let mut worst_val = 0.0;
    for (pos, &a) in subset.iter().enumerate() {
        let ta = image[pos];
        for &(b, r) in source.row(a) {
            if in_subset[b] == usize::MAX {
                leak += r;
            }
        }
        for (pos_b, &b) in subset.iter().enumerate() {
            if b == a {
                continue;
            }
            let d = (source.rate(a, b) - target.rate(ta, image[pos_b])).abs();
            if d > max_offdiag {
                max_offdiag = d;
            }
            if d > worst_val {
                worst_val = d;
                worst = Some(format!("{} -> {}", state_label(source.state(a)), state_label(source.state(b))));
            }
        }
        let excess = expected_excess(target.state(ta));
        if excess != 0.0 {
            boundary += 1;
        }
        let d = (target.exit(ta) - source.exit(a) - excess).abs();
        if d > max_exit {
            max_exit = d;
        }
        if d > worst_val {
            worst_val = d;
            worst = Some(format!("exit of {}", state_label(source.state(a))));
        }
    }
    Ok(IntertwiningReport {
        name: name.to_string(),
        n,
        k,
        p,
        states: subset.len(),
        max_offdiag_diff: max_offdiag,
        max_exit_diff: max_exit,
        boundary_states: boundary,
        source_leak: leak,
        worst,
    })
}

/// FEP on the ergodic component against exclusion on `[k-1]` with `N-k`
/// particles, moving right at rate `q` and left at rate `p`.
pub fn fep_vs_sep(n: usize, k: usize, p: f64) -> Result<IntertwiningReport> {
    let src = build_generator(&Family::FepSegment { n, k, p }, Domain::Ergodic)?;
    let tgt = build_generator(&Family::Sep { n: k - 1, m: n - k, right: 1.0 - p }, Domain::Full)?;
    if src.dim() != tgt.dim() {
        return Err(Error::Dimension { expected: tgt.dim(), got: src.dim() });
    }
    let subset: Vec<usize> = (0..src.dim()).collect();
    compare(
        "fep-sep",
        (n, k, p),
        &src,
        &subset,
        |s| Ok(bits(&path_to_sep(&to_path(&to_cfg(s))?)?)),
        &tgt,
        |_| 0.0,
    )
}

/// FEP on `Ω_{N,k}` against the zero-range process on `N-k+1` sites.
pub fn fep_vs_zrp(n: usize, k: usize, p: f64) -> Result<IntertwiningReport> {
    let src = build_generator(&Family::FepSegment { n, k, p }, Domain::Full)?;
    let tgt = build_generator(&Family::ZrpSegment { sites: n - k + 1, particles: k, p }, Domain::Full)?;
    if src.dim() != tgt.dim() {
        return Err(Error::Dimension { expected: tgt.dim(), got: src.dim() });
    }
    let subset: Vec<usize> = (0..src.dim()).collect();
    compare(
        "fep-zrp",
        (n, k, p),
        &src,
        &subset,
        |s| Ok(zrp_of_segment(&to_cfg(s)).w.iter().map(|&w| w as u32).collect()),
        &tgt,
        |_| 0.0,
    )
}

fn unit_steps(h: &[i64]) -> bool {
    h.windows(2).all(|w| (w[1] - w[0]).abs() == 1)
}

/// Dynamics reachable from `η⁻` against the OBEP `(q, 0, 0, 0, p)` on
/// `[k-1]`: paths with `η(1) = 0` and unit steps, read as up-steps. At
/// `N-k` particles the OBEP still injects at rate `p` when site `k-1` is
/// empty while the path is capped, which is the only expected mismatch.
pub fn eta_minus_vs_obep(n: usize, k: usize, p: f64) -> Result<IntertwiningReport> {
    if k < 2 {
        return Err(Error::Parameter("need k >= 2".into()));
    }
    let src = build_generator(&Family::FepSegment { n, k, p }, Domain::Full)?;
    let params = ObepParams::right_entry(1.0 - p)?;
    let tgt = build_generator(&Family::Obep { n: k - 1, params }, Domain::Full)?;
    let subset: Vec<usize> = (0..src.dim())
        .filter(|&a| {
            let h = to_path(&to_cfg(src.state(a))).expect("k >= 1").into_heights();
            h[0] == 0 && unit_steps(&h)
        })
        .collect();
    let full = n - k;
    compare(
        "eta-minus-obep",
        (n, k, p),
        &src,
        &subset,
        |s| Ok(bits(&obep_config(to_path(&to_cfg(s))?.heights()))),
        &tgt,
        |z| {
            let ones = z.iter().filter(|&&b| b == 1).count();
            if ones == full && z[k - 2] == 0 {
                params.delta
            } else {
                0.0
            }
        },
    )
}

/// Dynamics reachable from `η⁺` against the OBEP `(q, q, 0, 0, 0)`:
/// paths with `η(k)` at the cap and unit steps. The OBEP injects at rate
/// `q` into an empty site 1 even when the path already touches zero.
pub fn eta_plus_vs_obep(n: usize, k: usize, p: f64) -> Result<IntertwiningReport> {
    if k < 2 {
        return Err(Error::Parameter("need k >= 2".into()));
    }
    let src = build_generator(&Family::FepSegment { n, k, p }, Domain::Full)?;
    let params = ObepParams::left_entry(1.0 - p)?;
    let tgt = build_generator(&Family::Obep { n: k - 1, params }, Domain::Full)?;
    let top = cap(n, k);
    let subset: Vec<usize> = (0..src.dim())
        .filter(|&a| {
            let h = to_path(&to_cfg(src.state(a))).expect("k >= 1").into_heights();
            h[k - 1] == top && unit_steps(&h)
        })
        .collect();
    compare(
        "eta-plus-obep",
        (n, k, p),
        &src,
        &subset,
        |s| Ok(bits(&obep_config(to_path(&to_cfg(s))?.heights()))),
        &tgt,
        |z| {
            let ones = z.iter().filter(|&&b| b == 1).count() as i64;
            let h1 = top - (2 * ones - (k as i64 - 1));
            if h1 == 0 && z[0] == 0 {
                params.alpha
            } else {
                0.0
            }
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_intertwinings_small() {
        for (n, k) in [(5, 3), (7, 5), (8, 5), (9, 6)] {
            for p in [0.5, 0.7] {
                for r in [fep_vs_sep(n, k, p), fep_vs_zrp(n, k, p), eta_minus_vs_obep(n, k, p), eta_plus_vs_obep(n, k, p)] {
                    let r = r.unwrap();
                    assert!(r.max_diff() <= 1e-14, "{r:?}");
                }
            }
        }
    }

    #[test]
    fn boundary_term_is_visible() {
        let r = eta_minus_vs_obep(8, 5, 0.6).unwrap();
        assert!(r.boundary_states > 0);
        assert_eq!(r.source_leak, 0.0);
    }
}
