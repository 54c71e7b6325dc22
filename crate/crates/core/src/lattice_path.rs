//! Height-function representation `η(i) = 2x_i - 3i + 1` of segment
//! configurations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::{special_configs, SegmentConfig};

/// Lattice path with `h[i-1] = η(i)` for `i = 1..=k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatticePath {
    n: usize,
    k: usize,
    h: Vec<i64>,
}

/// Right endpoint bound `2N - 3k + 1`.
pub fn cap(n: usize, k: usize) -> i64 {
    2 * n as i64 - 3 * k as i64 + 1
}

impl LatticePath {
    /// Validates parity, step and boundary constraints.
    pub fn new(n: usize, k: usize, h: Vec<i64>) -> Result<Self> {
        if k == 0 || k > n {
            return Err(Error::InvalidPath(format!("need 1 <= k <= N, got N={n}, k={k}")));
        }
        if h.len() != k {
            return Err(Error::Dimension { expected: k, got: h.len() });
        }
        for (idx, &y) in h.iter().enumerate() {
            let i = idx as i64 + 1;
            if (y - (1 - i)).rem_euclid(2) != 0 {
                return Err(Error::InvalidPath(format!("parity violated at coordinate {i}")));
            }
        }
        if let Some(i) = h.windows(2).position(|w| w[1] - w[0] < -1) {
            return Err(Error::InvalidPath(format!("step below -1 after coordinate {}", i + 1)));
        }
        if h[0] < 0 {
            return Err(Error::InvalidPath(format!("left endpoint {} below 0", h[0])));
        }
        if h[k - 1] > cap(n, k) {
            return Err(Error::InvalidPath(format!(
                "right endpoint {} above {}",
                h[k - 1],
                cap(n, k)
            )));
        }
        Ok(Self { n, k, h })
    }

    /// Builds a path without validation; the caller guarantees validity.
    pub(crate) fn from_raw(n: usize, k: usize, h: Vec<i64>) -> Self {
        debug_assert!(Self::new(n, k, h.clone()).is_ok());
        Self { n, k, h }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn heights(&self) -> &[i64] {
        &self.h
    }

    pub fn into_heights(self) -> Vec<i64> {
        self.h
    }

    /// `η(i)` for 1-based `i`.
    pub fn at(&self, i: usize) -> i64 {
        self.h[i - 1]
    }

    pub fn cap(&self) -> i64 {
        cap(self.n, self.k)
    }

    /// 1-based particle positions `x_i = (η(i) + 3i - 1) / 2`.
    pub fn positions(&self) -> Vec<usize> {
        self.h
            .iter()
            .enumerate()
            .map(|(idx, &y)| ((y + 3 * (idx as i64 + 1) - 1) / 2) as usize)
            .collect()
    }

    pub fn is_ergodic(&self) -> bool {
        is_ergodic_path(self)
    }
}

pub fn to_path(cfg: &SegmentConfig) -> Result<LatticePath> {
    if cfg.k() == 0 {
        return Err(Error::InvalidPath("empty configuration has no path".into()));
    }
    let h = cfg
        .positions()
        .iter()
        .enumerate()
        .map(|(idx, &x)| 2 * x as i64 - 3 * (idx as i64 + 1) + 1)
        .collect();
    Ok(LatticePath::from_raw(cfg.n(), cfg.k(), h))
}

pub fn from_path(p: &LatticePath) -> SegmentConfig {
    SegmentConfig::from_positions(p.n, &p.positions()).expect("validated path has valid positions")
}

/// Coordinatewise order.
pub fn leq(a: &LatticePath, b: &LatticePath) -> Result<bool> {
    if a.n != b.n || a.k != b.k {
        return Err(Error::Dimension { expected: a.k, got: b.k });
    }
    Ok(a.h.iter().zip(&b.h).all(|(x, y)| x <= y))
}

/// Paths in the image of the ergodic component: pinned endpoints and
/// unit steps.
pub fn is_ergodic_path(p: &LatticePath) -> bool {
    p.h[0] == 0 && p.h[p.k - 1] == p.cap() && p.h.windows(2).all(|w| (w[1] - w[0]).abs() == 1)
}

/// Coordinates `i` (1-based) whose step `η(i+1) - η(i)` exceeds one.
pub fn steep_segments(p: &LatticePath) -> Vec<usize> {
    p.h.windows(2).enumerate().filter(|(_, w)| w[1] - w[0] > 1).map(|(i, _)| i + 1).collect()
}

/// Exclusion configuration on `[k-1]` given by the up-steps of an ergodic
/// path.
pub fn path_to_sep(p: &LatticePath) -> Result<Vec<bool>> {
    if !is_ergodic_path(p) {
        return Err(Error::InvalidPath("path is not ergodic".into()));
    }
    Ok(p.h.windows(2).map(|w| w[1] > w[0]).collect())
}

/// Inverse of [`path_to_sep`].
pub fn sep_to_path(n: usize, k: usize, sigma: &[bool]) -> Result<LatticePath> {
    if k == 0 || sigma.len() != k - 1 {
        return Err(Error::Dimension { expected: k.saturating_sub(1), got: sigma.len() });
    }
    let mut h = Vec::with_capacity(k);
    h.push(0);
    for &s in sigma {
        let last = *h.last().unwrap();
        h.push(if s { last + 1 } else { last - 1 });
    }
    let p = LatticePath::new(n, k, h)?;
    if !is_ergodic_path(&p) {
        return Err(Error::InvalidPath(format!(
            "up-step count {} differs from N-k={}",
            sigma.iter().filter(|&&s| s).count(),
            n - k
        )));
    }
    Ok(p)
}

/// `η⁻`: all particles packed left.
pub fn eta_minus(n: usize, k: usize) -> LatticePath {
    LatticePath::from_raw(n, k, (1..=k as i64).map(|i| 1 - i).collect())
}

/// `η⁺`: all particles packed right.
pub fn eta_plus(n: usize, k: usize) -> LatticePath {
    LatticePath::from_raw(n, k, (1..=k as i64).map(|i| 2 * (n as i64 - k as i64) - i + 1).collect())
}

/// Minimal and maximal ergodic paths `(η∨, η∧)`.
pub fn eta_extremal_ergodic(n: usize, k: usize) -> Result<(LatticePath, LatticePath)> {
    let s = special_configs(n, k)?;
    Ok((to_path(&s.vee)?, to_path(&s.wedge)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::enumerate_segment;

    fn path(n: usize, k: usize, h: &[i64]) -> LatticePath {
        LatticePath::new(n, k, h.to_vec()).unwrap()
    }

    #[test]
    fn to_path_examples() {
        let s = special_configs(5, 3).unwrap();
        assert_eq!(to_path(&s.minus).unwrap().heights(), &[0, -1, -2]);
        assert_eq!(to_path(&s.plus).unwrap().heights(), &[4, 3, 2]);
        assert_eq!(to_path(&"10110".parse().unwrap()).unwrap().heights(), &[0, 1, 0]);
        assert_eq!(eta_minus(5, 3), to_path(&s.minus).unwrap());
        assert_eq!(eta_plus(5, 3), to_path(&s.plus).unwrap());
    }

    #[test]
    fn from_path_examples() {
        assert_eq!(from_path(&path(5, 3, &[0, -1, -2])).to_string(), "11100");
        assert_eq!(from_path(&path(5, 3, &[0, 1, 0])).to_string(), "10110");
        assert!(LatticePath::new(5, 3, vec![0, 2, 0]).is_err());
        assert!(LatticePath::new(5, 3, vec![-2, -3, -4]).is_err());
        assert!(LatticePath::new(5, 3, vec![4, 5, 4]).is_err());
        assert!(LatticePath::new(5, 3, vec![2, -1, -2]).is_err());
    }

    #[test]
    fn order_examples() {
        for (n, k) in [(5, 3), (8, 6), (12, 8)] {
            assert!(leq(&eta_minus(n, k), &eta_plus(n, k)).unwrap());
        }
        assert!(!leq(&path(5, 3, &[0, 1, 0]), &path(5, 3, &[0, -1, 0])).unwrap());
        let a = path(5, 3, &[0, 1, 0]);
        assert!(leq(&a, &a).unwrap());
        assert!(leq(&a, &eta_minus(6, 3)).is_err());
    }

    #[test]
    fn ergodic_path_examples() {
        let p = to_path(&"11011011".parse().unwrap()).unwrap();
        assert_eq!(p.heights(), &[0, -1, 0, -1, 0, -1]);
        assert!(is_ergodic_path(&p));
        assert!(!is_ergodic_path(&eta_plus(5, 3)));
        assert!(!is_ergodic_path(&path(5, 3, &[0, 1, 0])));
    }

    #[test]
    fn sep_projection_examples() {
        let p = path(8, 6, &[0, -1, 0, -1, 0, -1]);
        assert_eq!(path_to_sep(&p).unwrap(), vec![false, true, false, true, false]);
        let wedge = to_path(&"10101111".parse().unwrap()).unwrap();
        assert_eq!(wedge.heights(), &[0, 1, 2, 1, 0, -1]);
        assert_eq!(path_to_sep(&wedge).unwrap(), vec![true, true, false, false, false]);
        assert!(path_to_sep(&eta_plus(8, 6)).is_err());
        // N = k: a single straight descent
        let full = to_path(&"1111".parse().unwrap()).unwrap();
        assert_eq!(path_to_sep(&full).unwrap(), vec![false; 3]);
    }

    #[test]
    fn extremal_ergodic_sandwich() {
        for n in 3..=11 {
            for k in (n / 2 + 1)..n {
                let (lo, hi) = eta_extremal_ergodic(n, k).unwrap();
                for cfg in enumerate_segment(n, k).filter(|c| c.is_ergodic()) {
                    let p = to_path(&cfg).unwrap();
                    assert!(leq(&lo, &p).unwrap() && leq(&p, &hi).unwrap(), "{cfg}");
                }
            }
        }
    }

    #[test]
    fn steep_segments_flagged() {
        let p = to_path(&"10011".parse().unwrap()).unwrap();
        assert_eq!(p.heights(), &[0, 3, 2]);
        assert_eq!(steep_segments(&p), vec![1]);
        assert!(steep_segments(&eta_minus(5, 3)).is_empty());
    }
}
