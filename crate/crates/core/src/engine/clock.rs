use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{hash_words, unit_open};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Dir {
    Up,
    Down,
}

impl Dir {
    fn tag(self) -> u64 {
        match self {
            Dir::Up => 1,
            Dir::Down => 2,
        }
    }
}

/// Poisson clocks attached to every `(coordinate, height, direction)`.
///
/// Time is cut into windows of width `window`. Within window `j` the rings
/// of a clock are cumulative exponential gaps started at the window's left
/// edge and truncated at its right edge, each gap hashed from
/// `(seed, coord, height, dir, j, n)`. The restriction of a Poisson process
/// to disjoint windows gives independent Poisson processes, so this is a
/// Poisson process of the right rate whose rings after any time can be
/// regenerated directly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClockField {
    p: f64,
    q: f64,
    seed: u64,
    window: f64,
}

impl ClockField {
    /// Up clocks ring at rate `p`, down clocks at `q`.
    pub fn new(p: f64, q: f64, seed: u64) -> Result<Self> {
        Self::with_window(p, q, seed, 1.0)
    }

    pub fn with_window(p: f64, q: f64, seed: u64, window: f64) -> Result<Self> {
        if !(p.is_finite() && q.is_finite() && p >= 0.0 && q >= 0.0) {
            return Err(Error::Parameter(format!("clock rates must be finite and >= 0, got p={p}, q={q}")));
        }
        if !(window.is_finite() && window > 0.0) {
            return Err(Error::Parameter(format!("window must be positive, got {window}")));
        }
        Ok(Self { p, q, seed, window })
    }

    /// Field for the FEP with right rate `p` and left rate `1 - p`.
    pub fn fep(p: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Parameter(format!("p must lie in [0, 1], got {p}")));
        }
        Self::new(p, 1.0 - p, seed)
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn rate(&self, dir: Dir) -> f64 {
        match dir {
            Dir::Up => self.p,
            Dir::Down => self.q,
        }
    }

    /// First ring of clock `(coord, y, dir)` strictly after `after`, or
    /// infinity if the clock has rate zero.
    pub fn next_ring(&self, coord: usize, y: i64, dir: Dir, after: f64) -> f64 {
        let rate = self.rate(dir);
        if rate <= 0.0 {
            return f64::INFINITY;
        }
        let after = after.max(0.0);
        let mut j = (after / self.window).floor() as u64;
        loop {
            let start = j as f64 * self.window;
            let end = start + self.window;
            let mut t = start;
            let mut n = 0u64;
            loop {
                let u = unit_open(hash_words(self.seed, &[coord as u64, y as u64, dir.tag(), j, n]));
                t += -u.ln() / rate;
                if t >= end {
                    break;
                }
                if t > after {
                    return t;
                }
                n += 1;
            }
            j += 1;
        }
    }

    /// All rings of a clock in `(from, to]`, in order.
    pub fn rings_between(&self, coord: usize, y: i64, dir: Dir, from: f64, to: f64) -> Vec<f64> {
        let mut out = Vec::new();
        let mut t = from;
        loop {
            t = self.next_ring(coord, y, dir, t);
            if t > to {
                return out;
            }
            out.push(t);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn replayable_and_order_independent() {
        let f = ClockField::new(0.7, 0.3, 42).unwrap();
        let a = f.rings_between(3, -2, Dir::Up, 0.0, 50.0);
        let _ = f.rings_between(9, 1, Dir::Down, 0.0, 50.0);
        let b = f.rings_between(3, -2, Dir::Up, 0.0, 50.0);
        assert_eq!(a, b);
        let mid = a[a.len() / 2];
        assert_eq!(f.next_ring(3, -2, Dir::Up, mid), a[a.len() / 2 + 1]);
        assert!(a.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn rate_matches_counts() {
        let f = ClockField::new(0.7, 0.3, 5).unwrap();
        let horizon = 20_000.0;
        let up = f.rings_between(0, 0, Dir::Up, 0.0, horizon).len() as f64;
        let down = f.rings_between(0, 0, Dir::Down, 0.0, horizon).len() as f64;
        assert!((up / horizon - 0.7).abs() < 4.0 * (0.7 / horizon).sqrt(), "{up}");
        assert!((down / horizon - 0.3).abs() < 4.0 * (0.3 / horizon).sqrt(), "{down}");
    }

    #[test]
    fn exponential_gaps() {
        let f = ClockField::new(2.0, 0.0, 17).unwrap();
        let rings = f.rings_between(1, 1, Dir::Up, 0.0, 50_000.0);
        let gaps: Vec<f64> = rings.windows(2).map(|w| w[1] - w[0]).collect();
        let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
        let second = gaps.iter().map(|g| g * g).sum::<f64>() / gaps.len() as f64;
        assert!((mean - 0.5).abs() < 0.01, "{mean}");
        assert!((second - 0.5).abs() < 0.02, "{second}");
        assert_eq!(f.next_ring(1, 1, Dir::Down, 0.0), f64::INFINITY);
    }

    #[test]
    fn rejects_bad_rates() {
        assert!(ClockField::new(-0.1, 0.5, 0).is_err());
        assert!(ClockField::fep(1.5, 0).is_err());
        assert!(ClockField::with_window(0.5, 0.5, 0, 0.0).is_err());
    }
}
