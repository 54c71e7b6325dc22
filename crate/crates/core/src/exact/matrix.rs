use std::collections::HashMap;
use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Encoded state: 0/1 occupations or pile sizes, optionally followed by
/// auxiliary labels.
pub type State = Vec<u32>;

/// Probability vector aligned with a [`RateMatrix`] index.
pub type DistVec = Vec<f64>;

/// Sparse continuous-time generator over an enumerated state space.
///
/// `exit[i]` is the total rate of leaving `i`. It equals the sum of the
/// off-diagonal row for a conservative generator and exceeds it when mass
/// is killed, which is how sub-generators are represented.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateMatrix {
    states: Vec<State>,
    #[serde(skip)]
    index: HashMap<State, usize>,
    rows: Vec<Vec<(usize, f64)>>,
    exit: Vec<f64>,
}

impl RateMatrix {
    /// Builds a generator by listing the outgoing rates of each state.
    /// Targets outside `states` count as killing. Rates to the same target
    /// are merged.
    pub fn build(states: Vec<State>, mut out: impl FnMut(&State) -> Vec<(State, f64)>) -> Result<Self> {
        let index: HashMap<State, usize> = states.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
        if index.len() != states.len() {
            return Err(Error::InvalidConfig("duplicate states".into()));
        }
        let mut rows = Vec::with_capacity(states.len());
        let mut exit = Vec::with_capacity(states.len());
        for s in &states {
            let mut row: Vec<(usize, f64)> = Vec::new();
            let mut total = 0.0;
            for (t, r) in out(s) {
                if r < 0.0 || !r.is_finite() {
                    return Err(Error::Parameter(format!("rate {r} must be finite and >= 0")));
                }
                if r == 0.0 || t == *s {
                    continue;
                }
                total += r;
                if let Some(&j) = index.get(&t) {
                    match row.iter_mut().find(|e| e.0 == j) {
                        Some(e) => e.1 += r,
                        None => row.push((j, r)),
                    }
                }
            }
            row.sort_by_key(|e| e.0);
            rows.push(row);
            exit.push(total);
        }
        Ok(Self { states, index, rows, exit })
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn state(&self, i: usize) -> &State {
        &self.states[i]
    }

    pub fn index_of(&self, s: &[u32]) -> Option<usize> {
        self.index.get(s).copied()
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn exit(&self, i: usize) -> f64 {
        self.exit[i]
    }

    /// Off-diagonal rate `i -> j`, or `-exit(i)` on the diagonal.
    pub fn rate(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return -self.exit[i];
        }
        self.rows[i].iter().find(|e| e.0 == j).map_or(0.0, |e| e.1)
    }

    /// Killing rate of state `i`.
    pub fn killing(&self, i: usize) -> f64 {
        let inside: f64 = self.rows[i].iter().map(|e| e.1).sum();
        (self.exit[i] - inside).max(0.0)
    }

    pub fn max_exit(&self) -> f64 {
        self.exit.iter().copied().fold(0.0, f64::max)
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum::<usize>() + self.dim()
    }

    /// Largest `|row sum|` counting the diagonal.
    pub fn max_row_sum(&self) -> f64 {
        (0..self.dim()).map(|i| self.killing(i)).fold(0.0, f64::max)
    }

    /// `(Lf)(i) = Σ_j L(i, j) f(j)`.
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        (0..self.dim())
            .map(|i| self.rows[i].iter().map(|&(j, r)| r * f[j]).sum::<f64>() - self.exit[i] * f[i])
            .collect()
    }

    /// `(μL)(j) = Σ_i μ(i) L(i, j)`.
    pub fn apply_left(&self, mu: &[f64]) -> Vec<f64> {
        let mut out: Vec<f64> = (0..self.dim()).map(|i| -self.exit[i] * mu[i]).collect();
        for (i, row) in self.rows.iter().enumerate() {
            if mu[i] == 0.0 {
                continue;
            }
            for &(j, r) in row {
                out[j] += mu[i] * r;
            }
        }
        out
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = -self.exit[i];
            for &(j, r) in &self.rows[i] {
                m[(i, j)] = r;
            }
        }
        m
    }

    /// Restriction to the states satisfying `keep`; rates into dropped
    /// states become killing.
    pub fn restrict(&self, keep: impl Fn(&State) -> bool) -> RateMatrix {
        let kept: Vec<usize> = (0..self.dim()).filter(|&i| keep(&self.states[i])).collect();
        let mut new_index = vec![usize::MAX; self.dim()];
        for (a, &i) in kept.iter().enumerate() {
            new_index[i] = a;
        }
        let states: Vec<State> = kept.iter().map(|&i| self.states[i].clone()).collect();
        let index = states.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
        let rows = kept
            .iter()
            .map(|&i| {
                self.rows[i].iter().filter(|e| new_index[e.0] != usize::MAX).map(|&(j, r)| (new_index[j], r)).collect()
            })
            .collect();
        let exit = kept.iter().map(|&i| self.exit[i]).collect();
        RateMatrix { states, index, rows, exit }
    }

    /// Rebuilds the state index, needed after deserialization.
    pub fn reindex(&mut self) {
        self.index = self.states.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
    }

    /// `‖μL‖∞`.
    pub fn stationary_residual(&self, mu: &[f64]) -> f64 {
        self.apply_left(mu).iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest `|μ(x)L(x,y) - μ(y)L(y,x)|` over all pairs.
    pub fn detailed_balance_error(&self, mu: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.dim() {
            for &(j, r) in &self.rows[i] {
                worst = worst.max((mu[i] * r - mu[j] * self.rate(j, i)).abs());
            }
        }
        worst
    }
}

impl fmt::Display for RateMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.states.iter().enumerate() {
            write!(f, "{} ->", state_label(s))?;
            for &(j, r) in &self.rows[i] {
                write!(f, " {}:{}", state_label(&self.states[j]), r)?;
            }
            writeln!(f, " (exit {})", self.exit[i])?;
        }
        Ok(())
    }
}

/// Compact label: digits concatenated when all are below ten, otherwise
/// comma separated.
pub fn state_label(s: &[u32]) -> String {
    if s.iter().all(|&v| v < 10) {
        s.iter().map(|v| char::from(b'0' + *v as u8)).collect()
    } else {
        s.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
    }
}

/// Total-variation distance `½‖a - b‖₁`.
pub fn tv_distance(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_state(a: f64, b: f64) -> RateMatrix {
        RateMatrix::build(vec![vec![0], vec![1]], |s| {
            if s[0] == 0 {
                vec![(vec![1], a)]
            } else {
                vec![(vec![0], b), (vec![2], 0.5)]
            }
        })
        .unwrap()
    }

    #[test]
    fn build_and_query() {
        let m = two_state(1.0, 2.0);
        assert_eq!(m.rate(0, 1), 1.0);
        assert_eq!(m.rate(1, 1), -2.5);
        assert_eq!(m.killing(1), 0.5);
        assert_eq!(m.max_row_sum(), 0.5);
        assert_eq!(m.apply(&[1.0, 1.0]), vec![0.0, -0.5]);
        assert_eq!(m.apply_left(&[1.0, 0.0]), vec![-1.0, 1.0]);
        let d = m.to_dense();
        assert_eq!(d[(1, 0)], 2.0);
        assert_eq!(state_label(&[1, 0, 12]), "1,0,12");
        assert_eq!(state_label(&[1, 0, 1]), "101");
    }

    #[test]
    fn restriction_kills() {
        let m = two_state(1.0, 2.0);
        let r = m.restrict(|s| s[0] == 0);
        assert_eq!(r.dim(), 1);
        assert_eq!(r.killing(0), 1.0);
    }

    #[test]
    fn rejects_negative_rates() {
        assert!(RateMatrix::build(vec![vec![0]], |_| vec![(vec![1], -1.0)]).is_err());
    }
}
