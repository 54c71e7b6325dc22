//! Direct jump dynamics of the FEP on the circle.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

use super::trajectory::{TrajEvent, Trajectory, TrajectoryKind};
use crate::state::CircleConfig;

/// A jump `from -> to` at time `t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jump {
    pub t: f64,
    pub from: usize,
    pub to: usize,
}

const NONE: u32 = u32::MAX;

/// Gillespie simulation of the circle FEP with rate `1/2` for every
/// enabled jump. Enabled moves are kept in a dense list with a position
/// index so that sampling and updates are constant time.
#[derive(Clone, Debug)]
pub struct CircleSim {
    occ: Vec<bool>,
    moves: Vec<u32>,
    slot: Vec<u32>,
    adjacent_holes: usize,
    now: f64,
    rng: ChaCha8Rng,
    rate: f64,
    pending: Option<f64>,
}

impl CircleSim {
    pub fn new(c0: &CircleConfig, seed: u64) -> Self {
        let n = c0.n();
        let occ = c0.occ().to_vec();
        let mut sim = Self {
            adjacent_holes: 0,
            occ,
            moves: Vec::new(),
            slot: vec![NONE; 2 * n],
            now: 0.0,
            rng: ChaCha8Rng::seed_from_u64(seed),
            rate: 0.5,
            pending: None,
        };
        if n >= 3 {
            for x in 0..n {
                sim.refresh(x);
            }
        }
        sim.adjacent_holes = (0..n).filter(|&x| sim.pair_is_hole(x)).count();
        sim
    }

    pub fn n(&self) -> usize {
        self.occ.len()
    }

    pub fn occ(&self) -> &[bool] {
        &self.occ
    }

    pub fn now(&self) -> f64 {
        self.now
    }

    pub fn config(&self) -> CircleConfig {
        CircleConfig::new(self.occ.clone()).expect("site count unchanged")
    }

    pub fn enabled_moves(&self) -> usize {
        self.moves.len()
    }

    /// Whether there are no two adjacent holes.
    pub fn is_ergodic(&self) -> bool {
        self.adjacent_holes == 0
    }

    fn pair_is_hole(&self, x: usize) -> bool {
        let n = self.n();
        n > 1 && !self.occ[x] && !self.occ[(x + 1) % n]
    }

    fn wrap(&self, x: isize) -> usize {
        x.rem_euclid(self.n() as isize) as usize
    }

    /// Move code `2x` is a right jump from `x`, `2x + 1` a left jump.
    fn enabled(&self, code: usize) -> bool {
        let x = code / 2;
        if !self.occ[x] {
            return false;
        }
        let l = self.occ[self.wrap(x as isize - 1)];
        let r = self.occ[self.wrap(x as isize + 1)];
        if code % 2 == 0 {
            l && !r
        } else {
            r && !l
        }
    }

    fn set(&mut self, code: usize, on: bool) {
        let present = self.slot[code] != NONE;
        if on && !present {
            self.slot[code] = self.moves.len() as u32;
            self.moves.push(code as u32);
        } else if !on && present {
            let pos = self.slot[code] as usize;
            let last = *self.moves.last().unwrap();
            self.moves.swap_remove(pos);
            if last as usize != code {
                self.slot[last as usize] = pos as u32;
            }
            self.slot[code] = NONE;
        }
    }

    fn refresh(&mut self, x: usize) {
        for code in [2 * x, 2 * x + 1] {
            let on = self.enabled(code);
            self.set(code, on);
        }
    }

    /// Next jump if it happens no later than `horizon`. A jump time beyond
    /// the horizon is kept for the next call.
    pub fn step(&mut self, horizon: f64) -> Option<Jump> {
        if self.moves.is_empty() || self.n() < 3 {
            return None;
        }
        let t = match self.pending {
            Some(t) => t,
            None => {
                let total = self.rate * self.moves.len() as f64;
                let e: f64 = self.rng.sample(Exp1);
                let t = self.now + e / total;
                self.pending = Some(t);
                t
            }
        };
        if t > horizon {
            return None;
        }
        self.pending = None;
        let pick = self.rng.random_range(0..self.moves.len());
        let code = self.moves[pick] as usize;
        let from = code / 2;
        let to = if code % 2 == 0 { self.wrap(from as isize + 1) } else { self.wrap(from as isize - 1) };
        let touched: Vec<usize> = (-2..=2).map(|d| self.wrap(from as isize + d)).collect();
        let mut pairs: Vec<usize> = (-2..=1).map(|d| self.wrap(from as isize + d)).collect();
        pairs.sort_unstable();
        pairs.dedup();
        let pairs_before = pairs.iter().filter(|&&x| self.pair_is_hole(x)).count();
        self.occ[from] = false;
        self.occ[to] = true;
        let pairs_after = pairs.iter().filter(|&&x| self.pair_is_hole(x)).count();
        self.adjacent_holes = self.adjacent_holes + pairs_after - pairs_before;
        let mut seen = [usize::MAX; 5];
        for (j, &x) in touched.iter().enumerate() {
            if !seen[..j].contains(&x) {
                self.refresh(x);
            }
            seen[j] = x;
        }
        self.now = t;
        Some(Jump { t, from, to })
    }

    /// Runs every jump up to `horizon`.
    pub fn advance_to(&mut self, horizon: f64) {
        while self.step(horizon).is_some() {}
    }
}

pub fn simulate_circle(c0: &CircleConfig, seed: u64, horizon: f64) -> (Trajectory, CircleConfig) {
    let mut sim = CircleSim::new(c0, seed);
    let mut events = Vec::new();
    while let Some(j) = sim.step(horizon) {
        events.push(TrajEvent { t: j.t, coord: j.from as i64, value: j.to as i64 });
    }
    let traj = Trajectory { kind: TrajectoryKind::Circle, initial: c0.to_string(), horizon, events };
    (traj, sim.config())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::is_ergodic_circle;

    #[test]
    fn count_conserved_and_ergodic_absorbing() {
        let c0: CircleConfig = "111111000110000111".parse().unwrap();
        let mut sim = CircleSim::new(&c0, 8);
        let mut was = sim.is_ergodic();
        let mut steps = 0;
        while let Some(j) = sim.step(2_000.0) {
            steps += 1;
            assert!(sim.occ()[j.to] && !sim.occ()[j.from]);
            let cfg = sim.config();
            assert_eq!(cfg.k(), c0.k());
            assert_eq!(sim.is_ergodic(), is_ergodic_circle(&cfg));
            assert!(!was || sim.is_ergodic());
            was = sim.is_ergodic();
        }
        assert!(steps > 0);
    }

    #[test]
    fn enabled_set_matches_rule() {
        let c0: CircleConfig = "1101101001110".parse().unwrap();
        let mut sim = CircleSim::new(&c0, 2);
        for _ in 0..500 {
            let n = sim.n();
            let expected = (0..2 * n).filter(|&c| sim.enabled(c)).count();
            assert_eq!(sim.enabled_moves(), expected);
            if sim.step(f64::INFINITY).is_none() {
                break;
            }
        }
    }

    #[test]
    fn small_ergodic_circle_alternates() {
        let c0: CircleConfig = "1010".parse().unwrap();
        let (traj, _) = simulate_circle(&c0, 1, 1.0);
        assert!(traj.events.is_empty());
        let c0: CircleConfig = "1110".parse().unwrap();
        let (traj, end) = simulate_circle(&c0, 1, 20.0);
        assert!(!traj.events.is_empty());
        assert_eq!(end.k(), 3);
    }

    #[test]
    fn isolated_particles_frozen() {
        let c0: CircleConfig = "100100100".parse().unwrap();
        let (traj, end) = simulate_circle(&c0, 5, 100.0);
        assert!(traj.events.is_empty());
        assert_eq!(end, c0);
    }

    #[test]
    fn deterministic_given_seed() {
        let c0: CircleConfig = "11110011100".parse().unwrap();
        assert_eq!(simulate_circle(&c0, 77, 30.0).0, simulate_circle(&c0, 77, 30.0).0);
    }
}
