//! Event-driven lattice path dynamics under a shared [`ClockField`].

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use super::clock::{ClockField, Dir};
use super::trajectory::{TrajEvent, Trajectory, TrajectoryKind};
use crate::error::{Error, Result};
use crate::lattice_path::{self, LatticePath};

/// Behaviour of coordinate 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LeftRule {
    /// Down moves only while the height is positive, no up moves.
    Fep,
    /// Never moves.
    Fixed,
    /// Down moves without a floor, no up moves.
    Open,
}

/// Behaviour of the last coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RightRule {
    /// Up moves only below `cap`, no down moves.
    Fep { cap: i64 },
    Fixed,
    /// Up moves without a ceiling, no down moves.
    Open,
}

/// One height change. `coord` is 1-based.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HeightEvent {
    pub t: f64,
    pub coord: usize,
    pub dir: Dir,
    /// Height after the move.
    pub height: i64,
}

#[derive(Clone, Copy, Debug)]
struct Key {
    t: f64,
    coord: u32,
    y: i64,
    dir: Dir,
    version: u32,
}

impl PartialEq for Key {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.t
            .total_cmp(&other.t)
            .then(self.coord.cmp(&other.coord))
            .then(self.y.cmp(&other.y))
            .then(self.dir.cmp(&other.dir))
            .then(self.version.cmp(&other.version))
    }
}

/// A height vector driven by a clock field. Only the clock of the currently
/// legal move at each coordinate is scheduled; it is re-queried whenever
/// the height or legality there changes.
#[derive(Clone, Debug)]
pub struct HeightSim<'f> {
    field: &'f ClockField,
    h: Vec<i64>,
    left: LeftRule,
    right: RightRule,
    active: Vec<Option<Dir>>,
    sched_h: Vec<i64>,
    version: Vec<u32>,
    heap: BinaryHeap<Reverse<Key>>,
    now: f64,
    nonunit: usize,
    events: u64,
    record: Option<Vec<HeightEvent>>,
}

impl<'f> HeightSim<'f> {
    pub fn new(field: &'f ClockField, h: Vec<i64>, left: LeftRule, right: RightRule) -> Result<Self> {
        if h.is_empty() {
            return Err(Error::InvalidPath("empty height vector".into()));
        }
        if h.windows(2).any(|w| w[1] - w[0] < -1 || (w[1] - w[0]).rem_euclid(2) != 1) {
            return Err(Error::InvalidPath("steps must be odd and at least -1".into()));
        }
        let k = h.len();
        let nonunit = h.windows(2).filter(|w| (w[1] - w[0]).abs() != 1).count();
        let mut sim = Self {
            field,
            active: vec![None; k],
            sched_h: h.clone(),
            version: vec![0; k],
            heap: BinaryHeap::with_capacity(2 * k),
            h,
            left,
            right,
            now: 0.0,
            nonunit,
            events: 0,
            record: None,
        };
        for idx in 0..k {
            sim.reschedule(idx, true);
        }
        Ok(sim)
    }

    /// FEP dynamics of a segment lattice path.
    pub fn fep(field: &'f ClockField, p0: &LatticePath) -> Self {
        Self::new(field, p0.heights().to_vec(), LeftRule::Fep, RightRule::Fep { cap: p0.cap() })
            .expect("validated lattice path")
    }

    pub fn with_recording(mut self) -> Self {
        self.record = Some(Vec::new());
        self
    }

    pub fn heights(&self) -> &[i64] {
        &self.h
    }

    pub fn now(&self) -> f64 {
        self.now
    }

    pub fn event_count(&self) -> u64 {
        self.events
    }

    pub fn recorded(&self) -> &[HeightEvent] {
        self.record.as_deref().unwrap_or(&[])
    }

    pub fn take_recorded(&mut self) -> Vec<HeightEvent> {
        self.record.as_mut().map(std::mem::take).unwrap_or_default()
    }

    /// Number of steps that are not `±1`.
    pub fn nonunit_steps(&self) -> usize {
        self.nonunit
    }

    /// Membership of the FEP path in the ergodic image: pinned endpoints
    /// and unit steps.
    pub fn is_ergodic(&self) -> bool {
        let cap = match self.right {
            RightRule::Fep { cap } => cap,
            _ => return false,
        };
        self.nonunit == 0 && self.h[0] == 0 && self.h[self.h.len() - 1] == cap
    }

    fn legal(&self, idx: usize) -> Option<Dir> {
        let k = self.h.len();
        if k == 1 {
            return None;
        }
        let y = self.h[idx];
        if idx == 0 {
            let down = self.h[1] == y - 1
                && match self.left {
                    LeftRule::Fep => y > 0,
                    LeftRule::Open => true,
                    LeftRule::Fixed => false,
                };
            return down.then_some(Dir::Down);
        }
        if idx == k - 1 {
            let up = self.h[k - 2] == y + 1
                && match self.right {
                    RightRule::Fep { cap } => y < cap,
                    RightRule::Open => true,
                    RightRule::Fixed => false,
                };
            return up.then_some(Dir::Up);
        }
        let (l, r) = (self.h[idx - 1], self.h[idx + 1]);
        if l == y + 1 && r >= y + 1 {
            Some(Dir::Up)
        } else if r == y - 1 && l <= y - 1 {
            Some(Dir::Down)
        } else {
            None
        }
    }

    fn reschedule(&mut self, idx: usize, force: bool) {
        let d = self.legal(idx);
        if !force && d == self.active[idx] && self.h[idx] == self.sched_h[idx] {
            return;
        }
        self.version[idx] = self.version[idx].wrapping_add(1);
        self.active[idx] = d;
        self.sched_h[idx] = self.h[idx];
        if let Some(dir) = d {
            let y = self.h[idx];
            let t = self.field.next_ring(idx + 1, y, dir, self.now);
            if t.is_finite() {
                self.heap.push(Reverse(Key { t, coord: idx as u32, y, dir, version: self.version[idx] }));
            }
        }
    }

    /// Time of the next move, or infinity.
    pub fn peek_time(&mut self) -> f64 {
        while let Some(Reverse(key)) = self.heap.peek() {
            if key.version == self.version[key.coord as usize] {
                return key.t;
            }
            self.heap.pop();
        }
        f64::INFINITY
    }

    fn step_contribution(&self, idx: usize) -> usize {
        let mut c = 0;
        if idx > 0 && (self.h[idx] - self.h[idx - 1]).abs() != 1 {
            c += 1;
        }
        if idx + 1 < self.h.len() && (self.h[idx + 1] - self.h[idx]).abs() != 1 {
            c += 1;
        }
        c
    }

    /// Performs the next move if it happens no later than `horizon`.
    pub fn step(&mut self, horizon: f64) -> Option<HeightEvent> {
        let t = self.peek_time();
        if t > horizon {
            return None;
        }
        let Reverse(key) = self.heap.pop().expect("peeked entry");
        let idx = key.coord as usize;
        debug_assert_eq!(self.h[idx], key.y);
        debug_assert_eq!(self.legal(idx), Some(key.dir));
        let before = self.step_contribution(idx);
        self.now = t;
        match key.dir {
            Dir::Up => self.h[idx] += 2,
            Dir::Down => self.h[idx] -= 2,
        }
        self.nonunit = self.nonunit + self.step_contribution(idx) - before;
        self.events += 1;
        self.reschedule(idx, true);
        if idx > 0 {
            self.reschedule(idx - 1, false);
        }
        if idx + 1 < self.h.len() {
            self.reschedule(idx + 1, false);
        }
        let ev = HeightEvent { t, coord: idx + 1, dir: key.dir, height: self.h[idx] };
        if let Some(rec) = self.record.as_mut() {
            rec.push(ev);
        }
        Some(ev)
    }

    /// Runs every move up to `horizon` and sets the clock to `horizon`.
    pub fn advance_to(&mut self, horizon: f64) {
        while self.step(horizon).is_some() {}
        self.now = self.now.max(horizon);
    }

    /// Runs until `stop` holds after some move, returning its time, or
    /// `None` if `horizon` is reached first. `stop` is checked at the
    /// current time before any move.
    pub fn run_until(&mut self, horizon: f64, mut stop: impl FnMut(&Self, Option<&HeightEvent>) -> bool) -> Option<f64> {
        if stop(self, None) {
            return Some(self.now);
        }
        while let Some(ev) = self.step(horizon) {
            if stop(self, Some(&ev)) {
                return Some(ev.t);
            }
        }
        None
    }
}

/// Runs the FEP path dynamics from `p0` up to time `horizon`.
pub fn simulate_path(p0: &LatticePath, field: &ClockField, horizon: f64) -> (Trajectory, LatticePath) {
    let mut sim = HeightSim::fep(field, p0).with_recording();
    sim.advance_to(horizon);
    let events = sim
        .take_recorded()
        .into_iter()
        .map(|e| TrajEvent { t: e.t, coord: e.coord as i64, value: e.height })
        .collect();
    let end = LatticePath::new(p0.n(), p0.k(), sim.heights().to_vec()).expect("dynamics preserve validity");
    let traj = Trajectory {
        kind: TrajectoryKind::Path,
        initial: p0.heights().iter().map(|h| h.to_string()).collect::<Vec<_>>().join(" "),
        horizon,
        events,
    };
    (traj, end)
}

/// Several height vectors under one clock field, advanced in lockstep so
/// that moves at equal times are applied together.
#[derive(Clone, Debug)]
pub struct CoupledSim<'f> {
    sims: Vec<HeightSim<'f>>,
}

impl<'f> CoupledSim<'f> {
    pub fn new(sims: Vec<HeightSim<'f>>) -> Result<Self> {
        if let Some(first) = sims.first() {
            let k = first.h.len();
            if let Some(bad) = sims.iter().find(|s| s.h.len() != k) {
                return Err(Error::Dimension { expected: k, got: bad.h.len() });
            }
        }
        Ok(Self { sims })
    }

    pub fn fep(field: &'f ClockField, starts: &[LatticePath]) -> Result<Self> {
        if let Some(first) = starts.first() {
            if let Some(bad) = starts.iter().find(|p| p.n() != first.n() || p.k() != first.k()) {
                return Err(Error::Dimension { expected: first.k(), got: bad.k() });
            }
        }
        Self::new(starts.iter().map(|p| HeightSim::fep(field, p)).collect())
    }

    pub fn sims(&self) -> &[HeightSim<'f>] {
        &self.sims
    }

    pub fn sims_mut(&mut self) -> &mut [HeightSim<'f>] {
        &mut self.sims
    }

    pub fn into_sims(self) -> Vec<HeightSim<'f>> {
        self.sims
    }

    /// Applies every move at the earliest pending time, pushing
    /// `(sim, coordinate index)` of each change onto `changed`.
    pub fn step_batch(&mut self, horizon: f64, changed: &mut Vec<(usize, usize)>) -> Option<f64> {
        changed.clear();
        let t = self.sims.iter_mut().map(|s| s.peek_time()).fold(f64::INFINITY, f64::min);
        if t > horizon {
            return None;
        }
        for (j, sim) in self.sims.iter_mut().enumerate() {
            while sim.peek_time() == t {
                let ev = sim.step(horizon).expect("pending move");
                changed.push((j, ev.coord - 1));
            }
        }
        Some(t)
    }

    /// First time all trajectories agree, or `None` if after `horizon`.
    pub fn coupling_time(&mut self, horizon: f64) -> Option<f64> {
        let k = self.sims.first()?.h.len();
        let differs = |sims: &[HeightSim], idx: usize| sims.iter().any(|s| s.h[idx] != sims[0].h[idx]);
        let mut ndiff = (0..k).filter(|&i| differs(&self.sims, i)).count();
        if ndiff == 0 {
            return Some(self.sims[0].now);
        }
        let mut diff: Vec<bool> = (0..k).map(|i| differs(&self.sims, i)).collect();
        let mut changed = Vec::new();
        while let Some(t) = self.step_batch(horizon, &mut changed) {
            for &(_, idx) in &changed {
                let d = differs(&self.sims, idx);
                if d != diff[idx] {
                    diff[idx] = d;
                    if d {
                        ndiff += 1;
                    } else {
                        ndiff -= 1;
                    }
                }
            }
            if ndiff == 0 {
                return Some(t);
            }
        }
        None
    }

    /// Checks `h_j <= h_{j+1}` at every changed coordinate after every batch
    /// up to `horizon`. Returns `(batches, violations)`.
    pub fn check_sandwich(&mut self, horizon: f64) -> (u64, u64) {
        let mut changed = Vec::new();
        let (mut batches, mut violations) = (0u64, 0u64);
        while self.step_batch(horizon, &mut changed).is_some() {
            batches += 1;
            for &(_, idx) in &changed {
                if self.sims.windows(2).any(|w| w[0].h[idx] > w[1].h[idx]) {
                    violations += 1;
                }
            }
        }
        (batches, violations)
    }
}

/// Starts `η⁻` and `η⁺` on one field and returns their coupling time.
pub fn extremal_coupling_time(n: usize, k: usize, field: &ClockField, horizon: f64) -> Option<f64> {
    let starts = [lattice_path::eta_minus(n, k), lattice_path::eta_plus(n, k)];
    CoupledSim::fep(field, &starts).expect("same dimensions").coupling_time(horizon)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice_path::{eta_minus, eta_plus, steep_segments, to_path};

    #[test]
    fn no_rings_means_constant() {
        let field = ClockField::new(0.0, 0.0, 1).unwrap();
        let p0 = to_path(&"11011011".parse().unwrap()).unwrap();
        let (traj, end) = simulate_path(&p0, &field, 100.0);
        assert!(traj.events.is_empty());
        assert_eq!(end, p0);
    }

    #[test]
    fn first_move_is_a_corner_flip() {
        let field = ClockField::fep(0.6, 3).unwrap();
        let p0 = to_path(&"1101101011".parse().unwrap()).unwrap();
        let mut sim = HeightSim::fep(&field, &p0);
        let before = sim.heights().to_vec();
        let ev = sim.step(f64::INFINITY).unwrap();
        let after = sim.heights();
        let i = ev.coord - 1;
        for j in 0..before.len() {
            if j == i {
                let delta = if ev.dir == Dir::Up { 2 } else { -2 };
                assert_eq!(after[j], before[j] + delta);
            } else {
                assert_eq!(after[j], before[j]);
            }
        }
        if ev.dir == Dir::Up {
            assert_eq!(before[i - 1], before[i] + 1);
        } else {
            assert_eq!(before[i + 1], before[i] - 1);
        }
    }

    #[test]
    fn identical_starts_identical_trajectories() {
        let field = ClockField::fep(0.5, 9).unwrap();
        let p0 = eta_minus(12, 8);
        let (a, _) = simulate_path(&p0, &field, 50.0);
        let (b, _) = simulate_path(&p0, &field, 50.0);
        assert_eq!(a, b);
        assert!(!a.events.is_empty());
        assert!(a.events.windows(2).all(|w| w[0].t < w[1].t));
    }

    #[test]
    fn invariants_along_trajectory() {
        let field = ClockField::fep(0.7, 21).unwrap();
        let (n, k) = (14, 9);
        let p0 = to_path(&"01101100111011".parse().unwrap()).unwrap();
        let mut sim = HeightSim::fep(&field, &p0).with_recording();
        let mut steep = steep_segments(&p0).len();
        let (mut left, mut right) = (p0.at(1), p0.at(k));
        let mut was_ergodic = sim.is_ergodic();
        while let Some(_ev) = sim.step(200.0) {
            let p = LatticePath::new(n, k, sim.heights().to_vec()).unwrap();
            let s = steep_segments(&p).len();
            assert!(s <= steep);
            steep = s;
            assert!(p.at(1) <= left && p.at(k) >= right);
            left = p.at(1);
            right = p.at(k);
            assert_eq!(sim.is_ergodic(), lattice_path::is_ergodic_path(&p));
            assert!(!was_ergodic || sim.is_ergodic());
            was_ergodic = sim.is_ergodic();
        }
        assert!(was_ergodic);
    }

    #[test]
    fn extremal_paths_couple() {
        let field = ClockField::fep(0.5, 4).unwrap();
        let t = extremal_coupling_time(8, 6, &field, 1e6).unwrap();
        assert!(t > 0.0);
        assert_eq!(extremal_coupling_time(5, 5, &field, 1.0), Some(0.0));
    }

    #[test]
    fn sandwich_holds() {
        let field = ClockField::fep(0.5, 12).unwrap();
        let (lo, hi) = lattice_path::eta_extremal_ergodic(8, 6).unwrap();
        let starts = [eta_minus(8, 6), lo, hi, eta_plus(8, 6)];
        let mut c = CoupledSim::fep(&field, &starts).unwrap();
        let (batches, violations) = c.check_sandwich(200.0);
        assert!(batches > 100);
        assert_eq!(violations, 0);
    }
}
