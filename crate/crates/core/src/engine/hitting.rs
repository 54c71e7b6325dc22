use serde::{Deserialize, Serialize};

use super::circle::CircleSim;
use super::clock::ClockField;
use super::path::HeightSim;
use crate::lattice_path::LatticePath;
use crate::state::CircleConfig;

/// A hitting time, `None` when censored at `horizon`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hit {
    pub time: Option<f64>,
    pub horizon: f64,
}

impl Hit {
    pub fn censored(&self) -> bool {
        self.time.is_none()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HitPredicate {
    /// The path enters the image of `E_{N,k}`.
    ReachErgodic,
    /// The right endpoint reaches `2N - 3k + 1`, i.e. `N - k` particles
    /// have entered the associated OBEP.
    ReachCap,
    /// At least `ell` up-moves of the last coordinate have happened.
    Entries(usize),
}

/// First time the FEP path from `p0` satisfies `pred`.
pub fn first_hitting(p0: &LatticePath, field: &ClockField, pred: HitPredicate, horizon: f64) -> Hit {
    let cap = p0.cap();
    let k = p0.k();
    let mut sim = HeightSim::fep(field, p0);
    let time = match pred {
        HitPredicate::ReachErgodic => sim.run_until(horizon, |s, _| s.is_ergodic()),
        HitPredicate::ReachCap => sim.run_until(horizon, |s, _| s.heights()[k - 1] == cap),
        HitPredicate::Entries(ell) => {
            let mut count = 0;
            sim.run_until(horizon, |_, ev| {
                if let Some(ev) = ev {
                    if ev.coord == k {
                        count += 1;
                    }
                }
                count >= ell
            })
        }
    };
    Hit { time, horizon }
}

/// First time the path satisfies an arbitrary predicate of the heights.
pub fn first_hitting_by(p0: &LatticePath, field: &ClockField, horizon: f64, pred: impl Fn(&[i64]) -> bool) -> Hit {
    let mut sim = HeightSim::fep(field, p0);
    Hit { time: sim.run_until(horizon, |s, _| pred(s.heights())), horizon }
}

/// First time the circle FEP from `c0` has no two adjacent holes.
pub fn circle_hitting(c0: &CircleConfig, seed: u64, horizon: f64) -> Hit {
    let mut sim = CircleSim::new(c0, seed);
    if sim.is_ergodic() {
        return Hit { time: Some(0.0), horizon };
    }
    while let Some(j) = sim.step(horizon) {
        if sim.is_ergodic() {
            return Hit { time: Some(j.t), horizon };
        }
    }
    Hit { time: None, horizon }
}
