//! Event-driven simulation: lattice paths under a shared Poisson clock
//! field, the circle FEP and the open-boundary exclusion process, plus
//! hitting-time helpers.

pub mod circle;
pub mod clock;
pub mod hitting;
pub mod obep;
pub mod path;
pub mod trajectory;

pub use circle::{simulate_circle, CircleSim, Jump};
pub use clock::{ClockField, Dir};
pub use hitting::{first_hitting, Hit, HitPredicate};
pub use obep::{simulate_obep, ObepParams, ObepPreset};
pub use path::{simulate_path, CoupledSim, HeightEvent, HeightSim, LeftRule, RightRule};
pub use trajectory::{TrajEvent, Trajectory, TrajectoryKind};
