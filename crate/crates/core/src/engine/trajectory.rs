use std::fmt::Write as _;
use std::io;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrajectoryKind {
    /// `coord` is a path coordinate, `value` its new height.
    Path,
    /// `coord` is the departure site, `value` the arrival site.
    Circle,
    /// As for the circle; sites `0` and `n + 1` stand for the reservoirs.
    Obep,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajEvent {
    pub t: f64,
    pub coord: i64,
    pub value: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub kind: TrajectoryKind,
    /// Space-separated heights for paths, a 0/1 string otherwise.
    pub initial: String,
    pub horizon: f64,
    pub events: Vec<TrajEvent>,
}

impl Trajectory {
    /// CSV with a leading comment line holding the initial state.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(32 * (self.events.len() + 2));
        let kind = match self.kind {
            TrajectoryKind::Path => "path",
            TrajectoryKind::Circle => "circle",
            TrajectoryKind::Obep => "obep",
        };
        let _ = writeln!(out, "# kind: {kind}; initial: {}; horizon: {}", self.initial, self.horizon);
        out.push_str("t,coord,value\n");
        for e in &self.events {
            let _ = writeln!(out, "{},{},{}", e.t, e.coord, e.value);
        }
        out
    }

    pub fn write_csv<W: io::Write>(&self, mut w: W) -> io::Result<()> {
        w.write_all(self.to_csv().as_bytes())
    }

    pub fn event_times_increasing(&self) -> bool {
        self.events.windows(2).all(|w| w[0].t < w[1].t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let t = Trajectory {
            kind: TrajectoryKind::Circle,
            initial: "1010".into(),
            horizon: 2.5,
            events: vec![TrajEvent { t: 0.25, coord: 0, value: 1 }],
        };
        assert_eq!(t.to_csv(), "# kind: circle; initial: 1010; horizon: 2.5\nt,coord,value\n0.25,0,1\n");
    }
}
