//! Correspondences between the FEP and zero-range, exclusion and
//! open-boundary exclusion processes.

use serde::{Deserialize, Serialize};

use crate::engine::obep::{obep_config, site_move, ObepPreset};
use crate::engine::path::HeightEvent;
use crate::engine::trajectory::{TrajEvent, Trajectory, TrajectoryKind};
use crate::error::{Error, Result};
use crate::lattice_path::{self, LatticePath};
use crate::state::{CircleConfig, SegmentConfig};

/// Zero-range occupations: `w[i]` particles on site `i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ZrpConfig {
    pub w: Vec<usize>,
}

impl ZrpConfig {
    pub fn new(w: Vec<usize>) -> Self {
        Self { w }
    }

    pub fn sites(&self) -> usize {
        self.w.len()
    }

    pub fn total(&self) -> usize {
        self.w.iter().sum()
    }

    pub fn min_pile(&self) -> usize {
        self.w.iter().copied().min().unwrap_or(0)
    }

    /// Cyclic shift: `out[i] = w[i + shift]`.
    pub fn rotate_left(&self, shift: usize) -> Self {
        let n = self.w.len();
        Self { w: (0..n).map(|i| self.w[(i + shift) % n]).collect() }
    }
}

/// Segment map: holes `0 = y(0) < y(1) < ... < y(g) < y(g+1) = N + 1` and
/// `w[i-1] = y(i) - y(i-1) - 1` for `i = 1..=g+1`.
pub fn zrp_of_segment(cfg: &SegmentConfig) -> ZrpConfig {
    let mut y = vec![0usize];
    y.extend(cfg.holes());
    y.push(cfg.n() + 1);
    ZrpConfig { w: y.windows(2).map(|p| p[1] - p[0] - 1).collect() }
}

/// Inverse of [`zrp_of_segment`].
pub fn segment_of_zrp(z: &ZrpConfig) -> Result<SegmentConfig> {
    if z.w.is_empty() {
        return Err(Error::InvalidConfig("zero-range configuration has no sites".into()));
    }
    let n = z.total() + z.w.len() - 1;
    let mut occ = Vec::with_capacity(n);
    for (i, &m) in z.w.iter().enumerate() {
        if i > 0 {
            occ.push(false);
        }
        occ.extend(std::iter::repeat_n(true, m));
    }
    SegmentConfig::new(occ)
}

/// The first hole at or clockwise after site 0.
pub fn default_tag(cfg: &CircleConfig) -> Option<usize> {
    cfg.occ().iter().position(|&b| !b)
}

/// Circle map with tagged hole `tag = y(0)` and the remaining holes
/// labelled clockwise: `w[i] = y(i+1) - y(i) - 1` on `T_g`.
pub fn zrp_of_circle(cfg: &CircleConfig, tag: usize) -> Result<ZrpConfig> {
    let n = cfg.n();
    if tag >= n || cfg.occ()[tag] {
        return Err(Error::InvalidConfig(format!("tag {tag} is not a hole")));
    }
    let holes: Vec<usize> = (0..n).map(|d| (tag + d) % n).filter(|&x| !cfg.occ()[x]).collect();
    let g = holes.len();
    Ok(ZrpConfig { w: (0..g).map(|i| (holes[(i + 1) % g] + n - holes[i] - 1) % n).collect() })
}

/// Inverse of [`zrp_of_circle`] given the tag position.
pub fn circle_of_zrp(z: &ZrpConfig, tag: usize) -> Result<CircleConfig> {
    let n = z.total() + z.w.len();
    if z.w.is_empty() || tag >= n {
        return Err(Error::InvalidConfig("need at least one hole and a tag inside the circle".into()));
    }
    let mut occ = vec![true; n];
    let mut x = tag;
    for &m in &z.w {
        occ[x] = false;
        x = (x + m + 1) % n;
    }
    CircleConfig::new(occ)
}

/// Zero-range process on the segment driven by the FEP jumps it is the
/// image of. Holes keep their labels as they move.
#[derive(Clone, Debug)]
pub struct SegmentZrpTracker {
    occ: Vec<bool>,
    label: Vec<usize>,
    w: Vec<usize>,
    empty_piles: usize,
}

/// Marker for sites holding a particle.
const PARTICLE: usize = usize::MAX;

impl SegmentZrpTracker {
    pub fn new(cfg: &SegmentConfig) -> Self {
        let mut label = vec![PARTICLE; cfg.n()];
        for (j, h) in cfg.holes().into_iter().enumerate() {
            label[h - 1] = j + 1;
        }
        let z = zrp_of_segment(cfg);
        let empty_piles = z.w.iter().filter(|&&m| m == 0).count();
        Self { occ: cfg.occ().to_vec(), label, w: z.w, empty_piles }
    }

    pub fn zrp(&self) -> ZrpConfig {
        ZrpConfig { w: self.w.clone() }
    }

    /// Every pile nonempty.
    pub fn all_piles_occupied(&self) -> bool {
        self.empty_piles == 0
    }

    fn bump(&mut self, pile: usize, delta: isize) {
        let before = self.w[pile];
        let after = (before as isize + delta) as usize;
        self.w[pile] = after;
        if before == 0 && after > 0 {
            self.empty_piles -= 1;
        } else if before > 0 && after == 0 {
            self.empty_piles += 1;
        }
    }

    /// Applies the FEP jump between 1-based sites and returns the
    /// zero-range move `(from pile, to pile)`, 0-based. Errors if the jump
    /// does not correspond to a move of a pile holding at least two
    /// particles.
    pub fn apply(&mut self, from: usize, to: usize) -> Result<(usize, usize)> {
        let (fi, ti) = (from - 1, to - 1);
        if !self.occ[fi] || self.occ[ti] || from.abs_diff(to) != 1 {
            return Err(Error::InvalidConfig(format!("illegal jump {from} -> {to}")));
        }
        let hole = self.label[ti];
        let (src, dst) = if to > from { (hole - 1, hole) } else { (hole, hole - 1) };
        if self.w[src] < 2 {
            return Err(Error::InvalidConfig(format!("pile {src} below 2 cannot move")));
        }
        self.bump(src, -1);
        self.bump(dst, 1);
        self.occ[fi] = false;
        self.occ[ti] = true;
        self.label[fi] = hole;
        self.label[ti] = PARTICLE;
        Ok((src, dst))
    }
}

/// Zero-range process on `T_g` driven by circle FEP jumps, with the tag
/// trajectory kept for auditing.
#[derive(Clone, Debug)]
pub struct CircleZrpTracker {
    occ: Vec<bool>,
    label: Vec<usize>,
    hole_pos: Vec<usize>,
    w: Vec<usize>,
    empty_piles: usize,
}

impl CircleZrpTracker {
    pub fn new(cfg: &CircleConfig, tag: usize) -> Result<Self> {
        let z = zrp_of_circle(cfg, tag)?;
        let n = cfg.n();
        let holes: Vec<usize> = (0..n).map(|d| (tag + d) % n).filter(|&x| !cfg.occ()[x]).collect();
        let mut label = vec![PARTICLE; n];
        for (j, &h) in holes.iter().enumerate() {
            label[h] = j;
        }
        let empty_piles = z.w.iter().filter(|&&m| m == 0).count();
        Ok(Self { occ: cfg.occ().to_vec(), label, hole_pos: holes, w: z.w, empty_piles })
    }

    pub fn zrp(&self) -> ZrpConfig {
        ZrpConfig { w: self.w.clone() }
    }

    /// Current position of the tagged hole.
    pub fn tag(&self) -> usize {
        self.hole_pos[0]
    }

    pub fn all_piles_occupied(&self) -> bool {
        self.empty_piles == 0
    }

    fn bump(&mut self, pile: usize, delta: isize) {
        let before = self.w[pile];
        let after = (before as isize + delta) as usize;
        self.w[pile] = after;
        if before == 0 && after > 0 {
            self.empty_piles -= 1;
        } else if before > 0 && after == 0 {
            self.empty_piles += 1;
        }
    }

    /// Applies a clockwise (`to = from + 1`) or anticlockwise jump.
    pub fn apply(&mut self, from: usize, to: usize) -> Result<(usize, usize)> {
        let n = self.occ.len();
        let g = self.w.len();
        if !self.occ[from] || self.occ[to] {
            return Err(Error::InvalidConfig(format!("illegal jump {from} -> {to}")));
        }
        let clockwise = (from + 1) % n == to;
        if !clockwise && (to + 1) % n != from {
            return Err(Error::InvalidConfig(format!("jump {from} -> {to} is not to a neighbour")));
        }
        let hole = self.label[to];
        let prev = (hole + g - 1) % g;
        let (src, dst) = if clockwise { (prev, hole) } else { (hole, prev) };
        if self.w[src] < 2 {
            return Err(Error::InvalidConfig(format!("pile {src} below 2 cannot move")));
        }
        self.bump(src, -1);
        self.bump(dst, 1);
        self.occ[from] = false;
        self.occ[to] = true;
        self.label[from] = hole;
        self.label[to] = PARTICLE;
        self.hole_pos[hole] = from;
        Ok((src, dst))
    }
}

/// OBEP trajectory seen in `η⁻` (right-entry view) or `η⁺` (left-entry
/// view, down-slopes are holes) from path events.
pub fn obep_view(p0: &LatticePath, events: &[HeightEvent]) -> Result<(ObepPreset, Trajectory)> {
    let (n, k) = (p0.n(), p0.k());
    let preset = if *p0 == lattice_path::eta_minus(n, k) {
        ObepPreset::RightEntry
    } else if *p0 == lattice_path::eta_plus(n, k) {
        ObepPreset::LeftEntry
    } else {
        return Err(Error::InvalidPath("OBEP views exist only for the extremal starts".into()));
    };
    let z0 = obep_config(p0.heights());
    let initial: String = z0.iter().map(|&b| if b { '1' } else { '0' }).collect();
    let events: Vec<TrajEvent> = events
        .iter()
        .map(|ev| {
            let (from, to) = site_move(ev);
            TrajEvent { t: ev.t, coord: from as i64, value: to as i64 }
        })
        .collect();
    let horizon = events.last().map_or(0.0, |e: &TrajEvent| e.t);
    Ok((preset, Trajectory { kind: TrajectoryKind::Obep, initial, horizon, events }))
}

/// Maximal runs of nonempty sites on the circle, as `(start, len)`.
/// Returns `None` when every site is occupied.
pub fn zrp_regions(w: &[usize]) -> Option<Vec<(usize, usize)>> {
    let n = w.len();
    let zero = w.iter().position(|&m| m == 0)?;
    let mut out = Vec::new();
    let mut run: Option<(usize, usize)> = None;
    for d in 1..=n {
        let i = (zero + d) % n;
        if w[i] == 0 {
            if let Some(r) = run.take() {
                out.push(r);
            }
        } else {
            let r = run.get_or_insert((i, 0));
            r.1 += 1;
        }
    }
    if let Some(r) = run {
        out.push(r);
    }
    out.sort_unstable();
    Some(out)
}

/// Stacks of the single ergodic region of a circle ZRP configuration.
fn single_region_stacks(w: &[usize]) -> Result<Vec<usize>> {
    let regions = zrp_regions(w).ok_or_else(|| Error::InvalidConfig("every site is occupied".into()))?;
    match regions.as_slice() {
        [(start, len)] => Ok((0..*len).map(|d| w[(start + d) % w.len()]).collect()),
        [] => Err(Error::InvalidConfig("no occupied site".into())),
        _ => Err(Error::InvalidConfig(format!("{} ergodic regions, expected one", regions.len()))),
    }
}

/// Map from single-region ZRP states with `ℓ` particles to OBEP
/// configurations on `[ℓ - 1]`: the `r`-th OBEP particle sits at the sum
/// of the first `r` stacks, and the last stack plays the right reservoir.
pub fn phi_zrp_to_obep(w: &[usize]) -> Result<Vec<bool>> {
    let stacks = single_region_stacks(w)?;
    let ell: usize = stacks.iter().sum();
    let mut z = vec![false; ell - 1];
    let mut pos = 0;
    for &s in &stacks[..stacks.len() - 1] {
        pos += s;
        z[pos - 1] = true;
    }
    Ok(z)
}

/// The OBEP move matched to a ZRP move under [`phi_zrp_to_obep`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PhiMove {
    /// Particle enters at site 1.
    LeftEntry,
    /// Particle enters at site `ℓ - 1`.
    RightEntry,
    /// OBEP particle `r` (1-based) steps right.
    Right(usize),
    /// OBEP particle `r` steps left.
    Left(usize),
}

/// Transition dictionary. `stack` is 1-based within the region of `R`
/// stacks; `leftward` is the ZRP jump direction.
///
/// - stack 1 jumping left enters a particle at site 1;
/// - stack `r > 1` jumping left moves particle `r - 1` right;
/// - stack `r < R` jumping right moves particle `r` left;
/// - stack `R` jumping right enters a particle at site `ℓ - 1`.
pub fn phi_move(stack: usize, stacks: usize, leftward: bool) -> PhiMove {
    match (leftward, stack) {
        (true, 1) => PhiMove::LeftEntry,
        (true, r) => PhiMove::Right(r - 1),
        (false, r) if r == stacks => PhiMove::RightEntry,
        (false, r) => PhiMove::Left(r),
    }
}

/// Applies a [`PhiMove`] to an OBEP configuration.
pub fn apply_phi_move(z: &[bool], mv: PhiMove) -> Result<Vec<bool>> {
    let mut out = z.to_vec();
    let positions: Vec<usize> = (0..z.len()).filter(|&i| z[i]).collect();
    let bad = || Error::InvalidConfig(format!("move {mv:?} is not enabled"));
    match mv {
        PhiMove::LeftEntry => {
            if z.first() != Some(&false) {
                return Err(bad());
            }
            out[0] = true;
        }
        PhiMove::RightEntry => {
            if z.last() != Some(&false) {
                return Err(bad());
            }
            *out.last_mut().unwrap() = true;
        }
        PhiMove::Right(r) | PhiMove::Left(r) => {
            let x = *positions.get(r - 1).ok_or_else(bad)?;
            let y = if matches!(mv, PhiMove::Right(_)) { x + 1 } else { x.checked_sub(1).ok_or_else(bad)? };
            if y >= z.len() || z[y] {
                return Err(bad());
            }
            out[x] = false;
            out[y] = true;
        }
    }
    Ok(out)
}

/// Reduction `w̃(x - 1) = w(x) - 1` of a segment ZRP state with an empty
/// first pile and every other pile nonempty.
pub fn constant_rate_reduction(w: &ZrpConfig) -> Result<ZrpConfig> {
    match w.w.split_first() {
        Some((0, rest)) if !rest.is_empty() && rest.iter().all(|&m| m >= 1) => {
            Ok(ZrpConfig { w: rest.iter().map(|m| m - 1).collect() })
        }
        _ => Err(Error::InvalidConfig(
            "reduction needs an empty first pile and all other piles nonempty".into(),
        )),
    }
}

/// Inverse of [`constant_rate_reduction`].
pub fn constant_rate_lift(wt: &ZrpConfig) -> ZrpConfig {
    let mut w = vec![0];
    w.extend(wt.w.iter().map(|m| m + 1));
    ZrpConfig { w }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::special_configs;

    #[test]
    fn segment_examples() {
        let cfg: SegmentConfig = "1101011".parse().unwrap();
        assert_eq!(zrp_of_segment(&cfg).w, vec![2, 1, 2]);
        let minus = special_configs(5, 3).unwrap().minus;
        assert_eq!(zrp_of_segment(&minus).w, vec![3, 0, 0]);
        assert_eq!(zrp_of_segment(&"1111".parse().unwrap()).w, vec![4]);
        assert_eq!(segment_of_zrp(&ZrpConfig::new(vec![2, 1, 2])).unwrap(), cfg);
    }

    #[test]
    fn circle_examples() {
        let cfg = CircleConfig::from_sites(8, &[0, 1, 4, 7]).unwrap();
        let z = zrp_of_circle(&cfg, 2).unwrap();
        assert_eq!(z.w, vec![0, 1, 0, 3]);
        assert_eq!(circle_of_zrp(&z, 2).unwrap(), cfg);
        assert!(zrp_of_circle(&cfg, 0).is_err());
        let single: CircleConfig = "1110111".parse().unwrap();
        assert_eq!(zrp_of_circle(&single, 3).unwrap().w, vec![6]);
        assert_eq!(default_tag(&cfg), Some(2));
    }

    #[test]
    fn retagging_rotates() {
        let cfg: CircleConfig = "110100111010".parse().unwrap();
        let holes = cfg.holes();
        let base = zrp_of_circle(&cfg, holes[0]).unwrap();
        for (j, &h) in holes.iter().enumerate() {
            assert_eq!(zrp_of_circle(&cfg, h).unwrap(), base.rotate_left(j));
        }
    }

    #[test]
    fn phi_examples() {
        let mut w = vec![3, 1, 2, 2];
        w.extend([0; 4]);
        let z = phi_zrp_to_obep(&w).unwrap();
        let pos: Vec<usize> = (0..z.len()).filter(|&i| z[i]).map(|i| i + 1).collect();
        assert_eq!(z.len(), 7);
        assert_eq!(pos, vec![3, 4, 6]);
        assert_eq!(phi_zrp_to_obep(&[0, 0, 5, 0]).unwrap(), vec![false; 4]);
        let flat = phi_zrp_to_obep(&[1, 1, 1, 1, 0, 0]).unwrap();
        assert_eq!(flat, vec![true, true, true]);
        assert!(phi_zrp_to_obep(&[1, 0, 1, 0]).is_err());
        assert!(phi_zrp_to_obep(&[1, 1, 1]).is_err());
        // a frozen single region is accepted
        assert_eq!(phi_zrp_to_obep(&[1, 1, 0]).unwrap(), vec![true]);
    }

    #[test]
    fn reduction_examples() {
        let r = constant_rate_reduction(&ZrpConfig::new(vec![0, 2, 1, 1])).unwrap();
        assert_eq!(r.w, vec![1, 0, 0]);
        assert_eq!(constant_rate_reduction(&ZrpConfig::new(vec![0, 1, 1, 1])).unwrap().w, vec![0, 0, 0]);
        assert!(constant_rate_reduction(&ZrpConfig::new(vec![1, 1, 1])).is_err());
        assert!(constant_rate_reduction(&ZrpConfig::new(vec![0, 0, 3])).is_err());
        assert_eq!(constant_rate_lift(&r).w, vec![0, 2, 1, 1]);
    }

    #[test]
    fn h_sample_reduces_to_right_pile() {
        for (n, k) in [(11, 7), (15, 9), (23, 13)] {
            let h = special_configs(n, k).unwrap().h_sample;
            let red = constant_rate_reduction(&zrp_of_segment(&h)).unwrap();
            let g = n - k;
            let mut expect = vec![0; g];
            expect[g - 1] = 2 * k - n;
            assert_eq!(red.w, expect);
            assert_eq!(red.total(), 2 * k - n);
        }
    }

    #[test]
    fn trackers_follow_jumps() {
        let cfg: SegmentConfig = "1101110011".parse().unwrap();
        let mut t = SegmentZrpTracker::new(&cfg);
        let (src, dst) = t.apply(6, 7).unwrap();
        assert_eq!((src, dst), (1, 2));
        let moved: SegmentConfig = "1101101011".parse().unwrap();
        assert_eq!(t.zrp(), zrp_of_segment(&moved));
        assert!(t.apply(1, 2).is_err());

        let c: CircleConfig = "0111011000".parse().unwrap();
        let mut ct = CircleZrpTracker::new(&c, 0).unwrap();
        ct.apply(3, 4).unwrap();
        let after: CircleConfig = "0110111000".parse().unwrap();
        assert_eq!(ct.zrp(), zrp_of_circle(&after, ct.tag()).unwrap());
        ct.apply(1, 0).unwrap();
        let after: CircleConfig = "1010111000".parse().unwrap();
        assert_eq!(ct.tag(), 1);
        assert_eq!(ct.zrp(), zrp_of_circle(&after, 1).unwrap());
    }
}
