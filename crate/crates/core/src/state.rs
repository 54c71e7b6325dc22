//! Exclusion configurations on the segment `[N]` and the circle `T_N`,
//! ergodic components, ergodic regions and exact counting.

use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported site count.
pub const MAX_SITES: usize = 1 << 20;

fn parse_bits(s: &str) -> Result<Vec<bool>> {
    s.trim()
        .chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(Error::InvalidConfig(format!("unexpected character {other:?}"))),
        })
        .collect()
}

fn check_len(n: usize) -> Result<()> {
    if n == 0 || n > MAX_SITES {
        return Err(Error::InvalidConfig(format!("site count {n} outside 1..={MAX_SITES}")));
    }
    Ok(())
}

fn write_bits(f: &mut fmt::Formatter<'_>, occ: &[bool]) -> fmt::Result {
    for &b in occ {
        f.write_str(if b { "1" } else { "0" })?;
    }
    Ok(())
}

/// Configuration on the segment. Sites are 1-based; `occ[0]` is site 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SegmentConfig {
    occ: Vec<bool>,
    k: usize,
}

impl SegmentConfig {
    pub fn new(occ: Vec<bool>) -> Result<Self> {
        check_len(occ.len())?;
        let k = occ.iter().filter(|&&b| b).count();
        Ok(Self { occ, k })
    }

    /// Builds a configuration from 1-based particle positions.
    pub fn from_positions(n: usize, positions: &[usize]) -> Result<Self> {
        check_len(n)?;
        let mut occ = vec![false; n];
        for &x in positions {
            if x == 0 || x > n {
                return Err(Error::InvalidConfig(format!("position {x} outside 1..={n}")));
            }
            if occ[x - 1] {
                return Err(Error::InvalidConfig(format!("position {x} occupied twice")));
            }
            occ[x - 1] = true;
        }
        Self::new(occ)
    }

    /// Parses and checks the particle count.
    pub fn parse_with_k(s: &str, k: usize) -> Result<Self> {
        let cfg: Self = s.parse()?;
        if cfg.k != k {
            return Err(Error::InvalidConfig(format!("expected {k} particles, found {}", cfg.k)));
        }
        Ok(cfg)
    }

    pub fn n(&self) -> usize {
        self.occ.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn occ(&self) -> &[bool] {
        &self.occ
    }

    /// Occupation of 1-based site `x`.
    pub fn get(&self, x: usize) -> bool {
        self.occ[x - 1]
    }

    /// Sorted 1-based particle positions.
    pub fn positions(&self) -> Vec<usize> {
        (1..=self.n()).filter(|&x| self.occ[x - 1]).collect()
    }

    /// Sorted 1-based hole positions.
    pub fn holes(&self) -> Vec<usize> {
        (1..=self.n()).filter(|&x| !self.occ[x - 1]).collect()
    }

    pub fn is_ergodic(&self) -> bool {
        is_ergodic_segment(self)
    }
}

impl FromStr for SegmentConfig {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::new(parse_bits(s)?)
    }
}

impl fmt::Display for SegmentConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_bits(f, &self.occ)
    }
}

/// Configuration on the circle `Z/NZ`, 0-based.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CircleConfig {
    occ: Vec<bool>,
    k: usize,
}

impl CircleConfig {
    pub fn new(occ: Vec<bool>) -> Result<Self> {
        check_len(occ.len())?;
        let k = occ.iter().filter(|&&b| b).count();
        Ok(Self { occ, k })
    }

    pub fn from_sites(n: usize, sites: &[usize]) -> Result<Self> {
        check_len(n)?;
        let mut occ = vec![false; n];
        for &x in sites {
            if x >= n {
                return Err(Error::InvalidConfig(format!("site {x} outside 0..{n}")));
            }
            if occ[x] {
                return Err(Error::InvalidConfig(format!("site {x} occupied twice")));
            }
            occ[x] = true;
        }
        Self::new(occ)
    }

    pub fn parse_with_k(s: &str, k: usize) -> Result<Self> {
        let cfg: Self = s.parse()?;
        if cfg.k != k {
            return Err(Error::InvalidConfig(format!("expected {k} particles, found {}", cfg.k)));
        }
        Ok(cfg)
    }

    pub fn n(&self) -> usize {
        self.occ.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn occ(&self) -> &[bool] {
        &self.occ
    }

    /// Occupation at `x mod N`.
    pub fn get(&self, x: i64) -> bool {
        self.occ[x.rem_euclid(self.n() as i64) as usize]
    }

    pub fn sites(&self) -> Vec<usize> {
        (0..self.n()).filter(|&x| self.occ[x]).collect()
    }

    pub fn holes(&self) -> Vec<usize> {
        (0..self.n()).filter(|&x| !self.occ[x]).collect()
    }

    /// Rotates clockwise: the particle at `x` moves to `x + shift`.
    pub fn rotate(&self, shift: usize) -> Self {
        let n = self.n();
        let mut occ = vec![false; n];
        for x in 0..n {
            occ[(x + shift) % n] = self.occ[x];
        }
        Self { occ, k: self.k }
    }

    pub fn is_ergodic(&self) -> bool {
        is_ergodic_circle(self)
    }
}

impl FromStr for CircleConfig {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::new(parse_bits(s)?)
    }
}

impl fmt::Display for CircleConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_bits(f, &self.occ)
    }
}

/// Membership in `E_{N,k}`: occupied endpoints and no two adjacent holes.
pub fn is_ergodic_segment(cfg: &SegmentConfig) -> bool {
    let occ = cfg.occ();
    occ[0] && occ[occ.len() - 1] && occ.windows(2).all(|w| w[0] || w[1])
}

/// Membership in `G_{N,k}`: no two adjacent holes anywhere on the circle.
pub fn is_ergodic_circle(cfg: &CircleConfig) -> bool {
    let occ = cfg.occ();
    let n = occ.len();
    if n == 1 {
        return occ[0];
    }
    (0..n).all(|x| occ[x] || occ[(x + 1) % n])
}

/// A clockwise interval `[start, end]` of the circle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Region {
    pub start: usize,
    pub end: usize,
    /// Number of sites in the interval.
    pub len: usize,
    pub particles: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ErgodicRegionSet {
    /// The configuration lies in `G_{N,k}`.
    FullCircle,
    /// Ordered by start site.
    Regions(Vec<Region>),
}

impl ErgodicRegionSet {
    pub fn regions(&self) -> &[Region] {
        match self {
            ErgodicRegionSet::FullCircle => &[],
            ErgodicRegionSet::Regions(r) => r,
        }
    }
}

/// Ergodic regions of a circle configuration. Holes belonging to a run of
/// two or more holes separate regions; each remaining arc starts and ends on
/// a particle.
pub fn ergodic_regions(cfg: &CircleConfig) -> ErgodicRegionSet {
    let n = cfg.n();
    let occ = cfg.occ();
    if n == 1 {
        return ErgodicRegionSet::FullCircle;
    }
    let cut: Vec<bool> =
        (0..n).map(|x| !occ[x] && (!occ[(x + n - 1) % n] || !occ[(x + 1) % n])).collect();
    let Some(first_cut) = cut.iter().position(|&c| c) else {
        return ErgodicRegionSet::FullCircle;
    };
    let mut regions = Vec::new();
    let mut current: Option<Region> = None;
    for step in 1..=n {
        let x = (first_cut + step) % n;
        if cut[x] {
            if let Some(r) = current.take() {
                regions.push(r);
            }
            continue;
        }
        let r = current.get_or_insert(Region { start: x, end: x, len: 0, particles: 0 });
        r.end = x;
        r.len += 1;
        if occ[x] {
            r.particles += 1;
        }
    }
    if let Some(r) = current.take() {
        regions.push(r);
    }
    regions.sort_by_key(|r| r.start);
    ErgodicRegionSet::Regions(regions)
}

/// Whether at most `m` ergodic regions jointly hold at least `N - k`
/// particles.
pub fn in_class_i_m(cfg: &CircleConfig, m: usize) -> bool {
    let need = cfg.n() - cfg.k();
    match ergodic_regions(cfg) {
        ErgodicRegionSet::FullCircle => cfg.k() >= need,
        ErgodicRegionSet::Regions(regions) => {
            let mut counts: Vec<usize> = regions.iter().map(|r| r.particles).collect();
            counts.sort_unstable_by(|a, b| b.cmp(a));
            counts.iter().take(m).sum::<usize>() >= need
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Space {
    Segment,
    Circle,
}

impl FromStr for Space {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "segment" => Ok(Space::Segment),
            "circle" => Ok(Space::Circle),
            other => Err(Error::Parameter(format!("unknown space {other:?}"))),
        }
    }
}

pub fn binomial(n: u64, r: u64) -> BigUint {
    if r > n {
        return BigUint::zero();
    }
    let r = r.min(n - r);
    let mut acc = BigUint::one();
    for i in 0..r {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

fn check_density(n: usize, k: usize) -> Result<()> {
    if n < 2 || k > n || 2 * k < n {
        return Err(Error::Parameter(format!("need N >= 2 and N/2 <= k <= N, got N={n}, k={k}")));
    }
    Ok(())
}

/// Closed-form size of the ergodic component.
pub fn count_ergodic(space: Space, n: usize, k: usize) -> Result<BigUint> {
    check_density(n, k)?;
    let (n64, k64) = (n as u64, k as u64);
    Ok(match space {
        Space::Segment => {
            if k == 0 {
                BigUint::zero()
            } else {
                binomial(k64 - 1, n64 - k64)
            }
        }
        Space::Circle => {
            if k == 0 {
                BigUint::zero()
            } else {
                binomial(k64, n64 - k64) * n64 / k64
            }
        }
    })
}

/// Brute-force size of the ergodic component.
pub fn count_ergodic_enumerated(space: Space, n: usize, k: usize) -> Result<u64> {
    check_density(n, k)?;
    Ok(match space {
        Space::Segment => enumerate_segment(n, k).filter(is_ergodic_segment).count() as u64,
        Space::Circle => enumerate_circle(n, k).filter(is_ergodic_circle).count() as u64,
    })
}

/// All configurations of `Ω_{N,k}` in lexicographic order of positions.
pub fn enumerate_segment(n: usize, k: usize) -> impl Iterator<Item = SegmentConfig> {
    (1..=n).combinations(k).map(move |pos| {
        SegmentConfig::from_positions(n, &pos).expect("combination positions are valid")
    })
}

/// All configurations of `Ω°_{N,k}`.
pub fn enumerate_circle(n: usize, k: usize) -> impl Iterator<Item = CircleConfig> {
    (0..n)
        .combinations(k)
        .map(move |s| CircleConfig::from_sites(n, &s).expect("combination sites are valid"))
}

/// The distinguished configurations for `N/2 < k < N`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpecialConfigs {
    /// All particles packed left.
    pub minus: SegmentConfig,
    /// All particles packed right.
    pub plus: SegmentConfig,
    /// Minimal ergodic configuration: holes at `N+1-2j`.
    pub vee: SegmentConfig,
    /// Maximal ergodic configuration: holes at `2j`.
    pub wedge: SegmentConfig,
    /// Element of `H_{N,k}`: holes at `2j-1`.
    pub h_sample: SegmentConfig,
}

pub fn special_configs(n: usize, k: usize) -> Result<SpecialConfigs> {
    if !(2 * k > n && k < n) {
        return Err(Error::Parameter(format!("need N/2 < k < N, got N={n}, k={k}")));
    }
    let g = n - k;
    let from_holes = |holes: Vec<usize>| {
        let mut occ = vec![true; n];
        for h in holes {
            occ[h - 1] = false;
        }
        SegmentConfig::new(occ)
    };
    Ok(SpecialConfigs {
        minus: SegmentConfig::new((1..=n).map(|x| x <= k).collect())?,
        plus: SegmentConfig::new((1..=n).map(|x| x > g).collect())?,
        vee: from_holes((1..=g).map(|j| n + 1 - 2 * j).collect())?,
        wedge: from_holes((1..=g).map(|j| 2 * j).collect())?,
        h_sample: from_holes((1..=g).map(|j| 2 * j - 1).collect())?,
    })
}
