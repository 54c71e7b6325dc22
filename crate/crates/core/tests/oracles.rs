//! Fixed numerical values checked against independent computations.

use std::f64::consts::PI;

use fep_core::exact::{build_generator, mixing_time_exact, spectral_gap, Domain, Family};
use fep_core::experiments::{coupling_time, hitting_time, uncoupled_fraction, HorizonPolicy, Start};
use fep_core::state::{ergodic_regions, CircleConfig, Region};

/// Gap of the symmetric exclusion walk with `N - k` particles on `k - 1`
/// sites, which is the gap of one walker.
#[test]
fn symmetric_gap_on_ergodic_component() {
    for (n, k) in [(4, 3), (6, 4), (7, 5), (8, 5), (9, 6), (10, 7), (11, 8), (12, 8)] {
        let l = build_generator(&Family::FepSegment { n, k, p: 0.5 }, Domain::Ergodic).unwrap();
        let gap = spectral_gap(&l).unwrap();
        let walk = 1.0 - (PI / (k as f64 - 1.0)).cos();
        assert!((gap - walk).abs() < 1e-10, "N={n} k={k}: gap {gap} vs {walk}");
    }
}

/// Reference values from a dense matrix exponential and plain bisection.
#[test]
fn quarter_mixing_times() {
    for (n, k, p, reference) in [
        (4, 3, 0.5, 2.772_588_722_239_782),
        (8, 6, 0.5, 12.298_423_484_616_196),
        (7, 5, 0.7, 20.709_522_873_362_936),
    ] {
        let l = build_generator(&Family::FepSegment { n, k, p }, Domain::Full).unwrap();
        let m = mixing_time_exact(&l, 0.25).unwrap();
        assert!(m.t_lo <= reference && reference <= m.t, "N={n} k={k} p={p}: [{}, {}] misses {reference}", m.t_lo, m.t);
        assert!((m.t - m.t_lo) / m.t <= 1e-3);
        assert!(m.d_at_t <= 0.25);
    }
}

#[test]
fn small_segment_fixture() {
    let l = build_generator(&Family::FepSegment { n: 4, k: 3, p: 0.5 }, Domain::Full).unwrap();
    let m = mixing_time_exact(&l, 0.25).unwrap();
    assert_eq!(m.t, 2.773_437_5);
}

/// The fraction of uncoupled extremal pairs bounds the worst-case distance.
#[test]
fn coupling_fraction_at_quarter_mixing_time() {
    let (n, k) = (8, 6);
    let l = build_generator(&Family::FepSegment { n, k, p: 0.5 }, Domain::Full).unwrap();
    let t = mixing_time_exact(&l, 0.25).unwrap().t;
    let g = coupling_time(n, k, 0.5, 4000, 77, 0, HorizonPolicy::new(40.0 * t)).unwrap();
    let (f, se) = uncoupled_fraction(&g.samples, t).unwrap();
    assert!(0.25 <= f + 3.0 * se, "uncoupled fraction {f} ± {se} below d = 0.25");
    assert!(g.stats.mean.unwrap().is_finite());
}

#[test]
fn circle_block_hitting_mean_is_finite() {
    let g = hitting_time(Start::CircleBlock, 64, 48, 0.5, 40, 5, 0, HorizonPolicy::new(1e6)).unwrap();
    assert_eq!(g.stats.censored_fraction, 0.0);
    let mean = g.stats.mean.unwrap();
    assert!(mean.is_finite() && mean > 0.0);
}

/// Twenty sites, eleven particles, regions `[2,6]`, `[9,11]` and `[14,19]`.
#[test]
fn three_region_circle() {
    let c = CircleConfig::parse_with_k("00101110010100111011", 11).unwrap();
    let r = ergodic_regions(&c);
    let spans: Vec<(usize, usize)> = r.regions().iter().map(|r: &Region| (r.start, r.end)).collect();
    assert_eq!(spans, vec![(2, 6), (9, 11), (14, 19)]);
    let held: usize = r.regions().iter().map(|r| r.particles).sum();
    assert_eq!(held, 11);
}
