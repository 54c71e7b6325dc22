use proptest::prelude::*;

use fep_core::engine::hitting::{first_hitting, HitPredicate};
use fep_core::engine::{simulate_path, ClockField, CoupledSim};
use fep_core::experiments::{random_occupation, replicate_seed, SummaryStats};
use fep_core::lattice_path::{eta_minus, from_path, leq, path_to_sep, sep_to_path, to_path, LatticePath};
use fep_core::mappings::{circle_of_zrp, default_tag, segment_of_zrp, zrp_of_circle, zrp_of_segment};
use fep_core::state::{CircleConfig, SegmentConfig};

fn segment(max_n: usize) -> impl Strategy<Value = SegmentConfig> {
    (2..=max_n).prop_flat_map(|n| (Just(n), 1..=n, any::<u64>())).prop_map(|(n, k, seed)| {
        SegmentConfig::new(random_occupation(n, k, seed)).unwrap()
    })
}

/// `N/2 < k <= N`.
fn dense(max_n: usize) -> impl Strategy<Value = (usize, usize, u64)> {
    (3..=max_n).prop_flat_map(|n| (Just(n), n / 2 + 1..=n, any::<u64>()))
}

fn path_of(n: usize, k: usize, seed: u64) -> LatticePath {
    to_path(&SegmentConfig::new(random_occupation(n, k, seed)).unwrap()).unwrap()
}

proptest! {
    #[test]
    fn segment_path_round_trip(c in segment(24)) {
        let p = to_path(&c).unwrap();
        prop_assert_eq!(from_path(&p), c.clone());
        prop_assert_eq!(p.is_ergodic(), c.is_ergodic());
        prop_assert!(leq(&eta_minus(c.n(), c.k()), &p).unwrap());
    }

    #[test]
    fn segment_zrp_round_trip(c in segment(24)) {
        let z = zrp_of_segment(&c);
        prop_assert_eq!(z.sites(), c.n() - c.k() + 1);
        prop_assert_eq!(z.total(), c.k());
        prop_assert_eq!(segment_of_zrp(&z).unwrap(), c.clone());
        prop_assert_eq!(z.min_pile() >= 1, c.is_ergodic());
    }

    #[test]
    fn circle_zrp_round_trip(n in 2usize..24, frac in 0.0f64..1.0, seed in any::<u64>()) {
        let k = ((n - 1) as f64 * frac) as usize;
        let c = CircleConfig::new(random_occupation(n, k, seed)).unwrap();
        let tag = default_tag(&c).unwrap();
        let z = zrp_of_circle(&c, tag).unwrap();
        prop_assert_eq!(z.total(), k);
        prop_assert_eq!(circle_of_zrp(&z, tag).unwrap(), c.clone());
        prop_assert_eq!(z.min_pile() >= 1, c.is_ergodic());
    }

    #[test]
    fn sep_round_trip(k in 3usize..16, frac in 0.0f64..1.0, seed in any::<u64>()) {
        let m = 1 + ((k - 2) as f64 * frac) as usize;
        let m = m.min(k - 2);
        let sigma = random_occupation(k - 1, m, seed);
        let p = sep_to_path(k + m, k, &sigma).unwrap();
        prop_assert!(p.is_ergodic());
        prop_assert_eq!(path_to_sep(&p).unwrap(), sigma);
    }

    #[test]
    fn envelopes_stay_ordered((n, k, seed) in dense(14), other in any::<u64>(), p in 0.5f64..0.9) {
        let (a, b) = (path_of(n, k, seed), path_of(n, k, other));
        let lo: Vec<i64> = a.heights().iter().zip(b.heights()).map(|(x, y)| *x.min(y)).collect();
        let hi: Vec<i64> = a.heights().iter().zip(b.heights()).map(|(x, y)| *x.max(y)).collect();
        let starts = [LatticePath::new(n, k, lo).unwrap(), a, LatticePath::new(n, k, hi).unwrap()];
        let field = ClockField::fep(p, seed ^ other).unwrap();
        let (_, violations) = CoupledSim::fep(&field, &starts).unwrap().check_sandwich(30.0);
        prop_assert_eq!(violations, 0);
    }

    #[test]
    fn trajectory_times_increase((n, k, seed) in dense(20), p in 0.3f64..0.9) {
        let p0 = path_of(n, k, seed);
        let field = ClockField::fep(p, seed).unwrap();
        let (traj, last) = simulate_path(&p0, &field, 25.0);
        prop_assert!(traj.event_times_increasing());
        prop_assert!(traj.events.iter().all(|e| e.t <= 25.0));
        prop_assert_eq!(last.k(), k);
    }

    #[test]
    fn packed_left_reaches_cap_last((n, k, seed) in dense(12), p in 0.5f64..0.8) {
        let field = ClockField::fep(p, seed).unwrap();
        let from_minus = first_hitting(&eta_minus(n, k), &field, HitPredicate::ReachCap, 1e5);
        let from_other = first_hitting(&path_of(n, k, seed), &field, HitPredicate::ReachCap, 1e5);
        if let Some(t) = from_minus.time {
            prop_assert!(from_other.time.unwrap() <= t);
        }
    }

    #[test]
    fn quantiles_are_ordered(values in prop::collection::vec(prop::option::weighted(0.9, 0.0f64..1e3), 1..60)) {
        let s = SummaryStats::from_values(&values).unwrap();
        let q = [s.q05, s.q50, s.q95];
        for w in q.windows(2) {
            match (w[0], w[1]) {
                (Some(a), Some(b)) => prop_assert!(a <= b),
                (None, Some(_)) => prop_assert!(false, "censored quantile below a finite one"),
                _ => {}
            }
        }
        prop_assert_eq!(s.count, values.len());
        prop_assert!((0.0..=1.0).contains(&s.censored_fraction));
    }

    #[test]
    fn replicate_seeds_are_distinct(base in any::<u32>(), b1 in 0usize..64, b2 in 0usize..64, r1 in 0usize..100_000, r2 in 0usize..100_000) {
        let base = base as u64;
        prop_assert_eq!(replicate_seed(base, b1, r1) == replicate_seed(base, b2, r2), (b1, r1) == (b2, r2));
    }
}
