use lenvm::decode::{select_at_least, select_at_most, select_equal_to, tilt, Candidate, CandidateSet};
use lenvm::eval::{length_deviation, length_score, ConstraintKind};
use lenvm::world::exact_value;
use lenvm::{fixtures, DiscountSpec};
use proptest::prelude::*;

fn gamma() -> impl Strategy<Value = f64> {
    0.05f64..0.9999
}

fn candidates() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((0.01f64..1.0, -0.999f64..0.0), 1..12)
}

fn to_set(entries: &[(f64, f64)]) -> CandidateSet {
    CandidateSet::new(
        entries
            .iter()
            .enumerate()
            .map(|(i, &(base_prob, value))| Candidate {
                token: i as u32,
                base_prob,
                value,
                successor: 0,
            })
            .collect(),
    )
    .unwrap()
}

proptest! {
    #[test]
    fn returns_fall_with_remaining_length(g in gamma(), n in 0u64..10_000) {
        let s = DiscountSpec::new(g).unwrap();
        let a = s.return_target(n);
        let b = s.return_target(n + 1);
        prop_assert!(b <= a);
        prop_assert!((-1.0..=0.0).contains(&a));
    }

    #[test]
    fn schedules_satisfy_bellman(g in gamma(), len in 1usize..3000) {
        let s = DiscountSpec::new(g).unwrap();
        let sched = s.schedule_for_length(len).unwrap();
        prop_assert_eq!(sched.values().len(), len + 1);
        prop_assert_eq!(sched.values()[len], 0.0);
        prop_assert!(sched.max_bellman_residual(&s) <= 1e-12);
    }

    #[test]
    fn exact_values_satisfy_bellman(g in gamma(), which in 0usize..4) {
        let world = vec![fixtures::ten_state(), fixtures::two_path(), fixtures::ladder(), fixtures::one_or_three()]
            .swap_remove(which);
        let s = DiscountSpec::new(g).unwrap();
        let oracle = exact_value(&world, &s).unwrap();
        prop_assert!(oracle.max_phi_residual(&world, &s) <= 1e-9);
    }

    #[test]
    fn tilt_is_a_distribution(entries in candidates(), beta in -50.0f64..0.0) {
        let p: Vec<f64> = entries.iter().map(|e| e.0).collect();
        let v: Vec<f64> = entries.iter().map(|e| e.1).collect();
        let q = tilt(&p, &v, beta).unwrap();
        prop_assert!((q.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        prop_assert!(q.iter().all(|x| (0.0..=1.0).contains(x)));
    }

    #[test]
    fn tilt_ignores_constant_score_shifts(entries in candidates(), beta in -20.0f64..0.0, c in -5.0f64..5.0) {
        let p: Vec<f64> = entries.iter().map(|e| e.0).collect();
        let v: Vec<f64> = entries.iter().map(|e| e.1).collect();
        let shifted: Vec<f64> = v.iter().map(|x| x + c).collect();
        let a = tilt(&p, &v, beta).unwrap();
        let b = tilt(&p, &shifted, beta).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
    }

    #[test]
    fn stronger_tilt_lowers_expected_cost(entries in candidates(), b1 in -20.0f64..0.0, b2 in -20.0f64..0.0) {
        let (lo, hi) = if b1 < b2 { (b1, b2) } else { (b2, b1) };
        let p: Vec<f64> = entries.iter().map(|e| e.0).collect();
        let cost: Vec<f64> = entries.iter().map(|e| -e.1).collect();
        let mean = |beta: f64| -> f64 {
            tilt(&p, &cost, beta).unwrap().iter().zip(&cost).map(|(q, c)| q * c).sum()
        };
        prop_assert!(mean(lo) <= mean(hi) + 1e-12);
    }

    #[test]
    fn selectors_ignore_candidate_order(entries in candidates(), v_star in -1.0f64..0.0, seed in any::<u64>()) {
        let a = to_set(&entries);
        let mut shuffled: Vec<Candidate> = a.entries().to_vec();
        let n = shuffled.len();
        for i in (1..n).rev() {
            shuffled.swap(i, (seed.wrapping_mul(i as u64 + 7) % (i as u64 + 1)) as usize);
        }
        let b = CandidateSet::new(shuffled).unwrap();
        prop_assert_eq!(select_equal_to(&a, v_star), select_equal_to(&b, v_star));
        prop_assert_eq!(select_at_least(&a), select_at_least(&b));
        prop_assert_eq!(select_at_most(&a), select_at_most(&b));
    }

    #[test]
    fn length_score_is_bounded(observed in 0usize..10_000, target in 1usize..10_000) {
        let ld = length_deviation(observed, target).unwrap();
        for kind in [ConstraintKind::EqualTo, ConstraintKind::AtMost, ConstraintKind::AtLeast] {
            let ls = length_score(ld, kind);
            prop_assert!((0.0..=100.0).contains(&ls));
        }
    }

    #[test]
    fn inversion_round_trips_where_representable(g in 0.99f64..0.9999, n in 0u64..2000) {
        let s = DiscountSpec::new(g).unwrap();
        let back = s.invert_to_length(s.return_target(n)).unwrap();
        prop_assert!((back - n as f64).abs() <= 1e-9 * (n as f64).max(1.0));
    }
}
