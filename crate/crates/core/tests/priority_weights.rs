use hdpg_core::agent::{compute_priority_weights, update_reward_stats, RewardStats};
use proptest::prelude::*;

fn stats_strategy() -> impl Strategy<Value = RewardStats> {
    (1usize..=8).prop_flat_map(|k| {
        (
            prop::collection::vec(0.0f64..=1.0, k),
            prop::collection::vec(0.0f64..=0.25, k),
        )
            .prop_map(|(mean, variance)| RewardStats { mean, variance })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn weights_sum_to_k_and_stay_inside(stats in stats_strategy()) {
        let m = compute_priority_weights(&stats).m;
        let k = m.len() as f64;
        let sum: f64 = m.iter().sum();
        prop_assert!((sum - k).abs() <= 1e-12, "sum {} vs {}", sum, k);
        for &v in &m {
            prop_assert!(v > 0.0 && (v < k || k == 1.0));
        }
    }

    #[test]
    fn permutation_equivariance(stats in stats_strategy(), rot in 0usize..8) {
        let k = stats.mean.len();
        let r = rot % k;
        let mut p = stats.clone();
        p.mean.rotate_left(r);
        p.variance.rotate_left(r);
        let mut expected = compute_priority_weights(&stats).m;
        expected.rotate_left(r);
        let got = compute_priority_weights(&p).m;
        for (a, b) in got.iter().zip(&expected) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn monotone_in_mean_and_variance(
        stats in stats_strategy().prop_filter("needs two components", |s| s.mean.len() >= 2),
        dm in 0.01f64..0.5,
        dv in 0.01f64..0.2,
    ) {
        let base = compute_priority_weights(&stats).m[0];
        let mut up = stats.clone();
        up.mean[0] += dm;
        prop_assert!(compute_priority_weights(&up).m[0] > base);
        let mut up = stats.clone();
        up.variance[0] += dv;
        prop_assert!(compute_priority_weights(&up).m[0] > base);
    }

    #[test]
    fn window_stats_stay_in_range(
        window in prop::collection::vec(prop::collection::vec(0.0f64..=1.0, 3), 2..50)
    ) {
        let s = update_reward_stats(window.iter().map(Vec::as_slice)).unwrap();
        for (&mu, &var) in s.mean.iter().zip(&s.variance) {
            prop_assert!((0.0..=1.0).contains(&mu));
            prop_assert!((0.0..=0.25 + 1e-15).contains(&var));
        }
    }
}

#[test]
fn symmetric_stats_give_unit_weights() {
    for k in 1..=6 {
        for (mu, var) in [(0.0, 0.0), (0.4, 0.1), (1.0, 0.25)] {
            let m = compute_priority_weights(&RewardStats {
                mean: vec![mu; k],
                variance: vec![var; k],
            })
            .m;
            assert!(m.iter().all(|v| (v - 1.0).abs() <= 1e-12));
        }
    }
}
