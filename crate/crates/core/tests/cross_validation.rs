//! Exact engine against the closed forms and their structural properties.

use mmrelay::closed_form::approx_report;
use mmrelay::config::{db_to_linear, validate, LinkParams, LinkSide, SystemConfig};
use mmrelay::exact::{simulate, ExactOptions};
use proptest::prelude::*;

#[test]
fn asymmetric_system_agrees_with_closed_form() {
    let mut cfg = SystemConfig::new(256, 3).with_trials(1500).with_seed(31).with_training_len(6);
    cfg.power_a = vec![10.0, 5.0, 20.0];
    cfg.power_b = vec![8.0, 12.0, 10.0];
    let grid = mmrelay::config::grid_angles(6, 32);
    let params = LinkParams {
        ar: LinkSide {
            beta: vec![1.0, 0.6, 0.9],
            k_factor: vec![db_to_linear(5.0), db_to_linear(2.0), db_to_linear(8.0)],
            theta: grid[..3].to_vec(),
        },
        br: LinkSide {
            beta: vec![0.8, 1.0, 0.5],
            k_factor: vec![db_to_linear(3.0), db_to_linear(6.0), db_to_linear(4.0)],
            theta: grid[3..].to_vec(),
        },
    };
    let v = validate(cfg, params).unwrap();
    let exact = simulate(&v, &ExactOptions::threads(0)).report;
    let approx = approx_report(v.config(), &v.stats());
    assert!((exact.sum() - approx.sum()).abs() / exact.sum() < 0.05, "{} vs {}", exact.sum(), approx.sum());
    for (e, a) in exact.pairs.iter().zip(&approx.pairs) {
        assert!((e.r - a.r).abs() / e.r < 0.07, "{e:?} vs {a:?}");
    }
}

#[test]
fn perfect_los_removes_the_gap() {
    // Near-deterministic orthogonal channels: no Jensen gap.
    let cfg = SystemConfig::new(64, 2).with_trials(200).with_seed(1);
    let v = validate(cfg, LinkParams::symmetric(2, 1.0, 1e6)).unwrap();
    let exact = simulate(&v, &ExactOptions::default()).report;
    let approx = approx_report(v.config(), &v.stats());
    assert!((exact.sum() - approx.sum()).abs() / approx.sum() < 1e-3, "{} vs {}", exact.sum(), approx.sum());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn reports_are_consistent(k_db in -5.0f64..15.0, pairs in 1usize..4, seed in any::<u64>()) {
        let cfg = SystemConfig::new(32, pairs).with_trials(30).with_seed(seed);
        let v = validate(cfg, LinkParams::symmetric(pairs, 1.0, db_to_linear(k_db))).unwrap();
        let exact = simulate(&v, &ExactOptions::default()).report;
        let approx = approx_report(v.config(), &v.stats());
        prop_assert!(exact.is_consistent());
        prop_assert!(approx.is_consistent());
        prop_assert!(exact.sum() >= 0.0 && approx.sum() >= 0.0);
    }

    #[test]
    fn thread_count_does_not_change_results(seed in any::<u64>(), trials in 1usize..200) {
        let cfg = SystemConfig::new(16, 2).with_trials(trials).with_seed(seed);
        let v = validate(cfg, LinkParams::symmetric(2, 1.0, 3.0)).unwrap();
        let a = simulate(&v, &ExactOptions::threads(1)).report;
        let b = simulate(&v, &ExactOptions::threads(0)).report;
        prop_assert_eq!(a, b);
    }
}
