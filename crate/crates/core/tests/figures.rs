//! Shape properties of the figure commands' CSV output.

use mmrelay::config_file::ExperimentConfig;
use mmrelay::experiment::{run, Artifact, Command, Evaluator, PairLabel, Row, RunOptions};

fn reference() -> ExperimentConfig {
    ExperimentConfig::load(&std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/reference.conf")).unwrap()
}

fn sums(a: &Artifact, e: Evaluator) -> Vec<&Row> {
    a.rows.iter().filter(|r| r.pair == PairLabel::Sum && r.evaluator == e).collect()
}

fn figure(command: Command) -> Vec<Artifact> {
    let dir = tempfile::tempdir().unwrap();
    let opts = RunOptions {
        threads: 0,
        ..Default::default()
    };
    run(command, &reference(), &opts, dir.path()).unwrap()
}

#[test]
fn fig1_curves_match_and_grow() {
    for a in figure(Command::Fig1) {
        let (exact, approx) = (sums(&a, Evaluator::Exact), sums(&a, Evaluator::Approx));
        assert_eq!(exact.len(), 5);
        for (e, x) in exact.iter().zip(&approx) {
            if e.antennas >= 128 {
                assert!((e.sum_se - x.sum_se).abs() / e.sum_se < 0.05, "{e:?} vs {x:?}");
            }
        }
        for s in [&exact, &approx] {
            assert!(s.windows(2).all(|w| w[1].sum_se > w[0].sum_se), "{}", a.path.display());
        }
    }
}

#[test]
fn fig2_reaches_its_limits() {
    let artifacts = figure(Command::Fig2);
    assert_eq!(artifacts.len(), 3);
    for a in &artifacts {
        let approx = sums(a, Evaluator::Approx);
        let limit = sums(a, Evaluator::Limit);
        let (x, l) = (approx.last().unwrap(), limit.last().unwrap());
        assert_eq!(x.antennas, 4096);
        assert!((x.sum_se - l.sum_se).abs() / l.sum_se < 0.03, "{}: {} vs {}", a.path.display(), x.sum_se, l.sum_se);
    }
}

#[test]
fn fig3_decays() {
    for a in figure(Command::Fig3) {
        let approx = sums(&a, Evaluator::Approx);
        let at = |m| approx.iter().find(|r| r.antennas == m).unwrap().sum_se;
        assert!(at(4096) < at(256), "{}", a.path.display());
        assert!(a.rows.iter().all(|r| r.evaluator == Evaluator::Approx));
    }
}

#[test]
fn fig4_increases_with_k() {
    let artifacts = figure(Command::Fig4);
    let names: Vec<String> = artifacts.iter().map(|a| a.path.file_name().unwrap().to_string_lossy().into_owned()).collect();
    assert_eq!(names, ["fig4_K3dB.csv", "fig4_K5dB.csv", "fig4_K10dB.csv"]);
    for e in [Evaluator::Exact, Evaluator::Approx] {
        let at_max: Vec<f64> = artifacts.iter().map(|a| sums(a, e).last().unwrap().sum_se).collect();
        assert!(at_max.windows(2).all(|w| w[1] > w[0]), "{e}: {at_max:?}");
    }
}
