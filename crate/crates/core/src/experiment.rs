//! Sweeps and figure series over the three evaluators, written as CSV.
//!
//! Every artifact uses the header
//! `M,N,evaluator,pair,R1,R2,R,sum_SE,seed,trials` with one row per pair
//! plus a `sum` row, ordered grid point, then evaluator, then pair. Sweeps
//! over a variable that has no CSV column (`K_dB`, exponents) write one file
//! per grid value.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

use crate::asymptotics::{check_grid, limit_se, ScalingLaw, TraceError};
use crate::closed_form::approx_report;
use crate::config_file::{ConfigFileError, ExperimentConfig, PerUser};
use crate::exact::{simulate, ExactOptions};
use crate::report::SeReport;

pub const CSV_HEADER: [&str; 10] = ["M", "N", "evaluator", "pair", "R1", "R2", "R", "sum_SE", "seed", "trials"];

/// Default antenna grid of the Monte-Carlo figures.
pub const DESK_GRID: [usize; 5] = [32, 64, 128, 256, 512];

/// Default antenna grid of the closed-form scaling figures.
pub const SCALING_GRID: [usize; 7] = [64, 128, 256, 512, 1024, 2048, 4096];

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigFileError),
    #[error("invalid sweep: {0}")]
    Parse(String),
    #[error("cannot write {}: {source}", .path.display())]
    Io { path: PathBuf, source: csv::Error },
}

impl From<TraceError> for ExperimentError {
    fn from(e: TraceError) -> Self {
        match e {
            TraceError::Config(c) => ExperimentError::Config(c.into()),
            other => ExperimentError::Parse(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Evaluator {
    Exact,
    Approx,
    Limit,
}

impl Evaluator {
    pub const ALL: [Evaluator; 3] = [Evaluator::Exact, Evaluator::Approx, Evaluator::Limit];

    pub fn as_str(self) -> &'static str {
        match self {
            Evaluator::Exact => "exact",
            Evaluator::Approx => "approx",
            Evaluator::Limit => "limit",
        }
    }
}

impl fmt::Display for Evaluator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Evaluator {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Evaluator::ALL
            .into_iter()
            .find(|e| e.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| ExperimentError::Parse(format!("unknown evaluator {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepVar {
    M,
    KDb,
    Alpha,
    Epsilon,
    Gamma,
    N,
}

impl SweepVar {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepVar::M => "M",
            SweepVar::KDb => "K_dB",
            SweepVar::Alpha => "alpha",
            SweepVar::Epsilon => "epsilon",
            SweepVar::Gamma => "gamma",
            SweepVar::N => "N",
        }
    }

    fn is_count(self) -> bool {
        matches!(self, SweepVar::M | SweepVar::N)
    }
}

impl fmt::Display for SweepVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SweepVar {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        use SweepVar::*;
        [M, KDb, Alpha, Epsilon, Gamma, N]
            .into_iter()
            .find(|v| v.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| ExperimentError::Parse(format!("unknown sweep variable {s:?}")))
    }
}

/// A validated sweep: nonempty strictly increasing grid, nonempty evaluators.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    variable: SweepVar,
    grid: Vec<f64>,
    evaluators: Vec<Evaluator>,
}

impl SweepSpec {
    pub fn new(variable: SweepVar, grid: Vec<f64>, evaluators: Vec<Evaluator>) -> Result<Self, ExperimentError> {
        if grid.is_empty() {
            return Err(ExperimentError::Parse(format!("{variable} grid is empty")));
        }
        if grid.iter().any(|x| !x.is_finite()) {
            return Err(ExperimentError::Parse(format!("{variable} grid has a non-finite value")));
        }
        if let Some(w) = grid.windows(2).find(|w| w[1] <= w[0]) {
            return Err(ExperimentError::Parse(format!(
                "{variable} grid must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        if variable.is_count() && grid.iter().any(|&x| x < 1.0 || x.fract() != 0.0) {
            return Err(ExperimentError::Parse(format!("{variable} grid values must be positive integers")));
        }
        if matches!(variable, SweepVar::Alpha | SweepVar::Epsilon | SweepVar::Gamma) && grid[0] < 0.0 {
            return Err(ExperimentError::Parse(format!("{variable} grid values must be nonnegative")));
        }
        if evaluators.is_empty() {
            return Err(ExperimentError::Parse("no evaluators selected".into()));
        }
        let mut evaluators = evaluators;
        evaluators.sort();
        evaluators.dedup();
        Ok(SweepSpec {
            variable,
            grid,
            evaluators,
        })
    }

    pub fn variable(&self) -> SweepVar {
        self.variable
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn evaluators(&self) -> &[Evaluator] {
        &self.evaluators
    }
}

/// Comma-separated number list; an empty string yields an empty list.
pub fn parse_grid(text: &str) -> Result<Vec<f64>, ExperimentError> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| ExperimentError::Parse(format!("invalid grid value {s:?}"))))
        .collect()
}

pub fn parse_evaluators(text: &str) -> Result<Vec<Evaluator>, ExperimentError> {
    text.split(',').map(str::trim).filter(|s| !s.is_empty()).map(str::parse).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairLabel {
    /// 0-based pair index; written 1-based.
    Pair(usize),
    Sum,
}

impl fmt::Display for PairLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PairLabel::Pair(i) => write!(f, "{}", i + 1),
            PairLabel::Sum => f.write_str("sum"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub antennas: usize,
    pub pairs: usize,
    pub evaluator: Evaluator,
    pub pair: PairLabel,
    pub r1: f64,
    pub r2: f64,
    pub r: f64,
    pub sum_se: f64,
    pub seed: u64,
    /// Monte-Carlo trials behind the row; 0 for deterministic evaluators.
    pub trials: usize,
}

impl Row {
    fn record(&self) -> [String; 10] {
        [
            self.antennas.to_string(),
            self.pairs.to_string(),
            self.evaluator.to_string(),
            self.pair.to_string(),
            self.r1.to_string(),
            self.r2.to_string(),
            self.r.to_string(),
            self.sum_se.to_string(),
            self.seed.to_string(),
            self.trials.to_string(),
        ]
    }
}

/// Rows of one report: each pair, then the `sum` row.
pub fn report_rows(report: &SeReport, antennas: usize, evaluator: Evaluator, seed: u64, trials: usize) -> Vec<Row> {
    let sum = report.sum();
    let row = |pair, r1, r2, r| Row {
        antennas,
        pairs: report.pairs.len(),
        evaluator,
        pair,
        r1,
        r2,
        r,
        sum_se: sum,
        seed,
        trials,
    };
    let mut rows: Vec<Row> = report
        .pairs
        .iter()
        .enumerate()
        .map(|(i, p)| row(PairLabel::Pair(i), p.r1, p.r2, p.r))
        .collect();
    rows.push(row(PairLabel::Sum, report.sum_r1(), report.sum_r2(), sum));
    rows
}

/// Writes `rows` under [`CSV_HEADER`], creating parent directories.
pub fn emit_csv(rows: &[Row], path: &Path) -> Result<(), ExperimentError> {
    let io = |source: csv::Error| ExperimentError::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| io(e.into()))?;
    }
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(CSV_HEADER).map_err(io)?;
    for row in rows {
        w.write_record(row.record()).map_err(io)?;
    }
    w.flush().map_err(|e| io(e.into()))
}

/// One evaluator at one system size. `None` when the evaluator has no value
/// there (a limit outside the finite-limit regimes).
pub fn evaluate(
    cfg: &ExperimentConfig,
    antennas: usize,
    pairs: usize,
    law: &ScalingLaw,
    evaluator: Evaluator,
    threads: usize,
) -> Result<Option<Vec<Row>>, ExperimentError> {
    let v = cfg.materialize_with(antennas, pairs, law)?;
    let seed = v.config().seed;
    let rows = match evaluator {
        Evaluator::Exact => {
            let out = simulate(&v, &ExactOptions::threads(threads));
            report_rows(&out.report, antennas, evaluator, seed, v.config().trials)
        }
        Evaluator::Approx => report_rows(&approx_report(v.config(), &v.stats()), antennas, evaluator, seed, 0),
        Evaluator::Limit => match limit_se(v.config(), v.params(), law, law.regime()) {
            Ok(report) => report_rows(&report, antennas, evaluator, seed, 0),
            Err(_) => return Ok(None),
        },
    };
    Ok(Some(rows))
}

/// One output file: an antenna sweep at fixed settings.
#[derive(Debug, Clone)]
pub struct Series {
    pub name: String,
    pub config: ExperimentConfig,
    pub pairs: usize,
    pub law: ScalingLaw,
    pub grid: Vec<usize>,
    pub evaluators: Vec<Evaluator>,
}

impl Series {
    pub fn rows(&self, threads: usize) -> Result<Vec<Row>, ExperimentError> {
        check_grid(&self.grid)?;
        let mut rows = Vec::new();
        for &m in &self.grid {
            for &e in &self.evaluators {
                if let Some(r) = evaluate(&self.config, m, self.pairs, &self.law, e, threads)? {
                    rows.extend(r);
                }
            }
        }
        Ok(rows)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Report,
    Sweep,
    Fig1,
    Fig2,
    Fig3,
    Fig4,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Report => "report",
            Command::Sweep => "sweep",
            Command::Fig1 => "fig1",
            Command::Fig2 => "fig2",
            Command::Fig3 => "fig3",
            Command::Fig4 => "fig4",
        }
    }
}

/// Command-line overrides shared by every command.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub threads: usize,
    pub variable: Option<SweepVar>,
    pub grid: Option<Vec<f64>>,
    pub evaluators: Option<Vec<Evaluator>>,
}

#[derive(Debug, Clone)]
pub struct Artifact {
    pub path: PathBuf,
    pub rows: Vec<Row>,
}

fn antenna_grid(opts: &RunOptions, default: &[usize]) -> Result<Vec<usize>, ExperimentError> {
    match &opts.grid {
        None => Ok(default.to_vec()),
        Some(g) => {
            let spec = SweepSpec::new(SweepVar::M, g.clone(), vec![Evaluator::Approx])?;
            Ok(spec.grid.iter().map(|&x| x as usize).collect())
        }
    }
}

fn label(x: f64) -> String {
    x.to_string()
}

/// The series each command writes, before any evaluation.
pub fn plan(command: Command, base: &ExperimentConfig, opts: &RunOptions) -> Result<Vec<Series>, ExperimentError> {
    let mut cfg = base.clone();
    if let Some(seed) = opts.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = opts.trials {
        cfg.trials = trials;
    }
    let evals = |default: &[Evaluator]| -> Result<Vec<Evaluator>, ExperimentError> {
        let list = opts.evaluators.clone().unwrap_or_else(|| default.to_vec());
        Ok(SweepSpec::new(SweepVar::M, vec![1.0], list)?.evaluators)
    };
    let series = |name: String, cfg: &ExperimentConfig, pairs, law, grid, evaluators| Series {
        name,
        config: cfg.clone(),
        pairs,
        law,
        grid,
        evaluators,
    };
    // Scaled figures use γ = 1 when the file leaves it at zero.
    let gamma = if cfg.law.gamma > 0.0 { cfg.law.gamma } else { 1.0 };
    let scaled = |alpha, epsilon| ScalingLaw {
        alpha,
        epsilon,
        gamma,
        ..cfg.law
    };

    let plan = match command {
        Command::Report => {
            let grid = antenna_grid(opts, &[cfg.antennas])?;
            let mut default = vec![Evaluator::Exact, Evaluator::Approx];
            if cfg.law.regime().is_finite() {
                default.push(Evaluator::Limit);
            }
            vec![series("report".into(), &cfg, cfg.pairs, cfg.law, grid, evals(&default)?)]
        }
        Command::Sweep => {
            let variable = opts.variable.unwrap_or(SweepVar::M);
            let grid = match (&opts.grid, variable) {
                (Some(g), _) => g.clone(),
                (None, SweepVar::M) => DESK_GRID.iter().map(|&m| m as f64).collect(),
                (None, v) => return Err(ExperimentError::Parse(format!("sweep over {v} needs --grid"))),
            };
            let spec = SweepSpec::new(variable, grid, evals(&[Evaluator::Exact, Evaluator::Approx])?)?;
            let ev = spec.evaluators.clone();
            match variable {
                SweepVar::M => {
                    let grid = spec.grid.iter().map(|&x| x as usize).collect();
                    vec![series("sweep".into(), &cfg, cfg.pairs, cfg.law, grid, ev)]
                }
                SweepVar::N => {
                    // One file, N is a column; each series contributes one N.
                    spec.grid
                        .iter()
                        .map(|&n| series("sweep".into(), &cfg, n as usize, cfg.law, vec![cfg.antennas], ev.clone()))
                        .collect()
                }
                _ => spec
                    .grid
                    .iter()
                    .map(|&x| {
                        let mut c = cfg.clone();
                        let mut law = cfg.law;
                        match variable {
                            SweepVar::KDb => {
                                c.k_ar_db = PerUser::scalar(x);
                                c.k_br_db = PerUser::scalar(x);
                            }
                            SweepVar::Alpha => law.alpha = x,
                            SweepVar::Epsilon => law.epsilon = x,
                            SweepVar::Gamma => law.gamma = x,
                            SweepVar::M | SweepVar::N => unreachable!(),
                        }
                        let name = format!("sweep_{}_{}", variable, label(x));
                        series(name, &c, cfg.pairs, law, vec![cfg.antennas], ev.clone())
                    })
                    .collect(),
            }
        }
        Command::Fig1 => {
            let grid = antenna_grid(opts, &DESK_GRID)?;
            let ev = evals(&[Evaluator::Exact, Evaluator::Approx])?;
            let law = ScalingLaw {
                alpha: 0.0,
                epsilon: 0.0,
                ..cfg.law
            };
            [2, 5]
                .into_iter()
                .map(|n| series(format!("fig1_N{n}"), &cfg, n, law, grid.clone(), ev.clone()))
                .collect()
        }
        Command::Fig2 => {
            let grid = antenna_grid(opts, &SCALING_GRID)?;
            let ev = evals(&[Evaluator::Approx, Evaluator::Limit])?;
            [("case1", 1.0, 1.0), ("case2", 1.0, 0.2), ("case3", 0.5, 1.0)]
                .into_iter()
                .map(|(name, a, e)| series(format!("fig2_{name}"), &cfg, cfg.pairs, scaled(a, e), grid.clone(), ev.clone()))
                .collect()
        }
        Command::Fig3 => {
            let grid = antenna_grid(opts, &SCALING_GRID)?;
            let ev = evals(&[Evaluator::Approx])?;
            [(1.2, 1.0), (1.0, 1.2), (1.2, 1.2)]
                .into_iter()
                .map(|(a, e)| {
                    let name = format!("fig3_alpha{}_eps{}", label(a), label(e));
                    series(name, &cfg, cfg.pairs, scaled(a, e), grid.clone(), ev.clone())
                })
                .collect()
        }
        Command::Fig4 => {
            let grid = antenna_grid(opts, &DESK_GRID)?;
            let ev = evals(&[Evaluator::Exact, Evaluator::Approx])?;
            [3.0, 5.0, 10.0]
                .into_iter()
                .map(|k| {
                    let mut c = cfg.clone();
                    c.k_ar_db = PerUser::scalar(k);
                    c.k_br_db = PerUser::scalar(k);
                    let law = ScalingLaw {
                        alpha: 1.0,
                        epsilon: 1.0,
                        gamma: 1.0,
                        ..cfg.law
                    };
                    series(format!("fig4_K{}dB", label(k)), &c, 5, law, grid.clone(), ev.clone())
                })
                .collect()
        }
    };
    Ok(plan)
}

/// Evaluates every series of `command`, grouping series that share a name
/// into one file, and writes the files to `out_dir`.
pub fn run(
    command: Command,
    cfg: &ExperimentConfig,
    opts: &RunOptions,
    out_dir: &Path,
) -> Result<Vec<Artifact>, ExperimentError> {
    let mut artifacts: Vec<Artifact> = Vec::new();
    for s in plan(command, cfg, opts)? {
        let rows = s.rows(opts.threads)?;
        let path = out_dir.join(format!("{}.csv", s.name));
        match artifacts.iter_mut().find(|a| a.path == path) {
            Some(a) => a.rows.extend(rows),
            None => artifacts.push(Artifact { path, rows }),
        }
    }
    for a in &artifacts {
        emit_csv(&a.rows, &a.path)?;
    }
    Ok(artifacts)
}

/// One line per artifact and evaluator: the sum SE at the largest `M`.
pub fn summary(artifacts: &[Artifact]) -> String {
    let mut out = String::new();
    for a in artifacts {
        out.push_str(&format!("{} ({} rows)\n", a.path.display(), a.rows.len()));
        let sums: Vec<&Row> = a.rows.iter().filter(|r| r.pair == PairLabel::Sum).collect();
        for e in Evaluator::ALL {
            let last = sums.iter().filter(|r| r.evaluator == e).max_by_key(|r| (r.antennas, r.pairs));
            if let Some(r) = last {
                out.push_str(&format!("  {:<6} M={:<5} N={}  sum SE = {:.4} bits/s/Hz\n", e, r.antennas, r.pairs, r.sum_se));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference() -> ExperimentConfig {
        ExperimentConfig::parse("trials = 40\ntheta_ar = grid\ntheta_br = grid").unwrap()
    }

    #[test]
    fn spec_validation() {
        assert!(SweepSpec::new(SweepVar::M, vec![], vec![Evaluator::Approx]).is_err());
        assert!(SweepSpec::new(SweepVar::M, vec![64.0, 32.0], vec![Evaluator::Approx]).is_err());
        assert!(SweepSpec::new(SweepVar::M, vec![32.0, 32.0], vec![Evaluator::Approx]).is_err());
        assert!(SweepSpec::new(SweepVar::M, vec![32.5], vec![Evaluator::Approx]).is_err());
        assert!(SweepSpec::new(SweepVar::KDb, vec![3.0], vec![]).is_err());
        assert!(SweepSpec::new(SweepVar::Gamma, vec![-1.0, 1.0], vec![Evaluator::Approx]).is_err());
        let s = SweepSpec::new(SweepVar::KDb, vec![-3.0, 2.5], vec![Evaluator::Limit, Evaluator::Approx]).unwrap();
        assert_eq!(s.evaluators(), &[Evaluator::Approx, Evaluator::Limit]);
    }

    #[test]
    fn parse_helpers() {
        assert_eq!(parse_grid("32, 64,128").unwrap(), vec![32.0, 64.0, 128.0]);
        assert!(parse_grid("").unwrap().is_empty());
        assert!(parse_grid("1,x").is_err());
        assert_eq!(parse_evaluators("exact,LIMIT").unwrap(), vec![Evaluator::Exact, Evaluator::Limit]);
        assert!(parse_evaluators("fast").is_err());
        assert_eq!("k_db".parse::<SweepVar>().unwrap(), SweepVar::KDb);
    }

    #[test]
    fn fig1_row_count() {
        let opts = RunOptions {
            grid: Some(vec![16.0, 32.0, 64.0, 128.0, 256.0, 512.0]),
            trials: Some(4),
            ..Default::default()
        };
        let plan = plan(Command::Fig1, &reference(), &opts).unwrap();
        let n2 = plan.iter().find(|s| s.name == "fig1_N2").unwrap();
        let rows = n2.rows(0).unwrap();
        assert_eq!(rows.len(), 6 * 2 * 3);
        // grid-major, evaluator-minor, pair ascending
        assert_eq!(rows[0].evaluator, Evaluator::Exact);
        assert_eq!(rows[2].pair, PairLabel::Sum);
        assert_eq!(rows[3].evaluator, Evaluator::Approx);
        assert_eq!(rows[6].antennas, 32);
    }

    #[test]
    fn limit_rows_only_when_finite() {
        let cfg = reference();
        let law = ScalingLaw::new(1.2, 1.0, 1.0);
        assert!(evaluate(&cfg, 64, 2, &law, Evaluator::Limit, 1).unwrap().is_none());
        let law = ScalingLaw::new(1.0, 1.0, 1.0);
        let rows = evaluate(&cfg, 64, 2, &law, Evaluator::Limit, 1).unwrap().unwrap();
        assert_eq!(rows.len(), 3);
        assert!(rows.iter().all(|r| r.sum_se == rows[2].r));
    }

    #[test]
    fn sweep_needs_grid_for_non_antenna_variables() {
        let opts = RunOptions {
            variable: Some(SweepVar::KDb),
            ..Default::default()
        };
        assert!(plan(Command::Sweep, &reference(), &opts).is_err());
        let opts = RunOptions {
            variable: Some(SweepVar::KDb),
            grid: Some(vec![3.0, 10.0]),
            evaluators: Some(vec![Evaluator::Approx]),
            ..Default::default()
        };
        let names: Vec<String> = plan(Command::Sweep, &reference(), &opts).unwrap().into_iter().map(|s| s.name).collect();
        assert_eq!(names, ["sweep_K_dB_3", "sweep_K_dB_10"]);
    }

    #[test]
    fn empty_and_repeatable_csv() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("empty.csv");
        emit_csv(&[], &p).unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), format!("{}\n", CSV_HEADER.join(",")));

        let opts = RunOptions {
            grid: Some(vec![64.0, 128.0]),
            ..Default::default()
        };
        let a = run(Command::Fig2, &reference(), &opts, &dir.path().join("a")).unwrap();
        let b = run(Command::Fig2, &reference(), &opts, &dir.path().join("b")).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(fs::read(&x.path).unwrap(), fs::read(&y.path).unwrap());
        }
        assert!(summary(&a).contains("limit"));
    }
}
