//! User-runnable self-check: moment oracles, structural identities and
//! cross-evaluator agreement at a small fixed scale.

use std::fmt;

use crate::asymptotics::{classify, convergence_trace, limit_se, Regime, ScalingLaw};
use crate::closed_form::approx_report;
use crate::config::{db_to_linear, derive_stats, validate, ChannelStats, LinkParams, Side, SystemConfig};
use crate::exact::{rho_closed, simulate, Estimate, ExactOptions, UlTerm};
use crate::moments;

/// Relative tolerance of the moment oracles, on top of 3 standard errors.
pub const MOMENT_TOL: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CheckOptions {
    pub antennas: usize,
    pub trials: usize,
    pub seed: u64,
    pub threads: usize,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            antennas: 64,
            trials: 2000,
            seed: 0,
            threads: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CheckReport {
    pub results: Vec<CheckResult>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.results.iter().filter(|r| !r.passed)
    }

    pub fn get(&self, name: &str) -> Option<&CheckResult> {
        self.results.iter().find(|r| r.name == name)
    }

    fn push(&mut self, name: &str, passed: bool, detail: String) {
        self.results.push(CheckResult {
            name: name.to_string(),
            passed,
            detail,
        });
    }

    /// Monte-Carlo estimate against an oracle value.
    fn moment(&mut self, name: &str, mc: Estimate, want: f64) {
        let gap = (mc.mean - want).abs();
        let passed = gap <= MOMENT_TOL * want.abs() + 3.0 * mc.std_err;
        let rel = if want != 0.0 { gap / want.abs() } else { gap };
        self.push(name, passed, format!("mc {:.6e} ± {:.1e}, oracle {:.6e}, rel {:.2e}", mc.mean, mc.std_err, want, rel));
    }

    /// Several estimates under one name; the detail shows the worst one.
    fn all_moments(&mut self, name: &str, items: impl IntoIterator<Item = (Estimate, f64)>) {
        let score = |(mc, want): &(Estimate, f64)| {
            (mc.mean - want).abs() / (MOMENT_TOL * want.abs() + 3.0 * mc.std_err).max(f64::MIN_POSITIVE)
        };
        let items: Vec<(Estimate, f64)> = items.into_iter().collect();
        match items.iter().max_by(|a, b| score(a).total_cmp(&score(b))) {
            Some(&(mc, want)) => self.moment(name, mc, want),
            None => self.push(name, true, "no terms".into()),
        }
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.results {
            writeln!(f, "[{}] {:<28} {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail)?;
        }
        let failed = self.failures().count();
        write!(f, "{} checks, {} failed", self.results.len(), failed)
    }
}

pub fn self_check(opts: &CheckOptions) -> CheckReport {
    self_check_with(opts, |_| {})
}

/// Runs the suite with `corrupt` applied to the statistics the oracles use;
/// channels are always drawn from the true statistics.
pub fn self_check_with(opts: &CheckOptions, corrupt: impl FnOnce(&mut ChannelStats)) -> CheckReport {
    let mut report = CheckReport::default();
    let n = 2;
    let config = SystemConfig::new(opts.antennas, n).with_trials(opts.trials).with_seed(opts.seed);
    let params = LinkParams::symmetric(n, 1.0, db_to_linear(5.0));
    let v = match validate(config, params.clone()) {
        Ok(v) => v,
        Err(e) => {
            report.push("configuration", false, e.to_string());
            return report;
        }
    };
    let cfg = v.config().clone();
    let m = cfg.antennas;
    let mut stats = derive_stats(&cfg, &params);
    corrupt(&mut stats);

    let worst_identity = stats
        .ar
        .iter()
        .chain(&stats.br)
        .map(|l| ((l.omega + l.sigma2) / l.beta - 1.0).abs())
        .fold(0.0, f64::max);
    report.push("omega + sigma2 = beta", worst_identity < 1e-12, format!("max rel {worst_identity:.1e}"));

    let out = simulate(&v, &ExactOptions::threads(opts.threads));
    let mm = &out.moments;
    let pairs = 0..n;
    report.all_moments(
        "E{A_i}",
        pairs.clone().map(|i| (mm.ul_term(i, UlTerm::A), moments::signal_term(&cfg, &stats, i, Side::A))),
    );
    report.all_moments(
        "E{B_i}",
        pairs.clone().map(|i| (mm.ul_term(i, UlTerm::B), moments::signal_term(&cfg, &stats, i, Side::B))),
    );
    report.all_moments("E{C_i}", pairs.clone().map(|i| (mm.ul_term(i, UlTerm::C), moments::leakage_term(&cfg, &stats, i))));
    report.all_moments(
        "E{D_i}",
        pairs.clone().map(|i| (mm.ul_term(i, UlTerm::D), moments::interference_term(&cfg, &stats, i))),
    );
    report.all_moments("E{E_i}", pairs.clone().map(|i| (mm.ul_term(i, UlTerm::E), moments::noise_term(&cfg, &stats, i))));

    let mut mean_pairs = Vec::new();
    let mut var_pairs = Vec::new();
    let mut cross_pairs = Vec::new();
    for i in pairs.clone() {
        for side in Side::BOTH {
            let me = (side, i);
            let link = stats.link(side, i);
            let mean = Estimate {
                mean: mm.mean_product(me, me).re,
                std_err: (mm.var_product(me, me) / mm.trials() as f64).sqrt(),
            };
            mean_pairs.push((mean, moments::own_product_mean(m, link)));
            // Sample variance of a circular Gaussian: relative SE 1/√trials.
            let var = mm.var_product(me, me);
            var_pairs.push((
                Estimate {
                    mean: var,
                    std_err: var / (mm.trials() as f64).sqrt(),
                },
                moments::own_product_var(m, link),
            ));
            let partner = (side.other(), i);
            cross_pairs.push((
                Estimate {
                    mean: mm.var_product(me, partner),
                    std_err: mm.mean_sq_product(me, partner).std_err,
                },
                moments::cross_second_moment(m, stats.link(side.other(), i), link),
            ));
            for j in pairs.clone().filter(|&j| j != i) {
                for col in Side::BOTH {
                    cross_pairs.push((
                        mm.mean_sq_product(me, (col, j)),
                        moments::cross_second_moment(m, stats.link(col, j), link),
                    ));
                }
            }
        }
    }
    report.all_moments("E{h^T hhat*} = M omega", mean_pairs);
    report.all_moments("Var{h^T hhat*} own", var_pairs);
    report.all_moments("cross products", cross_pairs);

    let rho = rho_closed(&cfg, &stats);
    let ratio = mm.precoder_power().scaled(rho * rho / cfg.relay_power);
    report.push(
        "power normalization",
        (ratio.mean - 1.0).abs() <= 0.03,
        format!("E{{|F_d|^2}} rho^2 / p_r = {:.5} ± {:.1e}", ratio.mean, ratio.std_err),
    );

    let approx = approx_report(&cfg, &stats);
    report.push(
        "report identities",
        out.report.is_consistent() && approx.is_consistent(),
        "min/sum structure of exact and approx reports".into(),
    );

    let exact_sum = out.report.sum();
    let sum_gap = (exact_sum - approx.sum()).abs() / exact_sum;
    let pair_gap = out
        .report
        .pairs
        .iter()
        .zip(&approx.pairs)
        .flat_map(|(e, a)| [(e.r1, a.r1), (e.r2, a.r2), (e.r, a.r)])
        .map(|(e, a)| (e - a).abs() / e)
        .fold(0.0, f64::max);
    report.push(
        "exact vs approx",
        sum_gap <= 0.05 && pair_gap <= 0.07,
        format!("sum exact {exact_sum:.4}, approx {:.4}, rel {sum_gap:.2e}; worst pair rel {pair_gap:.2e}", approx.sum()),
    );

    let idle = SystemConfig::new(16, n).with_coherence_len(4).with_trials(16).with_seed(opts.seed);
    match validate(idle, params.clone()) {
        Ok(iv) => {
            let exact = simulate(&iv, &ExactOptions::default()).report;
            let approx = approx_report(iv.config(), &iv.stats());
            let law = ScalingLaw::new(1.0, 1.0, 1.0);
            let limit = limit_se(iv.config(), iv.params(), &law, Regime::CaseI).map(|r| r.sum()).unwrap_or(f64::NAN);
            let zero = exact.sum() == 0.0 && approx.sum() == 0.0 && limit == 0.0;
            report.push("zero pre-log", zero, format!("exact {}, approx {}, limit {limit}", exact.sum(), approx.sum()));
        }
        Err(e) => report.push("zero pre-log", false, e.to_string()),
    }

    let regimes_ok = classify(1.0, 1.0) == Regime::CaseI
        && classify(1.0, 0.2) == Regime::CaseII
        && classify(0.5, 1.0) == Regime::CaseIII
        && classify(1.5, 0.5) == Regime::ZeroLimit
        && classify(0.5, 0.5) == Regime::Unbounded;
    report.push("regime table", regimes_ok, "classification of the scaling exponents".into());

    let law = ScalingLaw::new(1.0, 1.0, 1.0);
    match convergence_trace(&cfg, &params, &law, &[256, 4096]) {
        Ok(trace) => {
            let last = trace[trace.len() - 1];
            let limit = last.limit_sum.unwrap_or(f64::NAN);
            let rel = (last.approx_sum - limit).abs() / limit;
            report.push("scaling limit", rel < 0.03, format!("M=4096 approx {:.4}, limit {limit:.4}, rel {rel:.2e}", last.approx_sum));
        }
        Err(e) => report.push("scaling limit", false, e.to_string()),
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> CheckOptions {
        CheckOptions {
            trials: 400,
            threads: 0,
            ..Default::default()
        }
    }

    #[test]
    fn default_suite_passes() {
        let report = self_check(&quick());
        assert!(report.passed(), "{report}");
        assert!(report.get("E{E_i}").is_some());
    }

    #[test]
    fn corrupted_omega_is_caught() {
        let report = self_check_with(&quick(), |s| {
            for l in s.ar.iter_mut().chain(s.br.iter_mut()) {
                l.omega *= 1.2;
            }
        });
        assert!(!report.get("E{E_i}").unwrap().passed, "{report}");
        assert!(!report.passed());
    }
}
