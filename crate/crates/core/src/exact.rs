//! Monte-Carlo evaluation of the exact (pre-approximation) spectral
//! efficiencies.
//!
//! The UL rates average the instantaneous `log2(1 + SINR)` over realizations.
//! The DL rates use the statistical SINR: ensemble means and variances of the
//! products `h_X,i^T ĥ*_Y,j` are estimated over the same realizations and
//! plugged into the SINR expression, with the relay gain normalized by the
//! Monte-Carlo estimate of `E{‖F_d‖²}`.
//!
//! Trials are grouped into fixed chunks of [`CHUNK_TRIALS`]; each chunk is
//! accumulated sequentially and the chunk accumulators are merged in trial
//! order. Serial and parallel runs therefore produce bit-identical results.

use ndarray::{concatenate, Array2, Axis};
use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::channel::{trial_stream, CMatrix, ChannelGenerator, ChannelRealization};
use crate::config::{ChannelStats, Side, SystemConfig, Validated};
use crate::report::{PairSe, SeReport};

/// Trials per reduction chunk.
pub const CHUNK_TRIALS: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("realization is {found_antennas}x{found_pairs}, configuration expects {antennas}x{pairs}")]
    DimensionMismatch {
        antennas: usize,
        pairs: usize,
        found_antennas: usize,
        found_pairs: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExactOptions {
    /// Worker threads; `1` runs on the calling thread, `0` uses every core.
    pub threads: usize,
}

impl Default for ExactOptions {
    fn default() -> Self {
        ExactOptions { threads: 1 }
    }
}

impl ExactOptions {
    pub fn threads(threads: usize) -> Self {
        ExactOptions { threads }
    }
}

/// Runs `per_trial` for every trial index and merges the results.
///
/// The reduction order is fixed by trial index regardless of `threads`.
pub fn reduce_trials<A, I, F, M>(trials: usize, threads: usize, init: I, per_trial: F, merge: M) -> A
where
    A: Send,
    I: Fn() -> A + Sync,
    F: Fn(&mut A, usize) + Sync,
    M: Fn(&mut A, A) + Sync,
{
    let chunks = trials.div_ceil(CHUNK_TRIALS);
    let run_chunk = |c: usize| {
        let mut acc = init();
        for t in c * CHUNK_TRIALS..((c + 1) * CHUNK_TRIALS).min(trials) {
            per_trial(&mut acc, t);
        }
        acc
    };
    let parts: Vec<A> = if threads == 1 {
        (0..chunks).map(run_chunk).collect()
    } else {
        let collect = || (0..chunks).into_par_iter().map(run_chunk).collect();
        if threads == 0 {
            collect()
        } else {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .expect("thread pool")
                .install(collect)
        }
    };
    let mut total = init();
    for part in parts {
        merge(&mut total, part);
    }
    total
}

/// Column index of user `(side, i)` in the stacked `[·_AR, ·_BR]` matrices.
pub fn user_index(side: Side, pair: usize, pairs: usize) -> usize {
    match side {
        Side::A => pair,
        Side::B => pairs + pair,
    }
}

/// The five UL quadratic forms of one pair for one realization.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct UlTerms {
    /// Desired signal of `U_A,i`.
    pub a: f64,
    /// Desired signal of `U_B,i`.
    pub b: f64,
    /// Estimation-error leakage.
    pub c: f64,
    /// Inter-pair interference.
    pub d: f64,
    /// Combined noise.
    pub e: f64,
}

impl UlTerms {
    pub fn signal(&self, side: Side) -> f64 {
        match side {
            Side::A => self.a,
            Side::B => self.b,
        }
    }

    pub fn impairment(&self) -> f64 {
        self.c + self.d + self.e
    }

    fn as_array(&self) -> [f64; 5] {
        [self.a, self.b, self.c, self.d, self.e]
    }
}

/// Selector for one of the [`UlTerms`] fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UlTerm {
    A,
    B,
    C,
    D,
    E,
}

/// `log2(1 + num/den)` with the degenerate cases pinned.
fn log_rate(num: f64, den: f64) -> f64 {
    if num <= 0.0 {
        0.0
    } else if den <= 0.0 {
        f64::INFINITY
    } else {
        (num / den).ln_1p() / std::f64::consts::LN_2
    }
}

/// `left^H right`.
fn gram(left: &CMatrix, right: &CMatrix) -> Array2<Complex64> {
    left.t().mapv(|z| z.conj()).dot(right)
}

/// Inner products of one realization over the stacked user index.
struct Products {
    /// `Ĥ^H Ĥ`.
    est: Array2<Complex64>,
    /// `Ĥ^H E`.
    err: Array2<Complex64>,
    /// `Ĥ^H H`; entry `(v, u)` equals `h_u^T ĥ_v^*`.
    full: Array2<Complex64>,
}

impl Products {
    fn new(real: &ChannelRealization) -> Self {
        let hhat = concatenate![Axis(1), real.hhat_ar, real.hhat_br];
        let err = concatenate![Axis(1), real.e_ar, real.e_br];
        let est = gram(&hhat, &hhat);
        let err = gram(&hhat, &err);
        let full = &est + &err;
        Products { est, err, full }
    }

    fn ul_terms(&self, config: &SystemConfig) -> Vec<UlTerms> {
        let n = config.pairs;
        let (s, ce, g) = (&self.est, &self.err, &self.full);
        (0..n)
            .map(|i| {
                let (a, b) = (i, n + i);
                let (pa, pb) = (config.power_a[i], config.power_b[i]);
                let mut d = 0.0;
                for j in (0..n).filter(|&j| j != i) {
                    let (ja, jb) = (j, n + j);
                    d += config.power_a[j] * (g[[a, ja]].norm_sqr() + g[[b, ja]].norm_sqr());
                    d += config.power_b[j] * (g[[a, jb]].norm_sqr() + g[[b, jb]].norm_sqr());
                }
                UlTerms {
                    a: pa * (s[[a, a]].norm_sqr() + s[[b, a]].norm_sqr()),
                    b: pb * (s[[a, b]].norm_sqr() + s[[b, b]].norm_sqr()),
                    c: pa * (ce[[a, a]].norm_sqr() + ce[[b, a]].norm_sqr())
                        + pb * (ce[[a, b]].norm_sqr() + ce[[b, b]].norm_sqr()),
                    d,
                    e: s[[a, a]].re + s[[b, b]].re,
                }
            })
            .collect()
    }

    /// `‖F_d‖²_F`, the total estimate power.
    fn precoder_power(&self) -> f64 {
        self.est.diag().iter().map(|z| z.re).sum()
    }
}

/// UL quadratic forms of every pair for one realization.
pub fn ul_terms(real: &ChannelRealization, config: &SystemConfig) -> Result<Vec<UlTerms>, EngineError> {
    let mismatch = |m: &CMatrix| m.nrows() != config.antennas || m.ncols() != config.pairs;
    let mats = [&real.h_ar, &real.h_br, &real.hhat_ar, &real.hhat_br, &real.e_ar, &real.e_br];
    if let Some(bad) = mats.into_iter().find(|m| mismatch(m)) {
        return Err(EngineError::DimensionMismatch {
            antennas: config.antennas,
            pairs: config.pairs,
            found_antennas: bad.nrows(),
            found_pairs: bad.ncols(),
        });
    }
    Ok(Products::new(real).ul_terms(config))
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Estimate {
    pub mean: f64,
    pub std_err: f64,
}

impl Estimate {
    fn from_sums(sum: f64, sum_sq: f64, count: usize) -> Self {
        let n = count as f64;
        let mean = sum / n;
        let var = if count > 1 {
            ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0)
        } else {
            0.0
        };
        Estimate {
            mean,
            std_err: (var / n).sqrt(),
        }
    }

    pub fn scaled(self, factor: f64) -> Self {
        Estimate {
            mean: self.mean * factor,
            std_err: self.std_err * factor.abs(),
        }
    }

    /// `mean ± k·std_err`.
    pub fn interval(&self, k: f64) -> (f64, f64) {
        (self.mean - k * self.std_err, self.mean + k * self.std_err)
    }

    pub fn overlaps(&self, other: &Estimate, k: f64) -> bool {
        let (lo, hi) = self.interval(k);
        let (olo, ohi) = other.interval(k);
        lo <= ohi && olo <= hi
    }
}

#[derive(Debug, Clone)]
struct Accumulator {
    trials: usize,
    rate_sum: Vec<[f64; 3]>,
    rate_sq: Vec<[f64; 3]>,
    ul_total_sum: f64,
    ul_total_sq: f64,
    terms_sum: Vec<[f64; 5]>,
    terms_sq: Vec<[f64; 5]>,
    prod_sum: Array2<Complex64>,
    prod_abs2: Array2<f64>,
    prod_abs4: Array2<f64>,
    frob_sum: f64,
    frob_sq: f64,
}

impl Accumulator {
    fn new(pairs: usize) -> Self {
        let users = 2 * pairs;
        Accumulator {
            trials: 0,
            rate_sum: vec![[0.0; 3]; pairs],
            rate_sq: vec![[0.0; 3]; pairs],
            ul_total_sum: 0.0,
            ul_total_sq: 0.0,
            terms_sum: vec![[0.0; 5]; pairs],
            terms_sq: vec![[0.0; 5]; pairs],
            prod_sum: Array2::zeros((users, users)),
            prod_abs2: Array2::zeros((users, users)),
            prod_abs4: Array2::zeros((users, users)),
            frob_sum: 0.0,
            frob_sq: 0.0,
        }
    }

    fn add(&mut self, real: &ChannelRealization, config: &SystemConfig) {
        let products = Products::new(real);
        let terms = products.ul_terms(config);
        let mut ul_total = 0.0;
        for (i, t) in terms.iter().enumerate() {
            let noise = t.impairment();
            let rates = [log_rate(t.a + t.b, noise), log_rate(t.a, noise), log_rate(t.b, noise)];
            ul_total += rates[0];
            for (k, r) in rates.into_iter().enumerate() {
                self.rate_sum[i][k] += r;
                self.rate_sq[i][k] += r * r;
            }
            for (k, v) in t.as_array().into_iter().enumerate() {
                self.terms_sum[i][k] += v;
                self.terms_sq[i][k] += v * v;
            }
        }
        self.ul_total_sum += ul_total;
        self.ul_total_sq += ul_total * ul_total;
        self.prod_sum += &products.full;
        for (dst, z) in self.prod_abs2.iter_mut().zip(products.full.iter()) {
            *dst += z.norm_sqr();
        }
        for (dst, z) in self.prod_abs4.iter_mut().zip(products.full.iter()) {
            *dst += z.norm_sqr().powi(2);
        }
        let frob = products.precoder_power();
        self.frob_sum += frob;
        self.frob_sq += frob * frob;
        self.trials += 1;
    }

    fn merge(&mut self, other: Accumulator) {
        self.trials += other.trials;
        for (dst, src) in self.rate_sum.iter_mut().zip(&other.rate_sum) {
            dst.iter_mut().zip(src).for_each(|(d, s)| *d += s);
        }
        for (dst, src) in self.rate_sq.iter_mut().zip(&other.rate_sq) {
            dst.iter_mut().zip(src).for_each(|(d, s)| *d += s);
        }
        for (dst, src) in self.terms_sum.iter_mut().zip(&other.terms_sum) {
            dst.iter_mut().zip(src).for_each(|(d, s)| *d += s);
        }
        for (dst, src) in self.terms_sq.iter_mut().zip(&other.terms_sq) {
            dst.iter_mut().zip(src).for_each(|(d, s)| *d += s);
        }
        self.ul_total_sum += other.ul_total_sum;
        self.ul_total_sq += other.ul_total_sq;
        self.prod_sum += &other.prod_sum;
        self.prod_abs2 += &other.prod_abs2;
        self.prod_abs4 += &other.prod_abs4;
        self.frob_sum += other.frob_sum;
        self.frob_sq += other.frob_sq;
    }

    fn finish(self) -> EnsembleMoments {
        let t = self.trials;
        let tf = t as f64;
        let ul_log = self
            .rate_sum
            .iter()
            .zip(&self.rate_sq)
            .map(|(s, q)| std::array::from_fn(|k| Estimate::from_sums(s[k], q[k], t)))
            .collect();
        let terms = self
            .terms_sum
            .iter()
            .zip(&self.terms_sq)
            .map(|(s, q)| std::array::from_fn(|k| Estimate::from_sums(s[k], q[k], t)))
            .collect();
        EnsembleMoments {
            pairs: self.rate_sum.len(),
            trials: t,
            ul_log,
            ul_total_log: Estimate::from_sums(self.ul_total_sum, self.ul_total_sq, t),
            terms,
            prod_mean: self.prod_sum.mapv(|z| z / tf),
            prod_sq: self
                .prod_abs2
                .iter()
                .zip(self.prod_abs4.iter())
                .map(|(&s, &q)| Estimate::from_sums(s, q, t))
                .collect::<Vec<_>>(),
            frobenius: Estimate::from_sums(self.frob_sum, self.frob_sq, t),
        }
    }
}

/// Ensemble statistics gathered over all trials.
#[derive(Debug, Clone)]
pub struct EnsembleMoments {
    pairs: usize,
    trials: usize,
    ul_log: Vec<[Estimate; 3]>,
    ul_total_log: Estimate,
    terms: Vec<[Estimate; 5]>,
    prod_mean: Array2<Complex64>,
    prod_sq: Vec<Estimate>,
    frobenius: Estimate,
}

impl EnsembleMoments {
    pub fn trials(&self) -> usize {
        self.trials
    }

    pub fn pairs(&self) -> usize {
        self.pairs
    }

    /// Mean of one UL quadratic form of pair `i`.
    pub fn ul_term(&self, pair: usize, term: UlTerm) -> Estimate {
        let k = match term {
            UlTerm::A => 0,
            UlTerm::B => 1,
            UlTerm::C => 2,
            UlTerm::D => 3,
            UlTerm::E => 4,
        };
        self.terms[pair][k]
    }

    /// `E{h_R^T ĥ*_C}` for receiving terminal `R = (side, i)` and estimate
    /// column `C = (side, j)`; equivalently `E{ĥ_C^H h_R}`.
    pub fn mean_product(&self, receiver: (Side, usize), column: (Side, usize)) -> Complex64 {
        let (u, v) = self.indices(receiver, column);
        self.prod_mean[[v, u]]
    }

    /// `E{|h_R^T ĥ*_C|²}`.
    pub fn mean_sq_product(&self, receiver: (Side, usize), column: (Side, usize)) -> Estimate {
        let (u, v) = self.indices(receiver, column);
        self.prod_sq[v * 2 * self.pairs + u]
    }

    /// `Var{h_R^T ĥ*_C}`.
    pub fn var_product(&self, receiver: (Side, usize), column: (Side, usize)) -> f64 {
        let m2 = self.mean_sq_product(receiver, column).mean;
        (m2 - self.mean_product(receiver, column).norm_sqr()).max(0.0)
    }

    /// `E{‖F_d‖²}`.
    pub fn precoder_power(&self) -> Estimate {
        self.frobenius
    }

    /// Per-pair UL `log2` rates `[R_1, R_AR, R_BR]` before the pre-log factor.
    pub fn ul_log_rates(&self, pair: usize) -> [Estimate; 3] {
        self.ul_log[pair]
    }

    /// Per-trial sum over pairs of the UL `log2` rate, before the pre-log factor.
    pub fn ul_total_log_rate(&self) -> Estimate {
        self.ul_total_log
    }

    /// Statistical DL SINR of terminal `U_side,pair` given `1/ρ²`.
    pub fn dl_sinr(&self, pair: usize, side: Side, inv_rho2: f64) -> f64 {
        let me = (side, pair);
        let signal = self.mean_product(me, me).norm_sqr();
        if signal == 0.0 || inv_rho2.is_infinite() {
            return 0.0;
        }
        let mut den = self.var_product(me, me) + self.var_product(me, (side.other(), pair)) + inv_rho2;
        for j in (0..self.pairs).filter(|&j| j != pair) {
            den += self.mean_sq_product(me, (Side::B, j)).mean + self.mean_sq_product(me, (Side::A, j)).mean;
        }
        signal / den
    }

    fn indices(&self, receiver: (Side, usize), column: (Side, usize)) -> (usize, usize) {
        (
            user_index(receiver.0, receiver.1, self.pairs),
            user_index(column.0, column.1, self.pairs),
        )
    }
}

/// How the DL power normalization `ρ` is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RhoMode {
    /// Monte-Carlo estimate of `E{‖F_d‖²}`.
    MonteCarlo,
    /// `√(p_r / (M Σ_j (ω_AR,j + ω_BR,j)))`.
    Closed,
}

/// `√(p_r / E{‖F_d‖²})` for a given estimate of the expectation.
pub fn rho_from_precoder_power(relay_power: f64, precoder_power: f64) -> f64 {
    if relay_power == 0.0 {
        0.0
    } else {
        (relay_power / precoder_power).sqrt()
    }
}

pub fn rho_closed(config: &SystemConfig, stats: &ChannelStats) -> f64 {
    let total: f64 = stats.ar.iter().zip(&stats.br).map(|(a, b)| a.omega + b.omega).sum();
    rho_from_precoder_power(config.relay_power, config.antennas as f64 * total)
}

/// Monte-Carlo estimate of `E{‖F_d‖²}` over `config.trials` realizations.
pub fn precoder_power_mc(v: &Validated, stats: &ChannelStats, opts: &ExactOptions) -> Estimate {
    let config = v.config();
    let gen = ChannelGenerator::new(config, v.params(), stats);
    let (sum, sq) = reduce_trials(
        config.trials,
        opts.threads,
        || (0.0, 0.0),
        |acc, t| {
            let real = gen.draw(&mut trial_stream(config.seed, t as u64));
            let p: f64 = real.hhat_ar.iter().chain(real.hhat_br.iter()).map(|z| z.norm_sqr()).sum();
            acc.0 += p;
            acc.1 += p * p;
        },
        |acc, part| {
            acc.0 += part.0;
            acc.1 += part.1;
        },
    );
    Estimate::from_sums(sum, sq, config.trials)
}

pub fn relay_gain_rho(v: &Validated, stats: &ChannelStats, mode: RhoMode, opts: &ExactOptions) -> f64 {
    match mode {
        RhoMode::Closed => rho_closed(v.config(), stats),
        RhoMode::MonteCarlo => {
            rho_from_precoder_power(v.config().relay_power, precoder_power_mc(v, stats, opts).mean)
        }
    }
}

/// UL spectral efficiencies of one pair, pre-log factor included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UlSe {
    pub r1: Estimate,
    pub r_ar: Estimate,
    pub r_br: Estimate,
}

#[derive(Debug, Clone)]
pub struct ExactOutcome {
    pub prelog: f64,
    pub moments: EnsembleMoments,
    /// `ρ` from the Monte-Carlo precoder power.
    pub rho: f64,
    pub ul: Vec<UlSe>,
    /// DL SINRs `[U_A,i, U_B,i]` per pair.
    pub dl_sinr: Vec<[f64; 2]>,
    pub report: SeReport,
}

impl ExactOutcome {
    /// Standard error of the UL sum rate `Σ_i R_1,i`.
    pub fn ul_sum(&self) -> Estimate {
        self.moments.ul_total_log_rate().scaled(self.prelog)
    }
}

/// Runs the full Monte-Carlo evaluation with statistics derived from `v`.
pub fn simulate(v: &Validated, opts: &ExactOptions) -> ExactOutcome {
    simulate_with(v, &v.stats(), opts)
}

/// Runs the Monte-Carlo evaluation drawing channels from `stats`.
pub fn simulate_with(v: &Validated, stats: &ChannelStats, opts: &ExactOptions) -> ExactOutcome {
    let config = v.config();
    let n = config.pairs;
    let gen = ChannelGenerator::new(config, v.params(), stats);
    let moments = reduce_trials(
        config.trials,
        opts.threads,
        || Accumulator::new(n),
        |acc, t| acc.add(&gen.draw(&mut trial_stream(config.seed, t as u64)), config),
        Accumulator::merge,
    )
    .finish();

    let prelog = v.prelog();
    let rho = rho_from_precoder_power(config.relay_power, moments.precoder_power().mean);
    let inv_rho2 = if rho == 0.0 { f64::INFINITY } else { 1.0 / (rho * rho) };

    let ul: Vec<UlSe> = (0..n)
        .map(|i| {
            let [r1, r_ar, r_br] = moments.ul_log_rates(i).map(|e| e.scaled(prelog));
            UlSe { r1, r_ar, r_br }
        })
        .collect();
    let dl_sinr: Vec<[f64; 2]> = (0..n)
        .map(|i| [moments.dl_sinr(i, Side::A, inv_rho2), moments.dl_sinr(i, Side::B, inv_rho2)])
        .collect();
    let pairs = ul
        .iter()
        .zip(&dl_sinr)
        .map(|(u, s)| {
            PairSe::assemble(
                u.r1.mean,
                u.r_ar.mean,
                u.r_br.mean,
                prelog * (1.0 + s[0]).log2(),
                prelog * (1.0 + s[1]).log2(),
            )
        })
        .collect();
    ExactOutcome {
        prelog,
        moments,
        rho,
        ul,
        dl_sinr,
        report: SeReport::new(pairs),
    }
}

pub fn se_ul(v: &Validated, opts: &ExactOptions) -> Vec<UlSe> {
    simulate(v, opts).ul
}

pub fn dl_sinr(v: &Validated, pair: usize, side: Side, opts: &ExactOptions) -> f64 {
    let out = simulate(v, opts);
    out.dl_sinr[pair][match side {
        Side::A => 0,
        Side::B => 1,
    }]
}

pub fn se_report(v: &Validated, opts: &ExactOptions) -> SeReport {
    simulate(v, opts).report
}
