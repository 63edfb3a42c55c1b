//! System configuration, large-scale link parameters and the per-link scalar
//! statistics (`η`, `ω`, `σ²`, `ψ`, `q`) shared by every evaluator.
//!
//! Noise at the relay and at every user is normalized to unit variance, so all
//! powers held here are linear SNRs.

use std::f64::consts::FRAC_PI_2;
use std::fmt;

use thiserror::Error;

/// Default coherence interval, in symbols.
pub const DEFAULT_COHERENCE_LEN: usize = 196;
pub const DEFAULT_USER_POWER_DB: f64 = 10.0;
pub const DEFAULT_RELAY_POWER_DB: f64 = 20.0;
pub const DEFAULT_PILOT_POWER_DB: f64 = 10.0;
pub const DEFAULT_K_FACTOR_DB: f64 = 5.0;
pub const DEFAULT_TRIALS: usize = 2000;

/// Converts a power-like quantity from decibels to linear scale.
pub fn db_to_linear(x_db: f64) -> f64 {
    10f64.powf(x_db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Which end of a user pair a link belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    A,
    B,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::A, Side::B];

    pub fn other(self) -> Side {
        match self {
            Side::A => Side::B,
            Side::B => Side::A,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::A => f.write_str("A"),
            Side::B => f.write_str("B"),
        }
    }
}

/// Dimensions, powers and Monte-Carlo settings of one system instance.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    /// Relay antenna count `M`.
    pub antennas: usize,
    /// Number of user pairs `N`.
    pub pairs: usize,
    /// Coherence interval `T` in symbols.
    pub coherence_len: usize,
    /// Training interval `τ` in symbols.
    pub training_len: usize,
    /// Linear UL transmit power of each `U_A,i`.
    pub power_a: Vec<f64>,
    /// Linear UL transmit power of each `U_B,i`.
    pub power_b: Vec<f64>,
    pub relay_power: f64,
    pub pilot_power: f64,
    pub trials: usize,
    pub seed: u64,
}

impl SystemConfig {
    /// A configuration with the reference numerical setup: `T = 196`,
    /// `p_u = p_p = 10 dB`, `p_r = 20 dB`, `τ = 2N`.
    pub fn new(antennas: usize, pairs: usize) -> Self {
        let p_u = db_to_linear(DEFAULT_USER_POWER_DB);
        SystemConfig {
            antennas,
            pairs,
            coherence_len: DEFAULT_COHERENCE_LEN,
            training_len: 2 * pairs,
            power_a: vec![p_u; pairs],
            power_b: vec![p_u; pairs],
            relay_power: db_to_linear(DEFAULT_RELAY_POWER_DB),
            pilot_power: db_to_linear(DEFAULT_PILOT_POWER_DB),
            trials: DEFAULT_TRIALS,
            seed: 0,
        }
    }

    pub fn with_user_power(mut self, p: f64) -> Self {
        self.power_a = vec![p; self.pairs];
        self.power_b = vec![p; self.pairs];
        self
    }

    pub fn with_user_power_db(self, p_db: f64) -> Self {
        self.with_user_power(db_to_linear(p_db))
    }

    pub fn with_relay_power(mut self, p: f64) -> Self {
        self.relay_power = p;
        self
    }

    pub fn with_relay_power_db(self, p_db: f64) -> Self {
        self.with_relay_power(db_to_linear(p_db))
    }

    pub fn with_pilot_power(mut self, p: f64) -> Self {
        self.pilot_power = p;
        self
    }

    pub fn with_pilot_power_db(self, p_db: f64) -> Self {
        self.with_pilot_power(db_to_linear(p_db))
    }

    pub fn with_training_len(mut self, tau: usize) -> Self {
        self.training_len = tau;
        self
    }

    pub fn with_coherence_len(mut self, t: usize) -> Self {
        self.coherence_len = t;
        self
    }

    pub fn with_trials(mut self, trials: usize) -> Self {
        self.trials = trials;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Pre-log factor `λ = (T − τ)/(2T)`, clamped at zero.
    pub fn prelog(&self) -> f64 {
        if self.training_len >= self.coherence_len || self.coherence_len == 0 {
            0.0
        } else {
            (self.coherence_len - self.training_len) as f64 / (2.0 * self.coherence_len as f64)
        }
    }

    pub fn power(&self, side: Side, user: usize) -> f64 {
        match side {
            Side::A => self.power_a[user],
            Side::B => self.power_b[user],
        }
    }
}

/// Large-scale parameters of the links on one side (`A→R` or `B→R`).
#[derive(Debug, Clone, PartialEq)]
pub struct LinkSide {
    /// Linear path-loss coefficients `β`.
    pub beta: Vec<f64>,
    /// Linear Rician K-factors.
    pub k_factor: Vec<f64>,
    /// LOS angles of arrival, radians in `[−π/2, π/2)`.
    pub theta: Vec<f64>,
}

impl LinkSide {
    pub fn uniform(beta: f64, k_factor: f64, theta: Vec<f64>) -> Self {
        let n = theta.len();
        LinkSide {
            beta: vec![beta; n],
            k_factor: vec![k_factor; n],
            theta,
        }
    }

    pub fn len(&self) -> usize {
        self.beta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beta.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkParams {
    pub ar: LinkSide,
    pub br: LinkSide,
}

impl LinkParams {
    /// Identical `β` and `K` on every link, with LOS angles on the
    /// orthogonal grid of [`grid_angles`] (A users first, then B users).
    pub fn symmetric(pairs: usize, beta: f64, k_factor: f64) -> Self {
        let angles = grid_angles(2 * pairs, LOS_GRID_PERIOD);
        let (a, b) = angles.split_at(pairs);
        LinkParams {
            ar: LinkSide::uniform(beta, k_factor, a.to_vec()),
            br: LinkSide::uniform(beta, k_factor, b.to_vec()),
        }
    }

    pub fn side(&self, side: Side) -> &LinkSide {
        match side {
            Side::A => &self.ar,
            Side::B => &self.br,
        }
    }

    pub fn side_mut(&mut self, side: Side) -> &mut LinkSide {
        match side {
            Side::A => &mut self.ar,
            Side::B => &mut self.br,
        }
    }

    pub fn set_k_factor(&mut self, k_factor: f64) {
        for side in Side::BOTH {
            self.side_mut(side).k_factor.iter_mut().for_each(|k| *k = k_factor);
        }
    }
}

/// Antenna-count period of the default LOS angle grid.
pub const LOS_GRID_PERIOD: usize = 32;

/// LOS angles whose half-wavelength ULA steering vectors are mutually
/// orthogonal for every antenna count that is a multiple of `period`.
///
/// The sines of the angles are spaced by a multiple of `2/period` starting
/// at `−1`. A grid with more users than `period` widens the period to `users`.
pub fn grid_angles(users: usize, period: usize) -> Vec<f64> {
    if users == 0 {
        return Vec::new();
    }
    let period = period.max(users);
    let step = (period / users) as f64 * 2.0 / period as f64;
    (0..users)
        .map(|k| (-1.0 + step * k as f64).clamp(-1.0, 1.0).asin())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("antenna count M must be at least 1")]
    NoAntennas,
    #[error("user-pair count N must be at least 1")]
    NoPairs,
    #[error("coherence interval T must be at least 1")]
    ZeroCoherence,
    #[error("trial count must be at least 1")]
    NoTrials,
    #[error("{what} has {found} entries, expected {expected}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("path-loss coefficient beta_{side}R,{user} = {value} is not positive")]
    NonPositiveBeta { side: Side, user: usize, value: f64 },
    #[error("Rician K-factor K_{side}R,{user} = {value} is negative")]
    NegativeK { side: Side, user: usize, value: f64 },
    #[error("LOS angle theta_{side}R,{user} = {value} lies outside [-pi/2, pi/2)")]
    AngleOutOfRange { side: Side, user: usize, value: f64 },
    #[error("training interval tau = {tau} exceeds coherence interval T = {coherence}")]
    TauExceedsT { tau: usize, coherence: usize },
    #[error("{what} = {value} is not a valid linear power")]
    InvalidPower { what: &'static str, value: f64 },
}

/// Conditions that are legal but worth surfacing.
#[derive(Debug, Clone, PartialEq)]
pub enum ConfigWarning {
    /// Fewer training symbols than the `2N` needed for orthogonal pilots.
    TauBelowPilotMinimum { tau: usize, minimum: usize },
    /// `τ = T`: no data symbols remain, every SE is zero.
    ZeroPrelog,
}

impl fmt::Display for ConfigWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigWarning::TauBelowPilotMinimum { tau, minimum } => write!(
                f,
                "training interval tau = {tau} is below the orthogonal-pilot minimum 2N = {minimum}"
            ),
            ConfigWarning::ZeroPrelog => f.write_str("tau = T leaves no data symbols (lambda = 0)"),
        }
    }
}

/// A configuration/parameter pair that passed [`validate`].
#[derive(Debug, Clone, PartialEq)]
pub struct Validated {
    config: SystemConfig,
    params: LinkParams,
    warnings: Vec<ConfigWarning>,
}

impl Validated {
    pub fn config(&self) -> &SystemConfig {
        &self.config
    }

    pub fn params(&self) -> &LinkParams {
        &self.params
    }

    pub fn warnings(&self) -> &[ConfigWarning] {
        &self.warnings
    }

    pub fn prelog(&self) -> f64 {
        self.config.prelog()
    }

    pub fn stats(&self) -> ChannelStats {
        derive_stats(&self.config, &self.params)
    }

    pub fn into_parts(self) -> (SystemConfig, LinkParams) {
        (self.config, self.params)
    }
}

fn check_power(what: &'static str, value: f64) -> Result<(), ConfigError> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(ConfigError::InvalidPower { what, value })
    }
}

fn check_len(what: &'static str, expected: usize, found: usize) -> Result<(), ConfigError> {
    if expected == found {
        Ok(())
    } else {
        Err(ConfigError::LengthMismatch {
            what,
            expected,
            found,
        })
    }
}

pub fn validate(config: SystemConfig, params: LinkParams) -> Result<Validated, ConfigError> {
    if config.antennas == 0 {
        return Err(ConfigError::NoAntennas);
    }
    if config.pairs == 0 {
        return Err(ConfigError::NoPairs);
    }
    if config.coherence_len == 0 {
        return Err(ConfigError::ZeroCoherence);
    }
    if config.trials == 0 {
        return Err(ConfigError::NoTrials);
    }
    let n = config.pairs;
    check_len("p_A", n, config.power_a.len())?;
    check_len("p_B", n, config.power_b.len())?;
    for &p in config.power_a.iter().chain(&config.power_b) {
        check_power("p_u", p)?;
    }
    check_power("p_r", config.relay_power)?;
    check_power("p_p", config.pilot_power)?;

    for side in Side::BOTH {
        let link = params.side(side);
        check_len("beta", n, link.beta.len())?;
        check_len("K", n, link.k_factor.len())?;
        check_len("theta", n, link.theta.len())?;
        for user in 0..n {
            let beta = link.beta[user];
            if !(beta > 0.0 && beta.is_finite()) {
                return Err(ConfigError::NonPositiveBeta {
                    side,
                    user: user + 1,
                    value: beta,
                });
            }
            let k = link.k_factor[user];
            if !(k >= 0.0 && k.is_finite()) {
                return Err(ConfigError::NegativeK {
                    side,
                    user: user + 1,
                    value: k,
                });
            }
            let theta = link.theta[user];
            if !(-FRAC_PI_2..FRAC_PI_2).contains(&theta) {
                return Err(ConfigError::AngleOutOfRange {
                    side,
                    user: user + 1,
                    value: theta,
                });
            }
        }
    }

    if config.training_len > config.coherence_len {
        return Err(ConfigError::TauExceedsT {
            tau: config.training_len,
            coherence: config.coherence_len,
        });
    }
    let mut warnings = Vec::new();
    if config.training_len < 2 * n {
        warnings.push(ConfigWarning::TauBelowPilotMinimum {
            tau: config.training_len,
            minimum: 2 * n,
        });
    }
    if config.training_len == config.coherence_len {
        warnings.push(ConfigWarning::ZeroPrelog);
    }
    Ok(Validated {
        config,
        params,
        warnings,
    })
}

/// Scalar statistics of one user-relay link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkStats {
    pub beta: f64,
    pub k_factor: f64,
    /// Training SNR `τ p_p β`.
    pub training_snr: f64,
    /// Pilot-quality fraction `τ p_p β / (1 + τ p_p β)`.
    pub eta: f64,
    /// Per-antenna estimate power `β (K + η)/(K + 1)`.
    pub omega: f64,
    /// Per-antenna estimation-error variance `β / ((1 + τ p_p β)(K + 1))`.
    pub sigma2: f64,
    /// LOS power `β K/(K + 1)`, the limit of `ω` without training.
    pub psi: f64,
}

impl LinkStats {
    pub fn new(beta: f64, k_factor: f64, training_snr: f64) -> Self {
        let (eta, residual) = if training_snr.is_infinite() {
            (1.0, 0.0)
        } else {
            (training_snr / (1.0 + training_snr), 1.0 / (1.0 + training_snr))
        };
        let k1 = k_factor + 1.0;
        LinkStats {
            beta,
            k_factor,
            training_snr,
            eta,
            omega: beta * (k_factor + eta) / k1,
            sigma2: beta * residual / k1,
            psi: beta * k_factor / k1,
        }
    }

    /// `1/(1 + τ p_p β)`, the share of the scattered power left unestimated.
    pub fn residual(&self) -> f64 {
        if self.training_snr.is_infinite() {
            0.0
        } else {
            1.0 / (1.0 + self.training_snr)
        }
    }

    /// Standard deviation of the LOS component, `√(βK/(K+1))`.
    pub fn los_amplitude(&self) -> f64 {
        self.psi.sqrt()
    }

    /// Per-entry variance of the scattered part of the estimate, `βη/(K+1)`.
    pub fn estimate_scatter_var(&self) -> f64 {
        self.beta * self.eta / (self.k_factor + 1.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelStats {
    pub ar: Vec<LinkStats>,
    pub br: Vec<LinkStats>,
    /// `q_i = p_A,i σ²_AR,i + p_B,i σ²_BR,i + 1`.
    pub q: Vec<f64>,
}

impl ChannelStats {
    pub fn link(&self, side: Side, user: usize) -> &LinkStats {
        match side {
            Side::A => &self.ar[user],
            Side::B => &self.br[user],
        }
    }

    pub fn link_mut(&mut self, side: Side, user: usize) -> &mut LinkStats {
        match side {
            Side::A => &mut self.ar[user],
            Side::B => &mut self.br[user],
        }
    }

    pub fn pairs(&self) -> usize {
        self.q.len()
    }
}

/// Derives every per-link scalar. Inputs are expected to be validated.
pub fn derive_stats(config: &SystemConfig, params: &LinkParams) -> ChannelStats {
    let tau_pp = config.training_len as f64 * config.pilot_power;
    let side_stats = |side: &LinkSide| -> Vec<LinkStats> {
        side.beta
            .iter()
            .zip(&side.k_factor)
            .map(|(&beta, &k)| LinkStats::new(beta, k, tau_pp * beta))
            .collect()
    };
    let ar = side_stats(&params.ar);
    let br = side_stats(&params.br);
    let q = (0..config.pairs)
        .map(|i| config.power_a[i] * ar[i].sigma2 + config.power_b[i] * br[i].sigma2 + 1.0)
        .collect();
    ChannelStats { ar, br, q }
}
