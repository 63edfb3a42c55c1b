//! Power-scaling laws `p_u = E_u/M^α`, `p_r = E_r/M^ε`, `p_p = E_p/M^γ` and
//! the large-`M` limits of the closed-form SE under them.

use std::fmt;

use thiserror::Error;

use crate::closed_form::approx_report;
use crate::config::{
    db_to_linear, validate, ConfigError, LinkParams, Side, SystemConfig,
    DEFAULT_PILOT_POWER_DB, DEFAULT_RELAY_POWER_DB, DEFAULT_USER_POWER_DB,
};
use crate::report::{PairSe, SeReport};

/// Power constants (dB) and their scaling exponents.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingLaw {
    pub e_u_db: f64,
    pub e_r_db: f64,
    pub e_p_db: f64,
    pub alpha: f64,
    pub epsilon: f64,
    pub gamma: f64,
}

impl ScalingLaw {
    /// Reference constants `E_u = E_p = 10 dB`, `E_r = 20 dB`.
    pub fn new(alpha: f64, epsilon: f64, gamma: f64) -> Self {
        ScalingLaw {
            e_u_db: DEFAULT_USER_POWER_DB,
            e_r_db: DEFAULT_RELAY_POWER_DB,
            e_p_db: DEFAULT_PILOT_POWER_DB,
            alpha,
            epsilon,
            gamma,
        }
    }

    pub fn with_constants_db(mut self, e_u_db: f64, e_r_db: f64, e_p_db: f64) -> Self {
        self.e_u_db = e_u_db;
        self.e_r_db = e_r_db;
        self.e_p_db = e_p_db;
        self
    }

    pub fn e_u(&self) -> f64 {
        db_to_linear(self.e_u_db)
    }

    pub fn e_r(&self) -> f64 {
        db_to_linear(self.e_r_db)
    }

    pub fn e_p(&self) -> f64 {
        db_to_linear(self.e_p_db)
    }

    pub fn is_unscaled(&self) -> bool {
        self.alpha == 0.0 && self.epsilon == 0.0 && self.gamma == 0.0
    }

    pub fn regime(&self) -> Regime {
        classify(self.alpha, self.epsilon)
    }
}

/// `base` with `M` antennas and every power replaced by `E / M^exponent`.
pub fn scaled_config(base: &SystemConfig, law: &ScalingLaw, antennas: usize) -> SystemConfig {
    let m = antennas as f64;
    let p_u = law.e_u() / m.powf(law.alpha);
    let mut cfg = base.clone();
    cfg.antennas = antennas;
    cfg.power_a = vec![p_u; cfg.pairs];
    cfg.power_b = vec![p_u; cfg.pairs];
    cfg.relay_power = law.e_r() / m.powf(law.epsilon);
    cfg.pilot_power = law.e_p() / m.powf(law.gamma);
    cfg
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// `α > 1` or `ε > 1`.
    ZeroLimit,
    /// `α < 1` and `ε < 1`.
    Unbounded,
    /// `α = ε = 1`.
    CaseI,
    /// `α = 1`, `0 < ε < 1`.
    CaseII,
    /// `0 < α < 1`, `ε = 1`.
    CaseIII,
    /// One exponent equal to 1 and the other 0.
    Boundary,
}

impl Regime {
    pub fn is_finite(self) -> bool {
        !matches!(self, Regime::ZeroLimit | Regime::Unbounded)
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Regime::ZeroLimit => "zero limit",
            Regime::Unbounded => "unbounded",
            Regime::CaseI => "finite limit (case I)",
            Regime::CaseII => "finite limit (case II)",
            Regime::CaseIII => "finite limit (case III)",
            Regime::Boundary => "finite limit (boundary)",
        };
        f.write_str(s)
    }
}

/// Total over nonnegative exponents.
pub fn classify(alpha: f64, epsilon: f64) -> Regime {
    if alpha > 1.0 || epsilon > 1.0 {
        Regime::ZeroLimit
    } else if alpha < 1.0 && epsilon < 1.0 {
        Regime::Unbounded
    } else if alpha == 1.0 && epsilon == 1.0 {
        Regime::CaseI
    } else if alpha == 1.0 && epsilon > 0.0 {
        Regime::CaseII
    } else if epsilon == 1.0 && alpha > 0.0 {
        Regime::CaseIII
    } else {
        Regime::Boundary
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegimeVerdict {
    pub regime: Regime,
    /// Present iff `regime` is a finite-limit variant.
    pub limits: Option<SeReport>,
}

/// Classifies `law` and attaches the per-pair limits when they are finite.
pub fn verdict(config: &SystemConfig, params: &LinkParams, law: &ScalingLaw) -> RegimeVerdict {
    let regime = law.regime();
    RegimeVerdict {
        regime,
        limits: limit_se(config, params, law, regime).ok(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("the SE has no finite positive limit in the {0} regime")]
pub struct NotFinite(pub Regime);

/// Limits of the closed-form rates, computed from `ψ = βK/(K+1)`.
///
/// Rates whose SINR grows without bound (UL for `α < 1`, DL for `ε < 1`)
/// are reported as `f64::INFINITY`; `R` and the sum are always finite. Only
/// `λ` is taken from `config`; `γ` does not enter.
pub fn limit_se(
    config: &SystemConfig,
    params: &LinkParams,
    law: &ScalingLaw,
    regime: Regime,
) -> Result<SeReport, NotFinite> {
    if !regime.is_finite() {
        return Err(NotFinite(regime));
    }
    let ul_bounded = law.alpha == 1.0;
    let dl_bounded = law.epsilon == 1.0;
    let prelog = config.prelog();
    let rate = |bounded: bool, sinr: f64| {
        if !bounded {
            f64::INFINITY
        } else {
            prelog * sinr.ln_1p() / std::f64::consts::LN_2
        }
    };
    let psi = |side: Side, i: usize| {
        let link = params.side(side);
        let k = link.k_factor[i];
        link.beta[i] * k / (k + 1.0)
    };
    let pairs = params.ar.len();
    let psi_total: f64 = (0..pairs).map(|j| psi(Side::A, j) + psi(Side::B, j)).sum();
    let (e_u, e_r) = (law.e_u(), law.e_r());

    let report = (0..pairs)
        .map(|i| {
            let (pa, pb) = (psi(Side::A, i), psi(Side::B, i));
            let own = pa + pb;
            let ul = |p: f64| if own > 0.0 { e_u * p * p / own } else { 0.0 };
            let dl = |p: f64| if psi_total > 0.0 { e_r * p * p / psi_total } else { 0.0 };
            PairSe::assemble(
                rate(ul_bounded, ul(pa) + ul(pb)),
                rate(ul_bounded, ul(pa)),
                rate(ul_bounded, ul(pb)),
                rate(dl_bounded, dl(pa)),
                rate(dl_bounded, dl(pb)),
            )
        })
        .collect();
    Ok(SeReport::new(report))
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TraceError {
    #[error("antenna grid is empty")]
    EmptyGrid,
    #[error("antenna grid must be strictly increasing (got {prev} then {next})")]
    NotIncreasing { prev: usize, next: usize },
    #[error(transparent)]
    Config(#[from] ConfigError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    pub antennas: usize,
    pub approx_sum: f64,
    /// `None` outside the finite-limit regimes.
    pub limit_sum: Option<f64>,
}

pub fn check_grid(grid: &[usize]) -> Result<(), TraceError> {
    if grid.is_empty() {
        return Err(TraceError::EmptyGrid);
    }
    for w in grid.windows(2) {
        if w[1] <= w[0] {
            return Err(TraceError::NotIncreasing {
                prev: w[0],
                next: w[1],
            });
        }
    }
    Ok(())
}

/// Closed-form sum SE under `law` at every `M` of `grid`, next to the limit.
pub fn convergence_trace(
    base: &SystemConfig,
    params: &LinkParams,
    law: &ScalingLaw,
    grid: &[usize],
) -> Result<Vec<TracePoint>, TraceError> {
    check_grid(grid)?;
    let limit = limit_se(base, params, law, law.regime()).ok().map(|r| r.sum());
    grid.iter()
        .map(|&m| {
            let v = validate(scaled_config(base, law, m), params.clone())?;
            let approx = approx_report(v.config(), &v.stats());
            Ok(TracePoint {
                antennas: m,
                approx_sum: approx.sum(),
                limit_sum: limit,
            })
        })
        .collect()
}
