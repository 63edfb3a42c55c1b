//! Large-`M` closed-form approximations of every spectral efficiency.
//!
//! Everything here is a deterministic function of [`ChannelStats`]; no
//! randomness is involved.

use ndarray::Array2;

use crate::config::{ChannelStats, LinkStats, Side, SystemConfig};
use crate::report::{PairSe, SeReport};

/// Interference kernel between an estimated link and an independent true
/// link: `E{|ĥ_est^H h_other|²}/M` with the LOS cross term dropped.
fn kernel(est: &LinkStats, other: &LinkStats) -> f64 {
    let scale = est.beta * other.beta / ((est.k_factor + 1.0) * (other.k_factor + 1.0));
    let bracket = (est.k_factor + est.eta) * other.residual()
        + other.k_factor * est.eta
        + est.k_factor * other.eta
        + est.eta * other.eta;
    scale * bracket
}

/// `ξ_XR,ij`: estimate of link `(X, i)` against the true `A→R` link of pair `j`.
pub fn xi(stats: &ChannelStats, x: Side, i: usize, j: usize) -> f64 {
    kernel(stats.link(x, i), stats.link(Side::A, j))
}

/// `χ_XR,ij`: estimate of link `(X, i)` against the true `B→R` link of pair `j`.
pub fn chi(stats: &ChannelStats, x: Side, i: usize, j: usize) -> f64 {
    kernel(stats.link(x, i), stats.link(Side::B, j))
}

/// `ζ_XR,ij`: estimate of link `(X, j)` against the true `A→R` link of pair `i`.
pub fn zeta(stats: &ChannelStats, x: Side, i: usize, j: usize) -> f64 {
    kernel(stats.link(x, j), stats.link(Side::A, i))
}

/// All interference kernels and their aggregates.
#[derive(Debug, Clone, PartialEq)]
pub struct InterferenceTerms {
    /// `ξ_XR,ij`, indexed `[X][(i, j)]` with `X = 0` for `A`.
    pub xi: [Array2<f64>; 2],
    pub chi: [Array2<f64>; 2],
    pub zeta: [Array2<f64>; 2],
    /// `Q_i`, summed over `j ≠ i`.
    pub q_agg: Vec<f64>,
    /// `Z_ij = p_r (ζ_AR,ij + ζ_BR,ij)`, for every `j` including `i`.
    pub z: Array2<f64>,
}

impl InterferenceTerms {
    pub fn new(config: &SystemConfig, stats: &ChannelStats) -> Self {
        let n = stats.pairs();
        let table = |f: fn(&ChannelStats, Side, usize, usize) -> f64, x: Side| {
            Array2::from_shape_fn((n, n), |(i, j)| f(stats, x, i, j))
        };
        let xi = [table(xi, Side::A), table(xi, Side::B)];
        let chi = [table(chi, Side::A), table(chi, Side::B)];
        let zeta = [table(zeta, Side::A), table(zeta, Side::B)];
        let q_agg = (0..n)
            .map(|i| {
                (0..n)
                    .filter(|&j| j != i)
                    .map(|j| {
                        config.power_a[j] * (xi[0][[i, j]] + xi[1][[i, j]])
                            + config.power_b[j] * (chi[0][[i, j]] + chi[1][[i, j]])
                    })
                    .sum()
            })
            .collect();
        let z = Array2::from_shape_fn((n, n), |(i, j)| {
            config.relay_power * (zeta[0][[i, j]] + zeta[1][[i, j]])
        });
        InterferenceTerms {
            xi,
            chi,
            zeta,
            q_agg,
            z,
        }
    }
}

fn rate(prelog: f64, sinr: f64) -> f64 {
    if sinr <= 0.0 || prelog == 0.0 {
        0.0
    } else {
        prelog * sinr.ln_1p() / std::f64::consts::LN_2
    }
}

/// Approximate UL SINRs `[R_1, R_AR, R_BR]` of pair `i`.
pub fn ul_sinr(config: &SystemConfig, stats: &ChannelStats, terms: &InterferenceTerms, i: usize) -> [f64; 3] {
    let m = config.antennas as f64;
    let (a, b) = (stats.ar[i], stats.br[i]);
    let sig_a = m * config.power_a[i] * a.omega * a.omega;
    let sig_b = m * config.power_b[i] * b.omega * b.omega;
    let den = (a.omega + b.omega) * stats.q[i] + terms.q_agg[i];
    [sig_a + sig_b, sig_a, sig_b].map(|s| if s == 0.0 { 0.0 } else { s / den })
}

/// Approximate DL SINR of terminal `U_X,i`.
pub fn dl_sinr(config: &SystemConfig, stats: &ChannelStats, terms: &InterferenceTerms, i: usize, x: Side) -> f64 {
    let omega = stats.link(x, i).omega;
    let num = config.antennas as f64 * config.relay_power * omega * omega;
    if num == 0.0 {
        return 0.0;
    }
    let den: f64 = (0..stats.pairs())
        .map(|j| stats.ar[j].omega + stats.br[j].omega + terms.z[[i, j]])
        .sum();
    num / den
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApproxUl {
    pub r1: f64,
    pub r_ar: f64,
    pub r_br: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApproxDl {
    pub r_ra: f64,
    pub r_rb: f64,
}

pub fn approx_se_ul(config: &SystemConfig, stats: &ChannelStats) -> Vec<ApproxUl> {
    let terms = InterferenceTerms::new(config, stats);
    let prelog = config.prelog();
    (0..config.pairs)
        .map(|i| {
            let [s1, sa, sb] = ul_sinr(config, stats, &terms, i);
            ApproxUl {
                r1: rate(prelog, s1),
                r_ar: rate(prelog, sa),
                r_br: rate(prelog, sb),
            }
        })
        .collect()
}

pub fn approx_se_dl(config: &SystemConfig, stats: &ChannelStats) -> Vec<ApproxDl> {
    let terms = InterferenceTerms::new(config, stats);
    let prelog = config.prelog();
    (0..config.pairs)
        .map(|i| ApproxDl {
            r_ra: rate(prelog, dl_sinr(config, stats, &terms, i, Side::A)),
            r_rb: rate(prelog, dl_sinr(config, stats, &terms, i, Side::B)),
        })
        .collect()
}

pub fn approx_report(config: &SystemConfig, stats: &ChannelStats) -> SeReport {
    let ul = approx_se_ul(config, stats);
    let dl = approx_se_dl(config, stats);
    SeReport::new(
        ul.iter()
            .zip(&dl)
            .map(|(u, d)| PairSe::assemble(u.r1, u.r_ar, u.r_br, d.r_ra, d.r_rb))
            .collect(),
    )
}
