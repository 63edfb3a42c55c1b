//! Large-`M` second-order moments of the UL quadratic forms and DL products.
//!
//! These expressions are the term-level oracles behind the closed forms. They
//! are written directly from the channel model (LOS amplitude, estimate
//! scatter and total diffuse power per link) rather than through the
//! interference kernels of [`crate::closed_form`], so the two routes can be
//! checked against each other and against Monte-Carlo moments.

use crate::config::{ChannelStats, LinkStats, Side, SystemConfig};

/// Diffuse (scattered plus estimation-error) power per antenna, `β/(K+1)`.
fn diffuse_power(link: &LinkStats) -> f64 {
    link.beta / (link.k_factor + 1.0)
}

/// `E{|ĥ_est^H h_other|²}` for independent links whose LOS vectors are
/// orthogonal. Includes LOS×diffuse, scatter×LOS and scatter×diffuse parts.
pub fn cross_second_moment(antennas: usize, est: &LinkStats, other: &LinkStats) -> f64 {
    let scatter = est.estimate_scatter_var();
    let diffuse = diffuse_power(other);
    antennas as f64 * (est.psi * diffuse + scatter * other.psi + scatter * diffuse)
}

/// Dominant part of `E{A_i}` (or `E{B_i}` for `side = B`): `p M² ω²`.
pub fn signal_term(config: &SystemConfig, stats: &ChannelStats, pair: usize, side: Side) -> f64 {
    let m = config.antennas as f64;
    let omega = stats.link(side, pair).omega;
    config.power(side, pair) * m * m * omega * omega
}

/// `E{C_i} = M (ω_AR + ω_BR)(p_A σ²_AR + p_B σ²_BR)`.
pub fn leakage_term(config: &SystemConfig, stats: &ChannelStats, pair: usize) -> f64 {
    let (a, b) = (stats.ar[pair], stats.br[pair]);
    config.antennas as f64
        * (a.omega + b.omega)
        * (config.power_a[pair] * a.sigma2 + config.power_b[pair] * b.sigma2)
}

/// `E{D_i}` assembled from [`cross_second_moment`].
pub fn interference_term(config: &SystemConfig, stats: &ChannelStats, pair: usize) -> f64 {
    let m = config.antennas;
    let mut total = 0.0;
    for j in (0..config.pairs).filter(|&j| j != pair) {
        for tx in Side::BOTH {
            let other = stats.link(tx, j);
            let pw = config.power(tx, j);
            for rx in Side::BOTH {
                total += pw * cross_second_moment(m, stats.link(rx, pair), other);
            }
        }
    }
    total
}

/// `E{E_i} = M (ω_AR + ω_BR)`.
pub fn noise_term(config: &SystemConfig, stats: &ChannelStats, pair: usize) -> f64 {
    config.antennas as f64 * (stats.ar[pair].omega + stats.br[pair].omega)
}

/// `E{h^T ĥ*} = M ω` for a link and its own estimate.
pub fn own_product_mean(antennas: usize, link: &LinkStats) -> f64 {
    antennas as f64 * link.omega
}

/// `Var{h^T ĥ*}` for a link and its own estimate:
/// `M β² [2Kη + η² + (K + η)/(1 + τ p_p β)] / (K + 1)²`.
pub fn own_product_var(antennas: usize, link: &LinkStats) -> f64 {
    let (k, eta) = (link.k_factor, link.eta);
    antennas as f64 * link.beta * link.beta * (2.0 * k * eta + eta * eta + (k + eta) * link.residual())
        / ((k + 1.0) * (k + 1.0))
}

/// `E{‖F_d‖²} = M Σ_j (ω_AR,j + ω_BR,j)`.
pub fn precoder_power(config: &SystemConfig, stats: &ChannelStats) -> f64 {
    (0..config.pairs).map(|j| noise_term(config, stats, j)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_form::{chi, xi, InterferenceTerms};
    use crate::config::{derive_stats, LinkParams, LinkSide};

    fn asym() -> (SystemConfig, ChannelStats) {
        let mut cfg = SystemConfig::new(64, 3).with_training_len(6);
        cfg.power_a = vec![1.0, 3.0, 0.5];
        cfg.power_b = vec![2.0, 0.1, 4.0];
        let params = LinkParams {
            ar: LinkSide {
                beta: vec![1.0, 0.4, 2.0],
                k_factor: vec![3.0, 0.0, 1.5],
                theta: vec![0.0, 0.1, 0.2],
            },
            br: LinkSide {
                beta: vec![0.8, 1.7, 0.3],
                k_factor: vec![0.2, 6.0, 2.0],
                theta: vec![0.3, 0.4, 0.5],
            },
        };
        let stats = derive_stats(&cfg, &params);
        (cfg, stats)
    }

    #[test]
    fn interference_matches_closed_form_aggregate() {
        let (cfg, stats) = asym();
        let terms = InterferenceTerms::new(&cfg, &stats);
        for i in 0..3 {
            let via_kernels = cfg.antennas as f64 * terms.q_agg[i];
            let direct = interference_term(&cfg, &stats, i);
            assert!((via_kernels - direct).abs() < 1e-12 * direct, "{via_kernels} vs {direct}");
        }
    }

    #[test]
    fn cross_moment_matches_kernels() {
        let (cfg, stats) = asym();
        let m = cfg.antennas;
        for x in Side::BOTH {
            for (i, j) in [(0, 1), (2, 0), (1, 1)] {
                let want_xi = cross_second_moment(m, stats.link(x, i), stats.link(Side::A, j));
                let want_chi = cross_second_moment(m, stats.link(x, i), stats.link(Side::B, j));
                assert!((m as f64 * xi(&stats, x, i, j) - want_xi).abs() < 1e-12 * want_xi);
                assert!((m as f64 * chi(&stats, x, i, j) - want_chi).abs() < 1e-12 * want_chi);
            }
        }
    }

    #[test]
    fn own_variance_is_the_own_kernel() {
        // Var{h^T ĥ*} has the same form as the kernel of a link with itself.
        let (cfg, stats) = asym();
        for side in Side::BOTH {
            for i in 0..3 {
                let link = stats.link(side, i);
                let var = own_product_var(cfg.antennas, link);
                let kernel = cross_second_moment(cfg.antennas, link, link);
                assert!((var - kernel).abs() < 1e-12 * var);
            }
        }
    }
}
