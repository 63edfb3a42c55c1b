//! Empirical statistics of generated channels against the model.

use mmrelay::channel::{trial_stream, ChannelGenerator};
use mmrelay::config::{db_to_linear, validate, LinkParams, LinkSide, Side, SystemConfig};
use num_complex::Complex64;

fn asymmetric() -> (SystemConfig, LinkParams) {
    let cfg = SystemConfig::new(16, 2).with_trials(10_000).with_seed(21).with_pilot_power_db(0.0);
    let params = LinkParams {
        ar: LinkSide {
            beta: vec![1.0, 0.3],
            k_factor: vec![db_to_linear(5.0), 0.0],
            theta: vec![0.2, -0.7],
        },
        br: LinkSide {
            beta: vec![2.0, 0.8],
            k_factor: vec![db_to_linear(10.0), db_to_linear(-3.0)],
            theta: vec![1.0, 0.0],
        },
    };
    (cfg, params)
}

#[test]
fn per_link_powers_match_model() {
    let (cfg, params) = asymmetric();
    let v = validate(cfg, params).unwrap();
    let stats = v.stats();
    let gen = ChannelGenerator::new(v.config(), v.params(), &stats);
    let draws = v.config().trials;
    let m = v.config().antennas;
    let mut total = [[0.0; 2]; 2];
    let mut est = [[0.0; 2]; 2];
    let mut err = [[0.0; 2]; 2];
    for t in 0..draws {
        let r = gen.draw(&mut trial_stream(v.config().seed, t as u64));
        for (s, side) in Side::BOTH.into_iter().enumerate() {
            for i in 0..2 {
                total[s][i] += r.channel(side).column(i).iter().map(|z| z.norm_sqr()).sum::<f64>();
                est[s][i] += r.estimate(side).column(i).iter().map(|z| z.norm_sqr()).sum::<f64>();
                err[s][i] += r.error(side).column(i).iter().map(|z| z.norm_sqr()).sum::<f64>();
            }
        }
    }
    let n = (draws * m) as f64;
    for (s, side) in Side::BOTH.into_iter().enumerate() {
        for i in 0..2 {
            let link = stats.link(side, i);
            for (got, want, what) in [(total[s][i] / n, link.beta, "beta"), (est[s][i] / n, link.omega, "omega"), (err[s][i] / n, link.sigma2, "sigma2")] {
                assert!((got - want).abs() / want < 0.02, "{side}{i} {what}: {got} vs {want}");
            }
        }
    }
}

#[test]
fn estimate_mean_is_the_los_component() {
    let (cfg, params) = asymmetric();
    let v = validate(cfg.with_trials(4000), params).unwrap();
    let stats = v.stats();
    let gen = ChannelGenerator::new(v.config(), v.params(), &stats);
    let m = v.config().antennas;
    let mut mean = vec![Complex64::default(); m];
    for t in 0..4000 {
        let r = gen.draw(&mut trial_stream(v.config().seed, t));
        for (acc, z) in mean.iter_mut().zip(r.estimate(Side::B).column(0)) {
            *acc += z / 4000.0;
        }
    }
    let link = stats.link(Side::B, 0);
    let los = mmrelay::channel::los_steering(m, v.params().br.theta[0]).mapv(|g| g * link.los_amplitude());
    let tol = 4.0 * (link.estimate_scatter_var() / 4000.0).sqrt();
    for (got, want) in mean.iter().zip(los.iter()) {
        assert!((got - want).norm() < tol, "{got} vs {want}");
    }
}

#[test]
fn distinct_users_are_uncorrelated() {
    let (cfg, params) = asymmetric();
    let v = validate(cfg.with_trials(5000), params).unwrap();
    let stats = v.stats();
    let gen = ChannelGenerator::new(v.config(), v.params(), &stats);
    let (a_mean, b_mean) = (
        mmrelay::channel::los_steering(16, v.params().ar.theta[0]).mapv(|g| g * stats.ar[0].los_amplitude()),
        mmrelay::channel::los_steering(16, v.params().ar.theta[1]).mapv(|g| g * stats.ar[1].los_amplitude()),
    );
    let mut cov = Complex64::default();
    for t in 0..5000 {
        let r = gen.draw(&mut trial_stream(v.config().seed, t));
        let x = r.channel(Side::A)[[3, 0]] - a_mean[3];
        let y = r.channel(Side::A)[[3, 1]] - b_mean[3];
        cov += x * y.conj() / 5000.0;
    }
    let scale = ((stats.ar[0].beta / (stats.ar[0].k_factor + 1.0)) * (stats.ar[1].beta / (stats.ar[1].k_factor + 1.0))).sqrt();
    assert!(cov.norm() / scale < 4.0 / 5000f64.sqrt(), "{cov}");
}
