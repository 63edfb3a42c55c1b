//! Rician channel realizations with a statistically generated MMSE
//! estimate/error split.
//!
//! Each column of an estimate is `√(βK/(K+1))·ḡ + √(βη/(K+1))·z` with
//! `z ~ CN(0, I)`; the matching error column is an independent
//! `CN(0, σ² I)` draw and the true channel is their sum. Under MMSE with
//! worst-case Gaussian noise this has exactly the distribution of an
//! estimate formed from pilots, without simulating the pilots.

use std::f64::consts::{FRAC_PI_2, PI};
use std::io::{self, Write};

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use rand::distr::{Distribution, Uniform};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::config::{ChannelStats, LinkParams, Side, SystemConfig};

/// `M × N` complex matrix, one column per user.
pub type CMatrix = Array2<Complex64>;

/// Random stream of one Monte-Carlo trial.
pub type TrialRng = ChaCha8Rng;

/// Stream index reserved for LOS angle draws; trials never reach it.
const ANGLE_STREAM: u64 = u64::MAX;

/// Half-wavelength ULA steering vector; entry `m` (0-based) is
/// `exp(−j·m·π·sin θ)`.
pub fn los_steering(antennas: usize, theta: f64) -> Array1<Complex64> {
    let phase = PI * theta.sin();
    Array1::from_iter((0..antennas).map(|m| Complex64::from_polar(1.0, -(m as f64) * phase)))
}

/// Deterministic stream for trial `trial` under `master_seed`.
///
/// Every `(seed, trial)` maps to its own ChaCha stream, so streams never
/// overlap and trials can be drawn in any order or on any thread.
pub fn trial_stream(master_seed: u64, trial: u64) -> TrialRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial);
    rng
}

/// `count` LOS angles drawn uniformly from `[−π/2, π/2)`.
pub fn random_angles(master_seed: u64, count: usize) -> Vec<f64> {
    let mut rng = trial_stream(master_seed, ANGLE_STREAM);
    let dist = Uniform::new(-FRAC_PI_2, FRAC_PI_2).expect("finite, ordered bounds");
    (0..count).map(|_| dist.sample(&mut rng)).collect()
}

/// One circularly-symmetric complex Gaussian draw with variance `var`.
fn complex_normal<R: Rng + ?Sized>(rng: &mut R, var: f64) -> Complex64 {
    let sd = (var / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(sd * re, sd * im)
}

/// One draw of true channels, estimates and estimation errors.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub h_ar: CMatrix,
    pub h_br: CMatrix,
    pub hhat_ar: CMatrix,
    pub hhat_br: CMatrix,
    pub e_ar: CMatrix,
    pub e_br: CMatrix,
}

impl ChannelRealization {
    pub fn channel(&self, side: Side) -> &CMatrix {
        match side {
            Side::A => &self.h_ar,
            Side::B => &self.h_br,
        }
    }

    pub fn estimate(&self, side: Side) -> &CMatrix {
        match side {
            Side::A => &self.hhat_ar,
            Side::B => &self.hhat_br,
        }
    }

    pub fn error(&self, side: Side) -> &CMatrix {
        match side {
            Side::A => &self.e_ar,
            Side::B => &self.e_br,
        }
    }

    pub fn antennas(&self) -> usize {
        self.h_ar.nrows()
    }

    pub fn pairs(&self) -> usize {
        self.h_ar.ncols()
    }

    /// Zeroes both error matrices and resets the channels to the estimates.
    pub fn with_perfect_csi(mut self) -> Self {
        self.e_ar.fill(Complex64::new(0.0, 0.0));
        self.e_br.fill(Complex64::new(0.0, 0.0));
        self.h_ar = self.hhat_ar.clone();
        self.h_br = self.hhat_br.clone();
        self
    }

    /// Debug dump: one line per `(matrix, antenna)` with the row's entries
    /// as interleaved real/imaginary parts.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        let mats = [
            ("H_AR", &self.h_ar),
            ("H_BR", &self.h_br),
            ("Hhat_AR", &self.hhat_ar),
            ("Hhat_BR", &self.hhat_br),
            ("E_AR", &self.e_ar),
            ("E_BR", &self.e_br),
        ];
        for (name, mat) in mats {
            for (m, row) in mat.rows().into_iter().enumerate() {
                write!(out, "{name},{m}")?;
                for z in row {
                    write!(out, ",{},{}", z.re, z.im)?;
                }
                writeln!(out)?;
            }
        }
        Ok(())
    }
}

/// Per-link draw parameters precomputed from the statistics.
#[derive(Debug, Clone)]
struct LinkDraw {
    los: Array1<Complex64>,
    scatter_var: f64,
    error_var: f64,
}

/// Draws realizations for a fixed configuration.
#[derive(Debug, Clone)]
pub struct ChannelGenerator {
    antennas: usize,
    ar: Vec<LinkDraw>,
    br: Vec<LinkDraw>,
}

impl ChannelGenerator {
    pub fn new(config: &SystemConfig, params: &LinkParams, stats: &ChannelStats) -> Self {
        let antennas = config.antennas;
        let side = |side: Side| -> Vec<LinkDraw> {
            (0..config.pairs)
                .map(|i| {
                    let link = stats.link(side, i);
                    let los = los_steering(antennas, params.side(side).theta[i])
                        .mapv(|g| g * link.los_amplitude());
                    LinkDraw {
                        los,
                        scatter_var: link.estimate_scatter_var(),
                        error_var: link.sigma2,
                    }
                })
                .collect()
        };
        ChannelGenerator {
            antennas,
            ar: side(Side::A),
            br: side(Side::B),
        }
    }

    fn draw_side<R: Rng + ?Sized>(&self, links: &[LinkDraw], rng: &mut R) -> (CMatrix, CMatrix, CMatrix) {
        let shape = (self.antennas, links.len());
        let mut hhat = CMatrix::zeros(shape);
        let mut err = CMatrix::zeros(shape);
        for (i, link) in links.iter().enumerate() {
            for m in 0..self.antennas {
                hhat[[m, i]] = link.los[m] + complex_normal(rng, link.scatter_var);
                err[[m, i]] = complex_normal(rng, link.error_var);
            }
        }
        let h = &hhat + &err;
        (h, hhat, err)
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> ChannelRealization {
        let (h_ar, hhat_ar, e_ar) = self.draw_side(&self.ar, rng);
        let (h_br, hhat_br, e_br) = self.draw_side(&self.br, rng);
        ChannelRealization {
            h_ar,
            h_br,
            hhat_ar,
            hhat_br,
            e_ar,
            e_br,
        }
    }
}

pub fn draw_realization<R: Rng + ?Sized>(
    config: &SystemConfig,
    params: &LinkParams,
    stats: &ChannelStats,
    rng: &mut R,
) -> ChannelRealization {
    ChannelGenerator::new(config, params, stats).draw(rng)
}
