//! Flat `key = value` experiment configuration files.
//!
//! ```text
//! # reference setup
//! M = 128
//! N = 2
//! p_u_db = 10
//! k_ar_db = 5, 5
//! theta_ar = grid
//! ```
//!
//! Per-user keys take one value (broadcast to every pair) or a comma list of
//! length `N`. Angles are radians; `grid` selects the orthogonal LOS grid and
//! an omitted angle key draws the angles from the seed. Unset scaling
//! constants default to the matching unscaled power.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

use crate::asymptotics::{scaled_config, ScalingLaw};
use crate::channel::random_angles;
use crate::config::{
    db_to_linear, grid_angles, validate, ConfigError, LinkParams, LinkSide, SystemConfig,
    Validated, DEFAULT_COHERENCE_LEN, DEFAULT_K_FACTOR_DB, DEFAULT_PILOT_POWER_DB,
    DEFAULT_RELAY_POWER_DB, DEFAULT_TRIALS, DEFAULT_USER_POWER_DB, LOS_GRID_PERIOD,
};

pub const KEYS: [&str; 21] = [
    "M", "N", "T", "tau", "trials", "seed", "p_u_db", "p_r_db", "p_p_db", "beta_ar", "beta_br",
    "k_ar_db", "k_br_db", "theta_ar", "theta_br", "alpha", "epsilon", "gamma", "e_u_db", "e_r_db",
    "e_p_db",
];

#[derive(Debug, Error)]
pub enum ConfigFileError {
    #[error("config file not found: {}", .0.display())]
    NotFound(PathBuf),
    #[error("cannot read {}: {source}", .path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{key}: {message}")]
    Value { key: &'static str, message: String },
    #[error(transparent)]
    Invalid(#[from] ConfigError),
}

/// One scalar broadcast to every user, or one value per user.
#[derive(Debug, Clone, PartialEq)]
pub struct PerUser(pub Vec<f64>);

impl PerUser {
    pub fn scalar(x: f64) -> Self {
        PerUser(vec![x])
    }

    pub fn as_scalar(&self) -> Option<f64> {
        match self.0.as_slice() {
            [x] => Some(*x),
            _ => None,
        }
    }

    pub fn expand(&self, key: &'static str, n: usize) -> Result<Vec<f64>, ConfigFileError> {
        match self.0.len() {
            1 => Ok(vec![self.0[0]; n]),
            len if len == n => Ok(self.0.clone()),
            len => Err(ConfigFileError::Value {
                key,
                message: format!("has {len} entries but N = {n}"),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Angles {
    /// Mutually orthogonal LOS directions (A users first).
    Grid,
    /// Uniform in `[−π/2, π/2)`, drawn from the master seed.
    Random,
    List(Vec<f64>),
}

/// Parsed configuration, before `M` and `N` are fixed by a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub antennas: usize,
    pub pairs: usize,
    pub coherence_len: usize,
    /// `None` means `2N`.
    pub training_len: Option<usize>,
    pub trials: usize,
    pub seed: u64,
    pub p_u_db: PerUser,
    pub p_r_db: f64,
    pub p_p_db: f64,
    pub beta_ar: PerUser,
    pub beta_br: PerUser,
    pub k_ar_db: PerUser,
    pub k_br_db: PerUser,
    pub theta_ar: Angles,
    pub theta_br: Angles,
    pub law: ScalingLaw,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            antennas: 128,
            pairs: 2,
            coherence_len: DEFAULT_COHERENCE_LEN,
            training_len: None,
            trials: DEFAULT_TRIALS,
            seed: 0,
            p_u_db: PerUser::scalar(DEFAULT_USER_POWER_DB),
            p_r_db: DEFAULT_RELAY_POWER_DB,
            p_p_db: DEFAULT_PILOT_POWER_DB,
            beta_ar: PerUser::scalar(1.0),
            beta_br: PerUser::scalar(1.0),
            k_ar_db: PerUser::scalar(DEFAULT_K_FACTOR_DB),
            k_br_db: PerUser::scalar(DEFAULT_K_FACTOR_DB),
            theta_ar: Angles::Random,
            theta_br: Angles::Random,
            law: ScalingLaw::new(0.0, 0.0, 0.0),
        }
    }
}

fn parse_num<T: FromStr>(line: usize, key: &str, raw: &str) -> Result<T, ConfigFileError> {
    raw.trim().parse().map_err(|_| ConfigFileError::Parse {
        line,
        message: format!("invalid value {raw:?} for {key}"),
    })
}

fn parse_list(line: usize, key: &str, raw: &str) -> Result<Vec<f64>, ConfigFileError> {
    raw.split(',').map(|s| parse_num(line, key, s)).collect()
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigFileError> {
        let text = fs::read_to_string(path).map_err(|source| {
            if source.kind() == std::io::ErrorKind::NotFound {
                ConfigFileError::NotFound(path.to_path_buf())
            } else {
                ConfigFileError::Io {
                    path: path.to_path_buf(),
                    source,
                }
            }
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigFileError> {
        let mut entries: HashMap<&str, (usize, &str)> = HashMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| ConfigFileError::Parse {
                line,
                message: format!("expected `key = value`, got {content:?}"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return Err(ConfigFileError::Parse {
                    line,
                    message: format!("unknown key {key:?}"),
                });
            }
            if value.is_empty() {
                return Err(ConfigFileError::Parse {
                    line,
                    message: format!("missing value for {key}"),
                });
            }
            if entries.insert(key, (line, value)).is_some() {
                return Err(ConfigFileError::Parse {
                    line,
                    message: format!("duplicate key {key}"),
                });
            }
        }

        let mut cfg = ExperimentConfig::default();
        let get = |key: &str| entries.get(key).copied();
        macro_rules! scalar {
            ($key:literal, $field:expr) => {
                if let Some((line, v)) = get($key) {
                    $field = parse_num(line, $key, v)?;
                }
            };
        }
        macro_rules! per_user {
            ($key:literal, $field:expr) => {
                if let Some((line, v)) = get($key) {
                    $field = PerUser(parse_list(line, $key, v)?);
                }
            };
        }
        scalar!("M", cfg.antennas);
        scalar!("N", cfg.pairs);
        scalar!("T", cfg.coherence_len);
        if let Some((line, v)) = get("tau") {
            cfg.training_len = Some(parse_num(line, "tau", v)?);
        }
        scalar!("trials", cfg.trials);
        scalar!("seed", cfg.seed);
        per_user!("p_u_db", cfg.p_u_db);
        scalar!("p_r_db", cfg.p_r_db);
        scalar!("p_p_db", cfg.p_p_db);
        per_user!("beta_ar", cfg.beta_ar);
        per_user!("beta_br", cfg.beta_br);
        per_user!("k_ar_db", cfg.k_ar_db);
        per_user!("k_br_db", cfg.k_br_db);
        for (key, field) in [("theta_ar", &mut cfg.theta_ar), ("theta_br", &mut cfg.theta_br)] {
            *field = match get(key) {
                None => Angles::Random,
                Some((_, v)) if v.eq_ignore_ascii_case("grid") => Angles::Grid,
                Some((line, v)) => Angles::List(parse_list(line, key, v)?),
            };
        }

        let e_u_default = cfg.p_u_db.as_scalar().unwrap_or(DEFAULT_USER_POWER_DB);
        let mut law = ScalingLaw::new(0.0, 0.0, 0.0).with_constants_db(e_u_default, cfg.p_r_db, cfg.p_p_db);
        scalar!("alpha", law.alpha);
        scalar!("epsilon", law.epsilon);
        scalar!("gamma", law.gamma);
        scalar!("e_u_db", law.e_u_db);
        scalar!("e_r_db", law.e_r_db);
        scalar!("e_p_db", law.e_p_db);
        for (key, x) in [("alpha", law.alpha), ("epsilon", law.epsilon), ("gamma", law.gamma)] {
            if !(x >= 0.0 && x.is_finite()) {
                return Err(ConfigFileError::Value {
                    key,
                    message: format!("exponent must be a finite nonnegative number, got {x}"),
                });
            }
        }
        cfg.law = law;
        Ok(cfg)
    }

    /// LOS angles for `n` pairs, A side then B side.
    fn angles(&self, n: usize) -> Result<(Vec<f64>, Vec<f64>), ConfigFileError> {
        let grid = grid_angles(2 * n, LOS_GRID_PERIOD);
        let random = random_angles(self.seed, 2 * n);
        let pick = |key: &'static str, spec: &Angles, offset: usize| match spec {
            Angles::Grid => Ok(grid[offset..offset + n].to_vec()),
            Angles::Random => Ok(random[offset..offset + n].to_vec()),
            Angles::List(v) => PerUser(v.clone()).expand(key, n),
        };
        Ok((pick("theta_ar", &self.theta_ar, 0)?, pick("theta_br", &self.theta_br, n)?))
    }

    /// Validated system at `antennas` × `pairs` with this file's settings;
    /// powers follow the scaling law whenever any exponent is nonzero.
    pub fn materialize(&self, antennas: usize, pairs: usize) -> Result<Validated, ConfigFileError> {
        self.materialize_with(antennas, pairs, &self.law)
    }

    pub fn materialize_with(
        &self,
        antennas: usize,
        pairs: usize,
        law: &ScalingLaw,
    ) -> Result<Validated, ConfigFileError> {
        let n = pairs;
        let p_u: Vec<f64> = self.p_u_db.expand("p_u_db", n)?.into_iter().map(db_to_linear).collect();
        let mut config = SystemConfig::new(antennas, n)
            .with_coherence_len(self.coherence_len)
            .with_training_len(self.training_len.unwrap_or(2 * n))
            .with_relay_power_db(self.p_r_db)
            .with_pilot_power_db(self.p_p_db)
            .with_trials(self.trials)
            .with_seed(self.seed);
        config.power_a = p_u.clone();
        config.power_b = p_u;
        if !law.is_unscaled() {
            config = scaled_config(&config, law, antennas);
        }
        let (theta_a, theta_b) = self.angles(n)?;
        let side = |beta: &PerUser, bk: &'static str, k: &PerUser, kk: &'static str, theta| {
            Ok::<_, ConfigFileError>(LinkSide {
                beta: beta.expand(bk, n)?,
                k_factor: k.expand(kk, n)?.into_iter().map(db_to_linear).collect(),
                theta,
            })
        };
        let params = LinkParams {
            ar: side(&self.beta_ar, "beta_ar", &self.k_ar_db, "k_ar_db", theta_a)?,
            br: side(&self.beta_br, "beta_br", &self.k_br_db, "k_br_db", theta_b)?,
        };
        Ok(validate(config, params)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const REFERENCE: &str = "\
# reference
M = 128
N = 2
T = 196
trials = 500
seed = 7
p_u_db = 10
p_r_db = 20
p_p_db = 10
beta_ar = 1
beta_br = 1
k_ar_db = 5
k_br_db = 5   # trailing comment
theta_ar = grid
theta_br = grid
";

    #[test]
    fn reference_file_materializes() {
        let cfg = ExperimentConfig::parse(REFERENCE).unwrap();
        assert_eq!(cfg.trials, 500);
        let v = cfg.materialize(128, 2).unwrap();
        assert_eq!(v.config().training_len, 4);
        assert_eq!(v.config().seed, 7);
        assert!((v.config().relay_power - 100.0).abs() < 1e-9);
        assert!((v.params().ar.k_factor[1] - db_to_linear(5.0)).abs() < 1e-12);
        assert_eq!(v.params(), &LinkParams::symmetric(2, 1.0, db_to_linear(5.0)));
        assert!(v.warnings().is_empty());
    }

    #[test]
    fn lists_and_broadcast() {
        let cfg = ExperimentConfig::parse("N = 3\nbeta_ar = 1, 0.5, 2\ntheta_ar = 0.1,0.2,0.3").unwrap();
        let v = cfg.materialize(16, 3).unwrap();
        assert_eq!(v.params().ar.beta, vec![1.0, 0.5, 2.0]);
        assert_eq!(v.params().br.beta, vec![1.0; 3]);
        assert_eq!(v.params().ar.theta, vec![0.1, 0.2, 0.3]);
        assert!(matches!(cfg.materialize(16, 2), Err(ConfigFileError::Value { .. })));
    }

    #[test]
    fn omitted_angles_follow_the_seed() {
        let a = ExperimentConfig::parse("seed = 3").unwrap().materialize(8, 2).unwrap();
        let b = ExperimentConfig::parse("seed = 3").unwrap().materialize(8, 2).unwrap();
        let c = ExperimentConfig::parse("seed = 4").unwrap().materialize(8, 2).unwrap();
        assert_eq!(a.params(), b.params());
        assert_ne!(a.params().ar.theta, c.params().ar.theta);
    }

    #[test]
    fn scaling_applies_only_with_exponents() {
        let cfg = ExperimentConfig::parse("alpha = 1\nepsilon = 1\ngamma = 1").unwrap();
        let v = cfg.materialize(10, 2).unwrap();
        assert!((v.config().power_a[0] - 1.0).abs() < 1e-12);
        assert!((v.config().relay_power - 10.0).abs() < 1e-12);
        let flat = ExperimentConfig::parse("e_u_db = 0").unwrap().materialize(10, 2).unwrap();
        assert!((flat.config().power_a[0] - 10.0).abs() < 1e-12);
    }

    #[test]
    fn parse_errors() {
        for text in ["M = x", "bogus = 1", "M 12", "M = 1\nM = 2", "gamma = -1", "p_r_db ="] {
            assert!(ExperimentConfig::parse(text).is_err(), "{text:?}");
        }
        match ExperimentConfig::parse("\n\nfoo = 1") {
            Err(ConfigFileError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn invalid_physics_surfaces() {
        let cfg = ExperimentConfig::parse("beta_ar = 0").unwrap();
        assert!(matches!(
            cfg.materialize(8, 2),
            Err(ConfigFileError::Invalid(ConfigError::NonPositiveBeta { .. }))
        ));
    }

    #[test]
    fn missing_file() {
        let err = ExperimentConfig::load(Path::new("/nonexistent/x.conf")).unwrap_err();
        assert!(matches!(err, ConfigFileError::NotFound(_)));
    }
}
