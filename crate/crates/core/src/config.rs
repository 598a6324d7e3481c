//! Flat `key=value` run configuration.
//!
//! One key per line, `#` starts a comment, blank lines are ignored. Every key
//! is optional; unknown keys are rejected.
//!
//! | key | default |
//! |-----|---------|
//! | `grid_n` | 64 |
//! | `cfl`, `dt_max`, `dt_min`, `t_end` | 0.4, 1e-2, 1e-8, 1.0 |
//! | `preset` | taylor-green |
//! | `seed` | 0 |
//! | `init_amplitude`, `init_perturbation`, `init_kmax`, `rho_mean` | 1.0, 0.1, 4, 0.0 |
//! | `forcing` | boussinesq (`boussinesq`, `curl_forced`, `none`) |
//! | `forcing_m`, `forcing_lambda` | 1.0, 0.5 |
//! | `cadence` | 10 (steps between records) |
//! | `p_list` | 2,4,8,16 |
//! | `output_dir` | out |
//! | `nonzero_mean` | false |

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::ConfigError;
use crate::solver::{CurlForcing, ForcingSpec, Preset, PresetParams, StepPolicy};

pub const KEYS: [&str; 18] = [
    "grid_n",
    "cfl",
    "dt_max",
    "dt_min",
    "t_end",
    "preset",
    "seed",
    "init_amplitude",
    "init_perturbation",
    "init_kmax",
    "rho_mean",
    "forcing",
    "forcing_m",
    "forcing_lambda",
    "cadence",
    "p_list",
    "output_dir",
    "nonzero_mean",
];

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub grid_n: usize,
    pub policy: StepPolicy,
    pub preset: Preset,
    pub seed: u64,
    pub preset_params: PresetParams,
    pub forcing: ForcingSpec,
    pub cadence: usize,
    pub p_list: Vec<f64>,
    pub output_dir: PathBuf,
    pub nonzero_mean: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            grid_n: 64,
            policy: StepPolicy::default(),
            preset: Preset::TaylorGreen,
            seed: 0,
            preset_params: PresetParams::default(),
            forcing: ForcingSpec::Boussinesq,
            cadence: 10,
            p_list: vec![2.0, 4.0, 8.0, 16.0],
            output_dir: PathBuf::from("out"),
            nonzero_mean: false,
        }
    }
}

fn parse_value<T: std::str::FromStr>(line: usize, key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value.parse::<T>().map_err(|e| ConfigError::Parse {
        line,
        message: format!("{key}: cannot parse '{value}': {e}"),
    })
}

fn parse_bool(line: usize, key: &str, value: &str) -> Result<bool, ConfigError> {
    match value {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(ConfigError::Parse {
            line,
            message: format!("{key}: expected true or false, got '{value}'"),
        }),
    }
}

/// Parses and validates a configuration file body.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut cfg = RunConfig::default();
    let mut forcing_name = "boussinesq".to_string();
    let mut forcing_m = 1.0;
    let mut forcing_lambda = 0.5;
    let mut seen = HashSet::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let Some((key, value)) = body.split_once('=') else {
            return Err(ConfigError::Parse {
                line,
                message: format!("expected key=value, got '{body}'"),
            });
        };
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            return Err(ConfigError::Parse {
                line,
                message: format!("unknown key '{key}'"),
            });
        }
        if !seen.insert(key.to_string()) {
            return Err(ConfigError::Parse {
                line,
                message: format!("duplicate key '{key}'"),
            });
        }
        match key {
            "grid_n" => cfg.grid_n = parse_value(line, key, value)?,
            "cfl" => cfg.policy.cfl = parse_value(line, key, value)?,
            "dt_max" => cfg.policy.dt_max = parse_value(line, key, value)?,
            "dt_min" => cfg.policy.dt_min = parse_value(line, key, value)?,
            "t_end" => cfg.policy.t_end = parse_value(line, key, value)?,
            "preset" => {
                cfg.preset = value.parse().map_err(|e: crate::error::SolverError| {
                    ConfigError::Parse {
                        line,
                        message: e.to_string(),
                    }
                })?
            }
            "seed" => cfg.seed = parse_value(line, key, value)?,
            "init_amplitude" => cfg.preset_params.amplitude = parse_value(line, key, value)?,
            "init_perturbation" => cfg.preset_params.perturbation = parse_value(line, key, value)?,
            "init_kmax" => cfg.preset_params.kmax = parse_value(line, key, value)?,
            "rho_mean" => cfg.preset_params.rho_mean = parse_value(line, key, value)?,
            "forcing" => forcing_name = value.to_string(),
            "forcing_m" => forcing_m = parse_value(line, key, value)?,
            "forcing_lambda" => forcing_lambda = parse_value(line, key, value)?,
            "cadence" => cfg.cadence = parse_value(line, key, value)?,
            "p_list" => {
                cfg.p_list = value
                    .split(',')
                    .map(|s| parse_value::<f64>(line, key, s.trim()))
                    .collect::<Result<_, _>>()?
            }
            "output_dir" => cfg.output_dir = PathBuf::from(value),
            "nonzero_mean" => cfg.nonzero_mean = parse_bool(line, key, value)?,
            _ => unreachable!("key list checked above"),
        }
    }

    cfg.forcing = match forcing_name.as_str() {
        "boussinesq" => ForcingSpec::Boussinesq,
        "none" => ForcingSpec::None,
        "curl_forced" => ForcingSpec::CurlForced(
            CurlForcing::new(forcing_m, forcing_lambda)
                .map_err(|e| ConfigError::invalid("forcing_m", e.to_string()))?,
        ),
        other => {
            return Err(ConfigError::invalid(
                "forcing",
                format!("expected boussinesq, curl_forced or none, got '{other}'"),
            ))
        }
    };
    cfg.validate()?;
    Ok(cfg)
}

impl RunConfig {
    /// Field-level checks that do not touch the filesystem.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.grid_n % 2 != 0 {
            return Err(ConfigError::invalid("grid_n", "grid_n must be even"));
        }
        if self.grid_n < 16 {
            return Err(ConfigError::invalid("grid_n", "grid_n must be at least 16"));
        }
        self.policy.validate().map_err(|e| {
            let field = if !(self.policy.t_end >= 0.0 && self.policy.t_end.is_finite()) {
                "t_end"
            } else if !(self.policy.cfl > 0.0 && self.policy.cfl <= 1.0) {
                "cfl"
            } else {
                "dt_min"
            };
            ConfigError::invalid(field, e.to_string())
        })?;
        if self.cadence == 0 {
            return Err(ConfigError::invalid("cadence", "cadence must be at least 1"));
        }
        if self.p_list.is_empty() {
            return Err(ConfigError::invalid("p_list", "p_list must not be empty"));
        }
        if let Some(p) = self.p_list.iter().find(|p| !(**p >= 2.0 && p.is_finite())) {
            return Err(ConfigError::invalid(
                "p_list",
                format!("entries must be finite and >= 2, got {p}"),
            ));
        }
        let pp = &self.preset_params;
        if !(pp.amplitude.is_finite() && pp.perturbation.is_finite() && pp.rho_mean.is_finite()) {
            return Err(ConfigError::invalid("init_amplitude", "initial-data parameters must be finite"));
        }
        if pp.kmax == 0 {
            return Err(ConfigError::invalid("init_kmax", "init_kmax must be at least 1"));
        }
        Ok(())
    }

    /// Creates the output directory and checks that it accepts files.
    pub fn prepare_output(&self) -> Result<(), ConfigError> {
        prepare_dir(&self.output_dir)
    }

    /// Fully resolved `key=value` echo, defaults included.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let (name, m, lambda) = match &self.forcing {
            ForcingSpec::CurlForced(f) => ("curl_forced", f.amplitude(), f.lambda()),
            other => (other.name(), 1.0, 0.5),
        };
        let p_list: Vec<String> = self.p_list.iter().map(|p| p.to_string()).collect();
        let pp = &self.preset_params;
        let lines: [(&str, String); 18] = [
            ("grid_n", self.grid_n.to_string()),
            ("cfl", self.policy.cfl.to_string()),
            ("dt_max", self.policy.dt_max.to_string()),
            ("dt_min", self.policy.dt_min.to_string()),
            ("t_end", self.policy.t_end.to_string()),
            ("preset", self.preset.to_string()),
            ("seed", self.seed.to_string()),
            ("init_amplitude", pp.amplitude.to_string()),
            ("init_perturbation", pp.perturbation.to_string()),
            ("init_kmax", pp.kmax.to_string()),
            ("rho_mean", pp.rho_mean.to_string()),
            ("forcing", name.to_string()),
            ("forcing_m", m.to_string()),
            ("forcing_lambda", lambda.to_string()),
            ("cadence", self.cadence.to_string()),
            ("p_list", p_list.join(",")),
            ("output_dir", self.output_dir.display().to_string()),
            ("nonzero_mean", self.nonzero_mean.to_string()),
        ];
        for (k, v) in lines {
            let _ = writeln!(s, "{k}={v}");
        }
        s
    }
}

fn prepare_dir(dir: &Path) -> Result<(), ConfigError> {
    let field = |e: std::io::Error| ConfigError::invalid("output_dir", format!("{}: {e}", dir.display()));
    std::fs::create_dir_all(dir).map_err(field)?;
    let probe = dir.join(".write_probe");
    std::fs::write(&probe, b"").map_err(field)?;
    std::fs::remove_file(&probe).map_err(field)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file_takes_defaults() {
        let cfg = parse_config("grid_n=64\nt_end=0.1\npreset=taylor-green\n").unwrap();
        assert_eq!(cfg.grid_n, 64);
        assert_eq!(cfg.policy.t_end, 0.1);
        assert_eq!(cfg.policy.cfl, 0.4);
        assert_eq!(cfg.p_list, vec![2.0, 4.0, 8.0, 16.0]);
        assert_eq!(cfg.forcing, ForcingSpec::Boussinesq);
        assert!(!cfg.nonzero_mean);
    }

    #[test]
    fn odd_grid_is_rejected_by_field() {
        let err = parse_config("grid_n=63\n").unwrap_err();
        assert_eq!(err, ConfigError::invalid("grid_n", "grid_n must be even"));
        assert!(err.to_string().contains("grid_n must be even"));
    }

    #[test]
    fn unknown_key_reports_line() {
        let err = parse_config("# header\ngrid_n=32\nviscosity=2\n").unwrap_err();
        assert!(matches!(err, ConfigError::Parse { line: 3, .. }), "{err:?}");
        assert!(err.to_string().contains("viscosity"));
    }

    #[test]
    fn malformed_lines() {
        assert!(matches!(parse_config("grid_n 32"), Err(ConfigError::Parse { line: 1, .. })));
        assert!(matches!(parse_config("grid_n=x"), Err(ConfigError::Parse { line: 1, .. })));
        assert!(matches!(
            parse_config("seed=1\nseed=2"),
            Err(ConfigError::Parse { line: 2, .. })
        ));
        assert!(parse_config("p_list=2,1").is_err());
        assert!(parse_config("forcing=wind").is_err());
        assert!(parse_config("t_end=-1").is_err());
        assert!(parse_config("cadence=0").is_err());
    }

    #[test]
    fn echo_round_trips() {
        let text = "grid_n=32\nforcing=curl_forced\nforcing_m=2\nforcing_lambda=0.25\np_list=2,6\nnonzero_mean=true # variant\n";
        let cfg = parse_config(text).unwrap();
        let again = parse_config(&cfg.to_text()).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(cfg.to_text().lines().count(), KEYS.len());
    }
}
