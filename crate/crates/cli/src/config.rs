//! Run configuration read from JSON.

use std::fmt;
use std::path::{Path, PathBuf};

use mfg1d::{CouplingSpec, PotentialSpec, Variant};
use serde::Deserialize;

pub const DEFAULT_N: usize = 4096;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub potential: PotentialSpec,
    pub coupling: CouplingSpec,
    pub mode: Mode,
    #[serde(rename = "N", default = "default_n")]
    pub n: usize,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

fn default_n() -> usize {
    DEFAULT_N
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Mode {
    Solve {
        #[serde(default)]
        j: Option<f64>,
        #[serde(default)]
        p: Option<f64>,
        #[serde(default)]
        variant: Option<Variant>,
    },
    Sweep {
        #[serde(default)]
        j_range: Option<[f64; 2]>,
        #[serde(default)]
        p_range: Option<[f64; 2]>,
        samples: usize,
        #[serde(default)]
        spacing: Spacing,
    },
    Regimes,
    Elliptic {
        #[serde(default)]
        eps: Option<f64>,
        #[serde(default)]
        eps_list: Option<Vec<f64>>,
        j: f64,
        #[serde(rename = "N", default)]
        n: Option<usize>,
    },
    Check {
        input: PathBuf,
    },
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Solve { .. } => "solve",
            Mode::Sweep { .. } => "sweep",
            Mode::Regimes => "regimes",
            Mode::Elliptic { .. } => "elliptic",
            Mode::Check { .. } => "check",
        }
    }
}

/// A problem with the configuration, located by file position or field.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub location: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(location: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError {
            location: location.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.location, self.message)
    }
}

/// Parses JSON, reporting the failing field path and line.
pub fn parse<T: serde::de::DeserializeOwned>(text: &str, source: &Path) -> Result<T, ConfigError> {
    let mut de = serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let inner = e.inner();
        let field = e.path().to_string();
        let location = if field == "." || field.is_empty() {
            format!("{}:{}:{}", source.display(), inner.line(), inner.column())
        } else {
            format!("{}:{}:{}: field `{}`", source.display(), inner.line(), inner.column(), field)
        };
        ConfigError::new(location, inner.to_string())
    })
}

fn finite(field: &str, x: f64) -> Result<(), ConfigError> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::new(format!("field `{field}`"), format!("must be finite, got {x}")))
    }
}

fn check_grid(field: &str, n: usize) -> Result<(), ConfigError> {
    if n >= 64 && n.is_power_of_two() {
        Ok(())
    } else {
        Err(ConfigError::new(
            format!("field `{field}`"),
            format!("must be a power of two no smaller than 64, got {n}"),
        ))
    }
}

fn check_range(field: &str, range: [f64; 2], samples: usize, spacing: Spacing) -> Result<(), ConfigError> {
    let [a, b] = range;
    finite(field, a)?;
    finite(field, b)?;
    if !(a < b) {
        return Err(ConfigError::new(format!("field `{field}`"), format!("range [{a}, {b}] is empty")));
    }
    if samples < 2 {
        return Err(ConfigError::new("field `mode.samples`", "a range needs at least 2 samples"));
    }
    if spacing == Spacing::Log && a <= 0.0 {
        return Err(ConfigError::new(
            format!("field `{field}`"),
            "logarithmic spacing needs a positive range",
        ));
    }
    Ok(())
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        check_grid("N", self.n)?;
        match &self.mode {
            Mode::Solve { j, p, .. } => match (j, p) {
                (Some(j), None) => finite("mode.j", *j),
                (None, Some(p)) => finite("mode.p", *p),
                _ => Err(ConfigError::new("field `mode`", "solve needs exactly one of `j` and `p`")),
            },
            Mode::Sweep {
                j_range,
                p_range,
                samples,
                spacing,
            } => match (j_range, p_range) {
                (Some(r), None) => check_range("mode.j_range", *r, *samples, *spacing),
                (None, Some(r)) => check_range("mode.p_range", *r, *samples, *spacing),
                _ => Err(ConfigError::new(
                    "field `mode`",
                    "sweep needs exactly one of `j_range` and `p_range`",
                )),
            },
            Mode::Regimes => Ok(()),
            Mode::Elliptic { eps, eps_list, j, n } => {
                finite("mode.j", *j)?;
                if let Some(n) = n {
                    check_grid("mode.N", *n)?;
                }
                let list = match (eps, eps_list) {
                    (Some(e), None) => vec![*e],
                    (None, Some(l)) if !l.is_empty() => l.clone(),
                    _ => {
                        return Err(ConfigError::new(
                            "field `mode`",
                            "elliptic needs exactly one of `eps` and a non-empty `eps_list`",
                        ))
                    }
                };
                for e in list {
                    if !(e.is_finite() && e > 0.0) {
                        return Err(ConfigError::new("field `mode.eps`", format!("must be positive, got {e}")));
                    }
                }
                Ok(())
            }
            Mode::Check { .. } => Ok(()),
        }
    }

    /// Sample points of a sweep, in increasing order.
    pub fn sweep_samples(range: [f64; 2], samples: usize, spacing: Spacing) -> Vec<f64> {
        let [a, b] = range;
        let last = (samples - 1) as f64;
        (0..samples)
            .map(|k| {
                let t = k as f64 / last;
                match spacing {
                    Spacing::Linear => a + (b - a) * t,
                    Spacing::Log => (a.ln() + (b.ln() - a.ln()) * t).exp(),
                }
            })
            .collect()
    }
}
