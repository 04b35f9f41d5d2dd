use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::matgen::ClusterSpec;
use crate::precision::PrecisionLevel;

/// Column count of the default desk-scale experiments.
pub const DESK_COLUMNS: usize = 64;

/// One experiment: a spectrum, a row count, a demotion level and how many
/// seeds to run.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    /// Cluster parameters; `spec.seed` is overwritten per trial.
    pub spec: ClusterSpec,
    pub m: usize,
    pub level: PrecisionLevel,
    pub trials: usize,
    /// Trial `k` uses seed `seed + k` for both the spectrum and the matrix.
    pub seed: u64,
    /// Evaluate the bounds even when the assumption gates fail.
    pub force_bounds: bool,
    /// Free-form label written to the summary (e.g. the figure name).
    pub label: String,
}

impl ExperimentConfig {
    pub fn n(&self) -> usize {
        self.spec.n()
    }

    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        if self.trials == 0 {
            return Err(Error::contract("ExperimentConfig", "trials must be at least 1"));
        }
        if self.m < self.n() {
            return Err(Error::contract(
                "ExperimentConfig",
                format!("m = {} is smaller than k1 + k2 = {}", self.m, self.n()),
            ));
        }
        Ok(())
    }

    /// The cluster parameters for trial `k`.
    pub fn trial_spec(&self, k: usize) -> ClusterSpec {
        ClusterSpec {
            seed: self.trial_seed(k),
            ..self.spec
        }
    }

    pub fn trial_seed(&self, k: usize) -> u64 {
        self.seed.wrapping_add(k as u64)
    }

    /// Shrinks a configuration to at most [`DESK_COLUMNS`] columns while
    /// keeping the aspect ratio and the share of the small cluster:
    /// `k2' = ⌈k2·64/n⌉`, `k1' = 64 − k2'`, `m' = round(m·64/n)`. Spectrum
    /// exponents are unchanged. Configurations that already fit are returned
    /// as they are.
    pub fn desk_scaled(&self) -> Self {
        let n = self.n();
        if n <= DESK_COLUMNS {
            return self.clone();
        }
        let k2 = (self.spec.k2 * DESK_COLUMNS).div_ceil(n);
        let k1 = DESK_COLUMNS - k2;
        let m = ((self.m * DESK_COLUMNS) as f64 / n as f64).round() as usize;
        Self {
            spec: ClusterSpec { k1, k2, ..self.spec },
            m: m.max(DESK_COLUMNS),
            ..self.clone()
        }
    }

    /// Parses the flat `key=value` format; `#` starts a comment.
    ///
    /// Required keys: `s1 d1 g d2 k1 k2 m level`. Optional: `trials`
    /// (default 1), `seed` (default 0), `label` (default `source_name`),
    /// `force` (default false).
    pub fn parse(text: &str, source_name: &str) -> Result<Self> {
        let raw = RawConfig::parse(text, source_name)?;
        let config = Self {
            spec: raw.spec()?,
            m: raw.m.ok_or_else(|| raw.missing("m"))?,
            level: raw.level.ok_or_else(|| raw.missing("level"))?,
            trials: raw.trials.unwrap_or(1),
            seed: raw.seed.unwrap_or(0),
            force_bounds: raw.force.unwrap_or(false),
            label: raw.label.clone().unwrap_or_else(|| source_name.to_string()),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let stem = path.file_stem().map_or_else(|| "experiment".into(), |s| s.to_string_lossy().into_owned());
        Self::parse(&text, &stem)
    }
}

/// Reads only the spectrum keys (`s1 d1 g d2 k1 k2`, optional `seed`) from a
/// configuration file; other known keys are accepted and ignored.
pub fn parse_cluster_spec(text: &str, source_name: &str) -> Result<ClusterSpec> {
    let spec = RawConfig::parse(text, source_name)?.spec()?;
    spec.validate()?;
    Ok(spec)
}

#[derive(Default)]
struct RawConfig {
    source_name: String,
    s1: Option<i32>,
    d1: Option<i32>,
    g: Option<i32>,
    d2: Option<i32>,
    k1: Option<usize>,
    k2: Option<usize>,
    m: Option<usize>,
    level: Option<PrecisionLevel>,
    trials: Option<usize>,
    seed: Option<u64>,
    label: Option<String>,
    force: Option<bool>,
}

impl RawConfig {
    fn parse(text: &str, source_name: &str) -> Result<Self> {
        let err = |line: usize, reason: String| Error::Parse {
            source_name: source_name.to_string(),
            line,
            reason,
        };
        let mut raw = RawConfig {
            source_name: source_name.to_string(),
            ..Default::default()
        };
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(line_no, format!("expected key=value, got `{line}`")))?;
            let (key, value) = (key.trim(), value.trim());
            let int = |v: &str| v.parse::<i32>().map_err(|_| err(line_no, format!("`{key}` needs an integer, got `{v}`")));
            let count =
                |v: &str| v.parse::<usize>().map_err(|_| err(line_no, format!("`{key}` needs a count, got `{v}`")));
            match key {
                "s1" => raw.s1 = Some(int(value)?),
                "d1" => raw.d1 = Some(int(value)?),
                "g" => raw.g = Some(int(value)?),
                "d2" => raw.d2 = Some(int(value)?),
                "k1" => raw.k1 = Some(count(value)?),
                "k2" => raw.k2 = Some(count(value)?),
                "m" => raw.m = Some(count(value)?),
                "trials" => raw.trials = Some(count(value)?),
                "seed" => {
                    raw.seed = Some(
                        value
                            .parse()
                            .map_err(|_| err(line_no, format!("`seed` needs an unsigned integer, got `{value}`")))?,
                    )
                }
                "level" => raw.level = Some(value.parse::<PrecisionLevel>().map_err(|e| err(line_no, e.to_string()))?),
                "label" => raw.label = Some(value.to_string()),
                "force" => {
                    raw.force = Some(match value {
                        "true" | "1" | "yes" => true,
                        "false" | "0" | "no" => false,
                        _ => return Err(err(line_no, format!("`force` needs true or false, got `{value}`"))),
                    })
                }
                other => return Err(err(line_no, format!("unknown key `{other}`"))),
            }
        }
        Ok(raw)
    }

    fn missing(&self, name: &str) -> Error {
        Error::Parse {
            source_name: self.source_name.clone(),
            line: 0,
            reason: format!("missing required key `{name}`"),
        }
    }

    fn spec(&self) -> Result<ClusterSpec> {
        Ok(ClusterSpec {
            s1: self.s1.ok_or_else(|| self.missing("s1"))?,
            g: self.g.ok_or_else(|| self.missing("g"))?,
            k1: self.k1.ok_or_else(|| self.missing("k1"))?,
            k2: self.k2.ok_or_else(|| self.missing("k2"))?,
            d1: self.d1.ok_or_else(|| self.missing("d1"))?,
            d2: self.d2.ok_or_else(|| self.missing("d2"))?,
            seed: self.seed.unwrap_or(0),
        })
    }
}
