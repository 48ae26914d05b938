//! Monte Carlo experiments over SNR grids.
//!
//! Trial `t` always draws its channels from the same substream of the
//! experiment seed, whatever the SNR point, scheme or thread count, so every
//! scheme and every grid point sees the same fading sequence. Trials are
//! grouped into fixed batches whose tallies are merged in batch order.

mod engine;
mod output;
mod presets;
mod tally;

use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};
use crate::fading::{FadingConfig, PowerConfig};
use crate::power::AdaptParams;
use crate::schemes::{Scheme, SelectionRule, TrialContext};

pub use engine::{run, run_point, BATCH_SIZE};
pub use output::{Curve, CurvePoint, Manifest, RunOutput, CSV_HEADER};
pub use presets::{preset, preset_ids, PRESETS};
pub use tally::{aggregate, to_fixed, from_fixed, Tally};

/// What a curve measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Outage,
    AvgSumRate,
    Ser,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Outage => "outage",
            Metric::AvgSumRate => "avg_sum_rate",
            Metric::Ser => "ser",
        }
    }
}

/// How system outage is estimated from the trials.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum OutageEstimator {
    /// Fraction of trials in outage.
    Direct,
    /// Product of per-relay outage fractions. The selected relay carries the
    /// largest end-to-end rate and relays fade independently, so the system
    /// is in outage exactly when every relay is; estimating each factor from
    /// all trials reaches outage levels far below `1/trials`. Relays with
    /// identical statistics are pooled.
    #[default]
    RelayProduct,
}

/// Adaptive trial counts per grid point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrialPolicy {
    pub min_trials: u64,
    pub max_trials: u64,
    /// Events (outages or symbol errors) every scheme must collect before a
    /// point stops early.
    pub min_events: u64,
}

impl Default for TrialPolicy {
    fn default() -> Self {
        TrialPolicy {
            min_trials: 10_000,
            max_trials: 10_000_000,
            min_events: 100,
        }
    }
}

impl TrialPolicy {
    pub fn fixed(trials: u64) -> Self {
        TrialPolicy {
            min_trials: trials,
            max_trials: trials,
            min_events: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.min_trials == 0 {
            return Err(Error::config("min_trials must be at least 1"));
        }
        if self.max_trials < self.min_trials {
            return Err(Error::config(format!(
                "max_trials {} is below min_trials {}",
                self.max_trials, self.min_trials
            )));
        }
        Ok(())
    }
}

/// One network configuration of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Variant {
    pub label: String,
    pub fading: FadingConfig,
}

/// A complete, reproducible experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Experiment {
    pub id: String,
    pub metric: Metric,
    /// Grid in dB: a list or a `start:step:stop` string.
    #[serde(deserialize_with = "de_grid")]
    pub snr_db: Vec<f64>,
    pub schemes: Vec<Scheme>,
    pub variants: Vec<Variant>,
    #[serde(default = "one")]
    pub target_rate: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub selection: SelectionRule,
    /// Iteration settings of power adaptation; each scheme sets the mode.
    #[serde(default)]
    pub adapt: AdaptParams,
    #[serde(default = "yes")]
    pub normalize_outage: bool,
    #[serde(default)]
    pub policy: TrialPolicy,
    #[serde(default)]
    pub estimator: OutageEstimator,
    /// Relay power as a multiple of the user power.
    #[serde(default = "one")]
    pub relay_power_ratio: f64,
    /// Receiver noise variance of the symbol simulation.
    #[serde(default = "one")]
    pub noise_var: f64,
}

fn one() -> f64 {
    1.0
}

fn yes() -> bool {
    true
}

#[derive(Deserialize)]
#[serde(untagged)]
enum GridSpec {
    List(Vec<f64>),
    Range(String),
}

fn de_grid<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<f64>, D::Error> {
    match GridSpec::deserialize(d)? {
        GridSpec::List(v) => Ok(v),
        GridSpec::Range(s) => parse_grid(&s).map_err(serde::de::Error::custom),
    }
}

/// Parses `start:step:stop` into `start, start + step, …` up to `stop`.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, st, b] = parts.as_slice() else {
        return Err(Error::Parse(format!("grid {s:?} is not start:step:stop")));
    };
    let num = |x: &str| {
        x.trim()
            .parse::<f64>()
            .map_err(|e| Error::Parse(format!("bad number {x:?} in grid {s:?}: {e}")))
    };
    let (a, st, b) = (num(a)?, num(st)?, num(b)?);
    if !(a.is_finite() && b.is_finite() && st.is_finite() && st > 0.0) {
        return Err(Error::Parse(format!("grid {s:?} needs finite bounds and a positive step")));
    }
    if b < a {
        return Err(Error::Parse(format!("grid {s:?} ends before it starts")));
    }
    let n = ((b - a) / st + 1e-9).floor() as usize;
    if n > 100_000 {
        return Err(Error::Parse(format!("grid {s:?} has too many points")));
    }
    Ok((0..=n).map(|k| a + k as f64 * st).collect())
}

impl Experiment {
    pub fn validate(&self) -> Result<()> {
        if self.id.is_empty() || !self.id.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
            return Err(Error::config(format!(
                "experiment id {:?} must be nonempty ASCII letters, digits, '_' or '-'",
                self.id
            )));
        }
        if self.snr_db.is_empty() {
            return Err(Error::config("snr grid is empty"));
        }
        if self.snr_db.iter().any(|x| !x.is_finite()) {
            return Err(Error::config("snr grid contains a non-finite value"));
        }
        if self.snr_db.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::config("snr grid must be strictly increasing"));
        }
        if self.schemes.is_empty() {
            return Err(Error::config("no schemes selected"));
        }
        for (i, s) in self.schemes.iter().enumerate() {
            if self.schemes[..i].contains(s) {
                return Err(Error::config(format!("scheme {s} listed twice")));
            }
        }
        if self.metric == Metric::Ser {
            if let Some(s) = self.schemes.iter().find(|s| **s == Scheme::Df3) {
                return Err(Error::config(format!("scheme {s} has no symbol simulation")));
            }
        }
        if self.variants.is_empty() {
            return Err(Error::config("no variants defined"));
        }
        for (i, v) in self.variants.iter().enumerate() {
            v.fading.validate()?;
            if v.label.is_empty() || v.label.contains([',', '"', '\n', '@']) {
                return Err(Error::config(format!("variant label {:?} is empty or has reserved characters", v.label)));
            }
            if self.variants[..i].iter().any(|w| w.label == v.label) {
                return Err(Error::config(format!("variant label {:?} used twice", v.label)));
            }
        }
        if !(self.relay_power_ratio.is_finite() && self.relay_power_ratio >= 1.0) {
            return Err(Error::config(format!(
                "relay_power_ratio must be at least 1, got {}",
                self.relay_power_ratio
            )));
        }
        if !(self.noise_var.is_finite() && self.noise_var >= 0.0) {
            return Err(Error::config(format!("noise_var must be nonnegative, got {}", self.noise_var)));
        }
        self.policy.validate()?;
        self.context(self.snr_db[0]).validate()
    }

    /// Powers at one grid point: both users at `10^(snr/10)`.
    pub fn powers(&self, snr_db: f64) -> PowerConfig {
        let mut p = PowerConfig::from_snr_db(snr_db);
        p.pr *= self.relay_power_ratio;
        p
    }

    pub fn context(&self, snr_db: f64) -> TrialContext {
        TrialContext {
            powers: self.powers(snr_db),
            target_rate: self.target_rate,
            selection: self.selection,
            adapt: self.adapt,
            normalize_outage: self.normalize_outage,
        }
    }

    /// CSV series name of a scheme within a variant.
    pub fn series(&self, name: &str, variant: &Variant) -> String {
        if self.variants.len() > 1 {
            format!("{name}@{}", variant.label)
        } else {
            name.to_string()
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let exp: Experiment = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        exp.validate()?;
        Ok(exp)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }
}
