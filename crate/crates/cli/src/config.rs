//! Run configuration: command-line flags over a JSON config file over
//! per-subcommand defaults.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use spinqec::HalfInt;

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Antipodal,
    Equatorial,
    Cyclic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorFamily {
    /// `e^{-iΘL3}`, `|Θ| <= theta-max`.
    EquatorialZ,
    /// Rotations about the equatorial axis at `phi0`, `|θ| <= theta-max`.
    ConjugatedY,
    /// The identity alone.
    Identity,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

/// Every setting is optional here; unset values fall through to the next layer.
#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Settings {
    /// JSON file with any of these settings (flags take precedence).
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Spin of the code.
    #[arg(long)]
    pub j: Option<HalfInt>,
    /// Logical dimension of the equatorial code.
    #[arg(long)]
    pub d: Option<usize>,
    /// Cyclic order (cyclic LLL code, full Landau code).
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub n: Option<usize>,
    /// Logical dimension of the finite GKP code.
    #[arg(long = "K")]
    #[serde(rename = "K")]
    pub k: Option<usize>,
    #[arg(long)]
    pub r1: Option<usize>,
    #[arg(long)]
    pub r2: Option<usize>,
    /// Largest error angle (radians).
    #[arg(long)]
    pub theta_max: Option<f64>,
    /// Off-diagonal threshold (kl-scan) or tail window radius (tail-check).
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Diagonal threshold (kl-scan) or ratio tolerance (tail-check).
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Largest harmonic level.
    #[arg(long)]
    pub lmax: Option<HalfInt>,
    /// Sampled errors (kl-scan) or Monte-Carlo runs per point (recovery-sweep).
    #[arg(long)]
    pub samples: Option<usize>,
    /// Grid points (overlap-curve, recovery-sweep, harmonics) or spins (tail-check).
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long, value_enum)]
    pub family: Option<Family>,
    #[arg(long, value_enum)]
    pub errors: Option<ErrorFamily>,
    /// Azimuth of the antipodal pair or of the error axis.
    #[arg(long)]
    pub phi0: Option<f64>,
    /// Azimuth of the harmonics table.
    #[arg(long)]
    pub phi: Option<f64>,
    /// Spin of a coherent-state ancilla (recovery-sweep); ideal ancilla when absent.
    #[arg(long)]
    pub j_anc: Option<HalfInt>,
}

macro_rules! overlay {
    ($top:expr, $base:expr; $($field:ident),*) => {
        Settings { config: None, $($field: $top.$field.or($base.$field)),* }
    };
}

impl Settings {
    /// Fields set in `self` win over `base`.
    pub fn over(self, base: Settings) -> Settings {
        overlay!(self, base; j, d, n, k, r1, r2, theta_max, epsilon, delta, seed, out, format,
            lmax, samples, steps, family, errors, phi0, phi, j_anc)
    }

    pub fn from_file(path: &Path) -> Result<Settings, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Invalid(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Invalid(format!("bad config {}: {e}", path.display())))
    }

    /// Flags, then the config file they name, then `defaults`.
    pub fn resolve(self, defaults: Settings) -> Result<Settings, CliError> {
        let file = match &self.config {
            Some(p) => Settings::from_file(p)?,
            None => Settings::default(),
        };
        Ok(self.over(file).over(defaults))
    }
}

/// The fully resolved settings of one run, echoed into every output.
/// Unset fields are omitted.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub subcommand: &'static str,
    pub settings: Settings,
}

impl Serialize for RunConfig {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = match serde_json::to_value(&self.settings).map_err(serde::ser::Error::custom)? {
            serde_json::Value::Object(map) => map,
            _ => unreachable!("settings serialize as a map"),
        };
        map.retain(|_, v| !v.is_null());
        map.insert("subcommand".into(), self.subcommand.into());
        map.serialize(serializer)
    }
}

impl RunConfig {
    pub fn new(subcommand: &'static str, mut settings: Settings) -> Self {
        // The output location does not affect the content.
        settings.out = None;
        RunConfig { subcommand, settings }
    }
}

/// Fetch a required setting after defaults have been applied.
pub fn need<T: Copy>(value: Option<T>, name: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::Invalid(format!("--{name} is required")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence() {
        let flags = Settings { j: Some(HalfInt::integer(4)), ..Default::default() };
        let file: Settings = serde_json::from_str(r#"{"j": 2, "d": 3, "N": 5}"#).unwrap();
        let defaults = Settings { j: Some(HalfInt::integer(1)), d: Some(2), seed: Some(7), ..Default::default() };
        let s = flags.over(file).over(defaults);
        assert_eq!(s.j, Some(HalfInt::integer(4)));
        assert_eq!(s.d, Some(3));
        assert_eq!(s.n, Some(5));
        assert_eq!(s.seed, Some(7));
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(serde_json::from_str::<Settings>(r#"{"jj": 2}"#).is_err());
        let s: Settings = serde_json::from_str(r#"{"theta-max": 0.5, "family": "equatorial", "j": "3/2"}"#).unwrap();
        assert_eq!(s.theta_max, Some(0.5));
        assert_eq!(s.family, Some(Family::Equatorial));
        assert_eq!(s.j, Some(HalfInt::from_twice(3)));
    }
}
