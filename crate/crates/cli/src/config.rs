//! Experiment configuration: presets, config files and flag overrides,
//! resolved into one validated [`ExperimentConfig`].

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use qpolar::montecarlo::DEFAULT_TRIALS;
use qpolar::ChannelKind;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot parse config {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("unknown preset `{0}` (known: {known})", known = PRESETS.join(", "))]
    UnknownPreset(String),
    #[error("missing key `{0}`: give it in the config file or use a preset")]
    Missing(&'static str),
    #[error("invalid value for `{key}`: {message}")]
    Invalid { key: &'static str, message: String },
}

fn bad<T>(key: &'static str, message: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError::Invalid { key, message: message.into() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    Construct,
    Bounds,
    Simulate,
    Threshold,
}

impl CommandKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            CommandKind::Construct => "construct",
            CommandKind::Bounds => "bounds",
            CommandKind::Simulate => "simulate",
            CommandKind::Threshold => "threshold",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Svg,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "csv" => Ok(OutputFormat::Csv),
            "svg" => Ok(OutputFormat::Svg),
            other => Err(format!("unknown output format `{other}` (expected csv or svg)")),
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Svg => "svg",
        })
    }
}

/// Rates used at one blocklength instead of the shared list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateOverride {
    pub blocklength: usize,
    pub rates: Vec<f64>,
}

/// A fully resolved experiment.
///
/// `rates` means classical phase rates for `construct` (the amplitude rate
/// is `ratio` times it) and quantum rates for `bounds` and `simulate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: CommandKind,
    pub preset: Option<String>,
    pub channel: ChannelKind,
    pub parameters: Vec<f64>,
    pub blocklengths: Vec<usize>,
    pub rates: Vec<f64>,
    pub rate_overrides: Vec<RateOverride>,
    /// Block error target for thresholds and bound crossings.
    pub target: f64,
    /// Amplitude-to-phase classical rate ratio; channel default when absent.
    pub ratio: Option<f64>,
    pub strict: bool,
    pub profile_only: bool,
    pub trials: u64,
    pub seed: u64,
    pub out: PathBuf,
    pub formats: Vec<OutputFormat>,
    /// Notes on grid values that are estimates rather than exact.
    pub best_effort: Vec<String>,
}

/// Every key optional; layered as preset, then file, then flags.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialConfig {
    pub command: Option<CommandKind>,
    pub preset: Option<String>,
    pub channel: Option<ChannelKind>,
    pub parameters: Option<Vec<f64>>,
    pub blocklengths: Option<Vec<usize>>,
    pub rates: Option<Vec<f64>>,
    pub rate_overrides: Option<Vec<RateOverride>>,
    pub target: Option<f64>,
    pub ratio: Option<f64>,
    pub strict: Option<bool>,
    pub profile_only: Option<bool>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub formats: Option<Vec<OutputFormat>>,
    pub best_effort: Option<Vec<String>>,
}

macro_rules! layer {
    ($self:ident, $other:ident, $($field:ident),*) => {
        $( if $other.$field.is_some() { $self.$field = $other.$field; } )*
    };
}

impl PartialConfig {
    pub fn overlay(&mut self, other: PartialConfig) {
        layer!(
            self, other, command, preset, channel, parameters, blocklengths, rates, rate_overrides, target, ratio,
            strict, profile_only, trials, seed, out, formats, best_effort
        );
    }

    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.into(), source })?;
        let parsed = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| e.to_string())
        } else {
            toml::from_str(&text).map_err(|e| e.to_string())
        };
        parsed.map_err(|message| ConfigError::Parse { path: path.into(), message })
    }

    pub fn resolve(self) -> Result<ExperimentConfig, ConfigError> {
        let config = ExperimentConfig {
            command: self.command.ok_or(ConfigError::Missing("command"))?,
            preset: self.preset,
            channel: self.channel.ok_or(ConfigError::Missing("channel"))?,
            parameters: self.parameters.ok_or(ConfigError::Missing("parameters"))?,
            blocklengths: self.blocklengths.ok_or(ConfigError::Missing("blocklengths"))?,
            rates: self.rates.unwrap_or_default(),
            rate_overrides: self.rate_overrides.unwrap_or_default(),
            target: self.target.unwrap_or(1e-4),
            ratio: self.ratio,
            strict: self.strict.unwrap_or(false),
            profile_only: self.profile_only.unwrap_or(false),
            trials: self.trials.unwrap_or(DEFAULT_TRIALS),
            seed: self.seed.unwrap_or(0),
            out: self.out.unwrap_or_else(|| PathBuf::from("out")),
            formats: self.formats.unwrap_or_else(|| vec![OutputFormat::Csv]),
            best_effort: self.best_effort.unwrap_or_default(),
        };
        config.validate()?;
        Ok(config)
    }
}

const MAX_LOG_BLOCKLENGTH: u32 = 24;

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let unit = |x: &f64| (0.0..=1.0).contains(x);
        if !self.parameters.iter().all(unit) {
            return bad("parameters", "channel parameters must lie in [0, 1]");
        }
        for &n in self.blocklengths.iter().chain(self.rate_overrides.iter().map(|o| &o.blocklength)) {
            if !n.is_power_of_two() || n > 1 << MAX_LOG_BLOCKLENGTH {
                return bad("blocklengths", format!("{n} is not a power of two up to 2^{MAX_LOG_BLOCKLENGTH}"));
            }
        }
        if !self.rates.iter().all(unit) || !self.rate_overrides.iter().flat_map(|o| &o.rates).all(unit) {
            return bad("rates", "rates must lie in [0, 1]");
        }
        if !(self.target > 0.0 && self.target < 1.0) {
            return bad("target", format!("{} is outside (0, 1)", self.target));
        }
        if let Some(r) = self.ratio {
            if !(r > 0.0 && r <= 1.0) {
                return bad("ratio", format!("{r} is outside (0, 1]"));
            }
        }
        if self.trials == 0 {
            return bad("trials", "need at least one trial");
        }
        if self.formats.is_empty() {
            return bad("formats", "no output format selected");
        }
        if matches!(self.command, CommandKind::Construct | CommandKind::Simulate)
            && self.rates.is_empty()
            && self.rate_overrides.is_empty()
            && !self.profile_only
        {
            return bad("rates", format!("`{}` needs at least one rate", self.command.as_str()));
        }
        Ok(())
    }

    /// Rates used at blocklength `n`.
    pub fn rates_for(&self, n: usize) -> &[f64] {
        self.rate_overrides.iter().find(|o| o.blocklength == n).map_or(&self.rates, |o| &o.rates)
    }

    /// Pretty JSON with a fixed key order; parsing it back gives `self`.
    pub fn canonical(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    #[cfg(test)]
    pub fn from_canonical(text: &str) -> Result<Self, ConfigError> {
        let config: Self = serde_json::from_str(text)
            .map_err(|e| ConfigError::Parse { path: PathBuf::from("<canonical>"), message: e.to_string() })?;
        config.validate()?;
        Ok(config)
    }

    pub fn wants(&self, format: OutputFormat) -> bool {
        self.formats.contains(&format)
    }
}

pub const PRESETS: [&str; 10] = ["smoke", "fig1", "fig2", "fig3", "fig4a", "fig4b", "fig5a", "fig5b", "fig6", "minimal"];

/// `first, first + step, ...` up to `last`, in thousandths to keep the
/// printed values short.
fn grid(first: u32, last: u32, step: u32) -> Vec<f64> {
    (first..=last).step_by(step as usize).map(|m| m as f64 / 1000.0).collect()
}

const SIM_BLOCKLENGTHS: [usize; 3] = [64, 256, 1024];

pub fn preset(name: &str) -> Result<PartialConfig, ConfigError> {
    let mut p = PartialConfig { preset: Some(name.to_string()), ..Default::default() };
    match name {
        "smoke" => {
            p.command = Some(CommandKind::Simulate);
            p.channel = Some(ChannelKind::Erasure);
            p.parameters = Some(vec![0.1, 0.2]);
            p.blocklengths = Some(vec![16, 64]);
            p.rates = Some(vec![0.25, 0.4]);
            p.target = Some(1e-2);
            p.trials = Some(500);
            p.seed = Some(1);
        }
        "minimal" => {
            p.command = Some(CommandKind::Construct);
            p.channel = Some(ChannelKind::Erasure);
            p.parameters = Some(vec![0.25]);
            p.blocklengths = Some(vec![2]);
            p.rates = Some(vec![0.5]);
        }
        "fig1" => {
            p.command = Some(CommandKind::Bounds);
            p.channel = Some(ChannelKind::Erasure);
            p.parameters = Some(vec![0.15]);
            p.blocklengths = Some((10..=20).step_by(2).map(|e| 1usize << e).collect());
            p.rates = Some(grid(10, 1000, 10));
            p.best_effort = Some(vec![
                "quantum rate grid 0.01 to 1.00 in steps of 0.01".into(),
                "each rate uses the smallest classical dimension whose quantum info set reaches ceil(R*N); R_Q is the achieved rate".into(),
            ]);
        }
        "fig2" => {
            p.command = Some(CommandKind::Construct);
            p.channel = Some(ChannelKind::Erasure);
            p.parameters = Some(vec![0.15]);
            p.blocklengths = Some(vec![8]);
            p.rates = Some(vec![0.75]);
        }
        "fig3" => {
            p.command = Some(CommandKind::Simulate);
            p.channel = Some(ChannelKind::Erasure);
            p.parameters = Some(vec![0.15]);
            p.blocklengths = Some(SIM_BLOCKLENGTHS.to_vec());
            p.rates = Some(grid(100, 650, 50));
            p.best_effort = Some(vec!["quantum rate grid 0.10 to 0.65 in steps of 0.05".into()]);
        }
        "fig4a" => {
            p.command = Some(CommandKind::Simulate);
            p.channel = Some(ChannelKind::Erasure);
            p.parameters = Some(grid(50, 300, 25));
            p.blocklengths = Some(SIM_BLOCKLENGTHS.to_vec());
            p.rates = Some(vec![0.398]);
            p.rate_overrides = Some(vec![RateOverride { blocklength: 64, rates: vec![0.375] }]);
            p.best_effort = Some(vec!["erasure probability grid 0.050 to 0.300 in steps of 0.025".into()]);
        }
        "fig4b" => {
            p.command = Some(CommandKind::Threshold);
            p.channel = Some(ChannelKind::Erasure);
            p.parameters = Some(grid(20, 240, 20));
            p.blocklengths = Some(SIM_BLOCKLENGTHS.to_vec());
            p.rates = Some(vec![0.398]);
            p.best_effort = Some(vec!["erasure probability grid 0.02 to 0.24 in steps of 0.02".into()]);
        }
        "fig5a" => {
            p.command = Some(CommandKind::Simulate);
            p.channel = Some(ChannelKind::Depolarizing);
            p.parameters = Some(grid(10, 100, 10));
            p.blocklengths = Some(SIM_BLOCKLENGTHS.to_vec());
            p.rates = Some(vec![0.30]);
            p.best_effort = Some(vec!["depolarizing probability grid 0.01 to 0.10 in steps of 0.01".into()]);
        }
        "fig5b" => {
            p.command = Some(CommandKind::Threshold);
            p.channel = Some(ChannelKind::Depolarizing);
            p.parameters = Some(grid(10, 140, 10));
            p.blocklengths = Some(SIM_BLOCKLENGTHS.to_vec());
            p.rates = Some(vec![0.30]);
            p.best_effort = Some(vec!["depolarizing probability grid 0.01 to 0.14 in steps of 0.01".into()]);
        }
        "fig6" => {
            p.command = Some(CommandKind::Threshold);
            p.channel = Some(ChannelKind::Bb84);
            p.parameters = Some(grid(10, 100, 10));
            p.blocklengths = Some(SIM_BLOCKLENGTHS.to_vec());
            p.rates = Some(vec![0.30]);
            p.best_effort = Some(vec!["flip probability grid 0.01 to 0.10 in steps of 0.01".into()]);
        }
        other => return Err(ConfigError::UnknownPreset(other.to_string())),
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_resolve_and_round_trip() {
        for name in PRESETS {
            let c = preset(name).unwrap().resolve().unwrap();
            assert_eq!(ExperimentConfig::from_canonical(&c.canonical()).unwrap(), c, "{name}");
        }
    }

    #[test]
    fn fig4a_rates_per_blocklength() {
        let c = preset("fig4a").unwrap().resolve().unwrap();
        assert_eq!(c.rates_for(64), &[0.375]);
        assert_eq!(c.rates_for(256), &[0.398]);
        assert_eq!(c.rates_for(1024), &[0.398]);
        assert!(c.canonical().contains("0.398"));
    }

    #[test]
    fn fig1_blocklengths() {
        let c = preset("fig1").unwrap().resolve().unwrap();
        assert_eq!(c.blocklengths, vec![1 << 10, 1 << 12, 1 << 14, 1 << 16, 1 << 18, 1 << 20]);
        assert_eq!(c.rates.len(), 100);
        assert_eq!(c.rates[0], 0.01);
    }

    #[test]
    fn later_layers_win() {
        let mut p = preset("fig2").unwrap();
        p.overlay(PartialConfig { seed: Some(9), rates: Some(vec![0.5]), ..Default::default() });
        let c = p.resolve().unwrap();
        assert_eq!((c.seed, c.rates.clone()), (9, vec![0.5]));
        assert_eq!(c.blocklengths, vec![8]);
    }

    #[test]
    fn errors_name_the_key() {
        let mut p = preset("fig2").unwrap();
        p.overlay(PartialConfig { blocklengths: Some(vec![12]), ..Default::default() });
        assert!(p.resolve().unwrap_err().to_string().contains("`blocklengths`"));
        let mut p = preset("fig4b").unwrap();
        p.overlay(PartialConfig { target: Some(0.0), ..Default::default() });
        assert!(p.resolve().unwrap_err().to_string().contains("`target`"));
        let p = PartialConfig { command: Some(CommandKind::Bounds), ..Default::default() };
        assert!(p.resolve().unwrap_err().to_string().contains("`channel`"));
        assert!(matches!(preset("fig9"), Err(ConfigError::UnknownPreset(_))));
    }

    #[test]
    fn toml_file_keys() {
        let text = r#"
            command = "construct"
            channel = "depolarizing"
            parameters = [0.1]
            blocklengths = [16]
            rates = [0.5]
            ratio = 0.82
        "#;
        let p: PartialConfig = toml::from_str(text).unwrap();
        let c = p.resolve().unwrap();
        assert_eq!(c.channel, ChannelKind::Depolarizing);
        assert_eq!(c.ratio, Some(0.82));
        let unknown: Result<PartialConfig, _> = toml::from_str("sed = 3");
        assert!(unknown.unwrap_err().to_string().contains("sed"));
    }
}
