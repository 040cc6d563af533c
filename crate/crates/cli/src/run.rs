//! The four data-producing commands. Every file goes through [`Outputs`],
//! which records its checksum for the manifest.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use qpolar::bounds::{write_bounds_csv, BoundCurve};
use qpolar::montecarlo::{
    code_for_quantum_rate, default_rate_ratio, dimensions_for, simulate_code, threshold_rate_with, SearchOptions,
};
use qpolar::{CodeDesign, Execution, QuantumChannelSpec, QuantumPolarCode};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{CommandKind, ExperimentConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputFile {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug)]
pub struct Outputs {
    dir: PathBuf,
    files: Vec<OutputFile>,
}

impl Outputs {
    pub fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))?;
        Ok(Self { dir: dir.to_path_buf(), files: Vec::new() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        self.files.push(OutputFile {
            path: name.to_string(),
            sha256: hex::encode(Sha256::digest(bytes)),
            bytes: bytes.len() as u64,
        });
        Ok(())
    }

    pub fn write_rows<T: Serialize>(&mut self, name: &str, header: &[&str], rows: &[T]) -> Result<()> {
        // Header written by hand so an empty table still has one.
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
        w.write_record(header)?;
        for row in rows {
            w.serialize(row)?;
        }
        let bytes = w.into_inner().map_err(|e| anyhow::anyhow!("flushing csv: {e}"))?;
        self.write(name, &bytes)
    }

    pub fn files(&self) -> &[OutputFile] {
        &self.files
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub created: String,
    pub config: ExperimentConfig,
    pub outputs: Vec<OutputFile>,
}

pub fn write_manifest(config: &ExperimentConfig, outputs: &Outputs, label: &str) -> Result<PathBuf> {
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        created: chrono::Utc::now().to_rfc3339(),
        config: config.clone(),
        outputs: outputs.files().to_vec(),
    };
    let path = outputs.dir().join(format!("manifest_{label}.json"));
    fs::write(&path, serde_json::to_string_pretty(&manifest)?)?;
    Ok(path)
}

pub fn run(config: &ExperimentConfig, outputs: &mut Outputs) -> Result<()> {
    match config.command {
        CommandKind::Construct => construct(config, outputs),
        CommandKind::Bounds => bounds(config, outputs),
        CommandKind::Simulate => simulate(config, outputs),
        CommandKind::Threshold => threshold(config, outputs),
    }
}

fn specs(config: &ExperimentConfig) -> Result<Vec<QuantumChannelSpec>> {
    config.parameters.iter().map(|&x| Ok(QuantumChannelSpec::new(config.channel, x)?)).collect()
}

fn ratio_for(config: &ExperimentConfig, spec: &QuantumChannelSpec) -> f64 {
    config.ratio.unwrap_or_else(|| default_rate_ratio(spec))
}

pub fn profile_file(spec: &QuantumChannelSpec, n: usize, branch: &str) -> String {
    format!("profile_{}_{}_N{n}_{branch}.csv", spec.kind(), spec.parameter())
}

pub fn partition_file(spec: &QuantumChannelSpec, n: usize, rate: f64) -> String {
    format!("partition_{}_{}_N{n}_R{rate}.csv", spec.kind(), spec.parameter())
}

pub fn bounds_file(epsilon: f64, n: usize) -> String {
    format!("bounds_eps{epsilon}_N{n}.csv")
}

pub const CODES_FILE: &str = "codes.csv";
pub const CROSSING_FILE: &str = "bounds_crossing.csv";
pub const SIMULATE_FILE: &str = "simulate.csv";
pub const THRESHOLD_FILE: &str = "threshold.csv";

#[derive(Debug, Serialize)]
struct CodeRow {
    channel_kind: &'static str,
    parameter: f64,
    n: usize,
    rate: f64,
    r_c_amp: f64,
    r_c_ph: f64,
    r_q: f64,
    net_rate: f64,
    information: usize,
    amp_frozen: usize,
    phase_frozen: usize,
    ebit: usize,
}

const CODE_HEADER: [&str; 12] = [
    "channel_kind",
    "parameter",
    "N",
    "rate",
    "R_C_amp",
    "R_C_ph",
    "R_Q",
    "net_rate",
    "information",
    "amp_frozen",
    "phase_frozen",
    "ebit",
];

#[derive(Debug, Serialize)]
struct PartitionRow {
    index: usize,
    class: &'static str,
    amp_z: f64,
    phase_z: f64,
    amp_good: bool,
    phase_good: bool,
}

const PARTITION_HEADER: [&str; 6] = ["index", "class", "amp_z", "phase_z", "amp_good", "phase_good"];

fn write_profile(outputs: &mut Outputs, name: &str, profile: &qpolar::ReliabilityProfile) -> Result<()> {
    let mut buf = Vec::new();
    profile.write_csv(&mut buf)?;
    outputs.write(name, &buf)
}

fn construct(config: &ExperimentConfig, outputs: &mut Outputs) -> Result<()> {
    let mut summary = Vec::new();
    for spec in specs(config)? {
        for &n in &config.blocklengths {
            let design = CodeDesign::new(spec, n)?;
            write_profile(outputs, &profile_file(&spec, n, "amplitude"), design.amp_profile())?;
            write_profile(outputs, &profile_file(&spec, n, "phase"), design.phase_profile())?;
            if config.profile_only {
                continue;
            }
            let ratio = ratio_for(config, &spec);
            for &rate in config.rates_for(n) {
                let (ka, kp) = dimensions_for((rate * n as f64).round() as usize, ratio);
                let code = design.code(ka, kp)?;
                summary.push(code_row(&spec, rate, &code));
                let rows: Vec<PartitionRow> = (1..=n)
                    .map(|i| PartitionRow {
                        index: i,
                        class: code.class_of(i).as_str(),
                        amp_z: design.amp_profile().z(i),
                        phase_z: design.phase_profile().z(n + 1 - i),
                        amp_good: code.amp_good.contains(i),
                        phase_good: code.phase_good.contains(i),
                    })
                    .collect();
                outputs.write_rows(&partition_file(&spec, n, rate), &PARTITION_HEADER, &rows)?;
            }
        }
    }
    if !config.profile_only {
        outputs.write_rows(CODES_FILE, &CODE_HEADER, &summary)?;
    }
    Ok(())
}

fn code_row(spec: &QuantumChannelSpec, rate: f64, code: &QuantumPolarCode) -> CodeRow {
    CodeRow {
        channel_kind: spec.kind().as_str(),
        parameter: spec.parameter(),
        n: code.blocklength,
        rate,
        r_c_amp: code.amp_rate(),
        r_c_ph: code.phase_rate(),
        r_q: code.quantum_rate(),
        net_rate: code.net_rate(),
        information: code.info.len(),
        amp_frozen: code.amp_frozen.len(),
        phase_frozen: code.phase_frozen.len(),
        ebit: code.ebit.len(),
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CrossingRow {
    pub epsilon: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub target: f64,
    #[serde(rename = "R_Q")]
    pub rate: f64,
}

fn bounds(config: &ExperimentConfig, outputs: &mut Outputs) -> Result<()> {
    let mut crossings = Vec::new();
    for spec in specs(config)? {
        if spec.kind() != qpolar::ChannelKind::Erasure {
            return Err(qpolar::Error::UnsupportedChannel(format!(
                "bounds are defined for the erasure channel only, not {}",
                spec.kind()
            ))
            .into());
        }
        let eps = spec.parameter();
        for &n in &config.blocklengths {
            let curve = BoundCurve::new(eps, n)?;
            let points = config.rates_for(n).iter().map(|&r| curve.point(r)).collect::<qpolar::Result<Vec<_>>>()?;
            let mut buf = Vec::new();
            write_bounds_csv(&points, &mut buf)?;
            outputs.write(&bounds_file(eps, n), &buf)?;
            crossings.push(CrossingRow { epsilon: eps, n, target: config.target, rate: curve.max_rate_with_upper_below(config.target) });
        }
    }
    outputs.write_rows(CROSSING_FILE, &["epsilon", "N", "target", "R_Q"], &crossings)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateRow {
    pub channel_kind: String,
    pub parameter: f64,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "R_C_amp")]
    pub r_c_amp: f64,
    #[serde(rename = "R_C_ph")]
    pub r_c_ph: f64,
    #[serde(rename = "R_Q")]
    pub r_q: f64,
    pub branch: String,
    #[serde(rename = "M")]
    pub trials: u64,
    pub errors: Option<u64>,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub seed: u64,
    pub reference_rate: f64,
}

pub const SIMULATE_HEADER: [&str; 14] = [
    "channel_kind",
    "parameter",
    "N",
    "R_C_amp",
    "R_C_ph",
    "R_Q",
    "branch",
    "M",
    "errors",
    "p_hat",
    "ci_low",
    "ci_high",
    "seed",
    "reference_rate",
];

fn simulate(config: &ExperimentConfig, outputs: &mut Outputs) -> Result<()> {
    let mut rows = Vec::new();
    for spec in specs(config)? {
        let ratio = ratio_for(config, &spec);
        for &n in &config.blocklengths {
            let design = CodeDesign::new(spec, n)?;
            for &rate in config.rates_for(n) {
                let code = code_for_quantum_rate(&design, rate, ratio)?;
                eprintln!("simulate {} {} N={n} R_Q={}", spec.kind(), spec.parameter(), code.quantum_rate());
                let est = simulate_code(&spec, &code, config.trials, config.seed, Execution::Parallel, None)?;
                let row = |branch: &str, errors: Option<u64>, p: f64, lo: f64, hi: f64| SimulateRow {
                    channel_kind: spec.kind().to_string(),
                    parameter: spec.parameter(),
                    n,
                    r_c_amp: code.amp_rate(),
                    r_c_ph: code.phase_rate(),
                    r_q: code.quantum_rate(),
                    branch: branch.to_string(),
                    trials: config.trials,
                    errors,
                    p_hat: p,
                    ci_low: lo,
                    ci_high: hi,
                    seed: config.seed,
                    reference_rate: spec.reference_rate(),
                };
                let (a, b, c) = (est.amplitude, est.phase, est.combined);
                rows.push(row("amplitude", Some(a.errors), a.p_hat, a.ci_low, a.ci_high));
                rows.push(row("phase", Some(b.errors), b.p_hat, b.ci_low, b.ci_high));
                rows.push(row("combined", None, c.p, c.ci_low, c.ci_high));
            }
        }
    }
    outputs.write_rows(SIMULATE_FILE, &SIMULATE_HEADER, &rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRow {
    pub channel_kind: String,
    pub parameter: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub target: f64,
    #[serde(rename = "R_Q")]
    pub rate: f64,
    pub met: bool,
    #[serde(rename = "R_C_amp")]
    pub r_c_amp: f64,
    #[serde(rename = "R_C_ph")]
    pub r_c_ph: f64,
    #[serde(rename = "M")]
    pub trials: u64,
    pub p_e: Option<f64>,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    pub reference_rate: f64,
    /// The combined block error doubles as the privacy parameter.
    pub privacy_parameter: Option<f64>,
    pub underpowered: bool,
    pub codes_evaluated: usize,
    pub seed: u64,
}

pub const THRESHOLD_HEADER: [&str; 17] = [
    "channel_kind",
    "parameter",
    "N",
    "target",
    "R_Q",
    "met",
    "R_C_amp",
    "R_C_ph",
    "M",
    "p_e",
    "ci_low",
    "ci_high",
    "reference_rate",
    "privacy_parameter",
    "underpowered",
    "codes_evaluated",
    "seed",
];

fn threshold(config: &ExperimentConfig, outputs: &mut Outputs) -> Result<()> {
    let mut rows = Vec::new();
    for spec in specs(config)? {
        for &n in &config.blocklengths {
            eprintln!("threshold {} {} N={n}", spec.kind(), spec.parameter());
            let opts = SearchOptions {
                trials: config.trials,
                seed: config.seed,
                mode: Execution::Parallel,
                ratio: config.ratio,
                strict: config.strict,
            };
            let t = threshold_rate_with(&spec, n, config.target, &opts)?;
            let est = t.estimate.map(|e| e.combined);
            rows.push(ThresholdRow {
                channel_kind: spec.kind().to_string(),
                parameter: spec.parameter(),
                n,
                target: config.target,
                rate: t.rate,
                met: t.met,
                r_c_amp: t.r_amp,
                r_c_ph: t.r_phase,
                trials: t.estimate.map_or(0, |e| e.amplitude.trials),
                p_e: est.map(|c| c.p),
                ci_low: est.map(|c| c.ci_low),
                ci_high: est.map(|c| c.ci_high),
                reference_rate: spec.reference_rate(),
                privacy_parameter: est.map(|c| c.p),
                underpowered: t.underpowered,
                codes_evaluated: t.codes_evaluated,
                seed: config.seed,
            });
        }
    }
    outputs.write_rows(THRESHOLD_FILE, &THRESHOLD_HEADER, &rows)
}
