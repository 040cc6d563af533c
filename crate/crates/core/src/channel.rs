//! Quantum channels described through their induced classical amplitude and
//! phase channels.
//!
//! Every channel handled here reduces to a pair of binary-input discrete
//! memoryless channels: erasure to two BECs, depolarizing to a BSC(2p/3)
//! amplitude channel plus a four-output phase channel, BB84 to two BSCs.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numeric::{compensated_sum, h2};

const ROW_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelKind {
    Erasure,
    Depolarizing,
    Bb84,
}

impl ChannelKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ChannelKind::Erasure => "erasure",
            ChannelKind::Depolarizing => "depolarizing",
            ChannelKind::Bb84 => "bb84",
        }
    }
}

impl fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ChannelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "erasure" => Ok(ChannelKind::Erasure),
            "depolarizing" => Ok(ChannelKind::Depolarizing),
            "bb84" => Ok(ChannelKind::Bb84),
            other => invalid(format!("unknown channel kind `{other}`")),
        }
    }
}

/// A quantum channel family with its single noise parameter: the erasure
/// probability, the depolarizing probability or the BB84 flip probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantumChannelSpec {
    kind: ChannelKind,
    parameter: f64,
}

impl QuantumChannelSpec {
    pub fn new(kind: ChannelKind, parameter: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&parameter) {
            return invalid(format!("{kind} parameter {parameter} outside [0, 1]"));
        }
        Ok(Self { kind, parameter })
    }

    pub fn erasure(epsilon: f64) -> Result<Self> {
        Self::new(ChannelKind::Erasure, epsilon)
    }

    pub fn depolarizing(p: f64) -> Result<Self> {
        Self::new(ChannelKind::Depolarizing, p)
    }

    pub fn bb84(f: f64) -> Result<Self> {
        Self::new(ChannelKind::Bb84, f)
    }

    pub fn kind(&self) -> ChannelKind {
        self.kind
    }

    pub fn parameter(&self) -> f64 {
        self.parameter
    }

    /// Classical channel seen by computational-basis inputs.
    pub fn induced_amplitude(&self) -> BinaryInputDMC {
        let q = self.parameter;
        match self.kind {
            ChannelKind::Erasure => BinaryInputDMC::bec(q),
            ChannelKind::Depolarizing => BinaryInputDMC::bsc(2.0 * q / 3.0),
            ChannelKind::Bb84 => BinaryInputDMC::bsc(q),
        }
        .expect("validated parameter")
    }

    /// Classical channel seen by phase-basis inputs.
    pub fn induced_phase(&self) -> BinaryInputDMC {
        let q = self.parameter;
        match self.kind {
            ChannelKind::Erasure => BinaryInputDMC::bec(q),
            ChannelKind::Depolarizing => BinaryInputDMC::depolarizing_phase(q),
            ChannelKind::Bb84 => BinaryInputDMC::bsc(q),
        }
        .expect("validated parameter")
    }

    /// Quantum capacity (erasure) or hashing rate (depolarizing, BB84). May
    /// be negative for very noisy channels.
    pub fn reference_rate(&self) -> f64 {
        let q = self.parameter;
        match self.kind {
            ChannelKind::Erasure => 1.0 - 2.0 * q,
            ChannelKind::Depolarizing => 1.0 - h2(q) - q * 3f64.log2(),
            ChannelKind::Bb84 => 1.0 - 2.0 * h2(q),
        }
    }

    /// Amplitude and phase channels are the same classical channel.
    pub fn is_symmetric(&self) -> bool {
        self.induced_amplitude() == self.induced_phase()
    }
}

impl fmt::Display for QuantumChannelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.kind, self.parameter)
    }
}

/// Index of a received symbol in a channel's output alphabet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ChannelSample(pub usize);

/// Binary-input discrete memoryless channel with transition rows `W(y|0)` and
/// `W(y|1)`. Output symbols unreachable from both inputs are dropped on
/// construction, so every symbol has a well-defined likelihood ratio.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryInputDMC {
    labels: Vec<String>,
    rows: [Vec<f64>; 2],
    cumulative: [Vec<f64>; 2],
    llrs: Vec<f64>,
}

impl BinaryInputDMC {
    pub fn new(labels: Vec<String>, row0: Vec<f64>, row1: Vec<f64>) -> Result<Self> {
        if labels.len() != row0.len() || labels.len() != row1.len() {
            return invalid("alphabet and transition rows differ in length");
        }
        for (x, row) in [&row0, &row1].into_iter().enumerate() {
            if row.iter().any(|&w| w.is_nan() || w < 0.0 || !w.is_finite()) {
                return invalid(format!("row {x} has a negative or non-finite entry"));
            }
            let total = compensated_sum(row.iter().copied());
            if (total - 1.0).abs() > ROW_TOLERANCE {
                return invalid(format!("row {x} sums to {total}, not 1"));
            }
        }
        if labels.len() < 2 {
            return invalid("output alphabet needs at least two symbols");
        }
        let keep: Vec<usize> =
            (0..labels.len()).filter(|&y| row0[y] > 0.0 || row1[y] > 0.0).collect();
        let labels: Vec<String> = keep.iter().map(|&y| labels[y].clone()).collect();
        let row0: Vec<f64> = keep.iter().map(|&y| row0[y]).collect();
        let row1: Vec<f64> = keep.iter().map(|&y| row1[y]).collect();
        let cumulative = [cumulative_row(&row0), cumulative_row(&row1)];
        let llrs = row0.iter().zip(&row1).map(|(&a, &b)| llr_of(a, b)).collect();
        Ok(Self { labels, rows: [row0, row1], cumulative, llrs })
    }

    /// Binary erasure channel on outputs `{0, 1, e}`.
    pub fn bec(epsilon: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&epsilon) {
            return invalid(format!("erasure probability {epsilon} outside [0, 1]"));
        }
        Self::new(
            labels(&["0", "1", "e"]),
            vec![1.0 - epsilon, 0.0, epsilon],
            vec![0.0, 1.0 - epsilon, epsilon],
        )
    }

    /// Binary symmetric channel with crossover probability `delta`.
    pub fn bsc(delta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&delta) {
            return invalid(format!("flip probability {delta} outside [0, 1]"));
        }
        Self::new(labels(&["0", "1"]), vec![1.0 - delta, delta], vec![delta, 1.0 - delta])
    }

    pub fn noiseless() -> Self {
        Self::bsc(0.0).expect("valid")
    }

    /// Four-output phase channel of the depolarizing channel, one output per
    /// Bell state.
    pub fn depolarizing_phase(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return invalid(format!("depolarizing probability {p} outside [0, 1]"));
        }
        let t = p / 3.0;
        Self::new(
            labels(&["bell0", "bell1", "bell2", "bell3"]),
            vec![1.0 - p, t, t, t],
            vec![t, t, t, 1.0 - p],
        )
    }

    pub fn output_labels(&self) -> &[String] {
        &self.labels
    }

    pub fn alphabet_size(&self) -> usize {
        self.labels.len()
    }

    pub fn transition(&self, x: u8, y: ChannelSample) -> f64 {
        self.rows[x as usize][y.0]
    }

    pub fn row(&self, x: u8) -> &[f64] {
        &self.rows[x as usize]
    }

    /// Symmetric capacity `I(W)` in bits.
    pub fn symmetric_capacity(&self) -> f64 {
        compensated_sum((0..self.alphabet_size()).flat_map(|y| {
            let (w0, w1) = (self.rows[0][y], self.rows[1][y]);
            let mean = 0.5 * (w0 + w1);
            [w0, w1].into_iter().map(move |w| if w > 0.0 { 0.5 * w * (w / mean).log2() } else { 0.0 })
        }))
        .clamp(0.0, 1.0)
    }

    /// Bhattacharyya parameter `Z(W) = Σ_y √(W(y|0)W(y|1))`.
    pub fn bhattacharyya(&self) -> f64 {
        compensated_sum(self.rows[0].iter().zip(&self.rows[1]).map(|(a, b)| (a * b).sqrt()))
            .clamp(0.0, 1.0)
    }

    /// Draw the channel output for input bit `x`.
    pub fn sample<R: Rng + ?Sized>(&self, x: u8, rng: &mut R) -> ChannelSample {
        let u: f64 = rng.gen();
        let cdf = &self.cumulative[x as usize];
        ChannelSample(cdf.iter().position(|&c| u < c).unwrap_or(cdf.len() - 1))
    }

    /// Likelihood ratio `W(y|0)/W(y|1)`, `+∞` when only input 0 reaches `y`.
    pub fn channel_lr(&self, y: ChannelSample) -> Result<f64> {
        if y.0 >= self.alphabet_size() {
            return invalid(format!("symbol {} outside alphabet of size {}", y.0, self.alphabet_size()));
        }
        let (w0, w1) = (self.rows[0][y.0], self.rows[1][y.0]);
        Ok(if w1 == 0.0 { f64::INFINITY } else { w0 / w1 })
    }

    /// Log-likelihood ratio of symbol `y` (natural log).
    pub fn channel_llr(&self, y: ChannelSample) -> Result<f64> {
        self.llrs.get(y.0).copied().ok_or_else(|| {
            Error::InvalidArgument(format!("symbol {} outside alphabet", y.0))
        })
    }

    pub(crate) fn llr_table(&self) -> &[f64] {
        &self.llrs
    }
}

fn labels(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn llr_of(w0: f64, w1: f64) -> f64 {
    match (w0 > 0.0, w1 > 0.0) {
        (true, false) => f64::INFINITY,
        (false, true) => f64::NEG_INFINITY,
        _ => (w0 / w1).ln(),
    }
}

fn cumulative_row(row: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    let mut cdf: Vec<f64> = row
        .iter()
        .map(|&w| {
            acc += w;
            acc
        })
        .collect();
    // The last reachable symbol absorbs rounding so every draw lands somewhere.
    if let Some(last) = row.iter().rposition(|&w| w > 0.0) {
        for c in &mut cdf[last..] {
            *c = f64::INFINITY;
        }
    }
    cdf
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn erasure_zero_is_noiseless() {
        let ch = QuantumChannelSpec::erasure(0.0).unwrap().induced_amplitude();
        assert_eq!(ch.output_labels(), &["0", "1"]);
        assert_eq!(ch.row(0), &[1.0, 0.0]);
        assert_eq!(ch.row(1), &[0.0, 1.0]);
    }

    #[test]
    fn depolarizing_amplitude_flip_probability() {
        let ch = QuantumChannelSpec::depolarizing(0.1).unwrap().induced_amplitude();
        assert_abs_diff_eq!(ch.row(0)[1], 1.0 / 15.0, epsilon = 1e-15);
        assert_abs_diff_eq!(ch.row(1)[0], 1.0 / 15.0, epsilon = 1e-15);
    }

    #[test]
    fn bb84_channels_are_bsc() {
        let spec = QuantumChannelSpec::bb84(0.05).unwrap();
        assert_eq!(spec.induced_amplitude(), BinaryInputDMC::bsc(0.05).unwrap());
        assert_eq!(spec.induced_phase(), BinaryInputDMC::bsc(0.05).unwrap());
        assert!(spec.is_symmetric());
    }

    #[test]
    fn depolarizing_phase_matrix() {
        let ch = QuantumChannelSpec::depolarizing(0.1).unwrap().induced_phase();
        let t = 0.1 / 3.0;
        for (a, b) in ch.row(0).iter().zip([0.9, t, t, t]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }
        for (a, b) in ch.row(1).iter().zip([t, t, t, 0.9]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }
        assert!(!QuantumChannelSpec::depolarizing(0.1).unwrap().is_symmetric());
    }

    #[test]
    fn erasure_phase_is_bec() {
        let spec = QuantumChannelSpec::erasure(0.15).unwrap();
        assert_eq!(spec.induced_phase(), BinaryInputDMC::bec(0.15).unwrap());
    }

    #[test]
    fn depolarizing_zero_phase_is_a_permutation() {
        let ch = QuantumChannelSpec::depolarizing(0.0).unwrap().induced_phase();
        assert_eq!(ch.alphabet_size(), 2);
        assert_eq!(ch.symmetric_capacity(), 1.0);
        assert_eq!(ch.bhattacharyya(), 0.0);
    }

    #[test]
    fn capacities_match_scalar_oracle() {
        assert_abs_diff_eq!(BinaryInputDMC::bec(0.15).unwrap().symmetric_capacity(), 0.85, epsilon = 1e-14);
        assert_abs_diff_eq!(
            BinaryInputDMC::bsc(1.0 / 15.0).unwrap().symmetric_capacity(),
            0.646_640_664_978_578_6,
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(
            BinaryInputDMC::depolarizing_phase(0.1).unwrap().symmetric_capacity(),
            0.725_867_491_360_024_5,
            epsilon = 1e-14
        );
    }

    #[test]
    fn bhattacharyya_examples() {
        assert_abs_diff_eq!(BinaryInputDMC::bec(0.37).unwrap().bhattacharyya(), 0.37, epsilon = 1e-15);
        assert_eq!(BinaryInputDMC::noiseless().bhattacharyya(), 0.0);
        assert_abs_diff_eq!(
            BinaryInputDMC::bsc(1.0 / 15.0).unwrap().bhattacharyya(),
            0.498_887_651_569_858_85,
            epsilon = 1e-14
        );
    }

    #[test]
    fn likelihood_ratios() {
        let bec = BinaryInputDMC::bec(0.3).unwrap();
        assert_eq!(bec.channel_lr(ChannelSample(2)).unwrap(), 1.0);
        assert_eq!(bec.channel_lr(ChannelSample(0)).unwrap(), f64::INFINITY);
        assert_eq!(bec.channel_lr(ChannelSample(1)).unwrap(), 0.0);
        assert_eq!(bec.channel_llr(ChannelSample(1)).unwrap(), f64::NEG_INFINITY);
        let bsc = BinaryInputDMC::bsc(0.2).unwrap();
        assert_abs_diff_eq!(bsc.channel_lr(ChannelSample(0)).unwrap(), 4.0, epsilon = 1e-14);
        let phase = BinaryInputDMC::depolarizing_phase(0.1).unwrap();
        assert_abs_diff_eq!(phase.channel_lr(ChannelSample(0)).unwrap(), 27.0, epsilon = 1e-12);
        assert!(bsc.channel_lr(ChannelSample(2)).is_err());
    }

    #[test]
    fn invalid_channels_are_rejected() {
        assert!(QuantumChannelSpec::erasure(1.5).is_err());
        assert!(QuantumChannelSpec::bb84(-0.1).is_err());
        assert!(BinaryInputDMC::new(labels(&["a", "b"]), vec![0.5, 0.6], vec![0.5, 0.5]).is_err());
        assert!(BinaryInputDMC::new(labels(&["a", "b"]), vec![-0.1, 1.1], vec![0.5, 0.5]).is_err());
        assert!(BinaryInputDMC::new(labels(&["a"]), vec![1.0, 0.0], vec![0.5, 0.5]).is_err());
    }

    #[test]
    fn degenerate_sampling() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let clean = BinaryInputDMC::noiseless();
        let bec1 = BinaryInputDMC::bec(1.0).unwrap();
        for _ in 0..1000 {
            assert_eq!(clean.output_labels()[clean.sample(1, &mut rng).0], "1");
            assert_eq!(bec1.output_labels()[bec1.sample(0, &mut rng).0], "e");
        }
    }

    #[test]
    fn fair_bsc_flip_rate() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let ch = BinaryInputDMC::bsc(0.5).unwrap();
        let flips = (0..100_000).filter(|_| ch.sample(0, &mut rng).0 == 1).count();
        let rate = flips as f64 / 1e5;
        assert!((rate - 0.5).abs() < 0.01, "rate {rate}");
    }

    #[test]
    fn reference_rates() {
        assert_abs_diff_eq!(QuantumChannelSpec::erasure(0.15).unwrap().reference_rate(), 0.7, epsilon = 1e-15);
        assert_abs_diff_eq!(
            QuantumChannelSpec::depolarizing(0.1).unwrap().reference_rate(),
            0.372_508_156_338_603_2,
            epsilon = 1e-14
        );
        assert_eq!(QuantumChannelSpec::bb84(0.0).unwrap().reference_rate(), 1.0);
        assert!(QuantumChannelSpec::bb84(0.2).unwrap().reference_rate() < 0.0);
    }

    #[test]
    fn kind_parsing() {
        assert_eq!("BB84".parse::<ChannelKind>().unwrap(), ChannelKind::Bb84);
        assert!("pauli".parse::<ChannelKind>().is_err());
    }
}
