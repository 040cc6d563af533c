//! Reliability profiles of the synthesized channels and assembly of the
//! quantum code from an amplitude and a phase polar code.
//!
//! Indices are 1-based throughout. A phase-good set is brought into the
//! amplitude frame with [`reverse_index_set`] before assembly.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::channel::{BinaryInputDMC, ChannelKind, QuantumChannelSpec};
use crate::error::{invalid, Result};
use crate::numeric::compensated_sum;

/// Bhattacharyya values below this are flushed to zero.
pub const Z_FLUSH: f64 = 1e-300;

/// Sorted set of distinct 1-based indices.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IndexSet(Vec<usize>);

impl IndexSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Build from arbitrary indices, all of which must lie in `1..=n`.
    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I, n: usize) -> Result<Self> {
        let mut v: Vec<usize> = indices.into_iter().collect();
        if let Some(&bad) = v.iter().find(|&&i| i == 0 || i > n) {
            return invalid(format!("index {bad} outside 1..={n}"));
        }
        v.sort_unstable();
        v.dedup();
        Ok(Self(v))
    }

    pub fn full(n: usize) -> Self {
        Self((1..=n).collect())
    }

    pub(crate) fn from_mask(mask: &[bool]) -> Self {
        Self(mask.iter().enumerate().filter(|(_, &m)| m).map(|(i, _)| i + 1).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn max_index(&self) -> Option<usize> {
        self.0.last().copied()
    }

    pub fn to_mask(&self, n: usize) -> Vec<bool> {
        let mut mask = vec![false; n];
        for &i in &self.0 {
            mask[i - 1] = true;
        }
        mask
    }

    pub fn intersection(&self, other: &IndexSet) -> IndexSet {
        IndexSet(self.0.iter().copied().filter(|&i| other.contains(i)).collect())
    }

    pub fn difference(&self, other: &IndexSet) -> IndexSet {
        IndexSet(self.0.iter().copied().filter(|&i| !other.contains(i)).collect())
    }

    pub fn union(&self, other: &IndexSet) -> IndexSet {
        let mut v: Vec<usize> = self.0.iter().chain(&other.0).copied().collect();
        v.sort_unstable();
        v.dedup();
        IndexSet(v)
    }

    pub fn complement(&self, n: usize) -> IndexSet {
        IndexSet((1..=n).filter(|&i| !self.contains(i)).collect())
    }
}

/// `{ N+1-i : i ∈ s }`.
pub fn reverse_index_set(s: &IndexSet, n: usize) -> Result<IndexSet> {
    IndexSet::from_indices(s.iter().map(|i| (n + 1).wrapping_sub(i)), n)
}

/// Bhattacharyya parameters of the `N` synthesized channels in natural order.
#[derive(Debug, Clone, PartialEq)]
pub struct ReliabilityProfile {
    z: Vec<f64>,
}

impl ReliabilityProfile {
    pub fn new(z: Vec<f64>) -> Result<Self> {
        if !z.len().is_power_of_two() {
            return invalid(format!("profile length {} is not a power of two", z.len()));
        }
        if let Some(bad) = z.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return invalid(format!("z value {bad} outside [0, 1]"));
        }
        Ok(Self { z })
    }

    pub fn blocklength(&self) -> usize {
        self.z.len()
    }

    pub fn z_values(&self) -> &[f64] {
        &self.z
    }

    /// `Z` of the 1-based virtual channel `i`.
    pub fn z(&self, i: usize) -> f64 {
        self.z[i - 1]
    }

    /// Mean of `1 - Z`, compensated.
    pub fn mean_capacity_proxy(&self) -> f64 {
        compensated_sum(self.z.iter().map(|z| 1.0 - z)) / self.z.len() as f64
    }

    /// 0-based indices ordered from most to least reliable, ties toward the
    /// smaller index.
    pub fn ranking(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.z.len()).collect();
        order.sort_by(|&a, &b| self.z[a].total_cmp(&self.z[b]).then(a.cmp(&b)));
        order
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["index", "z_value"])?;
        for (i, z) in self.z.iter().enumerate() {
            w.write_record([(i + 1).to_string(), format!("{z:?}")])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let headers = r.headers().map_err(csv_err)?.clone();
        if headers.iter().collect::<Vec<_>>() != ["index", "z_value"] {
            return invalid("profile CSV header must be `index,z_value`");
        }
        let mut z = Vec::new();
        for (row, rec) in r.records().enumerate() {
            let rec = rec.map_err(csv_err)?;
            let index: usize = rec[0].trim().parse().map_err(|_| bad_field(row, "index"))?;
            if index != row + 1 {
                return invalid(format!("profile CSV row {} has index {index}", row + 1));
            }
            z.push(rec[1].trim().parse().map_err(|_| bad_field(row, "z_value"))?);
        }
        Self::new(z)
    }
}

fn csv_err(e: csv::Error) -> crate::Error {
    crate::Error::InvalidArgument(format!("csv: {e}"))
}

fn bad_field(row: usize, name: &str) -> crate::Error {
    crate::Error::InvalidArgument(format!("row {}: unparsable {name}", row + 1))
}

/// Exact profile of the binary erasure channel via the recursion
/// `z → (2z − z², z²)` with the children interleaved.
pub fn bec_profile(epsilon: f64, n: usize) -> Result<ReliabilityProfile> {
    if !(0.0..=1.0).contains(&epsilon) {
        return invalid(format!("erasure probability {epsilon} outside [0, 1]"));
    }
    if !n.is_power_of_two() {
        return invalid(format!("blocklength {n} is not a power of two"));
    }
    let mut cur = Vec::with_capacity(n);
    let mut next = Vec::with_capacity(n);
    cur.push(flush(epsilon));
    while cur.len() < n {
        next.clear();
        for &z in &cur {
            next.push(flush(z * (2.0 - z)));
            next.push(flush(z * z));
        }
        std::mem::swap(&mut cur, &mut next);
    }
    Ok(ReliabilityProfile { z: cur })
}

#[inline]
fn flush(z: f64) -> f64 {
    if z < Z_FLUSH {
        0.0
    } else {
        z.min(1.0)
    }
}

/// Profile of the erasure channel whose erasure probability is one minus the
/// symmetric capacity of `ch`.
pub fn effective_erasure_profile(ch: &BinaryInputDMC, n: usize) -> Result<ReliabilityProfile> {
    bec_profile((1.0 - ch.symmetric_capacity()).clamp(0.0, 1.0), n)
}

/// The `k` most reliable indices (smallest `Z`, ties toward smaller index).
pub fn select_good(profile: &ReliabilityProfile, k: usize) -> Result<IndexSet> {
    let n = profile.blocklength();
    if k > n {
        return invalid(format!("cannot select {k} of {n} channels"));
    }
    Ok(select_from_ranking(&profile.ranking(), k))
}

pub(crate) fn select_from_ranking(ranking: &[usize], k: usize) -> IndexSet {
    let mut v: Vec<usize> = ranking[..k].iter().map(|i| i + 1).collect();
    v.sort_unstable();
    IndexSet(v)
}

/// A quantum polar code: a partition of `{1..N}` into four input classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantumPolarCode {
    pub blocklength: usize,
    /// Good for both amplitude and phase.
    pub info: IndexSet,
    /// Good only for phase; fed an ancilla in `|0⟩`.
    pub amp_frozen: IndexSet,
    /// Good only for amplitude; fed an ancilla in `|+⟩`.
    pub phase_frozen: IndexSet,
    /// Bad for both; consumes preshared entanglement.
    pub ebit: IndexSet,
    pub amp_good: IndexSet,
    /// Phase-good set in the amplitude index frame.
    pub phase_good: IndexSet,
}

impl QuantumPolarCode {
    pub fn quantum_rate(&self) -> f64 {
        self.info.len() as f64 / self.blocklength as f64
    }

    pub fn net_rate(&self) -> f64 {
        (self.info.len() as f64 - self.ebit.len() as f64) / self.blocklength as f64
    }

    pub fn amp_rate(&self) -> f64 {
        self.amp_good.len() as f64 / self.blocklength as f64
    }

    pub fn phase_rate(&self) -> f64 {
        self.phase_good.len() as f64 / self.blocklength as f64
    }

    /// Class label of the 1-based index `i`.
    pub fn class_of(&self, i: usize) -> InputClass {
        if self.info.contains(i) {
            InputClass::Information
        } else if self.amp_frozen.contains(i) {
            InputClass::AmplitudeFrozen
        } else if self.phase_frozen.contains(i) {
            InputClass::PhaseFrozen
        } else {
            InputClass::Ebit
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputClass {
    Information,
    AmplitudeFrozen,
    PhaseFrozen,
    Ebit,
}

impl InputClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            InputClass::Information => "information",
            InputClass::AmplitudeFrozen => "amp_frozen",
            InputClass::PhaseFrozen => "phase_frozen",
            InputClass::Ebit => "ebit",
        }
    }
}

/// Assemble the quantum code from the amplitude-good set and the phase-good
/// set, the latter already expressed in the amplitude frame.
pub fn assemble_quantum_code(
    amp_good: &IndexSet,
    phase_good_natural: &IndexSet,
    n: usize,
) -> Result<QuantumPolarCode> {
    for s in [amp_good, phase_good_natural] {
        if s.max_index().is_some_and(|m| m > n) {
            return invalid(format!("index set exceeds blocklength {n}"));
        }
    }
    Ok(QuantumPolarCode {
        blocklength: n,
        info: amp_good.intersection(phase_good_natural),
        amp_frozen: phase_good_natural.difference(amp_good),
        phase_frozen: amp_good.difference(phase_good_natural),
        ebit: amp_good.union(phase_good_natural).complement(n),
        amp_good: amp_good.clone(),
        phase_good: phase_good_natural.clone(),
    })
}

/// Amplitude and phase profiles for a channel at one blocklength, with the
/// rankings needed to build codes for any pair of classical rates.
#[derive(Debug, Clone)]
pub struct CodeDesign {
    spec: QuantumChannelSpec,
    amp_profile: ReliabilityProfile,
    phase_profile: ReliabilityProfile,
    amp_ranking: Vec<usize>,
    phase_ranking: Vec<usize>,
}

impl CodeDesign {
    /// Exact profiles for erasure; effective-erasure profiles otherwise. The
    /// phase profile reuses the amplitude one when both channels coincide.
    pub fn new(spec: QuantumChannelSpec, n: usize) -> Result<Self> {
        let amp_profile = match spec.kind() {
            ChannelKind::Erasure => bec_profile(spec.parameter(), n)?,
            _ => effective_erasure_profile(&spec.induced_amplitude(), n)?,
        };
        let phase_profile = if spec.is_symmetric() {
            amp_profile.clone()
        } else {
            effective_erasure_profile(&spec.induced_phase(), n)?
        };
        let amp_ranking = amp_profile.ranking();
        let phase_ranking = phase_profile.ranking();
        Ok(Self { spec, amp_profile, phase_profile, amp_ranking, phase_ranking })
    }

    pub fn spec(&self) -> QuantumChannelSpec {
        self.spec
    }

    pub fn blocklength(&self) -> usize {
        self.amp_profile.blocklength()
    }

    pub fn amp_profile(&self) -> &ReliabilityProfile {
        &self.amp_profile
    }

    /// Phase profile in the phase channel's own index frame.
    pub fn phase_profile(&self) -> &ReliabilityProfile {
        &self.phase_profile
    }

    /// Code with `k_amp` amplitude-good and `k_phase` phase-good indices.
    pub fn code(&self, k_amp: usize, k_phase: usize) -> Result<QuantumPolarCode> {
        let n = self.blocklength();
        if k_amp > n || k_phase > n {
            return invalid(format!("classical dimensions ({k_amp}, {k_phase}) exceed {n}"));
        }
        let amp_good = select_from_ranking(&self.amp_ranking, k_amp);
        let phase_own = select_from_ranking(&self.phase_ranking, k_phase);
        assemble_quantum_code(&amp_good, &reverse_index_set(&phase_own, n)?, n)
    }

    /// Code at classical rates rounded to the nearest dimension.
    pub fn code_for_rates(&self, r_amp: f64, r_phase: f64) -> Result<QuantumPolarCode> {
        let n = self.blocklength() as f64;
        if !(0.0..=1.0).contains(&r_amp) || !(0.0..=1.0).contains(&r_phase) {
            return invalid("classical rates must lie in [0, 1]");
        }
        self.code((r_amp * n).round() as usize, (r_phase * n).round() as usize)
    }
}
