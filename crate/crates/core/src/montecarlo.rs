//! Monte Carlo estimation of amplitude, phase and quantum block error rates.
//!
//! Each branch is simulated on its own: random information and frozen bits
//! are drawn, encoded, sent through the induced classical channel and
//! decoded. The phase branch decodes in reverse order. The quantum error
//! combines the two estimates as `P_e = a + b(1 − a)`, with the phase
//! estimate standing in for the conditional phase error.

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::channel::{BinaryInputDMC, QuantumChannelSpec};
use crate::construction::{CodeDesign, IndexSet, QuantumPolarCode};
use crate::decoder::{DecodeOrder, ScDecoder};
use crate::error::{invalid, Error, Result};
use crate::exec::{sum_trials, Execution};
use crate::numeric::CompensatedSum;
use crate::polar::encode_in_place;
use crate::rng::{streams, trial_rng};
use crate::stats::clopper_pearson;

/// Confidence level of reported intervals.
pub const CI_LEVEL: f64 = 0.90;
/// Trials per estimate for low error targets.
pub const DEFAULT_TRIALS: u64 = 50_000;
/// Trials per estimate for scans where errors are plentiful.
pub const SCAN_TRIALS: u64 = 5_000;
/// Amplitude-to-phase rate ratio used for depolarizing channels.
pub const DEPOLARIZING_RATE_RATIO: f64 = 0.82;
/// Largest blocklength accepted by [`exact_bec_block_error`].
pub const EXACT_ORACLE_MAX_N: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Amplitude,
    Phase,
}

impl Branch {
    pub fn as_str(&self) -> &'static str {
        match self {
            Branch::Amplitude => "amplitude",
            Branch::Phase => "phase",
        }
    }

    pub fn order(&self) -> DecodeOrder {
        match self {
            Branch::Amplitude => DecodeOrder::Natural,
            Branch::Phase => DecodeOrder::Reversed,
        }
    }

    fn stream(&self) -> u64 {
        match self {
            Branch::Amplitude => streams::AMPLITUDE,
            Branch::Phase => streams::PHASE,
        }
    }
}

/// What to simulate: a channel, a blocklength, two classical rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialPlan {
    pub spec: QuantumChannelSpec,
    pub blocklength: usize,
    pub r_amp: f64,
    pub r_phase: f64,
    pub trials: u64,
    pub seed: u64,
}

impl TrialPlan {
    pub fn new(spec: QuantumChannelSpec, blocklength: usize, r_amp: f64, r_phase: f64, trials: u64, seed: u64) -> Result<Self> {
        if trials == 0 {
            return invalid("a plan needs at least one trial");
        }
        if !(0.0..=1.0).contains(&r_amp) || !(0.0..=1.0).contains(&r_phase) {
            return invalid("classical rates must lie in [0, 1]");
        }
        if !blocklength.is_power_of_two() {
            return invalid(format!("blocklength {blocklength} is not a power of two"));
        }
        Ok(Self { spec, blocklength, r_amp, r_phase, trials, seed })
    }

    pub fn code(&self) -> Result<QuantumPolarCode> {
        CodeDesign::new(self.spec, self.blocklength)?.code_for_rates(self.r_amp, self.r_phase)
    }
}

/// Error count over a number of trials with an exact 90% interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub trials: u64,
    pub errors: u64,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Information-bit decisions made by coin because the LLR was zero.
    pub ties: u64,
}

impl SimResult {
    pub fn from_counts(errors: u64, trials: u64, ties: u64) -> Result<Self> {
        let (ci_low, ci_high) = clopper_pearson(errors, trials, CI_LEVEL)?;
        Ok(Self { trials, errors, p_hat: errors as f64 / trials as f64, ci_low, ci_high, ties })
    }
}

/// Quantum block error estimate combined from the two branches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CombinedEstimate {
    pub p: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// `a + b(1 − a)`.
#[inline]
pub fn combine(a: f64, b: f64) -> f64 {
    a + b * (1.0 - a)
}

/// Combine the amplitude error `a` and the phase error `b`. The combination
/// is monotone in both arguments, so interval endpoints map to endpoints.
pub fn combine_quantum_error(a: &SimResult, b: &SimResult) -> CombinedEstimate {
    CombinedEstimate {
        p: combine(a.p_hat, b.p_hat),
        ci_low: combine(a.ci_low, b.ci_low),
        ci_high: combine(a.ci_high, b.ci_high),
    }
}

/// One classical polar code on one channel, ready to run trials.
#[derive(Debug, Clone)]
pub struct ClassicalSim {
    ch: BinaryInputDMC,
    /// Non-frozen positions in the decoder's (natural-order) frame.
    good: Vec<bool>,
    seed: u64,
    stream: u64,
}

struct Scratch {
    decoder: ScDecoder,
    v: Vec<u8>,
    x: Vec<u8>,
    llrs: Vec<f64>,
    frozen: Vec<Option<u8>>,
}

impl ClassicalSim {
    /// `good` is given in the amplitude frame; with [`DecodeOrder::Reversed`]
    /// it is reflected into the decoding frame.
    pub fn new(ch: BinaryInputDMC, good: &IndexSet, n: usize, order: DecodeOrder, seed: u64, stream: u64) -> Result<Self> {
        if !n.is_power_of_two() {
            return invalid(format!("blocklength {n} is not a power of two"));
        }
        if good.max_index().is_some_and(|m| m > n) {
            return invalid(format!("good set exceeds blocklength {n}"));
        }
        let mut mask = good.to_mask(n);
        if order == DecodeOrder::Reversed {
            mask.reverse();
        }
        Ok(Self { ch, good: mask, seed, stream })
    }

    pub fn blocklength(&self) -> usize {
        self.good.len()
    }

    fn scratch(&self) -> Scratch {
        let n = self.blocklength();
        Scratch {
            decoder: ScDecoder::new(n).expect("power of two"),
            v: vec![0; n],
            x: vec![0; n],
            llrs: vec![0.0; n],
            frozen: vec![None; n],
        }
    }

    /// Run trial `t`; returns `(block_error, ties)`.
    fn trial(&self, s: &mut Scratch, t: u64) -> Result<(u64, u64)> {
        let mut rng = trial_rng(self.seed, self.stream, t);
        for chunk in s.v.chunks_mut(64) {
            let word = rng.next_u64();
            for (j, bit) in chunk.iter_mut().enumerate() {
                *bit = ((word >> j) & 1) as u8;
            }
        }
        s.x.copy_from_slice(&s.v);
        encode_in_place(&mut s.x);
        let table = self.ch.llr_table();
        for (l, &bit) in s.llrs.iter_mut().zip(&s.x) {
            *l = table[self.ch.sample(bit, &mut rng).0];
        }
        for ((f, &g), &bit) in s.frozen.iter_mut().zip(&self.good).zip(&s.v) {
            *f = if g { None } else { Some(bit) };
        }
        let mismatch = |decided: &[u8], upto: usize| {
            (0..upto).any(|i| self.good[i] && decided[i] != s.v[i])
        };
        match s.decoder.decode_llrs(&s.llrs, &s.frozen, &mut rng) {
            Ok(ties) => Ok((mismatch(s.decoder.decision(), s.v.len()) as u64, ties as u64)),
            // Only reachable after a wrong coin on an erased bit; anything
            // else is a decoder bug.
            Err(Error::DecodingContradiction { position: Some(p) }) if mismatch(s.decoder.decision(), p - 1) => {
                Ok((1, s.decoder.last_ties() as u64))
            }
            Err(e) => Err(e),
        }
    }

    /// Error and tie counts over trials `range`.
    pub fn run_range(&self, range: std::ops::Range<u64>, mode: Execution) -> Result<(u64, u64)> {
        sum_trials(mode, range, || self.scratch(), |s, t| self.trial(s, t))
    }

    pub fn run(&self, trials: u64, mode: Execution) -> Result<SimResult> {
        if trials == 0 {
            return invalid("need at least one trial");
        }
        let (errors, ties) = self.run_range(0..trials, mode)?;
        SimResult::from_counts(errors, trials, ties)
    }

    #[cfg(test)]
    pub(crate) fn trial_error(&self, t: u64) -> bool {
        self.trial(&mut self.scratch(), t).unwrap().0 == 1
    }
}

fn branch_sim(spec: &QuantumChannelSpec, code: &QuantumPolarCode, branch: Branch, seed: u64) -> Result<ClassicalSim> {
    let (ch, good) = match branch {
        Branch::Amplitude => (spec.induced_amplitude(), &code.amp_good),
        Branch::Phase => (spec.induced_phase(), &code.phase_good),
    };
    ClassicalSim::new(ch, good, code.blocklength, branch.order(), seed, branch.stream())
}

/// Simulate one branch of `code` on `spec`.
pub fn simulate_branch(
    spec: &QuantumChannelSpec,
    code: &QuantumPolarCode,
    branch: Branch,
    trials: u64,
    seed: u64,
    mode: Execution,
) -> Result<SimResult> {
    branch_sim(spec, code, branch, seed)?.run(trials, mode)
}

/// Simulate one branch of a plan.
pub fn run_branch(plan: &TrialPlan, branch: Branch) -> Result<SimResult> {
    simulate_branch(&plan.spec, &plan.code()?, branch, plan.trials, plan.seed, Execution::default())
}

/// Both branches and their combination.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantumEstimate {
    pub amplitude: SimResult,
    pub phase: SimResult,
    pub combined: CombinedEstimate,
    /// Stopped before `trials` because the target was provably missed.
    pub stopped_early: bool,
}

const FIRST_CHUNK: u64 = 64;
const MAX_CHUNK: u64 = 8192;

/// Simulate both branches for up to `trials` trials. With `stop_above`, the
/// run ends early once the final point estimate is certain to exceed it;
/// chunk boundaries are fixed, so the outcome does not depend on scheduling.
pub fn simulate_code(
    spec: &QuantumChannelSpec,
    code: &QuantumPolarCode,
    trials: u64,
    seed: u64,
    mode: Execution,
    stop_above: Option<f64>,
) -> Result<QuantumEstimate> {
    if trials == 0 {
        return invalid("need at least one trial");
    }
    let amp = branch_sim(spec, code, Branch::Amplitude, seed)?;
    let phase = branch_sim(spec, code, Branch::Phase, seed)?;
    let (mut done, mut chunk) = (0u64, FIRST_CHUNK);
    let (mut ea, mut ta, mut eb, mut tb) = (0u64, 0u64, 0u64, 0u64);
    let mut stopped_early = false;
    while done < trials {
        let end = (done + chunk).min(trials);
        let (e, t) = amp.run_range(done..end, mode)?;
        ea += e;
        ta += t;
        let (e, t) = phase.run_range(done..end, mode)?;
        eb += e;
        tb += t;
        done = end;
        chunk = (chunk * 2).min(MAX_CHUNK);
        if let Some(target) = stop_above {
            let m = trials as f64;
            if done < trials && combine(ea as f64 / m, eb as f64 / m) > target {
                stopped_early = true;
                break;
            }
        }
    }
    let amplitude = SimResult::from_counts(ea, done, ta)?;
    let phase = SimResult::from_counts(eb, done, tb)?;
    Ok(QuantumEstimate { amplitude, phase, combined: combine_quantum_error(&amplitude, &phase), stopped_early })
}

/// Amplitude-to-phase classical rate ratio used when none is given.
pub fn default_rate_ratio(spec: &QuantumChannelSpec) -> f64 {
    if spec.is_symmetric() {
        1.0
    } else {
        DEPOLARIZING_RATE_RATIO
    }
}

/// Classical dimensions `(k_amp, k_phase)` for phase dimension `k` at `ratio`.
pub fn dimensions_for(k_phase: usize, ratio: f64) -> (usize, usize) {
    ((ratio * k_phase as f64).round() as usize, k_phase)
}

/// The code at `ratio` whose quantum rate is closest to `target` (ties
/// toward fewer phase-good indices).
pub fn code_for_quantum_rate(design: &CodeDesign, target: f64, ratio: f64) -> Result<QuantumPolarCode> {
    if !(0.0..=1.0).contains(&target) {
        return invalid(format!("quantum rate {target} outside [0, 1]"));
    }
    if !(ratio > 0.0 && ratio <= 1.0) {
        return invalid(format!("rate ratio {ratio} outside (0, 1]"));
    }
    let mut best: Option<(f64, QuantumPolarCode)> = None;
    for k in 0..=design.blocklength() {
        let (ka, kp) = dimensions_for(k, ratio);
        let code = design.code(ka, kp)?;
        let gap = (code.quantum_rate() - target).abs();
        if best.as_ref().is_none_or(|(g, _)| gap < *g) {
            best = Some((gap, code));
        }
    }
    Ok(best.expect("at least k = 0").1)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    pub trials: u64,
    pub seed: u64,
    pub mode: Execution,
    /// Amplitude-to-phase rate ratio; defaults per channel.
    pub ratio: Option<f64>,
    /// Require the interval's upper end, not the point estimate, to meet the target.
    pub strict: bool,
}

impl SearchOptions {
    pub fn new(trials: u64, seed: u64) -> Self {
        Self { trials, seed, mode: Execution::default(), ratio: None, strict: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdResult {
    /// Highest quantum rate meeting the target, or 0 when none does.
    pub rate: f64,
    pub met: bool,
    pub k_amp: usize,
    pub k_phase: usize,
    pub r_amp: f64,
    pub r_phase: f64,
    /// Estimate at the threshold code.
    pub estimate: Option<QuantumEstimate>,
    /// Fewer than `5/target` trials.
    pub underpowered: bool,
    pub codes_evaluated: usize,
}

/// Trials needed for a target to be resolvable.
pub fn min_trials_for(target: f64) -> u64 {
    (5.0 / target).ceil() as u64
}

/// Highest quantum rate (step `1/N` in the phase dimension) whose combined
/// estimate meets `target`, searching downward from the full rate.
pub fn threshold_rate(spec: &QuantumChannelSpec, n: usize, target: f64, trials: u64, seed: u64) -> Result<ThresholdResult> {
    threshold_rate_with(spec, n, target, &SearchOptions::new(trials, seed))
}

pub fn threshold_rate_with(
    spec: &QuantumChannelSpec,
    n: usize,
    target: f64,
    opts: &SearchOptions,
) -> Result<ThresholdResult> {
    if !(target > 0.0 && target < 1.0) {
        return invalid(format!("target {target} outside (0, 1)"));
    }
    let ratio = opts.ratio.unwrap_or_else(|| default_rate_ratio(spec));
    let design = CodeDesign::new(*spec, n)?;
    let codes: Vec<QuantumPolarCode> = (0..=n)
        .map(|k| {
            let (ka, kp) = dimensions_for(k, ratio);
            design.code(ka, kp)
        })
        .collect::<Result<_>>()?;
    let mut evaluated = 0;
    for k in (1..=n).rev() {
        let code = &codes[k];
        // A smaller code with the same quantum rate dominates this one.
        if code.info.is_empty() || codes[k - 1].info.len() == code.info.len() {
            continue;
        }
        evaluated += 1;
        let est = simulate_code(spec, code, opts.trials, opts.seed, opts.mode, Some(target))?;
        let value = if opts.strict { est.combined.ci_high } else { est.combined.p };
        if !est.stopped_early && value <= target {
            return Ok(ThresholdResult {
                rate: code.quantum_rate(),
                met: true,
                k_amp: code.amp_good.len(),
                k_phase: code.phase_good.len(),
                r_amp: code.amp_rate(),
                r_phase: code.phase_rate(),
                estimate: Some(est),
                underpowered: opts.trials < min_trials_for(target),
                codes_evaluated: evaluated,
            });
        }
    }
    Ok(ThresholdResult {
        rate: 0.0,
        met: false,
        k_amp: 0,
        k_phase: 0,
        r_amp: 0.0,
        r_phase: 0.0,
        estimate: None,
        underpowered: opts.trials < min_trials_for(target),
        codes_evaluated: evaluated,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatePairCandidate {
    pub ratio: f64,
    pub r_amp: f64,
    pub r_phase: f64,
    pub quantum_rate: f64,
    pub estimate: QuantumEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatePairResult {
    pub best: RatePairCandidate,
    pub candidates: Vec<RatePairCandidate>,
}

/// Ratios tried by [`optimize_rate_pair`]: 0.70 to 1.00 in steps of 0.02.
pub fn ratio_grid() -> Vec<f64> {
    (0..=15).map(|i| (70 + 2 * i) as f64 / 100.0).collect()
}

/// Search the amplitude/phase rate ratio that minimizes the combined error
/// at the quantum rate closest to `target`. Channels with identical
/// amplitude and phase components only use equal rates.
pub fn optimize_rate_pair(
    spec: &QuantumChannelSpec,
    n: usize,
    target: f64,
    trials: u64,
    seed: u64,
    mode: Execution,
) -> Result<RatePairResult> {
    let design = CodeDesign::new(*spec, n)?;
    let ratios = if spec.is_symmetric() { vec![1.0] } else { ratio_grid() };
    let candidates = ratios
        .into_iter()
        .map(|ratio| {
            let code = code_for_quantum_rate(&design, target, ratio)?;
            let estimate = simulate_code(spec, &code, trials, seed, mode, None)?;
            Ok(RatePairCandidate {
                ratio,
                r_amp: code.amp_rate(),
                r_phase: code.phase_rate(),
                quantum_rate: code.quantum_rate(),
                estimate,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let best = candidates
        .iter()
        .min_by(|a, b| {
            a.estimate.combined.p.total_cmp(&b.estimate.combined.p).then(
                (a.ratio - DEPOLARIZING_RATE_RATIO).abs().total_cmp(&(b.ratio - DEPOLARIZING_RATE_RATIO).abs()),
            )
        })
        .expect("nonempty ratio grid")
        .clone();
    Ok(RatePairResult { best, candidates })
}

/// Exact block error probability of the successive cancellation decoder on
/// BEC(`epsilon`) with fair-coin ties, by enumerating all erasure patterns.
/// Positions in `frozen` are known to the decoder.
pub fn exact_bec_block_error(frozen: &IndexSet, epsilon: f64, n: usize) -> Result<f64> {
    if !n.is_power_of_two() || n > EXACT_ORACLE_MAX_N {
        return invalid(format!("exact oracle needs a power-of-two blocklength <= {EXACT_ORACLE_MAX_N}, got {n}"));
    }
    if !(0.0..=1.0).contains(&epsilon) {
        return invalid(format!("erasure probability {epsilon} outside [0, 1]"));
    }
    if frozen.max_index().is_some_and(|m| m > n) {
        return invalid("frozen set exceeds blocklength");
    }
    let is_info = frozen.complement(n).to_mask(n);
    let bits = n.trailing_zeros();
    let mut success = CompensatedSum::new();
    for pattern in 0u32..(1u32 << n) {
        let w = pattern.count_ones() as i32;
        let weight = epsilon.powi(w) * (1.0 - epsilon).powi(n as i32 - w);
        if weight == 0.0 {
            continue;
        }
        // Erasure status seen by the decoder, in its bit-reversed input order.
        let erased: Vec<bool> = (0..n)
            .map(|k| (pattern >> crate::polar::reverse_bits(k, bits)) & 1 == 1)
            .collect();
        let mut status = Vec::with_capacity(n);
        leaf_erasures(&erased, &mut status);
        let ties = status.iter().zip(&is_info).filter(|(&e, &info)| e && info).count();
        success.add(weight * 0.5f64.powi(ties as i32));
    }
    Ok((1.0 - success.value()).clamp(0.0, 1.0))
}

/// Genie-aided erasure status of each decided bit: a check node is erased if
/// either input is, a variable node only if both are.
fn leaf_erasures(erased: &[bool], out: &mut Vec<bool>) {
    if erased.len() == 1 {
        out.push(erased[0]);
        return;
    }
    let h = erased.len() / 2;
    let (a, b) = erased.split_at(h);
    let check: Vec<bool> = a.iter().zip(b).map(|(&x, &y)| x || y).collect();
    leaf_erasures(&check, out);
    let var: Vec<bool> = a.iter().zip(b).map(|(&x, &y)| x && y).collect();
    leaf_erasures(&var, out);
}
