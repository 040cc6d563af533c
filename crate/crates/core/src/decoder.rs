//! Successive cancellation decoding in the log-likelihood domain.
//!
//! The decoder works on `w = u·F^{⊗n}`, which equals the transmitted word
//! read in bit-reversed position order (see [`crate::polar`]). Check-node
//! combination is exact (no min-sum), and infinite LLRs are handled as
//! limits so erasure channels decode with three-valued evidence.

use rand::RngCore;

use crate::channel::{BinaryInputDMC, ChannelSample};
use crate::construction::IndexSet;
use crate::error::{invalid, Error, Result};
use crate::polar::{reverse_bits, BitWord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DecodeOrder {
    /// Decide `u_1, u_2, ..., u_N`.
    Natural,
    /// Decide `u_N, ..., u_1`. The word on the channel is assumed to be
    /// `encode(reflect(u))`, with `reflect(u)_i = u_{N+1-i}`.
    Reversed,
}

/// Frozen positions and their values, 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrozenMap {
    values: Vec<Option<u8>>,
}

impl FrozenMap {
    /// No frozen positions.
    pub fn new(n: usize) -> Self {
        Self { values: vec![None; n] }
    }

    pub fn from_pairs<I: IntoIterator<Item = (usize, u8)>>(n: usize, pairs: I) -> Result<Self> {
        let mut map = Self::new(n);
        for (pos, bit) in pairs {
            map.freeze(pos, bit)?;
        }
        Ok(map)
    }

    /// Freeze every position in `positions` to the matching bit of `word`.
    pub fn from_word(positions: &IndexSet, word: &[u8]) -> Result<Self> {
        Self::from_pairs(word.len(), positions.iter().map(|i| (i, word.get(i - 1).copied().unwrap_or(2))))
    }

    pub fn freeze(&mut self, pos: usize, bit: u8) -> Result<()> {
        if pos == 0 || pos > self.values.len() {
            return invalid(format!("frozen position {pos} outside 1..={}", self.values.len()));
        }
        if bit > 1 {
            return invalid(format!("frozen value {bit} is not a bit"));
        }
        self.values[pos - 1] = Some(bit);
        Ok(())
    }

    pub fn blocklength(&self) -> usize {
        self.values.len()
    }

    pub fn value(&self, pos: usize) -> Option<u8> {
        self.values[pos - 1]
    }

    pub fn positions(&self) -> IndexSet {
        IndexSet::from_mask(&self.values.iter().map(Option::is_some).collect::<Vec<_>>())
    }

    pub(crate) fn as_slice(&self) -> &[Option<u8>] {
        &self.values
    }

    fn reflected(&self) -> Self {
        Self { values: self.values.iter().rev().copied().collect() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeResult {
    pub u_hat: BitWord,
    /// Information bits decided by a coin because their LLR was exactly zero.
    pub tie_count: usize,
}

/// Check-node rule: LLR of `a ⊕ b` from the LLRs of `a` and `b`, i.e.
/// `2·atanh(tanh(a/2)·tanh(b/2))` evaluated stably.
#[inline]
pub fn llr_combine_check(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    let sign = if (a < 0.0) != (b < 0.0) { -1.0 } else { 1.0 };
    let (ma, mb) = (a.abs(), b.abs());
    if ma.is_infinite() {
        return sign * mb;
    }
    if mb.is_infinite() {
        return sign * ma;
    }
    let magnitude = ma.min(mb) + (-(ma + mb)).exp().ln_1p() - (-(ma - mb).abs()).exp().ln_1p();
    sign * magnitude
}

/// Variable-node rule `b + (−1)^{u_prev}·a`. Opposite infinite evidence is a
/// contradiction.
#[inline]
pub fn llr_variable_check(a: f64, b: f64, u_prev: u8) -> Result<f64> {
    variable(a, b, u_prev).ok_or(Error::DecodingContradiction { position: None })
}

#[inline]
fn variable(a: f64, b: f64, u_prev: u8) -> Option<f64> {
    let v = if u_prev == 0 { b + a } else { b - a };
    if v.is_nan() {
        None
    } else {
        Some(v)
    }
}

/// Reusable successive cancellation decoder for one blocklength.
#[derive(Debug, Clone)]
pub struct ScDecoder {
    n: usize,
    log_n: u32,
    /// Node of size `m` reads its input LLRs from `llr[m..2m]`.
    llr: Vec<f64>,
    /// Node of size `m` leaves its re-encoded word in `bits[m..2m]`.
    bits: Vec<u8>,
    u_hat: Vec<u8>,
    ties: usize,
    evaluations: u64,
}

struct Leaf<'a, R: ?Sized> {
    frozen: &'a [Option<u8>],
    rng: &'a mut R,
    ties: usize,
}

impl ScDecoder {
    pub fn new(n: usize) -> Result<Self> {
        if !n.is_power_of_two() {
            return invalid(format!("blocklength {n} is not a power of two"));
        }
        Ok(Self {
            n,
            log_n: n.trailing_zeros(),
            llr: vec![0.0; 2 * n],
            bits: vec![0; 2 * n],
            u_hat: vec![0; n],
            ties: 0,
            evaluations: 0,
        })
    }

    pub fn blocklength(&self) -> usize {
        self.n
    }

    /// Check- and variable-node evaluations since construction.
    pub fn evaluations(&self) -> u64 {
        self.evaluations
    }

    pub fn decode<R: RngCore + ?Sized>(
        &mut self,
        ch: &BinaryInputDMC,
        y: &[ChannelSample],
        frozen: &FrozenMap,
        order: DecodeOrder,
        rng: &mut R,
    ) -> Result<DecodeResult> {
        if y.len() != self.n || frozen.blocklength() != self.n {
            return invalid(format!(
                "decoder of length {} given {} samples and {} frozen slots",
                self.n,
                y.len(),
                frozen.blocklength()
            ));
        }
        let table = ch.llr_table();
        let mut llrs = Vec::with_capacity(self.n);
        for s in y {
            match table.get(s.0) {
                Some(&l) => llrs.push(l),
                None => return invalid(format!("symbol {} outside alphabet", s.0)),
            }
        }
        let (ties, bits) = match order {
            DecodeOrder::Natural => {
                let ties = self.decode_llrs(&llrs, frozen.as_slice(), rng)?;
                (ties, self.u_hat.clone())
            }
            DecodeOrder::Reversed => {
                let ties = self.decode_llrs(&llrs, frozen.reflected().as_slice(), rng)?;
                (ties, self.u_hat.iter().rev().copied().collect())
            }
        };
        Ok(DecodeResult { u_hat: BitWord::new(bits)?, tie_count: ties })
    }

    /// Decode in natural order from per-position channel LLRs (transmission
    /// order). The decision is left in [`ScDecoder::decision`]; returns the
    /// tie count.
    pub(crate) fn decode_llrs<R: RngCore + ?Sized>(
        &mut self,
        channel_llrs: &[f64],
        frozen: &[Option<u8>],
        rng: &mut R,
    ) -> Result<usize> {
        debug_assert_eq!(channel_llrs.len(), self.n);
        let n = self.n;
        for k in 0..n {
            self.llr[n + k] = channel_llrs[reverse_bits(k, self.log_n)];
        }
        let mut leaf = Leaf { frozen, rng, ties: 0 };
        let outcome = self.node(n, 0, &mut leaf);
        self.ties = leaf.ties;
        outcome.map(|_| leaf.ties)
    }

    /// Bits decided by the last call, valid up to the failure point if it
    /// ended in a contradiction.
    pub(crate) fn decision(&self) -> &[u8] {
        &self.u_hat
    }

    /// Ties resolved during the last call.
    pub(crate) fn last_ties(&self) -> usize {
        self.ties
    }

    fn node<R: RngCore + ?Sized>(&mut self, m: usize, offset: usize, leaf: &mut Leaf<'_, R>) -> Result<()> {
        if m == 1 {
            let l = self.llr[1];
            let bit = match leaf.frozen[offset] {
                Some(b) => b,
                None if l > 0.0 => 0,
                None if l < 0.0 => 1,
                None => {
                    leaf.ties += 1;
                    (leaf.rng.next_u32() & 1) as u8
                }
            };
            self.u_hat[offset] = bit;
            self.bits[1] = bit;
            return Ok(());
        }
        let h = m / 2;
        for j in 0..h {
            self.llr[h + j] = llr_combine_check(self.llr[m + j], self.llr[m + h + j]);
        }
        self.node(h, offset, leaf)?;
        self.bits.copy_within(h..m, m);
        for j in 0..h {
            self.llr[h + j] = variable(self.llr[m + j], self.llr[m + h + j], self.bits[m + j])
                .ok_or(Error::DecodingContradiction { position: Some(offset + h + 1) })?;
        }
        self.evaluations += m as u64;
        self.node(h, offset + h, leaf)?;
        for j in 0..h {
            let right = self.bits[h + j];
            self.bits[m + h + j] = right;
            self.bits[m + j] ^= right;
        }
        Ok(())
    }
}

/// One-shot successive cancellation decode; allocates a fresh decoder.
pub fn sc_decode<R: RngCore + ?Sized>(
    ch: &BinaryInputDMC,
    y: &[ChannelSample],
    frozen: &FrozenMap,
    order: DecodeOrder,
    rng: &mut R,
) -> Result<DecodeResult> {
    ScDecoder::new(y.len())?.decode(ch, y, frozen, order, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polar::encode;
    use approx::assert_abs_diff_eq;
    use rand::rngs::mock::StepRng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn received(bits: &[u8]) -> Vec<ChannelSample> {
        bits.iter().map(|&b| ChannelSample(b as usize)).collect()
    }

    #[test]
    fn combine_examples() {
        for x in [-3.0, 0.5, f64::INFINITY] {
            assert_eq!(llr_combine_check(0.0, x), 0.0);
        }
        assert_eq!(llr_combine_check(f64::INFINITY, f64::INFINITY), f64::INFINITY);
        assert_eq!(llr_combine_check(f64::INFINITY, f64::NEG_INFINITY), f64::NEG_INFINITY);
        assert_eq!(llr_combine_check(f64::INFINITY, -1.25), -1.25);
        let l3 = 3f64.ln();
        assert_abs_diff_eq!(llr_combine_check(l3, l3), (5.0f64 / 3.0).ln(), epsilon = 1e-15);
    }

    #[test]
    fn combine_matches_likelihood_ratio_form() {
        for &(a, b) in &[(0.3, 2.0), (-1.5, 4.0), (7.0, -0.01), (30.0, 25.0), (-0.7, -0.2)] {
            let (la, lb): (f64, f64) = (f64::exp(a), f64::exp(b));
            let expected = ((la * lb + 1.0) / (la + lb)).ln();
            assert_abs_diff_eq!(llr_combine_check(a, b), expected, epsilon = 1e-12);
            assert_abs_diff_eq!(llr_combine_check(a, b), llr_combine_check(b, a), epsilon = 1e-15);
        }
    }

    #[test]
    fn variable_examples() {
        assert_eq!(llr_variable_check(0.0, 0.7, 1).unwrap(), 0.7);
        assert_eq!(llr_variable_check(1.0, 0.5, 0).unwrap(), 1.5);
        assert_eq!(llr_variable_check(1.0, 0.5, 1).unwrap(), -0.5);
        assert_eq!(
            llr_variable_check(f64::INFINITY, f64::INFINITY, 1),
            Err(Error::DecodingContradiction { position: None })
        );
    }

    #[test]
    fn noiseless_exhaustive_length_eight() {
        let ch = BinaryInputDMC::noiseless();
        let mut rng = StepRng::new(0, 0);
        let mut dec = ScDecoder::new(8).unwrap();
        for m in 0u32..256 {
            let u = BitWord::new((0..8).map(|i| ((m >> i) & 1) as u8).collect()).unwrap();
            let y = received(encode(&u).bits());
            let out = dec.decode(&ch, &y, &FrozenMap::new(8), DecodeOrder::Natural, &mut rng).unwrap();
            assert_eq!(out.u_hat, u);
            assert_eq!(out.tie_count, 0);
        }
    }

    #[test]
    fn reversed_order_decodes_reflected_encoding() {
        let ch = BinaryInputDMC::noiseless();
        let mut rng = StepRng::new(0, 0);
        for m in 0u32..256 {
            let u: Vec<u8> = (0..8).map(|i| ((m >> i) & 1) as u8).collect();
            let reflected: Vec<u8> = u.iter().rev().copied().collect();
            let y = received(encode(&BitWord::new(reflected).unwrap()).bits());
            let out = sc_decode(&ch, &y, &FrozenMap::new(8), DecodeOrder::Reversed, &mut rng).unwrap();
            assert_eq!(out.u_hat.bits(), &u[..]);
        }
    }

    #[test]
    fn length_two_erasure_recovers_second_bit() {
        let ch = BinaryInputDMC::bec(0.5).unwrap();
        let erased = ChannelSample(2);
        for u1 in 0..2u8 {
            for u2 in 0..2u8 {
                let x = encode(&BitWord::new(vec![u1, u2]).unwrap());
                let y = [erased, ChannelSample(x.get(2) as usize)];
                let frozen = FrozenMap::from_pairs(2, [(1, u1)]).unwrap();
                let mut rng = ChaCha8Rng::seed_from_u64(3);
                let out = sc_decode(&ch, &y, &frozen, DecodeOrder::Natural, &mut rng).unwrap();
                assert_eq!(out.u_hat.bits(), &[u1, u2]);
                assert_eq!(out.tie_count, 0);
            }
        }
    }

    #[test]
    fn erased_single_bit_is_a_tie() {
        let ch = BinaryInputDMC::bec(1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let out = sc_decode(&ch, &[ChannelSample(0)], &FrozenMap::new(1), DecodeOrder::Natural, &mut rng).unwrap();
        assert_eq!(out.tie_count, 1);
    }

    #[test]
    fn frozen_values_are_respected() {
        let ch = BinaryInputDMC::bsc(0.4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let frozen = FrozenMap::from_pairs(4, [(1, 1), (3, 0)]).unwrap();
        let y = received(&[1, 0, 0, 1]);
        let out = sc_decode(&ch, &y, &frozen, DecodeOrder::Natural, &mut rng).unwrap();
        assert_eq!(out.u_hat.get(1), 1);
        assert_eq!(out.u_hat.get(3), 0);
    }

    #[test]
    fn inconsistent_frozen_values_surface_a_contradiction() {
        let ch = BinaryInputDMC::noiseless();
        let mut rng = StepRng::new(0, 0);
        // x = (u1 ⊕ u2, u2) = (0, 0); freezing u1 = 1 contradicts u2 = 0.
        let frozen = FrozenMap::from_pairs(2, [(1, 1)]).unwrap();
        let err = sc_decode(&ch, &received(&[0, 0]), &frozen, DecodeOrder::Natural, &mut rng).unwrap_err();
        assert!(matches!(err, Error::DecodingContradiction { .. }));
    }

    #[test]
    fn argument_errors() {
        let ch = BinaryInputDMC::bsc(0.1).unwrap();
        let mut rng = StepRng::new(0, 0);
        assert!(sc_decode(&ch, &received(&[0, 1, 0]), &FrozenMap::new(3), DecodeOrder::Natural, &mut rng).is_err());
        assert!(sc_decode(&ch, &received(&[0, 1]), &FrozenMap::new(4), DecodeOrder::Natural, &mut rng).is_err());
        assert!(sc_decode(&ch, &[ChannelSample(0), ChannelSample(5)], &FrozenMap::new(2), DecodeOrder::Natural, &mut rng).is_err());
        assert!(FrozenMap::from_pairs(4, [(5, 0)]).is_err());
        assert!(FrozenMap::from_pairs(4, [(2, 3)]).is_err());
    }

    #[test]
    fn evaluation_count_is_n_log_n() {
        let ch = BinaryInputDMC::bsc(0.1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for log_n in [6u32, 8, 10] {
            let n = 1usize << log_n;
            let mut dec = ScDecoder::new(n).unwrap();
            let y: Vec<ChannelSample> = (0..n).map(|_| ch.sample(0, &mut rng)).collect();
            dec.decode(&ch, &y, &FrozenMap::new(n), DecodeOrder::Natural, &mut rng).unwrap();
            assert_eq!(dec.evaluations(), (n as u64) * log_n as u64);
        }
    }
}
