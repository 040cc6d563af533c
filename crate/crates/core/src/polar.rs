//! Binary polar transform `x = u·G_N` with `G_N = B_N·F^{⊗n}` and
//! `F = [[1,0],[1,1]]`, plus the bit-reversal permutation `B_N`.
//!
//! The bit reversal acts on the input side: `x = (u·B_N)·F^{⊗n}`. Since
//! `B_N` commutes with `F^{⊗n}` the same word is also `(u·F^{⊗n})·B_N`,
//! which is the form the successive cancellation decoder relies on.

use crate::error::{invalid, Result};

/// A word of bits whose length is a power of two.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BitWord(Vec<u8>);

impl BitWord {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if !bits.len().is_power_of_two() {
            return invalid(format!("word length {} is not a power of two", bits.len()));
        }
        if let Some(pos) = bits.iter().position(|&b| b > 1) {
            return invalid(format!("entry {} at position {} is not a bit", bits[pos], pos + 1));
        }
        Ok(Self(bits))
    }

    pub fn zeros(len: usize) -> Result<Self> {
        Self::new(vec![0; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    /// Bit at the 1-based position `i`.
    pub fn get(&self, i: usize) -> u8 {
        self.0[i - 1]
    }

    pub fn into_inner(self) -> Vec<u8> {
        self.0
    }

    pub fn xor(&self, other: &BitWord) -> Result<BitWord> {
        if self.len() != other.len() {
            return invalid("xor of words with different lengths");
        }
        Ok(BitWord(self.0.iter().zip(&other.0).map(|(a, b)| a ^ b).collect()))
    }
}

impl AsRef<[u8]> for BitWord {
    fn as_ref(&self) -> &[u8] {
        &self.0
    }
}

/// A permutation of `{1..N}` stored in 1-based form: `mapping[i-1]` is the
/// image of `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexPermutation(Vec<usize>);

impl IndexPermutation {
    pub fn new(mapping: Vec<usize>) -> Result<Self> {
        let n = mapping.len();
        let mut seen = vec![false; n];
        for &m in &mapping {
            if m == 0 || m > n || seen[m - 1] {
                return invalid("mapping is not a bijection on 1..N");
            }
            seen[m - 1] = true;
        }
        Ok(Self(mapping))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Image of the 1-based index `i`.
    pub fn apply(&self, i: usize) -> usize {
        self.0[i - 1]
    }

    pub fn mapping(&self) -> &[usize] {
        &self.0
    }

    pub fn compose(&self, other: &IndexPermutation) -> IndexPermutation {
        IndexPermutation(other.0.iter().map(|&j| self.0[j - 1]).collect())
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &m)| m == i + 1)
    }
}

/// Reverse the low `bits` bits of a 0-based index.
#[inline]
pub fn reverse_bits(i: usize, bits: u32) -> usize {
    if bits == 0 {
        0
    } else {
        i.reverse_bits() >> (usize::BITS - bits)
    }
}

/// Bit-reversal permutation on `N = 2^n` indices.
pub fn bit_reversal(n: u32) -> IndexPermutation {
    let size = 1usize << n;
    IndexPermutation((0..size).map(|i| reverse_bits(i, n) + 1).collect())
}

pub(crate) fn bit_reverse_in_place<T>(v: &mut [T]) {
    let n = v.len();
    debug_assert!(n.is_power_of_two());
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = reverse_bits(i, bits);
        if i < j {
            v.swap(i, j);
        }
    }
}

/// In-place `v ← v·F^{⊗n}` butterfly.
pub(crate) fn kernel_transform_in_place(v: &mut [u8]) {
    let n = v.len();
    let mut half = 1;
    while half < n {
        for block in v.chunks_exact_mut(2 * half) {
            let (lo, hi) = block.split_at_mut(half);
            for (a, b) in lo.iter_mut().zip(hi.iter()) {
                *a ^= *b;
            }
        }
        half *= 2;
    }
}

/// In-place `u ← u·G_N`. The slice length must be a power of two.
pub(crate) fn encode_in_place(u: &mut [u8]) {
    bit_reverse_in_place(u);
    kernel_transform_in_place(u);
}

/// Encode `u` as `u·G_N` over GF(2) in `O(N log N)`.
pub fn encode(u: &BitWord) -> BitWord {
    let mut x = u.0.clone();
    encode_in_place(&mut x);
    BitWord(x)
}

/// Encode a raw bit slice, checking the length.
pub fn encode_bits(u: &[u8]) -> Result<BitWord> {
    BitWord::new(u.to_vec()).map(|w| encode(&w))
}
