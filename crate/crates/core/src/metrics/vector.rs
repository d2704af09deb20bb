use std::fmt;

use serde::de::{self, Deserializer, SeqAccess, Visitor};
use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};

use super::MetricsError;

const WORD_BITS: usize = 64;

pub(crate) fn words_for(dims: usize) -> usize {
    dims.div_ceil(WORD_BITS)
}

/// Binary descriptor-presence vector for one proposal.
///
/// Bits are packed into `u64` words, least significant bit first. Bits past
/// `dims` in the last word are always zero, so popcounts over whole words are
/// exact.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct DescriptionVector {
    dims: usize,
    words: Vec<u64>,
}

impl DescriptionVector {
    pub fn zeros(dims: usize) -> Self {
        Self {
            dims,
            words: vec![0; words_for(dims)],
        }
    }

    /// Builds a vector from 0/1 flags. Any other value is rejected.
    pub fn from_bits(bits: &[u8]) -> Result<Self, MetricsError> {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            match b {
                0 => {}
                1 => v.set(i),
                other => return Err(MetricsError::NonBinary { index: i, value: other }),
            }
        }
        Ok(v)
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, _) in bits.iter().enumerate().filter(|(_, &b)| b) {
            v.set(i);
        }
        v
    }

    /// Vector of length `dims` with ones at `indices`.
    pub fn from_indices(dims: usize, indices: &[usize]) -> Result<Self, MetricsError> {
        let mut v = Self::zeros(dims);
        for &i in indices {
            if i >= dims {
                return Err(MetricsError::IndexOutOfRange { index: i, dims });
            }
            v.set(i);
        }
        Ok(v)
    }

    /// Wraps pre-packed words. High bits beyond `dims` are cleared.
    pub fn from_words(dims: usize, mut words: Vec<u64>) -> Result<Self, MetricsError> {
        if words.len() != words_for(dims) {
            return Err(MetricsError::WordCount {
                expected: words_for(dims),
                actual: words.len(),
            });
        }
        clear_tail(dims, &mut words);
        Ok(Self { dims, words })
    }

    fn set(&mut self, i: usize) {
        self.words[i / WORD_BITS] |= 1 << (i % WORD_BITS);
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn get(&self, i: usize) -> bool {
        i < self.dims && self.words[i / WORD_BITS] >> (i % WORD_BITS) & 1 == 1
    }

    pub fn count_ones(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Positions of the set bits, ascending.
    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.dims).filter(move |&i| self.get(i))
    }

    pub fn to_bits(&self) -> Vec<u8> {
        (0..self.dims).map(|i| self.get(i) as u8).collect()
    }

    pub(crate) fn check_dims(&self, other: &Self) -> Result<(), MetricsError> {
        if self.dims != other.dims {
            return Err(MetricsError::DimensionMismatch {
                left: self.dims,
                right: other.dims,
            });
        }
        Ok(())
    }
}

fn clear_tail(dims: usize, words: &mut [u64]) {
    let rem = dims % WORD_BITS;
    if rem != 0 {
        if let Some(last) = words.last_mut() {
            *last &= (1u64 << rem) - 1;
        }
    }
}

impl fmt::Debug for DescriptionVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for i in 0..self.dims {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        f.write_str("]")
    }
}

impl Serialize for DescriptionVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.dims))?;
        for i in 0..self.dims {
            seq.serialize_element(&(self.get(i) as u8))?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for DescriptionVector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct BitsVisitor;

        impl<'de> Visitor<'de> for BitsVisitor {
            type Value = DescriptionVector;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("an array of 0/1 flags")
            }

            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<Self::Value, A::Error> {
                let mut bits = Vec::with_capacity(seq.size_hint().unwrap_or(0));
                while let Some(b) = seq.next_element::<u8>()? {
                    bits.push(b);
                }
                DescriptionVector::from_bits(&bits).map_err(de::Error::custom)
            }
        }

        deserializer.deserialize_seq(BitsVisitor)
    }
}
