//! Binary sequences with XOR arithmetic and a compact hex form.

use std::fmt;
use std::ops::BitXor;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BitsError {
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("value {0} is not a bit")]
    NotABit(u8),
    #[error("invalid hex: {0}")]
    InvalidHex(String),
}

/// Sequence of bits stored one per byte (each 0 or 1).
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitSequence {
    bits: Vec<u8>,
}

impl BitSequence {
    pub fn new(bits: Vec<u8>) -> Result<Self, BitsError> {
        if let Some(&b) = bits.iter().find(|&&b| b > 1) {
            return Err(BitsError::NotABit(b));
        }
        Ok(Self { bits })
    }

    pub fn zeros(len: usize) -> Self {
        Self { bits: vec![0; len] }
    }

    pub fn from_bools(bits: impl IntoIterator<Item = bool>) -> Self {
        Self {
            bits: bits.into_iter().map(u8::from).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.bits
    }

    pub fn into_inner(self) -> Vec<u8> {
        self.bits
    }

    pub fn get(&self, i: usize) -> u8 {
        self.bits[i]
    }

    pub fn flip(&mut self, i: usize) {
        self.bits[i] ^= 1;
    }

    pub fn weight(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 1).count()
    }

    pub fn xor(&self, other: &Self) -> Result<Self, BitsError> {
        if self.len() != other.len() {
            return Err(BitsError::LengthMismatch(self.len(), other.len()));
        }
        Ok(Self {
            bits: self.bits.iter().zip(&other.bits).map(|(a, b)| a ^ b).collect(),
        })
    }

    pub fn hamming_distance(&self, other: &Self) -> Result<usize, BitsError> {
        if self.len() != other.len() {
            return Err(BitsError::LengthMismatch(self.len(), other.len()));
        }
        Ok(self.bits.iter().zip(&other.bits).filter(|(a, b)| a != b).count())
    }

    /// Packs bits MSB-first into bytes, zero-padding the last byte.
    pub fn to_bytes(&self) -> Vec<u8> {
        self.bits
            .chunks(8)
            .map(|chunk| {
                chunk
                    .iter()
                    .enumerate()
                    .fold(0u8, |acc, (i, &b)| acc | (b << (7 - i)))
            })
            .collect()
    }

    pub fn from_bytes(bytes: &[u8], len: usize) -> Result<Self, BitsError> {
        if bytes.len() != len.div_ceil(8) {
            return Err(BitsError::LengthMismatch(bytes.len(), len.div_ceil(8)));
        }
        let bits: Vec<u8> = (0..len).map(|i| (bytes[i / 8] >> (7 - i % 8)) & 1).collect();
        let padding_clear = (len..bytes.len() * 8).all(|i| (bytes[i / 8] >> (7 - i % 8)) & 1 == 0);
        if !padding_clear {
            return Err(BitsError::InvalidHex("nonzero padding bits".into()));
        }
        Ok(Self { bits })
    }

    pub fn to_hex(&self) -> String {
        self.to_bytes().iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn from_hex(text: &str, len: usize) -> Result<Self, BitsError> {
        if !text.len().is_multiple_of(2) {
            return Err(BitsError::InvalidHex("odd number of digits".into()));
        }
        let bytes = (0..text.len())
            .step_by(2)
            .map(|i| {
                text.get(i..i + 2)
                    .and_then(|pair| u8::from_str_radix(pair, 16).ok())
                    .ok_or_else(|| BitsError::InvalidHex(text.to_string()))
            })
            .collect::<Result<Vec<u8>, _>>()?;
        Self::from_bytes(&bytes, len)
    }
}

impl BitXor for &BitSequence {
    type Output = BitSequence;

    /// Panics on length mismatch; use [`BitSequence::xor`] for a checked version.
    fn bitxor(self, rhs: Self) -> BitSequence {
        self.xor(rhs).expect("equal-length bit sequences")
    }
}

impl fmt::Debug for BitSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = self.bits.iter().map(|&b| if b == 1 { '1' } else { '0' }).collect();
        write!(f, "BitSequence({s})")
    }
}

impl From<Vec<bool>> for BitSequence {
    fn from(v: Vec<bool>) -> Self {
        Self::from_bools(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hex_layout_is_msb_first() {
        let b = BitSequence::new(vec![1, 0, 0, 0, 0, 0, 0, 1, 1]).unwrap();
        assert_eq!(b.to_hex(), "8180");
        assert!(BitSequence::from_hex("8181", 9).is_err());
        assert!(BitSequence::from_hex("zz", 8).is_err());
    }

    #[test]
    fn rejects_non_bits() {
        assert_eq!(BitSequence::new(vec![0, 2]), Err(BitsError::NotABit(2)));
    }

    proptest! {
        #[test]
        fn hex_round_trip(bits in proptest::collection::vec(0u8..2, 0..300)) {
            let seq = BitSequence::new(bits).unwrap();
            let back = BitSequence::from_hex(&seq.to_hex(), seq.len()).unwrap();
            prop_assert_eq!(back, seq);
        }
    }
}
