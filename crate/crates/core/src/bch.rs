//! Narrow-sense primitive binary BCH codes with a bounded-distance decoder.
//!
//! Codeword bit `i` is the coefficient of `x^i`. Encoding is systematic: the
//! `k` message bits occupy positions `n−k..n` and the parity bits are the
//! remainder of `x^{n−k}·m(x)` modulo the generator. Decoding computes `2t`
//! syndromes, runs Berlekamp–Massey for the error locator and finds its roots
//! with a Chien search. Anything that does not resolve to at most `t`
//! consistent error locations is reported as [`DecodeOutcome::Failure`].

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::BitSequence;
use crate::gf::{BinaryField, FieldError};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BchError {
    #[error("extension degree {0} outside 2..=10")]
    UnsupportedDegree(u32),
    #[error("correction capability must be at least 1")]
    ZeroCapability,
    #[error("t = {t} leaves no message bits for n = {n}")]
    TooManyErrors { n: usize, t: usize },
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("descriptor does not match the constructed code: {0}")]
    DescriptorMismatch(String),
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DecodeOutcome {
    Corrected {
        message: BitSequence,
        errors_corrected: usize,
    },
    Failure,
}

impl DecodeOutcome {
    pub fn message(&self) -> Option<&BitSequence> {
        match self {
            Self::Corrected { message, .. } => Some(message),
            Self::Failure => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BchCode {
    field: BinaryField,
    t: usize,
    n: usize,
    k: usize,
    /// Generator coefficients, `generator[i]` for `x^i`; length `n − k + 1`.
    generator: Vec<u8>,
    /// Generator without its leading term, packed little-endian into words.
    feedback: Vec<u64>,
}

/// JSON description of a code.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeDescriptor {
    pub m: u32,
    pub primitive_poly: u32,
    pub t: usize,
    pub n: usize,
    pub k: usize,
    pub d_design: usize,
    pub g_hex: String,
}

/// Binary polynomial product; coefficient vectors are lowest degree first.
fn poly_mul_gf2(a: &[u8], b: &[u8]) -> Vec<u8> {
    let mut out = vec![0u8; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 1 {
            for (j, &bj) in b.iter().enumerate() {
                out[i + j] ^= bj;
            }
        }
    }
    out
}

/// Minimal polynomial over GF(2) of `α^power`.
fn minimal_polynomial(field: &BinaryField, power: usize) -> Vec<u8> {
    let n = field.order();
    let mut coset = vec![power % n];
    let mut next = (power * 2) % n;
    while next != coset[0] {
        coset.push(next);
        next = (next * 2) % n;
    }
    // Π (x + α^j) with coefficients in GF(2^m); they all land in {0, 1}.
    let mut poly: Vec<u16> = vec![1];
    for &j in &coset {
        let root = field.alpha_pow(j);
        let mut out = vec![0u16; poly.len() + 1];
        for (i, &c) in poly.iter().enumerate() {
            out[i + 1] ^= c;
            out[i] ^= field.mul(c, root);
        }
        poly = out;
    }
    poly.into_iter()
        .map(|c| {
            debug_assert!(c <= 1);
            c as u8
        })
        .collect()
}

impl BchCode {
    /// Narrow-sense primitive BCH code of length `2^m − 1` correcting `t` errors.
    pub fn new(m: u32, t: usize) -> Result<Self, BchError> {
        if !(2..=10).contains(&m) {
            return Err(BchError::UnsupportedDegree(m));
        }
        Self::from_field(BinaryField::new(m)?, t)
    }

    pub fn with_primitive_poly(m: u32, poly: u32, t: usize) -> Result<Self, BchError> {
        if !(2..=10).contains(&m) {
            return Err(BchError::UnsupportedDegree(m));
        }
        Self::from_field(BinaryField::with_poly(m, poly)?, t)
    }

    fn from_field(field: BinaryField, t: usize) -> Result<Self, BchError> {
        if t == 0 {
            return Err(BchError::ZeroCapability);
        }
        let n = field.order();
        if 2 * t >= n {
            return Err(BchError::TooManyErrors { n, t });
        }
        let mut generator = vec![1u8];
        let mut covered = vec![false; n];
        for power in 1..=2 * t {
            if covered[power % n] {
                continue;
            }
            let mut j = power % n;
            loop {
                covered[j] = true;
                j = (j * 2) % n;
                if j == power % n {
                    break;
                }
            }
            generator = poly_mul_gf2(&generator, &minimal_polynomial(&field, power));
        }
        let parity = generator.len() - 1;
        if parity >= n {
            return Err(BchError::TooManyErrors { n, t });
        }
        let mut feedback = vec![0u64; parity.div_ceil(64)];
        for (i, &g) in generator[..parity].iter().enumerate() {
            feedback[i / 64] |= u64::from(g) << (i % 64);
        }
        Ok(Self {
            field,
            t,
            n,
            k: n - parity,
            generator,
            feedback,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn t(&self) -> usize {
        self.t
    }

    /// Designed distance `2t + 1`.
    pub fn designed_distance(&self) -> usize {
        2 * self.t + 1
    }

    pub fn field(&self) -> &BinaryField {
        &self.field
    }

    pub fn generator(&self) -> &[u8] {
        &self.generator
    }

    pub fn parity_len(&self) -> usize {
        self.n - self.k
    }

    /// Systematic encoding: parity in positions `0..n−k`, message in `n−k..n`.
    pub fn encode(&self, message: &BitSequence) -> Result<BitSequence, BchError> {
        if message.len() != self.k {
            return Err(BchError::LengthMismatch {
                expected: self.k,
                found: message.len(),
            });
        }
        let parity = self.parity_len();
        let words = self.feedback.len();
        let top_word = (parity - 1) / 64;
        let top_bit = (parity - 1) % 64;
        let top_mask = if parity.is_multiple_of(64) {
            u64::MAX
        } else {
            (1u64 << (parity % 64)) - 1
        };
        let mut rem = vec![0u64; words];
        // LFSR division, highest-degree message coefficient first.
        for &bit in message.as_slice().iter().rev() {
            let fb = u64::from(bit) ^ (rem[top_word] >> top_bit & 1);
            for w in (1..words).rev() {
                rem[w] = (rem[w] << 1) | (rem[w - 1] >> 63);
            }
            rem[0] <<= 1;
            rem[words - 1] &= top_mask;
            if fb == 1 {
                rem.iter_mut().zip(&self.feedback).for_each(|(r, g)| *r ^= g);
            }
        }
        let mut bits = Vec::with_capacity(self.n);
        bits.extend((0..parity).map(|i| (rem[i / 64] >> (i % 64) & 1) as u8));
        bits.extend_from_slice(message.as_slice());
        Ok(BitSequence::new(bits).expect("binary"))
    }

    /// `S_j = r(α^j)` for `j = 1..=2t`.
    pub fn syndromes(&self, received: &BitSequence) -> Result<Vec<u16>, BchError> {
        if received.len() != self.n {
            return Err(BchError::LengthMismatch {
                expected: self.n,
                found: received.len(),
            });
        }
        let f = &self.field;
        let mut s = vec![0u16; 2 * self.t];
        for (i, _) in received.as_slice().iter().enumerate().filter(|(_, &b)| b == 1) {
            for j in (1..=2 * self.t).step_by(2) {
                s[j - 1] ^= f.alpha_pow(i * j);
            }
        }
        // Over GF(2), r(α^{2j}) = r(α^j)².
        for j in (2..=2 * self.t).step_by(2) {
            s[j - 1] = f.mul(s[j / 2 - 1], s[j / 2 - 1]);
        }
        Ok(s)
    }

    pub fn is_codeword(&self, word: &BitSequence) -> Result<bool, BchError> {
        Ok(self.syndromes(word)?.iter().all(|&s| s == 0))
    }

    /// Error-locator polynomial (lowest degree first) by Berlekamp–Massey.
    fn error_locator(&self, s: &[u16]) -> (Vec<u16>, usize) {
        let f = &self.field;
        let mut c = vec![0u16; 2 * self.t + 2];
        let mut b = vec![0u16; 2 * self.t + 2];
        c[0] = 1;
        b[0] = 1;
        let (mut len, mut shift, mut last) = (0usize, 1usize, 1u16);
        for r in 0..s.len() {
            let mut d = s[r];
            for i in 1..=len {
                d ^= f.mul(c[i], s[r - i]);
            }
            if d == 0 {
                shift += 1;
                continue;
            }
            let coef = f.div(d, last).expect("last discrepancy is nonzero");
            let prev = c.clone();
            for i in 0..c.len() - shift {
                c[i + shift] ^= f.mul(coef, b[i]);
            }
            if 2 * len <= r {
                len = r + 1 - len;
                b = prev;
                last = d;
                shift = 1;
            } else {
                shift += 1;
            }
        }
        (c, len)
    }

    /// Bounded-distance decoding up to `t` errors.
    pub fn decode(&self, received: &BitSequence) -> Result<DecodeOutcome, BchError> {
        let s = self.syndromes(received)?;
        let parity = self.parity_len();
        if s.iter().all(|&x| x == 0) {
            return Ok(DecodeOutcome::Corrected {
                message: BitSequence::new(received.as_slice()[parity..].to_vec())
                    .expect("binary"),
                errors_corrected: 0,
            });
        }
        let (locator, len) = self.error_locator(&s);
        let degree = locator.iter().rposition(|&c| c != 0).unwrap_or(0);
        if len > self.t || degree != len {
            return Ok(DecodeOutcome::Failure);
        }

        // Chien search: position i is in error iff Λ(α^{−i}) = 0.
        let f = &self.field;
        let order = f.order();
        let mut terms: Vec<u16> = locator[..=degree].to_vec();
        let steps: Vec<u16> = (0..=degree).map(|j| f.alpha_pow((order - j % order) % order)).collect();
        let mut positions = Vec::with_capacity(degree);
        for i in 0..self.n {
            if terms.iter().fold(0u16, |acc, &x| acc ^ x) == 0 {
                positions.push(i);
                if positions.len() > degree {
                    break;
                }
            }
            for (term, &step) in terms.iter_mut().zip(&steps) {
                *term = f.mul(*term, step);
            }
        }
        if positions.len() != degree {
            return Ok(DecodeOutcome::Failure);
        }
        // The located pattern must reproduce every syndrome.
        for (j, &sj) in s.iter().enumerate() {
            let v = positions
                .iter()
                .fold(0u16, |acc, &i| acc ^ f.alpha_pow(i * (j + 1)));
            if v != sj {
                return Ok(DecodeOutcome::Failure);
            }
        }
        let mut corrected = received.clone();
        for &i in &positions {
            corrected.flip(i);
        }
        Ok(DecodeOutcome::Corrected {
            message: BitSequence::new(corrected.as_slice()[parity..].to_vec()).expect("binary"),
            errors_corrected: degree,
        })
    }

    /// Generator polynomial as big-endian hex of `Σ g_i 2^i`.
    pub fn generator_hex(&self) -> String {
        let digits = self.generator.len().div_ceil(4);
        let mut out = String::with_capacity(digits);
        for d in (0..digits).rev() {
            let nibble = (0..4)
                .filter_map(|b| self.generator.get(4 * d + b).map(|&g| g << b))
                .fold(0u8, |acc, v| acc | v);
            out.push(char::from_digit(u32::from(nibble), 16).expect("nibble"));
        }
        out
    }

    pub fn descriptor(&self) -> CodeDescriptor {
        CodeDescriptor {
            m: self.field.degree(),
            primitive_poly: self.field.primitive_poly(),
            t: self.t,
            n: self.n,
            k: self.k,
            d_design: self.designed_distance(),
            g_hex: self.generator_hex(),
        }
    }

    /// Rebuilds a code from its descriptor and checks every recorded field.
    pub fn from_descriptor(d: &CodeDescriptor) -> Result<Self, BchError> {
        let code = Self::with_primitive_poly(d.m, d.primitive_poly, d.t)?;
        let built = code.descriptor();
        if &built != d {
            return Err(BchError::DescriptorMismatch(format!(
                "expected {built:?}, found {d:?}"
            )));
        }
        Ok(code)
    }
}

/// Convenience constructor matching the `(m, t)` parameterization.
pub fn build_code(m: u32, t: usize) -> Result<BchCode, BchError> {
    BchCode::new(m, t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_code_parameters() {
        let c = build_code(4, 2).unwrap();
        assert_eq!((c.n(), c.k(), c.designed_distance()), (15, 7, 5));
        // (x^4+x+1)(x^4+x^3+x^2+x+1) = x^8+x^7+x^6+x^4+1
        assert_eq!(c.generator(), &[1, 0, 0, 0, 1, 0, 1, 1, 1]);
        assert_eq!(c.generator_hex(), "1d1");
        let h = build_code(3, 1).unwrap();
        assert_eq!((h.n(), h.k()), (7, 4));
    }

    #[test]
    fn flagship_parameters() {
        let c = build_code(8, 18).unwrap();
        assert_eq!((c.n(), c.k(), c.parity_len()), (255, 131, 124));
        assert_eq!(c.designed_distance(), 37);
        assert_eq!((c.designed_distance() - 1) / 2, 18);
    }

    #[test]
    fn parameter_errors() {
        assert_eq!(build_code(8, 0), Err(BchError::ZeroCapability));
        assert!(matches!(build_code(4, 8), Err(BchError::TooManyErrors { .. })));
        assert_eq!(build_code(11, 2), Err(BchError::UnsupportedDegree(11)));
    }

    #[test]
    fn zero_message_encodes_to_zero() {
        let c = build_code(8, 18).unwrap();
        let cw = c.encode(&BitSequence::zeros(131)).unwrap();
        assert_eq!(cw, BitSequence::zeros(255));
        assert!(c.encode(&BitSequence::zeros(130)).is_err());
    }

    #[test]
    fn clean_codeword_decodes() {
        let c = build_code(4, 2).unwrap();
        let msg = BitSequence::new(vec![1, 0, 1, 1, 0, 0, 1]).unwrap();
        let cw = c.encode(&msg).unwrap();
        assert!(c.is_codeword(&cw).unwrap());
        assert_eq!(
            c.decode(&cw).unwrap(),
            DecodeOutcome::Corrected {
                message: msg,
                errors_corrected: 0
            }
        );
    }

    #[test]
    fn descriptor_round_trip() {
        let c = build_code(8, 18).unwrap();
        let d = c.descriptor();
        assert_eq!(d.primitive_poly, 0x11D);
        assert_eq!(d.d_design, 37);
        let json = serde_json::to_string(&d).unwrap();
        let back: CodeDescriptor = serde_json::from_str(&json).unwrap();
        assert_eq!(BchCode::from_descriptor(&back).unwrap(), c);
        let mut bad = d.clone();
        bad.k = 130;
        assert!(BchCode::from_descriptor(&bad).is_err());
    }
}
