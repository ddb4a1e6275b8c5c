//! Arithmetic in GF(2^m) via log/antilog tables.

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FieldError {
    #[error("extension degree {0} outside 2..=16")]
    UnsupportedDegree(u32),
    #[error("polynomial {poly:#x} is not a primitive polynomial of degree {m}")]
    NotPrimitive { m: u32, poly: u32 },
}

/// Default primitive polynomial for each supported degree (bit i = coefficient of x^i).
pub fn default_primitive_poly(m: u32) -> Option<u32> {
    Some(match m {
        2 => 0x7,
        3 => 0xB,
        4 => 0x13,
        5 => 0x25,
        6 => 0x43,
        7 => 0x89,
        8 => 0x11D,
        9 => 0x211,
        10 => 0x409,
        11 => 0x805,
        12 => 0x1053,
        13 => 0x201B,
        14 => 0x4443,
        15 => 0x8003,
        16 => 0x1100B,
        _ => return None,
    })
}

/// GF(2^m) with elements as `u16` bit patterns over the basis `1, α, …, α^{m−1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryField {
    m: u32,
    poly: u32,
    /// `exp[i] = α^i`, doubled so that `exp[a + b]` needs no reduction.
    exp: Vec<u16>,
    /// `log[x]` for nonzero `x`; `log[0]` is unused.
    log: Vec<u16>,
}

impl BinaryField {
    pub fn new(m: u32) -> Result<Self, FieldError> {
        let poly = default_primitive_poly(m).ok_or(FieldError::UnsupportedDegree(m))?;
        Self::with_poly(m, poly)
    }

    /// Builds tables for the given polynomial, rejecting it unless α has
    /// multiplicative order exactly `2^m − 1`.
    pub fn with_poly(m: u32, poly: u32) -> Result<Self, FieldError> {
        if !(2..=16).contains(&m) {
            return Err(FieldError::UnsupportedDegree(m));
        }
        if poly >> m != 1 {
            return Err(FieldError::NotPrimitive { m, poly });
        }
        let order = (1usize << m) - 1;
        let mut exp = vec![0u16; 2 * order];
        let mut log = vec![0u16; order + 1];
        let mut x: u32 = 1;
        for (i, slot) in exp.iter_mut().take(order).enumerate() {
            if i > 0 && x == 1 {
                return Err(FieldError::NotPrimitive { m, poly });
            }
            *slot = x as u16;
            log[x as usize] = i as u16;
            x <<= 1;
            if x >> m & 1 == 1 {
                x ^= poly;
            }
        }
        if x != 1 {
            return Err(FieldError::NotPrimitive { m, poly });
        }
        for i in order..2 * order {
            exp[i] = exp[i - order];
        }
        Ok(Self { m, poly, exp, log })
    }

    pub fn degree(&self) -> u32 {
        self.m
    }

    pub fn primitive_poly(&self) -> u32 {
        self.poly
    }

    /// Multiplicative group order `2^m − 1`.
    pub fn order(&self) -> usize {
        self.exp.len() / 2
    }

    /// `α^i` for any non-negative exponent.
    pub fn alpha_pow(&self, i: usize) -> u16 {
        self.exp[i % self.order()]
    }

    pub fn log(&self, x: u16) -> Option<usize> {
        (x != 0).then(|| usize::from(self.log[usize::from(x)]))
    }

    pub fn mul(&self, a: u16, b: u16) -> u16 {
        if a == 0 || b == 0 {
            return 0;
        }
        self.exp[usize::from(self.log[usize::from(a)]) + usize::from(self.log[usize::from(b)])]
    }

    pub fn inv(&self, a: u16) -> Option<u16> {
        (a != 0).then(|| {
            let l = usize::from(self.log[usize::from(a)]);
            self.exp[(self.order() - l) % self.order()]
        })
    }

    pub fn div(&self, a: u16, b: u16) -> Option<u16> {
        self.inv(b).map(|ib| self.mul(a, ib))
    }

    pub fn pow(&self, a: u16, e: usize) -> u16 {
        if e == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let l = usize::from(self.log[usize::from(a)]);
        self.exp[(l * (e % self.order())) % self.order()]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tables_are_consistent() {
        for m in 2..=10 {
            let f = BinaryField::new(m).unwrap();
            let n = f.order();
            assert_eq!(f.alpha_pow(n), 1);
            for x in 1..=n as u16 {
                assert_eq!(f.alpha_pow(f.log(x).unwrap()), x);
                assert_eq!(f.mul(x, f.inv(x).unwrap()), 1);
            }
            assert!((1..n).all(|j| f.alpha_pow(j) != 1));
        }
    }

    #[test]
    fn rejects_non_primitive() {
        // x^4 + x^3 + x^2 + x + 1 is irreducible but α has order 5.
        assert_eq!(
            BinaryField::with_poly(4, 0x1F),
            Err(FieldError::NotPrimitive { m: 4, poly: 0x1F })
        );
        assert!(BinaryField::new(1).is_err());
    }

    #[test]
    fn multiplication_matches_carryless_reduction() {
        let f = BinaryField::new(8).unwrap();
        let slow = |a: u16, b: u16| {
            let mut acc: u32 = 0;
            for i in 0..8 {
                if b >> i & 1 == 1 {
                    acc ^= u32::from(a) << i;
                }
            }
            for i in (8..16).rev() {
                if acc >> i & 1 == 1 {
                    acc ^= 0x11D << (i - 8);
                }
            }
            acc as u16
        };
        for a in (0..256).step_by(7) {
            for b in (0..256).step_by(5) {
                assert_eq!(f.mul(a, b), slow(a, b));
            }
        }
        assert_eq!(f.pow(2, 8), f.mul(f.pow(2, 4), f.pow(2, 4)));
        assert_eq!(f.div(f.mul(9, 17), 17), Some(9));
    }
}
