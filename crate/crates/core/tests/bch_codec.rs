use proptest::prelude::*;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use ropuf_core::bch::{build_code, BchCode, CodeDescriptor, DecodeOutcome};
use ropuf_core::BitSequence;

/// Remainder of `a` modulo `b` over GF(2); coefficient `i` multiplies `x^i`.
fn poly_mod(a: &[u8], b: &[u8]) -> Vec<u8> {
    let db = b.iter().rposition(|&c| c == 1).expect("nonzero divisor");
    let mut r = a.to_vec();
    for i in (db..r.len()).rev() {
        if r[i] == 1 {
            for (j, &bj) in b[..=db].iter().enumerate() {
                r[i - db + j] ^= bj;
            }
        }
    }
    r.truncate(db);
    r
}

fn random_bits<R: Rng>(len: usize, rng: &mut R) -> BitSequence {
    BitSequence::from_bools((0..len).map(|_| rng.random::<bool>()))
}

fn with_errors<R: Rng>(word: &BitSequence, count: usize, rng: &mut R) -> BitSequence {
    let mut out = word.clone();
    for i in sample(rng, word.len(), count) {
        out.flip(i);
    }
    out
}

/// Tabulated (n, k) of narrow-sense primitive BCH codes.
#[test]
fn dimensions_match_standard_tables() {
    let table: &[(u32, &[(usize, usize)])] = &[
        (4, &[(1, 11), (2, 7), (3, 5)]),
        (5, &[(1, 26), (2, 21), (3, 16), (5, 11), (7, 6)]),
        (6, &[(1, 57), (2, 51), (3, 45), (4, 39), (5, 36), (6, 30), (7, 24), (10, 18)]),
        (
            8,
            &[(1, 247), (2, 239), (3, 231), (4, 223), (5, 215), (6, 207), (7, 199), (8, 191),
              (9, 187), (10, 179), (11, 171), (12, 163), (13, 155), (14, 147), (15, 139), (18, 131)],
        ),
    ];
    for &(m, rows) in table {
        for &(t, k) in rows {
            let code = build_code(m, t).unwrap();
            assert_eq!(code.n(), (1 << m) - 1);
            assert_eq!(code.k(), k, "m={m} t={t}");
        }
    }
}

#[test]
fn bch_255_131_parameters() {
    let code = build_code(8, 18).unwrap();
    assert_eq!((code.n(), code.k(), code.t()), (255, 131, 18));
    assert_eq!(code.designed_distance(), 37);
    assert_eq!(code.generator().len() - 1, 124);
    assert_eq!(code.descriptor().primitive_poly, 0x11D);
}

#[test]
fn generator_divides_x_n_minus_one_and_codewords() {
    let mut rng = ChaCha20Rng::seed_from_u64(51);
    for (m, t) in [(4, 2), (5, 3), (6, 4), (8, 18), (10, 12)] {
        let code = build_code(m, t).unwrap();
        let n = code.n();
        let mut xn1 = vec![0u8; n + 1];
        xn1[0] = 1;
        xn1[n] = 1;
        assert!(poly_mod(&xn1, code.generator()).iter().all(|&c| c == 0));
        for _ in 0..20 {
            let c = code.encode(&random_bits(code.k(), &mut rng)).unwrap();
            assert!(poly_mod(c.as_slice(), code.generator()).iter().all(|&c| c == 0));
            assert!(code.syndromes(&c).unwrap().iter().all(|&s| s == 0));
            assert!(code.is_codeword(&c).unwrap());
        }
    }
}

/// GF(2^8) multiply modulo x^8+x^4+x^3+x^2+1 by shift-and-add.
fn gf256_mul(mut a: u16, mut b: u16) -> u16 {
    let mut acc = 0;
    while b != 0 {
        if b & 1 == 1 {
            acc ^= a;
        }
        b >>= 1;
        a <<= 1;
        if a & 0x100 != 0 {
            a ^= 0x11D;
        }
    }
    acc
}

#[test]
fn generator_vanishes_at_consecutive_powers_of_alpha() {
    let code = build_code(8, 18).unwrap();
    let mut alpha_j = 1u16;
    for j in 1..=40 {
        alpha_j = gf256_mul(alpha_j, 2);
        // Horner evaluation of g(α^j).
        let value = code
            .generator()
            .iter()
            .rev()
            .fold(0u16, |acc, &g| gf256_mul(acc, alpha_j) ^ u16::from(g));
        if j <= 36 {
            assert_eq!(value, 0, "g(α^{j}) != 0");
        }
    }
}

#[test]
fn bch_15_7_exhaustive_up_to_two_errors() {
    let code = build_code(4, 2).unwrap();
    assert_eq!(code.generator_hex(), "1d1");
    let mut patterns: Vec<Vec<usize>> = vec![vec![]];
    patterns.extend((0..15).map(|i| vec![i]));
    patterns.extend((0..15).flat_map(|i| (i + 1..15).map(move |j| vec![i, j])));
    assert_eq!(patterns.len(), 121);
    for msg in 0u32..128 {
        let message = BitSequence::new((0..7).map(|b| (msg >> b & 1) as u8).collect()).unwrap();
        let codeword = code.encode(&message).unwrap();
        assert_eq!(&codeword.as_slice()[8..], message.as_slice());
        for pattern in &patterns {
            let mut r = codeword.clone();
            pattern.iter().for_each(|&i| r.flip(i));
            match code.decode(&r).unwrap() {
                DecodeOutcome::Corrected {
                    message: m,
                    errors_corrected,
                } => {
                    assert_eq!(m, message);
                    assert_eq!(errors_corrected, pattern.len());
                }
                DecodeOutcome::Failure => panic!("message {msg} pattern {pattern:?}"),
            }
        }
    }
}

#[test]
fn bch_255_131_random_roundtrips() {
    let code = build_code(8, 18).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(52);
    for trial in 0..100_000 {
        let message = random_bits(131, &mut rng);
        let codeword = code.encode(&message).unwrap();
        let errors = rng.random_range(0..=18);
        let received = with_errors(&codeword, errors, &mut rng);
        assert_eq!(
            code.decode(&received).unwrap(),
            DecodeOutcome::Corrected {
                message,
                errors_corrected: errors
            },
            "trial {trial}"
        );
    }
}

fn beyond_capability(code: &BchCode, trials: usize, seed: u64) {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let t = code.t();
    for _ in 0..trials {
        let message = random_bits(code.k(), &mut rng);
        let codeword = code.encode(&message).unwrap();
        let received = with_errors(&codeword, t + 1, &mut rng);
        match code.decode(&received).unwrap() {
            DecodeOutcome::Failure => {}
            DecodeOutcome::Corrected { message: m, .. } => {
                // A bounded-distance decoder may only land on another codeword
                // within distance t of the received word.
                assert_ne!(m, message);
                let other = code.encode(&m).unwrap();
                assert!(other.hamming_distance(&received).unwrap() <= t);
            }
        }
    }
}

#[test]
fn t_plus_one_errors_fail_or_miscorrect_within_t() {
    beyond_capability(&build_code(8, 18).unwrap(), 10_000, 53);
    beyond_capability(&build_code(4, 2).unwrap(), 10_000, 54);
    beyond_capability(&build_code(5, 1).unwrap(), 10_000, 55);
}

#[test]
fn descriptor_round_trip_and_mismatch() {
    let code = build_code(8, 18).unwrap();
    let d = code.descriptor();
    let json = serde_json::to_string(&d).unwrap();
    let back: CodeDescriptor = serde_json::from_str(&json).unwrap();
    assert_eq!(BchCode::from_descriptor(&back).unwrap(), code);
    let mut bad = d.clone();
    bad.k = 130;
    assert!(BchCode::from_descriptor(&bad).is_err());
}

#[test]
fn invalid_parameters_are_rejected() {
    assert!(build_code(1, 1).is_err());
    assert!(build_code(11, 1).is_err());
    assert!(build_code(8, 0).is_err());
    assert!(build_code(4, 8).is_err());
    let code = build_code(4, 2).unwrap();
    assert!(code.encode(&BitSequence::zeros(8)).is_err());
    assert!(code.decode(&BitSequence::zeros(14)).is_err());
}

proptest! {
    #[test]
    fn encoding_is_linear(a in prop::collection::vec(0u8..2, 131), b in prop::collection::vec(0u8..2, 131)) {
        let code = build_code(8, 18).unwrap();
        let a = BitSequence::new(a).unwrap();
        let b = BitSequence::new(b).unwrap();
        let sum = code.encode(&a.xor(&b).unwrap()).unwrap();
        let parts = code.encode(&a).unwrap().xor(&code.encode(&b).unwrap()).unwrap();
        prop_assert_eq!(sum, parts);
    }

    #[test]
    fn syndromes_depend_only_on_error_pattern(
        msg in prop::collection::vec(0u8..2, 131),
        positions in prop::collection::btree_set(0usize..255, 0..40),
    ) {
        let code = build_code(8, 18).unwrap();
        let c = code.encode(&BitSequence::new(msg).unwrap()).unwrap();
        let mut e = BitSequence::zeros(255);
        positions.iter().for_each(|&i| e.flip(i));
        prop_assert_eq!(code.syndromes(&c.xor(&e).unwrap()).unwrap(), code.syndromes(&e).unwrap());
    }
}
