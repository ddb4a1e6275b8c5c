//! Code-design calculators: required minimum distance and the GV dimension.

use num_bigint::BigUint;

use super::poisson_binomial::binomial_tail;
use super::AnalysisError;

/// Smallest odd `d = 2t + 1` whose bounded-distance decoder keeps
/// `P[Bin(n, p_max) > t]` at or below `target`.
pub fn required_min_distance(n: usize, p_max: f64, target: f64) -> Result<usize, AnalysisError> {
    if !(p_max > 0.0 && p_max < 0.5) {
        return Err(AnalysisError::ProbabilityOutOfRange(p_max));
    }
    if !(target > 0.0 && target <= 1.0) {
        return Err(AnalysisError::InvalidParameter(format!(
            "target {target} outside (0, 1]"
        )));
    }
    let mut t = 0;
    while 2 * t < n {
        if binomial_tail(n, p_max, t)? <= target {
            return Ok(2 * t + 1);
        }
        t += 1;
    }
    Err(AnalysisError::Infeasible(format!(
        "no d <= {n} reaches block-error probability {target}"
    )))
}

/// Number of words in a Hamming ball of the given radius in `{0,1}^n`.
pub fn hamming_ball_volume(n: usize, radius: usize) -> BigUint {
    let mut term = BigUint::from(1u32);
    let mut total = term.clone();
    for j in 0..radius.min(n) {
        term = term * BigUint::from(n - j) / BigUint::from(j + 1);
        total += &term;
    }
    total
}

/// Dimension guaranteed by the Gilbert–Varshamov bound for a binary code of
/// length `n` and minimum distance `d`: `n − ⌈log₂ V(n, d−1)⌉`, floored at 0.
pub fn gv_dimension(n: usize, d: usize) -> Result<usize, AnalysisError> {
    if d == 0 || d > n {
        return Err(AnalysisError::InvalidParameter(format!(
            "distance {d} outside 1..={n}"
        )));
    }
    let volume = hamming_ball_volume(n, d - 1);
    // ⌈log₂ v⌉ = bit length of v − 1 for v ≥ 1.
    let ceil_log2 = (volume - 1u32).bits() as usize;
    Ok(n.saturating_sub(ceil_log2))
}
