//! Binary entropy, Gaussian tail function and its inverse.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use statrs::function::erf::erfc;

use super::AnalysisError;

/// Base-2 binary entropy; `H_b(0) = H_b(1) = 0`.
pub fn binary_entropy(p: f64) -> Result<f64, AnalysisError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(AnalysisError::ProbabilityOutOfRange(p));
    }
    if p == 0.0 || p == 1.0 {
        return Ok(0.0);
    }
    Ok(-p * p.log2() - (1.0 - p) * (1.0 - p).log2())
}

/// Binary convolution `a ⋆ b = a(1−b) + (1−a)b`.
pub fn binary_convolution(a: f64, b: f64) -> f64 {
    a * (1.0 - b) + (1.0 - a) * b
}

/// Gaussian tail `Q(x) = P[Z > x]` for standard normal `Z`.
pub fn q_function(x: f64) -> f64 {
    0.5 * erfc(x * FRAC_1_SQRT_2)
}

fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Inverse Gaussian tail: the `x` with `Q(x) = u`, for `u ∈ (0, 1)`.
///
/// Safeguarded Newton iteration on `ln Q(x) − ln u`, falling back to bisection
/// whenever a step leaves the current bracket.
pub fn q_inverse(u: f64) -> Result<f64, AnalysisError> {
    if !(u > 0.0 && u < 1.0) {
        return Err(AnalysisError::ProbabilityOutOfRange(u));
    }
    if u == 0.5 {
        return Ok(0.0);
    }
    if u > 0.5 {
        return q_inverse(1.0 - u).map(|x| -x);
    }
    // Q(0) = 1/2 > u and Q(40) underflows below any positive double.
    let (mut lo, mut hi) = (0.0f64, 40.0f64);
    let target = u.ln();
    let mut x = (-2.0 * u.ln()).sqrt().min(39.0);
    for _ in 0..200 {
        let q = q_function(x);
        let g = q.ln() - target;
        if g > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let slope = -std_normal_pdf(x) / q;
        let mut next = x - g / slope;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 1e-15 * x.abs().max(1.0) {
            return Ok(next);
        }
        x = next;
    }
    Ok(x)
}
