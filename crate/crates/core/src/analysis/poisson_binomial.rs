//! Tail probabilities of a sum of independent, non-identical Bernoulli variables.
//!
//! The block-error probability of a bounded-distance decoder correcting up
//! to `t` errors is `P[K > t]` with `K = Σ Bernoulli(p_i)`. Two independent
//! routes are provided: the characteristic-function DFT, and an exact
//! convolution DP that serves as its oracle.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use super::AnalysisError;

fn validate(p: &[f64], t: usize) -> Result<(), AnalysisError> {
    if let Some(&bad) = p.iter().find(|&&v| !(0.0..=1.0).contains(&v)) {
        return Err(AnalysisError::ProbabilityOutOfRange(bad));
    }
    if t > p.len() {
        return Err(AnalysisError::InvalidParameter(format!(
            "t = {t} exceeds the number of trials {}",
            p.len()
        )));
    }
    Ok(())
}

/// Poisson-binomial PMF via the DFT of the characteristic function.
///
/// `P[K=k] = (1/(N+1)) Σ_ℓ ω^{−ℓk} Π_j (1 − p_j + p_j ω^ℓ)`, `ω = e^{2πi/(N+1)}`.
pub fn pmf_dftcf(p: &[f64]) -> Vec<f64> {
    let len = p.len() + 1;
    let step = 2.0 * std::f64::consts::PI / len as f64;
    let mut cf: Vec<Complex64> = (0..len)
        .map(|l| {
            let w = Complex64::from_polar(1.0, step * l as f64);
            p.iter()
                .fold(Complex64::new(1.0, 0.0), |acc, &pj| acc * (w * pj + (1.0 - pj)))
        })
        .collect();
    // rustfft's forward transform uses e^{-2πi ℓk/len}, i.e. ω^{−ℓk}.
    FftPlanner::new().plan_fft_forward(len).process(&mut cf);
    cf.iter().map(|c| c.re / len as f64).collect()
}

/// Poisson-binomial PMF by sequential convolution.
pub fn pmf_dp(p: &[f64]) -> Vec<f64> {
    let mut pmf = vec![0.0; p.len() + 1];
    pmf[0] = 1.0;
    for (j, &pj) in p.iter().enumerate() {
        for k in (1..=j + 1).rev() {
            pmf[k] = pmf[k] * (1.0 - pj) + pmf[k - 1] * pj;
        }
        pmf[0] *= 1.0 - pj;
    }
    pmf
}

/// `P[K > t]` via the DFT-CF method, clamped to `[0, 1]`.
pub fn block_error_probability_dftcf(p: &[f64], t: usize) -> Result<f64, AnalysisError> {
    validate(p, t)?;
    let tail: f64 = pmf_dftcf(p)[t + 1..].iter().sum();
    Ok(tail.clamp(0.0, 1.0))
}

/// `P[K > t]` via the convolution DP.
pub fn block_error_probability_dp(p: &[f64], t: usize) -> Result<f64, AnalysisError> {
    validate(p, t)?;
    let tail: f64 = pmf_dp(p)[t + 1..].iter().sum();
    Ok(tail.clamp(0.0, 1.0))
}

/// `P[Bin(n, p) > t]`, summing the upper-tail terms in the log domain.
pub fn binomial_tail(n: usize, p: f64, t: usize) -> Result<f64, AnalysisError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(AnalysisError::ProbabilityOutOfRange(p));
    }
    if t >= n {
        return Ok(0.0);
    }
    if p == 0.0 {
        return Ok(0.0);
    }
    if p == 1.0 {
        return Ok(1.0);
    }
    let (lp, lq) = (p.ln(), (-p).ln_1p());
    let mut log_term = n as f64 * lq;
    let mut total = 0.0;
    for j in 0..n {
        // term(j+1) = term(j)·(n−j)/(j+1)·p/(1−p)
        log_term += ((n - j) as f64).ln() - ((j + 1) as f64).ln() + lp - lq;
        if j + 1 > t {
            total += log_term.exp();
        }
    }
    Ok(total.clamp(0.0, 1.0))
}
