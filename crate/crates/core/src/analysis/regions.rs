//! Secret-key / privacy-leakage rate regions for a binary symmetric channel.

use serde::{Deserialize, Serialize};

use super::special::{binary_convolution, binary_entropy, q_inverse};
use super::AnalysisError;

/// Boundary sample count used when callers have no preference.
pub const DEFAULT_GRID: usize = 1024;

/// Secret-key rate and privacy-leakage rate, in bits per source bit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub r_s: f64,
    pub r_ell: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegionKind {
    /// Fuzzy commitment with perfect secrecy.
    Fcs,
    /// Chosen-secret model.
    Cs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionBoundary {
    pub kind: RegionKind,
    pub points: Vec<RatePoint>,
}

impl RegionBoundary {
    pub fn max_secret_key_rate(&self) -> Option<RatePoint> {
        self.points
            .iter()
            .copied()
            .max_by(|a, b| a.r_s.total_cmp(&b.r_s))
    }

    /// CSV with header `r_s,r_ell`, one boundary point per row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r_s,r_ell\n");
        for p in &self.points {
            out.push_str(&format!("{},{}\n", p.r_s, p.r_ell));
        }
        out
    }
}

/// Boundary of the fuzzy-commitment region: `R_ℓ = 1 − R_s` for
/// `0 ≤ R_s ≤ 1 − H_b(p)`, sampled uniformly.
pub fn fcs_region(p: f64, grid: usize) -> Result<RegionBoundary, AnalysisError> {
    if !(0.0..=0.5).contains(&p) {
        return Err(AnalysisError::ProbabilityOutOfRange(p));
    }
    if grid < 2 {
        return Err(AnalysisError::InvalidParameter("grid must be at least 2".into()));
    }
    let max_rate = 1.0 - binary_entropy(p)?;
    let points = if max_rate <= 0.0 {
        vec![RatePoint { r_s: 0.0, r_ell: 1.0 }]
    } else {
        (0..grid)
            .map(|i| {
                let r_s = if i + 1 == grid {
                    max_rate
                } else {
                    max_rate * i as f64 / (grid - 1) as f64
                };
                RatePoint {
                    r_s,
                    r_ell: 1.0 - r_s,
                }
            })
            .collect()
    };
    Ok(RegionBoundary {
        kind: RegionKind::Fcs,
        points,
    })
}

/// Chosen-secret boundary point for a binary test channel `U → X` with
/// crossover `alpha`.
pub fn cs_point(p: f64, alpha: f64) -> Result<RatePoint, AnalysisError> {
    let h = binary_entropy(binary_convolution(alpha, p))?;
    Ok(RatePoint {
        r_s: 1.0 - h,
        r_ell: h - binary_entropy(alpha)?,
    })
}

/// Chosen-secret region boundary swept over `alpha ∈ [0, 1/2]`, sorted by `R_s`.
pub fn cs_region_mgl(p: f64, grid: usize) -> Result<RegionBoundary, AnalysisError> {
    if !(p > 0.0 && p < 0.5) {
        return Err(AnalysisError::ProbabilityOutOfRange(p));
    }
    if grid < 2 {
        return Err(AnalysisError::InvalidParameter("grid must be at least 2".into()));
    }
    let mut points = (0..grid)
        .map(|i| {
            let alpha = if i + 1 == grid {
                0.5
            } else {
                0.5 * i as f64 / (grid - 1) as f64
            };
            cs_point(p, alpha)
        })
        .collect::<Result<Vec<_>, _>>()?;
    points.sort_by(|a, b| a.r_s.total_cmp(&b.r_s));
    Ok(RegionBoundary {
        kind: RegionKind::Cs,
        points,
    })
}

/// Normal approximation of the finite-length achievable rate pair with a
/// `log₂(n)/(2n)` correction.
pub fn finite_length_point(n: usize, p: f64, eps: f64) -> Result<RatePoint, AnalysisError> {
    if n == 0 {
        return Err(AnalysisError::InvalidParameter("n must be positive".into()));
    }
    if !(p > 0.0 && p < 0.5) {
        return Err(AnalysisError::ProbabilityOutOfRange(p));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(AnalysisError::ProbabilityOutOfRange(eps));
    }
    let n_f = n as f64;
    let dispersion = p * (1.0 - p) * ((1.0 - p) / p).log2().powi(2);
    let r_s = 1.0 - binary_entropy(p)? - (dispersion / n_f).sqrt() * q_inverse(eps)?
        + n_f.log2() / (2.0 * n_f);
    Ok(RatePoint {
        r_s,
        r_ell: 1.0 - r_s,
    })
}

/// Rate pair of a linear `(n, k)` code used in the fuzzy commitment scheme,
/// as exact numerator/denominator pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeRates {
    pub n: usize,
    pub k: usize,
}

impl CodeRates {
    pub fn secret_key_rate(&self) -> (usize, usize) {
        (self.k, self.n)
    }

    pub fn privacy_leakage_rate(&self) -> (usize, usize) {
        (self.n - self.k, self.n)
    }

    pub fn point(&self) -> RatePoint {
        RatePoint {
            r_s: self.k as f64 / self.n as f64,
            r_ell: (self.n - self.k) as f64 / self.n as f64,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fcs_endpoints() {
        let r = fcs_region(0.0, 16).unwrap();
        assert_eq!(r.max_secret_key_rate().unwrap(), RatePoint { r_s: 1.0, r_ell: 0.0 });
        let r = fcs_region(0.5, 16).unwrap();
        assert_eq!(r.points, vec![RatePoint { r_s: 0.0, r_ell: 1.0 }]);
        assert!(fcs_region(0.6, 16).is_err());
    }

    #[test]
    fn fcs_optimum_at_reference_crossover() {
        let r = fcs_region(0.0088, DEFAULT_GRID).unwrap();
        assert!((r.max_secret_key_rate().unwrap().r_s - 0.9268).abs() <= 1e-3);
        assert!(r.points.iter().all(|p| (p.r_s + p.r_ell - 1.0).abs() < 1e-15));
    }

    #[test]
    fn cs_endpoints() {
        let p = 0.0088;
        let at_zero = cs_point(p, 0.0).unwrap();
        let h = binary_entropy(p).unwrap();
        assert!((at_zero.r_s - (1.0 - h)).abs() < 1e-12);
        assert!((at_zero.r_ell - h).abs() < 1e-12);
        let at_half = cs_point(p, 0.5).unwrap();
        assert_eq!(at_half, RatePoint { r_s: 0.0, r_ell: 0.0 });
        assert!(cs_region_mgl(0.0, 8).is_err());
        assert!(cs_region_mgl(0.1, 1).is_err());
    }

    #[test]
    fn finite_length_limits() {
        let p = 0.0088;
        let cap = 1.0 - binary_entropy(p).unwrap();
        let big = finite_length_point(1 << 40, p, 1e-9).unwrap();
        assert!((big.r_s - cap).abs() < 1e-3);
        let n = 255usize;
        let half = finite_length_point(n, p, 0.5).unwrap();
        let expect = cap + (n as f64).log2() / (2.0 * n as f64);
        assert!((half.r_s - expect).abs() < 1e-15);
        let fl = finite_length_point(255, 0.0088, 1e-9).unwrap();
        assert!((fl.r_s - 0.703).abs() <= 5e-3);
        assert!(finite_length_point(0, p, 0.1).is_err());
        assert!(finite_length_point(10, p, 1.0).is_err());
    }

    #[test]
    fn bch_rates_are_exact_ratios() {
        let rates = CodeRates { n: 255, k: 131 };
        assert_eq!(rates.secret_key_rate(), (131, 255));
        assert_eq!(rates.privacy_leakage_rate(), (124, 255));
        let pt = rates.point();
        assert!((pt.r_s - 0.514).abs() < 5e-4 && (pt.r_ell - 0.486).abs() < 5e-4);
    }
}
