//! Standard normal CDF and quantile.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use thiserror::Error;

use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("probability {0} is outside the open interval (0, 1)")]
pub struct ProbabilityDomainError(pub f64);

/// erfc for `z >= 0`: a non-alternating Taylor series below 3, a continued
/// fraction above.
fn erfc_nonneg(z: f64) -> f64 {
    if z < 3.0 {
        // erf(z) = 2/√π e^{-z²} Σ (2z²)^n z / (1·3·5⋯(2n+1))
        let z2 = z * z;
        let mut term = z;
        let mut sum = z;
        let mut n = 0.0;
        loop {
            n += 1.0;
            term *= 2.0 * z2 / (2.0 * n + 1.0);
            sum += term;
            if term <= 1e-17 * sum {
                break;
            }
        }
        1.0 - 2.0 / PI.sqrt() * (-z2).exp() * sum
    } else {
        // erfc(z) = e^{-z²}/√π · 1/(z + (1/2)/(z + 1/(z + (3/2)/(z + ...))))
        let mut frac = z;
        for k in (1..=60).rev() {
            frac = z + (k as f64 * 0.5) / frac;
        }
        (-z * z).exp() / PI.sqrt() / frac
    }
}

/// Φ(x) evaluated in `f64`.
pub fn std_normal_cdf_f64(x: f64) -> f64 {
    let z = x * FRAC_1_SQRT_2;
    if z >= 0.0 {
        1.0 - 0.5 * erfc_nonneg(z)
    } else {
        0.5 * erfc_nonneg(-z)
    }
}

pub fn std_normal_pdf_f64(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

pub fn std_normal_cdf<F: Real>(x: F) -> F {
    F::of(std_normal_cdf_f64(x.f64()))
}

// Acklam's rational approximation coefficients.
const A: [f64; 6] = [
    -3.969683028665376e+01,
    2.209460984245205e+02,
    -2.759285104469687e+02,
    1.383577518672690e+02,
    -3.066479806614716e+01,
    2.506628277459239e+00,
];
const B: [f64; 5] = [
    -5.447609879822406e+01,
    1.615858368580409e+02,
    -1.556989798598866e+02,
    6.680131188771972e+01,
    -1.328068155288572e+01,
];
const C: [f64; 6] = [
    -7.784894002430293e-03,
    -3.223964580411365e-01,
    -2.400758277161838e+00,
    -2.549732539343734e+00,
    4.374664141464968e+00,
    2.938163982698783e+00,
];
const D: [f64; 4] = [
    7.784695709041462e-03,
    3.224671290700398e-01,
    2.445134137142996e+00,
    3.754408661907416e+00,
];

fn rational_quantile(p: f64) -> f64 {
    const P_LOW: f64 = 0.02425;
    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -rational_quantile(1.0 - p)
    }
}

/// Φ⁻¹(alpha): rational approximation followed by one Newton step against
/// [`std_normal_cdf_f64`].
pub fn std_normal_quantile_f64(alpha: f64) -> Result<f64, ProbabilityDomainError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(ProbabilityDomainError(alpha));
    }
    if alpha == 0.5 {
        return Ok(0.0);
    }
    let x = rational_quantile(alpha);
    // Φ(x) − alpha, evaluated in the tail nearest x so it keeps its precision.
    let residual = if x > 0.0 {
        (1.0 - alpha) - 0.5 * erfc_nonneg(x * FRAC_1_SQRT_2)
    } else {
        std_normal_cdf_f64(x) - alpha
    };
    Ok(x - residual / std_normal_pdf_f64(x))
}

pub fn std_normal_quantile<F: Real>(alpha: F) -> Result<F, ProbabilityDomainError> {
    std_normal_quantile_f64(alpha.f64()).map(F::of)
}
