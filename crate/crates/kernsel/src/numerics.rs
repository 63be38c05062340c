//! Shared measurement conventions: quantiles, evaluation grids and the
//! Riemann-sum L2 distance that every criterion and report uses.
//!
//! The L2 rule is a rectangle sum with the uniform grid step over all grid
//! points. It is deliberately the same everywhere (selection criteria,
//! oracle scoring, error reports) so that numbers stay comparable.

use crate::error::{Error, Result};
use crate::estimators::{Curve, Grid};

/// Interquantile evaluation window: `m` equispaced points between the
/// `p_lo` and `p_hi` quantiles of the design variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantileSpec {
    pub p_lo: f64,
    pub p_hi: f64,
    pub m: usize,
}

impl Default for QuantileSpec {
    fn default() -> Self {
        Self { p_lo: 0.02, p_hi: 0.98, m: 100 }
    }
}

impl QuantileSpec {
    pub fn validate(&self) -> Result<()> {
        if self.p_lo >= 0.0 && self.p_lo < self.p_hi && self.p_hi <= 1.0 && self.m >= 2 {
            Ok(())
        } else {
            Err(Error::InvalidQuantileSpec)
        }
    }
}

/// Order-statistic quantile with linear interpolation at rank `p * (n - 1)`.
pub fn empirical_quantile(values: &[f64], p: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyQuantileInput);
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidProbability { value: p, required: "[0, 1]" });
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("non-finite value in quantile input"));
    let rank = p * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    let frac = rank - lo as f64;
    Ok(sorted[lo] + frac * (sorted[hi] - sorted[lo]))
}

/// Equispaced grid between two empirical quantiles of `values`.
pub fn interquantile_grid_from_values(values: &[f64], spec: &QuantileSpec) -> Result<Grid> {
    spec.validate()?;
    let lo = empirical_quantile(values, spec.p_lo)?;
    let hi = empirical_quantile(values, spec.p_hi)?;
    if lo == hi {
        return Err(Error::DegenerateInterval { value: lo });
    }
    Grid::equispaced(lo, hi, spec.m)
}

/// Equispaced grid between two exact quantiles of a distribution given its
/// quantile function.
pub fn interquantile_grid_from_quantile_fn(
    quantile: impl Fn(f64) -> Result<f64>,
    spec: &QuantileSpec,
) -> Result<Grid> {
    spec.validate()?;
    let lo = quantile(spec.p_lo)?;
    let hi = quantile(spec.p_hi)?;
    if lo == hi {
        return Err(Error::DegenerateInterval { value: lo });
    }
    Grid::equispaced(lo, hi, spec.m)
}

/// Squared L2 distance as a rectangle Riemann sum:
/// `step * sum_k (a_k - b_k)^2` over all grid points.
pub fn riemann_l2_dist_sq(a: &Curve, b: &Curve) -> Result<f64> {
    if a.grid() != b.grid() {
        return Err(Error::GridMismatch);
    }
    let sum: f64 = a
        .values()
        .iter()
        .zip(b.values())
        .map(|(&x, &y)| {
            let d = x - y;
            d * d
        })
        .sum();
    Ok(a.grid().step() * sum)
}

/// Standard normal cumulative distribution function.
pub fn standard_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal quantile function (inverse CDF) for `p` in (0, 1).
///
/// Rational initial approximation refined by two Halley steps against the
/// erfc-based CDF; accurate to machine precision over the open interval.
pub fn standard_normal_quantile(p: f64) -> Result<f64> {
    if p.is_nan() || p <= 0.0 || p >= 1.0 {
        return Err(Error::InvalidProbability { value: p, required: "(0, 1)" });
    }
    let mut x = acklam_initial(p);
    for _ in 0..2 {
        let err = standard_normal_cdf(x) - p;
        let pdf = (-0.5 * x * x).exp() / (std::f64::consts::TAU).sqrt();
        if pdf == 0.0 {
            break;
        }
        let u = err / pdf;
        x -= u / (1.0 + 0.5 * x * u);
    }
    Ok(x)
}

fn acklam_initial(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.38357751867269e+02,
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
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    }
}

/// Regularized lower incomplete gamma at integer shape `k` and unit scale:
/// `P(k, t) = 1 - exp(-t) * sum_{j<k} t^j / j!`.
pub fn erlang_cdf(k: u32, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let mut term = 1.0;
    let mut sum = 1.0;
    for j in 1..k {
        term *= t / j as f64;
        sum += term;
    }
    1.0 - (-t).exp() * sum
}

/// Inverts a monotone CDF by bisection on `[lo, hi]`.
pub fn invert_cdf(cdf: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, p: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi.abs().max(1.0) {
            break;
        }
    }
    0.5 * (lo + hi)
}
