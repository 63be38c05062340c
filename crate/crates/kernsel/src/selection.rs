//! Data-driven bandwidth selection.
//!
//! Four selector families are provided:
//!
//! * **PCO** (penalized comparison to overfitting): compare every estimator
//!   to the smallest-bandwidth one and add an exact inner-product penalty.
//! * **Goldenshluger-Lepski**: minimize an estimated squared-bias proxy
//!   (sup of clipped pairwise comparisons of doubly smoothed estimators)
//!   plus a variance proxy.
//! * **Cross-validation**: an integral criterion for the numerator and a
//!   leave-one-out criterion for the single-bandwidth weighted regression,
//!   both with the plain Gaussian kernel.
//! * **Oracle**: the per-sample error minimizer against a known target,
//!   used as a benchmark.
//!
//! Every selector returns the full criterion trace; ties resolve to the
//! smallest bandwidth and grid iteration order is fixed, so results do not
//! depend on scheduling.

use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimators::{
    convolved_density_curve, convolved_numerator_curve, density_curve, loo_nw_predict,
    numerator_curve, Curve, Grid, Sample,
};
use crate::kernel::{gaussian_density, Bandwidth, GaussianMixtureKernel};
use crate::numerics::riemann_l2_dist_sq;

/// Strictly increasing collection of candidate bandwidths.
#[derive(Debug, Clone, PartialEq)]
pub struct BandwidthGrid {
    values: Vec<f64>,
}

impl BandwidthGrid {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidBandwidthGrid);
        }
        if !values[0].is_finite() || values[0] <= 0.0 {
            return Err(Error::InvalidBandwidthGrid);
        }
        if values.windows(2).any(|w| !w[1].is_finite() || w[1] <= w[0]) {
            return Err(Error::InvalidBandwidthGrid);
        }
        Ok(Self { values })
    }

    /// `count` equispaced values from `min` to `max` inclusive.
    pub fn equispaced(min: f64, max: f64, count: usize) -> Result<Self> {
        if count == 0 || min.is_nan() || min <= 0.0 || max.is_nan() || max <= min {
            return Err(Error::InvalidBandwidthGrid);
        }
        if count == 1 {
            return Self::new(vec![min]);
        }
        let step = (max - min) / (count - 1) as f64;
        Self::new((0..count).map(|i| min + i as f64 * step).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn h_min(&self) -> Bandwidth {
        Bandwidth::new(self.values[0]).expect("validated at construction")
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn bandwidths(&self) -> impl Iterator<Item = Bandwidth> + '_ {
        self.values.iter().map(|&v| Bandwidth::new(v).expect("validated at construction"))
    }

    pub fn contains(&self, h: f64) -> bool {
        self.values.contains(&h)
    }
}

impl Default for BandwidthGrid {
    /// 75 equispaced values from 0.01 to 1.
    fn default() -> Self {
        Self::equispaced(0.01, 1.0, 75).expect("valid constants")
    }
}

/// Method-specific criterion components, one value per grid bandwidth.
#[derive(Debug, Clone, PartialEq)]
pub enum Diagnostics {
    None,
    /// Comparison distance and effective penalty; criterion = distance + penalty.
    Pco { distance: Vec<f64>, penalty: Vec<f64> },
    /// Bias proxy and variance proxy; criterion = bias_proxy + variance_proxy.
    Gl { bias_proxy: Vec<f64>, variance_proxy: Vec<f64> },
}

/// Outcome of a bandwidth selection: the winner and the full trace.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionResult {
    pub selected: Bandwidth,
    /// `(bandwidth, criterion value)` in grid order.
    pub criterion: Vec<(f64, f64)>,
    pub diagnostics: Diagnostics,
}

impl SelectionResult {
    /// Writes the trace as CSV with one column per criterion component.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        match &self.diagnostics {
            Diagnostics::None => {
                writeln!(out, "bandwidth,criterion")?;
                for &(h, c) in &self.criterion {
                    writeln!(out, "{},{}", h, c)?;
                }
            }
            Diagnostics::Pco { distance, penalty } => {
                writeln!(out, "bandwidth,criterion,distance,penalty")?;
                for (i, &(h, c)) in self.criterion.iter().enumerate() {
                    writeln!(out, "{},{},{},{}", h, c, distance[i], penalty[i])?;
                }
            }
            Diagnostics::Gl { bias_proxy, variance_proxy } => {
                writeln!(out, "bandwidth,criterion,bias_proxy,variance_proxy")?;
                for (i, &(h, c)) in self.criterion.iter().enumerate() {
                    writeln!(out, "{},{},{},{}", h, c, bias_proxy[i], variance_proxy[i])?;
                }
            }
        }
        Ok(())
    }
}

/// Index of the strictly smallest criterion value; ties go to the first
/// (smallest bandwidth, since traces are in grid order).
fn argmin_index(criterion: &[(f64, f64)]) -> usize {
    let mut best = 0;
    for (i, &(_, c)) in criterion.iter().enumerate().skip(1) {
        if c < criterion[best].1 {
            best = i;
        }
    }
    best
}

fn result_from_trace(criterion: Vec<(f64, f64)>, diagnostics: Diagnostics) -> SelectionResult {
    let best = argmin_index(&criterion);
    let selected = Bandwidth::new(criterion[best].0).expect("grid bandwidths are positive");
    SelectionResult { selected, criterion, diagnostics }
}

/// All numerator curves of the family, in grid order.
pub fn numerator_curve_family(
    sample: &Sample,
    kernel: &GaussianMixtureKernel,
    bandwidths: &BandwidthGrid,
    grid: &Grid,
) -> Vec<(Bandwidth, Curve)> {
    bandwidths
        .bandwidths()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|h| (h, numerator_curve(sample, kernel, h, grid)))
        .collect()
}

/// All density curves of the family, in grid order.
pub fn density_curve_family(
    sample: &Sample,
    kernel: &GaussianMixtureKernel,
    bandwidths: &BandwidthGrid,
    grid: &Grid,
) -> Vec<(Bandwidth, Curve)> {
    bandwidths
        .bandwidths()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|h| (h, density_curve(sample, kernel, h, grid)))
        .collect()
}

fn pco_core(
    family: &[(Bandwidth, Curve)],
    penalty: impl Fn(Bandwidth) -> f64,
) -> Result<SelectionResult> {
    let reference = &family.first().ok_or(Error::EmptyCurveFamily)?.1;
    let mut criterion = Vec::with_capacity(family.len());
    let mut distances = Vec::with_capacity(family.len());
    let mut penalties = Vec::with_capacity(family.len());
    for (h, curve) in family {
        let dist = riemann_l2_dist_sq(curve, reference)?;
        let pen = penalty(*h);
        criterion.push((h.value(), dist + pen));
        distances.push(dist);
        penalties.push(pen);
    }
    Ok(result_from_trace(criterion, Diagnostics::Pco { distance: distances, penalty: penalties }))
}

/// PCO selection for the numerator on a prebuilt curve family.
///
/// The family must come from [`numerator_curve_family`] with the same
/// sample and kernel. Criterion: squared distance to the smallest-bandwidth
/// curve plus `multiplier * (2 <K_hmin, K_h> / n^2) * sum y_i^2`.
pub fn pco_select_numerator_on(
    family: &[(Bandwidth, Curve)],
    sample: &Sample,
    kernel: &GaussianMixtureKernel,
    multiplier: f64,
) -> Result<SelectionResult> {
    let h_min = family.first().ok_or(Error::EmptyCurveFamily)?.0;
    let n = sample.len() as f64;
    let sum_y_sq: f64 = sample.y().iter().map(|v| v * v).sum();
    pco_core(family, |h| {
        multiplier * 2.0 * kernel.pair_inner_product(h_min, h) * sum_y_sq / (n * n)
    })
}

/// PCO selection for the numerator with the default penalty (multiplier 1).
pub fn pco_select_numerator(
    sample: &Sample,
    kernel: &GaussianMixtureKernel,
    bandwidths: &BandwidthGrid,
    grid: &Grid,
) -> Result<SelectionResult> {
    let family = numerator_curve_family(sample, kernel, bandwidths, grid);
    pco_select_numerator_on(&family, sample, kernel, 1.0)
}

/// PCO selection for the density on a prebuilt curve family.
///
/// Criterion: squared distance to the smallest-bandwidth curve plus
/// `multiplier * (2 <K_hmin, K_h> / n)`.
pub fn pco_select_density_on(
    family: &[(Bandwidth, Curve)],
    sample: &Sample,
    kernel: &GaussianMixtureKernel,
    multiplier: f64,
) -> Result<SelectionResult> {
    let h_min = family.first().ok_or(Error::EmptyCurveFamily)?.0;
    let n = sample.len() as f64;
    pco_core(family, |h| multiplier * 2.0 * kernel.pair_inner_product(h_min, h) / n)
}

/// PCO selection for the density with the default doubled penalty
/// (multiplier 2).
pub fn pco_select_density(
    sample: &Sample,
    kernel: &GaussianMixtureKernel,
    bandwidths: &BandwidthGrid,
    grid: &Grid,
) -> Result<SelectionResult> {
    let family = density_curve_family(sample, kernel, bandwidths, grid);
    pco_select_density_on(&family, sample, kernel, 2.0)
}

fn gl_core(
    bandwidths: &BandwidthGrid,
    plain: &[(Bandwidth, Curve)],
    doubly_smoothed: impl Fn(Bandwidth, Bandwidth) -> Curve + Sync,
    variance_proxy: impl Fn(f64) -> f64 + Sync,
) -> Result<SelectionResult> {
    let v_trace: Vec<f64> = bandwidths.values().iter().map(|&h| variance_proxy(h)).collect();
    let bias_trace: Vec<f64> = bandwidths
        .bandwidths()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|h| {
            let mut worst = 0.0f64;
            for (j, (eta, plain_eta)) in plain.iter().enumerate() {
                let smoothed = doubly_smoothed(h, *eta);
                let dist = riemann_l2_dist_sq(&smoothed, plain_eta)
                    .expect("family curves share one grid");
                worst = worst.max((dist - v_trace[j]).max(0.0));
            }
            worst
        })
        .collect();
    let criterion: Vec<(f64, f64)> = bandwidths
        .values()
        .iter()
        .enumerate()
        .map(|(i, &h)| (h, bias_trace[i] + v_trace[i]))
        .collect();
    Ok(result_from_trace(
        criterion,
        Diagnostics::Gl { bias_proxy: bias_trace, variance_proxy: v_trace },
    ))
}

/// Goldenshluger-Lepski selection for the numerator.
///
/// Bias proxy: `sup_eta (||smoothed(h, eta) - plain(eta)||^2 - V(eta))_+`
/// with `V(h) = upsilon * ||K||_2^2 * mean(y^2) * ||K||_1^2 / (n h)`; the
/// second-moment factor uses the empirical mean of the squared responses.
pub fn gl_select_numerator(
    sample: &Sample,
    kernel: &GaussianMixtureKernel,
    bandwidths: &BandwidthGrid,
    grid: &Grid,
    upsilon: f64,
) -> Result<SelectionResult> {
    if upsilon.is_nan() || upsilon <= 0.0 {
        return Err(Error::InvalidConstant { name: "upsilon", value: upsilon });
    }
    let l1 = kernel.l1_norm()?;
    let scale = kernel.l2_norm_sq() * sample.mean_y_sq() * l1 * l1;
    let n = sample.len() as f64;
    let plain = numerator_curve_family(sample, kernel, bandwidths, grid);
    gl_core(
        bandwidths,
        &plain,
        |h, eta| convolved_numerator_curve(sample, kernel, h, eta, grid),
        |h| upsilon * scale / (n * h),
    )
}

/// Goldenshluger-Lepski selection for the density, with
/// `V(h) = chi * ||K||_2^2 * ||K||_1^2 / (n h)`.
pub fn gl_select_density(
    sample: &Sample,
    kernel: &GaussianMixtureKernel,
    bandwidths: &BandwidthGrid,
    grid: &Grid,
    chi: f64,
) -> Result<SelectionResult> {
    if chi.is_nan() || chi <= 0.0 {
        return Err(Error::InvalidConstant { name: "chi", value: chi });
    }
    let l1 = kernel.l1_norm()?;
    let scale = kernel.l2_norm_sq() * l1 * l1;
    let n = sample.len() as f64;
    let plain = density_curve_family(sample, kernel, bandwidths, grid);
    gl_core(
        bandwidths,
        &plain,
        |h, eta| convolved_density_curve(sample, kernel, h, eta, grid),
        |h| chi * scale / (n * h),
    )
}

/// Integral cross-validation for the numerator, Gaussian kernel.
///
/// `CV(h) = int est_h^2 - (2 / (n (n-1) h)) sum_{i != j} y_i y_j N((x_i - x_j)/h)`.
/// The square integral is evaluated in closed form through the Gaussian
/// cross terms `phi(x_i - x_j; 2 h^2)`, not as a grid sum, so the criterion
/// carries no truncation bias.
pub fn cv_select_numerator(sample: &Sample, bandwidths: &BandwidthGrid) -> Result<SelectionResult> {
    let n = sample.len();
    if n < 2 {
        return Err(Error::SampleTooSmall { needed: 2, got: n });
    }
    let nf = n as f64;
    // pairwise differences and response products, shared across bandwidths
    let mut pairs = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            pairs.push((sample.x()[i] - sample.x()[j], sample.y()[i] * sample.y()[j]));
        }
    }
    let diag_y_sq: f64 = sample.y().iter().map(|v| v * v).sum();
    let criterion: Vec<(f64, f64)> = bandwidths
        .values()
        .par_iter()
        .map(|&h| {
            let mut cross_2h = 0.0; // sum_{i<j} y_i y_j phi(d; 2 h^2)
            let mut cross_h = 0.0; // sum_{i<j} y_i y_j phi(d; h^2)
            for &(d, yy) in &pairs {
                cross_2h += yy * gaussian_density(d, 2.0 * h * h);
                cross_h += yy * gaussian_density(d, h * h);
            }
            let square_integral =
                (diag_y_sq * gaussian_density(0.0, 2.0 * h * h) + 2.0 * cross_2h) / (nf * nf);
            let fit_term = 4.0 * cross_h / (nf * (nf - 1.0));
            (h, square_integral - fit_term)
        })
        .collect();
    Ok(result_from_trace(criterion, Diagnostics::None))
}

/// Leave-one-out cross-validation for the single-bandwidth weighted
/// regression, Gaussian kernel: `CV(h) = sum_i (y_i - pred_{-i}(x_i))^2`.
///
/// When every leave-one-out weight underflows to zero at some point the
/// prediction falls back to 0, so the criterion stays finite and such
/// bandwidths are penalized by the full squared response.
pub fn loo_cv_select_nw(sample: &Sample, bandwidths: &BandwidthGrid) -> Result<SelectionResult> {
    let n = sample.len();
    if n < 2 {
        return Err(Error::SampleTooSmall { needed: 2, got: n });
    }
    let gauss = GaussianMixtureKernel::gaussian();
    let criterion: Vec<(f64, f64)> = bandwidths
        .bandwidths()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|h| {
            let total: f64 = (0..n)
                .map(|i| {
                    let pred = loo_nw_predict(sample, &gauss, h, i).unwrap_or(0.0);
                    let r = sample.y()[i] - pred;
                    r * r
                })
                .sum();
            (h.value(), total)
        })
        .collect();
    Ok(result_from_trace(criterion, Diagnostics::None))
}

/// Per-sample best bandwidth: minimizes the Riemann error against a known
/// target over the given curve family. The criterion trace holds the error
/// of every candidate.
pub fn oracle_select(family: &[(Bandwidth, Curve)], truth: &Curve) -> Result<SelectionResult> {
    if family.is_empty() {
        return Err(Error::EmptyCurveFamily);
    }
    let mut criterion = Vec::with_capacity(family.len());
    for (h, curve) in family {
        criterion.push((h.value(), riemann_l2_dist_sq(curve, truth)?));
    }
    Ok(result_from_trace(criterion, Diagnostics::None))
}
