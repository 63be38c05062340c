//! Pointwise kernel estimators evaluated on a fixed grid.
//!
//! The regression estimate is assembled from two pieces sharing one sample:
//! a smoothed response-weighted curve (the "numerator", estimating `b*f`)
//! and a kernel density estimate (the "denominator", estimating `f`). Their
//! pointwise ratio generalizes the Nadaraya-Watson estimator by letting the
//! two pieces use different bandwidths; equal bandwidths recover the
//! classical weighted form exactly.
//!
//! All estimators are plain `O(n * grid)` sums with no binning or FFT
//! shortcuts, so criterion values downstream match the defining formulas to
//! the last bit.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::kernel::{Bandwidth, GaussianMixtureKernel};

/// Paired regression observations `(x_i, y_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    x: Vec<f64>,
    y: Vec<f64>,
}

impl Sample {
    /// Builds a sample, validating equal lengths, nonemptiness and finiteness.
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::SampleLengthMismatch { x_len: x.len(), y_len: y.len() });
        }
        if x.is_empty() {
            return Err(Error::EmptySample);
        }
        for (index, (&a, &b)) in x.iter().zip(&y).enumerate() {
            if !a.is_finite() || !b.is_finite() {
                return Err(Error::NonFiniteSample { index });
            }
        }
        Ok(Self { x, y })
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        false // a constructed sample always has n >= 1
    }

    /// Same covariates with replaced responses.
    pub fn with_responses(&self, y: Vec<f64>) -> Result<Self> {
        Self::new(self.x.clone(), y)
    }

    /// Mean of the squared responses, `(1/n) sum y_i^2`.
    pub fn mean_y_sq(&self) -> f64 {
        self.y.iter().map(|v| v * v).sum::<f64>() / self.len() as f64
    }
}

/// Strictly increasing, equispaced evaluation points.
#[derive(Debug, Clone)]
pub struct Grid {
    points: Vec<f64>,
    step: f64,
}

impl PartialEq for Grid {
    // step is derived from the points; identity is the point set
    fn eq(&self, other: &Self) -> bool {
        self.points == other.points
    }
}

const SPACING_REL_TOL: f64 = 1e-12;

impl Grid {
    /// `m` equispaced points from `lo` to `hi` inclusive.
    pub fn equispaced(lo: f64, hi: f64, m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::GridTooSmall);
        }
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return Err(Error::GridNotEquispaced);
        }
        let step = (hi - lo) / (m - 1) as f64;
        let points = (0..m).map(|i| lo + i as f64 * step).collect();
        Ok(Self { points, step })
    }

    /// Validates an existing point set: strictly increasing, spacing constant
    /// to relative 1e-12.
    pub fn from_points(points: Vec<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::GridTooSmall);
        }
        let step = points[1] - points[0];
        if !step.is_finite() || step <= 0.0 {
            return Err(Error::GridNotEquispaced);
        }
        for w in points.windows(2) {
            let d = w[1] - w[0];
            if (d - step).abs() > SPACING_REL_TOL * step.abs().max(1.0) {
                return Err(Error::GridNotEquispaced);
            }
        }
        Ok(Self { points, step })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Function values on a grid, with a per-point flag for entries that are
/// non-finite or produced by a degenerate denominator.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    grid: Grid,
    values: Vec<f64>,
    flags: Vec<bool>,
}

impl Curve {
    /// Wraps values on a grid; non-finite entries are flagged automatically.
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::CurveLengthMismatch { values: values.len(), points: grid.len() });
        }
        let flags = values.iter().map(|v| !v.is_finite()).collect();
        Ok(Self { grid, values, flags })
    }

    fn with_flags(grid: Grid, values: Vec<f64>, mut flags: Vec<bool>) -> Self {
        for (flag, v) in flags.iter_mut().zip(&values) {
            *flag |= !v.is_finite();
        }
        Self { grid, values, flags }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn flags(&self) -> &[bool] {
        &self.flags
    }

    pub fn flagged_count(&self) -> usize {
        self.flags.iter().filter(|&&f| f).count()
    }

    /// Builds a curve by evaluating `f` at every grid point.
    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Self {
        let values: Vec<f64> = grid.points().iter().map(|&x| f(x)).collect();
        let flags = values.iter().map(|v| !v.is_finite()).collect();
        Self { grid, values, flags }
    }

    /// Writes `x,value,flagged` rows with a header line.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "x,value,flagged")?;
        for ((&x, &v), &f) in self.grid.points().iter().zip(&self.values).zip(&self.flags) {
            writeln!(out, "{},{},{}", x, v, u8::from(f))?;
        }
        Ok(())
    }

    /// Reads a curve written by [`write_csv`](Self::write_csv); the header
    /// line is optional and the flag column defaults to zero.
    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut points = Vec::new();
        let mut values = Vec::new();
        let mut flags = Vec::new();
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            let mut cols = trimmed.split(',').map(str::trim);
            let (a, b) = (cols.next().unwrap_or(""), cols.next().unwrap_or(""));
            let flag = cols.next().unwrap_or("0");
            match (a.parse::<f64>(), b.parse::<f64>()) {
                (Ok(x), Ok(v)) => {
                    points.push(x);
                    values.push(v);
                    flags.push(flag == "1");
                }
                _ if i == 0 => continue, // header row
                _ => {
                    return Err(Error::CsvParse {
                        line: i + 1,
                        message: format!("expected numeric columns, got '{trimmed}'"),
                    })
                }
            }
        }
        let grid = Grid::from_points(points)?;
        Ok(Self::with_flags(grid, values, flags))
    }
}

fn ensure_same_grid(a: &Curve, b: &Curve) -> Result<()> {
    if a.grid == b.grid {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}

/// Kernel density estimate: value at `x` is `(1/n) sum_i K_h(x_i - x)`.
pub fn density_curve(
    sample: &Sample,
    kernel: &GaussianMixtureKernel,
    h: Bandwidth,
    grid: &Grid,
) -> Curve {
    let inv_n = 1.0 / sample.len() as f64;
    Curve::from_fn(grid.clone(), |x| {
        sample.x().iter().map(|&xi| kernel.scaled_eval(h, xi - x)).sum::<f64>() * inv_n
    })
}

/// Response-weighted estimate of the product `b*f`:
/// value at `x` is `(1/n) sum_i y_i K_h(x_i - x)`.
pub fn numerator_curve(
    sample: &Sample,
    kernel: &GaussianMixtureKernel,
    h: Bandwidth,
    grid: &Grid,
) -> Curve {
    let inv_n = 1.0 / sample.len() as f64;
    Curve::from_fn(grid.clone(), |x| {
        sample
            .x()
            .iter()
            .zip(sample.y())
            .map(|(&xi, &yi)| yi * kernel.scaled_eval(h, xi - x))
            .sum::<f64>()
            * inv_n
    })
}

/// Doubly smoothed numerator: value at `x` is
/// `(1/n) sum_i y_i (K_eta * K_h)(x_i - x)`.
pub fn convolved_numerator_curve(
    sample: &Sample,
    kernel: &GaussianMixtureKernel,
    h: Bandwidth,
    eta: Bandwidth,
    grid: &Grid,
) -> Curve {
    let conv = kernel.convolve(h, eta);
    let inv_n = 1.0 / sample.len() as f64;
    Curve::from_fn(grid.clone(), |x| {
        sample
            .x()
            .iter()
            .zip(sample.y())
            .map(|(&xi, &yi)| yi * conv.eval(xi - x))
            .sum::<f64>()
            * inv_n
    })
}

/// Doubly smoothed density: value at `x` is `(1/n) sum_i (K_eta * K_h)(x_i - x)`.
pub fn convolved_density_curve(
    sample: &Sample,
    kernel: &GaussianMixtureKernel,
    h: Bandwidth,
    eta: Bandwidth,
    grid: &Grid,
) -> Curve {
    let conv = kernel.convolve(h, eta);
    let inv_n = 1.0 / sample.len() as f64;
    Curve::from_fn(grid.clone(), |x| {
        sample.x().iter().map(|&xi| conv.eval(xi - x)).sum::<f64>() * inv_n
    })
}

/// Pointwise ratio of two curves on the same grid.
///
/// With `clip = Some(c)`, points where `|den| < c` are replaced by
/// `num / (sign(den) * c)` and flagged. Without a clip the raw ratio is kept
/// and a point is flagged when `|den| < 1e-12` or the ratio is non-finite.
pub fn quotient_curve(num: &Curve, den: &Curve, clip: Option<f64>) -> Result<Curve> {
    ensure_same_grid(num, den)?;
    let tiny = clip.unwrap_or(1e-12);
    let mut values = Vec::with_capacity(num.values.len());
    let mut flags = Vec::with_capacity(num.values.len());
    for (&nv, &dv) in num.values.iter().zip(&den.values) {
        if dv.abs() < tiny {
            match clip {
                Some(c) => {
                    let sign = if dv < 0.0 { -1.0 } else { 1.0 };
                    values.push(nv / (sign * c));
                }
                None => values.push(nv / dv),
            }
            flags.push(true);
        } else {
            values.push(nv / dv);
            flags.push(false);
        }
    }
    Ok(Curve::with_flags(num.grid.clone(), values, flags))
}

/// Classical weighted kernel regression with a single bandwidth:
/// value at `x` is `sum_i w_i(x) y_i` with kernel weights normalized over
/// the sample. Points where every weight vanishes are flagged.
pub fn nw_curve(
    sample: &Sample,
    kernel: &GaussianMixtureKernel,
    h: Bandwidth,
    grid: &Grid,
) -> Curve {
    let mut values = Vec::with_capacity(grid.len());
    let mut flags = Vec::with_capacity(grid.len());
    for &x in grid.points() {
        let mut num = 0.0;
        let mut den = 0.0;
        for (&xi, &yi) in sample.x().iter().zip(sample.y()) {
            let w = kernel.scaled_eval(h, xi - x);
            num += w * yi;
            den += w;
        }
        values.push(num / den);
        flags.push(den == 0.0);
    }
    Curve::with_flags(grid.clone(), values, flags)
}

/// Leave-one-out prediction at `x_i`: the weighted regression estimate at
/// `x_i` computed from the sample with row `i` removed. Returns `None` when
/// every remaining weight vanishes (degenerate denominator).
pub fn loo_nw_predict(
    sample: &Sample,
    kernel: &GaussianMixtureKernel,
    h: Bandwidth,
    i: usize,
) -> Option<f64> {
    assert!(i < sample.len(), "row index {i} out of bounds for n = {}", sample.len());
    let xi = sample.x()[i];
    let mut num = 0.0;
    let mut den = 0.0;
    for j in 0..sample.len() {
        if j == i {
            continue;
        }
        let w = kernel.scaled_eval(h, sample.x()[j] - xi);
        num += w * sample.y()[j];
        den += w;
    }
    if den == 0.0 {
        None
    } else {
        Some(num / den)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn bw(v: f64) -> Bandwidth {
        Bandwidth::new(v).unwrap()
    }

    fn random_sample(n: usize, seed: u64) -> Sample {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        Sample::new(x, y).unwrap()
    }

    #[test]
    fn sample_validation() {
        assert!(matches!(Sample::new(vec![], vec![]), Err(Error::EmptySample)));
        assert!(matches!(
            Sample::new(vec![1.0], vec![1.0, 2.0]),
            Err(Error::SampleLengthMismatch { .. })
        ));
        assert!(matches!(
            Sample::new(vec![1.0, f64::NAN], vec![0.0, 0.0]),
            Err(Error::NonFiniteSample { index: 1 })
        ));
    }

    #[test]
    fn grid_validation() {
        assert!(Grid::equispaced(0.0, 1.0, 1).is_err());
        assert!(Grid::equispaced(1.0, 0.0, 10).is_err());
        let g = Grid::equispaced(0.0, 1.0, 11).unwrap();
        assert_eq!(g.len(), 11);
        assert_abs_diff_eq!(g.step(), 0.1, epsilon = 1e-15);
        assert!(Grid::from_points(vec![0.0, 0.1, 0.3]).is_err());
        assert!(Grid::from_points(vec![0.0, 0.0]).is_err());
        assert!(Grid::from_points(g.points().to_vec()).is_ok());
    }

    #[test]
    fn density_single_observation_at_grid_point() {
        let k = GaussianMixtureKernel::order7();
        let grid = Grid::equispaced(-1.0, 1.0, 5).unwrap();
        let x0 = grid.points()[2]; // 0.0
        let s = Sample::new(vec![x0], vec![7.0]).unwrap();
        let c = density_curve(&s, &k, bw(1.0), &grid);
        assert_abs_diff_eq!(c.values()[2], k.eval(0.0), epsilon = 1e-15);
        // n = 1 and general h: value at the observation is K(0)/h
        let c2 = density_curve(&s, &k, bw(0.25), &grid);
        assert_abs_diff_eq!(c2.values()[2], k.eval(0.0) / 0.25, epsilon = 1e-12);
    }

    #[test]
    fn density_mass_is_close_to_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let x: Vec<f64> = (0..200)
            .map(|_| {
                // crude but adequate normal draws for a mass check
                let s: f64 = (0..12).map(|_| rng.random::<f64>()).sum::<f64>() - 6.0;
                s
            })
            .collect();
        let y = vec![0.0; 200];
        let s = Sample::new(x, y).unwrap();
        let grid = Grid::equispaced(-8.0, 8.0, 801).unwrap();
        let c = density_curve(&s, &GaussianMixtureKernel::order7(), bw(0.3), &grid);
        let mass: f64 = c.values().iter().sum::<f64>() * grid.step();
        assert_abs_diff_eq!(mass, 1.0, epsilon = 0.05);
    }

    #[test]
    fn density_ignores_responses() {
        let s = random_sample(20, 3);
        let doubled = s.with_responses(s.y().iter().map(|v| 2.0 * v).collect()).unwrap();
        let k = GaussianMixtureKernel::order7();
        let grid = Grid::equispaced(-2.0, 2.0, 50).unwrap();
        assert_eq!(
            density_curve(&s, &k, bw(0.4), &grid),
            density_curve(&doubled, &k, bw(0.4), &grid)
        );
    }

    #[test]
    fn numerator_reduces_to_density_for_unit_responses() {
        let s = random_sample(15, 5);
        let ones = s.with_responses(vec![1.0; 15]).unwrap();
        let k = GaussianMixtureKernel::order7();
        let grid = Grid::equispaced(-2.0, 2.0, 40).unwrap();
        let d = density_curve(&ones, &k, bw(0.3), &grid);
        let n = numerator_curve(&ones, &k, bw(0.3), &grid);
        for (a, b) in d.values().iter().zip(n.values()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-14);
        }
    }

    #[test]
    fn numerator_zero_responses_gives_zero_curve() {
        let s = random_sample(10, 11).with_responses(vec![0.0; 10]).unwrap();
        let k = GaussianMixtureKernel::order7();
        let grid = Grid::equispaced(-2.0, 2.0, 20).unwrap();
        let c = numerator_curve(&s, &k, bw(0.2), &grid);
        assert!(c.values().iter().all(|&v| v == 0.0));
        let cc = convolved_numerator_curve(&s, &k, bw(0.2), bw(0.4), &grid);
        assert!(cc.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn numerator_is_linear_in_responses() {
        let s = random_sample(10, 13);
        let y2: Vec<f64> = s.y().iter().map(|v| v * 3.0 - 0.5).collect();
        let ysum: Vec<f64> = s.y().iter().zip(&y2).map(|(a, b)| a + b).collect();
        let s2 = s.with_responses(y2).unwrap();
        let ssum = s.with_responses(ysum).unwrap();
        let k = GaussianMixtureKernel::order7();
        let grid = Grid::equispaced(-2.0, 2.0, 30).unwrap();
        let (h,) = (bw(0.2),);
        let a = numerator_curve(&s, &k, h, &grid);
        let b = numerator_curve(&s2, &k, h, &grid);
        let c = numerator_curve(&ssum, &k, h, &grid);
        for i in 0..grid.len() {
            assert_abs_diff_eq!(a.values()[i] + b.values()[i], c.values()[i], epsilon = 1e-12);
        }
    }

    #[test]
    fn curves_are_invariant_under_row_permutation() {
        let s = random_sample(25, 17);
        let mut idx: Vec<usize> = (0..25).collect();
        idx.reverse();
        idx.swap(3, 10);
        let xp: Vec<f64> = idx.iter().map(|&i| s.x()[i]).collect();
        let yp: Vec<f64> = idx.iter().map(|&i| s.y()[i]).collect();
        let sp = Sample::new(xp, yp).unwrap();
        let k = GaussianMixtureKernel::order7();
        let grid = Grid::equispaced(-2.0, 2.0, 30).unwrap();
        let a = numerator_curve(&s, &k, bw(0.3), &grid);
        let b = numerator_curve(&sp, &k, bw(0.3), &grid);
        for i in 0..grid.len() {
            assert_abs_diff_eq!(a.values()[i], b.values()[i], epsilon = 1e-13);
        }
    }

    #[test]
    fn small_outer_bandwidth_approaches_plain_numerator() {
        let s = random_sample(50, 23);
        let k = GaussianMixtureKernel::order7();
        let grid = Grid::equispaced(-2.0, 2.0, 50).unwrap();
        let plain = numerator_curve(&s, &k, bw(0.4), &grid);
        let nearly = convolved_numerator_curve(&s, &k, bw(0.4), bw(1e-4), &grid);
        for i in 0..grid.len() {
            assert_abs_diff_eq!(plain.values()[i], nearly.values()[i], epsilon = 1e-3);
        }
    }

    #[test]
    fn convolved_curve_is_symmetric_in_bandwidth_roles() {
        let s = random_sample(20, 29);
        let k = GaussianMixtureKernel::order7();
        let grid = Grid::equispaced(-2.0, 2.0, 25).unwrap();
        let a = convolved_numerator_curve(&s, &k, bw(0.3), bw(0.7), &grid);
        let b = convolved_numerator_curve(&s, &k, bw(0.7), bw(0.3), &grid);
        for i in 0..grid.len() {
            assert_abs_diff_eq!(a.values()[i], b.values()[i], epsilon = 1e-12);
        }
    }

    #[test]
    fn quotient_of_equal_curves_is_one() {
        let grid = Grid::equispaced(0.0, 1.0, 10).unwrap();
        let c = Curve::from_fn(grid, |x| 1.5 + x);
        let q = quotient_curve(&c, &c, None).unwrap();
        assert!(q.values().iter().all(|&v| v == 1.0));
        assert_eq!(q.flagged_count(), 0);
    }

    #[test]
    fn quotient_flags_zero_denominator() {
        let grid = Grid::equispaced(0.0, 1.0, 3).unwrap();
        let num = Curve::new(grid.clone(), vec![1.0, 2.0, 3.0]).unwrap();
        let den = Curve::new(grid, vec![1.0, 0.0, 2.0]).unwrap();
        let q = quotient_curve(&num, &den, None).unwrap();
        assert_eq!(q.values()[0], 1.0);
        assert!(!q.values()[1].is_finite());
        assert_eq!(q.values()[2], 1.5);
        assert_eq!(q.flags(), &[false, true, false]);
    }

    #[test]
    fn quotient_clip_replaces_small_denominators() {
        let grid = Grid::equispaced(0.0, 1.0, 3).unwrap();
        let num = Curve::new(grid.clone(), vec![1.0, 2.0, 3.0]).unwrap();
        let den = Curve::new(grid, vec![1.0, -1e-6, 2.0]).unwrap();
        let q = quotient_curve(&num, &den, Some(1e-3)).unwrap();
        assert_eq!(q.values()[1], 2.0 / -1e-3);
        assert_eq!(q.flags(), &[false, true, false]);
    }

    #[test]
    fn quotient_rejects_grid_mismatch() {
        let a = Curve::from_fn(Grid::equispaced(0.0, 1.0, 5).unwrap(), |_| 1.0);
        let b = Curve::from_fn(Grid::equispaced(0.0, 2.0, 5).unwrap(), |_| 1.0);
        assert!(matches!(quotient_curve(&a, &b, None), Err(Error::GridMismatch)));
    }

    #[test]
    fn nw_equals_quotient_with_equal_bandwidths() {
        let s = random_sample(30, 31);
        let k = GaussianMixtureKernel::order7();
        let grid = Grid::equispaced(-2.0, 2.0, 40).unwrap();
        let h = bw(0.35);
        let direct = nw_curve(&s, &k, h, &grid);
        let ratio =
            quotient_curve(&numerator_curve(&s, &k, h, &grid), &density_curve(&s, &k, h, &grid), None)
                .unwrap();
        for i in 0..grid.len() {
            assert_abs_diff_eq!(direct.values()[i], ratio.values()[i], epsilon = 1e-12);
        }
    }

    #[test]
    fn nw_constant_responses_give_constant_curve() {
        let s = random_sample(12, 37).with_responses(vec![4.2; 12]).unwrap();
        let k = GaussianMixtureKernel::gaussian();
        let grid = Grid::equispaced(-2.0, 2.0, 20).unwrap();
        let c = nw_curve(&s, &k, bw(0.5), &grid);
        for &v in c.values() {
            assert_abs_diff_eq!(v, 4.2, epsilon = 1e-10);
        }
    }

    #[test]
    fn nw_is_affine_equivariant() {
        let s = random_sample(15, 41);
        let (a, b) = (2.5, -0.7);
        let mapped = s.with_responses(s.y().iter().map(|v| a * v + b).collect()).unwrap();
        let k = GaussianMixtureKernel::gaussian();
        let grid = Grid::equispaced(-2.0, 2.0, 20).unwrap();
        let base = nw_curve(&s, &k, bw(0.4), &grid);
        let shifted = nw_curve(&mapped, &k, bw(0.4), &grid);
        for i in 0..grid.len() {
            assert_abs_diff_eq!(a * base.values()[i] + b, shifted.values()[i], epsilon = 1e-10);
        }
    }

    #[test]
    fn loo_two_points_predicts_the_other() {
        let s = Sample::new(vec![0.0, 1.0], vec![3.0, 5.0]).unwrap();
        let k = GaussianMixtureKernel::gaussian();
        assert_abs_diff_eq!(loo_nw_predict(&s, &k, bw(0.5), 0).unwrap(), 5.0, epsilon = 1e-15);
        assert_abs_diff_eq!(loo_nw_predict(&s, &k, bw(0.5), 1).unwrap(), 3.0, epsilon = 1e-15);
    }

    #[test]
    fn loo_constant_responses() {
        let s = random_sample(8, 43).with_responses(vec![2.0; 8]).unwrap();
        let k = GaussianMixtureKernel::gaussian();
        for i in 0..8 {
            assert_abs_diff_eq!(loo_nw_predict(&s, &k, bw(0.3), i).unwrap(), 2.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn loo_matches_delete_one_recomputation() {
        let s = random_sample(20, 47);
        let k = GaussianMixtureKernel::gaussian();
        let h = bw(0.25);
        for i in 0..s.len() {
            let mut x = s.x().to_vec();
            let mut y = s.y().to_vec();
            x.remove(i);
            y.remove(i);
            let reduced = Sample::new(x, y).unwrap();
            let xi = s.x()[i];
            let mut num = 0.0;
            let mut den = 0.0;
            for (&xj, &yj) in reduced.x().iter().zip(reduced.y()) {
                let w = k.scaled_eval(h, xj - xi);
                num += w * yj;
                den += w;
            }
            let naive = num / den;
            assert_abs_diff_eq!(loo_nw_predict(&s, &k, h, i).unwrap(), naive, epsilon = 1e-12);
        }
    }

    #[test]
    fn curve_csv_round_trip() {
        let grid = Grid::equispaced(-1.0, 1.0, 7).unwrap();
        let mut c = Curve::from_fn(grid, |x| x * x - 0.3);
        c.flags[2] = true;
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        let back = Curve::read_csv(buf.as_slice()).unwrap();
        assert_eq!(c, back);
    }
}
