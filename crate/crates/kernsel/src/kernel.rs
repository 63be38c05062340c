//! Signed Gaussian-mixture kernels and their closed-form algebra.
//!
//! A kernel here is a finite signed mixture `K(x) = sum_j c_j * phi(x; v_j)`
//! of centered Gaussian densities, with unit coefficient sum. Scaling by a
//! bandwidth, L2 inner products, convolution and moments all stay inside the
//! family and are evaluated exactly, which is what makes comparison-based
//! penalties cheap to compute without any grid error. Only the L1 and sup
//! norms fall back to numerics.

use std::f64::consts::TAU;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::quad;

/// Absolute tolerance used for the kernel norm quadratures.
pub const NORM_QUADRATURE_TOL: f64 = 1e-10;

const COEFF_SUM_TOL: f64 = 1e-9;

/// Centered Gaussian density with the given variance, `phi(x; v)`.
pub fn gaussian_density(x: f64, variance: f64) -> f64 {
    (-(x * x) / (2.0 * variance)).exp() / (TAU * variance).sqrt()
}

/// A positive, finite smoothing scale.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Bandwidth(f64);

impl Bandwidth {
    pub fn new(value: f64) -> Result<Self> {
        if value > 0.0 && value.is_finite() {
            Ok(Self(value))
        } else {
            Err(Error::InvalidBandwidth { value })
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Signed mixture of centered Gaussian densities.
///
/// Components are `(coefficient, variance)` pairs: the kernel is
/// `K(x) = sum_j c_j * phi(x; v_j)`. Coefficients must sum to one (unit
/// integral) and variances must be strictly positive.
#[derive(Debug)]
pub struct GaussianMixtureKernel {
    components: Vec<(f64, f64)>,
    l1: OnceLock<f64>,
    sup: OnceLock<f64>,
}

impl Clone for GaussianMixtureKernel {
    fn clone(&self) -> Self {
        Self {
            components: self.components.clone(),
            l1: clone_cache(&self.l1),
            sup: clone_cache(&self.sup),
        }
    }
}

fn clone_cache(lock: &OnceLock<f64>) -> OnceLock<f64> {
    let fresh = OnceLock::new();
    if let Some(&v) = lock.get() {
        let _ = fresh.set(v);
    }
    fresh
}

impl PartialEq for GaussianMixtureKernel {
    fn eq(&self, other: &Self) -> bool {
        self.components == other.components
    }
}

impl GaussianMixtureKernel {
    /// Builds a mixture, validating unit coefficient sum and positive variances.
    pub fn new(components: Vec<(f64, f64)>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::EmptyMixture);
        }
        for (index, &(_, v)) in components.iter().enumerate() {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::NonPositiveVariance { index, variance: v });
            }
        }
        let sum: f64 = components.iter().map(|&(c, _)| c).sum();
        if !sum.is_finite() || (sum - 1.0).abs() > COEFF_SUM_TOL {
            return Err(Error::CoefficientSum { sum });
        }
        Ok(Self::from_parts(components))
    }

    fn from_parts(components: Vec<(f64, f64)>) -> Self {
        Self { components, l1: OnceLock::new(), sup: OnceLock::new() }
    }

    /// Order-7 preset: `4 phi(x;1) - 6 phi(x;2) + 4 phi(x;3) - phi(x;4)`.
    ///
    /// Its moments of order 1 through 7 vanish; the eighth does not.
    pub fn order7() -> Self {
        Self::from_parts(vec![(4.0, 1.0), (-6.0, 2.0), (4.0, 3.0), (-1.0, 4.0)])
    }

    /// Standard Gaussian preset, a single `phi(x; 1)` component.
    pub fn gaussian() -> Self {
        Self::from_parts(vec![(1.0, 1.0)])
    }

    /// Parses a kernel specification: the preset names `"order7"` and
    /// `"gauss"`, or a custom list `"c:v,c:v,..."` of coefficient:variance
    /// pairs.
    pub fn parse_spec(spec: &str) -> Result<Self> {
        match spec.trim() {
            "order7" => return Ok(Self::order7()),
            "gauss" => return Ok(Self::gaussian()),
            _ => {}
        }
        let mut components = Vec::new();
        for part in spec.split(',') {
            let mut it = part.split(':');
            let (c, v) = match (it.next(), it.next(), it.next()) {
                (Some(c), Some(v), None) => (c.trim(), v.trim()),
                _ => return Err(Error::UnknownKernelPreset(spec.to_string())),
            };
            match (c.parse::<f64>(), v.parse::<f64>()) {
                (Ok(c), Ok(v)) => components.push((c, v)),
                _ => return Err(Error::UnknownKernelPreset(spec.to_string())),
            }
        }
        Self::new(components)
    }

    pub fn components(&self) -> &[(f64, f64)] {
        &self.components
    }

    /// Evaluates `K(x) = sum_j c_j * phi(x; v_j)`.
    pub fn eval(&self, x: f64) -> f64 {
        self.components.iter().map(|&(c, v)| c * gaussian_density(x, v)).sum()
    }

    /// Evaluates the rescaled kernel `K_h(x) = K(x / h) / h`.
    pub fn scaled_eval(&self, h: Bandwidth, x: f64) -> f64 {
        let h = h.value();
        self.eval(x / h) / h
    }

    /// Exact L2 inner product `<K_h1, K_h2>` of two rescalings of the kernel.
    ///
    /// Each cross term is a Gaussian product integral, so the total is
    /// `sum_ij c_i c_j / sqrt(2 pi (v_i h1^2 + v_j h2^2))`. The (i, j) and
    /// (j, i) terms are accumulated together so the result is bitwise
    /// symmetric in the two bandwidths.
    pub fn pair_inner_product(&self, h1: Bandwidth, h2: Bandwidth) -> f64 {
        let a = h1.value() * h1.value();
        let b = h2.value() * h2.value();
        let cross = |vi: f64, vj: f64| 1.0 / (TAU * (vi * a + vj * b)).sqrt();
        let mut total = 0.0;
        for (i, &(ci, vi)) in self.components.iter().enumerate() {
            total += ci * ci * cross(vi, vi);
            for &(cj, vj) in &self.components[i + 1..] {
                total += ci * cj * (cross(vi, vj) + cross(vj, vi));
            }
        }
        total
    }

    /// Squared L2 norm of the unscaled kernel, `<K, K>`.
    pub fn l2_norm_sq(&self) -> f64 {
        let one = Bandwidth(1.0);
        self.pair_inner_product(one, one)
    }

    /// Convolution `K_eta * K_h` as a new mixture.
    ///
    /// Gaussians convolve by adding variances, so the result has one
    /// component `(c_i c_j, v_i eta^2 + v_j h^2)` per pair. The output
    /// absorbs both bandwidths into its variances and is evaluated with
    /// [`eval`](Self::eval), not `scaled_eval`.
    pub fn convolve(&self, h: Bandwidth, eta: Bandwidth) -> Self {
        let (h, eta) = (h.value(), eta.value());
        let mut components = Vec::with_capacity(self.components.len() * self.components.len());
        for &(ci, vi) in &self.components {
            for &(cj, vj) in &self.components {
                components.push((ci * cj, vi * eta * eta + vj * h * h));
            }
        }
        Self::from_parts(components)
    }

    /// k-th moment `int u^k K(u) du`.
    ///
    /// Odd moments of centered Gaussians vanish; even ones are
    /// `v^(k/2) (k-1)!!`, so the mixture moment is a finite sum.
    pub fn moment(&self, k: u32) -> f64 {
        if k % 2 == 1 {
            return 0.0;
        }
        let mut double_factorial = 1.0;
        let mut j = 1;
        while j < k {
            double_factorial *= j as f64;
            j += 2;
        }
        self.components
            .iter()
            .map(|&(c, v)| c * v.powi((k / 2) as i32) * double_factorial)
            .sum()
    }

    /// L1 norm `int |K(u)| du`, by adaptive quadrature (cached).
    ///
    /// Signed mixtures have no closed-form L1 norm. The integration window
    /// covers every component out to 40 standard deviations.
    pub fn l1_norm(&self) -> Result<f64> {
        if let Some(&v) = self.l1.get() {
            return Ok(v);
        }
        let radius = 40.0 * self.max_sd();
        let q = quad::integrate(|x| self.eval(x).abs(), -radius, radius, NORM_QUADRATURE_TOL);
        if !q.converged {
            return Err(Error::QuadratureNoConvergence {
                achieved: q.abs_error,
                requested: NORM_QUADRATURE_TOL,
            });
        }
        let _ = self.l1.set(q.value);
        Ok(q.value)
    }

    /// Sup norm `max |K|`, by a fine scan plus local refinement (cached).
    /// Diagnostic use only; no selection criterion depends on it.
    pub fn sup_norm(&self) -> f64 {
        if let Some(&v) = self.sup.get() {
            return v;
        }
        let radius = 10.0 * self.max_sd();
        let n = 4000;
        let step = 2.0 * radius / n as f64;
        let mut best_x = -radius;
        let mut best = self.eval(best_x).abs();
        for i in 1..=n {
            let x = -radius + i as f64 * step;
            let v = self.eval(x).abs();
            if v > best {
                best = v;
                best_x = x;
            }
        }
        // golden-section refinement around the best scan point
        let (mut lo, mut hi) = (best_x - step, best_x + step);
        for _ in 0..200 {
            let m1 = lo + (hi - lo) * 0.381_966_011_250_105;
            let m2 = hi - (hi - lo) * 0.381_966_011_250_105;
            if self.eval(m1).abs() < self.eval(m2).abs() {
                lo = m1;
            } else {
                hi = m2;
            }
        }
        let refined = self.eval(0.5 * (lo + hi)).abs().max(best);
        let _ = self.sup.set(refined);
        refined
    }

    fn max_sd(&self) -> f64 {
        self.components.iter().map(|&(_, v)| v).fold(0.0, f64::max).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;

    fn bw(v: f64) -> Bandwidth {
        Bandwidth::new(v).unwrap()
    }

    #[test]
    fn rejects_bad_mixtures() {
        assert!(matches!(GaussianMixtureKernel::new(vec![]), Err(Error::EmptyMixture)));
        assert!(matches!(
            GaussianMixtureKernel::new(vec![(1.0, 0.0)]),
            Err(Error::NonPositiveVariance { .. })
        ));
        assert!(matches!(
            GaussianMixtureKernel::new(vec![(0.5, 1.0)]),
            Err(Error::CoefficientSum { .. })
        ));
    }

    #[test]
    fn rejects_bad_bandwidths() {
        assert!(Bandwidth::new(0.0).is_err());
        assert!(Bandwidth::new(-1.0).is_err());
        assert!(Bandwidth::new(f64::INFINITY).is_err());
        assert!(Bandwidth::new(f64::NAN).is_err());
    }

    #[test]
    fn eval_at_zero() {
        // (1/sqrt(2pi)) * (4 - 6/sqrt(2) + 4/sqrt(3) - 1/2) = 0.6250470...
        let expected = (4.0 - 6.0 / 2f64.sqrt() + 4.0 / 3f64.sqrt() - 0.5) / TAU.sqrt();
        assert_abs_diff_eq!(GaussianMixtureKernel::order7().eval(0.0), expected, epsilon = 1e-12);
        assert_abs_diff_eq!(expected, 0.625047, epsilon = 1e-6);
        assert_abs_diff_eq!(
            GaussianMixtureKernel::gaussian().eval(0.0),
            1.0 / TAU.sqrt(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn eval_is_symmetric() {
        let k = GaussianMixtureKernel::order7();
        assert_eq!(k.eval(1.3), k.eval(-1.3));
    }

    #[test]
    fn scaled_eval_examples() {
        let k = GaussianMixtureKernel::order7();
        assert_eq!(k.scaled_eval(bw(1.0), 0.0), k.eval(0.0));
        let g = GaussianMixtureKernel::gaussian();
        assert_abs_diff_eq!(g.scaled_eval(bw(2.0), 0.0), 1.0 / (2.0 * TAU.sqrt()), epsilon = 1e-15);
    }

    #[test]
    fn scaled_eval_preserves_mass() {
        let k = GaussianMixtureKernel::order7();
        let h = bw(0.37);
        let q = quad::integrate(|x| k.scaled_eval(h, x), -80.0, 80.0, 1e-10);
        assert!(q.converged);
        assert_abs_diff_eq!(q.value, 1.0, epsilon = 1e-8);
    }

    #[test]
    fn inner_product_single_gaussian() {
        let g = GaussianMixtureKernel::gaussian();
        let v = g.pair_inner_product(bw(0.5), bw(0.5));
        assert_relative_eq!(v, 1.0 / std::f64::consts::PI.sqrt(), max_relative = 1e-14);
    }

    #[test]
    fn inner_product_matches_quadrature() {
        let k = GaussianMixtureKernel::order7();
        let closed = k.pair_inner_product(bw(1.0), bw(1.0));
        let q = quad::integrate(|x| k.eval(x) * k.eval(x), -80.0, 80.0, 1e-10);
        assert!(q.converged);
        assert_relative_eq!(closed, q.value, max_relative = 1e-8);
    }

    #[test]
    fn inner_product_symmetry() {
        let k = GaussianMixtureKernel::order7();
        assert_eq!(k.pair_inner_product(bw(0.1), bw(0.9)), k.pair_inner_product(bw(0.9), bw(0.1)));
    }

    #[test]
    fn convolution_of_standard_gaussians() {
        let g = GaussianMixtureKernel::gaussian();
        let c = g.convolve(bw(1.0), bw(1.0));
        assert_eq!(c.components(), &[(1.0, 2.0)]);
    }

    #[test]
    fn convolution_coefficients_sum_to_one() {
        let k = GaussianMixtureKernel::order7();
        let c = k.convolve(bw(0.3), bw(0.7));
        let sum: f64 = c.components().iter().map(|&(c, _)| c).sum();
        assert_abs_diff_eq!(sum, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn convolution_matches_numerical_convolution() {
        let k = GaussianMixtureKernel::order7();
        let (h, eta) = (bw(0.2), bw(0.5));
        let c = k.convolve(h, eta);
        let x = 0.4;
        // (K_eta * K_h)(x) = int K_eta(x - y) K_h(y) dy
        let q = quad::integrate(
            |y| k.scaled_eval(eta, x - y) * k.scaled_eval(h, y),
            -40.0,
            40.0,
            1e-10,
        );
        assert!(q.converged);
        assert_abs_diff_eq!(c.eval(x), q.value, epsilon = 1e-8);
    }

    #[test]
    fn moments_vanish_up_to_order_seven() {
        let k = GaussianMixtureKernel::order7();
        assert_abs_diff_eq!(k.moment(0), 1.0, epsilon = 1e-12);
        for order in 1..=7 {
            assert_abs_diff_eq!(k.moment(order), 0.0, epsilon = 1e-12);
        }
        // eighth moments: 105 * (4*1 - 6*16 + 4*81 - 256) = -2520
        assert_abs_diff_eq!(k.moment(8), -2520.0, epsilon = 1e-9);
    }

    #[test]
    fn l1_norm_of_a_density_is_one() {
        let g = GaussianMixtureKernel::gaussian();
        assert_abs_diff_eq!(g.l1_norm().unwrap(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn l1_norm_exceeds_one_for_signed_mixture() {
        let k = GaussianMixtureKernel::order7();
        assert!(k.l1_norm().unwrap() >= 1.0);
    }

    #[test]
    fn l1_norm_matches_riemann_sum() {
        let k = GaussianMixtureKernel::order7();
        let n = 800_000;
        let step = 80.0 / n as f64;
        let riemann: f64 = (0..n).map(|i| k.eval(-40.0 + i as f64 * step).abs() * step).sum();
        assert_relative_eq!(k.l1_norm().unwrap(), riemann, max_relative = 1e-6);
    }

    #[test]
    fn sup_norm_bounds_pointwise_values() {
        let k = GaussianMixtureKernel::order7();
        let sup = k.sup_norm();
        assert!(sup >= k.eval(0.0).abs());
        for i in 0..100 {
            assert!(sup + 1e-12 >= k.eval(-5.0 + 0.1 * i as f64).abs());
        }
    }

    #[test]
    fn parse_spec_round_trip() {
        let k = GaussianMixtureKernel::parse_spec("order7").unwrap();
        assert_eq!(k, GaussianMixtureKernel::order7());
        let g = GaussianMixtureKernel::parse_spec("gauss").unwrap();
        assert_eq!(g, GaussianMixtureKernel::gaussian());
        let custom = GaussianMixtureKernel::parse_spec("4:1, -6:2, 4:3, -1:4").unwrap();
        assert_eq!(custom, GaussianMixtureKernel::order7());
        assert!(GaussianMixtureKernel::parse_spec("epanechnikov").is_err());
        assert!(GaussianMixtureKernel::parse_spec("1:1:1").is_err());
    }

    proptest! {
        #[test]
        fn inner_product_positive_on_diagonal(h in 0.01f64..2.0) {
            let k = GaussianMixtureKernel::order7();
            prop_assert!(k.pair_inner_product(bw(h), bw(h)) > 0.0);
        }

        #[test]
        fn inner_product_scales_inversely(h1 in 0.05f64..1.0, h2 in 0.05f64..1.0, t in 0.1f64..4.0) {
            let k = GaussianMixtureKernel::order7();
            let base = k.pair_inner_product(bw(h1), bw(h2));
            let scaled = k.pair_inner_product(bw(t * h1), bw(t * h2));
            prop_assert!((scaled - base / t).abs() <= 1e-10 * base.abs().max(1.0));
        }

        #[test]
        fn scaled_mass_is_preserved(h in 0.05f64..2.0) {
            let k = GaussianMixtureKernel::new(vec![(2.0, 0.5), (-1.5, 1.0), (0.5, 2.5)]).unwrap();
            let q = quad::integrate(|x| k.scaled_eval(bw(h), x), -150.0, 150.0, 1e-10);
            prop_assert!(q.converged);
            prop_assert!((q.value - 1.0).abs() <= 1e-8);
        }
    }
}
