//! Benchmark models, reproducible sample generation and the Monte-Carlo
//! replication harness.
//!
//! An experiment is a pure function of its configuration: replication `r`
//! draws its sample from a stream seeded with `seed ^ r`, so any single
//! replication can be reproduced in isolation and the aggregate does not
//! depend on execution order. Replications run in parallel; aggregation is
//! an ordered reduction over the collected records.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{
    density_curve, numerator_curve, nw_curve, quotient_curve, Curve, Grid, Sample,
};
use crate::kernel::{gaussian_density, Bandwidth, GaussianMixtureKernel};
use crate::numerics::{
    erlang_cdf, interquantile_grid_from_quantile_fn, interquantile_grid_from_values, invert_cdf,
    standard_normal_quantile, QuantileSpec,
};
use crate::selection::{
    cv_select_numerator, density_curve_family, gl_select_density, gl_select_numerator,
    loo_cv_select_nw, numerator_curve_family, oracle_select, pco_select_density_on,
    pco_select_numerator_on, BandwidthGrid, SelectionResult,
};

/// Benchmark regression functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegressionFn {
    B1,
    B2,
    B3,
    B4,
}

impl RegressionFn {
    pub fn eval(self, x: f64) -> f64 {
        match self {
            Self::B1 => (-x * x / 2.0).exp(),
            Self::B2 => x * x / 4.0 - 1.0,
            Self::B3 => (std::f64::consts::PI * x).sin(),
            Self::B4 => (-x.abs()).exp(),
        }
    }

    pub const ALL: [Self; 4] = [Self::B1, Self::B2, Self::B3, Self::B4];

    pub fn name(self) -> &'static str {
        match self {
            Self::B1 => "b1",
            Self::B2 => "b2",
            Self::B3 => "b3",
            Self::B4 => "b4",
        }
    }
}

impl std::str::FromStr for RegressionFn {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "b1" => Ok(Self::B1),
            "b2" => Ok(Self::B2),
            "b3" => Ok(Self::B3),
            "b4" => Ok(Self::B4),
            other => Err(Error::InvalidModel(format!("unknown regression function '{other}'"))),
        }
    }
}

/// Design-variable laws.
///
/// The scaled gamma is a shape-3, scale-2 gamma divided by 5, which keeps
/// its variance (12/25) on the same order as the standard normal's.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum XDistribution {
    StdNormal,
    ScaledGamma,
}

impl XDistribution {
    pub fn density(self, x: f64) -> f64 {
        match self {
            Self::StdNormal => gaussian_density(x, 1.0),
            Self::ScaledGamma => {
                if x <= 0.0 {
                    0.0
                } else {
                    125.0 / 16.0 * x * x * (-2.5 * x).exp()
                }
            }
        }
    }

    /// Exact quantile function. The gamma branch inverts the regularized
    /// incomplete gamma numerically; `p = 0` maps to the support boundary.
    pub fn quantile(self, p: f64) -> Result<f64> {
        match self {
            Self::StdNormal => standard_normal_quantile(p),
            Self::ScaledGamma => {
                if p == 0.0 {
                    return Ok(0.0);
                }
                if !(p > 0.0 && p < 1.0) {
                    return Err(Error::InvalidProbability { value: p, required: "[0, 1)" });
                }
                let cdf = |x: f64| erlang_cdf(3, 2.5 * x);
                let mut hi = 1.0;
                while cdf(hi) < p {
                    hi *= 2.0;
                }
                Ok(invert_cdf(cdf, 0.0, hi, p))
            }
        }
    }

    /// Draws one variate. Normal via inverse CDF; gamma with integer shape 3
    /// as the sum of three exponentials, then scaled.
    pub fn sample<R: Rng>(self, rng: &mut R) -> f64 {
        match self {
            Self::StdNormal => draw_standard_normal(rng),
            Self::ScaledGamma => {
                let mut total = 0.0;
                for _ in 0..3 {
                    let u: f64 = rng.random();
                    total += -2.0 * (1.0 - u).ln();
                }
                total / 5.0
            }
        }
    }

    /// Evaluation grid between exact quantiles of this law.
    pub fn interquantile_grid(self, spec: &QuantileSpec) -> Result<Grid> {
        interquantile_grid_from_quantile_fn(|p| self.quantile(p), spec)
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::StdNormal => "std_normal",
            Self::ScaledGamma => "scaled_gamma",
        }
    }
}

impl std::str::FromStr for XDistribution {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "std_normal" => Ok(Self::StdNormal),
            "scaled_gamma" => Ok(Self::ScaledGamma),
            other => Err(Error::InvalidModel(format!("unknown design law '{other}'"))),
        }
    }
}

fn draw_standard_normal<R: Rng>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return standard_normal_quantile(u).expect("u lies in (0, 1)");
        }
    }
}

/// A data-generating model: `y = b(x) + noise`, `noise ~ N(0, sigma^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub regression_fn: RegressionFn,
    pub x_law: XDistribution,
    pub sigma: f64,
}

impl ModelSpec {
    pub fn new(regression_fn: RegressionFn, x_law: XDistribution, sigma: f64) -> Result<Self> {
        if !sigma.is_finite() || sigma < 0.0 {
            return Err(Error::InvalidModel(format!("noise std must be nonnegative, got {sigma}")));
        }
        Ok(Self { regression_fn, x_law, sigma })
    }
}

/// Draws `n` observations from the model. Bit-identical output for
/// identical `(model, n, seed)`. Covariates are drawn before the noise, so
/// the design points do not depend on `sigma`.
pub fn generate_sample(model: &ModelSpec, n: usize, seed: u64) -> Sample {
    assert!(n >= 1, "sample size must be at least 1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x: Vec<f64> = (0..n).map(|_| model.x_law.sample(&mut rng)).collect();
    let y: Vec<f64> = x
        .iter()
        .map(|&xi| model.regression_fn.eval(xi) + model.sigma * draw_standard_normal(&mut rng))
        .collect();
    Sample::new(x, y).expect("generated values are finite")
}

/// The model's exact curves on a grid.
#[derive(Debug, Clone)]
pub struct TrueCurves {
    pub f: Curve,
    pub bf: Curve,
    pub b: Curve,
}

/// Evaluates the true density, regression function and their product.
/// Outside the design law's support the density (and the product) is zero.
pub fn true_curves(model: &ModelSpec, grid: &Grid) -> TrueCurves {
    let law = model.x_law;
    let b_fn = model.regression_fn;
    TrueCurves {
        f: Curve::from_fn(grid.clone(), |x| law.density(x)),
        bf: Curve::from_fn(grid.clone(), |x| b_fn.eval(x) * law.density(x)),
        b: Curve::from_fn(grid.clone(), |x| b_fn.eval(x)),
    }
}

/// Selection methods runnable by the harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Pco,
    Gl,
    CvBf,
    CvNw,
    Oracle,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Self::Pco => "pco",
            Self::Gl => "gl",
            Self::CvBf => "cv",
            Self::CvNw => "cv_nw",
            Self::Oracle => "oracle",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pco" => Ok(Self::Pco),
            "gl" => Ok(Self::Gl),
            "cv" | "cv_bf" => Ok(Self::CvBf),
            "cv_nw" | "cv-nw" => Ok(Self::CvNw),
            "oracle" => Ok(Self::Oracle),
            other => Err(Error::InvalidConfig(format!("unknown method '{other}'"))),
        }
    }
}

/// Estimation targets: the product `b*f`, the density `f`, or the
/// regression function `b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Bf,
    F,
    B,
}

impl Target {
    pub fn name(self) -> &'static str {
        match self {
            Self::Bf => "bf",
            Self::F => "f",
            Self::B => "b",
        }
    }
}

impl std::str::FromStr for Target {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bf" => Ok(Self::Bf),
            "f" => Ok(Self::F),
            "b" => Ok(Self::B),
            other => Err(Error::InvalidConfig(format!("unknown target '{other}'"))),
        }
    }
}

/// Named kernel presets usable in experiment configs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelId {
    Order7,
    Gauss,
}

impl KernelId {
    pub fn instantiate(self) -> GaussianMixtureKernel {
        match self {
            Self::Order7 => GaussianMixtureKernel::order7(),
            Self::Gauss => GaussianMixtureKernel::gaussian(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Order7 => "order7",
            Self::Gauss => "gauss",
        }
    }
}

impl std::str::FromStr for KernelId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "order7" => Ok(Self::Order7),
            "gauss" => Ok(Self::Gauss),
            other => Err(Error::InvalidConfig(format!("unknown kernel preset '{other}'"))),
        }
    }
}

/// Where the evaluation grid's quantiles come from: the design law's exact
/// quantiles (one fixed grid for the whole experiment) or the empirical
/// quantiles of each replication's sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridSource {
    Theoretical,
    Empirical,
}

/// Full description of a Monte-Carlo experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
    pub kernel: KernelId,
    pub bandwidth_grid: BandwidthGrid,
    pub quantile_spec: QuantileSpec,
    pub grid_source: GridSource,
    pub methods: Vec<Method>,
    pub targets: Vec<Target>,
    /// Penalty multiplier for the numerator criterion. The harness default
    /// is 2, which reproduces the benchmark tables; the bare selector
    /// functions use 1.
    pub pco_numerator_multiplier: f64,
    /// Penalty multiplier for the density criterion (default 2).
    pub pco_density_multiplier: f64,
    pub gl_upsilon: f64,
    pub gl_chi: f64,
    /// Optional denominator clip for quotient estimates (default: none,
    /// raw ratios with flagged near-zero denominators).
    pub quotient_clip: Option<f64>,
}

impl ExperimentConfig {
    /// Full-scale configuration: 200 replications, every standard method and
    /// target, default grids.
    pub fn full(model: ModelSpec, n: usize) -> Self {
        Self {
            model,
            n,
            reps: 200,
            seed: 0,
            kernel: KernelId::Order7,
            bandwidth_grid: BandwidthGrid::default(),
            quantile_spec: QuantileSpec::default(),
            grid_source: GridSource::Theoretical,
            methods: vec![Method::Pco, Method::CvBf, Method::CvNw, Method::Oracle],
            targets: vec![Target::Bf, Target::F, Target::B],
            pco_numerator_multiplier: 2.0,
            pco_density_multiplier: 2.0,
            gl_upsilon: 1.0,
            gl_chi: 1.0,
            quotient_clip: None,
        }
    }

    /// Reduced-scale preset for fast runs: 50 replications.
    pub fn quick(model: ModelSpec, n: usize) -> Self {
        Self { reps: 50, ..Self::full(model, n) }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidConfig(format!("need n >= 2, got {}", self.n)));
        }
        if self.reps < 1 {
            return Err(Error::InvalidConfig("need at least one replication".into()));
        }
        if !self.model.sigma.is_finite() || self.model.sigma < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "noise std must be nonnegative, got {}",
                self.model.sigma
            )));
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidConfig("no methods requested".into()));
        }
        if self.targets.is_empty() {
            return Err(Error::InvalidConfig("no targets requested".into()));
        }
        if let Some(c) = self.quotient_clip {
            if c.is_nan() || c <= 0.0 {
                return Err(Error::InvalidConfig(format!("clip must be positive, got {c}")));
            }
        }
        self.quantile_spec.validate()
    }

    fn evaluation_grid(&self, sample: &Sample) -> Result<Grid> {
        match self.grid_source {
            GridSource::Theoretical => self.model.x_law.interquantile_grid(&self.quantile_spec),
            GridSource::Empirical => {
                interquantile_grid_from_values(sample.x(), &self.quantile_spec)
            }
        }
    }

    /// Parses a `key = value` config with `[model]`, `[experiment]`,
    /// `[bandwidths]`, `[grid]` and `[selection]` sections. Lines starting
    /// with `#` are comments. Missing keys take the defaults of
    /// [`full`](Self::full); `n` is required.
    pub fn from_ini(text: &str) -> Result<Self> {
        let mut config = Self::full(
            ModelSpec { regression_fn: RegressionFn::B1, x_law: XDistribution::StdNormal, sigma: 0.1 },
            0,
        );
        let mut bw = (0.01, 1.0, 75usize);
        let mut section = String::new();
        let mut saw_n = false;
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let lineno = idx + 1;
            if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
                section = name.trim().to_string();
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::ConfigParse {
                    line: lineno,
                    message: format!("expected 'key = value', got '{line}'"),
                });
            };
            let key = key.trim();
            let value = value.trim();
            let fail = |message: String| Error::ConfigParse { line: lineno, message };
            let parse_f64 =
                |v: &str| v.parse::<f64>().map_err(|_| fail(format!("invalid number '{v}'")));
            let parse_usize =
                |v: &str| v.parse::<usize>().map_err(|_| fail(format!("invalid integer '{v}'")));
            match (section.as_str(), key) {
                ("model", "regression") => config.model.regression_fn = value.parse()?,
                ("model", "x_law") => config.model.x_law = value.parse()?,
                ("model", "sigma") => config.model.sigma = parse_f64(value)?,
                ("experiment", "n") => {
                    config.n = parse_usize(value)?;
                    saw_n = true;
                }
                ("experiment", "reps") => config.reps = parse_usize(value)?,
                ("experiment", "seed") => {
                    config.seed =
                        value.parse().map_err(|_| fail(format!("invalid seed '{value}'")))?
                }
                ("experiment", "kernel") => config.kernel = value.parse()?,
                ("experiment", "methods") => {
                    config.methods = value
                        .split(',')
                        .map(|m| m.trim().parse())
                        .collect::<Result<Vec<Method>>>()?
                }
                ("experiment", "targets") => {
                    config.targets = value
                        .split(',')
                        .map(|t| t.trim().parse())
                        .collect::<Result<Vec<Target>>>()?
                }
                ("bandwidths", "min") => bw.0 = parse_f64(value)?,
                ("bandwidths", "max") => bw.1 = parse_f64(value)?,
                ("bandwidths", "count") => bw.2 = parse_usize(value)?,
                ("grid", "p_lo") => config.quantile_spec.p_lo = parse_f64(value)?,
                ("grid", "p_hi") => config.quantile_spec.p_hi = parse_f64(value)?,
                ("grid", "points") => config.quantile_spec.m = parse_usize(value)?,
                ("grid", "quantile_source") => {
                    config.grid_source = match value {
                        "theoretical" => GridSource::Theoretical,
                        "empirical" => GridSource::Empirical,
                        other => {
                            return Err(fail(format!("unknown quantile source '{other}'")))
                        }
                    }
                }
                ("selection", "pco_numerator_multiplier") => {
                    config.pco_numerator_multiplier = parse_f64(value)?
                }
                ("selection", "pco_density_multiplier") => {
                    config.pco_density_multiplier = parse_f64(value)?
                }
                ("selection", "gl_upsilon") => config.gl_upsilon = parse_f64(value)?,
                ("selection", "gl_chi") => config.gl_chi = parse_f64(value)?,
                ("selection", "quotient_clip") => {
                    config.quotient_clip = Some(parse_f64(value)?)
                }
                (sec, key) => {
                    return Err(fail(format!("unknown key '{key}' in section '[{sec}]'")))
                }
            }
        }
        if !saw_n {
            return Err(Error::InvalidConfig("missing required key 'n' in [experiment]".into()));
        }
        config.bandwidth_grid = BandwidthGrid::equispaced(bw.0, bw.1, bw.2)?;
        config.validate()?;
        Ok(config)
    }
}

/// One method's outcome for one target within a replication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordEntry {
    pub method: Method,
    pub target: Target,
    pub kernel: KernelId,
    /// Selected bandwidth (numerator bandwidth for quotient estimates).
    pub bandwidth: Option<f64>,
    /// Denominator bandwidth for quotient estimates.
    pub bandwidth_den: Option<f64>,
    pub ise: f64,
    /// Grid points flagged in the scored curve (near-zero denominators).
    pub flagged_points: usize,
}

/// All method outcomes of one replication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationRecord {
    pub rep: usize,
    pub entries: Vec<RecordEntry>,
}

/// Appends one JSON object per record.
pub fn write_records_jsonl<W: Write>(records: &[ReplicationRecord], mut out: W) -> Result<()> {
    for record in records {
        serde_json::to_writer(&mut out, record)?;
        writeln!(out)?;
    }
    Ok(())
}

fn find_curve(family: &[(Bandwidth, Curve)], h: Bandwidth) -> &Curve {
    &family
        .iter()
        .find(|(hb, _)| *hb == h)
        .expect("selected bandwidth comes from the family grid")
        .1
}

fn selected_error(selection: &SelectionResult) -> f64 {
    selection
        .criterion
        .iter()
        .find(|&&(h, _)| h == selection.selected.value())
        .expect("selected bandwidth appears in the trace")
        .1
}

/// Runs one replication: draws the sample, applies every requested method
/// to every requested target and scores against the exact curves.
///
/// For the regression target the methods are the leave-one-out selected
/// single-bandwidth estimator (`cv_nw`), the ratio of the two PCO-selected
/// estimates (`pco`), and the ratio of the two per-sample best estimates
/// (`oracle`).
pub fn run_replication(config: &ExperimentConfig, rep: usize) -> Result<ReplicationRecord> {
    let sample = generate_sample(&config.model, config.n, config.seed ^ rep as u64);
    let grid = config.evaluation_grid(&sample)?;
    let truth = true_curves(&config.model, &grid);
    let kernel = config.kernel.instantiate();
    let gauss = GaussianMixtureKernel::gaussian();
    let bws = &config.bandwidth_grid;

    let has = |m: Method| config.methods.contains(&m);
    let want = |t: Target| config.targets.contains(&t);
    let ise = |curve: &Curve, truth: &Curve| crate::numerics::riemann_l2_dist_sq(curve, truth);

    let need_num = (want(Target::Bf) || want(Target::B)) && (has(Method::Pco) || has(Method::Oracle));
    let need_den = (want(Target::F) || want(Target::B)) && (has(Method::Pco) || has(Method::Oracle));

    let num_family = need_num.then(|| numerator_curve_family(&sample, &kernel, bws, &grid));
    let den_family = need_den.then(|| density_curve_family(&sample, &kernel, bws, &grid));

    let pco_num = match (&num_family, has(Method::Pco)) {
        (Some(family), true) => Some(pco_select_numerator_on(
            family,
            &sample,
            &kernel,
            config.pco_numerator_multiplier,
        )?),
        _ => None,
    };
    let pco_den = match (&den_family, has(Method::Pco)) {
        (Some(family), true) => {
            Some(pco_select_density_on(family, &sample, &kernel, config.pco_density_multiplier)?)
        }
        _ => None,
    };
    let oracle_num = match (&num_family, has(Method::Oracle)) {
        (Some(family), true) => Some(oracle_select(family, &truth.bf)?),
        _ => None,
    };
    let oracle_den = match (&den_family, has(Method::Oracle)) {
        (Some(family), true) => Some(oracle_select(family, &truth.f)?),
        _ => None,
    };

    let mut entries = Vec::new();

    if want(Target::Bf) {
        if let (Some(sel), Some(family)) = (&pco_num, &num_family) {
            entries.push(RecordEntry {
                method: Method::Pco,
                target: Target::Bf,
                kernel: config.kernel,
                bandwidth: Some(sel.selected.value()),
                bandwidth_den: None,
                ise: ise(find_curve(family, sel.selected), &truth.bf)?,
                flagged_points: 0,
            });
        }
        if has(Method::Gl) {
            let sel = gl_select_numerator(&sample, &kernel, bws, &grid, config.gl_upsilon)?;
            let curve = numerator_curve(&sample, &kernel, sel.selected, &grid);
            entries.push(RecordEntry {
                method: Method::Gl,
                target: Target::Bf,
                kernel: config.kernel,
                bandwidth: Some(sel.selected.value()),
                bandwidth_den: None,
                ise: ise(&curve, &truth.bf)?,
                flagged_points: 0,
            });
        }
        if has(Method::CvBf) {
            let sel = cv_select_numerator(&sample, bws)?;
            let curve = numerator_curve(&sample, &gauss, sel.selected, &grid);
            entries.push(RecordEntry {
                method: Method::CvBf,
                target: Target::Bf,
                kernel: KernelId::Gauss,
                bandwidth: Some(sel.selected.value()),
                bandwidth_den: None,
                ise: ise(&curve, &truth.bf)?,
                flagged_points: 0,
            });
            // per-sample best of the same Gaussian family, for benchmarking
            // the cross-validated choice within its own collection
            if has(Method::Oracle) {
                let gauss_family = numerator_curve_family(&sample, &gauss, bws, &grid);
                let osel = oracle_select(&gauss_family, &truth.bf)?;
                entries.push(RecordEntry {
                    method: Method::Oracle,
                    target: Target::Bf,
                    kernel: KernelId::Gauss,
                    bandwidth: Some(osel.selected.value()),
                    bandwidth_den: None,
                    ise: selected_error(&osel),
                    flagged_points: 0,
                });
            }
        }
        if let Some(sel) = &oracle_num {
            entries.push(RecordEntry {
                method: Method::Oracle,
                target: Target::Bf,
                kernel: config.kernel,
                bandwidth: Some(sel.selected.value()),
                bandwidth_den: None,
                ise: selected_error(sel),
                flagged_points: 0,
            });
        }
    }

    if want(Target::F) {
        if let (Some(sel), Some(family)) = (&pco_den, &den_family) {
            entries.push(RecordEntry {
                method: Method::Pco,
                target: Target::F,
                kernel: config.kernel,
                bandwidth: Some(sel.selected.value()),
                bandwidth_den: None,
                ise: ise(find_curve(family, sel.selected), &truth.f)?,
                flagged_points: 0,
            });
        }
        if has(Method::Gl) {
            let sel = gl_select_density(&sample, &kernel, bws, &grid, config.gl_chi)?;
            let curve = density_curve(&sample, &kernel, sel.selected, &grid);
            entries.push(RecordEntry {
                method: Method::Gl,
                target: Target::F,
                kernel: config.kernel,
                bandwidth: Some(sel.selected.value()),
                bandwidth_den: None,
                ise: ise(&curve, &truth.f)?,
                flagged_points: 0,
            });
        }
        if let Some(sel) = &oracle_den {
            entries.push(RecordEntry {
                method: Method::Oracle,
                target: Target::F,
                kernel: config.kernel,
                bandwidth: Some(sel.selected.value()),
                bandwidth_den: None,
                ise: selected_error(sel),
                flagged_points: 0,
            });
        }
    }

    if want(Target::B) {
        if has(Method::CvNw) {
            let sel = loo_cv_select_nw(&sample, bws)?;
            let curve = nw_curve(&sample, &gauss, sel.selected, &grid);
            entries.push(RecordEntry {
                method: Method::CvNw,
                target: Target::B,
                kernel: KernelId::Gauss,
                bandwidth: Some(sel.selected.value()),
                bandwidth_den: None,
                ise: ise(&curve, &truth.b)?,
                flagged_points: curve.flagged_count(),
            });
        }
        if let (Some(sel_num), Some(sel_den), Some(nf), Some(df)) =
            (&pco_num, &pco_den, &num_family, &den_family)
        {
            let ratio = quotient_curve(
                find_curve(nf, sel_num.selected),
                find_curve(df, sel_den.selected),
                config.quotient_clip,
            )?;
            entries.push(RecordEntry {
                method: Method::Pco,
                target: Target::B,
                kernel: config.kernel,
                bandwidth: Some(sel_num.selected.value()),
                bandwidth_den: Some(sel_den.selected.value()),
                ise: ise(&ratio, &truth.b)?,
                flagged_points: ratio.flagged_count(),
            });
        }
        if let (Some(sel_num), Some(sel_den), Some(nf), Some(df)) =
            (&oracle_num, &oracle_den, &num_family, &den_family)
        {
            let ratio = quotient_curve(
                find_curve(nf, sel_num.selected),
                find_curve(df, sel_den.selected),
                config.quotient_clip,
            )?;
            entries.push(RecordEntry {
                method: Method::Oracle,
                target: Target::B,
                kernel: config.kernel,
                bandwidth: Some(sel_num.selected.value()),
                bandwidth_den: Some(sel_den.selected.value()),
                ise: ise(&ratio, &truth.b)?,
                flagged_points: ratio.flagged_count(),
            });
        }
    }

    Ok(ReplicationRecord { rep, entries })
}

/// One aggregated table cell: a method/target pair with its error and
/// bandwidth statistics over all replications.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub method: Method,
    pub target: Target,
    pub kernel: KernelId,
    pub mise_x100: f64,
    pub std_x100: f64,
    pub mean_bandwidth: Option<f64>,
    pub std_bandwidth: Option<f64>,
    pub mean_bandwidth_den: Option<f64>,
    pub std_bandwidth_den: Option<f64>,
    pub mean_flagged_points: f64,
}

/// Aggregated experiment outcome: mean and spread of `100 * ISE` and of the
/// selected bandwidths, per method and target.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MISEReport {
    pub model: String,
    pub x_law: String,
    pub sigma: f64,
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
    pub rows: Vec<ReportRow>,
}

impl MISEReport {
    pub fn find(&self, method: Method, target: Target, kernel: KernelId) -> Option<&ReportRow> {
        self.rows
            .iter()
            .find(|r| r.method == method && r.target == target && r.kernel == kernel)
    }
}

fn mean_and_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

fn mean_and_std_opt(values: &[Option<f64>]) -> (Option<f64>, Option<f64>) {
    if values.iter().any(Option::is_none) {
        return (None, None);
    }
    let collected: Vec<f64> = values.iter().map(|v| v.unwrap()).collect();
    let (m, s) = mean_and_std(&collected);
    (Some(m), Some(s))
}

fn aggregate(config: &ExperimentConfig, records: &[ReplicationRecord]) -> Result<MISEReport> {
    let first = records.first().ok_or_else(|| Error::InvalidConfig("no replications".into()))?;
    let mut rows = Vec::with_capacity(first.entries.len());
    for (i, proto) in first.entries.iter().enumerate() {
        let ises: Vec<f64> = records.iter().map(|r| 100.0 * r.entries[i].ise).collect();
        let bandwidths: Vec<Option<f64>> = records.iter().map(|r| r.entries[i].bandwidth).collect();
        let dens: Vec<Option<f64>> = records.iter().map(|r| r.entries[i].bandwidth_den).collect();
        let flagged: f64 = records.iter().map(|r| r.entries[i].flagged_points as f64).sum::<f64>()
            / records.len() as f64;
        let (mise, std) = mean_and_std(&ises);
        let (mean_bw, std_bw) = mean_and_std_opt(&bandwidths);
        let (mean_den, std_den) = mean_and_std_opt(&dens);
        rows.push(ReportRow {
            method: proto.method,
            target: proto.target,
            kernel: proto.kernel,
            mise_x100: mise,
            std_x100: std,
            mean_bandwidth: mean_bw,
            std_bandwidth: std_bw,
            mean_bandwidth_den: mean_den,
            std_bandwidth_den: std_den,
            mean_flagged_points: flagged,
        });
    }
    Ok(MISEReport {
        model: config.model.regression_fn.name().to_string(),
        x_law: config.model.x_law.name().to_string(),
        sigma: config.model.sigma,
        n: config.n,
        reps: config.reps,
        seed: config.seed,
        rows,
    })
}

/// Runs all replications (in parallel) and aggregates them, returning the
/// raw per-replication records alongside the report.
pub fn run_experiment_with_records(
    config: &ExperimentConfig,
) -> Result<(MISEReport, Vec<ReplicationRecord>)> {
    config.validate()?;
    let records: Result<Vec<ReplicationRecord>> =
        (0..config.reps).into_par_iter().map(|rep| run_replication(config, rep)).collect();
    let records = records?;
    let report = aggregate(config, &records)?;
    Ok((report, records))
}

/// Runs all replications and aggregates them into a report.
pub fn run_experiment(config: &ExperimentConfig) -> Result<MISEReport> {
    run_experiment_with_records(config).map(|(report, _)| report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad;
    use approx::assert_abs_diff_eq;

    fn small_config() -> ExperimentConfig {
        let model = ModelSpec::new(RegressionFn::B1, XDistribution::StdNormal, 0.1).unwrap();
        let mut config = ExperimentConfig::full(model, 60);
        config.reps = 3;
        config.seed = 99;
        config.bandwidth_grid = BandwidthGrid::equispaced(0.05, 1.0, 12).unwrap();
        config.quantile_spec = QuantileSpec { p_lo: 0.02, p_hi: 0.98, m: 40 };
        config
    }

    #[test]
    fn sample_generation_is_deterministic() {
        let model = ModelSpec::new(RegressionFn::B3, XDistribution::StdNormal, 0.7).unwrap();
        let a = generate_sample(&model, 50, 1234);
        let b = generate_sample(&model, 50, 1234);
        assert_eq!(a, b);
        let c = generate_sample(&model, 50, 1235);
        assert_ne!(a, c);
    }

    #[test]
    fn noiseless_samples_follow_the_regression_exactly() {
        let model = ModelSpec::new(RegressionFn::B2, XDistribution::StdNormal, 0.0).unwrap();
        let s = generate_sample(&model, 30, 7);
        for (&x, &y) in s.x().iter().zip(s.y()) {
            assert_eq!(y, x * x / 4.0 - 1.0);
        }
    }

    #[test]
    fn design_points_do_not_depend_on_sigma() {
        let quiet = ModelSpec::new(RegressionFn::B1, XDistribution::StdNormal, 0.0).unwrap();
        let loud = ModelSpec::new(RegressionFn::B1, XDistribution::StdNormal, 0.7).unwrap();
        let a = generate_sample(&quiet, 40, 5);
        let b = generate_sample(&loud, 40, 5);
        assert_eq!(a.x(), b.x());
    }

    #[test]
    fn mean_squared_responses_in_expected_range() {
        // all four regression functions with standard normal design and
        // small noise have second moments well inside [0.30, 0.75]
        for regression in RegressionFn::ALL {
            let model = ModelSpec::new(regression, XDistribution::StdNormal, 0.1).unwrap();
            let s = generate_sample(&model, 4000, 11);
            let level = s.mean_y_sq();
            assert!(
                (0.25..=0.85).contains(&level),
                "{}: mean squared response {level}",
                regression.name()
            );
        }
    }

    #[test]
    fn scaled_gamma_density_integrates_to_one() {
        let q = quad::integrate(|x| XDistribution::ScaledGamma.density(x), 0.0, 60.0, 1e-10);
        assert!(q.converged);
        assert_abs_diff_eq!(q.value, 1.0, epsilon = 1e-8);
    }

    #[test]
    fn scaled_gamma_quantile_inverts_cdf() {
        for &p in &[0.02, 0.25, 0.5, 0.75, 0.98] {
            let x = XDistribution::ScaledGamma.quantile(p).unwrap();
            assert_abs_diff_eq!(erlang_cdf(3, 2.5 * x), p, epsilon = 1e-12);
        }
        assert_eq!(XDistribution::ScaledGamma.quantile(0.0).unwrap(), 0.0);
        assert!(XDistribution::ScaledGamma.quantile(1.0).is_err());
    }

    #[test]
    fn scaled_gamma_sampler_has_expected_moments() {
        let model = ModelSpec::new(RegressionFn::B1, XDistribution::ScaledGamma, 0.0).unwrap();
        let s = generate_sample(&model, 40_000, 3);
        let mean = s.x().iter().sum::<f64>() / s.len() as f64;
        let var = s.x().iter().map(|&v| (v - mean) * (v - mean)).sum::<f64>() / s.len() as f64;
        // gamma(shape 3, scale 2) / 5: mean 6/5, variance 12/25
        assert_abs_diff_eq!(mean, 1.2, epsilon = 0.02);
        assert_abs_diff_eq!(var, 0.48, epsilon = 0.03);
    }

    #[test]
    fn true_curve_values() {
        let model = ModelSpec::new(RegressionFn::B1, XDistribution::StdNormal, 0.1).unwrap();
        let grid = Grid::equispaced(-2.0, 2.0, 41).unwrap();
        let t = true_curves(&model, &grid);
        let at_zero = 20; // x = 0
        assert_abs_diff_eq!(t.f.values()[at_zero], 0.39894, epsilon = 1e-5);
        assert_abs_diff_eq!(t.bf.values()[at_zero], 0.39894, epsilon = 1e-5);
        assert_eq!(t.b.values()[at_zero], 1.0);
    }

    #[test]
    fn gamma_density_is_zero_outside_support() {
        let model = ModelSpec::new(RegressionFn::B4, XDistribution::ScaledGamma, 0.1).unwrap();
        let grid = Grid::equispaced(-1.0, 1.0, 21).unwrap();
        let t = true_curves(&model, &grid);
        for (&x, &v) in grid.points().iter().zip(t.f.values()) {
            if x <= 0.0 {
                assert_eq!(v, 0.0);
            } else {
                assert!(v > 0.0);
            }
        }
    }

    #[test]
    fn replications_are_reproducible() {
        let config = small_config();
        let a = run_replication(&config, 2).unwrap();
        let b = run_replication(&config, 2).unwrap();
        assert_eq!(a, b);
        let c = run_replication(&config, 3).unwrap();
        assert_ne!(a.entries[0].ise, c.entries[0].ise);
    }

    #[test]
    fn oracle_dominates_same_family_selectors_in_every_record() {
        let config = small_config();
        let (_, records) = run_experiment_with_records(&config).unwrap();
        for record in &records {
            let get = |m: Method, t: Target, k: KernelId| {
                record
                    .entries
                    .iter()
                    .find(|e| e.method == m && e.target == t && e.kernel == k)
                    .map(|e| e.ise)
                    .unwrap()
            };
            assert!(
                get(Method::Oracle, Target::Bf, KernelId::Order7)
                    <= get(Method::Pco, Target::Bf, KernelId::Order7)
            );
            assert!(
                get(Method::Oracle, Target::Bf, KernelId::Gauss)
                    <= get(Method::CvBf, Target::Bf, KernelId::Gauss)
            );
            assert!(
                get(Method::Oracle, Target::F, KernelId::Order7)
                    <= get(Method::Pco, Target::F, KernelId::Order7)
            );
        }
    }

    #[test]
    fn experiment_output_is_schedule_independent() {
        let config = small_config();
        let a = run_experiment(&config).unwrap();
        let b = run_experiment(&config).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn report_has_rows_for_each_requested_method() {
        let config = small_config();
        let report = run_experiment(&config).unwrap();
        assert!(report.find(Method::Pco, Target::Bf, KernelId::Order7).is_some());
        assert!(report.find(Method::CvBf, Target::Bf, KernelId::Gauss).is_some());
        assert!(report.find(Method::Oracle, Target::Bf, KernelId::Order7).is_some());
        assert!(report.find(Method::Oracle, Target::Bf, KernelId::Gauss).is_some());
        assert!(report.find(Method::Pco, Target::F, KernelId::Order7).is_some());
        assert!(report.find(Method::CvNw, Target::B, KernelId::Gauss).is_some());
        assert!(report.find(Method::Pco, Target::B, KernelId::Order7).is_some());
        assert!(report.find(Method::Oracle, Target::B, KernelId::Order7).is_some());
        let ratio = report.find(Method::Pco, Target::B, KernelId::Order7).unwrap();
        assert!(ratio.mean_bandwidth.is_some() && ratio.mean_bandwidth_den.is_some());
        for row in &report.rows {
            assert!(row.std_x100 >= 0.0);
            assert!(row.mise_x100 >= 0.0);
        }
    }

    #[test]
    fn single_replication_has_zero_spread() {
        let mut config = small_config();
        config.reps = 1;
        let report = run_experiment(&config).unwrap();
        for row in &report.rows {
            assert_eq!(row.std_x100, 0.0);
            assert_eq!(row.std_bandwidth, Some(0.0));
        }
    }

    #[test]
    fn records_serialize_as_json_lines() {
        let mut config = small_config();
        config.reps = 2;
        let (_, records) = run_experiment_with_records(&config).unwrap();
        let mut buf = Vec::new();
        write_records_jsonl(&records, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 2);
        let parsed: ReplicationRecord = serde_json::from_str(text.lines().next().unwrap()).unwrap();
        assert_eq!(parsed, records[0]);
    }

    #[test]
    fn ini_round_trip() {
        let text = "\
# benchmark setup
[model]
regression = b3
x_law = scaled_gamma
sigma = 0.7

[experiment]
n = 120
reps = 4
seed = 42
methods = pco, cv, oracle
targets = bf, b

[bandwidths]
min = 0.05
max = 0.9
count = 10

[grid]
p_lo = 0.05
p_hi = 0.95
points = 60
quantile_source = empirical

[selection]
gl_upsilon = 2.5
";
        let config = ExperimentConfig::from_ini(text).unwrap();
        assert_eq!(config.model.regression_fn, RegressionFn::B3);
        assert_eq!(config.model.x_law, XDistribution::ScaledGamma);
        assert_eq!(config.model.sigma, 0.7);
        assert_eq!(config.n, 120);
        assert_eq!(config.reps, 4);
        assert_eq!(config.seed, 42);
        assert_eq!(config.methods, vec![Method::Pco, Method::CvBf, Method::Oracle]);
        assert_eq!(config.targets, vec![Target::Bf, Target::B]);
        assert_eq!(config.bandwidth_grid.len(), 10);
        assert_eq!(config.quantile_spec.m, 60);
        assert_eq!(config.grid_source, GridSource::Empirical);
        assert_eq!(config.gl_upsilon, 2.5);
        assert_eq!(config.pco_density_multiplier, 2.0);
    }

    #[test]
    fn ini_errors_name_the_line() {
        let err = ExperimentConfig::from_ini("[model]\nwhat = 3\n").unwrap_err();
        match err {
            Error::ConfigParse { line, message } => {
                assert_eq!(line, 2);
                assert!(message.contains("what"));
            }
            other => panic!("unexpected error {other:?}"),
        }
        assert!(ExperimentConfig::from_ini("[experiment]\nreps = 5\n").is_err());
    }
}
