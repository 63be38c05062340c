//! Built-in benchmark table presets.
//!
//! Each id maps to a fully specified grid of experiments: the four
//! regression functions crossed with sample sizes 250, 500 and 1000, at a
//! fixed design law and noise level. Ids ending in `_01` use noise std 0.1
//! and `_07` use 0.7.

use kernsel::simulation::{
    ExperimentConfig, Method, ModelSpec, RegressionFn, Target, XDistribution,
};

/// What the table reports; it also fixes which methods run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableKind {
    /// Errors of the numerator estimators (PCO, CV, oracle columns).
    NumeratorMise,
    /// Mean selected bandwidths of the numerator estimators.
    NumeratorBandwidths,
    /// Errors of the regression estimators (loo-cv NW, PCO quotient,
    /// oracle quotient columns).
    RegressionMise,
    /// Mean bandwidths selected by leave-one-out cross-validation.
    NwBandwidths,
}

#[derive(Debug, Clone, Copy)]
pub struct TablePreset {
    pub id: &'static str,
    pub x_law: XDistribution,
    pub sigma: f64,
    pub kind: TableKind,
}

pub const TABLES: &[TablePreset] = &[
    TablePreset { id: "bf_gauss_01", x_law: XDistribution::StdNormal, sigma: 0.1, kind: TableKind::NumeratorMise },
    TablePreset { id: "bf_gauss_07", x_law: XDistribution::StdNormal, sigma: 0.7, kind: TableKind::NumeratorMise },
    TablePreset { id: "bf_bw_gauss_01", x_law: XDistribution::StdNormal, sigma: 0.1, kind: TableKind::NumeratorBandwidths },
    TablePreset { id: "b_gauss_01", x_law: XDistribution::StdNormal, sigma: 0.1, kind: TableKind::RegressionMise },
    TablePreset { id: "b_nw_bw_01", x_law: XDistribution::StdNormal, sigma: 0.1, kind: TableKind::NwBandwidths },
    TablePreset { id: "b_gauss_07", x_law: XDistribution::StdNormal, sigma: 0.7, kind: TableKind::RegressionMise },
    TablePreset { id: "nw_bw_07", x_law: XDistribution::StdNormal, sigma: 0.7, kind: TableKind::NwBandwidths },
    TablePreset { id: "bf_gamma_01", x_law: XDistribution::ScaledGamma, sigma: 0.1, kind: TableKind::NumeratorMise },
    TablePreset { id: "bf_gamma_07", x_law: XDistribution::ScaledGamma, sigma: 0.7, kind: TableKind::NumeratorMise },
    TablePreset { id: "b_gamma_01", x_law: XDistribution::ScaledGamma, sigma: 0.1, kind: TableKind::RegressionMise },
    TablePreset { id: "b_gamma_07", x_law: XDistribution::ScaledGamma, sigma: 0.7, kind: TableKind::RegressionMise },
];

pub const SAMPLE_SIZES: [usize; 3] = [250, 500, 1000];

pub fn preset(id: &str) -> Option<&'static TablePreset> {
    TABLES.iter().find(|t| t.id == id)
}

pub fn known_ids() -> String {
    TABLES.iter().map(|t| t.id).collect::<Vec<_>>().join(", ")
}

impl TablePreset {
    /// One experiment per (regression function, sample size) cell.
    pub fn configs(&self, reps: Option<usize>, seed: u64) -> Vec<ExperimentConfig> {
        let (methods, targets) = match self.kind {
            TableKind::NumeratorMise | TableKind::NumeratorBandwidths => {
                (vec![Method::Pco, Method::CvBf, Method::Oracle], vec![Target::Bf])
            }
            TableKind::RegressionMise => {
                (vec![Method::CvNw, Method::Pco, Method::Oracle], vec![Target::B])
            }
            TableKind::NwBandwidths => (vec![Method::CvNw], vec![Target::B]),
        };
        let mut configs = Vec::new();
        for regression in RegressionFn::ALL {
            for n in SAMPLE_SIZES {
                let model = ModelSpec::new(regression, self.x_law, self.sigma)
                    .expect("preset noise levels are valid");
                let mut config = ExperimentConfig::full(model, n);
                config.seed = seed;
                if let Some(reps) = reps {
                    config.reps = reps;
                }
                config.methods = methods.clone();
                config.targets = targets.clone();
                configs.push(config);
            }
        }
        configs
    }
}
