use super::{Classifier, Features, TrainingSet};
use crate::glcm::{FeatureVector, FEATURE_COUNT};
use crate::imaging::ClassMap;
use crate::Result;

/// Relative and absolute variance floors.
const VAR_SMOOTHING: f64 = 1e-9;
const VAR_EPSILON: f64 = 1e-12;

/// Gaussian naive Bayes: per class a prior and an independent normal per feature.
#[derive(Debug, Clone, PartialEq)]
pub struct NbModel {
    pub(super) classes: ClassMap,
    pub(super) priors: Vec<f64>,
    pub(super) means: Vec<Features>,
    pub(super) variances: Vec<Features>,
}

fn mean_var<'a>(rows: impl Iterator<Item = &'a Features> + Clone) -> (Features, Features, usize) {
    let n = rows.clone().count();
    let mut mean = [0.0; FEATURE_COUNT];
    for r in rows.clone() {
        for f in 0..FEATURE_COUNT {
            mean[f] += r[f];
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let mut var = [0.0; FEATURE_COUNT];
    for r in rows {
        for f in 0..FEATURE_COUNT {
            let d = r[f] - mean[f];
            var[f] += d * d;
        }
    }
    var.iter_mut().for_each(|v| *v /= n as f64);
    (mean, var, n)
}

impl NbModel {
    /// Frequency priors and population moments. Each variance is raised to at
    /// least `1e-9 * max_f Var(feature f) + 1e-12` so no likelihood degenerates.
    pub fn fit(data: &TrainingSet) -> Result<Self> {
        let rows: Vec<(Features, u8)> = data
            .samples()
            .iter()
            .map(|s| (s.features.to_array(), s.label))
            .collect();
        let (_, global_var, total) = mean_var(rows.iter().map(|r| &r.0));
        let floor = VAR_SMOOTHING * global_var.iter().copied().fold(0.0, f64::max) + VAR_EPSILON;

        let mut priors = Vec::new();
        let mut means = Vec::new();
        let mut variances = Vec::new();
        for id in data.classes().ids() {
            let (mean, mut var, n) = mean_var(rows.iter().filter(|r| r.1 == id).map(|r| &r.0));
            var.iter_mut().for_each(|v| *v = v.max(floor));
            priors.push(n as f64 / total as f64);
            means.push(mean);
            variances.push(var);
        }
        Ok(Self {
            classes: data.classes().clone(),
            priors,
            means,
            variances,
        })
    }

    pub fn classes(&self) -> &ClassMap {
        &self.classes
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    pub fn means(&self) -> &[Features] {
        &self.means
    }

    pub fn variances(&self) -> &[Features] {
        &self.variances
    }

    /// `ln prior(c) + Σ_f ln N(x_f; μ_cf, σ²_cf)` for each class.
    pub fn log_joint(&self, x: &FeatureVector) -> Vec<f64> {
        let x = x.to_array();
        (0..self.priors.len())
            .map(|c| {
                let mut score = self.priors[c].ln();
                for ((xf, mean), var) in x.iter().zip(&self.means[c]).zip(&self.variances[c]) {
                    let d = xf - mean;
                    score += -0.5 * (2.0 * std::f64::consts::PI * var).ln() - d * d / (2.0 * var);
                }
                score
            })
            .collect()
    }
}

impl Classifier for NbModel {
    fn classes(&self) -> &ClassMap {
        &self.classes
    }

    fn scores(&self, x: &FeatureVector) -> Vec<f64> {
        self.log_joint(x)
    }
}
