use super::{Features, TrainingSet};
use crate::glcm::{FeatureVector, FEATURE_COUNT};

const STD_FLOOR: f64 = 1e-12;

/// Per-feature z-scoring fitted on training data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Standardizer {
    pub(super) mean: Features,
    pub(super) std: Features,
}

impl Standardizer {
    pub fn fit(data: &TrainingSet) -> Self {
        Self::fit_rows(data.samples().iter().map(|s| s.features.to_array()))
    }

    pub fn fit_rows(rows: impl Iterator<Item = Features> + Clone) -> Self {
        let n = rows.clone().count().max(1) as f64;
        let mut mean = [0.0; FEATURE_COUNT];
        for r in rows.clone() {
            (0..FEATURE_COUNT).for_each(|f| mean[f] += r[f]);
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = [0.0; FEATURE_COUNT];
        for r in rows {
            (0..FEATURE_COUNT).for_each(|f| var[f] += (r[f] - mean[f]).powi(2));
        }
        let std = var.map(|v| (v / n).sqrt().max(STD_FLOOR));
        Self { mean, std }
    }

    pub fn from_parts(mean: Features, std: Features) -> Self {
        Self {
            mean,
            std: std.map(|s| s.max(STD_FLOOR)),
        }
    }

    pub fn mean(&self) -> &Features {
        &self.mean
    }

    pub fn std(&self) -> &Features {
        &self.std
    }

    pub fn apply(&self, x: &FeatureVector) -> Features {
        let x = x.to_array();
        std::array::from_fn(|f| (x[f] - self.mean[f]) / self.std[f])
    }
}
