//! Window classifiers: Gaussian naive Bayes and a one-vs-rest kernel SVM.

mod nb;
mod persist;
mod standardize;
mod svm;

pub use nb::NbModel;
pub use persist::{ModelMeta, PersistedModel, MODEL_MAGIC};
pub use standardize::Standardizer;
pub use svm::{BinaryProblem, Kernel, SvmModel, SvmParams};

use std::collections::BTreeMap;

use crate::glcm::{FeatureVector, FEATURE_COUNT};
use crate::imaging::{ClassId, ClassMap, UNLABELED};
use crate::{Error, Result};

pub type Features = [f64; FEATURE_COUNT];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabeledSample {
    pub features: FeatureVector,
    pub label: ClassId,
}

impl LabeledSample {
    pub fn new(features: impl Into<FeatureVector>, label: ClassId) -> Self {
        Self {
            features: features.into(),
            label,
        }
    }
}

/// Samples plus the classes they belong to. Every class in the map has at
/// least one sample and at least two classes are present.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    samples: Vec<LabeledSample>,
    classes: ClassMap,
}

impl TrainingSet {
    pub fn new(samples: Vec<LabeledSample>, classes: ClassMap) -> Result<Self> {
        let mut counts = vec![0usize; classes.len()];
        for s in &samples {
            let idx = classes
                .index_of(s.label)
                .ok_or(Error::UnknownClass(s.label))?;
            counts[idx] += 1;
        }
        if let Some(pos) = counts.iter().position(|&c| c == 0) {
            return Err(Error::EmptyClass(classes.entries()[pos].0));
        }
        if classes.len() < 2 {
            return Err(Error::TooFewClasses(classes.len()));
        }
        Ok(Self { samples, classes })
    }

    /// Derives the class map from the labels present.
    pub fn from_samples(samples: Vec<LabeledSample>) -> Result<Self> {
        if let Some(s) = samples.iter().find(|s| s.label == UNLABELED) {
            return Err(Error::UnknownClass(s.label));
        }
        let classes = ClassMap::from_ids(samples.iter().map(|s| s.label))?;
        Self::new(samples, classes)
    }

    pub fn samples(&self) -> &[LabeledSample] {
        &self.samples
    }

    pub fn classes(&self) -> &ClassMap {
        &self.classes
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Sample count per class, in class-map order.
    pub fn class_counts(&self) -> Vec<(ClassId, usize)> {
        let mut counts: BTreeMap<ClassId, usize> = self.classes.ids().map(|id| (id, 0)).collect();
        for s in &self.samples {
            *counts.get_mut(&s.label).expect("validated label") += 1;
        }
        counts.into_iter().collect()
    }

    /// The samples at `indices`, keeping this set's class map.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        Self::new(
            indices.iter().map(|&i| self.samples[i]).collect(),
            self.classes.clone(),
        )
    }
}

/// Index of the largest score; ties resolve to the earliest index.
pub fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

pub trait Classifier {
    fn classes(&self) -> &ClassMap;

    /// One score per class in class-map order; larger is more likely.
    fn scores(&self, x: &FeatureVector) -> Vec<f64>;

    fn predict(&self, x: &FeatureVector) -> ClassId {
        self.classes().entries()[argmax(&self.scores(x))].0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum ClassifierSpec {
    #[default]
    NaiveBayes,
    Svm(SvmParams),
}

impl ClassifierSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ClassifierSpec::NaiveBayes => "nb",
            ClassifierSpec::Svm(_) => "svm",
        }
    }

    pub fn fit(&self, data: &TrainingSet) -> Result<Model> {
        match self {
            ClassifierSpec::NaiveBayes => NbModel::fit(data).map(Model::NaiveBayes),
            ClassifierSpec::Svm(params) => SvmModel::fit(data, params).map(Model::Svm),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    NaiveBayes(NbModel),
    Svm(SvmModel),
}

impl Model {
    pub fn kind(&self) -> &'static str {
        match self {
            Model::NaiveBayes(_) => "nb",
            Model::Svm(_) => "svm",
        }
    }
}

impl Classifier for Model {
    fn classes(&self) -> &ClassMap {
        match self {
            Model::NaiveBayes(m) => m.classes(),
            Model::Svm(m) => m.classes(),
        }
    }

    fn scores(&self, x: &FeatureVector) -> Vec<f64> {
        match self {
            Model::NaiveBayes(m) => m.scores(x),
            Model::Svm(m) => m.scores(x),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn argmax_prefers_first_of_ties() {
        assert_eq!(argmax(&[-1.2, 0.4, -0.3]), 1);
        assert_eq!(argmax(&[0.4, 0.4]), 0);
        assert_eq!(argmax(&[1.0]), 0);
    }

    #[test]
    fn training_set_validation() {
        let s = |l| LabeledSample::new([0.0; 4], l);
        assert!(matches!(
            TrainingSet::from_samples(vec![s(0), s(0)]),
            Err(Error::TooFewClasses(1))
        ));
        assert!(matches!(
            TrainingSet::from_samples(vec![]),
            Err(Error::TooFewClasses(0))
        ));
        let map = ClassMap::from_ids([0, 1, 2]).unwrap();
        assert!(matches!(
            TrainingSet::new(vec![s(0), s(1)], map.clone()),
            Err(Error::EmptyClass(2))
        ));
        assert!(matches!(
            TrainingSet::new(vec![s(0), s(5)], map),
            Err(Error::UnknownClass(5))
        ));
        assert!(TrainingSet::from_samples(vec![s(0), s(UNLABELED)]).is_err());
        let data = TrainingSet::from_samples(vec![s(3), s(1), s(3)]).unwrap();
        assert_eq!(data.class_counts(), vec![(1, 1), (3, 2)]);
    }
}
