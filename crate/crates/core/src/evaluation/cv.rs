use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::ConfusionMatrix;
use crate::classifiers::{Classifier, ClassifierSpec, TrainingSet};
use crate::par::{self, Execution};
use crate::{Error, Result};

/// Stratified assignment of every sample to one of `k` folds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    k: usize,
    seed: u64,
    assignment: Vec<usize>,
}

impl FoldPlan {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Fold index of each sample.
    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    /// `(train, test)` sample indices for `fold`.
    pub fn split(&self, fold: usize) -> (Vec<usize>, Vec<usize>) {
        (0..self.assignment.len()).partition(|&i| self.assignment[i] != fold)
    }
}

/// Shuffles each class with a seeded RNG and deals its samples round-robin,
/// continuing the deal across classes so fold sizes stay balanced. Per-fold
/// counts of any class differ by at most one.
pub fn kfold_split(data: &TrainingSet, k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 folds, got {k}"
        )));
    }
    for (class, count) in data.class_counts() {
        if count < k {
            return Err(Error::ClassTooSmall {
                class,
                count,
                folds: k,
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![0; data.len()];
    let mut next = 0;
    for class in data.classes().ids() {
        let mut members: Vec<usize> = (0..data.len())
            .filter(|&i| data.samples()[i].label == class)
            .collect();
        members.shuffle(&mut rng);
        for i in members {
            assignment[i] = next % k;
            next += 1;
        }
    }
    Ok(FoldPlan {
        k,
        seed,
        assignment,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvResult {
    /// Correct held-out predictions over all held-out predictions.
    pub accuracy: f64,
    pub confusion: ConfusionMatrix,
    pub fold_accuracy: Vec<f64>,
    /// SVM problems that hit their sweep budget, summed over folds.
    pub unconverged: usize,
}

/// Trains on `k - 1` folds and predicts the held-out one, for every fold.
/// Folds run on the current pool; results do not depend on worker count.
pub fn cross_validate(
    data: &TrainingSet,
    spec: &ClassifierSpec,
    k: usize,
    seed: u64,
    exec: Execution,
) -> Result<CvResult> {
    let plan = kfold_split(data, k, seed)?;
    let folds = par::map_range(k, exec, |fold| -> Result<(ConfusionMatrix, usize)> {
        let (train, test) = plan.split(fold);
        let model = spec.fit(&data.subset(&train)?)?;
        let unconverged = match &model {
            crate::classifiers::Model::Svm(m) => {
                m.problems().iter().filter(|p| !p.converged()).count()
            }
            _ => 0,
        };
        let mut confusion = ConfusionMatrix::new(data.classes().clone());
        for &i in &test {
            let s = &data.samples()[i];
            confusion.record(s.label, model.predict(&s.features))?;
        }
        Ok((confusion, unconverged))
    });

    let mut confusion = ConfusionMatrix::new(data.classes().clone());
    let mut fold_accuracy = Vec::with_capacity(k);
    let mut unconverged = 0;
    for fold in folds {
        let (m, u) = fold?;
        fold_accuracy.push(m.accuracy());
        confusion.merge(&m)?;
        unconverged += u;
    }
    Ok(CvResult {
        accuracy: confusion.accuracy(),
        confusion,
        fold_accuracy,
        unconverged,
    })
}
