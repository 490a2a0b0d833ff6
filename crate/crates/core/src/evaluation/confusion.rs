use std::fmt::Write as _;

use crate::fmt::sig;
use crate::imaging::{ClassId, ClassMap};
use crate::{Error, Result};

/// Rows are truth, columns are prediction, both in class-map order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    classes: ClassMap,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn new(classes: ClassMap) -> Self {
        let k = classes.len();
        Self {
            classes,
            counts: vec![0; k * k],
        }
    }

    pub fn classes(&self) -> &ClassMap {
        &self.classes
    }

    pub fn record(&mut self, truth: ClassId, pred: ClassId) -> Result<()> {
        let t = self
            .classes
            .index_of(truth)
            .ok_or(Error::UnknownClass(truth))?;
        let p = self
            .classes
            .index_of(pred)
            .ok_or(Error::UnknownClass(pred))?;
        self.counts[t * self.classes.len() + p] += 1;
        Ok(())
    }

    /// Count at class-map positions `(truth, pred)`.
    pub fn get(&self, truth: usize, pred: usize) -> u64 {
        self.counts[truth * self.classes.len() + pred]
    }

    pub fn row(&self, truth: usize) -> &[u64] {
        let k = self.classes.len();
        &self.counts[truth * k..(truth + 1) * k]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn correct(&self) -> u64 {
        (0..self.classes.len()).map(|i| self.get(i, i)).sum()
    }

    /// `trace / total`; zero for an empty matrix.
    pub fn accuracy(&self) -> f64 {
        match self.total() {
            0 => 0.0,
            total => self.correct() as f64 / total as f64,
        }
    }

    /// `None` when nothing was predicted as this class.
    pub fn precision(&self, class: usize) -> Option<f64> {
        let predicted: u64 = (0..self.classes.len()).map(|t| self.get(t, class)).sum();
        (predicted > 0).then(|| self.get(class, class) as f64 / predicted as f64)
    }

    /// `None` when the class never occurs in the truth.
    pub fn recall(&self, class: usize) -> Option<f64> {
        let actual: u64 = self.row(class).iter().sum();
        (actual > 0).then(|| self.get(class, class) as f64 / actual as f64)
    }

    pub fn merge(&mut self, other: &ConfusionMatrix) -> Result<()> {
        if self.classes != other.classes {
            return Err(Error::DimensionMismatch(
                "confusion matrices over different classes".into(),
            ));
        }
        self.counts
            .iter_mut()
            .zip(&other.counts)
            .for_each(|(a, b)| *a += b);
        Ok(())
    }

    /// Human-readable summary: accuracy, per-class precision/recall, matrix.
    pub fn to_text(&self) -> String {
        let opt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |v| format!("{v:.4}"));
        let mut out = String::new();
        let _ = writeln!(
            out,
            "accuracy {:.4} ({}/{})",
            self.accuracy(),
            self.correct(),
            self.total()
        );
        let _ = writeln!(
            out,
            "{:>4}  {:<16} {:>9} {:>9} {:>7}",
            "id", "class", "precision", "recall", "support"
        );
        for (i, (id, name)) in self.classes.entries().iter().enumerate() {
            let support: u64 = self.row(i).iter().sum();
            let _ = writeln!(
                out,
                "{id:>4}  {name:<16} {:>9} {:>9} {support:>7}",
                opt(self.precision(i)),
                opt(self.recall(i))
            );
        }
        let _ = writeln!(out, "confusion (rows truth, columns prediction)");
        let header: Vec<String> = self.classes.ids().map(|id| format!("{id:>7}")).collect();
        let _ = writeln!(out, "{:>4}  {}", "", header.join(""));
        for (i, id) in self.classes.ids().enumerate() {
            let cells: Vec<String> = self.row(i).iter().map(|c| format!("{c:>7}")).collect();
            let _ = writeln!(out, "{id:>4}  {}", cells.join(""));
        }
        out
    }

    /// Machine-readable form: `accuracy`, then `class` and `confusion` rows.
    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map_or_else(String::new, |v| sig(v, 9));
        let mut out = String::new();
        let _ = writeln!(out, "accuracy,{}", sig(self.accuracy(), 9));
        let _ = writeln!(out, "class,id,name,precision,recall,support");
        for (i, (id, name)) in self.classes.entries().iter().enumerate() {
            let support: u64 = self.row(i).iter().sum();
            let _ = writeln!(
                out,
                "class,{id},{name},{},{},{support}",
                opt(self.precision(i)),
                opt(self.recall(i))
            );
        }
        let ids: Vec<String> = self.classes.ids().map(|id| id.to_string()).collect();
        let _ = writeln!(out, "confusion,truth\\pred,{}", ids.join(","));
        for (i, id) in self.classes.ids().enumerate() {
            let cells: Vec<String> = self.row(i).iter().map(u64::to_string).collect();
            let _ = writeln!(out, "confusion,{id},{}", cells.join(","));
        }
        out
    }
}

pub fn confusion_matrix(
    truth: &[ClassId],
    pred: &[ClassId],
    classes: &ClassMap,
) -> Result<ConfusionMatrix> {
    if truth.len() != pred.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} truths vs {} predictions",
            truth.len(),
            pred.len()
        )));
    }
    let mut m = ConfusionMatrix::new(classes.clone());
    for (&t, &p) in truth.iter().zip(pred) {
        m.record(t, p)?;
    }
    Ok(m)
}
