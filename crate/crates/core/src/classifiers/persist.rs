//! Versioned line-oriented model files.
//!
//! ```text
//! texturemap-model v1 <nb|svm>
//! levels <G>
//! window <size>
//! offset <distance> <direction> <symmetric 0|1> <average 0|1>
//! features homogeneity,contrast,energy,entropy
//! classes <K>
//! <id> <name>                      (K lines)
//! ```
//!
//! Naive Bayes then lists, per class, `prior <p>`, `mean <4 reals>` and
//! `variance <4 reals>`. The SVM lists `standardizer_mean`,
//! `standardizer_std`, `kernel linear` or `kernel rbf <gamma>`, and per class
//! a `C b n_sv` line followed by `n_sv` rows `coef f1 f2 f3 f4` holding
//! standardized support samples. Reals use 17 significant digits.

use std::fmt::Write as _;
use std::path::Path;

use super::{BinaryProblem, Features, Kernel, Model, NbModel, Standardizer, SvmModel};
use crate::fmt::exact;
use crate::glcm::{Direction, OffsetSpec, FEATURE_COUNT, FEATURE_NAMES};
use crate::imaging::ClassMap;
use crate::{Error, Result};

pub const MODEL_MAGIC: &str = "texturemap-model";
const VERSION: &str = "v1";

/// Feature-extraction settings a model was trained under.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelMeta {
    pub levels: u16,
    pub window: u32,
    pub offset: OffsetSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PersistedModel {
    pub meta: ModelMeta,
    pub model: Model,
}

fn reals(values: &[f64]) -> String {
    values
        .iter()
        .map(|&v| exact(v))
        .collect::<Vec<_>>()
        .join(" ")
}

impl PersistedModel {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let m = &self.meta;
        let classes = match &self.model {
            Model::NaiveBayes(nb) => nb.classes(),
            Model::Svm(svm) => svm.classes(),
        };
        // Writing into a String cannot fail.
        let _ = writeln!(out, "{MODEL_MAGIC} {VERSION} {}", self.model.kind());
        let _ = writeln!(out, "levels {}", m.levels);
        let _ = writeln!(out, "window {}", m.window);
        let _ = writeln!(
            out,
            "offset {} {} {} {}",
            m.offset.distance,
            m.offset.direction.degrees(),
            m.offset.symmetric as u8,
            m.offset.average_directions as u8
        );
        let _ = writeln!(out, "features {}", FEATURE_NAMES.join(","));
        let _ = writeln!(out, "classes {}", classes.len());
        for (id, name) in classes.entries() {
            let _ = writeln!(out, "{id} {name}");
        }
        match &self.model {
            Model::NaiveBayes(nb) => {
                for c in 0..nb.priors.len() {
                    let _ = writeln!(out, "prior {}", exact(nb.priors[c]));
                    let _ = writeln!(out, "mean {}", reals(&nb.means[c]));
                    let _ = writeln!(out, "variance {}", reals(&nb.variances[c]));
                }
            }
            Model::Svm(svm) => {
                let _ = writeln!(out, "standardizer_mean {}", reals(svm.standardizer.mean()));
                let _ = writeln!(out, "standardizer_std {}", reals(svm.standardizer.std()));
                match svm.kernel {
                    Kernel::Linear => out.push_str("kernel linear\n"),
                    Kernel::Rbf { gamma } => {
                        let _ = writeln!(out, "kernel rbf {}", exact(gamma));
                    }
                }
                for p in &svm.problems {
                    let _ = writeln!(out, "{} {} {}", exact(p.c), exact(p.bias), p.support.len());
                    for (s, coef) in p.support.iter().zip(&p.coef) {
                        let _ = writeln!(out, "{} {}", exact(*coef), reals(s));
                    }
                }
            }
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|source| Error::Unwritable {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Unreadable {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = Lines::new(text);

        let header = lines.next_fields()?;
        if header.len() != 3 || header[0] != MODEL_MAGIC {
            return Err(lines.error("not a texturemap model file"));
        }
        if header[1] != VERSION {
            return Err(lines.error(format!("unsupported model version {}", header[1])));
        }
        let kind = header[2];

        let levels = lines.keyed("levels", 1)?[0];
        let levels: u16 = lines.int(levels)?;
        let window = lines.keyed("window", 1)?[0];
        let window: u32 = lines.int(window)?;
        let off = lines.keyed("offset", 4)?;
        let offset = OffsetSpec {
            distance: lines.int(off[0])?,
            direction: Direction::from_degrees(lines.int(off[1])?)
                .map_err(|e| lines.error(e.to_string()))?,
            symmetric: lines.flag(off[2])?,
            average_directions: lines.flag(off[3])?,
        };
        let features = lines.keyed("features", 1)?[0];
        if features != FEATURE_NAMES.join(",") {
            return Err(lines.error(format!(
                "feature order {features} does not match this build"
            )));
        }
        let class_count: usize = {
            let f = lines.keyed("classes", 1)?[0];
            lines.int(f)?
        };
        let mut entries = Vec::with_capacity(class_count);
        for _ in 0..class_count {
            let f = lines.next_fields()?;
            if f.len() != 2 {
                return Err(lines.error("expected `<id> <name>`"));
            }
            entries.push((lines.int(f[0])?, f[1].to_string()));
        }
        let classes = ClassMap::new(entries).map_err(|e| lines.error(e.to_string()))?;

        let model = match kind {
            "nb" => {
                let mut priors = Vec::new();
                let mut means = Vec::new();
                let mut variances = Vec::new();
                for _ in 0..class_count {
                    let prior = lines.keyed("prior", 1)?;
                    priors.push(lines.real(prior[0])?);
                    means.push(lines.features("mean")?);
                    variances.push(lines.features("variance")?);
                }
                if variances.iter().flatten().any(|&v| v <= 0.0) {
                    return Err(lines.error("variances must be positive"));
                }
                Model::NaiveBayes(NbModel {
                    classes,
                    priors,
                    means,
                    variances,
                })
            }
            "svm" => {
                let mean = lines.features("standardizer_mean")?;
                let std = lines.features("standardizer_std")?;
                let kernel_fields = lines.next_fields()?;
                let kernel = match kernel_fields.as_slice() {
                    ["kernel", "linear"] => Kernel::Linear,
                    ["kernel", "rbf", gamma] => Kernel::Rbf {
                        gamma: lines.real(gamma)?,
                    },
                    _ => {
                        return Err(lines.error("expected `kernel linear` or `kernel rbf <gamma>`"))
                    }
                };
                let mut problems = Vec::with_capacity(class_count);
                for (id, _) in classes.entries() {
                    let f = lines.next_fields()?;
                    if f.len() != 3 {
                        return Err(lines.error("expected `C b n_sv`"));
                    }
                    let (c, bias, n_sv): (f64, f64, usize) =
                        (lines.real(f[0])?, lines.real(f[1])?, lines.int(f[2])?);
                    let mut support = Vec::with_capacity(n_sv);
                    let mut coef = Vec::with_capacity(n_sv);
                    for _ in 0..n_sv {
                        let row = lines.next_fields()?;
                        if row.len() != 1 + FEATURE_COUNT {
                            return Err(lines.error("expected `coef f1 f2 f3 f4`"));
                        }
                        coef.push(lines.real(row[0])?);
                        let mut s = [0.0; FEATURE_COUNT];
                        for (slot, v) in s.iter_mut().zip(&row[1..]) {
                            *slot = lines.real(v)?;
                        }
                        support.push(s);
                    }
                    problems.push(BinaryProblem {
                        class: *id,
                        c,
                        bias,
                        support,
                        coef,
                        converged: true,
                        sweeps: 0,
                    });
                }
                Model::Svm(SvmModel {
                    classes,
                    standardizer: Standardizer::from_parts(mean, std),
                    kernel,
                    problems,
                })
            }
            other => return Err(lines.error(format!("unknown model kind {other:?}"))),
        };
        if let Ok(extra) = lines.next_fields() {
            return Err(lines.error(format!("unexpected trailing content {:?}", extra.join(" "))));
        }
        Ok(Self {
            meta: ModelMeta {
                levels,
                window,
                offset,
            },
            model,
        })
    }
}

struct Lines<'a> {
    iter: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            iter: text.lines().enumerate(),
            line: 0,
        }
    }

    fn error(&self, message: impl Into<String>) -> Error {
        Error::parse(self.line, message)
    }

    fn next_fields(&mut self) -> Result<Vec<&'a str>> {
        for (n, line) in self.iter.by_ref() {
            self.line = n + 1;
            let fields: Vec<&str> = line.split_whitespace().collect();
            if !fields.is_empty() {
                return Ok(fields);
            }
        }
        Err(Error::parse(self.line + 1, "unexpected end of model file"))
    }

    fn keyed(&mut self, key: &str, count: usize) -> Result<Vec<&'a str>> {
        let fields = self.next_fields()?;
        if fields[0] != key || fields.len() != count + 1 {
            return Err(self.error(format!("expected `{key}` with {count} value(s)")));
        }
        Ok(fields[1..].to_vec())
    }

    fn int<T: std::str::FromStr>(&self, s: &str) -> Result<T> {
        s.parse()
            .map_err(|_| self.error(format!("bad integer {s:?}")))
    }

    fn real(&self, s: &str) -> Result<f64> {
        s.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| self.error(format!("bad number {s:?}")))
    }

    fn flag(&self, s: &str) -> Result<bool> {
        match s {
            "0" => Ok(false),
            "1" => Ok(true),
            _ => Err(self.error(format!("bad flag {s:?}"))),
        }
    }

    fn features(&mut self, key: &str) -> Result<Features> {
        let fields = self.keyed(key, FEATURE_COUNT)?;
        let mut out = [0.0; FEATURE_COUNT];
        for (slot, s) in out.iter_mut().zip(fields) {
            *slot = self.real(s)?;
        }
        Ok(out)
    }
}
