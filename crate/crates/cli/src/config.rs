//! Run configuration: defaults, then a flat `key = value` file, then flags.

use std::collections::BTreeSet;
use std::path::Path;

use texturemap::classifiers::{ClassifierSpec, Kernel, SvmParams};
use texturemap::pipeline::{ExtractConfig, DEFAULT_LEVELS, DEFAULT_PURITY, DEFAULT_WINDOW};
use texturemap::{Direction, OffsetSpec};

pub const KEYS: &[&str] = &[
    "window",
    "levels",
    "distance",
    "direction",
    "symmetric",
    "avg_directions",
    "purity",
    "keep_unlabeled",
    "classifier",
    "c",
    "gamma",
    "kernel",
    "tol",
    "max_passes",
    "folds",
    "seed",
    "threads",
    "repeats",
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub windows: Vec<u32>,
    pub levels: u16,
    pub distance: u32,
    pub direction: Direction,
    pub symmetric: bool,
    pub avg_directions: bool,
    pub purity: f64,
    pub keep_unlabeled: bool,
    pub classifier: String,
    pub c: f64,
    pub gamma: f64,
    pub kernel: String,
    pub tol: f64,
    pub max_passes: usize,
    pub folds: usize,
    pub seed: u64,
    pub threads: usize,
    pub repeats: usize,
    /// Keys set by a config file or flag rather than left at their default.
    pub explicit: BTreeSet<&'static str>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let svm = SvmParams::default();
        Self {
            windows: vec![DEFAULT_WINDOW],
            levels: DEFAULT_LEVELS,
            distance: 1,
            direction: Direction::Deg0,
            symmetric: true,
            avg_directions: false,
            purity: DEFAULT_PURITY,
            keep_unlabeled: false,
            classifier: "nb".into(),
            c: svm.c,
            gamma: match Kernel::default() {
                Kernel::Rbf { gamma } => gamma,
                Kernel::Linear => 0.25,
            },
            kernel: "rbf".into(),
            tol: svm.tol,
            max_passes: svm.max_passes,
            folds: 5,
            seed: 42,
            threads: 0,
            repeats: 3,
            explicit: BTreeSet::new(),
        }
    }
}

fn parse_bool(v: &str) -> Result<bool, String> {
    match v {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(format!("expected true or false, got '{v}'")),
    }
}

fn parse_num<T: std::str::FromStr>(v: &str) -> Result<T, String> {
    v.parse().map_err(|_| format!("invalid number '{v}'"))
}

fn positive(v: f64) -> Result<f64, String> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("must be positive, got {v}"))
    }
}

impl RunConfig {
    /// Sets one key. Keys accept `-` or `_` separators and any case.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let norm = key.trim().to_ascii_lowercase().replace('-', "_");
        let Some(&key) = KEYS.iter().find(|k| **k == norm) else {
            return Err(format!("unknown setting '{}'", key.trim()));
        };
        let v = value.trim();
        let res = match key {
            "window" => v
                .split(',')
                .map(|s| match parse_num::<u32>(s.trim())? {
                    n if n >= 2 => Ok(n),
                    n => Err(format!("window size {n} must be at least 2")),
                })
                .collect::<Result<Vec<_>, _>>()
                .map(|w| self.windows = w),
            "levels" => match parse_num::<u16>(v)? {
                g @ 2..=256 => {
                    self.levels = g;
                    Ok(())
                }
                g => Err(format!("{g} outside 2..=256")),
            },
            "distance" => match parse_num::<u32>(v)? {
                0 => Err("must be at least 1".into()),
                d => {
                    self.distance = d;
                    Ok(())
                }
            },
            "direction" => v
                .parse()
                .map(|d| self.direction = d)
                .map_err(|e: texturemap::Error| e.to_string()),
            "symmetric" => parse_bool(v).map(|b| self.symmetric = b),
            "avg_directions" => parse_bool(v).map(|b| self.avg_directions = b),
            "purity" => match parse_num::<f64>(v)? {
                p if p > 0.0 && p <= 1.0 => {
                    self.purity = p;
                    Ok(())
                }
                p => Err(format!("{p} outside (0, 1]")),
            },
            "keep_unlabeled" => parse_bool(v).map(|b| self.keep_unlabeled = b),
            "classifier" => match v {
                "nb" | "svm" => {
                    self.classifier = v.into();
                    Ok(())
                }
                _ => Err(format!("expected nb or svm, got '{v}'")),
            },
            "c" => positive(parse_num(v)?).map(|c| self.c = c),
            "gamma" => positive(parse_num(v)?).map(|g| self.gamma = g),
            "kernel" => match v {
                "linear" | "rbf" => {
                    self.kernel = v.into();
                    Ok(())
                }
                _ => Err(format!("expected linear or rbf, got '{v}'")),
            },
            "tol" => positive(parse_num(v)?).map(|t| self.tol = t),
            "max_passes" => match parse_num::<usize>(v)? {
                0 => Err("must be at least 1".into()),
                n => {
                    self.max_passes = n;
                    Ok(())
                }
            },
            "folds" => match parse_num::<usize>(v)? {
                k if k >= 2 => {
                    self.folds = k;
                    Ok(())
                }
                k => Err(format!("{k} folds; need at least 2")),
            },
            "seed" => parse_num(v).map(|s| self.seed = s),
            "threads" => parse_num(v).map(|t| self.threads = t),
            "repeats" => match parse_num::<usize>(v)? {
                0 => Err("must be at least 1".into()),
                n => {
                    self.repeats = n;
                    Ok(())
                }
            },
            _ => unreachable!(),
        };
        res.map_err(|e| format!("{key}: {e}"))?;
        self.explicit.insert(key);
        Ok(())
    }

    /// Applies `key = value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str, origin: &str) -> Result<(), String> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| format!("{origin}:{}: expected key = value", n + 1))?;
            self.set(k, v)
                .map_err(|e| format!("{origin}:{}: {e}", n + 1))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        self.apply_text(&text, &path.display().to_string())
    }

    pub fn is_explicit(&self, key: &str) -> bool {
        self.explicit.contains(key)
    }

    pub fn offset(&self) -> OffsetSpec {
        OffsetSpec {
            distance: self.distance,
            direction: self.direction,
            average_directions: self.avg_directions,
            symmetric: self.symmetric,
        }
    }

    pub fn extract_config(&self) -> ExtractConfig {
        ExtractConfig {
            windows: self.windows.clone(),
            levels: self.levels,
            offset: self.offset(),
            purity: self.purity,
            keep_unlabeled: self.keep_unlabeled,
        }
    }

    pub fn classifier_spec(&self) -> ClassifierSpec {
        match self.classifier.as_str() {
            "svm" => ClassifierSpec::Svm(SvmParams {
                c: self.c,
                kernel: if self.kernel == "linear" {
                    Kernel::Linear
                } else {
                    Kernel::Rbf { gamma: self.gamma }
                },
                tol: self.tol,
                max_passes: self.max_passes,
            }),
            _ => ClassifierSpec::NaiveBayes,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_flags() {
        let mut cfg = RunConfig::default();
        cfg.apply_text(
            "# run\nwindow = 50,70\nlevels=16\nclassifier = svm # inline\nC = 10\n",
            "run.cfg",
        )
        .unwrap();
        cfg.set("levels", "8").unwrap();
        assert_eq!(cfg.windows, vec![50, 70]);
        assert_eq!(cfg.levels, 8);
        assert_eq!(cfg.c, 10.0);
        assert!(cfg.is_explicit("levels") && !cfg.is_explicit("distance"));
        assert!(matches!(cfg.classifier_spec(), ClassifierSpec::Svm(p) if p.c == 10.0));
    }

    #[test]
    fn rejects_bad_values() {
        let mut cfg = RunConfig::default();
        for (k, v) in [
            ("levels", "1"),
            ("levels", "300"),
            ("window", "50,1"),
            ("direction", "30"),
            ("purity", "0"),
            ("c", "-1"),
            ("folds", "1"),
            ("kernel", "poly"),
            ("colour", "red"),
        ] {
            assert!(cfg.set(k, v).is_err(), "{k}={v}");
        }
        assert!(cfg
            .apply_text("levels 8\n", "x")
            .unwrap_err()
            .contains("x:1"));
        assert_eq!(cfg, RunConfig::default());
    }

    #[test]
    fn spellings() {
        let mut cfg = RunConfig::default();
        cfg.set("avg-directions", "yes").unwrap();
        cfg.set("Keep_Unlabeled", "1").unwrap();
        cfg.set("direction", "135").unwrap();
        assert!(cfg.avg_directions && cfg.keep_unlabeled);
        assert_eq!(cfg.offset().direction, Direction::Deg135);
    }
}
