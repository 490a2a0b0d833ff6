//! Text feature tables: a header line, then one
//! `origin_x,origin_y,size,homogeneity,contrast,energy,entropy[,label]`
//! row per window with 9 significant digits.

use std::io::Write;
use std::path::Path;

use super::{FeatureVector, FEATURE_COUNT, FEATURE_NAMES};
use crate::fmt::sig;
use crate::imaging::{ClassId, WindowSpec, UNLABELED};
use crate::{Error, Result};

const WINDOW_COLUMNS: [&str; 3] = ["origin_x", "origin_y", "size"];
const LABEL_COLUMN: &str = "label";

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub window: WindowSpec,
    pub features: FeatureVector,
    /// `Some(UNLABELED)` marks a kept-but-unlabeled row in a labeled table.
    pub label: Option<ClassId>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeatureTable {
    pub labeled: bool,
    pub rows: Vec<FeatureRow>,
}

impl FeatureTable {
    pub fn header(labeled: bool) -> String {
        let mut cols: Vec<&str> = WINDOW_COLUMNS.to_vec();
        cols.extend(FEATURE_NAMES);
        if labeled {
            cols.push(LABEL_COLUMN);
        }
        cols.join(",")
    }

    pub fn write_to(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "{}", Self::header(self.labeled))?;
        for row in &self.rows {
            let w = row.window;
            write!(out, "{},{},{}", w.x, w.y, w.size)?;
            for v in row.features.to_array() {
                write!(out, ",{}", sig(v, 9))?;
            }
            if self.labeled {
                write!(out, ",{}", row.label.unwrap_or(UNLABELED))?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|source| Error::Unwritable {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::parse(1, "empty feature table"))?;
        let labeled = if header.trim() == Self::header(true) {
            true
        } else if header.trim() == Self::header(false) {
            false
        } else {
            return Err(Error::parse(1, format!("unexpected header {header:?}")));
        };
        let width = 3 + FEATURE_COUNT + labeled as usize;

        let mut rows = Vec::new();
        for (n, line) in lines {
            let line_no = n + 1;
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != width {
                return Err(Error::parse(
                    line_no,
                    format!("expected {width} fields, got {}", fields.len()),
                ));
            }
            let int = |s: &str| {
                s.parse::<u32>()
                    .map_err(|_| Error::parse(line_no, format!("bad integer {s:?}")))
            };
            let real = |s: &str| {
                s.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::parse(line_no, format!("bad number {s:?}")))
            };
            let window = WindowSpec::new(int(fields[0])?, int(fields[1])?, int(fields[2])?);
            let mut features = [0.0; FEATURE_COUNT];
            for (slot, s) in features.iter_mut().zip(&fields[3..3 + FEATURE_COUNT]) {
                *slot = real(s)?;
            }
            let label = if labeled {
                let s = fields[3 + FEATURE_COUNT];
                Some(
                    s.parse::<ClassId>()
                        .map_err(|_| Error::parse(line_no, format!("bad label {s:?}")))?,
                )
            } else {
                None
            };
            rows.push(FeatureRow {
                window,
                features: features.into(),
                label,
            });
        }
        Ok(Self { labeled, rows })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Unreadable {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    /// Rows that carry a real class label.
    pub fn labeled_rows(&self) -> impl Iterator<Item = (&FeatureRow, ClassId)> {
        self.rows
            .iter()
            .filter_map(|r| r.label.filter(|&l| l != UNLABELED).map(|l| (r, l)))
    }
}
