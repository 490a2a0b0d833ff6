//! Gray-level co-occurrence matrices and the four texture statistics
//! derived from them.

mod features;
mod table;

pub use features::{FeatureVector, FEATURE_COUNT, FEATURE_NAMES};
pub use table::{FeatureRow, FeatureTable};

use std::fmt;
use std::str::FromStr;

use crate::imaging::{QuantizedImage, WindowSpec};
use crate::par::{self, Execution};
use crate::{Error, Result};

/// Pixel-pair direction. Image rows grow downward, so 90° points up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Direction {
    #[default]
    Deg0,
    Deg45,
    Deg90,
    Deg135,
}

impl Direction {
    pub const ALL: [Direction; 4] = [
        Direction::Deg0,
        Direction::Deg45,
        Direction::Deg90,
        Direction::Deg135,
    ];

    /// Unit `(dx, dy)` step.
    pub fn unit_step(self) -> (i32, i32) {
        match self {
            Direction::Deg0 => (1, 0),
            Direction::Deg45 => (1, -1),
            Direction::Deg90 => (0, -1),
            Direction::Deg135 => (-1, -1),
        }
    }

    pub fn degrees(self) -> u32 {
        match self {
            Direction::Deg0 => 0,
            Direction::Deg45 => 45,
            Direction::Deg90 => 90,
            Direction::Deg135 => 135,
        }
    }

    pub fn from_degrees(deg: u32) -> Result<Self> {
        match deg {
            0 => Ok(Direction::Deg0),
            45 => Ok(Direction::Deg45),
            90 => Ok(Direction::Deg90),
            135 => Ok(Direction::Deg135),
            other => Err(Error::InvalidArgument(format!(
                "direction {other} is not one of 0, 45, 90, 135"
            ))),
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.degrees())
    }
}

impl FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let deg = s
            .trim()
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("direction {s:?} is not a number")))?;
        Self::from_degrees(deg)
    }
}

/// Which pixel pairs a GLCM counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OffsetSpec {
    pub distance: u32,
    pub direction: Direction,
    /// Accumulate all four directions instead of `direction` alone.
    pub average_directions: bool,
    /// Add the transpose so `(i, j)` and `(j, i)` count alike.
    pub symmetric: bool,
}

impl Default for OffsetSpec {
    fn default() -> Self {
        Self {
            distance: 1,
            direction: Direction::Deg0,
            average_directions: false,
            symmetric: true,
        }
    }
}

impl OffsetSpec {
    pub fn new(distance: u32, direction: Direction) -> Result<Self> {
        if distance == 0 {
            return Err(Error::InvalidArgument(
                "offset distance must be at least 1".into(),
            ));
        }
        Ok(Self {
            distance,
            direction,
            ..Self::default()
        })
    }

    pub fn symmetric(mut self, on: bool) -> Self {
        self.symmetric = on;
        self
    }

    pub fn average_directions(mut self, on: bool) -> Self {
        self.average_directions = on;
        self
    }

    fn steps(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
        let dirs: &[Direction] = if self.average_directions {
            &Direction::ALL
        } else {
            std::slice::from_ref(&self.direction)
        };
        let d = self.distance as i64;
        dirs.iter().map(move |dir| {
            let (dx, dy) = dir.unit_step();
            (dx as i64 * d, dy as i64 * d)
        })
    }
}

/// Raw co-occurrence counts, row-major `levels x levels`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Glcm {
    levels: u16,
    counts: Vec<u64>,
    offset: OffsetSpec,
}

impl Glcm {
    /// Wraps precomputed counts. `counts.len()` must be `levels²`.
    pub fn from_counts(levels: u16, counts: Vec<u64>, offset: OffsetSpec) -> Result<Self> {
        if counts.len() != levels as usize * levels as usize {
            return Err(Error::DimensionMismatch(format!(
                "{} counts for {levels} levels",
                counts.len()
            )));
        }
        Ok(Self {
            levels,
            counts,
            offset,
        })
    }

    pub fn levels(&self) -> u16 {
        self.levels
    }

    pub fn offset(&self) -> OffsetSpec {
        self.offset
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.counts[i * self.levels as usize + j]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn is_symmetric(&self) -> bool {
        let g = self.levels as usize;
        (0..g).all(|i| (i + 1..g).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn normalize(&self) -> Result<NormalizedGlcm> {
        let total = self.total();
        if total == 0 {
            return Err(Error::EmptyGlcm);
        }
        let total = total as f64;
        Ok(NormalizedGlcm {
            levels: self.levels,
            p: self.counts.iter().map(|&c| c as f64 / total).collect(),
            offset: self.offset,
        })
    }
}

/// Neumaier-compensated running sum; large matrices have up to 65536 cells.
#[derive(Default, Clone, Copy)]
struct Sum {
    total: f64,
    carry: f64,
}

impl Sum {
    fn add(self, v: f64) -> Self {
        let t = self.total + v;
        let carry = if self.total.abs() >= v.abs() {
            self.carry + ((self.total - t) + v)
        } else {
            self.carry + ((v - t) + self.total)
        };
        Self { total: t, carry }
    }

    fn value(self) -> f64 {
        self.total + self.carry
    }
}

/// Co-occurrence probabilities; entries are non-negative and sum to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedGlcm {
    levels: u16,
    p: Vec<f64>,
    offset: OffsetSpec,
}

impl NormalizedGlcm {
    pub fn levels(&self) -> u16 {
        self.levels
    }

    pub fn offset(&self) -> OffsetSpec {
        self.offset
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.p
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.p[i * self.levels as usize + j]
    }

    fn cells(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let g = self.levels as usize;
        self.p
            .iter()
            .enumerate()
            .map(move |(k, &p)| (k / g, k % g, p))
    }

    /// Inverse difference moment: `Σ p(i,j) / (1 + (i-j)²)`.
    pub fn homogeneity(&self) -> f64 {
        self.cells()
            .map(|(i, j, p)| {
                let d = i as f64 - j as f64;
                p / (1.0 + d * d)
            })
            .fold(Sum::default(), Sum::add)
            .value()
    }

    /// `Σ (i-j)² p(i,j)`.
    pub fn contrast(&self) -> f64 {
        self.cells()
            .map(|(i, j, p)| {
                let d = i as f64 - j as f64;
                d * d * p
            })
            .fold(Sum::default(), Sum::add)
            .value()
    }

    /// Angular second moment, `Σ p(i,j)²`.
    pub fn energy(&self) -> f64 {
        self.p
            .iter()
            .map(|p| p * p)
            .fold(Sum::default(), Sum::add)
            .value()
    }

    /// `-Σ p ln p` in nats, with `0 ln 0 = 0`.
    pub fn entropy(&self) -> f64 {
        -self
            .p
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| p * p.ln())
            .fold(Sum::default(), Sum::add)
            .value()
    }

    pub fn features(&self) -> FeatureVector {
        FeatureVector {
            homogeneity: self.homogeneity(),
            contrast: self.contrast(),
            energy: self.energy(),
            entropy: self.entropy(),
        }
    }
}

/// Counts ordered pixel pairs `(p, p + Δ)` with both ends inside the window.
pub fn compute_glcm(img: &QuantizedImage, w: WindowSpec, off: OffsetSpec) -> Result<Glcm> {
    if !w.fits(img.width(), img.height()) {
        return Err(Error::InvalidArgument(format!(
            "window {}x{} at ({},{}) outside {}x{} image",
            w.size,
            w.size,
            w.x,
            w.y,
            img.width(),
            img.height()
        )));
    }
    if off.distance == 0 {
        return Err(Error::InvalidArgument(
            "offset distance must be at least 1".into(),
        ));
    }
    // Every canonical step moves at most `distance` along each axis.
    if off.distance >= w.size {
        return Err(Error::WindowTooSmall {
            x: w.x,
            y: w.y,
            size: w.size,
            distance: off.distance,
        });
    }

    let g = img.levels() as usize;
    let mut counts = vec![0u64; g * g];
    let size = w.size as i64;
    for (dx, dy) in off.steps() {
        let (x0, x1) = (0.max(-dx), size - 0.max(dx));
        let (y0, y1) = (0.max(-dy), size - 0.max(dy));
        for y in y0..y1 {
            let from_row = img.row((w.y as i64 + y) as u32);
            let to_row = img.row((w.y as i64 + y + dy) as u32);
            let from = &from_row[(w.x as i64 + x0) as usize..(w.x as i64 + x1) as usize];
            let to = &to_row[(w.x as i64 + x0 + dx) as usize..(w.x as i64 + x1 + dx) as usize];
            for (&a, &b) in from.iter().zip(to) {
                counts[a as usize * g + b as usize] += 1;
            }
        }
    }

    if off.symmetric {
        for i in 0..g {
            for j in i..g {
                let sum = counts[i * g + j] + counts[j * g + i];
                counts[i * g + j] = sum;
                counts[j * g + i] = sum;
            }
        }
    }
    Ok(Glcm {
        levels: img.levels(),
        counts,
        offset: off,
    })
}

/// GLCM, normalization and the four statistics for one window.
pub fn extract_features(
    img: &QuantizedImage,
    w: WindowSpec,
    off: OffsetSpec,
) -> Result<FeatureVector> {
    Ok(compute_glcm(img, w, off)?.normalize()?.features())
}

/// [`extract_features`] over many windows. Output order follows `windows`
/// and does not depend on `exec` or the worker count.
pub fn extract_batch(
    img: &QuantizedImage,
    windows: &[WindowSpec],
    off: OffsetSpec,
    exec: Execution,
) -> Result<Vec<FeatureVector>> {
    par::map_slice(windows, exec, |&w| extract_features(img, w, off))
        .into_iter()
        .collect()
}
