//! End-to-end helpers: image to feature table, and image to per-window classes.

use crate::classifiers::Classifier;
use crate::glcm::{extract_batch, FeatureRow, FeatureTable, OffsetSpec};
use crate::imaging::{
    tile_windows, ClassId, GrayImage, LabelRaster, QuantizedImage, WindowSpec, UNLABELED,
};
use crate::par::{self, Execution};
use crate::{Error, Result};

pub const DEFAULT_LEVELS: u16 = 8;
pub const DEFAULT_WINDOW: u32 = 50;
pub const DEFAULT_PURITY: f64 = 0.6;

#[derive(Debug, Clone, PartialEq)]
pub struct ExtractConfig {
    /// Window sizes; rows are emitted size by size, row-major within a size.
    pub windows: Vec<u32>,
    pub levels: u16,
    pub offset: OffsetSpec,
    /// Minimum share of a window's pixels the modal class must cover.
    pub purity: f64,
    /// Keep windows that fail the purity test, labelled `UNLABELED`.
    pub keep_unlabeled: bool,
}

impl Default for ExtractConfig {
    fn default() -> Self {
        Self {
            windows: vec![DEFAULT_WINDOW],
            levels: DEFAULT_LEVELS,
            offset: OffsetSpec::default(),
            purity: DEFAULT_PURITY,
            keep_unlabeled: false,
        }
    }
}

impl ExtractConfig {
    pub fn validate(&self) -> Result<()> {
        if self.windows.is_empty() {
            return Err(Error::InvalidArgument("no window size given".into()));
        }
        if let Some(&bad) = self.windows.iter().find(|&&s| s < 2) {
            return Err(Error::InvalidArgument(format!(
                "window size {bad} must be at least 2"
            )));
        }
        if !(2..=256).contains(&self.levels) {
            return Err(Error::InvalidArgument(format!(
                "levels {} outside 2..=256",
                self.levels
            )));
        }
        if self.offset.distance == 0 {
            return Err(Error::InvalidArgument(
                "offset distance must be at least 1".into(),
            ));
        }
        if !(self.purity > 0.0 && self.purity <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "purity {} outside (0, 1]",
                self.purity
            )));
        }
        Ok(())
    }
}

/// Quantizes, tiles and extracts features. With a label raster every row
/// carries the window's label and windows below the purity threshold are
/// dropped (or kept as `UNLABELED` when requested).
pub fn extract_table(
    gray: &GrayImage,
    labels: Option<&LabelRaster>,
    cfg: &ExtractConfig,
    exec: Execution,
) -> Result<FeatureTable> {
    cfg.validate()?;
    if let Some(l) = labels {
        l.check_matches(gray.width(), gray.height())?;
    }
    let img = gray.quantize(cfg.levels)?;
    let mut rows = Vec::new();
    for &size in &cfg.windows {
        let windows = tile_windows(img.width(), img.height(), size)?;
        let features = extract_batch(&img, &windows, cfg.offset, exec)?;
        for (window, features) in windows.into_iter().zip(features) {
            let label = labels.map(|l| l.window_label(window, cfg.purity).unwrap_or(UNLABELED));
            if label == Some(UNLABELED) && !cfg.keep_unlabeled {
                continue;
            }
            rows.push(FeatureRow {
                window,
                features,
                label,
            });
        }
    }
    Ok(FeatureTable {
        labeled: labels.is_some(),
        rows,
    })
}

/// Predicted class of every `size`-pixel tile.
pub fn classify_windows<M: Classifier + Sync>(
    model: &M,
    img: &QuantizedImage,
    size: u32,
    offset: OffsetSpec,
    exec: Execution,
) -> Result<(Vec<WindowSpec>, Vec<ClassId>)> {
    let windows = tile_windows(img.width(), img.height(), size)?;
    let features = extract_batch(img, &windows, offset, exec)?;
    let preds = par::map_slice(&features, exec, |f| model.predict(f));
    Ok((windows, preds))
}
