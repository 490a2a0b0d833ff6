//! Texture-based land-cover classification of grayscale imagery.
//!
//! The pipeline cuts an image into square windows, builds a gray-level
//! co-occurrence matrix (GLCM) per window, reduces it to four Haralick
//! statistics (homogeneity, contrast, energy, entropy) and classifies each
//! window with Gaussian naive Bayes or a one-vs-rest kernel SVM trained by
//! sequential minimal optimization.
//!
//! Window-level work is data parallel. With the default `parallel` feature
//! the batch entry points fan out over rayon; without it they run the same
//! code sequentially and produce identical output.

pub mod classifiers;
pub mod error;
pub mod evaluation;
pub mod fmt;
pub mod glcm;
pub mod imaging;
pub mod par;
pub mod pipeline;
pub mod synth;

pub use error::{Error, Result};

pub use glcm::{Direction, FeatureVector, Glcm, NormalizedGlcm, OffsetSpec};
pub use imaging::{
    ClassId, ClassMap, GrayImage, Image, LabelRaster, QuantizedImage, RgbImage, WindowSpec,
    UNLABELED,
};
pub use par::Execution;
