use std::fmt;

pub const FEATURE_COUNT: usize = 4;

/// Column order used everywhere features are serialized.
pub const FEATURE_NAMES: [&str; FEATURE_COUNT] = ["homogeneity", "contrast", "energy", "entropy"];

/// The four texture statistics of one window.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FeatureVector {
    pub homogeneity: f64,
    pub contrast: f64,
    pub energy: f64,
    /// Nats.
    pub entropy: f64,
}

impl FeatureVector {
    pub fn to_array(self) -> [f64; FEATURE_COUNT] {
        [self.homogeneity, self.contrast, self.energy, self.entropy]
    }

    pub fn from_array([homogeneity, contrast, energy, entropy]: [f64; FEATURE_COUNT]) -> Self {
        Self {
            homogeneity,
            contrast,
            energy,
            entropy,
        }
    }
}

impl From<[f64; FEATURE_COUNT]> for FeatureVector {
    fn from(a: [f64; FEATURE_COUNT]) -> Self {
        Self::from_array(a)
    }
}

impl From<FeatureVector> for [f64; FEATURE_COUNT] {
    fn from(f: FeatureVector) -> Self {
        f.to_array()
    }
}

impl fmt::Display for FeatureVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "(homogeneity {:.4}, contrast {:.4}, energy {:.4}, entropy {:.4})",
            self.homogeneity, self.contrast, self.energy, self.entropy
        )
    }
}
