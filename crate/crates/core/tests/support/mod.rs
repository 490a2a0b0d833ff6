//! Independent reference implementations used as test oracles. Nothing here
//! calls into the library's GLCM or classifier code.
#![allow(dead_code)]

use rand::Rng;

/// Pixel displacement for an angle in degrees, image rows growing downward.
/// Diagonals move `distance` pixels along both axes.
pub fn displacement(distance: u32, degrees: u32) -> (i64, i64) {
    let rad = (degrees as f64).to_radians();
    let d = distance as i64;
    (d * rad.cos().round() as i64, -d * rad.sin().round() as i64)
}

/// Co-occurrence counts by checking every ordered pair of positions in the
/// window, `levels x levels` row-major.
pub fn brute_glcm(
    window: &[Vec<u8>],
    levels: usize,
    distance: u32,
    degrees: u32,
    symmetric: bool,
    average: bool,
) -> Vec<u64> {
    let h = window.len();
    let w = window[0].len();
    let mut counts = vec![0u64; levels * levels];
    let angles: Vec<u32> = if average {
        vec![0, 45, 90, 135]
    } else {
        vec![degrees]
    };
    let positions: Vec<(usize, usize)> = (0..h).flat_map(|y| (0..w).map(move |x| (x, y))).collect();
    for &deg in &angles {
        let (dx, dy) = displacement(distance, deg);
        for &(x1, y1) in &positions {
            for &(x2, y2) in &positions {
                if x2 as i64 - x1 as i64 == dx && y2 as i64 - y1 as i64 == dy {
                    let (a, b) = (window[y1][x1] as usize, window[y2][x2] as usize);
                    counts[a * levels + b] += 1;
                    if symmetric {
                        counts[b * levels + a] += 1;
                    }
                }
            }
        }
    }
    counts
}

/// (homogeneity, contrast, energy, entropy) straight from counts.
pub fn features_from_counts(counts: &[u64], levels: usize) -> [f64; 4] {
    let total: u64 = counts.iter().sum();
    let mut out = [0.0; 4];
    for i in 0..levels {
        for j in 0..levels {
            let c = counts[i * levels + j];
            if c == 0 {
                continue;
            }
            let p = c as f64 / total as f64;
            let diff = (i as f64 - j as f64).powi(2);
            out[0] += p / (1.0 + diff);
            out[1] += diff * p;
            out[2] += p * p;
            out[3] -= p * p.ln();
        }
    }
    out
}

pub fn random_window(rng: &mut impl Rng, max_side: usize, levels: usize) -> Vec<Vec<u8>> {
    let h = rng.gen_range(2..=max_side);
    let w = rng.gen_range(2..=max_side);
    (0..h)
        .map(|_| (0..w).map(|_| rng.gen_range(0..levels) as u8).collect())
        .collect()
}

/// Gaussian naive Bayes fitted and evaluated from scratch. Variances are
/// floored the same way the library documents.
pub struct NbOracle {
    classes: Vec<u8>,
    log_prior: Vec<f64>,
    mean: Vec<[f64; 4]>,
    var: Vec<[f64; 4]>,
}

impl NbOracle {
    pub fn fit(samples: &[([f64; 4], u8)]) -> Self {
        let mut classes: Vec<u8> = samples.iter().map(|s| s.1).collect();
        classes.sort_unstable();
        classes.dedup();
        let moments = |rows: &[[f64; 4]]| {
            let n = rows.len() as f64;
            let mut mean = [0.0; 4];
            let mut var = [0.0; 4];
            for f in 0..4 {
                mean[f] = rows.iter().map(|r| r[f]).sum::<f64>() / n;
                var[f] = rows.iter().map(|r| (r[f] - mean[f]).powi(2)).sum::<f64>() / n;
            }
            (mean, var)
        };
        let all: Vec<[f64; 4]> = samples.iter().map(|s| s.0).collect();
        let (_, global) = moments(&all);
        let floor = 1e-9 * global.iter().cloned().fold(0.0, f64::max) + 1e-12;
        let mut out = NbOracle {
            classes: classes.clone(),
            log_prior: vec![],
            mean: vec![],
            var: vec![],
        };
        for &c in &classes {
            let rows: Vec<[f64; 4]> = samples.iter().filter(|s| s.1 == c).map(|s| s.0).collect();
            let (m, mut v) = moments(&rows);
            v.iter_mut().for_each(|x| *x = x.max(floor));
            out.log_prior
                .push((rows.len() as f64 / samples.len() as f64).ln());
            out.mean.push(m);
            out.var.push(v);
        }
        out
    }

    /// Log posterior up to a class-independent constant.
    pub fn log_posterior(&self, x: &[f64; 4]) -> Vec<f64> {
        (0..self.classes.len())
            .map(|k| {
                let mut s = self.log_prior[k];
                for (f, &xf) in x.iter().enumerate() {
                    let v = self.var[k][f];
                    s -= 0.5 * v.ln() + (xf - self.mean[k][f]).powi(2) / (2.0 * v);
                }
                s
            })
            .collect()
    }

    pub fn predict(&self, x: &[f64; 4]) -> u8 {
        let post = self.log_posterior(x);
        let mut best = 0;
        for k in 1..post.len() {
            if post[k] > post[best] {
                best = k;
            }
        }
        self.classes[best]
    }
}

/// Random labelled feature rows: `classes` Gaussian clusters with random
/// centres and per-feature spreads, `per_class` rows each.
pub fn random_clusters(
    rng: &mut impl Rng,
    classes: u8,
    per_class: usize,
    spread: f64,
) -> Vec<([f64; 4], u8)> {
    let mut out = Vec::new();
    for c in 0..classes {
        let centre: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-5.0..5.0));
        let scale: [f64; 4] = std::array::from_fn(|_| rng.gen_range(0.2..1.0) * spread);
        for _ in 0..per_class {
            let x = std::array::from_fn(|f| centre[f] + scale[f] * gaussian(rng));
            out.push((x, c));
        }
    }
    out
}

/// Standard normal draw via Box-Muller.
pub fn gaussian(rng: &mut impl Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Dual feasibility and KKT conditions of every binary problem in a trained
/// SVM, checked against its own training rows. Reads the model only.
pub fn svm_kkt_violations(
    model: &texturemap::classifiers::SvmModel,
    rows: &[([f64; 4], u8)],
    tol: f64,
) -> Vec<String> {
    let mut bad = Vec::new();
    let z: Vec<[f64; 4]> = rows
        .iter()
        .map(|r| model.standardizer().apply(&r.0.into()))
        .collect();
    for p in model.problems() {
        let c = p.c();
        let sum: f64 = p.coefficients().iter().sum();
        if sum.abs() > 1e-6 {
            bad.push(format!("class {}: |sum alpha*y| = {sum:e}", p.class()));
        }
        for (i, zi) in z.iter().enumerate() {
            let y = if rows[i].1 == p.class() { 1.0 } else { -1.0 };
            let alpha = p
                .support()
                .iter()
                .position(|s| s == zi)
                .map(|k| p.coefficients()[k] * y)
                .unwrap_or(0.0);
            if alpha < 0.0 || alpha > c * (1.0 + 1e-12) {
                bad.push(format!(
                    "class {}: alpha[{i}] = {alpha} outside [0, {c}]",
                    p.class()
                ));
            }
            let margin = y * p.decision(&model.kernel(), zi);
            if alpha == 0.0 && margin < 1.0 - tol {
                bad.push(format!(
                    "class {}: sample {i} alpha=0 but y*f = {margin}",
                    p.class()
                ));
            }
            if alpha > 0.0 && alpha < c * (1.0 - 1e-12) && margin > 1.0 + tol {
                bad.push(format!(
                    "class {}: sample {i} free but y*f = {margin}",
                    p.class()
                ));
            }
        }
    }
    bad
}
