use std::fmt::Write as _;
use std::hint::black_box;
use std::time::Instant;

use crate::fmt::sig;
use crate::glcm::{extract_batch, OffsetSpec};
use crate::imaging::{tile_windows, QuantizedImage};
use crate::par::Execution;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub size: u32,
    pub windows: usize,
    /// Median wall time of one tile-and-extract pass.
    pub seconds: f64,
    pub features_per_sec: f64,
    /// Every measured wall time, in run order.
    pub runs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    pub fn to_text(&self) -> String {
        let mut out = String::from("size,windows,seconds,features_per_sec\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                r.size,
                r.windows,
                sig(r.seconds, 9),
                sig(r.features_per_sec, 9)
            );
        }
        out
    }
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Times tiling plus feature extraction of every window, `repeats` times per
/// size. Runs are strictly one after another and the sizes are interleaved
/// within each repeat, after one untimed warm-up pass per size; `exec` only
/// controls parallelism inside a run. Sizes that admit no window report zero
/// windows and zero time.
pub fn benchmark_runtime(
    img: &QuantizedImage,
    sizes: &[u32],
    repeats: usize,
    offset: OffsetSpec,
    exec: Execution,
) -> Result<BenchReport> {
    if repeats == 0 {
        return Err(Error::InvalidArgument("repeats must be at least 1".into()));
    }
    let counts = sizes
        .iter()
        .map(|&s| tile_windows(img.width(), img.height(), s).map(|w| w.len()))
        .collect::<Result<Vec<_>>>()?;
    let pass = |size: u32| -> Result<f64> {
        let start = Instant::now();
        let windows = tile_windows(img.width(), img.height(), size)?;
        let features = extract_batch(img, &windows, offset, exec)?;
        black_box(&features);
        Ok(start.elapsed().as_secs_f64())
    };
    let mut runs = vec![Vec::with_capacity(repeats); sizes.len()];
    for rep in 0..=repeats {
        for (i, &size) in sizes.iter().enumerate() {
            if counts[i] == 0 {
                continue;
            }
            let t = pass(size)?;
            if rep > 0 {
                runs[i].push(t);
            }
        }
    }
    let rows = sizes
        .iter()
        .zip(counts)
        .zip(runs)
        .map(|((&size, count), runs)| {
            let seconds = if runs.is_empty() {
                0.0
            } else {
                median(&mut runs.clone())
            };
            BenchRow {
                size,
                windows: count,
                seconds,
                features_per_sec: if seconds > 0.0 {
                    count as f64 / seconds
                } else {
                    0.0
                },
                runs,
            }
        })
        .collect();
    Ok(BenchReport { rows })
}
