use crate::imaging::{ClassId, GrayImage, RgbImage, WindowSpec};
use crate::{Error, Result};

const RED: [u8; 3] = [255, 0, 0];
const GREEN: [u8; 3] = [0, 255, 0];
const WRONG_OPACITY: f64 = 0.5;
const RIGHT_OPACITY: f64 = 0.15;

fn blend(base: u8, tint: u8, alpha: f64) -> u8 {
    ((1.0 - alpha) * base as f64 + alpha * tint as f64 + 0.5)
        .floor()
        .clamp(0.0, 255.0) as u8
}

/// Renders classification outcomes over the gray image: misclassified
/// windows get a 50% red tint and a solid red 1-pixel border, correct ones a
/// 15% green tint. Windows with no truth (`None`) and pixels outside every
/// window keep the gray base.
pub fn misclassification_map(
    base: &GrayImage,
    windows: &[WindowSpec],
    truths: &[Option<ClassId>],
    preds: &[ClassId],
) -> Result<RgbImage> {
    if windows.len() != truths.len() || windows.len() != preds.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} windows, {} truths, {} predictions",
            windows.len(),
            truths.len(),
            preds.len()
        )));
    }
    let (width, height) = (base.width(), base.height());
    if let Some(w) = windows.iter().find(|w| !w.fits(width, height)) {
        return Err(Error::InvalidArgument(format!(
            "window at ({},{}) size {} outside {width}x{height} image",
            w.x, w.y, w.size
        )));
    }
    let mut out = RgbImage::new(
        width,
        height,
        base.pixels().iter().map(|&v| [v, v, v]).collect(),
    )?;
    let pixels = out.pixels_mut();
    for ((w, truth), &pred) in windows.iter().zip(truths).zip(preds) {
        let Some(truth) = *truth else { continue };
        let wrong = truth != pred;
        let (tint, alpha) = if wrong {
            (RED, WRONG_OPACITY)
        } else {
            (GREEN, RIGHT_OPACITY)
        };
        for y in w.y..w.y + w.size {
            for x in w.x..w.x + w.size {
                let idx = y as usize * width as usize + x as usize;
                let edge = x == w.x || y == w.y || x == w.x + w.size - 1 || y == w.y + w.size - 1;
                pixels[idx] = if wrong && edge {
                    RED
                } else {
                    let v = base.pixels()[idx];
                    [
                        blend(v, tint[0], alpha),
                        blend(v, tint[1], alpha),
                        blend(v, tint[2], alpha),
                    ]
                };
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::tile_windows;

    fn base() -> GrayImage {
        GrayImage::from_fn(150, 100, |x, y| ((x * 7 + y * 3) % 256) as u8).unwrap()
    }

    #[test]
    fn no_errors_means_no_red() {
        let img = base();
        let windows = tile_windows(150, 100, 50).unwrap();
        let truths: Vec<_> = (0..windows.len()).map(|i| Some((i % 2) as u8)).collect();
        let preds: Vec<_> = truths.iter().map(|t| t.unwrap()).collect();
        let out = misclassification_map(&img, &windows, &truths, &preds).unwrap();
        assert!(out.pixels().iter().all(|p| p[0] == p[2] && p[1] >= p[0]));
    }

    #[test]
    fn all_wrong_tints_every_window() {
        let img = base();
        let windows = tile_windows(150, 100, 50).unwrap();
        let truths = vec![Some(0); windows.len()];
        let preds = vec![1; windows.len()];
        let out = misclassification_map(&img, &windows, &truths, &preds).unwrap();
        for (i, &p) in out.pixels().iter().enumerate() {
            let v = img.pixels()[i];
            assert!(
                p == RED || p == [blend(v, 255, 0.5), blend(v, 0, 0.5), blend(v, 0, 0.5)],
                "pixel {i}: {p:?}"
            );
            assert!(p[0] >= 128 && p[1] <= 128);
        }
    }

    #[test]
    fn single_wrong_window_is_exactly_red() {
        let img = base();
        let windows = tile_windows(150, 100, 50).unwrap();
        let wrong = windows.iter().position(|w| (w.x, w.y) == (50, 0)).unwrap();
        let truths: Vec<_> = windows.iter().map(|_| Some(3)).collect();
        let preds: Vec<_> = (0..windows.len())
            .map(|i| if i == wrong { 4 } else { 3 })
            .collect();
        let out = misclassification_map(&img, &windows, &truths, &preds).unwrap();
        for y in 0..100 {
            for x in 0..150 {
                let v = img.get(x, y);
                let p = out.get(x, y);
                let inside = (50..100).contains(&x) && y < 50;
                if inside {
                    let edge = x == 50 || x == 99 || y == 0 || y == 49;
                    let expect = if edge {
                        RED
                    } else {
                        [blend(v, 255, 0.5), blend(v, 0, 0.5), blend(v, 0, 0.5)]
                    };
                    assert_eq!(p, expect, "({x},{y})");
                } else {
                    assert_eq!(
                        p,
                        [blend(v, 0, 0.15), blend(v, 255, 0.15), blend(v, 0, 0.15)],
                        "({x},{y})"
                    );
                }
            }
        }
    }

    #[test]
    fn untouched_outside_windows_and_for_unlabeled() {
        let img = base();
        let windows = tile_windows(150, 100, 40).unwrap();
        let truths: Vec<_> = (0..windows.len())
            .map(|i| if i == 0 { None } else { Some(0) })
            .collect();
        let preds = vec![1; windows.len()];
        let out = misclassification_map(&img, &windows, &truths, &preds).unwrap();
        assert_eq!((out.width(), out.height()), (150, 100));
        for y in 0..100 {
            for x in 0..150 {
                if x >= 120 || y >= 80 || windows[0].contains(x, y) {
                    let v = img.get(x, y);
                    assert_eq!(out.get(x, y), [v, v, v]);
                }
            }
        }
    }

    #[test]
    fn misaligned_inputs() {
        let img = base();
        let windows = tile_windows(150, 100, 50).unwrap();
        assert!(misclassification_map(&img, &windows, &[Some(0)], &[0]).is_err());
        let outside = [WindowSpec::new(120, 0, 50)];
        assert!(misclassification_map(&img, &outside, &[Some(0)], &[0]).is_err());
    }
}
