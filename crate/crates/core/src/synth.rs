//! Seeded synthetic textures for fixtures, demos and benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::imaging::{ClassId, GrayImage, LabelRaster};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Texture {
    /// Independent uniform intensities over a wide random range.
    Noise,
    /// Linear ramp at a random angle spanning half or more of the gray range.
    Gradient,
    /// Two-tone checkerboard with random cell size and phase.
    Checkerboard,
    /// Two-tone horizontal stripes with random thickness and phase.
    Stripes,
}

impl Texture {
    pub const ALL: [Texture; 4] = [
        Texture::Noise,
        Texture::Gradient,
        Texture::Checkerboard,
        Texture::Stripes,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Texture::Noise => "noise",
            Texture::Gradient => "gradient",
            Texture::Checkerboard => "checkerboard",
            Texture::Stripes => "stripes",
        }
    }
}

/// Maximum absolute jitter added to the structured textures.
const JITTER: i32 = 4;

/// Paints a `size`-pixel square of `texture` at `(x0, y0)` into a row-major
/// buffer of the given `width`.
pub fn paint(
    buf: &mut [u8],
    width: u32,
    x0: u32,
    y0: u32,
    size: u32,
    texture: Texture,
    rng: &mut impl Rng,
) {
    let mut put = |x: u32, y: u32, v: i32, rng: &mut dyn rand::RngCore| {
        let jitter = if texture == Texture::Noise {
            0
        } else {
            rng.gen_range(-JITTER..=JITTER)
        };
        buf[(y0 + y) as usize * width as usize + (x0 + x) as usize] =
            (v + jitter).clamp(0, 255) as u8;
    };
    match texture {
        Texture::Noise => {
            let lo = rng.gen_range(0..64);
            let hi = rng.gen_range(192..256);
            for y in 0..size {
                for x in 0..size {
                    let v = rng.gen_range(lo..hi);
                    put(x, y, v, rng);
                }
            }
        }
        Texture::Gradient => {
            let angle = rng.gen_range(0.0..std::f64::consts::TAU);
            let span = rng.gen_range(128.0..224.0);
            let base = rng.gen_range(0.0..(255.0 - span));
            let (c, s) = (angle.cos(), angle.sin());
            let reach = (c.abs() + s.abs()) * (size - 1).max(1) as f64;
            let start = (c.min(0.0) + s.min(0.0)) * (size - 1) as f64;
            for y in 0..size {
                for x in 0..size {
                    let t = (x as f64 * c + y as f64 * s - start) / reach;
                    put(x, y, (base + span * t).round() as i32, rng);
                }
            }
        }
        Texture::Checkerboard | Texture::Stripes => {
            let dark = rng.gen_range(0..100);
            let light = rng.gen_range(150..256);
            let cell = rng.gen_range(2..=7);
            let (px, py) = (rng.gen_range(0..cell), rng.gen_range(0..cell));
            for y in 0..size {
                for x in 0..size {
                    let band = (y + py) / cell;
                    let on = if texture == Texture::Stripes {
                        band % 2 == 0
                    } else {
                        (band + (x + px) / cell) % 2 == 0
                    };
                    put(x, y, if on { light } else { dark }, rng);
                }
            }
        }
    }
}

/// A single square patch.
pub fn patch(texture: Texture, size: u32, seed: u64) -> GrayImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut buf = vec![0; size as usize * size as usize];
    paint(&mut buf, size, 0, 0, size, texture, &mut rng);
    GrayImage::new(size, size, buf).expect("square buffer")
}

/// Image made of `cols x rows` tiles plus a label raster giving each tile's
/// texture index in [`Texture::ALL`].
#[derive(Debug, Clone)]
pub struct Mosaic {
    pub image: GrayImage,
    pub labels: LabelRaster,
}

/// Tiles of `tile` pixels; `pick(col, row)` chooses each tile's texture.
pub fn mosaic(
    cols: u32,
    rows: u32,
    tile: u32,
    seed: u64,
    mut pick: impl FnMut(u32, u32) -> Texture,
) -> Result<Mosaic> {
    let (width, height) = (cols * tile, rows * tile);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pixels = vec![0; width as usize * height as usize];
    let mut labels = vec![0; width as usize * height as usize];
    for r in 0..rows {
        for c in 0..cols {
            let texture = pick(c, r);
            paint(
                &mut pixels,
                width,
                c * tile,
                r * tile,
                tile,
                texture,
                &mut rng,
            );
            let class = class_of(texture);
            for y in r * tile..(r + 1) * tile {
                let start = y as usize * width as usize + (c * tile) as usize;
                labels[start..start + tile as usize].fill(class);
            }
        }
    }
    Ok(Mosaic {
        image: GrayImage::new(width, height, pixels)?,
        labels: LabelRaster::new(width, height, labels)?,
    })
}

/// Class id of a texture: its index in [`Texture::ALL`].
pub fn class_of(texture: Texture) -> ClassId {
    Texture::ALL
        .iter()
        .position(|&t| t == texture)
        .expect("known texture") as ClassId
}

/// `per_class` tiles of each of the four textures, shuffled over a near-square grid.
pub fn balanced_mosaic(per_class: u32, tile: u32, seed: u64) -> Result<Mosaic> {
    use rand::seq::SliceRandom;
    let total = per_class * Texture::ALL.len() as u32;
    let cols = (total as f64).sqrt().ceil() as u32;
    let rows = total.div_ceil(cols);
    let mut order: Vec<Texture> = Texture::ALL
        .iter()
        .flat_map(|&t| std::iter::repeat_n(t, per_class as usize))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    order.shuffle(&mut rng);
    // Cells past `total` repeat textures but are cut off by `cells` below.
    let mosaic = mosaic(cols, rows, tile, seed, |c, r| {
        order[((r * cols + c) as usize) % order.len()]
    })?;
    let cells = rows * cols;
    if cells == total {
        return Ok(mosaic);
    }
    let mut labels = mosaic.labels.pixels().to_vec();
    let width = mosaic.image.width();
    for idx in total..cells {
        let (c, r) = (idx % cols, idx / cols);
        for y in r * tile..(r + 1) * tile {
            let start = y as usize * width as usize + (c * tile) as usize;
            labels[start..start + tile as usize].fill(crate::imaging::UNLABELED);
        }
    }
    Ok(Mosaic {
        labels: LabelRaster::new(width, mosaic.image.height(), labels)?,
        image: mosaic.image,
    })
}
