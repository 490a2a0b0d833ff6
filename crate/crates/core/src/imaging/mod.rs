//! Image containers, grayscale conversion, gray-level quantization and
//! window tiling with ground-truth labelling.

mod io;

pub use io::{
    decode_image, load_image, load_label_raster, save_png_gray, save_png_rgb, write_pgm, write_ppm,
};

use std::collections::HashSet;
use std::fmt;
use std::path::Path;

use crate::{Error, Result};

/// Class identifier as stored in label rasters.
pub type ClassId = u8;

/// Label raster value marking pixels without ground truth.
pub const UNLABELED: ClassId = 255;

fn check_dims(width: u32, height: u32, len: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidArgument(format!(
            "image dimensions {width}x{height} must be positive"
        )));
    }
    if width as usize * height as usize != len {
        return Err(Error::DimensionMismatch(format!(
            "{width}x{height} image needs {} pixels, got {len}",
            width as usize * height as usize
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    width: u32,
    height: u32,
    pixels: Vec<[u8; 3]>,
}

impl RgbImage {
    pub fn new(width: u32, height: u32, pixels: Vec<[u8; 3]>) -> Result<Self> {
        check_dims(width, height, pixels.len())?;
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &[[u8; 3]] {
        &self.pixels
    }

    pub fn get(&self, x: u32, y: u32) -> [u8; 3] {
        self.pixels[y as usize * self.width as usize + x as usize]
    }

    pub(crate) fn pixels_mut(&mut self) -> &mut [[u8; 3]] {
        &mut self.pixels
    }

    /// Luma conversion with ITU-R BT.601 weights, rounded half up.
    pub fn to_grayscale(&self) -> GrayImage {
        let pixels = self.pixels.iter().map(|&[r, g, b]| luma(r, g, b)).collect();
        GrayImage {
            width: self.width,
            height: self.height,
            pixels,
        }
    }
}

/// `round(0.299 R + 0.587 G + 0.114 B)`, evaluated exactly in integers.
pub fn luma(r: u8, g: u8, b: u8) -> u8 {
    let weighted = 299 * r as u32 + 587 * g as u32 + 114 * b as u32;
    ((weighted + 500) / 1000).min(255) as u8
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: u32,
    height: u32,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: u32, height: u32, pixels: Vec<u8>) -> Result<Self> {
        check_dims(width, height, pixels.len())?;
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> u8) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width as usize * height as usize);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self::new(width, height, pixels)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn get(&self, x: u32, y: u32) -> u8 {
        self.pixels[y as usize * self.width as usize + x as usize]
    }

    /// Reduces intensities to `levels` equal-width bins: `bin = floor(v * G / 256)`.
    pub fn quantize(&self, levels: u16) -> Result<QuantizedImage> {
        if !(2..=256).contains(&levels) {
            return Err(Error::InvalidArgument(format!(
                "quantization levels {levels} outside 2..=256"
            )));
        }
        let pixels = self
            .pixels
            .iter()
            .map(|&v| quantize_value(v, levels))
            .collect();
        Ok(QuantizedImage {
            width: self.width,
            height: self.height,
            levels,
            pixels,
        })
    }
}

pub fn quantize_value(v: u8, levels: u16) -> u8 {
    (v as u32 * levels as u32 / 256) as u8
}

/// A decoded input image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Image {
    Gray(GrayImage),
    Rgb(RgbImage),
}

impl Image {
    pub fn width(&self) -> u32 {
        match self {
            Image::Gray(g) => g.width(),
            Image::Rgb(c) => c.width(),
        }
    }

    pub fn height(&self) -> u32 {
        match self {
            Image::Gray(g) => g.height(),
            Image::Rgb(c) => c.height(),
        }
    }

    pub fn into_gray(self) -> GrayImage {
        match self {
            Image::Gray(g) => g,
            Image::Rgb(c) => c.to_grayscale(),
        }
    }
}

/// Gray image reduced to `levels` bins; every pixel is `< levels`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuantizedImage {
    width: u32,
    height: u32,
    levels: u16,
    pixels: Vec<u8>,
}

impl QuantizedImage {
    pub fn new(width: u32, height: u32, levels: u16, pixels: Vec<u8>) -> Result<Self> {
        check_dims(width, height, pixels.len())?;
        if !(2..=256).contains(&levels) {
            return Err(Error::InvalidArgument(format!(
                "quantization levels {levels} outside 2..=256"
            )));
        }
        if let Some(&bad) = pixels.iter().find(|&&p| p as u16 >= levels) {
            return Err(Error::InvalidArgument(format!(
                "bin {bad} not below level count {levels}"
            )));
        }
        Ok(Self {
            width,
            height,
            levels,
            pixels,
        })
    }

    /// Builds a quantized image from row-major rows; handy for small fixtures.
    pub fn from_rows<R: AsRef<[u8]>>(levels: u16, rows: &[R]) -> Result<Self> {
        let height = rows.len() as u32;
        let width = rows.first().map_or(0, |r| r.as_ref().len()) as u32;
        let mut pixels = Vec::with_capacity(width as usize * height as usize);
        for row in rows {
            if row.as_ref().len() as u32 != width {
                return Err(Error::DimensionMismatch("ragged rows".into()));
            }
            pixels.extend_from_slice(row.as_ref());
        }
        Self::new(width, height, levels, pixels)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn levels(&self) -> u16 {
        self.levels
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn get(&self, x: u32, y: u32) -> u8 {
        self.pixels[y as usize * self.width as usize + x as usize]
    }

    pub fn row(&self, y: u32) -> &[u8] {
        let w = self.width as usize;
        &self.pixels[y as usize * w..(y as usize + 1) * w]
    }

    pub fn windows(&self, size: u32) -> Result<Vec<WindowSpec>> {
        tile_windows(self.width, self.height, size)
    }
}

/// A square window; `(x, y)` is the top-left corner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WindowSpec {
    pub x: u32,
    pub y: u32,
    pub size: u32,
}

impl WindowSpec {
    pub fn new(x: u32, y: u32, size: u32) -> Self {
        Self { x, y, size }
    }

    pub fn fits(&self, width: u32, height: u32) -> bool {
        self.size >= 1
            && self.x.checked_add(self.size).is_some_and(|r| r <= width)
            && self.y.checked_add(self.size).is_some_and(|b| b <= height)
    }

    pub fn contains(&self, x: u32, y: u32) -> bool {
        x >= self.x && x < self.x + self.size && y >= self.y && y < self.y + self.size
    }
}

/// Non-overlapping `size`-pixel tiles in row-major order. Partial tiles at the
/// right and bottom edges are dropped, so the count is
/// `floor(W / size) * floor(H / size)`.
pub fn tile_windows(width: u32, height: u32, size: u32) -> Result<Vec<WindowSpec>> {
    if size < 2 {
        return Err(Error::InvalidArgument(format!(
            "window size {size} must be at least 2"
        )));
    }
    let cols = width / size;
    let rows = height / size;
    let mut out = Vec::with_capacity(cols as usize * rows as usize);
    for r in 0..rows {
        for c in 0..cols {
            out.push(WindowSpec::new(c * size, r * size, size));
        }
    }
    Ok(out)
}

/// Per-pixel ground truth; `UNLABELED` marks pixels without a class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelRaster {
    width: u32,
    height: u32,
    pixels: Vec<ClassId>,
}

impl LabelRaster {
    pub fn new(width: u32, height: u32, pixels: Vec<ClassId>) -> Result<Self> {
        check_dims(width, height, pixels.len())?;
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &[ClassId] {
        &self.pixels
    }

    pub fn get(&self, x: u32, y: u32) -> ClassId {
        self.pixels[y as usize * self.width as usize + x as usize]
    }

    pub fn check_matches(&self, width: u32, height: u32) -> Result<()> {
        if self.width != width || self.height != height {
            return Err(Error::DimensionMismatch(format!(
                "label raster is {}x{}, image is {width}x{height}",
                self.width, self.height
            )));
        }
        Ok(())
    }

    /// Modal class of the window if it covers at least `purity` of the
    /// window's pixels. Ties go to the smaller class id. `None` means the
    /// window stays unlabeled.
    pub fn window_label(&self, w: WindowSpec, purity: f64) -> Option<ClassId> {
        assert!(
            w.fits(self.width, self.height),
            "window outside label raster"
        );
        let mut counts = [0u32; 256];
        for y in w.y..w.y + w.size {
            let start = y as usize * self.width as usize + w.x as usize;
            for &c in &self.pixels[start..start + w.size as usize] {
                counts[c as usize] += 1;
            }
        }
        // max_by_key keeps the last maximum, so scan ids in descending order.
        let (class, &count) = counts[..UNLABELED as usize]
            .iter()
            .enumerate()
            .rev()
            .max_by_key(|&(_, c)| *c)?;
        let total = (w.size as u64 * w.size as u64) as f64;
        (count > 0 && count as f64 / total >= purity).then_some(class as ClassId)
    }
}

/// Ordered `(id, name)` pairs for the classes a model knows about.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ClassMap {
    entries: Vec<(ClassId, String)>,
}

impl ClassMap {
    /// Entries are sorted by id; ids and names must be unique and ids must
    /// not use the unlabeled sentinel.
    pub fn new(mut entries: Vec<(ClassId, String)>) -> Result<Self> {
        entries.sort_by_key(|e| e.0);
        let mut names = HashSet::new();
        for pair in entries.windows(2) {
            if pair[0].0 == pair[1].0 {
                return Err(Error::InvalidArgument(format!(
                    "duplicate class id {}",
                    pair[0].0
                )));
            }
        }
        for (id, name) in &entries {
            if *id == UNLABELED {
                return Err(Error::InvalidArgument(format!(
                    "class id {UNLABELED} is reserved for unlabeled pixels"
                )));
            }
            if name.is_empty() || name.contains(char::is_whitespace) || name.contains(',') {
                return Err(Error::InvalidArgument(format!(
                    "class name {name:?} must be a non-empty token"
                )));
            }
            if !names.insert(name.as_str()) {
                return Err(Error::InvalidArgument(format!(
                    "duplicate class name {name:?}"
                )));
            }
        }
        Ok(Self { entries })
    }

    /// Classes named `class<id>` for each id.
    pub fn from_ids(ids: impl IntoIterator<Item = ClassId>) -> Result<Self> {
        let mut ids: Vec<_> = ids.into_iter().collect();
        ids.sort_unstable();
        ids.dedup();
        Self::new(
            ids.into_iter()
                .map(|id| (id, format!("class{id}")))
                .collect(),
        )
    }

    /// Parses `id,name` lines. Blank lines and `#` comments are skipped; ids
    /// must be dense from 0.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (id, name) = line
                .split_once(',')
                .ok_or_else(|| Error::parse(n + 1, "expected `id,name`"))?;
            let id: ClassId = id
                .trim()
                .parse()
                .map_err(|_| Error::parse(n + 1, format!("bad class id {:?}", id.trim())))?;
            entries.push((id, name.trim().to_string()));
        }
        let map = Self::new(entries)?;
        if map
            .entries
            .iter()
            .enumerate()
            .any(|(i, (id, _))| *id as usize != i)
        {
            return Err(Error::InvalidArgument(
                "class ids must be dense from 0".into(),
            ));
        }
        Ok(map)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Unreadable {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = ClassId> + '_ {
        self.entries.iter().map(|e| e.0)
    }

    pub fn entries(&self) -> &[(ClassId, String)] {
        &self.entries
    }

    /// Position of `id` in the map.
    pub fn index_of(&self, id: ClassId) -> Option<usize> {
        self.entries.binary_search_by_key(&id, |e| e.0).ok()
    }

    pub fn name(&self, id: ClassId) -> Option<&str> {
        self.index_of(id).map(|i| self.entries[i].1.as_str())
    }

    /// Keeps only the listed ids.
    pub fn restrict(&self, keep: &[ClassId]) -> Self {
        Self {
            entries: self
                .entries
                .iter()
                .filter(|e| keep.contains(&e.0))
                .cloned()
                .collect(),
        }
    }
}

impl fmt::Display for ClassMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (id, name) in &self.entries {
            writeln!(f, "{id},{name}")?;
        }
        Ok(())
    }
}
