//! PNG and binary PGM/PPM decoding, plus PNG/PNM writers.

use std::io::{BufWriter, Cursor, Write};
use std::path::Path;

use super::{GrayImage, Image, LabelRaster, RgbImage};
use crate::{Error, Result};

const PNG_SIGNATURE: &[u8] = b"\x89PNG\r\n\x1a\n";

pub fn load_image(path: &Path) -> Result<Image> {
    let bytes = std::fs::read(path).map_err(|source| Error::Unreadable {
        path: path.to_path_buf(),
        source,
    })?;
    decode_image(&bytes)
}

/// Loads an 8-bit single-channel raster whose pixel values are class ids.
pub fn load_label_raster(path: &Path) -> Result<LabelRaster> {
    match load_image(path)? {
        Image::Gray(g) => LabelRaster::new(g.width, g.height, g.pixels),
        Image::Rgb(_) => Err(Error::UnsupportedFormat(format!(
            "{}: label rasters must be single-channel",
            path.display()
        ))),
    }
}

/// Decodes PNG (8-bit gray or RGB; alpha is dropped) or binary P5/P6 with maxval 255.
pub fn decode_image(bytes: &[u8]) -> Result<Image> {
    if bytes.starts_with(PNG_SIGNATURE) {
        decode_png(bytes)
    } else if bytes.starts_with(b"P5") || bytes.starts_with(b"P6") {
        decode_pnm(bytes)
    } else if bytes.len() >= 2 && bytes[0] == b'P' && bytes[1].is_ascii_digit() {
        Err(Error::UnsupportedFormat(format!(
            "PNM variant P{} (only binary P5/P6 are read)",
            bytes[1] as char
        )))
    } else {
        Err(Error::UnsupportedFormat(
            "not a PNG, PGM or PPM file".into(),
        ))
    }
}

fn png_error(e: png::DecodingError) -> Error {
    match e {
        png::DecodingError::Parameter(p) => Error::UnsupportedFormat(p.to_string()),
        other => Error::CorruptData(other.to_string()),
    }
}

fn decode_png(bytes: &[u8]) -> Result<Image> {
    let mut decoder = png::Decoder::new(Cursor::new(bytes));
    decoder.set_transformations(png::Transformations::EXPAND);
    let mut reader = decoder.read_info().map_err(png_error)?;
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| Error::UnsupportedFormat("PNG too large".into()))?;
    let mut buf = vec![0; size];
    let info = reader.next_frame(&mut buf).map_err(png_error)?;
    if info.bit_depth != png::BitDepth::Eight {
        return Err(Error::UnsupportedFormat(format!(
            "PNG bit depth {:?}",
            info.bit_depth
        )));
    }
    let (w, h) = (info.width, info.height);
    let data = &buf[..info.buffer_size()];
    let channels = info.color_type.samples();
    let row_bytes = info.line_size;
    let rows = data.chunks_exact(row_bytes).take(h as usize);
    match info.color_type {
        png::ColorType::Grayscale | png::ColorType::GrayscaleAlpha => {
            let pixels = rows
                .flat_map(|row| {
                    row[..w as usize * channels]
                        .chunks_exact(channels)
                        .map(|p| p[0])
                })
                .collect();
            Ok(Image::Gray(GrayImage::new(w, h, pixels)?))
        }
        png::ColorType::Rgb | png::ColorType::Rgba => {
            let pixels = rows
                .flat_map(|row| {
                    row[..w as usize * channels]
                        .chunks_exact(channels)
                        .map(|p| [p[0], p[1], p[2]])
                })
                .collect();
            Ok(Image::Rgb(RgbImage::new(w, h, pixels)?))
        }
        png::ColorType::Indexed => Err(Error::UnsupportedFormat("indexed PNG".into())),
    }
}

struct HeaderReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl HeaderReader<'_> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while self.bytes.get(self.pos).is_some_and(|&c| c != b'\n') {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<u32> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::CorruptData(format!("PNM header: missing or invalid {what}")))
    }
}

fn decode_pnm(bytes: &[u8]) -> Result<Image> {
    let rgb = bytes[1] == b'6';
    let mut header = HeaderReader { bytes, pos: 2 };
    let width = header.number("width")?;
    let height = header.number("height")?;
    let maxval = header.number("maxval")?;
    if maxval != 255 {
        return Err(Error::UnsupportedFormat(format!(
            "PNM maxval {maxval} (only 255 is read)"
        )));
    }
    // Exactly one whitespace byte separates the header from the raster.
    if !header
        .bytes
        .get(header.pos)
        .is_some_and(u8::is_ascii_whitespace)
    {
        return Err(Error::CorruptData("PNM header not terminated".into()));
    }
    let data = &bytes[header.pos + 1..];
    let channels = if rgb { 3 } else { 1 };
    let needed = width as usize * height as usize * channels;
    if data.len() < needed {
        return Err(Error::CorruptData(format!(
            "PNM raster truncated: {} of {needed} bytes",
            data.len()
        )));
    }
    let data = &data[..needed];
    if rgb {
        let pixels = data.chunks_exact(3).map(|p| [p[0], p[1], p[2]]).collect();
        Ok(Image::Rgb(RgbImage::new(width, height, pixels)?))
    } else {
        Ok(Image::Gray(GrayImage::new(width, height, data.to_vec())?))
    }
}

fn create(path: &Path) -> Result<BufWriter<std::fs::File>> {
    std::fs::File::create(path)
        .map(BufWriter::new)
        .map_err(|source| Error::Unwritable {
            path: path.to_path_buf(),
            source,
        })
}

fn write_png(
    path: &Path,
    width: u32,
    height: u32,
    color: png::ColorType,
    data: &[u8],
) -> Result<()> {
    let out = create(path)?;
    let mut encoder = png::Encoder::new(out, width, height);
    encoder.set_color(color);
    encoder.set_depth(png::BitDepth::Eight);
    let encode_err = |e: png::EncodingError| Error::Unwritable {
        path: path.to_path_buf(),
        source: std::io::Error::other(e.to_string()),
    };
    let mut writer = encoder.write_header().map_err(encode_err)?;
    writer.write_image_data(data).map_err(encode_err)?;
    writer.finish().map_err(encode_err)
}

pub fn save_png_gray(path: &Path, img: &GrayImage) -> Result<()> {
    write_png(
        path,
        img.width,
        img.height,
        png::ColorType::Grayscale,
        &img.pixels,
    )
}

pub fn save_png_rgb(path: &Path, img: &RgbImage) -> Result<()> {
    let data: Vec<u8> = img.pixels.iter().flatten().copied().collect();
    write_png(path, img.width, img.height, png::ColorType::Rgb, &data)
}

pub fn write_pgm(path: &Path, img: &GrayImage) -> Result<()> {
    let mut out = create(path)?;
    write!(out, "P5\n{} {}\n255\n", img.width, img.height)
        .and_then(|_| out.write_all(&img.pixels))
        .and_then(|_| out.flush())
        .map_err(|source| Error::Unwritable {
            path: path.to_path_buf(),
            source,
        })
}

pub fn write_ppm(path: &Path, img: &RgbImage) -> Result<()> {
    let mut out = create(path)?;
    let data: Vec<u8> = img.pixels.iter().flatten().copied().collect();
    write!(out, "P6\n{} {}\n255\n", img.width, img.height)
        .and_then(|_| out.write_all(&data))
        .and_then(|_| out.flush())
        .map_err(|source| Error::Unwritable {
            path: path.to_path_buf(),
            source,
        })
}
