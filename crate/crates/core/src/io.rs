//! PGM (P2/P5) and PNG codecs for [`RasterImage`].
//!
//! Samples are quantized to 8 bits only here; everywhere else they stay as
//! normalized floats.

use std::io::Cursor;

use crate::error::{Error, Result};
use crate::image::RasterImage;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImageFormat {
    Pgm,
    Png,
}

impl ImageFormat {
    /// Picks a format from a file extension: `.png` is PNG, anything else PGM.
    pub fn from_path(path: &std::path::Path) -> ImageFormat {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("png") => ImageFormat::Png,
            _ => ImageFormat::Pgm,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PgmEncoding {
    /// P2
    Ascii,
    /// P5
    #[default]
    Binary,
}

pub fn load_image(bytes: &[u8], format: ImageFormat) -> Result<RasterImage> {
    match format {
        ImageFormat::Pgm => decode_pgm(bytes),
        ImageFormat::Png => decode_png(bytes),
    }
}

/// Encodes as binary PGM or 8-bit grayscale PNG.
pub fn save_image(image: &RasterImage, format: ImageFormat) -> Result<Vec<u8>> {
    match format {
        ImageFormat::Pgm => Ok(encode_pgm(image, PgmEncoding::Binary)),
        ImageFormat::Png => encode_png(image),
    }
}

#[inline]
fn quantize(v: f64) -> u8 {
    (v * 255.0).round().clamp(0.0, 255.0) as u8
}

pub fn encode_pgm(image: &RasterImage, encoding: PgmEncoding) -> Vec<u8> {
    let (w, h) = (image.width(), image.height());
    match encoding {
        PgmEncoding::Binary => {
            let mut out = format!("P5\n{w} {h}\n255\n").into_bytes();
            out.extend(image.samples().iter().map(|&v| quantize(v)));
            out
        }
        PgmEncoding::Ascii => {
            let mut out = format!("P2\n{w} {h}\n255\n");
            for row in image.samples().chunks(w) {
                let line: Vec<String> = row.iter().map(|&v| quantize(v).to_string()).collect();
                out.push_str(&line.join(" "));
                out.push('\n');
            }
            out.into_bytes()
        }
    }
}

/// Whitespace- and comment-aware tokenizer over a netpbm header.
struct HeaderReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> HeaderReader<'a> {
    fn skip_space(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                c if c.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn token(&mut self) -> Option<&'a [u8]> {
        self.skip_space();
        let start = self.pos;
        while self.pos < self.bytes.len()
            && !self.bytes[self.pos].is_ascii_whitespace()
            && self.bytes[self.pos] != b'#'
        {
            self.pos += 1;
        }
        (self.pos > start).then(|| &self.bytes[start..self.pos])
    }

    fn number(&mut self, field: &'static str) -> Result<u32> {
        let tok = self.token().ok_or(Error::Parse {
            field,
            detail: "missing value".into(),
        })?;
        std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse::<u32>().ok())
            .ok_or_else(|| Error::Parse {
                field,
                detail: format!(
                    "not a non-negative integer: {:?}",
                    String::from_utf8_lossy(tok)
                ),
            })
    }
}

fn decode_pgm(bytes: &[u8]) -> Result<RasterImage> {
    let mut hdr = HeaderReader { bytes, pos: 0 };
    let binary = match hdr.token() {
        Some(b"P2") => false,
        Some(b"P5") => true,
        other => {
            return Err(Error::Parse {
                field: "magic",
                detail: format!(
                    "expected P2 or P5, found {:?}",
                    other.map(String::from_utf8_lossy).unwrap_or_default()
                ),
            })
        }
    };
    let width = hdr.number("width")? as usize;
    let height = hdr.number("height")? as usize;
    let maxval = hdr.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(Error::InvalidDimension { width, height });
    }
    if maxval == 0 || maxval > 65535 {
        return Err(Error::Parse {
            field: "maxval",
            detail: format!("{maxval} outside 1..=65535"),
        });
    }
    let count = width * height;
    let scale = f64::from(maxval);
    let mut samples = Vec::with_capacity(count);

    if binary {
        // Exactly one whitespace byte separates maxval from the raster.
        let start = hdr.pos + 1;
        let data = bytes.get(start..).unwrap_or_default();
        if maxval < 256 {
            if data.len() < count {
                return Err(Error::Truncated {
                    expected: count,
                    found: data.len(),
                });
            }
            samples.extend(data[..count].iter().map(|&b| f64::from(b) / scale));
        } else {
            if data.len() < 2 * count {
                return Err(Error::Truncated {
                    expected: count,
                    found: data.len() / 2,
                });
            }
            samples.extend(
                data[..2 * count]
                    .chunks_exact(2)
                    .map(|c| f64::from(u16::from_be_bytes([c[0], c[1]])) / scale),
            );
        }
    } else {
        while samples.len() < count {
            match hdr.token() {
                None => {
                    return Err(Error::Truncated {
                        expected: count,
                        found: samples.len(),
                    })
                }
                Some(tok) => {
                    let v = std::str::from_utf8(tok)
                        .ok()
                        .and_then(|s| s.parse::<u32>().ok())
                        .ok_or_else(|| Error::Parse {
                            field: "pixel",
                            detail: format!("bad sample {:?}", String::from_utf8_lossy(tok)),
                        })?;
                    samples.push(f64::from(v) / scale);
                }
            }
        }
    }
    RasterImage::new(width, height, samples).map_err(|e| match e {
        Error::InvalidSample { index, .. } => Error::Parse {
            field: "pixel",
            detail: format!("sample {index} exceeds maxval {maxval}"),
        },
        other => other,
    })
}

/// BT.601 luma on normalized channels.
#[inline]
pub fn luminance(r: f64, g: f64, b: f64) -> f64 {
    0.299 * r + 0.587 * g + 0.114 * b
}

fn decode_png(bytes: &[u8]) -> Result<RasterImage> {
    let png_err = |e: png::DecodingError| Error::Png(e.to_string());
    let mut decoder = png::Decoder::new(Cursor::new(bytes));
    decoder.set_transformations(png::Transformations::normalize_to_color8());
    let mut reader = decoder.read_info().map_err(png_err)?;
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| Error::Png("image too large".into()))?;
    let mut buf = vec![0u8; size];
    let frame = reader.next_frame(&mut buf).map_err(|e| match e {
        png::DecodingError::IoError(io) if io.kind() == std::io::ErrorKind::UnexpectedEof => {
            Error::Truncated {
                expected: size,
                found: 0,
            }
        }
        other => png_err(other),
    })?;
    let (width, height) = (frame.width as usize, frame.height as usize);
    if width == 0 || height == 0 {
        return Err(Error::InvalidDimension { width, height });
    }
    let channels = frame.color_type.samples();
    let stride = frame.line_size;
    let mut samples = Vec::with_capacity(width * height);
    for row in buf[..frame.buffer_size()].chunks(stride).take(height) {
        for px in row.chunks(channels).take(width) {
            let c = |i: usize| f64::from(px[i]) / 255.0;
            let v = match channels {
                1 | 2 => c(0),
                _ => luminance(c(0), c(1), c(2)),
            };
            samples.push(v.clamp(0.0, 1.0));
        }
    }
    RasterImage::new(width, height, samples)
}

fn encode_png(image: &RasterImage) -> Result<Vec<u8>> {
    let png_err = |e: png::EncodingError| Error::Png(e.to_string());
    let mut out = Vec::new();
    {
        let mut encoder = png::Encoder::new(&mut out, image.width() as u32, image.height() as u32);
        encoder.set_color(png::ColorType::Grayscale);
        encoder.set_depth(png::BitDepth::Eight);
        let mut writer = encoder.write_header().map_err(png_err)?;
        let data: Vec<u8> = image.samples().iter().map(|&v| quantize(v)).collect();
        writer.write_image_data(&data).map_err(png_err)?;
        writer.finish().map_err(png_err)?;
    }
    Ok(out)
}
