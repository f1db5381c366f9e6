use std::io::Write;

use edgecraft_core::draw;
use edgecraft_core::RasterImage;
use serde::{Deserialize, Serialize};

/// One detected feature, written as a single JSON object per line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum FeatureRecord {
    Corner { x: i64, y: i64, response: f64 },
    Line { rho: f64, theta: f64, votes: u64 },
    Circle { a: f64, b: f64, r: f64, votes: u64 },
    ShapeInstance { x: i64, y: i64, votes: u64 },
}

impl FeatureRecord {
    pub fn is_finite(&self) -> bool {
        match *self {
            FeatureRecord::Corner { response, .. } => response.is_finite(),
            FeatureRecord::Line { rho, theta, .. } => rho.is_finite() && theta.is_finite(),
            FeatureRecord::Circle { a, b, r, .. } => {
                a.is_finite() && b.is_finite() && r.is_finite()
            }
            FeatureRecord::ShapeInstance { .. } => true,
        }
    }
}

pub fn write_jsonl(records: &[FeatureRecord], out: &mut impl Write) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut *out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn to_jsonl(records: &[FeatureRecord]) -> Vec<u8> {
    let mut buf = Vec::new();
    write_jsonl(records, &mut buf).expect("writing to a Vec cannot fail");
    buf
}

pub fn read_jsonl(text: &str) -> serde_json::Result<Vec<FeatureRecord>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(serde_json::from_str)
        .collect()
}

fn cross(x: i64, y: i64) -> [(i64, i64); 5] {
    [(x, y), (x - 1, y), (x + 1, y), (x, y - 1), (x, y + 1)]
}

/// Draws features at intensity 1.0 on a copy of `image`. Parts that fall
/// outside the image are skipped.
pub fn render_overlay(image: &RasterImage, features: &[FeatureRecord]) -> RasterImage {
    let mut out = image.clone();
    let (w, h) = (image.width(), image.height());
    for f in features.iter().filter(|f| f.is_finite()) {
        let pixels: Vec<(i64, i64)> = match *f {
            FeatureRecord::Corner { x, y, .. } | FeatureRecord::ShapeInstance { x, y, .. } => {
                cross(x, y).to_vec()
            }
            FeatureRecord::Line { rho, theta, .. } => draw::polar_line_points(rho, theta, w, h),
            FeatureRecord::Circle { a, b, r, .. } => {
                draw::circle_points(a.round() as i64, b.round() as i64, r.round() as i64)
            }
        };
        for (x, y) in pixels {
            out.put(x, y, 1.0);
        }
    }
    out
}
