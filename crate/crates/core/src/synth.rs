//! Synthetic test scenes with known geometry.

use std::f64::consts::TAU;

use crate::canny::EdgeMap;
use crate::draw;
use crate::error::Result;
use crate::image::RasterImage;

/// `low` left of `column`, `high` from `column` on.
pub fn vertical_step(
    width: usize,
    height: usize,
    column: usize,
    low: f64,
    high: f64,
) -> Result<RasterImage> {
    RasterImage::from_fn(width, height, |x, _| if x < column { low } else { high })
}

/// Step whose transition is centered on `column`, which takes the midpoint
/// value. The gradient then has a unique maximum column.
pub fn centered_vertical_step(
    width: usize,
    height: usize,
    column: usize,
    low: f64,
    high: f64,
) -> Result<RasterImage> {
    RasterImage::from_fn(width, height, |x, _| match x.cmp(&column) {
        std::cmp::Ordering::Less => low,
        std::cmp::Ordering::Equal => 0.5 * (low + high),
        std::cmp::Ordering::Greater => high,
    })
}

/// Bright quadrant `x ≥ vx, y ≥ vy` on a dark background.
pub fn l_corner(width: usize, height: usize, vx: usize, vy: usize) -> Result<RasterImage> {
    RasterImage::from_fn(
        width,
        height,
        |x, y| if x >= vx && y >= vy { 1.0 } else { 0.0 },
    )
}

/// Filled axis-aligned square.
pub fn square(
    width: usize,
    height: usize,
    x0: usize,
    y0: usize,
    side: usize,
) -> Result<RasterImage> {
    RasterImage::from_fn(width, height, |x, y| {
        if (x0..x0 + side).contains(&x) && (y0..y0 + side).contains(&y) {
            1.0
        } else {
            0.0
        }
    })
}

/// Filled disk of pixels whose centers lie within `r` of `(cx, cy)`.
pub fn disk(width: usize, height: usize, cx: f64, cy: f64, r: f64) -> Result<RasterImage> {
    RasterImage::from_fn(width, height, |x, y| {
        let (dx, dy) = (x as f64 - cx, y as f64 - cy);
        if dx * dx + dy * dy <= r * r {
            1.0
        } else {
            0.0
        }
    })
}

/// Irregular closed blob: radius `base · (1 + 0.25 cos 3φ + 0.15 sin 5φ)`.
pub fn leaf(width: usize, height: usize, cx: f64, cy: f64, base: f64) -> Result<RasterImage> {
    RasterImage::from_fn(width, height, |x, y| {
        let (dx, dy) = (x as f64 - cx, y as f64 - cy);
        let phi = dy.atan2(dx).rem_euclid(TAU);
        let r = base * (1.0 + 0.25 * (3.0 * phi).cos() + 0.15 * (5.0 * phi).sin());
        if dx * dx + dy * dy <= r * r {
            1.0
        } else {
            0.0
        }
    })
}

/// Midpoint-rasterized circle outline.
pub fn circle_edges(width: usize, height: usize, cx: i64, cy: i64, r: i64) -> Result<EdgeMap> {
    let mut e = EdgeMap::empty(width, height)?;
    for (x, y) in draw::circle_points(cx, cy, r) {
        e.set(x, y, true);
    }
    Ok(e)
}

/// Raster line `x·cosθ + y·sinθ = ρ` clipped to the image.
pub fn polar_line_edges(width: usize, height: usize, rho: f64, theta: f64) -> Result<EdgeMap> {
    let mut e = EdgeMap::empty(width, height)?;
    for (x, y) in draw::polar_line_points(rho, theta, width, height) {
        e.set(x, y, true);
    }
    Ok(e)
}

/// Pixels at or above `threshold` with a 4-neighbour below it (or on the
/// image border).
pub fn boundary(image: &RasterImage, threshold: f64) -> EdgeMap {
    let (w, h) = (image.width(), image.height());
    let s = image.samples();
    let on = |x: i64, y: i64| {
        x >= 0
            && y >= 0
            && (x as usize) < w
            && (y as usize) < h
            && s[y as usize * w + x as usize] >= threshold
    };
    let bits = (0..w * h)
        .map(|i| {
            let (x, y) = ((i % w) as i64, (i / w) as i64);
            on(x, y) && !(on(x - 1, y) && on(x + 1, y) && on(x, y - 1) && on(x, y + 1))
        })
        .collect();
    EdgeMap::new(w, h, bits).expect("dimensions come from an existing image")
}

/// Shifts content by `(dx, dy)`, filling uncovered pixels with `fill`.
pub fn translate(image: &RasterImage, dx: i64, dy: i64, fill: f64) -> Result<RasterImage> {
    let (w, h) = (image.width() as i64, image.height() as i64);
    RasterImage::from_fn(image.width(), image.height(), |x, y| {
        let (sx, sy) = (x as i64 - dx, y as i64 - dy);
        if (0..w).contains(&sx) && (0..h).contains(&sy) {
            image.samples()[(sy * w + sx) as usize]
        } else {
            fill
        }
    })
}

/// Pixelwise maximum of two same-sized images.
pub fn union(a: &RasterImage, b: &RasterImage) -> Result<RasterImage> {
    RasterImage::from_fn(a.width(), a.height(), |x, y| {
        a.samples()[y * a.width() + x].max(b.get(x, y).unwrap_or(0.0))
    })
}
