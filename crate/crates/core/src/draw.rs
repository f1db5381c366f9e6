//! Integer rasterization of lines and circles.

/// Pixels of the segment between two integer points (Bresenham).
pub fn line_points(x0: i64, y0: i64, x1: i64, y1: i64) -> Vec<(i64, i64)> {
    let (dx, dy) = ((x1 - x0).abs(), -(y1 - y0).abs());
    let (sx, sy) = (if x0 < x1 { 1 } else { -1 }, if y0 < y1 { 1 } else { -1 });
    let (mut x, mut y, mut err) = (x0, y0, dx + dy);
    let mut out = Vec::with_capacity((dx.max(-dy) + 1) as usize);
    loop {
        out.push((x, y));
        if x == x1 && y == y1 {
            return out;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x += sx;
        }
        if e2 <= dx {
            err += dx;
            y += sy;
        }
    }
}

/// Pixels of a circle by the midpoint algorithm, deduplicated and sorted.
pub fn circle_points(cx: i64, cy: i64, r: i64) -> Vec<(i64, i64)> {
    if r < 0 {
        return Vec::new();
    }
    let (mut x, mut y, mut d) = (0i64, r, 1 - r);
    let mut out = Vec::new();
    while x <= y {
        for (px, py) in [
            (x, y),
            (y, x),
            (-x, y),
            (-y, x),
            (x, -y),
            (y, -x),
            (-x, -y),
            (-y, -x),
        ] {
            out.push((cx + px, cy + py));
        }
        x += 1;
        if d < 0 {
            d += 2 * x + 1;
        } else {
            y -= 1;
            d += 2 * (x - y) + 1;
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// End points of `x·cosθ + y·sinθ = ρ` inside `[0, w−1] × [0, h−1]`, or
/// `None` if the line misses the rectangle.
pub fn clip_polar_line(
    rho: f64,
    theta: f64,
    width: usize,
    height: usize,
) -> Option<((f64, f64), (f64, f64))> {
    if width == 0 || height == 0 {
        return None;
    }
    let (c, s) = (theta.cos(), theta.sin());
    let (xmax, ymax) = (width as f64 - 1.0, height as f64 - 1.0);
    const EPS: f64 = 1e-9;
    let mut hits: Vec<(f64, f64)> = Vec::new();
    if s.abs() > EPS {
        for x in [0.0, xmax] {
            let y = (rho - x * c) / s;
            if (-EPS..=ymax + EPS).contains(&y) {
                hits.push((x, y.clamp(0.0, ymax)));
            }
        }
    }
    if c.abs() > EPS {
        for y in [0.0, ymax] {
            let x = (rho - y * s) / c;
            if (-EPS..=xmax + EPS).contains(&x) {
                hits.push((x.clamp(0.0, xmax), y));
            }
        }
    }
    let first = *hits.first()?;
    let mut best = (first, first);
    let mut far = -1.0;
    for (i, &a) in hits.iter().enumerate() {
        for &b in &hits[i..] {
            let d = (a.0 - b.0).powi(2) + (a.1 - b.1).powi(2);
            if d > far {
                far = d;
                best = (a, b);
            }
        }
    }
    Some(best)
}

/// Raster pixels of a polar line clipped to the image.
pub fn polar_line_points(rho: f64, theta: f64, width: usize, height: usize) -> Vec<(i64, i64)> {
    match clip_polar_line(rho, theta, width, height) {
        Some(((x0, y0), (x1, y1))) => line_points(
            x0.round() as i64,
            y0.round() as i64,
            x1.round() as i64,
            y1.round() as i64,
        ),
        None => Vec::new(),
    }
}
