//! Kernels, correlation and the first/second-order edge operators.
//!
//! Kernels are applied as sliding templates (correlation, no flip). Weights
//! are used exactly as the classical operator tables print them, so the
//! Sobel pair and the Prewitt pair do not share a sign convention on `gx`.
//! Magnitude is unaffected; orientation consumers (NMS, R-tables) only rely
//! on each operator being consistent with itself.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::image::{BorderPolicy, Grid, PixelCoord, SignedPlane};
use crate::parallel;

/// Dense correlation template with an anchor cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    rows: usize,
    cols: usize,
    weights: Vec<f64>,
    anchor: PixelCoord,
}

impl Kernel {
    pub fn new(rows: usize, cols: usize, weights: Vec<f64>, anchor: PixelCoord) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidDimension {
                width: cols,
                height: rows,
            });
        }
        if weights.len() != rows * cols {
            return Err(Error::Truncated {
                expected: rows * cols,
                found: weights.len(),
            });
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::param("kernel weights must be finite"));
        }
        if anchor.x < 0 || anchor.y < 0 || anchor.x as usize >= cols || anchor.y as usize >= rows {
            return Err(Error::param(format!(
                "anchor ({}, {}) outside {cols}x{rows} kernel",
                anchor.x, anchor.y
            )));
        }
        Ok(Kernel {
            rows,
            cols,
            weights,
            anchor,
        })
    }

    /// Kernel anchored at its center cell. Both sides must be odd.
    pub fn centered(rows: usize, cols: usize, weights: Vec<f64>) -> Result<Self> {
        if rows.is_multiple_of(2) || cols.is_multiple_of(2) {
            return Err(Error::param("centered kernels need odd sides"));
        }
        Self::new(
            rows,
            cols,
            weights,
            PixelCoord::new((cols / 2) as i64, (rows / 2) as i64),
        )
    }

    fn fixed3(w: [f64; 9]) -> Self {
        Kernel {
            rows: 3,
            cols: 3,
            weights: w.to_vec(),
            anchor: PixelCoord::new(1, 1),
        }
    }

    fn fixed2(w: [f64; 4]) -> Self {
        Kernel {
            rows: 2,
            cols: 2,
            weights: w.to_vec(),
            anchor: PixelCoord::new(0, 0),
        }
    }

    pub fn identity() -> Self {
        Kernel {
            rows: 1,
            cols: 1,
            weights: vec![1.0],
            anchor: PixelCoord::new(0, 0),
        }
    }

    pub fn prewitt_x() -> Self {
        Self::fixed3([-1.0, 0.0, 1.0, -1.0, 0.0, 1.0, -1.0, 0.0, 1.0])
    }

    pub fn prewitt_y() -> Self {
        Self::fixed3([1.0, 1.0, 1.0, 0.0, 0.0, 0.0, -1.0, -1.0, -1.0])
    }

    pub fn sobel_x() -> Self {
        Self::fixed3([1.0, 0.0, -1.0, 2.0, 0.0, -2.0, 1.0, 0.0, -1.0])
    }

    pub fn sobel_y() -> Self {
        Self::fixed3([1.0, 2.0, 1.0, 0.0, 0.0, 0.0, -1.0, -2.0, -1.0])
    }

    pub fn roberts_x() -> Self {
        Self::fixed2([1.0, 0.0, 0.0, -1.0])
    }

    pub fn roberts_y() -> Self {
        Self::fixed2([0.0, -1.0, 1.0, 0.0])
    }

    pub fn laplacian(connectivity: Connectivity) -> Self {
        match connectivity {
            Connectivity::Four => Self::fixed3([0.0, -1.0, 0.0, -1.0, 4.0, -1.0, 0.0, -1.0, 0.0]),
            Connectivity::Eight => {
                Self::fixed3([-1.0, -1.0, -1.0, -1.0, 8.0, -1.0, -1.0, -1.0, -1.0])
            }
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn anchor(&self) -> PixelCoord {
        self.anchor
    }

    pub fn weight(&self, row: usize, col: usize) -> f64 {
        self.weights[row * self.cols + col]
    }
}

/// Correlates `src` with `kernel`:
/// `out(x, y) = Σ w(i, j) · src(x + j − ax, y + i − ay)`.
///
/// Evaluated as `Σ w · (v − c) + c · Σ w` with `c` the anchor pixel, so
/// zero-sum kernels give exactly 0 on flat regions. Terms are summed in
/// kernel row-major order. Interior pixels index the buffer directly; only
/// windows that leave the grid go through the border policy.
pub fn convolve2d<G: Grid + Sync>(src: &G, kernel: &Kernel, policy: BorderPolicy) -> SignedPlane {
    let (w, h) = (src.width(), src.height());
    let (ax, ay) = (kernel.anchor.x as usize, kernel.anchor.y as usize);
    let (kr, kc) = (kernel.rows, kernel.cols);
    let data = src.values();
    let weight_sum: f64 = kernel.weights.iter().sum();
    // Pixels whose full window is in range.
    let x_lo = ax;
    let x_hi = (w + ax).saturating_sub(kc - 1);
    let y_lo = ay;
    let y_hi = (h + ay).saturating_sub(kr - 1);

    let out = parallel::fill_rows(w, h, |y, row| {
        let y_inside = y >= y_lo && y < y_hi;
        for (x, out) in row.iter_mut().enumerate() {
            let center = data[y * w + x];
            let mut acc = 0.0;
            if y_inside && x >= x_lo && x < x_hi {
                let (x0, y0) = (x - ax, y - ay);
                for i in 0..kr {
                    let line = &data[(y0 + i) * w + x0..(y0 + i) * w + x0 + kc];
                    let wrow = &kernel.weights[i * kc..(i + 1) * kc];
                    for (wt, v) in wrow.iter().zip(line) {
                        acc += wt * (v - center);
                    }
                }
            } else {
                for i in 0..kr {
                    for j in 0..kc {
                        let c = PixelCoord::new(
                            x as i64 + j as i64 - ax as i64,
                            y as i64 + i as i64 - ay as i64,
                        );
                        acc += kernel.weights[i * kc + j] * (src.sample(c, policy) - center);
                    }
                }
            }
            *out = acc + center * weight_sum;
        }
    });
    SignedPlane::from_raw(w, h, out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FirstOrderKind {
    Prewitt,
    Sobel,
    Roberts,
}

impl FirstOrderKind {
    /// The `(gx, gy)` kernel pair.
    pub fn kernels(self) -> (Kernel, Kernel) {
        match self {
            FirstOrderKind::Prewitt => (Kernel::prewitt_x(), Kernel::prewitt_y()),
            FirstOrderKind::Sobel => (Kernel::sobel_x(), Kernel::sobel_y()),
            FirstOrderKind::Roberts => (Kernel::roberts_x(), Kernel::roberts_y()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Connectivity {
    Four,
    Eight,
}

/// Per-pixel gradient components with derived magnitude and orientation.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientField {
    pub gx: SignedPlane,
    pub gy: SignedPlane,
    /// `sqrt(gx² + gy²)`
    pub magnitude: SignedPlane,
    /// `atan2(gy, gx)` in `(−π, π]`, `0` where both components vanish.
    pub orientation: SignedPlane,
}

/// Two-argument arctangent normalized into `(−π, π]`.
#[inline]
pub fn orientation_of(gx: f64, gy: f64) -> f64 {
    if gx == 0.0 && gy == 0.0 {
        return 0.0;
    }
    let a = gy.atan2(gx);
    if a <= -PI {
        PI
    } else {
        a
    }
}

impl GradientField {
    pub fn from_components(gx: SignedPlane, gy: SignedPlane) -> Result<Self> {
        if (gx.width(), gx.height()) != (gy.width(), gy.height()) {
            return Err(Error::Dimension(format!(
                "gx is {}x{}, gy is {}x{}",
                gx.width(),
                gx.height(),
                gy.width(),
                gy.height()
            )));
        }
        let (w, h) = (gx.width(), gx.height());
        let pairs = gx.samples().iter().zip(gy.samples());
        let magnitude = pairs
            .clone()
            .map(|(&x, &y)| (x * x + y * y).sqrt())
            .collect();
        let orientation = pairs.map(|(&x, &y)| orientation_of(x, y)).collect();
        Ok(GradientField {
            magnitude: SignedPlane::new(w, h, magnitude)?,
            orientation: SignedPlane::from_raw(w, h, orientation),
            gx,
            gy,
        })
    }

    pub fn width(&self) -> usize {
        self.gx.width()
    }

    pub fn height(&self) -> usize {
        self.gx.height()
    }
}

fn require_fits<G: Grid>(src: &G, kernel: &Kernel) -> Result<()> {
    if src.width() < kernel.cols || src.height() < kernel.rows {
        return Err(Error::Dimension(format!(
            "{}x{} image is smaller than the {}x{} kernel",
            src.width(),
            src.height(),
            kernel.cols,
            kernel.rows
        )));
    }
    Ok(())
}

pub fn first_order_gradient<G: Grid + Sync>(
    image: &G,
    kind: FirstOrderKind,
    policy: BorderPolicy,
) -> Result<GradientField> {
    let (kx, ky) = kind.kernels();
    require_fits(image, &kx)?;
    GradientField::from_components(
        convolve2d(image, &kx, policy),
        convolve2d(image, &ky, policy),
    )
}

pub fn laplacian<G: Grid + Sync>(
    image: &G,
    connectivity: Connectivity,
    policy: BorderPolicy,
) -> Result<SignedPlane> {
    let kernel = Kernel::laplacian(connectivity);
    require_fits(image, &kernel)?;
    Ok(convolve2d(image, &kernel, policy))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::RasterImage;
    use proptest::prelude::*;

    fn naive(src: &RasterImage, k: &Kernel, policy: BorderPolicy) -> Vec<f64> {
        let mut out = Vec::new();
        for y in 0..src.height() as i64 {
            for x in 0..src.width() as i64 {
                let mut acc = 0.0;
                for i in 0..k.rows() as i64 {
                    for j in 0..k.cols() as i64 {
                        let c = PixelCoord::new(x + j - k.anchor().x, y + i - k.anchor().y);
                        acc += k.weight(i as usize, j as usize) * src.sample(c, policy);
                    }
                }
                out.push(acc);
            }
        }
        out
    }

    fn step(w: usize, h: usize) -> RasterImage {
        RasterImage::from_fn(w, h, |x, _| if x >= w / 2 { 1.0 } else { 0.0 }).unwrap()
    }

    #[test]
    fn kernel_validation() {
        assert!(Kernel::new(2, 2, vec![1.0; 3], PixelCoord::new(0, 0)).is_err());
        assert!(Kernel::new(2, 2, vec![1.0; 4], PixelCoord::new(2, 0)).is_err());
        assert!(Kernel::new(1, 1, vec![f64::NAN], PixelCoord::new(0, 0)).is_err());
        assert!(Kernel::centered(2, 3, vec![0.0; 6]).is_err());
    }

    #[test]
    fn identity_kernel_copies() {
        let img = RasterImage::from_fn(5, 4, |x, y| (x + 2 * y) as f64 / 20.0).unwrap();
        let out = convolve2d(&img, &Kernel::identity(), BorderPolicy::Zero);
        assert_eq!(out.samples(), img.samples());
    }

    #[test]
    fn sobel_step_is_four_times_height() {
        let img = step(10, 8);
        let g = first_order_gradient(&img, FirstOrderKind::Sobel, BorderPolicy::Replicate).unwrap();
        for y in 0..8 {
            assert_eq!(g.gx.at(4, y).abs(), 4.0);
            assert_eq!(g.gx.at(5, y).abs(), 4.0);
            assert_eq!(g.gx.at(1, y), 0.0);
            assert_eq!(g.gy.at(4, y), 0.0);
        }
        let p =
            first_order_gradient(&img, FirstOrderKind::Prewitt, BorderPolicy::Replicate).unwrap();
        assert_eq!(p.gx.at(4, 3).abs(), 3.0);
    }

    #[test]
    fn roberts_on_corner_pixel() {
        let img = RasterImage::new(2, 2, vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        let g = first_order_gradient(&img, FirstOrderKind::Roberts, BorderPolicy::Zero).unwrap();
        assert_eq!(g.gx.at(0, 0), 1.0);
        assert_eq!(g.gy.at(0, 0), 0.0);
    }

    #[test]
    fn too_small_images_are_rejected() {
        let img = RasterImage::filled(2, 5, 0.5).unwrap();
        assert!(matches!(
            first_order_gradient(&img, FirstOrderKind::Sobel, BorderPolicy::Zero),
            Err(Error::Dimension(_))
        ));
        assert!(first_order_gradient(&img, FirstOrderKind::Roberts, BorderPolicy::Zero).is_ok());
        assert!(laplacian(&img, Connectivity::Four, BorderPolicy::Zero).is_err());
    }

    #[test]
    fn laplacian_impulse_response() {
        let img =
            RasterImage::from_fn(5, 5, |x, y| if (x, y) == (2, 2) { 1.0 } else { 0.0 }).unwrap();
        let out = laplacian(&img, Connectivity::Four, BorderPolicy::Zero).unwrap();
        for y in 0..5 {
            for x in 0..5 {
                let expect = match (x as i32 - 2, y as i32 - 2) {
                    (0, 0) => 4.0,
                    (0, 1) | (0, -1) | (1, 0) | (-1, 0) => -1.0,
                    _ => 0.0,
                };
                assert_eq!(out.at(x, y), expect, "({x},{y})");
            }
        }
    }

    #[test]
    fn orientation_range_and_zero() {
        assert_eq!(orientation_of(0.0, 0.0), 0.0);
        assert_eq!(orientation_of(-0.0, -0.0), 0.0);
        assert_eq!(orientation_of(-1.0, -0.0), PI);
        assert_eq!(orientation_of(-1.0, 0.0), PI);
        assert!((orientation_of(0.0, 1.0) - PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn sequential_matches_parallel() {
        let img =
            RasterImage::from_fn(40, 33, |x, y| ((x * 31 + y * 17) % 23) as f64 / 22.0).unwrap();
        let k = Kernel::sobel_x();
        let par = convolve2d(&img, &k, BorderPolicy::Reflect);
        crate::parallel::set_sequential(true);
        let seq = convolve2d(&img, &k, BorderPolicy::Reflect);
        crate::parallel::set_sequential(false);
        assert_eq!(par, seq);
    }

    fn image_strategy() -> impl Strategy<Value = RasterImage> {
        (3usize..14, 3usize..14).prop_flat_map(|(w, h)| {
            proptest::collection::vec(0.0f64..=1.0, w * h)
                .prop_map(move |s| RasterImage::new(w, h, s).unwrap())
        })
    }

    fn policy_strategy() -> impl Strategy<Value = BorderPolicy> {
        prop_oneof![
            Just(BorderPolicy::Replicate),
            Just(BorderPolicy::Reflect),
            Just(BorderPolicy::Zero)
        ]
    }

    proptest! {
        #[test]
        fn matches_naive_correlation(img in image_strategy(), policy in policy_strategy()) {
            for k in [Kernel::sobel_x(), Kernel::prewitt_y(), Kernel::roberts_y(), Kernel::laplacian(Connectivity::Eight)] {
                let fast = convolve2d(&img, &k, policy);
                for (a, b) in fast.samples().iter().zip(naive(&img, &k, policy)) {
                    prop_assert!((a - b).abs() <= 1e-12);
                }
            }
        }

        #[test]
        fn constant_images_have_no_gradient(c in 0.0f64..=1.0, w in 3usize..10, h in 3usize..10, policy in prop_oneof![Just(BorderPolicy::Replicate), Just(BorderPolicy::Reflect)]) {
            let img = RasterImage::filled(w, h, c).unwrap();
            for kind in [FirstOrderKind::Prewitt, FirstOrderKind::Sobel, FirstOrderKind::Roberts] {
                let g = first_order_gradient(&img, kind, policy).unwrap();
                prop_assert!(g.magnitude.samples().iter().all(|&m| m == 0.0));
            }
        }

        #[test]
        fn ramp_response_is_constant_inside(slope in 0.001f64..0.05, w in 5usize..20, h in 3usize..10) {
            let img = RasterImage::from_fn(w, h, |x, _| x as f64 * slope).unwrap();
            for kind in [FirstOrderKind::Prewitt, FirstOrderKind::Sobel] {
                let g = first_order_gradient(&img, kind, BorderPolicy::Replicate).unwrap();
                let reference = g.gx.at(1, 0);
                for y in 0..h {
                    for x in 1..w - 1 {
                        prop_assert!((g.gx.at(x, y) - reference).abs() < 1e-12);
                    }
                }
            }
        }

        #[test]
        fn sobel_step_dominates_prewitt(height in 0.01f64..=1.0, w in 4usize..16) {
            let img = RasterImage::from_fn(w, 6, |x, _| if x >= w / 2 { height } else { 0.0 }).unwrap();
            let s = first_order_gradient(&img, FirstOrderKind::Sobel, BorderPolicy::Replicate).unwrap();
            let p = first_order_gradient(&img, FirstOrderKind::Prewitt, BorderPolicy::Replicate).unwrap();
            for y in 0..6 {
                prop_assert!(s.gx.at(w / 2, y).abs() >= p.gx.at(w / 2, y).abs());
            }
        }

        #[test]
        fn negated_gradient_keeps_magnitude(gx in -5.0f64..5.0, gy in -5.0f64..5.0) {
            let a = SignedPlane::new(1, 1, vec![gx]).unwrap();
            let b = SignedPlane::new(1, 1, vec![gy]).unwrap();
            let f = GradientField::from_components(a.map(|v| v), b.map(|v| v)).unwrap();
            let g = GradientField::from_components(a.map(|v| -v), b.map(|v| -v)).unwrap();
            prop_assert_eq!(f.magnitude.at(0, 0), g.magnitude.at(0, 0));
            if f.magnitude.at(0, 0) > 0.0 {
                let d = (f.orientation.at(0, 0) - g.orientation.at(0, 0)).rem_euclid(2.0 * PI);
                prop_assert!((d - PI).abs() < 1e-12);
            }
        }

        #[test]
        fn field_invariants_hold(img in image_strategy()) {
            let g = first_order_gradient(&img, FirstOrderKind::Sobel, BorderPolicy::Reflect).unwrap();
            for i in 0..g.gx.samples().len() {
                let (x, y) = (g.gx.samples()[i], g.gy.samples()[i]);
                prop_assert!((g.magnitude.samples()[i] - (x * x + y * y).sqrt()).abs() < 1e-9);
                let o = g.orientation.samples()[i];
                prop_assert!(o > -PI && o <= PI);
                if x != 0.0 || y != 0.0 {
                    prop_assert!((o.sin() * g.magnitude.samples()[i] - y).abs() < 1e-9);
                    prop_assert!((o.cos() * g.magnitude.samples()[i] - x).abs() < 1e-9);
                }
            }
        }
    }
}
