//! Raster containers and border handling.
//!
//! Every stage of the toolkit exchanges single-channel grids. Intensities live
//! in [`RasterImage`] as normalized `f64` in `[0, 1]`; derivative responses,
//! orientations and detector scores live in [`SignedPlane`], which only
//! requires finite values. Both implement [`Grid`], so kernels and window
//! operators run over either.

use crate::error::{Error, Result};

/// Integer pixel coordinate. Origin top-left, `x` grows right, `y` grows down.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct PixelCoord {
    pub x: i64,
    pub y: i64,
}

impl PixelCoord {
    pub const fn new(x: i64, y: i64) -> Self {
        PixelCoord { x, y }
    }

    /// Largest of the absolute coordinate differences.
    pub fn chebyshev(self, other: PixelCoord) -> i64 {
        (self.x - other.x).abs().max((self.y - other.y).abs())
    }
}

/// How reads outside the grid are resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BorderPolicy {
    /// Clamp the coordinate to the nearest edge pixel.
    #[default]
    Replicate,
    /// Mirror about the border pixel without repeating it (`-1 -> 1`).
    Reflect,
    /// Out-of-range reads are `0.0`.
    Zero,
}

impl BorderPolicy {
    /// Maps a possibly out-of-range index onto `0..len`, or `None` when the
    /// read should produce zero.
    #[inline]
    pub fn resolve(self, index: i64, len: usize) -> Option<usize> {
        let n = len as i64;
        if (0..n).contains(&index) {
            return Some(index as usize);
        }
        match self {
            BorderPolicy::Zero => None,
            BorderPolicy::Replicate => Some(index.clamp(0, n - 1) as usize),
            BorderPolicy::Reflect => {
                if n == 1 {
                    return Some(0);
                }
                let period = 2 * (n - 1);
                let m = index.rem_euclid(period);
                Some(if m < n { m } else { period - m } as usize)
            }
        }
    }
}

/// Read access shared by every row-major plane in the crate.
pub trait Grid {
    fn width(&self) -> usize;
    fn height(&self) -> usize;
    fn values(&self) -> &[f64];

    /// Stored value at an in-range position.
    #[inline]
    fn at(&self, x: usize, y: usize) -> f64 {
        self.values()[y * self.width() + x]
    }

    /// Value at any integer coordinate, resolved through `policy`.
    #[inline]
    fn sample(&self, coord: PixelCoord, policy: BorderPolicy) -> f64 {
        match (
            policy.resolve(coord.x, self.width()),
            policy.resolve(coord.y, self.height()),
        ) {
            (Some(x), Some(y)) => self.at(x, y),
            _ => 0.0,
        }
    }

    fn contains(&self, coord: PixelCoord) -> bool {
        coord.x >= 0
            && coord.y >= 0
            && (coord.x as usize) < self.width()
            && (coord.y as usize) < self.height()
    }
}

fn check_dims(width: usize, height: usize, len: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidDimension { width, height });
    }
    let expected = width
        .checked_mul(height)
        .ok_or(Error::InvalidDimension { width, height })?;
    if len != expected {
        return Err(Error::Truncated {
            expected,
            found: len,
        });
    }
    Ok(())
}

/// Single-channel intensity image with samples in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RasterImage {
    width: usize,
    height: usize,
    samples: Vec<f64>,
}

impl RasterImage {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn new(width: usize, height: usize, samples: Vec<f64>) -> Result<Self> {
        check_dims(width, height, samples.len())?;
        if let Some((index, &value)) = samples
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && (0.0..=1.0).contains(*v)))
        {
            return Err(Error::InvalidSample { index, value });
        }
        Ok(RasterImage {
            width,
            height,
            samples,
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    /// Builds an image from a per-pixel function; values are clamped into
    /// `[0, 1]` and NaN becomes `0`.
    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self> {
        check_dims(width, height, width * height)?;
        let mut samples = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                samples.push(clamp_unit(f(x, y)));
            }
        }
        Ok(RasterImage {
            width,
            height,
            samples,
        })
    }

    /// Clamps arbitrary values into range. Caller guarantees dimensions.
    pub(crate) fn from_clamped(width: usize, height: usize, mut samples: Vec<f64>) -> Self {
        debug_assert_eq!(samples.len(), width * height);
        for v in &mut samples {
            *v = clamp_unit(*v);
        }
        RasterImage {
            width,
            height,
            samples,
        }
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn get(&self, x: usize, y: usize) -> Option<f64> {
        (x < self.width && y < self.height).then(|| self.samples[y * self.width + x])
    }

    /// Sets a pixel if it lies inside the image. Value is clamped.
    pub fn put(&mut self, x: i64, y: i64, value: f64) -> bool {
        if x < 0 || y < 0 || x as usize >= self.width || y as usize >= self.height {
            return false;
        }
        self.samples[y as usize * self.width + x as usize] = clamp_unit(value);
        true
    }

    /// Multiplies every sample by `factor`, clamping into range.
    pub fn scaled(&self, factor: f64) -> RasterImage {
        RasterImage::from_clamped(
            self.width,
            self.height,
            self.samples.iter().map(|v| v * factor).collect(),
        )
    }

    pub fn min_max(&self) -> (f64, f64) {
        min_max(&self.samples)
    }
}

impl Grid for RasterImage {
    fn width(&self) -> usize {
        self.width
    }
    fn height(&self) -> usize {
        self.height
    }
    fn values(&self) -> &[f64] {
        &self.samples
    }
}

#[inline]
fn clamp_unit(v: f64) -> f64 {
    if v.is_nan() {
        0.0
    } else {
        v.clamp(0.0, 1.0)
    }
}

fn min_max(values: &[f64]) -> (f64, f64) {
    values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        })
}

/// Row-major plane of finite signed values.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedPlane {
    width: usize,
    height: usize,
    samples: Vec<f64>,
}

impl SignedPlane {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn new(width: usize, height: usize, samples: Vec<f64>) -> Result<Self> {
        check_dims(width, height, samples.len())?;
        if let Some((index, &value)) = samples.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidSample { index, value });
        }
        Ok(SignedPlane {
            width,
            height,
            samples,
        })
    }

    pub fn zeros(width: usize, height: usize) -> Result<Self> {
        Self::new(width, height, vec![0.0; width * height])
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self> {
        let mut samples = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                samples.push(f(x, y));
            }
        }
        Self::new(width, height, samples)
    }

    /// Internal constructor for buffers produced from finite arithmetic.
    pub(crate) fn from_raw(width: usize, height: usize, samples: Vec<f64>) -> Self {
        debug_assert_eq!(samples.len(), width * height);
        debug_assert!(samples.iter().all(|v| v.is_finite()));
        SignedPlane {
            width,
            height,
            samples,
        }
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn get(&self, x: usize, y: usize) -> Option<f64> {
        (x < self.width && y < self.height).then(|| self.samples[y * self.width + x])
    }

    pub fn min_max(&self) -> (f64, f64) {
        min_max(&self.samples)
    }

    /// Largest value in the plane.
    pub fn max(&self) -> f64 {
        self.min_max().1
    }

    /// Pixel coordinate of the largest value; ties go to the first pixel in
    /// row-major order.
    pub fn argmax(&self) -> PixelCoord {
        let mut best = 0;
        for (i, &v) in self.samples.iter().enumerate() {
            if v > self.samples[best] {
                best = i;
            }
        }
        PixelCoord::new((best % self.width) as i64, (best / self.width) as i64)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> SignedPlane {
        SignedPlane::from_raw(
            self.width,
            self.height,
            self.samples.iter().map(|&v| f(v)).collect(),
        )
    }

    /// Absolute values scaled so the largest magnitude maps to `1.0`. An
    /// all-zero plane maps to an all-zero image.
    pub fn to_normalized_image(&self) -> RasterImage {
        let peak = self.samples.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let samples = if peak > 0.0 {
            self.samples.iter().map(|v| v.abs() / peak).collect()
        } else {
            vec![0.0; self.samples.len()]
        };
        RasterImage::from_clamped(self.width, self.height, samples)
    }
}

impl Grid for SignedPlane {
    fn width(&self) -> usize {
        self.width
    }
    fn height(&self) -> usize {
        self.height
    }
    fn values(&self) -> &[f64] {
        &self.samples
    }
}

impl From<&RasterImage> for SignedPlane {
    fn from(img: &RasterImage) -> Self {
        SignedPlane::from_raw(img.width, img.height, img.samples.clone())
    }
}
