//! Harris corner detection over the Gaussian-windowed structure tensor.

use crate::canny::ThresholdMode;
use crate::error::{Error, Result};
use crate::filters::gaussian_blur_plane;
use crate::gradient::{first_order_gradient, FirstOrderKind, GradientField};
use crate::image::{BorderPolicy, Grid, PixelCoord, RasterImage, SignedPlane};

/// Smoothed gradient products `Σw·gx²`, `Σw·gx·gy`, `Σw·gy²`.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorField {
    pub ixx: SignedPlane,
    pub ixy: SignedPlane,
    pub iyy: SignedPlane,
}

impl TensorField {
    pub fn width(&self) -> usize {
        self.ixx.width()
    }

    pub fn height(&self) -> usize {
        self.ixx.height()
    }

    /// `(ixx, ixy, iyy)` at an in-range pixel.
    pub fn entries(&self, x: usize, y: usize) -> (f64, f64, f64) {
        (self.ixx.at(x, y), self.ixy.at(x, y), self.iyy.at(x, y))
    }
}

/// Sign applied to the trace term of the response.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ResponseVariant {
    /// `det − k·trace²`
    #[default]
    Standard,
    /// `det + k·trace²`, kept only for side-by-side comparison; it rewards
    /// straight edges as well as corners.
    PlusTrace,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarrisParams {
    pub k: f64,
    pub window_sigma: f64,
    pub threshold: f64,
    pub threshold_mode: ThresholdMode,
    pub nms_radius: usize,
}

impl Default for HarrisParams {
    fn default() -> Self {
        HarrisParams {
            k: 0.04,
            window_sigma: 1.0,
            threshold: 0.01,
            threshold_mode: ThresholdMode::RatioOfMax,
            nms_radius: 1,
        }
    }
}

impl HarrisParams {
    pub fn validate(&self) -> Result<()> {
        check_k(self.k)?;
        if !(self.window_sigma.is_finite() && self.window_sigma > 0.0) {
            return Err(Error::param(format!(
                "window sigma {} must be positive",
                self.window_sigma
            )));
        }
        if !self.threshold.is_finite() {
            return Err(Error::param("threshold must be finite"));
        }
        if self.nms_radius == 0 {
            return Err(Error::param("nms radius must be at least 1"));
        }
        Ok(())
    }
}

fn check_k(k: f64) -> Result<()> {
    if !(k > 0.0 && k < 0.25) {
        return Err(Error::param(format!("k = {k} outside (0, 0.25)")));
    }
    Ok(())
}

/// One detected corner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Corner {
    pub coord: PixelCoord,
    pub response: f64,
}

/// Corners by descending response, ties in row-major order.
pub type CornerList = Vec<Corner>;

pub fn structure_tensor(field: &GradientField, window_sigma: f64) -> Result<TensorField> {
    let products = |f: fn(f64, f64) -> f64| {
        let samples = field
            .gx
            .samples()
            .iter()
            .zip(field.gy.samples())
            .map(|(&x, &y)| f(x, y))
            .collect();
        SignedPlane::new(field.width(), field.height(), samples)
    };
    let policy = BorderPolicy::Replicate;
    Ok(TensorField {
        ixx: gaussian_blur_plane(&products(|x, _| x * x)?, window_sigma, policy)?,
        ixy: gaussian_blur_plane(&products(|x, y| x * y)?, window_sigma, policy)?,
        iyy: gaussian_blur_plane(&products(|_, y| y * y)?, window_sigma, policy)?,
    })
}

/// Eigenvalues `(λ1, λ2)`, `λ1 ≥ λ2`, of `[[ixx, ixy], [ixy, iyy]]`.
#[inline]
pub fn symmetric_eigenvalues(ixx: f64, ixy: f64, iyy: f64) -> (f64, f64) {
    let trace = ixx + iyy;
    let root = ((ixx - iyy) * (ixx - iyy) + 4.0 * ixy * ixy).sqrt();
    ((trace + root) / 2.0, (trace - root) / 2.0)
}

pub fn tensor_eigenvalues(tensor: &TensorField, coord: PixelCoord) -> Result<(f64, f64)> {
    if !tensor.ixx.contains(coord) {
        return Err(Error::OutOfBounds {
            x: coord.x,
            y: coord.y,
            width: tensor.width(),
            height: tensor.height(),
        });
    }
    let (a, b, c) = tensor.entries(coord.x as usize, coord.y as usize);
    Ok(symmetric_eigenvalues(a, b, c))
}

pub fn harris_response(tensor: &TensorField, k: f64) -> Result<SignedPlane> {
    harris_response_with(tensor, k, ResponseVariant::Standard)
}

pub fn harris_response_with(
    tensor: &TensorField,
    k: f64,
    variant: ResponseVariant,
) -> Result<SignedPlane> {
    check_k(k)?;
    let sign = match variant {
        ResponseVariant::Standard => -1.0,
        ResponseVariant::PlusTrace => 1.0,
    };
    let samples = tensor
        .ixx
        .samples()
        .iter()
        .zip(tensor.ixy.samples())
        .zip(tensor.iyy.samples())
        .map(|((&a, &b), &c)| {
            let trace = a + c;
            (a * c - b * b) + sign * k * trace * trace
        })
        .collect();
    SignedPlane::new(tensor.width(), tensor.height(), samples)
}

/// Threshold and suppress a response plane.
///
/// A candidate (response strictly above the effective threshold) survives
/// when it beats every other candidate within Chebyshev distance
/// `nms_radius`; equal responses go to the earlier pixel in row-major order.
pub fn detect_corners(response: &SignedPlane, params: &HarrisParams) -> Result<CornerList> {
    if params.nms_radius == 0 {
        return Err(Error::param("nms radius must be at least 1"));
    }
    let threshold = match params.threshold_mode {
        ThresholdMode::Absolute => params.threshold,
        ThresholdMode::RatioOfMax => {
            let max = response.max();
            if max <= 0.0 {
                return Ok(Vec::new());
            }
            params.threshold * max
        }
    };
    let (w, h) = (response.width(), response.height());
    let r = params.nms_radius as i64;
    let values = response.samples();
    let is_candidate = |i: usize| values[i] > threshold;

    let mut corners = Vec::new();
    for y in 0..h as i64 {
        for x in 0..w as i64 {
            let i = (y as usize) * w + x as usize;
            if !is_candidate(i) {
                continue;
            }
            let v = values[i];
            let mut survives = true;
            'scan: for ny in (y - r).max(0)..=(y + r).min(h as i64 - 1) {
                for nx in (x - r).max(0)..=(x + r).min(w as i64 - 1) {
                    let j = (ny as usize) * w + nx as usize;
                    if j == i || !is_candidate(j) {
                        continue;
                    }
                    let u = values[j];
                    if u > v || (u == v && j < i) {
                        survives = false;
                        break 'scan;
                    }
                }
            }
            if survives {
                corners.push(Corner {
                    coord: PixelCoord::new(x, y),
                    response: v,
                });
            }
        }
    }
    // Row-major order is already in place; a stable sort keeps it for ties.
    corners.sort_by(|a, b| b.response.total_cmp(&a.response));
    Ok(corners)
}

/// Sobel gradient, tensor, response and detection in one call.
pub fn harris_corners(image: &RasterImage, params: &HarrisParams) -> Result<CornerList> {
    params.validate()?;
    let field = first_order_gradient(image, FirstOrderKind::Sobel, BorderPolicy::Replicate)?;
    let tensor = structure_tensor(&field, params.window_sigma)?;
    let response = harris_response(&tensor, params.k)?;
    detect_corners(&response, params)
}

/// Response plane of an image with the standard pipeline.
pub fn harris_response_image(
    image: &RasterImage,
    k: f64,
    window_sigma: f64,
) -> Result<SignedPlane> {
    let field = first_order_gradient(image, FirstOrderKind::Sobel, BorderPolicy::Replicate)?;
    harris_response(&structure_tensor(&field, window_sigma)?, k)
}
