//! Noise suppression applied before differentiation.

use crate::error::{Error, Result};
use crate::gradient::{convolve2d, Kernel};
use crate::image::{BorderPolicy, Grid, PixelCoord, RasterImage, SignedPlane};
use crate::parallel;

/// Guards the Wiener gain against division by a vanishing local variance.
pub const WIENER_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterKind {
    Mean,
    Median,
    Gaussian,
    AdaptiveWiener,
    Hybrid,
}

/// Noise power handed to the adaptive Wiener filter.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum NoiseVariance {
    Known(f64),
    /// Mean of all local variances.
    #[default]
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterSpec {
    pub kind: FilterKind,
    /// Window half-width; the window is `(2r+1)²`.
    pub radius: usize,
    /// Gaussian only.
    pub sigma: f64,
    /// Adaptive Wiener only.
    pub noise_variance: NoiseVariance,
    pub policy: BorderPolicy,
}

impl FilterSpec {
    pub fn new(kind: FilterKind) -> Self {
        FilterSpec {
            kind,
            radius: 1,
            sigma: 1.0,
            noise_variance: NoiseVariance::Auto,
            policy: BorderPolicy::Replicate,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind != FilterKind::Gaussian {
            check_radius(self.radius)?;
        }
        if self.kind == FilterKind::Gaussian {
            check_sigma(self.sigma)?;
        }
        if let NoiseVariance::Known(n) = self.noise_variance {
            if !(n.is_finite() && n >= 0.0) {
                return Err(Error::param(format!("noise variance {n} must be >= 0")));
            }
        }
        Ok(())
    }

    pub fn apply(&self, image: &RasterImage) -> Result<RasterImage> {
        self.validate()?;
        match self.kind {
            FilterKind::Mean => mean_filter(image, self.radius, self.policy),
            FilterKind::Median => median_filter(image, self.radius, self.policy),
            FilterKind::Gaussian => gaussian_blur(image, self.sigma, self.policy),
            FilterKind::AdaptiveWiener => {
                adaptive_wiener_filter(image, self.radius, self.noise_variance)
            }
            FilterKind::Hybrid => hybrid_filter(image, self.radius),
        }
    }
}

fn check_radius(radius: usize) -> Result<()> {
    if radius == 0 {
        return Err(Error::param("filter radius must be at least 1"));
    }
    Ok(())
}

fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::param(format!("sigma {sigma} must be positive")));
    }
    Ok(())
}

/// Collects the `(2r+1)²` window around `(x, y)` in row-major order.
#[inline]
fn window<G: Grid>(
    src: &G,
    x: usize,
    y: usize,
    radius: usize,
    policy: BorderPolicy,
    out: &mut Vec<f64>,
) {
    out.clear();
    let r = radius as i64;
    for dy in -r..=r {
        for dx in -r..=r {
            out.push(src.sample(PixelCoord::new(x as i64 + dx, y as i64 + dy), policy));
        }
    }
}

fn map_windows<T, F>(image: &RasterImage, radius: usize, policy: BorderPolicy, f: F) -> Vec<T>
where
    T: Default + Clone + Send,
    F: Fn(&mut Vec<f64>) -> T + Sync + Send,
{
    let side = 2 * radius + 1;
    parallel::fill_rows(image.width(), image.height(), |y, row| {
        let mut buf = Vec::with_capacity(side * side);
        for (x, out) in row.iter_mut().enumerate() {
            window(image, x, y, radius, policy, &mut buf);
            *out = f(&mut buf);
        }
    })
}

/// Arithmetic mean of each window.
pub fn mean_filter(
    image: &RasterImage,
    radius: usize,
    policy: BorderPolicy,
) -> Result<RasterImage> {
    check_radius(radius)?;
    let out = map_windows(image, radius, policy, |w| {
        w.iter().sum::<f64>() / w.len() as f64
    });
    Ok(RasterImage::from_clamped(
        image.width(),
        image.height(),
        out,
    ))
}

/// Median of each window. Windows have odd length, so the median is a sample.
pub fn median_filter(
    image: &RasterImage,
    radius: usize,
    policy: BorderPolicy,
) -> Result<RasterImage> {
    check_radius(radius)?;
    let out = map_windows(image, radius, policy, |w| {
        let mid = w.len() / 2;
        *w.select_nth_unstable_by(mid, f64::total_cmp).1
    });
    Ok(RasterImage::from_clamped(
        image.width(),
        image.height(),
        out,
    ))
}

/// Normalized `(2⌈3σ⌉+1)²` Gaussian, anchored at the center.
pub fn gaussian_kernel(sigma: f64) -> Result<Kernel> {
    check_sigma(sigma)?;
    let half = (3.0 * sigma).ceil() as i64;
    let side = (2 * half + 1) as usize;
    let denom = 2.0 * sigma * sigma;
    let mut weights = Vec::with_capacity(side * side);
    for dy in -half..=half {
        for dx in -half..=half {
            weights.push((-((dx * dx + dy * dy) as f64) / denom).exp());
        }
    }
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    Kernel::centered(side, side, weights)
}

pub fn gaussian_blur(image: &RasterImage, sigma: f64, policy: BorderPolicy) -> Result<RasterImage> {
    let kernel = gaussian_kernel(sigma)?;
    let out = convolve2d(image, &kernel, policy);
    Ok(RasterImage::from_clamped(
        image.width(),
        image.height(),
        out.into_samples(),
    ))
}

/// Gaussian blur of an unbounded plane (no clamping).
pub fn gaussian_blur_plane(
    plane: &SignedPlane,
    sigma: f64,
    policy: BorderPolicy,
) -> Result<SignedPlane> {
    let kernel = gaussian_kernel(sigma)?;
    Ok(convolve2d(plane, &kernel, policy))
}

/// Window mean and population variance, both over the same samples.
#[inline]
pub(crate) fn mean_variance(w: &[f64]) -> (f64, f64) {
    let n = w.len() as f64;
    let mean = w.iter().sum::<f64>() / n;
    let var = w.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var)
}

/// Locally adaptive Wiener smoother.
///
/// Per pixel, with local mean `μ` and variance `v` over the window and noise
/// power `n`: `out = μ + max(0, v − n) / max(v, ε) · (in − μ)`. Written as
/// `g·in + (1 − g)·μ` so a unit gain returns the input bit for bit.
pub fn adaptive_wiener_filter(
    image: &RasterImage,
    radius: usize,
    noise_variance: NoiseVariance,
) -> Result<RasterImage> {
    check_radius(radius)?;
    let stats = map_windows(image, radius, BorderPolicy::Replicate, |w| mean_variance(w));
    let noise = match noise_variance {
        NoiseVariance::Known(n) => {
            if !(n.is_finite() && n >= 0.0) {
                return Err(Error::param(format!("noise variance {n} must be >= 0")));
            }
            n
        }
        NoiseVariance::Auto => stats.iter().map(|s| s.1).sum::<f64>() / stats.len() as f64,
    };
    let out = image
        .samples()
        .iter()
        .zip(&stats)
        .map(|(&input, &(mean, var))| wiener_pixel(input, mean, var, noise))
        .collect();
    Ok(RasterImage::from_clamped(
        image.width(),
        image.height(),
        out,
    ))
}

#[inline]
pub(crate) fn wiener_pixel(input: f64, mean: f64, var: f64, noise: f64) -> f64 {
    let gain = (var - noise).max(0.0) / var.max(WIENER_EPSILON);
    gain * input + (1.0 - gain) * mean
}

/// Median then adaptive Wiener with automatic noise estimate.
pub fn hybrid_filter(image: &RasterImage, radius: usize) -> Result<RasterImage> {
    let despeckled = median_filter(image, radius, BorderPolicy::Replicate)?;
    adaptive_wiener_filter(&despeckled, radius, NoiseVariance::Auto)
}
