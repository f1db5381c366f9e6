//! Canny edge detection: blur, Sobel gradient, non-maximum suppression,
//! double threshold and hysteresis tracking.

use std::collections::VecDeque;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::filters::gaussian_blur;
use crate::gradient::{first_order_gradient, FirstOrderKind, GradientField};
use crate::image::{BorderPolicy, Grid, RasterImage, SignedPlane};
use crate::parallel;

/// How numeric thresholds are interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ThresholdMode {
    #[default]
    Absolute,
    /// Thresholds are fractions of the plane maximum.
    RatioOfMax,
}

/// Which weak pixels hysteresis promotes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HysteresisMode {
    /// Weak pixels 8-connected to a strong pixel through any chain of
    /// weak/strong pixels.
    #[default]
    FloodFill,
    /// Weak pixels with a strong pixel among their eight direct neighbours.
    OneHop,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CannyParams {
    /// Pre-blur standard deviation.
    pub sigma: f64,
    pub low: f64,
    pub high: f64,
    pub mode: ThresholdMode,
    pub hysteresis: HysteresisMode,
}

impl Default for CannyParams {
    fn default() -> Self {
        CannyParams {
            sigma: 1.4,
            low: 0.1,
            high: 0.3,
            mode: ThresholdMode::RatioOfMax,
            hysteresis: HysteresisMode::FloodFill,
        }
    }
}

impl CannyParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(Error::param(format!(
                "sigma {} must be positive",
                self.sigma
            )));
        }
        self.validate_thresholds()
    }

    fn validate_thresholds(&self) -> Result<()> {
        if !(self.low.is_finite() && self.high.is_finite() && self.low > 0.0) {
            return Err(Error::param(format!(
                "thresholds ({}, {}) must be finite and positive",
                self.low, self.high
            )));
        }
        if self.low >= self.high {
            return Err(Error::param(format!(
                "low threshold {} must be below high threshold {}",
                self.low, self.high
            )));
        }
        if self.mode == ThresholdMode::RatioOfMax && self.high > 1.0 {
            return Err(Error::param(format!(
                "ratio threshold {} exceeds 1",
                self.high
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EdgeClass {
    #[default]
    None,
    Weak,
    Strong,
}

/// Per-pixel [`EdgeClass`] grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassMap {
    width: usize,
    height: usize,
    classes: Vec<EdgeClass>,
}

impl ClassMap {
    pub fn new(width: usize, height: usize, classes: Vec<EdgeClass>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidDimension { width, height });
        }
        if classes.len() != width * height {
            return Err(Error::Truncated {
                expected: width * height,
                found: classes.len(),
            });
        }
        Ok(ClassMap {
            width,
            height,
            classes,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn classes(&self) -> &[EdgeClass] {
        &self.classes
    }

    pub fn get(&self, x: usize, y: usize) -> EdgeClass {
        self.classes[y * self.width + x]
    }
}

/// Binary edge / non-edge decision per pixel.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EdgeMap {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl EdgeMap {
    pub fn new(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidDimension { width, height });
        }
        if bits.len() != width * height {
            return Err(Error::Truncated {
                expected: width * height,
                found: bits.len(),
            });
        }
        Ok(EdgeMap {
            width,
            height,
            bits,
        })
    }

    pub fn empty(width: usize, height: usize) -> Result<Self> {
        Self::new(width, height, vec![false; width * height])
    }

    /// Pixels at or above `threshold` become edges.
    pub fn from_image(image: &RasterImage, threshold: f64) -> EdgeMap {
        EdgeMap {
            width: image.width(),
            height: image.height(),
            bits: image.samples().iter().map(|&v| v >= threshold).collect(),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    /// Sets a pixel if in range; returns whether it was.
    pub fn set(&mut self, x: i64, y: i64, on: bool) -> bool {
        if x < 0 || y < 0 || x as usize >= self.width || y as usize >= self.height {
            return false;
        }
        self.bits[y as usize * self.width + x as usize] = on;
        true
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Set pixels in row-major order.
    pub fn points(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(i, _)| (i % self.width, i / self.width))
    }

    /// Edges white (`1.0`) on black.
    pub fn to_image(&self) -> RasterImage {
        RasterImage::from_clamped(
            self.width,
            self.height,
            self.bits
                .iter()
                .map(|&b| if b { 1.0 } else { 0.0 })
                .collect(),
        )
    }
}

/// Direction bin of an orientation folded into `[0°, 180°)`: 0 = 0°,
/// 1 = 45°, 2 = 90°, 3 = 135°.
#[inline]
pub fn quantize_direction(orientation: f64) -> usize {
    let folded = orientation.rem_euclid(PI);
    ((folded / (PI / 4.0)).round() as usize) % 4
}

/// Pixel offsets of the two neighbours along a direction bin, with `y`
/// pointing down.
#[inline]
pub fn direction_offsets(bin: usize) -> [(i64, i64); 2] {
    match bin {
        0 => [(1, 0), (-1, 0)],
        1 => [(1, 1), (-1, -1)],
        2 => [(0, 1), (0, -1)],
        _ => [(-1, 1), (1, -1)],
    }
}

/// Keeps magnitudes that are `>=` both neighbours along the quantized
/// gradient direction; everything else becomes zero. Neighbours outside the
/// grid read as zero.
pub fn non_maximum_suppression(field: &GradientField) -> SignedPlane {
    let (w, h) = (field.width(), field.height());
    let mag = &field.magnitude;
    let read = |x: i64, y: i64| -> f64 {
        if x < 0 || y < 0 || x as usize >= w || y as usize >= h {
            0.0
        } else {
            mag.at(x as usize, y as usize)
        }
    };
    let out = parallel::fill_rows(w, h, |y, row| {
        for (x, out) in row.iter_mut().enumerate() {
            let m = mag.at(x, y);
            if m <= 0.0 {
                *out = 0.0;
                continue;
            }
            let bin = quantize_direction(field.orientation.at(x, y));
            let keep = direction_offsets(bin)
                .iter()
                .all(|&(dx, dy)| m >= read(x as i64 + dx, y as i64 + dy));
            *out = if keep { m } else { 0.0 };
        }
    });
    SignedPlane::from_raw(w, h, out)
}

/// Resolves `(low, high)` against a plane in the given mode. Returns `None`
/// when ratio mode meets an all-zero plane, in which case nothing is an edge.
pub fn effective_thresholds(plane: &SignedPlane, params: &CannyParams) -> Option<(f64, f64)> {
    match params.mode {
        ThresholdMode::Absolute => Some((params.low, params.high)),
        ThresholdMode::RatioOfMax => {
            let max = plane.max();
            (max > 0.0).then_some((params.low * max, params.high * max))
        }
    }
}

pub fn double_threshold(plane: &SignedPlane, params: &CannyParams) -> Result<ClassMap> {
    params.validate_thresholds()?;
    let classes = match effective_thresholds(plane, params) {
        None => vec![EdgeClass::None; plane.samples().len()],
        Some((low, high)) => plane
            .samples()
            .iter()
            .map(|&v| {
                if v >= high {
                    EdgeClass::Strong
                } else if v >= low {
                    EdgeClass::Weak
                } else {
                    EdgeClass::None
                }
            })
            .collect(),
    };
    ClassMap::new(plane.width(), plane.height(), classes)
}

const NEIGHBOURS: [(i64, i64); 8] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (-1, 0),
    (1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];

pub fn hysteresis(classes: &ClassMap) -> EdgeMap {
    hysteresis_with(classes, HysteresisMode::FloodFill)
}

pub fn hysteresis_with(classes: &ClassMap, mode: HysteresisMode) -> EdgeMap {
    let (w, h) = (classes.width, classes.height);
    let class_at = |x: i64, y: i64| -> EdgeClass {
        if x < 0 || y < 0 || x as usize >= w || y as usize >= h {
            EdgeClass::None
        } else {
            classes.get(x as usize, y as usize)
        }
    };
    let mut bits: Vec<bool> = classes
        .classes
        .iter()
        .map(|&c| c == EdgeClass::Strong)
        .collect();

    match mode {
        HysteresisMode::OneHop => {
            for y in 0..h {
                for x in 0..w {
                    if classes.get(x, y) == EdgeClass::Weak
                        && NEIGHBOURS.iter().any(|&(dx, dy)| {
                            class_at(x as i64 + dx, y as i64 + dy) == EdgeClass::Strong
                        })
                    {
                        bits[y * w + x] = true;
                    }
                }
            }
        }
        HysteresisMode::FloodFill => {
            let mut queue: VecDeque<(i64, i64)> = (0..w * h)
                .filter(|&i| bits[i])
                .map(|i| ((i % w) as i64, (i / w) as i64))
                .collect();
            while let Some((x, y)) = queue.pop_front() {
                for (dx, dy) in NEIGHBOURS {
                    let (nx, ny) = (x + dx, y + dy);
                    if class_at(nx, ny) == EdgeClass::Weak {
                        let i = ny as usize * w + nx as usize;
                        if !bits[i] {
                            bits[i] = true;
                            queue.push_back((nx, ny));
                        }
                    }
                }
            }
        }
    }
    EdgeMap {
        width: w,
        height: h,
        bits,
    }
}

/// Intermediate products of one Canny run.
#[derive(Debug, Clone)]
pub struct CannyStages {
    pub blurred: RasterImage,
    pub gradient: GradientField,
    pub suppressed: SignedPlane,
    pub classes: ClassMap,
    pub edges: EdgeMap,
}

pub fn canny_stages(image: &RasterImage, params: &CannyParams) -> Result<CannyStages> {
    params.validate()?;
    let blurred = gaussian_blur(image, params.sigma, BorderPolicy::Replicate)?;
    let gradient = first_order_gradient(&blurred, FirstOrderKind::Sobel, BorderPolicy::Replicate)?;
    let suppressed = non_maximum_suppression(&gradient);
    let classes = double_threshold(&suppressed, params)?;
    let edges = hysteresis_with(&classes, params.hysteresis);
    Ok(CannyStages {
        blurred,
        gradient,
        suppressed,
        classes,
        edges,
    })
}

pub fn canny(image: &RasterImage, params: &CannyParams) -> Result<EdgeMap> {
    canny_stages(image, params).map(|s| s.edges)
}
