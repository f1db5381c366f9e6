//! Line and fixed-radius circle Hough transforms.
//!
//! Accumulators are row-major with axis 0 as rows. Line accumulators have
//! `ρ` on axis 0 and `θ` on axis 1; circle (and generalized) accumulators
//! have the center row `b` on axis 0 and the center column `a` on axis 1, so
//! they dump directly as images.

use std::f64::consts::PI;

use crate::canny::EdgeMap;
use crate::error::{Error, Result};
use crate::image::RasterImage;
use crate::parallel;

/// Affine bin ↔ value mapping: `value = origin + step · bin`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub origin: f64,
    pub step: f64,
    pub bins: usize,
}

impl Axis {
    pub fn value(&self, bin: usize) -> f64 {
        self.origin + self.step * bin as f64
    }

    /// Nearest bin, or `None` when it falls off the axis.
    pub fn bin_of(&self, value: f64) -> Option<usize> {
        let b = ((value - self.origin) / self.step).round();
        (b >= 0.0 && b < self.bins as f64).then_some(b as usize)
    }
}

/// Integer vote grid over a two-parameter space.
#[derive(Debug, Clone, PartialEq)]
pub struct Accumulator2D {
    pub axis0: Axis,
    pub axis1: Axis,
    counts: Vec<u64>,
}

impl Accumulator2D {
    pub fn zeros(axis0: Axis, axis1: Axis) -> Result<Self> {
        if axis0.bins == 0 || axis1.bins == 0 {
            return Err(Error::InvalidDimension {
                width: axis1.bins,
                height: axis0.bins,
            });
        }
        Ok(Accumulator2D {
            axis0,
            axis1,
            counts: vec![0; axis0.bins * axis1.bins],
        })
    }

    pub fn from_counts(axis0: Axis, axis1: Axis, counts: Vec<u64>) -> Result<Self> {
        let acc = Self::zeros(axis0, axis1)?;
        if counts.len() != acc.counts.len() {
            return Err(Error::Truncated {
                expected: acc.counts.len(),
                found: counts.len(),
            });
        }
        Ok(Accumulator2D { counts, ..acc })
    }

    pub fn dim0_bins(&self) -> usize {
        self.axis0.bins
    }

    pub fn dim1_bins(&self) -> usize {
        self.axis1.bins
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn get(&self, i0: usize, i1: usize) -> u64 {
        self.counts[i0 * self.axis1.bins + i1]
    }

    pub fn increment(&mut self, i0: usize, i1: usize) {
        self.counts[i0 * self.axis1.bins + i1] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn max(&self) -> u64 {
        self.counts.iter().copied().max().unwrap_or(0)
    }

    /// Bin with the most votes; ties go to the smaller row-major index.
    pub fn argmax(&self) -> (usize, usize) {
        let mut best = 0;
        for (i, &c) in self.counts.iter().enumerate() {
            if c > self.counts[best] {
                best = i;
            }
        }
        (best / self.axis1.bins, best % self.axis1.bins)
    }

    /// Counts scaled by the maximum into `[0, 1]` (axis 0 = rows).
    pub fn to_image(&self) -> RasterImage {
        let max = self.max();
        let samples = self
            .counts
            .iter()
            .map(|&c| if max > 0 { c as f64 / max as f64 } else { 0.0 })
            .collect();
        RasterImage::from_clamped(self.axis1.bins, self.axis0.bins, samples)
    }
}

/// Line `x·cosθ + y·sinθ = ρ`, `θ ∈ [0, π)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineParam {
    pub rho: f64,
    pub theta: f64,
}

/// Circle `(x − a)² + (y − b)² = r²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircleParam {
    pub a: f64,
    pub b: f64,
    pub r: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HoughPeak {
    pub i0: usize,
    pub i1: usize,
    pub votes: u64,
    /// Bin-center values on axis 0 and axis 1.
    pub value0: f64,
    pub value1: f64,
}

/// Minimum vote count for a peak.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VoteThreshold {
    Count(u64),
    /// Fraction of the accumulator maximum, rounded up, at least 1.
    RatioOfMax(f64),
}

impl VoteThreshold {
    pub fn validate(&self) -> Result<()> {
        match *self {
            VoteThreshold::Count(0) => Err(Error::param("vote threshold must be at least 1")),
            VoteThreshold::RatioOfMax(r) if !(r > 0.0 && r <= 1.0) => {
                Err(Error::param(format!("vote ratio {r} outside (0, 1]")))
            }
            _ => Ok(()),
        }
    }

    pub fn resolve(&self, acc: &Accumulator2D) -> u64 {
        match *self {
            VoteThreshold::Count(n) => n.max(1),
            VoteThreshold::RatioOfMax(r) => ((r * acc.max() as f64).ceil() as u64).max(1),
        }
    }
}

/// Geometry of a line accumulator for a `width × height` image.
pub fn line_axes(
    width: usize,
    height: usize,
    theta_bins: usize,
    rho_step: f64,
) -> Result<(Axis, Axis)> {
    if theta_bins == 0 {
        return Err(Error::param("theta_bins must be at least 1"));
    }
    if !(rho_step.is_finite() && rho_step > 0.0) {
        return Err(Error::param(format!(
            "rho_step {rho_step} must be positive"
        )));
    }
    let (w, h) = (
        (width as f64 - 1.0).max(0.0),
        (height as f64 - 1.0).max(0.0),
    );
    let diagonal = (w * w + h * h).sqrt();
    let half = (diagonal / rho_step).ceil() as usize;
    let rho = Axis {
        origin: -(half as f64) * rho_step,
        step: rho_step,
        bins: 2 * half + 1,
    };
    let theta = Axis {
        origin: 0.0,
        step: PI / theta_bins as f64,
        bins: theta_bins,
    };
    Ok((rho, theta))
}

/// Every set pixel votes once per `θ` bin at the `ρ` bin nearest
/// `x·cosθ + y·sinθ`.
pub fn hough_line_accumulate(
    edges: &EdgeMap,
    theta_bins: usize,
    rho_step: f64,
) -> Result<Accumulator2D> {
    let (rho_axis, theta_axis) = line_axes(edges.width(), edges.height(), theta_bins, rho_step)?;
    let trig: Vec<(f64, f64)> = (0..theta_bins)
        .map(|j| {
            let t = j as f64 * PI / theta_bins as f64;
            (t.cos(), t.sin())
        })
        .collect();
    let points: Vec<(usize, usize)> = edges.points().collect();
    let cols = theta_axis.bins;
    let half = (rho_axis.bins / 2) as i64;
    let counts = parallel::accumulate(&points, rho_axis.bins * cols, |&(x, y), acc| {
        let (xf, yf) = (x as f64, y as f64);
        for (j, &(c, s)) in trig.iter().enumerate() {
            // Rounded symmetrically about ρ = 0; |ρ| ≤ diagonal keeps it in range.
            let i = ((xf * c + yf * s) / rho_step).round() as i64 + half;
            acc[i as usize * cols + j] += 1;
        }
    });
    Accumulator2D::from_counts(rho_axis, theta_axis, counts)
}

/// Every set pixel votes once per `θ` sample at the rounded center
/// `(x − r·cosθ, y − r·sinθ)`; votes off the image are dropped.
pub fn hough_circle_accumulate(
    edges: &EdgeMap,
    radius: f64,
    theta_steps: usize,
) -> Result<Accumulator2D> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::param(format!("radius {radius} must be positive")));
    }
    if theta_steps < 8 {
        return Err(Error::param(format!(
            "theta_steps {theta_steps} must be at least 8"
        )));
    }
    let rows = Axis {
        origin: 0.0,
        step: 1.0,
        bins: edges.height(),
    };
    let cols = Axis {
        origin: 0.0,
        step: 1.0,
        bins: edges.width(),
    };
    let offsets: Vec<(f64, f64)> = (0..theta_steps)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / theta_steps as f64;
            (radius * t.cos(), radius * t.sin())
        })
        .collect();
    let points: Vec<(usize, usize)> = edges.points().collect();
    let width = cols.bins;
    let counts = parallel::accumulate(&points, rows.bins * width, |&(x, y), acc| {
        for &(dx, dy) in &offsets {
            let a = (x as f64 - dx).round();
            let b = (y as f64 - dy).round();
            if a >= 0.0 && b >= 0.0 && (a as usize) < width && (b as usize) < rows.bins {
                acc[b as usize * width + a as usize] += 1;
            }
        }
    });
    Accumulator2D::from_counts(rows, cols, counts)
}

/// Bins with at least `threshold` votes that beat every other bin within
/// Chebyshev distance `nms_radius` (equal counts go to the smaller row-major
/// index). Sorted by descending votes, then row-major.
pub fn find_peaks(acc: &Accumulator2D, threshold: u64, nms_radius: usize) -> Vec<HoughPeak> {
    let threshold = threshold.max(1);
    let (rows, cols) = (acc.dim0_bins() as i64, acc.dim1_bins() as i64);
    let r = nms_radius as i64;
    let counts = acc.counts();
    let mut peaks = Vec::new();
    for i0 in 0..rows {
        for i1 in 0..cols {
            let i = (i0 * cols + i1) as usize;
            let v = counts[i];
            if v < threshold {
                continue;
            }
            let mut survives = true;
            'scan: for n0 in (i0 - r).max(0)..=(i0 + r).min(rows - 1) {
                for n1 in (i1 - r).max(0)..=(i1 + r).min(cols - 1) {
                    let j = (n0 * cols + n1) as usize;
                    if j != i && (counts[j] > v || (counts[j] == v && j < i)) {
                        survives = false;
                        break 'scan;
                    }
                }
            }
            if survives {
                peaks.push(HoughPeak {
                    i0: i0 as usize,
                    i1: i1 as usize,
                    votes: v,
                    value0: acc.axis0.value(i0 as usize),
                    value1: acc.axis1.value(i1 as usize),
                });
            }
        }
    }
    peaks.sort_by_key(|p| std::cmp::Reverse(p.votes));
    peaks
}

pub fn decode_lines(peaks: &[HoughPeak], acc: &Accumulator2D) -> Vec<LineParam> {
    peaks
        .iter()
        .map(|p| LineParam {
            rho: acc.axis0.value(p.i0),
            theta: acc.axis1.value(p.i1),
        })
        .collect()
}

pub fn decode_circles(peaks: &[HoughPeak], acc: &Accumulator2D, radius: f64) -> Vec<CircleParam> {
    peaks
        .iter()
        .map(|p| CircleParam {
            a: acc.axis1.value(p.i1),
            b: acc.axis0.value(p.i0),
            r: radius,
        })
        .collect()
}

/// Settings for a multi-radius circle search.
#[derive(Debug, Clone, PartialEq)]
pub struct CircleSearch {
    pub radii: Vec<f64>,
    pub theta_steps: usize,
    pub threshold: VoteThreshold,
    pub nms_radius: usize,
}

/// Runs the fixed-radius transform once per radius and collects each
/// radius's peaks.
pub fn detect_circles(edges: &EdgeMap, search: &CircleSearch) -> Result<Vec<(CircleParam, u64)>> {
    search.threshold.validate()?;
    if search.radii.is_empty() {
        return Err(Error::param("at least one radius is required"));
    }
    let mut found = Vec::new();
    for &radius in &search.radii {
        let acc = hough_circle_accumulate(edges, radius, search.theta_steps)?;
        let peaks = find_peaks(&acc, search.threshold.resolve(&acc), search.nms_radius);
        let circles = decode_circles(&peaks, &acc, radius);
        found.extend(circles.into_iter().zip(peaks.iter().map(|p| p.votes)));
    }
    Ok(found)
}
