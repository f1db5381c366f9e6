//! Generalized Hough transform with a translation-only R-table.
//!
//! The model is a set of boundary pixels, each filed under its quantized
//! gradient phase together with the displacement to a reference point.
//! Scene pixels look up their phase and vote for every stored displacement.

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;

use crate::canny::EdgeMap;
use crate::error::{Error, Result};
use crate::gradient::{first_order_gradient, FirstOrderKind};
use crate::hough::{find_peaks, Accumulator2D, Axis, VoteThreshold};
use crate::image::{BorderPolicy, Grid, PixelCoord, RasterImage, SignedPlane};
use crate::parallel;

/// Period used when folding gradient phase before binning.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PhaseMode {
    /// `[0, 2π)`: gradient polarity matters.
    #[default]
    FullTurn,
    /// `[0, π)`: contrast-invariant.
    HalfTurn,
}

impl PhaseMode {
    fn period(self) -> f64 {
        match self {
            PhaseMode::FullTurn => TAU,
            PhaseMode::HalfTurn => PI,
        }
    }
}

/// `floor(φ / (period / bins))` of the folded phase.
pub fn quantize_phase(orientation: f64, bins: usize, mode: PhaseMode) -> usize {
    let period = mode.period();
    let mut folded = orientation.rem_euclid(period);
    // Tiny negative inputs fold to exactly `period`.
    if folded >= period {
        folded = 0.0;
    }
    ((folded / (period / bins as f64)).floor() as usize).min(bins - 1)
}

/// Phase-indexed displacement lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RTable {
    phi_bins: usize,
    mode: PhaseMode,
    reference_point: PixelCoord,
    table: Vec<Vec<(i64, i64)>>,
}

impl RTable {
    pub fn phi_bins(&self) -> usize {
        self.phi_bins
    }

    pub fn mode(&self) -> PhaseMode {
        self.mode
    }

    pub fn reference_point(&self) -> PixelCoord {
        self.reference_point
    }

    /// Displacements `reference − boundary` stored under a phase bin.
    pub fn bin(&self, phi: usize) -> &[(i64, i64)] {
        &self.table[phi]
    }

    pub fn vector_count(&self) -> usize {
        self.table.iter().map(Vec::len).sum()
    }

    /// Line-oriented text form: `phi_bins N ref X Y` then `bin dx dy` per
    /// vector. Contrast-invariant tables append `phase half` to the header.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "phi_bins {} ref {} {}",
            self.phi_bins, self.reference_point.x, self.reference_point.y
        );
        if self.mode == PhaseMode::HalfTurn {
            out.push_str(" phase half");
        }
        out.push('\n');
        for (bin, vectors) in self.table.iter().enumerate() {
            for (dx, dy) in vectors {
                let _ = writeln!(out, "{bin} {dx} {dy}");
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<RTable> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or(Error::Parse {
            field: "rtable header",
            detail: "empty input".into(),
        })?;
        let tokens: Vec<&str> = header.split_whitespace().collect();
        let bad_header = || Error::Parse {
            field: "rtable header",
            detail: format!("expected `phi_bins N ref X Y`, found {header:?}"),
        };
        let mode = match tokens.as_slice() {
            ["phi_bins", _, "ref", _, _] => PhaseMode::FullTurn,
            ["phi_bins", _, "ref", _, _, "phase", "half"] => PhaseMode::HalfTurn,
            _ => return Err(bad_header()),
        };
        let phi_bins: usize = tokens[1].parse().map_err(|_| bad_header())?;
        if phi_bins < 4 {
            return Err(Error::param(format!(
                "phi_bins {phi_bins} must be at least 4"
            )));
        }
        let rx: i64 = tokens[3].parse().map_err(|_| bad_header())?;
        let ry: i64 = tokens[4].parse().map_err(|_| bad_header())?;
        let mut table = vec![Vec::new(); phi_bins];
        for (n, line) in lines.enumerate() {
            let bad = || Error::Parse {
                field: "rtable vector",
                detail: format!("line {}: {line:?}", n + 2),
            };
            let mut it = line.split_whitespace();
            let (Some(b), Some(dx), Some(dy), None) = (it.next(), it.next(), it.next(), it.next())
            else {
                return Err(bad());
            };
            let b: usize = b.parse().map_err(|_| bad())?;
            if b >= phi_bins {
                return Err(bad());
            }
            table[b].push((
                dx.parse().map_err(|_| bad())?,
                dy.parse().map_err(|_| bad())?,
            ));
        }
        Ok(RTable {
            phi_bins,
            mode,
            reference_point: PixelCoord::new(rx, ry),
            table,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GhtParams {
    pub phi_bins: usize,
    pub threshold: VoteThreshold,
    pub nms_radius: usize,
    pub mode: PhaseMode,
}

impl Default for GhtParams {
    fn default() -> Self {
        GhtParams {
            phi_bins: 64,
            threshold: VoteThreshold::RatioOfMax(0.9),
            nms_radius: 3,
            mode: PhaseMode::FullTurn,
        }
    }
}

impl GhtParams {
    pub fn validate(&self) -> Result<()> {
        if self.phi_bins < 4 {
            return Err(Error::param(format!(
                "phi_bins {} must be at least 4",
                self.phi_bins
            )));
        }
        self.threshold.validate()
    }
}

fn same_size(edges: &EdgeMap, orientation: &SignedPlane) -> Result<()> {
    if (edges.width(), edges.height()) != (orientation.width(), orientation.height()) {
        return Err(Error::Dimension(format!(
            "edge map {}x{} vs orientation {}x{}",
            edges.width(),
            edges.height(),
            orientation.width(),
            orientation.height()
        )));
    }
    Ok(())
}

pub fn build_rtable(
    model_edges: &EdgeMap,
    model_orientation: &SignedPlane,
    reference_point: PixelCoord,
    phi_bins: usize,
) -> Result<RTable> {
    build_rtable_with(
        model_edges,
        model_orientation,
        reference_point,
        phi_bins,
        PhaseMode::FullTurn,
    )
}

pub fn build_rtable_with(
    model_edges: &EdgeMap,
    model_orientation: &SignedPlane,
    reference_point: PixelCoord,
    phi_bins: usize,
    mode: PhaseMode,
) -> Result<RTable> {
    same_size(model_edges, model_orientation)?;
    if phi_bins < 4 {
        return Err(Error::param(format!(
            "phi_bins {phi_bins} must be at least 4"
        )));
    }
    let mut table = vec![Vec::new(); phi_bins];
    let mut any = false;
    for (x, y) in model_edges.points() {
        any = true;
        let phi = quantize_phase(model_orientation.at(x, y), phi_bins, mode);
        table[phi].push((reference_point.x - x as i64, reference_point.y - y as i64));
    }
    if !any {
        return Err(Error::EmptyModel);
    }
    Ok(RTable {
        phi_bins,
        mode,
        reference_point,
        table,
    })
}

/// Each scene edge pixel votes at `pixel + v` for every `v` filed under its
/// phase bin. Axis 0 is the row (`y`), axis 1 the column (`x`).
pub fn ght_accumulate(
    scene_edges: &EdgeMap,
    scene_orientation: &SignedPlane,
    rtable: &RTable,
) -> Result<Accumulator2D> {
    same_size(scene_edges, scene_orientation)?;
    let (w, h) = (scene_edges.width(), scene_edges.height());
    let unit = |bins| Axis {
        origin: 0.0,
        step: 1.0,
        bins,
    };
    let points: Vec<(usize, usize)> = scene_edges.points().collect();
    let counts = parallel::accumulate(&points, w * h, |&(x, y), acc| {
        let phi = quantize_phase(scene_orientation.at(x, y), rtable.phi_bins, rtable.mode);
        for &(dx, dy) in &rtable.table[phi] {
            let (vx, vy) = (x as i64 + dx, y as i64 + dy);
            if vx >= 0 && vy >= 0 && (vx as usize) < w && (vy as usize) < h {
                acc[vy as usize * w + vx as usize] += 1;
            }
        }
    });
    Accumulator2D::from_counts(unit(h), unit(w), counts)
}

/// Peak positions of a generalized Hough accumulator as pixel coordinates.
pub fn locate_shape(acc: &Accumulator2D, params: &GhtParams) -> Result<Vec<(PixelCoord, u64)>> {
    params.threshold.validate()?;
    let peaks = find_peaks(acc, params.threshold.resolve(acc), params.nms_radius);
    Ok(peaks
        .into_iter()
        .filter(|p| p.votes > 0)
        .map(|p| {
            (
                PixelCoord::new(p.value1.round() as i64, p.value0.round() as i64),
                p.votes,
            )
        })
        .collect())
}

/// Sobel orientation of the pre-edge image, the phase source on both the
/// model and the scene side.
pub fn phase_field(image: &RasterImage) -> Result<SignedPlane> {
    Ok(first_order_gradient(image, FirstOrderKind::Sobel, BorderPolicy::Replicate)?.orientation)
}

/// Rounded centroid of the set pixels, the default reference point.
pub fn edge_centroid(edges: &EdgeMap) -> Option<PixelCoord> {
    let (mut sx, mut sy, mut n) = (0i64, 0i64, 0i64);
    for (x, y) in edges.points() {
        sx += x as i64;
        sy += y as i64;
        n += 1;
    }
    (n > 0).then(|| {
        PixelCoord::new(
            (sx as f64 / n as f64).round() as i64,
            (sy as f64 / n as f64).round() as i64,
        )
    })
}
