//! Edge, corner and shape detection on grayscale rasters.
//!
//! Images are normalized `f64` grids. Every stage is deterministic; internal
//! parallelism never changes a result.

pub mod canny;
pub mod draw;
pub mod error;
pub mod filters;
pub mod ght;
pub mod gradient;
pub mod harris;
pub mod hough;
pub mod image;
pub mod io;
pub mod parallel;
pub mod synth;

pub use canny::{canny, CannyParams, EdgeClass, EdgeMap, HysteresisMode, ThresholdMode};
pub use error::{Error, Result};
pub use filters::{FilterKind, FilterSpec, NoiseVariance};
pub use ght::{GhtParams, PhaseMode, RTable};
pub use gradient::{convolve2d, Connectivity, FirstOrderKind, GradientField, Kernel};
pub use harris::{Corner, CornerList, HarrisParams, ResponseVariant};
pub use hough::{Accumulator2D, CircleParam, HoughPeak, LineParam, VoteThreshold};
pub use image::{BorderPolicy, Grid, PixelCoord, RasterImage, SignedPlane};
pub use io::{load_image, save_image, ImageFormat};
