//! Spatial augmentation operators.

mod buffer;
pub mod ops;
pub mod params;

pub use buffer::PixelBuffer;
pub use ops::{Axis, Context, SpatialOp};
pub use params::{apply, apply_at, draw_params, OpKind, SpatialParamSet, SpatialRanges};
