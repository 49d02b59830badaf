//! Temporal augmentation: Halton-driven speed schedules and re-timing.

pub mod halton;
pub mod retime;
pub mod schedule;

pub use halton::{halton, HaltonSampler};
pub use retime::{
    interpolator_by_name, label_source, retime, retime_dense, retime_labels, upsample_full, upsample_labels,
    CommandInterpolator, IdentityInterpolator, Interpolator, LinearInterpolator,
};
pub use schedule::{draw_schedule, Part, SpeedSchedule, StrideTable, SUBFRAMES};
