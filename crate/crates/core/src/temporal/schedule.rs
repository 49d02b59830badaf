//! Piecewise speed schedules over a 64x sub-frame timeline.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Real;
use crate::temporal::halton::HaltonSampler;

/// Sub-frames between two consecutive original frames.
pub const SUBFRAMES: u32 = 64;

/// Allowed cursor advances per output frame, in sub-frames.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrideTable {
    strides: Vec<u32>,
}

impl StrideTable {
    pub const CANONICAL: [u32; 21] =
        [128, 116, 107, 98, 91, 85, 80, 75, 71, 67, 64, 58, 53, 49, 46, 43, 40, 38, 36, 34, 32];

    /// Sorts descending; requires the identity stride 64 to be present.
    pub fn new(mut strides: Vec<u32>) -> Result<Self> {
        strides.sort_unstable_by(|a, b| b.cmp(a));
        strides.dedup();
        if strides.contains(&0) {
            return Err(Error::InvalidArgument("strides must be positive".into()));
        }
        if !strides.contains(&SUBFRAMES) {
            return Err(Error::InvalidArgument("stride table must contain 64 (1x speed)".into()));
        }
        Ok(Self { strides })
    }

    pub fn canonical() -> Self {
        Self { strides: Self::CANONICAL.to_vec() }
    }

    pub fn strides(&self) -> &[u32] {
        &self.strides
    }

    pub fn min(&self) -> u32 {
        *self.strides.last().expect("non-empty")
    }

    pub fn max(&self) -> u32 {
        self.strides[0]
    }

    /// Playback speed of a stride (`stride / 64`).
    pub fn factor<T: Real>(stride: u32) -> T {
        T::of(f64::from(stride)) / T::of(f64::from(SUBFRAMES))
    }

    /// Entry closest to `value`; ties go to the smaller stride.
    pub fn nearest<T: Real>(&self, value: T) -> u32 {
        let mut best = self.strides[0];
        let mut best_d = (T::of(f64::from(best)) - value).abs();
        for &s in &self.strides[1..] {
            let d = (T::of(f64::from(s)) - value).abs();
            if d <= best_d {
                best = s;
                best_d = d;
            }
        }
        best
    }

    /// Maps `u` in `[0, 1)` linearly onto `[min, max]` and snaps to the table.
    pub fn from_unit<T: Real>(&self, u: T) -> u32 {
        let (lo, hi) = (T::of(f64::from(self.min())), T::of(f64::from(self.max())));
        self.nearest(lo + u * (hi - lo))
    }
}

impl Default for StrideTable {
    fn default() -> Self {
        Self::canonical()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Part {
    /// Output frames produced by this part.
    pub len: usize,
    /// Sub-frames advanced per output frame.
    pub stride: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SpeedSchedule {
    pub parts: Vec<Part>,
}

impl SpeedSchedule {
    /// One part at constant `stride`, truncated to fit a video of `frames` frames.
    pub fn constant(stride: u32, frames: usize) -> Self {
        let mut s = Self { parts: vec![Part { len: usize::MAX, stride }] };
        s.parts[0].len = s.fitted_len(frames);
        s
    }

    pub fn total_len(&self) -> usize {
        self.parts.iter().map(|p| p.len).sum()
    }

    /// Sub-frame position of every output frame, stopping at the last
    /// position inside a video of `frames` frames (`64 * (frames - 1)`).
    pub fn positions(&self, frames: usize) -> impl Iterator<Item = u64> + '_ {
        let end = u64::from(SUBFRAMES) * frames.saturating_sub(1) as u64;
        let live = frames > 0;
        self.parts
            .iter()
            .flat_map(|p| std::iter::repeat_n(u64::from(p.stride), p.len))
            .scan(0u64, |pos, stride| {
                let here = *pos;
                *pos = pos.saturating_add(stride);
                Some(here)
            })
            .take_while(move |&p| live && p <= end)
    }

    /// Number of output frames this schedule yields on a video of `frames` frames.
    pub fn fitted_len(&self, frames: usize) -> usize {
        self.positions(frames).count()
    }
}

/// Draws parts from `sampler` until the video is covered.
///
/// Each Halton point `(u1, u2)` gives a part length of
/// `round(mean - mad + u1 * 2 * mad)` output frames (at least 1) and a
/// stride interpolated by `u2` between the smallest and largest table
/// entry. The final part is truncated at the end of the video.
pub fn draw_schedule<T: Real>(
    sampler: &mut HaltonSampler<T>,
    frames: usize,
    mean: T,
    mad: T,
    table: &StrideTable,
) -> Result<SpeedSchedule> {
    if !(mean > T::zero()) || !mean.is_finite() {
        return Err(Error::InvalidArgument(format!("mean part length must be positive, got {mean}")));
    }
    if !(mad >= T::zero()) || !mad.is_finite() {
        return Err(Error::InvalidArgument(format!("part length deviation must be non-negative, got {mad}")));
    }
    if frames == 0 {
        return Err(Error::InvalidArgument("cannot schedule an empty video".into()));
    }
    let end = u64::from(SUBFRAMES) * (frames as u64 - 1);
    let mut pos = 0u64;
    let mut parts = Vec::new();
    loop {
        let (u1, u2) = sampler.next_point();
        let raw = (mean - mad + u1 * T::of(2.0) * mad).round();
        let len = raw.to_usize().unwrap_or(0).max(1);
        let stride = table.from_unit(u2);
        let fits = ((end - pos) / u64::from(stride)) as usize + 1;
        if fits <= len {
            parts.push(Part { len: fits, stride });
            break;
        }
        parts.push(Part { len, stride });
        pos += len as u64 * u64::from(stride);
    }
    Ok(SpeedSchedule { parts })
}
