//! Sub-frame interpolation and re-timing of frame/label sequences.

use std::path::PathBuf;
use std::process::Command;

use crate::error::{Error, Result};
use crate::spatial::PixelBuffer;
use crate::temporal::schedule::{SpeedSchedule, SUBFRAMES};

/// Synthesizes an intermediate frame between two neighbours.
pub trait Interpolator: Send + Sync {
    /// `t` is in `(0, 1)`; implementations must return a buffer of the input size.
    fn interpolate(&self, a: &PixelBuffer, b: &PixelBuffer, t: f64) -> Result<PixelBuffer>;

    fn name(&self) -> &str;
}

/// Holds the earlier frame until `t` reaches 1.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityInterpolator;

impl Interpolator for IdentityInterpolator {
    fn interpolate(&self, a: &PixelBuffer, b: &PixelBuffer, t: f64) -> Result<PixelBuffer> {
        Ok(if t < 1.0 { a.clone() } else { b.clone() })
    }

    fn name(&self) -> &str {
        "identity"
    }
}

/// Per-sample cross-fade `round((1 - t) * a + t * b)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct LinearInterpolator;

impl Interpolator for LinearInterpolator {
    fn interpolate(&self, a: &PixelBuffer, b: &PixelBuffer, t: f64) -> Result<PixelBuffer> {
        if (a.width(), a.height()) != (b.width(), b.height()) {
            return Err(Error::Interpolator("frames differ in size".into()));
        }
        let data = a
            .data()
            .iter()
            .zip(b.data())
            .map(|(&x, &y)| ((1.0 - t) * f64::from(x) + t * f64::from(y)).round().clamp(0.0, 255.0) as u8)
            .collect();
        PixelBuffer::new(a.width(), a.height(), data)
    }

    fn name(&self) -> &str {
        "linear"
    }
}

/// Delegates to an external program invoked as
/// `program <frame_a.png> <frame_b.png> <t> <out.png>`.
#[derive(Debug, Clone)]
pub struct CommandInterpolator {
    program: PathBuf,
    label: String,
}

impl CommandInterpolator {
    pub fn new(program: impl Into<PathBuf>) -> Self {
        let program = program.into();
        let label = format!("cmd:{}", program.display());
        Self { program, label }
    }
}

impl Interpolator for CommandInterpolator {
    fn interpolate(&self, a: &PixelBuffer, b: &PixelBuffer, t: f64) -> Result<PixelBuffer> {
        let dir = tempfile::tempdir().map_err(|e| Error::Interpolator(e.to_string()))?;
        let (pa, pb, out) = (dir.path().join("a.png"), dir.path().join("b.png"), dir.path().join("out.png"));
        a.save_png(&pa)?;
        b.save_png(&pb)?;
        let status = Command::new(&self.program)
            .arg(&pa)
            .arg(&pb)
            .arg(format!("{t}"))
            .arg(&out)
            .status()
            .map_err(|e| Error::Interpolator(format!("{}: {e}", self.program.display())))?;
        if !status.success() {
            return Err(Error::Interpolator(format!("{} exited with {status}", self.program.display())));
        }
        let frame = PixelBuffer::load_png(&out)?;
        if (frame.width(), frame.height()) != (a.width(), a.height()) {
            return Err(Error::Interpolator("external interpolator changed the frame size".into()));
        }
        Ok(frame)
    }

    fn name(&self) -> &str {
        &self.label
    }
}

/// `"identity"`, `"linear"` or `"cmd:<program>"`.
pub fn interpolator_by_name(name: &str) -> Result<Box<dyn Interpolator>> {
    match name {
        "identity" => Ok(Box::new(IdentityInterpolator)),
        "linear" => Ok(Box::new(LinearInterpolator)),
        _ => match name.strip_prefix("cmd:") {
            Some(p) if !p.is_empty() => Ok(Box::new(CommandInterpolator::new(p))),
            _ => Err(Error::InvalidArgument(format!("unknown interpolator {name:?}"))),
        },
    }
}

/// Frame index and sub-frame offset (`0..64`) of a timeline position.
#[inline]
pub fn split_position(pos: u64) -> (usize, u32) {
    ((pos / u64::from(SUBFRAMES)) as usize, (pos % u64::from(SUBFRAMES)) as u32)
}

/// Index of the source frame whose label a sub-frame inherits: offsets
/// 1..=32 keep frame `n`, 33..=64 take frame `n + 1`.
#[inline]
pub fn label_source(frame: usize, offset: u32) -> usize {
    if offset <= SUBFRAMES / 2 {
        frame
    } else {
        frame + 1
    }
}

fn check_schedule(schedule: &SpeedSchedule, frames: usize) -> Result<()> {
    if schedule.total_len() == 0 || schedule.fitted_len(frames) == 0 {
        return Err(Error::EmptySchedule);
    }
    Ok(())
}

/// Labels after re-timing; generic over the label type.
pub fn retime_labels<L: Clone>(labels: &[L], schedule: &SpeedSchedule) -> Result<Vec<L>> {
    check_schedule(schedule, labels.len())?;
    Ok(schedule
        .positions(labels.len())
        .map(|p| {
            let (n, s) = split_position(p);
            labels[if s == 0 { n } else { label_source(n, s) }].clone()
        })
        .collect())
}

/// Re-times frames and labels. Original frames are reproduced exactly at
/// their own positions; in-between positions are interpolated.
pub fn retime<L: Clone>(
    frames: &[PixelBuffer],
    labels: &[L],
    schedule: &SpeedSchedule,
    interpolator: &dyn Interpolator,
) -> Result<(Vec<PixelBuffer>, Vec<L>)> {
    if frames.len() != labels.len() {
        return Err(Error::LengthMismatch(frames.len(), labels.len()));
    }
    let out_labels = retime_labels(labels, schedule)?;
    let out_frames = schedule
        .positions(frames.len())
        .map(|p| frame_at(frames, p, interpolator))
        .collect::<Result<Vec<_>>>()?;
    Ok((out_frames, out_labels))
}

fn frame_at(frames: &[PixelBuffer], pos: u64, interpolator: &dyn Interpolator) -> Result<PixelBuffer> {
    let (n, s) = split_position(pos);
    if s == 0 {
        Ok(frames[n].clone())
    } else {
        interpolator.interpolate(&frames[n], &frames[n + 1], f64::from(s) / f64::from(SUBFRAMES))
    }
}

/// Every sub-frame of the timeline: `64 * (n - 1) + 1` frames for `n` inputs.
pub fn upsample_full(frames: &[PixelBuffer], interpolator: &dyn Interpolator) -> Result<Vec<PixelBuffer>> {
    if frames.len() < 2 {
        return Err(Error::InvalidArgument("upsampling needs at least two frames".into()));
    }
    let last = u64::from(SUBFRAMES) * (frames.len() as u64 - 1);
    (0..=last).map(|p| frame_at(frames, p, interpolator)).collect()
}

/// Sub-frame labels matching [`upsample_full`].
pub fn upsample_labels<L: Clone>(labels: &[L]) -> Vec<L> {
    if labels.is_empty() {
        return Vec::new();
    }
    let last = u64::from(SUBFRAMES) * (labels.len() as u64 - 1);
    (0..=last)
        .map(|p| {
            let (n, s) = split_position(p);
            labels[if s == 0 { n } else { label_source(n, s) }].clone()
        })
        .collect()
}

/// Re-times an already upsampled sequence by picking sub-frames directly.
pub fn retime_dense<F: Clone, L: Clone>(
    dense_frames: &[F],
    dense_labels: &[L],
    schedule: &SpeedSchedule,
) -> Result<(Vec<F>, Vec<L>)> {
    if dense_frames.len() != dense_labels.len() {
        return Err(Error::LengthMismatch(dense_frames.len(), dense_labels.len()));
    }
    let sub = SUBFRAMES as usize;
    if dense_frames.is_empty() || !(dense_frames.len() - 1).is_multiple_of(sub) {
        return Err(Error::InvalidArgument("dense sequence length must be 64 * (n - 1) + 1".into()));
    }
    let original = (dense_frames.len() - 1) / sub + 1;
    check_schedule(schedule, original)?;
    let picks: Vec<usize> = schedule.positions(original).map(|p| p as usize).collect();
    Ok((
        picks.iter().map(|&i| dense_frames[i].clone()).collect(),
        picks.iter().map(|&i| dense_labels[i].clone()).collect(),
    ))
}
