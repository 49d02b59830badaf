//! Random selection and parameterization of spatial operators.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;
use crate::spatial::ops::{Axis, Context, SpatialOp};
use crate::spatial::PixelBuffer;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OpKind {
    CenterCrop,
    Pad,
    Rot90,
    Mirror,
    Zoom,
    Rotate,
    Contrast,
    BrightnessAdd,
    BrightnessMul,
    Gamma,
    Downsample,
    RicianNoise,
    GaussianNoise,
    GaussianBlur,
    SquareNoise,
    Invert,
    ChannelShuffle,
}

impl OpKind {
    pub const ALL: [OpKind; 17] = [
        OpKind::CenterCrop,
        OpKind::Pad,
        OpKind::Rot90,
        OpKind::Mirror,
        OpKind::Zoom,
        OpKind::Rotate,
        OpKind::Contrast,
        OpKind::BrightnessAdd,
        OpKind::BrightnessMul,
        OpKind::Gamma,
        OpKind::Downsample,
        OpKind::RicianNoise,
        OpKind::GaussianNoise,
        OpKind::GaussianBlur,
        OpKind::SquareNoise,
        OpKind::Invert,
        OpKind::ChannelShuffle,
    ];

    pub fn of(op: &SpatialOp) -> OpKind {
        match op {
            SpatialOp::CenterCrop { .. } => OpKind::CenterCrop,
            SpatialOp::Pad { .. } => OpKind::Pad,
            SpatialOp::Rot90 { .. } => OpKind::Rot90,
            SpatialOp::Mirror { .. } => OpKind::Mirror,
            SpatialOp::Zoom { .. } => OpKind::Zoom,
            SpatialOp::Rotate { .. } => OpKind::Rotate,
            SpatialOp::Contrast { .. } => OpKind::Contrast,
            SpatialOp::BrightnessAdd { .. } => OpKind::BrightnessAdd,
            SpatialOp::BrightnessMul { .. } => OpKind::BrightnessMul,
            SpatialOp::Gamma { .. } => OpKind::Gamma,
            SpatialOp::Downsample { .. } => OpKind::Downsample,
            SpatialOp::RicianNoise { .. } => OpKind::RicianNoise,
            SpatialOp::GaussianNoise { .. } => OpKind::GaussianNoise,
            SpatialOp::GaussianBlur { .. } => OpKind::GaussianBlur,
            SpatialOp::SquareNoise { .. } => OpKind::SquareNoise,
            SpatialOp::Invert => OpKind::Invert,
            SpatialOp::ChannelShuffle { .. } => OpKind::ChannelShuffle,
        }
    }

    fn index(self) -> u64 {
        OpKind::ALL.iter().position(|&k| k == self).expect("listed") as u64
    }
}

/// Closed interval `[min, max]`.
pub type Range = (f64, f64);

/// Parameter ranges for every operator. `(height, width)` pairs are in
/// pixels of `reference`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpatialRanges {
    pub selection_probability: f64,
    pub reference: (u32, u32),
    pub crop_min: (u32, u32),
    pub crop_max: (u32, u32),
    pub pad_min: (u32, u32),
    pub pad_max: (u32, u32),
    pub quarter_turns: (u8, u8),
    pub zoom: Range,
    pub rotate_degrees: Range,
    pub contrast: Range,
    pub brightness_add: Range,
    pub brightness_mul: Range,
    pub gamma: Range,
    pub downsample: Range,
    pub rician_sigma: Range,
    pub gaussian_sigma: Range,
    pub blur_sigma: Range,
    pub square_max_side: Range,
    pub square_count: (u32, u32),
}

impl Default for SpatialRanges {
    fn default() -> Self {
        Self {
            selection_probability: 0.33,
            reference: (1080, 1920),
            crop_min: (840, 1080),
            crop_max: (1080, 1920),
            pad_min: (1080, 2160),
            pad_max: (1920, 3840),
            quarter_turns: (1, 3),
            zoom: (0.03, 1.0),
            rotate_degrees: (-90.0, 90.0),
            contrast: (0.2, 2.0),
            brightness_add: (-64.0, 64.0),
            brightness_mul: (0.5, 1.5),
            gamma: (0.2, 2.0),
            downsample: (0.05, 2.0),
            rician_sigma: (0.0, 20.0),
            gaussian_sigma: (0.0, 20.0),
            blur_sigma: (0.0, 7.0),
            square_max_side: (0.0, 32.0),
            square_count: (0, 300),
        }
    }
}

fn ordered<T: PartialOrd>(r: &(T, T)) -> bool {
    r.0 <= r.1
}

impl SpatialRanges {
    pub fn validate(&self) -> Result<()> {
        let real = [
            self.zoom,
            self.rotate_degrees,
            self.contrast,
            self.brightness_add,
            self.brightness_mul,
            self.gamma,
            self.downsample,
            self.rician_sigma,
            self.gaussian_sigma,
            self.blur_sigma,
            self.square_max_side,
        ];
        let ok = (0.0..=1.0).contains(&self.selection_probability)
            && self.reference.0 > 0
            && self.reference.1 > 0
            && real.iter().all(|r| r.0.is_finite() && r.1.is_finite() && ordered(r))
            && ordered(&(self.crop_min.0, self.crop_max.0))
            && ordered(&(self.crop_min.1, self.crop_max.1))
            && ordered(&(self.pad_min.0, self.pad_max.0))
            && ordered(&(self.pad_min.1, self.pad_max.1))
            && ordered(&self.quarter_turns)
            && ordered(&self.square_count)
            && self.zoom.0 > 0.0
            && self.downsample.0 > 0.0
            && self.gamma.0 > 0.0
            && self.rician_sigma.0 >= 0.0
            && self.gaussian_sigma.0 >= 0.0
            && self.blur_sigma.0 >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument("invalid spatial augmentation ranges".into()))
        }
    }

    /// Whether every parameter of `op` lies inside its range.
    pub fn contains(&self, op: &SpatialOp) -> bool {
        let inr = |v: f64, r: Range| r.0 <= v && v <= r.1;
        let pair = |v: (u32, u32), lo: (u32, u32), hi: (u32, u32)| {
            lo.0 <= v.0 && v.0 <= hi.0 && lo.1 <= v.1 && v.1 <= hi.1
        };
        match *op {
            SpatialOp::CenterCrop { height, width } => pair((height, width), self.crop_min, self.crop_max),
            SpatialOp::Pad { height, width } => pair((height, width), self.pad_min, self.pad_max),
            SpatialOp::Rot90 { quarter_turns } => {
                self.quarter_turns.0 <= quarter_turns && quarter_turns <= self.quarter_turns.1
            }
            SpatialOp::Mirror { .. } | SpatialOp::Invert => true,
            SpatialOp::Zoom { factor } => inr(factor, self.zoom),
            SpatialOp::Rotate { degrees } => inr(degrees, self.rotate_degrees),
            SpatialOp::Contrast { factor } => inr(factor, self.contrast),
            SpatialOp::BrightnessAdd { offset } => inr(offset, self.brightness_add),
            SpatialOp::BrightnessMul { factor } => inr(factor, self.brightness_mul),
            SpatialOp::Gamma { gamma } => inr(gamma, self.gamma),
            SpatialOp::Downsample { factor } => inr(factor, self.downsample),
            SpatialOp::RicianNoise { sigma, .. } => inr(sigma, self.rician_sigma),
            SpatialOp::GaussianNoise { sigma, .. } => inr(sigma, self.gaussian_sigma),
            SpatialOp::GaussianBlur { sigma } => inr(sigma, self.blur_sigma),
            SpatialOp::SquareNoise { max_side, count, .. } => {
                inr(max_side, self.square_max_side)
                    && self.square_count.0 <= count
                    && count <= self.square_count.1
            }
            SpatialOp::ChannelShuffle { perm } => {
                let mut p = perm;
                p.sort_unstable();
                p == [0, 1, 2]
            }
        }
    }

    fn draw_op<R: Rng>(&self, kind: OpKind, rng: &mut R) -> SpatialOp {
        let real = |rng: &mut R, r: Range| if r.0 == r.1 { r.0 } else { rng.random_range(r.0..=r.1) };
        let int = |rng: &mut R, lo: u32, hi: u32| rng.random_range(lo..=hi);
        match kind {
            OpKind::CenterCrop => SpatialOp::CenterCrop {
                height: int(rng, self.crop_min.0, self.crop_max.0),
                width: int(rng, self.crop_min.1, self.crop_max.1),
            },
            OpKind::Pad => SpatialOp::Pad {
                height: int(rng, self.pad_min.0, self.pad_max.0),
                width: int(rng, self.pad_min.1, self.pad_max.1),
            },
            OpKind::Rot90 => SpatialOp::Rot90 {
                quarter_turns: rng.random_range(self.quarter_turns.0..=self.quarter_turns.1),
            },
            OpKind::Mirror => SpatialOp::Mirror { axis: if rng.random_bool(0.5) { Axis::X } else { Axis::Y } },
            OpKind::Zoom => SpatialOp::Zoom { factor: real(rng, self.zoom) },
            OpKind::Rotate => SpatialOp::Rotate { degrees: real(rng, self.rotate_degrees) },
            OpKind::Contrast => SpatialOp::Contrast { factor: real(rng, self.contrast) },
            OpKind::BrightnessAdd => SpatialOp::BrightnessAdd { offset: real(rng, self.brightness_add) },
            OpKind::BrightnessMul => SpatialOp::BrightnessMul { factor: real(rng, self.brightness_mul) },
            OpKind::Gamma => SpatialOp::Gamma { gamma: real(rng, self.gamma) },
            OpKind::Downsample => SpatialOp::Downsample { factor: real(rng, self.downsample) },
            OpKind::RicianNoise => SpatialOp::RicianNoise { sigma: real(rng, self.rician_sigma), seed: rng.random() },
            OpKind::GaussianNoise => {
                SpatialOp::GaussianNoise { sigma: real(rng, self.gaussian_sigma), seed: rng.random() }
            }
            OpKind::GaussianBlur => SpatialOp::GaussianBlur { sigma: real(rng, self.blur_sigma) },
            OpKind::SquareNoise => SpatialOp::SquareNoise {
                max_side: real(rng, self.square_max_side),
                count: int(rng, self.square_count.0, self.square_count.1),
                seed: rng.random(),
            },
            OpKind::Invert => SpatialOp::Invert,
            OpKind::ChannelShuffle => {
                let mut perm = [0u8, 1, 2];
                perm.shuffle(rng);
                SpatialOp::ChannelShuffle { perm }
            }
        }
    }

    /// Parameters that leave a frame unchanged. `None` for operators
    /// without a neutral setting (inversion, mirroring, quarter turns).
    pub fn neutral(&self, kind: OpKind) -> Option<SpatialOp> {
        Some(match kind {
            OpKind::CenterCrop => SpatialOp::CenterCrop { height: self.reference.0, width: self.reference.1 },
            OpKind::Pad => SpatialOp::Pad { height: self.reference.0, width: self.reference.1 },
            OpKind::Zoom => SpatialOp::Zoom { factor: 1.0 },
            OpKind::Rotate => SpatialOp::Rotate { degrees: 0.0 },
            OpKind::Contrast => SpatialOp::Contrast { factor: 1.0 },
            OpKind::BrightnessAdd => SpatialOp::BrightnessAdd { offset: 0.0 },
            OpKind::BrightnessMul => SpatialOp::BrightnessMul { factor: 1.0 },
            OpKind::Gamma => SpatialOp::Gamma { gamma: 1.0 },
            OpKind::Downsample => SpatialOp::Downsample { factor: 1.0 },
            OpKind::RicianNoise => SpatialOp::RicianNoise { sigma: 0.0, seed: 0 },
            OpKind::GaussianNoise => SpatialOp::GaussianNoise { sigma: 0.0, seed: 0 },
            OpKind::GaussianBlur => SpatialOp::GaussianBlur { sigma: 0.0 },
            OpKind::SquareNoise => SpatialOp::SquareNoise { max_side: 0.0, count: 0, seed: 0 },
            OpKind::ChannelShuffle => SpatialOp::ChannelShuffle { perm: [0, 1, 2] },
            OpKind::Rot90 | OpKind::Mirror | OpKind::Invert => return None,
        })
    }
}

/// Operators to run, in execution order, plus which kinds were selected.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SpatialParamSet {
    pub reference: (u32, u32),
    pub ops: Vec<SpatialOp>,
    /// Selected kinds in canonical order.
    pub selected: Vec<OpKind>,
}

impl SpatialParamSet {
    pub fn identity() -> Self {
        Self { reference: SpatialRanges::default().reference, ops: Vec::new(), selected: Vec::new() }
    }

    pub fn from_ops(reference: (u32, u32), ops: Vec<SpatialOp>) -> Self {
        let mut selected: Vec<OpKind> = ops.iter().map(OpKind::of).collect();
        selected.sort();
        Self { reference, ops, selected }
    }

    pub fn is_identity(&self) -> bool {
        self.ops.is_empty()
    }
}

/// Selects each operator independently with the configured probability,
/// shuffles the execution order, and draws every parameter uniformly.
///
/// Each operator's parameters come from their own stream so that changes
/// in selection or order leave other operators' draws untouched.
pub fn draw_params<R: Rng>(rng: &mut R, ranges: &SpatialRanges) -> SpatialParamSet {
    let base: u64 = rng.random();
    let selected: Vec<OpKind> = OpKind::ALL
        .iter()
        .copied()
        .filter(|_| rng.random_bool(ranges.selection_probability))
        .collect();
    let mut order = selected.clone();
    order.shuffle(rng);
    let ops = order
        .into_iter()
        .map(|kind| ranges.draw_op(kind, &mut rng::stream(base, "spatial-op", kind.index())))
        .collect();
    SpatialParamSet { reference: ranges.reference, ops, selected }
}

pub fn apply(params: &SpatialParamSet, frame: &PixelBuffer) -> PixelBuffer {
    apply_at(params, frame, 0)
}

/// Applies the operators in order; `frame_index` only affects noise draws.
pub fn apply_at(params: &SpatialParamSet, frame: &PixelBuffer, frame_index: u64) -> PixelBuffer {
    let ctx = Context { reference: params.reference, frame_index };
    let mut cur = frame.clone();
    for op in &params.ops {
        cur = op.apply(&cur, &ctx);
    }
    cur
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StreamRng;
    use rand::SeedableRng;

    fn random_image(w: usize, h: usize, seed: u64) -> PixelBuffer {
        let mut rng = StreamRng::seed_from_u64(seed);
        PixelBuffer::from_fn(w, h, |_, _, _| rng.random())
    }

    #[test]
    fn same_seed_same_params() {
        let r = SpatialRanges::default();
        let a = draw_params(&mut StreamRng::seed_from_u64(5), &r);
        let b = draw_params(&mut StreamRng::seed_from_u64(5), &r);
        assert_eq!(a, b);
    }

    #[test]
    fn drawn_params_lie_in_ranges() {
        let r = SpatialRanges::default();
        let mut rng = StreamRng::seed_from_u64(1);
        for _ in 0..2000 {
            let p = draw_params(&mut rng, &r);
            assert!(p.ops.iter().all(|op| r.contains(op)));
            let mut kinds: Vec<OpKind> = p.ops.iter().map(OpKind::of).collect();
            kinds.sort();
            assert_eq!(kinds, p.selected);
        }
    }

    #[test]
    fn neutral_pipeline_is_identity() {
        let r = SpatialRanges::default();
        let ops: Vec<SpatialOp> = OpKind::ALL.iter().filter_map(|&k| r.neutral(k)).collect();
        assert_eq!(ops.len(), 14);
        let params = SpatialParamSet::from_ops(r.reference, ops);
        for (w, h) in [(8, 8), (32, 18), (1, 1)] {
            let img = random_image(w, h, 3);
            assert_eq!(apply_at(&params, &img, 7), img);
        }
    }

    #[test]
    fn params_serialize() {
        let p = draw_params(&mut StreamRng::seed_from_u64(9), &SpatialRanges::default());
        let json = serde_json::to_string(&p).unwrap();
        let back: SpatialParamSet = serde_json::from_str(&json).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn reference_scaling_on_native_frames() {
        let img = random_image(192, 108, 2);
        let params = SpatialParamSet::from_ops((108, 192), vec![SpatialOp::CenterCrop { height: 84, width: 108 }]);
        let out = apply(&params, &img);
        assert_eq!((out.height(), out.width()), (84, 108));
    }
}
