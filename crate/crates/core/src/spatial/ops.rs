//! Pixel-level implementation of the spatial operators.
//!
//! Geometric sizes are given in pixels of a reference resolution and
//! scaled to the actual frame, so the same parameter set behaves alike on
//! full-size and thumbnail frames. Intensity results are rounded and
//! clamped to `[0, 255]`.

use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::rng::{derive_seed, StreamRng};
use crate::spatial::PixelBuffer;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    /// Reverse columns.
    X,
    /// Reverse rows.
    Y,
}

/// One parameterized operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum SpatialOp {
    CenterCrop { height: u32, width: u32 },
    Pad { height: u32, width: u32 },
    Rot90 { quarter_turns: u8 },
    Mirror { axis: Axis },
    Zoom { factor: f64 },
    Rotate { degrees: f64 },
    Contrast { factor: f64 },
    BrightnessAdd { offset: f64 },
    BrightnessMul { factor: f64 },
    Gamma { gamma: f64 },
    Downsample { factor: f64 },
    RicianNoise { sigma: f64, seed: u64 },
    GaussianNoise { sigma: f64, seed: u64 },
    GaussianBlur { sigma: f64 },
    SquareNoise { max_side: f64, count: u32, seed: u64 },
    Invert,
    ChannelShuffle { perm: [u8; 3] },
}

/// Frame geometry context for one application.
#[derive(Debug, Clone, Copy)]
pub struct Context {
    /// Reference resolution `(height, width)` for pixel-valued parameters.
    pub reference: (u32, u32),
    /// Position of the frame in its video; decorrelates per-frame noise.
    pub frame_index: u64,
}

impl SpatialOp {
    pub fn apply(&self, img: &PixelBuffer, ctx: &Context) -> PixelBuffer {
        let (ref_h, ref_w) = (f64::from(ctx.reference.0), f64::from(ctx.reference.1));
        let (h, w) = (img.height(), img.width());
        let scale_h = |v: f64| (v * h as f64 / ref_h).round().max(1.0) as usize;
        let scale_w = |v: f64| (v * w as f64 / ref_w).round().max(1.0) as usize;
        match *self {
            SpatialOp::CenterCrop { height, width } => {
                center_crop(img, scale_h(f64::from(height)).min(h), scale_w(f64::from(width)).min(w))
            }
            SpatialOp::Pad { height, width } => {
                pad(img, scale_h(f64::from(height)).max(h), scale_w(f64::from(width)).max(w))
            }
            SpatialOp::Rot90 { quarter_turns } => rot90(img, quarter_turns),
            SpatialOp::Mirror { axis } => mirror(img, axis),
            SpatialOp::Zoom { factor } => zoom(img, factor),
            SpatialOp::Rotate { degrees } => rotate(img, degrees),
            SpatialOp::Contrast { factor } => map_lut(img, |x| (x - 128.0) * factor + 128.0),
            SpatialOp::BrightnessAdd { offset } => map_lut(img, |x| x + offset),
            SpatialOp::BrightnessMul { factor } => map_lut(img, |x| x * factor),
            SpatialOp::Gamma { gamma } => map_lut(img, |x| 255.0 * (x / 255.0).powf(gamma)),
            SpatialOp::Downsample { factor } => downsample(img, factor),
            SpatialOp::RicianNoise { sigma, seed } => noise(img, sigma, seed, ctx.frame_index, true),
            SpatialOp::GaussianNoise { sigma, seed } => noise(img, sigma, seed, ctx.frame_index, false),
            SpatialOp::GaussianBlur { sigma } => gaussian_blur(img, sigma),
            SpatialOp::SquareNoise { max_side, count, seed } => {
                let side = (max_side * h as f64 / ref_h).round() as usize;
                square_noise(img, side, count, seed, ctx.frame_index)
            }
            SpatialOp::Invert => map_bytes(img, |x| 255 - x),
            SpatialOp::ChannelShuffle { perm } => channel_shuffle(img, perm),
        }
    }
}

#[inline]
fn to_u8(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

fn map_bytes(img: &PixelBuffer, f: impl Fn(u8) -> u8) -> PixelBuffer {
    let mut out = img.clone();
    out.data_mut().iter_mut().for_each(|v| *v = f(*v));
    out
}

/// Applies a per-intensity function through a 256-entry table.
pub fn map_lut(img: &PixelBuffer, f: impl Fn(f64) -> f64) -> PixelBuffer {
    let lut: Vec<u8> = (0..=255u8).map(|v| to_u8(f(f64::from(v)))).collect();
    map_bytes(img, |v| lut[v as usize])
}

pub fn center_crop(img: &PixelBuffer, h: usize, w: usize) -> PixelBuffer {
    let (h, w) = (h.clamp(1, img.height()), w.clamp(1, img.width()));
    let (y0, x0) = ((img.height() - h) / 2, (img.width() - w) / 2);
    PixelBuffer::from_fn(w, h, |x, y, c| img.get(x + x0, y + y0, c))
}

/// Centers `img` on a black canvas of at least its own size.
pub fn pad(img: &PixelBuffer, h: usize, w: usize) -> PixelBuffer {
    let (h, w) = (h.max(img.height()), w.max(img.width()));
    let (y0, x0) = ((h - img.height()) / 2, (w - img.width()) / 2);
    PixelBuffer::from_fn(w, h, |x, y, c| {
        if x >= x0 && y >= y0 && x - x0 < img.width() && y - y0 < img.height() {
            img.get(x - x0, y - y0, c)
        } else {
            0
        }
    })
}

/// Counter-clockwise rotation by `k` quarter turns.
pub fn rot90(img: &PixelBuffer, k: u8) -> PixelBuffer {
    let (w, h) = (img.width(), img.height());
    match k % 4 {
        0 => img.clone(),
        1 => PixelBuffer::from_fn(h, w, |x, y, c| img.get(w - 1 - y, x, c)),
        2 => PixelBuffer::from_fn(w, h, |x, y, c| img.get(w - 1 - x, h - 1 - y, c)),
        _ => PixelBuffer::from_fn(h, w, |x, y, c| img.get(y, h - 1 - x, c)),
    }
}

pub fn mirror(img: &PixelBuffer, axis: Axis) -> PixelBuffer {
    let (w, h) = (img.width(), img.height());
    match axis {
        Axis::X => PixelBuffer::from_fn(w, h, |x, y, c| img.get(w - 1 - x, y, c)),
        Axis::Y => PixelBuffer::from_fn(w, h, |x, y, c| img.get(x, h - 1 - y, c)),
    }
}

/// Bilinear sample with edge clamping at continuous pixel coordinates.
fn sample_clamped(img: &PixelBuffer, fx: f64, fy: f64, c: usize) -> f64 {
    let fx = fx.clamp(0.0, (img.width() - 1) as f64);
    let fy = fy.clamp(0.0, (img.height() - 1) as f64);
    let (x0, y0) = (fx.floor() as usize, fy.floor() as usize);
    let (x1, y1) = ((x0 + 1).min(img.width() - 1), (y0 + 1).min(img.height() - 1));
    let (tx, ty) = (fx - x0 as f64, fy - y0 as f64);
    let top = f64::from(img.get(x0, y0, c)) * (1.0 - tx) + f64::from(img.get(x1, y0, c)) * tx;
    let bottom = f64::from(img.get(x0, y1, c)) * (1.0 - tx) + f64::from(img.get(x1, y1, c)) * tx;
    top * (1.0 - ty) + bottom * ty
}

/// Bilinear resize with pixel-center alignment; same size returns a copy.
pub fn resize(img: &PixelBuffer, w: usize, h: usize) -> PixelBuffer {
    let (w, h) = (w.max(1), h.max(1));
    if (w, h) == (img.width(), img.height()) {
        return img.clone();
    }
    let sx = img.width() as f64 / w as f64;
    let sy = img.height() as f64 / h as f64;
    PixelBuffer::from_fn(w, h, |x, y, c| {
        to_u8(sample_clamped(img, (x as f64 + 0.5) * sx - 0.5, (y as f64 + 0.5) * sy - 0.5, c))
    })
}

/// Magnifies the central `factor` fraction of the frame back to full size.
pub fn zoom(img: &PixelBuffer, factor: f64) -> PixelBuffer {
    let f = factor.clamp(0.0, 1.0);
    let h = ((img.height() as f64) * f).round().max(1.0) as usize;
    let w = ((img.width() as f64) * f).round().max(1.0) as usize;
    let region = center_crop(img, h, w);
    resize(&region, img.width(), img.height())
}

/// Shrinks (or enlarges) by `factor` and scales back, losing detail.
pub fn downsample(img: &PixelBuffer, factor: f64) -> PixelBuffer {
    let h = ((img.height() as f64) * factor).round().max(1.0) as usize;
    let w = ((img.width() as f64) * factor).round().max(1.0) as usize;
    resize(&resize(img, w, h), img.width(), img.height())
}

/// Rotation about the frame center, same output size, black outside.
pub fn rotate(img: &PixelBuffer, degrees: f64) -> PixelBuffer {
    if degrees == 0.0 {
        return img.clone();
    }
    let (sin, cos) = degrees.to_radians().sin_cos();
    let cx = (img.width() as f64 - 1.0) / 2.0;
    let cy = (img.height() as f64 - 1.0) / 2.0;
    let (wmax, hmax) = ((img.width() - 1) as f64, (img.height() - 1) as f64);
    PixelBuffer::from_fn(img.width(), img.height(), |x, y, c| {
        let (dx, dy) = (x as f64 - cx, y as f64 - cy);
        // inverse mapping: rotate the output coordinate back into the source
        let sx = cos * dx + sin * dy + cx;
        let sy = -sin * dx + cos * dy + cy;
        if sx < -0.5 || sy < -0.5 || sx > wmax + 0.5 || sy > hmax + 0.5 {
            0
        } else {
            to_u8(sample_clamped(img, sx, sy, c))
        }
    })
}

fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as i64;
    let raw: Vec<f64> = (-radius..=radius)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / sum).collect()
}

/// Separable Gaussian blur with radius `ceil(3 * sigma)` and clamped edges.
pub fn gaussian_blur(img: &PixelBuffer, sigma: f64) -> PixelBuffer {
    if !(sigma > 0.0) {
        return img.clone();
    }
    let k = gaussian_kernel(sigma);
    let r = (k.len() / 2) as i64;
    let (w, h) = (img.width() as i64, img.height() as i64);
    let mut tmp = vec![0.0f64; img.data().len()];
    for y in 0..h {
        for x in 0..w {
            for c in 0..3 {
                let mut acc = 0.0;
                for (i, wt) in k.iter().enumerate() {
                    let sx = (x + i as i64 - r).clamp(0, w - 1);
                    acc += wt * f64::from(img.get(sx as usize, y as usize, c));
                }
                tmp[((y * w + x) * 3) as usize + c] = acc;
            }
        }
    }
    PixelBuffer::from_fn(img.width(), img.height(), |x, y, c| {
        let mut acc = 0.0;
        for (i, wt) in k.iter().enumerate() {
            let sy = (y as i64 + i as i64 - r).clamp(0, h - 1);
            acc += wt * tmp[((sy * w + x as i64) * 3) as usize + c];
        }
        to_u8(acc)
    })
}

fn noise_rng(seed: u64, tag: &str, frame: u64) -> StreamRng {
    StreamRng::seed_from_u64(derive_seed(seed, tag, frame))
}

/// Additive Gaussian noise, or the Rician magnitude
/// `sqrt((x + sigma * n1)^2 + (sigma * n2)^2)` when `rician` is set.
pub fn noise(img: &PixelBuffer, sigma: f64, seed: u64, frame: u64, rician: bool) -> PixelBuffer {
    if !(sigma > 0.0) {
        return img.clone();
    }
    let mut rng = noise_rng(seed, if rician { "rician" } else { "gaussian" }, frame);
    let mut out = img.clone();
    for v in out.data_mut() {
        let x = f64::from(*v);
        let n1: f64 = StandardNormal.sample(&mut rng);
        *v = if rician {
            let n2: f64 = StandardNormal.sample(&mut rng);
            to_u8(((x + sigma * n1).powi(2) + (sigma * n2).powi(2)).sqrt())
        } else {
            to_u8(x + sigma * n1)
        };
    }
    out
}

/// `count` axis-aligned squares with sides in `[1, max_side]`, filled with uniform noise.
pub fn square_noise(img: &PixelBuffer, max_side: usize, count: u32, seed: u64, frame: u64) -> PixelBuffer {
    if count == 0 || max_side == 0 {
        return img.clone();
    }
    let mut rng = noise_rng(seed, "squares", frame);
    let mut out = img.clone();
    let (w, h) = (img.width(), img.height());
    for _ in 0..count {
        let side = rng.random_range(1..=max_side);
        let x0 = rng.random_range(0..w);
        let y0 = rng.random_range(0..h);
        for y in y0..(y0 + side).min(h) {
            for x in x0..(x0 + side).min(w) {
                for c in 0..3 {
                    out.set(x, y, c, rng.random());
                }
            }
        }
    }
    out
}

/// Output channel `c` takes input channel `perm[c]`.
pub fn channel_shuffle(img: &PixelBuffer, perm: [u8; 3]) -> PixelBuffer {
    let mut out = img.clone();
    for (dst, src) in out.data_mut().chunks_exact_mut(3).zip(img.data().chunks_exact(3)) {
        for c in 0..3 {
            dst[c] = src[perm[c] as usize % 3];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_image(w: usize, h: usize, seed: u64) -> PixelBuffer {
        let mut rng = StreamRng::seed_from_u64(seed);
        PixelBuffer::from_fn(w, h, |_, _, _| rng.random())
    }

    #[test]
    fn brightness_clamps() {
        let img = PixelBuffer::filled(1, 1, [250, 10, 0]);
        let out = map_lut(&img, |x| x + 64.0);
        assert_eq!(out.data(), &[255, 74, 64]);
    }

    #[test]
    fn rot90_shapes_and_identity() {
        let img = random_image(5, 3, 1);
        let once = rot90(&img, 1);
        assert_eq!((once.width(), once.height()), (3, 5));
        assert_eq!(rot90(&rot90(&once, 1), 2), img);
        assert_eq!(rot90(&img, 3), rot90(&rot90(&img, 2), 1));
    }

    #[test]
    fn rot90_moves_corner() {
        // top-right pixel ends up top-left after a counter-clockwise turn
        let img = PixelBuffer::from_fn(2, 1, |x, _, _| if x == 1 { 200 } else { 0 });
        let r = rot90(&img, 1);
        assert_eq!(r.get(0, 0, 0), 200);
    }

    #[test]
    fn crop_and_pad_geometry() {
        let img = random_image(6, 4, 2);
        let c = center_crop(&img, 2, 4);
        assert_eq!((c.width(), c.height()), (4, 2));
        assert_eq!(c.get(0, 0, 0), img.get(1, 1, 0));
        assert_eq!(center_crop(&img, 10, 10), img);
        let p = pad(&img, 6, 8);
        assert_eq!((p.width(), p.height()), (8, 6));
        assert_eq!(p.get(1, 1, 2), img.get(0, 0, 2));
        assert_eq!(p.get(0, 0, 0), 0);
        assert_eq!(center_crop(&p, 4, 6), img);
    }

    #[test]
    fn zoom_clamps_to_one_pixel() {
        let img = random_image(8, 8, 3);
        let z = zoom(&img, 0.03);
        assert_eq!((z.width(), z.height()), (8, 8));
        assert!(z.data().chunks(3).all(|p| p == &z.data()[..3]));
        assert_eq!(zoom(&img, 1.0), img);
    }

    #[test]
    fn neutral_parameters_are_identities() {
        let img = random_image(9, 7, 4);
        assert_eq!(downsample(&img, 1.0), img);
        assert_eq!(rotate(&img, 0.0), img);
        assert_eq!(gaussian_blur(&img, 0.0), img);
        assert_eq!(noise(&img, 0.0, 1, 0, false), img);
        assert_eq!(noise(&img, 0.0, 1, 0, true), img);
        assert_eq!(square_noise(&img, 5, 0, 1, 0), img);
        assert_eq!(map_lut(&img, |x| 255.0 * (x / 255.0).powf(1.0)), img);
        assert_eq!(map_lut(&img, |x| (x - 128.0) * 1.0 + 128.0), img);
        assert_eq!(channel_shuffle(&img, [0, 1, 2]), img);
    }

    #[test]
    fn rotation_by_180_degrees_matches_two_quarter_turns() {
        let img = random_image(7, 5, 5);
        assert_eq!(rotate(&img, 180.0), rot90(&img, 2));
    }

    #[test]
    fn channel_shuffle_permutes_planes() {
        let img = random_image(4, 4, 6);
        let out = channel_shuffle(&img, [2, 0, 1]);
        let plane = |b: &PixelBuffer, c: usize| b.data().iter().skip(c).step_by(3).copied().collect::<Vec<_>>();
        assert_eq!(plane(&out, 0), plane(&img, 2));
        assert_eq!(plane(&out, 1), plane(&img, 0));
        assert_eq!(plane(&out, 2), plane(&img, 1));
    }

    #[test]
    fn blur_difference_grows_with_sigma() {
        let img = PixelBuffer::from_fn(64, 16, |x, _, c| if x >= 32 { 230 - 10 * c as u8 } else { 20 });
        let mut prev = 0.0;
        for i in 0..=28 {
            let sigma = f64::from(i) * 0.25;
            let d = gaussian_blur(&img, sigma).mean_abs_diff(&img).unwrap();
            assert!(d + 1e-12 >= prev, "sigma {sigma}: {d} < {prev}");
            prev = d;
        }
    }

    #[test]
    fn noise_is_seeded() {
        let img = random_image(5, 5, 7);
        assert_eq!(noise(&img, 10.0, 3, 1, true), noise(&img, 10.0, 3, 1, true));
        assert_ne!(noise(&img, 10.0, 3, 1, false), noise(&img, 10.0, 3, 2, false));
        assert_eq!(square_noise(&img, 3, 4, 9, 0), square_noise(&img, 3, 4, 9, 0));
    }
}
