//! Halton low-discrepancy sequence.

use std::marker::PhantomData;

use crate::num::Real;

/// Radical inverse of `index` in `base`: the base-`base` digits of `index`
/// mirrored around the radix point. Lies in `[0, 1)`.
///
/// Panics if `base < 2`.
pub fn halton<T: Real>(index: u64, base: u64) -> T {
    assert!(base >= 2, "Halton base must be at least 2");
    let inv = T::one() / T::of(base as f64);
    let mut scale = inv;
    let mut out = T::zero();
    let mut i = index;
    while i > 0 {
        out = out + T::of((i % base) as f64) * scale;
        i /= base;
        scale = scale * inv;
    }
    out
}

/// Two-dimensional Halton sampler over bases 2 and 3.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HaltonSampler<T> {
    counter: u64,
    _scalar: PhantomData<T>,
}

impl<T: Real> HaltonSampler<T> {
    pub const BASES: (u64, u64) = (2, 3);

    /// Sampler whose first point has index 1.
    pub fn new() -> Self {
        Self::starting_at(1)
    }

    /// Sampler whose first point has index `max(first, 1)`.
    pub fn starting_at(first: u64) -> Self {
        Self { counter: first.max(1), _scalar: PhantomData }
    }

    /// Index of the next point.
    pub fn counter(&self) -> u64 {
        self.counter
    }

    pub fn next_point(&mut self) -> (T, T) {
        let i = self.counter;
        self.counter += 1;
        (halton(i, Self::BASES.0), halton(i, Self::BASES.1))
    }
}

impl<T: Real> Default for HaltonSampler<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Real> Iterator for HaltonSampler<T> {
    type Item = (T, T);

    fn next(&mut self) -> Option<(T, T)> {
        Some(self.next_point())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_values() {
        assert_eq!(halton::<f64>(1, 2), 0.5);
        assert_eq!(halton::<f64>(2, 2), 0.25);
        assert_eq!(halton::<f64>(3, 2), 0.75);
        assert!((halton::<f64>(1, 3) - 1.0 / 3.0).abs() < 1e-15);
        assert!((halton::<f64>(2, 3) - 2.0 / 3.0).abs() < 1e-15);
        assert!((halton::<f64>(3, 3) - 1.0 / 9.0).abs() < 1e-15);
        assert_eq!(halton::<f32>(3, 2), 0.75f32);
    }

    #[test]
    fn outputs_stay_in_unit_interval() {
        for base in [2, 3, 5, 7] {
            for i in 0..5000 {
                let h = halton::<f64>(i, base);
                assert!((0.0..1.0).contains(&h));
            }
        }
    }

    #[test]
    fn sampler_is_deterministic() {
        let a: Vec<(f64, f64)> = HaltonSampler::starting_at(17).take(10).collect();
        let b: Vec<(f64, f64)> = HaltonSampler::starting_at(17).take(10).collect();
        assert_eq!(a, b);
        assert_eq!(HaltonSampler::<f64>::new().next_point(), (0.5, 1.0 / 3.0));
    }
}
