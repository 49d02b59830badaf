//! Descriptive statistics for corpora of label tracks.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::annotation::{runs, ClassId, LabelTrack};
use crate::num::Real;

/// Linearly interpolated quantile of sorted data (the rank `q * (n - 1)`
/// is interpolated between its neighbours). `None` on empty input.
pub fn quantile_sorted<T: Real>(sorted: &[T], q: T) -> Option<T> {
    let n = sorted.len();
    if n == 0 {
        return None;
    }
    let rank = q.max(T::zero()).min(T::one()) * T::of_usize(n - 1);
    let lo = rank.floor();
    let lo_i = lo.to_usize().unwrap_or(0).min(n - 1);
    let hi_i = (lo_i + 1).min(n - 1);
    let frac = rank - lo;
    Some(sorted[lo_i] + (sorted[hi_i] - sorted[lo_i]) * frac)
}

pub fn mean<T: Real>(xs: &[T]) -> Option<T> {
    (!xs.is_empty()).then(|| xs.iter().copied().sum::<T>() / T::of_usize(xs.len()))
}

/// Mean absolute deviation around the mean.
pub fn mean_abs_dev<T: Real>(xs: &[T]) -> Option<T> {
    let m = mean(xs)?;
    mean(&xs.iter().map(|&x| (x - m).abs()).collect::<Vec<_>>())
}

/// Median absolute deviation around the median.
pub fn median_abs_dev<T: Real>(xs: &[T]) -> Option<T> {
    let mut s = xs.to_vec();
    sort(&mut s);
    let med = quantile_sorted(&s, T::of(0.5))?;
    let mut dev: Vec<T> = s.iter().map(|&x| (x - med).abs()).collect();
    sort(&mut dev);
    quantile_sorted(&dev, T::of(0.5))
}

fn sort<T: Real>(xs: &mut [T]) {
    xs.sort_by(|a, b| a.partial_cmp(b).expect("statistics input contains NaN"));
}

/// Five-number summary plus mean and both absolute deviations.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real"))]
pub struct Summary<T> {
    pub count: usize,
    pub min: T,
    pub q1: T,
    pub median: T,
    pub q3: T,
    pub max: T,
    pub mean: T,
    pub mean_abs_dev: T,
    pub median_abs_dev: T,
}

impl<T: Real> Summary<T> {
    /// `None` on empty input.
    pub fn of(values: &[T]) -> Option<Self> {
        let mut s = values.to_vec();
        sort(&mut s);
        Some(Self {
            count: s.len(),
            min: *s.first()?,
            q1: quantile_sorted(&s, T::of(0.25))?,
            median: quantile_sorted(&s, T::of(0.5))?,
            q3: quantile_sorted(&s, T::of(0.75))?,
            max: *s.last()?,
            mean: mean(&s)?,
            mean_abs_dev: mean_abs_dev(&s)?,
            median_abs_dev: median_abs_dev(&s)?,
        })
    }

    pub fn of_counts(values: &[usize]) -> Option<Self> {
        Self::of(&values.iter().map(|&v| T::of_usize(v)).collect::<Vec<_>>())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VideoStats {
    pub video_id: String,
    pub length: usize,
    pub label_changes: usize,
    pub distinct_labels: usize,
}

impl VideoStats {
    pub fn of(track: &LabelTrack) -> Self {
        let label_changes = track.frames.windows(2).filter(|w| w[0] != w[1]).count();
        let distinct_labels = track.frames.iter().collect::<BTreeSet<_>>().len();
        Self { video_id: track.video_id.clone(), length: track.len(), label_changes, distinct_labels }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real"))]
pub struct CorpusStats<T> {
    pub videos: Vec<VideoStats>,
    pub length: Summary<T>,
    pub label_changes: Summary<T>,
    pub distinct_labels: Summary<T>,
    /// Lengths of maximal constant-class runs over the whole corpus.
    pub run_length: Summary<T>,
}

/// Per-video and corpus-level statistics. `None` when `tracks` is empty.
pub fn corpus_stats<T: Real>(tracks: &[LabelTrack]) -> Option<CorpusStats<T>> {
    let videos: Vec<VideoStats> = tracks.iter().map(VideoStats::of).collect();
    let col = |f: fn(&VideoStats) -> usize| videos.iter().map(f).collect::<Vec<_>>();
    let run_lengths: Vec<usize> = tracks
        .iter()
        .flat_map(|t| runs(&t.frames).into_iter().map(|r| r.len()))
        .collect();
    Some(CorpusStats {
        length: Summary::of_counts(&col(|v| v.length))?,
        label_changes: Summary::of_counts(&col(|v| v.label_changes))?,
        distinct_labels: Summary::of_counts(&col(|v| v.distinct_labels))?,
        run_length: Summary::of_counts(&run_lengths)?,
        videos,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real"))]
pub struct ClassShare<T> {
    pub class: ClassId,
    pub frames: usize,
    pub percent: T,
}

/// Frame share of every class in `0..class_count`, in percent of all frames.
pub fn class_distribution<T: Real>(tracks: &[LabelTrack], class_count: usize) -> Vec<ClassShare<T>> {
    let mut counts = vec![0usize; class_count];
    for t in tracks {
        for c in &t.frames {
            if let Some(slot) = counts.get_mut(c.index()) {
                *slot += 1;
            }
        }
    }
    let total: usize = counts.iter().sum();
    counts
        .into_iter()
        .enumerate()
        .map(|(i, frames)| ClassShare {
            class: ClassId(i as u32),
            frames,
            percent: if total == 0 {
                T::zero()
            } else {
                T::of(100.0) * T::of_usize(frames) / T::of_usize(total)
            },
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn quartiles_interpolate() {
        let s = Summary::<f64>::of(&[4.0, 1.0, 3.0, 2.0]).unwrap();
        assert_eq!((s.q1, s.median, s.q3), (1.75, 2.5, 3.25));
        assert_eq!((s.min, s.max, s.mean), (1.0, 4.0, 2.5));
        assert_eq!(s.mean_abs_dev, 1.0);
        assert_eq!(s.median_abs_dev, 1.0);
        assert!(Summary::<f64>::of(&[]).is_none());
    }

    #[test]
    fn video_stats_examples() {
        let (a, b) = (ClassId(1), ClassId(2));
        let v = VideoStats::of(&LabelTrack::new("v", vec![a, a, b, a]));
        assert_eq!((v.length, v.label_changes, v.distinct_labels), (4, 2, 2));
        let v = VideoStats::of(&LabelTrack::new("v", vec![a; 5]));
        assert_eq!((v.label_changes, v.distinct_labels), (0, 1));
    }

    #[test]
    fn distribution_sums_to_hundred() {
        let t = LabelTrack::new("v", vec![ClassId(0), ClassId(1), ClassId(1), ClassId(3)]);
        let d = class_distribution::<f64>(&[t], 4);
        assert_eq!(d.iter().map(|c| c.frames).collect::<Vec<_>>(), vec![1, 2, 0, 1]);
        let total: f64 = d.iter().map(|c| c.percent).sum();
        assert!((total - 100.0).abs() < 1e-9);
    }

    /// Oracle: the q-quantile is the value `v` such that the interpolated
    /// empirical CDF over ranks reaches q; checked via explicit neighbours.
    fn oracle_quantile(xs: &[f64], q: f64) -> f64 {
        let mut s = xs.to_vec();
        s.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let h = (s.len() - 1) as f64 * q;
        let below = s[h.floor() as usize];
        let above = s[h.ceil() as usize];
        below + (h - h.floor()) * (above - below)
    }

    proptest! {
        #[test]
        fn quantiles_match_oracle(xs in prop::collection::vec(-1e3f64..1e3, 1..50)) {
            let s = Summary::<f64>::of(&xs).unwrap();
            for (q, got) in [(0.25, s.q1), (0.5, s.median), (0.75, s.q3)] {
                prop_assert!((got - oracle_quantile(&xs, q)).abs() < 1e-9);
            }
            prop_assert!(s.min <= s.q1 && s.q1 <= s.median && s.median <= s.q3 && s.q3 <= s.max);
        }
    }
}
