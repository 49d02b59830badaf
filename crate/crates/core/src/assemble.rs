//! Assembly of artificial videos from graph walks and the segment database,
//! plus the split-augmentation baseline.
//!
//! An [`AssemblyPlan`] is an edit decision list: it names the source spans
//! to concatenate, the spatial parameters for the whole video and the speed
//! schedule. A plan and the source corpus reproduce the output exactly.

use std::fs;
use std::path::{Path, PathBuf};

use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::annotation::{ClassCatalog, ClassId, LabelTrack};
use crate::error::{Error, Result};
use crate::graph::{sample_sequence, WalkConfig, WorkflowGraph};
use crate::num::Real;
use crate::rng::{self, StreamRng};
use crate::segment::{Segment, SegmentDb, SegmentKind};
use crate::spatial::{apply_at, draw_params, PixelBuffer, SpatialParamSet, SpatialRanges};
use crate::stats::corpus_stats;
use crate::temporal::{draw_schedule, retime, retime_labels, HaltonSampler, Interpolator, SpeedSchedule, StrideTable};

/// Walks drawn before an uncovered transition becomes an error.
pub const DEFAULT_MAX_RESAMPLES: usize = 100;

/// Speed-schedule settings. Part lengths follow the run-length statistics
/// of the source corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemporalConfig {
    pub strides: StrideTable,
    pub part_mean: f64,
    pub part_mad: f64,
}

impl TemporalConfig {
    /// Mean and mean absolute deviation of all class-run lengths in `tracks`.
    pub fn from_tracks(tracks: &[LabelTrack], strides: StrideTable) -> Result<Self> {
        let stats = corpus_stats::<f64>(tracks).ok_or(Error::NoTracks)?;
        Ok(Self { strides, part_mean: stats.run_length.mean, part_mad: stats.run_length.mean_abs_dev })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.part_mean > 0.0 && self.part_mean.is_finite()) {
            return Err(Error::InvalidArgument(format!("mean part length must be positive, got {}", self.part_mean)));
        }
        if !(self.part_mad >= 0.0 && self.part_mad.is_finite()) {
            return Err(Error::InvalidArgument(format!("part length deviation must be non-negative, got {}", self.part_mad)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssembleConfig {
    pub walk: WalkConfig,
    pub max_resamples: usize,
    /// `None` disables spatial augmentation.
    pub spatial: Option<SpatialRanges>,
    /// `None` keeps the original speed.
    pub temporal: Option<TemporalConfig>,
}

impl Default for AssembleConfig {
    fn default() -> Self {
        Self { walk: WalkConfig::default(), max_resamples: DEFAULT_MAX_RESAMPLES, spatial: None, temporal: None }
    }
}

impl AssembleConfig {
    pub fn validate(&self) -> Result<()> {
        self.walk.validate()?;
        if self.max_resamples == 0 {
            return Err(Error::InvalidArgument("at least one walk must be allowed".into()));
        }
        if let Some(r) = &self.spatial {
            r.validate()?;
        }
        if let Some(t) = &self.temporal {
            t.validate()?;
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form, hex encoded.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hex(&Sha256::digest(&json))
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// One source span of a plan.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanEntry {
    pub segment: String,
    pub video: String,
    pub start: usize,
    pub end: usize,
    pub kind: SegmentKind,
    pub from: ClassId,
    pub to: ClassId,
    pub via_idle: bool,
}

impl PlanEntry {
    fn of(s: &Segment) -> Self {
        Self {
            segment: s.id.clone(),
            video: s.video_id.clone(),
            start: s.start,
            end: s.end,
            kind: s.kind,
            from: s.from,
            to: s.to,
            via_idle: s.via_idle,
        }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssemblyPlan {
    pub plan_id: String,
    pub seed: u64,
    pub config_hash: String,
    /// Walk that produced the plan, after any rejected attempts.
    pub sequence: Vec<ClassId>,
    pub attempts: usize,
    pub entries: Vec<PlanEntry>,
    pub spatial: SpatialParamSet,
    /// First Halton index used for the schedule; 0 when speed is unchanged.
    pub halton_start: u64,
    pub schedule: SpeedSchedule,
    /// Per-frame classes of the concatenated spans, before re-timing.
    pub labels: Vec<ClassId>,
}

impl AssemblyPlan {
    pub fn source_len(&self) -> usize {
        self.labels.len()
    }

    pub fn output_len(&self) -> usize {
        self.schedule.fitted_len(self.labels.len())
    }

    /// Labels after re-timing, i.e. the annotation of the rendered video.
    pub fn output_labels(&self) -> Result<Vec<ClassId>> {
        retime_labels(&self.labels, &self.schedule)
    }

    pub fn output_track(&self) -> Result<LabelTrack> {
        Ok(LabelTrack::new(self.plan_id.clone(), self.output_labels()?))
    }

    /// Structural checks: start first, final last, transitions between,
    /// and every entry's to-class is the next entry's from-class.
    pub fn check_chain(&self) -> Result<()> {
        let (first, last) = match (self.entries.first(), self.entries.last()) {
            (Some(f), Some(l)) if self.entries.len() >= 2 => (f, l),
            _ => return Err(Error::InvalidArgument(format!("plan {} needs a start and a final segment", self.plan_id))),
        };
        if first.kind != SegmentKind::Start || last.kind != SegmentKind::Final {
            return Err(Error::InvalidArgument(format!("plan {} must begin with a start and end with a final segment", self.plan_id)));
        }
        let inner = &self.entries[1..self.entries.len() - 1];
        if let Some(e) = inner.iter().find(|e| e.kind != SegmentKind::Transition) {
            return Err(Error::InvalidArgument(format!("segment {} is not a transition", e.segment)));
        }
        for w in self.entries.windows(2) {
            if w[0].to != w[1].from {
                return Err(Error::InvalidArgument(format!(
                    "segment {} ends in {} but {} starts from {}",
                    w[0].segment, w[0].to, w[1].segment, w[1].from
                )));
            }
        }
        let len: usize = self.entries.iter().map(PlanEntry::len).sum();
        if len != self.labels.len() {
            return Err(Error::LengthMismatch(len, self.labels.len()));
        }
        Ok(())
    }

    /// [`check_chain`](Self::check_chain) plus agreement with `db`.
    pub fn validate(&self, db: &SegmentDb) -> Result<()> {
        self.check_chain()?;
        let mut at = 0;
        for e in &self.entries {
            let s = db.get(&e.segment).ok_or_else(|| Error::UnknownSegment(e.segment.clone()))?;
            if PlanEntry::of(s) != *e || self.labels[at..at + e.len()] != s.classes[..] {
                return Err(Error::InvalidArgument(format!("entry {} disagrees with the segment database", e.segment)));
            }
            at += e.len();
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan serializes") + "\n"
    }

    pub fn from_json(text: &str, source: &Path) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::format(source, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text, path)
    }
}

fn pick<'a, T, R: Rng>(items: &'a [T], rng: &mut R) -> &'a T {
    &items[rng.random_range(0..items.len())]
}

/// Segments for `seq`, or the first gap in coverage.
fn select_segments<'d, R: Rng>(db: &'d SegmentDb, seq: &[ClassId], rng: &mut R) -> Result<Vec<&'d Segment>> {
    if let Some(w) = seq.windows(2).find(|w| !db.covers(w[0], w[1])) {
        return Err(Error::UncoveredTransition { from: w[0].to_string(), to: w[1].to_string() });
    }
    let first = seq[0];
    let last = seq[seq.len() - 1];
    let starts = db.start_segments(first);
    if starts.is_empty() {
        return Err(Error::MissingEndpoint { kind: "start", class: first.to_string() });
    }
    let finals = db.final_segments(last);
    if finals.is_empty() {
        return Err(Error::MissingEndpoint { kind: "final", class: last.to_string() });
    }
    let mut out = vec![*pick(&starts, rng)];
    for w in seq.windows(2) {
        let variants = db.query(w[0], w[1]);
        let variant = pick(&variants, rng);
        out.push(*pick(&variant.segments, rng));
    }
    out.push(*pick(&finals, rng));
    Ok(out)
}

fn is_coverage_gap(e: &Error) -> bool {
    matches!(e, Error::UncoveredTransition { .. } | Error::MissingEndpoint { .. })
}

/// Draws a walk and turns it into a plan. Walks that use a transition or
/// endpoint missing from `db` are rejected and redrawn up to
/// `config.max_resamples` times; the last gap is then reported.
pub fn assemble<T: Real>(
    graph: &WorkflowGraph<T>,
    db: &SegmentDb,
    seed: u64,
    config: &AssembleConfig,
) -> Result<AssemblyPlan> {
    config.validate()?;
    let mut last_gap = None;
    for attempt in 0..config.max_resamples {
        let mut walk_rng: StreamRng = rng::stream(seed, "walk", attempt as u64);
        let sequence = sample_sequence(graph, &mut walk_rng, &config.walk)?;
        let mut pick_rng: StreamRng = rng::stream(seed, "segments", attempt as u64);
        match select_segments(db, &sequence, &mut pick_rng) {
            Ok(segments) => return finish(seed, config, sequence, attempt + 1, &segments),
            Err(e) if is_coverage_gap(&e) => last_gap = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last_gap.expect("at least one attempt"))
}

fn finish(
    seed: u64,
    config: &AssembleConfig,
    sequence: Vec<ClassId>,
    attempts: usize,
    segments: &[&Segment],
) -> Result<AssemblyPlan> {
    let labels: Vec<ClassId> = segments.iter().flat_map(|s| s.classes.iter().copied()).collect();
    let spatial = match &config.spatial {
        Some(ranges) => draw_params(&mut rng::stream(seed, "spatial", 0), ranges),
        None => SpatialParamSet::identity(),
    };
    let (halton_start, schedule) = match &config.temporal {
        Some(t) => {
            let start = rng::stream(seed, "halton", 0).random_range(1..=1u64 << 20);
            let mut sampler = HaltonSampler::<f64>::starting_at(start);
            (start, draw_schedule(&mut sampler, labels.len(), t.part_mean, t.part_mad, &t.strides)?)
        }
        None => (0, SpeedSchedule::constant(64, labels.len())),
    };
    let plan = AssemblyPlan {
        plan_id: format!("plan-{seed:016x}"),
        seed,
        config_hash: config.hash(),
        sequence,
        attempts,
        entries: segments.iter().map(|s| PlanEntry::of(s)).collect(),
        spatial,
        halton_start,
        schedule,
        labels,
    };
    plan.check_chain()?;
    Ok(plan)
}

/// Seed of the `index`-th video generated from `master`.
pub fn video_seed(master: u64, index: usize) -> u64 {
    rng::derive_seed(master, "video", index as u64)
}

/// Resolves source frames by video id and frame index.
pub trait FrameSource: Send + Sync {
    fn frame(&self, video: &str, index: usize) -> Result<PixelBuffer>;
}

/// Frames stored as `<root>/<video>/<index:06>.png`.
#[derive(Debug, Clone)]
pub struct DirFrameSource {
    root: PathBuf,
}

impl DirFrameSource {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn frame_path(&self, video: &str, index: usize) -> PathBuf {
        self.root.join(video).join(frame_file_name(index))
    }
}

pub fn frame_file_name(index: usize) -> String {
    format!("{index:06}.png")
}

impl FrameSource for DirFrameSource {
    fn frame(&self, video: &str, index: usize) -> Result<PixelBuffer> {
        let path = self.frame_path(video, index);
        if !path.is_file() {
            return Err(Error::MissingFrame { video: video.into(), index, reason: format!("{} not found", path.display()) });
        }
        PixelBuffer::load_png(&path).map_err(|e| Error::MissingFrame { video: video.into(), index, reason: e.to_string() })
    }
}

/// Deterministic pseudo-random frames; every `(video, index)` pair has its
/// own content. Frames at or beyond `limit` (when set) are missing.
#[derive(Debug, Clone)]
pub struct SyntheticFrameSource {
    pub width: usize,
    pub height: usize,
    pub limit: Option<usize>,
}

impl SyntheticFrameSource {
    pub fn new(width: usize, height: usize) -> Self {
        Self { width, height, limit: None }
    }
}

impl FrameSource for SyntheticFrameSource {
    fn frame(&self, video: &str, index: usize) -> Result<PixelBuffer> {
        if self.limit.is_some_and(|l| index >= l) {
            return Err(Error::MissingFrame { video: video.into(), index, reason: "beyond synthetic video".into() });
        }
        let mut h = rng::derive_seed(index as u64, video, 0);
        let mut data = Vec::with_capacity(self.width * self.height * 3);
        while data.len() < self.width * self.height * 3 {
            h = rng::mix64(h);
            data.extend_from_slice(&h.to_le_bytes()[..(self.width * self.height * 3 - data.len()).min(8)]);
        }
        PixelBuffer::new(self.width, self.height, data)
    }
}

/// Source frames of every span, in plan order.
pub fn gather_frames(plan: &AssemblyPlan, source: &dyn FrameSource) -> Result<Vec<PixelBuffer>> {
    let mut frames = Vec::with_capacity(plan.source_len());
    for e in &plan.entries {
        for i in e.start..e.end {
            frames.push(source.frame(&e.video, i)?);
        }
    }
    Ok(frames)
}

/// Re-times the concatenated spans and applies the spatial parameters to
/// every output frame. Frames and labels have equal length.
pub fn render(
    plan: &AssemblyPlan,
    source: &dyn FrameSource,
    interpolator: &dyn Interpolator,
) -> Result<(Vec<PixelBuffer>, LabelTrack)> {
    let frames = gather_frames(plan, source)?;
    let (frames, labels) = retime(&frames, &plan.labels, &plan.schedule, interpolator)?;
    let frames = frames.iter().enumerate().map(|(i, f)| apply_at(&plan.spatial, f, i as u64)).collect();
    Ok((frames, LabelTrack::new(plan.plan_id.clone(), labels)))
}

/// One sub-video of the split baseline: frames `offset, offset + step, ...`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub plan_id: String,
    pub seed: u64,
    pub video: String,
    pub source_len: usize,
    pub offset: usize,
    pub step: usize,
    pub spatial: SpatialParamSet,
    pub labels: Vec<ClassId>,
}

impl SplitPlan {
    pub fn frame_indices(&self) -> impl Iterator<Item = usize> {
        (self.offset..self.source_len).step_by(self.step)
    }

    pub fn track(&self) -> LabelTrack {
        LabelTrack::new(self.plan_id.clone(), self.labels.clone())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan serializes") + "\n"
    }

    pub fn render(&self, source: &dyn FrameSource) -> Result<(Vec<PixelBuffer>, LabelTrack)> {
        let frames = self
            .frame_indices()
            .enumerate()
            .map(|(i, n)| Ok(apply_at(&self.spatial, &source.frame(&self.video, n)?, i as u64)))
            .collect::<Result<Vec<_>>>()?;
        Ok((frames, self.track()))
    }
}

/// Splits `track` into `k` sub-videos taking every `k`-th frame; each gets
/// its own spatial parameters when `ranges` is set.
pub fn split_augment(track: &LabelTrack, k: usize, seed: u64, ranges: Option<&SpatialRanges>) -> Result<Vec<SplitPlan>> {
    if k == 0 {
        return Err(Error::InvalidArgument("split factor must be positive".into()));
    }
    if track.len() < k {
        return Err(Error::InvalidArgument(format!(
            "video {} has {} frames, fewer than the split factor {k}",
            track.video_id,
            track.len()
        )));
    }
    Ok((0..k)
        .map(|i| {
            let sub_seed = rng::derive_seed(seed, &track.video_id, i as u64);
            let spatial = match ranges {
                Some(r) => draw_params(&mut rng::stream(sub_seed, "spatial", 0), r),
                None => SpatialParamSet::identity(),
            };
            SplitPlan {
                plan_id: format!("{}-split{i:02}", track.video_id),
                seed: sub_seed,
                video: track.video_id.clone(),
                source_len: track.len(),
                offset: i,
                step: k,
                spatial,
                labels: track.frames.iter().skip(i).step_by(k).copied().collect(),
            }
        })
        .collect())
}

/// Class names along a plan's walk, for reports.
pub fn describe_sequence(plan: &AssemblyPlan, catalog: &ClassCatalog) -> String {
    plan.sequence.iter().map(|&c| catalog.class_name(c)).collect::<Vec<_>>().join(" -> ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::WeightMode;
    use crate::temporal::IdentityInterpolator;
    use std::collections::BTreeMap;

    fn catalog(n: usize) -> ClassCatalog {
        let mut text = String::new();
        for i in 0..n {
            text.push_str(&format!("[[tools]]\nname = \"t{i}\"\n"));
        }
        ClassCatalog::parse_toml(&text).unwrap()
    }

    fn track(id: &str, runs: &[(u32, usize)]) -> LabelTrack {
        LabelTrack::new(id, runs.iter().flat_map(|&(c, n)| std::iter::repeat_n(ClassId(c), n)).collect())
    }

    fn setup(tracks: &[LabelTrack], tools: usize) -> (WorkflowGraph<f64>, SegmentDb) {
        let cat = catalog(tools);
        let g = WorkflowGraph::extract(tracks, &cat, WeightMode::Uniform).unwrap();
        let db = SegmentDb::from_tracks(tracks, &cat).unwrap();
        (g, db)
    }

    #[test]
    fn two_class_sequence_uses_exactly_three_segments() {
        let (g, db) = setup(&[track("v", &[(1, 6), (2, 6)])], 2);
        let plan = assemble(&g, &db, 3, &AssembleConfig::default()).unwrap();
        let ids: Vec<_> = plan.entries.iter().map(|e| e.segment.as_str()).collect();
        assert_eq!(ids, ["v:0000", "v:0001", "v:0002"]);
        assert_eq!(plan.sequence, vec![ClassId(1), ClassId(2)]);
        plan.validate(&db).unwrap();
        assert_eq!(plan.labels, track("x", &[(1, 6), (2, 6)]).frames);
    }

    #[test]
    fn same_seed_same_plan() {
        let tracks = [track("a", &[(1, 5), (2, 4), (1, 3), (3, 6)]), track("b", &[(1, 4), (0, 2), (2, 5), (3, 3)])];
        let (g, db) = setup(&tracks, 3);
        let mut cfg = AssembleConfig { spatial: Some(SpatialRanges::default()), ..Default::default() };
        cfg.temporal = Some(TemporalConfig::from_tracks(&tracks, StrideTable::canonical()).unwrap());
        let a = assemble(&g, &db, 99, &cfg).unwrap();
        assert_eq!(a, assemble(&g, &db, 99, &cfg).unwrap());
        let back = AssemblyPlan::from_json(&a.to_json(), Path::new("p")).unwrap();
        assert_eq!(a, back);
        for seed in 0..50 {
            assemble(&g, &db, seed, &cfg).unwrap().validate(&db).unwrap();
        }
    }

    #[test]
    fn variants_are_chosen_uniformly_first() {
        // 1 -> 2 has two direct segments and one via idle.
        let tracks = [
            track("a", &[(1, 4), (2, 4)]),
            track("b", &[(1, 4), (2, 4)]),
            track("c", &[(1, 4), (0, 3), (2, 4)]),
        ];
        let (g, db) = setup(&tracks, 2);
        let mut via = 0;
        let n = 2000;
        for seed in 0..n {
            let plan = assemble(&g, &db, seed, &AssembleConfig::default()).unwrap();
            via += usize::from(plan.entries[1].via_idle);
        }
        // expect one half, not one third
        let p = via as f64 / n as f64;
        assert!((p - 0.5).abs() < 3.0 * (0.25f64 / n as f64).sqrt() + 0.01, "{p}");
    }

    #[test]
    fn uncovered_transition_is_reported() {
        // Graph from one corpus, segments from a corpus lacking 2 -> 3.
        let cat = catalog(3);
        let g = WorkflowGraph::<f64>::extract(&[track("a", &[(1, 4), (2, 4), (3, 4)])], &cat, WeightMode::Uniform).unwrap();
        let db = SegmentDb::from_tracks(&[track("b", &[(1, 4), (2, 4)]), track("c", &[(3, 4)])], &cat).unwrap();
        let cfg = AssembleConfig { max_resamples: 5, ..Default::default() };
        match assemble(&g, &db, 1, &cfg) {
            Err(Error::UncoveredTransition { from, to }) => assert_eq!((from.as_str(), to.as_str()), ("#2", "#3")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn resampling_skips_gaps() {
        // 1 -> 2 -> 4 is covered, 1 -> 3 -> 4 is not.
        let cat = catalog(4);
        let g = WorkflowGraph::<f64>::extract(
            &[track("a", &[(1, 4), (2, 4), (4, 4)]), track("b", &[(1, 4), (3, 4), (4, 4)])],
            &cat,
            WeightMode::Uniform,
        )
        .unwrap();
        let db = SegmentDb::from_tracks(&[track("a", &[(1, 4), (2, 4), (4, 4)]), track("c", &[(3, 4)])], &cat).unwrap();
        let mut attempts = BTreeMap::new();
        for seed in 0..100 {
            let plan = assemble(&g, &db, seed, &AssembleConfig::default()).unwrap();
            assert_eq!(plan.sequence, vec![ClassId(1), ClassId(2), ClassId(4)]);
            *attempts.entry(plan.attempts > 1).or_insert(0) += 1;
        }
        assert!(attempts[&true] > 10);
    }

    #[test]
    fn broken_chain_is_rejected() {
        let (g, db) = setup(&[track("v", &[(1, 6), (2, 6)])], 2);
        let mut plan = assemble(&g, &db, 0, &AssembleConfig::default()).unwrap();
        plan.entries.swap(1, 2);
        assert!(plan.check_chain().is_err());
    }

    #[test]
    fn identity_render_reproduces_source() {
        let (g, db) = setup(&[track("v", &[(1, 6), (2, 6)])], 2);
        let plan = assemble(&g, &db, 0, &AssembleConfig::default()).unwrap();
        let src = SyntheticFrameSource::new(8, 8);
        let (frames, labels) = render(&plan, &src, &IdentityInterpolator).unwrap();
        let expect: Vec<_> = (0..12).map(|i| src.frame("v", i).unwrap()).collect();
        assert_eq!(frames, expect);
        assert_eq!(labels.frames, plan.labels);
    }

    #[test]
    fn render_length_matches_schedule() {
        let tracks = [track("v", &[(1, 9), (2, 7), (1, 5)])];
        let (g, db) = setup(&tracks, 2);
        let cfg = AssembleConfig {
            temporal: Some(TemporalConfig::from_tracks(&tracks, StrideTable::canonical()).unwrap()),
            ..Default::default()
        };
        for seed in 0..5 {
            let plan = assemble(&g, &db, seed, &cfg).unwrap();
            let (frames, labels) = render(&plan, &SyntheticFrameSource::new(8, 8), &IdentityInterpolator).unwrap();
            let expect: usize = plan.schedule.parts.iter().map(|p| p.len).sum();
            assert_eq!(frames.len(), expect);
            assert_eq!(labels.len(), expect);
        }
    }

    #[test]
    fn missing_frame_names_video_and_index() {
        let (g, db) = setup(&[track("v", &[(1, 6), (2, 6)])], 2);
        let plan = assemble(&g, &db, 0, &AssembleConfig::default()).unwrap();
        let src = SyntheticFrameSource { limit: Some(10), ..SyntheticFrameSource::new(4, 4) };
        let err = render(&plan, &src, &IdentityInterpolator).unwrap_err();
        assert!(matches!(err, Error::MissingFrame { ref video, index: 10, .. } if video == "v"), "{err}");
    }

    #[test]
    fn split_examples() {
        let t = LabelTrack::new("v", (0..100).map(|i| ClassId(i % 3)).collect());
        let subs = split_augment(&t, 10, 1, None).unwrap();
        assert_eq!(subs.len(), 10);
        assert_eq!(subs[0].frame_indices().collect::<Vec<_>>(), (0..100).step_by(10).collect::<Vec<_>>());
        assert!(subs.iter().all(|s| s.labels.len() == 10));

        let t95 = LabelTrack::new("w", vec![ClassId(1); 95]);
        let lens: Vec<_> = split_augment(&t95, 10, 1, None).unwrap().iter().map(|s| s.labels.len()).collect();
        assert_eq!(lens, [10, 10, 10, 10, 10, 9, 9, 9, 9, 9]);

        let one = split_augment(&t, 1, 1, None).unwrap();
        assert_eq!(one[0].labels, t.frames);
        assert!(split_augment(&t, 0, 1, None).is_err());
        assert!(split_augment(&LabelTrack::new("s", vec![ClassId(1); 3]), 4, 1, None).is_err());
    }

    #[test]
    fn split_sub_videos_get_own_params() {
        let t = LabelTrack::new("v", vec![ClassId(1); 40]);
        let subs = split_augment(&t, 10, 5, Some(&SpatialRanges::default())).unwrap();
        let distinct: std::collections::HashSet<String> =
            subs.iter().map(|s| serde_json::to_string(&s.spatial).unwrap()).collect();
        assert!(distinct.len() > 5);
    }
}
