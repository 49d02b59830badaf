//! Transition-centered video segments and the segment database.
//!
//! A video is cut at the midpoint `floor((start + end) / 2)` of every
//! non-idle class run. The piece between two consecutive cuts holds the
//! second half of one run, any idle frames, and the first half of the next
//! run. Idle runs never own a cut point.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::annotation::{runs, ClassCatalog, ClassId, LabelTrack};
use crate::error::{Error, Result};
use crate::num::Real;
use crate::stats::Summary;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SegmentKind {
    Start,
    Transition,
    Final,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub id: String,
    pub video_id: String,
    /// Half-open frame span in the source video.
    pub start: usize,
    pub end: usize,
    pub from: ClassId,
    pub to: ClassId,
    pub via_idle: bool,
    pub phase: Option<String>,
    pub classes: Vec<ClassId>,
    pub kind: SegmentKind,
}

impl Segment {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }
}

/// Cuts `track` into start, transition and final segments.
///
/// The start segment is omitted when the first active run is a single
/// frame at index 0, since its midpoint cut leaves nothing before it.
/// Likewise a one-frame run has its cut at its own first frame, so the
/// transition segment that ends there holds no frame of that class.
pub fn split_video(track: &LabelTrack, catalog: &ClassCatalog) -> Result<Vec<Segment>> {
    let active: Vec<_> = runs(&track.frames).into_iter().filter(|r| !r.class.is_idle()).collect();
    if active.is_empty() {
        return Err(Error::NoActiveRun(track.video_id.clone()));
    }
    let cuts: Vec<usize> = active.iter().map(|r| (r.start + r.end) / 2).collect();
    let phase = |c: ClassId| catalog.phase_of(c).map(str::to_string);
    let mut out = Vec::with_capacity(active.len() + 1);
    let mut push = |start: usize, end: usize, from: ClassId, to: ClassId, via_idle: bool, kind| {
        out.push(Segment {
            id: format!("{}:{:04}", track.video_id, out.len()),
            video_id: track.video_id.clone(),
            start,
            end,
            from,
            to,
            via_idle,
            phase: phase(to),
            classes: track.frames[start..end].to_vec(),
            kind,
        });
    };

    let first = active[0].class;
    if cuts[0] > 0 {
        push(0, cuts[0], first, first, false, SegmentKind::Start);
    }
    for i in 0..active.len() - 1 {
        let (a, b) = (&active[i], &active[i + 1]);
        push(cuts[i], cuts[i + 1], a.class, b.class, a.end < b.start, SegmentKind::Transition);
    }
    let last = active[active.len() - 1].class;
    push(cuts[cuts.len() - 1], track.len(), last, last, false, SegmentKind::Final);
    Ok(out)
}

/// Key of a transition type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TransitionKey {
    pub from: ClassId,
    pub to: ClassId,
    pub via_idle: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real"))]
pub struct SegmentStats<T> {
    pub segment_count: usize,
    /// Distinct `(from, to, via_idle)` keys.
    pub transition_types: usize,
    /// Distinct `(from, to)` pairs regardless of the idle variant.
    pub transition_pairs: usize,
    pub per_type: Vec<(TransitionKey, usize)>,
    /// Lengths of all segments (start, transition and final). `None` for an empty database.
    pub length: Option<Summary<T>>,
}

impl<T: Real> SegmentStats<T> {
    pub fn compute(segments: &[Segment]) -> Self {
        let mut per_type: BTreeMap<TransitionKey, usize> = BTreeMap::new();
        for s in segments.iter().filter(|s| s.kind == SegmentKind::Transition) {
            *per_type.entry(TransitionKey { from: s.from, to: s.to, via_idle: s.via_idle }).or_insert(0) += 1;
        }
        let pairs: std::collections::BTreeSet<_> = per_type.keys().map(|k| (k.from, k.to)).collect();
        let lengths: Vec<usize> = segments.iter().map(Segment::len).collect();
        Self {
            segment_count: segments.len(),
            transition_types: per_type.len(),
            transition_pairs: pairs.len(),
            per_type: per_type.into_iter().collect(),
            length: Summary::of_counts(&lengths),
        }
    }

    /// The most populated transition type.
    pub fn largest_type(&self) -> Option<(TransitionKey, usize)> {
        self.per_type.iter().copied().max_by_key(|&(k, n)| (n, std::cmp::Reverse(k)))
    }
}

/// One idle variant of a transition with its segments.
#[derive(Debug, Clone, PartialEq)]
pub struct Variant<'a> {
    pub via_idle: bool,
    pub segments: Vec<&'a Segment>,
}

#[derive(Debug, Clone)]
pub struct SegmentDb {
    segments: Vec<Segment>,
    by_id: HashMap<String, usize>,
    transitions: BTreeMap<TransitionKey, Vec<usize>>,
    starts: BTreeMap<ClassId, Vec<usize>>,
    finals: BTreeMap<ClassId, Vec<usize>>,
    stats: SegmentStats<f64>,
}

impl SegmentDb {
    pub fn build(segments: Vec<Segment>) -> Result<Self> {
        let mut by_id = HashMap::with_capacity(segments.len());
        let mut transitions: BTreeMap<TransitionKey, Vec<usize>> = BTreeMap::new();
        let mut starts: BTreeMap<ClassId, Vec<usize>> = BTreeMap::new();
        let mut finals: BTreeMap<ClassId, Vec<usize>> = BTreeMap::new();
        for (i, s) in segments.iter().enumerate() {
            if s.is_empty() || s.classes.len() != s.len() {
                return Err(Error::InvalidArgument(format!("segment {} is malformed", s.id)));
            }
            if by_id.insert(s.id.clone(), i).is_some() {
                return Err(Error::InvalidArgument(format!("duplicate segment id {}", s.id)));
            }
            match s.kind {
                SegmentKind::Start => starts.entry(s.from).or_default().push(i),
                SegmentKind::Final => finals.entry(s.to).or_default().push(i),
                SegmentKind::Transition => transitions
                    .entry(TransitionKey { from: s.from, to: s.to, via_idle: s.via_idle })
                    .or_default()
                    .push(i),
            }
        }
        let stats = SegmentStats::compute(&segments);
        Ok(Self { segments, by_id, transitions, starts, finals, stats })
    }

    /// Splits every track and builds the database.
    pub fn from_tracks(tracks: &[LabelTrack], catalog: &ClassCatalog) -> Result<Self> {
        let mut all = Vec::new();
        for t in tracks {
            all.extend(split_video(t, catalog)?);
        }
        Self::build(all)
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Segment> {
        self.by_id.get(id).map(|&i| &self.segments[i])
    }

    pub fn stats(&self) -> &SegmentStats<f64> {
        &self.stats
    }

    pub fn transition_keys(&self) -> impl Iterator<Item = &TransitionKey> {
        self.transitions.keys()
    }

    /// Segment ids stored under one transition key.
    pub fn ids(&self, key: &TransitionKey) -> Vec<&str> {
        self.transitions
            .get(key)
            .map(|v| v.iter().map(|&i| self.segments[i].id.as_str()).collect())
            .unwrap_or_default()
    }

    /// Available idle variants for `from -> to`, direct variant first. Empty if none.
    pub fn query(&self, from: ClassId, to: ClassId) -> Vec<Variant<'_>> {
        [false, true]
            .into_iter()
            .filter_map(|via_idle| {
                self.transitions.get(&TransitionKey { from, to, via_idle }).map(|ix| Variant {
                    via_idle,
                    segments: ix.iter().map(|&i| &self.segments[i]).collect(),
                })
            })
            .collect()
    }

    pub fn covers(&self, from: ClassId, to: ClassId) -> bool {
        [false, true].iter().any(|&via_idle| self.transitions.contains_key(&TransitionKey { from, to, via_idle }))
    }

    pub fn start_segments(&self, class: ClassId) -> Vec<&Segment> {
        self.starts.get(&class).map(|v| v.iter().map(|&i| &self.segments[i]).collect()).unwrap_or_default()
    }

    pub fn final_segments(&self, class: ClassId) -> Vec<&Segment> {
        self.finals.get(&class).map(|v| v.iter().map(|&i| &self.segments[i]).collect()).unwrap_or_default()
    }

    pub fn to_manifest(&self, catalog: &ClassCatalog) -> Manifest {
        let name = |c: ClassId| catalog.class_name(c).to_string();
        Manifest {
            segments: self
                .segments
                .iter()
                .map(|s| ManifestSegment {
                    id: s.id.clone(),
                    video: s.video_id.clone(),
                    start: s.start,
                    end: s.end,
                    kind: s.kind,
                    from: name(s.from),
                    to: name(s.to),
                    via_idle: s.via_idle,
                    phase: s.phase.clone(),
                    runs: runs(&s.classes).into_iter().map(|r| (name(r.class), r.len())).collect(),
                })
                .collect(),
            index: self
                .transitions
                .iter()
                .map(|(k, ix)| IndexEntry {
                    from: name(k.from),
                    to: name(k.to),
                    via_idle: k.via_idle,
                    segments: ix.iter().map(|&i| self.segments[i].id.clone()).collect(),
                })
                .collect(),
        }
    }

    pub fn to_json(&self, catalog: &ClassCatalog) -> String {
        serde_json::to_string_pretty(&self.to_manifest(catalog)).expect("manifest serializes") + "\n"
    }

    pub fn from_manifest(manifest: &Manifest, catalog: &ClassCatalog) -> Result<Self> {
        let id = |n: &str| {
            catalog
                .class_by_name(n)
                .ok_or_else(|| Error::InvalidArgument(format!("manifest uses unknown class {n:?}")))
        };
        let mut segments = Vec::with_capacity(manifest.segments.len());
        for m in &manifest.segments {
            let mut classes = Vec::with_capacity(m.end.saturating_sub(m.start));
            for (c, n) in &m.runs {
                classes.extend(std::iter::repeat_n(id(c)?, *n));
            }
            if m.end <= m.start || classes.len() != m.end - m.start {
                return Err(Error::InvalidArgument(format!("segment {} run lengths do not match its span", m.id)));
            }
            segments.push(Segment {
                id: m.id.clone(),
                video_id: m.video.clone(),
                start: m.start,
                end: m.end,
                from: id(&m.from)?,
                to: id(&m.to)?,
                via_idle: m.via_idle,
                phase: m.phase.clone(),
                classes,
                kind: m.kind,
            });
        }
        let db = Self::build(segments)?;
        for e in &manifest.index {
            let key = TransitionKey { from: id(&e.from)?, to: id(&e.to)?, via_idle: e.via_idle };
            if db.ids(&key) != e.segments.iter().map(String::as_str).collect::<Vec<_>>() {
                return Err(Error::InvalidArgument(format!("manifest index for {} -> {} is inconsistent", e.from, e.to)));
            }
        }
        if manifest.index.len() != db.transitions.len() {
            return Err(Error::InvalidArgument("manifest index is incomplete".into()));
        }
        Ok(db)
    }

    pub fn load(path: &Path, catalog: &ClassCatalog) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let m: Manifest = serde_json::from_str(&text).map_err(|e| Error::format(path, e))?;
        Self::from_manifest(&m, catalog)
    }
}

/// Persisted segment database. Per-frame classes are run-length encoded.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub segments: Vec<ManifestSegment>,
    pub index: Vec<IndexEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestSegment {
    pub id: String,
    pub video: String,
    pub start: usize,
    pub end: usize,
    pub kind: SegmentKind,
    pub from: String,
    pub to: String,
    pub via_idle: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase: Option<String>,
    pub runs: Vec<(String, usize)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IndexEntry {
    pub from: String,
    pub to: String,
    pub via_idle: bool,
    pub segments: Vec<String>,
}
