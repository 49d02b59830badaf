//! Per-frame annotation tracks and their CSV representations.

use std::collections::HashSet;
use std::io::{Read, Write};
use std::path::Path;

use crate::annotation::catalog::{ClassCatalog, ClassId};
use crate::error::{Error, Result};

pub const DEFAULT_THRESHOLD: f64 = 0.5;

/// Fractional per-tool annotation of one video (row-major, `tool_count` values per frame).
#[derive(Debug, Clone, PartialEq)]
pub struct RawTrack {
    pub video_id: String,
    tool_count: usize,
    values: Vec<f64>,
}

impl RawTrack {
    pub fn new(video_id: impl Into<String>, tool_count: usize, rows: Vec<Vec<f64>>) -> Result<Self> {
        let video_id = video_id.into();
        if rows.is_empty() {
            return Err(Error::InvalidArgument(format!("track {video_id} has no frames")));
        }
        let mut values = Vec::with_capacity(rows.len() * tool_count);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != tool_count {
                return Err(Error::InvalidArgument(format!(
                    "frame {i} has {} values, expected {tool_count}",
                    row.len()
                )));
            }
            if let Some(v) = row.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                return Err(Error::InvalidArgument(format!("frame {i}: value {v} outside [0,1]")));
            }
            values.extend_from_slice(row);
        }
        Ok(Self { video_id, tool_count, values })
    }

    pub fn frame_count(&self) -> usize {
        self.values.len() / self.tool_count.max(1)
    }

    pub fn tool_count(&self) -> usize {
        self.tool_count
    }

    pub fn row(&self, frame: usize) -> &[f64] {
        &self.values[frame * self.tool_count..(frame + 1) * self.tool_count]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks(self.tool_count)
    }
}

/// One class per frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelTrack {
    pub video_id: String,
    pub frames: Vec<ClassId>,
}

impl LabelTrack {
    pub fn new(video_id: impl Into<String>, frames: Vec<ClassId>) -> Self {
        Self { video_id: video_id.into(), frames }
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }
}

/// A maximal run of one class over the half-open frame span `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Run {
    pub class: ClassId,
    pub start: usize,
    pub end: usize,
}

impl Run {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }
}

/// Maximal constant-class runs of `frames`.
pub fn runs(frames: &[ClassId]) -> Vec<Run> {
    let mut out: Vec<Run> = Vec::new();
    for (i, &c) in frames.iter().enumerate() {
        match out.last_mut() {
            Some(r) if r.class == c => r.end = i + 1,
            _ => out.push(Run { class: c, start: i, end: i + 1 }),
        }
    }
    out
}

/// Strict `value > threshold` per tool.
pub fn binarize(raw: &RawTrack, threshold: f64) -> Vec<Vec<bool>> {
    raw.rows().map(|row| row.iter().map(|&v| v > threshold).collect()).collect()
}

/// Maps every binarized frame to its catalog class.
pub fn to_label_track(raw: &RawTrack, catalog: &ClassCatalog, threshold: f64) -> Result<LabelTrack> {
    if raw.tool_count() != catalog.tool_count() {
        return Err(Error::InvalidArgument(format!(
            "track {} has {} tools, catalog has {}",
            raw.video_id,
            raw.tool_count(),
            catalog.tool_count()
        )));
    }
    let frames = binarize(raw, threshold)
        .iter()
        .enumerate()
        .map(|(frame, mask)| {
            catalog.class_for_mask(mask).ok_or_else(|| Error::UnknownCombination {
                video: raw.video_id.clone(),
                frame,
                tools: mask
                    .iter()
                    .enumerate()
                    .filter(|(_, &on)| on)
                    .map(|(t, _)| catalog.tools()[t].name.as_str())
                    .collect::<Vec<_>>()
                    .join(", "),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LabelTrack::new(raw.video_id.clone(), frames))
}

/// Inverse of [`to_label_track`] at the binary level: each class becomes its tool mask.
pub fn expand_to_raw(track: &LabelTrack, catalog: &ClassCatalog) -> RawTrack {
    let rows = track
        .frames
        .iter()
        .map(|&c| catalog.mask_of(c).into_iter().map(|b| if b { 1.0 } else { 0.0 }).collect())
        .collect();
    RawTrack::new(track.video_id.clone(), catalog.tool_count(), rows)
        .expect("expanded masks are well formed")
}

fn video_id_of(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().trim_end_matches(".labels").to_string())
        .unwrap_or_default()
}

fn csv_reader<R: Read>(reader: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader)
}

/// Checks that frame indices count up by one from 0 or 1 and returns the 0-based index.
struct FrameCounter {
    base: Option<u64>,
    next: u64,
}

impl FrameCounter {
    fn new() -> Self {
        Self { base: None, next: 0 }
    }

    fn accept(&mut self, field: &str) -> std::result::Result<usize, String> {
        let idx: u64 = field
            .parse()
            .map_err(|_| format!("frame index {field:?} is not a non-negative integer"))?;
        match self.base {
            None => {
                if idx > 1 {
                    return Err(format!("first frame index must be 0 or 1, found {idx}"));
                }
                self.base = Some(idx);
                self.next = idx + 1;
                Ok(0)
            }
            Some(base) => {
                if idx != self.next {
                    return Err(format!(
                        "non-contiguous frame index: expected {}, found {idx}",
                        self.next
                    ));
                }
                self.next += 1;
                Ok((idx - base) as usize)
            }
        }
    }
}

/// Parses a per-tool annotation CSV: header `frame,<tool>,...`, then
/// `index,v_1,...` per frame. Header columns may be any subset of the
/// catalog's tools in any order; absent tools read as 0.
pub fn read_raw_track<R: Read>(
    reader: R,
    source: &Path,
    video_id: &str,
    catalog: &ClassCatalog,
) -> Result<RawTrack> {
    let parse_err = |line: u64, msg: String| Error::Parse { path: source.to_path_buf(), line, msg };
    let mut rdr = csv_reader(reader);
    let mut records = rdr.records();

    let header = match records.next() {
        None => return Err(Error::EmptyTrack { path: source.to_path_buf() }),
        Some(r) => r.map_err(|e| parse_err(1, e.to_string()))?,
    };
    let header_line = header.position().map_or(1, |p| p.line());
    if header.len() < 2 {
        return Err(parse_err(header_line, "header needs a frame column and at least one tool".into()));
    }
    let mut columns = Vec::with_capacity(header.len() - 1);
    let mut seen = HashSet::new();
    for name in header.iter().skip(1) {
        let tool = catalog
            .tool_by_name(name)
            .ok_or_else(|| parse_err(header_line, format!("unknown tool column {name:?}")))?;
        if !seen.insert(tool) {
            return Err(parse_err(header_line, format!("duplicate tool column {name:?}")));
        }
        columns.push(tool);
    }

    let width = catalog.tool_count();
    let mut values = Vec::new();
    let mut counter = FrameCounter::new();
    for rec in records {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() == 1 && rec.get(0) == Some("") {
            continue;
        }
        if rec.len() != header.len() {
            return Err(parse_err(
                line,
                format!("malformed row: {} fields, expected {}", rec.len(), header.len()),
            ));
        }
        counter.accept(&rec[0]).map_err(|m| parse_err(line, m))?;
        let mut row = vec![0.0; width];
        for (field, &tool) in rec.iter().skip(1).zip(&columns) {
            let v: f64 = field
                .parse()
                .map_err(|_| parse_err(line, format!("malformed value {field:?}")))?;
            if !(0.0..=1.0).contains(&v) {
                return Err(parse_err(line, format!("value out of range at line {line}: {v}")));
            }
            row[tool] = v;
        }
        values.extend(row);
    }
    if values.is_empty() {
        return Err(Error::EmptyTrack { path: source.to_path_buf() });
    }
    Ok(RawTrack { video_id: video_id.to_string(), tool_count: width, values })
}

pub fn parse_raw_track(path: &Path, catalog: &ClassCatalog) -> Result<RawTrack> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_raw_track(std::io::BufReader::new(file), path, &video_id_of(path), catalog)
}

pub fn write_raw_track<W: Write>(track: &RawTrack, catalog: &ClassCatalog, out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["frame".to_string()];
    header.extend(catalog.tools().iter().map(|t| t.name.clone()));
    w.write_record(&header)?;
    for (i, row) in track.rows().enumerate() {
        let mut rec = vec![i.to_string()];
        rec.extend(row.iter().map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()
}

/// Label CSV: header `frame,class`, one class name per frame.
pub fn read_label_track<R: Read>(
    reader: R,
    source: &Path,
    video_id: &str,
    catalog: &ClassCatalog,
) -> Result<LabelTrack> {
    let parse_err = |line: u64, msg: String| Error::Parse { path: source.to_path_buf(), line, msg };
    let mut rdr = csv_reader(reader);
    let mut records = rdr.records();
    match records.next() {
        None => return Err(Error::EmptyTrack { path: source.to_path_buf() }),
        Some(r) => {
            let r = r.map_err(|e| parse_err(1, e.to_string()))?;
            if r.len() != 2 || &r[1] != "class" {
                return Err(parse_err(1, "expected header `frame,class`".into()));
            }
        }
    }
    let mut frames = Vec::new();
    let mut counter = FrameCounter::new();
    for rec in records {
        let rec = rec.map_err(|e| parse_err(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() == 1 && rec.get(0) == Some("") {
            continue;
        }
        if rec.len() != 2 {
            return Err(parse_err(line, format!("malformed row: {} fields, expected 2", rec.len())));
        }
        counter.accept(&rec[0]).map_err(|m| parse_err(line, m))?;
        let class = catalog
            .class_by_name(&rec[1])
            .ok_or_else(|| parse_err(line, format!("unknown class {:?}", &rec[1])))?;
        frames.push(class);
    }
    if frames.is_empty() {
        return Err(Error::EmptyTrack { path: source.to_path_buf() });
    }
    Ok(LabelTrack::new(video_id, frames))
}

pub fn write_label_track<W: Write>(track: &LabelTrack, catalog: &ClassCatalog, out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["frame", "class"])?;
    for (i, &c) in track.frames.iter().enumerate() {
        w.write_record([i.to_string().as_str(), catalog.class_name(c)])?;
    }
    w.flush()
}

/// Loads either a label CSV or a per-tool CSV, decided by the header.
pub fn load_track(path: &Path, catalog: &ClassCatalog, threshold: f64) -> Result<LabelTrack> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let id = video_id_of(path);
    let first_line = bytes.split(|&b| b == b'\n').next().unwrap_or_default();
    let is_label = String::from_utf8_lossy(first_line)
        .split(',')
        .nth(1)
        .map(|s| s.trim().trim_matches('"') == "class")
        .unwrap_or(false);
    if is_label {
        read_label_track(bytes.as_slice(), path, &id, catalog)
    } else {
        let raw = read_raw_track(bytes.as_slice(), path, &id, catalog)?;
        to_label_track(&raw, catalog, threshold)
    }
}
