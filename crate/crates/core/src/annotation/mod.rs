//! Annotation model: tool catalog, raw per-tool tracks and single-class label tracks.

pub mod catalog;
pub mod track;

pub use catalog::{ClassCatalog, ClassId, ClassInfo, Tool};
pub use track::{
    binarize, expand_to_raw, load_track, parse_raw_track, read_label_track, read_raw_track, runs, to_label_track,
    write_label_track, write_raw_track, LabelTrack, RawTrack, Run,
    DEFAULT_THRESHOLD,
};
