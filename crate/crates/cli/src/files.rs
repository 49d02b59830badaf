//! Corpus loading and atomic file output.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context as _, Result};
use wfaug::annotation::{load_track, write_label_track};
use wfaug::spatial::PixelBuffer;
use wfaug::{ClassCatalog, LabelTrack};

use crate::Usage;

pub fn load_catalog(path: Option<&Path>) -> Result<ClassCatalog> {
    let path = path.ok_or_else(|| Usage("no class catalog given (use --catalog or set it in the config)".into()))?;
    Ok(ClassCatalog::load(path)?)
}

/// CSV files of `dir`, sorted by name.
pub fn csv_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading annotation directory {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "csv"))
        .collect();
    files.sort();
    Ok(files)
}

/// Every annotation file of `dir` as a label track.
pub fn load_tracks(dir: &Path, catalog: &ClassCatalog, threshold: f64) -> Result<Vec<LabelTrack>> {
    let files = csv_files(dir)?;
    if files.is_empty() {
        return Err(wfaug::Error::NoTracks).with_context(|| format!("no annotation CSV files in {}", dir.display()));
    }
    files.iter().map(|p| Ok(load_track(p, catalog, threshold)?)).collect()
}

/// Writes `bytes` to a temporary file next to `path`, then renames it.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("creating file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn write_track(path: &Path, track: &LabelTrack, catalog: &ClassCatalog) -> Result<()> {
    let mut buf = Vec::new();
    write_label_track(track, catalog, &mut buf)?;
    write_atomic(path, &buf)
}

pub fn write_png(path: &Path, frame: &PixelBuffer) -> Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let tmp = tempfile::Builder::new().suffix(".png").tempfile_in(dir)?;
    frame.save_png(tmp.path())?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
