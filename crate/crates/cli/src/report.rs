//! Text and JSON reports for corpus statistics and comparisons.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::Serialize;
use wfaug::graph::active_sequence;
use wfaug::segment::SegmentDb;
use wfaug::stats::{class_distribution, corpus_stats};
use wfaug::{ClassCatalog, ClassId, CorpusStats, LabelTrack, Summary};

#[derive(Debug, Clone, Serialize)]
pub struct ClassRow {
    pub class: String,
    pub frames: usize,
    pub percent: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CorpusReport {
    pub videos: usize,
    pub stats: CorpusStats,
    pub classes: Vec<ClassRow>,
    /// Distinct ordered pairs of consecutive non-idle classes.
    pub orderings: usize,
    pub max_orderings_per_video: usize,
}

fn orderings(track: &LabelTrack) -> BTreeSet<(ClassId, ClassId)> {
    active_sequence(track).windows(2).map(|w| (w[0], w[1])).collect()
}

impl CorpusReport {
    /// `None` for an empty corpus.
    pub fn of(tracks: &[LabelTrack], catalog: &ClassCatalog) -> Option<Self> {
        let stats = corpus_stats::<f64>(tracks)?;
        let classes = class_distribution::<f64>(tracks, catalog.class_count())
            .into_iter()
            .map(|s| ClassRow { class: catalog.class_name(s.class).to_string(), frames: s.frames, percent: s.percent })
            .collect();
        let all: BTreeSet<_> = tracks.iter().flat_map(orderings).collect();
        Some(Self {
            videos: tracks.len(),
            stats,
            classes,
            orderings: all.len(),
            max_orderings_per_video: tracks.iter().map(|t| orderings(t).len()).max().unwrap_or(0),
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "videos: {}", self.videos);
        let _ = writeln!(out, "{}", summary_header());
        for (name, s) in [
            ("length", &self.stats.length),
            ("label changes", &self.stats.label_changes),
            ("distinct labels", &self.stats.distinct_labels),
            ("run length", &self.stats.run_length),
        ] {
            let _ = writeln!(out, "{}", summary_row(name, s));
        }
        let _ = writeln!(out, "class distribution (%):");
        let width = self.classes.iter().map(|c| c.class.len()).max().unwrap_or(0);
        for c in &self.classes {
            let _ = writeln!(out, "  {:<width$} {:>8.2} {:>10}", c.class, c.percent, c.frames);
        }
        let sum: f64 = self.classes.iter().map(|c| c.percent).sum();
        let _ = writeln!(out, "  {:<width$} {:>8.2}", "total", sum);
        let _ = writeln!(
            out,
            "orderings: {} distinct (max {} in one video)",
            self.orderings, self.max_orderings_per_video
        );
        out
    }
}

pub fn summary_header() -> String {
    format!(
        "  {:<16} {:>9} {:>9} {:>9} {:>9} {:>9} {:>9} {:>9}",
        "", "min", "q1", "median", "q3", "max", "mean", "mad"
    )
}

pub fn summary_row(name: &str, s: &Summary) -> String {
    format!(
        "  {:<16} {:>9.1} {:>9.1} {:>9.1} {:>9.1} {:>9.1} {:>9.2} {:>9.2}",
        name, s.min, s.q1, s.median, s.q3, s.max, s.mean, s.mean_abs_dev
    )
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassChange {
    pub class: String,
    pub source_percent: f64,
    pub generated_percent: f64,
    /// `generated / source`; `None` when the class is absent from the source.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Comparison {
    pub source: CorpusReport,
    pub generated: CorpusReport,
    pub classes: Vec<ClassChange>,
    /// Rarest non-idle class present in the source.
    pub rarest_class: Option<String>,
    pub rarest_uplift: Option<f64>,
    /// Min-over-max ratio of non-idle class shares present in the source.
    pub source_balance: f64,
    pub generated_balance: f64,
    pub label_change_median_change_percent: f64,
}

fn balance(rows: &[ClassRow], present: &[usize]) -> f64 {
    let shares: Vec<f64> = present.iter().map(|&i| rows[i].percent).collect();
    let max = shares.iter().copied().fold(0.0, f64::max);
    let min = shares.iter().copied().fold(f64::INFINITY, f64::min);
    if max > 0.0 { min / max } else { 0.0 }
}

impl Comparison {
    pub fn of(source: CorpusReport, generated: CorpusReport) -> Self {
        let classes: Vec<ClassChange> = source
            .classes
            .iter()
            .zip(&generated.classes)
            .map(|(s, g)| ClassChange {
                class: s.class.clone(),
                source_percent: s.percent,
                generated_percent: g.percent,
                ratio: (s.frames > 0).then(|| g.percent / s.percent),
            })
            .collect();
        let present: Vec<usize> = (1..source.classes.len()).filter(|&i| source.classes[i].frames > 0).collect();
        let rarest = present
            .iter()
            .copied()
            .min_by(|&a, &b| source.classes[a].percent.total_cmp(&source.classes[b].percent));
        let s_med = source.stats.label_changes.median;
        let g_med = generated.stats.label_changes.median;
        Self {
            rarest_class: rarest.map(|i| classes[i].class.clone()),
            rarest_uplift: rarest.and_then(|i| classes[i].ratio),
            source_balance: balance(&source.classes, &present),
            generated_balance: balance(&generated.classes, &present),
            label_change_median_change_percent: if s_med > 0.0 { 100.0 * (g_med - s_med) / s_med } else { 0.0 },
            classes,
            source,
            generated,
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("== source ==\n");
        out.push_str(&self.source.to_text());
        out.push_str("\n== generated ==\n");
        out.push_str(&self.generated.to_text());
        out.push_str("\n== comparison ==\n");
        let width = self.classes.iter().map(|c| c.class.len()).max().unwrap_or(0);
        let _ = writeln!(out, "  {:<width$} {:>9} {:>9} {:>7}", "class", "source %", "gen %", "ratio");
        for c in &self.classes {
            let ratio = c.ratio.map_or_else(|| "n/a".into(), |r| format!("{r:.2}"));
            let _ = writeln!(
                out,
                "  {:<width$} {:>9.2} {:>9.2} {:>7}",
                c.class, c.source_percent, c.generated_percent, ratio
            );
        }
        if let (Some(name), Some(up)) = (&self.rarest_class, self.rarest_uplift) {
            let _ = writeln!(out, "min-class uplift: {up:.2}x ({name})");
        }
        let _ = writeln!(out, "min/max class share: {:.4} -> {:.4}", self.source_balance, self.generated_balance);
        let _ = writeln!(
            out,
            "median label changes: {:.1} -> {:.1} ({:+.1} %)",
            self.source.stats.label_changes.median,
            self.generated.stats.label_changes.median,
            self.label_change_median_change_percent
        );
        out
    }
}

/// Segment database statistics as text.
pub fn segment_report(db: &SegmentDb, catalog: &ClassCatalog) -> String {
    let s = db.stats();
    let mut out = String::new();
    let _ = writeln!(out, "segments: {}", s.segment_count);
    let _ = writeln!(out, "transition types: {} ({} class pairs)", s.transition_types, s.transition_pairs);
    if let Some(len) = &s.length {
        let _ = writeln!(out, "{}", summary_header());
        let _ = writeln!(out, "{}", summary_row("segment length", len));
    }
    let _ = writeln!(out, "per type:");
    for (k, n) in &s.per_type {
        let via = if k.via_idle { " (via idle)" } else { "" };
        let _ = writeln!(out, "  {} -> {}{via}: {n}", catalog.class_name(k.from), catalog.class_name(k.to));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn catalog() -> ClassCatalog {
        ClassCatalog::parse_toml("[[tools]]\nname = \"a\"\n[[tools]]\nname = \"b\"\n").unwrap()
    }

    #[test]
    fn percentages_sum_to_100() {
        let t = LabelTrack::new("v", [0, 1, 1, 2, 2, 2, 0].iter().map(|&c| ClassId(c)).collect());
        let r = CorpusReport::of(&[t], &catalog()).unwrap();
        let sum: f64 = r.classes.iter().map(|c| c.percent).sum();
        assert!((sum - 100.0).abs() < 0.01);
        assert_eq!(r.orderings, 1);
    }

    #[test]
    fn uplift_of_rarest_class() {
        let src = LabelTrack::new("s", [1, 1, 1, 2].iter().map(|&c| ClassId(c)).collect());
        let gen = LabelTrack::new("g", [1, 1, 2, 2].iter().map(|&c| ClassId(c)).collect());
        let cat = catalog();
        let c = Comparison::of(CorpusReport::of(&[src], &cat).unwrap(), CorpusReport::of(&[gen], &cat).unwrap());
        assert_eq!(c.rarest_class.as_deref(), Some("b"));
        assert!((c.rarest_uplift.unwrap() - 2.0).abs() < 1e-12);
        assert!(c.generated_balance > c.source_balance);
    }
}
