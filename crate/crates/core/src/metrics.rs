//! Confusion matrices and evaluation metrics for imbalanced multi-class data.
//!
//! Overall scores ignore classes whose row and column are both empty.
//! Per-class scores treat one class against all others. Ratios with a zero
//! denominator are reported as `None` (n/a) and skipped by the macro means.
//!
//! AvACC is the mean one-vs-rest accuracy over the included classes. CBA
//! (class balanced accuracy) is the mean of `C_ii / max(row_i, col_i)`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::annotation::{ClassCatalog, LabelTrack};
use crate::error::{Error, Result};
use crate::num::Real;

/// Rows are true classes, columns predicted classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    size: usize,
    counts: Vec<u64>,
    pub labels: Vec<String>,
}

impl ConfusionMatrix {
    pub fn new(size: usize) -> Self {
        Self { size, counts: vec![0; size * size], labels: (0..size).map(|i| i.to_string()).collect() }
    }

    pub fn with_labels(labels: Vec<String>) -> Self {
        let mut cm = Self::new(labels.len());
        cm.labels = labels;
        cm
    }

    pub fn from_rows(rows: &[Vec<u64>]) -> Result<Self> {
        let size = rows.len();
        if rows.iter().any(|r| r.len() != size) {
            return Err(Error::InvalidArgument("confusion matrix must be square".into()));
        }
        let mut cm = Self::new(size);
        cm.counts = rows.concat();
        Ok(cm)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, truth: usize, pred: usize) -> u64 {
        self.counts[truth * self.size + pred]
    }

    pub fn add(&mut self, truth: usize, pred: usize) {
        self.counts[truth * self.size + pred] += 1;
    }

    pub fn row_sum(&self, i: usize) -> u64 {
        self.counts[i * self.size..(i + 1) * self.size].iter().sum()
    }

    pub fn col_sum(&self, j: usize) -> u64 {
        (0..self.size).map(|i| self.get(i, j)).sum()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.size).map(|i| self.get(i, i)).sum()
    }

    pub fn rows(&self) -> Vec<Vec<u64>> {
        self.counts.chunks(self.size.max(1)).map(<[u64]>::to_vec).collect()
    }

    /// Classes with a non-empty row or column.
    pub fn present_classes(&self) -> Vec<usize> {
        (0..self.size).filter(|&i| self.row_sum(i) + self.col_sum(i) > 0).collect()
    }

    /// Element-wise sum of two matrices of equal size.
    pub fn merge(&mut self, other: &ConfusionMatrix) -> Result<()> {
        if other.size != self.size {
            return Err(Error::LengthMismatch(self.size, other.size));
        }
        self.counts.iter_mut().zip(&other.counts).for_each(|(a, b)| *a += b);
        Ok(())
    }
}

/// Counts frames `0, stride, 2 * stride, ...` of two aligned tracks.
pub fn confusion(truth: &LabelTrack, pred: &LabelTrack, stride: usize, classes: usize) -> Result<ConfusionMatrix> {
    if truth.len() != pred.len() {
        return Err(Error::LengthMismatch(truth.len(), pred.len()));
    }
    if stride == 0 {
        return Err(Error::InvalidArgument("scoring stride must be positive".into()));
    }
    let mut cm = ConfusionMatrix::new(classes);
    for (t, p) in truth.frames.iter().zip(&pred.frames).step_by(stride) {
        if t.index() >= classes || p.index() >= classes {
            return Err(Error::InvalidArgument(format!("class {} or {} outside matrix of size {classes}", t, p)));
        }
        cm.add(t.index(), p.index());
    }
    Ok(cm)
}

/// [`confusion`] labelled with catalog class names.
pub fn confusion_for_catalog(
    truth: &LabelTrack,
    pred: &LabelTrack,
    stride: usize,
    catalog: &ClassCatalog,
) -> Result<ConfusionMatrix> {
    let mut cm = confusion(truth, pred, stride, catalog.class_count())?;
    cm.labels = catalog.classes().iter().map(|c| c.name.clone()).collect();
    Ok(cm)
}

fn ratio<T: Real>(num: u64, den: u64) -> Option<T> {
    (den > 0).then(|| T::of(num as f64) / T::of(den as f64))
}

fn mean_defined<T: Real>(values: impl Iterator<Item = Option<T>>) -> (Option<T>, usize) {
    let mut sum = T::zero();
    let mut n = 0usize;
    let mut skipped = 0usize;
    for v in values {
        match v {
            Some(v) => {
                sum = sum + v;
                n += 1;
            }
            None => skipped += 1,
        }
    }
    ((n > 0).then(|| sum / T::of_usize(n)), skipped)
}

/// One-vs-rest scores of a single class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real"))]
pub struct BinaryMetrics<T> {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
    pub accuracy: Option<T>,
    pub precision: Option<T>,
    pub recall: Option<T>,
    pub specificity: Option<T>,
    pub f1: Option<T>,
}

pub fn binary_per_class<T: Real>(cm: &ConfusionMatrix) -> Vec<BinaryMetrics<T>> {
    let total = cm.total();
    (0..cm.size())
        .map(|i| {
            let tp = cm.get(i, i);
            let fn_ = cm.row_sum(i) - tp;
            let fp = cm.col_sum(i) - tp;
            let tn = total - tp - fn_ - fp;
            let precision = ratio(tp, tp + fp);
            let recall = ratio(tp, tp + fn_);
            let f1 = match (precision, recall) {
                (Some(p), Some(r)) if p + r > T::zero() => Some(T::of(2.0) * p * r / (p + r)),
                (Some(_), Some(_)) => Some(T::zero()),
                _ => None,
            };
            BinaryMetrics {
                tp,
                fp,
                fn_,
                tn,
                accuracy: ratio(tp + tn, total),
                precision,
                recall,
                specificity: ratio(tn, tn + fp),
                f1,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real"))]
pub struct OverallMetrics<T> {
    pub accuracy: T,
    pub average_accuracy: T,
    pub class_balanced_accuracy: T,
    pub macro_precision: Option<T>,
    pub macro_recall: Option<T>,
    pub macro_f1: Option<T>,
    pub included: Vec<usize>,
    pub excluded: Vec<usize>,
    /// Included classes whose precision was n/a.
    pub precision_skipped: usize,
    pub recall_skipped: usize,
}

pub fn overall<T: Real>(cm: &ConfusionMatrix) -> Result<OverallMetrics<T>> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::EmptyMatrix);
    }
    let included = cm.present_classes();
    let excluded = (0..cm.size()).filter(|i| !included.contains(i)).collect();
    let binary = binary_per_class::<T>(cm);
    let k = T::of_usize(included.len());

    let average_accuracy =
        included.iter().map(|&i| binary[i].accuracy.unwrap_or_else(T::zero)).sum::<T>() / k;
    let class_balanced_accuracy = included
        .iter()
        .map(|&i| T::of(cm.get(i, i) as f64) / T::of(cm.row_sum(i).max(cm.col_sum(i)) as f64))
        .sum::<T>()
        / k;
    let (macro_precision, precision_skipped) = mean_defined(included.iter().map(|&i| binary[i].precision));
    let (macro_recall, recall_skipped) = mean_defined(included.iter().map(|&i| binary[i].recall));
    let macro_f1 = match (macro_precision, macro_recall) {
        (Some(p), Some(r)) if p + r > T::zero() => Some(T::of(2.0) * p * r / (p + r)),
        (Some(_), Some(_)) => Some(T::zero()),
        _ => None,
    };
    Ok(OverallMetrics {
        accuracy: T::of(cm.trace() as f64) / T::of(total as f64),
        average_accuracy,
        class_balanced_accuracy,
        macro_precision,
        macro_recall,
        macro_f1,
        included,
        excluded,
        precision_skipped,
        recall_skipped,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real"))]
pub struct MetricsReport<T> {
    pub overall: OverallMetrics<T>,
    pub per_class: Vec<(String, BinaryMetrics<T>)>,
    pub confusion: ConfusionMatrix,
}

impl<T: Real> MetricsReport<T> {
    pub fn compute(cm: &ConfusionMatrix) -> Result<Self> {
        let overall = overall(cm)?;
        let per_class = cm.labels.iter().cloned().zip(binary_per_class(cm)).collect();
        Ok(Self { overall, per_class, confusion: cm.clone() })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    /// Aligned text tables: overall scores, per-class binary scores, and
    /// the confusion matrix with a recall column and a precision row.
    pub fn to_table(&self) -> String {
        let pct = |v: Option<T>| v.map_or_else(|| "n/a".to_string(), |v| format!("{:.2}", v.to_f64_lossy() * 100.0));
        let o = &self.overall;
        let mut out = String::new();
        let _ = writeln!(out, "overall (%)");
        for (name, v) in [
            ("ACC", Some(o.accuracy)),
            ("AvACC", Some(o.average_accuracy)),
            ("CBA", Some(o.class_balanced_accuracy)),
            ("Prec_M", o.macro_precision),
            ("Rec_M", o.macro_recall),
            ("F1", o.macro_f1),
        ] {
            let _ = writeln!(out, "  {name:<7}{:>8}", pct(v));
        }
        if !o.excluded.is_empty() {
            let names: Vec<&str> = o.excluded.iter().map(|&i| self.confusion.labels[i].as_str()).collect();
            let _ = writeln!(out, "  excluded: {}", names.join(", "));
        }

        let width = self.per_class.iter().map(|(n, _)| n.len()).max().unwrap_or(5).max(5);
        let _ = writeln!(out, "\nper class (%)");
        let _ = writeln!(out, "  {:<width$} {:>8} {:>8} {:>8} {:>8} {:>8}", "class", "ACC", "Prec", "Rec", "Spec", "F1");
        for (i, (name, m)) in self.per_class.iter().enumerate() {
            if o.excluded.contains(&i) {
                continue;
            }
            let _ = writeln!(
                out,
                "  {name:<width$} {:>8} {:>8} {:>8} {:>8} {:>8}",
                pct(m.accuracy),
                pct(m.precision),
                pct(m.recall),
                pct(m.specificity),
                pct(m.f1)
            );
        }

        let cm = &self.confusion;
        let inc = &o.included;
        let _ = writeln!(out, "\nconfusion (rows: truth, columns: prediction)");
        let mut header = format!("  {:<width$}", "");
        for &j in inc {
            let _ = write!(header, " {j:>6}");
        }
        let _ = writeln!(out, "{header} {:>8}", "Rec");
        for &i in inc {
            let mut line = format!("  {:<width$}", format!("{i}:{}", cm.labels[i]));
            for &j in inc {
                let _ = write!(line, " {:>6}", cm.get(i, j));
            }
            let _ = writeln!(out, "{line} {:>8}", pct(self.per_class[i].1.recall));
        }
        let mut line = format!("  {:<width$}", "Prec");
        for &j in inc {
            let _ = write!(line, " {:>6}", pct(self.per_class[j].1.precision));
        }
        let _ = writeln!(out, "{line}");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotation::ClassId;

    fn worked() -> ConfusionMatrix {
        ConfusionMatrix::from_rows(&[vec![3, 1], vec![2, 4]]).unwrap()
    }

    #[test]
    fn worked_example_overall() {
        let m = overall::<f64>(&worked()).unwrap();
        assert!((m.accuracy - 0.7).abs() < 1e-12);
        assert!((m.macro_recall.unwrap() - (0.75 + 4.0 / 6.0) / 2.0).abs() < 1e-12);
        assert!((m.macro_precision.unwrap() - 0.7).abs() < 1e-12);
        assert!((m.class_balanced_accuracy - (3.0 / 5.0 + 4.0 / 6.0) / 2.0).abs() < 1e-12);
        assert!((m.macro_recall.unwrap() - 0.7083).abs() < 1e-4);
        assert!((m.class_balanced_accuracy - 0.6333).abs() < 1e-4);
    }

    #[test]
    fn worked_example_binary() {
        let b = binary_per_class::<f64>(&worked());
        let c0 = b[0];
        assert_eq!((c0.tp, c0.fn_, c0.fp, c0.tn), (3, 1, 2, 4));
        assert!((c0.accuracy.unwrap() - 0.7).abs() < 1e-12);
        assert!((c0.precision.unwrap() - 0.6).abs() < 1e-12);
        assert!((c0.recall.unwrap() - 0.75).abs() < 1e-12);
        assert!((c0.specificity.unwrap() - 4.0 / 6.0).abs() < 1e-12);
        assert!((c0.f1.unwrap() - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn identity_is_perfect() {
        let cm = ConfusionMatrix::from_rows(&[vec![5, 0, 0], vec![0, 2, 0], vec![0, 0, 9]]).unwrap();
        let m = overall::<f64>(&cm).unwrap();
        for v in [m.accuracy, m.average_accuracy, m.class_balanced_accuracy] {
            assert_eq!(v, 1.0);
        }
        assert_eq!(m.macro_f1, Some(1.0));
    }

    #[test]
    fn empty_classes_are_excluded() {
        let cm = ConfusionMatrix::from_rows(&[vec![3, 0, 1], vec![0, 0, 0], vec![2, 0, 4]]).unwrap();
        let m = overall::<f64>(&cm).unwrap();
        assert_eq!(m.included, vec![0, 2]);
        assert_eq!(m.excluded, vec![1]);
        assert!((m.class_balanced_accuracy - (3.0 / 5.0 + 4.0 / 6.0) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn never_predicted_class_has_na_precision() {
        let cm = ConfusionMatrix::from_rows(&[vec![4, 0], vec![3, 0]]).unwrap();
        let b = binary_per_class::<f64>(&cm);
        assert_eq!(b[1].precision, None);
        assert_eq!(b[1].recall, Some(0.0));
        assert_eq!(b[1].f1, None);
        let m = overall::<f64>(&cm).unwrap();
        assert_eq!(m.precision_skipped, 1);
        assert_eq!(m.macro_precision, Some(4.0 / 7.0));
    }

    #[test]
    fn confusion_counts_and_stride() {
        let (a, b) = (ClassId(0), ClassId(1));
        let t = LabelTrack::new("t", vec![a, b]);
        let p = LabelTrack::new("p", vec![b, a]);
        assert_eq!(confusion(&t, &p, 1, 2).unwrap().rows(), vec![vec![0, 1], vec![1, 0]]);
        let t = LabelTrack::new("t", vec![a; 5]);
        assert_eq!(confusion(&t, &t, 2, 2).unwrap().total(), 3);
        assert!(confusion(&t, &LabelTrack::new("p", vec![a; 4]), 1, 2).is_err());
        assert!(matches!(overall::<f64>(&ConfusionMatrix::new(3)), Err(Error::EmptyMatrix)));
    }

    #[test]
    fn table_mentions_na() {
        let cm = ConfusionMatrix::from_rows(&[vec![4, 0], vec![3, 0]]).unwrap();
        let r = MetricsReport::<f64>::compute(&cm).unwrap();
        let table = r.to_table();
        assert!(table.contains("n/a"));
        assert!(table.contains("CBA"));
    }
}
