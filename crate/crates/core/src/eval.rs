//! Span-level P/R/F for aspect extraction, label metrics for subjectivity
//! and seeded k-fold splitting.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cdbn::SubjLabel;
use crate::corpus::AspectSpan;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PrfReport {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl PrfReport {
    pub fn from_counts(tp: usize, fp: usize, fn_: usize) -> Self {
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Self {
            tp,
            fp,
            fn_,
            precision,
            recall,
            f1,
        }
    }

    /// `key=value` lines under a prefix, e.g. `aspect.f1=0.812345`.
    pub fn to_kv(&self, prefix: &str) -> String {
        format!(
            "{prefix}.tp={}\n{prefix}.fp={}\n{prefix}.fn={}\n{prefix}.precision={:.6}\n{prefix}.recall={:.6}\n{prefix}.f1={:.6}\n",
            self.tp, self.fp, self.fn_, self.precision, self.recall, self.f1
        )
    }
}

/// Which spans take part in scoring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SpanFilter {
    #[default]
    All,
    /// Only multi-token spans, on both sides.
    PhrasesOnly,
}

impl SpanFilter {
    fn keeps(self, s: &AspectSpan) -> bool {
        match self {
            SpanFilter::All => true,
            SpanFilter::PhrasesOnly => s.len() >= 2,
        }
    }
}

/// Exact-match span scoring summed over sentences.
pub fn span_prf(gold: &[BTreeSet<AspectSpan>], pred: &[BTreeSet<AspectSpan>]) -> Result<PrfReport> {
    span_prf_filtered(gold, pred, SpanFilter::All)
}

pub fn span_prf_filtered(
    gold: &[BTreeSet<AspectSpan>],
    pred: &[BTreeSet<AspectSpan>],
    filter: SpanFilter,
) -> Result<PrfReport> {
    if gold.len() != pred.len() {
        return Err(Error::shape(
            "span_prf",
            format!("{} gold sentences vs {} predicted", gold.len(), pred.len()),
        ));
    }
    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
    for (g, p) in gold.iter().zip(pred) {
        let g: BTreeSet<_> = g.iter().filter(|s| filter.keeps(s)).collect();
        let p: BTreeSet<_> = p.iter().filter(|s| filter.keeps(s)).collect();
        let hit = g.intersection(&p).count();
        tp += hit;
        fp += p.len() - hit;
        fn_ += g.len() - hit;
    }
    Ok(PrfReport::from_counts(tp, fp, fn_))
}

/// `k` (train, test) splits of a seeded shuffle; test folds partition
/// the items and differ in size by at most one.
pub fn kfold<T: Clone>(items: &[T], k: usize, seed: u64) -> Result<Vec<(Vec<T>, Vec<T>)>> {
    Ok(kfold_indices(items.len(), k, seed)?
        .into_iter()
        .map(|(train, test)| {
            (
                train.iter().map(|&i| items[i].clone()).collect(),
                test.iter().map(|&i| items[i].clone()).collect(),
            )
        })
        .collect())
}

pub fn kfold_indices(n: usize, k: usize, seed: u64) -> Result<Vec<(Vec<usize>, Vec<usize>)>> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!(
            "k-fold needs k >= 2, got {k}"
        )));
    }
    if k > n {
        return Err(Error::InvalidArgument(format!("k = {k} exceeds {n} items")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (base, extra) = (n / k, n % k);
    let mut folds = Vec::with_capacity(k);
    let mut at = 0;
    for f in 0..k {
        let size = base + usize::from(f < extra);
        let test = order[at..at + size].to_vec();
        let train = order[..at]
            .iter()
            .chain(&order[at + size..])
            .copied()
            .collect();
        folds.push((train, test));
        at += size;
    }
    Ok(folds)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationReport {
    pub total: usize,
    pub correct: usize,
    pub accuracy: f64,
    /// Rows are gold, columns predicted, both in `SubjLabel::index` order.
    pub confusion: [[usize; 2]; 2],
    pub subjective: PrfReport,
    pub objective: PrfReport,
}

impl ClassificationReport {
    pub fn macro_f1(&self) -> f64 {
        (self.subjective.f1 + self.objective.f1) / 2.0
    }

    pub fn to_kv(&self, prefix: &str) -> String {
        let mut out = format!(
            "{prefix}.total={}\n{prefix}.correct={}\n{prefix}.accuracy={:.6}\n{prefix}.macro_f1={:.6}\n",
            self.total,
            self.correct,
            self.accuracy,
            self.macro_f1()
        );
        out += &self.subjective.to_kv(&format!("{prefix}.subjective"));
        out += &self.objective.to_kv(&format!("{prefix}.objective"));
        out
    }

    pub fn to_table(&self) -> String {
        let mut out = format!(
            "{:<12}{:>10}{:>10}{:>10}\n",
            "class", "precision", "recall", "f1"
        );
        for (name, r) in [
            ("subjective", &self.subjective),
            ("objective", &self.objective),
        ] {
            let _ = writeln!(
                out,
                "{name:<12}{:>10.4}{:>10.4}{:>10.4}",
                r.precision, r.recall, r.f1
            );
        }
        let _ = writeln!(
            out,
            "{:<12}{:>10.4}  ({}/{})",
            "accuracy", self.accuracy, self.correct, self.total
        );
        out
    }
}

pub fn classification_report(
    gold: &[SubjLabel],
    pred: &[SubjLabel],
) -> Result<ClassificationReport> {
    if gold.len() != pred.len() {
        return Err(Error::shape(
            "classification_report",
            format!("{} gold labels vs {} predicted", gold.len(), pred.len()),
        ));
    }
    let mut confusion = [[0usize; 2]; 2];
    for (g, p) in gold.iter().zip(pred) {
        confusion[g.index()][p.index()] += 1;
    }
    let per_class = |c: usize| {
        let o = 1 - c;
        PrfReport::from_counts(confusion[c][c], confusion[o][c], confusion[c][o])
    };
    let correct = confusion[0][0] + confusion[1][1];
    Ok(ClassificationReport {
        total: gold.len(),
        correct,
        accuracy: ratio(correct, gold.len()),
        confusion,
        subjective: per_class(SubjLabel::Subjective.index()),
        objective: per_class(SubjLabel::Objective.index()),
    })
}

/// Aligned plain-text table of named P/R/F rows.
pub fn prf_table(rows: &[(&str, PrfReport)]) -> String {
    let width = rows.iter().map(|(n, _)| n.len()).max().unwrap_or(0).max(6) + 2;
    let mut out = format!(
        "{:<width$}{:>10}{:>10}{:>10}{:>7}{:>7}{:>7}\n",
        "system", "precision", "recall", "f1", "tp", "fp", "fn"
    );
    for (name, r) in rows {
        let _ = writeln!(
            out,
            "{name:<width$}{:>10.4}{:>10.4}{:>10.4}{:>7}{:>7}{:>7}",
            r.precision, r.recall, r.f1, r.tp, r.fp, r.fn_
        );
    }
    out
}
