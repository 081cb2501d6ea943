//! Matthews correlation coefficient and per-class threshold selection.
//!
//! The binary MCC is computed from a 2x2 confusion table; the multiclass
//! form works on a K x K confusion matrix. Threshold selection scans a
//! one-decimal probability grid per class and keeps the cutoff with the
//! highest binary MCC against held-out ground truth.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::label::{LabelVector, NUM_CLASSES};

/// Binary confusion counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionCounts {
    pub fn new(tp: u64, fp: u64, fn_: u64, tn: u64) -> Self {
        Self { tp, fp, fn_, tn }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    /// Tally counts for one class from prediction/truth bit pairs.
    pub fn from_bits(pairs: impl Iterator<Item = (bool, bool)>) -> Self {
        let mut c = Self::default();
        for (truth, pred) in pairs {
            match (truth, pred) {
                (true, true) => c.tp += 1,
                (false, true) => c.fp += 1,
                (true, false) => c.fn_ += 1,
                (false, false) => c.tn += 1,
            }
        }
        c
    }
}

/// K x K confusion matrix; entry `(i, j)` counts samples of true class `i`
/// predicted as class `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    k: usize,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            counts: vec![0; k * k],
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn get(&self, true_class: usize, predicted: usize) -> u64 {
        self.counts[true_class * self.k + predicted]
    }

    pub fn add(&mut self, true_class: usize, predicted: usize, count: u64) {
        self.counts[true_class * self.k + predicted] += count;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.k).map(|i| self.get(i, i)).sum()
    }
}

/// Binary Matthews correlation coefficient:
/// `(tp*tn - fp*fn) / sqrt((tp+fp)(tp+fn)(tn+fp)(tn+fn))`.
///
/// Returns 0 when any factor of the denominator is zero.
pub fn mcc_binary(c: &ConfusionCounts) -> f64 {
    let tp = c.tp as f64;
    let fp = c.fp as f64;
    let fn_ = c.fn_ as f64;
    let tn = c.tn as f64;
    let denom = (tp + fp) * (tp + fn_) * (tn + fp) * (tn + fn_);
    if denom == 0.0 {
        return 0.0;
    }
    (tp * tn - fp * fn_) / denom.sqrt()
}

/// Multiclass Matthews correlation coefficient over a confusion matrix:
/// `(c*s - sum_k p_k t_k) / sqrt((s^2 - sum p_k^2)(s^2 - sum t_k^2))`
/// with `c` the trace, `s` the total count, `t_k` the column sums and
/// `p_k` the row sums. Returns 0 on a degenerate denominator.
pub fn mcc_multiclass(m: &ConfusionMatrix) -> Result<f64> {
    if m.k == 0 {
        return Err(Error::ShapeMismatch {
            expected: "K >= 1".into(),
            actual: "empty confusion matrix".into(),
        });
    }
    let k = m.k;
    let s = m.total() as f64;
    let c = m.trace() as f64;
    let mut sum_pt = 0.0;
    let mut sum_p2 = 0.0;
    let mut sum_t2 = 0.0;
    for idx in 0..k {
        let t: u64 = (0..k).map(|i| m.get(i, idx)).sum();
        let p: u64 = (0..k).map(|i| m.get(idx, i)).sum();
        let (t, p) = (t as f64, p as f64);
        sum_pt += p * t;
        sum_p2 += p * p;
        sum_t2 += t * t;
    }
    let denom = (s * s - sum_p2) * (s * s - sum_t2);
    if denom <= 0.0 {
        return Ok(0.0);
    }
    Ok((c * s - sum_pt) / denom.sqrt())
}

/// Per-class probability cutoffs, fixed class order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdVector {
    pub values: [f64; NUM_CLASSES],
}

impl ThresholdVector {
    pub fn uniform(value: f64) -> Self {
        Self {
            values: [value; NUM_CLASSES],
        }
    }
}

impl Default for ThresholdVector {
    fn default() -> Self {
        Self::uniform(0.5)
    }
}

/// The default scan grid: 0.1, 0.2, ..., 0.9.
pub fn default_grid() -> Vec<f64> {
    (1..=9).map(|i| i as f64 / 10.0).collect()
}

/// Pick, per class independently, the grid threshold that maximizes the
/// binary MCC of the induced predictions. Ties resolve to the smallest
/// threshold, which also covers classes where every cutoff is degenerate.
pub fn select_thresholds(probs: &[[f64; NUM_CLASSES]], truth: &[LabelVector]) -> ThresholdVector {
    select_thresholds_on_grid(probs, truth, &default_grid())
}

/// As [`select_thresholds`] with a caller-supplied grid (must be non-empty
/// and sorted ascending).
pub fn select_thresholds_on_grid(
    probs: &[[f64; NUM_CLASSES]],
    truth: &[LabelVector],
    grid: &[f64],
) -> ThresholdVector {
    assert_eq!(probs.len(), truth.len(), "probs/truth row count mismatch");
    assert!(!grid.is_empty(), "threshold grid must be non-empty");
    let mut values = [grid[0]; NUM_CLASSES];
    for class in 0..NUM_CLASSES {
        let mut best = f64::NEG_INFINITY;
        let mut best_threshold = grid[0];
        for &threshold in grid {
            let counts = ConfusionCounts::from_bits(
                truth
                    .iter()
                    .zip(probs.iter())
                    .map(|(t, p)| (t.get(class), p[class] >= threshold)),
            );
            let mcc = mcc_binary(&counts);
            if mcc > best {
                best = mcc;
                best_threshold = threshold;
            }
        }
        values[class] = best_threshold;
    }
    ThresholdVector { values }
}

/// Apply per-class cutoffs: bit `j` is set when `prob[j] >= threshold[j]`.
pub fn apply_thresholds(
    probs: &[[f64; NUM_CLASSES]],
    thresholds: &ThresholdVector,
) -> Vec<LabelVector> {
    probs
        .iter()
        .map(|row| {
            let mut v = LabelVector::empty();
            for (class, (&p, &t)) in row.iter().zip(thresholds.values.iter()).enumerate() {
                v.set(class, p >= t);
            }
            v
        })
        .collect()
}
