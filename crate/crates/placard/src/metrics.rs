//! Multi-label evaluation: exact-match and Hamming losses, per-class
//! accuracy/precision/recall/F1, and report assembly.
//!
//! The loss functions accept any uniform label width so they can be checked
//! against small hand-counted matrices; the report type fixes the width at
//! the seven attribute classes.

use serde::{Deserialize, Serialize};

use crate::calibrate::{apply_thresholds, ConfusionCounts, ThresholdVector};
use crate::error::{Error, Result};
use crate::label::{LabelVector, CLASS_NAMES, NUM_CLASSES};

fn check_shapes(truth: &[Vec<bool>], pred: &[Vec<bool>]) -> Result<usize> {
    if truth.len() != pred.len() || truth.is_empty() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} non-empty rows", truth.len()),
            actual: format!("{} rows", pred.len()),
        });
    }
    let width = truth[0].len();
    for (i, (t, p)) in truth.iter().zip(pred.iter()).enumerate() {
        if t.len() != width || p.len() != width {
            return Err(Error::ShapeMismatch {
                expected: format!("row width {width}"),
                actual: format!("row {i}: truth {} / pred {}", t.len(), p.len()),
            });
        }
    }
    Ok(width)
}

/// Fraction of rows whose predicted label vector differs from ground truth
/// in at least one slot (0/1 loss).
pub fn exact_match_loss(truth: &[Vec<bool>], pred: &[Vec<bool>]) -> Result<f64> {
    check_shapes(truth, pred)?;
    let mismatched = truth.iter().zip(pred.iter()).filter(|(t, p)| t != p).count();
    Ok(mismatched as f64 / truth.len() as f64)
}

/// Fraction of individual label slots predicted incorrectly.
pub fn hamming_loss(truth: &[Vec<bool>], pred: &[Vec<bool>]) -> Result<f64> {
    let width = check_shapes(truth, pred)?;
    let mismatched: usize = truth
        .iter()
        .zip(pred.iter())
        .map(|(t, p)| t.iter().zip(p.iter()).filter(|(a, b)| a != b).count())
        .sum();
    Ok(mismatched as f64 / (truth.len() * width) as f64)
}

/// Per-class rates computed from a binary confusion table. Zero-denominator
/// precision/recall/F1 default to 0; accuracy is defined whenever N > 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl ClassMetrics {
    pub fn from_counts(c: &ConfusionCounts) -> Self {
        let (tp, fp, fn_, tn) = (c.tp as f64, c.fp as f64, c.fn_ as f64, c.tn as f64);
        let accuracy = if c.total() > 0 {
            (tp + tn) / (tp + tn + fp + fn_)
        } else {
            0.0
        };
        let precision = if tp + fp > 0.0 { tp / (tp + fp) } else { 0.0 };
        let recall = if tp + fn_ > 0.0 { tp / (tp + fn_) } else { 0.0 };
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Self {
            accuracy,
            precision,
            recall,
            f1,
        }
    }
}

/// Per-class accuracy/precision/recall/F1 for each label column.
pub fn per_class_metrics(truth: &[Vec<bool>], pred: &[Vec<bool>]) -> Result<Vec<ClassMetrics>> {
    let width = check_shapes(truth, pred)?;
    Ok((0..width)
        .map(|class| {
            let counts = ConfusionCounts::from_bits(
                truth
                    .iter()
                    .zip(pred.iter())
                    .map(|(t, p)| (t[class], p[class])),
            );
            ClassMetrics::from_counts(&counts)
        })
        .collect())
}

/// Full evaluation report for one prediction run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiLabelReport {
    pub samples: usize,
    /// Cutoffs used to binarize probabilities; absent for sign-rule models.
    pub thresholds: Option<ThresholdVector>,
    pub class_names: Vec<String>,
    pub per_class: Vec<ClassMetrics>,
    /// Mean of the seven per-class accuracies.
    pub macro_accuracy: f64,
    pub exact_match_loss: f64,
    pub hamming_loss: f64,
}

fn rows(labels: &[LabelVector]) -> Vec<Vec<bool>> {
    labels.iter().map(|l| l.to_vec()).collect()
}

/// Assemble a report from already-binarized predictions.
pub fn report_from_predictions(
    truth: &[LabelVector],
    pred: &[LabelVector],
    thresholds: Option<ThresholdVector>,
) -> Result<MultiLabelReport> {
    let truth_rows = rows(truth);
    let pred_rows = rows(pred);
    let per_class = per_class_metrics(&truth_rows, &pred_rows)?;
    let macro_accuracy =
        per_class.iter().map(|m| m.accuracy).sum::<f64>() / per_class.len() as f64;
    Ok(MultiLabelReport {
        samples: truth.len(),
        thresholds,
        class_names: CLASS_NAMES.iter().map(|s| s.to_string()).collect(),
        per_class,
        macro_accuracy,
        exact_match_loss: exact_match_loss(&truth_rows, &pred_rows)?,
        hamming_loss: hamming_loss(&truth_rows, &pred_rows)?,
    })
}

/// Threshold the probabilities, then compute every metric.
pub fn build_report(
    truth: &[LabelVector],
    probs: &[[f64; NUM_CLASSES]],
    thresholds: &ThresholdVector,
) -> Result<MultiLabelReport> {
    if truth.len() != probs.len() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} probability rows", truth.len()),
            actual: format!("{} rows", probs.len()),
        });
    }
    let pred = apply_thresholds(probs, thresholds);
    report_from_predictions(truth, &pred, Some(*thresholds))
}
