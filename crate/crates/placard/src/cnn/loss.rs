//! Sigmoid cross-entropy for multi-label targets.

use crate::error::{Error, Result};

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Per-label loss from a logit, in the numerically stable log-sum form:
/// `max(z, 0) - z*y + ln(1 + exp(-|z|))`.
pub fn bce_from_logit(z: f64, y: f64) -> f64 {
    z.max(0.0) - z * y + (-z.abs()).exp().ln_1p()
}

/// Mean over samples of the per-label binary cross-entropy summed across
/// labels, computed from logits.
pub fn sce_from_logits(logits: &[Vec<f64>], targets: &[Vec<f64>]) -> Result<f64> {
    check(logits, targets)?;
    let total: f64 = logits
        .iter()
        .zip(targets)
        .map(|(z_row, y_row)| {
            z_row
                .iter()
                .zip(y_row)
                .map(|(&z, &y)| bce_from_logit(z, y))
                .sum::<f64>()
        })
        .sum();
    Ok(total / logits.len() as f64)
}

/// Probability clamp applied when the loss is evaluated from reported
/// probabilities rather than logits.
pub const PROB_CLAMP: f64 = 1e-12;

/// Mean over samples of `sum_k -[y ln p + (1-y) ln(1-p)]` from
/// probabilities, clamped away from 0 and 1.
pub fn sigmoid_cross_entropy(probs: &[Vec<f64>], targets: &[Vec<f64>]) -> Result<f64> {
    check(probs, targets)?;
    let total: f64 = probs
        .iter()
        .zip(targets)
        .map(|(p_row, y_row)| {
            p_row
                .iter()
                .zip(y_row)
                .map(|(&p, &y)| {
                    let p = p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
                    -(y * p.ln() + (1.0 - y) * (1.0 - p).ln())
                })
                .sum::<f64>()
        })
        .sum();
    Ok(total / probs.len() as f64)
}

fn check(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<()> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} non-empty rows", a.len()),
            actual: format!("{} rows", b.len()),
        });
    }
    for (i, (x, y)) in a.iter().zip(b).enumerate() {
        if x.len() != y.len() {
            return Err(Error::ShapeMismatch {
                expected: format!("row {i} width {}", x.len()),
                actual: format!("{}", y.len()),
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seven_half_probabilities_give_seven_ln_two() {
        let probs = vec![vec![0.5; 7]];
        for targets in [vec![vec![1.0; 7]], vec![vec![0.0; 7]]] {
            let loss = sigmoid_cross_entropy(&probs, &targets).unwrap();
            assert!((loss - 7.0 * std::f64::consts::LN_2).abs() < 1e-9);
        }
        // Same through the logit path: sigmoid(0) = 0.5.
        let loss = sce_from_logits(&[vec![0.0; 7]], &[vec![1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0]])
            .unwrap();
        assert!((loss - 7.0 * std::f64::consts::LN_2).abs() < 1e-9);
    }

    #[test]
    fn perfect_confident_prediction_is_near_zero() {
        let probs = vec![vec![1.0, 0.0, 1.0]];
        let targets = vec![vec![1.0, 0.0, 1.0]];
        let loss = sigmoid_cross_entropy(&probs, &targets).unwrap();
        assert!(loss >= 0.0);
        assert!(loss < 1e-10);
    }

    #[test]
    fn flipping_targets_at_half_probability_is_symmetric() {
        let probs = vec![vec![0.5; 7]; 3];
        let targets = vec![vec![1.0, 0.0, 0.0, 1.0, 1.0, 0.0, 1.0]; 3];
        let flipped: Vec<Vec<f64>> = targets
            .iter()
            .map(|row| row.iter().map(|y| 1.0 - y).collect())
            .collect();
        let a = sigmoid_cross_entropy(&probs, &targets).unwrap();
        let b = sigmoid_cross_entropy(&probs, &flipped).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn loss_is_nonnegative_on_random_inputs() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(2);
        for _ in 0..100 {
            let z: Vec<f64> = (0..7).map(|_| rng.gen_range(-30.0..30.0)).collect();
            let y: Vec<f64> = (0..7).map(|_| f64::from(rng.gen_bool(0.5))).collect();
            let loss = sce_from_logits(&[z], &[y]).unwrap();
            assert!(loss >= 0.0);
            assert!(loss.is_finite());
        }
    }

    #[test]
    fn logit_and_probability_paths_agree_in_safe_range() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(8);
        let logits: Vec<Vec<f64>> = (0..5)
            .map(|_| (0..7).map(|_| rng.gen_range(-4.0..4.0)).collect())
            .collect();
        let targets: Vec<Vec<f64>> = (0..5)
            .map(|_| (0..7).map(|_| f64::from(rng.gen_bool(0.5))).collect())
            .collect();
        let probs: Vec<Vec<f64>> = logits
            .iter()
            .map(|row| row.iter().map(|&z| sigmoid(z)).collect())
            .collect();
        let a = sce_from_logits(&logits, &targets).unwrap();
        let b = sigmoid_cross_entropy(&probs, &targets).unwrap();
        assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        assert!(sigmoid_cross_entropy(&[vec![0.5; 7]], &[vec![1.0; 6]]).is_err());
        assert!(sigmoid_cross_entropy(&[], &[]).is_err());
    }
}
