//! One-vs-all linear SVM trained by primal stochastic subgradient descent.
//!
//! Each of the seven binary classifiers minimizes
//! `0.5*||w||^2 + C_k * sum_i max(0, 1 - y_i (w.x_i + b))`
//! with the decaying step schedule `eta_t = 1 / (lambda * t)`,
//! `lambda = 1 / (C_k * n)`. The penalty `C_k` is either the shared `C`
//! or the inverse-frequency weight `C * n / (k * n_j)` when class
//! weighting is enabled. Features are raw resized pixels.

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::imageops::ImageTensor;
use crate::label::{LabelVector, CLASS_NAMES, NUM_CLASSES};
use crate::rng;

/// Inverse-frequency penalty for one class: `C * n / (k * n_j)`.
/// Balanced single-label classes collapse this to `C`.
pub fn class_weight(c: f64, n: usize, k: usize, n_j: usize) -> Result<f64> {
    if n_j == 0 {
        return Err(Error::EmptyClass {
            class: "requested class has zero samples",
        });
    }
    assert!(n > 0 && k > 0, "totals must be positive");
    Ok(c * n as f64 / (k as f64 * n_j as f64))
}

/// Flatten an image into a channel-major pixel vector in `[0, 1]`.
pub fn featurize(img: &ImageTensor) -> Vec<f64> {
    img.data().to_vec()
}

/// One binary hyperplane.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub class_index: usize,
    pub weights: Vec<f64>,
    pub bias: f64,
    /// Effective misclassification penalty used during training.
    pub penalty: f64,
}

impl LinearModel {
    pub fn score(&self, x: &[f64]) -> f64 {
        let dot: f64 = self.weights.iter().zip(x).map(|(w, v)| w * v).sum();
        dot + self.bias
    }
}

/// Seven binary models, one per class, plus the feature geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct OneVsAllSvm {
    pub models: Vec<LinearModel>,
    pub feature_side: usize,
}

#[derive(Debug, Clone)]
pub struct SvmConfig {
    /// Shared penalty; per-class weighting multiplies it.
    pub c: f64,
    /// Epoch cap for the subgradient solver.
    pub max_iterations: usize,
    /// Multiplier on the `1/(lambda t)` step schedule.
    pub eta_scale: f64,
    pub use_class_weighting: bool,
    /// Image side at featurization; features have length `3 * side^2`.
    pub feature_side: usize,
    pub seed: u64,
}

impl Default for SvmConfig {
    fn default() -> Self {
        Self {
            c: 1.0,
            max_iterations: 4000,
            eta_scale: 1.0,
            use_class_weighting: false,
            feature_side: 224,
            seed: 0,
        }
    }
}

/// Hinge objective of one binary model over the full dataset.
pub fn hinge_objective(model: &LinearModel, features: &[Vec<f64>], targets: &[f64]) -> f64 {
    let norm: f64 = model.weights.iter().map(|w| w * w).sum();
    let hinge: f64 = features
        .iter()
        .zip(targets)
        .map(|(x, &y)| (1.0 - y * model.score(x)).max(0.0))
        .sum();
    0.5 * norm + model.penalty * hinge
}

/// Objective histories per class, one entry per epoch.
pub type ObjectiveHistory = Vec<Vec<f64>>;

/// Train seven binary classifiers. Every class needs at least one positive
/// and one negative example; the offending class is named otherwise.
pub fn train_one_vs_all(
    features: &[Vec<f64>],
    labels: &[LabelVector],
    cfg: &SvmConfig,
) -> Result<(OneVsAllSvm, ObjectiveHistory)> {
    if features.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    if features.len() != labels.len() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} label rows", features.len()),
            actual: format!("{} rows", labels.len()),
        });
    }
    let dim = features[0].len();
    if let Some(bad) = features.iter().find(|f| f.len() != dim) {
        return Err(Error::ShapeMismatch {
            expected: format!("feature dim {dim}"),
            actual: format!("{}", bad.len()),
        });
    }
    let n = features.len();

    let mut models = Vec::with_capacity(NUM_CLASSES);
    let mut histories = Vec::with_capacity(NUM_CLASSES);
    for class in 0..NUM_CLASSES {
        let targets: Vec<f64> = labels
            .iter()
            .map(|l| if l.get(class) { 1.0 } else { -1.0 })
            .collect();
        let positives = targets.iter().filter(|&&y| y > 0.0).count();
        if positives == 0 {
            return Err(Error::OneSidedClass {
                class: CLASS_NAMES[class],
                what: "positive",
            });
        }
        if positives == n {
            return Err(Error::OneSidedClass {
                class: CLASS_NAMES[class],
                what: "negative",
            });
        }
        let penalty = if cfg.use_class_weighting {
            class_weight(cfg.c, n, NUM_CLASSES, positives)?
        } else {
            cfg.c
        };
        let (model, history) = train_binary(features, &targets, class, penalty, cfg);
        models.push(model);
        histories.push(history);
    }
    Ok((
        OneVsAllSvm {
            models,
            feature_side: cfg.feature_side,
        },
        histories,
    ))
}

fn train_binary(
    features: &[Vec<f64>],
    targets: &[f64],
    class: usize,
    penalty: f64,
    cfg: &SvmConfig,
) -> (LinearModel, Vec<f64>) {
    let n = features.len();
    let dim = features[0].len();
    let lambda = 1.0 / (penalty * n as f64);
    let mut rng = rng::derive(cfg.seed, &[b"svm", &(class as u64).to_le_bytes()]);

    let mut model = LinearModel {
        class_index: class,
        weights: vec![0.0; dim],
        bias: 0.0,
        penalty,
    };
    let mut order: Vec<usize> = (0..n).collect();
    // Offsetting the schedule by one epoch's worth of steps keeps the first
    // updates bounded by ~C instead of C*n.
    let t0 = n as f64;
    let mut t: u64 = 1;
    let mut history = Vec::with_capacity(cfg.max_iterations);
    for _epoch in 0..cfg.max_iterations {
        order.shuffle(&mut rng);
        for &i in &order {
            let eta = cfg.eta_scale / (lambda * (t0 + t as f64));
            let x = &features[i];
            let y = targets[i];
            let margin = y * model.score(x);
            let shrink = 1.0 - eta * lambda;
            if margin < 1.0 {
                for (w, &v) in model.weights.iter_mut().zip(x) {
                    *w = shrink * *w + eta * y * v;
                }
                model.bias += eta * y;
            } else {
                for w in model.weights.iter_mut() {
                    *w *= shrink;
                }
            }
            t += 1;
        }
        history.push(hinge_objective(&model, features, targets));
    }
    (model, history)
}

/// Raw per-class decision values `w.x + b`.
pub fn decision_scores(svm: &OneVsAllSvm, x: &[f64]) -> Result<[f64; NUM_CLASSES]> {
    let mut scores = [0.0; NUM_CLASSES];
    for model in &svm.models {
        if model.weights.len() != x.len() {
            return Err(Error::ShapeMismatch {
                expected: format!("feature dim {}", model.weights.len()),
                actual: format!("{}", x.len()),
            });
        }
        scores[model.class_index] = model.score(x);
    }
    Ok(scores)
}

/// Multi-label sign rule: bit j set when score j is strictly positive.
pub fn predict_multilabel(svm: &OneVsAllSvm, x: &[f64]) -> Result<LabelVector> {
    let scores = decision_scores(svm, x)?;
    let mut v = LabelVector::empty();
    for (class, &s) in scores.iter().enumerate() {
        v.set(class, s > 0.0);
    }
    Ok(v)
}

/// Single-class voting rule: the class with the highest decision score,
/// ties resolved to the lowest index.
pub fn predict_vote(svm: &OneVsAllSvm, x: &[f64]) -> Result<usize> {
    let scores = decision_scores(svm, x)?;
    let mut best = 0;
    for class in 1..NUM_CLASSES {
        if scores[class] > scores[best] {
            best = class;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn class_weight_balanced_is_c() {
        assert_eq!(class_weight(1.0, 700, 7, 100).unwrap(), 1.0);
        assert_eq!(class_weight(2.5, 700, 7, 100).unwrap(), 2.5);
    }

    #[test]
    fn class_weight_minority_class() {
        let w = class_weight(1.0, 9504, 7, 327).unwrap();
        assert!((w - 9504.0 / 2289.0).abs() < 1e-12);
        assert!((w - 4.1520).abs() < 1e-4);
    }

    #[test]
    fn class_weight_scales_linearly_in_c() {
        let w1 = class_weight(1.0, 500, 7, 30).unwrap();
        let w2 = class_weight(2.0, 500, 7, 30).unwrap();
        assert!((w2 - 2.0 * w1).abs() < 1e-12);
    }

    #[test]
    fn class_weight_rejects_empty_class() {
        assert!(class_weight(1.0, 10, 7, 0).is_err());
    }

    #[test]
    fn class_weight_single_label_identity() {
        // With every sample in exactly one class, sum_j n_j * C_k(j) = C * n.
        let counts = [327usize, 1943, 7347, 248, 2159, 4462, 1233];
        let n: usize = counts.iter().sum();
        let c = 1.7;
        let total: f64 = counts
            .iter()
            .map(|&n_j| n_j as f64 * class_weight(c, n, 7, n_j).unwrap())
            .sum();
        assert!((total - c * n as f64).abs() < 1e-6);
    }

    #[test]
    fn featurize_lengths() {
        let img = ImageTensor::constant(32, 32, 0.25);
        let f = featurize(&img);
        assert_eq!(f.len(), 3 * 32 * 32);
        assert!(f.iter().all(|&v| v == 0.25));
        let big = ImageTensor::constant(224, 224, 0.5);
        assert_eq!(featurize(&big).len(), 150_528);
    }

    /// 2D toy set separable along the first coordinate. Points at (+1, 0)
    /// are positive for the even classes, points at (-1, 0) for the odd
    /// ones, so every one of the seven binary problems is two-sided.
    fn toy_set() -> (Vec<Vec<f64>>, Vec<LabelVector>) {
        let mut features = Vec::new();
        let mut labels = Vec::new();
        for _ in 0..10 {
            features.push(vec![1.0, 0.0]);
            labels.push("1010101".parse().unwrap());
            features.push(vec![-1.0, 0.0]);
            labels.push("0101010".parse().unwrap());
        }
        (features, labels)
    }

    fn toy_config() -> SvmConfig {
        SvmConfig {
            max_iterations: 60,
            feature_side: 1,
            seed: 4,
            ..SvmConfig::default()
        }
    }

    #[test]
    fn separable_toy_set_reaches_perfect_training_accuracy() {
        let (features, labels) = toy_set();
        let (svm, _) = train_one_vs_all(&features, &labels, &toy_config()).unwrap();
        for (x, y) in features.iter().zip(&labels) {
            let pred = predict_multilabel(&svm, x).unwrap();
            assert_eq!(pred, *y);
        }
    }

    #[test]
    fn hinge_objective_trends_downward() {
        let (features, labels) = toy_set();
        let (_, histories) = train_one_vs_all(&features, &labels, &toy_config()).unwrap();
        for history in &histories {
            let first = history[0];
            let last = *history.last().unwrap();
            assert!(last <= first, "objective rose: {first} -> {last}");
            // Allow small stochastic wobble between consecutive epochs.
            for pair in history.windows(2) {
                assert!(pair[1] <= pair[0] * 1.05 + 1e-9, "{} -> {}", pair[0], pair[1]);
            }
        }
    }

    #[test]
    fn one_sided_class_is_rejected_by_name() {
        let features = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        let labels = vec!["1000000".parse().unwrap(), "1000000".parse().unwrap()];
        match train_one_vs_all(&features, &labels, &toy_config()) {
            Err(Error::OneSidedClass { class, what }) => {
                assert_eq!(class, "fire");
                assert_eq!(what, "negative");
            }
            other => panic!("expected one-sided error, got {other:?}"),
        }
    }

    #[test]
    fn training_is_deterministic_per_seed() {
        let (features, labels) = toy_set();
        let cfg = toy_config();
        let (a, _) = train_one_vs_all(&features, &labels, &cfg).unwrap();
        let (b, _) = train_one_vs_all(&features, &labels, &cfg).unwrap();
        assert_eq!(a, b);
        let mut other = cfg.clone();
        other.seed = 5;
        let (c, _) = train_one_vs_all(&features, &labels, &other).unwrap();
        assert_ne!(a, c);
    }

    fn hand_model(weights: Vec<f64>, bias: f64, class: usize) -> LinearModel {
        LinearModel {
            class_index: class,
            weights,
            bias,
            penalty: 1.0,
        }
    }

    fn hand_svm(biases: [f64; NUM_CLASSES]) -> OneVsAllSvm {
        OneVsAllSvm {
            models: (0..NUM_CLASSES)
                .map(|c| hand_model(vec![0.0, 0.0], biases[c], c))
                .collect(),
            feature_side: 1,
        }
    }

    #[test]
    fn decision_scores_hand_cases() {
        let svm = hand_svm([0.3; NUM_CLASSES]);
        let scores = decision_scores(&svm, &[2.0, 3.0]).unwrap();
        assert_eq!(scores, [0.3; NUM_CLASSES]);

        let mut svm = hand_svm([0.0; NUM_CLASSES]);
        svm.models[2] = hand_model(vec![1.0, 0.0], -0.5, 2);
        let scores = decision_scores(&svm, &[2.0, 3.0]).unwrap();
        assert!((scores[2] - 1.5).abs() < 1e-12);

        // x = 0 returns the biases.
        let svm = hand_svm([0.1, -0.2, 0.3, 0.0, 0.5, -0.5, 0.9]);
        let scores = decision_scores(&svm, &[0.0, 0.0]).unwrap();
        assert_eq!(scores, [0.1, -0.2, 0.3, 0.0, 0.5, -0.5, 0.9]);
    }

    #[test]
    fn dimension_mismatch_is_error() {
        let svm = hand_svm([0.0; NUM_CLASSES]);
        assert!(decision_scores(&svm, &[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn multilabel_sign_rule() {
        let svm = hand_svm([0.3, -0.1, 2.0, -5.0, 0.0, 1.0, -1.0]);
        let pred = predict_multilabel(&svm, &[0.0, 0.0]).unwrap();
        // Exactly zero is negative.
        assert_eq!(pred.to_string(), "1010010");

        let all_neg = hand_svm([-1.0; NUM_CLASSES]);
        assert_eq!(
            predict_multilabel(&all_neg, &[0.0, 0.0]).unwrap(),
            LabelVector::empty()
        );
        let all_pos = hand_svm([1.0; NUM_CLASSES]);
        assert_eq!(
            predict_multilabel(&all_pos, &[0.0, 0.0]).unwrap().to_string(),
            "1111111"
        );
    }

    #[test]
    fn vote_is_argmax_with_low_index_ties() {
        let svm = hand_svm([0.1, 0.9, -1.0, -1.0, -1.0, -1.0, -1.0]);
        assert_eq!(predict_vote(&svm, &[0.0, 0.0]).unwrap(), 1);

        let tie = hand_svm([0.0, 0.7, 0.7, -1.0, -1.0, -1.0, -1.0]);
        assert_eq!(predict_vote(&tie, &[0.0, 0.0]).unwrap(), 1);
    }

    #[test]
    fn vote_matches_brute_force_argmax() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(17);
        for _ in 0..50 {
            let biases: [f64; NUM_CLASSES] = std::array::from_fn(|_| rng.gen_range(-2.0..2.0));
            let svm = hand_svm(biases);
            let vote = predict_vote(&svm, &[0.0, 0.0]).unwrap();
            let scores = decision_scores(&svm, &[0.0, 0.0]).unwrap();
            let mut brute = 0;
            let mut best = f64::NEG_INFINITY;
            for (i, &s) in scores.iter().enumerate() {
                if s > best {
                    best = s;
                    brute = i;
                }
            }
            assert_eq!(vote, brute);
        }
    }
}
