//! Forward and backward kernels: convolution, ReLU, max-pooling, and
//! fully connected layers.
//!
//! Convolutions are cross-correlations with "same" zero padding: the
//! output side is `ceil(in / stride)` and the total padding
//! `max((out-1)*stride + k - in, 0)` splits floor-before / rest-after.
//! Max-pooling uses the same output geometry but ignores out-of-bounds
//! cells instead of padding them, and remembers each window's argmax for
//! the backward routing.

use crate::cnn::tensor::Tensor;
use crate::error::{Error, Result};

/// Output side and leading pad for "same" geometry.
pub fn same_geometry(input_side: usize, kernel: usize, stride: usize) -> (usize, usize) {
    let out = input_side.div_ceil(stride);
    let pad_total = ((out - 1) * stride + kernel).saturating_sub(input_side);
    (out, pad_total / 2)
}

/// Cross-correlate `input` `[C, H, W]` with `filters` `[F, C, K, K]` at the
/// given stride under same padding, adding one bias per filter.
pub fn conv2d_forward(
    input: &Tensor,
    filters: &Tensor,
    bias: &Tensor,
    stride: usize,
) -> Result<Tensor> {
    let [c_in, h, w] = dims3(input)?;
    let fs = filters.shape();
    if fs.len() != 4 || fs[1] != c_in {
        return Err(Error::ShapeMismatch {
            expected: format!("filters [F, {c_in}, K, K]"),
            actual: format!("{fs:?}"),
        });
    }
    let (f_count, k) = (fs[0], fs[2]);
    let (out_h, pad_y) = same_geometry(h, k, stride);
    let (out_w, pad_x) = same_geometry(w, k, stride);

    let mut out = Tensor::zeros(&[f_count, out_h, out_w]);
    let in_data = input.data();
    let f_data = filters.data();
    let out_data = out.data_mut();
    for f in 0..f_count {
        let b = bias.data()[f];
        for oy in 0..out_h {
            for ox in 0..out_w {
                let mut acc = b;
                for c in 0..c_in {
                    let f_base = ((f * c_in + c) * k) * k;
                    let in_base = c * h * w;
                    for ky in 0..k {
                        let iy = (oy * stride + ky) as isize - pad_y as isize;
                        if iy < 0 || iy >= h as isize {
                            continue;
                        }
                        let row = in_base + iy as usize * w;
                        for kx in 0..k {
                            let ix = (ox * stride + kx) as isize - pad_x as isize;
                            if ix < 0 || ix >= w as isize {
                                continue;
                            }
                            acc += f_data[f_base + ky * k + kx] * in_data[row + ix as usize];
                        }
                    }
                }
                out_data[(f * out_h + oy) * out_w + ox] = acc;
            }
        }
    }
    Ok(out)
}

/// Gradients of the convolution wrt input, filters, and bias.
pub fn conv2d_backward(
    input: &Tensor,
    filters: &Tensor,
    grad_out: &Tensor,
    stride: usize,
) -> Result<(Tensor, Tensor, Tensor)> {
    let [c_in, h, w] = dims3(input)?;
    let fs = filters.shape();
    let (f_count, k) = (fs[0], fs[2]);
    let [_, out_h, out_w] = dims3(grad_out)?;
    let (_, pad_y) = same_geometry(h, k, stride);
    let (_, pad_x) = same_geometry(w, k, stride);

    let mut grad_input = input.zeros_like();
    let mut grad_filters = filters.zeros_like();
    let mut grad_bias = Tensor::zeros(&[f_count]);
    let in_data = input.data();
    let f_data = filters.data();
    let go = grad_out.data();

    for f in 0..f_count {
        for oy in 0..out_h {
            for ox in 0..out_w {
                let g = go[(f * out_h + oy) * out_w + ox];
                grad_bias.data_mut()[f] += g;
                for c in 0..c_in {
                    let f_base = ((f * c_in + c) * k) * k;
                    let in_base = c * h * w;
                    for ky in 0..k {
                        let iy = (oy * stride + ky) as isize - pad_y as isize;
                        if iy < 0 || iy >= h as isize {
                            continue;
                        }
                        let row = in_base + iy as usize * w;
                        for kx in 0..k {
                            let ix = (ox * stride + kx) as isize - pad_x as isize;
                            if ix < 0 || ix >= w as isize {
                                continue;
                            }
                            let in_idx = row + ix as usize;
                            let f_idx = f_base + ky * k + kx;
                            grad_filters.data_mut()[f_idx] += g * in_data[in_idx];
                            grad_input.data_mut()[in_idx] += g * f_data[f_idx];
                        }
                    }
                }
            }
        }
    }
    Ok((grad_input, grad_filters, grad_bias))
}

/// Elementwise `max(0, x)`.
pub fn relu(x: &Tensor) -> Tensor {
    let mut out = x.clone();
    for v in out.data_mut() {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    out
}

/// Route `grad_out` through the ReLU mask of the pre-activation `x`.
pub fn relu_backward(x: &Tensor, grad_out: &Tensor) -> Tensor {
    let mut grad = grad_out.clone();
    for (g, &v) in grad.data_mut().iter_mut().zip(x.data()) {
        if v <= 0.0 {
            *g = 0.0;
        }
    }
    grad
}

/// 2x2 stride-2 max pooling with same-geometry output
/// (`ceil(side / 2)`); windows clip at the borders. Returns the pooled
/// tensor and the flat input index that won each window.
pub fn maxpool_forward(input: &Tensor) -> Result<(Tensor, Vec<usize>)> {
    const K: usize = 2;
    const STRIDE: usize = 2;
    let [c_in, h, w] = dims3(input)?;
    let out_h = h.div_ceil(STRIDE);
    let out_w = w.div_ceil(STRIDE);
    let mut out = Tensor::zeros(&[c_in, out_h, out_w]);
    let mut argmax = vec![0usize; c_in * out_h * out_w];
    let data = input.data();
    for c in 0..c_in {
        for oy in 0..out_h {
            for ox in 0..out_w {
                let mut best = f64::NEG_INFINITY;
                let mut best_idx = 0;
                for ky in 0..K {
                    let iy = oy * STRIDE + ky;
                    if iy >= h {
                        continue;
                    }
                    for kx in 0..K {
                        let ix = ox * STRIDE + kx;
                        if ix >= w {
                            continue;
                        }
                        let idx = (c * h + iy) * w + ix;
                        if data[idx] > best {
                            best = data[idx];
                            best_idx = idx;
                        }
                    }
                }
                let out_idx = (c * out_h + oy) * out_w + ox;
                out.data_mut()[out_idx] = best;
                argmax[out_idx] = best_idx;
            }
        }
    }
    Ok((out, argmax))
}

/// Scatter each output gradient back to its argmax position.
pub fn maxpool_backward(argmax: &[usize], grad_out: &Tensor, input_shape: &[usize]) -> Tensor {
    let mut grad = Tensor::zeros(input_shape);
    for (&idx, &g) in argmax.iter().zip(grad_out.data()) {
        grad.data_mut()[idx] += g;
    }
    grad
}

/// Dense layer: `out[j] = b[j] + sum_i w[j, i] * x[i]`.
pub fn fc_forward(x: &Tensor, weights: &Tensor, bias: &Tensor) -> Result<Tensor> {
    let ws = weights.shape();
    if ws.len() != 2 || ws[1] != x.len() {
        return Err(Error::ShapeMismatch {
            expected: format!("weights [out, {}]", x.len()),
            actual: format!("{ws:?}"),
        });
    }
    let (out_dim, in_dim) = (ws[0], ws[1]);
    let mut out = Tensor::zeros(&[out_dim]);
    for j in 0..out_dim {
        let row = &weights.data()[j * in_dim..(j + 1) * in_dim];
        let mut acc = bias.data()[j];
        for (wv, xv) in row.iter().zip(x.data()) {
            acc += wv * xv;
        }
        out.data_mut()[j] = acc;
    }
    Ok(out)
}

/// Gradients of the dense layer wrt input, weights, and bias.
pub fn fc_backward(
    x: &Tensor,
    weights: &Tensor,
    grad_out: &Tensor,
) -> (Tensor, Tensor, Tensor) {
    let (out_dim, in_dim) = (weights.shape()[0], weights.shape()[1]);
    let mut grad_x = x.zeros_like();
    let mut grad_w = weights.zeros_like();
    let grad_b = Tensor::from_data(&[out_dim], grad_out.data().to_vec()).expect("bias grad");
    for j in 0..out_dim {
        let g = grad_out.data()[j];
        let row = &weights.data()[j * in_dim..(j + 1) * in_dim];
        let grad_row = &mut grad_w.data_mut()[j * in_dim..(j + 1) * in_dim];
        for i in 0..in_dim {
            grad_row[i] += g * x.data()[i];
            grad_x.data_mut()[i] += g * row[i];
        }
    }
    (grad_x, grad_w, grad_b)
}

fn dims3(t: &Tensor) -> Result<[usize; 3]> {
    match t.shape() {
        [a, b, c] => Ok([*a, *b, *c]),
        other => Err(Error::ShapeMismatch {
            expected: "rank-3 tensor".into(),
            actual: format!("{other:?}"),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_geometry_matches_architecture_table() {
        // Conv side chain 224 -> 112 -> (pool) 56 -> 28 -> 14 -> 7 -> 4.
        assert_eq!(same_geometry(224, 3, 2).0, 112);
        assert_eq!(same_geometry(112, 2, 2).0, 56);
        assert_eq!(same_geometry(56, 3, 2).0, 28);
        assert_eq!(same_geometry(28, 2, 2).0, 14);
        assert_eq!(same_geometry(14, 3, 2).0, 7);
        assert_eq!(same_geometry(7, 2, 2).0, 4);
    }

    #[test]
    fn conv_output_shape_per_table() {
        let input = Tensor::zeros(&[3, 224, 224]);
        let filters = Tensor::zeros(&[32, 3, 3, 3]);
        let bias = Tensor::zeros(&[32]);
        let out = conv2d_forward(&input, &filters, &bias, 2).unwrap();
        assert_eq!(out.shape(), &[32, 112, 112]);
    }

    #[test]
    fn zero_filter_gives_zero_output() {
        let input = Tensor::from_data(&[1, 1, 1], vec![5.0]).unwrap();
        let filters = Tensor::zeros(&[1, 1, 3, 3]);
        let bias = Tensor::zeros(&[1]);
        let out = conv2d_forward(&input, &filters, &bias, 1).unwrap();
        assert_eq!(out.data(), &[0.0]);
    }

    #[test]
    fn ones_kernel_center_accumulates_nine() {
        // 3x3 all-ones input, all-ones 3x3 filter, stride 1 same pad:
        // the center output sums the full window.
        let input = Tensor::from_data(&[1, 3, 3], vec![1.0; 9]).unwrap();
        let filters = Tensor::from_data(&[1, 1, 3, 3], vec![1.0; 9]).unwrap();
        let bias = Tensor::zeros(&[1]);
        let out = conv2d_forward(&input, &filters, &bias, 1).unwrap();
        assert_eq!(out.shape(), &[1, 3, 3]);
        assert_eq!(out.data()[4], 9.0);
        // Corners see a 2x2 window under zero padding.
        assert_eq!(out.data()[0], 4.0);
    }

    #[test]
    fn conv_rejects_channel_mismatch() {
        let input = Tensor::zeros(&[3, 8, 8]);
        let filters = Tensor::zeros(&[4, 2, 3, 3]);
        let bias = Tensor::zeros(&[4]);
        assert!(conv2d_forward(&input, &filters, &bias, 2).is_err());
    }

    #[test]
    fn relu_examples() {
        let x = Tensor::from_data(&[3], vec![-1.0, 0.0, 2.0]).unwrap();
        assert_eq!(relu(&x).data(), &[0.0, 0.0, 2.0]);

        let negative = Tensor::from_data(&[4], vec![-3.0, -0.5, -1e9, -1e-9]).unwrap();
        assert!(relu(&negative).data().iter().all(|&v| v == 0.0));

        let once = relu(&x);
        assert_eq!(relu(&once), once, "relu is idempotent");
    }

    #[test]
    fn maxpool_shapes_and_values() {
        let input = Tensor::zeros(&[128, 7, 7]);
        let (out, _) = maxpool_forward(&input).unwrap();
        assert_eq!(out.shape(), &[128, 4, 4]);

        let window = Tensor::from_data(&[1, 2, 2], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let (out, argmax) = maxpool_forward(&window).unwrap();
        assert_eq!(out.data(), &[4.0]);
        assert_eq!(argmax, vec![3]);

        let constant = Tensor::from_data(&[1, 4, 4], vec![0.7; 16]).unwrap();
        let (out, _) = maxpool_forward(&constant).unwrap();
        assert!(out.data().iter().all(|&v| v == 0.7));
    }

    #[test]
    fn maxpool_backward_routes_all_gradient() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(3);
        let data: Vec<f64> = (0..2 * 5 * 5).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let input = Tensor::from_data(&[2, 5, 5], data).unwrap();
        let (out, argmax) = maxpool_forward(&input).unwrap();
        let grad_out = Tensor::from_data(
            out.shape(),
            (0..out.len()).map(|i| (i + 1) as f64).collect(),
        )
        .unwrap();
        let grad_in = maxpool_backward(&argmax, &grad_out, input.shape());
        let sum_in: f64 = grad_in.data().iter().sum();
        let sum_out: f64 = grad_out.data().iter().sum();
        assert!((sum_in - sum_out).abs() < 1e-12);
    }

    #[test]
    fn fc_forward_backward_hand_case() {
        let x = Tensor::from_data(&[2], vec![2.0, 3.0]).unwrap();
        let w = Tensor::from_data(&[1, 2], vec![1.0, 0.0]).unwrap();
        let b = Tensor::from_data(&[1], vec![-0.5]).unwrap();
        let out = fc_forward(&x, &w, &b).unwrap();
        assert_eq!(out.data(), &[1.5]);

        let grad_out = Tensor::from_data(&[1], vec![1.0]).unwrap();
        let (gx, gw, gb) = fc_backward(&x, &w, &grad_out);
        assert_eq!(gx.data(), &[1.0, 0.0]);
        assert_eq!(gw.data(), &[2.0, 3.0]);
        assert_eq!(gb.data(), &[1.0]);
    }
}
