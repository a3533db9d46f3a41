//! Spatial operations: 2D convolution, pooling and dense layers.
//!
//! All loops are written as contiguous row operations (`y += a * x` and
//! dot products) so the compiler can vectorize them; the networks spend
//! nearly all their time here. Convolution is stride 1 with symmetric
//! zero padding, max pooling is a fixed 2x2 / stride 2 window.

use super::{Op, Tensor};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// `y += a * x` over contiguous rows.
#[inline]
fn axpy<S: Scalar>(y: &mut [S], a: S, x: &[S]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * *xi;
    }
}

/// Dot product with eight independent accumulators so the reduction does
/// not serialize. The split is fixed, so results are bit-reproducible.
#[inline]
fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    let mut acc = [S::zero(); 8];
    let chunks = a.len() / 8;
    for i in 0..chunks {
        let pa = &a[i * 8..i * 8 + 8];
        let pb = &b[i * 8..i * 8 + 8];
        for k in 0..8 {
            acc[k] += pa[k] * pb[k];
        }
    }
    let mut s = S::zero();
    for k in 0..8 {
        s += acc[k];
    }
    for i in chunks * 8..a.len() {
        s += a[i] * b[i];
    }
    s
}

/// Output row range `[o0, o1)` for kernel offset `k` and padding `p` given
/// `extent` input positions and `out` output positions: exactly the outputs
/// whose sampled input index `o + k - p` lands inside the input.
#[inline]
fn valid_range(out: usize, extent: usize, k: usize, p: usize) -> (usize, usize) {
    let o0 = p.saturating_sub(k);
    let o1 = (extent + p - k).min(out);
    (o0, o1.max(o0))
}

impl<S: Scalar> Tensor<S> {
    /// 2D convolution, stride 1. `self` is `C_in x H x W`, `weights` is
    /// `C_out x C_in x K x K`, `bias` is `C_out`; output is
    /// `C_out x (H + 2p - K + 1) x (W + 2p - K + 1)`.
    pub fn conv2d(&self, weights: &Tensor<S>, bias: &Tensor<S>, padding: usize) -> Result<Tensor<S>> {
        let ishape = self.shape();
        let wshape = weights.shape();
        let bshape = bias.shape();
        if ishape.len() != 3 {
            return Err(Error::shape("conv2d", format!("input must be C x H x W, got {:?}", ishape)));
        }
        if wshape.len() != 4 || wshape[2] != wshape[3] {
            return Err(Error::shape(
                "conv2d",
                format!("weights must be C_out x C_in x K x K, got {:?}", wshape),
            ));
        }
        let (c_in, h, w) = (ishape[0], ishape[1], ishape[2]);
        let (c_out, k) = (wshape[0], wshape[2]);
        if wshape[1] != c_in {
            return Err(Error::shape(
                "conv2d",
                format!("weights expect {} input channels, input has {}", wshape[1], c_in),
            ));
        }
        if bshape != [c_out] {
            return Err(Error::shape(
                "conv2d",
                format!("bias shape {:?} does not match {} output channels", bshape, c_out),
            ));
        }
        let (oh, ow) = match (h + 2 * padding).checked_sub(k - 1).filter(|&v| v > 0) {
            Some(oh) => match (w + 2 * padding).checked_sub(k - 1).filter(|&v| v > 0) {
                Some(ow) => (oh, ow),
                None => {
                    return Err(Error::shape(
                        "conv2d",
                        format!("kernel {} too large for input width {} with padding {}", k, w, padding),
                    ))
                }
            },
            None => {
                return Err(Error::shape(
                    "conv2d",
                    format!("kernel {} too large for input height {} with padding {}", k, h, padding),
                ))
            }
        };

        let input = self.inner.borrow();
        let wt = weights.inner.borrow();
        let bs = bias.inner.borrow();
        let mut out = vec![S::zero(); c_out * oh * ow];

        for co in 0..c_out {
            let och = &mut out[co * oh * ow..(co + 1) * oh * ow];
            och.fill(bs.data[co]);
            for ci in 0..c_in {
                let ich = &input.data[ci * h * w..(ci + 1) * h * w];
                for ky in 0..k {
                    let (oy0, oy1) = valid_range(oh, h, ky, padding);
                    for kx in 0..k {
                        let wv = wt.data[((co * c_in + ci) * k + ky) * k + kx];
                        let (ox0, ox1) = valid_range(ow, w, kx, padding);
                        if ox0 >= ox1 {
                            continue;
                        }
                        for oy in oy0..oy1 {
                            let iy = oy + ky - padding;
                            let ix0 = ox0 + kx - padding;
                            axpy(
                                &mut och[oy * ow + ox0..oy * ow + ox1],
                                wv,
                                &ich[iy * w + ix0..iy * w + ix0 + (ox1 - ox0)],
                            );
                        }
                    }
                }
            }
        }

        let rg = input.requires_grad || wt.requires_grad || bs.requires_grad;
        drop((input, wt, bs));
        Ok(Tensor::new(
            vec![c_out, oh, ow],
            out,
            rg,
            Op::Conv2d { input: self.clone(), weights: weights.clone(), bias: bias.clone(), padding },
        ))
    }

    /// 2x2 max pooling with stride 2. Requires even spatial extents. Ties
    /// resolve to the first element in row-major window order.
    pub fn maxpool2(&self) -> Result<Tensor<S>> {
        let shape = self.shape();
        if shape.len() != 3 {
            return Err(Error::shape("maxpool2", format!("input must be C x H x W, got {:?}", shape)));
        }
        let (c, h, w) = (shape[0], shape[1], shape[2]);
        if h % 2 != 0 || w % 2 != 0 {
            return Err(Error::shape(
                "maxpool2",
                format!("spatial extents must be even, got {} x {}", h, w),
            ));
        }
        let (oh, ow) = (h / 2, w / 2);
        let input = self.inner.borrow();
        let mut out = vec![S::zero(); c * oh * ow];
        let mut argmax = vec![0usize; c * oh * ow];
        for ch in 0..c {
            let ich = &input.data[ch * h * w..(ch + 1) * h * w];
            for oy in 0..oh {
                for ox in 0..ow {
                    let base = 2 * oy * w + 2 * ox;
                    let window = [base, base + 1, base + w, base + w + 1];
                    let mut best = window[0];
                    for &idx in &window[1..] {
                        if ich[idx] > ich[best] {
                            best = idx;
                        }
                    }
                    out[(ch * oh + oy) * ow + ox] = ich[best];
                    argmax[(ch * oh + oy) * ow + ox] = ch * h * w + best;
                }
            }
        }
        let rg = input.requires_grad;
        drop(input);
        Ok(Tensor::new(vec![c, oh, ow], out, rg, Op::MaxPool2 { input: self.clone(), argmax }))
    }

    /// Average-pool each `factor x factor` block down to one cell. Spatial
    /// extents that are not multiples of `factor` are cropped at the
    /// bottom/right edge before pooling.
    pub fn avgpool_down(&self, factor: usize) -> Result<Tensor<S>> {
        let shape = self.shape();
        if shape.len() != 3 {
            return Err(Error::shape("avgpool_down", format!("input must be C x H x W, got {:?}", shape)));
        }
        if factor == 0 {
            return Err(Error::shape("avgpool_down", "factor must be positive".to_string()));
        }
        let (c, h, w) = (shape[0], shape[1], shape[2]);
        let (oh, ow) = (h / factor, w / factor);
        if oh == 0 || ow == 0 {
            return Err(Error::shape(
                "avgpool_down",
                format!("factor {} exceeds input extent {} x {}", factor, h, w),
            ));
        }
        let input = self.inner.borrow();
        let inv = S::one() / S::of((factor * factor) as f64);
        let mut out = vec![S::zero(); c * oh * ow];
        for ch in 0..c {
            let ich = &input.data[ch * h * w..(ch + 1) * h * w];
            for oy in 0..oh {
                for ox in 0..ow {
                    let mut s = S::zero();
                    for dy in 0..factor {
                        for dx in 0..factor {
                            s += ich[(oy * factor + dy) * w + ox * factor + dx];
                        }
                    }
                    out[(ch * oh + oy) * ow + ox] = s * inv;
                }
            }
        }
        let rg = input.requires_grad;
        drop(input);
        Ok(Tensor::new(vec![c, oh, ow], out, rg, Op::AvgPoolDown { input: self.clone(), factor }))
    }

    /// Fully connected layer: `weights` is `M x N`, `self` is a length-`N`
    /// vector, `bias` is length `M`; output is length `M`.
    pub fn dense(&self, weights: &Tensor<S>, bias: &Tensor<S>) -> Result<Tensor<S>> {
        let xshape = self.shape();
        let wshape = weights.shape();
        let bshape = bias.shape();
        if xshape.len() != 1 {
            return Err(Error::shape("dense", format!("input must be a vector, got {:?}", xshape)));
        }
        if wshape.len() != 2 || wshape[1] != xshape[0] {
            return Err(Error::shape(
                "dense",
                format!("weights {:?} do not match input length {}", wshape, xshape[0]),
            ));
        }
        let (m, n) = (wshape[0], wshape[1]);
        if bshape != [m] {
            return Err(Error::shape(
                "dense",
                format!("bias shape {:?} does not match {} outputs", bshape, m),
            ));
        }
        let x = self.inner.borrow();
        let wt = weights.inner.borrow();
        let bs = bias.inner.borrow();
        let mut out = vec![S::zero(); m];
        for (i, o) in out.iter_mut().enumerate() {
            *o = bs.data[i] + dot(&wt.data[i * n..(i + 1) * n], &x.data);
        }
        let rg = x.requires_grad || wt.requires_grad || bs.requires_grad;
        drop((x, wt, bs));
        Ok(Tensor::new(
            vec![m],
            out,
            rg,
            Op::Dense { input: self.clone(), weights: weights.clone(), bias: bias.clone() },
        ))
    }
}

pub(super) fn conv2d_backward<S: Scalar>(
    output: &Tensor<S>,
    input: &Tensor<S>,
    weights: &Tensor<S>,
    bias: &Tensor<S>,
    padding: usize,
    grad: &[S],
) {
    let ishape = input.shape();
    let wshape = weights.shape();
    let oshape = output.shape();
    let (c_in, h, w) = (ishape[0], ishape[1], ishape[2]);
    let (c_out, k) = (wshape[0], wshape[2]);
    let (oh, ow) = (oshape[1], oshape[2]);

    if bias.requires_grad() {
        let mut db = vec![S::zero(); c_out];
        for (co, dbc) in db.iter_mut().enumerate() {
            *dbc = S::of(crate::scalar::sum_f64(&grad[co * oh * ow..(co + 1) * oh * ow]));
        }
        bias.accumulate_grad(&db);
    }

    if weights.requires_grad() {
        let idata = input.inner.borrow();
        let mut dw = vec![S::zero(); c_out * c_in * k * k];
        for co in 0..c_out {
            let gch = &grad[co * oh * ow..(co + 1) * oh * ow];
            for ci in 0..c_in {
                let ich = &idata.data[ci * h * w..(ci + 1) * h * w];
                for ky in 0..k {
                    let (oy0, oy1) = valid_range(oh, h, ky, padding);
                    for kx in 0..k {
                        let (ox0, ox1) = valid_range(ow, w, kx, padding);
                        if ox0 >= ox1 {
                            continue;
                        }
                        let mut s = S::zero();
                        for oy in oy0..oy1 {
                            let iy = oy + ky - padding;
                            let ix0 = ox0 + kx - padding;
                            s += dot(
                                &gch[oy * ow + ox0..oy * ow + ox1],
                                &ich[iy * w + ix0..iy * w + ix0 + (ox1 - ox0)],
                            );
                        }
                        dw[((co * c_in + ci) * k + ky) * k + kx] = s;
                    }
                }
            }
        }
        drop(idata);
        weights.accumulate_grad(&dw);
    }

    if input.requires_grad() {
        let wdata = weights.inner.borrow();
        let mut di = vec![S::zero(); c_in * h * w];
        for co in 0..c_out {
            let gch = &grad[co * oh * ow..(co + 1) * oh * ow];
            for ci in 0..c_in {
                let dich = &mut di[ci * h * w..(ci + 1) * h * w];
                for ky in 0..k {
                    let (oy0, oy1) = valid_range(oh, h, ky, padding);
                    for kx in 0..k {
                        let wv = wdata.data[((co * c_in + ci) * k + ky) * k + kx];
                        let (ox0, ox1) = valid_range(ow, w, kx, padding);
                        if ox0 >= ox1 {
                            continue;
                        }
                        for oy in oy0..oy1 {
                            let iy = oy + ky - padding;
                            let ix0 = ox0 + kx - padding;
                            axpy(
                                &mut dich[iy * w + ix0..iy * w + ix0 + (ox1 - ox0)],
                                wv,
                                &gch[oy * ow + ox0..oy * ow + ox1],
                            );
                        }
                    }
                }
            }
        }
        drop(wdata);
        input.accumulate_grad(&di);
    }
}

pub(super) fn avgpool_down_backward<S: Scalar>(input: &Tensor<S>, factor: usize, grad: &[S]) {
    if !input.requires_grad() {
        return;
    }
    let shape = input.shape();
    let (c, h, w) = (shape[0], shape[1], shape[2]);
    let (oh, ow) = (h / factor, w / factor);
    let inv = S::one() / S::of((factor * factor) as f64);
    let mut di = vec![S::zero(); c * h * w];
    for ch in 0..c {
        for oy in 0..oh {
            for ox in 0..ow {
                let g = grad[(ch * oh + oy) * ow + ox] * inv;
                for dy in 0..factor {
                    for dx in 0..factor {
                        di[ch * h * w + (oy * factor + dy) * w + ox * factor + dx] = g;
                    }
                }
            }
        }
    }
    input.accumulate_grad(&di);
}

pub(super) fn dense_backward<S: Scalar>(
    input: &Tensor<S>,
    weights: &Tensor<S>,
    bias: &Tensor<S>,
    grad: &[S],
) {
    let n = input.numel();
    let m = grad.len();

    if bias.requires_grad() {
        bias.accumulate_grad(grad);
    }
    if weights.requires_grad() {
        let x = input.inner.borrow();
        let mut dw = vec![S::zero(); m * n];
        for (i, &g) in grad.iter().enumerate() {
            axpy(&mut dw[i * n..(i + 1) * n], g, &x.data);
        }
        drop(x);
        weights.accumulate_grad(&dw);
    }
    if input.requires_grad() {
        let wt = weights.inner.borrow();
        let mut dx = vec![S::zero(); n];
        for (i, &g) in grad.iter().enumerate() {
            axpy(&mut dx, g, &wt.data[i * n..(i + 1) * n]);
        }
        drop(wt);
        input.accumulate_grad(&dx);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type T = Tensor<f64>;

    #[test]
    fn conv_identity_kernel_is_identity() {
        let input = T::leaf(&[1, 3, 3], (1..=9).map(|v| v as f64).collect(), false).unwrap();
        let w = T::leaf(&[1, 1, 1, 1], vec![1.0], false).unwrap();
        let b = T::zeros(&[1], false);
        let out = input.conv2d(&w, &b, 0).unwrap();
        assert_eq!(out.shape(), vec![1, 3, 3]);
        assert_eq!(out.to_vec(), input.to_vec());
    }

    #[test]
    fn conv_output_shape_arithmetic() {
        let input = T::zeros(&[3, 16, 16], false);
        let w = T::zeros(&[5, 3, 5, 5], false);
        let b = T::zeros(&[5], false);
        // padding 2 keeps the spatial extent
        assert_eq!(input.conv2d(&w, &b, 2).unwrap().shape(), vec![5, 16, 16]);
        // valid convolution shrinks by K - 1
        assert_eq!(input.conv2d(&w, &b, 0).unwrap().shape(), vec![5, 12, 12]);
    }

    #[test]
    fn conv_3x3_hand_computed() {
        // Single 3x3 input, 3x3 averaging kernel, padding 1: the center
        // output is the mean of all nine inputs.
        let input = T::leaf(&[1, 3, 3], (1..=9).map(|v| v as f64).collect(), false).unwrap();
        let w = T::full(&[1, 1, 3, 3], 1.0 / 9.0, false);
        let b = T::zeros(&[1], false);
        let out = input.conv2d(&w, &b, 1).unwrap();
        let v = out.to_vec();
        assert!((v[4] - 5.0).abs() < 1e-12);
        // Top-left output only sees inputs 1,2,4,5.
        assert!((v[0] - 12.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn conv_rejects_oversized_kernel() {
        let input = T::zeros(&[1, 4, 4], false);
        let w = T::zeros(&[1, 1, 7, 7], false);
        let b = T::zeros(&[1], false);
        let err = input.conv2d(&w, &b, 1).unwrap_err();
        assert!(err.to_string().contains("kernel"), "{err}");
    }

    #[test]
    fn conv_bias_reaches_every_cell() {
        let input = T::zeros(&[1, 4, 4], false);
        let w = T::zeros(&[2, 1, 3, 3], false);
        let b = T::leaf(&[2], vec![1.5, -2.0], false).unwrap();
        let out = input.conv2d(&w, &b, 1).unwrap();
        let v = out.to_vec();
        assert!(v[..16].iter().all(|&x| x == 1.5));
        assert!(v[16..].iter().all(|&x| x == -2.0));
    }

    #[test]
    fn maxpool_picks_window_max_and_first_tie() {
        let input = T::leaf(
            &[1, 4, 4],
            vec![
                1.0, 2.0, 5.0, 5.0, //
                3.0, 4.0, 5.0, 5.0, //
                0.0, 0.0, -1.0, -3.0, //
                0.0, 0.0, -2.0, -4.0,
            ],
            true,
        )
        .unwrap();
        let out = input.maxpool2().unwrap();
        assert_eq!(out.to_vec(), vec![4.0, 5.0, 0.0, -1.0]);
        out.sum_all().backward().unwrap();
        let g = input.grad().unwrap();
        // The 5.0 tie routes to index 2 (first in row-major window order),
        // the 0.0 tie to index 8.
        assert_eq!(g[2], 1.0);
        assert_eq!(g[3], 0.0);
        assert_eq!(g[8], 1.0);
        assert_eq!(g[5], 1.0);
        assert_eq!(g[10], 1.0);
    }

    #[test]
    fn maxpool_rejects_odd_extent() {
        let input = T::zeros(&[1, 5, 4], false);
        assert!(input.maxpool2().is_err());
    }

    #[test]
    fn avgpool_down_constant_map() {
        let input = T::full(&[1, 8, 8], 3.0, false);
        let out = input.avgpool_down(4).unwrap();
        assert_eq!(out.shape(), vec![1, 2, 2]);
        assert!(out.to_vec().iter().all(|&v| (v - 3.0).abs() < 1e-12));
    }

    #[test]
    fn avgpool_down_crops_ragged_edge() {
        // 5x5 input, factor 2: only the top-left 4x4 participates.
        let input = T::leaf(&[1, 5, 5], (0..25).map(|v| v as f64).collect(), true).unwrap();
        let out = input.avgpool_down(2).unwrap();
        assert_eq!(out.shape(), vec![1, 2, 2]);
        assert_eq!(out.to_vec()[0], (0.0 + 1.0 + 5.0 + 6.0) / 4.0);
        out.sum_all().backward().unwrap();
        let g = input.grad().unwrap();
        // Cropped cells get no gradient.
        assert_eq!(g[4], 0.0);
        assert_eq!(g[24], 0.0);
        assert_eq!(g[0], 0.25);
    }

    #[test]
    fn dense_identity_and_bias() {
        let x = T::leaf(&[3], vec![1.0, 2.0, 3.0], false).unwrap();
        let w = T::leaf(&[3, 3], vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0], false).unwrap();
        let b = T::leaf(&[3], vec![10.0, 20.0, 30.0], false).unwrap();
        let out = x.dense(&w, &b).unwrap();
        assert_eq!(out.to_vec(), vec![11.0, 22.0, 33.0]);
    }

    #[test]
    fn dense_backward_hand_computed() {
        // out = w x + b, loss = sum(out)
        // dL/dw[i][j] = x[j], dL/dx[j] = sum_i w[i][j], dL/db = 1
        let x = T::leaf(&[2], vec![3.0, 4.0], true).unwrap();
        let w = T::leaf(&[2, 2], vec![1.0, 2.0, 5.0, 6.0], true).unwrap();
        let b = T::leaf(&[2], vec![0.0, 0.0], true).unwrap();
        x.dense(&w, &b).unwrap().sum_all().backward().unwrap();
        assert_eq!(w.grad().unwrap(), vec![3.0, 4.0, 3.0, 4.0]);
        assert_eq!(x.grad().unwrap(), vec![6.0, 8.0]);
        assert_eq!(b.grad().unwrap(), vec![1.0, 1.0]);
    }

    #[test]
    fn dot_matches_naive() {
        let a: Vec<f64> = (0..37).map(|v| (v as f64) * 0.37 - 5.0).collect();
        let b: Vec<f64> = (0..37).map(|v| (v as f64) * -0.11 + 2.0).collect();
        let naive: f64 = a.iter().zip(&b).map(|(&x, &y)| x * y).sum();
        assert!((dot(&a, &b) - naive).abs() < 1e-9);
    }
}
