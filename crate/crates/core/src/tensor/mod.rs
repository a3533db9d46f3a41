//! Dense tensors with reverse-mode automatic differentiation.
//!
//! Every network in the pipeline is composed from the operations in this
//! module and `conv`. Tensors are channels-first (`C x H x W`) for feature
//! maps and flat vectors for dense layers. Each forward operation records
//! its parents; [`Tensor::backward`] walks the recorded graph once in
//! reverse creation order and accumulates gradients into every
//! `requires_grad` tensor reachable from the loss. The graph is consumed by
//! the walk: a second backward on the same loss is rejected.
//!
//! There is no graph reuse, no broadcasting and no strides beyond what the
//! pipeline needs (conv stride 1, pool stride 2).

mod adam;
mod checkpoint;
mod conv;
pub mod init;
mod params;

pub use adam::AdamState;
pub use checkpoint::{load_params, save_params};
pub use params::ModelParams;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use std::cell::{Ref, RefCell};
use std::rc::Rc;
use std::sync::atomic::{AtomicU64, Ordering};

static NEXT_ID: AtomicU64 = AtomicU64::new(0);

fn fresh_id() -> u64 {
    NEXT_ID.fetch_add(1, Ordering::Relaxed)
}

/// How a tensor was produced. `Leaf` for inputs and parameters; everything
/// else keeps handles to its parents so backward can reach them.
enum Op<S: Scalar> {
    Leaf,
    Add(Tensor<S>, Tensor<S>),
    Sub(Tensor<S>, Tensor<S>),
    Mul(Tensor<S>, Tensor<S>),
    Scale(Tensor<S>, S),
    Relu(Tensor<S>),
    Sigmoid(Tensor<S>),
    SumAll(Tensor<S>),
    ConcatChannels(Vec<Tensor<S>>),
    SliceChannel { input: Tensor<S>, channel: usize },
    Conv2d { input: Tensor<S>, weights: Tensor<S>, bias: Tensor<S>, padding: usize },
    MaxPool2 { input: Tensor<S>, argmax: Vec<usize> },
    AvgPoolDown { input: Tensor<S>, factor: usize },
    Dense { input: Tensor<S>, weights: Tensor<S>, bias: Tensor<S> },
    Bce { prob: Tensor<S>, clamped: S, target: S },
}

struct Inner<S: Scalar> {
    id: u64,
    shape: Vec<usize>,
    data: Vec<S>,
    requires_grad: bool,
    grad: Option<Vec<S>>,
    op: Op<S>,
    consumed: bool,
}

/// Shared handle to a tensor node. Cloning is cheap and refers to the same
/// underlying buffer; recorded operations hold clones of their parents.
pub struct Tensor<S: Scalar> {
    inner: Rc<RefCell<Inner<S>>>,
}

impl<S: Scalar> Clone for Tensor<S> {
    fn clone(&self) -> Self {
        Tensor { inner: Rc::clone(&self.inner) }
    }
}

impl<S: Scalar> std::fmt::Debug for Tensor<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let b = self.inner.borrow();
        f.debug_struct("Tensor")
            .field("shape", &b.shape)
            .field("requires_grad", &b.requires_grad)
            .finish()
    }
}

impl<S: Scalar> Tensor<S> {
    fn new(shape: Vec<usize>, data: Vec<S>, requires_grad: bool, op: Op<S>) -> Self {
        debug_assert_eq!(shape.iter().product::<usize>(), data.len());
        debug_assert!(
            data.iter().all(|v| v.is_finite()),
            "non-finite value produced by a forward operation"
        );
        Tensor {
            inner: Rc::new(RefCell::new(Inner {
                id: fresh_id(),
                shape,
                data,
                requires_grad,
                grad: None,
                op,
                consumed: false,
            })),
        }
    }

    /// A leaf tensor (input or parameter).
    pub fn leaf(shape: &[usize], data: Vec<S>, requires_grad: bool) -> Result<Self> {
        let numel: usize = shape.iter().product();
        if numel != data.len() {
            return Err(Error::shape(
                "leaf",
                format!("shape {:?} implies {} elements, data has {}", shape, numel, data.len()),
            ));
        }
        if shape.iter().any(|&e| e == 0) {
            return Err(Error::shape("leaf", format!("zero extent in shape {:?}", shape)));
        }
        Ok(Tensor::new(shape.to_vec(), data, requires_grad, Op::Leaf))
    }

    pub fn zeros(shape: &[usize], requires_grad: bool) -> Self {
        let numel: usize = shape.iter().product();
        Tensor::new(shape.to_vec(), vec![S::zero(); numel], requires_grad, Op::Leaf)
    }

    pub fn full(shape: &[usize], value: S, requires_grad: bool) -> Self {
        let numel: usize = shape.iter().product();
        Tensor::new(shape.to_vec(), vec![value; numel], requires_grad, Op::Leaf)
    }

    pub fn scalar(value: S) -> Self {
        Tensor::new(vec![1], vec![value], false, Op::Leaf)
    }

    pub fn shape(&self) -> Vec<usize> {
        self.inner.borrow().shape.clone()
    }

    pub fn numel(&self) -> usize {
        self.inner.borrow().data.len()
    }

    pub fn requires_grad(&self) -> bool {
        self.inner.borrow().requires_grad
    }

    pub fn data(&self) -> Ref<'_, [S]> {
        Ref::map(self.inner.borrow(), |b| b.data.as_slice())
    }

    pub fn to_vec(&self) -> Vec<S> {
        self.inner.borrow().data.clone()
    }

    /// Value of a single-element tensor.
    pub fn item(&self) -> Result<S> {
        let b = self.inner.borrow();
        if b.data.len() != 1 {
            return Err(Error::shape("item", format!("tensor has shape {:?}, not a scalar", b.shape)));
        }
        Ok(b.data[0])
    }

    /// Sum of all elements, accumulated in 64-bit regardless of `S`.
    pub fn sum_f64(&self) -> f64 {
        crate::scalar::sum_f64(&self.inner.borrow().data)
    }

    /// Replace the data of a leaf in place (used by optimizers and
    /// finite-difference probes). Not recorded on any graph.
    pub fn set_data(&self, data: &[S]) -> Result<()> {
        let mut b = self.inner.borrow_mut();
        if data.len() != b.data.len() {
            return Err(Error::shape(
                "set_data",
                format!("expected {} elements, got {}", b.data.len(), data.len()),
            ));
        }
        b.data.copy_from_slice(data);
        Ok(())
    }

    pub fn grad(&self) -> Option<Vec<S>> {
        self.inner.borrow().grad.clone()
    }

    pub fn zero_grad(&self) {
        self.inner.borrow_mut().grad = None;
    }

    fn accumulate_grad(&self, contribution: &[S]) {
        let mut b = self.inner.borrow_mut();
        let g = b.grad.get_or_insert_with(|| vec![S::zero(); contribution.len()]);
        for (gi, ci) in g.iter_mut().zip(contribution) {
            *gi += *ci;
        }
    }

    // ── elementwise ─────────────────────────────────────────────────────

    fn check_same_shape(&self, other: &Tensor<S>, op: &'static str) -> Result<()> {
        let (a, b) = (self.inner.borrow(), other.inner.borrow());
        if a.shape != b.shape {
            return Err(Error::shape(op, format!("lhs shape {:?} != rhs shape {:?}", a.shape, b.shape)));
        }
        Ok(())
    }

    pub fn add(&self, other: &Tensor<S>) -> Result<Tensor<S>> {
        self.check_same_shape(other, "add")?;
        let (a, b) = (self.inner.borrow(), other.inner.borrow());
        let data: Vec<S> = a.data.iter().zip(&b.data).map(|(&x, &y)| x + y).collect();
        let rg = a.requires_grad || b.requires_grad;
        let (shape, _) = (a.shape.clone(), ());
        drop((a, b));
        Ok(Tensor::new(shape, data, rg, Op::Add(self.clone(), other.clone())))
    }

    pub fn sub(&self, other: &Tensor<S>) -> Result<Tensor<S>> {
        self.check_same_shape(other, "sub")?;
        let (a, b) = (self.inner.borrow(), other.inner.borrow());
        let data: Vec<S> = a.data.iter().zip(&b.data).map(|(&x, &y)| x - y).collect();
        let rg = a.requires_grad || b.requires_grad;
        let shape = a.shape.clone();
        drop((a, b));
        Ok(Tensor::new(shape, data, rg, Op::Sub(self.clone(), other.clone())))
    }

    pub fn mul(&self, other: &Tensor<S>) -> Result<Tensor<S>> {
        self.check_same_shape(other, "mul")?;
        let (a, b) = (self.inner.borrow(), other.inner.borrow());
        let data: Vec<S> = a.data.iter().zip(&b.data).map(|(&x, &y)| x * y).collect();
        let rg = a.requires_grad || b.requires_grad;
        let shape = a.shape.clone();
        drop((a, b));
        Ok(Tensor::new(shape, data, rg, Op::Mul(self.clone(), other.clone())))
    }

    /// Multiply every element by a constant.
    pub fn scale(&self, c: S) -> Tensor<S> {
        let a = self.inner.borrow();
        let data: Vec<S> = a.data.iter().map(|&x| x * c).collect();
        let rg = a.requires_grad;
        let shape = a.shape.clone();
        drop(a);
        Tensor::new(shape, data, rg, Op::Scale(self.clone(), c))
    }

    pub fn relu(&self) -> Tensor<S> {
        let a = self.inner.borrow();
        let data: Vec<S> = a.data.iter().map(|&x| if x > S::zero() { x } else { S::zero() }).collect();
        let rg = a.requires_grad;
        let shape = a.shape.clone();
        drop(a);
        Tensor::new(shape, data, rg, Op::Relu(self.clone()))
    }

    pub fn sigmoid(&self) -> Tensor<S> {
        let a = self.inner.borrow();
        let data: Vec<S> = a.data.iter().map(|&x| S::one() / (S::one() + (-x).exp())).collect();
        let rg = a.requires_grad;
        let shape = a.shape.clone();
        drop(a);
        Tensor::new(shape, data, rg, Op::Sigmoid(self.clone()))
    }

    /// Sum of all elements as a scalar graph node. The reduction accumulates
    /// in 64-bit so counts over ~10^4 cells stay stable in f32 mode.
    pub fn sum_all(&self) -> Tensor<S> {
        let a = self.inner.borrow();
        let total = S::of(crate::scalar::sum_f64(&a.data));
        let rg = a.requires_grad;
        drop(a);
        Tensor::new(vec![1], vec![total], rg, Op::SumAll(self.clone()))
    }

    // ── channel plumbing ────────────────────────────────────────────────

    /// Extract channel `c` of a `C x H x W` tensor as `1 x H x W`.
    pub fn slice_channel(&self, channel: usize) -> Result<Tensor<S>> {
        let a = self.inner.borrow();
        if a.shape.len() != 3 {
            return Err(Error::shape(
                "slice_channel",
                format!("expected C x H x W input, got shape {:?}", a.shape),
            ));
        }
        let (c, h, w) = (a.shape[0], a.shape[1], a.shape[2]);
        if channel >= c {
            return Err(Error::shape(
                "slice_channel",
                format!("channel {} out of range for {} channels", channel, c),
            ));
        }
        let data = a.data[channel * h * w..(channel + 1) * h * w].to_vec();
        let rg = a.requires_grad;
        drop(a);
        Ok(Tensor::new(vec![1, h, w], data, rg, Op::SliceChannel { input: self.clone(), channel }))
    }

    // ── backward ────────────────────────────────────────────────────────

    /// Reverse-mode sweep from a scalar loss. Gradients accumulate (`+=`)
    /// into the grad buffer of every `requires_grad` tensor reachable from
    /// this node; the recorded graph is consumed afterwards.
    pub fn backward(&self) -> Result<()> {
        {
            let b = self.inner.borrow();
            if b.data.len() != 1 {
                return Err(Error::shape(
                    "backward",
                    format!("loss must be a scalar, got shape {:?}", b.shape),
                ));
            }
            if b.consumed {
                return Err(Error::Training("backward called twice on a consumed graph".into()));
            }
            if !b.requires_grad {
                return Err(Error::Training(
                    "loss does not depend on any requires_grad tensor".into(),
                ));
            }
        }

        // Collect every differentiable ancestor, then process in reverse
        // creation order: parents always precede children, so descending ids
        // form a topological order and the accumulation order is fixed.
        let mut nodes: Vec<Tensor<S>> = Vec::new();
        let mut seen = std::collections::HashSet::new();
        let mut stack = vec![self.clone()];
        while let Some(t) = stack.pop() {
            let id = t.inner.borrow().id;
            if !seen.insert(id) {
                continue;
            }
            t.for_each_parent(|p| {
                if p.requires_grad() {
                    stack.push(p.clone());
                }
            });
            nodes.push(t);
        }
        nodes.sort_by_key(|t| std::cmp::Reverse(t.inner.borrow().id));

        self.inner.borrow_mut().grad = Some(vec![S::one()]);

        for node in &nodes {
            let (grad, op) = {
                let mut b = node.inner.borrow_mut();
                let grad = match b.grad.take() {
                    Some(g) => g,
                    None => {
                        // Reachable but received no contribution (can only
                        // happen for the loss itself, handled above).
                        b.op = Op::Leaf;
                        continue;
                    }
                };
                let is_leaf = matches!(b.op, Op::Leaf);
                if is_leaf {
                    b.grad = Some(grad);
                    continue;
                }
                // Detach: the graph is consumed by this sweep.
                (grad, std::mem::replace(&mut b.op, Op::Leaf))
            };
            node.propagate(&grad, &op);
        }

        self.inner.borrow_mut().consumed = true;
        Ok(())
    }

    fn for_each_parent(&self, mut f: impl FnMut(&Tensor<S>)) {
        let b = self.inner.borrow();
        match &b.op {
            Op::Leaf => {}
            Op::Add(a, c) | Op::Sub(a, c) | Op::Mul(a, c) => {
                f(a);
                f(c);
            }
            Op::Scale(a, _) | Op::Relu(a) | Op::Sigmoid(a) | Op::SumAll(a) => f(a),
            Op::ConcatChannels(parts) => parts.iter().for_each(f),
            Op::SliceChannel { input, .. } => f(input),
            Op::Conv2d { input, weights, bias, .. } => {
                f(input);
                f(weights);
                f(bias);
            }
            Op::MaxPool2 { input, .. } => f(input),
            Op::AvgPoolDown { input, .. } => f(input),
            Op::Dense { input, weights, bias } => {
                f(input);
                f(weights);
                f(bias);
            }
            Op::Bce { prob, .. } => f(prob),
        }
    }

    fn propagate(&self, grad: &[S], op: &Op<S>) {
        match op {
            Op::Leaf => {}
            Op::Add(a, b) => {
                if a.requires_grad() {
                    a.accumulate_grad(grad);
                }
                if b.requires_grad() {
                    b.accumulate_grad(grad);
                }
            }
            Op::Sub(a, b) => {
                if a.requires_grad() {
                    a.accumulate_grad(grad);
                }
                if b.requires_grad() {
                    let neg: Vec<S> = grad.iter().map(|&g| -g).collect();
                    b.accumulate_grad(&neg);
                }
            }
            Op::Mul(a, b) => {
                if a.requires_grad() {
                    let bd = b.inner.borrow();
                    let da: Vec<S> = grad.iter().zip(&bd.data).map(|(&g, &y)| g * y).collect();
                    drop(bd);
                    a.accumulate_grad(&da);
                }
                if b.requires_grad() {
                    let ad = a.inner.borrow();
                    let db: Vec<S> = grad.iter().zip(&ad.data).map(|(&g, &x)| g * x).collect();
                    drop(ad);
                    b.accumulate_grad(&db);
                }
            }
            Op::Scale(a, c) => {
                if a.requires_grad() {
                    let da: Vec<S> = grad.iter().map(|&g| g * *c).collect();
                    a.accumulate_grad(&da);
                }
            }
            Op::Relu(a) => {
                if a.requires_grad() {
                    let ad = a.inner.borrow();
                    let da: Vec<S> = grad
                        .iter()
                        .zip(&ad.data)
                        .map(|(&g, &x)| if x > S::zero() { g } else { S::zero() })
                        .collect();
                    drop(ad);
                    a.accumulate_grad(&da);
                }
            }
            Op::Sigmoid(a) => {
                if a.requires_grad() {
                    let out = self.inner.borrow();
                    let da: Vec<S> =
                        grad.iter().zip(&out.data).map(|(&g, &s)| g * s * (S::one() - s)).collect();
                    drop(out);
                    a.accumulate_grad(&da);
                }
            }
            Op::SumAll(a) => {
                if a.requires_grad() {
                    let n = a.numel();
                    a.accumulate_grad(&vec![grad[0]; n]);
                }
            }
            Op::ConcatChannels(parts) => {
                let mut offset = 0;
                for p in parts {
                    let n = p.numel();
                    if p.requires_grad() {
                        p.accumulate_grad(&grad[offset..offset + n]);
                    }
                    offset += n;
                }
            }
            Op::SliceChannel { input, channel } => {
                if input.requires_grad() {
                    let n = input.numel();
                    let hw = grad.len();
                    let mut da = vec![S::zero(); n];
                    da[channel * hw..(channel + 1) * hw].copy_from_slice(grad);
                    input.accumulate_grad(&da);
                }
            }
            Op::Conv2d { input, weights, bias, padding } => {
                conv::conv2d_backward(self, input, weights, bias, *padding, grad);
            }
            Op::MaxPool2 { input, argmax } => {
                if input.requires_grad() {
                    let mut da = vec![S::zero(); input.numel()];
                    for (&src, &g) in argmax.iter().zip(grad) {
                        da[src] += g;
                    }
                    input.accumulate_grad(&da);
                }
            }
            Op::AvgPoolDown { input, factor } => {
                conv::avgpool_down_backward(input, *factor, grad);
            }
            Op::Dense { input, weights, bias } => {
                conv::dense_backward(input, weights, bias, grad);
            }
            Op::Bce { prob, clamped, target } => {
                if prob.requires_grad() {
                    // dL/dp = (p - y) / (p (1 - p)), evaluated at the clamped
                    // probability so saturated outputs keep a finite pull.
                    let p = *clamped;
                    let d = (p - *target) / (p * (S::one() - p));
                    prob.accumulate_grad(&[grad[0] * d]);
                }
            }
        }
    }
}

/// Stack single- or multi-channel maps along the channel axis. All inputs
/// must share `H x W`; channel order is preserved.
pub fn concat_channels<S: Scalar>(parts: &[Tensor<S>]) -> Result<Tensor<S>> {
    if parts.is_empty() {
        return Err(Error::shape("concat_channels", "no inputs".to_string()));
    }
    let first = parts[0].shape();
    if first.len() != 3 {
        return Err(Error::shape(
            "concat_channels",
            format!("expected C x H x W inputs, got shape {:?}", first),
        ));
    }
    let (h, w) = (first[1], first[2]);
    let mut channels = 0;
    for (i, p) in parts.iter().enumerate() {
        let s = p.shape();
        if s.len() != 3 || s[1] != h || s[2] != w {
            return Err(Error::shape(
                "concat_channels",
                format!("input {} has shape {:?}, expected [_, {}, {}]", i, s, h, w),
            ));
        }
        channels += s[0];
    }
    let mut data = Vec::with_capacity(channels * h * w);
    for p in parts {
        data.extend_from_slice(&p.inner.borrow().data);
    }
    let rg = parts.iter().any(|p| p.requires_grad());
    Ok(Tensor::new(vec![channels, h, w], data, rg, Op::ConcatChannels(parts.to_vec())))
}

/// Binary cross-entropy of a scalar probability against a 0/1 target. The
/// probability is clamped to `[1e-7, 1 - 1e-7]` before the logs.
pub fn bce<S: Scalar>(prob: &Tensor<S>, target: S) -> Result<Tensor<S>> {
    if prob.numel() != 1 {
        return Err(Error::shape(
            "bce",
            format!("probability must be a scalar, got shape {:?}", prob.shape()),
        ));
    }
    let eps = S::of(1e-7);
    let p = prob.item()?.max(eps).min(S::one() - eps);
    let y = target;
    let loss = -(y * p.ln() + (S::one() - y) * (S::one() - p).ln());
    let rg = prob.requires_grad();
    Ok(Tensor::new(vec![1], vec![loss], rg, Op::Bce { prob: prob.clone(), clamped: p, target }))
}

#[cfg(test)]
mod tests {
    use super::*;

    type T = Tensor<f64>;

    #[test]
    fn leaf_rejects_bad_length() {
        assert!(T::leaf(&[2, 3], vec![0.0; 5], false).is_err());
    }

    #[test]
    fn add_rejects_shape_mismatch() {
        let a = T::zeros(&[2, 2], false);
        let b = T::zeros(&[4], false);
        let err = a.add(&b).unwrap_err();
        assert!(err.to_string().contains("[2, 2]"), "{err}");
    }

    #[test]
    fn sigmoid_at_zero() {
        let t = T::scalar(0.0).sigmoid();
        assert_eq!(t.item().unwrap(), 0.5);
    }

    #[test]
    fn concat_preserves_channel_order() {
        let a = T::full(&[1, 4, 4], 1.0, false);
        let b = T::full(&[2, 4, 4], 2.0, false);
        let c = concat_channels(&[a, b]).unwrap();
        assert_eq!(c.shape(), vec![3, 4, 4]);
        let d = c.to_vec();
        assert!(d[..16].iter().all(|&v| v == 1.0));
        assert!(d[16..].iter().all(|&v| v == 2.0));
    }

    #[test]
    fn backward_of_weighted_sum_is_input() {
        let w = T::leaf(&[3], vec![1.0, 2.0, 3.0], true).unwrap();
        let x = T::leaf(&[3], vec![4.0, 5.0, 6.0], false).unwrap();
        let loss = w.mul(&x).unwrap().sum_all();
        loss.backward().unwrap();
        assert_eq!(w.grad().unwrap(), vec![4.0, 5.0, 6.0]);
        assert!(x.grad().is_none());
    }

    #[test]
    fn backward_at_minimum_is_zero() {
        let a = T::leaf(&[4], vec![1.0, -2.0, 0.5, 3.0], true).unwrap();
        let b = T::leaf(&[4], vec![1.0, -2.0, 0.5, 3.0], true).unwrap();
        let d = a.sub(&b).unwrap();
        let loss = d.mul(&d).unwrap().sum_all();
        loss.backward().unwrap();
        assert!(a.grad().unwrap().iter().all(|&g| g == 0.0));
        assert!(b.grad().unwrap().iter().all(|&g| g == 0.0));
    }

    #[test]
    fn backward_rejects_non_scalar() {
        let a = T::leaf(&[2], vec![1.0, 2.0], true).unwrap();
        let b = a.scale(2.0);
        assert!(b.backward().is_err());
    }

    #[test]
    fn backward_rejects_consumed_graph() {
        let a = T::leaf(&[2], vec![1.0, 2.0], true).unwrap();
        let loss = a.sum_all();
        loss.backward().unwrap();
        assert!(loss.backward().is_err());
    }

    #[test]
    fn grads_accumulate_across_backwards() {
        let w = T::leaf(&[2], vec![1.0, 1.0], true).unwrap();
        w.scale(2.0).sum_all().backward().unwrap();
        w.scale(2.0).sum_all().backward().unwrap();
        assert_eq!(w.grad().unwrap(), vec![4.0, 4.0]);
    }

    #[test]
    fn shared_operand_gets_both_contributions() {
        // loss = sum(a * a) => dloss/da = 2a
        let a = T::leaf(&[3], vec![1.0, 2.0, 3.0], true).unwrap();
        a.mul(&a).unwrap().sum_all().backward().unwrap();
        assert_eq!(a.grad().unwrap(), vec![2.0, 4.0, 6.0]);
    }

    #[test]
    fn bce_matches_hand_values() {
        let p = T::leaf(&[1], vec![0.5], true).unwrap();
        let l = bce(&p, 1.0).unwrap();
        assert!((l.item().unwrap() - std::f64::consts::LN_2).abs() < 1e-12);

        let p = T::leaf(&[1], vec![0.999_999], true).unwrap();
        let l = bce(&p, 1.0).unwrap();
        assert!(l.item().unwrap() < 1e-5);

        // Saturated input stays finite thanks to the clamp.
        let p = T::leaf(&[1], vec![0.0], true).unwrap();
        let l = bce(&p, 1.0).unwrap();
        assert!(l.item().unwrap().is_finite());
        l.backward().unwrap();
        assert!(p.grad().unwrap()[0].is_finite());
    }

    #[test]
    fn slice_channel_roundtrip() {
        let data: Vec<f64> = (0..12).map(|v| v as f64).collect();
        let t = T::leaf(&[3, 2, 2], data, true).unwrap();
        let c1 = t.slice_channel(1).unwrap();
        assert_eq!(c1.to_vec(), vec![4.0, 5.0, 6.0, 7.0]);
        c1.sum_all().backward().unwrap();
        let g = t.grad().unwrap();
        assert_eq!(g, vec![0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
    }
}
