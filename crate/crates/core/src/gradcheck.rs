//! Finite-difference gradient verification.
//!
//! The independent oracle for every analytic gradient in the crate: a
//! central difference `(f(x + h) - f(x - h)) / 2h` evaluated through the
//! same forward code, compared coordinate by coordinate against what
//! backward produced. Checks run per tensor, either exhaustively or on a
//! deterministic sample of coordinates for large parameter blocks.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::{ModelParams, Tensor};

/// Outcome of one coordinate comparison, kept for failure messages.
#[derive(Debug)]
pub struct Mismatch {
    pub param: String,
    pub index: usize,
    pub analytic: f64,
    pub numeric: f64,
    pub rel_err: f64,
}

/// Relative error with an absolute floor: `|a - n| / max(|a|, |n|, floor)`.
/// The floor stops near-zero gradients from inflating the ratio.
pub fn rel_err(analytic: f64, numeric: f64, floor: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(floor)
}

/// Check the gradient of `loss_fn` (a full forward pass returning a scalar
/// loss) with respect to every coordinate in `indices` of parameter `name`.
///
/// `loss_fn` is called repeatedly with perturbed parameter values; it must
/// be a pure function of the current parameter data. `h` is the central
/// difference step; `tol` the maximum allowed relative error (floor 1e-4
/// on the denominator).
pub fn check_param<S, F>(
    params: &ModelParams<S>,
    name: &str,
    indices: &[usize],
    h: f64,
    tol: f64,
    mut loss_fn: F,
) -> Result<()>
where
    S: Scalar,
    F: FnMut(&ModelParams<S>) -> Result<Tensor<S>>,
{
    let tensor = params
        .get(name)
        .ok_or_else(|| Error::InvalidData(format!("no parameter named {name}")))?;

    // Analytic pass.
    params.zero_grads();
    let loss = loss_fn(params)?;
    loss.backward()?;
    let analytic = tensor
        .grad()
        .ok_or_else(|| Error::Training(format!("parameter {name} received no gradient")))?;

    let baseline = tensor.to_vec();
    let mut worst: Option<Mismatch> = None;

    for &i in indices {
        if i >= baseline.len() {
            return Err(Error::InvalidData(format!(
                "index {i} out of range for parameter {name} ({} elements)",
                baseline.len()
            )));
        }
        let mut probe = baseline.clone();
        probe[i] = baseline[i] + S::of(h);
        tensor.set_data(&probe)?;
        let up = loss_fn(params)?.item()?.as_f64();

        probe[i] = baseline[i] - S::of(h);
        tensor.set_data(&probe)?;
        let down = loss_fn(params)?.item()?.as_f64();

        tensor.set_data(&baseline)?;

        let numeric = (up - down) / (2.0 * h);
        let a = analytic[i].as_f64();
        let e = rel_err(a, numeric, 1e-4);
        if e > tol {
            let m = Mismatch { param: name.to_string(), index: i, analytic: a, numeric, rel_err: e };
            if worst.as_ref().map_or(true, |w| m.rel_err > w.rel_err) {
                worst = Some(m);
            }
        }
    }
    params.zero_grads();

    match worst {
        None => Ok(()),
        Some(m) => Err(Error::Training(format!(
            "gradient mismatch in {}[{}]: analytic {:.6e}, numeric {:.6e}, rel err {:.3e} > {:.1e}",
            m.param, m.index, m.analytic, m.numeric, m.rel_err, tol
        ))),
    }
}

/// Deterministic coordinate sample: `count` indices spread evenly over
/// `len`, plus an odd stride offset from `salt` so repeated checks of the
/// same tensor do not always probe the same cells.
pub fn sample_indices(len: usize, count: usize, salt: u64) -> Vec<usize> {
    if len <= count {
        return (0..len).collect();
    }
    let stride = len / count;
    let offset = (salt as usize) % stride.max(1);
    (0..count).map(|i| (i * stride + offset) % len).collect()
}

/// Check every parameter of a model on a coordinate sample. `per_param` is
/// the number of coordinates probed in each tensor.
pub fn check_all_params<S, F>(
    params: &ModelParams<S>,
    per_param: usize,
    h: f64,
    tol: f64,
    salt: u64,
    mut loss_fn: F,
) -> Result<()>
where
    S: Scalar,
    F: FnMut(&ModelParams<S>) -> Result<Tensor<S>>,
{
    let names: Vec<String> = params.iter().map(|(n, _)| n.to_string()).collect();
    for (k, name) in names.iter().enumerate() {
        let len = params.get(name).unwrap().numel();
        let indices = sample_indices(len, per_param, salt.wrapping_add(k as u64));
        check_param(params, name, &indices, h, tol, &mut loss_fn)?;
    }
    Ok(())
}
