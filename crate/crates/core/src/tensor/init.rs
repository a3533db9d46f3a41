//! Seeded parameter initialization.
//!
//! Weights draw from a uniform distribution scaled by fan-in, the usual
//! recipe for ReLU/sigmoid stacks of this depth; biases start at zero.
//! Random numbers map from raw generator output by a fixed bit recipe, so
//! initialization is a pure function of the seed stream and survives RNG
//! crate upgrades.

use super::Tensor;
use crate::scalar::Scalar;
use rand::RngCore;

/// Uniform sample in `[-limit, limit)` from the top 53 bits of `next_u64`.
fn draw(rng: &mut impl RngCore, limit: f64) -> f64 {
    let unit = (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
    (2.0 * unit - 1.0) * limit
}

/// Leaf tensor with entries uniform in `[-limit, limit)`.
pub fn uniform<S: Scalar>(rng: &mut impl RngCore, shape: &[usize], limit: f64) -> Tensor<S> {
    let numel: usize = shape.iter().product();
    let data: Vec<S> = (0..numel).map(|_| S::of(draw(rng, limit))).collect();
    Tensor::leaf(shape, data, true).expect("constructed data length matches shape")
}

/// Convolution weights `C_out x C_in x K x K` with limit `1/sqrt(fan_in)`.
pub fn conv_weights<S: Scalar>(rng: &mut impl RngCore, c_out: usize, c_in: usize, k: usize) -> Tensor<S> {
    let fan_in = (c_in * k * k) as f64;
    uniform(rng, &[c_out, c_in, k, k], 1.0 / fan_in.sqrt())
}

/// Dense weights `M x N` with limit `1/sqrt(N)`.
pub fn dense_weights<S: Scalar>(rng: &mut impl RngCore, m: usize, n: usize) -> Tensor<S> {
    uniform(rng, &[m, n], 1.0 / (n as f64).sqrt())
}

pub fn zero_bias<S: Scalar>(n: usize) -> Tensor<S> {
    Tensor::zeros(&[n], true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn same_seed_same_weights() {
        let a: Tensor<f32> = conv_weights(&mut ChaCha8Rng::seed_from_u64(7), 4, 3, 5);
        let b: Tensor<f32> = conv_weights(&mut ChaCha8Rng::seed_from_u64(7), 4, 3, 5);
        assert_eq!(a.to_vec(), b.to_vec());
    }

    #[test]
    fn different_seed_different_weights() {
        let a: Tensor<f32> = conv_weights(&mut ChaCha8Rng::seed_from_u64(7), 4, 3, 5);
        let b: Tensor<f32> = conv_weights(&mut ChaCha8Rng::seed_from_u64(8), 4, 3, 5);
        assert_ne!(a.to_vec(), b.to_vec());
    }

    #[test]
    fn values_respect_fan_in_limit() {
        let w: Tensor<f64> = conv_weights(&mut ChaCha8Rng::seed_from_u64(1), 8, 4, 3);
        let limit = 1.0 / ((4.0 * 9.0) as f64).sqrt();
        assert!(w.to_vec().iter().all(|&v| v.abs() <= limit));
        // and the draw actually spreads out
        let spread = w.to_vec().iter().map(|v| v.abs()).fold(0.0, f64::max);
        assert!(spread > limit * 0.5);
    }
}
