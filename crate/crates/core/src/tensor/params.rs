//! Named parameter collections.
//!
//! A model is a flat, ordered list of named leaf tensors. The order is the
//! registration order and is part of the model's identity: checkpoints,
//! optimizer state and gradient checks all index into it.

use super::Tensor;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug)]
pub struct ModelParams<S: Scalar> {
    entries: Vec<(String, Tensor<S>)>,
}

impl<S: Scalar> Default for ModelParams<S> {
    fn default() -> Self {
        Self::new()
    }
}

impl<S: Scalar> ModelParams<S> {
    pub fn new() -> Self {
        ModelParams { entries: Vec::new() }
    }

    /// Register a parameter. Names must be unique; the tensor is flipped to
    /// `requires_grad` if it is not already.
    pub fn register(&mut self, name: impl Into<String>, tensor: Tensor<S>) -> Result<()> {
        let name = name.into();
        if self.entries.iter().any(|(n, _)| *n == name) {
            return Err(Error::InvalidData(format!("duplicate parameter name: {name}")));
        }
        self.entries.push((name, tensor));
        Ok(())
    }

    /// Absorb another collection, prefixing every name with `prefix.`.
    pub fn adopt(&mut self, prefix: &str, other: ModelParams<S>) -> Result<()> {
        for (name, t) in other.entries {
            self.register(format!("{prefix}.{name}"), t)?;
        }
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&Tensor<S>> {
        self.entries.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Tensor<S>)> {
        self.entries.iter().map(|(n, t)| (n.as_str(), t))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Total number of scalar parameters.
    pub fn numel(&self) -> usize {
        self.entries.iter().map(|(_, t)| t.numel()).sum()
    }

    pub fn zero_grads(&self) {
        for (_, t) in &self.entries {
            t.zero_grad();
        }
    }

    /// Copy parameter values from another collection with identical names
    /// and shapes (used to move checkpoints between precisions and to
    /// restore snapshots).
    pub fn copy_values_from(&self, other: &ModelParams<S>) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::InvalidData(format!(
                "parameter count mismatch: {} vs {}",
                self.len(),
                other.len()
            )));
        }
        for ((na, ta), (nb, tb)) in self.entries.iter().zip(&other.entries) {
            if na != nb {
                return Err(Error::InvalidData(format!("parameter name mismatch: {na} vs {nb}")));
            }
            ta.set_data(&tb.to_vec())?;
        }
        Ok(())
    }

    /// Deep copy: fresh leaf tensors with the same names, shapes and values.
    pub fn snapshot(&self) -> ModelParams<S> {
        let entries = self
            .entries
            .iter()
            .map(|(n, t)| {
                let copy = Tensor::leaf(&t.shape(), t.to_vec(), true)
                    .expect("snapshot of a valid tensor cannot fail");
                (n.clone(), copy)
            })
            .collect();
        ModelParams { entries }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn register_rejects_duplicates() {
        let mut p: ModelParams<f32> = ModelParams::new();
        p.register("w", Tensor::zeros(&[2], true)).unwrap();
        assert!(p.register("w", Tensor::zeros(&[2], true)).is_err());
    }

    #[test]
    fn adopt_prefixes_names() {
        let mut inner: ModelParams<f32> = ModelParams::new();
        inner.register("w", Tensor::zeros(&[2], true)).unwrap();
        let mut outer = ModelParams::new();
        outer.adopt("block", inner).unwrap();
        assert!(outer.get("block.w").is_some());
    }

    #[test]
    fn snapshot_is_independent() {
        let mut p: ModelParams<f64> = ModelParams::new();
        p.register("w", Tensor::leaf(&[2], vec![1.0, 2.0], true).unwrap()).unwrap();
        let snap = p.snapshot();
        p.get("w").unwrap().set_data(&[9.0, 9.0]).unwrap();
        assert_eq!(snap.get("w").unwrap().to_vec(), vec![1.0, 2.0]);
        p.copy_values_from(&snap).unwrap();
        assert_eq!(p.get("w").unwrap().to_vec(), vec![1.0, 2.0]);
    }
}
