//! Categorized crowd counting: sitting and standing people are counted
//! separately from images, via category-aware density maps.
//!
//! The pipeline has three phases. Phase 1 classifies detected persons as
//! sitting or standing from body keypoints and renders per-category basic
//! density maps. Phase 2 trains a crowd regression network and fuses its
//! output with a detection-derived attention mask. Phase 3 splits the
//! fused crowd estimate into the two categories with bi-channel attention
//! branches connected by cross subtraction. Everything runs on a small
//! reverse-mode autodiff core; the scalar type is generic so the whole
//! pipeline can be instantiated in f64 for verification.

pub mod density;
pub mod error;
pub mod gradcheck;
pub mod scalar;
pub mod tensor;

pub use density::{Category, DensityMap, PersonAnnotation};
pub use error::{Error, Result};
pub use scalar::Scalar;
pub use tensor::{concat_channels, AdamState, ModelParams, Tensor};
