//! One-class knowledge distillation for spoofed-speech detection.
//!
//! A binary teacher encoder is trained on bonafide and spoofed speech; a
//! depth-compressed student is then distilled on bonafide speech only,
//! matching the frozen teacher's intermediate and backend embeddings with
//! combined cosine + MSE losses. At inference an utterance is scored by the
//! teacher-student embedding similarity, and detection quality is measured
//! with the equal error rate.
//!
//! Core math is generic over the scalar type; the crate root exports `f64`
//! aliases, which the pipeline and all tooling use.

pub mod autodiff;
pub mod checkpoint;
pub mod corpus;
pub mod distill;
pub mod error;
pub mod eval;
pub mod models;
pub mod rng;

pub use error::{Error, Result};

use std::fmt::{Debug, Display};

/// Floating-point scalar usable as tensor element type.
pub trait Scalar:
    num_traits::Float + num_traits::FromPrimitive + Debug + Display + Default + 'static
{
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Default 64-bit instantiations; the whole pipeline runs in f64 so that
/// gradient checks stay reliable at desk scale.
pub type Tensor = autodiff::Tensor<f64>;
pub type Adam = autodiff::Adam<f64>;
pub type AdamState = autodiff::AdamState<f64>;
pub type Encoder = models::Encoder<f64>;
pub type HiddenStack = models::HiddenStack<f64>;
