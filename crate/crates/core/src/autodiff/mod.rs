//! Reverse-mode automatic differentiation over dense real tensors.
//!
//! Operations record themselves into a computation graph as they run; calling
//! [`Tensor::backward`] on a scalar walks the graph in reverse topological
//! order and accumulates gradients into every reachable tensor that requires
//! them. The graph is rebuilt on every forward pass and is confined to one
//! thread. Parameters unreachable from the loss keep `grad = None`.

mod adam;
mod ops;
mod tensor;

pub use adam::{Adam, AdamState};
pub use tensor::Tensor;
