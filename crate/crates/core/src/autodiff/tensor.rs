use std::cell::RefCell;
use std::collections::HashSet;
use std::rc::Rc;

use crate::error::{Error, Result};
use crate::Scalar;

/// Per-parent gradient contribution: given the output gradient, produce one
/// gradient buffer per parent (same shapes as the parents).
pub(crate) type BackwardFn<F> = Box<dyn Fn(&[F]) -> Vec<Vec<F>>>;

pub(crate) struct Inner<F: Scalar> {
    pub shape: Vec<usize>,
    pub data: Vec<F>,
    pub grad: Option<Vec<F>>,
    pub requires_grad: bool,
    pub parents: Vec<Tensor<F>>,
    pub backward_fn: Option<BackwardFn<F>>,
}

/// Dense row-major tensor participating in reverse-mode differentiation.
///
/// Cloning is cheap (shared handle). A tensor without recorded history and
/// with `requires_grad == false` is a plain immutable value.
pub struct Tensor<F: Scalar> {
    pub(crate) inner: Rc<RefCell<Inner<F>>>,
}

impl<F: Scalar> Clone for Tensor<F> {
    fn clone(&self) -> Self {
        Tensor {
            inner: Rc::clone(&self.inner),
        }
    }
}

impl<F: Scalar> std::fmt::Debug for Tensor<F> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let inner = self.inner.borrow();
        f.debug_struct("Tensor")
            .field("shape", &inner.shape)
            .field("requires_grad", &inner.requires_grad)
            .finish()
    }
}

impl<F: Scalar> Tensor<F> {
    fn from_inner(inner: Inner<F>) -> Self {
        Tensor {
            inner: Rc::new(RefCell::new(inner)),
        }
    }

    /// Constant tensor (not tracked).
    pub fn from_vec(shape: Vec<usize>, data: Vec<F>) -> Result<Self> {
        let numel: usize = shape.iter().product();
        if numel != data.len() || shape.contains(&0) {
            return Err(Error::InvalidShape {
                op: "from_vec",
                shape,
                reason: format!("extent product must equal data length {}", data.len()),
            });
        }
        Ok(Tensor::from_inner(Inner {
            shape,
            data,
            grad: None,
            requires_grad: false,
            parents: Vec::new(),
            backward_fn: None,
        }))
    }

    /// Trainable parameter (leaf that accumulates gradients).
    pub fn param(shape: Vec<usize>, data: Vec<F>) -> Result<Self> {
        let t = Tensor::from_vec(shape, data)?;
        t.inner.borrow_mut().requires_grad = true;
        Ok(t)
    }

    pub fn zeros(shape: Vec<usize>) -> Self {
        let numel: usize = shape.iter().product();
        Tensor::from_inner(Inner {
            shape,
            data: vec![F::zero(); numel],
            grad: None,
            requires_grad: false,
            parents: Vec::new(),
            backward_fn: None,
        })
    }

    pub fn scalar(value: F) -> Self {
        Tensor::from_inner(Inner {
            shape: vec![],
            data: vec![value],
            grad: None,
            requires_grad: false,
            parents: Vec::new(),
            backward_fn: None,
        })
    }

    pub(crate) fn from_op(
        shape: Vec<usize>,
        data: Vec<F>,
        parents: Vec<Tensor<F>>,
        backward_fn: BackwardFn<F>,
    ) -> Self {
        let tracked = parents.iter().any(|p| p.is_tracked());
        Tensor::from_inner(Inner {
            shape,
            data,
            grad: None,
            requires_grad: false,
            parents: if tracked { parents } else { Vec::new() },
            backward_fn: if tracked { Some(backward_fn) } else { None },
        })
    }

    pub fn shape(&self) -> Vec<usize> {
        self.inner.borrow().shape.clone()
    }

    pub fn numel(&self) -> usize {
        self.inner.borrow().data.len()
    }

    pub fn data(&self) -> Vec<F> {
        self.inner.borrow().data.clone()
    }

    /// The single value of a one-element tensor.
    pub fn item(&self) -> F {
        let inner = self.inner.borrow();
        debug_assert_eq!(inner.data.len(), 1, "item() on non-scalar");
        inner.data[0]
    }

    pub fn requires_grad(&self) -> bool {
        self.inner.borrow().requires_grad
    }

    pub fn set_requires_grad(&self, flag: bool) {
        self.inner.borrow_mut().requires_grad = flag;
    }

    /// Accumulated gradient, if backward reached this tensor.
    pub fn grad(&self) -> Option<Vec<F>> {
        self.inner.borrow().grad.clone()
    }

    pub fn zero_grad(&self) {
        self.inner.borrow_mut().grad = None;
    }

    /// Overwrites the stored values in place (used by the optimizer).
    pub fn set_data(&self, data: Vec<F>) {
        let mut inner = self.inner.borrow_mut();
        debug_assert_eq!(inner.data.len(), data.len());
        inner.data = data;
    }

    pub fn is_tracked(&self) -> bool {
        let inner = self.inner.borrow();
        inner.requires_grad || inner.backward_fn.is_some()
    }

    pub fn all_finite(&self) -> bool {
        self.inner.borrow().data.iter().all(|v| v.is_finite())
    }

    fn node_id(&self) -> usize {
        Rc::as_ptr(&self.inner) as usize
    }

    /// Reverse-mode backward pass from a scalar loss.
    ///
    /// Gradients accumulate (`+=`) into every tracked tensor reachable from
    /// this one. Tensors the loss does not depend on keep `grad = None`.
    pub fn backward(&self) -> Result<()> {
        {
            let inner = self.inner.borrow();
            if inner.data.len() != 1 {
                return Err(Error::NonScalarLoss(inner.shape.clone()));
            }
        }

        // Topological order via iterative post-order DFS.
        let mut order: Vec<Tensor<F>> = Vec::new();
        let mut visited: HashSet<usize> = HashSet::new();
        let mut stack: Vec<(Tensor<F>, bool)> = vec![(self.clone(), false)];
        while let Some((node, expanded)) = stack.pop() {
            if expanded {
                order.push(node);
                continue;
            }
            if !visited.insert(node.node_id()) {
                continue;
            }
            stack.push((node.clone(), true));
            for parent in node.inner.borrow().parents.iter() {
                if !visited.contains(&parent.node_id()) && parent.is_tracked() {
                    stack.push((parent.clone(), false));
                }
            }
        }

        {
            let mut inner = self.inner.borrow_mut();
            inner.grad = Some(vec![F::one()]);
        }

        for node in order.iter().rev() {
            let (out_grad, parents) = {
                let inner = node.inner.borrow();
                if inner.backward_fn.is_none() {
                    continue;
                }
                match &inner.grad {
                    Some(g) => (g.clone(), inner.parents.clone()),
                    None => continue,
                }
            };
            let contributions = {
                let inner = node.inner.borrow();
                (inner.backward_fn.as_ref().unwrap())(&out_grad)
            };
            debug_assert_eq!(contributions.len(), parents.len());
            for (parent, contrib) in parents.iter().zip(contributions) {
                if !parent.is_tracked() {
                    continue;
                }
                let mut pi = parent.inner.borrow_mut();
                debug_assert_eq!(contrib.len(), pi.data.len());
                match &mut pi.grad {
                    Some(g) => {
                        for (gi, ci) in g.iter_mut().zip(&contrib) {
                            *gi = *gi + *ci;
                        }
                    }
                    None => pi.grad = Some(contrib),
                }
            }
        }
        Ok(())
    }
}
