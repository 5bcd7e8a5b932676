//! Forward ops and their backward rules.
//!
//! Every op validates shapes, computes the forward value, and (when any
//! input is tracked) records a closure producing per-parent gradient
//! contributions from the output gradient. Closures capture plain copies of
//! whatever forward data they need, never tensor handles.

use crate::error::{Error, Result};
use crate::Scalar;

use super::tensor::Tensor;

fn k<F: Scalar>(x: f64) -> F {
    F::from(x).expect("constant not representable in scalar type")
}

fn same_shape<F: Scalar>(op: &'static str, a: &Tensor<F>, b: &Tensor<F>) -> Result<Vec<usize>> {
    let sa = a.shape();
    let sb = b.shape();
    if sa != sb {
        return Err(Error::ShapeMismatch {
            op,
            lhs: sa,
            rhs: sb,
        });
    }
    Ok(sa)
}

/// Splits `shape` into (rows, row_len) treating the last axis as features.
fn rows_of(shape: &[usize]) -> (usize, usize) {
    let d = *shape.last().unwrap_or(&1);
    let rows = shape.iter().product::<usize>() / d.max(1);
    (rows, d)
}

// ── elementwise ──────────────────────────────────────────────────────

impl<F: Scalar> Tensor<F> {
    pub fn add(&self, other: &Tensor<F>) -> Result<Tensor<F>> {
        let shape = same_shape("add", self, other)?;
        let a = self.data();
        let b = other.data();
        let out: Vec<F> = a.iter().zip(&b).map(|(x, y)| *x + *y).collect();
        Ok(Tensor::from_op(
            shape,
            out,
            vec![self.clone(), other.clone()],
            Box::new(move |g| vec![g.to_vec(), g.to_vec()]),
        ))
    }

    pub fn sub(&self, other: &Tensor<F>) -> Result<Tensor<F>> {
        let shape = same_shape("sub", self, other)?;
        let a = self.data();
        let b = other.data();
        let out: Vec<F> = a.iter().zip(&b).map(|(x, y)| *x - *y).collect();
        Ok(Tensor::from_op(
            shape,
            out,
            vec![self.clone(), other.clone()],
            Box::new(move |g| vec![g.to_vec(), g.iter().map(|v| -*v).collect()]),
        ))
    }

    pub fn mul(&self, other: &Tensor<F>) -> Result<Tensor<F>> {
        let shape = same_shape("mul", self, other)?;
        let a = self.data();
        let b = other.data();
        let out: Vec<F> = a.iter().zip(&b).map(|(x, y)| *x * *y).collect();
        let (ac, bc) = (a, b);
        Ok(Tensor::from_op(
            shape,
            out,
            vec![self.clone(), other.clone()],
            Box::new(move |g| {
                vec![
                    g.iter().zip(&bc).map(|(gi, y)| *gi * *y).collect(),
                    g.iter().zip(&ac).map(|(gi, x)| *gi * *x).collect(),
                ]
            }),
        ))
    }

    pub fn div(&self, other: &Tensor<F>) -> Result<Tensor<F>> {
        let shape = same_shape("div", self, other)?;
        let a = self.data();
        let b = other.data();
        let out: Vec<F> = a.iter().zip(&b).map(|(x, y)| *x / *y).collect();
        let (ac, bc) = (a, b);
        Ok(Tensor::from_op(
            shape,
            out,
            vec![self.clone(), other.clone()],
            Box::new(move |g| {
                let da = g.iter().zip(&bc).map(|(gi, y)| *gi / *y).collect();
                let db = g
                    .iter()
                    .zip(ac.iter().zip(&bc))
                    .map(|(gi, (x, y))| -*gi * *x / (*y * *y))
                    .collect();
                vec![da, db]
            }),
        ))
    }

    pub fn scalar_mul(&self, c: F) -> Tensor<F> {
        let out: Vec<F> = self.data().iter().map(|x| *x * c).collect();
        Tensor::from_op(
            self.shape(),
            out,
            vec![self.clone()],
            Box::new(move |g| vec![g.iter().map(|gi| *gi * c).collect()]),
        )
    }

    /// Adds a length-d bias vector to every row of a `[..., d]` tensor.
    pub fn add_row(&self, bias: &Tensor<F>) -> Result<Tensor<F>> {
        let shape = self.shape();
        let bshape = bias.shape();
        let (rows, d) = rows_of(&shape);
        if bshape != vec![d] {
            return Err(Error::ShapeMismatch {
                op: "add_row",
                lhs: shape,
                rhs: bshape,
            });
        }
        let a = self.data();
        let b = bias.data();
        let mut out = vec![F::zero(); rows * d];
        for r in 0..rows {
            for j in 0..d {
                out[r * d + j] = a[r * d + j] + b[j];
            }
        }
        Ok(Tensor::from_op(
            shape,
            out,
            vec![self.clone(), bias.clone()],
            Box::new(move |g| {
                let mut db = vec![F::zero(); d];
                for r in 0..rows {
                    for j in 0..d {
                        db[j] = db[j] + g[r * d + j];
                    }
                }
                vec![g.to_vec(), db]
            }),
        ))
    }

    pub fn square(&self) -> Tensor<F> {
        let a = self.data();
        let out: Vec<F> = a.iter().map(|x| *x * *x).collect();
        Tensor::from_op(
            self.shape(),
            out,
            vec![self.clone()],
            Box::new(move |g| {
                vec![g
                    .iter()
                    .zip(&a)
                    .map(|(gi, x)| *gi * (*x + *x))
                    .collect()]
            }),
        )
    }

    pub fn sqrt_elem(&self) -> Tensor<F> {
        let out: Vec<F> = self.data().iter().map(|x| x.sqrt()).collect();
        let oc = out.clone();
        Tensor::from_op(
            self.shape(),
            out,
            vec![self.clone()],
            Box::new(move |g| {
                vec![g
                    .iter()
                    .zip(&oc)
                    .map(|(gi, s)| *gi / (*s + *s))
                    .collect()]
            }),
        )
    }

    pub fn relu(&self) -> Tensor<F> {
        let a = self.data();
        let out: Vec<F> = a.iter().map(|x| x.max(F::zero())).collect();
        Tensor::from_op(
            self.shape(),
            out,
            vec![self.clone()],
            Box::new(move |g| {
                vec![g
                    .iter()
                    .zip(&a)
                    .map(|(gi, x)| if *x > F::zero() { *gi } else { F::zero() })
                    .collect()]
            }),
        )
    }

    /// GELU, tanh approximation: 0.5·x·(1 + tanh(√(2/π)·(x + 0.044715·x³))).
    pub fn gelu(&self) -> Tensor<F> {
        let c0: F = k((2.0 / std::f64::consts::PI).sqrt());
        let c1: F = k(0.044715);
        let half: F = k(0.5);
        let a = self.data();
        let out: Vec<F> = a
            .iter()
            .map(|&x| half * x * (F::one() + (c0 * (x + c1 * x * x * x)).tanh()))
            .collect();
        Tensor::from_op(
            self.shape(),
            out,
            vec![self.clone()],
            Box::new(move |g| {
                let three: F = k(3.0);
                vec![g
                    .iter()
                    .zip(&a)
                    .map(|(gi, &x)| {
                        let u = c0 * (x + c1 * x * x * x);
                        let t = u.tanh();
                        let du = c0 * (F::one() + three * c1 * x * x);
                        let d = half * (F::one() + t) + half * x * (F::one() - t * t) * du;
                        *gi * d
                    })
                    .collect()]
            }),
        )
    }
}

// ── matmul / transpose / reshape / concat ────────────────────────────

impl<F: Scalar> Tensor<F> {
    /// 2-D matrix product: `[m,k] @ [k,n] -> [m,n]`.
    pub fn matmul(&self, other: &Tensor<F>) -> Result<Tensor<F>> {
        let sa = self.shape();
        let sb = other.shape();
        if sa.len() != 2 || sb.len() != 2 || sa[1] != sb[0] {
            return Err(Error::ShapeMismatch {
                op: "matmul",
                lhs: sa,
                rhs: sb,
            });
        }
        let (m, kk, n) = (sa[0], sa[1], sb[1]);
        let a = self.data();
        let b = other.data();
        let mut out = vec![F::zero(); m * n];
        for i in 0..m {
            for p in 0..kk {
                let aip = a[i * kk + p];
                let brow = &b[p * n..(p + 1) * n];
                let orow = &mut out[i * n..(i + 1) * n];
                for j in 0..n {
                    orow[j] = orow[j] + aip * brow[j];
                }
            }
        }
        let (ac, bc) = (a, b);
        Ok(Tensor::from_op(
            vec![m, n],
            out,
            vec![self.clone(), other.clone()],
            Box::new(move |g| {
                // dA = G·Bᵀ, dB = Aᵀ·G
                let mut da = vec![F::zero(); m * kk];
                for i in 0..m {
                    for p in 0..kk {
                        let mut s = F::zero();
                        let grow = &g[i * n..(i + 1) * n];
                        let brow = &bc[p * n..(p + 1) * n];
                        for j in 0..n {
                            s = s + grow[j] * brow[j];
                        }
                        da[i * kk + p] = s;
                    }
                }
                let mut db = vec![F::zero(); kk * n];
                for i in 0..m {
                    for p in 0..kk {
                        let aip = ac[i * kk + p];
                        let grow = &g[i * n..(i + 1) * n];
                        let drow = &mut db[p * n..(p + 1) * n];
                        for j in 0..n {
                            drow[j] = drow[j] + aip * grow[j];
                        }
                    }
                }
                vec![da, db]
            }),
        ))
    }

    /// Transpose of the last two axes.
    pub fn transpose2(&self) -> Result<Tensor<F>> {
        let shape = self.shape();
        if shape.len() < 2 {
            return Err(Error::InvalidShape {
                op: "transpose2",
                shape,
                reason: "rank must be at least 2".into(),
            });
        }
        let n_axes = shape.len();
        let (m, n) = (shape[n_axes - 2], shape[n_axes - 1]);
        let batch: usize = shape[..n_axes - 2].iter().product();
        let a = self.data();
        let mut out = vec![F::zero(); a.len()];
        for bi in 0..batch {
            let base = bi * m * n;
            for i in 0..m {
                for j in 0..n {
                    out[base + j * m + i] = a[base + i * n + j];
                }
            }
        }
        let mut new_shape = shape.clone();
        new_shape[n_axes - 2] = n;
        new_shape[n_axes - 1] = m;
        Ok(Tensor::from_op(
            new_shape,
            out,
            vec![self.clone()],
            Box::new(move |g| {
                let mut dg = vec![F::zero(); g.len()];
                for bi in 0..batch {
                    let base = bi * m * n;
                    for i in 0..m {
                        for j in 0..n {
                            dg[base + i * n + j] = g[base + j * m + i];
                        }
                    }
                }
                vec![dg]
            }),
        ))
    }

    pub fn reshape(&self, new_shape: Vec<usize>) -> Result<Tensor<F>> {
        let numel: usize = new_shape.iter().product();
        if numel != self.numel() {
            return Err(Error::InvalidShape {
                op: "reshape",
                shape: new_shape,
                reason: format!("element count must stay {}", self.numel()),
            });
        }
        Ok(Tensor::from_op(
            new_shape,
            self.data(),
            vec![self.clone()],
            Box::new(move |g| vec![g.to_vec()]),
        ))
    }

    /// Concatenates tensors along `axis`; all other extents must agree.
    pub fn concat(parts: &[Tensor<F>], axis: usize) -> Result<Tensor<F>> {
        if parts.is_empty() {
            return Err(Error::InvalidShape {
                op: "concat",
                shape: vec![],
                reason: "no tensors to concatenate".into(),
            });
        }
        let first = parts[0].shape();
        if axis >= first.len() {
            return Err(Error::InvalidShape {
                op: "concat",
                shape: first,
                reason: format!("axis {axis} out of range"),
            });
        }
        let mut axis_total = 0usize;
        for p in parts {
            let s = p.shape();
            if s.len() != first.len()
                || s.iter()
                    .zip(&first)
                    .enumerate()
                    .any(|(i, (a, b))| i != axis && a != b)
            {
                return Err(Error::ShapeMismatch {
                    op: "concat",
                    lhs: first,
                    rhs: s,
                });
            }
            axis_total += s[axis];
        }
        let outer: usize = first[..axis].iter().product();
        let inner: usize = first[axis + 1..].iter().product();
        let mut out_shape = first.clone();
        out_shape[axis] = axis_total;

        let part_lens: Vec<usize> = parts.iter().map(|p| p.shape()[axis]).collect();
        let datas: Vec<Vec<F>> = parts.iter().map(|p| p.data()).collect();
        let mut out = Vec::with_capacity(outer * axis_total * inner);
        for o in 0..outer {
            for (pi, data) in datas.iter().enumerate() {
                let block = part_lens[pi] * inner;
                out.extend_from_slice(&data[o * block..(o + 1) * block]);
            }
        }
        let lens = part_lens.clone();
        Ok(Tensor::from_op(
            out_shape,
            out,
            parts.to_vec(),
            Box::new(move |g| {
                let mut grads: Vec<Vec<F>> = lens
                    .iter()
                    .map(|l| Vec::with_capacity(outer * l * inner))
                    .collect();
                let mut cursor = 0usize;
                for _o in 0..outer {
                    for (pi, l) in lens.iter().enumerate() {
                        let block = l * inner;
                        grads[pi].extend_from_slice(&g[cursor..cursor + block]);
                        cursor += block;
                    }
                }
                grads
            }),
        ))
    }
}

// ── reductions ───────────────────────────────────────────────────────

impl<F: Scalar> Tensor<F> {
    /// Mean over one axis; the axis is removed from the shape.
    pub fn mean_axis(&self, axis: usize) -> Result<Tensor<F>> {
        self.reduce_axis(axis, true)
    }

    /// Sum over one axis; the axis is removed from the shape.
    pub fn sum_axis(&self, axis: usize) -> Result<Tensor<F>> {
        self.reduce_axis(axis, false)
    }

    fn reduce_axis(&self, axis: usize, mean: bool) -> Result<Tensor<F>> {
        let shape = self.shape();
        if axis >= shape.len() {
            return Err(Error::InvalidShape {
                op: if mean { "mean_axis" } else { "sum_axis" },
                shape,
                reason: format!("axis {axis} out of range"),
            });
        }
        let outer: usize = shape[..axis].iter().product();
        let len = shape[axis];
        let inner: usize = shape[axis + 1..].iter().product();
        let a = self.data();
        let mut out = vec![F::zero(); outer * inner];
        for o in 0..outer {
            for l in 0..len {
                for i in 0..inner {
                    out[o * inner + i] = out[o * inner + i] + a[(o * len + l) * inner + i];
                }
            }
        }
        let scale = if mean {
            F::one() / k::<F>(len as f64)
        } else {
            F::one()
        };
        for v in out.iter_mut() {
            *v = *v * scale;
        }
        let mut out_shape = shape.clone();
        out_shape.remove(axis);
        Ok(Tensor::from_op(
            out_shape,
            out,
            vec![self.clone()],
            Box::new(move |g| {
                let mut dg = vec![F::zero(); outer * len * inner];
                for o in 0..outer {
                    for l in 0..len {
                        for i in 0..inner {
                            dg[(o * len + l) * inner + i] = g[o * inner + i] * scale;
                        }
                    }
                }
                vec![dg]
            }),
        ))
    }

    /// Sum of all elements, as a rank-0 scalar.
    pub fn sum_all(&self) -> Tensor<F> {
        let a = self.data();
        let total = a.iter().fold(F::zero(), |acc, x| acc + *x);
        let n = a.len();
        Tensor::from_op(
            vec![],
            vec![total],
            vec![self.clone()],
            Box::new(move |g| vec![vec![g[0]; n]]),
        )
    }

    /// Mean of all elements, as a rank-0 scalar.
    pub fn mean_all(&self) -> Tensor<F> {
        let n = self.numel();
        self.sum_all().scalar_mul(F::one() / k::<F>(n as f64))
    }
}

// ── row-wise nonlinearities ──────────────────────────────────────────

impl<F: Scalar> Tensor<F> {
    /// Softmax over the last axis.
    pub fn softmax_last(&self) -> Tensor<F> {
        let shape = self.shape();
        let (rows, d) = rows_of(&shape);
        let a = self.data();
        let mut out = vec![F::zero(); rows * d];
        for r in 0..rows {
            let row = &a[r * d..(r + 1) * d];
            let maxv = row.iter().fold(F::neg_infinity(), |m, x| m.max(*x));
            let mut denom = F::zero();
            for j in 0..d {
                let e = (row[j] - maxv).exp();
                out[r * d + j] = e;
                denom = denom + e;
            }
            for j in 0..d {
                out[r * d + j] = out[r * d + j] / denom;
            }
        }
        let oc = out.clone();
        Tensor::from_op(
            shape,
            out,
            vec![self.clone()],
            Box::new(move |g| {
                let mut dg = vec![F::zero(); rows * d];
                for r in 0..rows {
                    let s = &oc[r * d..(r + 1) * d];
                    let gr = &g[r * d..(r + 1) * d];
                    let mut dot = F::zero();
                    for j in 0..d {
                        dot = dot + gr[j] * s[j];
                    }
                    for j in 0..d {
                        dg[r * d + j] = s[j] * (gr[j] - dot);
                    }
                }
                vec![dg]
            }),
        )
    }

    /// Log-softmax over the last axis (numerically stable form).
    pub fn log_softmax_last(&self) -> Tensor<F> {
        let shape = self.shape();
        let (rows, d) = rows_of(&shape);
        let a = self.data();
        let mut out = vec![F::zero(); rows * d];
        for r in 0..rows {
            let row = &a[r * d..(r + 1) * d];
            let maxv = row.iter().fold(F::neg_infinity(), |m, x| m.max(*x));
            let mut denom = F::zero();
            for j in 0..d {
                denom = denom + (row[j] - maxv).exp();
            }
            let log_denom = denom.ln();
            for j in 0..d {
                out[r * d + j] = row[j] - maxv - log_denom;
            }
        }
        let oc = out.clone();
        Tensor::from_op(
            shape,
            out,
            vec![self.clone()],
            Box::new(move |g| {
                let mut dg = vec![F::zero(); rows * d];
                for r in 0..rows {
                    let l = &oc[r * d..(r + 1) * d];
                    let gr = &g[r * d..(r + 1) * d];
                    let mut gsum = F::zero();
                    for j in 0..d {
                        gsum = gsum + gr[j];
                    }
                    for j in 0..d {
                        dg[r * d + j] = gr[j] - l[j].exp() * gsum;
                    }
                }
                vec![dg]
            }),
        )
    }

    /// Layer normalization over the last axis with learnable scale and shift.
    pub fn layer_norm(&self, gamma: &Tensor<F>, beta: &Tensor<F>, eps: F) -> Result<Tensor<F>> {
        let shape = self.shape();
        let (rows, d) = rows_of(&shape);
        if gamma.shape() != vec![d] {
            return Err(Error::ShapeMismatch {
                op: "layer_norm",
                lhs: shape,
                rhs: gamma.shape(),
            });
        }
        if beta.shape() != vec![d] {
            return Err(Error::ShapeMismatch {
                op: "layer_norm",
                lhs: shape,
                rhs: beta.shape(),
            });
        }
        let a = self.data();
        let gm = gamma.data();
        let bt = beta.data();
        let dn: F = k(d as f64);

        let mut out = vec![F::zero(); rows * d];
        let mut xhat = vec![F::zero(); rows * d];
        let mut inv_sigma = vec![F::zero(); rows];
        for r in 0..rows {
            let row = &a[r * d..(r + 1) * d];
            let mut mu = F::zero();
            for x in row {
                mu = mu + *x;
            }
            mu = mu / dn;
            let mut var = F::zero();
            for x in row {
                let dx = *x - mu;
                var = var + dx * dx;
            }
            var = var / dn;
            let inv = F::one() / (var + eps).sqrt();
            inv_sigma[r] = inv;
            for j in 0..d {
                let xh = (row[j] - mu) * inv;
                xhat[r * d + j] = xh;
                out[r * d + j] = gm[j] * xh + bt[j];
            }
        }
        let gmc = gm.clone();
        Ok(Tensor::from_op(
            shape,
            out,
            vec![self.clone(), gamma.clone(), beta.clone()],
            Box::new(move |g| {
                let mut dx = vec![F::zero(); rows * d];
                let mut dgamma = vec![F::zero(); d];
                let mut dbeta = vec![F::zero(); d];
                for r in 0..rows {
                    let gr = &g[r * d..(r + 1) * d];
                    let xh = &xhat[r * d..(r + 1) * d];
                    let mut mean_gy = F::zero();
                    let mut mean_gy_xh = F::zero();
                    for j in 0..d {
                        let gy = gr[j] * gmc[j];
                        mean_gy = mean_gy + gy;
                        mean_gy_xh = mean_gy_xh + gy * xh[j];
                        dgamma[j] = dgamma[j] + gr[j] * xh[j];
                        dbeta[j] = dbeta[j] + gr[j];
                    }
                    mean_gy = mean_gy / dn;
                    mean_gy_xh = mean_gy_xh / dn;
                    for j in 0..d {
                        let gy = gr[j] * gmc[j];
                        dx[r * d + j] = (gy - mean_gy - xh[j] * mean_gy_xh) * inv_sigma[r];
                    }
                }
                vec![dx, dgamma, dbeta]
            }),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type T = Tensor<f64>;

    #[test]
    fn matmul_identity_preserves_matrix() {
        let eye = T::from_vec(vec![3, 3], vec![1., 0., 0., 0., 1., 0., 0., 0., 1.]).unwrap();
        let a = T::from_vec(vec![3, 3], (1..=9).map(f64::from).collect()).unwrap();
        let out = eye.matmul(&a).unwrap();
        assert_eq!(out.data(), a.data());
    }

    #[test]
    fn relu_clamps_negatives() {
        let x = T::from_vec(vec![3], vec![-1.0, 0.0, 2.0]).unwrap();
        assert_eq!(x.relu().data(), vec![0.0, 0.0, 2.0]);
    }

    #[test]
    fn softmax_of_uniform_logits_is_uniform() {
        let x = T::from_vec(vec![3], vec![0.0, 0.0, 0.0]).unwrap();
        let s = x.softmax_last().data();
        for v in s {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn softmax_rows_sum_to_one() {
        let x = T::from_vec(vec![2, 4], vec![0.3, -1.2, 4.0, 0.01, 9.0, 9.0, 9.0, 9.0]).unwrap();
        let s = x.softmax_last().data();
        for r in 0..2 {
            let sum: f64 = s[r * 4..(r + 1) * 4].iter().sum();
            assert!((sum - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn backward_of_sum_of_squares() {
        let x = T::param(vec![2], vec![1.0, 2.0]).unwrap();
        let loss = x.square().sum_all();
        loss.backward().unwrap();
        assert_eq!(x.grad().unwrap(), vec![2.0, 4.0]);
    }

    #[test]
    fn backward_of_mean() {
        let x = T::param(vec![4], vec![3.0, -1.0, 0.5, 2.0]).unwrap();
        let loss = x.mean_all();
        loss.backward().unwrap();
        assert_eq!(x.grad().unwrap(), vec![0.25; 4]);
    }

    #[test]
    fn backward_rejects_non_scalar() {
        let x = T::param(vec![2], vec![1.0, 2.0]).unwrap();
        let y = x.square();
        let err = y.backward().unwrap_err();
        assert!(matches!(err, Error::NonScalarLoss(shape) if shape == vec![2]));
    }

    #[test]
    fn shape_mismatch_names_op_and_shapes() {
        let a = T::from_vec(vec![2, 3], vec![0.0; 6]).unwrap();
        let b = T::from_vec(vec![3, 3], vec![0.0; 9]).unwrap();
        let err = a.add(&b).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("add") && msg.contains("[2, 3]") && msg.contains("[3, 3]"));
    }

    #[test]
    fn unreachable_parameter_has_no_grad() {
        let x = T::param(vec![2], vec![1.0, 2.0]).unwrap();
        let unused = T::param(vec![2], vec![5.0, 6.0]).unwrap();
        let loss = x.sum_all();
        loss.backward().unwrap();
        assert!(x.grad().is_some());
        assert!(unused.grad().is_none());
    }

    #[test]
    fn fan_out_accumulates() {
        // loss = sum(x*x) + sum(x) → grad = 2x + 1
        let x = T::param(vec![2], vec![3.0, -2.0]).unwrap();
        let loss = x.square().sum_all().add(&x.sum_all()).unwrap();
        loss.backward().unwrap();
        assert_eq!(x.grad().unwrap(), vec![7.0, -3.0]);
    }

    #[test]
    fn concat_and_split_round_trip_gradient() {
        let a = T::param(vec![1, 2], vec![1.0, 2.0]).unwrap();
        let b = T::param(vec![2, 2], vec![3.0, 4.0, 5.0, 6.0]).unwrap();
        let c = T::concat(&[a.clone(), b.clone()], 0).unwrap();
        assert_eq!(c.shape(), vec![3, 2]);
        assert_eq!(c.data(), vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let loss = c.mul(&c).unwrap().sum_all();
        loss.backward().unwrap();
        assert_eq!(a.grad().unwrap(), vec![2.0, 4.0]);
        assert_eq!(b.grad().unwrap(), vec![6.0, 8.0, 10.0, 12.0]);
    }

    #[test]
    fn transpose_round_trip() {
        let a = T::from_vec(vec![2, 3], vec![1., 2., 3., 4., 5., 6.]).unwrap();
        let t = a.transpose2().unwrap();
        assert_eq!(t.shape(), vec![3, 2]);
        assert_eq!(t.data(), vec![1., 4., 2., 5., 3., 6.]);
        let back = t.transpose2().unwrap();
        assert_eq!(back.data(), a.data());
    }

    #[test]
    fn mean_axis_reduces_named_axis() {
        let a = T::from_vec(vec![2, 3], vec![1., 2., 3., 4., 5., 6.]).unwrap();
        let m0 = a.mean_axis(0).unwrap();
        assert_eq!(m0.shape(), vec![3]);
        assert_eq!(m0.data(), vec![2.5, 3.5, 4.5]);
        let m1 = a.mean_axis(1).unwrap();
        assert_eq!(m1.shape(), vec![2]);
        assert_eq!(m1.data(), vec![2.0, 5.0]);
    }

    #[test]
    fn linearity_of_backward() {
        // grad(a·f + b·g) == a·grad(f) + b·grad(g), elementwise to 1e-12
        let xv = vec![0.7, -1.3, 2.1];
        let (a, b) = (1.7, -0.6);

        let x1 = T::param(vec![3], xv.clone()).unwrap();
        let f = x1.square().sum_all();
        let g = x1.gelu().sum_all();
        let combined = f.scalar_mul(a).add(&g.scalar_mul(b)).unwrap();
        combined.backward().unwrap();
        let grad_combined = x1.grad().unwrap();

        let x2 = T::param(vec![3], xv.clone()).unwrap();
        x2.square().sum_all().backward().unwrap();
        let grad_f = x2.grad().unwrap();
        x2.zero_grad();
        x2.gelu().sum_all().backward().unwrap();
        let grad_g = x2.grad().unwrap();

        for i in 0..3 {
            let manual = a * grad_f[i] + b * grad_g[i];
            assert!((grad_combined[i] - manual).abs() < 1e-12);
        }
    }

    #[test]
    fn determinism_bitwise() {
        let run = || {
            let x = T::param(vec![2, 2], vec![0.3, -0.7, 1.9, 0.2]).unwrap();
            let w = T::param(vec![2, 2], vec![0.5, 0.1, -0.4, 0.9]).unwrap();
            let y = x.matmul(&w).unwrap().gelu().softmax_last().sum_all();
            y.backward().unwrap();
            (y.item(), x.grad().unwrap(), w.grad().unwrap())
        };
        let (v1, gx1, gw1) = run();
        let (v2, gx2, gw2) = run();
        assert_eq!(v1.to_bits(), v2.to_bits());
        assert_eq!(
            gx1.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            gx2.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        );
        assert_eq!(
            gw1.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            gw2.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        );
    }

    #[test]
    fn works_with_f32_scalars() {
        let x = Tensor::<f32>::param(vec![2], vec![1.0, 2.0]).unwrap();
        let loss = x.square().sum_all();
        loss.backward().unwrap();
        assert_eq!(x.grad().unwrap(), vec![2.0f32, 4.0]);
    }
}
