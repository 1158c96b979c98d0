//! Minimal reverse-mode autodiff over 2D tensors. Each forward call appends
//! a node; `backward` walks the nodes once in reverse, accumulating
//! gradients into every node that (transitively) depends on a parameter.

use crate::tensor::Tensor;

pub type NodeId = usize;

const LN_EPS: f64 = 1e-5;

#[derive(Debug, Clone)]
enum Op {
    Leaf,
    MatMul(NodeId, NodeId),
    Transpose(NodeId),
    Add(NodeId, NodeId),
    /// matrix + 1×cols row vector broadcast over rows
    AddRow(NodeId, NodeId),
    Sub(NodeId, NodeId),
    Mul(NodeId, NodeId),
    /// matrix * rows×1 column vector broadcast over columns
    MulCol(NodeId, NodeId),
    /// a*x + b elementwise; only the scale matters for the backward pass
    Affine(NodeId, f64),
    Sigmoid(NodeId),
    Relu(NodeId),
    SoftmaxRows(NodeId),
    /// ln(max(x, lo))
    LogClip(NodeId, f64),
    GatherRows(NodeId, Vec<usize>),
    /// out[r, map[c]] += in[r, c]; out has `width` columns
    ScatterCols(NodeId, Vec<usize>, usize),
    SliceCols(NodeId, usize, usize),
    ConcatCols(Vec<NodeId>),
    /// x, gain (1×d), bias (1×d); per-row normalization
    LayerNorm(NodeId, NodeId, NodeId),
    SumAll(NodeId),
}

struct Node {
    value: Tensor,
    op: Op,
    requires_grad: bool,
}

#[derive(Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

impl Tape {
    pub fn new() -> Self {
        Tape::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, id: NodeId) -> &Tensor {
        &self.nodes[id].value
    }

    fn push(&mut self, value: Tensor, op: Op, requires_grad: bool) -> NodeId {
        self.nodes.push(Node {
            value,
            op,
            requires_grad,
        });
        self.nodes.len() - 1
    }

    fn needs(&self, id: NodeId) -> bool {
        self.nodes[id].requires_grad
    }

    /// Constant input: no gradient flows into it.
    pub fn constant(&mut self, value: Tensor) -> NodeId {
        self.push(value, Op::Leaf, false)
    }

    /// Trainable leaf.
    pub fn parameter(&mut self, value: Tensor) -> NodeId {
        self.push(value, Op::Leaf, true)
    }

    pub fn matmul(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let v = self.nodes[a].value.matmul(&self.nodes[b].value);
        let rg = self.needs(a) || self.needs(b);
        self.push(v, Op::MatMul(a, b), rg)
    }

    pub fn transpose(&mut self, a: NodeId) -> NodeId {
        let v = self.nodes[a].value.transpose();
        let rg = self.needs(a);
        self.push(v, Op::Transpose(a), rg)
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let (va, vb) = (&self.nodes[a].value, &self.nodes[b].value);
        assert!(va.same_shape(vb), "add shapes {}x{} vs {}x{}", va.rows, va.cols, vb.rows, vb.cols);
        let data = va.data.iter().zip(&vb.data).map(|(x, y)| x + y).collect();
        let v = Tensor::from_vec(va.rows, va.cols, data);
        let rg = self.needs(a) || self.needs(b);
        self.push(v, Op::Add(a, b), rg)
    }

    pub fn add_row(&mut self, a: NodeId, row: NodeId) -> NodeId {
        let (va, vr) = (&self.nodes[a].value, &self.nodes[row].value);
        assert_eq!(vr.rows, 1, "add_row needs a 1×cols vector");
        assert_eq!(va.cols, vr.cols, "add_row width mismatch");
        let mut v = va.clone();
        for r in 0..v.rows {
            for c in 0..v.cols {
                v.data[r * v.cols + c] += vr.data[c];
            }
        }
        let rg = self.needs(a) || self.needs(row);
        self.push(v, Op::AddRow(a, row), rg)
    }

    pub fn sub(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let (va, vb) = (&self.nodes[a].value, &self.nodes[b].value);
        assert!(va.same_shape(vb), "sub shape mismatch");
        let data = va.data.iter().zip(&vb.data).map(|(x, y)| x - y).collect();
        let v = Tensor::from_vec(va.rows, va.cols, data);
        let rg = self.needs(a) || self.needs(b);
        self.push(v, Op::Sub(a, b), rg)
    }

    pub fn mul(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let (va, vb) = (&self.nodes[a].value, &self.nodes[b].value);
        assert!(va.same_shape(vb), "mul shape mismatch");
        let data = va.data.iter().zip(&vb.data).map(|(x, y)| x * y).collect();
        let v = Tensor::from_vec(va.rows, va.cols, data);
        let rg = self.needs(a) || self.needs(b);
        self.push(v, Op::Mul(a, b), rg)
    }

    pub fn mul_col(&mut self, a: NodeId, col: NodeId) -> NodeId {
        let (va, vc) = (&self.nodes[a].value, &self.nodes[col].value);
        assert_eq!(vc.cols, 1, "mul_col needs a rows×1 vector");
        assert_eq!(va.rows, vc.rows, "mul_col height mismatch");
        let mut v = va.clone();
        for r in 0..v.rows {
            let s = vc.data[r];
            for c in 0..v.cols {
                v.data[r * v.cols + c] *= s;
            }
        }
        let rg = self.needs(a) || self.needs(col);
        self.push(v, Op::MulCol(a, col), rg)
    }

    pub fn affine(&mut self, a: NodeId, scale: f64, shift: f64) -> NodeId {
        let va = &self.nodes[a].value;
        let data = va.data.iter().map(|x| scale * x + shift).collect();
        let v = Tensor::from_vec(va.rows, va.cols, data);
        let rg = self.needs(a);
        self.push(v, Op::Affine(a, scale), rg)
    }

    pub fn sigmoid(&mut self, a: NodeId) -> NodeId {
        let va = &self.nodes[a].value;
        let data = va.data.iter().map(|x| 1.0 / (1.0 + (-x).exp())).collect();
        let v = Tensor::from_vec(va.rows, va.cols, data);
        let rg = self.needs(a);
        self.push(v, Op::Sigmoid(a), rg)
    }

    pub fn relu(&mut self, a: NodeId) -> NodeId {
        let va = &self.nodes[a].value;
        let data = va.data.iter().map(|x| x.max(0.0)).collect();
        let v = Tensor::from_vec(va.rows, va.cols, data);
        let rg = self.needs(a);
        self.push(v, Op::Relu(a), rg)
    }

    pub fn softmax_rows(&mut self, a: NodeId) -> NodeId {
        let va = &self.nodes[a].value;
        let mut v = va.clone();
        for r in 0..v.rows {
            let row = &mut v.data[r * v.cols..(r + 1) * v.cols];
            let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let mut sum = 0.0;
            for x in row.iter_mut() {
                *x = (*x - max).exp();
                sum += *x;
            }
            for x in row.iter_mut() {
                *x /= sum;
            }
        }
        let rg = self.needs(a);
        self.push(v, Op::SoftmaxRows(a), rg)
    }

    pub fn log_clip(&mut self, a: NodeId, lo: f64) -> NodeId {
        let va = &self.nodes[a].value;
        let data = va.data.iter().map(|x| x.max(lo).ln()).collect();
        let v = Tensor::from_vec(va.rows, va.cols, data);
        let rg = self.needs(a);
        self.push(v, Op::LogClip(a, lo), rg)
    }

    pub fn gather_rows(&mut self, table: NodeId, ids: &[usize]) -> NodeId {
        let vt = &self.nodes[table].value;
        let mut v = Tensor::zeros(ids.len(), vt.cols);
        for (r, &id) in ids.iter().enumerate() {
            assert!(id < vt.rows, "gather id {id} out of {} rows", vt.rows);
            v.data[r * vt.cols..(r + 1) * vt.cols].copy_from_slice(vt.row(id));
        }
        let rg = self.needs(table);
        self.push(v, Op::GatherRows(table, ids.to_vec()), rg)
    }

    pub fn scatter_cols(&mut self, a: NodeId, map: &[usize], width: usize) -> NodeId {
        let va = &self.nodes[a].value;
        assert_eq!(va.cols, map.len(), "scatter map length mismatch");
        let mut v = Tensor::zeros(va.rows, width);
        for r in 0..va.rows {
            for (c, &dest) in map.iter().enumerate() {
                assert!(dest < width, "scatter target {dest} out of width {width}");
                v.data[r * width + dest] += va.data[r * va.cols + c];
            }
        }
        let rg = self.needs(a);
        self.push(v, Op::ScatterCols(a, map.to_vec(), width), rg)
    }

    pub fn slice_cols(&mut self, a: NodeId, start: usize, len: usize) -> NodeId {
        let va = &self.nodes[a].value;
        assert!(start + len <= va.cols, "slice out of range");
        let mut v = Tensor::zeros(va.rows, len);
        for r in 0..va.rows {
            v.data[r * len..(r + 1) * len]
                .copy_from_slice(&va.data[r * va.cols + start..r * va.cols + start + len]);
        }
        let rg = self.needs(a);
        self.push(v, Op::SliceCols(a, start, len), rg)
    }

    pub fn concat_cols(&mut self, parts: &[NodeId]) -> NodeId {
        assert!(!parts.is_empty());
        let rows = self.nodes[parts[0]].value.rows;
        let width: usize = parts.iter().map(|&p| self.nodes[p].value.cols).sum();
        let mut v = Tensor::zeros(rows, width);
        let mut offset = 0;
        for &p in parts {
            let vp = &self.nodes[p].value;
            assert_eq!(vp.rows, rows, "concat height mismatch");
            for r in 0..rows {
                v.data[r * width + offset..r * width + offset + vp.cols]
                    .copy_from_slice(vp.row(r));
            }
            offset += vp.cols;
        }
        let rg = parts.iter().any(|&p| self.needs(p));
        self.push(v, Op::ConcatCols(parts.to_vec()), rg)
    }

    pub fn layer_norm(&mut self, x: NodeId, gain: NodeId, bias: NodeId) -> NodeId {
        let (vx, vg, vb) = (
            &self.nodes[x].value,
            &self.nodes[gain].value,
            &self.nodes[bias].value,
        );
        assert_eq!(vg.rows, 1);
        assert_eq!(vb.rows, 1);
        assert_eq!(vg.cols, vx.cols);
        assert_eq!(vb.cols, vx.cols);
        let mut v = vx.clone();
        for r in 0..v.rows {
            let row = &mut v.data[r * v.cols..(r + 1) * v.cols];
            let mean = row.iter().sum::<f64>() / row.len() as f64;
            let var = row.iter().map(|&a| (a - mean) * (a - mean)).sum::<f64>() / row.len() as f64;
            let inv = 1.0 / (var + LN_EPS).sqrt();
            for (c, a) in row.iter_mut().enumerate() {
                *a = (*a - mean) * inv * vg.data[c] + vb.data[c];
            }
        }
        let rg = self.needs(x) || self.needs(gain) || self.needs(bias);
        self.push(v, Op::LayerNorm(x, gain, bias), rg)
    }

    pub fn sum_all(&mut self, a: NodeId) -> NodeId {
        let s = self.nodes[a].value.data.iter().sum();
        let rg = self.needs(a);
        self.push(Tensor::scalar(s), Op::SumAll(a), rg)
    }

    /// Gradients of the scalar at `loss` with respect to every node.
    /// Entries are None for nodes that require no gradient.
    pub fn backward(&self, loss: NodeId) -> Vec<Option<Tensor>> {
        assert_eq!(self.nodes[loss].value.len(), 1, "backward needs a scalar loss");
        let mut grads: Vec<Option<Tensor>> = vec![None; self.nodes.len()];
        grads[loss] = Some(Tensor::scalar(1.0));

        for id in (0..=loss).rev() {
            let Some(g) = grads[id].clone() else {
                continue;
            };
            if !self.nodes[id].requires_grad {
                continue;
            }
            match &self.nodes[id].op {
                Op::Leaf => {}
                Op::MatMul(a, b) => {
                    if self.needs(*a) {
                        let bt = self.nodes[*b].value.transpose();
                        self.accumulate(&mut grads, *a, g.matmul(&bt));
                    }
                    if self.needs(*b) {
                        let at = self.nodes[*a].value.transpose();
                        self.accumulate(&mut grads, *b, at.matmul(&g));
                    }
                }
                Op::Transpose(a) => {
                    if self.needs(*a) {
                        self.accumulate(&mut grads, *a, g.transpose());
                    }
                }
                Op::Add(a, b) => {
                    if self.needs(*a) {
                        self.accumulate(&mut grads, *a, g.clone());
                    }
                    if self.needs(*b) {
                        self.accumulate(&mut grads, *b, g);
                    }
                }
                Op::AddRow(a, row) => {
                    if self.needs(*a) {
                        self.accumulate(&mut grads, *a, g.clone());
                    }
                    if self.needs(*row) {
                        let mut dr = Tensor::zeros(1, g.cols);
                        for r in 0..g.rows {
                            for c in 0..g.cols {
                                dr.data[c] += g.data[r * g.cols + c];
                            }
                        }
                        self.accumulate(&mut grads, *row, dr);
                    }
                }
                Op::Sub(a, b) => {
                    if self.needs(*a) {
                        self.accumulate(&mut grads, *a, g.clone());
                    }
                    if self.needs(*b) {
                        let mut neg = g;
                        neg.scale_in_place(-1.0);
                        self.accumulate(&mut grads, *b, neg);
                    }
                }
                Op::Mul(a, b) => {
                    if self.needs(*a) {
                        let vb = &self.nodes[*b].value;
                        let data = g.data.iter().zip(&vb.data).map(|(x, y)| x * y).collect();
                        self.accumulate(&mut grads, *a, Tensor::from_vec(g.rows, g.cols, data));
                    }
                    if self.needs(*b) {
                        let va = &self.nodes[*a].value;
                        let data = g.data.iter().zip(&va.data).map(|(x, y)| x * y).collect();
                        self.accumulate(&mut grads, *b, Tensor::from_vec(g.rows, g.cols, data));
                    }
                }
                Op::MulCol(a, col) => {
                    let vc = &self.nodes[*col].value;
                    if self.needs(*a) {
                        let mut da = g.clone();
                        for r in 0..da.rows {
                            let s = vc.data[r];
                            for c in 0..da.cols {
                                da.data[r * da.cols + c] *= s;
                            }
                        }
                        self.accumulate(&mut grads, *a, da);
                    }
                    if self.needs(*col) {
                        let va = &self.nodes[*a].value;
                        let mut dc = Tensor::zeros(va.rows, 1);
                        for r in 0..va.rows {
                            let mut s = 0.0;
                            for c in 0..va.cols {
                                s += g.data[r * g.cols + c] * va.data[r * va.cols + c];
                            }
                            dc.data[r] = s;
                        }
                        self.accumulate(&mut grads, *col, dc);
                    }
                }
                Op::Affine(a, scale) => {
                    if self.needs(*a) {
                        let mut da = g;
                        da.scale_in_place(*scale);
                        self.accumulate(&mut grads, *a, da);
                    }
                }
                Op::Sigmoid(a) => {
                    if self.needs(*a) {
                        let y = &self.nodes[id].value;
                        let data = g
                            .data
                            .iter()
                            .zip(&y.data)
                            .map(|(dg, &s)| dg * s * (1.0 - s))
                            .collect();
                        self.accumulate(&mut grads, *a, Tensor::from_vec(g.rows, g.cols, data));
                    }
                }
                Op::Relu(a) => {
                    if self.needs(*a) {
                        let vx = &self.nodes[*a].value;
                        let data = g
                            .data
                            .iter()
                            .zip(&vx.data)
                            .map(|(dg, &x)| if x > 0.0 { *dg } else { 0.0 })
                            .collect();
                        self.accumulate(&mut grads, *a, Tensor::from_vec(g.rows, g.cols, data));
                    }
                }
                Op::SoftmaxRows(a) => {
                    if self.needs(*a) {
                        let y = &self.nodes[id].value;
                        let mut dx = Tensor::zeros(g.rows, g.cols);
                        for r in 0..g.rows {
                            let dot: f64 = (0..g.cols)
                                .map(|c| g.data[r * g.cols + c] * y.data[r * g.cols + c])
                                .sum();
                            for c in 0..g.cols {
                                let i = r * g.cols + c;
                                dx.data[i] = y.data[i] * (g.data[i] - dot);
                            }
                        }
                        self.accumulate(&mut grads, *a, dx);
                    }
                }
                Op::LogClip(a, lo) => {
                    if self.needs(*a) {
                        let vx = &self.nodes[*a].value;
                        let data = g
                            .data
                            .iter()
                            .zip(&vx.data)
                            .map(|(dg, &x)| if x > *lo { dg / x } else { 0.0 })
                            .collect();
                        self.accumulate(&mut grads, *a, Tensor::from_vec(g.rows, g.cols, data));
                    }
                }
                Op::GatherRows(table, ids) => {
                    if self.needs(*table) {
                        let vt = &self.nodes[*table].value;
                        let mut dt = Tensor::zeros(vt.rows, vt.cols);
                        for (r, &id_) in ids.iter().enumerate() {
                            for c in 0..vt.cols {
                                dt.data[id_ * vt.cols + c] += g.data[r * g.cols + c];
                            }
                        }
                        self.accumulate(&mut grads, *table, dt);
                    }
                }
                Op::ScatterCols(a, map, _width) => {
                    if self.needs(*a) {
                        let va = &self.nodes[*a].value;
                        let mut da = Tensor::zeros(va.rows, va.cols);
                        for r in 0..va.rows {
                            for (c, &dest) in map.iter().enumerate() {
                                da.data[r * va.cols + c] = g.data[r * g.cols + dest];
                            }
                        }
                        self.accumulate(&mut grads, *a, da);
                    }
                }
                Op::SliceCols(a, start, len) => {
                    if self.needs(*a) {
                        let va = &self.nodes[*a].value;
                        let mut da = Tensor::zeros(va.rows, va.cols);
                        for r in 0..va.rows {
                            for c in 0..*len {
                                da.data[r * va.cols + start + c] = g.data[r * len + c];
                            }
                        }
                        self.accumulate(&mut grads, *a, da);
                    }
                }
                Op::ConcatCols(parts) => {
                    let mut offset = 0;
                    for &p in parts {
                        let w = self.nodes[p].value.cols;
                        if self.needs(p) {
                            let mut dp = Tensor::zeros(g.rows, w);
                            for r in 0..g.rows {
                                dp.data[r * w..(r + 1) * w]
                                    .copy_from_slice(&g.data[r * g.cols + offset..r * g.cols + offset + w]);
                            }
                            self.accumulate(&mut grads, p, dp);
                        }
                        offset += w;
                    }
                }
                Op::LayerNorm(x, gain, bias) => {
                    let vx = &self.nodes[*x].value;
                    let vg = &self.nodes[*gain].value;
                    let d = vx.cols as f64;
                    for r in 0..vx.rows {
                        let row = vx.row(r);
                        let mean = row.iter().sum::<f64>() / d;
                        let var = row.iter().map(|&a| (a - mean) * (a - mean)).sum::<f64>() / d;
                        let inv = 1.0 / (var + LN_EPS).sqrt();
                        let xhat: Vec<f64> = row.iter().map(|&a| (a - mean) * inv).collect();
                        let grow = &g.data[r * g.cols..(r + 1) * g.cols];

                        if self.needs(*x) {
                            // dxhat = dy * gain; dx = inv*(dxhat - mean(dxhat) - xhat*mean(dxhat*xhat))
                            let dxhat: Vec<f64> =
                                grow.iter().zip(&vg.data).map(|(dg, &gm)| dg * gm).collect();
                            let m1 = dxhat.iter().sum::<f64>() / d;
                            let m2 = dxhat.iter().zip(&xhat).map(|(a, b)| a * b).sum::<f64>() / d;
                            let mut dx = Tensor::zeros(1, vx.cols);
                            for c in 0..vx.cols {
                                dx.data[c] = inv * (dxhat[c] - m1 - xhat[c] * m2);
                            }
                            self.accumulate_row(&mut grads, *x, r, vx.rows, vx.cols, &dx.data);
                        }
                        if self.needs(*gain) {
                            let dg: Vec<f64> =
                                grow.iter().zip(&xhat).map(|(a, b)| a * b).collect();
                            self.accumulate_row(&mut grads, *gain, 0, 1, vx.cols, &dg);
                        }
                        if self.needs(*bias) {
                            self.accumulate_row(&mut grads, *bias, 0, 1, vx.cols, grow);
                        }
                    }
                }
                Op::SumAll(a) => {
                    if self.needs(*a) {
                        let va = &self.nodes[*a].value;
                        let mut da = Tensor::zeros(va.rows, va.cols);
                        let s = g.item();
                        for v in &mut da.data {
                            *v = s;
                        }
                        self.accumulate(&mut grads, *a, da);
                    }
                }
            }
        }
        grads
    }

    fn accumulate(&self, grads: &mut [Option<Tensor>], id: NodeId, delta: Tensor) {
        match &mut grads[id] {
            Some(existing) => existing.add_in_place(&delta),
            slot @ None => *slot = Some(delta),
        }
    }

    fn accumulate_row(
        &self,
        grads: &mut [Option<Tensor>],
        id: NodeId,
        row: usize,
        rows: usize,
        cols: usize,
        delta: &[f64],
    ) {
        let slot = grads[id].get_or_insert_with(|| Tensor::zeros(rows, cols));
        for (c, &d) in delta.iter().enumerate() {
            slot.data[row * cols + c] += d;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Central-difference check of one scalar graph.
    fn check<F>(build: F, input: Tensor)
    where
        F: Fn(&mut Tape, NodeId) -> NodeId,
    {
        let mut tape = Tape::new();
        let x = tape.parameter(input.clone());
        let loss = build(&mut tape, x);
        let grads = tape.backward(loss);
        let analytic = grads[x].clone().expect("input grad exists");

        let h = 1e-6;
        for k in 0..input.len() {
            let mut plus = input.clone();
            plus.data[k] += h;
            let mut minus = input.clone();
            minus.data[k] -= h;
            let eval = |t: Tensor| {
                let mut tape = Tape::new();
                let x = tape.parameter(t);
                let loss = build(&mut tape, x);
                tape.value(loss).item()
            };
            let numeric = (eval(plus) - eval(minus)) / (2.0 * h);
            let a = analytic.data[k];
            assert!(
                (a - numeric).abs() <= 1e-6 * a.abs().max(numeric.abs()).max(1.0),
                "element {k}: analytic {a} vs numeric {numeric}"
            );
        }
    }

    #[test]
    fn softmax_log_chain() {
        check(
            |tape, x| {
                let s = tape.softmax_rows(x);
                let l = tape.log_clip(s, 1e-9);
                let w = tape.constant(Tensor::from_vec(2, 3, vec![0.3, -1.0, 0.5, 2.0, 0.1, -0.4]));
                let m = tape.mul(l, w);
                tape.sum_all(m)
            },
            Tensor::from_vec(2, 3, vec![0.2, -0.7, 1.3, 0.4, 0.9, -1.1]),
        );
    }

    #[test]
    fn matmul_sigmoid_chain() {
        check(
            |tape, x| {
                let w = tape.constant(Tensor::from_vec(3, 2, vec![0.5, -0.2, 1.1, 0.7, -0.3, 0.9]));
                let y = tape.matmul(x, w);
                let s = tape.sigmoid(y);
                tape.sum_all(s)
            },
            Tensor::from_vec(2, 3, vec![0.1, 0.2, -0.5, 0.8, -0.9, 0.3]),
        );
    }

    #[test]
    fn layer_norm_grad() {
        check(
            |tape, x| {
                let g = tape.constant(Tensor::from_vec(1, 4, vec![1.2, 0.8, -0.5, 1.0]));
                let b = tape.constant(Tensor::from_vec(1, 4, vec![0.1, -0.2, 0.3, 0.0]));
                let y = tape.layer_norm(x, g, b);
                let sq = tape.mul(y, y);
                tape.sum_all(sq)
            },
            Tensor::from_vec(2, 4, vec![0.5, -1.0, 2.0, 0.3, 1.5, 0.2, -0.7, 0.9]),
        );
    }

    #[test]
    fn layer_norm_param_grads() {
        let x_val = Tensor::from_vec(2, 3, vec![0.4, -0.6, 1.2, 2.0, 0.0, -1.0]);
        let build = |tape: &mut Tape, g: NodeId| {
            let x = tape.constant(x_val.clone());
            let b = tape.constant(Tensor::from_vec(1, 3, vec![0.0, 0.1, -0.1]));
            let y = tape.layer_norm(x, g, b);
            let sq = tape.mul(y, y);
            tape.sum_all(sq)
        };
        check(build, Tensor::from_vec(1, 3, vec![1.0, 0.9, 1.1]));
    }

    #[test]
    fn scatter_slice_concat_grads() {
        check(
            |tape, x| {
                let a = tape.slice_cols(x, 0, 2);
                let b = tape.slice_cols(x, 2, 2);
                let joined = tape.concat_cols(&[b, a]);
                let scattered = tape.scatter_cols(joined, &[1, 0, 1, 2], 3);
                let sq = tape.mul(scattered, scattered);
                tape.sum_all(sq)
            },
            Tensor::from_vec(2, 4, vec![0.3, -0.8, 0.5, 1.2, -0.1, 0.7, 0.9, -1.4]),
        );
    }

    #[test]
    fn gather_and_broadcast_grads() {
        check(
            |tape, x| {
                let g = tape.gather_rows(x, &[1, 0, 1]);
                let row = tape.constant(Tensor::from_vec(1, 3, vec![0.5, -1.0, 0.2]));
                let shifted = tape.add_row(g, row);
                let col = tape.constant(Tensor::from_vec(3, 1, vec![2.0, -0.5, 1.0]));
                let scaled = tape.mul_col(shifted, col);
                let r = tape.relu(scaled);
                tape.sum_all(r)
            },
            Tensor::from_vec(2, 3, vec![0.4, -0.6, 1.2, 2.0, 0.3, -1.0]),
        );
    }

    #[test]
    fn gather_rows_table_grad_accumulates() {
        let mut tape = Tape::new();
        let table = tape.parameter(Tensor::from_vec(2, 2, vec![1.0, 2.0, 3.0, 4.0]));
        let g = tape.gather_rows(table, &[0, 0, 1]);
        let loss = tape.sum_all(g);
        let grads = tape.backward(loss);
        let dt = grads[table].clone().unwrap();
        assert_eq!(dt.data, vec![2.0, 2.0, 1.0, 1.0]);
    }
}
