use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{AutodiffError, ParamId, ParamStore, Real, Tensor};

/// Handle to a value recorded on a [`Graph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var(usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    /// Down the rows, within each column.
    Rows,
    /// Across the columns, within each row.
    Cols,
}

enum Op<T> {
    Leaf,
    Param(ParamId),
    MatMul(Var, Var),
    Add(Var, Var),
    AddRow(Var, Var),
    Mul(Var, Var),
    MulCol(Var, Var),
    Affine(Var, T),
    Sigmoid(Var),
    Tanh(Var),
    Log(Var),
    Softmax(Var, Axis),
    Concat(Vec<Var>, Axis),
    Slice(Var, Axis, usize),
    Embedding(Var, Vec<usize>),
    Dropout(Var, Vec<T>),
    Blend(Var, Var, Vec<bool>),
    Sum(Var),
    CrossEntropy {
        logits: Var,
        targets: Vec<usize>,
        mask: Vec<bool>,
        probs: Vec<T>,
        count: usize,
    },
    Nll {
        probs: Var,
        targets: Vec<usize>,
        mask: Vec<bool>,
        count: usize,
    },
    AttnScores {
        keys: Var,
        query: Var,
        weight: Var,
        activ: Vec<T>,
    },
    AttnContext {
        weights: Var,
        values: Var,
    },
    PointerMix {
        vocab: Var,
        attn: Var,
        p_gen: Var,
        ids: Vec<usize>,
    },
}

struct Node<T> {
    rows: usize,
    cols: usize,
    value: Vec<T>,
    op: Op<T>,
    needs_grad: bool,
}

/// Gradients of a scalar with respect to every parameter it reached.
#[derive(Debug, Clone)]
pub struct Gradients<T> {
    grads: Vec<Option<Vec<T>>>,
}

impl<T: Real> Gradients<T> {
    pub fn get(&self, id: ParamId) -> Option<&[T]> {
        self.grads.get(id.0).and_then(|g| g.as_deref())
    }

    pub fn iter(&self) -> impl Iterator<Item = (ParamId, &[T])> {
        self.grads
            .iter()
            .enumerate()
            .filter_map(|(i, g)| g.as_deref().map(|g| (ParamId(i), g)))
    }
}

/// Define-by-run tape. Every operation appends a node; [`Graph::backward`]
/// walks the tape in reverse.
///
/// Parameter values are borrowed from the store, never copied.
pub struct Graph<'p, T: Real> {
    store: &'p ParamStore<T>,
    nodes: Vec<Node<T>>,
    param_nodes: Vec<Option<Var>>,
    training: bool,
    rng: ChaCha8Rng,
}

fn check(op: &'static str, ok: bool, left: (usize, usize), right: (usize, usize)) -> Result<(), AutodiffError> {
    if ok {
        Ok(())
    } else {
        Err(AutodiffError::ShapeMismatch { op, left, right })
    }
}

fn sigmoid<T: Real>(x: T) -> T {
    if x >= T::zero() {
        T::one() / (T::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (T::one() + e)
    }
}

/// Offsets of each softmax group and the stride between its members.
fn groups(rows: usize, cols: usize, axis: Axis) -> (usize, usize, usize, usize) {
    // (n_groups, group_len, group_step, member_stride)
    match axis {
        Axis::Cols => (rows, cols, cols, 1),
        Axis::Rows => (cols, rows, 1, cols),
    }
}

impl<'p, T: Real> Graph<'p, T> {
    pub fn new(store: &'p ParamStore<T>, training: bool, seed: u64) -> Self {
        Self {
            store,
            nodes: Vec::new(),
            param_nodes: vec![None; store.len()],
            training,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn is_training(&self) -> bool {
        self.training
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn shape(&self, v: Var) -> (usize, usize) {
        let n = &self.nodes[v.0];
        (n.rows, n.cols)
    }

    pub fn value(&self, v: Var) -> &[T] {
        let n = &self.nodes[v.0];
        match n.op {
            Op::Param(id) => self.store.get(id).value.data(),
            _ => &n.value,
        }
    }

    pub fn tensor(&self, v: Var) -> Tensor<T> {
        let (r, c) = self.shape(v);
        Tensor::from_vec(r, c, self.value(v).to_vec()).expect("node shape")
    }

    pub fn scalar(&self, v: Var) -> T {
        self.value(v)[0]
    }

    fn push(&mut self, rows: usize, cols: usize, value: Vec<T>, op: Op<T>, needs_grad: bool) -> Var {
        debug_assert!(matches!(op, Op::Param(_)) || rows * cols == value.len());
        self.nodes.push(Node {
            rows,
            cols,
            value,
            op,
            needs_grad,
        });
        Var(self.nodes.len() - 1)
    }

    fn needs(&self, v: Var) -> bool {
        self.nodes[v.0].needs_grad
    }

    pub fn constant(&mut self, t: Tensor<T>) -> Var {
        let (r, c) = t.shape();
        self.push(r, c, t.into_data(), Op::Leaf, false)
    }

    pub fn input(&mut self, rows: usize, cols: usize, data: Vec<T>) -> Result<Var, AutodiffError> {
        Ok(self.constant(Tensor::from_vec(rows, cols, data)?))
    }

    pub fn zeros(&mut self, rows: usize, cols: usize) -> Var {
        self.constant(Tensor::zeros(rows, cols))
    }

    pub fn param(&mut self, id: ParamId) -> Var {
        if let Some(v) = self.param_nodes[id.0] {
            return v;
        }
        let p = self.store.get(id);
        let (r, c) = p.value.shape();
        let v = self.push(r, c, Vec::new(), Op::Param(id), p.trainable);
        self.param_nodes[id.0] = Some(v);
        v
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var, AutodiffError> {
        let (r, n) = self.shape(a);
        let (n2, m) = self.shape(b);
        check("matmul", n == n2, (r, n), (n2, m))?;
        let av = self.value(a);
        let bv = self.value(b);
        let mut out = vec![T::zero(); r * m];
        for i in 0..r {
            let orow = &mut out[i * m..(i + 1) * m];
            for k in 0..n {
                let x = av[i * n + k];
                if x == T::zero() {
                    continue;
                }
                let brow = &bv[k * m..(k + 1) * m];
                for (o, &y) in orow.iter_mut().zip(brow) {
                    *o += x * y;
                }
            }
        }
        let ng = self.needs(a) || self.needs(b);
        Ok(self.push(r, m, out, Op::MatMul(a, b), ng))
    }

    fn zip_same(&mut self, op: &'static str, a: Var, b: Var, f: impl Fn(T, T) -> T) -> Result<(Vec<T>, (usize, usize)), AutodiffError> {
        let sa = self.shape(a);
        let sb = self.shape(b);
        check(op, sa == sb, sa, sb)?;
        let out = self.value(a).iter().zip(self.value(b)).map(|(&x, &y)| f(x, y)).collect();
        Ok((out, sa))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var, AutodiffError> {
        let (out, (r, c)) = self.zip_same("add", a, b, |x, y| x + y)?;
        let ng = self.needs(a) || self.needs(b);
        Ok(self.push(r, c, out, Op::Add(a, b), ng))
    }

    /// Elementwise product.
    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var, AutodiffError> {
        let (out, (r, c)) = self.zip_same("mul", a, b, |x, y| x * y)?;
        let ng = self.needs(a) || self.needs(b);
        Ok(self.push(r, c, out, Op::Mul(a, b), ng))
    }

    /// Adds a `1 x c` row to every row of `a`.
    pub fn add_row(&mut self, a: Var, row: Var) -> Result<Var, AutodiffError> {
        let (r, c) = self.shape(a);
        let sr = self.shape(row);
        check("add_row", sr == (1, c), (r, c), sr)?;
        let rv = self.value(row);
        let out = self.value(a).iter().enumerate().map(|(i, &x)| x + rv[i % c]).collect();
        let ng = self.needs(a) || self.needs(row);
        Ok(self.push(r, c, out, Op::AddRow(a, row), ng))
    }

    /// Scales row `i` of `a` by `col[i]`.
    pub fn mul_col(&mut self, a: Var, col: Var) -> Result<Var, AutodiffError> {
        let (r, c) = self.shape(a);
        let sc = self.shape(col);
        check("mul_col", sc == (r, 1), (r, c), sc)?;
        let cv = self.value(col);
        let out = self.value(a).iter().enumerate().map(|(i, &x)| x * cv[i / c.max(1)]).collect();
        let ng = self.needs(a) || self.needs(col);
        Ok(self.push(r, c, out, Op::MulCol(a, col), ng))
    }

    /// `scale * a + shift`.
    pub fn affine(&mut self, a: Var, scale: T, shift: T) -> Var {
        let (r, c) = self.shape(a);
        let out = self.value(a).iter().map(|&x| scale * x + shift).collect();
        let ng = self.needs(a);
        self.push(r, c, out, Op::Affine(a, scale), ng)
    }

    pub fn sigmoid(&mut self, a: Var) -> Var {
        let (r, c) = self.shape(a);
        let out = self.value(a).iter().map(|&x| sigmoid(x)).collect();
        let ng = self.needs(a);
        self.push(r, c, out, Op::Sigmoid(a), ng)
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        let (r, c) = self.shape(a);
        let out = self.value(a).iter().map(|&x| x.tanh()).collect();
        let ng = self.needs(a);
        self.push(r, c, out, Op::Tanh(a), ng)
    }

    pub fn log(&mut self, a: Var) -> Var {
        let (r, c) = self.shape(a);
        let out = self.value(a).iter().map(|&x| x.ln()).collect();
        let ng = self.needs(a);
        self.push(r, c, out, Op::Log(a), ng)
    }

    pub fn softmax(&mut self, a: Var, axis: Axis) -> Var {
        self.softmax_masked(a, axis, None)
    }

    /// Softmax where entries with `mask[i] == false` are treated as `-inf`.
    /// A fully masked group yields zeros.
    pub fn softmax_masked(&mut self, a: Var, axis: Axis, mask: Option<&[bool]>) -> Var {
        let (r, c) = self.shape(a);
        let x = self.value(a);
        let mut out = vec![T::zero(); r * c];
        let (ng, len, step, stride) = groups(r, c, axis);
        let keep = |i: usize| mask.is_none_or(|m| m[i]);
        for g in 0..ng {
            let base = g * step;
            let idx = (0..len).map(|k| base + k * stride);
            let max = idx.clone().filter(|&i| keep(i)).map(|i| x[i]).fold(T::neg_infinity(), T::max);
            if max == T::neg_infinity() {
                continue;
            }
            let mut total = T::zero();
            for i in idx.clone().filter(|&i| keep(i)) {
                let e = (x[i] - max).exp();
                out[i] = e;
                total += e;
            }
            for i in idx {
                out[i] /= total;
            }
        }
        let ng = self.needs(a);
        self.push(r, c, out, Op::Softmax(a, axis), ng)
    }

    pub fn concat(&mut self, parts: &[Var], axis: Axis) -> Result<Var, AutodiffError> {
        let first = *parts.first().ok_or(AutodiffError::Empty("concat"))?;
        let (r0, c0) = self.shape(first);
        let mut out = Vec::new();
        let (rows, cols) = match axis {
            Axis::Cols => {
                for &p in parts {
                    check("concat", self.shape(p).0 == r0, (r0, c0), self.shape(p))?;
                }
                let total: usize = parts.iter().map(|&p| self.shape(p).1).sum();
                out.reserve(r0 * total);
                for i in 0..r0 {
                    for &p in parts {
                        let c = self.shape(p).1;
                        out.extend_from_slice(&self.value(p)[i * c..(i + 1) * c]);
                    }
                }
                (r0, total)
            }
            Axis::Rows => {
                for &p in parts {
                    check("concat", self.shape(p).1 == c0, (r0, c0), self.shape(p))?;
                }
                for &p in parts {
                    out.extend_from_slice(self.value(p));
                }
                (out.len() / c0.max(1), c0)
            }
        };
        let ng = parts.iter().any(|&p| self.needs(p));
        let rows = if c0 == 0 { parts.iter().map(|&p| self.shape(p).0).sum() } else { rows };
        Ok(self.push(rows, cols, out, Op::Concat(parts.to_vec(), axis), ng))
    }

    pub fn slice(&mut self, a: Var, axis: Axis, start: usize, len: usize) -> Result<Var, AutodiffError> {
        let (r, c) = self.shape(a);
        let x = self.value(a);
        let (out, rows, cols) = match axis {
            Axis::Cols => {
                check("slice", start + len <= c, (r, c), (start, len))?;
                let mut out = Vec::with_capacity(r * len);
                for i in 0..r {
                    out.extend_from_slice(&x[i * c + start..i * c + start + len]);
                }
                (out, r, len)
            }
            Axis::Rows => {
                check("slice", start + len <= r, (r, c), (start, len))?;
                (x[start * c..(start + len) * c].to_vec(), len, c)
            }
        };
        let ng = self.needs(a);
        Ok(self.push(rows, cols, out, Op::Slice(a, axis, start), ng))
    }

    /// Rows of `table` selected by `ids`.
    pub fn embedding(&mut self, table: Var, ids: &[usize]) -> Result<Var, AutodiffError> {
        let (v, d) = self.shape(table);
        if let Some(&bad) = ids.iter().find(|&&i| i >= v) {
            return Err(AutodiffError::IndexOutOfRange { index: bad, len: v });
        }
        let t = self.value(table);
        let mut out = Vec::with_capacity(ids.len() * d);
        for &i in ids {
            out.extend_from_slice(&t[i * d..(i + 1) * d]);
        }
        let ng = self.needs(table);
        Ok(self.push(ids.len(), d, out, Op::Embedding(table, ids.to_vec()), ng))
    }

    /// Inverted dropout. Identity when not training or when `p == 0`.
    pub fn dropout(&mut self, a: Var, p: f64) -> Var {
        if !self.training || p <= 0.0 {
            return a;
        }
        let (r, c) = self.shape(a);
        let scale = T::of(1.0 / (1.0 - p));
        let mask: Vec<T> = (0..r * c)
            .map(|_| if self.rng.random::<f64>() < p { T::zero() } else { scale })
            .collect();
        let out = self.value(a).iter().zip(&mask).map(|(&x, &m)| x * m).collect();
        let ng = self.needs(a);
        self.push(r, c, out, Op::Dropout(a, mask), ng)
    }

    /// Row `i` comes from `new` where `mask[i]`, else from `old`.
    pub fn blend_rows(&mut self, new: Var, old: Var, mask: &[bool]) -> Result<Var, AutodiffError> {
        let (r, c) = self.shape(new);
        check("blend_rows", self.shape(old) == (r, c) && mask.len() == r, (r, c), self.shape(old))?;
        if mask.iter().all(|&m| m) {
            return Ok(new);
        }
        let (nv, ov) = (self.value(new), self.value(old));
        let mut out = Vec::with_capacity(r * c);
        for (i, &m) in mask.iter().enumerate() {
            let src = if m { nv } else { ov };
            out.extend_from_slice(&src[i * c..(i + 1) * c]);
        }
        let ng = self.needs(new) || self.needs(old);
        Ok(self.push(r, c, out, Op::Blend(new, old, mask.to_vec()), ng))
    }

    pub fn sum(&mut self, a: Var) -> Var {
        let s = self.value(a).iter().copied().sum();
        let ng = self.needs(a);
        self.push(1, 1, vec![s], Op::Sum(a), ng)
    }

    /// Mean negative log-softmax of `targets` over rows where `mask` is set.
    pub fn cross_entropy(&mut self, logits: Var, targets: &[usize], mask: &[bool]) -> Result<Var, AutodiffError> {
        let (r, c) = self.shape(logits);
        check("cross_entropy", targets.len() == r && mask.len() == r, (r, c), (targets.len(), mask.len()))?;
        let x = self.value(logits);
        let mut probs = vec![T::zero(); r * c];
        let mut total = T::zero();
        let mut count = 0;
        for i in 0..r {
            let row = &x[i * c..(i + 1) * c];
            let max = row.iter().copied().fold(T::neg_infinity(), T::max);
            let lse = row.iter().map(|&v| (v - max).exp()).sum::<T>().ln() + max;
            for (j, &v) in row.iter().enumerate() {
                probs[i * c + j] = (v - lse).exp();
            }
            if mask[i] {
                if targets[i] >= c {
                    return Err(AutodiffError::IndexOutOfRange { index: targets[i], len: c });
                }
                total += lse - row[targets[i]];
                count += 1;
            }
        }
        let loss = if count > 0 { total / T::of(count as f64) } else { T::zero() };
        let ng = self.needs(logits);
        Ok(self.push(
            1,
            1,
            vec![loss],
            Op::CrossEntropy {
                logits,
                targets: targets.to_vec(),
                mask: mask.to_vec(),
                probs,
                count,
            },
            ng,
        ))
    }

    /// Mean `-ln p[target]` over rows where `mask` is set, for rows that are
    /// already probability distributions.
    pub fn nll(&mut self, probs: Var, targets: &[usize], mask: &[bool]) -> Result<Var, AutodiffError> {
        let (r, c) = self.shape(probs);
        check("nll", targets.len() == r && mask.len() == r, (r, c), (targets.len(), mask.len()))?;
        let p = self.value(probs);
        let tiny = T::min_positive_value();
        let mut total = T::zero();
        let mut count = 0;
        for i in 0..r {
            if mask[i] {
                if targets[i] >= c {
                    return Err(AutodiffError::IndexOutOfRange { index: targets[i], len: c });
                }
                total -= p[i * c + targets[i]].max(tiny).ln();
                count += 1;
            }
        }
        let loss = if count > 0 { total / T::of(count as f64) } else { T::zero() };
        let ng = self.needs(probs);
        Ok(self.push(
            1,
            1,
            vec![loss],
            Op::Nll {
                probs,
                targets: targets.to_vec(),
                mask: mask.to_vec(),
                count,
            },
            ng,
        ))
    }

    /// Additive attention scores.
    ///
    /// `keys` stacks `L` position blocks of `B` rows each (`L*B x A`),
    /// `query` is `B x A` and `weight` is `1 x A`. Output is `B x L` with
    /// `score[b, l] = sum_a weight[a] * tanh(keys[l*B + b, a] + query[b, a])`.
    pub fn attn_scores(&mut self, keys: Var, query: Var, weight: Var) -> Result<Var, AutodiffError> {
        let (lb, a) = self.shape(keys);
        let (b, a2) = self.shape(query);
        check("attn_scores", a == a2 && b > 0 && lb % b == 0, (lb, a), (b, a2))?;
        check("attn_scores", self.shape(weight) == (1, a), (1, a), self.shape(weight))?;
        let l = lb / b;
        let (k, q, w) = (self.value(keys), self.value(query), self.value(weight));
        let mut activ = vec![T::zero(); lb * a];
        let mut out = vec![T::zero(); b * l];
        for pos in 0..l {
            for row in 0..b {
                let kr = &k[(pos * b + row) * a..(pos * b + row + 1) * a];
                let qr = &q[row * a..(row + 1) * a];
                let ar = &mut activ[(pos * b + row) * a..(pos * b + row + 1) * a];
                let mut s = T::zero();
                for j in 0..a {
                    let t = (kr[j] + qr[j]).tanh();
                    ar[j] = t;
                    s += w[j] * t;
                }
                out[row * l + pos] = s;
            }
        }
        let ng = self.needs(keys) || self.needs(query) || self.needs(weight);
        Ok(self.push(
            b,
            l,
            out,
            Op::AttnScores {
                keys,
                query,
                weight,
                activ,
            },
            ng,
        ))
    }

    /// `out[b] = sum_l weights[b, l] * values[l*B + b]`.
    pub fn attn_context(&mut self, weights: Var, values: Var) -> Result<Var, AutodiffError> {
        let (b, l) = self.shape(weights);
        let (lb, h) = self.shape(values);
        check("attn_context", lb == l * b, (b, l), (lb, h))?;
        let (w, v) = (self.value(weights), self.value(values));
        let mut out = vec![T::zero(); b * h];
        for row in 0..b {
            let orow = &mut out[row * h..(row + 1) * h];
            for pos in 0..l {
                let a = w[row * l + pos];
                if a == T::zero() {
                    continue;
                }
                let vr = &v[(pos * b + row) * h..(pos * b + row + 1) * h];
                for (o, &x) in orow.iter_mut().zip(vr) {
                    *o += a * x;
                }
            }
        }
        let ng = self.needs(weights) || self.needs(values);
        Ok(self.push(b, h, out, Op::AttnContext { weights, values }, ng))
    }

    /// Pointer-generator output distribution:
    /// `final[b, c] = p_gen[b] * vocab[b, c] + (1 - p_gen[b]) * sum_{l: ids[b, l] = c} attn[b, l]`.
    ///
    /// `ids` is row-major `B x L`, mapping source positions to output ids.
    pub fn pointer_mix(&mut self, vocab: Var, attn: Var, p_gen: Var, ids: &[usize]) -> Result<Var, AutodiffError> {
        let (b, v) = self.shape(vocab);
        let (b2, l) = self.shape(attn);
        check("pointer_mix", b == b2 && ids.len() == b * l, (b, v), (b2, l))?;
        check("pointer_mix", self.shape(p_gen) == (b, 1), (b, 1), self.shape(p_gen))?;
        if let Some(&bad) = ids.iter().find(|&&i| i >= v) {
            return Err(AutodiffError::IndexOutOfRange { index: bad, len: v });
        }
        let (vd, ad, pd) = (self.value(vocab), self.value(attn), self.value(p_gen));
        let mut out = vec![T::zero(); b * v];
        for row in 0..b {
            let p = pd[row];
            for c in 0..v {
                out[row * v + c] = p * vd[row * v + c];
            }
            for pos in 0..l {
                out[row * v + ids[row * l + pos]] += (T::one() - p) * ad[row * l + pos];
            }
        }
        let ng = self.needs(vocab) || self.needs(attn) || self.needs(p_gen);
        Ok(self.push(
            b,
            v,
            out,
            Op::PointerMix {
                vocab,
                attn,
                p_gen,
                ids: ids.to_vec(),
            },
            ng,
        ))
    }

    /// Reverse-mode pass from a `1 x 1` node.
    pub fn backward(&self, loss: Var) -> Result<Gradients<T>, AutodiffError> {
        if self.shape(loss) != (1, 1) {
            return Err(AutodiffError::NotScalar(self.shape(loss)));
        }
        let mut grads: Vec<Option<Vec<T>>> = (0..self.nodes.len()).map(|_| None).collect();
        let mut out = Gradients {
            grads: vec![None; self.store.len()],
        };
        grads[loss.0] = Some(vec![T::one()]);
        for i in (0..=loss.0).rev() {
            let Some(g) = grads[i].take() else { continue };
            let node = &self.nodes[i];
            if !node.needs_grad {
                continue;
            }
            self.backprop(node, &g, &mut grads, &mut out);
        }
        Ok(out)
    }

    fn backprop(&self, node: &Node<T>, g: &[T], grads: &mut [Option<Vec<T>>], out: &mut Gradients<T>) {
        let mut acc = |v: Var, f: &mut dyn FnMut(&mut [T])| {
            if !self.nodes[v.0].needs_grad {
                return;
            }
            let n = self.nodes[v.0].rows * self.nodes[v.0].cols;
            let slot = grads[v.0].get_or_insert_with(|| vec![T::zero(); n]);
            f(slot);
        };
        let (rows, cols) = (node.rows, node.cols);
        match &node.op {
            Op::Leaf => {}
            Op::Param(id) => {
                let slot = out.grads[id.0].get_or_insert_with(|| vec![T::zero(); g.len()]);
                for (s, &x) in slot.iter_mut().zip(g) {
                    *s += x;
                }
            }
            &Op::MatMul(a, b) => {
                let (r, n) = self.shape(a);
                let m = cols;
                let (av, bv) = (self.value(a), self.value(b));
                acc(a, &mut |da| {
                    for i in 0..r {
                        let grow = &g[i * m..(i + 1) * m];
                        for k in 0..n {
                            let brow = &bv[k * m..(k + 1) * m];
                            let mut s = T::zero();
                            for (&x, &y) in grow.iter().zip(brow) {
                                s += x * y;
                            }
                            da[i * n + k] += s;
                        }
                    }
                });
                acc(b, &mut |db| {
                    for i in 0..r {
                        let grow = &g[i * m..(i + 1) * m];
                        for k in 0..n {
                            let x = av[i * n + k];
                            if x == T::zero() {
                                continue;
                            }
                            for (d, &y) in db[k * m..(k + 1) * m].iter_mut().zip(grow) {
                                *d += x * y;
                            }
                        }
                    }
                });
            }
            &Op::Add(a, b) => {
                for v in [a, b] {
                    acc(v, &mut |d| d.iter_mut().zip(g).for_each(|(d, &x)| *d += x));
                }
            }
            &Op::AddRow(a, row) => {
                acc(a, &mut |d| d.iter_mut().zip(g).for_each(|(d, &x)| *d += x));
                acc(row, &mut |d| {
                    for (i, &x) in g.iter().enumerate() {
                        d[i % cols] += x;
                    }
                });
            }
            &Op::Mul(a, b) => {
                let (av, bv) = (self.value(a), self.value(b));
                acc(a, &mut |d| {
                    for i in 0..d.len() {
                        d[i] += g[i] * bv[i];
                    }
                });
                acc(b, &mut |d| {
                    for i in 0..d.len() {
                        d[i] += g[i] * av[i];
                    }
                });
            }
            &Op::MulCol(a, col) => {
                let (av, cv) = (self.value(a), self.value(col));
                acc(a, &mut |d| {
                    for i in 0..d.len() {
                        d[i] += g[i] * cv[i / cols];
                    }
                });
                acc(col, &mut |d| {
                    for i in 0..g.len() {
                        d[i / cols] += g[i] * av[i];
                    }
                });
            }
            &Op::Affine(a, scale) => acc(a, &mut |d| d.iter_mut().zip(g).for_each(|(d, &x)| *d += scale * x)),
            &Op::Sigmoid(a) => {
                let y = &node.value;
                acc(a, &mut |d| {
                    for i in 0..d.len() {
                        d[i] += g[i] * y[i] * (T::one() - y[i]);
                    }
                });
            }
            &Op::Tanh(a) => {
                let y = &node.value;
                acc(a, &mut |d| {
                    for i in 0..d.len() {
                        d[i] += g[i] * (T::one() - y[i] * y[i]);
                    }
                });
            }
            &Op::Log(a) => {
                let x = self.value(a);
                acc(a, &mut |d| {
                    for i in 0..d.len() {
                        d[i] += g[i] / x[i];
                    }
                });
            }
            &Op::Softmax(a, axis) => {
                let y = &node.value;
                let (ng, len, step, stride) = groups(rows, cols, axis);
                acc(a, &mut |d| {
                    for grp in 0..ng {
                        let base = grp * step;
                        let dot: T = (0..len).map(|k| base + k * stride).map(|i| y[i] * g[i]).sum();
                        for k in 0..len {
                            let i = base + k * stride;
                            d[i] += y[i] * (g[i] - dot);
                        }
                    }
                });
            }
            Op::Concat(parts, axis) => {
                let mut offset = 0;
                for &p in parts {
                    let (pr, pc) = self.shape(p);
                    match axis {
                        Axis::Cols => acc(p, &mut |d| {
                            for i in 0..pr {
                                for j in 0..pc {
                                    d[i * pc + j] += g[i * cols + offset + j];
                                }
                            }
                        }),
                        Axis::Rows => acc(p, &mut |d| {
                            for (d, &x) in d.iter_mut().zip(&g[offset * cols..(offset + pr) * cols]) {
                                *d += x;
                            }
                        }),
                    }
                    offset += if *axis == Axis::Cols { pc } else { pr };
                }
            }
            &Op::Slice(a, axis, start) => {
                let (_, ac) = self.shape(a);
                acc(a, &mut |d| match axis {
                    Axis::Cols => {
                        for i in 0..rows {
                            for j in 0..cols {
                                d[i * ac + start + j] += g[i * cols + j];
                            }
                        }
                    }
                    Axis::Rows => {
                        for (d, &x) in d[start * ac..(start + rows) * ac].iter_mut().zip(g) {
                            *d += x;
                        }
                    }
                });
            }
            Op::Embedding(table, ids) => acc(*table, &mut |d| {
                for (r, &id) in ids.iter().enumerate() {
                    for j in 0..cols {
                        d[id * cols + j] += g[r * cols + j];
                    }
                }
            }),
            Op::Dropout(a, mask) => acc(*a, &mut |d| {
                for i in 0..d.len() {
                    d[i] += g[i] * mask[i];
                }
            }),
            Op::Blend(new, old, mask) => {
                acc(*new, &mut |d| {
                    for (i, _) in mask.iter().enumerate().filter(|(_, &m)| m) {
                        for j in 0..cols {
                            d[i * cols + j] += g[i * cols + j];
                        }
                    }
                });
                acc(*old, &mut |d| {
                    for (i, _) in mask.iter().enumerate().filter(|(_, &m)| !m) {
                        for j in 0..cols {
                            d[i * cols + j] += g[i * cols + j];
                        }
                    }
                });
            }
            &Op::Sum(a) => acc(a, &mut |d| d.iter_mut().for_each(|d| *d += g[0])),
            Op::CrossEntropy {
                logits,
                targets,
                mask,
                probs,
                count,
            } => {
                if *count == 0 {
                    return;
                }
                let c = self.shape(*logits).1;
                let scale = g[0] / T::of(*count as f64);
                acc(*logits, &mut |d| {
                    for (i, &t) in targets.iter().enumerate() {
                        if !mask[i] {
                            continue;
                        }
                        for j in 0..c {
                            d[i * c + j] += scale * probs[i * c + j];
                        }
                        d[i * c + t] -= scale;
                    }
                });
            }
            Op::Nll {
                probs,
                targets,
                mask,
                count,
            } => {
                if *count == 0 {
                    return;
                }
                let c = self.shape(*probs).1;
                let p = self.value(*probs);
                let scale = g[0] / T::of(*count as f64);
                let tiny = T::min_positive_value();
                acc(*probs, &mut |d| {
                    for (i, &t) in targets.iter().enumerate() {
                        if mask[i] {
                            d[i * c + t] -= scale / p[i * c + t].max(tiny);
                        }
                    }
                });
            }
            Op::AttnScores {
                keys,
                query,
                weight,
                activ,
            } => {
                let (b, l) = (rows, cols);
                let a = self.shape(*query).1;
                let w = self.value(*weight);
                // d(score)/d(pre-activation), shared by keys and query
                let mut dpre = vec![T::zero(); l * b * a];
                for pos in 0..l {
                    for row in 0..b {
                        let gs = g[row * l + pos];
                        let base = (pos * b + row) * a;
                        for j in 0..a {
                            let t = activ[base + j];
                            dpre[base + j] = gs * w[j] * (T::one() - t * t);
                        }
                    }
                }
                acc(*keys, &mut |d| d.iter_mut().zip(&dpre).for_each(|(d, &x)| *d += x));
                acc(*query, &mut |d| {
                    for pos in 0..l {
                        for row in 0..b {
                            let base = (pos * b + row) * a;
                            for j in 0..a {
                                d[row * a + j] += dpre[base + j];
                            }
                        }
                    }
                });
                acc(*weight, &mut |d| {
                    for pos in 0..l {
                        for row in 0..b {
                            let gs = g[row * l + pos];
                            let base = (pos * b + row) * a;
                            for j in 0..a {
                                d[j] += gs * activ[base + j];
                            }
                        }
                    }
                });
            }
            &Op::AttnContext { weights, values } => {
                let (b, l) = self.shape(weights);
                let h = cols;
                let (w, v) = (self.value(weights), self.value(values));
                acc(weights, &mut |d| {
                    for row in 0..b {
                        let grow = &g[row * h..(row + 1) * h];
                        for pos in 0..l {
                            let vr = &v[(pos * b + row) * h..(pos * b + row + 1) * h];
                            d[row * l + pos] += grow.iter().zip(vr).map(|(&x, &y)| x * y).sum::<T>();
                        }
                    }
                });
                acc(values, &mut |d| {
                    for row in 0..b {
                        let grow = &g[row * h..(row + 1) * h];
                        for pos in 0..l {
                            let a = w[row * l + pos];
                            for (dv, &x) in d[(pos * b + row) * h..(pos * b + row + 1) * h].iter_mut().zip(grow) {
                                *dv += a * x;
                            }
                        }
                    }
                });
            }
            Op::PointerMix {
                vocab,
                attn,
                p_gen,
                ids,
            } => {
                let (b, v) = (rows, cols);
                let l = self.shape(*attn).1;
                let (vd, ad, pd) = (self.value(*vocab), self.value(*attn), self.value(*p_gen));
                acc(*vocab, &mut |d| {
                    for row in 0..b {
                        for c in 0..v {
                            d[row * v + c] += g[row * v + c] * pd[row];
                        }
                    }
                });
                acc(*attn, &mut |d| {
                    for row in 0..b {
                        for pos in 0..l {
                            d[row * l + pos] += g[row * v + ids[row * l + pos]] * (T::one() - pd[row]);
                        }
                    }
                });
                acc(*p_gen, &mut |d| {
                    for row in 0..b {
                        let mut s: T = (0..v).map(|c| g[row * v + c] * vd[row * v + c]).sum();
                        for pos in 0..l {
                            s -= g[row * v + ids[row * l + pos]] * ad[row * l + pos];
                        }
                        d[row] += s;
                    }
                });
            }
        }
    }
}
