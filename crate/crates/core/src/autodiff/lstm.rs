use super::{AutodiffError, Axis, Graph, Real, Var};

/// Graph handles for one LSTM layer (one direction). Gates are packed in
/// the order input, forget, candidate, output.
#[derive(Debug, Clone, Copy)]
pub struct LstmWeights {
    /// `in x 4H`
    pub w_ih: Var,
    /// `H x 4H`
    pub w_hh: Var,
    /// `1 x 4H`
    pub bias: Var,
}

/// One step of a standard LSTM cell; returns `(h_t, c_t)`.
pub fn lstm_cell<T: Real>(g: &mut Graph<'_, T>, x: Var, h_prev: Var, c_prev: Var, w: &LstmWeights) -> Result<(Var, Var), AutodiffError> {
    let hid = g.shape(h_prev).1;
    let (_, four) = g.shape(w.w_hh);
    if four != 4 * hid || g.shape(c_prev) != g.shape(h_prev) {
        return Err(AutodiffError::ShapeMismatch {
            op: "lstm_cell",
            left: g.shape(h_prev),
            right: g.shape(w.w_hh),
        });
    }
    let xi = g.matmul(x, w.w_ih)?;
    let hh = g.matmul(h_prev, w.w_hh)?;
    let pre = g.add(xi, hh)?;
    let pre = g.add_row(pre, w.bias)?;
    let i = g.slice(pre, Axis::Cols, 0, hid)?;
    let f = g.slice(pre, Axis::Cols, hid, hid)?;
    let c_hat = g.slice(pre, Axis::Cols, 2 * hid, hid)?;
    let o = g.slice(pre, Axis::Cols, 3 * hid, hid)?;
    let i = g.sigmoid(i);
    let f = g.sigmoid(f);
    let c_hat = g.tanh(c_hat);
    let o = g.sigmoid(o);
    let keep = g.mul(f, c_prev)?;
    let write = g.mul(i, c_hat)?;
    let c = g.add(keep, write)?;
    let tc = g.tanh(c);
    let h = g.mul(o, tc)?;
    Ok((h, c))
}
