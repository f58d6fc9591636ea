//! LSTM and bidirectional LSTM encoders with backpropagation through time.
//!
//! Gate pre-activations are packed in the order input, forget, cell, output:
//! `z_t = x_t W + h_{t-1} U + b` with `W: d_in x 4h`, `U: h x 4h`, `b: 4h`.
//! Gates use [`hard_sigmoid`], the cell candidate and output use `tanh`.

use std::ops::Range;

use ndarray::{s, Array1, Array2, ArrayView2, Axis};
use rand::Rng;

use super::activation::{hard_sigmoid, hard_sigmoid_grad};
use super::init::{glorot_uniform, orthogonal_blocks};
use super::params::Parameters;
use crate::error::{Error, Result};

const GATES: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct LstmParams {
    pub w: Array2<f64>,
    pub u: Array2<f64>,
    pub b: Array1<f64>,
}

impl LstmParams {
    pub fn zeros(input_dim: usize, hidden: usize) -> Self {
        LstmParams {
            w: Array2::zeros((input_dim, GATES * hidden)),
            u: Array2::zeros((hidden, GATES * hidden)),
            b: Array1::zeros(GATES * hidden),
        }
    }

    /// Glorot-uniform input weights, orthogonal recurrent blocks, zero biases
    /// except a forget-gate bias of 1.
    pub fn init<R: Rng>(input_dim: usize, hidden: usize, rng: &mut R) -> Self {
        let mut b = Array1::zeros(GATES * hidden);
        b.slice_mut(s![hidden..2 * hidden]).fill(1.0);
        LstmParams {
            w: glorot_uniform(input_dim, GATES * hidden, rng),
            u: orthogonal_blocks(hidden, GATES, rng),
            b,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.w.nrows()
    }

    pub fn hidden(&self) -> usize {
        self.u.nrows()
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(self.input_dim(), self.hidden())
    }

    pub fn check(&self) -> Result<()> {
        let h = self.hidden();
        if self.w.ncols() != GATES * h || self.u.ncols() != GATES * h || self.b.len() != GATES * h {
            return Err(Error::Shape(format!(
                "inconsistent LSTM shapes W {:?}, U {:?}, b {}",
                self.w.dim(),
                self.u.dim(),
                self.b.len()
            )));
        }
        Ok(())
    }
}

impl Parameters for LstmParams {
    fn tensors(&self) -> Vec<&[f64]> {
        vec![
            self.w.as_slice().expect("standard layout"),
            self.u.as_slice().expect("standard layout"),
            self.b.as_slice().expect("standard layout"),
        ]
    }

    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        vec![
            self.w.as_slice_mut().expect("standard layout"),
            self.u.as_slice_mut().expect("standard layout"),
            self.b.as_slice_mut().expect("standard layout"),
        ]
    }
}

/// Intermediates of one forward pass, kept for BPTT.
#[derive(Debug, Clone)]
pub struct LstmCache {
    pub x: Array2<f64>,
    /// Gate pre-activations, `T x 4h`.
    pub pre: Array2<f64>,
    /// Activated gates, `T x 4h`.
    pub gates: Array2<f64>,
    pub c: Array2<f64>,
    pub tanh_c: Array2<f64>,
    /// Hidden outputs, `T x h`.
    pub h: Array2<f64>,
}

impl LstmCache {
    pub fn output(&self) -> &Array2<f64> {
        &self.h
    }
}

/// Runs the recurrence from zero initial state over the rows of `x`.
pub fn lstm_forward(p: &LstmParams, x: ArrayView2<f64>) -> Result<LstmCache> {
    p.check()?;
    let steps = x.nrows();
    if steps == 0 {
        return Err(Error::Shape("empty input sequence".into()));
    }
    if x.ncols() != p.input_dim() {
        return Err(Error::Shape(format!(
            "input width {} does not match LSTM input {}",
            x.ncols(),
            p.input_dim()
        )));
    }
    let h = p.hidden();
    let g4 = GATES * h;
    let mut pre = x.dot(&p.w);
    pre += &p.b;
    let mut gates = Array2::zeros((steps, g4));
    let mut c = Array2::zeros((steps, h));
    let mut tanh_c = Array2::zeros((steps, h));
    let mut hs = Array2::<f64>::zeros((steps, h));

    let u = p.u.as_slice().expect("standard layout");
    let pre_s = pre.as_slice_mut().expect("standard layout");
    let gates_s = gates.as_slice_mut().expect("standard layout");
    let c_s = c.as_slice_mut().expect("standard layout");
    let tc_s = tanh_c.as_slice_mut().expect("standard layout");
    let h_s = hs.as_slice_mut().expect("standard layout");

    for t in 0..steps {
        let z = &mut pre_s[t * g4..(t + 1) * g4];
        if t > 0 {
            let h_prev = &h_s[(t - 1) * h..t * h];
            for (k, &hk) in h_prev.iter().enumerate() {
                if hk != 0.0 {
                    for (zj, uj) in z.iter_mut().zip(&u[k * g4..(k + 1) * g4]) {
                        *zj += hk * uj;
                    }
                }
            }
        }
        let a = &mut gates_s[t * g4..(t + 1) * g4];
        for k in 0..h {
            let i = hard_sigmoid(z[k]);
            let f = hard_sigmoid(z[h + k]);
            let g = z[2 * h + k].tanh();
            let o = hard_sigmoid(z[3 * h + k]);
            a[k] = i;
            a[h + k] = f;
            a[2 * h + k] = g;
            a[3 * h + k] = o;
            let c_prev = if t > 0 { c_s[(t - 1) * h + k] } else { 0.0 };
            let ct = f * c_prev + i * g;
            let tc = ct.tanh();
            c_s[t * h + k] = ct;
            tc_s[t * h + k] = tc;
            h_s[t * h + k] = o * tc;
        }
    }

    Ok(LstmCache {
        x: x.to_owned(),
        pre,
        gates,
        c,
        tanh_c,
        h: hs,
    })
}

/// Backpropagates `dh` (gradient of the loss wrt every hidden output) through
/// the cached pass. Returns parameter gradients and the input gradient
/// restricted to the columns in `dx_cols`.
pub fn bptt_backward(
    p: &LstmParams,
    cache: &LstmCache,
    dh: ArrayView2<f64>,
    dx_cols: Range<usize>,
) -> (LstmParams, Array2<f64>) {
    let steps = cache.h.nrows();
    let h = p.hidden();
    let g4 = GATES * h;
    assert_eq!(dh.dim(), (steps, h), "upstream gradient shape");

    let mut dz = Array2::<f64>::zeros((steps, g4));
    let mut dh_next = vec![0.0; h];
    let mut dc_next = vec![0.0; h];
    let u = p.u.as_slice().expect("standard layout");
    let pre = cache.pre.as_slice().expect("standard layout");
    let gates = cache.gates.as_slice().expect("standard layout");
    let c = cache.c.as_slice().expect("standard layout");
    let tanh_c = cache.tanh_c.as_slice().expect("standard layout");
    let dz_s = dz.as_slice_mut().expect("standard layout");

    for t in (0..steps).rev() {
        let z = &pre[t * g4..(t + 1) * g4];
        let a = &gates[t * g4..(t + 1) * g4];
        let dzt = &mut dz_s[t * g4..(t + 1) * g4];
        for k in 0..h {
            let dht = dh[[t, k]] + dh_next[k];
            let (i, f, g, o) = (a[k], a[h + k], a[2 * h + k], a[3 * h + k]);
            let tc = tanh_c[t * h + k];
            let d_o = dht * tc;
            let dc = dc_next[k] + dht * o * (1.0 - tc * tc);
            let c_prev = if t > 0 { c[(t - 1) * h + k] } else { 0.0 };
            dc_next[k] = dc * f;
            dzt[k] = dc * g * hard_sigmoid_grad(z[k]);
            dzt[h + k] = dc * c_prev * hard_sigmoid_grad(z[h + k]);
            dzt[2 * h + k] = dc * i * (1.0 - g * g);
            dzt[3 * h + k] = d_o * hard_sigmoid_grad(z[3 * h + k]);
        }
        for (k, dn) in dh_next.iter_mut().enumerate() {
            *dn = u[k * g4..(k + 1) * g4].iter().zip(dzt.iter()).map(|(a, b)| a * b).sum();
        }
    }

    let dw = cache.x.t().dot(&dz);
    let du = if steps > 1 {
        cache.h.slice(s![..steps - 1, ..]).t().dot(&dz.slice(s![1.., ..]))
    } else {
        Array2::zeros((h, g4))
    };
    let db = dz.sum_axis(Axis(0));
    let dx = if dx_cols.is_empty() {
        Array2::zeros((steps, 0))
    } else {
        dz.dot(&p.w.slice(s![dx_cols, ..]).t())
    };
    (LstmParams { w: dw, u: du, b: db }, dx)
}

fn reverse_rows(x: ArrayView2<f64>) -> Array2<f64> {
    x.slice(s![..;-1, ..]).to_owned()
}

/// Caches of both directions; the backward cache runs on the reversed input.
#[derive(Debug, Clone)]
pub struct BiLstmCache {
    pub fwd: LstmCache,
    pub bwd: LstmCache,
}

/// Time-aligned concatenation `[fwd_t | bwd_t]` of a forward pass and a pass
/// over the reversed sequence.
pub fn bilstm_forward(fwd: &LstmParams, bwd: &LstmParams, x: ArrayView2<f64>) -> Result<(Array2<f64>, BiLstmCache)> {
    let cf = lstm_forward(fwd, x)?;
    let cb = lstm_forward(bwd, reverse_rows(x).view())?;
    let (hf, hb) = (fwd.hidden(), bwd.hidden());
    let mut out = Array2::zeros((x.nrows(), hf + hb));
    out.slice_mut(s![.., ..hf]).assign(&cf.h);
    out.slice_mut(s![.., hf..]).assign(&cb.h.slice(s![..;-1, ..]));
    Ok((out, BiLstmCache { fwd: cf, bwd: cb }))
}

pub fn bilstm_backward(
    fwd: &LstmParams,
    bwd: &LstmParams,
    cache: &BiLstmCache,
    dout: ArrayView2<f64>,
    dx_cols: Range<usize>,
) -> (LstmParams, LstmParams, Array2<f64>) {
    let hf = fwd.hidden();
    let (gf, dxf) = bptt_backward(fwd, &cache.fwd, dout.slice(s![.., ..hf]), dx_cols.clone());
    let db_rev = reverse_rows(dout.slice(s![.., hf..]));
    let (gb, dxb) = bptt_backward(bwd, &cache.bwd, db_rev.view(), dx_cols);
    let dx = dxf + dxb.slice(s![..;-1, ..]);
    (gf, gb, dx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_params(d: usize, h: usize, scale: f64, seed: u64) -> LstmParams {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut p = LstmParams::zeros(d, h);
        for t in p.tensors_mut() {
            for v in t.iter_mut() {
                *v = rng.random_range(-scale..scale);
            }
        }
        p
    }

    fn random_input(t: usize, d: usize, seed: u64) -> Array2<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Array2::from_shape_simple_fn((t, d), || rng.random_range(-1.0..1.0))
    }

    #[test]
    fn zero_weights_give_zero_outputs() {
        let p = LstmParams::zeros(3, 4);
        let cache = lstm_forward(&p, random_input(5, 3, 1).view()).unwrap();
        assert!(cache.h.iter().all(|&v| v == 0.0));
        assert!(cache.gates.slice(s![.., ..4]).iter().all(|&v| v == 0.5));
    }

    #[test]
    fn single_step_matches_scalar_recomputation() {
        let p = random_params(3, 2, 0.5, 3);
        let x = random_input(1, 3, 4);
        let out = lstm_forward(&p, x.view()).unwrap().h;
        let hs = |v: f64| (0.2 * v + 0.5).clamp(0.0, 1.0);
        for k in 0..2 {
            let z = |gate: usize| {
                let col = gate * 2 + k;
                (0..3).map(|j| x[[0, j]] * p.w[[j, col]]).sum::<f64>() + p.b[col]
            };
            let c = hs(z(0)) * z(2).tanh();
            let want = hs(z(3)) * c.tanh();
            assert!((out[[0, k]] - want).abs() < 1e-14);
        }
    }

    #[test]
    fn shape_errors() {
        let p = LstmParams::zeros(3, 2);
        assert!(lstm_forward(&p, Array2::zeros((0, 3)).view()).is_err());
        assert!(lstm_forward(&p, Array2::zeros((2, 4)).view()).is_err());
    }

    #[test]
    fn bilstm_is_two_composed_passes() {
        let f = random_params(3, 2, 0.5, 5);
        let b = random_params(3, 3, 0.5, 6);
        let x = random_input(4, 3, 7);
        let (out, _) = bilstm_forward(&f, &b, x.view()).unwrap();
        let hf = lstm_forward(&f, x.view()).unwrap().h;
        let xr = reverse_rows(x.view());
        let hb = lstm_forward(&b, xr.view()).unwrap().h;
        for t in 0..4 {
            for k in 0..2 {
                assert_eq!(out[[t, k]], hf[[t, k]]);
            }
            for k in 0..3 {
                assert_eq!(out[[t, 2 + k]], hb[[3 - t, k]]);
            }
        }
    }

    #[test]
    fn bilstm_palindrome_symmetry() {
        let f = random_params(2, 3, 0.5, 8);
        let x = ndarray::array![[0.1, 0.2], [0.3, -0.4], [0.1, 0.2]];
        let (out, _) = bilstm_forward(&f, &f, x.view()).unwrap();
        for t in 0..3 {
            for k in 0..3 {
                assert!((out[[t, k]] - out[[2 - t, 3 + k]]).abs() < 1e-15);
            }
        }
        let one = x.slice(s![..1, ..]);
        let (o1, _) = bilstm_forward(&f, &f, one).unwrap();
        assert_eq!(o1[[0, 0]], o1[[0, 3]]);
    }

    #[test]
    fn zero_upstream_gradient_gives_zero_gradients() {
        let p = random_params(3, 2, 0.5, 9);
        let cache = lstm_forward(&p, random_input(4, 3, 10).view()).unwrap();
        let (g, dx) = bptt_backward(&p, &cache, Array2::zeros((4, 2)).view(), 0..3);
        assert!(g.tensors().iter().all(|t| t.iter().all(|&v| v == 0.0)));
        assert!(dx.iter().all(|&v| v == 0.0));
    }
}
