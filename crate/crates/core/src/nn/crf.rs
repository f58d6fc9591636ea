//! Linear-chain conditional random field with exact inference.
//!
//! The score of a label path `y` over emissions `E` (`T x K`) is
//! `start[y_0] + sum_t E[t, y_t] + sum_t trans[y_{t-1}, y_t] + stop[y_{T-1}]`.

use ndarray::{Array1, Array2, ArrayView2};

use super::activation::log_sum_exp;
use super::params::Parameters;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CrfParams {
    /// `trans[i, j]` scores label `i` followed by label `j`.
    pub transitions: Array2<f64>,
    pub start: Array1<f64>,
    pub stop: Array1<f64>,
}

impl CrfParams {
    pub fn zeros(num_labels: usize) -> Self {
        CrfParams {
            transitions: Array2::zeros((num_labels, num_labels)),
            start: Array1::zeros(num_labels),
            stop: Array1::zeros(num_labels),
        }
    }

    pub fn num_labels(&self) -> usize {
        self.start.len()
    }

    fn check(&self, em: &ArrayView2<f64>) {
        let k = self.num_labels();
        assert!(em.nrows() >= 1, "CRF needs at least one time step");
        assert_eq!(em.ncols(), k, "emission width must equal label count");
        assert_eq!(self.transitions.dim(), (k, k), "transition matrix shape");
        assert_eq!(self.stop.len(), k, "stop vector length");
    }

    /// Score of one label path.
    pub fn path_score(&self, em: ArrayView2<f64>, labels: &[usize]) -> f64 {
        let mut s = self.start[labels[0]] + self.stop[labels[labels.len() - 1]];
        for (t, &y) in labels.iter().enumerate() {
            s += em[[t, y]];
            if t > 0 {
                s += self.transitions[[labels[t - 1], y]];
            }
        }
        s
    }

    /// Forward log-messages: `alpha[t, j]` sums all prefixes ending in `j` at
    /// `t`, emissions at `t` included.
    fn alpha(&self, em: &ArrayView2<f64>) -> Array2<f64> {
        let (steps, k) = em.dim();
        let mut alpha = Array2::zeros((steps, k));
        for j in 0..k {
            alpha[[0, j]] = self.start[j] + em[[0, j]];
        }
        let mut buf = vec![0.0; k];
        for t in 1..steps {
            for j in 0..k {
                for (i, b) in buf.iter_mut().enumerate() {
                    *b = alpha[[t - 1, i]] + self.transitions[[i, j]];
                }
                alpha[[t, j]] = em[[t, j]] + log_sum_exp(&buf);
            }
        }
        alpha
    }

    /// Backward log-messages: `beta[t, i]` sums all suffixes after `t` given
    /// label `i` at `t`, stop score included.
    fn beta(&self, em: &ArrayView2<f64>) -> Array2<f64> {
        let (steps, k) = em.dim();
        let mut beta = Array2::zeros((steps, k));
        for i in 0..k {
            beta[[steps - 1, i]] = self.stop[i];
        }
        let mut buf = vec![0.0; k];
        for t in (0..steps - 1).rev() {
            for i in 0..k {
                for (j, b) in buf.iter_mut().enumerate() {
                    *b = self.transitions[[i, j]] + em[[t + 1, j]] + beta[[t + 1, j]];
                }
                beta[[t, i]] = log_sum_exp(&buf);
            }
        }
        beta
    }

    /// `log` of the sum of `exp(score)` over all `K^T` label paths.
    pub fn log_partition(&self, em: ArrayView2<f64>) -> f64 {
        self.check(&em);
        let alpha = self.alpha(&em);
        let last = alpha.nrows() - 1;
        let fin: Vec<f64> = (0..self.num_labels())
            .map(|j| alpha[[last, j]] + self.stop[j])
            .collect();
        log_sum_exp(&fin)
    }

    /// Per-step label marginals by forward-backward.
    pub fn marginals(&self, em: ArrayView2<f64>) -> Array2<f64> {
        self.check(&em);
        let alpha = self.alpha(&em);
        let beta = self.beta(&em);
        let log_z = self.log_partition(em);
        let mut m = &alpha + &beta;
        m.mapv_inplace(|v| (v - log_z).exp());
        m
    }

    /// Highest-scoring path and its score. Ties resolve toward the lower
    /// label index.
    pub fn viterbi(&self, em: ArrayView2<f64>) -> (Vec<usize>, f64) {
        self.check(&em);
        let (steps, k) = em.dim();
        let mut score: Vec<f64> = (0..k).map(|j| self.start[j] + em[[0, j]]).collect();
        let mut back = vec![vec![0usize; k]; steps];
        for t in 1..steps {
            let mut next = vec![0.0; k];
            for j in 0..k {
                let mut best = 0;
                let mut best_s = score[0] + self.transitions[[0, j]];
                for (i, &s) in score.iter().enumerate().skip(1) {
                    let cand = s + self.transitions[[i, j]];
                    if cand > best_s {
                        best_s = cand;
                        best = i;
                    }
                }
                back[t][j] = best;
                next[j] = best_s + em[[t, j]];
            }
            score = next;
        }
        let mut best = 0;
        let mut best_s = score[0] + self.stop[0];
        for (j, &s) in score.iter().enumerate().skip(1) {
            if s + self.stop[j] > best_s {
                best_s = s + self.stop[j];
                best = j;
            }
        }
        let mut path = vec![best; steps];
        for t in (1..steps).rev() {
            path[t - 1] = back[t][path[t]];
        }
        (path, best_s)
    }

    /// Negative log-likelihood of `gold` and its gradients.
    pub fn nll_grad(&self, em: ArrayView2<f64>, gold: &[usize]) -> Result<CrfLoss> {
        self.check(&em);
        let (steps, k) = em.dim();
        if gold.len() != steps {
            return Err(Error::Shape(format!(
                "{} gold labels for {steps} time steps",
                gold.len()
            )));
        }
        if let Some(&bad) = gold.iter().find(|&&y| y >= k) {
            return Err(Error::Label(format!("gold label {bad} outside 0..{k}")));
        }
        let alpha = self.alpha(&em);
        let beta = self.beta(&em);
        let fin: Vec<f64> = (0..k).map(|j| alpha[[steps - 1, j]] + self.stop[j]).collect();
        let log_z = log_sum_exp(&fin);
        let loss = log_z - self.path_score(em, gold);

        let mut d_em = &alpha + &beta;
        d_em.mapv_inplace(|v| (v - log_z).exp());
        let mut grad = CrfParams::zeros(k);
        grad.start.assign(&d_em.row(0));
        grad.stop.assign(&d_em.row(steps - 1));
        grad.start[gold[0]] -= 1.0;
        grad.stop[gold[steps - 1]] -= 1.0;
        for t in 1..steps {
            for i in 0..k {
                let a = alpha[[t - 1, i]];
                for j in 0..k {
                    let pair = a + self.transitions[[i, j]] + em[[t, j]] + beta[[t, j]] - log_z;
                    grad.transitions[[i, j]] += pair.exp();
                }
            }
            grad.transitions[[gold[t - 1], gold[t]]] -= 1.0;
        }
        for (t, &y) in gold.iter().enumerate() {
            d_em[[t, y]] -= 1.0;
        }
        Ok(CrfLoss {
            loss,
            d_emissions: d_em,
            grad,
        })
    }
}

impl Parameters for CrfParams {
    fn tensors(&self) -> Vec<&[f64]> {
        vec![
            self.transitions.as_slice().expect("standard layout"),
            self.start.as_slice().expect("standard layout"),
            self.stop.as_slice().expect("standard layout"),
        ]
    }

    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        vec![
            self.transitions.as_slice_mut().expect("standard layout"),
            self.start.as_slice_mut().expect("standard layout"),
            self.stop.as_slice_mut().expect("standard layout"),
        ]
    }
}

/// Loss and gradients of one sequence.
#[derive(Debug, Clone)]
pub struct CrfLoss {
    pub loss: f64,
    pub d_emissions: Array2<f64>,
    pub grad: CrfParams,
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn single_step_partition_is_log_sum_exp() {
        let crf = CrfParams::zeros(3);
        let em = array![[0.5, -1.0, 2.0]];
        let want = log_sum_exp(&[0.5, -1.0, 2.0]);
        assert!((crf.log_partition(em.view()) - want).abs() < 1e-14);
        let m = crf.marginals(em.view());
        let z: f64 = [0.5f64, -1.0, 2.0].iter().map(|v| v.exp()).sum();
        assert!((m[[0, 2]] - 2f64.exp() / z).abs() < 1e-14);
        assert_eq!(crf.viterbi(em.view()).0, vec![2]);
    }

    #[test]
    fn uniform_scores() {
        let crf = CrfParams::zeros(4);
        let em = Array2::zeros((3, 4));
        assert!((crf.log_partition(em.view()) - 3.0 * 4f64.ln()).abs() < 1e-12);
        let l = crf.nll_grad(Array2::zeros((2, 4)).view(), &[1, 3]).unwrap();
        assert!((l.loss - 2.0 * 4f64.ln()).abs() < 1e-12);
        // all ties: lowest index everywhere
        assert_eq!(crf.viterbi(em.view()), (vec![0, 0, 0], 0.0));
    }

    #[test]
    fn zero_transitions_factorize() {
        let crf = CrfParams::zeros(3);
        let em = array![[1.0, 0.0, -1.0], [0.0, 3.0, 1.0]];
        assert_eq!(crf.viterbi(em.view()).0, vec![0, 1]);
        let m = crf.marginals(em.view());
        for t in 0..2 {
            let z: f64 = em.row(t).iter().map(|v| v.exp()).sum();
            for k in 0..3 {
                assert!((m[[t, k]] - em[[t, k]].exp() / z).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn peaked_gold_has_small_loss() {
        let crf = CrfParams::zeros(3);
        let em = array![[50.0, 0.0, 0.0], [0.0, 0.0, 50.0]];
        let l = crf.nll_grad(em.view(), &[0, 2]).unwrap();
        assert!(l.loss >= 0.0 && l.loss < 1e-20);
    }

    #[test]
    fn gold_out_of_range_is_error() {
        let crf = CrfParams::zeros(3);
        assert!(matches!(
            crf.nll_grad(Array2::zeros((2, 3)).view(), &[0, 3]),
            Err(Error::Label(_))
        ));
        assert!(crf.nll_grad(Array2::zeros((2, 3)).view(), &[0]).is_err());
    }
}
