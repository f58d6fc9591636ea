//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use fashion_parser::nn::{CrfParams, Parameters};
use ndarray::{Array1, Array2, ArrayView2};
use rand::Rng;

/// Exhaustive path enumeration over a linear-chain CRF.
pub struct BruteForce {
    pub log_z: f64,
    pub marginals: Array2<f64>,
    pub best_score: f64,
    pub best_paths: Vec<Vec<usize>>,
}

fn score(crf: &CrfParams, em: ArrayView2<f64>, path: &[usize]) -> f64 {
    let mut s = crf.start[path[0]] + crf.stop[*path.last().unwrap()];
    for t in 0..path.len() {
        s += em[[t, path[t]]];
        if t > 0 {
            s += crf.transitions[[path[t - 1], path[t]]];
        }
    }
    s
}

pub fn brute_force(crf: &CrfParams, em: ArrayView2<f64>) -> BruteForce {
    let (steps, k) = em.dim();
    let total = k.pow(steps as u32);
    let mut scores = Vec::with_capacity(total);
    let mut paths = Vec::with_capacity(total);
    for code in 0..total {
        let mut c = code;
        let path: Vec<usize> = (0..steps)
            .map(|_| {
                let y = c % k;
                c /= k;
                y
            })
            .collect();
        scores.push(score(crf, em, &path));
        paths.push(path);
    }
    let best_score = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let log_z = best_score + scores.iter().map(|s| (s - best_score).exp()).sum::<f64>().ln();
    let mut marginals = Array2::zeros((steps, k));
    for (p, s) in paths.iter().zip(&scores) {
        let w = (s - log_z).exp();
        for (t, &y) in p.iter().enumerate() {
            marginals[[t, y]] += w;
        }
    }
    let best_paths = paths
        .into_iter()
        .zip(&scores)
        .filter(|(_, &s)| s == best_score)
        .map(|(p, _)| p)
        .collect();
    BruteForce {
        log_z,
        marginals,
        best_score,
        best_paths,
    }
}

pub fn uniform<R: Rng>(rng: &mut R, shape: (usize, usize), scale: f64) -> Array2<f64> {
    Array2::from_shape_simple_fn(shape, || rng.random_range(-scale..scale))
}

pub fn uniform1<R: Rng>(rng: &mut R, n: usize, scale: f64) -> Array1<f64> {
    Array1::from_shape_simple_fn(n, || rng.random_range(-scale..scale))
}

pub fn random_crf<R: Rng>(rng: &mut R, k: usize, scale: f64) -> CrfParams {
    CrfParams {
        transitions: uniform(rng, (k, k), scale),
        start: uniform1(rng, k, scale),
        stop: uniform1(rng, k, scale),
    }
}

/// `|a - b| / max(|a|, |b|, floor)`.
pub fn rel_err(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}

/// Largest relative error between analytic gradients and central
/// differences of `loss` over every parameter of `p`.
pub fn max_param_error<P: Parameters + Clone>(p: &P, analytic: &P, loss: impl Fn(&P) -> f64, h: f64) -> f64 {
    let mut worst: f64 = 0.0;
    let grads: Vec<Vec<f64>> = analytic.tensors().into_iter().map(|t| t.to_vec()).collect();
    for (ti, g) in grads.iter().enumerate() {
        for j in 0..g.len() {
            let mut plus = p.clone();
            plus.tensors_mut()[ti][j] += h;
            let mut minus = p.clone();
            minus.tensors_mut()[ti][j] -= h;
            let numeric = (loss(&plus) - loss(&minus)) / (2.0 * h);
            worst = worst.max(rel_err(g[j], numeric, 1e-4));
        }
    }
    worst
}

/// Same check for a plain matrix input.
pub fn max_array_error(x: &Array2<f64>, analytic: &Array2<f64>, loss: impl Fn(&Array2<f64>) -> f64, h: f64) -> f64 {
    let mut worst: f64 = 0.0;
    for idx in ndarray::indices(x.dim()) {
        let mut plus = x.clone();
        plus[idx] += h;
        let mut minus = x.clone();
        minus[idx] -= h;
        let numeric = (loss(&plus) - loss(&minus)) / (2.0 * h);
        worst = worst.max(rel_err(analytic[idx], numeric, 1e-4));
    }
    worst
}

const OPEN: i32 = i32::MIN;

/// Single-rooted projective trees over `lo..hi`; the subtree root's head is
/// left as `OPEN`.
fn trees(lo: usize, hi: usize) -> Vec<Vec<i32>> {
    let mut out = Vec::new();
    for r in lo..hi {
        for left in forests(lo, r) {
            for right in forests(r + 1, hi) {
                let mut heads: Vec<i32> = left.iter().map(|&h| if h == OPEN { r as i32 } else { h }).collect();
                heads.push(OPEN);
                heads.extend(right.iter().map(|&h| if h == OPEN { r as i32 } else { h }));
                out.push(heads);
            }
        }
    }
    out
}

/// Sequences of adjacent subtrees covering `lo..hi`.
fn forests(lo: usize, hi: usize) -> Vec<Vec<i32>> {
    if lo == hi {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for split in lo + 1..=hi {
        for t in trees(lo, split) {
            for f in forests(split, hi) {
                let mut v = t.clone();
                v.extend(f);
                out.push(v);
            }
        }
    }
    out
}

/// Every single-rooted projective tree on `n` tokens, root head `-1`.
pub fn all_projective_trees(n: usize) -> Vec<Vec<i32>> {
    trees(0, n)
        .into_iter()
        .map(|t| t.into_iter().map(|h| if h == OPEN { -1 } else { h }).collect())
        .collect()
}

/// Trees the per-token labels can encode exactly: tokens before the root
/// head their right neighbour; tokens after it head either their right
/// neighbour or the root.
pub fn is_canonical(heads: &[i32]) -> bool {
    let root = heads.iter().position(|&h| h == -1).unwrap() as i32;
    heads.iter().enumerate().all(|(i, &h)| {
        let i = i as i32;
        if i < root {
            h == i + 1
        } else if i > root {
            h == i + 1 || h == root
        } else {
            true
        }
    })
}

/// Independent single-rooted projectivity check by arc crossing.
pub fn is_projective_tree(heads: &[i32]) -> bool {
    let n = heads.len() as i32;
    if n == 0 || heads.iter().filter(|&&h| h == -1).count() != 1 {
        return false;
    }
    if heads
        .iter()
        .enumerate()
        .any(|(i, &h)| h == i as i32 || h < -1 || h >= n)
    {
        return false;
    }
    // acyclic: walking up from any token reaches the root within n steps
    for i in 0..n {
        let mut cur = i;
        let mut steps = 0;
        while cur != -1 {
            cur = heads[cur as usize];
            steps += 1;
            if steps > n {
                return false;
            }
        }
    }
    let arcs: Vec<(i32, i32)> = heads
        .iter()
        .enumerate()
        .filter(|(_, &h)| h >= 0)
        .map(|(d, &h)| (h.min(d as i32), h.max(d as i32)))
        .collect();
    let root = heads.iter().position(|&h| h == -1).unwrap() as i32;
    for &(a, b) in &arcs {
        // the root arc spans the whole sentence from outside
        if a < root && root < b {
            return false;
        }
        for &(c, d) in &arcs {
            if a < c && c < b && b < d {
                return false;
            }
        }
    }
    true
}
