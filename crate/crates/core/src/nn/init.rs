use ndarray::{s, Array2};
use rand::Rng;
use rand_distr::StandardNormal;

/// Uniform in `±sqrt(6 / (fan_in + fan_out))`.
pub fn glorot_uniform<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> Array2<f64> {
    let limit = (6.0 / (rows + cols) as f64).sqrt();
    Array2::from_shape_simple_fn((rows, cols), || rng.random_range(-limit..limit))
}

/// Square matrix with orthonormal columns (Gram-Schmidt on a Gaussian draw).
pub fn orthogonal<R: Rng>(n: usize, rng: &mut R) -> Array2<f64> {
    loop {
        let mut m = Array2::from_shape_simple_fn((n, n), || rng.sample::<f64, _>(StandardNormal));
        let mut ok = true;
        for j in 0..n {
            for k in 0..j {
                let proj = m.column(j).dot(&m.column(k));
                let col_k = m.column(k).to_owned();
                m.column_mut(j).scaled_add(-proj, &col_k);
            }
            let norm = m.column(j).dot(&m.column(j)).sqrt();
            if norm < 1e-8 {
                ok = false;
                break;
            }
            m.column_mut(j).mapv_inplace(|v| v / norm);
        }
        if ok {
            return m;
        }
    }
}

/// `n x (blocks * n)` matrix made of independent orthogonal blocks.
pub fn orthogonal_blocks<R: Rng>(n: usize, blocks: usize, rng: &mut R) -> Array2<f64> {
    let mut out = Array2::zeros((n, blocks * n));
    for b in 0..blocks {
        out.slice_mut(s![.., b * n..(b + 1) * n]).assign(&orthogonal(n, rng));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn orthogonal_is_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let q = orthogonal(6, &mut rng);
        let qtq = q.t().dot(&q);
        for i in 0..6 {
            for j in 0..6 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((qtq[[i, j]] - want).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn glorot_respects_limit() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let w = glorot_uniform(30, 70, &mut rng);
        let limit = (6.0f64 / 100.0).sqrt();
        assert!(w.iter().all(|v| v.abs() <= limit));
    }
}
