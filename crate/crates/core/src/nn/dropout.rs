use ndarray::{Array2, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Inverted dropout. In training mode each component is zeroed with
/// probability `rate` and survivors are scaled by `1 / (1 - rate)`; the
/// returned mask holds the per-component multiplier. Inference mode is the
/// identity and returns no mask.
pub fn dropout(x: ArrayView2<f64>, rate: f64, seed: u64, training: bool) -> (Array2<f64>, Option<Array2<f64>>) {
    assert!((0.0..1.0).contains(&rate), "dropout rate must lie in [0, 1)");
    if !training || rate == 0.0 {
        return (x.to_owned(), None);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let keep = 1.0 / (1.0 - rate);
    let mask = Array2::from_shape_simple_fn(x.dim(), || if rng.random::<f64>() < rate { 0.0 } else { keep });
    (&x * &mask, Some(mask))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_cases() {
        let x = Array2::from_elem((3, 4), 1.5);
        assert_eq!(dropout(x.view(), 0.0, 1, true).0, x);
        assert_eq!(dropout(x.view(), 0.7, 1, false).0, x);
    }

    #[test]
    fn zero_fraction_matches_rate() {
        let x = Array2::from_elem((100, 1000), 1.0);
        let (y, mask) = dropout(x.view(), 0.5, 42, true);
        let zeros = y.iter().filter(|&&v| v == 0.0).count() as f64 / 1e5;
        assert!((zeros - 0.5).abs() <= 0.01, "{zeros}");
        assert!(y.iter().all(|&v| v == 0.0 || v == 2.0));
        assert_eq!(y, mask.unwrap());
    }

    #[test]
    fn same_seed_same_mask() {
        let x = Array2::from_elem((5, 5), 1.0);
        assert_eq!(dropout(x.view(), 0.3, 9, true).0, dropout(x.view(), 0.3, 9, true).0);
    }
}
