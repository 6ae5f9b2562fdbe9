#![allow(dead_code)]

use num_complex::Complex64 as C64;
use pepo_core::pepo::VectorizedPepo;
use pepo_core::{DenseTensor, OperatorMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Infinite-temperature state plus a random complex perturbation of size
/// `eps` on every element, with random descending bond weights.
pub fn random_pepo(seed: u64, d: usize, bond: usize, eps: f64) -> VectorizedPepo {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shape = [d, d, bond, bond, bond, bond];
    let mut site = || {
        DenseTensor::from_fn(&shape, |i| {
            let base = if i[0] == i[1] && i[2..].iter().all(|&x| x == 0) { 1.0 } else { 0.0 };
            C64::new(base + eps * rng.gen_range(-1.0..1.0), eps * rng.gen_range(-1.0..1.0))
        })
    };
    let (a, b) = (site(), site());
    let lambdas = std::array::from_fn(|_| {
        let mut l: Vec<f64> = (0..bond).map(|k| if k == 0 { 1.0 } else { rng.gen_range(0.1..1.0) }).collect();
        l[1..].sort_by(|x, y| y.partial_cmp(x).unwrap());
        l
    });
    VectorizedPepo::new(d, bond, a, b, lambdas).unwrap()
}

/// `(W, W⁻¹)` with `W = exp(X)` for a random real symmetric `X`, so the
/// condition number stays below `e^{2·scale·n}`.
pub fn random_gauge(seed: u64, n: usize, scale: f64) -> (OperatorMatrix, OperatorMatrix) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = OperatorMatrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            let v = C64::new(scale * rng.gen_range(-1.0..1.0), 0.0);
            x.set(i, j, v);
            x.set(j, i, v);
        }
    }
    (x.exp_hermitian(1.0), x.exp_hermitian(-1.0))
}

pub fn condition_number(w: &OperatorMatrix, w_inv: &OperatorMatrix) -> f64 {
    w.spectral_norm() * w_inv.spectral_norm()
}
