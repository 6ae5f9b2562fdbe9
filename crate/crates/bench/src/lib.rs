//! Fixtures shared by the kernel benchmarks.

use num_complex::Complex64 as C64;
use pepo_core::{anneal, identity_pepo, AnnealSchedule, DenseTensor, Model, VectorizedPepo};

/// Dense deterministic tensor with complex entries of order one.
pub fn dense_tensor(shape: &[usize]) -> DenseTensor {
    let mut k = 0.0f64;
    DenseTensor::from_fn(shape, |_| {
        k += 1.0;
        C64::new((0.37 * k).sin(), (0.91 * k + 0.2).cos())
    })
}

/// State of `model` annealed to `beta` at bond dimension `d_max`.
pub fn annealed_state(model: &Model, beta: f64, d_max: usize) -> VectorizedPepo {
    let schedule = AnnealSchedule::new(1e-2, beta, vec![beta]).expect("valid schedule");
    let p = identity_pepo(model.local_dim()).expect("d >= 2");
    let mut run = anneal(p, model, schedule, d_max).expect("anneal starts");
    run.next().expect("one checkpoint").expect("finite anneal").snapshot.pepo
}

#[cfg(test)]
mod tests {
    use super::*;
    use pepo_core::hardcore_bh;

    #[test]
    fn fixtures_have_the_requested_shapes() {
        assert_eq!(dense_tensor(&[4, 3, 2]).shape(), &[4, 3, 2]);
        let p = annealed_state(&hardcore_bh(1.0, 0.5).unwrap(), 0.2, 2);
        assert_eq!(p.d_max(), 2);
        assert!(p.is_finite());
    }
}
