//! Dense reference checks run by the `oracle` subcommand.

use num_complex::Complex64 as C64;
use pepo_core::evolution::DEFAULT_SWEEP_ORDER;
use pepo_core::operator::pauli;
use pepo_core::oracle::{
    embed_pair, exact_thermal_average, exact_thermal_expectation, trotterized_density_matrix,
    trotterized_expectation_ordered, trotterized_thermal_expectation, vectorized_density_matrix, SmallLattice,
};
use pepo_core::pepo::{vectorize, Bond};
use pepo_core::{hardcore_bh, ising_model, softcore_bh, OperatorMatrix};

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    /// Accepted closed interval for `value`.
    pub range: (f64, f64),
}

impl Check {
    fn new(name: &str, value: f64, lo: f64, hi: f64) -> Self {
        Self { name: name.into(), value, range: (lo, hi) }
    }

    fn below(name: &str, value: f64, hi: f64) -> Self {
        Self::new(name, value, 0.0, hi)
    }

    pub fn passed(&self) -> bool {
        self.value >= self.range.0 && self.value <= self.range.1
    }
}

/// Deterministic dense test matrix with complex entries.
fn test_matrix(d: usize, seed: f64) -> OperatorMatrix {
    let data = (0..d * d)
        .map(|i| {
            let x = seed + i as f64;
            C64::new((1.7 * x).sin(), (2.3 * x + 0.5).cos())
        })
        .collect();
    OperatorMatrix::from_complex(d, data).expect("square data")
}

/// Largest deviation of `vec(AρB)` from `(A⊗Bᵀ)vec(ρ)` over a few inputs.
pub fn vectorization_identity_error() -> f64 {
    let mut worst: f64 = 0.0;
    for (d, seed) in [(2, 0.1), (3, 1.3), (4, 2.9)] {
        let (a, rho, b) = (test_matrix(d, seed), test_matrix(d, seed + 7.0), test_matrix(d, seed + 13.0));
        let lhs = vectorize(&(&(&a * &rho) * &b));
        let rhs = a.kron(&b.transpose()).apply(&vectorize(&rho));
        let err = lhs.iter().zip(&rhs).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        worst = worst.max(err);
    }
    worst
}

/// Ratio of the fixed-β product-formula errors at Δβ and Δβ/2 on one bond.
pub fn two_site_trotter_ratio(delta_beta: f64) -> f64 {
    let lat = SmallLattice::new(1, 2).expect("two sites");
    let m = softcore_bh(1.0, 2.0, 5.0).expect("valid model");
    let n = m.observable("n").expect("density operator");
    let exact = exact_thermal_expectation(&m, &lat, 1.0, n, 0).expect("dense");
    let err = |db: f64| (trotterized_thermal_expectation(&m, &lat, 1.0, db, n, 0).expect("dense") - exact).abs();
    err(delta_beta) / err(0.5 * delta_beta)
}

pub fn run_checks() -> Vec<Check> {
    let two = SmallLattice::new(1, 2).expect("lattice");
    let square = SmallLattice::new(2, 2).expect("lattice");
    let ising = ising_model(0.0).expect("model");
    let hardcore = hardcore_bh(1.0, 0.7).expect("model");
    let softcore = softcore_bh(1.0, 2.0, 5.0).expect("model");
    let z = pauli::z();
    let mut out = Vec::new();

    let zz = embed_pair(&two, 2, &z.kron(&z), 0, 1).expect("pair");
    let corr = exact_thermal_average(&ising, &two, 1.0, &zz).expect("dense");
    out.push(Check::below("ising_two_site_correlation", (corr - 1f64.tanh()).abs(), 1e-12));

    let half = hardcore_bh(1.0, 0.0).expect("model");
    let n = exact_thermal_expectation(&half, &square, 2.0, half.observable("n").expect("n"), 0).expect("dense");
    out.push(Check::below("hardcore_half_filling", (n - 0.5).abs(), 1e-12));

    out.push(Check::below("vectorization_identity", vectorization_identity_error(), 1e-12));
    out.push(Check::new("two_site_trotter_ratio", two_site_trotter_ratio(0.05), 3.5, 4.5));

    let pinned = ising_model(0.3).expect("model");
    let exact = exact_thermal_expectation(&pinned, &square, 0.1, &z, 0).expect("dense");
    let split = trotterized_thermal_expectation(&pinned, &square, 0.1, 1e-5, &z, 0).expect("dense");
    out.push(Check::below("small_step_limit", (split - exact).abs(), 1e-8));

    let reversed = [Bond::BDown, Bond::BRight, Bond::ADown, Bond::ARight];
    for (name, m) in [("hardcore", &hardcore), ("softcore", &softcore)] {
        let op = m.observable("n").expect("n");
        let a = trotterized_thermal_expectation(m, &square, 0.1, 1e-4, op, 0).expect("dense");
        let b = trotterized_expectation_ordered(m, &square, 0.1, 1e-4, op, 0, &reversed).expect("dense");
        out.push(Check::below(&format!("{name}_bond_order"), (a - b).abs(), 1e-6));
    }

    for (name, m) in [("ising", &pinned), ("hardcore", &hardcore), ("softcore", &softcore)] {
        let a = trotterized_density_matrix(m, &square, 0.3, 0.1, &DEFAULT_SWEEP_ORDER).expect("dense");
        let b = vectorized_density_matrix(m, &square, 0.3, 0.1, &DEFAULT_SWEEP_ORDER).expect("dense");
        out.push(Check::below(&format!("{name}_vectorized_vs_operator"), a.max_abs_diff(&b) / a.max_abs(), 1e-12));
    }

    let rho = trotterized_density_matrix(&softcore, &square, 0.05, 1e-4, &DEFAULT_SWEEP_ORDER).expect("dense");
    let norm = rho.spectral_norm();
    let lowest = rho.eigh().0.into_iter().fold(f64::INFINITY, f64::min);
    out.push(Check::new("softcore_positivity", lowest / norm, -1e-10, f64::INFINITY));
    out.push(Check::below("softcore_hermiticity", rho.hermiticity_error() / norm, 1e-12));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_check_passes() {
        for c in run_checks() {
            assert!(c.passed(), "{c:?}");
        }
    }
}
