mod common;

use common::{condition_number, random_gauge, random_pepo};
use num_complex::Complex64 as C64;
use pepo_core::ctm::{ctm_converge, one_site_rdm, CtmEnvironment, DEFAULT_MAX_ITERS, DEFAULT_TOL};
use pepo_core::operator::pauli;
use pepo_core::pepo::{exact_ising_pepo, identity_pepo, Bond, Sublattice, VectorizedPepo};
use pepo_core::{expect_one_site, onsager_magnetization, DenseTensor, OperatorMatrix};

fn normalized_rdm(env: &CtmEnvironment, p: &VectorizedPepo, s: Sublattice) -> OperatorMatrix {
    let rho = one_site_rdm(env, p, s).unwrap();
    rho.scale(C64::new(1.0, 0.0) / rho.trace())
}

#[test]
fn gauge_transformations_leave_rdms_unchanged() {
    for seed in 0..20u64 {
        let p = random_pepo(seed, 2, 2, 0.2);
        let bond = Bond::ALL[(seed % 4) as usize];
        let (w, w_inv) = random_gauge(1000 + seed, 2, 0.5);
        assert!(condition_number(&w, &w_inv) < 10.0);
        let mut q = p.clone();
        q.gauge_bond(bond, &w, &w_inv).unwrap();

        let env_p = ctm_converge(&p, 20, DEFAULT_TOL, DEFAULT_MAX_ITERS).unwrap();
        let env_q = ctm_converge(&q, 20, DEFAULT_TOL, DEFAULT_MAX_ITERS).unwrap();
        assert!(env_p.converged() && env_q.converged(), "seed {seed}");
        for s in [Sublattice::A, Sublattice::B] {
            let diff = normalized_rdm(&env_p, &p, s).max_abs_diff(&normalized_rdm(&env_q, &q, s));
            assert!(diff < 1e-8, "seed {seed} {s:?}: {diff:e}");
        }
    }
}

#[test]
fn extra_iteration_after_convergence_is_idle() {
    for seed in 0..20u64 {
        let p = random_pepo(50 + seed, 2, 2, 0.2);
        let mut env = ctm_converge(&p, 20, DEFAULT_TOL, DEFAULT_MAX_ITERS).unwrap();
        assert!(env.converged());
        let before = [normalized_rdm(&env, &p, Sublattice::A), normalized_rdm(&env, &p, Sublattice::B)];
        env.iterate().unwrap();
        let after = [normalized_rdm(&env, &p, Sublattice::A), normalized_rdm(&env, &p, Sublattice::B)];
        for (b, a) in before.iter().zip(&after) {
            for op in [pauli::x(), pauli::y(), pauli::z()] {
                let change = (expect_one_site(b, &op).unwrap() - expect_one_site(a, &op).unwrap()).norm();
                assert!(change < 10.0 * DEFAULT_TOL, "seed {seed}: {change:e}");
            }
        }
    }
}

#[test]
fn magnetization_error_does_not_grow_with_chi() {
    let p = exact_ising_pepo(0.5).unwrap();
    let target = onsager_magnetization(0.5);
    let mut last = f64::INFINITY;
    for chi in [8, 16, 24] {
        let env = ctm_converge(&p, chi, DEFAULT_TOL, DEFAULT_MAX_ITERS).unwrap();
        let m = expect_one_site(&one_site_rdm(&env, &p, Sublattice::A).unwrap(), &pauli::z()).unwrap().re;
        let err = (m.abs() - target).abs();
        assert!(err <= last + 1e-6, "chi {chi}: {err:e} after {last:e}");
        last = err;
    }
}

#[test]
fn product_states_match_the_one_site_formula() {
    // unit bond dimension with arbitrary one-site content on each sublattice
    let rho_a = OperatorMatrix::from_complex(
        3,
        vec![
            C64::new(0.5, 0.0), C64::new(0.1, 0.2), C64::new(0.0, -0.3),
            C64::new(0.1, -0.2), C64::new(0.3, 0.0), C64::new(0.05, 0.0),
            C64::new(0.0, 0.3), C64::new(0.05, 0.0), C64::new(0.2, 0.0),
        ],
    )
    .unwrap();
    let rho_b = OperatorMatrix::diagonal(&[0.2, 0.7, 0.1]);
    let site = |r: &OperatorMatrix| DenseTensor::new(vec![3, 3, 1, 1, 1, 1], r.data().to_vec()).unwrap();
    let p = VectorizedPepo::new(3, 1, site(&rho_a), site(&rho_b), std::array::from_fn(|_| vec![1.0])).unwrap();
    let env = ctm_converge(&p, 5, DEFAULT_TOL, 10).unwrap();
    let n = OperatorMatrix::diagonal(&[0.0, 1.0, 2.0]);
    for (s, r) in [(Sublattice::A, &rho_a), (Sublattice::B, &rho_b)] {
        let ctm = expect_one_site(&one_site_rdm(&env, &p, s).unwrap(), &n).unwrap();
        let direct = expect_one_site(r, &n).unwrap();
        assert!((ctm - direct).norm() < 1e-14);
    }
}

#[test]
fn identity_expectations_of_traceless_operators_vanish() {
    let p = identity_pepo(2).unwrap();
    let env = ctm_converge(&p, 4, DEFAULT_TOL, 5).unwrap();
    let rho = one_site_rdm(&env, &p, Sublattice::A).unwrap();
    for op in [pauli::x(), pauli::y(), pauli::z()] {
        assert!(expect_one_site(&rho, &op).unwrap().norm() < 1e-12);
    }
}

#[test]
fn exact_ising_rdm_population_matches_onsager() {
    let p = exact_ising_pepo(0.8).unwrap();
    let env = ctm_converge(&p, 20, DEFAULT_TOL, DEFAULT_MAX_ITERS).unwrap();
    let rho = normalized_rdm(&env, &p, Sublattice::A);
    assert!(rho.get(0, 1).norm() < 1e-12);
    let imbalance = (rho.get(0, 0) - rho.get(1, 1)).re.abs();
    assert!((imbalance - onsager_magnetization(0.8)).abs() < 1e-3);
}
