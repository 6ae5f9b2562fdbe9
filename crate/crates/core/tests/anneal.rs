use pepo_core::ctm::{ctm_converge, DEFAULT_MAX_ITERS, DEFAULT_TOL};
use pepo_core::observables::SUBLATTICE_TOLERANCE;
use pepo_core::{
    anneal, exact_ising_pepo, hardcore_bh, identity_pepo, ising_model, measure, softcore_bh, AnnealSchedule, Model,
    ObservableRecord, VectorizedPepo,
};

fn observe(model: &Model, p: &VectorizedPepo, beta: f64) -> ObservableRecord {
    let env = ctm_converge(p, 20, DEFAULT_TOL, DEFAULT_MAX_ITERS).unwrap();
    measure(model, &env, p, beta).unwrap()
}

fn run(model: &Model, delta_beta: f64, checkpoints: Vec<f64>) -> Vec<ObservableRecord> {
    let beta_max = *checkpoints.last().unwrap();
    let schedule = AnnealSchedule::new(delta_beta, beta_max, checkpoints).unwrap();
    let p = identity_pepo(model.local_dim()).unwrap();
    anneal(p, model, schedule, 2)
        .unwrap()
        .map(|c| {
            let c = c.unwrap();
            assert!(c.warning.is_none());
            observe(model, &c.snapshot.pepo, c.beta)
        })
        .collect()
}

#[test]
fn infinite_temperature_record() {
    let m = hardcore_bh(1.0, 0.0).unwrap();
    let r = observe(&m, &identity_pepo(2).unwrap(), 1e-9);
    assert!((r.get("density").unwrap() - 0.5).abs() < 1e-12);
    assert!(r.get("sf_param").unwrap().abs() < 1e-12);
    assert!((r.get("var_n").unwrap() - 0.25).abs() < 1e-12);
    assert!((r.temperature * r.beta - 1.0).abs() < 1e-12);
}

#[test]
fn annealed_ising_matches_the_exact_state() {
    let m = ising_model(1e-6).unwrap();
    let annealed = run(&m, 1e-3, vec![0.3]).pop().unwrap();
    let exact = observe(&m, &exact_ising_pepo(0.3).unwrap(), 0.3);
    assert!((annealed.get("magnetization").unwrap() - exact.get("magnetization").unwrap()).abs() < 5e-3);
    assert!((annealed.get("sz").unwrap() - exact.get("sz").unwrap()).abs() < 5e-3);
}

#[test]
fn ordered_ising_magnetization_grows_with_beta() {
    let m = ising_model(1e-6).unwrap();
    let records = run(&m, 1e-3, vec![0.5, 0.55, 0.6, 0.7, 0.8]);
    let ms: Vec<f64> = records.iter().map(|r| r.get("magnetization").unwrap()).collect();
    assert!(ms.windows(2).all(|w| w[1] >= w[0]), "{ms:?}");
}

#[test]
fn particle_hole_symmetric_half_filling() {
    let m = hardcore_bh(1.0, 0.0).unwrap();
    for r in run(&m, 1e-3, vec![0.25, 0.5, 1.0, 2.0]) {
        assert!((r.get("density").unwrap() - 0.5).abs() < 1e-3, "beta {}", r.beta);
        assert!(r.get("var_n").unwrap() >= -1e-9);
    }
}

#[test]
fn deep_negative_chemical_potential_empties_the_lattice() {
    let m = hardcore_bh(1.0, -4.5).unwrap();
    let r = run(&m, 1e-3, vec![20.0]).pop().unwrap();
    assert!(r.get("density").unwrap() < 1e-2);
}

#[test]
fn soft_core_mott_fluctuations_are_small() {
    let m = softcore_bh(1.0, 40.0, 100.0).unwrap();
    let r = run(&m, 1e-3, vec![0.5]).pop().unwrap();
    let var = r.get("var_n").unwrap();
    assert!((1e-4..1e-2).contains(&var), "var_n {var}");
    let n = r.get("density").unwrap();
    assert!((-1e-6..=2.0 + 1e-6).contains(&n));
    assert!(r.meta.sublattice_spread < SUBLATTICE_TOLERANCE);
}
