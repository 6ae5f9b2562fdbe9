//! Physical quantities from one-site density matrices, and the exact
//! spontaneous magnetization of the square-lattice Ising model.

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;

use crate::ctm::{one_site_rdm, CtmEnvironment};
use crate::error::{Error, Result};
use crate::models::{Model, ModelKind};
use crate::operator::OperatorMatrix;
use crate::pepo::{Sublattice, VectorizedPepo};

/// A and B values further apart than this mark the record.
pub const SUBLATTICE_TOLERANCE: f64 = 1e-4;

/// `Tr(op·ρ) / Tr(ρ)`.
pub fn expect_one_site(rdm: &OperatorMatrix, op: &OperatorMatrix) -> Result<C64> {
    if rdm.dim() != op.dim() {
        return Err(Error::Dimension(format!(
            "operator of dimension {} against a {}-dimensional density matrix",
            op.dim(),
            rdm.dim()
        )));
    }
    let tr = rdm.trace();
    if !(tr.norm() >= 1e-30) {
        return Err(Error::Degenerate(tr.norm()));
    }
    let d = rdm.dim();
    let mut acc = C64::new(0.0, 0.0);
    for k in 0..d {
        for b in 0..d {
            acc += op.get(b, k) * rdm.get(k, b);
        }
    }
    Ok(acc / tr)
}

/// `(1 − sinh(2β)⁻⁴)^{1/8}` above the critical coupling, zero below.
pub fn onsager_magnetization(beta: f64) -> f64 {
    let beta_c = (1.0 + 2f64.sqrt()).ln() / 2.0;
    if beta <= beta_c {
        return 0.0;
    }
    let s = (2.0 * beta).sinh();
    (1.0 - s.powi(-4)).max(0.0).powf(0.125)
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct MeasurementMeta {
    pub chi: usize,
    pub d_max: usize,
    pub ctm_iterations: usize,
    pub ctm_converged: bool,
    /// Largest A/B difference over the recorded values.
    pub sublattice_spread: f64,
    pub sublattice_mismatch: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ObservableRecord {
    pub beta: f64,
    pub temperature: f64,
    /// Sublattice-averaged values: every model observable by name, plus
    /// `magnetization` (Ising) or `density`, `sf_param` and `var_n` (bosons).
    pub values: BTreeMap<String, f64>,
    pub meta: MeasurementMeta,
}

impl ObservableRecord {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.values.get(name).copied()
    }
}

fn with_beta(e: Error, beta: f64) -> Error {
    match e {
        Error::Degenerate(tr) => Error::Environment(format!(
            "degenerate density matrix (trace {tr:e}) at beta = {beta}"
        )),
        other => other,
    }
}

fn sublattice_values(model: &Model, rdm: &OperatorMatrix) -> Result<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    let mut complex = BTreeMap::new();
    for (name, op) in model.observables() {
        let v = expect_one_site(rdm, op)?;
        out.insert(name.clone(), v.re);
        complex.insert(name.as_str(), v);
    }
    match model.kind() {
        ModelKind::Ising => {
            out.insert("magnetization".into(), complex["sz"].re);
        }
        ModelKind::HardcoreBoseHubbard | ModelKind::SoftcoreBoseHubbard => {
            let n = complex["n"].re;
            out.insert("density".into(), n);
            out.insert("sf_param".into(), complex["a"].norm_sqr());
            out.insert("var_n".into(), complex["n2"].re - n * n);
        }
    }
    Ok(out)
}

/// Evaluates every model observable on both sublattices and averages.
pub fn measure(model: &Model, env: &CtmEnvironment, p: &VectorizedPepo, beta: f64) -> Result<ObservableRecord> {
    if model.local_dim() != p.local_dim() {
        return Err(Error::Dimension(format!(
            "model {} does not match the state's local dimension {}",
            model.name(),
            p.local_dim()
        )));
    }
    let mut per = Vec::with_capacity(2);
    for s in [Sublattice::A, Sublattice::B] {
        let rdm = one_site_rdm(env, p, s).map_err(|e| with_beta(e, beta))?;
        per.push(sublattice_values(model, &rdm).map_err(|e| with_beta(e, beta))?);
    }
    let mut values = BTreeMap::new();
    let mut spread: f64 = 0.0;
    for (name, a) in &per[0] {
        let b = per[1][name];
        spread = spread.max((a - b).abs());
        values.insert(name.clone(), 0.5 * (a + b));
    }
    if let Some(m) = values.get_mut("magnetization") {
        *m = m.abs();
    }
    let mismatch = spread > SUBLATTICE_TOLERANCE;
    if mismatch {
        log::warn!("sublattice values differ by {spread:e} at beta = {beta}");
    }
    Ok(ObservableRecord {
        beta,
        temperature: 1.0 / beta,
        values,
        meta: MeasurementMeta {
            chi: env.chi(),
            d_max: p.d_max(),
            ctm_iterations: env.iterations(),
            ctm_converged: env.converged(),
            sublattice_spread: spread,
            sublattice_mismatch: mismatch,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::pauli;

    #[test]
    fn expectation_examples() {
        let half = OperatorMatrix::identity(2).scale_real(0.5);
        assert!(expect_one_site(&half, &pauli::z()).unwrap().norm() < 1e-15);
        let one = OperatorMatrix::diagonal(&[0.0, 1.0, 0.0]);
        let n = OperatorMatrix::diagonal(&[0.0, 1.0, 2.0]);
        assert!((expect_one_site(&one, &n).unwrap().re - 1.0).abs() < 1e-15);
        let rho = OperatorMatrix::diagonal(&[0.25, 0.75]);
        assert!((expect_one_site(&rho, &pauli::z()).unwrap().re + 0.5).abs() < 1e-15);
        assert!(matches!(
            expect_one_site(&OperatorMatrix::zeros(2), &pauli::z()),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn onsager_values() {
        assert_eq!(onsager_magnetization(0.3), 0.0);
        assert!((onsager_magnetization(0.5) - 0.911319).abs() < 1e-5);
        assert!((onsager_magnetization(50.0) - 1.0).abs() < 1e-15);
        let bc = (1.0 + 2f64.sqrt()).ln() / 2.0;
        assert!(onsager_magnetization(bc + 1e-12) < 0.05);
        let mut last = 0.0;
        for i in 1..400 {
            let m = onsager_magnetization(i as f64 * 5e-3);
            assert!(m >= last);
            last = m;
        }
    }
}
