//! Lattice models as local operator data.
//!
//! A [`Model`] carries the nearest-neighbour bond term with the one-site
//! Hamiltonian absorbed at weight 1/4 per bond (the square-lattice
//! coordination), so that summing the bond terms of the four bonds around a
//! site reproduces its one-site term exactly once.

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::operator::{pauli, OperatorMatrix};
use crate::tensor::DenseTensor;

/// Square-lattice coordination used when spreading one-site terms over bonds.
pub const COORDINATION: usize = 4;

/// Default Ising pinning field.
pub const DEFAULT_PIN: f64 = 1e-6;

const HERMITICITY_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum ModelKind {
    Ising,
    HardcoreBoseHubbard,
    SoftcoreBoseHubbard,
}

#[derive(Clone, Debug)]
pub struct Model {
    name: String,
    kind: ModelKind,
    local_dim: usize,
    coupling: OperatorMatrix,
    onsite: OperatorMatrix,
    bond: OperatorMatrix,
    observables: BTreeMap<String, OperatorMatrix>,
    params: BTreeMap<String, f64>,
}

impl Model {
    fn assemble(
        name: &str,
        kind: ModelKind,
        coupling: OperatorMatrix,
        onsite: OperatorMatrix,
        observables: Vec<(&str, OperatorMatrix)>,
        params: Vec<(&str, f64)>,
    ) -> Result<Self> {
        let d = onsite.dim();
        if coupling.dim() != d * d {
            return Err(Error::Model(format!(
                "coupling is {0}x{0}, expected {1}x{1}",
                coupling.dim(),
                d * d
            )));
        }
        let id = OperatorMatrix::identity(d);
        let spread = (&onsite.kron(&id) + &id.kron(&onsite)).scale_real(1.0 / COORDINATION as f64);
        let bond = &coupling + &spread;
        let model = Self {
            name: name.to_string(),
            kind,
            local_dim: d,
            coupling,
            onsite,
            bond,
            observables: observables
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect(),
            params: params.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
        };
        model.validate()?;
        Ok(model)
    }

    fn validate(&self) -> Result<()> {
        let dev = self.bond.hermiticity_error();
        if dev > HERMITICITY_TOL {
            return Err(Error::Model(format!(
                "bond term of {} deviates from Hermitian by {dev:e}",
                self.name
            )));
        }
        if let Some((name, op)) = self.observables.iter().find(|(_, o)| o.dim() != self.local_dim) {
            return Err(Error::Model(format!(
                "observable {name} is {0}x{0} in a d={1} model",
                op.dim(),
                self.local_dim
            )));
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> &ModelKind {
        &self.kind
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    /// Bond term `h` as a `d²×d²` matrix on `(s1 s2)` row-major pairs.
    pub fn bond_matrix(&self) -> &OperatorMatrix {
        &self.bond
    }

    /// Bond term as a rank-4 tensor `(out1, out2, in1, in2)`.
    pub fn two_site_term(&self) -> DenseTensor {
        let d = self.local_dim;
        DenseTensor::new(vec![d, d, d, d], self.bond.data().to_vec()).expect("d^4 buffer")
    }

    /// The pure two-site interaction without absorbed one-site pieces.
    pub fn coupling(&self) -> &OperatorMatrix {
        &self.coupling
    }

    /// The full one-site Hamiltonian of a bulk site.
    pub fn onsite_term(&self) -> &OperatorMatrix {
        &self.onsite
    }

    pub fn observable(&self, name: &str) -> Option<&OperatorMatrix> {
        self.observables.get(name)
    }

    pub fn observables(&self) -> &BTreeMap<String, OperatorMatrix> {
        &self.observables
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        self.params.get(name).copied()
    }

    pub fn params(&self) -> &BTreeMap<String, f64> {
        &self.params
    }
}

/// Ferromagnetic Ising model `-Σ σᶻσᶻ - h_pin Σ σᶻ` in the basis `(|↑⟩, |↓⟩)`.
pub fn ising_model(h_pin: f64) -> Result<Model> {
    let z = pauli::z();
    Model::assemble(
        "ising",
        ModelKind::Ising,
        z.kron(&z).scale_real(-1.0),
        z.scale_real(-h_pin),
        vec![("sz", z), ("sx", pauli::x())],
        vec![("h_pin", h_pin)],
    )
}

/// Truncated bosonic annihilator on `{|0⟩, …, |n_max⟩}` with real
/// non-negative entries `a|n⟩ = √n |n-1⟩`.
pub fn annihilator(n_max: usize) -> OperatorMatrix {
    let d = n_max + 1;
    let mut a = OperatorMatrix::zeros(d);
    for n in 1..d {
        a.set(n - 1, n, C64::new((n as f64).sqrt(), 0.0));
    }
    a
}

fn boson_observables(a: &OperatorMatrix) -> Vec<(&'static str, OperatorMatrix)> {
    let adag = a.dagger();
    let n = &adag * a;
    let n2 = &n * &n;
    vec![("n", n), ("a", a.clone()), ("adag", adag), ("n2", n2)]
}

fn hopping(a: &OperatorMatrix, j: f64) -> OperatorMatrix {
    let adag = a.dagger();
    (&adag.kron(a) + &a.kron(&adag)).scale_real(-j)
}

/// Hard-core Bose-Hubbard model in the Fock basis `(|0⟩, |1⟩)`.
///
/// Written in spin language with `σᶻ = 2n̂ - 1`, the bond term is
/// `-(J/2)(σˣσˣ + σʸσʸ) - (μ/8)(σᶻ⊗1 + 1⊗σᶻ)`, i.e. `-J Σ (a†a + h.c.) - μ Σ n̂`
/// up to a constant.
pub fn hardcore_bh(j: f64, mu: f64) -> Result<Model> {
    let a = annihilator(1);
    let spin_z = OperatorMatrix::diagonal(&[-1.0, 1.0]);
    Model::assemble(
        "hardcore_bh",
        ModelKind::HardcoreBoseHubbard,
        hopping(&a, j),
        spin_z.scale_real(-mu / 2.0),
        boson_observables(&a),
        vec![("J", j), ("mu", mu)],
    )
}

/// Soft-core Bose-Hubbard model with at most two bosons per site.
pub fn softcore_bh(j: f64, mu: f64, u: f64) -> Result<Model> {
    let a = annihilator(2);
    let onsite = OperatorMatrix::diagonal(&[0.0, -mu, -2.0 * mu + u]);
    Model::assemble(
        "softcore_bh",
        ModelKind::SoftcoreBoseHubbard,
        hopping(&a, j),
        onsite,
        boson_observables(&a),
        vec![("J", j), ("mu", mu), ("U", u)],
    )
}
