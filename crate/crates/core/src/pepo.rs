//! The vectorized thermal PEPO on a two-sublattice checkerboard.
//!
//! Site tensors have six legs `(k, b, up, right, down, left)`: the ket and bra
//! physical indices followed by four virtual bonds. Together `(k, b)` form the
//! vectorized physical index `p = k·d + b`, so that `vec(AρB) = (A⊗Bᵀ) vec(ρ)`
//! in the row-major convention of [`DenseTensor`].
//!
//! ```text
//!          B            B
//!          |BDown       |
//!   BRight-A-ARight--B--A
//!          |ADown       |
//!          B------------A
//! ```
//!
//! Each of the four inequivalent bonds carries a positive weight vector `λ`,
//! sorted descending with unit maximum (the simple-update gauge).

use std::path::Path;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::OperatorMatrix;
use crate::tensor::{DenseTensor, TensorRecord};

pub const KET: usize = 0;
pub const BRA: usize = 1;
pub const UP: usize = 2;
pub const RIGHT: usize = 3;
pub const DOWN: usize = 4;
pub const LEFT: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sublattice {
    A,
    B,
}

impl Sublattice {
    pub fn other(self) -> Self {
        match self {
            Sublattice::A => Sublattice::B,
            Sublattice::B => Sublattice::A,
        }
    }
}

/// The four inequivalent bonds of the checkerboard cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Bond {
    ARight,
    ADown,
    BRight,
    BDown,
}

impl Bond {
    pub const ALL: [Bond; 4] = [Bond::ARight, Bond::ADown, Bond::BRight, Bond::BDown];

    pub fn index(self) -> usize {
        self as usize
    }

    /// The site owning the bond's right/down end is the first site.
    pub fn first_site(self) -> Sublattice {
        match self {
            Bond::ARight | Bond::ADown => Sublattice::A,
            Bond::BRight | Bond::BDown => Sublattice::B,
        }
    }

    pub fn is_horizontal(self) -> bool {
        matches!(self, Bond::ARight | Bond::BRight)
    }

    /// Bond attached to `leg` of a site on sublattice `s`.
    pub fn of_leg(s: Sublattice, leg: usize) -> Bond {
        match (s, leg) {
            (Sublattice::A, UP) => Bond::BDown,
            (Sublattice::A, RIGHT) => Bond::ARight,
            (Sublattice::A, DOWN) => Bond::ADown,
            (Sublattice::A, LEFT) => Bond::BRight,
            (Sublattice::B, UP) => Bond::ADown,
            (Sublattice::B, RIGHT) => Bond::BRight,
            (Sublattice::B, DOWN) => Bond::BDown,
            (Sublattice::B, LEFT) => Bond::ARight,
            _ => panic!("leg {leg} is not a virtual leg"),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Bond::ARight => "A-right",
            Bond::ADown => "A-down",
            Bond::BRight => "B-right",
            Bond::BDown => "B-down",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VectorizedPepo {
    local_dim: usize,
    d_max: usize,
    site_a: DenseTensor,
    site_b: DenseTensor,
    lambdas: [Vec<f64>; 4],
}

/// `vec(op)` with component `s·d + s'` equal to `op[s, s']`.
pub fn vectorize(op: &OperatorMatrix) -> Vec<C64> {
    op.data().to_vec()
}

pub fn devectorize(v: &[C64]) -> Result<OperatorMatrix> {
    let d = (v.len() as f64).sqrt().round() as usize;
    OperatorMatrix::from_complex(d, v.to_vec())
}

/// Unitary change of basis from `vec(ρ)` to coordinates in an orthonormal
/// basis of Hermitian matrices. Hermitian operators have real coordinates.
///
/// Row `μ` holds `E_μ[b, k]` at column `k·d + b`, so `c_μ = Tr(E_μ ρ)`.
pub fn hermitian_frame(d: usize) -> OperatorMatrix {
    let n = d * d;
    let mut w = OperatorMatrix::zeros(n);
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let col = |k: usize, b: usize| k * d + b;
    let mut row = 0;
    for j in 0..d {
        w.set(row, col(j, j), C64::new(1.0, 0.0));
        row += 1;
    }
    for j in 0..d {
        for l in j + 1..d {
            // (|j⟩⟨l| + |l⟩⟨j|)/√2
            w.set(row, col(j, l), C64::new(r, 0.0));
            w.set(row, col(l, j), C64::new(r, 0.0));
            row += 1;
            // (-i|j⟩⟨l| + i|l⟩⟨j|)/√2, stored as E[b, k]
            w.set(row, col(l, j), C64::new(0.0, -r));
            w.set(row, col(j, l), C64::new(0.0, r));
            row += 1;
        }
    }
    w
}

impl VectorizedPepo {
    pub fn new(
        local_dim: usize,
        d_max: usize,
        site_a: DenseTensor,
        site_b: DenseTensor,
        lambdas: [Vec<f64>; 4],
    ) -> Result<Self> {
        let p = Self {
            local_dim,
            d_max,
            site_a,
            site_b,
            lambdas,
        };
        p.validate()?;
        Ok(p)
    }

    /// Checks shapes and the gauge invariants of the weight vectors.
    pub fn validate(&self) -> Result<()> {
        let d = self.local_dim;
        for s in [Sublattice::A, Sublattice::B] {
            let t = self.site(s);
            if t.rank() != 6 || t.shape()[KET] != d || t.shape()[BRA] != d {
                return Err(Error::Dimension(format!(
                    "site {s:?} has shape {:?} for d = {d}",
                    t.shape()
                )));
            }
            for leg in UP..=LEFT {
                let bond = Bond::of_leg(s, leg);
                let len = self.lambdas[bond.index()].len();
                if t.shape()[leg] != len {
                    return Err(Error::Dimension(format!(
                        "site {s:?} leg {leg} has extent {} but {} carries {len} weights",
                        t.shape()[leg],
                        bond.name()
                    )));
                }
                if len > self.d_max {
                    return Err(Error::Dimension(format!(
                        "{} has extent {len} above D = {}",
                        bond.name(),
                        self.d_max
                    )));
                }
            }
        }
        for bond in Bond::ALL {
            check_lambda(&self.lambdas[bond.index()])
                .map_err(|m| Error::Numerical(format!("{}: {m}", bond.name())))?;
        }
        Ok(())
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn d_max(&self) -> usize {
        self.d_max
    }

    pub fn set_d_max(&mut self, d_max: usize) -> Result<()> {
        let widest = self.lambdas.iter().map(Vec::len).max().unwrap_or(1);
        if d_max == 0 || d_max < widest {
            return Err(Error::Argument(format!(
                "D = {d_max} is below the current bond extent {widest}"
            )));
        }
        self.d_max = d_max;
        Ok(())
    }

    pub fn site(&self, s: Sublattice) -> &DenseTensor {
        match s {
            Sublattice::A => &self.site_a,
            Sublattice::B => &self.site_b,
        }
    }

    pub fn lambda(&self, bond: Bond) -> &[f64] {
        &self.lambdas[bond.index()]
    }

    pub fn lambdas(&self) -> &[Vec<f64>; 4] {
        &self.lambdas
    }

    pub(crate) fn replace(
        &mut self,
        bond: Bond,
        first: DenseTensor,
        second: DenseTensor,
        lambda: Vec<f64>,
    ) {
        let (fa, fb) = match bond.first_site() {
            Sublattice::A => (&mut self.site_a, &mut self.site_b),
            Sublattice::B => (&mut self.site_b, &mut self.site_a),
        };
        *fa = first;
        *fb = second;
        self.lambdas[bond.index()] = lambda;
    }

    /// Applies an invertible gauge `W` on `bond`: `W` acts on the first site's
    /// leg and `W⁻¹ᵀ` on the second site's leg. Weights are absorbed first
    /// into the first site; the bond weight is reset to ones.
    pub fn gauge_bond(&mut self, bond: Bond, w: &OperatorMatrix, w_inv: &OperatorMatrix) -> Result<()> {
        let (first_leg, second_leg) = if bond.is_horizontal() {
            (RIGHT, LEFT)
        } else {
            (DOWN, UP)
        };
        let first_s = bond.first_site();
        let lam = self.lambdas[bond.index()].clone();
        let mut first = self.site(first_s).clone();
        first.scale_axis(first_leg, &lam)?;
        let first = apply_on_leg(&first, first_leg, w)?;
        let second = apply_on_leg(self.site(first_s.other()), second_leg, &w_inv.transpose())?;
        let ones = vec![1.0; lam.len()];
        self.replace(bond, first, second, ones);
        self.validate()
    }

    pub fn is_finite(&self) -> bool {
        self.site_a.is_finite()
            && self.site_b.is_finite()
            && self.lambdas.iter().flatten().all(|x| x.is_finite())
    }

    /// `max_s ‖A[k,b,·] − conj(A[b,k,·])‖_F / ‖A‖_F`.
    pub fn hermiticity_deviation(&self) -> f64 {
        [&self.site_a, &self.site_b]
            .iter()
            .map(|t| {
                let swapped = t
                    .permute(&[BRA, KET, UP, RIGHT, DOWN, LEFT])
                    .expect("rank-6 site")
                    .conj();
                let norm = t.norm();
                if norm == 0.0 {
                    0.0
                } else {
                    t.sub(&swapped).expect("same shape").norm() / norm
                }
            })
            .fold(0.0, f64::max)
    }
}

/// Contracts `m[new, old]` into one virtual leg of a site tensor.
pub(crate) fn apply_on_leg(t: &DenseTensor, leg: usize, m: &OperatorMatrix) -> Result<DenseTensor> {
    let out = crate::tensor::contract(&m.to_tensor(), t, &[(1, leg)])?;
    // new leg sits first; move it back into place
    let rank = t.rank();
    let mut perm = Vec::with_capacity(rank);
    for ax in 0..rank {
        match ax.cmp(&leg) {
            std::cmp::Ordering::Less => perm.push(ax + 1),
            std::cmp::Ordering::Equal => perm.push(0),
            std::cmp::Ordering::Greater => perm.push(ax),
        }
    }
    out.permute(&perm)
}

fn check_lambda(l: &[f64]) -> std::result::Result<(), String> {
    if l.is_empty() {
        return Err("empty weight vector".into());
    }
    if l.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
        return Err(format!("non-positive weight in {l:?}"));
    }
    if l.windows(2).any(|w| w[0] < w[1]) {
        return Err(format!("weights not descending: {l:?}"));
    }
    if (l[0] - 1.0).abs() > 1e-12 {
        return Err(format!("largest weight {} is not 1", l[0]));
    }
    Ok(())
}

/// The infinite-temperature state: unit bond dimension, `δ_{k,b}` physics.
pub fn identity_pepo(d: usize) -> Result<VectorizedPepo> {
    if d < 2 {
        return Err(Error::Argument(format!("local dimension {d} < 2")));
    }
    let site = DenseTensor::from_fn(&[d, d, 1, 1, 1, 1], |i| {
        if i[KET] == i[BRA] {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    VectorizedPepo::new(d, 1, site.clone(), site, std::array::from_fn(|_| vec![1.0]))
}

/// Exact `D = 2` PEPO of `exp(β Σ σᶻσᶻ)`.
///
/// Each link factor `cosh β + sinh β σᶻσᶻ` is split as `Σ_k λ_k L_k ⊗ L_k`
/// with `L₀ = 1`, `L₁ = σᶻ` and `λ = (1, tanh β)`; the overall `cosh β` per
/// link is dropped.
pub fn exact_ising_pepo(beta: f64) -> Result<VectorizedPepo> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::Argument(format!("beta must be positive, got {beta}")));
    }
    let spin = [1.0, -1.0];
    let site = DenseTensor::from_fn(&[2, 2, 2, 2, 2, 2], |i| {
        if i[KET] != i[BRA] {
            return C64::new(0.0, 0.0);
        }
        let s = spin[i[KET]];
        let w: f64 = i[UP..].iter().map(|&k| if k == 1 { s } else { 1.0 }).product();
        C64::new(w, 0.0)
    });
    let lam = vec![1.0, beta.tanh()];
    VectorizedPepo::new(2, 2, site.clone(), site, std::array::from_fn(|_| lam.clone()))
}

const SNAPSHOT_FORMAT: &str = "pepo-snapshot";
const SNAPSHOT_VERSION: u32 = 1;

/// A PEPO at a point of the anneal, as written to checkpoint files.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub beta: f64,
    pub sweeps: u64,
    pub delta_beta: f64,
    pub pepo: VectorizedPepo,
}

#[derive(Serialize, Deserialize)]
struct LambdaRecord {
    a_right: Vec<f64>,
    a_down: Vec<f64>,
    b_right: Vec<f64>,
    b_down: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct SnapshotRecord {
    format: String,
    version: u32,
    beta: f64,
    sweeps: u64,
    delta_beta: f64,
    local_dim: usize,
    d_max: usize,
    lambdas: LambdaRecord,
    site_a: TensorRecord,
    site_b: TensorRecord,
}

impl Snapshot {
    pub fn to_json(&self) -> String {
        let p = &self.pepo;
        let rec = SnapshotRecord {
            format: SNAPSHOT_FORMAT.into(),
            version: SNAPSHOT_VERSION,
            beta: self.beta,
            sweeps: self.sweeps,
            delta_beta: self.delta_beta,
            local_dim: p.local_dim,
            d_max: p.d_max,
            lambdas: LambdaRecord {
                a_right: p.lambdas[0].clone(),
                a_down: p.lambdas[1].clone(),
                b_right: p.lambdas[2].clone(),
                b_down: p.lambdas[3].clone(),
            },
            site_a: (&p.site_a).into(),
            site_b: (&p.site_b).into(),
        };
        serde_json::to_string(&rec).expect("snapshot serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let rec: SnapshotRecord =
            serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        if rec.format != SNAPSHOT_FORMAT {
            return Err(Error::Format(format!("unknown format tag {:?}", rec.format)));
        }
        if rec.version != SNAPSHOT_VERSION {
            return Err(Error::Format(format!(
                "unsupported snapshot version {}",
                rec.version
            )));
        }
        let l = rec.lambdas;
        let pepo = VectorizedPepo::new(
            rec.local_dim,
            rec.d_max,
            rec.site_a.try_into()?,
            rec.site_b.try_into()?,
            [l.a_right, l.a_down, l.b_right, l.b_down],
        )?;
        Ok(Self {
            beta: rec.beta,
            sweeps: rec.sweeps,
            delta_beta: rec.delta_beta,
            pepo,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Format(e.to_string()))?;
        Self::from_json(&text)
    }
}
