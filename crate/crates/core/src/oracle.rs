//! Dense thermal states of small open-boundary lattices, exact and with the
//! same bond-ordered product formula the anneal uses.
//!
//! Sites are numbered row-major and site 0 owns the slowest digit of the
//! many-body basis index.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::evolution::{build_gate, DEFAULT_SWEEP_ORDER};
use crate::models::{Model, COORDINATION};
use crate::operator::OperatorMatrix;
use crate::pepo::Bond;

pub const MAX_HILBERT_DIM: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SmallLattice {
    rows: usize,
    cols: usize,
}

impl SmallLattice {
    pub fn new(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Argument(format!("{rows}x{cols} lattice")));
        }
        Ok(Self { rows, cols })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn sites(&self) -> usize {
        self.rows * self.cols
    }

    pub fn site(&self, row: usize, col: usize) -> usize {
        row * self.cols + col
    }

    /// Checkerboard class of every nearest-neighbour bond `(i, j)`, with `i`
    /// the left or upper site.
    pub fn bonds(&self) -> Vec<(Bond, usize, usize)> {
        let mut out = Vec::new();
        for r in 0..self.rows {
            for c in 0..self.cols {
                let even = (r + c) % 2 == 0;
                if c + 1 < self.cols {
                    let b = if even { Bond::ARight } else { Bond::BRight };
                    out.push((b, self.site(r, c), self.site(r, c + 1)));
                }
                if r + 1 < self.rows {
                    let b = if even { Bond::ADown } else { Bond::BDown };
                    out.push((b, self.site(r, c), self.site(r + 1, c)));
                }
            }
        }
        out
    }

    pub fn coordination(&self, site: usize) -> usize {
        self.bonds().iter().filter(|(_, i, j)| *i == site || *j == site).count()
    }

    fn hilbert_dim(&self, d: usize) -> Result<usize> {
        let n = self.sites() as u32;
        match d.checked_pow(n) {
            Some(dim) if dim <= MAX_HILBERT_DIM => Ok(dim),
            _ => Err(Error::Argument(format!(
                "{}x{} lattice with d = {d} exceeds {MAX_HILBERT_DIM} states",
                self.rows, self.cols
            ))),
        }
    }
}

/// Applies `op` (`dim²×dim²` on the pair `(i, j)`) to a vector over `n`
/// sites of dimension `dim`.
fn apply_pair(v: &[C64], dim: usize, n: usize, i: usize, j: usize, op: &OperatorMatrix) -> Vec<C64> {
    let si = dim.pow((n - 1 - i) as u32);
    let sj = dim.pow((n - 1 - j) as u32);
    let mut out = vec![C64::new(0.0, 0.0); v.len()];
    for (s, &x) in v.iter().enumerate() {
        if x == C64::new(0.0, 0.0) {
            continue;
        }
        let (a, b) = ((s / si) % dim, (s / sj) % dim);
        let base = s - a * si - b * sj;
        let col = a * dim + b;
        for a2 in 0..dim {
            for b2 in 0..dim {
                let g = op.get(a2 * dim + b2, col);
                if g != C64::new(0.0, 0.0) {
                    out[base + a2 * si + b2 * sj] += g * x;
                }
            }
        }
    }
    out
}

fn apply_single(v: &[C64], dim: usize, n: usize, i: usize, op: &OperatorMatrix) -> Vec<C64> {
    let si = dim.pow((n - 1 - i) as u32);
    let mut out = vec![C64::new(0.0, 0.0); v.len()];
    for (s, &x) in v.iter().enumerate() {
        if x == C64::new(0.0, 0.0) {
            continue;
        }
        let a = (s / si) % dim;
        let base = s - a * si;
        for a2 in 0..dim {
            out[base + a2 * si] += op.get(a2, a) * x;
        }
    }
    out
}

/// Full operator `op` on one site of the lattice.
pub fn embed_site(lat: &SmallLattice, d: usize, op: &OperatorMatrix, site: usize) -> Result<OperatorMatrix> {
    let dim = lat.hilbert_dim(d)?;
    let n = lat.sites();
    let mut out = OperatorMatrix::zeros(dim);
    for col in 0..dim {
        let mut e = vec![C64::new(0.0, 0.0); dim];
        e[col] = C64::new(1.0, 0.0);
        for (row, x) in apply_single(&e, d, n, site, op).into_iter().enumerate() {
            out.set(row, col, x);
        }
    }
    Ok(out)
}

/// Full operator of a two-site term on sites `(i, j)`.
pub fn embed_pair(lat: &SmallLattice, d: usize, op: &OperatorMatrix, i: usize, j: usize) -> Result<OperatorMatrix> {
    let dim = lat.hilbert_dim(d)?;
    let n = lat.sites();
    let mut out = OperatorMatrix::zeros(dim);
    for col in 0..dim {
        let mut e = vec![C64::new(0.0, 0.0); dim];
        e[col] = C64::new(1.0, 0.0);
        for (row, x) in apply_pair(&e, d, n, i, j, op).into_iter().enumerate() {
            out.set(row, col, x);
        }
    }
    Ok(out)
}

/// One-site weight left over after every bond took a quarter of the on-site
/// term.
fn onsite_correction(model: &Model, lat: &SmallLattice, site: usize) -> OperatorMatrix {
    let z = lat.coordination(site) as f64;
    model.onsite_term().scale_real(1.0 - z / COORDINATION as f64)
}

/// The lattice Hamiltonian with every site carrying its full on-site term.
pub fn hamiltonian(model: &Model, lat: &SmallLattice) -> Result<OperatorMatrix> {
    let d = model.local_dim();
    let dim = lat.hilbert_dim(d)?;
    let mut h = OperatorMatrix::zeros(dim);
    for (_, i, j) in lat.bonds() {
        h = &h + &embed_pair(lat, d, model.bond_matrix(), i, j)?;
    }
    for s in 0..lat.sites() {
        h = &h + &embed_site(lat, d, &onsite_correction(model, lat, s), s)?;
    }
    Ok(h)
}

/// `Tr(O e^{−βH}) / Tr(e^{−βH})` for a full-lattice operator.
pub fn exact_thermal_average(model: &Model, lat: &SmallLattice, beta: f64, op: &OperatorMatrix) -> Result<f64> {
    let h = hamiltonian(model, lat)?;
    let rho = h.exp_hermitian(-beta);
    average(&rho, op)
}

/// Exact thermal expectation of a one-site operator on `site`.
pub fn exact_thermal_expectation(
    model: &Model,
    lat: &SmallLattice,
    beta: f64,
    op: &OperatorMatrix,
    site: usize,
) -> Result<f64> {
    check_site(lat, site)?;
    let full = embed_site(lat, model.local_dim(), op, site)?;
    exact_thermal_average(model, lat, beta, &full)
}

fn check_site(lat: &SmallLattice, site: usize) -> Result<()> {
    if site >= lat.sites() {
        return Err(Error::Argument(format!("site {site} outside {} sites", lat.sites())));
    }
    Ok(())
}

fn average(rho: &OperatorMatrix, op: &OperatorMatrix) -> Result<f64> {
    if rho.dim() != op.dim() {
        return Err(Error::Dimension(format!(
            "operator of dimension {} on a {}-dimensional lattice",
            op.dim(),
            rho.dim()
        )));
    }
    let tr = rho.trace().re;
    Ok((op * rho).trace().re / tr)
}

/// Number of whole slices for `beta`, rejecting schedules that do not fit.
fn slices(beta: f64, delta_beta: f64) -> Result<usize> {
    if !(delta_beta > 0.0) || !(beta >= 0.0) {
        return Err(Error::Argument(format!("beta = {beta}, delta_beta = {delta_beta}")));
    }
    let m = (beta / delta_beta).round();
    if (m * delta_beta - beta).abs() > 1e-9 * beta.max(1.0) {
        return Err(Error::Argument(format!(
            "beta = {beta} is not a whole number of slices of {delta_beta}"
        )));
    }
    Ok(m as usize)
}

/// The ordered gate list of one slice: every bond of each class in `order`,
/// then the per-site corrections, all as `g = exp(−Δβ·term/2)`.
enum SliceGate {
    Pair(usize, usize, OperatorMatrix),
    Site(usize, OperatorMatrix),
}

fn slice_gates(model: &Model, lat: &SmallLattice, delta_beta: f64, order: &[Bond; 4]) -> Vec<SliceGate> {
    let g = model.bond_matrix().exp_hermitian(-0.5 * delta_beta);
    let mut out = Vec::new();
    let bonds = lat.bonds();
    for class in order {
        for (b, i, j) in &bonds {
            if b == class {
                out.push(SliceGate::Pair(*i, *j, g.clone()));
            }
        }
    }
    for s in 0..lat.sites() {
        let c = onsite_correction(model, lat, s);
        if c.max_abs() > 0.0 {
            out.push(SliceGate::Site(s, c.exp_hermitian(-0.5 * delta_beta)));
        }
    }
    out
}

/// Product-formula density matrix `P^m (P^m)†` built by evolving `ρ ↦ gρg†`
/// gate by gate from the identity.
pub fn trotterized_density_matrix(
    model: &Model,
    lat: &SmallLattice,
    beta: f64,
    delta_beta: f64,
    order: &[Bond; 4],
) -> Result<OperatorMatrix> {
    let d = model.local_dim();
    let dim = lat.hilbert_dim(d)?;
    let n = lat.sites();
    let m = slices(beta, delta_beta)?;
    let gates = slice_gates(model, lat, delta_beta, order);
    // ρ as a vector over 2n sites: n ket digits then n bra digits
    let mut v = vec![C64::new(0.0, 0.0); dim * dim];
    for s in 0..dim {
        v[s * dim + s] = C64::new(1.0, 0.0);
    }
    for _ in 0..m {
        for gate in &gates {
            v = match gate {
                SliceGate::Pair(i, j, g) => {
                    let w = apply_pair(&v, d, 2 * n, *i, *j, g);
                    apply_pair(&w, d, 2 * n, n + i, n + j, &g.conj())
                }
                SliceGate::Site(i, g) => {
                    let w = apply_single(&v, d, 2 * n, *i, g);
                    apply_single(&w, d, 2 * n, n + i, &g.conj())
                }
            };
        }
    }
    OperatorMatrix::from_complex(dim, v)
}

/// The same state evolved in the interleaved vectorized picture, applying
/// the two-site gates of the anneal to `vec(I)` site by site. Returned as a
/// density matrix.
pub fn vectorized_density_matrix(
    model: &Model,
    lat: &SmallLattice,
    beta: f64,
    delta_beta: f64,
    order: &[Bond; 4],
) -> Result<OperatorMatrix> {
    let d = model.local_dim();
    let dim = lat.hilbert_dim(d)?;
    let n = lat.sites();
    let dd = d * d;
    let m = slices(beta, delta_beta)?;
    let gate = build_gate(model, delta_beta)?.matrix();
    let bonds = lat.bonds();
    let corrections: Vec<(usize, OperatorMatrix)> = (0..n)
        .map(|s| (s, onsite_correction(model, lat, s)))
        .filter(|(_, c)| c.max_abs() > 0.0)
        .map(|(s, c)| {
            let g = c.exp_hermitian(-0.5 * delta_beta);
            (s, g.kron(&g.conj()))
        })
        .collect();
    // ⊗ vec(I_d): every site digit p = k·d + b with k = b
    let total = dd.pow(n as u32);
    let mut v = vec![C64::new(0.0, 0.0); total];
    for (s, x) in v.iter_mut().enumerate() {
        let diag = (0..n).all(|i| {
            let p = (s / dd.pow((n - 1 - i) as u32)) % dd;
            p / d == p % d
        });
        if diag {
            *x = C64::new(1.0, 0.0);
        }
    }
    for _ in 0..m {
        for class in order {
            for (b, i, j) in &bonds {
                if b == class {
                    v = apply_pair(&v, dd, n, *i, *j, &gate);
                }
            }
        }
        for (s, g) in &corrections {
            v = apply_single(&v, dd, n, *s, g);
        }
    }
    // un-interleave to ρ[k₀…, b₀…]
    let mut rho = OperatorMatrix::zeros(dim);
    for (s, &x) in v.iter().enumerate() {
        let (mut k, mut b) = (0, 0);
        for i in 0..n {
            let p = (s / dd.pow((n - 1 - i) as u32)) % dd;
            k = k * d + p / d;
            b = b * d + p % d;
        }
        rho.set(k, b, x);
    }
    Ok(rho)
}

/// Product-formula expectation of a one-site operator, using the anneal's
/// sweep order.
pub fn trotterized_thermal_expectation(
    model: &Model,
    lat: &SmallLattice,
    beta: f64,
    delta_beta: f64,
    op: &OperatorMatrix,
    site: usize,
) -> Result<f64> {
    trotterized_expectation_ordered(model, lat, beta, delta_beta, op, site, &DEFAULT_SWEEP_ORDER)
}

pub fn trotterized_expectation_ordered(
    model: &Model,
    lat: &SmallLattice,
    beta: f64,
    delta_beta: f64,
    op: &OperatorMatrix,
    site: usize,
    order: &[Bond; 4],
) -> Result<f64> {
    check_site(lat, site)?;
    let rho = trotterized_density_matrix(model, lat, beta, delta_beta, order)?;
    let full = embed_site(lat, model.local_dim(), op, site)?;
    average(&rho, &full)
}

/// Spectral-norm distance between one product-formula slice and the exact
/// `exp(−Δβ H)`, relative to the latter.
pub fn trotter_slice_error(model: &Model, lat: &SmallLattice, delta_beta: f64) -> Result<f64> {
    let exact = hamiltonian(model, lat)?.exp_hermitian(-delta_beta);
    let split = trotterized_density_matrix(model, lat, delta_beta, delta_beta, &DEFAULT_SWEEP_ORDER)?;
    Ok((&split - &exact).spectral_norm() / exact.spectral_norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{hardcore_bh, ising_model, softcore_bh};
    use crate::operator::pauli;
    use crate::pepo::Bond::*;

    #[test]
    fn two_site_ising_correlation() {
        let lat = SmallLattice::new(1, 2).unwrap();
        let m = ising_model(0.0).unwrap();
        let zz = embed_pair(&lat, 2, &pauli::z().kron(&pauli::z()), 0, 1).unwrap();
        let v = exact_thermal_average(&m, &lat, 1.0, &zz).unwrap();
        assert!((v - 1f64.tanh()).abs() < 1e-12);
    }

    #[test]
    fn infinite_temperature_is_the_normalized_trace() {
        let lat = SmallLattice::new(2, 2).unwrap();
        let m = softcore_bh(1.0, 0.3, 2.0).unwrap();
        let n2 = m.observable("n2").unwrap();
        let v = exact_thermal_expectation(&m, &lat, 0.0, n2, 3).unwrap();
        assert!((v - n2.trace().re / 3.0).abs() < 1e-12);
    }

    #[test]
    fn half_filling_at_zero_chemical_potential() {
        let lat = SmallLattice::new(2, 2).unwrap();
        let m = hardcore_bh(1.0, 0.0).unwrap();
        for beta in [0.5, 2.0] {
            for s in 0..4 {
                let n = exact_thermal_expectation(&m, &lat, beta, m.observable("n").unwrap(), s).unwrap();
                assert!((n - 0.5).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn dimension_cap_is_enforced() {
        let lat = SmallLattice::new(2, 4).unwrap();
        let m = softcore_bh(1.0, 0.0, 1.0).unwrap();
        // 3⁸ = 6561 states
        assert!(matches!(hamiltonian(&m, &lat), Err(Error::Argument(_))));
        assert!(hamiltonian(&hardcore_bh(1.0, 0.0).unwrap(), &lat).is_ok());
    }

    #[test]
    fn boundary_sites_carry_the_full_onsite_term() {
        let lat = SmallLattice::new(1, 3).unwrap();
        let m = hardcore_bh(0.0, 0.8).unwrap();
        // no hopping: every site is an independent two-level system
        let expected = 1.0 / (1.0 + (-0.8f64).exp());
        for s in 0..3 {
            let n = exact_thermal_expectation(&m, &lat, 1.0, m.observable("n").unwrap(), s).unwrap();
            assert!((n - expected).abs() < 1e-12, "site {s}: {n}");
        }
    }

    #[test]
    fn small_steps_converge_to_the_exact_value() {
        let lat = SmallLattice::new(2, 2).unwrap();
        let m = ising_model(0.3).unwrap();
        let z = pauli::z();
        let exact = exact_thermal_expectation(&m, &lat, 0.1, &z, 0).unwrap();
        let split = trotterized_thermal_expectation(&m, &lat, 0.1, 1e-5, &z, 0).unwrap();
        assert!((split - exact).abs() < 1e-8);
    }

    #[test]
    fn two_site_error_is_second_order_in_the_step() {
        let lat = SmallLattice::new(1, 2).unwrap();
        let m = softcore_bh(1.0, 2.0, 5.0).unwrap();
        let n = m.observable("n").unwrap();
        let exact = exact_thermal_expectation(&m, &lat, 1.0, n, 0).unwrap();
        let err = |db: f64| (trotterized_thermal_expectation(&m, &lat, 1.0, db, n, 0).unwrap() - exact).abs();
        let ratio = err(0.05) / err(0.025);
        assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn bond_order_barely_matters_for_small_steps() {
        let lat = SmallLattice::new(2, 2).unwrap();
        for m in [hardcore_bh(1.0, 0.7).unwrap(), softcore_bh(1.0, 2.0, 5.0).unwrap()] {
            let n = m.observable("n").unwrap();
            let a = trotterized_thermal_expectation(&m, &lat, 0.1, 1e-4, n, 0).unwrap();
            let b = trotterized_expectation_ordered(&m, &lat, 0.1, 1e-4, n, 0, &[BDown, BRight, ADown, ARight]).unwrap();
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn vectorized_and_operator_evolution_agree() {
        let lat = SmallLattice::new(2, 2).unwrap();
        for m in [hardcore_bh(1.0, 0.7).unwrap(), softcore_bh(1.0, 2.0, 5.0).unwrap(), ising_model(0.3).unwrap()] {
            let a = trotterized_density_matrix(&m, &lat, 0.3, 0.1, &DEFAULT_SWEEP_ORDER).unwrap();
            let b = vectorized_density_matrix(&m, &lat, 0.3, 0.1, &DEFAULT_SWEEP_ORDER).unwrap();
            assert!(a.max_abs_diff(&b) / a.max_abs() < 1e-12);
        }
    }

    #[test]
    fn trotterized_state_is_hermitian_and_positive() {
        let lat = SmallLattice::new(2, 2).unwrap();
        let m = softcore_bh(1.0, 2.0, 5.0).unwrap();
        let rho = trotterized_density_matrix(&m, &lat, 0.05, 1e-4, &DEFAULT_SWEEP_ORDER).unwrap();
        let norm = rho.spectral_norm();
        assert!(rho.hermiticity_error() < 1e-12 * norm);
        let (evals, _) = rho.eigh();
        assert!(evals.iter().all(|&e| e >= -1e-10 * norm));
    }

    #[test]
    fn misaligned_schedules_are_rejected() {
        let lat = SmallLattice::new(1, 2).unwrap();
        let m = ising_model(0.0).unwrap();
        let z = pauli::z();
        assert!(trotterized_thermal_expectation(&m, &lat, 0.15, 0.1, &z, 0).is_err());
        assert!(trotterized_thermal_expectation(&m, &lat, 0.2, 0.1, &z, 2).is_err());
    }
}
