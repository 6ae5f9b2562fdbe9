//! Directional corner transfer matrix environments of the single-layer
//! network obtained by tracing the physical indices of the PEPO.
//!
//! Environment tensors live on a 2×2 grid of positions with `y` pointing
//! down; site `(x, y)` is on sublattice A when `x + y` is even. The
//! environment of site `(x, y)` is
//!
//! ```text
//!   C1(x-1,y-1)  T1(x,y-1)  C2(x+1,y-1)
//!   T4(x-1,y)    a(x,y)     T2(x+1,y)
//!   C4(x-1,y+1)  T3(x,y+1)  C3(x+1,y+1)
//! ```
//!
//! with index orders `C1[down, right]`, `C2[left, down]`, `C3[up, left]`,
//! `C4[up, right]`, `T1[left, down, right]`, `T2[up, left, down]`,
//! `T3[left, up, right]`, `T4[up, right, down]` and `a[up, right, down, left]`.
//! Only a left move is implemented; the other directions are reached by
//! rotating the whole grid clockwise between moves.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg;
use crate::operator::OperatorMatrix;
use crate::pepo::{Bond, Sublattice, VectorizedPepo, BRA, DOWN, KET, LEFT, RIGHT, UP};
use crate::tensor::{contract, matmul, DenseTensor};

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ITERS: usize = 500;
/// Singular values of a projector kernel below this fraction of the largest
/// are dropped.
const PROJECTOR_CUTOFF: f64 = 1e-8;
const SINGULAR_KERNEL: f64 = 1e-14;
const DEGENERATE_TRACE: f64 = 1e-30;

/// Default environment dimension for PEPO bond dimension `d`.
pub fn default_chi(d: usize) -> usize {
    match d {
        0..=2 => 20,
        3 => 30,
        _ => 10 * d,
    }
}

/// Rank-4 `(u, r, dn, l)` tensor of one site with the physical pair
/// contracted against a one-site matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedSiteTensor {
    tensor: DenseTensor,
}

impl ReducedSiteTensor {
    pub fn tensor(&self) -> &DenseTensor {
        &self.tensor
    }

    pub fn into_tensor(self) -> DenseTensor {
        self.tensor
    }
}

/// Site tensor of `s` with `√λ` absorbed on every virtual leg.
pub fn weighted_site(p: &VectorizedPepo, s: Sublattice) -> DenseTensor {
    let mut t = p.site(s).clone();
    for leg in UP..=LEFT {
        let l: Vec<f64> = p.lambda(Bond::of_leg(s, leg)).iter().map(|x| x.sqrt()).collect();
        t.scale_axis(leg, &l).expect("bond extents validated");
    }
    t
}

/// `Σ_{k,b} M[b,k] A[k,b,u,r,dn,l]` with `M = op` or the identity.
pub fn reduced_site_tensor(
    p: &VectorizedPepo,
    s: Sublattice,
    op: Option<&OperatorMatrix>,
) -> Result<ReducedSiteTensor> {
    let d = p.local_dim();
    let m = match op {
        Some(o) if o.dim() != d => {
            return Err(Error::Dimension(format!(
                "operator of dimension {} on a d = {d} site",
                o.dim()
            )))
        }
        Some(o) => o.clone(),
        None => OperatorMatrix::identity(d),
    };
    let t = weighted_site(p, s);
    // M[b,k] pairs axis 0 of M with BRA and axis 1 with KET
    let out = contract(&m.to_tensor(), &t, &[(0, BRA), (1, KET)])?;
    Ok(ReducedSiteTensor { tensor: out })
}

#[derive(Clone, Debug)]
struct Grid {
    a: Vec<DenseTensor>,
    c1: Vec<DenseTensor>,
    c2: Vec<DenseTensor>,
    c3: Vec<DenseTensor>,
    c4: Vec<DenseTensor>,
    t1: Vec<DenseTensor>,
    t2: Vec<DenseTensor>,
    t3: Vec<DenseTensor>,
    t4: Vec<DenseTensor>,
}

fn pos(x: isize, y: isize) -> usize {
    (y.rem_euclid(2) * 2 + x.rem_euclid(2)) as usize
}

fn sublattice_at(x: isize, y: isize) -> Sublattice {
    if (x + y).rem_euclid(2) == 0 {
        Sublattice::A
    } else {
        Sublattice::B
    }
}

/// Sums the listed axes of `t` against all-ones vectors.
fn sum_axes(t: &DenseTensor, axes: &[usize]) -> Result<DenseTensor> {
    let mut out = t.clone();
    let mut sorted = axes.to_vec();
    sorted.sort_unstable();
    for &ax in sorted.iter().rev() {
        let ones = DenseTensor::from_fn(&[out.shape()[ax]], |_| C64::new(1.0, 0.0));
        let c = contract(&out, &ones, &[(ax, 0)])?;
        out = c;
    }
    Ok(out)
}

fn normalized(mut t: DenseTensor) -> Result<DenseTensor> {
    if t.normalize_max() == 0.0 || !t.is_finite() {
        return Err(Error::Environment("environment tensor vanished or diverged".into()));
    }
    Ok(t)
}

impl Grid {
    fn from_sites(sites: [&DenseTensor; 2]) -> Result<Self> {
        let at = |x: isize, y: isize| match sublattice_at(x, y) {
            Sublattice::A => sites[0].clone(),
            Sublattice::B => sites[1].clone(),
        };
        let mut g = Grid {
            a: Vec::new(),
            c1: Vec::new(),
            c2: Vec::new(),
            c3: Vec::new(),
            c4: Vec::new(),
            t1: Vec::new(),
            t2: Vec::new(),
            t3: Vec::new(),
            t4: Vec::new(),
        };
        for i in 0..4 {
            let (x, y) = ((i % 2) as isize, (i / 2) as isize);
            let a = at(x, y);
            // a[u, r, d, l]; outward legs summed
            g.c1.push(normalized(sum_axes(&a, &[0, 3])?.permute(&[1, 0])?)?); // [d, r]
            g.c2.push(normalized(sum_axes(&a, &[0, 1])?.permute(&[1, 0])?)?); // [l, d]
            g.c3.push(sum_axes(&a, &[1, 2]).and_then(normalized)?); // [u, l]
            g.c4.push(sum_axes(&a, &[2, 3]).and_then(normalized)?); // [u, r]
            g.t1.push(normalized(sum_axes(&a, &[0])?.permute(&[2, 1, 0])?)?); // [l, d, r]
            g.t2.push(normalized(sum_axes(&a, &[1])?.permute(&[0, 2, 1])?)?); // [u, l, d]
            g.t3.push(normalized(sum_axes(&a, &[2])?.permute(&[2, 0, 1])?)?); // [l, u, r]
            g.t4.push(normalized(sum_axes(&a, &[3])?)?); // [u, r, d]
            g.a.push(a);
        }
        Ok(g)
    }

    /// Clockwise rotation of the picture: `new(x, y) = old(y, 1 - x)`.
    fn rotate(&self) -> Result<Self> {
        let src = |i: usize| {
            let (x, y) = ((i % 2) as isize, (i / 2) as isize);
            pos(y, 1 - x)
        };
        let map = |v: &[DenseTensor], perm: Option<&[usize]>| -> Result<Vec<DenseTensor>> {
            (0..4)
                .map(|i| match perm {
                    Some(p) => v[src(i)].permute(p),
                    None => Ok(v[src(i)].clone()),
                })
                .collect()
        };
        Ok(Grid {
            a: map(&self.a, Some(&[3, 0, 1, 2]))?,
            c1: map(&self.c4, Some(&[1, 0]))?,
            c2: map(&self.c1, None)?,
            c3: map(&self.c2, None)?,
            c4: map(&self.c3, Some(&[1, 0]))?,
            t1: map(&self.t4, Some(&[2, 1, 0]))?,
            t2: map(&self.t1, None)?,
            t3: map(&self.t2, Some(&[2, 1, 0]))?,
            t4: map(&self.t3, None)?,
        })
    }

    /// Upper half `[(T4.d, a.d), (a'.d, T2.d)]` of the 2×2 block with
    /// top-left site `(x, y)`.
    fn upper_half(&self, x: isize, y: isize) -> Result<DenseTensor> {
        let s = contract(&self.c1[pos(x - 1, y - 1)], &self.t1[pos(x, y - 1)], &[(1, 0)])?;
        let s = contract(&s, &self.t4[pos(x - 1, y)], &[(0, 0)])?;
        let ul = contract(&s, &self.a[pos(x, y)], &[(0, 0), (2, 3)])?.permute(&[1, 3, 0, 2])?;

        let s = contract(&self.t1[pos(x + 1, y - 1)], &self.c2[pos(x + 2, y - 1)], &[(2, 0)])?;
        let s = contract(&s, &self.t2[pos(x + 2, y)], &[(2, 0)])?;
        let ur = contract(&s, &self.a[pos(x + 1, y)], &[(1, 0), (2, 1)])?.permute(&[0, 3, 2, 1])?;

        contract(&ul, &ur, &[(2, 0), (3, 1)])
    }

    /// Lower half `[(T4.u, a.u), (a'.u, T2.u)]` of the block rows `y+1`.
    fn lower_half(&self, x: isize, y: isize) -> Result<DenseTensor> {
        let s = contract(&self.t4[pos(x - 1, y + 1)], &self.c4[pos(x - 1, y + 2)], &[(2, 0)])?;
        let s = contract(&s, &self.t3[pos(x, y + 2)], &[(2, 0)])?;
        let ll = contract(&s, &self.a[pos(x, y + 1)], &[(1, 3), (2, 2)])?.permute(&[0, 2, 1, 3])?;

        let s = contract(&self.t2[pos(x + 2, y + 1)], &self.c3[pos(x + 2, y + 2)], &[(2, 0)])?;
        let s = contract(&s, &self.t3[pos(x + 1, y + 2)], &[(2, 2)])?;
        let lr = contract(&s, &self.a[pos(x + 1, y + 1)], &[(1, 1), (3, 2)])?.permute(&[1, 3, 2, 0])?;

        contract(&ll, &lr, &[(2, 0), (3, 1)])
    }

    /// Projectors `(P̃, P)` for the cut below row `y` at column `x`, shaped
    /// `[χ_env, D, χ]` and `[χ, χ_env, D]`.
    fn projectors(&self, x: isize, y: isize, chi: usize) -> Result<(DenseTensor, DenseTensor)> {
        let mut r1 = self.upper_half(x, y)?;
        let mut r2 = self.lower_half(x, y)?;
        r1.normalize_max();
        r2.normalize_max();
        let (e, dd) = (r1.shape()[0], r1.shape()[1]);
        let i = e * dd;
        let k = r1.shape()[2] * r1.shape()[3];
        let k2 = r2.shape()[2] * r2.shape()[3];
        let kernel = contract(&r1, &r2, &[(0, 0), (1, 1)])?;
        let svd = linalg::svd(k, k2, kernel.data())?;
        let smax = svd.s.first().copied().unwrap_or(0.0);
        if !(smax >= SINGULAR_KERNEL) {
            return Err(Error::Environment(format!(
                "projector kernel is singular (largest singular value {smax:e})"
            )));
        }
        let r = svd.s.len();
        let kept = svd
            .s
            .iter()
            .take_while(|&&s| s > PROJECTOR_CUTOFF * smax)
            .count()
            .min(chi)
            .max(1);
        let inv_sqrt: Vec<f64> = svd.s[..kept].iter().map(|s| 1.0 / s.sqrt()).collect();

        // V[k', c] = conj(V†[c, k'])
        let mut v = vec![C64::new(0.0, 0.0); k2 * kept];
        for c in 0..kept {
            for j in 0..k2 {
                v[j * kept + c] = svd.vt[c * k2 + j].conj() * inv_sqrt[c];
            }
        }
        let p_tilde = matmul(i, k2, kept, r2.data(), &v);
        // P = S^{-1/2} U† R1ᵀ
        let mut ud = vec![C64::new(0.0, 0.0); kept * k];
        for c in 0..kept {
            for j in 0..k {
                ud[c * k + j] = svd.u[j * r + c].conj() * inv_sqrt[c];
            }
        }
        let mut r1t = vec![C64::new(0.0, 0.0); k * i];
        for a in 0..i {
            for b in 0..k {
                r1t[b * i + a] = r1.data()[a * k + b];
            }
        }
        let p = matmul(kept, k, i, &ud, &r1t);
        Ok((
            DenseTensor::new(vec![e, dd, kept], p_tilde)?,
            DenseTensor::new(vec![kept, e, dd], p)?,
        ))
    }

    /// Absorbs every column into the left environment, one column at a time.
    fn left_move(&mut self, chi: usize) -> Result<()> {
        for x in 0..2isize {
            let mut proj = Vec::with_capacity(2);
            for y in 0..2isize {
                proj.push(self.projectors(x, y, chi)?);
            }
            let mut c1 = Vec::with_capacity(2);
            let mut t4 = Vec::with_capacity(2);
            let mut c4 = Vec::with_capacity(2);
            for y in 0..2isize {
                let (pt_here, _) = &proj[y as usize];
                let (_, p_above) = &proj[(y - 1).rem_euclid(2) as usize];

                let s = contract(&self.c1[pos(x - 1, y)], &self.t1[pos(x, y)], &[(1, 0)])?;
                c1.push(normalized(contract(&s, pt_here, &[(0, 0), (1, 1)])?.permute(&[1, 0])?)?);

                let s = contract(&self.t4[pos(x - 1, y)], &self.a[pos(x, y)], &[(1, 3)])?;
                let s = contract(p_above, &s, &[(1, 0), (2, 2)])?;
                t4.push(normalized(contract(&s, pt_here, &[(1, 0), (3, 1)])?)?);

                let s = contract(&self.c4[pos(x - 1, y)], &self.t3[pos(x, y)], &[(1, 0)])?;
                c4.push(normalized(contract(p_above, &s, &[(1, 0), (2, 1)])?)?);
            }
            for y in 0..2isize {
                let i = pos(x, y);
                self.c1[i] = c1[y as usize].clone();
                self.t4[i] = t4[y as usize].clone();
                self.c4[i] = c4[y as usize].clone();
            }
        }
        Ok(())
    }

    /// Normalized singular values of all corners, each padded to `chi`.
    fn corner_spectra(&self, chi: usize) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(16 * chi);
        for corners in [&self.c1, &self.c2, &self.c3, &self.c4] {
            for c in corners.iter() {
                let (m, n) = (c.shape()[0], c.shape()[1]);
                let s = linalg::svd(m, n, c.data())?.s;
                let top = s.first().copied().unwrap_or(0.0);
                let mut row: Vec<f64> = s.iter().map(|x| if top > 0.0 { x / top } else { 0.0 }).collect();
                row.resize(chi.max(m.min(n)), 0.0);
                out.extend(row);
            }
        }
        Ok(out)
    }

    /// Environment `E[u, r, d, l]` of site `(x, y)`.
    fn site_environment(&self, x: isize, y: isize) -> Result<DenseTensor> {
        let top = contract(&self.c1[pos(x - 1, y - 1)], &self.t1[pos(x, y - 1)], &[(1, 0)])?;
        let top = contract(&top, &self.c2[pos(x + 1, y - 1)], &[(2, 0)])?;
        let bottom = contract(&self.c4[pos(x - 1, y + 1)], &self.t3[pos(x, y + 1)], &[(1, 0)])?;
        let bottom = contract(&bottom, &self.c3[pos(x + 1, y + 1)], &[(2, 1)])?;
        let s = contract(&top, &self.t4[pos(x - 1, y)], &[(0, 0)])?;
        let s = contract(&s, &self.t2[pos(x + 1, y)], &[(1, 0)])?;
        contract(&s, &bottom, &[(2, 0), (4, 2)])?.permute(&[0, 2, 3, 1])
    }
}

/// Converged (or best-effort) environment of a PEPO's traced network.
#[derive(Clone, Debug)]
pub struct CtmEnvironment {
    grid: Grid,
    chi: usize,
    converged: bool,
    iterations: usize,
    delta: f64,
    spectra: Vec<f64>,
}

impl CtmEnvironment {
    /// Environment initialized from the reduced site tensors with their
    /// outward legs summed.
    pub fn initial(p: &VectorizedPepo, chi: usize) -> Result<Self> {
        if chi == 0 {
            return Err(Error::Argument("chi must be at least 1".into()));
        }
        if !p.is_finite() {
            return Err(Error::Numerical("PEPO has non-finite elements".into()));
        }
        let a = reduced_site_tensor(p, Sublattice::A, None)?.into_tensor();
        let b = reduced_site_tensor(p, Sublattice::B, None)?.into_tensor();
        let grid = Grid::from_sites([&a, &b])?;
        let spectra = grid.corner_spectra(chi)?;
        Ok(Self {
            grid,
            chi,
            converged: false,
            iterations: 0,
            delta: f64::INFINITY,
            spectra,
        })
    }

    /// One round of left, up, right and down moves. Returns the ℓ₂ change of
    /// the corner spectra.
    pub fn iterate(&mut self) -> Result<f64> {
        let mut g = self.grid.clone();
        for _ in 0..4 {
            g.left_move(self.chi)?;
            g = g.rotate()?;
        }
        let spectra = g.corner_spectra(self.chi)?;
        let delta = if spectra.len() == self.spectra.len() {
            spectra
                .iter()
                .zip(&self.spectra)
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt()
        } else {
            f64::INFINITY
        };
        self.grid = g;
        self.spectra = spectra;
        self.iterations += 1;
        self.delta = delta;
        Ok(delta)
    }

    pub fn chi(&self) -> usize {
        self.chi
    }

    pub fn converged(&self) -> bool {
        self.converged
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Spectrum change of the last iteration.
    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Normalized corner singular values, grouped by corner type and
    /// position, each padded with zeros to at least `χ` entries.
    pub fn corner_spectra(&self) -> &[f64] {
        &self.spectra
    }

    /// Environment `E[u, r, d, l]` of the sublattice site at `(0, 0)` (A)
    /// or `(1, 0)` (B).
    pub fn site_environment(&self, s: Sublattice) -> Result<DenseTensor> {
        match s {
            Sublattice::A => self.grid.site_environment(0, 0),
            Sublattice::B => self.grid.site_environment(1, 0),
        }
    }
}

/// Iterates CTM moves until the corner spectra change by less than `tol`.
/// Hitting `max_iters` is not an error; the result reports `converged`.
pub fn ctm_converge(p: &VectorizedPepo, chi: usize, tol: f64, max_iters: usize) -> Result<CtmEnvironment> {
    let mut env = CtmEnvironment::initial(p, chi)?;
    while env.iterations < max_iters {
        if env.iterate()? < tol {
            env.converged = true;
            break;
        }
    }
    if !env.converged {
        log::warn!(
            "CTM not converged after {} iterations (chi = {chi}, last change {:e})",
            env.iterations,
            env.delta
        );
    }
    Ok(env)
}

/// Unnormalized one-site density matrix `ρ[k, b]` of sublattice `s`.
pub fn one_site_rdm(env: &CtmEnvironment, p: &VectorizedPepo, s: Sublattice) -> Result<OperatorMatrix> {
    let e = env.site_environment(s)?;
    let site = weighted_site(p, s);
    let rho = contract(&site, &e, &[(UP, 0), (RIGHT, 1), (DOWN, 2), (LEFT, 3)])?;
    let rho = OperatorMatrix::from_tensor(&rho)?;
    let tr = rho.trace().norm();
    if !(tr >= DEGENERATE_TRACE) {
        return Err(Error::Degenerate(tr));
    }
    Ok(rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observables::{expect_one_site, onsager_magnetization};
    use crate::operator::pauli;
    use crate::pepo::{exact_ising_pepo, identity_pepo};

    fn magnetization(beta: f64, chi: usize) -> (f64, CtmEnvironment) {
        let p = exact_ising_pepo(beta).unwrap();
        let env = ctm_converge(&p, chi, DEFAULT_TOL, DEFAULT_MAX_ITERS).unwrap();
        let rho = one_site_rdm(&env, &p, Sublattice::A).unwrap();
        (expect_one_site(&rho, &pauli::z()).unwrap().re.abs(), env)
    }

    #[test]
    fn reduced_tensor_of_identity() {
        let p = identity_pepo(2).unwrap();
        let r = reduced_site_tensor(&p, Sublattice::A, None).unwrap();
        assert_eq!(r.tensor().shape(), &[1, 1, 1, 1]);
        assert!((r.tensor().data()[0] - C64::new(2.0, 0.0)).norm() < 1e-15);
        let z = reduced_site_tensor(&p, Sublattice::B, Some(&pauli::z())).unwrap();
        assert!(z.tensor().data()[0].norm() < 1e-15);
    }

    #[test]
    fn reduced_ising_tensor_has_link_weights() {
        // traced site: Σ_s Π_legs L(s) √λ; nonzero only for an even number of σᶻ legs
        let beta: f64 = 0.4;
        let p = exact_ising_pepo(beta).unwrap();
        let r = reduced_site_tensor(&p, Sublattice::A, None).unwrap();
        let t = beta.tanh().sqrt();
        assert!((r.tensor().get(&[0, 0, 0, 0]).re - 2.0).abs() < 1e-14);
        assert!((r.tensor().get(&[1, 1, 0, 0]).re - 2.0 * t * t).abs() < 1e-14);
        assert!(r.tensor().get(&[1, 0, 0, 0]).norm() < 1e-14);
    }

    #[test]
    fn identity_converges_at_once() {
        for d in [2, 3] {
            let p = identity_pepo(d).unwrap();
            let env = ctm_converge(&p, 7, DEFAULT_TOL, DEFAULT_MAX_ITERS).unwrap();
            assert!(env.converged());
            assert_eq!(env.iterations(), 1);
            let rho = one_site_rdm(&env, &p, Sublattice::A).unwrap();
            let norm = rho.scale(C64::new(1.0, 0.0) / rho.trace());
            assert!(norm.max_abs_diff(&OperatorMatrix::identity(d).scale_real(1.0 / d as f64)) < 1e-12);
        }
        let p = identity_pepo(3).unwrap();
        let env = ctm_converge(&p, 4, DEFAULT_TOL, 10).unwrap();
        let rho = one_site_rdm(&env, &p, Sublattice::B).unwrap();
        let n = OperatorMatrix::diagonal(&[0.0, 1.0, 2.0]);
        assert!((expect_one_site(&rho, &n).unwrap().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exact_ising_high_temperature_is_disordered() {
        let (m, env) = magnetization(0.3, 20);
        assert!(env.converged());
        assert!(m < 1e-3, "m = {m}");
    }

    #[test]
    fn exact_ising_low_temperature_matches_onsager() {
        let (m, env) = magnetization(0.8, 20);
        assert!(env.converged());
        assert!((m - onsager_magnetization(0.8)).abs() < 1e-3, "m = {m}");
    }

    #[test]
    fn rdm_is_hermitian_and_diagonal_for_ising() {
        let p = exact_ising_pepo(0.6).unwrap();
        let env = ctm_converge(&p, 16, DEFAULT_TOL, DEFAULT_MAX_ITERS).unwrap();
        let rho = one_site_rdm(&env, &p, Sublattice::B).unwrap();
        assert!(rho.hermiticity_error() < 1e-12 * rho.max_abs());
        assert!(rho.get(0, 1).norm() < 1e-12 * rho.max_abs());
    }

    #[test]
    fn zero_chi_is_rejected() {
        assert!(ctm_converge(&identity_pepo(2).unwrap(), 0, 1e-8, 5).is_err());
    }
}
