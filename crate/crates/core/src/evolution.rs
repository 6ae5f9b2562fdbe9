//! Trotter gates on vectorized two-site operators, the simple update and the
//! annealing loop from infinite temperature.
//!
//! One slice of size `Δβ` maps `ρ ↦ g ρ g†` with `g = exp(−Δβ h / 2)` on every
//! bond, so after `m` sweeps the state approximates `exp(−m Δβ H)`.

use crate::error::{Error, Result};
use crate::linalg;
use crate::models::Model;
use crate::operator::OperatorMatrix;
use crate::pepo::{hermitian_frame, Bond, Snapshot, Sublattice, VectorizedPepo, DOWN, LEFT, RIGHT, UP};
use crate::tensor::{contract, truncated_svd, DenseTensor};

pub const DEFAULT_DELTA_BETA: f64 = 1e-4;
pub const DEFAULT_SVD_CUTOFF: f64 = 1e-10;
pub const DEFAULT_LAMBDA_FLOOR: f64 = 1e-12;
pub const DEFAULT_SWEEP_ORDER: [Bond; 4] = [Bond::ARight, Bond::ADown, Bond::BRight, Bond::BDown];

/// Above this hermiticity deviation a checkpoint carries a warning.
pub const HERMITICITY_WARNING: f64 = 1e-6;

/// Relative size of imaginary parts treated as rounding noise in the
/// Hermitian frame.
const IMAG_SCRUB: f64 = 1e-12;

/// `g ⊗ conj(g)` acting on two vectorized physical indices, with axes
/// `(out₁, out₂, in₁, in₂)`.
#[derive(Clone, Debug)]
pub struct TwoSiteGate {
    local_dim: usize,
    delta_beta: f64,
    tensor: DenseTensor,
    // same map in Hermitian-frame coordinates, real for Hermitian h
    frame: DenseTensor,
}

impl TwoSiteGate {
    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn delta_beta(&self) -> f64 {
        self.delta_beta
    }

    pub fn tensor(&self) -> &DenseTensor {
        &self.tensor
    }

    /// The gate as a `d⁴×d⁴` matrix on `vec` of a two-site operator ordered
    /// `(k₁b₁, k₂b₂)`.
    pub fn matrix(&self) -> OperatorMatrix {
        let n = self.local_dim.pow(4);
        OperatorMatrix::from_complex(n, self.tensor.data().to_vec()).expect("square gate")
    }
}

/// Builds the slice gate for the model's bond term.
pub fn build_gate(model: &Model, delta_beta: f64) -> Result<TwoSiteGate> {
    if !(delta_beta >= 0.0) || !delta_beta.is_finite() {
        return Err(Error::Argument(format!("delta_beta must be non-negative, got {delta_beta}")));
    }
    let h = model.bond_matrix();
    if h.hermiticity_error() > 1e-12 {
        return Err(Error::Model(format!("{} bond term is not Hermitian", model.name())));
    }
    let d = model.local_dim();
    let g = h.exp_hermitian(-0.5 * delta_beta);
    let gc = g.conj();
    let tensor = DenseTensor::from_fn(&[d * d, d * d, d * d, d * d], |i| {
        let (k1, b1) = (i[0] / d, i[0] % d);
        let (k2, b2) = (i[1] / d, i[1] % d);
        let (k1p, b1p) = (i[2] / d, i[2] % d);
        let (k2p, b2p) = (i[3] / d, i[3] % d);
        g.get(k1 * d + k2, k1p * d + k2p) * gc.get(b1 * d + b2, b1p * d + b2p)
    });
    let w = hermitian_frame(d).to_tensor();
    let wd = hermitian_frame(d).dagger().to_tensor();
    // W⊗W · G · W†⊗W†
    let t = contract(&w, &tensor, &[(1, 0)])?;
    let t = contract(&w, &t, &[(1, 1)])?.permute(&[1, 0, 2, 3])?;
    let t = contract(&t, &wd, &[(2, 0)])?;
    let mut frame = contract(&t, &wd, &[(2, 0)])?;
    scrub_imag(&mut frame);
    Ok(TwoSiteGate {
        local_dim: d,
        delta_beta,
        tensor,
        frame,
    })
}

/// Drops imaginary parts that are rounding noise relative to the largest
/// element; returns whether the tensor is now real.
fn scrub_imag(t: &mut DenseTensor) -> bool {
    let scale = t.max_abs();
    let worst = t.data().iter().map(|x| x.im.abs()).fold(0.0, f64::max);
    if worst <= IMAG_SCRUB * scale {
        t.data_mut().iter_mut().for_each(|x| x.im = 0.0);
        true
    } else {
        false
    }
}

/// Tunable numerical thresholds of a single update.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UpdateParams {
    pub svd_cutoff: f64,
    pub lambda_floor: f64,
}

impl Default for UpdateParams {
    fn default() -> Self {
        Self {
            svd_cutoff: DEFAULT_SVD_CUTOFF,
            lambda_floor: DEFAULT_LAMBDA_FLOOR,
        }
    }
}

/// Applies `gate` on `bond` and truncates back to the PEPO's bond dimension.
/// Returns the updated state and the relative discarded weight.
pub fn simple_update_bond(
    p: &VectorizedPepo,
    gate: &TwoSiteGate,
    bond: Bond,
) -> Result<(VectorizedPepo, f64)> {
    let mut out = p.clone();
    let err = simple_update_in_place(&mut out, gate, bond, UpdateParams::default())?;
    Ok((out, err))
}

fn frame_legs(bond: Bond) -> (usize, usize) {
    if bond.is_horizontal() {
        (RIGHT, LEFT)
    } else {
        (DOWN, UP)
    }
}

/// Site tensor with `(k, b)` fused and mapped to Hermitian-frame coordinates,
/// axes `(μ, u, r, dn, l)`.
fn into_frame(site: &DenseTensor, w: &DenseTensor) -> Result<DenseTensor> {
    let s = site.shape();
    let fused = site.reshape(&[s[0] * s[1], s[2], s[3], s[4], s[5]])?;
    contract(w, &fused, &[(1, 0)])
}

fn out_of_frame(t: &DenseTensor, wd: &DenseTensor, d: usize) -> Result<DenseTensor> {
    let back = contract(wd, t, &[(1, 0)])?;
    let s = back.shape().to_vec();
    back.into_reshape(&[d, d, s[1], s[2], s[3], s[4]])
}

/// Environment weights of every virtual leg except `skip`, as fused-frame
/// axes (site leg − 1) paired with their λ vectors.
fn env_weights(p: &VectorizedPepo, s: Sublattice, skip: usize) -> Vec<(usize, Vec<f64>)> {
    (UP..=LEFT)
        .filter(|&l| l != skip)
        .map(|l| (l - 1, p.lambda(Bond::of_leg(s, l)).to_vec()))
        .collect()
}

fn pseudo_inverse(l: &[f64], floor: f64) -> Vec<f64> {
    l.iter().map(|&x| if x >= floor { 1.0 / x } else { 0.0 }).collect()
}

/// In-place variant of [`simple_update_bond`] with explicit thresholds.
pub fn simple_update_in_place(
    p: &mut VectorizedPepo,
    gate: &TwoSiteGate,
    bond: Bond,
    params: UpdateParams,
) -> Result<f64> {
    let d = p.local_dim();
    if gate.local_dim != d {
        return Err(Error::Dimension(format!(
            "gate for d = {} applied to a d = {d} state",
            gate.local_dim
        )));
    }
    let dd = d * d;
    let w = hermitian_frame(d);
    let wt = w.to_tensor();
    let wd = w.dagger().to_tensor();
    let (leg_x, leg_y) = frame_legs(bond);
    let (ax_x, ax_y) = (leg_x - 1, leg_y - 1);
    let sx = bond.first_site();
    let sy = sx.other();

    let mut x = into_frame(p.site(sx), &wt)?;
    let mut y = into_frame(p.site(sy), &wt)?;
    let env_x = env_weights(p, sx, leg_x);
    let env_y = env_weights(p, sy, leg_y);
    for (ax, l) in &env_x {
        x.scale_axis(*ax, l)?;
    }
    for (ax, l) in &env_y {
        y.scale_axis(*ax, l)?;
    }
    let real = scrub_imag(&mut x) & scrub_imag(&mut y);

    // X as [others | (μ, c)], Y as [(c, μ) | others]
    let others_x: Vec<usize> = (1..5).filter(|&a| a != ax_x).collect();
    let others_y: Vec<usize> = (1..5).filter(|&a| a != ax_y).collect();
    let x_dims: Vec<usize> = others_x.iter().map(|&a| x.shape()[a]).collect();
    let y_dims: Vec<usize> = others_y.iter().map(|&a| y.shape()[a]).collect();
    let dc = x.shape()[ax_x];

    let (mx, nx, xm) = x.to_matrix(&others_x, &[0, ax_x])?;
    let (qx, rx, kx) = linalg::qr(mx, nx, &xm);
    let (ny, my, ym) = y.to_matrix(&others_y, &[ax_y, 0])?;
    // Yᵀ = Q R  ⇒  Y = Rᵀ Qᵀ with Rᵀ the small factor
    let (qy, ry, ky) = linalg::qr(ny, my, &ym);

    let mut r_x = DenseTensor::new(vec![kx, dd, dc], rx)?;
    r_x.scale_axis(2, p.lambda(bond))?;
    // ry is [ky, (c, μ)] which is L_Yᵀ; keep it as [ky, c, μ]
    let l_y = DenseTensor::new(vec![ky, dc, dd], ry)?;
    let theta = contract(&r_x, &l_y, &[(2, 1)])?; // [kx, μ1, ky, μ2]
    let generic;
    let gate_t = if real {
        &gate.frame
    } else {
        generic = w_conjugated(gate, &wt, &wd)?;
        &generic
    };
    let mut theta = contract(gate_t, &theta, &[(2, 1), (3, 3)])?.permute(&[2, 0, 1, 3])?; // [kx, μ1, μ2, ky]
    if real {
        scrub_imag(&mut theta);
    }

    let svd = truncated_svd(&theta, &[0, 1], p.d_max(), params.svd_cutoff)?;
    let s0 = svd.singular_values[0];
    if !(s0 > 0.0) || !s0.is_finite() {
        return Err(Error::Numerical(format!(
            "{} update produced singular values {:?}",
            bond.name(),
            svd.singular_values
        )));
    }
    let lambda: Vec<f64> = svd.singular_values.iter().map(|s| s / s0).collect();
    let chi = lambda.len();

    // X' = Q_X · U, back to [others, μ, c]
    let qx_t = DenseTensor::new(vec![mx, kx], qx)?;
    let new_x = contract(&qx_t, &svd.left_isometry, &[(1, 0)])?; // [(others), μ, c]
    let mut shape_x = x_dims.clone();
    shape_x.extend([dd, chi]);
    let new_x = new_x.into_reshape(&shape_x)?;
    // Y' = V† · Q_Yᵀ, with Qy stored as [(others), ky]
    let qy_t = DenseTensor::new(vec![ny, ky], qy)?;
    let new_y = contract(&svd.right_isometry, &qy_t, &[(2, 1)])?; // [c, μ, (others)]
    let mut shape_y = vec![chi, dd];
    shape_y.extend(&y_dims);
    let new_y = new_y.into_reshape(&shape_y)?;

    let new_x = restore_axes(&new_x, &others_x, ax_x, true)?;
    let new_y = restore_axes(&new_y, &others_y, ax_y, false)?;
    let mut new_x = new_x;
    let mut new_y = new_y;
    for (ax, l) in &env_x {
        new_x.scale_axis(*ax, &pseudo_inverse(l, params.lambda_floor))?;
    }
    for (ax, l) in &env_y {
        new_y.scale_axis(*ax, &pseudo_inverse(l, params.lambda_floor))?;
    }
    let mut new_x = out_of_frame(&new_x, &wd, d)?;
    let mut new_y = out_of_frame(&new_y, &wd, d)?;
    new_x.normalize_max();
    new_y.normalize_max();
    p.replace(bond, new_x, new_y, lambda);
    Ok(svd.truncation_error)
}

/// The gate expressed in frame coordinates without discarding imaginary
/// parts, for states that are not Hermitian.
fn w_conjugated(gate: &TwoSiteGate, w: &DenseTensor, wd: &DenseTensor) -> Result<DenseTensor> {
    let t = contract(w, &gate.tensor, &[(1, 0)])?;
    let t = contract(w, &t, &[(1, 1)])?.permute(&[1, 0, 2, 3])?;
    let t = contract(&t, wd, &[(2, 0)])?;
    contract(&t, wd, &[(2, 0)])
}

/// Permutes a grouped `[others.., μ, c]` (or `[c, μ, others..]`) tensor back
/// to `(μ, u, r, dn, l)`.
fn restore_axes(t: &DenseTensor, others: &[usize], bond_axis: usize, bond_last: bool) -> Result<DenseTensor> {
    // position of each target axis inside t
    let mut pos = [0usize; 5];
    if bond_last {
        for (i, &a) in others.iter().enumerate() {
            pos[a] = i;
        }
        pos[0] = 3;
        pos[bond_axis] = 4;
    } else {
        pos[bond_axis] = 0;
        pos[0] = 1;
        for (i, &a) in others.iter().enumerate() {
            pos[a] = 2 + i;
        }
    }
    t.permute(&pos)
}

/// The slice schedule of an anneal. Checkpoints are snapped to whole sweeps.
#[derive(Clone, Debug, PartialEq)]
pub struct AnnealSchedule {
    pub delta_beta: f64,
    pub beta_max: f64,
    pub checkpoints: Vec<f64>,
    pub sweep_order: [Bond; 4],
    pub params: UpdateParams,
}

impl AnnealSchedule {
    pub fn new(delta_beta: f64, beta_max: f64, checkpoints: Vec<f64>) -> Result<Self> {
        let s = Self {
            delta_beta,
            beta_max,
            checkpoints,
            sweep_order: DEFAULT_SWEEP_ORDER,
            params: UpdateParams::default(),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta_beta > 0.0) || !self.delta_beta.is_finite() {
            return Err(Error::Argument(format!("delta_beta = {} must be positive", self.delta_beta)));
        }
        if !(self.beta_max >= self.delta_beta) || !self.beta_max.is_finite() {
            return Err(Error::Argument(format!(
                "beta_max = {} must be at least delta_beta",
                self.beta_max
            )));
        }
        if self.checkpoints.is_empty() {
            return Err(Error::Argument("no checkpoints".into()));
        }
        if self.checkpoints.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Argument("checkpoints must be strictly ascending".into()));
        }
        for &c in &self.checkpoints {
            if !(c > 0.0) || c > self.beta_max * (1.0 + 1e-12) {
                return Err(Error::Argument(format!(
                    "checkpoint {c} outside (0, {}]",
                    self.beta_max
                )));
            }
            if self.snap(c) == 0 {
                return Err(Error::Argument(format!(
                    "checkpoint {c} is below half a slice of {}",
                    self.delta_beta
                )));
            }
        }
        let mut order = self.sweep_order;
        order.sort();
        if order != Bond::ALL {
            return Err(Error::Argument("sweep order must list each bond once".into()));
        }
        Ok(())
    }

    /// Nearest whole number of sweeps for inverse temperature `beta`.
    pub fn snap(&self, beta: f64) -> u64 {
        (beta / self.delta_beta).round() as u64
    }

    pub fn total_sweeps(&self) -> u64 {
        self.snap(self.beta_max).max(self.checkpoint_sweeps().last().copied().unwrap_or(0))
    }

    /// Sweep counts of the checkpoints; checkpoints snapping to the same
    /// sweep collapse into one.
    pub fn checkpoint_sweeps(&self) -> Vec<u64> {
        let mut s: Vec<u64> = self.checkpoints.iter().map(|&c| self.snap(c)).collect();
        s.dedup();
        s
    }
}

/// State and diagnostics at one checkpoint of an anneal.
#[derive(Clone, Debug)]
pub struct Checkpoint {
    /// Snapped inverse temperature, `sweeps · Δβ`.
    pub beta: f64,
    pub sweeps: u64,
    pub snapshot: Snapshot,
    /// Largest single-update truncation error since the previous checkpoint.
    pub max_truncation: f64,
    /// Sum of truncation errors since the previous checkpoint.
    pub total_truncation: f64,
    pub hermiticity: f64,
    pub warning: Option<String>,
}

/// Iterator over the checkpoints of a running anneal.
pub struct Anneal {
    state: VectorizedPepo,
    gate: TwoSiteGate,
    schedule: AnnealSchedule,
    sweeps: u64,
    targets: std::vec::IntoIter<u64>,
    failed: bool,
}

/// Starts an anneal from `p` at β = 0 with bond dimension `d_max`.
pub fn anneal(p: VectorizedPepo, model: &Model, schedule: AnnealSchedule, d_max: usize) -> Result<Anneal> {
    let mut p = p;
    p.set_d_max(d_max)?;
    start(p, 0, model, schedule)
}

/// Continues an anneal from a saved checkpoint; only later checkpoints of
/// `schedule` are emitted.
pub fn resume(snapshot: Snapshot, model: &Model, schedule: AnnealSchedule) -> Result<Anneal> {
    if (snapshot.delta_beta - schedule.delta_beta).abs() > 1e-15 * schedule.delta_beta.max(1.0) {
        return Err(Error::Argument(format!(
            "snapshot slice {} differs from schedule slice {}",
            snapshot.delta_beta, schedule.delta_beta
        )));
    }
    start(snapshot.pepo, snapshot.sweeps, model, schedule)
}

fn start(p: VectorizedPepo, sweeps: u64, model: &Model, schedule: AnnealSchedule) -> Result<Anneal> {
    schedule.validate()?;
    if model.local_dim() != p.local_dim() {
        return Err(Error::Dimension(format!(
            "model {} has d = {} but the state has d = {}",
            model.name(),
            model.local_dim(),
            p.local_dim()
        )));
    }
    let gate = build_gate(model, schedule.delta_beta)?;
    let targets: Vec<u64> = schedule
        .checkpoint_sweeps()
        .into_iter()
        .filter(|&s| s > sweeps)
        .collect();
    Ok(Anneal {
        state: p,
        gate,
        schedule,
        sweeps,
        targets: targets.into_iter(),
        failed: false,
    })
}

impl Anneal {
    pub fn state(&self) -> &VectorizedPepo {
        &self.state
    }

    pub fn sweeps(&self) -> u64 {
        self.sweeps
    }

    fn advance_to(&mut self, target: u64) -> Result<Checkpoint> {
        let mut max_t: f64 = 0.0;
        let mut sum_t = 0.0;
        while self.sweeps < target {
            for bond in self.schedule.sweep_order {
                let e = simple_update_in_place(&mut self.state, &self.gate, bond, self.schedule.params)?;
                max_t = max_t.max(e);
                sum_t += e;
            }
            self.sweeps += 1;
            if !self.state.is_finite() {
                return Err(Error::NonFinite {
                    beta: self.sweeps as f64 * self.schedule.delta_beta,
                });
            }
        }
        let beta = self.sweeps as f64 * self.schedule.delta_beta;
        let hermiticity = self.state.hermiticity_deviation();
        let warning = (hermiticity > HERMITICITY_WARNING).then(|| {
            let msg = format!("hermiticity deviation {hermiticity:e} at beta = {beta}");
            log::warn!("{msg}");
            msg
        });
        log::debug!("beta = {beta}: max truncation {max_t:e}, summed {sum_t:e}");
        Ok(Checkpoint {
            beta,
            sweeps: self.sweeps,
            snapshot: Snapshot {
                beta,
                sweeps: self.sweeps,
                delta_beta: self.schedule.delta_beta,
                pepo: self.state.clone(),
            },
            max_truncation: max_t,
            total_truncation: sum_t,
            hermiticity,
            warning,
        })
    }
}

impl Iterator for Anneal {
    type Item = Result<Checkpoint>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        let target = self.targets.next()?;
        let out = self.advance_to(target);
        self.failed = out.is_err();
        Some(out)
    }
}
