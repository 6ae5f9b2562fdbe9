//! Anneal, scan and benchmark pipelines producing in-memory rows.

use std::time::Instant;

use pepo_core::ctm::ctm_converge;
use pepo_core::evolution::{anneal, resume, Checkpoint};
use pepo_core::{exact_ising_pepo, identity_pepo, measure, onsager_magnetization, Model, ObservableRecord, Snapshot, VectorizedPepo};
use rayon::prelude::*;

use crate::config::{ModelName, RunConfig};
use crate::error::CliError;

/// Critical window excluded from the benchmark summary.
pub const CRITICAL_WINDOW: (f64, f64) = (0.40, 0.48);
/// Floor of the relative-error denominator.
pub const REL_ERR_FLOOR: f64 = 1e-3;

/// Converges a fresh environment and measures the model observables.
pub fn measure_state(cfg: &RunConfig, model: &Model, p: &VectorizedPepo, beta: f64) -> Result<ObservableRecord, CliError> {
    let env = ctm_converge(p, cfg.chi(), cfg.ctm_tol, cfg.ctm_max_iters)?;
    Ok(measure(model, &env, p, beta)?)
}

#[derive(Clone, Debug)]
pub struct AnnealRow {
    /// First requested β that snapped onto this checkpoint.
    pub beta_target: f64,
    pub beta: f64,
    pub sweeps: u64,
    pub record: ObservableRecord,
    pub max_truncation: f64,
    pub total_truncation: f64,
    pub hermiticity: f64,
    pub warning: Option<String>,
    /// Seconds since the start of the run.
    pub wall: f64,
}

#[derive(Debug)]
pub struct AnnealOutcome {
    pub rows: Vec<AnnealRow>,
    /// Failure that stopped the run after the rows above.
    pub failure: Option<CliError>,
}

/// Runs one anneal over `betas` (requested inverse temperatures), measuring
/// at every checkpoint. `on_checkpoint` sees each raw checkpoint first.
pub fn run_anneal(
    cfg: &RunConfig,
    betas: &[f64],
    from: Option<Snapshot>,
    mut on_checkpoint: impl FnMut(&Checkpoint) -> Result<(), CliError>,
) -> Result<AnnealOutcome, CliError> {
    let model = cfg.model.build()?;
    let schedule = cfg.schedule(betas)?;
    let targets: Vec<(u64, f64)> = betas.iter().map(|&b| (schedule.snap(b), b)).collect();
    let run = match from {
        Some(s) => {
            if s.pepo.d_max() != cfg.d_max {
                return Err(CliError::Config(format!(
                    "snapshot has d_max = {} but the config asks for {}",
                    s.pepo.d_max(),
                    cfg.d_max
                )));
            }
            resume(s, &model, schedule).map_err(|e| CliError::Config(e.to_string()))?
        }
        None => anneal(identity_pepo(model.local_dim())?, &model, schedule, cfg.d_max)?,
    };
    let start = Instant::now();
    let mut rows = Vec::new();
    for c in run {
        let step = c.map_err(CliError::from).and_then(|c| {
            on_checkpoint(&c)?;
            if let Some(w) = &c.warning {
                log::warn!("{w}");
            }
            let record = measure_state(cfg, &model, &c.snapshot.pepo, c.beta)?;
            let beta_target = targets.iter().find(|t| t.0 == c.sweeps).map_or(c.beta, |t| t.1);
            Ok(AnnealRow {
                beta_target,
                beta: c.beta,
                sweeps: c.sweeps,
                record,
                max_truncation: c.max_truncation,
                total_truncation: c.total_truncation,
                hermiticity: c.hermiticity,
                warning: c.warning,
                wall: start.elapsed().as_secs_f64(),
            })
        });
        match step {
            Ok(row) => {
                log::info!("beta = {} done after {:.1} s", row.beta, row.wall);
                rows.push(row);
            }
            Err(e) => return Ok(AnnealOutcome { rows, failure: Some(e) }),
        }
    }
    Ok(AnnealOutcome { rows, failure: None })
}

#[derive(Clone, Debug)]
pub struct ScanRow {
    pub mu: f64,
    pub temperature: f64,
    pub beta: Option<f64>,
    pub sweeps: Option<u64>,
    pub record: Option<ObservableRecord>,
    pub max_truncation: Option<f64>,
    pub hermiticity: Option<f64>,
    pub error: Option<String>,
}

/// One anneal per μ down to the lowest temperature, measured at every
/// temperature, on a pool of `workers` threads. Rows come back sorted by μ
/// then T; points that fail carry the error instead of values.
pub fn run_scan(cfg: &RunConfig, mus: &[f64], temperatures: &[f64], workers: usize) -> Result<Vec<ScanRow>, CliError> {
    if mus.is_empty() {
        return Err(CliError::Usage("empty chemical potential grid".into()));
    }
    if temperatures.is_empty() {
        return Err(CliError::Usage("empty temperature list".into()));
    }
    if cfg.model.name == ModelName::Ising {
        return Err(CliError::Usage("scan needs a boson model".into()));
    }
    if let Some(t) = temperatures.iter().find(|&&t| !(t > 0.0) || !t.is_finite()) {
        return Err(CliError::Usage(format!("temperature {t} must be positive")));
    }
    for &mu in mus {
        cfg.model.with_mu(mu).build()?;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let mut rows: Vec<ScanRow> = pool.install(|| {
        mus.par_iter().flat_map_iter(|&mu| scan_point(cfg, mu, temperatures)).collect()
    });
    rows.sort_by(|a, b| a.mu.total_cmp(&b.mu).then(a.temperature.total_cmp(&b.temperature)));
    Ok(rows)
}

fn scan_point(cfg: &RunConfig, mu: f64, temperatures: &[f64]) -> Vec<ScanRow> {
    let mut point = cfg.clone();
    point.model = cfg.model.with_mu(mu);
    point.checkpoints.clear();
    point.checkpoint_every = None;
    point.beta_max = None;
    point.temperatures = temperatures.to_vec();
    let betas = point.requested_betas();
    let failed = |t: f64, e: &str| ScanRow {
        mu,
        temperature: t,
        beta: None,
        sweeps: None,
        record: None,
        max_truncation: None,
        hermiticity: None,
        error: Some(e.to_string()),
    };
    let outcome = match run_anneal(&point, &betas, None, |_| Ok(())) {
        Ok(o) => o,
        Err(e) => return temperatures.iter().map(|&t| failed(t, &e.to_string())).collect(),
    };
    let schedule = match point.schedule(&betas) {
        Ok(s) => s,
        Err(e) => return temperatures.iter().map(|&t| failed(t, &e.to_string())).collect(),
    };
    let message = outcome.failure.as_ref().map(|e| e.to_string());
    if let Some(m) = &message {
        log::error!("mu = {mu}: {m}");
    }
    temperatures
        .iter()
        .map(|&t| {
            let sweeps = schedule.snap(1.0 / t);
            match outcome.rows.iter().find(|r| r.sweeps == sweeps) {
                Some(r) => ScanRow {
                    mu,
                    temperature: t,
                    beta: Some(r.beta),
                    sweeps: Some(r.sweeps),
                    record: Some(r.record.clone()),
                    max_truncation: Some(r.max_truncation),
                    hermiticity: Some(r.hermiticity),
                    error: None,
                },
                None => failed(t, message.as_deref().unwrap_or("checkpoint not reached")),
            }
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct BenchRow {
    pub beta_target: f64,
    pub beta: f64,
    pub m_anneal: f64,
    pub m_exact_pepo: f64,
    pub m_onsager: f64,
    pub abs_err: f64,
    pub rel_err: f64,
    pub hermiticity: f64,
    pub max_truncation: f64,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchSummary {
    /// Largest |m_anneal − m_onsager| outside the critical window.
    pub max_abs_err: f64,
    pub max_rel_err: f64,
    /// Largest |m_exact_pepo − m_onsager| outside the critical window.
    pub max_exact_err: f64,
    pub rows_used: usize,
}

pub fn in_critical_window(beta: f64) -> bool {
    (CRITICAL_WINDOW.0..=CRITICAL_WINDOW.1).contains(&beta)
}

/// Magnetization of the closed-form D = 2 Ising state at `beta`.
pub fn exact_pepo_magnetization(cfg: &RunConfig, beta: f64) -> Result<ObservableRecord, CliError> {
    let model = cfg.model.build()?;
    let p = exact_ising_pepo(beta)?;
    measure_state(cfg, &model, &p, beta)
}

/// Annealed and exact-state magnetizations against the closed form.
pub fn run_ising_bench(cfg: &RunConfig, betas: &[f64]) -> Result<(Vec<BenchRow>, BenchSummary, Option<CliError>), CliError> {
    if cfg.model.name != ModelName::Ising {
        return Err(CliError::Usage("ising-bench needs the ising model".into()));
    }
    let outcome = run_anneal(cfg, betas, None, |_| Ok(()))?;
    let mut rows = Vec::new();
    for r in &outcome.rows {
        let exact = exact_pepo_magnetization(cfg, r.beta)?;
        let m_anneal = r.record.get("magnetization").unwrap_or(f64::NAN);
        let m_onsager = onsager_magnetization(r.beta);
        let abs_err = (m_anneal - m_onsager).abs();
        rows.push(BenchRow {
            beta_target: r.beta_target,
            beta: r.beta,
            m_anneal,
            m_exact_pepo: exact.get("magnetization").unwrap_or(f64::NAN),
            m_onsager,
            abs_err,
            rel_err: abs_err / m_onsager.max(REL_ERR_FLOOR),
            hermiticity: r.hermiticity,
            max_truncation: r.max_truncation,
            converged: r.record.meta.ctm_converged && exact.meta.ctm_converged,
        });
    }
    let used: Vec<&BenchRow> = rows.iter().filter(|r| !in_critical_window(r.beta)).collect();
    let max = |f: &dyn Fn(&BenchRow) -> f64| used.iter().map(|r| f(r)).fold(0.0, f64::max);
    let summary = BenchSummary {
        max_abs_err: max(&|r| r.abs_err),
        max_rel_err: max(&|r| r.rel_err),
        max_exact_err: max(&|r| (r.m_exact_pepo - r.m_onsager).abs()),
        rows_used: used.len(),
    };
    Ok((rows, summary, outcome.failure))
}
