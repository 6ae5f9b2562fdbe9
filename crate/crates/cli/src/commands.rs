//! Subcommands: each builds its table, writes it, and reports failures after
//! the rows that were completed.

use std::path::{Path, PathBuf};

use pepo_core::{onsager_magnetization, Snapshot};

use crate::checks::run_checks;
use crate::config::{default_mu_grid, default_temperatures, ModelName, RunConfig};
use crate::error::CliError;
use crate::output::{fmt_num, fmt_opt, timestamp_comment, Table};
use crate::run::{
    exact_pepo_magnetization, run_anneal, run_ising_bench, run_scan, AnnealRow, BenchRow, BenchSummary, ScanRow,
    CRITICAL_WINDOW,
};

fn describe(cfg: &RunConfig, table: &mut Table, command: &str) {
    table.comment(format!("pepo {command}"));
    table.comment(timestamp_comment());
    let m = &cfg.model;
    table.comment(format!(
        "model = {:?}, j = {}, mu = {}, u = {}, h_pin = {}",
        m.name,
        fmt_num(m.j),
        fmt_num(m.mu),
        fmt_num(m.u),
        fmt_num(m.h_pin)
    ));
    table.comment(format!(
        "d_max = {}, chi = {}, delta_beta = {}, ctm_tol = {}",
        cfg.d_max,
        cfg.chi(),
        fmt_num(cfg.delta_beta),
        fmt_num(cfg.ctm_tol)
    ));
    table.comment("beta_target is the requested inverse temperature; beta is its nearest whole slice");
}

fn model_columns(name: ModelName) -> &'static [&'static str] {
    match name {
        ModelName::Ising => &["magnetization", "sz"],
        _ => &["density", "sf_param", "var_n"],
    }
}

pub fn anneal_table(cfg: &RunConfig, rows: &[AnnealRow]) -> Table {
    let cols = model_columns(cfg.model.name);
    let mut header = vec!["beta_target", "beta", "T", "sweeps"];
    header.extend_from_slice(cols);
    header.extend_from_slice(&["trunc_err", "trunc_total", "herm_dev", "ctm_iters", "converged", "sublattice_spread"]);
    let mut t = Table::new(header);
    for r in rows {
        let mut row = vec![fmt_num(r.beta_target), fmt_num(r.beta), fmt_num(r.record.temperature), r.sweeps.to_string()];
        row.extend(cols.iter().map(|c| fmt_opt(r.record.get(c))));
        row.extend([
            fmt_num(r.max_truncation),
            fmt_num(r.total_truncation),
            fmt_num(r.hermiticity),
            r.record.meta.ctm_iterations.to_string(),
            r.record.meta.ctm_converged.to_string(),
            fmt_num(r.record.meta.sublattice_spread),
        ]);
        t.push(row);
    }
    t
}

/// Per-checkpoint run log: diagnostics and wall time.
pub fn log_table(rows: &[AnnealRow]) -> Table {
    let mut t = Table::new(["beta", "sweeps", "trunc_err", "trunc_total", "herm_dev", "wall_s", "warning"]);
    t.comment(timestamp_comment());
    for r in rows {
        t.push(vec![
            fmt_num(r.beta),
            r.sweeps.to_string(),
            fmt_num(r.max_truncation),
            fmt_num(r.total_truncation),
            fmt_num(r.hermiticity),
            format!("{:.3}", r.wall),
            r.warning.clone().unwrap_or_default(),
        ]);
    }
    t
}

pub fn scan_table(cfg: &RunConfig, rows: &[ScanRow]) -> Table {
    let mut t = Table::new([
        "mu", "T", "beta", "sweeps", "D", "n", "sf_param", "var_n", "trunc_err", "herm_dev", "ctm_iters", "converged",
        "error",
    ]);
    for r in rows {
        let rec = r.record.as_ref();
        t.push(vec![
            fmt_num(r.mu),
            fmt_num(r.temperature),
            fmt_opt(r.beta),
            r.sweeps.map(|s| s.to_string()).unwrap_or_default(),
            cfg.d_max.to_string(),
            fmt_opt(rec.and_then(|x| x.get("density"))),
            fmt_opt(rec.and_then(|x| x.get("sf_param"))),
            fmt_opt(rec.and_then(|x| x.get("var_n"))),
            fmt_opt(r.max_truncation),
            fmt_opt(r.hermiticity),
            rec.map(|x| x.meta.ctm_iterations.to_string()).unwrap_or_default(),
            rec.map(|x| x.meta.ctm_converged.to_string()).unwrap_or_default(),
            r.error.clone().unwrap_or_default(),
        ]);
    }
    t
}

pub fn bench_table(rows: &[BenchRow]) -> Table {
    let mut t = Table::new([
        "beta_target", "beta", "m_anneal", "m_exact_pepo", "m_onsager", "abs_err", "rel_err", "herm_dev", "trunc_err",
        "converged",
    ]);
    for r in rows {
        t.push(vec![
            fmt_num(r.beta_target),
            fmt_num(r.beta),
            fmt_num(r.m_anneal),
            fmt_num(r.m_exact_pepo),
            fmt_num(r.m_onsager),
            fmt_num(r.abs_err),
            fmt_num(r.rel_err),
            fmt_num(r.hermiticity),
            fmt_num(r.max_truncation),
            r.converged.to_string(),
        ]);
    }
    t
}

pub fn summary_line(s: &BenchSummary) -> String {
    format!(
        "summary: rows = {}, max abs_err = {}, max rel_err = {}, max exact-state error = {}",
        s.rows_used,
        fmt_num(s.max_abs_err),
        fmt_num(s.max_rel_err),
        fmt_num(s.max_exact_err)
    )
}

fn snapshot_dir(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".snapshots");
    PathBuf::from(name)
}

pub fn log_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".log.csv");
    PathBuf::from(name)
}

/// Snapshot file written for the checkpoint after `sweeps` slices.
pub fn snapshot_path(out: &Path, sweeps: u64) -> PathBuf {
    snapshot_dir(out).join(format!("sweeps_{sweeps:09}.json"))
}

fn finish(table: &Table, out: Option<&Path>, failure: Option<CliError>) -> Result<(), CliError> {
    table.write(out)?;
    match failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

pub fn cmd_anneal(cfg: &RunConfig, out: Option<&Path>, resume_from: Option<&Path>) -> Result<(), CliError> {
    let betas = cfg.requested_betas();
    if betas.is_empty() {
        return Err(CliError::Usage("no checkpoints: set checkpoints, temperatures or checkpoint_every".into()));
    }
    let from = resume_from
        .map(|p| Snapshot::load(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display()))))
        .transpose()?;
    if cfg.snapshots {
        match out {
            Some(o) => std::fs::create_dir_all(snapshot_dir(o))?,
            None => log::warn!("snapshots need --out; none will be written"),
        }
    }
    let outcome = run_anneal(cfg, &betas, from, |c| {
        if let (true, Some(o)) = (cfg.snapshots, out) {
            c.snapshot.save(&snapshot_path(o, c.sweeps))?;
        }
        Ok(())
    })?;
    let mut table = anneal_table(cfg, &outcome.rows);
    describe(cfg, &mut table, "anneal");
    if let Some(p) = resume_from {
        table.comment(format!("resumed from {}", p.display()));
    }
    if let Some(o) = out {
        log_table(&outcome.rows).write(Some(&log_path(o)))?;
    }
    finish(&table, out, outcome.failure)
}

pub fn cmd_scan(cfg: &RunConfig, out: Option<&Path>, workers: usize) -> Result<(), CliError> {
    let mus = cfg.scan.mu.clone().unwrap_or_else(default_mu_grid);
    let temps = cfg.scan.temperatures.clone().unwrap_or_else(default_temperatures);
    let rows = run_scan(cfg, &mus, &temps, workers)?;
    let mut table = scan_table(cfg, &rows);
    describe(cfg, &mut table, "scan");
    table.comment(format!("workers = {workers}"));
    let failures = rows.iter().filter(|r| r.error.is_some()).count();
    if failures > 0 {
        log::warn!("{failures} scan points failed");
    }
    finish(&table, out, None)
}

pub fn cmd_ising_bench(cfg: &RunConfig, out: Option<&Path>) -> Result<(), CliError> {
    let betas = cfg.requested_betas();
    if betas.is_empty() {
        return Err(CliError::Usage("no checkpoints for the benchmark".into()));
    }
    let (rows, summary, failure) = run_ising_bench(cfg, &betas)?;
    let mut table = bench_table(&rows);
    describe(cfg, &mut table, "ising-bench");
    table.comment(format!(
        "rel_err = abs_err / max(m_onsager, 1e-3); the summary skips beta in [{}, {}]",
        CRITICAL_WINDOW.0, CRITICAL_WINDOW.1
    ));
    table.comment(summary_line(&summary));
    eprintln!("{}", summary_line(&summary));
    finish(&table, out, failure)
}

/// Measures the closed-form Ising state at each requested β, unsnapped.
pub fn cmd_exact_ising(cfg: &RunConfig, out: Option<&Path>) -> Result<(), CliError> {
    if cfg.model.name != ModelName::Ising {
        return Err(CliError::Usage("exact-ising needs the ising model".into()));
    }
    let betas = cfg.requested_betas();
    if betas.is_empty() {
        return Err(CliError::Usage("no checkpoints requested".into()));
    }
    let mut table = Table::new(["beta", "T", "magnetization", "m_onsager", "abs_err", "ctm_iters", "converged"]);
    describe(cfg, &mut table, "exact-ising");
    let mut failure = None;
    for &b in &betas {
        match exact_pepo_magnetization(cfg, b) {
            Ok(r) => {
                let m = r.get("magnetization").unwrap_or(f64::NAN);
                let exact = onsager_magnetization(b);
                table.push(vec![
                    fmt_num(b),
                    fmt_num(r.temperature),
                    fmt_num(m),
                    fmt_num(exact),
                    fmt_num((m - exact).abs()),
                    r.meta.ctm_iterations.to_string(),
                    r.meta.ctm_converged.to_string(),
                ]);
            }
            Err(e) => {
                failure = Some(e);
                break;
            }
        }
    }
    finish(&table, out, failure)
}

pub fn cmd_oracle(out: Option<&Path>) -> Result<(), CliError> {
    let checks = run_checks();
    let mut table = Table::new(["check", "value", "min", "max", "pass"]);
    table.comment("pepo oracle");
    for c in &checks {
        table.push(vec![c.name.clone(), fmt_num(c.value), fmt_num(c.range.0), fmt_num(c.range.1), c.passed().to_string()]);
    }
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed()).map(|c| c.name.as_str()).collect();
    let failure = (!failed.is_empty())
        .then(|| CliError::Numerical(pepo_core::Error::Numerical(format!("oracle checks failed: {}", failed.join(", ")))));
    finish(&table, out, failure)
}
