use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};
use rumour_core::clt::{fluid_trajectory, CltAnalysis};
use rumour_core::json::to_canonical_json;
use rumour_core::limits::solve_x_infinity;
use rumour_core::model::{ModelParams, Preset};
use rumour_core::simulate::{
    exact_final_distribution_with_limit, monte_carlo, run_replications, verify, McStats, Mode, VerifyConfig, BLOCK_SIZE,
};
use serde::Serialize;

use crate::args::{Format, OutputArgs};
use crate::config::RunConfig;

/// Replications held in memory at once while dumping per-replication rows.
const DUMP_CHUNK: u64 = 64 * BLOCK_SIZE;

pub enum Outcome {
    Success,
    VerificationFailed,
}

fn emit(bytes: &[u8], output: Option<&Path>) -> Result<()> {
    match output {
        Some(path) => std::fs::write(path, bytes).with_context(|| format!("--output: cannot write {}", path.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
            Ok(())
        }
    }
}

fn emit_json<T: Serialize + ?Sized>(value: &T, cfg_output: Option<&Path>) -> Result<()> {
    emit(to_canonical_json(value)?.as_bytes(), cfg_output)
}

fn json_only(cfg: &RunConfig, command: &str) -> Result<()> {
    if cfg.format != Format::Json {
        bail!("--format csv is not available for `{command}`; use json");
    }
    Ok(())
}

/// Full-precision CSV field.
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Serialize)]
struct ModelOut<'a> {
    #[serde(skip_serializing_if = "Option::is_none")]
    preset: Option<&'a Preset>,
    params: &'a ModelParams,
}

fn model_out(cfg: &RunConfig) -> ModelOut<'_> {
    ModelOut { preset: cfg.model.preset.as_ref(), params: &cfg.model.params }
}

pub fn limit(cfg: &RunConfig) -> Result<Outcome> {
    json_only(cfg, "limit")?;
    let lim = solve_x_infinity(&cfg.model.params)?;
    emit_json(&lim, cfg.output.as_deref())?;
    Ok(Outcome::Success)
}

pub fn clt(cfg: &RunConfig, cross_check: bool) -> Result<Outcome> {
    json_only(cfg, "clt")?;
    let p = &cfg.model.params;
    let report = CltAnalysis::new(p)?.report(p, cross_check)?;
    emit_json(&report, cfg.output.as_deref())?;
    Ok(Outcome::Success)
}

pub fn fluid(cfg: &RunConfig, t_max: Option<f64>, points: usize) -> Result<Outcome> {
    let p = &cfg.model.params;
    let analysis = CltAnalysis::new(p)?;
    let t_max = t_max.unwrap_or(analysis.t_inf);
    if !(t_max > 0.0 && t_max.is_finite()) {
        bail!("--t-max must be positive and finite (got {t_max})");
    }
    if points < 2 {
        bail!("--points must be >= 2 (got {points})");
    }
    let grid: Vec<f64> = (0..points).map(|i| t_max * i as f64 / (points - 1) as f64).collect();
    let traj = fluid_trajectory(&grid, p)?;
    match cfg.format {
        Format::Json => {
            #[derive(Serialize)]
            struct FluidOut<'a> {
                model: ModelOut<'a>,
                t_inf: f64,
                trajectory: &'a [rumour_core::clt::FluidPoint],
            }
            emit_json(
                &FluidOut { model: model_out(cfg), t_inf: analysis.t_inf, trajectory: &traj },
                cfg.output.as_deref(),
            )?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["t", "x", "u", "y"])?;
            for pt in &traj {
                w.write_record([num(pt.t), num(pt.x), num(pt.u), num(pt.y)])?;
            }
            emit(&w.into_inner()?, cfg.output.as_deref())?;
        }
    }
    Ok(Outcome::Success)
}

#[derive(Serialize)]
struct Summary {
    x_mean: f64,
    u_mean: f64,
    /// Sample covariance of `sqrt(n) (X/n, U/n)` over all replications.
    sigma_emp: Option<[[f64; 2]; 2]>,
    minor_outbreaks: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    mean_absorption_time: Option<f64>,
}

/// Runs the replications in chunks, streaming rows to `path`. Statistics are
/// merged block by block exactly as [`monte_carlo`] does.
fn simulate_with_dump(cfg: &RunConfig, path: &Path) -> Result<McStats> {
    let p = &cfg.model.params;
    let x_inf = solve_x_infinity(p)?.x_inf;
    let empty = McStats::empty(cfg.n, cfg.seed, McStats::minor_cutoff_for(cfg.n, x_inf));
    let mut writer =
        csv::Writer::from_path(path).with_context(|| format!("--dump: cannot write {}", path.display()))?;
    writer.write_record(["rep", "x_final", "u_final", "z_final", "absorption_time"])?;
    let mut total = empty.clone();
    let mut start = 0;
    while start < cfg.reps {
        let end = (start + DUMP_CHUNK).min(cfg.reps);
        let outcomes = run_replications(cfg.n, p, cfg.seed, start..end, cfg.mode, cfg.workers)?;
        for (b, block) in outcomes.chunks(BLOCK_SIZE as usize).enumerate() {
            let mut s = empty.clone();
            for (i, o) in block.iter().enumerate() {
                s.record(o);
                let rep = start + b as u64 * BLOCK_SIZE + i as u64;
                let fin = o.final_state;
                let tau = o.absorption_time.map(num).unwrap_or_default();
                writer.write_record([rep.to_string(), fin.x.to_string(), fin.u.to_string(), fin.z.to_string(), tau])?;
            }
            total = total.merge(&s)?;
        }
        start = end;
    }
    writer.flush()?;
    Ok(total)
}

fn check_sim(cfg: &RunConfig) -> Result<()> {
    if cfg.n < 1 {
        bail!("--n must be >= 1");
    }
    if cfg.reps < 1 {
        bail!("--reps must be >= 1");
    }
    Ok(())
}

pub fn simulate(cfg: &RunConfig, dump: Option<&Path>) -> Result<Outcome> {
    json_only(cfg, "simulate")?;
    check_sim(cfg)?;
    let stats = match dump {
        Some(path) => simulate_with_dump(cfg, path)?,
        None => monte_carlo(cfg.n, cfg.reps, &cfg.model.params, cfg.seed, cfg.workers, cfg.mode)?,
    };
    let (x_mean, u_mean) = stats.all.means(cfg.n);
    #[derive(Serialize)]
    struct SimulateOut<'a> {
        model: ModelOut<'a>,
        mode: Mode,
        summary: Summary,
        stats: &'a McStats,
    }
    let summary = Summary {
        x_mean,
        u_mean,
        sigma_emp: stats.all.scaled_covariance(cfg.n).map(|c| c.to_array()),
        minor_outbreaks: stats.minor_outbreaks(),
        mean_absorption_time: stats.mean_absorption_time(),
    };
    emit_json(&SimulateOut { model: model_out(cfg), mode: cfg.mode, summary, stats: &stats }, cfg.output.as_deref())?;
    Ok(Outcome::Success)
}

pub fn verify_cmd(cfg: &RunConfig, include_minor: bool) -> Result<Outcome> {
    json_only(cfg, "verify")?;
    check_sim(cfg)?;
    if cfg.reps < 2 {
        bail!("--reps must be >= 2 to estimate a covariance");
    }
    let p = &cfg.model.params;
    let analysis = CltAnalysis::new(p)?;
    let stats = monte_carlo(cfg.n, cfg.reps, p, cfg.seed, cfg.workers, cfg.mode)?;
    let config = VerifyConfig { major_only: !include_minor, ..VerifyConfig::default() };
    let report = verify(&stats, &analysis.limit, &analysis.sigma, &config)?;
    #[derive(Serialize)]
    struct VerifyOut<'a> {
        model: ModelOut<'a>,
        seed: u64,
        mode: Mode,
        config: VerifyConfig,
        report: &'a rumour_core::simulate::VerificationReport,
    }
    emit_json(
        &VerifyOut { model: model_out(cfg), seed: cfg.seed, mode: cfg.mode, config, report: &report },
        cfg.output.as_deref(),
    )?;
    Ok(if report.pass { Outcome::Success } else { Outcome::VerificationFailed })
}

pub fn oracle(cfg: &RunConfig, max_n: u64) -> Result<Outcome> {
    let dist = exact_final_distribution_with_limit(cfg.n, &cfg.model.params, max_n)?;
    let support = dist.support();
    match cfg.format {
        Format::Json => {
            #[derive(Serialize)]
            struct Cell {
                x: u64,
                u: u64,
                p: f64,
            }
            #[derive(Serialize)]
            struct OracleOut<'a> {
                model: ModelOut<'a>,
                n: u64,
                total_mass: f64,
                mean_x_fraction: f64,
                mean_u_fraction: f64,
                distribution: Vec<Cell>,
            }
            let out = OracleOut {
                model: model_out(cfg),
                n: cfg.n,
                total_mass: dist.total_mass(),
                mean_x_fraction: dist.mean_x_fraction(),
                mean_u_fraction: dist.mean_u_fraction(),
                distribution: support.iter().map(|&((x, u), p)| Cell { x, u, p }).collect(),
            };
            emit_json(&out, cfg.output.as_deref())?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["x_final", "u_final", "probability"])?;
            for ((x, u), p) in support {
                w.write_record([x.to_string(), u.to_string(), num(p)])?;
            }
            emit(&w.into_inner()?, cfg.output.as_deref())?;
        }
    }
    Ok(Outcome::Success)
}

pub fn presets(out: &OutputArgs) -> Result<Outcome> {
    #[derive(Serialize)]
    struct Entry {
        name: &'static str,
        mapping: &'static str,
        example: Preset,
        example_params: ModelParams,
    }
    let entries: Vec<Entry> = Preset::catalog()
        .into_iter()
        .map(|p| Ok(Entry { name: p.name(), mapping: p.mapping(), example_params: p.params()?, example: p }))
        .collect::<Result<_>>()?;
    match out.format.unwrap_or(Format::Json) {
        Format::Json => emit_json(&entries, out.output.as_deref())?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["name", "mapping"])?;
            for e in &entries {
                w.write_record([e.name, e.mapping])?;
            }
            emit(&w.into_inner()?, out.output.as_deref())?;
        }
    }
    Ok(Outcome::Success)
}
