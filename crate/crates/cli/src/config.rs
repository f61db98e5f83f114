//! Merges the optional JSON config file with command-line flags.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use rumour_core::model::{ModelParams, Preset};
use rumour_core::simulate::Mode;
use serde::Deserialize;

use crate::args::{CommonArgs, Format, ModeArg, ModelArgs, SimArgs, DEFAULT_N, DEFAULT_REPS, DEFAULT_SEED};

/// Contents of a `--config` file. Every field is optional.
///
/// ```json
/// { "model": { "preset": "rho", "rho": 0.5 }, "n": 10000, "reps": 10000, "seed": 7 }
/// ```
///
/// `params` (`lambda`, `gamma`, `theta1`, `theta2`, `delta`) may be given
/// instead of `model`.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub model: Option<Preset>,
    pub params: Option<ModelParams>,
    pub n: Option<u64>,
    pub reps: Option<u64>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub mode: Option<ModeArg>,
    pub format: Option<Format>,
    pub output: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<FileConfig> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("--config: cannot read {}", path.display()))?;
        serde_json::from_str(&text)
            .with_context(|| format!("--config: invalid run configuration in {}", path.display()))
    }
}

#[derive(Debug, Clone)]
pub struct Model {
    pub preset: Option<Preset>,
    pub params: ModelParams,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub model: Model,
    pub n: u64,
    pub reps: u64,
    pub seed: u64,
    pub workers: usize,
    pub mode: Mode,
    pub format: Format,
    pub output: Option<PathBuf>,
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

impl RunConfig {
    pub fn resolve(common: &CommonArgs, sim: Option<&SimArgs>) -> Result<RunConfig> {
        let file = match &common.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        let model = if !common.model.is_empty() {
            model_from_flags(&common.model)?
        } else {
            match (file.model, file.params) {
                (Some(_), Some(_)) => bail!("--config: give either `model` or `params`, not both"),
                (Some(preset), None) => {
                    Model { params: preset.params().map_err(|e| anyhow!("--config: {e}"))?, preset: Some(preset) }
                }
                (None, Some(params)) => Model { preset: None, params },
                (None, None) => bail!("no model given: use --preset or --lambda/--gamma/--theta1/--theta2/--delta"),
            }
        };
        let sim = sim.cloned().unwrap_or(SimArgs { reps: None, seed: None, workers: None, mode: None });
        let workers = sim.workers.or(file.workers).unwrap_or_else(default_workers);
        if workers == 0 {
            bail!("--workers must be >= 1");
        }
        let mode = match sim.mode.or(file.mode).unwrap_or(ModeArg::JumpChain) {
            ModeArg::JumpChain => Mode::JumpChain,
            ModeArg::ExactTime => Mode::ExactTime,
        };
        Ok(RunConfig {
            model,
            n: common.n.or(file.n).unwrap_or(DEFAULT_N),
            reps: sim.reps.or(file.reps).unwrap_or(DEFAULT_REPS),
            seed: sim.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
            workers,
            mode,
            format: common.out.format.or(file.format).unwrap_or(Format::Json),
            output: common.out.output.clone().or(file.output),
        })
    }
}

/// The auxiliary flags each preset takes. `gamma` is only a preset flag for kawachi.
fn preset_flags(name: &str) -> Option<&'static [&'static str]> {
    Some(match name {
        "dk" | "mt" | "hayes" => &[],
        "rho" => &["rho"],
        "apq_dk" | "apq_mt" => &["alpha", "p", "q"],
        "pearce" => &["p", "q1", "q2", "r"],
        "kawachi" => &["alpha", "beta", "gamma", "theta"],
        _ => return None,
    })
}

pub fn model_from_flags(m: &ModelArgs) -> Result<Model> {
    let Some(raw_name) = m.preset.as_deref() else {
        if let Some((flag, _)) = m.preset_values().iter().find(|(_, v)| v.is_some()) {
            bail!("--{flag} requires --preset");
        }
        let mut vals = [0.0; 5];
        for (slot, (flag, v)) in vals.iter_mut().zip(m.general_values()) {
            *slot = v.ok_or_else(|| anyhow!("--{flag} is required when no --preset is given"))?;
        }
        let params = ModelParams::new(vals[0], vals[1], vals[2], vals[3], vals[4])?;
        return Ok(Model { preset: None, params });
    };
    let name = raw_name.replace('-', "_").to_ascii_lowercase();
    let allowed =
        preset_flags(&name).ok_or_else(|| anyhow!("--preset: unknown preset `{raw_name}` (see `rumour presets`)"))?;

    let mut all: Vec<(&str, Option<f64>)> = m.preset_values().to_vec();
    all.extend(m.general_values());
    for (flag, v) in &all {
        if v.is_some() && !allowed.contains(flag) {
            bail!("--{flag} does not apply to preset {name}");
        }
    }
    let get = |flag: &str| -> Result<f64> {
        all.iter()
            .find(|(f, _)| *f == flag)
            .and_then(|(_, v)| *v)
            .ok_or_else(|| anyhow!("--{flag} is required for preset {name}"))
    };
    let preset = match name.as_str() {
        "dk" => Preset::Dk,
        "mt" => Preset::Mt,
        "hayes" => Preset::Hayes,
        "rho" => Preset::Rho { rho: get("rho")? },
        "apq_dk" => Preset::ApqDk { alpha: get("alpha")?, p: get("p")?, q: get("q")? },
        "apq_mt" => Preset::ApqMt { alpha: get("alpha")?, p: get("p")?, q: get("q")? },
        "pearce" => Preset::Pearce { p: get("p")?, q1: get("q1")?, q2: get("q2")?, r: get("r")? },
        "kawachi" => {
            Preset::Kawachi { alpha: get("alpha")?, beta: get("beta")?, gamma: get("gamma")?, theta: get("theta")? }
        }
        _ => unreachable!("checked by preset_flags"),
    };
    let params = preset.params()?;
    Ok(Model { preset: Some(preset), params })
}
