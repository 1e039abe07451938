//! Experiment configuration: a JSON file with optional fields, command-line
//! overrides, and per-experiment defaults.

use std::path::{Path, PathBuf};

use nepec::{NoiseKind, NoiseModel, Shots};
use serde::{Deserialize, Serialize};

use crate::{CliError, Result};

pub const SEED_ENV: &str = "NEPEC_SEED";
const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Fig2,
    Fig3a,
    Fig3b,
    AmpDamp,
    NoGo,
    Decompose,
}

/// Where the circuit comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CircuitSource {
    Rb {
        depth: usize,
        #[serde(default)]
        seed: Option<u64>,
    },
    File {
        path: PathBuf,
    },
}

/// `"exact"` or a positive shot count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ShotsSpec {
    Count(u32),
    Named(String),
}

impl ShotsSpec {
    fn resolve(&self) -> Result<Shots> {
        match self {
            ShotsSpec::Count(0) => Err(CliError::Config("shots must be positive".into())),
            ShotsSpec::Count(n) => Ok(Shots::PerSample(*n)),
            ShotsSpec::Named(s) if s == "exact" => Ok(Shots::Exact),
            ShotsSpec::Named(s) => Err(CliError::Config(format!("unknown shot mode {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Option<ExperimentKind>,
    pub noise: Option<NoiseModel>,
    pub circuit: Option<CircuitSource>,
    /// Hardware scale factors for gate extrapolation.
    pub scale_factors: Option<Vec<f64>>,
    /// Virtual noise levels for error reduction, or scale factors for the
    /// convexity sweep.
    pub lambdas: Option<Vec<f64>>,
    /// Virtual scale factors for virtual ZNE.
    pub virtual_scale_factors: Option<Vec<f64>>,
    /// Noise level the PEC representations are built for.
    pub assumed_p: Option<f64>,
    /// Actual noise levels to sweep.
    pub p_grid: Option<Vec<f64>>,
    pub samples: Option<usize>,
    pub shots: Option<ShotsSpec>,
    pub batches: Option<usize>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

/// Flag values; any `Some` wins over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    pub rb_depth: Option<usize>,
}

/// Fully resolved settings for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub noise: NoiseModel,
    pub circuit: CircuitSource,
    pub scale_factors: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub virtual_scale_factors: Vec<f64>,
    pub assumed_p: f64,
    pub p_grid: Vec<f64>,
    pub samples: usize,
    pub shots: Shots,
    pub batches: usize,
    pub seed: u64,
    pub workers: usize,
    pub out: Option<PathBuf>,
}

/// Actual noise levels `0, 0.002, …, 0.02`.
pub fn default_fig2_grid() -> Vec<f64> {
    (0..=10).map(|i| i as f64 * 0.002).collect()
}

struct Defaults {
    noise: NoiseModel,
    depth: usize,
    scale_factors: Vec<f64>,
    lambdas: Vec<f64>,
    p_grid: Vec<f64>,
    samples: usize,
    shots: Shots,
    batches: usize,
}

fn defaults(kind: ExperimentKind) -> Defaults {
    let depolarizing = |p| NoiseModel { kind: NoiseKind::Depolarizing, p, qubits: 1 };
    match kind {
        ExperimentKind::Fig2 => Defaults {
            noise: depolarizing(0.01),
            depth: 14,
            scale_factors: vec![1.0, 51.0],
            lambdas: vec![],
            p_grid: default_fig2_grid(),
            samples: 5000,
            shots: Shots::Exact,
            batches: 10,
        },
        ExperimentKind::Fig3a | ExperimentKind::Fig3b => Defaults {
            noise: depolarizing(0.015),
            depth: 46,
            scale_factors: vec![],
            lambdas: if kind == ExperimentKind::Fig3a { vec![0.0, 0.25, 0.5, 0.75, 1.0] } else { vec![0.2] },
            p_grid: vec![],
            samples: 50_000,
            shots: Shots::PerSample(1),
            batches: 25,
        },
        ExperimentKind::AmpDamp => Defaults {
            noise: NoiseModel { kind: NoiseKind::AmplitudeDamping, p: 0.19, qubits: 1 },
            depth: 1,
            scale_factors: vec![],
            lambdas: vec![],
            p_grid: vec![0.001, 0.01, 0.05, 0.1, 0.19],
            samples: 0,
            shots: Shots::Exact,
            batches: 1,
        },
        ExperimentKind::NoGo | ExperimentKind::Decompose => Defaults {
            noise: depolarizing(0.01),
            depth: 1,
            scale_factors: vec![],
            lambdas: vec![1.5, 2.0, 5.0],
            p_grid: vec![],
            samples: 0,
            shots: Shots::Exact,
            batches: 1,
        },
    }
}

fn check_unit_interval(name: &str, values: &[f64]) -> Result<()> {
    match values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        Some(v) => Err(CliError::Config(format!("{name} value {v} outside [0, 1]"))),
        None => Ok(()),
    }
}

impl Settings {
    pub fn resolve(kind: ExperimentKind, file: &ExperimentConfig, flags: &Overrides) -> Result<Self> {
        if let Some(declared) = file.experiment {
            if declared != kind {
                return Err(CliError::Config(format!("config is for {declared:?}, not {kind:?}")));
            }
        }
        let d = defaults(kind);
        let env_seed = match std::env::var(SEED_ENV) {
            Ok(s) => {
                Some(s.trim().parse::<u64>().map_err(|_| CliError::Config(format!("{SEED_ENV}={s:?} is not a seed")))?)
            }
            Err(_) => None,
        };
        let seed = flags.seed.or(file.seed).or(env_seed).unwrap_or(DEFAULT_SEED);
        let mut circuit = file.circuit.clone().unwrap_or(CircuitSource::Rb { depth: d.depth, seed: None });
        if let Some(depth) = flags.rb_depth {
            let circuit_seed = match circuit {
                CircuitSource::Rb { seed, .. } => seed,
                CircuitSource::File { .. } => None,
            };
            circuit = CircuitSource::Rb { depth, seed: circuit_seed };
        }
        let settings = Settings {
            noise: file.noise.unwrap_or(d.noise),
            circuit,
            scale_factors: file.scale_factors.clone().unwrap_or(d.scale_factors),
            lambdas: file.lambdas.clone().unwrap_or(d.lambdas),
            virtual_scale_factors: file.virtual_scale_factors.clone().unwrap_or_else(|| vec![0.2, 1.0]),
            assumed_p: file.assumed_p.unwrap_or(0.01),
            p_grid: file.p_grid.clone().unwrap_or(d.p_grid),
            samples: flags.samples.or(file.samples).unwrap_or(d.samples),
            shots: file.shots.as_ref().map(ShotsSpec::resolve).transpose()?.unwrap_or(d.shots),
            batches: file.batches.unwrap_or(d.batches),
            seed,
            workers: flags.workers.or(file.workers).unwrap_or(0),
            out: flags.out.clone().or_else(|| file.out.clone()),
        };
        settings.validate(kind)?;
        Ok(settings)
    }

    fn validate(&self, kind: ExperimentKind) -> Result<()> {
        self.noise.validate().map_err(|e| CliError::Config(e.to_string()))?;
        if let CircuitSource::Rb { depth: 0, .. } = self.circuit {
            return Err(CliError::Config("RB depth must be at least 1".into()));
        }
        check_unit_interval("assumed_p", &[self.assumed_p])?;
        check_unit_interval("p_grid", &self.p_grid)?;
        let sampled = matches!(kind, ExperimentKind::Fig2 | ExperimentKind::Fig3a | ExperimentKind::Fig3b);
        if sampled {
            if self.batches == 0 || self.samples < self.batches {
                return Err(CliError::Config(format!("{} samples cannot fill {} batches", self.samples, self.batches)));
            }
            if self.noise.kind != NoiseKind::Depolarizing {
                return Err(CliError::Config("sampling experiments use depolarizing noise".into()));
            }
        }
        match kind {
            ExperimentKind::Fig2 => {
                if self.p_grid.is_empty() {
                    return Err(CliError::Config("p_grid is empty".into()));
                }
                if self.scale_factors.iter().any(|l| !(*l >= 1.0 && l.fract() == 0.0 && (*l as u64) % 2 == 1)) {
                    return Err(CliError::Config("folding scale factors must be odd integers".into()));
                }
            }
            ExperimentKind::Fig3a | ExperimentKind::Fig3b => {
                check_unit_interval("lambdas", &self.lambdas)?;
                if self.virtual_scale_factors.iter().any(|l| !(*l > 0.0 && *l <= 1.0)) {
                    return Err(CliError::Config("virtual scale factors must lie in (0, 1]".into()));
                }
            }
            ExperimentKind::AmpDamp => {
                if self.p_grid.iter().any(|p| !(*p > 0.0 && *p < 1.0)) {
                    return Err(CliError::Config("amplitude damping rates must lie in (0, 1)".into()));
                }
            }
            ExperimentKind::NoGo => {
                if self.lambdas.iter().any(|l| *l < 1.0 || !l.is_finite()) {
                    return Err(CliError::Config("convexity scale factors must be at least 1".into()));
                }
            }
            ExperimentKind::Decompose => {}
        }
        Ok(())
    }

    pub fn budget(&self) -> nepec::Budget {
        nepec::Budget::new(self.samples, self.batches, self.seed).with_shots(self.shots).with_workers(self.workers)
    }
}
