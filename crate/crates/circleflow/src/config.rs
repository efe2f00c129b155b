//! Experiment configuration: a flat, versioned JSON document.
//!
//! Unknown fields are rejected so typos surface as schema errors, and every
//! numeric precondition is checked with the offending field named; both kinds
//! of violation map to exit code 2.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use circleflow_core::energy::InteractionCoeff;
use circleflow_core::jko::{InnerConfig, SolverConfig};
use circleflow_core::measure::{CellMeasure, InitialData};
use serde::{Deserialize, Serialize};

use crate::io;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Evolve,
    Distance,
    Energy,
    Geodesic,
    Hilbert,
    SweepNu,
    ErrorBound,
    Spectral,
    CrossValidate,
    Validate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoeffKind {
    Half,
    One,
}

impl From<CoeffKind> for InteractionCoeff {
    fn from(c: CoeffKind) -> Self {
        match c {
            CoeffKind::Half => InteractionCoeff::Half,
            CoeffKind::One => InteractionCoeff::One,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum InitialKind {
    Uniform,
    Cosine { a1: f64 },
    Dirac { eps: f64 },
    Cantor { level: u32 },
    File { path: PathBuf },
}

impl Default for InitialKind {
    fn default() -> Self {
        Self::Uniform
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InnerDto {
    #[serde(default = "d_max_iter")]
    pub max_iter: u32,
    #[serde(default = "d_grad_tol")]
    pub grad_tol: f64,
    #[serde(default = "d_armijo_c")]
    pub armijo_c: f64,
    #[serde(default = "d_armijo_shrink")]
    pub armijo_shrink: f64,
    /// Defaults to `tau` when absent or non-positive.
    #[serde(default)]
    pub step_init: f64,
    /// Quasi-second-order acceleration of the descent direction.
    #[serde(default = "d_accelerated")]
    pub accelerated: bool,
}

fn d_max_iter() -> u32 {
    500
}
fn d_grad_tol() -> f64 {
    1e-9
}
fn d_armijo_c() -> f64 {
    1e-4
}
fn d_armijo_shrink() -> f64 {
    0.5
}
fn d_accelerated() -> bool {
    true
}

impl Default for InnerDto {
    fn default() -> Self {
        Self {
            max_iter: d_max_iter(),
            grad_tol: d_grad_tol(),
            armijo_c: d_armijo_c(),
            armijo_shrink: d_armijo_shrink(),
            step_init: 0.0,
            accelerated: d_accelerated(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    pub command: CommandKind,

    #[serde(default = "d_nu")]
    pub nu: f64,
    #[serde(default = "d_tau")]
    pub tau: f64,
    #[serde(default = "d_t_end")]
    pub t_end: f64,
    #[serde(default = "d_n_cells")]
    pub n_cells: usize,
    #[serde(default = "d_coeff")]
    pub coeff: CoeffKind,
    #[serde(default)]
    pub inner: InnerDto,
    #[serde(default)]
    pub seed: u64,

    #[serde(default)]
    pub initial: InitialKind,
    #[serde(default = "d_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "d_snapshot_every")]
    pub snapshot_every: usize,

    /// Snapshot files consumed by `distance` and `geodesic`.
    #[serde(default)]
    pub inputs: Vec<PathBuf>,
    /// Strictly decreasing viscosities ending at zero, for `sweep-nu`.
    #[serde(default = "d_nus")]
    pub nus: Vec<f64>,
    /// Grid resolution for the spectral solver and the transform checks.
    #[serde(default = "d_grid_size")]
    pub grid_size: usize,
    /// Explicit time step cap for `spectral`; non-positive means
    /// "stability-limited".
    #[serde(default)]
    pub dt: f64,
    /// Interpolation times for `geodesic`.
    #[serde(default = "d_t_samples")]
    pub t_samples: Vec<f64>,
    /// Largest Fourier mode exercised by `hilbert`.
    #[serde(default = "d_mode_max")]
    pub mode_max: u32,
    /// Pass tolerance for `cross-validate` (sup of d_per over compared times).
    #[serde(default = "d_tolerance")]
    pub tolerance: f64,
}

fn d_nu() -> f64 {
    0.1
}
fn d_tau() -> f64 {
    0.02
}
fn d_t_end() -> f64 {
    5.0
}
fn d_n_cells() -> usize {
    128
}
fn d_coeff() -> CoeffKind {
    CoeffKind::Half
}
fn d_output_dir() -> PathBuf {
    PathBuf::from("out")
}
fn d_snapshot_every() -> usize {
    1
}
fn d_nus() -> Vec<f64> {
    vec![0.2, 0.1, 0.05, 0.0]
}
fn d_grid_size() -> usize {
    256
}
fn d_t_samples() -> Vec<f64> {
    vec![0.0, 0.25, 0.5, 0.75, 1.0]
}
fn d_mode_max() -> u32 {
    8
}
fn d_tolerance() -> f64 {
    5e-2
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| {
            anyhow::anyhow!("config parse error at line {} column {}: {e}", e.line(), e.column())
        })?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::from_json(&text)
    }

    fn check(&self) -> Result<()> {
        if self.version != 1 {
            bail!("config field `version`: expected 1, got {}", self.version);
        }
        if !(self.nu.is_finite() && self.nu >= 0.0) {
            bail!("config field `nu`: must be finite and nonnegative");
        }
        if !(self.tau.is_finite() && self.tau > 0.0) {
            bail!("config field `tau`: must be positive");
        }
        if !(self.t_end.is_finite() && self.t_end >= self.tau) {
            bail!("config field `t_end`: must be at least `tau`");
        }
        if self.n_cells < 2 {
            bail!("config field `n_cells`: must be at least 2");
        }
        if self.snapshot_every < 1 {
            bail!("config field `snapshot_every`: must be at least 1");
        }
        if !(self.grid_size >= 2 && self.grid_size.is_power_of_two()) {
            bail!("config field `grid_size`: must be a power of two ≥ 2");
        }
        if self.inner.grad_tol <= 0.0 {
            bail!("config field `inner.grad_tol`: must be positive");
        }
        if !(self.inner.armijo_shrink > 0.0 && self.inner.armijo_shrink < 1.0) {
            bail!("config field `inner.armijo_shrink`: must lie in (0, 1)");
        }
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            bail!("config field `tolerance`: must be positive");
        }
        for t in &self.t_samples {
            if !(0.0..=1.0).contains(t) {
                bail!("config field `t_samples`: entries must lie in [0, 1]");
            }
        }
        if matches!(self.command, CommandKind::Distance | CommandKind::Geodesic)
            && self.inputs.len() != 2
        {
            bail!("config field `inputs`: `{:?}` needs exactly two snapshot paths", self.command);
        }
        for p in &self.inputs {
            if !p.exists() {
                bail!("config field `inputs`: file {} does not exist", p.display());
            }
        }
        if let InitialKind::File { path } = &self.initial {
            if !path.exists() {
                bail!("config field `initial.path`: file {} does not exist", path.display());
            }
        }
        Ok(())
    }

    pub fn solver_config(&self) -> SolverConfig {
        let step_init = if self.inner.step_init > 0.0 { self.inner.step_init } else { self.tau };
        SolverConfig {
            nu: self.nu,
            tau: self.tau,
            t_end: self.t_end,
            n_cells: self.n_cells,
            coeff: self.coeff.into(),
            inner: InnerConfig {
                max_iter: self.inner.max_iter,
                grad_tol: self.inner.grad_tol,
                armijo_c: self.inner.armijo_c,
                armijo_shrink: self.inner.armijo_shrink,
                step_init,
                accelerated: self.inner.accelerated,
            },
            seed: self.seed,
        }
    }

    /// Realize the configured initial data as a cell measure.
    pub fn initial_measure(&self) -> Result<CellMeasure> {
        match &self.initial {
            InitialKind::Uniform => Ok(InitialData::Uniform.build(self.n_cells)?),
            InitialKind::Cosine { a1 } => Ok(InitialData::Cosine { a1: *a1 }.build(self.n_cells)?),
            InitialKind::Dirac { eps } => Ok(InitialData::Dirac { eps: *eps }.build(self.n_cells)?),
            InitialKind::Cantor { level } => {
                Ok(InitialData::Cantor { level: *level }.build(self.n_cells)?)
            }
            InitialKind::File { path } => io::read_measure(path),
        }
    }
}
