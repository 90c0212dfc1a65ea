//! One `(N, L, c, κ)` point end to end, and sweeps over many points.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bethe::{solve_at_effective_coupling, solve_ground_state, BetheState, DEFAULT_TOLERANCE};
use crate::circulant::{build_profile, profile_spectrum, ProfileSpec, RdmProfile};
use crate::error::Error;
use crate::params::ModelParams;
use crate::quadrature::build_grid;
use crate::rdm::{build_rdm, InnerSpec, RdmMatrix};
use crate::spectrum::{natural_occupations, toeplitz_deviation, OccupationSpectrum};
use crate::wavefn::WavefnEvaluator;

pub const SCHEMA_VERSION: u32 = 1;
/// Occupations carried in run records and sweep rows.
pub const TOP_OCCUPATIONS: usize = 8;

/// How the integral eigenproblem is discretized.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// First row plus the translation-invariant extension, verified per
    /// run; falls back to [`Method::Nystrom`] when the checks fail.
    #[default]
    Circulant,
    /// Dense matrix on the outer grid.
    Nystrom,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Circulant => "circulant",
            Method::Nystrom => "nystrom",
        })
    }
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "circulant" => Ok(Method::Circulant),
            "nystrom" => Ok(Method::Nystrom),
            _ => Err(Error::Parse(format!(
                "unknown method '{s}' (expected circulant or nystrom)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub method: Method,
    /// Outer grid of the dense matrix; also the grid the circulant
    /// extension is written on.
    pub outer_panels: usize,
    pub outer_order: usize,
    pub profile: ProfileSpec,
    pub inner: InnerSpec,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            method: Method::default(),
            outer_panels: 8,
            outer_order: 4,
            profile: ProfileSpec::default(),
            inner: InnerSpec::default(),
        }
    }
}

impl GridSpec {
    pub fn outer_points(&self) -> usize {
        self.outer_panels * self.outer_order
    }

    /// Twice the outer and profile panels.
    pub fn refined_outer(&self) -> Self {
        Self {
            outer_panels: self.outer_panels * 2,
            profile: self.profile.refined(),
            ..*self
        }
    }

    /// Twice the inner panels.
    pub fn refined_inner(&self) -> Self {
        Self {
            inner: self.inner.refined(),
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    pub grid: GridSpec,
    /// Replace any larger (or infinite) effective coupling by this value and
    /// use the permutation sum. Cross-check hatch for the hard-core path.
    pub c_eff_cap: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Solve,
    Wavefunction,
    Rdm,
    Spectrum,
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Stage::Solve => "solve",
            Stage::Wavefunction => "wavefunction",
            Stage::Rdm => "rdm",
            Stage::Spectrum => "spectrum",
        };
        f.write_str(s)
    }
}

#[derive(Debug, thiserror::Error)]
#[error("{stage} stage failed: {source}")]
pub struct StageError {
    pub stage: Stage,
    #[source]
    pub source: Error,
    /// Solved state when the failure happened downstream of the solver.
    pub state: Option<Box<BetheState>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverSummary {
    pub residual_norm: f64,
    pub tolerance: f64,
    pub iterations: usize,
    pub continuation_steps: usize,
    pub c_eff: f64,
    pub quasi_momenta: Vec<f64>,
    pub energy: f64,
    pub degenerate: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridSummary {
    pub method: Method,
    pub outer_points: usize,
    pub outer_panels: usize,
    pub outer_order: usize,
    pub profile: ProfileSpec,
    pub inner: InnerSpec,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Timings {
    pub solve_s: f64,
    pub wavefunction_s: f64,
    pub rdm_s: f64,
    pub spectrum_s: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub schema_version: u32,
    pub params: ModelParams,
    pub solver: SolverSummary,
    pub grid: GridSummary,
    /// Method that produced the numbers; differs from the requested one
    /// after a fallback.
    pub method: Method,
    pub occupations: Vec<f64>,
    pub entropy: f64,
    /// Sum of all retained occupations.
    pub occupation_sum: f64,
    pub truncation_mass: f64,
    /// Occupation beyond the resolved modes (circulant route only).
    pub tail_mass: f64,
    pub min_eigenvalue: f64,
    /// Dense route: spread of `|ρ₁|` along diagonals. Circulant route: the
    /// worst mismatch of the structural checks.
    pub toeplitz_deviation: f64,
    pub hermitian_deviation: f64,
    pub timings: Timings,
}

impl RunRecord {
    /// Self-consistency of an emitted record.
    pub fn validate(&self) -> Result<(), String> {
        let top: f64 = self.occupations.iter().sum();
        if top > 1.0 + 1e-8 {
            return Err(format!("top occupations sum to {top} > 1"));
        }
        if !(self.entropy >= 0.0) {
            return Err(format!("entropy {} is negative", self.entropy));
        }
        if !(self.solver.residual_norm < self.solver.tolerance) {
            return Err(format!(
                "residual {} exceeds tolerance {}",
                self.solver.residual_norm, self.solver.tolerance
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub record: RunRecord,
    pub state: BetheState,
    /// Dense matrix, or the circulant extension onto the outer grid.
    pub rdm: RdmMatrix,
    pub profile: Option<RdmProfile>,
    pub spectrum: OccupationSpectrum,
}

fn stage_err(stage: Stage, state: Option<&BetheState>) -> impl FnOnce(Error) -> StageError + '_ {
    move |source| StageError {
        stage,
        source,
        state: state.map(|s| Box::new(s.clone())),
    }
}

pub fn solve_for_run(params: &ModelParams, opts: &RunOptions) -> Result<BetheState, Error> {
    let c_eff = params.effective_coupling()?.value();
    match opts.c_eff_cap {
        Some(cap) if c_eff > cap => solve_at_effective_coupling(params, cap),
        _ => solve_ground_state(params),
    }
}

pub fn run_point(params: &ModelParams, opts: &RunOptions) -> Result<RunOutput, StageError> {
    let t = Instant::now();
    let state = solve_for_run(params, opts).map_err(stage_err(Stage::Solve, None))?;
    let solve_s = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let ev = WavefnEvaluator::new(&state).map_err(stage_err(Stage::Wavefunction, Some(&state)))?;
    let wavefunction_s = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let grid = &opts.grid;
    let rdm_err = stage_err(Stage::Rdm, Some(&state));
    let outer = build_grid(grid.outer_panels, grid.outer_order, params.length, &[]).map_err(rdm_err)?;
    let profile = match grid.method {
        Method::Circulant => {
            Some(build_profile(&ev, &grid.profile, &grid.inner).map_err(stage_err(Stage::Rdm, Some(&state)))?)
                .filter(|p| p.passes_checks())
        }
        Method::Nystrom => None,
    };
    let rdm = match &profile {
        Some(p) => p.extend(&outer),
        None => build_rdm(&ev, &outer, &grid.inner).map_err(stage_err(Stage::Rdm, Some(&state)))?,
    };
    let rdm_s = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let spectrum_err = stage_err(Stage::Spectrum, Some(&state));
    let (method, spectrum, toeplitz) = match &profile {
        Some(p) => (
            Method::Circulant,
            profile_spectrum(p).map_err(spectrum_err)?,
            p.invariance_deviation,
        ),
        None => (
            Method::Nystrom,
            natural_occupations(&rdm).map_err(spectrum_err)?,
            toeplitz_deviation(&rdm),
        ),
    };
    let spectrum_s = t.elapsed().as_secs_f64();

    let record = RunRecord {
        schema_version: SCHEMA_VERSION,
        params: *params,
        solver: SolverSummary {
            residual_norm: state.residual_norm,
            tolerance: DEFAULT_TOLERANCE,
            iterations: state.iterations,
            continuation_steps: state.continuation_steps,
            c_eff: state.c_eff.value(),
            quasi_momenta: state.quasi_momenta.clone(),
            energy: state.energy,
            degenerate: state.degenerate,
        },
        grid: GridSummary {
            method: grid.method,
            outer_points: outer.len(),
            outer_panels: grid.outer_panels,
            outer_order: grid.outer_order,
            profile: grid.profile,
            inner: grid.inner,
        },
        method,
        occupations: spectrum.top(TOP_OCCUPATIONS),
        entropy: spectrum.entropy,
        occupation_sum: spectrum.sum(),
        truncation_mass: spectrum.truncation_mass,
        tail_mass: spectrum.tail_mass,
        min_eigenvalue: spectrum.min_eigenvalue,
        toeplitz_deviation: toeplitz,
        hermitian_deviation: rdm.hermitian_deviation(),
        timings: Timings {
            solve_s,
            wavefunction_s,
            rdm_s,
            spectrum_s,
        },
    };
    Ok(RunOutput {
        record,
        state,
        rdm,
        profile,
        spectrum,
    })
}

/// Convenience: entropy of one point.
pub fn entropy_at(params: &ModelParams, opts: &RunOptions) -> Result<f64, StageError> {
    run_point(params, opts).map(|o| o.record.entropy)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    C,
    Kappa,
}

/// One sweep row; `error` is set instead of the numbers when the point failed.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub params: ModelParams,
    pub result: Result<RunRecord, String>,
}

/// Runs every point independently on a pool of `workers` threads and returns
/// rows in input order. Each point is computed with a fixed reduction order,
/// so the worker count never changes the numbers.
pub fn sweep(
    axis: SweepAxis,
    values: &[f64],
    base: &ModelParams,
    opts: &RunOptions,
    workers: usize,
) -> Result<Vec<SweepRow>, Error> {
    let points: Vec<ModelParams> = values
        .iter()
        .map(|&v| {
            let mut p = *base;
            match axis {
                SweepAxis::C => {
                    p.c = v;
                    p.hardcore = v.is_infinite();
                }
                SweepAxis::Kappa => p.kappa = v,
            }
            p
        })
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Numeric(format!("thread pool: {e}")))?;
    let rows = pool.install(|| {
        points
            .par_iter()
            .map(|p| SweepRow {
                params: *p,
                result: p
                    .validate()
                    .map_err(|e| e.to_string())
                    .and_then(|_| run_point(p, opts).map(|o| o.record).map_err(|e| e.to_string())),
            })
            .collect()
    });
    Ok(rows)
}
