//! Logarithmic Bethe equations for the repulsive ground state.
//!
//! The quasi-momenta solve
//!
//! ```text
//! k_j L = 2π n_j − Σ_{l≠j} 2 arctan((k_j − k_l) / c')
//! ```
//!
//! with `n_j = (N+1)/2 − j`. The solver starts from the hard-core roots
//! `2π n_j / L`, where the system is well conditioned, and walks `c'` down
//! geometrically to the target with a damped Newton iteration at each step.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::params::{EffectiveCoupling, ModelParams};

/// Coupling at which continuation starts.
pub const CONTINUATION_START: f64 = 1.0e6;
pub const MAX_CONTINUATION_STEPS: usize = 40;
pub const MAX_NEWTON_ITERATIONS: usize = 100;
/// Max-norm tolerance on the (dimensionless) residual vector.
pub const DEFAULT_TOLERANCE: f64 = 1.0e-12;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BetheState {
    pub params: ModelParams,
    pub c_eff: EffectiveCoupling,
    pub quantum_numbers: Vec<f64>,
    /// Strictly decreasing.
    pub quasi_momenta: Vec<f64>,
    pub residual_norm: f64,
    pub energy: f64,
    pub total_momentum: f64,
    pub iterations: usize,
    pub continuation_steps: usize,
    /// Set when the state was not obtained by solving: free (`c' = 0`) point,
    /// including the ambiguous `c = 0, κ = 1` corner.
    pub degenerate: bool,
}

impl BetheState {
    pub fn n(&self) -> usize {
        self.quasi_momenta.len()
    }

    fn from_momenta(
        params: ModelParams,
        c_eff: EffectiveCoupling,
        quasi_momenta: Vec<f64>,
        iterations: usize,
        continuation_steps: usize,
        degenerate: bool,
    ) -> Self {
        let quantum_numbers = ground_state_quantum_numbers(params.n).expect("validated N");
        let residual_norm = max_norm(&bethe_residuals(
            &quasi_momenta,
            &quantum_numbers,
            c_eff.value(),
            params.length,
        ));
        let energy = quasi_momenta.iter().map(|k| k * k).sum();
        let total_momentum = quasi_momenta.iter().sum();
        Self {
            params,
            c_eff,
            quantum_numbers,
            quasi_momenta,
            residual_norm,
            energy,
            total_momentum,
            iterations,
            continuation_steps,
            degenerate,
        }
    }
}

/// `n_j = (N+1)/2 − j` for `j = 1..N`.
pub fn ground_state_quantum_numbers(n: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(invalid(format!("N = {n} must be >= 2")));
    }
    let half = (n as f64 + 1.0) / 2.0;
    Ok((1..=n).map(|j| half - j as f64).collect())
}

/// Residual `k_j L − 2π n_j + Σ_{l≠j} 2 arctan((k_j − k_l)/c')`.
///
/// `c_eff = ∞` is accepted and drops the scattering phases.
pub fn bethe_residuals(k: &[f64], quantum_numbers: &[f64], c_eff: f64, length: f64) -> Vec<f64> {
    k.iter()
        .zip(quantum_numbers)
        .enumerate()
        .map(|(j, (&kj, &nj))| {
            let phase: f64 = if c_eff.is_infinite() {
                0.0
            } else {
                k.iter()
                    .enumerate()
                    .filter(|&(l, _)| l != j)
                    .map(|(_, &kl)| 2.0 * ((kj - kl) / c_eff).atan())
                    .sum()
            };
            kj * length - 2.0 * PI * nj + phase
        })
        .collect()
}

fn jacobian(k: &[f64], c_eff: f64, length: f64) -> DMatrix<f64> {
    let n = k.len();
    let mut jac = DMatrix::zeros(n, n);
    for j in 0..n {
        let mut diag = length;
        for l in 0..n {
            if l == j {
                continue;
            }
            let d = k[j] - k[l];
            let g = 2.0 * c_eff / (c_eff * c_eff + d * d);
            diag += g;
            jac[(j, l)] = -g;
        }
        jac[(j, j)] = diag;
    }
    jac
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn hardcore_momenta(quantum_numbers: &[f64], length: f64) -> Vec<f64> {
    quantum_numbers.iter().map(|n| 2.0 * PI * n / length).collect()
}

/// Damped Newton at fixed coupling. Returns the iterate, its residual norm and
/// the number of iterations used.
fn newton(
    mut k: Vec<f64>,
    quantum_numbers: &[f64],
    c_eff: f64,
    length: f64,
    tol: f64,
) -> std::result::Result<(Vec<f64>, f64, usize), (Vec<f64>, f64)> {
    let mut res = bethe_residuals(&k, quantum_numbers, c_eff, length);
    let mut norm = max_norm(&res);
    for it in 0..MAX_NEWTON_ITERATIONS {
        if norm < tol {
            return Ok((k, norm, it));
        }
        let jac = jacobian(&k, c_eff, length);
        let rhs = DVector::from_column_slice(&res);
        let Some(step) = jac.lu().solve(&rhs) else {
            return Err((k, norm));
        };
        let mut damping = 1.0;
        loop {
            let trial: Vec<f64> = k.iter().zip(step.iter()).map(|(a, s)| a - damping * s).collect();
            let trial_res = bethe_residuals(&trial, quantum_numbers, c_eff, length);
            let trial_norm = max_norm(&trial_res);
            if trial_norm < norm || damping < 1e-6 {
                if trial_norm >= norm {
                    // Stalled at round-off level.
                    return if norm < tol { Ok((k, norm, it)) } else { Err((k, norm)) };
                }
                k = trial;
                res = trial_res;
                norm = trial_norm;
                break;
            }
            damping *= 0.5;
        }
    }
    if norm < tol {
        Ok((k, norm, MAX_NEWTON_ITERATIONS))
    } else {
        Err((k, norm))
    }
}

/// Continuation schedule from [`CONTINUATION_START`] down to `target`,
/// excluding the start and including the target.
pub fn continuation_schedule(target: f64) -> Vec<f64> {
    if target >= CONTINUATION_START {
        return vec![target];
    }
    let ratio = (target / CONTINUATION_START).ln();
    // Keep each step a factor of at most ~2 while never exceeding the cap.
    let steps = ((ratio.abs() / 2f64.ln()).ceil() as usize).clamp(1, MAX_CONTINUATION_STEPS);
    (1..=steps)
        .map(|s| {
            if s == steps {
                target
            } else {
                CONTINUATION_START * (ratio * s as f64 / steps as f64).exp()
            }
        })
        .collect()
}

pub fn solve_ground_state(params: &ModelParams) -> Result<BetheState> {
    solve_ground_state_with_tolerance(params, DEFAULT_TOLERANCE)
}

pub fn solve_ground_state_with_tolerance(params: &ModelParams, tol: f64) -> Result<BetheState> {
    params.validate()?;
    let c_eff = params.effective_coupling()?;
    solve_with_coupling(params, c_eff, tol)
}

/// Ground state at an explicitly chosen effective coupling, bypassing
/// `c' = c / cos(κπ/2)`. Used to cap `c'` for cross-checks against the
/// hard-core determinant.
pub fn solve_at_effective_coupling(params: &ModelParams, c_eff: f64) -> Result<BetheState> {
    params.validate()?;
    if c_eff.is_nan() || c_eff < 0.0 {
        return Err(invalid(format!("effective coupling {c_eff} must be >= 0")));
    }
    let coupling = if c_eff.is_infinite() {
        EffectiveCoupling::Infinite
    } else {
        EffectiveCoupling::Finite(c_eff)
    };
    solve_with_coupling(params, coupling, DEFAULT_TOLERANCE)
}

fn solve_with_coupling(params: &ModelParams, c_eff: EffectiveCoupling, tol: f64) -> Result<BetheState> {
    let qn = ground_state_quantum_numbers(params.n)?;
    let length = params.length;
    match c_eff {
        EffectiveCoupling::Infinite => Ok(BetheState::from_momenta(
            *params,
            c_eff,
            hardcore_momenta(&qn, length),
            0,
            0,
            false,
        )),
        EffectiveCoupling::Finite(c) if c == 0.0 => Ok(BetheState::from_momenta(
            *params,
            c_eff,
            vec![0.0; params.n],
            0,
            0,
            true,
        )),
        EffectiveCoupling::Finite(c) => {
            let mut k = hardcore_momenta(&qn, length);
            let mut iterations = 0;
            let schedule = continuation_schedule(c);
            for &cs in &schedule {
                match newton(k, &qn, cs, length, tol) {
                    Ok((next, _, its)) => {
                        k = next;
                        iterations += its;
                    }
                    Err((last, residual)) => {
                        return Err(Error::SolverFailure {
                            c_eff: cs,
                            residual,
                            last_iterate: last,
                        })
                    }
                }
            }
            // Ground-state roots come in ± pairs; remove the asymmetric round-off.
            let n = k.len();
            let sym: Vec<f64> = (0..n).map(|j| 0.5 * (k[j] - k[n - 1 - j])).collect();
            if max_norm(&bethe_residuals(&sym, &qn, c, length)) < tol {
                k = sym;
            }
            let state = BetheState::from_momenta(*params, c_eff, k, iterations, schedule.len(), false);
            let ordered = state.quasi_momenta.windows(2).all(|w| w[0] > w[1]);
            if !(state.residual_norm < tol) || !ordered {
                return Err(Error::SolverFailure {
                    c_eff: c,
                    residual: state.residual_norm,
                    last_iterate: state.quasi_momenta,
                });
            }
            Ok(state)
        }
    }
}
