//! Translation-invariant route to the spectrum.
//!
//! On the ring the one-body density matrix depends on the separation only:
//! `ρ₁(x, x') = G(x' − x)` for `x ≤ x'`, with Hermiticity giving the rest.
//! Carried once around the ring it picks up a constant phase,
//! `conj(G(L − s)) = τ G(s)`, so the natural orbitals are the twisted plane
//! waves `e^{iqx}` with `e^{iqL} = τ` and the occupations are
//! `λ(q) = ∫₀ᴸ G(d) e^{iqd} dd`.
//!
//! Only the first row `G` is integrated, on its own panel grid, and every
//! run checks both structural assumptions against directly integrated
//! entries before the result is used. The Fourier integrals are exact for
//! the piecewise-polynomial interpolant of `G`, so very many modes are
//! cheap. That matters for anyons: the phase jump at contact gives `G` a
//! kink whose occupations decay only like `m⁻²`, far too slowly for a dense
//! Nyström matrix to resolve the entropy.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::params::ModelParams;
use crate::quadrature::{LegendreExpansion, QuadratureGrid, Rule};
use crate::rdm::{rdm_entry_raw, InnerSpec, RdmMatrix};
use crate::spectrum::{von_neumann_entropy, OccupationSpectrum, PSD_TOLERANCE, TRUNCATION};
use crate::wavefn::WavefnEvaluator;

/// Largest accepted mismatch between the translation-invariant extension
/// and directly integrated entries, relative to the diagonal.
pub const INVARIANCE_TOLERANCE: f64 = 1e-6;

const CHECK_SEED: u64 = 0x7a11_0c0d;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileSpec {
    /// Panels of the separation grid on `[0, L]`.
    pub panels: usize,
    pub order: usize,
    /// Modes `m = −modes ..= modes` are summed explicitly.
    pub modes: usize,
    /// Off-row entries integrated directly to verify the structure.
    pub checks: usize,
}

impl Default for ProfileSpec {
    fn default() -> Self {
        Self {
            panels: 8,
            order: 12,
            modes: 20_000,
            checks: 8,
        }
    }
}

impl ProfileSpec {
    pub fn validate(&self) -> Result<()> {
        if self.panels < 1 || !(2..=64).contains(&self.order) || self.modes < 1 {
            return Err(invalid(format!(
                "profile grid needs panels >= 1, 2 <= order <= 64 and modes >= 1 (got {} x {}, {} modes)",
                self.panels, self.order, self.modes
            )));
        }
        Ok(())
    }

    pub fn refined(&self) -> Self {
        Self {
            panels: self.panels * 2,
            ..*self
        }
    }
}

/// First row of the density matrix, `G(d) = ρ₁(0, d)`, scaled to unit trace.
#[derive(Debug, Clone)]
pub struct RdmProfile {
    pub params: ModelParams,
    pub spec: ProfileSpec,
    pub length: f64,
    pub nodes: Vec<f64>,
    /// `G` at the nodes with `L·G(0) = 1`.
    pub values: Vec<Complex64>,
    /// Unscaled `ρ₁(0, 0)`.
    pub g0_raw: f64,
    /// `τ = conj(G(L)) / G(0)`.
    pub twist: Complex64,
    /// Worst mismatch of the structural checks, relative to `G(0)`.
    pub invariance_deviation: f64,
    expansion: LegendreExpansion,
}

impl RdmProfile {
    pub fn g(&self, d: f64) -> Complex64 {
        self.expansion.eval(d.clamp(0.0, self.length))
    }

    /// Normalized `ρ₁(x, x')` from the profile.
    pub fn eval(&self, x: f64, xp: f64) -> Complex64 {
        if xp >= x {
            self.g(xp - x)
        } else {
            self.g(x - xp).conj()
        }
    }

    /// The full matrix on `grid` filled in from the profile, normalized by
    /// the interpolant's own trace like the spectrum.
    pub fn extend(&self, grid: &QuadratureGrid) -> RdmMatrix {
        let m = grid.len();
        let scale = 1.0 / (self.length * self.g(0.0).re);
        let mut values = Vec::with_capacity(m * m);
        for &x in &grid.nodes {
            for &xp in &grid.nodes {
                values.push(self.eval(x, xp) * scale);
            }
        }
        RdmMatrix {
            params: self.params,
            grid: grid.clone(),
            values,
            trace_raw: self.g0_raw * self.length,
        }
    }

    pub fn passes_checks(&self) -> bool {
        self.invariance_deviation <= INVARIANCE_TOLERANCE
    }

    /// `q_m = (arg τ + 2πm)/L`.
    pub fn momentum(&self, m: i64) -> f64 {
        (self.twist.arg() + 2.0 * PI * m as f64) / self.length
    }

    /// `∫₀ᴸ G(d) e^{iqd} dd`.
    pub fn transform(&self, q: f64, scratch: &mut Vec<f64>) -> Complex64 {
        self.expansion.fourier(q, scratch)
    }
}

/// Integrates the first row plus the verification entries.
pub fn build_profile(ev: &WavefnEvaluator, spec: &ProfileSpec, inner: &InnerSpec) -> Result<RdmProfile> {
    spec.validate()?;
    inner.validate()?;
    let length = ev.length();
    let (mut nodes, mut weights) = (Vec::new(), Vec::new());
    Rule::new(spec.order).push_composite(0.0, length, spec.panels, &mut nodes, &mut weights);

    let mut rng = ChaCha8Rng::seed_from_u64(CHECK_SEED);
    let checks: Vec<(f64, f64)> = (0..spec.checks)
        .map(|_| (rng.random::<f64>() * length, rng.random::<f64>() * length))
        .collect();
    let mut tasks: Vec<(f64, f64)> = nodes.iter().map(|&d| (0.0, d)).collect();
    tasks.push((0.0, 0.0));
    tasks.push((0.0, length));
    tasks.extend(&checks);
    let raw: Vec<Complex64> = tasks
        .par_iter()
        .map(|&(x, xp)| rdm_entry_raw(ev, x, xp, inner))
        .collect();

    let m = nodes.len();
    let g0_raw = raw[m].re;
    if !(g0_raw.is_finite() && g0_raw > 0.0) {
        return Err(Error::IntegrationFailure(format!(
            "diagonal entry {g0_raw} is not positive"
        )));
    }
    let scale = 1.0 / (g0_raw * length);
    let values: Vec<Complex64> = raw[..m].iter().map(|v| v * scale).collect();
    let twist = raw[m + 1].conj() / g0_raw;
    let expansion = LegendreExpansion::new(0.0, length, spec.panels, spec.order, &values)?;
    let g0 = 1.0 / length;

    let mut worst = (twist.norm() - 1.0).abs() + raw[m].im.abs() / g0_raw;
    worst = worst.max((expansion.eval(0.0) - g0).norm() / g0);
    for (&d, &v) in nodes.iter().zip(&values) {
        let mirrored = expansion.eval(length - d).conj();
        worst = worst.max((mirrored - twist * v).norm() / g0);
    }
    let mut profile = RdmProfile {
        params: ev.state().params,
        spec: *spec,
        length,
        nodes,
        values,
        g0_raw,
        twist,
        invariance_deviation: 0.0,
        expansion,
    };
    for (&(x, xp), v) in checks.iter().zip(&raw[m + 2..]) {
        worst = worst.max((v * scale - profile.eval(x, xp)).norm() / g0);
    }
    profile.invariance_deviation = worst;
    Ok(profile)
}

/// Entropy carried by the modes beyond `|m| = K`, assuming `λ_m ≈ A/m²`
/// there with `A` fixed by the missing mass `2A/K`. When the decay is faster
/// the missing mass, and with it this term, is negligible.
pub fn tail_entropy(tail_mass: f64, modes: usize) -> f64 {
    if !(tail_mass > 0.0) {
        return 0.0;
    }
    let k = modes as f64;
    let a = 0.5 * tail_mass * k;
    tail_mass * ((k * k / a).log2() + 2.0 / LN_2)
}

/// Occupations `λ(q_m)` for `|m| ≤ modes` and the entropy including the
/// unresolved tail.
pub fn profile_spectrum(profile: &RdmProfile) -> Result<OccupationSpectrum> {
    let k = profile.spec.modes as i64;
    // Parseval: all modes together sum to the interpolant's own trace
    let trace = profile.length * profile.expansion.eval(0.0).re;
    if !(trace > 0.0) {
        return Err(Error::Numeric(format!("profile trace {trace} is not positive")));
    }
    let mut scratch = Vec::new();
    let mut raw = Vec::with_capacity(2 * k as usize + 1);
    let mut max_imag: f64 = 0.0;
    for m in -k..=k {
        let l = profile.transform(profile.momentum(m), &mut scratch) / trace;
        max_imag = max_imag.max(l.im.abs());
        raw.push(l.re);
    }
    if max_imag > INVARIANCE_TOLERANCE {
        return Err(Error::Numeric(format!("occupations have imaginary part {max_imag:e}")));
    }
    raw.sort_by(|a, b| b.total_cmp(a));
    let min_eigenvalue = *raw.last().expect("at least one mode");
    if min_eigenvalue < -PSD_TOLERANCE {
        return Err(Error::Numeric(format!(
            "density matrix is not positive semidefinite (eigenvalue {min_eigenvalue:e})"
        )));
    }
    let resolved: f64 = raw.iter().sum();
    let tail_mass = (1.0 - resolved).max(0.0);
    let mut truncation_mass = 0.0;
    let mut occupations: Vec<f64> = raw
        .into_iter()
        .filter_map(|l| {
            if l < TRUNCATION {
                truncation_mass += l.abs();
                None
            } else {
                Some(l)
            }
        })
        .collect();
    // quadrature noise can push the kept modes slightly past unit trace
    let excess = (occupations.iter().sum::<f64>() - 1.0).max(0.0);
    if excess > 0.0 {
        truncation_mass += excess;
        occupations.iter_mut().for_each(|l| *l /= 1.0 + excess);
    }
    let entropy = von_neumann_entropy(&occupations)? + tail_entropy(tail_mass, profile.spec.modes);
    Ok(OccupationSpectrum {
        occupations,
        entropy,
        truncation_mass,
        tail_mass,
        min_eigenvalue,
        orbitals: None,
    })
}
