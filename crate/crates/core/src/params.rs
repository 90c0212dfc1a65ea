//! Physical parameters of one run and the statistics-renormalized coupling.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// `(N, L, c, κ)`: particle number, ring length, bare contact coupling and
/// statistical parameter. Natural units, so `c` is the only coupling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub n: usize,
    pub length: f64,
    pub c: f64,
    pub kappa: f64,
    /// Infinite repulsion regardless of `c` (Tonks-Girardeau / hard-core anyons).
    #[serde(default)]
    pub hardcore: bool,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            n: 4,
            length: 1.0,
            c: 0.0,
            kappa: 0.0,
            hardcore: false,
        }
    }
}

impl ModelParams {
    pub fn new(n: usize, length: f64, c: f64, kappa: f64) -> Result<Self> {
        let p = Self {
            n,
            length,
            c,
            kappa,
            hardcore: false,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn hardcore(n: usize, length: f64, kappa: f64) -> Result<Self> {
        let p = Self {
            n,
            length,
            c: f64::INFINITY,
            kappa,
            hardcore: true,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(invalid(format!("particle number N = {} must be >= 2", self.n)));
        }
        if !(self.length.is_finite() && self.length > 0.0) {
            return Err(invalid(format!("ring length L = {} must be > 0", self.length)));
        }
        if self.c.is_nan() || self.c < 0.0 {
            return Err(invalid(format!("coupling c = {} must be >= 0", self.c)));
        }
        if self.c.is_infinite() && !self.hardcore {
            return Err(invalid("c = inf requires the hard-core flag"));
        }
        check_kappa(self.kappa)
    }

    pub fn effective_coupling(&self) -> Result<EffectiveCoupling> {
        if self.hardcore {
            check_kappa(self.kappa)?;
            return Ok(EffectiveCoupling::Infinite);
        }
        effective_coupling(self.c, self.kappa).map(|(c, _)| c)
    }
}

fn check_kappa(kappa: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&kappa) {
        return Err(invalid(format!("statistical parameter kappa = {kappa} outside [0, 1]")));
    }
    Ok(())
}

/// Interaction strength entering the Bethe equations and amplitudes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum EffectiveCoupling {
    Finite(f64),
    Infinite,
}

impl EffectiveCoupling {
    pub fn value(self) -> f64 {
        match self {
            Self::Finite(c) => c,
            Self::Infinite => f64::INFINITY,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Self::Infinite)
    }
}

/// `c' = c / cos(κπ/2)`.
///
/// Returns the coupling together with a flag that is set for the ambiguous
/// `c = 0, κ = 1` point, where `0/0` is resolved to `0`.
pub fn effective_coupling(c: f64, kappa: f64) -> Result<(EffectiveCoupling, bool)> {
    check_kappa(kappa)?;
    if c.is_nan() || c < 0.0 {
        return Err(invalid(format!("coupling c = {c} must be >= 0")));
    }
    if c == 0.0 {
        return Ok((EffectiveCoupling::Finite(0.0), kappa == 1.0));
    }
    if kappa == 1.0 || c.is_infinite() {
        return Ok((EffectiveCoupling::Infinite, false));
    }
    let cos = (kappa * std::f64::consts::FRAC_PI_2).cos();
    Ok((EffectiveCoupling::Finite(c / cos), false))
}
