//! Two-particle references that share no code with the generic pipeline.
//!
//! At N = 2 the ground state depends on the separation only. Writing
//! `u = x₁ − x₂`, the wavefunction is `F(u) = e^{−iκπ sgn(u)/2} h(|u|)` with
//! `h(u) = cos(k₀(u − L/2))`, and `F(u − L) = e^{iκπ} F(u)`. Expanding `F` in
//! twisted plane waves `e^{i q_m u}`, `q_m = (2πm − κπ)/L`, diagonalizes the
//! one-body density matrix exactly: the natural orbitals are those plane
//! waves and the occupations are `|a_m|² / Σ|a|²`. The coefficients are
//! integrals of a cosine against plane waves, done in closed form so that
//! millions of modes are affordable: for κ ≠ 0 the phase jump at contact
//! makes the occupations decay only like `m⁻²`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::params::{effective_coupling, EffectiveCoupling};
use crate::quadrature::Rule;

const BISECTION_TOLERANCE: f64 = 1e-14;

/// Positive root of `k L = π − 2 arctan(2k / c′)` on `(0, π/L]`.
pub fn solve_n2(c_eff: f64, length: f64) -> Result<f64> {
    if !(c_eff > 0.0) || c_eff.is_nan() {
        return Err(invalid(format!("two-body solve needs c' > 0, got {c_eff}")));
    }
    if !(length > 0.0 && length.is_finite()) {
        return Err(invalid(format!("length must be positive, got {length}")));
    }
    let f = |k: f64| k * length - PI + 2.0 * (2.0 * k / c_eff).atan();
    let (mut lo, mut hi) = (0.0, PI / length);
    // f is increasing with f(0) = −π and f(π/L) ≥ 0
    if f(hi) <= 0.0 {
        return Ok(hi);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = f(mid);
        if v.abs() < BISECTION_TOLERANCE {
            return Ok(mid);
        }
        if v < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Resolution of the Fourier oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct N2OracleSpec {
    /// Modes `m = −modes ..= modes` are summed explicitly.
    pub modes: usize,
}

impl Default for N2OracleSpec {
    fn default() -> Self {
        Self { modes: 100_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct N2Reference {
    pub c_eff: EffectiveCoupling,
    pub k0: f64,
    pub entropy: f64,
    /// Largest occupations, descending.
    pub occupations: Vec<f64>,
    /// Occupation not captured by the summed modes.
    pub tail_mass: f64,
}

/// Entropy and occupations of the two-particle ground state.
pub fn entropy_n2(c: f64, kappa: f64, length: f64, spec: &N2OracleSpec) -> Result<N2Reference> {
    if !(length > 0.0 && length.is_finite()) {
        return Err(invalid(format!("length must be positive, got {length}")));
    }
    if spec.modes == 0 {
        return Err(invalid("oracle needs at least one mode"));
    }
    let (c_eff, _) = effective_coupling(c, kappa)?;
    let k0 = two_body_root(c_eff, length)?;
    let total = profile_norm(k0, length);
    let m_max = spec.modes as i64;
    let mut top = Vec::with_capacity(64);
    let (mut entropy, mut captured) = (0.0, 0.0);
    for m in -m_max..=m_max {
        let a = fourier_coefficient(k0, twisted_momentum(m, kappa, length), length);
        let lambda = a.norm_sqr() / total;
        captured += lambda;
        if lambda > 0.0 {
            entropy -= lambda * lambda.log2();
        }
        if m.unsigned_abs() < 32 {
            top.push(lambda);
        }
    }
    top.sort_by(|a, b| b.total_cmp(a));
    top.truncate(16);
    let tail_mass = (1.0 - captured).max(0.0);
    Ok(N2Reference {
        c_eff,
        k0,
        entropy: entropy + tail_entropy(tail_mass, spec.modes as f64),
        occupations: top,
        tail_mass,
    })
}

/// Entropy of the modes beyond `|m| = K`, assuming `λ_m ≈ A/m²` there with
/// `A` fixed by the missing mass `2A/K`. Negligible when the decay is faster.
fn tail_entropy(tail_mass: f64, k: f64) -> f64 {
    if !(tail_mass > 0.0) {
        return 0.0;
    }
    let a = 0.5 * tail_mass * k;
    tail_mass * ((k * k / a).log2() + 2.0 / std::f64::consts::LN_2)
}

fn two_body_root(c_eff: EffectiveCoupling, length: f64) -> Result<f64> {
    Ok(match c_eff {
        EffectiveCoupling::Infinite => PI / length,
        EffectiveCoupling::Finite(v) if v == 0.0 => 0.0,
        EffectiveCoupling::Finite(v) => solve_n2(v, length)?,
    })
}

/// `q_m = (2πm − κπ)/L`.
pub fn twisted_momentum(m: i64, kappa: f64, length: f64) -> f64 {
    (2.0 * PI * m as f64 - kappa * PI) / length
}

/// `(1/L) ∫₀ᴸ |h|²` for `h(u) = cos(k₀(u − L/2))`.
fn profile_norm(k0: f64, length: f64) -> f64 {
    let x = k0 * length;
    if x.abs() < 1e-8 {
        1.0
    } else {
        0.5 * (1.0 + x.sin() / x)
    }
}

/// `∫₀ᴸ e^{iαu} du`.
fn phase_integral(alpha: f64, length: f64) -> Complex64 {
    let x = alpha * length;
    if x.abs() < 1e-6 {
        Complex64::new(length * (1.0 - x * x / 6.0), 0.5 * length * x)
    } else {
        (Complex64::from_polar(1.0, x) - 1.0) / Complex64::new(0.0, alpha)
    }
}

/// `a(q) = (1/L) ∫₀ᴸ cos(k₀(u − L/2)) e^{−iqu} du`.
pub fn fourier_coefficient(k0: f64, q: f64, length: f64) -> Complex64 {
    let half = 0.5 * k0 * length;
    let s = Complex64::from_polar(1.0, -half) * phase_integral(k0 - q, length)
        + Complex64::from_polar(1.0, half) * phase_integral(-k0 - q, length);
    0.5 * s / length
}

/// Same coefficient by composite Gauss-Legendre, one panel per oscillation.
pub fn fourier_coefficient_quadrature(k0: f64, q: f64, length: f64, order: usize) -> Complex64 {
    let rule = Rule::new(order);
    let (mut nodes, mut weights) = (Vec::new(), Vec::new());
    let panels = 2 + ((q.abs() + k0) * length / (2.0 * PI)).ceil() as usize;
    rule.push_composite(0.0, length, panels, &mut nodes, &mut weights);
    let mut sum = Complex64::new(0.0, 0.0);
    for (&u, &w) in nodes.iter().zip(&weights) {
        sum += w * (k0 * (u - 0.5 * length)).cos() * Complex64::from_polar(1.0, -q * u);
    }
    sum / length
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisection_limits_and_fixture() {
        assert!((solve_n2(1e12, 1.0).unwrap() - PI).abs() < 1e-10);
        assert!(solve_n2(1e-9, 1.0).unwrap() < 1e-4);
        let k = solve_n2(1.0, 1.0).unwrap();
        assert!((k - PI + 2.0 * (2.0 * k).atan()).abs() < 1e-14);
        assert!((k - 0.960188873914783).abs() < 1e-12, "{k:.15}");
        assert!(solve_n2(0.0, 1.0).is_err());
        assert!(solve_n2(-1.0, 1.0).is_err());
    }

    #[test]
    fn root_increases_with_coupling() {
        let mut prev = 0.0;
        for c in [0.01, 0.1, 1.0, 10.0, 100.0, 1e4] {
            let k = solve_n2(c, 2.0).unwrap();
            assert!(k > prev && k <= PI / 2.0, "c={c} k={k}");
            prev = k;
        }
    }

    #[test]
    fn free_bosons_are_a_product_state() {
        let r = entropy_n2(0.0, 0.0, 1.0, &N2OracleSpec::default()).unwrap();
        assert!(r.entropy.abs() < 1e-12);
        assert!((r.occupations[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fermi_limit_is_one_bit() {
        for c in [0.5, 10.0] {
            let r = entropy_n2(c, 1.0, 1.0, &N2OracleSpec::default()).unwrap();
            assert!((r.entropy - 1.0).abs() < 1e-10, "{}", r.entropy);
            assert!((r.occupations[0] - 0.5).abs() < 1e-10);
            assert!((r.occupations[1] - 0.5).abs() < 1e-10);
        }
    }

    #[test]
    fn closed_form_matches_quadrature() {
        for (k0, kappa) in [(0.0, 0.3), (0.96, 0.0), (2.7, 0.5), (PI, 1.0)] {
            for m in -40..=40 {
                let q = twisted_momentum(m, kappa, 1.0);
                let a = fourier_coefficient(k0, q, 1.0);
                let b = fourier_coefficient_quadrature(k0, q, 1.0, 20);
                assert!((a - b).norm() < 1e-14, "k0={k0} m={m} {a} {b}");
            }
        }
    }

    #[test]
    fn parseval_and_tail() {
        for (c, kappa) in [(1.0, 0.0), (10.0, 0.5), (0.1, 0.75)] {
            let r = entropy_n2(c, kappa, 1.0, &N2OracleSpec { modes: 100_000 }).unwrap();
            assert!(r.tail_mass < 1e-5, "{}", r.tail_mass);
            let s = r.occupations.iter().sum::<f64>();
            assert!(s <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn converged_in_mode_count() {
        for (c, kappa) in [(1.0, 0.0), (10.0, 0.5), (0.1, 0.75)] {
            let a = entropy_n2(c, kappa, 1.0, &N2OracleSpec { modes: 10_000 }).unwrap();
            let b = entropy_n2(c, kappa, 1.0, &N2OracleSpec::default()).unwrap();
            assert!((a.entropy - b.entropy).abs() < 1e-7, "{} {}", a.entropy, b.entropy);
        }
    }

    #[test]
    fn length_scaling() {
        // only c L matters
        let a = entropy_n2(10.0, 0.3, 1.0, &N2OracleSpec::default()).unwrap();
        let b = entropy_n2(5.0, 0.3, 2.0, &N2OracleSpec::default()).unwrap();
        assert!((a.entropy - b.entropy).abs() < 1e-10);
    }
}
