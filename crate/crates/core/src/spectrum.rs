//! Natural orbitals, occupation numbers and the von Neumann entropy.
//!
//! The integral eigenproblem `∫ ρ₁(x, x') φ(x') dx' = λ φ(x)` is discretized
//! on the quadrature nodes and symmetrized with the weights,
//! `B = W^{1/2} ρ₁ W^{1/2}`, so the matrix stays Hermitian and its
//! eigenvalues are the occupations directly.

use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::rdm::{fmt_f64, RdmMatrix};

/// Eigenvalues below this are dropped from the entropy sum.
pub const TRUNCATION: f64 = 1e-12;
/// Negative eigenvalues down to `-PSD_TOLERANCE` count as quadrature noise.
pub const PSD_TOLERANCE: f64 = 1e-8;
/// Relative Hermiticity tolerance on the input kernel.
pub const HERMITIAN_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OccupationSpectrum {
    /// Descending, one per grid node.
    pub occupations: Vec<f64>,
    /// Bits.
    pub entropy: f64,
    /// Total `|λ|` clamped to zero.
    pub truncation_mass: f64,
    /// Occupation beyond the resolved modes, accounted for in the entropy.
    #[serde(default)]
    pub tail_mass: f64,
    /// Smallest eigenvalue before clamping.
    pub min_eigenvalue: f64,
    /// `orbitals[η][i] = φ_η(x_i)`, orthonormal under the quadrature weights.
    #[serde(skip)]
    pub orbitals: Option<Vec<Vec<Complex64>>>,
}

impl OccupationSpectrum {
    pub fn sum(&self) -> f64 {
        self.occupations.iter().sum()
    }

    pub fn top(&self, count: usize) -> Vec<f64> {
        let mut v: Vec<f64> = self.occupations.iter().take(count).copied().collect();
        v.resize(count, 0.0);
        v
    }

    /// `eta,lambda` with `eta` starting at 1.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "eta,lambda")?;
        for (eta, lambda) in self.occupations.iter().enumerate() {
            writeln!(out, "{},{}", eta + 1, fmt_f64(*lambda))?;
        }
        Ok(())
    }
}

/// `−Σ λ log₂ λ` over the positive entries.
pub fn von_neumann_entropy(occupations: &[f64]) -> Result<f64> {
    if let Some(l) = occupations.iter().find(|&&l| l < -PSD_TOLERANCE || l.is_nan()) {
        return Err(invalid(format!("occupation {l} is negative")));
    }
    let total: f64 = occupations.iter().sum();
    if total > 1.0 + PSD_TOLERANCE {
        return Err(invalid(format!("occupations sum to {total} > 1")));
    }
    Ok(occupations.iter().filter(|&&l| l > 0.0).map(|&l| -l * l.log2()).sum())
}

pub fn natural_occupations(rdm: &RdmMatrix) -> Result<OccupationSpectrum> {
    natural_occupations_with(rdm, false)
}

/// As [`natural_occupations`], also returning the orbitals on the nodes.
pub fn natural_orbitals(rdm: &RdmMatrix) -> Result<OccupationSpectrum> {
    natural_occupations_with(rdm, true)
}

fn natural_occupations_with(rdm: &RdmMatrix, keep_orbitals: bool) -> Result<OccupationSpectrum> {
    let m = rdm.dim();
    let scale = rdm.max_abs().max(f64::MIN_POSITIVE);
    let dev = rdm.hermitian_deviation();
    if dev > HERMITIAN_TOLERANCE * scale {
        return Err(invalid(format!("density matrix is not Hermitian (deviation {dev:e})")));
    }
    let sqrt_w: Vec<f64> = rdm.grid.weights.iter().map(|w| w.sqrt()).collect();
    let b = DMatrix::from_fn(m, m, |i, j| {
        // exact Hermitian symmetrization of the stored values
        let v = 0.5 * (rdm.get(i, j) + rdm.get(j, i).conj());
        v * (sqrt_w[i] * sqrt_w[j])
    });
    let eig = b.symmetric_eigen();
    if eig.eigenvalues.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("eigensolver returned non-finite values".into()));
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let min_eigenvalue = order.last().map_or(0.0, |&i| eig.eigenvalues[i]);
    if min_eigenvalue < -PSD_TOLERANCE {
        return Err(Error::Numeric(format!(
            "density matrix is not positive semidefinite (eigenvalue {min_eigenvalue:e})"
        )));
    }
    let mut truncation_mass = 0.0;
    let occupations: Vec<f64> = order
        .iter()
        .map(|&i| {
            let l = eig.eigenvalues[i];
            if l < TRUNCATION {
                truncation_mass += l.abs();
                0.0
            } else {
                l
            }
        })
        .collect();
    let entropy = von_neumann_entropy(&occupations)?;
    let orbitals = keep_orbitals.then(|| {
        order
            .iter()
            .map(|&e| (0..m).map(|i| eig.eigenvectors[(i, e)] / sqrt_w[i]).collect())
            .collect()
    });
    Ok(OccupationSpectrum {
        occupations,
        entropy,
        truncation_mass,
        tail_mass: 0.0,
        min_eigenvalue,
        orbitals,
    })
}

/// Largest deviation of `|ρ₁(x_i, x_j)|` from its average over all node pairs
/// sharing the same separation `(x_i − x_j) mod L`.
pub fn toeplitz_deviation(rdm: &RdmMatrix) -> f64 {
    use std::collections::HashMap;
    let m = rdm.dim();
    let length = rdm.grid.length;
    let key = |i: usize, j: usize| {
        let d = (rdm.grid.nodes[i] - rdm.grid.nodes[j]).rem_euclid(length) / length;
        let k = (d * 1e9).round() as i64;
        if k == 1_000_000_000 {
            0
        } else {
            k
        }
    };
    let mut groups: HashMap<i64, (f64, usize)> = HashMap::new();
    for i in 0..m {
        for j in 0..m {
            let e = groups.entry(key(i, j)).or_insert((0.0, 0));
            e.0 += rdm.get(i, j).norm();
            e.1 += 1;
        }
    }
    let mut worst: f64 = 0.0;
    for i in 0..m {
        for j in 0..m {
            let (s, c) = groups[&key(i, j)];
            worst = worst.max((rdm.get(i, j).norm() - s / c as f64).abs());
        }
    }
    worst
}
