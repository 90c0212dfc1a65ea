//! Exact ground-state wavefunction of the anyon gas.
//!
//! Inside the sector `0 ≤ y_1 ≤ … ≤ y_N ≤ L` (the coordinates sorted
//! ascending) the bosonic part is the Bethe sum
//!
//! ```text
//! ψ_B(y) = Σ_P A_P exp(i Σ_j k_{P_j} y_j),   A_P = ε_P Π_{j<l} (i k_{P_l} − i k_{P_j} + c')
//! ```
//!
//! and the anyonic wavefunction multiplies it by the ordering phase
//! `exp(−iκπ/2 Σ_{i<j} ε(x_i − x_j))`. In the hard-core limit the Bethe sum
//! collapses to the Slater determinant `det[exp(i k_j y_l)]`.
//!
//! The overall constant is fixed so that `ψ_B = 1` at the evenly spaced
//! configuration `y_j = (j − ½) L / N`; the bosonic part is then real.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::bethe::BetheState;
use crate::error::{invalid, Error, Result};

/// Largest `N` accepted on the permutation-sum path (`8! = 40320` terms).
pub const MAX_PERMUTATION_N: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct SectorDecomposition {
    /// `sorted_coords[i] = x[sorting_perm[i]]` (zero-based).
    pub sorting_perm: Vec<usize>,
    pub sorted_coords: Vec<f64>,
}

/// Stable ascending sort of the coordinates with the permutation recorded.
pub fn sort_to_sector(x: &[f64], length: f64) -> Result<SectorDecomposition> {
    if let Some(v) = x.iter().find(|&&v| !(0.0..=length).contains(&v)) {
        return Err(invalid(format!("coordinate {v} outside [0, {length}]")));
    }
    let mut perm: Vec<usize> = (0..x.len()).collect();
    perm.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let sorted = perm.iter().map(|&i| x[i]).collect();
    Ok(SectorDecomposition {
        sorting_perm: perm,
        sorted_coords: sorted,
    })
}

/// `ε(u)`: `+1`, `−1`, `0` for `u > 0`, `u < 0`, `u = 0`.
#[inline]
pub fn sign_eps(u: f64) -> f64 {
    if u > 0.0 {
        1.0
    } else if u < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// `exp(−iκπ/2 Σ_{i<j} ε(x_i − x_j))`.
pub fn anyonic_phase(x: &[f64], kappa: f64) -> Complex64 {
    if kappa == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    let mut total = 0.0;
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            total += sign_eps(x[i] - x[j]);
        }
    }
    Complex64::from_polar(1.0, -0.5 * kappa * PI * total)
}

/// All permutations of `0..n` in lexicographic order with their parities.
pub fn permutations(n: usize) -> Vec<(Vec<usize>, f64)> {
    let mut p: Vec<usize> = (0..n).collect();
    let mut out = Vec::new();
    loop {
        out.push((p.clone(), parity(&p)));
        // next lexicographic permutation
        let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| p[i] < p[i + 1]) else {
            break;
        };
        let j = (i + 1..n).rev().find(|&j| p[j] > p[i]).expect("exists");
        p.swap(i, j);
        p[i + 1..].reverse();
    }
    out
}

fn parity(p: &[usize]) -> f64 {
    let mut inversions = 0;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            if p[i] > p[j] {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

#[derive(Debug, Clone)]
enum Kernel {
    /// `c' = 0`: all `k_j = 0`, constant bosonic part.
    Free,
    Bethe {
        perms: Vec<Vec<usize>>,
        amplitudes: Vec<Complex64>,
    },
    HardCore,
}

/// Immutable evaluator of `ψ_A` for one Bethe state.
#[derive(Debug, Clone)]
pub struct WavefnEvaluator {
    state: BetheState,
    kappa: f64,
    kernel: Kernel,
    perm_signs: Vec<f64>,
    scale: Complex64,
}

impl WavefnEvaluator {
    /// Selects the determinant path for an infinite effective coupling and the
    /// permutation sum otherwise.
    pub fn new(state: &BetheState) -> Result<Self> {
        let hardcore = state.c_eff.is_infinite();
        Self::build(state, hardcore)
    }

    /// Permutation sum even when `c' = ∞` (all amplitudes reduce to `ε_P`).
    pub fn permutation_sum(state: &BetheState) -> Result<Self> {
        Self::build(state, false)
    }

    fn build(state: &BetheState, hardcore: bool) -> Result<Self> {
        let n = state.n();
        let k = &state.quasi_momenta;
        let c_eff = state.c_eff.value();
        let mut perm_signs = Vec::new();
        let kernel = if hardcore {
            Kernel::HardCore
        } else if c_eff == 0.0 {
            Kernel::Free
        } else {
            if n > MAX_PERMUTATION_N {
                return Err(invalid(format!(
                    "N = {n} exceeds the permutation-sum cap of {MAX_PERMUTATION_N}"
                )));
            }
            // Common scale per pair factor keeps N(N−1)/2-fold products finite.
            let spread = k.iter().fold(0.0f64, |m, v| m.max(v.abs())) * 2.0;
            let unit = if state.c_eff.is_infinite() { 1.0 } else { c_eff + spread };
            let mut perms = Vec::new();
            let mut amplitudes = Vec::new();
            for (p, sign) in permutations(n) {
                let mut a = Complex64::new(sign, 0.0);
                if !state.c_eff.is_infinite() {
                    for j in 0..n {
                        for l in j + 1..n {
                            a *= Complex64::new(c_eff, k[p[l]] - k[p[j]]) / unit;
                        }
                    }
                }
                perm_signs.push(sign);
                perms.push(p);
                amplitudes.push(a);
            }
            Kernel::Bethe { perms, amplitudes }
        };
        let mut ev = Self {
            state: state.clone(),
            kappa: state.params.kappa,
            kernel,
            perm_signs,
            scale: Complex64::new(1.0, 0.0),
        };
        let length = state.params.length;
        let reference: Vec<f64> = (0..n).map(|j| (j as f64 + 0.5) * length / n as f64).collect();
        let z = ev.bosonic_unscaled(&reference);
        if !(z.norm() > 0.0) || !z.norm().is_finite() {
            return Err(Error::Numeric(format!(
                "bosonic wavefunction vanishes at the reference configuration ({z})"
            )));
        }
        ev.scale = z.inv();
        Ok(ev)
    }

    pub fn state(&self) -> &BetheState {
        &self.state
    }

    pub fn n(&self) -> usize {
        self.state.n()
    }

    pub fn length(&self) -> f64 {
        self.state.params.length
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn is_hardcore(&self) -> bool {
        matches!(self.kernel, Kernel::HardCore)
    }

    /// `ε_P` for every stored permutation (empty off the permutation path).
    pub fn perm_signs(&self) -> &[f64] {
        &self.perm_signs
    }

    /// Normalized amplitudes `A_P` (empty off the permutation path).
    pub fn amp_coeffs(&self) -> Vec<Complex64> {
        match &self.kernel {
            Kernel::Bethe { amplitudes, .. } => amplitudes.iter().map(|a| a * self.scale).collect(),
            _ => Vec::new(),
        }
    }

    fn bosonic_unscaled(&self, sorted: &[f64]) -> Complex64 {
        let n = sorted.len();
        if n > MAX_PERMUTATION_N {
            // only the determinant path gets here
            return slater_determinant(&self.state.quasi_momenta, sorted);
        }
        let mut plane = [Complex64::new(0.0, 0.0); MAX_PERMUTATION_N * MAX_PERMUTATION_N];
        if !matches!(self.kernel, Kernel::Free) {
            for (j, &y) in sorted.iter().enumerate() {
                self.plane_waves_into(y, &mut plane[j * n..(j + 1) * n]);
            }
        }
        self.bosonic_from_waves(&plane[..n * n], n)
    }

    /// `waves[m] = exp(i k_m u)` for `m = 0..N`.
    pub fn plane_waves_into(&self, u: f64, waves: &mut [Complex64]) {
        for (w, k) in waves.iter_mut().zip(&self.state.quasi_momenta) {
            *w = Complex64::from_polar(1.0, k * u);
        }
    }

    /// Bethe sum from per-position plane waves: `waves[j * n + m] =
    /// exp(i k_m y_j)` with `y` in sector order.
    fn bosonic_from_waves(&self, waves: &[Complex64], n: usize) -> Complex64 {
        match &self.kernel {
            Kernel::Free => Complex64::new(1.0, 0.0),
            Kernel::Bethe { perms, amplitudes } => {
                let mut sum = Complex64::new(0.0, 0.0);
                for (p, a) in perms.iter().zip(amplitudes) {
                    let mut term = *a;
                    for (j, &pj) in p.iter().enumerate() {
                        term *= waves[j * n + pj];
                    }
                    sum += term;
                }
                sum
            }
            Kernel::HardCore => {
                let mut a = [Complex64::new(0.0, 0.0); 64];
                if n * n > a.len() {
                    let mut v = waves.to_vec();
                    return complex_determinant(&mut v, n);
                }
                a[..n * n].copy_from_slice(waves);
                complex_determinant(&mut a[..n * n], n)
            }
        }
    }

    /// `ψ_A` from coordinates and their precomputed plane waves
    /// (`waves[p * N + m] = exp(i k_m x_p)`, particle order).
    pub fn eval_with_waves(&self, x: &[f64], waves: &[Complex64]) -> Complex64 {
        let n = x.len();
        debug_assert!(n <= 64 && waves.len() == n * n);
        let mut order = [0usize; 64];
        let order = &mut order[..n];
        for (i, o) in order.iter_mut().enumerate() {
            *o = i;
        }
        order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
        let bosonic = if n <= MAX_PERMUTATION_N {
            let mut sorted = [Complex64::new(0.0, 0.0); MAX_PERMUTATION_N * MAX_PERMUTATION_N];
            for (j, &p) in order.iter().enumerate() {
                sorted[j * n..(j + 1) * n].copy_from_slice(&waves[p * n..(p + 1) * n]);
            }
            self.bosonic_from_waves(&sorted[..n * n], n)
        } else {
            let mut sorted = vec![Complex64::new(0.0, 0.0); n * n];
            for (j, &p) in order.iter().enumerate() {
                sorted[j * n..(j + 1) * n].copy_from_slice(&waves[p * n..(p + 1) * n]);
            }
            self.bosonic_from_waves(&sorted, n)
        };
        let v = bosonic * self.scale;
        let v = if self.kappa == 0.0 {
            Complex64::new(v.re, 0.0)
        } else {
            v
        };
        anyonic_phase(x, self.kappa) * v
    }

    /// Phase-normalized bosonic part on sector-ordered coordinates.
    pub fn bosonic_sorted(&self, sorted: &[f64]) -> Complex64 {
        let v = self.bosonic_unscaled(sorted) * self.scale;
        if self.kappa == 0.0 {
            Complex64::new(v.re, 0.0)
        } else {
            v
        }
    }

    /// Like [`Self::bosonic_sorted`] but keeps the (round-off) imaginary part.
    pub fn bosonic_sorted_raw(&self, sorted: &[f64]) -> Complex64 {
        self.bosonic_unscaled(sorted) * self.scale
    }

    /// Unnormalized `ψ_A(x)`. Coordinates are assumed to lie in `[0, L]`.
    pub fn eval_psi(&self, x: &[f64]) -> Complex64 {
        debug_assert_eq!(x.len(), self.n());
        let mut sorted = [0.0; 64];
        let sorted = &mut sorted[..x.len()];
        sorted.copy_from_slice(x);
        sorted.sort_by(f64::total_cmp);
        anyonic_phase(x, self.kappa) * self.bosonic_sorted(sorted)
    }

    /// `|ψ(x) − e^{−iθ} ψ(x with x_i ↔ x_j)| / |ψ(x)|` for `i < j`.
    pub fn exchange_residual(&self, x: &[f64], i: usize, j: usize) -> Result<f64> {
        if !(i < j && j < x.len()) {
            return Err(invalid(format!("need i < j < N, got ({i}, {j})")));
        }
        let psi = self.eval_psi(x);
        if psi.norm() < 1e-14 {
            return Err(Error::DegeneratePoint(psi.norm()));
        }
        let mut swapped = x.to_vec();
        swapped.swap(i, j);
        let theta = exchange_angle(x, i, j, self.kappa);
        let other = Complex64::from_polar(1.0, -theta) * self.eval_psi(&swapped);
        Ok((psi - other).norm() / psi.norm())
    }
}

/// `θ = κπ [Σ_{k=i+1}^{j} ε(x_i − x_k) − Σ_{k=i+1}^{j−1} ε(x_j − x_k)]`.
pub fn exchange_angle(x: &[f64], i: usize, j: usize, kappa: f64) -> f64 {
    let a: f64 = (i + 1..=j).map(|k| sign_eps(x[i] - x[k])).sum();
    let b: f64 = (i + 1..j).map(|k| sign_eps(x[j] - x[k])).sum();
    kappa * PI * (a - b)
}

/// `det[exp(i k_j y_l)]` by Gaussian elimination with partial pivoting.
fn slater_determinant(k: &[f64], y: &[f64]) -> Complex64 {
    let n = k.len();
    let mut a: Vec<Complex64> = (0..n * n)
        .map(|idx| Complex64::from_polar(1.0, k[idx / n] * y[idx % n]))
        .collect();
    complex_determinant(&mut a, n)
}

pub(crate) fn complex_determinant(a: &mut [Complex64], n: usize) -> Complex64 {
    let mut det = Complex64::new(1.0, 0.0);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&r, &s| a[r * n + col].norm_sqr().total_cmp(&a[s * n + col].norm_sqr()))
            .expect("non-empty");
        if a[pivot * n + col].norm_sqr() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if pivot != col {
            for c in 0..n {
                a.swap(pivot * n + c, col * n + c);
            }
            det = -det;
        }
        let d = a[col * n + col];
        det *= d;
        for r in col + 1..n {
            let f = a[r * n + col] / d;
            if f.norm_sqr() == 0.0 {
                continue;
            }
            for c in col..n {
                let v = a[col * n + c];
                a[r * n + c] -= f * v;
            }
        }
    }
    det
}

/// Hard-core wavefunction straight from the parameters, without a Bethe state.
pub fn eval_psi_hardcore(params: &crate::params::ModelParams, x: &[f64]) -> Result<Complex64> {
    let sector = sort_to_sector(x, params.length)?;
    let qn = crate::bethe::ground_state_quantum_numbers(params.n)?;
    let k: Vec<f64> = qn.iter().map(|n| 2.0 * PI * n / params.length).collect();
    Ok(anyonic_phase(x, params.kappa) * slater_determinant(&k, &sector.sorted_coords))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bethe::{solve_at_effective_coupling, solve_ground_state};
    use crate::params::ModelParams;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn evaluator(n: usize, c: f64, kappa: f64) -> WavefnEvaluator {
        let state = solve_ground_state(&ModelParams::new(n, 1.0, c, kappa).unwrap()).unwrap();
        WavefnEvaluator::new(&state).unwrap()
    }

    fn random_point(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        (0..n).map(|_| rng.random::<f64>()).collect()
    }

    #[test]
    fn sector_examples() {
        let s = sort_to_sector(&[0.3, 0.1, 0.7, 0.5], 1.0).unwrap();
        assert_eq!(s.sorting_perm, vec![1, 0, 3, 2]);
        assert_eq!(s.sorted_coords, vec![0.1, 0.3, 0.5, 0.7]);
        let s = sort_to_sector(&[0.1, 0.2, 0.3], 1.0).unwrap();
        assert_eq!(s.sorting_perm, vec![0, 1, 2]);
        let s = sort_to_sector(&[0.2, 0.2], 1.0).unwrap();
        assert_eq!(s.sorting_perm, vec![0, 1]);
        assert!(sort_to_sector(&[0.2, 1.2], 1.0).is_err());
        assert!(sort_to_sector(&[-0.1, 0.2], 1.0).is_err());
    }

    #[test]
    fn phase_examples() {
        assert_eq!(anyonic_phase(&[0.9, 0.1, 0.5], 0.0), Complex64::new(1.0, 0.0));
        let kappa = 0.3;
        let p = anyonic_phase(&[0.1, 0.6], kappa);
        assert!((p - Complex64::from_polar(1.0, kappa * PI / 2.0)).norm() < 1e-15);
        assert!((anyonic_phase(&[0.4, 0.4], 0.7) - 1.0).norm() < 1e-15);
    }

    #[test]
    fn permutation_table() {
        let perms = permutations(4);
        assert_eq!(perms.len(), 24);
        let even = perms.iter().filter(|(_, s)| *s > 0.0).count();
        assert_eq!(even, 12);
        assert_eq!(perms[0].0, vec![0, 1, 2, 3]);
    }

    #[test]
    fn free_wavefunction_is_constant() {
        let ev = evaluator(4, 0.0, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let v = ev.eval_psi(&random_point(&mut rng, 4));
            assert!((v - 1.0).norm() < 1e-15);
        }
    }

    #[test]
    fn amplitudes_follow_the_pair_product() {
        let ev = evaluator(3, 2.0, 0.0);
        let k = &ev.state().quasi_momenta;
        let c = 2.0;
        let amps = ev.amp_coeffs();
        assert_eq!(amps.len(), 6);
        let raw: Vec<Complex64> = permutations(3)
            .into_iter()
            .map(|(p, s)| {
                let mut a = Complex64::new(s, 0.0);
                for j in 0..3 {
                    for l in j + 1..3 {
                        a *= Complex64::new(c, k[p[l]] - k[p[j]]);
                    }
                }
                a
            })
            .collect();
        let ratio = amps[0] / raw[0];
        for (a, r) in amps.iter().zip(&raw) {
            assert!((a / r - ratio).norm() < 1e-12);
        }
    }

    #[test]
    fn bosonic_part_is_real() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for &c in &[0.3, 1.0, 10.0, 100.0] {
            let ev = evaluator(4, c, 0.0);
            for _ in 0..50 {
                let mut y = random_point(&mut rng, 4);
                y.sort_by(f64::total_cmp);
                let v = ev.bosonic_sorted_raw(&y);
                assert!(v.im.abs() < 1e-10 * v.norm().max(1e-300), "c={c} {v}");
                // nodeless ground state
                assert!(v.re > 0.0);
            }
        }
    }

    #[test]
    fn exchange_symmetry_bose_fermi_anyon() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for &(c, kappa) in &[(1.0, 0.0), (10.0, 0.5), (3.0, 0.25), (10.0, 1.0)] {
            let ev = evaluator(4, c, kappa);
            for _ in 0..100 {
                let x = random_point(&mut rng, 4);
                for i in 0..4 {
                    for j in i + 1..4 {
                        let r = ev.exchange_residual(&x, i, j).unwrap();
                        assert!(r < 1e-10, "c={c} kappa={kappa} ({i},{j}) r={r}");
                    }
                }
            }
        }
    }

    #[test]
    fn fermi_limit_adjacent_swap_is_antisymmetric() {
        let ev = evaluator(4, 5.0, 1.0);
        let x = [0.1, 0.35, 0.8, 0.6];
        let theta = exchange_angle(&x, 1, 2, 1.0);
        assert!((theta.abs() - PI).abs() < 1e-15);
        let mut s = x;
        s.swap(1, 2);
        assert!((ev.eval_psi(&x) + ev.eval_psi(&s)).norm() < 1e-12);
    }

    #[test]
    fn exchange_residual_flags_nodes() {
        let ev = evaluator(3, 5.0, 1.0);
        assert!(matches!(
            ev.exchange_residual(&[0.2, 0.2, 0.6], 0, 1),
            Err(Error::DegeneratePoint(_))
        ));
        assert!(ev.exchange_residual(&[0.2, 0.3, 0.6], 1, 0).is_err());
    }

    #[test]
    fn twisted_boundary_condition() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for &(c, kappa) in &[(1.0, 0.0), (10.0, 0.5), (2.0, 0.8)] {
            let ev = evaluator(4, c, kappa);
            let twist = Complex64::from_polar(1.0, kappa * PI * 3.0);
            for _ in 0..50 {
                let mut x = random_point(&mut rng, 4);
                x[0] = 0.0;
                let at0 = ev.eval_psi(&x);
                x[0] = 1.0;
                let at_l = ev.eval_psi(&x);
                assert!((at0 - twist * at_l).norm() < 1e-10 * at0.norm(), "c={c} kappa={kappa}");
            }
        }
    }

    #[test]
    fn modulus_is_permutation_invariant() {
        let ev = evaluator(4, 4.0, 0.6);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..30 {
            let x = random_point(&mut rng, 4);
            let m = ev.eval_psi(&x).norm();
            for (p, _) in permutations(4) {
                let y: Vec<f64> = p.iter().map(|&i| x[i]).collect();
                assert!((ev.eval_psi(&y).norm() - m).abs() < 1e-12 * m);
            }
        }
    }

    #[test]
    fn continuous_across_sector_boundaries() {
        let ev = evaluator(4, 3.0, 0.0);
        let h = 1e-13;
        let x = [0.4, 0.4, 0.1, 0.8];
        let below = ev.eval_psi(&[0.4 - h, 0.4, 0.1, 0.8]);
        let above = ev.eval_psi(&[0.4 + h, 0.4, 0.1, 0.8]);
        let at = ev.eval_psi(&x);
        assert!((below - above).norm() < 1e-10 * at.norm());
    }

    #[test]
    fn hardcore_nodes_and_cross_path() {
        let params = ModelParams::hardcore(4, 1.0, 0.0).unwrap();
        assert!(eval_psi_hardcore(&params, &[0.3, 0.3, 0.5, 0.9]).unwrap().norm() < 1e-14);
        let state = solve_ground_state(&params).unwrap();
        let det = WavefnEvaluator::new(&state).unwrap();
        assert!(det.is_hardcore());
        assert!(det.eval_psi(&[0.5, 0.2, 0.5, 0.7]).norm() < 1e-14);

        let stiff = solve_at_effective_coupling(&params, 1e6).unwrap();
        let sum = WavefnEvaluator::new(&stiff).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let pts: Vec<Vec<f64>> = (0..100).map(|_| random_point(&mut rng, 4)).collect();
        let a: Vec<Complex64> = pts.iter().map(|x| eval_psi_hardcore(&params, x).unwrap()).collect();
        let b: Vec<Complex64> = pts.iter().map(|x| sum.eval_psi(x)).collect();
        let num: Complex64 = a.iter().zip(&b).map(|(a, b)| b.conj() * a).sum();
        let den: f64 = b.iter().map(|b| b.norm_sqr()).sum();
        let ratio = num / den;
        // The finite-c' correction is O(1/c') in absolute terms, so it is
        // measured against the wavefunction scale rather than point by point
        // (near nodes the pointwise ratio is dominated by it).
        let scale = a.iter().fold(0.0f64, |m, v| m.max(v.norm()));
        let worst = a.iter().zip(&b).fold(0.0f64, |m, (a, b)| m.max((a - ratio * b).norm()));
        assert!(worst < 1e-4 * scale, "worst {worst} scale {scale}");
    }

    #[test]
    fn two_body_hardcore_is_a_sine() {
        let params = ModelParams::hardcore(2, 1.0, 0.0).unwrap();
        for &(a, b) in &[(0.1, 0.4), (0.25, 0.9), (0.7, 0.05)] {
            let v = eval_psi_hardcore(&params, &[a, b]).unwrap();
            // det = e^{iπ(y1 - y2)} - e^{iπ(y2 - y1)} on the sorted pair
            let expect = 2.0 * (PI * (a - b)).abs().sin();
            assert!((v.norm() - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn contact_derivative_jump_equals_coupling() {
        // (∂_{x2} ψ)|above − (∂_{x2} ψ)|below at x2 = x1, divided by ψ.
        let h = 1e-4;
        let jump = |ev: &WavefnEvaluator, base: &[f64], i: usize, j: usize| {
            let f = |d: f64| {
                let mut x = base.to_vec();
                x[j] = x[i] + d;
                ev.eval_psi(&x).re
            };
            let up = (-3.0 * f(0.0) + 4.0 * f(h) - f(2.0 * h)) / (2.0 * h);
            let down = (3.0 * f(0.0) - 4.0 * f(-h) + f(-2.0 * h)) / (2.0 * h);
            (up - down) / f(0.0)
        };
        for &c in &[1.0, 4.0] {
            let two = evaluator(2, c, 0.0);
            let r2 = jump(&two, &[0.3, 0.3], 0, 1);
            assert!((r2 - c).abs() < 1e-5 * c, "N=2: {r2} vs {c}");
            let four = evaluator(4, c, 0.0);
            for base in [[0.3, 0.0, 0.55, 0.9], [0.7, 0.1, 0.0, 0.4]] {
                let r4 = jump(&four, &base, 0, 1);
                assert!((r4 - r2).abs() < 1e-5 * c, "N=4: {r4} vs {r2}");
            }
        }
    }

    #[test]
    fn rejects_large_n_on_permutation_path() {
        let state = solve_ground_state(&ModelParams::new(9, 1.0, 1.0, 0.0).unwrap()).unwrap();
        assert!(WavefnEvaluator::new(&state).is_err());
        let hc = solve_ground_state(&ModelParams::hardcore(12, 1.0, 0.2).unwrap()).unwrap();
        assert!(WavefnEvaluator::new(&hc).is_ok());
    }
}
