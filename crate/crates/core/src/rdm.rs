//! One-body reduced density matrix on a quadrature grid.
//!
//! `ρ₁(x, x') ∝ ∫ dX ψ*(x, X) ψ(x', X)` over the `N − 1` remaining
//! coordinates, normalized so that `∫ ρ₁(x, x) dx = 1`.
//!
//! The integrand is symmetric in the integrated coordinates, so the default
//! scheme integrates only the ordered region `X_2 ≤ … ≤ X_N` (times
//! `(N−1)!`) with nested Gauss-Legendre rules, each level cut at `x` and
//! `x'`. Every cell is then free of kinks and phase jumps: particle-particle
//! cusps sit on cell faces, and the anyonic string jumps where an integrated
//! coordinate crosses `x` or `x'`.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::params::ModelParams;
use crate::quadrature::{QuadratureGrid, Rule};
use crate::wavefn::WavefnEvaluator;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InnerScheme {
    /// Nested rules over the ordered region.
    Ordered,
    /// Plain tensor product over the cube, split at `x` and `x'` per axis.
    TensorCube,
}

/// How the `N − 1` inner integrals are discretized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InnerSpec {
    pub scheme: InnerScheme,
    /// Panels per ring length; every segment between breakpoints gets its
    /// proportional share, at least one.
    pub panels: usize,
    pub order: usize,
}

impl Default for InnerSpec {
    fn default() -> Self {
        Self {
            scheme: InnerScheme::Ordered,
            panels: 2,
            order: 8,
        }
    }
}

impl InnerSpec {
    pub fn validate(&self) -> Result<()> {
        if self.panels < 1 || self.order < 2 {
            return Err(invalid(format!(
                "inner quadrature needs panels >= 1 and order >= 2 (got {} x {})",
                self.panels, self.order
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

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RdmMatrix {
    pub params: ModelParams,
    pub grid: QuadratureGrid,
    /// Row-major `M × M`.
    pub values: Vec<Complex64>,
    /// Weighted trace before normalization.
    pub trace_raw: f64,
}

impl RdmMatrix {
    pub fn dim(&self) -> usize {
        self.grid.len()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.values[i * self.dim() + j]
    }

    pub fn weighted_trace(&self) -> f64 {
        let m = self.dim();
        (0..m).map(|i| self.grid.weights[i] * self.values[i * m + i].re).sum()
    }

    /// `max |ρ_ij − conj(ρ_ji)|`.
    pub fn hermitian_deviation(&self) -> f64 {
        let m = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..m {
            for j in i..m {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    pub fn max_imag(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.im.abs()))
    }

    /// Text dump: a header line `N L c kappa M`, `M` lines `node weight`,
    /// then `M` rows of `re im` pairs.
    pub fn write_text<W: Write>(&self, mut out: W) -> Result<()> {
        let p = &self.params;
        let m = self.dim();
        writeln!(
            out,
            "{} {} {} {} {}",
            p.n,
            fmt_f64(p.length),
            fmt_f64(if p.hardcore { f64::INFINITY } else { p.c }),
            fmt_f64(p.kappa),
            m
        )?;
        for (x, w) in self.grid.nodes.iter().zip(&self.grid.weights) {
            writeln!(out, "{} {}", fmt_f64(*x), fmt_f64(*w))?;
        }
        let mut line = String::new();
        for i in 0..m {
            line.clear();
            for j in 0..m {
                let v = self.get(i, j);
                if j > 0 {
                    line.push(' ');
                }
                let _ = write!(line, "{} {}", fmt_f64(v.re), fmt_f64(v.im));
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }

    /// Reads the text dump written by [`Self::write_text`]. Panel metadata is
    /// not stored there, so the returned grid lists only `0` and `L` as
    /// boundaries and `order = 0`.
    pub fn read_text<R: BufRead>(input: R) -> Result<Self> {
        let mut tokens = Vec::new();
        for line in input.lines() {
            let line = line?;
            tokens.extend(line.split_whitespace().map(str::to_owned));
        }
        let mut it = tokens.into_iter();
        let mut next = |what: &str| it.next().ok_or_else(|| Error::Parse(format!("missing {what}")));
        let n: usize = parse(&next("N")?)?;
        let length: f64 = parse(&next("L")?)?;
        let c: f64 = parse(&next("c")?)?;
        let kappa: f64 = parse(&next("kappa")?)?;
        let m: usize = parse(&next("M")?)?;
        let mut nodes = Vec::with_capacity(m);
        let mut weights = Vec::with_capacity(m);
        for _ in 0..m {
            nodes.push(parse(&next("node")?)?);
            weights.push(parse(&next("weight")?)?);
        }
        let mut values = Vec::with_capacity(m * m);
        for _ in 0..m * m {
            let re = parse(&next("re")?)?;
            let im = parse(&next("im")?)?;
            values.push(Complex64::new(re, im));
        }
        let params = ModelParams {
            n,
            length,
            c,
            kappa,
            hardcore: c.is_infinite(),
        };
        let grid = QuadratureGrid {
            nodes,
            weights,
            panel_boundaries: vec![0.0, length],
            order: 0,
            length,
        };
        let mut rdm = Self {
            params,
            grid,
            values,
            trace_raw: f64::NAN,
        };
        rdm.trace_raw = rdm.weighted_trace();
        Ok(rdm)
    }
}

fn parse<T: std::str::FromStr>(s: &str) -> Result<T> {
    s.parse().map_err(|_| Error::Parse(format!("bad number {s:?}")))
}

/// Shortest round-trip representation; at most 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    format!("{v:?}")
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|v| v as f64).product()
}

/// Unnormalized `∫ dX ψ*(x, X) ψ(x', X)` with the outer coordinate in
/// particle slot 0.
pub fn rdm_entry_raw(ev: &WavefnEvaluator, x: f64, xp: f64, inner: &InnerSpec) -> Complex64 {
    rdm_entry_raw_kept(ev, x, xp, inner, 0)
}

/// As [`rdm_entry_raw`] with the outer coordinate in particle slot `kept`.
pub fn rdm_entry_raw_kept(ev: &WavefnEvaluator, x: f64, xp: f64, inner: &InnerSpec, kept: usize) -> Complex64 {
    let n = ev.n();
    assert!(kept < n, "particle slot {kept} out of range");
    let length = ev.length();
    let rule = Rule::new(inner.order);
    let mut breaks = [x.min(xp), x.max(xp)];
    if breaks[0] == breaks[1] {
        breaks[1] = f64::INFINITY;
    }
    let mut ctx = Ctx {
        ev,
        rule: &rule,
        panels: inner.panels,
        breaks,
        length,
        x,
        xp,
        kept,
        left: vec![0.0; n],
        right: vec![0.0; n],
        inner: vec![0.0; n - 1],
        x_waves: vec![Complex64::new(0.0, 0.0); n],
        xp_waves: vec![Complex64::new(0.0, 0.0); n],
        inner_waves: vec![Complex64::new(0.0, 0.0); n * (n - 1)],
        left_waves: vec![Complex64::new(0.0, 0.0); n * n],
        right_waves: vec![Complex64::new(0.0, 0.0); n * n],
    };
    ev.plane_waves_into(x, &mut ctx.x_waves);
    ev.plane_waves_into(xp, &mut ctx.xp_waves);
    match inner.scheme {
        InnerScheme::Ordered => ctx.ordered(0, 0.0, 1.0) * factorial(n - 1),
        InnerScheme::TensorCube => {
            let (mut nodes, mut weights) = (Vec::new(), Vec::new());
            rule.push_split_scaled(0.0, length, &breaks, inner.panels, length, &mut nodes, &mut weights);
            ctx.cube(0, &nodes, &weights, 1.0)
        }
    }
}

struct Ctx<'a> {
    ev: &'a WavefnEvaluator,
    rule: &'a Rule,
    panels: usize,
    breaks: [f64; 2],
    length: f64,
    x: f64,
    xp: f64,
    kept: usize,
    left: Vec<f64>,
    right: Vec<f64>,
    inner: Vec<f64>,
    // plane waves exp(i k_m u) cached per coordinate, N entries each
    x_waves: Vec<Complex64>,
    xp_waves: Vec<Complex64>,
    inner_waves: Vec<Complex64>,
    left_waves: Vec<Complex64>,
    right_waves: Vec<Complex64>,
}

impl Ctx<'_> {
    fn leaf(&mut self, weight: f64) -> Complex64 {
        let n = self.left.len();
        let mut slot = 0;
        for p in 0..n {
            let row = p * n..(p + 1) * n;
            if p == self.kept {
                self.left[p] = self.x;
                self.right[p] = self.xp;
                self.left_waves[row.clone()].copy_from_slice(&self.x_waves);
                self.right_waves[row].copy_from_slice(&self.xp_waves);
            } else {
                self.left[p] = self.inner[slot];
                self.right[p] = self.inner[slot];
                let cached = &self.inner_waves[slot * n..(slot + 1) * n];
                self.left_waves[row.clone()].copy_from_slice(cached);
                self.right_waves[row].copy_from_slice(cached);
                slot += 1;
            }
        }
        let a = self.ev.eval_with_waves(&self.left, &self.left_waves);
        let b = if self.x == self.xp {
            a
        } else {
            self.ev.eval_with_waves(&self.right, &self.right_waves)
        };
        a.conj() * b * weight
    }

    fn set_inner(&mut self, level: usize, u: f64) {
        let n = self.left.len();
        self.inner[level] = u;
        self.ev
            .plane_waves_into(u, &mut self.inner_waves[level * n..(level + 1) * n]);
    }

    fn ordered(&mut self, level: usize, lower: f64, weight: f64) -> Complex64 {
        if level == self.inner.len() {
            return self.leaf(weight);
        }
        let (mut nodes, mut weights) = (Vec::new(), Vec::new());
        self.rule.push_split_scaled(
            lower,
            self.length,
            &self.breaks,
            self.panels,
            self.length,
            &mut nodes,
            &mut weights,
        );
        let mut sum = Complex64::new(0.0, 0.0);
        for (&u, &w) in nodes.iter().zip(&weights) {
            self.set_inner(level, u);
            sum += self.ordered(level + 1, u, weight * w);
        }
        sum
    }

    fn cube(&mut self, level: usize, nodes: &[f64], weights: &[f64], weight: f64) -> Complex64 {
        if level == self.inner.len() {
            return self.leaf(weight);
        }
        let mut sum = Complex64::new(0.0, 0.0);
        for (&u, &w) in nodes.iter().zip(weights) {
            self.set_inner(level, u);
            sum += self.cube(level + 1, nodes, weights, weight * w);
        }
        sum
    }
}

/// Full matrix on the outer grid, trace-normalized.
pub fn build_rdm(ev: &WavefnEvaluator, outer: &QuadratureGrid, inner: &InnerSpec) -> Result<RdmMatrix> {
    build_rdm_kept(ev, outer, inner, 0)
}

pub fn build_rdm_kept(
    ev: &WavefnEvaluator,
    outer: &QuadratureGrid,
    inner: &InnerSpec,
    kept: usize,
) -> Result<RdmMatrix> {
    inner.validate()?;
    if kept >= ev.n() {
        return Err(invalid(format!("particle slot {kept} out of range")));
    }
    if (outer.length - ev.length()).abs() > 1e-12 * ev.length() {
        return Err(invalid("outer grid length differs from the ring length"));
    }
    let m = outer.len();
    let pairs: Vec<(usize, usize)> = (0..m).flat_map(|i| (i..m).map(move |j| (i, j))).collect();
    let upper: Vec<Complex64> = pairs
        .par_iter()
        .map(|&(i, j)| rdm_entry_raw_kept(ev, outer.nodes[i], outer.nodes[j], inner, kept))
        .collect();
    let mut values = vec![Complex64::new(0.0, 0.0); m * m];
    for (&(i, j), &v) in pairs.iter().zip(&upper) {
        if i == j {
            values[i * m + i] = Complex64::new(v.re, 0.0);
        } else {
            values[i * m + j] = v;
            values[j * m + i] = v.conj();
        }
    }
    let trace_raw: f64 = (0..m).map(|i| outer.weights[i] * values[i * m + i].re).sum();
    if !(trace_raw.is_finite() && trace_raw > 0.0) {
        return Err(Error::IntegrationFailure(format!(
            "raw trace {trace_raw} is not positive"
        )));
    }
    for v in &mut values {
        *v /= trace_raw;
    }
    Ok(RdmMatrix {
        params: ev.state().params,
        grid: outer.clone(),
        values,
        trace_raw,
    })
}

/// Plain Monte Carlo estimate of the unnormalized entry with its standard
/// error, uniform over `[0, L]^{N−1}`.
pub fn mc_rdm_entry(ev: &WavefnEvaluator, x: f64, xp: f64, samples: usize, seed: u64) -> Result<(Complex64, f64)> {
    if samples < 1000 {
        return Err(invalid(format!("need at least 1000 samples, got {samples}")));
    }
    let n = ev.n();
    let length = ev.length();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut left = vec![0.0; n];
    let mut right = vec![0.0; n];
    let (mut sum, mut sum_sq) = (Complex64::new(0.0, 0.0), 0.0);
    for _ in 0..samples {
        left[0] = x;
        right[0] = xp;
        for p in 1..n {
            let u = rng.random::<f64>() * length;
            left[p] = u;
            right[p] = u;
        }
        let f = ev.eval_psi(&left).conj() * ev.eval_psi(&right);
        sum += f;
        sum_sq += f.norm_sqr();
    }
    let count = samples as f64;
    let mean = sum / count;
    let var = (sum_sq / count - mean.norm_sqr()).max(0.0) * count / (count - 1.0);
    let volume = length.powi(n as i32 - 1);
    Ok((mean * volume, volume * (var / count).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bethe::solve_ground_state;
    use crate::quadrature::build_grid;
    use std::f64::consts::PI;

    fn evaluator(n: usize, c: f64, kappa: f64) -> WavefnEvaluator {
        let state = solve_ground_state(&ModelParams::new(n, 1.0, c, kappa).unwrap()).unwrap();
        WavefnEvaluator::new(&state).unwrap()
    }

    fn hardcore(n: usize, kappa: f64) -> WavefnEvaluator {
        let state = solve_ground_state(&ModelParams::hardcore(n, 1.0, kappa).unwrap()).unwrap();
        WavefnEvaluator::new(&state).unwrap()
    }

    #[test]
    fn free_bosons_constant_entries() {
        let ev = evaluator(4, 0.0, 0.0);
        let spec = InnerSpec::default();
        for &(x, xp) in &[(0.1, 0.9), (0.5, 0.5), (0.0, 1.0)] {
            let v = rdm_entry_raw(&ev, x, xp, &spec);
            assert!((v - 1.0).norm() < 1e-13, "{v}");
        }
        let outer = build_grid(2, 4, 1.0, &[]).unwrap();
        let rdm = build_rdm(&ev, &outer, &spec).unwrap();
        assert!(rdm.values.iter().all(|v| (v - 1.0).norm() < 1e-12));
    }

    #[test]
    fn ordered_and_cube_schemes_agree() {
        let ev = evaluator(3, 3.0, 0.4);
        let cube = InnerSpec {
            scheme: InnerScheme::TensorCube,
            panels: 12,
            order: 10,
        };
        let ordered = InnerSpec::default();
        for &(x, xp) in &[(0.2, 0.7), (0.45, 0.5), (0.9, 0.1)] {
            let a = rdm_entry_raw(&ev, x, xp, &ordered);
            let b = rdm_entry_raw(&ev, x, xp, &cube);
            // the cube rule sees interior particle-particle cusps and converges algebraically
            assert!((a - b).norm() < 1e-4 * a.norm(), "{a} {b}");
        }
    }

    #[test]
    fn diagonal_entries_are_real_and_positive() {
        let ev = evaluator(4, 5.0, 0.7);
        let v = rdm_entry_raw(&ev, 0.3, 0.3, &InnerSpec::default());
        assert_eq!(v.im, 0.0);
        assert!(v.re > 0.0);
    }

    #[test]
    fn hardcore_fermi_limit_is_free_fermion_kernel() {
        // ρ₁(x, x') = (1/NL) Σ_j exp(i k_j (x − x')) for κ = 1.
        let n = 4;
        let ev = hardcore(n, 1.0);
        let outer = build_grid(3, 4, 1.0, &[]).unwrap();
        let rdm = build_rdm(&ev, &outer, &InnerSpec::default()).unwrap();
        let k: Vec<f64> = [1.5, 0.5, -0.5, -1.5].iter().map(|q| 2.0 * PI * q).collect();
        let mut worst: f64 = 0.0;
        for i in 0..outer.len() {
            for j in 0..outer.len() {
                let d = outer.nodes[i] - outer.nodes[j];
                let expect: Complex64 =
                    k.iter().map(|kj| Complex64::from_polar(1.0, kj * d)).sum::<Complex64>() / n as f64;
                // conjugation convention of the kernel is irrelevant for a real kernel
                worst = worst.max(
                    (rdm.get(i, j) - expect)
                        .norm()
                        .min((rdm.get(i, j) - expect.conj()).norm()),
                );
            }
        }
        assert!(worst < 1e-8, "worst {worst}");
    }

    #[test]
    fn hermitian_and_unit_trace() {
        let ev = evaluator(3, 2.0, 0.5);
        let outer = build_grid(4, 4, 1.0, &[]).unwrap();
        let rdm = build_rdm(&ev, &outer, &InnerSpec::default()).unwrap();
        assert!(rdm.hermitian_deviation() < 1e-12);
        assert!((rdm.weighted_trace() - 1.0).abs() < 1e-12);
        assert!((0..rdm.dim()).all(|i| rdm.get(i, i).re >= 0.0));
        assert!(rdm.max_imag() > 1e-3, "anyonic kernel should be complex");
    }

    #[test]
    fn bose_kernel_is_real_symmetric() {
        let ev = evaluator(4, 10.0, 0.0);
        let outer = build_grid(2, 4, 1.0, &[]).unwrap();
        let rdm = build_rdm(&ev, &outer, &InnerSpec::default()).unwrap();
        assert!(rdm.max_imag() < 1e-10);
    }

    #[test]
    fn monte_carlo_matches_quadrature() {
        let ev = evaluator(4, 10.0, 0.0);
        let q = rdm_entry_raw(&ev, 0.25, 0.75, &InnerSpec::default());
        let (mc, err) = mc_rdm_entry(&ev, 0.25, 0.75, 200_000, 17).unwrap();
        assert!((q - mc).norm() < 3.0 * err, "{q} vs {mc} ± {err}");
    }

    #[test]
    fn monte_carlo_is_deterministic_and_exact_for_constants() {
        let ev = evaluator(4, 1.0, 0.25);
        assert_eq!(
            mc_rdm_entry(&ev, 0.1, 0.6, 2000, 5).unwrap(),
            mc_rdm_entry(&ev, 0.1, 0.6, 2000, 5).unwrap()
        );
        let free = evaluator(4, 0.0, 0.0);
        let (v, err) = mc_rdm_entry(&free, 0.1, 0.6, 2000, 5).unwrap();
        assert!((v - 1.0).norm() < 1e-12 && err < 1e-6);
        assert!(mc_rdm_entry(&free, 0.1, 0.6, 10, 5).is_err());
    }

    #[test]
    fn text_dump_round_trip() {
        let ev = evaluator(3, 2.0, 0.3);
        let outer = build_grid(2, 3, 1.0, &[]).unwrap();
        let rdm = build_rdm(&ev, &outer, &InnerSpec::default()).unwrap();
        let mut buf = Vec::new();
        rdm.write_text(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("3 1.0 2.0 0.3 6\n"));
        let back = RdmMatrix::read_text(buf.as_slice()).unwrap();
        assert_eq!(back.values, rdm.values);
        assert_eq!(back.grid.nodes, rdm.grid.nodes);
        assert_eq!(back.params.kappa, 0.3);
    }

    #[test]
    fn exchangeable_particle_slot_for_bosons() {
        let ev = evaluator(3, 4.0, 0.0);
        let outer = build_grid(2, 3, 1.0, &[]).unwrap();
        let spec = InnerSpec::default();
        let first = build_rdm_kept(&ev, &outer, &spec, 0).unwrap();
        for kept in 1..3 {
            let other = build_rdm_kept(&ev, &outer, &spec, kept).unwrap();
            let d = first
                .values
                .iter()
                .zip(&other.values)
                .fold(0.0f64, |m, (a, b)| m.max((a - b).norm()));
            assert!(d < 1e-10, "slot {kept}: {d}");
        }
    }

    #[test]
    fn last_particle_slot_gives_conjugate_for_anyons() {
        let ev = evaluator(3, 4.0, 0.6);
        let outer = build_grid(2, 3, 1.0, &[]).unwrap();
        let spec = InnerSpec::default();
        let first = build_rdm_kept(&ev, &outer, &spec, 0).unwrap();
        let last = build_rdm_kept(&ev, &outer, &spec, 2).unwrap();
        let d = first
            .values
            .iter()
            .zip(&last.values)
            .fold(0.0f64, |m, (a, b)| m.max((a - b.conj()).norm()));
        assert!(d < 1e-10, "{d}");
    }
}
