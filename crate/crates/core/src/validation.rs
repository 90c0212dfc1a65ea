//! Release gate: oracle equivalence and invariants of every stage, reported
//! as a pass/fail table.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bethe::{solve_at_effective_coupling, solve_ground_state};
use crate::error::Result;
use crate::oracles::{entropy_n2, N2OracleSpec};
use crate::params::ModelParams;
use crate::pipeline::{run_point, GridSpec, Method, RunOptions, RunOutput};
use crate::rdm::fmt_f64;
use crate::wavefn::{eval_psi_hardcore, exchange_angle, WavefnEvaluator};

pub const ORACLE_TOLERANCE: f64 = 1e-4;
pub const HARDCORE_TOLERANCE: f64 = 1e-4;
pub const EXCHANGE_TOLERANCE: f64 = 1e-10;
pub const TRACE_TOLERANCE: f64 = 1e-10;
pub const SUM_TOLERANCE: f64 = 1e-8;
pub const DOUBLING_TOLERANCE: f64 = 1e-3;

/// The `(c, κ)` grid of the two-particle comparison.
pub const ORACLE_COUPLINGS: [f64; 4] = [0.1, 1.0, 10.0, 100.0];
pub const ORACLE_KAPPAS: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];
/// The `(c, κ)` grid of the wavefunction invariants.
pub const INVARIANT_COUPLINGS: [f64; 3] = [1.0, 10.0, 100.0];
pub const INVARIANT_KAPPAS: [f64; 3] = [0.0, 0.5, 0.8];

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Check {
    pub suite: String,
    pub name: String,
    /// Measured deviation.
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    fn push(&mut self, suite: &str, name: String, value: f64, tolerance: f64) {
        let passed = value.is_finite() && value < tolerance;
        self.checks.push(Check {
            suite: suite.to_string(),
            name,
            value,
            tolerance,
            passed,
        });
    }

    fn fail(&mut self, suite: &str, name: String) {
        self.push(suite, name, f64::INFINITY, 0.0);
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    /// `suite,check,value,tolerance,status`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "suite,check,value,tolerance,status")?;
        for c in &self.checks {
            writeln!(
                out,
                "{},{},{},{},{}",
                c.suite,
                c.name,
                fmt_f64(c.value),
                fmt_f64(c.tolerance),
                if c.passed { "PASS" } else { "FAIL" }
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationSpec {
    pub grid: GridSpec,
    pub oracle: N2OracleSpec,
    /// Random tuples per `(c, κ)` in the wavefunction checks.
    pub tuples: usize,
    pub seed: u64,
}

impl Default for ValidationSpec {
    fn default() -> Self {
        Self {
            grid: GridSpec::default(),
            oracle: N2OracleSpec::default(),
            tuples: 100,
            seed: 7,
        }
    }
}

/// Largest `|ψ(x) − e^{−iθ}ψ(x with x_i ↔ x_j)| / |ψ(x)|` over random tuples
/// and random pairs. `psi` is any wavefunction, so a deliberately broken one
/// can be fed in.
pub fn max_exchange_residual(
    psi: &dyn Fn(&[f64]) -> Complex64,
    n: usize,
    length: f64,
    kappa: f64,
    tuples: usize,
    rng: &mut ChaCha8Rng,
) -> f64 {
    let mut worst: f64 = 0.0;
    let mut done = 0;
    while done < tuples {
        let x: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * length).collect();
        let i = rng.random_range(0..n - 1);
        let j = rng.random_range(i + 1..n);
        let v = psi(&x);
        if v.norm() < 1e-8 {
            continue;
        }
        let mut y = x.clone();
        y.swap(i, j);
        let theta = exchange_angle(&x, i, j, kappa);
        let r = (v - Complex64::from_polar(1.0, -theta) * psi(&y)).norm() / v.norm();
        worst = worst.max(r);
        done += 1;
    }
    worst
}

/// Largest `|ψ(0, x₂, …) − e^{iκπ(N−1)} ψ(L, x₂, …)| / |ψ(0, x₂, …)|`.
pub fn max_twist_residual(
    psi: &dyn Fn(&[f64]) -> Complex64,
    n: usize,
    length: f64,
    kappa: f64,
    tuples: usize,
    rng: &mut ChaCha8Rng,
) -> f64 {
    let twist = Complex64::from_polar(1.0, kappa * PI * (n as f64 - 1.0));
    let mut worst: f64 = 0.0;
    let mut done = 0;
    while done < tuples {
        let mut x: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * length).collect();
        x[0] = 0.0;
        let at0 = psi(&x);
        if at0.norm() < 1e-8 {
            continue;
        }
        x[0] = length;
        worst = worst.max((at0 - twist * psi(&x)).norm() / at0.norm());
        done += 1;
    }
    worst
}

/// Pointwise relative mismatch between the hard-core determinant and the
/// permutation sum at `c' = 1e6`, after fixing the overall constant. The
/// finite-coupling correction relative to `ψ` grows like `1/(c'·gap)` as two
/// particles approach, so tuples with a gap below `L/20` are skipped.
pub fn hardcore_cross_check(params: &ModelParams, tuples: usize, rng: &mut ChaCha8Rng) -> Result<f64> {
    let stiff = WavefnEvaluator::new(&solve_at_effective_coupling(params, 1e6)?)?;
    let mut pts = Vec::with_capacity(tuples);
    while pts.len() < tuples {
        let x: Vec<f64> = (0..params.n).map(|_| rng.random::<f64>() * params.length).collect();
        let mut s = x.clone();
        s.sort_by(f64::total_cmp);
        let gap = s
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(params.length + s[0] - s[s.len() - 1], f64::min);
        if gap > 0.05 * params.length {
            pts.push(x);
        }
    }
    let a: Vec<Complex64> = pts
        .iter()
        .map(|x| eval_psi_hardcore(params, x))
        .collect::<Result<_>>()?;
    let b: Vec<Complex64> = pts.iter().map(|x| stiff.eval_psi(x)).collect();
    let num: Complex64 = a.iter().zip(&b).map(|(a, b)| b.conj() * a).sum();
    let den: f64 = b.iter().map(|b| b.norm_sqr()).sum();
    let ratio = num / den;
    Ok(a.iter()
        .zip(&b)
        .fold(0.0f64, |m, (a, b)| m.max((a - ratio * b).norm() / a.norm())))
}

fn label(p: &ModelParams) -> String {
    if p.hardcore {
        format!("N={} hardcore kappa={}", p.n, p.kappa)
    } else {
        format!("N={} c={} kappa={}", p.n, p.c, p.kappa)
    }
}

/// Unit trace, Hermiticity and `Σλ = 1` of one run.
fn rdm_checks(report: &mut ValidationReport, out: &RunOutput) {
    let name = format!("{} method={}", label(&out.record.params), out.record.method);
    report.push(
        "rdm",
        format!("trace {name}"),
        (out.rdm.weighted_trace() - 1.0).abs(),
        TRACE_TOLERANCE,
    );
    report.push(
        "rdm",
        format!("hermitian {name}"),
        out.rdm.hermitian_deviation(),
        TRACE_TOLERANCE,
    );
    let s = &out.spectrum;
    report.push(
        "spectrum",
        format!("sum {name}"),
        (s.sum() + s.tail_mass - 1.0).abs(),
        SUM_TOLERANCE,
    );
}

/// Runs every suite. Errors inside a suite become failed checks.
pub fn validate(spec: &ValidationSpec) -> ValidationReport {
    let mut report = ValidationReport::default();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let opts = RunOptions {
        grid: spec.grid,
        c_eff_cap: None,
    };

    // generic pipeline at N = 2 against the Fourier oracle
    for &c in &ORACLE_COUPLINGS {
        for &kappa in &ORACLE_KAPPAS {
            let name = format!("N=2 c={c} kappa={kappa}");
            let p = ModelParams::new(2, 1.0, c, kappa);
            let pipeline = p.and_then(|p| run_point(&p, &opts).map_err(|e| e.source));
            let oracle = entropy_n2(c, kappa, 1.0, &spec.oracle);
            match (pipeline, oracle) {
                (Ok(a), Ok(b)) => report.push("oracle", name, (a.record.entropy - b.entropy).abs(), ORACLE_TOLERANCE),
                _ => report.fail("oracle", name),
            }
        }
    }
    for kappa in [0.0, 0.5] {
        let name = format!("N=2 hardcore vs c'=1e6 kappa={kappa}");
        match ModelParams::hardcore(2, 1.0, kappa).and_then(|p| hardcore_cross_check(&p, spec.tuples, &mut rng)) {
            Ok(v) => report.push("oracle", name, v, HARDCORE_TOLERANCE),
            Err(_) => report.fail("oracle", name),
        }
    }

    // wavefunction invariants at N = 4
    for &c in &INVARIANT_COUPLINGS {
        for &kappa in &INVARIANT_KAPPAS {
            let ev = ModelParams::new(4, 1.0, c, kappa)
                .and_then(|p| solve_ground_state(&p))
                .and_then(|s| WavefnEvaluator::new(&s));
            let ev = match ev {
                Ok(ev) => ev,
                Err(_) => {
                    report.fail("wavefn", format!("solve N=4 c={c} kappa={kappa}"));
                    continue;
                }
            };
            let psi = |x: &[f64]| ev.eval_psi(x);
            let ex = max_exchange_residual(&psi, 4, 1.0, kappa, spec.tuples, &mut rng);
            report.push(
                "wavefn",
                format!("exchange N=4 c={c} kappa={kappa}"),
                ex,
                EXCHANGE_TOLERANCE,
            );
            let tw = max_twist_residual(&psi, 4, 1.0, kappa, spec.tuples, &mut rng);
            report.push(
                "wavefn",
                format!("twist N=4 c={c} kappa={kappa}"),
                tw,
                EXCHANGE_TOLERANCE,
            );
        }
    }

    // density matrix, spectrum and grid doubling at N = 4
    let points = [
        ModelParams::new(4, 1.0, 10.0, 0.0),
        ModelParams::new(4, 1.0, 10.0, 0.5),
        ModelParams::hardcore(4, 1.0, 0.0),
    ];
    for p in points.into_iter().flatten() {
        let base = match run_point(&p, &opts) {
            Ok(o) => o,
            Err(_) => {
                report.fail("pipeline", format!("run {}", label(&p)));
                continue;
            }
        };
        rdm_checks(&mut report, &base);
        for (which, grid) in [
            ("outer", spec.grid.refined_outer()),
            ("inner", spec.grid.refined_inner()),
        ] {
            let name = format!("doubling {which} {}", label(&p));
            match run_point(&p, &RunOptions { grid, c_eff_cap: None }) {
                Ok(o) => report.push(
                    "pipeline",
                    name,
                    (o.record.entropy - base.record.entropy).abs(),
                    DOUBLING_TOLERANCE,
                ),
                Err(_) => report.fail("pipeline", name),
            }
        }
    }
    // the dense route on a small grid
    let dense = GridSpec {
        method: Method::Nystrom,
        outer_panels: 4,
        ..spec.grid
    };
    if let Ok(p) = ModelParams::new(4, 1.0, 1.0, 0.5) {
        match run_point(
            &p,
            &RunOptions {
                grid: dense,
                c_eff_cap: None,
            },
        ) {
            Ok(o) => rdm_checks(&mut report, &o),
            Err(_) => report.fail("pipeline", format!("run {} method=nystrom", label(&p))),
        }
    }
    report
}
