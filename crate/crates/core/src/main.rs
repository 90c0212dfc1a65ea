//! `anyon-ee`: single runs, sweeps, density-matrix dumps and the validation
//! gate for anyons on a ring.

use std::collections::HashMap;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use anyon_core::bethe::{solve_at_effective_coupling, solve_ground_state};
use anyon_core::pipeline::{
    run_point, solve_for_run, sweep, GridSpec, Method, RunOptions, RunRecord, SweepAxis, SweepRow, SCHEMA_VERSION,
    TOP_OCCUPATIONS,
};
use anyon_core::rdm::{fmt_f64, mc_rdm_entry, rdm_entry_raw};
use anyon_core::validation::{validate, ValidationSpec};
use anyon_core::wavefn::WavefnEvaluator;
use anyon_core::{Error, ModelParams};

#[derive(Parser, Debug)]
#[command(
    name = "anyon-ee",
    version,
    about = "Entanglement entropy of 1D anyons on a ring from the Bethe ansatz"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve the Bethe equations and print the quasi-momenta.
    Solve(Common),
    /// One point: run record, spectrum and optionally the density matrix.
    Run {
        #[command(flatten)]
        common: Common,
        /// Also write the density matrix on the outer grid.
        #[arg(long)]
        dump_rdm: bool,
    },
    /// Many points along one axis, one CSV row each.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        axis: Axis,
        /// Comma-separated values; `inf` on the c axis means hard-core.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        values: Vec<String>,
    },
    /// Write the density matrix in the text dump format.
    Rdm(Common),
    /// Oracle equivalence and invariant suites; non-zero exit on any failure.
    Validate(Common),
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Axis {
    C,
    Kappa,
}

/// Flags shared by every subcommand. Unset flags fall back to the config
/// file, then to the built-in defaults.
#[derive(Args, Debug, Default)]
struct Common {
    /// Flat `key = value` file; keys are the long flag names.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long = "N")]
    n: Option<usize>,
    #[arg(long = "L")]
    length: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    hardcore: bool,
    /// circulant (default) or nystrom.
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    outer_panels: Option<usize>,
    #[arg(long)]
    outer_order: Option<usize>,
    #[arg(long)]
    profile_panels: Option<usize>,
    #[arg(long)]
    profile_order: Option<usize>,
    /// Explicit Fourier modes per side on the circulant route.
    #[arg(long)]
    modes: Option<usize>,
    #[arg(long)]
    inner_panels: Option<usize>,
    #[arg(long)]
    inner_order: Option<usize>,
    /// Monte Carlo samples for a cross-check of a few density-matrix entries.
    #[arg(long)]
    mc_samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    /// Cap the effective coupling and use the permutation sum.
    #[arg(long)]
    c_eff_cap: Option<f64>,
    /// Output directory; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Everything a subcommand needs, after merging flags and config file.
#[derive(Debug)]
struct Settings {
    params: ModelParams,
    opts: RunOptions,
    mc_samples: usize,
    seed: u64,
    workers: usize,
    out: Option<PathBuf>,
}

fn parse_config(path: &Path) -> Result<HashMap<String, String>, Error> {
    let text = fs::read_to_string(path)?;
    let mut map = HashMap::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("{}:{}: expected key = value", path.display(), no + 1)))?;
        let key = k.trim().trim_start_matches("--").replace('_', "-");
        map.insert(key, v.trim().to_string());
    }
    Ok(map)
}

struct Layer {
    file: HashMap<String, String>,
}

impl Layer {
    fn get<T: FromStr>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>, Error> {
        let from_file = self.file.remove(key);
        if flag.is_some() {
            return Ok(flag);
        }
        from_file
            .map(|v| {
                v.parse::<T>()
                    .map_err(|_| Error::Parse(format!("config key {key}: bad value '{v}'")))
            })
            .transpose()
    }
}

impl Common {
    fn settings(self) -> Result<Settings, Error> {
        let file = match &self.config {
            Some(path) => parse_config(path)?,
            None => HashMap::new(),
        };
        let mut l = Layer { file };
        let mut grid = GridSpec::default();
        let n = l.get("N", self.n)?.unwrap_or(4);
        let length = l.get("L", self.length)?.unwrap_or(1.0);
        let c = l.get("c", self.c)?;
        let kappa = l.get("kappa", self.kappa)?.unwrap_or(0.0);
        let hardcore =
            self.hardcore || l.get::<bool>("hardcore", None)?.unwrap_or(false) || c.is_some_and(f64::is_infinite);
        if let Some(m) = l.get::<String>("method", self.method)? {
            grid.method = m.parse::<Method>()?;
        }
        grid.outer_panels = l.get("outer-panels", self.outer_panels)?.unwrap_or(grid.outer_panels);
        grid.outer_order = l.get("outer-order", self.outer_order)?.unwrap_or(grid.outer_order);
        grid.profile.panels = l
            .get("profile-panels", self.profile_panels)?
            .unwrap_or(grid.profile.panels);
        grid.profile.order = l
            .get("profile-order", self.profile_order)?
            .unwrap_or(grid.profile.order);
        grid.profile.modes = l.get("modes", self.modes)?.unwrap_or(grid.profile.modes);
        grid.inner.panels = l.get("inner-panels", self.inner_panels)?.unwrap_or(grid.inner.panels);
        grid.inner.order = l.get("inner-order", self.inner_order)?.unwrap_or(grid.inner.order);
        let mc_samples = l.get("mc-samples", self.mc_samples)?.unwrap_or(0);
        let seed = l.get("seed", self.seed)?.unwrap_or(0);
        let workers = l.get("workers", self.workers)?.unwrap_or(1);
        let c_eff_cap = l.get("c-eff-cap", self.c_eff_cap)?;
        let out = l.get::<PathBuf>("out", self.out)?;
        if let Some(key) = l.file.keys().next() {
            return Err(Error::Parse(format!("unknown config key '{key}'")));
        }
        if grid.outer_panels < 1 || grid.outer_order < 1 {
            return Err(Error::InvalidArgument(
                "outer grid needs panels >= 1 and order >= 1".into(),
            ));
        }
        grid.inner.validate()?;
        grid.profile.validate()?;

        let params = if hardcore {
            ModelParams::hardcore(n, length, kappa)?
        } else {
            ModelParams::new(n, length, c.unwrap_or(0.0), kappa)?
        };
        Ok(Settings {
            params,
            opts: RunOptions { grid, c_eff_cap },
            mc_samples,
            seed,
            workers,
            out,
        })
    }
}

/// Opens `name` inside the output directory, or stdout.
fn sink(out: &Option<PathBuf>, name: &str) -> Result<Box<dyn Write>, Error> {
    match out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            Ok(Box::new(BufWriter::new(File::create(dir.join(name))?)))
        }
        None => Ok(Box::new(BufWriter::new(io::stdout()))),
    }
}

fn timestamp() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

#[derive(Serialize)]
struct McEntry {
    x: f64,
    xp: f64,
    quadrature: [f64; 2],
    monte_carlo: [f64; 2],
    standard_error: f64,
}

#[derive(Serialize)]
struct RunDocument<'a> {
    #[serde(flatten)]
    record: &'a RunRecord,
    timestamp_unix: u64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    monte_carlo: Vec<McEntry>,
}

#[derive(Serialize)]
struct FailureDocument<'a> {
    schema_version: u32,
    params: &'a ModelParams,
    stage: String,
    error: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    quasi_momenta: Option<Vec<f64>>,
    timestamp_unix: u64,
}

/// Unnormalized entries at a few separations, by quadrature and by Monte
/// Carlo, both divided by the same quadrature trace.
fn mc_cross_check(s: &Settings, trace_raw: f64) -> Result<Vec<McEntry>, Error> {
    let state = solve_for_run(&s.params, &s.opts)?;
    let ev = WavefnEvaluator::new(&state)?;
    let l = s.params.length;
    let pairs = [(0.0, 0.0), (0.1 * l, 0.35 * l), (0.2 * l, 0.7 * l)];
    pairs
        .iter()
        .enumerate()
        .map(|(i, &(x, xp))| {
            let q = rdm_entry_raw(&ev, x, xp, &s.opts.grid.inner) / trace_raw;
            let (m, err) = mc_rdm_entry(&ev, x, xp, s.mc_samples, s.seed.wrapping_add(i as u64))?;
            let m = m / trace_raw;
            Ok(McEntry {
                x,
                xp,
                quadrature: [q.re, q.im],
                monte_carlo: [m.re, m.im],
                standard_error: err / trace_raw,
            })
        })
        .collect()
}

fn cmd_solve(s: Settings) -> Result<(), Error> {
    let c_eff = s.params.effective_coupling()?.value();
    let state = match s.opts.c_eff_cap {
        Some(cap) if c_eff > cap => solve_at_effective_coupling(&s.params, cap)?,
        _ => solve_ground_state(&s.params)?,
    };
    let mut w = sink(&s.out, "solve.json")?;
    serde_json::to_writer_pretty(&mut w, &state)?;
    writeln!(w)?;
    Ok(())
}

fn cmd_run(s: Settings, dump_rdm: bool) -> Result<(), Error> {
    let output = match run_point(&s.params, &s.opts) {
        Ok(o) => o,
        Err(e) => {
            // keep whatever was computed before the failing stage
            let doc = FailureDocument {
                schema_version: SCHEMA_VERSION,
                params: &s.params,
                stage: e.stage.to_string(),
                error: e.source.to_string(),
                quasi_momenta: e.state.as_ref().map(|st| st.quasi_momenta.clone()),
                timestamp_unix: timestamp(),
            };
            if s.out.is_some() {
                let mut w = sink(&s.out, "run.json")?;
                serde_json::to_writer_pretty(&mut w, &doc)?;
                writeln!(w)?;
            }
            return Err(Error::Numeric(e.to_string()));
        }
    };
    output.record.validate().map_err(Error::Numeric)?;
    let monte_carlo = if s.mc_samples > 0 {
        mc_cross_check(&s, output.rdm.trace_raw)?
    } else {
        Vec::new()
    };
    let doc = RunDocument {
        record: &output.record,
        timestamp_unix: timestamp(),
        monte_carlo,
    };
    if s.out.is_some() {
        let mut w = sink(&s.out, "run.json")?;
        serde_json::to_writer_pretty(&mut w, &doc)?;
        writeln!(w)?;
        output.spectrum.write_csv(sink(&s.out, "spectrum.csv")?)?;
        if dump_rdm {
            output.rdm.write_text(sink(&s.out, "rdm.txt")?)?;
        }
        println!(
            "S = {}  lambda1 = {}  method = {}",
            fmt_f64(output.record.entropy),
            fmt_f64(output.record.occupations[0]),
            output.record.method
        );
    } else {
        let mut w = io::stdout().lock();
        serde_json::to_writer_pretty(&mut w, &doc)?;
        writeln!(w)?;
    }
    Ok(())
}

fn sweep_csv<W: Write>(rows: &[SweepRow], mut w: W) -> Result<(), Error> {
    let lambdas: Vec<String> = (1..=TOP_OCCUPATIONS).map(|i| format!("lambda{i}")).collect();
    writeln!(w, "c,kappa,S,{},residual,toeplitz_dev,error", lambdas.join(","))?;
    for row in rows {
        let c = if row.params.hardcore {
            f64::INFINITY
        } else {
            row.params.c
        };
        write!(w, "{},{},", fmt_f64(c), fmt_f64(row.params.kappa))?;
        match &row.result {
            Ok(r) => {
                let occ: Vec<String> = r.occupations.iter().map(|v| fmt_f64(*v)).collect();
                writeln!(
                    w,
                    "{},{},{},{},",
                    fmt_f64(r.entropy),
                    occ.join(","),
                    fmt_f64(r.solver.residual_norm),
                    fmt_f64(r.toeplitz_deviation)
                )?;
            }
            Err(e) => {
                let blank = ",".repeat(TOP_OCCUPATIONS + 3);
                writeln!(w, "{blank}\"{}\"", e.replace('"', "'"))?;
            }
        }
    }
    Ok(())
}

fn cmd_sweep(s: Settings, axis: Axis, values: Vec<String>) -> Result<bool, Error> {
    if values.is_empty() {
        return Err(Error::InvalidArgument("sweep needs --values".into()));
    }
    let values: Vec<f64> = values
        .iter()
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad sweep value '{v}'")))
        })
        .collect::<Result<_, _>>()?;
    let axis = match axis {
        Axis::C => SweepAxis::C,
        Axis::Kappa => SweepAxis::Kappa,
    };
    let rows = sweep(axis, &values, &s.params, &s.opts, s.workers)?;
    let mut w = sink(&s.out, "sweep.csv")?;
    sweep_csv(&rows, &mut w)?;
    w.flush()?;
    for row in &rows {
        if let Ok(r) = &row.result {
            r.validate().map_err(Error::Numeric)?;
        }
    }
    Ok(rows.iter().all(|r| r.result.is_ok()))
}

fn cmd_rdm(s: Settings) -> Result<(), Error> {
    let output = run_point(&s.params, &s.opts).map_err(|e| Error::Numeric(e.to_string()))?;
    let mut w = sink(&s.out, "rdm.txt")?;
    output.rdm.write_text(&mut w)?;
    w.flush()?;
    Ok(())
}

fn cmd_validate(s: Settings) -> Result<bool, Error> {
    let spec = ValidationSpec {
        grid: s.opts.grid,
        seed: s.seed,
        ..ValidationSpec::default()
    };
    let report = validate(&spec);
    let mut w = sink(&s.out, "validation.csv")?;
    report.write_csv(&mut w)?;
    w.flush()?;
    for f in report.failures() {
        eprintln!(
            "FAIL {} {}: {} (tolerance {})",
            f.suite,
            f.name,
            fmt_f64(f.value),
            fmt_f64(f.tolerance)
        );
    }
    Ok(report.all_passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(c) => c.settings().and_then(cmd_solve).map(|_| true),
        Command::Run { common, dump_rdm } => common.settings().and_then(|s| cmd_run(s, dump_rdm)).map(|_| true),
        Command::Sweep { common, axis, values } => common.settings().and_then(|s| cmd_sweep(s, axis, values)),
        Command::Rdm(c) => c.settings().and_then(cmd_rdm).map(|_| true),
        Command::Validate(c) => c.settings().and_then(cmd_validate),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
