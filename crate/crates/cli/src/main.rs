//! `mixedmf` command-line front end.
//!
//! Subcommands: `cascade`, `ingest`, `estimate`, `spectrum`, `oracle`,
//! `verify`. Every run writes its effective `config.toml` plus a
//! `report.json` next to the requested tables; outputs are byte-identical
//! across reruns with the same flags and seed.
//!
//! Exit status: 0 on success (for `verify`, only when every asserted check
//! passes), 2 on usage or configuration errors, 1 on runtime failures.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mixedmf::config::{load_samples, Command as RunCommand, RunConfig};
use mixedmf::measure::{ahlfors_index, build_cascade, ingest_samples, CascadeSpec, VectorMeasure};
use mixedmf::oracle;
use mixedmf::output::{suite_summary, write_outputs, RunOutputs};
use mixedmf::partition::{default_window, qgrid_surface};
use mixedmf::spectrum::{canonical_spectrum, histogram_spectrum, SpectrumCurve, SpectrumMethod};
use mixedmf::verify::{run_suite, VerifyConfig};
use mixedmf::Error;

#[derive(Parser)]
#[command(name = "mixedmf", version, about = "Joint multifractal analysis on b-adic grids")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build a cascade and report gauge/measure regularity diagnostics.
    Cascade(CommonArgs),
    /// Ingest a plain-text sample file into an empirical measure.
    Ingest(CommonArgs),
    /// Fit the coarse dimension functions over a q-grid.
    Estimate(CommonArgs),
    /// Estimate the joint spectrum (canonical + histogram, oracle overlay).
    Spectrum(CommonArgs),
    /// Evaluate the exact cascade solver over a q-grid.
    Oracle(CommonArgs),
    /// Run the property-check suite and write the structured report.
    Verify(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Load a full run config (TOML) instead of assembling one from flags.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Grid subdivision base.
    #[arg(long, default_value_t = 2)]
    base: u32,

    /// Grid dimension d (boxes subdivide [0,1]^d).
    #[arg(long, default_value_t = 1)]
    dimension: u32,

    /// Maximum subdivision level.
    #[arg(long, default_value_t = 12)]
    levels: usize,

    /// Comma-separated weight vector, one flag per measure, gauge last.
    #[arg(long, value_name = "W1,W2,...")]
    weights: Vec<String>,

    /// Plain-text sample file: one point per line.
    #[arg(long)]
    samples: Option<PathBuf>,

    /// Per-coordinate grid minimum (repeat per coordinate; one value
    /// broadcasts).
    #[arg(long = "q-min", allow_negative_numbers = true)]
    q_min: Vec<f64>,

    /// Per-coordinate grid maximum.
    #[arg(long = "q-max", allow_negative_numbers = true)]
    q_max: Vec<f64>,

    /// Per-coordinate grid step.
    #[arg(long = "q-step", allow_negative_numbers = true)]
    q_step: Vec<f64>,

    /// Histogram bin width (defaults to 5% of the spectral range).
    #[arg(long)]
    delta: Option<f64>,

    /// Fit window as lo:hi (defaults to the top half of the levels).
    #[arg(long)]
    window: Option<String>,

    /// Output directory (defaults to ./out; with --config, the config's).
    #[arg(long)]
    out: Option<PathBuf>,

    /// Seed for randomized sub-checks and sample generation.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match &cli.command {
        Cmd::Cascade(a) => (RunCommand::Cascade, a),
        Cmd::Ingest(a) => (RunCommand::Ingest, a),
        Cmd::Estimate(a) => (RunCommand::Estimate, a),
        Cmd::Spectrum(a) => (RunCommand::Spectrum, a),
        Cmd::Oracle(a) => (RunCommand::Oracle, a),
        Cmd::Verify(a) => (RunCommand::Verify, a),
    };
    let cfg = match assemble_config(command, args) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("mixedmf: {e}");
            return ExitCode::from(2);
        }
    };
    match run(&cfg) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("mixedmf: {e}");
            ExitCode::from(1)
        }
    }
}

fn parse_weights(raw: &[String]) -> Result<Vec<Vec<f64>>, Error> {
    let mut out = Vec::with_capacity(raw.len());
    for (i, s) in raw.iter().enumerate() {
        let parsed: Result<Vec<f64>, _> = s.split(',').map(|x| x.trim().parse::<f64>()).collect();
        match parsed {
            Ok(v) => out.push(v),
            Err(e) => {
                return Err(Error::BadConfig(format!(
                    "weight vector {}: {}",
                    i + 1,
                    e
                )))
            }
        }
    }
    if out.len() > 1 {
        let len = out[0].len();
        if out.iter().any(|v| v.len() != len) {
            return Err(Error::BadConfig(
                "weight vectors have inconsistent lengths".into(),
            ));
        }
    }
    Ok(out)
}

fn parse_window(raw: &str) -> Result<(usize, usize), Error> {
    let parts: Vec<&str> = raw.split(':').collect();
    if parts.len() != 2 {
        return Err(Error::BadConfig(format!(
            "window '{raw}' must look like lo:hi"
        )));
    }
    let lo = parts[0]
        .parse()
        .map_err(|e| Error::BadConfig(format!("window lo: {e}")))?;
    let hi = parts[1]
        .parse()
        .map_err(|e| Error::BadConfig(format!("window hi: {e}")))?;
    Ok((lo, hi))
}

fn assemble_config(command: RunCommand, args: &CommonArgs) -> Result<RunConfig, Error> {
    if let Some(path) = &args.config {
        let mut cfg = RunConfig::load(path)?;
        cfg.command = command;
        if let Some(out) = &args.out {
            cfg.out = out.clone();
        }
        return Ok(cfg);
    }
    let cfg = RunConfig {
        command,
        base: args.base,
        dimension: args.dimension,
        levels: args.levels,
        weights: parse_weights(&args.weights)?,
        samples: args.samples.clone(),
        q_min: if args.q_min.is_empty() {
            vec![-3.0]
        } else {
            args.q_min.clone()
        },
        q_max: if args.q_max.is_empty() {
            vec![3.0]
        } else {
            args.q_max.clone()
        },
        q_step: if args.q_step.is_empty() {
            vec![0.25]
        } else {
            args.q_step.clone()
        },
        window: args.window.as_deref().map(parse_window).transpose()?,
        delta: args.delta,
        out: args.out.clone().unwrap_or_else(|| PathBuf::from("out")),
        seed: args.seed,
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Builds the vector measure a config describes: a cascade from weights, or
/// a self-gauged empirical tree from samples.
fn measure_from_config(cfg: &RunConfig) -> Result<(VectorMeasure, Option<CascadeSpec>), Error> {
    if !cfg.weights.is_empty() {
        if cfg.weights.len() < 2 {
            return Err(Error::BadConfig(
                "cascades need at least one analyzed weight vector plus the gauge".into(),
            ));
        }
        let spec = CascadeSpec::new(cfg.base, cfg.dimension, cfg.levels, cfg.weights.clone())?;
        let xi = build_cascade(&spec)?;
        return Ok((xi, Some(spec)));
    }
    let path = cfg.samples.as_ref().ok_or_else(|| {
        Error::BadConfig("need weight vectors (gauge last) or a samples file".into())
    })?;
    let points = load_samples(path)?;
    let tree = ingest_samples(&points, cfg.base, cfg.dimension, cfg.levels)?;
    let xi = VectorMeasure::new(vec![tree.clone()], tree)?;
    Ok((xi, None))
}

fn fit_window(cfg: &RunConfig) -> (usize, usize) {
    cfg.window.unwrap_or_else(|| default_window(cfg.levels))
}

/// Runs a validated config; `Ok(true)` means success with all checks green.
fn run(cfg: &RunConfig) -> Result<bool, Error> {
    let mut outputs = RunOutputs::default();
    let mut ok = true;
    match cfg.command {
        RunCommand::Cascade | RunCommand::Ingest => {
            let (xi, _) = measure_from_config(cfg)?;
            let window = (1, xi.max_level());
            for j in 0..xi.measure_count() {
                outputs.diagnostics.push((
                    format!("mu_{}", j + 1),
                    ahlfors_index(xi.analyzed(j), window)?,
                ));
            }
            outputs
                .diagnostics
                .push(("nu".into(), ahlfors_index(xi.gauge(), window)?));
        }
        RunCommand::Estimate => {
            let (xi, _) = measure_from_config(cfg)?;
            let grid = cfg.qgrid(xi.measure_count())?;
            let rows = qgrid_surface(&xi, &grid.points(), fit_window(cfg))?;
            outputs.dimensions = Some(rows);
        }
        RunCommand::Oracle => {
            let spec = CascadeSpec::new(cfg.base, cfg.dimension, cfg.levels, cfg.weights.clone())?;
            let grid = cfg.qgrid(spec.measure_count())?;
            let mut rows = Vec::new();
            let mut curve = Vec::new();
            for q in grid.points() {
                let r = oracle::oracle_result(&spec, &q)?;
                rows.push((q, r.exponent));
                curve.push((r.gamma, r.value));
            }
            outputs.oracle_rows = Some(rows);
            outputs.spectra.push(SpectrumCurve {
                method: SpectrumMethod::Oracle,
                samples: curve,
                level: None,
                delta: None,
            });
        }
        RunCommand::Spectrum => {
            let (xi, spec) = measure_from_config(cfg)?;
            let k = xi.measure_count();
            let grid = cfg.qgrid(k)?;
            let level = xi.max_level();
            let mut canonical = Vec::new();
            for q in grid.points() {
                let (gamma, value) = canonical_spectrum(&xi, &q, level)?;
                canonical.push((gamma, value));
            }
            outputs.spectra.push(SpectrumCurve {
                method: SpectrumMethod::Canonical,
                samples: canonical,
                level: Some(level),
                delta: None,
            });
            let delta = match cfg.delta {
                Some(d) => d,
                None => spec
                    .as_ref()
                    .and_then(|s| oracle::spectral_bounds(s).ok())
                    .map(|(lo, hi)| {
                        let span = hi
                            .iter()
                            .zip(&lo)
                            .map(|(h, l)| h - l)
                            .fold(f64::NEG_INFINITY, f64::max);
                        if span > 0.0 {
                            0.05 * span
                        } else {
                            0.05
                        }
                    })
                    .unwrap_or(0.05),
            };
            outputs.spectra.push(histogram_spectrum(&xi, level, delta)?);
            if let Some(spec) = &spec {
                let mut curve = Vec::new();
                for q in grid.points() {
                    let (gamma, value) = oracle::oracle_spectrum(spec, &q)?;
                    curve.push((gamma, value));
                }
                outputs.spectra.push(SpectrumCurve {
                    method: SpectrumMethod::Oracle,
                    samples: curve,
                    level: None,
                    delta: None,
                });
            }
            if k > 1 {
                let w = "spectrum plot skipped: only one-coordinate spectra are plotted";
                eprintln!("mixedmf: {w}");
                outputs.warnings.push(w.into());
            }
        }
        RunCommand::Verify => {
            let mut vcfg = VerifyConfig::default();
            vcfg.seed = cfg.seed;
            if !cfg.weights.is_empty() {
                let spec =
                    CascadeSpec::new(cfg.base, cfg.dimension, cfg.levels, cfg.weights.clone())?;
                vcfg.specs = vec![mixedmf::verify::NamedSpec {
                    name: "custom".into(),
                    spec,
                }];
            }
            if cfg.q_min.len() == 1 && cfg.q_max.len() == 1 && cfg.q_step.len() == 1 {
                vcfg.q_min = cfg.q_min[0];
                vcfg.q_max = cfg.q_max[0];
                vcfg.q_step = cfg.q_step[0];
            }
            let report = run_suite(&vcfg)?;
            print!("{}", suite_summary(&report));
            ok = report.passed;
            outputs.suite = Some(report);
        }
    }
    let written = write_outputs(&outputs, cfg)?;
    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(ok)
}
