mod commands;
mod config;

use clap::{Args, Parser, Subcommand};
use config::{parse_assignment, CliError, CliResult, Config};
use std::path::{Path, PathBuf};
use toml::Value;

#[derive(Parser, Debug)]
#[command(name = "kkbubble", version, about = "Scalar fields on the Witten bubble of nothing and the Hawking wormhole")]
struct Cli {
    /// Configuration file with flat `section.key` entries.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override a configuration entry, e.g. `--set spectrum.count=8`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output file (stdout when absent). Written once at the end of the run.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
    /// Write the effective configuration to this file.
    #[arg(long, global = true)]
    dump_config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Eigenvalues of a radial operator with convergence diagnostics.
    Spectrum(SpectrumArgs),
    /// Kernel table of the continuous transform and a Parseval check.
    Transform(TransformArgs),
    /// Evolve Gaussian Cauchy data and record the energy.
    Evolve(EvolveArgs),
    /// In/out amplitudes of random tower data and isometry residuals.
    Scatter(ScatterArgs),
    /// Integrate a causal geodesic.
    Geodesic(GeodesicArgs),
    /// Ricci tensor, stress tensor and NEC witnesses of the wormhole.
    Curvature(CurvatureArgs),
    /// Run an invariant suite and print a pass/fail matrix.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
struct SpectrumArgs {
    #[arg(long)]
    spacetime: Option<String>,
    #[arg(long)]
    mass: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    n: Option<i64>,
    #[arg(long)]
    count: Option<i64>,
    #[arg(long)]
    points: Option<i64>,
}

#[derive(Args, Debug)]
struct TransformArgs {
    #[arg(long)]
    x_max: Option<f64>,
    #[arg(long)]
    nx: Option<i64>,
    #[arg(long)]
    lambda_max: Option<f64>,
    #[arg(long)]
    nlambda: Option<i64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    stride: Option<i64>,
}

#[derive(Args, Debug)]
struct EvolveArgs {
    #[arg(long)]
    spacetime: Option<String>,
    #[arg(long)]
    mass: Option<f64>,
    /// Comma-separated circle momenta.
    #[arg(long, allow_hyphen_values = true)]
    n: Option<String>,
    #[arg(long)]
    modes: Option<i64>,
    #[arg(long)]
    points: Option<i64>,
    #[arg(long)]
    l: Option<i64>,
    #[arg(long, allow_negative_numbers = true)]
    m: Option<i64>,
    #[arg(long)]
    width: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    center: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    t0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    t1: Option<f64>,
    #[arg(long)]
    steps: Option<i64>,
    /// Also write snapshot CSV to this path.
    #[arg(long)]
    snapshots: Option<String>,
}

#[derive(Args, Debug)]
struct ScatterArgs {
    #[arg(long)]
    spacetime: Option<String>,
    #[arg(long)]
    mass: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    n: Option<String>,
    #[arg(long)]
    modes: Option<i64>,
    #[arg(long)]
    l_max: Option<i64>,
    #[arg(long)]
    seed: Option<i64>,
    /// Also write the in-state coefficient file to this path.
    #[arg(long)]
    coefficients: Option<String>,
}

#[derive(Args, Debug)]
struct GeodesicArgs {
    /// null-through-bubble, through-origin, null-circle or custom.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    spacetime: Option<String>,
    #[arg(long)]
    chart: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    coords: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    velocity: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    span: Option<String>,
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args, Debug)]
struct CurvatureArgs {
    #[arg(long)]
    spacetime: Option<String>,
    #[arg(long = "T", allow_negative_numbers = true)]
    t: Option<f64>,
    #[arg(long = "X", allow_hyphen_values = true)]
    x: Option<String>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// desitter, spectral, geodesics, curvature, fields or all.
    #[arg(long)]
    suite: Option<String>,
    #[arg(long)]
    seed: Option<i64>,
}

fn put<T: Into<Value>>(cfg: &mut Config, key: &str, v: &Option<T>)
where
    T: Clone,
{
    if let Some(v) = v {
        cfg.set(key, v.clone().into());
    }
}

fn apply_flags(cmd: &Command, cfg: &mut Config) -> &'static str {
    match cmd {
        Command::Spectrum(a) => {
            put(cfg, "spectrum.spacetime", &a.spacetime);
            put(cfg, "spectrum.mass", &a.mass);
            put(cfg, "spectrum.n", &a.n);
            put(cfg, "spectrum.count", &a.count);
            put(cfg, "spectrum.points", &a.points);
            "spectrum"
        }
        Command::Transform(a) => {
            put(cfg, "transform.x_max", &a.x_max);
            put(cfg, "transform.nx", &a.nx);
            put(cfg, "transform.lambda_max", &a.lambda_max);
            put(cfg, "transform.nlambda", &a.nlambda);
            put(cfg, "transform.delta", &a.delta);
            put(cfg, "transform.stride", &a.stride);
            "transform"
        }
        Command::Evolve(a) => {
            put(cfg, "evolve.spacetime", &a.spacetime);
            put(cfg, "evolve.mass", &a.mass);
            put(cfg, "evolve.n", &a.n);
            put(cfg, "evolve.modes", &a.modes);
            put(cfg, "evolve.points", &a.points);
            put(cfg, "evolve.l", &a.l);
            put(cfg, "evolve.m", &a.m);
            put(cfg, "evolve.width", &a.width);
            put(cfg, "evolve.center", &a.center);
            put(cfg, "evolve.t0", &a.t0);
            put(cfg, "evolve.t1", &a.t1);
            put(cfg, "evolve.steps", &a.steps);
            put(cfg, "evolve.snapshots", &a.snapshots);
            "evolve"
        }
        Command::Scatter(a) => {
            put(cfg, "scatter.spacetime", &a.spacetime);
            put(cfg, "scatter.mass", &a.mass);
            put(cfg, "scatter.n", &a.n);
            put(cfg, "scatter.modes", &a.modes);
            put(cfg, "scatter.l_max", &a.l_max);
            put(cfg, "scatter.seed", &a.seed);
            put(cfg, "scatter.coefficients", &a.coefficients);
            "scatter"
        }
        Command::Geodesic(a) => {
            put(cfg, "geodesic.preset", &a.preset);
            put(cfg, "geodesic.spacetime", &a.spacetime);
            put(cfg, "geodesic.chart", &a.chart);
            put(cfg, "geodesic.coords", &a.coords);
            put(cfg, "geodesic.velocity", &a.velocity);
            put(cfg, "geodesic.span", &a.span);
            put(cfg, "geodesic.tol", &a.tol);
            "geodesic"
        }
        Command::Curvature(a) => {
            put(cfg, "curvature.spacetime", &a.spacetime);
            put(cfg, "curvature.T", &a.t);
            put(cfg, "curvature.X", &a.x);
            "curvature"
        }
        Command::Verify(a) => {
            put(cfg, "verify.suite", &a.suite);
            put(cfg, "verify.seed", &a.seed);
            "verify"
        }
    }
}

/// Writes through a temporary file so readers never see a partial output.
fn write_atomic(path: &Path, text: &str) -> CliResult<()> {
    let tmp = path.with_extension("partial");
    std::fs::write(&tmp, text)
        .and_then(|_| std::fs::rename(&tmp, path))
        .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
}

fn configure_threads() -> CliResult<()> {
    let Ok(v) = std::env::var("KKBUBBLE_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("KKBUBBLE_THREADS: expected a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("KKBUBBLE_THREADS: {e}")))
}

fn run(cli: Cli) -> CliResult<bool> {
    configure_threads()?;
    let mut cfg = match &cli.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?;
            Config::from_toml(&text)?
        }
        None => Config::default(),
    };
    for s in &cli.overrides {
        let (k, v) = parse_assignment(s)?;
        cfg.set(&k, v);
    }
    let section = apply_flags(&cli.command, &mut cfg);
    let mut job = commands::prepare(section, &mut cfg)?;
    cfg.check_unknown(section)?;
    if let Some(p) = &cli.dump_config {
        write_atomic(p, &cfg.effective())?;
    }
    let out = job.run()?;
    let text = out.render(section, &cfg);
    for (path, body) in &out.extra_files {
        write_atomic(Path::new(path), body)?;
    }
    match &cli.output {
        Some(p) => write_atomic(p, &text)?,
        None => print!("{text}"),
    }
    Ok(out.passed)
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => {}
        Ok(false) => {
            eprintln!("error: kind=check code=3 message=\"one or more checks failed\"");
            std::process::exit(3);
        }
        Err(e) => {
            eprintln!("error: kind={} code={} message={:?}", e.kind(), e.code(), e.message());
            std::process::exit(e.code());
        }
    }
}
