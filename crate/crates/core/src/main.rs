use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use fracprop::calculus::{caputo_derivative, rl_integral, TimeGrid};
use fracprop::experiment::{self, OperatorConfig, OutputSpace, RunConfig, PRESETS, SUMMARY_HEADER};
use fracprop::mittag_leffler::{MittagLeffler, MlConfig};
use fracprop::solver::NonlinearitySpec;

#[derive(Parser)]
#[command(name = "fracprop", version, about = "Time-fractional Schrödinger-type evolution with Mittag-Leffler propagators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a config file (or sidecar JSON) or a preset.
    Run(RunArgs),
    /// Run a verification suite and print one line per check.
    Verify {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(experiment::SUITES))]
        suite: String,
    },
    /// Evaluate E_{α,β}(z) and report the branch used.
    MlEval {
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        re: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        im: f64,
    },
    /// Fractional integral or Caputo derivative of sampled data, as CSV t,re,im.
    Frac {
        #[arg(value_enum)]
        op: FracOp,
        #[command(flatten)]
        args: FracArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FracOp {
    Integral,
    Caputo,
}

#[derive(clap::Args)]
struct FracArgs {
    #[arg(long)]
    alpha: f64,
    /// CSV with columns t,re,im; the t column is the mesh.
    #[arg(long, conflicts_with = "power")]
    input: Option<PathBuf>,
    /// Sample u(t) = t^γ on a graded mesh instead of reading a file.
    #[arg(long)]
    power: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    horizon: f64,
    #[arg(long, default_value_t = 64)]
    intervals: usize,
    /// Mesh grading exponent r (t_j = T (j/N)^r); defaults to max(2/α, 1).
    #[arg(long)]
    grading: Option<f64>,
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long, conflicts_with = "preset", required_unless_present_any = ["preset", "list_presets"])]
    config: Option<PathBuf>,
    #[arg(long)]
    preset: Option<String>,
    /// Print the preset names and exit.
    #[arg(long)]
    list_presets: bool,
    /// Comma-separated α values.
    #[arg(long, value_delimiter = ',')]
    alpha: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    epsilon: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    horizon: Option<Vec<f64>>,
    /// Grid points per axis.
    #[arg(long = "N")]
    n: Option<usize>,
    /// Torus side length.
    #[arg(long = "L")]
    l: Option<f64>,
    /// Exponent of the power nonlinearity.
    #[arg(long)]
    p: Option<f64>,
    /// Coupling of the power or saturating nonlinearity.
    #[arg(long, allow_negative_numbers = true)]
    lambda: Option<f64>,
    /// Initial amplitude: `small` (preset value), `large` (ten times it) or a number.
    #[arg(long)]
    x0: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    intervals: Option<usize>,
    /// Blow-up threshold on ‖u‖_{D(A)}.
    #[arg(long)]
    threshold: Option<f64>,
    /// Smallest admissible window length.
    #[arg(long)]
    floor: Option<f64>,
    #[arg(long)]
    picard_tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// Node budget of a continuation run.
    #[arg(long)]
    max_nodes: Option<usize>,
    #[arg(long, value_enum)]
    space: Option<Space>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Space {
    Modes,
    Grid,
}

fn resolve(args: &RunArgs) -> Result<RunConfig> {
    let mut cfg = match (&args.config, &args.preset) {
        (Some(path), _) => RunConfig::read(path).with_context(|| format!("reading config {}", path.display()))?,
        (None, Some(name)) => experiment::preset(name)?,
        (None, None) => bail!("either --config or --preset is required"),
    };
    if let Some(v) = &args.alpha {
        cfg.alpha = v.clone();
    }
    if let Some(v) = &args.epsilon {
        cfg.epsilon = v.clone();
    }
    if let Some(v) = &args.horizon {
        cfg.horizon = v.clone();
    }
    if args.n.is_some() || args.l.is_some() {
        let OperatorConfig::Torus { n, l, .. } = &mut cfg.operator else {
            bail!("--N and --L only apply to torus operators");
        };
        if let Some(v) = args.n {
            *n = v;
        }
        if let Some(v) = args.l {
            *l = v;
        }
    }
    if args.p.is_some() || args.lambda.is_some() {
        match &mut cfg.nonlinearity {
            NonlinearitySpec::Power { lambda, p, .. } => {
                if let Some(v) = args.p {
                    *p = v;
                }
                if let Some(v) = args.lambda {
                    *lambda = v;
                }
            }
            NonlinearitySpec::Saturating { lambda } if args.p.is_none() => *lambda = args.lambda.unwrap_or(*lambda),
            other => bail!("--p/--lambda do not apply to the {} nonlinearity", other.name()),
        }
    }
    match args.x0.as_deref() {
        None | Some("small") => {}
        Some("large") => cfg.initial.scale(10.0),
        Some(v) => {
            let a: f64 = v.parse().with_context(|| format!("--x0 expects small, large or a number, got `{v}`"))?;
            cfg.initial.set_amplitude(a);
        }
    }
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if let Some(v) = &args.out {
        cfg.output.dir = v.clone();
    }
    if let Some(v) = args.intervals {
        cfg.intervals = v;
    }
    if let Some(v) = args.threshold {
        cfg.solver.blowup_threshold = v;
    }
    if let Some(v) = args.floor {
        cfg.solver.policy.floor = v;
    }
    if let Some(v) = args.picard_tol {
        cfg.solver.picard.tol = v;
    }
    if let Some(v) = args.max_iter {
        cfg.solver.picard.max_iter = v;
    }
    if let Some(v) = args.max_nodes {
        cfg.solver.max_nodes = v;
    }
    if let Some(s) = args.space {
        cfg.output.space = match s {
            Space::Modes => OutputSpace::Modes,
            Space::Grid => OutputSpace::Grid,
        };
    }
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_run(args: RunArgs) -> Result<ExitCode> {
    if args.list_presets {
        for (name, about) in PRESETS {
            println!("{name:<14} {about}");
        }
        return Ok(ExitCode::SUCCESS);
    }
    let cfg = resolve(&args)?;
    let report = fracprop::with_thread_cap(|| experiment::run(&cfg))?;
    let mut out = std::io::stdout().lock();
    writeln!(out, "{SUMMARY_HEADER}")?;
    for row in report.rows() {
        writeln!(out, "{}", experiment::summary_line(row))?;
    }
    for p in &report.points {
        for w in &p.sidecar.warnings {
            eprintln!("warning (point {}): {w}", p.sidecar.point.index);
        }
    }
    eprintln!("wrote {} sweep point(s) and {}", report.points.len(), report.summary_path.display());
    if report.any_tolerance_failure() {
        eprintln!("at least one sweep point ended in tolerance_failure");
        return Ok(ExitCode::from(3));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(suite: &str) -> Result<ExitCode> {
    let checks = fracprop::with_thread_cap(|| experiment::suite(suite))?;
    let failed = checks.iter().filter(|c| !c.pass).count();
    for c in &checks {
        println!("{c}");
    }
    println!("{} checks, {} failed", checks.len(), failed);
    Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn cmd_ml_eval(alpha: f64, beta: f64, re: f64, im: f64) -> Result<ExitCode> {
    let ml = MittagLeffler::new(alpha, beta, MlConfig::default())?;
    let (v, branch) = ml.eval_branch(Complex64::new(re, im))?;
    println!("value {:e} {:+e}i", v.re, v.im);
    println!("branch {branch}");
    Ok(ExitCode::SUCCESS)
}

fn read_samples(path: &PathBuf) -> Result<(Vec<f64>, Vec<Complex64>)> {
    let mut rdr = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let (mut t, mut u) = (Vec::new(), Vec::new());
    for rec in rdr.deserialize() {
        let (ti, re, im): (f64, f64, f64) = rec?;
        t.push(ti);
        u.push(Complex64::new(re, im));
    }
    Ok((t, u))
}

fn cmd_frac(op: FracOp, a: FracArgs) -> Result<ExitCode> {
    let (grid, u) = match (&a.input, a.power) {
        (Some(path), _) => {
            let (t, u) = read_samples(path)?;
            (TimeGrid::from_nodes(t)?, u)
        }
        (None, Some(gamma)) => {
            let r = a.grading.unwrap_or((2.0 / a.alpha).max(1.0));
            let grid = TimeGrid::graded(a.horizon, a.intervals, r)?;
            let u = grid.nodes().iter().map(|&t| Complex64::new(if t == 0.0 && gamma == 0.0 { 1.0 } else { t.powf(gamma) }, 0.0)).collect();
            (grid, u)
        }
        (None, None) => bail!("give --input FILE or --power GAMMA"),
    };
    let (values, first) = match op {
        FracOp::Integral => (rl_integral(a.alpha, &grid, &u)?, 0),
        FracOp::Caputo => (caputo_derivative(a.alpha, &grid, &u)?, 1),
    };
    let mut out = std::io::stdout().lock();
    writeln!(out, "t,re,im")?;
    for (t, v) in grid.nodes()[first..].iter().zip(&values) {
        writeln!(out, "{t:e},{:e},{:e}", v.re, v.im)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Verify { suite } => cmd_verify(&suite),
        Command::MlEval { alpha, beta, re, im } => cmd_ml_eval(alpha, beta, re, im),
        Command::Frac { op, args } => cmd_frac(op, args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
