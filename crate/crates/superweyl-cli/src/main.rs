mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use run::{CliError, RunReport};

#[derive(Parser)]
#[command(
    name = "superweyl",
    version,
    about = "Super symbol calculus checks for differential forms"
)]
struct Cli {
    /// Print the report as JSON.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact roundtrip, composition, trace and star checks on the fiber.
    FiberSelftest(FiberArgs),
    /// Curvature at a point and the curvature identities on every chart.
    Geometry(GeometryArgs),
    /// Hodge Laplacian against the Weitzenböck right-hand side.
    Weitzenbock(WeitzenbockArgs),
    /// Full symbol of the Hodge Laplacian at a point.
    LaplacianSymbol(SymbolArgs),
    /// Euler characteristic by Pfaffian and supertrace quadrature.
    Euler(EulerArgs),
    /// d² = 0 and the Leibniz defect of d on T*M.
    Dcheck(DcheckArgs),
}

#[derive(Args)]
struct FiberArgs {
    /// Fiber dimensions, at most 3.
    #[arg(long = "n", value_delimiter = ',', default_values_t = vec![1, 2, 3])]
    ns: Vec<usize>,
    /// Ordering parameters as rationals.
    #[arg(long = "r", value_delimiter = ',', default_values_t = vec!["0".to_string(), "1/2".into(), "1".into()])]
    rs: Vec<String>,
    /// Random cases for the composition and trace checks.
    #[arg(long, default_value_t = 200)]
    samples: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Flip one sign in the kernel to exercise the failure path.
    #[arg(long)]
    inject_fault: bool,
}

#[derive(Args)]
struct GeometryArgs {
    spec: PathBuf,
    /// Point as name=value,… (defaults to the centre of the first chart).
    #[arg(long)]
    at: Option<String>,
    #[arg(long, default_value_t = 20)]
    samples: usize,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct WeitzenbockArgs {
    spec: PathBuf,
    #[arg(long, default_value_t = 20)]
    samples: usize,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct SymbolArgs {
    spec: PathBuf,
    #[arg(long)]
    at: Option<String>,
    #[arg(long, default_value = "1/2")]
    r: String,
}

#[derive(Args)]
struct EulerArgs {
    spec: PathBuf,
    /// Gauss-Legendre nodes per axis.
    #[arg(long, default_value_t = 64)]
    quad: usize,
    /// Allowed |χ − expected|.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
}

#[derive(Args)]
struct DcheckArgs {
    spec: PathBuf,
    #[arg(long, default_value_t = 20)]
    samples: usize,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

fn dispatch(command: &Command) -> Result<RunReport, CliError> {
    match command {
        Command::FiberSelftest(a) => run::fiber_selftest(&a.ns, &a.rs, a.samples, a.seed, a.inject_fault),
        Command::Geometry(a) => run::geometry(&a.spec, a.at.as_deref(), a.samples, a.tol, a.seed),
        Command::Weitzenbock(a) => run::weitzenbock(&a.spec, a.samples, a.tol, a.seed),
        Command::LaplacianSymbol(a) => run::laplacian_symbol(&a.spec, a.at.as_deref(), &a.r),
        Command::Euler(a) => run::euler(&a.spec, a.quad, a.tol),
        Command::Dcheck(a) => run::dcheck(&a.spec, a.samples, a.tol, a.seed),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = std::time::Instant::now();
    match dispatch(&cli.command) {
        Ok(mut report) => {
            report.wall_time_s = start.elapsed().as_secs_f64();
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
            } else {
                print!("{}", report.render());
            }
            if report.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
