use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use mixed_nitsche::problems::ExampleId;
use mixed_nitsche::study::{run_study, OutputFormat, QuadratureDegrees, StudyConfig};
use mixed_nitsche::{Error, Execution};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Md,
    Json,
}

/// Convergence study for the stabilised three-field Nitsche discretisation
/// of the Poisson problem on the unit square.
#[derive(Debug, Parser)]
#[command(version)]
struct Args {
    /// Manufactured solution: 1, 2 or patch.
    #[arg(long, default_value = "1")]
    example: ExampleId,

    /// Refinement levels n (n x n cells, 2n² triangles), strictly increasing.
    #[arg(long, value_delimiter = ',', default_value = "2,4,8,16,32,64")]
    levels: Vec<usize>,

    /// Stabilisation weight, 0 < r < 1.
    #[arg(long, default_value_t = 0.5)]
    r: f64,

    /// Nitsche penalty weight.
    #[arg(long, default_value_t = 10.0)]
    alpha: f64,

    #[arg(long, default_value_t = 1e-12)]
    cg_tol: f64,

    #[arg(long, default_value_t = 20_000)]
    cg_maxit: usize,

    #[arg(long, value_enum, default_value = "md")]
    format: Format,

    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Also compare against a dense solve of the full block system (levels ≤ 16).
    #[arg(long)]
    oracle: bool,

    /// Write assembled matrices and loads in Matrix Market format.
    #[arg(long, value_name = "DIR")]
    export_matrices: Option<PathBuf>,

    /// Write mesh node and element files.
    #[arg(long, value_name = "DIR")]
    export_mesh: Option<PathBuf>,

    /// Disable data-parallel loops.
    #[arg(long)]
    sequential: bool,
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::InvalidArgument(_) | Error::UnsupportedDegree { .. } => 2,
        Error::NotConverged { .. } | Error::Indefinite(_) | Error::Singular { .. } | Error::BrokenBiorthogonality { .. } => 3,
        Error::OracleMismatch { .. } => 4,
        _ => 1,
    }
}

fn run(args: Args) -> Result<(), Error> {
    let format = match args.format {
        Format::Csv => OutputFormat::Csv,
        Format::Md => OutputFormat::Markdown,
        Format::Json => OutputFormat::Json,
    };
    let config = StudyConfig {
        example: args.example,
        levels: args.levels,
        r: args.r,
        alpha: args.alpha,
        cg_tol: args.cg_tol,
        cg_maxit: args.cg_maxit,
        quadrature: QuadratureDegrees::default(),
        format,
        out: args.out,
        oracle: args.oracle,
        export_matrices: args.export_matrices,
        export_mesh: args.export_mesh,
        execution: if args.sequential { Execution::Sequential } else { Execution::default() },
    };
    let report = run_study(&config)?;
    let text = report.render(format)?;
    match &config.out {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    if let Some(oracle) = &report.oracle {
        for l in &oracle.levels {
            eprintln!(
                "oracle n={:<3} u {:.2e}  sigma {:.2e}  phi {:.2e}",
                l.level, l.u, l.sigma, l.phi
            );
        }
        if let Some(err) = oracle.first_failure() {
            return Err(err);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
