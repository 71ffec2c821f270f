//! `matlang`: files in, files out.
//!
//! Exit status is 0 on success, 1 when the input is rejected (type error,
//! failed check, evaluation error) and 2 on usage errors, including
//! missing files.

mod commands;

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "matlang", version, about = "Matrix query language toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TowerFlag {
    /// Exact unless the program needs floats (eigen, div_sqrt).
    Auto,
    Exact,
    Float,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Schema file (`.mts`). Defaults to the program path with `.mts`.
    #[arg(short, long)]
    schema: Option<PathBuf>,
    /// Program file (`.mtl`).
    #[arg(short, long)]
    program: Option<PathBuf>,
    /// Instance manifest: one `NAME = file.csv` per line.
    #[arg(short, long)]
    instance: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = TowerFlag::Auto)]
    tower: TowerFlag,
    /// Zero tolerance of the float tower (also `MATLANG_EPS`).
    #[arg(long)]
    eps: Option<f64>,
    /// Eigenvalue clustering distance (also `MATLANG_DELTA`).
    #[arg(long)]
    delta: Option<f64>,
    /// Write the result here instead of standard output.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the syntax tree of a program.
    Parse(Common),
    /// Print the type of a program over a schema.
    Typecheck(Common),
    /// Evaluate a program on an instance and write the result as CSV.
    Eval(Common),
    /// Print the relational-algebra plan of a program.
    TranslateRel(Common),
    /// Run the relational plan on the encoded instance.
    EvalRel {
        #[command(flatten)]
        common: Common,
        /// Decode the result relation back into a matrix CSV.
        #[arg(long)]
        decode: bool,
    },
    /// Compile a relation-algebra expression into a program.
    CompileBinrel {
        /// Expression text, e.g. `R ; S + id`.
        #[arg(long, conflicts_with = "file")]
        expr: Option<String>,
        /// File holding the expression.
        #[arg(long)]
        file: Option<PathBuf>,
        /// Also write the schema of the compiled program here.
        #[arg(long)]
        schema_out: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Emit the real-arithmetic formula of a program as SMT-LIB.
    EmitSmt {
        #[command(flatten)]
        common: Common,
        /// Size assignment, e.g. `a=3,b=4`.
        #[arg(long)]
        sigma: String,
        /// Constraint file; emits the partial-evaluation sentence.
        #[arg(long)]
        chi: Option<PathBuf>,
    },
    /// Check that a matrix is a valid eigenbasis result for another.
    VerifyEigen {
        /// The square input matrix (CSV).
        #[arg(long)]
        matrix: PathBuf,
        /// The candidate basis (CSV).
        #[arg(long)]
        basis: PathBuf,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
    },
    /// Check the standard library against its reference algorithms.
    RunCorpus {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Random inputs per program.
        #[arg(long, default_value_t = 50)]
        cases: usize,
        /// Only this program.
        #[arg(long)]
        name: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::dispatch(cli.command) {
        Ok(code) => code,
        Err(commands::Failure::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
        Err(commands::Failure::Domain(err)) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
