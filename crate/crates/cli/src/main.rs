//! `twistg`: subspace-lattice catalogs, the twisted Grassmann graph, and
//! its base-point module decomposition, exposed as verification commands
//! with deterministic reports.
//!
//! Exit codes: 0 when every requested check passes, 1 on check failure or
//! internal error (the report is still written), 2 on usage errors and
//! desk-scale refusals.

mod commands;
mod emit;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use commands::{CmdError, ExportWhat, Opts};
use report::Report;

#[derive(Parser)]
#[command(
    name = "twistg",
    version,
    about = "Subspace-lattice module catalogs and twisted Grassmann graph verification",
    after_help = "Reports are byte-identical for identical configurations; \
                  --timing adds wall-clock data and breaks that guarantee."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Report format written to stdout or --out
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Write the report to this file instead of stdout
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,

    /// Directory for exported matrices and tables
    /// (default: $TWISTG_OUT_DIR, falling back to the working directory)
    #[arg(long, global = true, value_name = "DIR")]
    out_dir: Option<PathBuf>,

    /// Tolerance for the non-exact scalar paths (q >= 3); exact paths ignore it
    #[arg(long, global = true, default_value_t = twistg_core::DEFAULT_TOL)]
    tol: f64,

    /// Ground-set ceiling for the desk-scale guard
    #[arg(long, global = true, default_value_t = 30_000, value_name = "N")]
    max_points: u64,

    /// Proceed past the desk-scale guard
    #[arg(long, global = true)]
    force: bool,

    /// Record wall-clock milliseconds in the report
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Counting tables: Gaussian binomials, subspace totals, cell-partition
    /// identities, all cross-checked by direct enumeration
    Qarith {
        #[arg(long)]
        q: u64,
        /// Largest ambient dimension to sweep
        #[arg(long, default_value_t = 7)]
        n: u32,
    },
    /// Module catalogs as tables
    #[command(subcommand)]
    Catalog(CatalogCmd),
    /// Twisted Grassmann graph construction and structure checks
    #[command(subcommand)]
    Graph(GraphCmd),
    /// Verification suites over one layer or the whole pipeline
    #[command(subcommand)]
    Verify(VerifyCmd),
    /// Construct every module concretely, standardize, and verify the
    /// catalog; the oracle adds the independent counting cross-checks
    Decompose {
        #[arg(long)]
        q: u64,
        #[arg(long = "D")]
        big_d: usize,
        /// Cross-check the catalog against the closed-form inventory and
        /// the global decomposition counts
        #[arg(long)]
        with_oracle: bool,
        /// Measure eigenvalue supports through the exact spectral
        /// projections (dense, quadratic in the vertex count)
        #[arg(long)]
        spectral: bool,
    },
    /// Write matrices and catalogs to files
    Export {
        #[arg(long)]
        q: u64,
        #[arg(long = "D")]
        big_d: usize,
        /// Which artifact to write
        #[arg(long, value_enum)]
        what: ExportWhat,
    },
}

#[derive(Subcommand)]
enum CatalogCmd {
    /// Classes of the pair-ground algebra at (a, b)
    H {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        a: usize,
        #[arg(long)]
        b: usize,
    },
    /// Classes of the extended algebra at (a, b)
    Ht {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        a: usize,
        #[arg(long)]
        b: usize,
    },
    /// Base-point module descriptors at (q, D)
    T {
        #[arg(long)]
        q: u64,
        #[arg(long = "D")]
        big_d: usize,
        /// Collapse to isomorphism classes with summed multiplicities
        #[arg(long)]
        merged: bool,
        /// Keep only one family, e.g. V10
        #[arg(long)]
        family: Option<String>,
    },
}

#[derive(Subcommand)]
enum GraphCmd {
    /// Build the graph and report sizes, degree, and eigenvalues
    Build {
        #[arg(long)]
        q: u64,
        #[arg(long = "D")]
        big_d: usize,
        /// Also write adjacency.mtx into the output directory
        #[arg(long)]
        write: bool,
    },
    /// Distance regularity, intersection array against the plain Grassmann
    /// graph, and the exact spectrum
    CheckDrg {
        #[arg(long)]
        q: u64,
        #[arg(long = "D")]
        big_d: usize,
    },
    /// Spectrum of the local graph at the base vertex
    LocalSpectrum {
        #[arg(long)]
        q: u64,
        #[arg(long = "D")]
        big_d: usize,
    },
}

#[derive(Subcommand)]
enum VerifyCmd {
    /// Character formulas and the displayed operator identities on the
    /// extended ground set at (a, b)
    OperatorIdentities {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        a: usize,
        #[arg(long)]
        b: usize,
    },
    /// Block identities of the adjacency matrix and the distance-projection
    /// partition at (q, D)
    Blocks {
        #[arg(long)]
        q: u64,
        #[arg(long = "D")]
        big_d: usize,
    },
    /// Every layer end to end: counting, both catalogs, graph structure,
    /// concrete modules, and the decomposition counts
    All {
        #[arg(long)]
        q: u64,
        #[arg(long = "D")]
        big_d: usize,
    },
}

fn run(cli: &Cli, opts: &Opts) -> Result<Report, CmdError> {
    match &cli.command {
        Command::Qarith { q, n } => commands::qarith(*q, *n, opts),
        Command::Catalog(CatalogCmd::H { q, a, b }) => commands::catalog_h(*q, *a, *b),
        Command::Catalog(CatalogCmd::Ht { q, a, b }) => commands::catalog_ht(*q, *a, *b),
        Command::Catalog(CatalogCmd::T { q, big_d, merged, family }) => {
            commands::catalog_t(*q, *big_d, *merged, family.as_deref())
        }
        Command::Graph(GraphCmd::Build { q, big_d, write }) => {
            commands::graph_build(*q, *big_d, *write, opts)
        }
        Command::Graph(GraphCmd::CheckDrg { q, big_d }) => {
            commands::graph_check_drg(*q, *big_d, opts)
        }
        Command::Graph(GraphCmd::LocalSpectrum { q, big_d }) => {
            commands::graph_local_spectrum(*q, *big_d, opts)
        }
        Command::Verify(VerifyCmd::OperatorIdentities { q, a, b }) => {
            commands::verify_operator_identities(*q, *a, *b, opts)
        }
        Command::Verify(VerifyCmd::Blocks { q, big_d }) => {
            commands::verify_blocks(*q, *big_d, opts)
        }
        Command::Verify(VerifyCmd::All { q, big_d }) => commands::verify_all(*q, *big_d, opts),
        Command::Decompose { q, big_d, with_oracle, spectral } => {
            commands::decompose(*q, *big_d, *with_oracle, *spectral, opts)
        }
        Command::Export { q, big_d, what } => commands::export(*q, *big_d, *what, opts),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = std::time::Instant::now();
    let opts = Opts {
        tol: cli.tol,
        max_points: cli.max_points,
        force: cli.force,
        out_dir: cli
            .out_dir
            .clone()
            .or_else(|| std::env::var_os("TWISTG_OUT_DIR").map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(".")),
    };
    let mut report = match run(&cli, &opts) {
        Ok(report) => report,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code());
        }
    };
    if cli.timing {
        report.timing_ms = Some(started.elapsed().as_millis());
    }
    let body = match cli.format {
        Format::Json => report.to_json(),
        Format::Csv => report.to_csv(),
    };
    if let Some(path) = &cli.out {
        if let Err(e) = std::fs::write(path, &body) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return ExitCode::from(1);
        }
    } else {
        print!("{body}");
    }
    if report.all_passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
