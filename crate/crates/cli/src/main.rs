use std::fs;
use std::io::{self, Read};
use std::process::ExitCode;

use allmatch_core::estimator::Algorithm;
use allmatch_core::experiments::{
    self, ClosedFormParams, ExactQuantity, ExperimentParams, Formula, Mode, Output, Stat,
};
use allmatch_core::ensembles::EnsembleSpec;
use allmatch_core::rational::parse_rational;
use allmatch_core::verify::{self, Implementations, Level};
use allmatch_core::{Error, ExactRational, ZeroOneMatrix};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

/// Exact counting and randomized estimation of all matchings of bipartite
/// graphs and permanents of 0-1 matrices.
#[derive(Debug, Parser)]
#[command(name = "allmatch", version)]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Seed for every random stream.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (0 = one per core). Results do not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,
    /// Write 0 for every runtime_ms so reruns are byte-identical.
    #[arg(long, global = true)]
    deterministic: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Exact AM, permanent, matching vector, or the extended-matrix identity.
    Exact {
        /// Matrix file in text or JSON form; `-` reads stdin.
        matrix: String,
        #[arg(long, default_value = "am", value_parser = parse_with::<ExactQuantity>)]
        what: ExactQuantity,
    },
    /// Monte Carlo estimate with the RM or AMM estimator.
    Estimate {
        matrix: String,
        #[arg(long, default_value = "amm", value_parser = parse_with::<Algorithm>)]
        alg: Algorithm,
        #[arg(long, default_value_t = 10_000)]
        samples: u64,
    },
    /// Tables of the ensemble closed forms.
    ClosedForm {
        #[arg(long, value_parser = parse_with::<Formula>)]
        formula: Formula,
        /// Single n (shorthand for --n-range N..=N).
        #[arg(long, conflicts_with = "n_range")]
        n: Option<usize>,
        /// Inclusive range, e.g. 1..40.
        #[arg(long)]
        n_range: Option<String>,
        /// Rows for t3/t4 (defaults to n).
        #[arg(long)]
        m: Option<usize>,
        /// Tail offsets for t7; repeatable, e.g. --eps 0 --eps 1/100.
        #[arg(long, value_parser = parse_q)]
        eps: Vec<ExactRational>,
        /// Edge count for lemma2/t8/l2ratio.
        #[arg(long, conflicts_with = "edge_fraction")]
        edges: Option<usize>,
        /// Edge count as ceil(F * n^2); default 0.52.
        #[arg(long, value_parser = parse_q)]
        edge_fraction: Option<ExactRational>,
    },
    /// Ensemble averages compared with the closed forms.
    Experiment {
        /// Ensemble spec JSON file, e.g. {"kind":"bernoulli","p":"1/2","rows":3,"cols":3}.
        #[arg(long)]
        ensemble: String,
        #[arg(long, default_value = "am", value_parser = parse_with::<Stat>)]
        stat: Stat,
        #[arg(long, default_value = "exhaustive", value_parser = parse_with::<Mode>)]
        mode: Mode,
        /// Run square sizes n in this range instead of the spec's shape.
        #[arg(long)]
        n_range: Option<String>,
        #[arg(long, default_value_t = 10_000)]
        samples: u64,
    },
    /// Run the self-check suite.
    Verify {
        #[arg(long, default_value = "quick", value_parser = parse_with::<Level>)]
        level: Level,
    },
}

fn parse_with<T: std::str::FromStr<Err = Error>>(s: &str) -> Result<T, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_q(s: &str) -> Result<ExactRational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

fn read_input(path: &str) -> Result<String, Error> {
    let mut s = String::new();
    let res = if path == "-" {
        io::stdin().read_to_string(&mut s).map(|_| ())
    } else {
        fs::read_to_string(path).map(|t| s = t)
    };
    res.map_err(|e| Error::InvalidArgument(format!("cannot read {path}: {e}")))?;
    Ok(s)
}

fn read_matrix(path: &str) -> Result<ZeroOneMatrix, Error> {
    ZeroOneMatrix::parse_any(&read_input(path)?)
}

fn emit(out: Output, cli: &Cli) {
    let mut report = out.report;
    if cli.deterministic {
        report.strip_timings();
    }
    match cli.format {
        Format::Text => println!("{}", out.text),
        Format::Json => print!("{}", report.to_json()),
        Format::Csv => print!("{}", report.to_csv()),
    }
    if cli.format != Format::Text {
        for w in &report.warnings {
            eprintln!("warning: {w}");
        }
    }
}

fn run(cli: &Cli) -> Result<ExitCode, Error> {
    match &cli.command {
        Command::Exact { matrix, what } => {
            emit(experiments::cmd_exact(&read_matrix(matrix)?, *what)?, cli);
        }
        Command::Estimate { matrix, alg, samples } => {
            let a = read_matrix(matrix)?;
            emit(experiments::cmd_estimate(&a, *alg, *samples, cli.seed, cli.workers)?, cli);
        }
        Command::ClosedForm {
            formula,
            n,
            n_range,
            m,
            eps,
            edges,
            edge_fraction,
        } => {
            let range = match (n, n_range) {
                (Some(n), _) => (*n, *n),
                (None, Some(r)) => experiments::parse_range(r)?,
                (None, None) => return Err(Error::InvalidArgument("closed-form needs --n or --n-range".into())),
            };
            let mut p = ClosedFormParams::new(*formula, range);
            p.m = *m;
            p.edges = *edges;
            if !eps.is_empty() {
                p.eps = eps.clone();
            }
            if let Some(f) = edge_fraction {
                p.edge_fraction = f.clone();
            }
            emit(experiments::cmd_closed_form(&p)?, cli);
        }
        Command::Experiment {
            ensemble,
            stat,
            mode,
            n_range,
            samples,
        } => {
            let p = ExperimentParams {
                ensemble: EnsembleSpec::from_json(&read_input(ensemble)?)?,
                stat: *stat,
                mode: *mode,
                n_range: n_range.as_deref().map(experiments::parse_range).transpose()?,
                samples: *samples,
                seed: cli.seed,
            };
            emit(experiments::cmd_experiment(&p)?, cli);
        }
        Command::Verify { level } => {
            let summary = verify::run(*level, &Implementations::default());
            let text = summary.to_text();
            let report = summary.to_report(cli.deterministic);
            emit(Output { report, text }, cli);
            if !summary.passed() {
                if cli.format != Format::Text {
                    eprintln!("{}", summary.to_text());
                }
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.workers > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.workers)
            .build_global()
            .expect("global pool is configured once");
    }
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_capability() { 3 } else { 2 })
        }
    }
}
