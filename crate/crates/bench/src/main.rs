use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pertext::data::KernelSpec;
use pertext::{MuPolicy, Order, Selector};
use pertext_bench::compare::{curve, matched_comparison, mean_variances};
use pertext_bench::experiments::band::BandConfig;
use pertext_bench::experiments::eig::EigConfig;
use pertext_bench::experiments::extend::{ExtendConfig, MatrixInput};
use pertext_bench::experiments::slopes::SlopesConfig;
use pertext_bench::experiments::sparse::{DataSource, SparseConfig};
use pertext_bench::experiments::verify::VerifyConfig;
use pertext_bench::experiments::{band, eig, extend, slopes, sparse, verify};
use pertext_bench::report::Report;
use pertext_bench::{BenchError, Result};

/// Perturbation-based eigenvector extension experiments.
#[derive(Parser)]
#[command(name = "pertext", version)]
struct Cli {
    /// Master seed; trial seeds are derived from it.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Report file (CSV), or output directory for `extend` and `eig --matrix`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Number of trials (command-specific default).
    #[arg(long, global = true)]
    trials: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Error slopes of the truncated updates versus |E| and versus the tail value.
    Slopes {
        #[arg(long, default_value_t = 200)]
        n: usize,
        #[arg(long, default_value_t = 10)]
        m: usize,
    },
    /// Band extensions against generalized Nyström on band kernels.
    Band {
        #[arg(long, default_value_t = 500)]
        n: usize,
        #[arg(long, default_value_t = 10)]
        m: usize,
        /// Comma-separated half-bandwidths.
        #[arg(long, value_delimiter = ',')]
        p_grid: Option<Vec<usize>>,
        /// Comma-separated sampled column counts.
        #[arg(long, value_delimiter = ',')]
        l_grid: Option<Vec<usize>>,
    },
    /// Sparse extensions against generalized Nyström on sparsified kernels.
    Sparse {
        /// Numeric CSV file; a synthetic clustered dataset when omitted.
        #[arg(long)]
        dataset: Option<PathBuf>,
        /// The dataset file has a header row.
        #[arg(long)]
        header: bool,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        /// gaussian:<gamma>, poly:<degree> or linear.
        #[arg(long, default_value = "gaussian:0.1")]
        kernel: KernelSpec,
        /// Fraction of kernel entries kept.
        #[arg(long, default_value_t = 0.1)]
        keep: f64,
        #[arg(long, default_value_t = 5)]
        m: usize,
        /// Comma-separated top-q fractions.
        #[arg(long, value_delimiter = ',')]
        q_grid: Option<Vec<f64>>,
        /// Comma-separated sampled column counts.
        #[arg(long, value_delimiter = ',')]
        l_grid: Option<Vec<usize>>,
    },
    /// Equivalence checks on seeded random instances.
    Verify {
        #[arg(long, default_value_t = 200)]
        n: usize,
        #[arg(long, default_value_t = 20)]
        m: usize,
        /// zero, mean or a number.
        #[arg(long, default_value = "mean")]
        mu: MuPolicy,
        #[arg(long, default_value_t = 1e-10)]
        tolerance: f64,
    },
    /// Extend the leading pairs of a selected submatrix.
    Extend {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        kernel: KernelArgs,
        /// topleft:<l>, band:<p>, sparse:<q>, blocks:<s1,s2,..> or mask:<file>.
        #[arg(long, value_parser = parse_selector)]
        selector: Selector,
        /// Number of leading pairs to extend.
        #[arg(long)]
        m: usize,
        /// Truncation order, 1 or 2.
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
        order: u8,
        /// Tail shift: zero, mean or a number.
        #[arg(long, default_value = "zero")]
        mu: MuPolicy,
    },
    /// Eigensolver residual check, or leading pairs of a matrix file.
    Eig {
        #[command(flatten)]
        input: OptionalInput,
        #[arg(long, default_value_t = 100)]
        n: usize,
        /// Number of leading pairs (with a matrix file).
        #[arg(long, default_value_t = 1)]
        m: usize,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct InputArgs {
    /// Dense comma-separated matrix.
    #[arg(long)]
    matrix: Option<PathBuf>,
    /// Sparse matrix file (`n nnz` header, `i j v` lines).
    #[arg(long)]
    sparse_matrix: Option<PathBuf>,
    /// Dataset whose kernel is extended.
    #[arg(long)]
    dataset: Option<PathBuf>,
}

#[derive(Args)]
#[group(required = false, multiple = false)]
struct OptionalInput {
    /// Dense comma-separated matrix.
    #[arg(long)]
    matrix: Option<PathBuf>,
    /// Sparse matrix file.
    #[arg(long)]
    sparse_matrix: Option<PathBuf>,
}

#[derive(Args)]
struct KernelArgs {
    /// The dataset file has a header row.
    #[arg(long)]
    header: bool,
    /// gaussian:<gamma>, poly:<degree> or linear.
    #[arg(long, default_value = "gaussian:0.1")]
    kernel: KernelSpec,
    /// Sparsify the dataset kernel to this fraction of entries.
    #[arg(long)]
    keep: Option<f64>,
}

fn parse_selector(s: &str) -> std::result::Result<Selector, String> {
    Selector::parse(s).map_err(|e| e.to_string())
}

impl InputArgs {
    fn into_input(self, kernel: KernelArgs) -> MatrixInput {
        match (self.matrix, self.sparse_matrix, self.dataset) {
            (Some(p), _, _) => MatrixInput::Dense(p),
            (_, Some(p), _) => MatrixInput::Sparse(p),
            (_, _, Some(path)) => MatrixInput::Dataset {
                path,
                has_header: kernel.header,
                kernel: kernel.kernel,
                keep: kernel.keep,
            },
            _ => unreachable!("clap requires one input"),
        }
    }
}

enum Outcome {
    Success,
    VerificationFailed,
}

fn emit(report: &Report, out: Option<&PathBuf>) -> Result<()> {
    match out {
        Some(p) => report.write(p),
        None => {
            print!("{}", report.to_csv());
            Ok(())
        }
    }
}

fn summarize_curves(report: &Report, candidate: &str, threshold: f64) {
    for p in curve(report, candidate, "principal_angle") {
        eprintln!(
            "{candidate} {:>8} nnz {:.3} median angle {:.3e}",
            p.parameter, p.median_fraction, p.median_value
        );
    }
    for p in curve(report, "nystrom", "principal_angle") {
        eprintln!(
            "nystrom {:>8} nnz {:.3} median angle {:.3e}",
            p.parameter, p.median_fraction, p.median_value
        );
    }
    let matched = matched_comparison(report, candidate, "nystrom", "principal_angle", threshold, std::f64::consts::FRAC_PI_2);
    for p in &matched {
        eprintln!(
            "matched nnz {:.3}: {candidate} {:.3e} vs nystrom {:.3e} ({})",
            p.fraction,
            p.candidate_median,
            p.baseline_median,
            if p.candidate_not_worse() { "not worse" } else { "worse" }
        );
    }
    let (vc, vb) = mean_variances(&matched);
    eprintln!("mean trial variance: {candidate} {vc:.3e}, nystrom {vb:.3e}");
}

fn run(cli: Cli) -> Result<Outcome> {
    let out = cli.out.as_ref();
    match cli.command {
        Command::Slopes { n, m } => {
            let cfg = SlopesConfig { n, m, seed: cli.seed, trials: cli.trials.unwrap_or(1), ..Default::default() };
            let o = slopes::run(&cfg)?;
            for s in &o.slopes {
                eprintln!(
                    "trial {}: |E| slopes {:.3} (first) {:.3} (second); tail slopes {:.3} (first) {:.3} (second)",
                    s.trial, s.scale_first, s.scale_second, s.tail_first, s.tail_second
                );
            }
            emit(&o.report, out)?;
        }
        Command::Band { n, m, p_grid, l_grid } => {
            let mut cfg = BandConfig::with_size(n);
            cfg.m = m;
            cfg.seed = cli.seed;
            cfg.trials = cli.trials.unwrap_or(cfg.trials);
            cfg.p_grid = p_grid.unwrap_or(cfg.p_grid);
            cfg.l_grid = l_grid.unwrap_or(cfg.l_grid);
            let r = band::run(&cfg)?;
            summarize_curves(&r, "band", 0.2);
            emit(&r, out)?;
        }
        Command::Sparse { dataset, header, n, kernel, keep, m, q_grid, l_grid } => {
            let mut cfg = SparseConfig::with_size(n);
            if let Some(path) = dataset {
                cfg.source = DataSource::File { path, has_header: header };
            }
            cfg.kernel = kernel;
            cfg.keep = keep;
            cfg.m = m;
            cfg.seed = cli.seed;
            cfg.trials = cli.trials.unwrap_or(cfg.trials);
            cfg.q_grid = q_grid.unwrap_or(cfg.q_grid);
            cfg.l_grid = l_grid.unwrap_or(cfg.l_grid);
            let r = sparse::run(&cfg)?;
            summarize_curves(&r, "sparse", 0.3);
            emit(&r, out)?;
        }
        Command::Verify { n, m, mu, tolerance } => {
            let cfg = VerifyConfig {
                n,
                m,
                mu,
                trials: cli.trials.unwrap_or(50),
                seed: cli.seed,
                tolerance,
                ..Default::default()
            };
            let o = verify::run(&cfg)?;
            emit(&o.report, out)?;
            for g in &o.guarded {
                eprintln!("guarded: {g}");
            }
            for f in &o.failures {
                eprintln!("FAILED: {f}");
            }
            eprintln!(
                "{} checks failed, {} guarded, over {} trials",
                o.failures.len(),
                o.guarded.len(),
                cfg.trials
            );
            if !o.passed() {
                return Ok(Outcome::VerificationFailed);
            }
        }
        Command::Extend { input, kernel, selector, m, order, mu } => {
            let out_dir = out.cloned().ok_or_else(|| BenchError::Usage("extend needs --out <directory>".into()))?;
            let order = Order::try_from(order)?;
            let r = extend::run(&ExtendConfig { input: input.into_input(kernel), selector, m, order, mu, out_dir })?;
            eprintln!("extended {} pairs, shift {}, selected nnz {}", r.values.len(), r.mu, r.selector_nnz);
        }
        Command::Eig { input, n, m } => {
            let file = match (input.matrix, input.sparse_matrix) {
                (Some(p), _) => Some(MatrixInput::Dense(p)),
                (_, Some(p)) => Some(MatrixInput::Sparse(p)),
                _ => None,
            };
            if let Some(input) = file {
                let out_dir = out.cloned().ok_or_else(|| BenchError::Usage("eig --matrix needs --out <directory>".into()))?;
                eig::leading_pairs(&input, m, &out_dir)?;
            } else {
                let cfg = EigConfig { n, trials: cli.trials.unwrap_or(100), seed: cli.seed, ..Default::default() };
                let o = eig::run(&cfg)?;
                emit(&o.report, out)?;
                eprintln!("worst relative residual {:.3e}, {} above {:e}", o.worst, o.failures, cfg.tolerance);
                if o.failures > 0 {
                    return Ok(Outcome::VerificationFailed);
                }
            }
        }
    }
    Ok(Outcome::Success)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::VerificationFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(2)
        }
    }
}
