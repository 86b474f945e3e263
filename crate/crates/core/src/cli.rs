//! Command-line front end.
//!
//! Machine-readable CSV goes to stdout or `--out`; everything meant for a
//! human goes to stderr. Exit codes: 0 success, 1 runtime or data error,
//! 2 usage error.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::Error;
use crate::harness::{default_grid, replicate, run_grid, GridSpec};
use crate::io::{
    load_csv, write_experiment_csv, write_experiment_json, write_matrix_csv, write_metrics_csv,
    write_permutation_csv, write_rank_csv, write_report_csv, DatasetSource, ExperimentOutput,
};
use crate::metrics::{full_report, Metric};
use crate::perturb;
use crate::ranking::rank_matrix;
use crate::stats::{
    distinct_value_counts, enumerate_permutation_distances, sample_permutation_distances,
    MAX_ENUMERATION_N,
};
use crate::types::{Method, NumericMatrix, PerturbationSpec, TieBreakPolicy};

/// Environment variable holding the default worker count for `grid` and `replicate`.
pub const JOBS_ENV: &str = "RANKLOSS_JOBS";

#[derive(Debug, Parser)]
#[command(
    name = "rankloss",
    version,
    about = "Bounded rank-based information-loss metrics and masking for numeric microdata"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct InputOpts {
    /// Comma-separated column names (or 0-based indices) to keep.
    #[arg(long, value_delimiter = ',')]
    columns: Option<Vec<String>>,
    /// The input files have no header row.
    #[arg(long)]
    no_header: bool,
}

impl InputOpts {
    fn source(&self, path: &Path) -> DatasetSource {
        let mut src = DatasetSource::new(path).header(!self.no_header);
        src.selected_columns = self.columns.clone();
        src
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TieBreak {
    First,
    Random,
}

#[derive(Debug, Args)]
struct RankingOpts {
    /// How tied values receive distinct ranks.
    #[arg(long, value_enum, default_value = "first")]
    tie_break: TieBreak,
}

#[derive(Debug, Args)]
struct GridOpts {
    #[arg(long)]
    grid_from: Option<f64>,
    #[arg(long)]
    grid_to: Option<f64>,
    #[arg(long)]
    grid_step: Option<f64>,
    /// Worker threads (defaults to $RANKLOSS_JOBS, then the number of CPUs).
    #[arg(long)]
    jobs: Option<usize>,
    /// Output prefix: writes PREFIX.metrics.csv and PREFIX.spearman.csv.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write PREFIX.json (requires --out).
    #[arg(long, requires = "out")]
    json: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Column-wise ranks of a dataset.
    Rank {
        input: PathBuf,
        #[command(flatten)]
        input_opts: InputOpts,
        #[command(flatten)]
        ranking: RankingOpts,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// All information-loss metrics between an original and a masked file.
    Metrics {
        original: PathBuf,
        masked: PathBuf,
        #[command(flatten)]
        input_opts: InputOpts,
        #[command(flatten)]
        ranking: RankingOpts,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Mask a dataset with one method and parameter.
    Mask {
        input: PathBuf,
        /// mdav, noise, noise-correlated or rankswap.
        #[arg(long)]
        method: String,
        /// Group size k, noise percentage, or swap fraction P.
        #[arg(long)]
        param: f64,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        input_opts: InputOpts,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep a parameter grid and correlate the metrics with it.
    Grid {
        input: PathBuf,
        #[arg(long)]
        method: String,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        input_opts: InputOpts,
        #[command(flatten)]
        ranking: RankingOpts,
        #[command(flatten)]
        grid: GridOpts,
    },
    /// Repeat a stochastic grid sweep with independent seeds.
    Replicate {
        input: PathBuf,
        #[arg(long)]
        method: String,
        #[arg(long)]
        count: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        input_opts: InputOpts,
        #[command(flatten)]
        ranking: RankingOpts,
        #[command(flatten)]
        grid: GridOpts,
    },
    /// Rank distances of permutations from the identity vector.
    Oracle {
        #[arg(long)]
        n: usize,
        /// Draw this many random permutations instead of enumerating all n!.
        #[arg(long)]
        sample: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Runtime(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Runtime(e)
    }
}

type CliResult<T = ()> = Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn io_err(path: &Path) -> impl Fn(io::Error) -> CliError + '_ {
    move |e| CliError::Runtime(Error::io(path, e))
}

fn require_seed(seed: Option<u64>, what: &str) -> CliResult<u64> {
    seed.ok_or_else(|| usage(format!("--seed is required for {what}")))
}

fn parse_method(s: &str) -> CliResult<Method> {
    s.parse().map_err(|e: Error| usage(e.to_string()))
}

fn policy(ranking: &RankingOpts, seed: Option<u64>) -> CliResult<TieBreakPolicy> {
    match ranking.tie_break {
        TieBreak::First => Ok(TieBreakPolicy::FirstOccurrence),
        TieBreak::Random => Ok(TieBreakPolicy::SeededRandom(require_seed(
            seed,
            "--tie-break random",
        )?)),
    }
}

/// Opens `--out` or stdout.
fn sink(out: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(File::create(path).map_err(io_err(path))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_to(out: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> CliResult {
    let mut w = sink(out)?;
    let label = out.unwrap_or(Path::new("<stdout>"));
    f(&mut w).map_err(io_err(label))?;
    w.flush().map_err(io_err(label))
}

fn load(path: &Path, opts: &InputOpts) -> CliResult<NumericMatrix> {
    Ok(load_csv(&opts.source(path))?)
}

fn build_grid(method: Method, opts: &GridOpts) -> CliResult<GridSpec> {
    let default = default_grid(method);
    if opts.grid_from.is_none() && opts.grid_to.is_none() && opts.grid_step.is_none() {
        return Ok(default);
    }
    let first = default.values[0];
    let step = opts
        .grid_step
        .unwrap_or_else(|| default.values.get(1).map_or(1.0, |v| v - first));
    let from = opts.grid_from.unwrap_or(first);
    let to = opts.grid_to.unwrap_or(*default.values.last().unwrap());
    GridSpec::range(method, from, to, step).map_err(|e| usage(e.to_string()))
}

fn describe_grid(grid: &GridSpec) -> String {
    format!(
        "{} values from {} to {}",
        grid.len(),
        grid.values[0],
        grid.values[grid.len() - 1]
    )
}

fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> CliResult<T> {
    let jobs = match jobs {
        Some(j) => j,
        None => match std::env::var(JOBS_ENV) {
            Ok(v) => v
                .parse()
                .map_err(|_| usage(format!("{JOBS_ENV} must be a non-negative integer, got '{v}'")))?,
            Err(_) => 0,
        },
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| usage(format!("cannot start {jobs} workers: {e}")))?;
    Ok(pool.install(f))
}

fn suffixed(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn emit_experiment(output: ExperimentOutput<'_>, opts: &GridOpts) -> CliResult {
    match &opts.out {
        Some(prefix) => {
            let metrics = suffixed(prefix, ".metrics.csv");
            let summary = suffixed(prefix, ".spearman.csv");
            write_experiment_csv(output, &metrics, &summary)?;
            eprintln!("wrote {} and {}", metrics.display(), summary.display());
            if opts.json {
                let path = suffixed(prefix, ".json");
                let file = File::create(&path).map_err(io_err(&path))?;
                write_experiment_json(output, BufWriter::new(file))?;
                eprintln!("wrote {}", path.display());
            }
            Ok(())
        }
        None => write_to(None, |w| write_metrics_csv(output, w)),
    }
}

fn print_correlations(result: &crate::types::ExperimentResult) {
    for (m, r) in &result.spearman_vs_grid {
        match r {
            Some(r) => eprintln!("  spearman({m}, grid) = {r:.4}"),
            None => eprintln!("  spearman({m}, grid) = undefined"),
        }
    }
}

fn cmd_rank(
    input: &Path,
    input_opts: &InputOpts,
    ranking: &RankingOpts,
    seed: Option<u64>,
    out: Option<&Path>,
) -> CliResult {
    let data = load(input, input_opts)?;
    let ranks = rank_matrix(&data, policy(ranking, seed)?)?;
    let mut w = sink(out)?;
    write_rank_csv(&ranks, data.column_names(), !input_opts.no_header, &mut w)?;
    Ok(())
}

fn cmd_metrics(
    original: &Path,
    masked: &Path,
    input_opts: &InputOpts,
    ranking: &RankingOpts,
    seed: Option<u64>,
    out: Option<&Path>,
) -> CliResult {
    let a = load(original, input_opts)?;
    let b = load(masked, input_opts)?;
    if a.shape() != b.shape() {
        return Err(usage(format!(
            "shape mismatch: {} is {}x{}, {} is {}x{}",
            original.display(),
            a.n(),
            a.p(),
            masked.display(),
            b.n(),
            b.p()
        )));
    }
    let report = full_report(&a, &b, policy(ranking, seed)?)?;
    for m in Metric::ALL {
        eprintln!("{:>6} = {}", m.name(), report.get(m));
    }
    eprintln!("il1 skipped cells = {}", report.il1_skipped_cells);
    write_to(out, |w| write_report_csv(&report, w))
}

fn cmd_mask(
    input: &Path,
    method: &str,
    param: f64,
    seed: Option<u64>,
    input_opts: &InputOpts,
    out: Option<&Path>,
) -> CliResult {
    let method = parse_method(method)?;
    let seed = if method.is_stochastic() {
        require_seed(seed, &format!("method {method}"))?
    } else {
        seed.unwrap_or(0)
    };
    let data = load(input, input_opts)?;
    let spec = PerturbationSpec::new(method, param, seed);
    spec.validate(data.n()).map_err(|e| usage(e.to_string()))?;
    let masked = perturb::apply(&data, &spec)?;
    eprintln!("{spec}");
    let mut w = sink(out)?;
    write_matrix_csv(&masked, !input_opts.no_header, &mut w)?;
    Ok(())
}

fn cmd_grid(
    input: &Path,
    method: &str,
    seed: Option<u64>,
    input_opts: &InputOpts,
    ranking: &RankingOpts,
    grid_opts: &GridOpts,
) -> CliResult {
    let method = parse_method(method)?;
    let seed = if method.is_stochastic() {
        require_seed(seed, &format!("method {method}"))?
    } else {
        seed.unwrap_or(0)
    };
    let policy = policy(ranking, Some(seed))?;
    let grid = build_grid(method, grid_opts)?;
    let data = load(input, input_opts)?;
    eprintln!("grid: method={method} seed={seed} {}", describe_grid(&grid));
    let result = with_jobs(grid_opts.jobs, || run_grid(&data, &grid, seed, policy))??;
    print_correlations(&result);
    emit_experiment((&result).into(), grid_opts)
}

#[allow(clippy::too_many_arguments)]
fn cmd_replicate(
    input: &Path,
    method: &str,
    count: usize,
    seed: Option<u64>,
    input_opts: &InputOpts,
    ranking: &RankingOpts,
    grid_opts: &GridOpts,
) -> CliResult {
    let method = parse_method(method)?;
    if !method.is_stochastic() {
        return Err(usage(format!(
            "{method} is deterministic; replication rejected (use `grid` instead)"
        )));
    }
    if count == 0 {
        return Err(usage("--count must be at least 1"));
    }
    let seed = require_seed(seed, "replicate")?;
    let policy = policy(ranking, Some(seed))?;
    let grid = build_grid(method, grid_opts)?;
    let data = load(input, input_opts)?;
    eprintln!(
        "replicate: method={method} seed={seed} count={count} {}",
        describe_grid(&grid)
    );
    let summary = with_jobs(grid_opts.jobs, || replicate(&data, &grid, count, seed, policy))??;
    for (m, values) in &summary.correlation_distributions {
        let mut defined: Vec<f64> = values.iter().flatten().copied().collect();
        defined.sort_by(f64::total_cmp);
        if defined.is_empty() {
            eprintln!("  {m}: all correlations undefined");
        } else {
            eprintln!(
                "  {m}: median spearman {:.4} over {} replications (min {:.4})",
                defined[defined.len() / 2],
                defined.len(),
                defined[0]
            );
        }
    }
    emit_experiment((&summary).into(), grid_opts)
}

fn cmd_oracle(n: usize, sample: Option<usize>, seed: Option<u64>, out: Option<&Path>) -> CliResult {
    let records = match sample {
        Some(count) => {
            let seed = require_seed(seed, "--sample")?;
            sample_permutation_distances(n, count, seed).map_err(|e| usage(e.to_string()))?
        }
        None => {
            if !(2..=MAX_ENUMERATION_N).contains(&n) {
                return Err(usage(format!(
                    "full enumeration needs 2 <= n <= {MAX_ENUMERATION_N}; use --sample for larger n"
                )));
            }
            enumerate_permutation_distances(n)?
        }
    };
    let (abs, sq) = distinct_value_counts(&records)?;
    eprintln!(
        "{} permutations; {abs} distinct absolute distances, {sq} distinct squared distances",
        records.len()
    );
    write_to(out, |w| write_permutation_csv(&records, w))
}

fn dispatch(cli: Cli) -> CliResult {
    match &cli.command {
        Command::Rank {
            input,
            input_opts,
            ranking,
            seed,
            out,
        } => cmd_rank(input, input_opts, ranking, *seed, out.as_deref()),
        Command::Metrics {
            original,
            masked,
            input_opts,
            ranking,
            seed,
            out,
        } => cmd_metrics(original, masked, input_opts, ranking, *seed, out.as_deref()),
        Command::Mask {
            input,
            method,
            param,
            seed,
            input_opts,
            out,
        } => cmd_mask(input, method, *param, *seed, input_opts, out.as_deref()),
        Command::Grid {
            input,
            method,
            seed,
            input_opts,
            ranking,
            grid,
        } => cmd_grid(input, method, *seed, input_opts, ranking, grid),
        Command::Replicate {
            input,
            method,
            count,
            seed,
            input_opts,
            ranking,
            grid,
        } => cmd_replicate(input, method, *count, *seed, input_opts, ranking, grid),
        Command::Oracle {
            n,
            sample,
            seed,
            out,
        } => cmd_oracle(*n, *sample, *seed, out.as_deref()),
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(CliError::Runtime(e)) => {
            eprintln!("error: {e}");
            1
        }
    }
}
