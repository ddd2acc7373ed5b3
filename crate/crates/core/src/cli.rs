//! Command-line front end behind the `gkm` binary.
//!
//! [`run`] parses arguments, dispatches to a subcommand, writes metrics to
//! `out` and diagnostics to `err`, and returns the process exit code:
//! 0 on success, 1 for runtime or numerical failures, 2 for usage,
//! configuration, and file problems.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::config::{AssignOrder, InitScheme, TrainConfig};
use crate::data::DataMatrix;
use crate::distortion::relative_distortion;
use crate::encode::encode;
use crate::error::{Error, Result};
use crate::init::init_random;
use crate::io::{
    read_bvecs, read_codes, read_fvecs, read_ivecs, read_model, write_codes, write_ivecs,
    write_model, IntMatrix,
};
use crate::model::Model;
use crate::search::{exact_nn, precompute_norms, recall_at, search_batch};
use crate::trainer::{evaluate, fit};

#[derive(Debug, Parser)]
#[command(
    name = "gkm",
    version,
    about = "Additive multi-dictionary vector quantization"
)]
pub struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Learn dictionaries and write a model file.
    Train(TrainArgs),
    /// Encode vectors with a trained model.
    Encode(EncodeArgs),
    /// Print the relative distortion of a model on a dataset.
    Eval(EvalArgs),
    /// Rank encoded points for each query and write the top ids.
    Search(SearchArgs),
    /// Recall@{1,10,100} of search results against ground truth.
    Recall(RecallArgs),
    /// Exact nearest neighbours, written as ground truth.
    Gt(GtArgs),
    /// Time encoding for several dictionary counts.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Training vectors (.fvecs or .bvecs).
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub dicts: usize,
    #[arg(long, default_value_t = 256)]
    pub words: usize,
    #[arg(long, default_value = "1")]
    pub order: AssignOrder,
    #[arg(long, default_value = "kmeans")]
    pub init: InitScheme,
    #[arg(long, default_value_t = 100)]
    pub iters: usize,
    #[arg(long, default_value_t = 10)]
    pub sweeps: usize,
    #[arg(long, default_value_t = 1e-4)]
    pub tol: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub ridge: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Iterations of each initialization sub-run.
    #[arg(long, default_value_t = 30)]
    pub init_iters: usize,
    /// Move unused codewords onto badly reconstructed points.
    #[arg(long)]
    pub reseed_empty: bool,
    #[arg(long)]
    pub out: PathBuf,
    /// CSV file for `iteration,relative_distortion`.
    #[arg(long)]
    pub history: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Assignment order; defaults to the model's training order.
    #[arg(long)]
    pub order: Option<AssignOrder>,
    #[arg(long, default_value_t = 10)]
    pub sweeps: usize,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub order: Option<AssignOrder>,
    #[arg(long, default_value_t = 10)]
    pub sweeps: usize,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub codes: PathBuf,
    #[arg(long)]
    pub queries: PathBuf,
    /// Results per query.
    #[arg(long, default_value_t = 100)]
    pub topk: usize,
    /// Output .ivecs file, one ranked id list per query.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RecallArgs {
    /// Search results (.ivecs).
    #[arg(long)]
    pub results: PathBuf,
    /// Ground truth (.ivecs); the first id of each row is the nearest neighbour.
    #[arg(long)]
    pub groundtruth: PathBuf,
}

#[derive(Debug, Args)]
pub struct GtArgs {
    #[arg(long)]
    pub queries: PathBuf,
    #[arg(long)]
    pub base: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Vectors to encode (.fvecs or .bvecs).
    #[arg(long)]
    pub data: PathBuf,
    /// Dictionary counts to time.
    #[arg(long, value_delimiter = ',', default_value = "2,4,8")]
    pub dicts: Vec<usize>,
    #[arg(long, default_value_t = 256)]
    pub words: usize,
    #[arg(long, default_value = "1")]
    pub order: AssignOrder,
    #[arg(long, default_value_t = 10)]
    pub sweeps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Timed runs per setting; the fastest is reported.
    #[arg(long, default_value_t = 3)]
    pub repeats: usize,
}

/// One row of [`bench_encoding`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchRow {
    pub num_dicts: usize,
    pub micros_per_point: f64,
    pub relative_distortion: f64,
}

/// Encoding time per point for each dictionary count, using dictionaries
/// sampled from `data`.
pub fn bench_encoding(
    data: &DataMatrix,
    dicts: &[usize],
    num_words: usize,
    order: AssignOrder,
    sweeps: usize,
    seed: u64,
    repeats: usize,
) -> Result<Vec<BenchRow>> {
    dicts
        .iter()
        .map(|&c| {
            let cb = init_random(data, c, num_words, seed, true)?;
            let model = Model::new(cb, TrainConfig::new(c, num_words));
            let mut best = f64::INFINITY;
            let mut codes = None;
            for _ in 0..repeats.max(1) {
                let start = Instant::now();
                let out = encode(data, &model, order, sweeps)?;
                best = best.min(start.elapsed().as_secs_f64());
                codes = Some(out);
            }
            let codes = codes.expect("at least one repeat");
            Ok(BenchRow {
                num_dicts: c,
                micros_per_point: best * 1e6 / data.rows() as f64,
                relative_distortion: relative_distortion(data, &model.codebooks, &codes)?,
            })
        })
        .collect()
}

/// Reads `.bvecs` by extension, anything else as `.fvecs`.
pub fn read_vectors(path: &Path) -> Result<DataMatrix> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("bvecs") => read_bvecs(path),
        _ => read_fvecs(path),
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Numerical(_)
        | Error::DegenerateMetric
        | Error::Capacity(_)
        | Error::InsufficientData { .. }
        | Error::Contract(_) => 1,
        Error::DimensionMismatch { .. }
        | Error::Unsupported(_)
        | Error::Config(_)
        | Error::EmptyDataset
        | Error::Format { .. }
        | Error::Io(_) => 2,
    }
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                write!(out, "{text}")
            } else {
                write!(err, "{text}")
            };
            return code;
        }
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.threads {
        if t == 0 {
            let _ = writeln!(err, "error: --threads must be >= 1");
            return 2;
        }
        builder = builder.num_threads(t);
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: cannot start worker threads: {e}");
            return 1;
        }
    };
    let mut buffer = Vec::new();
    let result = pool.install(|| dispatch(cli.command, &mut buffer));
    let _ = out.write_all(&buffer);
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(command: Command, out: &mut Vec<u8>) -> Result<()> {
    match command {
        Command::Train(a) => cmd_train(a, out),
        Command::Encode(a) => cmd_encode(a, out),
        Command::Eval(a) => cmd_eval(a, out),
        Command::Search(a) => cmd_search(a, out),
        Command::Recall(a) => cmd_recall(a, out),
        Command::Gt(a) => cmd_gt(a, out),
        Command::Bench(a) => cmd_bench(a, out),
    }
}

fn cmd_train(a: TrainArgs, out: &mut dyn Write) -> Result<()> {
    let config = TrainConfig {
        num_dicts: a.dicts,
        num_words: a.words,
        order: a.order,
        init: a.init,
        max_outer_iters: a.iters,
        max_inner_sweeps: a.sweeps,
        rel_tol: a.tol,
        ridge: a.ridge,
        seed: a.seed,
        init_iters: a.init_iters,
        scale_random_init: true,
        reseed_empty: a.reseed_empty,
    };
    config.validate()?;
    let data = read_vectors(&a.data)?;
    let (model, report) = fit(&data, &config)?;
    write_model(&a.out, &model)?;
    if let Some(path) = &a.history {
        let mut csv = String::from("iteration,relative_distortion\n");
        for (i, d) in report.history.iter().enumerate() {
            csv.push_str(&format!("{i},{d:?}\n"));
        }
        std::fs::write(path, csv)?;
    }
    writeln!(
        out,
        "iterations {} ({}), relative distortion {:.6}",
        report.iterations,
        report.reason,
        report.history.last().copied().unwrap_or(f64::NAN)
    )?;
    Ok(())
}

fn cmd_encode(a: EncodeArgs, out: &mut dyn Write) -> Result<()> {
    let model = read_model(&a.model)?;
    let data = read_vectors(&a.data)?;
    let order = a.order.unwrap_or(model.config.order);
    let codes = encode(&data, &model, order, a.sweeps)?;
    write_codes(&a.out, &codes)?;
    writeln!(out, "encoded {} points", codes.rows())?;
    Ok(())
}

fn cmd_eval(a: EvalArgs, out: &mut dyn Write) -> Result<()> {
    let model = read_model(&a.model)?;
    let data = read_vectors(&a.data)?;
    let order = a.order.unwrap_or(model.config.order);
    let (_, d) = evaluate(&data, &model, order, a.sweeps)?;
    writeln!(out, "relative distortion (x1e-2): {:.2}", d * 100.0)?;
    Ok(())
}

fn to_ids(rows: &[Vec<usize>], width: usize) -> Result<IntMatrix> {
    let mut values = Vec::with_capacity(rows.len() * width);
    for r in rows {
        for &id in r {
            values.push(
                i32::try_from(id).map_err(|_| Error::Capacity(format!("id {id} exceeds i32")))?,
            );
        }
    }
    Ok(IntMatrix {
        rows: rows.len(),
        dims: width,
        values,
    })
}

fn cmd_search(a: SearchArgs, out: &mut dyn Write) -> Result<()> {
    let model = read_model(&a.model)?;
    let codes = read_codes(&a.codes)?;
    let queries = read_vectors(&a.queries)?;
    if a.topk == 0 {
        return Err(Error::Config("--topk must be >= 1".into()));
    }
    let norms = precompute_norms(&model, &codes)?;
    let rankings = search_batch(&queries, &model, &codes, &norms, a.topk)?;
    write_ivecs(&a.out, &to_ids(&rankings, a.topk)?)?;
    writeln!(out, "searched {} queries", queries.rows())?;
    Ok(())
}

fn cmd_recall(a: RecallArgs, out: &mut dyn Write) -> Result<()> {
    let results = read_ivecs(&a.results)?;
    let gt = read_ivecs(&a.groundtruth)?;
    if results.rows != gt.rows {
        return Err(Error::Config(format!(
            "{} result rows but {} ground-truth rows",
            results.rows, gt.rows
        )));
    }
    let as_id = |v: i32| -> Result<usize> {
        usize::try_from(v).map_err(|_| Error::Config(format!("negative id {v}")))
    };
    let rankings: Vec<Vec<usize>> = (0..results.rows)
        .map(|i| results.row(i).iter().map(|&v| as_id(v)).collect())
        .collect::<Result<_>>()?;
    let truth: Vec<usize> = (0..gt.rows)
        .map(|i| as_id(gt.row(i)[0]))
        .collect::<Result<_>>()?;
    for r in [1, 10, 100] {
        if r <= results.dims {
            writeln!(out, "recall@{r} {:.4}", recall_at(&rankings, &truth, r)?)?;
        } else {
            writeln!(
                out,
                "recall@{r} n/a (only {} results per query)",
                results.dims
            )?;
        }
    }
    Ok(())
}

fn cmd_gt(a: GtArgs, out: &mut dyn Write) -> Result<()> {
    let queries = read_vectors(&a.queries)?;
    let base = read_vectors(&a.base)?;
    let nn = exact_nn(&queries, &base)?;
    let rows: Vec<Vec<usize>> = nn.into_iter().map(|i| vec![i]).collect();
    write_ivecs(&a.out, &to_ids(&rows, 1)?)?;
    writeln!(out, "wrote {} neighbours", rows.len())?;
    Ok(())
}

fn cmd_bench(a: BenchArgs, out: &mut dyn Write) -> Result<()> {
    let data = read_vectors(&a.data)?;
    let rows = bench_encoding(
        &data, &a.dicts, a.words, a.order, a.sweeps, a.seed, a.repeats,
    )?;
    for r in rows {
        writeln!(
            out,
            "C={} K={} order={} us_per_point={:.3} relative_distortion={:.6}",
            r.num_dicts, a.words, a.order, r.micros_per_point, r.relative_distortion
        )?;
    }
    Ok(())
}
