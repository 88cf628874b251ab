//! `ann`: build, query and benchmark HNSW indexes from the command line.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use ann_core::io::{
    bench_sweep, compute_ground_truth, read_fvecs, read_ivecs, read_sparse_csr, write_csv,
    write_ivecs, Matrix,
};
use ann_core::{
    Dataset, Error, Exec, HnswConfig, HnswIndex, Measure, PqParams, SparseVector, VectorKind,
    VectorRef,
};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "ann",
    version,
    about = "HNSW approximate nearest neighbor search"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build an index from a vector file.
    Build(BuildArgs),
    /// Query an index and write the top-k hits as CSV.
    Search(SearchArgs),
    /// Sweep ef and report recall against queries per second.
    Bench(BenchArgs),
    /// Exact top-k ids by exhaustive scan, written as ivecs.
    GroundTruth(GroundTruthArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Fvecs,
    Csr,
}

#[derive(Clone, Copy, ValueEnum)]
enum Metric {
    L2,
    Ip,
}

impl From<Metric> for Measure {
    fn from(m: Metric) -> Self {
        match m {
            Metric::L2 => Measure::SquaredL2,
            Metric::Ip => Measure::InnerProduct,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum QuantizerKind {
    None,
    Pq,
}

#[derive(Args)]
struct BuildArgs {
    #[arg(long)]
    data: PathBuf,
    /// Input layout; inferred from the file extension when omitted.
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long, value_enum)]
    metric: Metric,
    #[arg(long, default_value_t = 16)]
    m: usize,
    #[arg(long, default_value_t = 200)]
    efc: usize,
    #[arg(long, value_enum, default_value = "none")]
    quantizer: QuantizerKind,
    /// Subspaces; defaults to dim / 8 (or dim / 4).
    #[arg(long)]
    pq_m: Option<usize>,
    #[arg(long, default_value_t = 256)]
    pq_ks: usize,
    #[arg(long, default_value_t = 25)]
    train_iters: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long)]
    index: PathBuf,
    #[arg(long)]
    queries: PathBuf,
    #[arg(long, default_value_t = 10)]
    k: usize,
    #[arg(long, default_value_t = 100)]
    ef: usize,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    index: PathBuf,
    #[arg(long)]
    queries: PathBuf,
    #[arg(long)]
    ground_truth: PathBuf,
    #[arg(long, default_value_t = 10)]
    k: usize,
    #[arg(long, value_delimiter = ',', default_values_t = [10, 20, 40, 80, 160])]
    ef_list: Vec<usize>,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct GroundTruthArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    queries: PathBuf,
    /// Input layout; inferred from the file extension when omitted.
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long, default_value_t = 10)]
    k: usize,
    #[arg(long, value_enum)]
    measure: Metric,
    #[arg(long)]
    output: PathBuf,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(3)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let outcome = match cli.command {
        Command::Build(a) => build(a),
        Command::Search(a) => search(a),
        Command::Bench(a) => bench(a),
        Command::GroundTruth(a) => ground_truth(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Format { .. } => 2,
        Error::InvalidArgument(_) | Error::Unsupported(_) | Error::NotFound { .. } => 3,
        Error::State(_) | Error::Io(_) => 1,
    }
}

fn infer_format(path: &Path, given: Option<Format>) -> Format {
    given.unwrap_or_else(|| match path.extension().and_then(|e| e.to_str()) {
        Some("csr") => Format::Csr,
        _ => Format::Fvecs,
    })
}

/// Vectors loaded from disk, kept in the layout the file used.
enum Vectors {
    Dense(Matrix<f32>),
    Sparse(Vec<SparseVector>),
}

impl Vectors {
    fn load(path: &Path, format: Format) -> ann_core::Result<Self> {
        Ok(match format {
            Format::Fvecs => Vectors::Dense(read_fvecs(path)?),
            Format::Csr => Vectors::Sparse(read_sparse_csr(path)?.rows),
        })
    }

    fn refs(&self) -> Vec<VectorRef<'_>> {
        match self {
            Vectors::Dense(m) => m.iter().map(VectorRef::Dense).collect(),
            Vectors::Sparse(rows) => rows.iter().map(SparseVector::as_ref).collect(),
        }
    }

    fn into_dataset(self) -> ann_core::Result<Dataset> {
        match self {
            Vectors::Dense(m) => Dataset::from_dense_rows(m.dim, &m.data),
            Vectors::Sparse(rows) => {
                let mut ds = Dataset::sparse();
                ds.reserve(rows.len());
                for r in &rows {
                    ds.push_sparse(r.view())?;
                }
                Ok(ds)
            }
        }
    }
}

/// Queries are read in the layout matching the index's vectors.
fn load_queries(index: &HnswIndex, path: &Path) -> ann_core::Result<Vectors> {
    let format = match index.dataset().kind() {
        VectorKind::Dense { .. } => Format::Fvecs,
        VectorKind::Sparse => Format::Csr,
    };
    Vectors::load(path, format)
}

fn build(a: BuildArgs) -> ann_core::Result<()> {
    let format = infer_format(&a.data, a.format);
    let vectors = Vectors::load(&a.data, format)?;
    let mut config = HnswConfig::with_m(a.m);
    config.ef_construction = a.efc;
    config.seed = a.seed;
    config.validate()?;

    let dataset = match (a.quantizer, vectors) {
        (QuantizerKind::None, v) => v.into_dataset()?,
        (QuantizerKind::Pq, Vectors::Dense(m)) => {
            let mut params = match a.pq_m {
                Some(pq_m) => PqParams::new(pq_m),
                None => PqParams::for_dim(m.dim)?,
            };
            params.ks = a.pq_ks;
            params.iters = a.train_iters;
            params.seed = a.seed;
            let t = Instant::now();
            let ds = Dataset::train_product_quantized(m.dim, &m.data, &params, Exec::default())?;
            log::info!(
                "trained pq m={} ks={} in {:.1}s",
                params.m,
                params.ks,
                t.elapsed().as_secs_f64()
            );
            ds
        }
        (QuantizerKind::Pq, Vectors::Sparse(_)) => {
            return Err(Error::Unsupported(
                "product quantization needs dense vectors".into(),
            ))
        }
    };
    let n = dataset.len();
    let t = Instant::now();
    let index = HnswIndex::build(dataset, a.metric.into(), config)?;
    log::info!("indexed {n} vectors in {:.1}s", t.elapsed().as_secs_f64());
    index.save(&a.output)
}

fn output(path: Option<&Path>) -> ann_core::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn search(a: SearchArgs) -> ann_core::Result<()> {
    let index = HnswIndex::load(&a.index)?;
    let queries = load_queries(&index, &a.queries)?;
    let results = index.search_batch(&queries.refs(), a.k, a.ef, Exec::default())?;
    let mut out = output(a.output.as_deref())?;
    writeln!(out, "query,rank,id,score")?;
    for (q, res) in results.iter().enumerate() {
        for (rank, (id, score)) in res.entries.iter().enumerate() {
            writeln!(out, "{q},{rank},{id},{score}")?;
        }
    }
    out.flush()?;
    Ok(())
}

fn bench(a: BenchArgs) -> ann_core::Result<()> {
    let index = HnswIndex::load(&a.index)?;
    let queries = load_queries(&index, &a.queries)?;
    let refs = queries.refs();
    let gt = read_ivecs(&a.ground_truth)?;
    if gt.rows() < refs.len() {
        return Err(Error::InvalidArgument(format!(
            "{} ground-truth rows for {} queries",
            gt.rows(),
            refs.len()
        )));
    }
    let truth: Vec<Vec<u32>> = gt
        .iter()
        .take(refs.len())
        .map(|row| row.iter().map(|&id| id as u32).collect())
        .collect();
    let records = bench_sweep(&index, &refs, &truth, a.k, &a.ef_list)?;
    let mut out = output(a.csv.as_deref())?;
    write_csv(&records, &mut out)?;
    out.flush()?;
    Ok(())
}

fn ground_truth(a: GroundTruthArgs) -> ann_core::Result<()> {
    let format = infer_format(&a.data, a.format);
    let base = Vectors::load(&a.data, format)?.into_dataset()?;
    let queries = Vectors::load(&a.queries, format)?;
    if base.len() < a.k {
        return Err(Error::InvalidArgument(format!(
            "k = {} exceeds the {} base vectors",
            a.k,
            base.len()
        )));
    }
    let truth = compute_ground_truth(
        &base,
        &queries.refs(),
        a.k,
        a.measure.into(),
        Exec::default(),
    )?;
    let flat: Vec<i32> = truth.iter().flatten().map(|&id| id as i32).collect();
    write_ivecs(&a.output, a.k, &flat)
}
