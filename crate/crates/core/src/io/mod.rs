//! File formats, ground truth and the recall/throughput benchmark.

pub mod bench;
pub mod formats;
pub mod ground_truth;

pub use bench::{bench_sweep, recall_at_k, write_csv, BenchmarkRecord};
pub use formats::{
    read_fvecs, read_fvecs_limit, read_ivecs, read_ivecs_limit, read_sparse_csr, write_fvecs,
    write_ivecs, write_sparse_csr, Matrix, SparseMatrix,
};
pub use ground_truth::compute_ground_truth;
