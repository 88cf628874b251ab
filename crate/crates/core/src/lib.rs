//! Approximate nearest-neighbor search built from four interchangeable parts:
//! one-dimensional arrays (dense or sparse), a quantizer (identity or
//! product quantization), a per-query evaluator and a dataset that binds
//! vectors to their quantizer. A single HNSW implementation runs on top of
//! any combination of them.
//!
//! ```
//! use ann_core::{Dataset, DenseVector, HnswConfig, HnswIndex, Measure};
//!
//! let mut ds = Dataset::dense(2).unwrap();
//! for p in [[0.0, 0.0], [1.0, 0.0], [0.0, 3.0]] {
//!     ds.push_dense(&p).unwrap();
//! }
//! let index = HnswIndex::build(ds, Measure::SquaredL2, HnswConfig::default()).unwrap();
//! let q = DenseVector::new(vec![0.9, 0.1]).unwrap();
//! let hits = index.search(q.as_ref(), 1, 10).unwrap();
//! assert_eq!(hits.ids(), vec![1]);
//! ```

pub mod dataset;
pub mod error;
pub mod hnsw;
pub mod io;
pub mod par;
pub mod quantizer;
pub mod query_eval;
pub mod vectors;

pub use dataset::{Dataset, VectorKind};
pub use error::{Error, Result};
pub use hnsw::{HnswConfig, HnswGraph, HnswIndex};
pub use par::Exec;
pub use quantizer::{DistanceTable, PqCode, PqCodebook, PqParams, Quantizer};
pub use query_eval::{Evaluate, QueryEvaluator, SearchResults, TopK};
pub use vectors::{DenseVector, Measure, SparseVector, SparseView, VectorRef};
