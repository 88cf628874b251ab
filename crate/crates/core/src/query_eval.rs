//! Per-query scoring and top-k ranking.
//!
//! A [`QueryEvaluator`] is created fresh for every query against one
//! dataset. Identity datasets are scored exactly; product-quantized datasets
//! get a distance table built once at creation and are scored by lookups.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::dataset::{Dataset, Storage};
use crate::error::{Error, Result};
use crate::quantizer::DistanceTable;
use crate::vectors::{
    check_finite, dot_sparse_unchecked, dot_unchecked, squared_l2_unchecked, Measure, SparseView,
    VectorRef,
};

/// Anything that can score dataset ids against a fixed query.
///
/// The graph search is written against this trait only.
pub trait Evaluate {
    fn measure(&self) -> Measure;

    /// Score of item `id`. Panics if `id` is out of range.
    fn eval(&self, id: u32) -> f32;
}

#[derive(Debug)]
enum Mode<'a> {
    Dense {
        query: &'a [f32],
        data: &'a [f32],
        dim: usize,
    },
    Tabled {
        table: DistanceTable,
        codes: &'a [u8],
    },
    Sparse {
        query: SparseView<'a>,
        dataset: &'a Dataset,
    },
}

/// Scores dataset items against one query.
#[derive(Debug)]
pub struct QueryEvaluator<'a> {
    measure: Measure,
    len: usize,
    mode: Mode<'a>,
}

impl<'a> QueryEvaluator<'a> {
    /// Prepares `query` against `ds`: exact scoring for identity storage,
    /// table lookups for product-quantized storage.
    pub fn new(query: VectorRef<'a>, ds: &'a Dataset, measure: Measure) -> Result<Self> {
        let mode = match (&ds.storage, query) {
            (Storage::Dense { dim, data }, VectorRef::Dense(q)) => {
                check_query(q, *dim)?;
                Mode::Dense {
                    query: q,
                    data,
                    dim: *dim,
                }
            }
            (
                Storage::Pq {
                    codebook, codes, ..
                },
                VectorRef::Dense(q),
            ) => {
                check_query(q, codebook.dim())?;
                Mode::Tabled {
                    table: codebook.distance_table(q, measure)?,
                    codes,
                }
            }
            (Storage::Sparse { .. }, VectorRef::Sparse(q)) => {
                if measure != Measure::InnerProduct {
                    return Err(Error::Unsupported(
                        "sparse vectors are scored by inner product only".into(),
                    ));
                }
                SparseView::new(q.indices, q.values)?;
                Mode::Sparse {
                    query: q,
                    dataset: ds,
                }
            }
            (Storage::Sparse { .. }, VectorRef::Dense(_)) => {
                return Err(Error::invalid("dense query against a sparse dataset"))
            }
            (_, VectorRef::Sparse(_)) => {
                return Err(Error::invalid("sparse query against a dense dataset"))
            }
        };
        Ok(QueryEvaluator {
            measure,
            len: ds.len(),
            mode,
        })
    }

    /// Exact evaluator over original vectors, with stored item `id` as the
    /// query. Used while building the graph.
    pub(crate) fn for_raw_item(ds: &'a Dataset, id: usize, measure: Measure) -> Self {
        let mode = match ds.raw_unchecked(id) {
            VectorRef::Dense(query) => {
                let (data, dim) = raw_dense(ds);
                Mode::Dense { query, data, dim }
            }
            VectorRef::Sparse(query) => Mode::Sparse { query, dataset: ds },
        };
        QueryEvaluator {
            measure,
            len: ds.len(),
            mode,
        }
    }

    pub fn is_tabled(&self) -> bool {
        matches!(self.mode, Mode::Tabled { .. })
    }

    pub fn table(&self) -> Option<&DistanceTable> {
        match &self.mode {
            Mode::Tabled { table, .. } => Some(table),
            _ => None,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Checked variant of [`Evaluate::eval`].
    pub fn try_eval(&self, id: usize) -> Result<f32> {
        if id >= self.len {
            return Err(Error::NotFound { id, len: self.len });
        }
        Ok(self.eval(id as u32))
    }
}

/// Creates the evaluator for one query.
pub fn make_evaluator<'a>(
    query: VectorRef<'a>,
    ds: &'a Dataset,
    measure: Measure,
) -> Result<QueryEvaluator<'a>> {
    QueryEvaluator::new(query, ds, measure)
}

fn raw_dense(ds: &Dataset) -> (&[f32], usize) {
    match &ds.storage {
        Storage::Dense { dim, data } => (data, *dim),
        Storage::Pq { codebook, raw, .. } => (
            raw.as_deref()
                .expect("raw cache present during construction"),
            codebook.dim(),
        ),
        Storage::Sparse { .. } => unreachable!("dense access on sparse storage"),
    }
}

fn check_query(q: &[f32], dim: usize) -> Result<()> {
    if q.len() != dim {
        return Err(Error::invalid(format!(
            "query has {} components, dataset expects {dim}",
            q.len()
        )));
    }
    check_finite(q)
}

impl Evaluate for QueryEvaluator<'_> {
    fn measure(&self) -> Measure {
        self.measure
    }

    #[inline]
    fn eval(&self, id: u32) -> f32 {
        let id = id as usize;
        match &self.mode {
            Mode::Dense { query, data, dim } => {
                let v = &data[id * dim..(id + 1) * dim];
                match self.measure {
                    Measure::SquaredL2 => squared_l2_unchecked(query, v),
                    Measure::InnerProduct => dot_unchecked(query, v),
                }
            }
            Mode::Tabled { table, codes } => {
                let m = table.m();
                table.adc_unchecked(&codes[id * m..(id + 1) * m])
            }
            Mode::Sparse { query, dataset } => {
                let VectorRef::Sparse(v) = dataset.raw_unchecked(id) else {
                    unreachable!()
                };
                dot_sparse_unchecked(*query, v)
            }
        }
    }
}

/// A scored id, ordered by orientation key then id (smaller is better).
#[derive(Debug, Clone, Copy)]
pub(crate) struct Scored {
    pub key: f32,
    pub id: u32,
    pub score: f32,
}

impl Scored {
    #[inline]
    pub fn new(measure: Measure, id: u32, score: f32) -> Self {
        Scored {
            key: measure.key(score),
            id,
            score,
        }
    }
}

impl PartialEq for Scored {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Scored {}

impl PartialOrd for Scored {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Scored {
    #[inline]
    fn cmp(&self, other: &Self) -> Ordering {
        self.key
            .total_cmp(&other.key)
            .then_with(|| self.id.cmp(&other.id))
    }
}

/// Bounded accumulator keeping the `k` best entries seen.
#[derive(Debug, Clone)]
pub struct TopK {
    k: usize,
    measure: Measure,
    // max-heap: the worst retained entry sits on top
    heap: BinaryHeap<Scored>,
}

impl TopK {
    pub fn new(k: usize, measure: Measure) -> Result<Self> {
        if k == 0 {
            return Err(Error::invalid("k must be at least 1"));
        }
        Ok(TopK {
            k,
            measure,
            heap: BinaryHeap::with_capacity(k + 1),
        })
    }

    pub fn push(&mut self, id: u32, score: f32) {
        let entry = Scored::new(self.measure, id, score);
        if self.heap.len() < self.k {
            self.heap.push(entry);
        } else if let Some(mut top) = self.heap.peek_mut() {
            if entry < *top {
                *top = entry;
            }
        }
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    /// Score of the current k-th best entry, once `k` entries are held.
    pub fn threshold(&self) -> Option<f32> {
        (self.heap.len() == self.k).then(|| self.heap.peek().map(|e| e.score))?
    }

    pub fn finalize(self) -> SearchResults {
        let entries = self
            .heap
            .into_sorted_vec()
            .into_iter()
            .map(|e| (e.id, e.score))
            .collect();
        SearchResults { entries, k: self.k }
    }
}

pub fn topk_push(acc: &mut TopK, id: u32, score: f32) {
    acc.push(id, score)
}

pub fn topk_finalize(acc: TopK) -> SearchResults {
    acc.finalize()
}

/// Best-first `(id, score)` pairs answering one query.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SearchResults {
    pub entries: Vec<(u32, f32)>,
    pub k: usize,
}

impl SearchResults {
    pub fn ids(&self) -> Vec<u32> {
        self.entries.iter().map(|e| e.0).collect()
    }

    pub fn scores(&self) -> Vec<f32> {
        self.entries.iter().map(|e| e.1).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
