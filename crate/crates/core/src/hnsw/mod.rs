//! Hierarchical navigable small-world graph index.
//!
//! The index is generic over everything the dataset hides: dense or sparse
//! vectors, identity or product-quantized storage, squared-L2 or
//! inner-product scoring. Construction always scores original vectors; once
//! the graph is built the raw copies of a quantized dataset are dropped and
//! queries are answered from the compact codes.

mod construct;
mod graph;
mod persist;
mod search;

use std::path::Path;

pub use construct::select_neighbors_heuristic;
pub use graph::{assign_level, level_from_uniform, HnswGraph};
pub use search::search_layer;

use crate::dataset::{Dataset, VectorKind};
use crate::error::{Error, Result};
use crate::par::Exec;
use crate::query_eval::{Evaluate, QueryEvaluator, SearchResults};
use crate::vectors::{Measure, VectorRef};
use construct::Builder;

/// How an overfull neighbor list is cut back to capacity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Pruning {
    /// Re-run the neighbor selection heuristic.
    #[default]
    Heuristic,
    /// Keep the closest links only.
    Nearest,
}

/// Graph construction parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HnswConfig {
    /// Neighbor capacity on levels >= 1.
    pub m: usize,
    /// Neighbor capacity on level 0.
    pub m0: usize,
    pub ef_construction: usize,
    /// Level multiplier.
    pub ml: f64,
    pub seed: u64,
    pub pruning: Pruning,
}

impl HnswConfig {
    /// `m0 = 2m` and `ml = 1 / ln m`.
    pub fn with_m(m: usize) -> Self {
        HnswConfig {
            m,
            m0: 2 * m,
            ef_construction: 200,
            ml: 1.0 / (m.max(2) as f64).ln(),
            seed: 0,
            pruning: Pruning::Heuristic,
        }
    }

    pub fn ef_construction(mut self, ef: usize) -> Self {
        self.ef_construction = ef;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 2 {
            return Err(Error::invalid("m must be at least 2"));
        }
        if self.m0 < self.m {
            return Err(Error::invalid("m0 must be at least m"));
        }
        if self.ef_construction < self.m {
            return Err(Error::invalid("ef_construction must be at least m"));
        }
        if !(self.ml > 0.0 && self.ml.is_finite()) {
            return Err(Error::invalid("ml must be positive"));
        }
        if u32::try_from(self.m0).is_err() || u32::try_from(self.ef_construction).is_err() {
            return Err(Error::invalid("graph parameters must fit in 32 bits"));
        }
        Ok(())
    }
}

impl Default for HnswConfig {
    fn default() -> Self {
        HnswConfig::with_m(16)
    }
}

/// A graph plus the dataset it indexes.
#[derive(Debug, Clone, PartialEq)]
pub struct HnswIndex {
    config: HnswConfig,
    measure: Measure,
    graph: HnswGraph,
    dataset: Dataset,
}

impl HnswIndex {
    /// Indexes every item of `dataset` in id order, then drops the raw
    /// cache of a quantized dataset.
    pub fn build(dataset: Dataset, measure: Measure, config: HnswConfig) -> Result<Self> {
        let mut index = Self::build_retaining_raw(dataset, measure, config)?;
        index.dataset.drop_raw_cache();
        Ok(index)
    }

    /// Like [`HnswIndex::build`] but keeps the raw cache, so further items
    /// can be added with [`HnswIndex::add`].
    pub fn build_retaining_raw(
        dataset: Dataset,
        measure: Measure,
        config: HnswConfig,
    ) -> Result<Self> {
        config.validate()?;
        check_measure(&dataset, measure)?;
        if !dataset.has_raw() {
            return Err(Error::State(
                "quantized dataset has no raw vectors to build from".into(),
            ));
        }
        let mut graph = HnswGraph::new(config.m, config.m0);
        let mut builder = Builder::new(config.seed);
        for id in 0..dataset.len() as u32 {
            builder.insert(&mut graph, &dataset, id, measure, &config);
        }
        debug_assert!(graph.validate().is_ok());
        Ok(HnswIndex {
            config,
            measure,
            graph,
            dataset,
        })
    }

    /// Appends one vector and links it into the graph. Requires raw access,
    /// so a quantized index only accepts this before its cache is dropped.
    pub fn add(&mut self, v: VectorRef<'_>) -> Result<u32> {
        if !self.dataset.has_raw() {
            return Err(Error::State(
                "cannot add to a quantized index after its raw cache was dropped".into(),
            ));
        }
        let id = self.dataset.push(v)?;
        let mut builder = Builder::new(self.config.seed);
        builder.insert(
            &mut self.graph,
            &self.dataset,
            id,
            self.measure,
            &self.config,
        );
        Ok(id)
    }

    /// Releases the raw vectors of a quantized dataset.
    pub fn finish(&mut self) {
        self.dataset.drop_raw_cache();
    }

    pub fn config(&self) -> &HnswConfig {
        &self.config
    }

    pub fn measure(&self) -> Measure {
        self.measure
    }

    pub fn graph(&self) -> &HnswGraph {
        &self.graph
    }

    pub fn dataset(&self) -> &Dataset {
        &self.dataset
    }

    pub fn len(&self) -> usize {
        self.dataset.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dataset.is_empty()
    }

    /// Top-`k` answer for `query`, searching level 0 with beam width `ef`.
    pub fn search(&self, query: VectorRef<'_>, k: usize, ef: usize) -> Result<SearchResults> {
        let eval = self.evaluator(query)?;
        self.search_with(&eval, k, ef)
    }

    /// Same as [`HnswIndex::search`] with a caller-supplied evaluator.
    pub fn search_with<E: Evaluate>(&self, eval: &E, k: usize, ef: usize) -> Result<SearchResults> {
        if k == 0 {
            return Err(Error::invalid("k must be at least 1"));
        }
        if ef < k {
            return Err(Error::invalid(format!("ef = {ef} is smaller than k = {k}")));
        }
        let found = search::search_graph(&self.graph, eval, ef);
        Ok(SearchResults {
            entries: found.iter().take(k).map(|s| (s.id, s.score)).collect(),
            k,
        })
    }

    /// Searches many queries, fanning out across threads under
    /// [`Exec::Parallel`]. Results are in query order.
    pub fn search_batch(
        &self,
        queries: &[VectorRef<'_>],
        k: usize,
        ef: usize,
        exec: Exec,
    ) -> Result<Vec<SearchResults>> {
        exec.map(queries, |q| self.search(*q, k, ef))
            .into_iter()
            .collect()
    }

    /// Query evaluator bound to this index's dataset and measure.
    pub fn evaluator<'a>(&'a self, query: VectorRef<'a>) -> Result<QueryEvaluator<'a>> {
        QueryEvaluator::new(query, &self.dataset, self.measure)
    }

    /// Checks graph and dataset invariants.
    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        self.dataset.validate()?;
        self.graph.validate()?;
        if self.graph.len() != self.dataset.len() {
            return Err(Error::invalid("graph and dataset sizes differ"));
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        persist::save(self, path.as_ref())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        persist::load(path.as_ref())
    }

    pub fn write_to<W: std::io::Write>(&self, w: W) -> Result<()> {
        persist::write_index(self, w)
    }

    pub fn read_from<R: std::io::Read>(r: R) -> Result<Self> {
        persist::read_index(r)
    }

    pub(crate) fn from_parts(
        config: HnswConfig,
        measure: Measure,
        graph: HnswGraph,
        dataset: Dataset,
    ) -> Self {
        HnswIndex {
            config,
            measure,
            graph,
            dataset,
        }
    }
}

fn check_measure(ds: &Dataset, measure: Measure) -> Result<()> {
    if ds.kind() == VectorKind::Sparse && measure == Measure::SquaredL2 {
        return Err(Error::Unsupported(
            "sparse vectors are scored by inner product only".into(),
        ));
    }
    Ok(())
}
