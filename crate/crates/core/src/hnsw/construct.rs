use rand_chacha::ChaCha8Rng;

use super::graph::{assign_level, HnswGraph};
use super::search::{greedy_closest, search_layer_scored, Visited};
use super::{HnswConfig, Pruning};
use crate::dataset::Dataset;
use crate::query_eval::{Evaluate, QueryEvaluator, Scored};
use crate::vectors::{
    dot_sparse_unchecked, dot_unchecked, squared_l2_unchecked, Measure, VectorRef,
};

/// Score between two stored items using their original representations.
#[inline]
pub(crate) fn raw_pair_score(ds: &Dataset, measure: Measure, a: u32, b: u32) -> f32 {
    match (ds.raw_unchecked(a as usize), ds.raw_unchecked(b as usize)) {
        (VectorRef::Dense(x), VectorRef::Dense(y)) => match measure {
            Measure::SquaredL2 => squared_l2_unchecked(x, y),
            Measure::InnerProduct => dot_unchecked(x, y),
        },
        (VectorRef::Sparse(x), VectorRef::Sparse(y)) => dot_sparse_unchecked(x, y),
        _ => unreachable!("dataset mixes vector kinds"),
    }
}

/// Picks up to `max` neighbors from `candidates` (best-first, scored
/// against the base point). A candidate is kept only if it is closer to the
/// base than to every neighbor kept before it; leftover capacity is filled
/// with the best rejected candidates.
pub fn select_neighbors_heuristic(
    candidates: &[(u32, f32)],
    max: usize,
    measure: Measure,
    pair_score: impl Fn(u32, u32) -> f32,
) -> Vec<u32> {
    let mut kept: Vec<u32> = Vec::with_capacity(max);
    let mut rejected: Vec<u32> = Vec::new();
    for &(c, to_base) in candidates {
        if kept.len() >= max {
            break;
        }
        let occluded = kept
            .iter()
            .any(|&r| measure.better(pair_score(c, r), to_base));
        if occluded {
            rejected.push(c);
        } else {
            kept.push(c);
        }
    }
    for r in rejected {
        if kept.len() >= max {
            break;
        }
        kept.push(r);
    }
    kept
}

/// Incremental graph builder. The level of node `id` is the `id`-th draw of
/// one seeded stream, so it depends only on the seed and the id.
#[derive(Debug)]
pub(crate) struct Builder {
    rng: ChaCha8Rng,
    visited: Visited,
}

impl Builder {
    pub fn new(seed: u64) -> Self {
        use rand::SeedableRng;
        Builder {
            rng: ChaCha8Rng::seed_from_u64(seed),
            visited: Visited::default(),
        }
    }

    /// Links dataset item `id` (the next id the graph has not seen) into
    /// the graph. All scores come from original vectors.
    pub fn insert(
        &mut self,
        graph: &mut HnswGraph,
        ds: &Dataset,
        id: u32,
        measure: Measure,
        cfg: &HnswConfig,
    ) {
        debug_assert_eq!(id as usize, graph.len());
        // each draw consumes two 32-bit words of the stream
        self.rng.set_word_pos(id as u128 * 2);
        let level = assign_level(&mut self.rng, cfg.ml);
        graph.add_node(level);

        let Some(ep) = graph.entry_point() else {
            graph.set_entry(id, level);
            return;
        };
        let top = graph.max_level();
        let eval = QueryEvaluator::for_raw_item(ds, id as usize, measure);
        let mut current = Scored::new(measure, ep, eval.eval(ep));
        for l in (level + 1..=top).rev() {
            current = greedy_closest(graph, &eval, current, l);
        }

        let mut entries = vec![current];
        for l in (0..=level.min(top)).rev() {
            let found = search_layer_scored(
                graph,
                &eval,
                &entries,
                cfg.ef_construction,
                l,
                &mut self.visited,
            );
            let scored: Vec<(u32, f32)> = found.iter().map(|s| (s.id, s.score)).collect();
            let cap = graph.capacity(l);
            let chosen = select_neighbors_heuristic(&scored, cap, measure, |a, b| {
                raw_pair_score(ds, measure, a, b)
            });
            graph.set_neighbors(id, l, &chosen);
            for &nb in &chosen {
                if !graph.try_push_neighbor(nb, l, id) {
                    self.shrink(graph, ds, nb, id, l, measure, cfg.pruning);
                }
            }
            entries = found;
        }

        if level > top {
            graph.set_entry(id, level);
        }
    }

    /// `node`'s list at `level` is full; decide which links survive once
    /// `extra` is offered as well.
    #[allow(clippy::too_many_arguments)]
    fn shrink(
        &mut self,
        graph: &mut HnswGraph,
        ds: &Dataset,
        node: u32,
        extra: u32,
        level: usize,
        measure: Measure,
        pruning: Pruning,
    ) {
        let mut scored: Vec<Scored> = graph
            .neighbors(node, level)
            .iter()
            .chain(std::iter::once(&extra))
            .map(|&nb| Scored::new(measure, nb, raw_pair_score(ds, measure, node, nb)))
            .collect();
        scored.sort_unstable();
        let cap = graph.capacity(level);
        let kept: Vec<u32> = match pruning {
            Pruning::Heuristic => {
                let pairs: Vec<(u32, f32)> = scored.iter().map(|s| (s.id, s.score)).collect();
                select_neighbors_heuristic(&pairs, cap, measure, |a, b| {
                    raw_pair_score(ds, measure, a, b)
                })
            }
            Pruning::Nearest => scored.iter().take(cap).map(|s| s.id).collect(),
        };
        graph.set_neighbors(node, level, &kept);
    }
}
