use std::cell::RefCell;
use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::graph::HnswGraph;
use crate::query_eval::{Evaluate, Scored};

/// Epoch-stamped visited set, reused across searches on one thread.
#[derive(Debug, Default)]
pub(crate) struct Visited {
    marks: Vec<u32>,
    epoch: u32,
}

impl Visited {
    pub fn reset(&mut self, n: usize) {
        if self.marks.len() < n {
            self.marks.resize(n, 0);
        }
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.marks.iter_mut().for_each(|m| *m = 0);
            self.epoch = 1;
        }
    }

    /// Marks `id`; returns `true` if it was not yet visited.
    #[inline]
    pub fn insert(&mut self, id: u32) -> bool {
        let slot = &mut self.marks[id as usize];
        if *slot == self.epoch {
            false
        } else {
            *slot = self.epoch;
            true
        }
    }
}

thread_local! {
    static VISITED: RefCell<Visited> = RefCell::new(Visited::default());
}

pub(crate) fn with_visited<R>(f: impl FnOnce(&mut Visited) -> R) -> R {
    VISITED.with(|v| f(&mut v.borrow_mut()))
}

/// Beam-1 descent on one level: move to the best neighbor until no
/// neighbor improves on the current node.
pub(crate) fn greedy_closest<E: Evaluate>(
    graph: &HnswGraph,
    eval: &E,
    mut current: Scored,
    level: usize,
) -> Scored {
    let measure = eval.measure();
    loop {
        let mut moved = false;
        for &nb in graph.neighbors(current.id, level) {
            let cand = Scored::new(measure, nb, eval.eval(nb));
            if cand < current {
                current = cand;
                moved = true;
            }
        }
        if !moved {
            return current;
        }
    }
}

/// Best-first beam search on one level, keeping at most `ef` results.
/// Returns the retained results best-first.
pub(crate) fn search_layer_scored<E: Evaluate>(
    graph: &HnswGraph,
    eval: &E,
    entries: &[Scored],
    ef: usize,
    level: usize,
    visited: &mut Visited,
) -> Vec<Scored> {
    let measure = eval.measure();
    visited.reset(graph.len());
    let mut candidates: BinaryHeap<Reverse<Scored>> = BinaryHeap::with_capacity(ef * 2);
    let mut results: BinaryHeap<Scored> = BinaryHeap::with_capacity(ef + 1);

    for &e in entries {
        if visited.insert(e.id) {
            candidates.push(Reverse(e));
            results.push(e);
            if results.len() > ef {
                results.pop();
            }
        }
    }

    while let Some(Reverse(best)) = candidates.pop() {
        if results.len() >= ef && best > *results.peek().expect("results non-empty") {
            break;
        }
        for &nb in graph.neighbors(best.id, level) {
            if !visited.insert(nb) {
                continue;
            }
            let cand = Scored::new(measure, nb, eval.eval(nb));
            if results.len() < ef || cand < *results.peek().expect("results non-empty") {
                candidates.push(Reverse(cand));
                results.push(cand);
                if results.len() > ef {
                    results.pop();
                }
            }
        }
    }
    results.into_sorted_vec()
}

/// Runs the level search from the given entry ids and returns `(id, score)`
/// pairs best-first.
pub fn search_layer<E: Evaluate>(
    graph: &HnswGraph,
    eval: &E,
    entries: &[u32],
    ef: usize,
    level: usize,
) -> Vec<(u32, f32)> {
    let measure = eval.measure();
    let entries: Vec<Scored> = entries
        .iter()
        .map(|&id| Scored::new(measure, id, eval.eval(id)))
        .collect();
    with_visited(|v| search_layer_scored(graph, eval, &entries, ef.max(1), level, v))
        .into_iter()
        .map(|s| (s.id, s.score))
        .collect()
}

/// Full query: greedy descent through the upper levels, then a beam of
/// width `ef` on level 0. Returns up to `ef` candidates best-first.
pub(crate) fn search_graph<E: Evaluate>(graph: &HnswGraph, eval: &E, ef: usize) -> Vec<Scored> {
    let Some(ep) = graph.entry_point() else {
        return Vec::new();
    };
    let measure = eval.measure();
    let mut current = Scored::new(measure, ep, eval.eval(ep));
    for level in (1..=graph.max_level()).rev() {
        current = greedy_closest(graph, eval, current, level);
    }
    with_visited(|v| search_layer_scored(graph, eval, &[current], ef, 0, v))
}
