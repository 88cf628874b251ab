//! Recall versus queries-per-second sweeps.

use std::collections::HashSet;
use std::io::Write;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::hnsw::HnswIndex;
use crate::vectors::VectorRef;

/// One point of a recall/throughput curve.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkRecord {
    pub ef: usize,
    pub k: usize,
    /// Mean recall@k over the query set.
    pub recall_at_k: f64,
    /// Queries per second, wall clock, one thread.
    pub qps: f64,
    pub mean_latency_us: f64,
}

/// `|retrieved[..k] ∩ truth[..k]| / k`.
pub fn recall_at_k(retrieved: &[u32], truth: &[u32], k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    if retrieved.len() < k || truth.len() < k {
        return Err(Error::invalid(format!(
            "recall@{k} needs {k} ids per list (got {} and {})",
            retrieved.len(),
            truth.len()
        )));
    }
    Ok(overlap(&retrieved[..k], &truth[..k]) as f64 / k as f64)
}

fn overlap(retrieved: &[u32], truth: &[u32]) -> usize {
    let truth: HashSet<u32> = truth.iter().copied().collect();
    let mut seen = HashSet::with_capacity(retrieved.len());
    retrieved
        .iter()
        .filter(|id| seen.insert(**id) && truth.contains(id))
        .count()
}

/// Runs every query at each `ef` in `ef_list`: one untimed warm-up pass,
/// then one timed pass on the calling thread.
pub fn bench_sweep(
    index: &HnswIndex,
    queries: &[VectorRef<'_>],
    truth: &[Vec<u32>],
    k: usize,
    ef_list: &[usize],
) -> Result<Vec<BenchmarkRecord>> {
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    if queries.is_empty() {
        return Err(Error::invalid("no queries to benchmark"));
    }
    if queries.len() != truth.len() {
        return Err(Error::invalid(format!(
            "{} queries but {} ground-truth rows",
            queries.len(),
            truth.len()
        )));
    }
    if let Some(row) = truth.iter().position(|t| t.len() < k) {
        return Err(Error::invalid(format!(
            "ground-truth row {row} has fewer than {k} ids"
        )));
    }
    if let Some(&ef) = ef_list.iter().find(|&&ef| ef < k) {
        return Err(Error::invalid(format!("ef = {ef} is smaller than k = {k}")));
    }
    if ef_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("ef list must be strictly increasing"));
    }

    let mut records = Vec::with_capacity(ef_list.len());
    for &ef in ef_list {
        for q in queries {
            std::hint::black_box(index.search(*q, k, ef)?);
        }
        let mut answers = Vec::with_capacity(queries.len());
        let start = Instant::now();
        for q in queries {
            answers.push(index.search(*q, k, ef)?);
        }
        let secs = start.elapsed().as_secs_f64().max(1e-9);

        let hits: usize = answers
            .iter()
            .zip(truth)
            .map(|(a, t)| overlap(&a.ids(), &t[..k]))
            .sum();
        let nq = queries.len() as f64;
        records.push(BenchmarkRecord {
            ef,
            k,
            recall_at_k: hits as f64 / (nq * k as f64),
            qps: nq / secs,
            mean_latency_us: secs * 1e6 / nq,
        });
    }
    Ok(records)
}

pub const CSV_HEADER: &str = "ef,k,recall,qps,mean_latency_us";

/// Writes `ef,k,recall,qps,mean_latency_us` rows under one header line.
pub fn write_csv<W: Write>(records: &[BenchmarkRecord], mut w: W) -> Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in records {
        writeln!(
            w,
            "{},{},{:.6},{:.3},{:.3}",
            r.ef, r.k, r.recall_at_k, r.qps, r.mean_latency_us
        )?;
    }
    Ok(())
}
