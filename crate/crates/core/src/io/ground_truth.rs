use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::par::Exec;
use crate::query_eval::{Evaluate, QueryEvaluator, TopK};
use crate::vectors::{Measure, VectorRef};

/// Exact top-`k` ids for every query by exhaustive scan. Ties go to the
/// lower id. Queries are independent and fan out under [`Exec::Parallel`].
pub fn compute_ground_truth(
    base: &Dataset,
    queries: &[VectorRef<'_>],
    k: usize,
    measure: Measure,
    exec: Exec,
) -> Result<Vec<Vec<u32>>> {
    if base.is_quantized() {
        return Err(Error::invalid(
            "ground truth needs exact scores; dataset is quantized",
        ));
    }
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    exec.map(queries, |q| {
        let eval = QueryEvaluator::new(*q, base, measure)?;
        let mut acc = TopK::new(k, measure)?;
        for id in 0..base.len() as u32 {
            acc.push(id, eval.eval(id));
        }
        Ok(acc.finalize().ids())
    })
    .into_iter()
    .collect()
}
