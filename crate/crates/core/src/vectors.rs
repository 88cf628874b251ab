//! Dense and sparse one-dimensional arrays and the exact scoring kernels.
//!
//! Both kinds are viewed through [`VectorRef`], so code above this module
//! (datasets, evaluators, the graph index) never needs to know which one it
//! is holding. Scores are `f32`; the ranking direction lives in [`Measure`].

use std::cmp::Ordering;

use crate::error::{Error, Result};

const LANES: usize = 8;

/// How two vectors are compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Measure {
    /// Squared Euclidean distance; smaller is closer.
    SquaredL2,
    /// Inner product similarity; larger is closer.
    InnerProduct,
}

impl Measure {
    /// `true` when score `a` ranks strictly ahead of score `b`.
    #[inline]
    pub fn better(self, a: f32, b: f32) -> bool {
        self.key(a) < self.key(b)
    }

    /// Orientation key: smaller key means closer, whatever the measure.
    ///
    /// Used only for ordering inside heaps. Reported scores are never negated.
    #[inline]
    pub fn key(self, score: f32) -> f32 {
        // `+ 0.0` folds -0.0 into 0.0 so `total_cmp` agrees with `<`.
        match self {
            Measure::SquaredL2 => score + 0.0,
            Measure::InnerProduct => -score + 0.0,
        }
    }

    /// Best-first ordering of `(id, score)` pairs with ascending-id tie-break.
    #[inline]
    pub fn cmp_scored(self, a: (u32, f32), b: (u32, f32)) -> Ordering {
        self.key(a.1)
            .total_cmp(&self.key(b.1))
            .then_with(|| a.0.cmp(&b.0))
    }

    pub(crate) fn tag(self) -> u8 {
        match self {
            Measure::SquaredL2 => 0,
            Measure::InnerProduct => 1,
        }
    }

    pub(crate) fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(Measure::SquaredL2),
            1 => Some(Measure::InnerProduct),
            _ => None,
        }
    }
}

impl std::str::FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l2" | "squared_l2" | "euclidean" => Ok(Measure::SquaredL2),
            "ip" | "inner_product" | "dot" => Ok(Measure::InnerProduct),
            other => Err(Error::invalid(format!("unknown measure `{other}`"))),
        }
    }
}

/// A dense vector of finite `f32` components.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseVector(Vec<f32>);

impl DenseVector {
    pub fn new(values: Vec<f32>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid(
                "dense vector must have at least one component",
            ));
        }
        check_finite(&values)?;
        Ok(DenseVector(values))
    }

    pub fn values(&self) -> &[f32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f32> {
        self.0
    }

    pub fn as_ref(&self) -> VectorRef<'_> {
        VectorRef::Dense(&self.0)
    }
}

/// A sparse vector stored as sorted `(index, value)` pairs.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseVector {
    indices: Vec<u32>,
    values: Vec<f32>,
}

impl SparseVector {
    pub fn new(indices: Vec<u32>, values: Vec<f32>) -> Result<Self> {
        SparseView::new(&indices, &values)?;
        Ok(SparseVector { indices, values })
    }

    /// Builds a sparse vector from unordered pairs, sorting by index.
    /// Duplicate indices are rejected.
    pub fn from_pairs(mut pairs: Vec<(u32, f32)>) -> Result<Self> {
        pairs.sort_unstable_by_key(|p| p.0);
        let (indices, values) = pairs.into_iter().unzip();
        Self::new(indices, values)
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn view(&self) -> SparseView<'_> {
        SparseView {
            indices: &self.indices,
            values: &self.values,
        }
    }

    pub fn as_ref(&self) -> VectorRef<'_> {
        VectorRef::Sparse(self.view())
    }

    /// Expands into a dense array of length `dim`.
    pub fn to_dense(&self, dim: usize) -> Result<Vec<f32>> {
        let mut out = vec![0.0; dim];
        for (&i, &v) in self.indices.iter().zip(&self.values) {
            let slot = out
                .get_mut(i as usize)
                .ok_or_else(|| Error::invalid(format!("index {i} out of range for dim {dim}")))?;
            *slot = v;
        }
        Ok(out)
    }
}

/// Borrowed sparse vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SparseView<'a> {
    pub indices: &'a [u32],
    pub values: &'a [f32],
}

impl<'a> SparseView<'a> {
    /// Validates the sparse invariants: equal lengths, strictly increasing
    /// indices, finite nonzero values.
    pub fn new(indices: &'a [u32], values: &'a [f32]) -> Result<Self> {
        if indices.len() != values.len() {
            return Err(Error::invalid(format!(
                "sparse vector has {} indices but {} values",
                indices.len(),
                values.len()
            )));
        }
        if let Some(w) = indices.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Error::invalid(format!(
                "sparse indices not strictly increasing at position {}",
                w + 1
            )));
        }
        check_finite(values)?;
        if values.contains(&0.0) {
            return Err(Error::invalid("sparse vector stores an explicit zero"));
        }
        Ok(SparseView { indices, values })
    }

    pub(crate) fn new_unchecked(indices: &'a [u32], values: &'a [f32]) -> Self {
        SparseView { indices, values }
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn to_owned(&self) -> SparseVector {
        SparseVector {
            indices: self.indices.to_vec(),
            values: self.values.to_vec(),
        }
    }
}

/// Either kind of vector, borrowed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VectorRef<'a> {
    Dense(&'a [f32]),
    Sparse(SparseView<'a>),
}

impl VectorRef<'_> {
    pub fn is_sparse(&self) -> bool {
        matches!(self, VectorRef::Sparse(_))
    }
}

pub(crate) fn check_finite(values: &[f32]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(Error::invalid(format!(
            "non-finite component at position {i}"
        ))),
        None => Ok(()),
    }
}

fn check_dims(a: &[f32], b: &[f32]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::invalid(format!(
            "dimension mismatch: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    Ok(())
}

/// Inner product of two equal-length dense vectors.
pub fn dot_dense(a: &[f32], b: &[f32]) -> Result<f32> {
    check_dims(a, b)?;
    Ok(dot_unchecked(a, b))
}

/// Squared Euclidean distance between two equal-length dense vectors.
pub fn squared_l2(a: &[f32], b: &[f32]) -> Result<f32> {
    check_dims(a, b)?;
    Ok(squared_l2_unchecked(a, b))
}

/// Inner product of two sparse vectors by merging their sorted supports.
pub fn dot_sparse(a: SparseView<'_>, b: SparseView<'_>) -> Result<f32> {
    SparseView::new(a.indices, a.values)?;
    SparseView::new(b.indices, b.values)?;
    Ok(dot_sparse_unchecked(a, b))
}

/// Scores `a` against `b` under `measure`.
pub fn score(measure: Measure, a: VectorRef<'_>, b: VectorRef<'_>) -> Result<f32> {
    match (measure, a, b) {
        (Measure::SquaredL2, VectorRef::Dense(a), VectorRef::Dense(b)) => squared_l2(a, b),
        (Measure::InnerProduct, VectorRef::Dense(a), VectorRef::Dense(b)) => dot_dense(a, b),
        (Measure::InnerProduct, VectorRef::Sparse(a), VectorRef::Sparse(b)) => dot_sparse(a, b),
        (Measure::SquaredL2, VectorRef::Sparse(_), VectorRef::Sparse(_)) => {
            Err(Error::Unsupported("squared L2 over sparse vectors".into()))
        }
        _ => Err(Error::Unsupported("mixed dense and sparse operands".into())),
    }
}

// The kernels below accumulate in `LANES` independent partial sums, then
// reduce them in a fixed order. The order depends only on the length, so
// results are reproducible and symmetric in their arguments.

#[inline]
pub(crate) fn dot_unchecked(a: &[f32], b: &[f32]) -> f32 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f32; LANES];
    let chunks = a.len() / LANES * LANES;
    for (ca, cb) in a[..chunks]
        .chunks_exact(LANES)
        .zip(b[..chunks].chunks_exact(LANES))
    {
        for l in 0..LANES {
            acc[l] += ca[l] * cb[l];
        }
    }
    let mut tail = 0.0f32;
    for (x, y) in a[chunks..].iter().zip(&b[chunks..]) {
        tail += x * y;
    }
    reduce(acc) + tail
}

#[inline]
pub(crate) fn squared_l2_unchecked(a: &[f32], b: &[f32]) -> f32 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f32; LANES];
    let chunks = a.len() / LANES * LANES;
    for (ca, cb) in a[..chunks]
        .chunks_exact(LANES)
        .zip(b[..chunks].chunks_exact(LANES))
    {
        for l in 0..LANES {
            let d = ca[l] - cb[l];
            acc[l] += d * d;
        }
    }
    let mut tail = 0.0f32;
    for (x, y) in a[chunks..].iter().zip(&b[chunks..]) {
        let d = x - y;
        tail += d * d;
    }
    reduce(acc) + tail
}

#[inline]
fn reduce(acc: [f32; LANES]) -> f32 {
    ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7]))
}

#[inline]
pub(crate) fn dot_sparse_unchecked(a: SparseView<'_>, b: SparseView<'_>) -> f32 {
    let (mut i, mut j) = (0, 0);
    let mut sum = 0.0f32;
    while i < a.indices.len() && j < b.indices.len() {
        match a.indices[i].cmp(&b.indices[j]) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                sum += a.values[i] * b.values[j];
                i += 1;
                j += 1;
            }
        }
    }
    sum
}
