//! A growable collection of vectors bound to exactly one quantizer.
//!
//! Ids are insertion-ordered integers `0..len`. The graph index only ever
//! talks to a dataset through ids, so it is unaware of whether the payloads
//! are raw floats, product-quantized codes or sparse postings.

use crate::error::{Error, Result};
use crate::par::Exec;
use crate::quantizer::{train_pq, PqCodebook, PqParams, Quantizer, MAX_TRAINING_SAMPLE};
use crate::vectors::{check_finite, SparseView, VectorRef};

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Kind of vectors a dataset holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VectorKind {
    Dense { dim: usize },
    Sparse,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Storage {
    Dense {
        dim: usize,
        data: Vec<f32>,
    },
    Pq {
        codebook: PqCodebook,
        codes: Vec<u8>,
        /// Original vectors, kept while the graph is being built.
        raw: Option<Vec<f32>>,
    },
    Sparse {
        offsets: Vec<u64>,
        indices: Vec<u32>,
        values: Vec<f32>,
    },
}

/// Stored payload of one item, borrowed from the dataset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Stored<'a> {
    Dense(&'a [f32]),
    Code(&'a [u8]),
    Sparse(SparseView<'a>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub(crate) storage: Storage,
    len: usize,
}

impl Dataset {
    /// Empty dense dataset with the identity quantizer.
    pub fn dense(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dimensionality must be positive"));
        }
        Ok(Dataset {
            storage: Storage::Dense {
                dim,
                data: Vec::new(),
            },
            len: 0,
        })
    }

    /// Empty sparse dataset. Sparse vectors are always stored unquantized.
    pub fn sparse() -> Self {
        Dataset {
            storage: Storage::Sparse {
                offsets: vec![0],
                indices: Vec::new(),
                values: Vec::new(),
            },
            len: 0,
        }
    }

    /// Empty product-quantized dataset in construction mode: pushed vectors
    /// are encoded and also retained raw until [`Dataset::drop_raw_cache`].
    pub fn product_quantized(codebook: PqCodebook) -> Self {
        Dataset {
            storage: Storage::Pq {
                codebook,
                codes: Vec::new(),
                raw: Some(Vec::new()),
            },
            len: 0,
        }
    }

    /// Identity dense dataset from row-major data.
    pub fn from_dense_rows(dim: usize, rows: &[f32]) -> Result<Self> {
        let mut ds = Dataset::dense(dim)?;
        if !rows.len().is_multiple_of(dim) {
            return Err(Error::invalid("row buffer is not a whole number of rows"));
        }
        ds.reserve(rows.len() / dim);
        for r in rows.chunks_exact(dim) {
            ds.push_dense(r)?;
        }
        Ok(ds)
    }

    /// Trains a product quantizer on (a sample of) `rows`, then encodes every
    /// row. The result is in construction mode.
    pub fn train_product_quantized(
        dim: usize,
        rows: &[f32],
        params: &PqParams,
        exec: Exec,
    ) -> Result<Self> {
        if dim == 0 || !rows.len().is_multiple_of(dim) {
            return Err(Error::invalid("row buffer is not a whole number of rows"));
        }
        if let Some(i) = rows.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "non-finite component in row {}",
                i / dim
            )));
        }
        let n = rows.len() / dim;
        let sample;
        let training = if n > MAX_TRAINING_SAMPLE {
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
            let mut picks = index::sample(&mut rng, n, MAX_TRAINING_SAMPLE).into_vec();
            picks.sort_unstable();
            sample = picks
                .iter()
                .flat_map(|&i| &rows[i * dim..(i + 1) * dim])
                .copied()
                .collect::<Vec<f32>>();
            &sample[..]
        } else {
            rows
        };
        let codebook = train_pq(training, dim, params, exec)?;
        let codes: Vec<Vec<u8>> = exec.map_range(n, |i| {
            let mut code = vec![0u8; codebook.m()];
            codebook.encode_into(&rows[i * dim..(i + 1) * dim], &mut code);
            code
        });
        Ok(Dataset {
            storage: Storage::Pq {
                codebook,
                codes: codes.concat(),
                raw: Some(rows.to_vec()),
            },
            len: n,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn kind(&self) -> VectorKind {
        match &self.storage {
            Storage::Dense { dim, .. } => VectorKind::Dense { dim: *dim },
            Storage::Pq { codebook, .. } => VectorKind::Dense {
                dim: codebook.dim(),
            },
            Storage::Sparse { .. } => VectorKind::Sparse,
        }
    }

    pub fn dim(&self) -> Option<usize> {
        match self.kind() {
            VectorKind::Dense { dim } => Some(dim),
            VectorKind::Sparse => None,
        }
    }

    pub fn quantizer(&self) -> Quantizer {
        match &self.storage {
            Storage::Pq { codebook, .. } => Quantizer::Product(codebook.clone()),
            _ => Quantizer::Identity,
        }
    }

    pub fn codebook(&self) -> Option<&PqCodebook> {
        match &self.storage {
            Storage::Pq { codebook, .. } => Some(codebook),
            _ => None,
        }
    }

    pub fn is_quantized(&self) -> bool {
        matches!(self.storage, Storage::Pq { .. })
    }

    /// Whether raw vectors are reachable through [`Dataset::get_raw`].
    pub fn has_raw(&self) -> bool {
        !matches!(self.storage, Storage::Pq { raw: None, .. })
    }

    pub fn reserve(&mut self, additional: usize) {
        match &mut self.storage {
            Storage::Dense { dim, data } => data.reserve(additional * *dim),
            Storage::Pq {
                codebook,
                codes,
                raw,
            } => {
                codes.reserve(additional * codebook.m());
                if let Some(raw) = raw {
                    raw.reserve(additional * codebook.dim());
                }
            }
            Storage::Sparse { offsets, .. } => offsets.reserve(additional),
        }
    }

    /// Appends a vector and returns its id.
    pub fn push(&mut self, v: VectorRef<'_>) -> Result<u32> {
        match v {
            VectorRef::Dense(x) => self.push_dense(x),
            VectorRef::Sparse(s) => self.push_sparse(s),
        }
    }

    pub fn push_dense(&mut self, v: &[f32]) -> Result<u32> {
        let id = self.next_id()?;
        match &mut self.storage {
            Storage::Dense { dim, data } => {
                check_dense(v, *dim)?;
                data.extend_from_slice(v);
            }
            Storage::Pq {
                codebook,
                codes,
                raw,
            } => {
                check_dense(v, codebook.dim())?;
                let start = codes.len();
                codes.resize(start + codebook.m(), 0);
                codebook.encode_into(v, &mut codes[start..]);
                match raw {
                    Some(raw) => raw.extend_from_slice(v),
                    None => {
                        codes.truncate(start);
                        return Err(Error::State(
                            "cannot append to a quantized dataset after its raw cache was dropped"
                                .into(),
                        ));
                    }
                }
            }
            Storage::Sparse { .. } => {
                return Err(Error::invalid("dense vector pushed into a sparse dataset"))
            }
        }
        self.len += 1;
        Ok(id)
    }

    pub fn push_sparse(&mut self, v: SparseView<'_>) -> Result<u32> {
        let id = self.next_id()?;
        let Storage::Sparse {
            offsets,
            indices,
            values,
        } = &mut self.storage
        else {
            return Err(Error::invalid("sparse vector pushed into a dense dataset"));
        };
        SparseView::new(v.indices, v.values)?;
        indices.extend_from_slice(v.indices);
        values.extend_from_slice(v.values);
        offsets.push(indices.len() as u64);
        self.len += 1;
        Ok(id)
    }

    fn next_id(&self) -> Result<u32> {
        u32::try_from(self.len)
            .ok()
            .filter(|&id| id != u32::MAX)
            .ok_or_else(|| Error::invalid("dataset is full"))
    }

    fn check_id(&self, id: usize) -> Result<()> {
        if id >= self.len {
            return Err(Error::NotFound { id, len: self.len });
        }
        Ok(())
    }

    /// Stored payload of `id`, without copying.
    pub fn get(&self, id: usize) -> Result<Stored<'_>> {
        self.check_id(id)?;
        Ok(match &self.storage {
            Storage::Dense { dim, data } => Stored::Dense(&data[id * dim..(id + 1) * dim]),
            Storage::Pq {
                codebook, codes, ..
            } => {
                let m = codebook.m();
                Stored::Code(&codes[id * m..(id + 1) * m])
            }
            Storage::Sparse { .. } => Stored::Sparse(self.sparse_unchecked(id)),
        })
    }

    /// Original representation of `id`. For quantized datasets this needs
    /// the raw cache.
    pub fn get_raw(&self, id: usize) -> Result<VectorRef<'_>> {
        self.check_id(id)?;
        match &self.storage {
            Storage::Pq { raw: None, .. } => Err(Error::State(
                "raw vectors were dropped after construction".into(),
            )),
            _ => Ok(self.raw_unchecked(id)),
        }
    }

    /// Reconstruction of `id` as seen by query-time scoring.
    pub fn get_decoded(&self, id: usize) -> Result<Vec<f32>> {
        match self.get(id)? {
            Stored::Dense(v) => Ok(v.to_vec()),
            Stored::Code(c) => self.codebook().expect("quantized storage").decode(c),
            Stored::Sparse(_) => Err(Error::Unsupported("decoding a sparse vector".into())),
        }
    }

    /// Releases the raw vectors of a quantized dataset. Idempotent; a no-op
    /// for identity datasets.
    pub fn drop_raw_cache(&mut self) {
        if let Storage::Pq { raw, .. } = &mut self.storage {
            *raw = None;
        }
    }

    #[inline]
    pub(crate) fn raw_unchecked(&self, id: usize) -> VectorRef<'_> {
        match &self.storage {
            Storage::Dense { dim, data } => VectorRef::Dense(&data[id * dim..(id + 1) * dim]),
            Storage::Pq { codebook, raw, .. } => {
                let dim = codebook.dim();
                let raw = raw.as_ref().expect("raw cache present");
                VectorRef::Dense(&raw[id * dim..(id + 1) * dim])
            }
            Storage::Sparse { .. } => VectorRef::Sparse(self.sparse_unchecked(id)),
        }
    }

    #[inline]
    fn sparse_unchecked(&self, id: usize) -> SparseView<'_> {
        let Storage::Sparse {
            offsets,
            indices,
            values,
        } = &self.storage
        else {
            unreachable!("sparse access on dense storage")
        };
        let (a, b) = (offsets[id] as usize, offsets[id + 1] as usize);
        SparseView::new_unchecked(&indices[a..b], &values[a..b])
    }

    /// Total stored nonzeros of a sparse dataset.
    pub fn nnz(&self) -> Option<usize> {
        match &self.storage {
            Storage::Sparse { indices, .. } => Some(indices.len()),
            _ => None,
        }
    }

    pub(crate) fn from_parts(storage: Storage, len: usize) -> Result<Self> {
        let ds = Dataset { storage, len };
        ds.validate()?;
        Ok(ds)
    }

    /// Checks storage consistency in O(total payload).
    pub fn validate(&self) -> Result<()> {
        let n = self.len;
        match &self.storage {
            Storage::Dense { dim, data } => {
                if *dim == 0 || data.len() != n * dim {
                    return Err(Error::invalid("dense payload size does not match n × dim"));
                }
                if data.iter().any(|v| !v.is_finite()) {
                    return Err(Error::invalid("dense payload holds non-finite values"));
                }
            }
            Storage::Pq {
                codebook,
                codes,
                raw,
            } => {
                if codes.len() != n * codebook.m() {
                    return Err(Error::invalid("code payload size does not match n × m"));
                }
                if codes.iter().any(|&c| c as usize >= codebook.ks()) {
                    return Err(Error::invalid("code entry exceeds ks"));
                }
                if let Some(raw) = raw {
                    if raw.len() != n * codebook.dim() {
                        return Err(Error::invalid("raw cache size does not match n × dim"));
                    }
                }
            }
            Storage::Sparse {
                offsets,
                indices,
                values,
            } => {
                if offsets.len() != n + 1 || offsets[0] != 0 {
                    return Err(Error::invalid(
                        "sparse offsets must have n + 1 entries from 0",
                    ));
                }
                if offsets.windows(2).any(|w| w[0] > w[1]) {
                    return Err(Error::invalid("sparse offsets are not monotone"));
                }
                if offsets[n] as usize != indices.len() || indices.len() != values.len() {
                    return Err(Error::invalid("sparse offsets disagree with nnz"));
                }
                for id in 0..n {
                    let v = self.sparse_unchecked(id);
                    SparseView::new(v.indices, v.values)?;
                }
            }
        }
        Ok(())
    }
}

fn check_dense(v: &[f32], dim: usize) -> Result<()> {
    if v.len() != dim {
        return Err(Error::invalid(format!(
            "vector has {} components, dataset expects {dim}",
            v.len()
        )));
    }
    check_finite(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vectors::SparseVector;
    use rand::Rng;

    fn rows(n: usize, dim: usize, seed: u64) -> Vec<f32> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n * dim).map(|_| rng.random_range(-1.0..1.0)).collect()
    }

    #[test]
    fn ids_are_sequential() {
        let mut ds = Dataset::dense(3).unwrap();
        assert_eq!(ds.push_dense(&[1.0, 2.0, 3.0]).unwrap(), 0);
        assert_eq!(ds.len(), 1);
        for k in 1..5 {
            assert_eq!(ds.push_dense(&[k as f32; 3]).unwrap(), k);
        }
        assert_eq!(ds.get(0).unwrap(), Stored::Dense(&[1.0, 2.0, 3.0]));
        assert_eq!(ds.get(4).unwrap(), Stored::Dense(&[4.0; 3]));
    }

    #[test]
    fn kind_and_dimension_are_enforced() {
        let mut ds = Dataset::dense(2).unwrap();
        assert!(ds.push_dense(&[1.0]).is_err());
        assert!(ds.push_dense(&[1.0, f32::NAN]).is_err());
        let sp = SparseVector::new(vec![1], vec![1.0]).unwrap();
        assert!(ds.push_sparse(sp.view()).is_err());
        let mut sds = Dataset::sparse();
        assert!(sds.push_dense(&[1.0, 2.0]).is_err());
        assert!(sds
            .push_sparse(SparseView::new_unchecked(&[3, 1], &[1.0, 1.0]))
            .is_err());
        assert_eq!(ds.len(), 0);
        assert_eq!(sds.len(), 0);
        assert!(Dataset::dense(0).is_err());
    }

    #[test]
    fn out_of_range_ids_are_not_found() {
        let ds = Dataset::from_dense_rows(2, &[0.0, 1.0]).unwrap();
        assert!(matches!(ds.get(1), Err(Error::NotFound { id: 1, len: 1 })));
        assert!(matches!(ds.get_raw(7), Err(Error::NotFound { .. })));
    }

    #[test]
    fn sparse_round_trips() {
        let mut ds = Dataset::sparse();
        let a = SparseVector::new(vec![0, 5, 9], vec![0.5, -1.0, 2.0]).unwrap();
        let empty = SparseVector::default();
        let b = SparseVector::new(vec![2], vec![3.0]).unwrap();
        for v in [&a, &empty, &b] {
            ds.push_sparse(v.view()).unwrap();
        }
        assert_eq!(ds.get(0).unwrap(), Stored::Sparse(a.view()));
        assert_eq!(ds.get(1).unwrap(), Stored::Sparse(empty.view()));
        assert_eq!(ds.get(2).unwrap(), Stored::Sparse(b.view()));
        assert_eq!(ds.nnz(), Some(4));
        ds.validate().unwrap();
    }

    #[test]
    fn pq_push_matches_quantizer_round_trip() {
        let data = rows(600, 8, 1);
        let params = PqParams {
            m: 2,
            ks: 16,
            iters: 10,
            seed: 1,
        };
        let cb = train_pq(&data, 8, &params, Exec::Sequential).unwrap();
        let mut ds = Dataset::product_quantized(cb.clone());
        for r in data.chunks(8).take(20) {
            let id = ds.push_dense(r).unwrap() as usize;
            let want = cb.decode(&cb.encode(r).unwrap().0).unwrap();
            assert_eq!(ds.get_decoded(id).unwrap(), want);
            assert_eq!(ds.get_raw(id).unwrap(), VectorRef::Dense(r));
        }
    }

    #[test]
    fn bulk_pq_training_matches_incremental_pushes() {
        let data = rows(500, 8, 2);
        let params = PqParams {
            m: 4,
            ks: 8,
            iters: 10,
            seed: 9,
        };
        let bulk = Dataset::train_product_quantized(8, &data, &params, Exec::Parallel).unwrap();
        let mut inc = Dataset::product_quantized(bulk.codebook().unwrap().clone());
        for r in data.chunks(8) {
            inc.push_dense(r).unwrap();
        }
        assert_eq!(bulk, inc);
    }

    #[test]
    fn raw_cache_lifecycle() {
        let data = rows(300, 4, 3);
        let params = PqParams {
            m: 2,
            ks: 4,
            iters: 5,
            seed: 0,
        };
        let mut ds = Dataset::train_product_quantized(4, &data, &params, Exec::Sequential).unwrap();
        assert!(ds.has_raw());
        ds.drop_raw_cache();
        assert!(!ds.has_raw());
        assert!(matches!(ds.get_raw(0), Err(Error::State(_))));
        ds.drop_raw_cache();
        assert!(matches!(ds.push_dense(&[0.0; 4]), Err(Error::State(_))));
        assert_eq!(ds.len(), 300);
        ds.validate().unwrap();

        let mut ident = Dataset::from_dense_rows(4, &data).unwrap();
        let before = ident.clone();
        ident.drop_raw_cache();
        assert_eq!(ident, before);
        assert!(ident.get_raw(3).is_ok());
    }
}
