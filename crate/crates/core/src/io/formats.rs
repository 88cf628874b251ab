//! Vector file formats.
//!
//! `fvecs` / `ivecs`: a sequence of records, each an `i32` dimension `d`
//! followed by `d` payload values (`f32` or `i32`), all little-endian. Every
//! record in a file has the same `d`.
//!
//! Sparse CSR: `u64` rows, `u64` columns, `u64` nnz; `rows + 1` `u64`
//! offsets; `nnz` `i32` column indices; `nnz` `f32` values.

use std::fs::File;
use std::io::{BufReader, BufWriter, ErrorKind, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::vectors::{DenseVector, SparseVector};

/// Row-major matrix read from an `fvecs` or `ivecs` file.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Matrix<T> {
    pub dim: usize,
    pub data: Vec<T>,
}

impl<T> Matrix<T> {
    pub fn rows(&self) -> usize {
        self.data.len().checked_div(self.dim).unwrap_or(0)
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[T]> {
        self.data.chunks_exact(self.dim.max(1))
    }
}

impl Matrix<f32> {
    pub fn to_vectors(&self) -> Result<Vec<DenseVector>> {
        self.iter().map(|r| DenseVector::new(r.to_vec())).collect()
    }
}

pub fn read_fvecs(path: impl AsRef<Path>) -> Result<Matrix<f32>> {
    read_vecs(path.as_ref(), None, f32::from_le_bytes)
}

/// Reads at most `max_rows` records.
pub fn read_fvecs_limit(path: impl AsRef<Path>, max_rows: usize) -> Result<Matrix<f32>> {
    read_vecs(path.as_ref(), Some(max_rows), f32::from_le_bytes)
}

pub fn read_ivecs(path: impl AsRef<Path>) -> Result<Matrix<i32>> {
    read_vecs(path.as_ref(), None, i32::from_le_bytes)
}

pub fn read_ivecs_limit(path: impl AsRef<Path>, max_rows: usize) -> Result<Matrix<i32>> {
    read_vecs(path.as_ref(), Some(max_rows), i32::from_le_bytes)
}

fn read_vecs<T>(path: &Path, limit: Option<usize>, conv: fn([u8; 4]) -> T) -> Result<Matrix<T>> {
    parse_vecs(BufReader::new(File::open(path)?), limit, conv)
}

pub(crate) fn parse_vecs<R: Read, T>(
    mut r: R,
    limit: Option<usize>,
    conv: fn([u8; 4]) -> T,
) -> Result<Matrix<T>> {
    let mut out = Matrix {
        dim: 0,
        data: Vec::new(),
    };
    let mut offset = 0u64;
    let mut rows = 0usize;
    let mut buf = Vec::new();
    while limit.is_none_or(|l| rows < l) {
        let mut head = [0u8; 4];
        match read_full(&mut r, &mut head)? {
            0 => break,
            4 => {}
            _ => return Err(Error::format(offset, "truncated record header")),
        }
        let d = i32::from_le_bytes(head);
        if d <= 0 {
            return Err(Error::format(
                offset,
                format!("record dimension {d} is not positive"),
            ));
        }
        let d = d as usize;
        if rows == 0 {
            out.dim = d;
        } else if d != out.dim {
            return Err(Error::format(
                offset,
                format!(
                    "record dimension {d} differs from the first record's {}",
                    out.dim
                ),
            ));
        }
        buf.resize(d * 4, 0);
        if read_full(&mut r, &mut buf)? != buf.len() {
            return Err(Error::format(offset + 4, "truncated record payload"));
        }
        out.data
            .extend(buf.chunks_exact(4).map(|b| conv(b.try_into().unwrap())));
        offset += 4 + buf.len() as u64;
        rows += 1;
    }
    Ok(out)
}

/// Reads until `buf` is full or EOF; returns the number of bytes read.
fn read_full<R: Read>(r: &mut R, buf: &mut [u8]) -> Result<usize> {
    let mut filled = 0;
    while filled < buf.len() {
        match r.read(&mut buf[filled..]) {
            Ok(0) => break,
            Ok(k) => filled += k,
            Err(e) if e.kind() == ErrorKind::Interrupted => {}
            Err(e) => return Err(e.into()),
        }
    }
    Ok(filled)
}

pub fn write_fvecs(path: impl AsRef<Path>, dim: usize, data: &[f32]) -> Result<()> {
    write_vecs(path.as_ref(), dim, data, |x| x.to_le_bytes())
}

pub fn write_ivecs(path: impl AsRef<Path>, dim: usize, data: &[i32]) -> Result<()> {
    write_vecs(path.as_ref(), dim, data, |x| x.to_le_bytes())
}

fn write_vecs<T: Copy>(path: &Path, dim: usize, data: &[T], bytes: fn(T) -> [u8; 4]) -> Result<()> {
    if dim == 0 || !data.len().is_multiple_of(dim) || dim > i32::MAX as usize {
        return Err(Error::invalid("data is not a whole number of rows"));
    }
    let mut w = BufWriter::new(File::create(path)?);
    for row in data.chunks_exact(dim) {
        w.write_all(&(dim as i32).to_le_bytes())?;
        for &x in row {
            w.write_all(&bytes(x))?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Rows of a sparse CSR file.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseMatrix {
    pub ncols: usize,
    pub rows: Vec<SparseVector>,
    /// Rows that needed sorting, duplicate merging or zero removal.
    pub repaired_rows: usize,
}

pub fn read_sparse_csr(path: impl AsRef<Path>) -> Result<SparseMatrix> {
    parse_sparse_csr(BufReader::new(File::open(path)?))
}

pub(crate) fn parse_sparse_csr<R: Read>(mut r: R) -> Result<SparseMatrix> {
    let mut pos = 0u64;
    let take = |r: &mut R, buf: &mut [u8], pos: &mut u64| -> Result<()> {
        if read_full(r, buf)? != buf.len() {
            return Err(Error::format(*pos, "unexpected end of file"));
        }
        *pos += buf.len() as u64;
        Ok(())
    };
    let mut header = [0u8; 24];
    take(&mut r, &mut header, &mut pos)?;
    let field = |i: usize| u64::from_le_bytes(header[i * 8..i * 8 + 8].try_into().unwrap());
    let (nrows, ncols, nnz) = (field(0), field(1), field(2));
    let too_big = |what: &str| Error::format(0, format!("{what} does not fit in memory"));
    let nrows = usize::try_from(nrows).map_err(|_| too_big("row count"))?;
    let ncols = usize::try_from(ncols).map_err(|_| too_big("column count"))?;
    let nnz = usize::try_from(nnz).map_err(|_| too_big("nnz"))?;

    let offsets_at = pos;
    let mut offsets = Vec::with_capacity(nrows.min(1 << 20) + 1);
    let mut word = [0u8; 8];
    for _ in 0..=nrows {
        take(&mut r, &mut word, &mut pos)?;
        offsets.push(u64::from_le_bytes(word));
    }
    if offsets[0] != 0 {
        return Err(Error::format(offsets_at, "first row offset is not zero"));
    }
    if let Some(i) = offsets.windows(2).position(|w| w[0] > w[1]) {
        return Err(Error::format(
            offsets_at + 8 * (i as u64 + 1),
            "row offsets are not monotone",
        ));
    }
    if offsets[nrows] != nnz as u64 {
        return Err(Error::format(
            offsets_at + 8 * nrows as u64,
            format!("last offset {} disagrees with nnz {nnz}", offsets[nrows]),
        ));
    }

    let indices_at = pos;
    let mut indices = Vec::with_capacity(nnz.min(1 << 24));
    let mut half = [0u8; 4];
    for k in 0..nnz {
        take(&mut r, &mut half, &mut pos)?;
        let idx = i32::from_le_bytes(half);
        if idx < 0 || idx as usize >= ncols || idx as u64 > u32::MAX as u64 {
            return Err(Error::format(
                indices_at + 4 * k as u64,
                format!("column index {idx} outside 0..{ncols}"),
            ));
        }
        indices.push(idx as u32);
    }
    let values_at = pos;
    let mut values = Vec::with_capacity(nnz.min(1 << 24));
    for k in 0..nnz {
        take(&mut r, &mut half, &mut pos)?;
        let v = f32::from_le_bytes(half);
        if !v.is_finite() {
            return Err(Error::format(values_at + 4 * k as u64, "non-finite value"));
        }
        values.push(v);
    }

    let mut repaired_rows = 0;
    let mut rows = Vec::with_capacity(nrows);
    for w in offsets.windows(2) {
        let (a, b) = (w[0] as usize, w[1] as usize);
        let (idx, val) = (&indices[a..b], &values[a..b]);
        let clean = idx.windows(2).all(|p| p[0] < p[1]) && val.iter().all(|&v| v != 0.0);
        let row = if clean {
            SparseVector::new(idx.to_vec(), val.to_vec())?
        } else {
            repaired_rows += 1;
            canonicalize(idx, val)?
        };
        rows.push(row);
    }
    if repaired_rows > 0 {
        log::warn!("{repaired_rows} sparse rows were sorted or deduplicated on load");
    }
    Ok(SparseMatrix {
        ncols,
        rows,
        repaired_rows,
    })
}

/// Sorts by column, sums duplicate columns and drops zeros.
fn canonicalize(idx: &[u32], val: &[f32]) -> Result<SparseVector> {
    let mut pairs: Vec<(u32, f32)> = idx.iter().copied().zip(val.iter().copied()).collect();
    pairs.sort_by_key(|p| p.0);
    let mut merged: Vec<(u32, f32)> = Vec::with_capacity(pairs.len());
    for (i, v) in pairs {
        match merged.last_mut() {
            Some(last) if last.0 == i => last.1 += v,
            _ => merged.push((i, v)),
        }
    }
    merged.retain(|p| p.1 != 0.0);
    SparseVector::from_pairs(merged)
}

pub fn write_sparse_csr(path: impl AsRef<Path>, ncols: usize, rows: &[SparseVector]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path.as_ref())?);
    let nnz: usize = rows.iter().map(SparseVector::nnz).sum();
    for v in [rows.len(), ncols, nnz] {
        w.write_all(&(v as u64).to_le_bytes())?;
    }
    let mut off = 0u64;
    w.write_all(&off.to_le_bytes())?;
    for row in rows {
        off += row.nnz() as u64;
        w.write_all(&off.to_le_bytes())?;
    }
    for row in rows {
        for &i in row.indices() {
            if i as usize >= ncols || i > i32::MAX as u32 {
                return Err(Error::invalid(format!("column {i} outside 0..{ncols}")));
            }
            w.write_all(&(i as i32).to_le_bytes())?;
        }
    }
    for row in rows {
        for v in row.values() {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}
