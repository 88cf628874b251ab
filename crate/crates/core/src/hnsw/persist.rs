//! Index file layout. Every integer is little-endian; floats are IEEE-754
//! single precision, little-endian.
//!
//! ```text
//! magic            4 bytes  "ANNG"
//! version          u32      1
//! measure          u8       0 = squared L2, 1 = inner product
//! m, m0, efc       u32 × 3
//! ml               f64
//! seed             u64
//! pruning          u8       0 = heuristic, 1 = nearest
//! --- dataset ---
//! kind             u8       0 = dense, 1 = sparse
//! dim              u32      0 for sparse
//! n                u64
//! quantizer        u8       0 = identity, 1 = product
//!   identity dense: n × dim f32
//!   product:        m, ks, dsub u32; m × ks × dsub f32 centroids; n × m u8 codes
//!   sparse:         (n + 1) u64 offsets; nnz u32 indices; nnz f32 values
//! --- graph ---
//! node levels      n × u8
//! entry point      u32      u32::MAX when empty
//! max level        u32
//! adjacency        for each level l in 0..=max level, for each id (ascending)
//!                  whose level >= l: u32 length, then that many u32 ids
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{HnswConfig, HnswGraph, HnswIndex, Pruning};
use crate::dataset::{Dataset, Storage};
use crate::error::{Error, Result};
use crate::quantizer::PqCodebook;
use crate::vectors::Measure;

pub(crate) const MAGIC: [u8; 4] = *b"ANNG";
pub(crate) const VERSION: u32 = 1;

const NO_ENTRY: u32 = u32::MAX;

pub(crate) fn save(index: &HnswIndex, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_index(index, &mut w)?;
    w.flush()?;
    Ok(())
}

pub(crate) fn load(path: &Path) -> Result<HnswIndex> {
    read_index(BufReader::new(File::open(path)?))
}

pub(crate) fn write_index<W: Write>(index: &HnswIndex, mut w: W) -> Result<()> {
    let cfg = &index.config;
    w.write_all(&MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&[index.measure.tag()])?;
    for v in [cfg.m, cfg.m0, cfg.ef_construction] {
        w.write_all(&(v as u32).to_le_bytes())?;
    }
    w.write_all(&cfg.ml.to_le_bytes())?;
    w.write_all(&cfg.seed.to_le_bytes())?;
    w.write_all(&[match cfg.pruning {
        Pruning::Heuristic => 0,
        Pruning::Nearest => 1,
    }])?;

    let ds = &index.dataset;
    let n = ds.len() as u64;
    match &ds.storage {
        Storage::Dense { dim, data } => {
            write_header(&mut w, 0, *dim as u32, n, 0)?;
            write_f32s(&mut w, data)?;
        }
        Storage::Pq {
            codebook, codes, ..
        } => {
            write_header(&mut w, 0, codebook.dim() as u32, n, 1)?;
            for v in [codebook.m(), codebook.ks(), codebook.dsub()] {
                w.write_all(&(v as u32).to_le_bytes())?;
            }
            write_f32s(&mut w, codebook.centroids())?;
            w.write_all(codes)?;
        }
        Storage::Sparse {
            offsets,
            indices,
            values,
        } => {
            write_header(&mut w, 1, 0, n, 0)?;
            for o in offsets {
                w.write_all(&o.to_le_bytes())?;
            }
            for i in indices {
                w.write_all(&i.to_le_bytes())?;
            }
            write_f32s(&mut w, values)?;
        }
    }

    let g = &index.graph;
    w.write_all(g.node_levels())?;
    w.write_all(&g.entry_point().unwrap_or(NO_ENTRY).to_le_bytes())?;
    w.write_all(&(g.max_level() as u32).to_le_bytes())?;
    if !g.is_empty() {
        for level in 0..=g.max_level() {
            for id in 0..g.len() as u32 {
                if g.node_level(id) >= level {
                    let list = g.neighbors(id, level);
                    w.write_all(&(list.len() as u32).to_le_bytes())?;
                    for nb in list {
                        w.write_all(&nb.to_le_bytes())?;
                    }
                }
            }
        }
    }
    Ok(())
}

fn write_header<W: Write>(w: &mut W, kind: u8, dim: u32, n: u64, quantizer: u8) -> Result<()> {
    w.write_all(&[kind])?;
    w.write_all(&dim.to_le_bytes())?;
    w.write_all(&n.to_le_bytes())?;
    w.write_all(&[quantizer])?;
    Ok(())
}

fn write_f32s<W: Write>(w: &mut W, xs: &[f32]) -> Result<()> {
    for x in xs {
        w.write_all(&x.to_le_bytes())?;
    }
    Ok(())
}

/// Reader that tracks its byte offset so failures can point at it.
struct Cursor<R> {
    inner: R,
    pos: u64,
}

impl<R: Read> Cursor<R> {
    fn bytes<const N: usize>(&mut self) -> Result<[u8; N]> {
        let mut buf = [0u8; N];
        self.fill(&mut buf)?;
        Ok(buf)
    }

    fn fill(&mut self, buf: &mut [u8]) -> Result<()> {
        match self.inner.read_exact(buf) {
            Ok(()) => {
                self.pos += buf.len() as u64;
                Ok(())
            }
            Err(e) if e.kind() == std::io::ErrorKind::UnexpectedEof => {
                Err(Error::format(self.pos, "unexpected end of file"))
            }
            Err(e) => Err(e.into()),
        }
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.bytes::<1>()?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.bytes()?))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.bytes()?))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.bytes()?))
    }

    fn vec_u8(&mut self, len: usize) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        self.read_chunked(len, 1, |chunk| out.extend_from_slice(chunk))?;
        Ok(out)
    }

    fn vec_u32(&mut self, len: usize) -> Result<Vec<u32>> {
        let mut out = Vec::new();
        self.read_chunked(len, 4, |chunk| {
            out.extend(
                chunk
                    .chunks_exact(4)
                    .map(|b| u32::from_le_bytes(b.try_into().unwrap())),
            )
        })?;
        Ok(out)
    }

    fn vec_u64(&mut self, len: usize) -> Result<Vec<u64>> {
        let mut out = Vec::new();
        self.read_chunked(len, 8, |chunk| {
            out.extend(
                chunk
                    .chunks_exact(8)
                    .map(|b| u64::from_le_bytes(b.try_into().unwrap())),
            )
        })?;
        Ok(out)
    }

    fn vec_f32(&mut self, len: usize) -> Result<Vec<f32>> {
        let mut out = Vec::new();
        self.read_chunked(len, 4, |chunk| {
            out.extend(
                chunk
                    .chunks_exact(4)
                    .map(|b| f32::from_le_bytes(b.try_into().unwrap())),
            )
        })?;
        Ok(out)
    }

    /// Reads `len` items of `width` bytes in bounded chunks, so a corrupt
    /// length field cannot trigger a huge allocation up front.
    fn read_chunked(
        &mut self,
        len: usize,
        width: usize,
        mut sink: impl FnMut(&[u8]),
    ) -> Result<()> {
        const CHUNK: usize = 1 << 16;
        let mut buf = vec![0u8; CHUNK * width];
        let mut left = len;
        while left > 0 {
            let take = left.min(CHUNK);
            let bytes = &mut buf[..take * width];
            self.fill(bytes)?;
            sink(bytes);
            left -= take;
        }
        Ok(())
    }

    fn fail<T>(&self, at: u64, msg: impl Into<String>) -> Result<T> {
        Err(Error::format(at, msg))
    }
}

fn to_usize(v: u64, at: u64) -> Result<usize> {
    usize::try_from(v).map_err(|_| Error::format(at, "length does not fit in memory"))
}

pub(crate) fn read_index<R: Read>(r: R) -> Result<HnswIndex> {
    let mut c = Cursor { inner: r, pos: 0 };
    if c.bytes::<4>()? != MAGIC {
        return c.fail(0, "bad magic bytes");
    }
    let version = c.u32()?;
    if version != VERSION {
        return c.fail(4, format!("unsupported format version {version}"));
    }
    let at = c.pos;
    let measure =
        Measure::from_tag(c.u8()?).ok_or_else(|| Error::format(at, "unknown measure tag"))?;
    let m = c.u32()? as usize;
    let m0 = c.u32()? as usize;
    let ef_construction = c.u32()? as usize;
    let ml = c.f64()?;
    let seed = c.u64()?;
    let at = c.pos;
    let pruning = match c.u8()? {
        0 => Pruning::Heuristic,
        1 => Pruning::Nearest,
        _ => return c.fail(at, "unknown pruning tag"),
    };
    let config = HnswConfig {
        m,
        m0,
        ef_construction,
        ml,
        seed,
        pruning,
    };
    config
        .validate()
        .map_err(|e| Error::format(at, format!("invalid graph config: {e}")))?;

    let header_at = c.pos;
    let kind = c.u8()?;
    let dim = c.u32()? as usize;
    let n_at = c.pos;
    let n = to_usize(c.u64()?, n_at)?;
    if n >= u32::MAX as usize {
        return c.fail(n_at, "too many items");
    }
    let quantizer = c.u8()?;
    let storage = match (kind, quantizer) {
        (0, 0) => {
            if dim == 0 {
                return c.fail(header_at, "zero dimensionality");
            }
            let len = n
                .checked_mul(dim)
                .ok_or_else(|| Error::format(n_at, "payload size overflows"))?;
            Storage::Dense {
                dim,
                data: c.vec_f32(len)?,
            }
        }
        (0, 1) => {
            let cb_at = c.pos;
            let pm = c.u32()? as usize;
            let ks = c.u32()? as usize;
            let dsub = c.u32()? as usize;
            let cents = pm
                .checked_mul(ks)
                .and_then(|x| x.checked_mul(dsub))
                .filter(|&x| ks <= 256 && x > 0)
                .ok_or_else(|| Error::format(cb_at, "invalid codebook shape"))?;
            let centroids = c.vec_f32(cents)?;
            let codebook = PqCodebook::from_centroids(pm, ks, dsub, centroids)
                .map_err(|e| Error::format(cb_at, e.to_string()))?;
            if codebook.dim() != dim {
                return c.fail(cb_at, "codebook dimensionality disagrees with header");
            }
            let len = n
                .checked_mul(pm)
                .ok_or_else(|| Error::format(n_at, "payload size overflows"))?;
            Storage::Pq {
                codebook,
                codes: c.vec_u8(len)?,
                raw: None,
            }
        }
        (1, 0) => {
            let offsets = c.vec_u64(n + 1)?;
            let off_at = c.pos;
            let nnz = to_usize(*offsets.last().expect("n + 1 >= 1 offsets"), off_at)?;
            if offsets.windows(2).any(|w| w[0] > w[1]) || offsets[0] != 0 {
                return c.fail(off_at, "sparse offsets are not monotone from zero");
            }
            Storage::Sparse {
                offsets,
                indices: c.vec_u32(nnz)?,
                values: c.vec_f32(nnz)?,
            }
        }
        _ => {
            return c.fail(
                header_at,
                format!("unknown dataset kind {kind}/{quantizer}"),
            )
        }
    };
    let dataset = Dataset::from_parts(storage, n)
        .map_err(|e| Error::format(header_at, format!("invalid dataset: {e}")))?;

    let graph_at = c.pos;
    let levels = c.vec_u8(n)?;
    let entry = c.u32()?;
    let max_level = c.u32()? as usize;
    let entry_point = (entry != NO_ENTRY).then_some(entry);
    if entry_point.map_or(n > 0, |ep| ep as usize >= n) {
        return c.fail(graph_at, "entry point missing or out of range");
    }
    if levels.iter().copied().max().unwrap_or(0) as usize != max_level {
        return c.fail(graph_at, "max level disagrees with node levels");
    }
    let mut adjacency: Vec<Vec<Vec<u32>>> = levels
        .iter()
        .map(|&l| Vec::with_capacity(l as usize + 1))
        .collect();
    if n > 0 {
        for level in 0..=max_level {
            let cap = if level == 0 { m0 } else { m };
            for (id, &node_level) in levels.iter().enumerate() {
                if node_level as usize >= level {
                    let at = c.pos;
                    let len = c.u32()? as usize;
                    if len > cap {
                        return c.fail(at, format!("node {id} level {level} exceeds capacity"));
                    }
                    adjacency[id].push(c.vec_u32(len)?);
                }
            }
        }
    }
    let end = c.pos;
    let mut probe = [0u8; 1];
    if c.inner.read(&mut probe)? != 0 {
        return c.fail(end, "trailing bytes after index");
    }
    let graph = HnswGraph::from_parts(m, m0, levels, entry_point, adjacency)
        .map_err(|e| Error::format(graph_at, format!("invalid graph: {e}")))?;
    Ok(HnswIndex::from_parts(config, measure, graph, dataset))
}
