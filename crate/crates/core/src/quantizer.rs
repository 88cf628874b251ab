//! Quantizers: the identity pass-through and product quantization.
//!
//! A product quantizer splits a `d`-dimensional vector into `m` contiguous
//! subvectors of `dsub = d / m` components and replaces each by the index of
//! its nearest centroid in that subspace's codebook. Queries are scored
//! against codes through a per-query [`DistanceTable`] (asymmetric distance
//! computation).

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::par::Exec;
use crate::vectors::{dot_unchecked, squared_l2_unchecked, Measure};

/// Maximum training sample drawn from a dataset before k-means runs.
pub const MAX_TRAINING_SAMPLE: usize = 262_144;

/// Quantizer bound to a dataset.
#[derive(Debug, Clone, PartialEq)]
pub enum Quantizer {
    /// Stores vectors unchanged.
    Identity,
    /// Stores one byte per subspace.
    Product(PqCodebook),
}

impl Quantizer {
    pub fn is_identity(&self) -> bool {
        matches!(self, Quantizer::Identity)
    }

    pub fn codebook(&self) -> Option<&PqCodebook> {
        match self {
            Quantizer::Identity => None,
            Quantizer::Product(cb) => Some(cb),
        }
    }
}

/// Product-quantizer training parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PqParams {
    /// Number of subspaces.
    pub m: usize,
    /// Centroids per subspace, at most 256.
    pub ks: usize,
    /// Maximum Lloyd iterations per subspace.
    pub iters: usize,
    pub seed: u64,
}

impl PqParams {
    pub fn new(m: usize) -> Self {
        PqParams {
            m,
            ks: 256,
            iters: 25,
            seed: 0,
        }
    }

    /// Picks `m` so each subspace has 8 components (or 4 when 8 does not
    /// divide `dim`).
    pub fn for_dim(dim: usize) -> Result<Self> {
        [8, 4]
            .into_iter()
            .find(|dsub| dim.is_multiple_of(*dsub))
            .map(|dsub| PqParams::new(dim / dsub))
            .ok_or_else(|| Error::invalid(format!("no default subspace split for dim {dim}")))
    }
}

/// Trained centroids, laid out `[subspace][centroid][component]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PqCodebook {
    m: usize,
    ks: usize,
    dsub: usize,
    centroids: Vec<f32>,
}

impl PqCodebook {
    pub fn from_centroids(m: usize, ks: usize, dsub: usize, centroids: Vec<f32>) -> Result<Self> {
        if m == 0 || ks == 0 || dsub == 0 {
            return Err(Error::invalid("codebook dimensions must be positive"));
        }
        if ks > 256 {
            return Err(Error::invalid(format!(
                "ks = {ks} does not fit in one byte"
            )));
        }
        if centroids.len() != m * ks * dsub {
            return Err(Error::invalid(format!(
                "expected {} centroid components, got {}",
                m * ks * dsub,
                centroids.len()
            )));
        }
        if centroids.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("non-finite centroid component"));
        }
        Ok(PqCodebook {
            m,
            ks,
            dsub,
            centroids,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn ks(&self) -> usize {
        self.ks
    }

    pub fn dsub(&self) -> usize {
        self.dsub
    }

    pub fn dim(&self) -> usize {
        self.m * self.dsub
    }

    pub fn centroids(&self) -> &[f32] {
        &self.centroids
    }

    #[inline]
    pub fn centroid(&self, sub: usize, c: usize) -> &[f32] {
        let start = (sub * self.ks + c) * self.dsub;
        &self.centroids[start..start + self.dsub]
    }

    fn check_dim(&self, len: usize) -> Result<()> {
        if len != self.dim() {
            return Err(Error::invalid(format!(
                "vector has {len} components, codebook expects {}",
                self.dim()
            )));
        }
        Ok(())
    }

    /// Nearest-centroid code for `v`; ties go to the lowest centroid index.
    pub fn encode(&self, v: &[f32]) -> Result<PqCode> {
        self.check_dim(v.len())?;
        let mut codes = vec![0u8; self.m];
        self.encode_into(v, &mut codes);
        Ok(PqCode(codes))
    }

    pub(crate) fn encode_into(&self, v: &[f32], out: &mut [u8]) {
        for (sub, (x, slot)) in v.chunks_exact(self.dsub).zip(out.iter_mut()).enumerate() {
            *slot = nearest(self.centroids_of(sub), self.dsub, x).0 as u8;
        }
    }

    /// Concatenation of the selected centroids.
    pub fn decode(&self, code: &[u8]) -> Result<Vec<f32>> {
        self.check_code(code)?;
        let mut out = Vec::with_capacity(self.dim());
        for (sub, &c) in code.iter().enumerate() {
            out.extend_from_slice(self.centroid(sub, c as usize));
        }
        Ok(out)
    }

    pub(crate) fn check_code(&self, code: &[u8]) -> Result<()> {
        if code.len() != self.m {
            return Err(Error::invalid(format!(
                "code has {} entries, codebook has {} subspaces",
                code.len(),
                self.m
            )));
        }
        if let Some(pos) = code.iter().position(|&c| c as usize >= self.ks) {
            return Err(Error::invalid(format!(
                "code entry {} at subspace {pos} exceeds ks = {}",
                code[pos], self.ks
            )));
        }
        Ok(())
    }

    fn centroids_of(&self, sub: usize) -> &[f32] {
        let w = self.ks * self.dsub;
        &self.centroids[sub * w..(sub + 1) * w]
    }

    /// Per-subspace scores of `query` against every centroid.
    pub fn distance_table(&self, query: &[f32], measure: Measure) -> Result<DistanceTable> {
        self.check_dim(query.len())?;
        let mut table = Vec::with_capacity(self.m * self.ks);
        for (sub, q) in query.chunks_exact(self.dsub).enumerate() {
            let cents = self.centroids_of(sub);
            table.extend(cents.chunks_exact(self.dsub).map(|c| match measure {
                Measure::SquaredL2 => squared_l2_unchecked(q, c),
                Measure::InnerProduct => dot_unchecked(q, c),
            }));
        }
        Ok(DistanceTable {
            m: self.m,
            ks: self.ks,
            table,
        })
    }
}

/// Compact code: one centroid index per subspace.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PqCode(pub Vec<u8>);

impl PqCode {
    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }
}

/// `m × ks` partial scores of one query against every centroid.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceTable {
    m: usize,
    ks: usize,
    table: Vec<f32>,
}

impl DistanceTable {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn ks(&self) -> usize {
        self.ks
    }

    pub fn get(&self, sub: usize, c: usize) -> f32 {
        self.table[sub * self.ks + c]
    }

    /// Sums the table entries selected by `code`.
    pub fn adc_score(&self, code: &[u8]) -> Result<f32> {
        if code.len() != self.m {
            return Err(Error::invalid(format!(
                "code has {} entries, table has {} subspaces",
                code.len(),
                self.m
            )));
        }
        if code.iter().any(|&c| c as usize >= self.ks) {
            return Err(Error::invalid("code entry outside the table"));
        }
        Ok(self.adc_unchecked(code))
    }

    #[inline]
    pub(crate) fn adc_unchecked(&self, code: &[u8]) -> f32 {
        let mut sum = 0.0f32;
        for (row, &c) in self.table.chunks_exact(self.ks).zip(code) {
            sum += row[c as usize];
        }
        sum
    }
}

/// Free-function spellings of the codebook operations.
pub fn encode(v: &[f32], cb: &PqCodebook) -> Result<PqCode> {
    cb.encode(v)
}

pub fn decode(code: &PqCode, cb: &PqCodebook) -> Result<Vec<f32>> {
    cb.decode(&code.0)
}

pub fn build_distance_table(q: &[f32], cb: &PqCodebook, measure: Measure) -> Result<DistanceTable> {
    cb.distance_table(q, measure)
}

pub fn adc_score(code: &PqCode, table: &DistanceTable) -> Result<f32> {
    table.adc_score(&code.0)
}

/// Per-iteration training objective, summed over subspaces.
///
/// Entry `t` is the mean squared reconstruction error of the training
/// sample under the assignment computed at iteration `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainTrace {
    pub objective: Vec<f64>,
    pub per_subspace: Vec<Vec<f64>>,
}

/// Trains a product quantizer on `rows` (row-major, `dim` columns).
pub fn train_pq(rows: &[f32], dim: usize, params: &PqParams, exec: Exec) -> Result<PqCodebook> {
    train_pq_traced(rows, dim, params, exec).map(|(cb, _)| cb)
}

pub fn train_pq_traced(
    rows: &[f32],
    dim: usize,
    params: &PqParams,
    exec: Exec,
) -> Result<(PqCodebook, TrainTrace)> {
    let PqParams { m, ks, iters, seed } = *params;
    if dim == 0 || rows.is_empty() {
        return Err(Error::invalid("training sample is empty"));
    }
    if !rows.len().is_multiple_of(dim) {
        return Err(Error::invalid(
            "training buffer is not a whole number of rows",
        ));
    }
    if m == 0 || !dim.is_multiple_of(m) {
        return Err(Error::invalid(format!(
            "dim {dim} not divisible by m = {m}"
        )));
    }
    if ks == 0 || ks > 256 {
        return Err(Error::invalid(format!("ks = {ks} must be in 1..=256")));
    }
    if rows.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("training sample contains non-finite values"));
    }
    let n = rows.len() / dim;
    let dsub = dim / m;
    if n < ks {
        log::warn!("training sample of {n} vectors is smaller than ks = {ks}");
    }

    let subspaces: Vec<usize> = (0..m).collect();
    let trained = exec.map(&subspaces, |&sub| {
        let data: Vec<f32> = rows
            .chunks_exact(dim)
            .flat_map(|r| &r[sub * dsub..(sub + 1) * dsub])
            .copied()
            .collect();
        let mut rng =
            ChaCha8Rng::seed_from_u64(seed ^ (sub as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        kmeans(&data, dsub, ks, iters, &mut rng)
    });

    let mut centroids = Vec::with_capacity(m * ks * dsub);
    let mut per_subspace = Vec::with_capacity(m);
    for (cents, trace) in trained {
        centroids.extend_from_slice(&cents);
        per_subspace.push(trace);
    }
    let rounds = per_subspace.iter().map(Vec::len).max().unwrap_or(0);
    let objective = (0..rounds)
        .map(|t| per_subspace.iter().map(|tr| tr[t.min(tr.len() - 1)]).sum())
        .collect();
    let cb = PqCodebook::from_centroids(m, ks, dsub, centroids)?;
    Ok((
        cb,
        TrainTrace {
            objective,
            per_subspace,
        },
    ))
}

/// Index and squared distance of the nearest centroid, lowest index on ties.
#[inline]
fn nearest(cents: &[f32], dsub: usize, x: &[f32]) -> (usize, f32) {
    let mut best = (0, f32::INFINITY);
    for (c, cent) in cents.chunks_exact(dsub).enumerate() {
        let d = squared_l2_unchecked(x, cent);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

/// Lloyd's k-means on `n × dsub` data. Returns the centroids and the mean
/// squared error measured at each assignment step.
fn kmeans(
    data: &[f32],
    dsub: usize,
    ks: usize,
    iters: usize,
    rng: &mut ChaCha8Rng,
) -> (Vec<f32>, Vec<f64>) {
    let n = data.len() / dsub;
    let row = |i: usize| &data[i * dsub..(i + 1) * dsub];

    let mut cents = Vec::with_capacity(ks * dsub);
    let picks = index::sample(rng, n, ks.min(n)).into_vec();
    for c in 0..ks {
        cents.extend_from_slice(row(picks[c % picks.len()]));
    }

    let mut assign = vec![usize::MAX; n];
    let mut err = vec![0f32; n];
    let mut trace = Vec::with_capacity(iters);
    let mut sums = vec![0f64; ks * dsub];
    let mut counts = vec![0usize; ks];

    for _ in 0..iters.max(1) {
        let mut changed = 0usize;
        let mut total = 0f64;
        for i in 0..n {
            let (c, d) = nearest(&cents, dsub, row(i));
            if assign[i] != c {
                assign[i] = c;
                changed += 1;
            }
            err[i] = d;
            total += d as f64;
        }
        trace.push(total / n as f64);
        if changed == 0 {
            break;
        }

        sums.iter_mut().for_each(|s| *s = 0.0);
        counts.iter_mut().for_each(|c| *c = 0);
        for (i, &c) in assign.iter().enumerate() {
            counts[c] += 1;
            for (s, &x) in sums[c * dsub..(c + 1) * dsub].iter_mut().zip(row(i)) {
                *s += x as f64;
            }
        }
        for c in 0..ks {
            if counts[c] > 0 {
                let inv = 1.0 / counts[c] as f64;
                for (dst, &s) in cents[c * dsub..(c + 1) * dsub]
                    .iter_mut()
                    .zip(&sums[c * dsub..(c + 1) * dsub])
                {
                    *dst = (s * inv) as f32;
                }
            }
        }

        // Empty clusters take over the points worst served by their centroid.
        let empty: Vec<usize> = (0..ks).filter(|&c| counts[c] == 0).collect();
        if !empty.is_empty() {
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| err[b].total_cmp(&err[a]).then(a.cmp(&b)));
            for (c, &p) in empty.iter().zip(order.iter().filter(|&&p| err[p] > 0.0)) {
                cents[c * dsub..(c + 1) * dsub].copy_from_slice(row(p));
            }
        }
    }
    (cents, trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_distr::{Distribution, Normal};

    fn random_rows(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> Vec<f32> {
        (0..n * dim).map(|_| rng.random_range(-1.0..1.0)).collect()
    }

    fn params(m: usize, ks: usize) -> PqParams {
        PqParams {
            m,
            ks,
            iters: 25,
            seed: 3,
        }
    }

    #[test]
    fn training_on_exactly_ks_points_reproduces_them() {
        let pts = vec![0.0, 0.0, 5.0, 1.0, -3.0, 2.0, 8.0, 8.0];
        let (cb, trace) = train_pq_traced(&pts, 2, &params(1, 4), Exec::Sequential).unwrap();
        let mut got: Vec<Vec<f32>> = (0..4).map(|c| cb.centroid(0, c).to_vec()).collect();
        got.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut want: Vec<Vec<f32>> = pts.chunks(2).map(|c| c.to_vec()).collect();
        want.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(got, want);
        assert_eq!(*trace.objective.last().unwrap(), 0.0);
    }

    #[test]
    fn single_centroid_is_the_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let rows = random_rows(&mut rng, 500, 6);
        let cb = train_pq(&rows, 6, &params(1, 1), Exec::Sequential).unwrap();
        for j in 0..6 {
            let mean: f64 = rows.chunks(6).map(|r| r[j] as f64).sum::<f64>() / 500.0;
            assert!((cb.centroid(0, 0)[j] as f64 - mean).abs() < 1e-5);
        }
    }

    #[test]
    fn separated_clusters_are_recovered() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let means = [[0.0f32, 0.0], [10.0, 0.0], [0.0, 10.0], [10.0, 10.0]];
        let noise = Normal::new(0.0f32, 0.3).unwrap();
        let mut rows = Vec::new();
        for i in 0..2000 {
            let mu = means[i % 4];
            rows.push(mu[0] + noise.sample(&mut rng));
            rows.push(mu[1] + noise.sample(&mut rng));
        }
        // Random-sample starts can settle in a local minimum, so keep the
        // lowest-objective run of a few seeds.
        let (best_cb, _) = (0..8)
            .map(|seed| {
                let p = PqParams {
                    seed,
                    ..params(1, 4)
                };
                train_pq_traced(&rows, 2, &p, Exec::Sequential).unwrap()
            })
            .min_by(|a, b| {
                let last = |t: &TrainTrace| *t.objective.last().unwrap();
                last(&a.1).total_cmp(&last(&b.1))
            })
            .unwrap();
        for mu in means {
            let best = (0..4)
                .map(|c| squared_l2_unchecked(best_cb.centroid(0, c), &mu).sqrt())
                .fold(f32::INFINITY, f32::min);
            assert!(best < 0.1, "no centroid near {mu:?}: {best}");
        }
    }

    #[test]
    fn objective_never_increases() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let rows = random_rows(&mut rng, 3000, 8);
        let (_, trace) = train_pq_traced(&rows, 8, &params(2, 64), Exec::Sequential).unwrap();
        for tr in &trace.per_subspace {
            for w in tr.windows(2) {
                assert!(w[1] <= w[0], "objective rose: {w:?}");
            }
        }
        for w in trace.objective.windows(2) {
            assert!(w[1] <= w[0]);
        }
    }

    #[test]
    fn training_rejects_bad_shapes() {
        assert!(train_pq(&[], 4, &params(2, 4), Exec::Sequential).is_err());
        assert!(train_pq(&[1.0; 12], 6, &params(4, 2), Exec::Sequential).is_err());
        assert!(train_pq(&[1.0; 12], 6, &params(2, 300), Exec::Sequential).is_err());
    }

    #[test]
    fn parallel_and_sequential_training_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let rows = random_rows(&mut rng, 800, 16);
        let a = train_pq(&rows, 16, &params(4, 16), Exec::Sequential).unwrap();
        let b = train_pq(&rows, 16, &params(4, 16), Exec::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn encode_matches_brute_force_argmin() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rows = random_rows(&mut rng, 600, 12);
        let cb = train_pq(&rows, 12, &params(3, 16), Exec::Sequential).unwrap();
        for _ in 0..200 {
            let v: Vec<f32> = (0..12).map(|_| rng.random_range(-1.5..1.5)).collect();
            let code = cb.encode(&v).unwrap();
            let mut oracle_err = 0.0f64;
            for sub in 0..3 {
                let x = &v[sub * 4..sub * 4 + 4];
                let dists: Vec<f64> = (0..16)
                    .map(|c| {
                        x.iter()
                            .zip(cb.centroid(sub, c))
                            .map(|(&a, &b)| (a as f64 - b as f64).powi(2))
                            .sum()
                    })
                    .collect();
                let chosen = dists[code.0[sub] as usize];
                // argmin optimality against every other centroid
                assert!(dists.iter().all(|&d| chosen <= d + 1e-6));
                oracle_err += chosen;
            }
            let recon = cb.decode(&code.0).unwrap();
            let err = squared_l2_unchecked(&v, &recon) as f64;
            assert!((err - oracle_err).abs() <= 1e-4 * oracle_err.max(1.0));
        }
    }

    #[test]
    fn codebook_fixed_points_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let rows = random_rows(&mut rng, 400, 8);
        let cb = train_pq(&rows, 8, &params(4, 8), Exec::Sequential).unwrap();
        let picks = [3usize, 0, 7, 5];
        let v: Vec<f32> = picks
            .iter()
            .enumerate()
            .flat_map(|(s, &c)| cb.centroid(s, c).to_vec())
            .collect();
        let code = cb.encode(&v).unwrap();
        let back = cb.decode(&code.0).unwrap();
        assert_eq!(back, v);
        assert_eq!(squared_l2_unchecked(&v, &back), 0.0);
        let table = cb.distance_table(&back, Measure::SquaredL2).unwrap();
        assert_eq!(table.adc_score(&code.0).unwrap(), 0.0);
    }

    #[test]
    fn single_centroid_codebook() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let rows = random_rows(&mut rng, 100, 4);
        let cb = train_pq(&rows, 4, &params(2, 1), Exec::Sequential).unwrap();
        let q: Vec<f32> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
        let table = cb.distance_table(&q, Measure::SquaredL2).unwrap();
        let expect: Vec<f32> = cb.centroids().to_vec();
        let mut first = None;
        for r in rows.chunks(4) {
            let code = cb.encode(r).unwrap();
            assert_eq!(code.0, vec![0, 0]);
            assert_eq!(cb.decode(&code.0).unwrap(), expect);
            let s = table.adc_score(&code.0).unwrap();
            assert_eq!(*first.get_or_insert(s), s);
        }
    }

    #[test]
    fn zero_query_gives_zero_ip_table() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let rows = random_rows(&mut rng, 300, 8);
        let cb = train_pq(&rows, 8, &params(2, 16), Exec::Sequential).unwrap();
        let t = cb.distance_table(&[0.0; 8], Measure::InnerProduct).unwrap();
        for s in 0..2 {
            for c in 0..16 {
                assert_eq!(t.get(s, c), 0.0);
            }
        }
    }

    #[test]
    fn adc_matches_decode_then_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let rows = random_rows(&mut rng, 1000, 16);
        let cb = train_pq(&rows, 16, &params(4, 32), Exec::Sequential).unwrap();
        for measure in [Measure::SquaredL2, Measure::InnerProduct] {
            let q: Vec<f32> = (0..16).map(|_| rng.random_range(-1.0..1.0)).collect();
            let table = cb.distance_table(&q, measure).unwrap();
            for _ in 0..1000 {
                let code: Vec<u8> = (0..4).map(|_| rng.random_range(0..32u8)).collect();
                let recon = cb.decode(&code).unwrap();
                let oracle: f64 = match measure {
                    Measure::SquaredL2 => q
                        .iter()
                        .zip(&recon)
                        .map(|(&a, &b)| (a as f64 - b as f64).powi(2))
                        .sum(),
                    Measure::InnerProduct => q
                        .iter()
                        .zip(&recon)
                        .map(|(&a, &b)| a as f64 * b as f64)
                        .sum(),
                };
                let got = table.adc_score(&code).unwrap() as f64;
                let scale: f64 = match measure {
                    Measure::SquaredL2 => oracle,
                    Measure::InnerProduct => q
                        .iter()
                        .zip(&recon)
                        .map(|(&a, &b)| (a as f64 * b as f64).abs())
                        .sum(),
                };
                assert!(
                    (got - oracle).abs() <= 1e-4 * scale.max(1e-12),
                    "{got} vs {oracle}"
                );
            }
        }
    }

    #[test]
    fn malformed_codes_and_queries_are_rejected() {
        let cb = PqCodebook::from_centroids(2, 2, 1, vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        assert!(cb.decode(&[0, 2]).is_err());
        assert!(cb.decode(&[0]).is_err());
        assert!(cb.encode(&[1.0]).is_err());
        assert!(cb
            .distance_table(&[1.0, 2.0, 3.0], Measure::SquaredL2)
            .is_err());
        let t = cb.distance_table(&[1.0, 2.0], Measure::SquaredL2).unwrap();
        assert!(t.adc_score(&[0, 0, 0]).is_err());
        assert!(t.adc_score(&[0, 5]).is_err());
        assert!(PqCodebook::from_centroids(1, 300, 1, vec![0.0; 300]).is_err());
    }

    #[test]
    fn default_split_prefers_eight_components() {
        assert_eq!(PqParams::for_dim(128).unwrap().m, 16);
        assert_eq!(PqParams::for_dim(12).unwrap().m, 3);
        assert!(PqParams::for_dim(6).is_err());
    }
}
