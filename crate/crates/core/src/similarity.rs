//! Pairwise similarity measures and the evaluation counter behind the
//! relative-cost metric `S = S_actual / S_full`.
//!
//! [`SimilaritySpace`] binds a measure to a dataset (precomputing norms where
//! that helps). [`CountingSimilarity`] wraps a space with an unordered-pair
//! cache and counts each pair the first time it is evaluated, so a full
//! pairwise sweep over `n` items costs exactly `n(n-1)/2`.

use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use dashmap::mapref::entry::Entry;
use dashmap::DashMap;
use rayon::prelude::*;

use crate::dataset::{FeatureVector, ItemId, LabeledDataset, SparseVector};
use crate::error::{Error, Result};

/// Dense `n x n` table of precomputed similarities, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct SimilarityMatrix {
    n: usize,
    values: Vec<f64>,
    symmetric: bool,
}

impl SimilarityMatrix {
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n * n {
            return Err(Error::Domain(format!(
                "matrix not square: {} values for n = {n}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("matrix holds non-finite values".into()));
        }
        let symmetric = (0..n).all(|i| (i + 1..n).all(|j| values[i * n + j] == values[j * n + i]));
        Ok(SimilarityMatrix {
            n,
            values,
            symmetric,
        })
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }
}

/// A similarity function `s: T x T -> R`.
#[derive(Clone, Debug)]
pub enum SimilarityMeasure {
    /// Cosine similarity over dense or sparse vectors.
    Cosine,
    /// `1 / (1 + ||a - b||)` over dense vectors; ranks neighbours like
    /// Euclidean distance and lies in `(0, 1]`.
    InverseEuclidean,
    /// Lookup in a precomputed matrix, addressed by opaque handles.
    Matrix(Arc<SimilarityMatrix>),
}

impl FromStr for SimilarityMeasure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cosine" => Ok(SimilarityMeasure::Cosine),
            "inverse-euclidean" => Ok(SimilarityMeasure::InverseEuclidean),
            other => Err(Error::Config(format!("unknown similarity {other:?}"))),
        }
    }
}

impl SimilarityMeasure {
    pub fn name(&self) -> &'static str {
        match self {
            SimilarityMeasure::Cosine => "cosine",
            SimilarityMeasure::InverseEuclidean => "inverse-euclidean",
            SimilarityMeasure::Matrix(_) => "matrix",
        }
    }

    pub fn is_symmetric(&self) -> bool {
        match self {
            SimilarityMeasure::Matrix(m) => m.is_symmetric(),
            _ => true,
        }
    }

    pub fn compare(&self, a: &FeatureVector, b: &FeatureVector) -> Result<f64> {
        match self {
            SimilarityMeasure::Cosine => cosine(a, b),
            SimilarityMeasure::InverseEuclidean => inverse_euclidean(a, b),
            SimilarityMeasure::Matrix(m) => match (a, b) {
                (FeatureVector::Opaque(i), FeatureVector::Opaque(j)) => {
                    if *i >= m.len() || *j >= m.len() {
                        return Err(Error::Domain(format!(
                            "handle ({i}, {j}) outside {0}x{0} matrix",
                            m.len()
                        )));
                    }
                    Ok(m.get(*i, *j))
                }
                _ => Err(Error::Type(format!(
                    "matrix lookup needs opaque handles, got {} and {}",
                    a.kind(),
                    b.kind()
                ))),
            },
        }
    }

    /// Checks that every item of `ds` can be fed to this measure.
    pub fn validate(&self, ds: &LabeledDataset) -> Result<()> {
        for (i, item) in ds.items().iter().enumerate() {
            self.validate_item(item)
                .map_err(|e| annotate(e, &format!("item {i}")))?;
        }
        Ok(())
    }

    pub fn validate_item(&self, item: &FeatureVector) -> Result<()> {
        match (self, item) {
            (SimilarityMeasure::Cosine, FeatureVector::Dense(v)) => {
                if squared_norm(v) == 0.0 {
                    return Err(Error::Domain("cosine of a zero vector".into()));
                }
            }
            (SimilarityMeasure::Cosine, FeatureVector::Sparse(v)) => {
                if v.nnz() == 0 {
                    return Err(Error::Domain("cosine of a zero vector".into()));
                }
            }
            (SimilarityMeasure::InverseEuclidean, FeatureVector::Dense(_)) => {}
            (SimilarityMeasure::Matrix(m), FeatureVector::Opaque(h)) => {
                if *h >= m.len() {
                    return Err(Error::Domain(format!("handle {h} outside matrix")));
                }
            }
            (measure, item) => {
                return Err(Error::Type(format!(
                    "{} similarity cannot compare {} payloads",
                    measure.name(),
                    item.kind()
                )))
            }
        }
        Ok(())
    }
}

fn annotate(e: Error, ctx: &str) -> Error {
    match e {
        Error::Domain(m) => Error::Domain(format!("{ctx}: {m}")),
        Error::Type(m) => Error::Type(format!("{ctx}: {m}")),
        other => other,
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let mut tail = 0.0;
    for (x, y) in ra.iter().zip(rb) {
        tail += x * y;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

#[inline]
fn squared_norm(a: &[f64]) -> f64 {
    dot(a, a)
}

fn sparse_dot(a: &SparseVector, b: &SparseVector) -> f64 {
    let (ai, av) = (a.indices(), a.values());
    let (bi, bv) = (b.indices(), b.values());
    let (mut p, mut q, mut sum) = (0, 0, 0.0);
    while p < ai.len() && q < bi.len() {
        match ai[p].cmp(&bi[q]) {
            std::cmp::Ordering::Less => p += 1,
            std::cmp::Ordering::Greater => q += 1,
            std::cmp::Ordering::Equal => {
                sum += av[p] * bv[q];
                p += 1;
                q += 1;
            }
        }
    }
    sum
}

#[inline]
fn cosine_from_parts(dot: f64, sq_a: f64, sq_b: f64) -> f64 {
    // sqrt of the product keeps s(x, x) == 1.0 exactly
    (dot / (sq_a * sq_b).sqrt()).clamp(-1.0, 1.0)
}

/// Cosine similarity of two dense or two sparse vectors.
pub fn cosine(a: &FeatureVector, b: &FeatureVector) -> Result<f64> {
    let (d, sa, sb) = match (a, b) {
        (FeatureVector::Dense(x), FeatureVector::Dense(y)) => {
            if x.len() != y.len() {
                return Err(Error::Domain(format!(
                    "dimension mismatch: {} vs {}",
                    x.len(),
                    y.len()
                )));
            }
            (dot(x, y), squared_norm(x), squared_norm(y))
        }
        (FeatureVector::Sparse(x), FeatureVector::Sparse(y)) => {
            (sparse_dot(x, y), sparse_dot(x, x), sparse_dot(y, y))
        }
        _ => {
            return Err(Error::Type(format!(
                "cosine needs two dense or two sparse vectors, got {} and {}",
                a.kind(),
                b.kind()
            )))
        }
    };
    if sa == 0.0 || sb == 0.0 {
        return Err(Error::Domain("cosine of a zero vector".into()));
    }
    Ok(cosine_from_parts(d, sa, sb))
}

/// `1 / (1 + ||a - b||)` for dense vectors.
pub fn inverse_euclidean(a: &FeatureVector, b: &FeatureVector) -> Result<f64> {
    let (x, y) = (a.as_dense()?, b.as_dense()?);
    if x.len() != y.len() {
        return Err(Error::Domain(format!(
            "dimension mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    let sq: f64 = x.iter().zip(y).map(|(p, q)| (p - q) * (p - q)).sum();
    Ok(1.0 / (1.0 + sq.sqrt()))
}

/// A measure bound to the items of one dataset.
pub struct SimilaritySpace<'a> {
    measure: &'a SimilarityMeasure,
    items: &'a [FeatureVector],
    sq_norms: Vec<f64>,
}

impl<'a> SimilaritySpace<'a> {
    pub fn new(measure: &'a SimilarityMeasure, ds: &'a LabeledDataset) -> Result<Self> {
        measure.validate(ds)?;
        let sq_norms = match measure {
            SimilarityMeasure::Cosine => ds
                .items()
                .iter()
                .map(|item| match item {
                    FeatureVector::Dense(v) => squared_norm(v),
                    FeatureVector::Sparse(v) => sparse_dot(v, v),
                    FeatureVector::Opaque(_) => f64::NAN,
                })
                .collect(),
            _ => Vec::new(),
        };
        Ok(SimilaritySpace {
            measure,
            items: ds.items(),
            sq_norms,
        })
    }

    pub fn measure(&self) -> &SimilarityMeasure {
        self.measure
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Uncounted `s(i, j)` between two items of the space.
    pub fn pair(&self, i: ItemId, j: ItemId) -> Result<f64> {
        let (a, b) = (&self.items[i.index()], &self.items[j.index()]);
        match (self.measure, a, b) {
            (SimilarityMeasure::Cosine, FeatureVector::Dense(x), FeatureVector::Dense(y)) => Ok(
                cosine_from_parts(dot(x, y), self.sq_norms[i.index()], self.sq_norms[j.index()]),
            ),
            (SimilarityMeasure::Cosine, FeatureVector::Sparse(x), FeatureVector::Sparse(y)) => {
                Ok(cosine_from_parts(
                    sparse_dot(x, y),
                    self.sq_norms[i.index()],
                    self.sq_norms[j.index()],
                ))
            }
            _ => self.measure.compare(a, b),
        }
    }

    /// Uncounted `s(x, j)` for an outside query `x`.
    pub fn query(&self, x: &FeatureVector, j: ItemId) -> Result<f64> {
        let b = &self.items[j.index()];
        match (self.measure, x, b) {
            (SimilarityMeasure::Cosine, FeatureVector::Dense(q), FeatureVector::Dense(y)) => {
                let sq = squared_norm(q);
                if sq == 0.0 {
                    return Err(Error::Domain("cosine of a zero vector".into()));
                }
                if q.len() != y.len() {
                    return Err(Error::Domain(format!(
                        "dimension mismatch: {} vs {}",
                        q.len(),
                        y.len()
                    )));
                }
                Ok(cosine_from_parts(dot(q, y), sq, self.sq_norms[j.index()]))
            }
            _ => self.measure.compare(x, b),
        }
    }
}

/// Counting, caching front end to a [`SimilaritySpace`].
///
/// Each distinct pair costs one evaluation; re-queries (in either order, for
/// symmetric measures) are served from the cache. Outside queries are counted
/// every time and never cached. Safe to share across threads.
pub struct CountingSimilarity<'a> {
    space: &'a SimilaritySpace<'a>,
    cache: DashMap<(u32, u32), f64>,
    count: AtomicU64,
    symmetric: bool,
}

impl<'a> CountingSimilarity<'a> {
    pub fn new(space: &'a SimilaritySpace<'a>) -> Self {
        CountingSimilarity {
            space,
            cache: DashMap::new(),
            count: AtomicU64::new(0),
            symmetric: space.measure.is_symmetric(),
        }
    }

    pub fn space(&self) -> &SimilaritySpace<'a> {
        self.space
    }

    pub fn evaluate(&self, i: ItemId, j: ItemId) -> Result<f64> {
        if i == j {
            return Err(Error::Domain(format!("self-similarity requested for item {i}")));
        }
        let key = if self.symmetric && j < i {
            (j.0, i.0)
        } else {
            (i.0, j.0)
        };
        if let Some(v) = self.cache.get(&key) {
            return Ok(*v);
        }
        match self.cache.entry(key) {
            Entry::Occupied(e) => Ok(*e.get()),
            Entry::Vacant(e) => {
                let v = self.space.pair(i, j)?;
                e.insert(v);
                self.count.fetch_add(1, Ordering::Relaxed);
                Ok(v)
            }
        }
    }

    /// Evaluates many pairs, in parallel on the ambient rayon pool.
    pub fn evaluate_pairs(&self, pairs: &[(ItemId, ItemId)]) -> Result<Vec<f64>> {
        pairs
            .par_iter()
            .with_min_len(512)
            .map(|&(i, j)| self.evaluate(i, j))
            .collect()
    }

    /// `s(x, j)` for a query outside the space; always counted.
    pub fn evaluate_query(&self, x: &FeatureVector, j: ItemId) -> Result<f64> {
        let v = self.space.query(x, j)?;
        self.count.fetch_add(1, Ordering::Relaxed);
        Ok(v)
    }

    /// Number of counted evaluations so far.
    pub fn count(&self) -> u64 {
        self.count.load(Ordering::Relaxed)
    }

    /// Cached value of a pair, if it has been evaluated.
    pub fn cached(&self, i: ItemId, j: ItemId) -> Option<f64> {
        let key = if self.symmetric && j < i {
            (j.0, i.0)
        } else {
            (i.0, j.0)
        };
        self.cache.get(&key).map(|v| *v)
    }

    /// Evaluations relative to a full `n x n` unordered sweep.
    pub fn s_ratio(&self, n: usize) -> f64 {
        s_ratio(self.count(), n)
    }
}

/// `count / (n(n-1)/2)`; zero when `n < 2`.
pub fn s_ratio(count: u64, n: usize) -> f64 {
    let full = full_pairs(n);
    if full == 0 {
        0.0
    } else {
        count as f64 / full as f64
    }
}

/// Number of unordered pairs among `n` items.
pub fn full_pairs(n: usize) -> u64 {
    let n = n as u64;
    n * n.saturating_sub(1) / 2
}
