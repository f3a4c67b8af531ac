//! Exact k-nearest-neighbour matching under cosine similarity.
//!
//! Each query frame is replaced by the unweighted mean of its `k` most
//! cosine-similar reference frames. Similarities are accumulated in `f64`
//! with the reference norms precomputed once per [`ReferenceSet`]; ties are
//! broken towards the lower reference row. A zero-norm vector has
//! similarity 0 with everything.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::featstore::ReferenceSet;
use crate::matrix::{dot, norm, Matrix};
use crate::scalar::Scalar;

/// Query frames per work unit.
const QUERY_BLOCK: usize = 16;
/// Reference rows per tile; 256 rows of 1024 f32 is 1 MiB.
const REFERENCE_BLOCK: usize = 256;

#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult<T> {
    pub matched: Matrix<T>,
    k: usize,
    indices: Vec<usize>,
    similarities: Vec<f64>,
}

impl<T: Scalar> MatchResult<T> {
    #[inline]
    pub fn k(&self) -> usize {
        self.k
    }

    /// Reference rows chosen for query frame `frame`, best first.
    pub fn neighbor_indices(&self, frame: usize) -> &[usize] {
        &self.indices[frame * self.k..(frame + 1) * self.k]
    }

    /// Similarities matching [`neighbor_indices`](Self::neighbor_indices), non-increasing.
    pub fn neighbor_similarities(&self, frame: usize) -> &[f64] {
        &self.similarities[frame * self.k..(frame + 1) * self.k]
    }
}

/// Bounded best-`k` list ordered by (similarity desc, index asc).
///
/// Candidates must be offered in increasing index order for the tie rule to hold.
#[derive(Debug, Clone)]
struct TopK {
    k: usize,
    items: Vec<(f64, usize)>,
}

impl TopK {
    fn new(k: usize) -> Self {
        Self {
            k,
            items: Vec::with_capacity(k + 1),
        }
    }

    #[inline]
    fn offer(&mut self, sim: f64, index: usize) {
        if self.items.len() == self.k && sim <= self.items[self.k - 1].0 {
            return;
        }
        let at = self.items.partition_point(|&(s, _)| s >= sim);
        self.items.insert(at, (sim, index));
        self.items.truncate(self.k);
    }

    fn clear(&mut self) {
        self.items.clear();
    }
}

#[inline]
fn cosine(dot: f64, norm_a: f64, norm_b: f64) -> f64 {
    if norm_a == 0.0 || norm_b == 0.0 {
        0.0
    } else {
        (dot / (norm_a * norm_b)).clamp(-1.0, 1.0)
    }
}

fn check(dims: usize, reference: &ReferenceSet<impl Scalar>, k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::Config("k must be at least 1".into()));
    }
    if dims != reference.dims() {
        return Err(Error::Shape(format!(
            "query has {dims} dims, reference has {}",
            reference.dims()
        )));
    }
    if reference.len() < k {
        return Err(Error::Insufficient(format!(
            "k={k} exceeds the {} reference rows",
            reference.len()
        )));
    }
    Ok(())
}

/// The `k` reference rows most cosine-similar to `query`.
pub fn cosine_topk<T: Scalar>(
    query: &[T],
    reference: &ReferenceSet<T>,
    k: usize,
) -> Result<(Vec<usize>, Vec<f64>)> {
    check(query.len(), reference, k)?;
    let qn = norm(query);
    if qn == 0.0 {
        log::debug!("zero-norm query vector; all similarities are 0");
    }
    let mut top = TopK::new(k);
    for (i, (row, &rn)) in reference
        .features()
        .rows()
        .zip(reference.row_norms())
        .enumerate()
    {
        top.offer(cosine(dot(query, row), qn, rn), i);
    }
    Ok(top.items.into_iter().map(|(s, i)| (i, s)).unzip())
}

/// Replace every frame of `query` by the mean of its `k` nearest reference rows.
///
/// Frames are processed in parallel blocks; each block sweeps the reference in
/// cache-sized tiles. Output is independent of the thread count.
pub fn knn_match<T: Scalar>(
    query: &Matrix<T>,
    reference: &ReferenceSet<T>,
    k: usize,
) -> Result<MatchResult<T>> {
    check(query.dims(), reference, k)?;
    let dims = query.dims();
    let frames = query.frames();
    let refs = reference.features();
    let ref_norms = reference.row_norms();
    let query_norms = query.row_norms();
    if ref_norms.iter().chain(&query_norms).any(|&n| n == 0.0) {
        log::debug!("zero-norm frames present; their similarities are 0");
    }

    let mut matched = vec![T::zero(); frames * dims];
    let mut indices = vec![0usize; frames * k];
    let mut similarities = vec![0.0f64; frames * k];

    matched
        .par_chunks_mut(QUERY_BLOCK * dims)
        .zip(indices.par_chunks_mut(QUERY_BLOCK * k))
        .zip(similarities.par_chunks_mut(QUERY_BLOCK * k))
        .enumerate()
        .for_each(|(block, ((out, idx_out), sim_out))| {
            let first = block * QUERY_BLOCK;
            let count = out.len() / dims;
            let mut tops: Vec<TopK> = (0..count).map(|_| TopK::new(k)).collect();
            for tile_start in (0..refs.frames()).step_by(REFERENCE_BLOCK) {
                let tile_end = (tile_start + REFERENCE_BLOCK).min(refs.frames());
                for (q, top) in tops.iter_mut().enumerate() {
                    let qrow = query.row(first + q);
                    let qn = query_norms[first + q];
                    for (r, &rn) in ref_norms.iter().enumerate().take(tile_end).skip(tile_start) {
                        top.offer(cosine(dot(qrow, refs.row(r)), qn, rn), r);
                    }
                }
            }
            let mut acc = vec![0.0f64; dims];
            for (q, top) in tops.iter_mut().enumerate() {
                acc.iter_mut().for_each(|a| *a = 0.0);
                for (j, &(sim, r)) in top.items.iter().enumerate() {
                    idx_out[q * k + j] = r;
                    sim_out[q * k + j] = sim;
                    for (a, &v) in acc.iter_mut().zip(refs.row(r)) {
                        *a += v.as_f64();
                    }
                }
                for (o, a) in out[q * dims..(q + 1) * dims].iter_mut().zip(&acc) {
                    *o = T::of(a / k as f64);
                }
                top.clear();
            }
        });

    Ok(MatchResult {
        matched: Matrix::from_parts_unchecked(frames, dims, matched),
        k,
        indices,
        similarities,
    })
}
