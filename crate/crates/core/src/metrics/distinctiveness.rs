//! Speaker-distinctiveness scoring from per-speaker embeddings.
//!
//! Similarity between two speakers is the mean cosine over all cross pairs of
//! their embeddings (no PLDA back-end). Diagonal dominance is the absolute gap
//! between the mean diagonal and mean off-diagonal similarity, and the gain of
//! voice distinctiveness compares the dominance of the anonymized-vs-anonymized
//! matrix with that of the original-vs-original matrix in decibels.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::matrix::{dot, norm, Matrix};
use crate::scalar::Scalar;

/// Square speaker-by-speaker affinity matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix<T> {
    pub ids: Vec<String>,
    /// Row-major `n × n`; row = speaker on side A, column = speaker on side B.
    pub entries: Vec<T>,
}

impl<T: Scalar> SimilarityMatrix<T> {
    pub fn new(ids: Vec<String>, entries: Vec<T>) -> Result<Self> {
        if entries.len() != ids.len() * ids.len() {
            return Err(Error::Shape(format!(
                "{} entries for {} speakers",
                entries.len(),
                ids.len()
            )));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("similarities must be finite".into()));
        }
        Ok(Self { ids, entries })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.ids.len()
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> T {
        self.entries[row * self.n() + col]
    }
}

/// Mean cross-pair cosine similarity between each speaker in `a` and each in `b`.
///
/// Speakers are ordered by id. Both maps must hold the same ids, each with at
/// least one embedding row, all with the same dimension.
pub fn similarity_matrix<T: Scalar>(
    a: &BTreeMap<String, Matrix<T>>,
    b: &BTreeMap<String, Matrix<T>>,
) -> Result<SimilarityMatrix<T>> {
    if !a.keys().eq(b.keys()) {
        let only_a: Vec<_> = a.keys().filter(|k| !b.contains_key(*k)).collect();
        let only_b: Vec<_> = b.keys().filter(|k| !a.contains_key(*k)).collect();
        return Err(Error::Invalid(format!(
            "speaker sets differ (only in A: {only_a:?}, only in B: {only_b:?})"
        )));
    }
    let dims = a.values().chain(b.values()).map(|m| m.dims()).next().unwrap_or(0);
    for (id, m) in a.iter().chain(b) {
        if m.frames() == 0 {
            return Err(Error::Insufficient(format!("speaker {id:?} has no embeddings")));
        }
        if m.dims() != dims {
            return Err(Error::Shape(format!(
                "speaker {id:?} embeddings have {} dims, expected {dims}",
                m.dims()
            )));
        }
    }
    let unit = |m: &Matrix<T>| -> Vec<Vec<f64>> {
        m.rows()
            .map(|r| {
                let n = norm(r);
                r.iter()
                    .map(|v| if n > 0.0 { v.as_f64() / n } else { 0.0 })
                    .collect()
            })
            .collect()
    };
    let ua: Vec<Vec<Vec<f64>>> = a.values().map(unit).collect();
    let ub: Vec<Vec<Vec<f64>>> = b.values().map(unit).collect();
    let mut entries = Vec::with_capacity(ua.len() * ub.len());
    for ea in &ua {
        for eb in &ub {
            let mut total = 0.0;
            for x in ea {
                for y in eb {
                    total += dot(x, y);
                }
            }
            entries.push(T::of(total / (ea.len() * eb.len()) as f64));
        }
    }
    SimilarityMatrix::new(a.keys().cloned().collect(), entries)
}

/// Unevaluated sum `hi + lo` carrying about twice the precision of `f64`.
#[derive(Debug, Clone, Copy, Default)]
struct DoubleDouble {
    hi: f64,
    lo: f64,
}

impl DoubleDouble {
    fn add(self, x: f64) -> Self {
        // TwoSum: s + e == hi + x exactly
        let s = self.hi + x;
        let v = s - self.hi;
        let e = (self.hi - (s - v)) + (x - v);
        let lo = self.lo + e;
        let hi = s + lo;
        Self {
            hi,
            lo: lo - (hi - s),
        }
    }

    fn scale(self, k: f64) -> Self {
        let p = self.hi * k;
        let e = self.hi.mul_add(k, -p);
        Self { hi: p, lo: 0.0 }.add(e + self.lo * k)
    }

    fn sub(self, other: Self) -> Self {
        self.add(-other.hi).add(-other.lo)
    }

    fn div(self, d: f64) -> f64 {
        let q = self.hi / d;
        let r = (-q).mul_add(d, self.hi) + self.lo;
        q + r / d
    }
}

/// `|mean(diagonal) − mean(off-diagonal)|`.
///
/// Accumulated in double-double so the result is correctly rounded for
/// small matrices (a constant matrix gives exactly 0).
pub fn diag_dominance<T: Scalar>(m: &SimilarityMatrix<T>) -> Result<f64> {
    let n = m.n();
    if n < 2 {
        return Err(Error::Insufficient(format!(
            "diagonal dominance needs at least 2 speakers, got {n}"
        )));
    }
    let (mut diag, mut off) = (DoubleDouble::default(), DoubleDouble::default());
    for i in 0..n {
        for j in 0..n {
            let v = m.get(i, j).as_f64();
            if i == j {
                diag = diag.add(v);
            } else {
                off = off.add(v);
            }
        }
    }
    // diag/n - off/(n(n-1)) = (diag·(n-1) - off) / (n(n-1))
    let numerator = diag.scale((n - 1) as f64).sub(off);
    Ok(numerator.div((n * (n - 1)) as f64).abs())
}

/// Gain of voice distinctiveness in dB: `10·log10(D(anon, anon) / D(orig, orig))`.
///
/// Returns negative infinity, with a warning, when the anonymized matrix has
/// no diagonal dominance at all.
pub fn gain_vd<T: Scalar>(anon_anon: &SimilarityMatrix<T>, orig_orig: &SimilarityMatrix<T>) -> Result<f64> {
    if anon_anon.n() != orig_orig.n() {
        return Err(Error::Shape(format!(
            "matrices cover {} and {} speakers",
            anon_anon.n(),
            orig_orig.n()
        )));
    }
    let denominator = diag_dominance(orig_orig)?;
    if denominator == 0.0 {
        return Err(Error::NoDiagonalDominance);
    }
    let numerator = diag_dominance(anon_anon)?;
    if numerator == 0.0 {
        log::warn!("anonymized similarity matrix has no diagonal dominance; G_VD is -inf");
        return Ok(f64::NEG_INFINITY);
    }
    Ok(10.0 * (numerator / denominator).log10())
}
