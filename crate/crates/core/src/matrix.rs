use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Frame-major `frames × dims` matrix of finite values.
///
/// One row per frame. Construction rejects non-finite entries, so every
/// `Matrix` in the engine can be written to a feature file as-is.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    frames: usize,
    dims: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn new(frames: usize, dims: usize, data: Vec<T>) -> Result<Self> {
        if dims == 0 {
            return Err(Error::Shape("dims must be at least 1".into()));
        }
        if data.len() != frames * dims {
            return Err(Error::Shape(format!(
                "{} values do not fill {frames}x{dims}",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                frame: pos / dims,
                dim: pos % dims,
            });
        }
        Ok(Self { frames, dims, data })
    }

    pub fn zeros(frames: usize, dims: usize) -> Self {
        assert!(dims > 0, "dims must be at least 1");
        Self {
            frames,
            dims,
            data: vec![T::zero(); frames * dims],
        }
    }

    /// Build from explicit rows; all rows must share a non-zero length.
    pub fn from_rows<R: AsRef<[T]>>(rows: &[R]) -> Result<Self> {
        let dims = rows
            .first()
            .map(|r| r.as_ref().len())
            .ok_or_else(|| Error::Shape("no rows to infer dims from".into()))?;
        let mut data = Vec::with_capacity(rows.len() * dims);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != dims {
                return Err(Error::Shape(format!(
                    "row {i} has {} values, expected {dims}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Self::new(rows.len(), dims, data)
    }

    /// Stack matrices vertically. All parts must share `dims`.
    pub fn vstack(parts: &[Matrix<T>]) -> Result<Self> {
        let dims = parts
            .first()
            .map(|m| m.dims)
            .ok_or_else(|| Error::Shape("nothing to stack".into()))?;
        let mut data = Vec::with_capacity(parts.iter().map(|m| m.data.len()).sum());
        for m in parts {
            if m.dims != dims {
                return Err(Error::Shape(format!(
                    "cannot stack {} dims onto {dims}",
                    m.dims
                )));
            }
            data.extend_from_slice(&m.data);
        }
        Ok(Self {
            frames: data.len() / dims,
            dims,
            data,
        })
    }

    #[inline]
    pub fn frames(&self) -> usize {
        self.frames
    }

    #[inline]
    pub fn dims(&self) -> usize {
        self.dims
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.frames, self.dims)
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.dims..(i + 1) * self.dims]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.dims..(i + 1) * self.dims]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[T]> + '_ {
        self.data.chunks_exact(self.dims)
    }

    #[inline]
    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    /// Element-wise conversion to another scalar type.
    pub fn cast<U: Scalar>(&self) -> Result<Matrix<U>> {
        Matrix::new(
            self.frames,
            self.dims,
            self.data.iter().map(|&v| U::of(v.as_f64())).collect(),
        )
    }

    /// Column-wise mean, accumulated in `f64`. Empty matrices give zeros.
    pub fn column_mean(&self) -> Vec<T> {
        let mut acc = vec![0.0f64; self.dims];
        for r in self.rows() {
            for (a, &v) in acc.iter_mut().zip(r) {
                *a += v.as_f64();
            }
        }
        let n = self.frames.max(1) as f64;
        acc.into_iter().map(|a| T::of(a / n)).collect()
    }

    /// Euclidean norm of every row, accumulated in `f64`.
    pub fn row_norms(&self) -> Vec<f64> {
        self.rows().map(norm).collect()
    }

    pub(crate) fn from_parts_unchecked(frames: usize, dims: usize, data: Vec<T>) -> Self {
        debug_assert_eq!(data.len(), frames * dims);
        Self { frames, dims, data }
    }
}

#[inline]
pub(crate) fn dot<T: Scalar>(a: &[T], b: &[T]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| x.as_f64() * y.as_f64()).sum()
}

#[inline]
pub(crate) fn norm<T: Scalar>(a: &[T]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_nan_with_position() {
        let err = Matrix::new(2, 2, vec![1.0f32, 2.0, 3.0, f32::NAN]).unwrap_err();
        assert!(matches!(err, Error::NonFinite { frame: 1, dim: 1 }));
    }

    #[test]
    fn rejects_wrong_length_and_zero_dims() {
        assert!(Matrix::new(2, 3, vec![0.0f64; 5]).is_err());
        assert!(Matrix::<f64>::new(0, 0, vec![]).is_err());
    }

    #[test]
    fn empty_matrix_is_valid() {
        let m = Matrix::<f32>::new(0, 768, vec![]).unwrap();
        assert_eq!(m.shape(), (0, 768));
        assert_eq!(m.rows().count(), 0);
    }

    #[test]
    fn vstack_concatenates_rows() {
        let a = Matrix::from_rows(&[[1.0f32, 2.0]]).unwrap();
        let b = Matrix::from_rows(&[[3.0f32, 4.0], [5.0, 6.0]]).unwrap();
        let c = Matrix::vstack(&[a, b]).unwrap();
        assert_eq!(c.shape(), (3, 2));
        assert_eq!(c.row(2), &[5.0, 6.0]);
    }

    #[test]
    fn row_norms_and_mean() {
        let m = Matrix::from_rows(&[[3.0f64, 4.0], [0.0, 0.0]]).unwrap();
        assert_eq!(m.row_norms(), vec![5.0, 0.0]);
        assert_eq!(m.column_mean(), vec![1.5, 2.0]);
    }
}
