//! Principal component projection of embedding vectors.

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

const MAX_SWEEPS: usize = 100;

/// Eigen-decomposition of a symmetric `n × n` matrix by cyclic Jacobi rotations.
///
/// Returns `(eigenvalues, eigenvectors)` with eigenvector `i` stored in column
/// `i` of the row-major output, sorted by descending eigenvalue.
pub fn symmetric_eigen<T: Scalar>(matrix: &[T], n: usize) -> (Vec<T>, Vec<T>) {
    assert_eq!(matrix.len(), n * n);
    let mut a = matrix.to_vec();
    let mut v = vec![T::zero(); n * n];
    for i in 0..n {
        v[i * n + i] = T::one();
    }
    let two = T::of(2.0);
    for _ in 0..MAX_SWEEPS {
        let mut off = T::zero();
        let mut diag = T::zero();
        for i in 0..n {
            diag += a[i * n + i] * a[i * n + i];
            for j in i + 1..n {
                off += a[i * n + j] * a[i * n + j];
            }
        }
        if off <= T::epsilon() * T::epsilon() * diag || off == T::zero() {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == T::zero() {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (two * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k * n + p], a[k * n + q]);
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p * n + k], a[q * n + k]);
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = T::zero();
                a[q * n + p] = T::zero();
                for k in 0..n {
                    let (vkp, vkq) = (v[k * n + p], v[k * n + q]);
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a[j * n + j]
            .partial_cmp(&a[i * n + i])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(i.cmp(&j))
    });
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let mut vectors = vec![T::zero(); n * n];
    for (col, &src) in order.iter().enumerate() {
        for row in 0..n {
            vectors[row * n + col] = v[row * n + src];
        }
    }
    (values, vectors)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Projection<T> {
    /// `n × out_dims` projected points.
    pub coords: Matrix<T>,
    /// `out_dims × d` unit principal axes.
    pub components: Matrix<T>,
    pub mean: Vec<T>,
    /// Share of total variance per component, non-increasing.
    pub explained_variance_ratio: Vec<T>,
}

impl<T: Scalar> Projection<T> {
    /// Project new points onto the fitted axes.
    pub fn transform(&self, points: &Matrix<T>) -> Result<Matrix<T>> {
        if points.dims() != self.mean.len() {
            return Err(Error::Shape(format!(
                "points have {} dims, projection expects {}",
                points.dims(),
                self.mean.len()
            )));
        }
        let k = self.components.frames();
        let mut out = Vec::with_capacity(points.frames() * k);
        for row in points.rows() {
            for axis in self.components.rows() {
                out.push(
                    row.iter()
                        .zip(&self.mean)
                        .zip(axis)
                        .map(|((&x, &m), &a)| (x - m) * a)
                        .sum(),
                );
            }
        }
        Matrix::new(points.frames(), k, out)
    }
}

fn normalize<T: Scalar>(v: &mut [T]) -> T {
    let n = v.iter().map(|&x| x * x).sum::<T>().sqrt();
    if n > T::zero() {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

/// Fit PCA on the rows of `points` and project them to `out_dims` dimensions.
///
/// Each axis is signed so that its first clearly non-zero entry is positive,
/// which makes repeated runs produce identical output. When there are fewer
/// points than dimensions the eigenproblem is solved on the Gram matrix.
pub fn pca_project<T: Scalar>(points: &Matrix<T>, out_dims: usize) -> Result<Projection<T>> {
    let (n, d) = points.shape();
    if out_dims == 0 {
        return Err(Error::Config("out_dims must be at least 1".into()));
    }
    if n < out_dims + 1 || d < out_dims {
        return Err(Error::Insufficient(format!(
            "{n} points of dimension {d} cannot give {out_dims} components"
        )));
    }
    let mean = points.column_mean();
    let centered: Vec<T> = points
        .rows()
        .flat_map(|r| r.iter().zip(&mean).map(|(&x, &m)| x - m).collect::<Vec<_>>())
        .collect();
    let row = |i: usize| &centered[i * d..(i + 1) * d];
    let scale = T::of_usize(n - 1);
    let total = centered.iter().map(|&x| x * x).sum::<T>() / scale;
    let largest = centered.iter().fold(T::zero(), |m, &x| m.max(x.abs()));
    if total == T::zero() || largest <= T::epsilon() * mean.iter().fold(T::zero(), |m, &x| m.max(x.abs())) {
        return Err(Error::Degenerate("all points are identical".into()));
    }

    let mut axes: Vec<Vec<T>> = Vec::with_capacity(out_dims);
    let mut variances: Vec<T> = Vec::with_capacity(out_dims);
    if n <= d {
        let mut gram = vec![T::zero(); n * n];
        for i in 0..n {
            for j in i..n {
                let g = row(i).iter().zip(row(j)).map(|(&a, &b)| a * b).sum::<T>() / scale;
                gram[i * n + j] = g;
                gram[j * n + i] = g;
            }
        }
        let (values, vectors) = symmetric_eigen(&gram, n);
        for c in 0..out_dims {
            let mut axis = vec![T::zero(); d];
            for i in 0..n {
                let w = vectors[i * n + c];
                for (a, &x) in axis.iter_mut().zip(row(i)) {
                    *a += w * x;
                }
            }
            axes.push(axis);
            variances.push(values[c].max(T::zero()));
        }
    } else {
        let mut cov = vec![T::zero(); d * d];
        for i in 0..n {
            let r = row(i);
            for a in 0..d {
                for b in a..d {
                    cov[a * d + b] += r[a] * r[b];
                }
            }
        }
        for a in 0..d {
            for b in a..d {
                let c = cov[a * d + b] / scale;
                cov[a * d + b] = c;
                cov[b * d + a] = c;
            }
        }
        let (values, vectors) = symmetric_eigen(&cov, d);
        for c in 0..out_dims {
            axes.push((0..d).map(|r| vectors[r * d + c]).collect());
            variances.push(values[c].max(T::zero()));
        }
    }

    // Re-orthonormalise; axes for (numerically) zero variance are completed
    // from the standard basis.
    let tiny = T::of(1e3) * T::epsilon();
    for c in 0..out_dims {
        let (done, rest) = axes.split_at_mut(c);
        let axis = &mut rest[0];
        for prev in done.iter() {
            let p: T = axis.iter().zip(prev).map(|(&a, &b)| a * b).sum();
            axis.iter_mut().zip(prev).for_each(|(a, &b)| *a -= p * b);
        }
        if normalize(axis) <= tiny {
            for e in 0..d {
                let mut cand = vec![T::zero(); d];
                cand[e] = T::one();
                for prev in done.iter() {
                    let p = prev[e];
                    cand.iter_mut().zip(prev).for_each(|(a, &b)| *a -= p * b);
                }
                if normalize(&mut cand) > T::of(0.5) {
                    *axis = cand;
                    break;
                }
            }
        }
        let peak = axis.iter().fold(T::zero(), |m, &x| m.max(x.abs()));
        if let Some(&first) = axis.iter().find(|&&x| x.abs() > T::of(1e-6) * peak) {
            if first < T::zero() {
                axis.iter_mut().for_each(|x| *x = -*x);
            }
        }
    }

    let components = Matrix::new(out_dims, d, axes.concat())?;
    let mut coords = Vec::with_capacity(n * out_dims);
    for i in 0..n {
        for axis in components.rows() {
            coords.push(row(i).iter().zip(axis).map(|(&x, &a)| x * a).sum());
        }
    }
    Ok(Projection {
        coords: Matrix::new(n, out_dims, coords)?,
        components,
        mean,
        explained_variance_ratio: variances.into_iter().map(|v| v / total).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;
    use proptest::prelude::*;

    #[test]
    fn jacobi_diagonalises_known_matrix() {
        // eigenvalues of [[2,1],[1,2]] are 3 and 1
        let (vals, vecs) = symmetric_eigen(&[2.0f64, 1.0, 1.0, 2.0], 2);
        assert!((vals[0] - 3.0).abs() < 1e-12 && (vals[1] - 1.0).abs() < 1e-12);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((vecs[0].abs() - h).abs() < 1e-12 && (vecs[2].abs() - h).abs() < 1e-12);
    }

    #[test]
    fn jacobi_reconstructs_random_symmetric() {
        let mut rng = SplitMix64::new(1);
        let n = 7;
        let mut m = vec![0.0f64; n * n];
        for i in 0..n {
            for j in i..n {
                let x = rng.next_normal();
                m[i * n + j] = x;
                m[j * n + i] = x;
            }
        }
        let (vals, vecs) = symmetric_eigen(&m, n);
        for i in 0..n {
            for j in 0..n {
                let r: f64 = (0..n).map(|k| vecs[i * n + k] * vals[k] * vecs[j * n + k]).sum();
                assert!((r - m[i * n + j]).abs() < 1e-10);
            }
        }
        assert!(vals.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn line_in_3d_is_one_component() {
        let pts: Vec<[f64; 3]> = (0..10).map(|i| {
            let t = i as f64 - 3.0;
            [1.0 + 2.0 * t, -1.0 + t, 0.5 - 3.0 * t]
        }).collect();
        let p = pca_project(&Matrix::from_rows(&pts).unwrap(), 2).unwrap();
        assert!((p.explained_variance_ratio[0] - 1.0).abs() < 1e-6);
        assert!(p.coords.rows().all(|r| r[1].abs() < 1e-6));
    }

    #[test]
    fn plane_in_10d_is_two_components() {
        let mut rng = SplitMix64::new(5);
        let basis: Vec<Vec<f64>> = (0..2).map(|_| (0..10).map(|_| rng.next_normal()).collect()).collect();
        let pts: Vec<Vec<f64>> = (0..50).map(|_| {
            let (a, b) = (rng.next_normal() * 3.0, rng.next_normal());
            (0..10).map(|k| 4.0 + a * basis[0][k] + b * basis[1][k]).collect()
        }).collect();
        let p = pca_project(&Matrix::from_rows(&pts).unwrap(), 2).unwrap();
        let sum: f64 = p.explained_variance_ratio.iter().sum();
        assert!((0.999..=1.0 + 1e-12).contains(&sum));
    }

    #[test]
    fn gram_path_matches_covariance_path() {
        let mut rng = SplitMix64::new(6);
        let wide: Vec<Vec<f64>> = (0..5).map(|_| (0..12).map(|_| rng.next_normal()).collect()).collect();
        let m = Matrix::from_rows(&wide).unwrap();
        let g = pca_project(&m, 2).unwrap();
        // Same data with 12 duplicated rows goes through the covariance route.
        let doubled = Matrix::vstack(&[m.clone(), m.clone(), m.clone()]).unwrap();
        let c = pca_project(&doubled, 2).unwrap();
        for (a, b) in g.components.as_slice().iter().zip(c.components.as_slice()) {
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
    }

    #[test]
    fn rank_one_gram_completes_basis() {
        let pts: Vec<Vec<f64>> = (0..3).map(|i| (0..8).map(|k| (i * (k + 1)) as f64).collect()).collect();
        let p = pca_project(&Matrix::from_rows(&pts).unwrap(), 2).unwrap();
        let a = p.components.row(0);
        let b = p.components.row(1);
        let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
        assert!(dot.abs() < 1e-9);
        assert!((b.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn degenerate_inputs() {
        let same = Matrix::from_rows(&[[1.0f64, 2.0], [1.0, 2.0], [1.0, 2.0]]).unwrap();
        assert!(matches!(pca_project(&same, 1), Err(Error::Degenerate(_))));
        let few = Matrix::from_rows(&[[1.0f64, 2.0], [3.0, 4.0]]).unwrap();
        assert!(pca_project(&few, 2).is_err());
    }

    #[test]
    fn works_in_f32() {
        let pts: Vec<[f32; 3]> = (0..6).map(|i| [i as f32, 2.0 * i as f32, 0.0]).collect();
        let p = pca_project(&Matrix::from_rows(&pts).unwrap(), 1).unwrap();
        assert!((p.explained_variance_ratio[0] - 1.0).abs() < 1e-5);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn ratios_and_idempotence(seed in any::<u64>()) {
            let mut rng = SplitMix64::new(seed);
            let pts: Vec<Vec<f64>> = (0..30).map(|_| {
                vec![rng.next_normal() * 5.0, rng.next_normal() * 2.0, rng.next_normal() * 0.5, rng.next_normal() * 0.1]
            }).collect();
            let p = pca_project(&Matrix::from_rows(&pts).unwrap(), 2).unwrap();
            let r = &p.explained_variance_ratio;
            prop_assert!(r[0] >= r[1]);
            prop_assert!(r.iter().sum::<f64>() <= 1.0 + 1e-12);
            let again = pca_project(&p.coords, 2).unwrap();
            for (a, b) in again.coords.as_slice().iter().zip(p.coords.as_slice()) {
                prop_assert!((a - b).abs() < 1e-8);
            }
            let t = p.transform(&Matrix::from_rows(&pts).unwrap()).unwrap();
            for (a, b) in t.as_slice().iter().zip(p.coords.as_slice()) {
                prop_assert!((a - b).abs() < 1e-9);
            }
        }
    }
}
