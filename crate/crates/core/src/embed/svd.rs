//! Truncated SVD of sparse matrices.
//!
//! Small problems go through a dense decomposition. Large ones use a
//! seeded randomized range finder with power iterations, reducing the
//! problem to a dense SVD of a `(d + oversample) x cols` matrix.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::embed::sparse::SparseMatrix;
use crate::error::{Error, Result};

/// Above this `min(rows, cols)` the automatic solver switches to the
/// randomized one.
pub const DENSE_LIMIT: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum SvdSolver {
    #[default]
    Auto,
    Dense,
    Randomized {
        oversample: usize,
        power_iters: usize,
        seed: u64,
    },
}

#[derive(Debug, Clone)]
pub struct TruncatedSvd {
    /// `rows x k`, orthonormal columns.
    pub u: DMatrix<f64>,
    /// Descending.
    pub singular_values: Vec<f64>,
    /// `k x cols`, orthonormal rows.
    pub v_t: DMatrix<f64>,
    /// Set when fewer than the requested dimensions could be returned.
    pub rank_deficient: bool,
}

impl TruncatedSvd {
    pub fn rank(&self) -> usize {
        self.singular_values.len()
    }

    /// `U_k * diag(s)^exponent`
    pub fn word_vectors(&self, sigma_exponent: f64) -> DMatrix<f64> {
        let mut w = self.u.clone();
        for (j, s) in self.singular_values.iter().enumerate() {
            let scale = if sigma_exponent == 0.0 { 1.0 } else { s.powf(sigma_exponent) };
            w.column_mut(j).scale_mut(scale);
        }
        w
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        let mut us = self.u.clone();
        for (j, s) in self.singular_values.iter().enumerate() {
            us.column_mut(j).scale_mut(*s);
        }
        us * &self.v_t
    }
}

fn numerical_rank(s: &[f64], rows: usize, cols: usize) -> usize {
    let smax = s.first().copied().unwrap_or(0.0);
    let tol = rows.max(cols) as f64 * f64::EPSILON * smax;
    s.iter().take_while(|&&x| x > tol).count()
}

/// Sorted, truncated SVD of a dense matrix.
fn dense_svd(m: DMatrix<f64>, d: usize) -> Result<TruncatedSvd> {
    let (rows, cols) = m.shape();
    let svd = m.svd(true, true);
    let (u, v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => return Err(Error::Numeric("SVD did not converge".into())),
    };
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let sorted: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let rank = numerical_rank(&sorted, rows, cols);
    let k = d.min(rank);
    let keep = &order[..k];
    let u = DMatrix::from_fn(rows, k, |r, j| u[(r, keep[j])]);
    let v_t = DMatrix::from_fn(k, cols, |j, c| v_t[(keep[j], c)]);
    Ok(TruncatedSvd {
        u,
        singular_values: sorted[..k].to_vec(),
        v_t,
        rank_deficient: k < d,
    })
}

fn orthonormal_basis(m: DMatrix<f64>) -> DMatrix<f64> {
    m.qr().q()
}

fn randomized_svd(m: &SparseMatrix, d: usize, oversample: usize, power_iters: usize, seed: u64) -> Result<TruncatedSvd> {
    let (rows, cols) = (m.nrows(), m.ncols());
    let l = (d + oversample).min(rows.min(cols));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let omega = DMatrix::from_fn(cols, l, |_, _| StandardNormal.sample(&mut rng));
    let mut q = orthonormal_basis(m.mul_dense(&omega));
    for _ in 0..power_iters {
        let z = orthonormal_basis(m.tr_mul_dense(&q));
        q = orthonormal_basis(m.mul_dense(&z));
    }
    // B = Qᵀ A, computed as (Aᵀ Q)ᵀ
    let b = m.tr_mul_dense(&q).transpose();
    let small = dense_svd(b, d)?;
    Ok(TruncatedSvd {
        u: q * small.u,
        singular_values: small.singular_values,
        v_t: small.v_t,
        rank_deficient: small.rank_deficient,
    })
}

/// Top-`d` singular triples of `m`. When `d` exceeds the numerical rank,
/// only rank-many triples are returned and `rank_deficient` is set.
pub fn truncated_svd(m: &SparseMatrix, d: usize, solver: SvdSolver) -> Result<TruncatedSvd> {
    if d == 0 {
        return Err(Error::InvalidInput("dimension must be >= 1".into()));
    }
    if m.nnz() == 0 {
        return Err(Error::Numeric("cannot factorize an all-zero matrix".into()));
    }
    let small_side = m.nrows().min(m.ncols());
    let solver = match solver {
        SvdSolver::Auto if small_side <= DENSE_LIMIT => SvdSolver::Dense,
        SvdSolver::Auto => SvdSolver::Randomized {
            oversample: 10,
            power_iters: 4,
            seed: 0,
        },
        s => s,
    };
    match solver {
        SvdSolver::Randomized {
            oversample,
            power_iters,
            seed,
        } => randomized_svd(m, d, oversample, power_iters, seed),
        _ => dense_svd(m.to_dense(), d),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn random_dense(rows: usize, cols: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
    }

    fn max_orthonormality_error(u: &DMatrix<f64>) -> f64 {
        let g = u.transpose() * u;
        (g - DMatrix::identity(u.ncols(), u.ncols())).abs().max()
    }

    #[test]
    fn rank_one_planted() {
        let u = DMatrix::from_column_slice(4, 1, &[0.5, 0.5, 0.5, 0.5]);
        let v = DMatrix::from_column_slice(3, 1, &[0.6, 0.0, 0.8]);
        let m = &u * v.transpose() * 7.0;
        let svd = truncated_svd(&SparseMatrix::from_dense(&m), 1, SvdSolver::Dense).unwrap();
        assert!((svd.singular_values[0] - 7.0).abs() < 1e-12);
        let cos = (svd.u.transpose() * &u)[(0, 0)].abs();
        assert!((cos - 1.0).abs() < 1e-12);
        assert!((svd.reconstruct() - m).norm() < 1e-10);
    }

    #[test]
    fn identity_three() {
        let m = SparseMatrix::from_dense(&DMatrix::identity(3, 3));
        let svd = truncated_svd(&m, 3, SvdSolver::Dense).unwrap();
        assert_eq!(svd.singular_values, vec![1.0, 1.0, 1.0]);
        let w = svd.word_vectors(1.0);
        assert!(max_orthonormality_error(&w) < 1e-12);
    }

    #[test]
    fn full_rank_reconstruction() {
        let m = random_dense(20, 15, 1);
        let svd = truncated_svd(&SparseMatrix::from_dense(&m), 15, SvdSolver::Dense).unwrap();
        assert!((svd.reconstruct() - &m).norm() / m.norm() < 1e-8);
        assert!(max_orthonormality_error(&svd.u) < 1e-8);
        assert!(svd.singular_values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn rank_deficiency_flagged() {
        let a = random_dense(10, 2, 4);
        let b = random_dense(2, 8, 5);
        let m = SparseMatrix::from_dense(&(a * b));
        let svd = truncated_svd(&m, 5, SvdSolver::Dense).unwrap();
        assert_eq!(svd.rank(), 2);
        assert!(svd.rank_deficient);
    }

    #[test]
    fn zero_matrix_is_error() {
        let m = SparseMatrix::from_triplets(3, 3, vec![]);
        assert!(truncated_svd(&m, 1, SvdSolver::Dense).is_err());
    }

    #[test]
    fn randomized_matches_dense_on_low_rank() {
        let a = random_dense(120, 6, 7);
        let b = random_dense(6, 90, 8);
        let m = SparseMatrix::from_dense(&(a * b));
        let dense = truncated_svd(&m, 6, SvdSolver::Dense).unwrap();
        let rand = truncated_svd(
            &m,
            6,
            SvdSolver::Randomized {
                oversample: 8,
                power_iters: 2,
                seed: 3,
            },
        )
        .unwrap();
        for (x, y) in dense.singular_values.iter().zip(&rand.singular_values) {
            assert!((x - y).abs() / x < 1e-9, "{x} vs {y}");
        }
        assert!(max_orthonormality_error(&rand.u) < 1e-8);
        assert!((rand.reconstruct() - m.to_dense()).norm() / m.frobenius_norm() < 1e-8);
    }
}
