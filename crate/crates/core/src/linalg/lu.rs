//! Sparse direct LU factorization.
//!
//! The numeric kernel is faer's supernodal LU (COLAMD column ordering with
//! partial row pivoting), always run sequentially so that repeated
//! factorizations of the same input are bit-identical. The CSR arrays of
//! `A` are handed to faer as the CSC arrays of `Aᵀ`, and solves go through
//! the transposed solve path, so no copy of the matrix is made.

use std::sync::Arc;

use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::lu::partial_pivoting::factor::PartialPivLuParams;
use faer::sparse::linalg::lu::{self, LuRef, NumericLu, SymbolicLu};
use faer::sparse::linalg::LuError;
use faer::sparse::{SparseColMatRef, SymbolicSparseColMatRef};
use faer::{Conj, MatMut, Par, Spec};

use super::sparse::{norm2, SparseMatrix};
use super::LinalgError;

/// Pivots smaller than this fraction of `max|A|` are treated as zero.
pub const PIVOT_THRESHOLD: f64 = 1e-14;

/// Relative residual a solve must reach before refinement stops.
const REFINE_TARGET: f64 = 1e-13;
const MAX_REFINE_STEPS: usize = 3;

/// Fill-reducing ordering and elimination structure for one sparsity pattern.
///
/// Cheap to clone; reuse it across matrices that share a pattern to skip
/// the ordering phase.
#[derive(Clone)]
pub struct SymbolicFactorization {
    pattern_rows: Arc<Vec<usize>>,
    pattern_cols: Arc<Vec<usize>>,
    inner: Arc<SymbolicLu<usize>>,
}

impl std::fmt::Debug for SymbolicFactorization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SymbolicFactorization")
            .field("n", &(self.pattern_rows.len() - 1))
            .field("nnz", &self.pattern_cols.len())
            .finish()
    }
}

impl SymbolicFactorization {
    pub fn analyze(a: &SparseMatrix) -> Result<Self, LinalgError> {
        if !a.is_square() {
            return Err(LinalgError::DimensionMismatch {
                expected: a.nrows(),
                found: a.ncols(),
            });
        }
        let inner = lu::factorize_symbolic_lu(transposed_view(a), Default::default())
            .map_err(|e| LinalgError::Backend(format!("{e:?}")))?;
        Ok(Self {
            pattern_rows: Arc::new(a.row_offsets().to_vec()),
            pattern_cols: Arc::new(a.col_indices().to_vec()),
            inner: Arc::new(inner),
        })
    }

    fn matches(&self, a: &SparseMatrix) -> bool {
        self.pattern_rows.as_slice() == a.row_offsets()
            && self.pattern_cols.as_slice() == a.col_indices()
    }
}

/// Numeric LU factors of a square sparse matrix. Immutable once built.
pub struct Factorization {
    matrix: SparseMatrix,
    symbolic: SymbolicFactorization,
    numeric: NumericLu<usize, f64>,
}

impl std::fmt::Debug for Factorization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Factorization")
            .field("n", &self.matrix.nrows())
            .field("nnz", &self.matrix.nnz())
            .finish()
    }
}

/// Factorizes `a` from scratch.
pub fn factorize(a: &SparseMatrix) -> Result<Factorization, LinalgError> {
    let symbolic = SymbolicFactorization::analyze(a)?;
    Factorization::with_symbolic(symbolic, a)
}

/// Solves `A x = b` with an existing factorization.
pub fn solve(f: &Factorization, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
    f.solve(b)
}

fn transposed_view(a: &SparseMatrix) -> SymbolicSparseColMatRef<'_, usize> {
    SymbolicSparseColMatRef::new_checked(a.ncols(), a.nrows(), a.row_offsets(), None, a.col_indices())
}

impl Factorization {
    /// Numeric factorization reusing a previously computed ordering.
    pub fn with_symbolic(
        symbolic: SymbolicFactorization,
        a: &SparseMatrix,
    ) -> Result<Self, LinalgError> {
        if !a.is_square() {
            return Err(LinalgError::DimensionMismatch {
                expected: a.nrows(),
                found: a.ncols(),
            });
        }
        if !symbolic.matches(a) {
            return Err(LinalgError::PatternMismatch);
        }
        let n = a.nrows();
        let max_abs = a.max_abs();
        if n > 0 && max_abs == 0.0 {
            return Err(LinalgError::SingularMatrix { index: 0 });
        }

        let mut numeric = NumericLu::new();
        {
            let view = SparseColMatRef::new(transposed_view(a), a.values());
            let params: Spec<PartialPivLuParams, f64> = Default::default();
            let req = symbolic.inner.factorize_numeric_lu_scratch::<f64>(Par::Seq, params);
            let mut mem = MemBuffer::new(req);
            symbolic
                .inner
                .factorize_numeric_lu(&mut numeric, view, Par::Seq, MemStack::new(&mut mem), params)
                .map_err(|e| match e {
                    LuError::SymbolicSingular { index } => LinalgError::SingularMatrix { index },
                    other => LinalgError::Backend(format!("{other:?}")),
                })?;
        }

        let factorization = Self {
            matrix: a.clone(),
            symbolic,
            numeric,
        };
        factorization.check_pivots()?;
        Ok(factorization)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Detects numerically singular factors.
    ///
    /// The supernodal factors are not exposed pivot by pivot, so the check
    /// solves against a known vector: a pivot below `PIVOT_THRESHOLD·max|A|`
    /// either produces non-finite values or an error of order one in the
    /// recovered vector, since `1/pivot` then exceeds `1e14/max|A|`.
    fn check_pivots(&self) -> Result<(), LinalgError> {
        let n = self.dim();
        if n == 0 {
            return Ok(());
        }
        let probe: Vec<f64> = (0..n).map(|i| 1.0 + (i % 7) as f64 / 7.0).collect();
        let b = self.matrix.mul_vec(&probe)?;
        let x = self.raw_solve(&b);
        let bad = x.iter().position(|v| !v.is_finite());
        if let Some(index) = bad {
            return Err(LinalgError::SingularMatrix { index });
        }
        let err: f64 = x.iter().zip(&probe).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let scale = norm2(&probe);
        // A relative error of 1e-2 requires a conditioning near 1/eps, the
        // regime in which a pivot below the threshold leaves no digits.
        if err > 1e-2 * scale {
            return Err(LinalgError::SingularMatrix { index: n - 1 });
        }
        Ok(())
    }

    fn raw_solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut x = b.to_vec();
        let lu_ref = LuRef::<'_, usize, f64>::new_unchecked(&self.symbolic.inner, &self.numeric);
        let req = self.symbolic.inner.solve_transpose_in_place_scratch::<f64>(1, Par::Seq);
        let mut mem = MemBuffer::new(req);
        let rhs = MatMut::from_column_major_slice_mut(&mut x, n, 1);
        lu_ref.solve_transpose_in_place_with_conj(Conj::No, rhs, Par::Seq, MemStack::new(&mut mem));
        x
    }

    /// Solves `A x = b`, with a few steps of iterative refinement when the
    /// first solve leaves a relative residual above `1e-13`.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
        if b.len() != self.dim() {
            return Err(LinalgError::DimensionMismatch {
                expected: self.dim(),
                found: b.len(),
            });
        }
        let bnorm = norm2(b);
        let mut x = self.raw_solve(b);
        if bnorm == 0.0 {
            return Ok(x);
        }
        for _ in 0..MAX_REFINE_STEPS {
            let ax = self.matrix.mul_vec(&x)?;
            let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
            if norm2(&r) <= REFINE_TARGET * bnorm {
                break;
            }
            let dx = self.raw_solve(&r);
            for (xi, di) in x.iter_mut().zip(&dx) {
                *xi += di;
            }
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(LinalgError::SingularMatrix { index: 0 });
        }
        Ok(x)
    }

    /// `‖A x − b‖₂ / ‖b‖₂` for the factored matrix.
    pub fn relative_residual(&self, x: &[f64], b: &[f64]) -> Result<f64, LinalgError> {
        let ax = self.matrix.mul_vec(x)?;
        let r: f64 = ax.iter().zip(b).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let bn = norm2(b);
        Ok(if bn == 0.0 { r } else { r / bn })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_solve_returns_rhs() {
        let f = factorize(&SparseMatrix::identity(5)).unwrap();
        let b = vec![1.0, -2.0, 3.5, 0.0, 7.0];
        assert_eq!(f.solve(&b).unwrap(), b);
    }

    #[test]
    fn two_by_two_symmetric() {
        let a = SparseMatrix::from_dense(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let x = solve(&factorize(&a).unwrap(), &[3.0, 3.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn nonsymmetric_needs_pivoting() {
        // zero leading diagonal forces a row exchange
        let a = SparseMatrix::from_dense(&[
            vec![0.0, 1.0, 0.0],
            vec![2.0, 0.0, 1.0],
            vec![0.0, 3.0, 4.0],
        ])
        .unwrap();
        let x_known = [1.0, -1.0, 2.0];
        let b = a.mul_vec(&x_known).unwrap();
        let x = factorize(&a).unwrap().solve(&b).unwrap();
        for (xi, ki) in x.iter().zip(x_known) {
            assert!((xi - ki).abs() < 1e-14);
        }
    }

    #[test]
    fn singular_matrices_are_rejected() {
        let a = SparseMatrix::from_dense(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert!(matches!(factorize(&a), Err(LinalgError::SingularMatrix { .. })));
        let zero_row = SparseMatrix::from_triplets(3, 3, &[(0, 0, 1.0), (1, 1, 1.0), (1, 2, 1.0)]).unwrap();
        assert!(matches!(factorize(&zero_row), Err(LinalgError::SingularMatrix { .. })));
        let tiny = SparseMatrix::from_dense(&[vec![1.0, 1.0], vec![1.0, 1.0 + 1e-17]]).unwrap();
        assert!(matches!(factorize(&tiny), Err(LinalgError::SingularMatrix { .. })));
    }

    #[test]
    fn dimension_mismatch() {
        let a = SparseMatrix::from_triplets(2, 3, &[(0, 0, 1.0)]).unwrap();
        assert!(matches!(factorize(&a), Err(LinalgError::DimensionMismatch { .. })));
        let f = factorize(&SparseMatrix::identity(3)).unwrap();
        assert!(matches!(f.solve(&[1.0]), Err(LinalgError::DimensionMismatch { .. })));
    }

    #[test]
    fn symbolic_reuse_requires_same_pattern() {
        let a = SparseMatrix::from_dense(&[vec![4.0, 1.0], vec![1.0, 3.0]]).unwrap();
        let sym = SymbolicFactorization::analyze(&a).unwrap();
        let mut b = a.clone();
        b.values_mut()[0] = 10.0;
        let f = Factorization::with_symbolic(sym.clone(), &b).unwrap();
        let x = f.solve(&[11.0, 4.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-14 && (x[1] - 1.0).abs() < 1e-14);
        let other = SparseMatrix::identity(2);
        assert!(matches!(
            Factorization::with_symbolic(sym, &other),
            Err(LinalgError::PatternMismatch)
        ));
    }

    #[test]
    fn random_spd_systems_recover_known_solution() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let n = 5;
            let m: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
                .collect();
            // A = MᵀM + n·I
            let mut dense = vec![vec![0.0; n]; n];
            for i in 0..n {
                for j in 0..n {
                    dense[i][j] = (0..n).map(|k| m[k][i] * m[k][j]).sum::<f64>();
                }
                dense[i][i] += n as f64;
            }
            let a = SparseMatrix::from_dense(&dense).unwrap();
            let x_known: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
            let b = a.mul_vec(&x_known).unwrap();
            let f = factorize(&a).unwrap();
            let x = f.solve(&b).unwrap();
            let err: f64 = x.iter().zip(&x_known).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            assert!(err <= 1e-10 * norm2(&x_known));
            assert!(f.relative_residual(&x, &b).unwrap() <= 1e-10);
        }
    }

    #[test]
    fn repeated_factorizations_are_bit_identical() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 40;
        let mut trip = Vec::new();
        for i in 0..n {
            trip.push((i, i, 4.0 + rng.random_range(0.0..1.0)));
            for _ in 0..3 {
                let j = rng.random_range(0..n);
                trip.push((i, j, rng.random_range(-1.0..1.0)));
            }
        }
        let a = SparseMatrix::from_triplets(n, n, &trip).unwrap();
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let x1 = factorize(&a).unwrap().solve(&b).unwrap();
        let x2 = factorize(&a).unwrap().solve(&b).unwrap();
        assert!(x1.iter().zip(&x2).all(|(p, q)| p.to_bits() == q.to_bits()));
    }
}
