//! Sparse symmetric helpers and a factor-once/solve-many SPD solver.

use nalgebra::DMatrix;
use nalgebra_sparse::factorization::CscCholesky;
use nalgebra_sparse::{CscMatrix, CsrMatrix};

use crate::error::{Error, Result};

/// Relative residual bound every solve must meet.
pub const SOLVE_TOL: f64 = 1e-10;

pub fn matvec(a: &CsrMatrix<f64>, x: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; a.nrows()];
    matvec_into(a, x, &mut y);
    y
}

pub fn matvec_into(a: &CsrMatrix<f64>, x: &[f64], y: &mut [f64]) {
    for (row, out) in a.row_iter().zip(y.iter_mut()) {
        *out = row
            .col_indices()
            .iter()
            .zip(row.values())
            .map(|(&j, v)| v * x[j])
            .sum();
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `xᵀ A y`
pub fn bilinear(a: &CsrMatrix<f64>, x: &[f64], y: &[f64]) -> f64 {
    a.row_iter()
        .zip(x)
        .map(|(row, xi)| {
            xi * row
                .col_indices()
                .iter()
                .zip(row.values())
                .map(|(&j, v)| v * y[j])
                .sum::<f64>()
        })
        .sum()
}

pub fn norm2(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

/// `y += a·x`
pub fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// Cholesky factorization of a sparse SPD matrix, reused for every right-hand side.
pub struct SpdSolver {
    matrix: CsrMatrix<f64>,
    factor: CscCholesky<f64>,
}

impl std::fmt::Debug for SpdSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpdSolver")
            .field("n", &self.matrix.nrows())
            .field("nnz", &self.matrix.nnz())
            .finish()
    }
}

impl SpdSolver {
    pub fn factor(matrix: CsrMatrix<f64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::Factorization(format!(
                "matrix is {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let csc = CscMatrix::from(&matrix);
        let factor = CscCholesky::factor(&csc).map_err(|e| Error::Factorization(format!("{e:?}")))?;
        Ok(SpdSolver { matrix, factor })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CsrMatrix<f64> {
        &self.matrix
    }

    /// Solves `A x = b` and checks `‖A x - b‖ ≤ SOLVE_TOL·‖b‖`.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim();
        crate::error::ensure_len("right-hand side", n, b.len())?;
        let mut rhs = DMatrix::from_column_slice(n, 1, b);
        self.factor.solve_mut(&mut rhs);
        let x: Vec<f64> = rhs.as_slice().to_vec();

        let ax = matvec(&self.matrix, &x);
        let res = ax
            .iter()
            .zip(b)
            .map(|(l, r)| (l - r) * (l - r))
            .sum::<f64>()
            .sqrt();
        let scale = norm2(b);
        if !(res <= SOLVE_TOL * scale) && !(scale == 0.0 && res == 0.0) {
            let rel = if scale > 0.0 { res / scale } else { res };
            return Err(Error::SolveResidual {
                residual: rel,
                tol: SOLVE_TOL,
            });
        }
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra_sparse::CooMatrix;

    fn tridiag(n: usize) -> CsrMatrix<f64> {
        let mut coo = CooMatrix::new(n, n);
        for i in 0..n {
            coo.push(i, i, 4.0);
            if i + 1 < n {
                coo.push(i, i + 1, -1.0);
                coo.push(i + 1, i, -1.0);
            }
        }
        CsrMatrix::from(&coo)
    }

    #[test]
    fn solves_and_reuses_factor() {
        let a = tridiag(30);
        let s = SpdSolver::factor(a.clone()).unwrap();
        for k in 0..3 {
            let b: Vec<f64> = (0..30).map(|i| ((i * (k + 1)) as f64).sin()).collect();
            let x = s.solve(&b).unwrap();
            let r: Vec<f64> = matvec(&a, &x).iter().zip(&b).map(|(p, q)| p - q).collect();
            assert!(norm2(&r) < 1e-13);
        }
        assert_eq!(s.solve(&vec![0.0; 30]).unwrap(), vec![0.0; 30]);
    }

    #[test]
    fn rejects_indefinite() {
        let mut coo = CooMatrix::new(2, 2);
        coo.push(0, 0, 1.0);
        coo.push(0, 1, 2.0);
        coo.push(1, 0, 2.0);
        coo.push(1, 1, 1.0);
        assert!(SpdSolver::factor(CsrMatrix::from(&coo)).is_err());
    }

    #[test]
    fn bilinear_matches_dense() {
        let a = tridiag(5);
        let x = [1.0, -2.0, 0.5, 3.0, 1.0];
        let y = [0.3, 0.1, -1.0, 2.0, 0.0];
        let direct = dot(&x, &matvec(&a, &y));
        assert!((bilinear(&a, &x, &y) - direct).abs() < 1e-14);
    }
}
