//! Validated symmetric positive (semi-)definite matrices and small
//! eigen-helpers used throughout the numerical core.

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

/// Relative asymmetry tolerated before a matrix is rejected as non-symmetric.
const SYMMETRY_RTOL: f64 = 1e-12;

/// A symmetric positive definite matrix, validated at construction and kept
/// exactly symmetric thereafter.
#[derive(Debug, Clone, PartialEq)]
pub struct SymPosDef {
    m: DMatrix<f64>,
}

impl SymPosDef {
    /// Validate and wrap `m`. The stored matrix is the symmetrization
    /// (m + mᵀ)/2, rejected if the asymmetry exceeds a 1e-12 relative
    /// tolerance or if the symmetric part is not positive definite.
    pub fn new(m: DMatrix<f64>, context: &'static str) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                context,
                expected: m.nrows(),
                got: m.ncols(),
            });
        }
        let scale = m.amax().max(f64::MIN_POSITIVE);
        let mut asym: f64 = 0.0;
        for i in 0..m.nrows() {
            for j in (i + 1)..m.ncols() {
                asym = asym.max((m[(i, j)] - m[(j, i)]).abs());
            }
        }
        if asym > SYMMETRY_RTOL * scale {
            return Err(Error::NotPositiveDefinite {
                context,
                detail: format!("asymmetry {asym:.3e} exceeds {SYMMETRY_RTOL:.0e} * {scale:.3e}"),
            });
        }
        let sym = (&m + m.transpose()) * 0.5;
        if !sym.iter().all(|x| x.is_finite()) {
            return Err(Error::NotPositiveDefinite {
                context,
                detail: "non-finite entries".into(),
            });
        }
        if sym.clone().cholesky().is_none() {
            return Err(Error::NotPositiveDefinite {
                context,
                detail: "Cholesky factorization failed".into(),
            });
        }
        Ok(SymPosDef { m: sym })
    }

    /// Dimension n of the n×n matrix.
    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    /// Borrow the underlying matrix.
    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    /// Consume into the underlying matrix.
    pub fn into_matrix(self) -> DMatrix<f64> {
        self.m
    }
}

/// Eigendecomposition of a symmetric matrix with eigenvalues sorted
/// ascending and a deterministic eigenvector sign convention (largest-magnitude
/// component of each eigenvector is positive). Returns (values, vectors) with
/// `vectors * diag(values) * vectorsᵀ` reconstructing the input.
pub fn sym_eigen_sorted(m: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = m.nrows();
    if n == 1 {
        return (DVector::from_element(1, m[(0, 0)]), DMatrix::identity(1, 1));
    }
    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut values = DVector::zeros(n);
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        values[dst] = eig.eigenvalues[src];
        let mut col = eig.eigenvectors.column(src).clone_owned();
        let mut lead = 0;
        for i in 1..n {
            if col[i].abs() > col[lead].abs() {
                lead = i;
            }
        }
        if col[lead] < 0.0 {
            col.neg_mut();
        }
        vectors.set_column(dst, &col);
    }
    (values, vectors)
}

/// Symmetric square root and inverse square root of a positive definite
/// matrix: returns (R, R⁻¹) with R·R = m.
pub fn sqrt_and_inv_sqrt(m: &SymPosDef, context: &'static str) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let n = m.dim();
    if n == 1 {
        let x = m.as_matrix()[(0, 0)];
        let r = x.sqrt();
        return Ok((
            DMatrix::from_element(1, 1, r),
            DMatrix::from_element(1, 1, 1.0 / r),
        ));
    }
    let (vals, vecs) = sym_eigen_sorted(m.as_matrix());
    if vals[0] <= 0.0 {
        return Err(Error::NotPositiveDefinite {
            context,
            detail: format!("smallest eigenvalue {:.3e}", vals[0]),
        });
    }
    let sqrt_diag = DMatrix::from_diagonal(&vals.map(f64::sqrt));
    let inv_sqrt_diag = DMatrix::from_diagonal(&vals.map(|x| 1.0 / x.sqrt()));
    let r = &vecs * sqrt_diag * vecs.transpose();
    let r_inv = &vecs * inv_sqrt_diag * vecs.transpose();
    Ok((r, r_inv))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::dmatrix;

    #[test]
    fn accepts_spd_and_symmetrizes() {
        let m = dmatrix![2.0, 0.5; 0.5 + 1e-15, 1.0];
        let s = SymPosDef::new(m, "test").unwrap();
        assert_eq!(s.as_matrix()[(0, 1)], s.as_matrix()[(1, 0)]);
    }

    #[test]
    fn rejects_asymmetric() {
        let m = dmatrix![2.0, 0.5; 0.1, 1.0];
        assert!(SymPosDef::new(m, "test").is_err());
    }

    #[test]
    fn rejects_indefinite() {
        let m = dmatrix![1.0, 2.0; 2.0, 1.0];
        assert!(SymPosDef::new(m, "test").is_err());
    }

    #[test]
    fn rejects_non_square() {
        let m = DMatrix::<f64>::zeros(2, 3);
        assert!(SymPosDef::new(m, "test").is_err());
    }

    #[test]
    fn sqrt_roundtrip() {
        let m = SymPosDef::new(dmatrix![0.0025, 0.001; 0.001, 0.002], "test").unwrap();
        let (r, r_inv) = sqrt_and_inv_sqrt(&m, "test").unwrap();
        assert_relative_eq!(&r * &r, m.as_matrix(), max_relative = 1e-12);
        assert_relative_eq!(
            &r * &r_inv,
            DMatrix::identity(2, 2),
            epsilon = 1e-12
        );
    }

    #[test]
    fn eigen_sorted_reconstructs() {
        let m = dmatrix![3.0, 1.0, 0.2; 1.0, 2.0, 0.1; 0.2, 0.1, 1.0];
        let (vals, vecs) = sym_eigen_sorted(&m);
        assert!(vals[0] <= vals[1] && vals[1] <= vals[2]);
        let rec = &vecs * DMatrix::from_diagonal(&vals) * vecs.transpose();
        assert_relative_eq!(rec, m, max_relative = 1e-12);
    }
}
