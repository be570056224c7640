//! Dense symmetric generalized eigenproblems, backed by nalgebra.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{FbmsError, Result};

/// Eigenpairs of `A x = lambda B x` with `B` symmetric positive definite,
/// ascending. Eigenvectors are `B`-orthonormal columns.
pub fn sym_generalized_eigen(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
) -> Result<(Vec<f64>, DMatrix<f64>)> {
    if a.shape() != b.shape() || a.nrows() != a.ncols() {
        return Err(FbmsError::DimensionMismatch {
            expected: a.nrows(),
            got: b.nrows(),
        });
    }
    let chol = b.clone().cholesky().ok_or_else(|| {
        FbmsError::solver("generalized eigenproblem: mass matrix not positive definite")
    })?;
    let l = chol.l();
    let linv = l
        .clone()
        .try_inverse()
        .ok_or_else(|| FbmsError::solver("generalized eigenproblem: singular Cholesky factor"))?;
    let mut c = &linv * a * linv.transpose();
    symmetrize(&mut c);
    let eig = SymmetricEigen::new(c);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let y = DMatrix::from_fn(a.nrows(), order.len(), |r, k| {
        eig.eigenvectors[(r, order[k])]
    });
    let vectors = linv.transpose() * y;
    Ok((values, vectors))
}

pub fn symmetrize(c: &mut DMatrix<f64>) {
    let n = c.nrows();
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (c[(i, j)] + c[(j, i)]);
            c[(i, j)] = v;
            c[(j, i)] = v;
        }
    }
}

/// `max |c - c^T| / max |c|`.
pub fn asymmetry(c: &DMatrix<f64>) -> f64 {
    let scale = c.amax().max(f64::MIN_POSITIVE);
    (c - c.transpose()).amax() / scale
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_pencil() {
        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![3.0, -2.0, 8.0]));
        let b = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 2.0, 4.0]));
        let (v, x) = sym_generalized_eigen(&a, &b).unwrap();
        assert_eq!(v.len(), 3);
        for (got, want) in v.iter().zip([-1.0, 2.0, 3.0]) {
            assert!((got - want).abs() < 1e-14);
        }
        let g = x.transpose() * &b * &x;
        assert!((g - DMatrix::identity(3, 3)).amax() < 1e-14);
    }

    #[test]
    fn indefinite_mass_is_rejected() {
        let a = DMatrix::identity(2, 2);
        let b = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(sym_generalized_eigen(&a, &b).is_err());
    }
}
