use nalgebra::{DMatrix, SymmetricEigen};

use super::operator::OperatorMatrix;
use crate::error::{Error, Result};
use crate::C64;

/// Inputs further than this from Hermitian are rejected.
pub const HERMITIAN_TOL: f64 = 1e-8;

pub(crate) fn hermitian_deviation(m: &DMatrix<C64>) -> f64 {
    let n = m.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

fn symmetrized(h: &OperatorMatrix) -> Result<DMatrix<C64>> {
    let m = h.matrix();
    let dev = hermitian_deviation(m);
    if dev > HERMITIAN_TOL {
        return Err(Error::NotHermitian(dev));
    }
    Ok((m + m.adjoint()).scale(0.5))
}

/// Real eigenvalues of a Hermitian matrix, descending.
pub fn hermitian_eigenvalues(h: &OperatorMatrix) -> Result<Vec<f64>> {
    let m = symmetrized(h)?;
    let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    Ok(ev)
}

/// Eigenvalues (descending) and the matching orthonormal eigenvectors as columns.
pub fn hermitian_eigen(h: &OperatorMatrix) -> Result<(Vec<f64>, DMatrix<C64>)> {
    let m = symmetrized(h)?;
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(h.dim(), h.dim(), |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((values, vectors))
}

/// Sum of absolute eigenvalues of a Hermitian matrix.
pub fn trace_norm(a: &OperatorMatrix) -> Result<f64> {
    Ok(hermitian_eigenvalues(a)?.iter().map(|l| l.abs()).sum())
}

/// Principal square root of a PSD matrix. Eigenvalues in `[-tol, 0)` are
/// clipped to zero, anything below `-tol` is an error.
pub fn sqrt_psd(a: &OperatorMatrix, tol: f64) -> Result<OperatorMatrix> {
    let (values, vectors) = hermitian_eigen(a)?;
    if let Some(&min) = values.last() {
        if min < -tol {
            return Err(Error::NotPsd(min));
        }
    }
    let n = a.dim();
    let mut scaled = vectors.clone();
    for (c, &l) in values.iter().enumerate() {
        let s = l.max(0.0).sqrt();
        for r in 0..n {
            scaled[(r, c)] *= s;
        }
    }
    Ok(OperatorMatrix::from_raw(scaled * vectors.adjoint()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::DensityMatrix;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn eigenvalue_examples() {
        let d = OperatorMatrix::from_real_rows(&[&[3.0, 0.0], &[0.0, 1.0]]).unwrap();
        assert!(close(
            &hermitian_eigenvalues(&d).unwrap(),
            &[3.0, 1.0],
            1e-12
        ));
        let x = OperatorMatrix::pauli_x();
        assert!(close(
            &hermitian_eigenvalues(&x).unwrap(),
            &[1.0, -1.0],
            1e-12
        ));
        let y = OperatorMatrix::pauli_y();
        assert!(close(
            &hermitian_eigenvalues(&y).unwrap(),
            &[1.0, -1.0],
            1e-12
        ));
        let swap = OperatorMatrix::swap(2);
        assert!(close(
            &hermitian_eigenvalues(&swap).unwrap(),
            &[1.0, 1.0, 1.0, -1.0],
            1e-12
        ));
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = OperatorMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        assert!(matches!(
            hermitian_eigenvalues(&m),
            Err(Error::NotHermitian(_))
        ));
    }

    #[test]
    fn trace_norm_examples() {
        assert_eq!(trace_norm(&OperatorMatrix::zeros(3)).unwrap(), 0.0);
        assert!((trace_norm(&OperatorMatrix::pauli_z()).unwrap() - 2.0).abs() < 1e-12);
        let rho = DensityMatrix::diagonal(&[1.0, 0.0]).unwrap();
        let sigma = DensityMatrix::maximally_mixed(2);
        let diff = rho.operator().sub(sigma.operator()).unwrap();
        assert!((trace_norm(&diff).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sqrt_of_rotated_projector() {
        let h = OperatorMatrix::hadamard();
        let p = DensityMatrix::diagonal(&[0.36, 0.64]).unwrap();
        let rotated = h.matmul(p.operator()).unwrap().matmul(&h).unwrap();
        let root = sqrt_psd(&rotated, 1e-10).unwrap();
        let back = root.matmul(&root).unwrap();
        assert!(back.max_abs_diff(&rotated).unwrap() < 1e-12);
        let neg = OperatorMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, -1e-3]]).unwrap();
        assert!(matches!(sqrt_psd(&neg, 1e-10), Err(Error::NotPsd(_))));
    }
}
