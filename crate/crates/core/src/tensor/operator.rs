use nalgebra::DMatrix;

use super::linalg::{hermitian_deviation, hermitian_eigenvalues};
use super::{qubits_for_dim, QubitRegister};
use crate::error::{Error, Result};
use crate::limits::Limits;
use crate::C64;

const DENSITY_TOL: f64 = 1e-10;
const SPECTRUM_TOL: f64 = 1e-12;

/// Dense square complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix(DMatrix<C64>);

impl OperatorMatrix {
    pub fn new(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        if m.nrows() == 0 {
            return Err(Error::invalid("operator dimension must be positive"));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::invalid("operator has non-finite entries"));
        }
        Ok(OperatorMatrix(m))
    }

    pub(crate) fn from_raw(m: DMatrix<C64>) -> Self {
        debug_assert_eq!(m.nrows(), m.ncols());
        OperatorMatrix(m)
    }

    /// Row-major entries of a `dim x dim` matrix.
    pub fn from_row_slice(dim: usize, entries: &[C64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        Self::new(DMatrix::from_row_slice(dim, dim, entries))
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let dim = rows.len();
        let flat: Vec<C64> = rows
            .iter()
            .flat_map(|r| r.iter().map(|&x| C64::new(x, 0.0)))
            .collect();
        Self::from_row_slice(dim, &flat)
    }

    pub fn identity(dim: usize) -> Self {
        OperatorMatrix(DMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        OperatorMatrix(DMatrix::zeros(dim, dim))
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let n = diag.len();
        OperatorMatrix(DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                diag[i]
            } else {
                C64::new(0.0, 0.0)
            }
        }))
    }

    pub fn pauli_x() -> Self {
        Self::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap()
    }

    pub fn pauli_y() -> Self {
        let i = C64::new(0.0, 1.0);
        let z = C64::new(0.0, 0.0);
        Self::from_row_slice(2, &[z, -i, i, z]).unwrap()
    }

    pub fn pauli_z() -> Self {
        Self::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]]).unwrap()
    }

    pub fn hadamard() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Self::from_real_rows(&[&[s, s], &[s, -s]]).unwrap()
    }

    /// `exp(-i h Y)` = `[[cos h, -sin h], [sin h, cos h]]`.
    pub fn y_rotation(h: f64) -> Self {
        let (s, c) = h.sin_cos();
        Self::from_real_rows(&[&[c, -s], &[s, c]]).unwrap()
    }

    /// SWAP on `C^d (x) C^d`, built from its index action.
    pub fn swap(local_dim: usize) -> Self {
        let d = local_dim;
        let mut m = DMatrix::zeros(d * d, d * d);
        for i in 0..d {
            for j in 0..d {
                m[(j * d + i, i * d + j)] = C64::new(1.0, 0.0);
            }
        }
        OperatorMatrix(m)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.0
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.0[(row, col)]
    }

    pub fn adjoint(&self) -> Self {
        OperatorMatrix(self.0.adjoint())
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn scale(&self, factor: f64) -> Self {
        OperatorMatrix(self.0.scale(factor))
    }

    fn same_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_dim(other)?;
        Ok(OperatorMatrix(&self.0 + &other.0))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_dim(other)?;
        Ok(OperatorMatrix(&self.0 - &other.0))
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.same_dim(other)?;
        Ok(OperatorMatrix(&self.0 * &other.0))
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.same_dim(other)?;
        Ok(self
            .0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub fn hermitian_deviation(&self) -> f64 {
        hermitian_deviation(&self.0)
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        let prod = self.0.adjoint() * &self.0;
        let id = DMatrix::<C64>::identity(self.dim(), self.dim());
        (prod - id).iter().all(|z| z.norm() <= tol)
    }

    /// Row-major copy of the entries.
    pub fn to_row_major(&self) -> Vec<C64> {
        let d = self.dim();
        let mut out = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                out.push(self.0[(i, j)]);
            }
        }
        out
    }
}

/// Kronecker product with `a` as the slow (left) factor.
pub fn kron(a: &OperatorMatrix, b: &OperatorMatrix, limits: &Limits) -> Result<OperatorMatrix> {
    let dim = a
        .dim()
        .checked_mul(b.dim())
        .filter(|&d| d <= limits.max_operator_dim)
        .ok_or(Error::CapExceeded {
            what: "operator dimension",
            value: a.dim().saturating_mul(b.dim()),
            cap: limits.max_operator_dim,
        })?;
    debug_assert_eq!(dim, a.dim() * b.dim());
    Ok(OperatorMatrix(a.0.kronecker(&b.0)))
}

/// Hermitian, positive semidefinite, unit-trace operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(OperatorMatrix);

impl DensityMatrix {
    /// Validates Hermiticity, positivity and trace within `1e-10`.
    pub fn new(op: OperatorMatrix) -> Result<Self> {
        let dev = op.hermitian_deviation();
        if dev > DENSITY_TOL {
            return Err(Error::NotHermitian(dev));
        }
        let tr = op.trace();
        if (tr.re - 1.0).abs() > DENSITY_TOL || tr.im.abs() > DENSITY_TOL {
            return Err(Error::invalid(format!(
                "density matrix trace is {tr}, expected 1"
            )));
        }
        let min = hermitian_eigenvalues(&op)?.last().copied().unwrap_or(0.0);
        if min < -DENSITY_TOL {
            return Err(Error::NotPsd(min));
        }
        Ok(DensityMatrix(op))
    }

    /// Skips validation; callers guarantee the invariants by construction.
    pub(crate) fn from_trusted(op: OperatorMatrix) -> Self {
        DensityMatrix(op)
    }

    pub fn from_pure(amplitudes: &[C64]) -> Result<Self> {
        let v = nalgebra::DVector::from_column_slice(amplitudes);
        Self::new(OperatorMatrix::new(&v * v.adjoint())?)
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        DensityMatrix(OperatorMatrix::identity(dim).scale(1.0 / dim as f64))
    }

    /// Diagonal density matrix with the given populations.
    pub fn diagonal(populations: &[f64]) -> Result<Self> {
        let diag: Vec<C64> = populations.iter().map(|&p| C64::new(p, 0.0)).collect();
        Self::new(OperatorMatrix::from_diagonal(&diag))
    }

    pub fn operator(&self) -> &OperatorMatrix {
        &self.0
    }

    pub fn into_operator(self) -> OperatorMatrix {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn n_qubits(&self) -> Result<usize> {
        qubits_for_dim(self.dim())
    }

    /// `Tr rho^2`.
    pub fn purity(&self) -> f64 {
        self.0 .0.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn spectrum(&self) -> Result<Spectrum> {
        let ev = hermitian_eigenvalues(&self.0)?;
        Spectrum::new(ev)
    }

    pub fn transpose(&self) -> Self {
        DensityMatrix(OperatorMatrix(self.0 .0.transpose()))
    }
}

/// Partial trace of a qubit-register operator, keeping `keep` in the given order.
pub fn partial_trace_density(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let reg = QubitRegister::new(rho.n_qubits()?)?;
    reg.check_sites(keep)?;
    let env = reg.complement(keep);
    let keep_off = reg.offsets(keep);
    let env_off = reg.offsets(&env);
    let m = rho.operator().matrix();
    let dk = keep_off.len();
    let out = DMatrix::from_fn(dk, dk, |i, j| {
        env_off
            .iter()
            .map(|&e| m[(keep_off[i] + e, keep_off[j] + e)])
            .sum()
    });
    Ok(DensityMatrix(OperatorMatrix(out)))
}

/// Eigenvalues of a density matrix, descending.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum(Vec<f64>);

impl Spectrum {
    /// Sorts descending and validates `lambda in [-1e-12, 1]`, `sum = 1` within `1e-10`.
    pub fn new(mut eigenvalues: Vec<f64>) -> Result<Self> {
        if eigenvalues.is_empty() {
            return Err(Error::invalid("spectrum is empty"));
        }
        if let Some(bad) = eigenvalues
            .iter()
            .find(|&&l| !(-SPECTRUM_TOL..=1.0 + SPECTRUM_TOL).contains(&l))
        {
            return Err(Error::invalid(format!("eigenvalue {bad} outside [0, 1]")));
        }
        let sum: f64 = eigenvalues.iter().sum();
        if (sum - 1.0).abs() > DENSITY_TOL {
            return Err(Error::invalid(format!(
                "spectrum sums to {sum}, expected 1"
            )));
        }
        eigenvalues.sort_by(|a, b| b.total_cmp(a));
        Ok(Spectrum(eigenvalues))
    }

    pub fn pure() -> Self {
        Spectrum(vec![1.0])
    }

    /// `rank` equal eigenvalues `1/rank`.
    pub fn flat(rank: usize) -> Result<Self> {
        if rank == 0 {
            return Err(Error::invalid("flat spectrum needs rank >= 1"));
        }
        Ok(Spectrum(vec![1.0 / rank as f64; rank]))
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `sum_l lambda_l^n`.
    pub fn power_trace(&self, n: u32) -> f64 {
        self.0.iter().map(|l| l.max(0.0).powi(n as i32)).sum()
    }

    pub fn purity(&self) -> f64 {
        self.power_trace(2)
    }

    /// Number of eigenvalues above `tol`.
    pub fn rank(&self, tol: f64) -> usize {
        self.0.iter().filter(|&&l| l > tol).count()
    }

    pub fn is_pure(&self, tol: f64) -> bool {
        (self.0[0] - 1.0).abs() <= tol
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn kron_identities() {
        let l = Limits::default();
        let i4 = kron(
            &OperatorMatrix::identity(2),
            &OperatorMatrix::identity(2),
            &l,
        )
        .unwrap();
        assert_eq!(i4, OperatorMatrix::identity(4));
        let zz = kron(&OperatorMatrix::pauli_z(), &OperatorMatrix::pauli_z(), &l).unwrap();
        assert_eq!(zz.get(0, 0), c(1.0));
        // X on the slow qubit maps |10> (index 2) to |00>.
        let xi = kron(&OperatorMatrix::pauli_x(), &OperatorMatrix::identity(2), &l).unwrap();
        assert_eq!(xi.get(0, 2), c(1.0));
        assert_eq!(xi.get(2, 0), c(1.0));
    }

    #[test]
    fn kron_respects_cap() {
        let l = Limits {
            max_operator_dim: 8,
            ..Limits::default()
        };
        let err = kron(
            &OperatorMatrix::identity(4),
            &OperatorMatrix::identity(4),
            &l,
        );
        assert!(matches!(err, Err(Error::CapExceeded { value: 16, .. })));
    }

    #[test]
    fn density_validation() {
        assert!(DensityMatrix::diagonal(&[0.5, 0.5]).is_ok());
        assert!(DensityMatrix::diagonal(&[0.6, 0.6]).is_err());
        assert!(matches!(
            DensityMatrix::diagonal(&[1.5, -0.5]),
            Err(Error::NotPsd(_))
        ));
        assert!(matches!(
            DensityMatrix::new(OperatorMatrix::pauli_y()),
            Err(Error::InvalidArgument(_))
        ));
        let non_herm = OperatorMatrix::from_real_rows(&[&[0.5, 1.0], &[0.0, 0.5]]).unwrap();
        assert!(matches!(
            DensityMatrix::new(non_herm),
            Err(Error::NotHermitian(_))
        ));
    }

    #[test]
    fn spectrum_sorting_and_power_traces() {
        let s = Spectrum::new(vec![0.25, 0.75]).unwrap();
        assert_eq!(s.eigenvalues(), &[0.75, 0.25]);
        assert!((s.purity() - 0.625).abs() < 1e-15);
        assert!(Spectrum::new(vec![0.5, 0.6]).is_err());
        assert_eq!(Spectrum::flat(4).unwrap().power_trace(3), 4.0 / 64.0);
    }

    #[test]
    fn ghz_partial_trace() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut amps = vec![c(0.0); 8];
        amps[0] = c(s);
        amps[7] = c(s);
        let rho = DensityMatrix::from_pure(&amps).unwrap();
        let red = partial_trace_density(&rho, &[0, 1]).unwrap();
        let expect = DensityMatrix::diagonal(&[0.5, 0.0, 0.0, 0.5]).unwrap();
        assert!(red.operator().max_abs_diff(expect.operator()).unwrap() < 1e-15);
    }
}
