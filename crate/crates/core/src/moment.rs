//! Moment operators `sum_i p_i rho_i^{(x) k}` and their Monte Carlo estimates.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::tensor::{hermitian_eigenvalues, trace_norm, OperatorMatrix};
use crate::C64;

/// Hermiticity, positivity and trace tolerance for moment operators.
pub const MOMENT_TOL: f64 = 1e-10;

/// `k`-th moment of an ensemble on `C^local_dim`, a `local_dim^k` square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentOperator {
    k: usize,
    local_dim: usize,
    matrix: OperatorMatrix,
}

impl MomentOperator {
    pub fn new(k: usize, local_dim: usize, matrix: OperatorMatrix) -> Result<Self> {
        let dim = local_dim.pow(k as u32);
        if matrix.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: matrix.dim(),
            });
        }
        Ok(MomentOperator {
            k,
            local_dim,
            matrix,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn matrix(&self) -> &OperatorMatrix {
        &self.matrix
    }

    /// Checks Hermitian, PSD and unit trace within [`MOMENT_TOL`].
    pub fn validate(&self) -> Result<()> {
        let dev = self.matrix.hermitian_deviation();
        if dev > MOMENT_TOL {
            return Err(Error::NotHermitian(dev));
        }
        let tr = self.matrix.trace();
        if (tr.re - 1.0).abs() > MOMENT_TOL || tr.im.abs() > MOMENT_TOL {
            return Err(Error::invalid(format!("moment trace is {tr}, expected 1")));
        }
        let min = hermitian_eigenvalues(&self.matrix)?
            .last()
            .copied()
            .unwrap_or(0.0);
        if min < -MOMENT_TOL {
            return Err(Error::NotPsd(min));
        }
        Ok(())
    }

    fn check_shape(&self, other: &MomentOperator) -> Result<()> {
        if self.k != other.k || self.local_dim != other.local_dim {
            return Err(Error::invalid(format!(
                "moment shapes differ: (k={}, D={}) vs (k={}, D={})",
                self.k, self.local_dim, other.k, other.local_dim
            )));
        }
        Ok(())
    }

    /// `|| self - other ||_1`.
    pub fn distance(&self, other: &MomentOperator) -> Result<f64> {
        self.check_shape(other)?;
        trace_norm(&self.matrix.sub(&other.matrix)?)
    }

    /// `Tr[M SWAP]` for `k = 2`, the ensemble-average purity.
    pub fn average_purity(&self) -> Result<f64> {
        if self.k != 2 {
            return Err(Error::invalid("average purity needs the second moment"));
        }
        let d = self.local_dim;
        let m = self.matrix.matrix();
        let mut acc = 0.0;
        for i in 0..d {
            for j in 0..d {
                acc += m[(i * d + j, j * d + i)].re;
            }
        }
        Ok(acc)
    }
}

/// Sample-mean moment with an entrywise standard error.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentEstimate {
    pub k: usize,
    pub local_dim: usize,
    pub mean: OperatorMatrix,
    /// Row-major standard error of each complex entry, `sqrt(var(re) + var(im)) / sqrt(n)`.
    pub stderr: Vec<f64>,
    pub n_samples: usize,
}

impl MomentEstimate {
    pub fn stderr_at(&self, row: usize, col: usize) -> f64 {
        self.stderr[row * self.mean.dim() + col]
    }

    /// Sample standard deviation of each entry, `stderr * sqrt(n)`.
    pub fn std_dev(&self) -> Vec<f64> {
        let s = (self.n_samples as f64).sqrt();
        self.stderr.iter().map(|e| e * s).collect()
    }

    /// Largest `|mean - reference| / stderr` over all entries. Entries whose
    /// standard error is below `floor` are compared against `floor` instead.
    pub fn max_z(&self, reference: &OperatorMatrix, floor: f64) -> Result<f64> {
        if reference.dim() != self.mean.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.mean.dim(),
                found: reference.dim(),
            });
        }
        let d = self.mean.dim();
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                let diff = (self.mean.get(i, j) - reference.get(i, j)).norm();
                worst = worst.max(diff / self.stderr_at(i, j).max(floor));
            }
        }
        Ok(worst)
    }

    /// Every entry within `n_sigma` standard errors (plus `abs_floor`) of `reference`.
    pub fn agrees_with(&self, reference: &OperatorMatrix, n_sigma: f64, abs_floor: f64) -> bool {
        let d = self.mean.dim();
        reference.dim() == d
            && (0..d).all(|i| {
                (0..d).all(|j| {
                    let diff = (self.mean.get(i, j) - reference.get(i, j)).norm();
                    diff <= n_sigma * self.stderr_at(i, j) + abs_floor
                })
            })
    }
}

/// Running sums of `w * rho^{(x) k}` terms, merged in a fixed order.
#[derive(Debug, Clone)]
pub(crate) struct MomentAccumulator {
    dim: usize,
    sum: Vec<C64>,
    sum_sq: Vec<f64>,
    n: usize,
    scratch: TensorPower,
}

impl MomentAccumulator {
    pub fn new(local_dim: usize, k: usize) -> Self {
        let dim = local_dim.pow(k as u32);
        MomentAccumulator {
            dim,
            sum: vec![C64::new(0.0, 0.0); dim * dim],
            sum_sq: vec![0.0; dim * dim],
            n: 0,
            scratch: TensorPower::new(local_dim, k),
        }
    }

    /// Adds one sample `weight * rho^{(x) k}` (`rho` row-major).
    pub fn push(&mut self, rho: &[C64], weight: f64) {
        let term = self.scratch.compute(rho);
        for ((s, q), &t) in self.sum.iter_mut().zip(self.sum_sq.iter_mut()).zip(term) {
            let x = t * weight;
            *s += x;
            *q += x.norm_sqr();
        }
        self.n += 1;
    }

    /// Adds one precomputed sample (row-major, `D^k x D^k`).
    pub fn push_term(&mut self, term: &[C64]) {
        for ((s, q), &x) in self.sum.iter_mut().zip(self.sum_sq.iter_mut()).zip(term) {
            *s += x;
            *q += x.norm_sqr();
        }
        self.n += 1;
    }

    pub fn merge(&mut self, other: MomentAccumulator) {
        for (a, b) in self.sum.iter_mut().zip(other.sum) {
            *a += b;
        }
        for (a, b) in self.sum_sq.iter_mut().zip(other.sum_sq) {
            *a += b;
        }
        self.n += other.n;
    }

    pub fn finish(self, k: usize, local_dim: usize) -> MomentEstimate {
        let n = self.n.max(1) as f64;
        let mean: Vec<C64> = self.sum.iter().map(|s| s / n).collect();
        let stderr = mean
            .iter()
            .zip(&self.sum_sq)
            .map(|(m, &q)| {
                if self.n < 2 {
                    return 0.0;
                }
                let var = ((q - n * m.norm_sqr()) / (n - 1.0)).max(0.0);
                (var / n).sqrt()
            })
            .collect();
        MomentEstimate {
            k,
            local_dim,
            mean: OperatorMatrix::from_raw(DMatrix::from_row_slice(self.dim, self.dim, &mean)),
            stderr,
            n_samples: self.n,
        }
    }
}

/// Weighted sum of tensor powers without per-term allocation.
#[derive(Debug, Clone)]
pub(crate) struct WeightedPowerSum {
    dim: usize,
    sum: Vec<C64>,
    scratch: TensorPower,
}

impl WeightedPowerSum {
    pub fn new(local_dim: usize, k: usize) -> Self {
        let dim = local_dim.pow(k as u32);
        WeightedPowerSum {
            dim,
            sum: vec![C64::new(0.0, 0.0); dim * dim],
            scratch: TensorPower::new(local_dim, k),
        }
    }

    pub fn push(&mut self, rho: &[C64], weight: f64) {
        let term = self.scratch.compute(rho);
        for (s, &t) in self.sum.iter_mut().zip(term) {
            *s += t * weight;
        }
    }

    pub fn merge(&mut self, other: WeightedPowerSum) {
        for (a, b) in self.sum.iter_mut().zip(other.sum) {
            *a += b;
        }
    }

    pub fn into_operator(self) -> OperatorMatrix {
        OperatorMatrix::from_raw(DMatrix::from_row_slice(self.dim, self.dim, &self.sum))
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.sum
    }
}

/// Computes `rho^{(x) k}` for row-major `rho`, copy 0 as the slow factor.
#[derive(Debug, Clone)]
pub(crate) struct TensorPower {
    local_dim: usize,
    k: usize,
    buf: Vec<C64>,
    tmp: Vec<C64>,
}

impl TensorPower {
    pub fn new(local_dim: usize, k: usize) -> Self {
        let dim = local_dim.pow(k as u32);
        TensorPower {
            local_dim,
            k,
            buf: Vec::with_capacity(dim * dim),
            tmp: Vec::with_capacity(dim * dim),
        }
    }

    pub fn compute(&mut self, rho: &[C64]) -> &[C64] {
        let d = self.local_dim;
        debug_assert_eq!(rho.len(), d * d);
        self.buf.clear();
        self.buf.extend_from_slice(rho);
        let mut cur = d;
        for _ in 1..self.k {
            let next = cur * d;
            self.tmp.clear();
            self.tmp.resize(next * next, C64::new(0.0, 0.0));
            for i in 0..cur {
                for j in 0..cur {
                    let c = self.buf[i * cur + j];
                    if c == C64::new(0.0, 0.0) {
                        continue;
                    }
                    for a in 0..d {
                        let row = (i * d + a) * next + j * d;
                        for b in 0..d {
                            self.tmp[row + b] = c * rho[a * d + b];
                        }
                    }
                }
            }
            std::mem::swap(&mut self.buf, &mut self.tmp);
            cur = next;
        }
        &self.buf
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::limits::Limits;
    use crate::tensor::kron;

    #[test]
    fn tensor_power_matches_kron() {
        let rho = OperatorMatrix::from_row_slice(
            2,
            &[
                C64::new(0.7, 0.0),
                C64::new(0.1, 0.2),
                C64::new(0.1, -0.2),
                C64::new(0.3, 0.0),
            ],
        )
        .unwrap();
        let l = Limits::default();
        let k3 = kron(&kron(&rho, &rho, &l).unwrap(), &rho, &l).unwrap();
        let mut tp = TensorPower::new(2, 3);
        let flat = tp.compute(&rho.to_row_major()).to_vec();
        assert_eq!(flat, k3.to_row_major());
    }

    #[test]
    fn accumulator_statistics() {
        let mut acc = MomentAccumulator::new(1, 1);
        for x in [1.0, 2.0, 3.0, 4.0] {
            acc.push(&[C64::new(x, 0.0)], 1.0);
        }
        let est = acc.finish(1, 1);
        assert_eq!(est.mean.get(0, 0), C64::new(2.5, 0.0));
        // sample variance 5/3, stderr sqrt(5/12)
        assert!((est.stderr[0] - (5.0f64 / 12.0).sqrt()).abs() < 1e-14);
    }
}
