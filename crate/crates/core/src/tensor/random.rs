use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use super::operator::{DensityMatrix, OperatorMatrix};
use super::state::StateVector;
use crate::error::{Error, Result};
use crate::C64;

/// Standard complex Gaussian (independent `N(0,1)` real and imaginary parts).
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-random unit vector in `C^dim` (normalised complex Gaussian).
pub fn haar_amplitudes<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<C64> {
    loop {
        let mut v: Vec<C64> = (0..dim).map(|_| complex_gaussian(rng)).collect();
        let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if n > 0.0 {
            v.iter_mut().for_each(|z| *z /= n);
            return v;
        }
    }
}

pub fn haar_state<R: Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> StateVector {
    let amps = haar_amplitudes(1usize << n_qubits, rng);
    StateVector::new(n_qubits, amps).expect("normalised by construction")
}

/// First `cols` columns of a Haar unitary on `C^dim`.
///
/// QR of a `dim x cols` Ginibre matrix with the phases of `R`'s diagonal
/// moved into `Q`, which makes the factorisation unique and the columns
/// Haar distributed.
pub fn haar_isometry<R: Rng + ?Sized>(dim: usize, cols: usize, rng: &mut R) -> DMatrix<C64> {
    assert!(cols <= dim, "isometry needs cols <= dim");
    let g = DMatrix::from_fn(dim, cols, |_, _| complex_gaussian(rng));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..cols {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> OperatorMatrix {
    OperatorMatrix::from_raw(haar_isometry(dim, dim, rng))
}

/// `G G^dag / Tr(G G^dag)` for a `dim x rank` complex Gaussian `G`
/// (induced measure; Hilbert-Schmidt when `rank == dim`).
pub fn ginibre_density<R: Rng + ?Sized>(
    dim: usize,
    rank: usize,
    rng: &mut R,
) -> Result<DensityMatrix> {
    if rank == 0 {
        return Err(Error::invalid("Ginibre rank must be positive"));
    }
    if rank > dim {
        return Err(Error::invalid(format!(
            "Ginibre rank {rank} exceeds dimension {dim}"
        )));
    }
    let g = DMatrix::from_fn(dim, rank, |_, _| complex_gaussian(rng));
    let w = &g * g.adjoint();
    let tr = w.trace().re;
    let mut m = w.scale(1.0 / tr);
    // Exact Hermiticity; the product is Hermitian only up to rounding.
    let mh = m.adjoint();
    m = (m + mh).scale(0.5);
    Ok(DensityMatrix::from_trusted(OperatorMatrix::from_raw(m)))
}
