//! Reference-ensemble moments: the deep-thermal ensemble of a mixed state,
//! Haar, generalized Hilbert-Schmidt (gHSe) and the reweighted Scrooge estimator.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::limits::Limits;
use crate::moment::{MomentAccumulator, MomentEstimate, MomentOperator};
use crate::parallel::{ordered_reduce, DEFAULT_BLOCK};
use crate::seed::rng_for;
use crate::symm::{h_sigma, permutation_sum, power_traces, rising_factorial, CycleType};
use crate::tensor::{
    haar_amplitudes, sqrt_psd, DensityMatrix, OperatorMatrix, QubitRegister, Spectrum,
};
use crate::C64;

/// Eigenvalue clipping tolerance for `sqrt(rho)`.
pub const SQRT_TOL: f64 = 1e-10;

/// `sum_sigma w(sigma) Perm(sigma) / sum_sigma w(sigma) D^|sigma|`, for class functions `w`.
fn class_weighted_moment(
    k: usize,
    local_dim: usize,
    limits: &Limits,
    weight: impl Fn(&CycleType) -> Result<f64>,
) -> Result<MomentOperator> {
    limits.check_k(k)?;
    limits.check_power_dim(local_dim, k)?;
    let mut first_err = None;
    let mut norm = 0.0;
    let sum = permutation_sum(k, local_dim, limits, |sigma| {
        let ct = sigma.cycle_type();
        match weight(&ct) {
            Ok(w) => {
                norm += w * (local_dim as f64).powi(ct.n_cycles() as i32);
                w
            }
            Err(e) => {
                first_err.get_or_insert(e);
                0.0
            }
        }
    });
    let sum = sum?;
    if let Some(e) = first_err {
        return Err(e);
    }
    MomentOperator::new(k, local_dim, sum.scale(1.0 / norm))
}

/// Moment of the deep-thermal reference ensemble of a state with the given spectrum,
/// `sum_sigma h_sigma Perm(sigma) / sum_sigma h_sigma D^|sigma|` with
/// `h_sigma = prod_m Tr rho^{n_m}` over the cycle lengths of `sigma`.
pub fn eref_moment(
    spectrum: &Spectrum,
    local_dim: usize,
    k: usize,
    limits: &Limits,
) -> Result<MomentOperator> {
    let traces = power_traces(spectrum, k);
    class_weighted_moment(k, local_dim, limits, |ct| h_sigma(&traces, ct))
}

/// Closed-form second moment `(I + p SWAP) / (D^2 + p D)`.
pub fn eref_second_moment(purity: f64, local_dim: usize) -> Result<MomentOperator> {
    check_purity(purity)?;
    let d = local_dim as f64;
    let m = OperatorMatrix::identity(local_dim * local_dim)
        .add(&OperatorMatrix::swap(local_dim).scale(purity))?
        .scale(1.0 / (d * d + purity * d));
    MomentOperator::new(2, local_dim, m)
}

/// Ensemble-average purity of the reference ensemble, `(1 + D p) / (D + p)`.
pub fn avg_purity(purity: f64, local_dim: usize) -> f64 {
    let d = local_dim as f64;
    (1.0 + d * purity) / (d + purity)
}

fn check_purity(purity: f64) -> Result<()> {
    if !(purity > 0.0 && purity <= 1.0 + 1e-12) {
        return Err(Error::invalid(format!("purity {purity} outside (0, 1]")));
    }
    Ok(())
}

/// Haar moment, the normalized projector onto the symmetric subspace.
pub fn haar_moment(local_dim: usize, k: usize, limits: &Limits) -> Result<MomentOperator> {
    limits.check_k(k)?;
    let sum = permutation_sum(k, local_dim, limits, |_| 1.0)?;
    let norm = rising_factorial(local_dim as f64, k);
    MomentOperator::new(k, local_dim, sum.scale(1.0 / norm))
}

/// gHSe moment: `sum D_R^|sigma| Perm(sigma) / sum (D_R D_A)^|sigma|`.
pub fn ghse_moment(
    rank_dim: usize,
    local_dim: usize,
    k: usize,
    limits: &Limits,
) -> Result<MomentOperator> {
    if rank_dim == 0 {
        return Err(Error::invalid("gHSe rank dimension must be positive"));
    }
    let dr = rank_dim as f64;
    class_weighted_moment(k, local_dim, limits, |ct| Ok(dr.powi(ct.n_cycles() as i32)))
}

/// Monte Carlo gHSe moment: `Tr_R |psi><psi|` with `psi` Haar on `C^{D_R} (x) C^{D_A}`.
///
/// Sample `i` draws from the stream `(seed, "ghse", i)`.
pub fn ghse_moment_mc(
    rank_dim: usize,
    local_dim: usize,
    k: usize,
    n_samples: usize,
    seed: u64,
    limits: &Limits,
) -> Result<MomentEstimate> {
    limits.check_k(k)?;
    limits.check_power_dim(local_dim, k)?;
    if rank_dim == 0 || local_dim == 0 {
        return Err(Error::invalid("dimensions must be positive"));
    }
    let da = local_dim;
    let acc = ordered_reduce(
        n_samples,
        DEFAULT_BLOCK,
        || MomentAccumulator::new(da, k),
        |acc, i| {
            let mut rng = rng_for(seed, "ghse", i as u64);
            let psi = haar_amplitudes(rank_dim * da, &mut rng);
            let mut rho = vec![C64::new(0.0, 0.0); da * da];
            for r in 0..rank_dim {
                let row = &psi[r * da..(r + 1) * da];
                for a in 0..da {
                    for b in 0..da {
                        rho[a * da + b] += row[a] * row[b].conj();
                    }
                }
            }
            acc.push(&rho, 1.0);
        },
        |a, b| a.merge(b),
    );
    Ok(acc.finish(k, da))
}

/// `(rho0^T (x) I_A) / D_A` with the `rho0` register leading, as an `(n_x + n_a)`-qubit state.
pub fn scrooge_state(rho0: &DensityMatrix, a_qubits: usize) -> Result<DensityMatrix> {
    let da = 1usize
        .checked_shl(a_qubits as u32)
        .ok_or_else(|| Error::invalid("too many qubits"))?;
    let dx = rho0.dim();
    let t = rho0.transpose();
    let m = nalgebra::DMatrix::from_fn(dx * da, dx * da, |r, c| {
        if r % da == c % da {
            t.operator().get(r / da, c / da) / da as f64
        } else {
            C64::new(0.0, 0.0)
        }
    });
    DensityMatrix::new(OperatorMatrix::new(m)?)
}

/// Reweighted-Haar estimator of the Scrooge moment on the qubits of `rho_xa`
/// that are not in `trace_out`. Each sample contributes
/// `D_XA (Tr_X[sqrt(rho) psi psi^dag sqrt(rho)])^{(x) k} / <psi|rho|psi>^{k-1}`,
/// which has trace `D_XA <psi|rho|psi>`; only the mean has unit trace.
///
/// Sample `i` draws from the stream `(seed, "scrooge", i)`.
pub fn scrooge_moment_mc(
    rho_xa: &DensityMatrix,
    trace_out: &[usize],
    k: usize,
    n_samples: usize,
    seed: u64,
    limits: &Limits,
) -> Result<MomentEstimate> {
    limits.check_k(k)?;
    let n = rho_xa.n_qubits()?;
    let reg = QubitRegister::new(n)?;
    reg.check_sites(trace_out)?;
    let keep = reg.complement(trace_out);
    let da = 1usize << keep.len();
    limits.check_power_dim(da, k)?;
    let dxa = reg.dimension();
    let root = sqrt_psd(rho_xa.operator(), SQRT_TOL)?.into_matrix();
    let keep_off = reg.offsets(&keep);
    let out_off = reg.offsets(trace_out);

    let acc = ordered_reduce(
        n_samples,
        DEFAULT_BLOCK,
        || MomentAccumulator::new(da, k),
        |acc, i| {
            let mut rng = rng_for(seed, "scrooge", i as u64);
            let psi = DVector::from_vec(haar_amplitudes(dxa, &mut rng));
            let phi = &root * psi;
            let mut reduced = vec![C64::new(0.0, 0.0); da * da];
            let mut w = 0.0;
            for &x in &out_off {
                for a in 0..da {
                    let pa = phi[x + keep_off[a]];
                    w += pa.norm_sqr();
                    for b in 0..da {
                        reduced[a * da + b] += pa * phi[x + keep_off[b]].conj();
                    }
                }
            }
            if w <= 0.0 {
                acc.push(&reduced, 0.0);
                return;
            }
            for v in reduced.iter_mut() {
                *v /= w;
            }
            // (w rho)^{(x) k} / w^{k-1} = w rho^{(x) k}
            acc.push(&reduced, dxa as f64 * w);
        },
        |a, b| a.merge(b),
    );
    Ok(acc.finish(k, da))
}

/// `|| eref_moment - haar_moment ||_1`.
pub fn delta_haar(spectrum: &Spectrum, local_dim: usize, k: usize, limits: &Limits) -> Result<f64> {
    let e = eref_moment(spectrum, local_dim, k, limits)?;
    let h = haar_moment(local_dim, k, limits)?;
    e.distance(&h)
}

/// Second Renyi entropy `-ln Tr rho^2`.
pub fn renyi2(spectrum: &Spectrum) -> f64 {
    (-spectrum.purity().ln()).max(0.0)
}

/// One-parameter family from pure (`eps = 0`) to maximally mixed (`eps = 1`) on
/// `d` levels: `lambda_1 = 1 - eps + eps/d`, `lambda_{i>1} = eps/d`.
pub fn interpolated_spectrum(eps: f64, d: usize) -> Result<Spectrum> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::invalid(format!(
            "interpolation parameter {eps} outside [0, 1]"
        )));
    }
    if d == 0 {
        return Err(Error::invalid("spectrum needs at least one level"));
    }
    let tail = eps / d as f64;
    let mut values = vec![tail; d];
    values[0] = 1.0 - eps + tail;
    Spectrum::new(values)
}
