//! Projected ensembles: measure `B` in the computational basis and collect the
//! post-measurement states of `A`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::limits::Limits;
use crate::moment::{MomentAccumulator, MomentEstimate, MomentOperator, WeightedPowerSum};
use crate::parallel::{ordered_reduce, DEFAULT_BLOCK};
use crate::seed::rng_for;
use crate::tensor::{
    haar_isometry, DensityMatrix, OperatorMatrix, QubitRegister, Spectrum, StateVector,
};
use crate::C64;

/// Outcomes with probability below this are dropped.
pub const PRUNE_THRESHOLD: f64 = 1e-14;

/// One measurement outcome `z` (bits of the `B` sites, first site most
/// significant), its probability and the conditional state of `A`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeEntry {
    pub outcome: usize,
    pub weight: f64,
    pub state: DensityMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedEnsemble {
    local_dim: usize,
    entries: Vec<PeEntry>,
    raw_total: f64,
}

impl ProjectedEnsemble {
    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn entries(&self) -> &[PeEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Total probability over all outcomes before pruning.
    pub fn raw_total(&self) -> f64 {
        self.raw_total
    }

    pub fn entry_for(&self, outcome: usize) -> Option<&PeEntry> {
        self.entries
            .binary_search_by_key(&outcome, |e| e.outcome)
            .ok()
            .map(|i| &self.entries[i])
    }

    /// Ensemble-average purity `sum_z p(z) Tr rho_A(z)^2`.
    pub fn average_purity(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| e.weight * e.state.purity())
            .sum()
    }

    /// Builds the ensemble from unnormalized conditional states (row-major),
    /// indexed by outcome.
    fn from_unnormalized(local_dim: usize, blocks: Vec<Vec<C64>>) -> Result<Self> {
        let weights: Vec<f64> = blocks
            .iter()
            .map(|b| (0..local_dim).map(|i| b[i * local_dim + i].re).sum())
            .collect();
        let raw_total: f64 = weights.iter().sum();
        let kept: f64 = weights.iter().filter(|&&w| w >= PRUNE_THRESHOLD).sum();
        if kept <= 0.0 {
            return Err(Error::invalid(
                "every measurement outcome has zero probability",
            ));
        }
        let entries = blocks
            .into_iter()
            .zip(weights)
            .enumerate()
            .filter(|(_, (_, w))| *w >= PRUNE_THRESHOLD)
            .map(|(outcome, (block, w))| {
                let m = DMatrix::from_fn(local_dim, local_dim, |i, j| {
                    // exact Hermiticity from the upper triangle
                    let v = if i <= j {
                        block[i * local_dim + j]
                    } else {
                        block[j * local_dim + i].conj()
                    };
                    v / w
                });
                PeEntry {
                    outcome,
                    weight: w / kept,
                    state: DensityMatrix::from_trusted(OperatorMatrix::from_raw(m)),
                }
            })
            .collect();
        Ok(ProjectedEnsemble {
            local_dim,
            entries,
            raw_total,
        })
    }
}

/// Checks that `parts` are disjoint and together cover the register.
fn check_partition(reg: &QubitRegister, parts: &[&[usize]]) -> Result<()> {
    let all: Vec<usize> = parts.iter().flat_map(|p| p.iter().copied()).collect();
    reg.check_sites(&all)?;
    if all.len() != reg.n_qubits() {
        return Err(Error::invalid(format!(
            "site sets cover {} of {} qubits",
            all.len(),
            reg.n_qubits()
        )));
    }
    Ok(())
}

/// `rho_A(z) = Tr_B[Pi_z rho] / p(z)` for every outcome `z` on `b_sites`.
pub fn pe_from_density(
    rho: &DensityMatrix,
    a_sites: &[usize],
    b_sites: &[usize],
    limits: &Limits,
) -> Result<ProjectedEnsemble> {
    let reg = QubitRegister::new(rho.n_qubits()?)?;
    check_partition(&reg, &[a_sites, b_sites])?;
    limits.check_measured_qubits(b_sites.len())?;
    let a_off = reg.offsets(a_sites);
    let b_off = reg.offsets(b_sites);
    let m = rho.operator().matrix();
    let da = a_off.len();
    let blocks = b_off
        .iter()
        .map(|&z| {
            let mut block = vec![C64::new(0.0, 0.0); da * da];
            for i in 0..da {
                for j in 0..da {
                    block[i * da + j] = m[(a_off[i] + z, a_off[j] + z)];
                }
            }
            block
        })
        .collect();
    ProjectedEnsemble::from_unnormalized(da, blocks)
}

/// Projected ensemble of the mixed state `Tr_X |psi><psi|`, computed from the
/// purification: `rho_A(z) = Tr_X |phi(z)><phi(z)| / p(z)` with
/// `|phi(z)> = <z|_B |psi>`.
pub fn pe_from_purification(
    psi: &StateVector,
    x_sites: &[usize],
    a_sites: &[usize],
    b_sites: &[usize],
    limits: &Limits,
) -> Result<ProjectedEnsemble> {
    let reg = psi.register();
    check_partition(&reg, &[x_sites, a_sites, b_sites])?;
    limits.check_measured_qubits(b_sites.len())?;
    let x_off = reg.offsets(x_sites);
    let a_off = reg.offsets(a_sites);
    let b_off = reg.offsets(b_sites);
    let amps = psi.amplitudes();
    let da = a_off.len();
    let blocks = ordered_reduce(
        b_off.len(),
        64,
        Vec::new,
        |acc: &mut Vec<Vec<C64>>, zi| {
            let z = b_off[zi];
            let mut block = vec![C64::new(0.0, 0.0); da * da];
            for &x in &x_off {
                let base = x + z;
                for i in 0..da {
                    let ai = amps[base + a_off[i]];
                    if ai == C64::new(0.0, 0.0) {
                        continue;
                    }
                    for j in i..da {
                        block[i * da + j] += ai * amps[base + a_off[j]].conj();
                    }
                }
            }
            acc.push(block);
        },
        |a, b| a.extend(b),
    );
    ProjectedEnsemble::from_unnormalized(da, blocks)
}

/// `sum_z p(z) rho_A(z)^{(x) k}`.
pub fn pe_moment(ens: &ProjectedEnsemble, k: usize, limits: &Limits) -> Result<MomentOperator> {
    limits.check_k(k)?;
    let d = ens.local_dim;
    limits.check_power_dim(d, k)?;
    let sum = ordered_reduce(
        ens.entries.len(),
        DEFAULT_BLOCK,
        || WeightedPowerSum::new(d, k),
        |acc, i| {
            let e = &ens.entries[i];
            acc.push(&e.state.operator().to_row_major(), e.weight);
        },
        |a, b| a.merge(b),
    );
    MomentOperator::new(k, d, sum.into_operator())
}

/// Trace distance `|| m1 - m2 ||_1` between two moments of the same shape.
pub fn pe_delta(m1: &MomentOperator, m2: &MomentOperator) -> Result<f64> {
    m1.distance(m2)
}

/// Empirical reference ensemble: for each sampled Haar `U` on the `A (x) B`
/// register, the projected-ensemble moments of `U diag(spectrum) U^dag`.
///
/// Only the eigenvectors with nonzero weight are sampled, as the leading
/// columns of a Haar unitary. Unitary `u` draws from `(seed, "mc-ref", u)`.
/// Returns one estimate per requested `k`; `std_dev()` is the spread across
/// unitaries and `stderr` the error of the mean.
pub fn mc_reference_pe(
    spectrum: &Spectrum,
    a_sites: &[usize],
    b_sites: &[usize],
    k_list: &[usize],
    n_unitaries: usize,
    seed: u64,
    limits: &Limits,
) -> Result<Vec<MomentEstimate>> {
    let n = a_sites.len() + b_sites.len();
    limits.check_state_qubits(n)?;
    limits.check_measured_qubits(b_sites.len())?;
    let reg = QubitRegister::new(n)?;
    check_partition(&reg, &[a_sites, b_sites])?;
    let da = 1usize << a_sites.len();
    for &k in k_list {
        limits.check_k(k)?;
        limits.check_power_dim(da, k)?;
    }
    let dim = reg.dimension();
    let lambdas: Vec<f64> = spectrum
        .eigenvalues()
        .iter()
        .copied()
        .filter(|&l| l > 0.0)
        .collect();
    if lambdas.len() > dim {
        return Err(Error::invalid(format!(
            "spectrum rank {} exceeds dimension {dim}",
            lambdas.len()
        )));
    }
    let a_off = reg.offsets(a_sites);
    let b_off = reg.offsets(b_sites);

    let accs = ordered_reduce(
        n_unitaries,
        1,
        || {
            k_list
                .iter()
                .map(|&k| MomentAccumulator::new(da, k))
                .collect::<Vec<_>>()
        },
        |accs, u| {
            let mut rng = rng_for(seed, "mc-ref", u as u64);
            let v = haar_isometry(dim, lambdas.len(), &mut rng);
            let mut sums: Vec<WeightedPowerSum> = k_list
                .iter()
                .map(|&k| WeightedPowerSum::new(da, k))
                .collect();
            let mut block = vec![C64::new(0.0, 0.0); da * da];
            for &z in &b_off {
                block.iter_mut().for_each(|x| *x = C64::new(0.0, 0.0));
                for (c, &l) in lambdas.iter().enumerate() {
                    for i in 0..da {
                        let vi = v[(a_off[i] + z, c)] * l;
                        for j in 0..da {
                            block[i * da + j] += vi * v[(a_off[j] + z, c)].conj();
                        }
                    }
                }
                let p: f64 = (0..da).map(|i| block[i * da + i].re).sum();
                if p < PRUNE_THRESHOLD {
                    continue;
                }
                block.iter_mut().for_each(|x| *x /= p);
                for s in sums.iter_mut() {
                    s.push(&block, p);
                }
            }
            for (acc, s) in accs.iter_mut().zip(&sums) {
                acc.push_term(s.as_slice());
            }
        },
        |a, b| {
            for (x, y) in a.iter_mut().zip(b) {
                x.merge(y);
            }
        },
    );
    Ok(accs
        .into_iter()
        .zip(k_list)
        .map(|(acc, &k)| acc.finish(k, da))
        .collect())
}
