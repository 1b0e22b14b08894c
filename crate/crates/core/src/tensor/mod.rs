//! Dense complex linear algebra on qubit registers.

mod linalg;
mod operator;
mod random;
mod state;

pub use linalg::{hermitian_eigen, hermitian_eigenvalues, sqrt_psd, trace_norm};
pub use operator::{kron, partial_trace_density, DensityMatrix, OperatorMatrix, Spectrum};
pub use random::{
    complex_gaussian, ginibre_density, haar_amplitudes, haar_isometry, haar_state, haar_unitary,
};
pub(crate) use state::apply_single_qubit;
pub use state::{
    apply_diagonal_phases, apply_gate, conditional_component, partial_trace, purify, StateVector,
    UnnormalizedStateVector,
};

use crate::error::{Error, Result};

/// Hard ceiling on register width; `1 << n` must fit in a `usize`.
pub const MAX_REGISTER_QUBITS: usize = 40;

/// A register of `n_qubits` qubits labelled `0..n_qubits`, site 0 leftmost.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QubitRegister {
    n_qubits: usize,
}

impl QubitRegister {
    pub fn new(n_qubits: usize) -> Result<Self> {
        if n_qubits > MAX_REGISTER_QUBITS {
            return Err(Error::CapExceeded {
                what: "register qubits",
                value: n_qubits,
                cap: MAX_REGISTER_QUBITS,
            });
        }
        Ok(QubitRegister { n_qubits })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dimension(&self) -> usize {
        1usize << self.n_qubits
    }

    /// Weight of `site` in a basis index (site 0 is the most significant bit).
    pub fn bit_weight(&self, site: usize) -> usize {
        1usize << (self.n_qubits - 1 - site)
    }

    pub fn check_sites(&self, sites: &[usize]) -> Result<()> {
        let mut seen = vec![false; self.n_qubits];
        for &s in sites {
            if s >= self.n_qubits {
                return Err(Error::InvalidSite {
                    site: s,
                    n_qubits: self.n_qubits,
                });
            }
            if seen[s] {
                return Err(Error::RepeatedSite(s));
            }
            seen[s] = true;
        }
        Ok(())
    }

    /// Sites not listed, ascending.
    pub fn complement(&self, sites: &[usize]) -> Vec<usize> {
        (0..self.n_qubits).filter(|s| !sites.contains(s)).collect()
    }

    /// Basis-index offsets for every local configuration of `sites`.
    ///
    /// Entry `r` is the contribution to the global index when the listed
    /// sites hold the bits of `r`, with `sites[0]` as the most significant.
    pub fn offsets(&self, sites: &[usize]) -> Vec<usize> {
        let m = sites.len();
        let mut table = vec![0usize; 1 << m];
        for (j, &s) in sites.iter().enumerate() {
            let local = 1usize << (m - 1 - j);
            let global = self.bit_weight(s);
            for (r, entry) in table.iter_mut().enumerate() {
                if r & local != 0 {
                    *entry += global;
                }
            }
        }
        table
    }
}

/// `log2(dim)` when `dim` is a power of two.
pub fn qubits_for_dim(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::invalid(format!(
            "dimension {dim} is not a power of two"
        )));
    }
    Ok(dim.trailing_zeros() as usize)
}
