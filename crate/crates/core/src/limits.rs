use crate::error::{Error, Result};

/// Size caps guarding memory and run time. All of them are configuration,
/// not hard constants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Largest copy number `k` for sums over the symmetric group.
    pub max_k: usize,
    /// Largest dense operator dimension (`D^k` for moment operators).
    pub max_operator_dim: usize,
    /// Largest statevector register, in qubits.
    pub max_state_qubits: usize,
    /// Largest measured register for dense outcome enumeration.
    pub max_measured_qubits: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_k: 7,
            max_operator_dim: 4096,
            max_state_qubits: 22,
            max_measured_qubits: 14,
        }
    }
}

impl Limits {
    pub fn check_k(&self, k: usize) -> Result<()> {
        if k == 0 {
            return Err(Error::invalid("copy number k must be positive"));
        }
        cap("k", k, self.max_k)
    }

    /// Checks `local_dim^k` against the operator cap without overflowing.
    pub fn check_power_dim(&self, local_dim: usize, k: usize) -> Result<usize> {
        self.check_k(k)?;
        let dim = checked_pow(local_dim, k).ok_or(Error::CapExceeded {
            what: "operator dimension",
            value: usize::MAX,
            cap: self.max_operator_dim,
        })?;
        cap("operator dimension", dim, self.max_operator_dim)?;
        Ok(dim)
    }

    pub fn check_state_qubits(&self, n: usize) -> Result<()> {
        cap("statevector qubits", n, self.max_state_qubits)
    }

    pub fn check_measured_qubits(&self, n: usize) -> Result<()> {
        cap("measured qubits", n, self.max_measured_qubits)
    }
}

fn cap(what: &'static str, value: usize, cap: usize) -> Result<()> {
    if value > cap {
        Err(Error::CapExceeded { what, value, cap })
    } else {
        Ok(())
    }
}

pub(crate) fn checked_pow(base: usize, exp: usize) -> Option<usize> {
    (0..exp).try_fold(1usize, |acc, _| acc.checked_mul(base))
}
