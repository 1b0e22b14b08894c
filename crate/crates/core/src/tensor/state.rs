use nalgebra::DMatrix;

use super::linalg::sqrt_psd;
use super::operator::{DensityMatrix, OperatorMatrix};
use super::QubitRegister;
use crate::error::{Error, Result};
use crate::C64;

const NORM_TOL: f64 = 1e-10;
const PURIFY_PSD_TOL: f64 = 1e-8;

/// Normalised pure state on a qubit register.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    register: QubitRegister,
    amplitudes: Vec<C64>,
}

impl StateVector {
    pub fn new(n_qubits: usize, amplitudes: Vec<C64>) -> Result<Self> {
        let register = QubitRegister::new(n_qubits)?;
        if amplitudes.len() != register.dimension() {
            return Err(Error::DimensionMismatch {
                expected: register.dimension(),
                found: amplitudes.len(),
            });
        }
        let n2 = norm_sqr(&amplitudes);
        if (n2 - 1.0).abs() > NORM_TOL {
            return Err(Error::invalid(format!("state has squared norm {n2}")));
        }
        Ok(StateVector {
            register,
            amplitudes,
        })
    }

    /// Rescales `amplitudes` to unit norm.
    pub fn normalized(n_qubits: usize, mut amplitudes: Vec<C64>) -> Result<Self> {
        let n = norm_sqr(&amplitudes).sqrt();
        if n == 0.0 {
            return Err(Error::invalid("cannot normalise the zero vector"));
        }
        amplitudes.iter_mut().for_each(|a| *a /= n);
        Self::new(n_qubits, amplitudes)
    }

    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        let register = QubitRegister::new(n_qubits)?;
        if index >= register.dimension() {
            return Err(Error::invalid(format!(
                "basis index {index} outside dimension {}",
                register.dimension()
            )));
        }
        let mut amplitudes = vec![C64::new(0.0, 0.0); register.dimension()];
        amplitudes[index] = C64::new(1.0, 0.0);
        Ok(StateVector {
            register,
            amplitudes,
        })
    }

    /// Product of single-qubit states, site 0 first.
    pub fn product(sites: &[[C64; 2]]) -> Result<Self> {
        let mut amps = vec![C64::new(1.0, 0.0)];
        for q in sites {
            if (q[0].norm_sqr() + q[1].norm_sqr() - 1.0).abs() > NORM_TOL {
                return Err(Error::invalid("single-qubit state is not normalised"));
            }
            amps = amps.iter().flat_map(|&a| [a * q[0], a * q[1]]).collect();
        }
        Self::new(sites.len(), amps)
    }

    pub fn plus() -> [C64; 2] {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        [C64::new(s, 0.0), C64::new(s, 0.0)]
    }

    /// `self (x) other`, with `self` on the leading sites.
    pub fn tensor(&self, other: &StateVector) -> Result<Self> {
        let amps = self
            .amplitudes
            .iter()
            .flat_map(|&a| other.amplitudes.iter().map(move |&b| a * b))
            .collect();
        StateVector::new(self.n_qubits() + other.n_qubits(), amps)
    }

    pub fn register(&self) -> QubitRegister {
        self.register
    }

    pub fn n_qubits(&self) -> usize {
        self.register.n_qubits()
    }

    pub fn dimension(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.amplitudes)
    }

    pub fn density_matrix(&self) -> DensityMatrix {
        let v = nalgebra::DVector::from_column_slice(&self.amplitudes);
        DensityMatrix::from_trusted(OperatorMatrix::from_raw(&v * v.adjoint()))
    }

    /// `|<self|other>|^2`.
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        if self.dimension() != other.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                found: other.dimension(),
            });
        }
        let overlap: C64 = self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum();
        Ok(overlap.norm_sqr())
    }
}

/// Sub-normalised vector carrying its squared norm, e.g. a measurement branch.
#[derive(Debug, Clone, PartialEq)]
pub struct UnnormalizedStateVector {
    n_qubits: usize,
    amplitudes: Vec<C64>,
    norm_sqr: f64,
}

impl UnnormalizedStateVector {
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    /// Squared norm; for a measurement branch this is the outcome probability.
    pub fn norm_sqr(&self) -> f64 {
        self.norm_sqr
    }

    /// Normalised copy, or `None` when the squared norm is below `threshold`.
    pub fn normalize(&self, threshold: f64) -> Option<StateVector> {
        if self.norm_sqr < threshold {
            return None;
        }
        let n = self.norm_sqr.sqrt();
        let amps = self.amplitudes.iter().map(|a| a / n).collect();
        StateVector::new(self.n_qubits, amps).ok()
    }
}

pub(crate) fn norm_sqr(amps: &[C64]) -> f64 {
    amps.iter().map(|a| a.norm_sqr()).sum()
}

/// Applies `gate` to `targets`; `targets[0]` is the most significant gate index.
pub fn apply_gate(state: &mut StateVector, gate: &OperatorMatrix, targets: &[usize]) -> Result<()> {
    let reg = state.register();
    reg.check_sites(targets)?;
    let gdim = 1usize << targets.len();
    if gate.dim() != gdim {
        return Err(Error::DimensionMismatch {
            expected: gdim,
            found: gate.dim(),
        });
    }
    if let [q] = targets {
        let g = gate.matrix();
        apply_single_qubit(
            state.amplitudes_mut(),
            reg.bit_weight(*q),
            [g[(0, 0)], g[(0, 1)], g[(1, 0)], g[(1, 1)]],
        );
        return Ok(());
    }
    let local = reg.offsets(targets);
    let rest = reg.offsets(&reg.complement(targets));
    let g = gate.matrix();
    let amps = state.amplitudes_mut();
    let mut buf = vec![C64::new(0.0, 0.0); gdim];
    for &base in &rest {
        for (b, &o) in buf.iter_mut().zip(&local) {
            *b = amps[base + o];
        }
        for (r, &o) in local.iter().enumerate() {
            amps[base + o] = (0..gdim).map(|c| g[(r, c)] * buf[c]).sum();
        }
    }
    Ok(())
}

/// Row-major 2x2 `gate` on the qubit with bit weight `stride`.
pub(crate) fn apply_single_qubit(amps: &mut [C64], stride: usize, gate: [C64; 4]) {
    let [g00, g01, g10, g11] = gate;
    for block in amps.chunks_mut(2 * stride) {
        let (lo, hi) = block.split_at_mut(stride);
        for (a0, a1) in lo.iter_mut().zip(hi.iter_mut()) {
            let (x, y) = (*a0, *a1);
            *a0 = g00 * x + g01 * y;
            *a1 = g10 * x + g11 * y;
        }
    }
}

/// Multiplies amplitude `b` by `exp(-i phase(b))`.
pub fn apply_diagonal_phases(state: &mut StateVector, phase: impl Fn(usize) -> f64) {
    for (b, a) in state.amplitudes_mut().iter_mut().enumerate() {
        *a *= C64::from_polar(1.0, -phase(b));
    }
}

/// Reduced density matrix on `keep` (ordered as given).
pub fn partial_trace(state: &StateVector, keep: &[usize]) -> Result<DensityMatrix> {
    let reg = state.register();
    reg.check_sites(keep)?;
    let keep_off = reg.offsets(keep);
    let env_off = reg.offsets(&reg.complement(keep));
    let amps = state.amplitudes();
    let dk = keep_off.len();
    let mut out = DMatrix::zeros(dk, dk);
    for &e in &env_off {
        for i in 0..dk {
            let ai = amps[keep_off[i] + e];
            if ai == C64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..dk {
                out[(i, j)] += ai * amps[keep_off[j] + e].conj();
            }
        }
    }
    Ok(DensityMatrix::from_trusted(OperatorMatrix::from_raw(out)))
}

/// `(I_rest (x) <outcome|_measured) |state>` on the unmeasured sites (ascending).
pub fn conditional_component(
    state: &StateVector,
    measured: &[usize],
    outcome: &[u8],
) -> Result<UnnormalizedStateVector> {
    if outcome.len() != measured.len() {
        return Err(Error::OutcomeLength {
            expected: measured.len(),
            found: outcome.len(),
        });
    }
    let reg = state.register();
    reg.check_sites(measured)?;
    let mut base = 0usize;
    for (&site, &bit) in measured.iter().zip(outcome) {
        match bit {
            0 => {}
            1 => base += reg.bit_weight(site),
            other => return Err(Error::invalid(format!("outcome bit {other} is not 0/1"))),
        }
    }
    let rest = reg.complement(measured);
    let amplitudes: Vec<C64> = reg
        .offsets(&rest)
        .iter()
        .map(|&o| state.amplitudes()[base + o])
        .collect();
    let norm_sqr = norm_sqr(&amplitudes);
    Ok(UnnormalizedStateVector {
        n_qubits: rest.len(),
        amplitudes,
        norm_sqr,
    })
}

/// `(I_X (x) sqrt(rho)) sum_i |i>_X |i>`, with the purifying register `X` leading.
///
/// Tracing out `X` returns `rho`; tracing out the system leaves `rho^T` on `X`.
pub fn purify(rho: &DensityMatrix) -> Result<StateVector> {
    let n = rho.n_qubits()?;
    let root = sqrt_psd(rho.operator(), PURIFY_PSD_TOL)?;
    let d = rho.dim();
    let m = root.matrix();
    let mut amps = Vec::with_capacity(d * d);
    for x in 0..d {
        for s in 0..d {
            amps.push(m[(s, x)]);
        }
    }
    StateVector::normalized(2 * n, amps)
}
