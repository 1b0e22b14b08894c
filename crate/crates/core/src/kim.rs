//! Kicked Ising chain `U_F = exp(-i h sum Y) exp(-i sum (J Z Z + g Z))` with open
//! boundaries, mixed initial states via purification, and projected-ensemble
//! distance time series.

use std::f64::consts::FRAC_PI_4;

use crate::ensembles::eref_moment;
use crate::error::{Error, Result};
use crate::limits::Limits;
use crate::moment::MomentOperator;
use crate::projected::{mc_reference_pe, pe_delta, pe_from_purification, pe_moment};
use crate::seed::rng_for;
use crate::tensor::{
    apply_single_qubit, ginibre_density, haar_amplitudes, purify, DensityMatrix, OperatorMatrix,
    Spectrum, StateVector,
};
use crate::C64;

const SELF_DUAL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KimParams {
    pub j: f64,
    pub g: f64,
    pub h: f64,
    pub n_sites: usize,
}

impl KimParams {
    pub fn new(j: f64, g: f64, h: f64, n_sites: usize) -> Result<Self> {
        if n_sites < 2 {
            return Err(Error::invalid(format!(
                "chain needs at least 2 sites, got {n_sites}"
            )));
        }
        if ![j, g, h].iter().all(|x| x.is_finite()) {
            return Err(Error::invalid("couplings must be finite"));
        }
        Ok(KimParams { j, g, h, n_sites })
    }

    /// `J = h = pi/4`, where the circuit is dual unitary.
    pub fn self_dual(g: f64, n_sites: usize) -> Result<Self> {
        Self::new(FRAC_PI_4, g, FRAC_PI_4, n_sites)
    }

    pub fn is_self_dual(&self) -> bool {
        (self.j - FRAC_PI_4).abs() < SELF_DUAL_TOL && (self.h - FRAC_PI_4).abs() < SELF_DUAL_TOL
    }
}

/// One Floquet period on a contiguous block of sites, with the diagonal phases
/// tabulated once.
#[derive(Debug, Clone)]
pub struct FloquetOperator {
    n_qubits: usize,
    first: usize,
    len: usize,
    phases: Vec<C64>,
    kick: [C64; 4],
}

impl FloquetOperator {
    pub fn new(params: &KimParams, n_qubits: usize, acting_sites: &[usize]) -> Result<Self> {
        let len = acting_sites.len();
        if len != params.n_sites {
            return Err(Error::invalid(format!(
                "{} acting sites for a {}-site chain",
                len, params.n_sites
            )));
        }
        let first = acting_sites[0];
        if acting_sites
            .iter()
            .enumerate()
            .any(|(i, &s)| s != first + i)
        {
            return Err(Error::invalid(
                "acting sites must be contiguous and ascending",
            ));
        }
        if first + len > n_qubits {
            return Err(Error::InvalidSite {
                site: first + len - 1,
                n_qubits,
            });
        }
        // bit 0 of a site is Z = +1; local site 0 is the most significant bit
        let spin = |c: usize, i: usize| {
            if c >> (len - 1 - i) & 1 == 0 {
                1.0
            } else {
                -1.0
            }
        };
        let phases = (0..1usize << len)
            .map(|c| {
                let mut e = 0.0;
                for i in 0..len {
                    let s = spin(c, i);
                    e += params.g * s;
                    if i + 1 < len {
                        e += params.j * s * spin(c, i + 1);
                    }
                }
                C64::from_polar(1.0, -e)
            })
            .collect();
        let k = OperatorMatrix::y_rotation(params.h);
        let m = k.matrix();
        Ok(FloquetOperator {
            n_qubits,
            first,
            len,
            phases,
            kick: [m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]],
        })
    }

    pub fn apply(&self, state: &mut StateVector) -> Result<()> {
        if state.n_qubits() != self.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits,
                found: state.n_qubits(),
            });
        }
        let shift = self.n_qubits - self.first - self.len;
        let mask = (1usize << self.len) - 1;
        let amps = state.amplitudes_mut();
        for (b, a) in amps.iter_mut().enumerate() {
            *a *= self.phases[(b >> shift) & mask];
        }
        for site in self.first..self.first + self.len {
            let stride = 1usize << (self.n_qubits - 1 - site);
            apply_single_qubit(amps, stride, self.kick);
        }
        Ok(())
    }
}

/// Applies one period of the kicked Ising chain to `acting_sites`.
pub fn floquet_step(
    state: &mut StateVector,
    params: &KimParams,
    acting_sites: &[usize],
) -> Result<()> {
    FloquetOperator::new(params, state.n_qubits(), acting_sites)?.apply(state)
}

/// Mixed state on the leftmost `|S|` sites.
#[derive(Debug, Clone, PartialEq)]
pub enum RhoSpec {
    Explicit(DensityMatrix),
    /// `G G^dag / Tr` with a `2^|S| x rank` Gaussian `G`.
    Ginibre {
        rank: usize,
    },
    /// Uniform over the first `rank` computational basis states.
    Flat {
        rank: usize,
    },
    /// `|+><+|` on every site of `S`.
    Pure,
}

impl RhoSpec {
    /// The state on `s_size` qubits; random draws use `(seed, "rho_s", realization)`.
    pub fn realize(&self, s_size: usize, seed: u64, realization: u64) -> Result<DensityMatrix> {
        let ds = 1usize << s_size;
        match self {
            RhoSpec::Explicit(rho) => {
                if rho.dim() != ds {
                    return Err(Error::DimensionMismatch {
                        expected: ds,
                        found: rho.dim(),
                    });
                }
                Ok(rho.clone())
            }
            RhoSpec::Ginibre { rank } => {
                ginibre_density(ds, *rank, &mut rng_for(seed, "rho_s", realization))
            }
            RhoSpec::Flat { rank } => {
                if *rank == 0 || *rank > ds {
                    return Err(Error::invalid(format!("flat rank {rank} outside 1..={ds}")));
                }
                let mut p = vec![0.0; ds];
                p[..*rank].iter_mut().for_each(|x| *x = 1.0 / *rank as f64);
                DensityMatrix::diagonal(&p)
            }
            RhoSpec::Pure => {
                Ok(StateVector::product(&vec![StateVector::plus(); s_size])?.density_matrix())
            }
        }
    }
}

/// Pure states of the remaining sites.
#[derive(Debug, Clone, PartialEq)]
pub enum SiteStates {
    Plus,
    /// Independent Haar states per site.
    Random,
    Explicit(Vec<[C64; 2]>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitialStateSpec {
    pub s_size: usize,
    pub rho_s: RhoSpec,
    pub e_states: SiteStates,
}

/// Initial state on `X (x) chain` with the `|S|`-qubit purifying register `X`
/// leading, and the mixed state `rho_S` it purifies.
#[derive(Debug, Clone)]
pub struct InitialState {
    pub psi: StateVector,
    pub rho_s: DensityMatrix,
}

impl InitialState {
    pub fn x_sites(&self) -> Vec<usize> {
        (0..self.rho_s.n_qubits().unwrap_or(0)).collect()
    }
}

/// Builds the purified initial state. `rho_S` draws from `(seed, "rho_s",
/// realization)` and random site states from `(seed, "v", realization)`.
pub fn build_initial(
    spec: &InitialStateSpec,
    n_sites: usize,
    seed: u64,
    realization: u64,
    limits: &Limits,
) -> Result<InitialState> {
    let s = spec.s_size;
    if s > n_sites {
        return Err(Error::invalid(format!(
            "|S| = {s} exceeds the {n_sites}-site chain"
        )));
    }
    limits.check_state_qubits(s + n_sites)?;
    let rho_s = spec.rho_s.realize(s, seed, realization)?;
    let n_e = n_sites - s;
    let e: Vec<[C64; 2]> = match &spec.e_states {
        SiteStates::Plus => vec![StateVector::plus(); n_e],
        SiteStates::Random => {
            let mut rng = rng_for(seed, "v", realization);
            (0..n_e)
                .map(|_| {
                    let v = haar_amplitudes(2, &mut rng);
                    [v[0], v[1]]
                })
                .collect()
        }
        SiteStates::Explicit(v) => {
            if v.len() != n_e {
                return Err(Error::invalid(format!(
                    "{} site states given for {n_e} sites",
                    v.len()
                )));
            }
            v.clone()
        }
    };
    let e_state = StateVector::product(&e)?;
    let psi = if s == 0 {
        e_state
    } else {
        purify(&rho_s)?.tensor(&e_state)?
    };
    Ok(InitialState { psi, rho_s })
}

/// `Delta_k(t)` and the ensemble-average purity at one time step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaPoint {
    pub t: usize,
    pub k: usize,
    pub delta: f64,
    pub avg_purity: f64,
}

struct Layout {
    n_qubits: usize,
    x: Vec<usize>,
    chain: Vec<usize>,
    a: Vec<usize>,
    b: Vec<usize>,
}

impl Layout {
    fn new(s_size: usize, n_sites: usize, a_size: usize, limits: &Limits) -> Result<Self> {
        if a_size == 0 || a_size >= n_sites {
            return Err(Error::invalid(format!(
                "|A| = {a_size} must lie in 1..{n_sites}"
            )));
        }
        let n_qubits = s_size + n_sites;
        limits.check_state_qubits(n_qubits)?;
        limits.check_measured_qubits(n_sites - a_size)?;
        let chain: Vec<usize> = (s_size..n_qubits).collect();
        Ok(Layout {
            n_qubits,
            x: (0..s_size).collect(),
            a: chain[..a_size].to_vec(),
            b: chain[a_size..].to_vec(),
            chain,
        })
    }
}

fn references(
    rho_s: &DensityMatrix,
    a_size: usize,
    k_list: &[usize],
    limits: &Limits,
) -> Result<(Spectrum, Vec<MomentOperator>)> {
    let spectrum = rho_s.spectrum()?;
    let refs = k_list
        .iter()
        .map(|&k| eref_moment(&spectrum, 1 << a_size, k, limits))
        .collect::<Result<_>>()?;
    Ok((spectrum, refs))
}

/// `(t, k, distances to each reference, average purity)`.
type SeriesRow = (usize, usize, Vec<f64>, f64);

/// Evolves `psi` for `t_max` periods and at every `t = 0..=t_max` measures the
/// distance of the projected-ensemble moments to `refs`.
fn time_series(
    params: &KimParams,
    layout: &Layout,
    mut psi: StateVector,
    t_max: usize,
    k_list: &[usize],
    refs: &[&[MomentOperator]],
    limits: &Limits,
) -> Result<Vec<SeriesRow>> {
    let step = FloquetOperator::new(params, layout.n_qubits, &layout.chain)?;
    let mut out = Vec::with_capacity((t_max + 1) * k_list.len());
    for t in 0..=t_max {
        if t > 0 {
            step.apply(&mut psi)?;
        }
        let pe = pe_from_purification(&psi, &layout.x, &layout.a, &layout.b, limits)?;
        let purity = pe.average_purity();
        for (ki, &k) in k_list.iter().enumerate() {
            let m = pe_moment(&pe, k, limits)?;
            let deltas = refs
                .iter()
                .map(|r| pe_delta(&m, &r[ki]))
                .collect::<Result<Vec<_>>>()?;
            out.push((t, k, deltas, purity));
        }
    }
    Ok(out)
}

/// `Delta_k(t) = || pe_moment(t) - eref_moment(spectrum(rho_S)) ||_1` for
/// `t = 0..=t_max`, with `A` the leftmost `a_size` chain sites and `B` the rest.
#[allow(clippy::too_many_arguments)]
pub fn dynamics_run(
    params: &KimParams,
    spec: &InitialStateSpec,
    a_size: usize,
    t_max: usize,
    k_list: &[usize],
    seed: u64,
    realization: u64,
    limits: &Limits,
) -> Result<Vec<DeltaPoint>> {
    let layout = Layout::new(spec.s_size, params.n_sites, a_size, limits)?;
    for &k in k_list {
        limits.check_k(k)?;
        limits.check_power_dim(1 << a_size, k)?;
    }
    let init = build_initial(spec, params.n_sites, seed, realization, limits)?;
    let (_, refs) = references(&init.rho_s, a_size, k_list, limits)?;
    Ok(
        time_series(params, &layout, init.psi, t_max, k_list, &[&refs], limits)?
            .into_iter()
            .map(|(t, k, d, avg_purity)| DeltaPoint {
                t,
                k,
                delta: d[0],
                avg_purity,
            })
            .collect(),
    )
}

/// Empirical finite-size reference: the mean of `n_unitaries` sampled
/// projected ensembles of Haar-scrambled `rho_0` on the same `A (x) B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FiniteReference {
    pub n_unitaries: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelfDualPoint {
    pub t: usize,
    pub k: usize,
    pub delta: f64,
    /// Distance to the finite-size reference, when requested.
    pub delta_finite: Option<f64>,
    pub plateau_onset: bool,
}

fn check_solvable_g(g: f64) -> Result<()> {
    let r = g / (std::f64::consts::PI / 8.0);
    if (r - r.round()).abs() < 1e-9 {
        return Err(Error::invalid(format!(
            "g = {g} is an integer multiple of pi/8, where the finite-time result does not hold"
        )));
    }
    Ok(())
}

/// Self-dual kicked Ising (`J = h = pi/4`) from `rho_S (x) |+>^E`. The
/// plateau onset flag marks `t = |A| + |S|`.
#[allow(clippy::too_many_arguments)]
pub fn selfdual_run(
    g: f64,
    spec: &InitialStateSpec,
    a_size: usize,
    b_size: usize,
    t_max: usize,
    k_list: &[usize],
    seed: u64,
    realization: u64,
    finite_reference: Option<FiniteReference>,
    limits: &Limits,
) -> Result<Vec<SelfDualPoint>> {
    check_solvable_g(g)?;
    if spec.e_states != SiteStates::Plus {
        return Err(Error::invalid(
            "self-dual finite-time emergence needs every E site in |+>",
        ));
    }
    let params = KimParams::self_dual(g, a_size + b_size)?;
    let layout = Layout::new(spec.s_size, params.n_sites, a_size, limits)?;
    for &k in k_list {
        limits.check_k(k)?;
        limits.check_power_dim(1 << a_size, k)?;
    }
    let init = build_initial(spec, params.n_sites, seed, realization, limits)?;
    let (spectrum, analytic) = references(&init.rho_s, a_size, k_list, limits)?;
    let mut refs: Vec<Vec<MomentOperator>> = vec![analytic];
    if let Some(fr) = finite_reference {
        let a: Vec<usize> = (0..a_size).collect();
        let b: Vec<usize> = (a_size..a_size + b_size).collect();
        let est = mc_reference_pe(&spectrum, &a, &b, k_list, fr.n_unitaries, fr.seed, limits)?;
        refs.push(
            est.into_iter()
                .map(|e| MomentOperator::new(e.k, e.local_dim, e.mean))
                .collect::<Result<_>>()?,
        );
    }
    let ref_slices: Vec<&[MomentOperator]> = refs.iter().map(|r| r.as_slice()).collect();
    let onset = a_size + spec.s_size;
    Ok(time_series(
        &params,
        &layout,
        init.psi,
        t_max,
        k_list,
        &ref_slices,
        limits,
    )?
    .into_iter()
    .map(|(t, k, d, _)| SelfDualPoint {
        t,
        k,
        delta: d[0],
        delta_finite: d.get(1).copied(),
        plateau_onset: t == onset,
    })
    .collect())
}
