//! Experiment pipelines. Each returns its tables; nothing here touches the filesystem.

use deepmix_core::ensembles::{
    delta_haar, eref_moment, ghse_moment, ghse_moment_mc, haar_moment, interpolated_spectrum,
    renyi2, scrooge_moment_mc, scrooge_state,
};
use deepmix_core::kim::{
    dynamics_run, selfdual_run, FiniteReference, InitialStateSpec, KimParams, SiteStates,
};
use deepmix_core::moment::{MomentEstimate, MomentOperator};
use deepmix_core::projected::{mc_reference_pe, pe_from_purification, pe_moment};
use deepmix_core::seed::{derive_seed, rng_for};
use deepmix_core::tensor::{haar_state, Spectrum};
use deepmix_core::Limits;
use rayon::prelude::*;

use crate::config::{
    ConcentrationParams, DynamicsParams, ExperimentConfig, Fig1bParams, GhseCheckParams,
    McRefCheckParams, Parameters, RhoConfig, ScroogeCheckParams, SelfdualParams,
};
use crate::error::Result;
use crate::table::{Cell, ResultTable};

pub const FIG1B_COLUMNS: [&str; 3] = ["s2", "k", "delta_k"];
pub const DYNAMICS_COLUMNS: [&str; 5] = ["t", "k", "b_size", "realization", "delta_k"];
pub const DYNAMICS_AGGREGATE_COLUMNS: [&str; 6] =
    ["t", "k", "b_size", "delta_mean", "delta_stderr", "n"];
pub const SELFDUAL_COLUMNS: [&str; 5] = ["t", "k", "b_size", "delta_k", "plateau_onset"];
pub const CHECK_COLUMNS: [&str; 8] = [
    "k",
    "entry_row",
    "entry_col",
    "analytic_re",
    "analytic_im",
    "mc_re",
    "mc_im",
    "stderr",
];
pub const CONCENTRATION_COLUMNS: [&str; 4] = ["dim", "stat", "mean", "std"];

/// Validates `config` and runs it on the current rayon pool.
pub fn run_experiment(config: &ExperimentConfig, limits: &Limits) -> Result<Vec<ResultTable>> {
    let params = config.validate(limits)?;
    let seed = config.master_seed;
    match &params {
        Parameters::Fig1b(p) => fig1b(p, limits),
        Parameters::Dynamics(p) => dynamics(p, seed, limits),
        Parameters::Selfdual(p) => selfdual(p, seed, limits),
        Parameters::ScroogeCheck(p) => scrooge_check(p, seed, limits),
        Parameters::GhseCheck(p) => ghse_check(p, seed, limits),
        Parameters::McRefCheck(p) => mc_ref_check(p, seed, limits),
        Parameters::ConcentrationScan(p) => concentration_scan(p, seed, limits),
    }
}

pub fn fig1b(p: &Fig1bParams, limits: &Limits) -> Result<Vec<ResultTable>> {
    let d = 1usize << (p.a_size + p.b_size);
    let da = 1usize << p.a_size;
    let rows = p
        .epsilons()
        .par_iter()
        .map(|&eps| {
            let s = interpolated_spectrum(eps, d)?;
            let s2 = renyi2(&s);
            p.k_list
                .iter()
                .map(|&k| {
                    Ok(vec![
                        s2.into(),
                        k.into(),
                        delta_haar(&s, da, k, limits)?.into(),
                    ])
                })
                .collect::<Result<Vec<Vec<Cell>>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let mut t = ResultTable::new("fig1b", "fig1b", &FIG1B_COLUMNS);
    rows.into_iter().flatten().for_each(|r| t.push(r));
    Ok(vec![t])
}

fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

pub fn dynamics(p: &DynamicsParams, seed: u64, limits: &Limits) -> Result<Vec<ResultTable>> {
    let spec = InitialStateSpec {
        s_size: p.s_size,
        rho_s: RhoConfig::resolve(&p.rho_s, p.s_size)?,
        e_states: p.e_states.to_spec(),
    };
    let jobs: Vec<(usize, u64)> = p
        .b_sizes
        .iter()
        .flat_map(|&b| (0..p.n_realizations as u64).map(move |r| (b, r)))
        .collect();
    let series = jobs
        .par_iter()
        .map(|&(b, r)| {
            let c = &p.couplings;
            let params = KimParams::new(c.j, c.g, c.h, p.a_size + b)?;
            Ok(dynamics_run(
                &params, &spec, p.a_size, p.t_max, &p.k_list, seed, r, limits,
            )?)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut per = ResultTable::new("dynamics", "dynamics", &DYNAMICS_COLUMNS);
    for (&(b, r), points) in jobs.iter().zip(&series) {
        for pt in points {
            per.push(vec![
                pt.t.into(),
                pt.k.into(),
                b.into(),
                r.into(),
                pt.delta.into(),
            ]);
        }
    }
    let mut agg = ResultTable::new(
        "dynamics",
        "dynamics_aggregate",
        &DYNAMICS_AGGREGATE_COLUMNS,
    );
    let n_pts = (p.t_max + 1) * p.k_list.len();
    for (bi, &b) in p.b_sizes.iter().enumerate() {
        let block = &series[bi * p.n_realizations..(bi + 1) * p.n_realizations];
        for i in 0..n_pts {
            let deltas: Vec<f64> = block.iter().map(|s| s[i].delta).collect();
            let (mean, se) = mean_stderr(&deltas);
            let pt = &block[0][i];
            agg.push(vec![
                pt.t.into(),
                pt.k.into(),
                b.into(),
                mean.into(),
                se.into(),
                deltas.len().into(),
            ]);
        }
    }
    Ok(vec![per, agg])
}

pub fn selfdual(p: &SelfdualParams, seed: u64, limits: &Limits) -> Result<Vec<ResultTable>> {
    let spec = InitialStateSpec {
        s_size: p.s_size,
        rho_s: RhoConfig::resolve(&p.rho_s, p.s_size)?,
        e_states: SiteStates::Plus,
    };
    let runs = p
        .b_sizes
        .par_iter()
        .map(|&b| {
            let finite = p.finite_reference_unitaries.map(|n| FiniteReference {
                n_unitaries: n,
                seed: derive_seed(seed, "finite-ref", b as u64),
            });
            Ok(selfdual_run(
                p.g,
                &spec,
                p.a_size,
                b,
                p.t_max,
                &p.k_list,
                seed,
                p.realization,
                finite,
                limits,
            )?)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut analytic = ResultTable::new("selfdual", "selfdual", &SELFDUAL_COLUMNS);
    let mut finite = ResultTable::new("selfdual", "selfdual_finite", &SELFDUAL_COLUMNS);
    for (&b, points) in p.b_sizes.iter().zip(&runs) {
        for pt in points {
            let row = |d: f64| {
                vec![
                    pt.t.into(),
                    pt.k.into(),
                    b.into(),
                    d.into(),
                    pt.plateau_onset.into(),
                ]
            };
            analytic.push(row(pt.delta));
            if let Some(d) = pt.delta_finite {
                finite.push(row(d));
            }
        }
    }
    let mut out = vec![analytic];
    if p.finite_reference_unitaries.is_some() {
        out.push(finite);
    }
    Ok(out)
}

fn push_check_rows(t: &mut ResultTable, analytic: &MomentOperator, est: &MomentEstimate) {
    let d = analytic.matrix().dim();
    for r in 0..d {
        for c in 0..d {
            let a = analytic.matrix().get(r, c);
            let m = est.mean.get(r, c);
            t.push(vec![
                est.k.into(),
                r.into(),
                c.into(),
                a.re.into(),
                a.im.into(),
                m.re.into(),
                m.im.into(),
                est.stderr_at(r, c).into(),
            ]);
        }
    }
}

pub fn scrooge_check(
    p: &ScroogeCheckParams,
    seed: u64,
    limits: &Limits,
) -> Result<Vec<ResultTable>> {
    let rho0 = RhoConfig::resolve(&p.rho0, p.s_size)?.realize(p.s_size, seed, 0)?;
    let rho_xa = scrooge_state(&rho0, p.a_size)?;
    let spectrum = rho0.spectrum()?;
    let a_sites: Vec<usize> = (0..p.s_size).collect();
    let mut t = ResultTable::new("scrooge_check", "scrooge_check", &CHECK_COLUMNS);
    for &k in &p.k_list {
        let analytic = eref_moment(&spectrum, 1 << p.a_size, k, limits)?;
        let mc_seed = derive_seed(seed, "scrooge-check", k as u64);
        let est = scrooge_moment_mc(&rho_xa, &a_sites, k, p.n_samples, mc_seed, limits)?;
        push_check_rows(&mut t, &analytic, &est);
    }
    Ok(vec![t])
}

pub fn ghse_check(p: &GhseCheckParams, seed: u64, limits: &Limits) -> Result<Vec<ResultTable>> {
    let mut t = ResultTable::new("ghse_check", "ghse_check", &CHECK_COLUMNS);
    for &k in &p.k_list {
        let analytic = ghse_moment(p.rank_dim, p.local_dim, k, limits)?;
        let mc_seed = derive_seed(seed, "ghse-check", k as u64);
        let est = ghse_moment_mc(p.rank_dim, p.local_dim, k, p.n_samples, mc_seed, limits)?;
        push_check_rows(&mut t, &analytic, &est);
    }
    Ok(vec![t])
}

pub fn mc_ref_check(p: &McRefCheckParams, seed: u64, limits: &Limits) -> Result<Vec<ResultTable>> {
    let spectrum = Spectrum::new(p.spectrum.clone())?;
    let a: Vec<usize> = (0..p.a_size).collect();
    let b: Vec<usize> = (p.a_size..p.a_size + p.b_size).collect();
    let mc_seed = derive_seed(seed, "mc-ref-check", 0);
    let ests = mc_reference_pe(&spectrum, &a, &b, &p.k_list, p.n_unitaries, mc_seed, limits)?;
    let mut t = ResultTable::new("mc_ref_check", "mc_ref_check", &CHECK_COLUMNS);
    for (est, &k) in ests.iter().zip(&p.k_list) {
        let analytic = eref_moment(&spectrum, 1 << p.a_size, k, limits)?;
        push_check_rows(&mut t, &analytic, est);
    }
    Ok(vec![t])
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let (mean, se) = mean_stderr(xs);
    (mean, se * (xs.len() as f64).sqrt())
}

/// Per dimension, over Haar-random pure states on `A (x) B`:
/// - `norm`: `D_M <chi_z|chi_z>` with `M` the last `norm_b_size` qubits, so the
///   unmeasured part grows with the dimension; its spread is `~ sqrt(D_M / d)`;
/// - `norm_pe`: the same with `M = B`, whose spread `~ 1/sqrt(D_A)` stays flat;
/// - `delta2`: distance of each state's second projected moment to Haar;
/// - `moment_00`: the `(0, 0)` entry of that moment.
pub fn concentration_scan(
    p: &ConcentrationParams,
    seed: u64,
    limits: &Limits,
) -> Result<Vec<ResultTable>> {
    let da = 1usize << p.a_size;
    let haar = haar_moment(da, 2, limits)?;
    let a: Vec<usize> = (0..p.a_size).collect();
    let mut t = ResultTable::new(
        "concentration_scan",
        "concentration_scan",
        &CONCENTRATION_COLUMNS,
    );
    for &b_size in &p.b_sizes {
        let n = p.a_size + b_size;
        let b: Vec<usize> = (p.a_size..n).collect();
        let db = (1usize << b_size) as f64;
        let label = format!("concentration-{b_size}");
        let samples = (0..p.n_samples as u64)
            .into_par_iter()
            .map(|i| {
                let psi = haar_state(n, &mut rng_for(seed, &label, i));
                let pe = pe_from_purification(&psi, &[], &a, &b, limits)?;
                let m = pe_moment(&pe, 2, limits)?;
                let mut norms_pe = vec![0.0; 1 << b_size];
                for e in pe.entries() {
                    norms_pe[e.outcome] = db * e.weight;
                }
                let dm = 1usize << p.norm_b_size;
                let mut norms = vec![0.0; dm];
                for (i, amp) in psi.amplitudes().iter().enumerate() {
                    norms[i & (dm - 1)] += amp.norm_sqr() * dm as f64;
                }
                Ok((norms, norms_pe, m.distance(&haar)?, m.matrix().get(0, 0).re))
            })
            .collect::<Result<Vec<_>>>()?;
        let norms: Vec<f64> = samples.iter().flat_map(|s| s.0.iter().copied()).collect();
        let norms_pe: Vec<f64> = samples.iter().flat_map(|s| s.1.iter().copied()).collect();
        let deltas: Vec<f64> = samples.iter().map(|s| s.2).collect();
        let m00: Vec<f64> = samples.iter().map(|s| s.3).collect();
        let dim = 1usize << n;
        let stats = [
            ("norm", &norms),
            ("norm_pe", &norms_pe),
            ("delta2", &deltas),
            ("moment_00", &m00),
        ];
        for (stat, xs) in stats {
            let (mean, std) = mean_std(xs);
            t.push(vec![dim.into(), stat.into(), mean.into(), std.into()]);
        }
    }
    Ok(vec![t])
}
