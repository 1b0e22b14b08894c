//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits non-zero
//! if any criterion fails. Tolerances are pinned below.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use deepmix::{run_with_threads, ExperimentConfig, ResultTable};
use deepmix_core::ensembles::{
    avg_purity, delta_haar, eref_moment, eref_second_moment, ghse_moment, ghse_moment_mc,
    haar_moment, scrooge_moment_mc, scrooge_state,
};
use deepmix_core::kim::RhoSpec;
use deepmix_core::moment::{MomentEstimate, MomentOperator};
use deepmix_core::projected::{mc_reference_pe, pe_from_density, pe_from_purification, pe_moment};
use deepmix_core::seed::{derive_seed, rng_for};
use deepmix_core::symm::{enumerate_sk, perm_operator};
use deepmix_core::tensor::{haar_state, partial_trace, OperatorMatrix, Spectrum};
use deepmix_core::{Limits, C64};
use serde_json::json;

const SEED: u64 = 20251017;

const EXACT_TOL: f64 = 1e-13;
const DELTA_TOL: f64 = 1e-12;
const N_SIGMA: f64 = 3.0;
const SIGMA_FLOOR: f64 = 1e-12;
const MC_SAMPLES: usize = 100_000;
const MC_REF_UNITARIES: usize = 200;
const ROUTE_TOL: f64 = 1e-10;
const WEIGHT_TOL: f64 = 1e-9;
const PLATEAU_REL_VAR: f64 = 0.1;
const PURE_CONTROL_MAX: f64 = 0.1;
const DYNAMICS_DROP: f64 = 0.3;

struct Gate {
    failures: usize,
}

impl Gate {
    fn report(&mut self, name: &str, ok: bool, detail: String, started: Instant) {
        if !ok {
            self.failures += 1;
        }
        let tag = if ok { "PASS" } else { "FAIL" };
        println!(
            "[{tag}] {name}: {detail} ({:.1} s)",
            started.elapsed().as_secs_f64()
        );
    }
}

fn lim() -> Limits {
    Limits::default()
}

/// Spectrum with the given purity: two levels when possible, otherwise flat.
fn spectrum_with_purity(p: f64) -> Spectrum {
    if p >= 0.5 {
        let a = 0.5 * (1.0 + (2.0 * p - 1.0).sqrt());
        Spectrum::new(vec![a, 1.0 - a]).unwrap()
    } else {
        let r = (1.0 / p).round() as usize;
        assert!((1.0 / r as f64 - p).abs() < 1e-15);
        Spectrum::flat(r).unwrap()
    }
}

fn check_moment(m: &MomentOperator, bad: &mut Vec<String>, label: &str) {
    if let Err(e) = m.validate() {
        bad.push(format!("{label}: {e}"));
    }
}

fn exact_formulas(gate: &mut Gate, emitted: &mut Vec<String>) {
    let started = Instant::now();
    let lim = lim();
    let mut worst: f64 = 0.0;
    let mut worst_purity: f64 = 0.0;
    for d in [2usize, 4] {
        for p in [0.25, 0.5, 1.0] {
            let closed = eref_second_moment(p, d).unwrap();
            let group = eref_moment(&spectrum_with_purity(p), d, 2, &lim).unwrap();
            check_moment(&closed, emitted, "eref_second_moment");
            check_moment(&group, emitted, "eref_moment");
            worst = worst.max(closed.matrix().max_abs_diff(group.matrix()).unwrap());
            let tr = closed.average_purity().unwrap();
            worst_purity = worst_purity.max((tr - avg_purity(p, d)).abs());
        }
    }
    let mut worst_ghse: f64 = 0.0;
    for r in [1usize, 2, 4] {
        for d in [2usize, 4] {
            for k in 1..=4 {
                let g = ghse_moment(r, d, k, &lim).unwrap();
                let e = eref_moment(&Spectrum::flat(r).unwrap(), d, k, &lim).unwrap();
                check_moment(&g, emitted, "ghse_moment");
                worst_ghse = worst_ghse.max(g.matrix().max_abs_diff(e.matrix()).unwrap());
            }
        }
    }
    let mut worst_delta: f64 = 0.0;
    for p in [0.25, 0.5, 0.75, 1.0] {
        let d = delta_haar(&spectrum_with_purity(p), 2, 2, &lim).unwrap();
        worst_delta = worst_delta.max((d - (1.0 - p) / (2.0 + p)).abs());
    }
    let ok = worst <= EXACT_TOL
        && worst_purity <= EXACT_TOL
        && worst_ghse <= EXACT_TOL
        && worst_delta <= DELTA_TOL;
    gate.report(
        "exact formula cross-checks",
        ok,
        format!(
            "closed vs group {worst:.1e}, avg purity {worst_purity:.1e}, gHSe vs flat {worst_ghse:.1e}, \
             delta_2 {worst_delta:.1e}"
        ),
        started,
    );
}

fn worst_z(est: &MomentEstimate, reference: &OperatorMatrix, band: f64) -> f64 {
    est.max_z(reference, SIGMA_FLOOR + band).unwrap()
}

fn scrooge(gate: &mut Gate) {
    let started = Instant::now();
    let lim = lim();
    let mut worst: f64 = 0.0;
    let mut cases = Vec::new();
    for s in [1usize, 2] {
        let rho0 = RhoSpec::Ginibre { rank: 1 << s }
            .realize(s, SEED, 0)
            .unwrap();
        let spectrum = rho0.spectrum().unwrap();
        for a in [1usize, 2] {
            let rho_xa = scrooge_state(&rho0, a).unwrap();
            let x: Vec<usize> = (0..s).collect();
            for k in [2usize, 3] {
                let seed = derive_seed(SEED, &format!("acc-scrooge-{s}-{a}"), k as u64);
                let est = scrooge_moment_mc(&rho_xa, &x, k, MC_SAMPLES, seed, &lim).unwrap();
                let reference = eref_moment(&spectrum, 1 << a, k, &lim).unwrap();
                let z = worst_z(&est, reference.matrix(), 0.0);
                worst = worst.max(z);
                cases.push(format!("|S|={s} D_A={} k={k} z={z:.1}", 1 << a));
            }
        }
    }
    gate.report(
        "Scrooge estimator vs reference moment, 3 sigma",
        worst <= N_SIGMA,
        format!("max |z| {worst:.2} [{}]", cases.join("; ")),
        started,
    );
}

fn ghse(gate: &mut Gate) {
    let started = Instant::now();
    let lim = lim();
    let mut worst: f64 = 0.0;
    for r in [2usize, 4] {
        for k in [2usize, 3] {
            let seed = derive_seed(SEED, &format!("acc-ghse-{r}"), k as u64);
            let est = ghse_moment_mc(r, 2, k, MC_SAMPLES, seed, &lim).unwrap();
            let reference = ghse_moment(r, 2, k, &lim).unwrap();
            worst = worst.max(worst_z(&est, reference.matrix(), 0.0));
        }
    }
    gate.report(
        "gHSe estimator vs closed form, 3 sigma",
        worst <= N_SIGMA,
        format!("max |z| {worst:.2} over D_R in {{2,4}}, D_A=2, k in {{2,3}}"),
        started,
    );
}

fn mc_reference(gate: &mut Gate) {
    let started = Instant::now();
    let lim = lim();
    let n = 10usize;
    let mut worst: f64 = 0.0;
    let mut conc_ok = true;
    let mut conc_cases = 0usize;
    for spectrum in [Spectrum::pure(), Spectrum::flat(2).unwrap()] {
        for a in [1usize, 2] {
            let a_sites: Vec<usize> = (0..a).collect();
            let seed = derive_seed(SEED, "acc-mc-ref", a as u64);
            let big_b: Vec<usize> = (a..n).collect();
            let big = mc_reference_pe(
                &spectrum,
                &a_sites,
                &big_b,
                &[2, 3],
                MC_REF_UNITARIES,
                seed,
                &lim,
            )
            .unwrap();
            let small_b: Vec<usize> = (a..7).collect();
            let small_seed = derive_seed(SEED, "acc-mc-ref-small", a as u64);
            let small = mc_reference_pe(
                &spectrum,
                &a_sites,
                &small_b,
                &[2, 3],
                MC_REF_UNITARIES,
                small_seed,
                &lim,
            )
            .unwrap();
            // finite-size bias of the projected ensemble of one typical state is O(1/D_B)
            let band = 1.0 / (1usize << (n - a)) as f64;
            for (est, k) in big.iter().zip([2usize, 3]) {
                let reference = eref_moment(&spectrum, 1 << a, k, &lim).unwrap();
                worst = worst.max(worst_z(est, reference.matrix(), band));
            }
            for (l, s) in big.iter().zip(&small) {
                for (x, y) in l.std_dev().iter().zip(s.std_dev()) {
                    // entries fixed by symmetry have no spread at either size
                    if y > 1e-12 {
                        conc_cases += 1;
                        conc_ok &= *x < y;
                    }
                }
            }
        }
    }
    gate.report(
        "projected-ensemble reference at d=2^10, 3 sigma + 1/D_B band",
        worst <= N_SIGMA,
        format!("max |z| {worst:.2} over pure and rank-2 flat, |A| in {{1,2}}, k in {{2,3}}"),
        started,
    );
    gate.report(
        "across-unitary spread at 2^10 below 2^7",
        conc_ok,
        format!("{conc_cases} entries compared"),
        started,
    );
}

fn table<'a>(tables: &'a [ResultTable], name: &str) -> &'a ResultTable {
    tables.iter().find(|t| t.name == name).unwrap()
}

fn run(v: serde_json::Value) -> Vec<ResultTable> {
    let cfg = ExperimentConfig::from_json(&v.to_string()).unwrap();
    run_with_threads(&cfg, &lim()).unwrap()
}

fn dynamics(gate: &mut Gate) {
    let started = Instant::now();
    let tables = run(json!({
        "experiment": "dynamics",
        "master_seed": SEED,
        "threads": 8,
        "parameters": {
            "couplings": { "j": 0.8, "g": 0.6472, "h": 0.7236 },
            "s_size": 3, "a_size": 2, "b_sizes": [8, 10, 12], "t_max": 20,
            "k_list": [2], "n_realizations": 20
        }
    }));
    let agg = table(&tables, "dynamics_aggregate");
    let (t, b, mean) = (
        agg.floats("t"),
        agg.floats("b_size"),
        agg.floats("delta_mean"),
    );
    let at = |tt: f64, bb: f64| {
        (0..t.len())
            .find(|&i| t[i] == tt && b[i] == bb)
            .map(|i| mean[i])
            .unwrap()
    };
    let late: Vec<f64> = [8.0, 10.0, 12.0].iter().map(|&bb| at(20.0, bb)).collect();
    let start = at(0.0, 12.0);
    let decreasing = late.windows(2).all(|w| w[1] < w[0]);
    let dropped = late[2] < DYNAMICS_DROP * start;
    gate.report(
        "generic kicked Ising: late distance shrinks with |B|",
        decreasing && dropped,
        format!(
            "Delta_2(t=20) = {:.4} / {:.4} / {:.4} for |B| = 8/10/12, Delta_2(0) = {start:.4}",
            late[0], late[1], late[2]
        ),
        started,
    );
}

fn selfdual(gate: &mut Gate) {
    let started = Instant::now();
    let tables = run(json!({
        "experiment": "selfdual",
        "master_seed": SEED,
        "threads": 8,
        "parameters": {
            "g": PI / 9.0, "s_size": 1, "a_size": 2, "b_sizes": [8, 10, 12],
            "t_max": 10, "k_list": [2, 3]
        }
    }));
    let sd = table(&tables, "selfdual");
    let (t, k, b, d) = (
        sd.floats("t"),
        sd.floats("k"),
        sd.floats("b_size"),
        sd.floats("delta_k"),
    );
    let plateau = |kk: f64, bb: f64| -> Vec<f64> {
        (0..t.len())
            .filter(|&i| k[i] == kk && b[i] == bb && (3.0..=10.0).contains(&t[i]))
            .map(|i| d[i])
            .collect()
    };
    let mut flat_ok = true;
    let mut flat_detail = Vec::new();
    let mut drop_ok = true;
    let mut drop_detail = Vec::new();
    for kk in [2.0, 3.0] {
        let mut means = Vec::new();
        for bb in [8.0, 10.0, 12.0] {
            let xs = plateau(kk, bb);
            let mean = xs.iter().sum::<f64>() / xs.len() as f64;
            let max = xs.iter().cloned().fold(f64::MIN, f64::max);
            let min = xs.iter().cloned().fold(f64::MAX, f64::min);
            let rel = (max - min) / mean;
            flat_ok &= rel < PLATEAU_REL_VAR;
            flat_detail.push(format!("k={kk} |B|={bb}: {rel:.2}"));
            means.push(mean);
        }
        drop_ok &= means[2] < means[0];
        drop_detail.push(format!("k={kk}: {:.4} -> {:.4}", means[0], means[2]));
    }
    gate.report(
        "self-dual plateau flat over t in [3,10], relative variation < 0.1",
        flat_ok,
        flat_detail.join(", "),
        started,
    );
    gate.report(
        "self-dual plateau lower at |B|=12 than |B|=8",
        drop_ok,
        drop_detail.join(", "),
        started,
    );

    let started = Instant::now();
    let tables = run(json!({
        "experiment": "selfdual",
        "master_seed": SEED,
        "threads": 8,
        "parameters": {
            "g": PI / 9.0, "s_size": 0, "a_size": 2, "b_sizes": [8, 10, 12],
            "t_max": 2, "k_list": [2]
        }
    }));
    let sd = table(&tables, "selfdual");
    let (t, d) = (sd.floats("t"), sd.floats("delta_k"));
    let at_two: Vec<f64> = (0..t.len())
        .filter(|&i| t[i] == 2.0)
        .map(|i| d[i])
        .collect();
    let ok = at_two.windows(2).all(|w| w[1] < w[0]) && at_two[2] < PURE_CONTROL_MAX;
    gate.report(
        "self-dual pure control: Delta_2(t=2) decreasing and < 0.1 at |B|=12",
        ok,
        format!(
            "{:.4} / {:.4} / {:.4} for |B| = 8/10/12",
            at_two[0], at_two[1], at_two[2]
        ),
        started,
    );
}

fn structural(gate: &mut Gate, emitted: &mut Vec<String>) {
    let started = Instant::now();
    let lim = lim();
    let mut route_err: f64 = 0.0;
    let mut weight_err: f64 = 0.0;
    for i in 0..50u64 {
        let bits = derive_seed(SEED, "acc-partition", i);
        let nx = (bits % 3) as usize;
        let rest: Vec<usize> = (nx..4).collect();
        // nonempty A and B from the remaining qubits
        let mask = (bits >> 8) as usize % ((1 << rest.len()) - 2) + 1;
        let a: Vec<usize> = rest
            .iter()
            .copied()
            .filter(|q| mask >> (q - nx) & 1 == 1)
            .collect();
        let b: Vec<usize> = rest
            .iter()
            .copied()
            .filter(|q| mask >> (q - nx) & 1 == 0)
            .collect();
        let psi = haar_state(4, &mut rng_for(SEED, "acc-route", i));
        let x: Vec<usize> = (0..nx).collect();
        let pur = pe_from_purification(&psi, &x, &a, &b, &lim).unwrap();
        let rho = partial_trace(&psi, &rest).unwrap();
        let shift = |s: &[usize]| s.iter().map(|q| q - nx).collect::<Vec<_>>();
        let den = pe_from_density(&rho, &shift(&a), &shift(&b), &lim).unwrap();
        if pur.len() != den.len() {
            route_err = f64::INFINITY;
        }
        for e in pur.entries() {
            match den.entry_for(e.outcome) {
                Some(f) => {
                    route_err = route_err.max((e.weight - f.weight).abs());
                    route_err =
                        route_err.max(e.state.operator().max_abs_diff(f.state.operator()).unwrap());
                }
                None => route_err = f64::INFINITY,
            }
        }
        for ens in [&pur, &den] {
            let total: f64 = ens.entries().iter().map(|e| e.weight).sum();
            weight_err = weight_err.max((total - 1.0).abs());
            for k in 1..=3 {
                check_moment(&pe_moment(ens, k, &lim).unwrap(), emitted, "pe_moment");
            }
        }
    }
    for d in [2usize, 3] {
        for k in 1..=4 {
            check_moment(&haar_moment(d, k, &lim).unwrap(), emitted, "haar_moment");
        }
    }

    let mut perm_ok = true;
    for d in [2usize, 3] {
        for k in 1..=4 {
            let group = enumerate_sk(k, &lim).unwrap();
            let ops: Vec<OperatorMatrix> = group
                .iter()
                .map(|s| perm_operator(s, d, &lim).unwrap())
                .collect();
            for (s, ps) in group.iter().zip(&ops) {
                let cycles = s.cycle_type().n_cycles() as i32;
                perm_ok &= ps.trace() == C64::new((d as f64).powi(cycles), 0.0);
                for (t, pt) in group.iter().zip(&ops) {
                    let lhs = ps.matmul(pt).unwrap();
                    let rhs = perm_operator(&s.compose(t).unwrap(), d, &lim).unwrap();
                    perm_ok &= lhs.max_abs_diff(&rhs).unwrap() == 0.0;
                }
            }
        }
    }
    let moments_ok = emitted.is_empty();
    let ok = route_err <= ROUTE_TOL && weight_err <= WEIGHT_TOL && perm_ok && moments_ok;
    gate.report(
        "structural invariants",
        ok,
        format!(
            "route {route_err:.1e} over 50 4-qubit cases, weights {weight_err:.1e}, \
             permutation identities {}, invalid moments {}",
            if perm_ok { "exact" } else { "broken" },
            if moments_ok {
                "none".to_string()
            } else {
                emitted.join("; ")
            }
        ),
        started,
    );
}

fn determinism(gate: &mut Gate) {
    let started = Instant::now();
    let configs = [
        json!({ "experiment": "fig1b", "master_seed": 5,
                "parameters": { "a_size": 1, "b_size": 5, "k_list": [2, 3], "epsilon_points": 6 } }),
        json!({ "experiment": "dynamics", "master_seed": 5,
                "parameters": { "couplings": { "j": 0.8, "g": 0.6472, "h": 0.7236 },
                                "s_size": 1, "a_size": 1, "b_sizes": [4, 5], "t_max": 4,
                                "k_list": [2], "n_realizations": 3 } }),
        json!({ "experiment": "selfdual", "master_seed": 5,
                "parameters": { "g": PI / 9.0, "s_size": 1, "a_size": 1, "b_sizes": [4, 5],
                                "t_max": 4, "k_list": [2], "finite_reference_unitaries": 4 } }),
        json!({ "experiment": "scrooge_check", "master_seed": 5,
                "parameters": { "s_size": 1, "a_size": 1, "k_list": [2], "n_samples": 3000 } }),
        json!({ "experiment": "ghse_check", "master_seed": 5,
                "parameters": { "rank_dim": 2, "local_dim": 2, "k_list": [2], "n_samples": 3000 } }),
        json!({ "experiment": "mc_ref_check", "master_seed": 5,
                "parameters": { "spectrum": [0.5, 0.5], "a_size": 1, "b_size": 4,
                                "k_list": [2], "n_unitaries": 10 } }),
        json!({ "experiment": "concentration_scan", "master_seed": 5,
                "parameters": { "a_size": 1, "b_sizes": [2, 3], "n_samples": 10 } }),
    ];
    let mut mismatched = Vec::new();
    for base in configs {
        let csvs: Vec<Vec<String>> = [1usize, 4, 8]
            .iter()
            .map(|&threads| {
                let mut v = base.clone();
                v["threads"] = json!(threads);
                run(v).iter().map(|t| t.to_csv_string().unwrap()).collect()
            })
            .collect();
        if csvs.windows(2).any(|w| w[0] != w[1]) {
            mismatched.push(base["experiment"].as_str().unwrap().to_string());
        }
    }
    gate.report(
        "identical CSVs at 1, 4 and 8 threads",
        mismatched.is_empty(),
        if mismatched.is_empty() {
            "all 7 experiments".to_string()
        } else {
            format!("differs: {}", mismatched.join(", "))
        },
        started,
    );
}

fn main() -> ExitCode {
    let mut gate = Gate { failures: 0 };
    let mut emitted = Vec::new();
    exact_formulas(&mut gate, &mut emitted);
    scrooge(&mut gate);
    ghse(&mut gate);
    mc_reference(&mut gate);
    dynamics(&mut gate);
    selfdual(&mut gate);
    structural(&mut gate, &mut emitted);
    determinism(&mut gate);
    println!("acceptance: {} criteria failed", gate.failures);
    if gate.failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
