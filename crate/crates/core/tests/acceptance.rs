//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
//! and exits nonzero if any criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::{Command, ExitCode};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use multilayer_power::gain_matrix::{
    build_multi_layer, build_single_layer, build_two_layer, LayeredGains,
};
use multilayer_power::harness::{run_campaign, ScenarioConfig};
use multilayer_power::propagation::{
    macro_path_loss_db, macro_path_loss_general_db, micro_path_loss_db, micro_path_loss_general_db,
    sector_antenna_gain_db, PropagationParams,
};
use multilayer_power::solvers::{
    iterate_distributed, solve_lp_system, solve_multi_layer, solve_single_layer, solve_two_layer,
    spectral_radius, IterationOptions, PowerCaps,
};
use multilayer_power::Error;

use common::*;

// Pinned tolerances and suite sizes.
const GAIN_BAND_DB: (f64, f64) = (9.0, 18.0);
const CAMPAIGN_DROPS: usize = 100;
const CLOSED_FORM_REL: f64 = 1e-8;
const SUITE: usize = 1000;
const ITERATION_REL: f64 = 1e-6;
const TWO_LAYER_REL: f64 = 1e-8;
const H_ZERO_REL: f64 = 1e-12;
const LP_ORACLE_ABS: f64 = 1e-6;
const LP_SUITE: usize = 1000;
const MULTI_SUITE: usize = 100;
const MULTI_ABS: f64 = 1e-10;
const SPECTRAL_SUITE: usize = 500;
const SPECTRAL_ABS: f64 = 1e-8;
const PL_REDUCTION_DB: f64 = 0.05;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn campaign_gain_band() -> Outcome {
    let cfg = ScenarioConfig {
        drops: CAMPAIGN_DROPS,
        ..Default::default()
    };
    let c = run_campaign(&cfg).expect("campaign runs");
    let means: Vec<Option<f64>> = c.summary.levels.iter().map(|l| l.mean_gain_db).collect();
    let in_band = means
        .iter()
        .all(|m| m.is_some_and(|g| (GAIN_BAND_DB.0..=GAIN_BAND_DB.1).contains(&g)));
    let first = means.first().copied().flatten();
    let last = means.last().copied().flatten();
    let trend = matches!((first, last), (Some(a), Some(b)) if b <= a);
    let levels: Vec<String> = c
        .summary
        .levels
        .iter()
        .map(|l| {
            format!(
                "{:.1}%:{}",
                l.outage_pct,
                l.mean_gain_db.map_or("-".into(), |g| format!("{g:.2}"))
            )
        })
        .collect();
    let solved: usize = c.summary.levels.iter().map(|l| l.solved).sum();
    let drops: usize = c.summary.levels.iter().map(|l| l.drops).sum();
    outcome(
        in_band && trend,
        format!(
            "mean gain dB [{}]; band {:?} {}; trend (last <= first) {}; {solved}/{drops} drop-levels solved",
            levels.join(" "),
            GAIN_BAND_DB,
            if in_band { "met" } else { "missed" },
            if trend { "met" } else { "missed" },
        ),
    )
}

struct SingleCase {
    gains: LayeredGains,
    feasible: bool,
}

fn single_suite() -> Vec<SingleCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    (0..SUITE)
        .map(|k| {
            let n = 2 + k % 9;
            let feasible = k % 2 == 0;
            let rho = if feasible {
                rng.random_range(0.05..0.95)
            } else {
                rng.random_range(1.05..3.0)
            };
            SingleCase {
                gains: single_layer(&mut rng, n, rho),
                feasible,
            }
        })
        .collect()
}

fn closed_form_correctness() -> Outcome {
    let mut worst = 0.0f64;
    let mut bad = 0;
    let (mut feasible, mut infeasible) = (0, 0);
    for case in single_suite() {
        let sys = build_single_layer(&case.gains).unwrap();
        let n = case.gains.users();
        match (case.feasible, solve_single_layer(&sys)) {
            (true, Ok(a)) => {
                feasible += 1;
                let p = DVector::from_column_slice(&a.powers_w);
                let f = sys.f();
                let r = (DMatrix::identity(n, n) - f) * &p - &sys.u;
                let rel = r.amax() / sys.u.amax();
                worst = worst.max(rel);
                if rel > CLOSED_FORM_REL || p.iter().any(|&v| v < 0.0) {
                    bad += 1;
                }
            }
            (false, Err(e)) if e.is_infeasible() => infeasible += 1,
            _ => bad += 1,
        }
    }
    outcome(
        bad == 0,
        format!(
            "{feasible} feasible instances, worst relative residual {worst:.2e} (limit {CLOSED_FORM_REL:e}); \
             {infeasible} rho>1 instances reported infeasible; {bad} failures"
        ),
    )
}

fn iteration_agreement() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    let mut bad = 0;
    let (mut converged, mut diverged) = (0, 0);
    for case in single_suite() {
        let sys = build_single_layer(&case.gains).unwrap();
        let n = case.gains.users();
        let starts = [
            DVector::zeros(n),
            DVector::from_fn(n, |_, _| rng.random_range(0.0..10.0)),
        ];
        if case.feasible {
            let p_star = DVector::from_column_slice(&solve_single_layer(&sys).unwrap().powers_w);
            for p0 in &starts {
                match iterate_distributed(&sys, p0, IterationOptions::default()) {
                    Ok(out) => {
                        let p = DVector::from_column_slice(&out.allocation.powers_w);
                        let rel = (p - &p_star).amax() / p_star.amax();
                        worst = worst.max(rel);
                        if rel < ITERATION_REL {
                            converged += 1;
                        } else {
                            bad += 1;
                        }
                    }
                    Err(_) => bad += 1,
                }
            }
        } else {
            for p0 in &starts {
                match iterate_distributed(&sys, p0, IterationOptions::default()) {
                    Err(Error::Divergence { .. }) => diverged += 1,
                    _ => bad += 1,
                }
            }
        }
    }
    outcome(
        bad == 0,
        format!(
            "{converged} runs converged (worst relative error {worst:.2e}, limit {ITERATION_REL:e}); \
             {diverged} runs on rho>1 tripped the ceiling; {bad} failures"
        ),
    )
}

fn two_layer_residual() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut worst_res, mut worst_sinr, mut worst_h0) = (0.0f64, 0.0f64, 0.0f64);
    let mut bad = 0;
    for k in 0..SUITE {
        let n = 2 + k % 9;
        let rho = rng.random_range(0.05..0.95);
        let gains = two_layer(&mut rng, n, rho);
        let sys = build_two_layer(&gains).unwrap();
        let Ok(a) = solve_two_layer(&sys) else {
            bad += 1;
            continue;
        };
        let (am, bm, u) = two_layer_abu(&gains);
        let x = DVector::from_column_slice(&a.powers_w);
        let res = (&am * &x - &bm * &x - &u).amax() / u.amax();
        let sinr_err = sinr(&gains, &a.powers_w)
            .iter()
            .zip(gains.gamma.iter())
            .map(|(s, g)| (s - g).abs() / g)
            .fold(0.0, f64::max);
        worst_res = worst_res.max(res);
        worst_sinr = worst_sinr.max(sinr_err);
        if res >= TWO_LAYER_REL || sinr_err > TWO_LAYER_REL || x.iter().any(|&v| v < 0.0) {
            bad += 1;
        }

        // h = 0: the micro layer carries nothing and the macro powers are
        // the single-layer solution
        let zero = LayeredGains::new(
            vec![gains.layers[0].clone(), DMatrix::zeros(n, n)],
            gains.gamma.clone(),
            gains.noise_w.clone(),
        )
        .unwrap();
        let single = build_single_layer(&zero.truncated(1)).unwrap();
        if let (Ok(two), Ok(one)) = (
            solve_two_layer(&build_two_layer(&zero).unwrap()),
            solve_single_layer(&single),
        ) {
            let scale = max_abs(one.powers_w.iter().copied());
            let gap = max_abs(
                two.powers_w[..n]
                    .iter()
                    .zip(&one.powers_w)
                    .map(|(a, b)| a - b)
                    .chain(two.powers_w[n..].iter().copied()),
            ) / scale;
            worst_h0 = worst_h0.max(gap);
            if gap > H_ZERO_REL {
                bad += 1;
            }
        }
    }
    outcome(
        bad == 0,
        format!(
            "{SUITE} instances: worst residual {worst_res:.2e}, worst SINR error {worst_sinr:.2e} \
             (limit {TWO_LAYER_REL:e}); h=0 worst gap to single layer {worst_h0:.2e} \
             (limit {H_ZERO_REL:e}); {bad} failures"
        ),
    )
}

fn lp_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    let mut bad = 0;
    let (mut optimal, mut infeasible, mut compared) = (0, 0, 0);
    for _ in 0..LP_SUITE {
        let rho = rng.random_range(0.2..1.5);
        let gains = two_layer(&mut rng, 2, rho);
        let caps = [rng.random_range(0.3..3.0), rng.random_range(0.3..3.0)];
        let sys = build_two_layer(&gains).unwrap();
        let (a, b, u) = two_layer_abu(&gains);
        let d = &a - &b;
        let mut rows: Vec<Vec<f64>> = (0..2).map(|i| d.row(i).iter().copied().collect()).collect();
        let mut rhs: Vec<f64> = u.iter().copied().collect();
        for k in 0..4 {
            let mut e = vec![0.0; 4];
            e[k] = 1.0;
            rows.push(e.clone());
            rhs.push(0.0);
            e[k] = -1.0;
            rows.push(e);
            rhs.push(-caps[k / 2]);
        }
        let oracle = vertex_enumeration(&[1.0; 4], &rows, &rhs);
        let lp = solve_lp_system(
            &sys,
            &PowerCaps {
                per_layer_w: caps.to_vec(),
            },
        );
        match (oracle, lp) {
            (Some((obj, _)), Ok(alloc)) => {
                optimal += 1;
                let gap = (obj - alloc.total_power_w).abs();
                worst = worst.max(gap);
                if gap > LP_ORACLE_ABS {
                    bad += 1;
                }
            }
            (None, Err(Error::LpInfeasible { .. })) => infeasible += 1,
            _ => bad += 1,
        }

        // caps that never bind: the LP is the true minimum, so it cannot
        // exceed the closed form
        if let Ok(closed) = solve_two_layer(&sys) {
            match solve_lp_system(&sys, &PowerCaps::uncapped(2)) {
                Ok(lp) if lp.total_power_w <= closed.total_power_w + LP_ORACLE_ABS => compared += 1,
                _ => bad += 1,
            }
        }
    }
    outcome(
        bad == 0,
        format!(
            "{optimal} optimal (worst objective gap {worst:.2e}, limit {LP_ORACLE_ABS:e}), \
             {infeasible} infeasible agreed; LP <= closed form on {compared} uncapped instances; {bad} failures"
        ),
    )
}

fn multi_layer_reduction() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    let mut bad = 0;
    for k in 0..MULTI_SUITE {
        let n = 2 + k % 9;
        let rho = rng.random_range(0.05..0.95);
        let two = two_layer(&mut rng, n, rho);
        let mut layers = two.layers.clone();
        layers.push(DMatrix::zeros(n, n));
        let three = LayeredGains::new(layers, two.gamma.clone(), two.noise_w.clone()).unwrap();
        match (
            solve_two_layer(&build_two_layer(&two).unwrap()),
            solve_multi_layer(&build_multi_layer(&three, 3).unwrap()),
        ) {
            (Ok(a), Ok(b)) => {
                let gap = max_abs(
                    a.powers_w
                        .iter()
                        .zip(&b.powers_w[..2 * n])
                        .map(|(x, y)| x - y)
                        .chain(b.powers_w[2 * n..].iter().copied()),
                );
                worst = worst.max(gap);
                if gap > MULTI_ABS {
                    bad += 1;
                }
            }
            _ => bad += 1,
        }
    }
    outcome(
        bad == 0,
        format!("{MULTI_SUITE} instances, worst componentwise gap {worst:.2e} (limit {MULTI_ABS:e}); {bad} failures"),
    )
}

fn spectral_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    let mut bad = 0;
    for k in 0..SPECTRAL_SUITE {
        let n = 1 + k % 20;
        let sparsity = [0.0, 0.3, 0.6][k % 3];
        let a = nonnegative(&mut rng, n, sparsity);
        match spectral_radius(&a) {
            Ok(r) => {
                let gap = (r.spectral_radius - eig_rho(&a)).abs();
                worst = worst.max(gap);
                if gap > SPECTRAL_ABS {
                    bad += 1;
                }
            }
            Err(_) => bad += 1,
        }
    }
    outcome(
        bad == 0,
        format!(
            "{SPECTRAL_SUITE} matrices (N <= 20, dense and sparse), worst gap {worst:.2e} (limit {SPECTRAL_ABS:e}); {bad} failures"
        ),
    )
}

fn model_constants() -> Outcome {
    let mut failures = Vec::new();
    let mut check = |ok: bool, what: &str| {
        if !ok {
            failures.push(what.to_string());
        }
    };
    check(
        macro_path_loss_db(1.0).unwrap() == 128.15,
        "macro PL at 1 km",
    );
    check(
        micro_path_loss_db(1.0).unwrap() == 148.0,
        "micro PL at 1 km",
    );
    check(sector_antenna_gain_db(0.0) == 0.0, "pattern at 0 deg");
    check(
        (sector_antenna_gain_db(65.0) + 12.0).abs() < 1e-12,
        "pattern at 65 deg",
    );
    check(sector_antenna_gain_db(180.0) == -20.0, "pattern at 180 deg");
    let p = PropagationParams::default();
    let mut worst = 0.0f64;
    for d in [0.01, 0.05, 0.1, 0.5, 1.0, 2.0, 5.0] {
        let m = (macro_path_loss_general_db(d, p.macro_delta_h_bs_m, p.carrier_mhz).unwrap()
            - macro_path_loss_db(d).unwrap())
        .abs();
        let u = (micro_path_loss_general_db(d, p.carrier_mhz).unwrap()
            - micro_path_loss_db(d).unwrap())
        .abs();
        worst = worst.max(m).max(u);
    }
    check(worst <= PL_REDUCTION_DB, "general-form reductions");
    check(p.validate().is_ok(), "default parameters validate");
    outcome(
        failures.is_empty(),
        format!(
            "PL(1 km) = {} / {} dB, pattern (0, 65, 180) = ({}, {}, {}) dBi, \
             worst general-vs-reduced gap {worst:.4} dB (limit {PL_REDUCTION_DB}); failed: {failures:?}",
            macro_path_loss_db(1.0).unwrap(),
            micro_path_loss_db(1.0).unwrap(),
            sector_antenna_gain_db(0.0),
            sector_antenna_gain_db(65.0),
            sector_antenna_gain_db(180.0),
        ),
    )
}

fn run_determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_multilayer-power");
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let status = Command::new(bin)
            .args(["run", "--drops", "3", "--seed", "7", "--out"])
            .arg(&out)
            .output()
            .unwrap();
        assert!(
            status.status.success(),
            "{}",
            String::from_utf8_lossy(&status.stderr)
        );
        out
    };
    let (a, b) = (run("a"), run("b"));
    let files = ["drops.csv", "summary.csv", "plot.csv", "campaign.json"];
    let differing: Vec<&str> = files
        .iter()
        .copied()
        .filter(|f| std::fs::read(a.join(f)).unwrap() != std::fs::read(b.join(f)).unwrap())
        .collect();
    outcome(
        differing.is_empty(),
        format!("two `run --drops 3 --seed 7` invocations; differing files: {differing:?}"),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("campaign gain band and outage trend", campaign_gain_band),
        ("single-layer closed form", closed_form_correctness),
        ("fixed-point iteration agreement", iteration_agreement),
        ("two-layer residual and h=0 reduction", two_layer_residual),
        ("LP against vertex enumeration", lp_oracle),
        ("multi-layer reduction", multi_layer_reduction),
        ("spectral radius against eigensolver", spectral_oracle),
        ("model constants", model_constants),
        ("run determinism", run_determinism),
    ];
    let mut passed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let o = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        println!(
            "criterion {} {}  {name}: {}",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        passed += o.pass as usize;
    }
    println!("acceptance: {passed}/{} criteria passed", criteria.len());
    if passed == criteria.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
