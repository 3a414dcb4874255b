//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails. Pass substrings as arguments to run a
//! subset, e.g. `cargo test --test acceptance -- bias`.

use std::f64::consts::PI;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rankspec::dependence::enumerate::{
    kendall_tau_concordance_enumerate, kendall_tau_enumerate, spearman_rho_enumerate,
};
use rankspec::dependence::{kendall_tau_lag, spearman_rho_lag};
use rankspec::hoeffding::{decompose, degenerate_decay_experiment, HoeffdingModel};
use rankspec::simlab::{
    bias_experiment, clt_experiment, replicate_seed, run_replicates, simulate, BandwidthRule, BiasConfig,
    CltConfig, SimulationModel,
};
use rankspec::spectral::{select_bandwidth, BandwidthOptions, Centering};
use rankspec::{LagWindow, MeasureKind};
use rayon::prelude::*;

const SEED: u64 = 1;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn within(x: f64, lo: f64, hi: f64) -> bool {
    x >= lo && x <= hi
}

fn timed(budget: Duration, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut o = f();
    let elapsed = start.elapsed();
    if elapsed > budget {
        o.pass = false;
    }
    o.detail += &format!("; {:.1}s of {}s", elapsed.as_secs_f64(), budget.as_secs());
    o
}

fn random_series(case: u64, lo: usize, hi: usize) -> rankspec::TimeSeries {
    let seed = replicate_seed(SEED, case);
    let n = lo + (seed % (hi - lo + 1) as u64) as usize;
    simulate(&SimulationModel::IidUniform, n, seed).unwrap()
}

fn oracle_equivalence() -> Outcome {
    timed(Duration::from_secs(120), || {
        let worst = (0..50u64)
            .into_par_iter()
            .map(|case| {
                let s = random_series(case, 20, 200);
                assert!(!s.has_ties());
                let mut worst: f64 = 0.0;
                for k in 0..=s.len() - 4 {
                    let tau = kendall_tau_lag(&s, k).unwrap() - kendall_tau_enumerate(s.values(), k).unwrap();
                    let rho = spearman_rho_lag(&s, k).unwrap() - spearman_rho_enumerate(s.values(), k).unwrap();
                    worst = worst.max(tau.abs()).max(rho.abs());
                }
                worst
            })
            .reduce(|| 0.0, f64::max);
        outcome(worst <= 1e-12, format!("max |fast - enumeration| = {worst:.2e} (tol 1e-12)"))
    })
}

fn kernel_forms() -> Outcome {
    let mut mismatches = 0;
    for case in 0..50u64 {
        let s = random_series(1000 + case, 8, 120);
        let k = (replicate_seed(SEED + 1, case) % (s.len() as u64 - 3)) as usize;
        let a = kendall_tau_enumerate(s.values(), k).unwrap();
        let b = kendall_tau_concordance_enumerate(s.values(), k).unwrap();
        if a.to_bits() != b.to_bits() {
            mismatches += 1;
        }
    }
    outcome(mismatches == 0, format!("{mismatches} of 50 cases differ bitwise"))
}

fn hoeffding_identity() -> Outcome {
    timed(Duration::from_secs(60), || {
        let mut cases = vec![];
        for n in [20, 50] {
            for k in [0, 1, 3] {
                cases.push((MeasureKind::KendallTau, n, k));
            }
        }
        cases.push((MeasureKind::SpearmanRho, 15, 1));
        cases.push((MeasureKind::SpearmanRho, 15, 2));
        let mut worst: f64 = 0.0;
        for (i, (kind, n, k)) in cases.iter().enumerate() {
            let s = simulate(&SimulationModel::IidUniform, *n, replicate_seed(SEED, i as u64)).unwrap();
            let model = HoeffdingModel::for_process(&SimulationModel::IidUniform, *kind, *k).unwrap();
            worst = worst.max(decompose(&s, &model, *k).unwrap().residual.abs());
        }
        outcome(worst <= 1e-10, format!("max |residual| = {worst:.2e} over {} cases (tol 1e-10)", cases.len()))
    })
}

fn degenerate_decay() -> Outcome {
    timed(Duration::from_secs(300), || {
        let mut slopes = vec![];
        for k in [1, 3] {
            let t = degenerate_decay_experiment(
                &SimulationModel::IidUniform,
                MeasureKind::KendallTau,
                &[64, 128, 256, 512],
                200,
                k,
                SEED,
            )
            .unwrap();
            slopes.push((k, t.slope.unwrap_or(f64::NAN)));
        }
        let pass = slopes.iter().all(|(_, s)| *s <= -0.85);
        let text: Vec<String> = slopes.iter().map(|(k, s)| format!("k={k}: {s:.3}")).collect();
        outcome(pass, format!("log-log slopes {} (need <= -0.85)", text.join(", ")))
    })
}

fn clt_config(model: SimulationModel, kind: MeasureKind, window: LagWindow, n: usize, reps: usize) -> CltConfig {
    CltConfig {
        model,
        kind,
        window,
        rule: BandwidthRule::power(0.2),
        omegas: vec![PI / 2.0],
        n,
        reps,
        master_seed: SEED,
        alpha: 0.1,
        centering: Centering::BiasCorrected,
    }
}

fn consistency() -> Outcome {
    timed(Duration::from_secs(300), || {
        let run = |n| {
            clt_experiment(&clt_config(SimulationModel::IidUniform, MeasureKind::KendallTau, LagWindow::BARTLETT, n, 200))
                .unwrap()
                .summaries[0]
                .clone()
        };
        let large = run(4096);
        let small = run(512);
        let gap = (large.mean - 1.0 / (2.0 * PI)).abs();
        outcome(
            gap < 0.01 && large.rmse < small.rmse,
            format!(
                "|mean - 1/(2 pi)| = {gap:.2e} (< 0.01); RMSE {:.3e} at n=4096 vs {:.3e} at n=512",
                large.rmse, small.rmse
            ),
        )
    })
}

struct CltRuns {
    tau: rankspec::simlab::McReport,
    rho: rankspec::simlab::McReport,
    elapsed: Duration,
}

fn clt_runs() -> CltRuns {
    let start = Instant::now();
    let ar = SimulationModel::gaussian_ar1(0.5).unwrap();
    let mut cfg = clt_config(ar, MeasureKind::KendallTau, LagWindow::PARZEN, 4096, 400);
    cfg.omegas = vec![PI / 2.0, PI];
    let tau = clt_experiment(&cfg).unwrap();
    cfg.kind = MeasureKind::SpearmanRho;
    let rho = clt_experiment(&cfg).unwrap();
    CltRuns { tau, rho, elapsed: start.elapsed() }
}

const CLT_BUDGET: Duration = Duration::from_secs(900);

fn clt_standardized(runs: &CltRuns) -> Outcome {
    let s = runs.tau.at(PI / 2.0).unwrap();
    outcome(
        within(s.z.variance, 0.7, 1.3) && s.z.normality_pass && runs.elapsed <= CLT_BUDGET,
        format!(
            "z variance {:.3} in [0.7, 1.3]; KS p = {:.3} (> 0.01), skew {:.3}, excess kurtosis {:.3}",
            s.z.variance, s.z.ks_p_value, s.z.skewness, s.z.excess_kurtosis
        ),
    )
}

fn clt_tau_rho_ratio(runs: &CltRuns) -> Outcome {
    let ratio = runs.tau.at(PI / 2.0).unwrap().variance / runs.rho.at(PI / 2.0).unwrap().variance;
    outcome(
        within(ratio, 0.30, 0.62) && runs.elapsed <= CLT_BUDGET,
        format!("var tau / var rho = {ratio:.3} in [0.30, 0.62]"),
    )
}

fn clt_boundary_doubling(runs: &CltRuns) -> Outcome {
    let ratio = runs.tau.at(PI).unwrap().variance / runs.tau.at(PI / 2.0).unwrap().variance;
    outcome(
        within(ratio, 1.5, 2.6) && runs.elapsed <= CLT_BUDGET,
        format!("var(pi) / var(pi/2) = {ratio:.3} in [1.5, 2.6]; {:.1}s for all CLT runs", runs.elapsed.as_secs_f64()),
    )
}

fn bias_slope(window: LagWindow, lo: f64, hi: f64) -> Outcome {
    timed(Duration::from_secs(300), || {
        let report = bias_experiment(&BiasConfig {
            model: SimulationModel::gaussian_ar1(0.6).unwrap(),
            kind: MeasureKind::KendallTau,
            window,
            omega: 0.0,
            n: 4096,
            reps: 200,
            bandwidths: vec![4.0, 8.0, 16.0],
            master_seed: SEED,
        })
        .unwrap();
        let slope = report.slope.unwrap_or(f64::NAN);
        outcome(
            within(slope, lo, hi),
            format!(
                "{} slope {slope:.3} in [{lo}, {hi}] (exact lag-window bias slope {:.3})",
                window.name(),
                report.exact_slope.unwrap_or(f64::NAN)
            ),
        )
    })
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

fn bandwidth_scaling() -> Outcome {
    timed(Duration::from_secs(300), || {
        let ar = SimulationModel::gaussian_ar1(0.2).unwrap();
        let medians: Vec<f64> = [32_000, 128_000]
            .iter()
            .enumerate()
            .map(|(i, &n)| {
                let r = run_replicates(41, SEED + i as u64, |_, s| {
                    let x = simulate(&ar, n, s)?;
                    let sel = select_bandwidth(&x, MeasureKind::KendallTau, &LagWindow::PARZEN, PI / 2.0, &BandwidthOptions::default())?;
                    Ok(sel.bandwidth.r_n)
                })
                .unwrap();
                median(r)
            })
            .collect();
        let ratio = medians[1] / medians[0];
        let target = 4f64.powf(0.2);
        outcome(
            within(ratio, 0.8 * target, 1.25 * target),
            format!(
                "median r_n {:.3} -> {:.3}, ratio {ratio:.3} in [{:.3}, {:.3}]",
                medians[0],
                medians[1],
                0.8 * target,
                1.25 * target
            ),
        )
    })
}

fn bandwidth_fallback() -> Outcome {
    let n = 2000;
    let sel = run_replicates(40, SEED, |_, s| {
        let x = simulate(&SimulationModel::IidUniform, n, s)?;
        select_bandwidth(&x, MeasureKind::KendallTau, &LagWindow::PARZEN, PI / 2.0, &BandwidthOptions::default())
    })
    .unwrap();
    let fallback_r = (n as f64).powf(0.2);
    let flagged = sel.iter().filter(|s| s.fallback.is_some() && s.bandwidth.r_n == fallback_r).count();
    outcome(flagged >= 32, format!("{flagged} of 40 iid series flagged with r_n = n^(1/5) (need >= 32)"))
}

fn coverage() -> Outcome {
    timed(Duration::from_secs(600), || {
        let mut cfg = clt_config(SimulationModel::gaussian_ar1(0.5).unwrap(), MeasureKind::KendallTau, LagWindow::PARZEN, 4096, 400);
        cfg.rule = BandwidthRule::power(1.0 / 3.0);
        let c = clt_experiment(&cfg).unwrap().summaries[0].coverage;
        outcome(within(c, 0.82, 0.96), format!("90% interval coverage {c:.4} in [0.82, 0.96]"))
    })
}

fn determinism() -> Outcome {
    let exe = env!("CARGO_BIN_EXE_rankspec");
    let runs: [&[&str]; 2] = [
        &["mc", "clt", "--model", "gaussian-ar1", "--phi", "0.5", "-n", "512", "--reps", "100", "--seed", "11", "--omega", "1.5707963267948966,3.141592653589793", "--format", "json"],
        &["mc", "bias", "--model", "gaussian-ar1", "--phi", "0.6", "-n", "512", "--reps", "60", "--seed", "11", "--format", "csv"],
    ];
    let mut identical = true;
    for args in runs {
        let outputs: Vec<Vec<u8>> = ["1", "4", "8"]
            .iter()
            .map(|t| {
                let out = Command::new(exe).args(args).env("RANKSPEC_THREADS", t).output().unwrap();
                assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
                out.stdout
            })
            .collect();
        identical &= outputs.windows(2).all(|w| w[0] == w[1]);
    }
    outcome(identical, "mc clt and mc bias output compared at 1, 4 and 8 threads".into())
}

fn main() -> ExitCode {
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let selected = |id: &str| filters.is_empty() || filters.iter().any(|f| id.contains(f.as_str()));
    let mut results: Vec<(&str, Outcome)> = vec![];
    let mut run = |id: &'static str, f: &dyn Fn() -> Outcome| {
        if selected(id) {
            let o = f();
            println!("[{}] {id}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
            results.push((id, o));
        }
    };
    run("01-oracle-equivalence", &oracle_equivalence);
    run("02-kernel-forms", &kernel_forms);
    run("03-hoeffding-identity", &hoeffding_identity);
    run("04-degenerate-decay", &degenerate_decay);
    run("05-consistency", &consistency);
    if ["06a-clt-standardized", "06b-clt-tau-rho-ratio", "06c-clt-boundary-doubling"].iter().any(|id| selected(id)) {
        let runs = clt_runs();
        run("06a-clt-standardized", &|| clt_standardized(&runs));
        run("06b-clt-tau-rho-ratio", &|| clt_tau_rho_ratio(&runs));
        run("06c-clt-boundary-doubling", &|| clt_boundary_doubling(&runs));
    }
    run("07a-bias-order-bartlett", &|| bias_slope(LagWindow::BARTLETT, -1.35, -0.7));
    run("07b-bias-order-parzen", &|| bias_slope(LagWindow::PARZEN, -2.5, -1.6));
    run("08a-bandwidth-scaling", &bandwidth_scaling);
    run("08b-bandwidth-fallback", &bandwidth_fallback);
    run("09-ci-coverage", &coverage);
    run("10-determinism", &determinism);

    let failed: Vec<&str> = results.iter().filter(|(_, o)| !o.pass).map(|(id, _)| *id).collect();
    println!("acceptance: {} passed, {} failed", results.len() - failed.len(), failed.len());
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failed: {}", failed.join(", "));
        ExitCode::FAILURE
    }
}
