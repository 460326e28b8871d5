//! Acceptance suite: one test per shipped guarantee, each printing a single
//! `[Cnn] name: PASS/FAIL (detail)` line. Tolerances are pinned here as
//! constants; seeds are fixed so every verdict is reproducible bit for bit.
//!
//! The statistical criteria are one-sided where the underlying statements
//! are upper bounds (rate slopes), and z-score envelopes where a law is
//! exact (noise covariances). Fixed seeds make the 3-sigma envelopes
//! deterministic: a frozen draw either sits inside the envelope or the
//! generator is wrong by far more than the envelope width.

use std::path::Path;
use std::process::Command;

use fracdensity::fbm::{
    fgn_autocov, sample_fgn_cholesky, sample_fgn_circulant, HurstParameter,
};
use fracdensity::harness::{
    build_oracle, fit_loglog_slope, mc_mse, mc_variance_scaling, BandwidthSource, MseExperiment,
    OracleBudget, VarianceScalingExperiment,
};
use fracdensity::innovation::{gap_halving_ratio, InnovationCheck};
use fracdensity::kernels::{kernel_moment, Kernel1D};
use fracdensity::control_ode::{randomized_suite, TERMINAL_TOL};
use fracdensity::estimator::bias_convolution_oracle;
use fracdensity::rates::{theoretical_mse_exponent_raw, RateRegime, RateVariant};
use fracdensity::rng::{derive_seed, domains};
use fracdensity::sde::{DiffusionMatrix, DriftSpec};

// ---- pinned tolerances ------------------------------------------------
/// z-score envelope for exact-law Monte Carlo checks (C1, C2).
const Z_ENVELOPE: f64 = 3.0;
/// Kernel moment deviation bound (C3).
const MOMENT_TOL: f64 = 1e-10;
/// Bias log-log slope window around the second-order prediction (C4).
const BIAS_SLOPE_RANGE: (f64, f64) = (1.8, 2.2);
/// Variance-vs-horizon slope window around -1 for rough noise (C5).
const VAR_SLOPE_ROUGH: (f64, f64) = (-1.25, -0.75);
/// Long-memory variance slope: within this of 2H-2 and never below -1 (C6).
const VAR_SLOPE_LONG_MEMORY_WINDOW: f64 = 0.25;
/// Slack added to the theoretical MSE decay exponent (C7).
const MSE_SLOPE_SLACK: f64 = 0.2;
/// Improved-rule MSE may exceed the basic-rule MSE by at most this factor
/// at the largest horizon (C8).
const IMPROVED_RATIO_MAX: f64 = 1.1;
/// Terminal gap bound and per-node envelope slack for the control ODE (C9).
const CONTROL_STEPS: usize = 10_000;
/// Minimum gap-shrink factor under step halving (C10).
const HALVING_MIN: f64 = 1.5;

// Fixed base seeds, one per statistical criterion.
const SEED_C1: u64 = 11;
const SEED_C2: u64 = 23;
const SEED_C5: u64 = 33;
const SEED_C6: u64 = 44;
const SEED_C7: u64 = 55;
const SEED_C8: u64 = 66;
const SEED_C9: u64 = 77;
const SEED_C10: u64 = 88;
const SEED_C11: u64 = 12345;

fn report(id: &str, name: &str, pass: bool, detail: &str) {
    println!("[{id}] {name}: {} ({detail})", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "[{id}] {name}: {detail}");
}

fn hurst(v: f64) -> HurstParameter {
    HurstParameter::new(v).unwrap()
}

fn fou_1d() -> DriftSpec {
    DriftSpec::fou(1.0, 1).unwrap()
}

#[test]
fn c01_fgn_law_matches_analytic_autocovariance() {
    // For each H: 200 replicates of n = 2^14 unit-step fGn; the empirical
    // autocovariance at lags 0..=10 must sit within 3 Monte Carlo standard
    // errors of the analytic value. The per-replicate estimator
    // sum x_i x_{i+k} / (n - k) is exactly unbiased (the mean is known to
    // be zero), so the z-scores are pivotal.
    let n = 1 << 14;
    let reps = 200;
    let mut worst = 0.0f64;
    let mut worst_at = String::new();
    for (hi, hv) in [0.1, 0.25, 0.5, 0.75, 0.9].iter().enumerate() {
        let h = hurst(*hv);
        let mut per_lag: Vec<Vec<f64>> = vec![Vec::with_capacity(reps); 11];
        for r in 0..reps {
            let seed = derive_seed(SEED_C1, domains::CHECKS, ((hi as u64) << 32) | r as u64);
            let x = sample_fgn_circulant(h, n, 1.0, seed).unwrap();
            for (k, acc) in per_lag.iter_mut().enumerate() {
                let m = n - k;
                let s: f64 = (0..m).map(|i| x[i] * x[i + k]).sum();
                acc.push(s / m as f64);
            }
        }
        for (k, vals) in per_lag.iter().enumerate() {
            let mean = vals.iter().sum::<f64>() / reps as f64;
            let var =
                vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (reps - 1) as f64;
            let se = (var / reps as f64).sqrt();
            let z = (mean - fgn_autocov(h, 1.0, k)).abs() / se;
            if z > worst {
                worst = z;
                worst_at = format!("H={hv} lag={k}");
            }
        }
    }
    report(
        "C01",
        "fGn autocovariance law",
        worst < Z_ENVELOPE,
        &format!("max |z| = {worst:.2} at {worst_at}, envelope {Z_ENVELOPE}"),
    );
}

#[test]
fn c02_circulant_and_cholesky_covariances_agree() {
    // Both exact generators target the same Toeplitz covariance, so its 64
    // distinct entries are the autocovariances at lags 0..63. Per replicate
    // and lag the position-pooled product mean is recorded; the two
    // generators' empirical autocovariances must agree entrywise within 3
    // standard errors of the difference over 5000 independent replicates
    // per generator. (Pooling positions uses the Toeplitz structure both
    // laws share; it tightens every entry's standard error, so any real
    // covariance error shows up more strongly, not less.)
    let n = 64;
    let reps = 5000usize;
    let h = hurst(0.25);
    let pooled = |x: &[f64], k: usize| {
        let m = n - k;
        (0..m).map(|i| x[i] * x[i + k]).sum::<f64>() / m as f64
    };
    let mut per_lag_c: Vec<Vec<f64>> = vec![Vec::with_capacity(reps); n];
    let mut per_lag_k: Vec<Vec<f64>> = vec![Vec::with_capacity(reps); n];
    for r in 0..reps {
        let xc =
            sample_fgn_circulant(h, n, 1.0, derive_seed(SEED_C2, domains::CHECKS, r as u64))
                .unwrap();
        let xk = sample_fgn_cholesky(
            h,
            n,
            1.0,
            derive_seed(SEED_C2, domains::CHECKS, 1_000_000 + r as u64),
        )
        .unwrap();
        for k in 0..n {
            per_lag_c[k].push(pooled(&xc, k));
            per_lag_k[k].push(pooled(&xk, k));
        }
    }
    let stats = |vals: &[f64]| {
        let m = vals.iter().sum::<f64>() / vals.len() as f64;
        let v = vals.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (vals.len() - 1) as f64;
        (m, v / vals.len() as f64)
    };
    let mut worst = 0.0f64;
    let mut worst_at = 0;
    for k in 0..n {
        let (mc, vc) = stats(&per_lag_c[k]);
        let (mk, vk) = stats(&per_lag_k[k]);
        let z = (mc - mk).abs() / (vc + vk).sqrt();
        if z > worst {
            worst = z;
            worst_at = k;
        }
    }
    report(
        "C02",
        "generator cross-validation",
        worst < Z_ENVELOPE,
        &format!("max |z| = {worst:.2} at lag {worst_at} over {n} covariance entries"),
    );
}

#[test]
fn c03_kernel_orders_have_exact_moments() {
    // For every order M in 0..=8 the constructed kernel integrates to one
    // and kills moments 1..=M to quadrature accuracy.
    let mut worst = 0.0f64;
    let mut worst_at = String::new();
    for order in 0..=8usize {
        let kernel = Kernel1D::legendre(order);
        for i in 0..=order {
            let target = if i == 0 { 1.0 } else { 0.0 };
            let dev = (kernel_moment(&kernel, i, 64).unwrap() - target).abs();
            if dev > worst {
                worst = dev;
                worst_at = format!("M={order} i={i}");
            }
        }
    }
    report(
        "C03",
        "kernel moment exactness",
        worst < MOMENT_TOL,
        &format!("max |deviation| = {worst:.3e} at {worst_at}, bound {MOMENT_TOL:.0e}"),
    );
}

#[test]
fn c04_bias_is_second_order_for_the_order_one_kernel() {
    // Convolution bias of the order-1 kernel against a standard normal at
    // the origin: |bias(h)| ~ c h^2, so the log-log slope over
    // h in {0.4, 0.2, 0.1, 0.05} must sit in [1.8, 2.2].
    let kernel = Kernel1D::legendre(1);
    let phi = |x: &[f64]| (-x[0] * x[0] / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let mut pairs = Vec::new();
    for &h in &[0.4, 0.2, 0.1, 0.05] {
        let bias = bias_convolution_oracle(&phi, &[0.0], h, &kernel, 64).unwrap();
        pairs.push((h, bias.abs()));
    }
    let fit = fit_loglog_slope(&pairs).unwrap();
    let pass = fit.slope >= BIAS_SLOPE_RANGE.0 && fit.slope <= BIAS_SLOPE_RANGE.1;
    report(
        "C04",
        "bias order",
        pass,
        &format!(
            "slope {:.3} in [{}, {}]",
            fit.slope, BIAS_SLOPE_RANGE.0, BIAS_SLOPE_RANGE.1
        ),
    );
}

fn variance_slope(hv: f64, seed: u64) -> f64 {
    let exp = VarianceScalingExperiment {
        drift: fou_1d(),
        sigma: DiffusionMatrix::identity(1),
        hurst: hurst(hv),
        t_grid: vec![64.0, 128.0, 256.0, 512.0, 1024.0, 2048.0],
        replicates: 200,
        kernel_order: 2,
        h: 0.3,
        query_points: vec![vec![0.5]],
        dt: None,
        burn_in: None,
    };
    mc_variance_scaling(&exp, seed).unwrap().slopes[0].fit.slope
}

#[test]
fn c05_variance_decays_like_one_over_t_for_rough_noise() {
    // fOU at H = 0.25, h = 0.3 fixed, T over six octaves, 200 replicates:
    // Var ~ c/T, fitted slope within [-1.25, -0.75].
    let slope = variance_slope(0.25, SEED_C5);
    let pass = slope >= VAR_SLOPE_ROUGH.0 && slope <= VAR_SLOPE_ROUGH.1;
    report(
        "C05",
        "variance T-scaling (H=0.25)",
        pass,
        &format!("slope {:.3} in [{}, {}]", slope, VAR_SLOPE_ROUGH.0, VAR_SLOPE_ROUGH.1),
    );
}

#[test]
fn c06_variance_decays_slower_under_long_memory() {
    // Same experiment at H = 0.75: the bound degrades to T^{2H-2} = T^{-1/2};
    // the fitted slope must stay >= -1 and within 0.25 of -0.5.
    let slope = variance_slope(0.75, SEED_C6);
    let predicted = 2.0 * 0.75 - 2.0;
    let pass = slope >= -1.0 && (slope - predicted).abs() <= VAR_SLOPE_LONG_MEMORY_WINDOW;
    report(
        "C06",
        "variance T-scaling (H=0.75)",
        pass,
        &format!(
            "slope {slope:.3}, predicted {predicted}, window {VAR_SLOPE_LONG_MEMORY_WINDOW}, floor -1"
        ),
    );
}

fn mse_experiment(variant: RateVariant, t_grid: Vec<f64>) -> MseExperiment {
    MseExperiment {
        drift: fou_1d(),
        sigma: DiffusionMatrix::identity(1),
        hurst: hurst(0.25),
        t_grid,
        replicates: 100,
        kernel_order: 2,
        beta_assumed: 2.0,
        bandwidth: BandwidthSource::Rule { variant, eps: 0.01 },
        query_points: vec![vec![0.0]],
        dt: None,
        burn_in: None,
    }
}

fn fou_oracle(max_t: f64, seed: u64) -> fracdensity::harness::OracleDensity {
    // Independent long-run oracle: 20x the largest experiment horizon, its
    // own seed domain, self-validated by a split-half comparison.
    build_oracle(
        &fou_1d(),
        &DiffusionMatrix::identity(1),
        hurst(0.25),
        OracleBudget::standard(20.0 * max_t),
        max_t,
        seed,
    )
    .unwrap()
}

#[test]
fn c07_mse_decays_at_the_theoretical_rate() {
    // Basic rule at H = 0.25, beta = 2, d = 1 gives h = T^{-1/6} and a
    // guaranteed MSE exponent beta/(beta+d) = 2/3; the fitted slope must be
    // at most -2/3 + 0.2 and the MSE sequence must not increase by more
    // than one combined standard error between consecutive horizons.
    let exp = mse_experiment(RateVariant::Basic, vec![64.0, 128.0, 256.0, 512.0, 1024.0, 2048.0]);
    let oracle = fou_oracle(2048.0, SEED_C7);
    let result = mc_mse(&exp, &oracle, SEED_C7).unwrap();
    let slope = result.slopes[0].fit.slope;
    let regime = RateRegime::new(RateVariant::Basic, hurst(0.25), 2.0, 1, 0.01).unwrap();
    let bound = -theoretical_mse_exponent_raw(&regime).unwrap() + MSE_SLOPE_SLACK;
    let slope_pass = slope <= bound;

    let series: Vec<(f64, f64)> = result
        .cells
        .iter()
        .map(|c| (c.mse.as_ref().unwrap()[0], c.mse_stderr.as_ref().unwrap()[0]))
        .collect();
    let mut worst_rise = f64::NEG_INFINITY;
    for w in series.windows(2) {
        let rise = (w[1].0 - w[0].0) / (w[0].1 * w[0].1 + w[1].1 * w[1].1).sqrt();
        worst_rise = worst_rise.max(rise);
    }
    let mono_pass = worst_rise <= 1.0;
    report(
        "C07",
        "MSE rate upper bound",
        slope_pass && mono_pass,
        &format!(
            "slope {slope:.3} <= {bound:.3}; worst consecutive rise {worst_rise:.2} se (limit 1)"
        ),
    );
}

#[test]
fn c08_improved_bandwidth_rule_dominates() {
    // Empirical half: with common random numbers per (horizon, replicate),
    // the improved rule's MSE at T = 2^11 must not exceed 1.1x the basic
    // rule's. Analytic half: the improved theoretical exponent dominates
    // the basic one across a 1000-point (H, beta, d) grid.
    let t_grid = vec![512.0, 1024.0, 2048.0];
    let oracle = fou_oracle(2048.0, SEED_C8);
    let basic = mc_mse(&mse_experiment(RateVariant::Basic, t_grid.clone()), &oracle, SEED_C8)
        .unwrap();
    let improved =
        mc_mse(&mse_experiment(RateVariant::Improved, t_grid), &oracle, SEED_C8).unwrap();
    let last = basic.cells.len() - 1;
    let mse_basic = basic.cells[last].mse.as_ref().unwrap()[0];
    let mse_improved = improved.cells[last].mse.as_ref().unwrap()[0];
    let ratio = mse_improved / mse_basic;
    let empirical_pass = ratio <= IMPROVED_RATIO_MAX;

    let mut analytic_pass = true;
    let mut grid_points = 0;
    let mut worst_margin = f64::INFINITY;
    for hi in 1..=10 {
        let hv = 0.045 * hi as f64; // 0.045 .. 0.45, strictly below 1/2
        for bj in 0..10 {
            let beta = 1.0 + 0.5 * bj as f64;
            for d in 1..=10 {
                let basic_r = RateRegime::new(RateVariant::Basic, hurst(hv), beta, d, 0.0).unwrap();
                let improved_r =
                    RateRegime::new(RateVariant::Improved, hurst(hv), beta, d, 0.0).unwrap();
                let margin = theoretical_mse_exponent_raw(&improved_r).unwrap()
                    - theoretical_mse_exponent_raw(&basic_r).unwrap();
                worst_margin = worst_margin.min(margin);
                analytic_pass &= margin >= -1e-12;
                grid_points += 1;
            }
        }
    }
    assert_eq!(grid_points, 1000);
    report(
        "C08",
        "improved bandwidth rule",
        empirical_pass && analytic_pass,
        &format!(
            "MSE ratio at T=2048: {ratio:.3} (limit {IMPROVED_RATIO_MAX}); \
             exponent margin >= {worst_margin:.4} on 1000 grid points"
        ),
    );
}

#[test]
fn c09_control_ode_reaches_zero_along_the_envelope() {
    // 100 randomized steering problems: every run must hit |rho(1)| < 1e-6
    // and respect the square-root decay envelope at every node, up to the
    // 10*dt discretization allowance.
    let stats = randomized_suite(100, CONTROL_STEPS, SEED_C9).unwrap();
    let dt = 1.0 / CONTROL_STEPS as f64;
    let worst_terminal = stats.iter().map(|s| s.rho_final).fold(0.0f64, f64::max);
    let worst_excess =
        stats.iter().map(|s| s.max_envelope_excess).fold(f64::NEG_INFINITY, f64::max);
    let pass = worst_terminal < TERMINAL_TOL && worst_excess <= 10.0 * dt;
    report(
        "C09",
        "control ODE extinction",
        pass,
        &format!(
            "worst terminal gap {worst_terminal:.2e} (tol {TERMINAL_TOL:.0e}), \
             worst envelope excess {worst_excess:.2e} (allowance {:.0e})",
            10.0 * dt
        ),
    );
}

#[test]
fn c10_innovation_gap_halves_with_the_step() {
    // The two-route reconstruction gap is a first-order quadrature
    // residual; halving the step on a common refinement must shrink it by
    // at least 1.5x for both a rough and a long-memory H.
    let mut details = Vec::new();
    let mut pass = true;
    for &hv in &[0.25, 0.75] {
        let check = InnovationCheck::standard(hurst(hv), 1.0, 0.5);
        let rep = gap_halving_ratio(&check, 32, SEED_C10).unwrap();
        pass &= rep.ratio >= HALVING_MIN;
        details.push(format!("H={hv}: ratio {:.2}", rep.ratio));
    }
    report(
        "C10",
        "innovation gap halving",
        pass,
        &format!("{} (min {HALVING_MIN})", details.join(", ")),
    );
}

fn read_csvs(dir: &Path, names: &[&str]) -> Vec<Vec<u8>> {
    names.iter().map(|n| std::fs::read(dir.join(n)).unwrap()).collect()
}

#[test]
fn c11_manifest_reruns_are_bitwise_identical() {
    // Three binary invocations of a small variance experiment: thread
    // counts 1 and 4 must produce byte-identical CSVs, and replaying the
    // first run's manifest must reproduce them again.
    let bin = env!("CARGO_BIN_EXE_fracdensity");
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.toml");
    std::fs::write(
        &cfg,
        format!(
            "[experiment]\nreplicates = 8\nseed = {SEED_C11}\n\n\
             [noise]\nhurst = 0.25\n\n\
             [grid]\nt_grid = [8.0, 16.0, 32.0]\ndt = 0.02\nburn_in = 5.0\n\n\
             [bandwidth]\nfixed = 0.3\n"
        ),
    )
    .unwrap();
    let csvs = ["variance_samples.csv", "variance_cells.csv"];
    let d1 = tmp.path().join("t1");
    let d2 = tmp.path().join("t4");
    let d3 = tmp.path().join("replay");

    let run = |args: &[&str]| {
        let status = Command::new(bin).args(args).output().unwrap();
        status.status.code().unwrap()
    };
    let c1 = run(&[
        "variance-scaling", "--config", cfg.to_str().unwrap(),
        "--out", d1.to_str().unwrap(), "--threads", "1",
    ]);
    let c2 = run(&[
        "variance-scaling", "--config", cfg.to_str().unwrap(),
        "--out", d2.to_str().unwrap(), "--threads", "4",
    ]);
    // Internal slope checks may legitimately fail at this toy scale (exit
    // 1); determinism concerns the artifacts, which must always be written.
    assert!(c1 == 0 || c1 == 1, "unexpected exit code {c1}");
    let threads_identical = read_csvs(&d1, &csvs) == read_csvs(&d2, &csvs) && c1 == c2;

    let manifest1 = d1.join("manifest.json");
    let c3 = run(&[
        "variance-scaling", "--config", manifest1.to_str().unwrap(),
        "--out", d3.to_str().unwrap(),
    ]);
    let replay_identical = read_csvs(&d1, &csvs) == read_csvs(&d3, &csvs) && c3 == c1;

    // The replay embeds the same experiment definition; only the output
    // directory (a flag override, recorded for provenance) may differ.
    let resolved = |p: &Path| -> toml::Value {
        let v: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(p.join("manifest.json")).unwrap())
                .unwrap();
        let mut cfg: toml::Value = v["resolved_config"].as_str().unwrap().parse().unwrap();
        cfg["experiment"]
            .as_table_mut()
            .unwrap()
            .remove("out");
        cfg
    };
    let config_preserved = resolved(&d1) == resolved(&d3);
    report(
        "C11",
        "deterministic reruns",
        threads_identical && replay_identical && config_preserved,
        &format!(
            "threads 1 vs 4 identical: {threads_identical}; manifest replay identical: \
             {replay_identical}; experiment config preserved: {config_preserved}"
        ),
    );
}
