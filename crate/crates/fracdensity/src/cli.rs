//! Command-line entry point: one binary, nine subcommands, deterministic
//! seeding and machine-readable outputs.
//!
//! Global flags: `--config` (TOML file, or a previous run's `manifest.json`
//! to replay it), `--seed`, `--out`, `--threads`. Flags win over the config
//! file; the thread count falls back to the `FRACDENSITY_THREADS`
//! environment variable and then to the core count. Every run writes a
//! `manifest.json` with the fully-resolved configuration, its SHA-256, the
//! seed, versions, outputs and per-check verdicts.
//!
//! Exit codes: 0 when the run and all internal checks pass, 1 when a check
//! fails (results are still written), 2 on usage or configuration errors.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::config::Config;
use crate::control_ode::{
    control_ode_run, randomized_suite, ControlOdeRun, GridFn, TERMINAL_TOL,
};
use crate::error::{Error, Result};
use crate::fbm::UniformGrid;
use crate::harness::{build_oracle, mc_mse, mc_variance_scaling, variance_h_scaling, OracleDensity};
use crate::kernels::{kernel_moment, Kernel1D};
use crate::output::{
    cell_aggregates_csv, control_path_csv, oracle_csv, sample_rows_csv, trajectory_csv,
    write_text_atomic, CsvBuilder, CsvField, RunManifest,
};
use crate::rates::{
    alpha_dh, bandwidth, optimal_exponent, theoretical_mse_exponent,
    theoretical_mse_exponent_raw, variance_bound_exponents, RateRegime, RateVariant,
};
use crate::rng::{derive_seed, domains};
use crate::sde::{check_semi_contractive, euler_maruyama};
use crate::fbm::sample_fbm_path;

/// Environment variable supplying the default worker count.
pub const THREADS_ENV: &str = "FRACDENSITY_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "fracdensity",
    version,
    about = "Stationary-density estimation toolkit for SDEs driven by fractional Brownian motion"
)]
struct Cli {
    /// Configuration file (TOML), or a manifest.json from a previous run.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Base seed; overrides the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; overrides the config file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; overrides config and environment.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate SDE paths driven by fractional Brownian motion.
    Simulate,
    /// Verify kernel mass and vanishing moments by quadrature.
    KernelCheck {
        /// Kernel order (overrides estimator.kernel_order).
        #[arg(long = "M")]
        m: Option<usize>,
    },
    /// Probe the drift's declared contraction constants on random pairs.
    DriftCheck {
        /// Random pairs to test.
        #[arg(long, default_value_t = 2000)]
        pairs: usize,
    },
    /// Build and persist a long-run stationary density oracle.
    OracleBuild,
    /// Monte Carlo MSE decay along the horizon grid, against an oracle.
    MseRates,
    /// Estimator variance against the horizon at fixed bandwidth.
    VarianceScaling,
    /// Estimator variance against the bandwidth at fixed horizon.
    VarianceH,
    /// Gap-steering control ODE: showcase run plus randomized suite.
    ControlOde,
    /// Print bandwidth rules and theoretical exponents as JSON.
    Rates {
        #[arg(long = "H")]
        hurst: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        variant: Option<String>,
        #[arg(long)]
        eps: Option<f64>,
    },
}

fn subcommand_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Simulate => "simulate",
        Command::KernelCheck { .. } => "kernel-check",
        Command::DriftCheck { .. } => "drift-check",
        Command::OracleBuild => "oracle-build",
        Command::MseRates => "mse-rates",
        Command::VarianceScaling => "variance-scaling",
        Command::VarianceH => "variance-h",
        Command::ControlOde => "control-ode",
        Command::Rates { .. } => "rates",
    }
}

/// Loads the config file; a JSON manifest is recognized and replayed via its
/// embedded resolved configuration (hash-checked).
fn load_config(path: &Option<PathBuf>) -> Result<Config> {
    let Some(path) = path else { return Ok(Config::default()) };
    let text = std::fs::read_to_string(path)?;
    if text.trim_start().starts_with('{') {
        RunManifest::load(path)?.config()
    } else {
        Config::from_toml_str(&text)
    }
}

/// Subcommand-specific flags fold into the config so the manifest captures
/// them and replay reproduces the run.
fn apply_overrides(cmd: &Command, config: &mut Config) {
    match cmd {
        Command::KernelCheck { m: Some(m) } => config.estimator.kernel_order = *m,
        Command::Rates { hurst, beta, d, variant, eps } => {
            if let Some(h) = hurst {
                config.noise.hurst = *h;
            }
            if let Some(b) = beta {
                config.bandwidth.beta = *b;
            }
            if let Some(d) = d {
                config.drift.dim = *d;
            }
            if let Some(v) = variant {
                config.bandwidth.variant = v.clone();
            }
            if let Some(e) = eps {
                config.bandwidth.eps = *e;
            }
        }
        _ => {}
    }
}

fn resolve_threads(config: &Config) -> Option<usize> {
    config.experiment.threads.or_else(|| {
        std::env::var(THREADS_ENV).ok().and_then(|s| s.parse().ok())
    })
}

fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Config(_)
        | Error::InvalidParameter { .. }
        | Error::UnknownDrift(_)
        | Error::InvalidRegime(_)
        | Error::Io(_)
        | Error::Json(_) => 2,
        _ => 1,
    }
}

/// Parses the process arguments and runs; returns the process exit code.
pub fn run() -> i32 {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .try_init()
        .ok();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            exit_code_for(&err)
        }
    }
}

fn execute(cli: Cli) -> Result<i32> {
    let mut config = load_config(&cli.config)?;
    if let Some(seed) = cli.seed {
        config.experiment.seed = seed;
    }
    if let Some(out) = &cli.out {
        config.experiment.out = Some(out.display().to_string());
    }
    if let Some(threads) = cli.threads {
        config.experiment.threads = Some(threads);
    }
    apply_overrides(&cli.command, &mut config);

    let out_dir = PathBuf::from(config.experiment.out.clone().unwrap_or_else(|| ".".into()));
    std::fs::create_dir_all(&out_dir)?;
    let seed = config.experiment.seed;
    let mut manifest = RunManifest::new(subcommand_name(&cli.command), &config, seed)?;

    let outcome = match resolve_threads(&config) {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            pool.install(|| dispatch(&cli.command, &config, &out_dir, &mut manifest))
        }
        None => dispatch(&cli.command, &config, &out_dir, &mut manifest),
    };
    if let Err(err) = outcome {
        match exit_code_for(&err) {
            // Usage and configuration problems surface immediately; no
            // manifest is owed for a run that never started.
            2 => return Err(err),
            _ => manifest.record_check("run_completed", false, err.to_string()),
        }
    }
    let manifest = manifest.finalize_and_write(&out_dir.join("manifest.json"))?;
    for check in &manifest.checks {
        println!(
            "check {}: {} ({})",
            check.name,
            if check.pass { "pass" } else { "FAIL" },
            check.detail
        );
    }
    Ok(if manifest.all_passed() { 0 } else { 1 })
}

fn dispatch(
    cmd: &Command,
    config: &Config,
    out: &Path,
    manifest: &mut RunManifest,
) -> Result<()> {
    match cmd {
        Command::Simulate => cmd_simulate(config, out, manifest),
        Command::KernelCheck { .. } => cmd_kernel_check(config, out, manifest),
        Command::DriftCheck { pairs } => cmd_drift_check(config, out, manifest, *pairs),
        Command::OracleBuild => cmd_oracle_build(config, out, manifest),
        Command::MseRates => cmd_mse_rates(config, out, manifest),
        Command::VarianceScaling => cmd_variance_scaling(config, out, manifest),
        Command::VarianceH => cmd_variance_h(config, out, manifest),
        Command::ControlOde => cmd_control_ode(config, out, manifest),
        Command::Rates { .. } => cmd_rates(config, out, manifest),
    }
}

fn write_output(
    out: &Path,
    manifest: &mut RunManifest,
    name: &str,
    content: &str,
) -> Result<()> {
    write_text_atomic(&out.join(name), content)?;
    manifest.record_output(name);
    Ok(())
}

fn cmd_simulate(config: &Config, out: &Path, manifest: &mut RunManifest) -> Result<()> {
    let drift = config.drift_spec()?;
    let sigma = config.sigma()?;
    let hurst = config.hurst()?;
    let sim = &config.simulate;
    if !(sim.t_end > 0.0 && sim.dt > 0.0) {
        return Err(Error::Config("simulate.t_end and simulate.dt must be positive".into()));
    }
    let n = (sim.t_end / sim.dt).round().max(1.0) as usize;
    let grid = UniformGrid::over(sim.t_end, n)?;
    let x0 = vec![0.0; drift.dim];
    let mut final_states = Vec::new();
    for p in 0..sim.paths {
        let seed = derive_seed(manifest.base_seed, domains::EXPERIMENT, p as u64);
        let noise = sample_fbm_path(hurst, grid, drift.dim, seed)?;
        let traj = euler_maruyama(&drift, &sigma, &noise, &x0)?;
        write_output(out, manifest, &format!("trajectory_{p}.csv"), &trajectory_csv(&traj))?;
        if sim.emit_noise {
            let mut header: Vec<String> = vec!["t".into()];
            for c in 1..=drift.dim {
                header.push(format!("db{c}"));
            }
            let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
            let mut csv = CsvBuilder::new(&header_refs);
            for k in 0..grid.num_steps() {
                let mut fields = vec![CsvField::F(grid.time(k))];
                fields.extend(noise.increment(k).iter().map(|&v| CsvField::F(v)));
                csv.row(&fields);
            }
            write_output(out, manifest, &format!("noise_{p}.csv"), &csv.finish())?;
        }
        final_states.push(traj.state(traj.grid().num_steps()).to_vec());
    }
    let summary = serde_json::json!({
        "paths": sim.paths,
        "t_end": sim.t_end,
        "dt": grid.dt(),
        "hurst": hurst.value(),
        "final_states": final_states,
    });
    write_output(out, manifest, "simulate_summary.json", &pretty(&summary)?)?;
    manifest.record_check("finite_paths", true, format!("{} path(s) completed", sim.paths));
    Ok(())
}

fn cmd_kernel_check(config: &Config, out: &Path, manifest: &mut RunManifest) -> Result<()> {
    let order = config.estimator.kernel_order;
    let kernel = Kernel1D::legendre(order);
    let mut csv = CsvBuilder::new(&["i", "moment", "deviation"]);
    let mut max_dev = 0.0f64;
    let mut moments = Vec::new();
    for i in 0..=order {
        let m = kernel_moment(&kernel, i, 64)?;
        let target = if i == 0 { 1.0 } else { 0.0 };
        let dev = (m - target).abs();
        max_dev = max_dev.max(dev);
        moments.push(m);
        csv.row(&[CsvField::I(i as u64), CsvField::F(m), CsvField::F(dev)]);
    }
    write_output(out, manifest, "kernel_moments.csv", &csv.finish())?;
    let pass = max_dev < 1e-10;
    let summary = serde_json::json!({
        "order": order,
        "moments": moments,
        "max_abs_deviation": max_dev,
        "tolerance": 1e-10,
        "pass": pass,
    });
    write_output(out, manifest, "kernel_check.json", &pretty(&summary)?)?;
    manifest.record_check("kernel_moments", pass, format!("max deviation {max_dev:.3e}"));
    Ok(())
}

fn cmd_drift_check(
    config: &Config,
    out: &Path,
    manifest: &mut RunManifest,
    pairs: usize,
) -> Result<()> {
    let drift = config.drift_spec()?;
    let report = check_semi_contractive(&drift, pairs, manifest.base_seed);
    let pass = report.violations == 0;
    let summary = serde_json::json!({
        "drift": config.drift.name,
        "dim": drift.dim,
        "kappa": drift.kappa,
        "big_r": drift.big_r,
        "lambda": drift.lambda,
        "lip": drift.lip,
        "pairs": report.pairs,
        "violations": report.violations,
        "worst_margin": report.worst_margin,
        "pass": pass,
    });
    write_output(out, manifest, "drift_check.json", &pretty(&summary)?)?;
    manifest.record_check(
        "semi_contractivity",
        pass,
        format!("{} violations in {} pairs (worst margin {:.3e})", report.violations, report.pairs, report.worst_margin),
    );
    Ok(())
}

/// Builds the oracle from the config (shared by `oracle-build` and
/// `mse-rates`).
fn build_configured_oracle(config: &Config) -> Result<OracleDensity> {
    let drift = config.drift_spec()?;
    let sigma = config.sigma()?;
    let hurst = config.hurst()?;
    let max_t = config.grid.t_grid.iter().copied().fold(0.0, f64::max);
    let budget = config.oracle_budget(max_t);
    build_oracle(&drift, &sigma, hurst, budget, max_t, config.experiment.seed)
}

fn cmd_oracle_build(config: &Config, out: &Path, manifest: &mut RunManifest) -> Result<()> {
    let oracle = build_configured_oracle(config)?;
    if let Some(csv) = oracle_csv(&oracle) {
        write_output(out, manifest, "oracle.csv", &csv)?;
    }
    let summary = serde_json::json!({
        "provenance": oracle.provenance(),
        "gaussian_fit": oracle.gaussian_fit(),
    });
    write_output(out, manifest, "oracle_summary.json", &pretty(&summary)?)?;
    manifest.record_check("oracle_built", true, "split-half agreement within tolerance");

    // At the Brownian point with a linear drift the stationary law is the
    // classical Gaussian; cross-check the empirical oracle against it.
    if config.noise.hurst == 0.5 && config.drift.name == "fou" {
        if let (Some(scalar), kappa) =
            (config.sigma.scalar.or(Some(1.0)), config.drift.params.first().copied().unwrap_or(1.0))
        {
            let reference = OracleDensity::closed_form_ou(kappa, scalar, 1)?;
            let peak = reference.eval(&[0.0]);
            let mut worst = 0.0f64;
            let mut x = -2.0;
            while x <= 2.0 {
                worst = worst.max((oracle.eval(&[x]) - reference.eval(&[x])).abs());
                x += 0.05;
            }
            let pass = worst <= 0.02 * peak;
            manifest.record_check(
                "closed_form_cross_check",
                pass,
                format!("sup deviation {worst:.4} vs 2% of peak {peak:.4}"),
            );
        }
    }
    Ok(())
}

fn cmd_mse_rates(config: &Config, out: &Path, manifest: &mut RunManifest) -> Result<()> {
    let exp = config.mse_experiment()?;
    let oracle = build_configured_oracle(config)?;
    let result = mc_mse(&exp, &oracle, manifest.base_seed)?;
    write_output(out, manifest, "mse_samples.csv", &sample_rows_csv(&result.rows, exp.drift.dim))?;
    write_output(
        out,
        manifest,
        "mse_cells.csv",
        &cell_aggregates_csv(&result.cells, &exp.query_points),
    )?;

    // One-sided slope check when the bandwidth rule pins a theoretical
    // exponent; explicit bandwidths only report.
    let mut expected_exponent = None;
    if let crate::harness::BandwidthSource::Rule { variant, eps } = &exp.bandwidth {
        let regime = RateRegime::new(*variant, exp.hurst, exp.beta_assumed, exp.drift.dim, *eps)?;
        let e = theoretical_mse_exponent(&regime)?;
        expected_exponent = Some(e);
        let slope = result.slopes[0].fit.slope;
        let pass = slope <= -e + 0.2;
        manifest.record_check(
            "mse_slope_upper_bound",
            pass,
            format!("fitted {slope:.4} vs bound {:.4} + 0.2 slack", -e),
        );
    }

    // Strict decrease allowing one soft inversion within one combined
    // Monte Carlo standard error.
    let mses: Vec<(f64, f64)> = result
        .cells
        .iter()
        .filter(|c| !c.aborted)
        .map(|c| (c.mse.as_ref().expect("oracle run has MSE")[0], c.mse_stderr.as_ref().unwrap()[0]))
        .collect();
    let mut soft = 0usize;
    let mut hard = 0usize;
    for w in mses.windows(2) {
        let (m0, s0) = w[0];
        let (m1, s1) = w[1];
        if m1 >= m0 {
            soft += 1;
            if m1 - m0 > (s0 * s0 + s1 * s1).sqrt() {
                hard += 1;
            }
        }
    }
    let mono_pass = hard == 0 && soft <= 1;
    manifest.record_check(
        "mse_monotone_decreasing",
        mono_pass,
        format!("{soft} soft / {hard} hard inversions across {} cells", mses.len()),
    );

    let summary = serde_json::json!({
        "slopes": result.slopes,
        "expected_exponent": expected_exponent,
        "cells": result.cells,
        "oracle_provenance": oracle.provenance(),
        "base_seed": result.base_seed,
    });
    write_output(out, manifest, "mse_summary.json", &pretty(&summary)?)?;
    Ok(())
}

fn cmd_variance_scaling(config: &Config, out: &Path, manifest: &mut RunManifest) -> Result<()> {
    let exp = config.variance_scaling_experiment()?;
    let result = mc_variance_scaling(&exp, manifest.base_seed)?;
    write_output(
        out,
        manifest,
        "variance_samples.csv",
        &sample_rows_csv(&result.rows, exp.drift.dim),
    )?;
    write_output(
        out,
        manifest,
        "variance_cells.csv",
        &cell_aggregates_csv(&result.cells, &exp.query_points),
    )?;
    let slope = result.slopes[0].fit.slope;
    let hv = exp.hurst.value();
    if hv < 0.5 {
        let pass = (-1.25..=-0.75).contains(&slope);
        manifest.record_check(
            "variance_t_slope",
            pass,
            format!("fitted {slope:.4}, predicted -1 within [-1.25, -0.75]"),
        );
    } else if hv > 0.5 {
        let predicted = 2.0 * hv - 2.0;
        let pass = slope >= -1.0 && (slope - predicted).abs() <= 0.25;
        manifest.record_check(
            "variance_t_slope",
            pass,
            format!("fitted {slope:.4}, predicted {predicted:.2} within 0.25 and >= -1"),
        );
    } else {
        manifest.record_check(
            "variance_t_slope",
            (-1.25..=-0.75).contains(&slope),
            format!("fitted {slope:.4} at the Brownian point (classical -1 expected)"),
        );
    }
    let summary = serde_json::json!({
        "slopes": result.slopes,
        "h": exp.h,
        "hurst": hv,
        "cells": result.cells,
        "base_seed": result.base_seed,
    });
    write_output(out, manifest, "variance_summary.json", &pretty(&summary)?)?;
    Ok(())
}

fn cmd_variance_h(config: &Config, out: &Path, manifest: &mut RunManifest) -> Result<()> {
    let exp = config.variance_bandwidth_experiment()?;
    let scaling = variance_h_scaling(&exp, manifest.base_seed)?;
    write_output(
        out,
        manifest,
        "variance_h_samples.csv",
        &sample_rows_csv(&scaling.result.rows, exp.drift.dim),
    )?;
    write_output(
        out,
        manifest,
        "variance_h_cells.csv",
        &cell_aggregates_csv(&scaling.result.cells, &exp.query_points),
    )?;
    if scaling.degenerate {
        manifest.record_check(
            "bandwidth_grid",
            true,
            "degenerate bandwidth grid flagged; no slope fitted",
        );
    } else if let (Some(fit), Some(binding)) =
        (&scaling.normalized_slopes[0], scaling.predicted_binding_exp)
    {
        // T is a knob, not an assumption: the normalized slope is reported
        // against the refined bracket's small-h exponent with generous slack.
        let pass = fit.slope >= binding - 0.5;
        manifest.record_check(
            "normalized_variance_h_slope",
            pass,
            format!("fitted {:.4} vs binding exponent {binding:.4} - 0.5 slack", fit.slope),
        );
    } else {
        manifest.record_check(
            "normalized_variance_h_slope",
            true,
            "no binding exponent for H >= 1/2; slope reported only",
        );
    }
    let summary = serde_json::json!({
        "t": exp.t,
        "h_grid": exp.h_grid,
        "degenerate": scaling.degenerate,
        "normalized_slopes": scaling.normalized_slopes,
        "predicted_binding_exp": scaling.predicted_binding_exp,
        "cells": scaling.result.cells,
    });
    write_output(out, manifest, "variance_h_summary.json", &pretty(&summary)?)?;
    Ok(())
}

fn cmd_control_ode(config: &Config, out: &Path, manifest: &mut RunManifest) -> Result<()> {
    let section = &config.control_ode;
    let drift = config.drift_spec()?;
    if section.rho0.len() != drift.dim {
        return Err(Error::Config(format!(
            "control_ode.rho0 has length {}, drift dimension is {}",
            section.rho0.len(),
            drift.dim
        )));
    }
    let steps = section.steps;
    let amp = section.perturbation_amplitude;
    let dim = drift.dim;
    let showcase = ControlOdeRun {
        drift,
        rho0: section.rho0.clone(),
        background: GridFn::zero(dim, steps),
        perturbation_rate: GridFn::sample(dim, steps, |t| {
            let mut v = vec![0.0; dim];
            v[0] = amp * std::f64::consts::TAU * (std::f64::consts::TAU * t).cos();
            v
        }),
        steps,
    };
    let path = control_ode_run(&showcase)?;
    write_output(out, manifest, "control_path.csv", &control_path_csv(&path))?;

    let stats = randomized_suite(section.runs, steps, manifest.base_seed)?;
    let dt = 1.0 / steps as f64;
    let worst_terminal = stats.iter().map(|s| s.rho_final).fold(0.0f64, f64::max);
    let worst_excess = stats.iter().map(|s| s.max_envelope_excess).fold(f64::NEG_INFINITY, f64::max);
    let all_extinct = worst_terminal < TERMINAL_TOL;
    let envelope_ok = worst_excess <= 10.0 * dt;
    manifest.record_check(
        "terminal_extinction",
        all_extinct,
        format!("worst terminal gap {worst_terminal:.3e} over {} runs", stats.len()),
    );
    manifest.record_check(
        "decay_envelope",
        envelope_ok,
        format!("worst envelope excess {worst_excess:.3e} vs tolerance {:.3e}", 10.0 * dt),
    );
    let ratio = |s: &crate::control_ode::SuiteRunStat| s.sup_phi / (s.rho0_norm + s.sdot_sup);
    let even = stats.iter().step_by(2).map(ratio).fold(0.0f64, f64::max);
    let odd = stats.iter().skip(1).step_by(2).map(ratio).fold(0.0f64, f64::max);
    let spread = if even > 0.0 && odd > 0.0 { even.max(odd) / even.min(odd) } else { f64::INFINITY };
    manifest.record_check(
        "control_bound_stable",
        spread < 2.0,
        format!("fitted constant split-halves ratio {spread:.3}"),
    );
    let summary = serde_json::json!({
        "showcase": path,
        "runs": stats.len(),
        "worst_terminal_gap": worst_terminal,
        "worst_envelope_excess": worst_excess,
        "envelope_tolerance": 10.0 * dt,
        "fitted_constant": even.max(odd),
    });
    write_output(out, manifest, "control_summary.json", &pretty(&summary)?)?;
    Ok(())
}

fn cmd_rates(config: &Config, out: &Path, manifest: &mut RunManifest) -> Result<()> {
    let hurst = config.hurst()?;
    let variant: RateVariant = config.bandwidth.variant.parse()?;
    let regime = RateRegime::new(
        variant,
        hurst,
        config.bandwidth.beta,
        config.drift.dim,
        config.bandwidth.eps,
    )?;
    let a = optimal_exponent(&regime)?;
    let alpha = if hurst.value() < 0.5 { Some(alpha_dh(regime.d, hurst)?) } else { None };
    let table: Vec<serde_json::Value> = config
        .grid
        .t_grid
        .iter()
        .map(|&t| serde_json::json!({ "T": t, "h": bandwidth(t, a) }))
        .collect();
    let largest_t = config.grid.t_grid.iter().copied().fold(f64::NAN, f64::max);
    let variance = variance_bound_exponents(
        hurst,
        regime.d,
        if largest_t.is_nan() { 0.5 } else { bandwidth(largest_t, a) },
        regime.eps,
    )?;
    let summary = serde_json::json!({
        "variant": variant,
        "hurst": hurst.value(),
        "beta": regime.beta,
        "d": regime.d,
        "eps": regime.eps,
        "alpha": alpha,
        "a": a,
        "mse_exponent": theoretical_mse_exponent(&regime)?,
        "mse_exponent_raw": theoretical_mse_exponent_raw(&regime)?,
        "variance_exponents": variance,
        "bandwidth_table": table,
    });
    let text = pretty(&summary)?;
    print!("{text}");
    write_output(out, manifest, "rates.json", &text)?;
    manifest.record_check("rates_computed", true, format!("a = {a:.6}"));
    Ok(())
}

fn pretty<T: serde::Serialize>(value: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}
