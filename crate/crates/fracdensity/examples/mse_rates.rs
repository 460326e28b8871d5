//! Monte Carlo MSE of the stationary-density estimator along the basic
//! bandwidth rule h = T^{-a}, against an independent long-run oracle. The
//! fitted decay slope is compared with the theoretical exponent
//! beta/(beta + d).

use fracdensity::fbm::HurstParameter;
use fracdensity::harness::{
    build_oracle, mc_mse, BandwidthSource, MseExperiment, OracleBudget,
};
use fracdensity::rates::{theoretical_mse_exponent_raw, RateRegime, RateVariant};
use fracdensity::sde::{DiffusionMatrix, DriftSpec};

fn main() -> fracdensity::Result<()> {
    let drift = DriftSpec::fou(1.0, 1)?;
    let sigma = DiffusionMatrix::identity(1);
    let hurst = HurstParameter::new(0.25)?;
    let exp = MseExperiment {
        drift: drift.clone(),
        sigma: sigma.clone(),
        hurst,
        t_grid: vec![64.0, 128.0, 256.0, 512.0],
        replicates: 30,
        kernel_order: 2,
        beta_assumed: 2.0,
        bandwidth: BandwidthSource::Rule { variant: RateVariant::Basic, eps: 0.01 },
        query_points: vec![vec![0.0]],
        dt: None,
        burn_in: None,
    };

    let max_t = 512.0;
    let budget = OracleBudget { t_oracle: 20.0 * max_t, ..OracleBudget::standard(20.0 * max_t) };
    let oracle = build_oracle(&drift, &sigma, hurst, budget, max_t, 17)?;
    let result = mc_mse(&exp, &oracle, 17)?;

    println!("{:>6}  {:>8}  {:>14}  {:>14}", "T", "h", "MSE", "stderr");
    for cell in &result.cells {
        println!(
            "{:>6}  {:>8.4}  {:>14.6e}  {:>14.6e}",
            cell.t,
            cell.h,
            cell.mse.as_ref().unwrap()[0],
            cell.mse_stderr.as_ref().unwrap()[0]
        );
    }
    let regime = RateRegime::new(RateVariant::Basic, hurst, 2.0, 1, 0.01)?;
    println!(
        "\nfitted MSE slope {:.3} (theoretical guarantee: at most -{:.3})",
        result.slopes[0].fit.slope,
        theoretical_mse_exponent_raw(&regime)?
    );
    Ok(())
}
