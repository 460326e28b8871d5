//! Prints the bandwidth rules and the theoretical rate exponents behind
//! them: the basic rule balances bias against the T^{-1} h^{-2d} variance
//! term, the improved rule (rough noise only) exploits the refined variance
//! bracket with exponent alpha_{d,H}.

use fracdensity::fbm::HurstParameter;
use fracdensity::rates::{
    alpha_dh, bandwidth, optimal_exponent, theoretical_mse_exponent_raw, RateRegime, RateVariant,
};

fn main() -> fracdensity::Result<()> {
    let beta = 2.0;
    let d = 1;
    println!("beta = {beta}, d = {d}\n");
    println!(
        "{:>5}  {:>9}  {:>9}  {:>10}  {:>10}  {:>8}",
        "H", "a(basic)", "a(impr.)", "mse(basic)", "mse(impr.)", "alpha"
    );
    for hv in [0.1, 0.25, 0.4, 0.6, 0.75] {
        let h = HurstParameter::new(hv)?;
        let basic = RateRegime::new(RateVariant::Basic, h, beta, d, 0.01)?;
        let a_basic = optimal_exponent(&basic)?;
        let m_basic = theoretical_mse_exponent_raw(&basic)?;
        let (a_impr, m_impr, alpha) = if hv < 0.5 {
            let improved = RateRegime::new(RateVariant::Improved, h, beta, d, 0.01)?;
            (
                format!("{:.4}", optimal_exponent(&improved)?),
                format!("{:.4}", theoretical_mse_exponent_raw(&improved)?),
                format!("{:.4}", alpha_dh(d, h)?),
            )
        } else {
            // The refined bracket needs H < 1/2; above it the basic rule is
            // the only one on offer.
            ("-".into(), "-".into(), "-".into())
        };
        println!("{hv:>5}  {a_basic:>9.4}  {a_impr:>9}  {m_basic:>10.4}  {m_impr:>10}  {alpha:>8}");
    }

    println!("\nbandwidth schedule h = T^-a (basic rule, H = 0.25):");
    let regime = RateRegime::new(RateVariant::Basic, HurstParameter::new(0.25)?, beta, d, 0.01)?;
    let a = optimal_exponent(&regime)?;
    for p in [6u32, 7, 8, 9, 10, 11] {
        let t = f64::from(1u32 << p);
        println!("  T = 2^{p:<2} -> h = {:.4}", bandwidth(t, a));
    }
    Ok(())
}
