//! Bandwidth rules, variance-bound exponents and MSE rate exponents.
//!
//! Two regimes are implemented for the estimator of a beta-smooth stationary
//! density in dimension d driven by noise with Hurst parameter H:
//!
//! * **basic** — variance bound `T^{-1} h^{-2d}` (H < 1/2) or
//!   `T^{2H-2+eps} h^{-2d}` (H > 1/2), giving bandwidth exponents
//!   `a = 1/(2 beta + 2d)` resp. `a = (1-H)/(beta+d) - eps` and MSE
//!   exponents `beta/(beta+d)` resp. `2 beta (1-H)/(beta+d) - eps`;
//! * **improved** (H < 1/2 only) — the sharper variance bracket
//!   `(h^{-2d}/T) max(h^{1/H}, h^{2d(3-2H)/(5-2H)}, T^{2H-1+eps})`, giving
//!   `a = min(1/(2 beta + alpha_{d,H}), (1-H-eps)/(beta+d))` and MSE
//!   exponent `min(2 beta/(2 beta + alpha_{d,H}), 2 beta (1-H)/(beta+d)) - eps`
//!   with `alpha_{d,H} = max(2d - 1/H, 4d/(5-2H))`.
//!
//! All exponents are for rates written as `(1/T)^exponent` and bandwidths as
//! `h = T^{-a}`; epsilon is the usual arbitrarily-small slack and is
//! subtracted where the statements carry it. `H = 1/2` exactly is rejected:
//! both regimes are formulated off the Brownian point.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fbm::HurstParameter;

/// Which bound family the exponents come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RateVariant {
    Basic,
    Improved,
}

impl std::str::FromStr for RateVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "basic" => Ok(RateVariant::Basic),
            "improved" => Ok(RateVariant::Improved),
            other => Err(Error::InvalidRegime(format!("unknown variant `{other}`"))),
        }
    }
}

/// Full parameter set for rate computations.
#[derive(Debug, Clone, Copy)]
pub struct RateRegime {
    pub variant: RateVariant,
    pub hurst: HurstParameter,
    /// Smoothness order of the target density (>= 1).
    pub beta: f64,
    /// State dimension.
    pub d: usize,
    /// Slack epsilon in the statements that carry one.
    pub eps: f64,
}

impl RateRegime {
    pub fn new(variant: RateVariant, hurst: HurstParameter, beta: f64, d: usize, eps: f64) -> Result<Self> {
        if !(beta.is_finite() && beta >= 1.0) {
            return Err(Error::InvalidRegime(format!("beta must be >= 1, got {beta}")));
        }
        if d == 0 {
            return Err(Error::InvalidRegime("dimension must be positive".into()));
        }
        if !(eps.is_finite() && eps >= 0.0) {
            return Err(Error::InvalidRegime(format!("eps must be >= 0, got {eps}")));
        }
        if hurst.value() == 0.5 {
            return Err(Error::InvalidRegime(
                "H = 1/2 exactly is the Brownian case, outside both rate families".into(),
            ));
        }
        if variant == RateVariant::Improved && hurst.value() > 0.5 {
            return Err(Error::InvalidRegime(
                "the improved bracket only covers H < 1/2".into(),
            ));
        }
        Ok(RateRegime { variant, hurst, beta, d, eps })
    }
}

/// The auxiliary exponent `alpha_{d,H} = max(2d - 1/H, 4d/(5 - 2H))` of the
/// improved variance bracket; only defined for H < 1/2.
pub fn alpha_dh(d: usize, hurst: HurstParameter) -> Result<f64> {
    let h = hurst.value();
    if h >= 0.5 {
        return Err(Error::InvalidRegime(format!(
            "alpha_dh needs H < 1/2, got {h}"
        )));
    }
    let d = d as f64;
    Ok((2.0 * d - 1.0 / h).max(4.0 * d / (5.0 - 2.0 * h)))
}

/// Bandwidth exponent `a` of the rate-optimal schedule `h(T) = T^{-a}`.
pub fn optimal_exponent(regime: &RateRegime) -> Result<f64> {
    let h = regime.hurst.value();
    let beta = regime.beta;
    let d = regime.d as f64;
    match regime.variant {
        RateVariant::Basic => {
            if h < 0.5 {
                Ok(1.0 / (2.0 * beta + 2.0 * d))
            } else {
                // The statement subtracts eps from the bandwidth exponent.
                Ok((1.0 - h) / (beta + d) - regime.eps)
            }
        }
        RateVariant::Improved => {
            let alpha = alpha_dh(regime.d, regime.hurst)?;
            Ok((1.0 / (2.0 * beta + alpha)).min((1.0 - h - regime.eps) / (beta + d)))
        }
    }
}

/// Predicted MSE decay exponent: MSE <= C (1/T)^exponent along the
/// rate-optimal bandwidth schedule.
pub fn theoretical_mse_exponent(regime: &RateRegime) -> Result<f64> {
    let h = regime.hurst.value();
    let beta = regime.beta;
    let d = regime.d as f64;
    match regime.variant {
        RateVariant::Basic => {
            if h < 0.5 {
                Ok(beta / (beta + d))
            } else {
                Ok(2.0 * beta * (1.0 - h) / (beta + d) - regime.eps)
            }
        }
        RateVariant::Improved => {
            let alpha = alpha_dh(regime.d, regime.hurst)?;
            let first = 2.0 * beta / (2.0 * beta + alpha);
            let second = 2.0 * beta * (1.0 - h) / (beta + d);
            Ok(first.min(second) - regime.eps)
        }
    }
}

/// MSE exponent before the eps slack is applied (reported alongside the
/// operational value).
pub fn theoretical_mse_exponent_raw(regime: &RateRegime) -> Result<f64> {
    let no_eps = RateRegime { eps: 0.0, ..*regime };
    theoretical_mse_exponent(&no_eps)
}

/// Bandwidth schedule `h = T^{-a}`; warns when the result leaves the
/// analyzed regime `h < 1` (i.e. `T <= 1`).
pub fn bandwidth(t: f64, a: f64) -> f64 {
    let h = t.powf(-a);
    if h >= 1.0 {
        log::warn!("bandwidth rule produced h = {h} >= 1 at T = {t}");
    }
    h
}

/// T- and h-exponents of the variance bounds, plus the evaluated improved
/// bracket at a given bandwidth, so experiments can scale measurements.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct VarianceBoundExponents {
    /// Exponent of T in the basic bound (`-1` for H < 1/2, `2H-2+eps` above).
    pub basic_t_exp: f64,
    /// Exponent of h in both bounds (`-2d`).
    pub basic_h_exp: f64,
    /// Improved-bracket terms, present only for H < 1/2.
    pub improved: Option<ImprovedBracket>,
}

/// The three competing terms of the improved variance bracket
/// `(h^{-2d}/T) max(h^{1/H}, h^{2d(3-2H)/(5-2H)}, T^{2H-1+eps})`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ImprovedBracket {
    /// Exponent `1/H` of the roughness term.
    pub h_exp_rough: f64,
    /// Exponent `2d(3-2H)/(5-2H)` of the mixing term.
    pub h_exp_mixing: f64,
    /// Exponent `2H-1+eps` of the T tail term.
    pub t_exp_tail: f64,
    /// The h-exponent that binds for small h: `min` of the two h-exponents.
    pub binding_h_exp: f64,
    /// `h^{1/H}` at the supplied bandwidth.
    pub rough_term: f64,
    /// `h^{2d(3-2H)/(5-2H)}` at the supplied bandwidth.
    pub mixing_term: f64,
}

/// Computes the exponent record at Hurst `hurst`, dimension `d`, bandwidth
/// `h` and slack `eps`.
pub fn variance_bound_exponents(
    hurst: HurstParameter,
    d: usize,
    h: f64,
    eps: f64,
) -> Result<VarianceBoundExponents> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::invalid("h", format!("bandwidth must be positive, got {h}")));
    }
    let hv = hurst.value();
    let basic_h_exp = -2.0 * d as f64;
    if hv == 0.5 {
        return Err(Error::InvalidRegime("H = 1/2 exactly has no fractional bound".into()));
    }
    if hv > 0.5 {
        return Ok(VarianceBoundExponents {
            basic_t_exp: 2.0 * hv - 2.0 + eps,
            basic_h_exp,
            improved: None,
        });
    }
    let h_exp_rough = 1.0 / hv;
    let h_exp_mixing = 2.0 * d as f64 * (3.0 - 2.0 * hv) / (5.0 - 2.0 * hv);
    Ok(VarianceBoundExponents {
        basic_t_exp: -1.0,
        basic_h_exp,
        improved: Some(ImprovedBracket {
            h_exp_rough,
            h_exp_mixing,
            t_exp_tail: 2.0 * hv - 1.0 + eps,
            binding_h_exp: h_exp_rough.min(h_exp_mixing),
            rough_term: h.powf(h_exp_rough),
            mixing_term: h.powf(h_exp_mixing),
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn h(v: f64) -> HurstParameter {
        HurstParameter::new(v).unwrap()
    }

    fn regime(variant: RateVariant, hv: f64, beta: f64, d: usize, eps: f64) -> RateRegime {
        RateRegime::new(variant, h(hv), beta, d, eps).unwrap()
    }

    #[test]
    fn alpha_reference_values() {
        assert_relative_eq!(alpha_dh(1, h(0.25)).unwrap(), 8.0 / 9.0, max_relative = 1e-15);
        assert_relative_eq!(alpha_dh(3, h(0.4)).unwrap(), 3.5, max_relative = 1e-15);
        assert!(alpha_dh(1, h(0.5)).is_err());
        assert!(alpha_dh(1, h(0.75)).is_err());
    }

    #[test]
    fn alpha_continuous_at_the_crossover() {
        // The branches 2d - 1/H and 4d/(5-2H) cross inside (0, 1/2) only
        // for d = 3 (at H ~ 0.3063). A max of Lipschitz functions inherits
        // the larger constant, so successive sweep values can differ by at
        // most the steeper local slope times the step; anything above that
        // is a genuine jump.
        let step = 0.001;
        for d in 1..=3 {
            let mut prev: Option<f64> = None;
            for i in 1..500 {
                let hv = i as f64 * step;
                let a = alpha_dh(d, h(hv)).unwrap();
                if let Some(p) = prev {
                    let h_lo = hv - step;
                    let slope = (1.0 / (h_lo * h_lo))
                        .max(8.0 * d as f64 / ((5.0 - 2.0 * hv) * (5.0 - 2.0 * hv)));
                    assert!(
                        (a - p).abs() <= 1.05 * slope * step + 1e-12,
                        "jump at H={hv} d={d}: {p} -> {a}"
                    );
                }
                prev = Some(a);
            }
        }
    }

    #[test]
    fn optimal_exponent_reference_values() {
        // Basic, H < 1/2: 1/(2 beta + 2 d).
        let r = regime(RateVariant::Basic, 0.25, 2.0, 1, 0.0);
        assert_relative_eq!(optimal_exponent(&r).unwrap(), 1.0 / 6.0, max_relative = 1e-15);
        // Basic, H = 3/4: (1-H)/(beta+d) - eps.
        let r = regime(RateVariant::Basic, 0.75, 2.0, 1, 0.01);
        assert_relative_eq!(optimal_exponent(&r).unwrap(), 0.25 / 3.0 - 0.01, max_relative = 1e-12);
        // Improved, H = 1/4: min(1/(2 beta + alpha), (1-H-eps)/(beta+d)) = 9/44.
        let r = regime(RateVariant::Improved, 0.25, 2.0, 1, 0.01);
        assert_relative_eq!(optimal_exponent(&r).unwrap(), 9.0 / 44.0, max_relative = 1e-14);
    }

    #[test]
    fn mse_exponent_reference_values() {
        let r = regime(RateVariant::Basic, 0.25, 2.0, 1, 0.0);
        assert_relative_eq!(theoretical_mse_exponent(&r).unwrap(), 2.0 / 3.0, max_relative = 1e-15);
        let r = regime(RateVariant::Basic, 0.75, 2.0, 1, 0.01);
        assert_relative_eq!(theoretical_mse_exponent(&r).unwrap(), 0.5 / 1.5 - 0.01, max_relative = 1e-12);
        let r = regime(RateVariant::Improved, 0.25, 2.0, 1, 0.01);
        assert_relative_eq!(
            theoretical_mse_exponent_raw(&r).unwrap(),
            4.0 / (4.0 + 8.0 / 9.0),
            max_relative = 1e-14
        );
    }

    #[test]
    fn mse_exponent_small_h_limit() {
        // As H -> 0+ the improved exponent approaches
        // min(5 beta/(5 beta + 2d), 2 beta/(beta + d)) - eps.
        let eps = 0.01;
        for (beta, d) in [(2.0, 1usize), (1.0, 2), (3.0, 3)] {
            let r = regime(RateVariant::Improved, 1e-4, beta, d, eps);
            let got = theoretical_mse_exponent(&r).unwrap();
            let df = d as f64;
            let want = (5.0 * beta / (5.0 * beta + 2.0 * df)).min(2.0 * beta / (beta + df)) - eps;
            assert_relative_eq!(got, want, epsilon = 2e-3);
        }
    }

    #[test]
    fn improved_dominates_basic_on_grid() {
        // The refined exponent beats the basic one across the parameter
        // grid (H bounded away from 1/2, where the eps slack would blur the
        // comparison).
        let eps = 0.01;
        let mut checked = 0;
        for hi in 0..20 {
            let hv = 0.05 + 0.4 * hi as f64 / 19.0; // H in [0.05, 0.45]
            for bi in 0..17 {
                let beta = 1.0 + 3.0 * bi as f64 / 16.0; // beta in [1, 4]
                for d in 1..=3 {
                    let basic = theoretical_mse_exponent(&regime(RateVariant::Basic, hv, beta, d, eps)).unwrap();
                    let improved =
                        theoretical_mse_exponent(&regime(RateVariant::Improved, hv, beta, d, eps)).unwrap();
                    assert!(
                        improved >= basic,
                        "H={hv} beta={beta} d={d}: improved {improved} < basic {basic}"
                    );
                    checked += 1;
                }
            }
        }
        assert!(checked >= 1000, "grid too small: {checked}");
    }

    #[test]
    fn half_is_rejected_everywhere() {
        assert!(RateRegime::new(RateVariant::Basic, h(0.5), 2.0, 1, 0.01).is_err());
        assert!(variance_bound_exponents(h(0.5), 1, 0.1, 0.01).is_err());
    }

    #[test]
    fn improved_variant_requires_rough_noise() {
        assert!(RateRegime::new(RateVariant::Improved, h(0.75), 2.0, 1, 0.01).is_err());
    }

    #[test]
    fn bandwidth_reference_values() {
        assert_relative_eq!(bandwidth(64.0, 1.0 / 6.0), 0.5, max_relative = 1e-14);
        assert_relative_eq!(
            bandwidth(1e6, 9.0 / 44.0),
            0.059_255_309_755_456_778_99,
            max_relative = 1e-12
        );
        // T = 1 leaves the regime; value still returned.
        assert_eq!(bandwidth(1.0, 0.25), 1.0);
    }

    #[test]
    fn variance_exponent_reference_values() {
        let e = variance_bound_exponents(h(0.25), 1, 0.1, 0.01).unwrap();
        assert_eq!(e.basic_t_exp, -1.0);
        assert_eq!(e.basic_h_exp, -2.0);
        let b = e.improved.unwrap();
        assert_relative_eq!(b.h_exp_rough, 4.0, max_relative = 1e-15);
        assert_relative_eq!(b.h_exp_mixing, 2.0 * 2.5 / 4.5, max_relative = 1e-15);
        assert_relative_eq!(b.t_exp_tail, -0.5 + 0.01, max_relative = 1e-12);
        assert_relative_eq!(b.rough_term, 1e-4, max_relative = 1e-12);
        assert_relative_eq!(b.mixing_term, 0.1f64.powf(10.0 / 9.0), max_relative = 1e-14);

        let e = variance_bound_exponents(h(0.75), 1, 0.1, 0.01).unwrap();
        assert_relative_eq!(e.basic_t_exp, -0.49, max_relative = 1e-12);
        assert!(e.improved.is_none());
    }

    #[test]
    fn binding_exponent_examples() {
        // d = 1: the mixing term binds for H = 0.25 (min(4, 10/9)), the
        // roughness term for very small H? At H = 0.1: min(10, 2*2.8/4.8).
        let b = variance_bound_exponents(h(0.25), 1, 0.1, 0.0).unwrap().improved.unwrap();
        assert_relative_eq!(b.binding_h_exp, 10.0 / 9.0, max_relative = 1e-14);
        let b = variance_bound_exponents(h(0.1), 1, 0.1, 0.0).unwrap().improved.unwrap();
        assert_relative_eq!(b.binding_h_exp, 7.0 / 6.0, max_relative = 1e-14);
    }
}
