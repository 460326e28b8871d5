//! Gamma function via the Lanczos approximation.
//!
//! Self-contained implementation used by the fractional-noise normalization
//! constants. The g = 7, n = 9 coefficient set keeps the relative error below
//! 1e-13 on the positive real axis, comfortably inside the 1e-12 budget the
//! tests enforce against a 50-digit reference table.

use std::f64::consts::PI;

const G: f64 = 7.0;
const COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Gamma function for real arguments (poles at non-positive integers return
/// NaN or +/-inf as the reflection formula dictates).
pub fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        // Reflection keeps the Lanczos sum on arguments >= 0.5.
        PI / ((PI * x).sin() * gamma(1.0 - x))
    } else {
        let x = x - 1.0;
        let mut acc = COEFFS[0];
        for (i, c) in COEFFS.iter().enumerate().skip(1) {
            acc += c / (x + i as f64);
        }
        let t = x + G + 0.5;
        (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// 50-digit reference values (truncated to f64 precision).
    const TABLE: [(f64, f64); 14] = [
        (0.05, 19.47008531125551286405),
        (0.10, 9.513507698668731836292),
        (0.20, 4.590843711998803053205),
        (0.35, 2.546146977212288027568),
        (0.50, 1.772453850905516027298),
        (0.65, 1.384795102026510002854),
        (0.75, 1.225416702465177645129),
        (0.80, 1.164229713725303373636),
        (1.00, 1.0),
        (1.25, 0.9064024770554770779827),
        (1.50, 0.8862269254527580136491),
        (1.60, 0.8935153492876902614366),
        (1.75, 0.9190625268488832338468),
        (1.90, 0.9617658319073874194076),
    ];

    #[test]
    fn matches_reference_table_to_1e12() {
        for &(x, want) in &TABLE {
            let got = gamma(x);
            let rel = ((got - want) / want).abs();
            assert!(rel <= 1e-12, "gamma({x}) = {got}, want {want}, rel err {rel:.2e}");
        }
    }

    #[test]
    fn integer_values_and_recurrence() {
        assert!((gamma(1.0) - 1.0).abs() < 1e-14);
        assert!((gamma(5.0) - 24.0).abs() < 24.0 * 1e-13);
        for &x in &[0.1, 0.3, 0.7, 1.1, 1.6] {
            let rel = ((gamma(x + 1.0) - x * gamma(x)) / gamma(x + 1.0)).abs();
            assert!(rel < 1e-12, "recurrence fails at {x}: {rel:.2e}");
        }
    }
}
