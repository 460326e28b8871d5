//! Time-average kernel density estimation of the stationary law.
//!
//! Given a trajectory `(X_t)_{t in [0,T]}` and bandwidth `h`, the estimator
//! at a point `x` is
//!
//! ```text
//! pi_hat(x) = (1/T) int_0^T h^{-d} prod_i K((x_i - X_u,i) / h) du,
//! ```
//!
//! computed by the trapezoid rule on the simulation grid. Its mean under
//! stationarity is the smoothed density `(K_h * pi)(x)` for any step size;
//! the quadrature only perturbs the variance, which is why the default step
//! rule couples `dt` to the bandwidth rather than to the horizon.

use crate::error::{Error, Result};
use crate::kernels::{product_kernel_eval, Kernel1D};
use crate::quadrature::GaussLegendre;
use crate::sde::Trajectory;

/// A density query: evaluation point, bandwidth and kernel.
#[derive(Debug, Clone)]
pub struct KdeQuery {
    pub x: Vec<f64>,
    pub h: f64,
    pub kernel: Kernel1D,
}

impl KdeQuery {
    pub fn new(x: Vec<f64>, h: f64, kernel: Kernel1D) -> Result<Self> {
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::invalid("h", format!("bandwidth must be positive, got {h}")));
        }
        if h >= 1.0 {
            // The analysis assumes h < 1; larger bandwidths still evaluate
            // but the rate theory no longer applies.
            log::warn!("bandwidth h = {h} >= 1 is outside the analyzed regime");
        }
        Ok(KdeQuery { x, h, kernel })
    }
}

/// Default step-size rule for driving the estimator: the Riemann sum must
/// resolve the kernel window, so `dt = min(0.01, h / 10)`.
pub fn default_dt(h: f64) -> f64 {
    (h / 10.0).min(0.01)
}

/// Evaluates the estimator at one point by the trapezoid rule over the
/// trajectory grid.
pub fn kde_at_point(trajectory: &Trajectory, query: &KdeQuery) -> Result<f64> {
    if query.x.len() != trajectory.dim() {
        return Err(Error::invalid(
            "x",
            format!("query dim {} != trajectory dim {}", query.x.len(), trajectory.dim()),
        ));
    }
    let n = trajectory.grid().num_steps();
    if n == 0 {
        return Err(Error::EmptyTrajectory);
    }
    let d = trajectory.dim();
    let mut z = vec![0.0; d];
    let mut acc = 0.0;
    for k in 0..=n {
        let state = trajectory.state(k);
        for c in 0..d {
            z[c] = query.x[c] - state[c];
        }
        let w = if k == 0 || k == n { 0.5 } else { 1.0 };
        acc += w * product_kernel_eval(&query.kernel, query.h, &z);
    }
    // Trapezoid weights sum to n, and T = n * dt, so dividing by the step
    // count normalizes the time average exactly.
    Ok(acc / n as f64)
}

/// Evaluates the estimator at many points with shared bandwidth and kernel;
/// one pass per point (the trajectory scan dominates, queries are few).
pub fn kde_on_grid(
    trajectory: &Trajectory,
    points: &[Vec<f64>],
    h: f64,
    kernel: &Kernel1D,
) -> Result<Vec<f64>> {
    points
        .iter()
        .map(|x| kde_at_point(trajectory, &KdeQuery::new(x.clone(), h, kernel.clone())?))
        .collect()
}

/// Smoothing bias `(K_h * f)(x) - f(x)` of a known density `f`, by tensor
/// Gauss–Legendre quadrature over the kernel support (change of variables
/// `y = x - h z`, `z in [-1,1]^d`):
///
/// ```text
/// (K_h * f)(x) = int_{[-1,1]^d} prod_i K(z_i) f(x - h z) dz.
/// ```
///
/// Supports d <= 3; `nodes` Gauss–Legendre points per axis (64 is plenty for
/// smooth targets).
pub fn bias_convolution_oracle(
    f: &dyn Fn(&[f64]) -> f64,
    x: &[f64],
    h: f64,
    kernel: &Kernel1D,
    nodes: usize,
) -> Result<f64> {
    let d = x.len();
    if d == 0 || d > 3 {
        return Err(Error::invalid("x", format!("supported dimensions are 1..=3, got {d}")));
    }
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::invalid("h", format!("bandwidth must be positive, got {h}")));
    }
    let rule = GaussLegendre::new(nodes);
    let nodes_v = rule.nodes();
    let weights = rule.weights();
    let mut y = vec![0.0; d];
    let mut smoothed = 0.0;
    // Tensor loop over up to three axes, flattened by index arithmetic.
    let total = nodes_v.len().pow(d as u32);
    for flat in 0..total {
        let mut rem = flat;
        let mut w = 1.0;
        for c in 0..d {
            let i = rem % nodes_v.len();
            rem /= nodes_v.len();
            w *= weights[i] * kernel.eval(nodes_v[i]);
            y[c] = x[c] - h * nodes_v[i];
        }
        if w != 0.0 {
            smoothed += w * f(&y);
        }
    }
    Ok(smoothed - f(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fbm::{HurstParameter, UniformGrid};
    use crate::harness::fit_loglog_slope;
    use crate::sde::{simulate_stationary, DiffusionMatrix, DriftSpec, StationaryRun};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    /// Builds a trajectory holding a constant state (helper).
    fn constant_trajectory(value: &[f64], n: usize) -> Trajectory {
        let spec = DriftSpec::linear_with_declared(0.0, value.len(), 0.0, 0.0, 0.0);
        let grid = UniformGrid::over(1.0, n).unwrap();
        let noise = crate::fbm::FbmPath::from_increments(
            HurstParameter::new(0.5).unwrap(),
            grid,
            value.len(),
            vec![0.0; n * value.len()],
        )
        .unwrap();
        crate::sde::euler_maruyama(&spec, &DiffusionMatrix::identity(value.len()), &noise, value).unwrap()
    }

    #[test]
    fn constant_trajectory_gives_kernel_peak() {
        // All mass at x: pi_hat(x) = h^{-d} K(0)^d.
        for d in [1usize, 2] {
            let x = vec![0.3; d];
            let traj = constant_trajectory(&x, 50);
            let kernel = Kernel1D::legendre(2);
            let h = 0.4;
            let query = KdeQuery::new(x.clone(), h, kernel.clone()).unwrap();
            let got = kde_at_point(&traj, &query).unwrap();
            let want = kernel.at_zero().powi(d as i32) / h.powi(d as i32);
            assert_relative_eq!(got, want, max_relative = 1e-12);
        }
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let traj = constant_trajectory(&[0.0], 10);
        let query = KdeQuery::new(vec![0.0, 0.0], 0.3, Kernel1D::legendre(0)).unwrap();
        assert!(kde_at_point(&traj, &query).is_err());
    }

    #[test]
    fn estimator_mass_close_to_one() {
        // Summing pi_hat over a fine grid approximates total mass 1 for a
        // well-mixed run.
        let spec = DriftSpec::fou(1.0, 1).unwrap();
        let run = StationaryRun { t_end: 500.0, dt: 0.01, burn_in: None };
        let traj = simulate_stationary(&spec, &DiffusionMatrix::identity(1), HurstParameter::new(0.5).unwrap(), run, 31).unwrap();
        let kernel = Kernel1D::legendre(1);
        let step = 0.05;
        let points: Vec<Vec<f64>> = (-80..=80).map(|i| vec![i as f64 * step]).collect();
        let values = kde_on_grid(&traj, &points, 0.3, &kernel).unwrap();
        let mass: f64 = values.iter().sum::<f64>() * step;
        assert!((mass - 1.0).abs() < 0.02, "mass {mass}");
    }

    #[test]
    fn matches_smoothed_gaussian_at_origin() {
        // Estimate at 0 for near-stationary OU (H = 1/2) vs the smoothed
        // closed-form density; Monte Carlo average over replicates.
        let spec = DriftSpec::fou(1.0, 1).unwrap();
        let sigma = DiffusionMatrix::identity(1);
        let kernel = Kernel1D::legendre(1);
        let h = 0.3;
        let run = StationaryRun { t_end: 100.0, dt: default_dt(h), burn_in: None };
        let reps = 64;
        let mut sum = 0.0;
        for r in 0..reps {
            let traj = simulate_stationary(&spec, &sigma, HurstParameter::new(0.5).unwrap(), run, crate::rng::derive_seed(41, r, 0)).unwrap();
            let q = KdeQuery::new(vec![0.0], h, kernel.clone()).unwrap();
            sum += kde_at_point(&traj, &q).unwrap();
        }
        let got = sum / reps as f64;
        // Stationary density is N(0, 1/2); smoothed value at 0 from the
        // quadrature oracle.
        let density = |y: &[f64]| (-y[0] * y[0]).exp() / std::f64::consts::PI.sqrt();
        let smoothed = density(&[0.0]) + bias_convolution_oracle(&density, &[0.0], h, &kernel, 64).unwrap();
        assert!(
            (got - smoothed).abs() < 0.01,
            "estimate {got}, smoothed target {smoothed}"
        );
    }

    #[test]
    fn bias_oracle_zero_when_kernel_resolves_polynomial() {
        // Quadratic target, order-2 kernel: smoothing is exact, bias = 0.
        let f = |y: &[f64]| 1.0 + y[0] + y[0] * y[0];
        let kernel = Kernel1D::legendre(2);
        let bias = bias_convolution_oracle(&f, &[0.2], 0.3, &kernel, 64).unwrap();
        assert!(bias.abs() < 1e-12, "bias {bias:.3e}");
    }

    #[test]
    fn bias_order_two_for_uniform_kernel_on_gaussian() {
        // |bias| ~ c h^2 for the order-1 kernel on a standard normal
        // density at the origin; fitted log-log slope in [1.8, 2.2].
        let density = |y: &[f64]| (-0.5 * y[0] * y[0]).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let kernel = Kernel1D::legendre(1);
        let hs = [0.4, 0.2, 0.1, 0.05];
        let pairs: Vec<(f64, f64)> = hs
            .iter()
            .map(|&h| {
                let b = bias_convolution_oracle(&density, &[0.0], h, &kernel, 64).unwrap();
                (h, b.abs())
            })
            .collect();
        let fit = fit_loglog_slope(&pairs).unwrap();
        assert!(
            (1.8..=2.2).contains(&fit.slope),
            "bias slope {} outside [1.8, 2.2]",
            fit.slope
        );
    }

    #[test]
    fn bias_fourth_order_kernel_is_smaller() {
        let density = |y: &[f64]| (-0.5 * y[0] * y[0]).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let b2 = bias_convolution_oracle(&density, &[0.0], 0.2, &Kernel1D::legendre(1), 64).unwrap();
        let b4 = bias_convolution_oracle(&density, &[0.0], 0.2, &Kernel1D::legendre(3), 64).unwrap();
        assert!(b4.abs() < 0.05 * b2.abs(), "b2 {b2:.3e}, b4 {b4:.3e}");
    }

    #[test]
    fn linearity_in_the_kernel() {
        // kde is linear in the kernel: mixing coefficients mixes estimates.
        let traj = constant_trajectory(&[0.1], 32);
        let k1 = Kernel1D::legendre(2);
        let k2 = Kernel1D::legendre(4);
        let alpha = 0.3;
        let mixed: Vec<f64> = (0..k2.coeffs().len())
            .map(|i| {
                alpha * k1.coeffs().get(i).copied().unwrap_or(0.0)
                    + (1.0 - alpha) * k2.coeffs()[i]
            })
            .collect();
        let km = Kernel1D::from_legendre_coeffs(mixed).unwrap();
        let h = 0.5;
        let at = |k: &Kernel1D| {
            kde_at_point(&traj, &KdeQuery::new(vec![0.2], h, k.clone()).unwrap()).unwrap()
        };
        let lhs = at(&km);
        let rhs = alpha * at(&k1) + (1.0 - alpha) * at(&k2);
        assert_relative_eq!(lhs, rhs, max_relative = 1e-12);
    }

    proptest! {
        /// Translation equivariance: shifting trajectory and query by the
        /// same exactly-representable vector leaves the estimate unchanged
        /// to the last bit (dyadic states, integer shifts: no rounding).
        #[test]
        fn translation_equivariance_bitwise(
            raw in proptest::collection::vec(-512i32..512, 5..40),
            shift_int in -8i32..8,
            x_raw in -256i32..256,
        ) {
            let states: Vec<f64> = raw.iter().map(|&v| v as f64 / 512.0).collect();
            let n = states.len() - 1;
            let shift = shift_int as f64;
            let grid = UniformGrid::over(1.0, n.max(1)).unwrap();
            let make = |offset: f64| {
                let incs: Vec<f64> = states.windows(2).map(|w| (w[1] + offset) - (w[0] + offset)).collect();
                let noise = crate::fbm::FbmPath::from_increments(
                    HurstParameter::new(0.5).unwrap(), grid, 1, incs).unwrap();
                let drift = DriftSpec::linear_with_declared(0.0, 1, 0.0, 0.0, 0.0);
                crate::sde::euler_maruyama(&drift, &DiffusionMatrix::identity(1), &noise, &[states[0] + offset]).unwrap()
            };
            let base = make(0.0);
            let shifted = make(shift);
            let x = x_raw as f64 / 512.0;
            let k = Kernel1D::legendre(2);
            let a = kde_at_point(&base, &KdeQuery::new(vec![x], 0.25, k.clone()).unwrap()).unwrap();
            let b = kde_at_point(&shifted, &KdeQuery::new(vec![x + shift], 0.25, k).unwrap()).unwrap();
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}
