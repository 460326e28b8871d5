//! Fractional Brownian motion: exact increment sampling and path builders.
//!
//! A fractional Brownian motion with Hurst parameter `H` has covariance
//!
//! ```text
//! E[B_t B_s] = (|t|^{2H} + |s|^{2H} - |t - s|^{2H}) / 2,
//! ```
//!
//! so its increments over a uniform grid (fractional Gaussian noise, fGn)
//! form a stationary Gaussian sequence with autocovariance
//!
//! ```text
//! gamma(k) = dt^{2H} (|k+1|^{2H} - 2|k|^{2H} + |k-1|^{2H}) / 2.
//! ```
//!
//! The production sampler embeds the Toeplitz autocovariance into a circulant
//! of size 2n and samples it exactly through the FFT in O(n log n). A dense
//! Cholesky factorization of the same covariance serves as an O(n^2)
//! cross-validation generator. `H = 1/2` reduces both to independent
//! Gaussians.

use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::gamma::gamma;
use crate::rng::{domains, stream};

/// Relative tolerance under which a negative circulant eigenvalue is treated
/// as a rounding artifact and clamped to zero.
const EIGENVALUE_TOL: f64 = 1e-10;

/// Hurst parameter, restricted to (0, 1); `1/2` is ordinary Brownian motion.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct HurstParameter(f64);

impl HurstParameter {
    pub fn new(h: f64) -> Result<Self> {
        if h.is_finite() && h > 0.0 && h < 1.0 {
            Ok(HurstParameter(h))
        } else {
            Err(Error::invalid("hurst", format!("must lie in (0, 1), got {h}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Whether the increments are negatively correlated (rough regime).
    pub fn is_rough(self) -> bool {
        self.0 < 0.5
    }
}

/// Uniform time grid `t_k = t0 + k dt`, `k = 0..=n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformGrid {
    t0: f64,
    dt: f64,
    n: usize,
}

impl UniformGrid {
    pub fn new(t0: f64, dt: f64, n: usize) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::invalid("dt", format!("must be positive, got {dt}")));
        }
        if n == 0 {
            return Err(Error::invalid("n", "grid needs at least one step"));
        }
        Ok(UniformGrid { t0, dt, n })
    }

    /// Grid over [0, t_end] with `n` steps.
    pub fn over(t_end: f64, n: usize) -> Result<Self> {
        Self::new(0.0, t_end / n as f64, n)
    }

    pub fn t0(self) -> f64 {
        self.t0
    }

    pub fn dt(self) -> f64 {
        self.dt
    }

    /// Number of steps (the grid has `n + 1` points).
    pub fn num_steps(self) -> usize {
        self.n
    }

    pub fn t_end(self) -> f64 {
        self.t0 + self.dt * self.n as f64
    }

    pub fn time(self, k: usize) -> f64 {
        self.t0 + self.dt * k as f64
    }

    pub fn times(self) -> impl Iterator<Item = f64> {
        (0..=self.n).map(move |k| self.time(k))
    }
}

/// Autocovariance `gamma(k)` of fGn with step `dt` at lag `k`.
///
/// `gamma(0) = dt^{2H}`; for `H = 1/2` all positive lags vanish; for
/// `H > 1/2` lags are positive with `gamma(k) ~ H(2H-1) dt^2 (k dt)^{2H-2}`,
/// and for `H < 1/2` they are negative.
pub fn fgn_autocov(hurst: HurstParameter, dt: f64, lag: usize) -> f64 {
    let two_h = 2.0 * hurst.value();
    let k = lag as f64;
    0.5 * dt.powf(two_h) * ((k + 1.0).powf(two_h) - 2.0 * k.powf(two_h) + (k - 1.0).abs().powf(two_h))
}

/// Exact fGn sample of length `n` by circulant embedding.
///
/// The length-(n+1) autocovariance row is embedded into a circulant of size
/// 2n (standard minimal embedding); its eigenvalues come out of one FFT,
/// negative values below `-1e-10 * max_eig` abort with
/// [`Error::NegativeEigenvalue`], and a Hermitian-symmetric complex Gaussian
/// vector pushed through a second FFT yields a real sample with exactly the
/// Toeplitz covariance.
pub fn sample_fgn_circulant(
    hurst: HurstParameter,
    n: usize,
    dt: f64,
    seed: u64,
) -> Result<Vec<f64>> {
    let mut rng = stream(seed, domains::FBM_COMPONENT, 0);
    sample_fgn_circulant_with(hurst, n, dt, &mut rng)
}

/// As [`sample_fgn_circulant`] but drawing from a caller-provided generator,
/// so higher layers can manage their own stream layout.
pub fn sample_fgn_circulant_with(
    hurst: HurstParameter,
    n: usize,
    dt: f64,
    rng: &mut impl Rng,
) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::invalid("n", "need at least one increment"));
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::invalid("dt", format!("must be positive, got {dt}")));
    }
    if n == 1 {
        let g: f64 = rng.sample(StandardNormal);
        return Ok(vec![g * dt.powf(hurst.value())]);
    }

    let m = 2 * n;
    // First circulant row: gamma(0), .., gamma(n-1), gamma(n), gamma(n-1), .., gamma(1).
    let mut row: Vec<Complex<f64>> = Vec::with_capacity(m);
    for k in 0..=n {
        row.push(Complex::new(fgn_autocov(hurst, dt, k), 0.0));
    }
    for k in (1..n).rev() {
        row.push(Complex::new(fgn_autocov(hurst, dt, k), 0.0));
    }

    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(m);
    fft.process(&mut row);

    let max_eig = row.iter().map(|c| c.re).fold(f64::NEG_INFINITY, f64::max);
    let tol = EIGENVALUE_TOL * max_eig;
    let mut eigs = Vec::with_capacity(m);
    for c in &row {
        if c.re < -tol {
            return Err(Error::NegativeEigenvalue { min_eig: c.re, tol: -tol });
        }
        eigs.push(c.re.max(0.0));
    }

    // Hermitian-symmetric coefficients: real at DC and Nyquist, complex with
    // half weight elsewhere, conjugate-mirrored so the transform is real.
    let mut coeffs = vec![Complex::new(0.0, 0.0); m];
    let g: f64 = rng.sample(StandardNormal);
    coeffs[0] = Complex::new((eigs[0]).sqrt() * g, 0.0);
    for j in 1..n {
        let scale = (eigs[j] / 2.0).sqrt();
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        coeffs[j] = Complex::new(scale * re, scale * im);
        coeffs[m - j] = coeffs[j].conj();
    }
    let g: f64 = rng.sample(StandardNormal);
    coeffs[n] = Complex::new((eigs[n]).sqrt() * g, 0.0);

    fft.process(&mut coeffs);
    let norm = 1.0 / (m as f64).sqrt();
    Ok(coeffs.iter().take(n).map(|c| c.re * norm).collect())
}

/// Exact fGn sample by dense Cholesky factorization, O(n^2) memory and
/// O(n^3) setup; cross-validation generator for moderate `n` (<= 4096).
pub fn sample_fgn_cholesky(
    hurst: HurstParameter,
    n: usize,
    dt: f64,
    seed: u64,
) -> Result<Vec<f64>> {
    let mut rng = stream(seed, domains::FBM_COMPONENT, 0);
    sample_fgn_cholesky_with(hurst, n, dt, &mut rng)
}

/// As [`sample_fgn_cholesky`] with a caller-provided generator.
pub fn sample_fgn_cholesky_with(
    hurst: HurstParameter,
    n: usize,
    dt: f64,
    rng: &mut impl Rng,
) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::invalid("n", "need at least one increment"));
    }
    if n > 4096 {
        return Err(Error::invalid("n", format!("Cholesky generator capped at 4096, got {n}")));
    }
    let l = cholesky_toeplitz(hurst, n, dt)?;
    let z: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    let mut x = vec![0.0; n];
    for i in 0..n {
        let row = &l[i];
        x[i] = row.iter().zip(&z).map(|(a, b)| a * b).sum();
    }
    Ok(x)
}

/// Lower Cholesky factor of the fGn covariance (row i stores columns 0..=i).
fn cholesky_toeplitz(hurst: HurstParameter, n: usize, dt: f64) -> Result<Vec<Vec<f64>>> {
    let cov: Vec<f64> = (0..n).map(|k| fgn_autocov(hurst, dt, k)).collect();
    let mut l: Vec<Vec<f64>> = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = vec![0.0; i + 1];
        for j in 0..=i {
            let mut s = cov[i - j];
            if j == i {
                for k in 0..j {
                    s -= row[k] * row[k];
                }
                if s <= 0.0 {
                    return Err(Error::NotPositiveDefinite { index: i, pivot: s });
                }
                row[j] = s.sqrt();
            } else {
                for k in 0..j {
                    s -= row[k] * l[j][k];
                }
                row[j] = s / l[j][j];
            }
        }
        l.push(row);
    }
    Ok(l)
}

/// A sampled fBm path: values on a uniform grid plus the raw increments they
/// were accumulated from (kept so integrators can consume increments without
/// re-differencing).
#[derive(Debug, Clone)]
pub struct FbmPath {
    hurst: HurstParameter,
    grid: UniformGrid,
    dim: usize,
    /// Row-major `(n + 1) x dim` path values, starting at zero.
    values: Vec<f64>,
    /// Row-major `n x dim` increments.
    increments: Vec<f64>,
}

impl FbmPath {
    pub fn hurst(&self) -> HurstParameter {
        self.hurst
    }

    pub fn grid(&self) -> UniformGrid {
        self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Path value at grid index `k` (a `dim`-vector).
    pub fn value(&self, k: usize) -> &[f64] {
        &self.values[k * self.dim..(k + 1) * self.dim]
    }

    /// Increment over step `k` (from `t_k` to `t_{k+1}`).
    pub fn increment(&self, k: usize) -> &[f64] {
        &self.increments[k * self.dim..(k + 1) * self.dim]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Builds a path from explicit per-component increments (used by tests
    /// and by the drift-free reproduction property).
    pub fn from_increments(
        hurst: HurstParameter,
        grid: UniformGrid,
        dim: usize,
        increments: Vec<f64>,
    ) -> Result<Self> {
        if increments.len() != grid.num_steps() * dim {
            return Err(Error::invalid(
                "increments",
                format!("expected {} entries, got {}", grid.num_steps() * dim, increments.len()),
            ));
        }
        let n = grid.num_steps();
        let mut values = vec![0.0; (n + 1) * dim];
        for k in 0..n {
            for c in 0..dim {
                values[(k + 1) * dim + c] = values[k * dim + c] + increments[k * dim + c];
            }
        }
        Ok(FbmPath { hurst, grid, dim, values, increments })
    }
}

/// Samples a `dim`-component fBm path on `grid`, one independent circulant
/// fGn stream per component (component `c` uses stream index `c` of the
/// path's seed).
pub fn sample_fbm_path(
    hurst: HurstParameter,
    grid: UniformGrid,
    dim: usize,
    seed: u64,
) -> Result<FbmPath> {
    if dim == 0 {
        return Err(Error::invalid("dim", "need at least one component"));
    }
    let n = grid.num_steps();
    let mut increments = vec![0.0; n * dim];
    for c in 0..dim {
        let mut rng = stream(seed, domains::FBM_COMPONENT, c as u64);
        let fgn = sample_fgn_circulant_with(hurst, n, grid.dt(), &mut rng)?;
        for k in 0..n {
            increments[k * dim + c] = fgn[k];
        }
    }
    FbmPath::from_increments(hurst, grid, dim, increments)
}

/// Mandelbrot–van Ness normalization constant
///
/// ```text
/// c1(H) = sqrt(2H sin(pi H) Gamma(2H)) / Gamma(H + 1/2),
/// ```
///
/// the factor that gives the moving-average representation of fBm unit
/// variance at t = 1. `c1(1/2) = 1`.
pub fn mvn_constant(hurst: HurstParameter) -> f64 {
    let h = hurst.value();
    (2.0 * h * (std::f64::consts::PI * h).sin() * gamma(2.0 * h)).sqrt() / gamma(h + 0.5)
}

/// Standard Brownian increments (`N(0, dt)`) on `grid`, one per step.
pub fn brownian_increments(grid: UniformGrid, seed: u64) -> Vec<f64> {
    let mut rng = stream(seed, domains::BROWNIAN, 0);
    let scale = grid.dt().sqrt();
    (0..grid.num_steps()).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect()
}

/// Riemann–Liouville path `Z_t = int_0^t (t - u)^{H - 1/2} dW_u` on the grid,
/// from the supplied Brownian increments.
///
/// Left-point quadrature everywhere except the final (singular for H < 1/2)
/// cell of each time, which is integrated analytically:
/// `int_{t-dt}^{t} (t-u)^{H-1/2} du = dt^{H+1/2} / (H + 1/2)`, applied to the
/// cell-average increment `dW/dt`. Discretization bias is O(dt^{min(H,1/2)});
/// this O(n^2) builder exists for law checks, not production sampling.
pub fn liouville_path(
    hurst: HurstParameter,
    grid: UniformGrid,
    increments: &[f64],
) -> Result<Vec<f64>> {
    let n = grid.num_steps();
    if increments.len() != n {
        return Err(Error::invalid(
            "increments",
            format!("expected one entry per grid step ({n}), got {}", increments.len()),
        ));
    }
    let dt = grid.dt();
    let hm = hurst.value() - 0.5;
    let mut out = vec![0.0; n + 1];
    // Analytic final-cell weight: integral of the kernel over one cell,
    // divided by dt to act on the raw increment.
    let last_w = dt.powf(hm + 1.0) / (hurst.value() + 0.5) / dt;
    for k in 1..=n {
        let tk = k as f64 * dt;
        let mut acc = 0.0;
        for j in 0..k - 1 {
            let u = j as f64 * dt;
            acc += (tk - u).powf(hm) * increments[j];
        }
        acc += last_w * increments[k - 1];
        out[k] = acc;
    }
    Ok(out)
}
