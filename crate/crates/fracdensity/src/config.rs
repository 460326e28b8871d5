//! Declarative run configuration: a TOML file with nested sections, every
//! field defaulted, converted here into the typed experiment descriptions.
//!
//! The same schema round-trips through [`Config::to_toml_string`]; run
//! manifests embed that resolved text so a finished run can be replayed
//! from its manifest alone. Unknown keys are rejected so typos fail loudly
//! instead of silently running defaults.
//!
//! ```toml
//! [experiment]
//! replicates = 100
//! seed = 42
//!
//! [drift]
//! name = "fou"        # or "double_well", "linear"
//! params = [1.0]
//! dim = 1
//!
//! [noise]
//! hurst = 0.25
//!
//! [sigma]
//! scalar = 1.0        # or entries = [row-major d*d]
//!
//! [estimator]
//! kernel_order = 2
//! query_points = [[0.0]]
//!
//! [bandwidth]
//! mode = "rule"       # "rule" | "explicit" | uses `fixed` for variance runs
//! variant = "basic"   # "basic" | "improved"
//! beta = 2.0
//! eps = 0.01
//! fixed = 0.3
//!
//! [grid]
//! t_grid = [64.0, 128.0, 256.0, 512.0, 1024.0, 2048.0]
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fbm::HurstParameter;
use crate::harness::{
    BandwidthSource, MseExperiment, OracleBudget, VarianceBandwidthExperiment,
    VarianceScalingExperiment,
};
use crate::rates::RateVariant;
use crate::sde::{DiffusionMatrix, DriftSpec};

/// Full run configuration; every section and field has a default.
#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub experiment: ExperimentSection,
    pub drift: DriftSection,
    pub noise: NoiseSection,
    pub sigma: SigmaSection,
    pub estimator: EstimatorSection,
    pub bandwidth: BandwidthSection,
    pub grid: GridSection,
    pub oracle: OracleSection,
    pub simulate: SimulateSection,
    pub control_ode: ControlOdeSection,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSection {
    /// Monte Carlo replicates per cell.
    pub replicates: usize,
    /// Base seed; all per-replicate seeds derive from it.
    pub seed: u64,
    /// Worker threads; unset falls back to the environment variable, then
    /// to the core count.
    pub threads: Option<usize>,
    /// Output directory.
    pub out: Option<String>,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        ExperimentSection { replicates: 100, seed: 42, threads: None, out: None }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct DriftSection {
    /// Catalog name: `fou`, `double_well` or `linear`.
    pub name: String,
    /// Positional parameters: `[kappa]`, `[a, b]` or `[gain]`.
    pub params: Vec<f64>,
    pub dim: usize,
    /// Declared constants for `linear` (which bypasses the catalog's
    /// derivations).
    pub kappa: Option<f64>,
    pub big_r: Option<f64>,
    pub lambda: Option<f64>,
}

impl Default for DriftSection {
    fn default() -> Self {
        DriftSection { name: "fou".into(), params: vec![1.0], dim: 1, kappa: None, big_r: None, lambda: None }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseSection {
    pub hurst: f64,
}

impl Default for NoiseSection {
    fn default() -> Self {
        NoiseSection { hurst: 0.25 }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct SigmaSection {
    /// Scalar multiple of the identity (default 1).
    pub scalar: Option<f64>,
    /// Full row-major `d x d` matrix; mutually exclusive with `scalar`.
    pub entries: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct EstimatorSection {
    pub kernel_order: usize,
    /// Density query points; unset picks a subcommand-appropriate default.
    pub query_points: Option<Vec<Vec<f64>>>,
}

impl Default for EstimatorSection {
    fn default() -> Self {
        EstimatorSection { kernel_order: 2, query_points: None }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct BandwidthSection {
    /// `rule` derives `h = T^{-a}` from the bound family; `explicit` reads
    /// `values`, one per horizon.
    pub mode: String,
    pub variant: String,
    /// Assumed smoothness of the target density.
    pub beta: f64,
    pub eps: f64,
    pub values: Option<Vec<f64>>,
    /// Fixed bandwidth for variance-vs-horizon runs.
    pub fixed: f64,
}

impl Default for BandwidthSection {
    fn default() -> Self {
        BandwidthSection {
            mode: "rule".into(),
            variant: "basic".into(),
            beta: 2.0,
            eps: 0.01,
            values: None,
            fixed: 0.3,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub t_grid: Vec<f64>,
    /// Bandwidth grid for variance-vs-bandwidth runs (decreasing).
    pub h_grid: Vec<f64>,
    /// Fixed horizon for variance-vs-bandwidth runs.
    pub t_fixed: f64,
    /// Simulation step override; unset uses `min(0.01, h/10)` per cell.
    pub dt: Option<f64>,
    /// Burn-in override; unset uses the drift-derived default.
    pub burn_in: Option<f64>,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection {
            t_grid: vec![64.0, 128.0, 256.0, 512.0, 1024.0, 2048.0],
            h_grid: vec![0.35, 0.3, 0.25, 0.2, 0.15],
            t_fixed: 256.0,
            dt: None,
            burn_in: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct OracleSection {
    /// Oracle horizon; unset uses 20x the largest experiment horizon.
    pub t_oracle: Option<f64>,
    pub dt: f64,
    pub replicates: usize,
    /// Oracle smoothing bandwidth.
    pub h: f64,
    /// Split-half sup-difference budget.
    pub tolerance: f64,
}

impl Default for OracleSection {
    fn default() -> Self {
        OracleSection { t_oracle: None, dt: 0.01, replicates: 8, h: 0.1, tolerance: 0.01 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateSection {
    pub t_end: f64,
    pub dt: f64,
    /// Independent paths to emit.
    pub paths: usize,
    /// Also write the driving noise increments.
    pub emit_noise: bool,
}

impl Default for SimulateSection {
    fn default() -> Self {
        SimulateSection { t_end: 10.0, dt: 0.01, paths: 1, emit_noise: false }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct ControlOdeSection {
    /// Base-grid steps on [0, 1].
    pub steps: usize,
    /// Randomized suite size.
    pub runs: usize,
    /// Initial gap of the showcased single run.
    pub rho0: Vec<f64>,
    /// Amplitude of the showcased run's sinusoidal perturbation.
    pub perturbation_amplitude: f64,
}

impl Default for ControlOdeSection {
    fn default() -> Self {
        ControlOdeSection { steps: 10_000, runs: 100, rho0: vec![1.0], perturbation_amplitude: 0.1 }
    }
}

impl Config {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("config parse error: {e}")))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    /// Serializes the fully-resolved configuration (defaults materialized).
    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(format!("config serialize error: {e}")))
    }

    pub fn drift_spec(&self) -> Result<DriftSpec> {
        let d = &self.drift;
        match d.name.as_str() {
            "linear" => {
                let gain = d.params.first().copied().unwrap_or(0.0);
                Ok(DriftSpec::linear_with_declared(
                    gain,
                    d.dim,
                    d.kappa.unwrap_or(0.0),
                    d.big_r.unwrap_or(0.0),
                    d.lambda.unwrap_or(0.0),
                ))
            }
            name => DriftSpec::builtin(name, &d.params, d.dim),
        }
    }

    pub fn sigma(&self) -> Result<DiffusionMatrix> {
        let dim = self.drift.dim;
        match (&self.sigma.scalar, &self.sigma.entries) {
            (Some(_), Some(_)) => {
                Err(Error::Config("sigma: give either `scalar` or `entries`, not both".into()))
            }
            (_, Some(entries)) => DiffusionMatrix::new(dim, entries.clone()),
            (scalar, None) => DiffusionMatrix::scalar(dim, scalar.unwrap_or(1.0)),
        }
    }

    pub fn hurst(&self) -> Result<HurstParameter> {
        HurstParameter::new(self.noise.hurst)
    }

    pub fn rate_variant(&self) -> Result<RateVariant> {
        self.bandwidth.variant.parse()
    }

    pub fn bandwidth_source(&self) -> Result<BandwidthSource> {
        match self.bandwidth.mode.as_str() {
            "rule" => Ok(BandwidthSource::Rule {
                variant: self.rate_variant()?,
                eps: self.bandwidth.eps,
            }),
            "explicit" => {
                let values = self.bandwidth.values.clone().ok_or_else(|| {
                    Error::Config("bandwidth.mode = \"explicit\" needs bandwidth.values".into())
                })?;
                Ok(BandwidthSource::Explicit(values))
            }
            other => Err(Error::Config(format!(
                "unknown bandwidth.mode {other:?}; expected \"rule\" or \"explicit\""
            ))),
        }
    }

    fn query_points_or(&self, default_first_coord: f64) -> Vec<Vec<f64>> {
        self.estimator.query_points.clone().unwrap_or_else(|| {
            let mut x = vec![0.0; self.drift.dim];
            x[0] = default_first_coord;
            vec![x]
        })
    }

    /// MSE-decay experiment. The default query point is the origin.
    pub fn mse_experiment(&self) -> Result<MseExperiment> {
        Ok(MseExperiment {
            drift: self.drift_spec()?,
            sigma: self.sigma()?,
            hurst: self.hurst()?,
            t_grid: self.grid.t_grid.clone(),
            replicates: self.experiment.replicates,
            kernel_order: self.estimator.kernel_order,
            beta_assumed: self.bandwidth.beta,
            bandwidth: self.bandwidth_source()?,
            query_points: self.query_points_or(0.0),
            dt: self.grid.dt,
            burn_in: self.grid.burn_in,
        })
    }

    /// Variance-vs-horizon experiment at the fixed bandwidth. The default
    /// query point sits off the symmetry center (first coordinate 0.5)
    /// where the density response to the process is first-order, so the
    /// variance scaling is not distorted by the quadratic degeneracy at a
    /// symmetric peak.
    pub fn variance_scaling_experiment(&self) -> Result<VarianceScalingExperiment> {
        Ok(VarianceScalingExperiment {
            drift: self.drift_spec()?,
            sigma: self.sigma()?,
            hurst: self.hurst()?,
            t_grid: self.grid.t_grid.clone(),
            replicates: self.experiment.replicates,
            kernel_order: self.estimator.kernel_order,
            h: self.bandwidth.fixed,
            query_points: self.query_points_or(0.5),
            dt: self.grid.dt,
            burn_in: self.grid.burn_in,
        })
    }

    /// Variance-vs-bandwidth experiment at the fixed horizon.
    pub fn variance_bandwidth_experiment(&self) -> Result<VarianceBandwidthExperiment> {
        Ok(VarianceBandwidthExperiment {
            drift: self.drift_spec()?,
            sigma: self.sigma()?,
            hurst: self.hurst()?,
            t: self.grid.t_fixed,
            h_grid: self.grid.h_grid.clone(),
            replicates: self.experiment.replicates,
            kernel_order: self.estimator.kernel_order,
            query_points: self.query_points_or(0.5),
            dt: self.grid.dt,
            burn_in: self.grid.burn_in,
        })
    }

    /// Oracle budget serving experiments up to `max_experiment_t`.
    pub fn oracle_budget(&self, max_experiment_t: f64) -> OracleBudget {
        OracleBudget {
            t_oracle: self.oracle.t_oracle.unwrap_or(20.0 * max_experiment_t),
            dt: self.oracle.dt,
            replicates: self.oracle.replicates,
            h: self.oracle.h,
            tolerance: self.oracle.tolerance,
        }
    }
}
