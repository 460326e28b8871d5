//! Numerical toolkit for stationary density estimation of additive-noise SDEs
//! driven by fractional Brownian motion,
//!
//! ```text
//! dX_t = sigma dB_t + b(X_t) dt,
//! ```
//!
//! where `B` is a d-dimensional fractional Brownian motion with Hurst
//! parameter `H` and the drift `b` is contractive outside a ball. The crate
//! provides
//!
//! * exact fractional Gaussian noise sampling (circulant embedding, with a
//!   Cholesky cross-check generator) and path builders ([`fbm`]),
//! * Euler–Maruyama integration and near-stationary simulation ([`sde`]),
//! * Legendre projection kernels of arbitrary order and the time-average
//!   kernel density estimator of the stationary law ([`kernels`],
//!   [`estimator`]),
//! * the bandwidth rules and theoretical rate exponents the experiments are
//!   tested against ([`rates`]),
//! * seeded, thread-count-independent Monte Carlo experiment drivers
//!   ([`harness`]),
//! * standalone numerical checks of the contraction ODE and the two-sided
//!   increment decomposition that underpin the variance bounds
//!   ([`control_ode`], [`innovation`]).
//!
//! # Examples
//!
//! Each major capability has a runnable example under `examples/`:
//!
//! * `cargo run --release --example fbm_paths` — sample fBm paths across H
//!   and dump them as CSV.
//! * `cargo run --release --example generator_crosscheck` — circulant vs
//!   Cholesky fGn law comparison.
//! * `cargo run --release --example kernel_orders` — moment table of the
//!   Legendre kernels K_M.
//! * `cargo run --release --example fou_stationary` — near-stationary
//!   fractional Ornstein–Uhlenbeck simulation and marginal moments.
//! * `cargo run --release --example density_estimate` — kernel density
//!   estimate of the stationary law on a grid vs a long-run oracle.
//! * `cargo run --release --example bias_order` — bias of the smoothed
//!   density as the bandwidth shrinks.
//! * `cargo run --release --example bandwidth_rules` — rate exponents and
//!   bandwidth schedules for the basic and refined rules.
//! * `cargo run --release --example variance_scaling` — variance of the
//!   estimator vs horizon T at fixed bandwidth.
//! * `cargo run --release --example mse_rates` — Monte Carlo MSE decay along
//!   a bandwidth rule.
//! * `cargo run --release --example control_ode` — contraction ODE run with
//!   envelope check.
//! * `cargo run --release --example innovation_gap` — reconstruction gap of
//!   the two-sided increment decomposition under step refinement.
//!
//! The same capabilities are exposed by the thin `fracdensity` binary as
//! subcommands (`simulate`, `kernel-check`, `drift-check`, `oracle-build`,
//! `mse-rates`, `variance-scaling`, `variance-h`, `control-ode`, `rates`);
//! run `fracdensity --help` for details. All runs are reproducible: every
//! output directory contains a manifest with the resolved configuration and
//! base seed, and results are independent of the worker thread count.

pub mod cli;
pub mod config;
pub mod control_ode;
pub mod error;
pub mod estimator;
pub mod fbm;
pub mod gamma;
pub mod harness;
pub mod innovation;
pub mod kernels;
pub mod output;
pub mod quadrature;
pub mod rates;
pub mod rng;
pub mod sde;

pub use error::{Error, Result};
