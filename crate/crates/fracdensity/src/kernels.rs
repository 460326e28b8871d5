//! Higher-order smoothing kernels from Legendre projections.
//!
//! The order-M kernel on [-1, 1] is the projection of the Dirac mass at 0
//! onto polynomials of degree <= M in the Legendre basis:
//!
//! ```text
//! K_M(u) = sum_{m=0}^{M} (2m + 1)/2 * P_m(0) * P_m(u),
//! ```
//!
//! so `int K_M = 1` and `int u^i K_M(u) du = 0` for `i = 1..=M` (the integral
//! of `u^i K_M` equals the value of `u -> u^i` at 0 for every `i <= M`). Odd
//! orders add nothing (`P_m(0) = 0` for odd m): `K_0 = K_1 = 1/2` is the
//! uniform kernel, and orders >= 2 take negative values, which is what buys
//! the extra bias orders. Multivariate smoothing uses the tensor product
//! `h^{-d} prod_i K(z_i / h)`.

use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;

/// A kernel on [-1, 1] stored by its Legendre coefficients:
/// `K(u) = sum_m coeffs[m] P_m(u)` inside the support, 0 outside.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel1D {
    order: usize,
    coeffs: Vec<f64>,
}

impl Kernel1D {
    /// The order-M projection kernel.
    pub fn legendre(order: usize) -> Self {
        let coeffs = (0..=order)
            .map(|m| (2.0 * m as f64 + 1.0) / 2.0 * legendre_at_zero(m))
            .collect();
        Kernel1D { order, coeffs }
    }

    /// Builds a kernel from raw Legendre coefficients (support stays
    /// [-1, 1]). The declared order is the coefficient degree; callers are
    /// responsible for any moment structure they need.
    pub fn from_legendre_coeffs(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::invalid("coeffs", "need at least one coefficient"));
        }
        Ok(Kernel1D { order: coeffs.len() - 1, coeffs })
    }

    /// Number of vanishing moments guaranteed by construction.
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Kernel value; zero outside [-1, 1].
    pub fn eval(&self, u: f64) -> f64 {
        if !(-1.0..=1.0).contains(&u) {
            return 0.0;
        }
        // Legendre recurrence accumulated against the coefficients.
        let mut acc = self.coeffs[0];
        if self.coeffs.len() == 1 {
            return acc;
        }
        let (mut pm1, mut p) = (1.0, u);
        acc += self.coeffs[1] * p;
        for m in 1..self.coeffs.len() - 1 {
            let mf = m as f64;
            let next = ((2.0 * mf + 1.0) * u * p - mf * pm1) / (mf + 1.0);
            pm1 = p;
            p = next;
            acc += self.coeffs[m + 1] * p;
        }
        acc
    }

    /// Value at the origin, `sum_m (2m+1)/2 P_m(0)^2` for projection
    /// kernels; this is also their sup-norm (checked by tests on a grid).
    pub fn at_zero(&self) -> f64 {
        self.eval(0.0)
    }

    /// Polynomial degree of the kernel (for quadrature sizing).
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }
}

/// `int_{-1}^{1} u^i K(u) du` by Gauss–Legendre quadrature with `nodes`
/// points; exact when `2 * nodes - 1 >= degree(K) + i`.
pub fn kernel_moment(kernel: &Kernel1D, i: usize, nodes: usize) -> Result<f64> {
    let needed = (kernel.degree() + i).div_ceil(2) + 1;
    if nodes < needed {
        return Err(Error::invalid(
            "nodes",
            format!("need at least {needed} nodes for moment {i} of a degree-{} kernel", kernel.degree()),
        ));
    }
    let rule = GaussLegendre::new(nodes);
    Ok(rule.integrate(|u| u.powi(i as i32) * kernel.eval(u)))
}

/// Tensor-product kernel `h^{-d} prod_i K(z_i / h)`; zero as soon as one
/// coordinate leaves the support `[-h, h]`.
pub fn product_kernel_eval(kernel: &Kernel1D, h: f64, z: &[f64]) -> f64 {
    debug_assert!(h > 0.0);
    let mut acc = 1.0;
    for &zi in z {
        let v = kernel.eval(zi / h);
        if v == 0.0 {
            return 0.0;
        }
        acc *= v;
    }
    acc / h.powi(z.len() as i32)
}

/// `P_m(0)`: zero for odd m, `(-1)^{m/2} (m-1)!! / m!!` for even m.
fn legendre_at_zero(m: usize) -> f64 {
    if m % 2 == 1 {
        return 0.0;
    }
    let mut val: f64 = 1.0;
    let mut k = m;
    while k >= 2 {
        val *= -((k - 1) as f64) / k as f64;
        k -= 2;
    }
    val
}
