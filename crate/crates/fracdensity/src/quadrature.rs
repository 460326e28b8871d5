//! Gauss–Legendre quadrature on [-1, 1] and affine images.
//!
//! Nodes are the roots of the Legendre polynomial P_n, found by Newton
//! iteration from the Chebyshev-like initial guess; weights are
//! 2 / ((1 - x^2) P_n'(x)^2). An n-point rule integrates polynomials of
//! degree <= 2n - 1 exactly, which the kernel moment checks rely on.

/// Legendre polynomial value and derivative at `x` by the three-term
/// recurrence.
pub fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut pm1, mut p) = (1.0, x);
    for k in 1..n {
        let k = k as f64;
        let next = ((2.0 * k + 1.0) * x * p - k * pm1) / (k + 1.0);
        pm1 = p;
        p = next;
    }
    // P_n'(x) = n (x P_n - P_{n-1}) / (x^2 - 1), regular away from +/-1.
    let dp = n as f64 * (x * p - pm1) / (x * x - 1.0);
    (p, dp)
}

/// Fixed Gauss–Legendre rule.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds the n-point rule. Panics if `n == 0`.
    pub fn new(n: usize) -> Self {
        assert!(n > 0, "quadrature order must be positive");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, dp) = legendre_with_derivative(n, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            let (_, dp) = legendre_with_derivative(n, x);
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            // Roots come out in decreasing order; store symmetrically.
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Integral of `f` over [-1, 1].
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    /// Integral of `f` over [a, b] by affine change of variables.
    pub fn integrate_on(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        half * self.integrate(|u| f(mid + half * u))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_on_polynomials_up_to_2n_minus_1() {
        for n in [1usize, 2, 5, 8, 64] {
            let rule = GaussLegendre::new(n);
            for k in 0..(2 * n) {
                let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
                let got = rule.integrate(|x| x.powi(k as i32));
                assert!(
                    (got - exact).abs() < 1e-12,
                    "n={n} k={k}: got {got}, want {exact}"
                );
            }
        }
    }

    #[test]
    fn smooth_integrand() {
        let rule = GaussLegendre::new(32);
        let got = rule.integrate(f64::exp);
        let want = std::f64::consts::E - 1.0 / std::f64::consts::E;
        assert!((got - want).abs() < 1e-13);
        let got = rule.integrate_on(0.0, 2.0, |x| x.exp());
        assert!((got - (2f64.exp() - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn weights_sum_to_interval_length() {
        let rule = GaussLegendre::new(64);
        let total: f64 = rule.weights().iter().sum();
        assert!((total - 2.0).abs() < 1e-13);
    }
}
