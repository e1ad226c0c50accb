//! Gauss-Legendre panel quadrature with adaptive refinement.
//!
//! An integral is evaluated on `panels` equal subintervals, each with a fixed
//! Gauss-Legendre rule; the panel count doubles until two successive levels
//! agree to the requested relative tolerance. Panels and nodes are summed in
//! a fixed order, so a given refinement path is bitwise reproducible.
//!
//! For oscillatory integrands the caller can seed the initial panel count
//! from the known phase span; an n-node rule resolves roughly 1.5n radians
//! per panel, so seeding avoids both wasted coarse levels and accidental
//! agreement between two equally under-resolved levels.

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum QuadratureError {
    #[error(
        "quadrature did not converge: {panels} panels after {levels} refinements, \
         last relative change {last_change:.3e} (tolerance {rel_tol:.1e})"
    )]
    NotConverged {
        levels: u32,
        panels: usize,
        last_change: f64,
        rel_tol: f64,
    },
}

/// Values an adaptive integral can accumulate.
pub trait QuadValue: Copy {
    fn zero() -> Self;
    fn add(self, rhs: Self) -> Self;
    fn scale(self, k: f64) -> Self;
    /// Magnitude used for the convergence test.
    fn norm(self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn add(self, rhs: Self) -> Self {
        self + rhs
    }
    fn scale(self, k: f64) -> Self {
        self * k
    }
    fn norm(self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn add(self, rhs: Self) -> Self {
        self + rhs
    }
    fn scale(self, k: f64) -> Self {
        self * k
    }
    fn norm(self) -> f64 {
        Complex64::norm(self)
    }
}

/// Nodes and weights of an n-point Gauss-Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 2, "Gauss-Legendre rule needs at least 2 nodes");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let half = n.div_ceil(2);
        for i in 0..half {
            // Tricomi initial guess for the i-th positive-side root, refined by Newton.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, dp) = legendre_with_derivative(n, x);
                let step = p / dp;
                x -= step;
                if step.abs() <= 1e-15 * x.abs().max(1.0) {
                    break;
                }
            }
            if n % 2 == 1 && i == half - 1 {
                x = 0.0; // central root of odd rules is exact
            }
            let (_, dp) = legendre_with_derivative(n, x);
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Fixed-rule integral of `f` over [a, b] split into `panels` equal panels.
    pub fn integrate_panels<V, F>(&self, a: f64, b: f64, panels: usize, f: &mut F) -> Result<V, QuadratureError>
    where
        V: QuadValue,
        F: FnMut(f64) -> Result<V, QuadratureError>,
    {
        let width = (b - a) / panels as f64;
        let half_width = 0.5 * width;
        let mut total = V::zero();
        for p in 0..panels {
            let mid = a + width * (p as f64 + 0.5);
            let mut acc = V::zero();
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                acc = acc.add(f(mid + half_width * x)?.scale(*w));
            }
            total = total.add(acc.scale(half_width));
        }
        Ok(total)
    }
}

/// P_n(x) and its derivative by the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    let mut p = x;
    for k in 2..=n {
        let kf = k as f64;
        let next = ((2.0 * kf - 1.0) * x * p - (kf - 1.0) * p_prev) / kf;
        p_prev = p;
        p = next;
    }
    let dp = n as f64 * (x * p - p_prev) / (x * x - 1.0);
    (p, dp)
}

/// Panel-doubling adaptive driver around a fixed Gauss-Legendre rule.
#[derive(Debug, Clone)]
pub struct AdaptiveGl {
    rule: GaussLegendre,
    rel_tol: f64,
    initial_panels: usize,
    max_panels: usize,
}

impl AdaptiveGl {
    pub fn new(nodes_per_panel: usize, rel_tol: f64) -> Self {
        AdaptiveGl {
            rule: GaussLegendre::new(nodes_per_panel),
            rel_tol,
            initial_panels: 1,
            max_panels: 1 << 22,
        }
    }

    pub fn with_initial_panels(mut self, panels: usize) -> Self {
        self.initial_panels = panels.max(1);
        self
    }

    pub fn with_max_panels(mut self, panels: usize) -> Self {
        self.max_panels = panels.max(2);
        self
    }

    /// Adaptive integral of an infallible integrand.
    pub fn integrate<V, F>(&self, a: f64, b: f64, mut f: F) -> Result<V, QuadratureError>
    where
        V: QuadValue,
        F: FnMut(f64) -> V,
    {
        self.try_integrate(a, b, |x| Ok(f(x)))
    }

    /// Adaptive integral of an integrand that can itself fail (nested quadrature).
    pub fn try_integrate<V, F>(&self, a: f64, b: f64, mut f: F) -> Result<V, QuadratureError>
    where
        V: QuadValue,
        F: FnMut(f64) -> Result<V, QuadratureError>,
    {
        assert!(a.is_finite() && b.is_finite() && a <= b, "bad integration interval");
        if a == b {
            return Ok(V::zero());
        }
        let mut panels = self.initial_panels.min(self.max_panels);
        let mut coarse = self.rule.integrate_panels(a, b, panels, &mut f)?;
        let mut levels = 0u32;
        let mut last_rel_change = f64::INFINITY;
        loop {
            if panels.saturating_mul(2) > self.max_panels {
                return Err(QuadratureError::NotConverged {
                    levels,
                    panels,
                    last_change: last_rel_change,
                    rel_tol: self.rel_tol,
                });
            }
            panels *= 2;
            levels += 1;
            let fine: V = self.rule.integrate_panels(a, b, panels, &mut f)?;
            let change = fine.add(coarse.scale(-1.0)).norm();
            // 1e-300 floor lets an identically-zero integrand converge immediately.
            if change <= self.rel_tol * fine.norm() + 1e-300 {
                return Ok(fine);
            }
            last_rel_change = change / fine.norm().max(f64::MIN_POSITIVE);
            if levels >= 24 {
                return Err(QuadratureError::NotConverged {
                    levels,
                    panels,
                    last_change: last_rel_change,
                    rel_tol: self.rel_tol,
                });
            }
            coarse = fine;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn low_order_nodes_match_closed_forms() {
        let gl2 = GaussLegendre::new(2);
        let r = 1.0 / 3.0_f64.sqrt();
        assert_relative_eq!(gl2.nodes()[0], -r, max_relative = 1e-14);
        assert_relative_eq!(gl2.nodes()[1], r, max_relative = 1e-14);
        assert_relative_eq!(gl2.weights()[0], 1.0, max_relative = 1e-14);

        let gl3 = GaussLegendre::new(3);
        assert_eq!(gl3.nodes()[1], 0.0);
        assert_relative_eq!(gl3.nodes()[2], (3.0_f64 / 5.0).sqrt(), max_relative = 1e-14);
        assert_relative_eq!(gl3.weights()[1], 8.0 / 9.0, max_relative = 1e-14);
        assert_relative_eq!(gl3.weights()[0], 5.0 / 9.0, max_relative = 1e-14);
    }

    #[test]
    fn weights_sum_to_interval_length() {
        for n in [2, 5, 16, 32, 64] {
            let gl = GaussLegendre::new(n);
            let s: f64 = gl.weights().iter().sum();
            assert_relative_eq!(s, 2.0, max_relative = 1e-13);
        }
    }

    #[test]
    fn polynomial_exactness() {
        // n nodes integrate degree 2n-1 exactly.
        let gl = GaussLegendre::new(4);
        let got: f64 = gl
            .integrate_panels(0.0, 1.0, 1, &mut |x: f64| Ok(x.powi(7)))
            .unwrap();
        assert_relative_eq!(got, 1.0 / 8.0, max_relative = 1e-14);
    }

    #[test]
    fn adaptive_smooth_integral() {
        let quad = AdaptiveGl::new(8, 1e-10);
        let got: f64 = quad.integrate(0.0, 1.0, |x: f64| x.exp()).unwrap();
        assert_relative_eq!(got, std::f64::consts::E - 1.0, max_relative = 1e-10);
    }

    #[test]
    fn adaptive_oscillatory_integral() {
        // int_0^1 sin(200 x) dx = (1 - cos 200)/200
        let quad = AdaptiveGl::new(16, 1e-10);
        let got: f64 = quad.integrate(0.0, 1.0, |x: f64| (200.0 * x).sin()).unwrap();
        assert_relative_eq!(got, (1.0 - 200.0_f64.cos()) / 200.0, max_relative = 1e-9);
    }

    #[test]
    fn phase_seeded_panels_match_unseeded_result() {
        let plain = AdaptiveGl::new(32, 1e-10);
        let seeded = AdaptiveGl::new(32, 1e-10).with_initial_panels(7);
        let f = |x: f64| (40.0 * x).cos() * x;
        let a: f64 = plain.integrate(0.0, 2.0, f).unwrap();
        let b: f64 = seeded.integrate(0.0, 2.0, f).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-9);
    }

    #[test]
    fn zero_integrand_converges_immediately() {
        let quad = AdaptiveGl::new(64, 1e-8);
        let got: f64 = quad.integrate(-1.0, 1.0, |_| 0.0).unwrap();
        assert_eq!(got, 0.0);
    }

    #[test]
    fn empty_interval_is_zero() {
        let quad = AdaptiveGl::new(8, 1e-8);
        let got: f64 = quad.integrate(2.0, 2.0, |x: f64| x).unwrap();
        assert_eq!(got, 0.0);
    }

    #[test]
    fn non_convergence_is_reported() {
        // A panel budget of 2 cannot represent this integrand.
        let quad = AdaptiveGl::new(2, 1e-14).with_max_panels(2);
        let err = quad
            .integrate::<f64, _>(0.0, 1.0, |x: f64| (300.0 * x).sin().exp())
            .unwrap_err();
        assert!(matches!(err, QuadratureError::NotConverged { .. }));
    }

    #[test]
    fn complex_values_accumulate() {
        let quad = AdaptiveGl::new(16, 1e-12);
        let got: Complex64 = quad
            .integrate(0.0, std::f64::consts::PI, |x: f64| Complex64::new(x.cos(), x.sin()))
            .unwrap();
        assert_relative_eq!(got.re, 0.0, epsilon = 1e-12);
        assert_relative_eq!(got.im, 2.0, max_relative = 1e-12);
    }

    #[test]
    fn determinism_bitwise() {
        let quad = AdaptiveGl::new(64, 1e-8);
        let f = |x: f64| (x * 17.0).sin() / (1.0 + x * x);
        let a: f64 = quad.integrate(0.0, 3.0, f).unwrap();
        let b: f64 = quad.integrate(0.0, 3.0, f).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }
}
