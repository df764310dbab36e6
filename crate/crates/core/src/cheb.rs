//! Absolutely continuous pieces stored as samples on Chebyshev nodes.
//!
//! A piece on [lo, hi] with density p is described through the smooth
//! function q(t) = r p(c + r t) sqrt(1 - t^2), c = (lo + hi)/2, r = (hi - lo)/2,
//! expanded as q = sum c_k T_k(t). Square-root and inverse-square-root edge
//! behaviour both give smooth q, so integrals, the distribution function,
//! the Cauchy transform and logarithmic potentials come out of the
//! coefficients in closed form.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::quadrature;

#[derive(Debug, Clone, PartialEq)]
pub struct ChebPiece {
    lo: f64,
    hi: f64,
    values: Vec<f64>,
    coeffs: Vec<f64>,
}

/// Chebyshev points of the first kind in t, ascending.
fn unit_nodes(n: usize) -> Vec<f64> {
    (0..n)
        .map(|j| -(((j as f64 + 0.5) * PI) / n as f64).cos())
        .collect()
}

/// Node locations of an `n`-point piece on [lo, hi], ascending.
pub fn nodes(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let c = 0.5 * (lo + hi);
    let r = 0.5 * (hi - lo);
    unit_nodes(n).into_iter().map(|t| c + r * t).collect()
}

fn clenshaw_t(coeffs: &[f64], t: f64) -> f64 {
    let (mut b1, mut b2) = (0.0, 0.0);
    for &ck in coeffs.iter().skip(1).rev() {
        let b0 = ck + 2.0 * t * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    coeffs.first().copied().unwrap_or(0.0) + t * b1 - b2
}

/// Returns (P(rho), rho P'(rho)) for P(rho) = sum_k a_k rho^k.
fn horner_with_derivative(coeffs: &[f64], rho: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &ck in coeffs.iter().rev() {
        dp = dp * rho + p;
        p = p * rho + ck;
    }
    (p, dp * rho)
}

/// s = sqrt(zeta - 1) sqrt(zeta + 1) on the upper-half-plane branch, and
/// rho = zeta - s computed stably as 1 / (zeta + s).
fn joukowski(zeta: Complex64) -> (Complex64, Complex64) {
    let zeta = if zeta.im == 0.0 {
        Complex64::new(zeta.re, 0.0)
    } else {
        zeta
    };
    let s = (zeta - 1.0).sqrt() * (zeta + 1.0).sqrt();
    let rho = 1.0 / (zeta + s);
    (s, rho)
}

impl ChebPiece {
    /// Builds a piece from density values at the ascending nodes of [lo, hi].
    pub fn new(lo: f64, hi: f64, values: Vec<f64>) -> Self {
        assert!(lo < hi && !values.is_empty());
        let n = values.len();
        let r = 0.5 * (hi - lo);
        let ts = unit_nodes(n);
        let mut coeffs = vec![0.0; n];
        for (t, p) in ts.iter().zip(&values) {
            let q = r * p * (1.0 - t * t).sqrt();
            let (mut tkm1, mut tk) = (1.0, *t);
            coeffs[0] += q;
            if n > 1 {
                coeffs[1] += q * tk;
            }
            for c in coeffs.iter_mut().skip(2) {
                let next = 2.0 * t * tk - tkm1;
                tkm1 = tk;
                tk = next;
                *c += q * tk;
            }
        }
        let scale = 2.0 / n as f64;
        for c in coeffs.iter_mut() {
            *c *= scale;
        }
        coeffs[0] *= 0.5;
        Self {
            lo,
            hi,
            values,
            coeffs,
        }
    }

    /// Samples `density` at `n` nodes of [lo, hi].
    pub fn from_fn<F: Fn(f64) -> f64>(lo: f64, hi: f64, n: usize, density: F) -> Self {
        let values = nodes(lo, hi, n).into_iter().map(density).collect();
        Self::new(lo, hi, values)
    }

    /// Resamples density values given on a uniform grid over [lo, hi].
    ///
    /// Finite samples are interpolated linearly, the density the trapezoid
    /// rule integrates. An infinite edge sample marks an inverse-square-root
    /// edge; then the weighted profile p(x) sqrt((x - lo)(hi - x)) is
    /// interpolated instead, which stays finite.
    pub fn from_uniform(lo: f64, hi: f64, grid: &[f64], n: usize) -> Self {
        let m = grid.len();
        assert!(m >= 2);
        let h = (hi - lo) / (m - 1) as f64;
        let lerp = |vals: &[f64], x: f64| {
            let pos = ((x - lo) / h).clamp(0.0, (m - 1) as f64);
            let i = (pos.floor() as usize).min(m - 2);
            let f = pos - i as f64;
            vals[i] * (1.0 - f) + vals[i + 1] * f
        };
        if grid.iter().all(|v| v.is_finite()) {
            return Self::from_fn(lo, hi, n, |x| lerp(grid, x));
        }
        let weight = |x: f64| ((x - lo) * (hi - x)).max(0.0).sqrt();
        let mut weighted: Vec<f64> = (0..m)
            .map(|i| grid[i] * weight(lo + i as f64 * h))
            .collect();
        // the edge sample itself is infinite; use the neighbour's weighted value
        if !weighted[0].is_finite() {
            weighted[0] = weighted[1];
        }
        if !weighted[m - 1].is_finite() {
            weighted[m - 1] = weighted[m - 2];
        }
        Self::from_fn(lo, hi, n, |x| lerp(&weighted, x) / weight(x))
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn nodes(&self) -> Vec<f64> {
        nodes(self.lo, self.hi, self.len())
    }

    fn center(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    fn radius(&self) -> f64 {
        0.5 * (self.hi - self.lo)
    }

    /// Quadrature weights attached to each node: the integral of f p is
    /// approximated by sum_j weights[j] f(x_j).
    pub fn node_weights(&self) -> Vec<f64> {
        let n = self.len();
        let r = self.radius();
        unit_nodes(n)
            .iter()
            .zip(&self.values)
            .map(|(t, p)| PI * r * p * (1.0 - t * t).sqrt() / n as f64)
            .collect()
    }

    pub fn mass(&self) -> f64 {
        PI * self.coeffs[0]
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes()
            .iter()
            .zip(self.node_weights())
            .map(|(x, w)| w * f(*x))
            .sum()
    }

    /// Integral of f p over [a, b] intersected with the piece.
    pub fn integrate_between<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> f64 {
        let a = a.max(self.lo);
        let b = b.min(self.hi);
        if a >= b {
            return 0.0;
        }
        let (c, r) = (self.center(), self.radius());
        let th_hi = ((a - c) / r).clamp(-1.0, 1.0).acos();
        let th_lo = ((b - c) / r).clamp(-1.0, 1.0).acos();
        let panels = (self.len() / 32).clamp(4, 256);
        quadrature::integrate(
            |th| {
                let t = th.cos();
                clenshaw_t(&self.coeffs, t) * f(c + r * t)
            },
            th_lo,
            th_hi,
            panels,
        )
    }

    /// Weighted profile q at the edges t = -1 and t = +1.
    pub fn edge_profile(&self) -> (f64, f64) {
        let mut left = 0.0;
        let mut right = 0.0;
        for (k, c) in self.coeffs.iter().enumerate() {
            right += c;
            left += if k % 2 == 0 { *c } else { -*c };
        }
        (left, right)
    }

    /// Whether the density blows up like an inverse square root at an edge.
    pub fn has_singular_edge(&self) -> bool {
        let (l, r) = self.edge_profile();
        let scale = self.coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        l.abs().max(r.abs()) > 1e-7 * scale.max(f64::MIN_POSITIVE)
    }

    pub fn density(&self, x: f64) -> f64 {
        if x < self.lo || x > self.hi {
            return 0.0;
        }
        let (c, r) = (self.center(), self.radius());
        let t = ((x - c) / r).clamp(-1.0, 1.0);
        let w = (1.0 - t * t).sqrt();
        let q = clenshaw_t(&self.coeffs, t);
        if w == 0.0 {
            return if self.has_singular_edge() {
                f64::INFINITY
            } else {
                0.0
            };
        }
        q / (r * w)
    }

    /// Mass of the piece strictly to the left of x.
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= self.lo {
            return 0.0;
        }
        if x >= self.hi {
            return self.mass();
        }
        let (c, r) = (self.center(), self.radius());
        let t = ((x - c) / r).clamp(-1.0, 1.0);
        let theta = t.acos();
        // sum_{k>=1} (c_k / k) sin(k theta) = sin(theta) sum (c_k / k) U_{k-1}(t)
        let (mut b1, mut b2) = (0.0, 0.0);
        for k in (1..self.coeffs.len()).rev() {
            let b0 = self.coeffs[k] / k as f64 + 2.0 * t * b1 - b2;
            b2 = b1;
            b1 = b0;
        }
        let sine_sum = theta.sin() * b1;
        self.coeffs[0] * (PI - theta) - sine_sum
    }

    /// Cauchy transform of the piece and its derivative, valid on the closed
    /// upper half-plane (boundary values from above on the real axis).
    pub fn cauchy_with_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let (c, r) = (self.center(), self.radius());
        let zeta = (z - c) / r;
        let (s, rho) = joukowski(zeta);
        let (p, kp) = horner_with_derivative(&self.coeffs, rho);
        let g = p * (PI / r) / s;
        let dg = -(kp + zeta / s * p) * (PI / (r * r)) / (s * s);
        (g, dg)
    }

    pub fn cauchy(&self, z: Complex64) -> Complex64 {
        let (c, r) = (self.center(), self.radius());
        let zeta = (z - c) / r;
        let (s, rho) = joukowski(zeta);
        let mut p = Complex64::new(0.0, 0.0);
        for &ck in self.coeffs.iter().rev() {
            p = p * rho + ck;
        }
        p * (PI / r) / s
    }

    /// Logarithmic potential: integral of log|x - u| p(u) du.
    pub fn log_potential(&self, x: f64) -> f64 {
        let (c, r) = (self.center(), self.radius());
        let (_, rho) = joukowski(Complex64::new((x - c) / r, 0.0));
        let mut sum = Complex64::new(0.0, 0.0);
        for k in (1..self.coeffs.len()).rev() {
            sum = (sum + self.coeffs[k] / k as f64) * rho;
        }
        let c0 = self.coeffs[0];
        PI * c0 * r.ln() - PI * c0 * (2.0 * rho).norm().ln() - PI * sum.re
    }

    /// Double integral of log|x - y| p(x) p(y).
    pub fn self_log_integral(&self) -> f64 {
        let c0 = self.coeffs[0];
        let tail: f64 = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c * c / k as f64)
            .sum();
        PI * PI * c0 * c0 * (0.5 * self.radius()).ln() - 0.5 * PI * PI * tail
    }

    /// Integral of p^3, infinite for inverse-square-root edges.
    pub fn cube_integral(&self) -> f64 {
        if self.has_singular_edge() {
            return f64::INFINITY;
        }
        self.values
            .iter()
            .zip(self.node_weights())
            .map(|(p, w)| w * p * p)
            .sum()
    }

    /// Pushforward under x -> alpha x + beta (alpha != 0).
    pub fn affine(&self, alpha: f64, beta: f64) -> Self {
        let scale = 1.0 / alpha.abs();
        let mut values: Vec<f64> = self.values.iter().map(|p| p * scale).collect();
        let mut coeffs = self.coeffs.clone();
        let (lo, hi) = if alpha > 0.0 {
            (alpha * self.lo + beta, alpha * self.hi + beta)
        } else {
            values.reverse();
            for (k, c) in coeffs.iter_mut().enumerate() {
                if k % 2 == 1 {
                    *c = -*c;
                }
            }
            (alpha * self.hi + beta, alpha * self.lo + beta)
        };
        Self {
            lo,
            hi,
            values,
            coeffs,
        }
    }

    /// Multiplies the density by a constant.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            lo: self.lo,
            hi: self.hi,
            values: self.values.iter().map(|p| p * factor).collect(),
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }

    /// Replaces the density p by f(x, p(x)) at every node.
    pub fn map_values<F: Fn(f64, f64) -> f64>(&self, f: F) -> Self {
        let values = self
            .nodes()
            .into_iter()
            .zip(&self.values)
            .map(|(x, p)| f(x, *p))
            .collect();
        Self::new(self.lo, self.hi, values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn semicircle(n: usize) -> ChebPiece {
        ChebPiece::from_fn(-2.0, 2.0, n, |x| (4.0 - x * x).max(0.0).sqrt() / (2.0 * PI))
    }

    #[test]
    fn semicircle_coefficients_are_two_terms() {
        let p = semicircle(65);
        let c = p.coefficients();
        assert!((c[0] - 1.0 / PI).abs() < 1e-15);
        assert!((c[2] + 1.0 / PI).abs() < 1e-15);
        assert!(c.iter().enumerate().all(|(k, v)| k == 0 || k == 2 || v.abs() < 1e-14));
        assert!((p.mass() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn semicircle_cdf_matches_closed_form() {
        let p = semicircle(33);
        for &x in &[-1.9, -1.0, 0.0, 0.3, 1.7] {
            let exact = 0.5 + x * (4.0f64 - x * x).sqrt() / (4.0 * PI) + (x / 2.0).asin() / PI;
            assert!((p.cdf(x) - exact).abs() < 1e-14, "x={x}");
        }
    }

    #[test]
    fn cauchy_on_and_off_the_axis() {
        let p = semicircle(33);
        let g = p.cauchy(Complex64::new(0.0, 2.0));
        assert!((g - Complex64::new(0.0, 1.0 - 2f64.sqrt())).norm() < 1e-14);
        let g = p.cauchy(Complex64::new(0.5, 0.0));
        assert!((g.im + PI * p.density(0.5)).abs() < 1e-14);
        assert!((g.re - 0.25).abs() < 1e-14);
        let z = Complex64::new(0.3, 0.4);
        let (_, dg) = p.cauchy_with_derivative(z);
        let h = 1e-6;
        let fd = (p.cauchy(z + h) - p.cauchy(z - h)) / (2.0 * h);
        assert!((dg - fd).norm() < 1e-8);
    }

    #[test]
    fn arcsine_has_singular_edges() {
        let p = ChebPiece::from_fn(-2.0, 2.0, 17, |x| 1.0 / (PI * (4.0 - x * x).sqrt()));
        assert!(p.has_singular_edge());
        assert!((p.mass() - 1.0).abs() < 1e-14);
        assert!(p.self_log_integral().abs() < 1e-14);
        assert!(p.cube_integral().is_infinite());
        let g = p.cauchy(Complex64::new(0.0, 1.0));
        assert!((g - 1.0 / Complex64::new(-5.0, 0.0).sqrt()).norm() < 1e-14);
    }

    #[test]
    fn potentials_inside_and_outside() {
        let p = semicircle(33);
        for &x in &[0.0, 1.0, 1.9, -0.7] {
            assert!((p.log_potential(x) - (x * x / 4.0 - 0.5)).abs() < 1e-14);
        }
        // outside: log|x| - sum m_k/(k x^k) expansion, compare with quadrature
        let x = 3.0;
        let direct = quadrature::integrate_cos(
            |u| (x - u).abs().ln() * (4.0 - u * u).max(0.0).sqrt() / (2.0 * PI),
            -2.0,
            2.0,
            8,
        );
        assert!((p.log_potential(x) - direct).abs() < 1e-13);
    }

    #[test]
    fn affine_reflection_and_partial_integrals() {
        let p = ChebPiece::from_fn(0.0, 1.0, 40, |x| 8.0 / PI * (x * (1.0 - x)).max(0.0).sqrt());
        let q = p.affine(-2.0, 1.0);
        assert!((q.lo() + 1.0).abs() < 1e-15 && (q.hi() - 1.0).abs() < 1e-15);
        assert!((q.mass() - 1.0).abs() < 1e-12);
        assert!((q.cdf(0.0) - (1.0 - p.cdf(0.5))).abs() < 1e-12);
        let part = p.integrate_between(0.0, 0.5, |x| x);
        let exact = 0.25 - 1.0 / (3.0 * PI);
        assert!((part - exact).abs() < 1e-12);
    }

    #[test]
    fn uniform_resampling_of_sqrt_profile() {
        let m = 2001;
        let xs = |i: usize| -2.0 + 4.0 * i as f64 / (m - 1) as f64;
        let grid: Vec<f64> = (0..m).map(|i| (4.0 - xs(i).powi(2)).max(0.0).sqrt() / (2.0 * PI)).collect();
        let p = ChebPiece::from_uniform(-2.0, 2.0, &grid, 4001);
        // trapezoid-level accuracy at a square-root edge: O(h^1.5)
        assert!((p.mass() - 1.0).abs() < 1e-4, "{}", p.mass() - 1.0);
        assert!((p.density(0.7) - grid[1350]).abs() < 1e-6);
        // arcsine on [-2, 2] with infinite edge samples
        let grid: Vec<f64> = (0..m).map(|i| 1.0 / (PI * (4.0 - xs(i).powi(2)).sqrt())).collect();
        let p = ChebPiece::from_uniform(-2.0, 2.0, &grid, 4001);
        assert!((p.mass() - 1.0).abs() < 1e-4, "{}", p.mass() - 1.0);
        assert!(p.has_singular_edge());
    }
}
