//! Expansion approximants around the semicircle law: Chebyshev-polynomial
//! corrections to the distribution function and the density, the
//! correction transforms B_1 and B_2 in closed form, and the shift terms
//! Q_1 and Q_2.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::meixner::CltParams;
use crate::quadrature;
use crate::transform::{semicircle_cauchy, sqrt_z2_minus};

/// Chebyshev polynomial of the second kind U_m(x).
pub fn chebyshev_u(m: u32, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, 2.0 * x);
    if m == 0 {
        return prev;
    }
    for _ in 1..m {
        let next = 2.0 * x * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// p_w(x) = sqrt((4 - x^2)_+) / (2 pi).
pub fn semicircle_density(x: f64) -> f64 {
    (4.0 - x * x).max(0.0).sqrt() / (2.0 * PI)
}

/// w(x) = 1/2 + x sqrt(4 - x^2) / (4 pi) + arcsin(x/2) / pi on [-2, 2].
pub fn semicircle_cdf(x: f64) -> f64 {
    if x <= -2.0 {
        return 0.0;
    }
    if x >= 2.0 {
        return 1.0;
    }
    0.5 + x * (4.0 - x * x).sqrt() / (4.0 * PI) + (0.5 * x).asin() / PI
}

/// w(x) - (a_n / 3) U_2(x/2) p_w(x).
pub fn expansion1_cdf(x: f64, a_n: f64) -> f64 {
    semicircle_cdf(x) - a_n / 3.0 * chebyshev_u(2, 0.5 * x) * semicircle_density(x)
}

/// Approximation to F_n(x + a_n).
pub fn expansion2_shifted_cdf(x: f64, p: &CltParams) -> f64 {
    let u = 0.5 * x;
    let inv_n = 1.0 / p.n as f64;
    let a = p.a;
    let corr = -0.5 * a * a * chebyshev_u(1, u) + a / 3.0 * (3.0 - chebyshev_u(2, u))
        - 0.25 * (p.b - a * a - inv_n) * chebyshev_u(3, u);
    semicircle_cdf(x) + corr * semicircle_density(x)
}

/// w(x) - (m4 - 2)/(4n) U_3(x/2) p_w(x), for laws with m3 = 0.
pub fn expansion2_symmetric_cdf(x: f64, m4: f64, n: u64) -> f64 {
    semicircle_cdf(x) - (m4 - 2.0) / (4.0 * n as f64) * chebyshev_u(3, 0.5 * x) * semicircle_density(x)
}

/// v_n(x), the approximation to p_n(x + a_n).
pub fn density_expansion(x: f64, p: &CltParams) -> f64 {
    let inv_n = 1.0 / p.n as f64;
    let a = p.a;
    let poly = 1.0 + 0.5 * p.d - a * a - inv_n - a * x - (p.b - a * a - inv_n) * x * x;
    poly * semicircle_density(p.e * x)
}

/// B_1 evaluated at G_w(z): alpha_3 G_w(z)^3 / sqrt(z^2 - 4).
pub fn b1_closed(z: Complex64, alpha3: f64) -> Complex64 {
    let g = semicircle_cauchy(z);
    alpha3 * g * g * g / sqrt_z2_minus(z, 2.0)
}

/// B_2 evaluated at G_w(z).
///
/// With y = G_w(z) and 1/y - y = sqrt(z^2 - 4):
/// (alpha_4 - alpha_3^2) y^4/(1/y - y) + alpha_3^2 (y^5/(1/y - y)^2 + y^2/(1/y - y)^3).
pub fn b2_closed(z: Complex64, alpha3: f64, alpha4: f64) -> Complex64 {
    let y = semicircle_cauchy(z);
    let s = sqrt_z2_minus(z, 2.0);
    let a32 = alpha3 * alpha3;
    (alpha4 - a32) * y.powi(4) / s + a32 * (y.powi(5) / (s * s) + y * y / (s * s * s))
}

/// Q_1(x, a) = w(x - a) - w(x) + a p_w(x) + (a/3)(3 - U_2(x/2))(p_w(x - a) - p_w(x)).
pub fn q1_term(x: f64, a_n: f64) -> f64 {
    semicircle_cdf(x - a_n) - semicircle_cdf(x)
        + a_n * semicircle_density(x)
        + a_n / 3.0 * (3.0 - chebyshev_u(2, 0.5 * x)) * (semicircle_density(x - a_n) - semicircle_density(x))
}

/// Q_2(x, a_n, b_n, 1/n).
pub fn q2_term(x: f64, p: &CltParams) -> f64 {
    let a = p.a;
    let inv_n = 1.0 / p.n as f64;
    let coef = a * a / 6.0 * chebyshev_u(1, 0.5 * x) - 0.25 * (p.b - a * a - inv_n) * chebyshev_u(3, 0.5 * x);
    coef * (semicircle_density(x - a) - semicircle_density(x))
}

/// sup_x |Q_1(x, a)|: 10^4-point scan refined by golden-section search.
pub fn q1_sup(a_n: f64) -> f64 {
    let lo = -2.0 - a_n.abs();
    let hi = 2.0 + a_n.abs();
    let m = 10_000;
    let h = (hi - lo) / m as f64;
    let f = |x: f64| q1_term(x, a_n).abs();
    let (mut best_x, mut best) = (lo, 0.0);
    for i in 0..=m {
        let x = lo + i as f64 * h;
        let v = f(x);
        if v > best {
            best = v;
            best_x = x;
        }
    }
    let (_, refined) = quadrature::golden_max(f, best_x - h, best_x + h, 1e-14);
    best.max(refined)
}

/// Which quantity an approximant describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalKind {
    Cdf,
    Density,
}

/// An expansion approximant to F_n or p_n, evaluated at unshifted x.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionApproximant {
    pub order: u8,
    pub shift: f64,
    pub params: CltParams,
    pub kind: EvalKind,
}

impl ExpansionApproximant {
    /// Order-1 distribution function w(x) - (a_n/3) U_2(x/2) p_w(x).
    pub fn order1(params: CltParams) -> Self {
        Self { order: 1, shift: 0.0, params, kind: EvalKind::Cdf }
    }

    /// Order-2 distribution function, expanded around x - a_n.
    pub fn order2(params: CltParams) -> Self {
        Self { order: 2, shift: params.a, params, kind: EvalKind::Cdf }
    }

    /// Density approximation v_n(x - a_n).
    pub fn density(params: CltParams) -> Self {
        Self { order: 2, shift: params.a, params, kind: EvalKind::Density }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match (self.kind, self.order) {
            (EvalKind::Cdf, 1) => expansion1_cdf(x, self.params.a),
            (EvalKind::Cdf, _) => expansion2_shifted_cdf(x - self.shift, &self.params),
            (EvalKind::Density, _) => density_expansion(x - self.shift, &self.params),
        }
    }

    /// Interval outside which the approximant is constant.
    pub fn support(&self) -> (f64, f64) {
        match self.kind {
            EvalKind::Cdf => (self.shift - 2.0, self.shift + 2.0),
            EvalKind::Density => {
                let r = 2.0 / self.params.e;
                (self.shift - r, self.shift + r)
            }
        }
    }

    /// Limit at +inf for distribution functions, integral for densities.
    pub fn total_mass(&self) -> f64 {
        let (lo, hi) = self.support();
        match self.kind {
            EvalKind::Cdf => self.eval(hi + 1.0) - self.eval(lo - 1.0),
            EvalKind::Density => quadrature::integrate_cos(|x| self.eval(x), lo, hi, 8),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: u64, a: f64, b: f64, d: f64) -> CltParams {
        CltParams { n, a, b, d, e: (1.0 - b) / (1.0 - d).sqrt() }
    }

    #[test]
    fn chebyshev_examples() {
        assert_eq!(chebyshev_u(2, 0.0), -1.0);
        assert_eq!(chebyshev_u(1, 0.5), 1.0);
        assert_eq!(chebyshev_u(3, 1.0), 4.0);
        assert_eq!(chebyshev_u(0, 0.3), 1.0);
        for &x in &[-0.9, 0.2, 0.7] {
            let th: f64 = f64::acos(x);
            for m in 0..8 {
                let exact = ((m + 1) as f64 * th).sin() / th.sin();
                assert!((chebyshev_u(m, x) - exact).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn semicircle_examples() {
        assert!((semicircle_density(0.0) - 1.0 / PI).abs() < 1e-16);
        assert_eq!(semicircle_cdf(0.0), 0.5);
        assert_eq!(semicircle_cdf(2.0), 1.0);
        assert_eq!(semicircle_cdf(-2.0), 0.0);
    }

    #[test]
    fn expansion_examples() {
        let a = 0.1;
        assert!((expansion1_cdf(0.0, a) - (0.5 + a / (3.0 * PI))).abs() < 1e-15);
        assert_eq!(expansion1_cdf(-2.0, a), 0.0);
        assert_eq!(expansion1_cdf(2.0, a), 1.0);
        assert_eq!(expansion1_cdf(0.7, 0.0), semicircle_cdf(0.7));
        let p = params(50, 0.0, 0.02, 0.04);
        assert!((expansion2_shifted_cdf(0.0, &p) - 0.5).abs() < 1e-15);
        assert_eq!(expansion2_shifted_cdf(2.0, &p), 1.0);
        assert_eq!(expansion2_symmetric_cdf(0.0, 1.0, 10), 0.5);
        assert_eq!(expansion2_symmetric_cdf(1.0, 2.0, 7), semicircle_cdf(1.0));
        let exact = semicircle_cdf(1.0) + 1.0 / 40.0 * (-1.0) * (3f64.sqrt() / (2.0 * PI));
        assert!((expansion2_symmetric_cdf(1.0, 1.0, 10) - exact).abs() < 1e-15);
    }

    #[test]
    fn density_expansion_example() {
        let p = params(100, 0.0, 0.0, 0.01);
        assert!((density_expansion(0.0, &p) - 0.995 / PI).abs() < 1e-15);
    }

    #[test]
    fn q_terms_vanish_without_shift() {
        let p = params(100, 0.0, 0.0, 0.01);
        for &x in &[-1.5, 0.0, 0.3, 2.5] {
            assert_eq!(q1_term(x, 0.0), 0.0);
            assert_eq!(q2_term(x, &p), 0.0);
        }
        assert_eq!(q1_term(3.0, 0.2), 0.0);
        assert_eq!(q1_term(-3.0, 0.2), 0.0);
    }

    #[test]
    fn b_closed_forms() {
        let z = Complex64::new(0.0, 2.0);
        assert_eq!(b1_closed(z, 0.0), Complex64::new(0.0, 0.0));
        let g = Complex64::new(0.0, 1.0 - 2f64.sqrt());
        let expected = g * g * g / Complex64::new(0.0, 2.0 * 2f64.sqrt());
        assert!((b1_closed(z, 1.0) - expected).norm() < 1e-15);
        let alpha4 = 0.7;
        let d = alpha4 * g.powi(4) / Complex64::new(0.0, 2.0 * 2f64.sqrt());
        assert!((b2_closed(z, 0.0, alpha4) - d).norm() < 1e-15);
    }
}
