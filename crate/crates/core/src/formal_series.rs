//! Exact formal expansion of G_{mu_n} in powers of u = n^{-1/2}.
//!
//! Coefficients are polynomials with rational coefficients in the free
//! cumulants alpha_3..alpha_8 and u. Every series is truncated both in the
//! power of 1/z and in the degree of u. With y = 1/z throughout:
//! g(z) = z + sum a_k z^{-k} solves g + 1/g = z + sum_k alpha_{k+1} u^{k-1} z^{-k},
//! its compositional inverse is z + sum b_k z^{-k}, and 1/g^{-1}(z) groups
//! by powers of u into 1/z + sum_k u^k B_k(1/z).

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};

/// Number of generators: alpha_3..alpha_8 and u.
const NGEN: usize = 7;
const U: usize = 6;
/// Highest cumulant index available as a generator.
pub const MAX_ALPHA: usize = 8;

/// Exponent vector over (alpha_3, ..., alpha_8, u).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Monomial([u8; NGEN]);

impl Monomial {
    pub fn one() -> Self {
        Self([0; NGEN])
    }

    /// alpha_k for 3 <= k <= 8.
    pub fn alpha(k: usize) -> Self {
        assert!((3..=MAX_ALPHA).contains(&k));
        let mut e = [0; NGEN];
        e[k - 3] = 1;
        Self(e)
    }

    pub fn u() -> Self {
        let mut e = [0; NGEN];
        e[U] = 1;
        Self(e)
    }

    pub fn u_degree(&self) -> u8 {
        self.0[U]
    }

    /// Exponent of alpha_k.
    pub fn alpha_exponent(&self, k: usize) -> u8 {
        self.0[k - 3]
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut e = self.0;
        for (a, b) in e.iter_mut().zip(other.0) {
            *a += b;
        }
        Self(e)
    }

    pub fn pow_u(self, k: u8) -> Self {
        let mut e = self.0;
        e[U] += k;
        Self(e)
    }

    /// The same monomial with u removed.
    pub fn without_u(&self) -> Self {
        let mut e = self.0;
        e[U] = 0;
        Self(e)
    }

    fn eval(&self, alphas: &[f64; 6], u: f64) -> f64 {
        let mut v = 1.0;
        for (i, &e) in self.0.iter().enumerate().take(6) {
            v *= alphas[i].powi(e as i32);
        }
        v * u.powi(self.0[U] as i32)
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (i, &e) in self.0.iter().enumerate() {
            if e == 0 {
                continue;
            }
            let name = if i == U { "u".to_string() } else { format!("a{}", i + 3) };
            parts.push(if e == 1 { name } else { format!("{name}^{e}") });
        }
        if parts.is_empty() {
            write!(f, "1")
        } else {
            write!(f, "{}", parts.join("*"))
        }
    }
}

fn rational(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Polynomial in the cumulant symbols and u with exact rational coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CumulantPolynomial {
    terms: BTreeMap<Monomial, BigRational>,
}

impl CumulantPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: BigRational) -> Self {
        Self::monomial(Monomial::one(), c)
    }

    pub fn one() -> Self {
        Self::constant(BigRational::one())
    }

    pub fn monomial(m: Monomial, c: BigRational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Self { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> BigRational {
        self.terms.get(m).cloned().unwrap_or_else(BigRational::zero)
    }

    fn add_term(&mut self, m: Monomial, c: &BigRational) {
        let entry = self.terms.entry(m).or_insert_with(BigRational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(*m, c);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        Self {
            terms: self.terms.iter().map(|(m, c)| (*m, -c)).collect(),
        }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self.terms.iter().map(|(m, v)| (*m, v * c)).collect(),
        }
    }

    /// Product with terms of u-degree above `u_max` discarded.
    pub fn mul_trunc(&self, other: &Self, u_max: u8) -> Self {
        let mut out = Self::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                if m1.u_degree() + m2.u_degree() > u_max {
                    continue;
                }
                out.add_term(m1.mul(m2), &(c1 * c2));
            }
        }
        out
    }

    /// Terms of u-degree exactly k, with u divided out.
    pub fn u_part(&self, k: u8) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.u_degree() == k)
                .map(|(m, c)| (m.without_u(), c.clone()))
                .collect(),
        }
    }

    /// Terms of u-degree below k.
    pub fn below_u(&self, k: u8) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.u_degree() < k)
                .map(|(m, c)| (*m, c.clone()))
                .collect(),
        }
    }

    /// The constant term when the polynomial is a pure rational number.
    pub fn as_constant(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => self.terms.get(&Monomial::one()).cloned(),
            _ => None,
        }
    }

    /// Largest |coefficient|.
    pub fn max_abs_coefficient(&self) -> BigRational {
        self.terms
            .values()
            .map(|c| c.abs())
            .max()
            .unwrap_or_else(BigRational::zero)
    }

    /// Numerical value at alpha_3..alpha_8 = `alphas` and the given u.
    pub fn eval(&self, alphas: &[f64; 6], u: f64) -> f64 {
        self.terms
            .iter()
            .map(|(m, c)| c.to_f64().unwrap_or(f64::NAN) * m.eval(alphas, u))
            .sum()
    }
}

impl fmt::Display for CumulantPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.terms.iter().map(|(m, c)| format!("({c})*{m}")).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Truncated power series in y with polynomial coefficients.
#[derive(Debug, Clone, PartialEq)]
struct PowerSeries {
    coeffs: Vec<CumulantPolynomial>,
    u_max: u8,
}

impl PowerSeries {
    fn zero(order: usize, u_max: u8) -> Self {
        Self { coeffs: vec![CumulantPolynomial::zero(); order + 1], u_max }
    }

    fn one(order: usize, u_max: u8) -> Self {
        let mut s = Self::zero(order, u_max);
        s.coeffs[0] = CumulantPolynomial::one();
        s
    }

    fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    fn mul(&self, other: &Self) -> Self {
        let order = self.order().min(other.order());
        let mut out = Self::zero(order, self.u_max.min(other.u_max));
        for i in 0..=order {
            if self.coeffs[i].is_zero() {
                continue;
            }
            for j in 0..=(order - i) {
                if other.coeffs[j].is_zero() {
                    continue;
                }
                let prod = self.coeffs[i].mul_trunc(&other.coeffs[j], out.u_max);
                out.coeffs[i + j] = out.coeffs[i + j].add(&prod);
            }
        }
        out
    }

    fn sub(&self, other: &Self) -> Self {
        let order = self.order().min(other.order());
        Self {
            coeffs: (0..=order).map(|i| self.coeffs[i].sub(&other.coeffs[i])).collect(),
            u_max: self.u_max.min(other.u_max),
        }
    }

    /// 1/s for a series whose constant term is the rational 1.
    fn reciprocal(&self) -> Self {
        assert_eq!(self.coeffs[0].as_constant(), Some(BigRational::one()));
        let order = self.order();
        let mut r = Self::one(order, self.u_max);
        for m in 1..=order {
            let mut acc = CumulantPolynomial::zero();
            for i in 1..=m {
                if self.coeffs[i].is_zero() || r.coeffs[m - i].is_zero() {
                    continue;
                }
                acc = acc.add(&self.coeffs[i].mul_trunc(&r.coeffs[m - i], self.u_max));
            }
            r.coeffs[m] = acc.neg();
        }
        r
    }

    /// Multiplication by y^k, truncated at the same order.
    fn shift(&self, k: usize) -> Self {
        let order = self.order();
        let mut out = Self::zero(order, self.u_max);
        for i in 0..=order {
            if i + k <= order {
                out.coeffs[i + k] = self.coeffs[i].clone();
            }
        }
        out
    }

    fn truncate(&self, order: usize) -> Self {
        Self { coeffs: self.coeffs[..=order.min(self.order())].to_vec(), u_max: self.u_max }
    }

    fn is_zero(&self) -> bool {
        self.coeffs.iter().all(CumulantPolynomial::is_zero)
    }

    /// 1 / (1 - y^2)^p.
    fn inverse_one_minus_y2_pow(p: u32, order: usize, u_max: u8) -> Self {
        let mut base = Self::one(order, u_max);
        if order >= 2 {
            base.coeffs[2] = CumulantPolynomial::constant(rational(-1));
        }
        let inv = base.reciprocal();
        let mut out = Self::one(order, u_max);
        for _ in 0..p {
            out = out.mul(&inv);
        }
        out
    }
}

/// Truncated Laurent series c z + sum_{k=0}^{M} c_k z^{-k}.
#[derive(Debug, Clone, PartialEq)]
pub struct FormalLaurentSeries {
    /// Coefficient of z (the rational 1 for g-type series, else 0).
    pub z_coeff: BigRational,
    coeffs: Vec<CumulantPolynomial>,
    u_max: u8,
}

impl FormalLaurentSeries {
    /// Coefficient of z^{-k}.
    pub fn coeff(&self, k: usize) -> &CumulantPolynomial {
        &self.coeffs[k]
    }

    pub fn coeffs(&self) -> &[CumulantPolynomial] {
        &self.coeffs
    }

    /// Truncation order M: coefficients run through z^{-M}.
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Highest u-degree kept.
    pub fn u_max(&self) -> u8 {
        self.u_max
    }

    /// Numerical value of the truncated series at z.
    pub fn eval(&self, z: Complex64, alphas: &[f64; 6], u: f64) -> Complex64 {
        let y = 1.0 / z;
        let mut acc = Complex64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            acc = acc * y + c.eval(alphas, u);
        }
        acc + self.z_coeff.to_f64().unwrap_or(0.0) * z
    }

}

fn check_u_max(u_max: u8) -> Result<()> {
    if u_max as usize > MAX_ALPHA - 2 {
        return Err(Error::InvalidArgument(format!(
            "u-degree {u_max} needs cumulants beyond alpha_{MAX_ALPHA}"
        )));
    }
    Ok(())
}

/// sum_{k=1}^{K} alpha_{k+1} u^{k-1} z^{-k} with alpha_2 = 1, keeping u-degrees <= u_max.
pub fn phi_series(order: usize, u_max: u8) -> Result<FormalLaurentSeries> {
    if order < 2 {
        return Err(Error::InvalidArgument("phi_series needs K >= 2".into()));
    }
    check_u_max(u_max)?;
    let mut coeffs = vec![CumulantPolynomial::zero(); order + 1];
    coeffs[1] = CumulantPolynomial::one();
    for (k, c) in coeffs.iter_mut().enumerate().skip(2) {
        let deg = (k - 1) as u8;
        if k - 1 <= u_max as usize {
            *c = CumulantPolynomial::monomial(Monomial::alpha(k + 1).pow_u(deg), BigRational::one());
        }
    }
    Ok(FormalLaurentSeries { z_coeff: BigRational::zero(), coeffs, u_max })
}

/// g(z) = z + sum_{k=0}^{K} a_k z^{-k} with g + 1/g = z + phi.
///
/// Written as h = y g = 1 + sum a_k y^{k+1}, the equation reads
/// h + y^2/h = 1 + y phi(y), so h_j = [y^j](1 + y phi) - [y^{j-2}](1/h).
pub fn solve_g(order: usize, u_max: u8) -> Result<FormalLaurentSeries> {
    if order < 3 {
        return Err(Error::InvalidArgument("solve_g needs K >= 3".into()));
    }
    let phi = phi_series(order + 1, u_max)?;
    let len = order + 2;
    let mut h = vec![CumulantPolynomial::zero(); len];
    let mut r = vec![CumulantPolynomial::zero(); len];
    h[0] = CumulantPolynomial::one();
    r[0] = CumulantPolynomial::one();
    for j in 1..len {
        let rhs = phi.coeff(j - 1).clone();
        h[j] = if j >= 2 { rhs.sub(&r[j - 2]) } else { rhs };
        // extend 1/h by one coefficient now that h_j is known
        let mut acc = CumulantPolynomial::zero();
        for i in 1..=j {
            if h[i].is_zero() || r[j - i].is_zero() {
                continue;
            }
            acc = acc.add(&h[i].mul_trunc(&r[j - i], u_max));
        }
        r[j] = acc.neg();
    }
    Ok(FormalLaurentSeries { z_coeff: BigRational::one(), coeffs: h[1..].to_vec(), u_max })
}

/// Compositional inverse z + sum_{k=0}^{K} b_k z^{-k} of a g-type series.
///
/// With Y = 1/g^{-1}(1/y), Y = y h(Y); Lagrange inversion gives
/// [y^m] Y = [t^{m-1}] h(t)^m / m, and g^{-1} = z (y / Y).
pub fn revert_g(g: &FormalLaurentSeries, order: usize) -> Result<FormalLaurentSeries> {
    if g.z_coeff != BigRational::one() || !g.coeff(0).is_zero() {
        return Err(Error::InvalidArgument("revert_g expects g = z + O(1/z)".into()));
    }
    if order > g.order() {
        return Err(Error::TruncationOrder(format!(
            "cannot revert to order {order} from a series of order {}",
            g.order()
        )));
    }
    let u_max = g.u_max;
    let len = order + 2;
    let h = h_series(g, len);
    let y_series = lagrange_y(&h, len);
    // k(y) = y / Y = 1 / (Y / y)
    let ratio = PowerSeries { coeffs: y_series.coeffs[1..].to_vec(), u_max };
    let k = ratio.reciprocal();
    let ginv = FormalLaurentSeries { z_coeff: BigRational::one(), coeffs: k.coeffs[1..=order + 1].to_vec(), u_max };
    let resid = composition_residual(g, &ginv)?;
    if !resid.is_zero() {
        return Err(Error::Accuracy("g(g^{-1}(z)) - z is not zero".into()));
    }
    Ok(ginv)
}

/// h(y) = y g(1/y) as a power series with `len` coefficients.
fn h_series(g: &FormalLaurentSeries, len: usize) -> PowerSeries {
    let mut h = PowerSeries::one(len - 1, g.u_max);
    for j in 1..len {
        if j - 1 <= g.order() {
            h.coeffs[j] = g.coeff(j - 1).clone();
        }
    }
    h
}

/// Solution Y of Y = y h(Y), coefficients y^0..y^{len}.
fn lagrange_y(h: &PowerSeries, len: usize) -> PowerSeries {
    let mut y = PowerSeries::zero(len, h.u_max);
    let mut power = PowerSeries::one(len - 1, h.u_max);
    for m in 1..=len {
        power = power.mul(h);
        let c = power.coeffs[m - 1].scale(&BigRational::new(BigInt::one(), BigInt::from(m)));
        y.coeffs[m] = c;
    }
    y
}

/// g(g^{-1}(z)) - z as a series in y, checked through Y = y h(Y).
fn composition_residual(g: &FormalLaurentSeries, ginv: &FormalLaurentSeries) -> Result<PowerSeries> {
    // Y = 1/ginv(1/y) = y / k(y)
    let order = ginv.order() + 1;
    let mut k = PowerSeries::one(order, ginv.u_max);
    for j in 1..=order {
        k.coeffs[j] = ginv.coeff(j - 1).clone();
    }
    let y_over = k.reciprocal().shift(1);
    let h = h_series(g, order + 1).truncate(order);
    // h(Y) by Horner
    let mut hy = PowerSeries::zero(order, ginv.u_max);
    for c in h.coeffs.iter().rev() {
        hy = hy.mul(&y_over);
        hy.coeffs[0] = hy.coeffs[0].add(c);
    }
    Ok(y_over.sub(&hy.shift(1)))
}

/// Series of 1/g^{-1}(z) in y = 1/z, grouped by powers of u.
///
/// Element k (0 <= k <= kmax) holds the coefficients of u^k through z^{-M};
/// element 0 is 1/z.
pub fn collect_groups(ginv: &FormalLaurentSeries, kmax: u8, m: usize) -> Result<Vec<FormalLaurentSeries>> {
    if ginv.order() < m + 2 * kmax as usize {
        return Err(Error::TruncationOrder(format!(
            "need order >= M + 2 kmax = {}, have {}",
            m + 2 * kmax as usize,
            ginv.order()
        )));
    }
    if ginv.u_max < kmax {
        return Err(Error::TruncationOrder(format!(
            "need u-degree >= {kmax}, have {}",
            ginv.u_max
        )));
    }
    let order = ginv.order() + 1;
    let mut k = PowerSeries::one(order, ginv.u_max);
    for j in 1..=order {
        k.coeffs[j] = ginv.coeff(j - 1).clone();
    }
    let y_series = k.reciprocal().shift(1);
    Ok((0..=kmax)
        .map(|deg| FormalLaurentSeries {
            z_coeff: BigRational::zero(),
            coeffs: (0..=m).map(|j| y_series.coeffs[j].u_part(deg)).collect(),
            u_max: 0,
        })
        .collect())
}

/// B_1(1/z) .. B_kmax(1/z) through z^{-M}.
pub fn collect_bk(ginv: &FormalLaurentSeries, kmax: u8, m: usize) -> Result<Vec<FormalLaurentSeries>> {
    let mut groups = collect_groups(ginv, kmax, m)?;
    groups.remove(0);
    Ok(groups)
}

/// Closed forms of B_1 and B_2 as series in y through y^M.
fn closed_forms(m: usize) -> (PowerSeries, PowerSeries) {
    let a3 = CumulantPolynomial::monomial(Monomial::alpha(3), BigRational::one());
    let a4 = CumulantPolynomial::monomial(Monomial::alpha(4), BigRational::one());
    let a3sq = a3.mul_trunc(&a3, 0);
    let inv1 = PowerSeries::inverse_one_minus_y2_pow(1, m, 0);
    let inv2 = PowerSeries::inverse_one_minus_y2_pow(2, m, 0);
    let inv3 = PowerSeries::inverse_one_minus_y2_pow(3, m, 0);
    let scale = |s: &PowerSeries, c: &CumulantPolynomial| PowerSeries {
        coeffs: s.coeffs.iter().map(|p| p.mul_trunc(c, 0)).collect(),
        u_max: 0,
    };
    let b1 = scale(&inv1.shift(4), &a3);
    let first = scale(&inv1.shift(5), &a4.sub(&a3sq));
    let second = scale(&inv2.shift(7), &a3sq);
    let third = scale(&inv3.shift(5), &a3sq);
    let b2 = PowerSeries {
        coeffs: (0..=m)
            .map(|j| first.coeffs[j].add(&second.coeffs[j]).add(&third.coeffs[j]))
            .collect(),
        u_max: 0,
    };
    (b1, b2)
}

/// Outcome of comparing the engine with the closed forms of B_1 and B_2.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedFormReport {
    pub order: usize,
    pub b1_max_difference: BigRational,
    pub b2_max_difference: BigRational,
    pub caveat: &'static str,
}

impl ClosedFormReport {
    pub fn b1_exact(&self) -> bool {
        self.b1_max_difference.is_zero()
    }

    pub fn b2_exact(&self) -> bool {
        self.b2_max_difference.is_zero()
    }

    pub fn passed(&self) -> bool {
        self.b1_exact() && self.b2_exact()
    }
}

/// Note attached to every closed-form report.
pub const B2_CAVEAT: &str = "when alpha_3 != 0, B_2(G_w(z)) is not the Cauchy transform of a signed measure \
with finite local variation; the expansion of F_n therefore needs the shift by a_n at second order";

/// Expands the closed forms of B_1, B_2 through z^{-M} and subtracts the engine output.
pub fn verify_closed_forms(m: usize) -> Result<ClosedFormReport> {
    if m < 10 {
        return Err(Error::InvalidArgument("verify_closed_forms needs M >= 10".into()));
    }
    let order = m + 4;
    let g = solve_g(order, 2)?;
    let ginv = revert_g(&g, order)?;
    let bk = collect_bk(&ginv, 2, m)?;
    let (b1, b2) = closed_forms(m);
    let diff = |engine: &FormalLaurentSeries, closed: &PowerSeries| {
        engine
            .coeffs()
            .iter()
            .zip(&closed.coeffs)
            .map(|(a, b)| a.sub(b).max_abs_coefficient())
            .max()
            .unwrap_or_else(BigRational::zero)
    };
    Ok(ClosedFormReport {
        order: m,
        b1_max_difference: diff(&bk[0], &b1),
        b2_max_difference: diff(&bk[1], &b2),
        caveat: B2_CAVEAT,
    })
}

/// Rational as "p/q".
pub fn format_rational(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}
