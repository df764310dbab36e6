//! Probability and signed measures on the line: atoms plus absolutely
//! continuous pieces on compact intervals.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::cheb::ChebPiece;
use crate::error::{Error, Result};

/// Default number of nodes for gridded densities.
pub const DEFAULT_GRID: usize = 4001;

/// Tolerance on total mass for probability measures.
pub const MASS_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub location: f64,
    pub weight: f64,
}

impl Atom {
    pub fn new(location: f64, weight: f64) -> Self {
        Self { location, weight }
    }
}

/// Atoms with signed weights plus density pieces of any sign.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedDensity {
    atoms: Vec<Atom>,
    pieces: Vec<ChebPiece>,
}

impl SignedDensity {
    pub fn new(mut atoms: Vec<Atom>, mut pieces: Vec<ChebPiece>) -> Result<Self> {
        atoms.sort_by(|a, b| a.location.total_cmp(&b.location));
        pieces.sort_by(|a, b| a.lo().total_cmp(&b.lo()));
        for a in &atoms {
            if !a.location.is_finite() || !a.weight.is_finite() {
                return Err(Error::InvalidArgument("non-finite atom".into()));
            }
        }
        if atoms.windows(2).any(|w| w[0].location == w[1].location) {
            return Err(Error::InvalidArgument("repeated atom location".into()));
        }
        for p in &pieces {
            if !(p.lo().is_finite() && p.hi().is_finite() && p.lo() < p.hi()) {
                return Err(Error::InvalidArgument("empty or unbounded support".into()));
            }
            if p.values().iter().any(|v| v.is_nan()) {
                return Err(Error::InvalidArgument("NaN density value".into()));
            }
        }
        if pieces.windows(2).any(|w| w[1].lo() < w[0].hi()) {
            return Err(Error::InvalidArgument("overlapping density pieces".into()));
        }
        Ok(Self { atoms, pieces })
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn pieces(&self) -> &[ChebPiece] {
        &self.pieces
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight).sum::<f64>()
            + self.pieces.iter().map(ChebPiece::mass).sum::<f64>()
    }

    /// Sum of |atom weights| plus the integral of |density|.
    pub fn total_variation(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight.abs()).sum::<f64>()
            + self
                .pieces
                .iter()
                .map(|p| p.integrate(|_| 1.0).abs().max(abs_mass(p)))
                .sum::<f64>()
    }

    /// Integral of f against the measure.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.atoms.iter().map(|a| a.weight * f(a.location)).sum::<f64>()
            + self.pieces.iter().map(|p| p.integrate(&f)).sum::<f64>()
    }

    pub fn density(&self, x: f64) -> f64 {
        self.pieces.iter().map(|p| p.density(x)).sum()
    }

    /// Mass of (-inf, x).
    pub fn cdf(&self, x: f64) -> f64 {
        self.atoms
            .iter()
            .filter(|a| a.location < x)
            .map(|a| a.weight)
            .sum::<f64>()
            + self.pieces.iter().map(|p| p.cdf(x)).sum::<f64>()
    }

    /// Smallest interval containing every atom and piece.
    pub fn support(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for a in &self.atoms {
            lo = lo.min(a.location);
            hi = hi.max(a.location);
        }
        for p in &self.pieces {
            lo = lo.min(p.lo());
            hi = hi.max(p.hi());
        }
        (lo, hi)
    }

    /// Cauchy transform on the closed upper half-plane, no domain check.
    pub fn cauchy(&self, z: Complex64) -> Complex64 {
        self.atoms
            .iter()
            .map(|a| a.weight / (z - a.location))
            .sum::<Complex64>()
            + self.pieces.iter().map(|p| p.cauchy(z)).sum::<Complex64>()
    }

    /// Cauchy transform and its derivative.
    pub fn cauchy_with_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let mut g = Complex64::new(0.0, 0.0);
        let mut dg = Complex64::new(0.0, 0.0);
        for a in &self.atoms {
            let inv = 1.0 / (z - a.location);
            g += a.weight * inv;
            dg -= a.weight * inv * inv;
        }
        for p in &self.pieces {
            let (pg, pdg) = p.cauchy_with_derivative(z);
            g += pg;
            dg += pdg;
        }
        (g, dg)
    }

    fn map_affine(&self, alpha: f64, beta: f64) -> Self {
        let mut atoms: Vec<Atom> = self
            .atoms
            .iter()
            .map(|a| Atom::new(alpha * a.location + beta, a.weight))
            .collect();
        let mut pieces: Vec<ChebPiece> = self.pieces.iter().map(|p| p.affine(alpha, beta)).collect();
        if alpha < 0.0 {
            atoms.reverse();
            pieces.reverse();
        }
        Self { atoms, pieces }
    }
}

fn abs_mass(p: &ChebPiece) -> f64 {
    p.values()
        .iter()
        .zip(p.node_weights())
        .map(|(v, w)| if *v < 0.0 { -w } else { w })
        .sum()
}

/// A probability measure with compact support.
#[derive(Debug, Clone, PartialEq)]
pub struct Measure {
    inner: SignedDensity,
}

impl Measure {
    pub fn new(atoms: Vec<Atom>, pieces: Vec<ChebPiece>) -> Result<Self> {
        let inner = SignedDensity::new(atoms, pieces)?;
        if inner.atoms.iter().any(|a| a.weight < 0.0) {
            return Err(Error::InvalidArgument("negative atom weight".into()));
        }
        if inner.pieces.iter().any(|p| p.values().iter().any(|v| *v < 0.0)) {
            return Err(Error::InvalidArgument("negative density value".into()));
        }
        if inner.atoms.is_empty() && inner.pieces.is_empty() {
            return Err(Error::InvalidArgument("empty measure".into()));
        }
        let mass = inner.total_mass();
        if (mass - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidArgument(format!("total mass {mass} is not 1")));
        }
        Ok(Self { inner })
    }

    pub fn dirac(x: f64) -> Self {
        Self::new(vec![Atom::new(x, 1.0)], vec![]).expect("valid dirac")
    }

    /// Finitely many atoms; weights must sum to one.
    pub fn discrete(atoms: &[(f64, f64)]) -> Result<Self> {
        Self::new(atoms.iter().map(|&(x, w)| Atom::new(x, w)).collect(), vec![])
    }

    /// Symmetric Bernoulli law (delta_{-1} + delta_1) / 2.
    pub fn bernoulli() -> Self {
        Self::discrete(&[(-1.0, 0.5), (1.0, 0.5)]).expect("valid bernoulli")
    }

    /// Two-point law with mean 0, variance 1 and weight p on the negative atom.
    pub fn tilted_bernoulli(p: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidArgument(format!("p = {p} must lie in (0, 1)")));
        }
        let a = -((1.0 - p) / p).sqrt();
        let b = (p / (1.0 - p)).sqrt();
        Self::discrete(&[(a, p), (b, 1.0 - p)])
    }

    /// Standard semicircle law on [-2, 2].
    pub fn semicircle() -> Self {
        let piece = ChebPiece::from_fn(-2.0, 2.0, 257, |x| (4.0 - x * x).max(0.0).sqrt() / (2.0 * PI));
        Self::new(vec![], vec![piece]).expect("valid semicircle")
    }

    /// Arcsine law on [-2, 2] (variance 2).
    pub fn arcsine() -> Self {
        let piece = ChebPiece::from_fn(-2.0, 2.0, 257, |x| 1.0 / (PI * (4.0 - x * x).sqrt()));
        Self::new(vec![], vec![piece]).expect("valid arcsine")
    }

    /// Density sampled on `grid_n` nodes over [lo, hi].
    pub fn from_density<F: Fn(f64) -> f64>(lo: f64, hi: f64, grid_n: usize, density: F) -> Result<Self> {
        if !(lo < hi) || grid_n < 2 {
            return Err(Error::InvalidArgument("need lo < hi and at least two nodes".into()));
        }
        Self::new(vec![], vec![ChebPiece::from_fn(lo, hi, grid_n, density)])
    }

    /// Named preset: "bernoulli", "tilted_bernoulli(p)", "semicircle", "arcsine".
    pub fn preset(name: &str) -> Result<Self> {
        let name = name.trim();
        match name {
            "bernoulli" => Ok(Self::bernoulli()),
            "semicircle" => Ok(Self::semicircle()),
            "arcsine" => Ok(Self::arcsine()),
            _ => {
                let arg = name
                    .strip_prefix("tilted_bernoulli(")
                    .and_then(|s| s.strip_suffix(')'))
                    .ok_or_else(|| Error::Parse(format!("unknown preset `{name}`")))?;
                let p: f64 = arg
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad parameter in `{name}`")))?;
                Self::tilted_bernoulli(p)
            }
        }
    }

    pub fn atoms(&self) -> &[Atom] {
        self.inner.atoms()
    }

    pub fn pieces(&self) -> &[ChebPiece] {
        self.inner.pieces()
    }

    pub fn as_signed(&self) -> &SignedDensity {
        &self.inner
    }

    pub fn into_signed(self) -> SignedDensity {
        self.inner
    }

    pub fn total_mass(&self) -> f64 {
        self.inner.total_mass()
    }

    pub fn support(&self) -> (f64, f64) {
        self.inner.support()
    }

    /// sup |x| over the support.
    pub fn radius(&self) -> f64 {
        let (lo, hi) = self.support();
        lo.abs().max(hi.abs())
    }

    pub fn is_absolutely_continuous(&self) -> bool {
        self.atoms().is_empty()
    }

    pub fn density(&self, x: f64) -> f64 {
        self.inner.density(x)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.inner.cdf(x)
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.inner.integrate(f)
    }

    /// m_k.
    pub fn moment(&self, k: u32) -> f64 {
        self.integrate(|x| x.powi(k as i32))
    }

    pub fn mean(&self) -> f64 {
        self.moment(1)
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.integrate(|x| (x - m) * (x - m))
    }

    /// Integral of |u|^q over {a < u < b}, splitting pieces at the kink of |u|^q.
    fn abs_power_between(&self, q: f64, a: f64, b: f64) -> f64 {
        let f = |u: f64| u.abs().powf(q);
        let atoms: f64 = self
            .atoms()
            .iter()
            .filter(|at| at.location > a && at.location < b)
            .map(|at| at.weight * f(at.location))
            .sum();
        let pieces: f64 = self
            .pieces()
            .iter()
            .map(|p| {
                if a < 0.0 && b > 0.0 {
                    p.integrate_between(a, 0.0, f) + p.integrate_between(0.0, b, f)
                } else {
                    p.integrate_between(a, b, f)
                }
            })
            .sum();
        atoms + pieces
    }

    /// beta_q, the absolute moment of order q.
    pub fn abs_moment(&self, q: f64) -> f64 {
        if q.fract() == 0.0 && (q as i64) % 2 == 0 && q >= 0.0 {
            return self.moment(q as u32);
        }
        self.abs_power_between(q, f64::NEG_INFINITY, f64::INFINITY)
    }

    /// rho_q(mu, t): integral of |u|^q over |u| > t.
    pub fn tail_moment(&self, q: f64, t: f64) -> f64 {
        let t = t.abs();
        self.abs_power_between(q, f64::NEG_INFINITY, -t) + self.abs_power_between(q, t, f64::INFINITY)
    }

    /// L_{qn} = beta_q / n^{(q-2)/2}.
    pub fn lyapunov_fraction(&self, q: f64, n: u64) -> f64 {
        self.abs_moment(q) / (n as f64).powf(0.5 * (q - 2.0))
    }

    /// eta_{qs}(n): minimum of eps^{s+2-q_s} + rho_{q_s}(mu, eps sqrt n) eps^{-q_s} / beta_{q_s}
    /// over 200 geometrically spaced eps in [10^{-5.5}, 10^{-1/2}].
    pub fn eta_qs(&self, q: f64, s: u32, n: u64) -> Result<f64> {
        if !(1..=3).contains(&s) {
            return Err(Error::InvalidArgument(format!("s = {s} must be 1, 2 or 3")));
        }
        if q < s as f64 + 1.0 {
            return Err(Error::InvalidArgument(format!("q = {q} must be at least s + 1")));
        }
        let qs = q.min(s as f64 + 2.0);
        let beta = self.abs_moment(qs);
        let sqrt_n = (n as f64).sqrt();
        let eps_max = 10f64.powf(-0.5);
        let eps_min = 10f64.powf(-5.5);
        let ratio = (eps_max / eps_min).ln();
        let mut best = f64::INFINITY;
        for i in 0..200 {
            let eps = eps_min * (ratio * i as f64 / 199.0).exp();
            let eps = if i == 199 { eps_max } else { eps };
            let g = eps.powf(s as f64 + 2.0 - qs) + self.tail_moment(qs, eps * sqrt_n) / beta * eps.powf(-qs);
            best = best.min(g);
        }
        Ok(best)
    }

    pub fn moment_summary(&self, k_max: usize, abs_orders: &[f64]) -> Result<MomentSummary> {
        let moments: Vec<f64> = (0..=k_max).map(|k| self.moment(k as u32)).collect();
        let cumulants = if k_max >= 1 {
            cumulants_from_moments(&moments[1..], k_max)?
        } else {
            vec![]
        };
        Ok(MomentSummary {
            moments,
            abs_moments: abs_orders.iter().map(|&q| (q, self.abs_moment(q))).collect(),
            cumulants,
        })
    }

    /// Affine pushforward to mean 0 and variance 1.
    pub fn standardize(&self) -> Result<Self> {
        let m = self.mean();
        let var = self.variance();
        let scale = self.radius().max(1.0);
        if !(var > 1e-14 * scale * scale) {
            return Err(Error::DegenerateMeasure("variance is zero".into()));
        }
        let sigma = var.sqrt();
        Ok(Self {
            inner: self.inner.map_affine(1.0 / sigma, -m / sigma),
        })
    }

    /// Pushforward under x -> c x.
    pub fn scale(&self, c: f64) -> Result<Self> {
        if c == 0.0 || !c.is_finite() {
            return Err(Error::InvalidArgument("scale factor must be finite and nonzero".into()));
        }
        Ok(Self {
            inner: self.inner.map_affine(c, 0.0),
        })
    }

    /// Parses the JSON measure format.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let raw: MeasureJson = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        raw.into_measure()
    }

    /// Serialises to the JSON measure format with Chebyshev-node pieces.
    pub fn to_json_string(&self) -> String {
        let raw = MeasureJson {
            atoms: self.atoms().iter().map(|a| (a.location, a.weight)).collect(),
            support: None,
            density_grid: None,
            grid: None,
            pieces: self
                .pieces()
                .iter()
                .map(|p| PieceJson {
                    support: (p.lo(), p.hi()),
                    density_grid: p.values().to_vec(),
                    grid: Some(GridKind::Chebyshev),
                })
                .collect(),
        };
        serde_json::to_string(&raw).expect("measure serialises")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum GridKind {
    Uniform,
    Chebyshev,
}

#[derive(Debug, Serialize, Deserialize)]
struct PieceJson {
    support: (f64, f64),
    density_grid: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    grid: Option<GridKind>,
}

#[derive(Debug, Serialize, Deserialize)]
struct MeasureJson {
    #[serde(default)]
    atoms: Vec<(f64, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    support: Option<(f64, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    density_grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    grid: Option<GridKind>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pieces: Vec<PieceJson>,
}

impl MeasureJson {
    fn into_measure(self) -> Result<Measure> {
        let mut raw_pieces = self.pieces;
        match (self.support, self.density_grid) {
            (Some(support), Some(grid)) if !grid.is_empty() => raw_pieces.push(PieceJson {
                support,
                density_grid: grid,
                grid: self.grid,
            }),
            (None, Some(grid)) if !grid.is_empty() => {
                return Err(Error::Parse("density_grid given without support".into()))
            }
            _ => {}
        }
        let atoms: Vec<Atom> = self.atoms.iter().map(|&(x, w)| Atom::new(x, w)).collect();
        let mut pieces = Vec::new();
        let mut uniform = false;
        // mass of the input as given: trapezoid rule on uniform grids
        let mut input_ac_mass = 0.0;
        for p in raw_pieces {
            let (lo, hi) = p.support;
            if !(lo < hi) {
                return Err(Error::Parse(format!("support [{lo}, {hi}] is empty")));
            }
            if p.density_grid.iter().any(|v| v.is_nan() || *v < 0.0) {
                return Err(Error::Parse("density values must be nonnegative".into()));
            }
            match p.grid.unwrap_or(GridKind::Uniform) {
                GridKind::Chebyshev => {
                    let piece = ChebPiece::new(lo, hi, p.density_grid);
                    input_ac_mass += piece.mass();
                    pieces.push(piece);
                }
                GridKind::Uniform => {
                    if p.density_grid.len() < 2 {
                        return Err(Error::Parse("uniform grid needs two or more values".into()));
                    }
                    uniform = true;
                    let n = p.density_grid.len().max(DEFAULT_GRID);
                    let piece = ChebPiece::from_uniform(lo, hi, &p.density_grid, n);
                    input_ac_mass += match trapezoid(lo, hi, &p.density_grid) {
                        m if m.is_finite() => m,
                        // infinite edge samples: fall back to the resampled mass
                        _ => piece.mass(),
                    };
                    let values = piece.values().iter().map(|v| v.max(0.0)).collect();
                    pieces.push(ChebPiece::new(lo, hi, values));
                }
            }
        }
        if uniform {
            // Uniform grids carry discretisation error in the mass, and so does
            // resampling them; rescale the continuous part when the input's own
            // defect is small.
            let atom_mass: f64 = atoms.iter().map(|a| a.weight).sum();
            let ac_mass: f64 = pieces.iter().map(ChebPiece::mass).sum();
            let defect = atom_mass + input_ac_mass - 1.0;
            if defect.abs() > 1e-3 || !(ac_mass > 0.0) {
                return Err(Error::Parse(format!("total mass off by {defect}")));
            }
            let factor = (1.0 - atom_mass) / ac_mass;
            pieces = pieces.iter().map(|p| p.scaled(factor)).collect();
        }
        Measure::new(atoms, pieces).map_err(|e| Error::Parse(e.to_string()))
    }
}

fn trapezoid(lo: f64, hi: f64, values: &[f64]) -> f64 {
    let h = (hi - lo) / (values.len() - 1) as f64;
    let inner: f64 = values[1..values.len() - 1].iter().sum();
    h * (inner + 0.5 * (values[0] + values[values.len() - 1]))
}

/// Moments, absolute moments and free cumulants of a measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentSummary {
    /// m_0 .. m_K.
    pub moments: Vec<f64>,
    /// (q, beta_q) pairs.
    pub abs_moments: Vec<(f64, f64)>,
    /// alpha_1 .. alpha_K.
    pub cumulants: Vec<f64>,
}

impl MomentSummary {
    pub fn moment(&self, k: usize) -> f64 {
        self.moments[k]
    }

    /// alpha_k (1-based).
    pub fn cumulant(&self, k: usize) -> f64 {
        self.cumulants[k - 1]
    }
}

/// Free cumulants alpha_1..alpha_K from moments m_1..m_K.
///
/// Uses the functional equation M(z) = C(z M(z)) between the moment series
/// M = 1 + sum m_k z^k and the cumulant series C = 1 + sum alpha_k z^k, which
/// is the coefficient form of reverting G and F.
pub fn cumulants_from_moments(ms: &[f64], k: usize) -> Result<Vec<f64>> {
    if k < 1 {
        return Err(Error::InvalidArgument("need K >= 1".into()));
    }
    if ms.len() < k {
        return Err(Error::InvalidArgument(format!("need {k} moments, got {}", ms.len())));
    }
    let mut m = vec![1.0; k + 1];
    m[1..=k].copy_from_slice(&ms[..k]);
    // powers[s][j] = [z^j] M(z)^s
    let mut powers: Vec<Vec<f64>> = vec![vec![0.0; k + 1]; k + 1];
    powers[0][0] = 1.0;
    for s in 1..=k {
        for j in 0..=k {
            powers[s][j] = (0..=j).map(|i| powers[s - 1][i] * m[j - i]).sum();
        }
    }
    let mut alpha = vec![0.0; k + 1];
    for n in 1..=k {
        let mut rest = 0.0;
        for s in 1..n {
            rest += alpha[s] * powers[s][n - s];
        }
        alpha[n] = m[n] - rest;
    }
    Ok(alpha[1..].to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_are_standardized_where_expected() {
        for m in [Measure::bernoulli(), Measure::tilted_bernoulli(0.9).unwrap(), Measure::semicircle()] {
            assert!(m.mean().abs() < 1e-13);
            assert!((m.moment(2) - 1.0).abs() < 1e-13);
        }
        assert!((Measure::arcsine().moment(2) - 2.0).abs() < 1e-13);
        let t = Measure::tilted_bernoulli(0.9).unwrap();
        assert!((t.moment(3) - 8.0 / 3.0).abs() < 1e-13);
        assert!((t.moment(4) - 73.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn preset_parsing() {
        assert_eq!(Measure::preset("bernoulli").unwrap(), Measure::bernoulli());
        let t = Measure::preset("tilted_bernoulli(0.9)").unwrap();
        assert!((t.atoms()[0].location + 1.0 / 3.0).abs() < 1e-15);
        assert!(Measure::preset("tilted_bernoulli(1.5)").is_err());
        assert!(Measure::preset("cauchy").is_err());
    }

    #[test]
    fn semicircle_moments_are_catalan() {
        let w = Measure::semicircle();
        assert!((w.moment(4) - 2.0).abs() < 1e-13);
        assert!((w.moment(6) - 5.0).abs() < 1e-13);
    }

    #[test]
    fn tail_and_lyapunov() {
        let b = Measure::bernoulli();
        assert_eq!(b.tail_moment(2.0, 2.0), 0.0);
        assert_eq!(b.tail_moment(2.0, 0.5), 1.0);
        assert!((b.lyapunov_fraction(3.0, 4) - 0.5).abs() < 1e-15);
        assert!((b.lyapunov_fraction(4.0, 10) - 0.1).abs() < 1e-15);
        assert!((b.eta_qs(3.0, 1, 100).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn semicircle_absolute_moment_three() {
        // beta_3(w) = 2 * int_0^2 x^3 sqrt(4 - x^2) / (2 pi) dx = 32 / (15 pi) * 2
        let w = Measure::semicircle();
        assert!((w.abs_moment(3.0) - 64.0 / (15.0 * PI)).abs() < 1e-12);
        assert!((w.tail_moment(2.0, 1.0) - 2.0 * crate::quadrature::integrate_cos(|x| x * x * (4.0 - x * x).max(0.0).sqrt() / (2.0 * PI), 1.0, 2.0, 4)).abs() < 1e-10);
    }

    #[test]
    fn cumulant_examples() {
        let a = cumulants_from_moments(&[0.0, 1.0, 0.7, 3.5], 4).unwrap();
        assert_eq!(a, vec![0.0, 1.0, 0.7, 1.5]);
        let a = cumulants_from_moments(&[0.0, 1.0, 0.0, 1.0], 4).unwrap();
        assert_eq!(a, vec![0.0, 1.0, 0.0, -1.0]);
        assert_eq!(cumulants_from_moments(&[0.0, 1.0], 2).unwrap(), vec![0.0, 1.0]);
        assert!(cumulants_from_moments(&[], 0).is_err());
        // semicircle: all cumulants beyond the second vanish
        let w = Measure::semicircle();
        let s = w.moment_summary(8, &[3.0]).unwrap();
        for k in 3..=8 {
            assert!(s.cumulant(k).abs() < 1e-12);
        }
    }

    #[test]
    fn standardize_and_scale() {
        assert!(matches!(Measure::dirac(5.0).standardize(), Err(Error::DegenerateMeasure(_))));
        let m = Measure::discrete(&[(0.0, 0.9), (10.0, 0.1)]).unwrap().standardize().unwrap();
        assert!((m.atoms()[0].location + 1.0 / 3.0).abs() < 1e-14);
        assert!((m.atoms()[1].location - 3.0).abs() < 1e-14);
        let b = Measure::bernoulli().scale(2.0).unwrap();
        assert_eq!(b.atoms()[1].location, 2.0);
        assert!(Measure::bernoulli().scale(0.0).is_err());
        let w = Measure::semicircle().scale(-1.0).unwrap();
        assert!((w.cdf(0.5) - Measure::semicircle().cdf(0.5)).abs() < 1e-14);
    }

    #[test]
    fn json_round_trip_and_uniform_ingestion() {
        let m = Measure::tilted_bernoulli(0.7).unwrap();
        let back = Measure::from_json_str(&m.to_json_string()).unwrap();
        assert_eq!(back, m);
        let w = Measure::semicircle();
        let back = Measure::from_json_str(&w.to_json_string()).unwrap();
        assert!((back.cdf(0.3) - w.cdf(0.3)).abs() < 1e-14);
        let grid: Vec<f64> = (0..1001)
            .map(|i| {
                let x = -2.0 + 4.0 * i as f64 / 1000.0;
                (4.0 - x * x).max(0.0).sqrt() / (2.0 * PI)
            })
            .collect();
        let text = serde_json::json!({"atoms": [], "support": [-2.0, 2.0], "density_grid": grid}).to_string();
        let u = Measure::from_json_str(&text).unwrap();
        assert!((u.moment(2) - 1.0).abs() < 1e-4);
        assert!(Measure::from_json_str("{\"atoms\": [[0.0, 0.5]]}").is_err());
    }
}
