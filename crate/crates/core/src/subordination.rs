//! Free convolution powers through the subordination equation
//! z = n Z(z) - (n - 1) F(Z(z)), and the normalised sum law mu_n.

use num_complex::Complex64;
use rayon::prelude::*;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use crate::cheb::ChebPiece;
use crate::error::{Error, Result};
use crate::measure::{Atom, Measure, SignedDensity};
use crate::quadrature;

/// Default fixed-point tolerance.
pub const DEFAULT_TOL: f64 = 1e-12;
/// Default distance from the real axis used when inverting.
pub const DEFAULT_EPS: f64 = 1e-8;

const PICARD_STEPS: usize = 500;
const NEWTON_STEPS: usize = 100;
const MAX_STEPS: usize = 10_000;

/// Iteration counters accumulated over all solves.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IterationStats {
    pub solves: u64,
    pub picard_steps: u64,
    pub newton_steps: u64,
}

/// Subordination function of the n-fold free convolution power of `base`.
#[derive(Debug)]
pub struct SubordinationSolution {
    n: u64,
    base: Measure,
    tol: f64,
    memo: Option<Mutex<HashMap<(u64, u64), Complex64>>>,
    solves: AtomicU64,
    picard: AtomicU64,
    newton: AtomicU64,
}

impl SubordinationSolution {
    /// Solver with memoisation of every query point.
    pub fn new(base: &Measure, n: u64, tol: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!("n = {n} must be at least 2")));
        }
        if !(tol > 0.0) {
            return Err(Error::InvalidArgument("tol must be positive".into()));
        }
        if base.atoms().len() == 1 && base.pieces().is_empty() {
            return Err(Error::DegenerateMeasure("Dirac base measure".into()));
        }
        Ok(Self {
            n,
            base: base.clone(),
            tol,
            memo: Some(Mutex::new(HashMap::new())),
            solves: AtomicU64::new(0),
            picard: AtomicU64::new(0),
            newton: AtomicU64::new(0),
        })
    }

    /// Same solver without the memo table, for large parallel sweeps.
    pub fn without_memo(mut self) -> Self {
        self.memo = None;
        self
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn base(&self) -> &Measure {
        &self.base
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn stats(&self) -> IterationStats {
        IterationStats {
            solves: self.solves.load(Ordering::Relaxed),
            picard_steps: self.picard.load(Ordering::Relaxed),
            newton_steps: self.newton.load(Ordering::Relaxed),
        }
    }

    /// Stored (z, Z(z)) pairs.
    pub fn memo_entries(&self) -> Vec<(Complex64, Complex64)> {
        match &self.memo {
            None => vec![],
            Some(m) => m
                .lock()
                .expect("memo lock")
                .iter()
                .map(|(&(re, im), &v)| (Complex64::new(f64::from_bits(re), f64::from_bits(im)), v))
                .collect(),
        }
    }

    fn reciprocal(&self, w: Complex64) -> (Complex64, Complex64) {
        let (g, dg) = self.base.as_signed().cauchy_with_derivative(w);
        (1.0 / g, -dg / (g * g))
    }

    /// z - n w + (n - 1) F(w).
    pub fn residual(&self, z: Complex64, w: Complex64) -> f64 {
        let n = self.n as f64;
        let (f, _) = self.reciprocal(w);
        (z - n * w + (n - 1.0) * f).norm()
    }

    fn converged(&self, step: f64, w: Complex64) -> bool {
        step <= self.tol * w.norm().max(1.0)
    }

    /// Z(z) for Im z > 0.
    pub fn solve(&self, z: Complex64) -> Result<Complex64> {
        if !(z.im > 0.0) || !z.re.is_finite() || !z.im.is_finite() {
            return Err(Error::Domain(format!("Im z must be positive, got z = {z}")));
        }
        let key = (z.re.to_bits(), z.im.to_bits());
        if let Some(m) = &self.memo {
            if let Some(v) = m.lock().expect("memo lock").get(&key) {
                return Ok(*v);
            }
        }
        let w = self.iterate(z)?;
        if let Some(m) = &self.memo {
            m.lock().expect("memo lock").insert(key, w);
        }
        Ok(w)
    }

    fn iterate(&self, z: Complex64) -> Result<Complex64> {
        self.solves.fetch_add(1, Ordering::Relaxed);
        if let Some(w) = self.attempt(z, z) {
            return Ok(w);
        }
        // Continuation: solve well above the axis, then walk Im z down,
        // starting each stage from the previous root.
        let top = z.im.max(1.0).max(z.re.abs());
        let mut w = Complex64::new(z.re, top);
        let mut y = top;
        loop {
            y = (0.5 * y).max(z.im);
            let zk = Complex64::new(z.re, y);
            match self.attempt(zk, w) {
                Some(next) => w = next,
                None => break,
            }
            if y == z.im {
                return Ok(w);
            }
        }
        Err(Error::NoConvergence(format!(
            "subordination at z = {z}: residual {:e}",
            self.residual(z, w)
        )))
    }

    /// One solve of z = n w - (n - 1) F(w) started from `w0`: Picard, then
    /// damped Newton, then Picard again, then a Newton polish.
    fn attempt(&self, z: Complex64, w0: Complex64) -> Option<Complex64> {
        let n = self.n as f64;
        let lambda = (n - 1.0) / n;
        let mut w = w0;
        let mut picard = 0u64;
        let mut newton = 0u64;
        let mut done = false;
        let mut steps = 0usize;

        let picard_step = |w: Complex64| z / n + lambda * self.reciprocal(w).0;

        while steps < PICARD_STEPS {
            let next = picard_step(w);
            steps += 1;
            picard += 1;
            let step = (next - w).norm();
            w = next;
            if self.converged(step, w) {
                done = true;
                break;
            }
        }
        if !done {
            // Newton on h(w) = n w - (n - 1) F(w) - z, damped to stay in
            // Im w >= Im z. Im F(w) >= Im w puts the true root there, and
            // outside it Newton can settle on spurious near-real roots.
            for _ in 0..NEWTON_STEPS {
                let (f, df) = self.reciprocal(w);
                let h = n * w - (n - 1.0) * f - z;
                let dh = n - (n - 1.0) * df;
                let mut step = h / dh;
                let mut next = w - step;
                let mut halvings = 0;
                while !(next.im >= z.im) && halvings < 60 {
                    step *= 0.5;
                    next = w - step;
                    halvings += 1;
                }
                steps += 1;
                newton += 1;
                if !(next.re.is_finite() && next.im.is_finite()) {
                    break;
                }
                w = next;
                if self.converged(step.norm(), w) {
                    done = true;
                    break;
                }
            }
        }
        while !done && steps < MAX_STEPS {
            let next = picard_step(w);
            steps += 1;
            picard += 1;
            let step = (next - w).norm();
            w = next;
            done = self.converged(step, w);
        }
        if done {
            // Polish with Newton: Picard stops on the step size, which can
            // leave an error of step / (1 - contraction).
            for _ in 0..2 {
                let (f, df) = self.reciprocal(w);
                let next = w - (n * w - (n - 1.0) * f - z) / (n - (n - 1.0) * df);
                newton += 1;
                if next.im >= z.im && next.re.is_finite() && self.residual(z, next) <= self.residual(z, w) {
                    w = next;
                } else {
                    break;
                }
            }
        }
        self.picard.fetch_add(picard, Ordering::Relaxed);
        self.newton.fetch_add(newton, Ordering::Relaxed);
        // Rounding in n w - (n - 1) F(w) is of order n |w| machine epsilon,
        // so the residual is measured on that scale.
        (done && self.residual(z, w) <= self.tol * n * w.norm().max(1.0)).then_some(w)
    }

    /// Cauchy transform of the n-fold free convolution power: 1 / F(Z(z)).
    pub fn power_cauchy(&self, z: Complex64) -> Result<Complex64> {
        let w = self.solve(z)?;
        Ok(self.base.as_signed().cauchy(w))
    }

    /// Cauchy transform of mu_n, the law of the normalised sum, at z.
    pub fn clt_cauchy(&self, z: Complex64) -> Result<Complex64> {
        let s = (self.n as f64).sqrt();
        Ok(s * self.power_cauchy(s * z)?)
    }

    /// -Im G_{mu_n}(x + i eps) / pi.
    pub fn clt_density(&self, x: f64, eps: f64) -> Result<f64> {
        Ok((-self.clt_cauchy(Complex64::new(x, eps))?.im / PI).max(0.0))
    }

    /// x(w) = n w - (n - 1) F(w) and its derivative on the real axis.
    fn real_map(&self, w: f64) -> (f64, f64) {
        let n = self.n as f64;
        let (f, df) = self.reciprocal(Complex64::new(w, 0.0));
        (n * w - (n - 1.0) * f.re, n - (n - 1.0) * df.re)
    }
}

/// Z(z) of the n-fold power of mu.
pub fn solve_z(mu: &Measure, n: u64, z: Complex64, tol: f64) -> Result<Complex64> {
    SubordinationSolution::new(mu, n, tol)?.without_memo().solve(z)
}

/// Cauchy transform of the n-fold free convolution power of mu at z.
pub fn convolution_power_g(mu: &Measure, n: u64, z: Complex64, tol: f64) -> Result<Complex64> {
    SubordinationSolution::new(mu, n, tol)?.without_memo().power_cauchy(z)
}

/// Outcome of a diagnostic that only applies under extra hypotheses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundCheck {
    Holds,
    Violated,
    Inapplicable,
}

/// Checks |Z(z)| >= sqrt((n - 1) / 8) on every memoised query, for
/// standardised bases with n >= 1000 and rho_2(mu, sqrt((n - 1)/8)) <= 1/10.
pub fn z_lower_bound_check(sol: &SubordinationSolution) -> BoundCheck {
    let n = sol.n();
    let mu = sol.base();
    let bound = ((n as f64 - 1.0) / 8.0).sqrt();
    let standardized = mu.mean().abs() < 1e-8 && (mu.moment(2) - 1.0).abs() < 1e-8;
    if n < 1000 || !standardized || mu.tail_moment(2.0, bound) > 0.1 {
        return BoundCheck::Inapplicable;
    }
    if sol.memo_entries().iter().all(|(_, w)| w.norm() >= bound) {
        BoundCheck::Holds
    } else {
        BoundCheck::Violated
    }
}

/// mu_n together with bookkeeping from its construction.
#[derive(Debug, Clone)]
pub struct CltMeasure {
    pub n: u64,
    pub measure: Measure,
    /// Factor applied to the inverted density to reach total mass one.
    pub renormalization: f64,
    /// Total mass before renormalisation minus one.
    pub mass_defect: f64,
    /// Mass removed by clipping negative inversion noise.
    pub clipped_mass: f64,
    /// [-2 - L/sqrt n, 2 + L/sqrt n].
    pub support_bound: (f64, f64),
}

impl CltMeasure {
    pub fn max_density(&self) -> f64 {
        self.measure
            .pieces()
            .iter()
            .flat_map(|p| p.values().iter().copied())
            .fold(0.0, f64::max)
    }
}

/// Atoms of the n-fold power: base atoms a with weight w > (n-1)/n give an
/// atom at n a of weight n w - (n - 1).
fn power_atoms(mu: &Measure, n: u64) -> Vec<Atom> {
    let n = n as f64;
    mu.atoms()
        .iter()
        .filter_map(|a| {
            let w = n * a.weight - (n - 1.0);
            (w > 1e-14).then(|| Atom::new(n * a.location, w))
        })
        .collect()
}

/// Outer edges of the continuous part of the n-fold power, in the
/// unnormalised variable: first critical points of x(w) on the real line
/// coming in from -inf and +inf.
fn outer_edges(sol: &SubordinationSolution) -> Result<(f64, f64)> {
    let (lo, hi) = sol.base().support();
    let n = sol.n() as f64;
    let reach = 2.0 * n.sqrt() + lo.abs() + hi.abs() + 2.0;
    let m = 200_000;
    let deriv = |w: f64| sol.real_map(w).1;
    let scan = |start: f64, end: f64| -> Result<f64> {
        let mut prev = start;
        if !(deriv(start) > 0.0) {
            return Err(Error::Accuracy("edge scan started inside the support".into()));
        }
        for i in 1..=m {
            let w = start + (end - start) * i as f64 / m as f64;
            let d = deriv(w);
            if !(d > 0.0) {
                let (a, b) = if prev < w { (prev, w) } else { (w, prev) };
                let f = |t: f64| {
                    let v = deriv(t);
                    if v.is_finite() {
                        v
                    } else {
                        -1.0
                    }
                };
                return Ok(quadrature::brent(f, a, b, 1e-15 * (1.0 + w.abs())));
            }
            prev = w;
        }
        Err(Error::Accuracy("no critical point found while locating the support".into()))
    };
    let wl = scan(lo - reach, hi)?;
    let wr = scan(hi + reach, lo)?;
    Ok((sol.real_map(wl).0, sol.real_map(wr).0))
}

/// Splits [el, er] into intervals of positive density by sampling.
fn positive_intervals(sol: &SubordinationSolution, el: f64, er: f64, eps: f64) -> Result<Vec<(f64, f64)>> {
    let m = 4000;
    let xs: Vec<f64> = (1..m).map(|i| el + (er - el) * i as f64 / m as f64).collect();
    let ps: Vec<f64> = xs
        .par_iter()
        .map(|&x| sol.clt_density(x, eps))
        .collect::<Result<_>>()?;
    let pmax = ps.iter().copied().fold(0.0, f64::max);
    let thr = 1e-7 * pmax;
    let density = |x: f64| sol.clt_density(x, eps).unwrap_or(0.0) - thr;
    let mut intervals = Vec::new();
    let mut start = el;
    let mut inside = true;
    for i in 0..xs.len() {
        let positive = ps[i] > thr;
        if inside && !positive {
            let a = if i == 0 { el } else { xs[i - 1] };
            intervals.push((start, quadrature::bisect(density, a, xs[i], 1e-14)));
            inside = false;
        } else if !inside && positive {
            start = quadrature::bisect(density, xs[i - 1], xs[i], 1e-14);
            inside = true;
        }
    }
    if inside {
        intervals.push((start, er));
    }
    Ok(intervals)
}

/// Law of (X_1 + ... + X_n)/sqrt(n) for free copies of a standardised mu.
///
/// The continuous part is sampled on `grid_n` Chebyshev nodes per support
/// interval by inverting the Cauchy transform at distance `eps`.
pub fn clt_measure(mu: &Measure, n: u64, grid_n: usize, eps: f64) -> Result<CltMeasure> {
    if (mu.mean().abs() > 1e-8) || ((mu.moment(2) - 1.0).abs() > 1e-8) {
        return Err(Error::InvalidArgument("base measure must have mean 0 and variance 1".into()));
    }
    if grid_n < 16 {
        return Err(Error::InvalidArgument("grid_n must be at least 16".into()));
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument("eps must be positive".into()));
    }
    let sol = SubordinationSolution::new(mu, n, DEFAULT_TOL)?.without_memo();
    let s = (n as f64).sqrt();
    let atoms: Vec<Atom> = power_atoms(mu, n)
        .into_iter()
        .map(|a| Atom::new(a.location / s, a.weight))
        .collect();
    let atom_mass: f64 = atoms.iter().map(|a| a.weight).sum();

    let mut pieces = Vec::new();
    let mut clipped = 0.0;
    if atom_mass < 1.0 - 1e-12 {
        let (el, er) = outer_edges(&sol)?;
        let (el, er) = (el / s, er / s);
        for (a, b) in positive_intervals(&sol, el, er, eps)? {
            let xs = crate::cheb::nodes(a, b, grid_n);
            let raw: Vec<f64> = xs
                .par_iter()
                .map(|&x| Ok(-sol.clt_cauchy(Complex64::new(x, eps))?.im / PI))
                .collect::<Result<_>>()?;
            let neg = ChebPiece::new(a, b, raw.iter().map(|v| (-v).max(0.0)).collect());
            clipped += neg.mass();
            pieces.push(ChebPiece::new(a, b, raw.into_iter().map(|v| v.max(0.0)).collect()));
        }
    }
    let ac_mass: f64 = pieces.iter().map(ChebPiece::mass).sum();
    let mass_defect = atom_mass + ac_mass - 1.0;
    if mass_defect.abs() > 1e-4 {
        return Err(Error::Accuracy(format!(
            "mass defect {mass_defect:e} for n = {n}; increase grid_n"
        )));
    }
    let renormalization = if ac_mass > 0.0 { (1.0 - atom_mass) / ac_mass } else { 1.0 };
    if renormalization > 1.0 + 1e-6 {
        return Err(Error::Accuracy(format!(
            "renormalisation factor {renormalization} exceeds 1 + 1e-6; increase grid_n"
        )));
    }
    let pieces: Vec<ChebPiece> = pieces.iter().map(|p| p.scaled(renormalization)).collect();
    let radius = mu.radius();
    let support_bound = (-2.0 - radius / s, 2.0 + radius / s);
    let dens = SignedDensity::new(atoms.clone(), pieces.clone())?;
    let (lo, hi) = dens.support();
    if lo < support_bound.0 - 1e-9 || hi > support_bound.1 + 1e-9 {
        return Err(Error::Accuracy(format!(
            "support [{lo}, {hi}] escapes [{}, {}]",
            support_bound.0, support_bound.1
        )));
    }
    Ok(CltMeasure {
        n,
        measure: Measure::new(atoms, pieces)?,
        renormalization,
        mass_defect,
        clipped_mass: clipped,
        support_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn bernoulli_square_closed_forms() {
        let b = Measure::bernoulli();
        let z = solve_z(&b, 2, c(0.0, 2.0), 1e-12).unwrap();
        assert!((z - c(0.0, 1.0 + 2f64.sqrt())).norm() < 1e-12);
        let g = convolution_power_g(&b, 2, c(0.0, 2.0), 1e-12).unwrap();
        assert!((g - c(0.0, -1.0 / (2.0 * 2f64.sqrt()))).norm() < 1e-12);
    }

    #[test]
    fn image_bound_and_errors() {
        let t = Measure::tilted_bernoulli(0.8).unwrap();
        let z = solve_z(&t, 2, c(0.0, 10.0), 1e-12).unwrap();
        assert!(z.im >= 5.0);
        assert!(solve_z(&t, 1, c(0.0, 1.0), 1e-12).is_err());
        assert!(matches!(solve_z(&t, 2, c(0.0, 0.0), 1e-12), Err(Error::Domain(_))));
        assert!(matches!(solve_z(&Measure::dirac(0.0), 2, c(0.0, 1.0), 1e-12), Err(Error::DegenerateMeasure(_))));
    }

    #[test]
    fn power_atoms_of_tilted_measure() {
        let t = Measure::tilted_bernoulli(0.9).unwrap();
        let atoms = power_atoms(&t, 8);
        assert_eq!(atoms.len(), 1);
        assert!((atoms[0].weight - 0.2).abs() < 1e-12);
        assert!((atoms[0].location + 8.0 / 3.0).abs() < 1e-12);
        assert!(power_atoms(&t, 10).is_empty());
    }

    #[test]
    fn memo_and_lower_bound_diagnostic() {
        let b = Measure::bernoulli();
        let sol = SubordinationSolution::new(&b, 10, 1e-12).unwrap();
        sol.solve(c(0.0, 1.0)).unwrap();
        sol.solve(c(0.0, 1.0)).unwrap();
        assert_eq!(sol.stats().solves, 1);
        assert_eq!(z_lower_bound_check(&sol), BoundCheck::Inapplicable);
        let sol = SubordinationSolution::new(&b, 4096, 1e-12).unwrap();
        let z = sol.solve(c(0.0, 1.0)).unwrap();
        assert!(z.norm() >= (4095.0f64 / 8.0).sqrt());
        assert_eq!(z_lower_bound_check(&sol), BoundCheck::Holds);
    }
}
