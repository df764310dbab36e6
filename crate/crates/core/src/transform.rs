//! Cauchy and reciprocal Cauchy transforms, Stieltjes inversion, the
//! Voiculescu transform and Kolmogorov distances.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::measure::{Measure, SignedDensity};

fn check_upper(z: Complex64) -> Result<()> {
    if z.im > 0.0 && z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("Im z must be positive, got z = {z}")))
    }
}

/// G(z) = integral of mu(dx) / (z - x) for Im z > 0.
pub fn cauchy_transform(mu: &Measure, z: Complex64) -> Result<Complex64> {
    check_upper(z)?;
    Ok(mu.as_signed().cauchy(z))
}

/// F(z) = 1 / G(z).
pub fn reciprocal_transform(mu: &Measure, z: Complex64) -> Result<Complex64> {
    Ok(1.0 / cauchy_transform(mu, z)?)
}

/// sqrt(z - a) sqrt(z + a): the branch of sqrt(z^2 - a^2) behaving like z at infinity.
pub fn sqrt_z2_minus(z: Complex64, a: f64) -> Complex64 {
    (z - a).sqrt() * (z + a).sqrt()
}

/// Cauchy transform of the standard semicircle law.
pub fn semicircle_cauchy(z: Complex64) -> Complex64 {
    let s = sqrt_z2_minus(z, 2.0);
    // (z - s) / 2 written without cancellation for large |z|
    2.0 / (z + s)
}

/// A function on the upper half-plane together with a label.
pub trait ComplexEvaluator {
    fn evaluate(&self, z: Complex64) -> Result<Complex64>;
    fn tag(&self) -> String;
}

/// Cauchy transform of a stored measure.
pub struct MeasureCauchy<'a>(pub &'a Measure);

impl ComplexEvaluator for MeasureCauchy<'_> {
    fn evaluate(&self, z: Complex64) -> Result<Complex64> {
        cauchy_transform(self.0, z)
    }
    fn tag(&self) -> String {
        "G[measure]".into()
    }
}

/// Closed-form Cauchy transform of the semicircle law.
pub struct SemicircleCauchy;

impl ComplexEvaluator for SemicircleCauchy {
    fn evaluate(&self, z: Complex64) -> Result<Complex64> {
        check_upper(z)?;
        Ok(semicircle_cauchy(z))
    }
    fn tag(&self) -> String {
        "G[semicircle]".into()
    }
}

/// Closed-form Cauchy transform of the arcsine law on [-a, a].
pub struct ArcsineCauchy {
    pub half_width: f64,
}

impl ComplexEvaluator for ArcsineCauchy {
    fn evaluate(&self, z: Complex64) -> Result<Complex64> {
        check_upper(z)?;
        Ok(1.0 / sqrt_z2_minus(z, self.half_width))
    }
    fn tag(&self) -> String {
        format!("G[arcsine {}]", self.half_width)
    }
}

/// Wraps a closure as an evaluator.
pub struct FnEvaluator<F> {
    pub f: F,
    pub tag: String,
}

impl<F: Fn(Complex64) -> Result<Complex64>> ComplexEvaluator for FnEvaluator<F> {
    fn evaluate(&self, z: Complex64) -> Result<Complex64> {
        (self.f)(z)
    }
    fn tag(&self) -> String {
        self.tag.clone()
    }
}

/// -Im G(x + i eps) / pi.
pub fn invert_density(g: &dyn ComplexEvaluator, x: f64, eps: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument("eps must be positive".into()));
    }
    Ok(-g.evaluate(Complex64::new(x, eps))?.im / PI)
}

/// Distribution function x -> mass of (-inf, x).
#[derive(Debug, Clone)]
pub struct Cdf {
    density: SignedDensity,
}

impl Cdf {
    pub fn eval(&self, x: f64) -> f64 {
        self.density.cdf(x)
    }

    pub fn support(&self) -> (f64, f64) {
        self.density.support()
    }

    pub fn jumps(&self) -> Vec<f64> {
        self.density.atoms().iter().map(|a| a.location).collect()
    }

    pub fn total_mass(&self) -> f64 {
        self.density.total_mass()
    }

    /// Endpoints of the continuous pieces, where the CDF may have a cusp.
    pub fn edges(&self) -> Vec<f64> {
        self.density.pieces().iter().flat_map(|p| [p.lo(), p.hi()]).collect()
    }
}

pub fn cdf_from_density(d: &SignedDensity) -> Cdf {
    Cdf { density: d.clone() }
}

pub fn cdf_of(mu: &Measure) -> Cdf {
    cdf_from_density(mu.as_signed())
}

/// Evaluation grid for Kolmogorov distances: 20001 uniform points over the
/// union of supports widened by one, the support endpoints themselves, and
/// points 1e-12 either side of jumps.
pub fn kolmogorov_grid(supports: &[(f64, f64)], jumps: &[f64]) -> Vec<f64> {
    let lo = supports.iter().map(|s| s.0).fold(f64::INFINITY, f64::min) - 1.0;
    let hi = supports.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max) + 1.0;
    let m = 20001;
    let mut grid: Vec<f64> = (0..m).map(|i| lo + (hi - lo) * i as f64 / (m - 1) as f64).collect();
    for s in supports {
        grid.push(s.0);
        grid.push(s.1);
    }
    for &j in jumps {
        grid.push(j - 1e-12);
        grid.push(j + 1e-12);
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

/// Grid covering both distribution functions, including the edges of their
/// continuous parts (a square-root edge hides the extremum between grid points).
pub fn kolmogorov_grid_for(a: &Cdf, b: &Cdf) -> Vec<f64> {
    let mut jumps = a.jumps();
    jumps.extend(b.jumps());
    let mut grid = kolmogorov_grid(&[a.support(), b.support()], &jumps);
    grid.extend(a.edges());
    grid.extend(b.edges());
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

/// max |f1 - f2| over the grid.
pub fn kolmogorov_distance<F1, F2>(f1: F1, f2: F2, grid: &[f64]) -> Result<f64>
where
    F1: Fn(f64) -> f64,
    F2: Fn(f64) -> f64,
{
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty evaluation grid".into()));
    }
    Ok(grid.iter().map(|&x| (f1(x) - f2(x)).abs()).fold(0.0, f64::max))
}

/// phi(z) = F^{-1}(z) - z, by Newton's method on F(w) = z started at w = z.
pub fn voiculescu_transform(mu: &Measure, z: Complex64, tol: f64) -> Result<Complex64> {
    check_upper(z)?;
    let signed = mu.as_signed();
    let mut w = z;
    for _ in 0..100 {
        let (g, dg) = signed.cauchy_with_derivative(w);
        let f = 1.0 / g;
        let resid = f - z;
        if resid.norm() <= tol {
            return Ok(w - z);
        }
        let df = -dg / (g * g);
        let mut step = resid / df;
        let mut next = w - step;
        let mut damp = 0;
        while next.im <= 0.0 && damp < 60 {
            step *= 0.5;
            next = w - step;
            damp += 1;
        }
        if !(next.re.is_finite() && next.im.is_finite()) {
            break;
        }
        w = next;
    }
    let resid = (1.0 / signed.cauchy(w) - z).norm();
    if resid <= tol {
        Ok(w - z)
    } else {
        Err(Error::NoConvergence(format!("Newton for F(w) = {z} stalled at residual {resid:e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::Measure;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn examples() {
        let b = Measure::bernoulli();
        assert!((cauchy_transform(&b, c(0.0, 1.0)).unwrap() - c(0.0, -0.5)).norm() < 1e-15);
        assert!((reciprocal_transform(&b, c(0.0, 1.0)).unwrap() - c(0.0, 2.0)).norm() < 1e-15);
        let g = cauchy_transform(&Measure::semicircle(), c(0.0, 2.0)).unwrap();
        assert!((g - c(0.0, 1.0 - 2f64.sqrt())).norm() < 1e-14);
        let z = c(0.3, 0.8);
        assert!((cauchy_transform(&Measure::dirac(0.0), z).unwrap() - 1.0 / z).norm() < 1e-15);
        assert!(matches!(cauchy_transform(&b, c(0.0, 0.0)), Err(Error::Domain(_))));
        assert!(matches!(cauchy_transform(&b, c(0.0, -1.0)), Err(Error::Domain(_))));
    }

    #[test]
    fn inversion_of_closed_forms() {
        let v = invert_density(&SemicircleCauchy, 0.0, 1e-12).unwrap();
        assert!((v - 1.0 / PI).abs() < 1e-10);
        assert!(invert_density(&SemicircleCauchy, 3.0, 1e-12).unwrap().abs() < 1e-10);
        let v = invert_density(&ArcsineCauchy { half_width: 2.0 }, 0.0, 1e-12).unwrap();
        assert!((v - 1.0 / (2.0 * PI)).abs() < 1e-10);
    }

    #[test]
    fn cdf_examples() {
        let w = cdf_of(&Measure::semicircle());
        assert!((w.eval(0.0) - 0.5).abs() < 1e-15);
        assert!((w.eval(2.0) - 1.0).abs() < 1e-14);
        let b = cdf_of(&Measure::bernoulli());
        assert_eq!(b.eval(0.0), 0.5);
        assert_eq!(b.eval(-1.0), 0.0);
    }

    #[test]
    fn kolmogorov_examples() {
        let d0 = cdf_of(&Measure::dirac(0.0));
        let d1 = cdf_of(&Measure::dirac(1.0));
        let grid = kolmogorov_grid_for(&d0, &d1);
        assert_eq!(kolmogorov_distance(|x| d0.eval(x), |x| d1.eval(x), &grid).unwrap(), 1.0);
        assert_eq!(kolmogorov_distance(|x| d0.eval(x), |x| d0.eval(x), &grid).unwrap(), 0.0);
        assert!(kolmogorov_distance(|x| x, |x| x, &[]).is_err());
    }

    #[test]
    fn voiculescu_examples() {
        let phi = voiculescu_transform(&Measure::dirac(0.0), c(0.0, 3.0), 1e-12).unwrap();
        assert!(phi.norm() < 1e-12);
        let z = c(0.0, 10.0);
        let phi = voiculescu_transform(&Measure::bernoulli(), z, 1e-12).unwrap();
        assert!((phi - 1.0 / z).norm() <= 0.01 * (1.0 / z).norm() * 10.0);
        // semicircle: phi(z) = 1/z exactly
        let phi = voiculescu_transform(&Measure::semicircle(), c(0.5, 3.0), 1e-13).unwrap();
        assert!((phi - 1.0 / c(0.5, 3.0)).norm() < 1e-12);
    }
}
