//! Free entropy, logarithmic energy, free Fisher information and L1
//! distances between densities, plus their behaviour along the free CLT.
//!
//! Logarithmic integrals use the Chebyshev expansion of each piece, where
//! log|x - u| has an exact series, so no singular quadrature is needed.

use rayon::prelude::*;
use std::f64::consts::PI;

use crate::edgeworth::semicircle_density;
use crate::error::{Error, Result};
use crate::measure::Measure;
use crate::quadrature;
use crate::subordination::clt_measure;

/// chi of the standard semicircle, 1/2 log(2 pi e).
pub fn semicircle_entropy() -> f64 {
    0.5 * (2.0 * PI * std::f64::consts::E).ln()
}

fn reject_atoms(mu: &Measure) -> Result<()> {
    if let Some(a) = mu.atoms().first() {
        return Err(Error::SingularInput(format!(
            "atom at {} makes the logarithmic integral diverge",
            a.location
        )));
    }
    Ok(())
}

/// Integral of log|x - u| mu(du).
pub fn log_potential(mu: &Measure, x: f64) -> Result<f64> {
    reject_atoms(mu)?;
    Ok(mu.pieces().iter().map(|p| p.log_potential(x)).sum())
}

/// Integral of u log|x - u| mu(du).
pub fn log_potential_first_moment(mu: &Measure, x: f64) -> Result<f64> {
    reject_atoms(mu)?;
    Ok(mu
        .pieces()
        .iter()
        .map(|p| p.map_values(|u, v| u * v).log_potential(x))
        .sum())
}

/// Double integral of log|x - y| mu(dx) mu(dy).
fn double_log_integral(mu: &Measure) -> Result<f64> {
    reject_atoms(mu)?;
    let pieces = mu.pieces();
    let mut total = 0.0;
    for (i, pi) in pieces.iter().enumerate() {
        total += pi.self_log_integral();
        for pj in &pieces[i + 1..] {
            total += 2.0 * pi.integrate(|x| pj.log_potential(x));
        }
    }
    Ok(total)
}

/// E(mu) = -integral log|x - y| mu(dx) mu(dy).
pub fn log_energy(mu: &Measure) -> Result<f64> {
    Ok(-double_log_integral(mu)?)
}

/// chi(mu) = integral log|x - y| mu(dx) mu(dy) + 3/4 + 1/2 log(2 pi).
pub fn free_entropy(mu: &Measure) -> Result<f64> {
    Ok(double_log_integral(mu)? + 0.75 + 0.5 * (2.0 * PI).ln())
}

/// Phi(mu) = (4 pi^2 / 3) integral p^3; infinite with atoms or
/// inverse-square-root edges.
pub fn fisher_info(mu: &Measure) -> f64 {
    if !mu.atoms().is_empty() {
        return f64::INFINITY;
    }
    let cube: f64 = mu.pieces().iter().map(|p| p.cube_integral()).sum();
    4.0 * PI * PI / 3.0 * cube
}

/// Integral of |p1 - p2| over `support`.
///
/// `breakpoints` mark known kinks (support edges of either density); each
/// segment between them is scanned for sign changes of p1 - p2, which are
/// refined and used as further integration limits.
pub fn l1_distance<F1, F2>(p1: F1, p2: F2, support: (f64, f64), breakpoints: &[f64]) -> f64
where
    F1: Fn(f64) -> f64,
    F2: Fn(f64) -> f64,
{
    let (lo, hi) = support;
    if !(hi > lo) {
        return 0.0;
    }
    let diff = |x: f64| p1(x) - p2(x);
    let mut cuts: Vec<f64> = breakpoints.iter().copied().filter(|b| *b > lo && *b < hi).collect();
    cuts.push(lo);
    cuts.push(hi);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let samples = 2000;
    let mut limits = vec![lo];
    for seg in cuts.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        let mut prev_x = a + (b - a) * 0.5 / samples as f64;
        let mut prev = diff(prev_x);
        for i in 1..samples {
            let x = a + (b - a) * (i as f64 + 0.5) / samples as f64;
            let d = diff(x);
            if prev != 0.0 && d != 0.0 && (prev < 0.0) != (d < 0.0) {
                limits.push(quadrature::brent(diff, prev_x, x, 1e-14 * (1.0 + x.abs())));
            }
            prev_x = x;
            prev = d;
        }
        limits.push(b);
    }
    limits
        .windows(2)
        .map(|w| quadrature::integrate_cos(|x| diff(x).abs(), w[0], w[1], 4))
        .sum()
}

/// Grid and inversion settings for entropy sweeps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSettings {
    pub grid_n: usize,
    pub eps: f64,
    /// Recompute chi with doubled grid and eps and require a change below 1e-5.
    pub convergence_guard: bool,
}

impl Default for SweepSettings {
    fn default() -> Self {
        Self { grid_n: 8001, eps: 1e-8, convergence_guard: true }
    }
}

/// Largest mass removed by clipping negative inversion noise.
pub const CLIP_TOL: f64 = 1e-8;
/// Largest admissible chi change under the convergence guard.
pub const GUARD_TOL: f64 = 1e-5;

/// Entropy-type functionals of mu_n and their rescaled gaps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyReport {
    pub n: u64,
    pub chi: f64,
    pub log_energy: f64,
    pub fisher: f64,
    pub l1_to_semicircle: f64,
    /// n (chi(w) - chi(mu_n)), tends to m3^2 / 6.
    pub gap_chi: f64,
    /// n (Phi(mu_n) - 1), tends to m3^2.
    pub gap_fisher: f64,
    /// sqrt(n) L1 when m3 != 0, else n L1.
    pub gap_l1: f64,
}

fn report_for(mu: &Measure, n: u64, settings: &SweepSettings, skewed: bool) -> Result<EntropyReport> {
    let clt = clt_measure(mu, n, settings.grid_n, settings.eps)?;
    if clt.clipped_mass > CLIP_TOL {
        return Err(Error::Accuracy(format!(
            "clipped mass {:e} at n = {n} exceeds {CLIP_TOL:e}",
            clt.clipped_mass
        )));
    }
    let mun = &clt.measure;
    let chi = free_entropy(mun)?;
    if settings.convergence_guard {
        let fine = clt_measure(mu, n, 2 * settings.grid_n - 1, 2.0 * settings.eps)?;
        let chi_fine = free_entropy(&fine.measure)?;
        if (chi_fine - chi).abs() >= GUARD_TOL {
            return Err(Error::Accuracy(format!(
                "chi moved by {:e} under grid/eps doubling at n = {n}",
                chi_fine - chi
            )));
        }
    }
    let fisher = fisher_info(mun);
    let (lo, hi) = mun.support();
    let mut breaks: Vec<f64> = mun.pieces().iter().flat_map(|p| [p.lo(), p.hi()]).collect();
    breaks.extend([-2.0, 2.0]);
    let l1 = l1_distance(|x| mun.density(x), semicircle_density, (lo.min(-2.0), hi.max(2.0)), &breaks);
    let nf = n as f64;
    Ok(EntropyReport {
        n,
        chi,
        log_energy: -(chi - 0.75 - 0.5 * (2.0 * PI).ln()),
        fisher,
        l1_to_semicircle: l1,
        gap_chi: nf * (semicircle_entropy() - chi),
        gap_fisher: nf * (fisher - 1.0),
        gap_l1: if skewed { nf.sqrt() * l1 } else { nf * l1 },
    })
}

/// Entropy reports for each n, computed in parallel, in input order.
pub fn clt_entropy_sweep(mu: &Measure, ns: &[u64], settings: &SweepSettings) -> Result<Vec<EntropyReport>> {
    if mu.atoms().len() == 1 && mu.pieces().is_empty() {
        return Err(Error::DegenerateMeasure("Dirac measure has no CLT".into()));
    }
    let skewed = mu.moment(3).abs() > 1e-10;
    ns.par_iter().map(|&n| report_for(mu, n, settings, skewed)).collect()
}

/// Relative spread of successive gaps, max |g_{i+1} - g_i| / |g_{i+1}|.
pub fn successive_spread(gaps: &[f64]) -> f64 {
    gaps.windows(2)
        .map(|w| (w[1] - w[0]).abs() / w[1].abs())
        .fold(0.0, f64::max)
}
