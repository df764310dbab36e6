//! Centred free Meixner laws mu_{a,b,d}, the CLT parameterisation
//! (a_n, b_n, d_n, e_n), the signed correction varsigma_n and kappa_n.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::cheb::ChebPiece;
use crate::error::{Error, Result};
use crate::measure::{Atom, Measure, MomentSummary, SignedDensity, DEFAULT_GRID};
use crate::transform::sqrt_z2_minus;

const ATOM_CUTOFF: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeixnerParams {
    pub a: f64,
    pub b: f64,
    pub d: f64,
}

impl MeixnerParams {
    pub fn new(a: f64, b: f64, d: f64) -> Result<Self> {
        if !(a.is_finite() && b < 1.0 && d < 1.0 && b.is_finite() && d.is_finite()) {
            return Err(Error::InvalidArgument(format!("need b < 1 and d < 1, got ({a}, {b}, {d})")));
        }
        Ok(Self { a, b, d })
    }

    /// Half-width of the continuous support, 2 sqrt(1 - d) / (1 - b).
    pub fn radius(&self) -> f64 {
        2.0 * (1.0 - self.d).sqrt() / (1.0 - self.b)
    }

    pub fn support(&self) -> (f64, f64) {
        (self.a - self.radius(), self.a + self.radius())
    }

    /// f(x) = b x^2 + a (1 - b) x + 1 - d.
    pub fn f(&self, x: f64) -> f64 {
        self.b * x * x + self.a * (1.0 - self.b) * x + 1.0 - self.d
    }

    /// Subfamily name.
    pub fn label(&self) -> &'static str {
        let (a, b, d) = (self.a, self.b, self.d);
        if a == 0.0 && b == 0.0 && d == 0.0 {
            return "semicircle";
        }
        if b == 0.0 {
            return if a == 0.0 {
                "scaled semicircle"
            } else if d == 0.0 {
                "free Poisson"
            } else {
                "shifted free Poisson"
            };
        }
        if b > 0.0 {
            let disc = a * a * (1.0 - b) * (1.0 - b) - 4.0 * b * (1.0 - d);
            return if disc > 0.0 {
                "free Pascal"
            } else if disc == 0.0 {
                "free gamma"
            } else {
                "pure free Meixner"
            };
        }
        "free Meixner"
    }

    /// 1/G(z) = a + ((1 + b)(z - a) + sqrt((1 - b)^2 (z - a)^2 - 4(1 - d))) / 2.
    pub fn reciprocal_cauchy(&self, z: Complex64) -> Complex64 {
        let w = z - self.a;
        let s = (1.0 - self.b) * sqrt_z2_minus(w, self.radius());
        self.a + 0.5 * ((1.0 + self.b) * w + s)
    }

    pub fn cauchy(&self, z: Complex64) -> Complex64 {
        1.0 / self.reciprocal_cauchy(z)
    }

    fn raw_density(&self, x: f64) -> f64 {
        let u = 4.0 * (1.0 - self.d) - (1.0 - self.b).powi(2) * (x - self.a).powi(2);
        if u <= 0.0 {
            return 0.0;
        }
        u.sqrt() / (2.0 * PI * self.f(x))
    }

    fn roots(&self) -> Vec<f64> {
        let (a, b, d) = (self.a, self.b, self.d);
        if b == 0.0 {
            return if a != 0.0 { vec![-(1.0 - d) / a] } else { vec![] };
        }
        let p = a * (1.0 - b);
        let disc = p * p - 4.0 * b * (1.0 - d);
        if disc < 0.0 {
            return vec![];
        }
        let q = -0.5 * (p + p.signum() * disc.sqrt());
        if q == 0.0 {
            return vec![0.0];
        }
        vec![q / b, (1.0 - d) / q]
    }

    /// Rejects parameters for which f vanishes strictly inside the support.
    pub fn check_regular(&self) -> Result<()> {
        let (lo, hi) = self.support();
        for y in self.roots() {
            if y > lo && y < hi {
                return Err(Error::SingularParameter(format!(
                    "f vanishes at {y}, inside [{lo}, {hi}]"
                )));
            }
        }
        Ok(())
    }
}

/// Density of the continuous part of mu_{a,b,d} at x.
pub fn meixner_density(p: &MeixnerParams, x: f64) -> Result<f64> {
    let (lo, hi) = p.support();
    if x <= lo || x >= hi {
        return Ok(0.0);
    }
    let f = p.f(x);
    if f <= 0.0 {
        return Err(Error::SingularParameter(format!("f({x}) = {f} inside the support")));
    }
    Ok(p.raw_density(x))
}

/// Atoms of mu_{a,b,d}; weights below 1e-14 are dropped.
pub fn meixner_atoms(p: &MeixnerParams) -> Vec<Atom> {
    let (a, b, d) = (p.a, p.b, p.d);
    let mut atoms: Vec<Atom> = if b == 0.0 {
        if a == 0.0 {
            vec![]
        } else {
            let y = -(1.0 - d) / a;
            vec![Atom::new(y, (1.0 - (1.0 - d) / (a * a)).max(0.0))]
        }
    } else {
        let disc = a * a * (1.0 - b) * (1.0 - b) - 4.0 * b * (1.0 - d);
        if disc <= 0.0 {
            vec![]
        } else {
            p.roots()
                .into_iter()
                .map(|y| Atom::new(y, ((1.0 - d) / y.abs() - y.abs()).max(0.0) / disc.sqrt()))
                .collect()
        }
    };
    atoms.retain(|at| at.weight >= ATOM_CUTOFF);
    atoms.sort_by(|x, y| x.location.total_cmp(&y.location));
    atoms
}

/// mu_{a,b,d} with its continuous part on `grid_n` nodes.
pub fn meixner_measure(p: &MeixnerParams, grid_n: usize) -> Result<Measure> {
    p.check_regular()?;
    let (lo, hi) = p.support();
    let piece = ChebPiece::from_fn(lo, hi, grid_n, |x| p.raw_density(x).max(0.0));
    Measure::new(meixner_atoms(p), vec![piece]).map_err(|e| match e {
        Error::InvalidArgument(msg) => Error::Accuracy(format!("{msg}; increase grid_n")),
        other => other,
    })
}

/// Parameters (a_n, b_n, d_n, e_n) of the Meixner approximation to mu_n.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CltParams {
    pub n: u64,
    pub a: f64,
    pub b: f64,
    pub d: f64,
    pub e: f64,
}

impl CltParams {
    pub fn meixner(&self) -> MeixnerParams {
        MeixnerParams {
            a: self.a,
            b: self.b,
            d: self.d,
        }
    }

    /// m_3 recovered from a_n.
    pub fn m3(&self) -> f64 {
        self.a * (self.n as f64).sqrt()
    }

    /// m_4 recovered from d_n and a_n.
    pub fn m4(&self) -> f64 {
        let n = self.n as f64;
        n * self.d + n * self.a * self.a
    }

    /// 0 <= b_n <= 1/3, 0 < d_n <= 1/3, |a_n| <= 1/sqrt 3.
    pub fn satisfies_bounds(&self) -> bool {
        let tol = 1e-12;
        self.b >= -tol
            && self.b <= 1.0 / 3.0 + tol
            && self.d > 0.0
            && self.d <= 1.0 / 3.0 + tol
            && self.a.abs() <= 1.0 / 3f64.sqrt() + tol
    }
}

/// a_n = m3/sqrt n, b_n = (m4 - m3^2 - 1)/n, d_n = (m4 - m3^2)/n,
/// e_n = (1 - b_n)/sqrt(1 - d_n).
pub fn clt_params(ms: &MomentSummary, n: u64) -> Result<CltParams> {
    if ms.moments.len() < 5 {
        return Err(Error::InvalidArgument("need moments up to order 4".into()));
    }
    if n < 1 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    let (m1, m2, m3, m4) = (ms.moments[1], ms.moments[2], ms.moments[3], ms.moments[4]);
    if m1.abs() > 1e-8 || (m2 - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidArgument("moments must be standardised".into()));
    }
    let gap = m4 - 1.0 - m3 * m3;
    if gap < -1e-10 * m4.abs().max(1.0) {
        return Err(Error::MomentInequality(format!("m4 - 1 - m3^2 = {gap} < 0")));
    }
    let gap = gap.max(0.0);
    let nf = n as f64;
    let a = m3 / nf.sqrt();
    let b = gap / nf;
    let d = (gap + 1.0) / nf;
    if d >= 1.0 {
        return Err(Error::InvalidArgument(format!("n = {n} too small: d_n = {d} >= 1")));
    }
    let e = (1.0 - b) / (1.0 - d).sqrt();
    Ok(CltParams { n, a, b, d, e })
}

/// Semicircle density p_w.
fn pw(x: f64) -> f64 {
    (4.0 - x * x).max(0.0).sqrt() / (2.0 * PI)
}

/// varsigma_n(x) = (e^2 (x - a)^2 - 1) p_w(e (x - a)).
pub fn varsigma_density(p: &CltParams, x: f64) -> f64 {
    let u = p.e * (x - p.a);
    (u * u - 1.0) * pw(u)
}

/// kappa_n = mu_{a_n,b_n,d_n} + varsigma_n / n.
#[derive(Debug, Clone)]
pub struct KappaMeasure {
    pub density: SignedDensity,
    pub is_probability: bool,
}

pub fn kappa_measure(p: &CltParams, grid_n: usize) -> Result<KappaMeasure> {
    if (p.n as f64) <= p.m4() {
        return Err(Error::InvalidArgument(format!(
            "kappa_n needs n > m4, got n = {} and m4 = {}",
            p.n,
            p.m4()
        )));
    }
    let mp = p.meixner();
    mp.check_regular()?;
    let (lo, hi) = mp.support();
    let inv_n = 1.0 / p.n as f64;
    let piece = ChebPiece::from_fn(lo, hi, grid_n, |x| mp.raw_density(x) + inv_n * varsigma_density(p, x));
    let atoms = meixner_atoms(&mp);
    let is_probability =
        piece.values().iter().all(|v| *v >= -1e-12) && atoms.iter().all(|a| a.weight >= 0.0);
    Ok(KappaMeasure {
        density: SignedDensity::new(atoms, vec![piece])?,
        is_probability,
    })
}

/// Meixner parameters as given in JSON: explicit or derived from a measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MeixnerChoice {
    Params { a: f64, b: f64, d: f64 },
    CltOf { clt_of: serde_json::Value, n: u64 },
}

impl MeixnerChoice {
    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn resolve(&self) -> Result<MeixnerParams> {
        match self {
            MeixnerChoice::Params { a, b, d } => MeixnerParams::new(*a, *b, *d),
            MeixnerChoice::CltOf { clt_of, n } => {
                let mu = match clt_of {
                    serde_json::Value::String(name) => Measure::preset(name)?,
                    other => Measure::from_json_str(&other.to_string())?,
                };
                let ms = mu.standardize()?.moment_summary(4, &[])?;
                Ok(clt_params(&ms, *n)?.meixner())
            }
        }
    }
}

/// Convenience: Meixner law of the CLT parameters on the default grid.
pub fn clt_meixner_measure(p: &CltParams) -> Result<Measure> {
    meixner_measure(&p.meixner(), DEFAULT_GRID)
}
