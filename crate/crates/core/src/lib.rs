//! Numerics for the free central limit theorem.

pub mod cheb;
pub mod edgeworth;
pub mod entropy;
pub mod error;
pub mod experiment;
pub mod formal_series;
pub mod measure;
pub mod meixner;
pub mod quadrature;
pub mod subordination;
pub mod transform;

pub use error::{Error, Result};
pub use measure::{cumulants_from_moments, Atom, Measure, MomentSummary, SignedDensity};
