//! Numerical metric regularity for set-valued mappings with semialgebraic
//! graphs.
//!
//! The crate estimates the modulus and rate of surjection of a mapping
//! `F: R^n ⇉ R^m`, its reciprocal (the rate of metric regularity), slopes,
//! and scans graphs for critical and asymptotically critical values. The
//! analytics in [`critical`] and [`asymptotic`] (box-counting dimension,
//! porosity, constancy on components) test Sard-type conclusions on
//! sampled data.
//!
//! Modules:
//!
//! * [`semialg`]: polynomials, formulas, map specs, graph sampling.
//! * [`regularity`]: modulus/rate of surjection, slopes, linear formulas and
//!   checkers for the sum, chain and radial-substitution inequalities.
//! * [`critical`]: critical-value scans, box counting, porosity, components.
//! * [`asymptotic`]: radial compactification and asymptotic scans.
//! * [`oracle`]: brute-force references used to cross-check estimators.
//! * [`catalog`]: the bundled example maps.
//! * [`report`]: CSV writers shared by the command-line front end.

pub mod asymptotic;
pub mod catalog;
pub mod critical;
mod error;
pub mod linalg;
pub mod oracle;
pub mod regularity;
pub mod report;
pub mod rng;
pub mod semialg;
mod spatial;

pub use error::{Error, Result};
