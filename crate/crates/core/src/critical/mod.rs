//! Critical-value scans and the analytics applied to their output:
//! box-counting dimension, porosity, and constancy of a function on the
//! connected components of its critical set.

mod components;
mod dimension;
mod porosity;
mod scan;

pub use components::{component_constancy, default_linking_radius, Component, ComponentReport};
pub use dimension::{box_counting_dimension, dyadic_scales, DimensionFit};
pub use porosity::{porosity_scan, PorosityReport, MAX_TESTED_POINTS};
pub use scan::{scan_critical_values, CriticalScanResult, FlaggedPoint, ScanConfig};
