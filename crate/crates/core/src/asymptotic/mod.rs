//! Behavior at infinity: the radial compactification, the radial
//! substitution bound, and scans for asymptotically critical values.

mod bound;
mod compactification;
mod prop7;
mod scan;

pub use bound::{check_compactified_bound, BoundRow, CompactifiedBoundReport};
pub use compactification::{compactify_map, default_compactification, CompactificationSpec, CompactifiedMap, Eta};
pub use prop7::{check_prop7_bound, radial_map};
pub use scan::{asymptotic_scan, default_shells, AsymptoticConfig, AsymptoticScanResult, Candidate, ShellRow};
