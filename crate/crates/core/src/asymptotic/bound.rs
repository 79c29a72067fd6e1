use serde::Serialize;

use crate::error::{Error, Result};
use crate::regularity::jacobian_rate;
use crate::rng::{self, domain};

use super::compactification::{compactify_map, CompactificationSpec};
use crate::semialg::MapSpec;

/// Worst observed `sur G(u) / (η(|x|) sur F(x))` on one sphere `|x| = t`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundRow {
    pub radius: f64,
    pub max_ratio: f64,
    pub samples: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompactifiedBoundReport {
    pub factor: f64,
    pub rows: Vec<BoundRow>,
    /// Smallest tested radius from which every row stays within `factor`
    /// (`None` if the last row already fails).
    pub onset: Option<f64>,
}

/// Compares the rate of the compactified map with `η(|x|)` times the rate
/// of a polynomial map on spheres of the given radii (`samples` seeded
/// directions each), and reports where `sur G <= factor η sur F` starts to
/// hold. Points with `sur F = 0` are skipped.
pub fn check_compactified_bound(
    spec: &MapSpec,
    c: &CompactificationSpec,
    radii: &[f64],
    samples: usize,
    factor: f64,
    seed: u64,
) -> Result<CompactifiedBoundReport> {
    let f = spec
        .functional()
        .ok_or_else(|| Error::InvalidInput("compactified bound needs a polynomial map".into()))?;
    let g = compactify_map(spec, c);
    let mut rows = Vec::with_capacity(radii.len());
    for (k, &t) in radii.iter().enumerate() {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidInput(format!("radius {t} must be positive")));
        }
        let mut worst = 0.0f64;
        let mut used = 0;
        for i in 0..samples {
            let mut s = rng::stream(seed, domain::SHELL, (k * samples + i) as u64);
            let x: Vec<f64> = rng::unit_vector(&mut s, spec.n()).iter().map(|d| t * d).collect();
            let sur_f = jacobian_rate(f, &x)?;
            if sur_f <= 0.0 {
                continue;
            }
            let sur_g = g.rate(&g.to_u(&x)?)?;
            worst = worst.max(sur_g / (c.eta(t) * sur_f));
            used += 1;
        }
        rows.push(BoundRow {
            radius: t,
            max_ratio: worst,
            samples: used,
        });
    }
    let mut onset = None;
    for row in rows.iter().rev() {
        if row.max_ratio <= factor {
            onset = Some(row.radius);
        } else {
            break;
        }
    }
    Ok(CompactifiedBoundReport { factor, rows, onset })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asymptotic::default_compactification;
    use crate::catalog;

    #[test]
    fn bound_holds_for_the_paraboloid() {
        let radii = [1.0, 10.0, 100.0];
        let rep = check_compactified_bound(&catalog::paraboloid(), &default_compactification(), &radii, 16, 3.0, 0)
            .unwrap();
        assert_eq!(rep.onset, Some(1.0));
        assert!(rep.rows.iter().all(|r| r.max_ratio <= 1.0 + 1e-9));
    }
}
