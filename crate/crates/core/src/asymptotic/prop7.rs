use rayon::prelude::*;

use crate::error::{check_dim, Result};
use crate::regularity::{at_most, surjection_rate, CheckReport, RateConfig};
use crate::semialg::{norm, GraphPoint, MapSpec, PolyMap, Polynomial};

/// `x -> ρ(x) x`.
pub fn radial_map(rho: &Polynomial) -> Result<PolyMap> {
    let n = rho.num_vars();
    PolyMap::new((0..n).map(|i| rho * &Polynomial::var(n, i)).collect())
}

/// `sur L(x|y) <= (ρ(x) + |∇ρ(x)| |x|) sur H(ρ(x) x | y)` for
/// `L(x) = H(ρ(x) x)` at graph points `(x, y)` of `L`. `ρ` is a positive
/// polynomial; `domain` is the sampling box for `x`.
pub fn check_prop7_bound(
    h: &MapSpec,
    rho: &Polynomial,
    domain: Vec<(f64, f64)>,
    points: &[GraphPoint],
    tol: f64,
    cfg: &RateConfig,
    seed: u64,
) -> Result<CheckReport> {
    check_dim(h.n(), rho.num_vars())?;
    let g = radial_map(rho)?;
    let l = h.precompose(&g, domain)?;
    let grad = rho.gradient();
    let rows = points
        .par_iter()
        .map(|p| {
            check_dim(h.n(), p.x.len())?;
            let r = rho.value(&p.x);
            let dr: Vec<f64> = grad.iter().map(|d| d.value(&p.x)).collect();
            let factor = r + norm(&dr) * norm(&p.x);
            let gx = g.value(&p.x);
            let sur_h = surjection_rate(h, &gx, &p.y, cfg, seed)?;
            let sur_l = surjection_rate(&l, &p.x, &p.y, cfg, seed)?;
            Ok(at_most(
                "radial",
                p,
                sur_l.sur_estimate,
                factor * sur_h.sur_estimate,
                sur_l.slack + factor * sur_h.slack,
                tol,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CheckReport {
        name: "radial-bound".into(),
        tol,
        rows,
    })
}
