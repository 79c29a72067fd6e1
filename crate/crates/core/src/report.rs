//! CSV tables for the analysis results. Every table has a header row,
//! uses `.` as decimal separator and prints floats in shortest round-trip
//! form, so equal results give byte-identical files.

use std::path::Path;

use crate::asymptotic::{AsymptoticScanResult, CompactifiedBoundReport};
use crate::critical::{ComponentReport, CriticalScanResult, DimensionFit, PorosityReport};
use crate::error::Result;
use crate::regularity::{CheckReport, RegularityEstimate};

fn coords(prefix: &str, k: usize) -> Vec<String> {
    (0..k).map(|i| format!("{prefix}{i}")).collect()
}

fn num(v: f64) -> String {
    format!("{v}")
}

fn nums(v: &[f64]) -> impl Iterator<Item = String> + '_ {
    v.iter().map(|x| num(*x))
}

fn table(header: Vec<String>, rows: Vec<Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header).map_err(std::io::Error::from)?;
    for r in rows {
        w.write_record(&r).map_err(std::io::Error::from)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// `delta,sur_estimate` per level.
pub fn rate_csv(est: &RegularityEstimate) -> Result<String> {
    let rows = est
        .deltas
        .iter()
        .zip(&est.values)
        .map(|(d, v)| vec![num(*d), num(*v)])
        .collect();
    table(vec!["delta".into(), "sur_estimate".into()], rows)
}

/// One row per flagged graph point.
pub fn flagged_csv(res: &CriticalScanResult, n: usize, m: usize) -> Result<String> {
    let mut header = coords("x", n);
    header.extend(coords("y", m));
    header.extend(["rate".into(), "method".into(), "strict".into()]);
    let rows = res
        .flagged
        .iter()
        .map(|f| {
            let mut r: Vec<String> = nums(&f.point.x).chain(nums(&f.point.y)).collect();
            r.extend([num(f.rate), f.method.as_str().into(), f.strict.to_string()]);
            r
        })
        .collect();
    table(header, rows)
}

/// Flagged values, one per row.
pub fn values_csv(res: &CriticalScanResult, m: usize) -> Result<String> {
    let rows = res.values.iter().map(|v| nums(v).collect()).collect();
    table(coords("y", m), rows)
}

pub fn dimension_csv(fit: &DimensionFit) -> Result<String> {
    let rows = fit
        .scales
        .iter()
        .zip(&fit.counts)
        .zip(&fit.used)
        .map(|((e, c), u)| vec![num(*e), c.to_string(), u.to_string()])
        .collect();
    table(vec!["eps".into(), "count".into(), "used".into()], rows)
}

/// The holes found at each tested (point, radius) pair.
pub fn porosity_csv(rep: &PorosityReport) -> Result<String> {
    let rows = rep
        .holes
        .iter()
        .map(|(point, r, hole)| vec![point.to_string(), num(*r), num(*hole), num(hole / r)])
        .collect();
    table(
        vec!["point".into(), "radius".into(), "hole".into(), "ratio".into()],
        rows,
    )
}

pub fn components_csv(rep: &ComponentReport) -> Result<String> {
    let rows = rep
        .components
        .iter()
        .enumerate()
        .map(|(i, c)| {
            vec![
                i.to_string(),
                c.points.len().to_string(),
                num(c.value),
                num(c.min_value),
                num(c.max_value),
                num(c.spread),
            ]
        })
        .collect();
    table(
        ["component", "points", "value", "min_value", "max_value", "spread"]
            .map(String::from)
            .to_vec(),
        rows,
    )
}

/// The per-shell, per-cluster weighted minima of an asymptotic scan.
pub fn shells_csv(res: &AsymptoticScanResult) -> Result<String> {
    let rows = res
        .table
        .iter()
        .map(|r| {
            let (lo, hi) = res.shells[r.shell];
            vec![
                r.shell.to_string(),
                num(lo),
                num(hi),
                r.cluster.to_string(),
                num(r.min_weighted_rate),
                r.points.to_string(),
            ]
        })
        .collect();
    table(
        ["shell", "r_lo", "r_hi", "cluster", "min_weighted_rate", "points"]
            .map(String::from)
            .to_vec(),
        rows,
    )
}

pub fn candidates_csv(res: &AsymptoticScanResult, m: usize) -> Result<String> {
    let mut header = vec!["cluster".to_string()];
    header.extend(coords("y", m));
    header.push("decay_trace".into());
    let rows = res
        .candidates
        .iter()
        .map(|c| {
            let mut r = vec![c.cluster.to_string()];
            r.extend(nums(&c.y));
            r.push(nums(&c.decay_trace).collect::<Vec<_>>().join(" "));
            r
        })
        .collect();
    table(header, rows)
}

pub fn bound_csv(rep: &CompactifiedBoundReport) -> Result<String> {
    let rows = rep
        .rows
        .iter()
        .map(|r| vec![num(r.radius), num(r.max_ratio), r.samples.to_string()])
        .collect();
    table(vec!["radius".into(), "max_ratio".into(), "samples".into()], rows)
}

/// Rows of one or more checker reports.
pub fn calculus_csv(reports: &[CheckReport]) -> Result<String> {
    let rows = reports
        .iter()
        .flat_map(|rep| {
            rep.rows.iter().map(move |r| {
                let join = |v: &[f64]| nums(v).collect::<Vec<_>>().join(" ");
                vec![
                    rep.name.clone(),
                    r.label.clone(),
                    join(&r.x),
                    join(&r.y),
                    num(r.lhs),
                    num(r.rhs),
                    num(r.slack),
                    r.pass.to_string(),
                ]
            })
        })
        .collect();
    table(
        ["check", "label", "x", "y", "lhs", "rhs", "slack", "pass"]
            .map(String::from)
            .to_vec(),
        rows,
    )
}

/// Writes `contents` to `dir/name`, creating `dir` if needed.
pub fn write_table(dir: &Path, name: &str, contents: &str) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(name), contents)?;
    Ok(())
}
