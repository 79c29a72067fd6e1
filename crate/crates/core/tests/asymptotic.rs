use regvar::asymptotic::{asymptotic_scan, AsymptoticConfig, AsymptoticScanResult, Eta};
use regvar::catalog;
use regvar::critical::{box_counting_dimension, dyadic_scales};
use regvar::linalg::Matrix;
use regvar::semialg::MapSpec;

fn maps() -> Vec<MapSpec> {
    vec![
        catalog::identity(1),
        catalog::scaled_line(2.0),
        catalog::implicit_bump(),
        catalog::linear(&Matrix::from_rows(&[vec![1.0, 0.0]]).unwrap()),
        catalog::linear(&Matrix::from_rows(&[vec![1.0, 1.0]]).unwrap()),
    ]
}

fn scan(spec: &MapSpec, eta: &Eta) -> AsymptoticScanResult {
    let cfg = AsymptoticConfig {
        per_shell_budget: 120,
        ..Default::default()
    };
    asymptotic_scan(spec, eta, &cfg, 5).unwrap()
}

fn near(a: &[f64], b: &[f64], r: f64) -> bool {
    a.iter().zip(b).map(|(u, v)| (u - v).powi(2)).sum::<f64>().sqrt() <= r
}

#[test]
fn heavier_weight_finds_no_new_candidates() {
    for spec in maps() {
        let light = scan(&spec, &Eta::Linear);
        let heavy = scan(&spec, &Eta::PhiDefault);
        for c in &heavy.candidates {
            assert!(
                light.candidates.iter().any(|d| near(&c.y, &d.y, 0.05)),
                "{}: {:?} not found under the linear weight",
                spec.name(),
                c.y
            );
        }
    }
}

#[test]
fn candidate_sets_are_small() {
    for spec in maps() {
        let res = scan(&spec, &Eta::Linear);
        if res.candidates.is_empty() {
            continue;
        }
        let ys: Vec<Vec<f64>> = res.candidates.iter().map(|c| c.y.clone()).collect();
        let fit = box_counting_dimension(&ys, &dyadic_scales(&ys, 2, 7)).unwrap();
        assert!(fit.dimension <= spec.m() as f64 - 1.0 + 0.25, "{}: {fit:?}", spec.name());
    }
}
