//! Estimators against the brute-force oracles on small instances.

use regvar::catalog;
use regvar::linalg::Matrix;
use regvar::oracle::{dense_min_singular, dense_modulus, dense_slope};
use regvar::regularity::{function_slope, linear_surjection_rate, modulus_of_surjection, ModulusQuery, DEFAULT_RADII};
use regvar::rng::{self, domain};
use regvar::semialg::{sample_graph, MapSpec};

fn small_maps() -> Vec<MapSpec> {
    vec![
        catalog::identity(1),
        catalog::scaled_line(2.0),
        catalog::square(),
        catalog::paraboloid(),
        catalog::circle_squared(),
        catalog::punctured_cone(),
        catalog::implicit_bump(),
    ]
}

#[test]
fn modulus_matches_rasterized_image() {
    let (pitch, lambda) = (2e-3, 0.1);
    for spec in small_maps() {
        let points = sample_graph(&spec, 4, 11, 1e-12).unwrap();
        for p in points {
            let q = ModulusQuery::new(p.x.clone(), p.y.clone(), lambda);
            let dense = dense_modulus(&spec, &q, pitch).unwrap();
            let b = modulus_of_surjection(&spec, &q, pitch).unwrap();
            let mid = 0.5 * (b.r_lo + b.r_hi);
            assert!(
                (dense - mid).abs() <= 3.0 * pitch,
                "{} at {p:?}: dense {dense}, bracket {b:?}",
                spec.name()
            );
        }
    }
}

#[test]
fn modulus_examples_with_known_values() {
    let cases = [
        (catalog::identity(1), vec![0.0], vec![0.0], 0.25, 0.25),
        (catalog::punctured_cone(), vec![0.5], vec![0.25], 0.1, 0.25),
        (catalog::scaled_line(2.0), vec![0.0], vec![0.0], 0.1, 0.2),
    ];
    for (spec, x, y, lambda, want) in cases {
        let q = ModulusQuery::new(x, y, lambda);
        let dense = dense_modulus(&spec, &q, 1e-3).unwrap();
        assert!((dense - want).abs() <= 3e-3, "{}: {dense}", spec.name());
    }
}

fn random_matrix(i: u64) -> Matrix {
    let mut s = rng::stream(7, domain::ORACLE, i);
    let m = 1 + (i % 3) as usize;
    let n = 1 + ((i / 3) % 3) as usize;
    let vals: Vec<f64> = (0..m * n).map(|_| rng::uniform(&mut s, -2.0, 2.0)).collect();
    Matrix::from_row_major(m, n, vals)
}

#[test]
fn singular_values_match_sphere_search() {
    for i in 0..50 {
        let a = random_matrix(i);
        let exact = linear_surjection_rate(&a);
        let dense = dense_min_singular(&a, 100_000, i).unwrap();
        assert!((exact - dense).abs() <= 1e-4, "{a}: {exact} vs {dense}");
    }
    for d in [[2.0, 3.0, 0.5], [1.0, 1.0, 1.0], [0.0, 4.0, 2.0]] {
        assert_eq!(linear_surjection_rate(&Matrix::diag(&d)), d.iter().copied().fold(f64::INFINITY, f64::min));
    }
}

#[test]
fn slopes_match_exhaustive_grid() {
    type F = Box<dyn Fn(&[f64]) -> f64 + Sync>;
    let cases: Vec<(F, Vec<f64>, f64)> = vec![
        (Box::new(|u: &[f64]| -u[0].abs()), vec![0.0], 1e-4),
        (Box::new(|u: &[f64]| 3.0 * u[0]), vec![0.3], 1e-4),
        (Box::new(|u: &[f64]| u[0].abs()), vec![0.0], 1e-4),
        (Box::new(|u: &[f64]| 2.0 * u[0] - u[1]), vec![0.1, -0.4], 2e-4),
        (Box::new(|u: &[f64]| -u[0].abs() - 2.0 * u[1].abs()), vec![0.0, 0.0], 2e-4),
        (Box::new(|u: &[f64]| -(u[0] * u[0] + u[1] * u[1]).sqrt()), vec![0.0, 0.0], 2e-4),
    ];
    for (i, (f, x, pitch)) in cases.iter().enumerate() {
        let dense = dense_slope(f.as_ref(), x, DEFAULT_RADII[0], *pitch).unwrap();
        let est = function_slope(f.as_ref(), x, &DEFAULT_RADII, 4096, i as u64).unwrap().slope;
        assert!((dense - est).abs() <= 3.0 * pitch, "case {i}: dense {dense}, estimate {est}");
    }
}
