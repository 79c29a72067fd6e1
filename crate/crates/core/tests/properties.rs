use proptest::prelude::*;

use regvar::catalog;
use regvar::linalg::Matrix;
use regvar::regularity::{
    jacobian_rate, linear_surjection_rate, map_slope, modulus_of_surjection, ModulusQuery, DEFAULT_RADII,
};
use regvar::semialg::{sample_graph, Formula, PolyMap, Polynomial};

fn poly2() -> impl Strategy<Value = Polynomial> {
    prop::collection::vec((-2.0f64..2.0, 0u32..3, 0u32..3), 1..6)
        .prop_map(|terms| Polynomial::new(2, terms.into_iter().map(|(c, a, b)| (c, vec![a, b]))).unwrap())
}

fn strict_formula() -> impl Strategy<Value = Formula> {
    let leaf = (poly2(), any::<bool>()).prop_map(|(p, lt)| if lt { Formula::lt(p) } else { Formula::le(p) });
    leaf.prop_recursive(3, 12, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 1..3).prop_map(|c| Formula::and(c).unwrap()),
            prop::collection::vec(inner.clone(), 1..3).prop_map(|c| Formula::or(c).unwrap()),
            inner.prop_map(Formula::not),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn negation_is_complement(f in strict_formula(), x in -2.0f64..2.0, y in -2.0f64..2.0) {
        let z = [x, y];
        let neg = Formula::not(f.clone());
        prop_assert_eq!(neg.contains(&z, 0.0), !f.contains(&z, 0.0));
        prop_assert_eq!(neg.compile().contains(&z, 0.0), !f.compile().contains(&z, 0.0));
    }

    #[test]
    fn derivative_matches_differences(p in poly2(), x in -1.0f64..1.0, y in -1.0f64..1.0) {
        let h = 1e-5;
        for i in 0..2 {
            let mut hi = [x, y];
            let mut lo = [x, y];
            hi[i] += h;
            lo[i] -= h;
            let fd = (p.value(&hi) - p.value(&lo)) / (2.0 * h);
            let exact = p.derivative(i).unwrap().value(&[x, y]);
            prop_assert!((fd - exact).abs() <= 1e-6 * (1.0 + exact.abs()), "{} vs {}", fd, exact);
        }
    }

    #[test]
    fn linear_rate_scales(vals in prop::collection::vec(-3.0f64..3.0, 6), c in -4.0f64..4.0, theta in 0.0f64..6.3) {
        let a = Matrix::from_row_major(2, 3, vals);
        let base = linear_surjection_rate(&a);
        let scaled = linear_surjection_rate(&a.scale(c));
        prop_assert!((scaled - c.abs() * base).abs() <= 1e-9 * (1.0 + scaled));
        let q = Matrix::from_rows(&[vec![theta.cos(), -theta.sin()], vec![theta.sin(), theta.cos()]]).unwrap();
        let rotated = linear_surjection_rate(&q.matmul(&a));
        prop_assert!((rotated - base).abs() <= 1e-9 * (1.0 + base));
    }

    #[test]
    fn modulus_grows_with_lambda(x1 in -0.8f64..0.8, x2 in -0.8f64..0.8, l in 0.01f64..0.1) {
        let spec = catalog::diagonal(&[2.0, 3.0]);
        let y = vec![2.0 * x1, 3.0 * x2];
        let h = l / 32.0;
        let small = modulus_of_surjection(&spec, &ModulusQuery::new(vec![x1, x2], y.clone(), l), h).unwrap();
        let big = modulus_of_surjection(&spec, &ModulusQuery::new(vec![x1, x2], y, 2.0 * l), h).unwrap();
        prop_assert!(small.r_lo <= big.r_hi, "{:?} {:?}", small, big);
    }

    #[test]
    fn rate_never_exceeds_slope(x1 in -1.0f64..1.0, x2 in -1.0f64..1.0) {
        let f = catalog::complex_square();
        let map: &PolyMap = f.functional().unwrap();
        let rate = jacobian_rate(map, &[x1, x2]).unwrap();
        let slope = map_slope(map, &[x1, x2], 16, &DEFAULT_RADII, 3).unwrap().slope;
        prop_assert!(rate <= slope + 1e-3 * (1.0 + slope), "{} > {}", rate, slope);
    }
}

#[test]
fn samples_lie_on_the_graph_and_repeat() {
    for spec in catalog::poly_catalog().into_iter().chain([catalog::punctured_cone(), catalog::implicit_bump()]) {
        let a = sample_graph(&spec, 200, 5, 1e-9).unwrap();
        let b = sample_graph(&spec, 200, 5, 1e-9).unwrap();
        assert_eq!(a, b, "{}", spec.name());
        for p in &a {
            assert!(spec.contains(&p.x, &p.y, 1e-9).unwrap(), "{} {p:?}", spec.name());
        }
    }
}
