use proptest::prelude::*;

use superfield::chart::Chart;
use superfield::connection::{BundleConnection, TorsionFreeConnection};
use superfield::graded::{ratio, SuperPoly};
use superfield::numerics::{
    chart_phi, chart_psi, exp_numeric, parallel_transport, rk4, sup_distance, tangent_check, transport_matrix,
    trivialize_over_chart, DiscreteMap, DiscreteSection, NewtonOptions, NumericBundleConnection, NumericConnection,
    SampleGrid, SampledPath,
};
use superfield::Error;

fn line() -> Chart {
    Chart::new("N", ["x"]).unwrap()
}

/// `Gamma^x_xx = c` on the line.
fn constant_gamma(num: i64, den: i64) -> NumericConnection {
    let c = line();
    let g = SuperPoly::constant(&c.function_table(), ratio(num, den));
    NumericConnection::new(&TorsionFreeConnection::new(&c, vec![vec![vec![g]]]).unwrap()).unwrap()
}

fn flat(dim: usize) -> NumericConnection {
    let c = Chart::new("N", (1..=dim).map(|i| format!("x{i}"))).unwrap();
    NumericConnection::new(&TorsionFreeConnection::flat(&c)).unwrap()
}

fn grid(points: &[f64]) -> SampleGrid {
    SampleGrid::new(points.iter().map(|p| vec![*p]).collect()).unwrap()
}

fn column(v: &[f64]) -> Vec<Vec<f64>> {
    v.iter().map(|x| vec![*x]).collect()
}

#[test]
fn rk4_solves_linear_growth() {
    let y = rk4(|_, y| vec![y[0]], &[1.0], 0.0, 1.0, 200).unwrap();
    assert!((y[0] - 1f64.exp()).abs() < 1e-10);
    assert!(matches!(rk4(|_, y| vec![y[0]], &[1.0], 0.0, 1.0, 0), Err(Error::InvalidArgument(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    // x'' + c x'^2 = 0 gives x(1) = x + ln(1 + c v) / c.
    #[test]
    fn exp_with_constant_gamma(num in -3i64..=3, x in -2.0f64..2.0, v in -0.5f64..0.5) {
        let c = num as f64 / 2.0;
        let conn = constant_gamma(num, 2);
        let exact = if num == 0 { x + v } else { x + (1.0 + c * v).ln() / c };
        let got = exp_numeric(&conn, &[x], &[v], 200).unwrap()[0];
        prop_assert!((got - exact).abs() < 1e-9, "{got} vs {exact}");
    }

    #[test]
    fn flat_charts_are_affine(pts in prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0, -1.0f64..1.0, -1.0f64..1.0), 1..8)) {
        let g = SampleGrid::new(pts.iter().map(|p| vec![p.0]).collect()).unwrap();
        let conn = flat(2);
        let f = DiscreteMap::new(g.clone(), pts.iter().map(|p| vec![p.0, p.1]).collect()).unwrap();
        let s = DiscreteSection::new(g.clone(), pts.iter().map(|p| vec![p.2, p.3]).collect()).unwrap();
        let moved = chart_psi(&f, &s, &conn, 10).unwrap();
        let sum: Vec<Vec<f64>> = pts.iter().map(|p| vec![p.0 + p.2, p.1 + p.3]).collect();
        prop_assert!(sup_distance(&moved.values, &sum) < 1e-13);
        let back = chart_phi(&f, &moved, &conn, &NewtonOptions::default()).unwrap();
        prop_assert!(sup_distance(&back.vectors, &s.vectors) < 1e-12);
    }

    // The inverse of x + ln(1 + c v) / c is v = (e^{c (g - x)} - 1) / c.
    #[test]
    fn chart_phi_inverts_constant_gamma(num in prop_oneof![-2i64..=-1, 1i64..=2], xs in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..6)) {
        let c = num as f64 / 2.0;
        let conn = constant_gamma(num, 2);
        let g = grid(&xs.iter().map(|p| p.0).collect::<Vec<_>>());
        let f = DiscreteMap::new(g.clone(), xs.iter().map(|p| vec![p.0]).collect()).unwrap();
        let target = DiscreteMap::new(g, xs.iter().map(|p| vec![p.1]).collect()).unwrap();
        let s = chart_phi(&f, &target, &conn, &NewtonOptions::default()).unwrap();
        let exact: Vec<Vec<f64>> = xs.iter().map(|(x, y)| vec![((c * (y - x)).exp() - 1.0) / c]).collect();
        prop_assert!(sup_distance(&s.vectors, &exact) < 1e-8);
        let again = chart_psi(&f, &s, &conn, 200).unwrap();
        prop_assert!(sup_distance(&again.values, &target.values) < 1e-10);
    }

    #[test]
    fn tangent_check_recovers_the_section(num in -3i64..=3, xs in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..6)) {
        let conn = constant_gamma(num, 2);
        let g = grid(&xs.iter().map(|p| p.0).collect::<Vec<_>>());
        let f = DiscreteMap::new(g.clone(), xs.iter().map(|p| vec![p.0]).collect()).unwrap();
        let eta = DiscreteSection::new(g, xs.iter().map(|p| vec![p.1]).collect()).unwrap();
        let approx = tangent_check(&f, &eta, &conn, 1e-4, 50).unwrap();
        prop_assert!(sup_distance(&approx.vectors, &eta.vectors) < 1e-6);
    }

    // v' = -a x' v along any path from p to q gives v(q) = e^{-a (q - p)} v(p).
    #[test]
    fn scalar_transport_closed_form(a in -4i64..=4, pts in prop::collection::vec(-1.0f64..1.0, 2..6), v0 in -2.0f64..2.0) {
        let chart = line();
        let ft = chart.function_table();
        let b = BundleConnection::new(&chart, vec!["v".into()], vec![1], vec![vec![vec![SuperPoly::constant(&ft, ratio(a, 4))]]]).unwrap();
        let conn = NumericBundleConnection::new(&b).unwrap();
        let d = pts[pts.len() - 1] - pts[0];
        let path = SampledPath::uniform(column(&pts)).unwrap();
        let v = parallel_transport(&conn, &path, &[v0], 100).unwrap()[0];
        prop_assert!((v - v0 * (-(a as f64) / 4.0 * d).exp()).abs() < 1e-8);
        let m = transport_matrix(&conn, &path, 100).unwrap();
        prop_assert!((m[(0, 0)] * v0 - v).abs() < 1e-12);
    }
}

#[test]
fn zero_section_gives_identity_trivialization() {
    let chart = Chart::new("N", ["x1", "x2"]).unwrap();
    let ft = chart.function_table();
    let x1 = SuperPoly::generator(&ft, "x1").unwrap();
    let zero = SuperPoly::zero(&ft);
    // A^a_{i b} = x1 delta on the first index, zero otherwise
    let coeff: Vec<Vec<Vec<SuperPoly>>> = (0..2)
        .map(|a| (0..2).map(|i| (0..2).map(|b| if i == 0 && a == b { x1.clone() } else { zero.clone() }).collect()).collect())
        .collect();
    let b = BundleConnection::new(&chart, vec!["v1".into(), "v2".into()], vec![1, 1], coeff).unwrap();
    let bundle = NumericBundleConnection::new(&b).unwrap();
    let tm = NumericConnection::new(&TorsionFreeConnection::flat(&chart)).unwrap();
    let g = SampleGrid::new(vec![vec![0.0], vec![1.0]]).unwrap();
    let f = DiscreteMap::new(g.clone(), vec![vec![0.2, 0.1], vec![-0.3, 0.4]]).unwrap();
    let eta = DiscreteSection::zero(&g, 2);
    for m in trivialize_over_chart(&f, &eta, &tm, &bundle, (0.0, 1.0), 50).unwrap() {
        assert!((m - nalgebra_identity()).amax() < 1e-15);
    }
    // Along eta = e1 from x1 = 0.2 the transport is exp(-(0.2 + 1/2)) on both fibers.
    let eta = DiscreteSection::new(g, vec![vec![1.0, 0.0], vec![1.0, 0.0]]).unwrap();
    let ms = trivialize_over_chart(&f, &eta, &tm, &bundle, (0.0, 1.0), 100).unwrap();
    for (m, x) in ms.iter().zip([0.2f64, -0.3]) {
        let exact = (-(x + 0.5)).exp();
        assert!((m[(0, 0)] - exact).abs() < 1e-9 && (m[(1, 1)] - exact).abs() < 1e-9);
        assert!(m[(0, 1)].abs() < 1e-15 && m[(1, 0)].abs() < 1e-15);
    }
}

fn nalgebra_identity() -> superfield::numerics::DMatrix<f64> {
    superfield::numerics::DMatrix::identity(2, 2)
}

#[test]
fn mismatched_grids_and_failed_shooting_are_reported() {
    let conn = constant_gamma(1, 1);
    let f = DiscreteMap::new(grid(&[0.0, 1.0]), column(&[0.0, 0.0])).unwrap();
    let other = DiscreteSection::zero(&grid(&[0.0, 2.0]), 1);
    assert!(matches!(chart_psi(&f, &other, &conn, 10), Err(Error::Shape(_))));
    let g = DiscreteMap::new(grid(&[0.0, 1.0]), column(&[0.0, 0.5])).unwrap();
    let starved = NewtonOptions { max_iter: 0, ..NewtonOptions::default() };
    match chart_phi(&f, &g, &conn, &starved) {
        Err(Error::NotInChart(points)) => assert_eq!(points, vec![1]),
        other => panic!("expected a chart failure, got {other:?}"),
    }
    assert!(matches!(tangent_check(&f, &other, &conn, 0.0, 10), Err(Error::InvalidArgument(_))));
}
