use std::f64::consts::PI;

use geoinfer::curvature::{chebyshev, cube_oracle, omega, steiner_fit, RegionBins};
use geoinfer::{CompactShape, Point, PointCloud};

fn p(c: &[f64]) -> Point {
    Point::new(c).unwrap()
}

#[test]
fn unit_ball_volumes() {
    assert!((omega(0) - 1.0).abs() < 1e-15);
    assert!((omega(1) - 2.0).abs() < 1e-15);
    assert!((omega(2) - PI).abs() < 1e-15);
    assert!((omega(3) - 4.0 * PI / 3.0).abs() < 1e-14);
    assert!((omega(4) - PI * PI / 2.0).abs() < 1e-14);
    let c = cube_oracle(3, 1.0);
    assert_eq!(c.len(), 4);
    for (a, b) in c.iter().zip([1.0, 6.0, 3.0 * PI, 4.0 * PI / 3.0]) {
        assert!((a - b).abs() < 1e-12);
    }
}

/// Fitting on part of the grid predicts the tube volume of a unit square at
/// radii held out of the fit.
#[test]
fn held_out_prediction() {
    let k = CompactShape::cuboid(p(&[0.0, 0.0]), p(&[1.0, 1.0])).unwrap();
    let grid = chebyshev(0.1, 0.9, 6);
    let fit = steiner_fit(&k, RegionBins::Global, &grid, 200_000, 3).unwrap();
    for r in [0.15, 0.42, 0.77] {
        let exact = 1.0 + 4.0 * r + PI * r * r;
        let got = fit.predict(0, r).unwrap();
        assert!((got - exact).abs() < 0.005 * exact, "r={r}: {got} vs {exact}");
    }
}

#[test]
fn square_strata_match_wedges() {
    let k = CompactShape::cuboid(p(&[0.0, 0.0]), p(&[1.0, 1.0])).unwrap();
    let grid = chebyshev(0.1, 0.9, 6);
    let fit = steiner_fit(&k, RegionBins::BoxStrata, &grid, 200_000, 4).unwrap();
    // Interior, edges, corners.
    let expect = [(0, 0, 1.0), (1, 1, 4.0), (2, 2, PI)];
    for (label, deg, value) in expect {
        let c = fit.region(label).unwrap().coeffs[deg];
        assert!((c - value).abs() < 0.02 * value, "stratum {label}: {c} vs {value}");
    }
}

#[test]
fn per_point_masses_of_far_apart_points() {
    let k = CompactShape::cloud(PointCloud::from_rows(&[&[0.0, 0.0], &[5.0, 0.0], &[0.0, 7.0]]).unwrap()).unwrap();
    let grid = chebyshev(0.2, 1.5, 5);
    let fit = steiner_fit(&k, RegionBins::PerPoint, &grid, 200_000, 5).unwrap();
    for region in &fit.regions {
        assert!((region.coeffs[2] - PI).abs() < 0.03 * PI, "{:?}", region.coeffs);
        // `Φ_2 = c_2 / ω_0`, not the Euler characteristic.
        assert!((region.phi[2] - PI).abs() < 0.03 * PI);
    }
}

/// Strata masses add up to the tube volume, which a plain hit-or-miss count
/// estimates independently.
#[test]
fn cube_strata_sum_to_tube_volume() {
    use rand::{Rng, SeedableRng};
    let k = CompactShape::cuboid(p(&[0.0; 3]), p(&[1.0; 3])).unwrap();
    let grid = chebyshev(0.1, 0.7, 6);
    let fit = steiner_fit(&k, RegionBins::BoxStrata, &grid, 100_000, 6).unwrap();
    let r = grid[3];
    let total: f64 = fit.regions.iter().map(|reg| reg.masses[3].value).sum();
    let side = 1.0 + 2.0 * r;
    let n = 400_000;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
    let hits = (0..n)
        .filter(|_| {
            let x = Point::from_fn(3, |_| rng.random_range(-r..1.0 + r));
            k.distance(&x) <= r
        })
        .count();
    let p_hit = hits as f64 / n as f64;
    let mc = p_hit * side.powi(3);
    let se = (p_hit * (1.0 - p_hit) / n as f64).sqrt() * side.powi(3);
    assert!((total - mc).abs() <= 3.0 * se, "{total} vs {mc} ± {se}");
    let exact: f64 = cube_oracle(3, r).iter().sum();
    assert!((total - exact).abs() < 0.005 * exact);
}
