use geoinfer::medial::{sample_mu_medial, MedialQuery};
use geoinfer::stability::{
    check_critical_stability, holder_experiment, jitter, lemma_mu, net_resolution, stability_report, StabilityParams,
};
use geoinfer::{Aabb, CompactShape, Point, PointCloud};

fn bx(a: f64) -> Aabb {
    Aabb::new(Point::new(&[-a, -a]).unwrap(), Point::new(&[a, a]).unwrap()).unwrap()
}

#[test]
fn lemma_mu_values() {
    let m = lemma_mu(1e-3, 0.5, 2.0);
    assert!(m > 1.0, "{m}");
    let m = lemma_mu(1e-4, 1.9, 1.2);
    let expect = (1.0 + ((1.9 - 1e-4) / 4.8f64).powi(2)).powf(-0.5) + 4.0 * (1e-4 / 1.9f64).sqrt();
    assert!((m - expect).abs() < 1e-15);
    assert!(m < 0.96);
}

#[test]
fn net_resolution_of_a_regular_grid() {
    let pts: Vec<Point> = (0..50).map(|i| Point::new(&[i as f64 * 0.1, 0.0]).unwrap()).collect();
    assert!((net_resolution(&pts) - 0.1).abs() < 1e-12);
}

#[test]
fn jittered_pair_keeps_critical_points() {
    let k = PointCloud::from_rows(&[&[-1.0, 0.0], &[1.0, 0.0]]).unwrap();
    let k2 = jitter(&k, 1e-3, 3).unwrap();
    let ks = CompactShape::cloud(k).unwrap();
    let k2s = CompactShape::cloud(k2).unwrap();
    let xs = sample_mu_medial(&ks, &MedialQuery::new(0.5, 0.1).unwrap(), 1 << 15, 1).unwrap().points;
    let ys = sample_mu_medial(&k2s, &MedialQuery::new(0.7, 0.05).unwrap(), 1 << 15, 2).unwrap().points;
    let rep = check_critical_stability(1e-3, &xs, &ys);
    assert!(rep.checked > 1000);
    assert_eq!(rep.violations, 0);
}

#[test]
fn report_runs_end_to_end() {
    let k = PointCloud::from_rows(&[&[-1.0, 0.0], &[1.0, 0.0]]).unwrap();
    let k2 = jitter(&k, 1e-4, 4).unwrap();
    let params =
        StabilityParams { e: bx(2.0), l: 1.9, r: Some(1.2), n_samples: 1 << 15, mu: 0.5, eps: 0.1, n_rays: 1 << 14 };
    let rep = stability_report(&k, &k2, &params, 9).unwrap();
    assert!(rep.mu_lemma < 1.0);
    assert!(!rep.inclusion.vacuous);
    assert_eq!(rep.inclusion_violations, 0);
    assert_eq!(rep.critical.violations, 0);
    assert!(rep.l1_proj.value > 0.0);
    let again = stability_report(&k, &k2, &params, 9).unwrap();
    assert_eq!(rep, again);
}

#[test]
fn holder_curve_shape() {
    let k = PointCloud::from_rows(&[&[-1.0, 0.0], &[1.0, 0.0], &[0.0, 0.8]]).unwrap();
    let curve = holder_experiment(&k, &bx(2.0), &[0.1, 0.03, 0.01], 2, 1 << 13, 1).unwrap();
    assert_eq!(curve.l1.len(), 3);
    assert!((curve.h_ref - 1.0 / 6.0).abs() < 1e-15);
    assert!(curve.bound_holds && curve.monotone);
    assert!(holder_experiment(&k, &bx(2.0), &[0.01, 0.1], 1, 100, 1).is_err());
}

/// Translating a cloud moves every projection by exactly the translation.
#[test]
fn translation_moves_projections_rigidly() {
    let k = PointCloud::from_rows(&[&[-1.0, 0.0], &[1.0, 0.0], &[0.0, 1.5]]).unwrap();
    let t = Point::new(&[0.03, -0.02]).unwrap();
    let k2 = k.map(|p| *p + t).unwrap();
    let (ks, k2s) = (CompactShape::cloud(k).unwrap(), CompactShape::cloud(k2).unwrap());
    // Far from both medial axes: below the cloud, on the lower site's side.
    let e = Aabb::new(Point::new(&[-1.2, -3.0]).unwrap(), Point::new(&[-0.9, -2.0]).unwrap()).unwrap();
    let rep = geoinfer::stability::l1_projection_distance(&ks, &k2s, &e, 1 << 12, 2).unwrap();
    let expect = e.volume() * t.norm();
    assert!((rep.estimate.value - expect).abs() < 1e-12, "{} vs {expect}", rep.estimate.value);
}

#[test]
fn two_point_holder_slope_beats_reference() {
    let k = PointCloud::from_rows(&[&[-1.0, 0.0], &[1.0, 0.0]]).unwrap();
    let curve = holder_experiment(&k, &bx(2.0), &[0.1, 0.03, 0.01, 0.003], 2, 1 << 14, 3).unwrap();
    assert!(curve.h_emp >= curve.h_ref, "{} < {}", curve.h_emp, curve.h_ref);
}
