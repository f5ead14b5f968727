use geoinfer::measures::{boundary_measure, coupled_projections, hausdorff, DiscreteMeasure, Region};
use geoinfer::stability::{delta_l_measure, jitter, l1_projection_distance};
use geoinfer::transport::wasserstein1;
use geoinfer::{Aabb, CompactShape, Point, PointCloud};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn uniform(atoms: Vec<Point>) -> DiscreteMeasure {
    let w = 1.0 / atoms.len() as f64;
    let n = atoms.len();
    DiscreteMeasure::new(atoms, vec![w; n]).unwrap()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..n {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

/// Minimum-cost perfect matching by enumeration; equal uniform masses make
/// an optimal plan a permutation.
fn brute_matching(a: &[Point], b: &[Point]) -> f64 {
    permutations(a.len())
        .iter()
        .map(|s| s.iter().enumerate().map(|(i, &j)| a[i].dist(&b[j])).sum::<f64>())
        .fold(f64::INFINITY, f64::min)
        / a.len() as f64
}

fn random_points(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> Vec<Point> {
    (0..n).map(|_| Point::from_fn(dim, |_| rng.random_range(-1.0..1.0))).collect()
}

#[test]
fn w1_equals_matching_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for n in 1..=6 {
        for trial in 0..40 {
            let dim = 1 + trial % 3;
            let (a, b) = if trial % 4 == 0 {
                // Integer lattice points: many cost ties, degenerate pivots.
                let grid = |rng: &mut ChaCha8Rng| {
                    (0..n).map(|_| Point::from_fn(dim, |_| rng.random_range(0..3) as f64)).collect::<Vec<_>>()
                };
                (grid(&mut rng), grid(&mut rng))
            } else {
                (random_points(&mut rng, n, dim), random_points(&mut rng, n, dim))
            };
            let (w, plan) = wasserstein1(&uniform(a.clone()), &uniform(b.clone())).unwrap();
            let oracle = brute_matching(&a, &b);
            assert!((w - oracle).abs() <= 1e-12 * (1.0 + oracle), "n={n}: {w} vs {oracle}");
            let moved: f64 = plan.flows.iter().map(|f| f.2).sum();
            assert!((moved - 1.0).abs() < 1e-12);
        }
    }
}

fn measure_strategy() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<f64>)> {
    (1usize..9).prop_flat_map(|n| {
        (prop::collection::vec(prop::collection::vec(-2.0..2.0f64, 2), n), prop::collection::vec(0.01..1.0f64, n))
    })
}

fn normalized((rows, masses): &(Vec<Vec<f64>>, Vec<f64>)) -> DiscreteMeasure {
    let total: f64 = masses.iter().sum();
    DiscreteMeasure::new(
        rows.iter().map(|r| Point::new(r).unwrap()).collect(),
        masses.iter().map(|m| m / total).collect(),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn w1_is_a_metric(a in measure_strategy(), b in measure_strategy(), c in measure_strategy()) {
        let (a, b, c) = (normalized(&a), normalized(&b), normalized(&c));
        let w = |x: &DiscreteMeasure, y: &DiscreteMeasure| wasserstein1(x, y).unwrap().0;
        let (ab, ba) = (w(&a, &b), w(&b, &a));
        prop_assert!((ab - ba).abs() <= 1e-9 * (1.0 + ab));
        prop_assert!(w(&a, &a).abs() <= 1e-12);
        prop_assert!(ab <= w(&a, &c) + w(&c, &b) + 1e-9);
    }
}

#[test]
fn boundary_measure_respects_symmetry() {
    // Square corners: every corner gets a quarter of the mass.
    let k =
        CompactShape::cloud(PointCloud::from_rows(&[&[-1.0, -1.0], &[1.0, -1.0], &[-1.0, 1.0], &[1.0, 1.0]]).unwrap())
            .unwrap();
    let bm = boundary_measure(&k, &Region::Offset(0.5), 1 << 16, 3).unwrap();
    let expect = std::f64::consts::PI * 0.25;
    for &m in &bm.measure.masses {
        assert!((m - expect).abs() < 0.03 * expect, "{m} vs {expect}");
    }
    let total = bm.measure.total();
    assert!((total - 4.0 * expect).abs() < 0.01 * 4.0 * expect);
}

#[test]
fn l1_distance_is_symmetric_and_vanishes_on_equal_sets() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let a = PointCloud::new(random_points(&mut rng, 30, 2)).unwrap();
    let b = jitter(&a, 0.05, 7).unwrap();
    let (ka, kb) = (CompactShape::cloud(a).unwrap(), CompactShape::cloud(b).unwrap());
    let e = Aabb::new(Point::new(&[-2.0, -2.0]).unwrap(), Point::new(&[2.0, 2.0]).unwrap()).unwrap();
    let ab = l1_projection_distance(&ka, &kb, &e, 1 << 14, 5).unwrap();
    let ba = l1_projection_distance(&kb, &ka, &e, 1 << 14, 5).unwrap();
    assert_eq!(ab.estimate.value, ba.estimate.value);
    assert!(ab.estimate.value > 0.0);
    let aa = l1_projection_distance(&ka, &ka, &e, 1 << 12, 5).unwrap();
    assert_eq!(aa.estimate.value, 0.0);
}

#[test]
fn delta_l_shrinks_as_l_grows() {
    let k = CompactShape::cloud(PointCloud::from_rows(&[&[-1.0, 0.0], &[1.0, 0.0], &[0.0, 1.5]]).unwrap()).unwrap();
    let k2 = CompactShape::cloud(PointCloud::from_rows(&[&[-1.0, 0.01], &[1.02, 0.0], &[0.0, 1.49]]).unwrap()).unwrap();
    let e = Aabb::new(Point::new(&[-3.0, -3.0]).unwrap(), Point::new(&[3.0, 3.0]).unwrap()).unwrap();
    let mut last = f64::INFINITY;
    for l in [0.05, 0.5, 1.0, 1.9, 2.5] {
        let rep = delta_l_measure(&k, &k2, l, &e, 1 << 14, 9).unwrap();
        assert!(rep.estimate.value <= last);
        last = rep.estimate.value;
    }
    assert_eq!(last, 0.0);
}

/// As a dense sample converges to a segment, its normalized boundary measure
/// converges to the segment's in W1.
#[test]
fn boundary_measures_converge_with_sampling() {
    let e = Aabb::new(Point::new(&[-1.0, -1.0]).unwrap(), Point::new(&[2.0, 1.0]).unwrap()).unwrap();
    let line = |n: usize| {
        let pts: Vec<Point> = (0..n).map(|i| Point::new(&[i as f64 / (n - 1) as f64, 0.0]).unwrap()).collect();
        PointCloud::new(pts).unwrap()
    };
    let reference = CompactShape::cloud(line(201)).unwrap();
    let mut prev = f64::INFINITY;
    for n in [3, 6, 11, 21] {
        let kn = line(n);
        let dh = hausdorff(&kn, reference.as_cloud().unwrap().cloud()).unwrap();
        let kn = CompactShape::cloud(kn).unwrap();
        let c = coupled_projections(&kn, &reference, &e, 1 << 14, 4).unwrap();
        let (a, b) = c.normalized_measures(&kn, &reference).unwrap();
        let w = wasserstein1(&a, &b).unwrap().0;
        assert!(w < prev, "W1 did not decrease at n={n}");
        assert!(w <= dh + 0.05, "n={n}: W1 {w} vs d_H {dh}");
        prev = w;
    }
}
