//! Greedy nets and covering-number experiments on sampled medial axes and
//! offset surfaces.
//!
//! A greedy net over a finite sample is both an η-cover and an η-packing of
//! it, so its size `N` satisfies `N(X, η) ≤ N ≤ N(X, η/2)` for the sampled
//! set `X`. Counts over dense samples are therefore lower bounds on the
//! covering number of the underlying continuum, and the experiments report a
//! budget-doubling diagnostic instead of claiming exactness.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::medial::{self, MedialPoint, MedialQuery};
use crate::point::{Point, MAX_DIM};
use crate::rng::BATCH;
use crate::shape::CompactShape;
use crate::stats::fit_line;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoveringReport {
    pub eta: f64,
    pub centers: Vec<Point>,
    pub count: usize,
    /// `(mu, eps)` filter of the sampled set, when it is a medial sample.
    pub filter: Option<(f64, f64)>,
}

type Cell = [i64; MAX_DIM];

fn cell_of(p: &Point, eta: f64) -> Cell {
    let mut c = [0i64; MAX_DIM];
    for (i, v) in p.as_slice().iter().enumerate() {
        c[i] = (v / eta).floor() as i64;
    }
    c
}

/// Greedy η-net: points are visited in lexicographic order and a point
/// becomes a center unless an existing center lies within `eta`.
pub fn greedy_net(points: &[Point], eta: f64) -> Result<CoveringReport> {
    if !(eta > 0.0) {
        return Err(Error::InvalidParameter(format!("eta must be > 0, got {eta}")));
    }
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.lex_cmp(b));
    let dim = sorted.first().map_or(0, |p| p.dim());
    let mut grid: HashMap<Cell, Vec<usize>> = HashMap::new();
    let mut centers: Vec<Point> = Vec::new();
    let offsets = neighbour_offsets(dim);
    let eta2 = eta * eta;
    for p in sorted {
        let c = cell_of(&p, eta);
        let covered = offsets.iter().any(|off| {
            let mut key = c;
            for i in 0..dim {
                key[i] += off[i];
            }
            grid.get(&key).is_some_and(|ids| ids.iter().any(|&k| centers[k].dist2(&p) <= eta2))
        });
        if !covered {
            grid.entry(c).or_default().push(centers.len());
            centers.push(p);
        }
    }
    Ok(CoveringReport { eta, count: centers.len(), centers, filter: None })
}

fn neighbour_offsets(dim: usize) -> Vec<Cell> {
    let mut out = vec![[0i64; MAX_DIM]];
    for i in 0..dim {
        out = out
            .into_iter()
            .flat_map(|c| {
                [-1, 0, 1].map(|o| {
                    let mut c = c;
                    c[i] = o;
                    c
                })
            })
            .collect();
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoveringRow {
    pub eta: f64,
    pub count: usize,
    /// Count from half the final ray budget.
    pub count_half: usize,
    pub stabilized: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoveringTable {
    pub mu: f64,
    pub eps: f64,
    pub rows: Vec<CoveringRow>,
    pub n_rays: usize,
    pub n_samples: usize,
    /// Least-squares slope of `ln N` against `ln(1/η)`.
    pub slope: f64,
    pub intercept: f64,
    pub stabilized: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CoveringBudget {
    /// Initial ray count, rounded up to a whole number of batches.
    pub n_rays: usize,
    /// Ray count beyond which doubling stops.
    pub max_rays: usize,
    /// Relative change between budgets accepted as stable.
    pub tolerance: f64,
}

impl Default for CoveringBudget {
    fn default() -> Self {
        Self { n_rays: 1 << 16, max_rays: 1 << 21, tolerance: 0.05 }
    }
}

/// Greedy-net counts of `Med_μ(K) ∖ K^ε` at each η, doubling the ray budget
/// until every count changes by less than `budget.tolerance`.
pub fn covering_scaling_experiment(
    shape: &CompactShape,
    mu: f64,
    eps: f64,
    etas: &[f64],
    budget: CoveringBudget,
    seed: u64,
) -> Result<CoveringTable> {
    if etas.is_empty() || etas.windows(2).any(|w| !(w[1] < w[0])) || etas.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::InvalidParameter("eta list must be positive and strictly decreasing".into()));
    }
    let query = MedialQuery::new(mu, eps)?;
    let batches = budget.n_rays.max(1).div_ceil(BATCH);
    let mut rays = batches * BATCH;
    let mut sample = medial::cast_batches(shape, &query, 0..batches, rays, seed)?;
    let counts_of =
        |pts: &[Point]| -> Result<Vec<usize>> { etas.iter().map(|&e| greedy_net(pts, e).map(|r| r.count)).collect() };
    let mut prev = counts_of(&positions(&sample.points))?;
    loop {
        let more = medial::cast_batches(shape, &query, rays / BATCH..2 * rays / BATCH, 2 * rays, seed)?;
        sample.absorb(more);
        rays *= 2;
        let counts = counts_of(&positions(&sample.points))?;
        let stable: Vec<bool> = counts
            .iter()
            .zip(&prev)
            .map(|(&n, &m)| (n as f64 - m as f64).abs() <= budget.tolerance * n.max(1) as f64)
            .collect();
        let all = stable.iter().all(|&s| s);
        if all || rays >= budget.max_rays {
            let rows: Vec<CoveringRow> = etas
                .iter()
                .zip(counts.iter().zip(&prev).zip(&stable))
                .map(|(&eta, ((&count, &count_half), &stabilized))| CoveringRow { eta, count, count_half, stabilized })
                .collect();
            let xs: Vec<f64> = etas.iter().map(|e| (1.0 / e).ln()).collect();
            let ys: Vec<f64> = counts.iter().map(|&n| (n.max(1) as f64).ln()).collect();
            let (slope, intercept) = if etas.len() > 1 { fit_line(&xs, &ys) } else { (f64::NAN, ys[0]) };
            if !all {
                log::warn!("covering counts not stabilized at {rays} rays");
            }
            return Ok(CoveringTable {
                mu,
                eps,
                rows,
                n_rays: rays,
                n_samples: sample.points.len(),
                slope,
                intercept,
                stabilized: all,
            });
        }
        prev = counts;
    }
}

fn positions(points: &[MedialPoint]) -> Vec<Point> {
    points.iter().map(|p| p.m).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundaryCovering {
    pub r: f64,
    pub eps: f64,
    pub count: usize,
    pub n_surface: usize,
}

/// Greedy-net estimate of `N(∂K^r, eps)` from sampled offset-surface points.
pub fn boundary_covering(
    shape: &CompactShape,
    r: f64,
    eps: f64,
    n_sources: usize,
    seed: u64,
) -> Result<BoundaryCovering> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!("eps must be > 0, got {eps}")));
    }
    let pts = medial::offset_surface_samples(shape, r, n_sources, seed)?;
    let net = greedy_net(&pts, eps)?;
    Ok(BoundaryCovering { r, eps, count: net.count, n_surface: pts.len() })
}

/// Size of a greedy `eps`-net on the unit sphere `S^{d-1}`, from `n` random
/// directions.
pub fn sphere_covering(dim: usize, eps: f64, n: usize, seed: u64) -> Result<usize> {
    use rand::Rng;
    let mut rng = crate::rng::stream_rng(seed, 0);
    let mut pts = Vec::with_capacity(n);
    while pts.len() < n {
        let g = Point::from_fn(dim, |_| rng.random_range(-1.0..1.0));
        let r = g.norm();
        if r > 1e-3 && r <= 1.0 {
            pts.push(g * (1.0 / r));
        }
    }
    Ok(greedy_net(&pts, eps)?.count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::point::PointCloud;

    fn p(c: &[f64]) -> Point {
        Point::new(c).unwrap()
    }

    #[test]
    fn single_point_net() {
        assert_eq!(greedy_net(&[p(&[0.3, 0.1])], 0.1).unwrap().count, 1);
    }

    #[test]
    fn separated_line_points() {
        let pts: Vec<Point> = (0..4).map(|i| p(&[i as f64, 0.0])).collect();
        assert_eq!(greedy_net(&pts, 0.6).unwrap().count, 4);
        assert_eq!(greedy_net(&pts, 1.0).unwrap().count, 2);
    }

    #[test]
    fn big_eta_gives_one_center() {
        let pts =
            crate::rng::sample_uniform(&crate::Aabb::new(p(&[-0.7, -0.7]), p(&[0.7, 0.7])).unwrap(), 100, 4).unwrap();
        assert_eq!(greedy_net(&pts, 2.5).unwrap().count, 1);
    }

    #[test]
    fn net_is_cover_and_packing() {
        let pts =
            crate::rng::sample_uniform(&crate::Aabb::new(p(&[0.0, 0.0]), p(&[1.0, 1.0])).unwrap(), 3000, 9).unwrap();
        let eta = 0.07;
        let net = greedy_net(&pts, eta).unwrap();
        for q in &pts {
            assert!(net.centers.iter().any(|c| c.dist(q) <= eta));
        }
        for (i, a) in net.centers.iter().enumerate() {
            for b in &net.centers[i + 1..] {
                assert!(a.dist(b) > eta);
            }
        }
    }

    #[test]
    fn rejects_bad_eta_lists() {
        let k = CompactShape::cloud(PointCloud::from_rows(&[&[-1.0, 0.0], &[1.0, 0.0]]).unwrap()).unwrap();
        let b = CoveringBudget::default();
        assert!(covering_scaling_experiment(&k, 0.5, 0.1, &[0.1, 0.2], b, 0).is_err());
        assert!(covering_scaling_experiment(&k, 0.5, 0.1, &[], b, 0).is_err());
    }

    #[test]
    fn ball_offset_covering_is_small() {
        let ball = CompactShape::ball(p(&[0.0, 0.0]), 1.0).unwrap();
        let c = boundary_covering(&ball, 1.0, 2.1, 4000, 1).unwrap();
        assert!(c.count >= 1 && c.count <= 7);
        assert_eq!(boundary_covering(&ball, 1.0, 4.5, 4000, 1).unwrap().count, 1);
    }
}
