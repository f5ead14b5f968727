//! Curvature measures from tube volumes.
//!
//! Below the reach, the mass of `K^r` projecting into a region `B` is a
//! polynomial `Σ_i c_i(B) r^i` of degree `d`, with `c_i = ω_{d−i} Φ_i(B)`.
//! [`steiner_fit`] estimates these masses on a grid of radii and fits the
//! polynomial by least squares.
//!
//! `ω_k` is the volume of the unit ball of `ℝᵏ` (`ω_0 = 1`, `ω_1 = 2`,
//! `ω_2 = π`, `ω_3 = 4π/3`). Raw coefficients `c_i` do not depend on this
//! convention and are always reported next to `Φ_i`.
//!
//! All radii share one sample set: points are drawn in the bounding box of
//! `K` grown by the largest radius, using a randomly shifted Kronecker
//! lattice, and a point at distance `d_K(x)` counts for every `r ≥ d_K(x)`.
//! Reported standard errors use the binomial formula, which bounds the
//! lattice estimator's error from above.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;
use crate::rng::{BoxSampler, Sampling, BATCH};
use crate::shape::{CompactShape, TieSlack};
use crate::stats::Estimate;

pub const CONVENTION: &str =
    "phi_i = c_i / omega_(d-i), omega_k = volume of the unit ball in R^k; mass(K^r in region) = sum_i c_i r^i";

pub fn omega(k: usize) -> f64 {
    match k {
        0 => 1.0,
        1 => 2.0,
        _ => omega(k - 2) * std::f64::consts::TAU / k as f64,
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Exact tube masses of the unit cube `[0,1]^d` per stratum: entry `k` is
/// the mass projecting onto faces of codimension `k`, `C(d,k)·ω_k·r^k`
/// (`k = 0` is the cube itself).
pub fn cube_oracle(dim: usize, r: f64) -> Vec<f64> {
    (0..=dim).map(|k| binomial(dim, k) * omega(k) * r.powi(k as i32)).collect()
}

/// Distance from `K` to its medial axis; `+inf` for convex shapes.
pub fn estimate_reach(shape: &CompactShape) -> f64 {
    match shape {
        CompactShape::Cloud(idx) => {
            if idx.len() < 2 {
                return f64::INFINITY;
            }
            let min_d2 =
                par::map_slice(idx.points(), |p| idx.k_nearest(p, 2)[1].1).into_iter().fold(f64::INFINITY, f64::min);
            0.5 * min_d2.sqrt()
        }
        CompactShape::Ball { .. } | CompactShape::Box(_) => f64::INFINITY,
        CompactShape::SegmentSet(segs) => {
            let members: Vec<CompactShape> = segs.iter().map(|s| CompactShape::SegmentSet(vec![*s])).collect();
            reach_of_members(&members)
        }
        CompactShape::Union(members) => reach_of_members(members),
    }
}

fn reach_of_members(members: &[CompactShape]) -> f64 {
    let mut reach = f64::INFINITY;
    for (i, a) in members.iter().enumerate() {
        reach = reach.min(estimate_reach(a));
        for b in &members[i + 1..] {
            reach = reach.min(0.5 * a.separation(b));
        }
    }
    reach
}

/// Partition of `K` used to split the pushforward mass.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionBins {
    #[default]
    Global,
    /// One region per cloud point.
    PerPoint,
    /// Box strata by codimension: 0 = the box, 1 = facets, …, d = vertices.
    BoxStrata,
}

impl RegionBins {
    fn count(&self, shape: &CompactShape) -> Result<usize> {
        match (self, shape) {
            (RegionBins::Global, _) => Ok(1),
            (RegionBins::PerPoint, CompactShape::Cloud(idx)) => Ok(idx.len()),
            (RegionBins::BoxStrata, CompactShape::Box(b)) => Ok(b.dim() + 1),
            (bins, _) => Err(Error::InvalidParameter(format!("{bins:?} bins do not apply to this shape"))),
        }
    }
}

/// `d + 3` Chebyshev points in `[0.2, 0.8]·s`, with `s` the reach, or the
/// diameter of `K` when the reach is infinite.
pub fn default_r_grid(shape: &CompactShape) -> Vec<f64> {
    let reach = estimate_reach(shape);
    let s = if reach.is_finite() { reach } else { shape.diameter() };
    chebyshev(0.2 * s, 0.8 * s, shape.dim() + 3)
}

pub fn chebyshev(a: f64, b: f64, n: usize) -> Vec<f64> {
    let mut xs: Vec<f64> = (0..n)
        .map(|k| {
            let t = ((2 * k + 1) as f64 * std::f64::consts::PI / (2 * n) as f64).cos();
            0.5 * (a + b) + 0.5 * (b - a) * t
        })
        .collect();
    xs.reverse();
    xs
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegionFit {
    pub label: usize,
    /// `c_0..c_d`.
    pub coeffs: Vec<f64>,
    /// `Φ_i = c_i / ω_{d−i}`.
    pub phi: Vec<f64>,
    /// Root-mean-square fit residual.
    pub residual: f64,
    pub masses: Vec<Estimate>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurvatureFit {
    pub dim: usize,
    pub bins: RegionBins,
    pub regions: Vec<RegionFit>,
    pub reach_used: f64,
    pub r_grid: Vec<f64>,
    pub n_samples_per_r: usize,
    pub seed: u64,
    /// Largest region residual.
    pub residual: f64,
    pub convention: &'static str,
}

impl CurvatureFit {
    pub fn region(&self, label: usize) -> Option<&RegionFit> {
        self.regions.iter().find(|r| r.label == label)
    }

    /// Fitted mass of region `label` at radius `r`.
    pub fn predict(&self, label: usize, r: f64) -> Option<f64> {
        self.region(label).map(|f| f.coeffs.iter().rev().fold(0.0, |acc, c| acc * r + c))
    }
}

/// Per-region tube masses on `r_grid` and their least-squares Steiner
/// polynomials. The total sample count is `n_samples · |r_grid|`.
pub fn steiner_fit(
    shape: &CompactShape,
    bins: RegionBins,
    r_grid: &[f64],
    n_samples: usize,
    seed: u64,
) -> Result<CurvatureFit> {
    let dim = shape.dim();
    if r_grid.len() < dim + 2 {
        return Err(Error::InvalidParameter(format!("r grid needs at least {} points, got {}", dim + 2, r_grid.len())));
    }
    if !(r_grid[0] > 0.0) || r_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter("r grid must be positive and strictly increasing".into()));
    }
    if n_samples == 0 {
        return Err(Error::InvalidParameter("sample count must be at least 1".into()));
    }
    let reach = estimate_reach(shape);
    let r_max = *r_grid.last().unwrap();
    if r_max >= reach {
        return Err(Error::BeyondReach { r: r_max, reach });
    }
    let n_bins = bins.count(shape)?;
    let total = n_samples * r_grid.len();
    let bx = shape.bbox().inflate(r_max);
    let sampler = BoxSampler::new(bx, Sampling::Lattice, seed)?;
    let g = r_grid.len();
    let slack = TieSlack::default();
    let parts = par::map_batches(total.div_ceil(BATCH), |b| {
        let len = BATCH.min(total - b * BATCH);
        let mut xs = Vec::with_capacity(len);
        sampler.fill_batch(b, len, &mut xs);
        let mut counts = vec![0u64; n_bins * g];
        for x in xs {
            let (dist, label) = match (bins, shape) {
                (RegionBins::BoxStrata, CompactShape::Box(bb)) => {
                    let outside = (0..dim).filter(|&i| x[i] < bb.min[i] || x[i] > bb.max[i]).count();
                    (shape.distance(&x), outside)
                }
                (RegionBins::PerPoint, _) => {
                    let c = shape.closest(&x, slack);
                    (c.dist, c.site.unwrap_or(0))
                }
                _ => (shape.distance(&x), 0),
            };
            // First grid radius covering this point.
            let k = r_grid.partition_point(|&r| r < dist);
            if k < g {
                counts[label * g + k] += 1;
            }
        }
        counts
    });
    let mut counts = vec![0u64; n_bins * g];
    for part in parts {
        for (c, p) in counts.iter_mut().zip(part) {
            *c += p;
        }
    }
    let vol = bx.volume();
    let omegas: Vec<f64> = (0..=dim).map(|i| omega(dim - i)).collect();
    let mut regions = Vec::with_capacity(n_bins);
    for label in 0..n_bins {
        let mut cum = 0u64;
        let masses: Vec<Estimate> = counts[label * g..(label + 1) * g]
            .iter()
            .map(|&c| {
                cum += c;
                Estimate::proportion(cum as usize, total, vol)
            })
            .collect();
        let ys: Vec<f64> = masses.iter().map(|m| m.value).collect();
        let (coeffs, residual) = polyfit(r_grid, &ys, dim);
        let phi = coeffs.iter().zip(&omegas).map(|(c, w)| c / w).collect();
        regions.push(RegionFit { label, coeffs, phi, residual, masses });
    }
    let residual = regions.iter().map(|r| r.residual).fold(0.0, f64::max);
    Ok(CurvatureFit {
        dim,
        bins,
        regions,
        reach_used: reach,
        r_grid: r_grid.to_vec(),
        n_samples_per_r: n_samples,
        seed,
        residual,
        convention: CONVENTION,
    })
}

/// Least-squares polynomial of the given degree; returns coefficients in
/// increasing degree and the RMS residual.
fn polyfit(xs: &[f64], ys: &[f64], degree: usize) -> (Vec<f64>, f64) {
    let a = DMatrix::from_fn(xs.len(), degree + 1, |i, j| xs[i].powi(j as i32));
    let b = DVector::from_column_slice(ys);
    let svd = a.clone().svd(true, true);
    let c = svd.solve(&b, 1e-14).expect("SVD computed with U and V");
    let res = (&a * &c - &b).norm() / (xs.len() as f64).sqrt();
    (c.iter().copied().collect(), res)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::point::{Point, PointCloud};
    use std::f64::consts::PI;

    fn p(c: &[f64]) -> Point {
        Point::new(c).unwrap()
    }

    #[test]
    fn unit_ball_volumes() {
        assert_eq!(omega(0), 1.0);
        assert_eq!(omega(1), 2.0);
        assert!((omega(2) - PI).abs() < 1e-15);
        assert!((omega(3) - 4.0 * PI / 3.0).abs() < 1e-15);
        assert!((omega(4) - PI * PI / 2.0).abs() < 1e-14);
    }

    #[test]
    fn cube_oracle_values() {
        let m = cube_oracle(3, 1.0);
        let want = [1.0, 6.0, 3.0 * PI, 4.0 * PI / 3.0];
        for (a, b) in m.iter().zip(want) {
            assert!((a - b).abs() < 1e-14);
        }
        assert_eq!(cube_oracle(3, 0.0), vec![1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn reach_examples() {
        let line =
            |xs: &[f64]| CompactShape::cloud(PointCloud::new(xs.iter().map(|x| p(&[*x])).collect()).unwrap()).unwrap();
        assert_eq!(estimate_reach(&line(&[0.0, 1.0])), 0.5);
        assert_eq!(estimate_reach(&line(&[0.0, 1.0, 10.0])), 0.5);
        assert_eq!(estimate_reach(&line(&[3.0])), f64::INFINITY);
        assert_eq!(estimate_reach(&CompactShape::ball(p(&[0.0, 0.0]), 1.0).unwrap()), f64::INFINITY);
        let u = CompactShape::union(vec![
            CompactShape::ball(p(&[0.0, 0.0]), 1.0).unwrap(),
            CompactShape::ball(p(&[3.0, 0.0]), 1.0).unwrap(),
        ])
        .unwrap();
        assert!((estimate_reach(&u) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn chebyshev_grid_is_increasing_and_inside() {
        let g = chebyshev(0.2, 0.8, 6);
        assert_eq!(g.len(), 6);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        assert!(g[0] > 0.2 && g[5] < 0.8);
    }

    #[test]
    fn polyfit_recovers_exact_polynomial() {
        let xs = [0.1, 0.3, 0.5, 0.7, 0.9, 1.1];
        let ys: Vec<f64> = xs.iter().map(|x| 1.0 - 2.0 * x + 0.5 * x * x * x).collect();
        let (c, res) = polyfit(&xs, &ys, 3);
        for (a, b) in c.iter().zip([1.0, -2.0, 0.0, 0.5]) {
            assert!((a - b).abs() < 1e-9);
        }
        assert!(res < 1e-12);
    }

    #[test]
    fn single_point_disk() {
        let k = CompactShape::cloud(PointCloud::from_rows(&[&[0.0, 0.0]]).unwrap()).unwrap();
        let grid = chebyshev(0.2, 0.8, 5);
        let fit = steiner_fit(&k, RegionBins::Global, &grid, 100_000, 1).unwrap();
        let c = &fit.regions[0].coeffs;
        assert!(c[0].abs() < 0.01 && c[1].abs() < 0.03);
        assert!((c[2] - PI).abs() < 0.02 * PI);
    }

    #[test]
    fn grid_checks() {
        let k = CompactShape::cloud(PointCloud::from_rows(&[&[0.0, 0.0], &[1.0, 0.0]]).unwrap()).unwrap();
        let fit = steiner_fit(&k, RegionBins::Global, &[0.1, 0.2, 0.3, 0.6], 10, 0);
        assert!(matches!(fit, Err(Error::BeyondReach { .. })));
        assert!(steiner_fit(&k, RegionBins::Global, &[0.1, 0.2, 0.3], 10, 0).is_err());
        assert!(steiner_fit(&k, RegionBins::Global, &[0.1, 0.3, 0.2, 0.4], 10, 0).is_err());
        assert!(steiner_fit(&k, RegionBins::BoxStrata, &[0.1, 0.2, 0.3, 0.4], 10, 0).is_err());
    }

    #[test]
    fn reproducible() {
        let k = CompactShape::cuboid(p(&[0.0, 0.0]), p(&[1.0, 1.0])).unwrap();
        let g = default_r_grid(&k);
        let a = steiner_fit(&k, RegionBins::BoxStrata, &g, 2000, 5).unwrap();
        let b = steiner_fit(&k, RegionBins::BoxStrata, &g, 2000, 5).unwrap();
        assert_eq!(a, b);
    }
}
