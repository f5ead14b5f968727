//! Normal distance to the medial axis, the gradient flow `Ψᵗ`, the
//! first-hit map `ℓ_K`, and Monte Carlo sampling of μ-medial axes.
//!
//! For a cloud, the ray `x + t·v` (with `v = ∇_x d_K`, a unit vector when
//! the projection `p` is unique) leaves the Voronoi cell of `p` when it
//! becomes equidistant to `p` and another site `q`, at
//! `t_q = (‖x−q‖² − ‖x−p‖²) / (2⟨v, q−p⟩)` for `⟨v, q−p⟩ > 0`.
//! `τ(x)` is the smallest such `t_q`.

use serde::Serialize;

use crate::distance::{gradient, projection_set};
use crate::error::{Error, Result};
use crate::index::NnIndex;
use crate::par;
use crate::point::{Aabb, Point};
use crate::rng::{self, Sampling, BATCH};
use crate::shape::{CompactShape, TieSlack};

/// Slack used to detect the witnesses of a ray landing point.
pub const LANDING_SLACK: TieSlack = TieSlack::Relative(1e-7);

/// Crossings farther than `TAU_HORIZON · (d_K(x) + diam K)` are reported as
/// `+inf`; they correspond to μ within ~1e-9 of 1.
pub const TAU_HORIZON: f64 = 1e4;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MedialPoint {
    pub m: Point,
    pub dist: f64,
    pub mu: f64,
    pub witnesses: Vec<Point>,
    /// Start of the ray that landed here, when ray-generated.
    pub source: Option<Point>,
}

/// Ray start data for a point with a unique projection.
struct Ray {
    x: Point,
    p: Point,
    site: Option<usize>,
    dist: f64,
    dir: Point,
}

fn ray_at(shape: &CompactShape, x: &Point, slack: TieSlack) -> Result<Ray> {
    let c = shape.closest(x, slack);
    if c.dist <= 0.0 {
        return Err(Error::GradientOnSet);
    }
    if !c.unique {
        return Err(Error::OnMedialAxis);
    }
    Ok(Ray { x: *x, p: c.point, site: c.site, dist: c.dist, dir: (*x - c.point) * (1.0 / c.dist) })
}

fn check_supported(shape: &CompactShape) -> Result<()> {
    match shape {
        CompactShape::Cloud(_) => Ok(()),
        s if s.is_convex() => Ok(()),
        _ => Err(Error::Unsupported("medial axis of a non-convex analytic shape; sample it as a cloud first".into())),
    }
}

/// Normal distance `τ(x)` from `x` to the medial axis; `+inf` when the
/// gradient ray never meets it.
pub fn tau(shape: &CompactShape, x: &Point, slack: TieSlack) -> Result<f64> {
    check_supported(shape)?;
    let ray = ray_at(shape, x, slack)?;
    Ok(tau_of(shape, &ray).0)
}

fn tau_of(shape: &CompactShape, ray: &Ray) -> (f64, Option<usize>) {
    match shape {
        CompactShape::Cloud(idx) if idx.len() > 1 => {
            tau_cloud_walk(idx, ray, TAU_HORIZON * (ray.dist + shape.diameter_hint()))
        }
        _ => (f64::INFINITY, None),
    }
}

#[inline]
fn crossing_time(ray: &Ray, q: &Point) -> Option<f64> {
    let den = 2.0 * ray.dir.dot(&(*q - ray.p));
    (den > 0.0).then(|| (ray.x.dist2(q) - ray.x.dist2(&ray.p)) / den)
}

/// Exact `τ` for clouds by walking down crossing times: any site strictly
/// closer than `p` at `x + t·v` has an earlier crossing, and the walk stops
/// once no site beats `p` at the current landing point.
fn tau_cloud_walk(idx: &NnIndex, ray: &Ray, horizon: f64) -> (f64, Option<usize>) {
    let pts = idx.points();
    let mut t = horizon;
    let mut witness = None;
    for _ in 0..64 {
        let y = ray.x + ray.dir * t;
        let (j, d2j) = idx.nearest(&y);
        let d2p = y.dist2(&ray.p);
        let done = || if witness.is_some() { (t, witness) } else { (f64::INFINITY, None) };
        if Some(j) == ray.site || d2j >= d2p {
            return done();
        }
        match crossing_time(ray, &pts[j]) {
            Some(tj) if tj < t => {
                t = tj;
                witness = Some(j);
            }
            // A rounding tie with the current witness: nothing crosses earlier.
            Some(_) if witness.is_some() => return done(),
            _ => break,
        }
    }
    tau_cloud_scan(idx, ray, horizon)
}

/// Exact `τ` for clouds by a linear scan over all sites.
fn tau_cloud_scan(idx: &NnIndex, ray: &Ray, horizon: f64) -> (f64, Option<usize>) {
    let mut best = (f64::INFINITY, None);
    for (j, q) in idx.points().iter().enumerate() {
        if Some(j) == ray.site {
            continue;
        }
        if let Some(t) = crossing_time(ray, q) {
            if t < best.0 {
                best = (t, Some(j));
            }
        }
    }
    if best.0 > horizon {
        (f64::INFINITY, None)
    } else {
        best
    }
}

/// `τ` by scanning every site, bypassing the index walk.
pub fn tau_scan(shape: &CompactShape, x: &Point, slack: TieSlack) -> Result<f64> {
    check_supported(shape)?;
    let ray = ray_at(shape, x, slack)?;
    Ok(match shape {
        CompactShape::Cloud(idx) if idx.len() > 1 => {
            tau_cloud_scan(idx, &ray, TAU_HORIZON * (ray.dist + shape.diameter_hint())).0
        }
        _ => f64::INFINITY,
    })
}

/// `Ψᵗ(x) = x + t·∇_x d_K` for `0 ≤ t ≤ τ(x)`.
pub fn psi(shape: &CompactShape, x: &Point, t: f64, slack: TieSlack) -> Result<Point> {
    check_supported(shape)?;
    let ray = ray_at(shape, x, slack)?;
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter(format!("flow time must be >= 0, got {t}")));
    }
    let (tau, _) = tau_of(shape, &ray);
    if t > tau {
        return Err(Error::CrossedMedialAxis { t, tau });
    }
    Ok(ray.x + ray.dir * t)
}

/// `ℓ(x) = Ψ^{τ(x)}(x)`, the first medial-axis point on the gradient ray.
pub fn ell(shape: &CompactShape, x: &Point, slack: TieSlack) -> Result<MedialPoint> {
    check_supported(shape)?;
    let ray = ray_at(shape, x, slack)?;
    land(shape, &ray)
}

fn land(shape: &CompactShape, ray: &Ray) -> Result<MedialPoint> {
    let (t, _) = tau_of(shape, ray);
    if !t.is_finite() {
        return Err(Error::NoMedialCrossing);
    }
    let m = ray.x + ray.dir * t;
    let ps = projection_set(shape, &m, LANDING_SLACK);
    let g = crate::distance::gradient_from(&ps)?;
    Ok(MedialPoint { m, dist: ps.dist, mu: g.mu, witnesses: ps.projections, source: Some(ray.x) })
}

/// Outcome counts of a medial sampling run.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct MedialSample {
    pub points: Vec<MedialPoint>,
    pub n_rays: usize,
    pub on_set: usize,
    pub ties: usize,
    pub escaped: usize,
    pub rejected_mu: usize,
    pub rejected_eps: usize,
}

impl MedialSample {
    pub(crate) fn absorb(&mut self, other: MedialSample) {
        self.points.extend(other.points);
        self.n_rays += other.n_rays;
        self.on_set += other.on_set;
        self.ties += other.ties;
        self.escaped += other.escaped;
        self.rejected_mu += other.rejected_mu;
        self.rejected_eps += other.rejected_eps;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MedialQuery {
    pub mu_max: f64,
    pub eps: f64,
    pub slack: TieSlack,
}

impl MedialQuery {
    pub fn new(mu_max: f64, eps: f64) -> Result<Self> {
        if !(mu_max > 0.0 && mu_max < 1.0) {
            return Err(Error::InvalidParameter(format!("mu must lie in (0, 1), got {mu_max}")));
        }
        if !(eps > 0.0) {
            return Err(Error::InvalidParameter(format!("eps must be > 0, got {eps}")));
        }
        Ok(Self { mu_max, eps, slack: TieSlack::default() })
    }

    /// Largest distance from `K` to a point of its μ-medial axis.
    pub fn distance_bound(&self, diam: f64) -> f64 {
        diam / (2.0 * (1.0 - self.mu_max * self.mu_max)).sqrt()
    }

    /// Source box: the bounding box of `K` grown by the distance bound, so
    /// every ray landing in the μ-medial axis can start inside it.
    pub fn source_box(&self, shape: &CompactShape) -> Aabb {
        shape.bbox().inflate(self.distance_bound(shape.diameter()).max(self.eps))
    }
}

/// Samples `Med_μ(K) ∩ (ℝᵈ ∖ K^ε)` by casting `n_rays` gradient rays from
/// uniform sources and keeping landing points with `mu ≤ mu_max` and
/// `d_K ≥ eps`. Ray `i` uses batch stream `i / BATCH`, so the first `n`
/// rays of a larger budget reproduce a smaller one.
pub fn sample_mu_medial(shape: &CompactShape, query: &MedialQuery, n_rays: usize, seed: u64) -> Result<MedialSample> {
    cast_batches(shape, query, 0..n_rays.div_ceil(BATCH), n_rays, seed)
}

pub(crate) fn cast_batches(
    shape: &CompactShape,
    query: &MedialQuery,
    batches: std::ops::Range<usize>,
    n_rays: usize,
    seed: u64,
) -> Result<MedialSample> {
    check_supported(shape)?;
    let bx = query.source_box(shape);
    let sampler = rng::BoxSampler::new(bx, Sampling::Random, seed)?;
    let first = batches.start;
    let parts = par::map_batches(batches.len(), |k| {
        let b = first + k;
        let len = BATCH.min(n_rays.saturating_sub(b * BATCH));
        let mut sources = Vec::with_capacity(len);
        sampler.fill_batch(b, len, &mut sources);
        let mut out = MedialSample { n_rays: len, ..Default::default() };
        for x in sources {
            let ray = match ray_at(shape, &x, query.slack) {
                Ok(r) => r,
                Err(Error::GradientOnSet) => {
                    out.on_set += 1;
                    continue;
                }
                Err(_) => {
                    out.ties += 1;
                    continue;
                }
            };
            match land(shape, &ray) {
                Ok(mp) if mp.dist < query.eps => out.rejected_eps += 1,
                Ok(mp) if mp.mu > query.mu_max => out.rejected_mu += 1,
                Ok(mp) => out.points.push(mp),
                Err(_) => out.escaped += 1,
            }
        }
        out
    });
    let mut all = MedialSample::default();
    for p in parts {
        all.absorb(p);
    }
    if all.points.is_empty() {
        log::warn!("no medial samples retained out of {} rays", all.n_rays);
    }
    Ok(all)
}

/// Points of the offset surface `∂K^r`: uniform sources with `0 < d_K < r`
/// walk outward along their gradient ray and the crossing of `d_K = r` is
/// bisected to 1e-10.
pub fn offset_surface_samples(shape: &CompactShape, r: f64, n_sources: usize, seed: u64) -> Result<Vec<Point>> {
    if !(r > 0.0) {
        return Err(Error::InvalidParameter(format!("offset radius must be > 0, got {r}")));
    }
    let bx = shape.bbox().inflate(r);
    let sampler = rng::BoxSampler::new(bx, Sampling::Random, seed)?;
    let parts = par::map_batches(n_sources.div_ceil(BATCH), |b| {
        let len = BATCH.min(n_sources - b * BATCH);
        let mut sources = Vec::with_capacity(len);
        sampler.fill_batch(b, len, &mut sources);
        sources
            .into_iter()
            .filter_map(|x| {
                let ray = ray_at(shape, &x, TieSlack::default()).ok()?;
                (ray.dist < r).then(|| march_to_level(shape, &ray, r))
            })
            .collect::<Vec<_>>()
    });
    Ok(parts.into_iter().flatten().collect())
}

fn march_to_level(shape: &CompactShape, ray: &Ray, r: f64) -> Point {
    let at = |t: f64| ray.x + ray.dir * t;
    let (mut lo, mut hi) = (0.0, r - ray.dist);
    let mut grow = 0;
    while shape.distance(&at(hi)) < r && grow < 60 {
        lo = hi;
        hi *= 2.0;
        grow += 1;
    }
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if shape.distance(&at(mid)) < r {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    at(0.5 * (lo + hi))
}

/// Convenience: `‖∇d_K‖` at `x` with the landing slack.
pub fn mu_at(shape: &CompactShape, x: &Point) -> Result<f64> {
    Ok(gradient(shape, x, LANDING_SLACK)?.mu)
}

impl CompactShape {
    fn diameter_hint(&self) -> f64 {
        self.bbox().diagonal()
    }
}
