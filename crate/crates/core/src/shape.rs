//! Queryable compact sets: point clouds and a few analytic primitives.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::index::NnIndex;
use crate::par;
use crate::point::{Aabb, Point, PointCloud};

/// Slack under which two candidate projections count as tied.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "value")]
pub enum TieSlack {
    /// `c · (1 + d_K(x))`.
    Relative(f64),
    Absolute(f64),
}

impl Default for TieSlack {
    fn default() -> Self {
        TieSlack::Relative(1e-9)
    }
}

impl TieSlack {
    pub fn resolve(self, dist: f64) -> f64 {
        match self {
            TieSlack::Relative(c) => c * (1.0 + dist),
            TieSlack::Absolute(s) => s,
        }
    }

    pub fn validate(self) -> Result<Self> {
        let v = match self {
            TieSlack::Relative(c) | TieSlack::Absolute(c) => c,
        };
        if v >= 0.0 && v.is_finite() {
            Ok(self)
        } else {
            Err(Error::InvalidParameter(format!("tie slack must be >= 0, got {v}")))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub a: Point,
    pub b: Point,
}

impl Segment {
    pub fn closest(&self, x: &Point) -> Point {
        let ab = self.b - self.a;
        let len2 = ab.norm2();
        if len2 == 0.0 {
            return self.a;
        }
        let t = ((*x - self.a).dot(&ab) / len2).clamp(0.0, 1.0);
        self.a + ab * t
    }

    pub fn at(&self, t: f64) -> Point {
        self.a + (self.b - self.a) * t
    }

    pub fn length(&self) -> f64 {
        self.a.dist(&self.b)
    }
}

/// Nearest point query result.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Closest {
    pub dist: f64,
    pub point: Point,
    /// Index of the nearest site for clouds.
    pub site: Option<usize>,
    /// False when a second projection lies within the tie slack.
    pub unique: bool,
}

#[derive(Clone, Debug)]
pub enum CompactShape {
    Cloud(NnIndex),
    /// Solid ball.
    Ball {
        center: Point,
        radius: f64,
    },
    /// Solid axis-aligned box.
    Box(Aabb),
    SegmentSet(Vec<Segment>),
    Union(Vec<CompactShape>),
}

impl CompactShape {
    pub fn cloud(cloud: PointCloud) -> Result<Self> {
        Ok(CompactShape::Cloud(NnIndex::build(cloud)?))
    }

    pub fn ball(center: Point, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidShape(format!("ball radius must be > 0, got {radius}")));
        }
        Ok(CompactShape::Ball { center, radius })
    }

    pub fn cuboid(min: Point, max: Point) -> Result<Self> {
        Ok(CompactShape::Box(Aabb::new(min, max)?))
    }

    pub fn segments(segments: Vec<Segment>) -> Result<Self> {
        let dim = segments.first().ok_or(Error::EmptySet)?.a.dim();
        for s in &segments {
            for p in [s.a, s.b] {
                if p.dim() != dim {
                    return Err(Error::DimensionMismatch { expected: dim, found: p.dim() });
                }
            }
        }
        Ok(CompactShape::SegmentSet(segments))
    }

    pub fn union(members: Vec<CompactShape>) -> Result<Self> {
        let dim = members.first().ok_or(Error::EmptySet)?.dim();
        if let Some(m) = members.iter().find(|m| m.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: m.dim() });
        }
        Ok(CompactShape::Union(members))
    }

    pub fn dim(&self) -> usize {
        match self {
            CompactShape::Cloud(idx) => idx.cloud().dim(),
            CompactShape::Ball { center, .. } => center.dim(),
            CompactShape::Box(b) => b.dim(),
            CompactShape::SegmentSet(s) => s[0].a.dim(),
            CompactShape::Union(m) => m[0].dim(),
        }
    }

    pub fn as_cloud(&self) -> Option<&NnIndex> {
        match self {
            CompactShape::Cloud(idx) => Some(idx),
            _ => None,
        }
    }

    /// True for shapes known to be convex (their exterior medial axis is empty).
    pub fn is_convex(&self) -> bool {
        match self {
            CompactShape::Cloud(idx) => idx.len() == 1,
            CompactShape::Ball { .. } | CompactShape::Box(_) => true,
            CompactShape::SegmentSet(s) => s.len() == 1,
            CompactShape::Union(m) => m.len() == 1 && m[0].is_convex(),
        }
    }

    pub fn bbox(&self) -> Aabb {
        match self {
            CompactShape::Cloud(idx) => idx.cloud().bbox(),
            CompactShape::Ball { center, radius } => Aabb { min: *center, max: *center }.inflate(*radius),
            CompactShape::Box(b) => *b,
            CompactShape::SegmentSet(s) => {
                let ends: Vec<Point> = s.iter().flat_map(|s| [s.a, s.b]).collect();
                Aabb::enclosing(&ends).expect("nonempty")
            }
            CompactShape::Union(m) => m[1..].iter().fold(m[0].bbox(), |acc, s| acc.union(&s.bbox())),
        }
    }

    /// Balls `(center, radius)` whose union has the same convex hull as the shape.
    fn generators(&self, out: &mut Vec<(Point, f64)>) {
        match self {
            CompactShape::Cloud(idx) => out.extend(idx.points().iter().map(|p| (*p, 0.0))),
            CompactShape::Ball { center, radius } => out.push((*center, *radius)),
            CompactShape::Box(b) => out.extend(b.corners().into_iter().map(|p| (p, 0.0))),
            CompactShape::SegmentSet(s) => out.extend(s.iter().flat_map(|s| [(s.a, 0.0), (s.b, 0.0)])),
            CompactShape::Union(m) => m.iter().for_each(|s| s.generators(out)),
        }
    }

    /// Exact diameter, by a quadratic scan over hull generators.
    pub fn diameter(&self) -> f64 {
        if let CompactShape::Ball { radius, .. } = self {
            return 2.0 * radius;
        }
        if let CompactShape::Box(b) = self {
            return b.diagonal();
        }
        let mut gens = Vec::new();
        self.generators(&mut gens);
        let gens = &gens;
        par::map_batches(gens.len(), |i| {
            let (ci, ri) = gens[i];
            gens[i..].iter().map(|(cj, rj)| ci.dist(cj) + ri + rj).fold(0.0, f64::max)
        })
        .into_iter()
        .fold(0.0, f64::max)
    }

    pub fn distance(&self, x: &Point) -> f64 {
        match self {
            CompactShape::Cloud(idx) => idx.nearest(x).1.sqrt(),
            CompactShape::Ball { center, radius } => (x.dist(center) - radius).max(0.0),
            CompactShape::Box(b) => x.dist(&b.clamp(x)),
            CompactShape::SegmentSet(s) => s.iter().map(|s| s.closest(x).dist2(x)).fold(f64::INFINITY, f64::min).sqrt(),
            CompactShape::Union(m) => m.iter().map(|s| s.distance(x)).fold(f64::INFINITY, f64::min),
        }
    }

    /// Nearest point with a uniqueness flag; cheaper than a full projection set.
    pub fn closest(&self, x: &Point, slack: TieSlack) -> Closest {
        match self {
            CompactShape::Cloud(idx) => {
                if idx.len() == 1 {
                    let d = idx.points()[0].dist(x);
                    return Closest { dist: d, point: idx.points()[0], site: Some(0), unique: true };
                }
                let nn = idx.k_nearest(x, 2);
                let d = nn[0].1.sqrt();
                let reach = d + slack.resolve(d);
                let unique = nn[1].1 > reach * reach;
                Closest { dist: d, point: idx.points()[nn[0].0], site: Some(nn[0].0), unique }
            }
            CompactShape::Ball { center, radius } => {
                let r = x.dist(center);
                if r <= *radius {
                    Closest { dist: 0.0, point: *x, site: None, unique: true }
                } else {
                    let p = *center + (*x - *center) * (radius / r);
                    Closest { dist: r - radius, point: p, site: None, unique: true }
                }
            }
            CompactShape::Box(b) => {
                let p = b.clamp(x);
                Closest { dist: x.dist(&p), point: p, site: None, unique: true }
            }
            _ => {
                let (dist, pts, _) = self.projection_candidates(x, slack);
                Closest { dist, point: pts[0], site: None, unique: pts.len() == 1 }
            }
        }
    }

    /// `(d_K(x), projections, cloud site indices)`; projections within the
    /// resolved slack of `d_K(x)`, near-duplicates merged.
    pub(crate) fn projection_candidates(&self, x: &Point, slack: TieSlack) -> (f64, Vec<Point>, Vec<usize>) {
        match self {
            CompactShape::Cloud(idx) => {
                let (_, d2) = idx.nearest(x);
                let d = d2.sqrt();
                let sites = idx.within(x, d + slack.resolve(d));
                let pts = sites.iter().map(|&i| idx.points()[i]).collect();
                (d, pts, sites)
            }
            CompactShape::Ball { .. } | CompactShape::Box(_) => {
                let c = self.closest(x, slack);
                (c.dist, vec![c.point], Vec::new())
            }
            CompactShape::SegmentSet(segs) => {
                let cands: Vec<(f64, Point)> = segs
                    .iter()
                    .map(|s| {
                        let p = s.closest(x);
                        (p.dist(x), p)
                    })
                    .collect();
                let (d, pts) = merge_candidates(cands, slack);
                (d, pts, Vec::new())
            }
            CompactShape::Union(members) => {
                let mut cands = Vec::new();
                for m in members {
                    let (_, pts, _) = m.projection_candidates(x, slack);
                    cands.extend(pts.into_iter().map(|p| (p.dist(x), p)));
                }
                let (d, pts) = merge_candidates(cands, slack);
                (d, pts, Vec::new())
            }
        }
    }

    /// Distance between the two sets.
    pub fn separation(&self, other: &CompactShape) -> f64 {
        use CompactShape::*;
        match (self, other) {
            (Union(ms), _) => ms.iter().map(|m| m.separation(other)).fold(f64::INFINITY, f64::min),
            (_, Union(_)) => other.separation(self),
            (Cloud(idx), _) => idx.points().iter().map(|p| other.distance(p)).fold(f64::INFINITY, f64::min),
            (_, Cloud(_)) => other.separation(self),
            (Ball { center, radius }, _) => (other.distance(center) - radius).max(0.0),
            (_, Ball { .. }) => other.separation(self),
            (SegmentSet(segs), _) => segs
                .iter()
                .map(|s| match other {
                    SegmentSet(others) => others
                        .iter()
                        .map(|o| {
                            let single = SegmentSet(vec![*o]);
                            min_along_segment(s, |p| single.distance(p))
                        })
                        .fold(f64::INFINITY, f64::min),
                    _ => min_along_segment(s, |p| other.distance(p)),
                })
                .fold(f64::INFINITY, f64::min),
            (_, SegmentSet(_)) => other.separation(self),
            (Box(a), Box(b)) => (0..a.dim())
                .map(|i| {
                    let gap = (a.min[i] - b.max[i]).max(b.min[i] - a.max[i]).max(0.0);
                    gap * gap
                })
                .sum::<f64>()
                .sqrt(),
        }
    }

    /// Discretizes the shape into a cloud with spacing at most `spacing`.
    /// Supported for clouds, segment sets and unions of those.
    pub fn sample_cloud(&self, spacing: f64) -> Result<PointCloud> {
        if !(spacing > 0.0) {
            return Err(Error::InvalidParameter(format!("spacing must be > 0, got {spacing}")));
        }
        let mut pts = Vec::new();
        self.sample_into(spacing, &mut pts)?;
        PointCloud::new(pts)
    }

    fn sample_into(&self, spacing: f64, out: &mut Vec<Point>) -> Result<()> {
        match self {
            CompactShape::Cloud(idx) => out.extend_from_slice(idx.points()),
            CompactShape::SegmentSet(segs) => {
                for s in segs {
                    let n = (s.length() / spacing).ceil().max(1.0) as usize;
                    out.extend((0..=n).map(|k| s.at(k as f64 / n as f64)));
                }
            }
            CompactShape::Union(ms) => {
                for m in ms {
                    m.sample_into(spacing, out)?;
                }
            }
            _ => return Err(Error::Unsupported("only clouds and segment sets can be discretized".into())),
        }
        Ok(())
    }
}

fn merge_candidates(mut cands: Vec<(f64, Point)>, slack: TieSlack) -> (f64, Vec<Point>) {
    let d = cands.iter().map(|c| c.0).fold(f64::INFINITY, f64::min);
    let s = slack.resolve(d);
    cands.retain(|c| c.0 <= d + s);
    let mut pts: Vec<Point> = Vec::with_capacity(cands.len());
    for (_, p) in cands {
        if !pts.iter().any(|q| q.dist(&p) <= s) {
            pts.push(p);
        }
    }
    (d, pts)
}

/// Minimum of a convex function along a segment (ternary search).
fn min_along_segment(s: &Segment, f: impl Fn(&Point) -> f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if f(&s.at(m1)) <= f(&s.at(m2)) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    f(&s.at(0.5 * (lo + hi))).min(f(&s.a)).min(f(&s.b))
}

/// The comb of parallel teeth `[0, scale] × {scale·2^{-i}}`, `i = 1..=teeth`,
/// sampled every `spacing` along each tooth (all teeth share one x-grid).
pub fn comb_cloud(teeth: usize, scale: f64, spacing: f64) -> Result<PointCloud> {
    if teeth == 0 || !(scale > 0.0) {
        return Err(Error::InvalidParameter("comb needs at least one tooth and scale > 0".into()));
    }
    let segs = (1..=teeth)
        .map(|i| {
            let y = scale * 0.5f64.powi(i as i32);
            Segment { a: Point::from_slice(&[0.0, y]), b: Point::from_slice(&[scale, y]) }
        })
        .collect();
    CompactShape::segments(segs)?.sample_cloud(spacing)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[f64]) -> Point {
        Point::new(c).unwrap()
    }

    #[test]
    fn diameters() {
        assert_eq!(CompactShape::ball(p(&[0.0, 0.0]), 1.0).unwrap().diameter(), 2.0);
        let two = CompactShape::cloud(PointCloud::from_rows(&[&[-1.0, 0.0], &[1.0, 0.0]]).unwrap()).unwrap();
        assert_eq!(two.diameter(), 2.0);
        let cube = CompactShape::cuboid(p(&[0.0; 3]), p(&[1.0; 3])).unwrap();
        assert!((cube.diameter() - 3f64.sqrt()).abs() < 1e-15);
        let u = CompactShape::union(vec![
            CompactShape::ball(p(&[0.0, 0.0]), 1.0).unwrap(),
            CompactShape::ball(p(&[5.0, 0.0]), 0.5).unwrap(),
        ])
        .unwrap();
        assert_eq!(u.diameter(), 6.5);
    }

    #[test]
    fn distances() {
        let ball = CompactShape::ball(p(&[0.0, 0.0]), 1.0).unwrap();
        assert_eq!(ball.distance(&p(&[2.0, 0.0])), 1.0);
        assert_eq!(ball.distance(&p(&[0.5, 0.0])), 0.0);
        let cube = CompactShape::cuboid(p(&[0.0; 3]), p(&[1.0; 3])).unwrap();
        assert!((cube.distance(&p(&[2.0, 2.0, 2.0])) - 3f64.sqrt()).abs() < 1e-15);
        let seg = CompactShape::segments(vec![Segment { a: p(&[0.0, 0.0]), b: p(&[2.0, 0.0]) }]).unwrap();
        assert_eq!(seg.distance(&p(&[1.0, 3.0])), 3.0);
        assert_eq!(seg.distance(&p(&[-3.0, 4.0])), 5.0);
    }

    #[test]
    fn invalid_shapes() {
        assert!(CompactShape::ball(p(&[0.0, 0.0]), 0.0).is_err());
        assert!(CompactShape::cuboid(p(&[1.0, 0.0]), p(&[0.0, 0.0])).is_err());
        assert!(matches!(CompactShape::union(vec![]), Err(Error::EmptySet)));
        assert!(matches!(CompactShape::segments(vec![]), Err(Error::EmptySet)));
    }

    #[test]
    fn union_merges_shared_projections() {
        // Two segments meeting at the origin; the corner is one projection.
        let l = CompactShape::segments(vec![
            Segment { a: p(&[0.0, 0.0]), b: p(&[1.0, 0.0]) },
            Segment { a: p(&[0.0, 0.0]), b: p(&[0.0, 1.0]) },
        ])
        .unwrap();
        let (d, pts, _) = l.projection_candidates(&p(&[-1.0, -1.0]), TieSlack::default());
        assert!((d - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(pts.len(), 1);
        // Inside the corner, on the bisector: two projections.
        let (_, pts, _) = l.projection_candidates(&p(&[0.5, 0.5]), TieSlack::default());
        assert_eq!(pts.len(), 2);
    }

    #[test]
    fn separations() {
        let a = CompactShape::ball(p(&[0.0, 0.0]), 1.0).unwrap();
        let b = CompactShape::cuboid(p(&[3.0, -1.0]), p(&[4.0, 1.0])).unwrap();
        assert!((a.separation(&b) - 2.0).abs() < 1e-12);
        let s1 = CompactShape::segments(vec![Segment { a: p(&[0.0, 0.0]), b: p(&[1.0, 0.0]) }]).unwrap();
        let s2 = CompactShape::segments(vec![Segment { a: p(&[0.5, 1.0]), b: p(&[0.5, 3.0]) }]).unwrap();
        assert!((s1.separation(&s2) - 1.0).abs() < 1e-9);
        assert!((s1.separation(&b) - 2.0).abs() < 1e-9);
    }

    #[test]
    fn comb_geometry() {
        let c = comb_cloud(8, 4.0, 0.02).unwrap();
        assert_eq!(c.len(), 8 * 201);
        let ys: Vec<f64> = c.points().iter().map(|p| p[1]).collect();
        assert!(ys.iter().all(|&y| (4.0 / 256.0..=2.0).contains(&y)));
    }
}
