//! Distance function `d_K`, projection sets and the generalized gradient.
//!
//! For `x ∉ K` let `γ` and `r` be the center and radius of the smallest ball
//! enclosing the projections of `x` on `K`. The generalized gradient is
//! `∇_x d_K = (x − γ) / d_K(x)` and its norm is `(1 − r² / d_K(x)²)^{1/2}`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::miniball::smallest_enclosing_ball;
use crate::point::Point;
use crate::shape::{CompactShape, TieSlack};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProjectionSet {
    pub base: Point,
    pub dist: f64,
    pub projections: Vec<Point>,
    /// Cloud indices of the projections; empty for analytic shapes.
    pub sites: Vec<usize>,
    /// Resolved absolute slack used for the tie test.
    pub tie_slack: f64,
}

impl ProjectionSet {
    pub fn is_unique(&self) -> bool {
        self.projections.len() == 1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GradientInfo {
    pub dist: f64,
    /// Center of the smallest ball enclosing the projections.
    pub gamma: Point,
    /// Radius of that ball.
    pub r: f64,
    pub grad: Point,
    /// `‖∇_x d_K‖ ∈ [0, 1]`.
    pub mu: f64,
}

pub fn distance(shape: &CompactShape, x: &Point) -> f64 {
    shape.distance(x)
}

pub fn projection_set(shape: &CompactShape, x: &Point, slack: TieSlack) -> ProjectionSet {
    let (dist, projections, sites) = shape.projection_candidates(x, slack);
    ProjectionSet { base: *x, dist, projections, sites, tie_slack: slack.resolve(dist) }
}

pub fn gradient(shape: &CompactShape, x: &Point, slack: TieSlack) -> Result<GradientInfo> {
    gradient_from(&projection_set(shape, x, slack))
}

pub fn gradient_from(ps: &ProjectionSet) -> Result<GradientInfo> {
    let d = ps.dist;
    if d <= 0.0 {
        return Err(Error::GradientOnSet);
    }
    let x = ps.base;
    if ps.is_unique() {
        let p = ps.projections[0];
        return Ok(GradientInfo { dist: d, gamma: p, r: 0.0, grad: (x - p) * (1.0 / d), mu: 1.0 });
    }
    let ball = smallest_enclosing_ball(&ps.projections);
    let ratio = ball.radius / d;
    let radicand = 1.0 - ratio * ratio;
    // Tied projections lie up to `tie_slack` beyond `d`, so can the ball.
    let band = (d + ps.tie_slack) / d;
    debug_assert!(ratio <= band * (1.0 + 1e-9), "projection ball radius {} exceeds tie band", ball.radius);
    Ok(GradientInfo {
        dist: d,
        gamma: ball.center,
        r: ball.radius,
        grad: (x - ball.center) * (1.0 / d),
        mu: radicand.clamp(0.0, 1.0).sqrt(),
    })
}

/// The projection `p_K(x)`; fails when `x` has several projections.
pub fn project(shape: &CompactShape, x: &Point, slack: TieSlack) -> Result<Point> {
    let c = shape.closest(x, slack);
    if c.unique {
        Ok(c.point)
    } else {
        Err(Error::OnMedialAxis)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::point::PointCloud;

    fn p(c: &[f64]) -> Point {
        Point::new(c).unwrap()
    }

    fn two_points() -> CompactShape {
        CompactShape::cloud(PointCloud::from_rows(&[&[-1.0, 0.0], &[1.0, 0.0]]).unwrap()).unwrap()
    }

    #[test]
    fn distance_examples() {
        let ball = CompactShape::ball(p(&[0.0, 0.0]), 1.0).unwrap();
        assert_eq!(distance(&ball, &p(&[2.0, 0.0])), 1.0);
        assert_eq!(distance(&two_points(), &p(&[0.0, 1.0])), 2f64.sqrt());
        let cube = CompactShape::cuboid(p(&[0.0; 3]), p(&[1.0; 3])).unwrap();
        assert!((distance(&cube, &p(&[2.0; 3])) - 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn projection_set_examples() {
        let ps = projection_set(&two_points(), &p(&[0.0, 0.5]), TieSlack::Absolute(1e-9));
        assert_eq!(ps.projections, vec![p(&[-1.0, 0.0]), p(&[1.0, 0.0])]);
        assert_eq!(ps.sites, vec![0, 1]);

        let ball = CompactShape::ball(p(&[0.0, 0.0]), 1.0).unwrap();
        let ps = projection_set(&ball, &p(&[3.0, 0.0]), TieSlack::default());
        assert_eq!(ps.projections, vec![p(&[1.0, 0.0])]);

        let c = CompactShape::cloud(PointCloud::from_rows(&[&[0.0, 0.0], &[1.0, 0.0], &[0.9, 0.0]]).unwrap()).unwrap();
        let ps = projection_set(&c, &p(&[2.0, 0.0]), TieSlack::Absolute(0.2));
        assert_eq!(ps.projections, vec![p(&[1.0, 0.0]), p(&[0.9, 0.0])]);
        assert_eq!(ps.dist, 1.0);
    }

    #[test]
    fn gradient_two_point_example() {
        let g = gradient(&two_points(), &p(&[0.0, 1.0]), TieSlack::default()).unwrap();
        assert_eq!(g.gamma, p(&[0.0, 0.0]));
        assert_eq!(g.r, 1.0);
        assert_eq!(g.dist, 2f64.sqrt());
        assert!((g.mu - 0.5f64.sqrt()).abs() < 1e-15);
        assert!(g.grad.dist(&p(&[0.0, 0.5f64.sqrt()])) < 1e-15);
    }

    #[test]
    fn gradient_unique_projection() {
        let ball = CompactShape::ball(p(&[0.0, 0.0]), 1.0).unwrap();
        let g = gradient(&ball, &p(&[0.0, 3.0]), TieSlack::default()).unwrap();
        assert_eq!(g.mu, 1.0);
        assert_eq!(g.grad, p(&[0.0, 1.0]));
        assert_eq!(g.r, 0.0);
    }

    #[test]
    fn gradient_vanishes_at_circumcenter() {
        let h = 3f64.sqrt() / 2.0;
        let tri = CompactShape::cloud(PointCloud::from_rows(&[&[1.0, 0.0], &[-0.5, h], &[-0.5, -h]]).unwrap()).unwrap();
        let g = gradient(&tri, &p(&[0.0, 0.0]), TieSlack::default()).unwrap();
        assert_eq!(g.mu, 0.0);
        assert!(g.gamma.norm() < 1e-15);
    }

    #[test]
    fn gradient_on_set_fails() {
        let ball = CompactShape::ball(p(&[0.0, 0.0]), 1.0).unwrap();
        assert!(matches!(gradient(&ball, &p(&[0.5, 0.0]), TieSlack::default()), Err(Error::GradientOnSet)));
        assert!(matches!(gradient(&two_points(), &p(&[1.0, 0.0]), TieSlack::default()), Err(Error::GradientOnSet)));
    }

    #[test]
    fn project_examples() {
        let ball = CompactShape::ball(p(&[0.0, 0.0]), 1.0).unwrap();
        assert_eq!(project(&ball, &p(&[2.0, 0.0]), TieSlack::default()).unwrap(), p(&[1.0, 0.0]));
        assert!(matches!(project(&two_points(), &p(&[0.0, 0.5]), TieSlack::default()), Err(Error::OnMedialAxis)));
        // Points inside a solid shape project to themselves.
        assert_eq!(project(&ball, &p(&[0.0, 0.0]), TieSlack::default()).unwrap(), p(&[0.0, 0.0]));
    }
}
