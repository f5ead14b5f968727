//! Smallest enclosing ball, move-to-front Welzl recursion.
//!
//! Input order is used as given (no shuffling) so results are reproducible.
//! Support sets hold at most `d + 1` points; the ball through a support set is
//! its circumscribed ball within the support's affine hull.

use crate::point::Point;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ball {
    pub center: Point,
    pub radius: f64,
}

impl Ball {
    fn contains(&self, p: &Point) -> bool {
        self.radius >= 0.0 && p.dist(&self.center) <= self.radius + 1e-12 * (1.0 + self.radius)
    }
}

/// Minimal ball containing `points`. Panics on an empty slice.
///
/// The returned radius is the largest distance from the center to an input,
/// so containment holds exactly.
pub fn smallest_enclosing_ball(points: &[Point]) -> Ball {
    assert!(!points.is_empty(), "smallest_enclosing_ball of an empty set");
    let dim = points[0].dim();
    let mut pts = points.to_vec();
    let mut support = Vec::with_capacity(dim + 1);
    let ball = mtf(&mut pts, points.len(), &mut support, dim).expect("nonempty input");
    let radius = points.iter().map(|p| p.dist(&ball.center)).fold(0.0, f64::max);
    Ball { center: ball.center, radius }
}

fn mtf(pts: &mut [Point], n: usize, support: &mut Vec<Point>, dim: usize) -> Option<Ball> {
    let mut ball = circumball(support);
    if support.len() == dim + 1 {
        return ball;
    }
    for i in 0..n {
        let inside = ball.as_ref().is_some_and(|b| b.contains(&pts[i]));
        if !inside {
            support.push(pts[i]);
            ball = mtf(pts, i, support, dim);
            support.pop();
            pts[..=i].rotate_right(1);
        }
    }
    ball
}

/// Ball through all support points, centered in their affine hull.
fn circumball(support: &[Point]) -> Option<Ball> {
    let (q0, rest) = support.split_first()?;
    if rest.is_empty() {
        return Some(Ball { center: *q0, radius: 0.0 });
    }
    // center = q0 + Σ λ_j v_j with 2 <v_i, v_j> λ_j = |v_i|².
    let v: Vec<Point> = rest.iter().map(|q| *q - *q0).collect();
    let k = v.len();
    let mut a = vec![vec![0.0; k + 1]; k];
    for i in 0..k {
        for j in 0..k {
            a[i][j] = 2.0 * v[i].dot(&v[j]);
        }
        a[i][k] = v[i].norm2();
    }
    let center = match solve(&mut a) {
        Some(lambda) => {
            let mut c = *q0;
            for (l, vi) in lambda.iter().zip(&v) {
                c += *vi * *l;
            }
            c
        }
        None => {
            // Affinely dependent support: fall back to an enclosing ball
            // centered at the centroid.
            let mut c = Point::zeros(q0.dim());
            for p in support {
                c += *p;
            }
            c * (1.0 / support.len() as f64)
        }
    };
    let radius = support.iter().map(|p| p.dist(&center)).fold(0.0, f64::max);
    Some(Ball { center, radius })
}

/// Gaussian elimination with partial pivoting on an augmented `k × (k+1)` matrix.
fn solve(a: &mut [Vec<f64>]) -> Option<Vec<f64>> {
    let k = a.len();
    let scale = a.iter().flat_map(|r| r[..k].iter()).fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return None;
    }
    for col in 0..k {
        let piv = (col..k).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() <= 1e-13 * scale {
            return None;
        }
        a.swap(col, piv);
        let pivot = a[col].clone();
        for row in a[col + 1..k].iter_mut() {
            let f = row[col] / pivot[col];
            for (x, p) in row[col..=k].iter_mut().zip(&pivot[col..=k]) {
                *x -= f * p;
            }
        }
    }
    let mut x = vec![0.0; k];
    for row in (0..k).rev() {
        let s: f64 = (row + 1..k).map(|c| a[row][c] * x[c]).sum();
        x[row] = (a[row][k] - s) / a[row][row];
    }
    Some(x)
}
