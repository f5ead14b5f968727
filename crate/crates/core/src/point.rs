//! Fixed-capacity points in ℝᵈ (1 ≤ d ≤ 8), point clouds and axis-aligned boxes.
//!
//! The ambient dimension is runtime data. A [`Point`] stores its coordinates
//! inline so that inner loops never allocate.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Index, Mul, Neg, Sub};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 8;

#[derive(Clone, Copy, PartialEq)]
pub struct Point {
    coords: [f64; MAX_DIM],
    dim: u8,
}

impl Point {
    pub fn new(coords: &[f64]) -> Result<Self> {
        if coords.is_empty() || coords.len() > MAX_DIM {
            return Err(Error::InvalidPoint(format!("dimension {} outside 1..={MAX_DIM}", coords.len())));
        }
        if let Some(c) = coords.iter().find(|c| !c.is_finite()) {
            return Err(Error::InvalidPoint(format!("non-finite coordinate {c}")));
        }
        Ok(Self::from_slice(coords))
    }

    /// Builds a point without validation. Panics if `coords.len() > MAX_DIM`.
    pub fn from_slice(coords: &[f64]) -> Self {
        let mut c = [0.0; MAX_DIM];
        c[..coords.len()].copy_from_slice(coords);
        Self { coords: c, dim: coords.len() as u8 }
    }

    pub fn zeros(dim: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&dim));
        Self { coords: [0.0; MAX_DIM], dim: dim as u8 }
    }

    #[inline]
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize) -> f64) -> Self {
        let mut p = Self::zeros(dim);
        for i in 0..dim {
            p.coords[i] = f(i);
        }
        p
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.coords[..self.dim as usize]
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.coords[..self.dim as usize]
    }

    #[inline]
    pub fn dot(&self, other: &Point) -> f64 {
        self.as_slice().iter().zip(other.as_slice()).map(|(a, b)| a * b).sum()
    }

    #[inline]
    pub fn norm2(&self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(&self) -> f64 {
        self.norm2().sqrt()
    }

    /// Squared Euclidean distance. Symmetric bit-for-bit in its arguments.
    #[inline]
    pub fn dist2(&self, other: &Point) -> f64 {
        self.as_slice().iter().zip(other.as_slice()).map(|(a, b)| (a - b) * (a - b)).sum()
    }

    #[inline]
    pub fn dist(&self, other: &Point) -> f64 {
        self.dist2(other).sqrt()
    }

    pub fn midpoint(&self, other: &Point) -> Point {
        Point::from_fn(self.dim(), |i| 0.5 * (self[i] + other[i]))
    }

    pub fn is_finite(&self) -> bool {
        self.as_slice().iter().all(|c| c.is_finite())
    }

    /// Lexicographic order on coordinates (total order on floats).
    pub fn lex_cmp(&self, other: &Point) -> Ordering {
        for (a, b) in self.as_slice().iter().zip(other.as_slice()) {
            match a.total_cmp(b) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        self.dim.cmp(&other.dim)
    }
}

impl Index<usize> for Point {
    type Output = f64;
    #[inline]
    fn index(&self, i: usize) -> &f64 {
        &self.as_slice()[i]
    }
}

impl Add for Point {
    type Output = Point;
    #[inline]
    fn add(self, rhs: Point) -> Point {
        Point::from_fn(self.dim(), |i| self[i] + rhs[i])
    }
}

impl AddAssign for Point {
    fn add_assign(&mut self, rhs: Point) {
        for (a, b) in self.as_mut_slice().iter_mut().zip(rhs.as_slice()) {
            *a += b;
        }
    }
}

impl Sub for Point {
    type Output = Point;
    #[inline]
    fn sub(self, rhs: Point) -> Point {
        Point::from_fn(self.dim(), |i| self[i] - rhs[i])
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    #[inline]
    fn mul(self, s: f64) -> Point {
        Point::from_fn(self.dim(), |i| self[i] * s)
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        self * -1.0
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.as_slice()).finish()
    }
}

impl Serialize for Point {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.as_slice().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Point {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<f64>::deserialize(d)?;
        Point::new(&v).map_err(serde::de::Error::custom)
    }
}

/// Nonempty list of finite points sharing one dimension.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointCloud {
    points: Vec<Point>,
    dim: usize,
}

impl PointCloud {
    pub fn new(points: Vec<Point>) -> Result<Self> {
        let dim = points.first().ok_or(Error::EmptySet)?.dim();
        for p in &points {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: p.dim() });
            }
            if !p.is_finite() {
                return Err(Error::InvalidPoint(format!("non-finite point {p:?}")));
            }
        }
        Ok(Self { points, dim })
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        Self::new(rows.iter().map(|r| Point::new(r)).collect::<Result<_>>()?)
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn into_points(self) -> Vec<Point> {
        self.points
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn bbox(&self) -> Aabb {
        Aabb::enclosing(&self.points).expect("cloud is nonempty")
    }

    /// Applies `f` to every point; used to build perturbed copies.
    pub fn map(&self, f: impl FnMut(&Point) -> Point) -> Result<Self> {
        Self::new(self.points.iter().map(f).collect())
    }
}

/// Axis-aligned box `[min, max]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: Point,
    pub max: Point,
}

impl Aabb {
    pub fn new(min: Point, max: Point) -> Result<Self> {
        if min.dim() != max.dim() {
            return Err(Error::DimensionMismatch { expected: min.dim(), found: max.dim() });
        }
        if (0..min.dim()).any(|i| min[i] > max[i]) {
            return Err(Error::InvalidShape(format!("box min {min:?} exceeds max {max:?}")));
        }
        Ok(Self { min, max })
    }

    pub fn enclosing(points: &[Point]) -> Option<Self> {
        let first = *points.first()?;
        let (mut lo, mut hi) = (first, first);
        for p in &points[1..] {
            for i in 0..first.dim() {
                lo.as_mut_slice()[i] = lo[i].min(p[i]);
                hi.as_mut_slice()[i] = hi[i].max(p[i]);
            }
        }
        Some(Self { min: lo, max: hi })
    }

    pub fn dim(&self) -> usize {
        self.min.dim()
    }

    pub fn volume(&self) -> f64 {
        (0..self.dim()).map(|i| self.max[i] - self.min[i]).product()
    }

    pub fn inflate(&self, r: f64) -> Aabb {
        let d = self.dim();
        Aabb { min: Point::from_fn(d, |i| self.min[i] - r), max: Point::from_fn(d, |i| self.max[i] + r) }
    }

    pub fn union(&self, other: &Aabb) -> Aabb {
        let d = self.dim();
        Aabb {
            min: Point::from_fn(d, |i| self.min[i].min(other.min[i])),
            max: Point::from_fn(d, |i| self.max[i].max(other.max[i])),
        }
    }

    pub fn contains(&self, p: &Point) -> bool {
        (0..self.dim()).all(|i| self.min[i] <= p[i] && p[i] <= self.max[i])
    }

    pub fn clamp(&self, p: &Point) -> Point {
        Point::from_fn(self.dim(), |i| p[i].clamp(self.min[i], self.max[i]))
    }

    pub fn diagonal(&self) -> f64 {
        self.min.dist(&self.max)
    }

    /// Maps a point of the unit cube affinely into the box.
    pub fn from_unit(&self, u: &[f64]) -> Point {
        Point::from_fn(self.dim(), |i| self.min[i] + u[i] * (self.max[i] - self.min[i]))
    }

    /// The 2ᵈ corners, in binary-counting order.
    pub fn corners(&self) -> Vec<Point> {
        let d = self.dim();
        (0..1usize << d)
            .map(|mask| Point::from_fn(d, |i| if mask >> i & 1 == 1 { self.max[i] } else { self.min[i] }))
            .collect()
    }
}
