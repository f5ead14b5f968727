//! Geometric inference on compact subsets of ℝᵈ.
//!
//! Distance functions and their generalized gradients, μ-medial axes and
//! their covering numbers, boundary measures, Federer curvature measures
//! recovered from tube volumes, and Monte Carlo checks of the Hausdorff
//! stability of projections.
//!
//! Monte Carlo work is split into fixed batches with one ChaCha8 stream per
//! batch (see [`rng`]); batches run on rayon when the `parallel` feature is
//! enabled and sequentially otherwise, with identical results.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod covering;
pub mod curvature;
pub mod distance;
pub mod error;
pub mod index;
pub mod io;
pub mod measures;
pub mod medial;
pub mod miniball;
pub mod par;
pub mod point;
pub mod rng;
pub mod shape;
pub mod stability;
pub mod stats;
pub mod transport;

pub use config::SceneConfig;
pub use error::{Error, Result};
pub use index::NnIndex;
pub use point::{Aabb, Point, PointCloud};
pub use shape::{CompactShape, Segment, TieSlack};
