//! Run configuration (TOML). Unknown keys are rejected everywhere.
//!
//! ```toml
//! seed = 7
//! samples = 100000          # main budget of the command, same as --samples
//!
//! [shape]
//! kind = "points"           # points | cloud | ball | box | segments | comb | union
//! points = [[-1.0, 0.0], [1.0, 0.0]]
//!
//! [medial]
//! mu = 0.6
//! eps = 0.5
//! ```
//!
//! Relative cloud and query paths are resolved against the config file's
//! directory.

use std::path::{Path, PathBuf};

use geoinfer::curvature::RegionBins;
use geoinfer::shape::comb_cloud;
use geoinfer::{Aabb, CompactShape, Point, PointCloud, Segment, TieSlack};
use serde::{Deserialize, Serialize};

use crate::run::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ShapeSpec {
    /// Point cloud file (XYZ/CSV).
    Cloud {
        path: PathBuf,
    },
    /// Inline point cloud.
    Points {
        points: Vec<Vec<f64>>,
    },
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    Box {
        min: Vec<f64>,
        max: Vec<f64>,
    },
    Segments {
        segments: Vec<[Vec<f64>; 2]>,
    },
    /// Sampled comb: `teeth` horizontal teeth of length `scale` at heights
    /// `scale·2^{-i}`.
    Comb {
        teeth: usize,
        scale: f64,
        spacing: f64,
    },
    Union {
        members: Vec<ShapeSpec>,
    },
}

fn point(c: &[f64]) -> Result<Point, CliError> {
    Ok(Point::new(c)?)
}

impl ShapeSpec {
    pub fn build(&self, base: &Path) -> Result<CompactShape, CliError> {
        Ok(match self {
            ShapeSpec::Cloud { path } => CompactShape::cloud(geoinfer::io::read_cloud_file(&base.join(path))?)?,
            ShapeSpec::Points { points } => {
                let pts = points.iter().map(|p| point(p)).collect::<Result<Vec<_>, _>>()?;
                CompactShape::cloud(PointCloud::new(pts)?)?
            }
            ShapeSpec::Ball { center, radius } => CompactShape::ball(point(center)?, *radius)?,
            ShapeSpec::Box { min, max } => CompactShape::cuboid(point(min)?, point(max)?)?,
            ShapeSpec::Segments { segments } => CompactShape::segments(
                segments
                    .iter()
                    .map(|[a, b]| Ok(Segment { a: point(a)?, b: point(b)? }))
                    .collect::<Result<Vec<_>, CliError>>()?,
            )?,
            ShapeSpec::Comb { teeth, scale, spacing } => CompactShape::cloud(comb_cloud(*teeth, *scale, *spacing)?)?,
            ShapeSpec::Union { members } => {
                CompactShape::union(members.iter().map(|m| m.build(base)).collect::<Result<Vec<_>, _>>()?)?
            }
        })
    }

    pub fn build_cloud(&self, base: &Path) -> Result<PointCloud, CliError> {
        match self.build(base)? {
            CompactShape::Cloud(idx) => Ok(idx.cloud().clone()),
            _ => Err(CliError::Config("this command needs a point-cloud shape".into())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSpec {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl BoxSpec {
    pub fn build(&self) -> Result<Aabb, CliError> {
        Ok(Aabb::new(point(&self.min)?, point(&self.max)?)?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
    /// Points per axis.
    pub n: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistParams {
    pub queries: Option<PathBuf>,
    pub grid: Option<GridSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MedialParams {
    pub mu: f64,
    pub eps: f64,
}

impl Default for MedialParams {
    fn default() -> Self {
        Self { mu: 0.5, eps: 0.1 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CoveringParams {
    pub mu: f64,
    pub eps: f64,
    pub etas: Vec<f64>,
    pub max_rays: usize,
    pub tolerance: f64,
}

impl Default for CoveringParams {
    fn default() -> Self {
        Self { mu: 0.3, eps: 0.2, etas: vec![0.2, 0.1, 0.05, 0.02, 0.01], max_rays: 1 << 21, tolerance: 0.05 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "lowercase")]
pub enum RegionSpec {
    Box(BoxSpec),
    Offset(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OffsetCoveringSpec {
    pub r: f64,
    pub eps: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoundaryParams {
    pub region: RegionSpec,
    /// Also estimate `N(∂K^r, eps)`.
    pub offset_covering: Option<OffsetCoveringSpec>,
}

impl Default for BoundaryParams {
    fn default() -> Self {
        Self { region: RegionSpec::Offset(0.5), offset_covering: None }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CurvatureParams {
    pub bins: RegionBins,
    /// Defaults to Chebyshev points in `[0.2, 0.8]` times the reach (or
    /// diameter for convex shapes).
    pub r_grid: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StabilityParams {
    /// Perturbed set; when absent, the shape jittered by `jitter`.
    pub perturbed: Option<ShapeSpec>,
    pub jitter: f64,
    /// Integration box; defaults to the bounding box grown by 1.
    pub region: Option<BoxSpec>,
    pub l: f64,
    pub r: Option<f64>,
    pub mu: f64,
    pub eps: f64,
    pub rays: usize,
}

impl Default for StabilityParams {
    fn default() -> Self {
        Self { perturbed: None, jitter: 1e-3, region: None, l: 0.5, r: None, mu: 0.5, eps: 0.1, rays: 1 << 16 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HolderParams {
    pub deltas: Vec<f64>,
    pub trials: usize,
    pub region: Option<BoxSpec>,
}

impl Default for HolderParams {
    fn default() -> Self {
        Self { deltas: vec![0.1, 0.05, 0.02, 0.01, 0.005, 0.002], trials: 4, region: None }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: u64,
    pub samples: Option<usize>,
    pub tie_slack: TieSlack,
    pub shape: Option<ShapeSpec>,
    pub dist: DistParams,
    pub medial: MedialParams,
    pub covering: CoveringParams,
    pub boundary: BoundaryParams,
    pub curvature: CurvatureParams,
    pub stability: StabilityParams,
    pub holder: HolderParams,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(geoinfer::Error::from)?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.tie_slack.validate()?;
        if self.samples == Some(0) {
            return Err(CliError::Config("samples must be >= 1".into()));
        }
        Ok(())
    }

    pub fn shape(&self) -> Result<&ShapeSpec, CliError> {
        self.shape.as_ref().ok_or_else(|| CliError::Config("missing [shape] section".into()))
    }

    pub fn samples_or(&self, default: usize) -> usize {
        self.samples.unwrap_or(default)
    }
}
