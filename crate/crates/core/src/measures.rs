//! Discrete measures, Monte Carlo boundary measures and Hausdorff distance.
//!
//! The boundary measure `μ_{K,E}` pushes Lebesgue measure on `E` forward
//! through the projection `p_K`. Samples are drawn uniformly in `E` (offset
//! regions `K^r` by rejection from the bounding box of `K` grown by `r`),
//! tie samples are dropped, and each accepted sample contributes
//! `vol(E) / n_accepted` at its projection.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::index::NnIndex;
use crate::io::fmt_f64;
use crate::par;
use crate::point::{Aabb, Point, PointCloud};
use crate::rng::{BoxSampler, Sampling, BATCH};
use crate::shape::{CompactShape, TieSlack};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiscreteMeasure {
    pub atoms: Vec<Point>,
    pub masses: Vec<f64>,
}

impl DiscreteMeasure {
    pub fn new(atoms: Vec<Point>, masses: Vec<f64>) -> Result<Self> {
        if atoms.len() != masses.len() {
            return Err(Error::InvalidParameter(format!("{} atoms but {} masses", atoms.len(), masses.len())));
        }
        if masses.iter().any(|m| !(*m >= 0.0 && m.is_finite())) {
            return Err(Error::InvalidParameter("masses must be finite and >= 0".into()));
        }
        Ok(Self { atoms, masses })
    }

    pub fn total(&self) -> f64 {
        self.masses.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Same atoms, masses divided by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        Self { atoms: self.atoms.clone(), masses: self.masses.iter().map(|m| m / s).collect() }
    }

    /// CSV with columns `x1..xd,mass`; a comment header records the total
    /// and the seed.
    pub fn write_csv<W: Write>(&self, mut w: W, seed: u64) -> Result<()> {
        let d = self.atoms.first().map_or(0, |a| a.dim());
        writeln!(w, "# total={} seed={seed}", fmt_f64(self.total()))?;
        let cols: Vec<String> = (1..=d).map(|i| format!("x{i}")).chain(["mass".to_string()]).collect();
        writeln!(w, "{}", cols.join(","))?;
        for (a, m) in self.atoms.iter().zip(&self.masses) {
            let row: Vec<String> = a.as_slice().iter().chain([m]).map(|v| fmt_f64(*v)).collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Integration domain of a boundary measure.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    Box(Aabb),
    /// The offset `K^r`.
    Offset(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundaryMeasure {
    pub measure: DiscreteMeasure,
    /// `vol(E)`: exact for boxes, a Monte Carlo estimate for offsets.
    pub volume: f64,
    pub n_samples: usize,
    pub accepted: usize,
    pub ties: usize,
}

fn sampling_box(shape: &CompactShape, region: &Region) -> Result<Aabb> {
    match *region {
        Region::Box(bx) => Ok(bx),
        Region::Offset(r) if r > 0.0 => Ok(shape.bbox().inflate(r)),
        Region::Offset(r) => Err(Error::InvalidParameter(format!("offset radius must be > 0, got {r}"))),
    }
}

/// Monte Carlo estimate of `μ_{K,E}`. For clouds the atoms are the cloud
/// points in order, each carrying the mass of its Voronoi cell within `E`;
/// for analytic shapes every accepted sample is its own atom.
pub fn boundary_measure(shape: &CompactShape, region: &Region, n_samples: usize, seed: u64) -> Result<BoundaryMeasure> {
    if n_samples == 0 {
        return Err(Error::InvalidParameter("sample count must be at least 1".into()));
    }
    let bx = sampling_box(shape, region)?;
    let sampler = BoxSampler::new(bx, Sampling::Random, seed)?;
    let radius = match region {
        Region::Offset(r) => Some(*r),
        Region::Box(_) => None,
    };
    let slack = TieSlack::default();
    struct Part {
        inside: usize,
        ties: usize,
        hits: Vec<(Option<usize>, Point)>,
    }
    let parts = par::map_batches(n_samples.div_ceil(BATCH), |b| {
        let len = BATCH.min(n_samples - b * BATCH);
        let mut xs = Vec::with_capacity(len);
        sampler.fill_batch(b, len, &mut xs);
        let mut part = Part { inside: 0, ties: 0, hits: Vec::with_capacity(len) };
        for x in xs {
            let c = shape.closest(&x, slack);
            if radius.is_some_and(|r| c.dist > r) {
                continue;
            }
            part.inside += 1;
            if c.unique {
                part.hits.push((c.site, c.point));
            } else {
                part.ties += 1;
            }
        }
        part
    });
    let inside: usize = parts.iter().map(|p| p.inside).sum();
    let ties: usize = parts.iter().map(|p| p.ties).sum();
    let rate = inside as f64 / n_samples as f64;
    if rate < 1e-3 {
        return Err(Error::LowAcceptance { rate });
    }
    let volume = match region {
        Region::Box(bx) => bx.volume(),
        Region::Offset(_) => bx.volume() * rate,
    };
    let accepted = inside - ties;
    if accepted == 0 {
        return Err(Error::LowAcceptance { rate: 0.0 });
    }
    let w = volume / accepted as f64;
    let measure = match shape.as_cloud() {
        Some(idx) => {
            let mut counts = vec![0usize; idx.len()];
            for p in &parts {
                for (site, _) in &p.hits {
                    counts[site.expect("cloud projections carry a site")] += 1;
                }
            }
            // Masses from counts so the total is `volume` up to rounding.
            let masses = counts.iter().map(|&c| volume * c as f64 / accepted as f64).collect();
            DiscreteMeasure::new(idx.points().to_vec(), masses)?
        }
        None => {
            let atoms: Vec<Point> = parts.iter().flat_map(|p| p.hits.iter().map(|h| h.1)).collect();
            let masses = vec![w; atoms.len()];
            DiscreteMeasure::new(atoms, masses)?
        }
    };
    Ok(BoundaryMeasure { measure, volume, n_samples, accepted, ties })
}

/// One sample of a coupled pair: the point and its projections on both sets.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CoupledSample {
    pub x: Point,
    pub p: Point,
    pub q: Point,
    pub site_p: Option<usize>,
    pub site_q: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Coupled {
    pub samples: Vec<CoupledSample>,
    pub n_samples: usize,
    /// Samples dropped because either projection is a tie.
    pub ties: usize,
    pub volume: f64,
}

/// Projects one uniform sample stream in `E` on both `K` and `K′`, dropping
/// samples that tie on either side.
pub fn coupled_projections(k: &CompactShape, k2: &CompactShape, e: &Aabb, n: usize, seed: u64) -> Result<Coupled> {
    if n == 0 {
        return Err(Error::InvalidParameter("sample count must be at least 1".into()));
    }
    if k.dim() != e.dim() || k2.dim() != e.dim() {
        return Err(Error::DimensionMismatch { expected: e.dim(), found: k.dim().max(k2.dim()) });
    }
    let sampler = BoxSampler::new(*e, Sampling::Random, seed)?;
    let slack = TieSlack::default();
    let parts = par::map_batches(n.div_ceil(BATCH), |b| {
        let len = BATCH.min(n - b * BATCH);
        let mut xs = Vec::with_capacity(len);
        sampler.fill_batch(b, len, &mut xs);
        let mut ties = 0;
        let mut out = Vec::with_capacity(len);
        for x in xs {
            let (a, c) = (k.closest(&x, slack), k2.closest(&x, slack));
            if a.unique && c.unique {
                out.push(CoupledSample { x, p: a.point, q: c.point, site_p: a.site, site_q: c.site });
            } else {
                ties += 1;
            }
        }
        (out, ties)
    });
    let ties = parts.iter().map(|p| p.1).sum();
    let samples = parts.into_iter().flat_map(|p| p.0).collect();
    Ok(Coupled { samples, n_samples: n, ties, volume: e.volume() })
}

impl Coupled {
    /// The two empirical boundary measures, normalized to unit mass. For
    /// clouds atoms are the cloud points, otherwise the projections.
    pub fn normalized_measures(
        &self,
        k: &CompactShape,
        k2: &CompactShape,
    ) -> Result<(DiscreteMeasure, DiscreteMeasure)> {
        let n = self.samples.len();
        if n == 0 {
            return Err(Error::LowAcceptance { rate: 0.0 });
        }
        let w = 1.0 / n as f64;
        let side =
            |shape: &CompactShape, pick: &dyn Fn(&CoupledSample) -> (Option<usize>, Point)| match shape.as_cloud() {
                Some(idx) => {
                    let mut m = vec![0.0; idx.len()];
                    let mut counts = vec![0usize; idx.len()];
                    for s in &self.samples {
                        counts[pick(s).0.expect("cloud site")] += 1;
                    }
                    for (mi, c) in m.iter_mut().zip(counts) {
                        *mi = c as f64 * w;
                    }
                    DiscreteMeasure::new(idx.points().to_vec(), m)
                }
                None => DiscreteMeasure::new(self.samples.iter().map(|s| pick(s).1).collect(), vec![w; n]),
            };
        Ok((side(k, &|s| (s.site_p, s.p))?, side(k2, &|s| (s.site_q, s.q))?))
    }
}

/// Exact Hausdorff distance between two clouds.
pub fn hausdorff(a: &PointCloud, b: &PointCloud) -> Result<f64> {
    let ia = NnIndex::build(a.clone())?;
    let ib = NnIndex::build(b.clone())?;
    Ok(hausdorff_indexed(&ia, &ib))
}

pub fn hausdorff_indexed(a: &NnIndex, b: &NnIndex) -> f64 {
    directed(a, b).max(directed(b, a))
}

fn directed(from: &NnIndex, to: &NnIndex) -> f64 {
    par::map_slice(from.points(), |p| to.nearest(p).1).into_iter().fold(0.0, f64::max).sqrt()
}
