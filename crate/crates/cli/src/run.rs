use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use geoinfer::covering::{boundary_covering, covering_scaling_experiment, CoveringBudget};
use geoinfer::curvature::{default_r_grid, steiner_fit};
use geoinfer::distance::gradient;
use geoinfer::io::{fmt_f64, read_cloud_file, write_medial_csv};
use geoinfer::measures::{boundary_measure, Region};
use geoinfer::medial::{sample_mu_medial, MedialQuery};
use geoinfer::rng::derive_seed;
use geoinfer::stability::{holder_experiment, jitter, stability_report, StabilityParams};
use geoinfer::{Aabb, CompactShape, Point};
use serde::Serialize;

use crate::config::{RegionSpec, RunConfig};
use crate::Command;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] geoinfer::Error),
    #[error("config: {0}")]
    Config(String),
}

impl CliError {
    pub fn is_input(&self) -> bool {
        match self {
            CliError::Core(e) => e.is_input_error(),
            CliError::Config(_) => true,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Serialize)]
struct Report<'a, T: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    seed: u64,
    config: &'a RunConfig,
    result: T,
}

fn write_report<T: Serialize>(out: &Path, cmd: Command, cfg: &RunConfig, result: T) -> Result<()> {
    let report = Report {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command: cmd.name(),
        seed: cfg.seed,
        config: cfg,
        result,
    };
    let text = serde_json::to_string_pretty(&report).expect("reports serialize");
    std::fs::write(out.join(format!("{}.json", cmd.name())), text + "\n").map_err(geoinfer::Error::from)?;
    Ok(())
}

fn create(out: &Path, name: &str) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(out.join(name)).map_err(geoinfer::Error::from)?))
}

fn flush(mut w: BufWriter<File>) -> Result<()> {
    w.flush().map_err(geoinfer::Error::from)?;
    Ok(())
}

pub fn dispatch(cmd: Command, cfg: &RunConfig, base: &Path, out: &Path) -> Result<()> {
    let mut cfg = cfg.clone();
    match cmd {
        Command::Dist => dist(&cfg, base, out),
        Command::Medial => {
            cfg.samples = Some(cfg.samples_or(100_000));
            medial(&cfg, base, out)
        }
        Command::Covering => {
            cfg.samples = Some(cfg.samples_or(1 << 16));
            covering(&cfg, base, out)
        }
        Command::Boundary => {
            cfg.samples = Some(cfg.samples_or(100_000));
            boundary(&cfg, base, out)
        }
        Command::Curvature => {
            cfg.samples = Some(cfg.samples_or(100_000));
            curvature(&cfg, base, out)
        }
        Command::Stability => {
            cfg.samples = Some(cfg.samples_or(100_000));
            stability(&cfg, base, out)
        }
        Command::Holder => {
            cfg.samples = Some(cfg.samples_or(100_000));
            holder(&cfg, base, out)
        }
    }
}

fn grid_points(min: &[f64], max: &[f64], n: usize) -> Result<Vec<Point>> {
    if min.len() != max.len() || n == 0 {
        return Err(CliError::Config("grid needs matching min/max and n >= 1".into()));
    }
    let d = min.len();
    let step =
        |i: usize, k: usize| if n == 1 { min[i] } else { min[i] + (max[i] - min[i]) * k as f64 / (n - 1) as f64 };
    let total = n
        .checked_pow(d as u32)
        .filter(|t| *t <= 10_000_000)
        .ok_or_else(|| CliError::Config("grid too large".into()))?;
    (0..total)
        .map(|mut idx| {
            let mut c = vec![0.0; d];
            for (i, ci) in c.iter_mut().enumerate() {
                *ci = step(i, idx % n);
                idx /= n;
            }
            Ok(Point::new(&c)?)
        })
        .collect()
}

#[derive(Serialize)]
struct DistSummary {
    queries: usize,
    on_set: usize,
}

fn dist(cfg: &RunConfig, base: &Path, out: &Path) -> Result<()> {
    let shape = cfg.shape()?.build(base)?;
    let queries: Vec<Point> = match (&cfg.dist.queries, &cfg.dist.grid) {
        (Some(path), None) => read_cloud_file(&base.join(path))?.into_points(),
        (None, Some(g)) => grid_points(&g.min, &g.max, g.n)?,
        _ => return Err(CliError::Config("[dist] needs exactly one of `queries` or `grid`".into())),
    };
    if queries.iter().any(|q| q.dim() != shape.dim()) {
        return Err(geoinfer::Error::DimensionMismatch { expected: shape.dim(), found: queries[0].dim() }.into());
    }
    let rows = geoinfer::par::map_slice(&queries, |q| match gradient(&shape, q, cfg.tie_slack) {
        Ok(g) => (g.dist, g.mu),
        // The generalized gradient vanishes on K.
        Err(_) => (0.0, 0.0),
    });
    let mut w = create(out, "dist.csv")?;
    let d = shape.dim();
    let header: Vec<String> = (1..=d).map(|i| format!("x{i}")).chain(["dist".into(), "mu".into()]).collect();
    let io = |e: std::io::Error| CliError::Core(e.into());
    writeln!(w, "{}", header.join(",")).map_err(io)?;
    for (q, (dk, mu)) in queries.iter().zip(&rows) {
        let mut row: Vec<String> = q.as_slice().iter().map(|v| fmt_f64(*v)).collect();
        row.push(fmt_f64(*dk));
        row.push(fmt_f64(*mu));
        writeln!(w, "{}", row.join(",")).map_err(io)?;
    }
    flush(w)?;
    let on_set = rows.iter().filter(|r| r.0 == 0.0).count();
    write_report(out, Command::Dist, cfg, DistSummary { queries: queries.len(), on_set })
}

#[derive(Serialize)]
struct MedialSummary {
    n_rays: usize,
    retained: usize,
    on_set: usize,
    ties: usize,
    escaped: usize,
    rejected_mu: usize,
    rejected_eps: usize,
    diameter: f64,
    distance_bound: f64,
    max_dist: f64,
    /// Extent of the samples along each axis.
    extent_min: Vec<f64>,
    extent_max: Vec<f64>,
}

fn medial(cfg: &RunConfig, base: &Path, out: &Path) -> Result<()> {
    let shape = cfg.shape()?.build(base)?;
    let mut q = MedialQuery::new(cfg.medial.mu, cfg.medial.eps)?;
    q.slack = cfg.tie_slack;
    let s = sample_mu_medial(&shape, &q, cfg.samples_or(0), cfg.seed)?;
    let mut w = create(out, "medial.csv")?;
    write_medial_csv(&mut w, &s.points)?;
    flush(w)?;
    let d = shape.dim();
    let diameter = shape.diameter();
    let summary = MedialSummary {
        n_rays: s.n_rays,
        retained: s.points.len(),
        on_set: s.on_set,
        ties: s.ties,
        escaped: s.escaped,
        rejected_mu: s.rejected_mu,
        rejected_eps: s.rejected_eps,
        diameter,
        distance_bound: q.distance_bound(diameter),
        max_dist: s.points.iter().map(|p| p.dist).fold(0.0, f64::max),
        extent_min: (0..d).map(|i| s.points.iter().map(|p| p.m[i]).fold(f64::INFINITY, f64::min)).collect(),
        extent_max: (0..d).map(|i| s.points.iter().map(|p| p.m[i]).fold(f64::NEG_INFINITY, f64::max)).collect(),
    };
    write_report(out, Command::Medial, cfg, summary)
}

fn covering(cfg: &RunConfig, base: &Path, out: &Path) -> Result<()> {
    let shape = cfg.shape()?.build(base)?;
    let p = &cfg.covering;
    let budget = CoveringBudget { n_rays: cfg.samples_or(0), max_rays: p.max_rays, tolerance: p.tolerance };
    let table = covering_scaling_experiment(&shape, p.mu, p.eps, &p.etas, budget, cfg.seed)?;
    let mut w = create(out, "covering.csv")?;
    let io = |e: std::io::Error| CliError::Core(e.into());
    writeln!(w, "eta,count,count_half,stabilized").map_err(io)?;
    for r in &table.rows {
        writeln!(w, "{},{},{},{}", fmt_f64(r.eta), r.count, r.count_half, r.stabilized).map_err(io)?;
    }
    flush(w)?;
    write_report(out, Command::Covering, cfg, table)
}

#[derive(Serialize)]
struct BoundarySummary {
    volume: f64,
    total: f64,
    n_samples: usize,
    accepted: usize,
    ties: usize,
    atoms: usize,
    offset_covering: Option<geoinfer::covering::BoundaryCovering>,
}

fn boundary(cfg: &RunConfig, base: &Path, out: &Path) -> Result<()> {
    let shape = cfg.shape()?.build(base)?;
    let region = match &cfg.boundary.region {
        RegionSpec::Box(b) => Region::Box(b.build()?),
        RegionSpec::Offset(r) => Region::Offset(*r),
    };
    let n = cfg.samples_or(0);
    let bm = boundary_measure(&shape, &region, n, cfg.seed)?;
    let w = create(out, "boundary.csv")?;
    bm.measure.write_csv(w, cfg.seed)?;
    let offset_covering = match &cfg.boundary.offset_covering {
        Some(c) => Some(boundary_covering(&shape, c.r, c.eps, n, derive_seed(cfg.seed, 1))?),
        None => None,
    };
    let summary = BoundarySummary {
        volume: bm.volume,
        total: bm.measure.total(),
        n_samples: bm.n_samples,
        accepted: bm.accepted,
        ties: bm.ties,
        atoms: bm.measure.len(),
        offset_covering,
    };
    write_report(out, Command::Boundary, cfg, summary)
}

fn curvature(cfg: &RunConfig, base: &Path, out: &Path) -> Result<()> {
    let shape = cfg.shape()?.build(base)?;
    let mut cfg = cfg.clone();
    let grid = cfg.curvature.r_grid.clone().unwrap_or_else(|| default_r_grid(&shape));
    cfg.curvature.r_grid = Some(grid.clone());
    let fit = steiner_fit(&shape, cfg.curvature.bins, &grid, cfg.samples_or(0), cfg.seed)?;
    write_report(out, Command::Curvature, &cfg, fit)
}

fn default_region(shape: &CompactShape, spec: &Option<crate::config::BoxSpec>) -> Result<Aabb> {
    match spec {
        Some(b) => b.build(),
        None => Ok(shape.bbox().inflate(1.0)),
    }
}

fn stability(cfg: &RunConfig, base: &Path, out: &Path) -> Result<()> {
    let spec = cfg.shape()?;
    let k = spec.build_cloud(base)?;
    let p = &cfg.stability;
    let k2 = match &p.perturbed {
        Some(s) => s.build_cloud(base)?,
        None => jitter(&k, p.jitter, derive_seed(cfg.seed, 7))?,
    };
    let e = default_region(&spec.build(base)?, &p.region)?;
    let params =
        StabilityParams { e, l: p.l, r: p.r, n_samples: cfg.samples_or(0), mu: p.mu, eps: p.eps, n_rays: p.rays };
    let rep = stability_report(&k, &k2, &params, cfg.seed)?;
    write_report(out, Command::Stability, cfg, rep)
}

fn holder(cfg: &RunConfig, base: &Path, out: &Path) -> Result<()> {
    let spec = cfg.shape()?;
    let k = spec.build_cloud(base)?;
    let p = &cfg.holder;
    let e = default_region(&spec.build(base)?, &p.region)?;
    let curve = holder_experiment(&k, &e, &p.deltas, p.trials, cfg.samples_or(0), cfg.seed)?;
    let mut w = create(out, "holder.csv")?;
    let io = |e: std::io::Error| CliError::Core(e.into());
    writeln!(w, "delta,hausdorff,l1,l1_stderr").map_err(io)?;
    for j in 0..curve.deltas.len() {
        writeln!(
            w,
            "{},{},{},{}",
            fmt_f64(curve.deltas[j]),
            fmt_f64(curve.hausdorff[j]),
            fmt_f64(curve.l1[j].value),
            fmt_f64(curve.l1[j].stderr)
        )
        .map_err(io)?;
    }
    flush(w)?;
    write_report(out, Command::Holder, cfg, curve)
}
