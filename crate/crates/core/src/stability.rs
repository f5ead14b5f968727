//! Stability of projections and critical points under Hausdorff
//! perturbation.
//!
//! Both sampled sides of an inclusion check are finite, so every check adds a
//! net resolution `h` to its radius: the 95th percentile of nearest-neighbour
//! spacing within the sampled target set. `h` is part of every report.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::index::NnIndex;
use crate::measures::{coupled_projections, hausdorff_indexed, Coupled};
use crate::medial::{sample_mu_medial, MedialPoint, MedialQuery};
use crate::point::{Aabb, Point, PointCloud};
use crate::rng::{derive_seed, stream_rng};
use crate::shape::CompactShape;
use crate::stats::{fit_line, Estimate};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct L1Report {
    pub estimate: Estimate,
    pub n_samples: usize,
    pub ties: usize,
}

/// `‖p_K − p_K′‖_{L¹(E)}` from one sample stream projected on both sets.
pub fn l1_projection_distance(k: &CompactShape, k2: &CompactShape, e: &Aabb, n: usize, seed: u64) -> Result<L1Report> {
    Ok(l1_from(&coupled_projections(k, k2, e, n, seed)?))
}

fn l1_from(c: &Coupled) -> L1Report {
    if c.ties * 100 > c.n_samples {
        log::warn!("{} of {} samples tie on K or K' (degenerate configuration)", c.ties, c.n_samples);
    }
    let ds: Vec<f64> = c.samples.iter().map(|s| s.p.dist(&s.q)).collect();
    L1Report { estimate: Estimate::from_samples(&ds, c.volume), n_samples: c.n_samples, ties: c.ties }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeltaLReport {
    pub l: f64,
    pub estimate: Estimate,
    /// Samples of `Δ_L(K, K′) ∩ E`.
    pub witnesses: Vec<Point>,
    pub n_samples: usize,
    pub ties: usize,
}

/// Monte Carlo volume of `Δ_L(K, K′) ∩ E`, the points whose projections on
/// `K` and `K′` are at least `L` apart.
pub fn delta_l_measure(
    k: &CompactShape,
    k2: &CompactShape,
    l: f64,
    e: &Aabb,
    n: usize,
    seed: u64,
) -> Result<DeltaLReport> {
    if !(l > 0.0) {
        return Err(Error::InvalidParameter(format!("L must be > 0, got {l}")));
    }
    Ok(delta_l_from(&coupled_projections(k, k2, e, n, seed)?, l))
}

fn delta_l_from(c: &Coupled, l: f64) -> DeltaLReport {
    let witnesses: Vec<Point> = c.samples.iter().filter(|s| s.p.dist(&s.q) >= l).map(|s| s.x).collect();
    DeltaLReport {
        l,
        estimate: Estimate::proportion(witnesses.len(), c.n_samples, c.volume),
        witnesses,
        n_samples: c.n_samples,
        ties: c.ties,
    }
}

/// `μ = (1 + ((L−δ)/4R)²)^{-1/2} + 4√(δ/L)`.
pub fn lemma_mu(delta: f64, l: f64, r: f64) -> f64 {
    let a = (l - delta) / (4.0 * r);
    (1.0 + a * a).powf(-0.5) + 4.0 * (delta / l).sqrt()
}

/// 95th percentile of nearest-neighbour distances within `points`.
pub fn net_resolution(points: &[Point]) -> f64 {
    if points.len() < 2 {
        return 0.0;
    }
    let idx = NnIndex::build(PointCloud::new(points.to_vec()).expect("finite points")).expect("nonempty");
    let mut gaps: Vec<f64> = crate::par::map_slice(points, |p| idx.k_nearest(p, 2)[1].1.sqrt());
    gaps.sort_by(f64::total_cmp);
    gaps[((gaps.len() - 1) as f64 * 0.95).round() as usize]
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InclusionReport {
    pub delta: f64,
    pub l: f64,
    pub r: f64,
    pub mu_lemma: f64,
    /// `2√(Rδ)`.
    pub radius: f64,
    pub net_resolution: f64,
    pub checked: usize,
    pub violations: usize,
    /// Set when `μ ≥ 1`: every point is then μ-critical and the inclusion
    /// holds trivially.
    pub vacuous: bool,
}

/// Counts witnesses of `Δ_L ∩ K^R` farther than `2√(Rδ) + h` from every
/// sampled point of `Med_μ(K)`.
pub fn check_delta_inclusion(
    k: &CompactShape,
    delta: f64,
    l: f64,
    r: f64,
    witnesses: &[Point],
    medial: &[Point],
) -> InclusionReport {
    let mu = lemma_mu(delta, l, r);
    let radius = 2.0 * (r * delta).sqrt();
    let inside: Vec<&Point> = witnesses.iter().filter(|w| k.distance(w) <= r).collect();
    let mut rep = InclusionReport {
        delta,
        l,
        r,
        mu_lemma: mu,
        radius,
        net_resolution: 0.0,
        checked: inside.len(),
        violations: 0,
        vacuous: mu >= 1.0,
    };
    if rep.vacuous {
        return rep;
    }
    if medial.is_empty() {
        rep.violations = inside.len();
        return rep;
    }
    rep.net_resolution = net_resolution(medial);
    let idx = NnIndex::build(PointCloud::new(medial.to_vec()).expect("finite")).expect("nonempty");
    let tol = radius + rep.net_resolution;
    rep.violations = inside.iter().filter(|w| idx.nearest(w).1.sqrt() > tol).count();
    rep
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriticalReport {
    pub eps: f64,
    pub net_resolution: f64,
    pub checked: usize,
    pub violations: usize,
    /// Points whose `μ′` reaches 1, which hold trivially.
    pub vacuous: usize,
}

/// For each `x ∈ Med_μ(K)` sample, looks for a sampled `y` of `K′` with
/// `μ(y) ≤ μ(x) + 2√(ε/d_K(x))` within `2√(ε·d_K(x)) + h`.
pub fn check_critical_stability(eps: f64, mu_points: &[MedialPoint], k2_medial: &[MedialPoint]) -> CriticalReport {
    let targets: Vec<Point> = k2_medial.iter().map(|m| m.m).collect();
    let h = net_resolution(&targets);
    let idx =
        (!targets.is_empty()).then(|| NnIndex::build(PointCloud::new(targets).expect("finite")).expect("nonempty"));
    let mut rep = CriticalReport { eps, net_resolution: h, checked: mu_points.len(), violations: 0, vacuous: 0 };
    for x in mu_points {
        let mu2 = x.mu + 2.0 * (eps / x.dist).sqrt();
        if mu2 >= 1.0 {
            rep.vacuous += 1;
            continue;
        }
        let radius = 2.0 * (eps * x.dist).sqrt() + h;
        let found =
            idx.as_ref().is_some_and(|idx| idx.within(&x.m, radius).into_iter().any(|j| k2_medial[j].mu <= mu2));
        if !found {
            rep.violations += 1;
        }
    }
    rep
}

/// `K + δ·J` with `J` a fixed field of i.i.d. uniform offsets in `[−1, 1]^d`.
pub fn jitter(cloud: &PointCloud, delta: f64, seed: u64) -> Result<PointCloud> {
    use rand::Rng;
    let mut rng = stream_rng(seed, 0);
    cloud.map(|p| {
        let j = Point::from_fn(p.dim(), |_| rng.random_range(-1.0..=1.0));
        *p + j * delta
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HolderCurve {
    pub deltas: Vec<f64>,
    /// Mean exact Hausdorff distance of the perturbed clouds per δ.
    pub hausdorff: Vec<f64>,
    pub l1: Vec<Estimate>,
    /// Least-squares slope of `ln l1` against `ln d_H`.
    pub h_emp: f64,
    /// `1 / (2(2d − 1))`.
    pub h_ref: f64,
    /// `C` with `l1 = C·d_H^{h_ref}` at the largest δ.
    pub c: f64,
    pub bound_holds: bool,
    pub monotone: bool,
}

/// `‖p_K − p_K′‖_{L¹(E)}` for jittered copies `K′ = K + δ_j·J_t`, averaged
/// over `trials` jitter fields `J_t`. Every δ and trial reuses the same `E`
/// samples so the curve is free of between-level sampling noise.
pub fn holder_experiment(
    k: &PointCloud,
    e: &Aabb,
    deltas: &[f64],
    trials: usize,
    n_samples: usize,
    seed: u64,
) -> Result<HolderCurve> {
    if deltas.is_empty() || deltas.windows(2).any(|w| !(w[1] < w[0])) || deltas.iter().any(|d| !(*d >= 0.0)) {
        return Err(Error::InvalidParameter("delta list must be nonnegative and strictly decreasing".into()));
    }
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be >= 1".into()));
    }
    let base = CompactShape::cloud(k.clone())?;
    let base_idx = base.as_cloud().expect("cloud").clone();
    let sample_seed = derive_seed(seed, 0);
    let mut hausdorff = Vec::with_capacity(deltas.len());
    let mut l1 = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        let mut hs = 0.0;
        let mut vals = Vec::with_capacity(trials);
        let mut ses = 0.0;
        for t in 0..trials {
            let k2 = CompactShape::cloud(jitter(k, delta, derive_seed(seed, 1 + t as u64))?)?;
            hs += hausdorff_indexed(&base_idx, k2.as_cloud().expect("cloud"));
            let rep = l1_projection_distance(&base, &k2, e, n_samples, sample_seed)?;
            vals.push(rep.estimate.value);
            ses += rep.estimate.stderr * rep.estimate.stderr;
        }
        let n = trials as f64;
        hausdorff.push(hs / n);
        l1.push(Estimate { value: vals.iter().sum::<f64>() / n, stderr: ses.sqrt() / n });
    }
    let h_ref = 1.0 / (2.0 * (2.0 * k.dim() as f64 - 1.0));
    let pos: Vec<usize> = (0..deltas.len()).filter(|&j| hausdorff[j] > 0.0 && l1[j].value > 0.0).collect();
    let h_emp = if pos.len() >= 2 {
        let xs: Vec<f64> = pos.iter().map(|&j| hausdorff[j].ln()).collect();
        let ys: Vec<f64> = pos.iter().map(|&j| l1[j].value.ln()).collect();
        fit_line(&xs, &ys).0
    } else {
        f64::NAN
    };
    let c = if hausdorff[0] > 0.0 { l1[0].value / hausdorff[0].powf(h_ref) } else { 0.0 };
    let bound_holds = (0..deltas.len()).all(|j| l1[j].value <= c * hausdorff[j].powf(h_ref) * (1.0 + 1e-12));
    let monotone = l1.windows(2).all(|w| {
        let noise = 3.0 * (w[0].stderr * w[0].stderr + w[1].stderr * w[1].stderr).sqrt();
        w[1].value <= w[0].value + noise
    });
    if !monotone {
        log::warn!("L1 curve is not monotone within noise");
    }
    Ok(HolderCurve { deltas: deltas.to_vec(), hausdorff, l1, h_emp, h_ref, c, bound_holds, monotone })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StabilityParams {
    pub e: Aabb,
    pub l: f64,
    /// Defaults to `sup_E d_K` over the samples.
    pub r: Option<f64>,
    pub n_samples: usize,
    /// Criticality bound of the sampled `Med_μ(K)` in the critical-point check.
    pub mu: f64,
    pub eps: f64,
    pub n_rays: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StabilityReport {
    /// Exact `d_H(K, K′)`.
    pub delta: f64,
    pub l: f64,
    pub r: f64,
    pub measure_delta_l: Estimate,
    pub l1_proj: Estimate,
    pub ties: usize,
    pub mu_lemma: f64,
    pub inclusion_violations: usize,
    pub inclusion: InclusionReport,
    pub critical: CriticalReport,
    pub seed: u64,
}

/// Every stability check for a cloud `K` and its perturbation `K′`.
pub fn stability_report(k: &PointCloud, k2: &PointCloud, p: &StabilityParams, seed: u64) -> Result<StabilityReport> {
    if !(p.l > 0.0) {
        return Err(Error::InvalidParameter(format!("L must be > 0, got {}", p.l)));
    }
    let (ks, k2s) = (CompactShape::cloud(k.clone())?, CompactShape::cloud(k2.clone())?);
    let delta = hausdorff_indexed(ks.as_cloud().expect("cloud"), k2s.as_cloud().expect("cloud"));
    if p.l <= 2.0 * delta {
        return Err(Error::InvalidParameter(format!("L = {} must exceed 2 d_H = {}", p.l, 2.0 * delta)));
    }
    let c = coupled_projections(&ks, &k2s, &p.e, p.n_samples, derive_seed(seed, 0))?;
    let r = p.r.unwrap_or_else(|| c.samples.iter().map(|s| s.x.dist(&s.p)).fold(0.0, f64::max));
    let l1 = l1_from(&c);
    let dl = delta_l_from(&c, p.l);
    let mu_lemma = lemma_mu(delta, p.l, r);
    let medial = if mu_lemma < 1.0 {
        let q = MedialQuery::new(mu_lemma, p.eps)?;
        sample_mu_medial(&ks, &q, p.n_rays, derive_seed(seed, 1))?.points.into_iter().map(|m| m.m).collect()
    } else {
        Vec::new()
    };
    let inclusion = check_delta_inclusion(&ks, delta, p.l, r, &dl.witnesses, &medial);
    let xs = sample_mu_medial(&ks, &MedialQuery::new(p.mu, p.eps)?, p.n_rays, derive_seed(seed, 2))?.points;
    let mu2 = (p.mu + 2.0 * (delta / p.eps).sqrt()).min(0.999);
    let eps2 = 0.5 * p.eps;
    let ys = sample_mu_medial(&k2s, &MedialQuery::new(mu2, eps2)?, p.n_rays, derive_seed(seed, 3))?.points;
    let critical = check_critical_stability(delta, &xs, &ys);
    Ok(StabilityReport {
        delta,
        l: p.l,
        r,
        measure_delta_l: dl.estimate,
        l1_proj: l1.estimate,
        ties: c.ties,
        mu_lemma,
        inclusion_violations: inclusion.violations,
        inclusion,
        critical,
        seed,
    })
}
