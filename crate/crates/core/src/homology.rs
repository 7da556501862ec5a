//! Finite-scale coarse invariants computed through topology at infinity:
//! reduced homology, two-scale images over ball complements, ends, coarse
//! cohomology dimension estimates, uniform acyclicity and PD signatures.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gf2::{quotient_image_rank, GF2Matrix, SparseBitVec};
use crate::groups::Trend;
use crate::metric::{FiniteMetricSpace, PointId, SubsetMask};
use crate::par;
use crate::rips::{build_rips, inclusion_chain_map, RipsComplex};

/// Nested scales for a two-scale computation.
///
/// The inner complex is `P_i` of the points with level above `inner_radius`;
/// the outer one is `P_j` of the points with level above `outer_radius`.
/// Points in the collar (level above `window - collar`) never decide a
/// verdict.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct WindowSchedule {
    pub inner_radius: u32,
    pub inner_scale: u32,
    pub outer_radius: u32,
    pub outer_scale: u32,
    pub window: u32,
    pub collar: u32,
}

impl WindowSchedule {
    pub fn new(
        inner_radius: u32,
        inner_scale: u32,
        outer_radius: u32,
        outer_scale: u32,
        window: u32,
        collar: u32,
    ) -> Result<Self> {
        let s = Self {
            inner_radius,
            inner_scale,
            outer_radius,
            outer_scale,
            window,
            collar,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.inner_scale == 0 || self.outer_scale < self.inner_scale {
            return Err(Error::InvalidParameter(format!(
                "scales must satisfy 1 <= i <= j, got i={} j={}",
                self.inner_scale, self.outer_scale
            )));
        }
        if self.outer_radius + self.outer_scale > self.inner_radius {
            return Err(Error::InvalidParameter(format!(
                "need S' + j <= S, got S'={} j={} S={}",
                self.outer_radius, self.outer_scale, self.inner_radius
            )));
        }
        if self.window < self.collar || self.window - self.collar <= self.inner_radius + self.inner_scale {
            return Err(Error::WindowTooSmall(format!(
                "need R - c > S + i, got R={} c={} S={} i={}",
                self.window, self.collar, self.inner_radius, self.inner_scale
            )));
        }
        Ok(())
    }

    /// Schedules with the given inner radii, `S' = S - j`.
    pub fn family(window: u32, collar: u32, inner_radii: &[u32], i: u32, j: u32) -> Result<Vec<Self>> {
        inner_radii
            .iter()
            .map(|&s| {
                Self::new(
                    s,
                    i,
                    s.checked_sub(j)
                        .ok_or_else(|| Error::InvalidParameter(format!("inner radius {s} below outer scale {j}")))?,
                    j,
                    window,
                    collar,
                )
            })
            .collect()
    }

    fn check_space(&self, space: &FiniteMetricSpace) -> Result<()> {
        if self.window != space.window_radius() {
            return Err(Error::ParameterMismatch(format!(
                "schedule window {} differs from the space's window {}",
                self.window,
                space.window_radius()
            )));
        }
        Ok(())
    }
}

/// Rank and representative cycles of `H̃_k`.
#[derive(Clone, Debug)]
pub struct HomologyResult {
    pub degree: usize,
    pub rank: usize,
    pub representatives: Vec<SparseBitVec>,
}

/// `dim H̃_k(K)` with a representative basis.
pub fn reduced_homology(complex: &RipsComplex, k: usize) -> Result<HomologyResult> {
    if k + 1 > complex.max_dim() {
        return Err(Error::InvalidParameter(format!(
            "H_{k} needs dimension cap at least {}",
            k + 1
        )));
    }
    let id = GF2Matrix::identity(complex.count(k));
    let q = quotient_image_rank(complex.boundary(k), complex.boundary(k), complex.boundary(k + 1), &id)?;
    Ok(HomologyResult {
        degree: k,
        rank: q.rank,
        representatives: q.representatives,
    })
}

/// A cycle at the inner scale with its fate at the outer scale.
#[derive(Clone, Debug, Serialize)]
pub struct TwoScaleClass {
    pub degree: usize,
    /// Simplices of the representative, as sorted vertex tuples.
    pub simplices: Vec<Vec<PointId>>,
    #[serde(skip)]
    pub chain: SparseBitVec,
    pub schedule: WindowSchedule,
    pub survives: bool,
    /// Position among the basis representatives.
    pub basis_index: usize,
}

/// Inner and outer complexes of one schedule and the image data between
/// them.
#[derive(Clone, Debug)]
pub struct TwoScaleImage {
    pub schedule: WindowSchedule,
    pub degree: usize,
    pub rank: usize,
    pub classes: Vec<TwoScaleClass>,
    pub inner: RipsComplex,
    pub outer: RipsComplex,
}

/// Union of the scale-`r` components of `region` that meet the collar.
pub fn collar_reaching(
    space: &FiniteMetricSpace,
    region: &SubsetMask,
    r: u32,
    collar_width: u32,
) -> Result<(SubsetMask, usize)> {
    let collar = space.collar(collar_width);
    let mut out = space.empty_mask();
    let mut count = 0;
    for c in space.components(region, r)? {
        if !c.is_disjoint(&collar) {
            out = out.union(&c);
            count += 1;
        }
    }
    Ok((out, count))
}

/// Image of `H̃_d` of the inner annulus of `region` in `H̃_d` of the outer
/// annulus of `region`.
pub fn two_scale_image(
    space: &Arc<FiniteMetricSpace>,
    region: &SubsetMask,
    degree: usize,
    schedule: &WindowSchedule,
) -> Result<TwoScaleImage> {
    schedule.validate()?;
    schedule.check_space(space)?;
    let inner_annulus = region.difference(&space.level_ball(schedule.inner_radius));
    let (inner_region, _) = collar_reaching(space, &inner_annulus, schedule.inner_scale, schedule.collar)?;
    let outer_region = region.difference(&space.level_ball(schedule.outer_radius));
    let inner = build_rips(space, &inner_region, schedule.inner_scale, degree)?;
    let outer = build_rips(space, &outer_region, schedule.outer_scale, degree + 1)?;
    let map = inclusion_chain_map(&inner, &outer)?;
    let q = quotient_image_rank(
        inner.boundary(degree),
        outer.boundary(degree),
        outer.boundary(degree + 1),
        &map.matrices[degree],
    )?;
    let classes = q
        .representatives
        .iter()
        .enumerate()
        .map(|(b, z)| TwoScaleClass {
            degree,
            simplices: z.ones().map(|j| inner.simplex(degree, j).to_vec()).collect(),
            chain: z.clone(),
            schedule: *schedule,
            survives: true,
            basis_index: b,
        })
        .collect();
    Ok(TwoScaleImage {
        schedule: *schedule,
        degree,
        rank: q.rank,
        classes,
        inner,
        outer,
    })
}

/// Three-valued reading of a schedule family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "value")]
pub enum Estimate {
    /// Identical value at the last three schedules.
    Finite(u64),
    /// Strictly increasing over the last three schedules.
    Growing,
    Inconclusive,
}

impl Estimate {
    pub fn of(values: &[u64]) -> Estimate {
        match Trend::of(values) {
            Trend::Bounded => Estimate::Finite(*values.last().expect("three values")),
            Trend::Growing => Estimate::Growing,
            Trend::Inconclusive => Estimate::Inconclusive,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EndsReport {
    /// `(schedule, deep component count)`.
    pub counts: Vec<(WindowSchedule, u64)>,
    pub verdict: Estimate,
}

/// Counts the components of the complement of the inner ball that reach the
/// collar, per schedule.
pub fn ends_estimate(space: &Arc<FiniteMetricSpace>, schedules: &[WindowSchedule]) -> Result<EndsReport> {
    if schedules.is_empty() {
        return Err(Error::WindowTooSmall("no admissible schedule".into()));
    }
    let counts = par::map(schedules, |s| -> Result<(WindowSchedule, u64)> {
        s.validate()?;
        s.check_space(space)?;
        let annulus = space.universe().difference(&space.level_ball(s.inner_radius));
        let (_, n) = collar_reaching(space, &annulus, s.inner_scale, s.collar)?;
        Ok((*s, n as u64))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let values: Vec<u64> = counts.iter().map(|&(_, n)| n).collect();
    Ok(EndsReport {
        verdict: Estimate::of(&values),
        counts,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct CohomologyEstimate {
    pub degree: usize,
    pub ranks: Vec<(WindowSchedule, u64)>,
    pub verdict: Estimate,
    /// Surviving classes at the last schedule.
    pub classes: Vec<TwoScaleClass>,
}

/// Estimate of `dim H^k_coarse(X)` as the two-scale image rank of
/// `H̃_{k-1}` of ball complements. Degree 0 is always 0.
pub fn coarse_cohomology_dim_estimate(
    space: &Arc<FiniteMetricSpace>,
    k: usize,
    schedules: &[WindowSchedule],
) -> Result<CohomologyEstimate> {
    coarse_cohomology_dim_estimate_in(space, &space.universe(), k, schedules)
}

/// As [`coarse_cohomology_dim_estimate`] for the subspace `region` with the
/// restricted metric.
pub fn coarse_cohomology_dim_estimate_in(
    space: &Arc<FiniteMetricSpace>,
    region: &SubsetMask,
    k: usize,
    schedules: &[WindowSchedule],
) -> Result<CohomologyEstimate> {
    if schedules.is_empty() {
        return Err(Error::WindowTooSmall("no admissible schedule".into()));
    }
    if k == 0 {
        return Ok(CohomologyEstimate {
            degree: 0,
            ranks: schedules.iter().map(|s| (*s, 0)).collect(),
            verdict: Estimate::Finite(0),
            classes: Vec::new(),
        });
    }
    let images = par::map(schedules, |s| two_scale_image(space, region, k - 1, s))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let ranks: Vec<(WindowSchedule, u64)> = images.iter().map(|im| (im.schedule, im.rank as u64)).collect();
    let values: Vec<u64> = ranks.iter().map(|&(_, r)| r).collect();
    Ok(CohomologyEstimate {
        degree: k,
        verdict: Estimate::of(&values),
        ranks,
        classes: images.last().map(|im| im.classes.clone()).unwrap_or_default(),
    })
}

/// Search bounds for the acyclicity probe: `λ ≤ i + lambda_slack`,
/// `μ ≤ r + mu_slack`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct AcyclicityBounds {
    pub lambda_slack: u32,
    pub mu_slack: u32,
}

impl Default for AcyclicityBounds {
    fn default() -> Self {
        Self {
            lambda_slack: 4,
            mu_slack: 4,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AcyclicityEntry {
    pub center: PointId,
    pub degree: usize,
    pub inner_scale: u32,
    pub radius: u32,
    pub lambda: Option<u32>,
    pub mu: Option<u32>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AcyclicityProfile {
    pub bounds: AcyclicityBounds,
    pub entries: Vec<AcyclicityEntry>,
    /// Per `(degree, i)`: the largest λ over centers, or `None` if some
    /// center failed.
    pub lambda: BTreeMap<(usize, u32), Option<u32>>,
}

impl AcyclicityProfile {
    pub fn failures(&self) -> impl Iterator<Item = &AcyclicityEntry> {
        self.entries.iter().filter(|e| e.lambda.is_none())
    }
}

fn kills(
    space: &Arc<FiniteMetricSpace>,
    center: PointId,
    k: usize,
    i: u32,
    r: u32,
    lambda: u32,
    mu: u32,
) -> Result<bool> {
    let inner_mask = SubsetMask::from_ids(space.len(), space.ball(center, r));
    let outer_mask = SubsetMask::from_ids(space.len(), space.ball(center, mu));
    let inner = build_rips(space, &inner_mask, i, k)?;
    let outer = build_rips(space, &outer_mask, lambda, k + 1)?;
    let map = inclusion_chain_map(&inner, &outer)?;
    let q = quotient_image_rank(
        inner.boundary(k),
        outer.boundary(k),
        outer.boundary(k + 1),
        &map.matrices[k],
    )?;
    Ok(q.rank == 0)
}

/// For each center, degree `k ≤ k_max` and inner scale `i`: the smallest
/// `λ ≥ i` such that every sampled `r` admits some `μ` killing
/// `H̃_k(P_i(N_r(x))) → H̃_k(P_λ(N_μ(x)))`, then the smallest such `μ ≥ r`.
pub fn uniform_acyclicity_probe(
    space: &Arc<FiniteMetricSpace>,
    k_max: usize,
    centers: &[PointId],
    inner_scales: &[u32],
    radii: &[u32],
    bounds: AcyclicityBounds,
) -> Result<AcyclicityProfile> {
    let mut jobs = Vec::new();
    for &c in centers {
        if c as usize >= space.len() {
            return Err(Error::InvalidParameter(format!("center {c} out of range")));
        }
        for k in 0..=k_max {
            for &i in inner_scales {
                jobs.push((c, k, i));
            }
        }
    }
    let per_job = par::map(&jobs, |&(c, k, i)| -> Result<Vec<AcyclicityEntry>> {
        for lambda in i..=i + bounds.lambda_slack {
            let mut mus = Vec::with_capacity(radii.len());
            for &r in radii {
                let mut found = None;
                for mu in r..=r + bounds.mu_slack {
                    match kills(space, c, k, i, r, lambda, mu) {
                        Ok(true) => {
                            found = Some(mu);
                            break;
                        }
                        Ok(false) | Err(Error::ComplexTooLarge { .. }) => {}
                        Err(e) => return Err(e),
                    }
                }
                match found {
                    Some(mu) => mus.push(mu),
                    None => break,
                }
            }
            if mus.len() == radii.len() {
                return Ok(radii
                    .iter()
                    .zip(mus)
                    .map(|(&r, mu)| AcyclicityEntry {
                        center: c,
                        degree: k,
                        inner_scale: i,
                        radius: r,
                        lambda: Some(lambda),
                        mu: Some(mu),
                    })
                    .collect());
            }
        }
        Ok(radii
            .iter()
            .map(|&r| AcyclicityEntry {
                center: c,
                degree: k,
                inner_scale: i,
                radius: r,
                lambda: None,
                mu: None,
            })
            .collect())
    });
    let mut entries = Vec::new();
    for e in per_job {
        entries.extend(e?);
    }
    let mut lambda: BTreeMap<(usize, u32), Option<u32>> = BTreeMap::new();
    for e in &entries {
        let slot = lambda.entry((e.degree, e.inner_scale)).or_insert(Some(0));
        *slot = match (*slot, e.lambda) {
            (Some(a), Some(b)) => Some(a.max(b)),
            _ => None,
        };
    }
    Ok(AcyclicityProfile {
        bounds,
        entries,
        lambda,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "degree")]
pub enum PdVerdict {
    Pass,
    /// First degree whose estimate contradicts the pattern.
    Fail(usize),
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct PdSignature {
    pub dimension: usize,
    pub estimates: Vec<CohomologyEstimate>,
    pub verdict: PdVerdict,
}

/// Checks that the coarse cohomology proxies of `region` in degrees
/// `1..=n` read `(0, ..., 0, 1)`.
pub fn pd_signature_check(
    space: &Arc<FiniteMetricSpace>,
    region: &SubsetMask,
    n: usize,
    schedules: &[WindowSchedule],
) -> Result<PdSignature> {
    if n == 0 {
        return Err(Error::InvalidParameter("PD dimension must be at least 1".into()));
    }
    let mut estimates = Vec::with_capacity(n);
    let mut verdict = PdVerdict::Pass;
    for k in 1..=n {
        let est = coarse_cohomology_dim_estimate_in(space, region, k, schedules)?;
        let expected = u64::from(k == n);
        let this = match est.verdict {
            Estimate::Finite(v) if v == expected => PdVerdict::Pass,
            Estimate::Finite(_) | Estimate::Growing => PdVerdict::Fail(k),
            Estimate::Inconclusive => PdVerdict::Inconclusive,
        };
        if verdict == PdVerdict::Pass {
            verdict = this;
        }
        estimates.push(est);
    }
    Ok(PdSignature {
        dimension: n,
        estimates,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::line_window;
    use crate::groups::{BallModel, GroupModel};

    #[test]
    fn schedule_invariants() {
        assert!(WindowSchedule::new(4, 1, 2, 2, 16, 2).is_ok());
        assert!(matches!(
            WindowSchedule::new(4, 1, 3, 2, 16, 2),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            WindowSchedule::new(4, 1, 2, 2, 6, 2),
            Err(Error::WindowTooSmall(_))
        ));
    }

    #[test]
    fn homology_of_line_and_two_pieces() {
        let z = Arc::new(line_window(-5, 5).unwrap());
        let k = build_rips(&z, &z.universe(), 1, 1).unwrap();
        assert_eq!(reduced_homology(&k, 0).unwrap().rank, 0);
        let two = z.universe().difference(&z.level_ball(1));
        let k = build_rips(&z, &two, 1, 1).unwrap();
        assert_eq!(reduced_homology(&k, 0).unwrap().rank, 1);
    }

    #[test]
    fn ends_of_z() {
        let z = BallModel::build(&GroupModel::FreeAbelian(1), 24).unwrap();
        let fam = WindowSchedule::family(24, 2, &[4, 5, 6], 1, 1).unwrap();
        let e = ends_estimate(z.space(), &fam).unwrap();
        assert_eq!(e.verdict, Estimate::Finite(2));
        let c = coarse_cohomology_dim_estimate(z.space(), 1, &fam).unwrap();
        assert_eq!(c.verdict, Estimate::Finite(1));
    }

    #[test]
    fn degree_zero_is_zero() {
        let z = BallModel::build(&GroupModel::FreeAbelian(1), 10).unwrap();
        let fam = WindowSchedule::family(10, 2, &[3, 4, 5], 1, 1).unwrap();
        let c = coarse_cohomology_dim_estimate(z.space(), 0, &fam).unwrap();
        assert_eq!(c.verdict, Estimate::Finite(0));
    }
}
