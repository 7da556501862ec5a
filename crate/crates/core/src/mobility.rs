//! Mobility sets at window scale: cocycles cohomologous to a fixed one and
//! supported in small balls, their union, the stabilizer trace of the class
//! under the partial group action, and the coarse manifold detector.

use serde::Serialize;

use crate::cochain::{Cocycle, RelativeCochains};
use crate::error::{Error, Result};
use crate::gf2::SparseBitVec;
use crate::groups::BallModel;
use crate::homology::{two_scale_image, WindowSchedule};
use crate::metric::{PointId, SubsetMask, UNREACHABLE};
use crate::par;

/// `α₀ + δβ` supported in `N_D(g)`, or `None` when infeasible.
pub fn local_representability(
    cochains: &RelativeCochains<'_>,
    k: usize,
    alpha0: &SparseBitVec,
    g: PointId,
    d: u32,
) -> Result<Option<Cocycle>> {
    let space = cochains.complex().space();
    let ball = SubsetMask::from_ids(space.len(), space.ball(g, d));
    if !ball.is_disjoint(cochains.collar()) || !ball.is_subset(cochains.region()) {
        return Err(Error::CollarViolation(format!(
            "the ball of radius {d} about point {g} meets the collar"
        )));
    }
    Ok(cochains
        .represent_within(k, alpha0, &ball)?
        .map(|r| Cocycle::new(cochains.complex(), k, r.witness)))
}

/// Centers whose `D`-ball avoids the collar.
pub fn admissible_centers(cochains: &RelativeCochains<'_>, d: u32) -> Vec<PointId> {
    let space = cochains.complex().space();
    let bad = space.universe().difference(cochains.region()).union(cochains.collar());
    if bad.is_empty() {
        return cochains.region().ids().collect();
    }
    let dist = space.distance_to_set(&bad).expect("mask from the same space");
    cochains.region().ids().filter(|&g| dist[g as usize] > d).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct MobilityResult {
    pub degree: usize,
    pub d: u32,
    pub centers: SubsetMask,
    pub feasible: SubsetMask,
    /// Union of witness supports.
    pub mobility: SubsetMask,
    pub witnesses: Vec<(PointId, Cocycle)>,
}

/// Feasibility at every center (every admissible center by default).
pub fn mobility_set(
    cochains: &RelativeCochains<'_>,
    k: usize,
    alpha0: &SparseBitVec,
    d: u32,
    centers: Option<&[PointId]>,
) -> Result<MobilityResult> {
    let n = cochains.complex().space().len();
    let centers: Vec<PointId> = match centers {
        Some(c) => c.to_vec(),
        None => admissible_centers(cochains, d),
    };
    let results = par::map(&centers, |&g| local_representability(cochains, k, alpha0, g, d));
    let mut feasible = SubsetMask::empty(n);
    let mut mobility = SubsetMask::empty(n);
    let mut witnesses = Vec::new();
    for (&g, r) in centers.iter().zip(results) {
        if let Some(w) = r? {
            feasible.insert(g);
            mobility = mobility.union(&w.support);
            witnesses.push((g, w));
        }
    }
    Ok(MobilityResult {
        degree: k,
        d,
        centers: SubsetMask::from_ids(n, centers.iter().copied()),
        feasible,
        mobility,
        witnesses,
    })
}

/// `α·g⁻¹`, the cochain `σ ↦ α(g⁻¹σ)`, supported on `g·supp(α)`; `None`
/// when some translated simplex leaves the cells.
pub fn transport(
    ball: &BallModel,
    cochains: &RelativeCochains<'_>,
    k: usize,
    alpha: &SparseBitVec,
    g: PointId,
) -> Option<SparseBitVec> {
    let complex = cochains.complex();
    let h = ball.element(g);
    let mut out = Vec::with_capacity(alpha.count_ones());
    for j in alpha.ones() {
        let mut s: Vec<PointId> = complex
            .simplex(k, j)
            .iter()
            .map(|&v| ball.act(h, v))
            .collect::<Option<_>>()?;
        s.sort_unstable();
        let t = complex.index_of(&s)?;
        if !cochains.contains(k, t) {
            return None;
        }
        out.push(t);
    }
    Some(SparseBitVec::from_indices(out))
}

#[derive(Clone, Debug, Serialize)]
pub struct StabComparison {
    /// Elements `g` with `α₀·g⁻¹` cohomologous to `α₀`.
    pub stabilizer: SubsetMask,
    /// Elements whose transport leaves the window.
    pub undetermined: SubsetMask,
    /// Union of `g·supp(α₀)` over the stabilizer trace.
    pub orbit: SubsetMask,
    /// The part of the orbit made of translates lying in the `D`-ball of an
    /// admissible center; these translates are themselves members of
    /// `Z([α₀], D)` and are added to the mobility approximation.
    pub comparable_orbit: SubsetMask,
    pub extended_mobility: SubsetMask,
    pub hausdorff: Option<u32>,
    /// Containment radius of each witness in its nearest comparable
    /// translate of `supp(α₀)`, maximized over witnesses.
    pub replay_radius: Option<u32>,
    pub within_replay: bool,
}

/// Stabilizer trace of `[α₀]` and its Hausdorff distance to the mobility
/// approximation.
pub fn stab_mob_comparison(
    ball: &BallModel,
    cochains: &RelativeCochains<'_>,
    k: usize,
    alpha0: &SparseBitVec,
    mob: &MobilityResult,
) -> Result<StabComparison> {
    let space = cochains.complex().space();
    let n = space.len();
    let alpha0 = cochains.restrict(k, alpha0);
    let b = cochains.coboundary_space(k);
    let ids: Vec<PointId> = (0..n as PointId).collect();
    let verdicts = par::map(&ids, |&g| {
        let t = transport(ball, cochains, k, &alpha0, g)?;
        let mut diff = t;
        diff.xor_assign(&alpha0);
        Some(b.contains(&diff))
    });
    let mut stabilizer = SubsetMask::empty(n);
    let mut undetermined = SubsetMask::empty(n);
    for (&g, v) in ids.iter().zip(verdicts) {
        match v {
            Some(true) => stabilizer.insert(g),
            Some(false) => {}
            None => undetermined.insert(g),
        }
    }
    let supp0 = cochains.complex().support(k, &alpha0);
    let translates: Vec<SubsetMask> = stabilizer
        .ids()
        .filter_map(|g| ball.translate(ball.element(g), &supp0))
        .collect();
    let orbit = translates.iter().fold(SubsetMask::empty(n), |acc, t| acc.union(t));
    let fits = |t: &SubsetMask| -> bool {
        let Some(x0) = t.ids().next() else { return false };
        space
            .ball(x0, mob.d)
            .into_iter()
            .filter(|&c| mob.centers.contains(c))
            .any(|c| t.ids().all(|x| space.distance(x, c) <= mob.d))
    };
    let comparable: Vec<&SubsetMask> = translates.iter().filter(|t| fits(t)).collect();
    let comparable_orbit = comparable.iter().fold(SubsetMask::empty(n), |acc, t| acc.union(t));
    let extended_mobility = mob.mobility.union(&comparable_orbit);
    let hausdorff = if comparable_orbit.is_empty() {
        None
    } else {
        Some(space.hausdorff_distance(&comparable_orbit, &extended_mobility)?)
    };
    let dists: Vec<Vec<u32>> = comparable
        .iter()
        .map(|t| space.distance_to_set(t))
        .collect::<Result<_>>()?;
    let mut replay: Option<u32> = if comparable.is_empty() { None } else { Some(0) };
    for (_, w) in &mob.witnesses {
        let best = dists
            .iter()
            .map(|d| w.support.ids().map(|x| d[x as usize]).max().unwrap_or(0))
            .min()
            .unwrap_or(UNREACHABLE);
        replay = Some(replay.map_or(best, |r| r.max(best)));
    }
    let within_replay = match (hausdorff, replay) {
        (Some(h), Some(r)) => h <= r,
        _ => false,
    };
    Ok(StabComparison {
        stabilizer,
        undetermined,
        orbit,
        comparable_orbit,
        extended_mobility,
        hausdorff,
        replay_radius: replay,
        within_replay,
    })
}

/// `Ω = δφ` built from the first surviving `(n-1)`-class at infinity of
/// `schedule`, as a relative `n`-cocycle of the window complex. The
/// schedule's scales must bracket the complex's scale.
pub fn class_at_infinity(
    cochains: &RelativeCochains<'_>,
    n: usize,
    schedule: &WindowSchedule,
) -> Result<Option<SparseBitVec>> {
    let complex = cochains.complex();
    let r = complex.scale();
    if n == 0 || schedule.inner_scale > r || schedule.outer_scale < r {
        return Err(Error::ParameterMismatch(format!(
            "schedule scales {}..{} must bracket the complex scale {r} and n must be positive",
            schedule.inner_scale, schedule.outer_scale
        )));
    }
    let space = complex.space();
    let img = two_scale_image(space, cochains.region(), n - 1, schedule)?;
    let Some(class) = img.classes.first() else {
        return Ok(None);
    };
    let z = complex.chain(&class.simplices.iter().map(Vec::as_slice).collect::<Vec<_>>())?;
    let annulus = cochains.region().difference(&space.level_ball(schedule.inner_radius));
    cochains.dual_class(n - 1, &annulus, &z)
}

#[derive(Clone, Debug, Serialize)]
pub struct DetectorStep {
    pub d: u32,
    pub feasible: usize,
    pub mobility: usize,
    pub covered: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct DetectorReport {
    pub window: u32,
    pub steps: Vec<DetectorStep>,
    pub detected: bool,
}

/// Whether the non-collar window lies in `N_D(Mob([α₀], D))` for each `D`.
pub fn coarse_manifold_detector(
    cochains: &RelativeCochains<'_>,
    k: usize,
    alpha0: &SparseBitVec,
    ds: &[u32],
) -> Result<DetectorReport> {
    let space = cochains.complex().space();
    if cochains.is_coboundary(k, alpha0)? {
        return Err(Error::InvalidParameter("the class is zero".into()));
    }
    let core = cochains.region().difference(cochains.collar());
    let mut steps = Vec::with_capacity(ds.len());
    for &d in ds {
        let mob = mobility_set(cochains, k, alpha0, d, None)?;
        let covered = !mob.mobility.is_empty() && core.is_subset(&space.neighborhood(&mob.mobility, d)?);
        steps.push(DetectorStep {
            d,
            feasible: mob.feasible.count(),
            mobility: mob.mobility.count(),
            covered,
        });
    }
    Ok(DetectorReport {
        window: space.window_radius(),
        detected: steps.iter().any(|s| s.covered),
        steps,
    })
}
