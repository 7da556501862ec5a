//! Essential and almost-essential components, the Mayer–Vietoris connecting
//! map on relative Rips cochains, and two-sided representability.

use std::sync::Arc;

use serde::Serialize;

use crate::cochain::{Cocycle, RelativeCochains};
use crate::error::{Error, Result};
use crate::gf2::{GF2Matrix, GF2Subspace, SparseBitVec};
use crate::homology::{pd_signature_check, two_scale_image, PdVerdict, WindowSchedule};
use crate::metric::{FiniteMetricSpace, PointId, SubsetMask, UNREACHABLE};
use crate::rips::{build_rips, inclusion_chain_map, RipsComplex};
use crate::separation::dichotomy_violation;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "value")]
pub enum AlmostEssential {
    Bound(u32),
    FailsAtWindow,
}

#[derive(Clone, Debug, Serialize)]
pub struct AlmostEssentialReport {
    pub window: u32,
    pub collar: u32,
    pub a: u32,
    pub grid: Vec<u32>,
    /// Largest distance from a non-collar point of `W` to `C ∖ N_A(W)`.
    pub required: Option<u32>,
    pub result: AlmostEssential,
}

/// Default `B` grid: `0..=⌊(R - c)/2⌋`.
pub fn default_b_grid(window: u32, collar: u32) -> Vec<u32> {
    (0..=window.saturating_sub(collar) / 2).collect()
}

/// Smallest `B` in `grid` with `W ∖ collar ⊆ N_B(C ∖ N_A(W))`.
pub fn almost_essential_probe(
    space: &FiniteMetricSpace,
    w: &SubsetMask,
    c: &SubsetMask,
    a: u32,
    grid: &[u32],
    collar: u32,
) -> Result<AlmostEssentialReport> {
    if w.is_empty() {
        return Err(Error::EmptySubset);
    }
    let target = c.difference(&space.neighborhood(w, a)?);
    let core_w = w.difference(&space.collar(collar));
    let required = if target.is_empty() {
        None
    } else {
        let dist = space.distance_to_set(&target)?;
        let need = core_w.ids().map(|x| dist[x as usize]).max().unwrap_or(0);
        (need != UNREACHABLE).then_some(need)
    };
    let result = required
        .and_then(|need| grid.iter().copied().filter(|&b| b >= need).min())
        .map_or(AlmostEssential::FailsAtWindow, AlmostEssential::Bound);
    Ok(AlmostEssentialReport {
        window: space.window_radius(),
        collar,
        a,
        grid: grid.to_vec(),
        required,
        result,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Essentiality {
    Essential,
    NonEssential,
    Inconclusive,
}

/// Fate of one surviving class of the `W` annulus inside the `C ∪ W`
/// annulus.
#[derive(Clone, Debug, Serialize)]
pub struct EssentialWitness {
    pub schedule: WindowSchedule,
    pub class: Vec<Vec<PointId>>,
    pub dies: bool,
    /// Filling chain in the `C ∪ W` annulus when the class dies.
    pub fill: Vec<Vec<PointId>>,
    /// Independent re-check of the outcome.
    pub replayed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct EssentialVerdict {
    pub component: String,
    pub dimension: usize,
    pub verdict: Essentiality,
    pub reason: Option<String>,
    pub per_schedule: Vec<Essentiality>,
    pub witnesses: Vec<EssentialWitness>,
}

/// Default schedule family: window 12, collar 2, inner radii 4, 5, 6,
/// scales 1 and 2.
pub fn default_essential_family(window: u32) -> Result<Vec<WindowSchedule>> {
    WindowSchedule::family(window, 2, &[4, 5, 6], 1, 2)
}

fn classify_schedule(
    space: &Arc<FiniteMetricSpace>,
    w: &SubsetMask,
    union: &SubsetMask,
    n: usize,
    schedule: &WindowSchedule,
) -> Result<(Essentiality, Vec<EssentialWitness>)> {
    let d = n - 1;
    let img = two_scale_image(space, w, d, schedule)?;
    if img.classes.is_empty() {
        return Ok((Essentiality::Inconclusive, Vec::new()));
    }
    let region = union.difference(&space.level_ball(schedule.outer_radius));
    let target = build_rips(space, &region, schedule.outer_scale, n)?;
    let map = inclusion_chain_map(&img.inner, &target)?;
    let fills = target.boundary(n).image_basis();
    let mut witnesses = Vec::with_capacity(img.classes.len());
    for class in &img.classes {
        let z = map.apply(d, &class.chain)?;
        let fill = target.fill_cycle(d, &z, None)?;
        let (dies, replayed, fill) = match fill {
            Some(f) => {
                let ok = target.boundary(n).mul_vec(&f)? == z;
                (true, ok, f.ones().map(|j| target.simplex(n, j).to_vec()).collect())
            }
            None => (false, !fills.contains(&z), Vec::new()),
        };
        witnesses.push(EssentialWitness {
            schedule: *schedule,
            class: class.simplices.clone(),
            dies,
            fill,
            replayed,
        });
    }
    let verdict = if witnesses.iter().all(|w| w.dies) {
        Essentiality::Essential
    } else {
        Essentiality::NonEssential
    };
    Ok((verdict, witnesses))
}

/// Pushes the surviving `H̃_{n-1}` classes of the `W` annulus into the
/// annulus of `C ∪ W` at the coarser scale of each schedule. Essential when
/// every class dies at every schedule, non-essential when some class
/// survives at every schedule, inconclusive otherwise.
pub fn essential_probe(
    space: &Arc<FiniteMetricSpace>,
    w: &SubsetMask,
    c: &SubsetMask,
    component: &str,
    n: usize,
    schedules: &[WindowSchedule],
) -> Result<EssentialVerdict> {
    let inconclusive = |reason: String| EssentialVerdict {
        component: component.to_string(),
        dimension: n,
        verdict: Essentiality::Inconclusive,
        reason: Some(reason),
        per_schedule: Vec::new(),
        witnesses: Vec::new(),
    };
    if n == 0 {
        return Err(Error::InvalidParameter("dimension must be at least 1".into()));
    }
    if schedules.is_empty() {
        return Err(Error::InvalidParameter("empty schedule family".into()));
    }
    for s in schedules {
        if let Err(e) = s.validate() {
            return Ok(inconclusive(format!("schedule rejected: {e}")));
        }
        if s.window != space.window_radius() {
            return Ok(inconclusive(format!(
                "schedule window {} differs from the space's window {}",
                s.window,
                space.window_radius()
            )));
        }
    }
    let pd = pd_signature_check(space, w, n, schedules)?;
    if pd.verdict != PdVerdict::Pass {
        return Ok(inconclusive(format!(
            "W does not show the PD({n}) signature at this window: {:?}",
            pd.verdict
        )));
    }
    let union = c.union(w);
    let mut per_schedule = Vec::with_capacity(schedules.len());
    let mut witnesses = Vec::new();
    for s in schedules {
        let (v, ws) = classify_schedule(space, w, &union, n, s)?;
        per_schedule.push(v);
        witnesses.extend(ws);
    }
    let first = per_schedule[0];
    let (verdict, reason) = if per_schedule.iter().all(|&v| v == first) {
        let reason = (first == Essentiality::Inconclusive).then(|| "no class of the W annulus survives".to_string());
        (first, reason)
    } else {
        (
            Essentiality::Inconclusive,
            Some(format!("schedules disagree: {per_schedule:?}")),
        )
    };
    Ok(EssentialVerdict {
        component: component.to_string(),
        dimension: n,
        verdict,
        reason,
        per_schedule,
        witnesses,
    })
}

/// Parameters of a Mayer–Vietoris assembly.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct MvParams {
    /// Rips scale.
    pub r: u32,
    /// Thickening of `W`.
    pub a: u32,
    pub collar: u32,
    /// Top degree `n`; cochains are built up to degree `n + 1`.
    pub degree: usize,
}

/// Exactness of the cohomology sequence at one spot.
#[derive(Clone, Debug, Serialize)]
pub struct ExactnessSpot {
    pub spot: String,
    pub degree: usize,
    pub image_dim: usize,
    pub kernel_dim: usize,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConnectingImage {
    pub input: Cocycle,
    pub output: Cocycle,
    /// Coordinates of the output against the cohomology basis of the window.
    pub coordinates: Vec<bool>,
    pub nonzero: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct MvReport {
    pub params: MvParams,
    pub window: u32,
    pub dichotomy: bool,
    /// Cell counts of the window, the two pieces and their overlap per degree.
    pub cell_counts: Vec<[usize; 4]>,
    pub short_exact: bool,
    pub cohomology_ranks: Vec<[usize; 4]>,
    pub classes: Vec<ConnectingImage>,
    pub exactness: Vec<ExactnessSpot>,
}

/// The complexes and cochain data of a Mayer–Vietoris decomposition
/// `X = (N_A(W) ∪ C₁) ∪ (N_A(W) ∪ C₂)`, `C₂ = X ∖ C₁`.
pub struct MvData {
    pub complex: RipsComplex,
    pub thickened: SubsetMask,
    pub piece1: SubsetMask,
    pub piece2: SubsetMask,
    pub params: MvParams,
}

impl MvData {
    pub fn build(space: &Arc<FiniteMetricSpace>, w: &SubsetMask, c1: &SubsetMask, params: MvParams) -> Result<Self> {
        if w.is_empty() {
            return Err(Error::EmptySubset);
        }
        let complex = build_rips(space, &space.universe(), params.r, params.degree + 1)?;
        let thickened = space.neighborhood(w, params.a)?;
        if let Some(s) = dichotomy_violation(&complex, &thickened, c1) {
            return Err(Error::DichotomyFailed { simplex: s });
        }
        Ok(Self {
            piece1: thickened.union(c1),
            piece2: thickened.union(&c1.complement()),
            thickened,
            complex,
            params,
        })
    }

    /// Cochains of the window, first piece, second piece and overlap.
    pub fn cochains(&self) -> Result<[RelativeCochains<'_>; 4]> {
        let c = self.params.collar;
        let k = &self.complex;
        Ok([
            RelativeCochains::new(k, &k.space().universe(), c)?,
            RelativeCochains::new(k, &self.piece1, c)?,
            RelativeCochains::new(k, &self.piece2, c)?,
            RelativeCochains::new(k, &self.thickened, c)?,
        ])
    }

    /// `δ̃ω`: extend by zero to the first piece, apply `δ`, extend by zero.
    pub fn connecting(&self, cc: &[RelativeCochains<'_>; 4], k: usize, omega: &SparseBitVec) -> Result<SparseBitVec> {
        cc[1].coboundary(k, &cc[3].restrict(k, omega))
    }
}

#[derive(Clone)]
struct Spot {
    ambient: usize,
    cocycles: Vec<SparseBitVec>,
    coboundaries: Vec<SparseBitVec>,
}

fn spot_of(cc: &RelativeCochains<'_>, k: usize) -> Result<Spot> {
    let h = cc.cohomology(k)?;
    let cocycles = h.coboundaries.iter().chain(&h.representatives).cloned().collect();
    Ok(Spot {
        ambient: h.ambient,
        cocycles,
        coboundaries: h.coboundaries,
    })
}

fn shifted(v: &SparseBitVec, by: usize) -> SparseBitVec {
    SparseBitVec::from_indices(v.ones().map(|i| i + by))
}

fn direct_sum(a: Spot, b: Spot) -> Spot {
    let off = a.ambient;
    Spot {
        ambient: a.ambient + b.ambient,
        cocycles: a
            .cocycles
            .into_iter()
            .chain(b.cocycles.iter().map(|v| shifted(v, off)))
            .collect(),
        coboundaries: a
            .coboundaries
            .into_iter()
            .chain(b.coboundaries.iter().map(|v| shifted(v, off)))
            .collect(),
    }
}

/// Compares `im f*` and `ker g*` inside the cohomology of `mid`.
fn exactness_at(
    name: &str,
    degree: usize,
    src: &Spot,
    f: &dyn Fn(&SparseBitVec) -> Result<SparseBitVec>,
    mid: &Spot,
    g: &dyn Fn(&SparseBitVec) -> Result<SparseBitVec>,
    dst: &Spot,
) -> Result<ExactnessSpot> {
    let b_mid = GF2Subspace::spanned_by(mid.ambient, mid.coboundaries.iter().cloned());
    let mut image = b_mid.clone();
    for z in &src.cocycles {
        image.insert(f(z)?);
    }
    let image_dim = image.dim() - b_mid.dim();

    let mut cols = Vec::with_capacity(mid.cocycles.len() + dst.coboundaries.len());
    for z in &mid.cocycles {
        cols.push(g(z)?);
    }
    let m = mid.cocycles.len();
    cols.extend(dst.coboundaries.iter().cloned());
    let mat = GF2Matrix::from_columns(dst.ambient, cols)?;
    let mut kernel = b_mid.clone();
    for x in mat.kernel_basis().basis() {
        let mut v = SparseBitVec::new();
        for i in x.ones().filter(|&i| i < m) {
            v.xor_assign(&mid.cocycles[i]);
        }
        kernel.insert(v);
    }
    let kernel_dim = kernel.dim() - b_mid.dim();
    let contained = image.basis().iter().all(|v| kernel.contains(v));
    Ok(ExactnessSpot {
        spot: name.to_string(),
        degree,
        image_dim,
        kernel_dim,
        holds: contained && image_dim == kernel_dim,
    })
}

/// Builds the Mayer–Vietoris data, checks the short exact sequence of
/// cochain complexes cell by cell, applies `δ̃` to the supplied degree-`k`
/// classes of `N_A(W)` and checks exactness at every spot up to degree `n`.
pub fn mv_assemble(
    space: &Arc<FiniteMetricSpace>,
    w: &SubsetMask,
    c1: &SubsetMask,
    params: MvParams,
    classes: &[(usize, SparseBitVec)],
) -> Result<(MvData, MvReport)> {
    let data = MvData::build(space, w, c1, params)?;
    let report = mv_report(&data, classes)?;
    Ok((data, report))
}

pub fn mv_report(data: &MvData, classes: &[(usize, SparseBitVec)]) -> Result<MvReport> {
    let params = data.params;
    let n = params.degree;
    let cc = data.cochains()?;
    let [kc, c1, c2, c12] = &cc;
    let top = data.complex.max_dim();

    let mut cell_counts = Vec::with_capacity(top + 1);
    let mut short_exact = true;
    for k in 0..=top {
        let counts = [kc.dim(k), c1.dim(k), c2.dim(k), c12.dim(k)];
        short_exact &= counts[0] + counts[3] == counts[1] + counts[2];
        short_exact &= kc.cells(k).iter().all(|&j| c1.contains(k, j) || c2.contains(k, j));
        short_exact &= c12.cells(k).iter().all(|&j| c1.contains(k, j) && c2.contains(k, j));
        cell_counts.push(counts);
    }

    let mut spots_k = Vec::with_capacity(n + 1);
    let mut cohomology_ranks = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let s = [spot_of(kc, k)?, spot_of(c1, k)?, spot_of(c2, k)?, spot_of(c12, k)?];
        cohomology_ranks.push(s.each_ref().map(|s| s.cocycles.len() - s.coboundaries.len()));
        spots_k.push(s);
    }

    let mut out_classes = Vec::with_capacity(classes.len());
    for (k, omega) in classes {
        let k = *k;
        if k >= n {
            return Err(Error::InvalidParameter(format!(
                "class degree {k} must be below the top degree {n}"
            )));
        }
        let omega = c12.restrict(k, omega);
        if !c12.is_cocycle(k, &omega)? {
            return Err(Error::NotACycle);
        }
        let image = data.connecting(&cc, k, &omega)?;
        let h = kc.cohomology(k + 1)?;
        let coordinates = h.coordinates(&image).ok_or(Error::NotACycle)?;
        out_classes.push(ConnectingImage {
            input: Cocycle::new(&data.complex, k, omega),
            nonzero: coordinates.iter().any(|&b| b),
            output: Cocycle::new(&data.complex, k + 1, image),
            coordinates,
        });
    }

    let mut exactness = Vec::new();
    for k in 0..=n {
        let [sk, s1, s2, s12] = &spots_k[k];
        let off = data.complex.count(k);
        let q = |v: &SparseBitVec| -> Result<SparseBitVec> {
            let mut out = c1.restrict(k, v);
            out.xor_assign(&shifted(&c2.restrict(k, v), off));
            Ok(out)
        };
        let p = |v: &SparseBitVec| -> Result<SparseBitVec> {
            let mut a = SparseBitVec::from_indices(v.ones().filter(|&i| i < off));
            a.xor_assign(&SparseBitVec::from_indices(
                v.ones().filter(|&i| i >= off).map(|i| i - off),
            ));
            Ok(c12.restrict(k, &a))
        };
        let sum = direct_sum(s1.clone(), s2.clone());
        exactness.push(exactness_at("pieces", k, sk, &q, &sum, &p, s12)?);
        if k < n {
            let [skn, s1n, s2n, _] = &spots_k[k + 1];
            let offn = data.complex.count(k + 1);
            let conn = |v: &SparseBitVec| data.connecting(&cc, k, v);
            exactness.push(exactness_at("overlap", k, &sum, &p, s12, &conn, skn)?);
            let qn = |v: &SparseBitVec| -> Result<SparseBitVec> {
                let mut out = c1.restrict(k + 1, v);
                out.xor_assign(&shifted(&c2.restrict(k + 1, v), offn));
                Ok(out)
            };
            let sumn = direct_sum(s1n.clone(), s2n.clone());
            exactness.push(exactness_at("window", k + 1, s12, &conn, skn, &qn, &sumn)?);
        }
    }

    Ok(MvReport {
        params,
        window: data.complex.space().window_radius(),
        dichotomy: true,
        cell_counts,
        short_exact,
        cohomology_ranks,
        classes: out_classes,
        exactness,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct LocalizedSupport {
    pub input_support: SubsetMask,
    pub support: SubsetMask,
    /// Largest distance from the output support to the input support.
    pub achieved: u32,
    pub bound: u32,
    pub within: bool,
}

/// Support of `δ̃ω` against `N_R(supp ω)` with `R` the Rips scale.
pub fn localized_boundary_support(data: &MvData, k: usize, omega: &SparseBitVec) -> Result<LocalizedSupport> {
    let cc = data.cochains()?;
    let omega = cc[3].restrict(k, omega);
    let image = data.connecting(&cc, k, &omega)?;
    let space = data.complex.space();
    let input_support = data.complex.support(k, &omega);
    let support = data.complex.support(k + 1, &image);
    let achieved = if support.is_empty() {
        0
    } else {
        let dist = space.distance_to_set(&input_support)?;
        support.ids().map(|x| dist[x as usize]).max().unwrap_or(0)
    };
    let bound = data.params.r;
    Ok(LocalizedSupport {
        input_support,
        support,
        achieved,
        bound,
        within: achieved <= bound,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sides {
    Both,
    OnlyA,
    OnlyB,
    Neither,
}

#[derive(Clone, Debug, Serialize)]
pub struct Representability {
    pub s: u32,
    /// Per side, whether `ω + δτ` can be supported in `C ∖ N_s(W)`.
    pub sides: Vec<bool>,
    pub witnesses: Vec<Option<Cocycle>>,
    pub class_zero: bool,
    /// Two or more sides representable forces a zero class.
    pub consistent: bool,
}

impl Representability {
    /// Reading for a two-sided query.
    pub fn outcome(&self) -> Sides {
        match (self.sides.first(), self.sides.get(1)) {
            (Some(true), Some(true)) => Sides::Both,
            (Some(true), _) => Sides::OnlyA,
            (_, Some(true)) => Sides::OnlyB,
            _ => Sides::Neither,
        }
    }
}

/// Linear feasibility of representing `ω` inside each side region
/// `C ∖ N_s(W)`, with the class-zero test.
pub fn two_sided_representability(
    cochains: &RelativeCochains<'_>,
    w: &SubsetMask,
    sides: &[SubsetMask],
    k: usize,
    omega: &SparseBitVec,
    s: u32,
    s0: u32,
) -> Result<Representability> {
    if s < s0 {
        return Err(Error::InvalidParameter(format!("s = {s} is below s0 = {s0}")));
    }
    if k < cochains.max_dim() && !cochains.is_cocycle(k, omega)? {
        return Err(Error::NotACycle);
    }
    let space = cochains.complex().space();
    let nw = space.neighborhood(w, s)?;
    let mut flags = Vec::with_capacity(sides.len());
    let mut witnesses = Vec::with_capacity(sides.len());
    for c in sides {
        let region = c.difference(&nw);
        let rep = cochains.represent_within(k, omega, &region)?;
        flags.push(rep.is_some());
        witnesses.push(rep.map(|r| Cocycle::new(cochains.complex(), k, r.witness)));
    }
    let class_zero = cochains.is_coboundary(k, omega)?;
    let consistent = flags.iter().filter(|&&b| b).count() < 2 || class_zero;
    Ok(Representability {
        s,
        sides: flags,
        witnesses,
        class_zero,
        consistent,
    })
}
