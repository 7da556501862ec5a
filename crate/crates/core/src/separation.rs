//! Coarse boundaries, coarse complementary components, deep/shallow labels,
//! relative ends, stabilizer traces and almost-invariant extraction.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::groups::{BallModel, Element};
use crate::homology::Estimate;
use crate::metric::{FiniteMetricSpace, PointId, SubsetMask, UNREACHABLE};
use crate::par;
use crate::rips::RipsComplex;

/// Scale `r`, thickening `A` and collar width `c` of a component analysis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ComponentParams {
    pub r: u32,
    pub a: u32,
    pub collar: u32,
}

impl ComponentParams {
    pub fn new(r: u32, a: u32, collar: u32) -> Result<Self> {
        if r == 0 {
            return Err(Error::InvalidParameter("scale r must be at least 1".into()));
        }
        Ok(Self { r, a, collar })
    }

    /// Depth a collar-reaching component must exceed to count as deep.
    pub fn deep_threshold(&self, window: u32) -> u32 {
        window.saturating_sub(self.collar) / 2
    }
}

/// `N_A(W)`, with `N_A(∅) = ∅`.
fn thicken(space: &FiniteMetricSpace, w: &SubsetMask, a: u32) -> Result<SubsetMask> {
    if w.is_empty() {
        return Ok(space.empty_mask());
    }
    space.neighborhood(w, a)
}

/// `∂_r C = { x ∉ C : d(x, C) ≤ r }`.
pub fn coarse_boundary(space: &FiniteMetricSpace, c: &SubsetMask, r: u32) -> Result<SubsetMask> {
    if r == 0 {
        return Err(Error::InvalidParameter("boundary scale must be at least 1".into()));
    }
    Ok(thicken(space, c, r)?.difference(c))
}

/// Whether `∂_r(C ∖ N_A(W)) ⊆ N_A(W)` at every point outside the collar.
pub fn is_coarse_complementary(
    space: &FiniteMetricSpace,
    w: &SubsetMask,
    c: &SubsetMask,
    params: ComponentParams,
) -> Result<bool> {
    let nw = thicken(space, w, params.a)?;
    let core = space.universe().difference(&space.collar(params.collar));
    let boundary = coarse_boundary(space, &c.difference(&nw), params.r)?;
    Ok(boundary.intersection(&core).is_subset(&nw))
}

#[derive(Clone, Debug, Serialize)]
pub struct Component {
    pub id: usize,
    pub mask: SubsetMask,
    pub deep: bool,
    pub touches_collar: bool,
    /// Largest distance from a point of the component to `W`.
    pub depth: u32,
}

/// The components of `X ∖ N_A(W)` in the graph joining points at distance
/// at most `r`, with deep/shallow labels.
#[derive(Clone, Debug, Serialize)]
pub struct CoarseComponentSet {
    #[serde(skip)]
    pub space: Arc<FiniteMetricSpace>,
    pub w: SubsetMask,
    pub params: ComponentParams,
    pub window: u32,
    pub deep_threshold: u32,
    pub components: Vec<Component>,
    #[serde(skip)]
    pub thickened: SubsetMask,
}

impl CoarseComponentSet {
    pub fn deep(&self) -> impl Iterator<Item = &Component> {
        self.components.iter().filter(|c| c.deep)
    }

    pub fn deep_count(&self) -> usize {
        self.deep().count()
    }

    /// Shallow components that stay clear of the collar.
    pub fn decided_shallow(&self) -> impl Iterator<Item = &Component> {
        self.components.iter().filter(|c| !c.deep && !c.touches_collar)
    }

    /// Component containing `x`, if any.
    pub fn component_of(&self, x: PointId) -> Option<&Component> {
        self.components.iter().find(|c| c.mask.contains(x))
    }

    /// Re-checks that `mask` is coarse complementary at these parameters.
    pub fn verify(&self, mask: &SubsetMask) -> Result<bool> {
        is_coarse_complementary(&self.space, &self.w, mask, self.params)
    }

    /// Union of the listed components.
    pub fn union_of(&self, ids: &[usize]) -> SubsetMask {
        ids.iter()
            .fold(self.space.empty_mask(), |acc, &i| acc.union(&self.components[i].mask))
    }

    /// Boolean combination of two masks, with the complementary check
    /// re-run on the result.
    pub fn combine(&self, op: MaskOp, a: &SubsetMask, b: &SubsetMask) -> Result<(SubsetMask, bool)> {
        let m = match op {
            MaskOp::Union => a.union(b),
            MaskOp::Intersection => a.intersection(b),
            MaskOp::Difference => a.difference(b),
            MaskOp::SymmetricDifference => a.symmetric_difference(b),
            MaskOp::Complement => a.complement(),
        };
        let ok = self.verify(&m)?;
        Ok((m, ok))
    }

    /// Literal check of `N_R(C) ⊆ C ∪ N_{A+R}(W)` for `R` up to `max_r`,
    /// ignoring collar points.
    pub fn neighborhood_lemma_holds(&self, c: &SubsetMask, max_r: u32) -> Result<bool> {
        let core = self.space.universe().difference(&self.space.collar(self.params.collar));
        for r in 0..=max_r {
            if c.is_empty() {
                return Ok(true);
            }
            let lhs = self.space.neighborhood(c, r)?.intersection(&core);
            let rhs = c.union(&thicken(&self.space, &self.w, self.params.a + r)?);
            if !lhs.is_subset(&rhs) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MaskOp {
    Union,
    Intersection,
    Difference,
    SymmetricDifference,
    Complement,
}

/// Components of `X ∖ N_A(W)` at scale `r`. A component is deep when it
/// meets the collar and reaches farther than half the collar-safe radius
/// from `W`.
pub fn complement_components(
    space: &Arc<FiniteMetricSpace>,
    w: &SubsetMask,
    params: ComponentParams,
) -> Result<CoarseComponentSet> {
    space.check_mask(w)?;
    if w.is_empty() {
        return Err(Error::EmptySubset);
    }
    let thickened = thicken(space, w, params.a)?;
    let region = space.universe().difference(&thickened);
    let collar = space.collar(params.collar);
    let dist = space.distance_to_set(w)?;
    let window = space.window_radius();
    let threshold = params.deep_threshold(window);
    let components = space
        .components(&region, params.r)?
        .into_iter()
        .enumerate()
        .map(|(id, mask)| {
            let depth = mask
                .ids()
                .map(|x| dist[x as usize])
                .filter(|&d| d != UNREACHABLE)
                .max()
                .unwrap_or(0);
            let touches_collar = !mask.is_disjoint(&collar);
            Component {
                id,
                deep: touches_collar && depth > threshold,
                touches_collar,
                depth,
                mask,
            }
        })
        .collect();
    Ok(CoarseComponentSet {
        space: Arc::clone(space),
        w: w.clone(),
        params,
        window,
        deep_threshold: threshold,
        components,
        thickened,
    })
}

/// Per-window separation data.
#[derive(Clone, Debug, Serialize)]
pub struct SeparationWindow {
    pub window: u32,
    pub params: ComponentParams,
    /// Deep pairwise disjoint components; a lower bound for the relative
    /// end count `ẽ`.
    pub deep: u64,
    /// Deep unions of orbits of components under the partial action of
    /// `H`; a lower bound for `e`. Present only for group balls.
    pub invariant_deep: Option<u64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SeparationReport {
    pub windows: Vec<SeparationWindow>,
    pub verdict: Estimate,
}

/// One window of a separation family.
pub struct SeparationInput<'a> {
    pub space: Arc<FiniteMetricSpace>,
    pub w: SubsetMask,
    /// Group ball and subgroup generators, when the space is a group ball.
    pub action: Option<(&'a BallModel, Vec<Element>)>,
}

/// Counts deep components per window and reads the trend.
pub fn coarse_n_separation(inputs: &[SeparationInput<'_>], params: ComponentParams) -> Result<SeparationReport> {
    let mut windows = Vec::with_capacity(inputs.len());
    for inp in inputs {
        let set = complement_components(&inp.space, &inp.w, params)?;
        let invariant_deep = match &inp.action {
            Some((ball, gens)) => Some(invariant_components(ball, &inp.w, gens, &set)?.e_estimate),
            None => None,
        };
        windows.push(SeparationWindow {
            window: set.window,
            params,
            deep: set.deep_count() as u64,
            invariant_deep,
        });
    }
    let values: Vec<u64> = windows.iter().map(|w| w.deep).collect();
    Ok(SeparationReport {
        verdict: Estimate::of(&values),
        windows,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ActionVerdict {
    Invariant,
    NotInvariant,
    Undetermined,
}

#[derive(Clone, Debug, Serialize)]
pub struct InvariantComponents {
    pub verdicts: Vec<ActionVerdict>,
    /// Orbit class of each component under the partial action.
    pub orbit: Vec<usize>,
    /// Number of orbit unions containing a deep component.
    pub e_estimate: u64,
}

fn ensure_trace_matches(ball: &BallModel, w: &SubsetMask, gens: &[Element]) -> Result<()> {
    let trace = ball.subgroup_trace(&crate::groups::SubgroupSpec::Elements(gens.to_vec()))?;
    if &trace != w {
        return Err(Error::ParameterMismatch(
            "the subgroup's trace differs from the separating subset".into(),
        ));
    }
    Ok(())
}

/// Invariance of each component under the partial left action of the
/// subgroup generated by `gens`, whose trace must equal `W`.
pub fn invariant_components(
    ball: &BallModel,
    w: &SubsetMask,
    gens: &[Element],
    set: &CoarseComponentSet,
) -> Result<InvariantComponents> {
    ensure_trace_matches(ball, w, gens)?;
    let space = ball.space();
    let core = space.universe().difference(&space.collar(set.params.collar));
    let mut sym: Vec<Element> = Vec::new();
    for g in gens {
        sym.push(g.clone());
        sym.push(ball.model.inverse(g));
    }
    let n = set.components.len();
    let owner: Vec<Option<usize>> = (0..space.len() as PointId)
        .map(|x| set.components.iter().position(|c| c.mask.contains(x)))
        .collect();
    let mut uf = petgraph::unionfind::UnionFind::<usize>::new(n);
    let verdicts = set
        .components
        .iter()
        .map(|c| {
            let mut checked = false;
            let mut broken = false;
            for x in c.mask.intersection(&core).ids() {
                for h in &sym {
                    if let Some(y) = ball.act(h, x) {
                        if !core.contains(y) {
                            continue;
                        }
                        checked = true;
                        match owner[y as usize] {
                            Some(o) if o == c.id => {}
                            Some(o) => {
                                broken = true;
                                uf.union(c.id, o);
                            }
                            None => broken = true,
                        }
                    }
                }
            }
            match (checked, broken) {
                (_, true) => ActionVerdict::NotInvariant,
                (true, false) => ActionVerdict::Invariant,
                (false, false) => ActionVerdict::Undetermined,
            }
        })
        .collect();
    let orbit: Vec<usize> = (0..n).map(|i| uf.find(i)).collect();
    let mut deep_orbits: Vec<usize> = set.deep().map(|c| orbit[c.id]).collect();
    deep_orbits.sort_unstable();
    deep_orbits.dedup();
    Ok(InvariantComponents {
        verdicts,
        orbit,
        e_estimate: deep_orbits.len() as u64,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct StabilizerTrace {
    pub trace: SubsetMask,
    /// Windowed Hausdorff distance between the trace and `H`.
    pub distance_to_h: u32,
    pub close_to_h: bool,
}

fn preserves(ball: &BallModel, g: &Element, t: &SubsetMask, core: &SubsetMask) -> bool {
    let gi = ball.model.inverse(g);
    for x in t.intersection(core).ids() {
        for h in [g, &gi] {
            if let Some(y) = ball.act(h, x) {
                if core.contains(y) && !t.contains(y) {
                    return false;
                }
            }
        }
    }
    true
}

/// Elements `h` of `H` in the window with `h · (C ∖ N_A(H)) = C ∖ N_A(H)`
/// wherever both sides are visible.
pub fn stabilizer_trace(
    ball: &BallModel,
    h_mask: &SubsetMask,
    c: &SubsetMask,
    params: ComponentParams,
) -> Result<StabilizerTrace> {
    let space = ball.space();
    if h_mask.is_empty() {
        return Err(Error::EmptySubset);
    }
    let t = c.difference(&space.neighborhood(h_mask, params.a)?);
    let core = space.universe().difference(&space.collar(params.collar));
    let hs: Vec<PointId> = h_mask.ids().collect();
    let keep = par::map(&hs, |&h| preserves(ball, ball.element(h), &t, &core));
    let trace = SubsetMask::from_ids(space.len(), hs.iter().zip(keep).filter(|p| p.1).map(|p| *p.0));
    let distance_to_h = if trace.is_empty() {
        UNREACHABLE
    } else {
        space.hausdorff_distance(&trace, h_mask)?
    };
    Ok(StabilizerTrace {
        close_to_h: distance_to_h < params.deep_threshold(space.window_radius()),
        trace,
        distance_to_h,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct AlmostInvariant {
    pub mask: SubsetMask,
    pub right_invariant: bool,
    pub agrees_outside: bool,
    pub deep: bool,
    pub complement_deep: bool,
    /// `"proper"` when every check passes, `"not-proper"` when only the
    /// depth checks fail, `"inconsistent"` otherwise.
    pub status: String,
}

/// `X̂ = { g : gH ∩ window ⊆ C ∪ N_A(H) }` over non-collar `g`, with its
/// verification.
pub fn almost_invariant_extract(
    ball: &BallModel,
    h_mask: &SubsetMask,
    c: &SubsetMask,
    params: ComponentParams,
) -> Result<AlmostInvariant> {
    let space = ball.space();
    if h_mask.is_empty() {
        return Err(Error::EmptySubset);
    }
    let nh = space.neighborhood(h_mask, params.a)?;
    let allowed = c.union(&nh);
    let core = space.universe().difference(&space.collar(params.collar));
    let hs: Vec<&Element> = h_mask.ids().map(|h| ball.element(h)).collect();
    let core_ids: Vec<PointId> = core.ids().collect();
    let inside = par::map(&core_ids, |&g| {
        hs.iter()
            .filter_map(|h| ball.act_right(g, h))
            .all(|y| allowed.contains(y))
    });
    let mask = SubsetMask::from_ids(space.len(), core_ids.iter().zip(inside).filter(|p| p.1).map(|p| *p.0));

    let right_invariant = mask.ids().all(|g| {
        hs.iter()
            .filter_map(|h| ball.act_right(g, h))
            .filter(|y| core.contains(*y))
            .all(|y| mask.contains(y))
    });
    let outside = core.difference(&nh);
    let agrees_outside = mask.intersection(&outside) == c.intersection(&outside);
    let threshold = params.deep_threshold(space.window_radius());
    let is_deep = |m: &SubsetMask| -> Result<bool> {
        if m.is_empty() {
            return Ok(false);
        }
        Ok(!m.is_subset(&space.neighborhood(h_mask, threshold)?))
    };
    let deep = is_deep(&mask)?;
    let complement_deep = is_deep(&core.difference(&mask))?;
    let status = if !(right_invariant && agrees_outside) {
        "inconsistent"
    } else if deep && complement_deep {
        "proper"
    } else {
        "not-proper"
    };
    Ok(AlmostInvariant {
        mask,
        right_invariant,
        agrees_outside,
        deep,
        complement_deep,
        status: status.into(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "value")]
pub enum ShallowBound {
    Bound(u32),
    ExceedsWindow,
}

/// Smallest `R` in `grid` with every decided shallow component inside
/// `N_R(W)`; with no shallow components the bound is `A`.
pub fn shallow_bound_check(set: &CoarseComponentSet, grid: &[u32]) -> ShallowBound {
    let need = set
        .decided_shallow()
        .map(|c| c.depth)
        .max()
        .unwrap_or(set.params.a)
        .max(set.params.a);
    grid.iter()
        .copied()
        .filter(|&r| r >= need)
        .min()
        .map_or(ShallowBound::ExceedsWindow, ShallowBound::Bound)
}

/// First simplex of `complex` (in dimension order) lying in neither
/// `N_A(W) ∪ C` nor `N_A(W) ∪ (X ∖ C)`.
pub fn dichotomy_violation(complex: &RipsComplex, thickened_w: &SubsetMask, c: &SubsetMask) -> Option<Vec<PointId>> {
    let side_c = thickened_w.union(c);
    let side_d = thickened_w.union(&c.complement());
    for k in 0..=complex.max_dim() {
        for s in complex.simplices(k) {
            let in_c = s.iter().all(|&v| side_c.contains(v));
            let in_d = s.iter().all(|&v| side_d.contains(v));
            if !in_c && !in_d {
                return Some(s.to_vec());
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{grid_fixture, line_window};

    fn z_line(r: i32) -> Arc<FiniteMetricSpace> {
        Arc::new(line_window(-r, r).unwrap())
    }

    #[test]
    fn boundaries_on_line() {
        let z = z_line(10);
        let o = z.at(&[0]).unwrap();
        let pos = SubsetMask::from_predicate(z.len(), |i| i > o);
        let b = coarse_boundary(&z, &pos, 1).unwrap();
        assert_eq!(b.to_vec(), vec![o]);
        let even = SubsetMask::from_predicate(z.len(), |i| z.level(i).is_multiple_of(2));
        let b = coarse_boundary(&z, &even, 1).unwrap();
        assert!(b.ids().all(|i| z.level(i) % 2 == 1));
        assert_eq!(b.count(), 10);
    }

    #[test]
    fn complementary_on_line() {
        let z = z_line(10);
        let o = z.at(&[0]).unwrap();
        let w = SubsetMask::from_ids(z.len(), [o]);
        let pos = SubsetMask::from_predicate(z.len(), |i| i > o);
        let even = SubsetMask::from_predicate(z.len(), |i| z.level(i).is_multiple_of(2));
        let p = ComponentParams::new(1, 0, 1).unwrap();
        assert!(is_coarse_complementary(&z, &w, &pos, p).unwrap());
        assert!(!is_coarse_complementary(&z, &w, &even, p).unwrap());
        let set = complement_components(&z, &w, p).unwrap();
        assert_eq!(set.deep_count(), 2);
    }

    #[test]
    fn pocket_is_shallow_at_depth_three() {
        let f = grid_fixture("pocket_in_plane", 10).unwrap();
        let p = ComponentParams::new(1, 0, 2).unwrap();
        let set = complement_components(&f.space, &f.w, p).unwrap();
        assert_eq!(set.deep_count(), 2);
        let grid: Vec<u32> = (0..=8).collect();
        assert_eq!(shallow_bound_check(&set, &grid), ShallowBound::Bound(3));
    }
}
