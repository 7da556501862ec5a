//! The acceptance criteria, one line each. Runs without the libtest harness
//! so the pass/fail lines are always printed.

#[path = "../../core/tests/common/dense.rs"]
mod dense;

use std::collections::{HashMap, VecDeque};
use std::panic;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use coarsesep::cochain::{indicator_coboundary, RelativeCochains};
use coarsesep::essential::{
    almost_essential_probe, default_b_grid, default_essential_family, essential_probe, localized_boundary_support,
    mv_assemble, two_sided_representability, AlmostEssential, Essentiality, MvParams,
};
use coarsesep::fixtures::grid_fixture;
use coarsesep::groups::{BallModel, Element, GroupModel, SubgroupSpec};
use coarsesep::homology::{
    coarse_cohomology_dim_estimate, ends_estimate, uniform_acyclicity_probe, AcyclicityBounds, Estimate, WindowSchedule,
};
use coarsesep::mobility::{class_at_infinity, coarse_manifold_detector, mobility_set, stab_mob_comparison};
use coarsesep::rips::{build_rips, RipsComplex};
use coarsesep::separation::{
    almost_invariant_extract, coarse_n_separation, complement_components, is_coarse_complementary, ComponentParams,
    SeparationInput,
};
use coarsesep::{FiniteMetricSpace, GF2Matrix, PointId, SparseBitVec, SubsetMask};
use coarsesep_cli::{run_text, RunOptions};

use dense::{canonical_span, reduce_mod, Dense};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn ok<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn ball(model: GroupModel, radius: u32) -> BallModel {
    BallModel::build(&model, radius).expect("desk-scale ball")
}

fn abelian(b: &BallModel, i: PointId) -> Vec<i64> {
    match b.element(i) {
        Element::Abelian(v) => v.clone(),
        other => panic!("not abelian: {other:?}"),
    }
}

fn free(b: &BallModel, i: PointId) -> Vec<i32> {
    match b.element(i) {
        Element::Free(v) => v.clone(),
        other => panic!("not free: {other:?}"),
    }
}

// ---------------------------------------------------------------------------
// 1. Ends formula

fn ends_formula() -> Outcome {
    let cases = [
        (
            "Z",
            GroupModel::FreeAbelian(1),
            24,
            Estimate::Finite(2),
            Estimate::Finite(1),
        ),
        (
            "Z^2",
            GroupModel::FreeAbelian(2),
            16,
            Estimate::Finite(1),
            Estimate::Finite(0),
        ),
        ("F_2", GroupModel::Free(2), 6, Estimate::Growing, Estimate::Growing),
    ];
    let mut notes = Vec::new();
    for (name, model, r, want_ends, want_dim) in cases {
        let b = ball(model, r);
        let s0 = (r / 4).max(1);
        let fam = ok(WindowSchedule::family(r, 1, &[s0, s0 + 1, s0 + 2], 1, 1))?;
        let ends = ok(ends_estimate(b.space(), &fam))?;
        let dim = ok(coarse_cohomology_dim_estimate(b.space(), 1, &fam))?;
        ensure!(ends.verdict == want_ends, "{name}: ends {:?}", ends.verdict);
        ensure!(dim.verdict == want_dim, "{name}: dim {:?}", dim.verdict);
        let formula = match (ends.verdict, dim.verdict) {
            (Estimate::Finite(e), Estimate::Finite(d)) => e == d + 1,
            (Estimate::Growing, Estimate::Growing) => true,
            _ => false,
        };
        ensure!(formula, "{name}: ends != dim + 1");
        notes.push(format!("{name} R={r}: {:?}/{:?}", ends.verdict, dim.verdict));
    }
    Ok(notes.join("; "))
}

// ---------------------------------------------------------------------------
// 2. Coarse separation, with a flood-fill oracle on hand-built Cayley graphs

struct Graph {
    adj: Vec<Vec<usize>>,
    level: Vec<u32>,
}

fn z2_graph(r: i64) -> (Graph, Vec<(i64, i64)>) {
    let pts: Vec<(i64, i64)> = (-r..=r)
        .flat_map(|x| (-r..=r).map(move |y| (x, y)))
        .filter(|(x, y)| x.abs() + y.abs() <= r)
        .collect();
    let idx: HashMap<(i64, i64), usize> = pts.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    let adj = pts
        .iter()
        .map(|&(x, y)| {
            [(1, 0), (-1, 0), (0, 1), (0, -1)]
                .iter()
                .filter_map(|(dx, dy)| idx.get(&(x + dx, y + dy)).copied())
                .collect()
        })
        .collect();
    let level = pts.iter().map(|(x, y)| (x.abs() + y.abs()) as u32).collect();
    (Graph { adj, level }, pts)
}

/// Reduced words in `a = ±1`, `b = ±2` of length at most `r`.
fn f2_graph(r: usize) -> (Graph, Vec<Vec<i8>>) {
    let mut words: Vec<Vec<i8>> = vec![Vec::new()];
    let mut frontier = vec![Vec::new()];
    for _ in 0..r {
        let mut next = Vec::new();
        for w in &frontier {
            for l in [1i8, -1, 2, -2] {
                if w.last() != Some(&-l) {
                    let mut v: Vec<i8> = w.clone();
                    v.push(l);
                    next.push(v);
                }
            }
        }
        words.extend(next.iter().cloned());
        frontier = next;
    }
    let idx: HashMap<Vec<i8>, usize> = words.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
    let adj = words
        .iter()
        .map(|w| {
            [1i8, -1, 2, -2]
                .iter()
                .filter_map(|&l| {
                    let mut v = w.clone();
                    if v.last() == Some(&-l) {
                        v.pop();
                    } else {
                        v.push(l);
                    }
                    idx.get(&v).copied()
                })
                .collect()
        })
        .collect();
    let level = words.iter().map(|w| w.len() as u32).collect();
    (Graph { adj, level }, words)
}

fn bfs(g: &Graph, sources: &[bool]) -> Vec<u32> {
    let mut d = vec![u32::MAX; g.adj.len()];
    let mut q = VecDeque::new();
    for (i, &s) in sources.iter().enumerate() {
        if s {
            d[i] = 0;
            q.push_back(i);
        }
    }
    while let Some(x) = q.pop_front() {
        for &y in &g.adj[x] {
            if d[y] == u32::MAX {
                d[y] = d[x] + 1;
                q.push_back(y);
            }
        }
    }
    d
}

/// Deep components of the complement of `N_1(W)` at scale 1, collar 1.
fn oracle_deep(g: &Graph, w: &[bool], window: u32) -> usize {
    let d = bfs(g, w);
    let inside = |i: usize| d[i] > 1;
    let mut seen = vec![false; g.adj.len()];
    let threshold = (window - 1) / 2;
    let mut deep = 0;
    for s in 0..g.adj.len() {
        if !inside(s) || seen[s] {
            continue;
        }
        seen[s] = true;
        let mut stack = vec![s];
        let (mut touches, mut depth) = (false, 0);
        while let Some(x) = stack.pop() {
            touches |= g.level[x] > window - 1;
            depth = depth.max(d[x]);
            for &y in &g.adj[x] {
                if inside(y) && !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        if touches && depth > threshold {
            deep += 1;
        }
    }
    deep
}

fn coarse_separation() -> Outcome {
    let params = ok(ComponentParams::new(1, 1, 1))?;
    let mut notes = Vec::new();

    let mut axis_counts = Vec::new();
    for r in [6u32, 8, 10, 12] {
        let b = ball(GroupModel::FreeAbelian(2), r);
        let w = ok(b.subgroup_trace(&SubgroupSpec::Axis(0)))?;
        let lib = ok(complement_components(b.space(), &w, params))?.deep_count();
        let (g, pts) = z2_graph(r as i64);
        let oracle = oracle_deep(&g, &pts.iter().map(|p| p.1 == 0).collect::<Vec<_>>(), r);
        ensure!(
            lib == 2 && oracle == 2,
            "Z^2 axis R={r}: library {lib}, oracle {oracle}"
        );
        axis_counts.push(lib);
    }
    notes.push(format!("Z^2 axis {axis_counts:?}"));

    let balls: Vec<BallModel> = [4u32, 6, 8].iter().map(|&r| ball(GroupModel::Free(2), r)).collect();
    let mut inputs = Vec::new();
    for b in &balls {
        let w = ok(b.subgroup_trace(&SubgroupSpec::Axis(0)))?;
        let gens = ok(SubgroupSpec::Axis(0).generators(&b.model))?;
        inputs.push(SeparationInput {
            space: Arc::clone(b.space()),
            w,
            action: Some((b, gens)),
        });
    }
    let rep = ok(coarse_n_separation(&inputs, params))?;
    let counts: Vec<u64> = rep.windows.iter().map(|w| w.deep).collect();
    for (b, &c) in balls.iter().zip(&counts) {
        let (g, words) = f2_graph(b.space().window_radius() as usize);
        let w: Vec<bool> = words.iter().map(|w| w.iter().all(|&l| l.abs() == 1)).collect();
        let oracle = oracle_deep(&g, &w, b.space().window_radius()) as u64;
        ensure!(
            oracle == c,
            "F_2 R={}: library {c}, oracle {oracle}",
            b.space().window_radius()
        );
    }
    ensure!(counts.iter().all(|&c| c >= 3), "F_2 counts {counts:?}");
    ensure!(rep.verdict == Estimate::Growing, "F_2 verdict {:?}", rep.verdict);
    notes.push(format!("F_2 <a> {counts:?} growing"));

    let mut point_counts = Vec::new();
    for r in [6u32, 8, 10] {
        let b = ball(GroupModel::FreeAbelian(2), r);
        let w = SubsetMask::from_ids(b.len(), [0]);
        let lib = ok(complement_components(b.space(), &w, params))?.deep_count();
        let (g, pts) = z2_graph(r as i64);
        let oracle = oracle_deep(&g, &pts.iter().map(|&p| p == (0, 0)).collect::<Vec<_>>(), r);
        ensure!(
            lib == 1 && oracle == 1,
            "Z^2 point R={r}: library {lib}, oracle {oracle}"
        );
        point_counts.push(lib);
    }
    notes.push(format!("Z^2 point {point_counts:?}"));
    Ok(notes.join("; "))
}

// ---------------------------------------------------------------------------
// 3. Figure classification

/// Whether the 0-cycle `class` bounds in `P_j(region)`: every component of
/// the scale-`j` graph on `region` holds an even number of its points.
fn zero_cycle_bounds(space: &FiniteMetricSpace, region: &SubsetMask, j: u32, class: &[PointId]) -> bool {
    let pts: Vec<PointId> = region.ids().collect();
    let mut comp: HashMap<PointId, usize> = HashMap::new();
    let mut next = 0;
    for &s in &pts {
        if comp.contains_key(&s) {
            continue;
        }
        comp.insert(s, next);
        let mut stack = vec![s];
        while let Some(x) = stack.pop() {
            for y in space.ball(x, j) {
                if region.contains(y) && !comp.contains_key(&y) {
                    comp.insert(y, next);
                    stack.push(y);
                }
            }
        }
        next += 1;
    }
    let mut parity = vec![false; next];
    for p in class {
        match comp.get(p) {
            Some(&c) => parity[c] ^= true,
            None => return false,
        }
    }
    parity.iter().all(|&p| !p)
}

fn sorted(x: &[PointId]) -> Vec<PointId> {
    let mut v = x.to_vec();
    v.sort_unstable();
    v
}

/// Faces occurring an odd number of times in the boundaries of `chain`.
fn face_parity(chain: &[Vec<PointId>]) -> Vec<Vec<PointId>> {
    let mut odd: HashMap<Vec<PointId>, bool> = HashMap::new();
    for s in chain {
        let s = sorted(s);
        if s.len() < 2 {
            continue;
        }
        for drop in 0..s.len() {
            let face: Vec<PointId> = s.iter().enumerate().filter(|p| p.0 != drop).map(|p| *p.1).collect();
            *odd.entry(face).or_default() ^= true;
        }
    }
    let mut v: Vec<Vec<PointId>> = odd.into_iter().filter(|p| p.1).map(|p| p.0).collect();
    v.sort();
    v
}

fn figure_classification() -> Outcome {
    let fam = ok(default_essential_family(12))?;
    let cases = [
        ("fig1_halfplane_flap", 1, "bottom", Essentiality::Essential),
        ("fig1_halfplane_flap", 1, "top", Essentiality::NonEssential),
        ("fig2_plane_fin", 2, "top", Essentiality::NonEssential),
        ("fig2_plane_fin", 2, "bottom", Essentiality::Essential),
    ];
    let mut notes = Vec::new();
    for (fixture, n, comp, want) in cases {
        let f = ok(grid_fixture(fixture, 12))?;
        let c = ok(f.component(comp))?;
        let v = ok(essential_probe(&f.space, &f.w, c, comp, n, &fam))?;
        ensure!(v.verdict == want, "{fixture}/{comp}: {:?} ({:?})", v.verdict, v.reason);
        ensure!(!v.witnesses.is_empty(), "{fixture}/{comp}: no witnesses");
        for wit in &v.witnesses {
            ensure!(wit.replayed, "{fixture}/{comp}: witness not replayed");
            let s = wit.schedule;
            let region = c.union(&f.w).difference(&f.space.level_ball(s.outer_radius));
            let fits = |x: &[PointId]| {
                x.iter().all(|&p| region.contains(p))
                    && x.iter()
                        .all(|&p| x.iter().all(|&q| f.space.distance(p, q) <= s.outer_scale))
            };
            ensure!(
                wit.class.iter().all(|x| x.len() == n),
                "{fixture}/{comp}: class is not an {}-chain",
                n - 1
            );
            ensure!(
                face_parity(&wit.class).is_empty() || n == 1,
                "{fixture}/{comp}: class is not a cycle"
            );
            if n == 1 {
                let class: Vec<PointId> = wit.class.iter().map(|s| s[0]).collect();
                let bounds = zero_cycle_bounds(&f.space, &region, s.outer_scale, &class);
                ensure!(
                    bounds == wit.dies,
                    "{fixture}/{comp}: oracle says bounds={bounds}, dies={}",
                    wit.dies
                );
            }
            if wit.dies {
                ensure!(
                    wit.fill.iter().all(|x| x.len() == n + 1 && fits(x)),
                    "{fixture}/{comp}: bad fill simplex"
                );
                let mut cl: Vec<Vec<PointId>> = wit.class.iter().map(|x| sorted(x)).collect();
                cl.sort();
                ensure!(
                    face_parity(&wit.fill) == cl,
                    "{fixture}/{comp}: the fill's boundary is not the class"
                );
            }
        }
        notes.push(format!("{fixture}/{comp} {:?}", v.verdict));
    }
    Ok(notes.join("; "))
}

// ---------------------------------------------------------------------------
// 4. Almost-essential probe

fn almost_essential() -> Outcome {
    let mut notes = Vec::new();
    let cases: [(&str, &str, Option<u32>); 4] = [
        ("fig1_halfplane_flap", "bottom", Some(1)),
        ("fig1_halfplane_flap", "top", None),
        ("line_in_plane", "upper", Some(1)),
        ("line_in_plane", "lower", Some(1)),
    ];
    for (fixture, comp, want) in cases {
        let mut seen = Vec::new();
        for r in [8u32, 10, 12] {
            let f = ok(grid_fixture(fixture, r))?;
            let grid = default_b_grid(r, 2);
            let rep = ok(almost_essential_probe(
                &f.space,
                &f.w,
                ok(f.component(comp))?,
                0,
                &grid,
                2,
            ))?;
            let got = match rep.result {
                AlmostEssential::Bound(b) => Some(b),
                AlmostEssential::FailsAtWindow => None,
            };
            ensure!(got == want, "{fixture}/{comp} R={r}: {:?}", rep.result);
            seen.push(got);
        }
        notes.push(format!(
            "{fixture}/{comp} {}",
            match want {
                Some(b) => format!("B={b} at R=8,10,12"),
                None => "fails at R=8,10,12".into(),
            }
        ));
    }
    Ok(notes.join("; "))
}

// ---------------------------------------------------------------------------
// 5. Mayer-Vietoris connecting map

/// Dense coboundary `δ_k` on the relative cells, built from simplex faces.
fn dense_delta(cc: &RelativeCochains<'_>, k: usize) -> (Dense, Vec<usize>, Vec<usize>) {
    let cx: &RipsComplex = cc.complex();
    let src: Vec<usize> = cc.cells(k).to_vec();
    let dst: Vec<usize> = cc.cells(k + 1).to_vec();
    let col: HashMap<usize, usize> = src.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    let mut m = Dense::zeros(dst.len(), src.len());
    for (row, &t) in dst.iter().enumerate() {
        let s = cx.simplex(k + 1, t).to_vec();
        for drop in 0..s.len() {
            let face: Vec<PointId> = s.iter().enumerate().filter(|p| p.0 != drop).map(|p| *p.1).collect();
            let f = cx.index_of(&face).expect("faces are simplices");
            if let Some(&c) = col.get(&f) {
                m.flip(row, c);
            }
        }
    }
    (m, src, dst)
}

fn on_cells(v: &SparseBitVec, cells: &[usize]) -> Vec<bool> {
    cells.iter().map(|&c| v.get(c)).collect()
}

fn mayer_vietoris() -> Outcome {
    let b = ball(GroupModel::FreeAbelian(2), 10);
    let sp = Arc::clone(b.space());
    let w = ok(b.subgroup_trace(&SubgroupSpec::Axis(0)))?;
    let set = ok(complement_components(&sp, &w, ok(ComponentParams::new(2, 1, 1))?))?;
    let upper = set
        .deep()
        .find(|c| c.mask.ids().any(|i| abelian(&b, i)[1] > 0))
        .ok_or("no upper component")?
        .mask
        .clone();
    let params = MvParams {
        r: 2,
        a: 1,
        collar: 1,
        degree: 2,
    };
    let right = SubsetMask::from_predicate(sp.len(), |i| abelian(&b, i)[0] >= 1);
    let (data, _) = ok(mv_assemble(&sp, &w, &upper, params, &[]))?;
    let cc = ok(data.cochains())?;
    let omega = ok(indicator_coboundary(&cc[3], &right))?;
    ensure!(ok(cc[3].is_cocycle(1, &omega))?, "ω is not a cocycle on N_A(W)");
    ensure!(!ok(cc[3].is_coboundary(1, &omega))?, "ω is zero on N_A(W)");
    let report = ok(coarsesep::essential::mv_report(&data, &[(1, omega.clone())]))?;
    ensure!(report.short_exact, "cochain sequence not short exact");
    ensure!(report.classes.len() == 1 && report.classes[0].nonzero, "δ̃ω is zero");
    let failing: Vec<_> = report.exactness.iter().filter(|s| !s.holds).collect();
    ensure!(failing.is_empty(), "exactness fails at {failing:?}");

    // Oracle: δ̃ω is a relative cocycle of the window and not a coboundary.
    let out = ok(data.connecting(&cc, 1, &omega))?;
    let (d1, src1, dst1) = dense_delta(&cc[0], 1);
    let (d2, _, _) = dense_delta(&cc[0], 2);
    let out2 = on_cells(&out, &dst1);
    ensure!(d2.mul(&out2).iter().all(|&x| !x), "δ̃ω is not a cocycle (dense)");
    ensure!(
        d1.solve(&out2).is_none(),
        "δ̃ω is a coboundary (dense), {} cells",
        src1.len()
    );

    let loc = ok(localized_boundary_support(&data, 1, &omega))?;
    ensure!(loc.within, "support distance {} exceeds {}", loc.achieved, loc.bound);
    Ok(format!(
        "δ̃ω nonzero; {} exactness spots hold; support within {} of supp ω (bound {})",
        report.exactness.len(),
        loc.achieved,
        loc.bound
    ))
}

// ---------------------------------------------------------------------------
// 6. Non-crossing

/// `(a-exponent, first non-a letter)` of a reduced word.
fn a_prefix(w: &[i32]) -> (i64, Option<i32>) {
    let k = w.iter().take_while(|l| l.abs() == 1).map(|&l| l as i64).sum();
    (k, w.iter().copied().find(|l| l.abs() != 1))
}

fn non_crossing() -> Outcome {
    let b = ball(GroupModel::Free(2), 6);
    let sp = Arc::clone(b.space());
    let n = sp.len();
    let w = ok(b.subgroup_trace(&SubgroupSpec::Axis(0)))?;
    let params = ok(ComponentParams::new(1, 1, 1))?;
    let sides = [
        SubsetMask::from_predicate(n, |i| a_prefix(&free(&b, i)).1 == Some(2)),
        SubsetMask::from_predicate(n, |i| {
            let (k, l) = a_prefix(&free(&b, i));
            l == Some(-2) && k >= 0
        }),
        SubsetMask::from_predicate(n, |i| {
            let (k, l) = a_prefix(&free(&b, i));
            l == Some(-2) && k < 0
        }),
    ];
    let set = ok(complement_components(&sp, &w, params))?;
    for (i, s) in sides.iter().enumerate() {
        ensure!(
            ok(is_coarse_complementary(&sp, &w, s, params))?,
            "side {i} is not complementary"
        );
        ensure!(
            set.deep().any(|c| c.mask.is_subset(s)),
            "side {i} has no deep component"
        );
        for t in &sides[i + 1..] {
            ensure!(s.is_disjoint(t), "sides overlap");
        }
    }

    let cx = ok(build_rips(&sp, &sp.universe(), 1, 2))?;
    let cc = ok(RelativeCochains::new(&cx, &sp.universe(), 1))?;
    let mut classes: Vec<SparseBitVec> = Vec::new();
    let omegas: Vec<SparseBitVec> = sides
        .iter()
        .map(|s| indicator_coboundary(&cc, s))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    classes.extend(omegas.iter().cloned());
    classes.push(omegas[0].xor(&omegas[1]));
    classes.push(omegas[0].xor(&omegas[1]).xor(&omegas[2]));
    let deep_cuts: Vec<SparseBitVec> = [vec![2, 2, 2, 2], vec![-2, -2, -2, -2], vec![-1, -2, -2, -2, -2]]
        .iter()
        .map(|p| {
            let below = SubsetMask::from_predicate(n, |i| free(&b, i).starts_with(p));
            indicator_coboundary(&cc, &below)
        })
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    for (i, d) in deep_cuts.iter().enumerate() {
        ensure!(!ok(cc.is_coboundary(1, d))?, "deep cut {i} is zero");
    }
    classes.extend(deep_cuts.iter().cloned());
    classes.push(deep_cuts[0].xor(&deep_cuts[2]));
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let core: Vec<PointId> = sp.universe().difference(cc.collar()).ids().collect();
    for base in [SparseBitVec::new(), omegas[0].clone(), deep_cuts[1].clone()] {
        for _ in 0..4 {
            let centre = core[rng.gen_range(0..core.len())];
            let t = SubsetMask::from_ids(
                n,
                sp.ball(centre, rng.gen_range(0..3))
                    .into_iter()
                    .filter(|x| core.contains(x)),
            );
            classes.push(base.xor(&ok(indicator_coboundary(&cc, &t))?));
        }
    }

    let (d0, src0, dst0) = dense_delta(&cc, 0);
    let (s, s0) = (2, 2);
    let (mut two_sided, mut one_sided) = (0, 0);
    for omega in &classes {
        for i in 0..3 {
            for j in i + 1..3 {
                let rep = ok(two_sided_representability(
                    &cc,
                    &w,
                    &[sides[i].clone(), sides[j].clone()],
                    1,
                    omega,
                    s,
                    s0,
                ))?;
                let both = rep.sides.iter().all(|&x| x);
                ensure!(rep.consistent, "inconsistent representability");
                if rep.sides.iter().filter(|&&x| x).count() == 1 {
                    one_sided += 1;
                }
                if !both {
                    continue;
                }
                two_sided += 1;
                let beta = ok(cc.coboundary_preimage(1, omega))?.ok_or("representable on two sides but no preimage")?;
                ensure!(ok(cc.coboundary(0, &beta))? == cc.restrict(1, omega), "δβ != ω");
                let x = d0.solve(&on_cells(omega, &dst0));
                ensure!(x.is_some(), "dense oracle finds no preimage ({} vertices)", src0.len());
            }
        }
    }
    ensure!(two_sided > 0, "no class was representable on two sides");
    ensure!(one_sided > 0, "no class was representable on exactly one side");
    Ok(format!(
        "{} classes x 3 side pairs: {two_sided} two-sided (all verified zero), {one_sided} one-sided",
        classes.len()
    ))
}

// ---------------------------------------------------------------------------
// 7. Mobility

fn mobility() -> Outcome {
    let mut notes = Vec::new();

    let z = ball(GroupModel::FreeAbelian(1), 12);
    let sp = Arc::clone(z.space());
    let cx = ok(build_rips(&sp, &sp.universe(), 1, 2))?;
    let cc = ok(RelativeCochains::new(&cx, &sp.universe(), 1))?;
    let right = SubsetMask::from_predicate(sp.len(), |i| abelian(&z, i)[0] >= 1);
    let alpha = ok(indicator_coboundary(&cc, &right))?;
    let det = ok(coarse_manifold_detector(&cc, 1, &alpha, &[1]))?;
    ensure!(det.detected, "Z: detector false");
    notes.push("Z true at D=1".to_string());

    let z2 = ball(GroupModel::FreeAbelian(2), 10);
    let sp = Arc::clone(z2.space());
    let cx = ok(build_rips(&sp, &sp.universe(), 2, 3))?;
    let cc = ok(RelativeCochains::new(&cx, &sp.universe(), 1))?;
    let sched = ok(WindowSchedule::new(4, 2, 2, 2, 10, 1))?;
    let alpha = ok(class_at_infinity(&cc, 2, &sched))?.ok_or("Z^2: no class at infinity")?;
    let det = ok(coarse_manifold_detector(&cc, 2, &alpha, &[2, 3]))?;
    ensure!(det.detected, "Z^2: detector false {:?}", det.steps);
    let at: Vec<u32> = det.steps.iter().filter(|s| s.covered).map(|s| s.d).collect();
    notes.push(format!("Z^2 true at D={at:?}"));

    let f2 = ball(GroupModel::Free(2), 6);
    let sp = Arc::clone(f2.space());
    let cx = ok(build_rips(&sp, &sp.universe(), 1, 2))?;
    let cc = ok(RelativeCochains::new(&cx, &sp.universe(), 1))?;
    let abranch = SubsetMask::from_predicate(sp.len(), |i| free(&f2, i).first() == Some(&1));
    let edge = ok(indicator_coboundary(&cc, &abranch))?;
    ensure!(edge.count_ones() == 1, "the cut class is not a single edge");
    let sched = ok(WindowSchedule::new(3, 1, 2, 1, 6, 1))?;
    let generic = ok(class_at_infinity(&cc, 1, &sched))?.ok_or("F_2: no class at infinity")?;
    for (name, cls) in [("edge", &edge), ("class at infinity", &generic)] {
        let det = ok(coarse_manifold_detector(&cc, 1, cls, &[1, 2]))?;
        ensure!(!det.detected, "F_2 {name}: detector true");
    }
    notes.push("F_2 false at D=1,2".into());

    let mob = ok(mobility_set(&cc, 1, &edge, 2, None))?;
    let cmp = ok(stab_mob_comparison(&f2, &cc, 1, &edge, &mob))?;
    let h = cmp.hausdorff.ok_or("F_2: Hausdorff distance undefined")?;
    let r = cmp.replay_radius.ok_or("F_2: replay radius undefined")?;
    let brute = {
        let a: Vec<PointId> = cmp.comparable_orbit.ids().collect();
        let bm: Vec<PointId> = cmp.extended_mobility.ids().collect();
        let one = |xs: &[PointId], ys: &[PointId]| {
            xs.iter()
                .map(|&x| ys.iter().map(|&y| sp.distance(x, y)).min().unwrap_or(u32::MAX))
                .max()
                .unwrap_or(0)
        };
        one(&a, &bm).max(one(&bm, &a))
    };
    ensure!(brute == h, "Hausdorff {h} but brute force {brute}");
    ensure!(h <= r, "Hausdorff {h} exceeds replayed R {r}");
    notes.push(format!("F_2 edge: Hausdorff {h} <= R {r}"));
    Ok(notes.join("; "))
}

// ---------------------------------------------------------------------------
// 8. Almost-invariant extraction

fn check_extract(b: &BallModel, h: &SubsetMask, c: &SubsetMask, params: ComponentParams) -> Result<String, String> {
    let sp = b.space();
    let ai = ok(almost_invariant_extract(b, h, c, params))?;
    ensure!(ai.status == "proper", "status {}", ai.status);
    let core = sp.universe().difference(&sp.collar(params.collar));
    let x = &ai.mask;
    // X̂H = X̂ wherever visible, by direct multiplication.
    for g in x.ids() {
        for hh in h.ids() {
            let prod = b.model.multiply(b.element(g), b.element(hh));
            if let Some(y) = b.id_of(&prod) {
                ensure!(!core.contains(y) || x.contains(y), "X̂ not right-invariant at {g}·{hh}");
            }
        }
    }
    let hv: Vec<bool> = (0..sp.len() as PointId).map(|i| h.contains(i)).collect();
    let graph = Graph {
        adj: (0..sp.len() as PointId)
            .map(|i| sp.neighbors(i).iter().map(|&j| j as usize).collect())
            .collect(),
        level: (0..sp.len() as PointId).map(|i| sp.level(i)).collect(),
    };
    let d = bfs(&graph, &hv);
    let outside = SubsetMask::from_predicate(sp.len(), |i| core.contains(i) && d[i as usize] > params.a);
    ensure!(
        x.intersection(&outside) == c.intersection(&outside),
        "X̂ and C differ outside N_A(H)"
    );
    let t = params.deep_threshold(sp.window_radius());
    let deep = |m: &SubsetMask| m.ids().any(|i| d[i as usize] > t);
    ensure!(deep(x), "X̂ is shallow");
    ensure!(deep(&core.difference(x)), "the complement of X̂ is shallow");
    Ok(format!("|X̂| = {}", x.count()))
}

fn almost_invariant() -> Outcome {
    let params = ok(ComponentParams::new(1, 1, 1))?;
    let z2 = ball(GroupModel::FreeAbelian(2), 10);
    let h = ok(z2.subgroup_trace(&SubgroupSpec::Axis(0)))?;
    let upper = SubsetMask::from_predicate(z2.len(), |i| abelian(&z2, i)[1] > 0);
    let a = check_extract(&z2, &h, &upper, params).map_err(|e| format!("Z^2: {e}"))?;
    let f2 = ball(GroupModel::Free(2), 6);
    let h = ok(f2.subgroup_trace(&SubgroupSpec::Axis(0)))?;
    let bside = SubsetMask::from_predicate(f2.len(), |i| a_prefix(&free(&f2, i)).1 == Some(2));
    let b = check_extract(&f2, &h, &bside, params).map_err(|e| format!("F_2: {e}"))?;
    Ok(format!("Z^2 upper half {a}; F_2 b-side {b}"))
}

// ---------------------------------------------------------------------------
// 9. Linear algebra oracle

fn to_bools(v: &SparseBitVec, n: usize) -> Vec<bool> {
    (0..n).map(|i| v.get(i)).collect()
}

fn linear_algebra() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut consistent = 0;
    for case in 0..200 {
        let rows = rng.gen_range(1..=200);
        let cols = rng.gen_range(1..=200);
        let density = [0.01, 0.03, 0.1, 0.3][case % 4];
        let dense_rows: Vec<Vec<bool>> = (0..rows)
            .map(|_| (0..cols).map(|_| rng.gen_bool(density)).collect())
            .collect();
        let m = ok(GF2Matrix::from_dense(&dense_rows))?;
        let d = Dense::from_bools(&dense_rows, cols);
        ensure!(m.rank() == d.rank(), "case {case}: rank {} vs {}", m.rank(), d.rank());

        let lib_kernel: Vec<Vec<bool>> = m.kernel_basis().basis().iter().map(|v| to_bools(v, cols)).collect();
        let kc = canonical_span(&d.kernel(), cols);
        ensure!(canonical_span(&lib_kernel, cols) == kc, "case {case}: kernels differ");

        let b: Vec<bool> = if rng.gen_bool(0.5) {
            let x: Vec<bool> = (0..cols).map(|_| rng.gen_bool(0.5)).collect();
            d.mul(&x)
        } else {
            (0..rows).map(|_| rng.gen_bool(0.5)).collect()
        };
        let bs = SparseBitVec::from_indices((0..rows).filter(|&i| b[i]));
        let lib = ok(m.solve(&bs))?;
        let oracle = d.solve(&b);
        match (lib, oracle) {
            (None, None) => {}
            (Some(x), Some(y)) => {
                let x = to_bools(&x, cols);
                ensure!(d.mul(&x) == b, "case {case}: library solution is wrong");
                ensure!(
                    reduce_mod(&x, &kc) == reduce_mod(&y, &kc),
                    "case {case}: solutions differ mod kernel"
                );
                consistent += 1;
            }
            (l, o) => return Err(format!("case {case}: solvable {} vs {}", l.is_some(), o.is_some())),
        }
    }
    Ok(format!("200 systems, {consistent} consistent"))
}

// ---------------------------------------------------------------------------
// 10. Acyclicity probe

fn acyclicity() -> Outcome {
    let z2 = ball(GroupModel::FreeAbelian(2), 12);
    let centers: Vec<PointId> = ["", "a", "ab", "a^-2b"]
        .iter()
        .map(|w| {
            if w.is_empty() {
                Some(0)
            } else {
                z2.id_of_word(w).unwrap()
            }
        })
        .collect::<Option<_>>()
        .ok_or("center outside the window")?;
    let radii = [1, 2, 3, 4, 5];
    let prof = ok(uniform_acyclicity_probe(
        z2.space(),
        1,
        &centers,
        &[1],
        &radii,
        AcyclicityBounds::default(),
    ))?;
    ensure!(
        prof.lambda.get(&(1, 1)) == Some(&Some(2)),
        "λ(1) = {:?}",
        prof.lambda.get(&(1, 1))
    );
    for e in prof.entries.iter().filter(|e| e.degree == 1) {
        ensure!(
            e.lambda == Some(2),
            "center {} r={}: λ {:?}",
            e.center,
            e.radius,
            e.lambda
        );
        ensure!(
            e.mu == Some(e.radius),
            "center {} r={}: μ {:?}",
            e.center,
            e.radius,
            e.mu
        );
    }

    let line = Arc::new(ok(coarsesep::fixtures::line_window(0, 10))?);
    let ends = SubsetMask::from_ids(line.len(), [line.at(&[0]).unwrap(), line.at(&[10]).unwrap()]);
    let (two, _) = ok(line.restrict(&ends))?;
    let two = Arc::new(two);
    let prof = ok(uniform_acyclicity_probe(
        &two,
        0,
        &[0],
        &[1],
        &[10],
        AcyclicityBounds::default(),
    ))?;
    ensure!(prof.failures().count() == 1, "two-point space did not fail at k=0");
    Ok(format!(
        "Z^2: λ(1)=2, μ(1,r)=r at {} centers, r=1..5; two-point space fails at k=0",
        centers.len()
    ))
}

// ---------------------------------------------------------------------------
// 11. Determinism

const SCENARIOS: [&str; 3] = [
    r#"{ "schema": 1, "name": "z2",
         "space": { "kind": "group", "group": { "free-abelian": 2 }, "radius": 10 },
         "w": { "kind": "axis", "index": 0 },
         "analyses": [ { "kind": "separate" }, { "kind": "mv", "component": "deep-0" },
                       { "kind": "almost-invariant", "component": "deep-0" },
                       { "kind": "mobility", "n": 2, "r": 2, "d": [2, 3] } ] }"#,
    r#"{ "schema": 1, "name": "fig1",
         "space": { "kind": "fixture", "name": "fig1_halfplane_flap", "window": 12 },
         "analyses": [ { "kind": "essential", "component": "bottom" },
                       { "kind": "almost-essential", "component": "top" },
                       { "kind": "pd-signature", "n": 2 } ] }"#,
    r#"{ "schema": 1, "name": "f2",
         "space": { "kind": "group", "group": { "free": 2 }, "radius": 6 },
         "w": { "kind": "axis", "index": 0 },
         "analyses": [ { "kind": "ends" }, { "kind": "separate", "windows": [2, 4, 6] },
                       { "kind": "mobility", "d": [1, 2], "class": { "kind": "prefix", "word": "a" } },
                       { "kind": "acyclicity", "k_max": 0 } ] }"#,
];

fn determinism() -> Outcome {
    let mut bytes = 0;
    for sc in SCENARIOS {
        let a = ok(run_text(
            sc,
            RunOptions {
                threads: Some(1),
                seed: 3,
            },
        ))?
        .to_json();
        let b = ok(run_text(
            sc,
            RunOptions {
                threads: None,
                seed: 4242,
            },
        ))?
        .to_json();
        ensure!(a == b, "reports differ");
        bytes += a.len();
    }
    Ok(format!("3 scenarios, {bytes} identical bytes"))
}

fn main() {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 11] = [
        ("ends formula", ends_formula),
        ("coarse separation", coarse_separation),
        ("figure classification", figure_classification),
        ("almost-essential probe", almost_essential),
        ("Mayer-Vietoris connecting map", mayer_vietoris),
        ("non-crossing", non_crossing),
        ("mobility", mobility),
        ("almost-invariant extraction", almost_invariant),
        ("linear algebra oracle", linear_algebra),
        ("acyclicity probe", acyclicity),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let res = panic::catch_unwind(f).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into()))
        });
        let secs = t.elapsed().as_secs_f64();
        match res {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} [{secs:.1}s]", i + 1),
            Err(e) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {e} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
