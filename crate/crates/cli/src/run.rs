//! Running a scenario: building the space, evaluating each analysis and
//! assembling the report.

use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use coarsesep::cochain::{indicator_coboundary, RelativeCochains};
use coarsesep::essential::{
    almost_essential_probe, default_b_grid, essential_probe, localized_boundary_support, mv_report, AlmostEssential,
    Essentiality, MvData, MvParams,
};
use coarsesep::fixtures::{grid_fixture, Fixture};
use coarsesep::groups::{BallModel, Element, DEFAULT_BALL_CAP};
use coarsesep::homology::{
    coarse_cohomology_dim_estimate, ends_estimate, pd_signature_check, uniform_acyclicity_probe, AcyclicityBounds,
    Estimate, PdVerdict, WindowSchedule,
};
use coarsesep::metric::Label;
use coarsesep::mobility::{class_at_infinity, coarse_manifold_detector, mobility_set, stab_mob_comparison};
use coarsesep::rips::{build_rips, set_simplex_cap, DEFAULT_SIMPLEX_CAP};
use coarsesep::separation::{
    almost_invariant_extract, coarse_n_separation, complement_components, shallow_bound_check, stabilizer_trace,
    ComponentParams, SeparationInput,
};
use coarsesep::{par, Error, FiniteMetricSpace, PointId, Result, SubsetMask};

use crate::scenario::{
    is_identity_word, Analysis, Caps, Center, ClassSpec, Family, Scenario, SpaceSpec, WSpec, SCHEMA,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Ok,
    Inconclusive,
    Error,
}

#[derive(Clone, Debug, Serialize)]
pub struct AnalysisReport {
    pub index: usize,
    pub kind: String,
    pub status: Status,
    pub window: u32,
    pub schedules: Vec<WindowSchedule>,
    pub parameters: Analysis,
    pub summary: String,
    pub error: Option<String>,
    pub result: Value,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpaceInfo {
    pub description: String,
    pub window: u32,
    pub points: Option<usize>,
    pub w_points: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema: u32,
    pub scenario: String,
    pub space: SpaceInfo,
    pub caps: Caps,
    pub analyses: Vec<AnalysisReport>,
}

impl Report {
    /// 0 when every verdict was reached, 2 when some analysis is
    /// inconclusive, 1 when some analysis failed.
    pub fn exit_code(&self) -> i32 {
        if self.analyses.iter().any(|a| a.status == Status::Error) {
            1
        } else if self.analyses.iter().any(|a| a.status == Status::Inconclusive) {
            2
        } else {
            0
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let name = if self.scenario.is_empty() {
            "(unnamed)"
        } else {
            &self.scenario
        };
        out.push_str(&format!("scenario {name} (schema {})\n", self.schema));
        out.push_str(&format!(
            "space: {}, window {}",
            self.space.description, self.space.window
        ));
        if let Some(p) = self.space.points {
            out.push_str(&format!(", {p} points"));
        }
        if let Some(w) = self.space.w_points {
            out.push_str(&format!(", |W| = {w}"));
        }
        out.push('\n');
        for a in &self.analyses {
            let status = match a.status {
                Status::Ok => "ok",
                Status::Inconclusive => "inconclusive",
                Status::Error => "error",
            };
            out.push_str(&format!("[{}] {}: {status}\n    {}\n", a.index, a.kind, a.summary));
            if let Some(e) = &a.error {
                out.push_str(&format!("    error: {e}\n"));
            }
        }
        out
    }
}

/// The space of a scenario at one window.
pub struct Built {
    pub space: Arc<FiniteMetricSpace>,
    pub ball: Option<BallModel>,
    pub fixture: Option<Fixture>,
    pub w: Option<SubsetMask>,
    pub gens: Option<Vec<Element>>,
}

fn lattice_dim(name: &str) -> u32 {
    if name == "fig2_plane_fin" || name == "plane_in_space" {
        3
    } else {
        2
    }
}

fn point_of(space: &FiniteMetricSpace, ball: Option<&BallModel>, c: &Center) -> Result<PointId> {
    let found = match (c, ball) {
        (Center::Word(w), Some(b)) if is_identity_word(w) => b.id_of(&b.model.identity()),
        (Center::Word(w), Some(b)) => b.id_of_word(w)?,
        (Center::Coords(v), _) => space.at(v),
        (Center::Word(_), None) => None,
    };
    found.ok_or_else(|| Error::InvalidParameter(format!("point {c:?} lies outside the window")))
}

/// Builds the space at `window`, honouring the vertex cap.
pub fn build(spec: &SpaceSpec, w: Option<&WSpec>, window: u32, caps: &Caps) -> Result<Built> {
    let cap = caps.max_vertices.unwrap_or(DEFAULT_BALL_CAP);
    let (space, ball, fixture) = match spec {
        SpaceSpec::Group { group, .. } => {
            let ball = BallModel::build_capped(&group.model(), window, cap)?;
            (Arc::clone(ball.space()), Some(ball), None)
        }
        SpaceSpec::Fixture { name, .. } => {
            let side = 2 * u64::from(window) + 1;
            let estimate = side.saturating_pow(lattice_dim(name));
            if estimate > cap {
                return Err(Error::WindowTooLarge { estimate, cap });
            }
            let f = grid_fixture(name, window)?;
            (Arc::clone(&f.space), None, Some(f))
        }
    };
    let (w, gens) = match (w, &ball, &fixture) {
        (None | Some(WSpec::Fixture), _, Some(f)) => (Some(f.w.clone()), None),
        (None, _, None) => (None, None),
        (Some(WSpec::Point { at }), _, _) => {
            let p = point_of(&space, ball.as_ref(), at)?;
            (Some(SubsetMask::from_ids(space.len(), [p])), None)
        }
        (Some(spec), Some(b), _) => {
            let sub = spec
                .subgroup()
                .ok_or_else(|| Error::InvalidParameter("w needs a subgroup description".into()))?;
            (Some(b.subgroup_trace(&sub)?), Some(sub.generators(&b.model)?))
        }
        (Some(_), None, _) => {
            return Err(Error::InvalidParameter("subgroup w needs a group space".into()));
        }
    };
    Ok(Built {
        space,
        ball,
        fixture,
        w,
        gens,
    })
}

impl Built {
    fn w(&self) -> Result<&SubsetMask> {
        self.w.as_ref().ok_or(Error::EmptySubset)
    }

    fn ball(&self) -> Result<&BallModel> {
        self.ball
            .as_ref()
            .ok_or_else(|| Error::InvalidParameter("this analysis needs a group space".into()))
    }

    /// A fixture component by name, or `deep-<i>`: the `i`-th deep
    /// component of `X ∖ N_A(W)` at the given split.
    fn component(&self, name: &str, params: ComponentParams) -> Result<SubsetMask> {
        if let Some(i) = name.strip_prefix("deep-") {
            let i: usize = i
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("bad component reference '{name}'")))?;
            let set = complement_components(&self.space, self.w()?, params)?;
            let count = set.deep_count();
            return set.deep().nth(i).map(|c| c.mask.clone()).ok_or_else(|| {
                Error::InvalidParameter(format!("{name} requested but only {count} deep components exist"))
            });
        }
        match &self.fixture {
            Some(f) => f.component(name).cloned(),
            None => Err(Error::InvalidParameter(format!("unknown component '{name}'"))),
        }
    }
}

/// What one analysis produced.
struct Outcome {
    status: Status,
    schedules: Vec<WindowSchedule>,
    summary: String,
    result: Value,
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("results serialize")
}

fn estimate_text(e: Estimate) -> String {
    match e {
        Estimate::Finite(v) => v.to_string(),
        Estimate::Growing => "growing".into(),
        Estimate::Inconclusive => "inconclusive".into(),
    }
}

fn family_text(f: &Family) -> String {
    let radii: Vec<String> = f.radii.iter().map(u32::to_string).collect();
    format!("S in {{{}}}, i={}, j={}, c={}", radii.join(","), f.i, f.j, f.collar)
}

fn run_ends(b: &Built, window: u32, family: &Option<Family>) -> Result<Outcome> {
    let f = family.clone().unwrap_or_else(|| Family::ends_default(window));
    let schedules = f.schedules(window)?;
    let ends = ends_estimate(&b.space, &schedules)?;
    let dim = coarse_cohomology_dim_estimate(&b.space, 1, &schedules)?;
    let formula = match (ends.verdict, dim.verdict) {
        (Estimate::Finite(e), Estimate::Finite(d)) => Some(e == d + 1),
        (Estimate::Growing, Estimate::Growing) => Some(true),
        (Estimate::Inconclusive, _) | (_, Estimate::Inconclusive) => None,
        _ => Some(false),
    };
    let status = if formula.is_some() {
        Status::Ok
    } else {
        Status::Inconclusive
    };
    let summary = format!(
        "ends {}, dim H^1 {}, ends = dim + 1 {} (window {window}, {})",
        estimate_text(ends.verdict),
        estimate_text(dim.verdict),
        match formula {
            Some(true) => "holds",
            Some(false) => "fails",
            None => "undecided",
        },
        family_text(&f)
    );
    let ranks: Vec<u64> = dim.ranks.iter().map(|r| r.1).collect();
    Ok(Outcome {
        status,
        schedules,
        summary,
        result: json!({
            "ends": ends,
            "cohomology_degree_1": { "ranks": ranks, "verdict": dim.verdict },
            "formula_holds": formula,
        }),
    })
}

fn run_separate(sc: &Scenario, r: u32, a: u32, collar: u32, windows: &Option<Vec<u32>>) -> Result<Outcome> {
    let top = sc.space.window();
    let mut ws: Vec<u32> = windows
        .clone()
        .unwrap_or_else(|| [top.saturating_sub(4), top.saturating_sub(2), top].to_vec());
    ws.retain(|&w| w > 0);
    ws.sort_unstable();
    ws.dedup();
    let params = ComponentParams::new(r, a, collar)?;
    let builts: Vec<Built> = ws
        .iter()
        .map(|&w| build(&sc.space, sc.w.as_ref(), w, &sc.caps))
        .collect::<Result<_>>()?;
    let inputs: Vec<SeparationInput<'_>> = builts
        .iter()
        .map(|bt| -> Result<SeparationInput<'_>> {
            Ok(SeparationInput {
                space: Arc::clone(&bt.space),
                w: bt.w()?.clone(),
                action: match (&bt.ball, &bt.gens) {
                    (Some(ball), Some(g)) => Some((ball, g.clone())),
                    _ => None,
                },
            })
        })
        .collect::<Result<_>>()?;
    let report = coarse_n_separation(&inputs, params)?;
    let last = builts.last().expect("at least one window");
    let set = complement_components(&last.space, last.w()?, params)?;
    let grid: Vec<u32> = (0..=top).collect();
    let shallow = shallow_bound_check(&set, &grid);
    let list: Vec<String> = ws.iter().map(u32::to_string).collect();
    let (status, head) = match report.verdict {
        Estimate::Finite(k) => (Status::Ok, format!("{k} deep components, stable")),
        Estimate::Growing => (Status::Ok, "deep component count growing".to_string()),
        Estimate::Inconclusive => (Status::Inconclusive, "deep component count inconclusive".to_string()),
    };
    let counts: Vec<String> = report.windows.iter().map(|w| w.deep.to_string()).collect();
    let summary = format!(
        "{head} (windows {}; counts {}; r={r}, A={a}, c={collar})",
        list.join(", "),
        counts.join(", ")
    );
    Ok(Outcome {
        status,
        schedules: Vec::new(),
        summary,
        result: json!({
            "separation": report,
            "components": set,
            "shallow_bound": shallow,
        }),
    })
}

fn run_mv(b: &Built, component: &str, params: MvParams) -> Result<Outcome> {
    let cp = ComponentParams::new(params.r, params.a, params.collar)?;
    let c1 = b.component(component, cp)?;
    let data = MvData::build(&b.space, b.w()?, &c1, params)?;
    let k = params.degree - 1;
    let reps = {
        let cc = data.cochains()?;
        cc[3].cohomology(k)?.representatives
    };
    let classes: Vec<_> = reps.into_iter().take(8).map(|v| (k, v)).collect();
    let report = mv_report(&data, &classes)?;
    let localized = classes
        .iter()
        .map(|(k, v)| localized_boundary_support(&data, *k, v))
        .collect::<Result<Vec<_>>>()?;
    let nonzero = report.classes.iter().filter(|c| c.nonzero).count();
    let exact = report.exactness.iter().filter(|s| s.holds).count();
    let head = if classes.is_empty() {
        format!("no degree-{k} classes on N_A(W)")
    } else if nonzero > 0 {
        format!("δ̃ nonzero on {nonzero} of {} classes", classes.len())
    } else {
        format!("δ̃ zero on all {} classes", classes.len())
    };
    let summary = format!(
        "{head}; short exact {}; exactness holds at {exact} of {} spots (window {}, r={}, A={}, c={})",
        report.short_exact,
        report.exactness.len(),
        report.window,
        params.r,
        params.a,
        params.collar
    );
    Ok(Outcome {
        status: Status::Ok,
        schedules: Vec::new(),
        summary,
        result: json!({ "mv": report, "localized": localized }),
    })
}

#[allow(clippy::too_many_arguments)]
fn run_mobility(
    b: &Built,
    window: u32,
    n: usize,
    r: u32,
    collar: u32,
    ds: &[u32],
    class: &Option<ClassSpec>,
    family: &Option<Family>,
    stabilizer: bool,
) -> Result<Outcome> {
    let complex = build_rips(&b.space, &b.space.universe(), r, n + 1)?;
    let cc = RelativeCochains::new(&complex, &b.space.universe(), collar)?;
    let n_pts = b.space.len();
    let mut schedules = Vec::new();
    let alpha = match class.as_ref().unwrap_or(&ClassSpec::AtInfinity) {
        ClassSpec::AtInfinity => {
            let f = family
                .clone()
                .unwrap_or_else(|| Family::mobility_default(window, r, collar));
            schedules = f.schedules(window)?;
            class_at_infinity(&cc, n, &schedules[0])?
        }
        ClassSpec::Prefix { word } => {
            let ball = b.ball()?;
            let Element::Free(prefix) = ball.model.parse_word(word)? else {
                return Err(Error::InvalidParameter("prefix classes need a free group".into()));
            };
            let side = SubsetMask::from_predicate(
                n_pts,
                |i| matches!(ball.element(i), Element::Free(v) if v.starts_with(&prefix)),
            );
            Some(indicator_coboundary(&cc, &side)?)
        }
        ClassSpec::HalfSpace { axis, at } => {
            let ball = b.ball()?;
            let side = SubsetMask::from_predicate(
                n_pts,
                |i| matches!(ball.element(i), Element::Abelian(v) if v[*axis] >= *at),
            );
            Some(indicator_coboundary(&cc, &side)?)
        }
    };
    let Some(alpha) = alpha else {
        return Ok(Outcome {
            status: Status::Inconclusive,
            schedules,
            summary: format!("no class at infinity survives (window {window}, r={r})"),
            result: Value::Null,
        });
    };
    let det = coarse_manifold_detector(&cc, n, &alpha, ds)?;
    let covered: Vec<String> = det
        .steps
        .iter()
        .filter(|s| s.covered)
        .map(|s| s.d.to_string())
        .collect();
    let dlist: Vec<String> = ds.iter().map(u32::to_string).collect();
    let mut summary = if det.detected {
        format!(
            "detector true at D = {} (window {window}, r={r}, n={n})",
            covered.join(", ")
        )
    } else {
        format!(
            "detector false for D in {{{}}} (window {window}, r={r}, n={n})",
            dlist.join(",")
        )
    };
    let mut stab = Value::Null;
    if stabilizer {
        if let Some(ball) = &b.ball {
            let dmax = *ds.iter().max().expect("validated non-empty");
            let mob = mobility_set(&cc, n, &alpha, dmax, None)?;
            let cmp = stab_mob_comparison(ball, &cc, n, &alpha, &mob)?;
            summary.push_str(&format!(
                "; Hausdorff(Stab orbit, Mob) at D={dmax}: {}, replayed R: {}",
                cmp.hausdorff.map_or("undefined".into(), |h| h.to_string()),
                cmp.replay_radius.map_or("undefined".into(), |h| h.to_string()),
            ));
            stab = json!({
                "d": dmax,
                "stabilizer": cmp.stabilizer,
                "undetermined": cmp.undetermined.count(),
                "orbit": cmp.orbit,
                "comparable_orbit": cmp.comparable_orbit,
                "mobility": cmp.extended_mobility,
                "hausdorff": cmp.hausdorff,
                "replay_radius": cmp.replay_radius,
                "within_replay": cmp.within_replay,
            });
        }
    }
    Ok(Outcome {
        status: Status::Ok,
        schedules,
        summary,
        result: json!({
            "class_support": complex.support(n, &alpha),
            "detector": det,
            "stabilizer": stab,
        }),
    })
}

#[allow(clippy::too_many_arguments)]
fn run_acyclicity(
    b: &Built,
    window: u32,
    k_max: usize,
    centers: &Option<Vec<Center>>,
    inner_scales: &Option<Vec<u32>>,
    radii: &Option<Vec<u32>>,
    lambda_slack: Option<u32>,
    mu_slack: Option<u32>,
) -> Result<Outcome> {
    let pts: Vec<PointId> = match centers {
        Some(cs) => cs
            .iter()
            .map(|c| point_of(&b.space, b.ball.as_ref(), c))
            .collect::<Result<_>>()?,
        None => vec![b
            .space
            .origin()
            .ok_or_else(|| Error::InvalidParameter("the space has no origin".into()))?],
    };
    let scales = inner_scales.clone().unwrap_or_else(|| vec![1]);
    let radii = radii.clone().unwrap_or_else(|| vec![1, 2, 3]);
    let mut bounds = AcyclicityBounds::default();
    if let Some(l) = lambda_slack {
        bounds.lambda_slack = l;
    }
    if let Some(m) = mu_slack {
        bounds.mu_slack = m;
    }
    let prof = uniform_acyclicity_probe(&b.space, k_max, &pts, &scales, &radii, bounds)?;
    let lambda: Vec<Value> = prof
        .lambda
        .iter()
        .map(|(&(k, i), l)| json!({ "degree": k, "inner_scale": i, "lambda": l }))
        .collect();
    let parts: Vec<String> = prof
        .lambda
        .iter()
        .map(|(&(k, i), l)| match l {
            Some(l) => format!("λ(k={k}, i={i}) = {l}"),
            None => format!("λ(k={k}, i={i}) not found"),
        })
        .collect();
    let labels: Vec<String> = pts
        .iter()
        .map(|&p| match b.space.label(p) {
            Some(Label::Element(s)) => s.clone(),
            Some(Label::Lattice(c)) => format!("{c:?}"),
            _ => p.to_string(),
        })
        .collect();
    Ok(Outcome {
        status: Status::Ok,
        schedules: Vec::new(),
        summary: format!(
            "{} (window {window}, centers {}, failures {})",
            parts.join("; "),
            labels.join(" "),
            prof.failures().count()
        ),
        result: json!({
            "bounds": prof.bounds,
            "entries": prof.entries,
            "lambda": lambda,
        }),
    })
}

fn run_one(sc: &Scenario, built: &Result<Built>, a: &Analysis) -> Result<Outcome> {
    let b = built.as_ref().map_err(Clone::clone)?;
    let window = sc.space.window();
    match a {
        Analysis::Ends { family } => run_ends(b, window, family),
        Analysis::Separate { r, a, collar, windows } => run_separate(sc, *r, *a, *collar, windows),
        Analysis::Essential {
            component,
            n,
            family,
            split,
        } => {
            let f = family.clone().unwrap_or_else(Family::essential_default);
            let schedules = f.schedules(window)?;
            let c = b.component(component, ComponentParams::new(split.r, split.a, split.collar)?)?;
            let v = essential_probe(&b.space, b.w()?, &c, component, *n, &schedules)?;
            let text = match v.verdict {
                Essentiality::Essential => "essential",
                Essentiality::NonEssential => "non-essential",
                Essentiality::Inconclusive => "inconclusive",
            };
            let mut summary = format!(
                "component {component}: {text} (window {window}, n={n}, {})",
                family_text(&f)
            );
            if let Some(reason) = &v.reason {
                summary.push_str(&format!("; {reason}"));
            }
            Ok(Outcome {
                status: if v.verdict == Essentiality::Inconclusive {
                    Status::Inconclusive
                } else {
                    Status::Ok
                },
                schedules,
                summary,
                result: to_value(&v),
            })
        }
        Analysis::AlmostEssential {
            component,
            a,
            collar,
            grid,
            split,
        } => {
            let c = b.component(component, ComponentParams::new(split.r, split.a, split.collar)?)?;
            let grid = grid.clone().unwrap_or_else(|| default_b_grid(window, *collar));
            let rep = almost_essential_probe(&b.space, b.w()?, &c, *a, &grid, *collar)?;
            let text = match rep.result {
                AlmostEssential::Bound(bb) => format!("B = {bb}"),
                AlmostEssential::FailsAtWindow => "fails at this window".into(),
            };
            Ok(Outcome {
                status: Status::Ok,
                schedules: Vec::new(),
                summary: format!("component {component}: {text} (window {window}, A={a}, c={collar})"),
                result: to_value(&rep),
            })
        }
        Analysis::Mv {
            component,
            r,
            a,
            collar,
            degree,
        } => run_mv(
            b,
            component,
            MvParams {
                r: *r,
                a: *a,
                collar: *collar,
                degree: *degree,
            },
        ),
        Analysis::Mobility {
            n,
            r,
            collar,
            d,
            class,
            family,
            stabilizer,
        } => run_mobility(b, window, *n, *r, *collar, d, class, family, *stabilizer),
        Analysis::Acyclicity {
            k_max,
            centers,
            inner_scales,
            radii,
            lambda_slack,
            mu_slack,
        } => run_acyclicity(
            b,
            window,
            *k_max,
            centers,
            inner_scales,
            radii,
            *lambda_slack,
            *mu_slack,
        ),
        Analysis::PdSignature {
            component,
            n,
            family,
            split,
        } => {
            let f = family.clone().unwrap_or_else(Family::essential_default);
            let schedules = f.schedules(window)?;
            let region = match component {
                Some(c) => b
                    .component(c, ComponentParams::new(split.r, split.a, split.collar)?)?
                    .union(b.w()?),
                None => b.space.universe(),
            };
            let sig = pd_signature_check(&b.space, &region, *n, &schedules)?;
            let (status, text) = match sig.verdict {
                PdVerdict::Pass => (Status::Ok, "pass".to_string()),
                PdVerdict::Fail(k) => (Status::Ok, format!("fails in degree {k}")),
                PdVerdict::Inconclusive => (Status::Inconclusive, "inconclusive".to_string()),
            };
            let on = component
                .as_deref()
                .map_or("the window".to_string(), |c| format!("{c} with W"));
            Ok(Outcome {
                status,
                schedules,
                summary: format!(
                    "PD({n}) signature on {on}: {text} (window {window}, {})",
                    family_text(&f)
                ),
                result: to_value(&sig),
            })
        }
        Analysis::AlmostInvariant {
            component,
            r,
            a,
            collar,
        } => {
            let params = ComponentParams::new(*r, *a, *collar)?;
            let ball = b.ball()?;
            let h = b.w()?;
            let c = b.component(component, params)?;
            let st = stabilizer_trace(ball, h, &c, params)?;
            let ai = almost_invariant_extract(ball, h, &c, params)?;
            Ok(Outcome {
                status: Status::Ok,
                schedules: Vec::new(),
                summary: format!(
                    "X̂ {} (invariant {}, agrees outside N_A(H) {}, deep {}, complement deep {}); stabilizer trace at distance {} from H (window {window}, r={r}, A={a}, c={collar})",
                    ai.status, ai.right_invariant, ai.agrees_outside, ai.deep, ai.complement_deep, st.distance_to_h
                ),
                result: json!({ "stabilizer": st, "extract": ai }),
            })
        }
    }
}

fn describe_space(spec: &SpaceSpec) -> String {
    match spec {
        SpaceSpec::Group { group, .. } => format!("ball in {}", group.model().name()),
        SpaceSpec::Fixture { name, .. } => format!("fixture {name}"),
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    pub threads: Option<usize>,
    pub seed: u64,
}

/// Runs every analysis. The seed only permutes the order in which analyses
/// are started; the report is assembled in declaration order.
pub fn run_scenario(sc: &Scenario, opts: RunOptions) -> Report {
    let old_cap = set_simplex_cap(sc.caps.max_simplices.unwrap_or(DEFAULT_SIMPLEX_CAP));
    let start = Instant::now();
    let budget = sc.caps.time_budget_secs.map(Duration::from_secs);
    let window = sc.space.window();
    let built = build(&sc.space, sc.w.as_ref(), window, &sc.caps);
    let mut order: Vec<usize> = (0..sc.analyses.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(opts.seed));
    let mut reports = par::with_threads(opts.threads, || {
        par::map(&order, |&i| {
            let a = &sc.analyses[i];
            let res = match budget {
                Some(bud) if start.elapsed() > bud => Err(Error::InvalidParameter(format!(
                    "time-budget-exceeded: {}s elapsed before this analysis started",
                    bud.as_secs()
                ))),
                _ => run_one(sc, &built, a),
            };
            match res {
                Ok(o) => AnalysisReport {
                    index: i,
                    kind: a.kind().into(),
                    status: o.status,
                    window,
                    schedules: o.schedules,
                    parameters: a.clone(),
                    summary: o.summary,
                    error: None,
                    result: o.result,
                },
                Err(e) => AnalysisReport {
                    index: i,
                    kind: a.kind().into(),
                    status: Status::Error,
                    window,
                    schedules: Vec::new(),
                    parameters: a.clone(),
                    summary: format!("error at window {window}: {e}"),
                    error: Some(e.to_string()),
                    result: Value::Null,
                },
            }
        })
    });
    reports.sort_by_key(|r| r.index);
    set_simplex_cap(old_cap);
    let (points, w_points) = match &built {
        Ok(b) => (Some(b.space.len()), b.w.as_ref().map(SubsetMask::count)),
        Err(_) => (None, None),
    };
    Report {
        schema: SCHEMA,
        scenario: sc.name.clone(),
        space: SpaceInfo {
            description: describe_space(&sc.space),
            window,
            points,
            w_points,
        },
        caps: sc.caps.clone(),
        analyses: reports,
    }
}

/// Parses, validates and runs scenario text.
pub fn run_text(text: &str, opts: RunOptions) -> std::result::Result<Report, crate::scenario::ScenarioError> {
    let sc = crate::scenario::parse(text)?;
    Ok(run_scenario(&sc, opts))
}
