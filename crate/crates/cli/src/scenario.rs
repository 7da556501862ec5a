//! Scenario files: the space, the subset `W`, the analyses and the caps.

use serde::{Deserialize, Serialize};

use coarsesep::fixtures::{grid_fixture, FIXTURES};
use coarsesep::groups::{GroupModel, SubgroupSpec};
use coarsesep::homology::WindowSchedule;

pub const SCHEMA: u32 = 1;

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema: u32,
    #[serde(default)]
    pub name: String,
    pub space: SpaceSpec,
    #[serde(default)]
    pub w: Option<WSpec>,
    pub analyses: Vec<Analysis>,
    #[serde(default)]
    pub caps: Caps,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SpaceSpec {
    Group { group: GroupSpec, radius: u32 },
    Fixture { name: String, window: u32 },
}

impl SpaceSpec {
    pub fn window(&self) -> u32 {
        match self {
            SpaceSpec::Group { radius, .. } => *radius,
            SpaceSpec::Fixture { window, .. } => *window,
        }
    }

    pub fn model(&self) -> Option<GroupModel> {
        match self {
            SpaceSpec::Group { group, .. } => Some(group.model()),
            SpaceSpec::Fixture { .. } => None,
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GroupSpec {
    FreeAbelian(usize),
    Free(usize),
    DirectProduct(Vec<GroupSpec>),
    FreeProduct(Vec<GroupSpec>),
    Amalgam,
    Lamplighter,
}

impl GroupSpec {
    pub fn model(&self) -> GroupModel {
        match self {
            GroupSpec::FreeAbelian(n) => GroupModel::FreeAbelian(*n),
            GroupSpec::Free(k) => GroupModel::Free(*k),
            GroupSpec::DirectProduct(fs) => GroupModel::DirectProduct(fs.iter().map(Self::model).collect()),
            GroupSpec::FreeProduct(fs) => GroupModel::FreeProduct(fs.iter().map(Self::model).collect()),
            GroupSpec::Amalgam => GroupModel::Amalgam,
            GroupSpec::Lamplighter => GroupModel::Lamplighter,
        }
    }

    fn check(&self) -> Result<(), String> {
        match self {
            GroupSpec::FreeAbelian(0) | GroupSpec::Free(0) => Err("rank must be at least 1".into()),
            GroupSpec::DirectProduct(fs) | GroupSpec::FreeProduct(fs) => {
                if fs.len() < 2 {
                    return Err("a product needs at least two factors".into());
                }
                fs.iter().try_for_each(Self::check)
            }
            _ => Ok(()),
        }
    }
}

/// The subset `W`.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum WSpec {
    /// The fixture's own `W`.
    Fixture,
    Axis {
        index: usize,
    },
    Sublattice {
        k: i64,
    },
    Factor {
        index: usize,
    },
    Words {
        words: Vec<String>,
    },
    /// A single point, given as a word (`""` or `"1"` is the identity) or
    /// as lattice coordinates.
    Point {
        at: Center,
    },
}

impl WSpec {
    pub fn subgroup(&self) -> Option<SubgroupSpec> {
        match self {
            WSpec::Axis { index } => Some(SubgroupSpec::Axis(*index)),
            WSpec::Sublattice { k } => Some(SubgroupSpec::Sublattice(*k)),
            WSpec::Factor { index } => Some(SubgroupSpec::Factor(*index)),
            WSpec::Words { words } => Some(SubgroupSpec::Words(words.clone())),
            WSpec::Fixture | WSpec::Point { .. } => None,
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(untagged)]
pub enum Center {
    Word(String),
    Coords(Vec<i32>),
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Caps {
    #[serde(default)]
    pub max_vertices: Option<u64>,
    #[serde(default)]
    pub max_simplices: Option<u64>,
    /// Checked before each analysis starts; a running analysis is never
    /// interrupted.
    #[serde(default)]
    pub time_budget_secs: Option<u64>,
}

/// Schedules `S ∈ radii`, `i`, `S' = S - j`, `j`, at collar `c`.
#[derive(Clone, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct Family {
    pub radii: Vec<u32>,
    pub i: u32,
    pub j: u32,
    pub collar: u32,
}

impl Family {
    pub fn schedules(&self, window: u32) -> coarsesep::Result<Vec<WindowSchedule>> {
        if self.radii.is_empty() {
            return Err(coarsesep::Error::InvalidParameter("empty radius list".into()));
        }
        WindowSchedule::family(window, self.collar, &self.radii, self.i, self.j)
    }

    /// `S₀ = max(1, R/4)`, radii `S₀, S₀+1, S₀+2`, scales 1 and 1, collar 1.
    pub fn ends_default(window: u32) -> Self {
        let s0 = (window / 4).max(1);
        Self {
            radii: vec![s0, s0 + 1, s0 + 2],
            i: 1,
            j: 1,
            collar: 1,
        }
    }

    pub fn essential_default() -> Self {
        Self {
            radii: vec![4, 5, 6],
            i: 1,
            j: 2,
            collar: 2,
        }
    }

    /// One schedule bracketing scale `r`: `S = max(r, (R - c)/2 - 1)`.
    pub fn mobility_default(window: u32, r: u32, collar: u32) -> Self {
        let s = r.max((window.saturating_sub(collar) / 2).saturating_sub(1));
        Self {
            radii: vec![s],
            i: r,
            j: r,
            collar,
        }
    }
}

/// Split parameters used to resolve `deep-<i>` component references.
#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct Split {
    pub r: u32,
    pub a: u32,
    pub collar: u32,
}

impl Default for Split {
    fn default() -> Self {
        Self { r: 1, a: 1, collar: 1 }
    }
}

fn one() -> u32 {
    1
}
fn two() -> u32 {
    2
}
fn one_k() -> usize {
    1
}
fn two_k() -> usize {
    2
}
fn yes() -> bool {
    true
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ClassSpec {
    /// Dual of the first surviving class at infinity of the schedule.
    AtInfinity,
    /// `δ` of the indicator of the words beginning with `word`.
    Prefix { word: String },
    /// `δ` of the indicator of `{x : x_axis >= at}` in `Z^n`.
    HalfSpace { axis: usize, at: i64 },
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Analysis {
    Ends {
        #[serde(default)]
        family: Option<Family>,
    },
    Separate {
        #[serde(default = "one")]
        r: u32,
        #[serde(default = "one")]
        a: u32,
        #[serde(default = "one")]
        collar: u32,
        /// Defaults to `R-4, R-2, R` (those that are positive).
        #[serde(default)]
        windows: Option<Vec<u32>>,
    },
    Essential {
        component: String,
        #[serde(default = "one_k")]
        n: usize,
        #[serde(default)]
        family: Option<Family>,
        #[serde(default)]
        split: Split,
    },
    AlmostEssential {
        component: String,
        #[serde(default)]
        a: u32,
        #[serde(default = "two")]
        collar: u32,
        #[serde(default)]
        grid: Option<Vec<u32>>,
        #[serde(default)]
        split: Split,
    },
    Mv {
        component: String,
        #[serde(default = "two")]
        r: u32,
        #[serde(default = "one")]
        a: u32,
        #[serde(default = "one")]
        collar: u32,
        #[serde(default = "two_k")]
        degree: usize,
    },
    Mobility {
        #[serde(default = "one_k")]
        n: usize,
        #[serde(default = "one")]
        r: u32,
        #[serde(default = "one")]
        collar: u32,
        d: Vec<u32>,
        #[serde(default)]
        class: Option<ClassSpec>,
        #[serde(default)]
        family: Option<Family>,
        #[serde(default = "yes")]
        stabilizer: bool,
    },
    Acyclicity {
        #[serde(default = "one_k")]
        k_max: usize,
        #[serde(default)]
        centers: Option<Vec<Center>>,
        #[serde(default)]
        inner_scales: Option<Vec<u32>>,
        #[serde(default)]
        radii: Option<Vec<u32>>,
        #[serde(default)]
        lambda_slack: Option<u32>,
        #[serde(default)]
        mu_slack: Option<u32>,
    },
    PdSignature {
        #[serde(default)]
        component: Option<String>,
        n: usize,
        #[serde(default)]
        family: Option<Family>,
        #[serde(default)]
        split: Split,
    },
    AlmostInvariant {
        component: String,
        #[serde(default = "one")]
        r: u32,
        #[serde(default = "one")]
        a: u32,
        #[serde(default = "one")]
        collar: u32,
    },
}

pub const ANALYSES: &[&str] = &[
    "ends",
    "separate",
    "essential",
    "almost-essential",
    "mv",
    "mobility",
    "acyclicity",
    "pd-signature",
    "almost-invariant",
];

impl Analysis {
    pub fn kind(&self) -> &'static str {
        match self {
            Analysis::Ends { .. } => "ends",
            Analysis::Separate { .. } => "separate",
            Analysis::Essential { .. } => "essential",
            Analysis::AlmostEssential { .. } => "almost-essential",
            Analysis::Mv { .. } => "mv",
            Analysis::Mobility { .. } => "mobility",
            Analysis::Acyclicity { .. } => "acyclicity",
            Analysis::PdSignature { .. } => "pd-signature",
            Analysis::AlmostInvariant { .. } => "almost-invariant",
        }
    }

    fn needs_w(&self) -> bool {
        !matches!(self, Analysis::Ends { .. } | Analysis::Acyclicity { .. })
            && !matches!(self, Analysis::PdSignature { component: None, .. })
            && !matches!(self, Analysis::Mobility { .. })
    }
}

/// A scenario error, anchored to a line of the scenario file when one is
/// known.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScenarioError {
    pub line: Option<usize>,
    pub message: String,
}

impl std::fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

impl std::error::Error for ScenarioError {}

/// Parses and validates a scenario.
pub fn parse(text: &str) -> Result<Scenario, ScenarioError> {
    let scenario: Scenario = serde_json::from_str(text).map_err(|e| ScenarioError {
        line: Some(e.line()),
        message: e.to_string(),
    })?;
    validate(&scenario, text)?;
    Ok(scenario)
}

/// Line of the `idx`-th `"kind"` key after the `"analyses"` key.
fn analysis_line(text: &str, idx: usize) -> Option<usize> {
    let start = text.find("\"analyses\"")?;
    let (off, _) = text[start..].match_indices("\"kind\"").nth(idx)?;
    Some(text[..start + off].lines().count().max(1))
}

fn key_line(text: &str, key: &str) -> Option<usize> {
    let off = text.find(&format!("\"{key}\""))?;
    Some(text[..off].lines().count().max(1))
}

fn fixture_components(name: &str) -> Result<Vec<String>, String> {
    let f = grid_fixture(name, 6).map_err(|e| e.to_string())?;
    Ok(f.components.keys().cloned().collect())
}

fn check_component(space: &SpaceSpec, c: &str) -> Result<(), String> {
    if let Some(i) = c.strip_prefix("deep-") {
        return i
            .parse::<usize>()
            .map(|_| ())
            .map_err(|_| format!("bad component reference '{c}'"));
    }
    match space {
        SpaceSpec::Fixture { name, .. } => {
            let names = fixture_components(name)?;
            if names.iter().any(|n| n == c) {
                Ok(())
            } else {
                Err(format!(
                    "fixture {name} has no component '{c}' (has {})",
                    names.join(", ")
                ))
            }
        }
        SpaceSpec::Group { .. } => Err(format!("component '{c}' must be written deep-<i> on a group space")),
    }
}

fn check_word(model: &GroupModel, w: &str) -> Result<(), String> {
    if is_identity_word(w) {
        return Ok(());
    }
    model.parse_word(w).map(|_| ()).map_err(|e| e.to_string())
}

pub fn is_identity_word(w: &str) -> bool {
    let t = w.trim();
    t.is_empty() || t == "1"
}

fn check_center(space: &SpaceSpec, c: &Center) -> Result<(), String> {
    match (space, c) {
        (SpaceSpec::Group { group, .. }, Center::Word(w)) => check_word(&group.model(), w),
        (SpaceSpec::Fixture { name, .. }, Center::Coords(v)) => {
            let dim = if name == "fig2_plane_fin" || name == "plane_in_space" {
                3
            } else {
                2
            };
            if v.len() != dim {
                return Err(format!("fixture {name} needs {dim} coordinates"));
            }
            Ok(())
        }
        (SpaceSpec::Group { .. }, Center::Coords(_)) => Err("group points are given as words".into()),
        (SpaceSpec::Fixture { .. }, Center::Word(_)) => Err("fixture points are given as coordinates".into()),
    }
}

fn positive(name: &str, v: u32) -> Result<(), String> {
    if v == 0 {
        Err(format!("{name} must be at least 1"))
    } else {
        Ok(())
    }
}

fn check_family(f: &Family, window: u32) -> Result<(), String> {
    f.schedules(window).map(|_| ()).map_err(|e| e.to_string())
}

fn check_analysis(sc: &Scenario, a: &Analysis) -> Result<(), String> {
    let window = sc.space.window();
    let model = sc.space.model();
    if a.needs_w() && sc.w.is_none() && matches!(sc.space, SpaceSpec::Group { .. }) {
        return Err(format!("{} needs a subset w", a.kind()));
    }
    match a {
        Analysis::Ends { family } => {
            let f = family.clone().unwrap_or_else(|| Family::ends_default(window));
            check_family(&f, window)
        }
        Analysis::Separate { r, windows, .. } => {
            positive("r", *r)?;
            if let Some(ws) = windows {
                if ws.is_empty() || ws.iter().any(|&x| x == 0 || x > window) {
                    return Err(format!("windows must lie in 1..={window}"));
                }
            }
            Ok(())
        }
        Analysis::Essential {
            component,
            n,
            family,
            split,
        } => {
            check_component(&sc.space, component)?;
            positive("split.r", split.r)?;
            if *n == 0 {
                return Err("n must be at least 1".into());
            }
            check_family(&family.clone().unwrap_or_else(Family::essential_default), window)
        }
        Analysis::AlmostEssential { component, split, .. } => {
            positive("split.r", split.r)?;
            check_component(&sc.space, component)
        }
        Analysis::Mv {
            component, r, degree, ..
        } => {
            positive("r", *r)?;
            if *degree == 0 {
                return Err("degree must be at least 1".into());
            }
            check_component(&sc.space, component)
        }
        Analysis::Mobility {
            n,
            r,
            collar,
            d,
            class,
            family,
            ..
        } => {
            positive("r", *r)?;
            if *n == 0 {
                return Err("n must be at least 1".into());
            }
            if d.is_empty() {
                return Err("the D schedule is empty".into());
            }
            match class.as_ref().unwrap_or(&ClassSpec::AtInfinity) {
                ClassSpec::AtInfinity => {
                    let f = family
                        .clone()
                        .unwrap_or_else(|| Family::mobility_default(window, *r, *collar));
                    check_family(&f, window)?;
                    if f.i > *r || f.j < *r {
                        return Err(format!("schedule scales {}..{} must bracket r = {r}", f.i, f.j));
                    }
                    if f.collar != *collar {
                        return Err("schedule collar differs from the analysis collar".into());
                    }
                    Ok(())
                }
                ClassSpec::Prefix { word } => match &model {
                    Some(m @ GroupModel::Free(_)) if *n == 1 => check_word(m, word),
                    _ => Err("prefix classes need a free group and n = 1".into()),
                },
                ClassSpec::HalfSpace { axis, .. } => match &model {
                    Some(GroupModel::FreeAbelian(k)) if axis < k && *n == 1 => Ok(()),
                    _ => Err("half-space classes need Z^n, an axis below n and n = 1".into()),
                },
            }
        }
        Analysis::Acyclicity {
            centers,
            inner_scales,
            radii,
            ..
        } => {
            for c in centers.iter().flatten() {
                check_center(&sc.space, c)?;
            }
            if inner_scales.as_ref().is_some_and(|v| v.is_empty() || v.contains(&0)) {
                return Err("inner scales must be non-empty and positive".into());
            }
            if radii.as_ref().is_some_and(|v| v.is_empty()) {
                return Err("radii must be non-empty".into());
            }
            Ok(())
        }
        Analysis::PdSignature {
            component, n, family, ..
        } => {
            if let Some(c) = component {
                check_component(&sc.space, c)?;
            }
            if *n == 0 {
                return Err("n must be at least 1".into());
            }
            check_family(&family.clone().unwrap_or_else(Family::essential_default), window)
        }
        Analysis::AlmostInvariant { component, r, .. } => {
            positive("r", *r)?;
            match sc.w.as_ref().and_then(WSpec::subgroup) {
                Some(_) if model.is_some() => check_component(&sc.space, component),
                _ => Err("almost-invariant needs a group space and a subgroup w".into()),
            }
        }
    }
}

/// Checks everything that can be checked without building the space.
pub fn validate(sc: &Scenario, text: &str) -> Result<(), ScenarioError> {
    let top = |key: &str, message: String| ScenarioError {
        line: key_line(text, key),
        message,
    };
    if sc.schema != SCHEMA {
        return Err(top(
            "schema",
            format!("unsupported schema {} (expected {SCHEMA})", sc.schema),
        ));
    }
    if sc.analyses.is_empty() {
        return Err(top("analyses", "no analyses".into()));
    }
    match &sc.space {
        SpaceSpec::Group { group, radius } => {
            group.check().map_err(|m| top("space", m))?;
            if *radius == 0 {
                return Err(top("space", "radius must be at least 1".into()));
            }
        }
        SpaceSpec::Fixture { name, window } => {
            if !FIXTURES.iter().any(|(n, _)| n == name) {
                return Err(top("space", format!("unknown fixture '{name}'")));
            }
            if *window == 0 {
                return Err(top("space", "window must be at least 1".into()));
            }
        }
    }
    if let Some(w) = &sc.w {
        let res = match (&sc.space, w) {
            (SpaceSpec::Fixture { .. }, WSpec::Fixture) => Ok(()),
            (SpaceSpec::Fixture { .. }, WSpec::Point { at }) => check_center(&sc.space, at),
            (SpaceSpec::Fixture { .. }, _) => Err("fixture spaces take w of kind fixture or point".into()),
            (SpaceSpec::Group { .. }, WSpec::Fixture) => Err("w of kind fixture needs a fixture space".into()),
            (SpaceSpec::Group { .. }, WSpec::Point { at }) => check_center(&sc.space, at),
            (SpaceSpec::Group { group, .. }, other) => other
                .subgroup()
                .expect("subgroup kinds")
                .generators(&group.model())
                .map(|_| ())
                .map_err(|e| e.to_string()),
        };
        res.map_err(|m| top("w", m))?;
    }
    for (i, a) in sc.analyses.iter().enumerate() {
        check_analysis(sc, a).map_err(|m| ScenarioError {
            line: analysis_line(text, i),
            message: format!("analysis {i} ({}): {m}", a.kind()),
        })?;
    }
    Ok(())
}
