//! Finitely generated groups with canonical normal forms, word-metric balls,
//! subgroup traces and partial left actions.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::sync::{Arc, Mutex};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::metric::{DistanceOracle, FiniteMetricSpace, Label, PointId, SubsetMask};

/// Default cap on the number of ball elements.
pub const DEFAULT_BALL_CAP: u64 = 2_000_000;

/// A group element in normal form.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Element {
    /// Coordinates in Z^n.
    Abelian(Vec<i64>),
    /// Freely reduced word; letter `±(i+1)` is generator `i` or its inverse.
    Free(Vec<i32>),
    /// One entry per factor.
    Product(Vec<Element>),
    /// Alternating syllables `(factor, non-identity element)`.
    FreeProduct(Vec<(usize, Element)>),
    /// `a^k · w` with `w` a reduced word in `b` (letter ±1) and `c` (±2);
    /// the amalgam is `Z × F(b, c)`.
    Amalgam(i64, Vec<i32>),
    /// Lamp configuration and cursor position.
    Lamplighter(BTreeSet<i64>, i64),
}

/// Supported group families with their standard generating sets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum GroupModel {
    FreeAbelian(usize),
    Free(usize),
    DirectProduct(Vec<GroupModel>),
    FreeProduct(Vec<GroupModel>),
    /// `Z² *_Z Z² = <a, b, c | [a,b], [a,c]>`, amalgamated along `<a>`.
    Amalgam,
    /// `Z₂ ≀ Z` with generators `a` (toggle) and `t` (shift).
    Lamplighter,
}

fn reduce_append(w: &mut Vec<i32>, tail: &[i32]) {
    for &l in tail {
        if w.last() == Some(&-l) {
            w.pop();
        } else {
            w.push(l);
        }
    }
}

fn free_inverse(w: &[i32]) -> Vec<i32> {
    w.iter().rev().map(|&l| -l).collect()
}

impl GroupModel {
    pub fn name(&self) -> String {
        match self {
            GroupModel::FreeAbelian(n) => format!("Z^{n}"),
            GroupModel::Free(k) => format!("F_{k}"),
            GroupModel::DirectProduct(fs) => fs.iter().map(|f| f.name()).collect::<Vec<_>>().join(" x "),
            GroupModel::FreeProduct(fs) => fs
                .iter()
                .map(|f| format!("({})", f.name()))
                .collect::<Vec<_>>()
                .join(" * "),
            GroupModel::Amalgam => "Z^2 *_Z Z^2".into(),
            GroupModel::Lamplighter => "Z_2 wr Z".into(),
        }
    }

    pub fn identity(&self) -> Element {
        match self {
            GroupModel::FreeAbelian(n) => Element::Abelian(vec![0; *n]),
            GroupModel::Free(_) => Element::Free(Vec::new()),
            GroupModel::DirectProduct(fs) => Element::Product(fs.iter().map(GroupModel::identity).collect()),
            GroupModel::FreeProduct(_) => Element::FreeProduct(Vec::new()),
            GroupModel::Amalgam => Element::Amalgam(0, Vec::new()),
            GroupModel::Lamplighter => Element::Lamplighter(BTreeSet::new(), 0),
        }
    }

    /// Generators, without inverses.
    pub fn generators(&self) -> Vec<Element> {
        match self {
            GroupModel::FreeAbelian(n) => (0..*n)
                .map(|i| {
                    let mut v = vec![0; *n];
                    v[i] = 1;
                    Element::Abelian(v)
                })
                .collect(),
            GroupModel::Free(k) => (1..=*k as i32).map(|i| Element::Free(vec![i])).collect(),
            GroupModel::DirectProduct(fs) => {
                let ids: Vec<Element> = fs.iter().map(GroupModel::identity).collect();
                fs.iter()
                    .enumerate()
                    .flat_map(|(i, f)| {
                        let ids = ids.clone();
                        f.generators().into_iter().map(move |g| {
                            let mut v = ids.clone();
                            v[i] = g;
                            Element::Product(v)
                        })
                    })
                    .collect()
            }
            GroupModel::FreeProduct(fs) => fs
                .iter()
                .enumerate()
                .flat_map(|(i, f)| {
                    f.generators()
                        .into_iter()
                        .map(move |g| Element::FreeProduct(vec![(i, g)]))
                })
                .collect(),
            GroupModel::Amalgam => vec![
                Element::Amalgam(1, Vec::new()),
                Element::Amalgam(0, vec![1]),
                Element::Amalgam(0, vec![2]),
            ],
            GroupModel::Lamplighter => vec![
                Element::Lamplighter(BTreeSet::from([0]), 0),
                Element::Lamplighter(BTreeSet::new(), 1),
            ],
        }
    }

    /// Generators together with their inverses, deduplicated, in a fixed order.
    pub fn symmetric_generators(&self) -> Vec<Element> {
        let mut out = Vec::new();
        for g in self.generators() {
            let gi = self.inverse(&g);
            if !out.contains(&g) {
                out.push(g.clone());
            }
            if !out.contains(&gi) {
                out.push(gi);
            }
        }
        out
    }

    pub fn multiply(&self, g: &Element, h: &Element) -> Element {
        match (self, g, h) {
            (GroupModel::FreeAbelian(_), Element::Abelian(x), Element::Abelian(y)) => {
                Element::Abelian(x.iter().zip(y).map(|(a, b)| a + b).collect())
            }
            (GroupModel::Free(_), Element::Free(x), Element::Free(y)) => {
                let mut w = x.clone();
                reduce_append(&mut w, y);
                Element::Free(w)
            }
            (GroupModel::DirectProduct(fs), Element::Product(x), Element::Product(y)) => Element::Product(
                fs.iter()
                    .zip(x.iter().zip(y))
                    .map(|(f, (a, b))| f.multiply(a, b))
                    .collect(),
            ),
            (GroupModel::FreeProduct(fs), Element::FreeProduct(x), Element::FreeProduct(y)) => {
                let mut out = x.clone();
                let mut rest = y.iter();
                for (fi, e) in rest.by_ref() {
                    match out.last() {
                        Some((lf, le)) if lf == fi => {
                            let prod = fs[*fi].multiply(le, e);
                            out.pop();
                            if prod != fs[*fi].identity() {
                                out.push((*fi, prod));
                                break;
                            }
                        }
                        _ => {
                            out.push((*fi, e.clone()));
                            break;
                        }
                    }
                }
                out.extend(rest.cloned());
                Element::FreeProduct(out)
            }
            (GroupModel::Amalgam, Element::Amalgam(k1, w1), Element::Amalgam(k2, w2)) => {
                let mut w = w1.clone();
                reduce_append(&mut w, w2);
                Element::Amalgam(k1 + k2, w)
            }
            (GroupModel::Lamplighter, Element::Lamplighter(l1, c1), Element::Lamplighter(l2, c2)) => {
                let shifted: BTreeSet<i64> = l2.iter().map(|p| p + c1).collect();
                let lamps = l1.symmetric_difference(&shifted).copied().collect();
                Element::Lamplighter(lamps, c1 + c2)
            }
            _ => panic!("element does not belong to {}", self.name()),
        }
    }

    pub fn inverse(&self, g: &Element) -> Element {
        match (self, g) {
            (GroupModel::FreeAbelian(_), Element::Abelian(x)) => Element::Abelian(x.iter().map(|a| -a).collect()),
            (GroupModel::Free(_), Element::Free(w)) => Element::Free(free_inverse(w)),
            (GroupModel::DirectProduct(fs), Element::Product(x)) => {
                Element::Product(fs.iter().zip(x).map(|(f, a)| f.inverse(a)).collect())
            }
            (GroupModel::FreeProduct(fs), Element::FreeProduct(x)) => {
                Element::FreeProduct(x.iter().rev().map(|(i, e)| (*i, fs[*i].inverse(e))).collect())
            }
            (GroupModel::Amalgam, Element::Amalgam(k, w)) => Element::Amalgam(-k, free_inverse(w)),
            (GroupModel::Lamplighter, Element::Lamplighter(l, c)) => {
                Element::Lamplighter(l.iter().map(|p| p - c).collect(), -c)
            }
            _ => panic!("element does not belong to {}", self.name()),
        }
    }

    /// Word length with respect to the standard generators, in closed form.
    pub fn word_length(&self, g: &Element) -> u64 {
        match (self, g) {
            (GroupModel::FreeAbelian(_), Element::Abelian(x)) => x.iter().map(|a| a.unsigned_abs()).sum(),
            (GroupModel::Free(_), Element::Free(w)) => w.len() as u64,
            (GroupModel::DirectProduct(fs), Element::Product(x)) => {
                fs.iter().zip(x).map(|(f, a)| f.word_length(a)).sum()
            }
            (GroupModel::FreeProduct(fs), Element::FreeProduct(x)) => {
                x.iter().map(|(i, e)| fs[*i].word_length(e)).sum()
            }
            (GroupModel::Amalgam, Element::Amalgam(k, w)) => k.unsigned_abs() + w.len() as u64,
            (GroupModel::Lamplighter, Element::Lamplighter(l, c)) => {
                let lo = l.iter().copied().chain([0, *c]).min().unwrap_or(0);
                let hi = l.iter().copied().chain([0, *c]).max().unwrap_or(0);
                let left_first = (0 - lo) + (hi - lo) + (hi - c);
                let right_first = hi + (hi - lo) + (c - lo);
                l.len() as u64 + left_first.min(right_first) as u64
            }
            _ => panic!("element does not belong to {}", self.name()),
        }
    }

    pub fn distance(&self, g: &Element, h: &Element) -> u64 {
        self.word_length(&self.multiply(&self.inverse(g), h))
    }

    /// `g^k` for any integer `k`.
    pub fn power(&self, g: &Element, k: i64) -> Element {
        let base = if k < 0 { self.inverse(g) } else { g.clone() };
        let mut out = self.identity();
        for _ in 0..k.unsigned_abs() {
            out = self.multiply(&out, &base);
        }
        out
    }

    /// Parses a word such as `a^2 b^-1 c` over the generators, named
    /// `a, b, c, ...` in order.
    pub fn parse_word(&self, text: &str) -> Result<Element> {
        let gens = self.generators();
        let mut out = self.identity();
        let chars: Vec<char> = text.chars().filter(|c| !c.is_whitespace()).collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            if !c.is_ascii_lowercase() {
                return Err(Error::BadSubgroupSpec(format!("unexpected '{c}' in word '{text}'")));
            }
            let idx = (c as u8 - b'a') as usize;
            let g = gens
                .get(idx)
                .ok_or_else(|| Error::BadSubgroupSpec(format!("generator '{c}' does not exist in {}", self.name())))?;
            i += 1;
            let mut exp = 1i64;
            if i < chars.len() && chars[i] == '^' {
                i += 1;
                let start = i;
                if i < chars.len() && chars[i] == '-' {
                    i += 1;
                }
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                exp = s
                    .parse()
                    .map_err(|_| Error::BadSubgroupSpec(format!("bad exponent '{s}' in word '{text}'")))?;
            }
            out = self.multiply(&out, &self.power(g, exp));
        }
        Ok(out)
    }

    /// Human-readable normal form.
    pub fn format(&self, g: &Element) -> String {
        fn letters(w: &[i32], names: &[char]) -> String {
            if w.is_empty() {
                return "e".into();
            }
            let mut parts: Vec<String> = Vec::new();
            let mut i = 0;
            while i < w.len() {
                let l = w[i];
                let mut j = i;
                while j < w.len() && w[j] == l {
                    j += 1;
                }
                let name = names[(l.unsigned_abs() - 1) as usize];
                let e = (j - i) as i64 * l.signum() as i64;
                parts.push(if e == 1 {
                    name.to_string()
                } else {
                    format!("{name}^{e}")
                });
                i = j;
            }
            parts.join(" ")
        }
        match (self, g) {
            (GroupModel::FreeAbelian(_), Element::Abelian(x)) => {
                let p: Vec<String> = x.iter().map(i64::to_string).collect();
                format!("({})", p.join(","))
            }
            (GroupModel::Free(_), Element::Free(w)) => {
                let names: Vec<char> = ('a'..='z').collect();
                letters(w, &names)
            }
            (GroupModel::DirectProduct(fs), Element::Product(x)) => {
                let p: Vec<String> = fs.iter().zip(x).map(|(f, a)| f.format(a)).collect();
                format!("[{}]", p.join(" ; "))
            }
            (GroupModel::FreeProduct(fs), Element::FreeProduct(x)) => {
                if x.is_empty() {
                    return "e".into();
                }
                x.iter()
                    .map(|(i, e)| format!("{}:{}", i, fs[*i].format(e)))
                    .collect::<Vec<_>>()
                    .join(" ")
            }
            (GroupModel::Amalgam, Element::Amalgam(k, w)) => {
                let tail = letters(w, &['b', 'c']);
                match (*k, w.is_empty()) {
                    (0, _) => tail,
                    (k, true) => format!("a^{k}"),
                    (k, false) => format!("a^{k} {tail}"),
                }
            }
            (GroupModel::Lamplighter, Element::Lamplighter(l, c)) => {
                let p: Vec<String> = l.iter().map(i64::to_string).collect();
                format!("{{{}}}@{}", p.join(","), c)
            }
            _ => panic!("element does not belong to {}", self.name()),
        }
    }

    /// Sphere sizes `|S_0|, ..., |S_R|`, saturating at `cap + 1`.
    pub fn sphere_sizes(&self, radius: u32, cap: u64) -> Vec<u64> {
        let r = radius as usize;
        let sat = |v: u128| v.min(u128::from(cap.saturating_add(1))) as u64;
        match self {
            GroupModel::FreeAbelian(n) => {
                // Points of L1 norm exactly s: sum_k 2^k C(n,k) C(s-1,k-1).
                let binom = |a: i64, b: i64| -> u128 {
                    if b < 0 || a < b {
                        return 0;
                    }
                    let mut v: u128 = 1;
                    for i in 0..b {
                        v = v * (a - i) as u128 / (i + 1) as u128;
                    }
                    v
                };
                (0..=r as i64)
                    .map(|s| {
                        if s == 0 {
                            return 1;
                        }
                        let total: u128 = (1..=*n as i64)
                            .map(|k| (1u128 << k) * binom(*n as i64, k) * binom(s - 1, k - 1))
                            .sum();
                        sat(total)
                    })
                    .collect()
            }
            GroupModel::Free(k) => (0..=r)
                .map(|s| {
                    if s == 0 {
                        1
                    } else {
                        let mut v: u128 = 2 * *k as u128;
                        for _ in 1..s {
                            v = (v * (2 * *k as u128 - 1)).min(cap as u128 + 1);
                        }
                        sat(v)
                    }
                })
                .collect(),
            GroupModel::DirectProduct(fs) => {
                let mut acc = vec![0u64; r + 1];
                acc[0] = 1;
                for f in fs {
                    let s = f.sphere_sizes(radius, cap);
                    let mut next = vec![0u64; r + 1];
                    for i in 0..=r {
                        for j in 0..=r - i {
                            next[i + j] = sat(next[i + j] as u128 + acc[i] as u128 * s[j] as u128);
                        }
                    }
                    acc = next;
                }
                acc
            }
            GroupModel::FreeProduct(fs) => {
                // 1/S(z) = sum_i 1/S_i(z) - (m - 1) for spherical growth series.
                let m = fs.len() as i128;
                let mut inv_sum = vec![0i128; r + 1];
                inv_sum[0] = -(m - 1);
                for f in fs {
                    let s: Vec<i128> = f.sphere_sizes(radius, cap).iter().map(|&v| v as i128).collect();
                    let inv = series_inverse(&s, r);
                    for i in 0..=r {
                        inv_sum[i] += inv[i];
                    }
                }
                series_inverse(&inv_sum, r)
                    .into_iter()
                    .map(|v| sat(v.max(0) as u128))
                    .collect()
            }
            GroupModel::Amalgam => GroupModel::DirectProduct(vec![GroupModel::FreeAbelian(1), GroupModel::Free(2)])
                .sphere_sizes(radius, cap),
            GroupModel::Lamplighter => {
                let mut sizes = vec![0u64; r + 1];
                let mut total = 0u64;
                let _ = enumerate_ball(self, radius, |_, len| {
                    sizes[len as usize] += 1;
                    total += 1;
                    total <= cap
                });
                sizes
            }
        }
    }

    /// Estimated number of elements of word length at most `radius`,
    /// saturating at `cap + 1`.
    pub fn ball_size(&self, radius: u32, cap: u64) -> u64 {
        self.sphere_sizes(radius, cap)
            .iter()
            .fold(0u64, |a, &b| a.saturating_add(b).min(cap.saturating_add(1)))
    }
}

fn series_inverse(s: &[i128], r: usize) -> Vec<i128> {
    let mut inv = vec![0i128; r + 1];
    let a0 = s[0];
    assert!(a0 == 1 || a0 == -1, "series must have a unit constant term");
    inv[0] = a0;
    for n in 1..=r {
        let mut acc = 0i128;
        for k in 1..=n {
            acc = acc.saturating_add(s.get(k).copied().unwrap_or(0).saturating_mul(inv[n - k]));
        }
        inv[n] = -acc * a0;
    }
    inv
}

/// BFS over the Cayley graph by right multiplication; calls `visit` with
/// each element and its length until it returns false. Returns the elements
/// in discovery order.
fn enumerate_ball(
    model: &GroupModel,
    radius: u32,
    mut visit: impl FnMut(&Element, u32) -> bool,
) -> Vec<(Element, u32)> {
    let gens = model.symmetric_generators();
    let id = model.identity();
    let mut seen: HashMap<Element, u32> = HashMap::new();
    seen.insert(id.clone(), 0);
    let mut order = vec![(id.clone(), 0)];
    if !visit(&id, 0) {
        return order;
    }
    let mut queue = VecDeque::from([(id, 0u32)]);
    while let Some((g, d)) = queue.pop_front() {
        if d == radius {
            continue;
        }
        for s in &gens {
            let h = model.multiply(&g, s);
            if !seen.contains_key(&h) {
                seen.insert(h.clone(), d + 1);
                if !visit(&h, d + 1) {
                    return order;
                }
                order.push((h.clone(), d + 1));
                queue.push_back((h, d + 1));
            }
        }
    }
    order
}

/// Elements of length at most `radius`, sorted by (length, normal form).
pub fn enumerate(model: &GroupModel, radius: u32) -> Vec<Element> {
    let mut all = enumerate_ball(model, radius, |_, _| true);
    all.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    all.into_iter().map(|(g, _)| g).collect()
}

struct WordMetric {
    model: GroupModel,
    radius: u32,
    elements: Arc<Vec<Element>>,
    index: Arc<HashMap<Element, PointId>>,
    small_balls: Mutex<HashMap<u32, Arc<Vec<Element>>>>,
}

impl WordMetric {
    fn small_ball(&self, r: u32) -> Arc<Vec<Element>> {
        let mut cache = self.small_balls.lock().expect("ball cache poisoned");
        Arc::clone(cache.entry(r).or_insert_with(|| Arc::new(enumerate(&self.model, r))))
    }
}

impl DistanceOracle for WordMetric {
    fn distance(&self, a: PointId, b: PointId) -> u32 {
        self.model
            .distance(&self.elements[a as usize], &self.elements[b as usize]) as u32
    }

    fn ball(&self, a: PointId, r: u32) -> Vec<PointId> {
        if r >= 2 * self.radius {
            return (0..self.elements.len() as PointId)
                .filter(|&b| self.distance(a, b) <= r)
                .collect();
        }
        let x = &self.elements[a as usize];
        let mut out: Vec<PointId> = self
            .small_ball(r)
            .iter()
            .filter_map(|u| self.index.get(&self.model.multiply(x, u)).copied())
            .collect();
        out.sort_unstable();
        out
    }
}

/// All elements of word length at most `radius`, with the word metric and
/// the induced path metric of the Cayley graph restricted to the ball.
pub struct BallModel {
    pub model: GroupModel,
    pub radius: u32,
    elements: Arc<Vec<Element>>,
    index: Arc<HashMap<Element, PointId>>,
    space: Arc<FiniteMetricSpace>,
    path_space: FiniteMetricSpace,
}

impl fmt::Debug for BallModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BallModel")
            .field("model", &self.model.name())
            .field("radius", &self.radius)
            .field("elements", &self.elements.len())
            .finish()
    }
}

impl BallModel {
    pub fn build(model: &GroupModel, radius: u32) -> Result<Self> {
        Self::build_capped(model, radius, DEFAULT_BALL_CAP)
    }

    pub fn build_capped(model: &GroupModel, radius: u32, cap: u64) -> Result<Self> {
        if radius == 0 {
            return Err(Error::InvalidParameter("ball radius must be at least 1".into()));
        }
        let estimate = model.ball_size(radius, cap);
        if estimate > cap {
            return Err(Error::WindowTooLarge { estimate, cap });
        }
        let elements = Arc::new(enumerate(model, radius));
        let index: Arc<HashMap<Element, PointId>> = Arc::new(
            elements
                .iter()
                .enumerate()
                .map(|(i, g)| (g.clone(), i as PointId))
                .collect(),
        );
        let gens = model.symmetric_generators();
        let adjacency: Vec<Vec<PointId>> = crate::par::map(&elements, |g| {
            gens.iter()
                .filter_map(|s| index.get(&model.multiply(g, s)).copied())
                .collect()
        });
        let level: Vec<u32> = elements.iter().map(|g| model.word_length(g) as u32).collect();
        let labels: Vec<Label> = elements.iter().map(|g| Label::Element(model.format(g))).collect();
        let oracle = Arc::new(WordMetric {
            model: model.clone(),
            radius,
            elements: Arc::clone(&elements),
            index: Arc::clone(&index),
            small_balls: Mutex::new(HashMap::new()),
        });
        let space = FiniteMetricSpace::from_oracle(adjacency.clone(), oracle)?
            .with_levels(level.clone(), radius)
            .with_labels(labels.clone())
            .with_origin(0);
        let path_space = FiniteMetricSpace::from_graph(adjacency)?
            .with_levels(level, radius)
            .with_labels(labels)
            .with_origin(0);
        Ok(Self {
            model: model.clone(),
            radius,
            elements,
            index,
            space: Arc::new(space),
            path_space,
        })
    }

    /// The ball with the word metric of the whole group.
    pub fn space(&self) -> &Arc<FiniteMetricSpace> {
        &self.space
    }

    /// The ball with the path metric of its own Cayley subgraph.
    pub fn path_space(&self) -> &FiniteMetricSpace {
        &self.path_space
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn element(&self, id: PointId) -> &Element {
        &self.elements[id as usize]
    }

    pub fn id_of(&self, g: &Element) -> Option<PointId> {
        self.index.get(g).copied()
    }

    /// Parses a word and looks it up.
    pub fn id_of_word(&self, word: &str) -> Result<Option<PointId>> {
        Ok(self.id_of(&self.model.parse_word(word)?))
    }

    /// `g · x`, if it lies in the ball.
    pub fn act(&self, g: &Element, x: PointId) -> Option<PointId> {
        self.id_of(&self.model.multiply(g, &self.elements[x as usize]))
    }

    /// `x · g`, if it lies in the ball.
    pub fn act_right(&self, x: PointId, g: &Element) -> Option<PointId> {
        self.id_of(&self.model.multiply(&self.elements[x as usize], g))
    }

    /// Partial left-action table: one row per supplied element.
    pub fn action_table(&self, gs: &[Element]) -> Vec<Vec<Option<PointId>>> {
        gs.iter()
            .map(|g| (0..self.len() as PointId).map(|x| self.act(g, x)).collect())
            .collect()
    }

    /// Image of a mask under `g`; `None` if some point leaves the ball.
    pub fn translate(&self, g: &Element, mask: &SubsetMask) -> Option<SubsetMask> {
        let mut out = SubsetMask::empty(self.len());
        for x in mask.ids() {
            out.insert(self.act(g, x)?);
        }
        Some(out)
    }

    /// Mask of the elements of the subgroup described by `spec`.
    pub fn subgroup_trace(&self, spec: &SubgroupSpec) -> Result<SubsetMask> {
        let n = self.len();
        match spec {
            SubgroupSpec::Sublattice(k) => {
                let GroupModel::FreeAbelian(_) = self.model else {
                    return Err(Error::BadSubgroupSpec(format!(
                        "sublattice requires a free abelian group, got {}",
                        self.model.name()
                    )));
                };
                if *k <= 0 {
                    return Err(Error::BadSubgroupSpec("sublattice index must be positive".into()));
                }
                Ok(SubsetMask::from_predicate(n, |i| match &self.elements[i as usize] {
                    Element::Abelian(x) => x.iter().all(|c| c % k == 0),
                    _ => false,
                }))
            }
            SubgroupSpec::Factor(f) => {
                spec.generators(&self.model)?;
                Ok(SubsetMask::from_predicate(n, |i| {
                    match (&self.model, &self.elements[i as usize]) {
                        (GroupModel::DirectProduct(fs), Element::Product(x)) => {
                            x.iter().enumerate().all(|(j, e)| j == *f || *e == fs[j].identity())
                        }
                        (GroupModel::FreeProduct(_), Element::FreeProduct(x)) => {
                            x.len() <= 1 && x.iter().all(|(j, _)| j == f)
                        }
                        _ => false,
                    }
                }))
            }
            _ => {
                let gens = spec.generators(&self.model)?;
                let mut sym: Vec<Element> = Vec::new();
                for g in gens {
                    let gi = self.model.inverse(&g);
                    sym.push(g);
                    sym.push(gi);
                }
                let limit = 2 * self.radius as u64;
                let id = self.model.identity();
                let mut seen: std::collections::HashSet<Element> = [id.clone()].into();
                let mut queue = VecDeque::from([id]);
                let mut mask = SubsetMask::empty(n);
                while let Some(h) = queue.pop_front() {
                    if let Some(i) = self.id_of(&h) {
                        mask.insert(i);
                    }
                    for s in &sym {
                        let next = self.model.multiply(&h, s);
                        if self.model.word_length(&next) <= limit && seen.insert(next.clone()) {
                            queue.push_back(next);
                        }
                    }
                }
                Ok(mask)
            }
        }
    }
}

/// Description of a subgroup.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SubgroupSpec {
    /// Cyclic subgroup of the `i`-th standard generator.
    Axis(usize),
    /// `k Z^n` inside `Z^n`.
    Sublattice(i64),
    /// The `i`-th factor of a direct or free product.
    Factor(usize),
    /// Subgroup generated by the given words.
    Words(Vec<String>),
    /// Subgroup generated by the given elements.
    Elements(Vec<Element>),
}

impl SubgroupSpec {
    pub fn generators(&self, model: &GroupModel) -> Result<Vec<Element>> {
        match self {
            SubgroupSpec::Axis(i) => model
                .generators()
                .get(*i)
                .cloned()
                .map(|g| vec![g])
                .ok_or_else(|| Error::BadSubgroupSpec(format!("{} has no generator {i}", model.name()))),
            SubgroupSpec::Sublattice(k) => match model {
                GroupModel::FreeAbelian(_) if *k > 0 => {
                    Ok(model.generators().iter().map(|g| model.power(g, *k)).collect())
                }
                _ => Err(Error::BadSubgroupSpec(format!(
                    "sublattice {k} is not defined for {}",
                    model.name()
                ))),
            },
            SubgroupSpec::Factor(f) => match model {
                GroupModel::DirectProduct(fs) if *f < fs.len() => {
                    let ids: Vec<Element> = fs.iter().map(GroupModel::identity).collect();
                    Ok(fs[*f]
                        .generators()
                        .into_iter()
                        .map(|g| {
                            let mut v = ids.clone();
                            v[*f] = g;
                            Element::Product(v)
                        })
                        .collect())
                }
                GroupModel::FreeProduct(fs) if *f < fs.len() => Ok(fs[*f]
                    .generators()
                    .into_iter()
                    .map(|g| Element::FreeProduct(vec![(*f, g)]))
                    .collect()),
                _ => Err(Error::BadSubgroupSpec(format!(
                    "factor {f} is not defined for {}",
                    model.name()
                ))),
            },
            SubgroupSpec::Words(ws) => {
                if ws.is_empty() {
                    return Err(Error::BadSubgroupSpec("empty generator list".into()));
                }
                ws.iter().map(|w| model.parse_word(w)).collect()
            }
            SubgroupSpec::Elements(es) => {
                if es.is_empty() {
                    return Err(Error::BadSubgroupSpec("empty generator list".into()));
                }
                Ok(es.clone())
            }
        }
    }
}

/// Trend of a sequence of windowed measurements.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Trend {
    Bounded,
    Growing,
    Inconclusive,
}

impl Trend {
    /// Bounded if the last three values agree, growing if they strictly
    /// increase, inconclusive otherwise or with fewer than three values.
    pub fn of(values: &[u64]) -> Trend {
        if values.len() < 3 {
            return Trend::Inconclusive;
        }
        let t = &values[values.len() - 3..];
        if t[0] == t[1] && t[1] == t[2] {
            Trend::Bounded
        } else if t[0] < t[1] && t[1] < t[2] {
            Trend::Growing
        } else {
            Trend::Inconclusive
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CommensurabilityReport {
    /// `(radius, windowed Hausdorff distance)`.
    pub distances: Vec<(u32, u64)>,
    pub verdict: Trend,
}

/// Windowed Hausdorff distance between the traces of two subgroups over a
/// list of ball radii.
pub fn commensurability_probe(
    model: &GroupModel,
    h: &SubgroupSpec,
    k: &SubgroupSpec,
    radii: &[u32],
) -> Result<CommensurabilityReport> {
    h.generators(model)?;
    k.generators(model)?;
    let rows = crate::par::map(radii, |&r| -> Result<(u32, u64)> {
        let ball = BallModel::build(model, r)?;
        let a = ball.subgroup_trace(h)?;
        let b = ball.subgroup_trace(k)?;
        Ok((r, ball.space().hausdorff_distance(&a, &b)? as u64))
    });
    let distances = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let values: Vec<u64> = distances.iter().map(|&(_, d)| d).collect();
    Ok(CommensurabilityReport {
        verdict: Trend::of(&values),
        distances,
    })
}
