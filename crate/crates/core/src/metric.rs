//! Finite metric spaces, subsets, neighborhoods and chain connectivity.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::sync::{Arc, OnceLock};

use fixedbitset::FixedBitSet;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

pub type PointId = u32;

/// Distance between points in different path components of a graph metric.
pub const UNREACHABLE: u32 = u32::MAX;

/// Per-point annotation.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Label {
    Lattice(Vec<i32>),
    Element(String),
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Lattice(c) => {
                let parts: Vec<String> = c.iter().map(i32::to_string).collect();
                write!(f, "({})", parts.join(","))
            }
            Label::Element(s) => f.write_str(s),
        }
    }
}

/// A metric supplied from outside the 1-step graph, e.g. a group word metric
/// or the restriction of a parent space's metric.
pub trait DistanceOracle: Send + Sync {
    fn distance(&self, a: PointId, b: PointId) -> u32;
    /// All points within `r` of `a`, sorted.
    fn ball(&self, a: PointId, r: u32) -> Vec<PointId>;
}

#[derive(Clone)]
enum Metric {
    Graph,
    Oracle(Arc<dyn DistanceOracle>),
}

/// A finite point set `0..n` with an integer metric.
///
/// The 1-step graph (pairs at distance exactly one) is always stored. The
/// metric is either the path metric of that graph or an external oracle.
/// Each point carries a window level (its norm in the model the window was
/// cut from); the collar of width `c` is the set of points with level above
/// `window_radius - c`.
pub struct FiniteMetricSpace {
    adjacency: Vec<Vec<PointId>>,
    metric: Metric,
    labels: Vec<Option<Label>>,
    level: Vec<u32>,
    window_radius: u32,
    origin: Option<PointId>,
    rows: Vec<OnceLock<Box<[u32]>>>,
    label_index: OnceLock<HashMap<Label, PointId>>,
}

impl Clone for FiniteMetricSpace {
    fn clone(&self) -> Self {
        Self {
            adjacency: self.adjacency.clone(),
            metric: self.metric.clone(),
            labels: self.labels.clone(),
            level: self.level.clone(),
            window_radius: self.window_radius,
            origin: self.origin,
            rows: self.rows.clone(),
            label_index: OnceLock::new(),
        }
    }
}

impl fmt::Debug for FiniteMetricSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FiniteMetricSpace")
            .field("points", &self.len())
            .field("window_radius", &self.window_radius)
            .field("graph_metric", &matches!(self.metric, Metric::Graph))
            .finish()
    }
}

impl FiniteMetricSpace {
    /// Path metric of an undirected graph. Levels default to 0 and the
    /// window radius to the largest finite eccentricity bound `n`.
    pub fn from_graph(adjacency: Vec<Vec<PointId>>) -> Result<Self> {
        Self::build(adjacency, Metric::Graph)
    }

    /// Metric given by `oracle`; `adjacency` must list exactly the pairs at
    /// distance one.
    pub fn from_oracle(adjacency: Vec<Vec<PointId>>, oracle: Arc<dyn DistanceOracle>) -> Result<Self> {
        Self::build(adjacency, Metric::Oracle(oracle))
    }

    fn build(mut adjacency: Vec<Vec<PointId>>, metric: Metric) -> Result<Self> {
        let n = adjacency.len();
        for (a, nbrs) in adjacency.iter_mut().enumerate() {
            nbrs.sort_unstable();
            nbrs.dedup();
            if nbrs.iter().any(|&b| b as usize >= n || b as usize == a) {
                return Err(Error::InvalidParameter(format!(
                    "adjacency of point {a} is out of range or has a loop"
                )));
            }
        }
        for (a, nbrs) in adjacency.iter().enumerate() {
            for &b in nbrs {
                if adjacency[b as usize].binary_search(&(a as PointId)).is_err() {
                    return Err(Error::InvalidParameter(format!(
                        "adjacency is not symmetric at ({a},{b})"
                    )));
                }
            }
        }
        Ok(Self {
            adjacency,
            metric,
            labels: vec![None; n],
            level: vec![0; n],
            window_radius: n as u32,
            origin: None,
            rows: (0..n).map(|_| OnceLock::new()).collect(),
            label_index: OnceLock::new(),
        })
    }

    pub fn with_labels(mut self, labels: Vec<Label>) -> Self {
        assert_eq!(labels.len(), self.len(), "one label per point");
        self.labels = labels.into_iter().map(Some).collect();
        self.label_index = OnceLock::new();
        self
    }

    /// Window norm of each point and the window radius.
    pub fn with_levels(mut self, level: Vec<u32>, window_radius: u32) -> Self {
        assert_eq!(level.len(), self.len(), "one level per point");
        self.level = level;
        self.window_radius = window_radius;
        self
    }

    pub fn with_origin(mut self, origin: PointId) -> Self {
        assert!((origin as usize) < self.len(), "origin out of range");
        self.origin = Some(origin);
        self
    }

    pub fn len(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    pub fn neighbors(&self, a: PointId) -> &[PointId] {
        &self.adjacency[a as usize]
    }

    pub fn label(&self, a: PointId) -> Option<&Label> {
        self.labels[a as usize].as_ref()
    }

    pub fn find(&self, label: &Label) -> Option<PointId> {
        self.label_index
            .get_or_init(|| {
                self.labels
                    .iter()
                    .enumerate()
                    .filter_map(|(i, l)| l.clone().map(|l| (l, i as PointId)))
                    .collect()
            })
            .get(label)
            .copied()
    }

    /// Shorthand for `find(&Label::Lattice(coords))`.
    pub fn at(&self, coords: &[i32]) -> Option<PointId> {
        self.find(&Label::Lattice(coords.to_vec()))
    }

    pub fn level(&self, a: PointId) -> u32 {
        self.level[a as usize]
    }

    pub fn window_radius(&self) -> u32 {
        self.window_radius
    }

    pub fn origin(&self) -> Option<PointId> {
        self.origin
    }

    pub fn is_graph_metric(&self) -> bool {
        matches!(self.metric, Metric::Graph)
    }

    pub fn universe(&self) -> SubsetMask {
        SubsetMask::full(self.len())
    }

    pub fn empty_mask(&self) -> SubsetMask {
        SubsetMask::empty(self.len())
    }

    /// Points with level above `window_radius - width`.
    pub fn collar(&self, width: u32) -> SubsetMask {
        let cut = self.window_radius.saturating_sub(width);
        SubsetMask::from_predicate(self.len(), |a| self.level[a as usize] > cut)
    }

    /// Points with level at most `radius`.
    pub fn level_ball(&self, radius: u32) -> SubsetMask {
        SubsetMask::from_predicate(self.len(), |a| self.level[a as usize] <= radius)
    }

    /// All distances from `a`, cached.
    pub fn row(&self, a: PointId) -> &[u32] {
        self.rows[a as usize].get_or_init(|| match &self.metric {
            Metric::Graph => self.bfs(&[a], UNREACHABLE).into_boxed_slice(),
            Metric::Oracle(o) => (0..self.len() as PointId).map(|b| o.distance(a, b)).collect(),
        })
    }

    pub fn distance(&self, a: PointId, b: PointId) -> u32 {
        if a == b {
            return 0;
        }
        match &self.metric {
            Metric::Graph => self.row(a)[b as usize],
            Metric::Oracle(o) => o.distance(a, b),
        }
    }

    /// Points within `r` of `a`, sorted.
    pub fn ball(&self, a: PointId, r: u32) -> Vec<PointId> {
        match &self.metric {
            Metric::Graph => {
                if let Some(row) = self.rows[a as usize].get() {
                    return (0..self.len() as PointId).filter(|&b| row[b as usize] <= r).collect();
                }
                let mut out = self.bfs_collect(a, r);
                out.sort_unstable();
                out
            }
            Metric::Oracle(o) => o.ball(a, r),
        }
    }

    fn bfs_collect(&self, a: PointId, r: u32) -> Vec<PointId> {
        let mut seen: HashMap<PointId, u32> = HashMap::new();
        seen.insert(a, 0);
        let mut queue = VecDeque::from([a]);
        let mut out = vec![a];
        while let Some(x) = queue.pop_front() {
            let d = seen[&x];
            if d == r {
                continue;
            }
            for &y in &self.adjacency[x as usize] {
                if let std::collections::hash_map::Entry::Vacant(e) = seen.entry(y) {
                    e.insert(d + 1);
                    out.push(y);
                    queue.push_back(y);
                }
            }
        }
        out
    }

    /// Multi-source BFS in the 1-step graph, truncated at `limit`.
    fn bfs(&self, sources: &[PointId], limit: u32) -> Vec<u32> {
        let mut dist = vec![UNREACHABLE; self.len()];
        let mut queue = VecDeque::new();
        for &s in sources {
            if dist[s as usize] != 0 {
                dist[s as usize] = 0;
                queue.push_back(s);
            }
        }
        while let Some(x) = queue.pop_front() {
            let d = dist[x as usize];
            if d >= limit {
                continue;
            }
            for &y in &self.adjacency[x as usize] {
                if dist[y as usize] == UNREACHABLE {
                    dist[y as usize] = d + 1;
                    queue.push_back(y);
                }
            }
        }
        dist
    }

    /// `d(x, S)` for every point, or `UNREACHABLE`.
    pub fn distance_to_set(&self, s: &SubsetMask) -> Result<Vec<u32>> {
        self.check_mask(s)?;
        if s.is_empty() {
            return Err(Error::EmptySubset);
        }
        let sources: Vec<PointId> = s.ids().collect();
        Ok(match &self.metric {
            Metric::Graph => self.bfs(&sources, UNREACHABLE),
            Metric::Oracle(o) => crate::par::map_range(self.len(), |x| {
                if s.contains(x as PointId) {
                    0
                } else {
                    sources
                        .iter()
                        .map(|&y| o.distance(x as PointId, y))
                        .min()
                        .unwrap_or(UNREACHABLE)
                }
            }),
        })
    }

    /// `N_r(S) = { x : d(x, S) <= r }`.
    pub fn neighborhood(&self, s: &SubsetMask, r: u32) -> Result<SubsetMask> {
        self.check_mask(s)?;
        if s.is_empty() {
            return Err(Error::EmptySubset);
        }
        if r == 0 {
            return Ok(s.clone());
        }
        match &self.metric {
            Metric::Graph => {
                let sources: Vec<PointId> = s.ids().collect();
                let d = self.bfs(&sources, r);
                Ok(SubsetMask::from_predicate(self.len(), |x| d[x as usize] <= r))
            }
            Metric::Oracle(o) => {
                let mut out = s.clone();
                for x in s.ids() {
                    for y in o.ball(x, r) {
                        out.insert(y);
                    }
                }
                Ok(out)
            }
        }
    }

    /// Connected components of `region` in the graph joining points at
    /// distance at most `r`, ordered by smallest id.
    pub fn components(&self, region: &SubsetMask, r: u32) -> Result<Vec<SubsetMask>> {
        self.check_mask(region)?;
        let ids: Vec<PointId> = region.ids().collect();
        let mut uf = petgraph::unionfind::UnionFind::<usize>::new(self.len());
        let links: Vec<Vec<PointId>> = crate::par::map(&ids, |&a| {
            self.ball(a, r)
                .into_iter()
                .filter(|&b| b > a && region.contains(b))
                .collect()
        });
        for (&a, bs) in ids.iter().zip(&links) {
            for &b in bs {
                uf.union(a as usize, b as usize);
            }
        }
        let mut by_root: HashMap<usize, usize> = HashMap::new();
        let mut out: Vec<SubsetMask> = Vec::new();
        for &a in &ids {
            let root = uf.find(a as usize);
            let slot = *by_root.entry(root).or_insert_with(|| {
                out.push(SubsetMask::empty(self.len()));
                out.len() - 1
            });
            out[slot].insert(a);
        }
        Ok(out)
    }

    /// Smallest `r` with `A ⊆ N_r(B)` and `B ⊆ N_r(A)`; `UNREACHABLE` when
    /// no such `r` exists in the window.
    pub fn hausdorff_distance(&self, a: &SubsetMask, b: &SubsetMask) -> Result<u32> {
        let da = self.distance_to_set(a)?;
        let db = self.distance_to_set(b)?;
        let one = b.ids().map(|x| da[x as usize]).max().unwrap_or(0);
        let two = a.ids().map(|x| db[x as usize]).max().unwrap_or(0);
        Ok(one.max(two))
    }

    /// Largest pairwise distance inside `s` (0 for empty or singleton sets).
    pub fn diameter(&self, s: &SubsetMask) -> u32 {
        let ids: Vec<PointId> = s.ids().collect();
        let mut best = 0;
        for (i, &x) in ids.iter().enumerate() {
            for &y in &ids[i + 1..] {
                best = best.max(self.distance(x, y));
            }
        }
        best
    }

    /// Largest ball cardinality at radius `r` over all centers.
    pub fn max_ball_size(&self, r: u32) -> usize {
        crate::par::map_range(self.len(), |a| self.ball(a as PointId, r).len())
            .into_iter()
            .max()
            .unwrap_or(0)
    }

    /// Minimal t-chain lengths between all pairs.
    pub fn chain_profile(&self, t: u32) -> Result<ChainProfile> {
        if t == 0 {
            return Err(Error::InvalidParameter("t must be at least 1".into()));
        }
        let graph: Vec<Vec<PointId>> = crate::par::map_range(self.len(), |a| {
            self.ball(a as PointId, t)
                .into_iter()
                .filter(|&b| b != a as PointId)
                .collect()
        });
        let lengths = crate::par::map_range(self.len(), |a| {
            let mut dist = vec![UNREACHABLE; graph.len()];
            dist[a] = 0;
            let mut queue = VecDeque::from([a as PointId]);
            while let Some(x) = queue.pop_front() {
                for &y in &graph[x as usize] {
                    if dist[y as usize] == UNREACHABLE {
                        dist[y as usize] = dist[x as usize] + 1;
                        queue.push_back(y);
                    }
                }
            }
            dist
        });
        Ok(ChainProfile { t, lengths })
    }

    /// The subspace on `mask` with the restricted metric. Point `i` of the
    /// result is the `i`-th id of `mask`; the returned vector maps back.
    pub fn restrict(self: &Arc<Self>, mask: &SubsetMask) -> Result<(FiniteMetricSpace, Vec<PointId>)> {
        self.check_mask(mask)?;
        let ids: Vec<PointId> = mask.ids().collect();
        let mut local = vec![UNREACHABLE; self.len()];
        for (i, &p) in ids.iter().enumerate() {
            local[p as usize] = i as PointId;
        }
        let adjacency: Vec<Vec<PointId>> = ids
            .iter()
            .map(|&p| {
                self.ball(p, 1)
                    .into_iter()
                    .filter(|&q| q != p && local[q as usize] != UNREACHABLE)
                    .map(|q| local[q as usize])
                    .collect()
            })
            .collect();
        let oracle = Arc::new(Restricted {
            parent: Arc::clone(self),
            ids: ids.clone(),
            local,
        });
        let mut space = FiniteMetricSpace::from_oracle(adjacency, oracle)?;
        space.level = ids.iter().map(|&p| self.level[p as usize]).collect();
        space.window_radius = self.window_radius;
        space.labels = ids.iter().map(|&p| self.labels[p as usize].clone()).collect();
        space.origin = self
            .origin
            .and_then(|o| ids.binary_search(&o).ok().map(|i| i as PointId));
        Ok((space, ids))
    }

    pub(crate) fn check_mask(&self, s: &SubsetMask) -> Result<()> {
        if s.universe_len() != self.len() {
            return Err(Error::ShapeMismatch(format!(
                "mask over {} points used with a space of {} points",
                s.universe_len(),
                self.len()
            )));
        }
        Ok(())
    }
}

struct Restricted {
    parent: Arc<FiniteMetricSpace>,
    ids: Vec<PointId>,
    local: Vec<PointId>,
}

impl DistanceOracle for Restricted {
    fn distance(&self, a: PointId, b: PointId) -> u32 {
        self.parent.distance(self.ids[a as usize], self.ids[b as usize])
    }

    fn ball(&self, a: PointId, r: u32) -> Vec<PointId> {
        let mut out: Vec<PointId> = self
            .parent
            .ball(self.ids[a as usize], r)
            .into_iter()
            .filter_map(|q| {
                let l = self.local[q as usize];
                (l != UNREACHABLE).then_some(l)
            })
            .collect();
        out.sort_unstable();
        out
    }
}

/// Induced subgraph of the integer lattice on `points`, with the graph path
/// metric. Points are sorted lexicographically before ids are assigned;
/// levels are the L∞ norms.
pub fn lattice_subgraph(mut points: Vec<Vec<i32>>, window_radius: u32) -> Result<FiniteMetricSpace> {
    points.sort();
    points.dedup();
    let index: HashMap<&[i32], PointId> = points
        .iter()
        .enumerate()
        .map(|(i, p)| (p.as_slice(), i as PointId))
        .collect();
    let adjacency: Vec<Vec<PointId>> = points
        .iter()
        .map(|p| {
            let mut nbrs = Vec::new();
            let mut q = p.clone();
            for axis in 0..p.len() {
                for step in [-1, 1] {
                    q[axis] += step;
                    if let Some(&j) = index.get(q.as_slice()) {
                        nbrs.push(j);
                    }
                    q[axis] -= step;
                }
            }
            nbrs
        })
        .collect();
    let level = points
        .iter()
        .map(|p| p.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0))
        .collect();
    let origin = index
        .get(vec![0; points.first().map_or(0, Vec::len)].as_slice())
        .copied();
    let labels = points.iter().cloned().map(Label::Lattice).collect();
    let mut space = FiniteMetricSpace::from_graph(adjacency)?
        .with_levels(level, window_radius)
        .with_labels(labels);
    if let Some(o) = origin {
        space = space.with_origin(o);
    }
    Ok(space)
}

/// Minimal t-chain lengths; `None` where no chain exists.
#[derive(Clone, Debug)]
pub struct ChainProfile {
    pub t: u32,
    lengths: Vec<Vec<u32>>,
}

impl ChainProfile {
    pub fn get(&self, a: PointId, b: PointId) -> Option<u32> {
        let v = self.lengths[a as usize][b as usize];
        (v != UNREACHABLE).then_some(v)
    }

    /// Longest finite chain length over all pairs.
    pub fn max_finite(&self) -> u32 {
        self.lengths
            .iter()
            .flatten()
            .copied()
            .filter(|&v| v != UNREACHABLE)
            .max()
            .unwrap_or(0)
    }

    pub fn unreachable_pairs(&self) -> usize {
        self.lengths.iter().flatten().filter(|&&v| v == UNREACHABLE).count() / 2
    }
}

/// A subset of a space's point ids.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct SubsetMask {
    bits: FixedBitSet,
}

impl fmt::Debug for SubsetMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.ids()).finish()
    }
}

impl Serialize for SubsetMask {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.ids())
    }
}

impl SubsetMask {
    pub fn empty(n: usize) -> Self {
        Self {
            bits: FixedBitSet::with_capacity(n),
        }
    }

    pub fn full(n: usize) -> Self {
        let mut bits = FixedBitSet::with_capacity(n);
        bits.insert_range(..);
        Self { bits }
    }

    pub fn from_ids<I: IntoIterator<Item = PointId>>(n: usize, ids: I) -> Self {
        let mut m = Self::empty(n);
        for i in ids {
            m.insert(i);
        }
        m
    }

    pub fn from_predicate(n: usize, f: impl Fn(PointId) -> bool) -> Self {
        Self::from_ids(n, (0..n as PointId).filter(|&i| f(i)))
    }

    pub fn universe_len(&self) -> usize {
        self.bits.len()
    }

    pub fn contains(&self, i: PointId) -> bool {
        self.bits.contains(i as usize)
    }

    pub fn insert(&mut self, i: PointId) {
        self.bits.insert(i as usize);
    }

    pub fn remove(&mut self, i: PointId) {
        self.bits.set(i as usize, false);
    }

    pub fn count(&self) -> usize {
        self.bits.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_clear()
    }

    pub fn ids(&self) -> impl Iterator<Item = PointId> + '_ {
        self.bits.ones().map(|i| i as PointId)
    }

    pub fn to_vec(&self) -> Vec<PointId> {
        self.ids().collect()
    }

    fn same_universe(&self, other: &Self) {
        assert_eq!(self.universe_len(), other.universe_len(), "masks over different spaces");
    }

    pub fn union(&self, other: &Self) -> Self {
        self.same_universe(other);
        let mut bits = self.bits.clone();
        bits.union_with(&other.bits);
        Self { bits }
    }

    pub fn intersection(&self, other: &Self) -> Self {
        self.same_universe(other);
        let mut bits = self.bits.clone();
        bits.intersect_with(&other.bits);
        Self { bits }
    }

    pub fn difference(&self, other: &Self) -> Self {
        self.same_universe(other);
        let mut bits = self.bits.clone();
        bits.difference_with(&other.bits);
        Self { bits }
    }

    pub fn symmetric_difference(&self, other: &Self) -> Self {
        self.same_universe(other);
        let mut bits = self.bits.clone();
        bits.symmetric_difference_with(&other.bits);
        Self { bits }
    }

    pub fn complement(&self) -> Self {
        let mut bits = self.bits.clone();
        bits.toggle_range(..);
        Self { bits }
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.same_universe(other);
        self.bits.is_subset(&other.bits)
    }

    pub fn is_disjoint(&self, other: &Self) -> bool {
        self.same_universe(other);
        self.bits.is_disjoint(&other.bits)
    }
}

/// Sampled distortion profile of a point map between two spaces.
///
/// `lower` and `upper` are step functions given as `(source distance,
/// bound)` pairs sorted by distance; both are non-decreasing.
#[derive(Clone, Debug, Serialize)]
pub struct CoarseMapProfile {
    pub lower: Vec<(u32, u32)>,
    pub upper: Vec<(u32, u32)>,
    /// Largest distance from a target point to the image, if finite.
    pub density: Option<u32>,
}

impl CoarseMapProfile {
    /// Profile of `f` (source id to target id) over `pairs`, or over all
    /// pairs when `pairs` is `None`.
    pub fn sample(
        source: &FiniteMetricSpace,
        target: &FiniteMetricSpace,
        f: &[PointId],
        pairs: Option<&[(PointId, PointId)]>,
    ) -> Result<Self> {
        if f.len() != source.len() {
            return Err(Error::ShapeMismatch("map must cover every source point".into()));
        }
        if f.iter().any(|&y| y as usize >= target.len()) {
            return Err(Error::ShapeMismatch("map leaves the target".into()));
        }
        let all: Vec<(PointId, PointId)>;
        let pairs = match pairs {
            Some(p) => p,
            None => {
                let n = source.len() as PointId;
                all = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
                &all
            }
        };
        let mut samples: Vec<(u32, u32)> = pairs
            .iter()
            .map(|&(a, b)| (source.distance(a, b), target.distance(f[a as usize], f[b as usize])))
            .filter(|&(d, _)| d != UNREACHABLE)
            .collect();
        samples.sort_unstable();

        let mut upper: Vec<(u32, u32)> = Vec::new();
        let mut running = 0;
        for &(d, e) in &samples {
            running = running.max(e);
            match upper.last_mut() {
                Some(last) if last.0 == d => last.1 = running,
                _ => upper.push((d, running)),
            }
        }
        let mut lower: Vec<(u32, u32)> = Vec::new();
        let mut running = UNREACHABLE;
        for &(d, e) in samples.iter().rev() {
            running = running.min(e);
            match lower.last_mut() {
                Some(last) if last.0 == d => last.1 = running,
                _ => lower.push((d, running)),
            }
        }
        lower.reverse();

        let image = SubsetMask::from_ids(target.len(), f.iter().copied());
        let density = if image.is_empty() {
            None
        } else {
            let d = target.distance_to_set(&image)?;
            let m = d.into_iter().max().unwrap_or(0);
            (m != UNREACHABLE).then_some(m)
        };
        Ok(Self { lower, upper, density })
    }

    /// Lower bound η(d): value at the largest sampled distance ≤ d.
    pub fn eta(&self, d: u32) -> u32 {
        self.lower
            .iter()
            .take_while(|&&(s, _)| s <= d)
            .last()
            .map_or(0, |&(_, v)| v)
    }

    /// Upper bound φ(d): value at the smallest sampled distance ≥ d.
    pub fn phi(&self, d: u32) -> Option<u32> {
        self.upper.iter().find(|&&(s, _)| s >= d).map(|&(_, v)| v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(lo: i32, hi: i32) -> FiniteMetricSpace {
        let r = lo.unsigned_abs().max(hi.unsigned_abs());
        lattice_subgraph((lo..=hi).map(|x| vec![x]).collect(), r).unwrap()
    }

    #[test]
    fn neighborhood_on_line() {
        let z = line(-10, 10);
        let s = SubsetMask::from_ids(z.len(), [z.at(&[0]).unwrap()]);
        let n = z.neighborhood(&s, 3).unwrap();
        let xs: Vec<i32> = n
            .ids()
            .map(|i| match z.label(i).unwrap() {
                Label::Lattice(c) => c[0],
                _ => unreachable!(),
            })
            .collect();
        assert_eq!(xs, (-3..=3).collect::<Vec<_>>());
        assert_eq!(z.neighborhood(&s, 0).unwrap(), s);
    }

    #[test]
    fn empty_subset_errors() {
        let z = line(0, 3);
        assert_eq!(z.neighborhood(&z.empty_mask(), 1).unwrap_err(), Error::EmptySubset);
        assert_eq!(
            z.hausdorff_distance(&z.empty_mask(), &z.universe()).unwrap_err(),
            Error::EmptySubset
        );
    }

    #[test]
    fn hausdorff_points_on_line() {
        let z = line(-10, 10);
        let a = SubsetMask::from_ids(z.len(), [z.at(&[0]).unwrap()]);
        let b = SubsetMask::from_ids(z.len(), [z.at(&[5]).unwrap()]);
        assert_eq!(z.hausdorff_distance(&a, &b).unwrap(), 5);
        assert_eq!(z.hausdorff_distance(&a, &a).unwrap(), 0);
    }

    #[test]
    fn two_point_space_is_unreachable_at_t1() {
        let z = Arc::new(line(0, 10));
        let mask = SubsetMask::from_ids(z.len(), [z.at(&[0]).unwrap(), z.at(&[10]).unwrap()]);
        let (two, _) = z.restrict(&mask).unwrap();
        assert_eq!(two.distance(0, 1), 10);
        let prof = two.chain_profile(1).unwrap();
        assert_eq!(prof.get(0, 1), None);
        assert_eq!(two.chain_profile(10).unwrap().get(0, 1), Some(1));
    }

    #[test]
    fn chain_on_line_matches_distance() {
        let z = line(0, 12);
        let p = z.chain_profile(1).unwrap();
        for n in 0..=12 {
            assert_eq!(p.get(z.at(&[0]).unwrap(), z.at(&[n]).unwrap()), Some(n as u32));
        }
    }

    #[test]
    fn mask_algebra() {
        let a = SubsetMask::from_ids(10, [1, 2, 3]);
        let b = SubsetMask::from_ids(10, [3, 4]);
        assert_eq!(a.union(&b).to_vec(), vec![1, 2, 3, 4]);
        assert_eq!(a.intersection(&b).to_vec(), vec![3]);
        assert_eq!(a.difference(&b).to_vec(), vec![1, 2]);
        assert_eq!(a.symmetric_difference(&b).to_vec(), vec![1, 2, 4]);
        assert_eq!(a.complement().count(), 7);
        assert!(a.symmetric_difference(&a).is_empty());
    }

    #[test]
    fn doubling_map_profile() {
        let src = line(0, 5);
        let tgt = line(0, 10);
        let f: Vec<PointId> = (0..=5).map(|x| tgt.at(&[2 * x]).unwrap()).collect();
        let prof = CoarseMapProfile::sample(&src, &tgt, &f, None).unwrap();
        assert_eq!(prof.eta(3), 6);
        assert_eq!(prof.phi(3), Some(6));
        assert_eq!(prof.density, Some(1));
    }
}
