//! Rips complexes over GF(2): clique enumeration, boundary matrices,
//! inclusion and induced chain maps, and local cycle filling.

use std::fmt::Write as _;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gf2::{GF2Matrix, SparseBitVec};
use crate::metric::{FiniteMetricSpace, PointId, SubsetMask};
use crate::par;

/// Default cap on the per-dimension simplex estimate.
pub const DEFAULT_SIMPLEX_CAP: u64 = 40_000_000;

static SIMPLEX_CAP: AtomicU64 = AtomicU64::new(DEFAULT_SIMPLEX_CAP);

/// Sets the process-wide cap used by [`build_rips`]; returns the old one.
pub fn set_simplex_cap(cap: u64) -> u64 {
    SIMPLEX_CAP.swap(cap, Ordering::Relaxed)
}

pub fn simplex_cap() -> u64 {
    SIMPLEX_CAP.load(Ordering::Relaxed)
}

/// The Rips complex `P_r(V)` of a vertex subset `V`, up to dimension `m`.
///
/// Simplices of each dimension are stored as one flat array of sorted
/// vertex tuples, in lexicographic order; a simplex is identified by its
/// position in that order.
#[derive(Clone)]
pub struct RipsComplex {
    space: Arc<FiniteMetricSpace>,
    mask: SubsetMask,
    scale: u32,
    max_dim: usize,
    simplices: Vec<Vec<PointId>>,
    boundaries: Vec<GF2Matrix>,
}

impl std::fmt::Debug for RipsComplex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RipsComplex")
            .field("scale", &self.scale)
            .field("max_dim", &self.max_dim)
            .field("counts", &self.counts())
            .finish()
    }
}

fn binom(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let mut v: u128 = 1;
    for i in 0..k {
        v = v * (n - i) as u128 / (i + 1) as u128;
        if v > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    v as u64
}

/// Builds `P_r(V)` up to dimension `m` under the process-wide size cap.
pub fn build_rips(space: &Arc<FiniteMetricSpace>, mask: &SubsetMask, r: u32, m: usize) -> Result<RipsComplex> {
    RipsComplex::build(space, mask, r, m, simplex_cap())
}

impl RipsComplex {
    pub fn build(space: &Arc<FiniteMetricSpace>, mask: &SubsetMask, r: u32, m: usize, cap: u64) -> Result<Self> {
        space.check_mask(mask)?;
        let verts: Vec<PointId> = mask.ids().collect();
        let up: Vec<Vec<PointId>> = par::map(&verts, |&v| {
            space
                .ball(v, r)
                .into_iter()
                .filter(|&u| u > v && mask.contains(u))
                .collect()
        });
        let per_dim: Vec<u64> = (0..=m as u64)
            .map(|k| {
                up.iter()
                    .map(|n| binom(n.len() as u64, k))
                    .fold(0u64, u64::saturating_add)
            })
            .collect();
        if per_dim.iter().any(|&c| c > cap) {
            return Err(Error::ComplexTooLarge { per_dim, cap });
        }
        let mut up_of = vec![Vec::new(); space.len()];
        for (v, n) in verts.iter().zip(up) {
            up_of[*v as usize] = n;
        }
        let per_root: Vec<Vec<Vec<PointId>>> = par::map(&verts, |&v| {
            let mut out: Vec<Vec<PointId>> = vec![Vec::new(); m + 1];
            let mut stack = vec![v];
            extend_cliques(&up_of, &mut stack, &up_of[v as usize], m, &mut out);
            out
        });
        let mut simplices: Vec<Vec<PointId>> = vec![Vec::new(); m + 1];
        for root in per_root {
            for (k, flat) in root.into_iter().enumerate() {
                simplices[k].extend(flat);
            }
        }
        let mut complex = RipsComplex {
            space: Arc::clone(space),
            mask: mask.clone(),
            scale: r,
            max_dim: m,
            simplices,
            boundaries: Vec::new(),
        };
        complex.boundaries = (0..=m).map(|k| complex.compute_boundary(k)).collect();
        Ok(complex)
    }

    fn compute_boundary(&self, k: usize) -> GF2Matrix {
        let n = self.count(k);
        if k == 0 {
            let ones = SparseBitVec::from_indices([0]);
            return GF2Matrix::from_columns(1, vec![ones; n]).expect("augmentation shape");
        }
        let cols = par::map_range(n, |j| {
            let s = self.simplex(k, j);
            let mut face = Vec::with_capacity(k);
            SparseBitVec::from_indices((0..=k).map(|drop| {
                face.clear();
                face.extend(s.iter().enumerate().filter(|&(i, _)| i != drop).map(|(_, &v)| v));
                self.index_of(&face).expect("faces of a Rips simplex are simplices")
            }))
        });
        GF2Matrix::from_columns(self.count(k - 1), cols).expect("boundary shape")
    }

    pub fn space(&self) -> &Arc<FiniteMetricSpace> {
        &self.space
    }

    pub fn mask(&self) -> &SubsetMask {
        &self.mask
    }

    pub fn scale(&self) -> u32 {
        self.scale
    }

    pub fn max_dim(&self) -> usize {
        self.max_dim
    }

    /// Number of `k`-simplices (0 above the dimension cap).
    pub fn count(&self, k: usize) -> usize {
        self.simplices.get(k).map_or(0, |s| s.len() / (k + 1))
    }

    pub fn counts(&self) -> Vec<usize> {
        (0..=self.max_dim).map(|k| self.count(k)).collect()
    }

    pub fn simplex(&self, k: usize, j: usize) -> &[PointId] {
        &self.simplices[k][j * (k + 1)..(j + 1) * (k + 1)]
    }

    pub fn simplices(&self, k: usize) -> impl Iterator<Item = &[PointId]> {
        self.simplices
            .get(k)
            .map(|s| s.chunks_exact(k + 1))
            .into_iter()
            .flatten()
    }

    /// Position of a sorted tuple among the simplices of its dimension.
    pub fn index_of(&self, s: &[PointId]) -> Option<usize> {
        let k = s.len().checked_sub(1)?;
        let flat = self.simplices.get(k)?;
        let n = flat.len() / (k + 1);
        let (mut lo, mut hi) = (0usize, n);
        while lo < hi {
            let mid = (lo + hi) / 2;
            match flat[mid * (k + 1)..(mid + 1) * (k + 1)].cmp(s) {
                std::cmp::Ordering::Less => lo = mid + 1,
                std::cmp::Ordering::Greater => hi = mid,
                std::cmp::Ordering::Equal => return Some(mid),
            }
        }
        None
    }

    /// Range of `k`-simplices whose smallest vertex is `v`.
    pub fn star_range(&self, k: usize, v: PointId) -> std::ops::Range<usize> {
        let Some(flat) = self.simplices.get(k) else {
            return 0..0;
        };
        let n = flat.len() / (k + 1);
        let first = |j: usize| flat[j * (k + 1)];
        let lo = partition_point(n, |j| first(j) < v);
        let hi = partition_point(n, |j| first(j) <= v);
        lo..hi
    }

    /// `∂_k`, columns indexed by `k`-simplices; for `k = 0` this is the
    /// augmentation (a single all-ones row).
    pub fn boundary(&self, k: usize) -> &GF2Matrix {
        &self.boundaries[k]
    }

    /// Vertices touched by a `k`-chain.
    pub fn support(&self, k: usize, chain: &SparseBitVec) -> SubsetMask {
        let mut m = SubsetMask::empty(self.space.len());
        for j in chain.ones() {
            for &v in self.simplex(k, j) {
                m.insert(v);
            }
        }
        m
    }

    /// Chain with the given simplices.
    pub fn chain(&self, simplices: &[&[PointId]]) -> Result<SparseBitVec> {
        let mut idx = Vec::with_capacity(simplices.len());
        for s in simplices {
            let mut t = s.to_vec();
            t.sort_unstable();
            idx.push(self.index_of(&t).ok_or(Error::NotASubcomplex)?);
        }
        Ok(SparseBitVec::from_indices(idx))
    }

    /// `k`-simplices with all vertices in `region`.
    pub fn simplices_within(&self, k: usize, region: &SubsetMask) -> Vec<usize> {
        if k > self.max_dim {
            return Vec::new();
        }
        region
            .ids()
            .flat_map(|v| self.star_range(k, v))
            .filter(|&j| self.simplex(k, j).iter().all(|&u| region.contains(u)))
            .collect()
    }

    pub fn diameter_of(&self, s: &[PointId]) -> u32 {
        let mut d = 0;
        for (i, &a) in s.iter().enumerate() {
            for &b in &s[i + 1..] {
                d = d.max(self.space.distance(a, b));
            }
        }
        d
    }

    /// True when `z` is a (reduced, for `k = 0`) cycle.
    pub fn is_cycle(&self, k: usize, z: &SparseBitVec) -> Result<bool> {
        if k > self.max_dim {
            return Err(Error::InvalidParameter(format!(
                "degree {k} above dimension cap {}",
                self.max_dim
            )));
        }
        Ok(self.boundaries[k].mul_vec(z)?.is_zero())
    }

    /// A `(k+1)`-chain `ω` with `∂ω = z`, using only simplices inside the
    /// locality ball `(center, radius)` when given. `Ok(None)` means no fill.
    pub fn fill_cycle(
        &self,
        k: usize,
        z: &SparseBitVec,
        locality: Option<(PointId, u32)>,
    ) -> Result<Option<SparseBitVec>> {
        if k + 1 > self.max_dim {
            return Err(Error::InvalidParameter(format!(
                "filling a {k}-cycle needs dimension cap at least {}",
                k + 1
            )));
        }
        if !self.is_cycle(k, z)? {
            return Err(Error::NotACycle);
        }
        if z.is_zero() {
            return Ok(Some(SparseBitVec::new()));
        }
        let cols: Vec<usize> = match locality {
            None => (0..self.count(k + 1)).collect(),
            Some((c, r)) => {
                let region = SubsetMask::from_ids(self.space.len(), self.space.ball(c, r)).intersection(&self.mask);
                self.simplices_within(k + 1, &region)
            }
        };
        Ok(self.solve_on_columns(k + 1, &cols, z))
    }

    /// Solves `∂_{k} x = z` using only the listed `k`-simplices.
    pub(crate) fn solve_on_columns(&self, k: usize, cols: &[usize], z: &SparseBitVec) -> Option<SparseBitVec> {
        let b = &self.boundaries[k];
        let sub = GF2Matrix::from_columns(b.rows(), cols.iter().map(|&j| b.column(j).clone()).collect())
            .expect("columns fit");
        let x = sub.solve(z).expect("shape checked")?;
        Some(SparseBitVec::from_indices(x.ones().map(|i| cols[i])))
    }

    /// One simplex tuple per line, vertices separated by spaces.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for k in 0..=self.max_dim {
            for s in self.simplices(k) {
                let parts: Vec<String> = s.iter().map(u32::to_string).collect();
                let _ = writeln!(out, "{}", parts.join(" "));
            }
        }
        out
    }
}

fn partition_point(n: usize, pred: impl Fn(usize) -> bool) -> usize {
    let (mut lo, mut hi) = (0, n);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if pred(mid) {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    lo
}

fn extend_cliques(
    up: &[Vec<PointId>],
    stack: &mut Vec<PointId>,
    cands: &[PointId],
    m: usize,
    out: &mut [Vec<PointId>],
) {
    out[stack.len() - 1].extend_from_slice(stack);
    if stack.len() > m {
        return;
    }
    for (i, &u) in cands.iter().enumerate() {
        let next: Vec<PointId> = cands[i + 1..]
            .iter()
            .copied()
            .filter(|w| up[u as usize].binary_search(w).is_ok())
            .collect();
        stack.push(u);
        extend_cliques(up, stack, &next, m, out);
        stack.pop();
    }
}

/// A chain map between Rips complexes, one matrix per dimension, with the
/// achieved displacement per dimension over the underlying point map.
#[derive(Clone, Debug, Serialize)]
pub struct ChainMap {
    #[serde(skip)]
    pub matrices: Vec<GF2Matrix>,
    pub displacement: Vec<u32>,
}

impl ChainMap {
    /// Verifies `∂ f = f ∂` in every dimension and `ε f_0 = ε`.
    pub fn check(&self, source: &RipsComplex, target: &RipsComplex) -> Result<()> {
        for (k, f) in self.matrices.iter().enumerate() {
            if f.cols() != source.count(k) || f.rows() != target.count(k) {
                return Err(Error::ShapeMismatch(format!("chain map in degree {k}")));
            }
            let lhs = target.boundary(k).mul(f)?;
            let rhs = if k == 0 {
                source.boundary(0).clone()
            } else {
                self.matrices[k - 1].mul(source.boundary(k))?
            };
            if lhs != rhs {
                return Err(Error::NotChainMap);
            }
        }
        Ok(())
    }

    pub fn apply(&self, k: usize, chain: &SparseBitVec) -> Result<SparseBitVec> {
        self.matrices
            .get(k)
            .ok_or_else(|| Error::InvalidParameter(format!("chain map has no degree {k}")))?
            .mul_vec(chain)
    }
}

/// The simplex-identity map from `k` into `l`.
pub fn inclusion_chain_map(k: &RipsComplex, l: &RipsComplex) -> Result<ChainMap> {
    if !Arc::ptr_eq(k.space(), l.space()) || !k.mask.is_subset(&l.mask) || k.scale > l.scale || k.max_dim > l.max_dim {
        return Err(Error::NotASubcomplex);
    }
    let mut matrices = Vec::with_capacity(k.max_dim + 1);
    for d in 0..=k.max_dim {
        let cols = par::map_range(k.count(d), |j| {
            l.index_of(k.simplex(d, j)).map(|i| SparseBitVec::from_indices([i]))
        });
        let cols = cols
            .into_iter()
            .collect::<Option<Vec<_>>>()
            .ok_or(Error::NotASubcomplex)?;
        matrices.push(GF2Matrix::from_columns(l.count(d), cols)?);
    }
    Ok(ChainMap {
        displacement: vec![0; k.max_dim + 1],
        matrices,
    })
}

/// Extends a vertex map `f` (source point id to target point id) to a chain
/// map from `k` into `target`, filling the image of each simplex boundary
/// locally. Each fill first tries simplices of diameter at most
/// `schedule[0]`, then `schedule[1]`, and so on; `target` must be built at
/// scale at least the last entry.
pub fn induced_chain_map(f: &[PointId], k: &RipsComplex, target: &RipsComplex, schedule: &[u32]) -> Result<ChainMap> {
    if schedule.is_empty() || schedule.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidParameter(
            "scale schedule must be non-empty and non-decreasing".into(),
        ));
    }
    if *schedule.last().expect("non-empty") > target.scale || target.max_dim < k.max_dim {
        return Err(Error::InvalidParameter(
            "target complex is coarser than the schedule allows".into(),
        ));
    }
    if f.len() != k.space.len() {
        return Err(Error::ShapeMismatch("point map must cover the source space".into()));
    }
    let tspace = target.space();
    let mut matrices = Vec::new();
    let mut displacement = Vec::new();

    let cols: Vec<SparseBitVec> = k
        .simplices(0)
        .map(|s| {
            target
                .index_of(&[f[s[0] as usize]])
                .map(|i| SparseBitVec::from_indices([i]))
                .ok_or(Error::ScheduleExhausted { simplex: s.to_vec() })
        })
        .collect::<Result<_>>()?;
    matrices.push(GF2Matrix::from_columns(target.count(0), cols)?);
    displacement.push(0);

    for d in 1..=k.max_dim {
        let prev = &matrices[d - 1];
        let results = par::map_range(k.count(d), |j| -> Result<(SparseBitVec, u32)> {
            let s = k.simplex(d, j);
            let image_boundary = prev.mul_vec(&k.boundary(d).column(j).clone())?;
            let base = f[s[0] as usize];
            let boundary_support = target.support(d - 1, &image_boundary);
            let reach = boundary_support
                .ids()
                .map(|x| tspace.distance(base, x))
                .max()
                .unwrap_or(0);
            for &scale in schedule {
                let region =
                    SubsetMask::from_ids(tspace.len(), tspace.ball(base, reach + scale)).intersection(target.mask());
                let cols: Vec<usize> = target
                    .simplices_within(d, &region)
                    .into_iter()
                    .filter(|&c| target.diameter_of(target.simplex(d, c)) <= scale)
                    .collect();
                if let Some(w) = target.solve_on_columns(d, &cols, &image_boundary) {
                    let disp = target
                        .support(d, &w)
                        .ids()
                        .map(|x| tspace.distance(base, x))
                        .max()
                        .unwrap_or(0);
                    return Ok((w, disp));
                }
            }
            Err(Error::ScheduleExhausted { simplex: s.to_vec() })
        });
        let mut cols = Vec::with_capacity(results.len());
        let mut disp = 0;
        for r in results {
            let (c, dd) = r?;
            disp = disp.max(dd);
            cols.push(c);
        }
        matrices.push(GF2Matrix::from_columns(target.count(d), cols)?);
        displacement.push(disp);
    }
    Ok(ChainMap { matrices, displacement })
}
