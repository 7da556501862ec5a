//! Relative cochains on Rips complexes.
//!
//! A [`RelativeCochains`] selects the simplices of a [`RipsComplex`] that lie
//! in a region and are not contained in the collar; cochains on it model
//! compactly supported cochains of the region at window scale. Vectors passed
//! in and out of this module are indexed by the ambient complex's simplex
//! order, so restriction between regions is just filtering.

use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gf2::{GF2Matrix, GF2Subspace, SparseBitVec};
use crate::metric::{PointId, SubsetMask};
use crate::rips::RipsComplex;

const NONE: u32 = u32::MAX;

/// Cochains on the simplices of a complex inside `region` and not inside
/// the collar.
pub struct RelativeCochains<'a> {
    complex: &'a RipsComplex,
    region: SubsetMask,
    collar: SubsetMask,
    cells: Vec<Vec<usize>>,
    local: Vec<Vec<u32>>,
    delta: Vec<OnceLock<GF2Matrix>>,
}

impl<'a> RelativeCochains<'a> {
    /// Relative to the collar of width `collar_width`; width 0 gives
    /// absolute cochains on the region.
    pub fn new(complex: &'a RipsComplex, region: &SubsetMask, collar_width: u32) -> Result<Self> {
        let space = complex.space();
        space.check_mask(region)?;
        let collar = if collar_width == 0 {
            space.empty_mask()
        } else {
            space.collar(collar_width)
        };
        let region = region.intersection(complex.mask());
        let mut cells = Vec::with_capacity(complex.max_dim() + 1);
        let mut local = Vec::with_capacity(complex.max_dim() + 1);
        for k in 0..=complex.max_dim() {
            let mut map = vec![NONE; complex.count(k)];
            let mut list = Vec::new();
            for (j, s) in complex.simplices(k).enumerate() {
                if s.iter().all(|&v| region.contains(v)) && !s.iter().all(|&v| collar.contains(v)) {
                    map[j] = list.len() as u32;
                    list.push(j);
                }
            }
            cells.push(list);
            local.push(map);
        }
        Ok(Self {
            complex,
            region,
            collar,
            delta: (0..complex.max_dim()).map(|_| OnceLock::new()).collect(),
            cells,
            local,
        })
    }

    pub fn complex(&self) -> &'a RipsComplex {
        self.complex
    }

    pub fn region(&self) -> &SubsetMask {
        &self.region
    }

    pub fn collar(&self) -> &SubsetMask {
        &self.collar
    }

    pub fn max_dim(&self) -> usize {
        self.complex.max_dim()
    }

    pub fn dim(&self, k: usize) -> usize {
        self.cells.get(k).map_or(0, Vec::len)
    }

    /// Ambient indices of the `k`-cells.
    pub fn cells(&self, k: usize) -> &[usize] {
        &self.cells[k]
    }

    pub fn contains(&self, k: usize, ambient: usize) -> bool {
        self.local[k][ambient] != NONE
    }

    /// Drops entries outside the cells.
    pub fn restrict(&self, k: usize, v: &SparseBitVec) -> SparseBitVec {
        SparseBitVec::from_indices(v.ones().filter(|&j| self.contains(k, j)))
    }

    fn to_local(&self, k: usize, v: &SparseBitVec) -> SparseBitVec {
        SparseBitVec::from_indices(
            v.ones()
                .filter(|&j| self.local[k][j] != NONE)
                .map(|j| self.local[k][j] as usize),
        )
    }

    fn to_ambient(&self, k: usize, v: &SparseBitVec) -> SparseBitVec {
        SparseBitVec::from_indices(v.ones().map(|i| self.cells[k][i]))
    }

    /// `δ_k` in local coordinates, `(k+1)`-cells by `k`-cells.
    pub fn delta(&self, k: usize) -> &GF2Matrix {
        self.delta[k].get_or_init(|| {
            let mut cols: Vec<Vec<usize>> = vec![Vec::new(); self.dim(k)];
            let b = self.complex.boundary(k + 1);
            for (t_local, &t) in self.cells[k + 1].iter().enumerate() {
                for f in b.column(t).ones() {
                    let l = self.local[k][f];
                    if l != NONE {
                        cols[l as usize].push(t_local);
                    }
                }
            }
            GF2Matrix::from_columns(
                self.dim(k + 1),
                cols.into_iter().map(SparseBitVec::from_indices).collect(),
            )
            .expect("coface indices fit")
        })
    }

    fn check_degree(&self, k: usize) -> Result<()> {
        if k >= self.max_dim() {
            return Err(Error::InvalidParameter(format!(
                "coboundary in degree {k} needs dimension cap at least {}",
                k + 1
            )));
        }
        Ok(())
    }

    /// `δ` of the ambient cochain `v` evaluated on the `(k+1)`-cells; entries
    /// of `v` outside the cells still count, which is extension by zero
    /// from wherever `v` was defined.
    pub fn coboundary(&self, k: usize, v: &SparseBitVec) -> Result<SparseBitVec> {
        self.check_degree(k)?;
        let b = self.complex.boundary(k + 1);
        Ok(SparseBitVec::from_indices(self.cells[k + 1].iter().copied().filter(
            |&t| b.column(t).ones().filter(|&f| v.get(f)).count() % 2 == 1,
        )))
    }

    /// Whether the restriction of `v` to the cells is a cocycle here.
    pub fn is_cocycle(&self, k: usize, v: &SparseBitVec) -> Result<bool> {
        Ok(self.coboundary(k, &self.restrict(k, v))?.is_zero())
    }

    /// Vertices of the simplices where `v` is nonzero.
    pub fn support(&self, k: usize, v: &SparseBitVec) -> SubsetMask {
        self.complex.support(k, v)
    }

    /// A cochain `β` on the `(k-1)`-cells with `v + δβ` vanishing on every
    /// `k`-cell not contained in `allowed`, or `None`.
    pub fn represent_within(&self, k: usize, v: &SparseBitVec, allowed: &SubsetMask) -> Result<Option<Representation>> {
        if k > self.max_dim() {
            return Err(Error::InvalidParameter(format!("degree {k} above dimension cap")));
        }
        let v = self.restrict(k, v);
        let outside: Vec<usize> = (0..self.dim(k))
            .filter(|&i| {
                !self
                    .complex
                    .simplex(k, self.cells[k][i])
                    .iter()
                    .all(|&x| allowed.contains(x))
            })
            .collect();
        let lv = self.to_local(k, &v);
        let mut pos = vec![usize::MAX; self.dim(k)];
        for (n, &i) in outside.iter().enumerate() {
            pos[i] = n;
        }
        let rhs = SparseBitVec::from_indices(lv.ones().filter(|&i| pos[i] != usize::MAX).map(|i| pos[i]));
        let beta_local = if k == 0 {
            if !rhs.is_zero() {
                return Ok(None);
            }
            SparseBitVec::new()
        } else {
            let cols: Vec<usize> = (0..self.dim(k - 1)).collect();
            let m = self.delta(k - 1).submatrix(&outside, &cols);
            match m.solve(&rhs)? {
                Some(x) => x,
                None => return Ok(None),
            }
        };
        let mut witness = lv;
        if k > 0 {
            witness.xor_assign(&self.delta(k - 1).mul_vec(&beta_local)?);
        }
        Ok(Some(Representation {
            beta: if k == 0 {
                SparseBitVec::new()
            } else {
                self.to_ambient(k - 1, &beta_local)
            },
            witness: self.to_ambient(k, &witness),
        }))
    }

    /// `β` with `δβ = v` on the cells, or `None` when `v` is not a coboundary.
    pub fn coboundary_preimage(&self, k: usize, v: &SparseBitVec) -> Result<Option<SparseBitVec>> {
        let empty = SubsetMask::empty(self.complex.space().len());
        Ok(self.represent_within(k, v, &empty)?.map(|r| r.beta))
    }

    pub fn is_coboundary(&self, k: usize, v: &SparseBitVec) -> Result<bool> {
        Ok(self.coboundary_preimage(k, v)?.is_some())
    }

    /// Echelon basis of the degree-`k` coboundaries, ambient coordinates.
    pub fn coboundary_space(&self, k: usize) -> GF2Subspace {
        let ambient = self.complex.count(k);
        if k == 0 {
            return GF2Subspace::new(ambient);
        }
        GF2Subspace::spanned_by(
            ambient,
            self.delta(k - 1)
                .image_basis()
                .basis()
                .iter()
                .map(|b| self.to_ambient(k, b)),
        )
    }

    /// Cocycles, coboundaries and class representatives in degree `k`.
    pub fn cohomology(&self, k: usize) -> Result<Cohomology> {
        self.check_degree(k)?;
        let cocycles: Vec<SparseBitVec> = self
            .delta(k)
            .kernel_basis()
            .basis()
            .iter()
            .map(|z| self.to_ambient(k, z))
            .collect();
        let coboundaries: Vec<SparseBitVec> = if k == 0 {
            Vec::new()
        } else {
            self.delta(k - 1)
                .image_basis()
                .basis()
                .iter()
                .map(|b| self.to_ambient(k, b))
                .collect()
        };
        let ambient = self.complex.count(k);
        let mut span = GF2Subspace::spanned_by(ambient, coboundaries.iter().cloned());
        let boundary_dim = span.dim();
        let representatives = cocycles.iter().filter(|z| span.insert((*z).clone())).cloned().collect();
        Ok(Cohomology {
            degree: k,
            ambient,
            cocycle_dim: cocycles.len(),
            coboundary_dim: boundary_dim,
            coboundaries,
            representatives,
        })
    }

    /// `Ω = δ(φ)` extended by zero, for a cocycle `φ` on the cells inside
    /// `annulus` with `φ(z) = 1`. Nonzero in cohomology whenever `z` is a
    /// `d`-cycle of the annulus that does not bound there and the collar
    /// sits inside the annulus.
    pub fn dual_class(&self, d: usize, annulus: &SubsetMask, z: &SparseBitVec) -> Result<Option<SparseBitVec>> {
        self.check_degree(d)?;
        let a = RelativeCochains::new(self.complex, annulus, 0)?;
        a.check_degree(d)?;
        let zl = a.to_local(d, z);
        if zl.count_ones() != z.count_ones() {
            return Err(Error::NotASubcomplex);
        }
        let last = a.dim(d + 1);
        let cols: Vec<SparseBitVec> = (0..a.dim(d))
            .map(|c| {
                let mut col = a.delta(d).column(c).clone();
                if zl.get(c) {
                    col.toggle(last);
                }
                col
            })
            .collect();
        let m = GF2Matrix::from_columns(last + 1, cols)?;
        let Some(phi) = m.solve(&SparseBitVec::from_indices([last]))? else {
            return Ok(None);
        };
        Ok(Some(self.coboundary(d, &a.to_ambient(d, &phi))?))
    }
}

/// Solution of a support-constrained representation problem.
#[derive(Clone, Debug)]
pub struct Representation {
    pub beta: SparseBitVec,
    /// `v + δβ`.
    pub witness: SparseBitVec,
}

/// Degree-`k` cohomology of a [`RelativeCochains`], all vectors ambient.
#[derive(Clone, Debug)]
pub struct Cohomology {
    pub degree: usize,
    pub ambient: usize,
    pub cocycle_dim: usize,
    pub coboundary_dim: usize,
    pub coboundaries: Vec<SparseBitVec>,
    /// Cocycles completing a coboundary basis to a cocycle basis.
    pub representatives: Vec<SparseBitVec>,
}

impl Cohomology {
    pub fn rank(&self) -> usize {
        self.representatives.len()
    }

    /// Coordinates of a cocycle against the representatives, or `None` if
    /// `v` is not in the span of cocycles.
    pub fn coordinates(&self, v: &SparseBitVec) -> Option<Vec<bool>> {
        let cols: Vec<SparseBitVec> = self.coboundaries.iter().chain(&self.representatives).cloned().collect();
        let m = GF2Matrix::from_columns(self.ambient, cols).ok()?;
        let x = m.solve(v).ok()??;
        let off = self.coboundaries.len();
        Some((0..self.representatives.len()).map(|i| x.get(off + i)).collect())
    }
}

/// A cocycle with its support data, for reports.
#[derive(Clone, Debug, Serialize)]
pub struct Cocycle {
    pub degree: usize,
    #[serde(skip)]
    pub values: SparseBitVec,
    pub simplices: Vec<Vec<PointId>>,
    pub support: SubsetMask,
    pub diameter: u32,
}

impl Cocycle {
    pub fn new(complex: &RipsComplex, degree: usize, values: SparseBitVec) -> Self {
        let support = complex.support(degree, &values);
        Cocycle {
            degree,
            simplices: values.ones().map(|j| complex.simplex(degree, j).to_vec()).collect(),
            diameter: complex.space().diameter(&support),
            support,
            values,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_zero()
    }
}

/// `δ(1_S)` on the edges of `cochains`: the edges with exactly one endpoint
/// in `s`.
pub fn indicator_coboundary(cochains: &RelativeCochains<'_>, s: &SubsetMask) -> Result<SparseBitVec> {
    let k = cochains.complex();
    let ind = SparseBitVec::from_indices(s.ids().filter_map(|v| k.index_of(&[v])));
    cochains.coboundary(0, &ind)
}
