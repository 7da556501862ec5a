//! Sparse bit-packed linear algebra over GF(2).
//!
//! Vectors are stored as sorted lists of nonzero 64-bit blocks, so a chain
//! with a handful of simplices costs a handful of words regardless of the
//! ambient dimension. Elimination is column reduction with the lowest set
//! row as pivot (the persistence convention), which lets the same routine
//! serve rank, solve, kernels and the two-scale image computations.

use std::fmt;

use crate::error::{Error, Result};

const NO_PIVOT: u32 = u32::MAX;

/// A GF(2) vector stored as sorted `(block index, word)` pairs with no zero
/// words.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct SparseBitVec {
    blocks: Vec<(u32, u64)>,
}

impl fmt::Debug for SparseBitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.ones()).finish()
    }
}

impl SparseBitVec {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a vector from indices; repeated indices cancel in pairs.
    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I) -> Self {
        let mut idx: Vec<usize> = indices.into_iter().collect();
        idx.sort_unstable();
        let mut blocks: Vec<(u32, u64)> = Vec::new();
        for i in idx {
            let b = (i / 64) as u32;
            let bit = 1u64 << (i % 64);
            match blocks.last_mut() {
                Some((lb, w)) if *lb == b => *w ^= bit,
                _ => blocks.push((b, bit)),
            }
        }
        blocks.retain(|&(_, w)| w != 0);
        Self { blocks }
    }

    pub fn is_zero(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn get(&self, i: usize) -> bool {
        let b = (i / 64) as u32;
        match self.blocks.binary_search_by_key(&b, |&(k, _)| k) {
            Ok(pos) => self.blocks[pos].1 >> (i % 64) & 1 == 1,
            Err(_) => false,
        }
    }

    pub fn toggle(&mut self, i: usize) {
        let b = (i / 64) as u32;
        let bit = 1u64 << (i % 64);
        match self.blocks.binary_search_by_key(&b, |&(k, _)| k) {
            Ok(pos) => {
                self.blocks[pos].1 ^= bit;
                if self.blocks[pos].1 == 0 {
                    self.blocks.remove(pos);
                }
            }
            Err(pos) => self.blocks.insert(pos, (b, bit)),
        }
    }

    pub fn set(&mut self, i: usize, value: bool) {
        if self.get(i) != value {
            self.toggle(i);
        }
    }

    /// Highest set index.
    pub fn low(&self) -> Option<usize> {
        self.blocks
            .last()
            .map(|&(b, w)| b as usize * 64 + 63 - w.leading_zeros() as usize)
    }

    pub fn count_ones(&self) -> usize {
        self.blocks.iter().map(|&(_, w)| w.count_ones() as usize).sum()
    }

    /// Set indices in increasing order.
    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.blocks.iter().flat_map(|&(b, w)| {
            let base = b as usize * 64;
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let t = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(base + t)
            })
        })
    }

    pub fn xor_assign(&mut self, other: &SparseBitVec) {
        if other.blocks.is_empty() {
            return;
        }
        if self.blocks.is_empty() {
            self.blocks.clone_from(&other.blocks);
            return;
        }
        let mut out = Vec::with_capacity(self.blocks.len() + other.blocks.len());
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.blocks, &other.blocks);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    let w = a[i].1 ^ b[j].1;
                    if w != 0 {
                        out.push((a[i].0, w));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        self.blocks = out;
    }

    pub fn xor(&self, other: &SparseBitVec) -> SparseBitVec {
        let mut v = self.clone();
        v.xor_assign(other);
        v
    }

    /// Parity of the overlap, i.e. the GF(2) dot product.
    pub fn dot(&self, other: &SparseBitVec) -> bool {
        let (mut i, mut j) = (0, 0);
        let mut acc = 0u32;
        let (a, b) = (&self.blocks, &other.blocks);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    acc += (a[i].1 & b[j].1).count_ones();
                    i += 1;
                    j += 1;
                }
            }
        }
        acc % 2 == 1
    }

    /// True when every set index is below `n`.
    pub fn fits(&self, n: usize) -> bool {
        self.low().is_none_or(|l| l < n)
    }
}

/// A column-major sparse GF(2) matrix.
#[derive(Clone, PartialEq, Eq)]
pub struct GF2Matrix {
    rows: usize,
    cols: usize,
    columns: Vec<SparseBitVec>,
}

impl fmt::Debug for GF2Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "GF2Matrix {}x{}", self.rows, self.cols)?;
        for r in 0..self.rows.min(32) {
            let line: String = (0..self.cols.min(64))
                .map(|c| if self.get(r, c) { '1' } else { '.' })
                .collect();
            writeln!(f, "  {line}")?;
        }
        Ok(())
    }
}

impl GF2Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            columns: vec![SparseBitVec::new(); cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            rows: n,
            cols: n,
            columns: (0..n).map(|i| SparseBitVec::from_indices([i])).collect(),
        }
    }

    pub fn from_columns(rows: usize, columns: Vec<SparseBitVec>) -> Result<Self> {
        if let Some(bad) = columns.iter().position(|c| !c.fits(rows)) {
            return Err(Error::ShapeMismatch(format!(
                "column {bad} has an entry beyond row count {rows}"
            )));
        }
        Ok(Self {
            rows,
            cols: columns.len(),
            columns,
        })
    }

    /// Row-major dense input; `dense[r][c]`.
    pub fn from_dense(dense: &[Vec<bool>]) -> Result<Self> {
        let rows = dense.len();
        let cols = dense.first().map_or(0, |r| r.len());
        if dense.iter().any(|r| r.len() != cols) {
            return Err(Error::ShapeMismatch("ragged dense matrix".into()));
        }
        let columns = (0..cols)
            .map(|c| SparseBitVec::from_indices((0..rows).filter(|&r| dense[r][c])))
            .collect();
        Ok(Self { rows, cols, columns })
    }

    pub fn to_dense(&self) -> Vec<Vec<bool>> {
        let mut d = vec![vec![false; self.cols]; self.rows];
        for (c, col) in self.columns.iter().enumerate() {
            for r in col.ones() {
                d[r][c] = true;
            }
        }
        d
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn column(&self, j: usize) -> &SparseBitVec {
        &self.columns[j]
    }

    pub fn columns(&self) -> &[SparseBitVec] {
        &self.columns
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.columns[c].get(r)
    }

    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        assert!(r < self.rows && c < self.cols, "index out of range");
        self.columns[c].set(r, value);
    }

    pub fn push_column(&mut self, col: SparseBitVec) -> Result<()> {
        if !col.fits(self.rows) {
            return Err(Error::ShapeMismatch("column longer than row count".into()));
        }
        self.columns.push(col);
        self.cols += 1;
        Ok(())
    }

    pub fn nnz(&self) -> usize {
        self.columns.iter().map(SparseBitVec::count_ones).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.columns.iter().all(SparseBitVec::is_zero)
    }

    pub fn transpose(&self) -> GF2Matrix {
        let mut rows_out: Vec<Vec<usize>> = vec![Vec::new(); self.rows];
        for (c, col) in self.columns.iter().enumerate() {
            for r in col.ones() {
                rows_out[r].push(c);
            }
        }
        GF2Matrix {
            rows: self.cols,
            cols: self.rows,
            columns: rows_out.into_iter().map(SparseBitVec::from_indices).collect(),
        }
    }

    pub fn mul_vec(&self, v: &SparseBitVec) -> Result<SparseBitVec> {
        if !v.fits(self.cols) {
            return Err(Error::ShapeMismatch(format!(
                "vector does not fit {} columns",
                self.cols
            )));
        }
        let mut out = SparseBitVec::new();
        for j in v.ones() {
            out.xor_assign(&self.columns[j]);
        }
        Ok(out)
    }

    pub fn mul(&self, other: &GF2Matrix) -> Result<GF2Matrix> {
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let columns = other
            .columns
            .iter()
            .map(|c| self.mul_vec(c))
            .collect::<Result<Vec<_>>>()?;
        Ok(GF2Matrix {
            rows: self.rows,
            cols: other.cols,
            columns,
        })
    }

    /// Column reduction without bookkeeping.
    pub fn reduce(&self) -> Reduction {
        Reduction::run(self, false)
    }

    /// Column reduction that also records, for every reduced column, which
    /// original columns were summed to produce it.
    pub fn reduce_tracked(&self) -> Reduction {
        Reduction::run(self, true)
    }

    pub fn rank(&self) -> usize {
        self.reduce().rank()
    }

    /// Any `x` with `A x = b`, or `None` when the system is inconsistent.
    pub fn solve(&self, b: &SparseBitVec) -> Result<Option<SparseBitVec>> {
        if !b.fits(self.rows) {
            return Err(Error::ShapeMismatch(format!(
                "right-hand side does not fit {} rows",
                self.rows
            )));
        }
        Ok(self.reduce_tracked().solve(b))
    }

    pub fn kernel_basis(&self) -> GF2Subspace {
        self.reduce_tracked().kernel()
    }

    pub fn image_basis(&self) -> GF2Subspace {
        self.reduce().image()
    }

    /// Keep the listed rows (in the given order) and columns.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> GF2Matrix {
        let mut row_map = vec![usize::MAX; self.rows];
        for (new, &old) in rows.iter().enumerate() {
            row_map[old] = new;
        }
        let columns = cols
            .iter()
            .map(|&c| {
                SparseBitVec::from_indices(
                    self.columns[c]
                        .ones()
                        .filter_map(|r| (row_map[r] != usize::MAX).then_some(row_map[r])),
                )
            })
            .collect();
        GF2Matrix {
            rows: rows.len(),
            cols: cols.len(),
            columns,
        }
    }

    /// Stack `other` below `self`.
    pub fn vstack(&self, other: &GF2Matrix) -> Result<GF2Matrix> {
        if self.cols != other.cols {
            return Err(Error::ShapeMismatch("vstack column mismatch".into()));
        }
        let columns = self
            .columns
            .iter()
            .zip(&other.columns)
            .map(|(a, b)| {
                let mut v = a.clone();
                v.xor_assign(&SparseBitVec::from_indices(b.ones().map(|r| r + self.rows)));
                v
            })
            .collect();
        Ok(GF2Matrix {
            rows: self.rows + other.rows,
            cols: self.cols,
            columns,
        })
    }
}

/// Result of lowest-pivot column reduction.
#[derive(Clone, Debug)]
pub struct Reduction {
    rows: usize,
    reduced: Vec<SparseBitVec>,
    combos: Option<Vec<SparseBitVec>>,
    pivot_col: Vec<u32>,
}

impl Reduction {
    fn run(m: &GF2Matrix, track: bool) -> Reduction {
        let mut pivot_col = vec![NO_PIVOT; m.rows];
        let mut reduced: Vec<SparseBitVec> = Vec::with_capacity(m.cols);
        let mut combos: Option<Vec<SparseBitVec>> = track.then(|| Vec::with_capacity(m.cols));
        for (j, col) in m.columns.iter().enumerate() {
            let mut v = col.clone();
            let mut combo = track.then(|| SparseBitVec::from_indices([j]));
            while let Some(l) = v.low() {
                let p = pivot_col[l];
                if p == NO_PIVOT {
                    pivot_col[l] = j as u32;
                    break;
                }
                v.xor_assign(&reduced[p as usize]);
                if let (Some(c), Some(all)) = (combo.as_mut(), combos.as_ref()) {
                    c.xor_assign(&all[p as usize]);
                }
            }
            reduced.push(v);
            if let (Some(all), Some(c)) = (combos.as_mut(), combo) {
                all.push(c);
            }
        }
        Reduction {
            rows: m.rows,
            reduced,
            combos,
            pivot_col,
        }
    }

    pub fn rank(&self) -> usize {
        self.reduced.iter().filter(|c| !c.is_zero()).count()
    }

    pub fn solve(&self, b: &SparseBitVec) -> Option<SparseBitVec> {
        let combos = self.combos.as_ref().expect("solve requires a tracked reduction");
        let mut v = b.clone();
        let mut x = SparseBitVec::new();
        while let Some(l) = v.low() {
            if l >= self.rows {
                return None;
            }
            let p = self.pivot_col[l];
            if p == NO_PIVOT {
                return None;
            }
            v.xor_assign(&self.reduced[p as usize]);
            x.xor_assign(&combos[p as usize]);
        }
        Some(x)
    }

    pub fn kernel(&self) -> GF2Subspace {
        let combos = self.combos.as_ref().expect("kernel requires a tracked reduction");
        let mut sub = GF2Subspace::new(self.reduced.len());
        for (c, combo) in self.reduced.iter().zip(combos) {
            if c.is_zero() {
                sub.insert(combo.clone());
            }
        }
        sub
    }

    pub fn image(&self) -> GF2Subspace {
        let mut sub = GF2Subspace::new(self.rows);
        for c in &self.reduced {
            if !c.is_zero() {
                sub.insert(c.clone());
            }
        }
        sub
    }
}

/// A subspace of GF(2)^n held as an echelon basis (distinct lowest entries).
#[derive(Clone, Debug)]
pub struct GF2Subspace {
    ambient: usize,
    basis: Vec<SparseBitVec>,
    pivot: std::collections::HashMap<usize, usize>,
}

impl GF2Subspace {
    pub fn new(ambient: usize) -> Self {
        Self {
            ambient,
            basis: Vec::new(),
            pivot: Default::default(),
        }
    }

    pub fn spanned_by<I: IntoIterator<Item = SparseBitVec>>(ambient: usize, vectors: I) -> Self {
        let mut s = Self::new(ambient);
        for v in vectors {
            s.insert(v);
        }
        s
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[SparseBitVec] {
        &self.basis
    }

    /// Remainder of `v` after elimination against the basis; zero iff `v`
    /// lies in the subspace.
    pub fn reduce(&self, v: &SparseBitVec) -> SparseBitVec {
        let mut v = v.clone();
        while let Some(l) = v.low() {
            match self.pivot.get(&l) {
                Some(&i) => v.xor_assign(&self.basis[i]),
                None => break,
            }
        }
        v
    }

    pub fn contains(&self, v: &SparseBitVec) -> bool {
        self.reduce(v).is_zero()
    }

    /// Adds `v` if independent of the current basis; returns whether it was.
    pub fn insert(&mut self, v: SparseBitVec) -> bool {
        let r = self.reduce(&v);
        match r.low() {
            None => false,
            Some(l) => {
                self.pivot.insert(l, self.basis.len());
                self.basis.push(r);
                true
            }
        }
    }
}

/// Outcome of a two-scale image computation.
#[derive(Clone, Debug)]
pub struct QuotientImage {
    /// Rank of `(f(Z_k(inner)) + B_k(outer)) / B_k(outer)`.
    pub rank: usize,
    /// Inner cycles whose images form a basis of the image.
    pub representatives: Vec<SparseBitVec>,
}

/// Rank of the map on reduced homology induced by a chain map, in one degree.
///
/// * `inner_boundary` — boundary of the inner complex in degree k (augmented
///   with the all-ones row when k = 0 so that cycles are reduced cycles).
/// * `outer_boundary` — the same for the outer complex, used to confirm the
///   map sends cycles to cycles.
/// * `outer_fill` — boundary of the outer complex in degree k + 1.
/// * `map` — the chain map in degree k, outer k-chains by inner k-chains.
pub fn quotient_image_rank(
    inner_boundary: &GF2Matrix,
    outer_boundary: &GF2Matrix,
    outer_fill: &GF2Matrix,
    map: &GF2Matrix,
) -> Result<QuotientImage> {
    if map.cols() != inner_boundary.cols() || map.rows() != outer_fill.rows() || map.rows() != outer_boundary.cols() {
        return Err(Error::ShapeMismatch(format!(
            "map {}x{}, inner boundary {}x{}, outer boundary {}x{}, outer fill {}x{}",
            map.rows(),
            map.cols(),
            inner_boundary.rows(),
            inner_boundary.cols(),
            outer_boundary.rows(),
            outer_boundary.cols(),
            outer_fill.rows(),
            outer_fill.cols()
        )));
    }
    let cycles = inner_boundary.kernel_basis();
    let mut span = outer_fill.image_basis();
    let mut reps = Vec::new();
    for z in cycles.basis() {
        let image = map.mul_vec(z)?;
        if !outer_boundary.mul_vec(&image)?.is_zero() {
            return Err(Error::NotChainMap);
        }
        if span.insert(image) {
            reps.push(z.clone());
        }
    }
    Ok(QuotientImage {
        rank: reps.len(),
        representatives: reps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bitvec_basics() {
        let mut v = SparseBitVec::from_indices([3, 64, 200, 3]);
        assert_eq!(v.ones().collect::<Vec<_>>(), vec![64, 200]);
        assert_eq!(v.low(), Some(200));
        v.toggle(200);
        assert_eq!(v.low(), Some(64));
        v.toggle(64);
        assert!(v.is_zero());
        assert_eq!(v.low(), None);
    }

    #[test]
    fn xor_and_dot() {
        let a = SparseBitVec::from_indices([1, 2, 130]);
        let b = SparseBitVec::from_indices([2, 130, 131]);
        assert_eq!(a.xor(&b).ones().collect::<Vec<_>>(), vec![1, 131]);
        assert!(!a.dot(&b));
        assert!(a.dot(&SparseBitVec::from_indices([1])));
    }

    #[test]
    fn identity_rank() {
        assert_eq!(GF2Matrix::identity(3).rank(), 3);
    }

    #[test]
    fn solve_zero_rhs() {
        let m = GF2Matrix::from_dense(&[vec![true, true], vec![true, true]]).unwrap();
        let x = m.solve(&SparseBitVec::new()).unwrap().unwrap();
        assert!(m.mul_vec(&x).unwrap().is_zero());
    }

    #[test]
    fn inconsistent_system() {
        let m = GF2Matrix::from_dense(&[vec![true, true], vec![true, true]]).unwrap();
        assert!(m.solve(&SparseBitVec::from_indices([0])).unwrap().is_none());
        assert!(m.solve(&SparseBitVec::from_indices([0, 1])).unwrap().is_some());
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let m = GF2Matrix::identity(2);
        assert!(matches!(
            m.solve(&SparseBitVec::from_indices([5])),
            Err(Error::ShapeMismatch(_))
        ));
        assert!(m.mul(&GF2Matrix::identity(3)).is_err());
    }

    #[test]
    fn kernel_of_path_boundary() {
        // Triangle graph: three vertices, three edges; one independent cycle.
        let d1 = GF2Matrix::from_columns(
            3,
            vec![
                SparseBitVec::from_indices([0, 1]),
                SparseBitVec::from_indices([1, 2]),
                SparseBitVec::from_indices([0, 2]),
            ],
        )
        .unwrap();
        let k = d1.kernel_basis();
        assert_eq!(k.dim(), 1);
        assert_eq!(k.basis()[0].count_ones(), 3);
        assert_eq!(d1.rank() + k.dim(), d1.cols());
    }

    #[test]
    fn quotient_identity_is_homology() {
        // Hollow triangle: H_1 has rank 1, nothing fills it.
        let d1 = GF2Matrix::from_columns(
            3,
            vec![
                SparseBitVec::from_indices([0, 1]),
                SparseBitVec::from_indices([1, 2]),
                SparseBitVec::from_indices([0, 2]),
            ],
        )
        .unwrap();
        let fill = GF2Matrix::zeros(3, 0);
        let q = quotient_image_rank(&d1, &d1, &fill, &GF2Matrix::identity(3)).unwrap();
        assert_eq!(q.rank, 1);
        // Filled triangle kills it.
        let fill = GF2Matrix::from_columns(3, vec![SparseBitVec::from_indices([0, 1, 2])]).unwrap();
        let q = quotient_image_rank(&d1, &d1, &fill, &GF2Matrix::identity(3)).unwrap();
        assert_eq!(q.rank, 0);
    }

    #[test]
    fn non_chain_map_rejected() {
        let d1 = GF2Matrix::from_columns(
            3,
            vec![
                SparseBitVec::from_indices([0, 1]),
                SparseBitVec::from_indices([1, 2]),
                SparseBitVec::from_indices([0, 2]),
            ],
        )
        .unwrap();
        // Sends the cycle to a single edge, which is not a cycle.
        let mut bad = GF2Matrix::zeros(3, 3);
        bad.set(0, 0, true);
        let fill = GF2Matrix::zeros(3, 0);
        assert_eq!(
            quotient_image_rank(&d1, &d1, &fill, &bad).unwrap_err(),
            Error::NotChainMap
        );
    }
}
