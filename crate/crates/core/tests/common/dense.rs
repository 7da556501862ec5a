//! Textbook dense Gauss-Jordan elimination over GF(2), used as an oracle.

#![allow(dead_code)]

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dense {
    pub rows: usize,
    pub cols: usize,
    words: usize,
    data: Vec<Vec<u64>>,
}

impl Dense {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let words = cols.div_ceil(64).max(1);
        Self {
            rows,
            cols,
            words,
            data: vec![vec![0; words]; rows],
        }
    }

    pub fn from_bools(m: &[Vec<bool>], cols: usize) -> Self {
        let mut d = Self::zeros(m.len(), cols);
        for (r, row) in m.iter().enumerate() {
            for (c, &b) in row.iter().enumerate() {
                if b {
                    d.set(r, c);
                }
            }
        }
        d
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.data[r][c / 64] >> (c % 64) & 1 == 1
    }

    pub fn set(&mut self, r: usize, c: usize) {
        self.data[r][c / 64] |= 1 << (c % 64);
    }

    pub fn flip(&mut self, r: usize, c: usize) {
        self.data[r][c / 64] ^= 1 << (c % 64);
    }

    fn xor_row(&mut self, dst: usize, src: usize) {
        for w in 0..self.words {
            let v = self.data[src][w];
            self.data[dst][w] ^= v;
        }
    }

    /// Reduced row echelon form and pivot columns.
    pub fn rref(&self) -> (Dense, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            let Some(p) = (row..m.rows).find(|&r| m.get(r, col)) else {
                continue;
            };
            m.data.swap(row, p);
            for r in 0..m.rows {
                if r != row && m.get(r, col) {
                    m.xor_row(r, row);
                }
            }
            pivots.push(col);
            row += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    pub fn mul(&self, x: &[bool]) -> Vec<bool> {
        (0..self.rows)
            .map(|r| (0..self.cols).filter(|&c| x[c] && self.get(r, c)).count() % 2 == 1)
            .collect()
    }

    /// Some solution of `A x = b`, or `None`.
    pub fn solve(&self, b: &[bool]) -> Option<Vec<bool>> {
        let mut aug = Dense::zeros(self.rows, self.cols + 1);
        for (r, &br) in b.iter().enumerate().take(self.rows) {
            for c in 0..self.cols {
                if self.get(r, c) {
                    aug.set(r, c);
                }
            }
            if br {
                aug.set(r, self.cols);
            }
        }
        let (red, pivots) = aug.rref();
        if pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![false; self.cols];
        for (i, &p) in pivots.iter().enumerate() {
            x[p] = red.get(i, self.cols);
        }
        Some(x)
    }

    /// Basis of the null space, one vector per free column.
    pub fn kernel(&self) -> Vec<Vec<bool>> {
        let (red, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![false; self.cols];
                v[f] = true;
                for (i, &p) in pivots.iter().enumerate() {
                    if red.get(i, f) {
                        v[p] = true;
                    }
                }
                v
            })
            .collect()
    }
}

/// Canonical basis (reduced echelon rows) of the span of `vs`.
pub fn canonical_span(vs: &[Vec<bool>], n: usize) -> Vec<Vec<bool>> {
    let m = Dense::from_bools(vs, n);
    let (red, pivots) = m.rref();
    (0..pivots.len())
        .map(|r| (0..n).map(|c| red.get(r, c)).collect())
        .collect()
}

/// Unique representative of `x` modulo the span whose canonical basis is
/// `basis`.
pub fn reduce_mod(x: &[bool], basis: &[Vec<bool>]) -> Vec<bool> {
    let mut x = x.to_vec();
    for row in basis {
        let p = row.iter().position(|&b| b).expect("canonical rows are nonzero");
        if x[p] {
            for (xi, &ri) in x.iter_mut().zip(row) {
                *xi ^= ri;
            }
        }
    }
    x
}
