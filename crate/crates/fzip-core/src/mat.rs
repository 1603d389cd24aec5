//! Dense row-major matrices over a finite field, with the exact linear
//! algebra the rest of the workspace leans on: reduced row echelon form with
//! a fixed pivot rule (leftmost column, first usable row), kernel and column
//! space bases, consistent-system solving, and basis extension. Everything
//! here is deterministic: the same input always produces the same basis, and
//! echelonized column-space bases are canonical for the subspace they span,
//! so span equality can be tested by data equality.

use crate::gf::Field;

#[derive(Clone, PartialEq)]
pub struct Mat {
    field: Field,
    rows: usize,
    cols: usize,
    data: Vec<u16>,
}

impl std::fmt::Debug for Mat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "Mat {}x{} over {:?}", self.rows, self.cols, self.field)?;
        for i in 0..self.rows {
            write!(f, "  [")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", self[(i, j)])?;
            }
            writeln!(f, "]")?;
        }
        Ok(())
    }
}

impl std::ops::Index<(usize, usize)> for Mat {
    type Output = u16;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &u16 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Mat {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut u16 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Mat {
    pub fn zeros(field: &Field, rows: usize, cols: usize) -> Self {
        Mat {
            field: field.clone(),
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(field: &Field, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m[(i, i)] = 1;
        }
        m
    }

    pub fn from_rows(field: &Field, rows: &[Vec<u16>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let mut m = Self::zeros(field, r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged rows");
            for (j, &v) in row.iter().enumerate() {
                assert!((v as u32) < field.q(), "entry out of field range");
                m[(i, j)] = v;
            }
        }
        m
    }

    pub fn from_fn(field: &Field, rows: usize, cols: usize, f: impl Fn(usize, usize) -> u16) -> Self {
        let mut m = Self::zeros(field, rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn field(&self) -> &Field {
        &self.field
    }
    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }
    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    pub fn add(&self, other: &Mat) -> Mat {
        assert_eq!(self.field, other.field);
        assert!(self.rows == other.rows && self.cols == other.cols, "shape mismatch in add");
        let mut out = self.clone();
        for (a, &b) in out.data.iter_mut().zip(&other.data) {
            *a = self.field.add(*a, b);
        }
        out
    }

    pub fn sub(&self, other: &Mat) -> Mat {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Mat {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a = self.field.neg(*a);
        }
        out
    }

    pub fn scale(&self, c: u16) -> Mat {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a = self.field.mul(*a, c);
        }
        out
    }

    /// Entrywise transform; used for Frobenius twists.
    pub fn map_entries(&self, f: impl Fn(u16) -> u16) -> Mat {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a = f(*a);
        }
        out
    }

    pub fn mul(&self, other: &Mat) -> Mat {
        assert_eq!(self.field, other.field);
        assert!(self.cols == other.rows, "shape mismatch in mul: {}x{} * {}x{}",
            self.rows, self.cols, other.rows, other.cols);
        let f = &self.field;
        let mut out = Mat::zeros(f, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    let t = f.mul(a, other[(k, j)]);
                    out[(i, j)] = f.add(out[(i, j)], t);
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> Mat {
        let mut out = Mat::zeros(&self.field, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)];
            }
        }
        out
    }

    pub fn hstack(&self, other: &Mat) -> Mat {
        assert_eq!(self.field, other.field);
        assert_eq!(self.rows, other.rows, "hstack row mismatch");
        Mat::from_fn(&self.field, self.rows, self.cols + other.cols, |i, j| {
            if j < self.cols {
                self[(i, j)]
            } else {
                other[(i, j - self.cols)]
            }
        })
    }

    pub fn vstack(&self, other: &Mat) -> Mat {
        assert_eq!(self.field, other.field);
        assert_eq!(self.cols, other.cols, "vstack col mismatch");
        Mat::from_fn(&self.field, self.rows + other.rows, self.cols, |i, j| {
            if i < self.rows {
                self[(i, j)]
            } else {
                other[(i - self.rows, j)]
            }
        })
    }

    /// Assemble from a grid of blocks. Row heights and column widths are read
    /// off the first block of each grid row/column and must be consistent.
    pub fn from_blocks(field: &Field, grid: &[Vec<&Mat>]) -> Mat {
        let row_heights: Vec<usize> = grid.iter().map(|r| r[0].rows).collect();
        let col_widths: Vec<usize> =
            grid.first().map_or(Vec::new(), |r| r.iter().map(|b| b.cols).collect());
        let total_r: usize = row_heights.iter().sum();
        let total_c: usize = col_widths.iter().sum();
        let mut out = Mat::zeros(field, total_r, total_c);
        let mut roff = 0;
        for (bi, row) in grid.iter().enumerate() {
            assert_eq!(row.len(), col_widths.len(), "ragged block grid");
            let mut coff = 0;
            for (bj, blk) in row.iter().enumerate() {
                assert_eq!(blk.rows, row_heights[bi], "block height mismatch");
                assert_eq!(blk.cols, col_widths[bj], "block width mismatch");
                for i in 0..blk.rows {
                    for j in 0..blk.cols {
                        out[(roff + i, coff + j)] = blk[(i, j)];
                    }
                }
                coff += blk.cols;
            }
            roff += row_heights[bi];
        }
        out
    }

    pub fn block_diag(field: &Field, blocks: &[&Mat]) -> Mat {
        let total_r: usize = blocks.iter().map(|b| b.rows).sum();
        let total_c: usize = blocks.iter().map(|b| b.cols).sum();
        let mut out = Mat::zeros(field, total_r, total_c);
        let (mut roff, mut coff) = (0, 0);
        for b in blocks {
            for i in 0..b.rows {
                for j in 0..b.cols {
                    out[(roff + i, coff + j)] = b[(i, j)];
                }
            }
            roff += b.rows;
            coff += b.cols;
        }
        out
    }

    /// Kronecker product; index (i1*b.rows + i2, j1*b.cols + j2) holds
    /// a[i1,j1] * b[i2,j2], matching the basis order e_j (x) f_k.
    pub fn kronecker(&self, other: &Mat) -> Mat {
        assert_eq!(self.field, other.field);
        let f = &self.field;
        Mat::from_fn(
            f,
            self.rows * other.rows,
            self.cols * other.cols,
            |i, j| {
                let (i1, i2) = (i / other.rows, i % other.rows);
                let (j1, j2) = (j / other.cols, j % other.cols);
                f.mul(self[(i1, j1)], other[(i2, j2)])
            },
        )
    }

    pub fn select_cols(&self, idx: &[usize]) -> Mat {
        Mat::from_fn(&self.field, self.rows, idx.len(), |i, j| self[(i, idx[j])])
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Mat {
        Mat::from_fn(&self.field, rows.len(), cols.len(), |i, j| self[(rows[i], cols[j])])
    }

    /// i-th compound matrix: entries are the i x i minors, with row and
    /// column index sets enumerated in lexicographic order. This is the
    /// matrix of the i-th exterior power of the map.
    pub fn compound(&self, i: usize) -> Mat {
        let rsets = subsets(self.rows, i);
        let csets = subsets(self.cols, i);
        Mat::from_fn(&self.field, rsets.len(), csets.len(), |r, c| {
            self.submatrix(&rsets[r], &csets[c]).det()
        })
    }

    pub fn col(&self, j: usize) -> Mat {
        self.select_cols(&[j])
    }

    // ==================================================================
    // echelon machinery
    // ==================================================================

    /// In-place reduced row echelon form; returns pivot column indices.
    /// Pivot rule: scan columns left to right, take the first row at or
    /// below the current rank with a nonzero entry.
    pub fn rref(&self) -> (Mat, Vec<usize>) {
        let f = self.field.clone();
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut rank = 0;
        for col in 0..m.cols {
            let mut sel = None;
            for row in rank..m.rows {
                if m[(row, col)] != 0 {
                    sel = Some(row);
                    break;
                }
            }
            let Some(sel) = sel else { continue };
            if sel != rank {
                for j in 0..m.cols {
                    let t = m[(sel, j)];
                    m[(sel, j)] = m[(rank, j)];
                    m[(rank, j)] = t;
                }
            }
            let inv = f.inv(m[(rank, col)]).unwrap();
            for j in 0..m.cols {
                m[(rank, j)] = f.mul(m[(rank, j)], inv);
            }
            for row in 0..m.rows {
                if row == rank {
                    continue;
                }
                let c = m[(row, col)];
                if c == 0 {
                    continue;
                }
                for j in 0..m.cols {
                    let t = f.mul(c, m[(rank, j)]);
                    m[(row, j)] = f.sub(m[(row, j)], t);
                }
            }
            pivots.push(col);
            rank += 1;
            if rank == m.rows {
                break;
            }
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Columns form a basis of the kernel, in free-column order with the
    /// free coordinate normalized to 1.
    pub fn kernel_basis(&self) -> Mat {
        let (r, pivots) = self.rref();
        let f = &self.field;
        let is_pivot: Vec<bool> = {
            let mut v = vec![false; self.cols];
            for &p in &pivots {
                v[p] = true;
            }
            v
        };
        let free: Vec<usize> = (0..self.cols).filter(|&j| !is_pivot[j]).collect();
        let mut out = Mat::zeros(f, self.cols, free.len());
        for (k, &fc) in free.iter().enumerate() {
            out[(fc, k)] = 1;
            for (pi, &pc) in pivots.iter().enumerate() {
                out[(pc, k)] = f.neg(r[(pi, fc)]);
            }
        }
        out
    }

    /// Canonical (echelonized) basis of the column space: the reduced row
    /// echelon form of the transpose, transposed back. Two matrices with the
    /// same column span produce identical output.
    pub fn col_space_basis(&self) -> Mat {
        let (r, pivots) = self.transpose().rref();
        let rank = pivots.len();
        Mat::from_fn(&self.field, self.rows, rank, |i, j| r[(j, i)])
    }

    /// Solve self * X = rhs for X, if consistent; free variables are set to
    /// zero, so the solution is deterministic.
    pub fn solve(&self, rhs: &Mat) -> Option<Mat> {
        assert_eq!(self.rows, rhs.rows, "solve shape mismatch");
        let aug = self.hstack(rhs);
        let (r, pivots) = aug.rref();
        if pivots.iter().any(|&p| p >= self.cols) {
            return None;
        }
        let mut x = Mat::zeros(&self.field, self.cols, rhs.cols);
        for (pi, &pc) in pivots.iter().enumerate() {
            for j in 0..rhs.cols {
                x[(pc, j)] = r[(pi, self.cols + j)];
            }
        }
        Some(x)
    }

    pub fn inverse(&self) -> Option<Mat> {
        if self.rows != self.cols {
            return None;
        }
        let x = self.solve(&Mat::identity(&self.field, self.rows))?;
        if self.mul(&x) == Mat::identity(&self.field, self.rows) {
            Some(x)
        } else {
            None
        }
    }

    pub fn is_invertible(&self) -> bool {
        self.rows == self.cols && self.rank() == self.rows
    }

    /// Indices of columns of `candidates` that enlarge the span of `self`
    /// step by step to span(self) + span(candidates), found by running the
    /// pivot scan over the concatenation. The selected columns together with
    /// self's columns are independent.
    pub fn extend_basis_indices(&self, candidates: &Mat) -> Vec<usize> {
        assert_eq!(self.rows, candidates.rows, "extend_basis shape mismatch");
        let combined = self.hstack(candidates);
        let (_, pivots) = combined.rref();
        pivots
            .into_iter()
            .filter(|&p| p >= self.cols)
            .map(|p| p - self.cols)
            .collect()
    }

    /// The selected extending columns themselves.
    pub fn extend_basis(&self, candidates: &Mat) -> Mat {
        let idx = self.extend_basis_indices(candidates);
        candidates.select_cols(&idx)
    }

    pub fn det(&self) -> u16 {
        assert_eq!(self.rows, self.cols, "det of non-square matrix");
        let f = self.field.clone();
        let mut m = self.clone();
        let n = m.rows;
        let mut det: u16 = 1;
        for col in 0..n {
            let mut sel = None;
            for row in col..n {
                if m[(row, col)] != 0 {
                    sel = Some(row);
                    break;
                }
            }
            let Some(sel) = sel else { return 0 };
            if sel != col {
                for j in 0..n {
                    let t = m[(sel, j)];
                    m[(sel, j)] = m[(col, j)];
                    m[(col, j)] = t;
                }
                det = f.neg(det);
            }
            det = f.mul(det, m[(col, col)]);
            let inv = f.inv(m[(col, col)]).unwrap();
            for row in col + 1..n {
                let c = f.mul(m[(row, col)], inv);
                if c == 0 {
                    continue;
                }
                for j in col..n {
                    let t = f.mul(c, m[(col, j)]);
                    m[(row, j)] = f.sub(m[(row, j)], t);
                }
            }
        }
        det
    }
}

/// All k-element subsets of {0, .., n-1} in lexicographic order.
pub(crate) fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k > n {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        // advance to the next subset
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] != i + n - k {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        cur[i] += 1;
        for j in i + 1..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

// ======================================================================

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::make_field;

    #[test]
    fn rref_and_rank_gf2() {
        let f = make_field(2, 1).unwrap();
        let m = Mat::from_rows(&f, &[vec![1, 1, 0], vec![1, 1, 1], vec![0, 0, 1]]);
        let (r, pivots) = m.rref();
        assert_eq!(pivots, vec![0, 2]);
        assert_eq!(m.rank(), 2);
        assert_eq!(
            r,
            Mat::from_rows(&f, &[vec![1, 1, 0], vec![0, 0, 1], vec![0, 0, 0]])
        );
    }

    #[test]
    fn kernel_is_killed_and_complete() {
        let f = make_field(3, 1).unwrap();
        let m = Mat::from_rows(&f, &[vec![1, 2, 0, 1], vec![0, 0, 1, 2]]);
        let k = m.kernel_basis();
        assert_eq!(k.cols(), 2);
        assert!(m.mul(&k).is_zero());
        assert_eq!(k.rank(), 2);
    }

    #[test]
    fn col_space_basis_is_canonical() {
        let f = make_field(5, 1).unwrap();
        let a = Mat::from_rows(&f, &[vec![1, 2], vec![2, 4], vec![0, 3]]);
        let b = Mat::from_rows(&f, &[vec![2, 3], vec![4, 1], vec![0, 1]]);
        // Same column span (second is a different generating set).
        let ca = a.col_space_basis();
        let cb = b.col_space_basis();
        assert_eq!(ca, cb);
        assert_eq!(ca.cols(), 2);
    }

    #[test]
    fn solve_and_inverse() {
        let f = make_field(3, 2).unwrap();
        let a = Mat::from_rows(&f, &[vec![3, 1], vec![1, 0]]);
        let inv = a.inverse().unwrap();
        assert_eq!(a.mul(&inv), Mat::identity(&f, 2));
        assert_eq!(inv.mul(&a), Mat::identity(&f, 2));
        let rhs = Mat::from_rows(&f, &[vec![5], vec![7]]);
        let x = a.solve(&rhs).unwrap();
        assert_eq!(a.mul(&x), rhs);
        // Inconsistent system.
        let s = Mat::from_rows(&f, &[vec![1, 0], vec![1, 0]]);
        let bad = Mat::from_rows(&f, &[vec![1], vec![2]]);
        assert!(s.solve(&bad).is_none());
    }

    #[test]
    fn extend_basis_picks_new_directions() {
        let f = make_field(2, 1).unwrap();
        let base = Mat::from_rows(&f, &[vec![1], vec![0], vec![0]]);
        let cand = Mat::from_rows(&f, &[vec![1, 1, 0], vec![0, 1, 1], vec![0, 0, 1]]);
        let idx = base.extend_basis_indices(&cand);
        assert_eq!(idx, vec![1, 2]);
        let ext = base.extend_basis(&cand);
        assert_eq!(base.hstack(&ext).rank(), 3);
    }

    #[test]
    fn kronecker_mixed_product() {
        let f = make_field(7, 1).unwrap();
        let a = Mat::from_rows(&f, &[vec![1, 2], vec![3, 4]]);
        let b = Mat::from_rows(&f, &[vec![0, 5], vec![6, 1]]);
        let c = Mat::from_rows(&f, &[vec![2, 0], vec![1, 1]]);
        let d = Mat::from_rows(&f, &[vec![3, 2], vec![0, 4]]);
        let lhs = a.kronecker(&b).mul(&c.kronecker(&d));
        let rhs = a.mul(&c).kronecker(&b.mul(&d));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn det_matches_invertibility() {
        let f = make_field(3, 1).unwrap();
        let a = Mat::from_rows(&f, &[vec![1, 2], vec![2, 1]]);
        // det = 1*1 - 2*2 = 1 - 4 = -3 = 0 mod 3.
        assert_eq!(a.det(), 0);
        assert!(!a.is_invertible());
        let b = Mat::from_rows(&f, &[vec![1, 2], vec![0, 1]]);
        assert_eq!(b.det(), 1);
        assert_eq!(b.inverse().unwrap(), Mat::from_rows(&f, &[vec![1, 1], vec![0, 1]]));
    }

    #[test]
    fn empty_shapes() {
        let f = make_field(2, 1).unwrap();
        let e = Mat::zeros(&f, 0, 3);
        assert_eq!(e.rank(), 0);
        assert_eq!(e.kernel_basis().cols(), 3);
        let e2 = Mat::zeros(&f, 3, 0);
        assert_eq!(e2.rank(), 0);
        assert_eq!(e2.col_space_basis().cols(), 0);
        let m = Mat::from_rows(&f, &[vec![1], vec![0], vec![1]]);
        assert_eq!(e2.hstack(&m).cols(), 1);
        assert_eq!(Mat::identity(&f, 0).mul(&Mat::zeros(&f, 0, 2)).cols(), 2);
    }
}
