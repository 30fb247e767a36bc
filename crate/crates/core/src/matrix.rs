//! Dense integer matrices with Smith and Hermite normal forms.
//!
//! Entries are arbitrary precision. Vectors act on the right: a matrix with
//! `rows × cols` maps Z^cols to Z^rows.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MatrixError {
    #[error("dimension mismatch: {0}x{1} vs {2}x{3}")]
    Dimension(usize, usize, usize, usize),
    #[error("vector is not in the lattice spanned by the columns")]
    NotInLattice,
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = BigInt::one();
        }
        m
    }

    /// Scalar multiple of the identity.
    pub fn scalar(n: usize, c: i64) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = BigInt::from(c);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        IntMatrix {
            rows: r,
            cols: c,
            data: rows.iter().flatten().map(|&x| BigInt::from(x)).collect(),
        }
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> BigInt) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        IntMatrix { rows, cols, data }
    }

    pub fn diagonal(rows: usize, cols: usize, diag: &[BigInt]) -> Self {
        let mut m = Self::zeros(rows, cols);
        for (i, d) in diag.iter().enumerate() {
            m.set(i, i, d.clone());
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.data[i * self.cols + j] = v;
    }

    pub fn add_at(&mut self, i: usize, j: usize, v: &BigInt) {
        self.data[i * self.cols + j] += v;
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| {
                    let v = self.get(i, j);
                    if i == j {
                        v.is_one()
                    } else {
                        v.is_zero()
                    }
                })
            })
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<BigInt> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn from_columns(rows: usize, columns: &[Vec<BigInt>]) -> Self {
        let mut m = Self::zeros(rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), rows, "column length");
            for (i, v) in col.iter().enumerate() {
                m.set(i, j, v.clone());
            }
        }
        m
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn mul(&self, rhs: &IntMatrix) -> Result<IntMatrix, MatrixError> {
        if self.cols != rhs.rows {
            return Err(MatrixError::Dimension(self.rows, self.cols, rhs.rows, rhs.cols));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = rhs.get(k, j);
                    if !b.is_zero() {
                        out.data[i * rhs.cols + j] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(v.len(), self.cols, "vector length");
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    pub fn add(&self, rhs: &IntMatrix) -> Result<IntMatrix, MatrixError> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(MatrixError::Dimension(self.rows, self.cols, rhs.rows, rhs.cols));
        }
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect();
        Ok(IntMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn sub(&self, rhs: &IntMatrix) -> Result<IntMatrix, MatrixError> {
        self.add(&rhs.neg())
    }

    pub fn neg(&self) -> IntMatrix {
        IntMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| -a).collect(),
        }
    }

    pub fn scale(&self, c: &BigInt) -> IntMatrix {
        IntMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * c).collect(),
        }
    }

    /// Rows `r0..r1`, columns `c0..c1`.
    pub fn submatrix(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> IntMatrix {
        Self::from_fn(r1 - r0, c1 - c0, |i, j| self.get(r0 + i, c0 + j).clone())
    }

    /// Block matrix [[a, b], [c, d]] with given block dimensions; missing blocks are zero.
    pub fn vstack(blocks: &[&IntMatrix]) -> IntMatrix {
        let cols = blocks.first().map_or(0, |b| b.cols);
        let mut data = Vec::new();
        let mut rows = 0;
        for b in blocks {
            assert_eq!(b.cols, cols, "vstack width");
            data.extend(b.data.iter().cloned());
            rows += b.rows;
        }
        IntMatrix { rows, cols, data }
    }

    pub fn hstack(blocks: &[&IntMatrix]) -> IntMatrix {
        let t: Vec<IntMatrix> = blocks.iter().map(|b| b.transpose()).collect();
        let refs: Vec<&IntMatrix> = t.iter().collect();
        Self::vstack(&refs).transpose()
    }

    /// Writes `block` with its top-left corner at (r, c).
    pub fn set_block(&mut self, r: usize, c: usize, block: &IntMatrix) {
        for i in 0..block.rows {
            for j in 0..block.cols {
                self.set(r + i, c + j, block.get(i, j).clone());
            }
        }
    }

    pub fn to_i64_rows(&self) -> Option<Vec<Vec<i64>>> {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(ToPrimitive::to_i64).collect())
            .collect()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// row[dst] += c · row[src].
    fn add_row_multiple(&mut self, dst: usize, src: usize, c: &BigInt) {
        if c.is_zero() {
            return;
        }
        for j in 0..self.cols {
            let v = &self.data[src * self.cols + j];
            if !v.is_zero() {
                let add = v * c;
                self.data[dst * self.cols + j] += add;
            }
        }
    }

    /// col[dst] += c · col[src].
    fn add_col_multiple(&mut self, dst: usize, src: usize, c: &BigInt) {
        if c.is_zero() {
            return;
        }
        for i in 0..self.rows {
            let v = &self.data[i * self.cols + src];
            if !v.is_zero() {
                let add = v * c;
                self.data[i * self.cols + dst] += add;
            }
        }
    }

    fn negate_row(&mut self, i: usize) {
        for j in 0..self.cols {
            let v = &mut self.data[i * self.cols + j];
            *v = -std::mem::take(v);
        }
    }

    /// Replaces rows (a, b) by (s·a + t·b, u·a + v·b).
    fn combine_rows(&mut self, a: usize, b: usize, s: &BigInt, t: &BigInt, u: &BigInt, v: &BigInt) {
        for j in 0..self.cols {
            let x = self.data[a * self.cols + j].clone();
            let y = self.data[b * self.cols + j].clone();
            self.data[a * self.cols + j] = s * &x + t * &y;
            self.data[b * self.cols + j] = u * &x + v * &y;
        }
    }

    /// Rank over Q.
    pub fn rank(&self) -> usize {
        elementary_divisors(self).len()
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "IntMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(|x| x.to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

/// Result of a Smith normal form computation: `u · m · v = d`.
#[derive(Clone, Debug)]
pub struct Smith {
    pub u: IntMatrix,
    pub d: IntMatrix,
    pub v: IntMatrix,
    /// Nonzero diagonal entries, in divisibility order.
    pub divisors: Vec<BigInt>,
}

impl Smith {
    pub fn rank(&self) -> usize {
        self.divisors.len()
    }
}

/// Smith normal form with transforms. Pivot: smallest absolute nonzero entry.
pub fn smith_normal_form(m: &IntMatrix) -> Smith {
    let (u, d, v, divisors) = smith_core(m, true);
    let (u, v) = (u.expect("transforms requested"), v.expect("transforms requested"));
    debug_assert!(check_smith(m, &u, &d, &v, &divisors));
    Smith { u, d, v, divisors }
}

/// Nonzero elementary divisors only, without tracking transforms.
pub fn elementary_divisors(m: &IntMatrix) -> Vec<BigInt> {
    smith_core(m, false).3
}

fn check_smith(m: &IntMatrix, u: &IntMatrix, d: &IntMatrix, v: &IntMatrix, divs: &[BigInt]) -> bool {
    let prod = u.mul(m).and_then(|x| x.mul(v));
    let diag_ok = (0..d.rows).all(|i| {
        (0..d.cols).all(|j| {
            let x = d.get(i, j);
            if i == j && i < divs.len() {
                x == &divs[i]
            } else {
                x.is_zero()
            }
        })
    });
    let chain_ok = divs.windows(2).all(|w| (&w[1] % &w[0]).is_zero()) && divs.iter().all(|x| x.is_positive());
    let unimodular = determinant(u).abs().is_one() && determinant(v).abs().is_one();
    prod.map(|p| &p == d).unwrap_or(false) && diag_ok && chain_ok && unimodular
}

fn smith_core(m: &IntMatrix, track: bool) -> (Option<IntMatrix>, IntMatrix, Option<IntMatrix>, Vec<BigInt>) {
    let mut a = m.clone();
    let mut u = track.then(|| IntMatrix::identity(m.rows));
    let mut v = track.then(|| IntMatrix::identity(m.cols));
    let (rows, cols) = (m.rows, m.cols);
    let mut t = 0;
    while t < rows.min(cols) {
        // Smallest nonzero entry of the trailing block becomes the pivot.
        let mut best: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                let x = a.get(i, j);
                if !x.is_zero() && best.is_none_or(|(bi, bj)| x.abs() < a.get(bi, bj).abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        a.swap_rows(t, pi);
        a.swap_cols(t, pj);
        if let Some(u) = u.as_mut() {
            u.swap_rows(t, pi);
        }
        if let Some(v) = v.as_mut() {
            v.swap_cols(t, pj);
        }
        loop {
            let mut dirty = false;
            for i in t + 1..rows {
                if a.get(i, t).is_zero() {
                    continue;
                }
                let q = -a.get(i, t).div_floor(a.get(t, t));
                a.add_row_multiple(i, t, &q);
                if let Some(u) = u.as_mut() {
                    u.add_row_multiple(i, t, &q);
                }
                if !a.get(i, t).is_zero() {
                    dirty = true;
                }
            }
            for j in t + 1..cols {
                if a.get(t, j).is_zero() {
                    continue;
                }
                let q = -a.get(t, j).div_floor(a.get(t, t));
                a.add_col_multiple(j, t, &q);
                if let Some(v) = v.as_mut() {
                    v.add_col_multiple(j, t, &q);
                }
                if !a.get(t, j).is_zero() {
                    dirty = true;
                }
            }
            if dirty {
                // A remainder smaller than the pivot exists in row or column t.
                let mut best = (t, t);
                for i in t..rows {
                    let x = a.get(i, t);
                    if !x.is_zero() && x.abs() < a.get(best.0, best.1).abs() {
                        best = (i, t);
                    }
                }
                for j in t..cols {
                    let x = a.get(t, j);
                    if !x.is_zero() && x.abs() < a.get(best.0, best.1).abs() {
                        best = (t, j);
                    }
                }
                a.swap_rows(t, best.0);
                a.swap_cols(t, best.1);
                if let Some(u) = u.as_mut() {
                    u.swap_rows(t, best.0);
                }
                if let Some(v) = v.as_mut() {
                    v.swap_cols(t, best.1);
                }
                continue;
            }
            // Row and column are clear; enforce divisibility of the trailing block.
            let p = a.get(t, t).clone();
            let offender = (t + 1..rows).find(|&i| (t + 1..cols).any(|j| !(a.get(i, j) % &p).is_zero()));
            match offender {
                Some(i) => {
                    let one = BigInt::one();
                    a.add_row_multiple(t, i, &one);
                    if let Some(u) = u.as_mut() {
                        u.add_row_multiple(t, i, &one);
                    }
                }
                None => break,
            }
        }
        if a.get(t, t).is_negative() {
            a.negate_row(t);
            if let Some(u) = u.as_mut() {
                u.negate_row(t);
            }
        }
        t += 1;
    }
    let divisors = (0..t).map(|i| a.get(i, i).clone()).collect();
    (u, a, v, divisors)
}

/// Exact determinant by fraction-free (Bareiss) elimination.
pub fn determinant(m: &IntMatrix) -> BigInt {
    assert_eq!(m.rows, m.cols, "determinant of a non-square matrix");
    let n = m.rows;
    if n == 0 {
        return BigInt::one();
    }
    let mut a = m.clone();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n {
        if a.get(k, k).is_zero() {
            match (k + 1..n).find(|&i| !a.get(i, k).is_zero()) {
                Some(i) => {
                    a.swap_rows(k, i);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let val = (a.get(i, j) * a.get(k, k) - a.get(i, k) * a.get(k, j)) / &prev;
                a.set(i, j, val);
            }
        }
        prev = a.get(k, k).clone();
    }
    sign * a.get(n - 1, n - 1)
}

/// How pivots are chosen while computing a row echelon form.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PivotStrategy {
    /// Repeated division with the smallest absolute entry of the column as pivot.
    MinAbs,
    /// Extended-gcd combination of the current pivot row with each lower row.
    ExtendedGcd,
}

/// Row echelon form `h = u · m` with `u` unimodular. With `reduce`, pivots are
/// positive and entries above each pivot lie in [0, pivot): the Hermite normal form.
pub fn row_echelon(m: &IntMatrix, strategy: PivotStrategy, reduce: bool) -> (IntMatrix, IntMatrix, Vec<usize>) {
    let mut a = m.clone();
    let mut u = IntMatrix::identity(m.rows);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..m.cols {
        if r == m.rows {
            break;
        }
        match strategy {
            PivotStrategy::MinAbs => loop {
                let best = (r..m.rows)
                    .filter(|&i| !a.get(i, c).is_zero())
                    .min_by(|&i, &j| a.get(i, c).abs().cmp(&a.get(j, c).abs()));
                let Some(b) = best else { break };
                a.swap_rows(r, b);
                u.swap_rows(r, b);
                let mut clean = true;
                for i in r + 1..m.rows {
                    if a.get(i, c).is_zero() {
                        continue;
                    }
                    let q = -a.get(i, c).div_floor(a.get(r, c));
                    a.add_row_multiple(i, r, &q);
                    u.add_row_multiple(i, r, &q);
                    clean &= a.get(i, c).is_zero();
                }
                if clean {
                    break;
                }
            },
            PivotStrategy::ExtendedGcd => {
                if let Some(b) = (r..m.rows).find(|&i| !a.get(i, c).is_zero()) {
                    a.swap_rows(r, b);
                    u.swap_rows(r, b);
                }
                for i in r + 1..m.rows {
                    if a.get(i, c).is_zero() || a.get(r, c).is_zero() {
                        continue;
                    }
                    let x = a.get(r, c).clone();
                    let y = a.get(i, c).clone();
                    let e = x.extended_gcd(&y);
                    let (s, t) = (e.x, e.y);
                    let (xg, yg) = (&x / &e.gcd, &y / &e.gcd);
                    // [[s, t], [-y/g, x/g]] has determinant 1.
                    a.combine_rows(r, i, &s, &t, &-&yg, &xg);
                    u.combine_rows(r, i, &s, &t, &-&yg, &xg);
                }
            }
        }
        if a.get(r, c).is_zero() {
            continue;
        }
        if reduce {
            if a.get(r, c).is_negative() {
                a.negate_row(r);
                u.negate_row(r);
            }
            for i in 0..r {
                let q = -a.get(i, c).div_floor(a.get(r, c));
                a.add_row_multiple(i, r, &q);
                u.add_row_multiple(i, r, &q);
            }
        }
        pivots.push(c);
        r += 1;
    }
    (a, u, pivots)
}

/// Hermite normal form (row style) of `m`, with the transform: `h = u · m`.
pub fn hermite_normal_form(m: &IntMatrix) -> (IntMatrix, IntMatrix) {
    let (h, u, _) = row_echelon(m, PivotStrategy::MinAbs, true);
    (h, u)
}

/// A basis of the lattice spanned by the columns of `m`, as columns.
pub fn column_lattice_basis(m: &IntMatrix, strategy: PivotStrategy, reduce: bool) -> IntMatrix {
    let (h, _, pivots) = row_echelon(&m.transpose(), strategy, reduce);
    h.submatrix(0, pivots.len(), 0, h.cols).transpose()
}

/// A basis (as columns) of the integer kernel {x : m·x = 0}; the kernel is saturated.
pub fn kernel_basis(m: &IntMatrix) -> IntMatrix {
    // Row-reduce mᵀ: u·mᵀ = h, so m·uᵀ = hᵀ and the rows of u past the rank span ker m.
    let (_, u, pivots) = row_echelon(&m.transpose(), PivotStrategy::MinAbs, false);
    let r = pivots.len();
    u.submatrix(r, u.rows, 0, u.cols).transpose()
}

/// Solves `b · y = v` for integer `y`; `b` must have full column rank.
pub fn solve_in_lattice(b: &IntMatrix, v: &[BigInt]) -> Result<Vec<BigInt>, MatrixError> {
    let s = smith_normal_form(b);
    let uv = s.u.mul_vec(v);
    let mut z = vec![BigInt::zero(); b.cols];
    for (i, x) in uv.iter().enumerate() {
        if i < s.divisors.len() {
            let (q, r) = x.div_rem(&s.divisors[i]);
            if !r.is_zero() {
                return Err(MatrixError::NotInLattice);
            }
            z[i] = q;
        } else if !x.is_zero() {
            return Err(MatrixError::NotInLattice);
        }
    }
    if s.divisors.len() < b.cols {
        // Columns of b are dependent; any solution works but callers expect uniqueness.
        debug_assert!(false, "solve_in_lattice expects independent columns");
    }
    Ok(s.v.mul_vec(&z))
}

/// Solves `b · Y = rhs` column by column.
pub fn solve_matrix_in_lattice(b: &IntMatrix, rhs: &IntMatrix) -> Result<IntMatrix, MatrixError> {
    if b.rows != rhs.rows {
        return Err(MatrixError::Dimension(b.rows, b.cols, rhs.rows, rhs.cols));
    }
    let s = smith_normal_form(b);
    let mut cols = Vec::with_capacity(rhs.cols);
    for j in 0..rhs.cols {
        let uv = s.u.mul_vec(&rhs.column(j));
        let mut z = vec![BigInt::zero(); b.cols];
        for (i, x) in uv.iter().enumerate() {
            if i < s.divisors.len() {
                let (q, r) = x.div_rem(&s.divisors[i]);
                if !r.is_zero() {
                    return Err(MatrixError::NotInLattice);
                }
                z[i] = q;
            } else if !x.is_zero() {
                return Err(MatrixError::NotInLattice);
            }
        }
        cols.push(s.v.mul_vec(&z));
    }
    Ok(IntMatrix::from_columns(b.cols, &cols))
}
