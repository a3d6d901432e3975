//! Dense matrices over the natural numbers with exact arithmetic.
//!
//! These are the semantic carrier for the matrix prop (a morphism `n -> m` is
//! an `m x n` matrix) and for all connectivity bookkeeping in the graph
//! algebras. Entries are arbitrary-precision naturals; rank is computed
//! exactly over the rationals (integer elimination with gcd normalisation) or
//! over the two-element field.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Field over which ranks are computed. `Rationals` is the default everywhere;
/// `Gf2` is offered for comparison with the classical rank-width convention.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Field {
    #[default]
    Rationals,
    Gf2,
}

/// An `m x n` matrix with nonnegative integer entries, stored row-major.
/// Zero-dimension matrices (`m = 0` or `n = 0`) are legal and unique per shape.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct NatMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<BigUint>,
}

impl fmt::Debug for NatMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}[", self.rows, self.cols)?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", self.entries[i * self.cols + j])?;
            }
        }
        write!(f, "]")
    }
}

impl fmt::Display for NatMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl NatMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        NatMatrix {
            rows,
            cols,
            entries: vec![BigUint::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            m.set(i, i, BigUint::one());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> BigUint) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        NatMatrix { rows, cols, entries }
    }

    /// Convenience constructor from small entries. The row count is
    /// `grid.len()`; an empty grid gives a `0 x 0` matrix, so zero-column
    /// shapes like `3 x 0` must use [`NatMatrix::zero`].
    pub fn from_u64(grid: &[Vec<u64>]) -> Self {
        let rows = grid.len();
        let cols = grid.first().map_or(0, |r| r.len());
        assert!(grid.iter().all(|r| r.len() == cols), "ragged matrix literal");
        Self::from_fn(rows, cols, |i, j| BigUint::from(grid[i][j]))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigUint {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigUint) {
        self.entries[i * self.cols + j] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| e.is_zero())
    }

    pub fn max_entry(&self) -> BigUint {
        self.entries.iter().max().cloned().unwrap_or_else(BigUint::zero)
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    /// Entrywise sum; shapes must agree.
    pub fn add(&self, other: &NatMatrix) -> Result<NatMatrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                context: "matrix addition",
                expected: format!("{}x{}", self.rows, self.cols),
                found: format!("{}x{}", other.rows, other.cols),
            });
        }
        Ok(Self::from_fn(self.rows, self.cols, |i, j| {
            self.get(i, j) + other.get(i, j)
        }))
    }

    /// `self + self^T` for square matrices: the symmetrised edge-count matrix.
    pub fn symmetrize(&self) -> Result<NatMatrix> {
        self.add(&self.transpose())
    }

    /// Exact matrix product `self * other`.
    pub fn multiply(&self, other: &NatMatrix) -> Result<NatMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                context: "matrix product",
                expected: format!("inner dimension {}", self.cols),
                found: format!("{}", other.rows),
            });
        }
        Ok(Self::from_fn(self.rows, other.cols, |i, j| {
            let mut acc = BigUint::zero();
            for k in 0..self.cols {
                acc += self.get(i, k) * other.get(k, j);
            }
            acc
        }))
    }

    /// Block-diagonal sum `[[self, 0], [0, other]]`.
    pub fn direct_sum(&self, other: &NatMatrix) -> NatMatrix {
        let rows = self.rows + other.rows;
        let cols = self.cols + other.cols;
        Self::from_fn(rows, cols, |i, j| {
            if i < self.rows && j < self.cols {
                self.get(i, j).clone()
            } else if i >= self.rows && j >= self.cols {
                other.get(i - self.rows, j - self.cols).clone()
            } else {
                BigUint::zero()
            }
        })
    }

    /// Horizontal concatenation `(self | other)`; row counts must agree.
    pub fn concat_h(&self, other: &NatMatrix) -> Result<NatMatrix> {
        if self.rows != other.rows {
            return Err(Error::DimensionMismatch {
                context: "horizontal concatenation",
                expected: format!("{} rows", self.rows),
                found: format!("{} rows", other.rows),
            });
        }
        Ok(Self::from_fn(self.rows, self.cols + other.cols, |i, j| {
            if j < self.cols {
                self.get(i, j).clone()
            } else {
                other.get(i, j - self.cols).clone()
            }
        }))
    }

    /// Vertical concatenation, `self` on top.
    pub fn concat_v(&self, other: &NatMatrix) -> Result<NatMatrix> {
        if self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                context: "vertical concatenation",
                expected: format!("{} cols", self.cols),
                found: format!("{} cols", other.cols),
            });
        }
        Ok(Self::from_fn(self.rows + other.rows, self.cols, |i, j| {
            if i < self.rows {
                self.get(i, j).clone()
            } else {
                other.get(i - self.rows, j).clone()
            }
        }))
    }

    /// Submatrix on the given row and column index lists (order-preserving,
    /// repetitions allowed).
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> NatMatrix {
        Self::from_fn(rows.len(), cols.len(), |i, j| self.get(rows[i], cols[j]).clone())
    }

    /// Exact rank over the requested field.
    pub fn rank(&self, field: Field) -> usize {
        match field {
            Field::Rationals => self.rank_rationals(),
            Field::Gf2 => self.rank_gf2(),
        }
    }

    fn rank_rationals(&self) -> usize {
        // Integer row elimination with gcd normalisation: exact over Q.
        let mut m: Vec<Vec<BigInt>> = (0..self.rows)
            .map(|i| (0..self.cols).map(|j| BigInt::from(self.get(i, j).clone())).collect())
            .collect();
        let mut rank = 0;
        let mut col = 0;
        while rank < self.rows && col < self.cols {
            let pivot = (rank..self.rows).find(|&i| !m[i][col].is_zero());
            let Some(p) = pivot else {
                col += 1;
                continue;
            };
            m.swap(rank, p);
            for i in rank + 1..self.rows {
                if m[i][col].is_zero() {
                    continue;
                }
                let a = m[rank][col].clone();
                let b = m[i][col].clone();
                let g = a.gcd(&b);
                let fa = &b / &g;
                let fb = &a / &g;
                for j in col..self.cols {
                    let v = &m[i][j] * &fb - &m[rank][j] * &fa;
                    m[i][j] = v;
                }
                let row_gcd = m[i][col..].iter().fold(BigInt::zero(), |acc, v| acc.gcd(v));
                if !row_gcd.is_zero() && !row_gcd.is_one() {
                    for j in col..self.cols {
                        m[i][j] = &m[i][j] / &row_gcd;
                    }
                }
            }
            rank += 1;
            col += 1;
        }
        rank
    }

    fn rank_gf2(&self) -> usize {
        // Bit-packed elimination. Row lengths beyond 64 are chunked.
        let words = self.cols.div_ceil(64).max(1);
        let mut rows: Vec<Vec<u64>> = (0..self.rows)
            .map(|i| {
                let mut w = vec![0u64; words];
                for j in 0..self.cols {
                    if self.get(i, j).is_odd() {
                        w[j / 64] |= 1 << (j % 64);
                    }
                }
                w
            })
            .collect();
        let mut rank = 0;
        for col in 0..self.cols {
            let (w, b) = (col / 64, col % 64);
            let Some(p) = (rank..rows.len()).find(|&i| rows[i][w] >> b & 1 == 1) else {
                continue;
            };
            rows.swap(rank, p);
            let pivot_row = rows[rank].clone();
            for (i, row) in rows.iter_mut().enumerate() {
                if i != rank && row[w] >> b & 1 == 1 {
                    for (x, y) in row.iter_mut().zip(&pivot_row) {
                        *x ^= y;
                    }
                }
            }
            rank += 1;
        }
        rank
    }

    /// Finest sequence of contiguous diagonal blocks whose direct sum
    /// reassembles the matrix. A maximal run of zero rows at a block boundary
    /// becomes one `(run, 0)` factor, a run of zero columns a `(0, run)`
    /// factor, rows before columns.
    pub fn block_split(&self) -> Vec<NatMatrix> {
        let mut blocks = Vec::new();
        let (mut r0, mut c0) = (0usize, 0usize);
        while r0 < self.rows || c0 < self.cols {
            // Leading zero rows in the remaining corner.
            let mut zr = 0;
            while r0 + zr < self.rows
                && (c0..self.cols).all(|j| self.get(r0 + zr, j).is_zero())
            {
                zr += 1;
            }
            if zr > 0 {
                blocks.push(NatMatrix::zero(zr, 0));
                r0 += zr;
                continue;
            }
            let mut zc = 0;
            while c0 + zc < self.cols
                && (r0..self.rows).all(|i| self.get(i, c0 + zc).is_zero())
            {
                zc += 1;
            }
            if zc > 0 {
                blocks.push(NatMatrix::zero(0, zc));
                c0 += zc;
                continue;
            }
            if r0 == self.rows {
                // Only zero columns could remain, handled above.
                break;
            }
            // Grow the minimal coupled block containing the current corner.
            let (mut r, mut c) = (1usize, 1usize);
            loop {
                let mut grew = false;
                // Columns reached by nonzero entries in rows [r0, r0+r).
                for i in r0..r0 + r {
                    for j in c0 + c..self.cols {
                        if !self.get(i, j).is_zero() {
                            c = j - c0 + 1;
                            grew = true;
                        }
                    }
                }
                // Rows reached by nonzero entries in cols [c0, c0+c).
                for j in c0..c0 + c {
                    for i in r0 + r..self.rows {
                        if !self.get(i, j).is_zero() {
                            r = i - r0 + 1;
                            grew = true;
                        }
                    }
                }
                if !grew {
                    break;
                }
            }
            let rows: Vec<usize> = (r0..r0 + r).collect();
            let cols: Vec<usize> = (c0..c0 + c).collect();
            blocks.push(self.submatrix(&rows, &cols));
            r0 += r;
            c0 += c;
        }
        blocks
    }
}

/// A factorization `A = left * right` through inner dimension `inner_dim`.
///
/// `exact_over_naturals` records that `inner_dim` is the least inner dimension
/// attainable with natural-number factors: the search walks upward from the
/// field rank, so the first hit is minimal. When the search gives up at its
/// cap the factorization falls back to the trivial identity split and the
/// flag is false.
#[derive(Debug, Clone)]
pub struct RankFactorization {
    pub left: NatMatrix,
    pub right: NatMatrix,
    pub inner_dim: usize,
    pub field_rank: usize,
    pub exact_over_naturals: bool,
}

/// Searches inner dimensions `field_rank..=dim_cap` for natural-number
/// factors `left (m x r)`, `right (r x n)` with `left * right = A` and entries
/// bounded by `entry_bound`. Entries of any minimal factorization are bounded
/// by the maximum entry of `A`, so callers must pass at least that.
pub fn nat_rank_factorize(
    a: &NatMatrix,
    entry_bound: &BigUint,
    dim_cap: usize,
) -> RankFactorization {
    let field_rank = a.rank(Field::Rationals);
    if a.is_zero() {
        return RankFactorization {
            left: NatMatrix::zero(a.rows(), 0),
            right: NatMatrix::zero(0, a.cols()),
            inner_dim: 0,
            field_rank,
            exact_over_naturals: true,
        };
    }
    for r in field_rank..=dim_cap {
        let mut found = None;
        for_each_nat_factorization(a, r, entry_bound, &mut |left, right| {
            found = Some((left.clone(), right.clone()));
            true
        });
        if let Some((left, right)) = found {
            return RankFactorization {
                left,
                right,
                inner_dim: r,
                field_rank,
                exact_over_naturals: true,
            };
        }
    }
    // No factorization within the cap: keep the pipeline total with the
    // trivial identity split at min(m, n) and flag the result.
    let (left, right) = if a.rows() <= a.cols() {
        (NatMatrix::identity(a.rows()), a.clone())
    } else {
        (a.clone(), NatMatrix::identity(a.cols()))
    };
    let inner_dim = a.rows().min(a.cols());
    RankFactorization {
        left,
        right,
        inner_dim,
        field_rank,
        exact_over_naturals: false,
    }
}

/// Depth-first enumeration of factorizations `A = H * G` with inner dimension
/// exactly `r`, every outer-product piece nonzero, and entries bounded by
/// `entry_bound`. Pieces are ordered so that each one covers the first
/// nonzero cell of the current residual, which is complete up to a
/// simultaneous permutation of the inner dimension. `visit` returning true
/// stops the walk; the return value reports whether it did.
pub fn for_each_nat_factorization(
    a: &NatMatrix,
    r: usize,
    entry_bound: &BigUint,
    visit: &mut impl FnMut(&NatMatrix, &NatMatrix) -> bool,
) -> bool {
    if r == 0 {
        return a.is_zero()
            && visit(&NatMatrix::zero(a.rows(), 0), &NatMatrix::zero(0, a.cols()));
    }
    let mut residual = a.clone();
    let mut cols_acc: Vec<Vec<BigUint>> = Vec::new();
    let mut rows_acc: Vec<Vec<BigUint>> = Vec::new();
    let (m, n) = (a.rows(), a.cols());
    let mut wrapped = |cols: &[Vec<BigUint>], rows: &[Vec<BigUint>]| -> bool {
        let left = NatMatrix::from_fn(m, r, |i, j| cols[j][i].clone());
        let right = NatMatrix::from_fn(r, n, |i, j| rows[i][j].clone());
        visit(&left, &right)
    };
    dfs_pieces(
        &mut residual,
        r,
        entry_bound,
        &mut cols_acc,
        &mut rows_acc,
        &mut wrapped,
    )
}

fn first_nonzero(residual: &NatMatrix) -> Option<(usize, usize)> {
    for i in 0..residual.rows() {
        for j in 0..residual.cols() {
            if !residual.get(i, j).is_zero() {
                return Some((i, j));
            }
        }
    }
    None
}

fn dfs_pieces(
    residual: &mut NatMatrix,
    remaining: usize,
    bound: &BigUint,
    cols_acc: &mut Vec<Vec<BigUint>>,
    rows_acc: &mut Vec<Vec<BigUint>>,
    emit: &mut impl FnMut(&[Vec<BigUint>], &[Vec<BigUint>]) -> bool,
) -> bool {
    let Some((i0, j0)) = first_nonzero(residual) else {
        // Covered exactly; smaller inner dimensions are explored separately.
        return remaining == 0 && emit(cols_acc, rows_acc);
    };
    if remaining == 0 || residual.rank(Field::Rationals) > remaining {
        return false;
    }
    let m = residual.rows();
    let n = residual.cols();
    // Enumerate column vectors c with c[i0] >= 1 and c bounded entrywise.
    let mut col = vec![BigUint::zero(); m];
    enumerate_col(residual, &mut col, 0, i0, j0, bound, &mut |col| {
        // Given c, enumerate rows b with b[j0] >= 1 and c[i]*b[j] <= R[i][j].
        let mut row = vec![BigUint::zero(); n];
        enumerate_row(residual, col, &mut row, 0, j0, bound, &mut |row| {
            let mut next = residual.clone();
            for i in 0..m {
                for j in 0..n {
                    let prod = &col[i] * &row[j];
                    next.set(i, j, next.get(i, j) - prod);
                }
            }
            cols_acc.push(col.to_vec());
            rows_acc.push(row.to_vec());
            let stop = dfs_pieces(&mut next, remaining - 1, bound, cols_acc, rows_acc, emit);
            if !stop {
                cols_acc.pop();
                rows_acc.pop();
            }
            stop
        })
    })
}

/// Enumerates candidate piece columns; calls `k` for each complete candidate,
/// stopping early when `k` returns true.
fn enumerate_col(
    residual: &NatMatrix,
    col: &mut Vec<BigUint>,
    i: usize,
    i0: usize,
    j0: usize,
    bound: &BigUint,
    k: &mut impl FnMut(&[BigUint]) -> bool,
) -> bool {
    if i == col.len() {
        return k(col);
    }
    // c[i] can be at most R[i][j0] / 1 when b[j0] >= 1; use R[i][j0] with the
    // global bound. For i == i0 it must be at least 1.
    let cap = residual.get(i, j0).min(bound).clone();
    let lo: BigUint = if i == i0 { BigUint::one() } else { BigUint::zero() };
    let mut v = lo;
    while v <= cap {
        col[i] = v.clone();
        if enumerate_col(residual, col, i + 1, i0, j0, bound, k) {
            return true;
        }
        v += 1u32;
    }
    col[i] = BigUint::zero();
    false
}

fn enumerate_row(
    residual: &NatMatrix,
    col: &[BigUint],
    row: &mut Vec<BigUint>,
    j: usize,
    j0: usize,
    bound: &BigUint,
    k: &mut impl FnMut(&[BigUint]) -> bool,
) -> bool {
    if j == row.len() {
        return k(row);
    }
    // b[j] <= min over i with c[i] >= 1 of R[i][j] / c[i].
    let mut cap = bound.clone();
    for (i, c) in col.iter().enumerate() {
        if !c.is_zero() {
            cap = cap.min(residual.get(i, j) / c);
        }
    }
    let lo: BigUint = if j == j0 { BigUint::one() } else { BigUint::zero() };
    let mut v = lo;
    while v <= cap {
        row[j] = v.clone();
        if enumerate_row(residual, col, row, j + 1, j0, bound, k) {
            return true;
        }
        v += 1u32;
    }
    row[j] = BigUint::zero();
    false
}

// JSON form: {"rows": m, "cols": n, "entries": [["0","1"],...]} with decimal
// string entries, so readers need not assume any integer width.
impl Serialize for NatMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut s = serializer.serialize_struct("NatMatrix", 3)?;
        s.serialize_field("rows", &self.rows)?;
        s.serialize_field("cols", &self.cols)?;
        let grid: Vec<Vec<String>> = (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j).to_string()).collect())
            .collect();
        s.serialize_field("entries", &grid)?;
        s.end()
    }
}

impl<'de> Deserialize<'de> for NatMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            rows: usize,
            cols: usize,
            entries: Vec<Vec<String>>,
        }
        let raw = Raw::deserialize(deserializer)?;
        if raw.entries.len() != raw.rows || raw.entries.iter().any(|r| r.len() != raw.cols) {
            return Err(D::Error::custom("entry grid does not match declared shape"));
        }
        let mut entries = Vec::with_capacity(raw.rows * raw.cols);
        for row in &raw.entries {
            for e in row {
                let v: BigUint = e
                    .parse()
                    .map_err(|_| D::Error::custom(format!("bad natural number `{e}`")))?;
                entries.push(v);
            }
        }
        Ok(NatMatrix {
            rows: raw.rows,
            cols: raw.cols,
            entries,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(grid: &[Vec<u64>]) -> NatMatrix {
        NatMatrix::from_u64(grid)
    }

    #[test]
    fn multiply_identity() {
        let a = m(&[vec![1, 0], vec![1, 2], vec![0, 0]]);
        assert_eq!(a.multiply(&NatMatrix::identity(2)).unwrap(), a);
    }

    #[test]
    fn multiply_copy_then_add_is_two() {
        // [1 1] * [[1],[1]] = [2]
        let add = m(&[vec![1, 1]]);
        let cp = m(&[vec![1], vec![1]]);
        assert_eq!(add.multiply(&cp).unwrap(), m(&[vec![2]]));
    }

    #[test]
    fn multiply_by_zero_column_matrix() {
        let a = m(&[vec![1, 2], vec![3, 4]]);
        let empty = NatMatrix::zero(2, 0);
        let prod = a.multiply(&empty).unwrap();
        assert_eq!(prod.rows(), 2);
        assert_eq!(prod.cols(), 0);
    }

    #[test]
    fn multiply_dimension_mismatch() {
        let a = m(&[vec![1, 2]]);
        assert!(a.multiply(&m(&[vec![1, 2]])).is_err());
    }

    #[test]
    fn direct_sum_builds_identity() {
        let one = m(&[vec![1]]);
        assert_eq!(one.direct_sum(&one), NatMatrix::identity(2));
    }

    #[test]
    fn direct_sum_unit_law() {
        let a = m(&[vec![1, 2], vec![3, 4]]);
        assert_eq!(a.direct_sum(&NatMatrix::zero(0, 0)), a);
        assert_eq!(NatMatrix::zero(0, 0).direct_sum(&a), a);
    }

    #[test]
    fn direct_sum_rectangular() {
        let a = m(&[vec![1, 1]]);
        let b = m(&[vec![2]]);
        assert_eq!(a.direct_sum(&b), m(&[vec![1, 1, 0], vec![0, 0, 2]]));
    }

    #[test]
    fn rank_examples() {
        assert_eq!(m(&[vec![1, 0], vec![1, 2], vec![0, 0]]).rank(Field::Rationals), 2);
        assert_eq!(NatMatrix::zero(3, 4).rank(Field::Rationals), 0);
        let ones = NatMatrix::from_fn(4, 4, |_, _| BigUint::one());
        assert_eq!(ones.rank(Field::Rationals), 1);
        // GF(2) can differ: [[2]] has rank 1 over Q, 0 over GF(2).
        assert_eq!(m(&[vec![2]]).rank(Field::Rationals), 1);
        assert_eq!(m(&[vec![2]]).rank(Field::Gf2), 0);
    }

    #[test]
    fn rank_transpose_invariant() {
        let a = m(&[vec![1, 2, 0], vec![0, 1, 1]]);
        assert_eq!(a.rank(Field::Rationals), a.transpose().rank(Field::Rationals));
    }

    #[test]
    fn factorize_identity() {
        let f = nat_rank_factorize(&NatMatrix::identity(3), &BigUint::one(), 3);
        assert_eq!(f.inner_dim, 3);
        assert!(f.exact_over_naturals);
        assert_eq!(f.left.multiply(&f.right).unwrap(), NatMatrix::identity(3));
    }

    #[test]
    fn factorize_all_ones_through_one() {
        let a = m(&[vec![1, 1], vec![1, 1]]);
        let f = nat_rank_factorize(&a, &BigUint::one(), 2);
        assert_eq!(f.inner_dim, 1);
        assert_eq!(f.field_rank, 1);
        assert!(f.exact_over_naturals);
        assert_eq!(f.left.multiply(&f.right).unwrap(), a);
    }

    #[test]
    fn factorize_rank_two_example() {
        let a = m(&[vec![1, 0], vec![1, 2], vec![0, 0]]);
        let f = nat_rank_factorize(&a, &BigUint::from(2u32), 2);
        assert_eq!(f.inner_dim, 2);
        assert!(f.exact_over_naturals);
        assert_eq!(f.left.rows(), 3);
        assert_eq!(f.left.cols(), 2);
        assert_eq!(f.right.rows(), 2);
        assert_eq!(f.right.cols(), 2);
        assert_eq!(f.left.multiply(&f.right).unwrap(), a);
    }

    #[test]
    fn factorize_zero_matrix() {
        let f = nat_rank_factorize(&NatMatrix::zero(2, 2), &BigUint::one(), 2);
        assert_eq!(f.inner_dim, 0);
        assert!(f.exact_over_naturals);
        assert_eq!(f.left.multiply(&f.right).unwrap(), NatMatrix::zero(2, 2));
    }

    #[test]
    fn factorize_cap_exceeded_falls_back() {
        // Rank 2 matrix with cap 1: no hit, trivial split flagged inexact.
        let a = NatMatrix::identity(2);
        let f = nat_rank_factorize(&a, &BigUint::one(), 1);
        assert!(!f.exact_over_naturals);
        assert_eq!(f.left.multiply(&f.right).unwrap(), a);
        assert!(f.inner_dim >= f.field_rank);
    }

    #[test]
    fn block_split_diagonal() {
        let a = m(&[vec![1, 0], vec![0, 2]]);
        let blocks = a.block_split();
        assert_eq!(blocks, vec![m(&[vec![1]]), m(&[vec![2]])]);
    }

    #[test]
    fn block_split_coupled() {
        let a = m(&[vec![1, 1], vec![1, 1]]);
        assert_eq!(a.block_split(), vec![a]);
    }

    #[test]
    fn block_split_zero_row_then_zero_col() {
        let a = m(&[vec![0, 0], vec![0, 1]]);
        let blocks = a.block_split();
        assert_eq!(blocks.len(), 3);
        assert_eq!((blocks[0].rows(), blocks[0].cols()), (1, 0));
        assert_eq!((blocks[1].rows(), blocks[1].cols()), (0, 1));
        assert_eq!(blocks[2], m(&[vec![1]]));
        let reassembled = blocks
            .iter()
            .fold(NatMatrix::zero(0, 0), |acc, b| acc.direct_sum(b));
        assert_eq!(reassembled, a);
    }

    #[test]
    fn block_split_wide_block() {
        let a = m(&[vec![1, 1, 1, 0], vec![0, 0, 0, 2]]);
        let blocks = a.block_split();
        assert_eq!(blocks, vec![m(&[vec![1, 1, 1]]), m(&[vec![2]])]);
    }

    #[test]
    fn block_split_reassembles() {
        let a = m(&[
            vec![1, 0, 0, 0],
            vec![0, 0, 0, 0],
            vec![0, 0, 1, 1],
            vec![0, 0, 1, 0],
        ]);
        let blocks = a.block_split();
        let reassembled = blocks
            .iter()
            .fold(NatMatrix::zero(0, 0), |acc, b| acc.direct_sum(b));
        assert_eq!(reassembled, a);
    }

    #[test]
    fn json_round_trip() {
        let a = m(&[vec![1, 0], vec![1, 2], vec![0, 0]]);
        let text = serde_json::to_string(&a).unwrap();
        assert!(text.contains("\"rows\":3"));
        let back: NatMatrix = serde_json::from_str(&text).unwrap();
        assert_eq!(back, a);
    }
}
