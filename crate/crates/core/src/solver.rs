//! Dense linear algebra over GF(2^m).
//!
//! Pivoting always takes the first nonzero entry scanning down the column.
//! Characteristic two means subtraction is addition and determinants carry no sign.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::gf2m::{Field, Gf};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GfMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Gf>,
}

impl GfMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        GfMatrix {
            rows,
            cols,
            entries: vec![Gf::ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Gf::ONE;
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Gf>>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Ok(GfMatrix {
            rows: rows.len(),
            cols,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[Gf] {
        &self.entries
    }

    pub fn row(&self, i: usize) -> &[Gf] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        let (lo, hi) = (a.min(b), a.max(b));
        let (head, tail) = self.entries.split_at_mut(hi * self.cols);
        head[lo * self.cols..(lo + 1) * self.cols].swap_with_slice(&mut tail[..self.cols]);
    }

    /// `row[dst] += factor · row[src]`
    fn axpy_row(&mut self, f: &Field, dst: usize, src: usize, factor: Gf, from_col: usize) {
        if factor.is_zero() {
            return;
        }
        let cols = self.cols;
        for c in from_col..cols {
            let s = self.entries[src * cols + c];
            if !s.is_zero() {
                self.entries[dst * cols + c] += f.mul(factor, s);
            }
        }
    }

    fn scale_row(&mut self, f: &Field, row: usize, factor: Gf) {
        for v in &mut self.entries[row * self.cols..(row + 1) * self.cols] {
            *v = f.mul(*v, factor);
        }
    }

    pub fn mul_vec(&self, f: &Field, v: &[Gf]) -> Result<Vec<Gf>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix times vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(Gf::ZERO, |acc, (&a, &b)| acc + f.mul(a, b))
            })
            .collect())
    }

    pub fn mul(&self, f: &Field, other: &GfMatrix) -> Result<GfMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = GfMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += f.mul(a, other[(k, j)]);
                }
            }
        }
        Ok(out)
    }

    /// Reduces `self` in place to row-echelon form, applying the same row
    /// operations to `rhs` when given. Returns the pivot columns.
    fn eliminate(&mut self, f: &Field, mut rhs: Option<&mut GfMatrix>) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
            if row == self.rows {
                break;
            }
            let Some(p) = (row..self.rows).find(|&r| !self[(r, col)].is_zero()) else {
                continue;
            };
            self.swap_rows(row, p);
            if let Some(b) = rhs.as_deref_mut() {
                b.swap_rows(row, p);
            }
            let inv = f.inv(self[(row, col)]).expect("pivot is nonzero");
            self.scale_row(f, row, inv);
            if let Some(b) = rhs.as_deref_mut() {
                b.scale_row(f, row, inv);
            }
            for r in 0..self.rows {
                if r != row {
                    let factor = self[(r, col)];
                    if !factor.is_zero() {
                        self.axpy_row(f, r, row, factor, col);
                        if let Some(b) = rhs.as_deref_mut() {
                            b.axpy_row(f, r, row, factor, 0);
                        }
                    }
                }
            }
            pivots.push(col);
            row += 1;
        }
        pivots
    }

    pub fn rank(&self, f: &Field) -> usize {
        self.clone().eliminate(f, None).len()
    }

    pub fn determinant(&self, f: &Field) -> Result<Gf> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch(
                "determinant of a non-square matrix".into(),
            ));
        }
        let mut a = self.clone();
        let n = a.rows;
        let mut det = Gf::ONE;
        for col in 0..n {
            let Some(p) = (col..n).find(|&r| !a[(r, col)].is_zero()) else {
                return Ok(Gf::ZERO);
            };
            a.swap_rows(col, p);
            let pivot = a[(col, col)];
            det = f.mul(det, pivot);
            let inv = f.inv(pivot)?;
            for r in col + 1..n {
                let factor = f.mul(a[(r, col)], inv);
                a.axpy_row(f, r, col, factor, col);
            }
        }
        Ok(det)
    }

    pub fn inverse(&self, f: &Field) -> Result<GfMatrix> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch(
                "inverse of a non-square matrix".into(),
            ));
        }
        let mut a = self.clone();
        let mut inv = GfMatrix::identity(self.rows);
        let pivots = a.eliminate(f, Some(&mut inv));
        if let Some(column) = first_gap(&pivots, self.cols) {
            return Err(Error::SingularMatrix { column });
        }
        Ok(inv)
    }

    /// Solves `A·x = b` for square `A`.
    pub fn solve(&self, f: &Field, b: &[Gf]) -> Result<Vec<Gf>> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch(
                "solve needs a square matrix".into(),
            ));
        }
        self.solve_full_rank(f, b)
    }

    /// Solves `A·x = b` when `A` has at least as many rows as columns and full
    /// column rank. Fails if the system is rank deficient or inconsistent.
    pub fn solve_full_rank(&self, f: &Field, b: &[Gf]) -> Result<Vec<Gf>> {
        if b.len() != self.rows {
            return Err(Error::DimensionMismatch(format!(
                "right-hand side has length {}, matrix has {} rows",
                b.len(),
                self.rows
            )));
        }
        let mut a = self.clone();
        let mut rhs = GfMatrix {
            rows: self.rows,
            cols: 1,
            entries: b.to_vec(),
        };
        let pivots = a.eliminate(f, Some(&mut rhs));
        if let Some(column) = first_gap(&pivots, self.cols) {
            return Err(Error::SingularMatrix { column });
        }
        if rhs.entries[self.cols..].iter().any(|v| !v.is_zero()) {
            return Err(Error::Domain("inconsistent overdetermined system".into()));
        }
        rhs.entries.truncate(self.cols);
        Ok(rhs.entries)
    }
}

/// First column without a pivot, if any.
fn first_gap(pivots: &[usize], cols: usize) -> Option<usize> {
    (0..cols).find(|&c| pivots.get(c) != Some(&c))
}

impl Index<(usize, usize)> for GfMatrix {
    type Output = Gf;
    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &Gf {
        debug_assert!(r < self.rows && c < self.cols);
        &self.entries[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for GfMatrix {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Gf {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.entries[r * self.cols + c]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(f: &Field, rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> GfMatrix {
        let mut m = GfMatrix::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m[(r, c)] = Gf(rng.gen_range(0..f.size()) as u16);
            }
        }
        m
    }

    /// Leibniz expansion; exponential but independent of elimination.
    fn leibniz(f: &Field, m: &GfMatrix) -> Gf {
        fn go(f: &Field, m: &GfMatrix, row: usize, used: &mut Vec<bool>) -> Gf {
            if row == m.rows() {
                return Gf::ONE;
            }
            let mut acc = Gf::ZERO;
            for c in 0..m.cols() {
                if !used[c] && !m[(row, c)].is_zero() {
                    used[c] = true;
                    acc += f.mul(m[(row, c)], go(f, m, row + 1, used));
                    used[c] = false;
                }
            }
            acc
        }
        go(f, m, 0, &mut vec![false; m.cols()])
    }

    #[test]
    fn identity_solves_to_rhs() {
        let f = Field::new(4).unwrap();
        let b: Vec<Gf> = (0..5).map(|i| Gf(i * 3 % 16)).collect();
        assert_eq!(GfMatrix::identity(5).solve(&f, &b).unwrap(), b);
        assert_eq!(GfMatrix::identity(5).determinant(&f).unwrap(), Gf::ONE);
        assert_eq!(GfMatrix::identity(5).rank(&f), 5);
    }

    #[test]
    fn one_by_one() {
        let f = Field::new(4).unwrap();
        let a = GfMatrix::from_rows(vec![vec![Gf(2)]]).unwrap();
        let x = a.solve(&f, &[Gf(3)]).unwrap();
        assert_eq!(x, vec![f.mul(f.inv(Gf(2)).unwrap(), Gf(3))]);
    }

    #[test]
    fn random_systems_multiply_back() {
        let f = Field::new(8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut solved = 0;
        while solved < 20 {
            let a = random_matrix(&f, &mut rng, 8, 8);
            let b: Vec<Gf> = (0..8).map(|_| Gf(rng.gen_range(0..256))).collect();
            let det = a.determinant(&f).unwrap();
            match a.solve(&f, &b) {
                Ok(x) => {
                    assert!(!det.is_zero());
                    assert_eq!(a.mul_vec(&f, &x).unwrap(), b);
                    let inv = a.inverse(&f).unwrap();
                    assert_eq!(a.mul(&f, &inv).unwrap(), GfMatrix::identity(8));
                    solved += 1;
                }
                Err(Error::SingularMatrix { .. }) => assert!(det.is_zero()),
                Err(e) => panic!("{e}"),
            }
        }
    }

    #[test]
    fn determinant_matches_leibniz() {
        let f = Field::new(4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..=6 {
            for _ in 0..10 {
                let a = random_matrix(&f, &mut rng, n, n);
                assert_eq!(a.determinant(&f).unwrap(), leibniz(&f, &a));
            }
        }
    }

    #[test]
    fn repeated_row_is_singular() {
        let f = Field::new(6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut a = random_matrix(&f, &mut rng, 5, 5);
        for c in 0..5 {
            a[(3, c)] = a[(1, c)];
        }
        assert_eq!(a.determinant(&f).unwrap(), Gf::ZERO);
        assert!(matches!(
            a.solve(&f, &[Gf::ZERO; 5]),
            Err(Error::SingularMatrix { .. })
        ));
        assert!(a.rank(&f) < 5);
    }

    #[test]
    fn singular_error_names_the_column() {
        let f = Field::new(4).unwrap();
        let a = GfMatrix::from_rows(vec![
            vec![Gf(1), Gf(2), Gf(0)],
            vec![Gf(0), Gf(0), Gf(1)],
            vec![Gf(0), Gf(0), Gf(5)],
        ])
        .unwrap();
        assert_eq!(
            a.solve(&f, &[Gf(1); 3]),
            Err(Error::SingularMatrix { column: 1 })
        );
    }

    #[test]
    fn zero_matrix_rank() {
        let f = Field::new(4).unwrap();
        assert_eq!(GfMatrix::zeros(3, 7).rank(&f), 0);
    }

    #[test]
    fn overdetermined_consistent_and_not() {
        let f = Field::new(8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_matrix(&f, &mut rng, 9, 4);
        assert_eq!(a.rank(&f), 4);
        let x: Vec<Gf> = (1..=4).map(Gf).collect();
        let b = a.mul_vec(&f, &x).unwrap();
        assert_eq!(a.solve_full_rank(&f, &b).unwrap(), x);
        let mut bad = b.clone();
        bad[8] += Gf(1);
        assert!(a.solve_full_rank(&f, &bad).is_err());
    }
}
