//! Matrices whose entries are truncated series in a common variable and ring.

use crate::error::{Error, Result};
use crate::linalg::PMatrix;
use crate::padic::Zpn;
use crate::series::{TruncSeries, Var};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeriesMatrix {
    rows: usize,
    cols: usize,
    var: Var,
    ring: Zpn,
    entries: Vec<TruncSeries>,
}

impl SeriesMatrix {
    pub fn from_entries(var: Var, ring: Zpn, rows: usize, cols: usize, entries: Vec<TruncSeries>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::InvalidInput(format!("{} entries for a {rows}x{cols} matrix", entries.len())));
        }
        if let Some(e) = entries.iter().find(|e| e.var() != var || e.ring() != ring) {
            return Err(Error::ProfileMismatch(format!("entry {e:?} does not match {ring:?}/{}", var.name())));
        }
        Ok(SeriesMatrix { rows, cols, var, ring, entries })
    }

    pub fn zeros(var: Var, ring: Zpn, rows: usize, cols: usize, order: usize) -> Self {
        SeriesMatrix { rows, cols, var, ring, entries: vec![TruncSeries::zero(var, ring, order); rows * cols] }
    }

    pub fn identity(var: Var, ring: Zpn, n: usize, order: usize) -> Self {
        let mut m = Self::zeros(var, ring, n, n, order);
        for i in 0..n {
            m.entries[i * n + i] = TruncSeries::one(var, ring, order);
        }
        m
    }

    pub fn from_pmatrix(a: &PMatrix, var: Var, order: usize) -> Self {
        let ring = a.ring();
        let entries = (0..a.rows())
            .flat_map(|i| (0..a.cols()).map(move |j| (i, j)))
            .map(|(i, j)| TruncSeries::constant(var, ring, a.get(i, j), order))
            .collect();
        SeriesMatrix { rows: a.rows(), cols: a.cols(), var, ring, entries }
    }

    pub fn diagonal(var: Var, ring: Zpn, diag: Vec<TruncSeries>, order: usize) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(var, ring, n, n, order);
        for (i, s) in diag.into_iter().enumerate() {
            m.entries[i * n + i] = s;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn var(&self) -> Var {
        self.var
    }

    pub fn ring(&self) -> Zpn {
        self.ring
    }

    pub fn get(&self, i: usize, j: usize) -> &TruncSeries {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, s: TruncSeries) {
        assert_eq!((s.var(), s.ring()), (self.var, self.ring));
        self.entries[i * self.cols + j] = s;
    }

    pub fn entries(&self) -> &[TruncSeries] {
        &self.entries
    }

    /// Smallest order among the entries.
    pub fn order(&self) -> usize {
        self.entries.iter().map(TruncSeries::order).min().unwrap_or(usize::MAX)
    }

    pub fn map(&self, f: impl Fn(&TruncSeries) -> TruncSeries) -> SeriesMatrix {
        let entries: Vec<TruncSeries> = self.entries.iter().map(f).collect();
        let (var, ring) = entries.first().map_or((self.var, self.ring), |e| (e.var(), e.ring()));
        SeriesMatrix { entries, var, ring, ..*self }
    }

    pub fn try_map(&self, f: impl Fn(&TruncSeries) -> Result<TruncSeries>) -> Result<SeriesMatrix> {
        let entries = self.entries.iter().map(f).collect::<Result<Vec<_>>>()?;
        let (var, ring) = entries.first().map_or((self.var, self.ring), |e| (e.var(), e.ring()));
        Ok(SeriesMatrix { entries, var, ring, ..*self })
    }

    fn check(&self, other: &SeriesMatrix) -> Result<()> {
        if self.var != other.var || self.ring != other.ring {
            return Err(Error::ProfileMismatch(format!(
                "{:?}/{} vs {:?}/{}",
                self.ring,
                self.var.name(),
                other.ring,
                other.var.name()
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &SeriesMatrix) -> Result<SeriesMatrix> {
        self.check(other)?;
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::InvalidInput("matrix shapes differ".into()));
        }
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a.add(b)).collect();
        Ok(SeriesMatrix { entries, ..*self })
    }

    pub fn sub(&self, other: &SeriesMatrix) -> Result<SeriesMatrix> {
        self.check(other)?;
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::InvalidInput("matrix shapes differ".into()));
        }
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a.sub(b)).collect();
        Ok(SeriesMatrix { entries, ..*self })
    }

    pub fn mul(&self, other: &SeriesMatrix) -> Result<SeriesMatrix> {
        self.check(other)?;
        if self.cols != other.rows {
            return Err(Error::InvalidInput(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let order = self.order().min(other.order()).min(self.order().max(other.order()));
        let mut entries = Vec::with_capacity(self.rows * other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc: Option<TruncSeries> = None;
                for k in 0..self.cols {
                    let t = self.get(i, k).mul(other.get(k, j));
                    acc = Some(match acc {
                        None => t,
                        Some(a) => a.add(&t),
                    });
                }
                let fallback = if order == usize::MAX { 0 } else { order };
                entries.push(acc.unwrap_or_else(|| TruncSeries::zero(self.var, self.ring, fallback)));
            }
        }
        Ok(SeriesMatrix { rows: self.rows, cols: other.cols, var: self.var, ring: self.ring, entries })
    }

    /// Left multiplication by a constant matrix.
    pub fn left_mul_const(&self, a: &PMatrix) -> Result<SeriesMatrix> {
        let order = self.order();
        SeriesMatrix::from_pmatrix(a, self.var, if order == usize::MAX { 0 } else { order }).mul(self)
    }

    /// Right multiplication by a constant matrix.
    pub fn right_mul_const(&self, a: &PMatrix) -> Result<SeriesMatrix> {
        let order = self.order();
        self.mul(&SeriesMatrix::from_pmatrix(a, self.var, if order == usize::MAX { 0 } else { order }))
    }

    /// Entrywise (Hadamard) product.
    pub fn hadamard(&self, other: &SeriesMatrix) -> Result<SeriesMatrix> {
        self.check(other)?;
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a.mul(b)).collect();
        Ok(SeriesMatrix { entries, ..*self })
    }

    pub fn transpose(&self) -> SeriesMatrix {
        let mut entries = Vec::with_capacity(self.entries.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                entries.push(self.get(i, j).clone());
            }
        }
        SeriesMatrix { rows: self.cols, cols: self.rows, entries, ..*self }
    }

    /// Index `(i, k)` of the result pairs with `i * other.rows + k`.
    pub fn kronecker(&self, other: &SeriesMatrix) -> Result<SeriesMatrix> {
        self.check(other)?;
        let (r, c) = (self.rows * other.rows, self.cols * other.cols);
        let mut entries = Vec::with_capacity(r * c);
        for i in 0..self.rows {
            for k in 0..other.rows {
                for j in 0..self.cols {
                    for l in 0..other.cols {
                        entries.push(self.get(i, j).mul(other.get(k, l)));
                    }
                }
            }
        }
        Ok(SeriesMatrix { rows: r, cols: c, entries, ..*self })
    }

    pub fn block_diagonal(&self, other: &SeriesMatrix) -> Result<SeriesMatrix> {
        self.check(other)?;
        let order = self.order().min(other.order());
        let order = if order == usize::MAX { 0 } else { order };
        let mut m = SeriesMatrix::zeros(self.var, self.ring, self.rows + other.rows, self.cols + other.cols, order);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.set(i, j, self.get(i, j).clone());
            }
        }
        for i in 0..other.rows {
            for j in 0..other.cols {
                m.set(self.rows + i, self.cols + j, other.get(i, j).clone());
            }
        }
        Ok(m)
    }

    /// `out[i][j] = self[perm[i]][perm[j]]`.
    pub fn permute(&self, perm: &[usize]) -> SeriesMatrix {
        let n = perm.len();
        let mut entries = Vec::with_capacity(n * n);
        for &pi in perm {
            for &pj in perm {
                entries.push(self.get(pi, pj).clone());
            }
        }
        SeriesMatrix { rows: n, cols: n, entries, ..*self }
    }

    pub fn constant_term(&self) -> PMatrix {
        PMatrix::from_raw(self.ring, self.rows, self.cols, self.entries.iter().map(|e| e.coeff(0)).collect())
    }

    pub fn truncate(&self, order: usize) -> SeriesMatrix {
        self.map(|e| e.truncate(order))
    }

    pub fn reduce_to(&self, ring: Zpn) -> SeriesMatrix {
        SeriesMatrix { entries: self.entries.iter().map(|e| e.reduce_to(ring)).collect(), ring, ..*self }
    }

    pub fn shift_divide_exact(&self, k: usize) -> Result<SeriesMatrix> {
        self.try_map(|e| e.shift_divide_exact(k))
    }

    pub fn shift_up(&self, k: usize, cap: usize) -> SeriesMatrix {
        self.map(|e| e.shift_up(k, cap))
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(TruncSeries::is_zero)
    }

    pub fn eq_at_truncation(&self, other: &SeriesMatrix) -> bool {
        (self.rows, self.cols) == (other.rows, other.cols)
            && self.entries.iter().zip(&other.entries).all(|(a, b)| a.eq_at_truncation(b))
    }

    /// First entry `(i, j)` where the two matrices differ at truncation.
    pub fn first_difference(&self, other: &SeriesMatrix) -> Option<(usize, usize)> {
        (0..self.rows)
            .flat_map(|i| (0..self.cols).map(move |j| (i, j)))
            .find(|&(i, j)| !self.get(i, j).eq_at_truncation(other.get(i, j)))
    }

    /// Inverse over the series ring; the constant term must be invertible mod p.
    pub fn inverse(&self) -> Result<SeriesMatrix> {
        if self.rows != self.cols {
            return Err(Error::InvalidInput("inverse of a non-square matrix".into()));
        }
        let n = self.rows;
        let order = if n == 0 { 0 } else { self.order() };
        let mut a = self.truncate(order);
        let mut inv = SeriesMatrix::identity(self.var, self.ring, n, order);
        for col in 0..n {
            let piv = (col..n).find(|&r| a.get(r, col).is_unit()).ok_or(Error::SingularModP)?;
            if piv != col {
                for j in 0..n {
                    a.entries.swap(piv * n + j, col * n + j);
                    inv.entries.swap(piv * n + j, col * n + j);
                }
            }
            let pinv = a.get(col, col).invert_unit()?;
            for j in 0..n {
                a.entries[col * n + j] = a.get(col, j).mul(&pinv);
                inv.entries[col * n + j] = inv.get(col, j).mul(&pinv);
            }
            for r in 0..n {
                if r == col || a.get(r, col).is_zero() {
                    continue;
                }
                let f = a.get(r, col).clone();
                for j in 0..n {
                    a.entries[r * n + j] = a.get(r, j).sub(&f.mul(a.get(col, j)));
                    inv.entries[r * n + j] = inv.get(r, j).sub(&f.mul(inv.get(col, j)));
                }
            }
        }
        Ok(inv)
    }

    /// Determinant by expansion over column prefixes and row subsets (`O(2^n n)` products).
    pub fn det(&self) -> Result<TruncSeries> {
        if self.rows != self.cols {
            return Err(Error::InvalidInput("determinant of a non-square matrix".into()));
        }
        let n = self.rows;
        if n > 20 {
            return Err(Error::InvalidInput("determinant rank too large".into()));
        }
        let order = if n == 0 { 0 } else { self.order() };
        let one = TruncSeries::one(self.var, self.ring, order.max(1));
        if n == 0 {
            return Ok(one);
        }
        let mut dp: Vec<Option<TruncSeries>> = vec![None; 1 << n];
        dp[0] = Some(one);
        for k in 0..n {
            let mut next: Vec<Option<TruncSeries>> = vec![None; 1 << n];
            for mask in 0usize..(1 << n) {
                if mask.count_ones() as usize != k {
                    continue;
                }
                let Some(base) = &dp[mask] else { continue };
                for i in 0..n {
                    if mask & (1 << i) != 0 {
                        continue;
                    }
                    // sign: rows of the new subset above i
                    let above = (mask >> (i + 1)).count_ones();
                    let mut t = base.mul(self.get(i, k));
                    if above % 2 == 1 {
                        t = t.neg();
                    }
                    let m2 = mask | (1 << i);
                    next[m2] = Some(match next[m2].take() {
                        None => t,
                        Some(s) => s.add(&t),
                    });
                }
            }
            dp = next;
        }
        Ok(dp[(1 << n) - 1].take().expect("full subset reached").truncate(order))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring() -> Zpn {
        Zpn::new(3, 4).unwrap()
    }

    fn s(c: &[i64]) -> TruncSeries {
        TruncSeries::from_i64(Var::Pi0, ring(), c, 6)
    }

    fn m2(a: [&[i64]; 4]) -> SeriesMatrix {
        SeriesMatrix::from_entries(Var::Pi0, ring(), 2, 2, a.iter().map(|c| s(c)).collect()).unwrap()
    }

    #[test]
    fn det_of_two_by_two() {
        let m = m2([&[1, 1], &[2], &[0, 1], &[3, 0, 1]]);
        let expect = s(&[1, 1]).mul(&s(&[3, 0, 1])).sub(&s(&[2]).mul(&s(&[0, 1])));
        assert_eq!(m.det().unwrap(), expect);
    }

    #[test]
    fn det_is_multiplicative() {
        let a = m2([&[1, 1, 2], &[2, 0, 1], &[0, 1], &[3, 0, 1]]);
        let b = m2([&[2, 5], &[1], &[4, 1, 1], &[1, 2]]);
        let ab = a.mul(&b).unwrap();
        assert_eq!(ab.det().unwrap(), a.det().unwrap().mul(&b.det().unwrap()));
        let k = a.kronecker(&b).unwrap();
        assert_eq!(k.det().unwrap(), a.det().unwrap().pow(2).mul(&b.det().unwrap().pow(2)));
    }

    #[test]
    fn inverse_roundtrip() {
        let a = m2([&[1, 1, 2], &[3, 0, 1], &[0, 1], &[2, 0, 1]]);
        let inv = a.inverse().unwrap();
        assert_eq!(a.mul(&inv).unwrap(), SeriesMatrix::identity(Var::Pi0, ring(), 2, 6));
        let sing = m2([&[3, 1], &[0], &[0], &[1]]);
        assert_eq!(sing.inverse(), Err(Error::SingularModP));
    }
}
