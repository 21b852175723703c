//! Dense matrices over `Z/p^N` and the canonical (Howell) echelon form.
//!
//! `Z/p^N` is a local principal ideal ring: every nonzero element is `unit * p^v`.
//! Row echelon form alone is not canonical there, so kernels and lattices are normalised to
//! Howell form: pivots are powers of `p`, entries above a pivot `p^v` lie in `[0, p^v)`, and
//! for every pivot row the multiple `p^(N-v) * row` is reduced into the rows below it.

use std::fmt;

use crate::error::{Error, Result};
use crate::padic::{PScalar, Zpn};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PMatrix {
    rows: usize,
    cols: usize,
    data: Vec<u64>,
    ring: Zpn,
}

impl fmt::Debug for PMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PMatrix[{:?}; ", self.ring)?;
        for i in 0..self.rows {
            write!(f, "{:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

impl PMatrix {
    pub fn zeros(ring: Zpn, rows: usize, cols: usize) -> Self {
        PMatrix { rows, cols, data: vec![0; rows * cols], ring }
    }

    pub fn identity(ring: Zpn, n: usize) -> Self {
        let mut m = Self::zeros(ring, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    pub fn from_rows(ring: Zpn, rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let mut m = Self::zeros(ring, r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged matrix");
            for (j, &v) in row.iter().enumerate() {
                m.data[i * c + j] = ring.from_i64(v);
            }
        }
        m
    }

    pub fn from_raw(ring: Zpn, rows: usize, cols: usize, data: Vec<u64>) -> Self {
        assert_eq!(data.len(), rows * cols);
        let data = data.into_iter().map(|x| ring.reduce(x)).collect();
        PMatrix { rows, cols, data, ring }
    }

    pub fn diagonal(ring: Zpn, diag: &[u64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(ring, n, n);
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * n + i] = ring.reduce(d);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn ring(&self) -> Zpn {
        self.ring
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: u64) {
        self.data[i * self.cols + j] = self.ring.reduce(v);
    }

    pub fn entry(&self, i: usize, j: usize) -> PScalar {
        PScalar::from_raw(self.ring, self.get(i, j))
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<u64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.ring, self.rows)
    }

    fn check_ring(&self, other: &PMatrix) -> Result<()> {
        if self.ring != other.ring {
            return Err(Error::RingMismatch(format!("{:?} vs {:?}", self.ring, other.ring)));
        }
        Ok(())
    }

    pub fn mul(&self, other: &PMatrix) -> Result<PMatrix> {
        self.check_ring(other)?;
        if self.cols != other.rows {
            return Err(Error::InvalidInput(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let r = self.ring;
        let mut out = PMatrix::zeros(r, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    let idx = i * other.cols + j;
                    out.data[idx] = r.add(out.data[idx], r.mul(a, other.get(k, j)));
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[u64]) -> Vec<u64> {
        assert_eq!(v.len(), self.cols);
        let r = self.ring;
        (0..self.rows)
            .map(|i| (0..self.cols).fold(0, |acc, j| r.add(acc, r.mul(self.get(i, j), v[j]))))
            .collect()
    }

    pub fn add(&self, other: &PMatrix) -> Result<PMatrix> {
        self.check_ring(other)?;
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let r = self.ring;
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| r.add(a, b)).collect();
        Ok(PMatrix { data, ..*self })
    }

    pub fn sub(&self, other: &PMatrix) -> Result<PMatrix> {
        self.check_ring(other)?;
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let r = self.ring;
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| r.sub(a, b)).collect();
        Ok(PMatrix { data, ..*self })
    }

    pub fn scale(&self, c: u64) -> PMatrix {
        let r = self.ring;
        PMatrix { data: self.data.iter().map(|&a| r.mul(a, c)).collect(), ..*self }
    }

    pub fn transpose(&self) -> PMatrix {
        let mut out = PMatrix::zeros(self.ring, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.get(i, j);
            }
        }
        out
    }

    /// Kronecker product, row index `(i, k) -> i * other.rows + k`.
    pub fn kronecker(&self, other: &PMatrix) -> Result<PMatrix> {
        self.check_ring(other)?;
        let r = self.ring;
        let (rr, cc) = (self.rows * other.rows, self.cols * other.cols);
        let mut out = PMatrix::zeros(r, rr, cc);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out.data[(i * other.rows + k) * cc + j * other.cols + l] =
                            r.mul(a, other.get(k, l));
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn block_diagonal(&self, other: &PMatrix) -> Result<PMatrix> {
        self.check_ring(other)?;
        let mut out =
            PMatrix::zeros(self.ring, self.rows + other.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, self.get(i, j));
            }
        }
        for i in 0..other.rows {
            for j in 0..other.cols {
                out.set(self.rows + i, self.cols + j, other.get(i, j));
            }
        }
        Ok(out)
    }

    /// `out[i][j] = self[perm[i]][perm[j]]`.
    pub fn permute(&self, perm: &[usize]) -> PMatrix {
        assert!(self.is_square() && perm.len() == self.rows);
        let n = self.rows;
        let mut out = PMatrix::zeros(self.ring, n, n);
        for i in 0..n {
            for j in 0..n {
                out.data[i * n + j] = self.get(perm[i], perm[j]);
            }
        }
        out
    }

    /// Reduction to a lower precision of the same prime.
    pub fn reduce_to(&self, ring: Zpn) -> Result<PMatrix> {
        if ring.p() != self.ring.p() || ring.precision() > self.ring.precision() {
            return Err(Error::RingMismatch(format!("cannot reduce {:?} to {:?}", self.ring, ring)));
        }
        Ok(PMatrix {
            data: self.data.iter().map(|&x| ring.reduce(x)).collect(),
            ring,
            ..*self
        })
    }

    /// Whether the determinant is a unit, decided by rank modulo `p`.
    pub fn is_invertible(&self) -> bool {
        if !self.is_square() {
            return false;
        }
        let p = self.ring.p();
        let n = self.rows;
        let mut m: Vec<Vec<u64>> = self.to_rows().into_iter().map(|r| r.into_iter().map(|x| x % p).collect()).collect();
        let fp = Zpn::new(p, 1).unwrap();
        for c in 0..n {
            let Some(piv) = (c..n).find(|&i| m[i][c] != 0) else {
                return false;
            };
            m.swap(c, piv);
            let inv = fp.inv(m[c][c]).unwrap();
            for i in c + 1..n {
                let f = fp.mul(m[i][c], inv);
                if f != 0 {
                    for j in c..n {
                        m[i][j] = fp.sub(m[i][j], fp.mul(f, m[c][j]));
                    }
                }
            }
        }
        true
    }

    /// Inverse modulo `p^N` by Gauss-Jordan elimination with unit pivots.
    pub fn inverse(&self) -> Result<PMatrix> {
        if !self.is_square() {
            return Err(Error::InvalidInput("inverse of a non-square matrix".into()));
        }
        let r = self.ring;
        let n = self.rows;
        let mut a = self.to_rows();
        let mut inv = PMatrix::identity(r, n).to_rows();
        for c in 0..n {
            let piv = (c..n).find(|&i| r.is_unit(a[i][c])).ok_or(Error::SingularModP)?;
            a.swap(c, piv);
            inv.swap(c, piv);
            let s = r.inv(a[c][c])?;
            for j in 0..n {
                a[c][j] = r.mul(a[c][j], s);
                inv[c][j] = r.mul(inv[c][j], s);
            }
            for i in 0..n {
                if i == c || a[i][c] == 0 {
                    continue;
                }
                let f = a[i][c];
                for j in 0..n {
                    a[i][j] = r.sub(a[i][j], r.mul(f, a[c][j]));
                    inv[i][j] = r.sub(inv[i][j], r.mul(f, inv[c][j]));
                }
            }
        }
        Ok(PMatrix { rows: n, cols: n, data: inv.concat(), ring: r })
    }

    /// Exponents `v_i` of the elementary divisors `p^{v_i}` (Smith form), ascending.
    /// Zero divisors are reported as `N`.
    pub fn elementary_divisor_exponents(&self) -> Vec<u32> {
        let r = self.ring;
        let mut a = self.to_rows();
        let (m, n) = (self.rows, self.cols);
        let mut out = Vec::new();
        for t in 0..m.min(n) {
            let mut best: Option<(usize, usize, u32)> = None;
            for (i, row) in a.iter().enumerate().skip(t) {
                for (j, &x) in row.iter().enumerate().skip(t) {
                    let v = r.valuation(x);
                    if v < r.precision() && best.is_none_or(|b| v < b.2) {
                        best = Some((i, j, v));
                    }
                }
            }
            let Some((bi, bj, v)) = best else {
                out.extend(std::iter::repeat_n(r.precision(), m.min(n) - t));
                break;
            };
            a.swap(t, bi);
            for row in a.iter_mut() {
                row.swap(t, bj);
            }
            out.push(v);
            let (u, _) = r.split_unit(a[t][t]);
            let uinv = r.inv(u).unwrap();
            let pv = r.p_pow(v);
            for i in t + 1..m {
                if a[i][t] != 0 {
                    let f = r.mul(a[i][t] / pv, uinv);
                    for j in t..n {
                        a[i][j] = r.sub(a[i][j], r.mul(f, a[t][j]));
                    }
                }
            }
            for j in t + 1..n {
                if a[t][j] != 0 {
                    let f = r.mul(a[t][j] / pv, uinv);
                    for row in a.iter_mut().skip(t) {
                        row[j] = r.sub(row[j], r.mul(f, row[t]));
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }
}

/// Howell form of the row span of `rows` (each of length `ncols`). Zero rows are dropped.
pub fn howell_form(ring: Zpn, rows: Vec<Vec<u64>>, ncols: usize) -> Vec<Vec<u64>> {
    let mut pending: Vec<Vec<u64>> = rows.into_iter().filter(|r| r.iter().any(|&x| x != 0)).collect();
    let mut done: Vec<(usize, u32, Vec<u64>)> = Vec::new();
    for c in 0..ncols {
        let mut best: Option<(usize, u32)> = None;
        for (i, row) in pending.iter().enumerate() {
            if row[c] != 0 {
                let v = ring.valuation(row[c]);
                if best.is_none_or(|b| v < b.1) {
                    best = Some((i, v));
                }
            }
        }
        let Some((idx, v)) = best else { continue };
        let mut piv = pending.remove(idx);
        let (u, _) = ring.split_unit(piv[c]);
        let uinv = ring.inv(u).unwrap();
        for x in piv.iter_mut() {
            *x = ring.mul(*x, uinv);
        }
        let pv = ring.p_pow(v);
        debug_assert_eq!(piv[c], pv);
        for row in pending.iter_mut() {
            if row[c] != 0 {
                let f = row[c] / pv;
                for j in c..ncols {
                    row[j] = ring.sub(row[j], ring.mul(f, piv[j]));
                }
            }
        }
        if v > 0 {
            let s = ring.p_pow(ring.precision() - v);
            let sat: Vec<u64> = piv.iter().map(|&x| ring.mul(x, s)).collect();
            if sat.iter().any(|&x| x != 0) {
                pending.push(sat);
            }
        }
        for (_, _, row) in done.iter_mut() {
            let q = row[c] / pv;
            if q != 0 {
                for j in c..ncols {
                    row[j] = ring.sub(row[j], ring.mul(q, piv[j]));
                }
            }
        }
        pending.retain(|r| r.iter().any(|&x| x != 0));
        done.push((c, v, piv));
    }
    done.into_iter().map(|(_, _, r)| r).collect()
}

/// Pivot column and pivot valuation of a Howell-form row.
pub fn pivot_of(ring: Zpn, row: &[u64]) -> Option<(usize, u32)> {
    row.iter().position(|&x| x != 0).map(|c| (c, ring.valuation(row[c])))
}

/// Canonical generators (as rows) of `{x : A x = 0}`.
pub fn howell_kernel(a: &PMatrix) -> PMatrix {
    let r = a.ring();
    let (m, n) = (a.rows(), a.cols());
    let aug: Vec<Vec<u64>> = (0..n)
        .map(|j| {
            let mut row = vec![0u64; m + n];
            for i in 0..m {
                row[i] = a.get(i, j);
            }
            row[m + j] = 1;
            row
        })
        .collect();
    let h = howell_form(r, aug, m + n);
    let kernel_rows: Vec<Vec<u64>> = h
        .into_iter()
        .filter(|row| row[..m].iter().all(|&x| x == 0))
        .map(|row| row[m..].to_vec())
        .collect();
    let canon = howell_form(r, kernel_rows, n);
    let k = canon.len();
    PMatrix { rows: k, cols: n, data: canon.concat(), ring: r }
}

/// Some solution of `A x = b`, or `None` if the system is inconsistent.
pub fn solve(a: &PMatrix, b: &[u64]) -> Option<Vec<u64>> {
    let r = a.ring();
    let (m, n) = (a.rows(), a.cols());
    assert_eq!(b.len(), m);
    let aug: Vec<Vec<u64>> = (0..n)
        .map(|j| {
            let mut row = vec![0u64; m + n];
            for i in 0..m {
                row[i] = a.get(i, j);
            }
            row[m + j] = 1;
            row
        })
        .collect();
    let h = howell_form(r, aug, m + n);
    let mut t: Vec<u64> = b.iter().map(|&x| r.reduce(x)).chain(std::iter::repeat_n(0, n)).collect();
    for row in &h {
        let Some((c, v)) = pivot_of(r, row) else { continue };
        if c >= m {
            break;
        }
        if t[..c].iter().any(|&x| x != 0) {
            return None;
        }
        if t[c] == 0 {
            continue;
        }
        if r.valuation(t[c]) < v {
            return None;
        }
        let f = t[c] / r.p_pow(v);
        for j in c..m + n {
            t[j] = r.sub(t[j], r.mul(f, row[j]));
        }
    }
    if t[..m].iter().any(|&x| x != 0) {
        return None;
    }
    Some(t[m..].iter().map(|&x| r.neg(x)).collect())
}

/// Howell form of a lattice given by generator rows, as a matrix.
pub fn lattice_canonical(ring: Zpn, rows: Vec<Vec<u64>>, ncols: usize) -> PMatrix {
    let h = howell_form(ring, rows, ncols);
    let k = h.len();
    PMatrix { rows: k, cols: ncols, data: h.concat(), ring }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(p: u64, n: u32) -> Zpn {
        Zpn::new(p, n).unwrap()
    }

    #[test]
    fn inverse_examples() {
        let r = ring(5, 2);
        let id = PMatrix::identity(r, 2);
        assert_eq!(id.inverse().unwrap(), id);
        let u = PMatrix::from_rows(r, &[vec![1, 1], vec![0, 1]]);
        assert_eq!(u.inverse().unwrap(), PMatrix::from_rows(r, &[vec![1, 24], vec![0, 1]]));
        let s = PMatrix::from_rows(r, &[vec![5, 0], vec![0, 1]]);
        assert_eq!(s.inverse(), Err(Error::SingularModP));
        assert!(!s.is_invertible());
    }

    #[test]
    fn kernel_examples() {
        let r = ring(3, 2);
        let k = howell_kernel(&PMatrix::identity(r, 2));
        assert_eq!(k.rows(), 0);
        let r25 = ring(5, 2);
        let k = howell_kernel(&PMatrix::from_rows(r25, &[vec![5]]));
        assert_eq!(k.to_rows(), vec![vec![5]]);
        let k = howell_kernel(&PMatrix::from_rows(r, &[vec![0]]));
        assert_eq!(k.to_rows(), vec![vec![1]]);
    }

    #[test]
    fn howell_is_canonical_under_row_operations() {
        let r = ring(3, 3);
        let rows = vec![vec![3, 6, 1], vec![9, 0, 2], vec![0, 3, 3]];
        let h1 = howell_form(r, rows.clone(), 3);
        let shuffled = vec![
            rows[2].clone(),
            rows[0].iter().zip(&rows[1]).map(|(&a, &b)| r.add(a, r.mul(2, b))).collect(),
            rows[1].clone(),
        ];
        assert_eq!(h1, howell_form(r, shuffled, 3));
    }

    #[test]
    fn elementary_divisors_of_diagonal() {
        let r = ring(3, 4);
        let a = PMatrix::from_rows(r, &[vec![1, 1], vec![0, 1]]);
        let d = PMatrix::diagonal(r, &[9, 1]);
        let c = a.mul(&d).unwrap();
        assert_eq!(c.elementary_divisor_exponents(), vec![0, 2]);
        assert_eq!(PMatrix::zeros(r, 2, 2).elementary_divisor_exponents(), vec![4, 4]);
    }

    #[test]
    fn solve_finds_solutions_and_rejects_inconsistent() {
        let r = ring(5, 3);
        let a = PMatrix::from_rows(r, &[vec![5, 1], vec![0, 25]]);
        let x = solve(&a, &[7, 50]).unwrap();
        assert_eq!(a.mul_vec(&x), vec![7, 50]);
        assert!(solve(&a, &[0, 5]).is_none());
    }

    /// Brute-force kernel spans over small rings, compared with the Howell kernel.
    fn span(r: Zpn, gens: &[Vec<u64>], n: usize) -> std::collections::BTreeSet<Vec<u64>> {
        let mut set = std::collections::BTreeSet::new();
        set.insert(vec![0; n]);
        loop {
            let mut grew = false;
            let current: Vec<_> = set.iter().cloned().collect();
            for v in &current {
                for g in gens {
                    let w: Vec<u64> = v.iter().zip(g).map(|(&a, &b)| r.add(a, b)).collect();
                    if set.insert(w) {
                        grew = true;
                    }
                }
            }
            if !grew {
                return set;
            }
        }
    }

    proptest::proptest! {
        #[test]
        fn kernel_matches_brute_force(
            pn in proptest::sample::select(vec![(3u64, 1u32), (3, 2), (5, 1), (5, 2), (3, 3), (5, 3)]),
            rows in 1usize..4,
            cols in 1usize..3,
            seed in proptest::collection::vec(0u64..1000, 8),
        ) {
            let r = ring(pn.0, pn.1);
            let data: Vec<u64> = (0..rows * cols).map(|i| r.reduce(seed[i % 8] * (i as u64 + 1))).collect();
            let a = PMatrix::from_raw(r, rows, cols, data);
            let k = howell_kernel(&a);
            for row in k.to_rows() {
                proptest::prop_assert!(a.mul_vec(&row).iter().all(|&x| x == 0));
            }
            let q = r.modulus();
            let mut brute = std::collections::BTreeSet::new();
            let total = q.pow(cols as u32);
            for idx in 0..total {
                let mut x = vec![0; cols];
                let mut t = idx;
                for xi in x.iter_mut() {
                    *xi = t % q;
                    t /= q;
                }
                if a.mul_vec(&x).iter().all(|&v| v == 0) {
                    brute.insert(x);
                }
            }
            proptest::prop_assert_eq!(span(r, &k.to_rows(), cols), brute);
            proptest::prop_assert_eq!(howell_kernel(&a), k);
        }

        #[test]
        fn inverse_is_two_sided(seed in proptest::collection::vec(0u64..10_000, 9), p in proptest::sample::select(vec![3u64, 5, 7])) {
            let r = ring(p, 6);
            let a = PMatrix::from_raw(r, 3, 3, seed);
            proptest::prop_assume!(a.is_invertible());
            let inv = a.inverse().unwrap();
            proptest::prop_assert!(a.mul(&inv).unwrap().is_identity());
            proptest::prop_assert!(inv.mul(&a).unwrap().is_identity());
        }
    }
}
