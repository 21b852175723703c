//! Fontaine-Laffaille modules presented by an adapted basis: weights `r_j` and a matrix `A`
//! with `φ(e_j) = q^{r_j} Σ_i a_ij e_i` on the Wach side.

use crate::error::{Error, Result};
use crate::io::Report;
use crate::linalg::PMatrix;
use crate::padic::Zpn;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FLModule {
    pub h: u32,
    pub weights: Vec<u32>,
    pub a: PMatrix,
    pub labels: Vec<String>,
    /// `input_order[k]` is the position, before sorting, of the k-th basis vector.
    pub input_order: Vec<usize>,
}

fn sorting_permutation(weights: &[u32]) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..weights.len()).collect();
    perm.sort_by_key(|&i| weights[i]);
    perm
}

impl FLModule {
    /// Sorts the weights (stably) and conjugates `A` accordingly; `h` is the largest weight.
    pub fn new(weights: Vec<u32>, a: PMatrix) -> Result<Self> {
        let labels = (1..=weights.len()).map(|i| format!("e{i}")).collect();
        Self::with_labels(weights, a, labels)
    }

    pub fn with_labels(weights: Vec<u32>, a: PMatrix, labels: Vec<String>) -> Result<Self> {
        let d = weights.len();
        if a.rows() != d || a.cols() != d {
            return Err(Error::InvalidInput(format!(
                "A is {}x{} but there are {d} weights",
                a.rows(),
                a.cols()
            )));
        }
        if labels.len() != d {
            return Err(Error::InvalidInput(format!("{} labels for rank {d}", labels.len())));
        }
        let perm = sorting_permutation(&weights);
        let h = weights.iter().copied().max().unwrap_or(0);
        Ok(FLModule {
            h,
            weights: perm.iter().map(|&i| weights[i]).collect(),
            a: a.permute(&perm),
            labels: perm.iter().map(|&i| labels[i].clone()).collect(),
            input_order: perm,
        })
    }

    pub fn zero(ring: Zpn) -> Self {
        FLModule { h: 0, weights: vec![], a: PMatrix::zeros(ring, 0, 0), labels: vec![], input_order: vec![] }
    }

    /// Rank one object `(r, a)`.
    pub fn rank_one(ring: Zpn, r: u32, a: i64) -> Self {
        FLModule::new(vec![r], PMatrix::from_rows(ring, &[vec![a]])).expect("1x1 matrix")
    }

    /// Raises the declared weight bound.
    pub fn with_h(mut self, h: u32) -> Self {
        self.h = self.h.max(h);
        self
    }

    pub fn d(&self) -> usize {
        self.weights.len()
    }

    pub fn ring(&self) -> Zpn {
        self.a.ring()
    }

    pub fn p(&self) -> u64 {
        self.ring().p()
    }

    /// Same object in the basis `e'_k = e_{perm[k]}` (weights need not stay sorted).
    pub fn permuted(&self, perm: &[usize]) -> FLModule {
        FLModule {
            h: self.h,
            weights: perm.iter().map(|&i| self.weights[i]).collect(),
            a: self.a.permute(perm),
            labels: perm.iter().map(|&i| self.labels[i].clone()).collect(),
            input_order: perm.iter().map(|&i| self.input_order[i]).collect(),
        }
    }
}

/// A sub-lattice `⊕_{α_i ≠ OMITTED} p^{α_i} F_{·,i}` of a free module of rank `D`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeSub {
    pub f: PMatrix,
    /// `None` marks an omitted column.
    pub alpha: Vec<Option<u32>>,
}

impl LatticeSub {
    pub fn new(f: PMatrix, alpha: Vec<Option<u32>>) -> Result<Self> {
        if !f.is_square() || f.rows() != alpha.len() {
            return Err(Error::InvalidInput(format!(
                "basis is {}x{} with {} exponents",
                f.rows(),
                f.cols(),
                alpha.len()
            )));
        }
        Ok(LatticeSub { f, alpha })
    }

    pub fn full(ring: Zpn, d: usize) -> Self {
        LatticeSub { f: PMatrix::identity(ring, d), alpha: vec![Some(0); d] }
    }

    pub fn ambient_rank(&self) -> usize {
        self.alpha.len()
    }
}

pub fn validate_fl(m: &FLModule) -> Report {
    let mut report = Report::new();
    let p = m.p();
    let bound = p.saturating_sub(2) as u32;
    report.push(
        "weight_bound",
        m.h <= bound,
        format!("h = {}, p - 2 = {bound}", m.h),
    );
    let bad: Vec<u32> = m.weights.iter().copied().filter(|&r| r > m.h).collect();
    report.push("weights_within_h", bad.is_empty(), format!("weights above h: {bad:?}"));
    report.push(
        "weights_sorted",
        m.weights.windows(2).all(|w| w[0] <= w[1]),
        format!("weights {:?}", m.weights),
    );
    let square = m.a.rows() == m.d() && m.a.cols() == m.d();
    report.push(
        "matrix_invertible",
        square && m.a.is_invertible(),
        if square { "det(A) must be a unit mod p".to_string() } else { "A has the wrong shape".to_string() },
    );
    report
}

fn check_same_ring(m1: &FLModule, m2: &FLModule) -> Result<()> {
    if m1.ring() != m2.ring() {
        return Err(Error::RingMismatch(format!("{:?} vs {:?}", m1.ring(), m2.ring())));
    }
    Ok(())
}

/// Basis `e_i ⊗ e'_j` in lexicographic order, then weight-sorted.
pub fn tensor_fl(m1: &FLModule, m2: &FLModule) -> Result<FLModule> {
    check_same_ring(m1, m2)?;
    let bound = (m1.p() - 2) as u32;
    let mut weights = Vec::with_capacity(m1.d() * m2.d());
    let mut labels = Vec::with_capacity(m1.d() * m2.d());
    for (r1, l1) in m1.weights.iter().zip(&m1.labels) {
        for (r2, l2) in m2.weights.iter().zip(&m2.labels) {
            if r1 + r2 > bound {
                return Err(Error::WeightOverflow { weight: r1 + r2, bound });
            }
            weights.push(r1 + r2);
            labels.push(format!("{l1}*{l2}"));
        }
    }
    let a = m1.a.kronecker(&m2.a)?;
    Ok(FLModule::with_labels(weights, a, labels)?.with_h(m1.h + m2.h))
}

pub fn direct_sum_fl(m1: &FLModule, m2: &FLModule) -> Result<FLModule> {
    check_same_ring(m1, m2)?;
    let weights = m1.weights.iter().chain(&m2.weights).copied().collect();
    let labels = m1.labels.iter().chain(&m2.labels).cloned().collect();
    let a = m1.a.block_diagonal(&m2.a)?;
    Ok(FLModule::with_labels(weights, a, labels)?.with_h(m1.h.max(m2.h)))
}

/// `N* ⊗ W[h]`: weights `h - r_j`, matrix `A^{-T}`.
pub fn dual_twist_fl(m: &FLModule, h: u32) -> Result<FLModule> {
    let bound = (m.p() - 2) as u32;
    if h > bound {
        return Err(Error::WeightOverflow { weight: h, bound });
    }
    if let Some(&r) = m.weights.iter().find(|&&r| r > h) {
        return Err(Error::WeightOverflow { weight: r, bound: h });
    }
    let a = m.a.inverse()?.transpose();
    let weights = m.weights.iter().map(|&r| h - r).collect();
    let labels = m.labels.iter().map(|l| format!("{l}^")).collect();
    Ok(FLModule::with_labels(weights, a, labels)?.with_h(h))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring() -> Zpn {
        Zpn::new(5, 4).unwrap()
    }

    #[test]
    fn validation_examples() {
        let r = ring();
        let ok = FLModule::new(vec![0, 1], PMatrix::identity(r, 2)).unwrap();
        assert!(validate_fl(&ok).pass());
        let heavy = FLModule::new(vec![0, 4], PMatrix::identity(r, 2)).unwrap();
        let rep = validate_fl(&heavy);
        assert!(!rep.pass());
        assert!(!rep.get("weight_bound").unwrap().pass);
        let sing = FLModule::new(vec![0, 1], PMatrix::from_rows(r, &[vec![5, 0], vec![0, 1]])).unwrap();
        assert!(!validate_fl(&sing).get("matrix_invertible").unwrap().pass);
    }

    #[test]
    fn sorting_conjugates_the_matrix() {
        let r = ring();
        let m = FLModule::new(vec![2, 0], PMatrix::from_rows(r, &[vec![1, 2], vec![3, 4]])).unwrap();
        assert_eq!(m.weights, vec![0, 2]);
        assert_eq!(m.input_order, vec![1, 0]);
        assert_eq!(m.a, PMatrix::from_rows(r, &[vec![4, 3], vec![2, 1]]));
    }

    #[test]
    fn tensor_examples() {
        let r = ring();
        let t = tensor_fl(&FLModule::rank_one(r, 1, 2), &FLModule::rank_one(r, 2, 3)).unwrap();
        assert_eq!((t.weights.clone(), t.a.get(0, 0)), (vec![3], 6));
        let m = FLModule::new(vec![0, 1], PMatrix::from_rows(r, &[vec![1, 2], vec![3, 4]])).unwrap();
        let unit = FLModule::rank_one(r, 0, 1);
        let mu = tensor_fl(&m, &unit).unwrap();
        assert_eq!((mu.weights.clone(), mu.a.clone()), (m.weights.clone(), m.a.clone()));
        let w11 = FLModule::new(vec![1, 1], PMatrix::identity(r, 2)).unwrap();
        assert!(tensor_fl(&w11, &FLModule::rank_one(r, 2, 1)).is_ok());
        let w22 = FLModule::new(vec![2, 2], PMatrix::identity(r, 2)).unwrap();
        assert_eq!(
            tensor_fl(&w22, &FLModule::rank_one(r, 2, 1)),
            Err(Error::WeightOverflow { weight: 4, bound: 3 })
        );
    }

    #[test]
    fn direct_sum_examples() {
        let r = ring();
        let m = FLModule::new(vec![0, 1], PMatrix::from_rows(r, &[vec![1, 2], vec![3, 4]])).unwrap();
        let s = direct_sum_fl(&m, &FLModule::zero(r)).unwrap();
        assert_eq!((s.weights.clone(), s.a.clone()), (m.weights.clone(), m.a.clone()));
        let s = direct_sum_fl(&FLModule::rank_one(r, 1, 7), &FLModule::rank_one(r, 0, 3)).unwrap();
        assert_eq!(s.weights, vec![0, 1]);
        assert_eq!(s.a, PMatrix::from_rows(r, &[vec![3, 0], vec![0, 7]]));
    }

    #[test]
    fn dual_twist_examples() {
        let r = ring();
        let d = dual_twist_fl(&FLModule::rank_one(r, 1, 2), 3).unwrap();
        assert_eq!(d.weights, vec![2]);
        assert_eq!(r.mul(d.a.get(0, 0), 2), 1);
        let u = dual_twist_fl(&FLModule::rank_one(r, 0, 1), 2).unwrap();
        assert_eq!((u.weights.clone(), u.a.get(0, 0)), (vec![2], 1));
        let m = FLModule::new(vec![0, 1, 3], PMatrix::from_rows(r, &[vec![1, 2, 0], vec![3, 4, 1], vec![0, 5, 1]])).unwrap();
        let dd = dual_twist_fl(&dual_twist_fl(&m, 3).unwrap(), 3).unwrap();
        assert_eq!((dd.weights.clone(), dd.a.clone()), (m.weights.clone(), m.a.clone()));
        assert!(matches!(dual_twist_fl(&m, 2), Err(Error::WeightOverflow { .. })));
    }
}
