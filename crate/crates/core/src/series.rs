//! Truncated power series over `Z/p^N` in one of the two variables `π` and `π₀`.
//!
//! A series stores exactly the coefficients it knows: `coeffs.len()` is its order, so
//! `f = Σ coeffs[k] X^k + O(X^order)`. Binary operations propagate orders the way p-adic
//! libraries do (`O(X^a) * (X^v u) = O(X^(a+v))`), which keeps exact division by `X^k`
//! honest: it shortens the series instead of padding it with invented zeros.

use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{self, PMatrix};
use crate::padic::{PadicExponent, Zpn};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Var {
    Pi,
    Pi0,
}

impl Var {
    pub fn name(self) -> &'static str {
        match self {
            Var::Pi => "pi",
            Var::Pi0 => "pi0",
        }
    }
}

/// Precision bookkeeping shared by every series of a computation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TruncationProfile {
    pub ring: Zpn,
    pub m_pi: usize,
    pub m_pi0: usize,
}

impl TruncationProfile {
    pub const DEFAULT_N: u32 = 16;
    pub const DEFAULT_M_PI0: usize = 16;

    /// Profile with the default `π`-order `(p-1) * m_pi0 + p`.
    pub fn new(p: u64, n: u32, m_pi0: usize) -> Result<Self> {
        let ring = Zpn::new(p, n)?;
        let m_pi = (p as usize - 1) * m_pi0 + p as usize;
        Self::with_orders(ring, m_pi, m_pi0)
    }

    pub fn with_orders(ring: Zpn, m_pi: usize, m_pi0: usize) -> Result<Self> {
        let p = ring.p() as usize;
        if m_pi0 < ring.precision() as usize {
            return Err(Error::InvalidInput(format!(
                "M_pi0 = {m_pi0} must be at least N = {}",
                ring.precision()
            )));
        }
        if m_pi < (p - 1) * m_pi0 + p {
            return Err(Error::InvalidInput(format!(
                "M_pi = {m_pi} must be at least (p-1)*M_pi0 + p = {}",
                (p - 1) * m_pi0 + p
            )));
        }
        Ok(TruncationProfile { ring, m_pi, m_pi0 })
    }

    pub fn default_for(p: u64) -> Result<Self> {
        Self::new(p, Self::DEFAULT_N, Self::DEFAULT_M_PI0)
    }

    pub fn p(&self) -> u64 {
        self.ring.p()
    }

    pub fn order(&self, var: Var) -> usize {
        match var {
            Var::Pi => self.m_pi,
            Var::Pi0 => self.m_pi0,
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct TruncSeries {
    var: Var,
    ring: Zpn,
    coeffs: Vec<u64>,
}

impl fmt::Debug for TruncSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[", self.var.name())?;
        let mut first = true;
        for (k, &c) in self.coeffs.iter().enumerate() {
            if c != 0 {
                if !first {
                    write!(f, " + ")?;
                }
                write!(f, "{c}*X^{k}")?;
                first = false;
            }
        }
        write!(f, " + O(X^{}) mod {:?}]", self.coeffs.len(), self.ring)
    }
}

/// `a * b` truncated to `len` coefficients. Inputs shorter than needed are treated as
/// zero-padded; the caller is responsible for the order bookkeeping.
pub(crate) fn mul_trunc(ring: Zpn, a: &[u64], b: &[u64], len: usize) -> Vec<u64> {
    const LIMIT: u128 = 1 << 126;
    let m = ring.modulus() as u128;
    let a_nz = a.iter().position(|&x| x != 0).unwrap_or(a.len());
    let b_nz = b.iter().position(|&x| x != 0).unwrap_or(b.len());
    let mut out = vec![0u64; len];
    for (k, slot) in out.iter_mut().enumerate() {
        if k < a_nz + b_nz {
            continue;
        }
        let mut acc: u128 = 0;
        let lo = a_nz.max(k.saturating_sub(b.len().saturating_sub(1)));
        let hi = k.min(a.len().saturating_sub(1)).min(k - b_nz);
        if lo > hi {
            continue;
        }
        for i in lo..=hi {
            let x = a[i];
            if x == 0 {
                continue;
            }
            acc += x as u128 * b[k - i] as u128;
            if acc >= LIMIT {
                acc %= m;
            }
        }
        *slot = (acc % m) as u64;
    }
    out
}

impl TruncSeries {
    pub fn from_coeffs(var: Var, ring: Zpn, coeffs: Vec<u64>) -> Self {
        let coeffs = coeffs.into_iter().map(|c| ring.reduce(c)).collect();
        TruncSeries { var, ring, coeffs }
    }

    pub fn from_i64(var: Var, ring: Zpn, coeffs: &[i64], order: usize) -> Self {
        let mut c: Vec<u64> = coeffs.iter().map(|&x| ring.from_i64(x)).collect();
        c.resize(order, 0);
        c.truncate(order);
        TruncSeries { var, ring, coeffs: c }
    }

    pub fn zero(var: Var, ring: Zpn, order: usize) -> Self {
        TruncSeries { var, ring, coeffs: vec![0; order] }
    }

    pub fn constant(var: Var, ring: Zpn, c: u64, order: usize) -> Self {
        let mut s = Self::zero(var, ring, order);
        if order > 0 {
            s.coeffs[0] = ring.reduce(c);
        }
        s
    }

    pub fn one(var: Var, ring: Zpn, order: usize) -> Self {
        Self::constant(var, ring, 1, order)
    }

    /// The variable itself.
    pub fn x(var: Var, ring: Zpn, order: usize) -> Self {
        let mut s = Self::zero(var, ring, order);
        if order > 1 {
            s.coeffs[1] = 1;
        }
        s
    }

    pub fn var(&self) -> Var {
        self.var
    }

    pub fn ring(&self) -> Zpn {
        self.ring
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> u64 {
        self.coeffs.get(k).copied().unwrap_or(0)
    }

    /// Index of the first nonzero coefficient, or the order if none is known.
    pub fn valuation(&self) -> usize {
        self.coeffs.iter().position(|&c| c != 0).unwrap_or(self.coeffs.len())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    pub fn is_unit(&self) -> bool {
        !self.coeffs.is_empty() && self.ring.is_unit(self.coeffs[0])
    }

    /// Degree of the last nonzero coefficient.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|&c| c != 0)
    }

    pub fn truncate(&self, order: usize) -> TruncSeries {
        assert!(order <= self.order(), "cannot extend a series from {} to {order}", self.order());
        TruncSeries { coeffs: self.coeffs[..order].to_vec(), ..*self }
    }

    pub fn with_var(&self, var: Var) -> TruncSeries {
        TruncSeries { var, ..self.clone() }
    }

    /// Reduction modulo a smaller power of the same prime.
    pub fn reduce_to(&self, ring: Zpn) -> TruncSeries {
        assert_eq!(ring.p(), self.ring.p());
        assert!(ring.precision() <= self.ring.precision());
        TruncSeries { var: self.var, ring, coeffs: self.coeffs.iter().map(|&c| ring.reduce(c)).collect() }
    }

    /// Equality of the coefficients both series know.
    pub fn eq_at_truncation(&self, other: &TruncSeries) -> bool {
        let n = self.order().min(other.order());
        self.var == other.var && self.ring == other.ring && self.coeffs[..n] == other.coeffs[..n]
    }

    fn check(&self, other: &TruncSeries) -> Result<()> {
        if self.var != other.var {
            return Err(Error::ProfileMismatch(format!(
                "variables {} and {}",
                self.var.name(),
                other.var.name()
            )));
        }
        if self.ring != other.ring {
            return Err(Error::ProfileMismatch(format!("{:?} vs {:?}", self.ring, other.ring)));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &TruncSeries) -> Result<TruncSeries> {
        self.check(other)?;
        let n = self.order().min(other.order());
        let r = self.ring;
        Ok(TruncSeries {
            coeffs: (0..n).map(|k| r.add(self.coeffs[k], other.coeffs[k])).collect(),
            ..*self
        })
    }

    pub fn try_sub(&self, other: &TruncSeries) -> Result<TruncSeries> {
        self.check(other)?;
        let n = self.order().min(other.order());
        let r = self.ring;
        Ok(TruncSeries {
            coeffs: (0..n).map(|k| r.sub(self.coeffs[k], other.coeffs[k])).collect(),
            ..*self
        })
    }

    /// Product; the order is `min(ord f + val g, ord g + val f)`, capped at the larger
    /// input order.
    pub fn try_mul(&self, other: &TruncSeries) -> Result<TruncSeries> {
        self.check(other)?;
        let order = (self.order() + other.valuation())
            .min(other.order() + self.valuation())
            .min(self.order().max(other.order()));
        Ok(TruncSeries {
            coeffs: mul_trunc(self.ring, &self.coeffs, &other.coeffs, order),
            ..*self
        })
    }

    pub fn add(&self, other: &TruncSeries) -> TruncSeries {
        self.try_add(other).expect("series operands must share variable and ring")
    }

    pub fn sub(&self, other: &TruncSeries) -> TruncSeries {
        self.try_sub(other).expect("series operands must share variable and ring")
    }

    pub fn mul(&self, other: &TruncSeries) -> TruncSeries {
        self.try_mul(other).expect("series operands must share variable and ring")
    }

    pub fn neg(&self) -> TruncSeries {
        let r = self.ring;
        TruncSeries { coeffs: self.coeffs.iter().map(|&c| r.neg(c)).collect(), ..*self }
    }

    pub fn scale(&self, c: u64) -> TruncSeries {
        let r = self.ring;
        TruncSeries { coeffs: self.coeffs.iter().map(|&x| r.mul(x, c)).collect(), ..*self }
    }

    pub fn add_constant(&self, c: u64) -> TruncSeries {
        let mut out = self.clone();
        if let Some(c0) = out.coeffs.first_mut() {
            *c0 = self.ring.add(*c0, self.ring.reduce(c));
        }
        out
    }

    pub fn pow(&self, mut e: u64) -> TruncSeries {
        let mut acc = TruncSeries::one(self.var, self.ring, self.order());
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Multiplication by `X^k`; the order grows by `k` up to `cap`.
    pub fn shift_up(&self, k: usize, cap: usize) -> TruncSeries {
        let order = (self.order() + k).min(cap.max(k.min(cap)));
        let mut coeffs = vec![0u64; order];
        for (i, &c) in self.coeffs.iter().enumerate() {
            if i + k < order {
                coeffs[i + k] = c;
            }
        }
        TruncSeries { coeffs, ..*self }
    }

    /// Exact division by `X^k`. The result knows `k` fewer coefficients.
    pub fn shift_divide_exact(&self, k: usize) -> Result<TruncSeries> {
        if k > self.order() {
            return Err(Error::NotDivisible(format!("X^{k} exceeds the order {}", self.order())));
        }
        if let Some(i) = self.coeffs[..k].iter().position(|&c| c != 0) {
            return Err(Error::NotDivisible(format!("coefficient of X^{i} is nonzero")));
        }
        Ok(TruncSeries { coeffs: self.coeffs[k..].to_vec(), ..*self })
    }

    pub fn invert_unit(&self) -> Result<TruncSeries> {
        if !self.is_unit() {
            return Err(Error::NonUnitSeries);
        }
        let r = self.ring;
        let n = self.order();
        let inv0 = r.inv(self.coeffs[0])?;
        let mut g = vec![0u64; n];
        g[0] = inv0;
        for k in 1..n {
            let mut acc = 0u64;
            for i in 1..=k {
                acc = r.add(acc, r.mul(self.coeffs[i], g[k - i]));
            }
            g[k] = r.neg(r.mul(acc, inv0));
        }
        Ok(TruncSeries { coeffs: g, ..*self })
    }

    /// Weierstrass division by `(X + p)^r` of the known part of `self`:
    /// `self = (X+p)^r * quotient + remainder` as polynomials, with `deg remainder < r`.
    /// Synthetic division by a monic linear factor, repeated `r` times; no inversions.
    pub fn weierstrass_divide_q_power(&self, r: usize) -> (TruncSeries, Vec<u64>) {
        let ring = self.ring;
        let p = ring.reduce(ring.p());
        let n = self.order();
        let mut cur = self.coeffs.clone();
        // remainders r_i of the successive divisions: f = Σ r_i (X+p)^i + (X+p)^r q
        let mut rems = Vec::with_capacity(r);
        for _ in 0..r {
            if cur.is_empty() {
                rems.push(0);
                continue;
            }
            let len = cur.len();
            let mut q = vec![0u64; len.saturating_sub(1)];
            let mut carry = 0u64;
            for k in (1..len).rev() {
                // coefficient k of f equals q_{k-1} + p q_k
                let qk1 = ring.sub(cur[k], carry);
                q[k - 1] = qk1;
                carry = ring.mul(p, qk1);
            }
            rems.push(ring.sub(cur[0], carry));
            cur = q;
        }
        let mut remainder = vec![0u64; r];
        // expand Σ r_i (X+p)^i in the monomial basis
        let mut power = vec![1u64];
        for (i, &ri) in rems.iter().enumerate() {
            for (k, &c) in power.iter().enumerate() {
                remainder[k] = ring.add(remainder[k], ring.mul(ri, c));
            }
            if i + 1 < r {
                let mut next = vec![0u64; power.len() + 1];
                for (k, &c) in power.iter().enumerate() {
                    next[k] = ring.add(next[k], ring.mul(p, c));
                    next[k + 1] = ring.add(next[k + 1], c);
                }
                power = next;
            }
        }
        cur.resize(n, 0);
        (TruncSeries { coeffs: cur, ..*self }, remainder)
    }

    /// The true quotient by `(X+p)^r`, keeping only the coefficients that the known part of
    /// `self` determines modulo `p^N` (the order shrinks by `r + N - 1`). Fails unless the
    /// remainder vanishes; the remainder itself is certified once `order >= N + r - 1`.
    pub fn divide_exact_q_power(&self, r: usize) -> Result<TruncSeries> {
        let n = self.ring.precision() as usize;
        let order = self.order();
        if r == 0 {
            return Ok(self.clone());
        }
        if order + 1 < n + r {
            return Err(Error::PrecisionExhausted(format!(
                "division by q^{r} needs order at least {}, have {order}",
                n + r - 1
            )));
        }
        let (q, rem) = self.weierstrass_divide_q_power(r);
        if rem.iter().any(|&c| c != 0) {
            return Err(Error::NotDivisible(format!("remainder modulo q^{r} is {rem:?}")));
        }
        Ok(q.truncate(order + 1 - n - r))
    }

    /// Some `g` with `(X+p)^r g = self` in `Z/p^N[X]/(X^order)`, or `None`.
    /// Solutions are not unique there; the one returned is canonical for the Howell solver.
    pub fn solve_q_power_multiple(&self, r: usize) -> Option<TruncSeries> {
        let ring = self.ring;
        let n = self.order();
        let q = TruncSeries::from_i64(self.var, ring, &[ring.p() as i64, 1], n).pow(r as u64);
        let mut mat = PMatrix::zeros(ring, n, n);
        for i in 0..n {
            for j in 0..=i {
                mat.set(i, j, q.coeff(i - j));
            }
        }
        linalg::solve(&mat, &self.coeffs).map(|g| TruncSeries { coeffs: g, ..*self })
    }

    /// Generators of `{g : (X+p)^r g = 0}` in `Z/p^N[X]/(X^order)`.
    pub fn q_power_annihilator(var: Var, ring: Zpn, order: usize, r: usize) -> PMatrix {
        let q = TruncSeries::from_i64(var, ring, &[ring.p() as i64, 1], order).pow(r as u64);
        let mut mat = PMatrix::zeros(ring, order, order);
        for i in 0..order {
            for j in 0..=i {
                mat.set(i, j, q.coeff(i - j));
            }
        }
        linalg::howell_kernel(&mat)
    }
}

/// `f(g)`, the result living in `g`'s variable. Order: `min(ord g, val g * ord f)`.
pub(crate) fn compose_raw(f: &TruncSeries, g: &TruncSeries) -> Result<TruncSeries> {
    if f.ring != g.ring {
        return Err(Error::ProfileMismatch(format!("{:?} vs {:?}", f.ring, g.ring)));
    }
    if g.coeff(0) != 0 {
        return Err(Error::NonzeroConstant);
    }
    let v = g.valuation().max(1);
    let order = g.order().min(v.saturating_mul(f.order()));
    let ring = f.ring;
    let terms = f.order().min(order.div_ceil(v));
    let mut acc = vec![0u64; order];
    for k in (0..terms).rev() {
        acc = mul_trunc(ring, &acc, &g.coeffs, order);
        if order > 0 {
            acc[0] = ring.add(acc[0], f.coeffs[k]);
        }
    }
    Ok(TruncSeries { var: g.var, ring, coeffs: acc })
}

pub fn series_multiply(f: &TruncSeries, g: &TruncSeries) -> Result<TruncSeries> {
    f.try_mul(g)
}

pub fn series_invert_unit(f: &TruncSeries) -> Result<TruncSeries> {
    f.invert_unit()
}

/// Substitution `f(g(X))` for series in the same variable.
pub fn series_compose(f: &TruncSeries, g: &TruncSeries) -> Result<TruncSeries> {
    if f.var != g.var {
        return Err(Error::ProfileMismatch(format!(
            "variables {} and {}",
            f.var.name(),
            g.var.name()
        )));
    }
    compose_raw(f, g)
}

pub fn shift_divide_exact(f: &TruncSeries, k: usize) -> Result<TruncSeries> {
    f.shift_divide_exact(k)
}

pub fn weierstrass_divide_q_power(f: &TruncSeries, r: usize) -> (TruncSeries, Vec<u64>) {
    f.weierstrass_divide_q_power(r)
}

/// `⌈log_p m⌉`.
pub fn ceil_log(p: u64, m: usize) -> u32 {
    let mut e = 0;
    let mut pe: u128 = 1;
    while pe < m as u128 {
        pe *= p as u128;
        e += 1;
    }
    e
}

/// Precomputed `(1+X)^(p^i)` for the digit expansion of exponents.
pub struct BinomialBases {
    ring: Zpn,
    order: usize,
    var: Var,
    bases: Vec<TruncSeries>,
}

impl BinomialBases {
    pub fn new(var: Var, ring: Zpn, order: usize) -> Self {
        let base = TruncSeries::from_i64(var, ring, &[1, 1], order);
        BinomialBases { ring, order, var, bases: vec![base] }
    }

    fn base(&mut self, i: usize) -> &TruncSeries {
        while self.bases.len() <= i {
            let last = self.bases.last().unwrap();
            let next = last.pow(self.ring.p());
            self.bases.push(next);
        }
        &self.bases[i]
    }

    /// `(1+X)^c` via `c = Σ a_i p^i`.
    pub fn power(&mut self, c: &PadicExponent) -> Result<TruncSeries> {
        if c.p != self.ring.p() {
            return Err(Error::InvalidInput("exponent for a different prime".into()));
        }
        if let Some(k) = c.precision {
            let need = self.ring.precision() + ceil_log(self.ring.p(), self.order);
            if k < need {
                return Err(Error::InsufficientExponentPrecision { have: k, need });
            }
        }
        let one = TruncSeries::one(self.var, self.ring, self.order);
        let mut acc = one.clone();
        for (i, &a) in c.digits().iter().enumerate() {
            let b = self.base(i);
            if *b == one {
                break;
            }
            if a != 0 {
                let bp = b.pow(a);
                acc = acc.mul(&bp);
            }
        }
        Ok(acc)
    }
}

/// `(1+X)^c` truncated at `order`.
pub fn binomial_power(c: &PadicExponent, var: Var, ring: Zpn, order: usize) -> Result<TruncSeries> {
    BinomialBases::new(var, ring, order).power(c)
}

/// The decomposition `S = ⊕_{0≤j≤p-2} π^j S₀`: tables for moving between `π`-coordinates
/// and the `π₀`-coordinate record `{f_j}` with `f = Σ π^j f_j(π₀)`.
#[derive(Clone, Debug)]
pub struct Pi0Basis {
    ring: Zpn,
    p: usize,
    m_pi0: usize,
    pi_order: usize,
    /// `π₀^k` in `π`-coordinates, `k < m_pi0`.
    powers: Vec<TruncSeries>,
    lead_inv: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Pi0ToPi,
    PiToPi0,
}

impl Pi0Basis {
    pub fn new(pi0_in_pi: &TruncSeries, m_pi0: usize) -> Result<Self> {
        let ring = pi0_in_pi.ring();
        let p = ring.p() as usize;
        if pi0_in_pi.var() != Var::Pi {
            return Err(Error::VariableMismatch { expected: "pi" });
        }
        if pi0_in_pi.coeffs[..(p - 1).min(pi0_in_pi.order())].iter().any(|&c| c != 0)
            || !ring.is_unit(pi0_in_pi.coeff(p - 1))
        {
            return Err(Error::InvalidInput(
                "pi0 must be a unit multiple of pi^(p-1)".into(),
            ));
        }
        let lead_inv = ring.inv(pi0_in_pi.coeff(p - 1))?;
        let pi_order = pi0_in_pi.order();
        let mut powers = Vec::with_capacity(m_pi0);
        let mut cur = TruncSeries::one(Var::Pi, ring, pi_order);
        for _ in 0..m_pi0 {
            powers.push(cur.clone());
            cur = cur.mul(pi0_in_pi);
        }
        Ok(Pi0Basis { ring, p, m_pi0, pi_order, powers, lead_inv })
    }

    pub fn m_pi0(&self) -> usize {
        self.m_pi0
    }

    pub fn pi_order(&self) -> usize {
        self.pi_order
    }

    pub fn pi0_power(&self, k: usize) -> &TruncSeries {
        &self.powers[k]
    }

    /// `Σ_j π^j f_j(π₀)`; missing trailing components are exact zeros.
    pub fn to_pi(&self, components: &[TruncSeries]) -> Result<TruncSeries> {
        let e = self.p - 1;
        if components.len() > e {
            return Err(Error::InvalidInput(format!("at most {e} components")));
        }
        let mut order = self.pi_order;
        for (j, f) in components.iter().enumerate() {
            if f.var() != Var::Pi0 {
                return Err(Error::VariableMismatch { expected: "pi0" });
            }
            if f.ring() != self.ring {
                return Err(Error::ProfileMismatch(format!("{:?} vs {:?}", f.ring(), self.ring)));
            }
            if f.order() > self.m_pi0 {
                return Err(Error::ProfileMismatch(format!(
                    "series of order {} exceeds the table order {}",
                    f.order(),
                    self.m_pi0
                )));
            }
            order = order.min(j + e * f.order());
        }
        let r = self.ring;
        let mut acc = vec![0u64; order];
        for (j, f) in components.iter().enumerate() {
            for (k, &c) in f.coeffs().iter().enumerate() {
                if c == 0 {
                    continue;
                }
                let pw = &self.powers[k].coeffs;
                for d in (j + e * k)..order {
                    acc[d] = r.add(acc[d], r.mul(c, pw[d - j]));
                }
            }
        }
        Ok(TruncSeries { var: Var::Pi, ring: r, coeffs: acc })
    }

    /// Coordinates `(f_0, …, f_{p-2})` of a `π`-series; back-substitution along the grading
    /// `d = j + k(p-1)`, whose diagonal entries are powers of the unit leading coefficient
    /// of `π₀`.
    pub fn to_pi0(&self, f: &TruncSeries) -> Result<Vec<TruncSeries>> {
        if f.var() != Var::Pi {
            return Err(Error::VariableMismatch { expected: "pi" });
        }
        if f.ring() != self.ring {
            return Err(Error::ProfileMismatch(format!("{:?} vs {:?}", f.ring(), self.ring)));
        }
        let e = self.p - 1;
        let r = self.ring;
        let len = f.order().min(self.pi_order);
        let mut residual = f.coeffs[..len].to_vec();
        let mut comps: Vec<Vec<u64>> = (0..e)
            .map(|j| vec![0u64; self.m_pi0.min((len.saturating_sub(j)).div_ceil(e))])
            .collect();
        let mut lead_pow = vec![1u64; self.m_pi0];
        for k in 1..self.m_pi0 {
            lead_pow[k] = r.mul(lead_pow[k - 1], self.lead_inv);
        }
        for d in 0..len {
            let (j, k) = (d % e, d / e);
            if k >= self.m_pi0 {
                break;
            }
            let c = r.mul(residual[d], lead_pow[k]);
            if c == 0 {
                continue;
            }
            comps[j][k] = c;
            let pw = &self.powers[k].coeffs;
            for t in d..len {
                residual[t] = r.sub(residual[t], r.mul(c, pw[t - j]));
            }
        }
        Ok(comps
            .into_iter()
            .map(|coeffs| TruncSeries { var: Var::Pi0, ring: r, coeffs })
            .collect())
    }

    /// `π₀`-coordinate of a series known to lie in `S₀`.
    pub fn to_pi0_pure(&self, f: &TruncSeries) -> Result<TruncSeries> {
        let mut comps = self.to_pi0(f)?;
        if let Some(j) = comps.iter().skip(1).position(|c| !c.is_zero()) {
            return Err(Error::NotInS0 { component: j + 1 });
        }
        Ok(comps.swap_remove(0))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Coordinates {
    Pi(TruncSeries),
    Pi0(Vec<TruncSeries>),
}

/// Moves a series between `π`-coordinates and `π₀`-coordinates, given `π₀` as a `π`-series.
pub fn change_coordinates(
    f: &Coordinates,
    direction: Direction,
    basis: &Pi0Basis,
) -> Result<Coordinates> {
    match (direction, f) {
        (Direction::Pi0ToPi, Coordinates::Pi0(comps)) => Ok(Coordinates::Pi(basis.to_pi(comps)?)),
        (Direction::PiToPi0, Coordinates::Pi(s)) => Ok(Coordinates::Pi0(basis.to_pi0(s)?)),
        (Direction::Pi0ToPi, _) => Err(Error::VariableMismatch { expected: "pi0" }),
        (Direction::PiToPi0, _) => Err(Error::VariableMismatch { expected: "pi" }),
    }
}
