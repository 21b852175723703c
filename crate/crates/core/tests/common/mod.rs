//! Reference computations for the integration tests. They use plain vectors, big integers and
//! naive algorithms, sharing no code path with the library beyond its output values.
#![allow(dead_code)]

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Naive truncated product modulo `m`.
pub fn mul(a: &[u64], b: &[u64], m: u64, len: usize) -> Vec<u64> {
    let mut out = vec![0u64; len];
    for (i, &x) in a.iter().enumerate().take(len) {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate().take(len - i) {
            out[i + j] = ((out[i + j] as u128 + x as u128 * y as u128) % m as u128) as u64;
        }
    }
    out
}

pub fn add(a: &[u64], b: &[u64], m: u64) -> Vec<u64> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|k| ((*a.get(k).unwrap_or(&0) as u128 + *b.get(k).unwrap_or(&0) as u128) % m as u128) as u64)
        .collect()
}

pub fn sub(a: &[u64], b: &[u64], m: u64) -> Vec<u64> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|k| {
            let x = *a.get(k).unwrap_or(&0) as u128 + m as u128 - *b.get(k).unwrap_or(&0) as u128 % m as u128;
            (x % m as u128) as u64
        })
        .collect()
}

/// Powers `g^0..g^(count-1)` truncated at `len`.
pub fn powers(g: &[u64], m: u64, len: usize, count: usize) -> Vec<Vec<u64>> {
    let mut out = Vec::with_capacity(count);
    let mut cur = vec![0u64; len];
    cur[0] = 1 % m;
    for _ in 0..count {
        out.push(cur.clone());
        cur = mul(&cur, g, m, len);
    }
    out
}

/// `Σ f_k g^k` from a power table.
pub fn substitute(f: &[u64], table: &[Vec<u64>], m: u64, len: usize) -> Vec<u64> {
    let mut out = vec![0u64; len];
    for (k, &c) in f.iter().enumerate() {
        if c == 0 {
            continue;
        }
        for d in 0..len {
            out[d] = ((out[d] as u128 + c as u128 * table[k][d] as u128) % m as u128) as u64;
        }
    }
    out
}

/// Exact binomial coefficient `c choose k`.
pub fn binom(c: &BigUint, k: usize) -> BigUint {
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for i in 0..k {
        if *c < BigUint::from(i) {
            return BigUint::zero();
        }
        num *= c - BigUint::from(i);
        den *= BigUint::from(i + 1);
    }
    num / den
}

/// `(1+X)^c - 1` from exact binomials, reduced mod `m`.
pub fn binomial_minus_one(c: &BigUint, m: u64, len: usize) -> Vec<u64> {
    let mb = BigUint::from(m);
    let mut out: Vec<u64> = (0..len).map(|k| (binom(c, k) % &mb).to_u64().unwrap()).collect();
    out[0] = 0;
    out
}

/// Teichmüller lift of `a` modulo `p^k` by Newton's method on `x^(p-1) - 1`.
pub fn teichmueller(a: u64, p: u64, k: u32) -> BigUint {
    let modulus = BigInt::from(p).pow(k);
    let reduce = |x: BigInt| {
        let r = x % &modulus;
        if r.is_negative() {
            r + &modulus
        } else {
            r
        }
    };
    let mut x = BigInt::from(a % p);
    for _ in 0..(k + 2) {
        let f = reduce(x.modpow(&BigInt::from(p - 1), &modulus) - 1);
        let fp = reduce(BigInt::from(p - 1) * x.modpow(&BigInt::from(p - 2), &modulus));
        let inv = mod_inverse(&fp, &modulus);
        x = reduce(&x - f * inv);
    }
    x.to_biguint().unwrap()
}

fn mod_inverse(a: &BigInt, m: &BigInt) -> BigInt {
    let (mut r0, mut r1) = (m.clone(), a.clone() % m);
    let (mut t0, mut t1) = (BigInt::zero(), BigInt::one());
    while !r1.is_zero() {
        let q = &r0 / &r1;
        (r0, r1) = (r1.clone(), &r0 - &q * &r1);
        (t0, t1) = (t1.clone(), &t0 - &q * &t1);
    }
    assert!(r0.is_one(), "not invertible");
    let t = t0 % m;
    if t.is_negative() {
        t + m
    } else {
        t
    }
}

/// `π₀ = 1 - p + Σ_a (1+π)^{ω_a}` as a `π`-series of length `len`, modulo `p^n`.
pub fn pi0_in_pi(p: u64, n: u32, len: usize) -> Vec<u64> {
    let m = p.pow(n);
    let k = n + 8;
    let mut out = vec![0u64; len];
    out[0] = (m + 1 - p % m) % m;
    for a in 1..p {
        let c = teichmueller(a, p, k);
        let s = binomial_minus_one(&c, m, len);
        out = add(&out, &s, m);
        out[0] = (out[0] + 1) % m;
    }
    out
}

/// Substitution tables for pushing `π₀`-series into `π`-coordinates and for the operators.
pub struct PiOracle {
    pub p: u64,
    pub m: u64,
    pub len: usize,
    pub pi0_pow: Vec<Vec<u64>>,
    pub phi_pow: Vec<Vec<u64>>,
    pub gamma_pow: Vec<Vec<u64>>,
}

impl PiOracle {
    /// Works modulo `π^((p-1) m_pi0)`, which on `S₀` is the same as modulo `π₀^m_pi0`.
    pub fn new(p: u64, n: u32, m_pi0: usize, chi: u64) -> Self {
        let m = p.pow(n);
        let len = (p as usize - 1) * m_pi0;
        let pi0 = pi0_in_pi(p, n, len);
        let phi = binomial_minus_one(&BigUint::from(p), m, len);
        let gamma = binomial_minus_one(&BigUint::from(chi), m, len);
        PiOracle {
            p,
            m,
            len,
            pi0_pow: powers(&pi0, m, len, m_pi0),
            phi_pow: powers(&phi, m, len, len),
            gamma_pow: powers(&gamma, m, len, len),
        }
    }

    pub fn push(&self, f: &[u64]) -> Vec<u64> {
        substitute(f, &self.pi0_pow, self.m, self.len)
    }

    pub fn phi(&self, f: &[u64]) -> Vec<u64> {
        substitute(f, &self.phi_pow, self.m, self.len)
    }

    pub fn gamma(&self, f: &[u64]) -> Vec<u64> {
        substitute(f, &self.gamma_pow, self.m, self.len)
    }

    pub fn mul(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        mul(a, b, self.m, self.len)
    }

    /// Matrix product of square matrices of `π`-series.
    pub fn mat_mul(&self, a: &[Vec<Vec<u64>>], b: &[Vec<Vec<u64>>]) -> Vec<Vec<Vec<u64>>> {
        let d = a.len();
        (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| {
                        (0..d).fold(vec![0u64; self.len], |acc, k| add(&acc, &self.mul(&a[i][k], &b[k][j]), self.m))
                    })
                    .collect()
            })
            .collect()
    }

    /// `C φ(G) - G γ(C)` evaluated entirely in `π`-coordinates.
    pub fn commutation_residual(&self, c: &[Vec<Vec<u64>>], g: &[Vec<Vec<u64>>]) -> Vec<Vec<Vec<u64>>> {
        let cp: Vec<Vec<Vec<u64>>> = c.iter().map(|r| r.iter().map(|e| self.push(e)).collect()).collect();
        let gp: Vec<Vec<Vec<u64>>> = g.iter().map(|r| r.iter().map(|e| self.push(e)).collect()).collect();
        let phig: Vec<Vec<Vec<u64>>> = gp.iter().map(|r| r.iter().map(|e| self.phi(e)).collect()).collect();
        let gamc: Vec<Vec<Vec<u64>>> = cp.iter().map(|r| r.iter().map(|e| self.gamma(e)).collect()).collect();
        let lhs = self.mat_mul(&cp, &phig);
        let rhs = self.mat_mul(&gp, &gamc);
        lhs.iter()
            .zip(&rhs)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| sub(x, y, self.m)).collect())
            .collect()
    }
}

/// Entries of a series matrix as plain coefficient vectors.
pub fn entries(m: &wach_core::SeriesMatrix) -> Vec<Vec<Vec<u64>>> {
    (0..m.rows()).map(|i| (0..m.cols()).map(|j| m.get(i, j).coeffs().to_vec()).collect()).collect()
}

pub fn is_zero(m: &[Vec<Vec<u64>>]) -> bool {
    m.iter().flatten().flatten().all(|&c| c == 0)
}
