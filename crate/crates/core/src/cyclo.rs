//! The cyclotomic operators on `S = Z_p[[π]]` and `S₀ = Z_p[[π₀]]`: Frobenius, the
//! generator `γ` of `Γ₀`, the torsion substitutions and the eigenprojectors of `Γ_f`.

use std::sync::OnceLock;

use num_bigint::BigUint;
use num_traits::One;

use crate::error::{Error, Result};
use crate::padic::{teichmueller_lift_big, PScalar, PadicExponent, Zpn};
use crate::series::{compose_raw, ceil_log, BinomialBases, Pi0Basis, TruncSeries, TruncationProfile, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OperatorTag {
    Phi,
    Gamma,
    /// `π ↦ (1+π)^{ω_a} - 1`, `a ∈ [1, p-1]`.
    Torsion(u64),
    /// Projector onto the `ω^i`-eigenspace of `Γ_f`, `i ∈ [0, p-2]`.
    Projector(usize),
}

pub struct CycloContext {
    pub profile: TruncationProfile,
    chi: PadicExponent,
    teich: Vec<PScalar>,
    teich_exp: Vec<PadicExponent>,
    pub pi0_in_pi: TruncSeries,
    pub phi_pi: TruncSeries,
    pub phi_pi0: TruncSeries,
    pub gamma_pi0: TruncSeries,
    pub q: TruncSeries,
    pub u: TruncSeries,
    pub v_gamma: TruncSeries,
    basis: Pi0Basis,
    phi_powers: Vec<TruncSeries>,
    gamma_powers: Vec<TruncSeries>,
    torsion: OnceLock<Vec<Vec<TruncSeries>>>,
}

impl std::fmt::Debug for CycloContext {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CycloContext")
            .field("profile", &self.profile)
            .field("chi_gamma", &self.chi.value)
            .finish_non_exhaustive()
    }
}

/// Powers `g^0, …, g^(count-1)`.
fn power_table(g: &TruncSeries, count: usize) -> Vec<TruncSeries> {
    let mut out = Vec::with_capacity(count);
    let mut cur = TruncSeries::one(g.var(), g.ring(), g.order());
    for _ in 0..count {
        out.push(cur.clone());
        cur = cur.mul(g);
    }
    out
}

/// `Σ f_k g^k` from a table of powers of `g`; order `min(ord g, val g * ord f)`.
fn apply_table(f: &TruncSeries, table: &[TruncSeries]) -> TruncSeries {
    let g1 = &table[1.min(table.len() - 1)];
    let v = g1.valuation().max(1);
    let order = g1.order().min(v.saturating_mul(f.order()));
    let ring = f.ring();
    let mut acc = vec![0u64; order];
    for (k, &c) in f.coeffs().iter().enumerate() {
        if c == 0 || k * v >= order {
            continue;
        }
        let pw = table[k].coeffs();
        for d in (k * v)..order {
            acc[d] = ring.add(acc[d], ring.mul(c, pw[d]));
        }
    }
    TruncSeries::from_coeffs(g1.var(), ring, acc)
}

/// Checks `χ ≡ 1 mod p` and `χ ≢ 1 mod p²`.
pub fn validate_chi(p: u64, chi: &BigUint) -> Result<()> {
    let pb = BigUint::from(p);
    let one = BigUint::one();
    if chi % &pb != one {
        return Err(Error::InvalidInput(format!("chi_gamma = {chi} is not 1 mod {p}")));
    }
    if chi % (&pb * &pb) == one {
        return Err(Error::InvalidInput(format!(
            "chi_gamma = {chi} is 1 mod p^2, not a topological generator"
        )));
    }
    Ok(())
}

/// Builds the context with `χ(γ) = 1 + p`.
pub fn build_default_context(p: u64, n: u32, m_pi0: usize) -> Result<CycloContext> {
    build_context(p, n, m_pi0, &BigUint::from(1 + p))
}

/// Bootstraps every series at an enlarged order, so that the exact divisions defining `u`
/// and `v_γ` are certified, then truncates to the profile.
pub fn build_context(p: u64, n: u32, m_pi0: usize, chi_gamma: &BigUint) -> Result<CycloContext> {
    let profile = TruncationProfile::new(p, n, m_pi0)?;
    validate_chi(p, chi_gamma)?;
    let ring = profile.ring;
    let pu = p as usize;

    let m_ext = m_pi0 + n as usize + pu;
    let l_ext = (pu - 1) * m_ext + pu;
    let k_exp = n + ceil_log(p, l_ext);

    let mut teich = Vec::with_capacity(pu - 1);
    let mut teich_exp = Vec::with_capacity(pu - 1);
    for a in 1..p {
        let big = teichmueller_lift_big(a, p, k_exp)?;
        teich.push(PScalar::from_raw(ring, ring.from_biguint(&big)));
        teich_exp.push(PadicExponent::residue(p, big, k_exp));
    }

    let mut bases = BinomialBases::new(Var::Pi, ring, l_ext);
    let mut pi0 = TruncSeries::constant(Var::Pi, ring, ring.from_i64(1 - p as i64), l_ext);
    for e in &teich_exp {
        pi0 = pi0.add(&bases.power(e)?);
    }
    let phi_pi_ext = bases.power(&PadicExponent::integer(p, p))?.add_constant(ring.neg(1));
    let chi = PadicExponent { p, value: chi_gamma.clone(), precision: None };
    let gamma_pi_ext = bases.power(&chi)?.add_constant(ring.neg(1));

    let basis_ext = Pi0Basis::new(&pi0, m_ext)?;
    let phi_pi0_ext = basis_ext.to_pi0_pure(&compose_raw(&pi0, &phi_pi_ext)?)?;
    let gamma_pi0_ext = basis_ext.to_pi0_pure(&compose_raw(&pi0, &gamma_pi_ext)?)?;
    if phi_pi0_ext.coeff(0) != 0 || gamma_pi0_ext.coeff(0) != 0 {
        return Err(Error::AxiomViolation("images of pi0 have nonzero constant term".into()));
    }

    let u_ext = phi_pi0_ext.shift_divide_exact(1)?.divide_exact_q_power(pu - 1)?;
    let gamma_q = gamma_pi0_ext.add_constant(p);
    let v_ext = gamma_q.divide_exact_q_power(1)?;

    let pi0_in_pi = pi0.truncate(profile.m_pi);
    let phi_pi = phi_pi_ext.truncate(profile.m_pi);
    let phi_pi0 = phi_pi0_ext.truncate(m_pi0);
    let gamma_pi0 = gamma_pi0_ext.truncate(m_pi0);
    let u = u_ext.truncate(m_pi0);
    let v_gamma = v_ext.truncate(m_pi0);
    let q = TruncSeries::from_i64(Var::Pi0, ring, &[p as i64, 1], m_pi0);

    if !u.is_unit() || !v_gamma.is_unit() || v_gamma.coeff(0) != 1 {
        return Err(Error::AxiomViolation("u or v_gamma is not a unit of the expected form".into()));
    }

    let basis = Pi0Basis::new(&pi0_in_pi, m_pi0)?;
    let phi_powers = power_table(&phi_pi0, m_pi0);
    let gamma_powers = power_table(&gamma_pi0, m_pi0);
    Ok(CycloContext {
        profile,
        chi,
        teich,
        teich_exp,
        pi0_in_pi,
        phi_pi,
        phi_pi0,
        gamma_pi0,
        q,
        u,
        v_gamma,
        basis,
        phi_powers,
        gamma_powers,
        torsion: OnceLock::new(),
    })
}

impl CycloContext {
    pub fn p(&self) -> u64 {
        self.profile.p()
    }

    pub fn ring(&self) -> Zpn {
        self.profile.ring
    }

    pub fn m_pi0(&self) -> usize {
        self.profile.m_pi0
    }

    pub fn chi_gamma(&self) -> &BigUint {
        &self.chi.value
    }

    pub fn chi_gamma_scalar(&self) -> PScalar {
        self.chi.reduce(self.ring())
    }

    /// Teichmüller lifts `ω_1, …, ω_{p-1}`.
    pub fn teich(&self) -> &[PScalar] {
        &self.teich
    }

    pub fn basis(&self) -> &Pi0Basis {
        &self.basis
    }

    /// Same prime, precision, orders and `χ(γ)`.
    pub fn same_profile(&self, other: &CycloContext) -> bool {
        self.profile == other.profile && self.chi.value == other.chi.value
    }

    fn torsion_tables(&self) -> &Vec<Vec<TruncSeries>> {
        self.torsion.get_or_init(|| {
            let ring = self.ring();
            let m_pi = self.profile.m_pi;
            let mut bases = BinomialBases::new(Var::Pi, ring, m_pi);
            self.teich_exp
                .iter()
                .map(|e| {
                    let tau = bases.power(e).expect("exponent precision checked at build").add_constant(ring.neg(1));
                    power_table(&tau, m_pi)
                })
                .collect()
        })
    }

    /// `(1+π)^{ω_a} - 1`.
    pub fn torsion_image(&self, a: u64) -> Result<TruncSeries> {
        if a == 0 || a >= self.p() {
            return Err(Error::InvalidInput(format!("torsion index {a} outside [1, p-1]")));
        }
        Ok(self.torsion_tables()[a as usize - 1][1].clone())
    }

    pub fn phi_pi0_powers(&self) -> &[TruncSeries] {
        &self.phi_powers
    }

    fn expect_var(f: &TruncSeries, var: Var) -> Result<()> {
        if f.var() != var {
            return Err(Error::VariableMismatch { expected: var.name() });
        }
        Ok(())
    }

    fn expect_ring(&self, f: &TruncSeries) -> Result<()> {
        if f.ring() != self.ring() {
            return Err(Error::ProfileMismatch(format!("{:?} vs {:?}", f.ring(), self.ring())));
        }
        Ok(())
    }

    pub fn apply_operator(&self, tag: OperatorTag, f: &TruncSeries) -> Result<TruncSeries> {
        self.expect_ring(f)?;
        match tag {
            OperatorTag::Phi => {
                Self::expect_var(f, Var::Pi0)?;
                self.check_order(f, self.m_pi0())?;
                Ok(apply_table(f, &self.phi_powers))
            }
            OperatorTag::Gamma => {
                Self::expect_var(f, Var::Pi0)?;
                self.check_order(f, self.m_pi0())?;
                Ok(apply_table(f, &self.gamma_powers))
            }
            OperatorTag::Torsion(a) => {
                Self::expect_var(f, Var::Pi)?;
                self.check_order(f, self.profile.m_pi)?;
                if a == 0 || a >= self.p() {
                    return Err(Error::InvalidInput(format!("torsion index {a} outside [1, p-1]")));
                }
                Ok(apply_table(f, &self.torsion_tables()[a as usize - 1]))
            }
            OperatorTag::Projector(i) => {
                Self::expect_var(f, Var::Pi)?;
                self.check_order(f, self.profile.m_pi)?;
                if i + 1 >= self.p() as usize {
                    return Err(Error::InvalidInput(format!("projector index {i} outside [0, p-2]")));
                }
                Ok(self.project(f, i))
            }
        }
    }

    fn check_order(&self, f: &TruncSeries, max: usize) -> Result<()> {
        if f.order() > max {
            return Err(Error::ProfileMismatch(format!(
                "series of order {} exceeds the profile order {max}",
                f.order()
            )));
        }
        Ok(())
    }

    fn project(&self, f: &TruncSeries, i: usize) -> TruncSeries {
        let ring = self.ring();
        let p = self.p();
        let tables = self.torsion_tables();
        let inv = ring.inv(p - 1).expect("p - 1 is a unit");
        let mut acc: Option<TruncSeries> = None;
        for (idx, w) in self.teich.iter().enumerate() {
            // ω^{-i} = ω^{(p-1-i) mod (p-1)}
            let e = ((p - 1) as usize - i % (p - 1) as usize) as u64 % (p - 1);
            let weight = ring.pow(w.value(), e);
            let term = apply_table(f, &tables[idx]).scale(weight);
            acc = Some(match acc {
                None => term,
                Some(a) => a.add(&term),
            });
        }
        acc.expect("p >= 3").scale(inv)
    }

    /// `(p_0(f), …, p_{p-2}(f))`.
    pub fn decompose_gamma_f(&self, f: &TruncSeries) -> Result<Vec<TruncSeries>> {
        (0..self.p() as usize - 1).map(|i| self.apply_operator(OperatorTag::Projector(i), f)).collect()
    }

    /// Pushes a `π₀`-series to `π`-coordinates.
    pub fn to_pi(&self, f: &TruncSeries) -> Result<TruncSeries> {
        self.basis.to_pi(std::slice::from_ref(f))
    }

    /// Whether a `π₀`-series, viewed in `S`, is fixed by every torsion substitution.
    pub fn is_gamma_f_invariant(&self, f: &TruncSeries) -> Result<bool> {
        let g = self.to_pi(f)?;
        for a in 1..self.p() {
            let t = self.apply_operator(OperatorTag::Torsion(a), &g)?;
            if !t.eq_at_truncation(&g) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Context fields in the JSON series format.
    pub fn to_json(&self) -> serde_json::Value {
        use crate::io::series_to_json;
        serde_json::json!({
            "p": self.p(),
            "N": self.ring().precision(),
            "M_pi0": self.m_pi0(),
            "M_pi": self.profile.m_pi,
            "chi_gamma": self.chi.value.to_string(),
            "teich": self.teich.iter().map(|t| t.value().to_string()).collect::<Vec<_>>(),
            "pi0_in_pi": series_to_json(&self.pi0_in_pi),
            "phi_pi": series_to_json(&self.phi_pi),
            "phi_pi0": series_to_json(&self.phi_pi0),
            "gamma_pi0": series_to_json(&self.gamma_pi0),
            "q": series_to_json(&self.q),
            "u": series_to_json(&self.u),
            "v_gamma": series_to_json(&self.v_gamma),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p3_closed_forms() {
        let ctx = build_default_context(3, 6, 8).unwrap();
        let r = ctx.ring();
        // π₀ = π²/(1+π)
        let mut expect = vec![0i64; ctx.profile.m_pi];
        for (k, e) in expect.iter_mut().enumerate().skip(2) {
            *e = if k % 2 == 0 { 1 } else { -1 };
        }
        assert_eq!(ctx.pi0_in_pi, TruncSeries::from_i64(Var::Pi, r, &expect, ctx.profile.m_pi));
        assert_eq!(ctx.u, TruncSeries::one(Var::Pi0, r, 8));
        assert_eq!(ctx.q, TruncSeries::from_i64(Var::Pi0, r, &[3, 1], 8));
    }

    #[test]
    fn defining_identities_hold() {
        for p in [3u64, 5, 7] {
            let ctx = build_default_context(p, 5, 6).unwrap();
            let lhs = ctx.u.mul(&TruncSeries::x(Var::Pi0, ctx.ring(), 6)).mul(&ctx.q.pow(p - 1));
            assert_eq!(lhs, ctx.phi_pi0);
            assert_eq!(ctx.v_gamma.mul(&ctx.q), ctx.gamma_pi0.add_constant(p));
            assert_eq!(ctx.pi0_in_pi.coeffs()[..p as usize - 1], vec![0; p as usize - 1][..]);
            for f in [&ctx.phi_pi0, &ctx.gamma_pi0, &ctx.u, &ctx.v_gamma, &ctx.q] {
                assert!(ctx.is_gamma_f_invariant(f).unwrap());
            }
        }
    }

    #[test]
    fn phi_and_gamma_commute() {
        let ctx = build_default_context(5, 6, 8).unwrap();
        let x = TruncSeries::x(Var::Pi0, ctx.ring(), 8);
        let a = ctx.apply_operator(OperatorTag::Gamma, &ctx.apply_operator(OperatorTag::Phi, &x).unwrap()).unwrap();
        let b = ctx.apply_operator(OperatorTag::Phi, &ctx.apply_operator(OperatorTag::Gamma, &x).unwrap()).unwrap();
        assert!(a.eq_at_truncation(&b));
    }

    #[test]
    fn operator_examples() {
        let ctx = build_default_context(3, 4, 6).unwrap();
        let r = ctx.ring();
        let phi_q = ctx.apply_operator(OperatorTag::Phi, &ctx.q).unwrap();
        assert_eq!(phi_q, ctx.phi_pi0.add_constant(3));
        let p0 = ctx.apply_operator(OperatorTag::Projector(0), &ctx.pi0_in_pi).unwrap();
        assert_eq!(p0, ctx.pi0_in_pi);
        let one = TruncSeries::one(Var::Pi, r, ctx.profile.m_pi);
        assert!(ctx.apply_operator(OperatorTag::Projector(1), &one).unwrap().is_zero());
        assert_eq!(
            ctx.apply_operator(OperatorTag::Phi, &one),
            Err(Error::VariableMismatch { expected: "pi0" })
        );
        let pi = TruncSeries::x(Var::Pi, r, ctx.profile.m_pi);
        let parts = ctx.decompose_gamma_f(&pi).unwrap();
        assert_eq!(parts[0].add(&parts[1]), pi);
    }

    #[test]
    fn projectors_are_orthogonal_idempotents() {
        let ctx = build_default_context(5, 3, 4).unwrap();
        let r = ctx.ring();
        let coeffs: Vec<u64> = (0..ctx.profile.m_pi as u64).map(|k| (k * 37 + 11) % 125).collect();
        let f = TruncSeries::from_coeffs(Var::Pi, r, coeffs);
        let parts = ctx.decompose_gamma_f(&f).unwrap();
        let sum = parts.iter().skip(1).fold(parts[0].clone(), |a, b| a.add(b));
        assert_eq!(sum, f);
        for (i, pi) in parts.iter().enumerate() {
            for j in 0..4 {
                let pj = ctx.apply_operator(OperatorTag::Projector(j), pi).unwrap();
                if i == j {
                    assert_eq!(&pj, pi);
                } else {
                    assert!(pj.is_zero());
                }
            }
            // torsion acts by ω_a^i on the i-th component
            for a in 1..5u64 {
                let t = ctx.apply_operator(OperatorTag::Torsion(a), pi).unwrap();
                let w = ctx.teich()[a as usize - 1].pow(i as u64).value();
                assert_eq!(t, pi.scale(w));
            }
        }
    }

    #[test]
    fn chi_must_generate() {
        assert!(build_context(5, 3, 4, &BigUint::from(2u32)).is_err());
        assert!(build_context(5, 3, 4, &BigUint::from(26u32)).is_err());
        assert!(build_context(5, 3, 4, &BigUint::from(11u32)).is_ok());
    }
}
