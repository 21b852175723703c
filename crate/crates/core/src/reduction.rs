//! Reduction modulo `π₀`: recovering the filtration, the divided Frobenii and the matrix `A`
//! from a Wach module, and normalizing a perturbed φ-matrix back to `A·diag(q^{r_j})`.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cyclo::{CycloContext, OperatorTag};
use crate::error::{Error, Result};
use crate::fl::{validate_fl, FLModule};
use crate::io::Report;
use crate::linalg::{howell_kernel, pivot_of, PMatrix};
use crate::padic::Zpn;
use crate::series::{TruncSeries, Var};
use crate::smatrix::SeriesMatrix;
use crate::wach::{change_basis, verify_wach_axioms, wach_functor, WachModule};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FilteredReduction {
    pub d: usize,
    /// `rank Fil^r` for `r = 0..=h_max + 1`.
    pub fil_ranks: Vec<usize>,
    /// Sorted ascending, one per basis vector of the adapted basis.
    pub weights_recovered: Vec<u32>,
    pub a_recovered: PMatrix,
    /// Howell generators of `Fil^r`, one matrix (rows = generators) per `r`.
    pub fil_generators: Vec<PMatrix>,
    /// The adapted basis, as columns.
    pub basis: PMatrix,
}

impl FilteredReduction {
    /// Precision `p^N_w` at which the recovered data are certified.
    pub fn precision(&self) -> u32 {
        self.a_recovered.ring().precision()
    }
}

/// Constant terms of `C` and `G`; `G` must reduce to the identity.
pub fn reduce_mod_pi0(w: &WachModule) -> Result<(PMatrix, PMatrix)> {
    let g0 = w.g.constant_term();
    if !g0.is_identity() {
        return Err(Error::AxiomViolation("G is not the identity modulo pi0".into()));
    }
    Ok((w.c.constant_term(), g0))
}

/// `rank Fil^r = #{j : r_j >= r}` for `r = 0..=h + 1`.
pub fn expected_fil_ranks(weights: &[u32], h: u32) -> Vec<usize> {
    (0..=h + 1).map(|r| weights.iter().filter(|&&w| w >= r).count()).collect()
}

/// Precision at which remainders modulo `q^{h+1}` and quotients by `q^h` of `C·x` are
/// determined by the known coefficients of `C`.
fn working_precision(w: &WachModule, h_max: u32) -> Result<Zpn> {
    let ring = w.ctx.ring();
    let n = ring.precision();
    let order = w.c.order().min(w.ctx.m_pi0());
    let nw = if w.c_exact {
        n
    } else {
        (n as i64).min(order as i64 - h_max as i64).max(0) as u32
    };
    if nw == 0 {
        return Err(Error::PrecisionExhausted(format!(
            "order {order} leaves no certified digits for weights up to {h_max}"
        )));
    }
    ring.with_precision(nw)
}

/// `C·x` for a constant vector `x`.
fn apply_c(c: &SeriesMatrix, x: &[u64]) -> Vec<TruncSeries> {
    (0..c.rows())
        .map(|i| {
            let mut acc = TruncSeries::zero(c.var(), c.ring(), c.order());
            for (j, &xj) in x.iter().enumerate() {
                if xj != 0 {
                    acc = acc.add(&c.get(i, j).scale(xj));
                }
            }
            acc
        })
        .collect()
}

/// Divided Frobenius `φ^r(x)`: constant term of `C·x / q^r`, reduced to `ring`.
pub fn phi_r(w: &WachModule, r: u32, x: &[u64], ring: Zpn) -> Vec<u64> {
    apply_c(&w.c, x)
        .iter()
        .map(|y| ring.reduce(y.weierstrass_divide_q_power(r as usize).0.coeff(0)))
        .collect()
}

/// Howell generators of `{x : C·x ≡ 0 mod q^r}` over `ring`. A lift `x + π₀ y` changes
/// `φ(x̂)` by `C·u·π₀·q^{p-1}·φ(y)`, divisible by `q^{p-1}`, so lifts never matter for
/// `r <= p - 1`.
fn fil_lattice(w: &WachModule, r: u32, ring: Zpn) -> PMatrix {
    let d = w.d();
    let mut sys = PMatrix::zeros(ring, d * r as usize, d);
    for i in 0..d {
        for j in 0..d {
            let (_, rem) = w.c.get(i, j).weierstrass_divide_q_power(r as usize);
            for (t, &c) in rem.iter().enumerate() {
                sys.set(i * r as usize + t, j, ring.reduce(c));
            }
        }
    }
    howell_kernel(&sys)
}

pub fn recover_filtration(w: &WachModule, h_max: u32) -> Result<FilteredReduction> {
    let p = w.ctx.p() as u32;
    if h_max > p - 2 {
        return Err(Error::InvalidInput(format!("h_max = {h_max} exceeds p - 2 = {}", p - 2)));
    }
    let ring = working_precision(w, h_max)?;
    let d = w.d();
    let mut gens = Vec::with_capacity(h_max as usize + 2);
    for r in 0..=h_max + 1 {
        let k = fil_lattice(w, r, ring);
        for i in 0..k.rows() {
            match pivot_of(ring, k.row(i)) {
                Some((_, 0)) => {}
                _ => {
                    return Err(Error::PrecisionExhausted(format!(
                        "Fil^{r} is not saturated at precision p^{}",
                        ring.precision()
                    )))
                }
            }
        }
        gens.push(k);
    }
    let fil_ranks: Vec<usize> = gens.iter().map(PMatrix::rows).collect();
    if fil_ranks[0] != d || fil_ranks.windows(2).any(|x| x[0] < x[1]) {
        return Err(Error::AxiomViolation(format!("inconsistent filtration ranks {fil_ranks:?}")));
    }
    if fil_ranks[h_max as usize + 1] != 0 {
        return Err(Error::AxiomViolation(format!("Fil^{} is nonzero: weights exceed {h_max}", h_max + 1)));
    }

    // weight-adapted basis: Howell rows of Fil^r whose pivot is not a pivot of Fil^{r+1}
    let mut chosen: Vec<(u32, usize, Vec<u64>)> = Vec::with_capacity(d);
    for r in 0..=h_max {
        let deeper: Vec<usize> =
            (0..gens[r as usize + 1].rows()).filter_map(|i| pivot_of(ring, gens[r as usize + 1].row(i)).map(|x| x.0)).collect();
        let k = &gens[r as usize];
        for i in 0..k.rows() {
            let (col, _) = pivot_of(ring, k.row(i)).expect("nonzero Howell row");
            if !deeper.contains(&col) {
                chosen.push((r, col, k.row(i).to_vec()));
            }
        }
    }
    chosen.sort_by_key(|(r, col, _)| (*r, *col));
    if chosen.len() != d {
        return Err(Error::PrecisionExhausted("adapted basis has the wrong size".into()));
    }
    let mut basis = PMatrix::zeros(ring, d, d);
    let mut phis = PMatrix::zeros(ring, d, d);
    for (k, (r, _, x)) in chosen.iter().enumerate() {
        let y = phi_r(w, *r, x, ring);
        for i in 0..d {
            basis.set(i, k, x[i]);
            phis.set(i, k, y[i]);
        }
    }
    let a_recovered = basis.inverse().map_err(|_| Error::PrecisionExhausted("adapted basis is singular".into()))?.mul(&phis)?;
    if !a_recovered.is_invertible() {
        return Err(Error::AxiomViolation("recovered Frobenius matrix is singular mod p".into()));
    }
    Ok(FilteredReduction {
        d,
        fil_ranks,
        weights_recovered: chosen.iter().map(|c| c.0).collect(),
        a_recovered,
        fil_generators: gens,
        basis,
    })
}

pub fn default_normalize_iter(ctx: &CycloContext) -> usize {
    ctx.m_pi0() + ctx.ring().precision() as usize + 4
}

/// Finds `P ≡ I mod π₀` with `P^{-1} C' φ(P) = A·diag(q^{r_j})`. Writing `P = I + π₀ K`
/// and `C' = A Q + π₀ Γ`, the condition becomes `K A = α + u C' φ(K) diag(q^{p-1-r_j})`
/// with `α q^{r_j} = Γ` columnwise, a contraction for `r_j <= p - 2`.
pub fn normalize_basis(
    c_pert: &SeriesMatrix,
    target: &FLModule,
    ctx: &CycloContext,
    max_iter: Option<usize>,
) -> Result<(SeriesMatrix, usize)> {
    let report = validate_fl(target);
    if !report.pass() {
        return Err(Error::ValidationFailed(report.failures()));
    }
    let d = target.d();
    let ring = ctx.ring();
    let order = ctx.m_pi0();
    let p = ctx.p() as u32;
    if c_pert.rows() != d || c_pert.cols() != d || c_pert.ring() != ring || c_pert.var() != Var::Pi0 {
        return Err(Error::InvalidInput("perturbed matrix has the wrong shape or profile".into()));
    }
    if c_pert.order() < order {
        return Err(Error::InvalidInput("perturbed matrix is shorter than the profile".into()));
    }
    let c_pert = c_pert.truncate(order);
    let c_target = crate::wach::build_phi_matrix(target, ctx)?;
    if c_pert.constant_term() != c_target.constant_term() {
        return Err(Error::NotCongruent);
    }
    let gamma = c_pert.sub(&c_target)?.shift_divide_exact(1)?;
    let mut alpha = SeriesMatrix::zeros(Var::Pi0, ring, d, d, order - 1);
    for j in 0..d {
        for i in 0..d {
            let a = gamma.get(i, j).solve_q_power_multiple(target.weights[j] as usize).ok_or_else(|| {
                Error::NotDivisible(format!("column {j} of the perturbation is not divisible by q^{}", target.weights[j]))
            })?;
            alpha.set(i, j, a);
        }
    }
    let a_inv = target.a.inverse()?;
    let mut weight = SeriesMatrix::zeros(Var::Pi0, ring, d, d, order);
    for j in 0..d {
        let dj = ctx.u.mul(&ctx.q.pow((p - 1 - target.weights[j]) as u64));
        for i in 0..d {
            weight.set(i, j, dj.clone());
        }
    }
    let max_iter = max_iter.unwrap_or_else(|| default_normalize_iter(ctx));
    let mut k = SeriesMatrix::zeros(Var::Pi0, ring, d, d, order - 1);
    let mut iterations = 0;
    loop {
        let phik = k.try_map(|e| ctx.apply_operator(OperatorTag::Phi, e))?;
        let next = alpha.add(&c_pert.mul(&phik)?.hadamard(&weight)?)?.right_mul_const(&a_inv)?.truncate(order - 1);
        iterations += 1;
        if next == k {
            break;
        }
        if iterations >= max_iter {
            return Err(Error::NoConvergence { iterations });
        }
        k = next;
    }
    let id = SeriesMatrix::identity(Var::Pi0, ring, d, order);
    Ok((id.add(&k.shift_up(1, order))?, iterations))
}

/// `P^{-1} C' φ(P) - A Q`.
pub fn normalize_residual(c_pert: &SeriesMatrix, p: &SeriesMatrix, target: &FLModule, ctx: &CycloContext) -> Result<SeriesMatrix> {
    let phip = p.try_map(|e| ctx.apply_operator(OperatorTag::Phi, e))?;
    let lhs = p.inverse()?.mul(c_pert)?.mul(&phip)?;
    let order = lhs.order().min(ctx.m_pi0());
    lhs.truncate(order).sub(&crate::wach::build_phi_matrix(target, ctx)?)
}

/// Random `P₀ = I + π₀ R`.
pub fn random_unipotent(ctx: &CycloContext, d: usize, rng: &mut impl Rng) -> SeriesMatrix {
    let ring = ctx.ring();
    let order = ctx.m_pi0();
    let mut p0 = SeriesMatrix::identity(Var::Pi0, ring, d, order);
    for i in 0..d {
        for j in 0..d {
            let coeffs: Vec<u64> = (0..order).map(|k| if k == 0 { 0 } else { rng.gen_range(0..ring.modulus()) }).collect();
            p0.set(i, j, p0.get(i, j).add(&TruncSeries::from_coeffs(Var::Pi0, ring, coeffs)));
        }
    }
    p0
}

fn push_result<T>(report: &mut Report, name: &str, r: Result<T>) -> Option<T> {
    match r {
        Ok(v) => Some(v),
        Err(e) => {
            report.push(name, false, e.to_string());
            None
        }
    }
}

/// `F` followed by reduction, plus recognition of a randomly re-based copy of `F(m)`.
pub fn roundtrip_check(m: &FLModule, ctx: &Arc<CycloContext>, seed: u64) -> Report {
    let mut report = Report { seed: Some(seed), ..Report::default() };
    let v = validate_fl(m);
    report.push("validate", v.pass(), if v.pass() { "ok".to_string() } else { v.failures().join("; ") });
    if !v.pass() {
        return report;
    }
    let Some(w) = push_result(&mut report, "functor", wach_functor(m, ctx, None)) else { return report };
    let axioms = verify_wach_axioms(&w);
    report.push("functor", axioms.pass(), format!("{} iterations; {}", w.iterations_used, axioms.failures().join("; ")));

    let ring = ctx.ring();
    let mut qdiag = PMatrix::zeros(ring, m.d(), m.d());
    for (j, &r) in m.weights.iter().enumerate() {
        qdiag.set(j, j, ring.p_pow(r));
    }
    match reduce_mod_pi0(&w) {
        Ok((c0, _)) => {
            let expect = m.a.mul(&qdiag).expect("square");
            let mut divisors = m.weights.clone();
            divisors.sort_unstable();
            let ok = c0 == expect && c0.elementary_divisor_exponents() == divisors;
            report.push("reduce_mod_pi0", ok, "C0 = A*diag(p^r), G0 = I");
        }
        Err(e) => report.push("reduce_mod_pi0", false, e.to_string()),
    }

    let expected_ranks = expected_fil_ranks(&m.weights, m.h);
    if let Some(fr) = push_result(&mut report, "fil_ranks", recover_filtration(&w, m.h)) {
        report.push("fil_ranks", fr.fil_ranks == expected_ranks, format!("{:?} vs {expected_ranks:?}", fr.fil_ranks));
        report.push("weights", fr.weights_recovered == m.weights, format!("{:?}", fr.weights_recovered));
        let a = m.a.reduce_to(fr.a_recovered.ring()).expect("same prime");
        report.push("matrix_a", fr.a_recovered == a, format!("recovered at precision p^{}", fr.precision()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p0 = random_unipotent(ctx, m.d(), &mut rng);
    let Some(wp) = push_result(&mut report, "perturbed_axioms", change_basis(&w, &p0)) else { return report };
    let ax = verify_wach_axioms(&wp);
    report.push("perturbed_axioms", ax.pass(), ax.failures().join("; "));
    if let Some(fr) = push_result(&mut report, "perturbed_fil_ranks", recover_filtration(&wp, m.h)) {
        report.push("perturbed_fil_ranks", fr.fil_ranks == expected_ranks, format!("{:?}", fr.fil_ranks));
    }
    let Some((p, iters)) = push_result(&mut report, "normalize_residual", normalize_basis(&wp.c, m, ctx, None)) else {
        return report;
    };
    match normalize_residual(&wp.c, &p, m, ctx) {
        Ok(res) => report.push("normalize_residual", res.is_zero(), format!("{iters} iterations")),
        Err(e) => report.push("normalize_residual", false, e.to_string()),
    }
    let Some(wn) = push_result(&mut report, "resolved_module", change_basis(&wp, &p)) else { return report };
    match crate::wach::solve_gamma_matrix(m, ctx, None) {
        Ok((g, _)) => report.push(
            "resolved_module",
            wn.c == w.c && g == w.g,
            "normalized C equals A*Q and the re-solved G equals that of F(m)",
        ),
        Err(e) => report.push("resolved_module", false, e.to_string()),
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyclo::build_default_context;

    fn ctx(p: u64, n: u32, m: usize) -> Arc<CycloContext> {
        Arc::new(build_default_context(p, n, m).unwrap())
    }

    #[test]
    fn reduction_examples() {
        let c = ctx(3, 5, 6);
        let r = c.ring();
        let w = wach_functor(&FLModule::rank_one(r, 0, 2), &c, None).unwrap();
        let (c0, g0) = reduce_mod_pi0(&w).unwrap();
        assert_eq!((c0.get(0, 0), g0.get(0, 0)), (2, 1));
        let m = FLModule::new(vec![0, 1], PMatrix::identity(r, 2)).unwrap();
        let w = wach_functor(&m, &c, None).unwrap();
        assert_eq!(reduce_mod_pi0(&w).unwrap().0, PMatrix::from_rows(r, &[vec![1, 0], vec![0, 3]]));
        let mut bad = w.clone();
        bad.g.set(0, 0, bad.g.get(0, 0).add_constant(3));
        assert!(matches!(reduce_mod_pi0(&bad), Err(Error::AxiomViolation(_))));
        let fr = recover_filtration(&w, 1).unwrap();
        assert_eq!(fr.fil_ranks, vec![2, 1, 0]);
        assert_eq!(fr.weights_recovered, vec![0, 1]);
        let w0 = wach_functor(&FLModule::rank_one(r, 0, 2), &c, None).unwrap();
        assert_eq!(recover_filtration(&w0, 0).unwrap().fil_ranks, vec![1, 0]);
    }

    #[test]
    fn unperturbed_normalization_is_identity() {
        let c = ctx(5, 6, 8);
        let r = c.ring();
        let m = FLModule::new(vec![0, 2], PMatrix::from_rows(r, &[vec![1, 2], vec![3, 4]])).unwrap();
        let cm = crate::wach::build_phi_matrix(&m, &c).unwrap();
        let (p, _) = normalize_basis(&cm, &m, &c, None).unwrap();
        assert_eq!(p, SeriesMatrix::identity(Var::Pi0, r, 2, 8));
    }

    #[test]
    fn rank_one_scalar_perturbation() {
        let c = ctx(3, 6, 8);
        let r = c.ring();
        let m = FLModule::rank_one(r, 1, 2);
        let pert = SeriesMatrix::from_entries(Var::Pi0, r, 1, 1, vec![c.q.mul(&TruncSeries::from_i64(Var::Pi0, r, &[2, 2], 8))]).unwrap();
        let (p, _) = normalize_basis(&pert, &m, &c, None).unwrap();
        assert!(normalize_residual(&pert, &p, &m, &c).unwrap().is_zero());
        let wrong = SeriesMatrix::from_entries(Var::Pi0, r, 1, 1, vec![c.q.scale(5)]).unwrap();
        assert_eq!(normalize_basis(&wrong, &m, &c, None), Err(Error::NotCongruent));
    }

    #[test]
    fn roundtrip_small() {
        let c = ctx(5, 6, 8);
        let r = c.ring();
        let m = FLModule::new(vec![0, 1, 3], PMatrix::from_rows(r, &[vec![1, 2, 3], vec![4, 9, 17], vec![6, 19, 54]])).unwrap();
        let rep = roundtrip_check(&m, &c, 7);
        assert!(rep.pass(), "{:?}", rep.failures());
    }
}
