//! The functor from Fontaine-Laffaille modules to Wach modules over `S₀`: the φ-matrix
//! `C = A·diag(q^{r_j})`, the γ-matrix `G` as the fixed point of a contracting update,
//! the module axioms and sub-lattice stability.

use std::sync::Arc;

use crate::cyclo::{CycloContext, OperatorTag};
use crate::error::{Error, Result};
use crate::fl::{direct_sum_fl, tensor_fl, validate_fl, FLModule, LatticeSub};
use crate::io::Report;
use crate::linalg::PMatrix;
use crate::series::{TruncSeries, Var};
use crate::smatrix::SeriesMatrix;

#[derive(Clone, Debug)]
pub struct WachModule {
    pub ctx: Arc<CycloContext>,
    pub c: SeriesMatrix,
    pub g: SeriesMatrix,
    /// Weights attached to the basis (the exponents of `q` in `det C`).
    pub weights: Vec<u32>,
    pub source: Option<FLModule>,
    pub iterations_used: usize,
    /// Entries of `C` are polynomials known exactly (no truncation loss).
    pub c_exact: bool,
}

impl PartialEq for WachModule {
    fn eq(&self, other: &Self) -> bool {
        self.ctx.same_profile(&other.ctx)
            && self.c == other.c
            && self.g == other.g
            && self.weights == other.weights
    }
}

impl WachModule {
    pub fn d(&self) -> usize {
        self.weights.len()
    }

    pub fn h(&self) -> u32 {
        self.weights.iter().copied().max().unwrap_or(0)
    }

    /// The same module in the basis `e'_k = e_{perm[k]}`.
    pub fn permuted(&self, perm: &[usize]) -> WachModule {
        WachModule {
            ctx: self.ctx.clone(),
            c: self.c.permute(perm),
            g: self.g.permute(perm),
            weights: perm.iter().map(|&i| self.weights[i]).collect(),
            source: self.source.as_ref().map(|m| m.permuted(perm)),
            iterations_used: self.iterations_used,
            c_exact: self.c_exact,
        }
    }
}

fn phi(ctx: &CycloContext, m: &SeriesMatrix) -> Result<SeriesMatrix> {
    m.try_map(|e| ctx.apply_operator(OperatorTag::Phi, e))
}

fn gamma(ctx: &CycloContext, m: &SeriesMatrix) -> Result<SeriesMatrix> {
    m.try_map(|e| ctx.apply_operator(OperatorTag::Gamma, e))
}

fn check_compatible(m: &FLModule, ctx: &CycloContext) -> Result<()> {
    let report = validate_fl(m);
    if !report.pass() {
        return Err(Error::ValidationFailed(report.failures()));
    }
    if m.ring() != ctx.ring() {
        return Err(Error::ProfileMismatch(format!("module over {:?}, context over {:?}", m.ring(), ctx.ring())));
    }
    Ok(())
}

/// `C = A · diag(q^{r_j})`.
pub fn build_phi_matrix(m: &FLModule, ctx: &CycloContext) -> Result<SeriesMatrix> {
    check_compatible(m, ctx)?;
    let order = ctx.m_pi0();
    let qpow: Vec<TruncSeries> = m.weights.iter().map(|&r| ctx.q.pow(r as u64)).collect();
    let d = m.d();
    let entries = (0..d)
        .flat_map(|i| (0..d).map(move |j| (i, j)))
        .map(|(i, j)| qpow[j].scale(m.a.get(i, j)))
        .collect();
    SeriesMatrix::from_entries(Var::Pi0, ctx.ring(), d, d, entries).map(|c| c.truncate(order))
}

pub fn default_max_iter(ctx: &CycloContext) -> usize {
    ctx.m_pi0() + 4
}

/// Solves `C φ(G) = G γ(C)`, `G ≡ I mod π₀`, starting from the identity.
pub fn solve_gamma_matrix(m: &FLModule, ctx: &CycloContext, max_iter: Option<usize>) -> Result<(SeriesMatrix, usize)> {
    let id = SeriesMatrix::identity(Var::Pi0, ctx.ring(), m.d(), ctx.m_pi0());
    solve_gamma_matrix_from(m, ctx, &id, max_iter)
}

/// Same fixed point from an arbitrary initial guess `G₀ ≡ I mod π₀`.
///
/// With `G = I + Δ` and `Δ' = Δ/π₀`, the identity `φ(π₀) = u π₀ q^{p-1}` turns
/// `G ↦ C φ(G) γ(C)^{-1}` into
/// `A V^{-1} A^{-1} + π₀ A [q^{r_i} u φ(Δ')_ij q^{p-1-r_j}] V^{-1} A^{-1}`,
/// `V = diag(v_γ^{r_j})`, which needs no division by `q`.
pub fn solve_gamma_matrix_from(
    m: &FLModule,
    ctx: &CycloContext,
    initial: &SeriesMatrix,
    max_iter: Option<usize>,
) -> Result<(SeriesMatrix, usize)> {
    check_compatible(m, ctx)?;
    let d = m.d();
    let order = ctx.m_pi0();
    let ring = ctx.ring();
    let p = ctx.p() as u32;
    if initial.rows() != d || initial.cols() != d || initial.var() != Var::Pi0 || initial.ring() != ring {
        return Err(Error::InvalidInput("initial guess has the wrong shape or profile".into()));
    }
    if initial.order() < order {
        return Err(Error::InvalidInput("initial guess is shorter than the profile".into()));
    }
    let id = SeriesMatrix::identity(Var::Pi0, ring, d, order);
    let mut g = initial.truncate(order);
    if !g.constant_term().is_identity() {
        return Err(Error::InvalidInput("initial guess is not the identity modulo pi0".into()));
    }
    let a_inv = m.a.inverse()?;
    let v_inv = ctx.v_gamma.invert_unit()?;
    let vinv_pows: Vec<TruncSeries> = m.weights.iter().map(|&r| v_inv.pow(r as u64)).collect();
    let right = SeriesMatrix::diagonal(Var::Pi0, ring, vinv_pows, order).right_mul_const(&a_inv)?;
    let base = right.left_mul_const(&m.a)?;
    let mut weight = SeriesMatrix::zeros(Var::Pi0, ring, d, d, order);
    for (i, &ri) in m.weights.iter().enumerate() {
        for (j, &rj) in m.weights.iter().enumerate() {
            weight.set(i, j, ctx.u.mul(&ctx.q.pow((ri + p - 1 - rj) as u64)));
        }
    }
    let max_iter = max_iter.unwrap_or_else(|| default_max_iter(ctx));
    let mut iterations = 0;
    loop {
        let delta = g.sub(&id)?.shift_divide_exact(1)?;
        let e = phi(ctx, &delta)?.hadamard(&weight)?;
        let step = e.left_mul_const(&m.a)?.mul(&right)?.shift_up(1, order);
        let next = base.add(&step)?.truncate(order);
        iterations += 1;
        if next == g {
            return Ok((g, iterations));
        }
        if iterations >= max_iter {
            return Err(Error::NoConvergence { iterations });
        }
        g = next;
    }
}

/// `F(m)`.
pub fn wach_functor(m: &FLModule, ctx: &Arc<CycloContext>, max_iter: Option<usize>) -> Result<WachModule> {
    let c = build_phi_matrix(m, ctx)?;
    let (g, iterations_used) = solve_gamma_matrix(m, ctx, max_iter)?;
    let w = WachModule {
        ctx: ctx.clone(),
        c,
        g,
        weights: m.weights.clone(),
        source: Some(m.clone()),
        iterations_used,
        c_exact: (m.h as usize) < ctx.m_pi0(),
    };
    let residual = commutation_residual(&w)?;
    if !residual.is_zero() || !w.g.constant_term().is_identity() {
        return Err(Error::AxiomViolation("solved G fails the commutation relation".into()));
    }
    Ok(w)
}

/// `C φ(G) - G γ(C)`.
pub fn commutation_residual(w: &WachModule) -> Result<SeriesMatrix> {
    let lhs = w.c.mul(&phi(&w.ctx, &w.g)?)?;
    let rhs = w.g.mul(&gamma(&w.ctx, &w.c)?)?;
    lhs.sub(&rhs)
}

fn describe_entry(m: &SeriesMatrix, i: usize, j: usize) -> String {
    let e = m.get(i, j);
    let k = e.valuation();
    format!("entry ({i},{j}) first nonzero at X^{k}: {}", e.coeff(k))
}

/// Whether `s = q^r · w` for some unit `w`, inside `Z/p^N[X]/(X^order)`.
fn is_unit_times_q_power(s: &TruncSeries, r: usize) -> bool {
    let Some(w) = s.solve_q_power_multiple(r) else { return false };
    if w.is_unit() {
        return true;
    }
    let ker = TruncSeries::q_power_annihilator(s.var(), s.ring(), s.order(), r);
    (0..ker.rows()).any(|i| s.ring().is_unit(ker.get(i, 0)))
}

pub fn verify_wach_axioms(w: &WachModule) -> Report {
    let mut report = Report::new();
    let ctx = &w.ctx;
    let d = w.d();
    let shape_ok = w.c.rows() == d && w.c.cols() == d && w.g.rows() == d && w.g.cols() == d;
    if !shape_ok {
        report.push("shape", false, format!("C and G must be {d}x{d}"));
        return report;
    }
    match commutation_residual(w) {
        Ok(res) => {
            let bad = (0..d).flat_map(|i| (0..d).map(move |j| (i, j))).find(|&(i, j)| !res.get(i, j).is_zero());
            report.push(
                "commutation",
                bad.is_none(),
                bad.map_or("C*phi(G) = G*gamma(C)".to_string(), |(i, j)| describe_entry(&res, i, j)),
            );
        }
        Err(e) => report.push("commutation", false, e.to_string()),
    }

    let g0 = w.g.constant_term();
    let bad = (0..d).flat_map(|i| (0..d).map(move |j| (i, j))).find(|&(i, j)| g0.get(i, j) != u64::from(i == j));
    report.push(
        "trivial_mod_pi0",
        bad.is_none(),
        bad.map_or("G = I mod pi0".to_string(), |(i, j)| format!("G({i},{j})(0) = {}", g0.get(i, j))),
    );

    let s: u32 = w.weights.iter().sum();
    match w.c.det() {
        Ok(det) => {
            let ok = is_unit_times_q_power(&det, s as usize);
            report.push(
                "det_q_power",
                ok,
                if ok { format!("det(C) = unit * q^{s}") } else { format!("det(C) is not a unit times q^{s}: {det:?}") },
            );
        }
        Err(e) => report.push("det_q_power", false, e.to_string()),
    }

    let mut offender = None;
    'outer: for (name, m) in [("C", &w.c), ("G", &w.g)] {
        for i in 0..d {
            for j in 0..d {
                match ctx.is_gamma_f_invariant(m.get(i, j)) {
                    Ok(true) => {}
                    Ok(false) => {
                        offender = Some(format!("{name}({i},{j}) is not fixed by the torsion action"));
                        break 'outer;
                    }
                    Err(e) => {
                        offender = Some(format!("{name}({i},{j}): {e}"));
                        break 'outer;
                    }
                }
            }
        }
    }
    report.push(
        "gamma_f_invariance",
        offender.is_none(),
        offender.unwrap_or_else(|| "all entries lie in S0".to_string()),
    );
    report
}

fn check_same_ctx(w1: &WachModule, w2: &WachModule) -> Result<()> {
    if !w1.ctx.same_profile(&w2.ctx) {
        return Err(Error::ProfileMismatch("Wach modules over different contexts".into()));
    }
    Ok(())
}

fn ensure_axioms(w: WachModule) -> Result<WachModule> {
    let report = verify_wach_axioms(&w);
    if !report.pass() {
        return Err(Error::AxiomViolation(report.failures().join("; ")));
    }
    Ok(w)
}

/// Kronecker products of `C` and `G`; basis `e_i ⊗ e'_j` in lexicographic order.
pub fn tensor_wach(w1: &WachModule, w2: &WachModule) -> Result<WachModule> {
    check_same_ctx(w1, w2)?;
    let weights = w1.weights.iter().flat_map(|&a| w2.weights.iter().map(move |&b| a + b)).collect();
    let source = match (&w1.source, &w2.source) {
        (Some(a), Some(b)) => tensor_fl(a, b).ok().map(|t| {
            // keep the lexicographic basis of the Wach side
            let mut inv = vec![0; t.input_order.len()];
            for (k, &i) in t.input_order.iter().enumerate() {
                inv[i] = k;
            }
            t.permuted(&inv)
        }),
        _ => None,
    };
    ensure_axioms(WachModule {
        ctx: w1.ctx.clone(),
        c: w1.c.kronecker(&w2.c)?,
        g: w1.g.kronecker(&w2.g)?,
        weights,
        source,
        iterations_used: w1.iterations_used.max(w2.iterations_used),
        c_exact: w1.c_exact && w2.c_exact && ((w1.h() + w2.h()) as usize) < w1.ctx.m_pi0(),
    })
}

pub fn direct_sum_wach(w1: &WachModule, w2: &WachModule) -> Result<WachModule> {
    check_same_ctx(w1, w2)?;
    let source = match (&w1.source, &w2.source) {
        (Some(a), Some(b)) => direct_sum_fl(a, b).ok().map(|s| {
            let mut inv = vec![0; s.input_order.len()];
            for (k, &i) in s.input_order.iter().enumerate() {
                inv[i] = k;
            }
            s.permuted(&inv)
        }),
        _ => None,
    };
    ensure_axioms(WachModule {
        ctx: w1.ctx.clone(),
        c: w1.c.block_diagonal(&w2.c)?,
        g: w1.g.block_diagonal(&w2.g)?,
        weights: w1.weights.iter().chain(&w2.weights).copied().collect(),
        source,
        iterations_used: w1.iterations_used.max(w2.iterations_used),
        c_exact: w1.c_exact && w2.c_exact,
    })
}

/// Whether `G` preserves `L ⊗ S₀`: with `X = F^{-1} G F`, each included column `j` must
/// satisfy `p^{α_i} | X_ij p^{α_j}` for included rows and `X_ij p^{α_j} = 0` for omitted ones.
pub fn check_lattice_stability(w: &WachModule, lattice: &LatticeSub) -> Result<Report> {
    let d = w.d();
    if lattice.ambient_rank() != d {
        return Err(Error::InvalidInput(format!(
            "lattice in rank {} but module has rank {d}",
            lattice.ambient_rank()
        )));
    }
    if lattice.f.ring() != w.ctx.ring() {
        return Err(Error::RingMismatch(format!("{:?} vs {:?}", lattice.f.ring(), w.ctx.ring())));
    }
    let f_inv = lattice.f.inverse().map_err(|_| Error::SingularBasis)?;
    let x = w.g.right_mul_const(&lattice.f)?.left_mul_const(&f_inv)?;
    let ring = w.ctx.ring();
    let mut violations = Vec::new();
    for (j, aj) in lattice.alpha.iter().enumerate() {
        let Some(aj) = aj else { continue };
        let scale = ring.p_pow(*aj);
        for (i, ai) in lattice.alpha.iter().enumerate() {
            let e = x.get(i, j).scale(scale);
            let bad = e.coeffs().iter().position(|&c| match ai {
                Some(ai) => ring.valuation(c) < *ai,
                None => c != 0,
            });
            if let Some(k) = bad {
                violations.push(format!("X({i},{j}) * p^{aj} at X^{k} = {}", e.coeff(k)));
            }
        }
    }
    let mut report = Report::new();
    report.push(
        "lattice_stability",
        violations.is_empty(),
        if violations.is_empty() { "G preserves the lattice".to_string() } else { violations.join("; ") },
    );
    Ok(report)
}

/// `P^{-1} C φ(P)` and `P^{-1} G γ(P)`: the module in the basis given by the columns of `P`.
pub fn change_basis(w: &WachModule, p: &SeriesMatrix) -> Result<WachModule> {
    let p_inv = p.inverse()?;
    let c = p_inv.mul(&w.c)?.mul(&phi(&w.ctx, p)?)?;
    let g = p_inv.mul(&w.g)?.mul(&gamma(&w.ctx, p)?)?;
    let order = w.ctx.m_pi0().min(c.order()).min(g.order());
    Ok(WachModule {
        ctx: w.ctx.clone(),
        c: c.truncate(order),
        g: g.truncate(order),
        weights: w.weights.clone(),
        source: None,
        iterations_used: w.iterations_used,
        c_exact: false,
    })
}

/// Constant matrix as a π₀-series matrix at the context order.
pub fn constant_matrix(ctx: &CycloContext, a: &PMatrix) -> SeriesMatrix {
    SeriesMatrix::from_pmatrix(a, Var::Pi0, ctx.m_pi0())
}
