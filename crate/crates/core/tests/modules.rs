mod common;

use std::sync::{Arc, OnceLock};

use num_bigint::BigUint;
use proptest::prelude::*;

use common::PiOracle;
use wach_core::cyclo::OperatorTag;
use wach_core::padic::teichmueller_lift_big;
use wach_core::reduction::phi_r;
use wach_core::suite::generate_suite;
use wach_core::wach::solve_gamma_matrix_from;
use wach_core::{
    build_context, build_default_context, dual_twist_fl, recover_filtration, roundtrip_check, verify_wach_axioms,
    wach_functor, CycloContext, FLModule, PMatrix, SeriesMatrix, TruncSeries, Var, Zpn,
};

fn inverse_perm(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (k, &i) in perm.iter().enumerate() {
        inv[i] = k;
    }
    inv
}

#[test]
fn teichmueller_lifts_agree_with_newton() {
    for p in [3u64, 5, 7, 11, 13] {
        for k in [1u32, 5, 20] {
            for a in 1..p {
                assert_eq!(teichmueller_lift_big(a, p, k).unwrap(), common::teichmueller(a, p, k), "p={p} a={a} k={k}");
            }
        }
    }
}

#[test]
fn pi0_expansion_matches_teichmueller_sum() {
    for (p, n, m) in [(11u64, 4u32, 6usize), (13, 3, 4)] {
        let c = build_default_context(p, n, m).unwrap();
        let len = c.pi0_in_pi.order();
        assert_eq!(c.pi0_in_pi.coeffs(), &common::pi0_in_pi(p, n, len)[..], "p={p}");
    }
}

#[test]
fn oracle_residual_detects_tampering() {
    let c = Arc::new(build_default_context(5, 6, 8).unwrap());
    let ring = c.ring();
    let m = FLModule::new(vec![0, 1, 3], PMatrix::from_rows(ring, &[vec![1, 2, 0], vec![0, 1, 4], vec![1, 0, 1]])).unwrap();
    let w = wach_functor(&m, &c, None).unwrap();
    let o = PiOracle::new(5, 6, 8, 6);
    assert!(common::is_zero(&o.commutation_residual(&common::entries(&w.c), &common::entries(&w.g))));
    let mut bad = w.clone();
    bad.g.set(1, 2, bad.g.get(1, 2).add(&TruncSeries::from_i64(Var::Pi0, ring, &[0, 0, 0, 5], 8)));
    assert!(!common::is_zero(&o.commutation_residual(&common::entries(&bad.c), &common::entries(&bad.g))));
    assert!(!verify_wach_axioms(&bad).pass());
}

#[test]
fn square_of_gamma_is_a_cocycle() {
    let (p, n, m) = (5u64, 8u32, 10usize);
    let chi = BigUint::from(1 + p);
    let c1 = Arc::new(build_context(p, n, m, &chi).unwrap());
    let c2 = Arc::new(build_context(p, n, m, &(&chi * &chi)).unwrap());
    for module in generate_suite(3, 4, n).into_iter().filter(|x| x.p() == p) {
        let g1 = wach_functor(&module, &c1, None).unwrap().g;
        let g2 = wach_functor(&module, &c2, None).unwrap().g;
        let gamma_g1 = g1.try_map(|e| c1.apply_operator(OperatorTag::Gamma, e)).unwrap();
        assert_eq!(g1.mul(&gamma_g1).unwrap().truncate(m), g2);
    }
}

#[test]
fn dual_twist_inverts_gamma() {
    for p in [5u64, 7] {
        let c = Arc::new(build_default_context(p, 8, 10).unwrap());
        let ring = c.ring();
        let h = p as u32 - 2;
        let twist = wach_functor(&FLModule::rank_one(ring, h, 1), &c, None).unwrap().g;
        for m in generate_suite(11, 6, 8).into_iter().filter(|x| x.p() == p) {
            let w = wach_functor(&m, &c, None).unwrap();
            let dual = dual_twist_fl(&m, h).unwrap();
            let wd = wach_functor(&dual, &c, None).unwrap().permuted(&inverse_perm(&dual.input_order));
            let expect = w.g.inverse().unwrap().transpose().map(|e| e.mul(twist.get(0, 0)));
            assert_eq!(wd.g, expect, "p={p} weights={:?}", m.weights);
        }
    }
}

#[test]
fn divided_frobenii_are_compatible() {
    for m in generate_suite(5, 6, 10) {
        let c = Arc::new(build_default_context(m.p(), 10, 12).unwrap());
        let w = wach_functor(&m, &c, None).unwrap();
        let fr = recover_filtration(&w, m.h).unwrap();
        let ring = fr.a_recovered.ring();
        for i in 0..m.h {
            let gens = &fr.fil_generators[i as usize + 1];
            for k in 0..gens.rows() {
                let x = gens.row(k);
                let lower = phi_r(&w, i, x, ring);
                let upper: Vec<u64> = phi_r(&w, i + 1, x, ring).iter().map(|&y| ring.mul(ring.p(), y)).collect();
                assert_eq!(lower, upper, "weights {:?}, Fil^{}", m.weights, i + 1);
            }
        }
    }
}

#[test]
fn reduction_does_not_depend_on_the_generator() {
    for p in [3u64, 5, 7] {
        let a = Arc::new(build_context(p, 8, 10, &BigUint::from(1 + p)).unwrap());
        let b = Arc::new(build_context(p, 8, 10, &BigUint::from(1 + 2 * p)).unwrap());
        for m in generate_suite(9, 4, 8).into_iter().filter(|x| x.p() == p) {
            for ctx in [&a, &b] {
                let r = roundtrip_check(&m, ctx, 1);
                assert!(r.pass(), "{:?}", r.failures());
            }
            let fa = recover_filtration(&wach_functor(&m, &a, None).unwrap(), m.h).unwrap();
            let fb = recover_filtration(&wach_functor(&m, &b, None).unwrap(), m.h).unwrap();
            assert_eq!((fa.weights_recovered, fa.a_recovered), (fb.weights_recovered, fb.a_recovered));
        }
    }
}

const PROP_P: u64 = 5;
const PROP_N: u32 = 5;
const PROP_M: usize = 6;

fn prop_ctx() -> Arc<CycloContext> {
    static CTX: OnceLock<Arc<CycloContext>> = OnceLock::new();
    CTX.get_or_init(|| Arc::new(build_default_context(PROP_P, PROP_N, PROP_M).unwrap())).clone()
}

fn prop_oracle() -> &'static PiOracle {
    static O: OnceLock<PiOracle> = OnceLock::new();
    O.get_or_init(|| PiOracle::new(PROP_P, PROP_N, PROP_M, PROP_P + 1))
}

fn fl_strategy() -> impl Strategy<Value = FLModule> {
    (1usize..=3).prop_flat_map(|d| {
        let modulus = PROP_P.pow(PROP_N);
        (
            proptest::collection::vec(0u32..=(PROP_P as u32 - 2), d),
            proptest::collection::vec(0..modulus, d * d),
        )
            .prop_filter_map("A must be invertible mod p", move |(weights, data)| {
                let ring = Zpn::new(PROP_P, PROP_N).unwrap();
                let a = PMatrix::from_raw(ring, d, d, data);
                a.is_invertible().then(|| FLModule::new(weights, a).unwrap())
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn functor_output_commutes_in_pi_coordinates(m in fl_strategy()) {
        let w = wach_functor(&m, &prop_ctx(), None).unwrap();
        let res = prop_oracle().commutation_residual(&common::entries(&w.c), &common::entries(&w.g));
        prop_assert!(common::is_zero(&res));
        prop_assert!(verify_wach_axioms(&w).pass());
    }

    #[test]
    fn reduction_inverts_the_functor(m in fl_strategy()) {
        let w = wach_functor(&m, &prop_ctx(), None).unwrap();
        let fr = recover_filtration(&w, m.h).unwrap();
        prop_assert_eq!(&fr.weights_recovered, &m.weights);
        prop_assert_eq!(fr.a_recovered, m.a.clone());
    }

    #[test]
    fn fixed_point_is_unique(m in fl_strategy(), seed in 0u64..1000) {
        let ctx = prop_ctx();
        let ring = ctx.ring();
        let w = wach_functor(&m, &ctx, None).unwrap();
        let d = m.d();
        let mut start = SeriesMatrix::identity(Var::Pi0, ring, d, PROP_M);
        for i in 0..d {
            for j in 0..d {
                let coeffs: Vec<u64> = (0..PROP_M)
                    .map(|k| if k == 0 { 0 } else { (seed * 7919 + (i * d + j) as u64 * 104_729 + k as u64 * 31) % ring.modulus() })
                    .collect();
                start.set(i, j, start.get(i, j).add(&TruncSeries::from_coeffs(Var::Pi0, ring, coeffs)));
            }
        }
        let (g, _) = solve_gamma_matrix_from(&m, &ctx, &start, None).unwrap();
        prop_assert_eq!(g, w.g);
    }
}
