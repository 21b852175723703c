//! Seeded generator for the test suite of Fontaine-Laffaille modules.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::fl::FLModule;
use crate::linalg::PMatrix;
use crate::padic::Zpn;

pub const SUITE_PRIMES: [u64; 3] = [3, 5, 7];
pub const DEFAULT_PER_PRIME: usize = 12;
pub const MAX_RANK: usize = 3;

/// A matrix invertible modulo `p`, uniform among such.
pub fn random_unit_matrix(ring: Zpn, d: usize, rng: &mut impl Rng) -> PMatrix {
    loop {
        let data = (0..d * d).map(|_| rng.gen_range(0..ring.modulus())).collect();
        let a = PMatrix::from_raw(ring, d, d, data);
        if a.is_invertible() {
            return a;
        }
    }
}

/// Random module of rank `d` with weights in `[0, p-2]`.
pub fn random_fl(ring: Zpn, d: usize, rng: &mut impl Rng) -> FLModule {
    let top = ring.p() as u32 - 2;
    let weights = (0..d).map(|_| rng.gen_range(0..=top)).collect();
    FLModule::new(weights, random_unit_matrix(ring, d, rng)).expect("shapes agree")
}

/// `per_prime` modules for each of `p = 3, 5, 7` at precision `p^n`; ranks `1..=3`.
/// The first module for each prime has rank 3 and contains the boundary weight `p - 2`.
pub fn generate_suite(seed: u64, per_prime: usize, n: u32) -> Vec<FLModule> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(per_prime * SUITE_PRIMES.len());
    for p in SUITE_PRIMES {
        let ring = Zpn::new(p, n).expect("suite primes are valid");
        for k in 0..per_prime {
            let m = if k == 0 {
                let m = random_fl(ring, MAX_RANK, &mut rng);
                let mut weights = m.weights.clone();
                weights[MAX_RANK - 1] = p as u32 - 2;
                FLModule::new(weights, m.a).expect("shapes agree")
            } else {
                let d = rng.gen_range(1..=MAX_RANK);
                random_fl(ring, d, &mut rng)
            };
            out.push(m);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fl::validate_fl;

    #[test]
    fn suite_is_deterministic_and_valid() {
        let a = generate_suite(42, 4, 6);
        let b = generate_suite(42, 4, 6);
        assert_eq!(a, b);
        assert_ne!(a, generate_suite(43, 4, 6));
        for m in &a {
            assert!(validate_fl(m).pass());
        }
        for (i, p) in SUITE_PRIMES.iter().enumerate() {
            assert!(a[4 * i].weights.contains(&(*p as u32 - 2)));
        }
    }
}
