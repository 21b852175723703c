//! Exact arithmetic for Fontaine-Laffaille modules and their Wach modules over
//! `Z_p[[π₀]]`, truncated at `(p^N, π₀^M)`.

#![allow(clippy::needless_range_loop)]

pub mod cyclo;
pub mod error;
pub mod fl;
pub mod io;
pub mod linalg;
pub mod padic;
pub mod reduction;
pub mod series;
pub mod smatrix;
pub mod suite;
pub mod wach;

pub use cyclo::{build_context, build_default_context, CycloContext, OperatorTag};
pub use error::{Error, Result};
pub use fl::{direct_sum_fl, dual_twist_fl, tensor_fl, validate_fl, FLModule, LatticeSub};
pub use io::{Check, Report};
pub use linalg::PMatrix;
pub use padic::{PScalar, PadicExponent, Zpn};
pub use reduction::{normalize_basis, recover_filtration, reduce_mod_pi0, roundtrip_check, FilteredReduction};
pub use series::{TruncSeries, TruncationProfile, Var};
pub use smatrix::SeriesMatrix;
pub use wach::{
    build_phi_matrix, check_lattice_stability, direct_sum_wach, solve_gamma_matrix, tensor_wach, verify_wach_axioms,
    wach_functor, WachModule,
};
