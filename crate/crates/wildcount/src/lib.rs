//! Exact computation of last-ramification-jump distributions for G-extensions
//! of local function fields kappa((pi)) and of the global rational function
//! field F_q(T), for finite p-groups G of nilpotency class at most 2.
//!
//! The group G is handled through its Lie algebra g with the truncated BCH
//! law; local extensions are parametrized by finite-support data
//! D = sum_b D_b pi^{-b} with coefficients in g (x) W(kappa), and the last
//! jump is read off from an exact system of polynomial equations, with an
//! independent functional oracle as a cross-check. Local counts assemble into
//! global coefficients through an Euler product, and the growth constants
//! (A, B, M) are extracted in exact rational arithmetic.

pub mod error;
pub mod finite_field;
pub mod galois_ring;
pub mod global;
pub mod heisenberg;
pub mod lie;
pub mod local;

pub use error::{Error, Result};
pub use finite_field::{FieldElement, FieldParams};
pub use galois_ring::{RingElement, RingParams};
pub use global::{
    analytic_constants, euler_product, heisenberg_constants, local_series,
    main_theorem_constants, places_of_degree, AsymptoticsInput, AsymptoticsReport,
    AsymptoticsRow, RationalSeries,
};
pub use heisenberg::{
    a_km_bruteforce, a_km_charsum, a_km_stable, heisenberg_local_small_v, isotropic_count,
    SymplecticSpace,
};
pub use lie::{LieAlgebraSpec, LieElement, TensorAlgebra};
pub use local::{
    count_lastjump_eq, count_lastjump_lt, jump_distribution, lastjump, lastjump_oracle,
    satisfies_j, LocalDatum, Q,
};
