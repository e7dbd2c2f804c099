//! Calculus of completely reducible bipartite states.
//!
//! A bipartite state `gamma` on `M_k (x) M_m` carries a pair of positive
//! maps `G(X) = Tr_1(gamma (X (x) Id))` and `F(Y) = Tr_2(gamma (Id (x) Y))`,
//! adjoint to each other under the trace inner product. The state is
//! *completely reducible* when the self-adjoint composition `T = F . G`
//! splits into irreducible blocks on orthogonal subalgebras and vanishes on
//! the rest.
//!
//! The crate builds these maps concretely, decides complete reducibility
//! with an explicit certificate or witness ([`reduce::decompose`]),
//! implements the operations that preserve the property (convex sums,
//! powers, roots, partial traces, shuffles), classifies states by the three
//! classical sufficient conditions (PPT, SPC, realignment invariance), and
//! provides a randomized probe for the associated distillability statement.

pub mod error;
pub mod families;
pub mod io;
pub mod mat;
pub mod ops;
pub mod probe;
pub mod reduce;
pub mod state;
pub mod superop;

pub use error::{Error, Result};
pub use families::{classify, werner, TypeFlags};
pub use mat::{CMatrix, CVector, C64};
pub use ops::{
    compress, flip_operator, max_ent_projector, max_ent_vector, partial_trace,
    partial_transpose, realignment, shuffle, SitesDescriptor,
};
pub use probe::{probe, rank2_span_value, ProbeReport};
pub use reduce::{
    certify_pair, decompose, invariant_partner, is_completely_reducible, perron_psd,
    verify_certificate, ReducibilityCertificate, Verdict,
};
pub use state::{
    is_psd, random_state, support_projection, BipartiteState, Projection, ToleranceConfig,
};
pub use superop::{choi, f_apply, fg_superop, g_apply, verify_adjoint, SuperOperator};
