//! Derived fields, reaction constants and the certificates that check the
//! differential inequalities, gradient estimates, Harnack inequality and
//! Liouville property on computed solutions.

mod bounds;
mod certificate;
mod cutoff;
mod fields;
mod gradient;
mod harnack;
mod lemmas;
mod liouville;
mod liyau;

pub use bounds::{
    exponential_term, h1_over_range, reaction_bounds, reaction_bounds_over, ReactionBounds,
};
pub use certificate::{Certificate, CertificateKind, Extremum, GridMeta, Refinement, Verdict};
pub use cutoff::{
    cutoff_exponent, cutoff_profile, CutoffProfile, EXCLUDE_BELOW, EXPONENT_AT_ONE, SAMPLES,
};
pub use fields::{
    derive_fields, radial_derivative, time_derivative, DerivedFields, Quantity, SnapshotFields,
};
pub use gradient::gradient_certificate;
pub(crate) use gradient::{check_absorbing_signs, check_unit_interval};
pub use harnack::{harnack_certificate, harnack_holds, required_harnack_constant};
pub use lemmas::{grid_tolerance, lemma_residual, residual_field, ResidualField};
pub use liouville::{
    liouville_check, liouville_corollary, reaction_root_near, LiouvilleSetup, OSCILLATION_TOL,
    ROOT_TOL,
};
pub use liyau::li_yau_diagnostic;
