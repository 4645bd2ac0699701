//! Recovery and injectivity analysis for measurements of the form
//! `y_j = ||M_j^* x + b_j||^2`.
//!
//! A measurement ensemble is a family of pairs `(M_j, b_j)` with `M_j` a
//! `d x r` matrix and `b_j` an offset in `F^r`, over `F = R` or `F = C`.
//! Unlike plain magnitude measurements, the offsets break the global phase
//! symmetry, so a well-chosen ensemble determines every signal uniquely and
//! exact recovery becomes a sequence of small linear solves.
//!
//! The crate is organized around that pipeline:
//!
//! * [`ensemble`]: the measurement types, validation, and the lifted /
//!   realified views that the algorithms work on.
//! * [`forward`]: evaluating ensembles, their Jacobians, and the injectivity
//!   margin of a base point.
//! * [`construct`]: block ensembles with minimal measurement counts, their
//!   non-open perturbations, and random Gaussian ensembles.
//! * [`recover`]: exact per-block recovery for the structured ensembles and
//!   damped least squares for everything else.
//! * [`injectivity`]: collision witnesses, rank-two certificates, and the
//!   search procedures that produce them.
//! * [`json`]: the on-disk formats shared with the command line tool.
//!
//! Everything numeric runs on the small dense routines in [`linalg`]; no
//! operation here needs a matrix larger than `2(d+1)` on a side.

pub mod construct;
pub mod ensemble;
pub mod forward;
pub mod injectivity;
pub mod json;
pub mod linalg;
pub mod recover;
pub mod rng;

pub use num_complex::Complex64;

pub use construct::{
    default_spanning_offsets, perturbation_base, perturbed_ensemble, random_ensemble,
    tight_ensemble, tight_pair_count, ConstructError, PerturbationWitness,
};
pub use ensemble::{
    lift_measurement, realify_pair, validate_ensemble, Block, ConstructionMeta, Ensemble,
    FieldTag, LiftedMatrix, MeasurementPair, RealifiedPair, Signal, TightLayout,
    ValidationReport,
};
pub use forward::{
    jacobian, margin, measure, polarization_gap, ForwardError, MarginResult, MeasurementVector,
};
pub use injectivity::{
    certificate_from_collision, collision_from_certificate, collision_search,
    deficiency_collision, injectivity_report, verify_certificate, witness_scale, Certificate,
    CertificateError, CertificateReport, CollisionError, CollisionWitness, InjectivityReport,
    SearchOptions, Verdict,
};
pub use recover::{
    block_recover, lsq_recover, tight_recover, BlockSolution, LsqOptions, RecoveryError,
    RecoveryReport,
};
