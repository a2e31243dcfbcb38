//! Global analysis of the operator: hull criteria, degree, tameness,
//! classification, time reparametrizations and step-function seeds.

mod classify;
mod hull;
mod reparam;
mod seed;

pub use classify::{
    classify_operator, default_range, degree, integration_by_parts_residual, is_k_good, tameness,
    EndReport, Evidence, HullRecord, OperatorClass, OperatorReport, SignCertificate, SignClaim,
    TailBehavior, TamenessReport,
};
pub use hull::{hull_origin_test, GammaCurve, HullVerdict, HullWitness, Verdict};
pub use reparam::{reparam, Direction, Reparametrization};
pub use seed::{extreme_anchors, seed_shat, smooth_step, ShatSeed, StepSeed};
