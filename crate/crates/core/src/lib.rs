//! Analysis of the periodic first-order operator `F(u) = u' + f(t, u)` on the
//! unit circle: fibre solves, Morin singularity functionals, return maps,
//! global classification of the operator and the Gauss-Newton search for
//! high-order singularities.

pub mod ansatz;
pub mod error;
pub mod fibre;
pub mod globalgeo;
pub mod grid;
pub mod linalg;
pub mod lp;
pub mod morin;
pub mod nonlinearity;
pub mod odeint;
pub mod poly;
pub mod search;

pub use ansatz::FourierAnsatz;
pub use error::{Error, Result};
pub use grid::{green_kernel, Cumulative, Grid, PeriodicFn, TrigInterpolant, DEFAULT_GRID_SIZE};
pub use nonlinearity::{Builtin, Nonlinearity, Term, TrigPoly};
pub use odeint::{
    contact_order, integrate, return_map, ContactOptions, ContactOrder, ContactReport,
    Integrator, ReturnEval, ReturnValue, TerminalStatus, Trajectory, U_MAX,
};
pub use fibre::{fibre_trace, solve_periodic, solve_w, Constraint, FibreOptions, FibrePoint, TracePoint, WField};
pub use morin::{
    classify_point, eigen_w, sigma_hat, sigma_vec, sigmas, ClassifyOptions, EigenPair, MorinOrder,
    SigmaReport,
};
pub use globalgeo::{
    classify_operator, degree, hull_origin_test, reparam, seed_shat, tameness, Direction, GammaCurve,
    HullVerdict, OperatorClass, OperatorReport, TamenessReport, Verdict,
};
pub use search::{
    count_solutions, gauss_newton, sweep, CellAnalysis, CensusOptions, Family, FamilyParam, ParamAxis, SearchOptions,
    SearchProblem, SearchReport, SearchStatus, SolutionCensus, SweepCell, SweepTable,
};
