//! Gauss-Newton search for prescribed `Sigma` values, periodic-solution
//! census through the return map, and parameter sweeps.

mod census;
mod newton;
mod sweep;

pub use census::{count_solutions, CensusOptions, HalvingCheck, Root, ScanPoint, SolutionCensus};
pub use newton::{
    gauss_newton, Family, FamilyParam, SearchOptions, SearchProblem, SearchReport, SearchStatus,
};
pub use sweep::{sweep, CellAnalysis, ParamAxis, SweepCell, SweepTable};
