use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::census::{count_solutions, CensusOptions};
use super::newton::Family;
use crate::error::{Error, Result};
use crate::globalgeo::{classify_operator, OperatorClass};
use crate::grid::PeriodicFn;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamAxis {
    pub name: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CellAnalysis {
    Classify {
        #[serde(default)]
        x_range: Option<(f64, f64)>,
    },
    Count {
        rhs: PeriodicFn,
        x_lo: f64,
        x_hi: f64,
        scan_n: usize,
        step: f64,
        #[serde(default)]
        options: CensusOptions,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub index: usize,
    pub params: Vec<(String, f64)>,
    pub class: Option<OperatorClass>,
    pub count: Option<usize>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SweepTable {
    pub cells: Vec<SweepCell>,
}

fn cell_params(axes: &[ParamAxis], mut index: usize) -> Vec<(String, f64)> {
    let mut out = vec![(String::new(), 0.0); axes.len()];
    for (slot, axis) in out.iter_mut().zip(axes).rev() {
        let n = axis.values.len();
        *slot = (axis.name.clone(), axis.values[index % n]);
        index /= n;
    }
    out
}

fn analyse(family: &Family, params: &[(String, f64)], analysis: &CellAnalysis) -> Result<(Option<OperatorClass>, Option<usize>)> {
    let mut fam = family.clone();
    for (name, value) in params {
        fam.set(name, *value)?;
    }
    let f = fam.nonlinearity();
    match analysis {
        CellAnalysis::Classify { x_range } => Ok((Some(classify_operator(&f, *x_range)?.class), None)),
        CellAnalysis::Count {
            rhs,
            x_lo,
            x_hi,
            scan_n,
            step,
            options,
        } => {
            let c = count_solutions(&f, rhs, *x_lo, *x_hi, *scan_n, *step, options)?;
            match c.count {
                Some(n) => Ok((None, Some(n))),
                None => Err(Error::InternalConsistency("degenerate continuum of fixed points".into())),
            }
        }
    }
}

/// Row-major sweep over the cartesian product of `axes` (last axis fastest).
/// Cells already present in `done` with identical parameters are reused;
/// `on_cell` sees every freshly computed cell.
pub fn sweep(
    family: &Family,
    axes: &[ParamAxis],
    analysis: &CellAnalysis,
    done: &[SweepCell],
    on_cell: &(dyn Fn(&SweepCell) + Sync),
) -> Result<SweepTable> {
    for axis in axes {
        if family.get(&axis.name).is_none() {
            return Err(Error::InvalidInput(format!("family has no parameter named {:?}", axis.name)));
        }
        if axis.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("axis {:?} has non-finite values", axis.name)));
        }
    }
    if axes.is_empty() || axes.iter().any(|a| a.values.is_empty()) {
        return Ok(SweepTable::default());
    }
    let total: usize = axes.iter().map(|a| a.values.len()).product();
    let cells = (0..total)
        .into_par_iter()
        .map(|index| {
            let params = cell_params(axes, index);
            if let Some(prev) = done.iter().find(|c| c.index == index && c.params == params) {
                return prev.clone();
            }
            let cell = match analyse(family, &params, analysis) {
                Ok((class, count)) => SweepCell {
                    index,
                    params,
                    class,
                    count,
                    error: None,
                },
                Err(e) => SweepCell {
                    index,
                    params,
                    class: None,
                    count: None,
                    error: Some(e.to_string()),
                },
            };
            on_cell(&cell);
            cell
        })
        .collect();
    Ok(SweepTable { cells })
}
