use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::PeriodicFn;
use crate::nonlinearity::Nonlinearity;
use crate::odeint::{Integrator, ReturnValue};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CensusOptions {
    /// Bisection stops below this bracket width.
    pub root_width: f64,
    pub dedup: f64,
    /// Largest accepted `|rho(x*) - x*|`.
    pub closure_tol: f64,
    /// `|g| <= zero_tol (1 + |x|)` at every finite scan point flags a continuum of fixed points.
    pub zero_tol: f64,
    pub verify_halving: bool,
}

impl Default for CensusOptions {
    fn default() -> Self {
        Self {
            root_width: 1e-12,
            dedup: 1e-9,
            closure_tol: 1e-9,
            zero_tol: 1e-14,
            verify_halving: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub x: f64,
    /// `rho_v(x) - x`, absent on blow-up.
    pub g: Option<f64>,
    pub blow_up: Option<i8>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Root {
    pub x: f64,
    /// `rho_v'(x*)`.
    pub derivative: f64,
    pub bracket_width: f64,
    /// `|rho_v(x*) - x*|`.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalvingCheck {
    pub step: f64,
    pub count: Option<usize>,
    /// Largest root displacement when the counts agree.
    pub max_shift: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionCensus {
    pub rhs: PeriodicFn,
    pub x_lo: f64,
    pub x_hi: f64,
    pub step: f64,
    pub scan: Vec<ScanPoint>,
    pub roots: Vec<Root>,
    /// `None` for a degenerate continuum.
    pub count: Option<usize>,
    /// `sum sign(1 - rho'(x*))` over the roots.
    pub signed_count: Option<i64>,
    /// Brackets whose sign change comes from a blow-up boundary or fails to close.
    pub unresolved: Vec<[f64; 2]>,
    pub degenerate: bool,
    pub halving: Option<HalvingCheck>,
}

impl SolutionCensus {
    pub fn stable_under_halving(&self) -> Option<bool> {
        self.halving.as_ref().map(|h| h.count == self.count)
    }

    /// Finite `(x, rho(x) - x)` rows of the scan.
    pub fn curve(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.scan.iter().filter_map(|p| p.g.map(|g| (p.x, g)))
    }
}

/// Sign of `g` with blow-ups counted as infinite values.
fn side(p: &ScanPoint) -> i8 {
    match (p.g, p.blow_up) {
        (Some(g), _) if g > 0.0 => 1,
        (Some(g), _) if g < 0.0 => -1,
        (Some(_), _) => 0,
        (None, Some(s)) => s,
        (None, None) => 0,
    }
}

struct Pass {
    scan: Vec<ScanPoint>,
    roots: Vec<Root>,
    unresolved: Vec<[f64; 2]>,
    degenerate: bool,
    step: f64,
}

fn probe(int: &Integrator, x: f64) -> (ScanPoint, Option<f64>) {
    let e = int.flow(x, 0.0);
    match e.outcome {
        ReturnValue::Value { value } => (
            ScanPoint {
                x,
                g: Some(value - x),
                blow_up: None,
            },
            e.derivative,
        ),
        ReturnValue::BlowUp { sign, .. } => (
            ScanPoint {
                x,
                g: None,
                blow_up: Some(sign),
            },
            None,
        ),
    }
}

fn refine(int: &Integrator, a: ScanPoint, b: ScanPoint, opts: &CensusOptions) -> Option<Root> {
    let (mut lo, mut hi) = (a, b);
    let sa = side(&lo);
    while hi.x - lo.x > opts.root_width {
        let mid = 0.5 * (lo.x + hi.x);
        if mid <= lo.x || mid >= hi.x {
            break;
        }
        let (p, _) = probe(int, mid);
        match side(&p) {
            0 => {
                lo = p;
                hi = p;
                break;
            }
            s if s == sa => lo = p,
            _ => hi = p,
        }
    }
    let width = hi.x - lo.x;
    let best = [lo, hi]
        .into_iter()
        .filter(|p| p.g.is_some())
        .min_by(|p, q| p.g.unwrap().abs().total_cmp(&q.g.unwrap().abs()))?;
    let (p, d) = probe(int, best.x);
    let residual = p.g?.abs();
    if residual > opts.closure_tol {
        return None;
    }
    Some(Root {
        x: best.x,
        derivative: d?,
        bracket_width: width,
        residual,
    })
}

fn census_pass(
    f: &Nonlinearity,
    v: &PeriodicFn,
    x_lo: f64,
    x_hi: f64,
    scan_n: usize,
    h: f64,
    opts: &CensusOptions,
) -> Result<Pass> {
    let int = Integrator::period(f, v, h)?;
    let scan: Vec<ScanPoint> = (0..scan_n)
        .into_par_iter()
        .map(|i| {
            let x = x_lo + (x_hi - x_lo) * i as f64 / (scan_n - 1) as f64;
            probe(&int, x).0
        })
        .collect();
    let finite: Vec<&ScanPoint> = scan.iter().filter(|p| p.g.is_some()).collect();
    let degenerate = !finite.is_empty()
        && finite
            .iter()
            .all(|p| p.g.unwrap().abs() <= opts.zero_tol * (1.0 + p.x.abs()));
    if degenerate {
        return Ok(Pass {
            scan,
            roots: Vec::new(),
            unresolved: Vec::new(),
            degenerate,
            step: int.step(),
        });
    }
    enum Task {
        Exact(usize),
        Bracket(usize),
    }
    let mut tasks = Vec::new();
    for i in 0..scan.len() {
        if scan[i].g == Some(0.0) {
            tasks.push(Task::Exact(i));
        } else if i + 1 < scan.len() {
            let (a, b) = (side(&scan[i]), side(&scan[i + 1]));
            if a != 0 && b != 0 && a != b {
                tasks.push(Task::Bracket(i));
            }
        }
    }
    let found: Vec<std::result::Result<Root, [f64; 2]>> = tasks
        .par_iter()
        .map(|t| match *t {
            Task::Exact(i) => {
                let (p, d) = probe(&int, scan[i].x);
                d.map(|d| Root {
                    x: p.x,
                    derivative: d,
                    bracket_width: 0.0,
                    residual: 0.0,
                })
                .ok_or([scan[i].x, scan[i].x])
            }
            Task::Bracket(i) => {
                let (a, b) = (scan[i], scan[i + 1]);
                let straddles = a.g.is_none() || b.g.is_none();
                match refine(&int, a, b, opts) {
                    Some(r) if !straddles || r.residual <= opts.closure_tol => Ok(r),
                    _ => Err([a.x, b.x]),
                }
            }
        })
        .collect();
    let mut roots: Vec<Root> = Vec::new();
    let mut unresolved = Vec::new();
    for r in found {
        match r {
            Ok(r) => {
                if roots.iter().all(|q| (q.x - r.x).abs() > opts.dedup) {
                    roots.push(r);
                }
            }
            Err(b) => unresolved.push(b),
        }
    }
    roots.sort_by(|a, b| a.x.total_cmp(&b.x));
    Ok(Pass {
        scan,
        roots,
        unresolved,
        degenerate,
        step: int.step(),
    })
}

/// Scans `g(x) = rho_v(x) - x` over `[x_lo, x_hi]`, brackets sign changes
/// and refines each by bisection; optionally repeats at step `h/2`.
pub fn count_solutions(
    f: &Nonlinearity,
    v: &PeriodicFn,
    x_lo: f64,
    x_hi: f64,
    scan_n: usize,
    h: f64,
    opts: &CensusOptions,
) -> Result<SolutionCensus> {
    if !(x_lo < x_hi) || !x_lo.is_finite() || !x_hi.is_finite() {
        return Err(Error::InvalidInput(format!("bad scan range [{x_lo}, {x_hi}]")));
    }
    if scan_n < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 scan points, got {scan_n}")));
    }
    if !(h > 0.0 && h <= 1.0) {
        return Err(Error::InvalidInput(format!("step must lie in (0, 1], got {h}")));
    }
    let pass = census_pass(f, v, x_lo, x_hi, scan_n, h, opts)?;
    let count = (!pass.degenerate).then_some(pass.roots.len());
    let signed_count = count.map(|_| {
        pass.roots
            .iter()
            .map(|r| {
                let s = 1.0 - r.derivative;
                if s > 0.0 {
                    1
                } else if s < 0.0 {
                    -1
                } else {
                    0
                }
            })
            .sum()
    });
    let halving = if opts.verify_halving {
        let half = census_pass(f, v, x_lo, x_hi, scan_n, 0.5 * pass.step, opts)?;
        let hcount = (!half.degenerate).then_some(half.roots.len());
        let max_shift = (hcount == count && !half.roots.is_empty()).then(|| {
            half.roots
                .iter()
                .zip(&pass.roots)
                .fold(0.0f64, |m, (a, b)| m.max((a.x - b.x).abs()))
        });
        Some(HalvingCheck {
            step: half.step,
            count: hcount,
            max_shift,
        })
    } else {
        None
    };
    Ok(SolutionCensus {
        rhs: v.clone(),
        x_lo,
        x_hi,
        step: pass.step,
        scan: pass.scan,
        roots: pass.roots,
        count,
        signed_count,
        unresolved: pass.unresolved,
        degenerate: pass.degenerate,
        halving,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    #[test]
    fn identity_map_is_degenerate() {
        let f = Nonlinearity::polynomial(&[0.0]);
        let v = Grid::new(64).unwrap().constant(0.0);
        let c = count_solutions(&f, &v, -1.0, 1.0, 21, 1e-2, &CensusOptions::default()).unwrap();
        assert!(c.degenerate);
        assert_eq!(c.count, None);
    }

    #[test]
    fn riccati_with_unit_forcing_has_two_orbits() {
        let f = Nonlinearity::polynomial(&[0.0, 0.0, 1.0]);
        let v = Grid::new(64).unwrap().constant(1.0);
        let c = count_solutions(&f, &v, -3.0, 3.0, 121, 1e-3, &CensusOptions::default()).unwrap();
        assert_eq!(c.count, Some(2), "{:?}", c.roots);
        assert!((c.roots[0].x + 1.0).abs() < 1e-9);
        assert!((c.roots[1].x - 1.0).abs() < 1e-9);
        // stable at +1, unstable at -1
        assert!(c.roots[0].derivative > 1.0 && c.roots[1].derivative < 1.0);
        assert_eq!(c.signed_count, Some(0));
        assert_eq!(c.stable_under_halving(), Some(true));
    }

    #[test]
    fn bad_inputs() {
        let f = Nonlinearity::polynomial(&[0.0, 1.0]);
        let v = Grid::new(64).unwrap().constant(0.0);
        let o = CensusOptions::default();
        assert!(count_solutions(&f, &v, 1.0, -1.0, 11, 1e-2, &o).is_err());
        assert!(count_solutions(&f, &v, -1.0, 1.0, 1, 1e-2, &o).is_err());
        assert!(count_solutions(&f, &v, -1.0, 1.0, 11, 0.0, &o).is_err());
    }
}
