//! Periodic solutions of `u' + f(t, u) = vtilde + nu` along a fibre, fibre
//! traces and the tangent field `W`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::PeriodicFn;
use crate::morin::eigen_from_linearization;
use crate::nonlinearity::Nonlinearity;
use crate::odeint::{Integrator, ReturnValue};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FibrePoint {
    pub u: PeriodicFn,
    pub nu: f64,
    pub vtilde: PeriodicFn,
    /// `int f(t, u(t)) dt`, which equals `nu` for a periodic solution.
    pub phi_bar: f64,
    /// `sup |u' + f(t,u) - vtilde - nu|`.
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Constraint {
    InitialValue(f64),
    Average(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FibreOptions {
    /// RK4 steps per grid interval.
    pub substeps: usize,
    pub tol_per: f64,
    pub tol_avg: f64,
    pub max_expansions: usize,
}

impl Default for FibreOptions {
    fn default() -> Self {
        Self {
            substeps: 4,
            tol_per: 1e-11,
            tol_avg: 1e-12,
            max_expansions: 60,
        }
    }
}

struct Shooter<'a> {
    integ: Integrator<'a>,
    vtilde: &'a PeriodicFn,
    substeps: usize,
}

impl<'a> Shooter<'a> {
    fn new(f: &'a Nonlinearity, vtilde: &'a PeriodicFn, opts: &FibreOptions) -> Result<Self> {
        let n = vtilde.grid().len();
        let substeps = opts.substeps.max(1);
        let integ = Integrator::period(f, vtilde, 1.0 / (n * substeps) as f64)?;
        Ok(Self {
            integ,
            vtilde,
            substeps,
        })
    }

    /// `+1` when `nu` lies in `A+`, `-1` in `A-`, with the end value when finite.
    fn side(&self, c: f64, nu: f64) -> (i8, Option<f64>) {
        match self.integ.flow(c, nu).outcome {
            ReturnValue::BlowUp { sign, .. } => (sign, None),
            ReturnValue::Value { value } => (if value >= c { 1 } else { -1 }, Some(value)),
        }
    }

    fn solve_initial(&self, c: f64, opts: &FibreOptions) -> Result<FibrePoint> {
        let f = self.integ.nonlinearity();
        let grid = self.vtilde.grid();
        let box_r = 1.0 + c.abs();
        let mut r = 1.0 + c.abs() + self.vtilde.sup_norm() + f.sup_abs_on_box(c - box_r, c + box_r, grid);
        let mut bracket = None;
        for _ in 0..=opts.max_expansions {
            if self.side(c, r).0 > 0 && self.side(c, -r).0 < 0 {
                bracket = Some((-r, r));
                break;
            }
            r *= 2.0;
        }
        let (mut lo, mut hi) = bracket.ok_or(Error::TamenessViolation { radius: r })?;
        // bisect well past tol_per: the closure defect feeds the derivative of the samples
        let target = 1e-14 * (1.0 + c.abs());
        let mut nu = 0.5 * (lo + hi);
        let mut closure = f64::INFINITY;
        for _ in 0..400 {
            nu = 0.5 * (lo + hi);
            let (s, end) = self.side(c, nu);
            if let Some(e) = end {
                closure = (e - c).abs();
                if closure <= target {
                    break;
                }
            }
            if nu <= lo || nu >= hi {
                break;
            }
            if s > 0 {
                hi = nu;
            } else {
                lo = nu;
            }
        }
        if closure > opts.tol_per {
            return Err(Error::NoConvergence(format!(
                "periodic solution through {c}: closure defect {closure:e}"
            )));
        }
        let tr = self.integ.trajectory(c, nu);
        if tr.samples.len() != self.integ.steps() + 1 {
            return Err(Error::InternalConsistency(format!(
                "periodic solution through {c} blew up on re-integration"
            )));
        }
        let vals: Vec<f64> = tr
            .samples
            .iter()
            .step_by(self.substeps)
            .take(grid.len())
            .copied()
            .collect();
        let u = PeriodicFn::from_values(grid, vals)?;
        Ok(finish(f, u, nu, self.vtilde.clone()))
    }
}

fn finish(f: &Nonlinearity, u: PeriodicFn, nu: f64, vtilde: PeriodicFn) -> FibrePoint {
    let fu = f.apply_operator(&u);
    let residual = fu
        .values()
        .iter()
        .zip(vtilde.values())
        .fold(0.0f64, |m, (a, v)| m.max((a - v - nu).abs()));
    let phi_bar = f.phi(&u);
    FibrePoint {
        u,
        nu,
        vtilde,
        phi_bar,
        residual,
    }
}

fn check_mean_free(vtilde: &PeriodicFn) -> Result<()> {
    let m = vtilde.mean();
    if m.abs() > 1e-9 * (1.0 + vtilde.sup_norm()) {
        return Err(Error::InvalidInput(format!("vtilde must have zero mean, got {m:e}")));
    }
    Ok(())
}

/// The periodic solution on the fibre over `vtilde` selected by `constraint`.
pub fn solve_periodic(
    f: &Nonlinearity,
    vtilde: &PeriodicFn,
    constraint: Constraint,
    opts: &FibreOptions,
) -> Result<FibrePoint> {
    check_mean_free(vtilde)?;
    let shooter = Shooter::new(f, vtilde, opts)?;
    match constraint {
        Constraint::InitialValue(c) => shooter.solve_initial(c, opts),
        Constraint::Average(a) => solve_average(&shooter, a, opts),
    }
}

fn solve_average(sh: &Shooter, a: f64, opts: &FibreOptions) -> Result<FibrePoint> {
    let eval = |c: f64| -> Result<(f64, FibrePoint)> {
        let p = sh.solve_initial(c, opts)?;
        Ok((p.u.mean() - a, p))
    };
    // u(0) - mean(u) is bounded by the oscillation of the solution, so start there
    let (g0, p0) = eval(a)?;
    if g0.abs() <= opts.tol_avg {
        return Ok(p0);
    }
    let mut width = 1.0 + sh.vtilde.sup_norm();
    let (mut lo, mut glo, mut hi, mut ghi);
    let mut found = false;
    let (mut l, mut gl, mut h, mut gh) = (a, g0, a, g0);
    for _ in 0..opts.max_expansions {
        if g0 > 0.0 {
            let c = a - width;
            let (g, _) = eval(c)?;
            if g > gh {
                return Err(non_monotone(c, h));
            }
            l = c;
            gl = g;
            if g <= 0.0 {
                found = true;
                break;
            }
            h = c;
            gh = g;
        } else {
            let c = a + width;
            let (g, _) = eval(c)?;
            if g < gl {
                return Err(non_monotone(l, c));
            }
            h = c;
            gh = g;
            if g >= 0.0 {
                found = true;
                break;
            }
            l = c;
            gl = g;
        }
        width *= 2.0;
    }
    if !found {
        return Err(Error::BracketFailure(format!("average {a} not reached")));
    }
    (lo, glo, hi, ghi) = (l, gl, h, gh);
    // Illinois weights act on (wlo, whi); monotonicity is checked on the true values
    let (mut wlo, mut whi) = (glo, ghi);
    let slack = opts.tol_avg + 10.0 * opts.tol_per;
    let mut side = 0i8;
    let mut best: Option<(f64, FibrePoint)> = None;
    for _ in 0..200 {
        let c = if whi != wlo {
            (lo * whi - hi * wlo) / (whi - wlo)
        } else {
            0.5 * (lo + hi)
        };
        let c = if c > lo && c < hi { c } else { 0.5 * (lo + hi) };
        let (g, p) = eval(c)?;
        if g.abs() <= opts.tol_avg || hi - lo <= 1e-15 * (1.0 + c.abs()) {
            return Ok(p);
        }
        if best.as_ref().map_or(true, |(bg, _)| g.abs() < bg.abs()) {
            best = Some((g, p));
        }
        if g > 0.0 {
            if g > ghi + slack {
                return Err(non_monotone(c, hi));
            }
            hi = c;
            ghi = g;
            whi = g;
            if side == 1 {
                wlo *= 0.5;
            }
            side = 1;
        } else {
            if g < glo - slack {
                return Err(non_monotone(lo, c));
            }
            lo = c;
            glo = g;
            wlo = g;
            if side == -1 {
                whi *= 0.5;
            }
            side = -1;
        }
    }
    best.map(|(_, p)| p)
        .ok_or_else(|| Error::NoConvergence(format!("average {a}")))
}

fn non_monotone(a: f64, b: f64) -> Error {
    Error::InternalConsistency(format!(
        "mean of the periodic solution is not increasing in u(0) between {a} and {b}"
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub average: f64,
    pub phi: f64,
    pub u0: f64,
    pub residual: f64,
}

/// `Phi` restricted to the fibre over `vtilde`, sampled at `count` averages.
pub fn fibre_trace(
    f: &Nonlinearity,
    vtilde: &PeriodicFn,
    a_lo: f64,
    a_hi: f64,
    count: usize,
    opts: &FibreOptions,
) -> Result<Vec<TracePoint>> {
    if !(a_lo < a_hi) {
        return Err(Error::InvalidInput(format!("need a_lo < a_hi, got {a_lo} and {a_hi}")));
    }
    check_mean_free(vtilde)?;
    let count = count.max(2);
    (0..count)
        .into_par_iter()
        .map(|i| {
            let a = a_lo + (a_hi - a_lo) * i as f64 / (count - 1) as f64;
            let p = solve_periodic(f, vtilde, Constraint::Average(a), opts)?;
            Ok(TracePoint {
                average: a,
                phi: p.phi_bar,
                u0: p.u.values()[0],
                residual: p.residual,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WField {
    pub omega: PeriodicFn,
    pub alpha: f64,
    pub residual: f64,
}

/// Periodic `omega` of average `m` with `omega' + D2f(t,u) omega = alpha`.
pub fn solve_w(f: &Nonlinearity, u: &PeriodicFn, m: f64) -> WField {
    let g = f.compose(u, 1);
    let eig = eigen_from_linearization(&g);
    let lambda = eig.lambda;
    let w = &eig.w;
    // omega = w z with z' + lambda z = alpha / w; z = alpha (r0 / lambda + zosc)
    let r = w.map(|x| 1.0 / x);
    let r0 = r.mean();
    let zosc = r.shifted_antiderivative(lambda);
    let w_mean = w.mean();
    let wz_mean = w.zip_with(&zosc, |a, b| a * b).mean();
    let denom = r0 * w_mean + lambda * wz_mean;
    let mut alpha = m * lambda / denom;
    let gsup = g.sup_norm();
    let omega = if lambda.abs() <= 1e-10 && alpha.abs() <= 1e-8 * gsup.max(f64::MIN_POSITIVE) {
        alpha = 0.0;
        w.scale(m / w_mean)
    } else {
        let shape = zosc.map(|z| r0 + lambda * z);
        w.zip_with(&shape, |a, b| a * b).scale(m / denom)
    };
    let dw = omega.derivative();
    let residual = dw
        .values()
        .iter()
        .zip(g.values())
        .zip(omega.values())
        .fold(0.0f64, |acc, ((d, g), o)| acc.max((d + g * o - alpha).abs()));
    WField {
        omega,
        alpha,
        residual,
    }
}
