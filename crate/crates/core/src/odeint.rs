//! Fixed-step RK4 for `u' = -f(t, u) + v(t)`, the time-one return map and
//! its contact order with the identity at fixed points.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::PeriodicFn;
use crate::nonlinearity::{Nonlinearity, Slice};

/// Solutions with `|u| > U_MAX` are declared blown up.
pub const U_MAX: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum TerminalStatus {
    Completed,
    BlewUp { sign: i8, time: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub start: f64,
    pub end: f64,
    pub step: f64,
    /// `u(start + i * step)` up to completion or blow-up.
    pub samples: Vec<f64>,
    pub status: TerminalStatus,
}

impl Trajectory {
    pub fn last(&self) -> f64 {
        *self.samples.last().expect("trajectory has the initial sample")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReturnValue {
    Value { value: f64 },
    BlowUp { sign: i8, time: f64 },
}

impl ReturnValue {
    pub fn value(&self) -> Option<f64> {
        match *self {
            ReturnValue::Value { value } => Some(value),
            ReturnValue::BlowUp { .. } => None,
        }
    }
}

/// Return-map value together with `rho'` from the variational equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReturnEval {
    pub outcome: ReturnValue,
    pub derivative: Option<f64>,
}

enum Slices {
    Autonomous(Slice),
    Timed(Vec<Slice>),
}

/// RK4 stepper with `f` slices and the forcing precomputed at every half step.
pub struct Integrator<'a> {
    f: &'a Nonlinearity,
    start: f64,
    step: f64,
    steps: usize,
    forcing: Vec<f64>,
    slices: Slices,
}

struct RunOutput {
    end: f64,
    derivative: f64,
    status: TerminalStatus,
}

impl<'a> Integrator<'a> {
    /// Prepares integration over `[t0, t1]`; the step is shrunk so that it
    /// divides the interval.
    pub fn new(f: &'a Nonlinearity, v: &PeriodicFn, t0: f64, t1: f64, h: f64) -> Result<Self> {
        if !(t1 > t0) || !(h > 0.0) {
            return Err(Error::InvalidInput(format!(
                "need t0 < t1 and h > 0, got [{t0}, {t1}] with h = {h}"
            )));
        }
        let steps = ((t1 - t0) / h - 1e-9).ceil().max(1.0) as usize;
        let step = (t1 - t0) / steps as f64;
        let interp = v.interpolant();
        let times: Vec<f64> = (0..=2 * steps)
            .map(|k| t0 + k as f64 * 0.5 * step)
            .collect();
        let forcing = times.par_iter().map(|&t| interp.eval(t)).collect();
        let slices = if f.is_autonomous() {
            Slices::Autonomous(f.at_time(0.0))
        } else {
            Slices::Timed(times.iter().map(|&t| f.at_time(t)).collect())
        };
        Ok(Self {
            f,
            start: t0,
            step,
            steps,
            forcing,
            slices,
        })
    }

    /// Integrator for the return map over one period.
    pub fn period(f: &'a Nonlinearity, v: &PeriodicFn, h: f64) -> Result<Self> {
        Self::new(f, v, 0.0, 1.0, h)
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn nonlinearity(&self) -> &Nonlinearity {
        self.f
    }

    fn slice(&self, k: usize) -> &Slice {
        match &self.slices {
            Slices::Autonomous(s) => s,
            Slices::Timed(v) => &v[k],
        }
    }

    #[inline]
    fn rhs(&self, k: usize, x: f64, shift: f64) -> f64 {
        -self.slice(k).value(x) + self.forcing[k] + shift
    }

    #[inline]
    fn lin(&self, k: usize, x: f64) -> f64 {
        -self.slice(k).first_derivative(x)
    }

    fn run(&self, x0: f64, shift: f64, mut store: Option<&mut Vec<f64>>) -> RunOutput {
        let h = self.step;
        let mut x = x0;
        let mut comp = 0.0;
        let mut y = 1.0;
        if let Some(s) = store.as_deref_mut() {
            s.push(x0);
        }
        for i in 0..self.steps {
            let k0 = 2 * i;
            let k1 = self.rhs(k0, x, shift);
            let x2 = x + 0.5 * h * k1;
            let k2 = self.rhs(k0 + 1, x2, shift);
            let x3 = x + 0.5 * h * k2;
            let k3 = self.rhs(k0 + 1, x3, shift);
            let x4 = x + h * k3;
            let k4 = self.rhs(k0 + 2, x4, shift);

            // variational equation with the same stages
            let y1 = self.lin(k0, x) * y;
            let y2 = self.lin(k0 + 1, x2) * (y + 0.5 * h * y1);
            let y3 = self.lin(k0 + 1, x3) * (y + 0.5 * h * y2);
            let y4 = self.lin(k0 + 2, x4) * (y + h * y3);
            let y_next = y + h / 6.0 * (y1 + 2.0 * y2 + 2.0 * y3 + y4);

            let incr = h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4) - comp;
            let next = x + incr;
            let t_next = self.start + (i + 1) as f64 * h;
            if !next.is_finite() {
                return RunOutput {
                    end: x,
                    derivative: f64::NAN,
                    status: TerminalStatus::BlewUp {
                        sign: sign_of(x),
                        time: t_next,
                    },
                };
            }
            if next.abs() > U_MAX {
                // first crossing of |u| = U_MAX by linear interpolation
                let frac = ((U_MAX - x.abs()) / (next.abs() - x.abs())).clamp(0.0, 1.0);
                return RunOutput {
                    end: x,
                    derivative: f64::NAN,
                    status: TerminalStatus::BlewUp {
                        sign: sign_of(next),
                        time: t_next - h + frac * h,
                    },
                };
            }
            comp = (next - x) - incr;
            x = next;
            y = y_next;
            if let Some(s) = store.as_deref_mut() {
                s.push(x);
            }
        }
        RunOutput {
            end: x,
            derivative: y,
            status: TerminalStatus::Completed,
        }
    }

    pub fn trajectory(&self, x0: f64, shift: f64) -> Trajectory {
        let mut samples = Vec::with_capacity(self.steps + 1);
        let out = self.run(x0, shift, Some(&mut samples));
        Trajectory {
            start: self.start,
            end: self.start + self.steps as f64 * self.step,
            step: self.step,
            samples,
            status: out.status,
        }
    }

    /// End value (or blow-up) and the derivative of the flow map in `x0`.
    pub fn flow(&self, x0: f64, shift: f64) -> ReturnEval {
        let out = self.run(x0, shift, None);
        match out.status {
            TerminalStatus::Completed => ReturnEval {
                outcome: ReturnValue::Value { value: out.end },
                derivative: Some(out.derivative),
            },
            TerminalStatus::BlewUp { sign, time } => ReturnEval {
                outcome: ReturnValue::BlowUp { sign, time },
                derivative: None,
            },
        }
    }
}

fn sign_of(x: f64) -> i8 {
    if x < 0.0 {
        -1
    } else {
        1
    }
}

/// RK4 trajectory of `u' = -f(t, u) + v(t)` from `u(t0) = x0`.
pub fn integrate(
    f: &Nonlinearity,
    v: &PeriodicFn,
    x0: f64,
    t0: f64,
    t1: f64,
    h: f64,
) -> Result<Trajectory> {
    Ok(Integrator::new(f, v, t0, t1, h)?.trajectory(x0, 0.0))
}

/// `rho_v(x0) = u(1)` with `rho_v'(x0)`.
pub fn return_map(f: &Nonlinearity, v: &PeriodicFn, x0: f64, h: f64) -> Result<ReturnEval> {
    Ok(Integrator::period(f, v, h)?.flow(x0, 0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "order", rename_all = "snake_case")]
pub enum ContactOrder {
    /// Largest `k` with `rho' = 1` and `rho^(i) = 0` for `2 <= i <= k`; 0 is a regular fixed point.
    Order(usize),
    ExceedsMax,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContactReport {
    pub order: ContactOrder,
    /// `[rho' - 1, rho'', ..., rho^(kmax+1)]` at the fixed point.
    pub derivatives: Vec<f64>,
    pub fixed_point_residual: f64,
    pub stencil_step: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContactOptions {
    pub step: f64,
    pub tol_fix: f64,
    /// Spacing of the finite-difference stencil applied to `rho'`.
    pub fd_step: f64,
    pub rel_zero: f64,
}

impl Default for ContactOptions {
    fn default() -> Self {
        Self {
            step: 2e-4,
            tol_fix: 1e-9,
            fd_step: 1e-2,
            rel_zero: 1e-4,
        }
    }
}

/// Central second-order stencils for derivatives 1..=5 on offsets -3..=3 (scaled by 1/d^k).
const STENCILS: [[f64; 7]; 5] = [
    [0.0, 0.0, -0.5, 0.0, 0.5, 0.0, 0.0],
    [0.0, 0.0, 1.0, -2.0, 1.0, 0.0, 0.0],
    [0.0, -0.5, 1.0, 0.0, -1.0, 0.5, 0.0],
    [0.0, 1.0, -4.0, 6.0, -4.0, 1.0, 0.0],
    [-0.5, 2.0, -2.5, 0.0, 2.5, -2.0, 0.5],
];

/// Order of contact between `rho_v` and the identity at a fixed point `x0`.
pub fn contact_order(
    f: &Nonlinearity,
    v: &PeriodicFn,
    x0: f64,
    kmax: usize,
    opts: &ContactOptions,
) -> Result<ContactReport> {
    if kmax > 5 {
        return Err(Error::UnsupportedOrder(kmax));
    }
    let integ = Integrator::period(f, v, opts.step)?;
    let center = integ.flow(x0, 0.0);
    let (Some(x1), Some(d1)) = (center.outcome.value(), center.derivative) else {
        return Err(Error::NotFixedPoint {
            x0,
            residual: f64::INFINITY,
        });
    };
    let residual = (x1 - x0).abs();
    if residual > opts.tol_fix {
        return Err(Error::NotFixedPoint { x0, residual });
    }

    let mut derivs = vec![d1 - 1.0];
    let mut used_step = opts.fd_step;
    if kmax >= 1 {
        let mut delta = opts.fd_step;
        let mut higher = None;
        for _attempt in 0..5 {
            if let Some(d) = stencil_derivatives(&integ, x0, delta, kmax) {
                higher = Some(d);
                break;
            }
            delta *= 0.5;
        }
        let higher = higher.ok_or(Error::StencilBlowUp { x0 })?;
        used_step = delta;
        derivs.extend(higher);
    }

    let order = classify_contact(&derivs, kmax, opts.rel_zero);
    Ok(ContactReport {
        order,
        derivatives: derivs,
        fixed_point_residual: residual,
        stencil_step: used_step,
    })
}

/// `rho^(i)` for `i = 2..=kmax+1` by Richardson-extrapolated differences of `rho'`.
fn stencil_derivatives(integ: &Integrator, x0: f64, delta: f64, kmax: usize) -> Option<Vec<f64>> {
    let half = 0.5 * delta;
    let offsets: Vec<i32> = (-6..=6).collect();
    let g: Vec<Option<f64>> = offsets
        .par_iter()
        .map(|&j| integ.flow(x0 + j as f64 * half, 0.0).derivative)
        .collect();
    let g: Vec<f64> = g.into_iter().collect::<Option<Vec<f64>>>()?;
    let at = |j: i32| g[(j + 6) as usize];
    let mut out = Vec::with_capacity(kmax);
    for order in 1..=kmax {
        let w = &STENCILS[order - 1];
        let coarse: f64 = (-3..=3).map(|m| w[(m + 3) as usize] * at(2 * m)).sum::<f64>()
            / delta.powi(order as i32);
        let fine: f64 = (-3..=3).map(|m| w[(m + 3) as usize] * at(m)).sum::<f64>()
            / half.powi(order as i32);
        out.push((4.0 * fine - coarse) / 3.0);
    }
    Some(out)
}

/// `derivs[i-1]` holds `rho' - 1` for `i = 1` and `rho^(i)` above.
pub fn classify_contact(derivs: &[f64], kmax: usize, rel_zero: f64) -> ContactOrder {
    for k in 0..=kmax.min(derivs.len() - 1) {
        let lead = derivs[k].abs();
        let thresh = rel_zero * lead.max(1.0);
        if lead > thresh && derivs[..k].iter().all(|d| d.abs() <= thresh) {
            return ContactOrder::Order(k);
        }
    }
    ContactOrder::ExceedsMax
}
