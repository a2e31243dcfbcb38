//! Time reparametrizations between `F` and the simplified operator
//! `u -> u' + int f(u)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{PeriodicFn, TrigInterpolant};
use crate::morin::eigen_w;
use crate::nonlinearity::Nonlinearity;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "function", rename_all = "snake_case")]
pub enum Direction {
    ToSimplified(PeriodicFn),
    FromSimplified(PeriodicFn),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reparametrization {
    pub function: PeriodicFn,
    /// The circle diffeomorphism at the nodes `t_0..t_{n-1}` and at `t = 1`:
    /// `beta` for `ToSimplified`, `alpha` for `FromSimplified`.
    pub time_change: Vec<f64>,
    /// The constant `A` of the `alpha` equation.
    pub constant: Option<f64>,
}

/// A monotone circle map `slope * t + P(t) + quad * (t^2 - t)` with periodic `P`, `P(0) = 0`.
struct CircleMap {
    slope: f64,
    quad: f64,
    periodic: TrigInterpolant,
    derivative: Box<dyn Fn(f64) -> f64>,
}

impl CircleMap {
    fn eval(&self, t: f64) -> f64 {
        self.slope * t + self.periodic.eval(t) + self.quad * (t * t - t)
    }

    /// Solves `map(s) = y` for `y` in `[0, 1]`.
    fn invert(&self, y: f64, guess: f64) -> Result<f64> {
        let mut s = guess;
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..100 {
            let r = self.eval(s) - y;
            if r.abs() <= 1e-15 {
                return Ok(s);
            }
            if r > 0.0 {
                hi = hi.min(s);
            } else {
                lo = lo.max(s);
            }
            let d = (self.derivative)(s);
            let mut next = s - r / d;
            if !(next > lo && next < hi) || !d.is_finite() || d <= 0.0 {
                next = 0.5 * (lo + hi);
            }
            if (next - s).abs() <= 1e-16 {
                return Ok(next);
            }
            s = next;
        }
        let r = self.eval(s) - y;
        if r.abs() <= 1e-12 {
            Ok(s)
        } else {
            Err(Error::NoConvergence(format!("inverting time change at {y}")))
        }
    }

    fn inverse_on_nodes(&self, n: usize, samples: &[f64]) -> Result<Vec<f64>> {
        // samples: map values at the nodes and at t = 1, increasing
        let mut out = Vec::with_capacity(n);
        let mut j = 0;
        for i in 0..n {
            let y = i as f64 / n as f64;
            while j + 1 < samples.len() - 1 && samples[j + 1] <= y {
                j += 1;
            }
            let (a, b) = (samples[j], samples[j + 1]);
            let frac = if b > a { (y - a) / (b - a) } else { 0.0 };
            let guess = (j as f64 + frac) / n as f64;
            out.push(if i == 0 { 0.0 } else { self.invert(y, guess)? });
        }
        Ok(out)
    }
}

fn compose(v: &PeriodicFn, times: &[f64]) -> PeriodicFn {
    let interp = v.interpolant();
    let vals: Vec<f64> = times.iter().map(|&t| interp.eval(t)).collect();
    PeriodicFn::from_values(v.grid(), vals).expect("finite interpolated values")
}

/// `beta(s) = int_0^s w / int w` and `v = u o beta^{-1}`, or the inverse
/// construction through `alpha' = 1/(A - int_0^t f'(v))`, `alpha(1) = 1`, `u = v o alpha^{-1}`.
pub fn reparam(f: &Nonlinearity, direction: &Direction) -> Result<Reparametrization> {
    if !f.is_autonomous() {
        return Err(Error::NotAutonomous);
    }
    match direction {
        Direction::ToSimplified(u) => to_simplified(f, u),
        Direction::FromSimplified(v) => from_simplified(f, v),
    }
}

fn to_simplified(f: &Nonlinearity, u: &PeriodicFn) -> Result<Reparametrization> {
    let w = eigen_w(f, u).w;
    let total = w.mean();
    let rate = w.scale(1.0 / total);
    let cum = rate.cumulative();
    let rate_i = rate.interpolant();
    let beta = CircleMap {
        slope: cum.slope(),
        quad: 0.0,
        periodic: cum.periodic_part().interpolant(),
        derivative: Box::new(move |s| rate_i.eval(s)),
    };
    let samples = cum.values();
    let n = u.grid().len();
    let inv = beta.inverse_on_nodes(n, &samples)?;
    Ok(Reparametrization {
        function: compose(u, &inv),
        time_change: samples,
        constant: None,
    })
}

fn from_simplified(f: &Nonlinearity, v: &PeriodicFn) -> Result<Reparametrization> {
    let grid = v.grid();
    let n = grid.len();
    let h = f.compose(v, 1).cumulative();
    let h_interp = h.periodic_part().interpolant();
    let h_slope = h.slope();
    let h_at = move |t: f64| h_slope * t + h_interp.eval(t);
    // sup of h over a refined sample
    let fine = 8 * n;
    let hmax = (0..=fine)
        .map(|i| h_at(i as f64 / fine as f64))
        .fold(f64::NEG_INFINITY, f64::max);
    let h_nodes: Vec<f64> = h.values();

    let alpha_one = |a: f64| -> f64 { integrate_rate(&h_nodes, a) };
    let mut hi = hmax + 2.0;
    let mut lo_gap = 1.0;
    let mut lo = None;
    for _ in 0..80 {
        let a = hmax + lo_gap;
        if alpha_one(a) > 1.0 {
            lo = Some(a);
            break;
        }
        hi = a;
        lo_gap *= 0.5;
    }
    let mut lo = lo.ok_or_else(|| Error::BracketFailure("alpha(1) stays below 1 as A approaches sup h".into()))?;
    if alpha_one(hi) >= 1.0 {
        return Err(Error::BracketFailure("alpha(1) stays above 1".into()));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if alpha_one(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let a = 0.5 * (lo + hi);
    let rate = PeriodicFn::from_values(grid, h_nodes[..n].iter().map(|x| 1.0 / (a - x)).collect())?;
    let end_rate = 1.0 / (a - h_nodes[n]);
    let (slope, quad, periodic) = cumulative_nonperiodic(&rate, end_rate);
    let samples: Vec<f64> = (0..n)
        .map(|i| {
            let t = grid.node(i);
            slope * t + periodic.values()[i] + quad * (t * t - t)
        })
        .chain(std::iter::once(1.0))
        .collect();
    let map = CircleMap {
        slope,
        quad,
        periodic: periodic.interpolant(),
        derivative: Box::new(move |t| 1.0 / (a - h_at(t))),
    };
    let inv = map.inverse_on_nodes(n, &samples)?;
    Ok(Reparametrization {
        function: compose(v, &inv),
        time_change: samples,
        constant: Some(a),
    })
}

/// `int_0^1 dt / (A - h(t))` from node values of `h` including `t = 1`.
fn integrate_rate(h_nodes: &[f64], a: f64) -> f64 {
    let n = h_nodes.len() - 1;
    let jump = 1.0 / (a - h_nodes[n]) - 1.0 / (a - h_nodes[0]);
    // periodic trapezoid of g - jump t, plus the exact linear part
    let s: f64 = h_nodes[..n]
        .iter()
        .enumerate()
        .map(|(i, x)| 1.0 / (a - x) - jump * i as f64 / n as f64)
        .sum();
    s / n as f64 + 0.5 * jump
}

/// `int_0^t g = slope t + P(t) + quad (t^2 - t)` for a node-sampled `g`
/// whose endpoint value `g(1)` may differ from `g(0)`.
fn cumulative_nonperiodic(g: &PeriodicFn, g_end: f64) -> (f64, f64, PeriodicFn) {
    let grid = g.grid();
    let jump = g_end - g.values()[0];
    let corrected = PeriodicFn::from_values(
        grid,
        g.values()
            .iter()
            .enumerate()
            .map(|(i, x)| x - jump * grid.node(i))
            .collect(),
    )
    .expect("finite rate");
    let c = corrected.cumulative();
    (c.slope() + 0.5 * jump, 0.5 * jump, c.periodic_part().clone())
}
