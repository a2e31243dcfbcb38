//! Uniform grids on the unit circle and periodic functions sampled on them.
//!
//! Everything here is spectral: integrals are periodic trapezoid sums,
//! derivatives and antiderivatives go through the discrete Fourier transform,
//! and off-node values come from trigonometric interpolation.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_GRID_SIZE: usize = 1024;

/// Uniform grid `t_i = i / n` on the unit-period circle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Grid {
    n: usize,
}

impl Grid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 16 || !n.is_power_of_two() {
            return Err(Error::InvalidInput(format!(
                "grid size must be a power of two >= 16, got {n}"
            )));
        }
        Ok(Self { n })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn step(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        i as f64 / self.n as f64
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.node(i))
    }

    /// Samples a closure at the nodes.
    pub fn sample(&self, mut g: impl FnMut(f64) -> f64) -> PeriodicFn {
        PeriodicFn {
            grid: *self,
            values: self.nodes().map(&mut g).collect(),
        }
    }

    pub fn constant(&self, c: f64) -> PeriodicFn {
        PeriodicFn {
            grid: *self,
            values: vec![c; self.n],
        }
    }
}

impl Default for Grid {
    fn default() -> Self {
        Self {
            n: DEFAULT_GRID_SIZE,
        }
    }
}

/// The Green kernel `k(x) = x - floor(x) - 1/2` of the derivative on
/// mean-zero periodic functions.
pub fn green_kernel(x: f64) -> f64 {
    x - x.floor() - 0.5
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn forward_plan(n: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(n))
}

fn inverse_plan(n: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(n))
}

/// Signed wavenumber of FFT bin `k` on an `n`-point grid.
fn wavenumber(k: usize, n: usize) -> i64 {
    if k <= n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

/// Neumaier-compensated sum.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// A real function on the circle, sampled at the nodes of a [`Grid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicFn {
    grid: Grid,
    values: Vec<f64>,
}

impl PeriodicFn {
    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidInput(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("sample {i} is not finite")));
        }
        Ok(Self { grid, values })
    }

    pub(crate) fn from_values_unchecked(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Applies `g` pointwise.
    pub fn map(&self, g: impl Fn(f64) -> f64) -> PeriodicFn {
        Self::from_values_unchecked(self.grid, self.values.iter().map(|&v| g(v)).collect())
    }

    /// Combines two functions on the same grid pointwise.
    pub fn zip_with(&self, other: &PeriodicFn, g: impl Fn(f64, f64) -> f64) -> PeriodicFn {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        Self::from_values_unchecked(
            self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| g(a, b))
                .collect(),
        )
    }

    pub fn scale(&self, s: f64) -> PeriodicFn {
        self.map(|v| s * v)
    }

    pub fn add_constant(&self, c: f64) -> PeriodicFn {
        self.map(|v| v + c)
    }

    /// Periodic trapezoid integral over one period, which on a uniform grid
    /// is the sample average.
    pub fn mean(&self) -> f64 {
        compensated_sum(self.values.iter().copied()) / self.grid.len() as f64
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `u - mean(u)`.
    pub fn mean_free(&self) -> PeriodicFn {
        let m = self.mean();
        self.add_constant(-m)
    }

    /// Normalized DFT coefficients `c_k` with `u(t_i) = sum_k c_k e^{2 pi i k t_i}`.
    pub fn spectrum(&self) -> Vec<Complex64> {
        let n = self.grid.len();
        let mut buf: Vec<Complex64> = self
            .values
            .iter()
            .map(|&v| Complex64::new(v, 0.0))
            .collect();
        forward_plan(n).process(&mut buf);
        let inv = 1.0 / n as f64;
        buf.iter_mut().for_each(|c| *c *= inv);
        buf
    }

    fn from_spectrum(grid: Grid, mut spec: Vec<Complex64>) -> PeriodicFn {
        inverse_plan(grid.len()).process(&mut spec);
        Self::from_values_unchecked(grid, spec.into_iter().map(|c| c.re).collect())
    }

    /// Spectral derivative. The Nyquist mode is dropped.
    pub fn derivative(&self) -> PeriodicFn {
        let n = self.grid.len();
        let mut spec = self.spectrum();
        for (k, c) in spec.iter_mut().enumerate() {
            let m = wavenumber(k, n);
            if k == n / 2 {
                *c = Complex64::new(0.0, 0.0);
            } else {
                *c *= Complex64::new(0.0, 2.0 * PI * m as f64);
            }
        }
        Self::from_spectrum(self.grid, spec)
    }

    /// Mean-zero periodic antiderivative of `u - mean(u)`, i.e. the periodic
    /// part `P` in `int_0^t u = mean(u) t + P(t) - P(0)`.
    fn periodic_antiderivative(&self) -> PeriodicFn {
        let n = self.grid.len();
        let mut spec = self.spectrum();
        for (k, c) in spec.iter_mut().enumerate() {
            let m = wavenumber(k, n);
            if k == 0 || k == n / 2 {
                *c = Complex64::new(0.0, 0.0);
            } else {
                *c /= Complex64::new(0.0, 2.0 * PI * m as f64);
            }
        }
        Self::from_spectrum(self.grid, spec)
    }

    /// Mean-free periodic `z` with `z' + lambda z = u - mean(u)`.
    pub fn shifted_antiderivative(&self, lambda: f64) -> PeriodicFn {
        let n = self.grid.len();
        let mut spec = self.spectrum();
        for (k, c) in spec.iter_mut().enumerate() {
            let m = wavenumber(k, n);
            if k == 0 || k == n / 2 {
                *c = Complex64::new(0.0, 0.0);
            } else {
                *c /= Complex64::new(lambda, 2.0 * PI * m as f64);
            }
        }
        Self::from_spectrum(self.grid, spec)
    }

    /// `t -> int_0^t u(s) ds`.
    pub fn cumulative(&self) -> Cumulative {
        let slope = self.mean();
        let p = self.periodic_antiderivative();
        let p0 = p.values[0];
        let periodic = p.add_constant(-p0);
        Cumulative { slope, periodic }
    }

    /// `int_0^1 u(t) t^p dt` for `p` in `0..=2`, computed from the Fourier
    /// coefficients so that the non-periodic weight costs no accuracy.
    pub fn moment(&self, p: u32) -> f64 {
        let spec = self.spectrum();
        let n = self.grid.len();
        let c0 = spec[0].re;
        match p {
            0 => self.mean(),
            1 | 2 => {
                // int_0^1 t e^{i w t} = 1/(i w); int_0^1 t^2 e^{i w t} = 1/(i w) + 2/w^2
                let mut acc = if p == 1 { c0 / 2.0 } else { c0 / 3.0 };
                for (k, c) in spec.iter().enumerate().skip(1) {
                    if k == n / 2 {
                        continue;
                    }
                    let w = 2.0 * PI * wavenumber(k, n) as f64;
                    let mut weight = Complex64::new(0.0, -1.0 / w);
                    if p == 2 {
                        weight += Complex64::new(2.0 / (w * w), 0.0);
                    }
                    acc += (c * weight).re;
                }
                acc
            }
            _ => panic!("moment order {p} not supported"),
        }
    }

    /// Trigonometric interpolant, for evaluation between nodes.
    pub fn interpolant(&self) -> TrigInterpolant {
        let n = self.grid.len();
        let spec = self.spectrum();
        let half = n / 2;
        let mut cos = Vec::with_capacity(half);
        let mut sin = Vec::with_capacity(half);
        for k in 1..=half {
            let c = spec[k];
            if k == half {
                // Nyquist: keep the cosine part only.
                cos.push(c.re);
                sin.push(0.0);
            } else {
                cos.push(2.0 * c.re);
                sin.push(-2.0 * c.im);
            }
        }
        // trailing harmonics below roundoff contribute nothing
        let scale = cos
            .iter()
            .chain(&sin)
            .fold(spec[0].re.abs(), |m, v| m.max(v.abs()));
        let mut keep = cos.len();
        while keep > 0 && cos[keep - 1].abs().max(sin[keep - 1].abs()) <= 1e-18 * scale {
            keep -= 1;
        }
        cos.truncate(keep);
        sin.truncate(keep);
        TrigInterpolant {
            mean: spec[0].re,
            cos,
            sin,
        }
    }

    /// `t -> u(N t)`, exact on the grid.
    pub fn replicate(&self, factor: usize) -> PeriodicFn {
        let n = self.grid.len();
        Self::from_values_unchecked(
            self.grid,
            (0..n).map(|i| self.values[(factor * i) % n]).collect(),
        )
    }

    /// Resamples onto another grid through the trigonometric interpolant.
    pub fn resample(&self, grid: Grid) -> PeriodicFn {
        if grid == self.grid {
            return self.clone();
        }
        let interp = self.interpolant();
        grid.sample(|t| interp.eval(t))
    }
}

/// `int_0^t u` represented as `slope * t + periodic(t)`, with `periodic(0) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cumulative {
    slope: f64,
    periodic: PeriodicFn,
}

impl Cumulative {
    /// Mean of the integrand, which is also the value at `t = 1`.
    pub fn slope(&self) -> f64 {
        self.slope
    }

    pub fn periodic_part(&self) -> &PeriodicFn {
        &self.periodic
    }

    /// Values at `t_0, ..., t_{n-1}` and the endpoint `t = 1`.
    pub fn values(&self) -> Vec<f64> {
        let g = self.periodic.grid();
        let mut out: Vec<f64> = self
            .periodic
            .values()
            .iter()
            .enumerate()
            .map(|(i, p)| self.slope * g.node(i) + p)
            .collect();
        out.push(self.slope);
        out
    }

    /// Value at an arbitrary `t` in `[0, 1]` via the interpolated periodic part.
    pub fn at(&self, t: f64) -> f64 {
        if t == 1.0 {
            return self.slope;
        }
        self.slope * t + self.periodic.interpolant().eval(t)
    }
}

/// A real trigonometric polynomial `mean + sum_k cos_k cos(2 pi k t) + sin_k sin(2 pi k t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigInterpolant {
    mean: f64,
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl TrigInterpolant {
    pub fn eval(&self, t: f64) -> f64 {
        let (s1, c1) = (2.0 * PI * t).sin_cos();
        let (mut s, mut c) = (0.0f64, 1.0f64);
        let mut acc = self.mean;
        for (a, b) in self.cos.iter().zip(&self.sin) {
            let cn = c * c1 - s * s1;
            s = s * c1 + c * s1;
            c = cn;
            acc += a * c + b * s;
        }
        acc
    }

    /// Evaluates value and first derivative.
    pub fn eval_with_derivative(&self, t: f64) -> (f64, f64) {
        let (s1, c1) = (2.0 * PI * t).sin_cos();
        let (mut s, mut c) = (0.0f64, 1.0f64);
        let mut acc = self.mean;
        let mut dacc = 0.0;
        for (k, (a, b)) in self.cos.iter().zip(&self.sin).enumerate() {
            let cn = c * c1 - s * s1;
            s = s * c1 + c * s1;
            c = cn;
            let w = 2.0 * PI * (k + 1) as f64;
            acc += a * c + b * s;
            dacc += w * (b * c - a * s);
        }
        (acc, dacc)
    }

    pub fn harmonics(&self) -> usize {
        self.cos.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid {
        Grid::new(1024).unwrap()
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(Grid::new(8).is_err());
        assert!(Grid::new(100).is_err());
        assert!(Grid::new(16).is_ok());
    }

    #[test]
    fn mean_examples() {
        let g = grid();
        assert_eq!(g.constant(5.0).mean(), 5.0);
        let c = g.sample(|t| (2.0 * PI * t).cos());
        assert!(c.mean().abs() <= 1e-15);
        let s2 = g.sample(|t| (2.0 * PI * t).sin().powi(2));
        assert!((s2.mean() - 0.5).abs() <= 1e-12);
    }

    #[test]
    fn cumulative_examples() {
        let g = grid();
        let one = g.constant(1.0).cumulative().values();
        for (i, v) in one.iter().enumerate() {
            assert!((v - i as f64 / 1024.0).abs() < 1e-14);
        }
        let c = g.sample(|t| (2.0 * PI * t).cos());
        let vals = c.cumulative().values();
        for (i, v) in vals.iter().enumerate() {
            let t = i as f64 / 1024.0;
            assert!((v - (2.0 * PI * t).sin() / (2.0 * PI)).abs() < 1e-6);
        }
        let u = g.sample(|t| 1.3 + (2.0 * PI * t).sin() * (4.0 * PI * t).cos());
        let cum = u.cumulative();
        assert_eq!(cum.values()[1024], u.mean());
        assert_eq!(cum.at(1.0), u.mean());
    }

    #[test]
    fn derivative_of_harmonic() {
        let g = grid();
        let u = g.sample(|t| (6.0 * PI * t).sin());
        let du = u.derivative();
        for (i, v) in du.values().iter().enumerate() {
            let t = g.node(i);
            assert!((v - 6.0 * PI * (6.0 * PI * t).cos()).abs() < 1e-10);
        }
    }

    #[test]
    fn moments_match_closed_forms() {
        let g = Grid::new(256).unwrap();
        // int_0^1 cos(2 pi t) t dt = 0, int_0^1 sin(2 pi t) t dt = -1/(2 pi)
        let s = g.sample(|t| (2.0 * PI * t).sin());
        assert!((s.moment(1) + 1.0 / (2.0 * PI)).abs() < 1e-13);
        // int_0^1 cos(2 pi t) t^2 dt = 1/(2 pi^2)
        let c = g.sample(|t| (2.0 * PI * t).cos());
        assert!((c.moment(2) - 1.0 / (2.0 * PI * PI)).abs() < 1e-13);
        let one = g.constant(1.0);
        assert!((one.moment(1) - 0.5).abs() < 1e-15);
        assert!((one.moment(2) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn interpolant_reproduces_off_node_values() {
        let g = Grid::new(64).unwrap();
        let f = |t: f64| 0.3 + (2.0 * PI * t).cos() - 0.25 * (10.0 * PI * t).sin();
        let interp = g.sample(f).interpolant();
        for &t in &[0.0, 0.0123, 0.5, 0.77777, 0.999] {
            assert!((interp.eval(t) - f(t)).abs() < 1e-13);
        }
        let (_, d) = interp.eval_with_derivative(0.3);
        let exact = -2.0 * PI * (2.0 * PI * 0.3f64).sin() - 0.25 * 10.0 * PI * (10.0 * PI * 0.3f64).cos();
        assert!((d - exact).abs() < 1e-11);
    }

    #[test]
    fn green_kernel_has_zero_mean_in_s() {
        let g = grid();
        for t in [0.0, 0.125, 0.5, 0.75, 411.0 / 1024.0] {
            // value at the jump taken as the average of both sides
            let vals = g.nodes().map(|s| {
                if (s - t).rem_euclid(1.0) == 0.0 {
                    0.0
                } else {
                    green_kernel(s - t)
                }
            });
            assert!(compensated_sum(vals).abs() / 1024.0 <= 1e-12);
        }
    }

    #[test]
    fn replicate_is_exact() {
        let g = Grid::new(64).unwrap();
        let u = g.sample(|t| (2.0 * PI * t).cos());
        let r = u.replicate(4);
        for (i, v) in r.values().iter().enumerate() {
            assert!((v - (8.0 * PI * g.node(i)).cos()).abs() < 1e-14);
        }
    }
}
