//! Nonlinearities `f(t, x)`: polynomials in `x` whose coefficients are
//! trigonometric polynomials in `t`, plus a few named builtins.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, PeriodicFn};

pub const MAX_ORDER: usize = 5;

/// `c(t) = a0 + sum_k cos[k-1] cos(2 pi k t) + sin[k-1] sin(2 pi k t)`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrigPoly {
    #[serde(default)]
    pub a0: f64,
    #[serde(default)]
    pub cos: Vec<f64>,
    #[serde(default)]
    pub sin: Vec<f64>,
}

impl TrigPoly {
    pub fn constant(a0: f64) -> Self {
        Self {
            a0,
            ..Self::default()
        }
    }

    pub fn is_constant(&self) -> bool {
        self.cos.iter().chain(&self.sin).all(|&c| c == 0.0)
    }

    pub fn eval(&self, t: f64) -> f64 {
        let mut acc = self.a0;
        for (k, c) in self.cos.iter().enumerate() {
            acc += c * (2.0 * PI * (k + 1) as f64 * t).cos();
        }
        for (k, s) in self.sin.iter().enumerate() {
            acc += s * (2.0 * PI * (k + 1) as f64 * t).sin();
        }
        acc
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub power: u32,
    #[serde(flatten)]
    pub coef: TrigPoly,
}

/// Named nonlinearities outside the polynomial class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Builtin {
    /// `2 pi cos(2 pi t) cosh^2(x)`, wild at both ends.
    #[serde(rename = "cosh2_cos")]
    Cosh2Cos,
}

/// `f(t, x) = sum_j c_j(t) x^j (+ builtin)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NonlinearityFile", into = "NonlinearityFile")]
pub struct Nonlinearity {
    terms: Vec<Term>,
    builtin: Option<Builtin>,
    autonomous: bool,
}

#[derive(Serialize, Deserialize)]
struct NonlinearityFile {
    #[serde(default)]
    terms: Vec<Term>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    builtin: Option<Builtin>,
}

impl TryFrom<NonlinearityFile> for Nonlinearity {
    type Error = Error;
    fn try_from(file: NonlinearityFile) -> Result<Self> {
        Nonlinearity::new(file.terms, file.builtin)
    }
}

impl From<Nonlinearity> for NonlinearityFile {
    fn from(f: Nonlinearity) -> Self {
        Self {
            terms: f.terms,
            builtin: f.builtin,
        }
    }
}

impl Nonlinearity {
    pub fn new(terms: Vec<Term>, builtin: Option<Builtin>) -> Result<Self> {
        for term in &terms {
            let coefs = std::iter::once(&term.coef.a0)
                .chain(&term.coef.cos)
                .chain(&term.coef.sin);
            if coefs.clone().any(|c| !c.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "non-finite coefficient in term of power {}",
                    term.power
                )));
            }
        }
        let autonomous = builtin.is_none() && terms.iter().all(|t| t.coef.is_constant());
        Ok(Self {
            terms,
            builtin,
            autonomous,
        })
    }

    /// Autonomous polynomial from coefficients in increasing power order.
    pub fn polynomial(coeffs: &[f64]) -> Self {
        let terms = coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(j, &c)| Term {
                power: j as u32,
                coef: TrigPoly::constant(c),
            })
            .collect();
        Self::new(terms, None).expect("finite coefficients")
    }

    pub fn builtin(b: Builtin) -> Self {
        Self::new(Vec::new(), Some(b)).expect("builtin")
    }

    /// Adds a time-dependent coefficient to the `x^power` term.
    pub fn with_term(mut self, power: u32, coef: TrigPoly) -> Self {
        self.terms.push(Term { power, coef });
        Self::new(self.terms, self.builtin).expect("finite coefficients")
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn builtin_tag(&self) -> Option<Builtin> {
        self.builtin
    }

    pub fn is_autonomous(&self) -> bool {
        self.autonomous
    }

    pub fn is_polynomial(&self) -> bool {
        self.builtin.is_none()
    }

    /// Highest power with a nonzero coefficient.
    pub fn degree(&self) -> usize {
        self.terms
            .iter()
            .filter(|t| t.coef.a0 != 0.0 || !t.coef.is_constant())
            .map(|t| t.power as usize)
            .max()
            .unwrap_or(0)
    }

    /// Coefficients in increasing power order when `f` is an autonomous polynomial.
    pub fn poly_coeffs(&self) -> Option<Vec<f64>> {
        if !self.autonomous {
            return None;
        }
        Some(self.at_time(0.0).coeffs)
    }

    /// Freezes `t`, returning a fast evaluator in `x`.
    pub fn at_time(&self, t: f64) -> Slice {
        let deg = self.terms.iter().map(|t| t.power as usize).max().unwrap_or(0);
        let mut coeffs = vec![0.0; deg + 1];
        for term in &self.terms {
            coeffs[term.power as usize] += term.coef.eval(t);
        }
        let builtin = self.builtin.map(|b| match b {
            Builtin::Cosh2Cos => 2.0 * PI * (2.0 * PI * t).cos(),
        });
        Slice { coeffs, builtin }
    }

    /// `d^order f / dx^order (t, x)`.
    pub fn eval_f(&self, t: f64, x: f64, order: usize) -> Result<f64> {
        if order > MAX_ORDER {
            return Err(Error::UnsupportedOrder(order));
        }
        Ok(self.at_time(t).derivs(x)[order])
    }

    /// Samples `d^order f/dx^order (t, u(t))` on the grid of `u`.
    pub fn compose(&self, u: &PeriodicFn, order: usize) -> PeriodicFn {
        assert!(order <= MAX_ORDER);
        let g = u.grid();
        let vals = if self.autonomous {
            let s = self.at_time(0.0);
            u.values().iter().map(|&x| s.derivs(x)[order]).collect()
        } else {
            u.values()
                .iter()
                .enumerate()
                .map(|(i, &x)| self.at_time(g.node(i)).derivs(x)[order])
                .collect()
        };
        PeriodicFn::from_values_unchecked(g, vals)
    }

    /// All six derivative orders of `f` along `u`.
    pub fn compose_all(&self, u: &PeriodicFn) -> [PeriodicFn; MAX_ORDER + 1] {
        let g = u.grid();
        let mut cols: [Vec<f64>; MAX_ORDER + 1] = Default::default();
        for c in cols.iter_mut() {
            c.reserve(g.len());
        }
        let auto = self.autonomous.then(|| self.at_time(0.0));
        for (i, &x) in u.values().iter().enumerate() {
            let d = match &auto {
                Some(s) => s.derivs(x),
                None => self.at_time(g.node(i)).derivs(x),
            };
            for (c, v) in cols.iter_mut().zip(d) {
                c.push(v);
            }
        }
        cols.map(|c| PeriodicFn::from_values_unchecked(g, c))
    }

    /// `F(u) = u' + f(t, u)`.
    pub fn apply_operator(&self, u: &PeriodicFn) -> PeriodicFn {
        let fu = self.compose(u, 0);
        u.derivative().zip_with(&fu, |a, b| a + b)
    }

    /// `Phi(u) = int f(t, u(t)) dt`.
    pub fn phi(&self, u: &PeriodicFn) -> f64 {
        self.compose(u, 0).mean()
    }

    /// Largest `|f|` over `[x_lo, x_hi]` sampled on a `t` grid.
    pub fn sup_abs_on_box(&self, x_lo: f64, x_hi: f64, grid: Grid) -> f64 {
        let xs = (0..=32).map(|i| x_lo + (x_hi - x_lo) * i as f64 / 32.0);
        let ts: Vec<f64> = if self.autonomous {
            vec![0.0]
        } else {
            grid.nodes().step_by((grid.len() / 64).max(1)).collect()
        };
        let mut m: f64 = 0.0;
        for &t in &ts {
            let s = self.at_time(t);
            for x in xs.clone() {
                m = m.max(s.value(x).abs());
            }
        }
        m
    }
}

/// `f(t, .)` at a fixed time.
#[derive(Debug, Clone, PartialEq)]
pub struct Slice {
    coeffs: Vec<f64>,
    builtin: Option<f64>,
}

impl Slice {
    pub fn value(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        if let Some(scale) = self.builtin {
            let ch = x.cosh();
            acc += scale * ch * ch;
        }
        acc
    }

    /// `[f, f', ..., f^(5)]` at `x`.
    pub fn derivs(&self, x: f64) -> [f64; MAX_ORDER + 1] {
        let mut out = [0.0; MAX_ORDER + 1];
        // Horner on each derivative: d^k/dx^k sum c_j x^j = sum_j c_j j!/(j-k)! x^(j-k)
        for (k, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for j in (k..self.coeffs.len()).rev() {
                acc = acc * x + self.coeffs[j] * falling(j, k);
            }
            *o = acc;
        }
        if let Some(scale) = self.builtin {
            // cosh^2 x = (1 + cosh 2x)/2; k-th derivative is 2^(k-1) (sinh|cosh)(2x)
            let (s2, c2) = ((2.0 * x).sinh(), (2.0 * x).cosh());
            out[0] += scale * 0.5 * (1.0 + c2);
            for (k, o) in out.iter_mut().enumerate().skip(1) {
                let p = f64::powi(2.0, k as i32 - 1);
                *o += scale * p * if k % 2 == 1 { s2 } else { c2 };
            }
        }
        out
    }

    pub fn first_derivative(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for j in (1..self.coeffs.len()).rev() {
            acc = acc * x + self.coeffs[j] * j as f64;
        }
        if let Some(scale) = self.builtin {
            acc += scale * (2.0 * x).sinh();
        }
        acc
    }
}

fn falling(j: usize, k: usize) -> f64 {
    ((j - k + 1)..=j).fold(1.0, |acc, m| acc * m as f64)
}
