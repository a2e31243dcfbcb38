use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, PeriodicFn};

/// Finite Fourier parametrization
/// `u(t) = a0 + sum_j a_j cos(2 pi j t) + b_j sin(2 pi j t)`, `j = 1..=M`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AnsatzFile", into = "AnsatzFile")]
pub struct FourierAnsatz {
    pub a0: f64,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct AnsatzFile {
    a0: f64,
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl TryFrom<AnsatzFile> for FourierAnsatz {
    type Error = Error;
    fn try_from(f: AnsatzFile) -> Result<Self> {
        FourierAnsatz::new(f.a0, f.cos, f.sin)
    }
}

impl From<FourierAnsatz> for AnsatzFile {
    fn from(a: FourierAnsatz) -> Self {
        Self {
            a0: a.a0,
            cos: a.a,
            sin: a.b,
        }
    }
}

impl FourierAnsatz {
    pub fn new(a0: f64, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.is_empty() || a.len() != b.len() {
            return Err(Error::InvalidInput(format!(
                "ansatz needs M >= 1 cosine and sine coefficients of equal count, got {} and {}",
                a.len(),
                b.len()
            )));
        }
        if !a0.is_finite() || a.iter().chain(&b).any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("non-finite ansatz coefficient".into()));
        }
        Ok(Self { a0, a, b })
    }

    pub fn zeros(harmonics: usize) -> Self {
        Self {
            a0: 0.0,
            a: vec![0.0; harmonics],
            b: vec![0.0; harmonics],
        }
    }

    pub fn harmonics(&self) -> usize {
        self.a.len()
    }

    /// `2M + 1`.
    pub fn len(&self) -> usize {
        1 + 2 * self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn eval(&self, t: f64) -> f64 {
        let mut acc = self.a0;
        for (j, (a, b)) in self.a.iter().zip(&self.b).enumerate() {
            let (s, c) = (2.0 * PI * (j + 1) as f64 * t).sin_cos();
            acc += a * c + b * s;
        }
        acc
    }

    pub fn sample(&self, grid: Grid) -> PeriodicFn {
        grid.sample(|t| self.eval(t))
    }

    /// Reads the first `harmonics` Fourier coefficients of `u`.
    pub fn from_periodic(u: &PeriodicFn, harmonics: usize) -> Self {
        let spec = u.spectrum();
        let a = (1..=harmonics).map(|j| 2.0 * spec[j].re).collect();
        let b = (1..=harmonics).map(|j| -2.0 * spec[j].im).collect();
        Self {
            a0: spec[0].re,
            a,
            b,
        }
    }

    /// Flat layout `[a0, a1..aM, b1..bM]`.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.len());
        v.push(self.a0);
        v.extend(&self.a);
        v.extend(&self.b);
        v
    }

    pub fn from_vec(v: &[f64]) -> Result<Self> {
        if v.len() < 3 || v.len() % 2 == 0 {
            return Err(Error::InvalidInput(format!(
                "flat ansatz length must be 2M+1 with M >= 1, got {}",
                v.len()
            )));
        }
        let m = (v.len() - 1) / 2;
        Self::new(v[0], v[1..=m].to_vec(), v[m + 1..].to_vec())
    }

    /// Names matching [`Self::to_vec`].
    pub fn coefficient_names(harmonics: usize) -> Vec<String> {
        let mut names = vec!["a0".to_string()];
        names.extend((1..=harmonics).map(|j| format!("a{j}")));
        names.extend((1..=harmonics).map(|j| format!("b{j}")));
        names
    }

    /// Index of `b1` in the flat layout.
    pub fn gauge_index(&self) -> usize {
        1 + self.a.len()
    }

    /// `t -> u(t + tau)`.
    pub fn time_shift(&self, tau: f64) -> Self {
        let mut out = self.clone();
        for j in 0..self.a.len() {
            let (s, c) = (2.0 * PI * (j + 1) as f64 * tau).sin_cos();
            let (a, b) = (self.a[j], self.b[j]);
            out.a[j] = a * c + b * s;
            out.b[j] = b * c - a * s;
        }
        out
    }

    /// Time translate so that `b1 = 0`, choosing the branch whose `a1` has
    /// the sign of `reference_a1`.
    pub fn align_gauge(&self, reference_a1: f64) -> Self {
        let (a1, b1) = (self.a[0], self.b[0]);
        // a1' = a1 cos + b1 sin, b1' = b1 cos - a1 sin; b1' = 0 at angle atan2(b1, a1)
        let angle = b1.atan2(a1);
        let mut tau = angle / (2.0 * PI);
        let shifted = self.time_shift(tau);
        if shifted.a[0].signum() != reference_a1.signum() && reference_a1 != 0.0 {
            tau += 0.5;
            return self.time_shift(tau);
        }
        shifted
    }

    /// Largest absolute coefficient difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.to_vec()
            .iter()
            .zip(other.to_vec())
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}
