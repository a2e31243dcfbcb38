//! Is the origin interior to the convex hull of a sampled curve in `R^k`?

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::lp::{self, LpOutcome};
use crate::nonlinearity::{Nonlinearity, MAX_ORDER};

/// Samples `p_i = (f'(x_i), ..., f^(k)(x_i))` of an autonomous nonlinearity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaCurve {
    pub k: usize,
    pub x_lo: f64,
    pub x_hi: f64,
    pub xs: Vec<f64>,
    pub points: Vec<Vec<f64>>,
}

impl GammaCurve {
    pub fn sample(f: &Nonlinearity, k: usize, x_lo: f64, x_hi: f64, count: usize) -> Result<Self> {
        if !f.is_autonomous() {
            return Err(Error::NotAutonomous);
        }
        if k == 0 || k > MAX_ORDER {
            return Err(Error::UnsupportedOrder(k));
        }
        if !(x_lo < x_hi) || count < 2 {
            return Err(Error::InvalidInput(format!(
                "bad sampling range [{x_lo}, {x_hi}] with {count} points"
            )));
        }
        let s = f.at_time(0.0);
        let xs: Vec<f64> = (0..count)
            .map(|i| x_lo + (x_hi - x_lo) * i as f64 / (count - 1) as f64)
            .collect();
        let points = xs.iter().map(|&x| s.derivs(x)[1..=k].to_vec()).collect();
        Ok(Self {
            k,
            x_lo,
            x_hi,
            xs,
            points,
        })
    }

    /// A curve from explicit points.
    pub fn from_points(points: Vec<Vec<f64>>) -> Result<Self> {
        let k = points.first().map_or(0, Vec::len);
        if k == 0 || points.iter().any(|p| p.len() != k) {
            return Err(Error::InvalidInput("points must share a positive dimension".into()));
        }
        let xs = (0..points.len()).map(|i| i as f64).collect();
        Ok(Self {
            k,
            x_lo: 0.0,
            x_hi: (points.len() - 1) as f64,
            xs,
            points,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Interior,
    NotInterior,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HullWitness {
    /// `lambda_i >= 0`, `sum lambda_i = 1`, `sum lambda_i p_i = 0`.
    Convex { coefficients: Vec<f64> },
    /// `nu . p_i >= 0` for every sample.
    Separating { direction: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HullVerdict {
    pub verdict: Verdict,
    pub witness: HullWitness,
    /// Optimal `delta` of each face `(j, s)` in the order `(0,+), (0,-), (1,+), ...`.
    pub face_optima: Vec<f64>,
    /// `-max face optimum`: positive exactly for interior verdicts.
    pub margin: f64,
    /// Set when some face LP failed and the verdict rests on the rest.
    pub undetermined: bool,
}

impl HullVerdict {
    /// Recomputed residual of the witness against `curve`: `|sum lambda p|`
    /// plus simplex violations, or the negative part of `min nu . p`.
    pub fn certificate_residual(&self, curve: &GammaCurve) -> f64 {
        match &self.witness {
            HullWitness::Convex { coefficients } => {
                let mut acc = vec![0.0; curve.k];
                for (l, p) in coefficients.iter().zip(&curve.points) {
                    for (a, x) in acc.iter_mut().zip(p) {
                        *a += l * x;
                    }
                }
                let comb = acc.iter().fold(0.0f64, |m, a| m.max(a.abs()));
                let sum = (coefficients.iter().sum::<f64>() - 1.0).abs();
                let neg = coefficients.iter().fold(0.0f64, |m, l| m.max(-l));
                comb.max(sum).max(neg)
            }
            HullWitness::Separating { direction } => {
                let min = min_dot(direction, &curve.points);
                (-min).max(0.0)
            }
        }
    }
}

fn min_dot(nu: &[f64], points: &[Vec<f64>]) -> f64 {
    points
        .iter()
        .map(|p| nu.iter().zip(p).map(|(a, b)| a * b).sum::<f64>())
        .fold(f64::INFINITY, f64::min)
}

struct Face {
    delta: f64,
    direction: Option<Vec<f64>>,
}

/// Face `(j, s)`: `max delta` s.t. `nu . p_i >= delta`, `nu_j = s`,
/// `|nu_l| <= 1`, solved through its dual
/// `min_lambda s (P lambda)_j + sum_{l != j} |(P lambda)_l|` over the simplex.
fn solve_face(points: &[Vec<f64>], k: usize, j: usize, s: f64) -> Option<Face> {
    let n = points.len();
    let others: Vec<usize> = (0..k).filter(|&l| l != j).collect();
    let cols = n + 2 * others.len();
    let mut a = Matrix::zeros(k, cols);
    let mut c = vec![0.0; cols];
    for (i, p) in points.iter().enumerate() {
        a[(0, i)] = 1.0;
        c[i] = s * p[j];
        for (r, &l) in others.iter().enumerate() {
            a[(r + 1, i)] = p[l];
        }
    }
    for r in 0..others.len() {
        // (P lambda)_l = y+ - y-
        a[(r + 1, n + 2 * r)] = -1.0;
        a[(r + 1, n + 2 * r + 1)] = 1.0;
        c[n + 2 * r] = 1.0;
        c[n + 2 * r + 1] = 1.0;
    }
    let mut b = vec![0.0; k];
    b[0] = 1.0;
    match lp::solve(&a, &b, &c) {
        LpOutcome::Optimal(sol) => {
            // dual: y0 + sum_l y_l p_l <= s p_j, so nu = (s at j, -y_l elsewhere)
            let mut nu = vec![0.0; k];
            nu[j] = s;
            for (r, &l) in others.iter().enumerate() {
                nu[l] = (-sol.duals[r + 1]).clamp(-1.0, 1.0);
            }
            Some(Face {
                delta: sol.objective,
                direction: Some(nu),
            })
        }
        _ => None,
    }
}

/// Decides whether `0` lies in the interior of `conv{p_i}`.
pub fn hull_origin_test(curve: &GammaCurve) -> Result<HullVerdict> {
    let k = curve.k;
    if k == 0 || k > MAX_ORDER {
        return Err(Error::UnsupportedOrder(k));
    }
    if curve.points.len() < 2 * k + 1 {
        return Err(Error::InvalidInput(format!(
            "need at least {} sample points, got {}",
            2 * k + 1,
            curve.points.len()
        )));
    }
    let scale = curve
        .points
        .iter()
        .flatten()
        .fold(1.0f64, |m, x| m.max(x.abs()));
    // normalize so that LP tolerances are relative
    let pts: Vec<Vec<f64>> = curve
        .points
        .iter()
        .map(|p| p.iter().map(|x| x / scale).collect())
        .collect();
    let faces: Vec<(usize, f64)> = (0..k).flat_map(|j| [(j, 1.0), (j, -1.0)]).collect();
    let solved: Vec<Option<Face>> = faces
        .par_iter()
        .map(|&(j, s)| solve_face(&pts, k, j, s))
        .collect();
    let undetermined = solved.iter().any(Option::is_none);
    let face_optima: Vec<f64> = solved
        .iter()
        .map(|f| f.as_ref().map_or(f64::NAN, |f| f.delta * scale))
        .collect();
    let (best_idx, best) = face_optima
        .iter()
        .enumerate()
        .filter(|(_, d)| d.is_finite())
        .fold((0, f64::NEG_INFINITY), |acc, (i, &d)| if d > acc.1 { (i, d) } else { acc });
    let eps = 1e-12 * scale;
    if best >= -eps {
        let nu = solved[best_idx]
            .as_ref()
            .and_then(|f| f.direction.clone())
            .expect("solved face has a direction");
        return Ok(HullVerdict {
            verdict: Verdict::NotInterior,
            witness: HullWitness::Separating { direction: nu },
            face_optima,
            margin: -best,
            undetermined,
        });
    }
    let coefficients = convex_combination(&pts).ok_or_else(|| {
        Error::InternalConsistency("faces report an interior origin but no convex combination exists".into())
    })?;
    Ok(HullVerdict {
        verdict: Verdict::Interior,
        witness: HullWitness::Convex { coefficients },
        face_optima,
        margin: -best,
        undetermined,
    })
}

/// Phase-one point of `{lambda >= 0 : sum lambda = 1, sum lambda p = 0}`.
fn convex_combination(points: &[Vec<f64>]) -> Option<Vec<f64>> {
    let (n, k) = (points.len(), points[0].len());
    let mut a = Matrix::zeros(k + 1, n);
    for (i, p) in points.iter().enumerate() {
        for (l, x) in p.iter().enumerate() {
            a[(l, i)] = *x;
        }
        a[(k, i)] = 1.0;
    }
    let mut b = vec![0.0; k + 1];
    b[k] = 1.0;
    match lp::solve(&a, &b, &vec![0.0; n]) {
        LpOutcome::Optimal(sol) => {
            let total: f64 = sol.x.iter().sum();
            Some(sol.x.iter().map(|x| x / total).collect())
        }
        _ => None,
    }
}
