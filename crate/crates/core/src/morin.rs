//! The positive eigenvector of `DF(u)`, the functionals `Sigma_1..Sigma_5`
//! and pointwise Morin classification.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ansatz::FourierAnsatz;
use crate::error::{Error, Result};
use crate::fibre::solve_w;
use crate::grid::PeriodicFn;
use crate::linalg::{singular_values, Matrix};
use crate::nonlinearity::{Nonlinearity, MAX_ORDER};

/// Eigenpair `w' + D2f(t,u) w = lambda w` with `w > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenPair {
    pub w: PeriodicFn,
    pub lambda: f64,
}

impl EigenPair {
    /// `sup |w' + D2f(t,u) w - lambda w|`.
    pub fn residual(&self, f: &Nonlinearity, u: &PeriodicFn) -> f64 {
        let g = f.compose(u, 1);
        let dw = self.w.derivative();
        dw.values()
            .iter()
            .zip(g.values())
            .zip(self.w.values())
            .fold(0.0, |m, ((d, g), w)| m.max((d + g * w - self.lambda * w).abs()))
    }
}

/// `w(t) = exp(-int k(s - t) D2f(s, u(s)) ds)` and `lambda = int D2f(t, u(t)) dt`.
pub fn eigen_w(f: &Nonlinearity, u: &PeriodicFn) -> EigenPair {
    eigen_from_linearization(&f.compose(u, 1))
}

pub(crate) fn eigen_from_linearization(g: &PeriodicFn) -> EigenPair {
    let cum = g.cumulative();
    let lambda = cum.slope();
    // the kernel integral is the mean-free antiderivative of D2f - lambda
    let e = cum.periodic_part().mean_free();
    EigenPair {
        w: e.map(|x| (-x).exp()),
        lambda,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MorinOrder {
    Regular,
    Morin { k: usize },
    Degenerate { reason: String },
    /// `Sigma_1..Sigma_5` all vanish; no classification.
    ExceedsFour,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmaReport {
    pub sigma: [f64; 5],
    /// `(Sigma_a, Sigma_b, Sigma_c)`.
    pub sigma_abc: [f64; 3],
    pub jacobian_svals: Vec<f64>,
    pub order: Option<MorinOrder>,
    pub tol_zero: f64,
    pub tol_rank: f64,
}

/// `Sigma_1..Sigma_5` at `u`.
pub fn sigmas(f: &Nonlinearity, u: &PeriodicFn) -> [f64; 5] {
    let d = f.compose_all(u);
    sigmas_from_derivatives(&d)
}

fn sigmas_from_derivatives(d: &[PeriodicFn; MAX_ORDER + 1]) -> [f64; 5] {
    let eig = eigen_from_linearization(&d[1]);
    let w = eig.w.values();
    let n = w.len();
    let term = |k: usize, p: i32| -> PeriodicFn {
        let vals = d[k]
            .values()
            .iter()
            .zip(w)
            .map(|(a, w)| a * w.powi(p))
            .collect();
        PeriodicFn::from_values_unchecked(d[k].grid(), vals)
    };
    let f2w = term(2, 1);
    let f3w2 = term(3, 2);
    let f4w3 = term(4, 3);
    let f5w4 = term(5, 4);

    let s1 = eig.lambda;
    let s2 = f2w.mean();
    let s3 = f3w2.mean();
    // I(t) = int_0^t f'' w = s2 t + P(t), P periodic with P(0) = 0
    let cum = f2w.cumulative();
    let p = cum.periodic_part().values();
    let prod = |a: &PeriodicFn, q: usize| -> PeriodicFn {
        let vals = (0..n).map(|i| a.values()[i] * p[i].powi(q as i32)).collect();
        PeriodicFn::from_values_unchecked(a.grid(), vals)
    };
    let int_a_i = |a: &PeriodicFn| s2 * a.moment(1) + prod(a, 1).mean();
    let int_a_i2 = |a: &PeriodicFn| {
        s2 * s2 * a.moment(2) + 2.0 * s2 * prod(a, 1).moment(1) + prod(a, 2).mean()
    };
    let s4 = f4w3.mean() - 2.0 * int_a_i(&f3w2);
    let s5 = f5w4.mean() - 5.0 * int_a_i(&f4w3) + 5.0 * int_a_i2(&f3w2);
    [s1, s2, s3, s4, s5]
}

/// Values of every functional, without classification.
pub fn sigma_vec(f: &Nonlinearity, u: &PeriodicFn) -> SigmaReport {
    let d = f.compose_all(u);
    let sigma = sigmas_from_derivatives(&d);
    let eig = eigen_from_linearization(&d[1]);
    let sigma_b = d[1].zip_with(&eig.w, |g, w| g * w).mean();
    let sigma_c = solve_w(f, u, 1.0).alpha;
    SigmaReport {
        sigma,
        sigma_abc: [sigma[0], sigma_b, sigma_c],
        jacobian_svals: Vec::new(),
        order: None,
        tol_zero: zero_tolerance(&sigma, 1e-8),
        tol_rank: 0.0,
    }
}

fn zero_tolerance(sigma: &[f64; 5], rel: f64) -> f64 {
    rel * (1.0 + sigma.iter().fold(0.0f64, |m, s| m.max(s.abs())))
}

/// `(int f'(u), ..., int f^(k)(u))` for autonomous `f`.
pub fn sigma_hat(f: &Nonlinearity, u: &PeriodicFn, k: usize) -> Result<Vec<f64>> {
    if !f.is_autonomous() {
        return Err(Error::NotAutonomous);
    }
    if k > MAX_ORDER {
        return Err(Error::UnsupportedOrder(k));
    }
    let d = f.compose_all(u);
    Ok((1..=k).map(|i| d[i].mean()).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifyOptions {
    /// Number of harmonics `M` of the test basis (`2M + 1` directions).
    pub harmonics: usize,
    pub fd_step: f64,
    pub rel_zero: f64,
    pub rel_rank: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self {
            harmonics: 8,
            fd_step: 1e-6,
            rel_zero: 1e-8,
            rel_rank: 1e-6,
        }
    }
}

/// Morin order of `u` with the transversality test on a Fourier basis.
pub fn classify_point(f: &Nonlinearity, u: &PeriodicFn, opts: &ClassifyOptions) -> Result<SigmaReport> {
    let mut report = sigma_vec(f, u);
    let tol_zero = zero_tolerance(&report.sigma, opts.rel_zero);
    report.tol_zero = tol_zero;
    let s = report.sigma;
    let Some(k) = (0..5).find(|&k| s[k].abs() > tol_zero) else {
        report.order = Some(MorinOrder::ExceedsFour);
        return Ok(report);
    };
    if k == 0 {
        report.order = Some(MorinOrder::Regular);
        return Ok(report);
    }
    if 2 * opts.harmonics + 1 < k + 2 {
        return Err(Error::InvalidInput(format!(
            "basis of {} harmonics is too small for order {k}",
            opts.harmonics
        )));
    }
    if k == 1 {
        report.order = Some(MorinOrder::Morin { k: 1 });
        return Ok(report);
    }
    let jac = sigma_jacobian(f, u, k - 1, opts.harmonics, opts.fd_step);
    let svals = singular_values(&jac);
    let smax = svals.first().copied().unwrap_or(0.0);
    let smin = svals.get(k - 2).copied().unwrap_or(0.0);
    report.tol_rank = opts.rel_rank * smax;
    report.order = Some(if smax > 0.0 && smin > report.tol_rank {
        MorinOrder::Morin { k }
    } else {
        MorinOrder::Degenerate {
            reason: format!("D(Sigma_1..Sigma_{}) is not surjective: smallest singular value {smin:e}", k - 1),
        }
    });
    report.jacobian_svals = svals;
    Ok(report)
}

/// Fourier test directions `1, cos(2 pi j t), sin(2 pi j t)`.
pub fn fourier_directions(u: &PeriodicFn, harmonics: usize) -> Vec<PeriodicFn> {
    let grid = u.grid();
    (0..2 * harmonics + 1)
        .map(|i| {
            let mut e = vec![0.0; 2 * harmonics + 1];
            e[i] = 1.0;
            FourierAnsatz::from_vec(&e)
                .expect("valid layout")
                .sample(grid)
        })
        .collect()
}

/// Rows `D Sigma_i`, `i = 1..=rows`, on the Fourier directions. The first
/// row is exact; the rest are central differences.
pub fn sigma_jacobian(f: &Nonlinearity, u: &PeriodicFn, rows: usize, harmonics: usize, step: f64) -> Matrix {
    let dirs = fourier_directions(u, harmonics);
    let f2 = f.compose(u, 2);
    let cols: Vec<Vec<f64>> = dirs
        .par_iter()
        .map(|phi| {
            let mut col = vec![f2.zip_with(phi, |a, b| a * b).mean()];
            if rows > 1 {
                let plus = sigmas(f, &u.zip_with(phi, |a, b| a + step * b));
                let minus = sigmas(f, &u.zip_with(phi, |a, b| a - step * b));
                col.extend((1..rows).map(|i| (plus[i] - minus[i]) / (2.0 * step)));
            }
            col
        })
        .collect();
    Matrix::from_cols(&cols)
}
