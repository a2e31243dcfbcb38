//! Smoothed step functions on the simplified strata and their replicates.

use serde::{Deserialize, Serialize};

use super::hull::{hull_origin_test, GammaCurve, Verdict};
use crate::error::{Error, Result};
use crate::grid::{Grid, PeriodicFn};
use crate::linalg::{nnls, norm2, Matrix, Svd};
use crate::nonlinearity::{Nonlinearity, Slice, MAX_ORDER};

/// `psi(s) / (psi(s) + psi(1 - s))` with `psi(s) = exp(-1/s)`: a smooth
/// step from 0 to 1 on `[0, 1]` with all derivatives vanishing at the ends.
pub fn smooth_step(s: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    if s >= 1.0 {
        return 1.0;
    }
    let a = (-1.0 / s).exp();
    let b = (-1.0 / (1.0 - s)).exp();
    a / (a + b)
}

/// Plateaus at `anchors[j]` of length `plateaus[j]`, each followed by a
/// transition of length `epsilon / m` to the next anchor (cyclically).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepSeed {
    pub anchors: Vec<f64>,
    pub plateaus: Vec<f64>,
    pub epsilon: f64,
}

impl StepSeed {
    pub fn eval(&self, t: f64) -> f64 {
        let m = self.anchors.len();
        let trans = self.epsilon / m as f64;
        let mut t = t.rem_euclid(1.0);
        for j in 0..m {
            if t < self.plateaus[j] {
                return self.anchors[j];
            }
            t -= self.plateaus[j];
            if t < trans {
                let next = self.anchors[(j + 1) % m];
                return self.anchors[j] + (next - self.anchors[j]) * smooth_step(t / trans);
            }
            t -= trans;
        }
        self.anchors[0]
    }

    pub fn sample(&self, grid: Grid) -> PeriodicFn {
        grid.sample(|t| self.eval(t))
    }

    /// Samples `t -> seed(N t)`.
    pub fn replicated(&self, grid: Grid, factor: usize) -> PeriodicFn {
        grid.sample(|t| self.eval(factor as f64 * t))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShatSeed {
    pub seed: StepSeed,
    pub u: PeriodicFn,
    /// Discrete `(int f'(u), ..., int f^(k)(u))` on the construction grid.
    pub sigma_hat: Vec<f64>,
}

fn gamma(s: &Slice, x: f64, k: usize) -> Vec<f64> {
    s.derivs(x)[1..=k].to_vec()
}

fn transition_integral(s: &Slice, a: f64, b: f64, k: usize) -> Vec<f64> {
    let m = 4000;
    let mut acc = vec![0.0; k];
    for i in 0..m {
        let tau = (i as f64 + 0.5) / m as f64;
        let g = gamma(s, a + (b - a) * smooth_step(tau), k);
        for (x, y) in acc.iter_mut().zip(g) {
            *x += y / m as f64;
        }
    }
    acc
}

fn discrete_sigma_hat(f: &Nonlinearity, u: &PeriodicFn, k: usize) -> Vec<f64> {
    let d = f.compose_all(u);
    (1..=k).map(|i| d[i].mean()).collect()
}

/// Builds a smoothed step function `v` with `int gamma_k(v) = 0` on `grid`.
pub fn seed_shat(
    f: &Nonlinearity,
    k: usize,
    anchors: &[f64],
    epsilon: f64,
    grid: Grid,
) -> Result<ShatSeed> {
    if !f.is_autonomous() {
        return Err(Error::NotAutonomous);
    }
    if k == 0 || k > MAX_ORDER {
        return Err(Error::UnsupportedOrder(k));
    }
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::InvalidInput(format!("epsilon must lie in (0, 1/2), got {epsilon}")));
    }
    let m = anchors.len();
    if m < k + 1 {
        return Err(Error::InvalidInput(format!("need at least {} anchors, got {m}", k + 1)));
    }
    let s = f.at_time(0.0);
    let pts: Vec<Vec<f64>> = anchors.iter().map(|&x| gamma(&s, x, k)).collect();
    if m >= 2 * k + 1 {
        let curve = GammaCurve::from_points(pts.clone())?;
        if hull_origin_test(&curve)?.verdict != Verdict::Interior {
            return Err(Error::AnchorsInsufficient { residual: f64::INFINITY });
        }
    }
    // phi(a) = sum_j a_j gamma(x_j) + (epsilon/m) sum_j int gamma(transition_j)
    let mut offset = vec![0.0; k];
    for j in 0..m {
        let t = transition_integral(&s, anchors[j], anchors[(j + 1) % m], k);
        for (o, v) in offset.iter_mut().zip(t) {
            *o += epsilon / m as f64 * v;
        }
    }
    let weight = pts
        .iter()
        .flatten()
        .fold(1.0f64, |acc, x| acc.max(x.abs()));
    let mut rows: Vec<Vec<f64>> = (0..k)
        .map(|l| pts.iter().map(|p| p[l] / weight).collect())
        .collect();
    rows.push(vec![1.0; m]);
    let a = Matrix::from_rows(&rows);
    let mut rhs: Vec<f64> = offset.iter().map(|o| -o / weight).collect();
    rhs.push(1.0 - epsilon);
    let plateaus = nnls(&a, &rhs);
    let r: Vec<f64> = a.mul_vec(&plateaus).iter().zip(&rhs).map(|(x, y)| x - y).collect();
    let residual = norm2(&r);
    if residual > 1e-10 {
        return Err(Error::AnchorsInsufficient { residual });
    }
    let mut seed = StepSeed {
        anchors: anchors.to_vec(),
        plateaus,
        epsilon,
    };
    polish(f, &mut seed, k, grid)?;
    let u = seed.sample(grid);
    let sigma_hat = discrete_sigma_hat(f, &u, k);
    Ok(ShatSeed { seed, u, sigma_hat })
}

/// Newton on the plateau lengths against the grid sums, keeping their total.
fn polish(f: &Nonlinearity, seed: &mut StepSeed, k: usize, grid: Grid) -> Result<()> {
    let m = seed.anchors.len();
    let total: f64 = seed.plateaus.iter().sum();
    for _ in 0..20 {
        let base = discrete_sigma_hat(f, &seed.sample(grid), k);
        if norm2(&base) <= 1e-13 {
            return Ok(());
        }
        let h = 1e-7;
        let mut cols = Vec::with_capacity(m);
        for j in 0..m {
            let mut p = seed.clone();
            p.plateaus[j] += h;
            let sp = discrete_sigma_hat(f, &p.sample(grid), k);
            let mut col: Vec<f64> = sp.iter().zip(&base).map(|(a, b)| (a - b) / h).collect();
            col.push(1.0);
            cols.push(col);
        }
        let jac = Matrix::from_cols(&cols);
        let mut rhs: Vec<f64> = base.iter().map(|b| -b).collect();
        rhs.push(total - seed.plateaus.iter().sum::<f64>());
        let (step, _) = Svd::new(&jac).solve(&rhs, 1e-10);
        for (p, d) in seed.plateaus.iter_mut().zip(step) {
            *p += d;
        }
        if seed.plateaus.iter().any(|&p| p < 0.0) {
            return Err(Error::AnchorsInsufficient {
                residual: norm2(&base),
            });
        }
    }
    Ok(())
}

/// `2k` anchors: the extreme samples of each coordinate of `gamma_k`, deduplicated.
pub fn extreme_anchors(curve: &GammaCurve) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    for l in 0..curve.k {
        let by = |a: &usize, b: &usize| curve.points[*a][l].total_cmp(&curve.points[*b][l]);
        let idx: Vec<usize> = (0..curve.points.len()).collect();
        let lo = *idx.iter().min_by(|a, b| by(a, b)).unwrap();
        let hi = *idx.iter().max_by(|a, b| by(a, b)).unwrap();
        for i in [lo, hi] {
            let x = curve.xs[i];
            if out.iter().all(|y| (y - x).abs() > 1e-12) {
                out.push(x);
            }
        }
    }
    out.sort_by(f64::total_cmp);
    out
}
