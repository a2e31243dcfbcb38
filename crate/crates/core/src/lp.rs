//! Dense two-phase simplex for `min c^T x` subject to `A x = b`, `x >= 0`.
//!
//! Problem sizes in this crate are a handful of rows by a few hundred
//! columns, so a full tableau is fine. Dual values come from the
//! artificial columns, which hold `B^{-1}` at termination.

use crate::linalg::Matrix;

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal(LpSolution),
    Infeasible { phase_one_objective: f64 },
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    /// Multipliers `y` with `y^T A <= c` on the optimal basis.
    pub duals: Vec<f64>,
    pub basis: Vec<usize>,
}

struct Tableau {
    m: usize,
    width: usize, // structural + artificial columns
    t: Vec<f64>,  // m rows of (width + 1), last entry is rhs
    basis: Vec<usize>,
}

impl Tableau {
    fn at(&self, i: usize, j: usize) -> f64 {
        self.t[i * (self.width + 1) + j]
    }

    fn rhs(&self, i: usize) -> f64 {
        self.at(i, self.width)
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.width + 1;
        let p = self.t[r * w + c];
        for j in 0..w {
            self.t[r * w + j] /= p;
        }
        let pivot_row: Vec<f64> = self.t[r * w..(r + 1) * w].to_vec();
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.t[i * w + c];
            if f != 0.0 {
                for j in 0..w {
                    self.t[i * w + j] -= f * pivot_row[j];
                }
            }
        }
        self.basis[r] = c;
    }

    /// Reduced costs `c_j - c_B^T B^{-1} A_j` for every column.
    fn reduced_costs(&self, cost: &[f64]) -> Vec<f64> {
        let mut d = cost.to_vec();
        for i in 0..self.m {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                for (j, dj) in d.iter_mut().enumerate() {
                    *dj -= cb * self.at(i, j);
                }
            }
        }
        d
    }

    /// Runs primal simplex on `cost`, allowing only columns where `allowed` holds.
    fn optimize(&mut self, cost: &[f64], allowed: &dyn Fn(usize) -> bool, eps: f64) -> bool {
        let mut stall = 0usize;
        let mut last_obj = f64::INFINITY;
        for _iter in 0..50_000 {
            let d = self.reduced_costs(cost);
            let bland = stall > 50;
            let entering = if bland {
                (0..self.width).find(|&j| allowed(j) && d[j] < -eps)
            } else {
                (0..self.width)
                    .filter(|&j| allowed(j) && d[j] < -eps)
                    .min_by(|&a, &b| d[a].total_cmp(&d[b]))
            };
            let Some(c) = entering else { return true };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.m {
                let a = self.at(i, c);
                if a > eps {
                    let ratio = self.rhs(i) / a;
                    let better = match leave {
                        None => true,
                        Some((r, best)) => {
                            ratio < best - 1e-15
                                || (ratio <= best + 1e-15 && self.basis[i] < self.basis[r])
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let Some((r, _)) = leave else { return false };
            self.pivot(r, c);
            let obj: f64 = (0..self.m).map(|i| cost[self.basis[i]] * self.rhs(i)).sum();
            if obj < last_obj - 1e-14 * last_obj.abs().max(1.0) {
                stall = 0;
                last_obj = obj;
            } else {
                stall += 1;
            }
        }
        true
    }
}

/// Solves `min c^T x` s.t. `A x = b`, `x >= 0`.
pub fn solve(a: &Matrix, b: &[f64], c: &[f64]) -> LpOutcome {
    let (m, n) = (a.rows(), a.cols());
    assert_eq!(b.len(), m);
    assert_eq!(c.len(), n);
    let scale = (0..m)
        .flat_map(|i| a.row(i).iter().copied())
        .chain(b.iter().copied())
        .fold(1.0f64, |s, v| s.max(v.abs()));
    let eps = 1e-11 * scale;
    let width = n + m;
    let mut flip = vec![1.0; m];
    let mut t = vec![0.0; m * (width + 1)];
    for i in 0..m {
        if b[i] < 0.0 {
            flip[i] = -1.0;
        }
        for j in 0..n {
            t[i * (width + 1) + j] = flip[i] * a[(i, j)];
        }
        t[i * (width + 1) + n + i] = 1.0;
        t[i * (width + 1) + width] = flip[i] * b[i];
    }
    let mut tab = Tableau {
        m,
        width,
        t,
        basis: (n..n + m).collect(),
    };

    let phase1: Vec<f64> = (0..width).map(|j| if j >= n { 1.0 } else { 0.0 }).collect();
    tab.optimize(&phase1, &|_| true, eps);
    let infeas: f64 = (0..m)
        .filter(|&i| tab.basis[i] >= n)
        .map(|i| tab.rhs(i))
        .sum();
    if infeas > 1e-9 * scale {
        return LpOutcome::Infeasible {
            phase_one_objective: infeas,
        };
    }
    // drive zero-level artificials out where possible
    for i in 0..m {
        if tab.basis[i] >= n {
            if let Some(j) = (0..n).find(|&j| tab.at(i, j).abs() > eps) {
                tab.pivot(i, j);
            }
        }
    }

    let mut phase2 = c.to_vec();
    phase2.extend(std::iter::repeat(0.0).take(m));
    if !tab.optimize(&phase2, &|j| j < n, eps) {
        return LpOutcome::Unbounded;
    }

    let mut x = vec![0.0; n];
    for i in 0..m {
        if tab.basis[i] < n {
            x[tab.basis[i]] = tab.rhs(i).max(0.0);
        }
    }
    let objective = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
    // y_r = sum_i c_B(i) (B^{-1})_{i r}; column n + r of the tableau is B^{-1} e_r (flipped rows)
    let duals = (0..m)
        .map(|r| {
            (0..m)
                .map(|i| phase2[tab.basis[i]] * tab.at(i, n + r))
                .sum::<f64>()
                * flip[r]
        })
        .collect();
    LpOutcome::Optimal(LpSolution {
        x,
        objective,
        duals,
        basis: tab.basis.clone(),
    })
}
