//! Small dense linear algebra: one-sided Jacobi SVD, truncated pseudoinverse
//! solves and non-negative least squares. Sizes here never exceed a few dozen.

use serde::{Deserialize, Serialize};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut m = Self::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged rows");
            m.data[i * c..(i + 1) * c].copy_from_slice(row);
        }
        m
    }

    /// Builds from columns.
    pub fn from_cols(cols: &[Vec<f64>]) -> Self {
        let c = cols.len();
        let r = cols.first().map_or(0, Vec::len);
        let mut m = Self::zeros(r, c);
        for (j, col) in cols.iter().enumerate() {
            assert_eq!(col.len(), r, "ragged columns");
            for (i, v) in col.iter().enumerate() {
                m[(i, j)] = *v;
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                self.data[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(x)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    fn col(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Thin SVD `A = U diag(s) V^T` with singular values in decreasing order.
#[derive(Debug, Clone)]
pub struct Svd {
    /// Columns are left singular vectors, `m x r`.
    pub u: Matrix,
    pub s: Vec<f64>,
    /// Columns are right singular vectors, `n x r`.
    pub v: Matrix,
}

impl Svd {
    pub fn new(a: &Matrix) -> Self {
        if a.cols > a.rows {
            let t = Self::tall(&a.transpose());
            return Svd {
                u: t.v,
                s: t.s,
                v: t.u,
            };
        }
        Self::tall(a)
    }

    /// One-sided Jacobi (Hestenes) on the columns of a tall matrix.
    fn tall(a: &Matrix) -> Self {
        let (m, n) = (a.rows, a.cols);
        let mut cols: Vec<Vec<f64>> = (0..n).map(|j| a.col(j)).collect();
        let mut v: Vec<Vec<f64>> = (0..n)
            .map(|j| (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        for _sweep in 0..60 {
            let mut rotated = false;
            for p in 0..n {
                for q in (p + 1)..n {
                    let alpha: f64 = cols[p].iter().map(|x| x * x).sum();
                    let beta: f64 = cols[q].iter().map(|x| x * x).sum();
                    let gamma: f64 = cols[p].iter().zip(&cols[q]).map(|(x, y)| x * y).sum();
                    if gamma.abs() <= 1e-15 * (alpha * beta).sqrt() || gamma == 0.0 {
                        continue;
                    }
                    rotated = true;
                    let zeta = (beta - alpha) / (2.0 * gamma);
                    let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                    let t = if zeta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = c * t;
                    for i in 0..m {
                        let (x, y) = (cols[p][i], cols[q][i]);
                        cols[p][i] = c * x - s * y;
                        cols[q][i] = s * x + c * y;
                    }
                    for i in 0..n {
                        let (x, y) = (v[p][i], v[q][i]);
                        v[p][i] = c * x - s * y;
                        v[q][i] = s * x + c * y;
                    }
                }
            }
            if !rotated {
                break;
            }
        }
        let mut order: Vec<(f64, usize)> = cols
            .iter()
            .enumerate()
            .map(|(j, c)| (c.iter().map(|x| x * x).sum::<f64>().sqrt(), j))
            .collect();
        order.sort_by(|a, b| b.0.total_cmp(&a.0));
        let r = n;
        let mut u = Matrix::zeros(m, r);
        let mut vm = Matrix::zeros(n, r);
        let mut s = Vec::with_capacity(r);
        for (k, &(sigma, j)) in order.iter().enumerate() {
            s.push(sigma);
            for i in 0..m {
                u[(i, k)] = if sigma > 0.0 { cols[j][i] / sigma } else { 0.0 };
            }
            for i in 0..n {
                vm[(i, k)] = v[j][i];
            }
        }
        Svd { u, s, v: vm }
    }

    /// Minimum-norm least-squares solution of `A x = b`, discarding singular
    /// values below `rel_tol * s_max`. Returns the solution and the number of
    /// retained singular values.
    pub fn solve(&self, b: &[f64], rel_tol: f64) -> (Vec<f64>, usize) {
        let smax = self.s.first().copied().unwrap_or(0.0);
        let n = self.v.rows;
        let mut x = vec![0.0; n];
        let mut rank = 0;
        for (k, &sigma) in self.s.iter().enumerate() {
            if sigma <= rel_tol * smax || sigma == 0.0 {
                continue;
            }
            rank += 1;
            let coef: f64 = (0..self.u.rows).map(|i| self.u[(i, k)] * b[i]).sum::<f64>() / sigma;
            for (i, xi) in x.iter_mut().enumerate() {
                *xi += coef * self.v[(i, k)];
            }
        }
        (x, rank)
    }
}

/// Singular values of `a` in decreasing order.
pub fn singular_values(a: &Matrix) -> Vec<f64> {
    Svd::new(a).s
}

/// Lawson–Hanson non-negative least squares: `min |A x - b|`, `x >= 0`.
pub fn nnls(a: &Matrix, b: &[f64]) -> Vec<f64> {
    let (m, n) = (a.rows, a.cols);
    assert_eq!(b.len(), m);
    let mut x = vec![0.0; n];
    let mut passive = vec![false; n];
    let tol = 1e-13 * a.data.iter().fold(0.0f64, |s, v| s.max(v.abs())).max(1.0);
    for _outer in 0..(3 * n + 10) {
        let r: Vec<f64> = a
            .mul_vec(&x)
            .iter()
            .zip(b)
            .map(|(ax, bi)| bi - ax)
            .collect();
        let w: Vec<f64> = (0..n).map(|j| (0..m).map(|i| a[(i, j)] * r[i]).sum()).collect();
        let candidate = (0..n)
            .filter(|&j| !passive[j] && w[j] > tol)
            .max_by(|&i, &j| w[i].total_cmp(&w[j]));
        let Some(j) = candidate else { break };
        passive[j] = true;
        loop {
            let idx: Vec<usize> = (0..n).filter(|&k| passive[k]).collect();
            let sub = Matrix::from_cols(&idx.iter().map(|&k| a.col(k)).collect::<Vec<_>>());
            let (z_sub, _) = Svd::new(&sub).solve(b, 1e-14);
            let mut z = vec![0.0; n];
            for (p, &k) in idx.iter().enumerate() {
                z[k] = z_sub[p];
            }
            if idx.iter().all(|&k| z[k] > 0.0) {
                x = z;
                break;
            }
            let mut alpha = f64::INFINITY;
            for &k in &idx {
                if z[k] <= 0.0 {
                    alpha = alpha.min(x[k] / (x[k] - z[k]));
                }
            }
            for k in 0..n {
                x[k] += alpha * (z[k] - x[k]);
            }
            for &k in &idx {
                if x[k] <= 1e-15 {
                    x[k] = 0.0;
                    passive[k] = false;
                }
            }
            if !passive.iter().any(|&p| p) {
                break;
            }
        }
    }
    x
}

pub fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
