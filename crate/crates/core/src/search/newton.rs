use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ansatz::FourierAnsatz;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::linalg::{norm2, Matrix, Svd};
use crate::morin::sigmas;
use crate::nonlinearity::{Nonlinearity, TrigPoly};

/// A scalar parameter entering `f` as `scale * value * x^power`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyParam {
    pub name: String,
    pub power: u32,
    #[serde(default = "one")]
    pub scale: f64,
    pub value: f64,
    #[serde(default)]
    pub free: bool,
}

fn one() -> f64 {
    1.0
}

/// `f = base + sum_p scale_p value_p x^power_p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Family {
    pub base: Nonlinearity,
    #[serde(default)]
    pub params: Vec<FamilyParam>,
}

impl Family {
    pub fn fixed(f: Nonlinearity) -> Self {
        Self {
            base: f,
            params: Vec::new(),
        }
    }

    /// `x^4 - b x^2 + c x` with `b` and `c` free.
    pub fn quartic(b: f64, c: f64) -> Self {
        Self {
            base: Nonlinearity::polynomial(&[0.0, 0.0, 0.0, 0.0, 1.0]),
            params: vec![
                FamilyParam {
                    name: "b".into(),
                    power: 2,
                    scale: -1.0,
                    value: b,
                    free: true,
                },
                FamilyParam {
                    name: "c".into(),
                    power: 1,
                    scale: 1.0,
                    value: c,
                    free: true,
                },
            ],
        }
    }

    pub fn nonlinearity(&self) -> Nonlinearity {
        self.params.iter().fold(self.base.clone(), |f, p| {
            f.with_term(p.power, TrigPoly::constant(p.scale * p.value))
        })
    }

    pub fn is_autonomous(&self) -> bool {
        self.base.is_autonomous()
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.params.iter().find(|p| p.name == name).map(|p| p.value)
    }

    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        let p = self
            .params
            .iter_mut()
            .find(|p| p.name == name)
            .ok_or_else(|| Error::InvalidInput(format!("family has no parameter named {name:?}")))?;
        p.value = value;
        Ok(())
    }

    pub fn freeze_all(mut self) -> Self {
        for p in &mut self.params {
            p.free = false;
        }
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchOptions {
    pub max_iter: usize,
    pub tol: f64,
    pub fd_step: f64,
    /// Initial fraction of the Newton step; halved until the residual drops.
    pub damping: f64,
    pub grid_size: usize,
    /// Relative singular value cutoff of the pseudoinverse.
    pub truncation: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            max_iter: 100,
            tol: 1e-10,
            fd_step: 1e-6,
            damping: 1.0,
            grid_size: 2048,
            truncation: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchProblem {
    pub family: Family,
    pub ansatz: FourierAnsatz,
    /// Free flags over the flat ansatz layout `[a0, a1..aM, b1..bM]`; all free when absent.
    #[serde(default)]
    pub mask: Option<Vec<bool>>,
    pub target: Vec<f64>,
    #[serde(default)]
    pub options: SearchOptions,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchStatus {
    Converged,
    /// Relative residual decrease below `1e-3` over ten iterations, or no
    /// damped step decreased the residual.
    Stagnated,
    MaxIterations,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchReport {
    pub status: SearchStatus,
    pub iterations: usize,
    pub family: Family,
    pub ansatz: FourierAnsatz,
    pub residual: f64,
    pub residual_history: Vec<f64>,
    /// `Sigma_1..Sigma_5` at the returned iterate.
    pub sigma: [f64; 5],
    /// Singular values of the last Jacobian.
    pub singular_values: Vec<f64>,
    pub smallest_retained: f64,
    pub rank: usize,
}

enum Slot {
    Param(usize),
    Coef(usize),
}

struct Layout {
    slots: Vec<Slot>,
    family: Family,
    coefs: Vec<f64>,
}

impl Layout {
    fn unpack(&self, x: &[f64]) -> (Family, Vec<f64>) {
        let mut family = self.family.clone();
        let mut coefs = self.coefs.clone();
        for (slot, v) in self.slots.iter().zip(x) {
            match slot {
                Slot::Param(i) => family.params[*i].value = *v,
                Slot::Coef(i) => coefs[*i] = *v,
            }
        }
        (family, coefs)
    }

    fn pack(&self) -> Vec<f64> {
        self.slots
            .iter()
            .map(|s| match s {
                Slot::Param(i) => self.family.params[*i].value,
                Slot::Coef(i) => self.coefs[*i],
            })
            .collect()
    }
}

fn sigma_at(layout: &Layout, grid: Grid, x: &[f64]) -> [f64; 5] {
    let (family, coefs) = layout.unpack(x);
    let u = FourierAnsatz::from_vec(&coefs).expect("layout keeps the ansatz shape").sample(grid);
    sigmas(&family.nonlinearity(), &u)
}

fn residual_vec(s: &[f64; 5], target: &[f64]) -> Vec<f64> {
    target.iter().enumerate().map(|(i, t)| s[i] - t).collect()
}

/// Damped Gauss-Newton with a truncated pseudoinverse on `Sigma_1..Sigma_k - target`.
pub fn gauss_newton(problem: &SearchProblem) -> Result<SearchReport> {
    let opts = &problem.options;
    let k = problem.target.len();
    if k == 0 || k > 4 {
        return Err(Error::InvalidInput(format!("target dimension must be 1..=4, got {k}")));
    }
    if problem.target.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidInput("non-finite target".into()));
    }
    if !(opts.tol > 0.0 && opts.fd_step > 0.0 && opts.damping > 0.0 && opts.damping <= 1.0) {
        return Err(Error::InvalidInput("tolerance, step and damping must be positive (damping <= 1)".into()));
    }
    let grid = Grid::new(opts.grid_size)?;
    let autonomous = problem.family.is_autonomous();
    let ansatz = if autonomous {
        let mut a = problem.ansatz.align_gauge(problem.ansatz.a[0]);
        a.b[0] = 0.0;
        a
    } else {
        problem.ansatz.clone()
    };
    let mut mask = match &problem.mask {
        Some(mask) if mask.len() != ansatz.len() => {
            return Err(Error::InvalidInput(format!(
                "mask has {} entries for an ansatz of length {}",
                mask.len(),
                ansatz.len()
            )))
        }
        Some(mask) => mask.clone(),
        None => vec![true; ansatz.len()],
    };
    if autonomous {
        mask[ansatz.gauge_index()] = false;
    }
    let mut slots: Vec<Slot> = problem
        .family
        .params
        .iter()
        .enumerate()
        .filter(|(_, p)| p.free)
        .map(|(i, _)| Slot::Param(i))
        .collect();
    slots.extend(mask.iter().enumerate().filter(|(_, f)| **f).map(|(i, _)| Slot::Coef(i)));
    if slots.len() < k {
        return Err(Error::InvalidInput(format!(
            "{} free parameters cannot meet {k} targets",
            slots.len()
        )));
    }
    let layout = Layout {
        slots,
        family: problem.family.clone(),
        coefs: ansatz.to_vec(),
    };

    let mut x = layout.pack();
    let mut s = sigma_at(&layout, grid, &x);
    let mut r = residual_vec(&s, &problem.target);
    let mut res = norm2(&r);
    let mut history = vec![res];
    let mut svals = Vec::new();
    let mut smallest = f64::NAN;
    let mut rank = 0;
    let mut status = SearchStatus::MaxIterations;
    let mut iterations = 0;

    for it in 0..opts.max_iter {
        if res <= opts.tol {
            status = SearchStatus::Converged;
            break;
        }
        iterations = it + 1;
        let h = opts.fd_step;
        let cols: Vec<Vec<f64>> = (0..x.len())
            .into_par_iter()
            .map(|j| {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[j] += h;
                xm[j] -= h;
                let sp = sigma_at(&layout, grid, &xp);
                let sm = sigma_at(&layout, grid, &xm);
                (0..k).map(|i| (sp[i] - sm[i]) / (2.0 * h)).collect()
            })
            .collect();
        let jac = Matrix::from_cols(&cols);
        let svd = Svd::new(&jac);
        let (dx, retained) = svd.solve(&r, opts.truncation);
        svals = svd.s.clone();
        rank = retained;
        smallest = svals.get(retained.saturating_sub(1)).copied().unwrap_or(f64::NAN);

        let mut t = opts.damping;
        let mut accepted = None;
        for _ in 0..40 {
            let xn: Vec<f64> = x.iter().zip(&dx).map(|(a, d)| a - t * d).collect();
            let sn = sigma_at(&layout, grid, &xn);
            let rn = residual_vec(&sn, &problem.target);
            let resn = norm2(&rn);
            if resn.is_finite() && resn < res {
                accepted = Some((xn, sn, rn, resn));
                break;
            }
            t *= 0.5;
        }
        let Some((xn, sn, rn, resn)) = accepted else {
            status = SearchStatus::Stagnated;
            break;
        };
        x = xn;
        s = sn;
        r = rn;
        res = resn;
        history.push(res);
        if res <= opts.tol {
            status = SearchStatus::Converged;
            break;
        }
        if history.len() > 10 {
            let old = history[history.len() - 11];
            if (old - res) < 1e-3 * old {
                status = SearchStatus::Stagnated;
                break;
            }
        }
    }
    let (family, coefs) = layout.unpack(&x);
    Ok(SearchReport {
        status,
        iterations,
        family,
        ansatz: FourierAnsatz::from_vec(&coefs)?,
        residual: res,
        residual_history: history,
        sigma: s,
        singular_values: svals,
        smallest_retained: smallest,
        rank,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_constant_goes_to_zero() {
        let mut mask = vec![false; 3];
        mask[0] = true;
        let p = SearchProblem {
            family: Family::fixed(Nonlinearity::polynomial(&[0.0, 0.0, 1.0])),
            ansatz: FourierAnsatz::new(0.7, vec![0.0], vec![0.0]).unwrap(),
            mask: Some(mask),
            target: vec![0.0],
            options: SearchOptions::default(),
        };
        let r = gauss_newton(&p).unwrap();
        assert_eq!(r.status, SearchStatus::Converged);
        assert!(r.ansatz.a0.abs() < 1e-10, "{}", r.ansatz.a0);
        assert!((r.smallest_retained - 2.0).abs() < 1e-6);
    }

    #[test]
    fn too_few_free_parameters() {
        let p = SearchProblem {
            family: Family::fixed(Nonlinearity::polynomial(&[0.0, 0.0, 1.0])),
            ansatz: FourierAnsatz::zeros(1),
            mask: Some(vec![true, false, false]),
            target: vec![0.0, 0.0],
            options: SearchOptions::default(),
        };
        assert!(matches!(gauss_newton(&p), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn family_assembles_the_quartic() {
        let f = Family::quartic(4.0, -0.3).nonlinearity();
        assert_eq!(f.eval_f(0.2, 0.0, 1).unwrap(), -0.3);
        assert!((f.eval_f(0.0, 1.0, 0).unwrap() - (1.0 - 4.0 - 0.3)).abs() < 1e-15);
    }
}
