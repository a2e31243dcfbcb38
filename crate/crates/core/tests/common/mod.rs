#![allow(dead_code)]

use morinode::{FourierAnsatz, Grid, Nonlinearity, PeriodicFn};

pub const B: f64 = 4.0;
pub const C: f64 = -0.3;

pub fn quartic() -> Nonlinearity {
    Nonlinearity::polynomial(&[0.0, C, -B, 0.0, 1.0])
}

/// Printed butterfly coefficients (`b1 = 0`, `b2..b4` as listed).
pub fn u_b() -> FourierAnsatz {
    FourierAnsatz::new(
        -0.01173378,
        vec![-0.8836063, 0.2428734, 0.4465347, -0.01881213],
        vec![0.0, -0.6855379, 0.1853376, 0.2105862],
    )
    .unwrap()
}

/// Printed coefficients of the perturbed butterfly behind the six-solution figure.
pub fn u_1() -> FourierAnsatz {
    FourierAnsatz::new(
        -0.011367708203969,
        vec![-0.883600656945802, 0.243308077825844, 0.446085678376277, -0.018458472190807],
        vec![0.0, -0.685621717642052, 0.185481811055651, 0.210509692732880],
    )
    .unwrap()
}

/// `v = u' + f(u)` on `grid`.
pub fn rhs_of(f: &Nonlinearity, u: &FourierAnsatz, grid: Grid) -> PeriodicFn {
    f.apply_operator(&u.sample(grid))
}

pub fn cubic() -> Nonlinearity {
    Nonlinearity::polynomial(&[0.0, -1.0, 0.0, 1.0])
}

/// A cusp of `x^3 - x` located by Gauss-Newton on `(Sigma_1, Sigma_2) = 0`.
pub fn located_cusp() -> FourierAnsatz {
    let p = morinode::SearchProblem {
        family: morinode::Family::fixed(cubic()),
        ansatz: FourierAnsatz::new(0.05, vec![0.8, 0.0], vec![0.0, 0.3]).unwrap(),
        mask: None,
        target: vec![0.0, 0.0],
        options: morinode::SearchOptions::default(),
    };
    let r = morinode::gauss_newton(&p).unwrap();
    assert_eq!(r.status, morinode::SearchStatus::Converged);
    r.ansatz
}

/// The printed butterfly refined by Gauss-Newton with `b, c` frozen.
pub fn polished_butterfly() -> FourierAnsatz {
    let p = morinode::SearchProblem {
        family: morinode::Family::quartic(B, C).freeze_all(),
        ansatz: u_b(),
        mask: None,
        target: vec![0.0; 4],
        options: morinode::SearchOptions::default(),
    };
    let r = morinode::gauss_newton(&p).unwrap();
    assert_eq!(r.status, morinode::SearchStatus::Converged);
    r.ansatz
}

pub fn sup_diff(a: &PeriodicFn, b: &PeriodicFn) -> f64 {
    a.values()
        .iter()
        .zip(b.values())
        .fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}
