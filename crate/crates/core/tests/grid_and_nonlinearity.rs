use std::f64::consts::PI;

use morinode::{green_kernel, FourierAnsatz, Grid, Nonlinearity, Term, TrigPoly};
use proptest::prelude::*;

fn coefs(m: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0f64..2.0, m)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ansatz_read_back(a0 in -2.0f64..2.0, m in 1usize..8, seed in coefs(16)) {
        let a = seed[..m].to_vec();
        let b = seed[8..8 + m].to_vec();
        let ans = FourierAnsatz::new(a0, a, b).unwrap();
        let u = ans.sample(Grid::new(64).unwrap());
        let back = FourierAnsatz::from_periodic(&u, m);
        prop_assert!(ans.max_abs_diff(&back) <= 1e-12);
    }

    #[test]
    fn green_kernel_mean_vanishes_at_nodes(i in 0usize..1024) {
        let grid = Grid::new(1024).unwrap();
        let t = grid.node(i);
        // the jump is sampled at the average of its one-sided limits
        let k = grid.sample(|s| if (s - t).rem_euclid(1.0) == 0.0 { 0.0 } else { green_kernel(s - t) });
        prop_assert!(k.mean().abs() <= 1e-12);
    }

    #[test]
    fn derivatives_match_finite_differences(
        c in coefs(6),
        cc in coefs(2),
        t in 0.0f64..1.0,
        x in -1.5f64..1.5,
    ) {
        let terms = c
            .iter()
            .enumerate()
            .map(|(j, &a0)| Term {
                power: j as u32,
                coef: TrigPoly { a0, cos: vec![cc[0]], sin: vec![cc[1]] },
            })
            .collect();
        let f = Nonlinearity::new(terms, None).unwrap();
        let h = 1e-4;
        for order in 1..=5 {
            let fd = (f.eval_f(t, x + h, order - 1).unwrap() - f.eval_f(t, x - h, order - 1).unwrap()) / (2.0 * h);
            let exact = f.eval_f(t, x, order).unwrap();
            let scale = 1.0 + exact.abs() + f.eval_f(t, x, (order + 1).min(5)).unwrap().abs();
            prop_assert!((fd - exact).abs() <= 1e-6 * scale, "order {order}: fd {fd} exact {exact}");
        }
    }

    #[test]
    fn cumulative_ends_at_the_mean(seed in coefs(9)) {
        let ans = FourierAnsatz::new(seed[0], seed[1..5].to_vec(), seed[5..9].to_vec()).unwrap();
        let u = ans.sample(Grid::new(256).unwrap());
        let c = u.cumulative();
        prop_assert!((c.at(1.0) - u.mean()).abs() <= 1e-13 * (1.0 + u.sup_norm()));
        prop_assert!(c.at(0.0).abs() <= 1e-15 * (1.0 + u.sup_norm()));
    }
}

#[test]
fn eval_examples() {
    let sq = Nonlinearity::polynomial(&[0.0, 0.0, 1.0]);
    assert_eq!(sq.eval_f(0.3, 3.0, 1).unwrap(), 6.0);
    let q = Nonlinearity::polynomial(&[0.0, -0.3, -4.0, 0.0, 1.0]);
    assert_eq!(q.eval_f(0.0, 0.0, 1).unwrap(), -0.3);
    assert_eq!(q.eval_f(0.0, 1.0, 3).unwrap(), 24.0);
    assert!(q.eval_f(0.0, 1.0, 6).is_err());
}

#[test]
fn mean_and_cumulative_examples() {
    let grid = Grid::new(1024).unwrap();
    assert_eq!(grid.constant(5.0).mean(), 5.0);
    assert!(grid.sample(|t| (2.0 * PI * t).cos()).mean().abs() <= 1e-15);
    assert!((grid.sample(|t| (2.0 * PI * t).sin().powi(2)).mean() - 0.5).abs() <= 1e-12);
    let one = grid.constant(1.0).cumulative();
    for t in [0.0, 0.25, 0.6, 1.0] {
        assert!((one.at(t) - t).abs() < 1e-14);
    }
    let c = grid.sample(|t| (2.0 * PI * t).cos()).cumulative();
    for i in 0..=16 {
        let t = i as f64 / 16.0;
        assert!((c.at(t) - (2.0 * PI * t).sin() / (2.0 * PI)).abs() <= 1e-6);
    }
}
