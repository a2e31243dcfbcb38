mod common;

use common::*;
use morinode::*;
use proptest::prelude::*;

/// `u' = -u^2` from `x0`: `u(1) = x0 / (1 + x0)`.
fn riccati_error(h: f64) -> f64 {
    let f = Nonlinearity::polynomial(&[0.0, 0.0, 1.0]);
    let v = Grid::new(32).unwrap().constant(0.0);
    let x0 = 0.8;
    let end = return_map(&f, &v, x0, h).unwrap().outcome.value().unwrap();
    (end - x0 / (1.0 + x0)).abs()
}

#[test]
fn rk4_order_on_riccati() {
    let (e1, e2) = (riccati_error(0.05), riccati_error(0.025));
    let exponent = (e1 / e2).log2();
    assert!(exponent >= 3.5, "measured order {exponent}");
}

#[test]
fn exponential_decay_and_blow_up() {
    let v = Grid::new(32).unwrap().constant(0.0);
    let lin = Nonlinearity::polynomial(&[0.0, 1.0]);
    let tr = integrate(&lin, &v, 1.0, 0.0, 1.0, 1e-3).unwrap();
    assert!((tr.last() - (-1.0f64).exp()).abs() <= 1e-10);
    let sq = Nonlinearity::polynomial(&[0.0, 0.0, 1.0]);
    let tr = integrate(&sq, &v, -2.0, 0.0, 1.0, 1e-3).unwrap();
    let TerminalStatus::BlewUp { sign, time } = tr.status else {
        panic!("no blow-up: {:?}", tr.status)
    };
    assert_eq!(sign, -1);
    assert!((time - 0.5).abs() < 1e-3);
    assert!(tr.samples.iter().all(|x| x.abs() <= U_MAX));
}

fn random_problem() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, f64)> {
    (
        prop::collection::vec(-1.0f64..1.0, 4),
        prop::collection::vec(-1.0f64..1.0, 5),
        -2.0f64..2.0,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn return_derivative_is_positive((fc, vc, x0) in random_problem()) {
        let f = Nonlinearity::polynomial(&fc);
        let v = FourierAnsatz::new(vc[0], vc[1..3].to_vec(), vc[3..5].to_vec()).unwrap().sample(Grid::new(64).unwrap());
        let e = return_map(&f, &v, x0, 1e-2).unwrap();
        if e.outcome.value().is_some() {
            prop_assert!(e.derivative.unwrap() > 0.0);
        }
    }

    #[test]
    fn surviving_initial_values_form_an_interval((fc, vc, _x) in random_problem()) {
        let mut fc = fc;
        fc.push(1.0);
        let f = Nonlinearity::polynomial(&fc);
        let v = FourierAnsatz::new(vc[0], vc[1..3].to_vec(), vc[3..5].to_vec()).unwrap().sample(Grid::new(64).unwrap());
        let int = Integrator::period(&f, &v, 1e-3).unwrap();
        let alive: Vec<bool> = (0..121)
            .map(|i| int.flow(-3.0 + 0.05 * i as f64, 0.0).outcome.value().is_some())
            .collect();
        let switches = alive.windows(2).filter(|w| w[0] != w[1]).count();
        let first = alive.iter().position(|&a| a);
        let last = alive.iter().rposition(|&a| a);
        if let (Some(a), Some(b)) = (first, last) {
            prop_assert!(alive[a..=b].iter().all(|&x| x), "revival after blow-up");
        }
        prop_assert!(switches <= 2);
    }
}

#[test]
fn contact_order_examples() {
    let opts = ContactOptions::default();
    let sq = Nonlinearity::polynomial(&[0.0, 0.0, 1.0]);
    let zero = Grid::new(64).unwrap().constant(0.0);
    let fold = contact_order(&sq, &zero, 0.0, 5, &opts).unwrap();
    assert_eq!(fold.order, ContactOrder::Order(1));
    assert!((fold.derivatives[1] + 2.0).abs() < 1e-4);

    let grid = Grid::new(1024).unwrap();
    let cusp = located_cusp().sample(grid);
    let f = cubic();
    let c = contact_order(&f, &f.apply_operator(&cusp), cusp.values()[0], 5, &opts).unwrap();
    assert_eq!(c.order, ContactOrder::Order(2));

    let ub = polished_butterfly().sample(grid);
    let q = quartic();
    let c = contact_order(&q, &q.apply_operator(&ub), ub.values()[0], 5, &opts).unwrap();
    assert_eq!(c.order, ContactOrder::Order(4));
}

#[test]
fn contact_order_rejects_non_fixed_points() {
    let sq = Nonlinearity::polynomial(&[0.0, 0.0, 1.0]);
    let zero = Grid::new(64).unwrap().constant(0.0);
    assert!(matches!(
        contact_order(&sq, &zero, 0.5, 3, &ContactOptions::default()),
        Err(Error::NotFixedPoint { .. })
    ));
}
