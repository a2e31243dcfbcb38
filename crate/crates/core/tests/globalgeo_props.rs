mod common;

use common::*;
use morinode::globalgeo::*;
use morinode::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn hull_examples_with_certificates() {
    let cases = [
        (Nonlinearity::polynomial(&[0.0, 0.0, 1.0]), -3.0, 3.0, Verdict::NotInterior),
        (cubic(), -2.0, 2.0, Verdict::Interior),
        (quartic(), -3.0, 3.0, Verdict::Interior),
    ];
    for (f, lo, hi, want) in cases {
        let curve = GammaCurve::sample(&f, 2, lo, hi, 401).unwrap();
        let v = hull_origin_test(&curve).unwrap();
        assert_eq!(v.verdict, want);
        assert!(v.certificate_residual(&curve) <= 1e-9);
    }
}

/// Brute-force oracle: no direction among many random ones separates the cubic's curve.
#[test]
fn interior_verdict_survives_random_directions() {
    let curve = GammaCurve::sample(&cubic(), 2, -2.0, 2.0, 401).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..10_000 {
        let th: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let (s, c) = th.sin_cos();
        let min = curve.points.iter().map(|p| c * p[0] + s * p[1]).fold(f64::INFINITY, f64::min);
        assert!(min < 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn hull_certificates_recompute(pts in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 3), 7..40), shift in -1.0f64..1.0) {
        let pts: Vec<Vec<f64>> = pts.into_iter().map(|p| vec![p[0] + shift, p[1], p[2]]).collect();
        let curve = GammaCurve::from_points(pts).unwrap();
        let v = hull_origin_test(&curve).unwrap();
        match v.verdict {
            Verdict::Interior => prop_assert!(v.certificate_residual(&curve) <= 1e-9),
            Verdict::NotInterior => prop_assert!(v.certificate_residual(&curve) <= 1e-12 * (1.0 + shift.abs())),
        }
    }

    #[test]
    fn lemma_identity_on_cubics(g in prop::collection::vec(-3.0f64..3.0, 4), a in -2.0f64..2.0, len in 0.01f64..3.0) {
        prop_assert!(integration_by_parts_residual(&g, a, a + len) <= 1e-10);
    }
}

#[test]
fn lemma_identity_against_closed_form() {
    // g = t^3: (b-a)(3a^2+3b^2) - 2(b^3-a^3) + 6 int (t-a)(t-b) = 0
    let (a, b) = (-0.4f64, 1.3f64);
    let lhs = (b - a) * (3.0 * a * a + 3.0 * b * b) - 2.0 * (b.powi(3) - a.powi(3)) - (b - a).powi(3);
    assert!(lhs.abs() < 1e-12);
    assert!(integration_by_parts_residual(&[0.0, 0.0, 0.0, 1.0], a, b) < 1e-12);
}

#[test]
fn degree_examples() {
    assert_eq!(degree(&Nonlinearity::polynomial(&[0.0, 0.0, 1.0])).unwrap(), 0);
    assert_eq!(degree(&Nonlinearity::polynomial(&[0.0, 1.0, 0.0, 1.0])).unwrap(), 1);
    assert_eq!(degree(&Nonlinearity::polynomial(&[0.0, 0.0, 0.0, -1.0])).unwrap(), -1);
}

/// Signed fixed-point counts of the return map at random right-hand sides equal the degree.
#[test]
fn degree_matches_signed_counts() {
    let fs = [
        (Nonlinearity::polynomial(&[0.0, 0.0, 1.0]), 0.6),
        (Nonlinearity::polynomial(&[0.0, 1.0, 0.0, 1.0]), 0.0),
        (Nonlinearity::polynomial(&[0.0, 0.0, 0.0, -1.0]), 0.0),
        (cubic(), 0.0),
    ];
    let grid = Grid::new(128).unwrap();
    let opts = CensusOptions {
        verify_halving: false,
        ..CensusOptions::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (f, base) in &fs {
        let deg = degree(f).unwrap() as i64;
        for _ in 0..4 {
            let c: Vec<f64> = (0..5).map(|_| rng.gen_range(-0.25..0.25)).collect();
            let v = FourierAnsatz::new(base + c[0], c[1..3].to_vec(), c[3..5].to_vec()).unwrap().sample(grid);
            let census = count_solutions(f, &v, -3.0, 3.0, 241, 1e-3, &opts).unwrap();
            assert!(census.unresolved.is_empty());
            assert_eq!(census.signed_count, Some(deg), "{:?}", census.roots);
            assert_eq!(census.count.unwrap() as i64 % 2, deg.rem_euclid(2));
        }
    }
}

#[test]
fn classification_table_with_evidence() {
    let table = [
        (Nonlinearity::polynomial(&[0.0, 1.0, 0.0, 1.0]), OperatorClass::Diffeomorphism),
        (Nonlinearity::polynomial(&[0.0, 0.0, 1.0]), OperatorClass::GlobalFold),
        (cubic(), OperatorClass::GlobalCusp),
        (quartic(), OperatorClass::HasHigherSingularities),
    ];
    for (f, want) in table {
        let r = classify_operator(&f, None).unwrap();
        assert_eq!(r.class, want);
        assert!(!r.evidence.sign_certificates.is_empty() || !r.evidence.hull_tests.is_empty());
        assert!(r.evidence.sign_certificates.iter().all(|c| c.verify()));
        assert!(r.evidence.hull_tests.iter().all(|h| h.certificate_residual <= 1e-9));
    }
}

#[test]
fn tameness_examples() {
    assert!(tameness(&cubic(), 50.0, 32).unwrap().tame);
    let wild = tameness(&Nonlinearity::builtin(Builtin::Cosh2Cos), 50.0, 32).unwrap();
    assert!(!wild.tame);
    assert!(wild.plus.wild_suspected && wild.minus.wild_suspected);
    let forced = Nonlinearity::polynomial(&[0.0, 0.0, 0.0, 1.0]).with_term(
        0,
        TrigPoly {
            a0: 0.0,
            cos: vec![1.0],
            sin: vec![],
        },
    );
    assert!(tameness(&forced, 50.0, 32).unwrap().tame);
}

/// Critical points on a fibre of `x^3 - x` are the sign changes of `Sigma_1`; there are at most two.
#[test]
fn at_most_two_critical_points_per_fibre() {
    let f = cubic();
    let grid = Grid::new(128).unwrap();
    let opts = FibreOptions::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..4 {
        let c: Vec<f64> = (0..4).map(|_| rng.gen_range(-0.6..0.6)).collect();
        let vt = FourierAnsatz::new(0.0, c[..2].to_vec(), c[2..].to_vec()).unwrap().sample(grid);
        let s1: Vec<f64> = (0..41)
            .map(|i| {
                let a = -2.0 + 0.1 * i as f64;
                let p = solve_periodic(&f, &vt, Constraint::Average(a), &opts).unwrap();
                eigen_w(&f, &p.u).lambda
            })
            .collect();
        let changes = s1.windows(2).filter(|w| w[0].signum() != w[1].signum()).count();
        assert!(changes <= 2, "{s1:?}");
    }
}

#[test]
fn reparametrization_on_a_cusp() {
    let f = cubic();
    let u = located_cusp().sample(Grid::new(1024).unwrap());
    let to = reparam(&f, &Direction::ToSimplified(u.clone())).unwrap();
    let b = &to.time_change;
    assert_eq!(b[0], 0.0);
    assert!((b[b.len() - 1] - 1.0).abs() < 1e-14);
    assert!(b.windows(2).all(|w| w[1] > w[0]));
    let hat = sigma_hat(&f, &to.function, 2).unwrap();
    assert!(hat.iter().all(|x| x.abs() <= 1e-7), "{hat:?}");
    let back = reparam(&f, &Direction::FromSimplified(to.function.clone())).unwrap();
    assert!(sup_diff(&back.function, &u) <= 1e-8);
}

#[test]
fn seeds_from_an_interior_witness() {
    let f = cubic();
    let curve = GammaCurve::sample(&f, 2, -2.0, 2.0, 401).unwrap();
    let v = hull_origin_test(&curve).unwrap();
    let HullWitness::Convex { coefficients } = &v.witness else {
        panic!("expected a convex witness")
    };
    let anchors: Vec<f64> = coefficients
        .iter()
        .zip(&curve.xs)
        .filter(|(l, _)| **l > 1e-9)
        .map(|(_, x)| *x)
        .collect();
    let grid = Grid::new(2048).unwrap();
    let s = seed_shat(&f, 2, &anchors, 0.05, grid).unwrap();
    assert!(s.sigma_hat.iter().all(|x| x.abs() <= 1e-6), "{:?}", s.sigma_hat);
    let r = s.seed.replicated(grid, 8);
    let sig = sigmas(&f, &r);
    let hat = sigma_hat(&f, &r, 2).unwrap();
    for k in 0..2 {
        assert!((sig[k] - hat[k]).abs() <= 0.05, "{sig:?} vs {hat:?}");
    }
}

#[test]
fn square_seed_is_symmetric() {
    let f = Nonlinearity::polynomial(&[0.0, 0.0, 1.0]);
    let s = seed_shat(&f, 1, &[-1.0, 1.0], 0.1, Grid::new(1024).unwrap()).unwrap();
    assert!((s.seed.plateaus[0] - 0.45).abs() < 1e-6);
    assert!((s.seed.plateaus[1] - 0.45).abs() < 1e-6);
}
