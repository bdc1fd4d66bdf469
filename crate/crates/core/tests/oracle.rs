//! Functional equation against brute force, and structural properties of
//! the coefficient table.

use fpt::exec::Exec;
use fpt::genfun::solve_functional_equation;
use fpt::parking::enumerate::{enumerate_fnp, forest_dp, ITERATION_BUDGET};
use fpt::weights::{config, WeightSequence};
use proptest::prelude::*;
use rug::ops::Pow;
use rug::Rational;

fn q(a: i64, b: i64) -> Rational {
    Rational::from((a, b))
}

#[test]
fn brute_force_matches_on_a_lopsided_sequence() {
    let ws = WeightSequence::Polynomial(vec![q(2, 3), q(1, 5), q(0, 1), q(7, 4)]);
    let brute = enumerate_fnp(&ws, 6, ITERATION_BUDGET, Exec::Parallel).unwrap();
    let (f, _) = solve_functional_equation::<Rational>(&ws, 6, 13, &()).unwrap();
    for n in 1..=6 {
        for p in 0..=13 {
            assert_eq!(brute.get(n, p), *f.coeff(n, p), "n {n} p {p}");
        }
    }
}

#[test]
fn equivalent_sequences_rescale_coefficients() {
    // b̃_l = λ r^l b_l gives F̃_{n,p} = λ^n r^{n+p} F_{n,p}
    let ws = WeightSequence::polynomial_i64(&[1, 2, 1]);
    let (lambda, r) = (q(3, 2), q(2, 5));
    let eq = ws.equivalent(&lambda, &r);
    let (f, _) = solve_functional_equation::<Rational>(&ws, 8, 8, &()).unwrap();
    let (g, _) = solve_functional_equation::<Rational>(&eq, 8, 8, &()).unwrap();
    for n in 1..=8 {
        for p in 0..=8 {
            let scale = lambda.clone().pow(n as u32) * r.clone().pow((n + p) as u32);
            assert_eq!(*g.coeff(n, p), Rational::from(f.coeff(n, p) * &scale));
        }
    }
}

#[test]
fn config_round_trip_feeds_the_solver() {
    let ws = config::parse("family = \"polynomial\"\ncoeffs = [\"1/2\", 0, 0.5]\n").unwrap();
    let back = config::from_value(&config::to_value(&ws)).unwrap();
    assert_eq!(ws, back);
    let scaled = WeightSequence::polynomial_i64(&[1, 1]).equivalent(&q(2, 1), &q(1, 3));
    assert_eq!(config::from_value(&config::to_value(&scaled)).unwrap(), scaled);
    let (f, _) = solve_functional_equation::<Rational>(&back, 3, 2, &()).unwrap();
    assert_eq!(*f.coeff(1, 1), q(1, 2));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn coefficients_are_nonnegative_and_respect_the_surplus_bound(
        raw in proptest::collection::vec(0u32..5, 3..5),
    ) {
        let mut coeffs: Vec<Rational> = raw.iter().map(|&k| Rational::from(k)).collect();
        coeffs[0] += 1;
        *coeffs.last_mut().unwrap() += 1;
        let ws = WeightSequence::Polynomial(coeffs);
        let d = ws.degree().unwrap();
        let n_max = 6;
        let p_max = (d - 1) * n_max + 2;
        let (f, _) = solve_functional_equation::<Rational>(&ws, n_max, p_max, &()).unwrap();
        let dp = forest_dp(&ws, n_max).unwrap();
        for n in 1..=n_max {
            for p in 0..=p_max {
                let c = f.coeff(n, p);
                prop_assert!(*c >= 0);
                if p > (d - 1) * n {
                    prop_assert!(*c == 0);
                }
                prop_assert_eq!(dp.get(n, p), c.clone());
            }
        }
    }
}
