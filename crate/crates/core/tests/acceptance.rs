//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Tolerances are pinned below.

use std::process::ExitCode;
use std::time::Instant;

use fpt::asymptotics::homogeneous::sandwich;
use fpt::asymptotics::ialpha::{c_form, double_sum, tail_constant, tail_first_correction};
use fpt::asymptotics::predict::{predict_and_compare, Regime, Table};
use fpt::asymptotics::{constants, Exponents};
use fpt::exec::Exec;
use fpt::genfun::identities::{identity_suite, lagrange_check};
use fpt::genfun::param::{consistency_compose, ParamSeries};
use fpt::genfun::solve_functional_equation;
use fpt::parking::enumerate::{enumerate_fnp, ITERATION_BUDGET};
use fpt::parking::montecarlo::{exact_probability, gw_parking_mc, McConfig, DEFAULT_SIZE_CAP};
use fpt::phase::{classify, mixture, probabilistic_criterion, tune_to_dilute, Phase, Refinement};
use fpt::weights::{WeightSequence, B0};
use fpt::Series;
use rug::ops::Pow;
use rug::{Float, Rational};

const PREC: u32 = 256;

// 1
const ORACLE_N: usize = 7;
// 2
const COMPOSE_ORDER: usize = 25;
const REVERSION_ORDER: usize = 64;
// 3
const IDENTITY_ORDER: usize = 40;
const LAGRANGE_N: usize = 20;
// 4
const MIN_SEQUENCES: usize = 20;
const P_C_TOL: f64 = 1e-12;
const P_C_OFFSET: (i64, i64) = (1, 1000);
// 6
const IALPHA_REL: f64 = 1e-8;
const IALPHA_SUM_TOL: f64 = 1e-30;
const TAIL_LAMBDA: f64 = 50.0;
const TAIL_LAMBDA_SLOW: f64 = 200.0;
const TAIL_REL: f64 = 0.02;
// 7
const SLOPE_X_TOL: f64 = 0.05;
const SLOPE_Y_TOL: f64 = 0.1;
const AMPLITUDE_TOL: f64 = 0.15;
// 8
const BIVARIATE_TOL: f64 = 0.25;
// 9
const MC_SAMPLES: u64 = 10_000_000;
const MC_SEED: u64 = 42;
const MC_SIGMAS: f64 = 3.0;
// 10
const SANDWICH: (f64, f64) = (0.1, 10.0);

type Outcome = Result<String, String>;

fn q(a: i64, b: i64) -> Rational {
    Rational::from((a, b))
}

fn half_zero_half() -> WeightSequence {
    WeightSequence::Polynomial(vec![q(1, 2), q(0, 1), q(1, 2)])
}

fn polylog(c: Rational, beta: Rational) -> WeightSequence {
    WeightSequence::Polylog { c, r: q(1, 1), beta, b0: B0::Normalize }
}

fn check(cond: bool, msg: String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg)
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn oracle_equivalence() -> Outcome {
    let cases = [
        WeightSequence::polynomial_i64(&[1, 0, 1]),
        WeightSequence::polynomial_i64(&[1, 1, 1]),
        WeightSequence::polynomial_i64(&[1, 0, 0, 1]),
        half_zero_half(),
    ];
    let mut cells = 0;
    for ws in &cases {
        let d = ws.degree().unwrap();
        let p_max = (d - 1) * ORACLE_N;
        let brute = enumerate_fnp(ws, ORACLE_N, ITERATION_BUDGET, Exec::Parallel).map_err(err)?;
        let (f, _) = solve_functional_equation::<Rational>(ws, ORACLE_N, p_max + 1, &()).map_err(err)?;
        for n in 1..=ORACLE_N {
            for p in 0..=p_max + 1 {
                check(brute.get(n, p) == *f.coeff(n, p), format!("{}: F_{{{n},{p}}} differs", ws.describe()))?;
                cells += 1;
            }
        }
    }
    Ok(format!("4 sequences, {cells} cells equal exactly for n <= {ORACLE_N}"))
}

fn parametrization_round_trip() -> Outcome {
    let mut notes = Vec::new();
    for ws in [WeightSequence::polynomial_i64(&[1, 0, 1]), WeightSequence::polynomial_i64(&[1, 1, 1])] {
        let diff = consistency_compose::<Rational>(&ws, COMPOSE_ORDER, COMPOSE_ORDER, &()).map_err(err)?;
        check(diff == 0.0, format!("{}: F̂(Ŷ, y) - F = {diff}", ws.describe()))?;
        let ps = ParamSeries::<Rational>::new(&ws, REVERSION_ORDER, &()).map_err(err)?;
        let comp = ps.xhat.compose(&ps.yhat().map_err(err)?).map_err(err)?;
        check(comp.coeffs() == Series::<Rational>::var(REVERSION_ORDER, &()).coeffs(), "x̂(Ŷ(x)) != x".into())?;
        notes.push(ws.describe());
    }
    Ok(format!(
        "F̂(Ŷ,y) = F exactly on {COMPOSE_ORDER}x{COMPOSE_ORDER}, x̂(Ŷ) = x to order {REVERSION_ORDER} for {}",
        notes.join(", ")
    ))
}

fn identity_suite_exact() -> Outcome {
    let mut total = 0;
    for ws in [WeightSequence::polynomial_i64(&[1, 0, 1]), WeightSequence::polynomial_i64(&[1, 1, 1])] {
        let rep = identity_suite::<Rational>(&ws, IDENTITY_ORDER, &()).map_err(err)?;
        let names: Vec<_> = rep.failures().iter().map(|c| c.name.clone()).collect();
        check(rep.all_pass(), format!("{}: failed {names:?}", ws.describe()))?;
        let ps = ParamSeries::<Rational>::new(&ws, LAGRANGE_N + 1, &()).map_err(err)?;
        let lag = lagrange_check(&ps, LAGRANGE_N).map_err(err)?;
        check(lag.pass, format!("{}: Lagrange discrepancy {}", ws.describe(), lag.discrepancy))?;
        total += rep.checks.len() + 1;
    }
    Ok(format!("{total} exact identities at order {IDENTITY_ORDER}, Lagrange n <= {LAGRANGE_N}"))
}

fn phase_routes() -> Outcome {
    let mut seqs: Vec<WeightSequence> = Vec::new();
    for (c, beta) in [(q(1, 10), q(11, 5)), (q(3, 10), q(11, 5)), (q(1, 10), q(5, 2)), (q(3, 10), q(5, 2))] {
        seqs.push(polylog(c, beta));
    }
    for (c, beta) in [(q(1, 10), q(14, 5)), (q(3, 10), q(14, 5)), (q(3, 20), q(16, 5)), (q(1, 5), q(16, 5))] {
        seqs.push(polylog(c, beta));
    }
    let dense_ends = [polylog(q(1, 10), q(7, 2)), polylog(q(1, 5), q(7, 2)), polylog(q(1, 10), q(19, 5))];
    seqs.extend(dense_ends.iter().cloned());
    seqs.push(polylog(q(1, 20), q(33, 10)));
    let base = half_zero_half();
    for end in &dense_ends {
        seqs.push(mixture(&base, end, &q(1, 2)));
    }
    let mut bracket_notes = Vec::new();
    for end in &dense_ends {
        let t = tune_to_dilute(&base, end, PREC).map_err(err)?;
        let oracle = quadratic_p_c(&base, end)?;
        let gap = Float::with_val(PREC, &oracle - Float::with_val(PREC, &t.p_c_exact)).abs().to_f64();
        check(gap < P_C_TOL, format!("p_c {} vs moment root {}: gap {gap:e}", t.p_c, oracle.to_f64()))?;
        let off = q(P_C_OFFSET.0, P_C_OFFSET.1);
        let below = mixture(&base, end, &Rational::from(&t.p_c_exact - &off));
        let above = mixture(&base, end, &Rational::from(&t.p_c_exact + &off));
        let lo = classify(&below, PREC, Exec::Parallel).map_err(err)?.phase;
        let hi = classify(&above, PREC, Exec::Parallel).map_err(err)?.phase;
        check(
            lo == Phase::Generic && hi == Phase::NonGenericDense,
            format!("p_c ± 1e-3 classified {lo:?} / {hi:?}"),
        )?;
        bracket_notes.push(format!("{:.6}", t.p_c_exact.to_f64()));
        seqs.push(mixture(&base, end, &t.p_c_exact));
        seqs.push(below);
        seqs.push(above);
    }
    let mut seen = [0usize; 3];
    for ws in &seqs {
        let analytic = classify(ws, PREC, Exec::Parallel).map_err(err)?.phase;
        let crit = probabilistic_criterion(ws, PREC).map_err(err)?;
        check(crit.decisive, format!("{}: criterion not decisive", ws.describe()))?;
        check(
            crit.predicted == Some(analytic),
            format!("{}: analytic {analytic:?} vs criterion {:?}", ws.describe(), crit.predicted),
        )?;
        seen[analytic as usize] += 1;
    }
    check(seqs.len() >= MIN_SEQUENCES, format!("only {} sequences", seqs.len()))?;
    check(seen.iter().all(|&k| k > 0), format!("phases not all covered: {seen:?}"))?;
    Ok(format!(
        "{} sequences agree (generic {}, dilute {}, dense {}); p_c = {} within {P_C_TOL:e} of the moment root",
        seqs.len(),
        seen[0],
        seen[1],
        seen[2],
        bracket_notes.join(", ")
    ))
}

/// Root in `(0, 1)` of `2 E_2(p) - m(p)² = 1`, both moments linear in `p`.
fn quadratic_p_c(b0: &WeightSequence, b1: &WeightSequence) -> Result<Float, String> {
    let mom = |ws: &WeightSequence| -> Result<(Float, Float), String> {
        let m = ws.moments(PREC).map_err(err)?;
        let mean = m.m.finite().cloned().ok_or("infinite mean")?;
        let var = m.sigma2.finite().cloned().ok_or("infinite variance")?;
        let e2 = Float::with_val(PREC, &var + Float::with_val(PREC, &mean * &mean));
        Ok((mean, e2))
    };
    let (m0, e0) = mom(b0)?;
    let (m1, e1) = mom(b1)?;
    let dm = Float::with_val(PREC, &m1 - &m0);
    let de = Float::with_val(PREC, &e1 - &e0);
    // -dm² p² + 2(de - m0 dm) p + (2 e0 - m0² - 1) = 0
    let a = -Float::with_val(PREC, &dm * &dm);
    let b = (de - Float::with_val(PREC, &m0 * &dm)) * 2u32;
    let c = Float::with_val(PREC, &e0 * 2u32) - Float::with_val(PREC, &m0 * &m0) - 1u32;
    let disc = Float::with_val(PREC, &b * &b) - Float::with_val(PREC, &a * &c) * 4u32;
    let sq = disc.sqrt();
    let two_a = Float::with_val(PREC, &a * 2u32);
    [Float::with_val(PREC, &sq - &b) / &two_a, -(Float::with_val(PREC, &b + &sq)) / &two_a]
        .into_iter()
        .find(|r| *r > 0 && *r < 1)
        .ok_or_else(|| "no root in (0, 1)".to_string())
}

fn exponent_algebra() -> Outcome {
    for a in [q(21, 10), q(5, 2), q(29, 10), q(3, 1)] {
        let e = Exponents::new(&a);
        check(e.first_scaling_relation(), format!("β0 = (γ0 - β1)θ fails at α = {a}"))?;
        check(e.second_scaling_relation(), format!("γ1 = γ0 - 1/θ fails at α = {a}"))?;
    }
    let e3 = Exponents::new(&q(3, 1)).as_tuple();
    check(e3 == [q(3, 2), q(-1, 2), q(3, 2), q(-3, 2), q(1, 2)], format!("α = 3 tuple {e3:?}"))?;
    Ok("scaling relations exact for α ∈ {2.1, 2.5, 2.9, 3}; α = 3 tuple (3/2, -1/2, 3/2, -3/2, 1/2)".into())
}

fn scaling_function() -> Outcome {
    let mut worst: f64 = 0.0;
    for a in [q(5, 2), q(3, 1)] {
        for l in [0.5, 1.0, 2.0, 5.0] {
            let lam = Float::with_val(PREC, l);
            let x = double_sum(&a, &lam, IALPHA_SUM_TOL).map_err(err)?;
            let y = c_form(&a, &lam, IALPHA_SUM_TOL).map_err(err)?;
            check(x.converged && y.converged, format!("α = {a}, λ = {l}: series did not converge"))?;
            let rel = Float::with_val(PREC, Float::with_val(PREC, &x.value - &y.value) / &y.value).abs().to_f64();
            check(rel < IALPHA_REL, format!("α = {a}, λ = {l}: relative gap {rel:e}"))?;
            worst = worst.max(rel);
        }
    }
    // One-term law at λ = 50 for α = 3. For α = 5/2 the first correction
    // c_1/λ is -3.8% at λ = 50, so there the two-term law is checked at
    // λ = 50 and the one-term law where c_1/λ is below the tolerance.
    let mut tails = Vec::new();
    for (a, one_term_lambda) in [(q(3, 1), TAIL_LAMBDA), (q(5, 2), TAIL_LAMBDA_SLOW)] {
        let e = Exponents::new(&a);
        let k = tail_constant(&a, PREC);
        let c1 = tail_first_correction(&a, PREC);
        let scaled_at = |l: f64| -> Result<Float, String> {
            let lam = Float::with_val(PREC, l);
            let v = double_sum(&a, &lam, IALPHA_SUM_TOL).map_err(err)?.value;
            Ok(v * Float::with_val(PREC, lam.pow(&Float::with_val(PREC, Rational::from(&e.beta0 + 1u32)))))
        };
        let one = (scaled_at(one_term_lambda)? / &k).to_f64();
        check((one - 1.0).abs() < TAIL_REL, format!("α = {a}: tail ratio {one} at λ = {one_term_lambda}"))?;
        let two_term = Float::with_val(PREC, &k * (Float::with_val(PREC, &c1 / TAIL_LAMBDA) + 1u32));
        let two = (scaled_at(TAIL_LAMBDA)? / two_term).to_f64();
        check((two - 1.0).abs() < TAIL_REL, format!("α = {a}: two-term tail ratio {two} at λ = {TAIL_LAMBDA}"))?;
        tails.push(format!("α = {a}: {one:.4} at λ = {one_term_lambda}, two-term {two:.5} at λ = {TAIL_LAMBDA}"));
    }
    Ok(format!("two series agree to {worst:.1e}; tail law {}", tails.join("; ")))
}


/// Ratios approach 1 monotonically and end within `tol`.
fn monotone_to_one(ratios: &[f64], tol: f64) -> bool {
    let dist: Vec<f64> = ratios.iter().map(|r| (r - 1.0).abs()).collect();
    dist.windows(2).all(|w| w[1] <= w[0]) && dist.last().is_some_and(|&d| d < tol)
}

fn fmt_ratios(t: &Table) -> String {
    t.ratios().iter().map(|r| format!("{r:.4}")).collect::<Vec<_>>().join(" ")
}

fn univariate_asymptotics() -> Outcome {
    let ws = WeightSequence::polynomial_i64(&[1, 1, 1]);
    let rep = classify(&ws, PREC, Exec::Parallel).map_err(err)?;
    check(rep.refinement == Refinement::GenericPlus, format!("refinement {:?}", rep.refinement))?;
    let c = constants(&ws, &rep).map_err(err)?;
    let ns: Vec<usize> = (200..=400).step_by(25).collect();
    let x = predict_and_compare(&ws, &c, Regime::X, &ns, &[0], None, Exec::Parallel).map_err(err)?;
    let sx = x.slope.ok_or("no x slope")?;
    check((sx - x.expected_slope).abs() < SLOPE_X_TOL, format!("x slope {sx} vs {}", x.expected_slope))?;
    check(monotone_to_one(&x.ratios(), AMPLITUDE_TOL), format!("x ratios {}", fmt_ratios(&x)))?;
    let ps: Vec<usize> = (64..=256).step_by(32).collect();
    let y = predict_and_compare(&ws, &c, Regime::YFixed, &[], &ps, None, Exec::Parallel).map_err(err)?;
    let sy = y.slope.ok_or("no y slope")?;
    check((sy - y.expected_slope).abs() < SLOPE_Y_TOL, format!("y slope {sy} vs {}", y.expected_slope))?;
    check(monotone_to_one(&y.ratios(), AMPLITUDE_TOL), format!("y ratios {}", fmt_ratios(&y)))?;
    Ok(format!(
        "slopes {sx:.4} (n in [200,400]) and {sy:.4} (p in [64,256]), expected -2.5; top ratios {:.4}, {:.4}",
        x.ratios().last().unwrap(),
        y.ratios().last().unwrap()
    ))
}

fn bivariate_regime() -> Outcome {
    let ws = WeightSequence::polynomial_i64(&[1, 1, 1]);
    let rep = classify(&ws, PREC, Exec::Parallel).map_err(err)?;
    let c = constants(&ws, &rep).map_err(err)?;
    check(c.exponents.alpha == 3, "alpha != 3".into())?;
    let t = predict_and_compare(&ws, &c, Regime::Bivariate, &[], &[8, 10, 12, 14], Some(1.0), Exec::Parallel)
        .map_err(err)?;
    check(monotone_to_one(&t.ratios(), BIVARIATE_TOL), format!("ratios {}", fmt_ratios(&t)))?;
    Ok(format!("trend test, v = 1, p = 8..14: ratios {}", fmt_ratios(&t)))
}

fn monte_carlo() -> Outcome {
    let ws = half_zero_half();
    let cfg = McConfig { samples: MC_SAMPLES, seed: MC_SEED, n_max: 5, p_max: 4, size_cap: DEFAULT_SIZE_CAP };
    let rep = gw_parking_mc(&ws, &cfg, Exec::Parallel).map_err(err)?;
    let exact = enumerate_fnp(&ws, 5, ITERATION_BUDGET, Exec::Parallel).map_err(err)?;
    let mut worst: f64 = 0.0;
    for cell in &rep.cells {
        let p = exact_probability(&exact.get(cell.n, cell.p), cell.n).to_f64();
        let gap = (cell.probability - p).abs();
        if cell.std_error == 0.0 {
            check(gap == 0.0, format!("cell ({}, {}): empty but exact {p}", cell.n, cell.p))?;
            continue;
        }
        let z = gap / cell.std_error;
        check(z <= MC_SIGMAS, format!("cell ({}, {}): {z:.2} standard errors", cell.n, cell.p))?;
        worst = worst.max(z);
    }
    // reproducibility across execution modes on a smaller run
    let small = McConfig { samples: 200_000, ..cfg.clone() };
    let a = gw_parking_mc(&ws, &small, Exec::Parallel).map_err(err)?;
    let b = gw_parking_mc(&ws, &small, Exec::Sequential).map_err(err)?;
    check(
        serde_json::to_string(&a).map_err(err)? == serde_json::to_string(&b).map_err(err)?,
        "parallel and sequential runs differ".into(),
    )?;
    Ok(format!(
        "{} cells within {MC_SIGMAS} SE (worst {worst:.2}), {} censored, seed-reproducible",
        rep.cells.len(),
        rep.censored
    ))
}

fn bounds_and_positivity() -> Outcome {
    let mut notes = Vec::new();
    for a in [2.25, 2.5, 2.75, 3.0] {
        let s = sandwich(&Float::with_val(128, a), 40, 25, SANDWICH.0, SANDWICH.1, Exec::Parallel);
        check(s.pass, format!("α = {a}: ratios in [{}, {}]", s.min_ratio, s.max_ratio))?;
        notes.push(format!("[{:.3}, {:.3}]", s.min_ratio, s.max_ratio));
    }
    let base = half_zero_half();
    let mut mus = Vec::new();
    for end in [polylog(q(1, 10), q(7, 2)), polylog(q(1, 5), q(7, 2)), polylog(q(1, 10), q(19, 5))] {
        let t = tune_to_dilute(&base, &end, PREC).map_err(err)?;
        let ws = mixture(&base, &end, &t.p_c_exact);
        let rep = classify(&ws, PREC, Exec::Parallel).map_err(err)?;
        check(rep.refinement == Refinement::DiluteMinus, format!("refinement {:?}", rep.refinement))?;
        let c = constants(&ws, &rep).map_err(err)?;
        check(c.mu > 0, format!("mu = {}", c.mu))?;
        mus.push(format!("{:.5}", c.mu.to_f64()));
    }
    Ok(format!("H_α/|(S,t)|^(α-2) over 1000 points: {}; dilute mu = {}", notes.join(" "), mus.join(", ")))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("oracle equivalence", oracle_equivalence),
        ("parametrization round-trip", parametrization_round_trip),
        ("identity suite", identity_suite_exact),
        ("phase routes", phase_routes),
        ("exponent algebra", exponent_algebra),
        ("scaling function I_alpha", scaling_function),
        ("univariate asymptotics", univariate_asymptotics),
        ("bivariate regime", bivariate_regime),
        ("Monte Carlo parking", monte_carlo),
        ("H_alpha sandwich and mu > 0", bounds_and_positivity),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = run();
        let secs = start.elapsed().as_secs_f64();
        match out {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} [{secs:.1}s]", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
