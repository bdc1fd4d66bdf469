//! Config to predictions, on both implemented phases.

use fpt::asymptotics::predict::{g_series, predict_and_compare, predict_g, Regime};
use fpt::asymptotics::{constants, AsymptoticsError};
use fpt::exec::Exec;
use fpt::phase::{classify, mixture, tune_to_dilute, Phase, Refinement};
use fpt::weights::config;
use rug::Float;

const PREC: u32 = 256;

fn cfg(text: &str) -> fpt::WeightSequence {
    config::parse(text).unwrap()
}

#[test]
fn dilute_minus_predictions_converge() {
    let base = cfg("family = \"polynomial\"\ncoeffs = [0.5, 0, 0.5]\n");
    let dense = cfg("family = \"polylog\"\nc = 0.1\nbeta = 3.5\n");
    let t = tune_to_dilute(&base, &dense, PREC).unwrap();
    let ws = mixture(&base, &dense, &t.p_c_exact);
    let rep = classify(&ws, PREC, Exec::Parallel).unwrap();
    assert_eq!(rep.refinement, Refinement::DiluteMinus);
    let c = constants(&ws, &rep).unwrap();
    // the closed form and the slashed-derivative form of mu coincide
    let gap = Float::with_val(PREC, &c.mu - &c.mu_symbolic).abs();
    assert!(gap < 1e-40);
    let y = predict_and_compare(&ws, &c, Regime::YFixed, &[], &[32, 64, 128, 256], None, Exec::Parallel).unwrap();
    let r = y.ratios();
    assert!(r.windows(2).all(|w| (w[1] - 1.0).abs() < (w[0] - 1.0).abs()), "{r:?}");
    assert!((r[3] - 1.0).abs() < 0.03);
    assert!((y.slope.unwrap() - y.expected_slope).abs() < 0.05);
    let g = g_series(&ws, &c, 256).unwrap();
    let ratio = Float::with_val(PREC, &g[256] / predict_g(&c, 256)).to_f64();
    assert!((ratio - 1.0).abs() < 0.02, "{ratio}");
}

#[test]
fn generic_x_regime_and_amplitude() {
    let ws = cfg("family = \"polynomial\"\ncoeffs = [1, 0, 1]\n");
    let rep = classify(&ws, PREC, Exec::Parallel).unwrap();
    let c = constants(&ws, &rep).unwrap();
    let t = predict_and_compare(&ws, &c, Regime::X, &[100, 200, 400], &[0, 2], None, Exec::Parallel).unwrap();
    // labels are 0 or 2, so F_{n,p} = 0 unless n ≡ p mod 2; the two
    // singularities ±x_c double the surviving coefficients
    for p in [0, 2] {
        let r: Vec<f64> = t.rows.iter().filter(|r| r.p == p).map(|r| r.ratio.to_f64()).collect();
        assert!(r.windows(2).all(|w| (w[1] - 2.0).abs() < (w[0] - 2.0).abs()), "p {p}: {r:?}");
        assert!((r[2] - 2.0).abs() < 0.1, "p {p}: {r:?}");
    }
}

#[test]
fn dense_phase_is_refused_end_to_end() {
    let ws = cfg("family = \"polylog\"\nc = 0.1\nbeta = 3.5\n");
    let rep = classify(&ws, 128, Exec::Parallel).unwrap();
    assert_eq!(rep.phase, Phase::NonGenericDense);
    let e = constants(&ws, &rep).unwrap_err();
    assert!(matches!(e, AsymptoticsError::DensePhase));
    assert_eq!(e.to_string(), "out of scope: dense phase");
}

#[test]
fn bivariate_without_v_is_an_error() {
    let ws = cfg("family = \"polynomial\"\ncoeffs = [1, 1, 1]\n");
    let rep = classify(&ws, PREC, Exec::Parallel).unwrap();
    let c = constants(&ws, &rep).unwrap();
    assert!(predict_and_compare(&ws, &c, Regime::Bivariate, &[], &[8], None, Exec::Sequential).is_err());
}
