//! Phase classification and the critical point `(x_c, Y_c)`.
//!
//! `x̂'` has the sign of `N(Y) = (B - Y B')² - 2 Y² B B''`. The model is
//! generic when `N` changes sign inside `(0, ρ)` (always the case if `ρ = ∞`
//! or `B''(ρ) = ∞`), dilute when `N(ρ) = 0` and dense when `N(ρ) > 0`.

use rug::{Float, Rational};
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::exec::Exec;
use crate::genfun::eval::Local;
use crate::genfun::GenfunError;
use crate::scalar::{render_float, Extended};
use crate::weights::{Radius, WeightError, WeightSequence};

/// `|N(ρ)|` below this (relative to `B(ρ)²`) is treated as zero.
pub const MARGINAL_TOLERANCE: f64 = 1e-20;
/// Points in the uniqueness scan of `x̂'` on `(0, ρ)`.
pub const GRID_POINTS: usize = 10_000;

#[derive(Debug, Error)]
pub enum PhaseError {
    #[error(transparent)]
    Weights(#[from] WeightError),
    #[error(transparent)]
    Genfun(#[from] GenfunError),
    #[error("no sign change of x̂' found on (0, rho) although the phase is generic")]
    NoSignChange,
    #[error("{0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, PhaseError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Phase {
    Generic,
    NonGenericDilute,
    NonGenericDense,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Refinement {
    GenericPlus,
    DiluteMinus,
    DenseOutOfScope,
}

fn ser_float<S: Serializer>(x: &Float, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&render_float(x))
}

fn ser_opt_rational<S: Serializer>(x: &Option<Rational>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match x {
        Some(q) => s.serialize_str(&q.to_string()),
        None => s.serialize_none(),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Diagnostics {
    /// `x̂'(ρ)`, `"-inf"` when `B''(ρ) = ∞`, absent when `ρ = ∞`.
    pub xhat_prime_at_rho: Option<String>,
    pub bpp_at_rho: Option<String>,
    pub bppp_at_rho: Option<String>,
    /// `2σ² + m²` when `b` is a probability distribution with finite mass.
    pub criterion_2s2m2: Option<String>,
    /// The dilute label was decided inside the marginal tolerance.
    pub marginal: bool,
    /// `x̂'(Y_c)` in the generic phase.
    pub xhat_prime_at_yc: Option<String>,
    /// `x̂''(Y_c) < 0`, checked whenever `Y_c < ρ`.
    pub second_derivative_negative: Option<bool>,
    /// Sign changes of `x̂'` seen on the uniqueness grid.
    pub grid_sign_changes: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PhaseReport {
    pub weights: String,
    pub phase: Phase,
    pub refinement: Refinement,
    pub rho: String,
    #[serde(serialize_with = "ser_float")]
    pub y_c: Float,
    #[serde(serialize_with = "ser_float")]
    pub x_c: Float,
    /// 3 in the generic⁺ phase, `α̃` in the dilute⁻ phase.
    #[serde(serialize_with = "ser_opt_rational")]
    pub alpha: Option<Rational>,
    pub diagnostics: Diagnostics,
}

/// `N(Y)` using only `B, B', B''`; `None` when `B''(Y) = ∞`.
fn numerator(ws: &WeightSequence, y: &Float) -> Result<Option<Float>> {
    let p = y.prec();
    let fin = |k| -> Result<Option<Float>> { Ok(ws.eval(y, k)?.finite().cloned()) };
    let (Some(b), Some(b1)) = (fin(0)?, fin(1)?) else {
        return Err(PhaseError::Precondition(format!("B or B' infinite at {}", y.to_f64())));
    };
    let Some(b2) = fin(2)? else { return Ok(None) };
    let bm = Float::with_val(p, &b - Float::with_val(p, y * &b1));
    let t = Float::with_val(p, y * y) * &b * &b2 * 2u32;
    Ok(Some(Float::with_val(p, &bm * &bm) - t))
}

fn sign_of(n: &Option<Float>) -> i32 {
    match n {
        None => -1,
        Some(v) if v.is_zero() => 0,
        Some(v) if v.is_sign_negative() => -1,
        Some(_) => 1,
    }
}

/// Local data at `ρ`, using left limits when `ρ` is the radius of `ws`.
fn local_at_rho(ws: &WeightSequence, rho: &Rational, prec: u32) -> Result<Local> {
    let own = ws.radius() == Radius::Finite(rho.clone());
    let y = Float::with_val(prec, rho);
    let d = |k| if own { ws.eval_at_rho(k, prec) } else { ws.eval(&y, k).unwrap_or(Extended::NotComputed) };
    let need = |e: Extended<Float>, what: &str| {
        e.finite().cloned().ok_or_else(|| PhaseError::Precondition(format!("{what} is infinite at rho")))
    };
    Ok(Local { y: Float::with_val(prec, rho), b: need(d(0), "B")?, b1: need(d(1), "B'")?, b2: d(2), b3: d(3) })
}

/// Root of `x̂'` in `(0, ρ)` by bisection on `N`, to full working precision.
pub fn find_root(ws: &WeightSequence, prec: u32) -> Result<Float> {
    let mut lo = Float::new(prec);
    let mut hi = None;
    match ws.radius() {
        Radius::Infinite => {
            let mut t = Float::with_val(prec, 1u32);
            for _ in 0..400 {
                if sign_of(&numerator(ws, &t)?) < 0 {
                    hi = Some(t);
                    break;
                }
                lo = t.clone();
                t *= 2u32;
            }
        }
        Radius::Finite(rho) => {
            let rho = Float::with_val(prec, &rho);
            for k in 1..prec as i32 {
                let t = Float::with_val(prec, &rho * (1 - Float::with_val(prec, Float::i_exp(1, -k))));
                if sign_of(&numerator(ws, &t)?) < 0 {
                    hi = Some(t);
                    break;
                }
                lo = t;
            }
        }
    }
    let mut hi = hi.ok_or(PhaseError::NoSignChange)?;
    let eps = Float::with_val(prec, Float::i_exp(1, -(prec as i32) + 2));
    loop {
        let width = Float::with_val(prec, &hi - &lo);
        if width <= Float::with_val(prec, &hi * &eps) {
            break;
        }
        let mid = Float::with_val(prec, &lo + &hi) / 2u32;
        if mid <= lo || mid >= hi {
            break;
        }
        match sign_of(&numerator(ws, &mid)?) {
            0 => return Ok(mid),
            s if s > 0 => lo = mid,
            _ => hi = mid,
        }
    }
    Ok(Float::with_val(prec, &lo + &hi) / 2u32)
}

/// `(Y_c, x_c)` for a classified sequence.
pub fn find_yc_xc(ws: &WeightSequence, phase: Phase, prec: u32) -> Result<(Float, Float)> {
    match (phase, ws.radius()) {
        (Phase::Generic, _) => {
            let yc = find_root(ws, prec)?;
            let xc = Local::at(ws, &yc)?.xhat();
            Ok((yc, xc))
        }
        (_, Radius::Finite(rho)) => {
            let local = local_at_rho(ws, &rho, prec)?;
            Ok((local.y.clone(), local.xhat()))
        }
        (_, Radius::Infinite) => Err(PhaseError::Precondition("non-generic phase with rho = inf".into())),
    }
}

/// Counts sign changes of `N` on an equispaced grid over `(0, top)` at 64 bits.
pub fn grid_sign_changes(ws: &WeightSequence, top: &Float, points: usize, exec: Exec) -> Result<usize> {
    let top = Float::with_val(64, top);
    let signs = exec.map_collect(1..points + 1, |i| {
        // stay strictly inside (0, top): the last point is top·(1 - 1/(2 points))
        let t = Float::with_val(64, &top * (2 * i - 1) as u32) / (2 * points) as u32;
        numerator(ws, &t).map(|n| sign_of(&n))
    });
    let signs = signs.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(signs.windows(2).filter(|w| w[0] * w[1] < 0 || (w[0] != 0 && w[1] == 0)).count())
}

/// Classifies `ws`, locates the critical point and runs the uniqueness checks.
pub fn classify(ws: &WeightSequence, prec: u32, exec: Exec) -> Result<PhaseReport> {
    ws.validate()?;
    let mut diag = Diagnostics {
        xhat_prime_at_rho: None,
        bpp_at_rho: None,
        bppp_at_rho: None,
        criterion_2s2m2: None,
        marginal: false,
        xhat_prime_at_yc: None,
        second_derivative_negative: None,
        grid_sign_changes: None,
    };
    if let Ok(c) = probabilistic_criterion(ws, prec) {
        diag.criterion_2s2m2 = Some(c.value.render());
    }
    let rho = ws.radius();
    let mut phase = Phase::Generic;
    if let (Radius::Finite(_), true) = (&rho, ws.eval_at_rho(2, prec).is_infinite()) {
        diag.bpp_at_rho = Some("inf".into());
        diag.xhat_prime_at_rho = Some("-inf".into());
    } else if let Radius::Finite(r) = &rho {
        let local = local_at_rho(ws, r, prec)?;
        diag.bpp_at_rho = Some(local.b2.render());
        diag.bppp_at_rho = Some(local.b3.render());
        match local.xhat_prime_numerator() {
            None => diag.xhat_prime_at_rho = Some("-inf".into()),
            Some(n) => {
                diag.xhat_prime_at_rho = local.xhat_prime().map(|v| render_float(&v));
                let scale = Float::with_val(prec, &local.b * &local.b);
                let rel = Float::with_val(prec, n.clone().abs() / &scale);
                phase = if rel < MARGINAL_TOLERANCE {
                    diag.marginal = !n.is_zero();
                    Phase::NonGenericDilute
                } else if n.is_sign_negative() {
                    Phase::Generic
                } else {
                    Phase::NonGenericDense
                };
            }
        }
    }
    let (y_c, x_c) = find_yc_xc(ws, phase, prec)?;
    let (refinement, alpha) = match phase {
        Phase::Generic => (Refinement::GenericPlus, Some(Rational::from(3))),
        Phase::NonGenericDense => (Refinement::DenseOutOfScope, None),
        Phase::NonGenericDilute => {
            let sd = ws.singular_data(prec);
            if sd.derivs_at_rho[3].finite().is_some() {
                (Refinement::GenericPlus, Some(Rational::from(3)))
            } else {
                let a = sd.alpha_tilde.ok_or_else(|| {
                    PhaseError::Precondition("B'''(rho) = inf without an algebraic singular term".into())
                })?;
                (Refinement::DiluteMinus, Some(a))
            }
        }
    };
    if phase == Phase::Generic {
        let local = Local::at(ws, &y_c)?;
        diag.xhat_prime_at_yc = local.xhat_prime().map(|v| render_float(&v));
        diag.second_derivative_negative = local.xhat_second().map(|v| v.is_sign_negative());
        let top = match &rho {
            Radius::Finite(r) => Float::with_val(prec, r),
            Radius::Infinite => Float::with_val(prec, &y_c * 4u32),
        };
        diag.grid_sign_changes = Some(grid_sign_changes(ws, &top, GRID_POINTS, exec)?);
    }
    Ok(PhaseReport {
        weights: ws.describe(),
        phase,
        refinement,
        rho: rho.to_string(),
        y_c,
        x_c,
        alpha,
        diagnostics: diag,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Criterion {
    /// `2σ² + m²`.
    #[serde(serialize_with = "ser_extended")]
    pub value: Extended<Float>,
    pub decisive: bool,
    pub predicted: Option<Phase>,
    pub note: String,
}

fn ser_extended<S: Serializer>(x: &Extended<Float>, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&x.render())
}

/// The moment criterion: for a probability distribution,
/// `N(1) = 1 - m² - 2σ²`, so `x̂'(1)` is negative iff `2σ² + m² > 1`.
///
/// With `ρ = 1` this decides the phase. With `ρ > 1` only `2σ² + m² > 1`
/// (root inside `(0, 1)`) is conclusive.
pub fn probabilistic_criterion(ws: &WeightSequence, prec: u32) -> Result<Criterion> {
    if !ws.is_probability(prec) {
        return Err(PhaseError::Precondition("b is not a probability distribution".into()));
    }
    let mom = ws.moments(prec)?;
    let value = match (&mom.m, &mom.sigma2) {
        (Extended::Finite(m), Extended::Finite(s2)) => {
            Extended::Finite(Float::with_val(prec, s2 * 2u32) + Float::with_val(prec, m * m))
        }
        _ => Extended::PosInfinity,
    };
    let rho_is_one = ws.radius() == Radius::Finite(Rational::from(1));
    let label = match &value {
        Extended::Finite(v) => {
            let d = Float::with_val(prec, v - 1u32);
            if d.clone().abs() < MARGINAL_TOLERANCE {
                Phase::NonGenericDilute
            } else if d.is_sign_positive() {
                Phase::Generic
            } else {
                Phase::NonGenericDense
            }
        }
        _ => Phase::Generic,
    };
    let decisive = rho_is_one || label == Phase::Generic;
    let note = if decisive {
        "decisive".to_string()
    } else {
        "criterion not decisive: rho > 1 and 2s^2+m^2 <= 1 allows any phase".to_string()
    };
    Ok(Criterion { value, decisive, predicted: decisive.then_some(label), note })
}

#[derive(Clone, Debug, Serialize)]
pub struct Tuning {
    pub p_c: String,
    /// `N(ρ)` of the mixture at `p_c`.
    pub residual: String,
    #[serde(skip)]
    pub p_c_exact: Rational,
}

/// The mixture `(1 - p) b⁰ + p b¹`.
pub fn mixture(b0: &WeightSequence, b1: &WeightSequence, p: &Rational) -> WeightSequence {
    WeightSequence::Mixture(vec![(Rational::from(1 - p), b0.clone()), (p.clone(), b1.clone())])
}

/// Finds `p_c` with `ws(p_c)` dilute by bisection on the sign of `N(ρ)`.
///
/// `B^{(k)}(ρ)` is linear in `p`, so the endpoint values are computed once.
/// The bracket is shrunk to full precision and `p_c` returned as the exact
/// rational value of the final float.
pub fn tune_to_dilute(b0: &WeightSequence, b1: &WeightSequence, prec: u32) -> Result<Tuning> {
    let Radius::Finite(rho) = b0.radius().min(b1.radius()) else {
        return Err(PhaseError::Precondition("the mixture must have finite rho".into()));
    };
    let l0 = local_at_rho(b0, &rho, prec)?;
    let l1 = local_at_rho(b1, &rho, prec)?;
    let (Some(_), Some(_)) = (l0.b2.finite(), l1.b2.finite()) else {
        return Err(PhaseError::Precondition("B''(rho) must be finite at both endpoints".into()));
    };
    let at = |p: &Float| -> Local {
        let q = Float::with_val(prec, 1u32 - p);
        let mix = |a: &Float, b: &Float| Float::with_val(prec, a * &q) + Float::with_val(prec, b * p);
        let mix_ext = |a: &Extended<Float>, b: &Extended<Float>| match (a, b) {
            (Extended::Finite(a), Extended::Finite(b)) => Extended::Finite(mix(a, b)),
            _ => Extended::PosInfinity,
        };
        Local {
            y: l0.y.clone(),
            b: mix(&l0.b, &l1.b),
            b1: mix(&l0.b1, &l1.b1),
            b2: mix_ext(&l0.b2, &l1.b2),
            b3: mix_ext(&l0.b3, &l1.b3),
        }
    };
    let mut lo = Float::new(prec);
    let mut hi = Float::with_val(prec, 1u32);
    if at(&lo).xhat_prime_sign() >= 0 || at(&hi).xhat_prime_sign() <= 0 {
        return Err(PhaseError::Precondition("ws(0) must be generic and ws(1) dense".into()));
    }
    loop {
        let mid = Float::with_val(prec, &lo + &hi) / 2u32;
        if mid <= lo || mid >= hi {
            break;
        }
        match at(&mid).xhat_prime_sign() {
            0 => {
                lo = mid.clone();
                hi = mid;
                break;
            }
            s if s < 0 => lo = mid,
            _ => hi = mid,
        }
    }
    let p_c = Float::with_val(prec, &lo + &hi) / 2u32;
    let residual = at(&p_c).xhat_prime_numerator().expect("finite endpoints");
    Ok(Tuning { p_c: render_float(&p_c), residual: render_float(&residual), p_c_exact: p_c.to_rational().expect("finite") })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::B0;

    fn q(a: i64, b: i64) -> Rational {
        Rational::from((a, b))
    }

    fn polylog(c: Rational, beta: Rational) -> WeightSequence {
        WeightSequence::Polylog { c, r: q(1, 1), beta, b0: B0::Normalize }
    }

    #[test]
    fn polynomial_is_generic() {
        let ws = WeightSequence::polynomial_i64(&[1, 0, 1]);
        let r = classify(&ws, 128, Exec::Sequential).unwrap();
        assert_eq!(r.phase, Phase::Generic);
        assert_eq!(r.refinement, Refinement::GenericPlus);
        assert_eq!(r.diagnostics.second_derivative_negative, Some(true));
        assert_eq!(r.diagnostics.grid_sign_changes, Some(1));
        // N(Y) = (1 - Y²)² - 4Y²(1 + Y²), i.e. 1 - 6Y² - 3Y⁴, so Y_c² = 2/√3 - 1
        let expect = Float::with_val(128, 4u32 / Float::with_val(128, 3u32)).sqrt() - 1u32;
        assert!(Float::with_val(128, Float::with_val(128, &r.y_c * &r.y_c) - expect).abs() < 1e-30);
        let local = Local::at(&ws, &r.y_c).unwrap();
        assert!(local.xhat_prime().unwrap().abs() < 1e-30);
    }

    #[test]
    fn geometric_pole_is_generic() {
        let ws = WeightSequence::Geometric { c: q(1, 2), p: q(1, 2) };
        let r = classify(&ws, 128, Exec::Sequential).unwrap();
        assert_eq!(r.phase, Phase::Generic);
        assert_eq!(r.diagnostics.xhat_prime_at_rho.as_deref(), Some("-inf"));
        assert!(r.y_c < 2);
    }

    #[test]
    fn criterion_examples() {
        let ws = WeightSequence::Polynomial(vec![q(1, 2), q(0, 1), q(1, 2)]);
        let c = probabilistic_criterion(&ws, 128).unwrap();
        assert_eq!(c.value.finite().unwrap().to_f64(), 3.0);
        assert_eq!(c.predicted, Some(Phase::Generic));
        // infinite variance
        let heavy = polylog(q(1, 2), q(5, 2));
        assert_eq!(probabilistic_criterion(&heavy, 128).unwrap().predicted, Some(Phase::Generic));
    }

    #[test]
    fn moment_simplification_matches_direct_sign() {
        // for B(1) = 1: N(1) = 1 - m² - 2σ²
        for ws in [
            WeightSequence::Polynomial(vec![q(1, 2), q(0, 1), q(1, 2)]),
            WeightSequence::Polynomial(vec![q(1, 3), q(1, 3), q(1, 3)]),
            WeightSequence::Polynomial(vec![q(7, 10), q(1, 5), q(1, 10)]),
        ] {
            let c = probabilistic_criterion(&ws, 128).unwrap();
            let n = numerator(&ws, &Float::with_val(128, 1)).unwrap().unwrap();
            let expect = 1 - c.value.finite().unwrap().clone();
            assert!(Float::with_val(128, n - expect).abs() < 1e-30);
        }
    }

    #[test]
    fn dense_and_tuned_dilute() {
        let b0 = WeightSequence::Polynomial(vec![q(1, 2), q(0, 1), q(1, 2)]);
        let b1 = polylog(q(1, 10), q(7, 2));
        let dense = classify(&b1, 128, Exec::Sequential).unwrap();
        assert_eq!(dense.phase, Phase::NonGenericDense);
        assert_eq!(dense.refinement, Refinement::DenseOutOfScope);
        let t = tune_to_dilute(&b0, &b1, 128).unwrap();
        let ws = mixture(&b0, &b1, &t.p_c_exact);
        let r = classify(&ws, 128, Exec::Sequential).unwrap();
        assert_eq!(r.phase, Phase::NonGenericDilute);
        assert_eq!(r.refinement, Refinement::DiluteMinus);
        assert_eq!(r.alpha, Some(q(5, 2)));
        assert_eq!(r.y_c, 1);
    }

    #[test]
    fn scaling_invariance() {
        let ws = WeightSequence::polynomial_i64(&[1, 1, 1]);
        let a = classify(&ws, 128, Exec::Sequential).unwrap();
        let b = classify(&ws.equivalent(&q(3, 2), &q(2, 5)), 128, Exec::Sequential).unwrap();
        assert_eq!(a.phase, b.phase);
        // Y_c scales by 1/r
        let ratio = Float::with_val(128, &b.y_c * q(2, 5)) / &a.y_c;
        assert!(Float::with_val(128, ratio - 1u32).abs() < 1e-30);
    }
}
