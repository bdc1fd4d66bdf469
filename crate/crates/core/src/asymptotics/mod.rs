//! Non-universal constants, universal exponents, the scaling function
//! `I_α` and asymptotic predictions for the coefficients of `F`.

pub mod homogeneous;
pub mod ialpha;
pub mod predict;

use rug::{Float, Rational};
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::genfun::eval::Local;
use crate::genfun::GenfunError;
use crate::phase::{PhaseReport, Refinement};
use crate::scalar::render_float;
use crate::weights::{WeightError, WeightSequence};

#[derive(Debug, Error)]
pub enum AsymptoticsError {
    #[error("out of scope: dense phase")]
    DensePhase,
    #[error("sign convention violated: mu = {0} <= 0")]
    NonPositiveMu(String),
    #[error("{0}")]
    Precondition(String),
    #[error("lambda must be positive")]
    NonPositiveLambda,
    #[error(transparent)]
    Genfun(#[from] GenfunError),
    #[error(transparent)]
    Weights(#[from] WeightError),
    #[error(transparent)]
    Series(#[from] crate::powseries::SeriesError),
}

pub type Result<T> = std::result::Result<T, AsymptoticsError>;

pub(crate) fn ser_float<S: Serializer>(x: &Float, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&render_float(x))
}

fn ser_rational<S: Serializer>(x: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

/// The universal exponents, exact in `α`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Exponents {
    #[serde(serialize_with = "ser_rational")]
    pub alpha: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub gamma0: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub gamma1: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub beta0: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub beta1: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub theta: Rational,
}

impl Exponents {
    pub fn new(alpha: &Rational) -> Self {
        let a = alpha.clone();
        let am1 = Rational::from(&a - 1);
        Exponents {
            gamma0: Rational::from(&a / 2),
            gamma1: Rational::from(1 - Rational::from(&a / 2)),
            beta0: Rational::from(&a / &am1),
            beta1: Rational::from(-Rational::from(&a / 2)),
            theta: am1.recip(),
            alpha: a,
        }
    }

    pub fn as_tuple(&self) -> [Rational; 5] {
        [self.gamma0.clone(), self.gamma1.clone(), self.beta0.clone(), self.beta1.clone(), self.theta.clone()]
    }

    /// `β0 = (γ0 - β1)θ`
    pub fn first_scaling_relation(&self) -> bool {
        self.beta0 == Rational::from(&self.gamma0 - &self.beta1) * &self.theta
    }

    /// `γ1 = γ0 - 1/θ`
    pub fn second_scaling_relation(&self) -> bool {
        self.gamma1 == &self.gamma0 - self.theta.clone().recip()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AsymptoticConstants {
    pub exponents: Exponents,
    #[serde(serialize_with = "ser_float")]
    pub y_c: Float,
    #[serde(serialize_with = "ser_float")]
    pub x_c: Float,
    #[serde(serialize_with = "ser_float")]
    pub mu: Float,
    /// Closed-form `μ` used as a cross-check of the finite-difference value.
    #[serde(serialize_with = "ser_float")]
    pub mu_symbolic: Float,
    #[serde(serialize_with = "ser_float")]
    pub c_q: Float,
    #[serde(serialize_with = "ser_float")]
    pub c_f: Float,
    /// `½√(2μ/(α(1+ψ(Y_c))))`, which must equal `c_f`.
    #[serde(serialize_with = "ser_float")]
    pub c_f_direct: Float,
    pub method: String,
}

/// Local data at `Y_c`, taking left limits when `Y_c` sits at `ρ`.
pub fn local_at_critical(ws: &WeightSequence, y_c: &Float) -> Result<Local> {
    let prec = y_c.prec();
    let at_rho = match (ws.radius(), y_c.to_rational()) {
        (crate::weights::Radius::Finite(rho), Some(y)) => y >= rho,
        _ => false,
    };
    if !at_rho {
        return Ok(Local::at(ws, y_c)?);
    }
    let d = |k| ws.eval_at_rho(k, prec);
    let need = |k: u32| {
        d(k).finite().cloned().ok_or_else(|| AsymptoticsError::Precondition(format!("B^({k}) infinite at rho")))
    };
    Ok(Local { y: y_c.clone(), b: need(0)?, b1: need(1)?, b2: d(2), b3: d(3) })
}

/// `x̂''(Y)` by a central 5-point stencil with one Richardson step.
pub fn xhat_second_fd(ws: &WeightSequence, y: &Float, h: &Float) -> Result<Float> {
    let prec = y.prec();
    let stencil = |h: &Float| -> Result<Float> {
        let at = |k: i32| -> Result<Float> {
            let t = Float::with_val(prec, y + Float::with_val(prec, h * k));
            Ok(Local::at(ws, &t)?.xhat())
        };
        let num = Float::with_val(prec, at(1)? + at(-1)?) * 16u32 - Float::with_val(prec, at(2)? + at(-2)?)
            - Float::with_val(prec, at(0)? * 30u32);
        Ok(num / Float::with_val(prec, h * h) / 12u32)
    };
    let d_h = stencil(h)?;
    let d_half = stencil(&Float::with_val(prec, h / 2u32))?;
    Ok((d_half * 16u32 - d_h) / 15u32)
}

/// `μ`, `C_q` and `C_F` at the critical point of `report`.
///
/// Generic⁺ with `Y_c < ρ`: `μ = -(Y_c²/2) x̂''(Y_c)/x_c` from finite
/// differences, the symbolic `x̂''` serving as cross-check. Generic⁺ at
/// `Y_c = ρ` (dilute with `B'''(ρ) < ∞`) has no room for a central stencil
/// and uses the symbolic value. Dilute⁻: `μ = -2 α̃ C_B / D(Y_c)`.
pub fn constants(ws: &WeightSequence, report: &PhaseReport) -> Result<AsymptoticConstants> {
    let alpha = match (report.refinement, &report.alpha) {
        (Refinement::DenseOutOfScope, _) => return Err(AsymptoticsError::DensePhase),
        (_, Some(a)) => a.clone(),
        _ => return Err(AsymptoticsError::Precondition("missing alpha".into())),
    };
    let prec = report.y_c.prec();
    let (y_c, x_c) = (report.y_c.clone(), report.x_c.clone());
    let local = local_at_critical(ws, &y_c)?;
    let d = local.d();
    let y2_over = Float::with_val(prec, &y_c * &y_c) / 2u32 / &x_c;
    let (mu, mu_symbolic, method) = match report.refinement {
        Refinement::GenericPlus => {
            let sym = local
                .xhat_second()
                .ok_or_else(|| AsymptoticsError::Precondition("B''' infinite at Y_c".into()))?;
            let mu_sym = -Float::with_val(prec, &sym * &y2_over);
            let h = Float::with_val(prec, &y_c * 1e-6);
            let room = report.phase == crate::phase::Phase::Generic
                && ws.radius().finite().is_none_or(|rho| Float::with_val(prec, &y_c + Float::with_val(prec, &h * 2u32)) < *rho);
            if room {
                let fd = xhat_second_fd(ws, &y_c, &h)?;
                (-(fd * &y2_over), mu_sym, "finite-difference (Richardson), symbolic cross-check".to_string())
            } else {
                (mu_sym.clone(), mu_sym, "symbolic second derivative at rho".to_string())
            }
        }
        Refinement::DiluteMinus => {
            let sd = ws.singular_data(prec);
            let c_b = sd.c_b.ok_or_else(|| AsymptoticsError::Precondition("no singular constant C_B".into()))?;
            let at = Float::with_val(prec, &alpha);
            let mu = -(Float::with_val(prec, &at * &c_b) * 2u32 / &d);
            // the same value through the slashed U_1 derivative of x̂ at Y_c
            let du1 = -(Float::with_val(prec, &y_c * &y_c) * &local.b * 2u32 / Float::with_val(prec, &d * &d) / &d);
            let alt = Float::with_val(prec, &at * &c_b) / &y_c * du1 / &x_c;
            (mu, alt, "closed form -2 alpha C_B / D(Y_c)".to_string())
        }
        Refinement::DenseOutOfScope => unreachable!(),
    };
    if !mu.is_sign_positive() || mu.is_zero() {
        return Err(AsymptoticsError::NonPositiveMu(render_float(&mu)));
    }
    let a = Float::with_val(prec, &alpha);
    let c_q = Float::with_val(prec, &d * &mu) * 2u32 * &x_c / Float::with_val(prec, &a * &y_c);
    let c_f = Float::with_val(prec, c_q.sqrt_ref()) / 2u32;
    let one_psi = Float::with_val(prec, 1u32 + local.psi());
    let c_f_direct = Float::with_val(prec, Float::with_val(prec, &mu * 2u32) / (a * one_psi)).sqrt() / 2u32;
    Ok(AsymptoticConstants { exponents: Exponents::new(&alpha), y_c, x_c, mu, mu_symbolic, c_q, c_f, c_f_direct, method })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Exec;
    use crate::phase::classify;

    fn r(a: i64, b: i64) -> Rational {
        Rational::from((a, b))
    }

    #[test]
    fn exponent_examples() {
        let e = Exponents::new(&r(3, 1));
        assert_eq!(e.as_tuple(), [r(3, 2), r(-1, 2), r(3, 2), r(-3, 2), r(1, 2)]);
        let e = Exponents::new(&r(5, 2));
        assert_eq!(e.as_tuple(), [r(5, 4), r(-1, 4), r(5, 3), r(-5, 4), r(2, 3)]);
        assert_eq!(Rational::from(&e.theta * Rational::from(&e.alpha - 1)), 1);
    }

    #[test]
    fn generic_constants_are_consistent() {
        let ws = WeightSequence::polynomial_i64(&[1, 1, 1]);
        let rep = classify(&ws, 256, Exec::Sequential).unwrap();
        let c = constants(&ws, &rep).unwrap();
        let rel = |a: &Float, b: &Float| Float::with_val(256, Float::with_val(256, a - b) / b).abs().to_f64();
        assert!(rel(&c.mu, &c.mu_symbolic) < 1e-15, "{} vs {}", c.mu, c.mu_symbolic);
        assert!(rel(&c.c_f, &c.c_f_direct) < 1e-15);
        assert!(c.mu > 0);
    }

    #[test]
    fn dense_is_refused() {
        let ws = WeightSequence::Polylog { c: r(1, 10), r: r(1, 1), beta: r(7, 2), b0: crate::weights::B0::Normalize };
        let rep = classify(&ws, 128, Exec::Sequential).unwrap();
        assert!(matches!(constants(&ws, &rep), Err(AsymptoticsError::DensePhase)));
    }
}
