//! The scaling function `I_α(λ)` by two independent series.
//!
//! The double sum over `(p >= 0, q >= 1)` is the primary evaluator. The
//! second form expands `√(1 - α x^{α-1} + (α-1) x^α) = Σ c_n x^{σ_n}` and
//! sums `c_n λ^{-θσ_n - 1} / (Γ(σ_n - γ0) Γ(-θσ_n))`. Terms sitting on a
//! pole of a reciprocal gamma factor vanish exactly; the pole tests are done
//! on exact rationals.

use std::collections::BTreeMap;

use rug::ops::Pow;
use rug::{Float, Rational};
use serde::Serialize;

use super::{ser_float, AsymptoticsError, Exponents, Result};
use crate::special::{binom_rational, gamma, pi, rgamma_rational};

/// Stop once this many consecutive nonzero terms are below tolerance.
const QUIET_TERMS: usize = 4;

#[derive(Clone, Debug, Serialize)]
pub struct Evaluation {
    #[serde(serialize_with = "ser_float")]
    pub value: Float,
    /// Nonzero terms summed.
    pub terms: usize,
    /// Magnitude of the last term, relative to the largest term seen.
    pub last_relative: f64,
    pub converged: bool,
}

fn rat_f(q: &Rational, prec: u32) -> Float {
    Float::with_val(prec, q)
}

/// `λ^{-e}` for a rational `e`.
fn lambda_pow(lambda: &Float, e: &Rational) -> Float {
    let prec = lambda.prec();
    Float::with_val(prec, lambda.clone().pow(&rat_f(&Rational::from(-e), prec)))
}

/// `(α-1)/(2 Γ(-β0) Γ(-β1))`, the large-`λ` limit of `λ^{β0+1} I_α(λ)`.
pub fn tail_constant(alpha: &Rational, prec: u32) -> Float {
    let e = Exponents::new(alpha);
    let am1 = rat_f(&Rational::from(alpha - 1), prec);
    am1 / 2u32 * rgamma_rational(&Rational::from(-&e.beta0), prec) * rgamma_rational(&Rational::from(-&e.beta1), prec)
}

/// `c_1` in `λ^{β0+1} I_α(λ) = K (1 + c_1/λ + O(λ^{-2}))`, from the
/// `(p, q) = (1, 1)` term: `c_1 = -(α/2)(1 + β0) Γ(α/2) / Γ(3α/2 - 1)`.
///
/// At `λ = 50` this is `-2%` for `α = 3` and about `-3.8%` for `α = 5/2`.
pub fn tail_first_correction(alpha: &Rational, prec: u32) -> Float {
    let e = Exponents::new(alpha);
    let half_a = Rational::from(alpha / 2);
    let g = gamma(&rat_f(&half_a, prec)) * rgamma_rational(&Rational::from(Rational::from(alpha * 3u32) / 2u32 - 1u32), prec);
    -(rat_f(&half_a, prec) * rat_f(&Rational::from(&e.beta0 + 1u32), prec) * g)
}

/// The double sum
/// `Σ_{p,q} (-1)^{q+1}/(2√π) · Γ(p+q-½) / (Γ((α-1)p + α(q-½)) Γ(-p-β0 q))
///  · α^p (α-1)^q / (p! q!) · λ^{-(p+β0 q)-1}`.
pub fn double_sum(alpha: &Rational, lambda: &Float, tol: f64) -> Result<Evaluation> {
    if !lambda.is_sign_positive() || lambda.is_zero() {
        return Err(AsymptoticsError::NonPositiveLambda);
    }
    let prec = lambda.prec();
    let e = Exponents::new(alpha);
    let am1 = Rational::from(alpha - 1);
    let half = Rational::from((1, 2));
    let pref = Float::with_val(prec, pi(prec).sqrt() * 2u32).recip();
    let a_f = rat_f(alpha, prec);
    let am1_f = rat_f(&am1, prec);
    let mut total = Float::new(prec);
    let mut scale = Float::new(prec);
    let mut terms = 0;
    let mut last_rel = f64::INFINITY;
    let mut quiet_rows = 0;
    // α^p / p!
    let mut ap = Float::with_val(prec, 1u32);
    for p in 0..4000u32 {
        if p > 0 {
            ap *= &a_f;
            ap /= p;
        }
        let mut row_max = Float::new(prec);
        let mut quiet = 0;
        let mut prev = Float::with_val(prec, f64::INFINITY);
        // (α-1)^q / q!
        let mut bq = Float::with_val(prec, 1u32);
        for q in 1..20_000u32 {
            bq *= &am1_f;
            bq /= q;
            let pole = Rational::from(-Rational::from(p) - Rational::from(&e.beta0 * q));
            let rg2 = rgamma_rational(&pole, prec);
            if rg2.is_zero() {
                continue;
            }
            let g1 = gamma(&Float::with_val(prec, Float::with_val(prec, p + q) - 0.5f64));
            let arg1 = Rational::from(&am1 * p) + Rational::from(alpha * Rational::from(Rational::from(q) - &half));
            let rg1 = rgamma_rational(&arg1, prec);
            let expo = Rational::from(1u32 - &pole);
            let mut term = Float::with_val(prec, &pref * &g1) * &rg1 * &rg2 * &ap * &bq * lambda_pow(lambda, &expo);
            if q % 2 == 0 {
                term = -term;
            }
            total += &term;
            terms += 1;
            let mag = term.abs();
            if mag > scale {
                scale = mag.clone();
            }
            if mag > row_max {
                row_max = mag.clone();
            }
            let small = mag <= Float::with_val(prec, &scale * tol);
            quiet = if small && mag <= prev { quiet + 1 } else { 0 };
            prev = mag;
            if quiet >= QUIET_TERMS {
                break;
            }
        }
        let rel = if scale.is_zero() { 0.0 } else { Float::with_val(prec, &row_max / &scale).to_f64() };
        last_rel = rel;
        quiet_rows = if rel <= tol { quiet_rows + 1 } else { 0 };
        if quiet_rows >= QUIET_TERMS {
            return Ok(Evaluation { value: total, terms, last_relative: rel, converged: true });
        }
    }
    Ok(Evaluation { value: total, terms, last_relative: last_rel, converged: false })
}

/// Coefficients of `√(1 + u)`, `u = -α x^{α-1} + (α-1) x^α`, as an exact map
/// `σ ↦ c_σ`, complete for `σ < (α-1)(k_max+1)`.
///
/// `u^k = Σ_j binom(k,j) (-α)^{k-j} (α-1)^j x^{(α-1)k + j}`.
pub fn sqrt_expansion(alpha: &Rational, k_max: u32) -> BTreeMap<Rational, Rational> {
    let am1 = Rational::from(alpha - 1);
    let neg_a = Rational::from(-alpha);
    let half = Rational::from((1, 2));
    let mut out: BTreeMap<Rational, Rational> = BTreeMap::new();
    for k in 0..=k_max {
        let bk = binom_rational(&half, k);
        let mut binom_kj = Rational::from(1);
        for j in 0..=k {
            if j > 0 {
                binom_kj *= Rational::from(k - j + 1);
                binom_kj /= j;
            }
            let c = Rational::from(&bk * &binom_kj) * pow_q(&neg_a, k - j) * pow_q(&am1, j);
            let sigma = Rational::from(&am1 * k) + j;
            *out.entry(sigma).or_default() += c;
        }
    }
    out
}

fn pow_q(q: &Rational, k: u32) -> Rational {
    let mut r = Rational::from(1);
    for _ in 0..k {
        r *= q;
    }
    r
}

/// `Σ c_n λ^{-θσ_n-1} / (Γ(σ_n - γ0) Γ(-θσ_n))`.
pub fn c_form(alpha: &Rational, lambda: &Float, tol: f64) -> Result<Evaluation> {
    if !lambda.is_sign_positive() || lambda.is_zero() {
        return Err(AsymptoticsError::NonPositiveLambda);
    }
    let prec = lambda.prec();
    let e = Exponents::new(alpha);
    let am1 = Rational::from(alpha - 1);
    let mut k_max = 48;
    loop {
        let coeffs = sqrt_expansion(alpha, k_max);
        let complete = Rational::from(&am1 * (k_max + 1));
        let mut total = Float::new(prec);
        let mut scale = Float::new(prec);
        let mut terms = 0;
        let mut quiet = 0;
        let mut last_rel = f64::INFINITY;
        for (sigma, c) in coeffs.range(..complete) {
            if *c == 0 {
                continue;
            }
            let ts = Rational::from(&e.theta * sigma);
            let rg1 = rgamma_rational(&Rational::from(sigma - &e.gamma0), prec);
            let rg2 = rgamma_rational(&Rational::from(-&ts), prec);
            if rg1.is_zero() || rg2.is_zero() {
                continue;
            }
            let term = rat_f(c, prec) * rg1 * rg2 * lambda_pow(lambda, &Rational::from(&ts + 1u32));
            total += &term;
            terms += 1;
            let mag = term.abs();
            if mag > scale {
                scale = mag.clone();
            }
            last_rel = Float::with_val(prec, &mag / &scale).to_f64();
            quiet = if last_rel <= tol { quiet + 1 } else { 0 };
            if quiet >= QUIET_TERMS {
                return Ok(Evaluation { value: total, terms, last_relative: last_rel, converged: true });
            }
        }
        if k_max >= 1024 {
            return Ok(Evaluation { value: total, terms, last_relative: last_rel, converged: false });
        }
        k_max *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lam(x: f64) -> Float {
        Float::with_val(256, x)
    }

    #[test]
    fn expansion_for_alpha_three() {
        // 1 - 3x² + 2x³ = (1 - x)²(1 + 2x), so the root is (1 - x)√(1 + 2x)
        let c = sqrt_expansion(&Rational::from(3), 20);
        let get = |s: i64| c.get(&Rational::from(s)).cloned().unwrap_or_default();
        assert_eq!(get(0), 1);
        assert_eq!(get(1), 0);
        // (1 - x)(1 + x - x²/2 + x³/2 - ...) : x² coefficient -1/2 - 1 = -3/2
        assert_eq!(get(2), Rational::from((-3, 2)));
        assert_eq!(get(3), Rational::from((1, 2)) + Rational::from((1, 2)));
    }

    #[test]
    fn two_forms_agree() {
        for alpha in [Rational::from(3), Rational::from((5, 2))] {
            for l in [0.5, 1.0, 2.0, 5.0] {
                let a = double_sum(&alpha, &lam(l), 1e-40).unwrap();
                let b = c_form(&alpha, &lam(l), 1e-40).unwrap();
                assert!(a.converged && b.converged);
                let rel = Float::with_val(256, Float::with_val(256, &a.value - &b.value) / &b.value).abs();
                assert!(rel < 1e-20, "alpha {alpha} lambda {l}: {} vs {}", a.value, b.value);
            }
        }
    }

    #[test]
    fn tail_law_with_first_correction() {
        for alpha in [Rational::from(3), Rational::from((5, 2))] {
            let e = Exponents::new(&alpha);
            let k = tail_constant(&alpha, 256);
            let c1 = tail_first_correction(&alpha, 256);
            for l in [50.0, 200.0] {
                let v = double_sum(&alpha, &lam(l), 1e-30).unwrap().value;
                let scaled = v * lam(l).pow(&rat_f(&Rational::from(&e.beta0 + 1u32), 256));
                let two_term = Float::with_val(256, &k * (Float::with_val(256, &c1 / l) + 1u32));
                let rel = (scaled / two_term - 1u32).abs().to_f64();
                // the remainder is O(λ^{-2})
                assert!(rel < 10.0 / (l * l), "alpha {alpha} lambda {l}: {rel}");
            }
        }
        assert!((tail_first_correction(&Rational::from(3), 64).to_f64() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_nonpositive_lambda() {
        assert!(double_sum(&Rational::from(3), &lam(0.0), 1e-20).is_err());
        assert!(c_form(&Rational::from(3), &lam(-1.0), 1e-20).is_err());
    }
}
