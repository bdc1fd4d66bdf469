//! Car-arrival weight sequences `b = (b_l)` and their generating function
//! `B(y) = Σ b_l y^l`.

pub mod config;

use std::fmt;

use rug::ops::Pow;
use rug::{Float, Rational};
use serde::Serialize;
use thiserror::Error;

use crate::powseries::Series;
use crate::scalar::{render_float, Extended, Scalar};
use crate::special::{gamma, polylog, polylog_scaled_derivative};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WeightError {
    #[error("violated assumption: {0}")]
    Assumption(String),
    #[error("evaluation point {y} outside [0, rho = {rho}]")]
    OutOfDomain { y: String, rho: String },
    #[error("exact coefficients unavailable for the {0} family")]
    NotExact(&'static str),
    #[error("B(1) is infinite; moments are undefined")]
    InfiniteMass,
}

/// The constant weight `b_0` of a polylog family.
#[derive(Clone, Debug, PartialEq)]
pub enum B0 {
    Value(Rational),
    /// `b_0 = 1 - c·Li_β(r)`, making `B(1) = 1`.
    Normalize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum WeightSequence {
    /// `b_l` given explicitly for `l <= d`, zero beyond.
    Polynomial(Vec<Rational>),
    /// `b_l = c·p^l`.
    Geometric { c: Rational, p: Rational },
    /// `b_l = c·l^{-β}·r^l` for `l >= 1`.
    Polylog { c: Rational, r: Rational, beta: Rational, b0: B0 },
    /// `Σ w_i b^{(i)}`.
    Mixture(Vec<(Rational, WeightSequence)>),
    /// `λ·r^l·b_l`, the equivalent sequence when no closed family fits.
    Scaled { lambda: Rational, r: Rational, inner: Box<WeightSequence> },
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Radius {
    Finite(Rational),
    Infinite,
}

impl Radius {
    pub fn finite(&self) -> Option<&Rational> {
        match self {
            Radius::Finite(r) => Some(r),
            Radius::Infinite => None,
        }
    }
}

impl fmt::Display for Radius {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Radius::Finite(r) => write!(f, "{r}"),
            Radius::Infinite => write!(f, "inf"),
        }
    }
}

/// Singular data at `ρ` in the normal form `B^{(s)}(y) ~ C_B (1 - y/ρ)^{α̃}`.
#[derive(Clone, Debug)]
pub struct SingularData {
    pub rho: Radius,
    /// `None` when `B` has no algebraic singular term at `ρ` (`ρ = ∞` or a pole).
    pub alpha_tilde: Option<Rational>,
    pub c_b: Option<Float>,
    /// `B, B', B'', B'''` at `ρ` (left limits).
    pub derivs_at_rho: [Extended<Float>; 4],
}

#[derive(Clone, Debug, Serialize)]
pub struct Moments {
    pub mean: String,
    pub variance: String,
    pub is_probability: bool,
    #[serde(skip)]
    pub m: Extended<Float>,
    #[serde(skip)]
    pub sigma2: Extended<Float>,
}

fn rat_f(q: &Rational, prec: u32) -> Float {
    Float::with_val(prec, q)
}

fn falling(l: u64, k: u32) -> u64 {
    (0..k as u64).map(|i| l - i).product()
}

impl WeightSequence {
    pub fn polynomial_i64(coeffs: &[i64]) -> Self {
        WeightSequence::Polynomial(coeffs.iter().map(|&c| Rational::from(c)).collect())
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            WeightSequence::Polynomial(_) => "polynomial",
            WeightSequence::Geometric { .. } => "geometric",
            WeightSequence::Polylog { .. } => "polylog",
            WeightSequence::Mixture(_) => "mixture",
            WeightSequence::Scaled { .. } => "scaled",
        }
    }

    /// Checks the standing assumptions, naming the first one violated.
    pub fn validate(&self) -> Result<(), WeightError> {
        self.validate_params()?;
        let prec = 128;
        if self.b0_float(prec) <= 0 {
            return Err(WeightError::Assumption("b_0>0".into()));
        }
        if !self.has_weight_above_one() {
            return Err(WeightError::Assumption("b_l>0 for some l>=2".into()));
        }
        Ok(())
    }

    fn validate_params(&self) -> Result<(), WeightError> {
        let bad = |s: &str| Err(WeightError::Assumption(s.into()));
        match self {
            WeightSequence::Polynomial(c) => {
                if c.is_empty() {
                    return bad("b_0>0");
                }
                if c.iter().any(|x| *x < 0) {
                    return bad("b_l>=0");
                }
            }
            WeightSequence::Geometric { c, p } => {
                if *c < 0 {
                    return bad("b_l>=0");
                }
                if *p <= 0 || *p >= 1 {
                    return bad("0<p<1");
                }
            }
            WeightSequence::Polylog { c, r, beta, b0 } => {
                if *c < 0 {
                    return bad("b_l>=0");
                }
                if *r <= 0 {
                    return bad("rho>0");
                }
                if *beta <= 1 {
                    return bad("beta>1 (B(rho) finite)");
                }
                if *beta.denom() == 1 {
                    return bad("beta non-integer");
                }
                match b0 {
                    B0::Value(v) if *v < 0 => return bad("b_l>=0"),
                    B0::Normalize if *r > 1 => return bad("normalized b_0 needs r<=1"),
                    _ => {}
                }
            }
            WeightSequence::Mixture(parts) => {
                if parts.is_empty() {
                    return bad("mixture has at least one component");
                }
                for (w, ws) in parts {
                    if *w < 0 {
                        return bad("mixture weights >=0");
                    }
                    ws.validate_params()?;
                }
            }
            WeightSequence::Scaled { lambda, r, inner } => {
                if *lambda <= 0 || *r <= 0 {
                    return bad("lambda>0 and r>0");
                }
                inner.validate_params()?;
            }
        }
        Ok(())
    }

    fn has_weight_above_one(&self) -> bool {
        match self {
            WeightSequence::Polynomial(c) => c.iter().skip(2).any(|x| *x > 0),
            WeightSequence::Geometric { c, .. } => *c > 0,
            WeightSequence::Polylog { c, .. } => *c > 0,
            WeightSequence::Mixture(parts) => parts.iter().any(|(w, ws)| *w > 0 && ws.has_weight_above_one()),
            WeightSequence::Scaled { inner, .. } => inner.has_weight_above_one(),
        }
    }

    /// Whether every `b_l` is an exact rational.
    pub fn is_exact(&self) -> bool {
        match self {
            WeightSequence::Polynomial(_) | WeightSequence::Geometric { .. } => true,
            WeightSequence::Polylog { .. } => false,
            WeightSequence::Mixture(parts) => parts.iter().all(|(_, ws)| ws.is_exact()),
            WeightSequence::Scaled { inner, .. } => inner.is_exact(),
        }
    }

    /// Degree of `B` when it is a polynomial.
    pub fn degree(&self) -> Option<usize> {
        match self {
            WeightSequence::Polynomial(c) => Some(c.iter().rposition(|x| *x != 0).unwrap_or(0)),
            WeightSequence::Mixture(parts) => {
                parts.iter().filter(|(w, _)| *w != 0).map(|(_, ws)| ws.degree()).try_fold(0, |a, d| d.map(|d| a.max(d)))
            }
            WeightSequence::Scaled { inner, .. } => inner.degree(),
            _ => None,
        }
    }

    pub fn coeff_exact(&self, l: usize) -> Option<Rational> {
        match self {
            WeightSequence::Polynomial(c) => Some(c.get(l).cloned().unwrap_or_default()),
            WeightSequence::Geometric { c, p } => Some(Rational::from(c * Rational::from(p.pow(l as u32)))),
            WeightSequence::Polylog { .. } => None,
            WeightSequence::Mixture(parts) => {
                let mut acc = Rational::new();
                for (w, ws) in parts {
                    acc += Rational::from(w * ws.coeff_exact(l)?);
                }
                Some(acc)
            }
            WeightSequence::Scaled { lambda, r, inner } => {
                Some(Rational::from(lambda * Rational::from(r.pow(l as u32))) * inner.coeff_exact(l)?)
            }
        }
    }

    pub fn b0_float(&self, prec: u32) -> Float {
        self.coeff_float(0, prec)
    }

    pub fn coeff_float(&self, l: usize, prec: u32) -> Float {
        if let Some(q) = self.coeff_exact(l) {
            return rat_f(&q, prec);
        }
        match self {
            WeightSequence::Polylog { c, r, beta, b0 } => {
                if l == 0 {
                    return match b0 {
                        B0::Value(v) => rat_f(v, prec),
                        B0::Normalize => {
                            let li = polylog(&rat_f(beta, prec), &rat_f(r, prec));
                            let li = li.finite().cloned().expect("beta>1 keeps Li_beta(r) finite");
                            1 - rat_f(c, prec) * li
                        }
                    };
                }
                let lf = Float::with_val(prec, l as u64);
                let decay = Float::with_val(prec, lf.pow(&rat_f(beta, prec))).recip();
                rat_f(c, prec) * decay * Float::with_val(prec, rat_f(r, prec).pow(l as u32))
            }
            WeightSequence::Mixture(parts) => {
                let mut acc = Float::new(prec);
                for (w, ws) in parts {
                    acc += rat_f(w, prec) * ws.coeff_float(l, prec);
                }
                acc
            }
            WeightSequence::Scaled { lambda, r, inner } => {
                rat_f(lambda, prec) * Float::with_val(prec, rat_f(r, prec).pow(l as u32)) * inner.coeff_float(l, prec)
            }
            _ => unreachable!("exact families handled above"),
        }
    }

    /// `B(Y)` to order `n` over the requested backend.
    pub fn b_series<S: Scalar>(&self, n: usize, ctx: &S::Ctx) -> Result<Series<S>, WeightError> {
        let coeffs = (0..=n)
            .map(|l| match self.coeff_exact(l) {
                Some(q) => Ok(S::from_rational(&q, ctx)),
                None => {
                    let prec = match S::backend(ctx) {
                        crate::Backend::BigFloat(p) => p,
                        crate::Backend::ExactRational => return Err(WeightError::NotExact(self.family_name())),
                    };
                    Ok(S::from_float(&self.coeff_float(l, prec), ctx).expect("float backend"))
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Series::from_coeffs(coeffs, ctx.clone()))
    }

    pub fn radius(&self) -> Radius {
        match self {
            WeightSequence::Polynomial(_) => Radius::Infinite,
            WeightSequence::Geometric { p, .. } => Radius::Finite(p.clone().recip()),
            WeightSequence::Polylog { r, .. } => Radius::Finite(r.clone().recip()),
            WeightSequence::Mixture(parts) => {
                parts.iter().filter(|(w, _)| *w != 0).map(|(_, ws)| ws.radius()).min().unwrap_or(Radius::Infinite)
            }
            WeightSequence::Scaled { r, inner, .. } => match inner.radius() {
                Radius::Finite(rho) => Radius::Finite(rho / r),
                Radius::Infinite => Radius::Infinite,
            },
        }
    }

    /// `B^{(k)}(y)` for `0 <= y <= ρ`, the left limit (possibly `+∞`) at `ρ`.
    pub fn eval(&self, y: &Float, k: u32) -> Result<Extended<Float>, WeightError> {
        let prec = y.prec();
        let yq = y.to_rational().ok_or_else(|| WeightError::OutOfDomain { y: render_float(y), rho: "?".into() })?;
        if yq < 0 {
            return Err(WeightError::OutOfDomain { y: render_float(y), rho: self.radius().to_string() });
        }
        if let Radius::Finite(rho) = self.radius() {
            if yq > rho {
                return Err(WeightError::OutOfDomain { y: render_float(y), rho: rho.to_string() });
            }
        }
        Ok(self.eval_unchecked(&yq, k, prec))
    }

    /// `B^{(k)}` at `ρ` (left limit).
    pub fn eval_at_rho(&self, k: u32, prec: u32) -> Extended<Float> {
        match self.radius() {
            Radius::Finite(rho) => self.eval_unchecked(&rho, k, prec),
            Radius::Infinite => Extended::NotComputed,
        }
    }

    fn eval_unchecked(&self, y: &Rational, k: u32, prec: u32) -> Extended<Float> {
        match self {
            WeightSequence::Polynomial(c) => {
                let mut acc = Float::new(prec);
                let yf = rat_f(y, prec);
                for l in (k as usize..c.len()).rev() {
                    acc *= &yf;
                    acc += rat_f(&c[l], prec) * falling(l as u64, k);
                }
                Extended::Finite(acc)
            }
            WeightSequence::Geometric { c, p } => {
                let denom = Rational::from(1 - Rational::from(p * y));
                if denom <= 0 {
                    return Extended::PosInfinity;
                }
                let num = Rational::from(c * Rational::from(p.pow(k)));
                let mut v = rat_f(&num, prec) / Float::with_val(prec, rat_f(&denom, prec).pow(k + 1));
                v *= falling(k as u64, k);
                Extended::Finite(v)
            }
            WeightSequence::Polylog { c, r, beta, .. } => {
                if *y == 0 {
                    let v = if k == 0 {
                        self.b0_float(prec)
                    } else {
                        self.coeff_float(k as usize, prec) * falling(k as u64, k)
                    };
                    return Extended::Finite(v);
                }
                let z = rat_f(&Rational::from(r * y), prec);
                let s = rat_f(beta, prec);
                match polylog_scaled_derivative(&s, &z, k) {
                    Extended::Finite(v) => {
                        let mut v = rat_f(c, prec) * v;
                        if k == 0 {
                            v += self.b0_float(prec);
                        } else {
                            v /= Float::with_val(prec, rat_f(y, prec).pow(k));
                        }
                        Extended::Finite(v)
                    }
                    other => other,
                }
            }
            WeightSequence::Mixture(parts) => {
                let mut acc = Float::new(prec);
                for (w, ws) in parts {
                    if *w == 0 {
                        continue;
                    }
                    match ws.eval_unchecked(y, k, prec) {
                        Extended::Finite(v) => acc += rat_f(w, prec) * v,
                        other => return other,
                    }
                }
                Extended::Finite(acc)
            }
            WeightSequence::Scaled { lambda, r, inner } => {
                let ry = Rational::from(r * y);
                inner.eval_unchecked(&ry, k, prec).map(|v| {
                    v * rat_f(&Rational::from(lambda * Rational::from(r.pow(k))), prec)
                })
            }
        }
    }

    /// `B^{(k)}(y)` exactly, for exact families strictly inside the disc.
    pub fn eval_exact(&self, y: &Rational, k: u32) -> Option<Rational> {
        match self {
            WeightSequence::Polynomial(c) => {
                let mut acc = Rational::new();
                for l in (k as usize..c.len()).rev() {
                    acc *= y;
                    acc += Rational::from(&c[l] * falling(l as u64, k));
                }
                Some(acc)
            }
            WeightSequence::Geometric { c, p } => {
                let denom = Rational::from(1 - Rational::from(p * y));
                if denom <= 0 {
                    return None;
                }
                let num = Rational::from(c * Rational::from(p.pow(k))) * falling(k as u64, k);
                Some(num / denom.pow(k as i32 + 1))
            }
            WeightSequence::Polylog { .. } => None,
            WeightSequence::Mixture(parts) => {
                let mut acc = Rational::new();
                for (w, ws) in parts {
                    acc += Rational::from(w * ws.eval_exact(y, k)?);
                }
                Some(acc)
            }
            WeightSequence::Scaled { lambda, r, inner } => {
                let v = inner.eval_exact(&Rational::from(r * y), k)?;
                Some(v * Rational::from(lambda * Rational::from(r.pow(k))))
            }
        }
    }

    /// Singular exponent `α̃` and constant `C_B` of the algebraic term at `ρ`,
    /// together with `B^{(k)}(ρ)` for `k <= 3`.
    pub fn singular_data(&self, prec: u32) -> SingularData {
        let rho = self.radius();
        let derivs_at_rho = [0, 1, 2, 3].map(|k| self.eval_at_rho(k, prec));
        let (alpha_tilde, c_b) = match self.singular_term(prec) {
            Some((a, c)) => (Some(a), Some(c)),
            None => (None, None),
        };
        SingularData { rho, alpha_tilde, c_b, derivs_at_rho }
    }

    /// Leading `(α̃, C_B)` among polylog components sitting exactly at `ρ`.
    fn singular_term(&self, prec: u32) -> Option<(Rational, Float)> {
        match self {
            WeightSequence::Polylog { c, beta, .. } => {
                let one_minus = rat_f(&Rational::from(1 - beta), prec);
                Some((Rational::from(beta - 1), rat_f(c, prec) * gamma(&one_minus)))
            }
            WeightSequence::Mixture(parts) => {
                let rho = self.radius();
                let mut best: Option<(Rational, Float)> = None;
                for (w, ws) in parts {
                    if *w == 0 || ws.radius() != rho {
                        continue;
                    }
                    if let Some((a, cb)) = ws.singular_term(prec) {
                        let cb = cb * rat_f(w, prec);
                        best = match best {
                            None => Some((a, cb)),
                            Some((ba, _)) if a < ba => Some((a, cb)),
                            Some((ba, bc)) if a == ba => Some((ba, bc + cb)),
                            keep => keep,
                        };
                    }
                }
                best
            }
            WeightSequence::Scaled { lambda, inner, .. } => {
                inner.singular_term(prec).map(|(a, c)| (a, c * rat_f(lambda, prec)))
            }
            _ => None,
        }
    }

    /// `B(1)` exactly when it is structurally known.
    pub fn mass_at_one_exact(&self) -> Option<Rational> {
        match self {
            WeightSequence::Polylog { r, b0: B0::Normalize, .. } if *r == 1 => Some(Rational::from(1)),
            WeightSequence::Polylog { .. } => None,
            WeightSequence::Mixture(parts) => {
                let mut acc = Rational::new();
                for (w, ws) in parts {
                    acc += Rational::from(w * ws.mass_at_one_exact()?);
                }
                Some(acc)
            }
            WeightSequence::Scaled { lambda, r, inner } if *r == 1 => {
                Some(Rational::from(lambda * inner.mass_at_one_exact()?))
            }
            other => {
                if other.radius() > Radius::Finite(Rational::from(1)) {
                    other.eval_exact(&Rational::from(1), 0)
                } else {
                    None
                }
            }
        }
    }

    pub fn is_probability(&self, prec: u32) -> bool {
        if let Some(m) = self.mass_at_one_exact() {
            return m == 1;
        }
        match self.eval(&Float::with_val(prec, 1), 0) {
            Ok(Extended::Finite(v)) => {
                let tol = Float::with_val(prec, Float::i_exp(1, -(prec as i32) + 16));
                Float::with_val(prec, v - 1u32).abs() <= tol
            }
            _ => false,
        }
    }

    /// Mean and variance of `b` (as a measure on `ℕ`).
    pub fn moments(&self, prec: u32) -> Result<Moments, WeightError> {
        let one = Float::with_val(prec, 1);
        let b1 = self.eval(&one, 0).map_err(|_| WeightError::InfiniteMass)?;
        if b1.finite().is_none() {
            return Err(WeightError::InfiniteMass);
        }
        let d1 = self.eval(&one, 1)?;
        let d2 = self.eval(&one, 2)?;
        let m = d1.clone();
        let sigma2 = match (&d1, &d2) {
            (Extended::Finite(a), Extended::Finite(b)) => {
                Extended::Finite(Float::with_val(prec, b + a) - Float::with_val(prec, a * a))
            }
            _ => Extended::PosInfinity,
        };
        Ok(Moments {
            mean: m.render(),
            variance: sigma2.render(),
            is_probability: self.is_probability(prec),
            m,
            sigma2,
        })
    }

    /// The equivalent sequence `b̃_l = λ·r^l·b_l`.
    pub fn equivalent(&self, lambda: &Rational, r: &Rational) -> WeightSequence {
        match self {
            WeightSequence::Polynomial(c) => WeightSequence::Polynomial(
                c.iter()
                    .enumerate()
                    .map(|(l, b)| Rational::from(lambda * b) * Rational::from(r.pow(l as u32)))
                    .collect(),
            ),
            WeightSequence::Geometric { c, p } => WeightSequence::Geometric {
                c: Rational::from(lambda * c),
                p: Rational::from(r * p),
            },
            WeightSequence::Polylog { c, r: r0, beta, b0: B0::Value(b0) } => WeightSequence::Polylog {
                c: Rational::from(lambda * c),
                r: Rational::from(r * r0),
                beta: beta.clone(),
                b0: B0::Value(Rational::from(lambda * b0)),
            },
            WeightSequence::Mixture(parts) => {
                WeightSequence::Mixture(parts.iter().map(|(w, ws)| (w.clone(), ws.equivalent(lambda, r))).collect())
            }
            WeightSequence::Scaled { lambda: l0, r: r0, inner } => {
                let lam = Rational::from(lambda * l0);
                let rr = Rational::from(r * r0);
                if lam == 1 && rr == 1 {
                    (**inner).clone()
                } else {
                    WeightSequence::Scaled { lambda: lam, r: rr, inner: inner.clone() }
                }
            }
            other => WeightSequence::Scaled { lambda: lambda.clone(), r: r.clone(), inner: Box::new(other.clone()) },
        }
    }

    /// One-line description for reports.
    pub fn describe(&self) -> String {
        match self {
            WeightSequence::Polynomial(c) => {
                format!("polynomial({})", c.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","))
            }
            WeightSequence::Geometric { c, p } => format!("geometric(c={c},p={p})"),
            WeightSequence::Polylog { c, r, beta, b0 } => {
                let b0 = match b0 {
                    B0::Value(v) => v.to_string(),
                    B0::Normalize => "normalize".into(),
                };
                format!("polylog(c={c},r={r},beta={beta},b0={b0})")
            }
            WeightSequence::Mixture(parts) => format!(
                "mixture({})",
                parts.iter().map(|(w, ws)| format!("{w}*{}", ws.describe())).collect::<Vec<_>>().join("+")
            ),
            WeightSequence::Scaled { lambda, r, inner } => format!("scaled(lambda={lambda},r={r},{})", inner.describe()),
        }
    }
}
