//! Exact-versus-predicted coefficient tables.
//!
//! `F(x_c, y) = F̂(Y_c, y)` because `x̂(Y_c) = x_c`, so `F_p(x_c)` is read off
//! the `y`-expansion of `R(Y_c, y) = (Y_c - y)√q(Y_c, y)` instead of summing
//! `Σ_n F_{n,p} x_c^n`, whose tail decays only like `n^{-β0-1}`.
//!
//! At `Y_c` one has `φ'(Y_c) = 0`, hence
//! `∂_Y ∂̸_x F̂(Y_c, y) = D'(Y_c)/(2y) · ((φ(Y_c) + y)/R(Y_c, y) - 1)` and
//! `∂̸_x F̂(Y_c, y) = ((φ(Y_c) + y) D(Y_c) - 2y B(y))/(2y R(Y_c, y)) - D(Y_c)/(2y)`.
//! `G(y) = μ x_c Y_c / (β0 μ^{β0}) · ∂_Y ∂̸_x F̂(Y_c, y)`; the factor `Y_c`
//! comes from integrating `∂_x F(x, y) - ∂_x F(x_c, y) ~ -Y_c ∂_Y ∂̸_x F̂ · S`.

use rug::ops::Pow;
use rug::Float;
use serde::Serialize;

use super::ialpha::double_sum;
use super::{local_at_critical, ser_float, AsymptoticConstants, AsymptoticsError, Result};
use crate::exec::Exec;
use crate::genfun::eval::{fhat_coeffs_at, q_r_at};
use crate::genfun::param::{f0_from_parametrization, f_from_parametrization};
use crate::powseries::Series;
use crate::special::rgamma_rational;
use crate::weights::WeightSequence;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Regime {
    /// `F_p(x_c)` as `p → ∞`.
    YFixed,
    /// `F_{n,p}` as `n → ∞` for fixed `p`.
    X,
    /// `F_{n,p}` with `n ~ v p^{1/θ}`.
    Bivariate,
}

#[derive(Clone, Debug, Serialize)]
pub struct Row {
    pub n: usize,
    pub p: usize,
    #[serde(serialize_with = "ser_float")]
    pub exact: Float,
    #[serde(serialize_with = "ser_float")]
    pub predicted: Float,
    #[serde(serialize_with = "ser_float")]
    pub ratio: Float,
}

#[derive(Clone, Debug, Serialize)]
pub struct Table {
    pub regime: Regime,
    pub rows: Vec<Row>,
    /// Least-squares log-log slope of the normalised exact values.
    pub slope: Option<f64>,
    pub expected_slope: f64,
}

impl Table {
    pub fn ratios(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.ratio.to_f64()).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,p,exact,predicted,ratio\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{},{},{}\n",
                r.n,
                r.p,
                crate::scalar::render_float(&r.exact),
                crate::scalar::render_float(&r.predicted),
                crate::scalar::render_float(&r.ratio)
            ));
        }
        s
    }
}

fn prec_of(c: &AsymptoticConstants) -> u32 {
    c.y_c.prec()
}

fn q_f(q: &rug::Rational, prec: u32) -> Float {
    Float::with_val(prec, q)
}

/// `[y^k] F(x_c, y)` for `k <= p_max`.
pub fn f_at_xc(ws: &WeightSequence, c: &AsymptoticConstants, p_max: usize) -> Result<Vec<Float>> {
    let local = local_at_critical(ws, &c.y_c)?;
    Ok(fhat_coeffs_at(ws, &local, p_max)?)
}

/// `(φ_c + y)/R(Y_c, y)` and `B(y)/R(Y_c, y)` to order `order`.
fn over_r(ws: &WeightSequence, c: &AsymptoticConstants, order: usize) -> Result<(Series<Float>, Series<Float>)> {
    let prec = prec_of(c);
    let local = local_at_critical(ws, &c.y_c)?;
    let (_, r) = q_r_at(ws, &local, order)?;
    let mut phi_y = vec![Float::new(prec); order + 1];
    phi_y[0] = local.phi();
    if order >= 1 {
        phi_y[1] = Float::with_val(prec, 1u32);
    }
    let a = Series::from_coeffs(phi_y, prec).div(&r)?;
    let b = ws.b_series::<Float>(order, &prec)?.div(&r)?;
    Ok((a, b))
}

/// `[y^k] G(y)` for `k <= p_max`.
pub fn g_series(ws: &WeightSequence, c: &AsymptoticConstants, p_max: usize) -> Result<Vec<Float>> {
    let prec = prec_of(c);
    let local = local_at_critical(ws, &c.y_c)?;
    let d1 = local
        .d_prime()
        .ok_or_else(|| AsymptoticsError::Precondition("B'' infinite at Y_c".into()))?;
    let (a, _) = over_r(ws, c, p_max + 1)?;
    // (φ_c + y)/R - 1 vanishes at y = 0 since R(Y_c, 0) = φ_c, so dividing
    // by y is a shift
    let scale = g_scale(c, &d1);
    Ok((0..=p_max).map(|k| Float::with_val(prec, &a[k + 1] * &scale)).collect())
}

/// `[y^k] ∂_x F(x_c, y)` for `k <= p_max`.
pub fn dx_f_at_xc(ws: &WeightSequence, c: &AsymptoticConstants, p_max: usize) -> Result<Vec<Float>> {
    let prec = prec_of(c);
    let local = local_at_critical(ws, &c.y_c)?;
    let d = local.d();
    let (a, b) = over_r(ws, c, p_max + 1)?;
    // ((φ_c + y) D - 2y B(y))/R - D, then divide by 2y
    Ok((0..=p_max)
        .map(|k| {
            let v = Float::with_val(prec, &a[k + 1] * &d) - Float::with_val(prec, &b[k] * 2u32);
            v / 2u32
        })
        .collect())
}

/// `G(y)` at a point `0 < y < Y_c`, with `R(Y_c, y) = √Q(Y_c, y)` and
/// `Q(Y_c, y) = (φ_c + y)² - 4y B(y) x_c`.
pub fn g_at(ws: &WeightSequence, c: &AsymptoticConstants, y: &Float) -> Result<Float> {
    let prec = prec_of(c);
    if !(y.is_sign_positive() && !y.is_zero() && *y < c.y_c) {
        return Err(AsymptoticsError::Precondition("need 0 < y < Y_c".into()));
    }
    let local = local_at_critical(ws, &c.y_c)?;
    let d1 = local
        .d_prime()
        .ok_or_else(|| AsymptoticsError::Precondition("B'' infinite at Y_c".into()))?;
    let b_y = ws
        .eval(y, 0)?
        .finite()
        .cloned()
        .ok_or_else(|| AsymptoticsError::Precondition("B(y) infinite".into()))?;
    let phi_y = Float::with_val(prec, local.phi() + y);
    let q = Float::with_val(prec, &phi_y * &phi_y) - Float::with_val(prec, y * &b_y) * &c.x_c * 4u32;
    let r = q.sqrt();
    let inner = phi_y / r - 1u32;
    Ok(g_scale(c, &d1) * inner / y)
}

/// `μ x_c Y_c D'(Y_c) / (2 β0 μ^{β0})`
fn g_scale(c: &AsymptoticConstants, d1: &Float) -> Float {
    let prec = prec_of(c);
    let b0 = q_f(&c.exponents.beta0, prec);
    Float::with_val(prec, &c.mu * &c.x_c) * &c.y_c * d1 / (Float::with_val(prec, &b0 * Float::with_val(prec, c.mu.clone().pow(&b0))) * 2u32)
}

/// `(α-1)/(2μ^{β0}) · C_F · t^{β1}`, the growth of `G` as `t = 1 - y/Y_c → 0`.
pub fn g_singular(c: &AsymptoticConstants, t: &Float) -> Float {
    let prec = prec_of(c);
    let e = &c.exponents;
    let am1 = q_f(&rug::Rational::from(&e.alpha - 1u32), prec);
    let mub = Float::with_val(prec, c.mu.clone().pow(&q_f(&e.beta0, prec)));
    am1 / (mub * 2u32) * &c.c_f * Float::with_val(prec, t.clone().pow(&q_f(&e.beta1, prec)))
}

fn pow_neg(base: &Float, k: usize) -> Float {
    Float::with_val(base.prec(), base.clone().pow(-(k as i64)))
}

fn pow_f(k: usize, e: &rug::Rational, prec: u32) -> Float {
    Float::with_val(prec, Float::with_val(prec, k).pow(&q_f(e, prec)))
}

/// `C_F/Γ(-γ0) · Y_c^{-p} p^{-γ0-1}`
pub fn predict_f_at_xc(c: &AsymptoticConstants, p: usize) -> Float {
    let prec = prec_of(c);
    let e = &c.exponents;
    let expo = rug::Rational::from(-rug::Rational::from(&e.gamma0 + 1u32));
    Float::with_val(prec, &c.c_f * rgamma_rational(&rug::Rational::from(-&e.gamma0), prec)) * pow_neg(&c.y_c, p)
        * pow_f(p, &expo, prec)
}

/// `α/(2μ x_c) · C_F/Γ(-γ1) · Y_c^{-p} p^{-γ1-1}`
pub fn predict_dx_f_at_xc(c: &AsymptoticConstants, p: usize) -> Float {
    let prec = prec_of(c);
    let e = &c.exponents;
    let expo = rug::Rational::from(-rug::Rational::from(&e.gamma1 + 1u32));
    let lead = q_f(&e.alpha, prec) / (Float::with_val(prec, &c.mu * &c.x_c) * 2u32);
    lead * &c.c_f * rgamma_rational(&rug::Rational::from(-&e.gamma1), prec) * pow_neg(&c.y_c, p) * pow_f(p, &expo, prec)
}

/// `(α-1)/(2μ^{β0}) · C_F/Γ(-β1) · Y_c^{-p} p^{-β1-1}`
pub fn predict_g(c: &AsymptoticConstants, p: usize) -> Float {
    let prec = prec_of(c);
    let e = &c.exponents;
    let expo = rug::Rational::from(-rug::Rational::from(&e.beta1 + 1u32));
    let am1 = q_f(&rug::Rational::from(&e.alpha - 1u32), prec);
    let mub = Float::with_val(prec, c.mu.clone().pow(&q_f(&e.beta0, prec)));
    am1 / (mub * 2u32) * &c.c_f * rgamma_rational(&rug::Rational::from(-&e.beta1), prec) * pow_neg(&c.y_c, p)
        * pow_f(p, &expo, prec)
}

/// `G_p/Γ(-β0) · x_c^{-n} n^{-β0-1}`
pub fn predict_x(c: &AsymptoticConstants, g_p: &Float, n: usize) -> Float {
    let prec = prec_of(c);
    let e = &c.exponents;
    let expo = rug::Rational::from(-rug::Rational::from(&e.beta0 + 1u32));
    Float::with_val(prec, g_p * rgamma_rational(&rug::Rational::from(-&e.beta0), prec)) * pow_neg(&c.x_c, n)
        * pow_f(n, &expo, prec)
}

/// `μ C_F I_α(μv) x_c^{-n} Y_c^{-p} p^{-(γ0+1+1/θ)}` with `v = n/p^{1/θ}`.
pub fn predict_bivariate(c: &AsymptoticConstants, n: usize, p: usize) -> Result<Float> {
    let prec = prec_of(c);
    let e = &c.exponents;
    let inv_theta = e.theta.clone().recip();
    let v = Float::with_val(prec, n) / pow_f(p, &inv_theta, prec);
    let lam = Float::with_val(prec, &c.mu * &v);
    let i = double_sum(&e.alpha, &lam, 1e-40)?;
    let expo = rug::Rational::from(-(rug::Rational::from(&e.gamma0 + 1u32) + &inv_theta));
    Ok(Float::with_val(prec, &c.mu * &c.c_f) * i.value * pow_neg(&c.x_c, n) * pow_neg(&c.y_c, p) * pow_f(p, &expo, prec))
}

/// `gcd` of the differences between labels carrying positive weight.
///
/// When it exceeds 1, `F_{n,p}` vanishes off a sublattice of `(n, p)` and
/// `F(·, y)` has that many dominant singularities, so the amplitude
/// predictions (which assume aperiodic `b`) do not apply as stated.
pub fn lattice_period(ws: &WeightSequence) -> usize {
    let Some(d) = ws.degree() else {
        // every infinite-support family here charges all labels >= 1
        return 1;
    };
    let supp: Vec<usize> = (0..=d).filter(|&l| ws.coeff_exact(l).is_some_and(|b| b != 0)).collect();
    let gcd = |mut a: usize, mut b: usize| {
        while b != 0 {
            (a, b) = (b, a % b);
        }
        a
    };
    supp.windows(2).fold(0, |g, w| gcd(g, w[1] - w[0])).max(1)
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    // zero coefficients of periodic sequences carry no slope information
    let pts: Vec<(f64, f64)> = points.iter().filter(|p| p.1 > 0.0).map(|&(x, y)| (x.ln(), y.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Some(sxy / sxx)
}

/// `ln(|x|)` for a big float whose magnitude may overflow `f64`.
fn ln_big(x: &Float) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    Float::with_val(x.prec(), x.abs_ref()).ln().to_f64()
}

/// Builds the comparison table for `regime`.
///
/// - `YFixed`: rows `p ∈ ps`, slope of `Y_c^p F_p(x_c)` against `p`.
/// - `X`: rows `(n, p)` for `n ∈ ns`, `p ∈ ps`, slope of `x_c^n F_{n,p}`
///   against `n` (taken over the first `p`).
/// - `Bivariate`: rows `p ∈ ps` with `n = ⌈v p^{1/θ}⌉`; the slope is that of
///   `x_c^n Y_c^p F_{n,p}` against `p`.
pub fn predict_and_compare(
    ws: &WeightSequence,
    c: &AsymptoticConstants,
    regime: Regime,
    ns: &[usize],
    ps: &[usize],
    v: Option<f64>,
    exec: Exec,
) -> Result<Table> {
    let prec = prec_of(c);
    let e = &c.exponents;
    let q = |r: &rug::Rational| r.to_f64();
    match regime {
        Regime::YFixed => {
            let p_max = ps.iter().copied().max().unwrap_or(0);
            let fp = f_at_xc(ws, c, p_max)?;
            let rows = exec.map_collect(0..ps.len(), |i| {
                let p = ps[i];
                let predicted = predict_f_at_xc(c, p);
                row(p, 0, p, fp[p].clone(), predicted)
            });
            let rows: Vec<Row> = rows.into_iter().map(|(_, r)| r).collect();
            let pts: Vec<(f64, f64)> = rows
                .iter()
                .map(|r| (r.p as f64, (ln_big(&r.exact) + (r.p as f64) * c.y_c.to_f64().ln()).exp()))
                .collect();
            Ok(Table { regime, slope: loglog_slope(&pts), expected_slope: -(q(&e.gamma0) + 1.0), rows })
        }
        Regime::X => {
            let n_max = ns.iter().copied().max().unwrap_or(1);
            let p_max = ps.iter().copied().max().unwrap_or(0);
            let exact: Vec<Series<Float>> = if p_max == 0 {
                vec![f0_from_parametrization::<Float>(ws, n_max, &prec)?]
            } else {
                let f = f_from_parametrization::<Float>(ws, n_max, p_max, &prec)?;
                (0..=p_max).map(|p| f.inner_coeff(p)).collect()
            };
            let g = g_series(ws, c, p_max)?;
            let cells: Vec<(usize, usize)> = ps.iter().flat_map(|&p| ns.iter().map(move |&n| (n, p))).collect();
            let rows = exec.map_collect(0..cells.len(), |i| {
                let (n, p) = cells[i];
                row(n, n, p, exact[p][n].clone(), predict_x(c, &g[p], n))
            });
            let rows: Vec<Row> = rows.into_iter().map(|(_, r)| r).collect();
            let first_p = ps.first().copied().unwrap_or(0);
            let ln_xc = c.x_c.to_f64().ln();
            let pts: Vec<(f64, f64)> = rows
                .iter()
                .filter(|r| r.p == first_p)
                .map(|r| (r.n as f64, (ln_big(&r.exact) + r.n as f64 * ln_xc).exp()))
                .collect();
            Ok(Table { regime, slope: loglog_slope(&pts), expected_slope: -(q(&e.beta0) + 1.0), rows })
        }
        Regime::Bivariate => {
            let v = v.ok_or_else(|| AsymptoticsError::Precondition("bivariate regime needs v".into()))?;
            let inv_theta = q(&e.theta.clone().recip());
            let cells: Vec<(usize, usize)> =
                ps.iter().map(|&p| (((v * (p as f64).powf(inv_theta)) - 1e-9).ceil().max(1.0) as usize, p)).collect();
            let n_max = cells.iter().map(|c| c.0).max().unwrap_or(1);
            let p_max = ps.iter().copied().max().unwrap_or(0);
            let f = f_from_parametrization::<Float>(ws, n_max, p_max, &prec)?;
            let preds = exec.map_collect(0..cells.len(), |i| predict_bivariate(c, cells[i].0, cells[i].1));
            let mut rows = Vec::with_capacity(cells.len());
            for (&(n, p), pred) in cells.iter().zip(preds) {
                rows.push(row(p, n, p, f.coeff(n, p).clone(), pred?).1);
            }
            let (ln_x, ln_y) = (c.x_c.to_f64().ln(), c.y_c.to_f64().ln());
            let pts: Vec<(f64, f64)> = rows
                .iter()
                .map(|r| (r.p as f64, (ln_big(&r.exact) + r.n as f64 * ln_x + r.p as f64 * ln_y).exp()))
                .collect();
            let expected = -(q(&e.gamma0) + 1.0 + inv_theta);
            Ok(Table { regime, slope: loglog_slope(&pts), expected_slope: expected, rows })
        }
    }
}

fn row(key: usize, n: usize, p: usize, exact: Float, predicted: Float) -> (usize, Row) {
    let ratio = Float::with_val(exact.prec(), &exact / &predicted);
    (key, Row { n, p, exact, predicted, ratio })
}
