//! Executable algebraic identities of the parametrization.
//!
//! Slashed derivatives are derivatives of rational expressions in
//! `(Y, U_0 = B(Y), U_1 = B'(Y))` with the other symbols frozen; the slashed
//! `x`-derivative is `∂̸_x f = ∂̸_Y f / ∂̸_Y x̂`. For the objects at hand:
//!
//! - `∂̸_x φ = D` where `D = B + Y B'`;
//! - `∂̸_x Q = 2(φ + y) D - 4 y B(y)`;
//! - `∂̸_{U_1} φ = -2 Y² B / D²`, `∂̸_{U_1} x̂ = -2 Y² B / D³`.
//!
//! Everything is checked as an identity of truncated series, which is exact
//! on the rational backend.

use serde::Serialize;

use super::param::{big_q, big_q_from, fhat, ParamSeries};
use super::Result;
use crate::powseries::{Bivariate, Series};
use crate::scalar::Scalar;
use crate::weights::WeightSequence;

#[derive(Clone, Debug, Serialize)]
pub struct IdentityCheck {
    pub name: String,
    pub pass: bool,
    /// Largest coefficient discrepancy, as an `f64`.
    pub discrepancy: f64,
    pub order: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityReport {
    pub weights: String,
    pub backend: String,
    pub order: usize,
    pub checks: Vec<IdentityCheck>,
}

impl IdentityReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> Vec<&IdentityCheck> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }
}

fn series_check<S: Scalar>(name: &str, a: &Series<S>, b: &Series<S>, order: usize) -> IdentityCheck {
    let (a, b) = (a.truncate(order), b.truncate(order));
    let pass = a.order() == order && b.order() == order && a.approx_eq(&b);
    IdentityCheck { name: name.into(), pass, discrepancy: a.max_abs_diff(&b), order }
}

fn zero_check<S: Scalar>(name: &str, a: &Series<S>, order: usize) -> IdentityCheck {
    series_check(name, a, &Series::zero(order, a.ctx()), order)
}

fn bivariate_check<S: Scalar>(name: &str, a: &Bivariate<S>, b: &Bivariate<S>, order: usize) -> IdentityCheck {
    let (a, b) = (a.truncate(order, order), b.truncate(order, order));
    let in_box = a.outer_order() == order && a.inner_order() == order && b.outer_order() == order && b.inner_order() == order;
    IdentityCheck { name: name.into(), pass: in_box && a.approx_eq(&b), discrepancy: a.max_abs_diff(&b), order }
}

fn two<S: Scalar>(ctx: &S::Ctx) -> S {
    S::from_i64(2, ctx)
}

/// `∂̸_x Q(Y, y) = 2(φ(Y) + y) D(Y) - 4 y B(y)` on the box `(order, inner)`.
pub fn slashed_x_q<S: Scalar>(ps: &ParamSeries<S>, ws: &WeightSequence, inner: usize) -> Result<Bivariate<S>> {
    let ctx = ps.b.ctx();
    let phi_plus_y = Bivariate::outer_product(&ps.phi, &Series::one(inner, ctx))?
        .add(&Bivariate::outer_product(&Series::one(ps.order, ctx), &Series::var(inner, ctx))?)?;
    let yb = ws.b_series::<S>(inner, ctx)?.shift(1).truncate(inner).mul_i64(4);
    Ok(phi_plus_y
        .mul_outer(&ps.d)?
        .scale(&two(ctx))
        .sub(&Bivariate::outer_product(&Series::one(ps.order, ctx), &yb)?)?)
}

/// `∂̸_{U_1} Q = 2(φ + y) ∂̸_{U_1}φ - 4 y B(y) ∂̸_{U_1}x̂`.
pub fn slashed_u1_q<S: Scalar>(ps: &ParamSeries<S>, ws: &WeightSequence, inner: usize) -> Result<Bivariate<S>> {
    let ctx = ps.b.ctx();
    let n = ps.order;
    let y2b = ps.b.shift(2).truncate(n).mul_i64(-2);
    let d2 = ps.d.mul(&ps.d)?;
    let du1_phi = y2b.div(&d2)?;
    let du1_xhat = y2b.div(&d2.mul(&ps.d)?)?;
    let phi_plus_y = Bivariate::outer_product(&ps.phi, &Series::one(inner, ctx))?
        .add(&Bivariate::outer_product(&Series::one(n, ctx), &Series::var(inner, ctx))?)?;
    let yb = ws.b_series::<S>(inner, ctx)?.shift(1).truncate(inner).mul_i64(4);
    Ok(phi_plus_y
        .mul_outer(&du1_phi.mul_i64(2))?
        .sub(&Bivariate::outer_product(&du1_xhat, &yb)?)?)
}

/// Runs every identity to order `n` in both variables.
pub fn identity_suite<S: Scalar>(ws: &WeightSequence, n: usize, ctx: &S::Ctx) -> Result<IdentityReport> {
    // two derivatives are taken, and the diagonal of a box (m, m) is exact to m
    let m = n + 2;
    let ps = ParamSeries::<S>::new(ws, m, ctx)?;
    let xp = ps.xhat_prime()?;
    let phip = ps.phi.derivative()?;
    let d = &ps.d;
    let mut checks = Vec::new();

    checks.push(series_check("slashed_x phi = B + Y B' (as phi' = D x̂')", &phip, &d.mul(&xp)?, n));

    let q_big = big_q_from(&ps, ws, m)?;
    let dq_y = q_big.derivative_outer()?;
    let dq_yy = q_big.derivative_inner()?;
    let dxq = slashed_x_q(&ps, ws, m)?;
    let du1q = slashed_u1_q(&ps, ws, m)?;
    checks.push(zero_check("Q(Y,Y) = 0", &q_big.diagonal(), n));
    checks.push(zero_check("slashed_U1 Q(Y,Y) = 0", &du1q.diagonal(), n));
    checks.push(zero_check("slashed_x Q(Y,Y) = 0", &dxq.diagonal(), n));
    checks.push(zero_check("d_Y Q(Y,Y) = 0", &dq_y.diagonal(), n));
    checks.push(zero_check("d_y Q(Y,Y) = 0", &dq_yy.diagonal(), n));
    checks.push(bivariate_check("d_Y Q = x̂' slashed_x Q", &dq_y, &dxq.mul_outer(&xp)?, n));
    let two_d = d.mul_i64(2);
    checks.push(series_check("d_Y slashed_x Q(Y,Y) = 2D", &dxq.derivative_outer()?.diagonal(), &two_d, n));
    checks.push(series_check("d_y slashed_x Q(Y,Y) = -2D", &dxq.derivative_inner()?.diagonal(), &two_d.neg(), n));
    let two_phip = phip.mul_i64(2);
    checks.push(series_check("d_Y^2 Q(Y,Y) = 2 phi'", &dq_y.derivative_outer()?.diagonal(), &two_phip, n));
    checks.push(series_check("d_y d_Y Q(Y,Y) = -2 phi'", &dq_y.derivative_inner()?.diagonal(), &two_phip.neg(), n));

    // q on the box (m, m) needs Q on (2m + 2, m)
    let q_wide = big_q::<S>(ws, 2 * m + 2, m, ctx)?;
    let q = q_wide.divide_out_square()?;
    checks.push(series_check("q(Y,Y) = phi'", &q.diagonal(), &phip, n));
    checks.push(series_check("q(0,y) = 1", q.slice(0), &Series::one(m, ctx), n));
    let back = q.times_diff().times_diff();
    checks.push(bivariate_check("(Y-y)^2 q = Q", &back, &q_wide, n));

    let r = q.sqrt_from(Series::one(m, ctx))?.times_diff();
    let r_y = r.derivative_outer()?;
    let r_yy = r.derivative_inner()?;
    checks.push(bivariate_check("2 R d_Y R = d_Y Q", &r.mul(&r_y)?.scale(&two(ctx)), &dq_y, n));
    checks.push(bivariate_check("2 R d_y R = d_y Q", &r.mul(&r_yy)?.scale(&two(ctx)), &dq_yy, n));

    let yhat = ps.yhat()?;
    checks.push(series_check("x̂(Ŷ(x)) = x", &ps.xhat.compose(&yhat)?, &Series::var(m, ctx), n));
    let nonneg = yhat.coeffs().iter().all(|c| !c.is_negative());
    checks.push(IdentityCheck { name: "Ŷ has nonnegative coefficients".into(), pass: nonneg, discrepancy: 0.0, order: m });
    let b0 = ps.b[0].clone();
    checks.push(IdentityCheck {
        name: "[x^1] Ŷ = b_0".into(),
        pass: yhat[1].sub(&b0).negligible(1.0),
        discrepancy: yhat[1].sub(&b0).magnitude(),
        order: 1,
    });
    checks.push(lagrange_check(&ps, n.min(m))?);

    let fh = fhat::<S>(ws, n, 0, ctx)?;
    checks.push(series_check("F̂(Y,0) = F̂_0(Y)", &fh.inner_coeff(0), &ps.f0hat, n));
    checks.push(series_check("1 - b_0 x̂/phi = F̂_0(Y)", &ps.fhat_at_zero()?, &ps.f0hat, n.min(m - 1)));

    Ok(IdentityReport { weights: ws.describe(), backend: ps.b.backend().to_string(), order: n, checks })
}

/// `[x^k] Ŷ = (1/k) [Y^{k-1}] W^k` for `1 <= k <= n`, `W = D²/B`.
pub fn lagrange_check<S: Scalar>(ps: &ParamSeries<S>, n: usize) -> Result<IdentityCheck> {
    let yhat = ps.yhat()?;
    let w = ps.w.truncate(n);
    let mut lagrange = vec![S::zero(ps.b.ctx())];
    let mut wk = Series::one(n, ps.b.ctx());
    for k in 1..=n {
        wk = wk.mul(&w)?;
        lagrange.push(wk[k - 1].div_i64(k as i64));
    }
    let lagrange = Series::from_coeffs(lagrange, ps.b.ctx().clone());
    let mut c = series_check("Lagrange: [x^n] Ŷ = (1/n) [Y^(n-1)] W^n", &yhat, &lagrange, n);
    c.order = n;
    Ok(c)
}
