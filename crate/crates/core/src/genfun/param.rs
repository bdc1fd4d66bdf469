//! Series form of the explicit parametrization.
//!
//! With `D = B + Y B'`:
//! `x̂ = Y B / D²`, `ψ = Y B'/B`, `φ = Y (B - Y B')/D`,
//! `F̂_0 = 1 - b_0 / (B (1 - ψ²))`, and
//! `F̂(Y, y) = ((Y - y) √q(Y, y) - φ(Y) + y) / (2y)` where
//! `q = Q / (Y - y)²` and `Q = (φ(Y) + y)² - 4 y B(y) x̂(Y)`.

use super::Result;
use crate::powseries::{Bivariate, Series};
use crate::scalar::Scalar;
use crate::weights::WeightSequence;

/// Univariate pieces of the parametrization, all to order `order` in `Y`.
#[derive(Clone, Debug)]
pub struct ParamSeries<S: Scalar> {
    pub order: usize,
    pub b: Series<S>,
    pub bp: Series<S>,
    /// `B + Y B'`
    pub d: Series<S>,
    pub xhat: Series<S>,
    pub psi: Series<S>,
    pub phi: Series<S>,
    pub f0hat: Series<S>,
    /// `D² / B = Y / x̂`, the Lagrange kernel.
    pub w: Series<S>,
}

impl<S: Scalar> ParamSeries<S> {
    pub fn new(ws: &WeightSequence, n: usize, ctx: &S::Ctx) -> Result<Self> {
        let b_ext = ws.b_series::<S>(n + 1, ctx)?;
        let bp = b_ext.derivative()?;
        let b = b_ext.truncate(n);
        let ybp = bp.shift(1).truncate(n);
        let d = b.add(&ybp)?;
        let d2 = d.mul(&d)?;
        let xhat = b.shift(1).truncate(n).div(&d2)?;
        let psi = ybp.div(&b)?;
        let b_minus = b.sub(&ybp)?;
        let phi = b_minus.shift(1).truncate(n).div(&d)?;
        let b0 = Series::constant(b[0].clone(), n);
        let f0hat = Series::one(n, ctx).sub(&b0.mul(&b)?.div(&b_minus.mul(&d)?)?)?;
        let w = d2.div(&b)?;
        Ok(ParamSeries { order: n, b, bp, d, xhat, psi, phi, f0hat, w })
    }

    pub fn yhat(&self) -> Result<Series<S>> {
        Ok(self.xhat.reverse()?)
    }

    /// `x̂' = ((B - Y B')² - 2 Y² B B'') / D³` cross-checked form is in
    /// [`super::eval`]; here the plain series derivative.
    pub fn xhat_prime(&self) -> Result<Series<S>> {
        Ok(self.xhat.derivative()?)
    }

    /// `1 - b_0 x̂/φ`, i.e. `F̂(Y, 0)` computed without the square root.
    pub fn fhat_at_zero(&self) -> Result<Series<S>> {
        let n = self.order;
        let phi_over_y = self.phi.unshift(1)?;
        let xhat_over_y = self.xhat.unshift(1)?;
        let ratio = xhat_over_y.div(&phi_over_y)?.scale(&self.b[0]);
        Ok(Series::one(n - 1, self.b.ctx()).sub(&ratio)?)
    }
}

/// `Q(Y, y)` on the box `(outer, inner)`.
pub fn big_q<S: Scalar>(ws: &WeightSequence, outer: usize, inner: usize, ctx: &S::Ctx) -> Result<Bivariate<S>> {
    let ps = ParamSeries::<S>::new(ws, outer, ctx)?;
    big_q_from(&ps, ws, inner)
}

pub fn big_q_from<S: Scalar>(ps: &ParamSeries<S>, ws: &WeightSequence, inner: usize) -> Result<Bivariate<S>> {
    let ctx = ps.b.ctx();
    let phi2 = ps.phi.mul(&ps.phi)?;
    let one = Series::one(inner, ctx);
    let y = Series::var(inner, ctx);
    let y2 = Series::from_i64s(&[0, 0, 1], inner, ctx);
    let yb = ws.b_series::<S>(inner, ctx)?.shift(1).truncate(inner);
    let outer_one = Series::one(ps.order, ctx);
    let q = Bivariate::outer_product(&phi2, &one)?
        .add(&Bivariate::outer_product(&ps.phi.mul_i64(2), &y)?)?
        .add(&Bivariate::outer_product(&outer_one, &y2)?)?
        .sub(&Bivariate::outer_product(&ps.xhat.mul_i64(4), &yb)?)?;
    Ok(q)
}

/// Everything needed for `F̂` on a box.
#[derive(Clone, Debug)]
pub struct Bundle<S: Scalar> {
    pub series: ParamSeries<S>,
    pub yhat: Series<S>,
}

/// Builds `x̂, φ, ψ, F̂_0, W` to order `n` and `Ŷ = x̂^{-1}`.
pub fn build_parametrization<S: Scalar>(ws: &WeightSequence, n: usize, ctx: &S::Ctx) -> Result<Bundle<S>> {
    let series = ParamSeries::new(ws, n, ctx)?;
    let yhat = series.yhat()?;
    Ok(Bundle { series, yhat })
}

/// `q = Q/(Y - y)²` and `R = (Y - y)√q` on the box `(n, p)`.
pub fn q_and_r<S: Scalar>(ws: &WeightSequence, n: usize, p: usize, ctx: &S::Ctx) -> Result<(Bivariate<S>, Bivariate<S>)> {
    let big = big_q::<S>(ws, n + p + 2, p, ctx)?;
    let q = big.divide_out_square()?;
    // q(0, y) = 1, so the principal root starts from the constant series 1
    let sqrt_q = q.sqrt_from(Series::one(p, ctx))?;
    let r = sqrt_q.times_diff();
    Ok((q, r))
}

/// `F̂(Y, y)` on the box `(n, p)`, via `F̂_{a,p} = R_{a,p+1}/2 + [a = p = 0]/2`.
pub fn fhat<S: Scalar>(ws: &WeightSequence, n: usize, p: usize, ctx: &S::Ctx) -> Result<Bivariate<S>> {
    let (_, r) = q_and_r::<S>(ws, n, p + 1, ctx)?;
    fhat_from_r(&r, n, p)
}

fn fhat_from_r<S: Scalar>(r: &Bivariate<S>, n: usize, p: usize) -> Result<Bivariate<S>> {
    let ctx = r.ctx().clone();
    let mut slices = Vec::with_capacity(n + 1);
    for a in 0..=n {
        let mut coeffs = Vec::with_capacity(p + 1);
        for k in 0..=p {
            let mut c = r.coeff(a, k + 1).div_i64(2);
            if a == 0 && k == 0 {
                c = c.add(&S::one(&ctx).div_i64(2));
            }
            coeffs.push(c);
        }
        slices.push(Series::from_coeffs(coeffs, ctx.clone()));
    }
    Ok(Bivariate::from_slices(slices))
}

/// `F(x, y) = F̂(Ŷ(x), y)` on the box `(n, p)`.
pub fn f_from_parametrization<S: Scalar>(ws: &WeightSequence, n: usize, p: usize, ctx: &S::Ctx) -> Result<Bivariate<S>> {
    let fh = fhat::<S>(ws, n, p, ctx)?;
    let yhat = ParamSeries::<S>::new(ws, n, ctx)?.yhat()?;
    Ok(fh.compose_outer(&yhat)?)
}

/// `F_0(x) = F̂_0(Ŷ(x))` to order `n`.
pub fn f0_from_parametrization<S: Scalar>(ws: &WeightSequence, n: usize, ctx: &S::Ctx) -> Result<Series<S>> {
    let ps = ParamSeries::<S>::new(ws, n, ctx)?;
    let yhat = ps.yhat()?;
    Ok(ps.f0hat.compose(&yhat)?)
}

/// Largest coefficient discrepancy between the two pipelines on `(n, p)`;
/// exactly zero on the rational backend when everything is consistent.
pub fn consistency_compose<S: Scalar>(ws: &WeightSequence, n: usize, p: usize, ctx: &S::Ctx) -> Result<f64> {
    let (f, _) = super::solve_functional_equation::<S>(ws, n, p, ctx)?;
    let g = f_from_parametrization::<S>(ws, n, p, ctx)?;
    let diff = f.max_abs_diff(&g);
    // a rational discrepancy too small for f64 must still read as nonzero
    if diff == 0.0 && !f.approx_eq(&g) {
        return Ok(f64::MIN_POSITIVE);
    }
    Ok(diff)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rug::Rational;

    #[test]
    fn xhat_for_one_plus_y_squared() {
        // x̂ = Y (1 + Y²) / (1 + 3Y²)²
        let ws = WeightSequence::polynomial_i64(&[1, 0, 1]);
        let ps = ParamSeries::<Rational>::new(&ws, 10, &()).unwrap();
        let num = Series::from_i64s(&[0, 1, 0, 1], 10, &());
        let den = Series::from_i64s(&[1, 0, 3], 10, &());
        let expect = num.div(&den.mul(&den).unwrap()).unwrap();
        assert_eq!(ps.xhat, expect);
        assert_eq!(ps.yhat().unwrap()[1], 1);
    }

    #[test]
    fn q_is_one_on_the_axis() {
        let ws = WeightSequence::polynomial_i64(&[1, 1, 1]);
        let (q, _) = q_and_r::<Rational>(&ws, 6, 6, &()).unwrap();
        assert_eq!(q.slice(0), &Series::one(6, &()));
    }

    #[test]
    fn pipelines_agree_small() {
        let ws = WeightSequence::polynomial_i64(&[1, 0, 1]);
        assert_eq!(consistency_compose::<Rational>(&ws, 8, 8, &()).unwrap(), 0.0);
    }

    #[test]
    fn f0_two_routes() {
        let ws = WeightSequence::polynomial_i64(&[1, 1, 1]);
        let (_, f0) = crate::genfun::solve_functional_equation::<Rational>(&ws, 10, 0, &()).unwrap();
        assert_eq!(f0_from_parametrization::<Rational>(&ws, 10, &()).unwrap(), f0);
    }
}
