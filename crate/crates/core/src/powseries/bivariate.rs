//! Truncated series in two variables, stored as slices in the outer one.

use super::{Result, Series, SeriesError};
use crate::scalar::Scalar;

/// `Σ c_{a,b} X^a y^b` for `a <= outer_order`, `b <= inner_order`.
///
/// `slices[a]` is the coefficient of `X^a`, a series in `y`. All slices share
/// the same inner order.
#[derive(Clone, Debug, PartialEq)]
pub struct Bivariate<S: Scalar> {
    slices: Vec<Series<S>>,
    inner_order: usize,
    ctx: S::Ctx,
}

impl<S: Scalar> Bivariate<S> {
    pub fn zero(outer: usize, inner: usize, ctx: &S::Ctx) -> Self {
        Bivariate { slices: vec![Series::zero(inner, ctx); outer + 1], inner_order: inner, ctx: ctx.clone() }
    }

    /// Builds from slices, truncating them to the smallest inner order.
    pub fn from_slices(slices: Vec<Series<S>>) -> Self {
        assert!(!slices.is_empty(), "a bivariate series has at least one slice");
        let ctx = slices[0].ctx().clone();
        let inner = slices.iter().map(Series::order).min().unwrap();
        let slices = slices.into_iter().map(|s| s.truncate(inner)).collect();
        Bivariate { slices, inner_order: inner, ctx }
    }

    /// `f(X) · g(y)`.
    pub fn outer_product(f: &Series<S>, g: &Series<S>) -> Result<Self> {
        f.check_compatible(g)?;
        let slices = f.coeffs().iter().map(|c| g.scale(c)).collect();
        Ok(Bivariate { slices, inner_order: g.order(), ctx: f.ctx().clone() })
    }

    pub fn outer_order(&self) -> usize {
        self.slices.len() - 1
    }

    pub fn inner_order(&self) -> usize {
        self.inner_order
    }

    pub fn ctx(&self) -> &S::Ctx {
        &self.ctx
    }

    pub fn slices(&self) -> &[Series<S>] {
        &self.slices
    }

    pub fn slice(&self, a: usize) -> &Series<S> {
        &self.slices[a]
    }

    pub fn coeff(&self, a: usize, b: usize) -> &S {
        &self.slices[a][b]
    }

    fn check(&self, other: &Self) -> Result<()> {
        self.slices[0].check_compatible(&other.slices[0])
    }

    pub fn truncate(&self, outer: usize, inner: usize) -> Self {
        let outer = outer.min(self.outer_order());
        let inner = inner.min(self.inner_order);
        let slices = self.slices[..=outer].iter().map(|s| s.truncate(inner)).collect();
        Bivariate { slices, inner_order: inner, ctx: self.ctx.clone() }
    }

    /// Coefficient of `y^b` as a series in the outer variable.
    pub fn inner_coeff(&self, b: usize) -> Series<S> {
        Series::from_coeffs(self.slices.iter().map(|s| s[b].clone()).collect(), self.ctx.clone())
    }

    /// Swaps the roles of the two variables.
    pub fn transpose(&self) -> Self {
        let slices = (0..=self.inner_order).map(|b| self.inner_coeff(b)).collect();
        Bivariate { slices, inner_order: self.outer_order(), ctx: self.ctx.clone() }
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&Series<S>, &Series<S>) -> Result<Series<S>>) -> Result<Self> {
        self.check(other)?;
        let n = self.outer_order().min(other.outer_order());
        let slices = (0..=n).map(|a| f(&self.slices[a], &other.slices[a])).collect::<Result<Vec<_>>>()?;
        Ok(Self::from_slices(slices))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a.add(b))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a.sub(b))
    }

    pub fn neg(&self) -> Self {
        self.map_slices(|s| s.neg())
    }

    pub fn scale(&self, c: &S) -> Self {
        self.map_slices(|s| s.scale(c))
    }

    fn map_slices(&self, f: impl Fn(&Series<S>) -> Series<S>) -> Self {
        Self::from_slices(self.slices.iter().map(f).collect())
    }

    /// Product truncated to the common box.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let n = self.outer_order().min(other.outer_order());
        let inner = self.inner_order.min(other.inner_order);
        let mut out = vec![Series::zero(inner, &self.ctx); n + 1];
        for i in 0..=n {
            if self.slices[i].valuation().is_none() {
                continue;
            }
            for j in 0..=(n - i) {
                let prod = self.slices[i].mul(&other.slices[j])?;
                out[i + j] = out[i + j].add(&prod)?;
            }
        }
        Ok(Bivariate { slices: out, inner_order: inner, ctx: self.ctx.clone() })
    }

    /// Multiplies by a series in the outer variable.
    pub fn mul_outer(&self, f: &Series<S>) -> Result<Self> {
        self.mul(&Self::outer_product(f, &Series::one(self.inner_order, &self.ctx))?)
    }

    /// Multiplies by a series in the inner variable.
    pub fn mul_inner(&self, g: &Series<S>) -> Result<Self> {
        let slices = self.slices.iter().map(|s| s.mul(g)).collect::<Result<Vec<_>>>()?;
        Ok(Self::from_slices(slices))
    }

    /// Quotient by outer-order recursion; `other`'s first slice must be a
    /// unit in the inner variable.
    pub fn div(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let n = self.outer_order().min(other.outer_order());
        let inner = self.inner_order.min(other.inner_order);
        let d0 = other.slices[0].truncate(inner);
        if d0[0].is_zero() {
            return Err(SeriesError::NotAUnit);
        }
        let mut q: Vec<Series<S>> = Vec::with_capacity(n + 1);
        for a in 0..=n {
            let mut acc = self.slices[a].truncate(inner);
            for i in 1..=a {
                acc = acc.sub(&other.slices[i].mul(&q[a - i])?)?;
            }
            q.push(acc.div(&d0)?);
        }
        Ok(Bivariate { slices: q, inner_order: inner, ctx: self.ctx.clone() })
    }

    /// Square root by recursion in the outer variable:
    /// `s_a = (q_a - Σ_{0<i<a} s_i s_{a-i}) / (2 s_0)` with `s_0 = sqrt(q_0)`.
    pub fn sqrt(&self) -> Result<Self> {
        let s0 = self.slices[0].sqrt()?;
        self.sqrt_from(s0)
    }

    /// As [`Bivariate::sqrt`] with a caller-supplied root of the first slice.
    pub fn sqrt_from(&self, s0: Series<S>) -> Result<Self> {
        let n = self.outer_order();
        let inner = self.inner_order.min(s0.order());
        let s0 = s0.truncate(inner);
        let two_s0 = s0.mul_i64(2);
        let mut s = vec![s0];
        for a in 1..=n {
            let mut acc = self.slices[a].truncate(inner);
            for i in 1..a {
                acc = acc.sub(&s[i].mul(&s[a - i])?)?;
            }
            s.push(acc.div(&two_s0)?);
        }
        Ok(Bivariate { slices: s, inner_order: inner, ctx: self.ctx.clone() })
    }

    pub fn derivative_outer(&self) -> Result<Self> {
        if self.outer_order() == 0 {
            return Err(SeriesError::ZeroOrder);
        }
        let slices = (1..=self.outer_order()).map(|a| self.slices[a].mul_i64(a as i64)).collect();
        Ok(Bivariate { slices, inner_order: self.inner_order, ctx: self.ctx.clone() })
    }

    pub fn derivative_inner(&self) -> Result<Self> {
        let slices = self.slices.iter().map(|s| s.derivative()).collect::<Result<Vec<_>>>()?;
        Ok(Self::from_slices(slices))
    }

    /// Multiplies by `X - y`, staying inside the input box.
    pub fn times_diff(&self) -> Self {
        let (n, p) = (self.outer_order(), self.inner_order);
        let mut out = Self::zero(n, p, &self.ctx);
        for a in 0..=n {
            for b in 0..=p {
                let mut c = S::zero(&self.ctx);
                if a >= 1 {
                    c = c.add(&self.slices[a - 1][b]);
                }
                if b >= 1 {
                    c = c.sub(&self.slices[a][b - 1]);
                }
                out.slices[a].set_coeff(b, c);
            }
        }
        out
    }

    /// `Σ_{a+b=k} c_{a,b} t^k`, exact up to `min(outer, inner)`.
    pub fn diagonal(&self) -> Series<S> {
        let n = self.outer_order().min(self.inner_order);
        let coeffs = (0..=n)
            .map(|k| {
                let mut c = S::zero(&self.ctx);
                for a in 0..=k {
                    c = c.add(&self.slices[a][k - a]);
                }
                c
            })
            .collect();
        Series::from_coeffs(coeffs, self.ctx.clone())
    }

    /// Exact division by `(X - y)^2`.
    ///
    /// With input box `(N, P)` the quotient is determined on `(N - P - 2, P)`:
    /// `r_{a,b} = Σ_k (k+1) c_{a+2+k, b-k}`. The two lowest outer slices of
    /// the input must then match `(X - y)^2 r`, otherwise `self` does not
    /// vanish to second order on the diagonal.
    pub fn divide_out_square(&self) -> Result<Self> {
        let (nq, p) = (self.outer_order(), self.inner_order);
        if nq < p + 2 {
            return Err(SeriesError::NotDivisible(format!("outer order {nq} too small for inner order {p}")));
        }
        let n = nq - p - 2;
        let mut r = Self::zero(n, p, &self.ctx);
        for a in 0..=n {
            for b in 0..=p {
                let mut c = S::zero(&self.ctx);
                for k in 0..=b {
                    c.add_mul_assign(&S::from_i64(k as i64 + 1, &self.ctx), &self.slices[a + 2 + k][b - k]);
                }
                r.slices[a].set_coeff(b, c);
            }
        }
        // remainder: coefficients of X^0 and X^1 in Q - (X-y)^2 r
        let scale = self.slices.iter().map(Series::max_abs).fold(1.0, f64::max);
        for b in 0..=p {
            let mut rem0 = self.slices[0][b].clone();
            if b >= 2 {
                rem0 = rem0.sub(&r.slices[0][b - 2]);
            }
            let mut rem1 = self.slices[1][b].clone();
            if b >= 2 && n >= 1 {
                rem1 = rem1.sub(&r.slices[1][b - 2]);
            }
            if b >= 1 {
                rem1 = rem1.add(&r.slices[0][b - 1].mul_i64(2));
            }
            let rem1_known = n >= 1 || b < 2;
            if !rem0.negligible(scale) || (rem1_known && !rem1.negligible(scale)) {
                return Err(SeriesError::NotDivisible(format!("nonzero remainder at y^{b}")));
            }
        }
        Ok(r)
    }

    /// `F(g(x), y)` for `g(0) = 0`; the outer variable becomes `x`.
    pub fn compose_outer(&self, g: &Series<S>) -> Result<Self> {
        self.slices[0].check_compatible(g)?;
        if !g[0].is_zero() {
            return Err(SeriesError::NonzeroConstant);
        }
        let n = self.outer_order().min(g.order());
        let g = g.truncate(n);
        let mut out = Self::zero(n, self.inner_order, &self.ctx);
        out.slices[0] = self.slices[0].clone();
        let mut power = Series::one(n, &self.ctx);
        for a in 1..=n {
            power = power.mul(&g)?;
            let slice = &self.slices[a];
            if slice.valuation().is_none() {
                continue;
            }
            for m in a..=n {
                let c = &power[m];
                if c.is_zero() {
                    continue;
                }
                for b in 0..=self.inner_order {
                    let mut v = out.slices[m][b].clone();
                    v.add_mul_assign(c, &slice[b]);
                    out.slices[m].set_coeff(b, v);
                }
            }
        }
        Ok(out)
    }

    pub fn approx_eq(&self, other: &Self) -> bool {
        if self.check(other).is_err() {
            return false;
        }
        let n = self.outer_order().min(other.outer_order());
        (0..=n).all(|a| self.slices[a].approx_eq(&other.slices[a]))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let n = self.outer_order().min(other.outer_order());
        (0..=n).map(|a| self.slices[a].max_abs_diff(&other.slices[a])).fold(0.0, f64::max)
    }
}
