//! Truncated formal power series.
//!
//! A [`Series`] of order `N` stores the coefficients of `1, t, ..., t^N` and
//! nothing else: every operation returns a result whose order never exceeds
//! what its inputs determine. Coefficients live in a [`Scalar`] ring, and
//! operands from different backends (or float precisions) are rejected.

mod bivariate;
pub mod io;

pub use bivariate::Bivariate;

use std::ops::Index;

use rug::{Float, Rational};
use thiserror::Error;

use crate::scalar::{Backend, Scalar};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SeriesError {
    #[error("backend mismatch: {left} vs {right}")]
    BackendMismatch { left: Backend, right: Backend },
    #[error("division by a series with zero constant term")]
    NotAUnit,
    #[error("composition needs an inner series with zero constant term")]
    NonzeroConstant,
    #[error("reversion needs f(0) = 0 and f'(0) != 0")]
    ZeroLinearTerm,
    #[error("constant term has no square root in this ring")]
    NoSquareRoot,
    #[error("derivative of an order-0 series carries no information")]
    ZeroOrder,
    #[error("not divisible: {0}")]
    NotDivisible(String),
}

pub type Result<T> = std::result::Result<T, SeriesError>;

#[derive(Clone, Debug, PartialEq)]
pub struct Series<S: Scalar> {
    coeffs: Vec<S>,
    ctx: S::Ctx,
}

impl<S: Scalar> Index<usize> for Series<S> {
    type Output = S;
    fn index(&self, k: usize) -> &S {
        &self.coeffs[k]
    }
}

impl<S: Scalar> Series<S> {
    /// Builds a series of order `coeffs.len() - 1`.
    ///
    /// # Panics
    /// If `coeffs` is empty.
    pub fn from_coeffs(coeffs: Vec<S>, ctx: S::Ctx) -> Self {
        assert!(!coeffs.is_empty(), "a series has at least one coefficient");
        Series { coeffs, ctx }
    }

    /// Pads with zeros or truncates `vals` to order `order`.
    pub fn from_rationals(vals: &[Rational], order: usize, ctx: &S::Ctx) -> Self {
        let coeffs = (0..=order)
            .map(|k| match vals.get(k) {
                Some(q) => S::from_rational(q, ctx),
                None => S::zero(ctx),
            })
            .collect();
        Series { coeffs, ctx: ctx.clone() }
    }

    pub fn from_i64s(vals: &[i64], order: usize, ctx: &S::Ctx) -> Self {
        let coeffs = (0..=order)
            .map(|k| S::from_i64(vals.get(k).copied().unwrap_or(0), ctx))
            .collect();
        Series { coeffs, ctx: ctx.clone() }
    }

    pub fn zero(order: usize, ctx: &S::Ctx) -> Self {
        Series { coeffs: vec![S::zero(ctx); order + 1], ctx: ctx.clone() }
    }

    pub fn constant(c: S, order: usize) -> Self {
        let ctx = c.ctx();
        let mut s = Self::zero(order, &ctx);
        s.coeffs[0] = c;
        s
    }

    pub fn one(order: usize, ctx: &S::Ctx) -> Self {
        Self::constant(S::one(ctx), order)
    }

    /// The series `t`.
    pub fn var(order: usize, ctx: &S::Ctx) -> Self {
        let mut s = Self::zero(order, ctx);
        if order >= 1 {
            s.coeffs[1] = S::one(ctx);
        }
        s
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<S> {
        self.coeffs
    }

    pub fn ctx(&self) -> &S::Ctx {
        &self.ctx
    }

    pub fn backend(&self) -> Backend {
        S::backend(&self.ctx)
    }

    pub fn coeff(&self, k: usize) -> &S {
        &self.coeffs[k]
    }

    pub fn set_coeff(&mut self, k: usize, v: S) {
        self.coeffs[k] = v;
    }

    /// Index of the first nonzero coefficient, if any.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub fn truncate(&self, order: usize) -> Self {
        let n = order.min(self.order());
        Series { coeffs: self.coeffs[..=n].to_vec(), ctx: self.ctx.clone() }
    }

    /// Same coefficients, zero-padded up to `order` (no truncation).
    ///
    /// Only meaningful for series known to be polynomials.
    pub fn pad(&self, order: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        while coeffs.len() <= order {
            coeffs.push(S::zero(&self.ctx));
        }
        Series { coeffs, ctx: self.ctx.clone() }
    }

    pub fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.ctx != other.ctx {
            return Err(SeriesError::BackendMismatch { left: self.backend(), right: other.backend() });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let n = self.order().min(other.order());
        let coeffs = (0..=n).map(|k| self.coeffs[k].add(&other.coeffs[k])).collect();
        Ok(Series { coeffs, ctx: self.ctx.clone() })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let n = self.order().min(other.order());
        let coeffs = (0..=n).map(|k| self.coeffs[k].sub(&other.coeffs[k])).collect();
        Ok(Series { coeffs, ctx: self.ctx.clone() })
    }

    pub fn neg(&self) -> Self {
        Series { coeffs: self.coeffs.iter().map(S::neg).collect(), ctx: self.ctx.clone() }
    }

    pub fn scale(&self, c: &S) -> Self {
        Series { coeffs: self.coeffs.iter().map(|a| a.mul(c)).collect(), ctx: self.ctx.clone() }
    }

    pub fn mul_i64(&self, k: i64) -> Self {
        Series { coeffs: self.coeffs.iter().map(|a| a.mul_i64(k)).collect(), ctx: self.ctx.clone() }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(self.mul_to(other, self.order().min(other.order())))
    }

    /// Product truncated at `order` (which must not exceed either input order).
    fn mul_to(&self, other: &Self, order: usize) -> Self {
        let mut out = vec![S::zero(&self.ctx); order + 1];
        let va = self.valuation().unwrap_or(order + 1);
        let vb = other.valuation().unwrap_or(order + 1);
        for i in va..=order {
            let a = &self.coeffs[i];
            if a.is_zero() {
                continue;
            }
            for j in vb..=(order - i).min(other.order()) {
                out[i + j].add_mul_assign(a, &other.coeffs[j]);
            }
        }
        Series { coeffs: out, ctx: self.ctx.clone() }
    }

    /// `self / other`; `other` must have a nonzero constant term.
    pub fn div(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        if other.coeffs[0].is_zero() {
            return Err(SeriesError::NotAUnit);
        }
        let n = self.order().min(other.order());
        let b0 = &other.coeffs[0];
        let mut q: Vec<S> = Vec::with_capacity(n + 1);
        for k in 0..=n {
            let mut acc = self.coeffs[k].clone();
            for i in 1..=k {
                acc.sub_mul_assign(&other.coeffs[i], &q[k - i]);
            }
            q.push(acc.div(b0));
        }
        Ok(Series { coeffs: q, ctx: self.ctx.clone() })
    }

    pub fn recip(&self) -> Result<Self> {
        Self::one(self.order(), &self.ctx).div(self)
    }

    pub fn derivative(&self) -> Result<Self> {
        if self.order() == 0 {
            return Err(SeriesError::ZeroOrder);
        }
        let coeffs = (1..=self.order()).map(|k| self.coeffs[k].mul_i64(k as i64)).collect();
        Ok(Series { coeffs, ctx: self.ctx.clone() })
    }

    /// Antiderivative with zero constant term; order grows by one.
    pub fn integrate(&self) -> Self {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(S::zero(&self.ctx));
        for (k, c) in self.coeffs.iter().enumerate() {
            coeffs.push(c.div_i64(k as i64 + 1));
        }
        Series { coeffs, ctx: self.ctx.clone() }
    }

    /// `t^k · self`, known to order `N + k`.
    pub fn shift(&self, k: usize) -> Self {
        let mut coeffs = vec![S::zero(&self.ctx); k];
        coeffs.extend(self.coeffs.iter().cloned());
        Series { coeffs, ctx: self.ctx.clone() }
    }

    /// `self / t^k`, requiring the first `k` coefficients to vanish.
    pub fn unshift(&self, k: usize) -> Result<Self> {
        if k > self.order() {
            return Err(SeriesError::NotDivisible(format!("order {} < shift {k}", self.order())));
        }
        let scale = self.max_abs();
        if let Some(i) = (0..k).find(|&i| !self.coeffs[i].negligible(scale)) {
            return Err(SeriesError::NotDivisible(format!("coefficient {i} is nonzero")));
        }
        Ok(Series { coeffs: self.coeffs[k..].to_vec(), ctx: self.ctx.clone() })
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut result = Self::one(self.order(), &self.ctx);
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul_to(&base, self.order());
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_to(&base, self.order());
            }
        }
        result
    }

    /// `self(inner(t))`. Coefficient `k` depends only on coefficients `<= k`.
    pub fn compose(&self, inner: &Self) -> Result<Self> {
        Ok(Self::compose_many(std::slice::from_ref(self), inner)?.pop().unwrap())
    }

    /// Composes every outer series with the same inner one, sharing the
    /// powers of `inner`.
    pub fn compose_many(outers: &[Self], inner: &Self) -> Result<Vec<Self>> {
        for o in outers {
            o.check_compatible(inner)?;
        }
        if !inner.coeffs[0].is_zero() {
            return Err(SeriesError::NonzeroConstant);
        }
        let ctx = inner.ctx.clone();
        let max_outer = outers.iter().map(|o| o.order()).max().unwrap_or(0);
        let n = max_outer.min(inner.order());
        let mut results: Vec<Self> =
            outers.iter().map(|o| Self::constant(o.coeffs[0].clone(), n.min(o.order()))).collect();
        let inner = inner.truncate(n);
        let mut power = Self::one(n, &ctx);
        for k in 1..=n {
            power = power.mul_to(&inner, n);
            let start = power.valuation().unwrap_or(n + 1);
            for (o, r) in outers.iter().zip(results.iter_mut()) {
                if k > r.order() || o.coeffs[k].is_zero() {
                    continue;
                }
                let top = r.order();
                for j in start..=top {
                    r.coeffs[j].add_mul_assign(&o.coeffs[k], &power.coeffs[j]);
                }
            }
        }
        Ok(results)
    }

    /// Compositional inverse by Newton iteration with precision doubling:
    /// `g <- g - (f(g) - t) / f'(g)`.
    pub fn reverse(&self) -> Result<Self> {
        let n = self.order();
        if n == 0 || !self.coeffs[0].is_zero() || self.coeffs[1].is_zero() {
            return Err(SeriesError::ZeroLinearTerm);
        }
        let ctx = self.ctx.clone();
        // f' is known to order n-1; the zero pad at order n only touches
        // coefficients above n after division into a residual of valuation >= 1.
        let fprime = self.derivative()?.pad(n);
        let mut g = Self::zero(1, &ctx);
        g.coeffs[1] = S::one(&ctx).div(&self.coeffs[1]);
        let mut m = 1;
        while m < n {
            m = (2 * m).min(n);
            let gm = g.pad(m);
            let mut composed =
                Self::compose_many(&[self.truncate(m), fprime.truncate(m)], &gm)?.into_iter();
            let fg = composed.next().unwrap();
            let fpg = composed.next().unwrap();
            let resid = fg.sub(&Self::var(m, &ctx))?;
            g = gm.sub(&resid.div(&fpg)?)?;
        }
        Ok(g)
    }

    /// Square root with the given constant-term root, by Newton iteration
    /// `s <- (s + a/s) / 2` with precision doubling.
    pub fn sqrt_with(&self, s0: S) -> Result<Self> {
        if s0.is_zero() {
            return Err(SeriesError::NotAUnit);
        }
        let n = self.order();
        let mut s = Self::constant(s0, 0);
        let mut m = 0;
        while m < n {
            m = (2 * m + 1).min(n);
            let sm = s.pad(m);
            let q = self.truncate(m).div(&sm)?;
            let sum = sm.add(&q)?;
            s = Series { coeffs: sum.coeffs.iter().map(|c| c.div_i64(2)).collect(), ctx: sum.ctx };
        }
        Ok(s)
    }

    /// Principal square root (positive constant term).
    pub fn sqrt(&self) -> Result<Self> {
        let s0 = self.coeffs[0].sqrt().ok_or(SeriesError::NoSquareRoot)?;
        self.sqrt_with(s0)
    }

    /// Evaluates the truncated polynomial at `x` by Horner's rule.
    pub fn eval(&self, x: &S) -> S {
        let mut acc = S::zero(&self.ctx);
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(x).add(c);
        }
        acc
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(S::magnitude).fold(0.0, f64::max)
    }

    /// Coefficientwise equality: exact for rationals, up to rounding
    /// relative to the larger coefficient magnitude for floats.
    pub fn approx_eq(&self, other: &Self) -> bool {
        if self.check_compatible(other).is_err() {
            return false;
        }
        let n = self.order().min(other.order());
        let scale = self.max_abs().max(other.max_abs()).max(1.0);
        (0..=n).all(|k| self.coeffs[k].sub(&other.coeffs[k]).negligible(scale))
    }

    /// Largest coefficientwise discrepancy as an `f64`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let n = self.order().min(other.order());
        (0..=n).map(|k| self.coeffs[k].sub(&other.coeffs[k]).magnitude()).fold(0.0, f64::max)
    }

    pub fn to_float(&self, prec: u32) -> Series<Float> {
        Series { coeffs: self.coeffs.iter().map(|c| c.to_float(prec)).collect(), ctx: prec }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    type Q = Series<Rational>;

    fn q(vals: &[i64]) -> Q {
        Q::from_i64s(vals, vals.len() - 1, &())
    }

    #[test]
    fn product_of_binomials() {
        let p = q(&[1, 1, 0, 0]).mul(&q(&[1, -1, 0, 0])).unwrap();
        assert_eq!(p, q(&[1, 0, -1, 0]));
    }

    #[test]
    fn derivative_and_integral() {
        let f = Q::from_rationals(&[1.into(), 1.into(), Rational::from((1, 2))], 2, &());
        assert_eq!(f.derivative().unwrap(), q(&[1, 1]));
        let back = Q::from_rationals(&[0.into(), 1.into(), Rational::from((1, 2))], 2, &());
        assert_eq!(f.derivative().unwrap().integrate(), back);
        assert_eq!(q(&[5]).derivative(), Err(SeriesError::ZeroOrder));
    }

    #[test]
    fn geometric_series_by_division() {
        assert_eq!(q(&[1, -1, 0, 0, 0]).recip().unwrap(), q(&[1, 1, 1, 1, 1]));
        assert_eq!(q(&[0, 1, 0]).recip(), Err(SeriesError::NotAUnit));
    }

    #[test]
    fn truncation_is_min_order() {
        let s = q(&[1, 2, 3]).add(&q(&[1, 1, 1, 1, 1])).unwrap();
        assert_eq!(s.order(), 2);
    }

    #[test]
    fn backend_mismatch_rejected() {
        let a = Series::<Float>::one(3, &64);
        let b = Series::<Float>::one(3, &128);
        assert!(matches!(a.add(&b), Err(SeriesError::BackendMismatch { .. })));
    }

    #[test]
    fn compose_geometric_with_quadratic() {
        let outer = q(&[1, 1, 1, 1]);
        let inner = q(&[0, 1, 1, 0]);
        assert_eq!(outer.compose(&inner).unwrap(), q(&[1, 1, 2, 3]));
        assert_eq!(q(&[1, 1]).compose(&q(&[1, 1])), Err(SeriesError::NonzeroConstant));
    }

    #[test]
    fn compose_with_identity() {
        let f = q(&[3, -1, 4, 1, -5]);
        let t = Q::var(4, &());
        assert_eq!(f.compose(&t).unwrap(), f);
        assert_eq!(t.compose(&q(&[0, 2, 7, 1, 8])).unwrap(), q(&[0, 2, 7, 1, 8]));
    }

    #[test]
    fn reverse_gives_catalan_numbers() {
        let f = q(&[0, 1, -1, 0, 0, 0]);
        assert_eq!(f.reverse().unwrap(), q(&[0, 1, 1, 2, 5, 14]));
        assert_eq!(Q::var(5, &()).reverse().unwrap(), Q::var(5, &()));
        let half = Q::from_rationals(&[0.into(), Rational::from((1, 2))], 3, &());
        assert_eq!(q(&[0, 2, 0, 0]).reverse().unwrap(), half);
        assert_eq!(q(&[0, 0, 1]).reverse(), Err(SeriesError::ZeroLinearTerm));
    }

    #[test]
    fn sqrt_of_perfect_square() {
        let a = q(&[1, 1, 0, 0, 0, 0]);
        let sq = a.mul(&a).unwrap();
        assert_eq!(sq.sqrt().unwrap(), a);
        assert_eq!(q(&[2, 1]).sqrt(), Err(SeriesError::NoSquareRoot));
    }

    #[test]
    fn float_sqrt_matches_binomial_series() {
        // sqrt(1 - 4t) = 1 - 2 sum Catalan(k-1) t^k
        let f = Series::<Float>::from_i64s(&[1, -4], 8, &128);
        let s = f.sqrt().unwrap();
        let expect = [1, -2, -2, -4, -10, -28, -84, -264, -858];
        for (k, e) in expect.iter().enumerate() {
            assert_eq!(s[k].to_f64(), *e as f64);
        }
    }

    #[test]
    fn unshift_requires_vanishing() {
        assert_eq!(q(&[0, 0, 3, 4]).unshift(2).unwrap(), q(&[3, 4]));
        assert!(q(&[0, 1, 3]).unshift(2).is_err());
    }

    fn small_series(order: usize) -> impl Strategy<Value = Q> {
        prop::collection::vec((-9i64..10, 1i64..5), order + 1).prop_map(move |v| {
            let rats: Vec<Rational> = v.into_iter().map(|(n, d)| Rational::from((n, d))).collect();
            Q::from_rationals(&rats, order, &())
        })
    }

    proptest! {
        #[test]
        fn ring_axioms(a in small_series(6), b in small_series(6), c in small_series(6)) {
            let l = a.add(&b).unwrap().add(&c).unwrap();
            let r = a.add(&b.add(&c).unwrap()).unwrap();
            prop_assert_eq!(l, r);
            let l = a.mul(&b.add(&c).unwrap()).unwrap();
            let r = a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap();
            prop_assert_eq!(l, r);
            prop_assert_eq!(a.mul(&b).unwrap(), b.mul(&a).unwrap());
        }

        #[test]
        fn division_inverts_multiplication(a in small_series(6), b in small_series(6)) {
            prop_assume!(!b[0].is_zero());
            prop_assert_eq!(a.mul(&b).unwrap().div(&b).unwrap(), a);
        }

        #[test]
        fn reverse_is_an_involution(f in small_series(7)) {
            let mut f = f;
            f.set_coeff(0, Rational::new());
            prop_assume!(!f[1].is_zero());
            let g = f.reverse().unwrap();
            prop_assert_eq!(g.reverse().unwrap(), f.clone());
            prop_assert_eq!(f.compose(&g).unwrap(), Q::var(7, &()));
        }
    }
}
