//! Coefficient rings: exact GMP rationals and MPFR floats.

use std::fmt;

use rug::ops::Pow;
use rug::{Float, Integer, Rational};
use serde::Serialize;

/// Which coefficient ring a series lives in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Backend {
    ExactRational,
    /// MPFR float with the given precision in bits.
    BigFloat(u32),
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Backend::ExactRational => write!(f, "exact"),
            Backend::BigFloat(bits) => write!(f, "float{bits}"),
        }
    }
}

/// A value that may be `+∞` or not computed.
///
/// Used wherever a quantity can legitimately diverge, e.g. `B''(ρ)`.
#[derive(Clone, Debug, PartialEq)]
pub enum Extended<T> {
    Finite(T),
    PosInfinity,
    NotComputed,
}

impl<T> Extended<T> {
    pub fn finite(&self) -> Option<&T> {
        match self {
            Extended::Finite(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Extended::PosInfinity)
    }

    pub fn map<U>(self, f: impl FnOnce(T) -> U) -> Extended<U> {
        match self {
            Extended::Finite(v) => Extended::Finite(f(v)),
            Extended::PosInfinity => Extended::PosInfinity,
            Extended::NotComputed => Extended::NotComputed,
        }
    }
}

impl Extended<Float> {
    /// Renders finite values in decimal, `"inf"` and `"not-computed"` otherwise.
    pub fn render(&self) -> String {
        match self {
            Extended::Finite(v) => render_float(v),
            Extended::PosInfinity => "inf".to_string(),
            Extended::NotComputed => "not-computed".to_string(),
        }
    }
}

/// Coefficient ring operations needed by the series code.
///
/// Binary operations assume both operands share a context; the series
/// layer checks that before calling in.
pub trait Scalar: Clone + fmt::Debug + PartialEq + Send + Sync + 'static {
    /// Construction context (unit for rationals, precision for floats).
    type Ctx: Clone + fmt::Debug + PartialEq + Send + Sync;

    fn backend(ctx: &Self::Ctx) -> Backend;
    fn ctx(&self) -> Self::Ctx;
    fn zero(ctx: &Self::Ctx) -> Self;
    fn from_i64(v: i64, ctx: &Self::Ctx) -> Self;
    fn from_rational(q: &Rational, ctx: &Self::Ctx) -> Self;
    /// Float input is only accepted by inexact backends.
    fn from_float(x: &Float, ctx: &Self::Ctx) -> Option<Self>;
    fn to_float(&self, prec: u32) -> Float;

    fn one(ctx: &Self::Ctx) -> Self {
        Self::from_i64(1, ctx)
    }

    fn is_zero(&self) -> bool;
    fn is_negative(&self) -> bool;
    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    /// `rhs` must be nonzero.
    fn div(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;
    fn mul_i64(&self, k: i64) -> Self;
    fn div_i64(&self, k: i64) -> Self;
    /// `self += a * b`
    fn add_mul_assign(&mut self, a: &Self, b: &Self);
    /// `self -= a * b`
    fn sub_mul_assign(&mut self, a: &Self, b: &Self);
    /// Square root in the ring, if one exists.
    fn sqrt(&self) -> Option<Self>;
    fn to_f64(&self) -> f64;
    /// `|self|` as an `f64` magnitude, for tolerance bookkeeping.
    fn magnitude(&self) -> f64 {
        self.to_f64().abs()
    }
    /// Whether `self` is zero up to rounding, relative to `scale`.
    ///
    /// Exact for rationals.
    fn negligible(&self, scale: f64) -> bool;
    /// `(numerator, denominator)` strings for CSV output.
    fn render_parts(&self) -> (String, String);
    /// Single-string form: `"num/den"` for rationals, decimal for floats.
    fn render(&self) -> String;
}

impl Scalar for Rational {
    type Ctx = ();

    fn backend(_: &()) -> Backend {
        Backend::ExactRational
    }
    fn ctx(&self) {}
    fn zero(_: &()) -> Self {
        Rational::new()
    }
    fn from_i64(v: i64, _: &()) -> Self {
        Rational::from(v)
    }
    fn from_rational(q: &Rational, _: &()) -> Self {
        q.clone()
    }
    fn from_float(_: &Float, _: &()) -> Option<Self> {
        None
    }
    fn to_float(&self, prec: u32) -> Float {
        Float::with_val(prec, self)
    }
    fn is_zero(&self) -> bool {
        self.cmp0() == std::cmp::Ordering::Equal
    }
    fn is_negative(&self) -> bool {
        self.cmp0() == std::cmp::Ordering::Less
    }
    fn add(&self, rhs: &Self) -> Self {
        Rational::from(self + rhs)
    }
    fn sub(&self, rhs: &Self) -> Self {
        Rational::from(self - rhs)
    }
    fn mul(&self, rhs: &Self) -> Self {
        Rational::from(self * rhs)
    }
    fn div(&self, rhs: &Self) -> Self {
        Rational::from(self / rhs)
    }
    fn neg(&self) -> Self {
        Rational::from(-self)
    }
    fn mul_i64(&self, k: i64) -> Self {
        Rational::from(self * k)
    }
    fn div_i64(&self, k: i64) -> Self {
        Rational::from(self / k)
    }
    fn add_mul_assign(&mut self, a: &Self, b: &Self) {
        if a.is_zero() || b.is_zero() {
            return;
        }
        *self += Rational::from(a * b);
    }
    fn sub_mul_assign(&mut self, a: &Self, b: &Self) {
        if a.is_zero() || b.is_zero() {
            return;
        }
        *self -= Rational::from(a * b);
    }
    fn sqrt(&self) -> Option<Self> {
        if self.is_negative() {
            return None;
        }
        let (num, den) = (self.numer(), self.denom());
        if num.is_perfect_square() && den.is_perfect_square() {
            Some(Rational::from((num.clone().sqrt(), den.clone().sqrt())))
        } else {
            None
        }
    }
    fn to_f64(&self) -> f64 {
        Rational::to_f64(self)
    }
    fn negligible(&self, _scale: f64) -> bool {
        Scalar::is_zero(self)
    }
    fn render_parts(&self) -> (String, String) {
        (self.numer().to_string(), self.denom().to_string())
    }
    fn render(&self) -> String {
        format!("{}/{}", self.numer(), self.denom())
    }
}

impl Scalar for Float {
    type Ctx = u32;

    fn backend(ctx: &u32) -> Backend {
        Backend::BigFloat(*ctx)
    }
    fn ctx(&self) -> u32 {
        self.prec()
    }
    fn zero(ctx: &u32) -> Self {
        Float::new(*ctx)
    }
    fn from_i64(v: i64, ctx: &u32) -> Self {
        Float::with_val(*ctx, v)
    }
    fn from_rational(q: &Rational, ctx: &u32) -> Self {
        Float::with_val(*ctx, q)
    }
    fn from_float(x: &Float, ctx: &u32) -> Option<Self> {
        Some(Float::with_val(*ctx, x))
    }
    fn to_float(&self, prec: u32) -> Float {
        Float::with_val(prec, self)
    }
    fn is_zero(&self) -> bool {
        Float::is_zero(self)
    }
    fn is_negative(&self) -> bool {
        self.is_sign_negative() && !Float::is_zero(self)
    }
    fn add(&self, rhs: &Self) -> Self {
        Float::with_val(self.prec(), self + rhs)
    }
    fn sub(&self, rhs: &Self) -> Self {
        Float::with_val(self.prec(), self - rhs)
    }
    fn mul(&self, rhs: &Self) -> Self {
        Float::with_val(self.prec(), self * rhs)
    }
    fn div(&self, rhs: &Self) -> Self {
        Float::with_val(self.prec(), self / rhs)
    }
    fn neg(&self) -> Self {
        Float::with_val(self.prec(), -self)
    }
    fn mul_i64(&self, k: i64) -> Self {
        Float::with_val(self.prec(), self * k)
    }
    fn div_i64(&self, k: i64) -> Self {
        Float::with_val(self.prec(), self / k)
    }
    fn add_mul_assign(&mut self, a: &Self, b: &Self) {
        *self += a * b;
    }
    fn sub_mul_assign(&mut self, a: &Self, b: &Self) {
        *self -= a * b;
    }
    fn sqrt(&self) -> Option<Self> {
        if self.is_sign_negative() && !Float::is_zero(self) {
            None
        } else {
            Some(self.clone().sqrt())
        }
    }
    fn to_f64(&self) -> f64 {
        Float::to_f64(self)
    }
    fn negligible(&self, scale: f64) -> bool {
        let tol = 2f64.powi(-(self.prec() as i32) + 40);
        self.to_f64().abs() <= tol * scale.abs().max(f64::MIN_POSITIVE)
    }
    fn render_parts(&self) -> (String, String) {
        (render_float(self), "1".to_string())
    }
    fn render(&self) -> String {
        render_float(self)
    }
}

/// Decimal rendering with all significant digits of the precision.
pub fn render_float(x: &Float) -> String {
    if x.is_infinite() {
        return if x.is_sign_negative() { "-inf" } else { "inf" }.to_string();
    }
    let digits = ((x.prec() as f64) * std::f64::consts::LOG10_2).floor() as usize;
    x.to_string_radix(10, Some(digits.max(1)))
}

/// Parses `"a/b"`, `"12"`, `"0.25"` or `"1e-3"` into an exact rational.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    if let Some((n, d)) = s.split_once('/') {
        let n: Integer = n.trim().parse().ok()?;
        let d: Integer = d.trim().parse().ok()?;
        if d == 0 {
            return None;
        }
        return Some(Rational::from((n, d)));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits: Integer = format!("{int_part}{frac_part}0").parse::<Integer>().ok()? / 10;
    let scale = exp - frac_part.len() as i32;
    let ten = Rational::from(10);
    let mut q = Rational::from(digits);
    if scale >= 0 {
        q *= ten.pow(scale as u32);
    } else {
        q /= ten.pow((-scale) as u32);
    }
    if neg {
        q = -q;
    }
    Some(q)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_decimal_and_fraction_forms() {
        assert_eq!(parse_rational("1/2"), Some(Rational::from((1, 2))));
        assert_eq!(parse_rational("0.1"), Some(Rational::from((1, 10))));
        assert_eq!(parse_rational("3.5"), Some(Rational::from((7, 2))));
        assert_eq!(parse_rational("-2"), Some(Rational::from(-2)));
        assert_eq!(parse_rational("1e-3"), Some(Rational::from((1, 1000))));
        assert_eq!(parse_rational("2.5E2"), Some(Rational::from(250)));
        assert_eq!(parse_rational(".5"), Some(Rational::from((1, 2))));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("abc"), None);
    }

    #[test]
    fn rational_sqrt_only_for_squares() {
        let q = Rational::from((9, 4));
        assert_eq!(Scalar::sqrt(&q), Some(Rational::from((3, 2))));
        assert_eq!(Scalar::sqrt(&Rational::from(2)), None);
        assert_eq!(Scalar::sqrt(&Rational::from(-1)), None);
    }

    #[test]
    fn float_fma_accumulates() {
        let mut acc = Float::with_val(128, 1);
        let a = Float::with_val(128, 3);
        let b = Float::with_val(128, 0.5);
        acc.add_mul_assign(&a, &b);
        assert_eq!(acc.to_f64(), 2.5);
        acc.sub_mul_assign(&a, &b);
        assert_eq!(acc.to_f64(), 1.0);
    }
}
