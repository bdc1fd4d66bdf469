//! Special functions on MPFR floats: reciprocal gamma, polylogarithm and
//! a few combinatorial helpers.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rug::float::Constant;
use rug::ops::Pow;
use rug::{Float, Integer, Rational};

use crate::scalar::Extended;

/// `1/Γ(z)`, exactly zero at the poles `z = 0, -1, -2, ...`.
pub fn rgamma(z: &Float) -> Float {
    let prec = z.prec();
    if z.is_integer() && *z <= 0 {
        return Float::new(prec);
    }
    Float::with_val(prec, z.gamma_ref()).recip()
}

/// `1/Γ(z)` for an exact argument; the pole test is exact.
pub fn rgamma_rational(z: &Rational, prec: u32) -> Float {
    if *z.denom() == 1 && *z <= 0 {
        return Float::new(prec);
    }
    Float::with_val(prec, z).gamma().recip()
}

pub fn gamma(z: &Float) -> Float {
    Float::with_val(z.prec(), z.gamma_ref())
}

pub fn zeta(s: &Float) -> Float {
    Float::with_val(s.prec(), s.zeta_ref())
}

pub fn pi(prec: u32) -> Float {
    Float::with_val(prec, Constant::Pi)
}

/// Generalized binomial coefficient `binom(a, k)`.
pub fn binom_rational(a: &Rational, k: u32) -> Rational {
    let mut c = Rational::from(1);
    for i in 0..k {
        c *= Rational::from(a - i);
        c /= i + 1;
    }
    c
}

pub fn binom_float(a: &Float, k: u32) -> Float {
    let mut c = Float::with_val(a.prec(), 1);
    for i in 0..k {
        c *= Float::with_val(a.prec(), a - i);
        c /= i + 1;
    }
    c
}

pub fn factorial(k: u32) -> Integer {
    Integer::from(Integer::factorial(k))
}

/// Signed Stirling numbers of the first kind `s(k, j)`, `0 <= j <= k`:
/// the falling factorial is `l (l-1) ... (l-k+1) = Σ_j s(k,j) l^j`.
pub fn stirling1(k: usize) -> Vec<i64> {
    let mut row = vec![1i64];
    for n in 0..k {
        let mut next = vec![0i64; row.len() + 1];
        for (j, &s) in row.iter().enumerate() {
            next[j + 1] += s;
            next[j] -= n as i64 * s;
        }
        row = next;
    }
    row
}

/// Relative tolerance for truncating convergent sums at precision `prec`.
pub fn series_tolerance(prec: u32) -> Float {
    let by_prec = Float::with_val(prec, Float::i_exp(1, -(prec as i32) + 8));
    let fixed = Float::with_val(prec, 1e-30);
    if by_prec < fixed {
        by_prec
    } else {
        fixed
    }
}

/// Sum of `z^l · l^{-s} · l(l-1)...(l-k+1)` over `l >= max(k,1)`, i.e. the
/// `k`-th derivative of `Li_s` times `z^k`, by direct summation.
///
/// Requires `0 <= z < 1`. The tail after term `L` is bounded by the
/// geometric majorant with ratio `z·((L+1)/L)^{max(k-s,0)}`.
pub fn polylog_direct(s: &Float, z: &Float, k: u32) -> Float {
    let prec = s.prec();
    let tol = series_tolerance(prec);
    let mut sum = Float::new(prec);
    let lead = (k as u64).max(1);
    let growth = Float::with_val(prec, k - s.clone()).max(&Float::new(prec));
    let mut l = lead;
    loop {
        let lf = Float::with_val(prec, l);
        let mut term = Float::with_val(prec, z.pow(l as u32)) / Float::with_val(prec, lf.clone().pow(s));
        for i in 0..k as u64 {
            term *= l - i;
        }
        sum += &term;
        let ratio = Float::with_val(prec, (Float::with_val(prec, l + 1) / &lf).pow(&growth)) * z;
        if ratio < 1 {
            let bound = Float::with_val(prec, &term * &ratio) / Float::with_val(prec, 1 - ratio.clone());
            if bound.abs() <= Float::with_val(prec, &tol * sum.clone().abs()) {
                return sum;
            }
        }
        l += 1;
        assert!(l < 10_000_000, "polylog direct summation did not converge (z too close to 1)");
    }
}

type ZetaCache = Mutex<HashMap<(String, u32), Arc<Vec<Float>>>>;

fn zeta_cache() -> &'static ZetaCache {
    static CACHE: OnceLock<ZetaCache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// `ζ(s-m)/m!` for `m = 0..len`, memoized per `(s, prec)`.
fn zeta_over_factorial(s: &Float, len: usize) -> Arc<Vec<Float>> {
    let prec = s.prec();
    let key = (s.to_string_radix(16, None), prec);
    if let Some(v) = zeta_cache().lock().unwrap().get(&key) {
        if v.len() >= len {
            return v.clone();
        }
    }
    let mut v = Vec::with_capacity(len);
    let mut fact = Float::with_val(prec, 1);
    for m in 0..len {
        if m > 0 {
            fact *= m as u32;
        }
        let arg = Float::with_val(prec, s - m as u32);
        v.push(zeta(&arg) / &fact);
    }
    let v = Arc::new(v);
    zeta_cache().lock().unwrap().insert(key, v.clone());
    v
}

/// `Li_s(e^{-t})` from the expansion at `t = 0`:
/// `Γ(1-s) t^{s-1} + Σ_m ζ(s-m) (-t)^m / m!`, valid for `0 < t < 2π` and
/// non-integer `s`.
fn polylog_near_one(s: &Float, t: &Float) -> Float {
    let prec = s.prec();
    let tol = series_tolerance(prec);
    let one_minus_s = Float::with_val(prec, 1 - s.clone());
    let sm1 = Float::with_val(prec, s - 1u32);
    let mut sum = gamma(&one_minus_s) * Float::with_val(prec, t.clone().pow(&sm1));
    let two_pi = Float::with_val(prec, pi(prec) * 2u32);
    let ratio = Float::with_val(prec, t / &two_pi);
    let mut len = 64;
    loop {
        let coeffs = zeta_over_factorial(s, len);
        let mut tpow = Float::with_val(prec, 1);
        let mut done = false;
        let mut acc = Float::new(prec);
        for (m, c) in coeffs.iter().enumerate().take(len) {
            let term = Float::with_val(prec, c * &tpow);
            acc += &term;
            tpow *= t;
            tpow = -tpow;
            // |ζ(s-m)/m!| grows at most like (2π)^{-m} up to a slowly varying
            // factor; bound the tail by a geometric series with twice that ratio.
            if m > 4 {
                let r2 = Float::with_val(prec, &ratio * 2u32);
                if r2 < 1 {
                    let bound = Float::with_val(prec, term.clone().abs() * &r2) / Float::with_val(prec, 1 - r2.clone());
                    let total = Float::with_val(prec, &sum + &acc).abs();
                    if bound <= Float::with_val(prec, &tol * total) {
                        done = true;
                        break;
                    }
                }
            }
        }
        if done {
            sum += acc;
            return sum;
        }
        len *= 2;
        assert!(len < 1 << 14, "polylog expansion did not converge");
    }
}

/// `z^k · Li_s^{(k)}(z)` for `0 <= z <= 1`; `+∞` at `z = 1` when the series
/// diverges there.
///
/// Uses direct summation for `z <= 1/2` and the expansion at `z = 1`,
/// combined through Stirling numbers, above.
pub fn polylog_scaled_derivative(s: &Float, z: &Float, k: u32) -> Extended<Float> {
    let prec = s.prec();
    if z.is_zero() {
        return Extended::Finite(Float::new(prec));
    }
    if *z == 1 {
        // Σ l^{-s} l(l-1)...(l-k+1) converges iff s - k > 1.
        if Float::with_val(prec, s - k) <= 1 {
            return Extended::PosInfinity;
        }
        let mut acc = Float::new(prec);
        for (j, c) in stirling1(k as usize).into_iter().enumerate() {
            if c != 0 {
                acc += zeta(&Float::with_val(prec, s - j as u32)) * c;
            }
        }
        return Extended::Finite(acc);
    }
    if *z <= 0.5 {
        return Extended::Finite(polylog_direct(s, z, k));
    }
    let t = -Float::with_val(prec, z.ln_ref());
    let mut acc = Float::new(prec);
    for (j, c) in stirling1(k as usize).into_iter().enumerate() {
        if c != 0 {
            acc += polylog_near_one(&Float::with_val(prec, s - j as u32), &t) * c;
        }
    }
    Extended::Finite(acc)
}

pub fn polylog(s: &Float, z: &Float) -> Extended<Float> {
    polylog_scaled_derivative(s, z, 0)
}
