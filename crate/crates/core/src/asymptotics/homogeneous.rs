//! The homogeneous function
//! `H_α(S, t) = (t^α - S^α - α S^{α-1}(t - S)) / (t - S)²` of degree `α - 2`
//! on the real positive quadrant.

use rug::ops::Pow;
use rug::Float;
use serde::Serialize;

use crate::exec::Exec;
use crate::special::binom_float;

/// `|t/S - 1|` below which the Taylor form is used.
const TAYLOR_RADIUS: f64 = 1e-2;

/// `h_α(z) = H_α(1, z) = Σ_{k>=2} binom(α, k) (z - 1)^{k-2}` near `z = 1`.
fn h_taylor(alpha: &Float, w: &Float) -> Float {
    let prec = alpha.prec();
    let eps = Float::with_val(prec, Float::i_exp(1, -(prec as i32)));
    let mut acc = Float::new(prec);
    let mut wk = Float::with_val(prec, 1u32);
    for k in 2..10_000u32 {
        let term = Float::with_val(prec, binom_float(alpha, k) * &wk);
        acc += &term;
        if k > 3 && term.abs() <= Float::with_val(prec, acc.abs_ref()) * &eps {
            break;
        }
        wk *= w;
    }
    acc
}

/// `H_α(S, t)` for `S, t >= 0`, not both zero.
pub fn h_alpha(alpha: &Float, s: &Float, t: &Float) -> Float {
    let prec = alpha.prec();
    let am2 = Float::with_val(prec, alpha - 2u32);
    if s.is_zero() {
        return Float::with_val(prec, t.clone().pow(&am2));
    }
    let z = Float::with_val(prec, t / s);
    let w = Float::with_val(prec, &z - 1u32);
    let s_pow = Float::with_val(prec, s.clone().pow(&am2));
    let h = if w.clone().abs() < TAYLOR_RADIUS {
        h_taylor(alpha, &w)
    } else {
        let za = Float::with_val(prec, z.clone().pow(alpha));
        let num = za - 1u32 - Float::with_val(prec, alpha * &w);
        num / Float::with_val(prec, &w * &w)
    };
    h * s_pow
}

/// `H_α(S,t)(t - S)² - (t^α - S^α - α S^{α-1}(t - S))`.
pub fn definitional_residual(alpha: &Float, s: &Float, t: &Float) -> Float {
    let prec = alpha.prec();
    let d = Float::with_val(prec, t - s);
    let lhs = h_alpha(alpha, s, t) * Float::with_val(prec, &d * &d);
    let am1 = Float::with_val(prec, alpha - 1u32);
    let rhs = Float::with_val(prec, t.clone().pow(alpha)) - Float::with_val(prec, s.clone().pow(alpha))
        - Float::with_val(prec, s.clone().pow(&am1)) * alpha * &d;
    lhs - rhs
}

#[derive(Clone, Debug, Serialize)]
pub struct Sandwich {
    pub alpha: f64,
    pub points: usize,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub lower: f64,
    pub upper: f64,
    pub pass: bool,
}

/// Bounds `|H_α(S,t)| / ‖(S,t)‖^{α-2}` over a polar grid of the closed
/// positive quadrant: `angles` directions times radii `10^{-3..3}`.
pub fn sandwich(alpha: &Float, angles: usize, radii: usize, lower: f64, upper: f64, exec: Exec) -> Sandwich {
    let prec = alpha.prec();
    let am2 = Float::with_val(prec, alpha - 2u32);
    let ratios = exec.map_collect(0..angles * radii, |i| {
        let (ia, ir) = (i / radii, i % radii);
        let ang = std::f64::consts::FRAC_PI_2 * ia as f64 / (angles - 1).max(1) as f64;
        let expo = -3.0 + 6.0 * ir as f64 / (radii - 1).max(1) as f64;
        let rad = Float::with_val(prec, 10f64.powf(expo));
        let s = Float::with_val(prec, &rad * ang.cos().max(0.0));
        let t = Float::with_val(prec, &rad * ang.sin());
        let h = h_alpha(alpha, &s, &t).abs();
        let norm = Float::with_val(prec, Float::with_val(prec, &s * &s) + Float::with_val(prec, &t * &t)).sqrt();
        (h / norm.pow(&am2)).to_f64()
    });
    let min_ratio = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let max_ratio = ratios.iter().copied().fold(0.0, f64::max);
    Sandwich {
        alpha: alpha.to_f64(),
        points: ratios.len(),
        min_ratio,
        max_ratio,
        lower,
        upper,
        pass: lower <= min_ratio && max_ratio <= upper,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn f(x: f64) -> Float {
        Float::with_val(128, x)
    }

    #[test]
    fn alpha_three_is_linear() {
        // H_3(S, t) = t + 2S
        for (s, t) in [(1.0, 2.0), (0.3, 0.3), (2.0, 0.0), (0.0, 5.0), (1.0, 1.001)] {
            let h = h_alpha(&f(3.0), &f(s), &f(t));
            assert!((h.to_f64() - (t + 2.0 * s)).abs() < 1e-12, "{s} {t}");
        }
    }

    #[test]
    fn diagonal_value() {
        // h_α(1) = α(α-1)/2
        let h = h_alpha(&f(2.5), &f(2.0), &f(2.0));
        assert!((h.to_f64() - 1.875 * 2f64.powf(0.5)).abs() < 1e-12);
    }

    #[test]
    fn sandwich_holds_for_alpha_three() {
        let r = sandwich(&f(3.0), 20, 10, 0.1, 10.0, Exec::Sequential);
        assert!(r.pass, "{r:?}");
    }

    proptest! {
        #[test]
        fn definitional_identity(s in 0.0f64..10.0, t in 0.0f64..10.0, a in 2.05f64..3.0) {
            prop_assume!(s + t > 1e-3);
            let res = definitional_residual(&f(a), &f(s), &f(t));
            let scale = 1.0 + t.powf(a) + s.powf(a);
            prop_assert!(res.to_f64().abs() < 1e-25 * scale);
        }

        #[test]
        fn homogeneity(s in 0.01f64..5.0, t in 0.01f64..5.0, k in 0.1f64..10.0) {
            let a = f(2.5);
            let h1 = h_alpha(&a, &f(k * s), &f(k * t)).to_f64();
            let h0 = h_alpha(&a, &f(s), &f(t)).to_f64();
            prop_assert!((h1 - k.powf(0.5) * h0).abs() < 1e-10 * h1.abs().max(1.0));
        }
    }
}
