//! Pointwise big-float evaluation of the parametrization at a real `Y`.

use rug::Float;

use super::{GenfunError, Result};
use crate::powseries::Series;
use crate::scalar::Extended;
use crate::weights::WeightSequence;

/// `B, B', B'', B'''` at one point, with the derived quantities of the
/// parametrization.
#[derive(Clone, Debug)]
pub struct Local {
    pub y: Float,
    pub b: Float,
    pub b1: Float,
    pub b2: Extended<Float>,
    pub b3: Extended<Float>,
}

impl Local {
    /// Evaluates at `0 <= y <= ρ`; `B` and `B'` must be finite there.
    pub fn at(ws: &WeightSequence, y: &Float) -> Result<Self> {
        let fin = |k: u32| -> Result<Extended<Float>> { Ok(ws.eval(y, k)?) };
        let need = |e: Extended<Float>, what: &str| -> Result<Float> {
            e.finite().cloned().ok_or_else(|| GenfunError::Identity(format!("{what} is infinite at Y = {}", y.to_f64())))
        };
        Ok(Local { y: y.clone(), b: need(fin(0)?, "B")?, b1: need(fin(1)?, "B'")?, b2: fin(2)?, b3: fin(3)? })
    }

    fn prec(&self) -> u32 {
        self.y.prec()
    }

    /// `D = B + Y B'`
    pub fn d(&self) -> Float {
        Float::with_val(self.prec(), &self.y * &self.b1) + &self.b
    }

    pub fn xhat(&self) -> Float {
        let d = self.d();
        Float::with_val(self.prec(), &self.y * &self.b) / Float::with_val(self.prec(), &d * &d)
    }

    pub fn psi(&self) -> Float {
        Float::with_val(self.prec(), &self.y * &self.b1) / &self.b
    }

    pub fn phi(&self) -> Float {
        let bm = Float::with_val(self.prec(), &self.b - Float::with_val(self.prec(), &self.y * &self.b1));
        Float::with_val(self.prec(), &self.y * &bm) / self.d()
    }

    /// Numerator of `x̂'`: `(B - Y B')² - 2 Y² B B''`. `None` when `B''` is
    /// infinite, where the numerator is `-∞`.
    pub fn xhat_prime_numerator(&self) -> Option<Float> {
        let b2 = self.b2.finite()?;
        let p = self.prec();
        let bm = Float::with_val(p, &self.b - Float::with_val(p, &self.y * &self.b1));
        let y2 = Float::with_val(p, &self.y * &self.y);
        let t = Float::with_val(p, &y2 * &self.b) * b2 * 2u32;
        Some(Float::with_val(p, &bm * &bm) - t)
    }

    /// Sign of `x̂'`, `-1` when `B'' = ∞`.
    pub fn xhat_prime_sign(&self) -> i32 {
        match self.xhat_prime_numerator() {
            Some(v) if v.is_zero() => 0,
            Some(v) if v.is_sign_negative() => -1,
            Some(_) => 1,
            None => -1,
        }
    }

    pub fn xhat_prime(&self) -> Option<Float> {
        let d = self.d();
        let d3 = Float::with_val(self.prec(), &d * &d) * &d;
        self.xhat_prime_numerator().map(|n| Float::with_val(self.prec(), n / &d3))
    }

    /// `D' = 2B' + Y B''`
    pub fn d_prime(&self) -> Option<Float> {
        let b2 = self.b2.finite()?;
        Some(Float::with_val(self.prec(), &self.b1 * 2u32) + Float::with_val(self.prec(), &self.y * b2))
    }

    /// `x̂'' = -2 Y B D''/D³ - 3 D' (D² - 2 Y B D')/D⁴` with `D'' = 3B'' + Y B'''`.
    pub fn xhat_second(&self) -> Option<Float> {
        let p = self.prec();
        let b2 = self.b2.finite()?;
        let b3 = self.b3.finite()?;
        let d = self.d();
        let d1 = self.d_prime()?;
        let d2 = Float::with_val(p, b2 * 3u32) + Float::with_val(p, &self.y * b3);
        let yb = Float::with_val(p, &self.y * &self.b);
        let dd = Float::with_val(p, &d * &d);
        let d3 = Float::with_val(p, &dd * &d);
        let d4 = Float::with_val(p, &d3 * &d);
        let first = Float::with_val(p, &yb * &d2) * 2u32 / &d3;
        let inner = Float::with_val(p, &dd - Float::with_val(p, &yb * &d1) * 2u32);
        let second = Float::with_val(p, &d1 * &inner) * 3u32 / &d4;
        Some(-first - second)
    }

    pub fn phi_prime(&self) -> Option<Float> {
        self.xhat_prime().map(|x| x * self.d())
    }
}

/// `q(Y_0, ·)` and `R(Y_0, ·) = (Y_0 - y)√q(Y_0, ·)` as series in `y` to
/// order `p`, at a fixed real `Y_0 > 0`.
///
/// `q_k = Σ_{j<=k} (k-j+1) Q_j / Y_0^{k-j+2}`. Near `Y_c` the rounding
/// noise this amplifies grows like `Y_0^{-k}`, which is also the natural
/// growth of the coefficients of `√q`, so relative accuracy only degrades
/// polynomially in `k`.
pub fn q_r_at(ws: &WeightSequence, local: &Local, p: usize) -> Result<(Series<Float>, Series<Float>)> {
    let prec = local.y.prec();
    let y0 = &local.y;
    let phi = local.phi();
    let xhat = local.xhat();
    let b = ws.b_series::<Float>(p, &prec)?;
    // Q(Y0, y) = (φ + y)² - 4 x̂ y B(y)
    let mut big_q = Series::from_coeffs(vec![Float::new(prec); p + 1], prec);
    big_q.set_coeff(0, Float::with_val(prec, &phi * &phi));
    if p >= 1 {
        big_q.set_coeff(1, Float::with_val(prec, &phi * 2u32));
    }
    if p >= 2 {
        big_q.set_coeff(2, Float::with_val(prec, 1u32));
    }
    let four_x = Float::with_val(prec, &xhat * 4u32);
    for j in 1..=p {
        let v = Float::with_val(prec, &big_q[j] - Float::with_val(prec, &four_x * &b[j - 1]));
        big_q.set_coeff(j, v);
    }
    let inv = Float::with_val(prec, y0.recip_ref());
    let mut inv_pows = vec![Float::with_val(prec, &inv * &inv)];
    for _ in 0..p {
        let next = Float::with_val(prec, inv_pows.last().unwrap() * &inv);
        inv_pows.push(next);
    }
    let mut q = Vec::with_capacity(p + 1);
    for k in 0..=p {
        let mut acc = Float::new(prec);
        for j in 0..=k {
            acc += Float::with_val(prec, &big_q[j] * &inv_pows[k - j]) * (k - j + 1) as u32;
        }
        q.push(acc);
    }
    let q = Series::from_coeffs(q, prec);
    if q[0].is_zero() {
        return Err(GenfunError::Identity("q(Y, y) has vanishing constant term in y".into()));
    }
    let s = q.sqrt()?;
    // R = (Y0 - y) s
    let mut r = Vec::with_capacity(p + 1);
    for k in 0..=p {
        let mut v = Float::with_val(prec, y0 * &s[k]);
        if k >= 1 {
            v -= &s[k - 1];
        }
        r.push(v);
    }
    Ok((q, Series::from_coeffs(r, prec)))
}

/// `F_k(x̂(Y_0)) = [y^k] F̂(Y_0, y)` for `k <= p`.
pub fn fhat_coeffs_at(ws: &WeightSequence, local: &Local, p: usize) -> Result<Vec<Float>> {
    let prec = local.y.prec();
    let (_, r) = q_r_at(ws, local, p + 1)?;
    Ok((0..=p)
        .map(|k| {
            let mut v = Float::with_val(prec, &r[k + 1] / 2u32);
            if k == 0 {
                v += 0.5f64;
            }
            v
        })
        .collect())
}
