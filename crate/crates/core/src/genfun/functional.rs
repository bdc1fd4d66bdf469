//! Order-by-order solution of the catalytic functional equation.

use super::Result;
use crate::powseries::{Bivariate, Series};
use crate::scalar::Scalar;
use crate::weights::WeightSequence;

/// Solves `F = (x/y)(B(y) H(x,y) - b_0 H(x,0))` with `H = 1/(1-F)`.
///
/// Writing `F = Σ_n F_n(y) x^n` and `H = Σ_m H_m(y) x^m`, one has
/// `H_m = Σ_{k=1..m} F_k H_{m-k}` and
/// `F_n = (B·H_{n-1} - b_0·H_{n-1}(0)) / y`.
/// Dividing by `y` costs one order in `y` per step, so slice `n` is carried
/// to order `p + n_max - n` and everything is truncated to `p` at the end.
///
/// Returns `(F, F_0)` with `F` of box `(n_max, p)` and `F_0(x) = F(x, 0)`.
pub fn solve_functional_equation<S: Scalar>(
    ws: &WeightSequence,
    n_max: usize,
    p: usize,
    ctx: &S::Ctx,
) -> Result<(Bivariate<S>, Series<S>)> {
    let work = p + n_max;
    let b = ws.b_series::<S>(work, ctx)?;
    let b0 = b[0].clone();
    let mut f: Vec<Series<S>> = vec![Series::zero(work, ctx)];
    let mut h: Vec<Series<S>> = vec![Series::one(work, ctx)];
    for n in 1..=n_max {
        let prev = &h[n - 1];
        let mut rhs = b.mul(prev)?;
        let c = b0.mul(&prev[0]);
        rhs.set_coeff(0, rhs[0].sub(&c));
        let fn_ = rhs.unshift(1)?;
        f.push(fn_);
        // H_n = Σ_{k=1..n} F_k H_{n-k}
        let order = work - n;
        let mut hn = Series::zero(order, ctx);
        for k in 1..=n {
            hn = hn.add(&f[k].truncate(order).mul(&h[n - k].truncate(order))?)?;
        }
        h.push(hn);
    }
    let slices: Vec<Series<S>> = f.into_iter().map(|s| s.truncate(p)).collect();
    let big = Bivariate::from_slices(slices);
    let f0 = big.inner_coeff(0);
    Ok((big, f0))
}
