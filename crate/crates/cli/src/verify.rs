//! `verify-all`: every check that the config makes feasible.

use fpt::asymptotics::homogeneous::sandwich;
use fpt::asymptotics::ialpha::{c_form, double_sum};
use fpt::asymptotics::predict::{lattice_period, predict_and_compare, Regime};
use fpt::asymptotics::constants;
use fpt::exec::Exec;
use fpt::genfun::identities::identity_suite;
use fpt::genfun::param::consistency_compose;
use fpt::genfun::solve_functional_equation;
use fpt::parking::enumerate::{enumerate_fnp, ITERATION_BUDGET};
use fpt::parking::montecarlo::{exact_probability, gw_parking_mc, McConfig, DEFAULT_SIZE_CAP};
use fpt::phase::{classify, probabilistic_criterion, PhaseReport, Refinement};
use fpt::weights::WeightSequence;
use rug::{Float, Rational};
use serde::Serialize;

pub struct Options {
    pub n_max: usize,
    pub samples: u64,
    pub seed: u64,
    pub prec: u32,
    pub exec: Exec,
}

#[derive(Serialize, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Serialize)]
pub struct Check {
    pub name: &'static str,
    pub status: Status,
    pub tolerance: String,
    pub measured: String,
    pub detail: String,
}

#[derive(Serialize)]
pub struct Report {
    pub weights: String,
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
    pub checks: Vec<Check>,
}

struct Ctx<'a> {
    ws: &'a WeightSequence,
    opts: &'a Options,
    checks: Vec<Check>,
}

impl Ctx<'_> {
    fn push(&mut self, name: &'static str, status: Status, tolerance: impl ToString, measured: impl ToString, detail: impl ToString) {
        self.checks.push(Check {
            name,
            status,
            tolerance: tolerance.to_string(),
            measured: measured.to_string(),
            detail: detail.to_string(),
        });
    }

    fn skip(&mut self, name: &'static str, why: impl ToString) {
        self.push(name, Status::Skipped, "", "", why);
    }

    fn verdict(&mut self, name: &'static str, ok: bool, tolerance: impl ToString, measured: impl ToString, detail: impl ToString) {
        self.push(name, if ok { Status::Pass } else { Status::Fail }, tolerance, measured, detail);
    }

    fn error(&mut self, name: &'static str, e: impl ToString) {
        self.push(name, Status::Fail, "", "", e);
    }
}

pub fn verify_all(ws: &WeightSequence, opts: &Options) -> Report {
    let mut cx = Ctx { ws, opts, checks: Vec::new() };
    oracle(&mut cx);
    round_trip(&mut cx);
    identities(&mut cx);
    let report = phase(&mut cx);
    if let Some(rep) = &report {
        asymptotic(&mut cx, rep);
    }
    scaling_function(&mut cx);
    monte_carlo(&mut cx);
    let count = |s| cx.checks.iter().filter(|c| c.status == s).count();
    Report {
        weights: ws.describe(),
        passed: count(Status::Pass),
        failed: count(Status::Fail),
        skipped: count(Status::Skipped),
        checks: cx.checks,
    }
}

fn oracle(cx: &mut Ctx) {
    const NAME: &str = "oracle: enumeration = functional equation";
    if !cx.ws.is_exact() || cx.ws.degree().is_none() {
        return cx.skip(NAME, "needs finite support with exact weights");
    }
    let table = match enumerate_fnp(cx.ws, cx.opts.n_max, ITERATION_BUDGET, cx.opts.exec) {
        Ok(t) => t,
        Err(e) => return cx.skip(NAME, e),
    };
    let width = table.rows.iter().map(Vec::len).max().unwrap_or(1);
    match solve_functional_equation::<Rational>(cx.ws, cx.opts.n_max, width, &()) {
        Ok((f, _)) => {
            let mism = (1..=cx.opts.n_max)
                .flat_map(|n| (0..=width).map(move |p| (n, p)))
                .filter(|&(n, p)| table.get(n, p) != *f.coeff(n, p))
                .count();
            cx.verdict(NAME, mism == 0, "exact", format!("{mism} mismatches"), format!("n <= {}", cx.opts.n_max));
        }
        Err(e) => cx.error(NAME, e),
    }
}

fn round_trip(cx: &mut Ctx) {
    const NAME: &str = "parametrization: F̂(Ŷ(x), y) = F";
    let n = 25;
    let (res, tol) = if cx.ws.is_exact() {
        (consistency_compose::<Rational>(cx.ws, n, n, &()), 0.0)
    } else {
        (consistency_compose::<Float>(cx.ws, n, n, &cx.opts.prec), 1e-30)
    };
    match res {
        Ok(d) => cx.verdict(NAME, d <= tol, tol, d, format!("order {n} x {n}")),
        Err(e) => cx.error(NAME, e),
    }
}

fn identities(cx: &mut Ctx) {
    const NAME: &str = "identity suite";
    let order = 40;
    let res = if cx.ws.is_exact() {
        identity_suite::<Rational>(cx.ws, order, &())
    } else {
        identity_suite::<Float>(cx.ws, order, &cx.opts.prec)
    };
    match res {
        Ok(r) => {
            let failed: Vec<_> = r.failures().iter().map(|c| c.name.clone()).collect();
            cx.verdict(NAME, r.all_pass(), r.backend.clone(), format!("{} of {} pass", r.checks.len() - failed.len(), r.checks.len()), failed.join("; "));
        }
        Err(e) => cx.error(NAME, e),
    }
}

fn phase(cx: &mut Ctx) -> Option<PhaseReport> {
    const NAME: &str = "phase: analytic classification";
    let rep = match classify(cx.ws, cx.opts.prec, cx.opts.exec) {
        Ok(r) => r,
        Err(e) => {
            cx.error(NAME, e);
            return None;
        }
    };
    let unique = rep.diagnostics.grid_sign_changes.is_none_or(|k| k <= 1);
    cx.verdict(
        NAME,
        unique,
        "at most one sign change of x̂'",
        format!("{:?}", rep.diagnostics.grid_sign_changes),
        format!("{:?} / {:?}, Y_c = {}", rep.phase, rep.refinement, rep.y_c.to_f64()),
    );
    const ROUTES: &str = "phase: moment criterion agrees";
    match probabilistic_criterion(cx.ws, cx.opts.prec) {
        Ok(c) if c.decisive => {
            let ok = c.predicted == Some(rep.phase);
            cx.verdict(ROUTES, ok, "identical label", format!("{:?}", c.predicted), c.value.render());
        }
        Ok(c) => cx.skip(ROUTES, c.note),
        Err(e) => cx.skip(ROUTES, e),
    }
    Some(rep)
}

fn asymptotic(cx: &mut Ctx, rep: &PhaseReport) {
    const CONST: &str = "constants: mu > 0, C_F consistent";
    if rep.refinement == Refinement::DenseOutOfScope {
        for name in [CONST, "asymptotics: slopes"] {
            cx.skip(name, "out of scope: dense phase");
        }
        return;
    }
    let c = match constants(cx.ws, rep) {
        Ok(c) => c,
        Err(e) => return cx.error(CONST, e),
    };
    let rel = Float::with_val(cx.opts.prec, Float::with_val(cx.opts.prec, &c.c_f - &c.c_f_direct) / &c.c_f).abs().to_f64();
    cx.verdict(CONST, c.mu > 0 && rel < 1e-15, "1e-15", format!("{rel:.1e}"), format!("mu = {}", c.mu.to_f64()));

    let h = sandwich(&Float::with_val(128, &c.exponents.alpha), 40, 25, 0.1, 10.0, cx.opts.exec);
    cx.verdict("H_alpha sandwich", h.pass, "[0.1, 10]", format!("[{:.4}, {:.4}]", h.min_ratio, h.max_ratio), "1000 points");

    let exec = cx.opts.exec;
    let ps: Vec<usize> = (64..=256).step_by(32).collect();
    match predict_and_compare(cx.ws, &c, Regime::YFixed, &[], &ps, None, exec) {
        Ok(t) => {
            let s = t.slope.unwrap_or(f64::NAN);
            cx.verdict("asymptotics: F_p(x_c) slope", (s - t.expected_slope).abs() < 0.1, 0.1, s, format!("expected {}", t.expected_slope));
        }
        Err(e) => cx.error("asymptotics: F_p(x_c) slope", e),
    }
    let ns: Vec<usize> = (200..=400).step_by(25).collect();
    match predict_and_compare(cx.ws, &c, Regime::X, &ns, &[0], None, exec) {
        Ok(t) => {
            let s = t.slope.unwrap_or(f64::NAN);
            cx.verdict("asymptotics: F_{n,0} slope", (s - t.expected_slope).abs() < 0.05, 0.05, s, format!("expected {}", t.expected_slope));
            const AMP: &str = "asymptotics: F_{n,0} amplitude";
            let period = lattice_period(cx.ws);
            if period > 1 {
                cx.skip(AMP, format!("periodic weights (period {period}): aperiodicity assumption fails"));
            } else {
                let r = t.ratios().last().copied().unwrap_or(f64::NAN);
                cx.verdict(AMP, (r - 1.0).abs() < 0.15, 0.15, r, "ratio at n = 400");
            }
        }
        Err(e) => cx.error("asymptotics: F_{n,0} slope", e),
    }
}

fn scaling_function(cx: &mut Ctx) {
    const NAME: &str = "I_alpha: two series agree";
    let mut worst: f64 = 0.0;
    for a in [Rational::from((5, 2)), Rational::from(3)] {
        for l in [0.5, 1.0, 2.0, 5.0] {
            let lam = Float::with_val(cx.opts.prec, l);
            match (double_sum(&a, &lam, 1e-30), c_form(&a, &lam, 1e-30)) {
                (Ok(x), Ok(y)) => {
                    let d = Float::with_val(cx.opts.prec, Float::with_val(cx.opts.prec, &x.value - &y.value) / &y.value);
                    worst = worst.max(d.abs().to_f64());
                }
                (Err(e), _) | (_, Err(e)) => return cx.error(NAME, e),
            }
        }
    }
    cx.verdict(NAME, worst < 1e-8, "1e-8", format!("{worst:.1e}"), "alpha in {5/2, 3}, lambda in {0.5, 1, 2, 5}");
}

fn monte_carlo(cx: &mut Ctx) {
    const NAME: &str = "Monte Carlo: P = 2·4^-n F_{n,p}";
    // labels are drawn from b / B(1); F of the rescaled sequence is what the simulation sees
    let ws = match cx.ws.mass_at_one_exact() {
        Some(m) if cx.ws.is_exact() && m > 0 => cx.ws.equivalent(&m.recip(), &Rational::from(1)),
        _ => return cx.skip(NAME, "needs exact weights with known finite mass"),
    };
    let cfg = McConfig { samples: cx.opts.samples, seed: cx.opts.seed, n_max: 5, p_max: 4, size_cap: DEFAULT_SIZE_CAP };
    let rep = match gw_parking_mc(&ws, &cfg, cx.opts.exec) {
        Ok(r) => r,
        Err(e) => return cx.error(NAME, e),
    };
    let f = match solve_functional_equation::<Rational>(&ws, 5, 4, &()) {
        Ok((f, _)) => f,
        Err(e) => return cx.error(NAME, e),
    };
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for c in &rep.cells {
        let p = exact_probability(f.coeff(c.n, c.p), c.n).to_f64();
        if c.std_error == 0.0 {
            ok &= c.probability == p;
        } else {
            worst = worst.max((c.probability - p).abs() / c.std_error);
        }
    }
    ok &= worst <= 3.0;
    cx.verdict(
        NAME,
        ok,
        "3 standard errors",
        format!("{worst:.2}"),
        format!("{} samples, seed {}, {} censored", rep.samples, rep.seed, rep.censored),
    );
}
