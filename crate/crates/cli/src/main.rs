//! `fpt`: coefficients, phase, asymptotics and parking simulations for
//! fully parked trees.
//!
//! Exit status: 0 when everything requested passed, 1 when a check failed,
//! 2 for invalid configs or requests.

mod verify;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use fpt::asymptotics::ialpha::{c_form, double_sum};
use fpt::asymptotics::predict::{predict_and_compare, Regime};
use fpt::asymptotics::{constants, AsymptoticsError};
use fpt::exec::Exec;
use fpt::genfun::identities::identity_suite;
use fpt::genfun::solve_functional_equation;
use fpt::parking::enumerate::{enumerate_fnp, ITERATION_BUDGET};
use fpt::parking::montecarlo::{exact_probability, gw_parking_mc, McConfig, DEFAULT_SIZE_CAP};
use fpt::phase::classify;
use fpt::scalar::render_float;
use fpt::weights::{config, WeightSequence};
use rug::{Float, Rational};
use serde_json::json;

#[derive(Parser)]
#[command(name = "fpt", version, about = "Exact and asymptotic enumeration of fully parked trees")]
struct Cli {
    /// Worker threads; 1 runs everything sequentially.
    #[arg(long, global = true, default_value_t = 0, hide_default_value = true)]
    workers: usize,
    /// MPFR precision in bits for the big-float backend.
    #[arg(long, global = true, env = "FPT_PRECISION_BITS", default_value_t = fpt::precision::DEFAULT_PRECISION)]
    precision: u32,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Exact,
    Float,
}

#[derive(Clone, Copy, ValueEnum)]
enum RegimeArg {
    Yfixed,
    X,
    Bivariate,
}

#[derive(Subcommand)]
enum Command {
    /// F_{n,p} from the functional equation as CSV rows (n, p, numerator, denominator).
    Coeffs {
        #[arg(long)]
        weights: PathBuf,
        #[arg(long = "N", short = 'N', default_value_t = 16)]
        n: usize,
        #[arg(long = "P", short = 'P', default_value_t = 16)]
        p: usize,
        #[arg(long, value_enum, default_value_t = BackendArg::Exact)]
        backend: BackendArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Brute-force F_{n,p} by enumerating labeled plane trees, checked
    /// against the functional equation.
    Oracle {
        #[arg(long)]
        weights: PathBuf,
        #[arg(long, default_value_t = 7)]
        nmax: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Phase classification and critical point.
    Classify {
        #[arg(long)]
        weights: PathBuf,
        /// Print the full report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Exact coefficients against the asymptotic predictions.
    Asymptotics {
        #[arg(long)]
        weights: PathBuf,
        #[arg(long, value_enum)]
        regime: RegimeArg,
        /// Scaling parameter of the bivariate regime, n ~ v p^{1/theta}.
        #[arg(long)]
        v: Option<f64>,
        /// n values as start:end:step (x regime).
        #[arg(long, default_value = "200:400:25")]
        n_range: String,
        /// p values as start:end:step.
        #[arg(long)]
        p_range: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The scaling function I_alpha on a grid, by both series.
    Ialpha {
        /// A rational such as 3 or 5/2, in (2, 3].
        #[arg(long)]
        alpha: String,
        /// start:end:step
        #[arg(long, default_value = "0.5:5:0.5")]
        lambda_grid: String,
        #[arg(long, default_value_t = 1e-30)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo parking on critical geometric Galton-Watson trees.
    Simulate {
        #[arg(long)]
        weights: PathBuf,
        /// Number of trees; accepts 1e7.
        #[arg(long, default_value = "1e6")]
        samples: String,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        nmax: usize,
        #[arg(long, default_value_t = 4)]
        pmax: usize,
        #[arg(long, default_value_t = DEFAULT_SIZE_CAP)]
        size_cap: usize,
        #[arg(long)]
        json: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The series identity suite of the parametrization.
    Identities {
        #[arg(long)]
        weights: PathBuf,
        #[arg(long, default_value_t = 40)]
        order: usize,
        #[arg(long, value_enum, default_value_t = BackendArg::Exact)]
        backend: BackendArg,
    },
    /// Every check feasible for the config, as one JSON report.
    VerifyAll {
        #[arg(long)]
        weights: PathBuf,
        #[arg(long, default_value_t = 7)]
        nmax: usize,
        #[arg(long, default_value = "1e6")]
        samples: String,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// A failed command: `code` 1 for a failed check, 2 for a bad request.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub msg: String,
}

impl Failure {
    pub fn config(msg: impl ToString) -> Self {
        Failure { code: 2, msg: msg.to_string() }
    }

    pub fn check(msg: impl ToString) -> Self {
        Failure { code: 1, msg: msg.to_string() }
    }
}

impl From<AsymptoticsError> for Failure {
    fn from(e: AsymptoticsError) -> Self {
        match e {
            AsymptoticsError::NonPositiveMu(_) => Failure::check(e),
            _ => Failure::config(e),
        }
    }
}

type Outcome = Result<(), Failure>;

fn load_weights(path: &Path) -> Result<WeightSequence, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
    let ws = config::parse(&text).map_err(Failure::config)?;
    ws.validate().map_err(Failure::config)?;
    Ok(ws)
}

fn emit(out: Option<&Path>, text: &str) -> Outcome {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::config(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json(v: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

/// `start:end:step`, inclusive of `end`.
fn parse_grid(s: &str) -> Result<Vec<f64>, Failure> {
    let parts: Vec<f64> = s
        .split(':')
        .map(|x| x.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| Failure::config(format!("bad grid {s:?}, expected start:end:step")))?;
    match parts[..] {
        [a] => Ok(vec![a]),
        [a, b, step] if step > 0.0 && b >= a => {
            let k = ((b - a) / step + 1e-9).floor() as usize;
            Ok((0..=k).map(|i| a + step * i as f64).collect())
        }
        _ => Err(Failure::config(format!("bad grid {s:?}, expected start:end:step"))),
    }
}

fn parse_range(s: &str) -> Result<Vec<usize>, Failure> {
    let v = parse_grid(s)?;
    if v.iter().any(|x| *x < 0.0 || x.fract() != 0.0) {
        return Err(Failure::config(format!("range {s:?} must contain nonnegative integers")));
    }
    Ok(v.into_iter().map(|x| x as usize).collect())
}

fn parse_count(s: &str) -> Result<u64, Failure> {
    let x: f64 = s.trim().parse().map_err(|_| Failure::config(format!("bad count {s:?}")))?;
    if x < 1.0 || x.fract() != 0.0 || x > 1e15 {
        return Err(Failure::config(format!("bad count {s:?}")));
    }
    Ok(x as u64)
}

fn coeffs(ws: &WeightSequence, n: usize, p: usize, backend: BackendArg, prec: u32) -> Result<String, Failure> {
    let mut s = String::from("n,p,numerator,denominator\n");
    match backend {
        BackendArg::Exact => {
            if !ws.is_exact() {
                return Err(Failure::config(format!("the {} family has no exact backend", ws.family_name())));
            }
            let (f, _) = solve_functional_equation::<Rational>(ws, n, p, &()).map_err(Failure::config)?;
            for a in 1..=n {
                for b in 0..=p {
                    let c = f.coeff(a, b);
                    s.push_str(&format!("{a},{b},{},{}\n", c.numer(), c.denom()));
                }
            }
        }
        BackendArg::Float => {
            let (f, _) = solve_functional_equation::<Float>(ws, n, p, &prec).map_err(Failure::config)?;
            for a in 1..=n {
                for b in 0..=p {
                    s.push_str(&format!("{a},{b},{},1\n", render_float(f.coeff(a, b))));
                }
            }
        }
    }
    Ok(s)
}

fn run(cli: Cli) -> Outcome {
    let exec = if cli.workers == 1 { Exec::Sequential } else { Exec::Parallel };
    if cli.workers > 1 {
        rayon::ThreadPoolBuilder::new().num_threads(cli.workers).build_global().map_err(Failure::config)?;
    }
    let prec = cli.precision.max(64);
    match cli.command {
        Command::Coeffs { weights, n, p, backend, out } => {
            let ws = load_weights(&weights)?;
            emit(out.as_deref(), &coeffs(&ws, n, p, backend, prec)?)
        }
        Command::Oracle { weights, nmax, out } => {
            let ws = load_weights(&weights)?;
            let table = enumerate_fnp(&ws, nmax, ITERATION_BUDGET, exec).map_err(Failure::config)?;
            emit(out.as_deref(), &table.to_csv())?;
            if !ws.is_exact() {
                return Ok(());
            }
            let width = table.rows.iter().map(Vec::len).max().unwrap_or(1);
            let (f, _) = solve_functional_equation::<Rational>(&ws, nmax, width, &()).map_err(Failure::config)?;
            for n in 1..=nmax {
                for p in 0..=width {
                    if table.get(n, p) != *f.coeff(n, p) {
                        return Err(Failure::check(format!("F_{{{n},{p}}}: enumeration and functional equation differ")));
                    }
                }
            }
            eprintln!("oracle: enumeration equals the functional equation for n <= {nmax}");
            Ok(())
        }
        Command::Classify { weights, json } => {
            let ws = load_weights(&weights)?;
            let rep = classify(&ws, prec, exec).map_err(Failure::config)?;
            if json {
                print!("{}", to_json(&rep));
            } else {
                println!("weights     {}", rep.weights);
                println!("phase       {:?}", rep.phase);
                println!("refinement  {:?}", rep.refinement);
                println!("rho         {}", rep.rho);
                println!("Y_c         {}", render_float(&rep.y_c));
                println!("x_c         {}", render_float(&rep.x_c));
                if let Some(a) = &rep.alpha {
                    println!("alpha       {a}");
                }
            }
            Ok(())
        }
        Command::Asymptotics { weights, regime, v, n_range, p_range, out } => {
            let ws = load_weights(&weights)?;
            let rep = classify(&ws, prec, exec).map_err(Failure::config)?;
            let c = constants(&ws, &rep)?;
            let (regime, ns, ps) = match regime {
                RegimeArg::Yfixed => (Regime::YFixed, vec![], parse_range(p_range.as_deref().unwrap_or("64:256:32"))?),
                RegimeArg::X => (Regime::X, parse_range(&n_range)?, parse_range(p_range.as_deref().unwrap_or("0"))?),
                RegimeArg::Bivariate => {
                    (Regime::Bivariate, vec![], parse_range(p_range.as_deref().unwrap_or("8:14:2"))?)
                }
            };
            if regime == Regime::Bivariate && v.is_none() {
                return Err(Failure::config("the bivariate regime needs --v"));
            }
            let table = predict_and_compare(&ws, &c, regime, &ns, &ps, v, exec)?;
            emit(out.as_deref(), &table.to_csv())?;
            eprintln!(
                "slope {} (expected {})",
                table.slope.map_or("n/a".into(), |s| format!("{s:.6}")),
                table.expected_slope
            );
            Ok(())
        }
        Command::Ialpha { alpha, lambda_grid, tol, out } => {
            let a = fpt::scalar::parse_rational(&alpha).ok_or_else(|| Failure::config(format!("bad alpha {alpha:?}")))?;
            if a <= 2 || a > 3 {
                return Err(Failure::config("alpha must lie in (2, 3]"));
            }
            let grid = parse_grid(&lambda_grid)?;
            let rows = exec.map_collect(0..grid.len(), |i| {
                let lam = Float::with_val(prec, grid[i]);
                Ok::<_, AsymptoticsError>((double_sum(&a, &lam, tol)?, c_form(&a, &lam, tol)?))
            });
            let mut s = String::from("lambda,double_sum,c_form,relative_difference,converged\n");
            for (l, r) in grid.iter().zip(rows) {
                let (x, y) = r?;
                let rel = Float::with_val(prec, Float::with_val(prec, &x.value - &y.value) / &y.value).abs();
                s.push_str(&format!(
                    "{l},{},{},{:.3e},{}\n",
                    render_float(&x.value),
                    render_float(&y.value),
                    rel.to_f64(),
                    x.converged && y.converged
                ));
            }
            emit(out.as_deref(), &s)
        }
        Command::Simulate { weights, samples, seed, nmax, pmax, size_cap, json, out } => {
            let ws = load_weights(&weights)?;
            let cfg = McConfig { samples: parse_count(&samples)?, seed, n_max: nmax, p_max: pmax, size_cap };
            let rep = gw_parking_mc(&ws, &cfg, exec).map_err(Failure::config)?;
            let exact = if ws.is_exact() {
                Some(solve_functional_equation::<Rational>(&ws, nmax, pmax, &()).map_err(Failure::config)?.0)
            } else {
                None
            };
            if json {
                let cells: Vec<_> = rep
                    .cells
                    .iter()
                    .map(|c| {
                        let e = exact.as_ref().map(|f| exact_probability(f.coeff(c.n, c.p), c.n));
                        json!({
                            "n": c.n, "p": c.p, "count": c.count,
                            "probability": c.probability, "std_error": c.std_error,
                            "exact": e.as_ref().map(|q| q.to_string()),
                            "z": e.map(|q| if c.std_error > 0.0 { (c.probability - q.to_f64()) / c.std_error } else { 0.0 }),
                        })
                    })
                    .collect();
                let v = json!({
                    "samples": rep.samples, "seed": rep.seed, "censored": rep.censored,
                    "size_cap": rep.size_cap, "cells": cells,
                    // [size, count] pairs in increasing size
                    "cluster_sizes": rep.cluster_sizes.iter().map(|(k, v)| json!([k, v])).collect::<Vec<_>>(),
                });
                emit(out.as_deref(), &to_json(&v))
            } else {
                let mut s = String::from("n,p,count,probability,std_error\n");
                for c in &rep.cells {
                    s.push_str(&format!("{},{},{},{},{}\n", c.n, c.p, c.count, c.probability, c.std_error));
                }
                emit(out.as_deref(), &s)
            }
        }
        Command::Identities { weights, order, backend } => {
            let ws = load_weights(&weights)?;
            let rep = match backend {
                BackendArg::Exact => identity_suite::<Rational>(&ws, order, &()),
                BackendArg::Float => identity_suite::<Float>(&ws, order, &prec),
            }
            .map_err(Failure::config)?;
            print!("{}", to_json(&rep));
            if rep.all_pass() {
                Ok(())
            } else {
                Err(Failure::check(format!("{} identities failed", rep.failures().len())))
            }
        }
        Command::VerifyAll { weights, nmax, samples, seed, out } => {
            let ws = load_weights(&weights)?;
            let opts = verify::Options { n_max: nmax, samples: parse_count(&samples)?, seed, prec, exec };
            let report = verify::verify_all(&ws, &opts);
            emit(out.as_deref(), &to_json(&report))?;
            if report.failed > 0 {
                Err(Failure::check(format!("{} checks failed", report.failed)))
            } else {
                Ok(())
            }
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids_include_the_endpoint() {
        assert_eq!(parse_grid("0.5:2:0.5").unwrap(), vec![0.5, 1.0, 1.5, 2.0]);
        assert_eq!(parse_grid("3").unwrap(), vec![3.0]);
        assert!(parse_grid("2:1:1").is_err());
        assert!(parse_grid("1:2:0").is_err());
        assert_eq!(parse_range("200:400:100").unwrap(), vec![200, 300, 400]);
        assert!(parse_range("0.5:1:0.5").is_err());
    }

    #[test]
    fn counts_accept_scientific_notation() {
        assert_eq!(parse_count("1e7").unwrap(), 10_000_000);
        assert_eq!(parse_count("42").unwrap(), 42);
        assert!(parse_count("0").is_err());
        assert!(parse_count("1.5").is_err());
    }
}
