//! Command-line driver. [`run`] takes the full argv and writes to the given
//! streams so it can be exercised without spawning a process.
//!
//! Exit codes: 0 success, 1 failure, 2 usage error or unsupported space pair,
//! 3 non-convergence (partial output is still written).

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{CommandFactory, Parser, Subcommand};
use serde::Serialize;

use crate::coeffspace::{
    ladder_radius, membership_evidence, norm_dirichlet, norm_hl, norm_wiener, seminorm_blochbeta, seminorm_blochlog,
    seminorm_korenblum, Budget, CoefficientSequence, RadialGrid, SpaceSpec, SymbolSpec,
};
use crate::diagnostics::{verdict, VerdictBudget};
use crate::error::{Error, Result};
use crate::hilbertop::{apply, derivative_coeffs, matrix};
use crate::means::{
    certify, integral_mean, lemma42_ratio, mixed_norm_shift_check, moment_asymptotic_ratio, radius_grid,
    remark47_blowup, Certificate, Lemma42Params, MeanOrder,
};
use crate::opnorm::{finite_section_decay, weighted_norm_curve, wiener_section_decay, NormPoint};
use crate::suite::run_acceptance;

#[derive(Debug, Parser)]
#[command(name = "hgop", version, about = "Generalized Hilbert operator lab")]
struct Cli {
    /// Emit a single JSON document instead of CSV/plain text.
    #[arg(long, global = true)]
    json: bool,
    /// key=value file supplying defaults for flags of the chosen subcommand.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Norm or seminorm of a symbol in a space.
    Norm {
        symbol: SymbolSpec,
        #[arg(long)]
        space: SpaceSpec,
        /// Coefficient truncation.
        #[arg(short = 'N', long = "truncation", default_value_t = 1 << 16)]
        n: usize,
        /// Radial ladder depth for sup-type seminorms.
        #[arg(long, default_value_t = 12)]
        depth: u32,
    },
    /// Coefficients of H_g(f) as CSV `n,re,im`.
    Apply {
        #[arg(long)]
        g: SymbolSpec,
        #[arg(long)]
        f: SymbolSpec,
        /// Last output index.
        #[arg(short = 'N', long = "truncation", default_value_t = 16)]
        n: usize,
        /// Terms of f used in the moments.
        #[arg(short = 'K', long = "source-terms", default_value_t = 1 << 16)]
        k: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dense (N+1)x(K+1) section of the operator matrix as CSV.
    Matrix {
        #[arg(long)]
        g: SymbolSpec,
        #[arg(short = 'N', long = "rows", default_value_t = 15)]
        n: usize,
        #[arg(short = 'K', long = "cols", default_value_t = 15)]
        k: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Boundedness/compactness verdict for a space pair.
    Verdict {
        #[arg(long)]
        g: SymbolSpec,
        #[arg(long)]
        from: SpaceSpec,
        #[arg(long)]
        to: SpaceSpec,
        /// e.g. `dyadic=14,sum=20,tail=17,radial=12`.
        #[arg(long, default_value = "")]
        budget: VerdictBudget,
    },
    /// Truncated weighted operator norms as CSV `N,norm`.
    Opnorm {
        #[arg(long)]
        g: SymbolSpec,
        #[arg(long, allow_negative_numbers = true)]
        alpha: f64,
        #[arg(long, allow_negative_numbers = true)]
        beta: f64,
        /// Section sizes: `2^4..2^12` (doubling), `8,16,32`, or a single size.
        #[arg(long, default_value = "2^4..2^12")]
        truncations: String,
    },
    /// Norms of the operator with its first T rows removed, CSV `T,norm`.
    Decay {
        #[arg(long)]
        g: SymbolSpec,
        #[arg(long, allow_negative_numbers = true, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, allow_negative_numbers = true)]
        beta: f64,
        /// Section size.
        #[arg(long, default_value = "2^10")]
        size: String,
        /// Treat the source as the Wiener algebra (alpha is ignored).
        #[arg(long)]
        wiener: bool,
    },
    /// Integral means M_p(r_j, f) on r_j = 1 - 2^-j, CSV `r,value`.
    Means {
        #[arg(long)]
        f: SymbolSpec,
        #[arg(short = 'p', long = "order", default_value = "2")]
        p: MeanOrder,
        #[arg(long = "depth", alias = "r-depth", default_value_t = 12)]
        depth: u32,
        /// Coefficient truncation.
        #[arg(short = 'N', long = "truncation", default_value_t = 1 << 16)]
        n: usize,
    },
    /// Quadrature certificates for the asymptotic estimates.
    Verify {
        #[command(subcommand)]
        which: Verify,
    },
    /// Runs the acceptance battery.
    Suite {
        #[command(subcommand)]
        which: Suite,
    },
}

#[derive(Debug, Subcommand)]
enum Verify {
    /// ∫(1-t)^δ (1-tr)^{-1-δ-c} log^β log^γ against its closed-form rate.
    Lemma42 {
        #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
        delta: f64,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
        beta: f64,
        #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
        gamma: f64,
        #[arg(long, default_value_t = 20)]
        depth: u32,
    },
    /// ∫ t^n log^{α+1}(e/(1-t)) dt against log^{α+1}(e(n+1))/(n+1).
    Moment {
        #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
        alpha: f64,
        #[arg(long, default_value_t = 16)]
        depth: u32,
    },
    /// Mixed norm of f against that of its fractional derivative.
    Shift {
        #[arg(long)]
        f: SymbolSpec,
        #[arg(short = 'p', long = "order", default_value_t = 2.0)]
        p: f64,
        #[arg(long, allow_negative_numbers = true, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, default_value_t = 1.0)]
        shift: f64,
        #[arg(long, default_value_t = 12)]
        depth: u32,
        #[arg(short = 'N', long = "truncation", default_value_t = 1 << 16)]
        n: usize,
    },
    /// (1-r)∫ log log(e²/(1-t))/(1-tr)² dt against log log(1/(1-r)).
    Remark47 {
        #[arg(long, default_value_t = 20)]
        depth: u32,
    },
}

#[derive(Debug, Subcommand)]
enum Suite {
    Acceptance {
        #[arg(long, default_value = "acceptance-out")]
        out_dir: PathBuf,
    },
}

/// Parses `2^4..2^12`, `8,16,32` or `8` into a list of sizes.
pub fn parse_sizes(s: &str) -> Result<Vec<usize>> {
    let one = |t: &str| -> Result<usize> {
        let t = t.trim();
        let v = match t.split_once('^') {
            Some((b, e)) => {
                let b: usize = b.trim().parse().map_err(|_| Error::Parse(format!("size {t:?}")))?;
                let e: u32 = e.trim().parse().map_err(|_| Error::Parse(format!("size {t:?}")))?;
                b.checked_pow(e).ok_or_else(|| Error::ParameterRange(format!("size {t:?} overflows")))?
            }
            None => t.parse().map_err(|_| Error::Parse(format!("size {t:?}")))?,
        };
        if v == 0 {
            return Err(Error::ParameterRange("sizes must be positive".into()));
        }
        Ok(v)
    };
    if let Some((lo, hi)) = s.split_once("..") {
        let (lo, hi) = (one(lo)?, one(hi)?);
        if lo > hi {
            return Err(Error::ParameterRange(format!("empty range {s:?}")));
        }
        let mut out = Vec::new();
        let mut v = lo;
        while v <= hi {
            out.push(v);
            v *= 2;
        }
        Ok(out)
    } else {
        s.split(',').map(one).collect()
    }
}

/// Reads `key = value` lines; `#` starts a comment.
pub fn read_config(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path)?;
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("{}:{}: expected key=value", path.display(), i + 1)))?;
        map.insert(k.trim().trim_start_matches("--").to_string(), v.trim().to_string());
    }
    Ok(map)
}

/// Inserts config defaults as `--key=value` right after the innermost
/// subcommand token, for flags that subcommand accepts and argv lacks.
fn merge_config(args: &[String], config: &BTreeMap<String, String>) -> Vec<String> {
    let mut cmd = Cli::command();
    let mut insert_at = None;
    let mut i = 1;
    while i < args.len() {
        let a = &args[i];
        if a == "--config" {
            i += 2;
            continue;
        }
        if !a.starts_with('-') {
            match cmd.find_subcommand(a) {
                Some(sub) => {
                    cmd = sub.clone();
                    insert_at = Some(i + 1);
                }
                None => break,
            }
        }
        i += 1;
    }
    let Some(at) = insert_at else { return args.to_vec() };
    let mut extra = Vec::new();
    for (k, v) in config {
        let Some(arg) = cmd.get_arguments().find(|a| a.get_long() == Some(k.as_str())) else { continue };
        let long = format!("--{k}");
        let short = arg.get_short().map(|c| format!("-{c}"));
        let given = args.iter().any(|a| {
            a == &long || a.starts_with(&format!("{long}=")) || short.as_deref().is_some_and(|s| a.starts_with(s))
        });
        if given {
            continue;
        }
        if arg.get_num_args().is_some_and(|n| n.max_values() == 0) {
            if v == "true" {
                extra.push(long);
            }
        } else {
            extra.push(format!("{long}={v}"));
        }
    }
    let mut out = args[..at].to_vec();
    out.extend(extra);
    out.extend_from_slice(&args[at..]);
    out
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable")
}

/// Expands a symbol, keeping polynomials at their natural length.
fn expand_source(f: &SymbolSpec, n: usize) -> Result<CoefficientSequence> {
    if let SymbolSpec::Poly(c) = f {
        return f.expand(c.len().saturating_sub(1).max(1));
    }
    f.expand(n)
}

#[derive(Serialize)]
struct Curve<'a> {
    alpha: f64,
    beta: f64,
    points: &'a [NormPoint],
}

#[derive(Serialize)]
struct Certified<'a, T: Serialize> {
    check: &'a str,
    points: T,
    certificate: Certificate,
}

enum Outcome {
    Ok,
    Failed,
    Partial(String),
}

fn write_target(out: &mut dyn Write, path: Option<&Path>, body: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, body)?,
        None => out.write_all(body.as_bytes())?,
    }
    Ok(())
}

fn space_norm(f: &SymbolSpec, space: &SpaceSpec, n: usize, depth: u32) -> Result<f64> {
    space.validate()?;
    let c = f.expand(n)?;
    let grid = RadialGrid::ladder(depth);
    Ok(match *space {
        SpaceSpec::DirichletAlpha(a) => norm_dirichlet(&c, a),
        SpaceSpec::Wiener => norm_wiener(&c),
        SpaceSpec::HardyLittlewood(p) => norm_hl(&c, p)?,
        SpaceSpec::Hinf => seminorm_korenblum(&c, 0.0, &grid)?.value,
        SpaceSpec::Korenblum(a) => seminorm_korenblum(&c, a, &grid)?.value,
        SpaceSpec::BlochLog(a) => seminorm_blochlog(&c, a, &grid)?.value,
        SpaceSpec::BlochBeta(b) => seminorm_blochbeta(&c, b, &grid)?.value,
        SpaceSpec::DerivativeHardy(p) => {
            c.coeff(0).norm() + integral_mean(&derivative_coeffs(&c), MeanOrder::Finite(p), ladder_radius(depth))?
        }
        SpaceSpec::MeanLipschitz { .. } | SpaceSpec::Xp(_) => {
            let budget = Budget { depth, max_truncation: n, ..Budget::default() };
            let trace = membership_evidence(f, space, &budget)?;
            trace.points.iter().map(|p| p.1).fold(0.0, f64::max)
        }
    })
}

fn certified<T: Serialize>(
    json: bool,
    out: &mut dyn Write,
    err: &mut dyn Write,
    check: &str,
    csv: String,
    points: T,
    certificate: Certificate,
) -> Result<Outcome> {
    if json {
        writeln!(out, "{}", to_json(&Certified { check, points, certificate: certificate.clone() }))?;
    } else {
        out.write_all(csv.as_bytes())?;
        writeln!(
            err,
            "{check}: {} (band [{:.4}, {:.4}], spread {:.3}, drift {:.4})",
            if certificate.pass { "PASS" } else { "FAIL" },
            certificate.band.0,
            certificate.band.1,
            certificate.spread,
            certificate.drift
        )?;
    }
    Ok(if certificate.pass { Outcome::Ok } else { Outcome::Failed })
}

fn execute(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<Outcome> {
    let json = cli.json;
    match cli.command {
        Command::Norm { symbol, space, n, depth } => {
            let v = space_norm(&symbol, &space, n, depth)?;
            if json {
                writeln!(out, "{}", serde_json::json!({ "symbol": symbol.to_string(), "space": space.to_string(), "norm": v }))?;
            } else {
                writeln!(out, "{}", num(v))?;
            }
        }
        Command::Apply { g, f, n, k, out: path } => {
            let gc = g.expand(n + 1)?;
            let fc = expand_source(&f, k)?;
            let c = apply(&gc, &fc, n)?;
            let body = if json {
                let rows: Vec<_> = c
                    .coeffs()
                    .iter()
                    .enumerate()
                    .map(|(i, z)| serde_json::json!({ "n": i, "re": z.re, "im": z.im }))
                    .collect();
                to_json(&rows) + "\n"
            } else {
                let mut s = String::from("n,re,im\n");
                for (i, z) in c.coeffs().iter().enumerate() {
                    s.push_str(&format!("{i},{},{}\n", num(z.re), num(z.im)));
                }
                s
            };
            write_target(out, path.as_deref(), &body)?;
        }
        Command::Matrix { g, n, k, out: path } => {
            let m = matrix(&g.expand(n + k + 1)?, n, k)?;
            write_target(out, path.as_deref(), &m.to_csv())?;
        }
        Command::Verdict { g, from, to, budget } => {
            let r = verdict(&g, &from, &to, &budget)?;
            writeln!(out, "{}", to_json(&r))?;
        }
        Command::Opnorm { g, alpha, beta, truncations } => {
            let sizes = parse_sizes(&truncations)?;
            let ns: Vec<usize> = sizes.iter().map(|s| s - 1).collect();
            let gc = g.expand(ns[ns.len() - 1] + 2)?;
            let curve = weighted_norm_curve(&gc, alpha, beta, &ns)?;
            if json {
                writeln!(out, "{}", to_json(&Curve { alpha, beta, points: &curve }))?;
            } else {
                writeln!(out, "N,norm")?;
                for p in &curve {
                    writeln!(out, "{},{}", p.n, num(p.norm))?;
                }
            }
            if let Some(p) = curve.iter().find(|p| !p.converged) {
                return Ok(Outcome::Partial(format!("power iteration did not converge at N={}", p.n)));
            }
        }
        Command::Decay { g, alpha, beta, size, wiener } => {
            let size = *parse_sizes(&size)?.last().expect("nonempty");
            let n_op = size - 1;
            let mut starts = vec![0];
            starts.extend((0..).map(|j| 1usize << j).take_while(|&t| t <= n_op));
            let gc = g.expand(n_op + 2)?;
            let points: Vec<(usize, f64, bool)> = if wiener {
                wiener_section_decay(&gc, beta, n_op, &starts).into_iter().map(|(t, v)| (t, v, true)).collect()
            } else {
                finite_section_decay(&gc, alpha, beta, n_op, &starts)?
                    .into_iter()
                    .map(|p| (p.n, p.norm, p.converged))
                    .collect()
            };
            if json {
                let rows: Vec<_> = points
                    .iter()
                    .map(|&(t, v, c)| serde_json::json!({ "T": t, "norm": v, "converged": c }))
                    .collect();
                writeln!(out, "{}", to_json(&rows))?;
            } else {
                writeln!(out, "T,norm")?;
                for (t, v, _) in &points {
                    writeln!(out, "{t},{}", num(*v))?;
                }
            }
            if let Some(p) = points.iter().find(|p| !p.2) {
                return Ok(Outcome::Partial(format!("power iteration did not converge at T={}", p.0)));
            }
        }
        Command::Means { f, p, depth, n } => {
            let c = expand_source(&f, n)?;
            let mut rows = Vec::new();
            for r in radius_grid(depth) {
                rows.push((r, integral_mean(&c, p, r)?));
            }
            if json {
                writeln!(out, "{}", to_json(&serde_json::json!({ "p": p.to_string(), "points": rows })))?;
            } else {
                writeln!(out, "r,value")?;
                for (r, v) in rows {
                    writeln!(out, "{},{}", num(r), num(v))?;
                }
            }
        }
        Command::Verify { which } => return verify(which, json, out, err),
        Command::Suite { which: Suite::Acceptance { out_dir } } => {
            let outcomes = run_acceptance(&out_dir)?;
            if json {
                let rows: Vec<_> = outcomes
                    .iter()
                    .map(|o| serde_json::json!({ "id": o.id, "name": o.name, "pass": o.pass, "detail": o.detail }))
                    .collect();
                writeln!(out, "{}", to_json(&rows))?;
            } else {
                for o in &outcomes {
                    writeln!(out, "{}", o.line())?;
                }
            }
            if outcomes.iter().any(|o| !o.pass) {
                return Ok(Outcome::Failed);
            }
        }
    }
    Ok(Outcome::Ok)
}

fn verify(which: Verify, json: bool, out: &mut dyn Write, err: &mut dyn Write) -> Result<Outcome> {
    match which {
        Verify::Lemma42 { delta, c, beta, gamma, depth } => {
            let pts = lemma42_ratio(Lemma42Params { delta, c, beta, gamma }, &radius_grid(depth))?;
            let cert = certify(&pts.iter().map(|&(r, q)| (-(1.0 - r).ln(), q)).collect::<Vec<_>>());
            let mut csv = String::from("r,ratio\n");
            for (r, q) in &pts {
                csv.push_str(&format!("{},{}\n", num(*r), num(*q)));
            }
            certified(json, out, err, "lemma42", csv, pts, cert)
        }
        Verify::Moment { alpha, depth } => {
            let mut grid = vec![0];
            grid.extend((0..=depth).map(|j| 1usize << j));
            let pts = moment_asymptotic_ratio(alpha, &grid)?;
            let cert = certify(&pts.iter().map(|&(n, q)| ((n as f64 + 1.0).ln(), q)).collect::<Vec<_>>());
            let mut csv = String::from("n,ratio\n");
            for (n, q) in &pts {
                csv.push_str(&format!("{n},{}\n", num(*q)));
            }
            certified(json, out, err, "moment", csv, pts, cert)
        }
        Verify::Shift { f, p, alpha, shift, depth, n } => {
            let c = expand_source(&f, n)?;
            let grid: Vec<f64> = (1..=depth).map(ladder_radius).collect();
            let rep = mixed_norm_shift_check(&c, p, MeanOrder::Infinity, alpha, shift, &grid)?;
            // the estimate compares sup norms, so certify the ratio of running sups
            let (mut sa, mut sb) = (0.0f64, 0.0f64);
            let ratios: Vec<(f64, f64)> = rep
                .traces
                .iter()
                .filter_map(|t| {
                    sa = sa.max(t.1);
                    sb = sb.max(t.2);
                    (sb > 0.0).then(|| (-(1.0 - t.0).ln(), sa / sb))
                })
                .collect();
            let cert = certify(&ratios);
            let mut csv = String::from("r,value,shifted\n");
            for (r, a, b) in &rep.traces {
                csv.push_str(&format!("{},{},{}\n", num(*r), num(*a), num(*b)));
            }
            certified(json, out, err, "shift", csv, rep, cert)
        }
        Verify::Remark47 { depth } => {
            let pts = remark47_blowup(&radius_grid(depth))?;
            let ratios: Vec<(f64, f64)> = pts
                .iter()
                .skip(1)
                .map(|&(r, v)| {
                    let l = -(1.0 - r).ln();
                    (l, v / (2.0 + l).ln())
                })
                .collect();
            let cert = certify(&ratios);
            let mut csv = String::from("r,value,ratio\n");
            for (r, v) in &pts {
                let l = -(1.0 - r).ln();
                csv.push_str(&format!("{},{},{}\n", num(*r), num(*v), num(v / (2.0 + l).ln())));
            }
            certified(json, out, err, "remark47", csv, pts, cert)
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NoTheorem { .. } => 2,
        Error::NonConvergence(_) => 3,
        _ => 1,
    }
}

/// Runs the driver on `args` (including the program name) and returns the
/// process exit code.
pub fn run(args: &[String], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let config_path = args.windows(2).find(|w| w[0] == "--config").map(|w| PathBuf::from(&w[1])).or_else(|| {
        args.iter().find_map(|a| a.strip_prefix("--config=").map(PathBuf::from))
    });
    let args = match config_path {
        Some(p) => match read_config(&p) {
            Ok(cfg) => merge_config(args, &cfg),
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                return 1;
            }
        },
        None => args.to_vec(),
    };
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = out.write_all(text.as_bytes());
                0
            } else {
                let _ = err.write_all(text.as_bytes());
                2
            };
        }
    };
    match execute(cli, out, err) {
        Ok(Outcome::Ok) => 0,
        Ok(Outcome::Failed) => 1,
        Ok(Outcome::Partial(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            3
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}
