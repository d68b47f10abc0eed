//! Acceptance battery: one check per criterion, each producing a pass flag,
//! a one-line detail, and deterministic CSV/JSON artifacts.
//!
//! The closed forms and the Jacobi eigensolver below are reference oracles
//! and share no code with the routines they check.

use std::fmt::Write as _;
use std::path::Path;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::coeffspace::{CoefficientSequence, SpaceSpec, SymbolSpec};
use crate::diagnostics::{
    blochlog_partial_sum_criterion, dirichlet_tail_criterion, dirichlet_tails, dyadic_criterion,
    partial_sum_law_criterion, summability_criterion, verdict, PartialSumLaw, Verdict, VerdictBudget,
};
use crate::error::Result;
use crate::hilbertop::{apply, hadamard, matrix};
use crate::means::{
    certify, integral_mean, lemma42_ratio, moment_asymptotic_ratio, moment_ratio_closed_form, radius_grid,
    remark47_blowup, Lemma42Params, MeanOrder,
};
use crate::numeric::fit_line;
use crate::opnorm::{
    classify_curve, power_iteration, weighted_norm_curve, wiener_section_decay, wiener_source_norm, CurveShape,
    DenseMatrix, MAX_ITER,
};

/// Outcome of one acceptance criterion.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub id: u32,
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
    pub elapsed: Duration,
    /// `(file name, contents)` written by [`run_battery`].
    pub artifacts: Vec<(String, String)>,
}

impl Outcome {
    /// `PASS  3 name: detail`.
    pub fn line(&self) -> String {
        format!(
            "{} {:>2} {}: {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail
        )
    }
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

fn timed(id: u32, name: &'static str, f: impl FnOnce() -> Result<(bool, String, Vec<(String, String)>)>) -> Outcome {
    let start = Instant::now();
    let r = f();
    let elapsed = start.elapsed();
    match r {
        Ok((pass, detail, artifacts)) => Outcome { id, name, pass, detail, elapsed, artifacts },
        Err(e) => Outcome { id, name, pass: false, detail: format!("error: {e}"), elapsed, artifacts: vec![] },
    }
}

fn ulp_distance(a: f64, b: f64) -> u64 {
    (a.to_bits() as i64 - b.to_bits() as i64).unsigned_abs()
}

pub fn classical_reduction() -> Outcome {
    let start = Instant::now();
    let mut o = timed(1, "classical reduction", || {
        let n = 1 << 10;
        let g = SymbolSpec::Log.expand(n + 1)?;
        let m = matrix(&g, n, n)?;
        let mut worst = 0;
        for i in 0..=n {
            for k in 0..=n {
                let z = m.get(i, k);
                let want = 1.0 / (i + k + 1) as f64;
                worst = worst.max(if z.im == 0.0 { ulp_distance(z.re, want) } else { u64::MAX });
            }
        }
        let c = apply(&g, &CoefficientSequence::constant(1.0), n)?;
        let exact = (0..=n).all(|i| c.coeff(i) == Complex64::new(1.0 / (i + 1) as f64, 0.0));
        let csv = format!("max_ulp,apply_exact\n{worst},{exact}\n");
        Ok((worst <= 1 && exact, format!("max entry error {worst} ulp, H(1) exact: {exact}"), vec![("c01_classical.csv".into(), csv)]))
    });
    let within = start.elapsed() < Duration::from_secs(1);
    o.pass &= within;
    o.detail.push_str(&format!(", runtime < 1 s: {within}"));
    o
}

pub fn h_of_one_identity() -> Outcome {
    timed(2, "H_g(1) identity", || {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut mismatches = 0;
        let mut csv = String::from("symbol,degree,mismatches\n");
        for s in 0..20 {
            let deg = rng.gen_range(1..=60);
            let c: Vec<Complex64> = (0..=deg)
                .map(|_| Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)))
                .collect();
            let g = CoefficientSequence::new(c)?;
            let out = apply(&g, &CoefficientSequence::constant(1.0), deg)?;
            let bad = (0..=deg).filter(|&n| out.coeff(n) != g.coeff(n + 1)).count();
            mismatches += bad;
            let _ = writeln!(csv, "{s},{deg},{bad}");
        }
        Ok((mismatches == 0, format!("{mismatches} mismatching coefficients over 20 symbols"), vec![("c02_h1.csv".into(), csv)]))
    })
}

pub fn dichotomy() -> Outcome {
    let start = Instant::now();
    let mut o = timed(3, "weighted norm dichotomy", || {
        let alpha = 0.5;
        // sections of size 2^4..2^12
        let ns: Vec<usize> = (4..=12).map(|j| (1usize << j) - 1).collect();
        let g = SymbolSpec::Log.expand(ns[ns.len() - 1] + 2)?;
        let blocks = SymbolSpec::Log.expand(1 << 15)?;
        let mut pass = true;
        let mut detail = Vec::new();
        let mut csv = String::from("beta,N,norm,converged\n");
        for (beta, want) in [(0.5, CurveShape::Saturating), (1.0, CurveShape::Saturating), (0.3, CurveShape::Growing), (0.1, CurveShape::Growing)] {
            let curve = weighted_norm_curve(&g, alpha, beta, &ns)?;
            for p in &curve {
                let _ = writeln!(csv, "{beta},{},{},{}", p.n, num(p.norm), p.converged);
            }
            let s = classify_curve(&curve);
            let v = dyadic_criterion(&blocks, alpha, beta, 14)?.verdict;
            let agree = v.is_bounded() == (s.shape == CurveShape::Saturating);
            let ok = s.shape == want;
            pass &= ok;
            let last = s.last_increases.last().copied().unwrap_or(f64::NAN);
            detail.push(format!(
                "β={beta}: {:?} (want {want:?}, last step {:.3}%, slope {:.3}; dyadic {v}, agree {agree})",
                s.shape,
                100.0 * last,
                s.slope
            ));
        }
        Ok((pass, detail.join("; "), vec![("c03_curves.csv".into(), csv)]))
    });
    let within = start.elapsed() < Duration::from_secs(120);
    o.pass &= within;
    o.detail.push_str(&format!("; runtime < 2 min: {within}"));
    o
}

pub fn exponent_recovery() -> Outcome {
    timed(4, "dyadic exponent recovery", || {
        let mut pass = true;
        let mut detail = Vec::new();
        let mut csv = String::from("s,fitted,target\n");
        for s in [-1.0, -0.5, 0.0] {
            let g = SymbolSpec::Power(s).expand(1 << 15)?;
            let r = dyadic_criterion(&g, 1.0, 1.0, 14)?;
            let slope = r.slope.unwrap_or(f64::NAN);
            let target = 2.0 * s + 1.0;
            pass &= (slope - target).abs() <= 0.05;
            detail.push(format!("s={s}: {slope:.4} vs {target}"));
            let _ = writeln!(csv, "{s},{},{target}", num(slope));
        }
        Ok((pass, detail.join(", "), vec![("c04_exponents.csv".into(), csv)]))
    })
}

pub fn wiener_equivalence() -> Outcome {
    timed(5, "Wiener-source equivalence", || {
        let n_sum = 1 << 20;
        let n_op = 1 << 12;
        let g = SymbolSpec::Power(-2.1).expand(n_sum)?;
        let crit = summability_criterion(&g, -1.0);
        let tails: Vec<usize> = (0..=10).map(|j| 1usize << j).collect();
        let mut starts = vec![0];
        starts.extend(&tails);
        let decay = wiener_section_decay(&g, -1.0, n_op, &starts);
        let full = decay[0].1;
        let at = decay.last().map_or(f64::NAN, |p| p.1) / full;
        let monotone = decay.windows(2).all(|w| w[1].1 <= w[0].1);

        let log = SymbolSpec::Log.expand(n_sum)?;
        let crit_log = summability_criterion(&log, -1.0);
        let ns: Vec<usize> = (4..=12).map(|j| 1usize << j).collect();
        let norms: Vec<f64> = ns.iter().map(|&n| wiener_source_norm(&log, -1.0, n)).collect();
        let grows = norms.windows(2).all(|w| w[1] > w[0]);
        let (xs, ys): (Vec<f64>, Vec<f64>) = ns.iter().zip(&norms).map(|(n, v)| ((*n as f64).ln(), v.ln())).unzip();
        let slope = fit_line(&xs, &ys).map_or(0.0, |f| f.slope);

        let pass = crit.verdict == Verdict::Compact
            && at < 1e-2
            && monotone
            && crit_log.verdict == Verdict::Unbounded
            && grows
            && slope > 0.05;
        let mut csv = String::from("symbol,T,tail_norm\n");
        for (t, v) in &decay {
            let _ = writeln!(csv, "power:-2.1,{t},{}", num(*v));
        }
        for (n, v) in ns.iter().zip(&norms) {
            let _ = writeln!(csv, "log,{n},{}", num(*v));
        }
        let detail = format!(
            "power(-2.1): {} with tail/full at T=2^10 = {at:.4e} (need < 1e-2), decreasing {monotone}; log: {}, norm growth slope {slope:.3}",
            crit.verdict, crit_log.verdict
        );
        Ok((pass, detail, vec![("c05_wiener.csv".into(), csv), ("c05_verdicts.json".into(), json(&(crit, crit_log)))]))
    })
}

pub fn tail_separation() -> Outcome {
    timed(6, "Dirichlet tail separation", || {
        let models = [
            ("powlog:-0.5:-1", Verdict::Bounded, 1.0),
            ("powlog:-0.5:-1.5", Verdict::Compact, 2.0),
        ];
        let mut pass = true;
        let mut detail = Vec::new();
        let mut csv = String::from("symbol,N,T_N,oracle\n");
        let mut reports = Vec::new();
        for (spec, want, p_minus_one) in models {
            let g: SymbolSpec = spec.parse()?;
            let r = dirichlet_tail_criterion(&g, 1.0, 17)?;
            let tails = dirichlet_tails(&g, 1.0, 17)?;
            // ∫_N^∞ dx/(x log^{p}x) = 1/((p-1) log^{p-1} N)
            let mut worst: f64 = 0.0;
            for &(n, t) in &tails.points {
                let oracle = 1.0 / (p_minus_one * (n as f64).ln().powf(p_minus_one));
                worst = worst.max((t / oracle - 1.0).abs());
                let _ = writeln!(csv, "{spec},{n},{},{}", num(t), num(oracle));
            }
            let ok = r.verdict == want && worst <= 0.2;
            pass &= ok;
            detail.push(format!("{spec}: {} (want {want}), worst oracle deviation {:.2}%", r.verdict, 100.0 * worst));
            reports.push(r);
        }
        Ok((pass, detail.join("; "), vec![("c06_tails.csv".into(), csv), ("c06_verdicts.json".into(), json(&reports))]))
    })
}

pub const ESTIMATE_TUPLES: [(f64, f64, f64, f64); 6] =
    [(0.0, 1.0, 0.0, 0.0), (0.0, 1.0, 1.0, 0.0), (0.0, 1.0, 0.0, 1.0), (1.0, 0.5, 0.0, 0.0), (0.5, 2.0, 1.0, -1.0), (0.0, 1.0, -1.0, 1.0)];

pub fn integral_estimate_certification() -> Outcome {
    let start = Instant::now();
    let mut o = timed(7, "integral estimate certification", || {
        let grid = radius_grid(20);
        let mut pass = true;
        let mut detail = Vec::new();
        let mut csv = String::from("delta,c,beta,gamma,r,ratio\n");
        for (delta, c, beta, gamma) in ESTIMATE_TUPLES {
            let pts = lemma42_ratio(Lemma42Params { delta, c, beta, gamma }, &grid)?;
            for (r, q) in &pts {
                let _ = writeln!(csv, "{delta},{c},{beta},{gamma},{},{}", num(*r), num(*q));
            }
            let logged: Vec<(f64, f64)> = pts.iter().map(|&(r, q)| (-(1.0 - r).ln(), q)).collect();
            let cert = certify(&logged);
            pass &= cert.pass;
            detail.push(format!("({delta},{c},{beta},{gamma}) spread {:.2} drift {:.4}", cert.spread, cert.drift));
        }
        Ok((pass, detail.join("; "), vec![("c07_integral_estimate.csv".into(), csv)]))
    });
    let within = start.elapsed() < Duration::from_secs(60);
    o.pass &= within;
    o.detail.push_str(&format!("; runtime < 1 min: {within}"));
    o
}

pub fn moment_asymptotics() -> Outcome {
    timed(8, "moment asymptotics", || {
        let mut grid = vec![0usize];
        grid.extend((0..=16).map(|j| 1usize << j));
        grid.push(100_000);
        let pts = moment_asymptotic_ratio(0.0, &grid)?;
        let mut worst: f64 = 0.0;
        let mut band_ok = true;
        let mut csv = String::from("n,ratio,closed_form\n");
        for &(n, q) in &pts {
            let exact = moment_ratio_closed_form(n);
            worst = worst.max((q - exact).abs());
            if n >= 1 << 10 {
                band_ok &= (0.8..=1.3).contains(&q);
            }
            let _ = writeln!(csv, "{n},{},{}", num(q), num(exact));
        }
        let pass = worst <= 1e-10 && band_ok;
        Ok((pass, format!("max |quadrature - closed form| = {worst:.2e}, band [0.8,1.3] for n ≥ 2^10: {band_ok}"), vec![("c08_moments.csv".into(), csv)]))
    })
}

pub fn convolution_inequality() -> Outcome {
    timed(9, "Hadamard mean inequality", || {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut worst = f64::NEG_INFINITY;
        let mut failures = 0;
        let mut count = 0;
        for _ in 0..200 {
            let poly = |rng: &mut ChaCha8Rng| -> Result<CoefficientSequence> {
                let d = rng.gen_range(0..=24);
                CoefficientSequence::new((0..=d).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect())
            };
            let f = poly(&mut rng)?;
            let g = poly(&mut rng)?;
            let fg = hadamard(&f, &g);
            for p in [1.0, 2.0, 4.0] {
                for r in [0.3, 0.7, 0.95] {
                    let lhs = integral_mean(&fg, MeanOrder::Finite(p), r * r)?;
                    let rhs = integral_mean(&f, MeanOrder::Finite(p), r)? * integral_mean(&g, MeanOrder::Finite(1.0), r)?;
                    count += 1;
                    if lhs > rhs * (1.0 + 1e-9) {
                        failures += 1;
                    }
                    if rhs > 0.0 {
                        worst = worst.max(lhs / rhs);
                    }
                }
            }
        }
        let csv = format!("cases,failures,max_ratio\n{count},{failures},{}\n", num(worst));
        Ok((failures == 0, format!("{failures}/{count} violations, max lhs/rhs {worst:.6}"), vec![("c09_hadamard.csv".into(), csv)]))
    })
}

pub fn partial_sum_routes() -> Outcome {
    timed(10, "partial-sum routes", || {
        let n = 1 << 20;
        let budget = VerdictBudget::default();
        let log = SymbolSpec::Log.expand(n)?;
        let r1 = blochlog_partial_sum_criterion(&log, 0.0)?;
        let exact_slope = r1.ratio_band.is_some_and(|(lo, hi)| (lo - 1.0).abs() < 1e-12 && (hi - 1.0).abs() < 1e-12);
        let g46 = SymbolSpec::PowLog(-1.0, -1.0).expand(n)?;
        let r2 = partial_sum_law_criterion(&g46, PartialSumLaw { s: 1.0, t: -1.0 }, "4.6")?;
        let r3 = verdict(&SymbolSpec::Log, &SpaceSpec::Korenblum(0.5), &SpaceSpec::Korenblum(0.5), &budget)?;
        let r4 = verdict(&SymbolSpec::Log, &SpaceSpec::Korenblum(0.5), &SpaceSpec::Korenblum(0.3), &budget)?;
        let pass = r1.verdict == Verdict::Bounded
            && exact_slope
            && r2.verdict == Verdict::Bounded
            && r3.verdict == Verdict::Bounded
            && r4.verdict == Verdict::Unbounded;
        let detail = format!(
            "1/n: {} (Q_N = N exactly: {exact_slope}); 1/(n log(n+1)): {}; Korenblum (0.5→0.5): {}, (0.5→0.3): {}",
            r1.verdict, r2.verdict, r3.verdict, r4.verdict
        );
        Ok((pass, detail, vec![("c10_routes.json".into(), json(&[r1, r2, r3, r4]))]))
    })
}

pub fn loglog_blowup() -> Outcome {
    timed(11, "log-log blow-up", || {
        let grid: Vec<f64> = (10..=20).map(|j| 1.0 - (-(j as f64)).exp2()).collect();
        let pts = remark47_blowup(&grid)?;
        let (xs, ys): (Vec<f64>, Vec<f64>) = pts.iter().map(|&(r, v)| ((2.0 - (1.0 - r).ln()).ln(), v)).unzip();
        let slope = fit_line(&xs, &ys).map_or(f64::NAN, |f| f.slope);
        let mut csv = String::from("r,trace\n");
        for (r, v) in &pts {
            let _ = writeln!(csv, "{},{}", num(*r), num(*v));
        }
        Ok(((slope - 1.0).abs() <= 0.2, format!("fitted slope {slope:.4} (want 1 ± 0.2)"), vec![("c11_blowup.csv".into(), csv)]))
    })
}

/// Largest eigenvalue of a symmetric matrix by cyclic Jacobi rotations.
pub fn jacobi_max_eigenvalue(mut a: Vec<f64>, n: usize) -> f64 {
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i * n + j].powi(2)).sum();
        let diag: f64 = (0..n).map(|i| a[i * n + i].powi(2)).sum();
        if off <= 1e-30 * diag.max(f64::MIN_POSITIVE) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i * n + i]).fold(f64::NEG_INFINITY, f64::max)
}

/// Spectral norm through the Gram matrix and Jacobi.
pub fn jacobi_spectral_norm(m: &DenseMatrix) -> f64 {
    let c = m.cols;
    let mut gram = vec![0.0; c * c];
    for i in 0..c {
        for j in 0..c {
            gram[i * c + j] = (0..m.rows).map(|r| m.data[r * c + i] * m.data[r * c + j]).sum();
        }
    }
    jacobi_max_eigenvalue(gram, c).max(0.0).sqrt()
}

pub fn oracle_equivalence() -> Outcome {
    timed(12, "power iteration vs Jacobi", || {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let mut worst: f64 = 0.0;
        let mut csv = String::from("case,rows,cols,power,jacobi\n");
        for case in 0..200 {
            let rows = rng.gen_range(1..=64);
            let cols = rng.gen_range(1..=64);
            let data: Vec<f64> = (0..rows * cols).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let m = DenseMatrix::new(rows, cols, data);
            let p = power_iteration(&m, None, MAX_ITER).norm;
            let j = jacobi_spectral_norm(&m);
            worst = worst.max((p - j).abs());
            let _ = writeln!(csv, "{case},{rows},{cols},{},{}", num(p), num(j));
        }
        Ok((worst <= 1e-6, format!("max |power - jacobi| = {worst:.2e} over 200 matrices"), vec![("c12_oracle.csv".into(), csv)]))
    })
}

/// Criteria 1 through 12, in order.
pub fn run_criteria() -> Vec<Outcome> {
    vec![
        classical_reduction(),
        h_of_one_identity(),
        dichotomy(),
        exponent_recovery(),
        wiener_equivalence(),
        tail_separation(),
        integral_estimate_certification(),
        moment_asymptotics(),
        convolution_inequality(),
        partial_sum_routes(),
        loglog_blowup(),
        oracle_equivalence(),
    ]
}

/// Runs criteria 1–12 and writes their artifacts plus `summary.csv` to `dir`.
pub fn run_battery(dir: &Path) -> Result<Vec<Outcome>> {
    std::fs::create_dir_all(dir)?;
    let outcomes = run_criteria();
    let mut summary = String::from("id,name,pass\n");
    for o in &outcomes {
        for (name, body) in &o.artifacts {
            std::fs::write(dir.join(name), body)?;
        }
        let _ = writeln!(summary, "{},{},{}", o.id, o.name, o.pass);
    }
    std::fs::write(dir.join("summary.csv"), summary)?;
    Ok(outcomes)
}

/// Byte comparison of every file in two artifact directories.
pub fn compare_dirs(a: &Path, b: &Path) -> Result<Vec<String>> {
    let mut names: Vec<String> = std::fs::read_dir(a)?
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    let mut differing = Vec::new();
    for name in names {
        let x = std::fs::read(a.join(&name))?;
        let y = std::fs::read(b.join(&name)).unwrap_or_default();
        if x != y {
            differing.push(name);
        }
    }
    Ok(differing)
}

/// Full battery: two runs into `dir/run1` and `dir/run2`, then criterion 13.
pub fn run_acceptance(dir: &Path) -> Result<Vec<Outcome>> {
    let first = run_battery(&dir.join("run1"))?;
    let start = Instant::now();
    run_battery(&dir.join("run2"))?;
    let differing = compare_dirs(&dir.join("run1"), &dir.join("run2"))?;
    let mut all = first;
    all.push(Outcome {
        id: 13,
        name: "determinism",
        pass: differing.is_empty(),
        detail: if differing.is_empty() {
            "second run byte-identical".into()
        } else {
            format!("differing files: {}", differing.join(", "))
        },
        elapsed: start.elapsed(),
        artifacts: vec![],
    });
    Ok(all)
}
