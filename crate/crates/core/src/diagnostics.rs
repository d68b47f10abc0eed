//! Coefficient criteria for boundedness and compactness of `H_g`, and a
//! dispatcher that picks the criterion for a (source, target) space pair.
//!
//! Finite data cannot prove an `O`/`o` statement. Each report states the
//! inequality it tested, the fitted exponent, and the margin by which the
//! fit cleared (positive) or missed (negative) the threshold.

use serde::{Deserialize, Serialize};

use crate::coeffspace::{membership_evidence, Budget, CoefficientSequence, SpaceSpec, SymbolSpec};
use crate::error::{Error, Result};
use crate::numeric::{fit_line, fit_plane, Compensated, LineFit};
use crate::quad::{integrate, QuadOptions};

/// Default slope tolerance.
pub const TOL: f64 = 0.05;
/// Tolerance on the exponent of `log N` in two-parameter fits.
pub const TOL_LOG: f64 = 0.25;
/// Relative last-decade increment under which a series counts as converged.
pub const FLAT_INCREMENT: f64 = 1e-3;
/// First dyadic block used in slope fits.
pub const FIRST_BLOCK: u32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Bounded,
    Compact,
    Unbounded,
    Inconclusive,
}

impl Verdict {
    /// Compact operators are bounded.
    pub fn is_bounded(self) -> bool {
        matches!(self, Verdict::Bounded | Verdict::Compact)
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        std::fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictReport {
    pub theorem: String,
    pub verdict: Verdict,
    pub slope: Option<f64>,
    pub target_slope: Option<f64>,
    pub ratio_band: Option<(f64, f64)>,
    pub truncation: usize,
    pub tolerance: f64,
    /// The inequality that was tested, in words.
    pub inequality: String,
    /// Threshold minus fitted value; negative when the inequality failed.
    pub margin: f64,
    pub residual: Option<f64>,
    pub notes: Vec<String>,
}

impl VerdictReport {
    fn new(theorem: &str, verdict: Verdict, inequality: String) -> Self {
        Self {
            theorem: theorem.to_string(),
            verdict,
            slope: None,
            target_slope: None,
            ratio_band: None,
            truncation: 0,
            tolerance: TOL,
            inequality,
            margin: 0.0,
            residual: None,
            notes: Vec::new(),
        }
    }
}

fn band(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    (lo <= hi).then_some((lo, hi))
}

/// Block sums `S_N = Σ_{n=2^N}^{2^{N+1}-1} |b_{n+1}|²` for `N = 0..=n_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockSeries {
    pub sums: Vec<f64>,
    pub n_max: u32,
    /// Fit of `log2 S_N` against `N` over `N ≥ 3` with `S_N > 0`.
    pub fit: Option<LineFit>,
}

impl BlockSeries {
    pub fn new(g: &CoefficientSequence, n_max: u32) -> Result<Self> {
        let last = (1usize << (n_max + 1)) - 1;
        if g.truncation() < last + 1 {
            return Err(Error::ParameterRange(format!(
                "dyadic blocks up to N={n_max} need b_n for n ≤ {}, have {}",
                last + 1,
                g.truncation()
            )));
        }
        let sums: Vec<f64> = (0..=n_max)
            .map(|big_n| {
                let mut acc = Compensated::new();
                for n in (1usize << big_n)..(1usize << (big_n + 1)) {
                    acc.add(g.coeff(n + 1).norm_sqr());
                }
                acc.value()
            })
            .collect();
        let (xs, ys): (Vec<f64>, Vec<f64>) = sums
            .iter()
            .enumerate()
            .skip(FIRST_BLOCK as usize)
            .filter(|(_, s)| **s > 0.0)
            .map(|(j, s)| (j as f64, s.log2()))
            .unzip();
        Ok(Self { fit: fit_line(&xs, &ys), sums, n_max })
    }

    pub fn total(&self) -> f64 {
        crate::numeric::sum_f64(self.sums.iter().copied())
    }
}

/// Dyadic block test for `D²_α → D²_β`, `0 < α < 2`.
pub fn dyadic_criterion(g: &CoefficientSequence, alpha: f64, beta: f64, n_max: u32) -> Result<VerdictReport> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(Error::Hypothesis(format!("dyadic route needs 0 < α < 2, got α={alpha}")));
    }
    if n_max < 6 {
        return Err(Error::ParameterRange(format!("need Nmax ≥ 6, got {n_max}")));
    }
    let blocks = BlockSeries::new(g, n_max)?;
    let target = beta - alpha - 1.0;
    let window = || blocks.sums.iter().enumerate().skip(FIRST_BLOCK as usize);
    let inequality = format!("S_N ≤ C·2^(N·{target}) for N in [{FIRST_BLOCK},{n_max}]");
    let mut report = VerdictReport::new("2.2", Verdict::Inconclusive, inequality);
    report.target_slope = Some(target);
    report.truncation = (1usize << (n_max + 1)) - 1;

    if window().all(|(_, s)| *s == 0.0) {
        report.theorem = "2.3".into();
        report.verdict = Verdict::Compact;
        report.notes.push("all blocks vanish (finite rank)".into());
        return Ok(report);
    }
    report.ratio_band = band(window().filter(|(_, s)| **s > 0.0).map(|(n, s)| s / (n as f64 * target).exp2()));
    let Some(fit) = blocks.fit else {
        report.notes.push("fewer than two nonzero blocks in the window".into());
        return Ok(report);
    };
    report.slope = Some(fit.slope);
    report.residual = Some(fit.residual);
    let excess = fit.slope - target;
    report.margin = target + TOL - fit.slope;
    report.verdict = if excess > TOL {
        Verdict::Unbounded
    } else if excess < -TOL {
        report.theorem = "2.3".into();
        report.margin = -TOL - excess;
        report.inequality.push_str(&format!(" with ratio decaying at slope < -{TOL}"));
        Verdict::Compact
    } else {
        Verdict::Bounded
    };
    Ok(report)
}

/// Convergence test on the partial sums of `terms` (index 0 is `n = first`).
fn series_test(theorem: &str, inequality: String, terms: &[f64]) -> VerdictReport {
    let mut report = VerdictReport::new(theorem, Verdict::Inconclusive, inequality);
    report.truncation = terms.len();
    let mut partial = Vec::with_capacity(terms.len());
    let mut acc = Compensated::new();
    for &t in terms {
        acc.add(t);
        partial.push(acc.value());
    }
    let total = partial.last().copied().unwrap_or(0.0);
    if total == 0.0 {
        report.verdict = Verdict::Compact;
        report.notes.push("all terms vanish".into());
        return report;
    }
    let m = terms.len();
    let before = partial[(m / 10).max(1) - 1];
    let increment = (total - before) / total;
    // dyadic ladder points in the last decade
    let ladder: Vec<usize> = (0..usize::BITS).map(|j| 1usize << j).take_while(|&p| p <= m).collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = ladder
        .iter()
        .filter(|&&p| p * 10 >= m && partial[p - 1] > 0.0)
        .map(|&p| ((p as f64).ln(), partial[p - 1].ln()))
        .unzip();
    let fit = fit_line(&xs, &ys);
    report.slope = fit.map(|f| f.slope);
    report.residual = fit.map(|f| f.residual);
    report.target_slope = Some(0.0);
    report.ratio_band = Some((before, total));
    report.notes.push(format!("last-decade relative increment {increment:.3e}"));
    if increment < FLAT_INCREMENT {
        report.verdict = Verdict::Compact;
        report.margin = FLAT_INCREMENT - increment;
    } else if let Some(s) = report.slope.filter(|s| *s >= TOL) {
        report.verdict = Verdict::Unbounded;
        report.margin = TOL - s;
    } else {
        report.margin = FLAT_INCREMENT - increment;
    }
    report
}

fn weighted_terms(g: &CoefficientSequence, first: usize, weight: impl Fn(usize, f64) -> f64) -> Vec<f64> {
    (first..=g.truncation()).map(|n| weight(n, g.coeff(n).norm())).collect()
}

/// `Σ n^{1-β} |b_n|² < ∞` (bounded and compact coincide).
pub fn summability_criterion(g: &CoefficientSequence, beta: f64) -> VerdictReport {
    summability_with_id(g, beta, "2.6")
}

fn summability_with_id(g: &CoefficientSequence, beta: f64, theorem: &str) -> VerdictReport {
    let terms = weighted_terms(g, 1, |n, b| (n as f64).powf(1.0 - beta) * b * b);
    series_test(theorem, format!("Σ n^(1-{beta}) |b_n|² < ∞"), &terms)
}

/// `Σ (n+1)^{2q-2} |b_n|^q < ∞`: necessary for `S^p → S^q` when `q ≤ 2`,
/// sufficient for compactness when `q ≥ 2`.
pub fn qnorm_criterion(g: &CoefficientSequence, q: f64) -> Result<VerdictReport> {
    if !(q >= 1.0) {
        return Err(Error::ParameterRange(format!("need q ≥ 1, got {q}")));
    }
    let terms = weighted_terms(g, 0, |n, b| ((n + 1) as f64).powf(2.0 * q - 2.0) * b.powf(q));
    let mut r = series_test("2.9", format!("Σ (n+1)^(2·{q}-2) |b_n|^{q} < ∞"), &terms);
    let converges = r.verdict == Verdict::Compact;
    let diverges = r.verdict == Verdict::Unbounded;
    r.notes.push(
        match (converges, diverges) {
            (true, _) => "series converges",
            (_, true) => "series diverges",
            _ => "series convergence undecided",
        }
        .into(),
    );
    r.verdict = if converges && q >= 2.0 {
        r.notes.push("q ≥ 2: convergence is sufficient for compactness".into());
        Verdict::Compact
    } else if diverges && q <= 2.0 {
        r.notes.push("q ≤ 2: convergence is necessary for boundedness".into());
        Verdict::Unbounded
    } else {
        r.notes.push("the condition licenses no conclusion in this direction for this q".into());
        Verdict::Inconclusive
    };
    Ok(r)
}

/// `∫_{a}^∞ x^{1-β} x^{2s} log^{2t}(x+1) dx`, or `None` if it diverges.
fn law_tail(s: f64, t: f64, beta: f64, a: f64) -> Result<Option<f64>> {
    let e = 1.0 - beta + 2.0 * s;
    let k = e + 1.0;
    if k.abs() <= 1e-12 {
        let m = 2.0 * t + 1.0;
        return Ok((m < 0.0).then(|| a.ln().powf(m) / -m));
    }
    if k > 0.0 {
        return Ok(None);
    }
    // x = a e^v
    let v_max = (45.0 / -k).min(5000.0);
    let opts = QuadOptions { abs_tol: 0.0, rel_tol: 1e-10, max_intervals: 4000 };
    let r = integrate(
        |v| {
            let x = a * v.exp();
            (k * v).exp() * a.powf(k) * (x + 1.0).ln().powf(2.0 * t)
        },
        0.0,
        v_max,
        opts,
    )?;
    Ok(Some(r.value))
}

/// Tails `T_N = Σ_{n ≥ N} n^{1-β} |b_n|²` on `N = 2^3..2^{n_max}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailSeries {
    pub points: Vec<(usize, f64)>,
    /// Coefficients summed explicitly; the rest is extrapolated.
    pub truncation: usize,
    pub notes: Vec<String>,
}

pub fn dirichlet_tails(g: &SymbolSpec, beta: f64, n_max: u32) -> Result<TailSeries> {
    if n_max < 6 {
        return Err(Error::ParameterRange(format!("need Nmax ≥ 6, got {n_max}")));
    }
    let m = 1usize << (n_max + 5).clamp(n_max + 1, 22);
    let b = g.expand(m)?;
    let terms: Vec<f64> = (1..=m).map(|n| (n as f64).powf(1.0 - beta) * b.coeff(n).norm_sqr()).collect();

    let mut notes = Vec::new();
    let beyond = match g.power_log_law() {
        Some((s, t)) => match law_tail(s, t, beta, m as f64 + 0.5)? {
            Some(v) => {
                notes.push(format!("tail beyond n={m} from the closed coefficient law: {v:.6e}"));
                v
            }
            None => return Err(Error::DivergentBase(format!("Σ n^(1-{beta})|b_n|² diverges"))),
        },
        None if g.is_polynomial() => 0.0,
        None => {
            let base = series_test("2.13", String::new(), &terms);
            if base.verdict == Verdict::Unbounded {
                return Err(Error::DivergentBase(format!("Σ n^(1-{beta})|b_n|² diverges")));
            }
            let (xs, ys): (Vec<f64>, Vec<f64>) = (m / 10..=m)
                .filter(|&n| terms[n - 1] > 0.0)
                .map(|n| ((n as f64).ln(), terms[n - 1].ln()))
                .unzip();
            match fit_line(&xs, &ys) {
                Some(f) if f.slope < -1.0 => {
                    let c = f.intercept.exp();
                    let v = c * (m as f64 + 0.5).powf(f.slope + 1.0) / -(f.slope + 1.0);
                    notes.push(format!("tail beyond n={m} from a power-law fit (slope {:.3}): {v:.3e}", f.slope));
                    v
                }
                Some(f) => {
                    return Err(Error::DivergentBase(format!(
                        "terms decay with slope {:.3} ≥ -1; tails cannot be estimated",
                        f.slope
                    )))
                }
                None => 0.0,
            }
        }
    };

    // suffix sums
    let mut suffix = vec![0.0; m + 2];
    let mut acc = Compensated::new();
    acc.add(beyond);
    for n in (1..=m).rev() {
        acc.add(terms[n - 1]);
        suffix[n] = acc.value();
    }

    let points = (FIRST_BLOCK..=n_max).map(|j| (1usize << j, suffix[1usize << j])).collect();
    Ok(TailSeries { points, truncation: m, notes })
}

/// `T_N log N` bounded along the dyadic ladder, see [`dirichlet_tails`].
pub fn dirichlet_tail_criterion(g: &SymbolSpec, beta: f64, n_max: u32) -> Result<VerdictReport> {
    let TailSeries { points, truncation: m, notes } = dirichlet_tails(g, beta, n_max)?;
    let ladder: Vec<(usize, f64)> = points.iter().map(|&(n, t)| (n, t * (n as f64).ln())).collect();
    let inequality = format!("T_N·log N bounded (tails of Σ n^(1-{beta})|b_n|²), N = 2^{FIRST_BLOCK}..2^{n_max}");
    let mut report = VerdictReport::new("2.13", Verdict::Inconclusive, inequality);
    report.truncation = m;
    report.tolerance = TOL_LOG;
    report.target_slope = Some(0.0);
    report.notes = notes;
    if ladder.iter().all(|(_, v)| *v == 0.0) {
        report.theorem = "2.14".into();
        report.verdict = Verdict::Compact;
        report.notes.push("tails vanish".into());
        return Ok(report);
    }
    report.ratio_band = band(ladder.iter().map(|p| p.1));
    let (xs, ys): (Vec<f64>, Vec<f64>) = ladder
        .iter()
        .filter(|p| p.1 > 0.0)
        .map(|&(n, v)| ((n as f64).ln().ln(), v.ln()))
        .unzip();
    let Some(fit) = fit_line(&xs, &ys) else {
        return Ok(report);
    };
    report.slope = Some(fit.slope);
    report.residual = Some(fit.residual);
    report.notes.push("slope is d log(T_N log N) / d log log N".into());
    report.margin = TOL_LOG - fit.slope;
    report.verdict = if fit.slope > TOL_LOG {
        Verdict::Unbounded
    } else if fit.slope < -TOL_LOG {
        report.theorem = "2.14".into();
        report.margin = -TOL_LOG - fit.slope;
        Verdict::Compact
    } else {
        Verdict::Bounded
    };
    Ok(report)
}

/// Target growth law `N^s log^t N` for a partial sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartialSumLaw {
    pub s: f64,
    pub t: f64,
}

/// Two-parameter fit of `log Q_N` against `(log N, log log N)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LawFit {
    pub s: f64,
    pub t: f64,
    pub residual: f64,
    pub holds: bool,
    /// Band of `Q_N / (N^s0 log^t0 N)` over the ladder.
    pub ratio_band: (f64, f64),
    /// Distance to the threshold that decided `holds`.
    pub margin: f64,
}

/// Decide `Q_N = O(N^{s0} log^{t0} N)` from ladder values.
pub fn law_fit(points: &[(usize, f64)], law: PartialSumLaw) -> LawFit {
    let ratio = |n: usize, q: f64| {
        let nf = n as f64;
        q / (nf.powf(law.s) * nf.ln().powf(law.t))
    };
    let ratio_band = band(points.iter().map(|&(n, q)| ratio(n, q))).unwrap_or((0.0, 0.0));
    if points.iter().all(|p| p.1 == 0.0) {
        return LawFit { s: 0.0, t: 0.0, residual: 0.0, holds: true, ratio_band, margin: 0.0 };
    }
    let pos: Vec<&(usize, f64)> = points.iter().filter(|p| p.1 > 0.0).collect();
    let x1: Vec<f64> = pos.iter().map(|p| (p.0 as f64).ln()).collect();
    let x2: Vec<f64> = x1.iter().map(|x| x.ln()).collect();
    let ys: Vec<f64> = pos.iter().map(|p| p.1.ln()).collect();
    let Some(fit) = fit_plane(&x1, &x2, &ys) else {
        return LawFit { s: f64::NAN, t: f64::NAN, residual: f64::NAN, holds: false, ratio_band, margin: 0.0 };
    };
    let ds = fit.s - law.s;
    let (holds, margin) = if ds > TOL {
        (false, TOL - ds)
    } else if ds < -TOL {
        (true, -TOL - ds)
    } else {
        let m = law.t + TOL_LOG - fit.t;
        (m >= 0.0, m)
    };
    LawFit { s: fit.s, t: fit.t, residual: fit.residual, holds, ratio_band, margin }
}

fn dyadic_ladder(max_n: usize) -> Vec<usize> {
    (FIRST_BLOCK..usize::BITS).map(|j| 1usize << j).take_while(|&n| n <= max_n).collect()
}

/// `Q_N = Σ_{n=1}^{N} w(n) a_n` on the dyadic ladder.
fn weighted_partial_sums(a: &CoefficientSequence, w: impl Fn(usize) -> f64) -> Vec<(usize, f64)> {
    let ladder = dyadic_ladder(a.truncation());
    let mut out = Vec::with_capacity(ladder.len());
    let mut acc = Compensated::new();
    let mut n = 1;
    for &big_n in &ladder {
        while n <= big_n {
            acc.add(w(n) * a.coeff(n).re);
            n += 1;
        }
        out.push((big_n, acc.value()));
    }
    out
}

fn require_nonnegative(a: &CoefficientSequence) -> Result<()> {
    for (n, c) in a.coeffs().iter().enumerate() {
        if c.im != 0.0 || c.re < 0.0 {
            return Err(Error::NegativeCoefficient { index: n, value: c.re });
        }
    }
    Ok(())
}

/// `Σ_{n ≤ N} n b_n = O(N^s log^t N)` for nonnegative `b`.
pub fn partial_sum_law_criterion(g: &CoefficientSequence, law: PartialSumLaw, theorem: &str) -> Result<VerdictReport> {
    require_nonnegative(g)?;
    let points = weighted_partial_sums(g, |n| n as f64);
    if points.len() < 3 {
        return Err(Error::ParameterRange("need coefficients up to at least n = 32".into()));
    }
    let fit = law_fit(&points, law);
    let inequality = format!("Σ_(n≤N) n·b_n = O(N^{} log^{} N)", law.s, law.t);
    let mut r = VerdictReport::new(theorem, if fit.holds { Verdict::Bounded } else { Verdict::Unbounded }, inequality);
    r.slope = Some(fit.s);
    r.target_slope = Some(law.s);
    r.ratio_band = Some(fit.ratio_band);
    r.truncation = points.last().map_or(0, |p| p.0);
    r.margin = fit.margin;
    r.residual = Some(fit.residual);
    r.notes.push(format!("fitted log exponent t = {:.4} (target {}, tolerance {TOL_LOG})", fit.t, law.t));
    Ok(r)
}

/// Membership in `B_{log^α}` through `Σ n a_n = O(N log^α(N+1))`.
pub fn blochlog_partial_sum_criterion(f: &CoefficientSequence, alpha: f64) -> Result<VerdictReport> {
    partial_sum_law_criterion(f, PartialSumLaw { s: 1.0, t: alpha }, "4.3")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub first: LawFit,
    pub second: LawFit,
    /// Both conditions hold or both fail.
    pub consistent: bool,
}

fn equivalence(first: LawFit, second: LawFit) -> EquivalenceReport {
    let consistent = first.holds == second.holds;
    EquivalenceReport { first, second, consistent }
}

/// `Σ a_n log^α(n+1) = O(N log^β N)` against `Σ a_n = O(N log^{β-α} N)`.
pub fn equivalence_check_lemma44(a: &CoefficientSequence, alpha: f64, beta: f64, n_max: u32) -> Result<EquivalenceReport> {
    require_nonnegative(a)?;
    let a = a.resized((1usize << n_max).min(a.truncation()));
    let lhs = weighted_partial_sums(&a, |n| ((n + 1) as f64).ln().powf(alpha));
    let rhs = weighted_partial_sums(&a, |_| 1.0);
    Ok(equivalence(
        law_fit(&lhs, PartialSumLaw { s: 1.0, t: beta }),
        law_fit(&rhs, PartialSumLaw { s: 1.0, t: beta - alpha }),
    ))
}

/// `Σ n^s a_n = O(N^t)` against `Σ a_n = O(N^{t-s})`.
pub fn equivalence_check_lemma49(a: &CoefficientSequence, s: f64, t: f64, n_max: u32) -> Result<EquivalenceReport> {
    require_nonnegative(a)?;
    let a = a.resized((1usize << n_max).min(a.truncation()));
    let lhs = weighted_partial_sums(&a, |n| (n as f64).powf(s));
    let rhs = weighted_partial_sums(&a, |_| 1.0);
    Ok(equivalence(
        law_fit(&lhs, PartialSumLaw { s: t, t: 0.0 }),
        law_fit(&rhs, PartialSumLaw { s: t - s, t: 0.0 }),
    ))
}

/// Resource limits for [`verdict`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerdictBudget {
    /// Largest dyadic block for the `D²_α → D²_β` route.
    pub dyadic_max: u32,
    /// Series and partial sums use `2^sum_depth` coefficients.
    pub sum_depth: u32,
    /// Largest `N = 2^j` in the Dirichlet-tail ladder.
    pub tail_max: u32,
    /// Radial ladder for symbol membership tests.
    pub radial: Budget,
}

impl Default for VerdictBudget {
    fn default() -> Self {
        Self { dyadic_max: 14, sum_depth: 20, tail_max: 17, radial: Budget::default() }
    }
}

impl std::str::FromStr for VerdictBudget {
    type Err = Error;
    /// `key=value` pairs separated by commas: `dyadic`, `sum`, `tail`, `radial`.
    fn from_str(s: &str) -> Result<Self> {
        let mut b = VerdictBudget::default();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("budget entry {part:?} is not key=value")))?;
            let v: u32 = v.trim().parse().map_err(|_| Error::Parse(format!("budget value {v:?}")))?;
            match k.trim() {
                "dyadic" => b.dyadic_max = v,
                "sum" => b.sum_depth = v,
                "tail" => b.tail_max = v,
                "radial" => b.radial.depth = v,
                other => return Err(Error::Parse(format!("unknown budget key {other:?}"))),
            }
        }
        Ok(b)
    }
}

fn is_bloch(s: &SpaceSpec) -> bool {
    matches!(*s, SpaceSpec::BlochBeta(b) if b == 1.0) || matches!(*s, SpaceSpec::BlochLog(a) if a == 0.0)
}

fn membership_route(g: &SymbolSpec, space: &SpaceSpec, theorem: &str, budget: &VerdictBudget) -> Result<VerdictReport> {
    let trace = membership_evidence(g, space, &budget.radial)?;
    let inequality = format!("g ∈ {space}: weighted mean trace bounded along r = 1 - 2^-j");
    let mut r = VerdictReport::new(theorem, Verdict::Inconclusive, inequality);
    r.truncation = trace.truncation;
    r.target_slope = Some(0.0);
    r.ratio_band = band(trace.points.iter().map(|p| p.1));
    r.slope = trace.slope();
    r.residual = trace.fit.map(|f| f.residual);
    if !trace.is_conclusive() {
        r.notes.push(format!("{:?}", trace.status));
        return Ok(r);
    }
    if let Some(s) = r.slope {
        r.margin = TOL - s;
        r.verdict = if s > TOL { Verdict::Unbounded } else { Verdict::Bounded };
    }
    Ok(r)
}

/// Route `(source, target)` to the criterion that characterizes it.
pub fn verdict(g: &SymbolSpec, source: &SpaceSpec, target: &SpaceSpec, budget: &VerdictBudget) -> Result<VerdictReport> {
    use SpaceSpec::*;
    source.validate()?;
    target.validate()?;
    let sum_len = 1usize << budget.sum_depth;
    let law = |s: f64, t: f64, theorem: &str| -> Result<VerdictReport> {
        let b = g.expand(sum_len)?;
        partial_sum_law_criterion(&b, PartialSumLaw { s, t }, theorem)
    };
    match (*source, *target) {
        (DirichletAlpha(a), DirichletAlpha(b)) => {
            if a > 0.0 && a < 2.0 {
                let coeffs = g.expand(1usize << (budget.dyadic_max + 1))?;
                dyadic_criterion(&coeffs, a, b, budget.dyadic_max)
            } else if a == 0.0 {
                dirichlet_tail_criterion(g, b, budget.tail_max)
            } else if a < 0.0 {
                Ok(summability_with_id(&g.expand(sum_len)?, b, "2.7"))
            } else {
                Err(Error::Hypothesis(format!("H_g is not defined on D2:{a} for α ≥ 2")))
            }
        }
        (Wiener, DirichletAlpha(b)) => Ok(summability_with_id(&g.expand(sum_len)?, b, "2.6")),
        (DerivativeHardy(_), DirichletAlpha(b)) if b == -1.0 => {
            Ok(summability_with_id(&g.expand(sum_len)?, -1.0, "2.8"))
        }
        (DerivativeHardy(_), DerivativeHardy(q)) if q == 2.0 => {
            Ok(summability_with_id(&g.expand(sum_len)?, -1.0, "2.8"))
        }
        (DerivativeHardy(_), DerivativeHardy(q)) => qnorm_criterion(&g.expand(sum_len)?, q),
        (s, DirichletAlpha(b)) if is_bloch(&s) => {
            let c = g.expand(sum_len)?;
            let terms = weighted_terms(&c, 0, |n, x| {
                let m = (n + 1) as f64;
                m.powf(1.0 - b) * x * x * m.ln().powi(2)
            });
            Ok(series_test("2.10", format!("Σ (n+1)^(1-{b}) |b_n|² log²(n+1) < ∞"), &terms))
        }
        (Wiener, Wiener) => {
            let c = g.expand(sum_len)?;
            let terms = weighted_terms(&c, 0, |_, x| x);
            Ok(series_test("2.11", "Σ |b_n| < ∞".into(), &terms))
        }
        (Hinf, Xp(p)) => membership_route(g, &Xp(p), "3.1", budget),
        (Hinf, t) if is_bloch(&t) => membership_route(g, &BlochBeta(1.0), "3.5", budget),
        (s, t) if is_bloch(&s) && is_bloch(&t) => law(1.0, -1.0, "4.6"),
        (BlochLog(a), BlochLog(b)) if b == a + 1.0 => {
            if a > -1.0 {
                law(1.0, 0.0, "4.1")
            } else {
                Err(Error::Hypothesis(format!("the Blog route needs α > -1, got {a}")))
            }
        }
        (Korenblum(a), Korenblum(b)) => {
            if a > 0.0 && a < 1.0 && b > 0.0 {
                law(1.0 + b - a, 0.0, "4.10")
            } else {
                Err(Error::Hypothesis(format!("the Korenblum route needs 0 < α < 1 and β > 0, got α={a}, β={b}")))
            }
        }
        (s, t) => Err(Error::NoTheorem { from: s.to_string(), to: t.to_string() }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn expand(s: &str, n: usize) -> CoefficientSequence {
        s.parse::<SymbolSpec>().unwrap().expand(n).unwrap()
    }

    #[test]
    fn log_blocks_between_quarter_and_one() {
        let g = expand("log", 1 << 12);
        let bs = BlockSeries::new(&g, 10).unwrap();
        for (n, s) in bs.sums.iter().enumerate() {
            // Σ_{m=2^N+1}^{2^{N+1}} m^{-2}
            let oracle: f64 = ((1usize << n) + 1..=(1usize << (n + 1))).map(|m| 1.0 / (m * m) as f64).sum();
            assert!((s - oracle).abs() < 1e-14 * oracle);
            let scaled = s * (n as f64).exp2();
            assert!((0.25..=1.0).contains(&scaled));
        }
    }

    #[test]
    fn dyadic_examples() {
        let g = expand("log", 1 << 15);
        let r = dyadic_criterion(&g, 0.5, 0.5, 14).unwrap();
        assert_eq!(r.verdict, Verdict::Bounded);
        assert_eq!(r.theorem, "2.2");
        let r = dyadic_criterion(&g, 0.5, 0.4, 14).unwrap();
        assert_eq!(r.verdict, Verdict::Unbounded);

        let ones = expand("power:0", 1 << 15);
        let r = dyadic_criterion(&ones, 0.5, 2.5, 14).unwrap();
        assert!(r.verdict.is_bounded());
        assert_eq!(r.slope, Some(1.0));
        let r = dyadic_criterion(&ones, 0.5, 2.3, 14).unwrap();
        assert_eq!(r.verdict, Verdict::Unbounded);

        let z = expand("poly:0,1", 1 << 15);
        assert_eq!(dyadic_criterion(&z, 1.0, 1.0, 14).unwrap().verdict, Verdict::Compact);
        assert!(matches!(dyadic_criterion(&g, 2.0, 1.0, 14), Err(Error::Hypothesis(_))));
    }

    #[test]
    fn little_oh_symbol_is_compact() {
        let g = expand("powlog:-1:-1", 1 << 15);
        assert_eq!(dyadic_criterion(&g, 0.5, 0.5, 14).unwrap().verdict, Verdict::Compact);
    }

    #[test]
    fn summability_examples() {
        let n = 1 << 20;
        assert_eq!(summability_criterion(&expand("log", n), -1.0).verdict, Verdict::Unbounded);
        assert_eq!(summability_criterion(&expand("power:-2.1", n), -1.0).verdict, Verdict::Compact);
        assert_eq!(summability_criterion(&expand("power:0", n), 3.0).verdict, Verdict::Compact);
    }

    #[test]
    fn qnorm_examples() {
        let n = 1 << 20;
        let r = qnorm_criterion(&expand("power:-2.1", n), 2.0).unwrap();
        assert_eq!(r.verdict, Verdict::Compact);
        let r = qnorm_criterion(&expand("poly:1,2,3", 1 << 10), 1.0).unwrap();
        assert!(r.notes.iter().any(|s| s == "series converges"));
        let r = qnorm_criterion(&expand("log", n), 2.0).unwrap();
        assert_eq!(r.verdict, Verdict::Unbounded);
    }

    #[test]
    fn tail_models() {
        let two: SymbolSpec = "powlog:-0.5:-1".parse().unwrap();
        let three: SymbolSpec = "powlog:-0.5:-1.5".parse().unwrap();
        let r2 = dirichlet_tail_criterion(&two, 1.0, 17).unwrap();
        let r3 = dirichlet_tail_criterion(&three, 1.0, 17).unwrap();
        assert_eq!(r2.verdict, Verdict::Bounded, "{r2:?}");
        assert_eq!(r3.verdict, Verdict::Compact, "{r3:?}");
        let p: SymbolSpec = "poly:1,2".parse().unwrap();
        assert_eq!(dirichlet_tail_criterion(&p, 1.0, 10).unwrap().verdict, Verdict::Compact);
    }

    #[test]
    fn law_tail_closed_forms() {
        // ∫_a^∞ x^{-2} dx = 1/a
        let v = law_tail(-1.0, 0.0, 1.0, 10.0).unwrap().unwrap();
        assert!((v - 0.1).abs() < 1e-11);
        assert!(law_tail(-0.5, 0.0, 1.0, 10.0).unwrap().is_none());
        assert!(law_tail(0.0, 0.0, 1.0, 10.0).unwrap().is_none());
    }

    #[test]
    fn partial_sum_examples() {
        let n = 1 << 20;
        let r = blochlog_partial_sum_criterion(&expand("log", n), 0.0).unwrap();
        assert_eq!(r.verdict, Verdict::Bounded);
        assert!((r.slope.unwrap() - 1.0).abs() < 1e-9);
        let r = partial_sum_law_criterion(&expand("powlog:-1:-1", n), PartialSumLaw { s: 1.0, t: -1.0 }, "4.6").unwrap();
        assert_eq!(r.verdict, Verdict::Bounded, "{r:?}");
        let r = partial_sum_law_criterion(&expand("log", n), PartialSumLaw { s: 1.0, t: -1.0 }, "4.6").unwrap();
        assert_eq!(r.verdict, Verdict::Unbounded);
        let neg = expand("poly:1,-1", 40);
        assert!(matches!(blochlog_partial_sum_criterion(&neg, 0.0), Err(Error::NegativeCoefficient { index: 1, .. })));
    }

    #[test]
    fn equivalence_examples() {
        let ones = expand("power:0", 1 << 16);
        let r = equivalence_check_lemma44(&ones, 1.0, 1.0, 16).unwrap();
        assert!(r.consistent && r.first.holds && r.second.holds);
        let zero = expand("poly:0", 1 << 10);
        let r = equivalence_check_lemma44(&zero, 1.0, 1.0, 10).unwrap();
        assert!(r.consistent && r.first.holds);
        let logs = expand("powlog:0:1", 1 << 16);
        let r = equivalence_check_lemma49(&logs, 0.0, 1.0, 16).unwrap();
        assert!(r.consistent && !r.first.holds && !r.second.holds, "{r:?}");
    }

    #[test]
    fn dispatcher_examples() {
        let b = VerdictBudget::default();
        let log = SymbolSpec::Log;
        let r = verdict(&log, &SpaceSpec::DirichletAlpha(0.5), &SpaceSpec::DirichletAlpha(0.5), &b).unwrap();
        assert_eq!((r.verdict, r.theorem.as_str()), (Verdict::Bounded, "2.2"));
        let r = verdict(&log, &SpaceSpec::DirichletAlpha(0.5), &SpaceSpec::DirichletAlpha(0.4), &b).unwrap();
        assert_eq!(r.verdict, Verdict::Unbounded);
        let r = verdict(&log, &SpaceSpec::Korenblum(0.5), &SpaceSpec::Korenblum(0.5), &b).unwrap();
        assert_eq!((r.verdict, r.theorem.as_str()), (Verdict::Bounded, "4.10"));
        let e = verdict(&log, &SpaceSpec::Hinf, &SpaceSpec::Wiener, &b);
        assert!(matches!(e, Err(Error::NoTheorem { .. })));
        let r = verdict(&log, &SpaceSpec::Hinf, &SpaceSpec::BlochBeta(1.0), &b).unwrap();
        assert_eq!((r.verdict, r.theorem.as_str()), (Verdict::Bounded, "3.5"));
    }

    #[test]
    fn report_json_round_trip() {
        let g = expand("log", 1 << 15);
        let r = dyadic_criterion(&g, 0.5, 0.5, 14).unwrap();
        let s = serde_json::to_string(&r).unwrap();
        let back: VerdictReport = serde_json::from_str(&s).unwrap();
        assert_eq!(serde_json::to_string(&back).unwrap(), s);
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        for key in ["theorem", "verdict", "slope", "target_slope", "ratio_band", "truncation", "tolerance"] {
            assert!(v.get(key).is_some(), "{key}");
        }
    }
}
