//! Truncated Taylor coefficient sequences, symbol generators, and the
//! function-space norms used throughout the crate.
//!
//! A function `f(z) = Σ a_n z^n` is represented by its first `N + 1`
//! coefficients. Sum-type norms (Dirichlet-type, Wiener, Hardy–Littlewood)
//! are exact truncated sums; sup-type seminorms are evaluated on an explicit
//! radial grid and are therefore lower bounds.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{fit_line, sum_f64, Compensated, LineFit};

/// First `N + 1` Taylor coefficients `a_0 .. a_N` of an analytic function.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSequence {
    coeffs: Vec<Complex64>,
}

impl CoefficientSequence {
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidCoefficients("empty sequence".into()));
        }
        if let Some(i) = coeffs.iter().position(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidCoefficients(format!(
                "non-finite coefficient at index {i}"
            )));
        }
        Ok(Self { coeffs })
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// The constant function `c`.
    pub fn constant(c: f64) -> Self {
        Self { coeffs: vec![Complex64::new(c, 0.0)] }
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Index of the last stored coefficient.
    pub fn truncation(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `a_n`, zero past the truncation.
    pub fn coeff(&self, n: usize) -> Complex64 {
        self.coeffs.get(n).copied().unwrap_or_default()
    }

    /// Same function, truncated or zero-padded to index `n`.
    pub fn resized(&self, n: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(n + 1, Complex64::default());
        Self { coeffs }
    }

    /// Partial sum `Σ_{n≤N} a_n z^n` by Horner's rule.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::default(), |acc, &c| acc * z + c)
    }

    /// Derivative of the partial sum at `z`.
    pub fn eval_derivative(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(Complex64::default(), |acc, (n, &c)| acc * z + c * n as f64)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self { coeffs: self.coeffs.iter().map(|&a| a * c).collect() }
    }

    /// Coefficientwise sum; the shorter sequence is zero-padded.
    pub fn add(&self, other: &Self) -> Self {
        let n = self.len().max(other.len());
        Self {
            coeffs: (0..n).map(|k| self.coeff(k) + other.coeff(k)).collect(),
        }
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        self.coeffs.iter().map(|c| c.norm()).collect()
    }

    /// True when every coefficient is real and `≥ 0`.
    pub fn is_nonnegative_real(&self) -> bool {
        self.coeffs.iter().all(|c| c.im == 0.0 && c.re >= 0.0)
    }

    /// First negative (or non-real) coefficient, if any.
    pub fn first_negative(&self) -> Option<(usize, f64)> {
        self.coeffs
            .iter()
            .position(|c| c.im != 0.0 || c.re < 0.0)
            .map(|i| (i, if self.coeffs[i].im != 0.0 { -self.coeffs[i].norm() } else { self.coeffs[i].re }))
    }
}

/// Named generator for an operator symbol or a test function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SymbolSpec {
    /// `log 1/(1-z)`: `b_n = 1/n`, `b_0 = 0`.
    Log,
    /// `b_n = n^s` for `n ≥ 1`, `b_0 = 0`.
    Power(f64),
    /// `b_n = n^s log^t(n+1)` for `n ≥ 1`, `b_0 = 0`.
    PowLog(f64, f64),
    /// `log^{α+1}(e/(1-z))`.
    LogPow(f64),
    /// `(1-z)^{-α}`.
    Cayley(f64),
    /// `log log(e²/(1-z))`.
    LogLog,
    Poly(Vec<Complex64>),
    File(PathBuf),
}

impl SymbolSpec {
    /// First `n + 1` Taylor coefficients of the named function.
    pub fn expand(&self, n: usize) -> Result<CoefficientSequence> {
        let len = n + 1;
        let coeffs: Vec<Complex64> = match self {
            SymbolSpec::Log => real((0..len).map(|k| if k == 0 { 0.0 } else { 1.0 / k as f64 })),
            SymbolSpec::Power(s) => {
                check_finite("power exponent", *s)?;
                real((0..len).map(|k| if k == 0 { 0.0 } else { (k as f64).powf(*s) }))
            }
            SymbolSpec::PowLog(s, t) => {
                check_finite("power exponent", *s)?;
                check_finite("log exponent", *t)?;
                real((0..len).map(|k| {
                    if k == 0 {
                        0.0
                    } else {
                        let kf = k as f64;
                        kf.powf(*s) * (kf + 1.0).ln().powf(*t)
                    }
                }))
            }
            SymbolSpec::LogPow(alpha) => {
                check_finite("logpow alpha", *alpha)?;
                real(log_power_series(alpha + 1.0, len).into_iter())
            }
            SymbolSpec::Cayley(alpha) => {
                check_finite("cayley alpha", *alpha)?;
                real(binomial_series(*alpha, len).into_iter())
            }
            SymbolSpec::LogLog => real(log_log_series(len).into_iter()),
            SymbolSpec::Poly(c) => {
                if c.is_empty() {
                    return Err(Error::Parse("poly needs at least one coefficient".into()));
                }
                let mut v = c.clone();
                v.resize(len, Complex64::default());
                v
            }
            SymbolSpec::File(path) => {
                let text = std::fs::read_to_string(path)?;
                let mut v = parse_coefficient_lines(&text)?;
                v.resize(len, Complex64::default());
                v
            }
        };
        CoefficientSequence::new(coeffs)
    }

    /// True when the expansion has finitely many nonzero terms.
    pub fn is_polynomial(&self) -> bool {
        matches!(self, SymbolSpec::Poly(_) | SymbolSpec::File(_))
    }

    /// `(s, t)` with `|b_n| = n^s log^t(n+1)` exactly for `n ≥ 1`, when the
    /// symbol has that closed form.
    pub fn power_log_law(&self) -> Option<(f64, f64)> {
        match *self {
            SymbolSpec::Log => Some((-1.0, 0.0)),
            SymbolSpec::Power(s) => Some((s, 0.0)),
            SymbolSpec::PowLog(s, t) => Some((s, t)),
            _ => None,
        }
    }
}

fn real<I: Iterator<Item = f64>>(it: I) -> Vec<Complex64> {
    it.map(|x| Complex64::new(x, 0.0)).collect()
}

fn check_finite(what: &str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::ParameterRange(format!("{what} must be finite, got {x}")))
    }
}

/// Coefficients of `(1 + L(z))^γ` with `L(z) = log 1/(1-z) = Σ z^k/k`.
///
/// Uses the power recurrence `n P_n = Σ_{k=1}^{n} ((γ+1)k - n) h_k P_{n-k}`
/// for `P = h^γ`, `h_0 = 1`, `h_k = 1/k`.
fn log_power_series(gamma: f64, len: usize) -> Vec<f64> {
    let mut p = vec![0.0; len];
    p[0] = 1.0;
    for n in 1..len {
        let nf = n as f64;
        let mut acc = Compensated::new();
        for k in 1..=n {
            let kf = k as f64;
            acc.add(((gamma + 1.0) - nf / kf) * p[n - k]);
        }
        p[n] = acc.value() / nf;
    }
    p
}

/// Coefficients of `(1-z)^{-α}`: `c_n = c_{n-1} (n - 1 + α) / n`.
fn binomial_series(alpha: f64, len: usize) -> Vec<f64> {
    let mut c = vec![0.0; len];
    c[0] = 1.0;
    for n in 1..len {
        c[n] = c[n - 1] * ((n - 1) as f64 + alpha) / n as f64;
    }
    c
}

/// Coefficients of `log(2 + L(z)) = log log(e²/(1-z))`.
///
/// With `h = 2 + L`, `P = log h` satisfies `n P_n h_0 = n h_n - Σ_{k=1}^{n-1} k P_k h_{n-k}`.
fn log_log_series(len: usize) -> Vec<f64> {
    let mut p = vec![0.0; len];
    p[0] = std::f64::consts::LN_2;
    for n in 1..len {
        let mut acc = Compensated::new();
        acc.add(1.0); // n * h_n with h_n = 1/n
        for k in 1..n {
            acc.add(-(k as f64) * p[k] / (n - k) as f64);
        }
        p[n] = acc.value() / (2.0 * n as f64);
    }
    p
}

/// Parse one coefficient per line as `re[,im]`; blank lines and `#`
/// comments are skipped.
pub fn parse_coefficient_lines(text: &str) -> Result<Vec<Complex64>> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split(',').map(str::trim);
        let re = parse_f64(parts.next().unwrap_or(""), lineno + 1)?;
        let im = match parts.next() {
            Some(s) => parse_f64(s, lineno + 1)?,
            None => 0.0,
        };
        if parts.next().is_some() {
            return Err(Error::Parse(format!("line {}: expected `re[,im]`", lineno + 1)));
        }
        out.push(Complex64::new(re, im));
    }
    if out.is_empty() {
        return Err(Error::Parse("coefficient file has no entries".into()));
    }
    Ok(out)
}

fn parse_f64(s: &str, line: usize) -> Result<f64> {
    let x: f64 = s
        .parse()
        .map_err(|_| Error::Parse(format!("line {line}: `{s}` is not a number")))?;
    if !x.is_finite() {
        return Err(Error::Parse(format!("line {line}: non-finite value")));
    }
    Ok(x)
}

fn parse_param(kind: &str, s: &str) -> Result<f64> {
    let x: f64 = s
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("`{kind}` parameter `{s}` is not a number")))?;
    if !x.is_finite() {
        return Err(Error::ParameterRange(format!("`{kind}` parameter must be finite")));
    }
    Ok(x)
}

impl FromStr for SymbolSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (kind, arg) = match s.split_once(':') {
            Some((k, a)) => (k, Some(a)),
            None => (s, None),
        };
        let need = || arg.ok_or_else(|| Error::Parse(format!("`{kind}` needs a parameter")));
        match kind {
            "log" if arg.is_none() => Ok(SymbolSpec::Log),
            "loglog" if arg.is_none() => Ok(SymbolSpec::LogLog),
            "power" => Ok(SymbolSpec::Power(parse_param(kind, need()?)?)),
            "logpow" => Ok(SymbolSpec::LogPow(parse_param(kind, need()?)?)),
            "cayley" => Ok(SymbolSpec::Cayley(parse_param(kind, need()?)?)),
            "powlog" => {
                let a = need()?;
                let (s, t) = a
                    .split_once(':')
                    .ok_or_else(|| Error::Parse("`powlog` expects `powlog:<s>:<t>`".into()))?;
                Ok(SymbolSpec::PowLog(parse_param(kind, s)?, parse_param(kind, t)?))
            }
            "poly" => {
                let a = need()?;
                let coeffs = a
                    .split(',')
                    .map(|c| parse_param(kind, c).map(|x| Complex64::new(x, 0.0)))
                    .collect::<Result<Vec<_>>>()?;
                Ok(SymbolSpec::Poly(coeffs))
            }
            "file" => Ok(SymbolSpec::File(PathBuf::from(need()?))),
            "log" | "loglog" => Err(Error::Parse(format!("`{kind}` takes no parameter"))),
            other => Err(Error::UnknownKind(other.to_string())),
        }
    }
}

impl fmt::Display for SymbolSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymbolSpec::Log => write!(f, "log"),
            SymbolSpec::LogLog => write!(f, "loglog"),
            SymbolSpec::Power(s) => write!(f, "power:{s}"),
            SymbolSpec::PowLog(s, t) => write!(f, "powlog:{s}:{t}"),
            SymbolSpec::LogPow(a) => write!(f, "logpow:{a}"),
            SymbolSpec::Cayley(a) => write!(f, "cayley:{a}"),
            SymbolSpec::Poly(c) => {
                let parts: Vec<String> = c.iter().map(|z| format!("{}", z.re)).collect();
                write!(f, "poly:{}", parts.join(","))
            }
            SymbolSpec::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

/// A function space together with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SpaceSpec {
    /// `D²_α`: `|b_0|² + Σ n^{1-α} |b_n|²`.
    DirichletAlpha(f64),
    /// Analytic Wiener algebra.
    Wiener,
    /// `HL(p)`: `Σ (n+1)^{p-2} |a_n|^p`.
    HardyLittlewood(f64),
    /// Bounded analytic functions.
    Hinf,
    /// Korenblum space `H^∞_α`.
    Korenblum(f64),
    /// Logarithmically weighted Bloch space `B_{log^α}`.
    BlochLog(f64),
    /// Bloch-type space `B^β`.
    BlochBeta(f64),
    /// Mean Lipschitz space `Λ^p_α`.
    MeanLipschitz { p: f64, alpha: f64 },
    /// `X_p`: `Λ^p_{1/p}` for `p > 1`, `H^{1,∞,1}_2` for `p = 1`.
    Xp(f64),
    /// Derivative Hardy space `S^p`.
    DerivativeHardy(f64),
}

impl SpaceSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::ParameterRange(msg));
        match *self {
            SpaceSpec::DirichletAlpha(a) if !a.is_finite() => bad(format!("D2 alpha {a}")),
            SpaceSpec::HardyLittlewood(p) if !(p >= 1.0 && p.is_finite()) => {
                bad(format!("HL needs p >= 1, got {p}"))
            }
            SpaceSpec::Korenblum(a) if !(a > 0.0 && a.is_finite()) => {
                bad(format!("Korenblum needs alpha > 0, got {a}"))
            }
            SpaceSpec::BlochLog(a) if !a.is_finite() => bad(format!("Blog alpha {a}")),
            SpaceSpec::BlochBeta(b) if !(b > 0.0 && b.is_finite()) => {
                bad(format!("Bloch-type needs beta > 0, got {b}"))
            }
            SpaceSpec::MeanLipschitz { p, alpha }
                if !(p >= 1.0 && p.is_finite() && alpha > 0.0 && alpha <= 1.0) =>
            {
                bad(format!("Lip needs p >= 1 and 0 < alpha <= 1, got p={p}, alpha={alpha}"))
            }
            SpaceSpec::Xp(p) if !(p >= 1.0 && p.is_finite()) => bad(format!("X needs p >= 1, got {p}")),
            SpaceSpec::DerivativeHardy(p) if !(p >= 1.0 && p.is_finite()) => {
                bad(format!("S needs p >= 1, got {p}"))
            }
            _ => Ok(()),
        }
    }
}

impl FromStr for SpaceSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let num = |i: usize| -> Result<f64> {
            let raw = parts
                .get(i)
                .ok_or_else(|| Error::Parse(format!("space `{s}` is missing a parameter")))?;
            parse_param(parts[0], raw)
        };
        let arity = |n: usize| -> Result<()> {
            if parts.len() == n {
                Ok(())
            } else {
                Err(Error::Parse(format!("space `{s}`: expected {} parameter(s)", n - 1)))
            }
        };
        let spec = match parts[0] {
            "D2" => {
                arity(2)?;
                SpaceSpec::DirichletAlpha(num(1)?)
            }
            "W" => {
                arity(1)?;
                SpaceSpec::Wiener
            }
            "HL" => {
                arity(2)?;
                SpaceSpec::HardyLittlewood(num(1)?)
            }
            "Hinf" if parts.len() == 1 => SpaceSpec::Hinf,
            "Hinf" => {
                arity(2)?;
                SpaceSpec::Korenblum(num(1)?)
            }
            "Blog" => {
                arity(2)?;
                SpaceSpec::BlochLog(num(1)?)
            }
            "B" if parts.len() == 1 => SpaceSpec::BlochBeta(1.0),
            "B" => {
                arity(2)?;
                SpaceSpec::BlochBeta(num(1)?)
            }
            "Lip" => {
                arity(3)?;
                SpaceSpec::MeanLipschitz { p: num(1)?, alpha: num(2)? }
            }
            "X" => {
                arity(2)?;
                SpaceSpec::Xp(num(1)?)
            }
            "S" => {
                arity(2)?;
                SpaceSpec::DerivativeHardy(num(1)?)
            }
            other => return Err(Error::Parse(format!("unknown space tag `{other}`"))),
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl fmt::Display for SpaceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            SpaceSpec::DirichletAlpha(a) => write!(f, "D2:{a}"),
            SpaceSpec::Wiener => write!(f, "W"),
            SpaceSpec::HardyLittlewood(p) => write!(f, "HL:{p}"),
            SpaceSpec::Hinf => write!(f, "Hinf"),
            SpaceSpec::Korenblum(a) => write!(f, "Hinf:{a}"),
            SpaceSpec::BlochLog(a) => write!(f, "Blog:{a}"),
            SpaceSpec::BlochBeta(b) => write!(f, "B:{b}"),
            SpaceSpec::MeanLipschitz { p, alpha } => write!(f, "Lip:{p}:{alpha}"),
            SpaceSpec::Xp(p) => write!(f, "X:{p}"),
            SpaceSpec::DerivativeHardy(p) => write!(f, "S:{p}"),
        }
    }
}

/// Weight `max(n,1)^{1-α}` of the `D²_α` norm; index 0 carries weight 1.
pub fn dirichlet_weight(n: usize, alpha: f64) -> f64 {
    if n == 0 {
        1.0
    } else {
        (n as f64).powf(1.0 - alpha)
    }
}

/// `(|b_0|² + Σ_{n≥1} n^{1-α} |b_n|²)^{1/2}` over the stored coefficients.
pub fn norm_dirichlet(f: &CoefficientSequence, alpha: f64) -> f64 {
    sum_f64(
        f.coeffs()
            .iter()
            .enumerate()
            .map(|(n, c)| dirichlet_weight(n, alpha) * c.norm_sqr()),
    )
    .sqrt()
}

pub fn norm_wiener(f: &CoefficientSequence) -> f64 {
    sum_f64(f.coeffs().iter().map(|c| c.norm()))
}

/// `(Σ (n+1)^{p-2} |a_n|^p)^{1/p}`.
pub fn norm_hl(f: &CoefficientSequence, p: f64) -> Result<f64> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::ParameterRange(format!("HL needs p >= 1, got {p}")));
    }
    let s = sum_f64(
        f.coeffs()
            .iter()
            .enumerate()
            .map(|(n, c)| ((n + 1) as f64).powf(p - 2.0) * c.norm().powf(p)),
    );
    Ok(s.powf(1.0 / p))
}

/// Radii (and angular resolution) on which sup-type seminorms are sampled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    pub radii: Vec<f64>,
    /// Number of equally spaced angles; ignored for nonnegative coefficients.
    pub angles: usize,
}

impl RadialGrid {
    /// `r_j = 1 - 2^{-j}` for `j = 1..=depth`.
    pub fn ladder(depth: u32) -> Self {
        Self {
            radii: (1..=depth).map(|j| ladder_radius(j)).collect(),
            angles: 256,
        }
    }

    pub fn check(&self) -> Result<()> {
        for &r in &self.radii {
            if !(0.0..1.0).contains(&r) {
                return Err(Error::GridRadius(r));
            }
        }
        Ok(())
    }
}

pub fn ladder_radius(j: u32) -> f64 {
    1.0 - (-(j as f64)).exp2()
}

/// Largest sampled value of a sup-type seminorm and where it occurred.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupEstimate {
    pub value: f64,
    pub radius: f64,
    pub theta: f64,
}

/// `sup_grid weight(r) · |h(r e^{iθ})|` where `h` is `f` or `f'`.
fn weighted_sup<W: Fn(f64) -> f64>(
    f: &CoefficientSequence,
    derivative: bool,
    grid: &RadialGrid,
    weight: W,
) -> Result<SupEstimate> {
    grid.check()?;
    let angles: Vec<f64> = if f.is_nonnegative_real() {
        vec![0.0]
    } else {
        let m = grid.angles.max(1);
        (0..m).map(|k| std::f64::consts::TAU * k as f64 / m as f64).collect()
    };
    let mut best = SupEstimate { value: 0.0, radius: 0.0, theta: 0.0 };
    for &r in &grid.radii {
        let w = weight(r);
        for &theta in &angles {
            let z = Complex64::from_polar(r, theta);
            let h = if derivative { f.eval_derivative(z) } else { f.eval(z) };
            let v = w * h.norm();
            if v > best.value {
                best = SupEstimate { value: v, radius: r, theta };
            }
        }
    }
    Ok(best)
}

/// `sup (1-|z|²)^α |f(z)|` on the grid.
pub fn seminorm_korenblum(f: &CoefficientSequence, alpha: f64, grid: &RadialGrid) -> Result<SupEstimate> {
    weighted_sup(f, false, grid, |r| (1.0 - r * r).powf(alpha))
}

/// `sup (1-|z|²) log^{-α}(e/(1-|z|²)) |f'(z)|` on the grid.
pub fn seminorm_blochlog(f: &CoefficientSequence, alpha: f64, grid: &RadialGrid) -> Result<SupEstimate> {
    weighted_sup(f, true, grid, |r| {
        let s = 1.0 - r * r;
        s * (1.0 - s.ln()).powf(-alpha)
    })
}

/// `sup (1-|z|²)^β |f'(z)|` on the grid.
pub fn seminorm_blochbeta(f: &CoefficientSequence, beta: f64, grid: &RadialGrid) -> Result<SupEstimate> {
    weighted_sup(f, true, grid, |r| (1.0 - r * r).powf(beta))
}

/// Extremal test functions from the boundedness arguments.
pub mod probes {
    use super::*;

    /// `(1-a)^{α/2} Σ (n+1)^{α-1} a^n z^n`, of `D²_α` norm `≍ 1`.
    pub fn dirichlet_probe(alpha: f64, a: f64, n: usize) -> Result<CoefficientSequence> {
        if !(0.0..1.0).contains(&a) {
            return Err(Error::ParameterRange(format!("probe radius a={a} not in [0,1)")));
        }
        let scale = (1.0 - a).powf(alpha / 2.0);
        CoefficientSequence::from_real(
            &(0..=n)
                .map(|k| scale * ((k + 1) as f64).powf(alpha - 1.0) * a.powi(k as i32))
                .collect::<Vec<_>>(),
        )
    }

    /// `(log 1/(1-b))^{-1/2} log 1/(1-bz)`, of Dirichlet norm `≍ 1`.
    pub fn dirichlet_log_probe(b: f64, n: usize) -> Result<CoefficientSequence> {
        if !(b > 0.0 && b < 1.0) {
            return Err(Error::ParameterRange(format!("probe point b={b} not in (0,1)")));
        }
        let scale = (-(-b).ln_1p()).powf(-0.5);
        let mut out = vec![0.0; n + 1];
        let mut pow = 1.0;
        for (k, slot) in out.iter_mut().enumerate().skip(1) {
            pow *= b;
            *slot = scale * pow / k as f64;
        }
        CoefficientSequence::from_real(&out)
    }

    /// `(1-z)^{-α}`, the Korenblum-space extremal.
    pub fn korenblum_probe(alpha: f64, n: usize) -> Result<CoefficientSequence> {
        SymbolSpec::Cayley(alpha).expand(n)
    }

    /// `log^{α+1}(e/(1-z))`, the logarithmic Bloch extremal.
    pub fn log_power_probe(alpha: f64, n: usize) -> Result<CoefficientSequence> {
        SymbolSpec::LogPow(alpha).expand(n)
    }

    /// `log log(e²/(1-z))`.
    pub fn loglog_probe(n: usize) -> Result<CoefficientSequence> {
        SymbolSpec::LogLog.expand(n)
    }
}

/// How far out the radius ladder goes and how much truncation it may use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Budget {
    /// Largest ladder index `j` (radius `1 - 2^{-j}`, or truncation `2^j`).
    pub depth: u32,
    /// Cap on the number of expanded coefficients.
    pub max_truncation: usize,
    /// Coefficients kept per unit of `1/(1-r)` at the largest radius.
    pub coeffs_per_scale: f64,
}

impl Default for Budget {
    fn default() -> Self {
        Self { depth: 12, max_truncation: 1 << 20, coeffs_per_scale: 40.0 }
    }
}

impl Budget {
    pub fn truncation(&self) -> usize {
        let want = (self.coeffs_per_scale * (self.depth as f64).exp2()).ceil() as usize;
        want.min(self.max_truncation)
    }
}

/// Ladder abscissa type of a growth trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceAxis {
    /// Points are `(r_j, q_j)`; slope is taken against `log 1/(1-r)`.
    Radius,
    /// Points are `(N_j, q_j)`; slope is taken against `log N`.
    Truncation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TraceStatus {
    Complete,
    /// The truncation tail bound exceeded `1e-6` of the computed value.
    Inconclusive { radius: f64, tail_bound: f64, value: f64 },
}

/// Sequence `q_j` whose boundedness is the membership criterion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthTrace {
    pub space: String,
    pub axis: TraceAxis,
    pub points: Vec<(f64, f64)>,
    /// Fitted log-slope over the second half of the ladder.
    pub fit: Option<LineFit>,
    pub truncation: usize,
    pub status: TraceStatus,
}

impl GrowthTrace {
    pub fn slope(&self) -> Option<f64> {
        self.fit.map(|f| f.slope)
    }

    pub fn is_conclusive(&self) -> bool {
        self.status == TraceStatus::Complete
    }
}

pub const TAIL_TOLERANCE: f64 = 1e-6;

/// Crude geometric bound on `Σ_{n>N} |c_n| r^n`, extrapolating the largest
/// magnitude among the last tenth of the stored coefficients.
pub fn geometric_tail_bound(c: &CoefficientSequence, r: f64) -> f64 {
    let n = c.len();
    let start = n - (n / 10).max(1);
    let top = c.coeffs()[start..].iter().map(|z| z.norm()).fold(0.0, f64::max);
    if top == 0.0 {
        return 0.0;
    }
    top * r.powf(n as f64) / (1.0 - r)
}

/// Growth trace for membership of `f` in `space`.
///
/// Radial spaces sample the defining weighted mean on `r_j = 1 - 2^{-j}`;
/// sum-type spaces report truncated norms at `N_j = 2^j`.
pub fn membership_evidence(f: &SymbolSpec, space: &SpaceSpec, budget: &Budget) -> Result<GrowthTrace> {
    use crate::hilbertop::{derivative_coeffs, fractional_derivative};
    use crate::means::{integral_mean, MeanOrder};

    space.validate()?;
    let depth = budget.depth.max(2);
    let ladder: Vec<u32> = (1..=depth).collect();

    let sum_trace = |norm: &dyn Fn(&CoefficientSequence) -> Result<f64>| -> Result<GrowthTrace> {
        let n_max = (1usize << depth).min(budget.max_truncation);
        let full = f.expand(n_max)?;
        let mut points = Vec::new();
        for &j in &ladder {
            let nj = (1usize << j).min(n_max);
            let q = norm(&full.resized(nj))?;
            points.push((nj as f64, q));
        }
        Ok(GrowthTrace {
            space: space.to_string(),
            axis: TraceAxis::Truncation,
            fit: fit_tail(&points, |x| x.ln()),
            points,
            truncation: n_max,
            status: TraceStatus::Complete,
        })
    };

    match *space {
        SpaceSpec::DirichletAlpha(a) => return sum_trace(&|c| Ok(norm_dirichlet(c, a))),
        SpaceSpec::Wiener => return sum_trace(&|c| Ok(norm_wiener(c))),
        SpaceSpec::HardyLittlewood(p) => return sum_trace(&|c| norm_hl(c, p)),
        SpaceSpec::DerivativeHardy(p) => {
            // S^p ⊂ W-type control through HL(p) of f' for p ≥ 2; the trace
            // reports HL(p) of f', the coefficient-side proxy.
            return sum_trace(&|c| norm_hl(&derivative_coeffs(c), p));
        }
        _ => {}
    }

    let n = budget.truncation();
    let full = f.expand(n)?;
    // (derived sequence, mean order, radial weight)
    type Weight = Box<dyn Fn(f64) -> f64>;
    let (derived, order, weight): (CoefficientSequence, MeanOrder, Weight) = match *space {
        SpaceSpec::MeanLipschitz { p, alpha } => (
            derivative_coeffs(&full),
            MeanOrder::Finite(p),
            Box::new(move |r: f64| (1.0 - r * r).powf(1.0 - alpha)),
        ),
        SpaceSpec::Xp(p) if p == 1.0 => (
            fractional_derivative(&full, 2.0),
            MeanOrder::Finite(1.0),
            Box::new(|r: f64| 1.0 - r),
        ),
        SpaceSpec::Xp(p) => (
            derivative_coeffs(&full),
            MeanOrder::Finite(p),
            Box::new(move |r: f64| (1.0 - r).powf(1.0 - 1.0 / p)),
        ),
        SpaceSpec::Hinf => (full.clone(), MeanOrder::Infinity, Box::new(|_| 1.0)),
        SpaceSpec::Korenblum(a) => (
            full.clone(),
            MeanOrder::Infinity,
            Box::new(move |r: f64| (1.0 - r * r).powf(a)),
        ),
        SpaceSpec::BlochLog(a) => (
            derivative_coeffs(&full),
            MeanOrder::Infinity,
            Box::new(move |r: f64| {
                let s = 1.0 - r * r;
                s * (1.0 - s.ln()).powf(-a)
            }),
        ),
        SpaceSpec::BlochBeta(b) => (
            derivative_coeffs(&full),
            MeanOrder::Infinity,
            Box::new(move |r: f64| (1.0 - r * r).powf(b)),
        ),
        _ => unreachable!("sum-type spaces handled above"),
    };

    let mut points = Vec::with_capacity(ladder.len());
    let mut status = TraceStatus::Complete;
    for &j in &ladder {
        let r = ladder_radius(j);
        let mean = integral_mean(&derived, order, r)?;
        let tail = if f.is_polynomial() { 0.0 } else { geometric_tail_bound(&derived, r) };
        if tail > TAIL_TOLERANCE * mean && status == TraceStatus::Complete {
            status = TraceStatus::Inconclusive { radius: r, tail_bound: tail, value: mean };
        }
        points.push((r, weight(r) * mean));
    }
    Ok(GrowthTrace {
        space: space.to_string(),
        axis: TraceAxis::Radius,
        fit: fit_tail(&points, |r| -(1.0 - r).ln()),
        points,
        truncation: n,
        status,
    })
}

/// Log-log fit over the second half of a ladder, skipping zero values.
fn fit_tail<X: Fn(f64) -> f64>(points: &[(f64, f64)], xmap: X) -> Option<LineFit> {
    let start = points.len() / 2;
    let (xs, ys): (Vec<f64>, Vec<f64>) = points[start..]
        .iter()
        .filter(|(_, q)| *q > 0.0)
        .map(|&(x, q)| (xmap(x), q.ln()))
        .unzip();
    fit_line(&xs, &ys)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn expand_log() {
        let f = SymbolSpec::Log.expand(3).unwrap();
        let v: Vec<f64> = f.coeffs().iter().map(|c| c.re).collect();
        assert_eq!(v, vec![0.0, 1.0, 0.5, 1.0 / 3.0]);
        assert_eq!(f.truncation(), 3);
    }

    #[test]
    fn expand_cayley_half_matches_binomial_series() {
        // (1-z)^{-1/2} = Σ C(2n,n) 4^{-n} z^n
        let f = SymbolSpec::Cayley(0.5).expand(10).unwrap();
        let mut central = 1.0f64;
        for n in 0..=10usize {
            if n > 0 {
                central *= (2 * n) as f64 * (2 * n - 1) as f64 / (n * n) as f64;
            }
            let oracle = central / 4f64.powi(n as i32);
            assert!(close(f.coeff(n).re, oracle, 1e-14), "n={n}");
        }
        assert_eq!(f.coeff(1).re, 0.5);
        assert_eq!(f.coeff(2).re, 0.375);
    }

    #[test]
    fn logpow_zero_is_one_plus_log() {
        let f = SymbolSpec::LogPow(0.0).expand(2000).unwrap();
        assert!(close(f.coeff(0).re, 1.0, 1e-15));
        for n in 1..=2000 {
            assert!(close(f.coeff(n).re * n as f64, 1.0, 1e-10), "n={n}");
        }
    }

    #[test]
    fn logpow_one_is_cauchy_square() {
        // (1+L)^2 by direct Cauchy product
        let n = 300;
        let h: Vec<f64> = (0..=n).map(|k| if k == 0 { 1.0 } else { 1.0 / k as f64 }).collect();
        let f = SymbolSpec::LogPow(1.0).expand(n).unwrap();
        for m in 0..=n {
            let oracle: f64 = (0..=m).map(|k| h[k] * h[m - k]).sum();
            assert!(close(f.coeff(m).re, oracle, 1e-11), "m={m}");
        }
    }

    #[test]
    fn loglog_exponentiates_back() {
        // exp(P) must equal 2 + L; compare via power series exp recurrence
        let n = 200;
        let p = SymbolSpec::LogLog.expand(n).unwrap();
        let pc: Vec<f64> = p.coeffs().iter().map(|c| c.re).collect();
        let mut e = vec![0.0; n + 1];
        e[0] = pc[0].exp();
        for m in 1..=n {
            let s: f64 = (1..=m).map(|k| k as f64 * pc[k] * e[m - k]).sum();
            e[m] = s / m as f64;
        }
        assert!(close(e[0], 2.0, 1e-14));
        for m in 1..=n {
            assert!(close(e[m], 1.0 / m as f64, 1e-10), "m={m}");
        }
    }

    #[test]
    fn norm_examples() {
        let z = CoefficientSequence::from_real(&[0.0, 1.0]).unwrap();
        assert_eq!(norm_dirichlet(&z, 0.0), 1.0);
        let f = CoefficientSequence::from_real(&[1.0, 2.0]).unwrap();
        assert!(close(norm_dirichlet(&f, 1.0), 5f64.sqrt(), 1e-15));
        assert_eq!(norm_wiener(&f), 3.0);
        let ones = CoefficientSequence::from_real(&[1.0, 1.0, 1.0]).unwrap();
        let hl = norm_hl(&ones, 2.0).unwrap();
        assert!(close(hl * hl, 3.0, 1e-15));
        assert!(close(hl, norm_dirichlet(&ones, 1.0), 1e-15));
    }

    #[test]
    fn dirichlet_two_of_log_is_zeta3() {
        // Σ n^{-1} n^{-2} = ζ(3); tail past N is below 1/(2N²)
        let n = 1 << 16;
        let f = SymbolSpec::Log.expand(n).unwrap();
        let sq = norm_dirichlet(&f, 2.0).powi(2);
        let zeta3 = 1.202_056_903_159_594_2;
        let tail = 1.0 / (2.0 * (n as f64).powi(2));
        assert!(sq <= zeta3 && zeta3 - sq <= 1.01 * tail, "{sq}");
    }

    #[test]
    fn s2_formula() {
        let f = CoefficientSequence::from_real(&[2.0, 1.0, -3.0]).unwrap();
        let s2 = 4.0 + 1.0 + 4.0 * 9.0;
        assert!(close(norm_dirichlet(&f, -1.0).powi(2), s2, 1e-15));
    }

    #[test]
    fn blochbeta_of_log_approaches_two() {
        let f = SymbolSpec::Log.expand(1 << 18).unwrap();
        let est = seminorm_blochbeta(&f, 1.0, &RadialGrid::ladder(12)).unwrap();
        assert!(est.value < 2.0 && est.value > 2.0 - 1e-3, "{}", est.value);
        assert_eq!(est.radius, ladder_radius(12));
    }

    #[test]
    fn korenblum_and_blochlog_on_complex_data() {
        let f = CoefficientSequence::new(vec![
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(-1.0, 0.0),
        ])
        .unwrap();
        let grid = RadialGrid { radii: vec![0.5], angles: 512 };
        let k = seminorm_korenblum(&f, 1.0, &grid).unwrap();
        // |i z - z²| at r=1/2 is maximised at |i - z| = 3/2, giving 3/4
        assert!(close(k.value, 0.75 * 0.75, 1e-4), "{}", k.value);
        let b = seminorm_blochlog(&f, 0.0, &grid).unwrap();
        assert!(b.value > 0.0);
    }

    #[test]
    fn grid_radius_guard() {
        let f = CoefficientSequence::constant(1.0);
        let grid = RadialGrid { radii: vec![0.5, 1.0], angles: 4 };
        assert!(matches!(seminorm_korenblum(&f, 1.0, &grid), Err(Error::GridRadius(_))));
    }

    #[test]
    fn symbol_grammar_round_trip() {
        for s in ["log", "loglog", "power:-2.1", "logpow:0.5", "cayley:0.5", "poly:0,1,0.25", "powlog:-1:-1", "file:/tmp/x.txt"] {
            let spec: SymbolSpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
        }
        assert!(matches!("bessel".parse::<SymbolSpec>(), Err(Error::UnknownKind(_))));
        assert!("power".parse::<SymbolSpec>().is_err());
        assert!("power:abc".parse::<SymbolSpec>().is_err());
        assert!("log:1".parse::<SymbolSpec>().is_err());
    }

    #[test]
    fn space_grammar_round_trip() {
        for s in ["D2:0.5", "W", "HL:2", "Hinf", "Hinf:0.5", "Blog:-1", "B:1", "Lip:2:0.5", "X:1", "S:2"] {
            let spec: SpaceSpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
        }
        assert!("Lip:2:1.5".parse::<SpaceSpec>().is_err());
        assert!("HL:0.5".parse::<SpaceSpec>().is_err());
        assert!("Q:1".parse::<SpaceSpec>().is_err());
    }

    #[test]
    fn file_symbol() {
        let dir = std::env::temp_dir().join(format!("hgop-coeff-{}", std::process::id()));
        std::fs::write(&dir, "# header\n1\n0.5, -2\n\n3e-1\n").unwrap();
        let f = SymbolSpec::File(dir.clone()).expand(4).unwrap();
        assert_eq!(f.coeff(1), Complex64::new(0.5, -2.0));
        assert_eq!(f.coeff(2).re, 0.3);
        assert_eq!(f.coeff(4), Complex64::default());
        std::fs::write(&dir, "1\nxyz\n").unwrap();
        assert!(matches!(SymbolSpec::File(dir.clone()).expand(2), Err(Error::Parse(_))));
        std::fs::remove_file(&dir).ok();
    }

    #[test]
    fn non_finite_rejected() {
        assert!(CoefficientSequence::from_real(&[1.0, f64::NAN]).is_err());
        assert!(CoefficientSequence::new(vec![]).is_err());
    }

    #[test]
    fn horner_matches_partial_sum() {
        let f = SymbolSpec::Cayley(0.3).expand(40).unwrap();
        let z = Complex64::new(0.3, -0.4);
        let direct: Complex64 = f.coeffs().iter().enumerate().map(|(n, c)| c * z.powu(n as u32)).sum();
        assert!((f.eval(z) - direct).norm() < 1e-14);
    }

    #[test]
    fn probes_have_unit_scale_norms() {
        // ‖f_a‖_{D²_α} ≍ 1 uniformly as a → 1
        for &a in &[0.9, 0.99, 0.999] {
            let f = probes::dirichlet_probe(0.5, a, 200_000).unwrap();
            let nrm = norm_dirichlet(&f, 0.5);
            assert!(nrm > 0.3 && nrm < 3.0, "a={a}: {nrm}");
        }
        for &b in &[0.9, 0.99, 0.999] {
            let f = probes::dirichlet_log_probe(b, 200_000).unwrap();
            let nrm = norm_dirichlet(&f, 0.0);
            assert!(nrm > 0.5 && nrm < 2.0, "b={b}: {nrm}");
        }
    }
}
