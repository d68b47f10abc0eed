//! Circle integral means `M_p(r, f)` and quadrature certificates for a few
//! asymptotic estimates with endpoint-singular integrands.

use std::f64::consts::{E, TAU};

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::coeffspace::CoefficientSequence;
use crate::error::{Error, Result};
use crate::hilbertop::fractional_derivative;
use crate::numeric::{fit_line, harmonic, sum_f64};
use crate::quad::{integrate_to_one, QuadOptions};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum MeanOrder {
    Finite(f64),
    Infinity,
}

impl std::fmt::Display for MeanOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MeanOrder::Finite(p) => write!(f, "{p}"),
            MeanOrder::Infinity => write!(f, "inf"),
        }
    }
}

impl std::str::FromStr for MeanOrder {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "∞" => Ok(MeanOrder::Infinity),
            t => t
                .parse::<f64>()
                .map(MeanOrder::Finite)
                .map_err(|_| Error::Parse(format!("mean order {s:?}"))),
        }
    }
}

/// Relative change between successive sample doublings that ends refinement.
pub const MEAN_REL_TOL: f64 = 1e-9;
const MIN_SAMPLES: usize = 64;
const MAX_SAMPLES: usize = 1 << 24;

/// `f(r e^{2πij/m})` for `j = 0..m`, by folding coefficients mod `m` and one FFT.
pub fn circle_samples(f: &CoefficientSequence, r: f64, m: usize) -> Vec<Complex64> {
    let mut buf = vec![Complex64::default(); m];
    let mut rn = 1.0;
    for (n, &a) in f.coeffs().iter().enumerate() {
        if rn == 0.0 {
            break;
        }
        buf[n % m] += a * rn;
        rn *= r;
    }
    let mut planner = FftPlanner::new();
    planner.plan_fft_inverse(m).process(&mut buf);
    buf
}

fn power_mean(samples: &[Complex64], p: f64) -> f64 {
    let m = samples.len() as f64;
    let s = if p == 2.0 {
        sum_f64(samples.iter().map(|z| z.norm_sqr()))
    } else {
        sum_f64(samples.iter().map(|z| z.norm().powf(p)))
    };
    (s / m).powf(1.0 / p)
}

fn initial_samples(f: &CoefficientSequence, r: f64) -> usize {
    let scale = (4.0 / (1.0 - r)).min(f.len() as f64 * 2.0);
    (scale.ceil() as usize).next_power_of_two().clamp(MIN_SAMPLES, MAX_SAMPLES / 2)
}

/// `M_p(r, f)` for the stored coefficients, `p ≥ 1` or `p = ∞`.
pub fn integral_mean(f: &CoefficientSequence, order: MeanOrder, r: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&r) {
        return Err(Error::GridRadius(r));
    }
    if let MeanOrder::Finite(p) = order {
        if !(p >= 1.0 && p.is_finite()) {
            return Err(Error::ParameterRange(format!("mean order p={p} must satisfy p ≥ 1")));
        }
    }
    if r == 0.0 || f.len() == 1 {
        return Ok(f.coeff(0).norm());
    }
    if order == MeanOrder::Infinity && f.is_nonnegative_real() {
        return Ok(f.eval(Complex64::new(r, 0.0)).re);
    }
    let mut m = initial_samples(f, r);
    let mut prev = mean_at(f, order, r, m);
    loop {
        m *= 2;
        let next = mean_at(f, order, r, m);
        let scale = next.abs().max(f64::MIN_POSITIVE);
        if (next - prev).abs() <= MEAN_REL_TOL * scale {
            return Ok(match order {
                MeanOrder::Infinity => refine_max(f, r, m, next),
                MeanOrder::Finite(_) => next,
            });
        }
        if m >= MAX_SAMPLES {
            return Err(Error::NonConvergence(format!(
                "integral mean at r={r} still changing after {m} samples"
            )));
        }
        prev = next;
    }
}

fn mean_at(f: &CoefficientSequence, order: MeanOrder, r: f64, m: usize) -> f64 {
    let s = circle_samples(f, r, m);
    match order {
        MeanOrder::Finite(p) => power_mean(&s, p),
        MeanOrder::Infinity => s.iter().map(|z| z.norm()).fold(0.0, f64::max),
    }
}

/// Golden-section search of `|f(r e^{iθ})|` around the best sample.
fn refine_max(f: &CoefficientSequence, r: f64, m: usize, sampled: f64) -> f64 {
    let s = circle_samples(f, r, m);
    let (j, _) = s
        .iter()
        .enumerate()
        .fold((0, -1.0), |(bj, bv), (i, z)| if z.norm() > bv { (i, z.norm()) } else { (bj, bv) });
    let h = TAU / m as f64;
    let g = |t: f64| f.eval(Complex64::from_polar(r, t)).norm();
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (j as f64 * h - h, j as f64 * h + h);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (g(c), g(d));
    for _ in 0..60 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = g(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = g(d);
        }
    }
    sampled.max(fc).max(fd)
}

/// `r_j = 1 - 2^{-j}` for `j = 0..=depth`.
pub fn radius_grid(depth: u32) -> Vec<f64> {
    (0..=depth).map(|j| 1.0 - (-(j as f64)).exp2()).collect()
}

/// Ratio band with the last-decade drift used to certify `≍`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub band: (f64, f64),
    pub spread: f64,
    /// Slope of `log ratio` against `log 1/(1-r)` (or `log n`) over the last ten points.
    pub drift: f64,
    pub pass: bool,
}

pub const MAX_SPREAD: f64 = 100.0;
pub const MAX_DRIFT: f64 = 0.05;

/// Band/drift certificate for `(x, ratio)` points, `x` already on a log scale.
pub fn certify(points: &[(f64, f64)]) -> Certificate {
    let lo = points.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let hi = points.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let spread = hi / lo;
    let start = points.len().saturating_sub(10);
    let (xs, ys): (Vec<f64>, Vec<f64>) = points[start..].iter().map(|&(x, v)| (x, v.ln())).unzip();
    let drift = fit_line(&xs, &ys).map_or(f64::NAN, |f| f.slope);
    let pass = lo > 0.0 && spread.is_finite() && spread < MAX_SPREAD && drift.abs() < MAX_DRIFT;
    Certificate { band: (lo, hi), spread, drift, pass }
}

fn singular_opts() -> QuadOptions {
    QuadOptions { abs_tol: 0.0, rel_tol: 1e-11, max_intervals: 4000 }
}

/// `u_max` with `e^{-u_max} < 1e-14 (1-r)` after accounting for decay rate `κ`.
fn u_limit(one_minus_r: f64, kappa: f64) -> f64 {
    let base = -one_minus_r.ln() + 14.0 * 10f64.ln() + 8.0;
    base / kappa.clamp(0.05, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lemma42Params {
    pub delta: f64,
    pub c: f64,
    pub beta: f64,
    pub gamma: f64,
}

/// `LHS/RHS` per radius, with
/// `LHS = ∫ (1-t)^δ (1-tr)^{-1-δ-c} log^β(e/(1-t)) log^γ(e/(1-tr)) dt` and
/// `RHS = (1-r)^{-c} log^{β+γ}(e/(1-r))`.
pub fn lemma42_ratio(params: Lemma42Params, r_grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    let Lemma42Params { delta, c, beta, gamma } = params;
    if !(delta > -1.0 && c > 0.0) {
        return Err(Error::ParameterRange(format!("need δ > -1 and c > 0, got δ={delta}, c={c}")));
    }
    r_grid
        .iter()
        .map(|&r| {
            if !(0.0..1.0).contains(&r) {
                return Err(Error::GridRadius(r));
            }
            let eps = 1.0 - r;
            let integrand = |_t: f64, s: f64| {
                let w = eps + r * s; // 1 - t r without cancellation
                let u = -s.ln();
                s.powf(delta) * w.powf(-1.0 - delta - c) * (1.0 + u).powf(beta) * (1.0 - w.ln()).powf(gamma)
            };
            let lhs = integrate_to_one(integrand, u_limit(eps, 1.0 + delta), &[eps], singular_opts())?.value;
            let rhs = eps.powf(-c) * (1.0 - eps.ln()).powf(beta + gamma);
            Ok((r, lhs / rhs))
        })
        .collect()
}

/// `∫ t^n log^{α+1}(e/(1-t)) dt` by quadrature.
pub fn log_moment(alpha: f64, n: usize) -> Result<f64> {
    let nf = n as f64;
    let f = |_t: f64, s: f64| {
        let tn = if n == 0 { 1.0 } else { (nf * (-s).ln_1p()).exp() };
        tn * (1.0 - s.ln()).powf(alpha + 1.0)
    };
    let feature = 1.0 / (nf + 1.0);
    Ok(integrate_to_one(f, u_limit(feature, 1.0), &[feature], singular_opts())?.value)
}

/// `(n, LHS/RHS)` with `RHS = log^{α+1}(e(n+1))/(n+1)`.
pub fn moment_asymptotic_ratio(alpha: f64, n_grid: &[usize]) -> Result<Vec<(usize, f64)>> {
    if alpha <= -1.0 {
        return Err(Error::ParameterRange(format!("need α > -1, got {alpha}")));
    }
    n_grid
        .iter()
        .map(|&n| {
            let lhs = log_moment(alpha, n)?;
            let m = n as f64 + 1.0;
            let rhs = (E * m).ln().powf(alpha + 1.0) / m;
            Ok((n, lhs / rhs))
        })
        .collect()
}

/// Closed form of the `α = 0` moment ratio, `(1 + H_{n+1})/log(e(n+1))`.
pub fn moment_ratio_closed_form(n: usize) -> f64 {
    (1.0 + harmonic(n as u64 + 1)) / (1.0 + (n as f64 + 1.0).ln())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftReport {
    pub p: f64,
    pub alpha: f64,
    pub shift: f64,
    /// `(r, (1-r)^α M_p(r,f), (1-r)^{α+shift} M_p(r, D^shift f))`.
    pub traces: Vec<(f64, f64, f64)>,
    pub sup_base: f64,
    pub sup_shifted: f64,
    pub ratio_band: (f64, f64),
}

/// Sup-type mixed norms of `f` and its fractional derivative on `r_grid`.
pub fn mixed_norm_shift_check(
    f: &CoefficientSequence,
    p: f64,
    q: MeanOrder,
    alpha: f64,
    shift: f64,
    r_grid: &[f64],
) -> Result<ShiftReport> {
    if q != MeanOrder::Infinity {
        return Err(Error::ParameterRange("only q = ∞ mixed norms are supported".into()));
    }
    if !(shift > 0.0) {
        return Err(Error::ParameterRange(format!("shift must be positive, got {shift}")));
    }
    let shifted = fractional_derivative(f, shift);
    let mut traces = Vec::with_capacity(r_grid.len());
    for &r in r_grid {
        let a = (1.0 - r).powf(alpha) * integral_mean(f, MeanOrder::Finite(p), r)?;
        let b = (1.0 - r).powf(alpha + shift) * integral_mean(&shifted, MeanOrder::Finite(p), r)?;
        traces.push((r, a, b));
    }
    let sup_base = traces.iter().map(|t| t.1).fold(0.0, f64::max);
    let sup_shifted = traces.iter().map(|t| t.2).fold(0.0, f64::max);
    let ratios = traces.iter().filter(|t| t.2 > 0.0).map(|t| t.1 / t.2);
    let ratio_band = ratios.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)));
    Ok(ShiftReport { p, alpha, shift, traces, sup_base, sup_shifted, ratio_band })
}

/// `(r, (1-r) ∫ log log(e²/(1-t)) / (1-tr)² dt)` per radius.
pub fn remark47_blowup(r_grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    r_grid
        .iter()
        .map(|&r| {
            if !(0.0..1.0).contains(&r) {
                return Err(Error::GridRadius(r));
            }
            let eps = 1.0 - r;
            let integrand = |_t: f64, s: f64| {
                let w = eps + r * s;
                (2.0 - s.ln()).ln() / (w * w)
            };
            let v = integrate_to_one(integrand, u_limit(eps, 1.0), &[eps], singular_opts())?.value;
            Ok((r, eps * v))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffspace::SymbolSpec;

    fn seq(v: &[f64]) -> CoefficientSequence {
        CoefficientSequence::from_real(v).unwrap()
    }

    #[test]
    fn mean_examples() {
        let f = seq(&[1.0, 1.0]);
        let m = integral_mean(&f, MeanOrder::Finite(2.0), 0.5).unwrap();
        assert!((m - 5f64.sqrt() / 2.0).abs() < 1e-14);
        let one = seq(&[1.0]);
        for p in [MeanOrder::Finite(1.0), MeanOrder::Finite(3.5), MeanOrder::Infinity] {
            assert_eq!(integral_mean(&one, p, 0.7).unwrap(), 1.0);
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        let f = seq(&[1.0, 2.0]);
        assert!(matches!(integral_mean(&f, MeanOrder::Finite(2.0), 1.0), Err(Error::GridRadius(_))));
        assert!(integral_mean(&f, MeanOrder::Finite(0.5), 0.3).is_err());
    }

    #[test]
    fn mean_of_one_plus_z() {
        // M_1(1, 1+z) = 4/π; at r<1 the mean is (2/π)(1+r)E(2√r/(1+r)), compare the r=0.5 series
        let f = seq(&[1.0, 1.0]);
        let m = integral_mean(&f, MeanOrder::Finite(1.0), 0.5).unwrap();
        // |1 + r e^{iθ}| averaged by direct high-resolution sum
        let n = 1 << 16;
        let direct = (0..n)
            .map(|k| (1.0 + 0.5 * Complex64::from_polar(1.0, TAU * k as f64 / n as f64)).norm())
            .sum::<f64>()
            / n as f64;
        assert!((m - direct).abs() < 1e-12);
    }

    #[test]
    fn sup_of_complex_polynomial() {
        // 1 - z at radius r: max |1 - r e^{iθ}| = 1 + r at θ = π
        let f = seq(&[1.0, -1.0]);
        let m = integral_mean(&f, MeanOrder::Infinity, 0.6).unwrap();
        assert!((m - 1.6).abs() < 1e-12, "{m}");
        // nonnegative coefficients: value at z = r
        let g = seq(&[1.0, 2.0, 3.0]);
        assert_eq!(integral_mean(&g, MeanOrder::Infinity, 0.5).unwrap(), 1.0 + 1.0 + 0.75);
    }

    #[test]
    fn log_mean_against_fine_grid() {
        let f = SymbolSpec::Log.expand(1 << 13).unwrap();
        let m = integral_mean(&f, MeanOrder::Finite(1.0), 0.99).unwrap();
        let reference = power_mean(&circle_samples(&f, 0.99, 1 << 18), 1.0);
        assert!((m / reference - 1.0).abs() < 0.02);
        assert!((m / reference - 1.0).abs() < 1e-8);
    }

    #[test]
    fn repeated_quadrature_bit_identical() {
        let p = Lemma42Params { delta: 0.5, c: 2.0, beta: 1.0, gamma: -1.0 };
        let g = radius_grid(12);
        let a = lemma42_ratio(p, &g).unwrap();
        let b = lemma42_ratio(p, &g).unwrap();
        assert!(a.iter().zip(&b).all(|(x, y)| x.1.to_bits() == y.1.to_bits()));
    }

    #[test]
    fn lemma42_closed_form_case() {
        // δ=0, c=1, β=γ=0: ∫(1-tr)^{-2} dt = 1/(1-r), so the ratio is 1
        let p = Lemma42Params { delta: 0.0, c: 1.0, beta: 0.0, gamma: 0.0 };
        for (r, q) in lemma42_ratio(p, &radius_grid(20)).unwrap() {
            assert!((q - 1.0).abs() < 1e-8, "r={r}: {q}");
        }
    }

    #[test]
    fn lemma42_r_zero() {
        // r = 0: LHS = ∫(1-t)^δ log^β(e/(1-t)) dt = Γ(β+1, ·) type; δ=1, β=0 gives 1/2
        let p = Lemma42Params { delta: 1.0, c: 0.5, beta: 0.0, gamma: 1.0 };
        let q = lemma42_ratio(p, &[0.0]).unwrap()[0].1;
        assert!((q - 0.5).abs() < 1e-11);
    }

    #[test]
    fn moment_ratio_first_values() {
        let v = moment_asymptotic_ratio(0.0, &[0, 1, 7]).unwrap();
        assert!((v[0].1 - 2.0).abs() < 1e-11);
        for (n, q) in v {
            assert!((q - moment_ratio_closed_form(n)).abs() < 1e-10);
        }
    }

    #[test]
    fn remark47_at_zero_and_monotone() {
        // ∫ log(2 + u) e^{-u} du at r = 0
        let tr = remark47_blowup(&radius_grid(16)).unwrap();
        assert!(tr[0].1 > 2f64.ln());
        assert!(tr.windows(2).all(|w| w[1].1 >= w[0].1));
    }

    #[test]
    fn certificate_rules() {
        let flat: Vec<(f64, f64)> = (0..20).map(|j| (j as f64, 2.0)).collect();
        assert!(certify(&flat).pass);
        let drifting: Vec<(f64, f64)> = (0..20).map(|j| (j as f64, (0.2 * j as f64).exp())).collect();
        assert!(!certify(&drifting).pass);
    }
}
