//! The generalized Hilbert operator `H_g(f)(z) = ∫_0^1 f(t) g'(tz) dt` in
//! coefficient form, its dense truncation, and the coefficient algebra
//! (derivative, Hadamard product, fractional derivative).
//!
//! The `n`-th output coefficient is `c_n = (n+1) b_{n+1} Σ_k a_k/(n+k+1)`.
//! It is evaluated as `b_{n+1} · Σ_k a_k · ((n+1)/(n+k+1))` with the inner
//! sum in ascending `k` and compensated, so that `H_g(1)_n = b_{n+1}` holds
//! bit for bit and matrix application reproduces `apply` exactly.

use num_complex::Complex64;

use crate::coeffspace::CoefficientSequence;
use crate::error::{Error, Result};
use crate::numeric::{fit_line, CompensatedComplex};
use crate::quad::{integrate, integrate_to_one, QuadOptions};

/// Default cap on dense matrix entries; overridden by `HL_MAX_MATRIX`.
pub const DEFAULT_MAX_MATRIX: usize = 1 << 26;

pub fn max_matrix_entries() -> usize {
    std::env::var("HL_MAX_MATRIX")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_MAX_MATRIX)
}

/// `∫_0^1 t^n f(t) dt = Σ_k a_k/(n+k+1)` for the stored coefficients.
pub fn moment(f: &CoefficientSequence, n: usize) -> Complex64 {
    let mut acc = CompensatedComplex::new();
    for (k, &a) in f.coeffs().iter().enumerate() {
        acc.add(a / (n + k + 1) as f64);
    }
    acc.value()
}

/// `(n+1) · moment(f, n)`, the row kernel of the operator.
fn scaled_moment(f: &[Complex64], n: usize) -> Complex64 {
    let m = (n + 1) as f64;
    let mut acc = CompensatedComplex::new();
    for (k, &a) in f.iter().enumerate() {
        acc.add(a * (m / (n + k + 1) as f64));
    }
    acc.value()
}

/// `∫_0^1 t^n f(t) dt` by adaptive Gauss–Kronrod on `[0, 1]`; for smooth `f`.
pub fn moment_quadrature<F: Fn(f64) -> f64>(f: F, n: usize) -> Result<f64> {
    let opts = QuadOptions { abs_tol: 1e-14, rel_tol: 1e-13, max_intervals: 2000 };
    Ok(integrate(|t| t.powi(n as i32) * f(t), 0.0, 1.0, opts)?.value)
}

/// `∫_0^1 t^n f(t) dt` through `t = 1 - e^{-u}`, for `f` with an integrable
/// singularity at `t = 1`. `f` receives `(t, 1 - t)`.
pub fn moment_quadrature_singular<F: Fn(f64, f64) -> f64>(f: F, n: usize) -> Result<f64> {
    let opts = QuadOptions { abs_tol: 1e-12, rel_tol: 1e-12, max_intervals: 4000 };
    let feature = 1.0 / (n as f64 + 1.0);
    let r = integrate_to_one(
        |t, s| {
            let tn = if n == 0 { 1.0 } else { (n as f64 * (-s).ln_1p()).exp() };
            tn * f(t, s)
        },
        60.0 + (n as f64 + 1.0).ln(),
        &[feature],
        opts,
    )?;
    Ok(r.value)
}

/// Upper limit on `Σ|a_k|/(k+1)` before the moment series is declared divergent.
pub const MOMENT_SUM_LIMIT: f64 = 1e8;

/// Crude numeric stand-in for `∫_0^1 |f(t)| dt < ∞`.
///
/// Fails when `Σ |a_k|/(k+1) ≥ 1e8` or when `|a_k|` grows with fitted
/// log-log slope `≥ 1` over the last decade of indices.
pub fn check_well_defined(f: &CoefficientSequence) -> Result<()> {
    let mut sum = crate::numeric::Compensated::new();
    for (k, a) in f.coeffs().iter().enumerate() {
        sum.add(a.norm() / (k + 1) as f64);
    }
    let total = sum.value();
    if total >= MOMENT_SUM_LIMIT {
        return Err(Error::Undefined(format!(
            "moment series Σ|a_k|/(k+1) = {total:.3e} exceeds {MOMENT_SUM_LIMIT:.0e}"
        )));
    }
    let k_max = f.truncation();
    if k_max >= 20 {
        let (xs, ys): (Vec<f64>, Vec<f64>) = ((k_max / 10).max(1)..=k_max)
            .filter_map(|k| {
                let m = f.coeff(k).norm();
                (m > 0.0).then(|| ((k as f64).ln(), m.ln()))
            })
            .unzip();
        if let Some(fit) = fit_line(&xs, &ys) {
            if fit.slope >= 1.0 {
                return Err(Error::Undefined(format!(
                    "coefficients grow with log-log slope {:.3} over the last decade",
                    fit.slope
                )));
            }
        }
    }
    Ok(())
}

/// Coefficients `c_0..c_{n_out}` of `H_g(f)`.
pub fn apply(g: &CoefficientSequence, f: &CoefficientSequence, n_out: usize) -> Result<CoefficientSequence> {
    check_well_defined(f)?;
    let a = f.coeffs();
    let c: Vec<Complex64> = (0..=n_out)
        .map(|n| {
            let b = g.coeff(n + 1);
            if b == Complex64::default() {
                Complex64::default()
            } else {
                b * scaled_moment(a, n)
            }
        })
        .collect();
    CoefficientSequence::new(c)
}

/// Classical Hilbert matrix image `H(f)_n = Σ_k a_k/(n+k+1)`.
pub fn classical_hilbert(f: &CoefficientSequence, n_out: usize) -> Result<CoefficientSequence> {
    check_well_defined(f)?;
    CoefficientSequence::new((0..=n_out).map(|n| moment(f, n)).collect())
}

/// `d_n = (n+1) b_{n+1}`, the diagonal factor of `H_g`.
pub fn diagonal(g: &CoefficientSequence, rows: usize) -> Vec<Complex64> {
    (0..rows).map(|n| g.coeff(n + 1) * (n + 1) as f64).collect()
}

/// Dense `(N+1)×(K+1)` truncation `M[n][k] = (n+1) b_{n+1}/(n+k+1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    entries: Vec<Complex64>,
    diag: Vec<Complex64>,
    shift: Vec<Complex64>,
    rows: usize,
    cols: usize,
}

/// Hilbert matrix entry `1/(n+k+1)`.
#[inline]
pub fn hilbert_entry(n: usize, k: usize) -> f64 {
    1.0 / (n + k + 1) as f64
}

pub fn matrix(g: &CoefficientSequence, n: usize, k: usize) -> Result<OperatorMatrix> {
    let rows = n + 1;
    let cols = k + 1;
    let cap = max_matrix_entries();
    if rows.checked_mul(cols).map_or(true, |e| e > cap) {
        return Err(Error::MatrixTooLarge { rows, cols, cap });
    }
    let diag = diagonal(g, rows);
    let shift: Vec<Complex64> = (0..rows).map(|i| g.coeff(i + 1)).collect();
    let mut entries = Vec::with_capacity(rows * cols);
    for (i, d) in diag.iter().enumerate() {
        entries.extend((0..cols).map(|j| d * hilbert_entry(i, j)));
    }
    Ok(OperatorMatrix { entries, diag, shift, rows, cols })
}

impl OperatorMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, n: usize, k: usize) -> Complex64 {
        self.entries[n * self.cols + k]
    }

    pub fn row(&self, n: usize) -> &[Complex64] {
        &self.entries[n * self.cols..(n + 1) * self.cols]
    }

    pub fn diag(&self) -> &[Complex64] {
        &self.diag
    }

    /// `M x` through the factorization, in the same order as [`apply`].
    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        let x = &x[..x.len().min(self.cols)];
        (0..self.rows)
            .map(|n| {
                let b = self.shift[n];
                if b == Complex64::default() {
                    Complex64::default()
                } else {
                    b * scaled_moment(x, n)
                }
            })
            .collect()
    }

    /// Rows as CSV, 17 significant digits, real parts only when all
    /// entries are real.
    pub fn to_csv(&self) -> String {
        let real = self.entries.iter().all(|z| z.im == 0.0);
        let mut out = String::new();
        for n in 0..self.rows {
            let cells: Vec<String> = self
                .row(n)
                .iter()
                .map(|z| {
                    if real {
                        format!("{:.16e}", z.re)
                    } else {
                        format!("{:.16e}{:+.16e}i", z.re, z.im)
                    }
                })
                .collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// Coefficients of `f'`: `(n+1) a_{n+1}`.
pub fn derivative_coeffs(c: &CoefficientSequence) -> CoefficientSequence {
    let v: Vec<Complex64> = if c.len() == 1 {
        vec![Complex64::default()]
    } else {
        (0..c.truncation()).map(|n| c.coeff(n + 1) * (n + 1) as f64).collect()
    };
    CoefficientSequence::new(v).expect("derivative of finite coefficients is finite")
}

/// Coefficientwise product `Σ a_n b_n z^n`, truncated to the shorter input.
pub fn hadamard(f: &CoefficientSequence, g: &CoefficientSequence) -> CoefficientSequence {
    let v: Vec<Complex64> = f.coeffs().iter().zip(g.coeffs()).map(|(a, b)| a * b).collect();
    CoefficientSequence::new(v).expect("product of finite coefficients is finite")
}

/// `D^t f = Σ (n+1)^t a_n z^n`.
pub fn fractional_derivative(f: &CoefficientSequence, t: f64) -> CoefficientSequence {
    if t == 0.0 {
        return f.clone();
    }
    let v: Vec<Complex64> = f
        .coeffs()
        .iter()
        .enumerate()
        .map(|(n, a)| a * ((n + 1) as f64).powf(t))
        .collect();
    CoefficientSequence::new(v).expect("finite multiplier")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffspace::SymbolSpec;

    fn seq(v: &[f64]) -> CoefficientSequence {
        CoefficientSequence::from_real(v).unwrap()
    }

    #[test]
    fn moment_examples() {
        let one = CoefficientSequence::constant(1.0);
        assert_eq!(moment(&one, 0).re, 1.0);
        assert_eq!(moment(&one, 4).re, 0.2);
    }

    #[test]
    fn moment_of_cayley_half_tends_to_two() {
        // ∫_0^1 (1-t)^{-1/2} dt = 2; truncation error ≈ Σ_{k>K} c_k/(k+1) ~ 2/√(πK)
        let mut last_gap = f64::INFINITY;
        for &k in &[1usize << 8, 1 << 12, 1 << 16] {
            let f = SymbolSpec::Cayley(0.5).expand(k).unwrap();
            let m = moment(&f, 0).re;
            let gap = 2.0 - m;
            let predicted = 2.0 / (std::f64::consts::PI * k as f64).sqrt();
            assert!(gap > 0.0 && gap < last_gap);
            assert!((gap / predicted - 1.0).abs() < 0.05, "K={k}: gap {gap}, predicted {predicted}");
            last_gap = gap;
        }
    }

    #[test]
    fn cayley_moment_matches_beta_function() {
        // ∫ t^n (1-t)^{-1/2} dt = B(n+1, 1/2); quadrature route
        for &n in &[0usize, 1, 5, 40] {
            let q = moment_quadrature_singular(|_, s| s.powf(-0.5), n).unwrap();
            // B(n+1,1/2) = 2 · Π_{j=1}^{n} (2j)/(2j+1)
            let beta = (1..=n).fold(2.0, |acc, j| acc * (2 * j) as f64 / (2 * j + 1) as f64);
            assert!((q - beta).abs() < 1e-10, "n={n}: {q} vs {beta}");
        }
    }

    #[test]
    fn apply_examples() {
        let z = seq(&[0.0, 1.0]);
        let one = CoefficientSequence::constant(1.0);
        let c = apply(&z, &one, 3).unwrap();
        assert_eq!(c.coeffs().iter().map(|c| c.re).collect::<Vec<_>>(), vec![1.0, 0.0, 0.0, 0.0]);

        let log = SymbolSpec::Log.expand(64).unwrap();
        let c = apply(&log, &one, 62).unwrap();
        for n in 0..=62 {
            assert_eq!(c.coeff(n).re, 1.0 / (n + 1) as f64);
        }
    }

    #[test]
    fn apply_of_one_is_shifted_symbol() {
        let g = seq(&[3.0, 0.3, -1.7, 2.9, 0.0, 1e-3]);
        let c = apply(&g, &CoefficientSequence::constant(1.0), 4).unwrap();
        for n in 0..=4 {
            assert_eq!(c.coeff(n), g.coeff(n + 1));
        }
    }

    #[test]
    fn undefined_on_growing_input() {
        let g = SymbolSpec::Log.expand(10).unwrap();
        let f = SymbolSpec::Power(1.5).expand(1000).unwrap();
        assert!(matches!(apply(&g, &f, 5), Err(Error::Undefined(_))));
        let huge = seq(&[1e9, 1.0]);
        assert!(matches!(apply(&g, &huge, 5), Err(Error::Undefined(_))));
    }

    #[test]
    fn matrix_examples() {
        let log = SymbolSpec::Log.expand(8).unwrap();
        let m = matrix(&log, 1, 1).unwrap();
        assert_eq!(m.get(0, 0).re, 1.0);
        assert_eq!(m.get(0, 1).re, 0.5);
        assert_eq!(m.get(1, 0).re, 0.5);
        assert!((m.get(1, 1).re - 1.0 / 3.0).abs() <= f64::EPSILON / 3.0);

        let ones = SymbolSpec::Power(0.0).expand(20).unwrap();
        let m = matrix(&ones, 5, 5).unwrap();
        for n in 0..=5 {
            for k in 0..=5 {
                let want = (n + 1) as f64 / (n + k + 1) as f64;
                assert!((m.get(n, k).re - want).abs() <= 2.0 * f64::EPSILON * want);
            }
        }
    }

    #[test]
    fn matrix_cap() {
        let g = SymbolSpec::Log.expand(4).unwrap();
        std::env::set_var("HL_MAX_MATRIX", "100");
        let r = matrix(&g, 10, 10);
        std::env::remove_var("HL_MAX_MATRIX");
        assert!(matches!(r, Err(Error::MatrixTooLarge { .. })));
    }

    #[test]
    fn derivative_and_fractional() {
        let f = seq(&[1.0, 2.0, 3.0]);
        let d = derivative_coeffs(&f);
        assert_eq!(d.coeffs().iter().map(|c| c.re).collect::<Vec<_>>(), vec![2.0, 6.0]);
        assert_eq!(fractional_derivative(&f, 0.0), f);
        let st = fractional_derivative(&fractional_derivative(&f, 0.7), 1.3);
        let direct = fractional_derivative(&f, 2.0);
        for n in 0..3 {
            assert!((st.coeff(n) - direct.coeff(n)).norm() < 1e-14 * direct.coeff(n).norm());
        }
    }

    #[test]
    fn hadamard_of_logs() {
        let l = SymbolSpec::Log.expand(50).unwrap();
        let h = hadamard(&l, &l);
        for n in 1..=50 {
            let want = 1.0 / (n * n) as f64;
            assert!((h.coeff(n).re - want).abs() <= 2.0 * f64::EPSILON * want);
        }
    }

    #[test]
    fn output_derivative_weight() {
        // H_g(f)' has n-th coefficient (n+1)(n+2) b_{n+2} Σ a_k/(n+k+2)
        let g = SymbolSpec::Power(-0.5).expand(40).unwrap();
        let f = seq(&[1.0, -0.5, 0.25, 2.0]);
        let out = apply(&g, &f, 30).unwrap();
        let d = derivative_coeffs(&out);
        for n in 0..29 {
            let b = g.coeff(n + 2).re;
            let s: f64 = (0..4).map(|k| f.coeff(k).re / (n + k + 2) as f64).sum();
            let want = ((n + 1) * (n + 2)) as f64 * b * s;
            assert!((d.coeff(n).re - want).abs() < 1e-12 * want.abs().max(1e-300));
        }
    }
}
