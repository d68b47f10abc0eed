//! Small numerical helpers shared by the other modules: compensated
//! summation and least-squares line fits.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Neumaier (improved Kahan) running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct Compensated {
    sum: f64,
    comp: f64,
}

impl Compensated {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Compensated sum over complex values, real and imaginary parts kept apart.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedComplex {
    re: Compensated,
    im: Compensated,
}

impl CompensatedComplex {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    #[inline]
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

pub fn sum_f64<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    let mut acc = Compensated::new();
    for x in it {
        acc.add(x);
    }
    acc.value()
}

/// Ordinary least-squares fit `y = intercept + slope * x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual.
    pub residual: f64,
}

pub fn fit_line(xs: &[f64], ys: &[f64]) -> Option<LineFit> {
    let n = xs.len();
    if n < 2 || n != ys.len() {
        return None;
    }
    let nf = n as f64;
    let mx = sum_f64(xs.iter().copied()) / nf;
    let my = sum_f64(ys.iter().copied()) / nf;
    let sxx = sum_f64(xs.iter().map(|x| (x - mx) * (x - mx)));
    if sxx == 0.0 {
        return None;
    }
    let sxy = sum_f64(xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)));
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss = sum_f64(
        xs.iter()
            .zip(ys)
            .map(|(x, y)| (y - intercept - slope * x).powi(2)),
    );
    Some(LineFit {
        slope,
        intercept,
        residual: (ss / nf).sqrt(),
    })
}

/// Two-predictor least-squares fit `y = c + s * x1 + t * x2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlaneFit {
    pub s: f64,
    pub t: f64,
    pub intercept: f64,
    pub residual: f64,
}

pub fn fit_plane(x1: &[f64], x2: &[f64], ys: &[f64]) -> Option<PlaneFit> {
    let n = ys.len();
    if n < 3 || x1.len() != n || x2.len() != n {
        return None;
    }
    let nf = n as f64;
    let m1 = sum_f64(x1.iter().copied()) / nf;
    let m2 = sum_f64(x2.iter().copied()) / nf;
    let my = sum_f64(ys.iter().copied()) / nf;
    let s11 = sum_f64(x1.iter().map(|a| (a - m1).powi(2)));
    let s22 = sum_f64(x2.iter().map(|b| (b - m2).powi(2)));
    let s12 = sum_f64(x1.iter().zip(x2).map(|(a, b)| (a - m1) * (b - m2)));
    let s1y = sum_f64(x1.iter().zip(ys).map(|(a, y)| (a - m1) * (y - my)));
    let s2y = sum_f64(x2.iter().zip(ys).map(|(b, y)| (b - m2) * (y - my)));
    let det = s11 * s22 - s12 * s12;
    if det.abs() <= 1e-14 * (s11 * s22).max(f64::MIN_POSITIVE) {
        return None;
    }
    let s = (s1y * s22 - s2y * s12) / det;
    let t = (s2y * s11 - s1y * s12) / det;
    let intercept = my - s * m1 - t * m2;
    let ss = sum_f64(
        (0..n).map(|i| (ys[i] - intercept - s * x1[i] - t * x2[i]).powi(2)),
    );
    Some(PlaneFit {
        s,
        t,
        intercept,
        residual: (ss / nf).sqrt(),
    })
}

/// Harmonic number `H_n = 1 + 1/2 + ... + 1/n`.
pub fn harmonic(n: u64) -> f64 {
    sum_f64((1..=n).map(|k| 1.0 / k as f64))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_recovers_small_terms() {
        let mut acc = Compensated::new();
        acc.add(1.0);
        for _ in 0..1000 {
            acc.add(1e-17);
        }
        acc.add(-1.0);
        assert!((acc.value() - 1e-14).abs() < 1e-20);
    }

    #[test]
    fn line_fit_exact() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 - 0.5 * x).collect();
        let fit = fit_line(&xs, &ys).unwrap();
        assert!((fit.slope + 0.5).abs() < 1e-14);
        assert!((fit.intercept - 2.0).abs() < 1e-14);
        assert!(fit.residual < 1e-14);
    }

    #[test]
    fn plane_fit_exact() {
        let x1: Vec<f64> = (1..10).map(|k| k as f64).collect();
        let x2: Vec<f64> = x1.iter().map(|x| x.ln()).collect();
        let ys: Vec<f64> = x1.iter().zip(&x2).map(|(a, b)| 1.0 + 2.0 * a - 3.0 * b).collect();
        let fit = fit_plane(&x1, &x2, &ys).unwrap();
        assert!((fit.s - 2.0).abs() < 1e-10);
        assert!((fit.t + 3.0).abs() < 1e-10);
    }

    #[test]
    fn degenerate_fits_refused() {
        assert!(fit_line(&[1.0], &[2.0]).is_none());
        assert!(fit_line(&[1.0, 1.0], &[2.0, 3.0]).is_none());
    }

    #[test]
    fn harmonic_small() {
        assert_eq!(harmonic(0), 0.0);
        assert!((harmonic(4) - 25.0 / 12.0).abs() < 1e-15);
    }
}
