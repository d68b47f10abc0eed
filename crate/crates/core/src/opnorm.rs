//! Truncated operator norms of `H_g : D²_α → D²_β` by power iteration,
//! their behaviour across truncations, and finite-section tail norms.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coeffspace::{dirichlet_weight, CoefficientSequence};
use crate::error::{Error, Result};
use crate::hilbertop::diagonal;
use crate::numeric::fit_line;

/// Relative tolerance on the Rayleigh quotient.
pub const RQ_TOL: f64 = 1e-8;
pub const MAX_ITER: usize = 10_000;
/// Seeds for the randomized restarts, in order.
pub const RESTART_SEEDS: [u64; 3] = [0x5eed_0001, 0x5eed_0002, 0x5eed_0003];
/// Per-doubling relative increase under which a curve counts as saturated.
pub const SATURATION_STEP: f64 = 0.005;
/// Log-log slope over which a curve counts as growing.
pub const GROWTH_SLOPE: f64 = 0.05;

/// Symmetric positive semidefinite operator `AᵀA`, applied matrix-free.
pub trait Gram: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], out: &mut [f64]);
}

/// Dense real matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }
}

impl Gram for DenseMatrix {
    fn dim(&self) -> usize {
        self.cols
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        let ax: Vec<f64> = (0..self.rows).map(|i| dot(self.row(i), x)).collect();
        out.iter_mut().for_each(|o| *o = 0.0);
        for (i, &a) in ax.iter().enumerate() {
            for (o, m) in out.iter_mut().zip(self.row(i)) {
                *o += m * a;
            }
        }
    }
}

/// Fixed-order dot product with four partial sums.
#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [0.0f64; 4];
    let chunks = n / 4;
    for c in 0..chunks {
        let i = 4 * c;
        acc[0] += a[i] * b[i];
        acc[1] += a[i + 1] * b[i + 1];
        acc[2] += a[i + 2] * b[i + 2];
        acc[3] += a[i + 3] * b[i + 3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for i in 4 * chunks..n {
        s += a[i] * b[i];
    }
    s
}

/// `A = Diag(l)·H·Diag(r)` with `H` the Hilbert matrix on indices `0..n`;
/// rows with `l_n = 0` drop out.
#[derive(Debug, Clone)]
pub struct WeightedHankel {
    left_sq: Vec<f64>,
    right: Vec<f64>,
    inv: Vec<f64>,
}

impl WeightedHankel {
    pub fn new(left: Vec<f64>, right: Vec<f64>) -> Self {
        let n = left.len().max(right.len());
        let inv = (0..2 * n).map(|m| 1.0 / (m + 1) as f64).collect();
        Self { left_sq: left.iter().map(|l| l * l).collect(), right, inv }
    }

    /// Weighted section for `H_g : D²_α → D²_β` on indices `0..=n`.
    pub fn operator(g: &CoefficientSequence, alpha: f64, beta: f64, n: usize) -> Self {
        let d = diagonal(g, n + 1);
        let left = (0..=n).map(|i| dirichlet_weight(i, beta).sqrt() * d[i].norm()).collect();
        let right = (0..=n).map(|k| dirichlet_weight(k, alpha).sqrt().recip()).collect();
        Self::new(left, right)
    }

    fn hankel(&self, x: &[f64], rows: usize) -> Vec<f64> {
        let inv = &self.inv;
        (0..rows).into_par_iter().map(|i| dot(&inv[i..i + x.len()], x)).collect()
    }

    pub fn zero_rows_below(&mut self, t: usize) {
        for v in self.left_sq.iter_mut().take(t) {
            *v = 0.0;
        }
    }
}

impl Gram for WeightedHankel {
    fn dim(&self) -> usize {
        self.right.len()
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        let rows = self.left_sq.len();
        let rx: Vec<f64> = x.iter().zip(&self.right).map(|(a, r)| a * r).collect();
        let mut y = self.hankel(&rx, rows);
        for (v, l) in y.iter_mut().zip(&self.left_sq) {
            *v *= l;
        }
        // trailing zero rows do not contribute
        let live = y.iter().rposition(|v| *v != 0.0).map_or(0, |p| p + 1);
        let z = self.hankel(&y[..live], self.right.len());
        for ((o, v), r) in out.iter_mut().zip(z).zip(&self.right) {
            *o = v * r;
        }
    }
}

/// Largest singular value estimate with convergence metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerResult {
    pub norm: f64,
    pub iterations: usize,
    pub converged: bool,
    pub restarts: usize,
    pub vector: Vec<f64>,
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = dot(v, v).sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

struct Run {
    lambda: f64,
    x: Vec<f64>,
    iterations: usize,
    converged: bool,
}

fn iterate<G: Gram + ?Sized>(op: &G, mut x: Vec<f64>, max_iter: usize) -> Run {
    let n = op.dim();
    if normalize(&mut x) == 0.0 {
        x = vec![1.0 / (n as f64).sqrt(); n];
    }
    let mut y = vec![0.0; n];
    let mut lambda = 0.0;
    let mut prev_delta = f64::NAN;
    for it in 1..=max_iter {
        op.apply(&x, &mut y);
        let next = dot(&x, &y);
        let norm_y = normalize(&mut y);
        if norm_y == 0.0 {
            return Run { lambda: 0.0, x, iterations: it, converged: true };
        }
        std::mem::swap(&mut x, &mut y);
        let delta = next - lambda;
        lambda = next.max(lambda);
        if it >= 2 && delta.abs() <= 1e-15 * lambda {
            return Run { lambda, x, iterations: it, converged: true };
        }
        if it >= 3 && delta >= 0.0 && prev_delta > 0.0 {
            // geometric remainder estimate Δ ρ/(1-ρ)
            let rho = (delta / prev_delta).min(0.999_999);
            let remainder = delta * rho / (1.0 - rho);
            if delta <= RQ_TOL * lambda && remainder <= RQ_TOL * lambda {
                return Run { lambda, x, iterations: it, converged: true };
            }
        }
        prev_delta = delta;
    }
    Run { lambda, x, iterations: max_iter, converged: false }
}

/// Power iteration on `AᵀA`, restarting from seeded random vectors when the
/// first run does not converge; returns the best lower bound seen.
pub fn power_iteration<G: Gram + ?Sized>(op: &G, start: Option<Vec<f64>>, max_iter: usize) -> PowerResult {
    let n = op.dim();
    let x0 = start.unwrap_or_else(|| vec![1.0; n]);
    let mut best = iterate(op, x0, max_iter);
    let mut total = best.iterations;
    let mut restarts = 0;
    for seed in RESTART_SEEDS {
        if best.converged {
            break;
        }
        restarts += 1;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let run = iterate(op, x, max_iter);
        total += run.iterations;
        if run.converged || run.lambda > best.lambda {
            best = Run { lambda: run.lambda.max(best.lambda), ..run };
        }
    }
    PowerResult {
        norm: best.lambda.max(0.0).sqrt(),
        iterations: total,
        converged: best.converged,
        restarts,
        vector: best.x,
    }
}

/// One point of a truncated-norm curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormPoint {
    pub n: usize,
    pub norm: f64,
    pub iterations: usize,
    pub converged: bool,
    pub restarts: usize,
}

/// `‖A_N‖` for each `N` in `truncations` (ascending), where `A_N` is the
/// weighted section on indices `0..=N`. Each point starts from the previous
/// maximizer padded with zeros, so the curve is nondecreasing.
pub fn weighted_norm_curve(g: &CoefficientSequence, alpha: f64, beta: f64, truncations: &[usize]) -> Result<Vec<NormPoint>> {
    if truncations.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::ParameterRange("truncations must be strictly ascending".into()));
    }
    let mut out: Vec<NormPoint> = Vec::with_capacity(truncations.len());
    let mut warm: Option<Vec<f64>> = None;
    for &n in truncations {
        let op = WeightedHankel::operator(g, alpha, beta, n);
        let start = warm.take().map(|mut v| {
            v.resize(n + 1, 0.0);
            v
        });
        let r = power_iteration(&op, start, MAX_ITER);
        let floor = out.last().map_or(0.0, |p| p.norm);
        out.push(NormPoint {
            n,
            norm: r.norm.max(floor),
            iterations: r.iterations,
            converged: r.converged,
            restarts: r.restarts,
        });
        warm = Some(r.vector);
    }
    Ok(out)
}

/// Largest `D²_β`-weighted column norm of the `(N+1)`-row section, rows `≥ t`.
pub fn wiener_source_tail_norm(g: &CoefficientSequence, beta: f64, n: usize, t: usize) -> f64 {
    let d = diagonal(g, n + 1);
    let w: Vec<f64> = (0..=n).map(|i| if i < t { 0.0 } else { dirichlet_weight(i, beta) * d[i].norm_sqr() }).collect();
    (0..=n)
        .map(|k| {
            let s: f64 = crate::numeric::sum_f64(
                w.iter().enumerate().map(|(i, wi)| wi / ((i + k + 1) as f64).powi(2)),
            );
            s.sqrt()
        })
        .fold(0.0, f64::max)
}

/// Norm of the truncated operator from the Wiener algebra into `D²_β`.
pub fn wiener_source_norm(g: &CoefficientSequence, beta: f64, n: usize) -> f64 {
    wiener_source_tail_norm(g, beta, n, 0)
}

/// `(T, ‖tail‖)` for the Wiener-source section with rows `< T` removed.
pub fn wiener_section_decay(g: &CoefficientSequence, beta: f64, n_op: usize, tail_starts: &[usize]) -> Vec<(usize, f64)> {
    tail_starts.iter().map(|&t| (t, wiener_source_tail_norm(g, beta, n_op, t))).collect()
}

/// `(T, ‖A − A_T‖)`: spectral norm of the section with rows `< T` zeroed.
pub fn finite_section_decay(
    g: &CoefficientSequence,
    alpha: f64,
    beta: f64,
    n_op: usize,
    tail_starts: &[usize],
) -> Result<Vec<NormPoint>> {
    let mut out = Vec::with_capacity(tail_starts.len());
    for &t in tail_starts {
        let mut op = WeightedHankel::operator(g, alpha, beta, n_op);
        op.zero_rows_below(t);
        let r = power_iteration(&op, None, MAX_ITER);
        out.push(NormPoint { n: t, norm: r.norm, iterations: r.iterations, converged: r.converged, restarts: r.restarts });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CurveShape {
    Saturating,
    Growing,
    Undetermined,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSummary {
    pub shape: CurveShape,
    /// Relative increases over the last three doublings.
    pub last_increases: Vec<f64>,
    /// Log-log slope over the last four points.
    pub slope: f64,
}

/// Saturation and growth heuristics for a curve on a doubling ladder.
pub fn classify_curve(points: &[NormPoint]) -> CurveSummary {
    let tail = &points[points.len().saturating_sub(4)..];
    let last_increases: Vec<f64> = tail.windows(2).map(|w| w[1].norm / w[0].norm - 1.0).collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = tail
        .iter()
        .filter(|p| p.norm > 0.0)
        .map(|p| ((p.n as f64).ln(), p.norm.ln()))
        .unzip();
    let slope = fit_line(&xs, &ys).map_or(0.0, |f| f.slope);
    let shape = if last_increases.len() == 3 && last_increases.iter().all(|&d| d < SATURATION_STEP) {
        CurveShape::Saturating
    } else if slope > GROWTH_SLOPE {
        CurveShape::Growing
    } else {
        CurveShape::Undetermined
    };
    CurveSummary { shape, last_increases, slope }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffspace::SymbolSpec;

    #[test]
    fn two_by_two_hilbert() {
        let g = SymbolSpec::Log.expand(8).unwrap();
        let c = weighted_norm_curve(&g, 1.0, 1.0, &[1]).unwrap();
        let exact = 2.0 / 3.0 + 13f64.sqrt() / 6.0;
        assert!((c[0].norm - exact).abs() < 1e-7, "{}", c[0].norm);
        assert!(c[0].converged);
    }

    #[test]
    fn rank_one_closed_form() {
        let g = CoefficientSequence::from_real(&[0.0, 1.0]).unwrap();
        for (a, b) in [(1.0, 1.0), (0.5, 0.3), (-1.0, 2.0)] {
            let n = 50;
            let c = weighted_norm_curve(&g, a, b, &[n]).unwrap();
            let s: f64 = (0..=n).map(|k| 1.0 / (dirichlet_weight(k, a) * ((k + 1) as f64).powi(2))).sum();
            let exact = dirichlet_weight(0, b).sqrt() * s.sqrt();
            assert!((c[0].norm - exact).abs() < 1e-7 * exact);
        }
    }

    #[test]
    fn curve_monotone_and_homogeneous() {
        let g = SymbolSpec::Log.expand(300).unwrap();
        let ns = [4, 8, 16, 32, 64, 128, 256];
        let c = weighted_norm_curve(&g, 1.0, 1.0, &ns).unwrap();
        assert!(c.windows(2).all(|w| w[1].norm >= w[0].norm));
        let g3 = g.scale(num_complex::Complex64::new(0.0, -3.0));
        let c3 = weighted_norm_curve(&g3, 1.0, 1.0, &ns).unwrap();
        for (p, q) in c.iter().zip(&c3) {
            assert!((q.norm - 3.0 * p.norm).abs() < 1e-7 * q.norm);
        }
    }

    #[test]
    fn wiener_examples() {
        let g = CoefficientSequence::from_real(&[0.0, 0.0, 1.0]).unwrap();
        assert!((wiener_source_norm(&g, 1.0, 10) - 1.0).abs() < 1e-15);
        // w_β(1) = 1 for every β
        assert!((wiener_source_norm(&g, 3.0, 10) - 1.0).abs() < 1e-15);
        let zero = CoefficientSequence::constant(0.0);
        assert_eq!(wiener_source_norm(&zero, 1.0, 10), 0.0);
    }

    #[test]
    fn poly_decay_vanishes() {
        let g = CoefficientSequence::from_real(&[0.0, 1.0, 2.0, 3.0]).unwrap();
        let d = finite_section_decay(&g, 1.0, 1.0, 64, &[0, 1, 2, 3, 4, 8]).unwrap();
        assert!(d[0].norm > 0.0 && d[2].norm > 0.0);
        assert_eq!(d[3].norm, 0.0);
        assert_eq!(d[5].norm, 0.0);
    }

    #[test]
    fn classify_synthetic_curves() {
        let pts = |f: &dyn Fn(f64) -> f64| -> Vec<NormPoint> {
            (4..=12)
                .map(|j| {
                    let n = 1usize << j;
                    NormPoint { n, norm: f(n as f64), iterations: 0, converged: true, restarts: 0 }
                })
                .collect()
        };
        assert_eq!(classify_curve(&pts(&|n| 2.0 - 1.0 / n)).shape, CurveShape::Saturating);
        assert_eq!(classify_curve(&pts(&|n| n.powf(0.2))).shape, CurveShape::Growing);
    }
}
