//! Adaptive Gauss–Kronrod (7/15) quadrature with global error-driven
//! bisection, plus the `t = 1 - e^{-u}` map used for integrands with an
//! integrable singularity at `t = 1`.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_3,
    0.949_107_912_342_758_524_526_189_684_047_9,
    0.864_864_423_359_769_072_789_712_788_640_9,
    0.741_531_185_599_394_439_863_864_773_280_8,
    0.586_087_235_467_691_130_294_144_845_693_0,
    0.405_845_151_377_397_166_906_606_412_076_96,
    0.207_784_955_007_898_467_600_689_403_773_2,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_97,
    0.063_092_092_629_978_553_290_700_663_189_2,
    0.104_790_010_322_250_183_839_876_322_541_5,
    0.140_653_259_715_525_918_745_189_590_510_2,
    0.169_004_726_639_267_902_826_583_426_598_6,
    0.190_350_578_064_785_409_913_256_402_421_0,
    0.204_432_940_075_298_892_414_161_999_234_6,
    0.209_482_141_084_727_828_012_999_174_891_7,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_1,
    0.279_705_391_489_276_667_901_467_771_423_8,
    0.381_830_050_505_118_944_950_369_775_489_0,
    0.417_959_183_673_469_387_755_102_040_816_3,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-13,
            rel_tol: 1e-11,
            max_intervals: 4000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    for j in 0..7 {
        let x = half * XGK[j];
        let sum = f(center - x) + f(center + x);
        res_k += WGK[j] * sum;
        if j % 2 == 1 {
            res_g += WG[j / 2] * sum;
        }
    }
    let value = res_k * half;
    let error = ((res_k - res_g) * half).abs();
    Segment { a, b, value, error }
}

/// Integrate `f` over `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, opts: QuadOptions) -> Result<QuadResult> {
    integrate_with_breaks(f, &[a, b], opts)
}

/// Integrate over consecutive panels `[p0,p1], [p1,p2], ...`; extra break
/// points let the caller place a known feature on a panel boundary.
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(
    f: F,
    points: &[f64],
    opts: QuadOptions,
) -> Result<QuadResult> {
    assert!(points.len() >= 2, "need at least one panel");
    let mut segs: Vec<Segment> = points
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| kronrod15(&f, w[0], w[1]))
        .collect();
    if segs.is_empty() {
        return Ok(QuadResult { value: 0.0, error: 0.0, intervals: 0 });
    }
    loop {
        let total: f64 = crate::numeric::sum_f64(segs.iter().map(|s| s.value));
        let err: f64 = segs.iter().map(|s| s.error).sum();
        if !total.is_finite() {
            return Err(Error::Quadrature(format!(
                "non-finite integrand value on [{}, {}]",
                points[0],
                points[points.len() - 1]
            )));
        }
        let tol = opts.abs_tol.max(opts.rel_tol * total.abs());
        if err <= tol {
            return Ok(QuadResult { value: total, error: err, intervals: segs.len() });
        }
        if segs.len() >= opts.max_intervals {
            return Err(Error::Quadrature(format!(
                "error estimate {err:.3e} above tolerance {tol:.3e} after {} intervals",
                segs.len()
            )));
        }
        // bisect the worst segment; ties resolved by position for determinism
        let (idx, worst) = segs
            .iter()
            .enumerate()
            .fold((0usize, segs[0]), |(bi, bs), (i, s)| {
                if s.error > bs.error {
                    (i, *s)
                } else {
                    (bi, bs)
                }
            });
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            return Err(Error::Quadrature("interval underflow".into()));
        }
        let left = kronrod15(&f, worst.a, mid);
        let right = kronrod15(&f, mid, worst.b);
        segs[idx] = left;
        segs.insert(idx + 1, right);
    }
}

/// `∫_0^1 f(t) dt` through `t = 1 - e^{-u}`, `u ∈ [0, u_max]`.
///
/// `f` receives both `t` and `1 - t = e^{-u}` so the endpoint factor is
/// available without cancellation. `features` are values of `1 - t` near
/// which the integrand changes scale; they become panel boundaries.
pub fn integrate_to_one<F: Fn(f64, f64) -> f64>(
    f: F,
    u_max: f64,
    features: &[f64],
    opts: QuadOptions,
) -> Result<QuadResult> {
    let mut pts = vec![0.0];
    let mut cuts: Vec<f64> = features
        .iter()
        .filter(|&&s| s > 0.0 && s < 1.0)
        .map(|s| -s.ln())
        .filter(|&u| u > 0.0 && u < u_max)
        .collect();
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // unit-length panels around each cut keep the Kronrod rule local
    for u in cuts {
        for p in [u - 2.0, u, u + 2.0] {
            if p > *pts.last().unwrap() && p < u_max {
                pts.push(p);
            }
        }
    }
    pts.push(u_max);
    integrate_with_breaks(
        |u| {
            let s = (-u).exp();
            let t = -(-u).exp_m1();
            f(t, s) * s
        },
        &pts,
        opts,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let r = integrate(|x| 3.0 * x * x + 1.0, 0.0, 2.0, QuadOptions::default()).unwrap();
        assert!((r.value - 10.0).abs() < 1e-13);
    }

    #[test]
    fn oscillatory() {
        let r = integrate(|x: f64| (20.0 * x).cos(), 0.0, 1.0, QuadOptions::default()).unwrap();
        assert!((r.value - (20.0f64).sin() / 20.0).abs() < 1e-12);
    }

    #[test]
    fn endpoint_singular_power() {
        // ∫_0^1 (1-t)^{-1/2} dt = 2
        let r = integrate_to_one(|_, s| s.powf(-0.5), 80.0, &[], QuadOptions::default()).unwrap();
        assert!((r.value - 2.0).abs() < 1e-10, "{}", r.value);
    }

    #[test]
    fn endpoint_log_weight() {
        // ∫_0^1 log(1/(1-t)) dt = 1
        let r = integrate_to_one(|_, s| -s.ln(), 60.0, &[], QuadOptions::default()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-11);
    }

    #[test]
    fn reports_nonconvergence() {
        let opts = QuadOptions { max_intervals: 3, ..Default::default() };
        assert!(integrate(|x: f64| (1.0 / (x + 1e-9)).sin(), 0.0, 1.0, opts).is_err());
    }

    #[test]
    fn repeated_calls_bit_identical() {
        let f = |t: f64, s: f64| s.powf(-0.3) * (1.0 - s.ln()) / (1.0 - 0.999 * t).powi(2);
        let a = integrate_to_one(f, 50.0, &[1e-3], QuadOptions::default()).unwrap();
        let b = integrate_to_one(f, 50.0, &[1e-3], QuadOptions::default()).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
    }
}
