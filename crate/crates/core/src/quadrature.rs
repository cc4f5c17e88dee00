//! Fixed Gauss–Legendre rules and a vector-valued adaptive Gauss–Kronrod
//! integrator.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Computes the `n`-point rule by Newton iteration on `P_n`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi's initial guess for the i-th root
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p, d)
}

// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK qk15).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Result of an adaptive integration.
#[derive(Debug, Clone, PartialEq)]
pub struct Integral {
    pub value: Vec<f64>,
    pub error: Vec<f64>,
    pub evaluations: usize,
    pub intervals: usize,
}

#[derive(Debug, Clone)]
struct Panel {
    a: f64,
    b: f64,
    value: Vec<f64>,
    error: Vec<f64>,
    // worst error-to-tolerance ratio over the components
    badness: f64,
}

/// Settings for [`integrate_adaptive`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveOptions {
    /// Absolute tolerance applied to every component.
    pub abs_tol: f64,
    /// Relative tolerance applied to every component.
    pub rel_tol: f64,
    pub max_intervals: usize,
    /// Number of equal panels the range is split into before refinement.
    pub initial_panels: usize,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        AdaptiveOptions {
            abs_tol: 1e-9,
            rel_tol: 0.0,
            max_intervals: 4000,
            initial_panels: 8,
        }
    }
}

/// Integrates the vector-valued `f` over `[a, b]` with globally adaptive
/// 7/15-point Gauss–Kronrod panels.
///
/// `f(x, out)` writes all `dim` components at `x`. Every component shares
/// the same nodes, so expensive per-node work is done once. Refinement
/// stops when each component's summed error is within
/// `max(abs_tol, rel_tol·|value|)`.
pub fn integrate_adaptive<F>(
    mut f: F,
    dim: usize,
    a: f64,
    b: f64,
    opts: &AdaptiveOptions,
) -> Result<Integral>
where
    F: FnMut(f64, &mut [f64]),
{
    if !(a.is_finite() && b.is_finite()) || b < a {
        return Err(Error::param("interval", "need finite a <= b"));
    }
    let mut evaluations = 0;
    if dim == 0 || a == b {
        return Ok(Integral {
            value: vec![0.0; dim],
            error: vec![0.0; dim],
            evaluations,
            intervals: 0,
        });
    }

    let mut scratch = vec![0.0; dim];
    let mut panel = |a: f64, b: f64, evals: &mut usize| -> (Vec<f64>, Vec<f64>) {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut kron = vec![0.0; dim];
        let mut gauss = vec![0.0; dim];
        for (j, (&x, &wk)) in XGK.iter().zip(&WGK).enumerate() {
            let signs: &[f64] = if x == 0.0 { &[1.0] } else { &[-1.0, 1.0] };
            for &s in signs {
                f(mid + s * half * x, &mut scratch);
                *evals += 1;
                for c in 0..dim {
                    kron[c] += wk * scratch[c];
                    if j % 2 == 1 {
                        gauss[c] += WG[j / 2] * scratch[c];
                    }
                }
            }
        }
        let err = kron
            .iter()
            .zip(&gauss)
            .map(|(k, g)| (half * (k - g)).abs())
            .collect();
        (kron.into_iter().map(|k| k * half).collect(), err)
    };

    let n0 = opts.initial_panels.max(1);
    let width = (b - a) / n0 as f64;
    let mut panels: Vec<Panel> = Vec::with_capacity(opts.max_intervals.min(4096));
    for i in 0..n0 {
        let pa = a + i as f64 * width;
        let pb = if i + 1 == n0 { b } else { pa + width };
        let (value, error) = panel(pa, pb, &mut evaluations);
        panels.push(Panel {
            a: pa,
            b: pb,
            value,
            error,
            badness: 0.0,
        });
    }

    loop {
        let mut total = vec![0.0; dim];
        let mut total_err = vec![0.0; dim];
        for p in &panels {
            for c in 0..dim {
                total[c] += p.value[c];
                total_err[c] += p.error[c];
            }
        }
        let tol: Vec<f64> = total
            .iter()
            .map(|v| opts.abs_tol.max(opts.rel_tol * v.abs()))
            .collect();
        let converged = total_err.iter().zip(&tol).all(|(e, t)| e <= t);
        if converged {
            return Ok(Integral {
                value: total,
                error: total_err,
                evaluations,
                intervals: panels.len(),
            });
        }
        if panels.len() >= opts.max_intervals {
            let worst = total_err
                .iter()
                .zip(&tol)
                .map(|(e, t)| e / t)
                .fold(0.0, f64::max);
            return Err(Error::Numerical {
                context: "adaptive quadrature",
                detail: alloc::format!(
                    "no convergence after {} panels / {} evaluations on [{a}, {b}]; \
                     worst error/tolerance ratio {worst:.3e}",
                    panels.len(),
                    evaluations
                ),
            });
        }
        for p in panels.iter_mut() {
            p.badness = p
                .error
                .iter()
                .zip(&tol)
                .map(|(e, t)| e / t)
                .fold(0.0, f64::max);
        }
        let (worst, _) =
            panels
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, p)| {
                    if p.badness > bv {
                        (i, p.badness)
                    } else {
                        (bi, bv)
                    }
                });
        let old = panels.swap_remove(worst);
        let mid = 0.5 * (old.a + old.b);
        if !(mid > old.a && mid < old.b) {
            return Err(Error::Numerical {
                context: "adaptive quadrature",
                detail: alloc::format!("panel [{}, {}] cannot be bisected further", old.a, old.b),
            });
        }
        for (pa, pb) in [(old.a, mid), (mid, old.b)] {
            let (value, error) = panel(pa, pb, &mut evaluations);
            panels.push(Panel {
                a: pa,
                b: pb,
                value,
                error,
                badness: 0.0,
            });
        }
    }
}

/// Scalar convenience wrapper around [`integrate_adaptive`].
pub fn integrate_scalar<F>(mut f: F, a: f64, b: f64, opts: &AdaptiveOptions) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> f64,
{
    let r = integrate_adaptive(|x, out| out[0] = f(x), 1, a, b, opts)?;
    Ok((r.value[0], r.error[0]))
}
