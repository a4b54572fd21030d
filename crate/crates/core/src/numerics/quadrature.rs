//! Globally adaptive Gauss–Kronrod (10/21 point) quadrature.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{domain, LinkageError, Result};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_1,
    0.973_906_528_517_171_7,
    0.930_157_491_355_708_2,
    0.865_063_366_688_984_5,
    0.780_817_726_586_416_9,
    0.679_409_568_299_024_4,
    0.562_757_134_668_604_7,
    0.433_395_394_129_247_2,
    0.294_392_862_701_460_2,
    0.148_874_338_981_631_2,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874,
    0.032_558_162_307_964_725,
    0.054_755_896_574_351_995,
    0.075_039_674_810_919_96,
    0.093_125_454_583_697_6,
    0.109_387_158_802_297_64,
    0.123_491_976_262_065_84,
    0.134_709_217_311_473_34,
    0.142_775_938_577_060_09,
    0.147_739_104_901_338_49,
    0.149_445_554_002_916_9,
];

/// Weights of the embedded 10-point Gauss rule (nodes `XGK[1]`, `XGK[3]`, ...).
const WG: [f64; 5] = [
    0.066_671_344_308_688_14,
    0.149_451_349_150_580_6,
    0.219_086_362_515_982_04,
    0.269_266_719_309_996_35,
    0.295_524_224_714_752_87,
];

const EVALS_PER_RULE: usize = 21;

/// Outcome of a successful integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    /// Absolute error estimate, always `>= 0`.
    pub error_estimate: f64,
    /// Number of integrand evaluations, always `>= 1`.
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Segments at this bisection depth are not refined further.
    pub max_depth: u32,
    pub max_segments: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-300,
            max_depth: 50,
            max_segments: 4000,
        }
    }
}

impl QuadratureOptions {
    pub fn with_tolerances(rel_tol: f64, abs_tol: f64) -> Self {
        Self {
            rel_tol,
            abs_tol,
            ..Self::default()
        }
    }

    fn target(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
    depth: u32,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn checked<F: Fn(f64) -> f64>(f: &F, x: f64) -> Result<f64> {
    let v = f(x);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(domain(format!(
            "integrand is not finite at interior point {x}"
        )))
    }
}

/// Applies the 21-point Kronrod rule on `[lo, hi]`; returns the Kronrod value
/// and the QUADPACK-style error estimate.
fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> Result<(f64, f64)> {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);

    let fc = checked(f, center)?;
    let mut kronrod = fc * WGK[10];
    let mut gauss = 0.0;
    let mut res_abs = kronrod.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];

    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = checked(f, center - dx)?;
        let f2 = checked(f, center + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        kronrod += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }

    let mean = 0.5 * kronrod;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let scale = half.abs();
    let value = kronrod * half;
    let res_abs = res_abs * scale;
    let res_asc = res_asc * scale;
    let mut err = ((kronrod - gauss) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    Ok((value, err))
}

/// Moves a singular endpoint inward until the neglected strip carries less
/// than `budget`. The strip mass is estimated as `2 ε |f(x ± ε)|`, which
/// bounds `∫ t^{-p}` for `p ≤ 1/2` and is of the right order for `p < 1`.
fn trim_endpoint<F: Fn(f64) -> f64>(
    f: &F,
    edge: f64,
    other: f64,
    budget: f64,
    evaluations: &mut usize,
) -> Result<f64> {
    let direction = (other - edge).signum();
    let mut eps = 1e-3 * (other - edge).abs();
    loop {
        let x = edge + direction * eps;
        if x == edge {
            return Err(LinkageError::Convergence {
                what: "endpoint singularity trimming",
                estimate: f64::NAN,
                error_estimate: f64::INFINITY,
            });
        }
        let fx = f(x);
        *evaluations += 1;
        if fx.is_finite() && 2.0 * eps * fx.abs() <= budget {
            return Ok(x);
        }
        eps *= 0.25;
    }
}

/// Integrates `f` over `[lo, hi]` with default depth and segment limits.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<QuadratureResult> {
    integrate_with(
        f,
        &[lo, hi],
        &QuadratureOptions::with_tolerances(rel_tol, abs_tol),
    )
}

/// Integrates `f` over `[points[0], points[last]]`, seeding the adaptive
/// scheme with the segments between consecutive `points`.
///
/// Breakpoints let callers put a node next to a narrow peak that a single
/// 21-point rule over the full range would step over.
///
/// If `f` is not finite at one of the outer endpoints, that endpoint is moved
/// inward until the neglected strip is estimated to hold less than a quarter
/// of `abs_tol`.
pub fn integrate_with<F: Fn(f64) -> f64>(
    f: F,
    points: &[f64],
    opts: &QuadratureOptions,
) -> Result<QuadratureResult> {
    if points.len() < 2 {
        return Err(domain("integration needs at least two points"));
    }
    if points.iter().any(|p| !p.is_finite()) {
        return Err(domain("integration limits must be finite"));
    }
    if points.windows(2).any(|w| w[0] >= w[1]) {
        return Err(domain(format!(
            "integration points must be strictly increasing, got {points:?}"
        )));
    }
    if !(opts.rel_tol >= 0.0 && opts.abs_tol >= 0.0) {
        return Err(domain("tolerances must be nonnegative"));
    }

    let mut pts = points.to_vec();
    let last = pts.len() - 1;
    let mut evaluations = 2;
    let budget = 0.25 * opts.abs_tol;
    if !f(pts[0]).is_finite() {
        pts[0] = trim_endpoint(&f, pts[0], pts[1], budget, &mut evaluations)?;
    }
    if !f(pts[last]).is_finite() {
        pts[last] = trim_endpoint(&f, pts[last], pts[last - 1], budget, &mut evaluations)?;
    }

    let mut heap = BinaryHeap::with_capacity(opts.max_segments);
    for w in pts.windows(2) {
        let (value, error) = gauss_kronrod(&f, w[0], w[1])?;
        evaluations += EVALS_PER_RULE;
        heap.push(Segment {
            lo: w[0],
            hi: w[1],
            value,
            error,
            depth: 0,
        });
    }
    let mut frozen: Vec<Segment> = Vec::new();

    loop {
        let value: f64 = heap.iter().chain(frozen.iter()).map(|s| s.value).sum();
        let error: f64 = heap.iter().chain(frozen.iter()).map(|s| s.error).sum();
        if error <= opts.target(value) {
            return Ok(QuadratureResult {
                value,
                error_estimate: error,
                evaluations,
            });
        }
        let exhausted = heap.len() + frozen.len() >= opts.max_segments;
        let worst = match heap.pop() {
            Some(s) if !exhausted => s,
            _ => {
                return Err(LinkageError::Convergence {
                    what: "adaptive quadrature",
                    estimate: value,
                    error_estimate: error,
                })
            }
        };
        let mid = 0.5 * (worst.lo + worst.hi);
        if worst.depth >= opts.max_depth || mid <= worst.lo || mid >= worst.hi {
            frozen.push(worst);
            continue;
        }
        for (lo, hi) in [(worst.lo, mid), (mid, worst.hi)] {
            let (value, error) = gauss_kronrod(&f, lo, hi)?;
            evaluations += EVALS_PER_RULE;
            heap.push(Segment {
                lo,
                hi,
                value,
                error,
                depth: worst.depth + 1,
            });
        }
    }
}
