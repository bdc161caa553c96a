//! Adaptive Gauss–Kronrod quadrature for piecewise-smooth integrands.
//!
//! Integrals are split at every supplied breakpoint (jumps of the integrand,
//! kinks at maxima of the potential, edges of vacuum regions) and each piece
//! is refined by global adaptive bisection driven by the 7/15-point
//! Gauss–Kronrod error estimate.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::OnceLock;

use crate::error::{MfgError, Result};

/// Default absolute tolerance of [`integrate`].
pub const DEFAULT_TOL: f64 = 1e-10;

/// Tolerance used internally by the mass-matching and switching solvers.
pub const SOLVER_TOL: f64 = 1e-12;

const MAX_INTERVALS: usize = 4000;

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
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Quadrature tolerance, overridable through `MFG1D_QUAD_TOL`.
pub fn default_tol() -> f64 {
    static TOL: OnceLock<f64> = OnceLock::new();
    *TOL.get_or_init(|| {
        std::env::var("MFG1D_QUAD_TOL")
            .ok()
            .and_then(|s| s.trim().parse::<f64>().ok())
            .filter(|t| t.is_finite() && *t > 0.0)
            .unwrap_or(DEFAULT_TOL)
    })
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
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

fn checked<F>(f: &mut F, x: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let y = f(x)?;
    if y.is_finite() {
        Ok(y)
    } else {
        Err(MfgError::NonFinite { x })
    }
}

fn kronrod<F>(f: &mut F, a: f64, b: f64) -> Result<Segment>
where
    F: FnMut(f64) -> Result<f64>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = checked(f, center)?;
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    for (i, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let f1 = checked(f, center - dx)?;
        let f2 = checked(f, center + dx)?;
        res_k += w * (f1 + f2);
        if i % 2 == 1 {
            res_g += WG[i / 2] * (f1 + f2);
        }
    }
    let value = res_k * half;
    let error = ((res_k - res_g) * half).abs();
    Ok(Segment { a, b, value, error })
}

/// Integrates a fallible integrand over `[a, b]`, splitting at `breaks`.
pub fn try_integrate<F>(mut f: F, a: f64, b: f64, breaks: &[f64], tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(MfgError::InvalidInput(format!(
            "integration limits must be finite, got [{a}, {b}]"
        )));
    }
    if a == b {
        return Ok(0.0);
    }
    if a > b {
        return try_integrate(f, b, a, breaks, tol).map(|v| -v);
    }
    let mut points = vec![a];
    let mut inner: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|&x| x > a && x < b)
        .collect();
    inner.sort_by(f64::total_cmp);
    for x in inner {
        if x - points[points.len() - 1] > 1e-14 * (1.0 + x.abs()) {
            points.push(x);
        }
    }
    if b - points[points.len() - 1] <= 1e-14 * (1.0 + b.abs()) && points.len() > 1 {
        points.pop();
    }
    points.push(b);

    let mut heap = BinaryHeap::new();
    let mut total = 0.0;
    let mut total_err = 0.0;
    for w in points.windows(2) {
        let seg = kronrod(&mut f, w[0], w[1])?;
        total += seg.value;
        total_err += seg.error;
        heap.push(seg);
    }
    while heap.len() < MAX_INTERVALS {
        let floor = 64.0 * f64::EPSILON * total.abs();
        if total_err <= tol.max(floor) {
            break;
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            heap.push(worst);
            break;
        }
        let left = kronrod(&mut f, worst.a, mid)?;
        let right = kronrod(&mut f, mid, worst.b)?;
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
    // Re-sum to shed the cancellation accumulated by incremental updates.
    Ok(heap.iter().map(|s| s.value).sum())
}

/// Integrates `f` over `[a, b]`, splitting at `breaks`, to absolute error `tol`.
pub fn integrate<F>(mut f: F, a: f64, b: f64, breaks: &[f64], tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    try_integrate(|x| Ok(f(x)), a, b, breaks, tol)
}

/// Integrates a 1-periodic integrand over the arc `[start, start + len]`.
///
/// `breaks` are given modulo 1 and are lifted onto every period the arc
/// touches. The integrand is always evaluated at arguments reduced to `[0, 1)`.
pub fn try_integrate_arc<F>(mut f: F, start: f64, len: f64, breaks: &[f64], tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let end = start + len;
    let lo = start.min(end);
    let hi = start.max(end);
    let mut lifted = Vec::new();
    let k0 = lo.floor() as i64 - 1;
    let k1 = hi.ceil() as i64 + 1;
    for k in k0..=k1 {
        lifted.push(k as f64);
        for &b in breaks {
            lifted.push(k as f64 + b.rem_euclid(1.0));
        }
    }
    try_integrate(|x| f(x.rem_euclid(1.0)), start, end, &lifted, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn zero_mean_sine() {
        let v = integrate(|x| (2.0 * PI * (x + 0.25)).sin(), 0.0, 1.0, &[], 1e-12).unwrap();
        assert!(v.abs() < 1e-13);
    }

    #[test]
    fn constant_one() {
        let v = integrate(|_| 1.0, 0.0, 1.0, &[], 1e-12).unwrap();
        assert!((v - 1.0).abs() < 1e-15);
    }

    #[test]
    fn positive_part_at_hbar_minus_one() {
        // (0.5 sin(2π(x+1/4)) + 1)^+ = V + 1, integral 1.
        let v = integrate(
            |x| (0.5 * (2.0 * PI * (x + 0.25)).sin() + 1.0).max(0.0),
            0.0,
            1.0,
            &[],
            1e-10,
        )
        .unwrap();
        // dense trapezoid at 2^20 nodes, exact for trigonometric polynomials
        let n = 1usize << 20;
        let oracle: f64 = (0..n)
            .map(|i| {
                let x = i as f64 / n as f64;
                (0.5 * (2.0 * PI * (x + 0.25)).sin() + 1.0).max(0.0)
            })
            .sum::<f64>()
            / n as f64;
        assert!((v - oracle).abs() < 1e-10);
        assert!((v - 1.0).abs() < 1e-10);
    }

    #[test]
    fn jump_is_resolved_exactly_when_split() {
        let d = 0.371_234_5;
        let f = |x: f64| if x < d { 1.0 + x } else { 3.0 - x * x };
        let exact = d + d * d / 2.0 + 3.0 * (1.0 - d) - (1.0 - d.powi(3)) / 3.0;
        let v = integrate(f, 0.0, 1.0, &[d], 1e-12).unwrap();
        assert!((v - exact).abs() < 1e-13);
    }

    #[test]
    fn sqrt_endpoint_singularity() {
        let v = integrate(|x| x.sqrt(), 0.0, 1.0, &[], 1e-11).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-11);
    }

    #[test]
    fn non_finite_integrand_is_reported() {
        let r = integrate(|x| 1.0 / (x - 0.5), 0.0, 1.0, &[], 1e-10);
        assert!(matches!(r, Err(MfgError::NonFinite { .. })));
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let a = integrate(|x| x * x, 0.2, 0.9, &[], 1e-12).unwrap();
        let b = integrate(|x| x * x, 0.9, 0.2, &[], 1e-12).unwrap();
        assert!((a + b).abs() < 1e-15);
    }

    #[test]
    fn arc_wraps_around_the_torus() {
        let f = |x: f64| Ok((2.0 * PI * x).cos() + 2.0);
        let full = try_integrate_arc(f, 0.7, 1.0, &[], 1e-12).unwrap();
        assert!((full - 2.0).abs() < 1e-13);
        let part = try_integrate_arc(f, 0.9, 0.2, &[0.0], 1e-12).unwrap();
        let direct = integrate(|x| (2.0 * PI * x).cos() + 2.0, 0.9, 1.1, &[], 1e-12).unwrap();
        assert!((part - direct).abs() < 1e-13);
    }

    proptest::proptest! {
        #[test]
        fn additive_over_subintervals(a in 0.0f64..0.4, b in 0.4f64..0.7, c in 0.7f64..1.0,
                                      freq in 1u32..4, amp in 0.1f64..5.0) {
            let f = |x: f64| (amp * (2.0 * PI * freq as f64 * x).sin() + 2.0 * amp).abs().sqrt();
            let tol = 1e-10;
            let whole = integrate(f, a, c, &[], tol).unwrap();
            let left = integrate(f, a, b, &[], tol).unwrap();
            let right = integrate(f, b, c, &[], tol).unwrap();
            proptest::prop_assert!((whole - left - right).abs() <= 2.0 * tol);
        }
    }
}
