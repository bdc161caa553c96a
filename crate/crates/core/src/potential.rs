//! Smooth 1-periodic potentials on the unit torus.
//!
//! Two representations are supported: the closed-form sine family
//! `A sin(2πk(x + φ))` and trigonometric interpolation of uniform samples.
//! Maximum, argmax set, minimum and mean are computed once at construction.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{MfgError, Result};

/// Values closer than this to the maximum count as maximum points.
pub const MAX_TOL: f64 = 1e-12;

/// JSON description of a potential.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSpec {
    Sine {
        amplitude: f64,
        frequency: u32,
        #[serde(default)]
        phase: f64,
    },
    Samples {
        values: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
enum Shape {
    Sine {
        amplitude: f64,
        frequency: u32,
        phase: f64,
    },
    /// `a[0] + Σ a[k] cos(2πk(x-s)) + b[k] sin(2πk(x-s))`
    Trig {
        cos: Vec<f64>,
        sin: Vec<f64>,
        shift: f64,
    },
}

/// Summary of the extrema of a potential.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaxInfo {
    pub max: f64,
    /// Maximum points reduced to `[0, 1)`, sorted.
    pub argmax: Vec<f64>,
    pub mean: f64,
    pub min: f64,
    /// Set when the potential is constant; `argmax` then holds `0` only.
    pub degenerate: bool,
}

impl MaxInfo {
    pub fn single_max(&self) -> bool {
        self.argmax.len() == 1 && !self.degenerate
    }

    pub fn oscillation(&self) -> f64 {
        self.max - self.min
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicPotential {
    shape: Shape,
    info: MaxInfo,
}

impl PeriodicPotential {
    /// `A sin(2πk(x + φ))`.
    pub fn sine(amplitude: f64, frequency: u32, phase: f64) -> Result<Self> {
        if frequency == 0 {
            return Err(MfgError::InvalidInput(
                "sine frequency must be a positive integer".into(),
            ));
        }
        if !(amplitude.is_finite() && phase.is_finite()) {
            return Err(MfgError::InvalidInput("sine parameters must be finite".into()));
        }
        let shape = Shape::Sine {
            amplitude,
            frequency,
            phase,
        };
        let info = sine_info(amplitude, frequency, phase);
        Ok(PeriodicPotential { shape, info })
    }

    /// Trigonometric interpolant of `values` sampled at `x_i = i/N`.
    pub fn samples(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(MfgError::InvalidInput("sample list is empty".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(MfgError::InvalidInput("samples must be finite".into()));
        }
        let (cos, sin) = dft_coefficients(values);
        Self::from_trig(cos, sin, 0.0)
    }

    pub fn constant(value: f64) -> Result<Self> {
        Self::samples(&[value])
    }

    pub fn from_spec(spec: &PotentialSpec) -> Result<Self> {
        match spec {
            PotentialSpec::Sine {
                amplitude,
                frequency,
                phase,
            } => Self::sine(*amplitude, *frequency, *phase),
            PotentialSpec::Samples { values } => Self::samples(values),
        }
    }

    fn from_trig(cos: Vec<f64>, sin: Vec<f64>, shift: f64) -> Result<Self> {
        let shape = Shape::Trig { cos, sin, shift };
        let info = numeric_info(&shape)?;
        Ok(PeriodicPotential { shape, info })
    }

    pub fn eval(&self, x: f64) -> f64 {
        match &self.shape {
            Shape::Sine {
                amplitude,
                frequency,
                phase,
            } => {
                let y = (x + phase).rem_euclid(1.0);
                amplitude * (2.0 * PI * f64::from(*frequency) * y).sin()
            }
            Shape::Trig { cos, sin, shift } => trig_eval(cos, sin, x - shift).0,
        }
    }

    /// First and second derivatives at `x`.
    pub fn derivatives(&self, x: f64) -> (f64, f64) {
        match &self.shape {
            Shape::Sine {
                amplitude,
                frequency,
                phase,
            } => {
                let w = 2.0 * PI * f64::from(*frequency);
                let y = (x + phase).rem_euclid(1.0);
                let (s, c) = (w * y).sin_cos();
                (amplitude * w * c, -amplitude * w * w * s)
            }
            Shape::Trig { cos, sin, shift } => {
                let (_, d1, d2) = trig_eval(cos, sin, x - shift);
                (d1, d2)
            }
        }
    }

    pub fn info(&self) -> &MaxInfo {
        &self.info
    }

    pub fn max_value(&self) -> f64 {
        self.info.max
    }

    pub fn min_value(&self) -> f64 {
        self.info.min
    }

    pub fn mean(&self) -> f64 {
        self.info.mean
    }

    pub fn argmax(&self) -> &[f64] {
        &self.info.argmax
    }

    pub fn is_constant(&self) -> bool {
        self.info.degenerate
    }

    /// Highest frequency present; 0 for a constant.
    pub fn bandwidth(&self) -> usize {
        match &self.shape {
            Shape::Sine { frequency, .. } => *frequency as usize,
            Shape::Trig { cos, .. } => cos.len().saturating_sub(1),
        }
    }

    /// The potential `x ↦ V(-x)`.
    pub fn mirrored(&self) -> Self {
        match &self.shape {
            Shape::Sine {
                amplitude,
                frequency,
                phase,
            } => {
                let k = f64::from(*frequency);
                let phase = (0.5 / k - phase).rem_euclid(1.0);
                let shape = Shape::Sine {
                    amplitude: *amplitude,
                    frequency: *frequency,
                    phase,
                };
                let info = sine_info(*amplitude, *frequency, phase);
                PeriodicPotential { shape, info }
            }
            Shape::Trig { cos, sin, shift } => {
                let sin = sin.iter().map(|b| -b).collect();
                let shape = Shape::Trig {
                    cos: cos.clone(),
                    sin,
                    shift: -shift,
                };
                let mut info = self.info.clone();
                info.argmax = normalize_points(info.argmax.iter().map(|x| -x).collect());
                PeriodicPotential { shape, info }
            }
        }
    }

    /// The potential `x ↦ V(x - s)`.
    pub fn shifted(&self, s: f64) -> Self {
        let shape = match &self.shape {
            Shape::Sine {
                amplitude,
                frequency,
                phase,
            } => Shape::Sine {
                amplitude: *amplitude,
                frequency: *frequency,
                phase: (phase - s).rem_euclid(1.0),
            },
            Shape::Trig { cos, sin, shift } => Shape::Trig {
                cos: cos.clone(),
                sin: sin.clone(),
                shift: shift + s,
            },
        };
        let mut info = self.info.clone();
        if !info.degenerate {
            info.argmax = normalize_points(info.argmax.iter().map(|x| x + s).collect());
        }
        PeriodicPotential { shape, info }
    }

    /// Points of `[0, 1)` where `V` crosses `level` transversally.
    pub fn level_crossings(&self, level: f64) -> Vec<f64> {
        let n = sample_count(self.bandwidth());
        let h = 1.0 / n as f64;
        let g = |x: f64| self.eval(x) - level;
        let mut out = Vec::new();
        let mut x0 = 0.0;
        let mut g0 = g(0.0);
        for i in 1..=n {
            let x1 = i as f64 * h;
            let g1 = g(x1);
            if g0 == 0.0 {
                out.push(x0);
            } else if g0 * g1 < 0.0 {
                let (mut lo, mut hi, mut glo) = (x0, x1, g0);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    let gm = g(mid);
                    if gm == 0.0 {
                        lo = mid;
                        hi = mid;
                        break;
                    }
                    if (gm < 0.0) == (glo < 0.0) {
                        lo = mid;
                        glo = gm;
                    } else {
                        hi = mid;
                    }
                }
                out.push(0.5 * (lo + hi));
            }
            x0 = x1;
            g0 = g1;
        }
        normalize_points(out)
    }
}

fn sample_count(bandwidth: usize) -> usize {
    (4096 * bandwidth.max(1)).min(1 << 22)
}

/// Reduces modulo 1, sorts and drops duplicates (also across the seam).
pub(crate) fn normalize_points(mut pts: Vec<f64>) -> Vec<f64> {
    for p in pts.iter_mut() {
        *p = p.rem_euclid(1.0);
        if *p >= 1.0 - 1e-13 {
            *p = 0.0;
        }
    }
    pts.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::with_capacity(pts.len());
    for p in pts {
        if out.last().is_none_or(|&q| p - q > 1e-9) {
            out.push(p);
        }
    }
    if out.len() > 1 && out[0] + 1.0 - out[out.len() - 1] <= 1e-9 {
        out.pop();
    }
    out
}

fn sine_info(amplitude: f64, frequency: u32, phase: f64) -> MaxInfo {
    let a = amplitude.abs();
    if a <= MAX_TOL {
        return MaxInfo {
            max: amplitude.max(0.0).max(-a),
            argmax: vec![0.0],
            mean: 0.0,
            min: -a,
            degenerate: true,
        };
    }
    let k = f64::from(frequency);
    let base = if amplitude > 0.0 { 0.25 } else { 0.75 };
    let argmax = (0..frequency)
        .map(|n| (base + f64::from(n)) / k - phase)
        .collect();
    MaxInfo {
        max: a,
        argmax: normalize_points(argmax),
        mean: 0.0,
        min: -a,
        degenerate: false,
    }
}

fn dft_coefficients(values: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = values.len();
    let nf = n as f64;
    let half = n / 2;
    let mut cos = vec![0.0; half + 1];
    let mut sin = vec![0.0; half + 1];
    cos[0] = values.iter().sum::<f64>() / nf;
    for k in 1..=half {
        let (mut a, mut b) = (0.0, 0.0);
        for (i, v) in values.iter().enumerate() {
            let t = 2.0 * PI * ((k * i) % n) as f64 / nf;
            a += v * t.cos();
            b += v * t.sin();
        }
        if 2 * k == n {
            cos[k] = a / nf;
            sin[k] = 0.0;
        } else {
            cos[k] = 2.0 * a / nf;
            sin[k] = 2.0 * b / nf;
        }
    }
    let scale = cos
        .iter()
        .chain(sin.iter())
        .fold(0.0f64, |m, c| m.max(c.abs()))
        .max(f64::MIN_POSITIVE);
    let mut keep = 1;
    for k in 1..cos.len() {
        if cos[k].abs().max(sin[k].abs()) > 1e-15 * scale {
            keep = k + 1;
        }
    }
    cos.truncate(keep);
    sin.truncate(keep);
    (cos, sin)
}

/// Value, first and second derivative of a trigonometric polynomial.
fn trig_eval(cos: &[f64], sin: &[f64], x: f64) -> (f64, f64, f64) {
    let y = x.rem_euclid(1.0);
    let (s1, c1) = (2.0 * PI * y).sin_cos();
    let (mut ck, mut sk) = (1.0, 0.0);
    let (mut v, mut d1, mut d2) = (cos[0], 0.0, 0.0);
    for k in 1..cos.len() {
        let c = ck * c1 - sk * s1;
        let s = sk * c1 + ck * s1;
        ck = c;
        sk = s;
        let w = 2.0 * PI * k as f64;
        v += cos[k] * c + sin[k] * s;
        d1 += w * (sin[k] * c - cos[k] * s);
        d2 -= w * w * (cos[k] * c + sin[k] * s);
    }
    (v, d1, d2)
}

fn numeric_info(shape: &Shape) -> Result<MaxInfo> {
    let Shape::Trig { cos, sin, shift } = shape else {
        unreachable!("closed-form shapes are summarized analytically")
    };
    let mean = cos[0];
    let bandwidth = cos.len() - 1;
    let eval = |x: f64| trig_eval(cos, sin, x - shift);
    let amplitude: f64 = cos.iter().skip(1).chain(sin.iter().skip(1)).map(|c| c.abs()).sum();
    if amplitude <= MAX_TOL {
        return Ok(MaxInfo {
            max: mean,
            argmax: vec![0.0],
            mean,
            min: mean,
            degenerate: true,
        });
    }

    let n = sample_count(bandwidth);
    let h = 1.0 / n as f64;
    let values: Vec<f64> = (0..n).map(|i| eval(i as f64 * h).0).collect();
    let curvature: f64 = (1..cos.len())
        .map(|k| (2.0 * PI * k as f64).powi(2) * (cos[k].abs() + sin[k].abs()))
        .sum();
    let margin = curvature * h * h + MAX_TOL;

    let extremum = |sign: f64| -> (f64, Vec<f64>) {
        let sampled_best = values.iter().fold(f64::NEG_INFINITY, |m, v| m.max(sign * v));
        let mut candidates = Vec::new();
        for i in 0..n {
            let here = sign * values[i];
            let prev = sign * values[(i + n - 1) % n];
            let next = sign * values[(i + 1) % n];
            if here >= prev && here >= next && here >= sampled_best - margin {
                candidates.push(i as f64 * h);
            }
        }
        let refined: Vec<(f64, f64)> = candidates
            .into_iter()
            .map(|x| refine_extremum(|t| eval(t), sign, x, h))
            .collect();
        let best = refined.iter().fold(f64::NEG_INFINITY, |m, (_, v)| m.max(*v));
        let pts = refined
            .into_iter()
            .filter(|(_, v)| *v >= best - MAX_TOL)
            .map(|(x, _)| x)
            .collect();
        (sign * best, normalize_points(pts))
    };

    let (max, argmax) = extremum(1.0);
    let (min, _) = extremum(-1.0);

    // A run of three or more samples at the maximum means a flat top.
    for i in 0..n {
        let run = (0..3).all(|k| values[(i + k) % n] >= max - MAX_TOL);
        if run {
            return Err(MfgError::PlateauMax { x: i as f64 * h });
        }
    }

    Ok(MaxInfo {
        max,
        argmax,
        mean,
        min,
        degenerate: false,
    })
}

/// Golden-section search on `[x-h, x+h]` followed by Newton polishing on V'.
fn refine_extremum<F>(eval: F, sign: f64, x: f64, h: f64) -> (f64, f64)
where
    F: Fn(f64) -> (f64, f64, f64),
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (x - h, x + h);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = sign * eval(c).0;
    let mut fd = sign * eval(d).0;
    while b - a > 1e-14 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = sign * eval(c).0;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = sign * eval(d).0;
        }
    }
    let mut best = 0.5 * (a + b);
    for _ in 0..8 {
        let (_, d1, d2) = eval(best);
        if d2 == 0.0 {
            break;
        }
        let step = d1 / d2;
        if !step.is_finite() || step.abs() > h {
            break;
        }
        best -= step;
        if step.abs() < 1e-16 {
            break;
        }
    }
    (best, sign * eval(best).0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn sine_evaluation() {
        let v = PeriodicPotential::sine(0.5, 1, 0.25).unwrap();
        assert!(close(v.eval(0.0), 0.5, 1e-15));
        let v5 = PeriodicPotential::sine(5.0, 1, 0.25).unwrap();
        assert!(close(v5.eval(0.5), -5.0, 1e-14));
        let v2 = PeriodicPotential::sine(0.5, 2, 0.125).unwrap();
        assert!(close(v2.eval(0.0), 0.5, 1e-15));
    }

    #[test]
    fn sine_max_info() {
        let v = PeriodicPotential::sine(0.5, 1, 0.25).unwrap();
        let info = v.info();
        assert_eq!(info.max, 0.5);
        assert_eq!(info.argmax, vec![0.0]);
        assert_eq!(info.mean, 0.0);
        assert!(info.single_max());

        let v2 = PeriodicPotential::sine(0.5, 2, 0.125).unwrap();
        assert_eq!(v2.argmax().len(), 2);
        assert!(close(v2.argmax()[0], 0.0, 1e-15));
        assert!(close(v2.argmax()[1], 0.5, 1e-15));
        assert!(!v2.info().single_max());
    }

    #[test]
    fn constant_is_degenerate() {
        let v = PeriodicPotential::constant(0.0).unwrap();
        assert!(v.info().degenerate);
        assert_eq!(v.max_value(), 0.0);
        let z = PeriodicPotential::sine(0.0, 1, 0.25).unwrap();
        assert!(z.info().degenerate);
        assert_eq!(z.max_value(), 0.0);
    }

    #[test]
    fn sampled_potential_reproduces_sine() {
        let n = 32;
        let vals: Vec<f64> = (0..n)
            .map(|i| 0.7 * (2.0 * PI * (i as f64 / n as f64 + 0.1)).sin())
            .collect();
        let v = PeriodicPotential::samples(&vals).unwrap();
        let exact = PeriodicPotential::sine(0.7, 1, 0.1).unwrap();
        for i in 0..97 {
            let x = i as f64 / 97.0;
            assert!(close(v.eval(x), exact.eval(x), 1e-13));
        }
        assert!(close(v.max_value(), 0.7, 1e-12));
        assert_eq!(v.argmax().len(), 1);
        assert!(close(v.argmax()[0], 0.15, 1e-9));
        assert!(close(v.mean(), 0.0, 1e-15));
    }

    #[test]
    fn sampled_two_maxima_are_found() {
        let n = 64;
        let vals: Vec<f64> = (0..n)
            .map(|i| {
                let x = i as f64 / n as f64;
                (2.0 * PI * 2.0 * x).cos() + 0.1
            })
            .collect();
        let v = PeriodicPotential::samples(&vals).unwrap();
        assert_eq!(v.argmax().len(), 2);
        assert!(close(v.max_value(), 1.1, 1e-12));
    }

    #[test]
    fn plateau_is_rejected() {
        // Flat top: many samples of the interpolant sit at the maximum.
        let n = 64;
        let vals: Vec<f64> = (0..n).map(|i| if i < 20 { 1.0 } else { 0.0 }).collect();
        let r = PeriodicPotential::samples(&vals);
        // A step is not flat after interpolation; a genuine flat top needs
        // cancellation, which we emulate with a constant plus tiny ripple.
        assert!(r.is_ok());
        let flat: Vec<f64> = (0..n).map(|i| 1.0 + 1e-14 * (i % 2) as f64).collect();
        let v = PeriodicPotential::samples(&flat).unwrap();
        assert!(v.info().degenerate);
    }

    #[test]
    fn mirror_and_shift() {
        let v = PeriodicPotential::sine(1.3, 2, 0.07).unwrap();
        let m = v.mirrored();
        let s = v.shifted(0.31);
        for i in 0..50 {
            let x = i as f64 / 50.0 + 0.003;
            assert!(close(m.eval(x), v.eval(-x), 1e-13));
            assert!(close(s.eval(x), v.eval(x - 0.31), 1e-13));
        }
        let vals: Vec<f64> = (0..16).map(|i| ((i * i) % 7) as f64).collect();
        let t = PeriodicPotential::samples(&vals).unwrap();
        let tm = t.mirrored();
        for i in 0..16 {
            let x = i as f64 / 16.0;
            assert!(close(tm.eval(x), vals[(16 - i) % 16], 1e-12));
        }
        assert_eq!(tm.argmax().len(), t.argmax().len());
        for &x in t.argmax() {
            let y = (1.0 - x).rem_euclid(1.0);
            assert!(tm.argmax().iter().any(|&z| close(z, y, 1e-9) || close(z + 1.0, y, 1e-9)));
        }
    }

    #[test]
    fn level_crossings_of_cosine() {
        let v = PeriodicPotential::sine(1.0, 1, 0.25).unwrap();
        let c = v.level_crossings(0.0);
        assert_eq!(c.len(), 2);
        assert!(close(c[0], 0.25, 1e-13));
        assert!(close(c[1], 0.75, 1e-13));
    }

    #[test]
    fn spec_roundtrip() {
        let spec: PotentialSpec =
            serde_json::from_str(r#"{"kind":"sine","amplitude":0.5,"frequency":1,"phase":0.25}"#)
                .unwrap();
        let v = PeriodicPotential::from_spec(&spec).unwrap();
        assert_eq!(v.max_value(), 0.5);
        let spec: PotentialSpec =
            serde_json::from_str(r#"{"kind":"samples","values":[1,2,3,2]}"#).unwrap();
        let v = PeriodicPotential::from_spec(&spec).unwrap();
        assert!(close(v.eval(0.5), 3.0, 1e-14));
    }

    proptest::proptest! {
        #[test]
        fn sine_is_periodic_with_zero_mean(a in -5.0f64..5.0, k in 1u32..5, phi in 0.0f64..1.0, x in -3.0f64..3.0) {
            let v = PeriodicPotential::sine(a, k, phi).unwrap();
            proptest::prop_assert!((v.eval(x + 1.0) - v.eval(x)).abs() < 1e-12);
            let integral = crate::quad::integrate(|t| v.eval(t), 0.0, 1.0, &[], 1e-13).unwrap();
            proptest::prop_assert!(integral.abs() < 1e-12);
        }

        #[test]
        fn cached_max_bounds_dense_grid(a in 0.1f64..5.0, k in 1u32..4, phi in 0.0f64..1.0) {
            let v = PeriodicPotential::sine(a, k, phi).unwrap();
            let n = 20000;
            let dense = (0..n).map(|i| v.eval(i as f64 / n as f64)).fold(f64::NEG_INFINITY, f64::max);
            proptest::prop_assert!(dense <= v.max_value() + 1e-12);
            for &x in v.argmax() {
                proptest::prop_assert!((v.eval(x) - v.max_value()).abs() < 1e-12);
            }
            proptest::prop_assert_eq!(v.info().single_max(), k == 1);
        }
    }
}
