//! Local couplings `g` and the current-formulation function
//! `F_j(m) = j²/(2m²) − g(m)`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{MfgError, Result};
use crate::quad;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Monotonicity {
    Increasing,
    Decreasing,
}

/// JSON form of the built-in couplings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum CouplingSpec {
    #[serde(rename = "m")]
    Increasing,
    #[serde(rename = "-m")]
    Decreasing,
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A user supplied coupling with declared monotonicity.
#[derive(Clone)]
pub struct CustomCoupling {
    g: ScalarFn,
    dg: ScalarFn,
    antiderivative: Option<ScalarFn>,
    monotonicity: Monotonicity,
}

impl fmt::Debug for CustomCoupling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomCoupling")
            .field("monotonicity", &self.monotonicity)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone)]
pub enum Coupling {
    /// `g(m) = m`
    Increasing,
    /// `g(m) = −m`
    Decreasing,
    Custom(CustomCoupling),
}

/// Minimizer of `F_j` for a decreasing coupling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchPoint {
    pub t_min: f64,
    pub j: f64,
    /// `F_j(t_min)`
    pub f_min: f64,
}

impl From<CouplingSpec> for Coupling {
    fn from(spec: CouplingSpec) -> Self {
        match spec {
            CouplingSpec::Increasing => Coupling::Increasing,
            CouplingSpec::Decreasing => Coupling::Decreasing,
        }
    }
}

impl Coupling {
    /// Builds a custom coupling from `g` and `g'`. The declared monotonicity
    /// is checked at `m = 2^k`, `k = −10..=10`.
    pub fn custom<G, D>(g: G, dg: D, monotonicity: Monotonicity) -> Result<Self>
    where
        G: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        for k in -10..=10 {
            let m = 2f64.powi(k);
            let d = dg(m);
            let ok = match monotonicity {
                Monotonicity::Increasing => d >= 0.0,
                Monotonicity::Decreasing => d <= 0.0,
            };
            if !ok || !g(m).is_finite() {
                return Err(MfgError::InvalidInput(format!(
                    "custom coupling is not {monotonicity:?} at m = {m} (g' = {d})"
                )));
            }
        }
        Ok(Coupling::Custom(CustomCoupling {
            g: Arc::new(g),
            dg: Arc::new(dg),
            antiderivative: None,
            monotonicity,
        }))
    }

    /// Supplies a closed-form antiderivative `G` of a custom coupling.
    pub fn with_antiderivative<F>(self, big_g: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        match self {
            Coupling::Custom(mut c) => {
                c.antiderivative = Some(Arc::new(big_g));
                Coupling::Custom(c)
            }
            other => other,
        }
    }

    pub fn spec(&self) -> Option<CouplingSpec> {
        match self {
            Coupling::Increasing => Some(CouplingSpec::Increasing),
            Coupling::Decreasing => Some(CouplingSpec::Decreasing),
            Coupling::Custom(_) => None,
        }
    }

    pub fn monotonicity(&self) -> Monotonicity {
        match self {
            Coupling::Increasing => Monotonicity::Increasing,
            Coupling::Decreasing => Monotonicity::Decreasing,
            Coupling::Custom(c) => c.monotonicity,
        }
    }

    pub fn is_increasing(&self) -> bool {
        self.monotonicity() == Monotonicity::Increasing
    }

    pub fn is_decreasing(&self) -> bool {
        self.monotonicity() == Monotonicity::Decreasing
    }

    pub fn g(&self, m: f64) -> f64 {
        match self {
            Coupling::Increasing => m,
            Coupling::Decreasing => -m,
            Coupling::Custom(c) => (c.g)(m),
        }
    }

    pub fn dg(&self, m: f64) -> f64 {
        match self {
            Coupling::Increasing => 1.0,
            Coupling::Decreasing => -1.0,
            Coupling::Custom(c) => (c.dg)(m),
        }
    }

    /// Antiderivative `G` with `G' = g`; normalized by `G(1) = g(1)/2` for
    /// custom couplings without a closed form, which matches the built-ins.
    pub fn big_g(&self, m: f64) -> f64 {
        match self {
            Coupling::Increasing => 0.5 * m * m,
            Coupling::Decreasing => -0.5 * m * m,
            Coupling::Custom(c) => match &c.antiderivative {
                Some(f) => f(m),
                None => {
                    let g = &c.g;
                    let tail = quad::integrate(|t| g(t), 1.0, m, &[], 1e-13).unwrap_or(f64::NAN);
                    0.5 * g(1.0) + tail
                }
            },
        }
    }

    /// `F_j(m) = j²/(2m²) − g(m)`.
    pub fn f(&self, j: f64, m: f64) -> Result<f64> {
        check_density(m)?;
        Ok(self.f_raw(j, m))
    }

    pub(crate) fn f_raw(&self, j: f64, m: f64) -> f64 {
        0.5 * j * j / (m * m) - self.g(m)
    }

    /// `∂F_j/∂m`.
    pub fn df(&self, j: f64, m: f64) -> f64 {
        -j * j / (m * m * m) - self.dg(m)
    }

    /// `Φ_j(m) = −j²/(2m) − G(m)`.
    pub fn phi(&self, j: f64, m: f64) -> Result<f64> {
        check_density(m)?;
        Ok(-0.5 * j * j / m - self.big_g(m))
    }

    /// Minimizer of `F_j` on `(0, ∞)` for a decreasing coupling.
    pub fn branch_min(&self, j: f64) -> Result<BranchPoint> {
        if !self.is_decreasing() {
            return Err(MfgError::InvalidInput(
                "branch structure exists only for decreasing couplings".into(),
            ));
        }
        if j == 0.0 || !j.is_finite() {
            return Err(MfgError::InvalidInput(format!(
                "branch minimum needs a finite non-zero current, got {j}"
            )));
        }
        let t_min = match self {
            Coupling::Decreasing => j.abs().powf(2.0 / 3.0),
            _ => self.numeric_branch_min(j)?,
        };
        Ok(BranchPoint {
            t_min,
            j,
            f_min: self.f_raw(j, t_min),
        })
    }

    fn numeric_branch_min(&self, j: f64) -> Result<f64> {
        // F' changes sign exactly once on a unimodal F_j.
        let steps = 8 * 80;
        let grid = |i: usize| 2f64.powf(-40.0 + i as f64 / 8.0);
        let mut crossing = None;
        let mut prev = self.df(j, grid(0));
        for i in 1..=steps {
            let d = self.df(j, grid(i));
            if (prev < 0.0) != (d < 0.0) {
                if crossing.is_some() || prev >= 0.0 {
                    return Err(MfgError::NotUnimodal { j });
                }
                crossing = Some(i);
            }
            prev = d;
        }
        let Some(i) = crossing else {
            return Err(MfgError::NotUnimodal { j });
        };
        let (mut lo, mut hi) = (grid(i - 1), grid(i));
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.df(j, mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

fn check_density(m: f64) -> Result<()> {
    if m > 0.0 && m.is_finite() {
        Ok(())
    } else {
        Err(MfgError::NonPositiveDensity { m })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f_values() {
        assert_eq!(Coupling::Decreasing.f(1.0, 1.0).unwrap(), 1.5);
        assert_eq!(Coupling::Increasing.f(1.0, 1.0).unwrap(), -0.5);
        let t = 0.5f64.powf(2.0 / 3.0);
        let v = Coupling::Decreasing.f(0.5, t).unwrap();
        assert!((v - 1.5 * t).abs() < 1e-15);
        assert!((v - 0.944_940).abs() < 1e-6);
        assert!(matches!(
            Coupling::Decreasing.f(1.0, 0.0),
            Err(MfgError::NonPositiveDensity { .. })
        ));
    }

    #[test]
    fn branch_minimum() {
        let c = Coupling::Decreasing;
        assert_eq!(c.branch_min(1.0).unwrap().t_min, 1.0);
        assert!((c.branch_min(0.5).unwrap().t_min - 0.629_960_5).abs() < 1e-7);
        assert!((c.branch_min(8.0).unwrap().t_min - 4.0).abs() < 1e-12);
        assert!(Coupling::Increasing.branch_min(1.0).is_err());
    }

    #[test]
    fn phi_values() {
        assert_eq!(Coupling::Increasing.phi(0.0, 1.0).unwrap(), -0.5);
        assert_eq!(Coupling::Decreasing.phi(1.0, 1.0).unwrap(), 0.0);
        assert_eq!(Coupling::Increasing.phi(2.0, 2.0).unwrap(), -3.0);
    }

    #[test]
    fn custom_matches_builtin() {
        let c = Coupling::custom(|m| -m, |_| -1.0, Monotonicity::Decreasing).unwrap();
        for &j in &[0.1, 0.5, 1.0, 8.0] {
            let a = c.branch_min(j).unwrap().t_min;
            let b = Coupling::Decreasing.branch_min(j).unwrap().t_min;
            assert!((a - b).abs() < 1e-12 * b);
        }
        assert!((c.big_g(2.0) - Coupling::Decreasing.big_g(2.0)).abs() < 1e-12);
    }

    #[test]
    fn custom_monotonicity_is_checked() {
        let bad = Coupling::custom(|m| m, |_| 1.0, Monotonicity::Decreasing);
        assert!(bad.is_err());
        let ok = Coupling::custom(|m: f64| m.ln(), |m| 1.0 / m, Monotonicity::Increasing);
        assert!(ok.is_ok());
    }

    #[test]
    fn two_well_coupling_is_rejected() {
        // F' = -1/m³ + e^{-m} changes sign twice.
        let c = Coupling::custom(|m: f64| (-m).exp(), |m: f64| -(-m).exp(), Monotonicity::Decreasing)
            .unwrap();
        assert!(matches!(c.branch_min(1.0), Err(MfgError::NotUnimodal { .. })));
    }

    #[test]
    fn spec_json() {
        let s: CouplingSpec = serde_json::from_str(r#"{"kind":"-m"}"#).unwrap();
        assert_eq!(s, CouplingSpec::Decreasing);
        let s: CouplingSpec = serde_json::from_str(r#"{"kind":"m"}"#).unwrap();
        assert_eq!(s, CouplingSpec::Increasing);
        assert!(serde_json::from_str::<CouplingSpec>(r#"{"kind":"custom"}"#).is_err());
    }

    proptest::proptest! {
        #[test]
        fn increasing_f_is_decreasing(j in -5.0f64..5.0, a in -8.0f64..8.0, r in 0.01f64..3.0) {
            let m1 = 2f64.powf(a);
            let m2 = m1 * (1.0 + r);
            let c = Coupling::Increasing;
            proptest::prop_assert!(c.f(j, m1).unwrap() > c.f(j, m2).unwrap());
        }

        #[test]
        fn decreasing_minimum(j in 0.001f64..50.0) {
            let c = Coupling::Decreasing;
            let b = c.branch_min(j).unwrap();
            proptest::prop_assert!((b.t_min - j.powf(2.0 / 3.0)).abs() <= 1e-12 * b.t_min.max(1.0));
            proptest::prop_assert!((b.f_min - 1.5 * j.powf(2.0 / 3.0)).abs() <= 1e-10 * b.f_min.max(1.0));
            for s in [0.5, 0.9, 0.999, 1.001, 1.1, 2.0] {
                proptest::prop_assert!(c.f(j, b.t_min * s).unwrap() >= b.f_min);
            }
        }

        #[test]
        fn phi_derivative_is_f(j in -3.0f64..3.0, m in 0.05f64..10.0, inc in proptest::bool::ANY) {
            let c = if inc { Coupling::Increasing } else { Coupling::Decreasing };
            let h = 1e-5 * m;
            let fd = (c.phi(j, m + h).unwrap() - c.phi(j, m - h).unwrap()) / (2.0 * h);
            let f = c.f(j, m).unwrap();
            proptest::prop_assert!((fd - f).abs() <= 1e-6 * f.abs().max(1.0));
        }
    }
}
