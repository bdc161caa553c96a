//! Regime boundaries and the maps `j ↦ H̄_j`, `j ↦ p_j`, `p ↦ H̄(p)`.

use serde::{Deserialize, Serialize};

use crate::algebra::{self, Branch};
use crate::antimonotone::{self, AntiJ0Variant};
use crate::coupling::Coupling;
use crate::error::{MfgError, Result};
use crate::monotone;
use crate::potential::PeriodicPotential;
use crate::quad;
use crate::solution::{JumpFamilyParams, Regime};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeBoundaries {
    pub j_lower: f64,
    pub j_upper: f64,
}

/// `(α⁻(j), α⁺(j))`; at `j = 0` the limits `(0, max V − ∫V)`.
pub fn alpha(c: &Coupling, v: &PeriodicPotential, j: f64) -> Result<(f64, f64)> {
    if j == 0.0 {
        return Ok((0.0, v.max_value() - v.mean()));
    }
    algebra::critical_masses(c, v, j.abs(), quad::SOLVER_TOL)
}

/// Solves `α(j) = 1` for an increasing `α` with `α(0⁺) < 1`.
fn alpha_crossing<F>(a: F) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let mut hi = 1.0;
    let mut n = 0;
    while a(hi)? < 1.0 {
        hi *= 2.0;
        n += 1;
        if n > 200 {
            return Err(MfgError::NoBracket("alpha never reaches one".into()));
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let am = a(mid)?;
        if am < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * hi || (am - 1.0).abs() <= 1e-14 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

pub fn regime_boundaries(c: &Coupling, v: &PeriodicPotential) -> Result<RegimeBoundaries> {
    if !c.is_decreasing() {
        return Err(MfgError::InvalidInput("regimes exist for decreasing couplings".into()));
    }
    let tol = quad::SOLVER_TOL;
    let j_lower = if v.max_value() - v.mean() >= 1.0 {
        0.0
    } else {
        alpha_crossing(|j| Ok(algebra::critical_masses(c, v, j, tol)?.1))?
    };
    let j_upper = alpha_crossing(|j| Ok(algebra::critical_masses(c, v, j, tol)?.0))?;
    Ok(RegimeBoundaries { j_lower, j_upper })
}

/// `c(V) = j_upper`, a lower bound for `inf m(u_x + p)` when `max V > 1 + ∫V`.
pub fn apriori_current_bound(c: &Coupling, v: &PeriodicPotential) -> Result<f64> {
    if v.max_value() <= 1.0 + v.mean() {
        return Err(MfgError::HypothesisFails(format!(
            "max V = {} does not exceed 1 + mean V = {}",
            v.max_value(),
            1.0 + v.mean()
        )));
    }
    Ok(regime_boundaries(c, v)?.j_upper)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveParameter {
    J,
    P,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveRow {
    pub j: f64,
    #[serde(rename = "Hbar")]
    pub hbar: f64,
    pub p: f64,
    pub alpha_minus: Option<f64>,
    pub alpha_plus: Option<f64>,
    pub regime: Regime,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<JumpFamilyParams>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveTable {
    pub parameter: CurveParameter,
    pub rows: Vec<CurveRow>,
}

impl CurveTable {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("j,Hbar,p,alpha_minus,alpha_plus,regime\n");
        let opt = |x: Option<f64>| x.map(|v| format!("{v:.16e}")).unwrap_or_default();
        for r in &self.rows {
            s.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{},{},{}\n",
                r.j,
                r.hbar,
                r.p,
                opt(r.alpha_minus),
                opt(r.alpha_plus),
                r.regime.name()
            ));
        }
        s
    }

    pub fn params(&self) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| match self.parameter {
                CurveParameter::J => r.j,
                CurveParameter::P => r.p,
            })
            .collect()
    }
}

fn require_single_max(v: &PeriodicPotential) -> Result<()> {
    if !v.is_constant() && v.argmax().len() > 1 {
        Err(MfgError::MultiMax {
            count: v.argmax().len(),
        })
    } else {
        Ok(())
    }
}

/// `H̄_j`, `p_j` and `α±(j)` without building grids.
pub fn curve_row(c: &Coupling, v: &PeriodicPotential, j: f64) -> Result<CurveRow> {
    if !j.is_finite() {
        return Err(MfgError::InvalidInput(format!("current must be finite, got {j}")));
    }
    if c.is_increasing() {
        return monotone_row(c, v, j);
    }
    require_single_max(v)?;
    if j < 0.0 {
        // H̄ is invariant under x ↦ −x, p changes sign.
        let mut row = anti_row(c, v, -j)?;
        row.p = -anti_row(c, &v.mirrored(), -j)?.p;
        row.j = j;
        row.family = None;
        return Ok(row);
    }
    anti_row(c, v, j)
}

fn mean_inverse(c: &Coupling, v: &PeriodicPotential, j: f64, hbar: f64, branch: Branch, a: f64, len: f64) -> Result<f64> {
    quad::try_integrate_arc(
        |x| Ok(1.0 / algebra::density_at(c, v, j, hbar, branch, x)?),
        a,
        len,
        v.argmax(),
        quad::SOLVER_TOL,
    )
}

fn monotone_row(c: &Coupling, v: &PeriodicPotential, j: f64) -> Result<CurveRow> {
    if j == 0.0 {
        let hbar = monotone::monotone_j0_hbar(v)?;
        let regime = if monotone::monotone_j0_is_classical(v) {
            Regime::MonotoneJ0Smooth
        } else {
            Regime::MonotoneJ0Kinked
        };
        return Ok(CurveRow {
            j,
            hbar,
            p: 0.0,
            alpha_minus: None,
            alpha_plus: None,
            regime,
            family: None,
        });
    }
    let matched = algebra::match_mass(c, v, j, Branch::Unique, 1.0)?;
    let p = j * mean_inverse(c, v, j, matched.hbar, Branch::Unique, 0.0, 1.0)?;
    Ok(CurveRow {
        j,
        hbar: matched.hbar,
        p,
        alpha_minus: None,
        alpha_plus: None,
        regime: Regime::MonotoneSmooth,
        family: None,
    })
}

fn anti_row(c: &Coupling, v: &PeriodicPotential, j: f64) -> Result<CurveRow> {
    if j == 0.0 {
        let (am, ap) = alpha(c, v, 0.0)?;
        let regime = if 1.0 + v.mean() >= v.max_value() {
            Regime::AntiJ0Classical
        } else {
            Regime::AntiJ0TwoPoint
        };
        return Ok(CurveRow {
            j,
            hbar: antimonotone::hbar_zero(v),
            p: 0.0,
            alpha_minus: Some(am),
            alpha_plus: Some(ap),
            regime,
            family: None,
        });
    }
    let (am, ap) = algebra::critical_masses(c, v, j, quad::SOLVER_TOL)?;
    let smooth = if ap <= 1.0 {
        Some((Branch::Plus, Regime::AntiCaseI))
    } else if am >= 1.0 {
        Some((Branch::Minus, Regime::AntiCaseIi))
    } else {
        None
    };
    let (hbar, p, regime, family) = match smooth {
        Some((branch, regime)) => {
            let matched = algebra::match_mass(c, v, j, branch, 1.0)?;
            let p = j * mean_inverse(c, v, j, matched.hbar, branch, 0.0, 1.0)?;
            (matched.hbar, p, regime, None)
        }
        None => {
            let sw = algebra::solve_switch(c, v, j)?;
            let x0 = v.argmax()[0];
            let minus = mean_inverse(c, v, j, sw.hcr, Branch::Minus, x0, sw.offset)?;
            let plus = mean_inverse(c, v, j, sw.hcr, Branch::Plus, x0 + sw.offset, 1.0 - sw.offset)?;
            let family = JumpFamilyParams {
                d1: sw.d,
                d2: None,
                e1: None,
                e2: None,
            };
            (sw.hcr, j * (minus + plus), Regime::AntiCaseIii, Some(family))
        }
    };
    Ok(CurveRow {
        j,
        hbar,
        p,
        alpha_minus: Some(am),
        alpha_plus: Some(ap),
        regime,
        family,
    })
}

fn sorted_samples(samples: &[f64]) -> Result<Vec<f64>> {
    let mut s = samples.to_vec();
    if s.iter().any(|x| !x.is_finite()) {
        return Err(MfgError::InvalidInput("samples must be finite".into()));
    }
    s.sort_by(f64::total_cmp);
    s.dedup();
    Ok(s)
}

/// Rows of `j ↦ (H̄_j, p_j, α±)` for sorted, deduplicated samples.
pub fn hbar_of_j(c: &Coupling, v: &PeriodicPotential, j_samples: &[f64]) -> Result<CurveTable> {
    let rows = sorted_samples(j_samples)?
        .into_iter()
        .map(|j| curve_row(c, v, j))
        .collect::<Result<Vec<_>>>()?;
    Ok(CurveTable {
        parameter: CurveParameter::J,
        rows,
    })
}

/// Same table as [`hbar_of_j`]; requires a single maximum also for
/// increasing couplings, where `p_j` is unique in any case.
pub fn p_of_j(c: &Coupling, v: &PeriodicPotential, j_samples: &[f64]) -> Result<CurveTable> {
    require_single_max(v)?;
    hbar_of_j(c, v, j_samples)
}

/// Offsets from the maximum `x0` solving `∫_{d}^{1}(max V − V) = 1` and
/// `∫_{0}^{d'}(max V − V) = 1`.
pub fn vacuum_offsets(v: &PeriodicPotential) -> Result<(f64, f64)> {
    let x0 = v.argmax()[0];
    let d_upper = antimonotone::solve_d1(v, x0, 1.0, 1.0)?;
    let mirrored = v.mirrored();
    let d_lower = 1.0 - antimonotone::solve_d1(&mirrored, mirrored.argmax()[0], 1.0, 1.0)?;
    Ok((d_upper, d_lower))
}

/// Speed `√(2(H̄ − V)⁺)` of the zero-current solutions for `g(m) = m`,
/// integrated along the arc of length `len` starting at the first maximum.
fn monotone_vacuum_action(v: &PeriodicPotential, len: f64) -> Result<f64> {
    let hbar = monotone::monotone_j0_hbar(v)?;
    let mut breaks = v.level_crossings(hbar);
    breaks.extend_from_slice(v.argmax());
    let speed = |x: f64| Ok((2.0 * (hbar - v.eval(x))).max(0.0).sqrt());
    quad::try_integrate_arc(speed, v.argmax()[0], len, &breaks, quad::SOLVER_TOL)
}

/// Interval of `p` on which `H̄(p)` equals its zero-current value.
///
/// For an increasing coupling it is `[−P, P]` with `P` the action of the
/// vacuum region, and degenerate when the zero-current solution is classical.
pub fn flat_interval(c: &Coupling, v: &PeriodicPotential) -> Result<(f64, f64)> {
    if c.is_increasing() {
        if v.is_constant() || monotone::monotone_j0_is_classical(v) {
            return Ok((0.0, 0.0));
        }
        let action = monotone_vacuum_action(v, 1.0)?;
        return Ok((-action, action));
    }
    require_single_max(v)?;
    let top = v.max_value();
    if top <= 1.0 + v.mean() {
        return Ok((0.0, 0.0));
    }
    let x0 = v.argmax()[0];
    let (d_star, d_star2) = vacuum_offsets(v)?;
    let speed = |x: f64| Ok((2.0 * (top - v.eval(x))).max(0.0).sqrt());
    let tol = quad::SOLVER_TOL;
    let p_hi = quad::try_integrate_arc(speed, x0, d_star, v.argmax(), tol)?;
    let p_lo = -quad::try_integrate_arc(speed, x0 + d_star2, 1.0 - d_star2, v.argmax(), tol)?;
    Ok((p_lo, p_hi))
}

/// `p` of the two-point zero-current solution with support ending at `d2`.
fn two_point_p(v: &PeriodicPotential, d2: f64) -> Result<(f64, f64)> {
    let x0 = v.argmax()[0];
    let top = v.max_value();
    let d1 = antimonotone::solve_d1(v, x0, d2, 1.0)?;
    let speed = |x: f64| Ok((2.0 * (top - v.eval(x))).max(0.0).sqrt());
    let tol = quad::SOLVER_TOL;
    let fwd = quad::try_integrate_arc(speed, x0, d1, v.argmax(), tol)?;
    let bwd = quad::try_integrate_arc(speed, x0 + d2, 1.0 - d2, v.argmax(), tol)?;
    Ok((d1, fwd - bwd))
}

/// `H̄(p)` by inverting `j ↦ p_j`; constant `H̄₀` on the flat interval.
pub fn hbar_of_p(c: &Coupling, v: &PeriodicPotential, p_samples: &[f64]) -> Result<CurveTable> {
    require_single_max(v)?;
    let (p_lo, p_hi) = flat_interval(c, v)?;
    let rows = sorted_samples(p_samples)?
        .into_iter()
        .map(|p| row_for_p(c, v, p, p_lo, p_hi))
        .collect::<Result<Vec<_>>>()?;
    Ok(CurveTable {
        parameter: CurveParameter::P,
        rows,
    })
}

fn row_for_p(c: &Coupling, v: &PeriodicPotential, p: f64, p_lo: f64, p_hi: f64) -> Result<CurveRow> {
    if p >= p_lo && p <= p_hi {
        let mut row = curve_row(c, v, 0.0)?;
        row.p = p;
        if p_hi > p_lo {
            row.family = Some(if c.is_decreasing() {
                two_point_family_for_p(v, p)?
            } else {
                kink_family_for_p(v, p, p_hi)?
            });
        }
        return Ok(row);
    }
    if p < p_lo {
        let mut row = row_for_p(c, &v.mirrored(), -p, -p_hi, -p_lo)?;
        row.j = -row.j;
        row.p = p;
        row.family = None;
        return Ok(row);
    }
    // p > p_hi: find j > 0 with p_j = p.
    let pj = |j: f64| -> Result<f64> { Ok(curve_row(c, v, j)?.p) };
    let mut hi = 1.0;
    let mut n = 0;
    while pj(hi)? < p {
        hi *= 2.0;
        n += 1;
        if n > 200 {
            return Err(MfgError::NoBracket(format!("no current reaches p = {p}")));
        }
    }
    let mut lo = 0.0;
    let (mut f_lo, mut f_hi) = (p_hi - p, pj(hi)? - p);
    // Illinois regula falsi with a bisection fallback.
    let mut side = 0i8;
    for _ in 0..200 {
        let mut mid = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
        if !(mid > lo && mid < hi) {
            mid = 0.5 * (lo + hi);
        }
        let fm = pj(mid)? - p;
        if fm == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if fm < 0.0 {
            lo = mid;
            f_lo = fm;
            if side == -1 {
                f_hi *= 0.5;
            }
            side = -1;
        } else {
            hi = mid;
            f_hi = fm;
            if side == 1 {
                f_lo *= 0.5;
            }
            side = 1;
        }
        if hi - lo <= 1e-14 * hi.max(1e-300) || fm.abs() <= 1e-14 * p.abs().max(1.0) {
            break;
        }
    }
    let j = if f_lo.abs() < f_hi.abs() { lo } else { hi };
    let mut row = curve_row(c, v, j)?;
    row.p = p;
    Ok(row)
}

fn two_point_family_for_p(v: &PeriodicPotential, p: f64) -> Result<JumpFamilyParams> {
    let x0 = v.argmax()[0];
    let (_, d_star2) = vacuum_offsets(v)?;
    // p increases with the right end d2 of the support.
    let (mut lo, mut hi) = (d_star2, 1.0);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if two_point_p(v, mid)?.1 < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let d2 = 0.5 * (lo + hi);
    // At the lower end of the interval the first switch collapses onto the
    // maximum, where the mass equation for d1 loses its root in [0, d2).
    let d1 = match two_point_p(v, d2) {
        Ok((d1, _)) => d1,
        Err(MfgError::NoD1 { .. }) if d2 - d_star2 <= 1e-9 => 0.0,
        Err(e) => return Err(e),
    };
    Ok(JumpFamilyParams {
        d1: (x0 + d1).rem_euclid(1.0),
        d2: Some((x0 + d2).rem_euclid(1.0)),
        e1: None,
        e2: None,
    })
}

/// Kink point `x0` of the zero-current solution for `g(m) = m` with rotation
/// number `p`, from `p = 2∫_{b}^{x0} speed − P` with `b` the maximum.
fn kink_family_for_p(v: &PeriodicPotential, p: f64, action: f64) -> Result<JumpFamilyParams> {
    let target = 0.5 * (p + action);
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if monotone_vacuum_action(v, mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(JumpFamilyParams {
        d1: (v.argmax()[0] + hi).rem_euclid(1.0),
        d2: None,
        e1: None,
        e2: None,
    })
}

/// Distance of solutions to their limits as `j → ∞` and `j → 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoticsRow {
    pub j: f64,
    pub regime: Regime,
    pub sup_m_minus_one: f64,
    pub sup_u: f64,
    pub hbar_ratio: f64,
    /// `sup |m_j − (1 + ∫V − V)|` when the zero-current problem is classical.
    pub classical_limit_distance: Option<f64>,
    /// Distance of the jump to the limiting switch point, otherwise.
    pub jump_limit_distance: Option<f64>,
}

pub fn asymptotics_report(
    c: &Coupling,
    v: &PeriodicPotential,
    j_list: &[f64],
    n: usize,
) -> Result<Vec<AsymptoticsRow>> {
    if !c.is_decreasing() {
        return Err(MfgError::InvalidInput("asymptotics are reported for decreasing couplings".into()));
    }
    let classical = 1.0 + v.mean() >= v.max_value();
    let limit_switch = if classical {
        None
    } else {
        Some((v.argmax()[0] + vacuum_offsets(v)?.0).rem_euclid(1.0))
    };
    j_list
        .iter()
        .map(|&j| {
            let t = antimonotone::solve_anti_current(c, v, j, n)?;
            let sup = |f: &dyn Fn(usize) -> f64| (0..n).map(f).fold(0.0f64, f64::max);
            let sup_m_minus_one = sup(&|i| (t.m.values[i] - 1.0).abs());
            let sup_u = sup(&|i| t.u.values[i].abs());
            let classical_limit_distance = classical.then(|| {
                let mean = v.mean();
                sup(&|i| (t.m.values[i] - (1.0 + mean - v.eval(i as f64 / n as f64))).abs())
            });
            let jump_limit_distance = match (limit_switch, t.family) {
                (Some(d), Some(f)) => {
                    let e = (f.d1 - d).rem_euclid(1.0);
                    Some(e.min(1.0 - e))
                }
                _ => None,
            };
            Ok(AsymptoticsRow {
                j,
                regime: t.regime,
                sup_m_minus_one,
                sup_u,
                hbar_ratio: 2.0 * t.hbar / (j * j),
                classical_limit_distance,
                jump_limit_distance,
            })
        })
        .collect()
}

/// The zero-current solution selected for a point of the flat interval.
pub fn flat_interval_variant(row: &CurveRow, v: &PeriodicPotential) -> Option<AntiJ0Variant> {
    match (row.regime, row.family) {
        (Regime::AntiJ0Classical, _) => Some(AntiJ0Variant::Classical),
        (Regime::AntiJ0TwoPoint, Some(f)) => f.d2.map(|d2| AntiJ0Variant::TwoPoint {
            d2: {
                let off = (d2 - v.argmax()[0]).rem_euclid(1.0);
                if off == 0.0 {
                    1.0
                } else {
                    off
                }
            },
        }),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const C: Coupling = Coupling::Decreasing;

    fn sine(a: f64) -> PeriodicPotential {
        PeriodicPotential::sine(a, 1, 0.25).unwrap()
    }

    #[test]
    fn boundaries_for_small_amplitude() {
        let b = regime_boundaries(&C, &sine(0.5)).unwrap();
        assert!((b.j_lower - 0.218).abs() < 0.002);
        assert!((b.j_upper - 1.750).abs() < 0.002);
        let (_, ap) = alpha(&C, &sine(0.5), b.j_lower).unwrap();
        assert!((ap - 1.0).abs() < 1e-8);
    }

    #[test]
    fn boundaries_for_large_amplitude() {
        let v = sine(5.0);
        let b = regime_boundaries(&C, &v).unwrap();
        assert_eq!(b.j_lower, 0.0);
        assert!((b.j_upper - 3.203).abs() < 0.003);
        assert_eq!(apriori_current_bound(&C, &v).unwrap(), b.j_upper);
        assert!(matches!(
            apriori_current_bound(&C, &sine(0.5)),
            Err(MfgError::HypothesisFails(_))
        ));
    }

    #[test]
    fn constant_potential_current_equals_p() {
        let v = PeriodicPotential::constant(0.0).unwrap();
        let t = p_of_j(&C, &v, &[0.3, 1.0, 2.0]).unwrap();
        for r in &t.rows {
            assert!((r.p - r.j).abs() < 1e-12);
        }
    }

    #[test]
    fn curve_is_even_in_j() {
        let v = PeriodicPotential::sine(0.5, 1, 0.1).unwrap();
        let t = hbar_of_j(&C, &v, &[-2.0, -0.5, -0.01, 0.01, 0.5, 2.0]).unwrap();
        for k in 0..3 {
            assert_eq!(t.rows[k].hbar, t.rows[5 - k].hbar);
            assert!((t.rows[k].p + t.rows[5 - k].p).abs() < 1e-10);
        }
    }

    #[test]
    fn flat_interval_matches_small_current_limit() {
        let v = sine(5.0);
        let (lo, hi) = flat_interval(&C, &v).unwrap();
        assert!(lo < 0.0 && hi > 0.0);
        let r = curve_row(&C, &v, 1e-5).unwrap();
        assert!((r.p - hi).abs() < 1e-2);
        let r = curve_row(&C, &v, -1e-5).unwrap();
        assert!((r.p - lo).abs() < 1e-2);
    }

    #[test]
    fn inverse_of_p_curve() {
        let v = sine(0.5);
        let rows = hbar_of_j(&C, &v, &[0.1, 0.5, 3.0]).unwrap().rows;
        let ps: Vec<f64> = rows.iter().map(|r| r.p).collect();
        let back = hbar_of_p(&C, &v, &ps).unwrap();
        for (a, b) in rows.iter().zip(&back.rows) {
            assert!((a.hbar - b.hbar).abs() < 1e-6);
            assert!((a.j - b.j).abs() < 1e-6);
        }
    }
}
