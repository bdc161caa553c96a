//! Solutions for decreasing couplings.

use serde::{Deserialize, Serialize};

use crate::algebra::{self, Branch};
use crate::coupling::Coupling;
use crate::error::{MfgError, Result};
use crate::potential::PeriodicPotential;
use crate::quad;
use crate::solution::{
    pieces_from_arcs, DensityLaw, GridFunction, JumpFamilyParams, Piece, Regime, SolutionTriple,
    VelocityLaw,
};

/// Branch densities at the critical Hamiltonian.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalData {
    pub hcr: f64,
    pub t_min: f64,
    pub alpha_minus: f64,
    pub alpha_plus: f64,
    pub m_minus_cr: GridFunction,
    pub m_plus_cr: GridFunction,
}

fn require_decreasing(c: &Coupling) -> Result<()> {
    if c.is_decreasing() {
        Ok(())
    } else {
        Err(MfgError::InvalidInput("this solver needs a decreasing coupling".into()))
    }
}

pub fn critical_data(c: &Coupling, v: &PeriodicPotential, j: f64, n: usize) -> Result<CriticalData> {
    require_decreasing(c)?;
    if !(j > 0.0) {
        return Err(MfgError::InvalidInput(format!("critical data needs j > 0, got {j}")));
    }
    let hcr = algebra::critical_hbar(c, v, j)?;
    let (alpha_minus, alpha_plus) = algebra::critical_masses(c, v, j, quad::SOLVER_TOL)?;
    let grid = |b: Branch| -> Result<GridFunction> {
        let vals = (0..n)
            .map(|i| algebra::density_at(c, v, j, hcr, b, i as f64 / n as f64))
            .collect::<Result<Vec<_>>>()?;
        GridFunction::new(vals, Vec::new())
    };
    Ok(CriticalData {
        hcr,
        t_min: c.branch_min(j)?.t_min,
        alpha_minus,
        alpha_plus,
        m_minus_cr: grid(Branch::Minus)?,
        m_plus_cr: grid(Branch::Plus)?,
    })
}

/// Solves on the mirrored potential with `|j|` when `j < 0`.
fn with_mirror<F>(c: &Coupling, v: &PeriodicPotential, j: f64, solve: F) -> Result<SolutionTriple>
where
    F: FnOnce(&PeriodicPotential, f64) -> Result<SolutionTriple>,
{
    if j >= 0.0 {
        solve(v, j)
    } else {
        let mirrored = v.mirrored();
        solve(&mirrored, -j)?.mirrored(c, v)
    }
}

/// Solution of case i or ii, or `None` when `α⁻ < 1 < α⁺`.
fn smooth_case(
    c: &Coupling,
    v: &PeriodicPotential,
    j: f64,
    alphas: (f64, f64),
    n: usize,
) -> Result<Option<SolutionTriple>> {
    let (am, ap) = alphas;
    let (branch, regime) = if ap <= 1.0 {
        (Branch::Plus, Regime::AntiCaseI)
    } else if am >= 1.0 {
        (Branch::Minus, Regime::AntiCaseIi)
    } else {
        return Ok(None);
    };
    let matched = algebra::match_mass(c, v, j, branch, 1.0)?;
    let pieces = vec![Piece::branch(0.0, 1.0, branch)];
    SolutionTriple::from_pieces(c, v, j, matched.hbar, pieces, regime, n).map(Some)
}

/// Unique regular solution for `j ≠ 0` and a potential with one maximum.
pub fn solve_anti_current(
    c: &Coupling,
    v: &PeriodicPotential,
    j: f64,
    n: usize,
) -> Result<SolutionTriple> {
    require_decreasing(c)?;
    if j == 0.0 || !j.is_finite() {
        return Err(MfgError::InvalidInput(format!(
            "current must be finite and non-zero, got {j}"
        )));
    }
    if !v.is_constant() && v.argmax().len() > 1 {
        return Err(MfgError::MultiMax {
            count: v.argmax().len(),
        });
    }
    with_mirror(c, v, j, |v, j| {
        let alphas = algebra::critical_masses(c, v, j, quad::SOLVER_TOL)?;
        if let Some(t) = smooth_case(c, v, j, alphas, n)? {
            return Ok(t);
        }
        let sw = algebra::solve_switch(c, v, j)?;
        let x0 = v.argmax()[0];
        let arcs = vec![
            (x0, sw.offset, minus_law(), VelocityLaw::Current),
            (x0 + sw.offset, 1.0 - sw.offset, plus_law(), VelocityLaw::Current),
        ];
        let pieces = pieces_from_arcs(arcs)?;
        let mut t = SolutionTriple::from_pieces(c, v, j, sw.hcr, pieces, Regime::AntiCaseIii, n)?;
        t.family = Some(JumpFamilyParams {
            d1: sw.d,
            d2: None,
            e1: None,
            e2: None,
        });
        Ok(t)
    })
}

fn minus_law() -> DensityLaw {
    DensityLaw::Branch {
        branch: Branch::Minus,
    }
}

fn plus_law() -> DensityLaw {
    DensityLaw::Branch {
        branch: Branch::Plus,
    }
}

/// Curve in the `(d1, d2)` rectangle along which the mass condition is solved.
///
/// Offsets are measured from the first maximum `x_a`; the second maximum sits
/// at offset `x0`. Both curves run from `(0, x0)`, where the mass is `α⁺`, to
/// `(x0, 1)`, where it is `α⁻`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SwitchPath {
    /// `s ↦ (x0 s^w, x0 + (1 − x0) s^{1/w})` with `w = t/(1 − t)`;
    /// `t = 1/2` is the straight segment.
    Bent { t: f64 },
    /// Straight segment between two `(d1, d2)` offset pairs.
    Segment { from: (f64, f64), to: (f64, f64) },
}

impl Default for SwitchPath {
    fn default() -> Self {
        SwitchPath::Bent { t: 0.5 }
    }
}

impl SwitchPath {
    fn point(&self, x0: f64, s: f64) -> (f64, f64) {
        match *self {
            SwitchPath::Bent { t } => {
                let w = t / (1.0 - t);
                (x0 * s.powf(w), x0 + (1.0 - x0) * s.powf(1.0 / w))
            }
            SwitchPath::Segment { from, to } => (
                from.0 + s * (to.0 - from.0),
                from.1 + s * (to.1 - from.1),
            ),
        }
    }

    fn validate(&self, x0: f64) -> Result<()> {
        match *self {
            SwitchPath::Bent { t } if t > 0.0 && t < 1.0 => Ok(()),
            SwitchPath::Bent { t } => Err(MfgError::InvalidInput(format!(
                "path parameter must lie in (0, 1), got {t}"
            ))),
            SwitchPath::Segment { from, to } => {
                let ok = |(d1, d2): (f64, f64)| (0.0..=x0).contains(&d1) && (x0..=1.0).contains(&d2);
                if ok(from) && ok(to) {
                    Ok(())
                } else {
                    Err(MfgError::InvalidInput(format!(
                        "segment endpoints must satisfy 0 <= d1 <= {x0} <= d2 <= 1"
                    )))
                }
            }
        }
    }
}

/// Two-jump solutions at `H̄ᶜʳ` for a potential with two maxima.
///
/// Outside `α⁻ < 1 < α⁺` the unique smooth solution is returned instead.
pub fn solve_anti_multimax(
    c: &Coupling,
    v: &PeriodicPotential,
    j: f64,
    path: SwitchPath,
    n: usize,
) -> Result<SolutionTriple> {
    require_decreasing(c)?;
    if j == 0.0 || !j.is_finite() {
        return Err(MfgError::InvalidInput(format!(
            "current must be finite and non-zero, got {j}"
        )));
    }
    let found = if v.is_constant() { 0 } else { v.argmax().len() };
    if found != 2 {
        return Err(MfgError::MaxCount { expected: 2, found });
    }
    with_mirror(c, v, j, |v, j| {
        let tol = quad::SOLVER_TOL;
        let alphas = algebra::critical_masses(c, v, j, tol)?;
        if let Some(t) = smooth_case(c, v, j, alphas, n)? {
            return Ok(t);
        }
        let (xa, xb) = (v.argmax()[0], v.argmax()[1]);
        let x0 = xb - xa;
        path.validate(x0)?;
        let hcr = algebra::critical_hbar(c, v, j)?;
        let breaks = v.argmax().to_vec();
        let gap = |x: f64| -> Result<f64> {
            let p = algebra::density_at(c, v, j, hcr, Branch::Plus, x)?;
            let m = algebra::density_at(c, v, j, hcr, Branch::Minus, x)?;
            Ok(p - m)
        };
        let cumulative = |s: f64| quad::try_integrate_arc(gap, xa, s, &breaks, tol);
        let g_x0 = cumulative(x0)?;
        let mass = |(d1, d2): (f64, f64)| -> Result<f64> {
            Ok(alphas.1 - cumulative(d1)? - (cumulative(d2)? - g_x0))
        };
        let start = mass(path.point(x0, 0.0))?;
        let end = mass(path.point(x0, 1.0))?;
        if (start - 1.0) * (end - 1.0) > 0.0 {
            return Err(MfgError::NoRootOnPath);
        }
        let decreasing = start > end;
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let above = mass(path.point(x0, mid))? > 1.0;
            if above == decreasing {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (d1, d2) = path.point(x0, 0.5 * (lo + hi));
        let arcs = vec![
            (xa, d1, minus_law(), VelocityLaw::Current),
            (xa + d1, x0 - d1, plus_law(), VelocityLaw::Current),
            (xb, d2 - x0, minus_law(), VelocityLaw::Current),
            (xa + d2, 1.0 - d2, plus_law(), VelocityLaw::Current),
        ];
        let pieces = pieces_from_arcs(arcs)?;
        let mut t = SolutionTriple::from_pieces(c, v, j, hcr, pieces, Regime::AntiMultimax, n)?;
        t.family = Some(JumpFamilyParams {
            d1: (xa + d1).rem_euclid(1.0),
            d2: Some((xa + d2).rem_euclid(1.0)),
            e1: None,
            e2: None,
        });
        Ok(t)
    })
}

/// Zero-current families for `g(m) = −m`.
///
/// `d2`, `e1`, `e2` are offsets from the first maximum of `V`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AntiJ0Variant {
    Classical,
    TwoPoint { d2: f64 },
    FourPoint { d2: f64, e1: f64, e2: f64 },
}

/// `H̄₀ = max(max V, 1 + ∫V)`.
pub fn hbar_zero(v: &PeriodicPotential) -> f64 {
    v.max_value().max(1.0 + v.mean())
}

/// `∫_a^b (max V − V)` along the arc starting at the first maximum.
fn excess_mass(v: &PeriodicPotential, x0: f64, a: f64, b: f64) -> Result<f64> {
    let top = v.max_value();
    quad::try_integrate_arc(|x| Ok(top - v.eval(x)), x0 + a, b - a, v.argmax(), quad::SOLVER_TOL)
}

/// Solves `∫_{d1}^{d2} (max V − V) = target` for the offset `d1 ∈ [0, d2)`.
pub(crate) fn solve_d1(v: &PeriodicPotential, x0: f64, d2: f64, target: f64) -> Result<f64> {
    if excess_mass(v, x0, 0.0, d2)? < target || target <= 0.0 {
        return Err(MfgError::NoD1 { d2 });
    }
    let (mut lo, mut hi) = (0.0, d2);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if excess_mass(v, x0, mid, d2)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

pub fn solve_anti_j0(
    c: &Coupling,
    v: &PeriodicPotential,
    variant: AntiJ0Variant,
    n: usize,
) -> Result<SolutionTriple> {
    if !matches!(c, Coupling::Decreasing) {
        return Err(MfgError::InvalidInput(
            "the zero-current families are built for g(m) = -m".into(),
        ));
    }
    let h0 = hbar_zero(v);
    let classical = 1.0 + v.mean() >= v.max_value();
    if let AntiJ0Variant::Classical = variant {
        if !classical {
            return Err(MfgError::VariantInfeasible(format!(
                "max V = {} exceeds 1 + mean V = {}",
                v.max_value(),
                1.0 + v.mean()
            )));
        }
        let pieces = vec![Piece::new(0.0, 1.0, DensityLaw::Saturated, VelocityLaw::Rest)];
        return SolutionTriple::from_pieces(c, v, 0.0, h0, pieces, Regime::AntiJ0Classical, n);
    }
    if classical {
        return Err(MfgError::VariantInfeasible(format!(
            "jump families need max V > 1 + mean V, got {} <= {}",
            v.max_value(),
            1.0 + v.mean()
        )));
    }
    let x0 = v.argmax()[0];
    let support = |a: f64, b: f64| (x0 + a, b - a, DensityLaw::Saturated, VelocityLaw::Rest);
    let vacuum = |a: f64, b: f64, vel| (x0 + a, b - a, DensityLaw::Vacuum, vel);
    let abs = |s: f64| (x0 + s).rem_euclid(1.0);
    let check_offset = |name: &str, s: f64| -> Result<()> {
        if s > 0.0 && s <= 1.0 {
            Ok(())
        } else {
            Err(MfgError::VariantInfeasible(format!("{name} = {s} must lie in (0, 1]")))
        }
    };
    match variant {
        AntiJ0Variant::Classical => unreachable!(),
        AntiJ0Variant::TwoPoint { d2 } => {
            check_offset("d2", d2)?;
            let d1 = solve_d1(v, x0, d2, 1.0)?;
            let arcs = vec![
                vacuum(0.0, d1, VelocityLaw::Forward),
                support(d1, d2),
                vacuum(d2, 1.0, VelocityLaw::Backward),
            ];
            let mut t = SolutionTriple::from_pieces(
                c,
                v,
                0.0,
                h0,
                pieces_from_arcs(arcs)?,
                Regime::AntiJ0TwoPoint,
                n,
            )?;
            t.family = Some(JumpFamilyParams {
                d1: abs(d1),
                d2: Some(abs(d2)),
                e1: None,
                e2: None,
            });
            Ok(t)
        }
        AntiJ0Variant::FourPoint { d2, e1, e2 } => {
            for (name, s) in [("d2", d2), ("e1", e1), ("e2", e2)] {
                check_offset(name, s)?;
            }
            if !(d2 < e1 && e1 < e2) {
                return Err(MfgError::VariantInfeasible(format!(
                    "need d2 < e1 < e2, got {d2}, {e1}, {e2}"
                )));
            }
            let second = v
                .argmax()
                .iter()
                .map(|&x| (x - x0).rem_euclid(1.0))
                .find(|&s| s > d2 && s < e1);
            let Some(xm) = second else {
                return Err(MfgError::VariantInfeasible(
                    "no second maximum of V between d2 and e1".into(),
                ));
            };
            let rest = 1.0 - excess_mass(v, x0, e1, e2)?;
            let d1 = solve_d1(v, x0, d2, rest)?;
            let arcs = vec![
                vacuum(0.0, d1, VelocityLaw::Forward),
                support(d1, d2),
                vacuum(d2, xm, VelocityLaw::Backward),
                vacuum(xm, e1, VelocityLaw::Forward),
                support(e1, e2),
                vacuum(e2, 1.0, VelocityLaw::Backward),
            ];
            let mut t = SolutionTriple::from_pieces(
                c,
                v,
                0.0,
                h0,
                pieces_from_arcs(arcs)?,
                Regime::AntiJ0FourPoint,
                n,
            )?;
            t.family = Some(JumpFamilyParams {
                d1: abs(d1),
                d2: Some(abs(d2)),
                e1: Some(abs(e1)),
                e2: Some(abs(e2)),
            });
            Ok(t)
        }
    }
}

/// Evidence that no regular solution exists above the critical value.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AboveCritical {
    /// `j > 0`: the branches stay apart, so gluing them needs an upward jump
    /// of `u_x`.
    Gap {
        hbar: f64,
        hcr: f64,
        min_gap: f64,
        mass_minus: f64,
        mass_plus: f64,
        mass_interval: bool,
    },
    /// `j = 0`: the speed `√(2(H̄ − V))` never vanishes and the full-support
    /// density has mass above one.
    Obstruction {
        hbar: f64,
        h0: f64,
        min_speed: f64,
        full_support_mass: f64,
    },
}

pub fn reject_above_critical(
    c: &Coupling,
    v: &PeriodicPotential,
    hbar: f64,
    j: f64,
) -> Result<AboveCritical> {
    require_decreasing(c)?;
    if j < 0.0 {
        return reject_above_critical(c, &v.mirrored(), hbar, -j);
    }
    if j == 0.0 {
        let h0 = hbar_zero(v);
        if hbar <= h0 {
            return Err(MfgError::NotAboveCritical { hbar, critical: h0 });
        }
        return Ok(AboveCritical::Obstruction {
            hbar,
            h0,
            min_speed: (2.0 * (hbar - v.max_value())).sqrt(),
            full_support_mass: hbar - v.mean(),
        });
    }
    let hcr = algebra::critical_hbar(c, v, j)?;
    if hbar <= hcr {
        return Err(MfgError::NotAboveCritical { hbar, critical: hcr });
    }
    let gap = |x: f64| -> Result<f64> {
        Ok(algebra::density_at(c, v, j, hbar, Branch::Plus, x)?
            - algebra::density_at(c, v, j, hbar, Branch::Minus, x)?)
    };
    let mut min_gap = f64::INFINITY;
    let n = 1 << 14;
    for i in 0..n {
        min_gap = min_gap.min(gap(i as f64 / n as f64)?);
    }
    for &x in v.argmax() {
        min_gap = min_gap.min(gap(x)?);
    }
    let tol = quad::SOLVER_TOL;
    let mass_minus = algebra::branch_mass(c, v, j, hbar, Branch::Minus, tol)?;
    let mass_plus = algebra::branch_mass(c, v, j, hbar, Branch::Plus, tol)?;
    Ok(AboveCritical::Gap {
        hbar,
        hcr,
        min_gap,
        mass_minus,
        mass_plus,
        mass_interval: mass_minus < 1.0 && 1.0 < mass_plus,
    })
}
