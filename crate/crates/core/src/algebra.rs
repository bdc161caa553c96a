//! Scalar solvers: branch roots of `F_j(m) = H̄ − V(x)`, mass matching in
//! `H̄` and the switching point of the glued critical density.

use serde::{Deserialize, Serialize};

use crate::coupling::Coupling;
use crate::error::{MfgError, Result};
use crate::potential::PeriodicPotential;
use crate::quad;

/// Root branch of `F_j(m) = rhs`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Minus,
    Plus,
    Unique,
}

impl Branch {
    pub fn name(self) -> &'static str {
        match self {
            Branch::Minus => "minus",
            Branch::Plus => "plus",
            Branch::Unique => "unique",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootSpec {
    pub branch: Branch,
    pub j: f64,
    pub rhs: f64,
    pub tol: f64,
}

impl RootSpec {
    pub fn new(branch: Branch, j: f64, rhs: f64) -> Self {
        RootSpec {
            branch,
            j,
            rhs,
            tol: 1e-12,
        }
    }
}

/// Slack below the critical value that still counts as tangency when the
/// right-hand side comes from evaluating `H̄ᶜʳ − V(x)` near a maximum.
pub(crate) const TANGENCY_SLACK: f64 = 1e-11;

/// Solves `F_j(m) = rhs` on the requested branch.
pub fn solve_branch(c: &Coupling, spec: RootSpec) -> Result<f64> {
    solve_with_slack(c, spec, 1e-14)
}

fn solve_with_slack(c: &Coupling, spec: RootSpec, slack: f64) -> Result<f64> {
    let RootSpec { branch, j, rhs, .. } = spec;
    if !(rhs.is_finite() && j.is_finite()) {
        return Err(MfgError::InvalidInput(format!(
            "root problem needs finite data, got j = {j}, rhs = {rhs}"
        )));
    }
    let f = |m: f64| c.f_raw(j, m) - rhs;
    let df = |m: f64| c.df(j, m);

    if c.is_increasing() || j == 0.0 {
        if c.is_increasing() && branch != Branch::Unique {
            return Err(MfgError::InvalidInput(format!(
                "increasing couplings have a unique branch, got {}",
                branch.name()
            )));
        }
        // F is monotone on (0, ∞): decreasing for increasing g, increasing
        // for decreasing g at j = 0.
        let sign = if c.is_increasing() { 1.0 } else { -1.0 };
        let (lo, hi) = bracket_monotone(|m| sign * f(m))?;
        return Ok(newton_bisect(f, df, lo, hi));
    }

    let bp = c.branch_min(j)?;
    let t = bp.t_min;
    let scale = rhs.abs().max(1.0);
    if rhs < bp.f_min - slack * scale {
        return Err(MfgError::BelowCritical {
            rhs,
            critical: bp.f_min,
        });
    }
    // Within rounding of the tangency both roots coincide; solving there
    // would split them by about the square root of the rounding error.
    if rhs <= bp.f_min + 8.0 * f64::EPSILON * scale {
        return Ok(t);
    }
    match branch {
        Branch::Minus => {
            let mut lo = 0.5 * t;
            let mut n = 0;
            while f(lo) <= 0.0 {
                lo *= 0.5;
                n += 1;
                if n > 2000 || lo == 0.0 {
                    return Err(MfgError::NoBracket(format!("minus branch, rhs = {rhs}")));
                }
            }
            Ok(newton_bisect(f, df, lo, t))
        }
        Branch::Plus => {
            let mut hi = 2.0 * t;
            let mut n = 0;
            while f(hi) <= 0.0 {
                hi *= 2.0;
                n += 1;
                if n > 2000 || !hi.is_finite() {
                    return Err(MfgError::NoBracket(format!("plus branch, rhs = {rhs}")));
                }
            }
            Ok(newton_bisect(f, df, t, hi))
        }
        Branch::Unique => Err(MfgError::InvalidInput(
            "decreasing couplings need the minus or plus branch".into(),
        )),
    }
}

/// Finds `[lo, hi]` with `h(lo) > 0 ≥ h(hi)` for a decreasing `h` on `(0, ∞)`.
fn bracket_monotone<H: Fn(f64) -> f64>(h: H) -> Result<(f64, f64)> {
    let (mut lo, mut hi) = (1.0, 1.0);
    let mut n = 0;
    while h(lo) <= 0.0 {
        lo *= 0.5;
        n += 1;
        if n > 1100 || lo == 0.0 {
            return Err(MfgError::NoBracket("no root near m = 0".into()));
        }
    }
    n = 0;
    while h(hi) > 0.0 {
        hi *= 2.0;
        n += 1;
        if n > 1100 || !hi.is_finite() {
            return Err(MfgError::NoBracket("no root at large m".into()));
        }
    }
    Ok((lo, hi))
}

/// Safeguarded Newton inside a sign-change bracket.
fn newton_bisect<F, D>(f: F, df: D, lo: f64, hi: f64) -> f64
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let (mut a, mut b) = (lo, hi);
    let fa = f(a);
    if fa == 0.0 {
        return a;
    }
    let a_positive = fa > 0.0;
    let mut x = if b / a > 4.0 { (a * b).sqrt() } else { 0.5 * (a + b) };
    for _ in 0..400 {
        let fx = f(x);
        if fx == 0.0 {
            return x;
        }
        if (fx > 0.0) == a_positive {
            a = x;
        } else {
            b = x;
        }
        let d = df(x);
        let newton = x - fx / d;
        let next = if d != 0.0 && newton.is_finite() && newton > a && newton < b {
            newton
        } else if b / a > 4.0 {
            (a * b).sqrt()
        } else {
            0.5 * (a + b)
        };
        if (next - x).abs() <= 2.0 * f64::EPSILON * x || b - a <= 2.0 * f64::EPSILON * b {
            return next;
        }
        x = next;
    }
    x
}

/// Density on `branch` at a single point for the given `H̄`.
pub fn density_at(
    c: &Coupling,
    v: &PeriodicPotential,
    j: f64,
    hbar: f64,
    branch: Branch,
    x: f64,
) -> Result<f64> {
    solve_with_slack(c, RootSpec::new(branch, j, hbar - v.eval(x)), TANGENCY_SLACK)
}

/// `∫ m` over the torus for the branch density at `H̄`.
pub fn branch_mass(
    c: &Coupling,
    v: &PeriodicPotential,
    j: f64,
    hbar: f64,
    branch: Branch,
    tol: f64,
) -> Result<f64> {
    let breaks = v.argmax().to_vec();
    quad::try_integrate(|x| density_at(c, v, j, hbar, branch, x), 0.0, 1.0, &breaks, tol)
}

/// Critical Hamiltonian `max V + F_j(t_min)`.
pub fn critical_hbar(c: &Coupling, v: &PeriodicPotential, j: f64) -> Result<f64> {
    Ok(v.max_value() + c.branch_min(j)?.f_min)
}

/// Masses `(α⁻, α⁺)` of the two branch densities at `H̄ᶜʳ`.
pub fn critical_masses(c: &Coupling, v: &PeriodicPotential, j: f64, tol: f64) -> Result<(f64, f64)> {
    let hcr = critical_hbar(c, v, j)?;
    let minus = branch_mass(c, v, j, hcr, Branch::Minus, tol)?;
    let plus = branch_mass(c, v, j, hcr, Branch::Plus, tol)?;
    Ok((minus, plus))
}

/// Result of mass matching.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MassMatch {
    pub hbar: f64,
    pub mass: f64,
    pub branch: Branch,
    pub j: f64,
}

/// Finds `H̄` with `∫ m_H̄ = target` on a single branch.
pub fn match_mass(
    c: &Coupling,
    v: &PeriodicPotential,
    j: f64,
    branch: Branch,
    target: f64,
) -> Result<MassMatch> {
    let tol = quad::SOLVER_TOL;
    if !(target > 0.0 && target.is_finite()) {
        return Err(MfgError::InvalidInput(format!("target mass must be positive, got {target}")));
    }
    let mass = |h: f64| branch_mass(c, v, j, h, branch, tol);

    let (mut lo, mut hi, increasing) = if c.is_increasing() || j == 0.0 {
        if j == 0.0 && c.is_decreasing() && branch == Branch::Minus {
            return Err(MfgError::InvalidInput(
                "the minus branch is empty at zero current".into(),
            ));
        }
        // A constant density `target` corresponds to H̄ = V + F(target), so
        // the extreme values of V bracket the answer.
        let ft = c.f(j, target)?;
        let a = v.min_value() + ft;
        let b = v.max_value() + ft;
        if b - a <= 1e-14 * b.abs().max(1.0) {
            return Ok(MassMatch {
                hbar: v.mean() + ft,
                mass: target,
                branch,
                j,
            });
        }
        (a, b, c.is_decreasing())
    } else {
        let hcr = critical_hbar(c, v, j)?;
        let at_critical = mass(hcr)?;
        let increasing = match branch {
            Branch::Plus => true,
            Branch::Minus => false,
            Branch::Unique => {
                return Err(MfgError::InvalidInput(
                    "decreasing couplings need the minus or plus branch".into(),
                ))
            }
        };
        let overshoot = if increasing {
            at_critical > target
        } else {
            at_critical < target
        };
        if (at_critical - target).abs() <= 1e-12 {
            return Ok(MassMatch {
                hbar: hcr,
                mass: at_critical,
                branch,
                j,
            });
        }
        if overshoot {
            return Err(MfgError::NoSolutionInBranch {
                branch: branch.name(),
                mass: at_critical,
            });
        }
        let mut step = 0.5;
        let mut upper = hcr + step;
        let mut n = 0;
        loop {
            let m = mass(upper)?;
            let crossed = if increasing { m >= target } else { m <= target };
            if crossed {
                break;
            }
            step *= 2.0;
            upper = hcr + step;
            n += 1;
            if n > 200 {
                return Err(MfgError::NoBracket(format!(
                    "{} branch mass never reaches {target}",
                    branch.name()
                )));
            }
        }
        let lower = if n == 0 { hcr } else { hcr + 0.5 * step };
        (lower, upper, increasing)
    };

    // Bisection: keep `lo` on the side where the mass has not reached target.
    let below = |m: f64| if increasing { m < target } else { m > target };
    let mut best = (f64::INFINITY, 0.5 * (lo + hi), f64::NAN);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let m = mass(mid)?;
        let err = (m - target).abs();
        if err < best.0 {
            best = (err, mid, m);
        }
        if below(m) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-13 * mid.abs().max(1.0) || err <= 1e-14 {
            break;
        }
    }
    Ok(MassMatch {
        hbar: best.1,
        mass: best.2,
        branch,
        j,
    })
}

/// Switching point of the glued critical density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Switch {
    /// Absolute location of the switch in `[0, 1)`.
    pub d: f64,
    /// Distance from the maximum point to the switch.
    pub offset: f64,
    pub hcr: f64,
    pub alpha_minus: f64,
    pub alpha_plus: f64,
}

/// Finds `d` such that the density equal to `m⁻` on `[x₀, x₀ + d)` and to
/// `m⁺` elsewhere has unit mass, where `x₀` is the maximum point of `V`.
pub fn solve_switch(c: &Coupling, v: &PeriodicPotential, j: f64) -> Result<Switch> {
    if !v.info().single_max() {
        return Err(MfgError::WrongRegime(format!(
            "switching needs a single maximum, found {} (constant: {})",
            v.argmax().len(),
            v.is_constant()
        )));
    }
    let tol = quad::SOLVER_TOL;
    let hcr = critical_hbar(c, v, j)?;
    let (am, ap) = critical_masses(c, v, j, tol)?;
    if !(am < 1.0 && 1.0 < ap) {
        return Err(MfgError::WrongRegime(format!(
            "switching needs alpha- < 1 < alpha+, got {am} and {ap}"
        )));
    }
    let x0 = v.argmax()[0];
    let offset = switch_offset(c, v, j, hcr, x0, 0.0, 1.0, ap - 1.0, tol)?;
    Ok(Switch {
        d: (x0 + offset).rem_euclid(1.0),
        offset,
        hcr,
        alpha_minus: am,
        alpha_plus: ap,
    })
}

/// Solves `∫_{x₀+a}^{x₀+s} (m⁺ − m⁻) = excess` for `s ∈ (a, b)`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn switch_offset(
    c: &Coupling,
    v: &PeriodicPotential,
    j: f64,
    hbar: f64,
    x0: f64,
    a: f64,
    b: f64,
    excess: f64,
    tol: f64,
) -> Result<f64> {
    let gap = |x: f64| -> Result<f64> {
        let plus = density_at(c, v, j, hbar, Branch::Plus, x)?;
        let minus = density_at(c, v, j, hbar, Branch::Minus, x)?;
        Ok(plus - minus)
    };
    let breaks = v.argmax().to_vec();
    let integral = |s: f64| quad::try_integrate_arc(gap, x0 + a, s - a, &breaks, tol);
    let (mut lo, mut hi) = (a, b);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        // Integrate from the current lower end to keep each step cheap.
        if integral(mid)? < excess {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}
