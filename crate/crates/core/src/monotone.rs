//! Solutions for increasing couplings.

use serde::{Deserialize, Serialize};

use crate::algebra::{self, Branch};
use crate::coupling::Coupling;
use crate::error::{MfgError, Result};
use crate::potential::PeriodicPotential;
use crate::quad;
use crate::solution::{
    pieces_from_arcs, DensityLaw, JumpFamilyParams, Piece, Regime, SolutionTriple, VelocityLaw,
};

/// Choice of `u` in the zero-current family for `g(m) = m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MonotoneVariant {
    Plus,
    Minus,
    /// Downward kink of `u` at `x0`.
    Kink { x0: f64 },
}

fn require_increasing(c: &Coupling) -> Result<()> {
    if c.is_increasing() {
        Ok(())
    } else {
        Err(MfgError::InvalidInput("this solver needs an increasing coupling".into()))
    }
}

/// Unique smooth solution for `j ≠ 0`.
pub fn solve_monotone_current(
    c: &Coupling,
    v: &PeriodicPotential,
    j: f64,
    n: usize,
) -> Result<SolutionTriple> {
    require_increasing(c)?;
    if j == 0.0 || !j.is_finite() {
        return Err(MfgError::InvalidInput(format!(
            "current must be finite and non-zero, got {j}"
        )));
    }
    let matched = algebra::match_mass(c, v, j, Branch::Unique, 1.0)?;
    let pieces = vec![Piece::branch(0.0, 1.0, Branch::Unique)];
    SolutionTriple::from_pieces(c, v, j, matched.hbar, pieces, Regime::MonotoneSmooth, n)
}

/// `∫ (V − H̄)⁺`.
pub fn positive_part_mass(v: &PeriodicPotential, hbar: f64) -> Result<f64> {
    let mut breaks = v.level_crossings(hbar);
    breaks.extend_from_slice(v.argmax());
    quad::integrate(|x| (v.eval(x) - hbar).max(0.0), 0.0, 1.0, &breaks, quad::SOLVER_TOL)
}

/// `H̄` for the zero-current problem with `g(m) = m`.
pub fn monotone_j0_hbar(v: &PeriodicPotential) -> Result<f64> {
    let (mut lo, mut hi) = (v.mean() - 1.0, v.max_value());
    if lo <= v.min_value() {
        return Ok(lo);
    }
    // ∫(V − H̄)⁺ decreases from 1 at lo to 0 at hi.
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if positive_part_mass(v, mid)? > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Whether the classical solution `u ≡ 0` exists: `∫V ≤ 1 + min V`.
pub fn monotone_j0_is_classical(v: &PeriodicPotential) -> bool {
    v.mean() <= 1.0 + v.min_value()
}

/// Zero-current solutions for `g(m) = m`: `m = (V − H̄)⁺`.
pub fn solve_monotone_j0(
    c: &Coupling,
    v: &PeriodicPotential,
    variant: MonotoneVariant,
    n: usize,
) -> Result<SolutionTriple> {
    if !matches!(c, Coupling::Increasing) {
        return Err(MfgError::InvalidInput(
            "the zero-current family is built for g(m) = m".into(),
        ));
    }
    let hbar = monotone_j0_hbar(v)?;
    if monotone_j0_is_classical(v) {
        if let MonotoneVariant::Kink { .. } = variant {
            return Err(MfgError::SmoothOnly);
        }
        let pieces = vec![Piece::new(0.0, 1.0, DensityLaw::Saturated, VelocityLaw::Rest)];
        return SolutionTriple::from_pieces(c, v, 0.0, hbar, pieces, Regime::MonotoneJ0Smooth, n);
    }
    let (pieces, family) = match variant {
        MonotoneVariant::Plus => (
            vec![Piece::new(0.0, 1.0, DensityLaw::Saturated, VelocityLaw::Forward)],
            None,
        ),
        MonotoneVariant::Minus => (
            vec![Piece::new(0.0, 1.0, DensityLaw::Saturated, VelocityLaw::Backward)],
            None,
        ),
        MonotoneVariant::Kink { x0 } => {
            let x0 = x0.rem_euclid(1.0);
            let vx = v.eval(x0);
            if vx >= hbar {
                return Err(MfgError::KinkInfeasible { x0, v: vx, hbar });
            }
            // The upward switch sits at a maximum of V, where the speed
            // √(2(H̄ − V)⁺) vanishes, so it is not a jump.
            let b = v.argmax()[0];
            let forward = (x0 - b).rem_euclid(1.0);
            let arcs = vec![
                (b, forward, DensityLaw::Saturated, VelocityLaw::Forward),
                (x0, 1.0 - forward, DensityLaw::Saturated, VelocityLaw::Backward),
            ];
            let family = JumpFamilyParams {
                d1: x0,
                d2: None,
                e1: None,
                e2: None,
            };
            (pieces_from_arcs(arcs)?, Some(family))
        }
    };
    let mut t = SolutionTriple::from_pieces(c, v, 0.0, hbar, pieces, Regime::MonotoneJ0Kinked, n)?;
    t.family = family;
    Ok(t)
}
