//! Picks the construction that fits a coupling, a potential and a current
//! or rotation number.

use serde::{Deserialize, Serialize};

use crate::antimonotone::{self, AntiJ0Variant, SwitchPath};
use crate::coupling::Coupling;
use crate::error::{MfgError, Result};
use crate::monotone::{self, MonotoneVariant};
use crate::potential::PeriodicPotential;
use crate::regimes;
use crate::solution::SolutionTriple;

/// Selects a member of a non-unique family.
///
/// All three enums are tagged by `kind` with distinct names, so one JSON
/// object identifies the family it belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Variant {
    Monotone(MonotoneVariant),
    AntiJ0(AntiJ0Variant),
    Path(SwitchPath),
}

fn wrong(variant: &Variant, what: &str) -> MfgError {
    MfgError::InvalidInput(format!("variant {variant:?} does not apply to {what}"))
}

/// The zero-current variant used when none is requested.
pub fn default_anti_j0(v: &PeriodicPotential) -> AntiJ0Variant {
    if 1.0 + v.mean() >= v.max_value() {
        AntiJ0Variant::Classical
    } else {
        AntiJ0Variant::TwoPoint { d2: 1.0 }
    }
}

/// Solves for a prescribed current `j`.
pub fn solve_current(
    c: &Coupling,
    v: &PeriodicPotential,
    j: f64,
    variant: Option<Variant>,
    n: usize,
) -> Result<SolutionTriple> {
    if !j.is_finite() {
        return Err(MfgError::InvalidInput(format!("current must be finite, got {j}")));
    }
    if c.is_increasing() {
        return if j == 0.0 {
            match variant {
                None => monotone::solve_monotone_j0(c, v, MonotoneVariant::Plus, n),
                Some(Variant::Monotone(m)) => monotone::solve_monotone_j0(c, v, m, n),
                Some(other) => Err(wrong(&other, "an increasing coupling at zero current")),
            }
        } else {
            match variant {
                None => monotone::solve_monotone_current(c, v, j, n),
                Some(other) => Err(wrong(&other, "an increasing coupling with non-zero current")),
            }
        };
    }
    if j == 0.0 {
        return match variant {
            None => antimonotone::solve_anti_j0(c, v, default_anti_j0(v), n),
            Some(Variant::AntiJ0(a)) => antimonotone::solve_anti_j0(c, v, a, n),
            Some(other) => Err(wrong(&other, "a decreasing coupling at zero current")),
        };
    }
    let multimax = !v.is_constant() && v.argmax().len() > 1;
    match (variant, multimax) {
        (None, false) => antimonotone::solve_anti_current(c, v, j, n),
        (None, true) => antimonotone::solve_anti_multimax(c, v, j, SwitchPath::default(), n),
        (Some(Variant::Path(path)), true) => antimonotone::solve_anti_multimax(c, v, j, path, n),
        (Some(other), _) => Err(wrong(&other, "this potential and current")),
    }
}

/// Solves for a prescribed rotation number `p`.
///
/// On the flat interval the zero-current member
/// with that `p` is returned; `variant` must then be absent.
pub fn solve_rotation(
    c: &Coupling,
    v: &PeriodicPotential,
    p: f64,
    variant: Option<Variant>,
    n: usize,
) -> Result<SolutionTriple> {
    let row = regimes::hbar_of_p(c, v, &[p])?.rows.remove(0);
    if row.j == 0.0 && c.is_increasing() {
        if let Some(other) = variant {
            return Err(wrong(&other, "a rotation number on the flat interval"));
        }
        let (_, action) = regimes::flat_interval(c, v)?;
        let chosen = match row.family {
            _ if action == 0.0 => MonotoneVariant::Plus,
            _ if p >= action => MonotoneVariant::Plus,
            _ if p <= -action => MonotoneVariant::Minus,
            Some(f) if v.eval(f.d1) < row.hbar => MonotoneVariant::Kink { x0: f.d1 },
            _ => MonotoneVariant::Plus,
        };
        return monotone::solve_monotone_j0(c, v, chosen, n);
    }
    if row.j == 0.0 && c.is_decreasing() {
        if let Some(other) = variant {
            return Err(wrong(&other, "a rotation number on the flat interval"));
        }
        let chosen = regimes::flat_interval_variant(&row, v).unwrap_or_else(|| default_anti_j0(v));
        return antimonotone::solve_anti_j0(c, v, chosen, n);
    }
    solve_current(c, v, row.j, variant, n)
}
