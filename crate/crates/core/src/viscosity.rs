//! Certificates for candidate solutions of
//! `(u_x + p)²/2 + V(x) = g(m) + H̄`, `(m(u_x + p))_x = 0`.
//!
//! At a jump the Hamiltonian is replaced by its semicontinuous envelopes in
//! `m`. Smooth test functions touching `u` at a kink have slopes between the
//! one-sided derivatives, and the Hamiltonian is a parabola in the slope, so
//! each touching test reduces to the interval endpoints and the vertex.

use serde::{Deserialize, Serialize};

use crate::algebra::{self, Branch};
use crate::coupling::Coupling;
use crate::error::{MfgError, Result};
use crate::potential::PeriodicPotential;
use crate::quad;
use crate::solution::{
    mirror_pieces, pieces_from_arcs, DensityLaw, Laws, Piece, Regime, SolutionTriple, VelocityLaw,
    JUMP_TOL,
};

pub const DEFAULT_TOL: f64 = 1e-8;

/// Samples per piece for the pointwise equation check.
const PIECE_SAMPLES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JumpSign {
    Down,
    Up,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpReport {
    pub location: f64,
    pub m_left: f64,
    pub m_right: f64,
    pub ux_left: f64,
    pub ux_right: f64,
    pub ux_jump: JumpSign,
    /// Test with smooth functions touching from above; `None` if no such
    /// function exists at this point.
    pub subsolution: Option<bool>,
    /// Test with smooth functions touching from below.
    pub supersolution: Option<bool>,
}

impl JumpReport {
    pub fn passes(&self) -> bool {
        self.subsolution != Some(false) && self.supersolution != Some(false)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub is_viscosity: bool,
    pub is_regular: bool,
    /// Every piece satisfies its own equations (before any jump is looked at).
    pub pieces_ok: bool,
    /// Largest `|(u_x + p)²/2 + V − g(m) − H̄|` away from jumps.
    pub max_residual: f64,
    pub max_current_error: f64,
    pub mass_error: f64,
    /// `|∫ u_x|`.
    pub periodicity_error: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u0: Option<f64>,
    pub failures: Vec<String>,
    pub jumps: Vec<JumpReport>,
}

/// Piecewise data of a candidate: exact laws on each piece plus `H̄, j, p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseCandidate {
    pub j: f64,
    #[serde(rename = "Hbar")]
    pub hbar: f64,
    pub p: f64,
    pub pieces: Vec<Piece>,
}

impl PiecewiseCandidate {
    pub fn from_triple(t: &SolutionTriple) -> Self {
        PiecewiseCandidate {
            j: t.j,
            hbar: t.hbar,
            p: t.p,
            pieces: t.pieces.clone(),
        }
    }

    /// Candidate for `x ↦ −x`; check it against the mirrored potential.
    pub fn mirrored(&self) -> Self {
        PiecewiseCandidate {
            j: -self.j,
            hbar: self.hbar,
            p: -self.p,
            pieces: mirror_pieces(&self.pieces),
        }
    }

    /// Piece boundaries, including the seam when it separates two pieces.
    pub fn breakpoints(&self) -> Vec<f64> {
        self.pieces.iter().map(|p| p.start).collect()
    }

    /// Grids with `u(x) = ∫₀ˣ u_x`; the stored `p` is recomputed from the laws.
    pub fn to_triple(&self, c: &Coupling, v: &PeriodicPotential, n: usize) -> Result<SolutionTriple> {
        SolutionTriple::from_pieces(c, v, self.j, self.hbar, self.pieces.clone(), Regime::Piecewise, n)
    }
}

fn hjb(c: &Coupling, v: &PeriodicPotential, hbar: f64, x: f64, m: f64, q: f64) -> f64 {
    0.5 * q * q + v.eval(x) - c.g(m) - hbar
}

struct Core {
    pieces_ok: bool,
    failures: Vec<String>,
    jumps: Vec<JumpReport>,
    max_residual: f64,
    max_current_error: f64,
    mass_error: f64,
    periodicity_error: f64,
}

fn certify(c: &Coupling, v: &PeriodicPotential, cand: &PiecewiseCandidate, tol: f64) -> Core {
    let laws = Laws::new(c, v, cand.j, cand.hbar);
    let mut failures = Vec::new();
    let mut max_residual = 0.0f64;
    let mut max_current_error = 0.0f64;

    if cand.pieces.is_empty() {
        failures.push("candidate has no pieces".into());
    }
    for (k, piece) in cand.pieces.iter().enumerate() {
        let len = piece.end - piece.start;
        for s in 0..PIECE_SAMPLES {
            let x = piece.start + len * (s as f64 + 0.5) / PIECE_SAMPLES as f64;
            let (m, q) = match (laws.piece_density(piece, x), laws.piece_momentum(piece, x)) {
                (Ok(m), Ok(q)) => (m, q),
                (Err(e), _) | (_, Err(e)) => {
                    failures.push(format!("piece {k}: {e}"));
                    break;
                }
            };
            if m < 0.0 {
                failures.push(format!("piece {k}: negative density {m} at x = {x}"));
                break;
            }
            max_residual = max_residual.max(hjb(c, v, cand.hbar, x, m, q).abs());
            max_current_error = max_current_error.max((m * q - cand.j).abs());
        }
    }
    if max_residual > tol {
        failures.push(format!("equation residual {max_residual:e} exceeds {tol:e}"));
    }
    if max_current_error > tol {
        failures.push(format!("current error {max_current_error:e} exceeds {tol:e}"));
    }
    let pieces_ok = failures.is_empty();

    let mass_error = match laws.mass(&cand.pieces, quad::default_tol()) {
        Ok(mass) => (mass - 1.0).abs(),
        Err(_) => f64::INFINITY,
    };
    if !(mass_error <= tol) {
        failures.push(format!("mass error {mass_error:e} exceeds {tol:e}"));
    }
    let periodicity_error = match laws.mean_momentum(&cand.pieces, quad::default_tol()) {
        Ok(mean) => (mean - cand.p).abs(),
        Err(_) => f64::INFINITY,
    };
    if !(periodicity_error <= tol) {
        failures.push(format!("mean of u_x is {periodicity_error:e}, u is not periodic"));
    }

    let mut jumps = Vec::new();
    let n = cand.pieces.len();
    for k in 0..n {
        let left = &cand.pieces[(k + n - 1) % n];
        let right = &cand.pieces[k];
        let x = right.start;
        let xl = if k == 0 { left.end } else { x };
        let one_sided = |piece: &Piece, at: f64| -> Result<(f64, f64)> {
            let m = laws.piece_density(piece, at)?;
            Ok((m, laws.momentum(piece.velocity, m, at)?))
        };
        let ((ml, ql), (mr, qr)) = match (one_sided(left, xl), one_sided(right, x)) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(e), _) | (_, Err(e)) => {
                failures.push(format!("limits at x = {x}: {e}"));
                continue;
            }
        };
        if (ml - mr).abs() <= JUMP_TOL && (ql - qr).abs() <= JUMP_TOL {
            continue;
        }
        jumps.push(envelope_test(c, v, cand.hbar, cand.p, x, (ml, ql), (mr, qr), tol));
    }
    Core {
        pieces_ok,
        failures,
        jumps,
        max_residual,
        max_current_error,
        mass_error,
        periodicity_error,
    }
}

/// Touching tests at `x` from the one-sided `(m, u_x + p)` limits.
#[allow(clippy::too_many_arguments)]
fn envelope_test(
    c: &Coupling,
    v: &PeriodicPotential,
    hbar: f64,
    p: f64,
    x: f64,
    (ml, ql): (f64, f64),
    (mr, qr): (f64, f64),
    tol: f64,
) -> JumpReport {
    let vx = v.eval(x);
    let (ga, gb) = (-c.g(ml), -c.g(mr));
    let upper = ga.max(gb);
    let lower = ga.min(gb);
    let parabola = |q: f64, e: f64| 0.5 * q * q + vx + e - hbar;
    let (lo, hi) = (ql.min(qr), ql.max(qr));
    let candidates = |q_lo: f64, q_hi: f64| {
        let mut qs = vec![q_lo, q_hi];
        if q_lo < 0.0 && 0.0 < q_hi {
            qs.push(0.0);
        }
        qs
    };
    let sign = if ql > qr + JUMP_TOL {
        JumpSign::Down
    } else if ql < qr - JUMP_TOL {
        JumpSign::Up
    } else {
        JumpSign::None
    };
    let sub_test = || candidates(lo, hi).into_iter().all(|q| parabola(q, lower) <= tol);
    let super_test = || candidates(lo, hi).into_iter().all(|q| parabola(q, upper) >= -tol);
    let (subsolution, supersolution) = match sign {
        JumpSign::Down => (Some(sub_test()), None),
        JumpSign::Up => (None, Some(super_test())),
        JumpSign::None => (Some(sub_test()), Some(super_test())),
    };
    JumpReport {
        location: x,
        m_left: ml,
        m_right: mr,
        ux_left: ql - p,
        ux_right: qr - p,
        ux_jump: sign,
        subsolution,
        supersolution,
    }
}

fn assemble(core: Core, u0: Option<f64>, extra: Vec<String>, tol: f64) -> Certificate {
    let mut failures = core.failures;
    failures.extend(extra);
    if let Some(u0) = u0 {
        if u0.abs() > tol {
            failures.push(format!("u(0) = {u0:e} instead of 0"));
        }
    }
    let mut is_viscosity = failures.is_empty();
    for jp in &core.jumps {
        if !jp.passes() {
            is_viscosity = false;
            failures.push(format!("touching test fails at x = {}", jp.location));
        }
    }
    let upward = core.jumps.iter().any(|jp| jp.ux_right - jp.ux_left > tol);
    Certificate {
        is_viscosity,
        is_regular: is_viscosity && !upward,
        pieces_ok: core.pieces_ok,
        max_residual: core.max_residual,
        max_current_error: core.max_current_error,
        mass_error: core.mass_error,
        periodicity_error: core.periodicity_error,
        u0,
        failures,
        jumps: core.jumps,
    }
}

/// Regular-solution check of a triple: the equations off jumps (on the exact
/// laws and on the stored grids), unit mass, constant current, `u(0) = 0`,
/// periodicity, and only downward jumps of `u_x`.
pub fn check_regular(c: &Coupling, v: &PeriodicPotential, t: &SolutionTriple, tol: f64) -> Certificate {
    let cand = PiecewiseCandidate::from_triple(t);
    let mut core = certify(c, v, &cand, tol);
    let mut extra = Vec::new();
    let n = t.m.values.len();
    if n == 0 || t.u.values.len() != n || t.ux.values.len() != n {
        extra.push("grids are empty or of different lengths".into());
    } else {
        let mut grid_residual = 0.0f64;
        let mut grid_current = 0.0f64;
        for i in 0..n {
            let x = i as f64 / n as f64;
            let (m, q) = (t.m.values[i], t.ux.values[i] + t.p);
            grid_residual = grid_residual.max(hjb(c, v, t.hbar, x, m, q).abs());
            grid_current = grid_current.max((m * q - t.j).abs());
        }
        core.max_residual = core.max_residual.max(grid_residual);
        core.max_current_error = core.max_current_error.max(grid_current);
        if grid_residual > tol {
            extra.push(format!("grid equation residual {grid_residual:e} exceeds {tol:e}"));
        }
        if grid_current > tol {
            extra.push(format!("grid current error {grid_current:e} exceeds {tol:e}"));
        }
    }
    let u0 = t.u.values.first().copied();
    assemble(core, u0, extra, tol)
}

/// Discontinuous-viscosity check through the semicontinuous envelopes.
pub fn check_viscosity_discontinuous(
    c: &Coupling,
    v: &PeriodicPotential,
    cand: &PiecewiseCandidate,
    tol: f64,
) -> Certificate {
    assemble(certify(c, v, cand, tol), None, Vec::new(), tol)
}

/// How `H̄` is chosen in [`construct_piecewise`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HbarChoice {
    /// Smallest `H̄ ≥ H̄ᶜʳ` giving unit mass, found by scanning and bisection.
    Solve,
    Given { hbar: f64 },
}

/// Branch assignment for a decreasing coupling: `labels[k]` holds on the arc
/// from `points[k]` to `points[k+1]` (cyclically). With no points, the single
/// label covers the torus.
pub fn construct_piecewise(
    c: &Coupling,
    v: &PeriodicPotential,
    j: f64,
    hbar: HbarChoice,
    points: &[f64],
    labels: &[Branch],
) -> Result<PiecewiseCandidate> {
    if !c.is_decreasing() {
        return Err(MfgError::InvalidInput("piecewise construction needs a decreasing coupling".into()));
    }
    if !(j > 0.0 && j.is_finite()) {
        return Err(MfgError::InvalidInput(format!("current must be positive, got {j}")));
    }
    if labels.iter().any(|b| *b == Branch::Unique) {
        return Err(MfgError::InvalidInput("labels must be plus or minus".into()));
    }
    let arcs: Vec<(f64, f64, DensityLaw, VelocityLaw)> = if points.is_empty() {
        if labels.len() != 1 {
            return Err(MfgError::InvalidInput("without points exactly one label is needed".into()));
        }
        vec![(0.0, 1.0, DensityLaw::Branch { branch: labels[0] }, VelocityLaw::Current)]
    } else {
        if labels.len() != points.len() {
            return Err(MfgError::InvalidInput(format!(
                "{} points need {} labels, got {}",
                points.len(),
                points.len(),
                labels.len()
            )));
        }
        if points.iter().any(|x| !(0.0..1.0).contains(x)) || points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(MfgError::InvalidInput("points must increase within [0, 1)".into()));
        }
        let k = points.len();
        (0..k)
            .map(|i| {
                let end = if i + 1 < k { points[i + 1] } else { points[0] + 1.0 };
                (
                    points[i],
                    end - points[i],
                    DensityLaw::Branch { branch: labels[i] },
                    VelocityLaw::Current,
                )
            })
            .collect()
    };
    let pieces = pieces_from_arcs(arcs)?;
    let hcr = algebra::critical_hbar(c, v, j)?;
    let mass = |h: f64| Laws::new(c, v, j, h).mass(&pieces, 1e-13);
    let hbar = match hbar {
        HbarChoice::Given { hbar } => {
            if hbar < hcr - 1e-12 {
                return Err(MfgError::NotAboveCritical { hbar, critical: hcr });
            }
            let m = mass(hbar)?;
            if (m - 1.0).abs() > 1e-8 {
                return Err(MfgError::MassInfeasible(format!("mass is {m} at Hbar = {hbar}")));
            }
            hbar
        }
        HbarChoice::Solve => solve_unit_mass(hcr, mass)?,
    };
    let p = Laws::new(c, v, j, hbar).mean_momentum(&pieces, 1e-13)?;
    Ok(PiecewiseCandidate { j, hbar, p, pieces })
}

fn solve_unit_mass<F>(hcr: f64, mass: F) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let defect = |h: f64| Ok::<f64, MfgError>(mass(h)? - 1.0);
    let mut a = hcr;
    let mut fa = defect(a)?;
    if fa == 0.0 {
        return Ok(a);
    }
    let mut step = 1.0 / 1024.0;
    for _ in 0..40 {
        let b = hcr + step;
        let fb = defect(b)?;
        if fb == 0.0 {
            return Ok(b);
        }
        if fa.signum() != fb.signum() {
            let (mut lo, mut hi, f_lo) = (a, b, fa);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if defect(mid)?.signum() == f_lo.signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Ok(0.5 * (lo + hi));
        }
        a = b;
        fa = fb;
        step *= 2.0;
    }
    Err(MfgError::MassInfeasible(format!(
        "mass stays {} one on [{hcr}, {a}]",
        if fa > 0.0 { "above" } else { "below" }
    )))
}

/// Jump point `x1` such that the minus branch on `[x0, x1)` and the plus
/// branch elsewhere have unit mass at the given `H̄`.
pub fn switch_for_mass(c: &Coupling, v: &PeriodicPotential, j: f64, hbar: f64, x0: f64) -> Result<f64> {
    let tol = 1e-13;
    let plus = algebra::branch_mass(c, v, j, hbar, Branch::Plus, tol)?;
    let minus = algebra::branch_mass(c, v, j, hbar, Branch::Minus, tol)?;
    if !(minus < 1.0 && 1.0 < plus) {
        return Err(MfgError::MassInfeasible(format!(
            "branch masses {minus} and {plus} do not straddle one"
        )));
    }
    let offset = algebra::switch_offset(c, v, j, hbar, x0, 0.0, 1.0, plus - 1.0, tol)?;
    Ok((x0 + offset).rem_euclid(1.0))
}
