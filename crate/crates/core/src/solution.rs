//! Solution triples `(u, m, H̄)` with their exact piecewise description.
//!
//! Every constructed solution carries a list of [`Piece`]s covering `[0, 1)`.
//! Each piece says how `m` and `u_x + p` are obtained from `V`, `j` and `H̄`,
//! so checks can re-evaluate the solution anywhere instead of trusting the
//! sampled grid.

use serde::{Deserialize, Serialize};

use crate::algebra::{self, Branch};
use crate::coupling::Coupling;
use crate::error::{MfgError, Result};
use crate::potential::PeriodicPotential;
use crate::quad;

/// Smallest admissible grid.
pub const MIN_NODES: usize = 16;

/// Jump of a grid function with its one-sided limits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Jump {
    pub x: f64,
    pub left: f64,
    pub right: f64,
}

/// Samples at `x_i = i/N`, `i < N`, plus explicit jumps.
///
/// A node that sits exactly on a jump holds the right limit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    pub values: Vec<f64>,
    #[serde(default)]
    pub jumps: Vec<Jump>,
}

impl GridFunction {
    pub fn new(values: Vec<f64>, jumps: Vec<Jump>) -> Result<Self> {
        if values.len() < MIN_NODES {
            return Err(MfgError::InvalidInput(format!(
                "grid needs at least {MIN_NODES} nodes, got {}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(MfgError::InvalidInput("grid values must be finite".into()));
        }
        for w in jumps.windows(2) {
            if w[1].x <= w[0].x {
                return Err(MfgError::InvalidInput("jump locations must increase".into()));
            }
        }
        if jumps.iter().any(|jp| !(0.0..1.0).contains(&jp.x)) {
            return Err(MfgError::InvalidInput("jump locations must lie in [0, 1)".into()));
        }
        Ok(GridFunction { values, jumps })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn node(&self, i: usize) -> f64 {
        i as f64 / self.values.len() as f64
    }
}

/// How the density is obtained on a piece.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DensityLaw {
    /// Root of `F_j(m) = H̄ − V(x)` on the given branch.
    Branch { branch: Branch },
    /// `m = 0`.
    Vacuum,
    /// Positive part of the zero-current root of `−g(m) = H̄ − V(x)`.
    Saturated,
    /// Explicit samples, linearly interpolated.
    Table { x: Vec<f64>, m: Vec<f64> },
}

/// How `u_x + p` is obtained on a piece.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VelocityLaw {
    /// `j / m`
    Current,
    /// `0`
    Rest,
    /// `+√(2(H̄ − V + g(m))⁺)`
    Forward,
    /// `−√(2(H̄ − V + g(m))⁺)`
    Backward,
}

impl VelocityLaw {
    fn mirrored(self) -> Self {
        match self {
            VelocityLaw::Forward => VelocityLaw::Backward,
            VelocityLaw::Backward => VelocityLaw::Forward,
            other => other,
        }
    }
}

/// A sub-interval `[start, end)` of `[0, 1)` with its laws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub start: f64,
    pub end: f64,
    pub density: DensityLaw,
    pub velocity: VelocityLaw,
}

impl Piece {
    pub fn new(start: f64, end: f64, density: DensityLaw, velocity: VelocityLaw) -> Self {
        Piece {
            start,
            end,
            density,
            velocity,
        }
    }

    pub fn branch(start: f64, end: f64, branch: Branch) -> Self {
        Piece::new(start, end, DensityLaw::Branch { branch }, VelocityLaw::Current)
    }
}

/// Turns arcs `(start, length, density, velocity)` on the torus into pieces
/// covering `[0, 1)` in order, split at the seam.
pub fn pieces_from_arcs(arcs: Vec<(f64, f64, DensityLaw, VelocityLaw)>) -> Result<Vec<Piece>> {
    let mut out = Vec::new();
    let mut total = 0.0;
    for (start, len, density, velocity) in arcs {
        if len < 0.0 || !len.is_finite() || !start.is_finite() {
            return Err(MfgError::InvalidInput(format!("bad arc ({start}, {len})")));
        }
        if len == 0.0 {
            continue;
        }
        total += len;
        let a = start.rem_euclid(1.0);
        let b = a + len;
        if b <= 1.0 + 1e-15 {
            out.push(Piece::new(a, b.min(1.0), density, velocity));
        } else {
            out.push(Piece::new(a, 1.0, density.clone(), velocity));
            out.push(Piece::new(0.0, b - 1.0, density, velocity));
        }
    }
    if (total - 1.0).abs() > 1e-12 {
        return Err(MfgError::InvalidInput(format!("arcs cover length {total}, not 1")));
    }
    out.retain(|p| p.end - p.start > 0.0);
    out.sort_by(|a, b| a.start.total_cmp(&b.start));
    let mut pos = 0.0;
    for p in out.iter_mut() {
        if (p.start - pos).abs() > 1e-12 {
            return Err(MfgError::InvalidInput(format!("arcs leave a gap at {pos}")));
        }
        p.start = pos;
        pos = p.end;
    }
    if let Some(last) = out.last_mut() {
        last.end = 1.0;
    }
    Ok(out)
}

/// Mirrors pieces under `x ↦ −x`.
pub fn mirror_pieces(pieces: &[Piece]) -> Vec<Piece> {
    let mut out: Vec<Piece> = pieces
        .iter()
        .rev()
        .map(|p| {
            let density = match &p.density {
                DensityLaw::Table { x, m } => DensityLaw::Table {
                    x: x.iter().rev().map(|t| 1.0 - t).collect(),
                    m: m.iter().rev().copied().collect(),
                },
                other => other.clone(),
            };
            Piece::new(1.0 - p.end, 1.0 - p.start, density, p.velocity.mirrored())
        })
        .collect();
    if let Some(first) = out.first_mut() {
        first.start = 0.0;
    }
    out
}

/// Evaluation context shared by solvers and checkers.
#[derive(Debug, Clone, Copy)]
pub struct Laws<'a> {
    pub c: &'a Coupling,
    pub v: &'a PeriodicPotential,
    pub j: f64,
    pub hbar: f64,
}

impl<'a> Laws<'a> {
    pub fn new(c: &'a Coupling, v: &'a PeriodicPotential, j: f64, hbar: f64) -> Self {
        Laws { c, v, j, hbar }
    }

    pub fn density(&self, law: &DensityLaw, x: f64) -> Result<f64> {
        match law {
            DensityLaw::Branch { branch } => {
                algebra::density_at(self.c, self.v, self.j, self.hbar, *branch, x)
            }
            DensityLaw::Vacuum => Ok(0.0),
            DensityLaw::Saturated => Ok(self.saturated(x)),
            DensityLaw::Table { x: xs, m } => Ok(interpolate(xs, m, x)),
        }
    }

    fn saturated(&self, x: f64) -> f64 {
        let rhs = self.hbar - self.v.eval(x);
        match self.c {
            Coupling::Increasing => (-rhs).max(0.0),
            Coupling::Decreasing => rhs.max(0.0),
            Coupling::Custom(_) => {
                let branch = if self.c.is_increasing() {
                    Branch::Unique
                } else {
                    Branch::Plus
                };
                algebra::solve_branch(self.c, algebra::RootSpec::new(branch, 0.0, rhs)).unwrap_or(0.0)
            }
        }
    }

    /// `u_x + p` on a piece with velocity law `law` and density `m`.
    pub fn momentum(&self, law: VelocityLaw, m: f64, x: f64) -> Result<f64> {
        match law {
            VelocityLaw::Current => {
                if m > 0.0 {
                    Ok(self.j / m)
                } else if self.j == 0.0 {
                    Ok(0.0)
                } else {
                    Err(MfgError::NonPositiveDensity { m })
                }
            }
            VelocityLaw::Rest => Ok(0.0),
            VelocityLaw::Forward | VelocityLaw::Backward => {
                let s = (2.0 * (self.hbar - self.v.eval(x) + self.c.g(m))).max(0.0).sqrt();
                Ok(if law == VelocityLaw::Forward { s } else { -s })
            }
        }
    }

    pub fn piece_density(&self, piece: &Piece, x: f64) -> Result<f64> {
        self.density(&piece.density, x)
    }

    pub fn piece_momentum(&self, piece: &Piece, x: f64) -> Result<f64> {
        let m = self.density(&piece.density, x)?;
        self.momentum(piece.velocity, m, x)
    }

    /// Breakpoints for quadrature: piece ends and maximum points of `V`.
    pub fn breaks(&self, pieces: &[Piece]) -> Vec<f64> {
        let mut b: Vec<f64> = pieces.iter().map(|p| p.start).collect();
        b.extend_from_slice(self.v.argmax());
        b
    }

    /// `∫₀¹ f(piece, x) dx`, integrating piece by piece.
    pub fn integrate<F>(&self, pieces: &[Piece], tol: f64, mut f: F) -> Result<f64>
    where
        F: FnMut(&Piece, f64) -> Result<f64>,
    {
        let argmax = self.v.argmax().to_vec();
        let per_piece = tol / pieces.len().max(1) as f64;
        let mut total = 0.0;
        for p in pieces {
            total += quad::try_integrate(|x| f(p, x), p.start, p.end, &argmax, per_piece)?;
        }
        Ok(total)
    }

    pub fn mass(&self, pieces: &[Piece], tol: f64) -> Result<f64> {
        self.integrate(pieces, tol, |p, x| self.piece_density(p, x))
    }

    /// `∫ (u_x + p)`, which is `p` for a periodic `u`.
    pub fn mean_momentum(&self, pieces: &[Piece], tol: f64) -> Result<f64> {
        self.integrate(pieces, tol, |p, x| self.piece_momentum(p, x))
    }
}

fn interpolate(xs: &[f64], m: &[f64], x: f64) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    if x <= xs[0] {
        return m[0];
    }
    if x >= xs[xs.len() - 1] {
        return m[m.len() - 1];
    }
    let k = xs.partition_point(|&t| t <= x);
    let (x0, x1) = (xs[k - 1], xs[k]);
    let t = if x1 > x0 { (x - x0) / (x1 - x0) } else { 0.0 };
    m[k - 1] + t * (m[k] - m[k - 1])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    MonotoneSmooth,
    MonotoneJ0Smooth,
    MonotoneJ0Kinked,
    AntiCaseI,
    AntiCaseIi,
    AntiCaseIii,
    AntiJ0Classical,
    AntiJ0TwoPoint,
    AntiJ0FourPoint,
    AntiMultimax,
    Elliptic,
    /// Arbitrary branch assignment, not necessarily regular.
    Piecewise,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::MonotoneSmooth => "monotone_smooth",
            Regime::MonotoneJ0Smooth => "monotone_j0_smooth",
            Regime::MonotoneJ0Kinked => "monotone_j0_kinked",
            Regime::AntiCaseI => "anti_case_i",
            Regime::AntiCaseIi => "anti_case_ii",
            Regime::AntiCaseIii => "anti_case_iii",
            Regime::AntiJ0Classical => "anti_j0_classical",
            Regime::AntiJ0TwoPoint => "anti_j0_two_point",
            Regime::AntiJ0FourPoint => "anti_j0_four_point",
            Regime::AntiMultimax => "anti_multimax",
            Regime::Elliptic => "elliptic",
            Regime::Piecewise => "piecewise",
        }
    }
}

/// Free parameters of the jump families, as absolute locations in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JumpFamilyParams {
    pub d1: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e2: Option<f64>,
}

impl JumpFamilyParams {
    fn mirrored(self) -> Self {
        let f = |x: f64| (1.0 - x).rem_euclid(1.0);
        JumpFamilyParams {
            d1: f(self.d1),
            d2: self.d2.map(f),
            e1: self.e1.map(f),
            e2: self.e2.map(f),
        }
    }
}

/// A solution `(u, m, H̄)` with current `j` and rotation number `p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionTriple {
    pub j: f64,
    pub p: f64,
    #[serde(rename = "Hbar")]
    pub hbar: f64,
    pub regime: Regime,
    pub jump_set: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<JumpFamilyParams>,
    pub pieces: Vec<Piece>,
    pub m: GridFunction,
    pub u: GridFunction,
    pub ux: GridFunction,
}

/// Jumps in `m` or `u_x` smaller than this are treated as continuity.
pub const JUMP_TOL: f64 = 1e-9;

impl SolutionTriple {
    /// Assembles a triple from exact pieces; `p` is fixed by `∫ u_x = 0`.
    pub fn from_pieces(
        c: &Coupling,
        v: &PeriodicPotential,
        j: f64,
        hbar: f64,
        pieces: Vec<Piece>,
        regime: Regime,
        n: usize,
    ) -> Result<Self> {
        if n < MIN_NODES {
            return Err(MfgError::InvalidInput(format!(
                "grid needs at least {MIN_NODES} nodes, got {n}"
            )));
        }
        let laws = Laws::new(c, v, j, hbar);
        let p = laws.mean_momentum(&pieces, 1e-13)?;

        let mut m_jumps = Vec::new();
        let mut ux_jumps = Vec::new();
        let mut jump_set = Vec::new();
        for k in 0..pieces.len() {
            let left = &pieces[(k + pieces.len() - 1) % pieces.len()];
            let right = &pieces[k];
            let x = right.start;
            let ml = laws.piece_density(left, x)?;
            let mr = laws.piece_density(right, x)?;
            let ql = laws.momentum(left.velocity, ml, x)? - p;
            let qr = laws.momentum(right.velocity, mr, x)? - p;
            let dm = (ml - mr).abs() > JUMP_TOL * ml.abs().max(mr.abs()).max(1.0);
            let dq = (ql - qr).abs() > JUMP_TOL * ql.abs().max(qr.abs()).max(1.0);
            if dm {
                m_jumps.push(Jump { x, left: ml, right: mr });
            }
            if dq {
                ux_jumps.push(Jump { x, left: ql, right: qr });
            }
            if dm || dq {
                jump_set.push(x);
            }
        }

        let mut m = Vec::with_capacity(n);
        let mut ux = Vec::with_capacity(n);
        let mut k = 0;
        for i in 0..n {
            let x = i as f64 / n as f64;
            while k + 1 < pieces.len() && x >= pieces[k].end {
                k += 1;
            }
            let piece = &pieces[k];
            let mi = laws.piece_density(piece, x)?;
            m.push(mi);
            ux.push(laws.momentum(piece.velocity, mi, x)? - p);
        }

        // u by cumulative quadrature, cell by cell.
        let mut u = Vec::with_capacity(n);
        let breaks = laws.breaks(&pieces);
        let mut acc = 0.0;
        let mut k = 0;
        let cell_tol = quad::default_tol() / n as f64;
        u.push(0.0);
        for i in 0..n - 1 {
            let a = i as f64 / n as f64;
            let b = (i + 1) as f64 / n as f64;
            let mut cell = 0.0;
            let mut lo = a;
            while lo < b {
                while k + 1 < pieces.len() && lo >= pieces[k].end {
                    k += 1;
                }
                let piece = &pieces[k];
                let hi = piece.end.min(b);
                if hi <= lo {
                    break;
                }
                cell += quad::try_integrate(
                    |x| Ok(laws.piece_momentum(piece, x)? - p),
                    lo,
                    hi,
                    &breaks,
                    cell_tol,
                )?;
                lo = hi;
            }
            acc += cell;
            u.push(acc);
        }

        Ok(SolutionTriple {
            j,
            p,
            hbar,
            regime,
            jump_set,
            family: None,
            pieces,
            m: GridFunction::new(m, m_jumps)?,
            u: GridFunction::new(u, Vec::new())?,
            ux: GridFunction::new(ux, ux_jumps)?,
        })
    }

    pub fn n(&self) -> usize {
        self.m.len()
    }

    pub fn laws<'a>(&self, c: &'a Coupling, v: &'a PeriodicPotential) -> Laws<'a> {
        Laws::new(c, v, self.j, self.hbar)
    }

    /// Density evaluated from the exact laws (right limit at piece ends).
    pub fn density_at(&self, c: &Coupling, v: &PeriodicPotential, x: f64) -> Result<f64> {
        let x = x.rem_euclid(1.0);
        let laws = self.laws(c, v);
        let piece = self.piece_at(x);
        laws.piece_density(piece, x)
    }

    pub fn piece_at(&self, x: f64) -> &Piece {
        let k = self.pieces.partition_point(|p| p.end <= x);
        &self.pieces[k.min(self.pieces.len() - 1)]
    }

    /// Solution for `x ↦ −x`, obtained from this one solved on the mirrored
    /// potential. `v` is the original (unmirrored) potential.
    pub fn mirrored(&self, c: &Coupling, v: &PeriodicPotential) -> Result<Self> {
        let mut out = SolutionTriple::from_pieces(
            c,
            v,
            -self.j,
            self.hbar,
            mirror_pieces(&self.pieces),
            self.regime,
            self.n(),
        )?;
        out.family = self.family.map(|f| f.mirrored());
        Ok(out)
    }

    /// CSV rows `x,m,u,ux`, with two rows at every jump (left then right).
    pub fn to_csv(&self) -> String {
        let n = self.n();
        let mut s = String::from("x,m,u,ux\n");
        let row = |s: &mut String, x: f64, m: f64, u: f64, q: f64| {
            s.push_str(&format!("{x:.16e},{m:.16e},{u:.16e},{q:.16e}\n"));
        };
        let mut next = 0;
        let jumps = &self.jump_set;
        for i in 0..=n {
            let x = i as f64 / n as f64;
            while next < jumps.len() && jumps[next] < x {
                let xj = jumps[next];
                let (ml, mr) = one_sided(&self.m, xj);
                let (ql, qr) = one_sided(&self.ux, xj);
                let uj = interpolate_grid(&self.u.values, xj);
                row(&mut s, xj, ml, uj, ql);
                row(&mut s, xj, mr, uj, qr);
                next += 1;
            }
            if i == n {
                // x = 1 closes the period; a jump at 0 shows its left limit here
                let (m, q) = if jumps.first() == Some(&0.0) {
                    (one_sided(&self.m, 0.0).0, one_sided(&self.ux, 0.0).0)
                } else {
                    (self.m.values[0], self.ux.values[0])
                };
                row(&mut s, x, m, self.u.values[0], q);
                break;
            }
            if next < jumps.len() && jumps[next] == x {
                let (ml, _) = one_sided(&self.m, x);
                let (ql, _) = one_sided(&self.ux, x);
                row(&mut s, x, ml, self.u.values[i], ql);
                next += 1;
            }
            row(&mut s, x, self.m.values[i], self.u.values[i], self.ux.values[i]);
        }
        s
    }
}

fn one_sided(g: &GridFunction, x: f64) -> (f64, f64) {
    match g.jumps.iter().find(|jp| jp.x == x) {
        Some(jp) => (jp.left, jp.right),
        None => {
            let v = interpolate_grid(&g.values, x);
            (v, v)
        }
    }
}

fn interpolate_grid(values: &[f64], x: f64) -> f64 {
    let n = values.len();
    let t = x * n as f64;
    let i = (t.floor() as usize).min(n - 1);
    let f = t - i as f64;
    values[i] * (1.0 - f) + values[(i + 1) % n] * f
}
