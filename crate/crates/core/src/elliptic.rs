//! Second-order regularization: solves
//! `ε²(m_xx/m − m_x²/(2m²)) + F_j(m) = H̄ − V` with `∫m = 1`.
//!
//! The unknown is `s = √m`. Then `m_xx/m − m_x²/(2m²) = 2 s_xx/s` and the
//! equation is the Euler–Lagrange equation of
//! `J[m] = ∫ ε² m_x²/(2m) − Φ_j(m) − V m = ∫ 2ε² s_x² − Φ_j(s²) − V s²`,
//! whose natural discretization has the three-point Laplacian of `s`.

use serde::{Deserialize, Serialize};

use crate::antimonotone::{self, AntiJ0Variant};
use crate::coupling::Coupling;
use crate::error::{MfgError, Result};
use crate::linalg::{self, CyclicTridiagonal};
use crate::monotone::{self, MonotoneVariant};
use crate::potential::PeriodicPotential;
use crate::solution::SolutionTriple;

pub const RESIDUAL_TOL: f64 = 1e-10;
pub const MASS_TOL: f64 = 1e-10;
pub const MAX_ITERATIONS: usize = 200;

/// Convergence threshold: [`RESIDUAL_TOL`], raised to the rounding floor of
/// the discrete Laplacian `2ε²N²·ulp(s)/s` when that is larger.
pub fn effective_tolerance(eps: f64, s: &[f64]) -> f64 {
    let n = s.len() as f64;
    let (lo, hi) = s.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
    let floor = 16.0 * 2.0 * eps * eps * n * n * f64::EPSILON * hi / lo;
    RESIDUAL_TOL.max(floor)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EllipticInit {
    Uniform,
    /// First-order solution; mollified over three cells when `g` decreases.
    FirstOrder,
    /// Density values at the nodes `i/N`.
    Given { m: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EllipticSolution {
    #[serde(rename = "N")]
    pub n: usize,
    /// `ln m` at the nodes.
    pub w: Vec<f64>,
    #[serde(rename = "Hbar")]
    pub hbar: f64,
    pub eps: f64,
    pub j: f64,
    pub residual_norm: f64,
    pub iterations: usize,
    pub functional_value: f64,
}

impl EllipticSolution {
    pub fn density(&self) -> Vec<f64> {
        self.w.iter().map(|w| w.exp()).collect()
    }

    pub fn mass(&self) -> f64 {
        self.w.iter().map(|w| w.exp()).sum::<f64>() / self.n as f64
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,m\n");
        for (i, w) in self.w.iter().enumerate() {
            s.push_str(&format!("{:.16e},{:.16e}\n", i as f64 / self.n as f64, w.exp()));
        }
        s
    }
}

fn check_grid(eps: f64, n: usize) -> Result<()> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(MfgError::InvalidInput(format!("eps must be positive, got {eps}")));
    }
    if n < 64 || !n.is_power_of_two() {
        return Err(MfgError::InvalidInput(format!(
            "N must be a power of two >= 64, got {n}"
        )));
    }
    Ok(())
}

fn nodes_of(v: &PeriodicPotential, n: usize) -> Vec<f64> {
    (0..n).map(|i| v.eval(i as f64 / n as f64)).collect()
}

/// `2ε² (D₂s)_i`.
fn diffusion(eps: f64, s: &[f64]) -> Vec<f64> {
    let n = s.len();
    let k = 2.0 * eps * eps * (n * n) as f64;
    (0..n)
        .map(|i| k * (s[(i + 1) % n] - 2.0 * s[i] + s[(i + n - 1) % n]))
        .collect()
}

/// Euler–Lagrange operator `E_i = 2ε²(D₂s)_i/s_i + F_j(m_i) + V_i`.
fn euler_lagrange(c: &Coupling, vn: &[f64], j: f64, eps: f64, s: &[f64]) -> Vec<f64> {
    diffusion(eps, s)
        .into_iter()
        .zip(s)
        .zip(vn)
        .map(|((d, &si), &vi)| d / si + c.f_raw(j, si * si) + vi)
        .collect()
}

fn sqrt_density(m: &[f64]) -> Result<Vec<f64>> {
    m.iter()
        .map(|&x| {
            if x > 0.0 && x.is_finite() {
                Ok(x.sqrt())
            } else {
                Err(MfgError::NonPositiveDensity { m: x })
            }
        })
        .collect()
}

/// Discrete residual `E_i − H̄` of the regularized equation.
pub fn residual(
    c: &Coupling,
    v: &PeriodicPotential,
    j: f64,
    eps: f64,
    m: &[f64],
    hbar: f64,
) -> Result<Vec<f64>> {
    let s = sqrt_density(m)?;
    let vn = nodes_of(v, m.len());
    Ok(euler_lagrange(c, &vn, j, eps, &s).into_iter().map(|e| e - hbar).collect())
}

/// Discrete functional `(1/N) Σ 2ε²((s_{i+1} − s_i)N)² − Φ_j(m_i) − V_i m_i`.
pub fn functional(c: &Coupling, v: &PeriodicPotential, j: f64, eps: f64, m: &[f64]) -> Result<f64> {
    let n = m.len();
    let s = sqrt_density(m)?;
    let nf = n as f64;
    let mut total = 0.0;
    for i in 0..n {
        let ds = (s[(i + 1) % n] - s[i]) * nf;
        total += 2.0 * eps * eps * ds * ds - c.phi(j, m[i])? - v.eval(i as f64 / nf) * m[i];
    }
    Ok(total / nf)
}

/// Gradient of [`functional`] with respect to the node densities.
pub fn gradient(c: &Coupling, v: &PeriodicPotential, j: f64, eps: f64, m: &[f64]) -> Result<Vec<f64>> {
    let s = sqrt_density(m)?;
    let nf = m.len() as f64;
    let vn = nodes_of(v, m.len());
    Ok(euler_lagrange(c, &vn, j, eps, &s).into_iter().map(|e| -e / nf).collect())
}

/// The `ε = 0` solution used for initial guesses and distances.
pub fn first_order_reference(
    c: &Coupling,
    v: &PeriodicPotential,
    j: f64,
    n: usize,
) -> Result<SolutionTriple> {
    match (c.is_increasing(), j == 0.0) {
        (true, false) => monotone::solve_monotone_current(c, v, j, n),
        (true, true) => monotone::solve_monotone_j0(c, v, MonotoneVariant::Plus, n),
        (false, false) => antimonotone::solve_anti_current(c, v, j, n),
        (false, true) => {
            let variant = if 1.0 + v.mean() >= v.max_value() {
                AntiJ0Variant::Classical
            } else {
                AntiJ0Variant::TwoPoint { d2: 1.0 }
            };
            antimonotone::solve_anti_j0(c, v, variant, n)
        }
    }
}

fn initial_density(
    c: &Coupling,
    v: &PeriodicPotential,
    j: f64,
    n: usize,
    init: &EllipticInit,
) -> Result<Vec<f64>> {
    let mut m = match init {
        EllipticInit::Uniform => vec![1.0; n],
        EllipticInit::Given { m } => {
            if m.len() != n {
                return Err(MfgError::InvalidInput(format!(
                    "initial density has {} values, expected {n}",
                    m.len()
                )));
            }
            m.clone()
        }
        EllipticInit::FirstOrder => {
            let t = first_order_reference(c, v, j, n)?;
            let mut m = t.m.values;
            if c.is_decreasing() {
                m = (0..n)
                    .map(|i| (m[(i + n - 1) % n] + m[i] + m[(i + 1) % n]) / 3.0)
                    .collect();
            }
            // Vacuum regions need a positive floor.
            m.iter_mut().for_each(|x| *x = x.max(1e-6));
            m
        }
    };
    if m.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
        return Err(MfgError::InvalidInput("initial density must be positive".into()));
    }
    let mass = m.iter().sum::<f64>() / n as f64;
    m.iter_mut().for_each(|x| *x /= mass);
    Ok(m)
}

fn normalize(s: &mut [f64]) {
    let mass = s.iter().map(|x| x * x).sum::<f64>() / s.len() as f64;
    let k = mass.sqrt();
    s.iter_mut().for_each(|x| *x /= k);
}

fn mass_weighted_mean(e: &[f64], s: &[f64]) -> f64 {
    let num: f64 = e.iter().zip(s).map(|(e, s)| e * s * s).sum();
    let den: f64 = s.iter().map(|s| s * s).sum();
    num / den
}

struct State {
    s: Vec<f64>,
    hbar: f64,
    /// `Q_i = s_i (E_i − H̄)`.
    q: Vec<f64>,
    residual: f64,
}

impl State {
    fn new(c: &Coupling, vn: &[f64], j: f64, eps: f64, s: Vec<f64>, hbar: f64) -> Self {
        let e = euler_lagrange(c, vn, j, eps, &s);
        let q: Vec<f64> = e.iter().zip(&s).map(|(e, s)| s * (e - hbar)).collect();
        let residual = e.iter().map(|e| (e - hbar).abs()).fold(0.0, f64::max);
        Self { s, hbar, q, residual }
    }

    fn merit(&self) -> f64 {
        self.q.iter().map(|q| q * q).sum::<f64>()
    }
}

/// Damped Newton on `(s, H̄)` with mass re-projection after every step.
pub fn solve_elliptic(
    c: &Coupling,
    v: &PeriodicPotential,
    j: f64,
    eps: f64,
    n: usize,
    init: &EllipticInit,
) -> Result<EllipticSolution> {
    solve_elliptic_with(c, v, j, eps, n, init, MAX_ITERATIONS)
}

pub fn solve_elliptic_with(
    c: &Coupling,
    v: &PeriodicPotential,
    j: f64,
    eps: f64,
    n: usize,
    init: &EllipticInit,
    max_iterations: usize,
) -> Result<EllipticSolution> {
    check_grid(eps, n)?;
    if !j.is_finite() {
        return Err(MfgError::InvalidInput(format!("current must be finite, got {j}")));
    }
    let vn = nodes_of(v, n);
    let mut s = sqrt_density(&initial_density(c, v, j, n, init)?)?;
    normalize(&mut s);
    let e0 = euler_lagrange(c, &vn, j, eps, &s);
    let h0 = mass_weighted_mean(&e0, &s);
    let mut state = State::new(c, &vn, j, eps, s, h0);
    let k = 2.0 * eps * eps * (n * n) as f64;
    let nf = n as f64;

    for iteration in 0..max_iterations {
        if state.residual <= effective_tolerance(eps, &state.s) {
            return finish(c, v, j, eps, state, iteration);
        }
        let s = &state.s;
        let diag: Vec<f64> = (0..n)
            .map(|i| {
                let m = s[i] * s[i];
                -2.0 * k + c.f_raw(j, m) + vn[i] - state.hbar + 2.0 * m * c.df(j, m)
            })
            .collect();
        let a = CyclicTridiagonal {
            lower: vec![k; n],
            diag,
            upper: vec![k; n],
        };
        let col: Vec<f64> = s.iter().map(|x| -x).collect();
        let row: Vec<f64> = s.iter().map(|x| 2.0 * x / nf).collect();
        let rhs: Vec<f64> = state.q.iter().map(|q| -q).collect();
        let mass_defect = s.iter().map(|x| x * x).sum::<f64>() / nf - 1.0;
        let (ds, dh) = linalg::solve_bordered(&a, &[col], &[row], &[vec![0.0]], &rhs, &[-mass_defect])
            .map_err(|_| MfgError::NonFiniteStep { iteration })?;
        let dh = dh[0];

        let current = state.merit();
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let mut trial: Vec<f64> = s.iter().zip(&ds).map(|(x, d)| x + step * d).collect();
            if trial.iter().all(|x| *x > 0.0 && x.is_finite()) {
                normalize(&mut trial);
                let next = State::new(c, &vn, j, eps, trial, state.hbar + step * dh);
                if next.merit().is_finite() && next.merit() < current {
                    accepted = Some(next);
                    break;
                }
            }
            step *= 0.5;
        }
        state = match accepted {
            Some(next) => next,
            None => {
                return Err(MfgError::NoConvergence {
                    iterations: iteration,
                    residual: state.residual,
                })
            }
        };
    }
    if state.residual <= effective_tolerance(eps, &state.s) {
        return finish(c, v, j, eps, state, max_iterations);
    }
    Err(MfgError::NoConvergence {
        iterations: max_iterations,
        residual: state.residual,
    })
}

fn finish(
    c: &Coupling,
    v: &PeriodicPotential,
    j: f64,
    eps: f64,
    state: State,
    iterations: usize,
) -> Result<EllipticSolution> {
    let m: Vec<f64> = state.s.iter().map(|s| s * s).collect();
    Ok(EllipticSolution {
        n: m.len(),
        w: state.s.iter().map(|s| 2.0 * s.ln()).collect(),
        hbar: state.hbar,
        eps,
        j,
        residual_norm: state.residual,
        iterations,
        functional_value: functional(c, v, j, eps, &m)?,
    })
}

/// Principal eigenpair of the symmetric cyclic matrix `2ε²D₂ + diag(d)` by
/// shifted inverse iteration, then Rayleigh-quotient shifts.
fn principal_eigen(k: f64, d: &[f64], start: &[f64]) -> Result<(f64, Vec<f64>)> {
    let n = d.len();
    let op = |x: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|i| k * (x[(i + 1) % n] - 2.0 * x[i] + x[(i + n - 1) % n]) + d[i] * x[i])
            .collect()
    };
    let rayleigh = |x: &[f64]| -> f64 {
        let ax = op(x);
        ax.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() / x.iter().map(|b| b * b).sum::<f64>()
    };
    // Gershgorin: every eigenvalue lies below max d, so a shift just above
    // it makes the iteration converge to the top eigenvector; Rayleigh shifts
    // only polish once that vector is resolved.
    let top = d.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let safe = top + 1e-6 * (1.0 + top.abs());
    let mut x = start.to_vec();
    normalize(&mut x);
    let mut lambda = rayleigh(&x);
    let mut polishing = 0;
    for _ in 0..5000 {
        let sigma = if polishing > 0 { lambda } else { safe };
        let a = CyclicTridiagonal {
            lower: vec![k; n],
            diag: d.iter().map(|di| di - 2.0 * k - sigma).collect(),
            upper: vec![k; n],
        };
        let mut y = match linalg::solve_cyclic(&a, &x) {
            Ok(y) => y,
            // The shift hit an eigenvalue exactly: x is already converged.
            Err(_) => break,
        };
        let sign = if y.iter().sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
        y.iter_mut().for_each(|v| *v *= sign);
        normalize(&mut y);
        let diff = y.iter().zip(&x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        x = y;
        lambda = rayleigh(&x);
        if polishing > 0 {
            polishing += 1;
            if diff <= 1e-15 || polishing > 4 {
                break;
            }
        } else if diff <= 1e-9 {
            polishing = 1;
        }
    }
    if x.iter().any(|v| *v <= 0.0) {
        return Err(MfgError::NoConvergence {
            iterations: 5000,
            residual: f64::NAN,
        });
    }
    Ok((lambda, x))
}

/// Fixed-point iteration for `j = 0`: freeze the coupling at `η`, solve the
/// linear problem `2ε² s_xx + (V − g(η)) s = H̄ s` for its positive ground
/// state (with `H̄` as the eigenvalue), set `m = s²` with `∫m = 1`, and relax
/// `η ← (1 − θ)η + θm`. `θ` is halved whenever `sup|m − η|` grows.
pub fn solve_elliptic_fixedpoint_j0(
    c: &Coupling,
    v: &PeriodicPotential,
    eps: f64,
    n: usize,
    theta: f64,
) -> Result<EllipticSolution> {
    solve_elliptic_fixedpoint_j0_with(c, v, eps, n, theta, 2000)
}

pub fn solve_elliptic_fixedpoint_j0_with(
    c: &Coupling,
    v: &PeriodicPotential,
    eps: f64,
    n: usize,
    theta: f64,
    max_iterations: usize,
) -> Result<EllipticSolution> {
    check_grid(eps, n)?;
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(MfgError::InvalidInput(format!("damping must lie in (0, 1], got {theta}")));
    }
    let vn = nodes_of(v, n);
    let k = 2.0 * eps * eps * (n * n) as f64;
    let mut eta = vec![1.0; n];
    let mut s = vec![1.0; n];
    let mut gap = f64::INFINITY;
    let mut theta = theta;
    for iteration in 0..max_iterations {
        let d: Vec<f64> = vn.iter().zip(&eta).map(|(v, e)| v - c.g(*e)).collect();
        let (lambda, ground) = principal_eigen(k, &d, &s)?;
        s = ground;
        let m: Vec<f64> = s.iter().map(|x| x * x).collect();
        let previous = gap;
        gap = m.iter().zip(&eta).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        // The linearized map has multipliers near −1/(2πkε)², so large
        // damping overshoots on the lowest modes.
        if gap > previous {
            theta = (0.5 * theta).max(1e-4);
        }
        if gap <= 1e-10 {
            let state = State::new(c, &vn, 0.0, eps, s, lambda);
            let mut out = finish(c, v, 0.0, eps, state, iteration + 1)?;
            // Report the residual of the full equation, not of the frozen one.
            out.residual_norm = residual(c, v, 0.0, eps, &out.density(), out.hbar)?
                .iter()
                .fold(0.0, |a, r| a.max(r.abs()));
            return Ok(out);
        }
        for (e, mi) in eta.iter_mut().zip(&m) {
            *e = (1.0 - theta) * *e + theta * mi;
        }
    }
    Err(MfgError::NoConvergence {
        iterations: max_iterations,
        residual: gap,
    })
}

/// `(1/N) Σ |m_ε(x_i) − m₀(x_i)|` against the exact first-order laws.
pub fn l1_distance(
    c: &Coupling,
    v: &PeriodicPotential,
    sol: &EllipticSolution,
    reference: &SolutionTriple,
) -> Result<f64> {
    let nf = sol.n as f64;
    let mut total = 0.0;
    for (i, w) in sol.w.iter().enumerate() {
        total += (w.exp() - reference.density_at(c, v, i as f64 / nf)?).abs();
    }
    Ok(total / nf)
}

/// Share of the L¹ distance carried by nodes within `cells` grid cells of a
/// jump of the reference density.
pub fn jump_concentration(
    c: &Coupling,
    v: &PeriodicPotential,
    sol: &EllipticSolution,
    reference: &SolutionTriple,
    cells: usize,
) -> Result<f64> {
    let nf = sol.n as f64;
    let radius = cells as f64 / nf;
    let (mut near, mut total) = (0.0, 0.0);
    for (i, w) in sol.w.iter().enumerate() {
        let x = i as f64 / nf;
        let e = (w.exp() - reference.density_at(c, v, x)?).abs();
        total += e;
        let close = reference.m.jumps.iter().any(|jp| {
            let d = (x - jp.x).rem_euclid(1.0);
            d.min(1.0 - d) <= radius + 1e-12
        });
        if close {
            near += e;
        }
    }
    Ok(if total == 0.0 { 1.0 } else { near / total })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpsSweepRow {
    pub eps: f64,
    pub l1_distance: f64,
    pub functional_value: f64,
    #[serde(rename = "Hbar")]
    pub hbar: f64,
    pub residual_norm: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpsSweep {
    pub rows: Vec<EpsSweepRow>,
    pub solutions: Vec<EllipticSolution>,
}

impl EpsSweep {
    pub fn table_csv(&self) -> String {
        let mut s = String::from("eps,l1_distance,functional_value,Hbar,residual_norm,iterations\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}\n",
                r.eps, r.l1_distance, r.functional_value, r.hbar, r.residual_norm, r.iterations
            ));
        }
        s
    }
}

/// Warm-started descent from a converged solution to `target`, inserting
/// geometric midpoints in `ε` wherever a direct step fails.
fn continue_to(
    c: &Coupling,
    v: &PeriodicPotential,
    from: &EllipticSolution,
    target: f64,
    depth: usize,
) -> Result<EllipticSolution> {
    let init = EllipticInit::Given { m: from.density() };
    match solve_elliptic(c, v, from.j, target, from.n, &init) {
        Ok(sol) => Ok(sol),
        Err(e) if depth == 0 => Err(e),
        Err(_) => {
            let mid = (from.eps * target).sqrt();
            let half = continue_to(c, v, from, mid, depth - 1)?;
            continue_to(c, v, &half, target, depth - 1)
        }
    }
}

/// [`solve_elliptic`] from the first-order guess, falling back to
/// continuation from larger `ε` when Newton fails to converge directly.
pub fn solve_elliptic_continuation(
    c: &Coupling,
    v: &PeriodicPotential,
    j: f64,
    eps: f64,
    n: usize,
) -> Result<EllipticSolution> {
    let direct = solve_elliptic(c, v, j, eps, n, &EllipticInit::FirstOrder);
    let Err(first_error) = direct else {
        return direct;
    };
    if !matches!(first_error, MfgError::NoConvergence { .. } | MfgError::NonFiniteStep { .. }) {
        return Err(first_error);
    }
    let mut start = eps;
    for _ in 0..10 {
        start *= 2.0;
        if let Ok(sol) = solve_elliptic(c, v, j, start, n, &EllipticInit::FirstOrder) {
            return continue_to(c, v, &sol, eps, 12);
        }
    }
    Err(first_error)
}

/// Continuation from the largest to the smallest `ε`, each solve warm-started
/// from the previous one. Rows come out in decreasing `ε`.
pub fn eps_sweep(
    c: &Coupling,
    v: &PeriodicPotential,
    j: f64,
    eps_list: &[f64],
    n: usize,
) -> Result<EpsSweep> {
    if eps_list.is_empty() {
        return Err(MfgError::InvalidInput("eps list is empty".into()));
    }
    let mut eps: Vec<f64> = eps_list.to_vec();
    eps.sort_by(|a, b| b.total_cmp(a));
    eps.dedup();
    let reference = first_order_reference(c, v, j, n)?;
    let mut solutions: Vec<EllipticSolution> = Vec::with_capacity(eps.len());
    for &e in &eps {
        let sol = match solutions.last() {
            None => solve_elliptic_continuation(c, v, j, e, n)?,
            Some(prev) => continue_to(c, v, prev, e, 12)?,
        };
        solutions.push(sol);
    }
    let rows = solutions
        .iter()
        .map(|sol| {
            Ok(EpsSweepRow {
                eps: sol.eps,
                l1_distance: l1_distance(c, v, sol, &reference)?,
                functional_value: sol.functional_value,
                hbar: sol.hbar,
                residual_norm: sol.residual_norm,
                iterations: sol.iterations,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EpsSweep { rows, solutions })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_potential_is_uniform() {
        let v = PeriodicPotential::constant(0.0).unwrap();
        let s = solve_elliptic(&Coupling::Increasing, &v, 1.0, 0.1, 64, &EllipticInit::Uniform).unwrap();
        assert!((s.hbar + 0.5).abs() < 1e-14);
        assert!(s.density().iter().all(|m| (m - 1.0).abs() < 1e-14));
        let f = solve_elliptic_fixedpoint_j0(&Coupling::Increasing, &v, 0.1, 64, 0.5).unwrap();
        assert!((f.hbar + 1.0).abs() < 1e-12);
    }

    #[test]
    fn sine_converges_with_unit_mass() {
        let c = Coupling::Increasing;
        let v = PeriodicPotential::sine(1.0, 1, 0.25).unwrap();
        let s = solve_elliptic(&c, &v, 1.0, 0.05, 256, &EllipticInit::Uniform).unwrap();
        assert!(s.residual_norm <= RESIDUAL_TOL);
        assert!((s.mass() - 1.0).abs() < 1e-12);
        let r = residual(&c, &v, 1.0, 0.05, &s.density(), s.hbar).unwrap();
        assert!(r.iter().all(|x| x.abs() <= 1e-10));
    }

    #[test]
    fn rejects_bad_grid() {
        let v = PeriodicPotential::constant(0.0).unwrap();
        let c = Coupling::Increasing;
        assert!(solve_elliptic(&c, &v, 1.0, 0.1, 100, &EllipticInit::Uniform).is_err());
        assert!(solve_elliptic(&c, &v, 1.0, 0.0, 64, &EllipticInit::Uniform).is_err());
    }
}
