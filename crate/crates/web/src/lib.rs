//! JSON-in, JSON-out bindings for a static demo page.
//!
//! Each export takes a request object as a JSON string and returns a JSON
//! string, or throws the error message.

use mfg1d::{elliptic, regimes, Coupling, CouplingSpec, PeriodicPotential, PotentialSpec, Regime, Variant};
use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::*;

const MAX_N: usize = 1 << 14;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileRequest {
    pub potential: PotentialSpec,
    pub coupling: CouplingSpec,
    pub j: f64,
    #[serde(default)]
    pub variant: Option<Variant>,
    #[serde(rename = "N", default = "default_n")]
    pub n: usize,
}

#[derive(Debug, Serialize)]
pub struct ProfileResponse {
    pub x: Vec<f64>,
    pub m: Vec<f64>,
    pub u: Vec<f64>,
    pub ux: Vec<f64>,
    #[serde(rename = "Hbar")]
    pub hbar: f64,
    pub p: f64,
    pub regime: Regime,
    pub jumps: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveRequest {
    pub potential: PotentialSpec,
    pub j_max: f64,
    pub samples: usize,
}

#[derive(Debug, Serialize)]
pub struct CurveResponse {
    pub j_lower: f64,
    pub j_upper: f64,
    pub j: Vec<f64>,
    #[serde(rename = "Hbar")]
    pub hbar: Vec<f64>,
    pub p: Vec<f64>,
    pub alpha_minus: Vec<f64>,
    pub alpha_plus: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EllipticRequest {
    pub potential: PotentialSpec,
    pub coupling: CouplingSpec,
    pub j: f64,
    pub eps: f64,
    #[serde(rename = "N", default = "default_elliptic_n")]
    pub n: usize,
}

#[derive(Debug, Serialize)]
pub struct EllipticResponse {
    pub x: Vec<f64>,
    pub m: Vec<f64>,
    pub reference_m: Vec<f64>,
    #[serde(rename = "Hbar")]
    pub hbar: f64,
    pub l1_distance: f64,
    pub residual_norm: f64,
}

fn default_n() -> usize {
    1024
}

fn default_elliptic_n() -> usize {
    512
}

fn parse<T: for<'de> Deserialize<'de>>(json: &str) -> Result<T, String> {
    serde_json::from_str(json).map_err(|e| format!("bad request: {e}"))
}

fn check_n(n: usize) -> Result<(), String> {
    if (64..=MAX_N).contains(&n) && n.is_power_of_two() {
        Ok(())
    } else {
        Err(format!("N must be a power of two in [64, {MAX_N}], got {n}"))
    }
}

fn solver(e: mfg1d::MfgError) -> String {
    format!("{}: {e}", e.name())
}

fn encode<T: Serialize>(value: &T) -> Result<String, String> {
    serde_json::to_string(value).map_err(|e| e.to_string())
}

/// Solution profile for a prescribed current.
pub fn solve_profile_json(request: &str) -> Result<String, String> {
    let req: ProfileRequest = parse(request)?;
    check_n(req.n)?;
    let v = PeriodicPotential::from_spec(&req.potential).map_err(solver)?;
    let c = Coupling::from(req.coupling);
    let t = mfg1d::solve_current(&c, &v, req.j, req.variant, req.n).map_err(solver)?;
    encode(&ProfileResponse {
        x: (0..req.n).map(|i| i as f64 / req.n as f64).collect(),
        m: t.m.values,
        u: t.u.values,
        ux: t.ux.values,
        hbar: t.hbar,
        p: t.p,
        regime: t.regime,
        jumps: t.jump_set,
    })
}

/// `H̄_j`, `p_j` and `α±(j)` on `(0, j_max]` for `g(m) = −m`, with the
/// regime boundaries.
pub fn regime_curves_json(request: &str) -> Result<String, String> {
    let req: CurveRequest = parse(request)?;
    if !(req.j_max.is_finite() && req.j_max > 0.0) || !(2..=2000).contains(&req.samples) {
        return Err("j_max must be positive and samples in [2, 2000]".into());
    }
    let v = PeriodicPotential::from_spec(&req.potential).map_err(solver)?;
    let c = Coupling::Decreasing;
    let b = regimes::regime_boundaries(&c, &v).map_err(solver)?;
    let js: Vec<f64> = (1..=req.samples).map(|k| req.j_max * k as f64 / req.samples as f64).collect();
    let table = regimes::p_of_j(&c, &v, &js).map_err(solver)?;
    let rows = &table.rows;
    encode(&CurveResponse {
        j_lower: b.j_lower,
        j_upper: b.j_upper,
        j: rows.iter().map(|r| r.j).collect(),
        hbar: rows.iter().map(|r| r.hbar).collect(),
        p: rows.iter().map(|r| r.p).collect(),
        alpha_minus: rows.iter().map(|r| r.alpha_minus.unwrap_or(f64::NAN)).collect(),
        alpha_plus: rows.iter().map(|r| r.alpha_plus.unwrap_or(f64::NAN)).collect(),
    })
}

/// Regularized density next to its first-order limit.
pub fn elliptic_profile_json(request: &str) -> Result<String, String> {
    let req: EllipticRequest = parse(request)?;
    check_n(req.n)?;
    let v = PeriodicPotential::from_spec(&req.potential).map_err(solver)?;
    let c = Coupling::from(req.coupling);
    let sol = elliptic::solve_elliptic_continuation(&c, &v, req.j, req.eps, req.n).map_err(solver)?;
    let reference = elliptic::first_order_reference(&c, &v, req.j, req.n).map_err(solver)?;
    let l1_distance = elliptic::l1_distance(&c, &v, &sol, &reference).map_err(solver)?;
    encode(&EllipticResponse {
        x: (0..req.n).map(|i| i as f64 / req.n as f64).collect(),
        m: sol.density(),
        reference_m: reference.m.values,
        hbar: sol.hbar,
        l1_distance,
        residual_norm: sol.residual_norm,
    })
}

#[wasm_bindgen]
pub fn solve_profile(request: &str) -> Result<String, JsValue> {
    solve_profile_json(request).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn regime_curves(request: &str) -> Result<String, JsValue> {
    regime_curves_json(request).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn elliptic_profile(request: &str) -> Result<String, JsValue> {
    elliptic_profile_json(request).map_err(|e| JsValue::from_str(&e))
}
