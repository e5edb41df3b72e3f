//! WebAssembly bindings for the interactive demo page in `www/`.
//!
//! Every export returns a JSON string so the page needs no generated
//! TypeScript types; errors surface as thrown JavaScript strings.

use optdesign::bounds::{lower_bound_new, lower_bound_old};
use optdesign::instances::TightCertificate;
use optdesign::solver::TraceRow;
use optdesign::{covering_ellipse, gen_gaussian_ellipse, gen_tightness, solve_observed, BoundKind, EllipseParams};
use optdesign::{Init, SolverConfig, Status};
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Debug, Serialize)]
pub struct BoundCurves {
    pub m: usize,
    pub eps: Vec<f64>,
    pub new: Vec<f64>,
    pub old: Vec<f64>,
}

#[derive(Debug, Serialize)]
pub struct SupportPoint {
    pub index: usize,
    pub weight: f64,
}

#[derive(Debug, Serialize)]
pub struct EllipseView {
    pub params: EllipseParams,
    /// Semi-axes (major first) and the major-axis angle in radians.
    pub axes: [f64; 3],
    pub area: f64,
}

#[derive(Debug, Serialize)]
pub struct EllipseRun {
    pub points: Vec<[f64; 2]>,
    /// Iteration at which each point was removed, `None` if it survived.
    pub removed_at: Vec<Option<usize>>,
    pub support: Vec<SupportPoint>,
    pub ellipse: EllipseView,
    pub trace: Vec<TraceRow>,
    pub k_star: Option<usize>,
    pub converged: bool,
    pub wall_time: f64,
}

#[derive(Debug, Serialize)]
pub struct TightView {
    pub certificate: TightCertificate,
    pub b_interval: [f64; 2],
    pub points: Vec<Vec<f64>>,
    pub xi: Vec<SupportPoint>,
    pub eta: Vec<SupportPoint>,
}

fn to_json<T: Serialize>(value: &T) -> Result<String, String> {
    serde_json::to_string(value).map_err(|e| e.to_string())
}

/// Samples both screening bounds on `[0, eps_max]`.
pub fn bound_curves_impl(m: usize, eps_max: f64, samples: usize) -> Result<BoundCurves, String> {
    if m == 0 {
        return Err("m must be positive".into());
    }
    if !(eps_max.is_finite() && eps_max > 0.0) {
        return Err("eps_max must be positive and finite".into());
    }
    if samples < 2 {
        return Err("need at least 2 samples".into());
    }
    let eps: Vec<f64> = (0..samples).map(|i| eps_max * i as f64 / (samples - 1) as f64).collect();
    let new = eps.iter().map(|&e| lower_bound_new(m, e)).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
    let old = eps.iter().map(|&e| lower_bound_old(m, e)).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
    Ok(BoundCurves { m, eps, new, old })
}

/// Draws a Gaussian cloud, computes its covering ellipse and records which
/// points were screened out at which iteration.
pub fn solve_ellipse_impl(n: usize, seed: u64, bound: &str, delta: f64) -> Result<EllipseRun, String> {
    let bound: BoundKind = bound.parse().map_err(|e: optdesign::DesignError| e.to_string())?;
    let problem = gen_gaussian_ellipse(n, seed).map_err(|e| e.to_string())?;
    let points: Vec<[f64; 2]> = problem.points().map(|p| [p[0], p[1]]).collect();
    let cfg = SolverConfig { delta, ..SolverConfig::with_bound(bound) };

    let mut removed_at = vec![None; n];
    let (solution, trace) = solve_observed(problem, Init::Uniform, &cfg, |state| {
        for (i, slot) in removed_at.iter_mut().enumerate() {
            if slot.is_none() && !state.problem().is_active(i) {
                *slot = Some(state.k());
            }
        }
    })
    .map_err(|e| e.to_string())?;

    let params = covering_ellipse(&solution.info_final).map_err(|e| e.to_string())?;
    let (a, b, angle) = params.axes();
    let area = params.area();
    Ok(EllipseRun {
        points,
        removed_at,
        support: solution.support_weights().into_iter().map(|(index, weight)| SupportPoint { index, weight }).collect(),
        ellipse: EllipseView { params, axes: [a, b, angle], area },
        trace: trace.rows,
        k_star: trace.k_star,
        converged: solution.status == Status::Converged,
        wall_time: trace.wall_time,
    })
}

/// Builds the worst-case instance on which the new bound is attained.
pub fn tightness_impl(m: usize, eps: f64, delta: f64) -> Result<TightView, String> {
    let inst = gen_tightness(m, eps, delta, None).map_err(|e| e.to_string())?;
    let (lo, hi) = optdesign::TightInstance::b_interval(m, eps, delta).map_err(|e| e.to_string())?;
    let support = |xi: optdesign::DesignMeasure| {
        xi.iter().map(|(index, weight)| SupportPoint { index, weight }).collect::<Vec<_>>()
    };
    Ok(TightView {
        certificate: inst.certificate(),
        b_interval: [lo, hi],
        points: inst.problem.points().map(<[f64]>::to_vec).collect(),
        xi: support(inst.xi()),
        eta: support(inst.eta()),
    })
}

#[wasm_bindgen]
pub fn bound_curves(m: usize, eps_max: f64, samples: usize) -> Result<String, JsValue> {
    bound_curves_impl(m, eps_max, samples).and_then(|v| to_json(&v)).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn solve_ellipse(n: usize, seed: u32, bound: &str, delta: f64) -> Result<String, JsValue> {
    solve_ellipse_impl(n, u64::from(seed), bound, delta).and_then(|v| to_json(&v)).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn tightness(m: usize, eps: f64, delta: f64) -> Result<String, JsValue> {
    tightness_impl(m, eps, delta).and_then(|v| to_json(&v)).map_err(|e| JsValue::from_str(&e))
}
