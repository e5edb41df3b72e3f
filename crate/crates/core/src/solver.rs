//! Multiplicative algorithm for D-optimum design with support-point pruning.
//!
//! Each iteration rescales every weight by `d(ξᵏ, xᵢ)/m`. Every
//! `prune_every` iterations, points whose variance falls below the chosen
//! screening bound are deleted from the design space and their mass is
//! handed back to the survivors. The run stops at the first `k` with
//! `ε(ξᵏ) < δ`; by concavity of `log det`, `ε` then bounds the gap to the
//! optimum.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use web_time::Instant;

use crate::bounds::{self, BoundKind};
use crate::design::{information_matrix, DesignMeasure, DesignProblem, InfoMatrix};
use crate::error::{DesignError, Result};

/// How mass freed by pruning is returned to the surviving points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Realloc {
    /// Survivors keep their relative weights.
    Proportional,
    /// Survivors with `d ≥ m` are boosted by the configured factor first.
    Boost,
}

impl FromStr for Realloc {
    type Err = DesignError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "proportional" => Ok(Realloc::Proportional),
            "boost" => Ok(Realloc::Boost),
            other => Err(DesignError::InvalidInput(format!("unknown reallocation rule `{other}`"))),
        }
    }
}

impl fmt::Display for Realloc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Realloc::Proportional => "proportional",
            Realloc::Boost => "boost",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub bound: BoundKind,
    /// Target precision: stop once `ε < delta`.
    pub delta: f64,
    pub prune_every: usize,
    /// Safety margin subtracted from the bound; `None` means `1e-9 · m`.
    pub prune_tol: Option<f64>,
    pub realloc: Realloc,
    pub boost_factor: f64,
    pub max_iters: usize,
    pub record_trace: bool,
    /// Evaluate a second bound at every prune event without acting on it.
    pub shadow: Option<BoundKind>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            bound: BoundKind::New,
            delta: 1e-3,
            prune_every: 1,
            prune_tol: None,
            realloc: Realloc::Proportional,
            boost_factor: 2.0,
            max_iters: 100_000,
            record_trace: true,
            shadow: None,
        }
    }
}

impl SolverConfig {
    pub fn with_bound(bound: BoundKind) -> Self {
        SolverConfig { bound, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0) {
            return Err(DesignError::InvalidInput(format!("delta must be positive, got {}", self.delta)));
        }
        if !(self.boost_factor >= 1.0) || !self.boost_factor.is_finite() {
            return Err(DesignError::InvalidInput(format!(
                "boost factor must be at least 1, got {}",
                self.boost_factor
            )));
        }
        if self.prune_every == 0 {
            return Err(DesignError::InvalidInput("prune_every must be at least 1".into()));
        }
        if let Some(tol) = self.prune_tol {
            if !(tol >= 0.0) {
                return Err(DesignError::InvalidInput(format!("prune tolerance must be nonnegative, got {tol}")));
            }
        }
        Ok(())
    }

    pub fn tol_for(&self, m: usize) -> f64 {
        self.prune_tol.unwrap_or_else(|| bounds::default_prune_tol(m))
    }

    /// Weights below this are not reported as support.
    pub fn support_threshold(&self) -> f64 {
        self.delta / 10.0
    }
}

/// Initial design for [`solve`].
#[derive(Debug, Clone, PartialEq)]
pub enum Init {
    Uniform,
    Measure(DesignMeasure),
}

/// Iterate `ξᵏ` together with the live design space and cached `d(ξᵏ, ·)`.
#[derive(Debug, Clone)]
pub struct SolverState {
    k: usize,
    problem: DesignProblem,
    xi: DesignMeasure,
    info: InfoMatrix,
    /// `d(ξᵏ, x)` for the points of `xi.support()`, in the same order.
    d: Vec<f64>,
    eps: f64,
}

impl SolverState {
    pub fn new(problem: DesignProblem, init: Init) -> Result<Self> {
        let xi = match init {
            Init::Uniform => DesignMeasure::uniform(&problem),
            Init::Measure(xi) => {
                if !xi.support().iter().copied().eq(problem.active_indices()) {
                    return Err(DesignError::InvalidInput(
                        "initial design must put positive weight on every active point".into(),
                    ));
                }
                xi
            }
        };
        let info = information_matrix(&problem, &xi)?;
        let mut state = SolverState { k: 0, problem, xi, info, d: Vec::new(), eps: 0.0 };
        state.refresh_variances();
        Ok(state)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn problem(&self) -> &DesignProblem {
        &self.problem
    }

    pub fn xi(&self) -> &DesignMeasure {
        &self.xi
    }

    pub fn info(&self) -> &InfoMatrix {
        &self.info
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// `d(ξᵏ, x)` aligned with `xi().support()`.
    pub fn variances(&self) -> &[f64] {
        &self.d
    }

    pub fn active_count(&self) -> usize {
        self.xi.len()
    }

    fn dim(&self) -> usize {
        self.problem.dim()
    }

    fn refresh_variances(&mut self) {
        let info = &self.info;
        let problem = &self.problem;
        self.d.clear();
        self.d.extend(self.xi.support().iter().map(|&i| info.variance(problem.point(i))));
        let max_d = self.d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        self.eps = (max_d - self.dim() as f64).max(0.0);
    }

    /// One multiplicative update `wᵢ ← wᵢ d(ξ, xᵢ)/m`, renormalized.
    pub fn multiplicative_step(&mut self) -> Result<()> {
        let mut next = multiplicative_weights(self.xi.weights(), &self.d, self.dim());
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|w| *w /= total);
        let candidate = DesignMeasure::from_parts_unchecked(self.xi.support().to_vec(), next);
        self.info = information_matrix(&self.problem, &candidate)?;
        self.xi = candidate;
        self.refresh_variances();
        self.k += 1;
        Ok(())
    }

    /// Original indices of the points `kind` would delete from the current state.
    pub fn prune_candidates(&self, kind: BoundKind, tol: f64) -> Vec<usize> {
        let threshold = match kind.value(self.dim(), self.eps) {
            Ok(Some(h)) => h - tol,
            _ => return Vec::new(),
        };
        self.xi
            .support()
            .iter()
            .zip(&self.d)
            .filter(|(_, &d)| d < threshold)
            .map(|(&i, _)| i)
            .collect()
    }

    /// Deletes every point that fails the configured test and reallocates its mass.
    ///
    /// Returns the removed original indices. On `OverPruned` the state is untouched.
    pub fn prune_step(&mut self, cfg: &SolverConfig) -> Result<Vec<usize>> {
        let m = self.dim();
        let threshold = match cfg.bound.value(m, self.eps)? {
            Some(h) => h - cfg.tol_for(m),
            None => return Ok(Vec::new()),
        };
        let mut removed = Vec::new();
        let mut keep_idx = Vec::with_capacity(self.xi.len());
        let mut keep_w = Vec::with_capacity(self.xi.len());
        let mut keep_d = Vec::with_capacity(self.xi.len());
        for ((&i, &w), &d) in self.xi.support().iter().zip(self.xi.weights()).zip(&self.d) {
            if d < threshold {
                removed.push(i);
            } else {
                keep_idx.push(i);
                keep_w.push(w);
                keep_d.push(d);
            }
        }
        if removed.is_empty() {
            return Ok(removed);
        }
        if keep_idx.len() < m {
            return Err(DesignError::OverPruned { survivors: keep_idx.len(), dim: m });
        }
        let freed: f64 = 1.0 - keep_w.iter().sum::<f64>();
        let weights = match cfg.realloc {
            Realloc::Proportional => reallocate_proportional(&keep_w, freed)?,
            Realloc::Boost => reallocate_boost(&keep_w, &keep_d, m, cfg.boost_factor)?,
        };
        let candidate = DesignMeasure::from_parts_unchecked(keep_idx, weights);
        let info = information_matrix(&self.problem, &candidate)
            .map_err(|_| DesignError::OverPruned { survivors: candidate.len(), dim: m })?;
        for &i in &removed {
            self.problem.deactivate(i);
        }
        self.xi = candidate;
        self.info = info;
        self.refresh_variances();
        Ok(removed)
    }
}

/// Unnormalized multiplicative update `wᵢ d(ξ, xᵢ)/m`.
///
/// When `d` is the variance function of the design `w` itself, the result
/// already sums to one.
pub fn multiplicative_weights(weights: &[f64], d: &[f64], m: usize) -> Vec<f64> {
    let inv_m = 1.0 / m as f64;
    weights.iter().zip(d).map(|(w, d)| w * d * inv_m).collect()
}

/// Rescales surviving weights to unit mass after `freed_mass` was removed.
pub fn reallocate_proportional(survivors: &[f64], freed_mass: f64) -> Result<Vec<f64>> {
    let kept: f64 = survivors.iter().sum();
    if !(kept > 0.0) || survivors.iter().any(|&w| w < 0.0) {
        return Err(DesignError::DegenerateWeights);
    }
    if ((1.0 - freed_mass) - kept).abs() > 1e-9 {
        return Err(DesignError::InvalidInput(format!(
            "freed mass {freed_mass} inconsistent with surviving mass {kept}"
        )));
    }
    Ok(survivors.iter().map(|w| w / kept).collect())
}

/// Boosted reallocation: `zₜ = A·wₜ` when `d(ξ, xₜ) ≥ m`, else `wₜ`; then
/// normalize. `d` must come from the design before the removal.
pub fn reallocate_boost(survivors: &[f64], d: &[f64], m: usize, boost: f64) -> Result<Vec<f64>> {
    if survivors.len() != d.len() {
        return Err(DesignError::DimensionMismatch { expected: survivors.len(), got: d.len() });
    }
    let mf = m as f64;
    let z: Vec<f64> = survivors
        .iter()
        .zip(d)
        .map(|(&w, &dv)| if dv >= mf { boost * w } else { w })
        .collect();
    let total: f64 = z.iter().sum();
    if !(total > 0.0) {
        return Err(DesignError::DegenerateWeights);
    }
    Ok(z.into_iter().map(|v| v / total).collect())
}

/// Upper bound on `log det M* − log det M(ξ)` for a design with excess `eps`.
pub fn optimality_certificate(eps_final: f64) -> f64 {
    eps_final.max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Converged,
    MaxItersReached,
}

/// Shadow evaluation of a second bound at a prune event.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShadowRecord {
    /// Points the shadow bound would have removed.
    pub removable: usize,
    /// Every point removed by the active bound is also removable by the shadow bound.
    pub covers_active: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub k: usize,
    pub q: usize,
    pub eps: f64,
    pub logdet: f64,
    pub removed: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub shadow: Option<ShadowRecord>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SolverTrace {
    pub rows: Vec<TraceRow>,
    /// First `k` with at most 10 active points.
    pub k_10: Option<usize>,
    /// First `k` with `ε < δ`.
    pub k_star: Option<usize>,
    /// Seconds spent in the iteration loop.
    pub wall_time: f64,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub xi_final: DesignMeasure,
    pub info_final: InfoMatrix,
    pub eps_final: f64,
    /// Original indices whose final weight exceeds `δ/10`.
    pub support: Vec<usize>,
    pub certificate: f64,
    pub status: Status,
    pub iterations: usize,
    /// Active points when the run stopped, `q(final)`.
    pub active: usize,
}

impl Solution {
    pub fn log_det(&self) -> f64 {
        self.info_final.log_det()
    }

    /// `(index, weight)` for the reported support.
    pub fn support_weights(&self) -> Vec<(usize, f64)> {
        self.support.iter().map(|&i| (i, self.xi_final.weight_of(i))).collect()
    }
}

/// Runs the algorithm to `ε < δ` or `max_iters`.
pub fn solve(problem: DesignProblem, init: Init, cfg: &SolverConfig) -> Result<(Solution, SolverTrace)> {
    solve_observed(problem, init, cfg, |_| {})
}

/// [`solve`], calling `observer` on `ξ⁰` and on every later iterate.
pub fn solve_observed<F>(
    problem: DesignProblem,
    init: Init,
    cfg: &SolverConfig,
    mut observer: F,
) -> Result<(Solution, SolverTrace)>
where
    F: FnMut(&SolverState),
{
    cfg.validate()?;
    let mut state = SolverState::new(problem, init)?;
    let m = state.dim();
    let tol = cfg.tol_for(m);
    let mut trace = SolverTrace::default();
    let start = Instant::now();

    let record = |state: &SolverState, removed: usize, shadow: Option<ShadowRecord>, trace: &mut SolverTrace| {
        let q = state.active_count();
        if trace.k_10.is_none() && q <= 10 {
            trace.k_10 = Some(state.k);
        }
        if cfg.record_trace {
            trace.rows.push(TraceRow {
                k: state.k,
                q,
                eps: state.eps,
                logdet: state.info.log_det(),
                removed,
                shadow,
            });
        }
    };

    record(&state, 0, None, &mut trace);
    observer(&state);
    let status = loop {
        if state.eps < cfg.delta {
            trace.k_star = Some(state.k);
            break Status::Converged;
        }
        if state.k >= cfg.max_iters {
            break Status::MaxItersReached;
        }
        state.multiplicative_step()?;
        let mut removed = 0;
        let mut shadow = None;
        if cfg.bound != BoundKind::None && state.k % cfg.prune_every == 0 {
            if let Some(kind) = cfg.shadow {
                let active = state.prune_candidates(cfg.bound, tol);
                let other = state.prune_candidates(kind, tol);
                shadow = Some(ShadowRecord {
                    removable: other.len(),
                    covers_active: active.iter().all(|i| other.contains(i)),
                });
            }
            removed = state.prune_step(cfg)?.len();
        }
        record(&state, removed, shadow, &mut trace);
        observer(&state);
    };
    trace.wall_time = start.elapsed().as_secs_f64();

    let threshold = cfg.support_threshold();
    let support = state.xi.iter().filter(|&(_, w)| w > threshold).map(|(i, _)| i).collect();
    let solution = Solution {
        eps_final: state.eps,
        certificate: optimality_certificate(state.eps),
        support,
        status,
        iterations: state.k,
        active: state.active_count(),
        xi_final: state.xi,
        info_final: state.info,
    };
    Ok((solution, trace))
}
