//! Replicated comparison of pruning variants on random covering-ellipse problems.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::BoundKind;
use crate::error::{DesignError, Result};
use crate::instances::gen_gaussian_ellipse;
use crate::solver::{solve, Init, Realloc, SolverConfig, Status};

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub replicates: usize,
    pub n: usize,
    pub delta: f64,
    pub seed_base: u64,
    pub variants: Vec<BoundKind>,
    /// Worker threads; 0 lets rayon decide.
    pub jobs: usize,
    pub realloc: Realloc,
    pub boost_factor: f64,
    pub max_iters: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            replicates: 50,
            n: 1000,
            delta: 1e-3,
            seed_base: 0,
            variants: vec![BoundKind::None, BoundKind::Old, BoundKind::New],
            jobs: 0,
            realloc: Realloc::Proportional,
            boost_factor: 2.0,
            max_iters: 100_000,
        }
    }
}

impl BenchConfig {
    /// Instance seed of replicate `r`; shared by every variant.
    pub fn seed_for(&self, r: usize) -> u64 {
        self.seed_base.wrapping_add(r as u64)
    }
}

/// One variant solved on one replicate instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub replicate: usize,
    pub seed: u64,
    pub variant: BoundKind,
    pub k_star: Option<usize>,
    pub k_10: Option<usize>,
    /// Active points at `k*(δ)`.
    pub n_delta: usize,
    pub wall_time: f64,
    pub logdet: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantSummary {
    pub variant: BoundKind,
    pub mean_k_star: f64,
    /// Mean wall time relative to the fastest variant.
    pub rel_time: f64,
    pub mean_wall_time: f64,
    pub mean_n_delta: f64,
    /// Mean over replicates that reached 10 active points; `None` if none did.
    pub mean_k_10: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchSummary {
    pub rows: Vec<VariantSummary>,
    /// Replicates entering the means.
    pub replicates: usize,
    /// Replicates excluded because some variant errored or hit `max_iters`.
    pub failures: usize,
    pub n: usize,
    pub delta: f64,
}

impl BenchSummary {
    pub fn row(&self, variant: BoundKind) -> Option<&VariantSummary> {
        self.rows.iter().find(|r| r.variant == variant)
    }

    /// CSV with `k_star` and `k_10` rounded up; the `T` and `wall_time_s`
    /// columns are the only ones that vary between identical runs.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("variant,k_star,T,n_delta,k_10,wall_time_s,replicates,failures,n,delta\n");
        for r in &self.rows {
            let k10 = r.mean_k_10.map(|v| format!("{}", v.ceil() as u64)).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{:.4},{:.4},{},{:.6e},{},{},{},{}",
                r.variant,
                r.mean_k_star.ceil() as u64,
                r.rel_time,
                r.mean_n_delta,
                k10,
                r.mean_wall_time,
                self.replicates,
                self.failures,
                self.n,
                self.delta
            );
        }
        out
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{} replicates (n = {}, delta = {:e}, {} excluded)",
            self.replicates, self.n, self.delta, self.failures
        );
        let _ = writeln!(out, "{:<8} {:>8} {:>8} {:>10} {:>6}", "variant", "k*", "T", "n(delta)", "k10");
        for r in &self.rows {
            let k10 = r.mean_k_10.map_or_else(|| "-".to_string(), |v| format!("{}", v.ceil() as u64));
            let _ = writeln!(
                out,
                "{:<8} {:>8} {:>8.2} {:>10.2} {:>6}",
                r.variant.as_str(),
                r.mean_k_star.ceil() as u64,
                r.rel_time,
                r.mean_n_delta,
                k10
            );
        }
        out
    }
}

fn run_replicate(cfg: &BenchConfig, r: usize) -> Result<Vec<RunRecord>> {
    let seed = cfg.seed_for(r);
    let problem = gen_gaussian_ellipse(cfg.n, seed)?;
    cfg.variants
        .iter()
        .map(|&variant| {
            let scfg = SolverConfig {
                bound: variant,
                delta: cfg.delta,
                realloc: cfg.realloc,
                boost_factor: cfg.boost_factor,
                max_iters: cfg.max_iters,
                record_trace: false,
                ..Default::default()
            };
            let (sol, trace) = solve(problem.clone(), Init::Uniform, &scfg)?;
            if sol.status != Status::Converged {
                return Err(DesignError::InvalidInput(format!(
                    "replicate {r} ({variant}) stopped at max_iters"
                )));
            }
            Ok(RunRecord {
                replicate: r,
                seed,
                variant,
                k_star: trace.k_star,
                k_10: trace.k_10,
                n_delta: sol.active,
                wall_time: trace.wall_time,
                logdet: sol.log_det(),
            })
        })
        .collect()
}

/// Runs every replicate under every variant and averages per variant.
///
/// Returns the summary together with the raw per-run records (successful
/// replicates only, in replicate order).
pub fn run_bench(cfg: &BenchConfig) -> Result<(BenchSummary, Vec<RunRecord>)> {
    if cfg.variants.is_empty() {
        return Err(DesignError::InvalidInput("no variants selected".into()));
    }
    if cfg.replicates == 0 {
        return Err(DesignError::InvalidInput("need at least one replicate".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| DesignError::InvalidInput(e.to_string()))?;
    let outcomes: Vec<Result<Vec<RunRecord>>> =
        pool.install(|| (0..cfg.replicates).into_par_iter().map(|r| run_replicate(cfg, r)).collect());

    let failures = outcomes.iter().filter(|o| o.is_err()).count();
    let records: Vec<RunRecord> = outcomes.into_iter().filter_map(|o| o.ok()).flatten().collect();
    let ok = cfg.replicates - failures;
    if ok == 0 {
        return Err(DesignError::InvalidInput("every replicate failed".into()));
    }

    let mut rows: Vec<VariantSummary> = cfg
        .variants
        .iter()
        .map(|&variant| {
            let runs: Vec<&RunRecord> = records.iter().filter(|r| r.variant == variant).collect();
            let count = runs.len() as f64;
            let mean = |f: &dyn Fn(&RunRecord) -> f64| runs.iter().map(|r| f(r)).sum::<f64>() / count;
            let k10: Vec<f64> = runs.iter().filter_map(|r| r.k_10.map(|k| k as f64)).collect();
            VariantSummary {
                variant,
                mean_k_star: mean(&|r| r.k_star.unwrap_or(0) as f64),
                rel_time: 0.0,
                mean_wall_time: mean(&|r| r.wall_time),
                mean_n_delta: mean(&|r| r.n_delta as f64),
                mean_k_10: (!k10.is_empty()).then(|| k10.iter().sum::<f64>() / k10.len() as f64),
            }
        })
        .collect();
    let fastest = rows.iter().map(|r| r.mean_wall_time).fold(f64::INFINITY, f64::min);
    for r in &mut rows {
        r.rel_time = if fastest > 0.0 { r.mean_wall_time / fastest } else { 1.0 };
    }
    let summary = BenchSummary { rows, replicates: ok, failures, n: cfg.n, delta: cfg.delta };
    Ok((summary, records))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> BenchConfig {
        BenchConfig { replicates: 3, n: 200, seed_base: 11, jobs: 2, ..Default::default() }
    }

    #[test]
    fn deterministic_apart_from_time() {
        let (a, ra) = run_bench(&small()).unwrap();
        let (b, rb) = run_bench(&small()).unwrap();
        let strip = |recs: &[RunRecord]| -> Vec<RunRecord> {
            recs.iter().cloned().map(|mut r| { r.wall_time = 0.0; r }).collect()
        };
        assert_eq!(strip(&ra), strip(&rb));
        for (x, y) in a.rows.iter().zip(&b.rows) {
            assert_eq!(x.mean_k_star, y.mean_k_star);
            assert_eq!(x.mean_n_delta, y.mean_n_delta);
            assert_eq!(x.mean_k_10, y.mean_k_10);
        }
    }

    #[test]
    fn variants_share_instances() {
        let (summary, recs) = run_bench(&small()).unwrap();
        assert_eq!(summary.replicates, 3);
        for r in 0..3 {
            let seeds: Vec<u64> = recs.iter().filter(|x| x.replicate == r).map(|x| x.seed).collect();
            assert_eq!(seeds.len(), 3);
            assert!(seeds.iter().all(|&s| s == 11 + r as u64));
        }
        let none = summary.row(BoundKind::None).unwrap();
        let new = summary.row(BoundKind::New).unwrap();
        assert_eq!(none.mean_n_delta, 200.0);
        assert!(new.mean_n_delta <= none.mean_n_delta);
        assert_eq!(none.mean_k_10, None);
        assert!(summary.rows.iter().any(|r| r.rel_time == 1.0));
        assert!(summary.rows.iter().all(|r| r.rel_time >= 1.0));
    }

    #[test]
    fn csv_layout() {
        let (summary, _) = run_bench(&BenchConfig { replicates: 1, n: 50, ..Default::default() }).unwrap();
        let csv = summary.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("none,"));
        // k_10 empty for the unpruned variant
        assert_eq!(lines[1].split(',').nth(4), Some(""));
        assert!(summary.to_table().contains("new"));
    }

    #[test]
    fn rejects_empty_configs() {
        assert!(run_bench(&BenchConfig { variants: vec![], ..small() }).is_err());
        assert!(run_bench(&BenchConfig { replicates: 0, ..small() }).is_err());
    }
}
