#![allow(dead_code)]

pub mod oracle;

use optdesign::instances::{gen_gaussian_cloud, gen_gaussian_ellipse};
use optdesign::rng::NormalStream;
use optdesign::{solve, BoundKind, DesignProblem, Init, Solution, SolverConfig, SolverTrace, Status};

/// Random small instance `i` of the prune-safety family: n ∈ [10, 25],
/// alternating a raw planar Gaussian cloud (m = 2) and a lifted one (m = 3).
pub fn small_instance(i: usize) -> DesignProblem {
    let seed = 1_000 + i as u64;
    let mut s = NormalStream::new(seed ^ 0x9e37_79b9_7f4a_7c15);
    let n = 10 + (s.uniform() * 16.0) as usize;
    if i.is_multiple_of(2) {
        gen_gaussian_cloud(n, 2, seed).unwrap()
    } else {
        gen_gaussian_ellipse(n, seed).unwrap()
    }
}

/// Unpruned run to ε < 1e-12.
pub fn reference(problem: &DesignProblem) -> (Solution, SolverTrace) {
    let cfg = SolverConfig {
        bound: BoundKind::None,
        delta: 1e-12,
        max_iters: 5_000_000,
        ..Default::default()
    };
    let out = solve(problem.clone(), Init::Uniform, &cfg).unwrap();
    assert_eq!(out.0.status, Status::Converged, "reference run did not converge");
    out
}

pub fn run(problem: &DesignProblem, bound: BoundKind, delta: f64) -> (Solution, SolverTrace) {
    let cfg = SolverConfig { bound, delta, max_iters: 5_000_000, ..Default::default() };
    solve(problem.clone(), Init::Uniform, &cfg).unwrap()
}

/// Indices deactivated during a run, read back from the trace-free solution:
/// everything not carried by the final design.
pub fn removed_points(problem: &DesignProblem, sol: &Solution) -> Vec<usize> {
    (0..problem.len()).filter(|i| !sol.xi_final.support().contains(i)).collect()
}
