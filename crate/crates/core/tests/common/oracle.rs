//! Brute-force minimization of λ₁ under Σ λᵢ⁻¹ ≤ m, Σ λᵢ ≤ m + ε,
//! independent of the closed form.

/// `(λ₁, L)` with `λ₂ = … = λ_m = L` is feasible.
fn feasible_pair(m: f64, eps: f64, l1: f64, l: f64) -> bool {
    l1 > 0.0 && l > 0.0 && l1 <= l && 1.0 / l1 + (m - 1.0) / l <= m && l1 + (m - 1.0) * l <= m + eps
}

/// Dense grid over `(λ₁, L)` followed by repeated zoomed grids around the
/// best feasible point, then a final bisection on λ₁ along the best `L`
/// column.
pub fn lambda1_grid(m: usize, eps: f64) -> f64 {
    if m == 1 {
        return 1.0;
    }
    let mf = m as f64;
    let (mut l1_lo, mut l1_hi) = (1.0 / mf, 1.0);
    let (mut l_lo, mut l_hi) = (1.0, (mf + eps - 1.0 / mf) / (mf - 1.0));
    let steps = 1000;
    let mut best = (1.0, 1.0);
    for _level in 0..10 {
        let mut found = false;
        for a in 0..=steps {
            let l1 = l1_lo + (l1_hi - l1_lo) * a as f64 / steps as f64;
            if found && l1 >= best.0 {
                break;
            }
            for b in 0..=steps {
                let l = l_lo + (l_hi - l_lo) * b as f64 / steps as f64;
                if feasible_pair(mf, eps, l1, l) {
                    best = (l1, l);
                    found = true;
                    break;
                }
            }
        }
        let w1 = (l1_hi - l1_lo) * 50.0 / steps as f64;
        let w = (l_hi - l_lo) * 20.0 / steps as f64;
        l1_lo = (best.0 - w1).max(1.0 / mf + 1e-15);
        l1_hi = best.0;
        l_lo = (best.1 - w).max(1.0);
        l_hi = best.1 + w;
    }
    best.0
}

/// For fixed λ₁ the other constraints are jointly satisfiable iff the
/// smallest admissible L does not exceed the largest one (Jensen: equal
/// values minimize Σ 1/λᵢ for a given sum). Scan λ₁ then bisect.
pub fn lambda1_bisect(m: usize, eps: f64) -> f64 {
    if m == 1 {
        return 1.0;
    }
    let mf = m as f64;
    let feasible = |l1: f64| {
        let slack = mf - 1.0 / l1;
        if slack <= 0.0 {
            return false;
        }
        let l_min = ((mf - 1.0) / slack).max(l1);
        let l_max = (mf + eps - l1) / (mf - 1.0);
        l_min <= l_max
    };
    let grid = 100_000;
    let mut prev = 1.0 / mf;
    for a in 1..=grid {
        let l1 = 1.0 / mf + (1.0 - 1.0 / mf) * a as f64 / grid as f64;
        if feasible(l1) {
            let (mut lo, mut hi) = (prev, l1);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if feasible(mid) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return hi;
        }
        prev = l1;
    }
    1.0
}

/// m = 3 without assuming λ₂ = λ₃: bisection on λ₁ with a grid search over
/// `(λ₂, λ₃)` as the feasibility test.
pub fn lambda1_free_m3(eps: f64) -> f64 {
    let feasible = |l1: f64| {
        let steps = 600;
        let hi = 3.0 + eps;
        for a in 0..=steps {
            let l2 = l1 + (hi - l1) * a as f64 / steps as f64;
            for b in 0..=steps {
                let l3 = l2 + (hi - l2) * b as f64 / steps as f64;
                if 1.0 / l1 + 1.0 / l2 + 1.0 / l3 <= 3.0 && l1 + l2 + l3 <= 3.0 + eps {
                    return true;
                }
            }
        }
        false
    };
    let (mut lo, mut hi) = (1.0 / 3.0, 1.0);
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}
