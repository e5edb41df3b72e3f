//! Lower bounds on the variance function at D-optimum support points.
//!
//! Any point `x` with `d(ξ, x) < h_m(ε(ξ))` carries no weight in any
//! D-optimum design, whatever the design `ξ` used to evaluate it. The older
//! bound `h̃_m` is kept for comparison; `h_m > h̃_m` for every `ε > 0`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{DesignError, Result};

/// Negative excess values down to this are treated as roundoff and clamped to 0.
pub const EPS_ROUNDOFF: f64 = 1e-12;

/// Which screening bound drives pruning.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundKind {
    /// `h_m(ε)`.
    New,
    /// `h̃_m(ε)`.
    Old,
    /// No pruning.
    None,
}

impl BoundKind {
    /// Bound value for this kind; `None` when pruning is disabled.
    pub fn value(self, m: usize, eps: f64) -> Result<Option<f64>> {
        match self {
            BoundKind::New => lower_bound_new(m, eps).map(Some),
            BoundKind::Old => lower_bound_old(m, eps).map(Some),
            BoundKind::None => Ok(None),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BoundKind::New => "new",
            BoundKind::Old => "old",
            BoundKind::None => "none",
        }
    }
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BoundKind {
    type Err = DesignError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "new" => Ok(BoundKind::New),
            "old" => Ok(BoundKind::Old),
            "none" => Ok(BoundKind::None),
            other => Err(DesignError::InvalidInput(format!("unknown bound kind `{other}`"))),
        }
    }
}

fn check_args(m: usize, eps: f64) -> Result<f64> {
    if m < 1 {
        return Err(DesignError::Domain("dimension m must be at least 1".into()));
    }
    if eps.is_nan() {
        return Err(DesignError::Domain("excess is NaN".into()));
    }
    if eps < -EPS_ROUNDOFF {
        return Err(DesignError::Domain(format!("excess {eps} is negative")));
    }
    Ok(eps.max(0.0))
}

/// Minimum of the smallest eigenvalue `λ₁` of `M^{-1/2} M* M^{-1/2}` under
/// `Σ λᵢ⁻¹ ≤ m` and `Σ λᵢ ≤ m + ε`:
///
/// `λ₁* = 1 + ε/2 − √(ε(4 + ε − 4/m))/2`.
///
/// Evaluated through the conjugate form `(1 + ε/m) / (1 + ε/2 + √ε·√(4 + ε − 4/m)/2)`,
/// which avoids cancellation when `ε` is large.
pub fn lambda1_star(m: usize, eps: f64) -> Result<f64> {
    let eps = check_args(m, eps)?;
    if m == 1 || eps == 0.0 {
        return Ok(1.0);
    }
    if eps.is_infinite() {
        return Ok(1.0 / m as f64);
    }
    let inv_m = 1.0 / m as f64;
    let radical = eps.sqrt() * (4.0 + eps - 4.0 * inv_m).sqrt();
    Ok((1.0 + eps * inv_m) / (1.0 + 0.5 * eps + 0.5 * radical))
}

/// `h_m(ε) = m · λ₁*(m, ε)`.
pub fn lower_bound_new(m: usize, eps: f64) -> Result<f64> {
    Ok(m as f64 * lambda1_star(m, eps)?)
}

/// `h̃_m(ε) = m [1 + ε/2 − √(ε(4 + ε))/2]`, in conjugate form.
pub fn lower_bound_old(m: usize, eps: f64) -> Result<f64> {
    let eps = check_args(m, eps)?;
    if eps == 0.0 {
        return Ok(m as f64);
    }
    if eps.is_infinite() {
        return Ok(0.0);
    }
    let radical = eps.sqrt() * (4.0 + eps).sqrt();
    Ok(m as f64 / (1.0 + 0.5 * eps + 0.5 * radical))
}

/// Default safety margin subtracted from the bound before testing.
pub fn default_prune_tol(m: usize) -> f64 {
    1e-9 * m as f64
}

/// `true` iff `d_value < bound(m, eps) − tol`.
///
/// Invalid `(m, eps)` never prune.
pub fn prunable(d_value: f64, m: usize, eps: f64, kind: BoundKind, tol: f64) -> bool {
    match kind.value(m, eps) {
        Ok(Some(h)) => d_value < h - tol,
        Ok(None) => false,
        Err(_) => {
            debug_assert!(false, "prunable called with invalid m={m}, eps={eps}");
            false
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn lambda_examples() {
        assert_eq!(lambda1_star(5, 0.0).unwrap(), 1.0);
        assert_eq!(lambda1_star(1, 7.3).unwrap(), 1.0);
        assert_relative_eq!(lambda1_star(2, 1.0).unwrap(), 1.5 - 3f64.sqrt() / 2.0, epsilon = 1e-15);
        assert_relative_eq!(lambda1_star(2, 1.0).unwrap(), 0.633_974_6, epsilon = 1e-7);
    }

    #[test]
    fn new_bound_examples() {
        assert_eq!(lower_bound_new(3, 0.0).unwrap(), 3.0);
        assert_relative_eq!(lower_bound_new(2, 1.0).unwrap(), 3.0 - 3f64.sqrt(), epsilon = 1e-14);
        assert_relative_eq!(lower_bound_new(2, 1.0).unwrap(), 1.267_949_2, epsilon = 1e-7);
        let direct = 3.0 * (1.5 - (11.0_f64 / 3.0).sqrt() / 2.0);
        assert_relative_eq!(lower_bound_new(3, 1.0).unwrap(), direct, epsilon = 1e-14);
        assert_relative_eq!(lower_bound_new(3, 1.0).unwrap(), 1.627_718_7, epsilon = 1e-7);
        assert!((lower_bound_new(3, 1e6).unwrap() - 1.0).abs() < 3e-6);
    }

    #[test]
    fn old_bound_examples() {
        assert_eq!(lower_bound_old(4, 0.0).unwrap(), 4.0);
        assert_relative_eq!(lower_bound_old(3, 0.5).unwrap(), 1.5, epsilon = 1e-15);
        // 3·(1.25 − √(19/12)/2) = 1.86254139…
        assert_relative_eq!(lower_bound_new(3, 0.5).unwrap(), 1.862_541_4, epsilon = 1e-7);
    }

    #[test]
    fn domain_handling() {
        assert!(matches!(lambda1_star(0, 1.0), Err(DesignError::Domain(_))));
        assert!(matches!(lower_bound_new(3, -1e-6), Err(DesignError::Domain(_))));
        assert!(matches!(lower_bound_old(3, f64::NAN), Err(DesignError::Domain(_))));
        // roundoff-sized negatives are clamped
        assert_eq!(lower_bound_new(3, -1e-13).unwrap(), 3.0);
        assert_eq!(lower_bound_new(3, f64::INFINITY).unwrap(), 1.0);
        assert_eq!(lower_bound_old(3, f64::INFINITY).unwrap(), 0.0);
    }

    #[test]
    fn prunable_examples() {
        assert!(prunable(0.4, 1, 0.6, BoundKind::New, 0.0));
        for kind in [BoundKind::New, BoundKind::Old, BoundKind::None] {
            for eps in [0.0, 0.1, 3.0, 1e4] {
                assert!(!prunable(3.0, 3, eps, kind, 0.0));
            }
        }
        assert!(prunable(1.4, 3, 0.5, BoundKind::Old, 0.0));
        assert!(prunable(1.4, 3, 0.5, BoundKind::New, 0.0));
        assert!(!prunable(1.6, 3, 0.5, BoundKind::Old, 0.0));
        assert!(prunable(1.6, 3, 0.5, BoundKind::New, 0.0));
        // equality is not pruned
        let h = lower_bound_new(3, 0.5).unwrap();
        assert!(!prunable(h, 3, 0.5, BoundKind::New, 0.0));
    }

    #[test]
    fn parse_kind() {
        assert_eq!("NEW".parse::<BoundKind>().unwrap(), BoundKind::New);
        assert_eq!("none".parse::<BoundKind>().unwrap(), BoundKind::None);
        assert!("tight".parse::<BoundKind>().is_err());
    }

    proptest! {
        #[test]
        fn never_prunes_without_bound(d in 0.0..100.0f64, m in 1usize..12, eps in 0.0..1e3f64) {
            prop_assert!(!prunable(d, m, eps, BoundKind::None, 0.0));
        }

        #[test]
        fn new_dominates_old(m in 1usize..20, log_eps in -9.0..9.0f64) {
            let eps = 10f64.powf(log_eps);
            let hn = lower_bound_new(m, eps).unwrap();
            let ho = lower_bound_old(m, eps).unwrap();
            prop_assert!(hn > ho);
            prop_assert!(hn <= m as f64);
            if m >= 2 { prop_assert!(hn > 1.0); } else { prop_assert_eq!(hn, 1.0); }
        }

        #[test]
        fn conjugate_form_matches_textbook_form(m in 2usize..10, eps in 0.0..50.0f64) {
            let mf = m as f64;
            let textbook = 1.0 + eps / 2.0 - (eps * (4.0 + eps - 4.0 / mf)).sqrt() / 2.0;
            prop_assert!((lambda1_star(m, eps).unwrap() - textbook).abs() < 1e-12);
        }
    }
}
