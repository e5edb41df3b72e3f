//! Problem generators and covering-ellipse extraction.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::bounds::lower_bound_new;
use crate::design::{DesignMeasure, DesignProblem, InfoMatrix};
use crate::error::{DesignError, Result};
use crate::rng::NormalStream;

/// `n` i.i.d. `N(0, I₂)` points lifted to `(z₁, z₂, 1) ∈ R³`.
///
/// D-optimum designs on the lifted points give the minimum-area ellipse
/// covering the planar cloud.
pub fn gen_gaussian_ellipse(n: usize, seed: u64) -> Result<DesignProblem> {
    if n < 3 {
        return Err(DesignError::Domain("need n ≥ 3".into()));
    }
    let mut stream = NormalStream::new(seed);
    let mut coords = Vec::with_capacity(3 * n);
    for _ in 0..n {
        let z1 = stream.normal();
        let z2 = stream.normal();
        coords.extend_from_slice(&[z1, z2, 1.0]);
    }
    DesignProblem::from_flat(3, coords)
}

/// `n` i.i.d. `N(0, I_dim)` points, without lifting.
pub fn gen_gaussian_cloud(n: usize, dim: usize, seed: u64) -> Result<DesignProblem> {
    if dim == 0 || n < dim {
        return Err(DesignError::Domain(format!("need n ≥ dim ≥ 1, got n={n}, dim={dim}")));
    }
    let mut stream = NormalStream::new(seed);
    let coords = (0..n * dim).map(|_| stream.normal()).collect();
    DesignProblem::from_flat(dim, coords)
}

/// Worst-case instance showing `h_m(ε)` cannot be raised by any `δ > 0`.
///
/// Layout: `2^{m-1}` x-points, then `2^{m-1}` y-points, then `x*`.
/// The uniform design on the x-points has excess exactly `eps` and
/// `d(ξ, x*) = b·h < h + δ`, yet `x*` supports the D-optimum design.
#[derive(Debug, Clone)]
pub struct TightInstance {
    pub problem: DesignProblem,
    pub m: usize,
    pub h: f64,
    pub eps_target: f64,
    pub delta_target: f64,
    pub b: f64,
    pub x_star_index: usize,
    pub x_block: Range<usize>,
    pub y_block: Range<usize>,
}

/// Summary of a [`TightInstance`] for the JSON sidecar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TightCertificate {
    pub m: usize,
    pub eps: f64,
    pub delta: f64,
    pub h: f64,
    pub b: f64,
    pub x_star_index: usize,
    pub x_block: [usize; 2],
    pub y_block: [usize; 2],
    /// `d(ξ, x*) = b·h` under the uniform design on the x-points.
    pub d_x_star: f64,
    /// `d(η, x*) = b·m` under the uniform design on the y-points.
    pub d_eta_x_star: f64,
}

impl TightInstance {
    /// Admissible open interval for `b`.
    pub fn b_interval(m: usize, eps: f64, delta: f64) -> Result<(f64, f64)> {
        let h = lower_bound_new(m, eps)?;
        Ok((1.0, ((eps + m as f64) / h).min((h + delta) / h)))
    }

    /// Uniform design on the x-points (`ξ`).
    pub fn xi(&self) -> DesignMeasure {
        uniform_on(&self.problem, self.x_block.clone())
    }

    /// Uniform design on the y-points (`η`), D-optimum on `X ∖ {x*}`.
    pub fn eta(&self) -> DesignMeasure {
        uniform_on(&self.problem, self.y_block.clone())
    }

    pub fn certificate(&self) -> TightCertificate {
        TightCertificate {
            m: self.m,
            eps: self.eps_target,
            delta: self.delta_target,
            h: self.h,
            b: self.b,
            x_star_index: self.x_star_index,
            x_block: [self.x_block.start, self.x_block.end],
            y_block: [self.y_block.start, self.y_block.end],
            d_x_star: self.b * self.h,
            d_eta_x_star: self.b * self.m as f64,
        }
    }
}

fn uniform_on(problem: &DesignProblem, block: Range<usize>) -> DesignMeasure {
    let w = 1.0 / block.len() as f64;
    let n = block.len();
    DesignMeasure::on_points(problem, block.collect(), vec![w; n])
        .expect("block points are active and distinct")
}

/// Sign vectors of length `len` in binary-counting order, `+` for a 0 bit,
/// most significant bit first.
fn sign_patterns(len: usize) -> impl Iterator<Item = Vec<f64>> {
    (0..1usize << len).map(move |s| {
        (0..len)
            .map(|j| if (s >> (len - 1 - j)) & 1 == 1 { -1.0 } else { 1.0 })
            .collect()
    })
}

/// Builds the worst-case instance; `b = None` picks the geometric midpoint
/// of the admissible interval.
pub fn gen_tightness(m: usize, eps: f64, delta: f64, b: Option<f64>) -> Result<TightInstance> {
    if m < 2 {
        return Err(DesignError::Domain("tightness instances need m ≥ 2".into()));
    }
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(DesignError::Domain(format!("eps must be positive and finite, got {eps}")));
    }
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(DesignError::Domain(format!("delta must be positive and finite, got {delta}")));
    }
    let h = lower_bound_new(m, eps)?;
    let (lo, hi) = TightInstance::b_interval(m, eps, delta)?;
    let b = match b {
        Some(b) if b > lo && b < hi => b,
        Some(b) => {
            return Err(DesignError::Domain(format!("b = {b} outside the admissible interval ({lo}, {hi})")))
        }
        None => (lo * hi).sqrt(),
    };
    let k = 1usize << (m - 1);
    let mut coords = Vec::with_capacity((2 * k + 1) * m);
    let x_lead = (1.0 / h).sqrt();
    let x_side = ((h - 1.0) / (h * (m - 1) as f64)).sqrt();
    for signs in sign_patterns(m - 1) {
        coords.push(x_lead);
        coords.extend(signs.iter().map(|s| s * x_side));
    }
    let y = (1.0 / m as f64).sqrt();
    for signs in sign_patterns(m - 1) {
        coords.push(y);
        coords.extend(signs.iter().map(|s| s * y));
    }
    coords.push(b.sqrt());
    coords.extend(std::iter::repeat_n(0.0, m - 1));
    let problem = DesignProblem::from_flat(m, coords)?;
    Ok(TightInstance {
        problem,
        m,
        h,
        eps_target: eps,
        delta_target: delta,
        b,
        x_star_index: 2 * k,
        x_block: 0..k,
        y_block: k..2 * k,
    })
}

/// The planar ellipse `{z : (z − center)ᵀ matrix (z − center) ≤ 1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EllipseParams {
    /// Row-major 2×2 shape matrix.
    pub matrix: [f64; 4],
    pub center: [f64; 2],
}

impl EllipseParams {
    /// `(z − c)ᵀ E (z − c)`; at most 1 inside the ellipse.
    pub fn level(&self, z: [f64; 2]) -> f64 {
        let u = [z[0] - self.center[0], z[1] - self.center[1]];
        let e = &self.matrix;
        u[0] * (e[0] * u[0] + e[1] * u[1]) + u[1] * (e[2] * u[0] + e[3] * u[1])
    }

    /// Semi-axis lengths (major first) and the major-axis angle in radians.
    pub fn axes(&self) -> (f64, f64, f64) {
        let [a, b, _, d] = self.matrix;
        let mean = 0.5 * (a + d);
        let spread = (0.25 * (a - d) * (a - d) + b * b).sqrt();
        let (lo, hi) = (mean - spread, mean + spread);
        let angle = 0.5 * (2.0 * b).atan2(a - d) + std::f64::consts::FRAC_PI_2;
        (1.0 / lo.sqrt(), 1.0 / hi.sqrt(), angle)
    }

    pub fn area(&self) -> f64 {
        let [a, b, c, d] = self.matrix;
        std::f64::consts::PI / (a * d - b * c).sqrt()
    }
}

/// Ellipse `{z : (z, 1)ᵀ M*⁻¹ (z, 1) ≤ 3}` from a lifted planar problem.
pub fn covering_ellipse(m_star: &InfoMatrix) -> Result<EllipseParams> {
    if m_star.dim() != 3 {
        return Err(DesignError::DimensionMismatch { expected: 3, got: m_star.dim() });
    }
    let n = m_star.inverse();
    let (a11, a12, a22) = (n[0], n[1], n[4]);
    let (b1, b2, c) = (n[2], n[5], n[8]);
    let det = a11 * a22 - a12 * a12;
    // center = −A⁻¹ b
    let cx = -(a22 * b1 - a12 * b2) / det;
    let cy = -(-a12 * b1 + a11 * b2) / det;
    // (z − c)ᵀ A (z − c) ≤ 3 − c + bᵀ A⁻¹ b
    let bab = -(b1 * cx + b2 * cy);
    let radius = 3.0 - c + bab;
    if !(radius > 0.0) {
        return Err(DesignError::Domain("covering ellipse is empty".into()));
    }
    Ok(EllipseParams {
        matrix: [a11 / radius, a12 / radius, a12 / radius, a22 / radius],
        center: [cx, cy],
    })
}

/// `(z, 1)ᵀ M⁻¹ (z, 1)`.
pub fn lifted_variance(info: &InfoMatrix, z: [f64; 2]) -> f64 {
    info.variance(&[z[0], z[1], 1.0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::{excess, information_matrix, variance_function};
    use approx::assert_relative_eq;

    #[test]
    fn ellipse_generator_contract() {
        let p = gen_gaussian_ellipse(1000, 42).unwrap();
        assert_eq!(p.len(), 1000);
        assert_eq!(p.dim(), 3);
        assert!(p.points().all(|x| x[2] == 1.0));
        assert_eq!(p, gen_gaussian_ellipse(1000, 42).unwrap());
        assert_ne!(p, gen_gaussian_ellipse(1000, 43).unwrap());
        assert!(gen_gaussian_ellipse(3, 0).is_ok());
        assert!(matches!(gen_gaussian_ellipse(2, 0), Err(DesignError::Domain(m)) if m == "need n ≥ 3"));
    }

    #[test]
    fn tightness_m2_worked_values() {
        let t = gen_tightness(2, 1.0, 0.1, Some(1.05)).unwrap();
        assert_relative_eq!(t.h, 1.267_949_2, epsilon = 1e-7);
        let p = &t.problem;
        assert_eq!(p.len(), 5);
        assert_relative_eq!(p.point(0)[0], 0.888_073_8, epsilon = 1e-7);
        assert_relative_eq!(p.point(0)[1], 0.459_700_8, epsilon = 1e-7);
        assert_relative_eq!(p.point(1)[1], -0.459_700_8, epsilon = 1e-7);
        assert_relative_eq!(p.point(2)[0], std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-7);
        assert_relative_eq!(p.point(3)[1], -std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-7);
        assert_relative_eq!(p.point(4)[0], 1.024_695_1, epsilon = 1e-7);
        assert_eq!(p.point(4)[1], 0.0);

        let info = information_matrix(p, &t.xi()).unwrap();
        let mm = info.matrix();
        assert_relative_eq!(mm[0], 0.788_675_1, epsilon = 1e-7);
        assert_relative_eq!(mm[3], 0.211_324_9, epsilon = 1e-7);
        assert!(mm[1].abs() < 1e-15);
        assert_relative_eq!(excess(p, &info), 1.0, epsilon = 1e-9);
        let dx = variance_function(p.point(4), &info).unwrap();
        assert_relative_eq!(dx, 1.331_346_6, epsilon = 1e-7);
        assert!(dx < t.h + 0.1);
        for i in t.x_block.clone() {
            assert_relative_eq!(variance_function(p.point(i), &info).unwrap(), 2.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn tightness_eta_certificates() {
        let t = gen_tightness(3, 1.0, 0.1, None).unwrap();
        let p = &t.problem;
        let eta = information_matrix(p, &t.eta()).unwrap();
        for i in t.y_block.clone() {
            assert_relative_eq!(eta.variance(p.point(i)), 3.0, epsilon = 1e-12);
        }
        for i in t.x_block.clone() {
            assert!(eta.variance(p.point(i)) <= 3.0 + 1e-12);
        }
        assert_relative_eq!(eta.variance(p.point(t.x_star_index)), 3.0 * t.b, epsilon = 1e-12);
        assert!(t.b > 1.0);
    }

    #[test]
    fn tightness_domain() {
        assert!(gen_tightness(1, 1.0, 0.1, None).is_err());
        assert!(gen_tightness(2, 0.0, 0.1, None).is_err());
        assert!(gen_tightness(2, 1.0, -0.1, None).is_err());
        assert!(gen_tightness(2, 1.0, 0.1, Some(1.0)).is_err());
        assert!(gen_tightness(2, 1.0, 0.1, Some(1.2)).is_err());
        let (lo, hi) = TightInstance::b_interval(2, 1.0, 0.1).unwrap();
        let t = gen_tightness(2, 1.0, 0.1, None).unwrap();
        assert!(lo < t.b && t.b < hi);
        assert_relative_eq!(t.b, hi.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn sign_order_is_binary_counting() {
        let s: Vec<Vec<f64>> = sign_patterns(2).collect();
        assert_eq!(s, vec![vec![1.0, 1.0], vec![1.0, -1.0], vec![-1.0, 1.0], vec![-1.0, -1.0]]);
    }

    #[test]
    fn disk_from_scaled_identity() {
        let a = 1.7;
        let m = InfoMatrix::from_matrix(3, vec![a, 0.0, 0.0, 0.0, a, 0.0, 0.0, 0.0, 1.0]).unwrap();
        let e = covering_ellipse(&m).unwrap();
        assert!(e.center[0].abs() < 1e-15 && e.center[1].abs() < 1e-15);
        assert_relative_eq!(e.matrix[0], 1.0 / (2.0 * a), epsilon = 1e-14);
        assert_relative_eq!(e.matrix[3], 1.0 / (2.0 * a), epsilon = 1e-14);
        let (r1, r2, _) = e.axes();
        assert_relative_eq!(r1, (2.0 * a).sqrt(), epsilon = 1e-12);
        assert_relative_eq!(r2, (2.0 * a).sqrt(), epsilon = 1e-12);
        let two = InfoMatrix::from_matrix(2, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        assert!(covering_ellipse(&two).is_err());
    }

    #[test]
    fn ellipse_level_matches_lifted_variance() {
        // off-center, correlated cloud
        let m = InfoMatrix::from_matrix(3, vec![2.0, 0.3, 0.5, 0.3, 1.0, -0.2, 0.5, -0.2, 1.0]).unwrap();
        let e = covering_ellipse(&m).unwrap();
        for z in [[0.1, 0.2], [1.5, -0.7], [-2.0, 0.4]] {
            let lhs = lifted_variance(&m, z) <= 3.0;
            let rhs = e.level(z) <= 1.0;
            assert_eq!(lhs, rhs);
            // level is an affine rescaling of the lifted variance
            let c = lifted_variance(&m, e.center);
            assert_relative_eq!(e.level(z), (lifted_variance(&m, z) - c) / (3.0 - c), epsilon = 1e-12);
        }
    }
}
