//! Finite design spaces, design measures and information matrices.

use crate::error::{DesignError, Result};
use crate::linalg::{self, Cholesky};

/// Tolerance on the total mass of a [`DesignMeasure`].
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// A regressor vector `x ∈ R^m`.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignPoint(Vec<f64>);

impl DesignPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(DesignError::InvalidInput("point has no coordinates".into()));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(DesignError::InvalidInput("point has a non-finite coordinate".into()));
        }
        Ok(DesignPoint(coords))
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

impl AsRef<[f64]> for DesignPoint {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Candidate points in `R^m` plus the mask of points still in the design space.
///
/// Coordinates are frozen at construction; only the mask changes, so removed
/// points can still be inspected after the fact.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignProblem {
    dim: usize,
    coords: Vec<f64>,
    active: Vec<bool>,
}

impl DesignProblem {
    /// Builds a problem from explicit points.
    ///
    /// Fails with `SingularDesign` when the points do not span `R^m`.
    pub fn new(points: Vec<DesignPoint>) -> Result<Self> {
        let dim = points
            .first()
            .map(DesignPoint::dim)
            .ok_or_else(|| DesignError::InvalidInput("empty point set".into()))?;
        let mut coords = Vec::with_capacity(points.len() * dim);
        for p in &points {
            if p.dim() != dim {
                return Err(DesignError::DimensionMismatch { expected: dim, got: p.dim() });
            }
            coords.extend_from_slice(p.coords());
        }
        Self::from_flat(dim, coords)
    }

    /// Builds a problem from row-major coordinates, `dim` values per point.
    pub fn from_flat(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(DesignError::InvalidInput("dimension must be at least 1".into()));
        }
        if coords.is_empty() || !coords.len().is_multiple_of(dim) {
            return Err(DesignError::InvalidInput(format!(
                "{} coordinates do not form points of dimension {dim}",
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(DesignError::InvalidInput("non-finite coordinate".into()));
        }
        let n = coords.len() / dim;
        let problem = DesignProblem { dim, coords, active: vec![true; n] };
        if n < dim {
            return Err(DesignError::SingularDesign { pivot: 0.0, threshold: 0.0 });
        }
        // spanning check: the uniform design must be nonsingular
        information_matrix(&problem, &DesignMeasure::uniform(&problem))?;
        Ok(problem)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of points originally loaded, `q(0)`.
    pub fn len(&self) -> usize {
        self.active.len()
    }

    pub fn is_empty(&self) -> bool {
        self.active.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn is_active(&self, i: usize) -> bool {
        self.active[i]
    }

    pub fn active_count(&self) -> usize {
        self.active.iter().filter(|&&a| a).count()
    }

    pub fn active_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.active.iter().enumerate().filter(|(_, &a)| a).map(|(i, _)| i)
    }

    pub fn deactivate(&mut self, i: usize) {
        self.active[i] = false;
    }
}

/// Probability weights over the active points of a problem.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMeasure {
    support: Vec<usize>,
    weights: Vec<f64>,
}

impl DesignMeasure {
    /// Equal weight on every active point.
    pub fn uniform(problem: &DesignProblem) -> Self {
        let support: Vec<usize> = problem.active_indices().collect();
        let w = 1.0 / support.len() as f64;
        let weights = vec![w; support.len()];
        DesignMeasure { support, weights }
    }

    /// Weights aligned with the active points in index order.
    pub fn new(problem: &DesignProblem, weights: Vec<f64>) -> Result<Self> {
        let support: Vec<usize> = problem.active_indices().collect();
        Self::with_support(support, weights)
    }

    /// Like [`DesignMeasure::new`], rescaling positive weights to unit mass first.
    pub fn normalized(problem: &DesignProblem, mut weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(DesignError::DegenerateWeights);
        }
        weights.iter_mut().for_each(|w| *w /= total);
        Self::new(problem, weights)
    }

    /// A design on an arbitrary set of active points.
    pub fn on_points(problem: &DesignProblem, support: Vec<usize>, weights: Vec<f64>) -> Result<Self> {
        if support.iter().any(|&i| i >= problem.len() || !problem.is_active(i)) {
            return Err(DesignError::InvalidInput("support index out of range or inactive".into()));
        }
        if support.windows(2).any(|w| w[0] >= w[1]) {
            return Err(DesignError::InvalidInput("support indices must be strictly increasing".into()));
        }
        Self::with_support(support, weights)
    }

    pub(crate) fn with_support(support: Vec<usize>, weights: Vec<f64>) -> Result<Self> {
        if support.len() != weights.len() {
            return Err(DesignError::DimensionMismatch { expected: support.len(), got: weights.len() });
        }
        if weights.iter().any(|&w| !(w > 0.0) || !w.is_finite()) {
            return Err(DesignError::InvalidInput("design weights must be strictly positive".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(DesignError::InvalidInput(format!("design weights sum to {total}, not 1")));
        }
        Ok(DesignMeasure { support, weights })
    }

    /// Skips validation; used by the solver, whose updates preserve the simplex.
    pub(crate) fn from_parts_unchecked(support: Vec<usize>, weights: Vec<f64>) -> Self {
        DesignMeasure { support, weights }
    }

    /// Indices into the original point list.
    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    /// Weight of original point `i`, zero when `i` is not carried.
    pub fn weight_of(&self, i: usize) -> f64 {
        self.support
            .iter()
            .position(|&s| s == i)
            .map_or(0.0, |p| self.weights[p])
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.support.iter().copied().zip(self.weights.iter().copied())
    }
}

/// `M(ξ)` with its Cholesky factor, inverse and log-determinant.
#[derive(Debug, Clone, PartialEq)]
pub struct InfoMatrix {
    dim: usize,
    mat: Vec<f64>,
    chol: Cholesky,
    inv: Vec<f64>,
    logdet: f64,
}

impl InfoMatrix {
    /// Wraps a symmetric matrix given row-major.
    pub fn from_matrix(dim: usize, mat: Vec<f64>) -> Result<Self> {
        if mat.len() != dim * dim {
            return Err(DesignError::DimensionMismatch { expected: dim * dim, got: mat.len() });
        }
        let chol = Cholesky::factor(&mat, dim)?;
        let inv = chol.inverse();
        let logdet = chol.log_det();
        Ok(InfoMatrix { dim, mat, chol, inv, logdet })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &[f64] {
        &self.mat
    }

    pub fn inverse(&self) -> &[f64] {
        &self.inv
    }

    pub fn cholesky(&self) -> &Cholesky {
        &self.chol
    }

    pub fn log_det(&self) -> f64 {
        self.logdet
    }

    /// `xᵀ M⁻¹ x` without a length check.
    #[inline]
    pub fn variance(&self, x: &[f64]) -> f64 {
        linalg::quad_form(&self.inv, x)
    }
}

/// `M(ξ) = Σ wᵢ xᵢ xᵢᵀ` over the points carried by `xi`.
pub fn information_matrix(problem: &DesignProblem, xi: &DesignMeasure) -> Result<InfoMatrix> {
    let m = problem.dim();
    let mut mat = vec![0.0; m * m];
    for (i, w) in xi.iter() {
        let x = problem.point(i);
        for r in 0..m {
            let wx = w * x[r];
            for c in 0..=r {
                mat[r * m + c] += wx * x[c];
            }
        }
    }
    for r in 0..m {
        for c in (r + 1)..m {
            mat[r * m + c] = mat[c * m + r];
        }
    }
    InfoMatrix::from_matrix(m, mat)
}

/// The variance function `d(ξ, x) = xᵀ M⁻¹(ξ) x`.
pub fn variance_function(point: &[f64], info: &InfoMatrix) -> Result<f64> {
    if point.len() != info.dim() {
        return Err(DesignError::DimensionMismatch { expected: info.dim(), got: point.len() });
    }
    Ok(info.variance(point))
}

/// `ε = max d(ξ, x) − m` over the active points, floored at zero.
pub fn excess(problem: &DesignProblem, info: &InfoMatrix) -> f64 {
    let max_d = problem
        .active_indices()
        .map(|i| info.variance(problem.point(i)))
        .fold(f64::NEG_INFINITY, f64::max);
    (max_d - problem.dim() as f64).max(0.0)
}

pub fn log_det(info: &InfoMatrix) -> f64 {
    info.log_det()
}

/// Smallest eigenvalue of `M^{-1/2} M* M^{-1/2}`, i.e. of the pencil `(M*, M)`.
pub fn smallest_relative_eigenvalue(m_current: &InfoMatrix, m_star: &InfoMatrix) -> Result<f64> {
    let n = m_current.dim();
    if m_star.dim() != n {
        return Err(DesignError::DimensionMismatch { expected: n, got: m_star.dim() });
    }
    // C = L⁻¹ M* L⁻ᵀ with M = L Lᵀ; C is similar to H.
    let chol = m_current.cholesky();
    let mut half = vec![0.0; n * n]; // rows of (L⁻¹ M*)ᵀ = M* L⁻ᵀ
    let mut col = vec![0.0; n];
    for j in 0..n {
        for (i, c) in col.iter_mut().enumerate() {
            *c = m_star.matrix()[i * n + j];
        }
        chol.forward_solve(&mut col);
        half[j * n..(j + 1) * n].copy_from_slice(&col);
    }
    let mut c = vec![0.0; n * n];
    for i in 0..n {
        // column i of (L⁻¹ M*)ᵀ is row i of L⁻¹ M*
        for k in 0..n {
            col[k] = half[k * n + i];
        }
        chol.forward_solve(&mut col);
        for k in 0..n {
            c[i * n + k] = col[k];
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (c[i * n + j] + c[j * n + i]);
            c[i * n + j] = v;
            c[j * n + i] = v;
        }
    }
    Ok(linalg::symmetric_eigenvalues(&c, n)[0])
}
