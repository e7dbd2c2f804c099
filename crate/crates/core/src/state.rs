//! Bipartite states, orthogonal projections and the tolerance policy.
//!
//! All positivity decisions go through one primitive: the full Hermitian
//! eigendecomposition. Tolerances are relative to the largest eigenvalue
//! floored at 1, because states are used unnormalized throughout.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mat::{self, CMatrix, HermEig, SeededRng};
use rand::SeedableRng;

/// Numerical tolerances shared by every decision in the crate.
///
/// `tol_psd` is the relative slack for positive-semidefiniteness tests,
/// `tol_zero` the threshold under which Frobenius norms count as vanishing,
/// and `tol_gap` the relative spectral gap below which two eigenvalues are
/// treated as a single multiple eigenvalue.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct ToleranceConfig {
    pub tol_psd: f64,
    pub tol_zero: f64,
    pub tol_gap: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            tol_psd: 1e-9,
            tol_zero: 1e-9,
            tol_gap: 1e-7,
        }
    }
}

impl ToleranceConfig {
    pub fn new(tol_psd: f64, tol_zero: f64, tol_gap: f64) -> Result<Self> {
        let cfg = Self {
            tol_psd,
            tol_zero,
            tol_gap,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol_psd > 0.0 && self.tol_zero > 0.0 && self.tol_gap > 0.0) {
            return Err(Error::Parameter(
                "tolerances must be strictly positive".into(),
            ));
        }
        if self.tol_gap <= self.tol_zero {
            return Err(Error::Parameter("tol_gap must exceed tol_zero".into()));
        }
        Ok(())
    }
}

/// PSD test: Hermitian within tolerance and minimum eigenvalue no smaller
/// than `-tol_psd * max(1, lambda_max)`.
pub fn is_psd(m: &CMatrix, cfg: &ToleranceConfig) -> Result<bool> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "PSD test requires a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if !mat::is_hermitian(m, cfg.tol_psd) {
        return Ok(false);
    }
    if m.nrows() == 0 {
        return Ok(true);
    }
    let eig = mat::herm_eig(m);
    Ok(psd_from_eigenvalues(&eig.eigenvalues, cfg))
}

pub(crate) fn psd_from_eigenvalues(eigenvalues: &[f64], cfg: &ToleranceConfig) -> bool {
    let max = eigenvalues.first().copied().unwrap_or(0.0);
    let min = eigenvalues.last().copied().unwrap_or(0.0);
    min >= -cfg.tol_psd * max.max(1.0)
}

/// An orthogonal projection matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    matrix: CMatrix,
}

impl Projection {
    /// Validates Hermiticity and idempotence before accepting the matrix.
    pub fn new(matrix: CMatrix, cfg: &ToleranceConfig) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Dimension("projection must be square".into()));
        }
        if !mat::is_hermitian(&matrix, cfg.tol_psd) {
            return Err(Error::Domain("projection must be Hermitian".into()));
        }
        let matrix = mat::hermitize(&matrix);
        let idem = (&matrix * &matrix) - &matrix;
        let scale = matrix.norm().max(1.0);
        if idem.norm() > 100.0 * cfg.tol_zero * scale {
            return Err(Error::Domain(format!(
                "projection not idempotent: |P^2 - P| = {:.3e}",
                idem.norm()
            )));
        }
        Ok(Self { matrix })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: CMatrix::identity(dim, dim),
        }
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            matrix: CMatrix::zeros(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Numerical rank, read off the trace.
    pub fn rank(&self) -> usize {
        self.matrix.trace().re.round().max(0.0) as usize
    }

    pub fn complement(&self) -> Self {
        Self {
            matrix: CMatrix::identity(self.dim(), self.dim()) - &self.matrix,
        }
    }

    /// Orthonormal basis of the range (eigenvectors with eigenvalue near 1).
    pub fn range_basis(&self) -> CMatrix {
        let eig = mat::herm_eig(&self.matrix);
        let cols: Vec<usize> = (0..self.dim())
            .filter(|&i| eig.eigenvalues[i] > 0.5)
            .collect();
        let mut basis = CMatrix::zeros(self.dim(), cols.len());
        for (dst, &src) in cols.iter().enumerate() {
            basis.set_column(dst, &eig.eigenvectors.column(src));
        }
        basis
    }

    /// `|P Q|` as an orthogonality measure between two projections.
    pub fn overlap(&self, other: &Projection) -> f64 {
        (&self.matrix * other.matrix()).norm()
    }
}

/// Projection onto the span of eigenvectors with eigenvalue above
/// `tol_psd * lambda_max`. The zero matrix maps to the zero projection.
pub fn support_projection(m: &CMatrix, cfg: &ToleranceConfig) -> Result<Projection> {
    if !is_psd(m, cfg)? {
        return Err(Error::Domain(
            "support projection requires a PSD matrix".into(),
        ));
    }
    let eig = mat::herm_eig(m);
    Ok(support_from_eig(&eig, cfg))
}

pub(crate) fn support_from_eig(eig: &HermEig, cfg: &ToleranceConfig) -> Projection {
    let max = eig.max_eigenvalue();
    let cut = cfg.tol_psd * max;
    Projection {
        matrix: eig.rebuild_with(|t| if t > cut && t > 0.0 { 1.0 } else { 0.0 }),
    }
}

/// A positive semidefinite matrix on `C^k (x) C^m` with declared factor
/// dimensions. The object gamma of the whole crate.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteState {
    k: usize,
    m: usize,
    matrix: CMatrix,
}

impl BipartiteState {
    /// Hermitizes the input, then checks `k*m` consistency and positivity.
    pub fn new(k: usize, m: usize, matrix: CMatrix, cfg: &ToleranceConfig) -> Result<Self> {
        if k == 0 || m == 0 {
            return Err(Error::Parameter("factor dimensions must be >= 1".into()));
        }
        if matrix.nrows() != k * m || matrix.ncols() != k * m {
            return Err(Error::Dimension(format!(
                "state on ({k},{m}) needs a {0}x{0} matrix, got {1}x{2}",
                k * m,
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if !matrix.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::Domain("state entries must be finite".into()));
        }
        if !mat::is_hermitian(&matrix, cfg.tol_psd) {
            return Err(Error::Domain("state must be Hermitian".into()));
        }
        let matrix = mat::hermitize(&matrix);
        let eig = mat::herm_eig(&matrix);
        if !psd_from_eigenvalues(&eig.eigenvalues, cfg) {
            return Err(Error::Domain(format!(
                "state not PSD: min eigenvalue {:.3e}",
                eig.min_eigenvalue()
            )));
        }
        Ok(Self { k, m, matrix })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.k * self.m
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn support(&self, cfg: &ToleranceConfig) -> Projection {
        let eig = mat::herm_eig(&self.matrix);
        support_from_eig(&eig, cfg)
    }

    pub fn rank(&self, cfg: &ToleranceConfig) -> usize {
        self.support(cfg).rank()
    }
}

/// Seeded random state of prescribed numerical rank: `G G*` for a
/// `km x rank` complex Gaussian factor, normalized to unit trace.
pub fn random_state(
    k: usize,
    m: usize,
    rank: usize,
    seed: u64,
    cfg: &ToleranceConfig,
) -> Result<BipartiteState> {
    let dim = k * m;
    if rank == 0 || rank > dim {
        return Err(Error::Parameter(format!(
            "rank must lie in 1..={dim}, got {rank}"
        )));
    }
    let mut rng = SeededRng::seed_from_u64(seed);
    let g = mat::complex_gaussian(dim, rank, &mut rng);
    let mut rho = &g * g.adjoint();
    let tr = rho.trace().re;
    rho /= mat::cr(tr);
    BipartiteState::new(k, m, rho, cfg)
}
