//! Dense complex matrices and the Hermitian eigendecomposition every other
//! module is built on.
//!
//! Matrices are `nalgebra` dynamic matrices over `Complex<f64>`. The composite
//! index convention is fixed once here: a bipartite index pair `(i, p)` with
//! factor dimensions `(k, m)` maps to the flat index `i * m + p`, so that
//! `(A ⊗ B)[(i,p),(j,q)] = A[i,j] * B[p,q]` agrees with the Kronecker product.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Deterministic RNG used throughout; seeded explicitly, never global.
pub type SeededRng = ChaCha12Rng;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn cr(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// `(M + M*) / 2`. Near-Hermitian inputs are symmetrized before any
/// eigensolve so round-off asymmetry cannot leak into spectra.
pub fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).map(|z| z * 0.5)
}

pub fn is_hermitian(m: &CMatrix, tol: f64) -> bool {
    if !m.is_square() {
        return false;
    }
    let scale = m.norm().max(1.0);
    (m - m.adjoint()).norm() <= tol * scale
}

/// Trace inner product `tr(A* B)`.
pub fn frob_inner(a: &CMatrix, b: &CMatrix) -> C64 {
    a.dotc(b)
}

pub fn frob_norm(m: &CMatrix) -> f64 {
    m.norm()
}

/// Largest singular value, used as the operator norm of small dense blocks.
pub fn op_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().max()
}

/// Eigendecomposition of a Hermitian matrix with eigenvalues sorted in
/// descending order and eigenvector columns permuted to match.
#[derive(Debug, Clone)]
pub struct HermEig {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
}

impl HermEig {
    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    /// Rebuild `sum_i f(lambda_i) v_i v_i*`.
    pub fn rebuild_with(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.eigenvectors.nrows();
        let mut out = CMatrix::zeros(n, n);
        for (idx, &lam) in self.eigenvalues.iter().enumerate() {
            let w = f(lam);
            if w == 0.0 {
                continue;
            }
            let v = self.eigenvectors.column(idx);
            out += (v * v.adjoint()).map(|z| z * w);
        }
        out
    }
}

/// Hermitian eigendecomposition; the input is hermitized first.
pub fn herm_eig(m: &CMatrix) -> HermEig {
    assert!(m.is_square(), "herm_eig requires a square matrix");
    let n = m.nrows();
    if n == 0 {
        return HermEig {
            eigenvalues: Vec::new(),
            eigenvectors: CMatrix::zeros(0, 0),
        };
    }
    let se = hermitize(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        se.eigenvalues[b]
            .partial_cmp(&se.eigenvalues[a])
            .expect("non-finite eigenvalue")
    });
    let eigenvalues: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut eigenvectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.set_column(dst, &se.eigenvectors.column(src));
    }
    HermEig {
        eigenvalues,
        eigenvectors,
    }
}

/// Real symmetric eigendecomposition, descending eigenvalues.
pub fn sym_eig(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    assert!(m.is_square());
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), DMatrix::zeros(0, 0));
    }
    let sym = (m + m.transpose()).scale(0.5);
    let se = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        se.eigenvalues[b]
            .partial_cmp(&se.eigenvalues[a])
            .expect("non-finite eigenvalue")
    });
    let vals: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut vecs = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vecs.set_column(dst, &se.eigenvectors.column(src));
    }
    (vals, vecs)
}

/// Standard complex Gaussian matrix: entries `(x + iy)/sqrt(2)` with
/// `x, y ~ N(0, 1)`.
pub fn complex_gaussian(rows: usize, cols: usize, rng: &mut impl Rng) -> CMatrix {
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        c(re * inv_sqrt2, im * inv_sqrt2)
    })
}

/// Haar-ish random unitary via QR of a complex Gaussian matrix.
pub fn random_unitary(n: usize, rng: &mut impl Rng) -> CMatrix {
    let g = complex_gaussian(n, n, rng);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    // Fix the column phases so the distribution does not depend on the QR
    // sign convention.
    for j in 0..n {
        let d = r[(j, j)];
        if d.norm() > 0.0 {
            let phase = d / d.norm();
            let col = q.column(j) * (phase.conj());
            q.set_column(j, &col);
        }
    }
    q
}

/// Random Hermitian matrix with entries of unit scale.
pub fn random_hermitian(n: usize, rng: &mut impl Rng) -> CMatrix {
    hermitize(&complex_gaussian(n, n, rng))
}

/// Canonical basis column `e_i` of `C^n`.
pub fn basis_vector(n: usize, i: usize) -> CVector {
    let mut v = CVector::zeros(n);
    v[i] = cr(1.0);
    v
}

/// Orthonormalize the columns of `a` (modified Gram-Schmidt). Returns the
/// number of independent columns kept; dependent columns are left as zero.
pub fn orthonormalize_columns(a: &mut CMatrix, tol: f64) -> usize {
    let cols = a.ncols();
    let mut rank = 0;
    for j in 0..cols {
        let mut col = a.column(j).clone_owned();
        for i in 0..j {
            let prev = a.column(i).clone_owned();
            let coeff = prev.dotc(&col);
            col -= prev * coeff;
        }
        let norm = col.norm();
        if norm > tol {
            col /= cr(norm);
            rank += 1;
            a.set_column(j, &col);
        } else {
            a.set_column(j, &CVector::zeros(a.nrows()));
        }
    }
    rank
}
