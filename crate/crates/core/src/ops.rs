//! Structural operations on bipartite and multipartite matrices: partial
//! transpose, realignment, flip, partial trace, the shuffle permutation and
//! the rank-two compression.
//!
//! Entry-level definitions are pinned by three identities, asserted in the
//! test suite: `R(u u*) = Id`, `R(Id) = u u*`, `R(F) = F`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mat::{self, CMatrix, CVector};
use crate::state::{BipartiteState, ToleranceConfig};

/// Ordered factor dimensions of a multipartite matrix. The first `split`
/// factors belong to the left party, the rest to the right party, matching
/// the factor order produced by [`shuffle`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SitesDescriptor {
    pub dims: Vec<usize>,
    pub split: usize,
}

impl SitesDescriptor {
    pub fn new(dims: Vec<usize>, split: usize) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::Parameter("factor dimensions must be >= 1".into()));
        }
        if split > dims.len() {
            return Err(Error::Parameter(format!(
                "split {} out of range for {} factors",
                split,
                dims.len()
            )));
        }
        Ok(Self { dims, split })
    }

    pub fn bipartite(k: usize, m: usize) -> Self {
        Self {
            dims: vec![k, m],
            split: 1,
        }
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn left_dim(&self) -> usize {
        self.dims[..self.split].iter().product()
    }

    pub fn right_dim(&self) -> usize {
        self.dims[self.split..].iter().product()
    }

    /// Decode a flat row-major index into per-site digits.
    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        for (slot, &d) in out.iter_mut().zip(&self.dims).rev() {
            *slot = index % d;
            index /= d;
        }
        out
    }

    /// Inverse of [`SitesDescriptor::digits`].
    pub fn flatten(&self, digits: &[usize]) -> usize {
        digits
            .iter()
            .zip(&self.dims)
            .fold(0, |acc, (&g, &d)| acc * d + g)
    }
}

/// Partial transpose on the second factor:
/// `out[(i,p),(j,q)] = in[(i,q),(j,p)]`. An exact involution.
pub fn partial_transpose(state: &BipartiteState) -> CMatrix {
    partial_transpose_raw(state.matrix(), state.k(), state.m())
}

pub fn partial_transpose_raw(m: &CMatrix, k: usize, mdim: usize) -> CMatrix {
    let dim = k * mdim;
    assert_eq!(m.nrows(), dim);
    assert_eq!(m.ncols(), dim);
    CMatrix::from_fn(dim, dim, |row, col| {
        let (i, p) = (row / mdim, row % mdim);
        let (j, q) = (col / mdim, col % mdim);
        m[(i * mdim + q, j * mdim + p)]
    })
}

/// Realignment map on square splits: `out[(i,p),(j,q)] = in[(i,j),(p,q)]`.
/// Only defined for `k = m`.
pub fn realignment(state: &BipartiteState) -> Result<CMatrix> {
    if state.k() != state.m() {
        return Err(Error::UnsupportedShape(format!(
            "realignment requires k = m, got ({}, {})",
            state.k(),
            state.m()
        )));
    }
    Ok(realignment_raw(state.matrix(), state.k()))
}

pub fn realignment_raw(m: &CMatrix, k: usize) -> CMatrix {
    let dim = k * k;
    assert_eq!(m.nrows(), dim);
    assert_eq!(m.ncols(), dim);
    CMatrix::from_fn(dim, dim, |row, col| {
        let (i, p) = (row / k, row % k);
        let (j, q) = (col / k, col % k);
        m[(i * k + j, p * k + q)]
    })
}

/// Flip (swap) operator `F = sum_{p,q} e_p e_q^t (x) e_q e_p^t` on
/// `C^k (x) C^k`.
pub fn flip_operator(k: usize) -> CMatrix {
    let dim = k * k;
    CMatrix::from_fn(dim, dim, |row, col| {
        let (a, b) = (row / k, row % k);
        let (c, d) = (col / k, col % k);
        if a == d && b == c {
            mat::cr(1.0)
        } else {
            mat::cr(0.0)
        }
    })
}

/// Unnormalized maximally entangled vector `u_k = sum_i e_i (x) e_i`.
pub fn max_ent_vector(k: usize) -> CVector {
    let mut u = CVector::zeros(k * k);
    for i in 0..k {
        u[i * k + i] = mat::cr(1.0);
    }
    u
}

/// `u_k u_k*` as a matrix.
pub fn max_ent_projector(k: usize) -> CMatrix {
    let u = max_ent_vector(k);
    &u * u.adjoint()
}

/// Trace out the site `site_index`, returning the contracted matrix and the
/// descriptor of the remaining sites.
pub fn partial_trace(
    m: &CMatrix,
    sites: &SitesDescriptor,
    site_index: usize,
) -> Result<(CMatrix, SitesDescriptor)> {
    let s = sites.dims.len();
    if site_index >= s {
        return Err(Error::Parameter(format!(
            "site index {site_index} out of range for {s} sites"
        )));
    }
    if m.nrows() != sites.total_dim() || m.ncols() != sites.total_dim() {
        return Err(Error::Dimension(format!(
            "matrix is {}x{}, sites describe dimension {}",
            m.nrows(),
            m.ncols(),
            sites.total_dim()
        )));
    }
    let traced = sites.dims[site_index];
    let mut rest_dims = sites.dims.clone();
    rest_dims.remove(site_index);
    let new_split = if site_index < sites.split {
        sites.split - 1
    } else {
        sites.split
    };
    if rest_dims.is_empty() {
        // Tracing the only site leaves a 1x1 matrix holding the full trace.
        let out = SitesDescriptor::new(vec![1], new_split.min(1))?;
        return Ok((CMatrix::from_element(1, 1, m.trace()), out));
    }
    let rest = SitesDescriptor::new(rest_dims, new_split)?;
    let out_dim = rest.total_dim();
    let mut out = CMatrix::zeros(out_dim, out_dim);
    for row in 0..out_dim {
        let mut rdig = rest.digits(row);
        rdig.insert(site_index, 0);
        for col in 0..out_dim {
            let mut cdig = rest.digits(col);
            cdig.insert(site_index, 0);
            let mut acc = mat::cr(0.0);
            for a in 0..traced {
                rdig[site_index] = a;
                cdig[site_index] = a;
                acc += m[(sites.flatten(&rdig), sites.flatten(&cdig))];
            }
            out[(row, col)] = acc;
        }
    }
    Ok((out, rest))
}

/// Shuffle of bipartite states: the tensor product with all left factors
/// grouped before all right factors. Equivalent to conjugating
/// `gamma_1 (x) ... (x) gamma_s` by the factor-reordering permutation, but
/// computed as a direct index permutation.
pub fn shuffle(
    states: &[BipartiteState],
    cfg: &ToleranceConfig,
) -> Result<(BipartiteState, SitesDescriptor)> {
    if states.is_empty() {
        return Err(Error::Parameter("shuffle needs at least one state".into()));
    }
    let s = states.len();
    let k_total: usize = states.iter().map(|g| g.k()).product();
    let m_total: usize = states.iter().map(|g| g.m()).product();
    let mut dims: Vec<usize> = states.iter().map(|g| g.k()).collect();
    dims.extend(states.iter().map(|g| g.m()));
    let sites = SitesDescriptor::new(dims, s)?;
    let matrix = shuffle_matrix(states.iter().map(|g| (g.matrix(), g.k(), g.m())), &sites);
    let state = BipartiteState::new(k_total, m_total, matrix, cfg)?;
    Ok((state, sites))
}

/// Same permutation applied to raw matrices; used for shuffles of partial
/// transposes, which need not be PSD.
pub fn shuffle_raw(factors: &[(CMatrix, usize, usize)]) -> Result<(CMatrix, SitesDescriptor)> {
    if factors.is_empty() {
        return Err(Error::Parameter("shuffle needs at least one factor".into()));
    }
    let s = factors.len();
    let mut dims: Vec<usize> = factors.iter().map(|&(_, k, _)| k).collect();
    dims.extend(factors.iter().map(|&(_, _, m)| m));
    let sites = SitesDescriptor::new(dims, s)?;
    for (m, k, md) in factors {
        if m.nrows() != k * md || m.ncols() != k * md {
            return Err(Error::Dimension("shuffle factor has wrong shape".into()));
        }
    }
    Ok((
        shuffle_matrix(factors.iter().map(|(m, k, md)| (m, *k, *md)), &sites),
        sites,
    ))
}

fn shuffle_matrix<'a>(
    factors: impl Iterator<Item = (&'a CMatrix, usize, usize)>,
    sites: &SitesDescriptor,
) -> CMatrix {
    let factors: Vec<(&CMatrix, usize, usize)> = factors.collect();
    let s = factors.len();
    let dim = sites.total_dim();
    CMatrix::from_fn(dim, dim, |row, col| {
        let rdig = sites.digits(row);
        let cdig = sites.digits(col);
        let mut acc = mat::cr(1.0);
        for (t, &(m, _, md)) in factors.iter().enumerate() {
            let (i, p) = (rdig[t], rdig[s + t]);
            let (j, q) = (cdig[t], cdig[s + t]);
            acc *= m[(i * md + p, j * md + q)];
        }
        acc
    })
}

/// Rank of the column span of `a` at a relative singular-value cutoff.
pub fn column_rank(a: &CMatrix, tol: f64) -> usize {
    let sv = a.clone().singular_values();
    let top = sv.max();
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol * top).count()
}

/// Compression of a state on `(K, K)` by a `K x 2` matrix:
/// `(A* (x) A^t) Sigma (A (x) conj(A))`, hermitized, as a state on `(2, 2)`.
///
/// Callers should check `column_rank(a, ..) == 2`; a rank-deficient `a`
/// still produces a valid state but collapses the span.
pub fn compress(
    sigma: &BipartiteState,
    a: &CMatrix,
    cfg: &ToleranceConfig,
) -> Result<BipartiteState> {
    let kdim = sigma.k();
    if sigma.m() != kdim {
        return Err(Error::UnsupportedShape(
            "compress requires a square split".into(),
        ));
    }
    if a.nrows() != kdim || a.ncols() != 2 {
        return Err(Error::Dimension(format!(
            "compression matrix must be {kdim}x2, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let left = a.adjoint().kronecker(&a.transpose());
    let right = a.kronecker(&a.conjugate());
    let out = mat::hermitize(&(left * sigma.matrix() * right));
    BipartiteState::new(2, 2, out, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mat::{basis_vector, complex_gaussian, cr, random_hermitian, SeededRng};
    use crate::state::random_state;
    use rand::SeedableRng;

    fn cfg() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn kron_state(a: &CMatrix, b: &CMatrix, cfg: &ToleranceConfig) -> BipartiteState {
        BipartiteState::new(a.nrows(), b.nrows(), a.kronecker(b), cfg).unwrap()
    }

    #[test]
    fn partial_transpose_on_products() {
        let mut rng = SeededRng::seed_from_u64(1);
        let a = random_hermitian(2, &mut rng);
        let b = random_hermitian(3, &mut rng);
        let a2 = &a * &a;
        let b2 = &b * &b;
        let st = kron_state(&a2, &b2, &cfg());
        let pt = partial_transpose(&st);
        assert!((pt - a2.kronecker(&b2.transpose())).norm() < 1e-13);
    }

    #[test]
    fn partial_transpose_is_involution() {
        let st = random_state(2, 3, 5, 9, &cfg()).unwrap();
        let once = partial_transpose_raw(st.matrix(), 2, 3);
        let twice = partial_transpose_raw(&once, 2, 3);
        assert_eq!(&twice, st.matrix());
    }

    #[test]
    fn transpose_swaps_maxent_and_flip() {
        for k in 2..=4 {
            let uu = max_ent_projector(k);
            let f = flip_operator(k);
            assert!((partial_transpose_raw(&uu, k, k) - &f).norm() < 1e-14);
            assert!((partial_transpose_raw(&f, k, k) - &uu).norm() < 1e-14);
        }
    }

    #[test]
    fn realignment_identities() {
        for k in 2..=4 {
            let dim = k * k;
            let uu = max_ent_projector(k);
            let f = flip_operator(k);
            let id = CMatrix::identity(dim, dim);
            assert!((realignment_raw(&uu, k) - &id).norm() < 1e-14);
            assert!((realignment_raw(&id, k) - &uu).norm() < 1e-14);
            assert!((realignment_raw(&f, k) - &f).norm() < 1e-14);
        }
    }

    #[test]
    fn realignment_rejects_rectangular() {
        let st = random_state(2, 3, 2, 3, &cfg()).unwrap();
        assert!(matches!(
            realignment(&st),
            Err(Error::UnsupportedShape(_))
        ));
    }

    #[test]
    fn realignment_cross_check_with_flip() {
        // R(gamma^G)^G = gamma . F, the computable anchor for R.
        for seed in 0..10u64 {
            let k = 2 + (seed as usize % 3);
            let st = random_state(k, k, k * k, seed, &cfg()).unwrap();
            let lhs = partial_transpose_raw(
                &realignment_raw(&partial_transpose_raw(st.matrix(), k, k), k),
                k,
                k,
            );
            let rhs = st.matrix() * flip_operator(k);
            assert!((lhs - rhs).norm() <= 1e-12 * st.matrix().norm());
        }
    }

    #[test]
    fn flip_fixes_maxent_vector() {
        for k in 1..=5 {
            let f = flip_operator(k);
            let u = max_ent_vector(k);
            assert!((&f * &u - &u).norm() < 1e-14);
            let dim = k * k;
            assert!((&f * &f - CMatrix::identity(dim, dim)).norm() < 1e-14);
        }
        assert_eq!(flip_operator(1), CMatrix::identity(1, 1));
        assert_eq!(max_ent_vector(1), CVector::from_element(1, cr(1.0)));
    }

    #[test]
    fn flip_k2_is_swap_permutation() {
        let f = flip_operator(2);
        let mut swap = CMatrix::zeros(4, 4);
        swap[(0, 0)] = cr(1.0);
        swap[(1, 2)] = cr(1.0);
        swap[(2, 1)] = cr(1.0);
        swap[(3, 3)] = cr(1.0);
        assert_eq!(f, swap);
    }

    #[test]
    fn partial_trace_on_products() {
        let mut rng = SeededRng::seed_from_u64(5);
        let a = random_hermitian(2, &mut rng);
        let b = random_hermitian(3, &mut rng);
        let sites = SitesDescriptor::bipartite(2, 3);
        let kron = a.kronecker(&b);
        let (tr2, rest) = partial_trace(&kron, &sites, 1).unwrap();
        assert_eq!(rest.dims, vec![2]);
        assert!((tr2 - a.scale(b.trace().re)).norm() < 1e-13);
        let (tr1, rest1) = partial_trace(&kron, &sites, 0).unwrap();
        assert_eq!(rest1.dims, vec![3]);
        assert!((tr1 - b.scale(a.trace().re)).norm() < 1e-13);
    }

    #[test]
    fn partial_trace_of_identity() {
        let sites = SitesDescriptor::bipartite(3, 4);
        let id = CMatrix::identity(12, 12);
        let (out, _) = partial_trace(&id, &sites, 0).unwrap();
        assert!((out - CMatrix::identity(4, 4).scale(3.0)).norm() < 1e-14);
    }

    #[test]
    fn partial_trace_preserves_trace_and_psd() {
        let st = random_state(2, 3, 4, 11, &cfg()).unwrap();
        let sites = SitesDescriptor::bipartite(2, 3);
        for site in 0..2 {
            let (out, _) = partial_trace(st.matrix(), &sites, site).unwrap();
            assert!((out.trace().re - st.trace()).abs() <= 1e-12 * st.trace().abs());
            assert!(crate::state::is_psd(&out, &cfg()).unwrap());
        }
    }

    #[test]
    fn partial_trace_invalid_site() {
        let sites = SitesDescriptor::bipartite(2, 2);
        let id = CMatrix::identity(4, 4);
        assert!(matches!(
            partial_trace(&id, &sites, 2),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn shuffle_single_state_is_identity() {
        let st = random_state(2, 3, 3, 17, &cfg()).unwrap();
        let (out, sites) = shuffle(std::slice::from_ref(&st), &cfg()).unwrap();
        assert_eq!(out.matrix(), st.matrix());
        assert_eq!(sites.dims, vec![2, 3]);
        assert_eq!(sites.split, 1);
    }

    #[test]
    fn shuffle_of_products_groups_factors() {
        let mut rng = SeededRng::seed_from_u64(23);
        let mk_psd = |n: usize, rng: &mut SeededRng| {
            let g = complex_gaussian(n, n, rng);
            &g * g.adjoint()
        };
        let (a1, b1) = (mk_psd(2, &mut rng), mk_psd(2, &mut rng));
        let (a2, b2) = (mk_psd(2, &mut rng), mk_psd(2, &mut rng));
        let g1 = kron_state(&a1, &b1, &cfg());
        let g2 = kron_state(&a2, &b2, &cfg());
        let (out, _) = shuffle(&[g1, g2], &cfg()).unwrap();
        let expected = a1.kronecker(&a2).kronecker(&b1).kronecker(&b2);
        assert!((out.matrix() - &expected).norm() <= 1e-12 * expected.norm());
    }

    #[test]
    fn shuffle_multiplicativity() {
        // S(g1, g2) S(d1, d2) = S(g1 d1, g2 d2) on raw factors.
        let mut rng = SeededRng::seed_from_u64(31);
        let g1 = random_hermitian(4, &mut rng);
        let g2 = random_hermitian(4, &mut rng);
        let d1 = random_hermitian(4, &mut rng);
        let d2 = random_hermitian(4, &mut rng);
        let (sg, _) = shuffle_raw(&[(g1.clone(), 2, 2), (g2.clone(), 2, 2)]).unwrap();
        let (sd, _) = shuffle_raw(&[(d1.clone(), 2, 2), (d2.clone(), 2, 2)]).unwrap();
        let (sgd, _) = shuffle_raw(&[(&g1 * &d1, 2, 2), (&g2 * &d2, 2, 2)]).unwrap();
        assert!((sg * sd - sgd).norm() < 1e-11);
    }

    #[test]
    fn shuffle_psd_iff_product_psd() {
        // PSD factors give a PSD shuffle; flipping the signs of two factors
        // keeps the product PSD and the shuffle constructor must accept it.
        let s1 = random_state(2, 2, 2, 41, &cfg()).unwrap();
        let s2 = random_state(2, 2, 3, 42, &cfg()).unwrap();
        let (neg, _) = shuffle_raw(&[
            (-s1.matrix().clone(), 2, 2),
            (-s2.matrix().clone(), 2, 2),
        ])
        .unwrap();
        assert!(crate::state::is_psd(&neg, &cfg()).unwrap());
        let (single, _) = shuffle_raw(&[
            (-s1.matrix().clone(), 2, 2),
            (s2.matrix().clone(), 2, 2),
        ])
        .unwrap();
        assert!(!crate::state::is_psd(&single, &cfg()).unwrap());
    }

    #[test]
    fn partial_trace_of_shuffle_recovers_factor() {
        let g1 = random_state(2, 2, 2, 51, &cfg()).unwrap();
        let g2 = random_state(2, 2, 4, 52, &cfg()).unwrap();
        let (sh, sites) = shuffle(&[g1.clone(), g2.clone()], &cfg()).unwrap();
        // Trace out the second state's sites (k2 at index 1, then m2, which
        // after the first removal sits at index 2).
        let (step, sites2) = partial_trace(sh.matrix(), &sites, 1).unwrap();
        let (out, sites3) = partial_trace(&step, &sites2, 2).unwrap();
        assert_eq!(sites3.dims, vec![2, 2]);
        assert_eq!(sites3.split, 1);
        let scale = g2.trace();
        assert!((out - g1.matrix().scale(scale)).norm() <= 1e-12 * scale);
    }

    #[test]
    fn compress_identity_case() {
        let sigma =
            BipartiteState::new(3, 3, CMatrix::identity(9, 9), &cfg()).unwrap();
        let mut a = CMatrix::zeros(3, 2);
        a.set_column(0, &basis_vector(3, 0));
        a.set_column(1, &basis_vector(3, 1));
        let out = compress(&sigma, &a, &cfg()).unwrap();
        assert!((out.matrix() - CMatrix::identity(4, 4)).norm() < 1e-13);
    }

    #[test]
    fn compress_maxent_projects_down() {
        let sigma = BipartiteState::new(3, 3, max_ent_projector(3), &cfg()).unwrap();
        let mut a = CMatrix::zeros(3, 2);
        a.set_column(0, &basis_vector(3, 0));
        a.set_column(1, &basis_vector(3, 1));
        let out = compress(&sigma, &a, &cfg()).unwrap();
        assert!((out.matrix() - max_ent_projector(2)).norm() < 1e-13);
        assert_eq!(column_rank(&a, 1e-12), 2);
    }
}
