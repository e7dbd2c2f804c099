//! The positive maps attached to a state and their matrix representations.
//!
//! `g_apply` and `f_apply` evaluate the maps by contraction against the
//! state, so no product decomposition is ever needed. Representations are
//! taken over a fixed orthonormal Hermitian basis (scaled identity first,
//! then symmetric pairs, antisymmetric pairs, diagonal traceless), which
//! turns the self-adjoint composition into a real symmetric matrix.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;

use crate::error::{Error, Result};
use crate::mat::{self, CMatrix, SeededRng};
use crate::state::BipartiteState;

/// Orthonormal Hermitian basis of the k x k matrices under `tr(AB)`.
///
/// Ordering is frozen: `Id/sqrt(k)`, then `(E_ij + E_ji)/sqrt(2)` for
/// `i < j` in lexicographic order, then `(-i E_ij + i E_ji)/sqrt(2)` for
/// `i < j`, then the diagonal traceless ladder
/// `(E_11 + .. + E_ll - l E_(l+1)(l+1)) / sqrt(l(l+1))`.
pub fn herm_basis(k: usize) -> Vec<CMatrix> {
    let mut basis = Vec::with_capacity(k * k);
    basis.push(CMatrix::identity(k, k).map(|z| z / (k as f64).sqrt()));
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..k {
        for j in (i + 1)..k {
            let mut s = CMatrix::zeros(k, k);
            s[(i, j)] = mat::cr(inv_sqrt2);
            s[(j, i)] = mat::cr(inv_sqrt2);
            basis.push(s);
        }
    }
    for i in 0..k {
        for j in (i + 1)..k {
            let mut a = CMatrix::zeros(k, k);
            a[(i, j)] = mat::c(0.0, -inv_sqrt2);
            a[(j, i)] = mat::c(0.0, inv_sqrt2);
            basis.push(a);
        }
    }
    for l in 1..k {
        let norm = 1.0 / ((l * (l + 1)) as f64).sqrt();
        let mut d = CMatrix::zeros(k, k);
        for i in 0..l {
            d[(i, i)] = mat::cr(norm);
        }
        d[(l, l)] = mat::cr(-(l as f64) * norm);
        basis.push(d);
    }
    basis
}

/// Real coordinates of a Hermitian matrix in [`herm_basis`] order.
pub fn herm_coords(basis: &[CMatrix], x: &CMatrix) -> DVector<f64> {
    DVector::from_fn(basis.len(), |a, _| mat::frob_inner(&basis[a], x).re)
}

pub fn herm_from_coords(basis: &[CMatrix], v: &DVector<f64>) -> CMatrix {
    let k = basis[0].nrows();
    let mut out = CMatrix::zeros(k, k);
    for (b, &w) in basis.iter().zip(v.iter()) {
        out += b.map(|z| z * w);
    }
    out
}

/// `G_gamma(X) = Tr_1(gamma (X (x) Id))`, an m x m matrix for X k x k.
/// On product states this reduces to `tr(A X) B`.
pub fn g_apply(gamma: &BipartiteState, x: &CMatrix) -> Result<CMatrix> {
    let (k, m) = (gamma.k(), gamma.m());
    if x.nrows() != k || x.ncols() != k {
        return Err(Error::Dimension(format!(
            "G expects a {k}x{k} argument, got {}x{}",
            x.nrows(),
            x.ncols()
        )));
    }
    let g = gamma.matrix();
    let mut out = CMatrix::zeros(m, m);
    for p in 0..m {
        for q in 0..m {
            let mut acc = mat::cr(0.0);
            for i in 0..k {
                for j in 0..k {
                    acc += x[(j, i)] * g[(i * m + p, j * m + q)];
                }
            }
            out[(p, q)] = acc;
        }
    }
    Ok(out)
}

/// `F_gamma(Y) = Tr_2(gamma (Id (x) Y))`, the trace adjoint of `G_gamma`.
pub fn f_apply(gamma: &BipartiteState, y: &CMatrix) -> Result<CMatrix> {
    let (k, m) = (gamma.k(), gamma.m());
    if y.nrows() != m || y.ncols() != m {
        return Err(Error::Dimension(format!(
            "F expects a {m}x{m} argument, got {}x{}",
            y.nrows(),
            y.ncols()
        )));
    }
    let g = gamma.matrix();
    let mut out = CMatrix::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            let mut acc = mat::cr(0.0);
            for p in 0..m {
                for q in 0..m {
                    acc += g[(i * m + p, j * m + q)] * y[(q, p)];
                }
            }
            out[(i, j)] = acc;
        }
    }
    Ok(out)
}

/// `T = F_gamma . G_gamma` applied to an arbitrary k x k matrix.
pub fn fg_apply(gamma: &BipartiteState, x: &CMatrix) -> Result<CMatrix> {
    f_apply(gamma, &g_apply(gamma, x)?)
}

/// A linear map between matrix spaces stored as a real matrix over the
/// fixed Hermitian bases of its input and output space.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperOperator {
    pub in_dim: usize,
    pub out_dim: usize,
    /// `rep[(b, a)] = tr(H_b T(H_a))`, size `out_dim^2 x in_dim^2`.
    pub rep: DMatrix<f64>,
}

impl SuperOperator {
    /// Build the representation of an arbitrary Hermiticity-preserving map.
    pub fn from_map(
        in_dim: usize,
        out_dim: usize,
        mut map: impl FnMut(&CMatrix) -> CMatrix,
    ) -> Self {
        let in_basis = herm_basis(in_dim);
        let out_basis = herm_basis(out_dim);
        let mut rep = DMatrix::zeros(out_dim * out_dim, in_dim * in_dim);
        for (a, h) in in_basis.iter().enumerate() {
            let image = map(h);
            for (b, hb) in out_basis.iter().enumerate() {
                rep[(b, a)] = mat::frob_inner(hb, &image).re;
            }
        }
        Self {
            in_dim,
            out_dim,
            rep,
        }
    }

    pub fn identity(k: usize) -> Self {
        Self {
            in_dim: k,
            out_dim: k,
            rep: DMatrix::identity(k * k, k * k),
        }
    }

    /// Apply to an arbitrary complex matrix through the Hermitian split
    /// `X = H1 + i H2`.
    pub fn apply(&self, x: &CMatrix) -> Result<CMatrix> {
        if x.nrows() != self.in_dim || x.ncols() != self.in_dim {
            return Err(Error::Dimension(format!(
                "superoperator expects {0}x{0} input",
                self.in_dim
            )));
        }
        let h1 = mat::hermitize(x);
        let h2 = (x - x.adjoint()).map(|z| z * mat::c(0.0, -0.5));
        let out1 = self.apply_herm(&h1);
        let out2 = self.apply_herm(&h2);
        Ok(out1 + out2.map(|z| z * mat::c(0.0, 1.0)))
    }

    /// Fast path for Hermitian inputs (real coordinates).
    pub fn apply_herm(&self, x: &CMatrix) -> CMatrix {
        let in_basis = herm_basis(self.in_dim);
        let out_basis = herm_basis(self.out_dim);
        let coords = herm_coords(&in_basis, x);
        let out = &self.rep * coords;
        herm_from_coords(&out_basis, &out)
    }

    /// Deviation from symmetry of the representation, `max |rep - rep^T|`.
    pub fn symmetry_defect(&self) -> f64 {
        if self.rep.nrows() != self.rep.ncols() {
            return f64::INFINITY;
        }
        (&self.rep - self.rep.transpose()).abs().max()
    }
}

/// Representation of `G_gamma` (maps k x k to m x m).
pub fn g_superop(gamma: &BipartiteState) -> SuperOperator {
    SuperOperator::from_map(gamma.k(), gamma.m(), |x| {
        g_apply(gamma, x).expect("basis element has the declared dimension")
    })
}

/// Representation of `F_gamma` (maps m x m to k x k).
pub fn f_superop(gamma: &BipartiteState) -> SuperOperator {
    SuperOperator::from_map(gamma.m(), gamma.k(), |y| {
        f_apply(gamma, y).expect("basis element has the declared dimension")
    })
}

/// Representation of the self-adjoint composition `T = F_gamma . G_gamma`.
pub fn fg_superop(gamma: &BipartiteState) -> SuperOperator {
    SuperOperator::from_map(gamma.k(), gamma.k(), |x| {
        fg_apply(gamma, x).expect("basis element has the declared dimension")
    })
}

/// Max deviation of the adjoint pairing
/// `|tr(G(X) Y*) - tr(X F(Y)*)|` over seeded random Hermitian pairs.
pub fn verify_adjoint(gamma: &BipartiteState, trials: usize, seed: u64) -> Result<f64> {
    let mut rng = SeededRng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let x = mat::random_hermitian(gamma.k(), &mut rng);
        let y = mat::random_hermitian(gamma.m(), &mut rng);
        let lhs = mat::frob_inner(&y, &g_apply(gamma, &x)?);
        let rhs = mat::frob_inner(&f_apply(gamma, &y)?, &x);
        worst = worst.max((lhs - rhs).norm());
    }
    Ok(worst)
}

/// Choi matrix `(Id (x) T)(u_k u_k*)`; PSD exactly when T is completely
/// positive.
pub fn choi(t: &SuperOperator) -> Result<CMatrix> {
    if t.in_dim != t.out_dim {
        return Err(Error::UnsupportedShape(
            "Choi matrix defined for maps of a space into itself".into(),
        ));
    }
    let k = t.in_dim;
    let mut out = CMatrix::zeros(k * k, k * k);
    for i in 0..k {
        for j in 0..k {
            let mut unit = CMatrix::zeros(k, k);
            unit[(i, j)] = mat::cr(1.0);
            let image = t.apply(&unit)?;
            for p in 0..k {
                for q in 0..k {
                    out[(i * k + p, j * k + q)] = image[(p, q)];
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mat::{complex_gaussian, cr, random_hermitian};
    use crate::ops::{flip_operator, max_ent_projector};
    use crate::state::{is_psd, random_state, BipartiteState, ToleranceConfig};

    fn cfg() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn maxent_state(k: usize) -> BipartiteState {
        BipartiteState::new(k, k, max_ent_projector(k), &cfg()).unwrap()
    }

    #[test]
    fn basis_is_orthonormal() {
        for k in 1..=4 {
            let basis = herm_basis(k);
            assert_eq!(basis.len(), k * k);
            for (a, ha) in basis.iter().enumerate() {
                assert!((ha - ha.adjoint()).norm() < 1e-15);
                for (b, hb) in basis.iter().enumerate() {
                    let ip = mat::frob_inner(ha, hb);
                    let expected = if a == b { 1.0 } else { 0.0 };
                    assert!((ip.re - expected).abs() < 1e-14 && ip.im.abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn g_of_maxent_is_transpose() {
        let gamma = maxent_state(3);
        let mut rng = SeededRng::seed_from_u64(2);
        let x = random_hermitian(3, &mut rng);
        assert!((g_apply(&gamma, &x).unwrap() - x.transpose()).norm() < 1e-13);
        assert!((f_apply(&gamma, &x).unwrap() - x.transpose()).norm() < 1e-13);
    }

    #[test]
    fn g_on_product_states() {
        let mut rng = SeededRng::seed_from_u64(3);
        let ga = complex_gaussian(2, 2, &mut rng);
        let gb = complex_gaussian(3, 3, &mut rng);
        let a = &ga * ga.adjoint();
        let b = &gb * gb.adjoint();
        let gamma = BipartiteState::new(2, 3, a.kronecker(&b), &cfg()).unwrap();
        let x = random_hermitian(2, &mut rng);
        let y = random_hermitian(3, &mut rng);
        let gx = g_apply(&gamma, &x).unwrap();
        let fy = f_apply(&gamma, &y).unwrap();
        assert!((gx - b.map(|z| z * mat::frob_inner(&a.adjoint(), &x))).norm() < 1e-12);
        assert!((fy - a.map(|z| z * mat::frob_inner(&b.adjoint(), &y))).norm() < 1e-12);
    }

    #[test]
    fn pure_state_maps_follow_the_factor() {
        // gamma = (R (x) Id) u u* (R* (x) Id) has G(X^t) = R^t X conj(R) and
        // F(X^t) = R X R*.
        let (k, m) = (3, 2);
        let mut rng = SeededRng::seed_from_u64(4);
        let r = complex_gaussian(k, m, &mut rng);
        let left = r.kronecker(&CMatrix::identity(m, m));
        let gamma = BipartiteState::new(
            k,
            m,
            &left * max_ent_projector(m) * left.adjoint(),
            &cfg(),
        )
        .unwrap();
        let x = random_hermitian(k, &mut rng);
        let g = g_apply(&gamma, &x.transpose()).unwrap();
        assert!((g - r.transpose() * &x * r.conjugate()).norm() < 1e-12);
        let y = random_hermitian(m, &mut rng);
        let f = f_apply(&gamma, &y.transpose()).unwrap();
        assert!((f - &r * &y * r.adjoint()).norm() < 1e-12);
        // T(X) = (R R*) X (R R*) for the pure state.
        let rr = &r * r.adjoint();
        let t = fg_apply(&gamma, &x).unwrap();
        assert!((t - &rr * &x * &rr).norm() < 1e-11);
    }

    #[test]
    fn fg_of_maxent_is_identity_map() {
        let gamma = maxent_state(2);
        let t = fg_superop(&gamma);
        assert!((&t.rep - DMatrix::identity(4, 4)).norm() < 1e-12);
    }

    #[test]
    fn fg_of_corner_product_is_rank_one() {
        let mut corner = CMatrix::zeros(4, 4);
        corner[(0, 0)] = cr(1.0);
        let gamma = BipartiteState::new(2, 2, corner, &cfg()).unwrap();
        let t = fg_superop(&gamma);
        let sv = t.rep.clone().singular_values();
        assert!(sv[0] > 0.9);
        assert!(sv.iter().skip(1).all(|&s| s < 1e-12));
        // T(X) = x_11 E_11 directly.
        let mut rng = SeededRng::seed_from_u64(5);
        let x = random_hermitian(2, &mut rng);
        let tx = fg_apply(&gamma, &x).unwrap();
        let mut expected = CMatrix::zeros(2, 2);
        expected[(0, 0)] = x[(0, 0)];
        assert!((tx - expected).norm() < 1e-13);
    }

    #[test]
    fn rep_symmetric_psd_and_matches_g_singular_values() {
        let gamma = random_state(2, 3, 4, 8, &cfg()).unwrap();
        let t = fg_superop(&gamma);
        assert!(t.symmetry_defect() < 1e-10);
        let (tvals, _) = mat::sym_eig(&t.rep);
        assert!(tvals.last().copied().unwrap() > -1e-10 * tvals[0].max(1.0));
        let g = g_superop(&gamma);
        let mut gsq: Vec<f64> = g
            .rep
            .singular_values()
            .iter()
            .map(|s| s * s)
            .collect();
        gsq.sort_by(|a, b| b.partial_cmp(a).unwrap());
        for (a, b) in tvals.iter().zip(gsq.iter()) {
            assert!((a - b).abs() < 1e-9 * gsq[0].max(1.0));
        }
    }

    #[test]
    fn rep_application_matches_direct_contraction() {
        let gamma = random_state(3, 2, 4, 14, &cfg()).unwrap();
        let t = fg_superop(&gamma);
        let mut rng = SeededRng::seed_from_u64(15);
        for _ in 0..10 {
            let x = random_hermitian(3, &mut rng);
            let via_rep = t.apply_herm(&x);
            let direct = fg_apply(&gamma, &x).unwrap();
            assert!((via_rep - &direct).norm() <= 1e-12 * direct.norm().max(1.0));
        }
        // Complex inputs go through the Hermitian split.
        let z = complex_gaussian(3, 3, &mut rng);
        let via_rep = t.apply(&z).unwrap();
        let direct = fg_apply(&gamma, &z).unwrap();
        assert!((via_rep - &direct).norm() <= 1e-12 * direct.norm().max(1.0));
    }

    #[test]
    fn adjoint_pairing_holds() {
        let gamma = maxent_state(2);
        assert!(verify_adjoint(&gamma, 20, 7).unwrap() < 1e-12);
        let gamma = random_state(3, 2, 4, 9, &cfg()).unwrap();
        assert!(verify_adjoint(&gamma, 100, 11).unwrap() < 1e-10);
    }

    #[test]
    fn triple_pairing_against_the_state() {
        let gamma = random_state(2, 3, 5, 10, &cfg()).unwrap();
        let mut rng = SeededRng::seed_from_u64(12);
        for _ in 0..20 {
            let x = random_hermitian(2, &mut rng);
            let y = random_hermitian(3, &mut rng);
            let direct = mat::frob_inner(&x.kronecker(&y), gamma.matrix());
            let via_g = mat::frob_inner(&y, &g_apply(&gamma, &x).unwrap());
            let via_f = mat::frob_inner(&f_apply(&gamma, &y).unwrap(), &x);
            let scale = gamma.matrix().norm() * x.norm() * y.norm();
            assert!((direct - via_g).norm() <= 1e-10 * scale.max(1.0));
            assert!((direct - via_f).norm() <= 1e-10 * scale.max(1.0));
        }
    }

    #[test]
    fn choi_of_identity_and_transpose() {
        let id = SuperOperator::identity(2);
        assert!((choi(&id).unwrap() - max_ent_projector(2)).norm() < 1e-13);
        let transpose = SuperOperator::from_map(2, 2, |x| x.transpose());
        let c = choi(&transpose).unwrap();
        assert!((&c - flip_operator(2)).norm() < 1e-13);
        assert!(!is_psd(&c, &cfg()).unwrap());
    }

    #[test]
    fn choi_of_fg_is_psd() {
        for seed in 0..5 {
            let gamma = random_state(2, 2, 3, seed, &cfg()).unwrap();
            let c = choi(&fg_superop(&gamma)).unwrap();
            assert!(is_psd(&c, &cfg()).unwrap());
        }
    }
}
