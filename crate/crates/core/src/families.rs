//! Generators and classifiers: the three-parameter family
//! `a Id + b F + c u u*`, condition flags for the three known types,
//! spectral powers and roots, the shared-range counterexample and the
//! shuffle construction that escapes all three conditions at once.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mat::{self, CMatrix};
use crate::ops::{
    flip_operator, max_ent_projector, partial_transpose, realignment_raw, shuffle,
    SitesDescriptor,
};
use crate::state::{self, BipartiteState, ToleranceConfig};

/// Condition flags for a state: positivity under partial transpose (1),
/// positivity under partial transpose composed with realignment (2),
/// invariance under realignment (3). The square-only flags are `None` on
/// rectangular splits, where the realignment map is not defined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeFlags {
    pub psd: bool,
    pub ppt: bool,
    pub spc: Option<bool>,
    pub r_invariant: Option<bool>,
    pub antisym_supported: Option<bool>,
    pub rank: usize,
}

impl TypeFlags {
    /// True when the state satisfies at least one of the three conditions.
    pub fn satisfies_any(&self) -> bool {
        self.ppt || self.spc == Some(true) || self.r_invariant == Some(true)
    }
}

/// Recompute every flag from the state alone.
pub fn classify(gamma: &BipartiteState, cfg: &ToleranceConfig) -> Result<TypeFlags> {
    let psd = state::is_psd(gamma.matrix(), cfg)?;
    let pt = partial_transpose(gamma);
    let ppt = state::is_psd(&pt, cfg)?;
    let (spc, r_invariant, antisym_supported) = if gamma.k() == gamma.m() {
        let k = gamma.k();
        let spc = state::is_psd(&realignment_raw(&pt, k), cfg)?;
        let realigned = realignment_raw(gamma.matrix(), k);
        let r_invariant =
            (realigned - gamma.matrix()).norm() <= cfg.tol_zero * gamma.matrix().norm();
        // Id + F + u u* is PSD with image exactly the symmetric subspace, so
        // it annihilates gamma precisely when the support is antisymmetric.
        let sym = CMatrix::identity(k * k, k * k) + flip_operator(k) + max_ent_projector(k);
        let antisym = (&sym * gamma.matrix()).norm()
            <= cfg.tol_zero * (k as f64 + 2.0) * gamma.matrix().norm();
        (Some(spc), Some(r_invariant), Some(antisym))
    } else {
        (None, None, None)
    };
    Ok(TypeFlags {
        psd,
        ppt,
        spc,
        r_invariant,
        antisym_supported,
        rank: gamma.rank(cfg),
    })
}

/// Sector eigenvalues of `a Id + b F + c u u*` as (label, value,
/// multiplicity) triples; only nonempty sectors are listed.
pub fn werner_sectors(k: usize, a: f64, b: f64, c: f64) -> Vec<(&'static str, f64, usize)> {
    let mut sectors = Vec::new();
    if k >= 2 {
        sectors.push(("antisymmetric", a - b, k * (k - 1) / 2));
        sectors.push(("symmetric-orthogonal-to-u", a + b, k * (k + 1) / 2 - 1));
    }
    sectors.push(("max-ent-line", a + b + k as f64 * c, 1));
    sectors
}

/// The state `a Id + b F + c u_k u_k*` on `(k, k)`.
///
/// Realignment swaps `a` and `c` exactly, so the family is invariant under
/// realignment precisely when `a = c`.
pub fn werner(k: usize, a: f64, b: f64, c: f64, cfg: &ToleranceConfig) -> Result<BipartiteState> {
    if k == 0 {
        return Err(Error::Parameter("werner needs k >= 1".into()));
    }
    let sectors = werner_sectors(k, a, b, c);
    let scale = a.abs().max(b.abs()).max(k as f64 * c.abs()).max(1.0);
    if let Some((label, value, _)) = sectors
        .iter()
        .find(|(_, value, _)| *value < -1e-12 * scale)
    {
        return Err(Error::Domain(format!(
            "werner({k}, {a}, {b}, {c}) is not PSD: sector '{label}' has eigenvalue \
             {value}; all sectors: {sectors:?}"
        )));
    }
    let dim = k * k;
    let matrix = CMatrix::identity(dim, dim).map(|z| z * a)
        + flip_operator(k).map(|z| z * b)
        + max_ent_projector(k).map(|z| z * c);
    BipartiteState::new(k, k, matrix, cfg)
}

/// `u_k u_k*` as a state; the canonical non-CR example for `k >= 2`.
pub fn maxent_state(k: usize, cfg: &ToleranceConfig) -> Result<BipartiteState> {
    BipartiteState::new(k, k, max_ent_projector(k), cfg)
}

/// Canonical diagonal split `V1 + V2 = Id` with `V1` the projection onto
/// the first `ceil(k/2)` coordinates.
pub fn canonical_split(k: usize) -> (CMatrix, CMatrix) {
    let half = k.div_ceil(2);
    let v1 = CMatrix::from_fn(k, k, |i, j| {
        if i == j && i < half {
            mat::cr(1.0)
        } else {
            mat::cr(0.0)
        }
    });
    let v2 = CMatrix::identity(k, k) - &v1;
    (v1, v2)
}

/// `V1 (x) V1^t + V2 (x) V2^t`, a PPT state decomposing into two blocks.
pub fn diag_pair_state(k: usize, cfg: &ToleranceConfig) -> Result<BipartiteState> {
    if k < 2 {
        return Err(Error::Parameter("diag-pair needs k >= 2".into()));
    }
    let (v1, v2) = canonical_split(k);
    let matrix = v1.kronecker(&v1.transpose()) + v2.kronecker(&v2.transpose());
    BipartiteState::new(k, k, matrix, cfg)
}

/// Spectral power `gamma^n`: eigenvalues mapped by `t -> t^n`, negatives
/// clamped to zero first, eigenvectors unchanged.
pub fn power(gamma: &BipartiteState, n: u32, cfg: &ToleranceConfig) -> Result<BipartiteState> {
    spectral_map(gamma, n, cfg, |t, n| t.powi(n as i32))
}

/// Spectral root `gamma^(1/n)`.
pub fn root(gamma: &BipartiteState, n: u32, cfg: &ToleranceConfig) -> Result<BipartiteState> {
    spectral_map(gamma, n, cfg, |t, n| t.powf(1.0 / n as f64))
}

fn spectral_map(
    gamma: &BipartiteState,
    n: u32,
    cfg: &ToleranceConfig,
    f: impl Fn(f64, u32) -> f64,
) -> Result<BipartiteState> {
    if n == 0 {
        return Err(Error::Parameter("exponent must be >= 1".into()));
    }
    let eig = mat::herm_eig(gamma.matrix());
    // Eigenvalues below the support cutoff are kernel noise; clamping them
    // before the map keeps the kernel exact (roots would amplify them).
    let cut = cfg.tol_psd * eig.max_eigenvalue();
    let out = eig.rebuild_with(|t| if t > cut && t > 0.0 { f(t, n) } else { 0.0 });
    BipartiteState::new(gamma.k(), gamma.m(), out, cfg)
}

/// Orthogonal projection onto the image of `gamma`, as a state.
pub fn support_state(gamma: &BipartiteState, cfg: &ToleranceConfig) -> Result<BipartiteState> {
    let p = gamma.support(cfg);
    BipartiteState::new(gamma.k(), gamma.m(), p.matrix().clone(), cfg)
}

/// The shared-range counterexample `u_k u_k* + eps (V1 (x) V1^t + V2 (x) V2^t)`.
#[derive(Debug, Clone)]
pub struct Counterexample {
    pub state: BipartiteState,
    /// Smallest singular value of the representation of `G_delta`; callers
    /// can confirm the map is invertible, which the construction needs for
    /// small `eps` only.
    pub g_min_singular: f64,
}

pub fn counterexample_delta(k: usize, eps: f64, cfg: &ToleranceConfig) -> Result<Counterexample> {
    if k < 2 {
        return Err(Error::Parameter("counterexample needs k >= 2".into()));
    }
    if eps <= 0.0 {
        return Err(Error::Parameter("eps must be positive".into()));
    }
    let (v1, v2) = canonical_split(k);
    let pair = v1.kronecker(&v1.transpose()) + v2.kronecker(&v2.transpose());
    let matrix = max_ent_projector(k) + pair.map(|z| z * eps);
    let state = BipartiteState::new(k, k, matrix, cfg)?;
    let g = crate::superop::g_superop(&state);
    let sv = g.rep.singular_values();
    Ok(Counterexample {
        state,
        g_min_singular: sv.min(),
    })
}

/// Outcome of the new-type shuffle construction.
#[derive(Debug, Clone)]
pub struct NewTypeReport {
    pub state: BipartiteState,
    pub sites: SitesDescriptor,
    pub input_flags: Vec<TypeFlags>,
    /// Flags the shuffle theorem predicts for the output: a condition
    /// survives exactly when every input satisfies it.
    pub expected_ppt: bool,
    pub expected_spc: bool,
    pub expected_r_invariant: bool,
    pub output_flags: TypeFlags,
}

impl NewTypeReport {
    /// True when the output avoids all three conditions.
    pub fn is_new_type(&self) -> bool {
        !self.output_flags.ppt
            && self.output_flags.spc == Some(false)
            && self.output_flags.r_invariant == Some(false)
    }
}

/// Shuffle of square states, each satisfying at least one of the three
/// conditions (hence completely reducible) and none supported on the
/// antisymmetric subspace. When every condition is violated by some input
/// the output satisfies none of them, yet stays completely reducible.
pub fn new_type_state(
    inputs: &[BipartiteState],
    cfg: &ToleranceConfig,
) -> Result<NewTypeReport> {
    if inputs.is_empty() {
        return Err(Error::Parameter("new-type needs at least one input".into()));
    }
    let mut input_flags = Vec::with_capacity(inputs.len());
    for (idx, gamma) in inputs.iter().enumerate() {
        if gamma.k() != gamma.m() {
            return Err(Error::Parameter(format!(
                "input {idx} must be a square split, got ({}, {})",
                gamma.k(),
                gamma.m()
            )));
        }
        if gamma.k() <= 2 {
            return Err(Error::Parameter(format!(
                "input {idx} has k = {}, the construction needs k > 2",
                gamma.k()
            )));
        }
        let flags = classify(gamma, cfg)?;
        if flags.antisym_supported == Some(true) {
            return Err(Error::Parameter(format!(
                "input {idx} is supported on the antisymmetric subspace"
            )));
        }
        if !flags.satisfies_any() {
            return Err(Error::Parameter(format!(
                "input {idx} satisfies none of the three conditions"
            )));
        }
        input_flags.push(flags);
    }
    let expected_ppt = input_flags.iter().all(|f| f.ppt);
    let expected_spc = input_flags.iter().all(|f| f.spc == Some(true));
    let expected_r_invariant = input_flags.iter().all(|f| f.r_invariant == Some(true));
    let (state, sites) = shuffle(inputs, cfg)?;
    let output_flags = classify(&state, cfg)?;
    Ok(NewTypeReport {
        state,
        sites,
        input_flags,
        expected_ppt,
        expected_spc,
        expected_r_invariant,
        output_flags,
    })
}

/// Rejection-sample a random full-rank PPT state at `(k, k)`; used for test
/// corpora, with no claim about the sampling measure.
pub fn random_ppt_state(
    k: usize,
    seed: u64,
    cfg: &ToleranceConfig,
) -> Result<BipartiteState> {
    for attempt in 0..10_000 {
        let candidate = state::random_state(k, k, k * k, seed.wrapping_add(attempt * 0x9e37), cfg)?;
        if classify(&candidate, cfg)?.ppt {
            return Ok(candidate);
        }
    }
    Err(Error::Parameter(format!(
        "no PPT state found near seed {seed} after 10000 attempts"
    )))
}
