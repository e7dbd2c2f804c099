//! Randomized falsification harness for the distillability statement:
//! against a shuffle of partial transposes of realignment-invariant states,
//! no rank-two-span vector should produce a negative quadratic form, and
//! every compressed two-by-two state should stay PPT and
//! realignment-invariant.
//!
//! The probe certifies nothing beyond the sampled directions; it reports
//! the sample minimum and the violation count.

use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mat::{self, CMatrix, CVector, SeededRng};
use crate::ops::{self, partial_transpose, realignment_raw};
use crate::state::{BipartiteState, ToleranceConfig};

/// Largest allowed product of left dimensions; keeps the shuffled matrix at
/// desk scale.
pub const MAX_SHUFFLED_DIM: usize = 128;

/// Relative tolerance for the realignment-invariance of compressed states.
pub const COMPRESSED_RINV_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub value: f64,
    pub compressed_ppt: bool,
    pub compressed_r_invariant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub trials: usize,
    pub seed: u64,
    /// Minimum of `tr(Sigma v v*)` over all trials.
    pub min_value: f64,
    /// Trials with a value below `-tol_zero`.
    pub violations: usize,
    /// Compressed states failing the PPT check.
    pub ppt_failures: usize,
    /// Compressed states failing realignment-invariance at 1e-8 relative.
    pub rinv_failures: usize,
    /// Evenly sampled per-trial records (at most 16).
    pub per_trial: Vec<TrialRecord>,
}

impl ProbeReport {
    pub fn summary_line(&self) -> String {
        format!(
            "min={:.6e} violations={} trials={} seed={}",
            self.min_value, self.violations, self.trials, self.seed
        )
    }
}

/// Run the probe. Inputs must be square realignment-invariant states with
/// `k >= 2`; set `allow_non_invariant` to bypass the invariance gate for
/// control runs, in which case negative values carry no meaning.
pub fn probe(
    states: &[BipartiteState],
    trials: usize,
    seed: u64,
    cfg: &ToleranceConfig,
    allow_non_invariant: bool,
) -> Result<ProbeReport> {
    if states.is_empty() {
        return Err(Error::Parameter("probe needs at least one state".into()));
    }
    if trials == 0 {
        return Err(Error::Parameter("probe needs at least one trial".into()));
    }
    let mut kprod: usize = 1;
    for (idx, gamma) in states.iter().enumerate() {
        if gamma.k() != gamma.m() || gamma.k() < 2 {
            return Err(Error::Parameter(format!(
                "probe input {idx} must be square with k >= 2, got ({}, {})",
                gamma.k(),
                gamma.m()
            )));
        }
        kprod = kprod.saturating_mul(gamma.k());
        if !allow_non_invariant {
            let realigned = realignment_raw(gamma.matrix(), gamma.k());
            let defect = (realigned - gamma.matrix()).norm();
            if defect > cfg.tol_zero * gamma.matrix().norm() {
                return Err(Error::Parameter(format!(
                    "probe input {idx} is not realignment-invariant \
                     (relative defect {:.3e})",
                    defect / gamma.matrix().norm()
                )));
            }
        }
    }
    if kprod > MAX_SHUFFLED_DIM {
        return Err(Error::Parameter(format!(
            "product of factor dimensions {kprod} exceeds the cap {MAX_SHUFFLED_DIM}"
        )));
    }

    let transposed: Vec<(CMatrix, usize, usize)> = states
        .iter()
        .map(|g| (partial_transpose(g), g.k(), g.m()))
        .collect();
    let (sigma, _) = ops::shuffle_raw(&transposed)?;
    let (shuffled, _) = ops::shuffle(states, cfg)?;
    let big_k = kprod;

    let sample_step = (trials / 16).max(1);
    let mut report = ProbeReport {
        trials,
        seed,
        min_value: f64::INFINITY,
        violations: 0,
        ppt_failures: 0,
        rinv_failures: 0,
        per_trial: Vec::new(),
    };
    for trial in 0..trials {
        // Independent per-trial streams: parallel and serial runs agree.
        let mut rng = SeededRng::seed_from_u64(seed);
        rng.set_stream(trial as u64 + 1);
        let a = loop {
            let mut cand = mat::complex_gaussian(big_k, 2, &mut rng);
            if mat::orthonormalize_columns(&mut cand, 1e-12) == 2 {
                break cand;
            }
        };
        let mut w = mat::complex_gaussian(4, 1, &mut rng).column(0).clone_owned();
        w /= mat::cr(w.norm());
        let v = kron_image(&a, &w);
        let value = quadratic_form(&sigma, &v);
        report.min_value = report.min_value.min(value);
        if value < -cfg.tol_zero {
            report.violations += 1;
        }

        let compressed = ops::compress(&shuffled, &a, cfg)?;
        let ppt_ok = crate::state::is_psd(&partial_transpose(&compressed), cfg)?;
        let realigned = realignment_raw(compressed.matrix(), 2);
        let rinv_ok = (realigned - compressed.matrix()).norm()
            <= COMPRESSED_RINV_TOL * compressed.matrix().norm();
        if !ppt_ok {
            report.ppt_failures += 1;
        }
        if !rinv_ok {
            report.rinv_failures += 1;
        }
        if trial % sample_step == 0 && report.per_trial.len() < 16 {
            report.per_trial.push(TrialRecord {
                trial,
                value,
                compressed_ppt: ppt_ok,
                compressed_r_invariant: rinv_ok,
            });
        }
    }
    Ok(report)
}

/// `(A (x) A) w` for `A` of size `K x 2` and `w` of length 4.
fn kron_image(a: &CMatrix, w: &CVector) -> CVector {
    let k = a.nrows();
    let mut v = CVector::zeros(k * k);
    for i in 0..2 {
        for j in 0..2 {
            let coeff = w[i * 2 + j];
            if coeff == mat::cr(0.0) {
                continue;
            }
            let (ai, aj) = (a.column(i), a.column(j));
            for r in 0..k {
                let base = ai[r] * coeff;
                for s in 0..k {
                    v[r * k + s] += base * aj[s];
                }
            }
        }
    }
    v
}

fn quadratic_form(sigma: &CMatrix, v: &CVector) -> f64 {
    let image = sigma * v;
    let val = v.dotc(&image);
    debug_assert!(val.im.abs() <= 1e-9 * val.norm().max(1.0));
    val.re
}

/// Deterministic single-point evaluation of `tr(Sigma v v*)` for
/// `v = a (x) b + c (x) d`, with the rank-two span enforced.
pub fn rank2_span_value(
    sigma: &CMatrix,
    a: &CVector,
    b: &CVector,
    c: &CVector,
    d: &CVector,
) -> Result<f64> {
    let k = a.len();
    if [b.len(), c.len(), d.len()].iter().any(|&l| l != k) {
        return Err(Error::Dimension("span vectors must share a length".into()));
    }
    if sigma.nrows() != k * k || sigma.ncols() != k * k {
        return Err(Error::Dimension(format!(
            "Sigma must be {0}x{0} for vectors of length {k}",
            k * k
        )));
    }
    let mut span = CMatrix::zeros(k, 4);
    for (col, vec) in [a, b, c, d].into_iter().enumerate() {
        span.set_column(col, vec);
    }
    if ops::column_rank(&span, 1e-10) > 2 {
        return Err(Error::Parameter(
            "span{a, b, c, d} must have dimension at most 2".into(),
        ));
    }
    let mut v = CVector::zeros(k * k);
    for r in 0..k {
        for s in 0..k {
            v[r * k + s] = a[r] * b[s] + c[r] * d[s];
        }
    }
    if v.norm() == 0.0 {
        return Err(Error::Parameter("v = a(x)b + c(x)d vanishes".into()));
    }
    Ok(quadratic_form(sigma, &v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{maxent_state, werner};
    use crate::mat::basis_vector;
    use crate::ops::flip_operator;

    fn cfg() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    #[test]
    fn probe_single_werner_is_clean() {
        let gamma = werner(3, 1.0, -0.9, 1.0, &cfg()).unwrap();
        let report = probe(&[gamma], 200, 42, &cfg(), false).unwrap();
        assert_eq!(report.violations, 0);
        assert!(report.min_value >= -1e-9);
        assert_eq!(report.ppt_failures, 0);
        assert_eq!(report.rinv_failures, 0);
        assert!(!report.per_trial.is_empty());
    }

    #[test]
    fn probe_two_factor_shuffle_is_clean() {
        // 81 x 81 shuffled matrix, K = 9 compression columns.
        let g1 = werner(3, 1.0, -1.0, 1.0, &cfg()).unwrap();
        let g2 = werner(3, 1.0, -0.9, 1.0, &cfg()).unwrap();
        let report = probe(&[g1, g2], 200, 11, &cfg(), false).unwrap();
        assert_eq!(report.violations, 0);
        assert!(report.min_value >= -1e-9);
        assert_eq!(report.ppt_failures, 0);
        assert_eq!(report.rinv_failures, 0);
    }

    #[test]
    fn probe_is_deterministic() {
        let gamma = werner(3, 1.0, -0.9, 1.0, &cfg()).unwrap();
        let r1 = probe(std::slice::from_ref(&gamma), 50, 7, &cfg(), false).unwrap();
        let r2 = probe(&[gamma], 50, 7, &cfg(), false).unwrap();
        assert_eq!(r1, r2);
    }

    #[test]
    fn probe_rejects_non_invariant_inputs() {
        let gamma = maxent_state(2, &cfg()).unwrap();
        let err = probe(std::slice::from_ref(&gamma), 10, 1, &cfg(), false).unwrap_err();
        assert!(err.to_string().contains("realignment-invariant"));
        // Control run with the gate bypassed: executes and may go negative.
        let report = probe(&[gamma], 300, 1, &cfg(), true).unwrap();
        assert!(report.min_value < 0.0);
    }

    #[test]
    fn probe_enforces_size_cap() {
        let gamma = werner(3, 1.0, -0.9, 1.0, &cfg()).unwrap();
        let five = vec![gamma; 5]; // 3^5 = 243 > 128
        let err = probe(&five, 10, 1, &cfg(), false).unwrap_err();
        assert!(err.to_string().contains("cap"));
    }

    #[test]
    fn rank2_value_on_identity_is_positive() {
        let id = CMatrix::identity(4, 4);
        let a = basis_vector(2, 0);
        let b = basis_vector(2, 1);
        let c = basis_vector(2, 1);
        let d = basis_vector(2, 0);
        let val = rank2_span_value(&id, &a, &b, &c, &d).unwrap();
        assert!((val - 2.0).abs() < 1e-12);
    }

    #[test]
    fn rank2_value_detects_flip_violation() {
        // Sigma = (u u*)^Gamma = F at k = 2, probed at the antisymmetric
        // vector: the classic transpose-cone violation, outside the
        // realignment-invariant hypothesis.
        let f = flip_operator(2);
        let a = basis_vector(2, 0);
        let b = basis_vector(2, 1);
        let c = -basis_vector(2, 1);
        let d = basis_vector(2, 0);
        let val = rank2_span_value(&f, &a, &b, &c, &d).unwrap();
        assert!((val + 2.0).abs() < 1e-12);
    }

    #[test]
    fn rank2_value_rejects_degenerate_input() {
        let id = CMatrix::identity(4, 4);
        let z = CVector::zeros(2);
        assert!(rank2_span_value(&id, &z, &z, &z, &z).is_err());
    }

    #[test]
    fn rank2_deterministic_points_on_werner() {
        let gamma = werner(3, 1.0, -0.9, 1.0, &cfg()).unwrap();
        let sigma = partial_transpose(&gamma);
        let mut rng = SeededRng::seed_from_u64(9);
        for _ in 0..50 {
            let span = mat::complex_gaussian(3, 2, &mut rng);
            let coeff = mat::complex_gaussian(2, 4, &mut rng);
            let mk = |col: usize| {
                span.column(0) * coeff[(0, col)] + span.column(1) * coeff[(1, col)]
            };
            let val =
                rank2_span_value(&sigma, &mk(0), &mk(1), &mk(2), &mk(3)).unwrap();
            assert!(val >= -1e-9);
        }
    }
}
