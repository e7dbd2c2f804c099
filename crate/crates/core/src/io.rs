//! File formats and JSON serialization.
//!
//! States are stored as `{"k", "m", "re", "im"}` with row-major float
//! arrays; multipartite matrices add `"dims"` and `"split"`. The writer
//! emits every float with 17 significant digits so that
//! write-then-read is bit-exact; the reader rejects non-rectangular arrays
//! and non-finite entries.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mat::{self, CMatrix};
use crate::ops::SitesDescriptor;
use crate::reduce::{
    Block, PairCheck, ReducibilityCertificate, Verdict, Witness,
};
use crate::state::{BipartiteState, Projection, ToleranceConfig};
use crate::superop::SuperOperator;

/// JSON formatter printing floats as `d.dddddddddddddddde[-]d` (17
/// significant digits, enough to round-trip every finite f64).
struct SigDigitFormatter;

impl serde_json::ser::Formatter for SigDigitFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()>
    where
        W: ?Sized + Write,
    {
        if !value.is_finite() {
            return Err(std::io::Error::new(
                std::io::ErrorKind::InvalidData,
                "refusing to serialize a non-finite float",
            ));
        }
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W>(&mut self, writer: &mut W, value: f32) -> std::io::Result<()>
    where
        W: ?Sized + Write,
    {
        self.write_f64(writer, value as f64)
    }
}

/// Serialize any value with the 17-significant-digit float policy.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SigDigitFormatter);
    value.serialize(&mut ser)?;
    String::from_utf8(out).map_err(|e| Error::Format(e.to_string()))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixJson {
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixJson {
    pub fn from_matrix(m: &CMatrix) -> Self {
        let (rows, cols) = (m.nrows(), m.ncols());
        let mut re = vec![vec![0.0; cols]; rows];
        let mut im = vec![vec![0.0; cols]; rows];
        for r in 0..rows {
            for c in 0..cols {
                re[r][c] = m[(r, c)].re;
                im[r][c] = m[(r, c)].im;
            }
        }
        Self { re, im }
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        let rows = self.re.len();
        if rows == 0 {
            return Err(Error::Format("empty matrix".into()));
        }
        let cols = self.re[0].len();
        if self.im.len() != rows {
            return Err(Error::Format(
                "re and im must have the same number of rows".into(),
            ));
        }
        for (r, (re_row, im_row)) in self.re.iter().zip(&self.im).enumerate() {
            if re_row.len() != cols || im_row.len() != cols {
                return Err(Error::Format(format!(
                    "non-rectangular array: row {r} has length {}, expected {cols}",
                    re_row.len().max(im_row.len())
                )));
            }
            if re_row.iter().chain(im_row).any(|x| !x.is_finite()) {
                return Err(Error::Format(format!("non-finite entry in row {r}")));
            }
        }
        Ok(CMatrix::from_fn(rows, cols, |r, c| {
            mat::c(self.re[r][c], self.im[r][c])
        }))
    }
}

/// On-disk state format. `dims`/`split` are present for states produced by
/// the shuffle, so later transforms can address individual sites.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateJson {
    pub k: usize,
    pub m: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dims: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub split: Option<usize>,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

pub fn state_to_json(state: &BipartiteState, sites: Option<&SitesDescriptor>) -> StateJson {
    let m = MatrixJson::from_matrix(state.matrix());
    StateJson {
        k: state.k(),
        m: state.m(),
        dims: sites.map(|s| s.dims.clone()),
        split: sites.map(|s| s.split),
        re: m.re,
        im: m.im,
    }
}

pub fn state_from_json(
    json: &StateJson,
    cfg: &ToleranceConfig,
) -> Result<(BipartiteState, Option<SitesDescriptor>)> {
    let matrix = MatrixJson {
        re: json.re.clone(),
        im: json.im.clone(),
    }
    .to_matrix()?;
    let sites = match (&json.dims, json.split) {
        (Some(dims), Some(split)) => {
            let sites = SitesDescriptor::new(dims.clone(), split)?;
            if sites.left_dim() != json.k || sites.right_dim() != json.m {
                return Err(Error::Format(format!(
                    "dims/split describe ({}, {}) but the file declares ({}, {})",
                    sites.left_dim(),
                    sites.right_dim(),
                    json.k,
                    json.m
                )));
            }
            Some(sites)
        }
        (None, None) => None,
        _ => {
            return Err(Error::Format(
                "dims and split must be present together".into(),
            ))
        }
    };
    let state = BipartiteState::new(json.k, json.m, matrix, cfg)?;
    Ok((state, sites))
}

pub fn write_state(
    path: &Path,
    state: &BipartiteState,
    sites: Option<&SitesDescriptor>,
) -> Result<()> {
    let json = state_to_json(state, sites);
    std::fs::write(path, to_json_string(&json)? + "\n")?;
    Ok(())
}

pub fn read_state(
    path: &Path,
    cfg: &ToleranceConfig,
) -> Result<(BipartiteState, Option<SitesDescriptor>)> {
    let text = std::fs::read_to_string(path)?;
    let json: StateJson = serde_json::from_str(&text)?;
    state_from_json(&json, cfg)
}

/// Serialized form of a superoperator on `M_k`, with the documented
/// Hermitian basis ordering.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuperOperatorJson {
    pub k: usize,
    pub rep: Vec<Vec<f64>>,
}

pub fn superop_to_json(t: &SuperOperator) -> Result<SuperOperatorJson> {
    if t.in_dim != t.out_dim {
        return Err(Error::UnsupportedShape(
            "only maps of M_k into itself serialize to the k/rep format".into(),
        ));
    }
    let n = t.in_dim * t.in_dim;
    let rep = (0..n)
        .map(|r| (0..n).map(|c| t.rep[(r, c)]).collect())
        .collect();
    Ok(SuperOperatorJson { k: t.in_dim, rep })
}

pub fn superop_from_json(json: &SuperOperatorJson) -> Result<SuperOperator> {
    let n = json.k * json.k;
    if json.rep.len() != n || json.rep.iter().any(|row| row.len() != n) {
        return Err(Error::Format("rep must be a k^2 x k^2 array".into()));
    }
    Ok(SuperOperator {
        in_dim: json.k,
        out_dim: json.k,
        rep: nalgebra::DMatrix::from_fn(n, n, |r, c| json.rep[r][c]),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlockJson {
    pub w: MatrixJson,
    pub v: MatrixJson,
    pub spectral_radius: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WitnessJson {
    pub w: MatrixJson,
    pub v: MatrixJson,
    pub check: PairCheck,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertificateJson {
    pub verdict: Verdict,
    pub blocks: Vec<BlockJson>,
    pub residual_norm: Option<f64>,
    pub witness: Option<WitnessJson>,
    pub gap_report: Option<f64>,
    pub tolerances: ToleranceConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
}

pub fn certificate_to_json(cert: &ReducibilityCertificate) -> CertificateJson {
    CertificateJson {
        verdict: cert.verdict,
        blocks: cert
            .blocks
            .iter()
            .map(|b| BlockJson {
                w: MatrixJson::from_matrix(b.w.matrix()),
                v: MatrixJson::from_matrix(b.v.matrix()),
                spectral_radius: b.spectral_radius,
            })
            .collect(),
        residual_norm: cert.residual_norm.is_finite().then_some(cert.residual_norm),
        witness: cert.witness.as_ref().map(|w| WitnessJson {
            w: MatrixJson::from_matrix(w.w.matrix()),
            v: MatrixJson::from_matrix(w.v.matrix()),
            check: w.check,
        }),
        gap_report: cert.gap_report,
        tolerances: cert.tolerances,
        diagnostic: cert.diagnostic.clone(),
    }
}

pub fn certificate_from_json(
    json: &CertificateJson,
    cfg: &ToleranceConfig,
) -> Result<ReducibilityCertificate> {
    let blocks = json
        .blocks
        .iter()
        .map(|b| {
            Ok(Block {
                w: Projection::new(b.w.to_matrix()?, cfg)?,
                v: Projection::new(b.v.to_matrix()?, cfg)?,
                spectral_radius: b.spectral_radius,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let witness = json
        .witness
        .as_ref()
        .map(|w| {
            Ok::<_, Error>(Witness {
                w: Projection::new(w.w.to_matrix()?, cfg)?,
                v: Projection::new(w.v.to_matrix()?, cfg)?,
                check: w.check,
            })
        })
        .transpose()?;
    Ok(ReducibilityCertificate {
        verdict: json.verdict,
        blocks,
        residual_norm: json.residual_norm.unwrap_or(f64::NAN),
        witness,
        gap_report: json.gap_report,
        tolerances: json.tolerances,
        diagnostic: json.diagnostic.clone(),
    })
}
