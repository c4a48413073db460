//! Representation spec files.
//!
//! ```json
//! {"x": 4, "y": 4, "z": 4,
//!  "deformation": {"kind": "path", "path_coeffs": [[1, 1, 1]], "h": 1e-4}}
//! ```
//!
//! `kind` is one of `zero`, `path` or `tangent`. A `path` lists the
//! polynomial coefficients of `t ↦ (x, y, z) + c₁t + c₂t² + …`; a `tangent`
//! gives the `ε` parts of both generators as
//! `"tangent_matrices": {"a": [[..],[..]], "b": [[..],[..]]}`, relative to the
//! normalization in which `A` is diagonal.

use std::path::Path;

use anyhow::{bail, Context};
use mml_core::representation::{attach_deformation, build_rep, PolynomialPath, DEFAULT_PATH_STEP};
use mml_core::{DeformationSpec, HoledTorusRep, TraceCoords};
use serde::{Deserialize, Serialize};

type Mat2 = [[f64; 2]; 2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepSpec {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    #[serde(default)]
    pub deformation: Option<DeformationFile>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeformKind {
    Zero,
    Path,
    Tangent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeformationFile {
    pub kind: DeformKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path_coeffs: Option<Vec<[f64; 3]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tangent_matrices: Option<TangentMatrices>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TangentMatrices {
    pub a: Mat2,
    pub b: Mat2,
}

impl RepSpec {
    pub fn coords(&self) -> TraceCoords {
        TraceCoords::new(self.x, self.y, self.z)
    }

    /// Builds the representation and attaches the deformation, if any.
    pub fn build(&self) -> anyhow::Result<HoledTorusRep> {
        let rep = build_rep(self.coords())?;
        match &self.deformation {
            None => Ok(rep),
            Some(d) => Ok(attach_deformation(&rep, &d.to_spec()?)?),
        }
    }
}

impl DeformationFile {
    pub fn to_spec(&self) -> anyhow::Result<DeformationSpec> {
        Ok(match self.kind {
            DeformKind::Zero => DeformationSpec::Zero,
            DeformKind::Path => {
                let coeffs = self
                    .path_coeffs
                    .clone()
                    .context("path deformation needs path_coeffs")?;
                if coeffs.is_empty() {
                    bail!("path_coeffs must not be empty");
                }
                DeformationSpec::Path {
                    path: PolynomialPath { coeffs },
                    h: self.h.unwrap_or(DEFAULT_PATH_STEP),
                }
            }
            DeformKind::Tangent => {
                let m = self
                    .tangent_matrices
                    .context("tangent deformation needs tangent_matrices")?;
                DeformationSpec::Tangent {
                    a_eps: m.a,
                    b_eps: m.b,
                }
            }
        })
    }
}

/// Parses a spec; errors carry the line and column reported by the parser.
pub fn parse_spec(text: &str) -> anyhow::Result<RepSpec> {
    serde_json::from_str(text).map_err(|e| {
        let line = text.lines().nth(e.line().saturating_sub(1)).unwrap_or("");
        anyhow::anyhow!("{e}\n  | {line}")
    })
}

pub fn load_spec(path: &Path) -> anyhow::Result<RepSpec> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read spec file {}", path.display()))?;
    parse_spec(&text).with_context(|| format!("invalid spec file {}", path.display()))
}

/// Parses `x,y,z`.
pub fn parse_coords(s: &str) -> anyhow::Result<TraceCoords> {
    let v: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .with_context(|| format!("coordinates must be three numbers x,y,z, got {s:?}"))?;
    match v[..] {
        [x, y, z] => Ok(TraceCoords::new(x, y, z)),
        _ => bail!("coordinates must be three numbers x,y,z, got {s:?}"),
    }
}
