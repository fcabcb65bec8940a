//! The `stein-clt-row/1` array-spec document.
//!
//! A JSON object with a `kind` and either explicit `cells` (a single row),
//! explicit `rows` (a finite family), or named-family parameters. Field names
//! are documented in `docs/row-spec.md`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::cell::{Atom, DiscreteCell};
use super::family::{ArrayFamily, FamilyKind, DEFAULT_ATOM_CAP};
use super::row::{ArrayRow, RowMetadata};
use crate::error::{Error, Result};

pub const ROW_SCHEMA: &str = "stein-clt-row/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellSpec {
    pub atoms: Vec<Atom>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RowEntry {
    pub n: usize,
    pub cells: Vec<CellSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RowSpecDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<String>,
    pub kind: FamilyKind,
    #[serde(rename = "N")]
    pub dim: usize,
    /// For named families: build this single row instead of the family.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub allow_large_alpha: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coordinates: Option<Vec<RowSpecDocument>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atom_cap: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cells: Option<Vec<CellSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rows: Option<Vec<RowEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<RowMetadata>,
}

/// What a spec document describes.
#[derive(Clone, Debug, PartialEq)]
pub enum LoadedSpec {
    Row(ArrayRow),
    Family(ArrayFamily),
}

impl LoadedSpec {
    pub fn into_row(self, n: Option<usize>) -> Result<ArrayRow> {
        match (self, n) {
            (LoadedSpec::Row(row), _) => Ok(row),
            (LoadedSpec::Family(f), Some(n)) => f.row(n),
            (LoadedSpec::Family(_), None) => Err(Error::param("family spec needs an n to build a row")),
        }
    }
}

fn field_error(message: impl Into<String>) -> Error {
    Error::Parse {
        line: 0,
        column: 0,
        message: message.into(),
    }
}

fn build_row(dim: usize, cells: &[CellSpec], metadata: RowMetadata) -> Result<ArrayRow> {
    let cells = cells
        .iter()
        .enumerate()
        .map(|(k, c)| {
            DiscreteCell::new(dim, c.atoms.clone()).map_err(|e| field_error(format!("cells[{k}]: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    if cells.is_empty() {
        return Err(field_error("`cells` must not be empty"));
    }
    ArrayRow::new(cells, metadata)?.into_validated()
}

fn family_from_doc(doc: &RowSpecDocument, path: &str) -> Result<ArrayFamily> {
    let need = |name: &str| field_error(format!("{path}: field `{name}` required for kind {:?}", doc.kind));
    match doc.kind {
        FamilyKind::EtaAlpha => {
            if doc.dim != 1 {
                return Err(field_error(format!("{path}: eta_alpha requires N = 1")));
            }
            Ok(ArrayFamily::EtaAlpha {
                alpha: doc.alpha.ok_or_else(|| need("alpha"))?,
                allow_large_alpha: doc.allow_large_alpha.unwrap_or(false),
            })
        }
        FamilyKind::RademacherIid => {
            if doc.dim != 1 {
                return Err(field_error(format!("{path}: rademacher_iid requires N = 1")));
            }
            Ok(ArrayFamily::RademacherIid)
        }
        FamilyKind::Product => {
            let coords = doc.coordinates.as_ref().ok_or_else(|| need("coordinates"))?;
            if coords.len() != doc.dim {
                return Err(field_error(format!(
                    "{path}: N = {} but {} coordinates given",
                    doc.dim,
                    coords.len()
                )));
            }
            let coordinates = coords
                .iter()
                .enumerate()
                .map(|(i, c)| family_from_doc(c, &format!("{path}.coordinates[{i}]")))
                .collect::<Result<Vec<_>>>()?;
            Ok(ArrayFamily::Product {
                coordinates,
                atom_cap: doc.atom_cap.unwrap_or(DEFAULT_ATOM_CAP),
            })
        }
        FamilyKind::Explicit => {
            let entries = doc.rows.as_ref().ok_or_else(|| need("rows"))?;
            let mut rows = BTreeMap::new();
            for entry in entries {
                if entry.cells.len() != entry.n {
                    return Err(field_error(format!(
                        "{path}: row n={} lists {} cells",
                        entry.n,
                        entry.cells.len()
                    )));
                }
                let meta = RowMetadata {
                    family: "explicit".into(),
                    correction_start: None,
                };
                rows.insert(entry.n, build_row(doc.dim, &entry.cells, meta)?);
            }
            Ok(ArrayFamily::Explicit { dim: doc.dim, rows })
        }
    }
}

/// Parses and validates an array-spec document.
pub fn load_row_spec(document: &str) -> Result<LoadedSpec> {
    let doc: RowSpecDocument = serde_json::from_str(document).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    if let Some(schema) = &doc.schema {
        if schema != ROW_SCHEMA {
            return Err(field_error(format!(
                "unsupported schema {schema:?}, expected {ROW_SCHEMA:?}"
            )));
        }
    }
    if doc.dim == 0 {
        return Err(field_error("`N` must be at least 1"));
    }
    if doc.kind == FamilyKind::Explicit {
        if let Some(cells) = &doc.cells {
            let metadata = doc.metadata.clone().unwrap_or_else(|| RowMetadata {
                family: "explicit".into(),
                correction_start: None,
            });
            return build_row(doc.dim, cells, metadata).map(LoadedSpec::Row);
        }
    }
    let family = family_from_doc(&doc, "$")?;
    match doc.n {
        Some(n) => family.row(n).map(LoadedSpec::Row),
        None => Ok(LoadedSpec::Family(family)),
    }
}

/// Explicit-row document for `row`, carrying its metadata.
pub fn row_document(row: &ArrayRow) -> RowSpecDocument {
    RowSpecDocument {
        schema: Some(ROW_SCHEMA.into()),
        kind: FamilyKind::Explicit,
        dim: row.dim(),
        n: None,
        alpha: None,
        allow_large_alpha: None,
        coordinates: None,
        atom_cap: None,
        cells: Some(
            row.cells()
                .iter()
                .map(|c| CellSpec {
                    atoms: c.atoms().to_vec(),
                })
                .collect(),
        ),
        rows: None,
        metadata: Some(row.metadata().clone()),
    }
}

pub fn family_document(family: &ArrayFamily) -> RowSpecDocument {
    let mut doc = RowSpecDocument {
        schema: Some(ROW_SCHEMA.into()),
        kind: family.kind(),
        dim: family.dim(),
        n: None,
        alpha: None,
        allow_large_alpha: None,
        coordinates: None,
        atom_cap: None,
        cells: None,
        rows: None,
        metadata: None,
    };
    match family {
        ArrayFamily::EtaAlpha {
            alpha,
            allow_large_alpha,
        } => {
            doc.alpha = Some(*alpha);
            doc.allow_large_alpha = allow_large_alpha.then_some(true);
        }
        ArrayFamily::RademacherIid => {}
        ArrayFamily::Product {
            coordinates,
            atom_cap,
        } => {
            doc.coordinates = Some(
                coordinates
                    .iter()
                    .map(|c| RowSpecDocument {
                        schema: None,
                        ..family_document(c)
                    })
                    .collect(),
            );
            doc.atom_cap = (*atom_cap != DEFAULT_ATOM_CAP).then_some(*atom_cap);
        }
        ArrayFamily::Explicit { rows, .. } => {
            doc.rows = Some(
                rows.iter()
                    .map(|(&n, row)| RowEntry {
                        n,
                        cells: row
                            .cells()
                            .iter()
                            .map(|c| CellSpec {
                                atoms: c.atoms().to_vec(),
                            })
                            .collect(),
                    })
                    .collect(),
            );
        }
    }
    doc
}

pub fn serialize_row(row: &ArrayRow) -> String {
    serde_json::to_string_pretty(&row_document(row)).expect("row documents always serialize")
}

pub fn serialize_family(family: &ArrayFamily) -> String {
    serde_json::to_string_pretty(&family_document(family)).expect("family documents always serialize")
}
