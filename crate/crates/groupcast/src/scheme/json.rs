//! Lossless JSON form of a scheme.
//!
//! Schemes serialize to a plain document — parameters, dimensions, generator
//! matrices as row-major integer grids, kind tag, and kind-specific aux
//! data — so key material and encoders can be reconstructed exactly on any
//! machine. Loading validates everything: primality of p, matrix shapes,
//! entry ranges, and kind-specific structure.

use serde::{Deserialize, Serialize};

use crate::field::FieldElement;
use crate::linalg::{FieldMatrix, MatrixData};

use super::{EncoderKind, Scheme, SchemeAux, SchemeError, SchemeParams};

/// The serialized form of a [`Scheme`]. Field names are part of the file
/// format; see the crate README for the layout.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SchemeDocument {
    pub params: SchemeParams,
    pub encoder_kind: EncoderKind,
    pub basis_count: usize,
    pub message_len: usize,
    pub broadcast_len: usize,
    pub key_generators: Vec<MatrixData>,
    #[serde(default, skip_serializing_if = "AuxData::is_empty")]
    pub aux: AuxData,
}

/// Serialized kind-specific data; absent fields are omitted from the JSON.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct AuxData {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eval_points: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mds_rows: Option<MatrixData>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner: Option<Box<SchemeDocument>>,
}

impl AuxData {
    pub fn is_empty(&self) -> bool {
        self.eval_points.is_none() && self.mds_rows.is_none() && self.inner.is_none()
    }
}

impl Scheme {
    pub fn to_document(&self) -> SchemeDocument {
        SchemeDocument {
            params: self.params,
            encoder_kind: self.encoder_kind,
            basis_count: self.basis_count,
            message_len: self.message_len,
            broadcast_len: self.broadcast_len,
            key_generators: self.key_generators.iter().map(FieldMatrix::to_data).collect(),
            aux: AuxData {
                eval_points: self
                    .aux
                    .eval_points
                    .as_ref()
                    .map(|pts| pts.iter().map(|e| e.value()).collect()),
                mds_rows: self.aux.mds_rows.as_ref().map(FieldMatrix::to_data),
                inner: self.aux.inner.as_ref().map(|s| Box::new(s.to_document())),
            },
        }
    }

    /// Rebuilds and fully validates a scheme from its document form.
    pub fn from_document(doc: &SchemeDocument) -> Result<Scheme, SchemeError> {
        let modulus = doc.params.modulus;
        let load_matrix = |data: &MatrixData, what: &str| -> Result<FieldMatrix, SchemeError> {
            if let Some(&bad) = data.entries.iter().find(|&&v| v >= modulus.get()) {
                return Err(SchemeError::Document(format!(
                    "{what} entry {bad} is out of range for GF({modulus})"
                )));
            }
            FieldMatrix::from_data(modulus, data).map_err(SchemeError::from)
        };
        let key_generators = doc
            .key_generators
            .iter()
            .map(|d| load_matrix(d, "key generator"))
            .collect::<Result<Vec<_>, _>>()?;
        let eval_points = doc
            .aux
            .eval_points
            .as_ref()
            .map(|pts| -> Result<Vec<FieldElement>, SchemeError> {
                pts.iter()
                    .map(|&v| {
                        if v >= modulus.get() {
                            Err(SchemeError::Document(format!(
                                "eval point {v} is out of range for GF({modulus})"
                            )))
                        } else {
                            Ok(modulus.element(v))
                        }
                    })
                    .collect()
            })
            .transpose()?;
        let mds_rows = doc
            .aux
            .mds_rows
            .as_ref()
            .map(|d| load_matrix(d, "mds_rows"))
            .transpose()?;
        let inner = doc
            .aux
            .inner
            .as_ref()
            .map(|d| Scheme::from_document(d).map(Box::new))
            .transpose()?;
        let scheme = Scheme {
            params: doc.params,
            encoder_kind: doc.encoder_kind,
            basis_count: doc.basis_count,
            message_len: doc.message_len,
            broadcast_len: doc.broadcast_len,
            key_generators,
            aux: SchemeAux {
                eval_points,
                mds_rows,
                inner,
            },
        };
        scheme.validate()?;
        Ok(scheme)
    }

    /// Pretty-printed JSON document, ending in a newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_document())
            .expect("scheme documents always serialize");
        s.push('\n');
        s
    }

    /// Parses and validates a scheme from JSON.
    pub fn from_json(json: &str) -> Result<Scheme, SchemeError> {
        let doc: SchemeDocument =
            serde_json::from_str(json).map_err(|e| SchemeError::Document(e.to_string()))?;
        Scheme::from_document(&doc)
    }
}
