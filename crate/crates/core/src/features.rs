//! Feature-document matrices: one per representation source, all sharing
//! the corpus document order so downstream similarity matrices align.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Text representation source producing a feature matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Vsm,
    Topic,
    Embed,
}

impl Source {
    pub fn name(self) -> &'static str {
        match self {
            Source::Vsm => "vsm",
            Source::Topic => "topic",
            Source::Embed => "embed",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "vsm" => Ok(Source::Vsm),
            "topic" => Ok(Source::Topic),
            "embed" => Ok(Source::Embed),
            other => Err(Error::InvalidConfig(format!("unknown source {other:?}"))),
        }
    }

    /// Canonical fusion order: vsm, topic, embed.
    pub const ALL: [Source; 3] = [Source::Vsm, Source::Topic, Source::Embed];
}

impl std::fmt::Display for Source {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// n x dim document-feature matrix for one source.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub source: Source,
    pub rows: Array2<f64>,
    pub doc_ids: Vec<String>,
}

impl FeatureMatrix {
    pub fn new(source: Source, rows: Array2<f64>, doc_ids: Vec<String>) -> Result<Self> {
        if rows.nrows() != doc_ids.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} feature rows vs {} document ids",
                rows.nrows(),
                doc_ids.len()
            )));
        }
        for ((r, c), &v) in rows.indexed_iter() {
            if !v.is_finite() {
                return Err(Error::NonFiniteFeature { row: r, col: c });
            }
        }
        Ok(FeatureMatrix { source, rows, doc_ids })
    }

    pub fn n(&self) -> usize {
        self.rows.nrows()
    }

    pub fn dim(&self) -> usize {
        self.rows.ncols()
    }
}
