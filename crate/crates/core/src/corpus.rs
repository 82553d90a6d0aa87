use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

/// Stable identifier of a citing publication, derived from its record bytes.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PublicationId(pub String);

impl PublicationId {
    /// Content hash of a record's byte span.
    pub fn from_record_bytes(bytes: &[u8]) -> Self {
        PublicationId(alloc::format!(
            "p{}",
            crate::hash::short_digest([bytes], 10)
        ))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for PublicationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Address of one cited reference: the citing publication and the 0-based
/// position in its reference list. Unique corpus-wide.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RefKey {
    pub citing: PublicationId,
    pub position: u32,
}

impl fmt::Display for RefKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.citing, self.position)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawCitedRef {
    /// Verbatim cited-reference string as exported.
    pub raw: String,
    pub citing_id: PublicationId,
    pub position: u32,
}

impl RawCitedRef {
    pub fn key(&self) -> RefKey {
        RefKey {
            citing: self.citing_id.clone(),
            position: self.position,
        }
    }
}

/// One citing record of the analysed publication set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Publication {
    pub id: PublicationId,
    pub title: String,
    pub authors: Vec<String>,
    /// Citing year.
    pub pub_year: i32,
    pub source_title: String,
    pub doi: Option<String>,
    /// Cited references in export order, duplicates kept.
    pub raw_refs: Vec<RawCitedRef>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CorpusFormat {
    WosTagged,
    ScopusCsv,
}

/// A rejected input record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    /// 1-based line where the rejected record starts.
    pub line: usize,
    pub message: String,
}

/// Parsed publication set. Every record encountered in the input is either
/// one of `publications` or one of `diagnostics`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corpus {
    pub publications: Vec<Publication>,
    pub format: CorpusFormat,
    pub diagnostics: Vec<Diagnostic>,
}

impl Corpus {
    pub fn empty(format: CorpusFormat) -> Self {
        Corpus {
            publications: Vec::new(),
            format,
            diagnostics: Vec::new(),
        }
    }

    pub fn n_refs(&self) -> usize {
        self.publications.iter().map(|p| p.raw_refs.len()).sum()
    }

    pub fn records_encountered(&self) -> usize {
        self.publications.len() + self.diagnostics.len()
    }

    pub fn raw_refs(&self) -> impl Iterator<Item = &RawCitedRef> {
        self.publications.iter().flat_map(|p| p.raw_refs.iter())
    }

    pub fn publication(&self, id: &PublicationId) -> Option<&Publication> {
        self.publications.iter().find(|p| &p.id == id)
    }
}
