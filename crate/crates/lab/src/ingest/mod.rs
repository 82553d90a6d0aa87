//! Bibliographic export parsing: Web of Science tagged plain text and
//! Scopus CSV.

mod scopus;
mod wos;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use rpys_core::Corpus;

pub use scopus::parse_scopus_csv;
pub use wos::parse_wos_export;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum IngestError {
    #[error("input is not valid UTF-8 (first bad byte at offset {offset})")]
    Encoding { offset: usize },
    #[error("not a Web of Science tagged export: no line starts with \"PT \"")]
    NotWosFormat,
    #[error("not a Scopus CSV export: missing column(s) {}", missing.join(", "))]
    NotScopusFormat { missing: Vec<String> },
    #[error("could not recognize the input format")]
    UnknownFormat,
}

/// What [`detect_format`] recognized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DetectedFormat {
    WosTagged,
    ScopusCsv,
    Unknown,
}

/// Format requested by a caller.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum FormatChoice {
    #[default]
    Auto,
    Wos,
    Scopus,
}

/// WoS if a line in the first 100 starts with `"PT "`; Scopus if the first
/// line has a `References` header cell; otherwise unknown.
pub fn detect_format(bytes: &[u8]) -> DetectedFormat {
    let text = String::from_utf8_lossy(strip_bom(bytes));
    if text.lines().take(100).any(|l| l.starts_with("PT ")) {
        return DetectedFormat::WosTagged;
    }
    let first_line = text.lines().next().unwrap_or("");
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(first_line.as_bytes());
    let has_references = reader
        .records()
        .next()
        .and_then(Result::ok)
        .is_some_and(|r| r.iter().any(|cell| cell.trim() == "References"));
    if has_references {
        DetectedFormat::ScopusCsv
    } else {
        DetectedFormat::Unknown
    }
}

pub fn parse(bytes: &[u8], format: FormatChoice) -> Result<Corpus, IngestError> {
    match format {
        FormatChoice::Wos => parse_wos_export(bytes),
        FormatChoice::Scopus => parse_scopus_csv(bytes),
        FormatChoice::Auto => match detect_format(bytes) {
            DetectedFormat::WosTagged => parse_wos_export(bytes),
            DetectedFormat::ScopusCsv => parse_scopus_csv(bytes),
            DetectedFormat::Unknown if String::from_utf8_lossy(bytes).trim().is_empty() => {
                parse_wos_export(bytes)
            }
            DetectedFormat::Unknown => Err(IngestError::UnknownFormat),
        },
    }
}

fn strip_bom(bytes: &[u8]) -> &[u8] {
    bytes.strip_prefix(b"\xEF\xBB\xBF").unwrap_or(bytes)
}

fn decode(bytes: &[u8]) -> Result<&str, IngestError> {
    let body = strip_bom(bytes);
    let bom = bytes.len() - body.len();
    std::str::from_utf8(body).map_err(|e| IngestError::Encoding {
        offset: bom + e.valid_up_to(),
    })
}
