use alloc::string::String;

use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

/// Uppercase, fold diacritics, drop punctuation and collapse whitespace.
///
/// `normalize_text(normalize_text(s)) == normalize_text(s)` for every `s`.
pub fn normalize_text(s: &str) -> String {
    let upper = s.to_uppercase();
    let mut out = String::with_capacity(upper.len());
    let mut pending_space = false;
    for c in upper.nfd().filter(|c| !is_combining_mark(*c)) {
        if c.is_whitespace() {
            pending_space = !out.is_empty();
        } else if c.is_alphanumeric() {
            if pending_space {
                out.push(' ');
                pending_space = false;
            }
            out.push(c);
        }
    }
    out
}

const DOI_PREFIXES: [&str; 7] = [
    "https://doi.org/",
    "http://doi.org/",
    "https://dx.doi.org/",
    "http://dx.doi.org/",
    "doi.org/",
    "doi:",
    "doi ",
];

/// Lowercased DOI without resolver URL or `doi:` prefix; `None` when nothing
/// is left.
pub fn normalize_doi(s: &str) -> Option<String> {
    let mut doi = s.trim().to_lowercase();
    while let Some(prefix) = DOI_PREFIXES.iter().find(|p| doi.starts_with(*p)) {
        doi = String::from(doi[prefix.len()..].trim_start());
    }
    if doi.is_empty() {
        None
    } else {
        Some(doi)
    }
}
