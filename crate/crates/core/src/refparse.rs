use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::corpus::{RawCitedRef, RefKey};
use crate::normalize::{normalize_doi, normalize_text};

/// Earliest accepted publication year, citing or referenced.
pub const MIN_YEAR: i32 = 1500;
/// Latest accepted publication year, citing or referenced.
pub const MAX_YEAR: i32 = 2100;

/// A cited reference split into the fields used for matching and counting.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedCitedRef {
    pub key: RefKey,
    /// Verbatim source string.
    pub raw: String,
    pub first_author: String,
    /// Referenced publication year.
    pub rpy: Option<i32>,
    pub source: Option<String>,
    pub volume: Option<String>,
    pub page: Option<String>,
    pub doi: Option<String>,
}

impl ParsedCitedRef {
    pub fn from_raw(raw: &RawCitedRef) -> Self {
        parse_cr_string(raw.key(), &raw.raw)
    }
}

/// Parse a cited-reference string. Never fails; fields that cannot be
/// recognized stay `None`.
///
/// The string is split on `", "` outside brackets. The first piece is the
/// first author. Later pieces are matched by shape:
///
/// | piece              | field          |
/// |--------------------|----------------|
/// | `2013`             | year           |
/// | `(2013) Rest`      | year, source   |
/// | `V7`               | volume         |
/// | `P84`, `pp. 84-88` | page           |
/// | `DOI 10.x/y`       | doi            |
///
/// The first unclaimed piece after the year becomes the source, and a bare
/// number right after the source is taken as the volume.
pub fn parse_cr_string(key: RefKey, raw: &str) -> ParsedCitedRef {
    let mut parsed = ParsedCitedRef {
        key,
        raw: raw.to_string(),
        first_author: String::new(),
        rpy: None,
        source: None,
        volume: None,
        page: None,
        doi: None,
    };

    let mut tokens = split_top_level(raw.trim()).into_iter();
    if let Some(first) = tokens.next() {
        parsed.first_author = normalize_text(first);
    }

    let mut previous_was_source = false;
    for token in tokens {
        let just_after_source = core::mem::take(&mut previous_was_source);
        if token.is_empty() {
            continue;
        }
        if parsed.rpy.is_none() {
            if let Some(year) = plain_year(token) {
                parsed.rpy = Some(year);
                continue;
            }
            if let Some((year, rest)) = parenthesized_year(token) {
                parsed.rpy = Some(year);
                if !rest.is_empty() && parsed.source.is_none() {
                    parsed.source = Some(normalize_text(rest));
                    previous_was_source = true;
                }
                continue;
            }
        }
        if parsed.doi.is_none() {
            if let Some(doi) = doi_token(token) {
                parsed.doi = Some(doi);
                continue;
            }
        }
        if parsed.volume.is_none() {
            if let Some(volume) = volume_token(token) {
                parsed.volume = Some(volume);
                continue;
            }
            if just_after_source {
                if let Some(volume) = bare_volume(token) {
                    parsed.volume = Some(volume);
                    continue;
                }
            }
        }
        if parsed.page.is_none() {
            if let Some(page) = page_token(token) {
                parsed.page = Some(page);
                continue;
            }
        }
        if parsed.source.is_none() && parsed.rpy.is_some() {
            parsed.source = Some(normalize_text(token));
            previous_was_source = true;
        }
    }
    parsed
}

/// Split on `", "` at bracket depth zero; pieces are trimmed.
fn split_top_level(s: &str) -> Vec<&str> {
    let bytes = s.as_bytes();
    let mut pieces = Vec::new();
    let mut depth = 0usize;
    let mut start = 0;
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'(' | b'[' => depth += 1,
            b')' | b']' => depth = depth.saturating_sub(1),
            b',' if depth == 0 && bytes.get(i + 1) == Some(&b' ') => {
                pieces.push(s[start..i].trim());
                start = i + 2;
                i += 1;
            }
            _ => {}
        }
        i += 1;
    }
    if start <= s.len() {
        pieces.push(s[start..].trim());
    }
    pieces
}

fn year_in_range(digits: &str) -> Option<i32> {
    if digits.len() != 4 || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let year: i32 = digits.parse().ok()?;
    (MIN_YEAR..=MAX_YEAR).contains(&year).then_some(year)
}

fn plain_year(token: &str) -> Option<i32> {
    year_in_range(token)
}

/// Scopus style `"(2013) Journal of Informetrics"`.
fn parenthesized_year(token: &str) -> Option<(i32, &str)> {
    let inner = token.strip_prefix('(')?;
    let (digits, rest) = inner.split_once(')')?;
    Some((year_in_range(digits)?, rest.trim()))
}

fn doi_token(token: &str) -> Option<String> {
    let head = token.get(..4)?;
    if !head.eq_ignore_ascii_case("DOI ") {
        return None;
    }
    let body = token[4..].trim();
    // WoS writes several DOIs as "DOI [10.a/b, 10.c/d]".
    let body = match body.strip_prefix('[') {
        Some(list) => list.trim_end_matches(']').split(", ").next().unwrap_or(""),
        None => body,
    };
    normalize_doi(body)
}

fn volume_token(token: &str) -> Option<String> {
    let rest = token.strip_prefix('V')?;
    if rest.starts_with(|c: char| c.is_ascii_digit()) && !rest.contains(' ') {
        Some(rest.to_uppercase())
    } else {
        None
    }
}

/// Scopus style `"7 (1)"` or `"65"`.
fn bare_volume(token: &str) -> Option<String> {
    let number = token.split(" (").next().unwrap_or(token).trim();
    if !number.is_empty() && number.bytes().all(|b| b.is_ascii_digit()) {
        Some(number.to_string())
    } else {
        None
    }
}

fn page_token(token: &str) -> Option<String> {
    if let Some(rest) = token
        .strip_prefix("pp. ")
        .or_else(|| token.strip_prefix("p. "))
    {
        let first = rest.split('-').next().unwrap_or("").trim();
        return (!first.is_empty()).then(|| first.to_uppercase());
    }
    let rest = token.strip_prefix('P')?;
    let valid = !rest.is_empty()
        && rest.chars().all(char::is_alphanumeric)
        && rest.chars().any(|c| c.is_ascii_digit());
    valid.then(|| rest.to_uppercase())
}
