use alloc::vec::Vec;

use crate::refparse::ParsedCitedRef;

const AUTHOR_WEIGHT: f64 = 0.4;
const SOURCE_WEIGHT: f64 = 0.3;
const VOLUME_WEIGHT: f64 = 0.15;
const PAGE_WEIGHT: f64 = 0.15;

/// Character-level edit distance.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = alloc::vec![0; b.len() + 1];
    for (i, ca) in a.chars().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let substitution = prev[j] + usize::from(ca != *cb);
            cur[j + 1] = substitution.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        core::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// `1 - distance / max(len)`, with two empty strings counting as identical.
pub fn levenshtein_sim(a: &str, b: &str) -> f64 {
    let longest = a.chars().count().max(b.chars().count());
    if longest == 0 {
        return 1.0;
    }
    1.0 - levenshtein(a, b) as f64 / longest as f64
}

/// Similarity of two cited references in `[0, 1]`.
///
/// Matching DOIs decide outright (1 if equal, 0 if not). Years more than one
/// apart score 0. Otherwise the score is a weighted mean of author
/// similarity (0.4), source similarity (0.3), volume equality (0.15) and
/// page equality (0.15). A field missing on both sides earns half its
/// weight; missing on one side earns nothing. References whose fields are
/// all identical score 1.
pub fn ref_similarity(a: &ParsedCitedRef, b: &ParsedCitedRef) -> f64 {
    if let (Some(da), Some(db)) = (&a.doi, &b.doi) {
        return if da == db { 1.0 } else { 0.0 };
    }
    if let (Some(ya), Some(yb)) = (a.rpy, b.rpy) {
        if (ya - yb).abs() > 1 {
            return 0.0;
        }
    }
    if a.first_author == b.first_author
        && a.rpy == b.rpy
        && a.source == b.source
        && a.volume == b.volume
        && a.page == b.page
    {
        return 1.0;
    }

    let source = match (&a.source, &b.source) {
        (Some(x), Some(y)) => levenshtein_sim(x, y),
        (None, None) => 0.5,
        _ => 0.0,
    };
    AUTHOR_WEIGHT * levenshtein_sim(&a.first_author, &b.first_author)
        + SOURCE_WEIGHT * source
        + VOLUME_WEIGHT * field_eq(&a.volume, &b.volume)
        + PAGE_WEIGHT * field_eq(&a.page, &b.page)
}

fn field_eq(a: &Option<alloc::string::String>, b: &Option<alloc::string::String>) -> f64 {
    match (a, b) {
        (Some(x), Some(y)) if x == y => 1.0,
        (None, None) => 0.5,
        _ => 0.0,
    }
}
