#![allow(dead_code)]

pub mod oracle;

use std::collections::BTreeSet;

use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};
use rpys_core::{parse_cr_string, ParsedCitedRef, Partition, PublicationId, RefKey};

const SURNAMES: &[&str] = &[
    "Bornmann",
    "Marx",
    "Leydesdorff",
    "Thor",
    "Mutz",
    "Barth",
    "Kokol",
    "Garfield",
    "Price",
    "Merton",
    "Small",
    "Narin",
    "Moed",
    "Glanzel",
    "Egghe",
    "Hirsch",
    "Bradford",
    "Lotka",
    "Zipf",
    "Haunschild",
];
const SOURCES: &[&str] = &[
    "J INFORMETR",
    "SCIENTOMETRICS",
    "J ASSOC INF SCI TECH",
    "NATURE",
    "SCIENCE",
    "PHYS REV LETT",
    "EUR PHYS J PLUS",
    "RES POLICY",
];

pub fn key(citing: &str, position: u32) -> RefKey {
    RefKey {
        citing: PublicationId(citing.to_string()),
        position,
    }
}

struct Work {
    author: String,
    year: i32,
    source: String,
    volume: u32,
    page: u32,
    doi: Option<String>,
}

fn typo(rng: &mut StdRng, s: &str) -> String {
    let mut chars: Vec<char> = s.chars().collect();
    let at = rng.random_range(1..chars.len());
    match rng.random_range(0..3) {
        0 => {
            chars.remove(at);
        }
        1 => chars[at] = 'x',
        _ => chars.insert(at, 'e'),
    }
    chars.into_iter().collect()
}

/// `n` parsed references drawn from a smaller pool of works, many of them
/// perturbed variants (author typos, missing fields, year off by one, lost
/// DOI).
pub fn synthetic_refs(seed: u64, n: usize) -> Vec<ParsedCitedRef> {
    let mut rng = StdRng::seed_from_u64(seed);
    let n_works = (n / 3).max(1);
    let works: Vec<Work> = (0..n_works)
        .map(|i| {
            let surname = SURNAMES[rng.random_range(0..SURNAMES.len())];
            let initial = (b'A' + rng.random_range(0..26u8)) as char;
            Work {
                author: format!("{surname} {initial}"),
                year: rng.random_range(1990..1996),
                source: SOURCES[rng.random_range(0..SOURCES.len())].to_string(),
                volume: rng.random_range(1..12),
                page: rng.random_range(1..40),
                doi: rng.random_bool(0.25).then(|| format!("10.1000/w{i}")),
            }
        })
        .collect();

    (0..n)
        .map(|i| {
            let w = &works[rng.random_range(0..works.len())];
            let mut author = w.author.clone();
            let mut year = Some(w.year);
            let mut source = Some(w.source.clone());
            let mut volume = Some(w.volume);
            let mut page = Some(w.page);
            let mut doi = w.doi.clone();
            if rng.random_bool(0.3) {
                author = typo(&mut rng, &author);
            }
            if rng.random_bool(0.15) {
                source = Some(typo(&mut rng, source.as_deref().unwrap()));
            }
            if rng.random_bool(0.1) {
                source = None;
            }
            if rng.random_bool(0.15) {
                volume = None;
            }
            if rng.random_bool(0.15) {
                page = None;
            }
            if rng.random_bool(0.3) {
                doi = None;
            }
            if rng.random_bool(0.08) {
                year = Some(w.year + 1);
            }
            if rng.random_bool(0.03) {
                year = None;
            }
            let mut parts = vec![author];
            if let Some(y) = year {
                parts.push(y.to_string());
            }
            if let Some(s) = source {
                parts.push(s);
            }
            if let Some(v) = volume {
                parts.push(format!("V{v}"));
            }
            if let Some(p) = page {
                parts.push(format!("P{p}"));
            }
            if let Some(d) = doi {
                parts.push(format!("DOI {d}"));
            }
            let citing = format!("p{:03}", rng.random_range(0..(n / 2).max(1)));
            parse_cr_string(key(&citing, i as u32), &parts.join(", "))
        })
        .collect()
}

pub fn as_sets(p: &Partition) -> BTreeSet<BTreeSet<RefKey>> {
    p.clusters()
        .iter()
        .map(|c| c.members.iter().map(|m| m.key.clone()).collect())
        .collect()
}

pub fn is_partition_of(p: &Partition, refs: &[ParsedCitedRef]) -> bool {
    let mut seen = BTreeSet::new();
    for c in p.clusters() {
        if c.members.is_empty() {
            return false;
        }
        for m in &c.members {
            if !seen.insert(m.key.clone()) {
                return false;
            }
        }
    }
    seen == refs.iter().map(|r| r.key.clone()).collect()
}

/// Corpus with one publication per entry: (citing year, cited reference strings).
pub fn corpus(pubs: &[(i32, Vec<String>)]) -> rpys_core::Corpus {
    use rpys_core::{Corpus, CorpusFormat, Publication, RawCitedRef};
    let publications = pubs
        .iter()
        .enumerate()
        .map(|(i, (year, refs))| {
            let id = PublicationId(format!("p{i:04}"));
            Publication {
                id: id.clone(),
                title: format!("Paper {i}"),
                authors: vec!["Doe J".into()],
                pub_year: *year,
                source_title: "J TEST".into(),
                doi: None,
                raw_refs: refs
                    .iter()
                    .enumerate()
                    .map(|(pos, raw)| RawCitedRef {
                        raw: raw.clone(),
                        citing_id: id.clone(),
                        position: pos as u32,
                    })
                    .collect(),
            }
        })
        .collect();
    Corpus {
        publications,
        format: CorpusFormat::WosTagged,
        diagnostics: Vec::new(),
    }
}

/// A work cited `n` times by distinct publications, one reference each.
pub fn cited_by(raw: &str, n: usize, citing_year: i32) -> Vec<(i32, Vec<String>)> {
    (0..n)
        .map(|_| (citing_year, vec![raw.to_string()]))
        .collect()
}

pub fn partition_of(c: &rpys_core::Corpus) -> Partition {
    rpys_core::cluster_refs(
        &rpys_core::parse_corpus_refs(c),
        rpys_core::DEFAULT_THRESHOLD,
    )
    .unwrap()
}
