#![allow(dead_code)]

use rand::rngs::StdRng;
use rand::seq::IndexedRandom;
use rand::{RngExt, SeedableRng};
use rpys_core::{Corpus, MergeDecision, RefKey};
use rpys_lab::config::SessionConfig;
use rpys_lab::ingest::parse_wos_export;
use rpys_lab::session::{advance, create_session, SessionSnapshot};

pub const WOS: &[u8] = include_bytes!("../fixtures/three_records.txt");
pub const SCOPUS: &[u8] = include_bytes!("../fixtures/three_records.csv");

/// A WoS tagged export with one record per `(year, cited references)`.
pub fn wos_text(records: &[(i32, Vec<String>)]) -> String {
    let mut out = String::from("FN Clarivate Analytics Web of Science\nVR 1.0\n");
    for (i, (year, refs)) in records.iter().enumerate() {
        out.push_str(&format!(
            "PT J\nAU Author{i}, A\nTI Record {i}\nSO TEST SOURCE\nPY {year}\n"
        ));
        for (j, r) in refs.iter().enumerate() {
            out.push_str(if j == 0 { "CR " } else { "   " });
            out.push_str(r);
            out.push('\n');
        }
        out.push_str("ER\n\n");
    }
    out
}

pub fn corpus(records: &[(i32, Vec<String>)]) -> Corpus {
    parse_wos_export(wos_text(records).as_bytes()).unwrap()
}

pub fn fixture_session() -> SessionSnapshot {
    create_session(parse_wos_export(WOS).unwrap(), SessionConfig::default()).unwrap()
}

/// Forty citing papers over six years with several recurring works, some
/// of them cited in two spellings.
pub fn workshop_corpus() -> Corpus {
    let works = [
        (
            "Garfield E, 1955, SCIENCE, V122, P108",
            "Garfield E., 1955, SCIENCE, V122, P108",
        ),
        (
            "Price DJD, 1965, SCIENCE, V149, P510",
            "Price D, 1965, SCIENCE, V149, P510",
        ),
        (
            "Merton RK, 1968, SCIENCE, V159, P56",
            "Merton RK, 1968, SCIENCE, V159, P56",
        ),
        (
            "Small H, 1973, J AM SOC INFORM SCI, V24, P265",
            "Small H, 1973, J AM SOC INF SCI, V24, P265",
        ),
        (
            "Hirsch JE, 2005, P NATL ACAD SCI USA, V102, P16569",
            "Hirsch J, 2005, P NATL ACAD SCI USA, V102, P16569",
        ),
        (
            "Bornmann L, 2013, J INFORMETR, V7, P84",
            "Bornman L, 2013, J INFORMETR, V7, P84",
        ),
    ];
    let mut rng = StdRng::seed_from_u64(42);
    let records: Vec<(i32, Vec<String>)> = (0..40)
        .map(|i| {
            let mut refs = Vec::new();
            for (a, b) in works {
                if rng.random_bool(0.6) {
                    refs.push(if rng.random_bool(0.3) { b } else { a }.to_string());
                }
            }
            refs.push(format!("Other{i} X, {}, MISC J, V1, P{i}", 1950 + i));
            (2015 + i % 6, refs)
        })
        .collect();
    corpus(&records)
}

/// A random decision that is valid for `s`: merging two clusters or
/// splitting a proper subset off a cluster with several members.
pub fn random_decision(rng: &mut StdRng, s: &SessionSnapshot, timestamp: u64) -> MergeDecision {
    let clusters = s.partition().clusters();
    let splittable: Vec<_> = clusters.iter().filter(|c| c.members.len() > 1).collect();
    if !splittable.is_empty() && rng.random_bool(0.4) {
        let c = splittable.choose(rng).unwrap();
        let n = rng.random_range(1..c.members.len());
        let members: Vec<RefKey> = c.members.sample(rng, n).map(|m| m.key.clone()).collect();
        MergeDecision::split(c.cluster_id.clone(), members).at(timestamp)
    } else {
        let picks: Vec<_> = clusters
            .sample(rng, 2)
            .map(|c| c.cluster_id.clone())
            .collect();
        MergeDecision::merge(picks).at(timestamp)
    }
}

/// Applies `n` random decisions, returning every intermediate snapshot.
pub fn random_script(seed: u64, start: &SessionSnapshot, n: usize) -> Vec<SessionSnapshot> {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut history = vec![start.clone()];
    for t in 0..n {
        let last = history.last().unwrap();
        let d = random_decision(&mut rng, last, t as u64 + 1);
        history.push(advance(last, d).unwrap());
    }
    history
}
