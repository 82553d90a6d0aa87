mod common;

use common::{cited_by, corpus, partition_of, synthetic_refs};
use proptest::prelude::*;
use rpys_core::{cluster_refs, compute_indicators, fit_fixed_k, segment_landmarks, Scale};

fn work(author: &str, year: i32) -> String {
    format!("{author}, {year}, J TEST, V1, P1")
}

#[test]
fn single_cluster_is_at_the_top() {
    let c = corpus(&cited_by(&work("Smith J", 1970), 3, 2020));
    let rows = compute_indicators(&partition_of(&c), &c).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].n_cr, 3);
    assert_eq!(rows[0].perc_yr, 100.0);
    assert_eq!(rows[0].perc_all, 100.0);
    assert_eq!(rows[0].citing_year_profile.get(&2020), Some(&3));
}

#[test]
fn within_year_percentiles() {
    let mut pubs = cited_by(&work("Able A", 1970), 1, 2020);
    pubs.extend(cited_by(&work("Baker B", 1970), 2, 2020));
    pubs.extend(cited_by(&work("Cole C", 1970), 3, 2020));
    let c = corpus(&pubs);
    let rows = compute_indicators(&partition_of(&c), &c).unwrap();
    let mut by_count: Vec<(u64, f64)> = rows.iter().map(|r| (r.n_cr, r.perc_yr)).collect();
    by_count.sort_by_key(|(n, _)| *n);
    assert_eq!(by_count, [(1, 0.0), (2, 50.0), (3, 100.0)]);
}

#[test]
fn always_most_cited_is_top_ten_every_year() {
    let star = work("Star S", 1965);
    let mut pubs = Vec::new();
    for (i, year) in [2017, 2018, 2019, 2020].into_iter().enumerate() {
        // The star is cited by three papers each year, ten other works by one.
        pubs.extend(cited_by(&star, 3, year));
        for j in 0..10 {
            pubs.push((
                year,
                vec![work(
                    &format!("Other{} {}", i, (b'A' + j) as char),
                    1990 + j as i32,
                )],
            ));
        }
    }
    let c = corpus(&pubs);
    let rows = compute_indicators(&partition_of(&c), &c).unwrap();
    let star_row = rows.iter().find(|r| r.rpy == 1965).unwrap();
    assert_eq!(star_row.n_cr, 12);
    assert_eq!(star_row.n_top.top10, 4);
    assert_eq!(star_row.n_top.top25, 4);
    assert_eq!(star_row.n_top.top50, 4);
    assert_eq!(star_row.citing_year_profile.len(), 4);
}

#[test]
fn landmarks_per_segment() {
    let mut pubs = cited_by(&work("Eight E", 1962), 8, 2020);
    pubs.extend(cited_by(&work("Five B", 1963), 5, 2020));
    pubs.extend(cited_by(&work("Five A", 1964), 5, 2020));
    pubs.extend(cited_by(&work("Lone L", 1967), 2, 2020));
    let c = corpus(&pubs);
    let p = partition_of(&c);
    let series: Vec<(i32, f64)> = (1960..1980).map(|y| (y, 1.0)).collect();
    let fit = fit_fixed_k(&series, 3, 5, Scale::Linear).unwrap();
    // Constant series: ties resolve to the earliest breakpoints, 1965 and 1970.
    assert_eq!(fit.breakpoints(), [1965, 1970]);
    let marks = segment_landmarks(&fit, &p, 2);
    let names: Vec<Vec<(String, u64)>> = marks
        .iter()
        .map(|seg| {
            seg.iter()
                .map(|(id, n)| (p.get(id).unwrap().canonical.raw.clone(), *n))
                .collect()
        })
        .collect();
    assert_eq!(
        names[0],
        [(work("Eight E", 1962), 8), (work("Five A", 1964), 5)]
    );
    assert_eq!(names[1], [(work("Lone L", 1967), 2)]);
    assert!(names[2].is_empty());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn indicator_invariants(seed in 0u64..10_000, n in 1usize..150) {
        let refs = synthetic_refs(seed, n);
        let p = cluster_refs(&refs, 0.75).unwrap();
        // One publication per citing id, citing years spread over 2016..2020.
        let mut pubs: std::collections::BTreeMap<&str, Vec<rpys_core::RawCitedRef>> = Default::default();
        for r in &refs {
            pubs.entry(r.key.citing.as_str()).or_default().push(rpys_core::RawCitedRef {
                raw: r.raw.clone(),
                citing_id: r.key.citing.clone(),
                position: r.key.position,
            });
        }
        let publications = pubs
            .into_iter()
            .map(|(id, raw_refs)| rpys_core::Publication {
                id: rpys_core::PublicationId(id.to_string()),
                title: String::new(),
                authors: Vec::new(),
                pub_year: 2016 + (id.bytes().map(u32::from).sum::<u32>() % 5) as i32,
                source_title: String::new(),
                doi: None,
                raw_refs,
            })
            .collect();
        let c = rpys_core::Corpus { publications, format: rpys_core::CorpusFormat::WosTagged, diagnostics: Vec::new() };
        let rows = compute_indicators(&p, &c).unwrap();
        for r in &rows {
            prop_assert!((0.0..=100.0).contains(&r.perc_yr));
            prop_assert!((0.0..=100.0).contains(&r.perc_all));
            prop_assert!(r.n_top.top10 <= r.n_top.top25 && r.n_top.top25 <= r.n_top.top50);
            prop_assert!(r.n_top.top50 as usize <= r.citing_year_profile.len());
        }
        for a in &rows {
            for b in rows.iter().filter(|b| b.rpy == a.rpy) {
                if a.n_cr < b.n_cr {
                    prop_assert!(a.perc_yr <= b.perc_yr);
                }
            }
        }
    }
}
