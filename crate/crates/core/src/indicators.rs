use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cluster::{ClusterId, Partition};
use crate::corpus::{Corpus, PublicationId};
use crate::spectrum::cluster_citation_count;

/// Number of citing years in which a cluster belongs to the top 10, 25 and
/// 50 percent of that year's cited clusters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TopShare {
    pub top10: u32,
    pub top25: u32,
    pub top50: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterIndicators {
    pub cluster_id: ClusterId,
    pub rpy: i32,
    /// Citing publications referencing the cluster.
    pub n_cr: u64,
    /// Percentile rank of `n_cr` among clusters of the same year.
    pub perc_yr: f64,
    /// Percentile rank of `n_cr` among all dated clusters.
    pub perc_all: f64,
    pub n_top: TopShare,
    /// Citing publications per citing year.
    pub citing_year_profile: BTreeMap<i32, u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IndicatorError {
    #[error("partition has no clusters")]
    EmptyPartition,
}

/// Per-cluster indicators for every dated cluster, ordered by year then id.
///
/// Percentile rank is `100 * (#clusters with smaller n_cr) / (set size - 1)`,
/// or 100 for a single-cluster set. A cluster is in the top k% of a citing
/// year when its count in that year reaches the nearest-rank (100 - k)th
/// percentile of the year's nonzero counts.
pub fn compute_indicators(
    partition: &Partition,
    corpus: &Corpus,
) -> Result<Vec<ClusterIndicators>, IndicatorError> {
    if partition.is_empty() {
        return Err(IndicatorError::EmptyPartition);
    }
    let citing_year: BTreeMap<&PublicationId, i32> = corpus
        .publications
        .iter()
        .map(|p| (&p.id, p.pub_year))
        .collect();

    let mut rows: Vec<ClusterIndicators> = partition
        .dated()
        .map(|(c, rpy)| {
            let citing: BTreeSet<&PublicationId> =
                c.members.iter().map(|m| &m.key.citing).collect();
            let mut profile = BTreeMap::new();
            for id in citing {
                if let Some(&year) = citing_year.get(id) {
                    *profile.entry(year).or_default() += 1;
                }
            }
            ClusterIndicators {
                cluster_id: c.cluster_id.clone(),
                rpy,
                n_cr: cluster_citation_count(c),
                perc_yr: 0.0,
                perc_all: 0.0,
                n_top: TopShare::default(),
                citing_year_profile: profile,
            }
        })
        .collect();
    rows.sort_by(|a, b| {
        a.rpy
            .cmp(&b.rpy)
            .then_with(|| a.cluster_id.cmp(&b.cluster_id))
    });

    let all: Vec<u64> = sorted(rows.iter().map(|r| r.n_cr));
    let mut by_year: BTreeMap<i32, Vec<u64>> = BTreeMap::new();
    for r in &rows {
        by_year.entry(r.rpy).or_default().push(r.n_cr);
    }
    for counts in by_year.values_mut() {
        counts.sort_unstable();
    }

    let mut per_citing_year: BTreeMap<i32, Vec<u64>> = BTreeMap::new();
    for r in &rows {
        for (&year, &n) in &r.citing_year_profile {
            per_citing_year.entry(year).or_default().push(n);
        }
    }
    let cutoffs: BTreeMap<i32, [u64; 3]> = per_citing_year
        .into_iter()
        .map(|(year, counts)| {
            let counts = sorted(counts.into_iter());
            (
                year,
                [
                    nearest_rank(&counts, 90),
                    nearest_rank(&counts, 75),
                    nearest_rank(&counts, 50),
                ],
            )
        })
        .collect();

    for r in &mut rows {
        r.perc_all = percentile_rank(&all, r.n_cr);
        r.perc_yr = percentile_rank(&by_year[&r.rpy], r.n_cr);
        for (year, &n) in &r.citing_year_profile {
            let [c10, c25, c50] = cutoffs[year];
            r.n_top.top10 += u32::from(n >= c10);
            r.n_top.top25 += u32::from(n >= c25);
            r.n_top.top50 += u32::from(n >= c50);
        }
    }
    Ok(rows)
}

fn sorted(values: impl Iterator<Item = u64>) -> Vec<u64> {
    let mut v: Vec<u64> = values.collect();
    v.sort_unstable();
    v
}

/// `sorted_set` must be ascending and contain `value`.
fn percentile_rank(sorted_set: &[u64], value: u64) -> f64 {
    if sorted_set.len() <= 1 {
        return 100.0;
    }
    let smaller = sorted_set.partition_point(|&x| x < value);
    100.0 * smaller as f64 / (sorted_set.len() - 1) as f64
}

/// Nearest-rank percentile of an ascending, non-empty slice.
fn nearest_rank(sorted_counts: &[u64], percentile: usize) -> u64 {
    let rank = (percentile * sorted_counts.len()).div_ceil(100).max(1);
    sorted_counts[rank - 1]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn percentile_rank_formula() {
        assert_eq!(percentile_rank(&[7], 7), 100.0);
        assert_eq!(percentile_rank(&[1, 2, 3], 1), 0.0);
        assert_eq!(percentile_rank(&[1, 2, 3], 2), 50.0);
        assert_eq!(percentile_rank(&[1, 2, 3], 3), 100.0);
        assert_eq!(percentile_rank(&[2, 2, 5], 2), 0.0);
        assert_eq!(percentile_rank(&[2, 2, 5], 5), 100.0);
    }

    #[test]
    fn nearest_rank_cutoffs() {
        let v = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10];
        assert_eq!(nearest_rank(&v, 90), 9);
        assert_eq!(nearest_rank(&v, 75), 8);
        assert_eq!(nearest_rank(&v, 50), 5);
        assert_eq!(nearest_rank(&[4], 90), 4);
        assert_eq!(nearest_rank(&[1, 3], 50), 1);
    }

    #[test]
    fn empty_partition() {
        let corpus = Corpus::empty(crate::corpus::CorpusFormat::WosTagged);
        assert_eq!(
            compute_indicators(&Partition::default(), &corpus),
            Err(IndicatorError::EmptyPartition)
        );
    }
}
