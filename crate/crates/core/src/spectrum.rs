use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cluster::{Partition, RefCluster};

/// One referenced publication year of the spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumPoint {
    pub rpy: i32,
    /// Cited references attributed to `rpy`.
    pub ncr: u64,
    /// `ncr` minus the median `ncr` of the centered window.
    pub deviation: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumConfig {
    /// Width of the centered median window; odd.
    pub window: usize,
    /// Count a publication citing the same cluster several times once.
    pub dedup_pairs: bool,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        SpectrumConfig {
            window: 5,
            dedup_pairs: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpectrumError {
    #[error("no cited reference has a known publication year")]
    EmptyCorpus,
    #[error("median window must be odd and positive, got {0}")]
    InvalidWindow(usize),
}

/// Number of distinct citing publications referencing the cluster.
pub fn cluster_citation_count(cluster: &RefCluster) -> u64 {
    let citing: BTreeSet<_> = cluster.members.iter().map(|m| &m.key.citing).collect();
    citing.len() as u64
}

/// Count cited references per referenced year and attach median deviations.
///
/// The unit counted is the (citing publication, cluster) pair, or every
/// member when `dedup_pairs` is off. The result is dense from the earliest
/// to the latest dated cluster.
pub fn compute_spectrum(
    partition: &Partition,
    config: &SpectrumConfig,
) -> Result<Vec<SpectrumPoint>, SpectrumError> {
    check_window(config.window)?;
    let mut per_year: BTreeMap<i32, u64> = BTreeMap::new();
    for (cluster, year) in partition.dated() {
        let n = if config.dedup_pairs {
            cluster_citation_count(cluster)
        } else {
            cluster.len() as u64
        };
        *per_year.entry(year).or_default() += n;
    }
    let (Some((&first, _)), Some((&last, _))) =
        (per_year.first_key_value(), per_year.last_key_value())
    else {
        return Err(SpectrumError::EmptyCorpus);
    };
    let counts: Vec<u64> = (first..=last)
        .map(|y| per_year.get(&y).copied().unwrap_or(0))
        .collect();
    spectrum_from_counts(first, &counts, config.window)
}

/// Build a spectrum from consecutive yearly counts starting at `first_year`.
pub fn spectrum_from_counts(
    first_year: i32,
    counts: &[u64],
    window: usize,
) -> Result<Vec<SpectrumPoint>, SpectrumError> {
    check_window(window)?;
    let deviations = median_deviations(counts, window);
    Ok(counts
        .iter()
        .zip(deviations)
        .enumerate()
        .map(|(i, (&ncr, deviation))| SpectrumPoint {
            rpy: first_year + i as i32,
            ncr,
            deviation,
        })
        .collect())
}

fn check_window(window: usize) -> Result<(), SpectrumError> {
    if window % 2 == 1 {
        Ok(())
    } else {
        Err(SpectrumError::InvalidWindow(window))
    }
}

/// `counts[i]` minus the median of the window centered on `i`, truncated at
/// the ends. Even-length windows take the mean of the two middle values.
fn median_deviations(counts: &[u64], window: usize) -> Vec<f64> {
    let half = window / 2;
    let mut scratch = Vec::with_capacity(window);
    (0..counts.len())
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(counts.len());
            scratch.clear();
            scratch.extend_from_slice(&counts[lo..hi]);
            scratch.sort_unstable();
            let m = scratch.len();
            let median = if m % 2 == 1 {
                scratch[m / 2] as f64
            } else {
                (scratch[m / 2 - 1] as f64 + scratch[m / 2] as f64) / 2.0
            };
            counts[i] as f64 - median
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn deviations(counts: &[u64]) -> Vec<f64> {
        spectrum_from_counts(2000, counts, 5)
            .unwrap()
            .iter()
            .map(|p| p.deviation)
            .collect()
    }

    #[test]
    fn constant_series_has_no_deviation() {
        assert_eq!(deviations(&[4; 9]), alloc::vec![0.0; 9]);
    }

    #[test]
    fn single_spike() {
        assert_eq!(
            deviations(&[1, 1, 5, 1, 1]),
            alloc::vec![0.0, 0.0, 4.0, 0.0, 0.0]
        );
    }

    #[test]
    fn truncated_even_window_uses_mean_of_middle_pair() {
        // First point: window [0, 10, 20] -> median 10. Second: [0, 10, 20, 30] -> 15.
        let d = deviations(&[0, 10, 20, 30, 40, 50]);
        assert_eq!(d[0], -10.0);
        assert_eq!(d[1], -5.0);
        assert_eq!(d[2], 0.0);
        assert_eq!(d[4], 5.0);
        assert_eq!(d[5], 10.0);
    }

    #[test]
    fn window_must_be_odd() {
        assert_eq!(
            spectrum_from_counts(2000, &[1], 4),
            Err(SpectrumError::InvalidWindow(4))
        );
        assert_eq!(
            spectrum_from_counts(2000, &[1], 0),
            Err(SpectrumError::InvalidWindow(0))
        );
        assert_eq!(deviations(&[]), Vec::<f64>::new());
    }

    #[test]
    fn empty_partition_is_an_error() {
        assert_eq!(
            compute_spectrum(&Partition::default(), &SpectrumConfig::default()),
            Err(SpectrumError::EmptyCorpus)
        );
    }
}
