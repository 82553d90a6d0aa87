use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::cluster::{ClusterId, Partition, RefCluster};
use crate::spectrum::{cluster_citation_count, SpectrumPoint};

/// A referenced year standing out from its neighbourhood.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub rpy: i32,
    pub deviation: f64,
    pub ncr: u64,
    /// Most cited clusters of the year, filled by [`attach_top_clusters`].
    pub top_clusters: Vec<(ClusterId, u64)>,
}

/// Years whose deviation is positive and at least `min_deviation`, and whose
/// count is a strict local maximum against the adjacent years. Years after
/// `max_rpy` are skipped. Sorted by deviation, largest first.
pub fn detect_peaks(
    spectrum: &[SpectrumPoint],
    min_deviation: f64,
    max_rpy: Option<i32>,
) -> Vec<Peak> {
    let mut peaks: Vec<Peak> = spectrum
        .iter()
        .enumerate()
        .filter(|(_, p)| p.deviation > 0.0 && p.deviation >= min_deviation)
        .filter(|(_, p)| max_rpy.is_none_or(|max| p.rpy <= max))
        .filter(|(i, p)| {
            let left = i.checked_sub(1).map(|j| spectrum[j].ncr);
            let right = spectrum.get(i + 1).map(|q| q.ncr);
            left.is_none_or(|n| p.ncr > n) && right.is_none_or(|n| p.ncr > n)
        })
        .map(|(_, p)| Peak {
            rpy: p.rpy,
            deviation: p.deviation,
            ncr: p.ncr,
            top_clusters: Vec::new(),
        })
        .collect();
    peaks.sort_by(|a, b| b.deviation.total_cmp(&a.deviation).then(a.rpy.cmp(&b.rpy)));
    peaks
}

/// Order clusters by citing-publication count (descending), then canonical
/// raw string, then id.
pub(crate) fn rank_clusters<'a>(
    clusters: impl Iterator<Item = &'a RefCluster>,
) -> Vec<(&'a RefCluster, u64)> {
    let mut ranked: Vec<_> = clusters.map(|c| (c, cluster_citation_count(c))).collect();
    ranked.sort_by(|(a, na), (b, nb)| {
        nb.cmp(na)
            .then_with(|| a.canonical.raw.cmp(&b.canonical.raw))
            .then_with(|| a.cluster_id.cmp(&b.cluster_id))
    });
    ranked
}

/// The `k` most cited clusters dated `rpy`.
pub fn top_clusters_for_year(partition: &Partition, rpy: i32, k: usize) -> Vec<(ClusterId, u64)> {
    rank_clusters(partition.clusters().iter().filter(|c| c.rpy == Some(rpy)))
        .into_iter()
        .take(k)
        .map(|(c, n)| (c.cluster_id.clone(), n))
        .collect()
}

pub fn attach_top_clusters(peaks: &mut [Peak], partition: &Partition, k: usize) {
    for peak in peaks {
        peak.top_clusters = top_clusters_for_year(partition, peak.rpy, k);
    }
}
