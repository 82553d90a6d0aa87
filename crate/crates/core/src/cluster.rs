use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Corpus, RefKey};
use crate::refparse::ParsedCitedRef;
use crate::similarity::ref_similarity;

/// Similarity at or above which two references in one block are linked.
pub const DEFAULT_THRESHOLD: f64 = 0.75;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClusterId(pub String);

impl ClusterId {
    /// Derived from the member keys, so the same member set always gets the
    /// same id. `keys` must be sorted.
    fn from_sorted_keys<'a>(keys: impl Iterator<Item = &'a RefKey>) -> Self {
        let encoded: Vec<String> = keys
            .map(|k| alloc::format!("{}\u{1e}{}", k.citing, k.position))
            .collect();
        let digest = crate::hash::short_digest(encoded.iter().map(String::as_bytes), 8);
        ClusterId(alloc::format!("c{digest}"))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ClusterId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Variant strings treated as one cited work.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RefCluster {
    pub cluster_id: ClusterId,
    /// Sorted by [`RefKey`].
    pub members: Vec<ParsedCitedRef>,
    /// Member whose raw string is most frequent (ties: smallest raw).
    pub canonical: ParsedCitedRef,
    /// Most frequent member year (ties: earliest); `None` when no member has one.
    pub rpy: Option<i32>,
}

impl RefCluster {
    /// Build a cluster, deriving id, canonical form and year from the members.
    ///
    /// # Panics
    ///
    /// Panics if `members` is empty.
    pub fn from_members(mut members: Vec<ParsedCitedRef>) -> Self {
        assert!(!members.is_empty(), "a cluster needs at least one member");
        members.sort_by(|a, b| a.key.cmp(&b.key));
        let cluster_id = ClusterId::from_sorted_keys(members.iter().map(|m| &m.key));

        let mut raw_counts: BTreeMap<&str, usize> = BTreeMap::new();
        for m in &members {
            *raw_counts.entry(m.raw.as_str()).or_default() += 1;
        }
        // BTreeMap iterates raw strings ascending, so the first maximum wins ties.
        let mut best: Option<(&str, usize)> = None;
        for (raw, n) in &raw_counts {
            if best.is_none_or(|(_, bn)| *n > bn) {
                best = Some((raw, *n));
            }
        }
        let canonical_raw = best.map(|(r, _)| r).unwrap_or_default();
        let canonical = members
            .iter()
            .find(|m| m.raw == canonical_raw)
            .cloned()
            .unwrap_or_else(|| members[0].clone());

        let rpy = majority_year(&members);
        RefCluster {
            cluster_id,
            members,
            canonical,
            rpy,
        }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

fn majority_year(members: &[ParsedCitedRef]) -> Option<i32> {
    let mut counts: BTreeMap<i32, usize> = BTreeMap::new();
    for y in members.iter().filter_map(|m| m.rpy) {
        *counts.entry(y).or_default() += 1;
    }
    let mut best: Option<(i32, usize)> = None;
    for (y, n) in counts {
        if best.is_none_or(|(_, bn)| n > bn) {
            best = Some((y, n));
        }
    }
    best.map(|(y, _)| y)
}

/// A set of clusters covering every parsed reference exactly once, kept
/// sorted by cluster id.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Partition {
    clusters: Vec<RefCluster>,
}

impl Partition {
    pub fn from_clusters(mut clusters: Vec<RefCluster>) -> Self {
        clusters.sort_by(|a, b| a.cluster_id.cmp(&b.cluster_id));
        Partition { clusters }
    }

    pub fn clusters(&self) -> &[RefCluster] {
        &self.clusters
    }

    pub fn into_clusters(self) -> Vec<RefCluster> {
        self.clusters
    }

    pub fn get(&self, id: &ClusterId) -> Option<&RefCluster> {
        self.clusters
            .binary_search_by(|c| c.cluster_id.cmp(id))
            .ok()
            .map(|i| &self.clusters[i])
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    pub fn n_refs(&self) -> usize {
        self.clusters.iter().map(RefCluster::len).sum()
    }

    /// Clusters with a known year.
    pub fn dated(&self) -> impl Iterator<Item = (&RefCluster, i32)> {
        self.clusters.iter().filter_map(|c| c.rpy.map(|y| (c, y)))
    }

    /// Map every member key to the index of its cluster.
    pub fn membership(&self) -> BTreeMap<&RefKey, usize> {
        let mut out = BTreeMap::new();
        for (i, c) in self.clusters.iter().enumerate() {
            for m in &c.members {
                out.insert(&m.key, i);
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClusterError {
    #[error("threshold must be in (0, 1], got {0}")]
    InvalidThreshold(f64),
}

/// Parse every raw reference of the corpus, in corpus order.
pub fn parse_corpus_refs(corpus: &Corpus) -> Vec<ParsedCitedRef> {
    corpus.raw_refs().map(ParsedCitedRef::from_raw).collect()
}

/// Group references whose similarity reaches `threshold`.
///
/// References are blocked by (year, first letter of first author); within a
/// block the clusters are the connected components of the
/// `similarity >= threshold` graph. References without a year are never
/// merged automatically and each become a singleton.
pub fn cluster_refs(refs: &[ParsedCitedRef], threshold: f64) -> Result<Partition, ClusterError> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(ClusterError::InvalidThreshold(threshold));
    }

    let mut blocks: BTreeMap<(i32, Option<char>), Vec<usize>> = BTreeMap::new();
    let mut clusters = Vec::new();
    for (i, r) in refs.iter().enumerate() {
        match r.rpy {
            Some(y) => blocks
                .entry((y, r.first_author.chars().next()))
                .or_default()
                .push(i),
            None => clusters.push(RefCluster::from_members(alloc::vec![r.clone()])),
        }
    }

    for members in blocks.values() {
        let mut sets = DisjointSets::new(members.len());
        for (a, &i) in members.iter().enumerate() {
            for (b, &j) in members.iter().enumerate().skip(a + 1) {
                if sets.find(a) != sets.find(b) && ref_similarity(&refs[i], &refs[j]) >= threshold {
                    sets.union(a, b);
                }
            }
        }
        let mut groups: BTreeMap<usize, Vec<ParsedCitedRef>> = BTreeMap::new();
        for (a, &i) in members.iter().enumerate() {
            groups
                .entry(sets.find(a))
                .or_default()
                .push(refs[i].clone());
        }
        clusters.extend(groups.into_values().map(RefCluster::from_members));
    }

    Ok(Partition::from_clusters(clusters))
}

struct DisjointSets {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        DisjointSets {
            parent: (0..n).collect(),
            rank: alloc::vec![0; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            core::cmp::Ordering::Less => self.parent[ra] = rb,
            core::cmp::Ordering::Greater => self.parent[rb] = ra,
            core::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
    }
}
