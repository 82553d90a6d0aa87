use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cluster::{ClusterId, Partition, RefCluster};
use crate::corpus::RefKey;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DecisionKind {
    /// Union of the target clusters.
    Merge { targets: Vec<ClusterId> },
    /// Move `members` out of `cluster` into a new cluster.
    Split {
        cluster: ClusterId,
        members: Vec<RefKey>,
    },
}

/// An analyst's manual correction of the automatic clustering.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergeDecision {
    #[serde(flatten)]
    pub kind: DecisionKind,
    /// Milliseconds since the Unix epoch, supplied by the caller.
    #[serde(default)]
    pub timestamp: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl MergeDecision {
    pub fn merge(targets: Vec<ClusterId>) -> Self {
        MergeDecision {
            kind: DecisionKind::Merge { targets },
            timestamp: 0,
            note: None,
        }
    }

    pub fn split(cluster: ClusterId, members: Vec<RefKey>) -> Self {
        MergeDecision {
            kind: DecisionKind::Split { cluster, members },
            timestamp: 0,
            note: None,
        }
    }

    pub fn at(mut self, timestamp: u64) -> Self {
        self.timestamp = timestamp;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecisionError {
    #[error("unknown cluster {0}")]
    UnknownCluster(ClusterId),
    #[error("invalid split subset: {0}")]
    InvalidSplitSubset(&'static str),
    #[error("merge needs at least one target")]
    EmptyMerge,
}

/// Apply one decision, returning the new partition. The input is untouched.
pub fn apply_decision(
    partition: &Partition,
    decision: &MergeDecision,
) -> Result<Partition, DecisionError> {
    match &decision.kind {
        DecisionKind::Merge { targets } => merge(partition, targets),
        DecisionKind::Split { cluster, members } => split(partition, cluster, members),
    }
}

fn merge(partition: &Partition, targets: &[ClusterId]) -> Result<Partition, DecisionError> {
    let targets: BTreeSet<&ClusterId> = targets.iter().collect();
    if targets.is_empty() {
        return Err(DecisionError::EmptyMerge);
    }
    for id in &targets {
        if partition.get(id).is_none() {
            return Err(DecisionError::UnknownCluster((*id).clone()));
        }
    }
    if targets.len() == 1 {
        return Ok(partition.clone());
    }

    let mut kept = Vec::with_capacity(partition.len() + 1 - targets.len());
    let mut merged = Vec::new();
    for c in partition.clusters() {
        if targets.contains(&c.cluster_id) {
            merged.extend(c.members.iter().cloned());
        } else {
            kept.push(c.clone());
        }
    }
    kept.push(RefCluster::from_members(merged));
    Ok(Partition::from_clusters(kept))
}

fn split(
    partition: &Partition,
    id: &ClusterId,
    keys: &[RefKey],
) -> Result<Partition, DecisionError> {
    let source = partition
        .get(id)
        .ok_or_else(|| DecisionError::UnknownCluster(id.clone()))?;
    let moved: BTreeSet<&RefKey> = keys.iter().collect();
    if moved.is_empty() {
        return Err(DecisionError::InvalidSplitSubset("empty subset"));
    }
    if moved.len() != keys.len() {
        return Err(DecisionError::InvalidSplitSubset("duplicate member"));
    }
    if moved.len() >= source.len() {
        return Err(DecisionError::InvalidSplitSubset("subset must be proper"));
    }
    let (out, stay): (Vec<_>, Vec<_>) = source
        .members
        .iter()
        .cloned()
        .partition(|m| moved.contains(&m.key));
    if out.len() != moved.len() {
        return Err(DecisionError::InvalidSplitSubset("member not in cluster"));
    }

    let mut clusters: Vec<RefCluster> = partition
        .clusters()
        .iter()
        .filter(|c| &c.cluster_id != id)
        .cloned()
        .collect();
    clusters.push(RefCluster::from_members(stay));
    clusters.push(RefCluster::from_members(out));
    Ok(Partition::from_clusters(clusters))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cluster::cluster_refs;
    use crate::corpus::PublicationId;
    use crate::refparse::{parse_cr_string, ParsedCitedRef};

    fn r(citing: &str, raw: &str) -> ParsedCitedRef {
        parse_cr_string(
            RefKey {
                citing: PublicationId(citing.into()),
                position: 0,
            },
            raw,
        )
    }

    fn sample() -> Partition {
        cluster_refs(
            &[
                r("a", "Smith J, 2005, NATURE, V1, P2"),
                r("b", "Smith J, 2005, NATURE, V1, P2"),
                r("c", "Smith J, 2005, NATURE, V1, P2"),
                r("d", "Smith J, 2004, NATURE, V1, P2"),
                r("e", "Jones K, 2010, CELL, V5, P6"),
            ],
            0.75,
        )
        .unwrap()
    }

    fn id_with_year(p: &Partition, y: i32) -> ClusterId {
        p.clusters()
            .iter()
            .find(|c| c.rpy == Some(y))
            .unwrap()
            .cluster_id
            .clone()
    }

    #[test]
    fn merge_takes_majority_year() {
        let p = sample();
        assert_eq!(p.len(), 3);
        let d = MergeDecision::merge(alloc::vec![id_with_year(&p, 2005), id_with_year(&p, 2004)]);
        let merged = apply_decision(&p, &d).unwrap();
        assert_eq!(merged.len(), 2);
        let big = merged.clusters().iter().find(|c| c.len() == 4).unwrap();
        assert_eq!(big.rpy, Some(2005));
        assert_eq!(merged.n_refs(), p.n_refs());
    }

    #[test]
    fn merge_then_split_restores_partition() {
        let p = sample();
        let small = id_with_year(&p, 2004);
        let moved: Vec<RefKey> = p
            .get(&small)
            .unwrap()
            .members
            .iter()
            .map(|m| m.key.clone())
            .collect();
        let merged = apply_decision(
            &p,
            &MergeDecision::merge(alloc::vec![id_with_year(&p, 2005), small]),
        )
        .unwrap();
        let big = merged
            .clusters()
            .iter()
            .find(|c| c.len() == 4)
            .unwrap()
            .cluster_id
            .clone();
        let restored = apply_decision(&merged, &MergeDecision::split(big, moved)).unwrap();
        assert_eq!(restored, p);
    }

    #[test]
    fn self_merge_is_identity() {
        let p = sample();
        let id = id_with_year(&p, 2010);
        assert_eq!(
            apply_decision(&p, &MergeDecision::merge(alloc::vec![id.clone(), id])).unwrap(),
            p
        );
    }

    #[test]
    fn rejects_bad_targets() {
        let p = sample();
        let ghost = ClusterId("c-missing".into());
        assert_eq!(
            apply_decision(&p, &MergeDecision::merge(alloc::vec![ghost.clone()])),
            Err(DecisionError::UnknownCluster(ghost.clone()))
        );
        assert_eq!(
            apply_decision(&p, &MergeDecision::merge(Vec::new())),
            Err(DecisionError::EmptyMerge)
        );
        assert!(matches!(
            apply_decision(&p, &MergeDecision::split(ghost, Vec::new())),
            Err(DecisionError::UnknownCluster(_))
        ));

        let c = p.get(&id_with_year(&p, 2005)).unwrap();
        let all: Vec<RefKey> = c.members.iter().map(|m| m.key.clone()).collect();
        let split = |keys: Vec<RefKey>| {
            apply_decision(&p, &MergeDecision::split(c.cluster_id.clone(), keys))
        };
        assert!(matches!(
            split(Vec::new()),
            Err(DecisionError::InvalidSplitSubset(_))
        ));
        assert!(matches!(
            split(all.clone()),
            Err(DecisionError::InvalidSplitSubset(_))
        ));
        assert!(matches!(
            split(alloc::vec![all[0].clone(), all[0].clone()]),
            Err(DecisionError::InvalidSplitSubset(_))
        ));
        let foreign = RefKey {
            citing: PublicationId("zzz".into()),
            position: 9,
        };
        assert!(matches!(
            split(alloc::vec![foreign]),
            Err(DecisionError::InvalidSplitSubset(_))
        ));
    }
}
