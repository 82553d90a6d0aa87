//! Versioned analysis state and its on-disk format.
//!
//! A snapshot owns the corpus, the configuration and the list of events
//! applied since creation. The partition is cached but can always be rebuilt
//! by replaying the events over the automatic clustering.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rpys_core::{
    apply_decision, attach_top_clusters, cluster_refs, compute_indicators, compute_spectrum,
    detect_peaks, ncr_series, parse_corpus_refs, segment_landmarks, select_k,
    top_clusters_for_year, ClusterError, ClusterId, ClusterIndicators, Corpus, DecisionError,
    IndicatorError, MergeDecision, Partition, Peak, RefCluster, Scale, SegmentError, SegmentFit,
    SpectrumError, SpectrumPoint,
};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::config::SessionConfig;

pub const FORMAT_NAME: &str = "rpys-lab-session";
pub const FORMAT_VERSION: u64 = 1;

/// One step between consecutive snapshot versions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum SessionEvent {
    Decision { decision: MergeDecision },
    Reconfigure { config: SessionConfig },
}

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("corpus contains no publications")]
    EmptyCorpus,
    #[error(transparent)]
    Cluster(#[from] ClusterError),
    #[error(transparent)]
    Decision(#[from] DecisionError),
    #[error("the clustering threshold is fixed for the lifetime of a session")]
    ThresholdChange,
    #[error("corrupt session file: {0}")]
    CorruptSession(String),
    #[error("unsupported session format version {0}")]
    UnsupportedVersion(u64),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

/// Failure of a computation over a snapshot.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
    #[error(transparent)]
    Segment(#[from] SegmentError),
    #[error(transparent)]
    Indicator(#[from] IndicatorError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionSnapshot {
    version: u64,
    corpus_ref: String,
    corpus: Arc<Corpus>,
    initial_config: SessionConfig,
    config: SessionConfig,
    partition: Arc<Partition>,
    events: Vec<SessionEvent>,
}

/// A cluster of a given year together with its indicators.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedCluster {
    pub rank: usize,
    pub canonical: String,
    pub n_members: usize,
    #[serde(flatten)]
    pub indicators: ClusterIndicators,
}

/// Growth segments plus the most cited clusters inside each of them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SegmentReport {
    #[serde(flatten)]
    pub fit: SegmentFit,
    pub landmarks: Vec<Vec<(ClusterId, u64)>>,
}

pub fn corpus_ref(corpus: &Corpus) -> String {
    let bytes = serde_json::to_vec(corpus).expect("corpus serializes");
    hex_sha256(&bytes)
}

fn hex_sha256(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn initial_partition(corpus: &Corpus, threshold: f64) -> Result<Partition, ClusterError> {
    cluster_refs(&parse_corpus_refs(corpus), threshold)
}

pub fn create_session(
    corpus: Corpus,
    config: SessionConfig,
) -> Result<SessionSnapshot, SessionError> {
    if corpus.publications.is_empty() {
        return Err(SessionError::EmptyCorpus);
    }
    let partition = initial_partition(&corpus, config.threshold)?;
    Ok(SessionSnapshot {
        version: 1,
        corpus_ref: corpus_ref(&corpus),
        corpus: Arc::new(corpus),
        initial_config: config.clone(),
        config,
        partition: Arc::new(partition),
        events: Vec::new(),
    })
}

/// Returns the snapshot that results from applying `decision`; `s` is left as is.
pub fn advance(
    s: &SessionSnapshot,
    decision: MergeDecision,
) -> Result<SessionSnapshot, SessionError> {
    let partition = apply_decision(&s.partition, &decision)?;
    let mut next = s.clone();
    next.version += 1;
    next.partition = Arc::new(partition);
    next.events.push(SessionEvent::Decision { decision });
    Ok(next)
}

/// Replaces the analysis parameters. The threshold cannot change because
/// recorded decisions refer to clusters built with it.
pub fn reconfigure(
    s: &SessionSnapshot,
    config: SessionConfig,
) -> Result<SessionSnapshot, SessionError> {
    if config.threshold.to_bits() != s.config.threshold.to_bits() {
        return Err(SessionError::ThresholdChange);
    }
    let mut next = s.clone();
    next.version += 1;
    next.config = config.clone();
    next.events.push(SessionEvent::Reconfigure { config });
    Ok(next)
}

/// Rebuilds a snapshot from its corpus, the configuration it was created
/// with and its events.
pub fn replay(
    corpus: Corpus,
    initial: SessionConfig,
    events: &[SessionEvent],
) -> Result<SessionSnapshot, SessionError> {
    let mut s = create_session(corpus, initial)?;
    for event in events {
        s = match event {
            SessionEvent::Decision { decision } => advance(&s, decision.clone())?,
            SessionEvent::Reconfigure { config } => reconfigure(&s, config.clone())?,
        };
    }
    Ok(s)
}

impl SessionSnapshot {
    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn corpus_ref(&self) -> &str {
        &self.corpus_ref
    }

    pub fn corpus(&self) -> &Corpus {
        &self.corpus
    }

    pub fn config(&self) -> &SessionConfig {
        &self.config
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn events(&self) -> &[SessionEvent] {
        &self.events
    }

    pub fn decisions(&self) -> impl Iterator<Item = &MergeDecision> {
        self.events.iter().filter_map(|e| match e {
            SessionEvent::Decision { decision } => Some(decision),
            SessionEvent::Reconfigure { .. } => None,
        })
    }

    /// Configuration in effect at version 1.
    pub fn initial_config(&self) -> &SessionConfig {
        &self.initial_config
    }

    pub fn cluster(&self, id: &ClusterId) -> Option<&RefCluster> {
        self.partition.get(id)
    }

    pub fn spectrum(&self) -> Result<Vec<SpectrumPoint>, AnalysisError> {
        Ok(compute_spectrum(&self.partition, &self.config.spectrum())?)
    }

    pub fn peaks(
        &self,
        min_deviation: Option<f64>,
        max_rpy: Option<i32>,
    ) -> Result<Vec<Peak>, AnalysisError> {
        let spectrum = self.spectrum()?;
        let mut peaks = detect_peaks(
            &spectrum,
            min_deviation.unwrap_or(self.config.min_deviation),
            max_rpy.or(self.config.max_rpy),
        );
        attach_top_clusters(&mut peaks, &self.partition, self.config.top_k);
        Ok(peaks)
    }

    pub fn indicators(&self) -> Result<Vec<ClusterIndicators>, AnalysisError> {
        Ok(compute_indicators(&self.partition, &self.corpus)?)
    }

    /// The `top` most cited clusters of year `rpy`, best first.
    pub fn clusters_for_year(
        &self,
        rpy: i32,
        top: usize,
    ) -> Result<Vec<RankedCluster>, AnalysisError> {
        let ranked = top_clusters_for_year(&self.partition, rpy, top);
        let indicators = self.indicators()?;
        Ok(ranked
            .into_iter()
            .enumerate()
            .filter_map(|(i, (id, _))| {
                let row = indicators.iter().find(|r| r.cluster_id == id)?.clone();
                let cluster = self.partition.get(&id)?;
                Some(RankedCluster {
                    rank: i + 1,
                    canonical: cluster.canonical.raw.clone(),
                    n_members: cluster.members.len(),
                    indicators: row,
                })
            })
            .collect())
    }

    pub fn segments(
        &self,
        k_max: Option<usize>,
        min_len: Option<usize>,
        scale: Option<Scale>,
    ) -> Result<SegmentReport, AnalysisError> {
        let series = ncr_series(&self.spectrum()?);
        let fit = select_k(
            &series,
            k_max.unwrap_or(self.config.k_max),
            min_len.unwrap_or(self.config.min_len),
            scale.unwrap_or(self.config.scale),
        )?;
        let landmarks = segment_landmarks(&fit, &self.partition, self.config.top_k);
        Ok(SegmentReport { fit, landmarks })
    }
}

#[derive(Serialize)]
struct PayloadRef<'a> {
    version: u64,
    corpus_ref: &'a str,
    initial_config: &'a SessionConfig,
    config: &'a SessionConfig,
    events: &'a [SessionEvent],
    partition: &'a Partition,
    corpus: &'a Corpus,
}

#[derive(Deserialize)]
struct Payload {
    version: u64,
    corpus_ref: String,
    initial_config: SessionConfig,
    config: SessionConfig,
    events: Vec<SessionEvent>,
    partition: Partition,
    corpus: Corpus,
}

/// Serializes a snapshot into the session document.
pub fn to_document(s: &SessionSnapshot) -> Vec<u8> {
    let payload = serde_json::to_value(PayloadRef {
        version: s.version,
        corpus_ref: &s.corpus_ref,
        initial_config: &s.initial_config,
        config: &s.config,
        events: &s.events,
        partition: &s.partition,
        corpus: &s.corpus,
    })
    .expect("session serializes");
    let checksum = hex_sha256(&serde_json::to_vec(&payload).expect("value serializes"));
    let doc = serde_json::json!({
        "format": FORMAT_NAME,
        "format_version": FORMAT_VERSION,
        "checksum": checksum,
        "payload": payload,
    });
    let mut out = serde_json::to_vec_pretty(&doc).expect("value serializes");
    out.push(b'\n');
    out
}

/// Parses a session document, verifying its checksum and replaying its events.
pub fn from_document(bytes: &[u8]) -> Result<SessionSnapshot, SessionError> {
    let corrupt = |m: &str| SessionError::CorruptSession(m.to_owned());
    let doc: Value =
        serde_json::from_slice(bytes).map_err(|e| SessionError::CorruptSession(e.to_string()))?;
    if doc.get("format").and_then(Value::as_str) != Some(FORMAT_NAME) {
        return Err(corrupt("not a session document"));
    }
    let version = doc
        .get("format_version")
        .and_then(Value::as_u64)
        .ok_or_else(|| corrupt("missing format_version"))?;
    if version != FORMAT_VERSION {
        return Err(SessionError::UnsupportedVersion(version));
    }
    let checksum = doc
        .get("checksum")
        .and_then(Value::as_str)
        .ok_or_else(|| corrupt("missing checksum"))?;
    let payload = doc
        .get("payload")
        .ok_or_else(|| corrupt("missing payload"))?;
    if hex_sha256(&serde_json::to_vec(payload).expect("value serializes")) != checksum {
        return Err(corrupt("checksum mismatch"));
    }
    let p: Payload = serde_json::from_value(payload.clone())
        .map_err(|e| SessionError::CorruptSession(e.to_string()))?;
    if corpus_ref(&p.corpus) != p.corpus_ref {
        return Err(corrupt("corpus hash mismatch"));
    }
    if p.version != 1 + p.events.len() as u64 {
        return Err(corrupt("version does not match event count"));
    }
    let s = replay(p.corpus, p.initial_config, &p.events)
        .map_err(|e| SessionError::CorruptSession(format!("replay failed: {e}")))?;
    if s.config != p.config {
        return Err(corrupt("configuration does not match replay"));
    }
    // The replayed partition is authoritative; the cached copy only guards
    // against files edited by hand with a recomputed checksum.
    if *s.partition != p.partition {
        return Err(corrupt("cached partition does not match replay"));
    }
    Ok(s)
}

impl SessionSnapshot {
    /// Writes the session atomically (temporary file, then rename).
    pub fn save(&self, path: &Path) -> Result<(), SessionError> {
        let io = |source| SessionError::Io {
            path: path.to_owned(),
            source,
        };
        let bytes = to_document(self);
        let dir = path
            .parent()
            .filter(|p| !p.as_os_str().is_empty())
            .unwrap_or(Path::new("."));
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
        let result = (|| {
            let mut f = std::fs::File::create(&tmp)?;
            f.write_all(&bytes)?;
            f.sync_all()?;
            std::fs::rename(&tmp, path)
        })();
        if result.is_err() {
            let _ = std::fs::remove_file(&tmp);
        }
        result.map_err(io)
    }

    pub fn load(path: &Path) -> Result<Self, SessionError> {
        let bytes = std::fs::read(path).map_err(|source| SessionError::Io {
            path: path.to_owned(),
            source,
        })?;
        from_document(&bytes)
    }
}
