//! Reference publication year spectroscopy (RPYS) analysis core.
//!
//! The crate takes an already-ingested [`Corpus`] of citing publications and
//! carries it through the analysis pipeline:
//!
//! 1. [`parse_cr_string`] turns raw cited-reference strings into structured
//!    [`ParsedCitedRef`]s.
//! 2. [`cluster_refs`] groups variant spellings of the same work into a
//!    [`Partition`] of [`RefCluster`]s, which analysts can refine with
//!    [`apply_decision`].
//! 3. [`compute_spectrum`] counts cited references per referenced publication
//!    year and [`detect_peaks`] finds years standing out from their median
//!    neighbourhood.
//! 4. [`compute_indicators`] ranks clusters within and across years, and
//!    [`fit_fixed_k`] / [`select_k`] split the annual series into growth
//!    segments.
//!
//! Everything here is a pure function over immutable inputs. The crate is
//! `no_std` and only needs `alloc`; file formats, persistence and the
//! service layer live in `rpys-lab`.

#![no_std]

extern crate alloc;

mod cluster;
mod corpus;
mod decision;
mod hash;
mod indicators;
mod normalize;
mod peaks;
mod refparse;
mod segments;
mod similarity;
mod spectrum;

pub use cluster::{
    cluster_refs, parse_corpus_refs, ClusterError, ClusterId, Partition, RefCluster,
    DEFAULT_THRESHOLD,
};
pub use corpus::{
    Corpus, CorpusFormat, Diagnostic, Publication, PublicationId, RawCitedRef, RefKey,
};
pub use decision::{apply_decision, DecisionError, DecisionKind, MergeDecision};
pub use indicators::{compute_indicators, ClusterIndicators, IndicatorError, TopShare};
pub use normalize::{normalize_doi, normalize_text};
pub use peaks::{attach_top_clusters, detect_peaks, top_clusters_for_year, Peak};
pub use refparse::{parse_cr_string, ParsedCitedRef, MAX_YEAR, MIN_YEAR};
pub use segments::{
    fit_fixed_k, ncr_series, segment_landmarks, select_k, Scale, Segment, SegmentError, SegmentFit,
    DEFAULT_MIN_LEN,
};
pub use similarity::{levenshtein, levenshtein_sim, ref_similarity};
pub use spectrum::{
    cluster_citation_count, compute_spectrum, spectrum_from_counts, SpectrumConfig, SpectrumError,
    SpectrumPoint,
};
