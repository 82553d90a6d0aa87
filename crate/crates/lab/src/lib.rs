//! Files, sessions and services around `rpys-core`: Web of Science and
//! Scopus ingestion, versioned analysis sessions with CSV export, the HTTP
//! API behind the interactive UI, and the `rpys` command-line tool.

pub mod cli;
pub mod config;
pub mod export;
pub mod ingest;
pub mod service;
pub mod session;
