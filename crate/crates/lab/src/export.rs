//! CSV exports of spectra and cluster tables.

use std::io::{self, Write};

use rpys_core::{ClusterIndicators, Partition, SpectrumPoint};
use thiserror::Error;

use crate::session::{AnalysisError, SessionSnapshot};

pub const SPECTRUM_HEADER: [&str; 3] = ["rpy", "ncr", "deviation"];
pub const CLUSTERS_HEADER: [&str; 9] = [
    "cluster_id",
    "canonical",
    "rpy",
    "n_cr",
    "perc_yr",
    "perc_all",
    "n_top10",
    "n_top25",
    "n_top50",
];

#[derive(Debug, Error)]
pub enum ExportError {
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl From<csv::Error> for ExportError {
    fn from(e: csv::Error) -> Self {
        ExportError::Io(e.into())
    }
}

/// Six decimals, ties to even, never `-0.000000`.
pub fn fixed6(x: f64) -> String {
    let s = format!("{x:.6}");
    match s.strip_prefix('-') {
        Some(rest) if rest.bytes().all(|b| b == b'0' || b == b'.') => rest.to_owned(),
        _ => s,
    }
}

struct Counting<W> {
    inner: W,
    n: u64,
}

impl<W: Write> Write for Counting<W> {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        let n = self.inner.write(buf)?;
        self.n += n as u64;
        Ok(n)
    }

    fn flush(&mut self) -> io::Result<()> {
        self.inner.flush()
    }
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<Counting<W>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Counting { inner: w, n: 0 })
}

fn finish<W: Write>(w: csv::Writer<Counting<W>>) -> Result<u64, ExportError> {
    let counting = w.into_inner().map_err(|e| e.into_error())?;
    Ok(counting.n)
}

/// Writes `rpy,ncr,deviation` rows and returns the number of bytes written.
pub fn write_spectrum_csv<W: Write>(spectrum: &[SpectrumPoint], w: W) -> Result<u64, ExportError> {
    let mut out = csv_writer(w);
    out.write_record(SPECTRUM_HEADER)?;
    for p in spectrum {
        out.write_record([p.rpy.to_string(), p.ncr.to_string(), fixed6(p.deviation)])?;
    }
    finish(out)
}

/// Writes one row per dated cluster, ordered by year then cluster id.
pub fn write_clusters_csv<W: Write>(
    rows: &[ClusterIndicators],
    partition: &Partition,
    w: W,
) -> Result<u64, ExportError> {
    let mut sorted: Vec<&ClusterIndicators> = rows.iter().collect();
    sorted.sort_by(|a, b| (a.rpy, &a.cluster_id).cmp(&(b.rpy, &b.cluster_id)));
    let mut out = csv_writer(w);
    out.write_record(CLUSTERS_HEADER)?;
    for r in sorted {
        let canonical = partition
            .get(&r.cluster_id)
            .map(|c| c.canonical.raw.as_str())
            .unwrap_or("");
        out.write_record([
            r.cluster_id.as_str(),
            canonical,
            &r.rpy.to_string(),
            &r.n_cr.to_string(),
            &fixed6(r.perc_yr),
            &fixed6(r.perc_all),
            &r.n_top.top10.to_string(),
            &r.n_top.top25.to_string(),
            &r.n_top.top50.to_string(),
        ])?;
    }
    finish(out)
}

pub fn export_spectrum_csv<W: Write>(s: &SessionSnapshot, w: W) -> Result<u64, ExportError> {
    write_spectrum_csv(&s.spectrum()?, w)
}

pub fn export_clusters_csv<W: Write>(s: &SessionSnapshot, w: W) -> Result<u64, ExportError> {
    write_clusters_csv(&s.indicators()?, s.partition(), w)
}
