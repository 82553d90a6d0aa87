//! The `rpys` command line.
//!
//! Exit codes: 0 on success, 1 on usage errors, 2 when the input data or a
//! session file cannot be processed.

use std::ffi::OsString;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use rpys_core::Scale;

use crate::config::{resolve_port, LabConfig, PORT_ENV};
use crate::export::{export_spectrum_csv, fixed6};
use crate::ingest::{self, FormatChoice};
use crate::service::{router, serve, Store};
use crate::session::{create_session, SessionSnapshot};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "rpys",
    version,
    about = "Reference publication year spectroscopy workbench"
)]
pub struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScaleArg {
    Linear,
    Log1p,
}

impl From<ScaleArg> for Scale {
    fn from(s: ScaleArg) -> Scale {
        match s {
            ScaleArg::Linear => Scale::Linear,
            ScaleArg::Log1p => Scale::Log1p,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse an export file and create a session.
    Ingest {
        #[arg(long, value_enum, default_value_t = FormatChoice::Auto)]
        format: FormatChoice,
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
        #[arg(long, value_name = "FILE")]
        session: PathBuf,
        /// Similarity threshold for automatic clustering.
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Print the spectrum as CSV, or write it to a file.
    Spectrum {
        #[arg(long, value_name = "FILE")]
        session: PathBuf,
        #[arg(long, value_name = "FILE")]
        csv: Option<PathBuf>,
    },
    /// List peak years.
    Peaks {
        #[arg(long, value_name = "FILE")]
        session: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        min_deviation: Option<f64>,
        #[arg(long)]
        max_rpy: Option<i32>,
    },
    /// Fit growth segments to the spectrum.
    Segments {
        #[arg(long, value_name = "FILE")]
        session: PathBuf,
        #[arg(long)]
        k_max: Option<usize>,
        #[arg(long)]
        min_len: Option<usize>,
        #[arg(long, value_enum)]
        scale: Option<ScaleArg>,
    },
    /// Rank the clusters of one reference publication year.
    Clusters {
        #[arg(long, value_name = "FILE")]
        session: PathBuf,
        #[arg(long)]
        rpy: i32,
        #[arg(long)]
        top: Option<usize>,
    },
    /// Serve a session over HTTP.
    Serve {
        #[arg(long, value_name = "FILE")]
        session: PathBuf,
        #[arg(long)]
        port: Option<u16>,
    },
}

/// Failure of a subcommand, with the exit code it maps to.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

fn data_error(message: impl ToString) -> Failure {
    Failure {
        code: EXIT_DATA,
        message: message.to_string(),
    }
}

fn usage_error(message: impl ToString) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.to_string(),
    }
}

fn out_error(e: io::Error) -> Failure {
    data_error(format!("cannot write output: {e}"))
}

pub fn main_with_std_io<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = io::stdout();
    let stderr = io::stderr();
    run(args, &mut stdout.lock(), &mut stderr.lock())
}

/// Runs the command line `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(cli, out, err) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "rpys: {}", f.message);
            f.code
        }
    }
}

fn load_session(path: &Path) -> Result<SessionSnapshot, Failure> {
    SessionSnapshot::load(path).map_err(data_error)
}

fn execute(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), Failure> {
    let config = LabConfig::load_or_default(cli.config.as_deref()).map_err(usage_error)?;
    match cli.command {
        Command::Ingest {
            format,
            input,
            session,
            threshold,
        } => {
            let bytes = std::fs::read(&input)
                .map_err(|e| data_error(format!("{}: {e}", input.display())))?;
            let corpus = ingest::parse(&bytes, format)
                .map_err(|e| data_error(format!("{}: {e}", input.display())))?;
            for d in &corpus.diagnostics {
                let _ = writeln!(err, "{}:{}: {}", input.display(), d.line, d.message);
            }
            let mut analysis = config.analysis;
            if let Some(t) = threshold {
                analysis.threshold = t;
            }
            let snapshot = create_session(corpus, analysis).map_err(data_error)?;
            snapshot.save(&session).map_err(data_error)?;
            writeln!(
                out,
                "publications\trefs\tclusters\tversion\n{}\t{}\t{}\t{}",
                snapshot.corpus().publications.len(),
                snapshot.corpus().n_refs(),
                snapshot.partition().len(),
                snapshot.version()
            )
            .map_err(out_error)?;
        }
        Command::Spectrum { session, csv } => {
            let s = load_session(&session)?;
            match csv {
                Some(path) => {
                    let mut buf = Vec::new();
                    export_spectrum_csv(&s, &mut buf).map_err(data_error)?;
                    std::fs::write(&path, &buf)
                        .map_err(|e| data_error(format!("{}: {e}", path.display())))?;
                }
                None => {
                    export_spectrum_csv(&s, &mut *out).map_err(data_error)?;
                }
            }
        }
        Command::Peaks {
            session,
            min_deviation,
            max_rpy,
        } => {
            let s = load_session(&session)?;
            let peaks = s.peaks(min_deviation, max_rpy).map_err(data_error)?;
            writeln!(
                out,
                "rpy\tncr\tdeviation\ttop_cluster\ttop_n_cr\ttop_canonical"
            )
            .map_err(out_error)?;
            for p in peaks {
                let (cid, n, canonical) = match p.top_clusters.first() {
                    Some((cid, n)) => {
                        let canonical = s
                            .cluster(cid)
                            .map(|c| c.canonical.raw.as_str())
                            .unwrap_or("");
                        (cid.to_string(), n.to_string(), canonical)
                    }
                    None => (String::new(), String::new(), ""),
                };
                writeln!(
                    out,
                    "{}\t{}\t{}\t{cid}\t{n}\t{canonical}",
                    p.rpy,
                    p.ncr,
                    fixed6(p.deviation)
                )
                .map_err(out_error)?;
            }
        }
        Command::Segments {
            session,
            k_max,
            min_len,
            scale,
        } => {
            let s = load_session(&session)?;
            let report = s
                .segments(k_max, min_len, scale.map(Scale::from))
                .map_err(data_error)?;
            let _ = writeln!(
                err,
                "k={} bic={} total_sse={} scale={:?}",
                report.fit.k,
                fixed6(report.fit.bic),
                fixed6(report.fit.total_sse),
                report.fit.scale
            );
            writeln!(
                out,
                "segment\tstart_rpy\tend_rpy\tslope\tintercept\tsse\tlandmarks"
            )
            .map_err(out_error)?;
            for (i, (seg, marks)) in report
                .fit
                .segments
                .iter()
                .zip(&report.landmarks)
                .enumerate()
            {
                let marks: Vec<String> = marks.iter().map(|(id, n)| format!("{id}:{n}")).collect();
                writeln!(
                    out,
                    "{}\t{}\t{}\t{}\t{}\t{}\t{}",
                    i + 1,
                    seg.start_rpy,
                    seg.end_rpy,
                    fixed6(seg.slope),
                    fixed6(seg.intercept),
                    fixed6(seg.sse),
                    marks.join(",")
                )
                .map_err(out_error)?;
            }
        }
        Command::Clusters { session, rpy, top } => {
            let s = load_session(&session)?;
            let rows = s
                .clusters_for_year(rpy, top.unwrap_or(s.config().top_k))
                .map_err(data_error)?;
            writeln!(
                out,
                "rank\tcluster_id\tn_cr\tperc_yr\tperc_all\tn_top10\tn_top25\tn_top50\tcanonical"
            )
            .map_err(out_error)?;
            for r in rows {
                let i = &r.indicators;
                writeln!(
                    out,
                    "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                    r.rank,
                    i.cluster_id,
                    i.n_cr,
                    fixed6(i.perc_yr),
                    fixed6(i.perc_all),
                    i.n_top.top10,
                    i.n_top.top25,
                    i.n_top.top50,
                    r.canonical
                )
                .map_err(out_error)?;
            }
        }
        Command::Serve { session, port } => {
            let s = load_session(&session)?;
            let env = std::env::var(PORT_ENV).ok();
            let port = resolve_port(env.as_deref(), port, &config.service);
            let store = Arc::new(Store::new(
                config.analysis.clone(),
                config.service.data_dir.clone(),
            ));
            let path = session.clone();
            let id = store.insert(s, move |_| Some(path));
            let app = router(Arc::clone(&store), config.service.cors_origin.as_deref())
                .map_err(usage_error)?;
            let runtime = tokio::runtime::Runtime::new().map_err(data_error)?;
            runtime.block_on(async {
                let listener = tokio::net::TcpListener::bind(("127.0.0.1", port))
                    .await
                    .map_err(|e| data_error(format!("cannot listen on port {port}: {e}")))?;
                let addr = listener.local_addr().map_err(data_error)?;
                let _ = writeln!(err, "serving dataset {id} on http://{addr}");
                let _ = err.flush();
                serve(listener, app).await.map_err(data_error)
            })?;
        }
    }
    Ok(())
}
