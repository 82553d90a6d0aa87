use std::collections::HashMap;

use rpys_core::{
    normalize_doi, Corpus, CorpusFormat, Diagnostic, Publication, PublicationId, RawCitedRef,
    MAX_YEAR, MIN_YEAR,
};

use super::{decode, IngestError};

/// One line of input with its byte span in the decoded text.
struct Line<'a> {
    number: usize,
    start: usize,
    end: usize,
    text: &'a str,
}

fn lines(text: &str) -> impl Iterator<Item = Line<'_>> {
    let mut offset = 0;
    text.split_inclusive('\n').enumerate().map(move |(i, raw)| {
        let start = offset;
        offset += raw.len();
        Line {
            number: i + 1,
            start,
            end: offset,
            text: raw.trim_end_matches('\n').trim_end_matches('\r'),
        }
    })
}

#[derive(Default)]
struct Record {
    first_line: usize,
    start: usize,
    fields: Vec<(String, Vec<String>)>,
    problem: Option<String>,
}

impl Record {
    fn values(&self, tag: &str) -> Option<&[String]> {
        self.fields
            .iter()
            .find(|(t, _)| t == tag)
            .map(|(_, v)| v.as_slice())
    }

    fn joined(&self, tag: &str) -> String {
        self.values(tag).map(|v| v.join(" ")).unwrap_or_default()
    }
}

/// Parse a Web of Science tagged plain-text export.
///
/// Records run from a `PT ` line to an `ER` line. Tag values continue on
/// lines indented by three spaces; every `CR` line, tag line included, is
/// one cited reference. Records without a usable `PY` year, unterminated
/// records and records with stray lines are rejected into the corpus
/// diagnostics.
pub fn parse_wos_export(bytes: &[u8]) -> Result<Corpus, IngestError> {
    let text = decode(bytes)?;
    let mut corpus = Corpus::empty(CorpusFormat::WosTagged);
    if text.trim().is_empty() {
        return Ok(corpus);
    }
    if !text.lines().any(|l| l.starts_with("PT ")) {
        // An export header with no records is still an export.
        return if text.starts_with("FN ") {
            Ok(corpus)
        } else {
            Err(IngestError::NotWosFormat)
        };
    }

    let mut seen: HashMap<PublicationId, usize> = HashMap::new();
    let mut current: Option<Record> = None;
    for line in lines(text) {
        if line.text.starts_with("PT ") {
            if let Some(open) = current.take() {
                reject(
                    &mut corpus,
                    open.first_line,
                    "record not terminated by ER".into(),
                );
            }
            current = Some(Record {
                first_line: line.number,
                start: line.start,
                fields: vec![("PT".into(), vec![line.text[3..].trim().to_string()])],
                problem: None,
            });
            continue;
        }
        let Some(record) = current.as_mut() else {
            // FN / VR / EF headers and blank lines between records.
            continue;
        };
        if line.text.trim_end() == "ER" {
            let record = current.take().unwrap_or_default();
            let span = &text.as_bytes()[record.start..line.end];
            finish(&mut corpus, &mut seen, record, span);
            continue;
        }
        if let Some(rest) = line.text.strip_prefix("   ") {
            match record.fields.last_mut() {
                Some((_, values)) => values.push(rest.trim().to_string()),
                None => note(record, line.number, "continuation line before any tag"),
            }
        } else if line.text.trim().is_empty() {
            continue;
        } else if let Some((tag, value)) = tag_line(line.text) {
            record
                .fields
                .push((tag.to_string(), vec![value.trim().to_string()]));
        } else {
            note(
                record,
                line.number,
                "line is neither a tag nor a three-space continuation",
            );
        }
    }
    if let Some(open) = current {
        reject(
            &mut corpus,
            open.first_line,
            "record not terminated by ER".into(),
        );
    }
    Ok(corpus)
}

fn tag_line(line: &str) -> Option<(&str, &str)> {
    let tag = line.get(..2)?;
    let valid_tag = tag
        .bytes()
        .all(|b| b.is_ascii_uppercase() || b.is_ascii_digit());
    let rest = &line[2..];
    if !valid_tag {
        return None;
    }
    if rest.is_empty() {
        return Some((tag, ""));
    }
    rest.strip_prefix(' ').map(|value| (tag, value))
}

fn note(record: &mut Record, line: usize, message: &str) {
    if record.problem.is_none() {
        record.problem = Some(format!("{message} (line {line})"));
    }
}

fn reject(corpus: &mut Corpus, line: usize, message: String) {
    corpus.diagnostics.push(Diagnostic { line, message });
}

fn finish(
    corpus: &mut Corpus,
    seen: &mut HashMap<PublicationId, usize>,
    record: Record,
    span: &[u8],
) {
    if let Some(problem) = record.problem {
        return reject(corpus, record.first_line, problem);
    }
    let year = match record.values("PY").and_then(|v| v.first()) {
        None => {
            return reject(
                corpus,
                record.first_line,
                "record has no PY (publication year)".into(),
            )
        }
        Some(py) => match py.trim().parse::<i32>() {
            Ok(y) if (MIN_YEAR..=MAX_YEAR).contains(&y) => y,
            _ => return reject(corpus, record.first_line, format!("invalid PY {py:?}")),
        },
    };

    let id = PublicationId::from_record_bytes(span);
    if let Some(first) = seen.get(&id) {
        return reject(
            corpus,
            record.first_line,
            format!("duplicate of the record at line {first}"),
        );
    }
    seen.insert(id.clone(), record.first_line);

    let raw_refs = record
        .values("CR")
        .unwrap_or_default()
        .iter()
        .filter(|r| !r.trim().is_empty())
        .enumerate()
        .map(|(position, raw)| RawCitedRef {
            raw: raw.clone(),
            citing_id: id.clone(),
            position: position as u32,
        })
        .collect();

    corpus.publications.push(Publication {
        id,
        title: record.joined("TI"),
        authors: record.values("AU").unwrap_or_default().to_vec(),
        pub_year: year,
        source_title: record.joined("SO"),
        doi: record
            .values("DI")
            .and_then(|v| v.first())
            .and_then(|d| normalize_doi(d)),
        raw_refs,
    });
}
