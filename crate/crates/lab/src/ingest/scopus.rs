use std::collections::HashMap;

use rpys_core::{
    normalize_doi, Corpus, CorpusFormat, Diagnostic, Publication, PublicationId, RawCitedRef,
    MAX_YEAR, MIN_YEAR,
};

use super::{decode, IngestError};

const REQUIRED: [&str; 6] = [
    "Title",
    "Authors",
    "Year",
    "Source title",
    "DOI",
    "References",
];

/// Parse a Scopus CSV export (RFC 4180, header row required).
///
/// The `References` cell is split on `"; "`, except where the separator sits
/// inside a double-quoted span of the cell text. Rows with an unusable year
/// are rejected into the corpus diagnostics.
pub fn parse_scopus_csv(bytes: &[u8]) -> Result<Corpus, IngestError> {
    let text = decode(bytes)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(text.as_bytes());

    let headers = reader.headers().cloned().unwrap_or_default();
    let column: HashMap<&str, usize> = headers
        .iter()
        .enumerate()
        .map(|(i, h)| (h.trim(), i))
        .collect();
    let missing: Vec<String> = REQUIRED
        .iter()
        .filter(|c| !column.contains_key(*c))
        .map(|c| c.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(IngestError::NotScopusFormat { missing });
    }
    let idx = |name: &str| column[name];
    let (title, authors, year, source, doi, references) = (
        idx("Title"),
        idx("Authors"),
        idx("Year"),
        idx("Source title"),
        idx("DOI"),
        idx("References"),
    );

    let mut corpus = Corpus::empty(CorpusFormat::ScopusCsv);
    let mut seen: HashMap<PublicationId, usize> = HashMap::new();
    let mut row = csv::StringRecord::new();
    loop {
        let start = reader.position().clone();
        match reader.read_record(&mut row) {
            Ok(false) => break,
            Ok(true) => {}
            Err(e) => {
                corpus.diagnostics.push(Diagnostic {
                    line: start.line() as usize,
                    message: format!("unreadable row: {e}"),
                });
                break;
            }
        }
        let line = row.position().map_or(start.line(), |p| p.line()) as usize;
        let cell = |i: usize| row.get(i).unwrap_or("").trim();

        let py = cell(year);
        let pub_year = match py.parse::<i32>() {
            Ok(y) if (MIN_YEAR..=MAX_YEAR).contains(&y) => y,
            _ => {
                corpus.diagnostics.push(Diagnostic {
                    line,
                    message: format!("invalid Year {py:?}"),
                });
                continue;
            }
        };

        let end = reader.position().byte() as usize;
        let id = PublicationId::from_record_bytes(&text.as_bytes()[start.byte() as usize..end]);
        if let Some(first) = seen.get(&id) {
            corpus.diagnostics.push(Diagnostic {
                line,
                message: format!("duplicate of the row at line {first}"),
            });
            continue;
        }
        seen.insert(id.clone(), line);

        let raw_refs = split_references(cell(references))
            .into_iter()
            .enumerate()
            .map(|(position, raw)| RawCitedRef {
                raw: raw.to_string(),
                citing_id: id.clone(),
                position: position as u32,
            })
            .collect();
        corpus.publications.push(Publication {
            id,
            title: cell(title).to_string(),
            authors: split_authors(cell(authors)),
            pub_year,
            source_title: cell(source).to_string(),
            doi: normalize_doi(cell(doi)),
            raw_refs,
        });
    }
    Ok(corpus)
}

/// Split on `"; "` outside double-quoted spans; empty pieces are dropped.
fn split_references(cell: &str) -> Vec<&str> {
    let mut pieces = Vec::new();
    let mut in_quotes = false;
    let mut start = 0;
    let bytes = cell.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'"' => in_quotes = !in_quotes,
            b';' if !in_quotes && bytes.get(i + 1) == Some(&b' ') => {
                pieces.push(&cell[start..i]);
                start = i + 2;
                i += 1;
            }
            _ => {}
        }
        i += 1;
    }
    pieces.push(&cell[start..]);
    pieces
        .into_iter()
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .collect()
}

fn split_authors(cell: &str) -> Vec<String> {
    let separator = if cell.contains(';') { ";" } else { "., " };
    cell.split(separator)
        .map(|a| a.trim())
        .filter(|a| !a.is_empty())
        .map(|a| {
            if separator == "., " && !a.ends_with('.') {
                format!("{a}.")
            } else {
                a.to_string()
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literal_split() {
        assert_eq!(split_references("A; B; C"), ["A", "B", "C"]);
        assert_eq!(split_references(""), Vec::<&str>::new());
        assert_eq!(split_references("A;B"), ["A;B"]);
    }

    #[test]
    fn quoted_separator_is_kept() {
        assert_eq!(
            split_references("Smith J., \"Peaks; valleys\", (2001) Nature; Doe J., (2002) Cell"),
            [
                "Smith J., \"Peaks; valleys\", (2001) Nature",
                "Doe J., (2002) Cell"
            ]
        );
    }

    #[test]
    fn author_lists() {
        assert_eq!(
            split_authors("Bornmann L.; Marx W."),
            ["Bornmann L.", "Marx W."]
        );
        assert_eq!(
            split_authors("Bornmann L., Marx W."),
            ["Bornmann L.", "Marx W."]
        );
        assert!(split_authors("").is_empty());
    }
}
