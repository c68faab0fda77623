//! Reading annual summary tables (normalized CSV) into an [`EventDataset`].

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use gridmap_core::ingest::{
    normalize_record, EventDataset, IngestError, NormalizeOptions, RawRecord, SourceFile, COLUMNS,
    COL_YEAR,
};

#[derive(Debug, thiserror::Error)]
pub enum ParseError {
    #[error("header does not match the input schema (missing: {missing:?}, unexpected: {unexpected:?})")]
    MalformedHeader {
        missing: Vec<String>,
        unexpected: Vec<String>,
    },
    #[error("row {row_index}: expected {expected} cells, found {found}")]
    RowArityMismatch {
        row_index: u32,
        expected: usize,
        found: usize,
    },
    #[error("row {row_index}: year cell {raw:?} does not match file year {year}")]
    YearMismatch { row_index: u32, raw: String, year: i32 },
    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: ParseError },
    #[error("{path}: {source}")]
    Record { path: PathBuf, source: IngestError },
    #[error("{path}: cannot determine the report year (no Year cell and no year in the file name)")]
    UnknownYear { path: PathBuf },
    #[error("{path}: invalid dataset JSON: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error(transparent)]
    Dataset(IngestError),
}

/// Behaviour on a bad data row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IngestMode {
    /// Abort on the first bad row.
    #[default]
    Strict,
    /// Skip bad rows, recording a warning for each.
    Lenient,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    pub mode: IngestMode,
    pub normalize: NormalizeOptions,
}

struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

fn read_table(content: &str) -> Result<Table, ParseError> {
    let content = content.strip_prefix('\u{feff}').unwrap_or(content);
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(content.as_bytes());
    let mut records = reader.records();
    let header: Vec<String> = match records.next() {
        Some(r) => r?.iter().map(|c| c.trim().to_string()).collect(),
        None => Vec::new(),
    };
    let expected: BTreeSet<&str> = COLUMNS.iter().copied().collect();
    let found: BTreeSet<&str> = header.iter().map(String::as_str).collect();
    if expected != found || header.len() != COLUMNS.len() {
        return Err(ParseError::MalformedHeader {
            missing: expected.difference(&found).map(|s| s.to_string()).collect(),
            unexpected: header
                .iter()
                .filter(|h| !expected.contains(h.as_str()))
                .cloned()
                .collect(),
        });
    }
    let mut rows = Vec::new();
    for record in records {
        rows.push(record?.iter().map(|c| c.trim().to_string()).collect::<Vec<_>>());
    }
    while rows.last().is_some_and(|r| r.iter().all(String::is_empty)) {
        rows.pop();
    }
    Ok(Table { header, rows })
}

fn to_record(header: &[String], row_index: u32, row: &[String], year: i32) -> Result<RawRecord, ParseError> {
    if row.len() != header.len() {
        return Err(ParseError::RowArityMismatch {
            row_index,
            expected: header.len(),
            found: row.len(),
        });
    }
    let fields: Vec<(String, String)> = header.iter().cloned().zip(row.iter().cloned()).collect();
    let record = RawRecord {
        year,
        row_index,
        fields,
    };
    let year_cell = record.get(COL_YEAR).unwrap_or("");
    if !year_cell.is_empty() && year_cell.parse::<i32>() != Ok(year) {
        return Err(ParseError::YearMismatch {
            row_index,
            raw: year_cell.to_string(),
            year,
        });
    }
    Ok(record)
}

/// One [`RawRecord`] per data row, in file order. Fully blank rows at the end
/// of the file are dropped.
pub fn parse_annual_summary(content: &str, year: i32) -> Result<Vec<RawRecord>, ParseError> {
    let table = read_table(content)?;
    table
        .rows
        .iter()
        .enumerate()
        .map(|(i, row)| to_record(&table.header, i as u32 + 1, row, year))
        .collect()
}

fn infer_year(path: &Path, table: &Table) -> Option<i32> {
    let year_col = table.header.iter().position(|h| h == COL_YEAR)?;
    let from_cells = table
        .rows
        .iter()
        .filter_map(|r| r.get(year_col))
        .find(|c| !c.is_empty())
        .and_then(|c| c.parse().ok());
    from_cells.or_else(|| {
        let stem = path.file_stem()?.to_str()?;
        let bytes = stem.as_bytes();
        (0..bytes.len().saturating_sub(3)).find_map(|i| {
            let window = &stem[i..i + 4];
            let boundary_ok = (i == 0 || !bytes[i - 1].is_ascii_digit())
                && (i + 4 == bytes.len() || !bytes[i + 4].is_ascii_digit());
            (boundary_ok && window.bytes().all(|b| b.is_ascii_digit()))
                .then(|| window.parse().ok())
                .flatten()
        })
    })
}

/// Loads and merges annual summary files. Each file is one report year, taken
/// from its Year cells (or, when those are blank, from a four-digit year in
/// the file name).
pub fn load_dataset<P: AsRef<Path>>(paths: &[P], options: &LoadOptions) -> Result<EventDataset, LoadError> {
    let mut events = Vec::new();
    let mut provenance = Vec::new();
    let mut warnings = Vec::new();
    for path in paths {
        let path = path.as_ref();
        let content = fs::read_to_string(path).map_err(|source| LoadError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let parse_err = |source| LoadError::Parse {
            path: path.to_path_buf(),
            source,
        };
        let table = read_table(&content).map_err(parse_err)?;
        let label = path.display().to_string();
        let year = if table.rows.is_empty() {
            infer_year(path, &table).unwrap_or(0)
        } else {
            infer_year(path, &table).ok_or_else(|| LoadError::UnknownYear {
                path: path.to_path_buf(),
            })?
        };
        let mut rejected = 0;
        for (i, row) in table.rows.iter().enumerate() {
            let row_index = i as u32 + 1;
            let outcome = to_record(&table.header, row_index, row, year)
                .map_err(parse_err)
                .and_then(|raw| {
                    normalize_record(&raw, &options.normalize).map_err(|source| LoadError::Record {
                        path: path.to_path_buf(),
                        source,
                    })
                });
            match outcome {
                Ok(event) => {
                    if event.restored_before_began() {
                        warnings.push(format!(
                            "{label}: row {row_index}: restoration precedes start (event {})",
                            event.event_id
                        ));
                    }
                    events.push(event);
                }
                Err(err) if options.mode == IngestMode::Lenient => {
                    rejected += 1;
                    warnings.push(format!("skipped row {row_index}: {err}"));
                }
                Err(err) => return Err(err),
            }
        }
        provenance.push(SourceFile {
            file: label,
            year,
            rows: table.rows.len(),
            rejected,
        });
    }
    EventDataset::new(events, provenance, warnings).map_err(LoadError::Dataset)
}

/// Canonical JSON: struct field order, events sorted by id, two-space indent,
/// trailing newline.
pub fn dataset_to_json(dataset: &EventDataset) -> String {
    let mut out = serde_json::to_string_pretty(dataset).expect("dataset serializes");
    out.push('\n');
    out
}

pub fn dataset_from_json(text: &str) -> Result<EventDataset, serde_json::Error> {
    serde_json::from_str(text)
}

/// Reads a dataset given as canonical JSON (`.json`) or as one or more CSV
/// annual summaries.
pub fn read_dataset<P: AsRef<Path>>(paths: &[P], options: &LoadOptions) -> Result<EventDataset, LoadError> {
    let is_json = |p: &Path| p.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    match paths {
        [single] if is_json(single.as_ref()) => {
            let path = single.as_ref();
            let text = fs::read_to_string(path).map_err(|source| LoadError::Io {
                path: path.to_path_buf(),
                source,
            })?;
            dataset_from_json(&text).map_err(|source| LoadError::Json {
                path: path.to_path_buf(),
                source,
            })
        }
        _ => load_dataset(paths, options),
    }
}
