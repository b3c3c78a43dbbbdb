//! CSV ingestion for long (one observation per row) and wide (one series per row) layouts.

use std::collections::HashSet;
use std::fs::File;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::DataError;

/// One raw data point before alignment.
#[derive(Debug, Clone, PartialEq)]
pub struct RawObservation {
    pub series_id: String,
    pub date: NaiveDate,
    pub value: f64,
    pub category: Option<String>,
    pub store: Option<String>,
    /// 1-based line in the source file; 0 for observations built in memory.
    pub line: u64,
}

impl RawObservation {
    pub fn new(series_id: impl Into<String>, date: NaiveDate, value: f64) -> Self {
        Self {
            series_id: series_id.into(),
            date,
            value,
            category: None,
            store: None,
            line: 0,
        }
    }

    pub fn with_category(mut self, category: impl Into<String>) -> Self {
        self.category = Some(category.into());
        self
    }

    pub fn with_store(mut self, store: impl Into<String>) -> Self {
        self.store = Some(store.into());
        self
    }
}

/// Mapping from logical fields to header names in a long CSV.
///
/// `category` and `store` are optional: when the named column is absent the
/// field is left empty rather than reported as an error.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CsvSchema {
    pub series_id: String,
    pub date: String,
    pub value: String,
    pub category: String,
    pub store: String,
}

impl Default for CsvSchema {
    fn default() -> Self {
        Self {
            series_id: "series_id".into(),
            date: "date".into(),
            value: "value".into(),
            category: "category".into(),
            store: "store".into(),
        }
    }
}

/// A row that could not be turned into an observation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reject {
    pub line_number: u64,
    pub raw_row: String,
    pub reason: String,
}

/// Result of loading a CSV file: parsed observations plus rejected rows.
#[derive(Debug, Clone, Default)]
pub struct Loaded {
    pub observations: Vec<RawObservation>,
    pub rejects: Vec<Reject>,
}

pub fn parse_date(text: &str) -> Option<NaiveDate> {
    NaiveDate::parse_from_str(text.trim(), "%Y-%m-%d").ok()
}

fn parse_value(text: &str) -> Result<f64, String> {
    let t = text.trim();
    if t.is_empty() {
        return Err("empty value".into());
    }
    match t.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        Ok(_) => Err(format!("non-finite value `{t}`")),
        Err(_) => Err(format!("unparseable value `{t}`")),
    }
}

fn open_reader(path: &Path) -> Result<csv::Reader<File>, DataError> {
    let file = File::open(path).map_err(|source| DataError::Open {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(file))
}

fn optional(text: Option<&str>) -> Option<String> {
    text.map(str::trim).filter(|s| !s.is_empty()).map(str::to_owned)
}

fn raw_row(record: &csv::StringRecord) -> String {
    record.iter().collect::<Vec<_>>().join(",")
}

/// Loads a long-format CSV.
///
/// Rows whose date or value cannot be parsed are returned as [`Reject`]s.
/// A repeated `(series_id, store, date)` key is a hard error.
pub fn load_long_csv(path: &Path, schema: &CsvSchema) -> Result<Loaded, DataError> {
    let mut reader = open_reader(path)?;
    let csv_err = |source| DataError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let headers = reader.headers().map_err(csv_err)?.clone();
    let find = |name: &str| headers.iter().position(|h| h.trim() == name);
    let require = |name: &str| {
        find(name).ok_or_else(|| DataError::MissingColumn {
            path: path.to_path_buf(),
            column: name.to_owned(),
        })
    };
    let id_col = require(&schema.series_id)?;
    let date_col = require(&schema.date)?;
    let value_col = require(&schema.value)?;
    let category_col = find(&schema.category);
    let store_col = find(&schema.store);

    let mut out = Loaded::default();
    let mut seen: HashSet<(String, Option<String>, NaiveDate)> = HashSet::new();
    for record in reader.records() {
        let record = record.map_err(csv_err)?;
        let line = record.position().map_or(0, |p| p.line());
        let reject = |reason: String| Reject {
            line_number: line,
            raw_row: raw_row(&record),
            reason,
        };

        let (Some(id), Some(date_text), Some(value_text)) =
            (record.get(id_col), record.get(date_col), record.get(value_col))
        else {
            out.rejects
                .push(reject(format!("expected at least {} fields", headers.len())));
            continue;
        };
        let id = id.trim();
        if id.is_empty() {
            out.rejects.push(reject("empty series id".into()));
            continue;
        }
        let Some(date) = parse_date(date_text) else {
            out.rejects
                .push(reject(format!("unparseable date `{}`", date_text.trim())));
            continue;
        };
        let value = match parse_value(value_text) {
            Ok(v) => v,
            Err(reason) => {
                out.rejects.push(reject(reason));
                continue;
            }
        };
        let store = store_col.and_then(|c| optional(record.get(c)));
        if !seen.insert((id.to_owned(), store.clone(), date)) {
            return Err(DataError::DuplicateKey {
                series_id: id.to_owned(),
                date,
                line,
            });
        }
        out.observations.push(RawObservation {
            series_id: id.to_owned(),
            date,
            value,
            category: category_col.and_then(|c| optional(record.get(c))),
            store,
            line,
        });
    }
    Ok(out)
}

/// Loads a wide CSV: first column holds series ids, the remaining header cells are ISO dates.
/// Empty cells are missing observations; malformed cells are rejected.
pub fn load_wide_csv(path: &Path) -> Result<Loaded, DataError> {
    let mut reader = open_reader(path)?;
    let csv_err = |source| DataError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let headers = reader.headers().map_err(csv_err)?.clone();
    if headers.len() < 2 {
        return Err(DataError::Header {
            path: path.to_path_buf(),
            message: "expected series_id followed by at least one date column".into(),
        });
    }
    let dates = headers
        .iter()
        .skip(1)
        .map(|h| {
            parse_date(h).ok_or_else(|| DataError::Header {
                path: path.to_path_buf(),
                message: format!("`{h}` is not an ISO date"),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut out = Loaded::default();
    let mut seen = HashSet::new();
    for record in reader.records() {
        let record = record.map_err(csv_err)?;
        let line = record.position().map_or(0, |p| p.line());
        let id = record.get(0).unwrap_or("").trim().to_owned();
        if id.is_empty() {
            out.rejects.push(Reject {
                line_number: line,
                raw_row: raw_row(&record),
                reason: "empty series id".into(),
            });
            continue;
        }
        if !seen.insert(id.clone()) {
            return Err(DataError::DuplicateKey {
                series_id: id,
                date: dates[0],
                line,
            });
        }
        for (cell, &date) in record.iter().skip(1).zip(&dates) {
            if cell.trim().is_empty() {
                continue;
            }
            match parse_value(cell) {
                Ok(value) => out.observations.push(RawObservation {
                    line,
                    ..RawObservation::new(id.clone(), date, value)
                }),
                Err(reason) => out.rejects.push(Reject {
                    line_number: line,
                    raw_row: raw_row(&record),
                    reason: format!("{reason} on {date}"),
                }),
            }
        }
    }
    Ok(out)
}
