//! On-disk artifact formats.
//!
//! CSVs use `,` and `\n`, reals are printed with 9 significant digits, and
//! every JSON sidecar sits next to its CSV with the extension swapped. Files
//! are written to a temporary name and renamed into place.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::{Days, NaiveDate};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::clustering::{ClusterAssignment, Dendrogram};
use crate::data::{parse_date, Mode, ProvenanceStep, Reject, SeriesMeta, SymbolicSeries, TimeSeries};
use crate::distances::{DistanceMatrix, MetricKind, MetricParams, Normalization};
use crate::error::FormatError;
use crate::evaluation::{ChVariant, SweepTable};
use crate::image::{load_external_features, FeatureVector};

/// Formats a real like C's `%.9g`.
pub fn fmt_real(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..9).contains(&exp) {
        trim_zeros(format!("{:.*}", (8 - exp) as usize, x))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa.to_string()), exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_real).unwrap_or_default()
}

/// Sidecar path for a CSV: same stem, `.json` extension.
pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

/// Writes `bytes` to a sibling temporary file, then renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), FormatError> {
    let io_err = |source| FormatError::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io_err)?;
    }
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.partial"));
    fs::write(&tmp, bytes).map_err(io_err)?;
    fs::rename(&tmp, path).map_err(io_err)
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new())
}

fn finish_csv(path: &Path, writer: csv::Writer<Vec<u8>>) -> Result<(), FormatError> {
    let bytes = writer.into_inner().map_err(|e| FormatError::Io {
        path: path.to_path_buf(),
        source: e.into_error(),
    })?;
    write_atomic(path, &bytes)
}

fn csv_write_err(path: &Path) -> impl Fn(csv::Error) -> FormatError + '_ {
    move |source| FormatError::Csv {
        path: path.to_path_buf(),
        source,
    }
}

fn invalid(path: &Path, message: impl Into<String>) -> FormatError {
    FormatError::Invalid {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

/// All records of a headed CSV, with its header.
fn read_csv(path: &Path) -> Result<(csv::StringRecord, Vec<csv::StringRecord>), FormatError> {
    let err = csv_write_err(path);
    let file = fs::File::open(path).map_err(|source| FormatError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new().from_reader(file);
    let header = reader.headers().map_err(&err)?.clone();
    let records = reader.records().collect::<Result<Vec<_>, _>>().map_err(&err)?;
    Ok((header, records))
}

fn expect_header(path: &Path, header: &csv::StringRecord, expected: &[&str]) -> Result<(), FormatError> {
    if header.iter().collect::<Vec<_>>() != expected {
        return Err(invalid(path, format!("expected header `{}`", expected.join(","))));
    }
    Ok(())
}

fn parse_real(path: &Path, cell: &str) -> Result<f64, FormatError> {
    cell.trim()
        .parse::<f64>()
        .map_err(|_| invalid(path, format!("`{cell}` is not a number")))
}

fn parse_int<T: std::str::FromStr>(path: &Path, cell: &str) -> Result<T, FormatError> {
    cell.trim()
        .parse::<T>()
        .map_err(|_| invalid(path, format!("`{cell}` is not an integer")))
}

/// Writes pre-formatted rows (header first) as CSV.
pub fn write_rows(path: &Path, rows: &[Vec<String>]) -> Result<(), FormatError> {
    let err = csv_write_err(path);
    let mut w = csv_writer();
    for row in rows {
        w.write_record(row).map_err(&err)?;
    }
    finish_csv(path, w)
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<(), FormatError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|source| FormatError::Json {
        path: path.to_path_buf(),
        source,
    })?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, FormatError> {
    let text = fs::read_to_string(path).map_err(|source| FormatError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| FormatError::Json {
        path: path.to_path_buf(),
        source,
    })
}

// ---- series -------------------------------------------------------------

/// Wide layout: `series_id,<date>,<date>,...`, one row per series.
pub fn write_series_csv(path: &Path, series: &[TimeSeries], start: NaiveDate) -> Result<(), FormatError> {
    let err = csv_write_err(path);
    let mut w = csv_writer();
    let len = series.first().map_or(0, TimeSeries::len);
    let mut header = vec!["series_id".to_string()];
    header.extend((0..len as u64).map(|i| (start + Days::new(i)).format("%Y-%m-%d").to_string()));
    w.write_record(&header).map_err(&err)?;
    for s in series {
        let mut row = vec![s.id.clone()];
        row.extend(s.values.iter().map(|&v| fmt_real(v)));
        w.write_record(&row).map_err(&err)?;
    }
    finish_csv(path, w)
}

/// Reads a wide series CSV written by [`write_series_csv`]; returns the series and the first date.
pub fn read_series_csv(path: &Path) -> Result<(Vec<TimeSeries>, NaiveDate), FormatError> {
    let (header, records) = read_csv(path)?;
    if header.get(0) != Some("series_id") {
        return Err(invalid(path, "first column must be `series_id`"));
    }
    let dates = header
        .iter()
        .skip(1)
        .map(|h| parse_date(h).ok_or_else(|| invalid(path, format!("`{h}` is not a date"))))
        .collect::<Result<Vec<_>, _>>()?;
    let Some(&start) = dates.first() else {
        return Err(invalid(path, "no date columns"));
    };
    if dates.iter().enumerate().any(|(i, &d)| d != start + Days::new(i as u64)) {
        return Err(invalid(path, "date columns are not consecutive days"));
    }
    let series = records
        .iter()
        .map(|r| {
            let values = r
                .iter()
                .skip(1)
                .map(|c| parse_real(path, c))
                .collect::<Result<Vec<_>, _>>()?;
            if values.len() != dates.len() {
                return Err(invalid(path, format!("row `{}` has {} values", &r[0], values.len())));
            }
            Ok(TimeSeries::complete(&r[0], values))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok((series, start))
}

/// `series_id,symbols` with symbols as a letter string.
pub fn write_symbolic_csv(path: &Path, series: &[SymbolicSeries]) -> Result<(), FormatError> {
    let err = csv_write_err(path);
    let mut w = csv_writer();
    w.write_record(["series_id", "symbols"]).map_err(&err)?;
    for s in series {
        w.write_record([s.id.as_str(), s.letters().as_str()]).map_err(&err)?;
    }
    finish_csv(path, w)
}

pub fn read_symbolic_csv(path: &Path) -> Result<Vec<SymbolicSeries>, FormatError> {
    let (header, records) = read_csv(path)?;
    expect_header(path, &header, &["series_id", "symbols"])?;
    records
        .iter()
        .map(|r| SymbolicSeries::from_letters(&r[0], &r[1]).map_err(|e| invalid(path, e.to_string())))
        .collect()
}

/// `series_id,item,category,store`; absent attributes are empty cells.
pub fn write_metadata_csv(path: &Path, series: &[TimeSeries]) -> Result<(), FormatError> {
    let err = csv_write_err(path);
    let mut w = csv_writer();
    w.write_record(["series_id", "item", "category", "store"])
        .map_err(&err)?;
    for s in series {
        let m = &s.meta;
        w.write_record([
            s.id.as_str(),
            m.item.as_str(),
            m.category.as_deref().unwrap_or(""),
            m.store.as_deref().unwrap_or(""),
        ])
        .map_err(&err)?;
    }
    finish_csv(path, w)
}

pub fn read_metadata_csv(path: &Path) -> Result<BTreeMap<String, SeriesMeta>, FormatError> {
    let (header, records) = read_csv(path)?;
    expect_header(path, &header, &["series_id", "item", "category", "store"])?;
    let opt = |s: &str| (!s.is_empty()).then(|| s.to_string());
    Ok(records
        .iter()
        .map(|r| {
            (
                r[0].to_string(),
                SeriesMeta {
                    item: r[1].to_string(),
                    category: opt(&r[2]),
                    store: opt(&r[3]),
                },
            )
        })
        .collect())
}

/// `line_number,raw_row,reason`.
pub fn write_rejects_csv(path: &Path, rejects: &[Reject]) -> Result<(), FormatError> {
    let err = csv_write_err(path);
    let mut w = csv_writer();
    w.write_record(["line_number", "raw_row", "reason"]).map_err(&err)?;
    for r in rejects {
        w.write_record([
            r.line_number.to_string().as_str(),
            r.raw_row.as_str(),
            r.reason.as_str(),
        ])
        .map_err(&err)?;
    }
    finish_csv(path, w)
}

/// Collection-level facts plus every preprocessing step in order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProvenanceLog {
    pub mode: Mode,
    pub start: NaiveDate,
    pub series_len: usize,
    pub series_count: usize,
    pub steps: Vec<ProvenanceStep>,
}

// ---- distance matrices --------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixSidecar {
    pub metric: MetricKind,
    pub normalization: Normalization,
    pub params: MetricParams,
    pub symbolic: bool,
    pub lengths: Vec<usize>,
}

/// `id,<ids...>` header, then one row per id; sidecar holds the metric provenance.
pub fn write_matrix(path: &Path, matrix: &DistanceMatrix) -> Result<(), FormatError> {
    let err = csv_write_err(path);
    let mut w = csv_writer();
    let mut header = vec!["id".to_string()];
    header.extend(matrix.ids().iter().cloned());
    w.write_record(&header).map_err(&err)?;
    for (i, id) in matrix.ids().iter().enumerate() {
        let mut row = vec![id.clone()];
        row.extend(matrix.row(i).iter().map(|&v| fmt_real(v)));
        w.write_record(&row).map_err(&err)?;
    }
    finish_csv(path, w)?;
    write_json(
        &sidecar_path(path),
        &MatrixSidecar {
            metric: matrix.metric,
            normalization: matrix.normalization,
            params: matrix.params,
            symbolic: matrix.symbolic,
            lengths: matrix.lengths.clone(),
        },
    )
}

pub fn read_matrix(path: &Path) -> Result<DistanceMatrix, FormatError> {
    let meta: MatrixSidecar = read_json(&sidecar_path(path))?;
    let (header, records) = read_csv(path)?;
    if header.get(0) != Some("id") {
        return Err(invalid(path, "first column must be `id`"));
    }
    let ids: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    if records.len() != ids.len() || meta.lengths.len() != ids.len() {
        return Err(invalid(path, "matrix is not square or sidecar lengths disagree"));
    }
    let mut data = Vec::with_capacity(ids.len() * ids.len());
    for (r, id) in records.iter().zip(&ids) {
        if &r[0] != id || r.len() != ids.len() + 1 {
            return Err(invalid(path, format!("row for `{id}` is malformed")));
        }
        for cell in r.iter().skip(1) {
            data.push(parse_real(path, cell)?);
        }
    }
    let mut m = DistanceMatrix::from_parts(ids, data, meta.metric, meta.normalization, meta.params)
        .map_err(|e| invalid(path, e.to_string()))?;
    m.symbolic = meta.symbolic;
    m.lengths = meta.lengths;
    Ok(m)
}

// ---- assignments, dendrograms, sweeps -----------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssignmentSidecar {
    pub algorithm: String,
    pub metric: Option<String>,
    pub normalization: Option<String>,
    pub k: usize,
    pub seed: u64,
    pub objective: Option<f64>,
}

/// `series_id,cluster` plus a sidecar naming algorithm, metric, k and seed.
pub fn write_assignment(
    path: &Path,
    assignment: &ClusterAssignment,
    metric: Option<&str>,
    normalization: Option<&str>,
) -> Result<(), FormatError> {
    let err = csv_write_err(path);
    let mut w = csv_writer();
    w.write_record(["series_id", "cluster"]).map_err(&err)?;
    for (id, label) in assignment.ids.iter().zip(&assignment.labels) {
        w.write_record([id.as_str(), label.to_string().as_str()])
            .map_err(&err)?;
    }
    finish_csv(path, w)?;
    write_json(
        &sidecar_path(path),
        &AssignmentSidecar {
            algorithm: assignment.algorithm.clone(),
            metric: metric.map(str::to_string),
            normalization: normalization.map(str::to_string),
            k: assignment.k,
            seed: assignment.seed,
            objective: assignment.objective,
        },
    )
}

pub fn read_assignment(path: &Path) -> Result<(ClusterAssignment, AssignmentSidecar), FormatError> {
    let meta: AssignmentSidecar = read_json(&sidecar_path(path))?;
    let (header, records) = read_csv(path)?;
    expect_header(path, &header, &["series_id", "cluster"])?;
    let mut ids = Vec::with_capacity(records.len());
    let mut labels = Vec::with_capacity(records.len());
    for r in &records {
        ids.push(r[0].to_string());
        labels.push(parse_int::<usize>(path, &r[1])?);
    }
    let assignment = ClusterAssignment {
        ids,
        labels,
        k: meta.k,
        algorithm: meta.algorithm.clone(),
        seed: meta.seed,
        objective: meta.objective,
    };
    assignment.validate().map_err(|e| invalid(path, e.to_string()))?;
    Ok((assignment, meta))
}

/// `step,left,right,height,size`; steps count from 1.
pub fn write_dendrogram(path: &Path, dendrogram: &Dendrogram) -> Result<(), FormatError> {
    let err = csv_write_err(path);
    let mut w = csv_writer();
    w.write_record(["step", "left", "right", "height", "size"])
        .map_err(&err)?;
    for (s, m) in dendrogram.merges.iter().enumerate() {
        w.write_record([
            (s + 1).to_string(),
            m.left.to_string(),
            m.right.to_string(),
            fmt_real(m.height),
            m.size.to_string(),
        ])
        .map_err(&err)?;
    }
    finish_csv(path, w)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSidecar {
    pub algorithm: String,
    pub metric: Option<String>,
    pub normalization: Option<String>,
    pub ch_variant: ChVariant,
    pub seed: u64,
    /// Per-k notes for rows where an index could not be computed.
    pub notes: BTreeMap<usize, String>,
}

/// `k,ch,db,mpbi`; an index that could not be computed is an empty cell.
pub fn write_sweep(path: &Path, table: &SweepTable, sidecar: &SweepSidecar) -> Result<(), FormatError> {
    let err = csv_write_err(path);
    let mut w = csv_writer();
    w.write_record(["k", "ch", "db", "mpbi"]).map_err(&err)?;
    for r in &table.rows {
        w.write_record([r.k.to_string(), fmt_opt(r.ch), fmt_opt(r.db), fmt_opt(r.mpbi)])
            .map_err(&err)?;
    }
    finish_csv(path, w)?;
    let mut sidecar = sidecar.clone();
    sidecar
        .notes
        .extend(table.rows.iter().filter_map(|r| r.note.clone().map(|n| (r.k, n))));
    write_json(&sidecar_path(path), &sidecar)
}

// ---- features -----------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSidecar {
    pub extractor: String,
    pub dimensions: usize,
}

/// `series_id,f1,...,fm`; the sidecar records the extractor.
pub fn write_features(path: &Path, vectors: &[FeatureVector]) -> Result<(), FormatError> {
    let err = csv_write_err(path);
    let mut w = csv_writer();
    let m = vectors.first().map_or(0, |v| v.features.len());
    let mut header = vec!["series_id".to_string()];
    header.extend((1..=m).map(|i| format!("f{i}")));
    w.write_record(&header).map_err(&err)?;
    for v in vectors {
        let mut row = vec![v.series_id.clone()];
        row.extend(v.features.iter().map(|&f| fmt_real(f)));
        w.write_record(&row).map_err(&err)?;
    }
    finish_csv(path, w)?;
    write_json(
        &sidecar_path(path),
        &FeatureSidecar {
            extractor: vectors.first().map(|v| v.extractor.clone()).unwrap_or_default(),
            dimensions: m,
        },
    )
}

/// Reads a feature CSV; the extractor comes from the sidecar when one exists,
/// otherwise the vectors are tagged `external`.
pub fn read_features(path: &Path, known_ids: Option<&[String]>) -> Result<Vec<FeatureVector>, FormatError> {
    let mut vectors = load_external_features(path, known_ids).map_err(|e| invalid(path, e.to_string()))?;
    let side = sidecar_path(path);
    if side.exists() {
        let meta: FeatureSidecar = read_json(&side)?;
        vectors.iter_mut().for_each(|v| v.extractor = meta.extractor.clone());
    }
    Ok(vectors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distances::{distance_matrix, MetricSpec, SeriesView};

    #[test]
    fn nine_significant_digits() {
        assert_eq!(fmt_real(0.0), "0");
        assert_eq!(fmt_real(-0.0), "0");
        assert_eq!(fmt_real(1.0), "1");
        assert_eq!(fmt_real(0.1), "0.1");
        assert_eq!(fmt_real(2.0 / 3.0), "0.666666667");
        assert_eq!(fmt_real(123456789.4), "123456789");
        assert_eq!(fmt_real(1234567891.0), "1.23456789e+09");
        assert_eq!(fmt_real(0.0001), "0.0001");
        assert_eq!(fmt_real(0.00001234), "1.234e-05");
        assert_eq!(fmt_real(-2.5), "-2.5");
        assert_eq!(fmt_real(9.9999999999), "10");
    }

    #[test]
    fn matrix_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        let s = vec![
            TimeSeries::complete("a", vec![0.1, 0.4, 1.0]),
            TimeSeries::complete("b,c", vec![0.2, 0.2, 0.9]),
            TimeSeries::complete("d", vec![1.0, 0.1, 0.5]),
        ];
        let m = distance_matrix(SeriesView::Numeric(&s), &MetricSpec::new(MetricKind::Dtw)).unwrap();
        write_matrix(&path, &m).unwrap();
        let back = read_matrix(&path).unwrap();
        assert_eq!(back.ids(), m.ids());
        assert_eq!(back.lengths, vec![3, 3, 3]);
        for i in 0..3 {
            for j in 0..3 {
                assert!((back.get(i, j) - m.get(i, j)).abs() <= 1e-8 * m.get(i, j).max(1.0));
            }
        }
        // a second write of the parsed matrix is byte-identical
        let again = dir.path().join("m2.csv");
        write_matrix(&again, &back).unwrap();
        assert_eq!(fs::read(&path).unwrap(), fs::read(&again).unwrap());
        assert!(!dir.path().join(".m.csv.partial").exists());
    }

    #[test]
    fn series_and_symbols_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let start = parse_date("2020-01-30").unwrap();
        let s = vec![
            TimeSeries::complete("x", vec![0.1, 0.55, 1.0]),
            TimeSeries::complete("y", vec![1.0, 1.0, 0.1]),
        ];
        let p = dir.path().join("s.csv");
        write_series_csv(&p, &s, start).unwrap();
        let text = fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("series_id,2020-01-30,2020-01-31,2020-02-01\nx,0.1,0.55,1\n"));
        let (back, back_start) = read_series_csv(&p).unwrap();
        assert_eq!(back_start, start);
        assert_eq!(back[1].values, s[1].values);

        let sym = vec![SymbolicSeries::from_letters("x", "ACE").unwrap()];
        let q = dir.path().join("sym.csv");
        write_symbolic_csv(&q, &sym).unwrap();
        assert_eq!(read_symbolic_csv(&q).unwrap(), sym);
    }

    #[test]
    fn assignment_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let a = ClusterAssignment::from_groups(vec!["p".into(), "q".into(), "r".into()], &[1, 0, 1], 2, "kmeans", 9)
            .unwrap()
            .with_objective(0.25);
        let p = dir.path().join("assignment.csv");
        write_assignment(&p, &a, Some("euclidean"), None).unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "series_id,cluster\np,1\nq,2\nr,1\n");
        let (back, meta) = read_assignment(&p).unwrap();
        assert_eq!(back, a);
        assert_eq!(meta.metric.as_deref(), Some("euclidean"));
    }
}
