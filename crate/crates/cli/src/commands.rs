//! The subcommands. Each step reads its inputs from and writes its outputs to
//! the output directory, so a pipeline run and the same steps run one by one
//! leave identical files behind.

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;

use movepat::clustering::{
    agglomerative, cut_dendrogram, kmeans, kmedoids, ClusterAssignment, KMeansConfig, KMedoidsConfig,
};
use movepat::data::{
    load_long_csv, load_wide_csv, prepare, DateRange, Loaded, PrepareConfig, ProvenanceStep, SymbolicSeries, TimeSeries,
};
use movepat::distances::{distance_matrix, normalize_matrix, DistanceMatrix, MetricSpec, SeriesView};
use movepat::evaluation::{evaluate, sweep_k, EvalInputs, IndexSet, SweepAlgorithm, ValidityReport};
use movepat::image::{cluster_features, extract_features, load_external_features, rasterize, FeatureVector};
use movepat::io::{
    read_assignment, read_json, read_matrix, read_metadata_csv, read_series_csv, read_symbolic_csv, write_assignment,
    write_atomic, write_dendrogram, write_features, write_json, write_matrix, write_metadata_csv, write_rejects_csv,
    write_series_csv, write_sweep, write_symbolic_csv, ProvenanceLog, SweepSidecar,
};

use crate::config::{Algorithm, InputFormat, PipelineConfig};
use crate::error::CliError;
use crate::profile::{profile_clusters, write_profiles};

pub const SERIES_ORIGINAL: &str = "series_original.csv";
pub const SERIES_SCALED: &str = "series_scaled.csv";
pub const SERIES_SYMBOLIC: &str = "series_symbolic.csv";
pub const METADATA: &str = "metadata.csv";
pub const PROVENANCE: &str = "provenance.json";
pub const REJECTS: &str = "rejects.csv";
pub const FEATURES: &str = "features.csv";
pub const ASSIGNMENT: &str = "assignment.csv";
pub const DENDROGRAM: &str = "dendrogram.csv";
pub const VALIDITY: &str = "validity.json";
pub const SWEEP: &str = "sweep.csv";
pub const PROFILE: &str = "profile.csv";

pub fn matrix_file(cfg: &PipelineConfig) -> String {
    format!("distmat_{}.csv", cfg.metric.name())
}

/// Flags that change how a step reports rather than what it computes.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Exit with status 3 when any index is degenerate.
    pub strict: bool,
    /// Where `features` dumps one PGM per series.
    pub pgm_dir: Option<PathBuf>,
}

fn out(cfg: &PipelineConfig, name: &str) -> PathBuf {
    cfg.out.join(name)
}

fn require(path: PathBuf, command: &'static str) -> Result<PathBuf, CliError> {
    if path.exists() {
        Ok(path)
    } else {
        Err(CliError::Missing { path, command })
    }
}

fn create_out(cfg: &PipelineConfig) -> Result<(), CliError> {
    fs::create_dir_all(&cfg.out)
        .map_err(|e| CliError::Usage(format!("cannot create output directory {}: {e}", cfg.out.display())))
}

fn load(cfg: &PipelineConfig) -> Result<Loaded, CliError> {
    let input = cfg
        .input
        .as_deref()
        .ok_or_else(|| CliError::Usage("no input file: pass --input or set `input`".into()))?;
    Ok(match cfg.input_format {
        InputFormat::Long => load_long_csv(input, &cfg.schema)?,
        InputFormat::Wide => load_wide_csv(input)?,
    })
}

/// Explicit bounds, with a missing side taken from the data.
fn date_range(cfg: &PipelineConfig, loaded: &Loaded) -> Result<Option<DateRange>, CliError> {
    if cfg.start_date.is_none() && cfg.end_date.is_none() {
        return Ok(None);
    }
    let dates = loaded.observations.iter().map(|o| o.date);
    let (Some(lo), Some(hi)) = (dates.clone().min(), dates.max()) else {
        return Ok(None);
    };
    Ok(Some(DateRange::new(
        cfg.start_date.unwrap_or(lo),
        cfg.end_date.unwrap_or(hi),
    )?))
}

fn metric_spec(cfg: &PipelineConfig, kind: movepat::distances::MetricKind) -> MetricSpec {
    let mut spec = MetricSpec::new(kind).with_omega(cfg.omega).with_window(cfg.dtw_window);
    spec.params.scale_lo = cfg.scale_lo;
    spec.params.scale_hi = cfg.scale_hi;
    spec
}

pub fn preprocess(cfg: &PipelineConfig) -> Result<(), CliError> {
    let loaded = load(cfg)?;
    let prep_cfg = PrepareConfig {
        mode: cfg.mode,
        range: date_range(cfg, &loaded)?,
        max_missing_fraction: cfg.max_missing_fraction,
        fill: cfg.fill,
        scale_lo: cfg.scale_lo,
        scale_hi: cfg.scale_hi,
        thresholds: cfg.thresholds,
        outliers: cfg
            .outlier_metric
            .map(|m| (metric_spec(cfg, m), cfg.outlier_percentile)),
    };
    let prepared = prepare(&loaded.observations, &prep_cfg)?;

    create_out(cfg)?;
    let start = prepared.scaled.start;
    write_series_csv(&out(cfg, SERIES_ORIGINAL), &prepared.original.series, start)?;
    write_series_csv(&out(cfg, SERIES_SCALED), &prepared.scaled.series, start)?;
    write_symbolic_csv(&out(cfg, SERIES_SYMBOLIC), &prepared.symbolic)?;
    write_metadata_csv(&out(cfg, METADATA), &prepared.original.series)?;
    write_rejects_csv(&out(cfg, REJECTS), &loaded.rejects)?;

    let input = cfg
        .input
        .as_deref()
        .map(|p| p.display().to_string())
        .unwrap_or_default();
    let mut steps = vec![ProvenanceStep::new("load")
        .param("input", input)
        .param("observations", loaded.observations.len())
        .param("rejected_rows", loaded.rejects.len())];
    steps.extend(prepared.provenance);
    let log = ProvenanceLog {
        mode: cfg.mode,
        start,
        series_len: prepared.scaled.series_len(),
        series_count: prepared.scaled.len(),
        steps,
    };
    write_json(&out(cfg, PROVENANCE), &log)?;
    Ok(())
}

fn read_scaled(cfg: &PipelineConfig) -> Result<Vec<TimeSeries>, CliError> {
    Ok(read_series_csv(&require(out(cfg, SERIES_SCALED), "preprocess")?)?.0)
}

fn read_symbolic(cfg: &PipelineConfig) -> Result<Vec<SymbolicSeries>, CliError> {
    Ok(read_symbolic_csv(&require(out(cfg, SERIES_SYMBOLIC), "preprocess")?)?)
}

pub fn distmat(cfg: &PipelineConfig) -> Result<(), CliError> {
    let spec = metric_spec(cfg, cfg.metric);
    let raw = if cfg.symbolic_for(cfg.metric) {
        distance_matrix(SeriesView::Symbolic(&read_symbolic(cfg)?), &spec)?
    } else {
        distance_matrix(SeriesView::Numeric(&read_scaled(cfg)?), &spec)?
    };
    let matrix = normalize_matrix(&raw, cfg.normalization)?;
    write_matrix(&out(cfg, &matrix_file(cfg)), &matrix)?;
    Ok(())
}

/// Loads the matrix for the configured metric and refuses one built with other settings.
fn read_current_matrix(cfg: &PipelineConfig) -> Result<DistanceMatrix, CliError> {
    let path = require(out(cfg, &matrix_file(cfg)), "distmat")?;
    let m = read_matrix(&path)?;
    let spec = metric_spec(cfg, cfg.metric);
    let stale =
        m.normalization != cfg.normalization || m.symbolic != cfg.symbolic_for(cfg.metric) || m.params != spec.params;
    if stale {
        return Err(CliError::Stale(format!(
            "{} was built with other settings; rerun `distmat`",
            path.display()
        )));
    }
    Ok(m)
}

pub fn features(cfg: &PipelineConfig, opts: &RunOptions) -> Result<(), CliError> {
    let scaled = read_scaled(cfg)?;
    let vectors: Vec<FeatureVector> = match &cfg.features {
        Some(path) => {
            let ids: Vec<String> = scaled.iter().map(|s| s.id.clone()).collect();
            load_external_features(path, Some(&ids))?
        }
        None => extract_features(&scaled, cfg.raster_width, cfg.raster_height, cfg.raster_block)?,
    };
    write_features(&out(cfg, FEATURES), &vectors)?;
    if let Some(dir) = &opts.pgm_dir {
        fs::create_dir_all(dir).map_err(|e| CliError::Usage(format!("cannot create {}: {e}", dir.display())))?;
        for s in &scaled {
            let grid = rasterize(s, cfg.raster_width, cfg.raster_height)?;
            write_atomic(&dir.join(format!("{}.pgm", sanitize(&s.id))), grid.to_pgm().as_bytes())?;
        }
    }
    Ok(())
}

fn sanitize(id: &str) -> String {
    id.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.') {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn read_feature_vectors(cfg: &PipelineConfig) -> Result<Vec<FeatureVector>, CliError> {
    Ok(movepat::io::read_features(
        &require(out(cfg, FEATURES), "features")?,
        None,
    )?)
}

pub fn cluster(cfg: &PipelineConfig) -> Result<ClusterAssignment, CliError> {
    let (assignment, metric, norm) = match cfg.algorithm {
        Algorithm::KMeans => {
            let scaled = read_scaled(cfg)?;
            let ids: Vec<String> = scaled.iter().map(|s| s.id.clone()).collect();
            let values: Vec<Vec<f64>> = scaled.into_iter().map(|s| s.values).collect();
            let fit = kmeans(&ids, &values, &KMeansConfig::new(cfg.k, cfg.seed))?;
            (fit.assignment, Some("euclidean".to_string()), None)
        }
        Algorithm::KMeansFeatures => {
            let vectors = read_feature_vectors(cfg)?;
            let fit = cluster_features(&vectors, cfg.k, cfg.seed)?;
            (fit.assignment, Some("euclidean".to_string()), None)
        }
        Algorithm::KMedoids => {
            let m = read_current_matrix(cfg)?;
            let fit = kmedoids(&m, &KMedoidsConfig::new(cfg.k, cfg.seed))?;
            (
                fit.assignment,
                Some(m.metric.name().to_string()),
                Some(m.normalization.name().to_string()),
            )
        }
        Algorithm::Hierarchical => {
            let m = read_current_matrix(cfg)?;
            let tree = agglomerative(&m, cfg.linkage)?;
            write_dendrogram(&out(cfg, DENDROGRAM), &tree)?;
            let a = cut_dendrogram(&tree, cfg.k)?;
            (
                a,
                Some(m.metric.name().to_string()),
                Some(m.normalization.name().to_string()),
            )
        }
    };
    write_assignment(&out(cfg, ASSIGNMENT), &assignment, metric.as_deref(), norm.as_deref())?;
    Ok(assignment)
}

/// Picks the rows of `items` matching `ids`, in that order.
fn align<T: Clone>(ids: &[String], items: Vec<(String, T)>, what: &str) -> Result<Vec<T>, CliError> {
    let map: BTreeMap<String, T> = items.into_iter().collect();
    ids.iter()
        .map(|id| {
            map.get(id)
                .cloned()
                .ok_or_else(|| CliError::Mismatch(format!("series `{id}` has no {what}")))
        })
        .collect()
}

/// Numeric vectors for CH and DB: pooled features for feature clusterings,
/// scaled series otherwise.
fn index_vectors(cfg: &PipelineConfig, ids: &[String], from_features: bool) -> Result<Vec<Vec<f64>>, CliError> {
    if from_features {
        let v = read_feature_vectors(cfg)?;
        align(
            ids,
            v.into_iter().map(|f| (f.series_id, f.features)).collect(),
            "feature vector",
        )
    } else {
        let s = read_scaled(cfg)?;
        align(ids, s.into_iter().map(|t| (t.id, t.values)).collect(), "scaled values")
    }
}

fn index_symbols(cfg: &PipelineConfig, ids: &[String]) -> Result<Vec<SymbolicSeries>, CliError> {
    let s = read_symbolic(cfg)?;
    align(ids, s.into_iter().map(|t| (t.id.clone(), t)).collect(), "symbols")
}

fn degenerate(notes: &[String]) -> Result<(), CliError> {
    Err(CliError::Degenerate(notes.join("; ")))
}

/// Writes `validity.json`; under `strict` a degenerate index fails after the write.
pub fn evaluate_step(cfg: &PipelineConfig, opts: &RunOptions) -> Result<ValidityReport, CliError> {
    let (assignment, side) = read_assignment(&require(out(cfg, ASSIGNMENT), "cluster")?)?;
    let vectors = index_vectors(cfg, &assignment.ids, side.algorithm.starts_with("kmeans-features"))?;
    let symbolic = index_symbols(cfg, &assignment.ids)?;
    let inputs = EvalInputs {
        vectors: Some(&vectors),
        symbolic: Some(&symbolic),
        omega: cfg.omega,
        ch_variant: cfg.ch_variant,
    };
    let mut report = evaluate(&assignment, &inputs, IndexSet::default());
    report.metric = side.metric;
    report.normalization = side.normalization;
    write_json(&out(cfg, VALIDITY), &report)?;
    if opts.strict && report.has_degenerate() {
        degenerate(&report.notes)?;
    }
    Ok(report)
}

pub fn sweep(cfg: &PipelineConfig, opts: &RunOptions) -> Result<(), CliError> {
    let symbolic_all = read_symbolic(cfg)?;
    let matrix;
    let ids: Vec<String>;
    let vectors: Vec<Vec<f64>>;
    let (algorithm, metric, norm) = match cfg.algorithm {
        Algorithm::KMeans | Algorithm::KMeansFeatures => {
            let from_features = cfg.algorithm == Algorithm::KMeansFeatures;
            ids = if from_features {
                read_feature_vectors(cfg)?.into_iter().map(|f| f.series_id).collect()
            } else {
                read_scaled(cfg)?.into_iter().map(|s| s.id).collect()
            };
            vectors = index_vectors(cfg, &ids, from_features)?;
            (
                SweepAlgorithm::KMeans {
                    ids: &ids,
                    vectors: &vectors,
                    seed: cfg.seed,
                },
                Some("euclidean".to_string()),
                None,
            )
        }
        Algorithm::KMedoids | Algorithm::Hierarchical => {
            matrix = read_current_matrix(cfg)?;
            ids = matrix.ids().to_vec();
            vectors = index_vectors(cfg, &ids, false)?;
            let algo = if cfg.algorithm == Algorithm::KMedoids {
                SweepAlgorithm::KMedoids {
                    matrix: &matrix,
                    seed: cfg.seed,
                }
            } else {
                SweepAlgorithm::Hierarchical {
                    matrix: &matrix,
                    linkage: cfg.linkage,
                }
            };
            (
                algo,
                Some(matrix.metric.name().to_string()),
                Some(matrix.normalization.name().to_string()),
            )
        }
    };
    let symbolic = align(
        &ids,
        symbolic_all.into_iter().map(|t| (t.id.clone(), t)).collect(),
        "symbols",
    )?;
    let inputs = EvalInputs {
        vectors: Some(&vectors),
        symbolic: Some(&symbolic),
        omega: cfg.omega,
        ch_variant: cfg.ch_variant,
    };
    let table = sweep_k(&algorithm, cfg.k_min, cfg.k_max, &inputs, IndexSet::default())?;
    let notes: BTreeMap<usize, String> = table
        .rows
        .iter()
        .filter_map(|r| r.note.clone().map(|n| (r.k, n)))
        .collect();
    let sidecar = SweepSidecar {
        algorithm: algorithm_tag(cfg),
        metric,
        normalization: norm,
        ch_variant: cfg.ch_variant,
        seed: cfg.seed,
        notes: notes.clone(),
    };
    write_sweep(&out(cfg, SWEEP), &table, &sidecar)?;
    if opts.strict && notes.values().any(|n| n.contains("degenerate")) {
        degenerate(&notes.values().cloned().collect::<Vec<_>>())?;
    }
    Ok(())
}

fn algorithm_tag(cfg: &PipelineConfig) -> String {
    match cfg.algorithm {
        Algorithm::Hierarchical => format!("hierarchical-{}", cfg.linkage.name()),
        other => other.name().to_string(),
    }
}

pub fn profile(cfg: &PipelineConfig) -> Result<(), CliError> {
    let (assignment, _) = read_assignment(&require(out(cfg, ASSIGNMENT), "cluster")?)?;
    let metadata = read_metadata_csv(&require(out(cfg, METADATA), "preprocess")?)?;
    let (original, _) = read_series_csv(&require(out(cfg, SERIES_ORIGINAL), "preprocess")?)?;
    let log: ProvenanceLog = read_json(&require(out(cfg, PROVENANCE), "preprocess")?)?;
    let profiles = profile_clusters(&assignment, &metadata, &original, log.mode)?;
    write_profiles(&out(cfg, PROFILE), &profiles, log.mode)?;
    Ok(())
}

/// preprocess, then distmat or features, cluster, evaluate and profile.
/// Under `strict` a degenerate evaluation still completes the profile step
/// before failing.
pub fn pipeline(cfg: &PipelineConfig, opts: &RunOptions) -> Result<(), CliError> {
    preprocess(cfg)?;
    if cfg.algorithm == Algorithm::KMeansFeatures {
        features(cfg, opts)?;
    } else if cfg.algorithm.needs_matrix() {
        distmat(cfg)?;
    }
    cluster(cfg)?;
    let report = evaluate_step(
        cfg,
        &RunOptions {
            strict: false,
            ..opts.clone()
        },
    )?;
    profile(cfg)?;
    if opts.strict && report.has_degenerate() {
        degenerate(&report.notes)?;
    }
    Ok(())
}
