//! Flat `key = value` run configuration.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::NaiveDate;
use movepat::clustering::Linkage;
use movepat::data::{parse_date, CsvSchema, FillStrategy, Mode, Thresholds};
use movepat::distances::{MetricKind, Normalization};
use movepat::evaluation::ChVariant;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    Long,
    Wide,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    KMeans,
    KMeansFeatures,
    KMedoids,
    Hierarchical,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::KMeans => "kmeans",
            Algorithm::KMeansFeatures => "kmeans-features",
            Algorithm::KMedoids => "kmedoids",
            Algorithm::Hierarchical => "hierarchical",
        }
    }

    /// True when the algorithm reads a precomputed distance matrix.
    pub fn needs_matrix(self) -> bool {
        matches!(self, Algorithm::KMedoids | Algorithm::Hierarchical)
    }
}

impl FromStr for Algorithm {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "kmeans" => Ok(Algorithm::KMeans),
            "kmeans-features" => Ok(Algorithm::KMeansFeatures),
            "kmedoids" => Ok(Algorithm::KMedoids),
            "hierarchical" => Ok(Algorithm::Hierarchical),
            other => Err(format!(
                "unknown algorithm `{other}` (expected kmeans, kmeans-features, kmedoids or hierarchical)"
            )),
        }
    }
}

/// Which series representation a metric runs on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Representation {
    /// Levenshtein and MPBD on symbols, Euclidean and DTW on scaled values.
    Auto,
    Numeric,
    Symbolic,
}

impl FromStr for Representation {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "auto" => Ok(Representation::Auto),
            "numeric" => Ok(Representation::Numeric),
            "symbolic" => Ok(Representation::Symbolic),
            other => Err(format!(
                "unknown representation `{other}` (expected auto, numeric or symbolic)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub input: Option<PathBuf>,
    pub input_format: InputFormat,
    pub schema: CsvSchema,
    pub mode: Mode,
    pub start_date: Option<NaiveDate>,
    pub end_date: Option<NaiveDate>,
    pub max_missing_fraction: f64,
    pub fill: Option<FillStrategy>,
    pub scale_lo: f64,
    pub scale_hi: f64,
    pub thresholds: Thresholds,
    pub outlier_metric: Option<MetricKind>,
    pub outlier_percentile: f64,
    pub metric: MetricKind,
    pub representation: Representation,
    pub omega: f64,
    pub dtw_window: Option<usize>,
    pub normalization: Normalization,
    pub algorithm: Algorithm,
    pub linkage: Linkage,
    pub k: usize,
    pub k_min: usize,
    pub k_max: usize,
    pub seed: u64,
    pub ch_variant: ChVariant,
    pub features: Option<PathBuf>,
    pub raster_width: usize,
    pub raster_height: usize,
    pub raster_block: usize,
    pub out: PathBuf,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            input: None,
            input_format: InputFormat::Long,
            schema: CsvSchema::default(),
            mode: Mode::Price,
            start_date: None,
            end_date: None,
            max_missing_fraction: 0.8,
            fill: None,
            scale_lo: 0.1,
            scale_hi: 1.0,
            thresholds: Thresholds::default(),
            outlier_metric: Some(MetricKind::Mpbd),
            outlier_percentile: 95.0,
            metric: MetricKind::Mpbd,
            representation: Representation::Auto,
            omega: 2.0,
            dtw_window: None,
            normalization: Normalization::Table1,
            algorithm: Algorithm::Hierarchical,
            linkage: Linkage::Ward,
            k: 15,
            k_min: 2,
            k_max: 20,
            seed: 0,
            ch_variant: ChVariant::Standard,
            features: None,
            raster_width: 64,
            raster_height: 64,
            raster_block: 4,
            out: PathBuf::from("out"),
        }
    }
}

/// Every accepted key with its default, as shown by `--help`.
pub const KEYS: &str = "\
config keys (defaults in brackets):
  input                 input CSV path                          [none]
  input_format          long | wide                             [long]
  col_series_id         long-format id column                   [series_id]
  col_date              long-format date column                 [date]
  col_value             long-format value column                [value]
  col_category          optional category column                [category]
  col_store             optional store column                   [store]
  mode                  price | sales                           [price]
  start_date, end_date  inclusive YYYY-MM-DD bounds             [data extent]
  max_missing_fraction  drop series missing more than this      [0.8]
  fill                  auto | forward | mean                   [auto]
  scale_lo, scale_hi    min-max target range                    [0.1, 1.0]
  thresholds            four increasing symbol cut points       [0.29,0.47,0.65,0.83]
  outlier_metric        none | euclidean | dtw | levenshtein | mpbd  [mpbd]
  outlier_percentile    nearest-neighbour distance percentile   [95]
  metric                euclidean | dtw | levenshtein | mpbd    [mpbd]
  representation        auto | numeric | symbolic               [auto]
  omega                 MPBD opposite-direction weight          [2]
  dtw_window            Sakoe-Chiba band or none                [none]
  normalization         none | matrix_max | table1              [table1]
  algorithm             kmeans | kmeans-features | kmedoids | hierarchical  [hierarchical]
  linkage               ward | average | complete | single      [ward]
  k                     number of clusters                      [15]
  k_min, k_max          sweep range                             [2, 20]
  seed                  64-bit seed                             [0]
  ch_variant            standard | paper                        [standard]
  features              external feature CSV or none            [none]
  raster_width, raster_height, raster_block  image branch grid  [64, 64, 4]
  out                   output directory                        [out]";

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, CliError>
where
    T::Err: std::fmt::Display,
{
    value
        .parse::<T>()
        .map_err(|e| CliError::Config(format!("`{key}`: {e}")))
}

fn optional(value: &str) -> Option<&str> {
    (!value.eq_ignore_ascii_case("none") && !value.is_empty()).then_some(value)
}

fn date(key: &str, value: &str) -> Result<Option<NaiveDate>, CliError> {
    optional(value)
        .map(|v| parse_date(v).ok_or_else(|| CliError::Config(format!("`{key}`: `{v}` is not a YYYY-MM-DD date"))))
        .transpose()
}

impl PipelineConfig {
    /// Sets one key; unknown keys and malformed values are errors.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let value = value.trim();
        match key {
            "input" => self.input = optional(value).map(PathBuf::from),
            "input_format" => {
                self.input_format = match value {
                    "long" => InputFormat::Long,
                    "wide" => InputFormat::Wide,
                    other => return Err(CliError::Config(format!("`input_format`: unknown format `{other}`"))),
                }
            }
            "col_series_id" => self.schema.series_id = value.to_string(),
            "col_date" => self.schema.date = value.to_string(),
            "col_value" => self.schema.value = value.to_string(),
            "col_category" => self.schema.category = value.to_string(),
            "col_store" => self.schema.store = value.to_string(),
            "mode" => self.mode = parse(key, value)?,
            "start_date" => self.start_date = date(key, value)?,
            "end_date" => self.end_date = date(key, value)?,
            "max_missing_fraction" => self.max_missing_fraction = parse(key, value)?,
            "fill" => {
                self.fill = match value {
                    "auto" => None,
                    other => Some(parse(key, other)?),
                }
            }
            "scale_lo" => self.scale_lo = parse(key, value)?,
            "scale_hi" => self.scale_hi = parse(key, value)?,
            "thresholds" => {
                let cuts = value
                    .split(',')
                    .map(|c| parse::<f64>(key, c.trim()))
                    .collect::<Result<Vec<_>, _>>()?;
                let cuts: [f64; 4] = cuts
                    .try_into()
                    .map_err(|_| CliError::Config("`thresholds`: expected four comma-separated values".into()))?;
                self.thresholds = Thresholds::new(cuts).map_err(|e| CliError::Config(e.to_string()))?;
            }
            "outlier_metric" => self.outlier_metric = optional(value).map(|v| parse(key, v)).transpose()?,
            "outlier_percentile" => self.outlier_percentile = parse(key, value)?,
            "metric" => self.metric = parse(key, value)?,
            "representation" => self.representation = parse(key, value)?,
            "omega" => self.omega = parse(key, value)?,
            "dtw_window" => self.dtw_window = optional(value).map(|v| parse(key, v)).transpose()?,
            "normalization" => self.normalization = parse(key, value)?,
            "algorithm" => self.algorithm = parse(key, value)?,
            "linkage" => self.linkage = parse(key, value)?,
            "k" => self.k = parse(key, value)?,
            "k_min" => self.k_min = parse(key, value)?,
            "k_max" => self.k_max = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "ch_variant" => self.ch_variant = parse(key, value)?,
            "features" => self.features = optional(value).map(PathBuf::from),
            "raster_width" => self.raster_width = parse(key, value)?,
            "raster_height" => self.raster_height = parse(key, value)?,
            "raster_block" => self.raster_block = parse(key, value)?,
            "out" => self.out = PathBuf::from(value),
            other => return Err(CliError::Config(format!("unknown config key `{other}`"))),
        }
        Ok(())
    }

    /// Applies every `key = value` line of a config text. `#` starts a comment.
    pub fn apply_text(&mut self, text: &str, origin: &str) -> Result<(), CliError> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::Config(format!("{origin}:{}: expected `key = value`", n + 1)));
            };
            self.set(key.trim(), value)
                .map_err(|e| CliError::Config(format!("{origin}:{}: {}", n + 1, e.message())))?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg = Self::default();
        cfg.apply_text(&text, &path.display().to_string())?;
        Ok(cfg)
    }

    /// Whether `metric` runs on symbols under the configured representation.
    pub fn symbolic_for(&self, metric: MetricKind) -> bool {
        match self.representation {
            Representation::Symbolic => true,
            Representation::Numeric => false,
            Representation::Auto => matches!(metric, MetricKind::Levenshtein | MetricKind::Mpbd),
        }
    }

    pub fn check(&self) -> Result<(), CliError> {
        if self.k < 2 {
            return Err(CliError::Config(format!("`k` must be at least 2, got {}", self.k)));
        }
        if self.k_min < 2 || self.k_max < self.k_min {
            return Err(CliError::Config(format!(
                "sweep range requires 2 <= k_min <= k_max, got {}..{}",
                self.k_min, self.k_max
            )));
        }
        if !(self.omega > 0.0) {
            return Err(CliError::Config(format!(
                "`omega` must be positive, got {}",
                self.omega
            )));
        }
        if let (Some(s), Some(e)) = (self.start_date, self.end_date) {
            if e < s {
                return Err(CliError::Config(format!("end_date {e} precedes start_date {s}")));
            }
        }
        Ok(())
    }
}
