//! Analysis configuration, the end-to-end pipelines, and their reports.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::confidence::{confidence_regions, ConfidenceRegion};
use crate::divergence::{
    asymmetry_measure, bowker_statistic, check_lambda, parse_lambda, power_divergence_statistic,
    BowkerResult,
};
use crate::error::{Error, Result};
use crate::matched::{build_matched, matched_coordinates, ComponentCoordinates, DimClass};
use crate::skew_ca::{decompose, origin_distances, LambdaScan, Metric, SkewMatrix};
use crate::svg::{render_svg_plot, CategoryPoint, PlotAxes, PlotConfig, PlotCoordinates};
use crate::table::ContingencyTable;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            other => Err(Error::InvalidConfig(format!("unknown output format {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisConfig {
    pub lambda: f64,
    pub alpha: f64,
    /// `None` picks the per-command default: averaged for single tables,
    /// identity for matched tables.
    pub metric: Option<Metric>,
    pub output_format: OutputFormat,
    pub svg_path: Option<PathBuf>,
    /// 1-based plot dimensions.
    pub dims: (usize, usize),
    pub plot_axes: PlotAxes,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            lambda: 1.0,
            alpha: 0.05,
            metric: None,
            output_format: OutputFormat::Json,
            svg_path: None,
            dims: (1, 2),
            plot_axes: PlotAxes::Rows,
        }
    }
}

pub fn parse_dims(value: &str) -> Result<(usize, usize)> {
    let parts: Vec<&str> = value.split(',').map(str::trim).collect();
    let parsed: Vec<usize> = parts
        .iter()
        .map(|p| p.parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::InvalidConfig(format!("dims {value:?} must be two positive integers")))?;
    match parsed[..] {
        [a, b] => Ok((a, b)),
        _ => Err(Error::InvalidConfig(format!("dims {value:?} must be two positive integers"))),
    }
}

impl AnalysisConfig {
    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key.trim() {
            "lambda" => self.lambda = parse_lambda(value)?,
            "alpha" => {
                self.alpha = value
                    .parse()
                    .map_err(|_| Error::InvalidConfig(format!("alpha {value:?} is not a number")))?
            }
            "metric" => self.metric = Some(value.parse()?),
            "format" | "output_format" => self.output_format = value.parse()?,
            "svg" | "svg_path" => {
                self.svg_path = (!value.is_empty()).then(|| PathBuf::from(value));
            }
            "dims" => self.dims = parse_dims(value)?,
            "axes" | "plot_axes" => self.plot_axes = value.parse()?,
            other => return Err(Error::InvalidConfig(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    /// Parses `key = value` lines; blank lines and `#` comments are skipped.
    pub fn from_kv_str(text: &str) -> Result<Self> {
        let mut config = AnalysisConfig::default();
        config.merge_kv_str(text)?;
        Ok(config)
    }

    pub fn merge_kv_str(&mut self, text: &str) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::InvalidConfig(format!("line {}: expected key=value, got {line:?}", n + 1))
            })?;
            self.set(key, value)
                .map_err(|e| Error::InvalidConfig(format!("line {}: {e}", n + 1)))?;
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_kv_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        check_lambda(self.lambda)?;
        crate::confidence::check_alpha(self.alpha)?;
        let (a, b) = self.dims;
        if a == 0 || b == 0 || a == b {
            return Err(Error::InvalidConfig(format!(
                "dims must be two distinct positive indices, got {a},{b}"
            )));
        }
        Ok(())
    }

    fn check_dims(&self, max: usize) -> Result<()> {
        for dim in [self.dims.0, self.dims.1] {
            if dim > max {
                return Err(Error::DimensionOutOfRange { dim, max });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableInfo {
    pub labels: Vec<String>,
    pub size: usize,
    pub total: u64,
    pub off_diagonal_mass: f64,
    pub counts: Vec<Vec<u64>>,
}

impl TableInfo {
    fn of(t: &ContingencyTable) -> Self {
        TableInfo {
            labels: t.labels().to_vec(),
            size: t.size(),
            total: t.total(),
            off_diagonal_mass: t.probabilities().off_diagonal_mass(),
            counts: t.counts().to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymmetrySummary {
    pub phi_total: f64,
    pub phi_cells: Vec<Vec<f64>>,
    pub zero_pair_cells: Vec<(usize, usize)>,
    /// `2 n delta I(lambda)`.
    pub power_divergence_statistic: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionSummary {
    pub dims: usize,
    pub singular_values: Vec<f64>,
    pub contributions: Vec<f64>,
    pub total_inertia: f64,
    pub fully_symmetric: bool,
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coordinates {
    pub rows: Vec<CategoryPoint>,
    pub columns: Vec<CategoryPoint>,
}

fn points(labels: &[String], coords: &DMatrix<f64>, distances: &[f64]) -> Vec<CategoryPoint> {
    labels
        .iter()
        .enumerate()
        .map(|(i, label)| CategoryPoint {
            label: label.clone(),
            coords: coords.row(i).iter().copied().collect(),
            origin_distance: distances[i],
        })
        .collect()
}

fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub schema_version: u32,
    pub table: TableInfo,
    pub lambda: f64,
    pub alpha: f64,
    pub metric: Metric,
    pub bowker: BowkerResult,
    pub asymmetry: AsymmetrySummary,
    pub decomposition: DecompositionSummary,
    pub coordinates: Coordinates,
    pub regions: Vec<ConfidenceRegion>,
    pub warnings: Vec<String>,
}

fn zero_pair_warnings(labels: &[String], cells: &[(usize, usize)]) -> Vec<String> {
    cells
        .iter()
        .map(|&(i, j)| {
            format!(
                "cells ({a}, {b}) and ({b}, {a}) are both zero; their departure is taken as 0",
                a = labels[i],
                b = labels[j]
            )
        })
        .collect()
}

/// Bowker test, measure, decomposition and (when defined) confidence regions
/// for one table. Any core error aborts the whole report.
pub fn run_analyze(config: &AnalysisConfig, t: &ContingencyTable) -> Result<AnalysisReport> {
    config.validate()?;
    let metric = config.metric.unwrap_or(Metric::Averaged);
    let bowker = bowker_statistic(t);
    let p = t.probabilities();
    let profile = asymmetry_measure(&p, config.lambda)?;
    let statistic = power_divergence_statistic(t, config.lambda)?;
    let dec = decompose(&SkewMatrix::from_profile(&p, &profile), &p, metric)?;
    config.check_dims(dec.dims())?;

    let mut warnings = zero_pair_warnings(t.labels(), &profile.zero_pair_cells);
    let regions = if dec.fully_symmetric {
        warnings.push("table is fully symmetric: all points lie at the origin".into());
        warnings.push("confidence regions skipped: the measure is zero".into());
        Vec::new()
    } else if t.size() < 3 {
        warnings.push("confidence regions skipped: they need at least 3 categories".into());
        Vec::new()
    } else if metric != Metric::Averaged {
        warnings.push("confidence regions skipped: they require the averaged metric".into());
        Vec::new()
    } else {
        confidence_regions(&dec, t, &profile, config.alpha)?
    };

    let dist = origin_distances(&dec);
    Ok(AnalysisReport {
        schema_version: SCHEMA_VERSION,
        table: TableInfo::of(t),
        lambda: config.lambda,
        alpha: config.alpha,
        metric,
        bowker,
        asymmetry: AsymmetrySummary {
            phi_total: profile.phi_total,
            phi_cells: matrix_rows(&profile.phi_cells),
            zero_pair_cells: profile.zero_pair_cells.clone(),
            power_divergence_statistic: statistic,
        },
        decomposition: DecompositionSummary {
            dims: dec.dims(),
            singular_values: dec.singular_values().iter().copied().collect(),
            contributions: dec.contributions.clone(),
            total_inertia: dec.total_inertia,
            fully_symmetric: dec.fully_symmetric,
            weights: dec.weights.iter().copied().collect(),
        },
        coordinates: Coordinates {
            rows: points(t.labels(), &dec.row_coords, &dist.rows),
            columns: points(t.labels(), &dec.col_coords, &dist.columns),
        },
        regions,
        warnings,
    })
}

impl AnalysisReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_csv(&self) -> String {
        let mut out = CsvReport::new();
        out.push("lambda", "", "", self.lambda);
        out.push("alpha", "", "", self.alpha);
        out.push("bowker", "", "statistic", self.bowker.statistic);
        out.push("bowker", "", "dof", self.bowker.dof as f64);
        out.push("bowker", "", "p_value", self.bowker.p_value);
        out.push("asymmetry", "", "phi_total", self.asymmetry.phi_total);
        out.push(
            "asymmetry",
            "",
            "power_divergence_statistic",
            self.asymmetry.power_divergence_statistic,
        );
        for (k, (mu, pct)) in self
            .decomposition
            .singular_values
            .iter()
            .zip(&self.decomposition.contributions)
            .enumerate()
        {
            out.push("dimension", &(k + 1).to_string(), "singular_value", *mu);
            out.push("dimension", &(k + 1).to_string(), "contribution", *pct);
        }
        out.points("row", &self.coordinates.rows);
        out.points("column", &self.coordinates.columns);
        for r in &self.regions {
            let record = match r.axis {
                crate::confidence::Axis::Row => "row_region",
                crate::confidence::Axis::Column => "column_region",
            };
            out.push(record, &r.label, "center_x", r.center.0);
            out.push(record, &r.label, "center_y", r.center.1);
            out.push(record, &r.label, "radius_x", r.radius_x);
            out.push(record, &r.label, "radius_y", r.radius_y);
            out.push(record, &r.label, "contains_origin", f64::from(u8::from(r.contains_origin)));
        }
        out.finish()
    }

    pub fn to_svg(&self, config: &AnalysisConfig) -> Result<String> {
        let title = format!("lambda = {}", self.lambda);
        render_svg_plot(
            &PlotCoordinates {
                rows: &self.coordinates.rows,
                columns: &self.coordinates.columns,
                contributions: &self.decomposition.contributions,
            },
            &self.regions,
            &PlotConfig {
                title: &title,
                dims: config.dims,
                axes: config.plot_axes,
            },
        )
    }
}

/// Long-format CSV with values rounded to 6 decimals.
struct CsvReport {
    writer: csv::Writer<Vec<u8>>,
}

impl CsvReport {
    fn new() -> Self {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer
            .write_record(["record", "label", "field", "value"])
            .expect("in-memory write");
        CsvReport { writer }
    }

    fn push(&mut self, record: &str, label: &str, field: &str, value: f64) {
        let value = format!("{:.6}", value + 0.0);
        self.writer
            .write_record([record, label, field, value.as_str()])
            .expect("in-memory write");
    }

    fn points(&mut self, record: &str, points: &[CategoryPoint]) {
        for p in points {
            for (k, v) in p.coords.iter().enumerate() {
                self.push(record, &p.label, &format!("dim{}", k + 1), *v);
            }
            self.push(record, &p.label, "origin_distance", p.origin_distance);
        }
    }

    fn finish(self) -> String {
        String::from_utf8(self.writer.into_inner().expect("in-memory flush")).expect("UTF-8")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentSummary {
    pub singular_values: Vec<f64>,
    /// Block dimension (1-based) of each component dimension.
    pub block_dims: Vec<usize>,
    pub contributions: Vec<f64>,
    pub coordinates: Coordinates,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockSummary {
    pub singular_values: Vec<f64>,
    pub contributions: Vec<f64>,
    pub dim_class: Vec<DimClass>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchedReport {
    pub schema_version: u32,
    pub tables: [TableInfo; 2],
    pub lambda: f64,
    pub metric: Metric,
    pub phi_totals: [f64; 2],
    pub block: BlockSummary,
    pub sum: ComponentSummary,
    pub difference: ComponentSummary,
    pub warnings: Vec<String>,
}

fn component_summary(labels: &[String], c: &ComponentCoordinates) -> ComponentSummary {
    let norms = |m: &DMatrix<f64>| -> Vec<f64> { (0..m.nrows()).map(|i| m.row(i).norm()).collect() };
    ComponentSummary {
        singular_values: c.singular_values.iter().copied().collect(),
        block_dims: c.block_dims.clone(),
        contributions: c.contributions.clone(),
        coordinates: Coordinates {
            rows: points(labels, &c.row_coords, &norms(&c.row_coords)),
            columns: points(labels, &c.col_coords, &norms(&c.col_coords)),
        },
    }
}

/// Sum and difference analysis of two matched tables.
pub fn run_matched(
    config: &AnalysisConfig,
    t1: &ContingencyTable,
    t2: &ContingencyTable,
) -> Result<MatchedReport> {
    config.validate()?;
    let metric = config.metric.unwrap_or(Metric::Identity);
    let analysis = build_matched(t1, t2, config.lambda)?;
    let coords = matched_coordinates(&analysis, metric);
    config.check_dims(analysis.svd_plus.dims())?;

    let p1 = asymmetry_measure(&t1.probabilities(), config.lambda)?;
    let p2 = asymmetry_measure(&t2.probabilities(), config.lambda)?;
    let mut warnings = Vec::new();
    for (name, prof) in [("first", &p1), ("second", &p2)] {
        for w in zero_pair_warnings(t1.labels(), &prof.zero_pair_cells) {
            warnings.push(format!("{name} table: {w}"));
        }
    }
    let labels = t1.labels();
    Ok(MatchedReport {
        schema_version: SCHEMA_VERSION,
        tables: [TableInfo::of(t1), TableInfo::of(t2)],
        lambda: config.lambda,
        metric,
        phi_totals: [p1.phi_total, p2.phi_total],
        block: BlockSummary {
            singular_values: analysis.block_singular_values().iter().copied().collect(),
            contributions: analysis.block_contributions(),
            dim_class: analysis.dim_class.clone(),
        },
        sum: component_summary(labels, &coords.sum),
        difference: component_summary(labels, &coords.difference),
        warnings,
    })
}

impl MatchedReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_csv(&self) -> String {
        let mut out = CsvReport::new();
        out.push("lambda", "", "", self.lambda);
        out.push("phi_total", "first", "", self.phi_totals[0]);
        out.push("phi_total", "second", "", self.phi_totals[1]);
        for (k, (mu, class)) in self
            .block
            .singular_values
            .iter()
            .zip(&self.block.dim_class)
            .enumerate()
        {
            let component = match class.component {
                crate::matched::Component::Sum => "sum",
                crate::matched::Component::Difference => "difference",
            };
            let dim = (k + 1).to_string();
            out.push("block_dimension", &dim, "singular_value", *mu);
            out.push("block_dimension", &dim, "contribution", self.block.contributions[k]);
            out.push("block_dimension", &dim, &format!("{component}_dim"), class.source_dim as f64);
        }
        out.points("sum_row", &self.sum.coordinates.rows);
        out.points("difference_row", &self.difference.coordinates.rows);
        out.finish()
    }

    /// SVG plots of the sum and the difference component.
    pub fn to_svgs(&self, config: &AnalysisConfig) -> Result<(String, String)> {
        let render = |name: &str, c: &ComponentSummary| {
            let title = format!("{name} component, lambda = {}", self.lambda);
            render_svg_plot(
                &PlotCoordinates {
                    rows: &c.coordinates.rows,
                    columns: &c.coordinates.columns,
                    contributions: &c.contributions,
                },
                &[],
                &PlotConfig {
                    title: &title,
                    dims: config.dims,
                    axes: config.plot_axes,
                },
            )
        };
        Ok((render("sum", &self.sum)?, render("difference", &self.difference)?))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BowkerReport {
    pub schema_version: u32,
    pub table: TableInfo,
    pub bowker: BowkerResult,
}

impl BowkerReport {
    pub fn new(t: &ContingencyTable) -> Self {
        BowkerReport {
            schema_version: SCHEMA_VERSION,
            table: TableInfo::of(t),
            bowker: bowker_statistic(t),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_csv(&self) -> String {
        let mut out = CsvReport::new();
        out.push("bowker", "", "statistic", self.bowker.statistic);
        out.push("bowker", "", "dof", self.bowker.dof as f64);
        out.push("bowker", "", "p_value", self.bowker.p_value);
        out.finish()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub schema_version: u32,
    pub metric: Metric,
    #[serde(flatten)]
    pub scan: LambdaScan,
}

impl ScanReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("lambda,phi_total,leading_contribution\n");
        for e in &self.scan.entries {
            let _ = writeln!(out, "{:.6},{:.6},{:.6}", e.lambda + 0.0, e.phi_total, e.leading);
        }
        out
    }
}
