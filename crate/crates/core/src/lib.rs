//! Correspondence analysis of departures from symmetry in square
//! contingency tables, based on a power-divergence-type asymmetry measure.

pub mod confidence;
pub mod datasets;
pub mod divergence;
pub mod error;
pub mod io;
pub mod linalg;
pub mod matched;
pub mod report;
pub mod skew_ca;
pub mod svg;
pub mod table;

pub use confidence::{
    chi_square_cdf, chi_square_quantile, chi_square_sf, confidence_regions, Axis, ConfidenceRegion,
};
pub use divergence::{
    asymmetry_measure, bowker_statistic, calibration_constant, cell_departure, parse_lambda,
    power_divergence_statistic, AsymmetryProfile, BowkerResult, Divergence,
};
pub use error::{Error, Result};
pub use io::{parse_table_csv, parse_table_str, read_table, write_table_csv};
pub use matched::{build_matched, matched_coordinates, Component, DimClass, MatchedAnalysis};
pub use report::{
    run_analyze, run_matched, AnalysisConfig, AnalysisReport, MatchedReport, OutputFormat,
    SCHEMA_VERSION,
};
pub use skew_ca::{
    contribution_ratios, decompose, origin_distances, scan_lambda, skew_matrix, LambdaGrid, Metric,
    SkewMatrix, SymmetryDecomposition,
};
pub use table::{ContingencyTable, ProbabilityTable};
pub use svg::{render_svg_plot, PlotAxes};
