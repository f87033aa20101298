//! Density reports, the open-question probe and record export.

mod density;
mod export;
mod probe;

pub use density::{density_from_source, density_report, DensityReport, KroneckerPoints, PointSource, SlicePoints, MAX_CELLS};
pub use export::{
    export_records, orbit_header, read_points_csv, to_json_line, write_csv, write_json_lines, CsvRecord, ExportFormat,
    EXPONENT_WITNESS_HEADER, WITNESS_HEADER,
};
pub use probe::{
    conclude, probe_open_question, ProbeConclusion, ProbeConfig, ProbeReport, ProbeThresholds, VectorSummary, RANK_TOL,
};
