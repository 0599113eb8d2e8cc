//! Event-log generation and cross-organizational benchmarking for
//! parliamentary documentation exports.
//!
//! The pipeline: [`ingest`] parses the XML exports, [`eventlog`] turns
//! them into standard event logs (with XES import/export and log-level
//! filters), [`cleaning`] applies the quality filters and the activity
//! fallback correction, [`metrics`] computes per-log summaries and
//! yearly series, [`stats`] provides the two hypothesis tests used for
//! benchmarking, [`enrich`] derives per-trace feature tables with delay
//! labels, [`deviance`] induces and evaluates explanatory rules, and
//! [`viz`] renders dotted charts and yearly trend lines as SVG.

pub mod cleaning;
pub mod deviance;
pub mod enrich;
pub mod eventlog;
pub mod ingest;
pub mod metrics;
pub mod stats;
pub mod viz;

pub use cleaning::{clean, cycle_time_days, CleaningPolicy, FilterReport};
pub use eventlog::xes::{read_xes, write_xes};
pub use eventlog::{
    build_log, filter_by_case_attribute, filter_by_time_window, relabel_readings,
    sort_list_attributes, AttributeValue, Event, EventLog, RelabelRule, Trace,
};
pub use ingest::{
    parse_export, parse_export_verbose, scan_export, RawDocument, RawExport, RawProcess,
};
pub use metrics::{
    summarize, yearly_frequencies, yearly_mean_cycle_times, LogSummary, YearlySeries,
};
pub use stats::{correlate_series, mann_whitney_u, pearson, CorrelationResult, MannWhitneyResult};
