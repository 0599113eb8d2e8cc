//! Per-log summaries and yearly time series of case frequencies and
//! cycle times.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::cleaning::cycle_time_days;
use crate::eventlog::EventLog;

/// Basic properties of one log: size, vocabulary, variant count, and
/// cycle time statistics in days.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogSummary {
    pub n_cases: usize,
    pub n_events: usize,
    pub mean_events_per_case: f64,
    pub n_activities: usize,
    pub n_variants: usize,
    pub mean_cycle_days: f64,
    pub median_cycle_days: f64,
    pub std_cycle_days: f64,
}

impl LogSummary {
    pub fn to_csv(&self) -> String {
        format!(
            "field,value\n\
             n_cases,{}\n\
             n_events,{}\n\
             mean_events_per_case,{}\n\
             n_activities,{}\n\
             n_variants,{}\n\
             mean_cycle_days,{}\n\
             median_cycle_days,{}\n\
             std_cycle_days,{}\n",
            self.n_cases,
            self.n_events,
            self.mean_events_per_case,
            self.n_activities,
            self.n_variants,
            self.mean_cycle_days,
            self.median_cycle_days,
            self.std_cycle_days,
        )
    }
}

/// A named year-indexed series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct YearlySeries {
    pub metric_name: String,
    pub points: BTreeMap<i32, f64>,
}

impl YearlySeries {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("year,value\n");
        for (year, value) in &self.points {
            out.push_str(&format!("{year},{value}\n"));
        }
        out
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("log contains no traces")]
    EmptyLog,
    #[error("trace {case_id:?} has no timestamped events")]
    NoTimestampedEvents { case_id: String },
}

pub(crate) fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

/// Midpoint convention: the mean of the two middle values for even
/// counts.
pub(crate) fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

/// Sample standard deviation (n-1 denominator); 0 for fewer than two
/// values.
pub(crate) fn std_dev(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values);
    let ss: f64 = values.iter().map(|v| (v - m) * (v - m)).sum();
    (ss / (values.len() - 1) as f64).sqrt()
}

/// Computes the summary over a log in which every trace has at least
/// one dated event.
pub fn summarize(log: &EventLog) -> Result<LogSummary, MetricsError> {
    if log.traces.is_empty() {
        return Err(MetricsError::EmptyLog);
    }

    let mut cycles = Vec::with_capacity(log.traces.len());
    let mut variants: BTreeSet<Vec<&str>> = BTreeSet::new();
    for trace in &log.traces {
        let days = cycle_time_days(trace).map_err(|_| MetricsError::NoTimestampedEvents {
            case_id: trace.case_id.clone(),
        })?;
        cycles.push(days as f64);
        variants.insert(trace.events.iter().map(|e| e.activity.as_str()).collect());
    }

    let n_cases = log.traces.len();
    let n_events = log.n_events();
    Ok(LogSummary {
        n_cases,
        n_events,
        mean_events_per_case: n_events as f64 / n_cases as f64,
        n_activities: log.activities().len(),
        n_variants: variants.len(),
        mean_cycle_days: mean(&cycles),
        median_cycle_days: median(&cycles),
        std_cycle_days: std_dev(&cycles),
    })
}

/// Traces per start year. Years inside the observed span without any
/// trace appear with 0.
pub fn yearly_frequencies(log: &EventLog) -> YearlySeries {
    let mut points: BTreeMap<i32, f64> = BTreeMap::new();
    for trace in &log.traces {
        if let Some(year) = trace.start_year() {
            *points.entry(year).or_insert(0.0) += 1.0;
        }
    }
    if let (Some(&first), Some(&last)) = (points.keys().next(), points.keys().next_back()) {
        for year in first..=last {
            points.entry(year).or_insert(0.0);
        }
    }
    YearlySeries {
        metric_name: "case_frequency".to_string(),
        points,
    }
}

/// Mean cycle time per start year. Years without traces are absent
/// rather than zero.
pub fn yearly_mean_cycle_times(log: &EventLog) -> YearlySeries {
    let mut grouped: BTreeMap<i32, Vec<f64>> = BTreeMap::new();
    for trace in &log.traces {
        if let (Some(year), Ok(days)) = (trace.start_year(), cycle_time_days(trace)) {
            grouped.entry(year).or_default().push(days as f64);
        }
    }
    YearlySeries {
        metric_name: "mean_cycle_days".to_string(),
        points: grouped.into_iter().map(|(y, v)| (y, mean(&v))).collect(),
    }
}
