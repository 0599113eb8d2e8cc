//! Data-quality filters and the activity-name fallback correction.
//!
//! Three per-trace rules decide removal: any event without a timestamp,
//! any timestamp outside the valid year range or a cycle time above the
//! election-period cap, and any event still lacking an activity label
//! after the fallback correction ran. A trace failing several rules is
//! counted in each category but removed once.

use serde::Serialize;
use thiserror::Error;

use crate::eventlog::{AttributeValue, EventLog, Trace};

#[derive(Debug, Clone, PartialEq)]
pub struct CleaningPolicy {
    pub min_year: i32,
    pub max_year: i32,
    /// Longest plausible cycle time; five calendar years including one
    /// leap day.
    pub max_cycle_days: i64,
    /// Event attribute consulted when the activity label is empty.
    pub fallback_attribute: String,
    /// Fallback values too uninformative to serve as an activity.
    pub fallback_excluded_values: Vec<String>,
}

impl Default for CleaningPolicy {
    fn default() -> Self {
        CleaningPolicy {
            min_year: 1984,
            max_year: 2024,
            max_cycle_days: 1826,
            fallback_attribute: "DokArtL".to_string(),
            fallback_excluded_values: vec!["Drucksache".to_string()],
        }
    }
}

/// Per-rule removal counts. Categories may overlap on the same trace,
/// so `removed_total` can be below their sum; `remaining` is always
/// `original - removed_total`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct FilterReport {
    pub original: usize,
    pub missing_date: usize,
    pub invalid_date: usize,
    pub no_activity_before_correction: usize,
    pub no_activity_after_correction: usize,
    pub removed_total: usize,
    pub remaining: usize,
}

impl FilterReport {
    /// Two-column CSV, one row per field, field names as in the struct.
    pub fn to_csv(&self) -> String {
        format!(
            "field,count\n\
             original,{}\n\
             missing_date,{}\n\
             invalid_date,{}\n\
             no_activity_before_correction,{}\n\
             no_activity_after_correction,{}\n\
             removed_total,{}\n\
             remaining,{}\n",
            self.original,
            self.missing_date,
            self.invalid_date,
            self.no_activity_before_correction,
            self.no_activity_after_correction,
            self.removed_total,
            self.remaining,
        )
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum CycleTimeError {
    #[error("trace {case_id:?} has no timestamped events")]
    NoTimestampedEvents { case_id: String },
}

/// Whole days between a trace's first and last dated event;
/// single-event traces take 0 days.
pub fn cycle_time_days(trace: &Trace) -> Result<i64, CycleTimeError> {
    match (trace.start_date(), trace.end_date()) {
        (Some(first), Some(last)) => Ok((last - first).num_days()),
        _ => Err(CycleTimeError::NoTimestampedEvents {
            case_id: trace.case_id.clone(),
        }),
    }
}

/// Applies the policy to a log: classifies every trace, corrects empty
/// activities from the fallback attribute where possible, removes the
/// union of offending traces, and reports the per-rule counts.
pub fn clean(log: EventLog, policy: &CleaningPolicy) -> (EventLog, FilterReport) {
    use chrono::Datelike;

    let mut report = FilterReport {
        original: log.traces.len(),
        ..FilterReport::default()
    };

    let mut kept = Vec::with_capacity(log.traces.len());
    for mut trace in log.traces {
        let missing_date = trace.events.iter().any(|e| e.timestamp.is_none());
        let out_of_range = trace.events.iter().any(|e| {
            e.timestamp
                .is_some_and(|d| d.year() < policy.min_year || d.year() > policy.max_year)
        });
        let over_cap = match (trace.start_date(), trace.end_date()) {
            (Some(first), Some(last)) => (last - first).num_days() > policy.max_cycle_days,
            _ => false,
        };
        let invalid_date = out_of_range || over_cap;
        let empty_before = trace.events.iter().any(|e| e.activity.is_empty());

        for event in &mut trace.events {
            if !event.activity.is_empty() {
                continue;
            }
            if let Some(AttributeValue::Text(fallback)) =
                event.attributes.get(&policy.fallback_attribute)
            {
                if !fallback.is_empty() && !policy.fallback_excluded_values.contains(fallback) {
                    event.activity = fallback.clone();
                }
            }
        }
        let empty_after = trace.events.iter().any(|e| e.activity.is_empty());

        if missing_date {
            report.missing_date += 1;
        }
        if invalid_date {
            report.invalid_date += 1;
        }
        if empty_before {
            report.no_activity_before_correction += 1;
        }
        if empty_after {
            report.no_activity_after_correction += 1;
        }
        if missing_date || invalid_date || empty_after {
            report.removed_total += 1;
        } else {
            kept.push(trace);
        }
    }

    report.remaining = report.original - report.removed_total;
    (
        EventLog {
            name: log.name,
            traces: kept,
            provenance: log.provenance,
        },
        report,
    )
}
