//! Per-trace feature tables for delay analysis: event counts, activity
//! counts, first-occurrence delays between activity pairs, trace start
//! context, workload, the passed-bill flag, and context joined from
//! sidecar CSV files (election years, legislative-capacity index,
//! document size and word count).

use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;

use chrono::Datelike;
use thiserror::Error;

use crate::cleaning::{cycle_time_days, CycleTimeError};
use crate::eventlog::{AttributeValue, EventLog};
use crate::metrics::LogSummary;

/// Context table joined onto traces either by start year (`key` =
/// "year") or by case identifier (`key` = "case_id").
#[derive(Debug, Clone, PartialEq)]
pub struct SidecarTable {
    pub name: String,
    pub key: String,
    pub rows: BTreeMap<String, BTreeMap<String, AttributeValue>>,
}

pub const YEAR_KEY: &str = "year";
pub const CASE_KEY: &str = "case_id";

#[derive(Debug, Error)]
pub enum EnrichError {
    #[error("sidecar {table:?} repeats key {key:?}")]
    DuplicateSidecarKey { table: String, key: String },
    #[error("sidecar {table:?} has no {key:?} column")]
    MissingKeyColumn { table: String, key: String },
    #[error("reference mean cycle time must be positive, got {0}")]
    NonPositiveMean(f64),
    #[error("case {case_id:?} not present in the log")]
    UnknownCase { case_id: String },
    #[error(transparent)]
    CycleTime(#[from] CycleTimeError),
    #[error("failed to read CSV: {0}")]
    Csv(#[from] csv::Error),
}

fn parse_cell(raw: &str) -> Option<AttributeValue> {
    let raw = raw.trim();
    if raw.is_empty() {
        return None;
    }
    match raw {
        "true" | "True" => return Some(AttributeValue::Flag(true)),
        "false" | "False" => return Some(AttributeValue::Flag(false)),
        _ => {}
    }
    if let Ok(n) = raw.parse::<f64>() {
        return Some(AttributeValue::Number(n));
    }
    Some(AttributeValue::Text(raw.to_string()))
}

impl SidecarTable {
    /// Reads a sidecar from CSV. The header must contain the join key
    /// column; every other column becomes a feature. Empty cells stay
    /// absent, `True`/`False` parse as flags, numerics as numbers.
    pub fn from_csv<R: Read>(name: &str, key: &str, reader: R) -> Result<Self, EnrichError> {
        let mut csv_reader = csv::Reader::from_reader(reader);
        let headers = csv_reader.headers()?.clone();
        let key_index =
            headers
                .iter()
                .position(|h| h == key)
                .ok_or_else(|| EnrichError::MissingKeyColumn {
                    table: name.to_string(),
                    key: key.to_string(),
                })?;

        let mut rows = BTreeMap::new();
        for record in csv_reader.records() {
            let record = record?;
            let row_key = record.get(key_index).unwrap_or_default().trim().to_string();
            let mut features = BTreeMap::new();
            for (i, header) in headers.iter().enumerate() {
                if i == key_index {
                    continue;
                }
                if let Some(value) = record.get(i).and_then(parse_cell) {
                    features.insert(header.to_string(), value);
                }
            }
            if rows.insert(row_key.clone(), features).is_some() {
                return Err(EnrichError::DuplicateSidecarKey {
                    table: name.to_string(),
                    key: row_key,
                });
            }
        }
        Ok(SidecarTable {
            name: name.to_string(),
            key: key.to_string(),
            rows,
        })
    }
}

/// One trace's features plus, once labeled, the delay flag.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub case_id: String,
    pub features: BTreeMap<String, AttributeValue>,
    pub is_delayed: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FeatureTable {
    pub rows: Vec<FeatureRow>,
    pub catalog: BTreeSet<String>,
}

impl FeatureTable {
    pub fn delayed_count(&self) -> usize {
        self.rows
            .iter()
            .filter(|r| r.is_delayed == Some(true))
            .count()
    }

    /// One CSV row per trace: `case_id`, the catalog columns in sorted
    /// order, then `is_delayed`. Absent values stay empty.
    pub fn to_csv(&self) -> String {
        let mut writer = csv::Writer::from_writer(Vec::new());
        let mut header = vec![CASE_KEY.to_string()];
        header.extend(self.catalog.iter().cloned());
        header.push("is_delayed".to_string());
        writer.write_record(&header).expect("in-memory write");
        for row in &self.rows {
            let mut record = vec![row.case_id.clone()];
            for feature in &self.catalog {
                record.push(match row.features.get(feature) {
                    Some(AttributeValue::Number(n)) => n.to_string(),
                    Some(AttributeValue::Flag(b)) => {
                        if *b {
                            "True".into()
                        } else {
                            "False".into()
                        }
                    }
                    Some(AttributeValue::Text(s)) => s.clone(),
                    Some(AttributeValue::Date(d)) => d.to_string(),
                    Some(AttributeValue::TextList(items)) => items.join("|"),
                    None => String::new(),
                });
            }
            record.push(match row.is_delayed {
                Some(true) => "True".into(),
                Some(false) => "False".into(),
                None => String::new(),
            });
            writer.write_record(&record).expect("in-memory write");
        }
        String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("utf8")
    }

    /// Inverse of [`FeatureTable::to_csv`].
    pub fn from_csv<R: Read>(reader: R) -> Result<Self, EnrichError> {
        let mut csv_reader = csv::Reader::from_reader(reader);
        let headers = csv_reader.headers()?.clone();
        let mut catalog = BTreeSet::new();
        for header in headers.iter() {
            if header != CASE_KEY && header != "is_delayed" {
                catalog.insert(header.to_string());
            }
        }
        let mut rows = Vec::new();
        for record in csv_reader.records() {
            let record = record?;
            let mut row = FeatureRow {
                case_id: String::new(),
                features: BTreeMap::new(),
                is_delayed: None,
            };
            for (i, header) in headers.iter().enumerate() {
                let raw = record.get(i).unwrap_or_default();
                match header {
                    CASE_KEY => row.case_id = raw.to_string(),
                    "is_delayed" => {
                        row.is_delayed = match raw.trim() {
                            "True" | "true" => Some(true),
                            "False" | "false" => Some(false),
                            _ => None,
                        }
                    }
                    _ => {
                        if let Some(value) = parse_cell(raw) {
                            row.features.insert(header.to_string(), value);
                        }
                    }
                }
            }
            rows.push(row);
        }
        Ok(FeatureTable { rows, catalog })
    }
}

/// Derives the feature table for a log. Activity count features cover
/// every activity in the log's vocabulary (zero when absent from a
/// trace); delay features exist for the activity pairs observed in at
/// least one trace. Year- and case-keyed sidecars are joined by start
/// year and case id respectively.
pub fn extract_features(
    log: &EventLog,
    sidecars: &[SidecarTable],
    passed_activities: &BTreeSet<String>,
) -> Result<FeatureTable, EnrichError> {
    let vocabulary = log.activities();

    // workload lookup: sorted trace start and end days
    let mut starts: Vec<i64> = Vec::new();
    let mut ends: Vec<i64> = Vec::new();
    for trace in &log.traces {
        if let (Some(start), Some(end)) = (trace.start_date(), trace.end_date()) {
            starts.push(i64::from(start.num_days_from_ce()));
            ends.push(i64::from(end.num_days_from_ce()));
        }
    }
    starts.sort_unstable();
    ends.sort_unstable();
    // open intervals containing day s: starts <= s minus ends < s
    let workload_at = |day: i64| -> f64 {
        let started = starts.partition_point(|&v| v <= day);
        let ended = ends.partition_point(|&v| v < day);
        (started - ended) as f64
    };

    let mut rows = Vec::with_capacity(log.traces.len());
    let mut catalog: BTreeSet<String> = BTreeSet::new();
    catalog.insert("event_count".to_string());
    for activity in &vocabulary {
        catalog.insert(format!("{activity}.count"));
    }

    for trace in &log.traces {
        let mut features: BTreeMap<String, AttributeValue> = BTreeMap::new();
        features.insert(
            "event_count".to_string(),
            AttributeValue::Number(trace.events.len() as f64),
        );

        let mut counts: BTreeMap<&str, f64> = BTreeMap::new();
        for event in &trace.events {
            *counts.entry(event.activity.as_str()).or_insert(0.0) += 1.0;
        }
        for activity in &vocabulary {
            features.insert(
                format!("{activity}.count"),
                AttributeValue::Number(counts.get(activity.as_str()).copied().unwrap_or(0.0)),
            );
        }

        // first occurrence index and date per activity
        let mut first_occurrence: BTreeMap<&str, (usize, Option<chrono::NaiveDate>)> =
            BTreeMap::new();
        for (index, event) in trace.events.iter().enumerate() {
            first_occurrence
                .entry(event.activity.as_str())
                .or_insert((index, event.timestamp));
        }
        for (from, (from_index, from_date)) in &first_occurrence {
            let Some(from_date) = from_date else { continue };
            for event in trace.events.iter().skip(from_index + 1) {
                if event.activity.as_str() == *from {
                    continue;
                }
                // only the first occurrence of each target after the
                // source counts; later repeats are skipped
                let name = format!("{from}:{}.delay", event.activity);
                if features.contains_key(&name) {
                    continue;
                }
                if let Some(to_date) = event.timestamp {
                    let days = (to_date - *from_date).num_days() as f64;
                    features.insert(name.clone(), AttributeValue::Number(days));
                    catalog.insert(name);
                }
            }
        }

        if let Some(start) = trace.start_date() {
            features.insert(
                "start_month".to_string(),
                AttributeValue::Number(f64::from(start.month())),
            );
            features.insert(
                "start_year".to_string(),
                AttributeValue::Number(f64::from(start.year())),
            );
            features.insert(
                "workload".to_string(),
                AttributeValue::Number(workload_at(i64::from(start.num_days_from_ce()))),
            );
            catalog.insert("start_month".to_string());
            catalog.insert("start_year".to_string());
            catalog.insert("workload".to_string());

            let year_key = start.year().to_string();
            for sidecar in sidecars.iter().filter(|s| s.key == YEAR_KEY) {
                if let Some(row) = sidecar.rows.get(&year_key) {
                    for (feature, value) in row {
                        features
                            .entry(feature.clone())
                            .or_insert_with(|| value.clone());
                        catalog.insert(feature.clone());
                    }
                }
            }
        }

        for sidecar in sidecars.iter().filter(|s| s.key == CASE_KEY) {
            if let Some(row) = sidecar.rows.get(&trace.case_id) {
                for (feature, value) in row {
                    features
                        .entry(feature.clone())
                        .or_insert_with(|| value.clone());
                    catalog.insert(feature.clone());
                }
            }
        }

        features.insert(
            "is_passed_bill".to_string(),
            AttributeValue::Flag(
                trace
                    .events
                    .iter()
                    .any(|e| passed_activities.contains(&e.activity)),
            ),
        );
        catalog.insert("is_passed_bill".to_string());

        rows.push(FeatureRow {
            case_id: trace.case_id.clone(),
            features,
            is_delayed: None,
        });
    }

    Ok(FeatureTable { rows, catalog })
}

/// The delay threshold: the reference (fastest) parliament's mean cycle
/// time scaled by `factor`.
pub fn compute_delay_threshold(reference: &LogSummary, factor: f64) -> Result<f64, EnrichError> {
    if reference.mean_cycle_days <= 0.0 {
        return Err(EnrichError::NonPositiveMean(reference.mean_cycle_days));
    }
    Ok(factor * reference.mean_cycle_days)
}

pub const DEFAULT_DELAY_FACTOR: f64 = 1.10;

/// Marks every row whose trace cycle time strictly exceeds the
/// threshold as delayed.
pub fn label_delayed(
    mut table: FeatureTable,
    log: &EventLog,
    threshold_days: f64,
) -> Result<FeatureTable, EnrichError> {
    let mut cycle_by_case: BTreeMap<&str, f64> = BTreeMap::new();
    for trace in &log.traces {
        cycle_by_case.insert(trace.case_id.as_str(), cycle_time_days(trace)? as f64);
    }
    for row in &mut table.rows {
        let cycle =
            cycle_by_case
                .get(row.case_id.as_str())
                .ok_or_else(|| EnrichError::UnknownCase {
                    case_id: row.case_id.clone(),
                })?;
        row.is_delayed = Some(*cycle > threshold_days);
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eventlog::{Event, Trace};
    use chrono::NaiveDate;

    fn date(y: i32, m: u32, d: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, d).unwrap()
    }

    fn trace_with(case_id: &str, events: &[(&str, NaiveDate)]) -> Trace {
        Trace {
            case_id: case_id.to_string(),
            case_attributes: BTreeMap::new(),
            events: events
                .iter()
                .map(|(a, d)| Event {
                    activity: (*a).to_string(),
                    timestamp: Some(*d),
                    attributes: BTreeMap::new(),
                })
                .collect(),
        }
    }

    fn log_of(traces: Vec<Trace>) -> EventLog {
        EventLog {
            name: "t".into(),
            traces,
            provenance: BTreeMap::new(),
        }
    }

    fn number(row: &FeatureRow, name: &str) -> Option<f64> {
        row.features.get(name).and_then(AttributeValue::as_number)
    }

    #[test]
    fn event_count_and_activity_counts() {
        let log = log_of(vec![
            trace_with(
                "1",
                &[
                    ("A", date(2010, 1, 1)),
                    ("B", date(2010, 1, 5)),
                    ("A", date(2010, 1, 9)),
                ],
            ),
            trace_with("2", &[("C", date(2011, 1, 1))]),
        ]);
        let table = extract_features(&log, &[], &BTreeSet::new()).unwrap();
        let row = &table.rows[0];
        assert_eq!(number(row, "event_count"), Some(3.0));
        assert_eq!(number(row, "A.count"), Some(2.0));
        assert_eq!(number(row, "B.count"), Some(1.0));
        assert_eq!(number(row, "C.count"), Some(0.0));
        // per-activity counts decompose the event count
        let total: f64 = ["A.count", "B.count", "C.count"]
            .iter()
            .map(|n| number(row, n).unwrap())
            .sum();
        assert_eq!(total, number(row, "event_count").unwrap());
    }

    #[test]
    fn delay_features_use_first_occurrences() {
        let log = log_of(vec![trace_with(
            "1",
            &[
                ("1. Lesung", date(2010, 1, 1)),
                ("Sitzung", date(2010, 1, 31)),
                ("Sitzung", date(2010, 3, 1)),
                ("2. Lesung", date(2010, 4, 1)),
            ],
        )]);
        let table = extract_features(&log, &[], &BTreeSet::new()).unwrap();
        let row = &table.rows[0];
        assert_eq!(number(row, "1. Lesung:Sitzung.delay"), Some(30.0));
        assert_eq!(number(row, "1. Lesung:2. Lesung.delay"), Some(90.0));
        assert_eq!(number(row, "Sitzung:2. Lesung.delay"), Some(60.0));
        // no pair feature for the missing direction
        assert_eq!(row.features.get("2. Lesung:Sitzung.delay"), None);
    }

    #[test]
    fn delay_feature_absent_when_target_only_before_source() {
        let log = log_of(vec![trace_with(
            "1",
            &[("B", date(2010, 1, 1)), ("A", date(2010, 2, 1))],
        )]);
        let table = extract_features(&log, &[], &BTreeSet::new()).unwrap();
        let row = &table.rows[0];
        assert_eq!(number(row, "B:A.delay"), Some(31.0));
        assert_eq!(row.features.get("A:B.delay"), None);
    }

    #[test]
    fn start_features_and_workload() {
        let log = log_of(vec![
            trace_with("1", &[("A", date(2010, 3, 10)), ("B", date(2010, 6, 1))]),
            trace_with("2", &[("A", date(2010, 4, 1)), ("B", date(2010, 4, 20))]),
            trace_with("3", &[("A", date(2011, 1, 1))]),
        ]);
        let table = extract_features(&log, &[], &BTreeSet::new()).unwrap();
        assert_eq!(number(&table.rows[0], "start_month"), Some(3.0));
        assert_eq!(number(&table.rows[0], "start_year"), Some(2010.0));
        // trace 1 starts first: only itself is open
        assert_eq!(number(&table.rows[0], "workload"), Some(1.0));
        // trace 2 starts while trace 1 is open
        assert_eq!(number(&table.rows[1], "workload"), Some(2.0));
        // trace 3 starts alone
        assert_eq!(number(&table.rows[2], "workload"), Some(1.0));
    }

    #[test]
    fn passed_bill_flag() {
        let log = log_of(vec![
            trace_with("1", &[("Gesetz", date(2010, 1, 1))]),
            trace_with("2", &[("Antrag", date(2010, 1, 1))]),
        ]);
        let passed: BTreeSet<String> = ["Gesetz".to_string()].into_iter().collect();
        let table = extract_features(&log, &[], &passed).unwrap();
        assert_eq!(
            table.rows[0].features.get("is_passed_bill"),
            Some(&AttributeValue::Flag(true))
        );
        assert_eq!(
            table.rows[1].features.get("is_passed_bill"),
            Some(&AttributeValue::Flag(false))
        );
    }

    #[test]
    fn year_sidecar_joins_by_start_year() {
        let csv = "year,is_election_year,squire_index\n2010,True,0.21\n2011,False,0.22\n";
        let sidecar = SidecarTable::from_csv("years", YEAR_KEY, csv.as_bytes()).unwrap();
        let log = log_of(vec![trace_with("1", &[("A", date(2010, 5, 1))])]);
        let table = extract_features(&log, &[sidecar], &BTreeSet::new()).unwrap();
        let row = &table.rows[0];
        assert_eq!(
            row.features.get("is_election_year"),
            Some(&AttributeValue::Flag(true))
        );
        assert_eq!(number(row, "squire_index"), Some(0.21));
    }

    #[test]
    fn case_sidecar_joins_by_case_id() {
        let csv = "case_id,pdf_size,word_count\n1,52300,1800\n";
        let sidecar = SidecarTable::from_csv("docs", CASE_KEY, csv.as_bytes()).unwrap();
        let log = log_of(vec![
            trace_with("1", &[("A", date(2010, 5, 1))]),
            trace_with("2", &[("A", date(2010, 6, 1))]),
        ]);
        let table = extract_features(&log, &[sidecar], &BTreeSet::new()).unwrap();
        assert_eq!(number(&table.rows[0], "pdf_size"), Some(52300.0));
        assert_eq!(number(&table.rows[0], "word_count"), Some(1800.0));
        assert_eq!(table.rows[1].features.get("pdf_size"), None);
    }

    #[test]
    fn sidecar_rejects_duplicate_keys() {
        let csv = "year,squire_index\n2010,0.2\n2010,0.3\n";
        assert!(matches!(
            SidecarTable::from_csv("years", YEAR_KEY, csv.as_bytes()),
            Err(EnrichError::DuplicateSidecarKey { .. })
        ));
    }

    #[test]
    fn sidecar_requires_key_column() {
        let csv = "jahr,squire_index\n2010,0.2\n";
        assert!(matches!(
            SidecarTable::from_csv("years", YEAR_KEY, csv.as_bytes()),
            Err(EnrichError::MissingKeyColumn { .. })
        ));
    }

    #[test]
    fn threshold_is_factor_times_mean() {
        let summary = LogSummary {
            n_cases: 1,
            n_events: 1,
            mean_events_per_case: 1.0,
            n_activities: 1,
            n_variants: 1,
            mean_cycle_days: 100.0,
            median_cycle_days: 100.0,
            std_cycle_days: 0.0,
        };
        assert!((compute_delay_threshold(&summary, 1.1).unwrap() - 110.0).abs() < 1e-9);
        assert_eq!(compute_delay_threshold(&summary, 1.0).unwrap(), 100.0);
    }

    #[test]
    fn threshold_for_published_reference_mean() {
        let summary = LogSummary {
            n_cases: 1005,
            n_events: 6269,
            mean_events_per_case: 6.24,
            n_activities: 34,
            n_variants: 347,
            mean_cycle_days: 61.1,
            median_cycle_days: 32.0,
            std_cycle_days: 94.88,
        };
        let threshold = compute_delay_threshold(&summary, DEFAULT_DELAY_FACTOR).unwrap();
        assert!((threshold - 67.21).abs() < 1e-9);
    }

    #[test]
    fn threshold_rejects_nonpositive_mean() {
        let summary = LogSummary {
            n_cases: 1,
            n_events: 1,
            mean_events_per_case: 1.0,
            n_activities: 1,
            n_variants: 1,
            mean_cycle_days: 0.0,
            median_cycle_days: 0.0,
            std_cycle_days: 0.0,
        };
        assert!(matches!(
            compute_delay_threshold(&summary, 1.1),
            Err(EnrichError::NonPositiveMean(_))
        ));
    }

    #[test]
    fn label_delayed_uses_strict_threshold() {
        let log = log_of(vec![
            trace_with("fast", &[("A", date(2010, 1, 1)), ("B", date(2010, 1, 11))]),
            trace_with("slow", &[("A", date(2010, 1, 1)), ("B", date(2010, 3, 1))]),
        ]);
        let table = extract_features(&log, &[], &BTreeSet::new()).unwrap();
        let labeled = label_delayed(table, &log, 10.0).unwrap();
        assert_eq!(labeled.rows[0].is_delayed, Some(false)); // exactly 10 days
        assert_eq!(labeled.rows[1].is_delayed, Some(true));
        assert_eq!(labeled.delayed_count(), 1);
    }

    #[test]
    fn label_delayed_infinite_threshold_marks_none() {
        let log = log_of(vec![trace_with(
            "1",
            &[("A", date(2010, 1, 1)), ("B", date(2012, 1, 1))],
        )]);
        let table = extract_features(&log, &[], &BTreeSet::new()).unwrap();
        let labeled = label_delayed(table, &log, f64::INFINITY).unwrap();
        assert_eq!(labeled.delayed_count(), 0);
    }

    #[test]
    fn label_delayed_rejects_unknown_case() {
        let log = log_of(vec![trace_with("1", &[("A", date(2010, 1, 1))])]);
        let table = FeatureTable {
            rows: vec![FeatureRow {
                case_id: "ghost".into(),
                features: BTreeMap::new(),
                is_delayed: None,
            }],
            catalog: BTreeSet::new(),
        };
        assert!(matches!(
            label_delayed(table, &log, 10.0),
            Err(EnrichError::UnknownCase { .. })
        ));
    }

    #[test]
    fn delayed_count_is_nonincreasing_in_threshold() {
        let log = log_of(vec![
            trace_with("1", &[("A", date(2010, 1, 1)), ("B", date(2010, 1, 11))]),
            trace_with("2", &[("A", date(2010, 1, 1)), ("B", date(2010, 3, 1))]),
            trace_with("3", &[("A", date(2010, 1, 1)), ("B", date(2011, 1, 1))]),
        ]);
        let mut last = usize::MAX;
        for threshold in [0.0, 10.0, 59.0, 200.0, 365.0, 1000.0] {
            let table = extract_features(&log, &[], &BTreeSet::new()).unwrap();
            let labeled = label_delayed(table, &log, threshold).unwrap();
            assert!(labeled.delayed_count() <= last);
            last = labeled.delayed_count();
        }
    }

    #[test]
    fn extraction_is_independent_of_trace_order() {
        let a = trace_with("a", &[("A", date(2010, 1, 1)), ("B", date(2010, 2, 1))]);
        let b = trace_with("b", &[("B", date(2010, 1, 15)), ("C", date(2010, 3, 1))]);
        let c = trace_with("c", &[("A", date(2011, 1, 1))]);
        let forward = extract_features(
            &log_of(vec![a.clone(), b.clone(), c.clone()]),
            &[],
            &BTreeSet::new(),
        )
        .unwrap();
        let reversed = extract_features(&log_of(vec![c, b, a]), &[], &BTreeSet::new()).unwrap();
        assert_eq!(forward.catalog, reversed.catalog);
        for row in &forward.rows {
            let twin = reversed
                .rows
                .iter()
                .find(|r| r.case_id == row.case_id)
                .unwrap();
            assert_eq!(row, twin);
        }
    }

    #[test]
    fn feature_csv_round_trips() {
        let log = log_of(vec![
            trace_with("1", &[("A", date(2010, 1, 1)), ("B", date(2010, 1, 31))]),
            trace_with("2", &[("B", date(2011, 1, 1))]),
        ]);
        let passed: BTreeSet<String> = ["B".to_string()].into_iter().collect();
        let table = extract_features(&log, &[], &passed).unwrap();
        let labeled = label_delayed(table, &log, 5.0).unwrap();
        let csv = labeled.to_csv();
        let parsed = FeatureTable::from_csv(csv.as_bytes()).unwrap();
        assert_eq!(parsed, labeled);
    }
}
