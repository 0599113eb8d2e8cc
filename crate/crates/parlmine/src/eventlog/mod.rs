//! Core event log model and the transformations that turn a raw
//! documentation export into an analysis-ready log.
//!
//! A [`Trace`] corresponds to one parliamentary procedure, an [`Event`]
//! to one of its documents. Timestamps are day-granular calendar dates;
//! all duration arithmetic downstream works in whole days.

use std::collections::{BTreeMap, BTreeSet};

use chrono::NaiveDate;
use regex::Regex;
use thiserror::Error;

use crate::ingest::RawExport;

pub mod xes;

/// A typed attribute value attached to a log, trace, or event.
#[derive(Debug, Clone, PartialEq)]
pub enum AttributeValue {
    Text(String),
    /// Kept sorted ascending after [`sort_list_attributes`] ran.
    TextList(Vec<String>),
    Number(f64),
    Date(NaiveDate),
    Flag(bool),
}

impl AttributeValue {
    pub fn as_text(&self) -> Option<&str> {
        match self {
            AttributeValue::Text(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_number(&self) -> Option<f64> {
        match self {
            AttributeValue::Number(n) => Some(*n),
            _ => None,
        }
    }

    pub fn as_flag(&self) -> Option<bool> {
        match self {
            AttributeValue::Flag(b) => Some(*b),
            _ => None,
        }
    }
}

/// One document of a procedure. An empty `activity` means the document
/// carried no usable type label; cleaning either corrects or removes it.
#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub activity: String,
    pub timestamp: Option<NaiveDate>,
    pub attributes: BTreeMap<String, AttributeValue>,
}

/// One procedure: an ordered sequence of document events plus the
/// procedure-level attributes (notably `VSysL`).
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub case_id: String,
    pub case_attributes: BTreeMap<String, AttributeValue>,
    pub events: Vec<Event>,
}

impl Trace {
    /// Earliest timestamp over the trace's dated events.
    pub fn start_date(&self) -> Option<NaiveDate> {
        self.events.iter().filter_map(|e| e.timestamp).min()
    }

    /// Latest timestamp over the trace's dated events.
    pub fn end_date(&self) -> Option<NaiveDate> {
        self.events.iter().filter_map(|e| e.timestamp).max()
    }

    /// Year of the trace's first event; a trace is attributed to the
    /// year its procedure was opened.
    pub fn start_year(&self) -> Option<i32> {
        use chrono::Datelike;
        self.start_date().map(|d| d.year())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventLog {
    pub name: String,
    pub traces: Vec<Trace>,
    /// Source files and generation parameters, carried along for audit.
    pub provenance: BTreeMap<String, String>,
}

impl EventLog {
    pub fn n_events(&self) -> usize {
        self.traces.iter().map(|t| t.events.len()).sum()
    }

    /// Distinct activity labels over all events.
    pub fn activities(&self) -> BTreeSet<String> {
        self.traces
            .iter()
            .flat_map(|t| t.events.iter())
            .map(|e| e.activity.clone())
            .collect()
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum BuildError {
    #[error("no date formats supplied")]
    NoDateFormats,
}

#[derive(Debug, Error, PartialEq)]
pub enum WindowError {
    #[error("bad time window: first year {first} exceeds last year {last}")]
    BadWindow { first: i32, last: i32 },
}

#[derive(Debug, Error)]
pub enum RelabelError {
    #[error("invalid pattern {pattern:?}: {source}")]
    InvalidPattern {
        pattern: String,
        source: regex::Error,
    },
}

/// One activity relabeling rule: when the activity matches `activity`
/// and, if set, the event attribute `attribute_key` matches
/// `attribute_pattern`, the activity is rewritten to `new_label`.
#[derive(Debug, Clone, PartialEq)]
pub struct RelabelRule {
    pub activity: String,
    pub attribute_key: Option<String>,
    pub attribute_pattern: Option<String>,
    pub new_label: String,
}

/// Attempts each format in order; the first successful parse wins.
pub fn parse_date(text: &str, date_formats: &[String]) -> Option<NaiveDate> {
    let text = text.trim();
    date_formats
        .iter()
        .find_map(|fmt| NaiveDate::parse_from_str(text, fmt).ok())
}

/// Turns a parsed export into an event log: one trace per process, one
/// event per document. Document dates are parsed against
/// `date_formats`; unparseable or missing dates leave the event without
/// a timestamp (cleaning removes those traces later). Within a trace,
/// events are ordered by timestamp; ties and undated events keep file
/// order, undated events sorting last.
pub fn build_log(raw: &RawExport, date_formats: &[String]) -> Result<EventLog, BuildError> {
    use chrono::Datelike;

    if date_formats.is_empty() {
        return Err(BuildError::NoDateFormats);
    }

    let mut used_ids: BTreeSet<String> = BTreeSet::new();
    let mut traces = Vec::with_capacity(raw.processes.len());

    for (ordinal, process) in raw.processes.iter().enumerate() {
        let base_id = match &process.internal_id {
            Some(id) if !id.is_empty() => id.clone(),
            _ => format!("{}#{}", raw.source_name, ordinal + 1),
        };
        // case identifiers must be unique within the log
        let mut case_id = base_id.clone();
        let mut n = 1;
        while !used_ids.insert(case_id.clone()) {
            n += 1;
            case_id = format!("{base_id}#{n}");
        }

        let mut case_attributes = BTreeMap::new();
        for (key, value) in [
            ("VTyp", &process.v_typ),
            ("VTypL", &process.v_typ_l),
            ("VSys", &process.v_sys),
            ("VSysL", &process.v_sys_l),
        ] {
            if let Some(v) = value {
                case_attributes.insert(key.to_string(), AttributeValue::Text(v.clone()));
            }
        }
        if !process.side_entries.is_empty() {
            case_attributes.insert(
                "Nebeneintrag".to_string(),
                AttributeValue::TextList(process.side_entries.clone()),
            );
        }

        let mut events: Vec<Event> = process
            .documents
            .iter()
            .map(|doc| {
                let mut attributes = BTreeMap::new();
                for (key, value) in [
                    ("DNr", &doc.internal_id),
                    ("Titel", &doc.title),
                    ("DokDat", &doc.date_text),
                    ("DokTypL", &doc.dok_typ_l),
                    ("DokArtL", &doc.dok_art_l),
                    ("URL", &doc.url),
                    ("Abstract", &doc.abstract_text),
                ] {
                    if let Some(v) = value {
                        attributes.insert(key.to_string(), AttributeValue::Text(v.clone()));
                    }
                }
                for (key, list) in [
                    ("Desk", &doc.descriptors),
                    ("Urheber", &doc.authors),
                    ("Redner", &doc.speakers),
                ] {
                    if !list.is_empty() {
                        attributes.insert(key.to_string(), AttributeValue::TextList(list.clone()));
                    }
                }
                for (key, value) in &doc.extra_attributes {
                    attributes.insert(key.clone(), AttributeValue::Text(value.clone()));
                }
                Event {
                    activity: doc.dok_typ_l.clone().unwrap_or_default(),
                    timestamp: doc
                        .date_text
                        .as_deref()
                        .and_then(|t| parse_date(t, date_formats)),
                    attributes,
                }
            })
            .collect();

        // stable sort keeps document file order on equal dates
        events.sort_by_key(|e| {
            e.timestamp
                .map_or(i64::MAX, |d| i64::from(d.num_days_from_ce()))
        });

        traces.push(Trace {
            case_id,
            case_attributes,
            events,
        });
    }

    let mut provenance = BTreeMap::new();
    provenance.insert("source".to_string(), raw.source_name.clone());
    provenance.insert("date_formats".to_string(), date_formats.join(" "));

    Ok(sort_list_attributes(EventLog {
        name: raw.source_name.clone(),
        traces,
        provenance,
    }))
}

/// Sorts every list-valued attribute ascending, at case and event
/// level. Idempotent; everything else is left untouched.
pub fn sort_list_attributes(mut log: EventLog) -> EventLog {
    fn sort_map(map: &mut BTreeMap<String, AttributeValue>) {
        for value in map.values_mut() {
            if let AttributeValue::TextList(items) = value {
                items.sort_unstable();
            }
        }
    }
    for trace in &mut log.traces {
        sort_map(&mut trace.case_attributes);
        for event in &mut trace.events {
            sort_map(&mut event.attributes);
        }
    }
    log
}

/// Keeps exactly the traces whose case attribute `key` is the text
/// `value`; traces missing the key are dropped.
pub fn filter_by_case_attribute(mut log: EventLog, key: &str, value: &str) -> EventLog {
    log.traces
        .retain(|t| t.case_attributes.get(key).and_then(|v| v.as_text()) == Some(value));
    log
}

/// Keeps traces whose first event falls in `[first_year, last_year]`.
/// Traces without a dated first event are dropped.
pub fn filter_by_time_window(
    mut log: EventLog,
    first_year: i32,
    last_year: i32,
) -> Result<EventLog, WindowError> {
    if first_year > last_year {
        return Err(WindowError::BadWindow {
            first: first_year,
            last: last_year,
        });
    }
    log.traces.retain(|t| {
        t.start_year()
            .is_some_and(|y| y >= first_year && y <= last_year)
    });
    Ok(log)
}

/// Rewrites event activities according to the first matching rule.
/// A rule matches when its activity pattern matches the current label
/// and, if an attribute predicate is set, the named event attribute
/// matches it too (for list attributes, any element counts).
type CompiledRelabelRule<'a> = (Regex, Option<(String, Regex)>, &'a str);

pub fn relabel_readings(
    mut log: EventLog,
    rules: &[RelabelRule],
) -> Result<EventLog, RelabelError> {
    let compiled: Vec<CompiledRelabelRule> = rules
        .iter()
        .map(|rule| {
            let activity =
                Regex::new(&rule.activity).map_err(|source| RelabelError::InvalidPattern {
                    pattern: rule.activity.clone(),
                    source,
                })?;
            let attribute = match (&rule.attribute_key, &rule.attribute_pattern) {
                (Some(key), Some(pattern)) => {
                    let re =
                        Regex::new(pattern).map_err(|source| RelabelError::InvalidPattern {
                            pattern: pattern.clone(),
                            source,
                        })?;
                    Some((key.clone(), re))
                }
                _ => None,
            };
            Ok((activity, attribute, rule.new_label.as_str()))
        })
        .collect::<Result<_, RelabelError>>()?;

    for trace in &mut log.traces {
        for event in &mut trace.events {
            for (activity_re, attribute, new_label) in &compiled {
                if !activity_re.is_match(&event.activity) {
                    continue;
                }
                let attribute_ok = match attribute {
                    None => true,
                    Some((key, re)) => match event.attributes.get(key) {
                        Some(AttributeValue::Text(s)) => re.is_match(s),
                        Some(AttributeValue::TextList(items)) => {
                            items.iter().any(|s| re.is_match(s))
                        }
                        _ => false,
                    },
                };
                if attribute_ok {
                    event.activity = (*new_label).to_string();
                    break;
                }
            }
        }
    }
    Ok(log)
}
