//! XES (IEEE 1849) import and export for the subset of attribute types
//! the log model uses: string, date, float, boolean, and lists of
//! strings. Activities are written under `concept:name`, calendar
//! dates under `time:timestamp` rendered as midnight UTC. Reading is
//! the inverse of writing up to attribute map ordering; it also accepts
//! int attributes (as floats) and bare `yyyy-mm-dd` dates from other
//! producers.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use chrono::NaiveDate;
use quick_xml::events::{BytesDecl, BytesEnd, BytesStart, Event as XmlEvent};
use quick_xml::{Reader, Writer};
use thiserror::Error;

use super::{AttributeValue, Event, EventLog, Trace};

const ACTIVITY_KEY: &str = "concept:name";
const TIMESTAMP_KEY: &str = "time:timestamp";

#[derive(Debug, Error)]
pub enum XesWriteError {
    #[error("failed to write XES: {0}")]
    SinkFailure(String),
}

impl From<quick_xml::Error> for XesWriteError {
    fn from(e: quick_xml::Error) -> Self {
        XesWriteError::SinkFailure(e.to_string())
    }
}

impl From<std::io::Error> for XesWriteError {
    fn from(e: std::io::Error) -> Self {
        XesWriteError::SinkFailure(e.to_string())
    }
}

#[derive(Debug, Error)]
pub enum XesReadError {
    #[error("malformed XES: {0}")]
    MalformedXes(String),
}

impl From<quick_xml::Error> for XesReadError {
    fn from(e: quick_xml::Error) -> Self {
        XesReadError::MalformedXes(e.to_string())
    }
}

fn date_to_xs(date: NaiveDate) -> String {
    format!("{date}T00:00:00+00:00")
}

fn write_attribute<W: Write>(
    writer: &mut Writer<W>,
    key: &str,
    value: &AttributeValue,
) -> Result<(), XesWriteError> {
    match value {
        AttributeValue::Text(s) => write_scalar(writer, "string", key, s),
        AttributeValue::Number(n) => write_scalar(writer, "float", key, &n.to_string()),
        AttributeValue::Date(d) => write_scalar(writer, "date", key, &date_to_xs(*d)),
        AttributeValue::Flag(b) => {
            write_scalar(writer, "boolean", key, if *b { "true" } else { "false" })
        }
        AttributeValue::TextList(items) => {
            let mut list = BytesStart::new("list");
            list.push_attribute(("key", key));
            writer.write_event(XmlEvent::Start(list))?;
            writer.write_event(XmlEvent::Start(BytesStart::new("values")))?;
            for item in items {
                write_scalar(writer, "string", "value", item)?;
            }
            writer.write_event(XmlEvent::End(BytesEnd::new("values")))?;
            writer.write_event(XmlEvent::End(BytesEnd::new("list")))?;
            Ok(())
        }
    }
}

fn write_scalar<W: Write>(
    writer: &mut Writer<W>,
    tag: &str,
    key: &str,
    value: &str,
) -> Result<(), XesWriteError> {
    let mut el = BytesStart::new(tag);
    el.push_attribute(("key", key));
    el.push_attribute(("value", value));
    writer.write_event(XmlEvent::Empty(el))?;
    Ok(())
}

/// Serializes a log as XES XML (UTF-8, indented, deterministic byte
/// output for equal logs).
pub fn write_xes<W: Write>(log: &EventLog, sink: W) -> Result<(), XesWriteError> {
    let mut writer = Writer::new_with_indent(sink, b' ', 2);
    writer.write_event(XmlEvent::Decl(BytesDecl::new("1.0", Some("UTF-8"), None)))?;

    let mut log_el = BytesStart::new("log");
    log_el.push_attribute(("xes.version", "1849-2016"));
    log_el.push_attribute(("xes.features", "nested-attributes"));
    writer.write_event(XmlEvent::Start(log_el))?;

    for (name, prefix, uri) in [
        (
            "Concept",
            "concept",
            "http://www.xes-standard.org/concept.xesext",
        ),
        ("Time", "time", "http://www.xes-standard.org/time.xesext"),
    ] {
        let mut ext = BytesStart::new("extension");
        ext.push_attribute(("name", name));
        ext.push_attribute(("prefix", prefix));
        ext.push_attribute(("uri", uri));
        writer.write_event(XmlEvent::Empty(ext))?;
    }

    write_scalar(&mut writer, "string", ACTIVITY_KEY, &log.name)?;
    for (key, value) in &log.provenance {
        write_scalar(&mut writer, "string", key, value)?;
    }

    for trace in &log.traces {
        writer.write_event(XmlEvent::Start(BytesStart::new("trace")))?;
        write_scalar(&mut writer, "string", ACTIVITY_KEY, &trace.case_id)?;
        for (key, value) in &trace.case_attributes {
            write_attribute(&mut writer, key, value)?;
        }
        for event in &trace.events {
            writer.write_event(XmlEvent::Start(BytesStart::new("event")))?;
            write_scalar(&mut writer, "string", ACTIVITY_KEY, &event.activity)?;
            if let Some(ts) = event.timestamp {
                write_scalar(&mut writer, "date", TIMESTAMP_KEY, &date_to_xs(ts))?;
            }
            for (key, value) in &event.attributes {
                write_attribute(&mut writer, key, value)?;
            }
            writer.write_event(XmlEvent::End(BytesEnd::new("event")))?;
        }
        writer.write_event(XmlEvent::End(BytesEnd::new("trace")))?;
    }

    writer.write_event(XmlEvent::End(BytesEnd::new("log")))?;
    writer.into_inner().flush()?;
    Ok(())
}

fn parse_xs_date(value: &str) -> Result<NaiveDate, XesReadError> {
    if let Ok(dt) = chrono::DateTime::parse_from_rfc3339(value) {
        return Ok(dt.date_naive());
    }
    NaiveDate::parse_from_str(value, "%Y-%m-%d")
        .map_err(|_| XesReadError::MalformedXes(format!("unparseable date value {value:?}")))
}

#[derive(Debug, Default)]
struct PendingEvent {
    activity: String,
    timestamp: Option<NaiveDate>,
    attributes: BTreeMap<String, AttributeValue>,
}

#[derive(Debug, Default)]
struct PendingTrace {
    case_id: String,
    case_attributes: BTreeMap<String, AttributeValue>,
    events: Vec<Event>,
}

/// Parses an XES document produced by [`write_xes`] or a compatible
/// tool back into an [`EventLog`].
pub fn read_xes<R: BufRead>(source: R) -> Result<EventLog, XesReadError> {
    let mut reader = Reader::from_reader(source);
    reader.config_mut().trim_text(true);

    let mut buf = Vec::new();
    let mut seen_log = false;

    let mut log = EventLog {
        name: String::new(),
        traces: Vec::new(),
        provenance: BTreeMap::new(),
    };
    let mut trace: Option<PendingTrace> = None;
    let mut event: Option<PendingEvent> = None;
    // (key, collected items) of the innermost open list attribute
    let mut list: Option<(String, Vec<String>)> = None;

    loop {
        let xml_event = reader.read_event_into(&mut buf).map_err(|e| {
            XesReadError::MalformedXes(format!("{e} (byte {})", reader.buffer_position()))
        })?;
        let self_closing = matches!(xml_event, XmlEvent::Empty(_));
        match xml_event {
            XmlEvent::Start(el) | XmlEvent::Empty(el) => {
                let name = reader.decoder().decode(el.name().as_ref())?.into_owned();
                if !seen_log {
                    if name != "log" {
                        return Err(XesReadError::MalformedXes(format!(
                            "root element is {name:?}, expected log"
                        )));
                    }
                    seen_log = true;
                    if self_closing {
                        return Ok(log);
                    }
                    continue;
                }

                match name.as_str() {
                    "trace" => {
                        trace = Some(PendingTrace::default());
                        if self_closing {
                            let t = trace.take().expect("just set");
                            log.traces.push(Trace {
                                case_id: t.case_id,
                                case_attributes: t.case_attributes,
                                events: t.events,
                            });
                        }
                    }
                    "event" => {
                        event = Some(PendingEvent::default());
                        if self_closing {
                            let e = event.take().expect("just set");
                            if let Some(t) = trace.as_mut() {
                                t.events.push(Event {
                                    activity: e.activity,
                                    timestamp: e.timestamp,
                                    attributes: e.attributes,
                                });
                            }
                        }
                    }
                    "list" => {
                        let key = read_key(&reader, &el)?;
                        if self_closing {
                            store_attribute(
                                &key,
                                AttributeValue::TextList(Vec::new()),
                                &mut log,
                                &mut trace,
                                &mut event,
                            );
                        } else {
                            list = Some((key, Vec::new()));
                        }
                    }
                    "values" => {}
                    "string" | "date" | "int" | "float" | "boolean" | "id" => {
                        let key = read_key(&reader, &el)?;
                        let raw = read_value(&reader, &el)?;
                        if let Some((_, items)) = list.as_mut() {
                            // inside a list container only the string
                            // payloads matter
                            items.push(raw);
                        } else {
                            let value = scalar_value(&name, &raw)?;
                            apply_scalar(&key, value, &mut log, &mut trace, &mut event);
                        }
                        if !self_closing {
                            // nested children below scalar attributes are
                            // outside the supported subset; skip them
                            let end_name = el.name().as_ref().to_vec();
                            let mut skip_buf = Vec::new();
                            reader
                                .read_to_end_into(quick_xml::name::QName(&end_name), &mut skip_buf)
                                .map_err(|e| XesReadError::MalformedXes(e.to_string()))?;
                        }
                    }
                    // header matter: extensions, globals, classifiers
                    "extension" | "global" | "classifier" => {
                        if !self_closing {
                            let end_name = el.name().as_ref().to_vec();
                            let mut skip_buf = Vec::new();
                            reader
                                .read_to_end_into(quick_xml::name::QName(&end_name), &mut skip_buf)
                                .map_err(|e| XesReadError::MalformedXes(e.to_string()))?;
                        }
                    }
                    other => {
                        return Err(XesReadError::MalformedXes(format!(
                            "unexpected element {other:?}"
                        )));
                    }
                }
            }
            XmlEvent::End(el) => {
                let name = reader.decoder().decode(el.name().as_ref())?.into_owned();
                match name.as_str() {
                    "log" => return Ok(log),
                    "trace" => {
                        if let Some(t) = trace.take() {
                            log.traces.push(Trace {
                                case_id: t.case_id,
                                case_attributes: t.case_attributes,
                                events: t.events,
                            });
                        }
                    }
                    "event" => {
                        if let (Some(t), Some(e)) = (trace.as_mut(), event.take()) {
                            t.events.push(Event {
                                activity: e.activity,
                                timestamp: e.timestamp,
                                attributes: e.attributes,
                            });
                        }
                    }
                    "list" => {
                        if let Some((key, items)) = list.take() {
                            store_attribute(
                                &key,
                                AttributeValue::TextList(items),
                                &mut log,
                                &mut trace,
                                &mut event,
                            );
                        }
                    }
                    _ => {}
                }
            }
            XmlEvent::Eof => {
                return Err(XesReadError::MalformedXes(
                    "unexpected end of file".to_string(),
                ));
            }
            _ => {}
        }
        buf.clear();
    }
}

fn read_key<R: BufRead>(reader: &Reader<R>, el: &BytesStart) -> Result<String, XesReadError> {
    read_xml_attr(reader, el, "key")?
        .ok_or_else(|| XesReadError::MalformedXes("attribute element without key".to_string()))
}

fn read_value<R: BufRead>(reader: &Reader<R>, el: &BytesStart) -> Result<String, XesReadError> {
    read_xml_attr(reader, el, "value")?
        .ok_or_else(|| XesReadError::MalformedXes("attribute element without value".to_string()))
}

fn read_xml_attr<R: BufRead>(
    reader: &Reader<R>,
    el: &BytesStart,
    wanted: &str,
) -> Result<Option<String>, XesReadError> {
    for attr in el.attributes() {
        let attr = attr.map_err(|e| XesReadError::MalformedXes(e.to_string()))?;
        if attr.key.as_ref() == wanted.as_bytes() {
            return Ok(Some(
                attr.decode_and_unescape_value(reader.decoder())?
                    .into_owned(),
            ));
        }
    }
    Ok(None)
}

fn scalar_value(tag: &str, raw: &str) -> Result<AttributeValue, XesReadError> {
    Ok(match tag {
        "string" | "id" => AttributeValue::Text(raw.to_string()),
        "date" => AttributeValue::Date(parse_xs_date(raw)?),
        "int" | "float" => AttributeValue::Number(raw.parse::<f64>().map_err(|_| {
            XesReadError::MalformedXes(format!("unparseable numeric value {raw:?}"))
        })?),
        "boolean" => match raw {
            "true" | "True" => AttributeValue::Flag(true),
            "false" | "False" => AttributeValue::Flag(false),
            _ => {
                return Err(XesReadError::MalformedXes(format!(
                    "unparseable boolean value {raw:?}"
                )))
            }
        },
        _ => unreachable!("caller matched the tag"),
    })
}

/// Scalar attributes fold into whichever scope is innermost; the
/// `concept:name` and `time:timestamp` keys map back onto the model's
/// dedicated fields.
fn apply_scalar(
    key: &str,
    value: AttributeValue,
    log: &mut EventLog,
    trace: &mut Option<PendingTrace>,
    event: &mut Option<PendingEvent>,
) {
    if let Some(e) = event.as_mut() {
        match (key, &value) {
            (ACTIVITY_KEY, AttributeValue::Text(s)) => e.activity = s.clone(),
            (TIMESTAMP_KEY, AttributeValue::Date(d)) => e.timestamp = Some(*d),
            _ => {
                e.attributes.insert(key.to_string(), value);
            }
        }
        return;
    }
    if let Some(t) = trace.as_mut() {
        match (key, &value) {
            (ACTIVITY_KEY, AttributeValue::Text(s)) => t.case_id = s.clone(),
            _ => {
                t.case_attributes.insert(key.to_string(), value);
            }
        }
        return;
    }
    match (key, value) {
        (ACTIVITY_KEY, AttributeValue::Text(s)) => log.name = s,
        (_, AttributeValue::Text(s)) => {
            log.provenance.insert(key.to_string(), s);
        }
        // non-string log attributes have no slot in the model
        _ => {}
    }
}

fn store_attribute(
    key: &str,
    value: AttributeValue,
    log: &mut EventLog,
    trace: &mut Option<PendingTrace>,
    event: &mut Option<PendingEvent>,
) {
    if let Some(e) = event.as_mut() {
        e.attributes.insert(key.to_string(), value);
    } else if let Some(t) = trace.as_mut() {
        t.case_attributes.insert(key.to_string(), value);
    } else {
        // list attributes at log level are outside the model; drop
        let _ = log;
    }
}
