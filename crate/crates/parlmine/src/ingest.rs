//! Parsing of parliamentary documentation XML exports.
//!
//! Exports share one shape: an `Export` root holding `Vorgang`
//! (process) elements, which hold `Nebeneintrag` (side entry) and
//! `Dokument` (document) elements. Document and process properties show
//! up either as XML attributes or as child elements depending on the
//! producing library; both forms are normalized into the same fields.
//! Properties without a dedicated field are kept in `extra_attributes`
//! so nothing is dropped.

use std::collections::BTreeMap;
use std::io::BufRead;

use quick_xml::events::Event as XmlEvent;
use quick_xml::Reader;
use thiserror::Error;

/// One `Dokument` element, normalized.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawDocument {
    pub internal_id: Option<String>,
    pub title: Option<String>,
    /// Date exactly as found in the file; parsed later against the
    /// configured formats.
    pub date_text: Option<String>,
    pub dok_typ_l: Option<String>,
    pub dok_art_l: Option<String>,
    pub url: Option<String>,
    pub descriptors: Vec<String>,
    pub authors: Vec<String>,
    pub speakers: Vec<String>,
    pub abstract_text: Option<String>,
    /// Anything not captured by a named field, under its original key.
    pub extra_attributes: BTreeMap<String, String>,
}

/// One `Vorgang` element.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawProcess {
    pub internal_id: Option<String>,
    pub v_typ: Option<String>,
    pub v_typ_l: Option<String>,
    pub v_sys: Option<String>,
    pub v_sys_l: Option<String>,
    /// Descriptor text of each `Nebeneintrag`, in file order.
    pub side_entries: Vec<String>,
    pub documents: Vec<RawDocument>,
}

/// One export file (or several concatenated ones), in file order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawExport {
    pub source_name: String,
    pub processes: Vec<RawProcess>,
}

impl RawExport {
    /// Appends another export's processes; used to merge the one file
    /// per election period into a single per-parliament export.
    pub fn extend(&mut self, other: RawExport) {
        self.processes.extend(other.processes);
    }
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("malformed XML: {0}")]
    MalformedXml(String),
    #[error("root element is {found:?}, expected Export")]
    WrongRootElement { found: String },
}

impl From<quick_xml::Error> for IngestError {
    fn from(e: quick_xml::Error) -> Self {
        IngestError::MalformedXml(e.to_string())
    }
}

/// Data oddities worth reporting but not fatal to parsing.
#[derive(Debug, Clone, PartialEq)]
pub enum IngestWarning {
    /// A process contains documents without a date; `document_indices`
    /// are their positions within the process.
    MissingDate {
        process_index: usize,
        document_indices: Vec<usize>,
    },
    /// A process contains documents carrying neither `DokTypL` nor
    /// `DokArtL`, so no activity label can ever be derived for them.
    MissingActivitySource {
        process_index: usize,
        document_indices: Vec<usize>,
    },
    /// A process without any documents; it yields an empty trace.
    EmptyProcess { process_index: usize },
    /// An element inside `Vorgang` that is neither `Nebeneintrag` nor
    /// `Dokument`; it was skipped.
    UnknownElement {
        process_index: usize,
        element: String,
    },
}

impl std::fmt::Display for IngestWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            IngestWarning::MissingDate {
                process_index,
                document_indices,
            } => write!(
                f,
                "process {}: {} document(s) without a date",
                process_index,
                document_indices.len()
            ),
            IngestWarning::MissingActivitySource {
                process_index,
                document_indices,
            } => write!(
                f,
                "process {}: {} document(s) without DokTypL or DokArtL",
                process_index,
                document_indices.len()
            ),
            IngestWarning::EmptyProcess { process_index } => {
                write!(f, "process {process_index}: no documents")
            }
            IngestWarning::UnknownElement {
                process_index,
                element,
            } => write!(
                f,
                "process {process_index}: skipped unknown element {element:?}"
            ),
        }
    }
}

// Recognized property names. Short-form variants (DokTyp, DokArt, ...)
// intentionally stay in extra_attributes: only the long forms drive the
// log generation.
const DOC_ID_KEYS: &[&str] = &["DNr", "DokNr", "DokID"];
const DOC_TITLE_KEYS: &[&str] = &["Titel", "DokTitel"];
const DOC_DATE_KEYS: &[&str] = &["DokDat", "Datum"];
const DOC_URL_KEYS: &[&str] = &["LokURL", "DokURL", "URL", "Url"];
const DOC_DESCRIPTOR_KEYS: &[&str] = &["Desk", "Deskriptor"];
const DOC_AUTHOR_KEYS: &[&str] = &["Urheber", "Autor"];
const DOC_SPEAKER_KEYS: &[&str] = &["Redner"];
const DOC_ABSTRACT_KEYS: &[&str] = &["Abstract"];
const PROCESS_ID_KEYS: &[&str] = &["VNr", "VID", "ID"];

fn set_or_join(slot: &mut Option<String>, value: String) {
    match slot {
        None => *slot = Some(value),
        Some(existing) => {
            existing.push_str("; ");
            existing.push_str(&value);
        }
    }
}

impl RawDocument {
    fn absorb(&mut self, key: &str, value: String) {
        if DOC_ID_KEYS.contains(&key) {
            set_or_join(&mut self.internal_id, value);
        } else if DOC_TITLE_KEYS.contains(&key) {
            set_or_join(&mut self.title, value);
        } else if DOC_DATE_KEYS.contains(&key) {
            set_or_join(&mut self.date_text, value);
        } else if key == "DokTypL" {
            set_or_join(&mut self.dok_typ_l, value);
        } else if key == "DokArtL" {
            set_or_join(&mut self.dok_art_l, value);
        } else if DOC_URL_KEYS.contains(&key) {
            set_or_join(&mut self.url, value);
        } else if DOC_DESCRIPTOR_KEYS.contains(&key) {
            self.descriptors.push(value);
        } else if DOC_AUTHOR_KEYS.contains(&key) {
            self.authors.push(value);
        } else if DOC_SPEAKER_KEYS.contains(&key) {
            self.speakers.push(value);
        } else if DOC_ABSTRACT_KEYS.contains(&key) {
            set_or_join(&mut self.abstract_text, value);
        } else {
            match self.extra_attributes.get_mut(key) {
                Some(existing) => {
                    existing.push_str("; ");
                    existing.push_str(&value);
                }
                None => {
                    self.extra_attributes.insert(key.to_string(), value);
                }
            }
        }
    }
}

impl RawProcess {
    /// Returns false when the key is not a known process property.
    fn absorb(&mut self, key: &str, value: String) -> bool {
        if PROCESS_ID_KEYS.contains(&key) {
            set_or_join(&mut self.internal_id, value);
        } else if key == "VTyp" {
            set_or_join(&mut self.v_typ, value);
        } else if key == "VTypL" {
            set_or_join(&mut self.v_typ_l, value);
        } else if key == "VSys" {
            set_or_join(&mut self.v_sys, value);
        } else if key == "VSysL" {
            set_or_join(&mut self.v_sys_l, value);
        } else {
            return false;
        }
        true
    }
}

/// Parses one export file. See [`parse_export_verbose`] for the variant
/// that also reports parse-time warnings.
pub fn parse_export<R: BufRead>(
    xml_source: R,
    source_name: &str,
) -> Result<RawExport, IngestError> {
    parse_export_verbose(xml_source, source_name).map(|(export, _)| export)
}

/// Parses one export file, collecting warnings about skipped unknown
/// elements. The declared XML encoding is honored; files without a
/// declaration are treated as UTF-8.
pub fn parse_export_verbose<R: BufRead>(
    xml_source: R,
    source_name: &str,
) -> Result<(RawExport, Vec<IngestWarning>), IngestError> {
    let mut reader = Reader::from_reader(xml_source);
    reader.config_mut().trim_text(true);

    let mut buf = Vec::new();
    let mut warnings = Vec::new();
    let mut export = RawExport {
        source_name: source_name.to_string(),
        processes: Vec::new(),
    };

    // Stack of open elements below Vorgang level, each collecting text.
    #[derive(Debug)]
    enum Scope {
        Process,
        Document(Box<RawDocument>),
        SideEntry { text: Vec<String> },
        Property { name: String, text: Vec<String> },
    }

    let mut seen_root = false;
    let mut stack: Vec<Scope> = Vec::new();
    let mut current: Option<RawProcess> = None;

    macro_rules! decode_attrs {
        ($el:expr, $target:expr) => {
            for attr in $el.attributes() {
                let attr = attr.map_err(|e| IngestError::MalformedXml(e.to_string()))?;
                let key = reader.decoder().decode(attr.key.as_ref())?.into_owned();
                let value = attr
                    .decode_and_unescape_value(reader.decoder())?
                    .into_owned();
                $target(key, value);
            }
        };
    }

    loop {
        let event = reader.read_event_into(&mut buf).map_err(|e| {
            IngestError::MalformedXml(format!("{e} (byte {})", reader.buffer_position()))
        })?;
        let self_closing = matches!(event, XmlEvent::Empty(_));
        match event {
            XmlEvent::Start(el) | XmlEvent::Empty(el) => {
                let name = reader.decoder().decode(el.name().as_ref())?.into_owned();

                if !seen_root {
                    if name != "Export" {
                        return Err(IngestError::WrongRootElement { found: name });
                    }
                    seen_root = true;
                    if self_closing {
                        break;
                    }
                    continue;
                }

                match (current.is_some(), stack.last_mut()) {
                    // Top level inside Export: only Vorgang is expected.
                    (false, _) => {
                        if name == "Vorgang" {
                            let mut process = RawProcess::default();
                            decode_attrs!(el, |key: String, value: String| {
                                process.absorb(&key, value);
                            });
                            if self_closing {
                                export.processes.push(process);
                            } else {
                                current = Some(process);
                                stack.push(Scope::Process);
                            }
                        } else {
                            warnings.push(IngestWarning::UnknownElement {
                                process_index: export.processes.len(),
                                element: name.clone(),
                            });
                            if !self_closing {
                                let end_name = el.name().as_ref().to_vec();
                                skip_subtree(&mut reader, &end_name)?;
                            }
                        }
                    }
                    (true, Some(Scope::Process)) => match name.as_str() {
                        "Dokument" => {
                            let mut document = RawDocument::default();
                            decode_attrs!(el, |key: String, value: String| {
                                document.absorb(&key, value);
                            });
                            if self_closing {
                                if let Some(p) = current.as_mut() {
                                    p.documents.push(document);
                                }
                            } else {
                                stack.push(Scope::Document(Box::new(document)));
                            }
                        }
                        "Nebeneintrag" => {
                            if self_closing {
                                if let Some(p) = current.as_mut() {
                                    p.side_entries.push(String::new());
                                }
                            } else {
                                stack.push(Scope::SideEntry { text: Vec::new() });
                            }
                        }
                        _ => {
                            // Process properties may arrive as child elements.
                            let known = PROCESS_ID_KEYS.contains(&name.as_str())
                                || matches!(name.as_str(), "VTyp" | "VTypL" | "VSys" | "VSysL");
                            if known {
                                if self_closing {
                                    if let Some(p) = current.as_mut() {
                                        p.absorb(&name, String::new());
                                    }
                                } else {
                                    stack.push(Scope::Property {
                                        name,
                                        text: Vec::new(),
                                    });
                                }
                            } else {
                                warnings.push(IngestWarning::UnknownElement {
                                    process_index: export.processes.len(),
                                    element: name.clone(),
                                });
                                if !self_closing {
                                    let end_name = el.name().as_ref().to_vec();
                                    skip_subtree(&mut reader, &end_name)?;
                                }
                            }
                        }
                    },
                    (true, Some(Scope::Document(_))) => {
                        // Document properties as child elements.
                        if self_closing {
                            if let Some(Scope::Document(doc)) = stack.last_mut() {
                                doc.absorb(&name, String::new());
                            }
                        } else {
                            stack.push(Scope::Property {
                                name,
                                text: Vec::new(),
                            });
                        }
                    }
                    (true, Some(Scope::SideEntry { .. })) => {
                        // Side entries may wrap their descriptor, e.g. in a
                        // Desk child; collect all nested text.
                        if !self_closing {
                            stack.push(Scope::Property {
                                name,
                                text: Vec::new(),
                            });
                        }
                    }
                    (true, Some(Scope::Property { .. })) => {
                        // Nested structure below a property: flatten its text.
                        if !self_closing {
                            stack.push(Scope::Property {
                                name,
                                text: Vec::new(),
                            });
                        }
                    }
                    (true, None) => {
                        return Err(IngestError::MalformedXml(format!(
                            "unexpected element {name:?}"
                        )))
                    }
                }
            }
            XmlEvent::Text(t) => {
                let decoded = reader.decoder().decode(t.as_ref())?;
                let text = quick_xml::escape::unescape(&decoded)
                    .map_err(|e| IngestError::MalformedXml(e.to_string()))?
                    .into_owned();
                if text.is_empty() {
                    continue;
                }
                match stack.last_mut() {
                    Some(Scope::Property { text: parts, .. })
                    | Some(Scope::SideEntry { text: parts }) => parts.push(text),
                    _ => {}
                }
            }
            XmlEvent::CData(t) => {
                let text = reader.decoder().decode(t.as_ref())?.into_owned();
                if text.is_empty() {
                    continue;
                }
                match stack.last_mut() {
                    Some(Scope::Property { text: parts, .. })
                    | Some(Scope::SideEntry { text: parts }) => parts.push(text),
                    _ => {}
                }
            }
            XmlEvent::End(el) => {
                let name = reader.decoder().decode(el.name().as_ref())?.into_owned();
                if name == "Export" {
                    break;
                }
                match stack.pop() {
                    Some(Scope::Process) => {
                        if let Some(p) = current.take() {
                            export.processes.push(p);
                        }
                    }
                    Some(Scope::Document(doc)) => {
                        if let Some(p) = current.as_mut() {
                            p.documents.push(*doc);
                        }
                    }
                    Some(Scope::SideEntry { text }) => {
                        if let Some(p) = current.as_mut() {
                            p.side_entries.push(text.join(" "));
                        }
                    }
                    Some(Scope::Property { name: prop, text }) => {
                        let value = text.join(" ");
                        match stack.last_mut() {
                            Some(Scope::Document(doc)) => doc.absorb(&prop, value),
                            Some(Scope::SideEntry { text: parts }) => {
                                if !value.is_empty() {
                                    parts.push(value);
                                }
                            }
                            Some(Scope::Property { text: parts, .. }) => {
                                if !value.is_empty() {
                                    parts.push(value);
                                }
                            }
                            Some(Scope::Process) => {
                                if let Some(p) = current.as_mut() {
                                    let _ = p.absorb(&prop, value);
                                }
                            }
                            None => {}
                        }
                    }
                    None => {
                        return Err(IngestError::MalformedXml(format!(
                            "unexpected closing tag {name:?}"
                        )))
                    }
                }
            }
            XmlEvent::Eof => {
                if !seen_root {
                    return Err(IngestError::MalformedXml("empty document".to_string()));
                }
                // the main loop only exits via </Export>
                return Err(IngestError::MalformedXml(
                    "unexpected end of file inside Export".to_string(),
                ));
            }
            _ => {}
        }
        buf.clear();
    }

    // Drain anything after </Export> to catch trailing garbage.
    loop {
        match reader.read_event_into(&mut buf) {
            Ok(XmlEvent::Eof) => break,
            Ok(XmlEvent::Text(_))
            | Ok(XmlEvent::Comment(_))
            | Ok(XmlEvent::Decl(_))
            | Ok(XmlEvent::PI(_))
            | Ok(XmlEvent::DocType(_)) => {}
            Ok(_) => {
                return Err(IngestError::MalformedXml(
                    "content after closing Export root".to_string(),
                ))
            }
            Err(e) => return Err(IngestError::MalformedXml(e.to_string())),
        }
        buf.clear();
    }

    Ok((export, warnings))
}

fn skip_subtree<R: BufRead>(reader: &mut Reader<R>, end: &[u8]) -> Result<(), IngestError> {
    let mut buf = Vec::new();
    reader
        .read_to_end_into(quick_xml::name::QName(end), &mut buf)
        .map_err(|e| IngestError::MalformedXml(e.to_string()))?;
    Ok(())
}

/// Pure data-quality report over a parsed export: documents without a
/// date, documents without any activity source, and empty processes.
pub fn scan_export(raw: &RawExport) -> Vec<IngestWarning> {
    let mut warnings = Vec::new();
    for (process_index, process) in raw.processes.iter().enumerate() {
        if process.documents.is_empty() {
            warnings.push(IngestWarning::EmptyProcess { process_index });
            continue;
        }
        let missing_date: Vec<usize> = process
            .documents
            .iter()
            .enumerate()
            .filter(|(_, d)| d.date_text.as_deref().is_none_or(str::is_empty))
            .map(|(i, _)| i)
            .collect();
        if !missing_date.is_empty() {
            warnings.push(IngestWarning::MissingDate {
                process_index,
                document_indices: missing_date,
            });
        }
        let missing_activity: Vec<usize> = process
            .documents
            .iter()
            .enumerate()
            .filter(|(_, d)| {
                d.dok_typ_l.as_deref().is_none_or(str::is_empty)
                    && d.dok_art_l.as_deref().is_none_or(str::is_empty)
            })
            .map(|(i, _)| i)
            .collect();
        if !missing_activity.is_empty() {
            warnings.push(IngestWarning::MissingActivitySource {
                process_index,
                document_indices: missing_activity,
            });
        }
    }
    warnings
}
