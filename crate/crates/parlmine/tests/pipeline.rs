//! End-to-end run over a small synthetic export: XML parsing, log
//! building, XES round trip, cleaning, filtering, relabeling,
//! summaries, statistics, feature extraction, delay labeling, rule
//! induction, evaluation, and chart rendering.

use std::collections::BTreeSet;

use parlmine::cleaning::{clean, CleaningPolicy};
use parlmine::deviance::{evaluate_rule, induce_rules, parse_rule, InductionConfig};
use parlmine::enrich::{extract_features, label_delayed, SidecarTable, YEAR_KEY};
use parlmine::eventlog::xes::{read_xes, write_xes};
use parlmine::eventlog::{
    build_log, filter_by_case_attribute, filter_by_time_window, relabel_readings, AttributeValue,
    RelabelRule,
};
use parlmine::ingest::{parse_export, scan_export, IngestWarning};
use parlmine::metrics::{summarize, yearly_frequencies, yearly_mean_cycle_times};
use parlmine::stats::{correlate_series, mann_whitney_u};
use parlmine::viz::{render_dotted_chart, render_yearly_lines, DottedChartSpec, LineChartSpec};

/// Eight processes: five clean legislation cases of graded length, one
/// with a missing date, one outside the valid year range, one with a
/// correctable missing activity, plus assorted oddities (attribute
/// form, unknown elements, side entries, list attributes).
const EXPORT_XML: &str = r#"<?xml version="1.0" encoding="UTF-8"?>
<Export>
  <Vorgang>
    <VNr>V-1</VNr>
    <VSysL>Gesetzgebung</VSysL>
    <Nebeneintrag><Desk>Schulwesen</Desk></Nebeneintrag>
    <Dokument>
      <DNr>D-1</DNr>
      <Titel>Gesetzentwurf über die Schule, 1. Lesung</Titel>
      <DokDat>10.01.2010</DokDat>
      <DokTypL>Lesung</DokTypL>
      <DokArtL>Drucksache</DokArtL>
      <Urheber>Zeta-Fraktion</Urheber>
      <Urheber>Alpha-Fraktion</Urheber>
    </Dokument>
    <Dokument>
      <DNr>D-2</DNr>
      <Titel>Beschlussempfehlung</Titel>
      <DokDat>30.01.2010</DokDat>
      <DokTypL>Sitzung</DokTypL>
    </Dokument>
    <Dokument>
      <DNr>D-3</DNr>
      <Titel>Zweite Lesung, 2. Lesung</Titel>
      <DokDat>19.02.2010</DokDat>
      <DokTypL>Lesung</DokTypL>
    </Dokument>
    <Dokument>
      <DNr>D-4</DNr>
      <Titel>Gesetzblatt</Titel>
      <DokDat>01.03.2010</DokDat>
      <DokTypL>Gesetz</DokTypL>
    </Dokument>
  </Vorgang>
  <Vorgang VNr="V-2" VSysL="Gesetzgebung">
    <Dokument DokTypL="Lesung" DokDat="2011-03-01" Titel="Entwurf, 1. Lesung"/>
    <Dokument DokTypL="Sitzung" DokDat="2011-05-30"/>
    <Dokument DokTypL="Lesung" DokDat="2011-08-28" Titel="2. Lesung"/>
  </Vorgang>
  <Vorgang>
    <VNr>V-3</VNr>
    <VSysL>Gesetzgebung</VSysL>
    <Dokument><DokTypL>Lesung</DokTypL><DokDat>01.06.2012</DokDat><Titel>1. Lesung</Titel></Dokument>
    <Dokument><DokTypL>Gesetz</DokTypL><DokDat>29.06.2012</DokDat></Dokument>
  </Vorgang>
  <Vorgang>
    <VNr>V-4</VNr>
    <VSysL>Gesetzgebung</VSysL>
    <Dokument><DokTypL>Lesung</DokTypL><DokDat>01.02.2013</DokDat><Titel>1. Lesung</Titel></Dokument>
    <Dokument><DokTypL>Sitzung</DokTypL><DokDat>02.02.2014</DokDat></Dokument>
  </Vorgang>
  <Vorgang>
    <VNr>V-5</VNr>
    <VSysL>Gesetzgebung</VSysL>
    <Dokument><DokTypL>Lesung</DokTypL><DokDat>05.05.2015</DokDat><Titel>1. Lesung</Titel></Dokument>
    <Dokument><DokTypL>Gesetz</DokTypL><DokDat>04.07.2015</DokDat></Dokument>
  </Vorgang>
  <Vorgang>
    <VNr>V-6</VNr>
    <VSysL>Gesetzgebung</VSysL>
    <Dokument><DokTypL>Lesung</DokTypL><DokDat>01.04.2016</DokDat></Dokument>
    <Dokument><DokTypL>Sitzung</DokTypL></Dokument>
  </Vorgang>
  <Vorgang>
    <VNr>V-7</VNr>
    <VSysL>Petition</VSysL>
    <Dokument><DokTypL>Eingabe</DokTypL><DokDat>15.05.1890</DokDat></Dokument>
  </Vorgang>
  <Vorgang>
    <VNr>V-8</VNr>
    <VSysL>Gesetzgebung</VSysL>
    <Unbekannt>whatever</Unbekannt>
    <Dokument><DokDat>01.09.2017</DokDat><DokArtL>Plenarprotokoll</DokArtL></Dokument>
    <Dokument><DokDat>01.10.2017</DokDat><DokArtL>Drucksache</DokArtL><DokTypL>Gesetz</DokTypL></Dokument>
  </Vorgang>
</Export>
"#;

fn date_formats() -> Vec<String> {
    vec!["%d.%m.%Y".to_string(), "%Y-%m-%d".to_string()]
}

fn reading_rules() -> Vec<RelabelRule> {
    vec![
        RelabelRule {
            activity: "^Lesung$".into(),
            attribute_key: Some("Titel".into()),
            attribute_pattern: Some(r"1\. Lesung".into()),
            new_label: "1. Lesung".into(),
        },
        RelabelRule {
            activity: "^Lesung$".into(),
            attribute_key: Some("Titel".into()),
            attribute_pattern: Some(r"2\. Lesung".into()),
            new_label: "2. Lesung".into(),
        },
    ]
}

#[test]
fn full_pipeline_on_synthetic_export() {
    // ingest
    let export = parse_export(EXPORT_XML.as_bytes(), "testland").unwrap();
    assert_eq!(export.processes.len(), 8);
    assert_eq!(
        export
            .processes
            .iter()
            .map(|p| p.documents.len())
            .sum::<usize>(),
        18
    );

    let warnings = scan_export(&export);
    let missing_dates = warnings
        .iter()
        .filter(|w| matches!(w, IngestWarning::MissingDate { .. }))
        .count();
    assert_eq!(missing_dates, 1); // V-6

    // build: counts survive, lists sorted, VSysL becomes case attribute
    let log = build_log(&export, &date_formats()).unwrap();
    assert_eq!(log.traces.len(), 8);
    assert_eq!(log.n_events(), 18);
    let v1 = log.traces.iter().find(|t| t.case_id == "V-1").unwrap();
    assert_eq!(
        v1.case_attributes.get("VSysL"),
        Some(&AttributeValue::Text("Gesetzgebung".into()))
    );
    assert_eq!(
        v1.events[0].attributes.get("Urheber"),
        Some(&AttributeValue::TextList(vec![
            "Alpha-Fraktion".into(),
            "Zeta-Fraktion".into()
        ]))
    );

    // XES round trip of the raw log
    let mut xes_bytes = Vec::new();
    write_xes(&log, &mut xes_bytes).unwrap();
    assert_eq!(read_xes(xes_bytes.as_slice()).unwrap(), log);

    // cleaning: V-6 missing date, V-7 out of range, V-8 keeps its
    // correctable event (Plenarprotokoll) and loses nothing
    let (cleaned, report) = clean(log, &CleaningPolicy::default());
    assert_eq!(report.original, 8);
    assert_eq!(report.missing_date, 1); // V-6
    assert_eq!(report.invalid_date, 1); // V-7
    assert_eq!(report.no_activity_before_correction, 1); // V-8
    assert_eq!(report.no_activity_after_correction, 0);
    assert_eq!(report.removed_total, 2);
    assert_eq!(report.remaining, 6);
    let v8 = cleaned.traces.iter().find(|t| t.case_id == "V-8").unwrap();
    assert_eq!(v8.events[0].activity, "Plenarprotokoll");

    // cleaning is idempotent
    let (again, second_report) = clean(cleaned.clone(), &CleaningPolicy::default());
    assert_eq!(again, cleaned);
    assert_eq!(second_report.removed_total, 0);

    // filtering and relabeling
    let legislation = filter_by_case_attribute(cleaned, "VSysL", "Gesetzgebung");
    assert_eq!(legislation.traces.len(), 6);
    let windowed = filter_by_time_window(legislation, 2010, 2015).unwrap();
    assert_eq!(windowed.traces.len(), 5); // V-8 starts 2017
    let relabeled = relabel_readings(windowed, &reading_rules()).unwrap();
    let activities = relabeled.activities();
    assert!(activities.contains("1. Lesung"));
    assert!(activities.contains("2. Lesung"));
    assert!(!activities.contains("Lesung"));

    // summary oracle, hand-computed: cycle times 50, 180, 28, 366, 60
    let summary = summarize(&relabeled).unwrap();
    assert_eq!(summary.n_cases, 5);
    assert_eq!(summary.n_events, 13);
    assert_eq!(summary.n_variants, 4);
    assert_eq!(summary.mean_cycle_days, 136.8);
    assert_eq!(summary.median_cycle_days, 60.0);

    // yearly series
    let frequencies = yearly_frequencies(&relabeled);
    assert_eq!(frequencies.points.len(), 6); // 2010..=2015
    assert_eq!(frequencies.points.values().sum::<f64>(), 5.0);
    let cycles = yearly_mean_cycle_times(&relabeled);
    assert_eq!(cycles.points.get(&2010), Some(&50.0));
    assert_eq!(cycles.points.get(&2014), None);

    // correlation against a synthetic year sidecar
    let sidecar_csv = "year,is_election_year,squire_index\n\
                       2010,False,0.10\n2011,True,0.15\n2012,False,0.12\n\
                       2013,False,0.18\n2014,False,0.11\n2015,True,0.16\n";
    let sidecar = SidecarTable::from_csv("years", YEAR_KEY, sidecar_csv.as_bytes()).unwrap();
    let squire = parlmine::metrics::YearlySeries {
        metric_name: "squire_index".into(),
        points: sidecar
            .rows
            .iter()
            .map(|(y, row)| {
                (
                    y.parse::<i32>().unwrap(),
                    row.get("squire_index").unwrap().as_number().unwrap(),
                )
            })
            .collect(),
    };
    let correlation = correlate_series(&frequencies, &squire).unwrap();
    assert_eq!(correlation.n, 6);
    assert!(correlation.r.abs() <= 1.0);

    // cycle-time comparison against a much slower shifted copy
    let mut slow = Vec::new();
    let mut fast = Vec::new();
    for trace in &relabeled.traces {
        let days = parlmine::cleaning::cycle_time_days(trace).unwrap() as f64;
        fast.push(days);
        slow.push(days + 400.0);
    }
    let mw = mann_whitney_u(&fast, &slow).unwrap();
    assert_eq!(mw.u_statistic, 0.0);
    assert!(mw.p_value < 0.05);

    // features and delay labeling
    let passed: BTreeSet<String> = ["Gesetz".to_string()].into_iter().collect();
    let table = extract_features(&relabeled, &[sidecar], &passed).unwrap();
    assert_eq!(table.rows.len(), 5);
    let v1_row = table.rows.iter().find(|r| r.case_id == "V-1").unwrap();
    assert_eq!(
        v1_row.features.get("event_count"),
        Some(&AttributeValue::Number(4.0))
    );
    assert_eq!(
        v1_row.features.get("1. Lesung:Sitzung.delay"),
        Some(&AttributeValue::Number(20.0))
    );
    assert_eq!(
        v1_row.features.get("is_passed_bill"),
        Some(&AttributeValue::Flag(true))
    );
    assert_eq!(
        v1_row.features.get("squire_index"),
        Some(&AttributeValue::Number(0.10))
    );

    let labeled = label_delayed(table, &relabeled, 100.0).unwrap();
    assert_eq!(labeled.delayed_count(), 2); // 180 and 366 days

    // CSV round trip of the labeled table
    let csv = labeled.to_csv();
    let reparsed = parlmine::enrich::FeatureTable::from_csv(csv.as_bytes()).unwrap();
    assert_eq!(reparsed, labeled);

    // induction on the labeled table recovers a separating rule
    let config = InductionConfig {
        test_fraction: 0.33,
        seed: 7,
        ..InductionConfig::default()
    };
    let rules = induce_rules(&labeled, &config).unwrap();
    assert!(!rules.is_empty());
    let top = &rules[0];
    let evaluation = evaluate_rule(top, &labeled).unwrap();
    assert_eq!(
        evaluation.f1(),
        1.0,
        "top rule {top} should separate cleanly"
    );

    // a Table-4-shaped rule evaluates on the same table
    let manual = parse_rule("event_count >= 2.0").unwrap();
    let manual_eval = evaluate_rule(&manual, &labeled).unwrap();
    assert_eq!(manual_eval.true_positives + manual_eval.false_positives, 5);

    // charts render deterministically
    let chart_spec = DottedChartSpec::default();
    let dotted_a = render_dotted_chart(&relabeled, &chart_spec).unwrap();
    let dotted_b = render_dotted_chart(&relabeled, &chart_spec).unwrap();
    assert_eq!(dotted_a, dotted_b);
    assert!(dotted_a.contains("<svg"));

    let lines = render_yearly_lines(&LineChartSpec {
        series: vec![
            ("frequencies".into(), frequencies),
            ("squire".into(), squire),
        ],
        width_px: 900,
        height_px: 450,
        y_label: "value".into(),
    })
    .unwrap();
    assert_eq!(lines.matches("<polyline").count(), 2);
}
