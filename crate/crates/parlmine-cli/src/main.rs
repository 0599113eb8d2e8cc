//! `parlmine`: converts parliamentary documentation XML exports into
//! XES event logs and runs the benchmarking pipeline over them:
//! cleaning, filtering, summaries, correlation and cycle-time tests,
//! charts, feature extraction, rule induction, and rule evaluation.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error.

mod config;

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use config::RunConfig;
use parlmine::cleaning::{clean, cycle_time_days, CleaningPolicy};
use parlmine::deviance::{
    evaluate_rule, evaluations_to_csv, induce_rules, parse_rules_text, split_train_test,
    InductionConfig,
};
use parlmine::enrich::{
    compute_delay_threshold, extract_features, label_delayed, FeatureTable, SidecarTable, CASE_KEY,
    YEAR_KEY,
};
use parlmine::eventlog::xes::{read_xes, write_xes};
use parlmine::eventlog::{
    filter_by_case_attribute, filter_by_time_window, relabel_readings, EventLog,
};
use parlmine::ingest::{parse_export_verbose, scan_export, RawExport};
use parlmine::metrics::{summarize, yearly_frequencies, yearly_mean_cycle_times, YearlySeries};
use parlmine::stats::{correlate_series, mann_whitney_u};
use parlmine::viz::{render_dotted_chart, render_yearly_lines, DottedChartSpec, LineChartSpec};

#[derive(Parser)]
#[command(
    name = "parlmine",
    version,
    about = "Parliamentary process benchmarking pipeline"
)]
struct Cli {
    /// TOML run configuration (profiles, policy, window, induction).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for derived output files (default: current directory).
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a profile's XML exports and write one XES log.
    Convert {
        /// Profile name from the config file.
        profile: String,
        /// Where to write the XES log (default: <output>/<profile>.xes).
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Apply the quality filters; write the cleaned log and the filter report.
    Clean {
        log: PathBuf,
        /// Cleaned XES path (default: <stem>_cleaned.xes).
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// Filter report CSV path (default: stdout).
        #[arg(long)]
        report: Option<PathBuf>,
        /// Filter report JSON path.
        #[arg(long)]
        json_report: Option<PathBuf>,
        #[command(flatten)]
        policy: PolicyArgs,
    },
    /// Keep traces by case attribute and/or start-year window; optionally relabel activities.
    Filter {
        log: PathBuf,
        /// KEY=VALUE match on a case attribute, e.g. VSysL=Gesetzgebung.
        #[arg(long)]
        case_attr: Option<String>,
        /// FIRST:LAST start-year window, e.g. 2006:2020; without a
        /// value, the config window (default 2006:2020) applies.
        #[arg(long, num_args = 0..=1, default_missing_value = "config")]
        window: Option<String>,
        /// Apply the relabeling rules of this config profile.
        #[arg(long)]
        relabel_profile: Option<String>,
        /// Filtered XES path (default: <stem>_filtered.xes).
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Print the log summary (cases, events, activities, variants, cycle times).
    Summarize {
        log: PathBuf,
        /// Emit JSON instead of CSV.
        #[arg(long)]
        json: bool,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Correlate a yearly log metric against a year-feature sidecar column.
    Correlate {
        log: PathBuf,
        year_features: PathBuf,
        #[arg(long, value_enum)]
        metric: MetricKind,
        /// Sidecar column to correlate against.
        #[arg(long, default_value = "squire_index")]
        feature: String,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Mann-Whitney U test on the cycle times of two logs.
    Compare {
        log_a: PathBuf,
        log_b: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Render charts.
    Chart {
        #[command(subcommand)]
        kind: ChartCommand,
    },
    /// Extract the per-trace feature table and label delays.
    Features {
        log: PathBuf,
        /// year,is_election_year,squire_index,... sidecar CSV.
        #[arg(long)]
        year_features: Option<PathBuf>,
        /// case_id,pdf_size,word_count,... sidecar CSV.
        #[arg(long)]
        doc_features: Option<PathBuf>,
        /// Activities marking a passed bill (comma separated).
        #[arg(long, value_delimiter = ',')]
        passed: Vec<String>,
        /// Take passed activities from this config profile instead.
        #[arg(long, conflicts_with = "passed")]
        profile: Option<String>,
        /// Explicit delay threshold in days.
        #[arg(long, conflicts_with = "reference")]
        threshold: Option<f64>,
        /// Log whose mean cycle time defines the threshold.
        #[arg(long)]
        reference: Option<PathBuf>,
        /// Multiplier on the reference mean (default 1.1).
        #[arg(long)]
        factor: Option<f64>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Induce delay-explaining rules from a labeled feature CSV.
    Induce {
        features: PathBuf,
        /// Hide features whose name contains this pattern (repeatable).
        #[arg(long)]
        hide: Vec<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        test_fraction: Option<f64>,
        #[arg(long)]
        max_conditions: Option<usize>,
        #[arg(long)]
        beam_width: Option<usize>,
        /// Write the induced rules (one per line) to this file.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a rules file against a labeled feature CSV.
    EvalRules {
        rules: PathBuf,
        features: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum ChartCommand {
    /// Dotted chart over relative time, rows sorted by cycle time.
    Dotted {
        log: PathBuf,
        #[arg(long, default_value_t = 1461)]
        window_days: i64,
        #[arg(long, default_value_t = 1000)]
        width: u32,
        #[arg(long, default_value_t = 600)]
        height: u32,
        #[arg(long, default_value_t = 1.5)]
        dot_radius: f64,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Yearly trend lines for one metric over several logs.
    Lines {
        #[arg(required = true)]
        logs: Vec<PathBuf>,
        #[arg(long, value_enum)]
        metric: MetricKind,
        #[arg(long)]
        y_label: Option<String>,
        #[arg(long, default_value_t = 900)]
        width: u32,
        #[arg(long, default_value_t = 450)]
        height: u32,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricKind {
    /// Cases per start year.
    Freq,
    /// Mean cycle time per start year.
    Cycle,
}

#[derive(Args)]
struct PolicyArgs {
    #[arg(long)]
    min_year: Option<i32>,
    #[arg(long)]
    max_year: Option<i32>,
    #[arg(long)]
    max_cycle_days: Option<i64>,
    #[arg(long)]
    fallback_attribute: Option<String>,
    /// Fallback values never promoted to activities (repeatable).
    #[arg(long)]
    fallback_exclude: Vec<String>,
}

impl PolicyArgs {
    fn apply(&self, mut policy: CleaningPolicy) -> CleaningPolicy {
        if let Some(v) = self.min_year {
            policy.min_year = v;
        }
        if let Some(v) = self.max_year {
            policy.max_year = v;
        }
        if let Some(v) = self.max_cycle_days {
            policy.max_cycle_days = v;
        }
        if let Some(v) = &self.fallback_attribute {
            policy.fallback_attribute = v.clone();
        }
        if !self.fallback_exclude.is_empty() {
            policy.fallback_excluded_values = self.fallback_exclude.clone();
        }
        policy
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap help/version output is a success, not a usage error
            if e.use_stderr() {
                eprint!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let output_dir = cli
        .output
        .clone()
        .or_else(|| config.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("."));

    match cli.command {
        Command::Convert { profile, out } => {
            let profile = config.profile(&profile)?;
            let mut merged = RawExport {
                source_name: profile.name.clone(),
                processes: Vec::new(),
            };
            let mut warning_count = 0usize;
            let inputs = expand_inputs(&profile.inputs)?;
            for input in &inputs {
                let file = File::open(input)
                    .with_context(|| format!("cannot open {}", input.display()))?;
                let (export, parse_warnings) =
                    parse_export_verbose(BufReader::new(file), &profile.name)
                        .with_context(|| format!("while parsing {}", input.display()))?;
                for warning in &parse_warnings {
                    eprintln!("{}: {warning}", input.display());
                }
                warning_count += parse_warnings.len();
                merged.extend(export);
            }
            for warning in scan_export(&merged) {
                eprintln!("{}: {warning}", profile.name);
                warning_count += 1;
            }
            let mut log = parlmine::build_log(&merged, &profile.date_formats)?;
            for (i, input) in inputs.iter().enumerate() {
                log.provenance
                    .insert(format!("input_{i}"), input.display().to_string());
            }
            let out = out.unwrap_or_else(|| output_dir.join(format!("{}.xes", profile.name)));
            write_xes_file(&log, &out)?;
            eprintln!(
                "{}: {} traces, {} events, {} warning(s)",
                out.display(),
                log.traces.len(),
                log.n_events(),
                warning_count
            );
            println!("{}", out.display());
            Ok(())
        }
        Command::Clean {
            log,
            out,
            report,
            json_report,
            policy,
        } => {
            let input = read_xes_file(&log)?;
            let effective = policy.apply(config.policy.to_policy());
            let (cleaned, filter_report) = clean(input, &effective);
            let out = out.unwrap_or_else(|| derive_path(&output_dir, &log, "_cleaned.xes"));
            write_xes_file(&cleaned, &out)?;
            eprintln!("{}: {} traces kept", out.display(), filter_report.remaining);
            match &report {
                Some(path) => write_text_file(path, &filter_report.to_csv())?,
                None => print!("{}", filter_report.to_csv()),
            }
            if let Some(path) = &json_report {
                write_text_file(path, &serde_json::to_string_pretty(&filter_report)?)?;
            }
            Ok(())
        }
        Command::Filter {
            log,
            case_attr,
            window,
            relabel_profile,
            out,
        } => {
            let mut current = read_xes_file(&log)?;
            if let Some(spec) = &case_attr {
                let (key, value) = spec
                    .split_once('=')
                    .context("--case-attr expects KEY=VALUE")?;
                current = filter_by_case_attribute(current, key, value);
            }
            if let Some(spec) = &window {
                let (first, last) = if spec == "config" {
                    (config.window.first_year, config.window.last_year)
                } else {
                    let (first, last) = spec
                        .split_once(':')
                        .context("--window expects FIRST:LAST")?;
                    (
                        first.trim().parse().context("bad first year")?,
                        last.trim().parse().context("bad last year")?,
                    )
                };
                current = filter_by_time_window(current, first, last)?;
            }
            if let Some(name) = &relabel_profile {
                let rules = config.profile(name)?.relabel_rules();
                current = relabel_readings(current, &rules)?;
            }
            let out = out.unwrap_or_else(|| derive_path(&output_dir, &log, "_filtered.xes"));
            write_xes_file(&current, &out)?;
            eprintln!("{}: {} traces kept", out.display(), current.traces.len());
            Ok(())
        }
        Command::Summarize { log, json, out } => {
            let input = read_xes_file(&log)?;
            let summary = summarize(&input)?;
            let text = if json {
                serde_json::to_string_pretty(&summary)? + "\n"
            } else {
                summary.to_csv()
            };
            emit(out.as_deref(), &text)
        }
        Command::Correlate {
            log,
            year_features,
            metric,
            feature,
            out,
        } => {
            let input = read_xes_file(&log)?;
            let log_series = metric_series(&input, metric);
            let sidecar = read_sidecar(&year_features, YEAR_KEY)?;
            let feature_series = sidecar_series(&sidecar, &feature)?;
            let result = correlate_series(&log_series, &feature_series)?;
            let years: Vec<i32> = log_series
                .points
                .keys()
                .filter(|y| feature_series.points.contains_key(y))
                .copied()
                .collect();
            let text = format!(
                "metric,feature,n,first_year,last_year,pearson_r,p_value,significant\n\
                 {},{},{},{},{},{:.4},{:.4},{}\n",
                log_series.metric_name,
                feature,
                result.n,
                years.first().expect("n >= 3"),
                years.last().expect("n >= 3"),
                result.r,
                result.p_value,
                result.significant,
            );
            emit(out.as_deref(), &text)
        }
        Command::Compare { log_a, log_b, out } => {
            let a = read_xes_file(&log_a)?;
            let b = read_xes_file(&log_b)?;
            let result = mann_whitney_u(&cycle_times(&a)?, &cycle_times(&b)?)?;
            let text = serde_json::to_string_pretty(&result)? + "\n";
            emit(out.as_deref(), &text)
        }
        Command::Chart { kind } => match kind {
            ChartCommand::Dotted {
                log,
                window_days,
                width,
                height,
                dot_radius,
                out,
            } => {
                let input = read_xes_file(&log)?;
                let spec = DottedChartSpec {
                    window_days,
                    width_px: width,
                    height_px: height,
                    dot_radius_px: dot_radius,
                    ..DottedChartSpec::default()
                };
                let svg = render_dotted_chart(&input, &spec)?;
                let out = out.unwrap_or_else(|| derive_path(&output_dir, &log, "_dotted.svg"));
                write_text_file(&out, &svg)?;
                println!("{}", out.display());
                Ok(())
            }
            ChartCommand::Lines {
                logs,
                metric,
                y_label,
                width,
                height,
                out,
            } => {
                let mut series = Vec::new();
                for path in &logs {
                    let input = read_xes_file(path)?;
                    series.push((input.name.clone(), metric_series(&input, metric)));
                }
                let spec = LineChartSpec {
                    series,
                    width_px: width,
                    height_px: height,
                    y_label: y_label.unwrap_or_else(|| match metric {
                        MetricKind::Freq => "cases per year".to_string(),
                        MetricKind::Cycle => "mean cycle time (days)".to_string(),
                    }),
                };
                let svg = render_yearly_lines(&spec)?;
                let out = out.unwrap_or_else(|| output_dir.join("lines.svg"));
                write_text_file(&out, &svg)?;
                println!("{}", out.display());
                Ok(())
            }
        },
        Command::Features {
            log,
            year_features,
            doc_features,
            passed,
            profile,
            threshold,
            reference,
            factor,
            out,
        } => {
            let input = read_xes_file(&log)?;
            let mut sidecars = Vec::new();
            if let Some(path) = year_features
                .as_deref()
                .or(config.sidecars.year_features.as_deref())
            {
                sidecars.push(read_sidecar(path, YEAR_KEY)?);
            }
            if let Some(path) = doc_features
                .as_deref()
                .or(config.sidecars.doc_features.as_deref())
            {
                sidecars.push(read_sidecar(path, CASE_KEY)?);
            }
            let passed_set: BTreeSet<String> = match &profile {
                Some(name) => config.profile(name)?.passed_set(),
                None => passed.into_iter().collect(),
            };
            let table = extract_features(&input, &sidecars, &passed_set)?;
            let table = match (threshold, reference) {
                (Some(days), _) => label_delayed(table, &input, days)?,
                (None, Some(reference_path)) => {
                    let reference_log = read_xes_file(&reference_path)?;
                    let reference_summary = summarize(&reference_log)?;
                    let days = compute_delay_threshold(
                        &reference_summary,
                        factor.unwrap_or(config.delay_factor),
                    )?;
                    eprintln!(
                        "threshold: {days:.2} days ({}x mean {:.1})",
                        factor.unwrap_or(config.delay_factor),
                        reference_summary.mean_cycle_days
                    );
                    label_delayed(table, &input, days)?
                }
                (None, None) => table,
            };
            if table.rows.iter().all(|r| r.is_delayed.is_some()) {
                eprintln!(
                    "{} rows, {} delayed",
                    table.rows.len(),
                    table.delayed_count()
                );
            }
            emit(out.as_deref(), &table.to_csv())
        }
        Command::Induce {
            features,
            hide,
            seed,
            test_fraction,
            max_conditions,
            beam_width,
            out,
        } => {
            let table = read_features_file(&features)?;
            let base = config.induction.to_config();
            let induction = InductionConfig {
                test_fraction: test_fraction.unwrap_or(base.test_fraction),
                seed: seed.unwrap_or(base.seed),
                hidden_patterns: if hide.is_empty() {
                    base.hidden_patterns
                } else {
                    hide
                },
                max_conditions: max_conditions.unwrap_or(base.max_conditions),
                beam_width: beam_width.unwrap_or(base.beam_width),
            };
            let (train, test) = split_train_test(&table, &induction)?;
            let rules = induce_rules(&train, &induction)?;
            let mut lines = String::new();
            let mut report = String::from("rank,rule,train_f1,test_precision,test_recall\n");
            for (rank, rule) in rules.iter().enumerate() {
                let train_eval = evaluate_rule(rule, &train)?;
                let test_eval = evaluate_rule(rule, &test)?;
                lines.push_str(&format!("{rule}\n"));
                report.push_str(&format!(
                    "{},{},{:.3},{:.3},{:.3}\n",
                    rank + 1,
                    rule,
                    train_eval.f1(),
                    test_eval.precision,
                    test_eval.recall,
                ));
            }
            print!("{report}");
            if let Some(path) = &out {
                write_text_file(path, &lines)?;
                eprintln!("{}: {} rule(s)", path.display(), rules.len());
            }
            Ok(())
        }
        Command::EvalRules {
            rules,
            features,
            out,
        } => {
            let text = std::fs::read_to_string(&rules)
                .with_context(|| format!("cannot read {}", rules.display()))?;
            let parsed = parse_rules_text(&text)
                .with_context(|| format!("in rules file {}", rules.display()))?;
            let table = read_features_file(&features)?;
            let mut entries = Vec::new();
            for (_, rule) in &parsed {
                let evaluation = evaluate_rule(rule, &table)?;
                entries.push((rule.to_string(), evaluation));
            }
            emit(out.as_deref(), &evaluations_to_csv(&entries))
        }
    }
}

fn metric_series(log: &EventLog, metric: MetricKind) -> YearlySeries {
    match metric {
        MetricKind::Freq => yearly_frequencies(log),
        MetricKind::Cycle => yearly_mean_cycle_times(log),
    }
}

/// Numeric column of a year-keyed sidecar as a yearly series.
fn sidecar_series(sidecar: &SidecarTable, feature: &str) -> Result<YearlySeries> {
    let mut points = std::collections::BTreeMap::new();
    for (key, row) in &sidecar.rows {
        let year: i32 = key
            .parse()
            .with_context(|| format!("sidecar year {key:?} is not an integer"))?;
        if let Some(value) = row.get(feature).and_then(|v| v.as_number()) {
            points.insert(year, value);
        }
    }
    anyhow::ensure!(
        !points.is_empty(),
        "sidecar column {feature:?} has no numeric values"
    );
    Ok(YearlySeries {
        metric_name: feature.to_string(),
        points,
    })
}

fn cycle_times(log: &EventLog) -> Result<Vec<f64>> {
    log.traces
        .iter()
        .map(|t| Ok(cycle_time_days(t)? as f64))
        .collect()
}

/// Profile inputs may name files or directories; directories expand to
/// their `*.xml` files in sorted order.
fn expand_inputs(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for input in inputs {
        if input.is_dir() {
            let mut found: Vec<PathBuf> = std::fs::read_dir(input)
                .with_context(|| format!("cannot read {}", input.display()))?
                .collect::<Result<Vec<_>, _>>()?
                .into_iter()
                .map(|entry| entry.path())
                .filter(|p| p.extension().is_some_and(|e| e == "xml"))
                .collect();
            found.sort();
            anyhow::ensure!(!found.is_empty(), "no XML files under {}", input.display());
            files.extend(found);
        } else {
            files.push(input.clone());
        }
    }
    Ok(files)
}

fn read_xes_file(path: &Path) -> Result<EventLog> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    read_xes(BufReader::new(file)).with_context(|| format!("while reading {}", path.display()))
}

fn read_sidecar(path: &Path, key: &str) -> Result<SidecarTable> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "sidecar".to_string());
    SidecarTable::from_csv(&name, key, BufReader::new(file))
        .with_context(|| format!("while reading {}", path.display()))
}

fn read_features_file(path: &Path) -> Result<FeatureTable> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    FeatureTable::from_csv(BufReader::new(file))
        .with_context(|| format!("while reading {}", path.display()))
}

fn derive_path(output_dir: &Path, input: &Path, suffix: &str) -> PathBuf {
    let stem = input
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "log".to_string());
    output_dir.join(format!("{stem}{suffix}"))
}

/// Writes through a temp file in the target directory; readers never
/// observe partial output.
fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let directory = path.parent().filter(|p| !p.as_os_str().is_empty());
    if let Some(directory) = directory {
        std::fs::create_dir_all(directory)
            .with_context(|| format!("cannot create {}", directory.display()))?;
    }
    let mut temp = tempfile::NamedTempFile::new_in(directory.unwrap_or(Path::new(".")))
        .context("cannot create temp file")?;
    temp.write_all(bytes).context("cannot write temp file")?;
    temp.persist(path)
        .with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

fn write_text_file(path: &Path, text: &str) -> Result<()> {
    atomic_write(path, text.as_bytes())
}

fn write_xes_file(log: &EventLog, path: &Path) -> Result<()> {
    let mut bytes = Vec::new();
    write_xes(log, BufWriter::new(&mut bytes))
        .with_context(|| format!("while serializing {}", path.display()))?;
    atomic_write(path, &bytes)
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => {
            write_text_file(path, text)?;
            println!("{}", path.display());
            Ok(())
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
