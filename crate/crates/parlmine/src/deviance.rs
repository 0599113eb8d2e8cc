//! Conjunctive threshold rules over feature tables: seeded train/test
//! splitting, beam-search induction maximizing F1, evaluation with
//! precision and recall, a plain-text rule grammar for rewriting, and
//! condition removal for simplification.
//!
//! A row matches a rule iff every condition holds and every referenced
//! feature is present; absent features never match, so a rule about an
//! activity delay simply does not fire on traces where the activity
//! never occurred.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::enrich::{FeatureRow, FeatureTable};
use crate::eventlog::AttributeValue;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparator {
    GreaterEq,
    LessEq,
    Equal,
}

impl fmt::Display for Comparator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Comparator::GreaterEq => ">=",
            Comparator::LessEq => "<=",
            Comparator::Equal => "=",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConditionValue {
    Number(f64),
    Flag(bool),
    Text(String),
}

impl fmt::Display for ConditionValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConditionValue::Number(n) => write!(f, "{n}"),
            ConditionValue::Flag(true) => f.write_str("True"),
            ConditionValue::Flag(false) => f.write_str("False"),
            ConditionValue::Text(s) => write!(f, "\"{s}\""),
        }
    }
}

/// One comparison; `>=` and `<=` apply to numeric features, `=` to
/// boolean and text features.
#[derive(Debug, Clone, PartialEq)]
pub struct Condition {
    pub feature: String,
    pub comparator: Comparator,
    pub value: ConditionValue,
}

impl Condition {
    pub fn matches(&self, features: &BTreeMap<String, AttributeValue>) -> bool {
        let Some(actual) = features.get(&self.feature) else {
            return false;
        };
        match (self.comparator, &self.value, actual) {
            (Comparator::GreaterEq, ConditionValue::Number(t), AttributeValue::Number(v)) => v >= t,
            (Comparator::LessEq, ConditionValue::Number(t), AttributeValue::Number(v)) => v <= t,
            (Comparator::Equal, ConditionValue::Flag(b), AttributeValue::Flag(v)) => v == b,
            (Comparator::Equal, ConditionValue::Text(s), AttributeValue::Text(v)) => v == s,
            _ => false,
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.feature, self.comparator, self.value)
    }
}

/// A conjunction of conditions.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub conditions: Vec<Condition>,
}

impl Rule {
    pub fn matches(&self, row: &FeatureRow) -> bool {
        self.conditions.iter().all(|c| c.matches(&row.features))
    }

    pub fn references(&self, feature: &str) -> bool {
        self.conditions.iter().any(|c| c.feature == feature)
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, condition) in self.conditions.iter().enumerate() {
            if i > 0 {
                f.write_str(" and ")?;
            }
            write!(f, "{condition}")?;
        }
        Ok(())
    }
}

/// Confusion-matrix counts of a rule against the delay label.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RuleEvaluation {
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub true_negatives: usize,
    pub precision: f64,
    pub recall: f64,
}

impl RuleEvaluation {
    pub fn f1(&self) -> f64 {
        let denom = 2 * self.true_positives + self.false_positives + self.false_negatives;
        if denom == 0 {
            0.0
        } else {
            2.0 * self.true_positives as f64 / denom as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InductionConfig {
    pub test_fraction: f64,
    pub seed: u64,
    /// Case-insensitive substrings; features whose name contains any of
    /// them are invisible to the inducer.
    pub hidden_patterns: Vec<String>,
    pub max_conditions: usize,
    pub beam_width: usize,
}

impl Default for InductionConfig {
    fn default() -> Self {
        InductionConfig {
            test_fraction: 0.33,
            seed: 42,
            hidden_patterns: Vec::new(),
            max_conditions: 2,
            beam_width: 10,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum DevianceError {
    #[error("feature table is empty")]
    EmptyTable,
    #[error("row {case_id:?} is not labeled")]
    UnlabeledTable { case_id: String },
    #[error("training data contains only one class")]
    SingleClassTrain,
    #[error("all features are hidden")]
    AllFeaturesHidden,
    #[error("invalid test fraction {0}, must be in (0, 1)")]
    BadTestFraction(f64),
    #[error("cannot drop the last condition of a rule")]
    LastCondition,
    #[error("condition index {index} out of range for a {len}-condition rule")]
    BadIndex { index: usize, len: usize },
    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },
}

/// Deterministic seeded shuffle split; the test part receives
/// ceil(test_fraction * n) rows, the train part the rest.
pub fn split_train_test(
    table: &FeatureTable,
    config: &InductionConfig,
) -> Result<(FeatureTable, FeatureTable), DevianceError> {
    if table.rows.is_empty() {
        return Err(DevianceError::EmptyTable);
    }
    if !(config.test_fraction > 0.0 && config.test_fraction < 1.0) {
        return Err(DevianceError::BadTestFraction(config.test_fraction));
    }
    let n = table.rows.len();
    // the epsilon keeps 0.33 * 100 at 33 despite binary rounding
    let test_len = ((config.test_fraction * n as f64) - 1e-9).ceil().max(1.0) as usize;

    let mut indices: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    indices.shuffle(&mut rng);

    let make = |picks: &[usize]| FeatureTable {
        rows: picks.iter().map(|&i| table.rows[i].clone()).collect(),
        catalog: table.catalog.clone(),
    };
    Ok((make(&indices[test_len..]), make(&indices[..test_len])))
}

fn is_hidden(feature: &str, patterns: &[String]) -> bool {
    let lower = feature.to_lowercase();
    patterns.iter().any(|p| lower.contains(&p.to_lowercase()))
}

type RankKey = (f64, usize, String);

/// Rank order: higher F1 first, then fewer conditions, then
/// lexicographic rule text (which starts with the feature names).
fn rank_cmp(a: &RankKey, b: &RankKey) -> std::cmp::Ordering {
    b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2))
}

/// Keeps the `capacity` best rules seen so far, deduplicated by their
/// canonical text.
struct RankedPool {
    capacity: usize,
    entries: Vec<(RankKey, Rule)>,
    seen: HashSet<String>,
}

impl RankedPool {
    fn new(capacity: usize) -> Self {
        RankedPool {
            capacity,
            entries: Vec::new(),
            seen: HashSet::new(),
        }
    }

    fn offer(&mut self, f1: f64, rule: Rule) {
        let text = rule.to_string();
        if self.seen.contains(&text) {
            return;
        }
        let key: RankKey = (f1, rule.conditions.len(), text.clone());
        if self.entries.len() >= self.capacity {
            let worst = self.entries.last().expect("nonempty at capacity");
            if rank_cmp(&key, &worst.0) != std::cmp::Ordering::Less {
                return;
            }
            let dropped = self.entries.pop().expect("nonempty");
            self.seen.remove(&dropped.0 .2);
        }
        self.seen.insert(text);
        let position = self
            .entries
            .partition_point(|(k, _)| rank_cmp(k, &key) == std::cmp::Ordering::Less);
        self.entries.insert(position, (key, rule));
    }

    fn into_rules(self) -> Vec<Rule> {
        self.entries.into_iter().map(|(_, r)| r).collect()
    }
}

/// Candidate conditions for one feature, derived from its observed
/// values: thresholds at midpoints between consecutive distinct numeric
/// values, and equality tests for flags and texts.
fn candidate_conditions(
    feature: &str,
    rows: &[FeatureRow],
    mask: Option<&[bool]>,
) -> Vec<Condition> {
    let mut numbers: Vec<f64> = Vec::new();
    let mut flags: BTreeSet<bool> = BTreeSet::new();
    let mut texts: BTreeSet<&str> = BTreeSet::new();
    for (i, row) in rows.iter().enumerate() {
        if mask.is_some_and(|m| !m[i]) {
            continue;
        }
        match row.features.get(feature) {
            Some(AttributeValue::Number(n)) => numbers.push(*n),
            Some(AttributeValue::Flag(b)) => {
                flags.insert(*b);
            }
            Some(AttributeValue::Text(s)) => {
                texts.insert(s);
            }
            _ => {}
        }
    }
    numbers.sort_by(f64::total_cmp);
    numbers.dedup();

    let mut out = Vec::new();
    for window in numbers.windows(2) {
        let threshold = (window[0] + window[1]) / 2.0;
        for comparator in [Comparator::GreaterEq, Comparator::LessEq] {
            out.push(Condition {
                feature: feature.to_string(),
                comparator,
                value: ConditionValue::Number(threshold),
            });
        }
    }
    for flag in flags {
        out.push(Condition {
            feature: feature.to_string(),
            comparator: Comparator::Equal,
            value: ConditionValue::Flag(flag),
        });
    }
    for text in texts {
        out.push(Condition {
            feature: feature.to_string(),
            comparator: Comparator::Equal,
            value: ConditionValue::Text(text.to_string()),
        });
    }
    out
}

fn f1_of_mask(mask: &[bool], labels: &[bool], total_positives: usize) -> f64 {
    let mut tp = 0usize;
    let mut matched = 0usize;
    for (m, l) in mask.iter().zip(labels) {
        if *m {
            matched += 1;
            if *l {
                tp += 1;
            }
        }
    }
    let fp = matched - tp;
    let fn_count = total_positives - tp;
    let denom = 2 * tp + fp + fn_count;
    if denom == 0 {
        0.0
    } else {
        2.0 * tp as f64 / denom as f64
    }
}

fn apply_condition(condition: &Condition, rows: &[FeatureRow], base: Option<&[bool]>) -> Vec<bool> {
    rows.iter()
        .enumerate()
        .map(|(i, row)| base.is_none_or(|m| m[i]) && condition.matches(&row.features))
        .collect()
}

fn canonical(mut conditions: Vec<Condition>) -> Vec<Condition> {
    conditions.sort_by(|a, b| {
        a.feature
            .cmp(&b.feature)
            .then_with(|| a.to_string().cmp(&b.to_string()))
    });
    conditions
}

/// Beam search over conjunctions of up to `max_conditions` threshold
/// conditions, maximizing F1 on the training rows. Features matching a
/// hidden pattern never appear in any returned rule.
pub fn induce_rules(
    train: &FeatureTable,
    config: &InductionConfig,
) -> Result<Vec<Rule>, DevianceError> {
    if train.rows.is_empty() {
        return Err(DevianceError::EmptyTable);
    }
    let labels: Vec<bool> = train
        .rows
        .iter()
        .map(|r| {
            r.is_delayed.ok_or_else(|| DevianceError::UnlabeledTable {
                case_id: r.case_id.clone(),
            })
        })
        .collect::<Result<_, _>>()?;
    let total_positives = labels.iter().filter(|l| **l).count();
    if total_positives == 0 || total_positives == labels.len() {
        return Err(DevianceError::SingleClassTrain);
    }

    let visible: Vec<&String> = train
        .catalog
        .iter()
        .filter(|f| !is_hidden(f, &config.hidden_patterns))
        .collect();
    if visible.is_empty() {
        return Err(DevianceError::AllFeaturesHidden);
    }

    let mut pool = RankedPool::new(config.beam_width.max(1));
    // beam entries: (rule, match mask, f1)
    let mut beam: Vec<(Rule, Vec<bool>, f64)> = Vec::new();

    for feature in &visible {
        for condition in candidate_conditions(feature, &train.rows, None) {
            let mask = apply_condition(&condition, &train.rows, None);
            let f1 = f1_of_mask(&mask, &labels, total_positives);
            let rule = Rule {
                conditions: vec![condition],
            };
            pool.offer(f1, rule.clone());
            beam.push((rule, mask, f1));
        }
    }
    prune_beam(&mut beam, config.beam_width.max(1));

    for _ in 1..config.max_conditions.max(1) {
        let mut next: Vec<(Rule, Vec<bool>, f64)> = Vec::new();
        for (rule, mask, _) in &beam {
            for feature in &visible {
                if rule.references(feature) {
                    continue;
                }
                // thresholds come from the rows the rule still matches,
                // narrowing the split candidates to the relevant subset
                for condition in candidate_conditions(feature, &train.rows, Some(mask)) {
                    let new_mask = apply_condition(&condition, &train.rows, Some(mask));
                    let f1 = f1_of_mask(&new_mask, &labels, total_positives);
                    let mut conditions = rule.conditions.clone();
                    conditions.push(condition);
                    let new_rule = Rule {
                        conditions: canonical(conditions),
                    };
                    pool.offer(f1, new_rule.clone());
                    next.push((new_rule, new_mask, f1));
                }
            }
        }
        prune_beam(&mut next, config.beam_width.max(1));
        beam = next;
        if beam.is_empty() {
            break;
        }
    }

    Ok(pool.into_rules())
}

fn prune_beam(beam: &mut Vec<(Rule, Vec<bool>, f64)>, width: usize) {
    beam.sort_by(|a, b| {
        b.2.total_cmp(&a.2)
            .then(a.0.conditions.len().cmp(&b.0.conditions.len()))
            .then_with(|| a.0.to_string().cmp(&b.0.to_string()))
    });
    beam.dedup_by(|a, b| a.0 == b.0);
    beam.truncate(width);
}

/// Confusion matrix of a rule on a fully labeled table. Rows with any
/// referenced feature absent count as non-matching.
pub fn evaluate_rule(rule: &Rule, table: &FeatureTable) -> Result<RuleEvaluation, DevianceError> {
    let mut tp = 0;
    let mut fp = 0;
    let mut fn_count = 0;
    let mut tn = 0;
    for row in &table.rows {
        let label = row
            .is_delayed
            .ok_or_else(|| DevianceError::UnlabeledTable {
                case_id: row.case_id.clone(),
            })?;
        match (rule.matches(row), label) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_count += 1,
            (false, false) => tn += 1,
        }
    }
    Ok(RuleEvaluation {
        true_positives: tp,
        false_positives: fp,
        false_negatives: fn_count,
        true_negatives: tn,
        precision: if tp + fp > 0 {
            tp as f64 / (tp + fp) as f64
        } else {
            0.0
        },
        recall: if tp + fn_count > 0 {
            tp as f64 / (tp + fn_count) as f64
        } else {
            0.0
        },
    })
}

/// Removes one condition; rewriting workflows use this to generalize a
/// rule, which can only grow its match set.
pub fn simplify_rule(rule: &Rule, drop_index: usize) -> Result<Rule, DevianceError> {
    if rule.conditions.len() <= 1 {
        return Err(DevianceError::LastCondition);
    }
    if drop_index >= rule.conditions.len() {
        return Err(DevianceError::BadIndex {
            index: drop_index,
            len: rule.conditions.len(),
        });
    }
    let mut conditions = rule.conditions.clone();
    conditions.remove(drop_index);
    Ok(Rule { conditions })
}

/// Parses the textual rule grammar: `cond (" and " cond)*` with
/// `cond := feature (">="|"<="|"=") literal`. Feature names may contain
/// spaces, dots, colons, and non-ASCII letters. `>=`/`<=` take numeric
/// literals, `=` takes `True`, `False`, or a double-quoted string.
pub fn parse_rule(text: &str) -> Result<Rule, DevianceError> {
    let mut conditions = Vec::new();
    let mut offset = 0;
    for part in text.split(" and ") {
        conditions.push(parse_condition(part, offset)?);
        offset += part.len() + " and ".len();
    }
    if conditions.is_empty() {
        return Err(DevianceError::Syntax {
            position: 0,
            message: "empty rule".to_string(),
        });
    }
    Ok(Rule { conditions })
}

fn parse_condition(part: &str, offset: usize) -> Result<Condition, DevianceError> {
    let (index, token) = ["<=", ">="]
        .iter()
        .filter_map(|t| part.find(t).map(|i| (i, *t)))
        .min()
        .or_else(|| part.find('=').map(|i| (i, "=")))
        .ok_or_else(|| DevianceError::Syntax {
            position: offset,
            message: format!("no comparator in {part:?}"),
        })?;

    let feature = part[..index].trim();
    if feature.is_empty() {
        return Err(DevianceError::Syntax {
            position: offset,
            message: "missing feature name".to_string(),
        });
    }
    let comparator = match token {
        ">=" => Comparator::GreaterEq,
        "<=" => Comparator::LessEq,
        _ => Comparator::Equal,
    };

    let literal_start = index + token.len();
    let literal = part[literal_start..].trim();
    let literal_position = offset
        + literal_start
        + (part[literal_start..].len() - part[literal_start..].trim_start().len());
    if literal.is_empty() {
        return Err(DevianceError::Syntax {
            position: literal_position,
            message: "missing literal".to_string(),
        });
    }

    let value = if literal == "True" {
        ConditionValue::Flag(true)
    } else if literal == "False" {
        ConditionValue::Flag(false)
    } else if literal.len() >= 2 && literal.starts_with('"') && literal.ends_with('"') {
        ConditionValue::Text(literal[1..literal.len() - 1].to_string())
    } else if let Ok(n) = literal.parse::<f64>() {
        ConditionValue::Number(n)
    } else {
        return Err(DevianceError::Syntax {
            position: literal_position,
            message: format!("invalid literal {literal:?}"),
        });
    };

    match (comparator, &value) {
        (Comparator::GreaterEq | Comparator::LessEq, ConditionValue::Number(_)) => {}
        (Comparator::Equal, ConditionValue::Flag(_) | ConditionValue::Text(_)) => {}
        (Comparator::Equal, ConditionValue::Number(_)) => {
            return Err(DevianceError::Syntax {
                position: literal_position,
                message: "'=' requires True, False, or a quoted string".to_string(),
            });
        }
        (_, _) => {
            return Err(DevianceError::Syntax {
                position: literal_position,
                message: "'>=' and '<=' require a numeric literal".to_string(),
            });
        }
    }

    Ok(Condition {
        feature: feature.to_string(),
        comparator,
        value,
    })
}

/// Parses a rules file: one rule per line, `#` starts a comment, blank
/// lines are skipped.
pub fn parse_rules_text(text: &str) -> Result<Vec<(usize, Rule)>, DevianceError> {
    let mut rules = Vec::new();
    for (line_index, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        rules.push((line_index + 1, parse_rule(line)?));
    }
    Ok(rules)
}

/// CSV export of rule evaluations: rule, precision, recall.
pub fn evaluations_to_csv(entries: &[(String, RuleEvaluation)]) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(["rule", "precision", "recall"])
        .expect("in-memory write");
    for (rule, evaluation) in entries {
        writer
            .write_record([
                rule.as_str(),
                &format!("{:.3}", evaluation.precision),
                &format!("{:.3}", evaluation.recall),
            ])
            .expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("utf8")
}
