//! Graded two-pass evaluation records: parsing, validation and joining.
//!
//! Input is line-delimited JSON, one object per line, with the required fields
//! `question_id`, `model_id`, `setting_id`, `pass` (1 or 2) and `label`.
//! Unknown extra fields are ignored. Labels are case-insensitive; the grader
//! vocabulary `not_attempted` is accepted as an alias of `refused`.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::io::{self, BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GradeLabel {
    Correct,
    Incorrect,
    Refused,
}

impl GradeLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            GradeLabel::Correct => "correct",
            GradeLabel::Incorrect => "incorrect",
            GradeLabel::Refused => "refused",
        }
    }
}

impl FromStr for GradeLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "correct" => Ok(GradeLabel::Correct),
            "incorrect" => Ok(GradeLabel::Incorrect),
            "refused" | "not_attempted" => Ok(GradeLabel::Refused),
            _ => Err(format!("unknown label `{s}`")),
        }
    }
}

impl fmt::Display for GradeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One graded response.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionRecord {
    pub question_id: String,
    pub model_id: String,
    pub setting_id: String,
    /// 1 for the refusal-allowed pass, 2 for the forced-answer pass.
    pub pass: u8,
    pub label: GradeLabel,
}

impl QuestionRecord {
    /// Canonical single-line JSON encoding.
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("record serialization is infallible")
    }

    fn key(&self) -> (&str, &str, &str, u8) {
        (&self.question_id, &self.model_id, &self.setting_id, self.pass)
    }
}

/// Where a validation problem was found.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Location {
    Line(usize),
    Question(String),
}

/// A single validation problem with a stable code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub location: Location,
    pub code: &'static str,
    pub message: String,
}

impl Diagnostic {
    fn line(line: usize, code: &'static str, message: impl Into<String>) -> Self {
        Diagnostic { location: Location::Line(line), code, message: message.into() }
    }

    fn question(id: &str, code: &'static str, message: impl Into<String>) -> Self {
        Diagnostic { location: Location::Question(id.to_string()), code, message: message.into() }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.location {
            Location::Line(n) => write!(f, "LINE {n}: {}: {}", self.code, self.message),
            Location::Question(q) => write!(f, "QUESTION {q}: {}: {}", self.code, self.message),
        }
    }
}

/// Every problem found while reading or joining a record set.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct RecordErrors(pub Vec<Diagnostic>);

impl fmt::Display for RecordErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

fn string_field(obj: &serde_json::Map<String, Value>, name: &str, line: usize) -> Result<String, Diagnostic> {
    match obj.get(name) {
        None => Err(Diagnostic::line(line, "missing-field", format!("field `{name}` is required"))),
        Some(Value::String(s)) if !s.is_empty() => Ok(s.clone()),
        Some(other) => Err(Diagnostic::line(
            line,
            "invalid-field",
            format!("field `{name}` must be a non-empty string, got {other}"),
        )),
    }
}

fn parse_line(text: &str, line: usize) -> Result<QuestionRecord, Vec<Diagnostic>> {
    let value: Value = serde_json::from_str(text)
        .map_err(|e| vec![Diagnostic::line(line, "malformed-line", e.to_string())])?;
    let Value::Object(obj) = value else {
        return Err(vec![Diagnostic::line(line, "malformed-line", "expected a JSON object")]);
    };
    let mut problems = Vec::new();
    let mut take = |r: Result<String, Diagnostic>| match r {
        Ok(s) => Some(s),
        Err(d) => {
            problems.push(d);
            None
        }
    };
    let question_id = take(string_field(&obj, "question_id", line));
    let model_id = take(string_field(&obj, "model_id", line));
    let setting_id = take(string_field(&obj, "setting_id", line));

    let pass = match obj.get("pass") {
        None => {
            problems.push(Diagnostic::line(line, "missing-field", "field `pass` is required"));
            None
        }
        Some(v) => match v.as_u64() {
            Some(p @ (1 | 2)) => Some(p as u8),
            _ => {
                problems.push(Diagnostic::line(line, "invalid-pass", format!("pass must be 1 or 2, got {v}")));
                None
            }
        },
    };
    let label = match obj.get("label") {
        None => {
            problems.push(Diagnostic::line(line, "missing-field", "field `label` is required"));
            None
        }
        Some(Value::String(s)) => match s.parse::<GradeLabel>() {
            Ok(l) => Some(l),
            Err(msg) => {
                problems.push(Diagnostic::line(line, "unknown-label", msg));
                None
            }
        },
        Some(other) => {
            problems.push(Diagnostic::line(line, "unknown-label", format!("label must be a string, got {other}")));
            None
        }
    };
    match (question_id, model_id, setting_id, pass, label) {
        (Some(question_id), Some(model_id), Some(setting_id), Some(pass), Some(label))
            if problems.is_empty() =>
        {
            Ok(QuestionRecord { question_id, model_id, setting_id, pass, label })
        }
        _ => Err(problems),
    }
}

/// Parses a line-delimited record stream, collecting every problem found.
/// Blank lines are skipped; line numbers are 1-based.
pub fn parse_records(input: impl BufRead) -> Result<Vec<QuestionRecord>, RecordErrors> {
    let mut records = Vec::new();
    let mut diagnostics = Vec::new();
    let mut seen: HashMap<(String, String, String, u8), usize> = HashMap::new();
    for (idx, line) in input.lines().enumerate() {
        let n = idx + 1;
        let text = match line {
            Ok(t) => t,
            Err(e) => {
                diagnostics.push(Diagnostic::line(n, "malformed-line", e.to_string()));
                continue;
            }
        };
        if text.trim().is_empty() {
            continue;
        }
        match parse_line(&text, n) {
            Ok(rec) => {
                let (q, m, s, p) = rec.key();
                let key = (q.to_string(), m.to_string(), s.to_string(), p);
                if let Some(&first) = seen.get(&key) {
                    diagnostics.push(Diagnostic::line(
                        n,
                        "duplicate-key",
                        format!(
                            "question `{q}` model `{m}` setting `{s}` pass {p} already appeared on line {first}"
                        ),
                    ));
                } else {
                    seen.insert(key, n);
                    records.push(rec);
                }
            }
            Err(mut ds) => diagnostics.append(&mut ds),
        }
    }
    if diagnostics.is_empty() {
        Ok(records)
    } else {
        Err(RecordErrors(diagnostics))
    }
}

/// Writes records in canonical form, one per line.
pub fn write_records<'a>(
    mut out: impl Write,
    records: impl IntoIterator<Item = &'a QuestionRecord>,
) -> io::Result<()> {
    for r in records {
        writeln!(out, "{}", r.to_json_line())?;
    }
    Ok(())
}

/// Distinct `(model_id, setting_id)` pairs in order of first appearance.
pub fn units(records: &[QuestionRecord]) -> Vec<(String, String)> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for r in records {
        let key = (r.model_id.clone(), r.setting_id.clone());
        if seen.insert(key.clone()) {
            out.push(key);
        }
    }
    out
}

/// Per-question view of both passes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JoinedOutcome {
    pub question_id: String,
    pub pass1: GradeLabel,
    pub pass2: Option<GradeLabel>,
    /// Aggregated incorrectness: the second-pass grade for refused questions,
    /// the first-pass grade otherwise.
    pub w_hat: bool,
}

impl JoinedOutcome {
    pub fn refused(&self) -> bool {
        self.pass1 == GradeLabel::Refused
    }

    pub fn correct_first_pass(&self) -> bool {
        self.pass1 == GradeLabel::Correct
    }

    /// Builds the joined view, applying the aggregation rule. Pass-2 grades
    /// are ignored for questions that were answered in pass 1.
    pub fn new(question_id: impl Into<String>, pass1: GradeLabel, pass2: Option<GradeLabel>) -> Self {
        let w_hat = match (pass1, pass2) {
            (GradeLabel::Refused, Some(second)) => second != GradeLabel::Correct,
            (GradeLabel::Refused, None) => true,
            (first, _) => first != GradeLabel::Correct,
        };
        JoinedOutcome { question_id: question_id.into(), pass1, pass2, w_hat }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct JoinOptions {
    /// Treat a pass-2 `refused` grade as `incorrect` (with a warning) instead
    /// of rejecting it.
    pub coerce_pass2_refusal: bool,
}

/// Joins the two passes of one `(model, setting)` unit into per-question outcomes,
/// in order of first-pass appearance.
pub fn join_passes(
    records: &[QuestionRecord],
    model_id: &str,
    setting_id: &str,
    options: JoinOptions,
) -> Result<Vec<JoinedOutcome>, RecordErrors> {
    let mut first: Vec<(&str, GradeLabel)> = Vec::new();
    let mut first_index: HashMap<&str, GradeLabel> = HashMap::new();
    let mut second: HashMap<&str, GradeLabel> = HashMap::new();
    let mut second_order: Vec<&str> = Vec::new();
    let mut diagnostics = Vec::new();

    for r in records.iter().filter(|r| r.model_id == model_id && r.setting_id == setting_id) {
        let q = r.question_id.as_str();
        if r.pass == 1 {
            if first_index.insert(q, r.label).is_some() {
                diagnostics.push(Diagnostic::question(q, "duplicate-key", "more than one pass-1 record"));
                continue;
            }
            first.push((q, r.label));
        } else {
            let label = if r.label == GradeLabel::Refused {
                if options.coerce_pass2_refusal {
                    log::warn!("question {q}: pass-2 refusal graded as incorrect");
                    GradeLabel::Incorrect
                } else {
                    diagnostics.push(Diagnostic::question(
                        q,
                        "refused-in-pass-2",
                        "the forced-answer pass cannot be graded as refused",
                    ));
                    continue;
                }
            } else {
                r.label
            };
            if second.insert(q, label).is_some() {
                diagnostics.push(Diagnostic::question(q, "duplicate-key", "more than one pass-2 record"));
                continue;
            }
            second_order.push(q);
        }
    }

    for &q in &second_order {
        match first_index.get(q) {
            None => diagnostics.push(Diagnostic::question(
                q,
                "missing-pass-1",
                "pass-2 record without a pass-1 record",
            )),
            Some(GradeLabel::Refused) => {}
            Some(l) => diagnostics.push(Diagnostic::question(
                q,
                "orphan-pass-2",
                format!("pass-2 record for a question answered ({l}) in pass 1"),
            )),
        }
    }

    let mut out = Vec::with_capacity(first.len());
    for (q, label) in first {
        let pass2 = second.get(q).copied();
        if label == GradeLabel::Refused && pass2.is_none() {
            // a pass-2 refusal already reported above is not also "missing"
            let rejected = diagnostics.iter().any(|d| {
                d.code == "refused-in-pass-2" && d.location == Location::Question(q.to_string())
            });
            if !rejected {
                diagnostics.push(Diagnostic::question(
                    q,
                    "missing-pass-2",
                    "refused in pass 1 but has no pass-2 record",
                ));
            }
            continue;
        }
        let pass2 = if label == GradeLabel::Refused { pass2 } else { None };
        out.push(JoinedOutcome::new(q, label, pass2));
    }

    if diagnostics.is_empty() {
        Ok(out)
    } else {
        Err(RecordErrors(diagnostics))
    }
}

/// Share of questions with the same first-pass correctness under two settings,
/// among questions answered in pass 1 under both. `None` if no question was
/// answered under both.
pub fn pairwise_accuracy_agreement(a: &[JoinedOutcome], b: &[JoinedOutcome]) -> Option<f64> {
    let answered_b: HashMap<&str, bool> = b
        .iter()
        .filter(|o| !o.refused())
        .map(|o| (o.question_id.as_str(), o.correct_first_pass()))
        .collect();
    let (mut shared, mut same) = (0usize, 0usize);
    for o in a.iter().filter(|o| !o.refused()) {
        if let Some(&correct_b) = answered_b.get(o.question_id.as_str()) {
            shared += 1;
            if correct_b == o.correct_first_pass() {
                same += 1;
            }
        }
    }
    (shared > 0).then(|| same as f64 / shared as f64)
}
