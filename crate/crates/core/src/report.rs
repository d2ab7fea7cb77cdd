//! Text and JSON rendering of stage reports.

use crate::finding::{FindingClass, Severity, VerificationReport};
use crate::traceability::TraceabilityMatrix;
use serde_json::Value;
use std::fmt::Write as _;

/// Minimum normalised similarity for a missing/unexpected pair to be
/// reported as a probable rename.
const RENAME_SIMILARITY: f64 = 0.6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ColorChoice {
    #[default]
    Auto,
    Always,
    Never,
}

impl std::str::FromStr for ColorChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "auto" => Ok(ColorChoice::Auto),
            "always" => Ok(ColorChoice::Always),
            "never" => Ok(ColorChoice::Never),
            other => Err(format!("invalid color choice `{other}` (expected auto, always or never)")),
        }
    }
}

/// A report plus free-form lines shown under it in text output only.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Section {
    pub report: VerificationReport,
    pub notes: Vec<String>,
}

impl From<VerificationReport> for Section {
    fn from(report: VerificationReport) -> Self {
        Section { report, notes: Vec::new() }
    }
}

struct Paint(bool);

impl Paint {
    fn wrap(&self, code: &str, text: &str) -> String {
        if self.0 {
            format!("\x1b[{code}m{text}\x1b[0m")
        } else {
            text.to_string()
        }
    }
}

/// JSON form: one object for a single report, an array otherwise.
pub fn reports_json(reports: &[VerificationReport]) -> Value {
    match reports {
        [one] => one.to_json_value(),
        many => Value::Array(many.iter().map(VerificationReport::to_json_value).collect()),
    }
}

/// JSON form of a full pipeline run.
pub fn pipeline_json(reports: &[VerificationReport], matrix: &TraceabilityMatrix) -> Value {
    serde_json::json!({
        "reports": reports.iter().map(VerificationReport::to_json_value).collect::<Vec<_>>(),
        "matrix": matrix.to_json_value(),
    })
}

pub fn to_json_string(value: &Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("json value serializes");
    text.push('\n');
    text
}

/// Banner, finding table and summary line for every section.
pub fn render_text(sections: &[Section], color: bool) -> String {
    let paint = Paint(color);
    let mut out = String::new();
    for (i, section) in sections.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let report = &section.report;
        let verdict = if report.pass { paint.wrap("32;1", "PASS") } else { paint.wrap("31;1", "FAIL") };
        let _ = writeln!(out, "== {} :: {} :: {} ==", report.stage, report.scope, verdict);

        if !report.findings.is_empty() {
            let rows: Vec<[&str; 5]> = report
                .findings
                .iter()
                .map(|f| {
                    [
                        f.severity.as_str(),
                        f.class.as_str(),
                        f.subject.as_str(),
                        f.expected.as_deref().unwrap_or("-"),
                        f.observed.as_deref().unwrap_or("-"),
                    ]
                })
                .collect();
            let header = ["severity", "class", "subject", "expected", "observed"];
            let mut widths = header.map(str::len);
            for row in &rows {
                for (w, cell) in widths.iter_mut().zip(row) {
                    *w = (*w).max(cell.chars().count());
                }
            }
            let line = |cells: &[&str; 5], severity: Option<Severity>| {
                let mut text = String::new();
                for (i, cell) in cells.iter().enumerate() {
                    let padded = if i == 4 { cell.to_string() } else { format!("{cell:<w$}  ", w = widths[i]) };
                    let padded = match (i, severity) {
                        (0, Some(Severity::Error)) => paint.wrap("31", &padded),
                        (0, Some(Severity::Warning)) => paint.wrap("33", &padded),
                        _ => padded,
                    };
                    text.push_str(&padded);
                }
                text.trim_end().to_string()
            };
            let _ = writeln!(out, "{}", line(&header, None));
            for (row, finding) in rows.iter().zip(&report.findings) {
                let _ = writeln!(out, "{}", line(row, Some(finding.severity)));
            }
        }
        for note in rename_notes(report).iter().chain(&section.notes) {
            let _ = writeln!(out, "note: {note}");
        }
        let _ = writeln!(out, "{} error(s), {} warning(s)", report.errors(), report.warnings());
    }
    out
}

pub fn render_matrix_text(matrix: &TraceabilityMatrix) -> String {
    let summary = crate::traceability::coverage_summary(matrix);
    let mut out = String::from("== traceability ==\n");
    out.push_str(&matrix.render_text());
    let _ = writeln!(
        out,
        "{} requirement(s): {} allocated, {} pass, {} fail, {} unverified",
        summary.total, summary.allocated, summary.verified_pass, summary.verified_fail, summary.unverified
    );
    out
}

/// Pairs each missing node with the most similar unexpected node, when the
/// names are close enough to suggest a rename.
fn rename_notes(report: &VerificationReport) -> Vec<String> {
    let of = |class| report.findings.iter().filter(move |f| f.class == class).map(|f| f.subject.as_str());
    let unexpected: Vec<&str> = of(FindingClass::UnexpectedNode).collect();
    let mut notes = Vec::new();
    for missing in of(FindingClass::MissingNode) {
        let best = unexpected
            .iter()
            .map(|u| (strsim::normalized_levenshtein(missing, u), *u))
            .filter(|(score, _)| *score >= RENAME_SIMILARITY)
            .max_by(|a, b| a.0.total_cmp(&b.0).then_with(|| b.1.cmp(a.1)));
        if let Some((_, candidate)) = best {
            notes.push(format!("{candidate} may be {missing} under a different name"));
        }
    }
    notes
}
