//! Stage-tagged findings and verification reports.

use serde::Serialize;
use std::fmt;

/// V-model stage that produced a finding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    /// Model well-formedness.
    Model,
    /// Subsystem realisation verification.
    Ssrve,
    /// System realisation verification.
    Srve,
    /// Source placement verification.
    Sources,
    /// Scenario trace validation.
    Trace,
}

impl Stage {
    pub const ALL: [Stage; 5] = [Stage::Model, Stage::Ssrve, Stage::Srve, Stage::Sources, Stage::Trace];

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Model => "model",
            Stage::Ssrve => "ssrve",
            Stage::Srve => "srve",
            Stage::Sources => "sources",
            Stage::Trace => "trace",
        }
    }

    /// Stage-class table: which finding classes a stage may emit.
    pub fn permits(self, class: FindingClass) -> bool {
        use FindingClass::*;
        match self {
            Stage::Model => matches!(
                class,
                NameViolation | UnallocatedRequirement | DanglingAllocation | DanglingReference | DuplicateName
            ),
            Stage::Ssrve | Stage::Srve => matches!(
                class,
                MissingNode | UnexpectedNode | MissingEdge | UnexpectedEdge | TypeMismatch | NameViolation
            ),
            Stage::Sources => matches!(class, MissingPackage | UnexpectedPackage | MisplacedArtifact),
            Stage::Trace => matches!(class, ScenarioStepMissing | ScenarioOrderViolation),
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Warning,
    Error,
}

impl Severity {
    pub fn as_str(self) -> &'static str {
        match self {
            Severity::Warning => "warning",
            Severity::Error => "error",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum FindingClass {
    MissingNode,
    UnexpectedNode,
    MissingEdge,
    UnexpectedEdge,
    TypeMismatch,
    NameViolation,
    MisplacedArtifact,
    MissingPackage,
    UnexpectedPackage,
    UnallocatedRequirement,
    DanglingAllocation,
    DanglingReference,
    DuplicateName,
    ScenarioStepMissing,
    ScenarioOrderViolation,
}

impl FindingClass {
    pub fn as_str(self) -> &'static str {
        use FindingClass::*;
        match self {
            MissingNode => "MissingNode",
            UnexpectedNode => "UnexpectedNode",
            MissingEdge => "MissingEdge",
            UnexpectedEdge => "UnexpectedEdge",
            TypeMismatch => "TypeMismatch",
            NameViolation => "NameViolation",
            MisplacedArtifact => "MisplacedArtifact",
            MissingPackage => "MissingPackage",
            UnexpectedPackage => "UnexpectedPackage",
            UnallocatedRequirement => "UnallocatedRequirement",
            DanglingAllocation => "DanglingAllocation",
            DanglingReference => "DanglingReference",
            DuplicateName => "DuplicateName",
            ScenarioStepMissing => "ScenarioStepMissing",
            ScenarioOrderViolation => "ScenarioOrderViolation",
        }
    }
}

impl fmt::Display for FindingClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One divergence record. Field order is the sort order used in reports.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Finding {
    pub stage: Stage,
    pub class: FindingClass,
    pub subject: String,
    pub severity: Severity,
    pub expected: Option<String>,
    pub observed: Option<String>,
}

impl Finding {
    /// Panics if `class` is not permitted for `stage`.
    pub fn new(stage: Stage, severity: Severity, class: FindingClass, subject: impl Into<String>) -> Self {
        assert!(stage.permits(class), "{class} is not a {stage} finding");
        Finding {
            stage,
            class,
            subject: subject.into(),
            severity,
            expected: None,
            observed: None,
        }
    }

    pub fn error(stage: Stage, class: FindingClass, subject: impl Into<String>) -> Self {
        Self::new(stage, Severity::Error, class, subject)
    }

    pub fn warning(stage: Stage, class: FindingClass, subject: impl Into<String>) -> Self {
        Self::new(stage, Severity::Warning, class, subject)
    }

    pub fn expected(mut self, value: impl Into<String>) -> Self {
        self.expected = Some(value.into());
        self
    }

    pub fn observed(mut self, value: impl Into<String>) -> Self {
        self.observed = Some(value.into());
        self
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

/// Wire form of a finding; keeps the documented key order.
#[derive(Serialize)]
struct FindingJson<'a> {
    stage: Stage,
    severity: Severity,
    class: FindingClass,
    subject: &'a str,
    expected: &'a Option<String>,
    observed: &'a Option<String>,
}

impl<'a> From<&'a Finding> for FindingJson<'a> {
    fn from(f: &'a Finding) -> Self {
        FindingJson {
            stage: f.stage,
            severity: f.severity,
            class: f.class,
            subject: &f.subject,
            expected: &f.expected,
            observed: &f.observed,
        }
    }
}

/// Result of one stage run over one scope.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerificationReport {
    pub stage: Stage,
    pub scope: String,
    pub findings: Vec<Finding>,
    pub pass: bool,
}

impl VerificationReport {
    /// Sorts findings and derives `pass` from them.
    pub fn new(stage: Stage, scope: impl Into<String>, mut findings: Vec<Finding>) -> Self {
        findings.sort();
        findings.dedup();
        let pass = !findings.iter().any(Finding::is_error);
        VerificationReport {
            stage,
            scope: scope.into(),
            findings,
            pass,
        }
    }

    pub fn errors(&self) -> usize {
        self.findings.iter().filter(|f| f.is_error()).count()
    }

    pub fn warnings(&self) -> usize {
        self.findings.len() - self.errors()
    }

    pub fn max_severity(&self) -> Option<Severity> {
        self.findings.iter().map(|f| f.severity).max()
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(ReportJson::from(self)).expect("report serializes")
    }
}

#[derive(Serialize)]
struct ReportJson<'a> {
    stage: Stage,
    scope: &'a str,
    pass: bool,
    findings: Vec<FindingJson<'a>>,
}

impl<'a> From<&'a VerificationReport> for ReportJson<'a> {
    fn from(r: &'a VerificationReport) -> Self {
        ReportJson {
            stage: r.stage,
            scope: &r.scope,
            pass: r.pass,
            findings: r.findings.iter().map(FindingJson::from).collect(),
        }
    }
}

impl Serialize for VerificationReport {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        ReportJson::from(self).serialize(serializer)
    }
}
