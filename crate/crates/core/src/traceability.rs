//! Requirement traceability: requirements, their allocated elements and the
//! verification evidence gathered for them at each stage.

use crate::finding::{Stage, VerificationReport};
use crate::model::{ElementPath, ModelIndex, SystemModel};
use crate::names;
use crate::scenario::ScenarioResult;
use serde::Serialize;
use std::fmt::{self, Write as _};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TraceabilityError {
    #[error("{stage} evidence scope `{scope}` is not part of the model")]
    ForeignReport { stage: String, scope: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Unverified,
    Pass,
    Fail,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Unverified => "unverified",
            Status::Pass => "pass",
            Status::Fail => "fail",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct StageStatus {
    pub ssrve: Status,
    pub srve: Status,
    pub sources: Status,
    pub scenarios: Status,
}

impl StageStatus {
    fn all(&self) -> [Status; 4] {
        [self.ssrve, self.srve, self.sources, self.scenarios]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceRow {
    pub requirement_id: String,
    pub text: String,
    pub allocated_paths: Vec<String>,
    pub verification_status: StageStatus,
    pub scenario_refs: Vec<String>,
}

impl TraceRow {
    /// Overall status: fail if any column fails, pass if any passes.
    pub fn overall(&self) -> Status {
        let all = self.verification_status.all();
        if all.contains(&Status::Fail) {
            Status::Fail
        } else if all.contains(&Status::Pass) {
            Status::Pass
        } else {
            Status::Unverified
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct TraceabilityMatrix {
    pub rows: Vec<TraceRow>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct CoverageSummary {
    pub total: usize,
    pub allocated: usize,
    pub verified_pass: usize,
    pub verified_fail: usize,
    pub unverified: usize,
}

impl CoverageSummary {
    pub fn unallocated(&self) -> usize {
        self.total - self.allocated
    }
}

/// Builds one row per requirement, in document order.
///
/// A column fails when an error finding of that stage points at an element
/// under one of the requirement's allocations. It passes when every
/// allocation lies inside the scope of a passing report of that stage, and
/// is unverified otherwise. The scenario column uses results whose plan
/// scope overlaps an allocation.
pub fn build_matrix(
    model: &SystemModel,
    reports: &[VerificationReport],
    scenario_results: &[ScenarioResult],
) -> Result<TraceabilityMatrix, TraceabilityError> {
    let index = ModelIndex::new(model);
    let scope_of = |stage: &str, scope: &str| -> Result<ElementPath, TraceabilityError> {
        scope
            .parse::<ElementPath>()
            .ok()
            .filter(|p| index.contains_path(p))
            .ok_or_else(|| TraceabilityError::ForeignReport { stage: stage.to_string(), scope: scope.to_string() })
    };

    let mut evidence = Vec::with_capacity(reports.len());
    for report in reports {
        let scope = scope_of(report.stage.as_str(), &report.scope)?;
        let failed: Vec<ElementPath> = report
            .findings
            .iter()
            .filter(|f| f.is_error())
            .flat_map(|f| subject_paths(&index, &f.subject))
            .collect();
        evidence.push((report, scope, failed));
    }
    let mut scenarios = Vec::with_capacity(scenario_results.len());
    for result in scenario_results {
        scenarios.push((result, scope_of("trace", &result.scope)?));
    }
    let plan_scopes: Vec<(&str, Option<ElementPath>)> =
        model.plans.iter().map(|p| (p.id.as_str(), p.scope.parse().ok())).collect();

    let mut rows = Vec::with_capacity(model.requirements.len());
    for requirement in &model.requirements {
        let allocations: Vec<ElementPath> =
            requirement.allocations.iter().filter_map(|a| a.parse().ok()).collect();
        let touches = |scope: &ElementPath| allocations.iter().any(|a| a.contains(scope) || scope.contains(a));

        let column = |stage: Stage| -> Status {
            if allocations.is_empty() {
                return Status::Unverified;
            }
            let of_stage = || evidence.iter().filter(|(r, _, _)| r.stage == stage);
            let failed = of_stage().any(|(_, _, failed)| failed.iter().any(|p| allocations.iter().any(|a| a.contains(p))));
            if failed {
                return Status::Fail;
            }
            let covered = allocations
                .iter()
                .all(|a| of_stage().any(|(r, scope, _)| r.pass && scope.contains(a)));
            if covered {
                Status::Pass
            } else {
                Status::Unverified
            }
        };

        let scenario_status = if allocations.is_empty() {
            Status::Unverified
        } else {
            let relevant: Vec<bool> =
                scenarios.iter().filter(|(_, scope)| touches(scope)).map(|(r, _)| r.matched).collect();
            if relevant.contains(&false) {
                Status::Fail
            } else if relevant.is_empty() {
                Status::Unverified
            } else {
                Status::Pass
            }
        };

        let scenario_refs = plan_scopes
            .iter()
            .filter(|(_, scope)| scope.as_ref().is_some_and(|s| !allocations.is_empty() && touches(s)))
            .map(|(id, _)| id.to_string())
            .collect();

        rows.push(TraceRow {
            requirement_id: requirement.id.clone(),
            text: requirement.text.clone(),
            allocated_paths: requirement.allocations.clone(),
            verification_status: StageStatus {
                ssrve: column(Stage::Ssrve),
                srve: column(Stage::Srve),
                sources: column(Stage::Sources),
                scenarios: scenario_status,
            },
            scenario_refs,
        });
    }
    Ok(TraceabilityMatrix { rows })
}

/// Element paths a finding subject refers to.
///
/// Subjects are element paths, node names, edge subjects
/// (`node role channel`), channel names, package names, or names of
/// runtime nodes the design does not know; the last are charged to the
/// system owning their namespace.
fn subject_paths(index: &ModelIndex<'_>, subject: &str) -> Vec<ElementPath> {
    if let Ok(path) = subject.parse::<ElementPath>() {
        if !path.is_root() && index.contains_path(&path) {
            return vec![path];
        }
    }
    let name = subject.split(' ').next().unwrap_or(subject);
    if let Some(node) = index.node_by_fqn(name) {
        return vec![node.path.clone()];
    }
    let channels: Vec<ElementPath> = {
        let mut found: Vec<ElementPath> = index
            .endpoints
            .iter()
            .filter(|e| e.channel_fqn.as_deref() == Some(name))
            .filter_map(|e| e.channel.map(|c| index.channels[c].path.clone()))
            .collect();
        found.sort();
        found.dedup();
        found
    };
    if !channels.is_empty() {
        return channels;
    }
    let users: Vec<ElementPath> =
        index.nodes.iter().filter(|n| n.def.package == name).map(|n| n.path.clone()).collect();
    if !users.is_empty() {
        return users;
    }
    if name.starts_with('/') {
        let owner = index
            .systems
            .iter()
            .filter(|s| s.explicit_namespace)
            .filter(|s| s.namespace.as_deref().is_some_and(|ns| ns != "/" && names::is_under_namespace(name, ns)))
            .max_by_key(|s| (s.namespace.as_ref().map_or(0, String::len), s.path.depth()));
        if let Some(owner) = owner {
            return vec![owner.path.clone()];
        }
    }
    Vec::new()
}

pub fn coverage_summary(matrix: &TraceabilityMatrix) -> CoverageSummary {
    let mut summary = CoverageSummary { total: matrix.rows.len(), ..Default::default() };
    for row in &matrix.rows {
        if !row.allocated_paths.is_empty() {
            summary.allocated += 1;
        }
        match row.overall() {
            Status::Pass => summary.verified_pass += 1,
            Status::Fail => summary.verified_fail += 1,
            Status::Unverified => summary.unverified += 1,
        }
    }
    summary
}

impl TraceabilityMatrix {
    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("matrix serializes")
    }

    /// Plain-text table, one line per requirement.
    pub fn render_text(&self) -> String {
        const HEADER: [&str; 7] = ["id", "text", "allocations", "ssrve", "srve", "sources", "scenarios"];
        let cells: Vec<[String; 7]> = self
            .rows
            .iter()
            .map(|r| {
                let s = r.verification_status;
                [
                    r.requirement_id.clone(),
                    r.text.clone(),
                    if r.allocated_paths.is_empty() { "-".to_string() } else { r.allocated_paths.join(", ") },
                    s.ssrve.to_string(),
                    s.srve.to_string(),
                    s.sources.to_string(),
                    s.scenarios.to_string(),
                ]
            })
            .collect();
        let mut widths = HEADER.map(str::len);
        for row in &cells {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.chars().count());
            }
        }
        let mut out = String::new();
        let mut line = |row: &[&str]| {
            let mut text = String::new();
            for (i, cell) in row.iter().enumerate() {
                if i + 1 == row.len() {
                    text.push_str(cell);
                } else {
                    let _ = write!(text, "{cell:<width$}  ", width = widths[i]);
                }
            }
            out.push_str(text.trim_end());
            out.push('\n');
        };
        line(&HEADER);
        for row in &cells {
            line(&row.each_ref().map(String::as_str));
        }
        out
    }
}
