//! Validation plans derived from sequence diagrams, and greedy
//! ordered-subsequence matching of recorded event traces against them.

use crate::finding::{Finding, FindingClass, Stage};
use crate::par;
use crate::snapshot::{EventTrace, TraceEvent};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScenarioError {
    #[error("plan `{0}` has neither steps nor parts")]
    EmptyPlan(String),
    #[error("plan `{0}` has both steps and parts")]
    MixedPlan(String),
    #[error("plan `{plan}` step {step} has an empty label")]
    EmptyLabel { plan: String, step: usize },
    #[error("duplicate plan id `{0}`")]
    DuplicatePlan(String),
    #[error("plan `{plan}` references unknown part `{part}`")]
    UnresolvedPart { plan: String, part: String },
    #[error("plan composition cycle: {}", .0.join(" -> "))]
    CompositionCycle(Vec<String>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlanStage {
    Subsystem,
    System,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanStep {
    #[serde(default)]
    pub actor: Option<String>,
    pub label: String,
    #[serde(default)]
    pub channel: Option<String>,
    #[serde(default)]
    pub activity: Option<String>,
}

impl PlanStep {
    pub fn new(actor: &str, label: &str) -> Self {
        PlanStep {
            actor: Some(actor.to_string()),
            label: label.to_string(),
            channel: None,
            activity: None,
        }
    }

    pub fn on_channel(mut self, channel: &str) -> Self {
        self.channel = Some(channel.to_string());
        self
    }

    pub fn activity(mut self, tag: &str) -> Self {
        self.activity = Some(tag.to_string());
        self
    }

    pub fn accepts(&self, event: &TraceEvent) -> bool {
        if self.label.trim() != event.label.trim() {
            return false;
        }
        if let Some(actor) = &self.actor {
            if actor.trim() != event.actor.trim() {
                return false;
            }
        }
        if let Some(channel) = &self.channel {
            if channel != &event.channel_fqn {
                return false;
            }
        }
        true
    }

    pub fn describe(&self) -> String {
        match &self.actor {
            Some(actor) => format!("{actor}: {}", self.label.trim()),
            None => self.label.trim().to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidationPlan {
    pub id: String,
    pub stage: PlanStage,
    pub scope: String,
    #[serde(default)]
    pub steps: Vec<PlanStep>,
    #[serde(default)]
    pub parts: Vec<String>,
}

impl ValidationPlan {
    pub fn simple(id: &str, stage: PlanStage, scope: &str, steps: Vec<PlanStep>) -> Self {
        ValidationPlan { id: id.into(), stage, scope: scope.into(), steps, parts: Vec::new() }
    }

    pub fn composite(id: &str, stage: PlanStage, scope: &str, parts: &[&str]) -> Self {
        ValidationPlan {
            id: id.into(),
            stage,
            scope: scope.into(),
            steps: Vec::new(),
            parts: parts.iter().map(|p| p.to_string()).collect(),
        }
    }

    /// Checks the steps-xor-parts shape and non-empty labels.
    pub fn check_shape(&self) -> Result<(), ScenarioError> {
        match (self.steps.is_empty(), self.parts.is_empty()) {
            (true, true) => return Err(ScenarioError::EmptyPlan(self.id.clone())),
            (false, false) => return Err(ScenarioError::MixedPlan(self.id.clone())),
            _ => {}
        }
        if let Some(step) = self.steps.iter().position(|s| s.label.trim().is_empty()) {
            return Err(ScenarioError::EmptyLabel { plan: self.id.clone(), step });
        }
        Ok(())
    }

    pub fn is_composite(&self) -> bool {
        !self.parts.is_empty()
    }
}

/// Plans addressable by id, used to resolve composite plans.
#[derive(Debug, Clone, Default)]
pub struct PlanRegistry<'a> {
    plans: BTreeMap<&'a str, &'a ValidationPlan>,
}

impl<'a> PlanRegistry<'a> {
    pub fn new(plans: &'a [ValidationPlan]) -> Result<Self, ScenarioError> {
        let mut map = BTreeMap::new();
        for plan in plans {
            if map.insert(plan.id.as_str(), plan).is_some() {
                return Err(ScenarioError::DuplicatePlan(plan.id.clone()));
            }
        }
        Ok(PlanRegistry { plans: map })
    }

    pub fn get(&self, id: &str) -> Option<&'a ValidationPlan> {
        self.plans.get(id).copied()
    }

    /// Plans that are not a part of any other plan, in id order.
    pub fn roots(&self) -> Vec<&'a ValidationPlan> {
        let parts: std::collections::BTreeSet<&str> =
            self.plans.values().flat_map(|p| p.parts.iter().map(String::as_str)).collect();
        self.plans.values().filter(|p| !parts.contains(p.id.as_str())).copied().collect()
    }

    /// Flattens a plan into its ordered steps, resolving parts recursively.
    pub fn flatten(&self, plan: &'a ValidationPlan) -> Result<Vec<&'a PlanStep>, ScenarioError> {
        let mut out = Vec::new();
        let mut stack = Vec::new();
        self.flatten_into(plan, &mut stack, &mut out)?;
        Ok(out)
    }

    fn flatten_into(
        &self,
        plan: &'a ValidationPlan,
        stack: &mut Vec<&'a str>,
        out: &mut Vec<&'a PlanStep>,
    ) -> Result<(), ScenarioError> {
        if let Some(start) = stack.iter().position(|id| *id == plan.id) {
            let mut cycle: Vec<String> = stack[start..].iter().map(|s| s.to_string()).collect();
            cycle.push(plan.id.clone());
            return Err(ScenarioError::CompositionCycle(cycle));
        }
        plan.check_shape()?;
        stack.push(&plan.id);
        out.extend(plan.steps.iter());
        for part in &plan.parts {
            let child = self.get(part).ok_or_else(|| ScenarioError::UnresolvedPart {
                plan: plan.id.clone(),
                part: part.clone(),
            })?;
            self.flatten_into(child, stack, out)?;
        }
        stack.pop();
        Ok(())
    }

    /// Validates every plan: shape, part resolution and acyclicity.
    pub fn check_all(&self) -> Result<(), ScenarioError> {
        for plan in self.plans.values() {
            self.flatten(plan)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScenarioResult {
    pub plan_id: String,
    pub scope: String,
    pub matched: bool,
    /// Trace `seq` matched by each step, for the matched prefix.
    pub matched_indices: Vec<u64>,
    pub first_failed_step: Option<usize>,
    pub findings: Vec<Finding>,
    /// Activity tag of every flattened step.
    #[serde(skip)]
    pub step_activities: Vec<Option<String>>,
}

/// Matches `trace` against `plan` as an ordered subsequence.
///
/// Each step takes the first event after the previous step's match that
/// carries the step's label (and actor and channel, when given). Composite
/// plans are flattened, so parts consume the remaining trace in order.
pub fn match_trace<'a>(
    plan: &'a ValidationPlan,
    trace: &EventTrace,
    registry: &PlanRegistry<'a>,
) -> Result<ScenarioResult, ScenarioError> {
    let steps = registry.flatten(plan)?;
    let events = &trace.events;
    let mut matched_indices = Vec::with_capacity(steps.len());
    let mut cursor = 0usize;
    let mut failure = None;

    for (index, step) in steps.iter().enumerate() {
        match events[cursor..].iter().position(|e| step.accepts(e)) {
            Some(offset) => {
                let position = cursor + offset;
                matched_indices.push(events[position].seq);
                cursor = position + 1;
            }
            None => {
                failure = Some((index, *step));
                break;
            }
        }
    }

    let mut findings = Vec::new();
    if let Some((index, step)) = failure {
        let after = match matched_indices.last() {
            Some(seq) => format!("after seq {seq}"),
            None => "in trace".to_string(),
        };
        let early = events[..cursor].iter().find(|e| step.accepts(e));
        let finding = match early {
            Some(event) => Finding::error(Stage::Trace, FindingClass::ScenarioOrderViolation, plan.scope.clone())
                .observed(format!("matching event at seq {} precedes the previous step", event.seq)),
            None => Finding::error(Stage::Trace, FindingClass::ScenarioStepMissing, plan.scope.clone())
                .observed(format!("no matching event {after}")),
        };
        findings.push(finding.expected(format!("[{}] step {index}: {}", plan.id, step.describe())));
    }

    Ok(ScenarioResult {
        plan_id: plan.id.clone(),
        scope: plan.scope.clone(),
        matched: failure.is_none(),
        matched_indices,
        first_failed_step: failure.map(|(i, _)| i),
        findings,
        step_activities: steps.iter().map(|s| s.activity.clone()).collect(),
    })
}

/// Matches several plans against one trace, in input order.
pub fn match_plans(
    plans: &[&ValidationPlan],
    trace: &EventTrace,
    registry: &PlanRegistry<'_>,
) -> Result<Vec<ScenarioResult>, ScenarioError> {
    par::map(plans, |plan| match_trace(plan, trace, registry)).into_iter().collect()
}

/// Reports each activity tag (first-appearance order) with whether every
/// step carrying it matched.
pub fn annotate_activities(result: &ScenarioResult) -> Vec<(String, bool)> {
    let matched_steps = result.matched_indices.len();
    let mut tags: Vec<(String, bool)> = Vec::new();
    for (index, tag) in result.step_activities.iter().enumerate() {
        let Some(tag) = tag else { continue };
        let ok = index < matched_steps;
        match tags.iter_mut().find(|(t, _)| t == tag) {
            Some(entry) => entry.1 &= ok,
            None => tags.push((tag.clone(), ok)),
        }
    }
    tags
}
