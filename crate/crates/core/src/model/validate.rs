use super::{ElementPath, ModelIndex, SystemModel};
use crate::finding::{Finding, FindingClass, Stage};
use crate::names;
use std::collections::{BTreeMap, BTreeSet};

const NAME_GRAMMAR: &str = "(~|/)?token('/'token)*";

/// Well-formedness findings for a structurally parsed model, sorted.
/// The result is empty iff the model is well-formed.
pub fn validate_model(model: &SystemModel) -> Vec<Finding> {
    let index = ModelIndex::new(model);
    let mut findings = Vec::new();
    let err = |class, subject: &dyn ToString| Finding::error(Stage::Model, class, subject.to_string());

    let requirement_ids: BTreeSet<&str> = model.requirements.iter().map(|r| r.id.as_str()).collect();
    for req in &model.requirements {
        if req.allocations.is_empty() {
            findings.push(err(FindingClass::UnallocatedRequirement, &req.id));
        }
        for allocation in &req.allocations {
            let resolves = allocation
                .parse::<ElementPath>()
                .is_ok_and(|p| !p.is_root() && index.contains_path(&p));
            if !resolves {
                findings.push(err(FindingClass::DanglingAllocation, &req.id).observed(allocation.clone()));
            }
        }
    }

    for system in &index.systems {
        let def = system.def;
        if !def.namespace.is_empty() && names::normalize_namespace(&def.namespace).is_err() {
            findings.push(
                err(FindingClass::NameViolation, &system.path)
                    .expected("absolute namespace")
                    .observed(def.namespace.clone()),
            );
        }
        for id in &def.allocated_requirements {
            if !requirement_ids.contains(id.as_str()) {
                findings.push(err(FindingClass::DanglingReference, &system.path).observed(id.clone()));
            }
        }
    }

    let packages: BTreeSet<&str> = model.sources.placements().map(|(p, _)| p).collect();
    for node in &index.nodes {
        let leaf = matches!(names::classify(&node.def.name), Ok((names::NameKind::Relative, body)) if !body.contains('/'));
        if !leaf {
            findings.push(
                err(FindingClass::NameViolation, &node.path)
                    .expected("token")
                    .observed(node.def.name.clone()),
            );
        }
        if !node.def.package.is_empty() && !packages.contains(node.def.package.as_str()) {
            findings.push(err(FindingClass::DanglingReference, &node.path).observed(node.def.package.clone()));
        }
        for (_, endpoint) in node.def.endpoints().filter(|(_, e)| e.external) {
            if !names::is_valid_name(&endpoint.channel) {
                findings.push(
                    err(FindingClass::NameViolation, &node.path)
                        .expected(NAME_GRAMMAR)
                        .observed(endpoint.channel.clone()),
                );
            }
        }
    }
    for channel in &index.channels {
        if !names::is_valid_name(&channel.def.channel_name) {
            findings.push(
                err(FindingClass::NameViolation, &channel.path)
                    .expected(NAME_GRAMMAR)
                    .observed(channel.def.channel_name.clone()),
            );
        }
    }

    let mut by_fqn: BTreeMap<&str, Vec<String>> = BTreeMap::new();
    for node in &index.nodes {
        if let Some(fqn) = &node.fqn {
            by_fqn.entry(fqn).or_default().push(node.path.to_string());
        }
    }
    for (fqn, paths) in by_fqn.into_iter().filter(|(_, p)| p.len() > 1) {
        findings.push(err(FindingClass::DuplicateName, &fqn).observed(paths.join(", ")));
    }

    let mut endpoint_keys = BTreeSet::new();
    for endpoint in &index.endpoints {
        if let Some(fqn) = &endpoint.channel_fqn {
            if !endpoint_keys.insert((endpoint.node, endpoint.role, fqn.clone())) {
                let node = &index.nodes[endpoint.node];
                findings.push(
                    err(FindingClass::DuplicateName, &node.path).observed(format!("{} {fqn}", endpoint.role)),
                );
            }
        }
    }

    for plan in &model.plans {
        let resolves = plan.scope.parse::<ElementPath>().is_ok_and(|p| index.contains_path(&p));
        if !resolves {
            findings.push(err(FindingClass::DanglingReference, &plan.id).observed(plan.scope.clone()));
        }
        for step in &plan.steps {
            if let Some(channel) = &step.channel {
                let absolute = matches!(names::classify(channel), Ok((names::NameKind::Absolute, _)));
                if !absolute {
                    findings.push(
                        err(FindingClass::NameViolation, &plan.id)
                            .expected("absolute channel name")
                            .observed(channel.clone()),
                    );
                }
            }
        }
    }

    findings.sort();
    findings.dedup();
    findings
}
