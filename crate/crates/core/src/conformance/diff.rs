use super::{ExpectedGraph, MatchPolicy};
use crate::finding::{Finding, FindingClass, Severity, Stage};
use crate::model::Role;
use crate::snapshot::RuntimeSnapshot;
use std::collections::{BTreeMap, BTreeSet};

/// Subject string used for edge findings.
pub fn edge_subject(node: &str, role: Role, channel: &str) -> String {
    format!("{node} {role} {channel}")
}

type EdgeKey<'a> = (&'a str, &'a str, Role);

/// Compares an expected graph with an observed snapshot.
///
/// Node findings are the two set differences of node names. Edge findings
/// are only produced for nodes present on both sides, so a renamed or
/// deleted node yields node findings alone. An edge present on both sides
/// with a different type is one `TypeMismatch`; external edges have no
/// declared type and are compared by presence only.
pub fn diff_graphs(
    expected: &ExpectedGraph,
    observed: &RuntimeSnapshot,
    policy: &MatchPolicy,
    stage: Stage,
) -> Vec<Finding> {
    let expected_nodes: BTreeSet<&str> = expected
        .nodes
        .iter()
        .map(String::as_str)
        .filter(|n| !policy.ignores_node(n))
        .collect();
    let observed_nodes: BTreeSet<&str> = observed
        .nodes
        .iter()
        .map(|n| n.fqn.as_str())
        .filter(|n| !policy.ignores_node(n))
        .collect();

    let mut findings = Vec::new();
    for node in expected_nodes.difference(&observed_nodes) {
        findings.push(Finding::error(stage, FindingClass::MissingNode, *node));
    }
    let unexpected_severity = policy.unexpected_node_severity(stage);
    for node in observed_nodes.difference(&expected_nodes) {
        findings.push(Finding::new(stage, unexpected_severity, FindingClass::UnexpectedNode, *node));
    }

    let common: BTreeSet<&str> = expected_nodes.intersection(&observed_nodes).copied().collect();
    let mut expected_edges: BTreeMap<EdgeKey<'_>, Option<&str>> = BTreeMap::new();
    for edge in &expected.edges {
        let node = edge.node_fqn.as_str();
        if common.contains(node) && !policy.ignores_channel(&edge.channel_fqn, Some(node)) {
            expected_edges.insert((node, edge.channel_fqn.as_str(), edge.role), edge.interface_type.as_deref());
        }
    }
    let mut observed_edges: BTreeMap<EdgeKey<'_>, &str> = BTreeMap::new();
    for node in observed.nodes.iter().filter(|n| common.contains(n.fqn.as_str())) {
        for (role, channel, ty) in node.edges() {
            if !policy.ignores_channel(channel, Some(&node.fqn)) {
                observed_edges.insert((node.fqn.as_str(), channel, role), ty);
            }
        }
    }

    for (&(node, channel, role), &expected_type) in &expected_edges {
        let subject = edge_subject(node, role, channel);
        match observed_edges.get(&(node, channel, role)) {
            None => {
                let mut f = Finding::error(stage, FindingClass::MissingEdge, subject);
                if let Some(ty) = expected_type {
                    f = f.expected(ty);
                }
                findings.push(f);
            }
            Some(&observed_type) => {
                if let Some(ty) = expected_type {
                    if ty != observed_type {
                        findings.push(
                            Finding::error(stage, FindingClass::TypeMismatch, subject)
                                .expected(ty)
                                .observed(observed_type),
                        );
                    }
                }
            }
        }
    }
    for (&(node, channel, role), &ty) in &observed_edges {
        if !expected_edges.contains_key(&(node, channel, role)) {
            findings.push(
                Finding::new(stage, Severity::Error, FindingClass::UnexpectedEdge, edge_subject(node, role, channel))
                    .observed(ty),
            );
        }
    }
    findings.sort();
    findings
}
