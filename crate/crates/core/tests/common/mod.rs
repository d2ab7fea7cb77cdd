//! Fixture loading and brute-force oracles shared by the integration tests.
//!
//! The oracles recompute findings from first principles with plain vectors
//! and nested loops, without calling the crate's graph or diff code.

#![allow(dead_code)]

use meros_verify::finding::{Finding, FindingClass, Severity, Stage};
use meros_verify::model::{parse_model, SystemDef, SystemModel};
use meros_verify::snapshot::{
    parse_runtime_snapshot, parse_source_snapshot, parse_trace, EventTrace, RuntimeSnapshot, SourceSnapshot,
};
use std::path::PathBuf;

pub fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/heros")
}

pub fn fixture_path(name: &str) -> PathBuf {
    fixture_dir().join(name)
}

pub fn read_fixture(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn model() -> SystemModel {
    parse_model(&read_fixture("model.json")).expect("fixture model parses")
}

pub fn runtime() -> RuntimeSnapshot {
    parse_runtime_snapshot(&read_fixture("runtime.json")).expect("fixture snapshot parses")
}

pub fn sources() -> SourceSnapshot {
    parse_source_snapshot(&read_fixture("sources.json")).expect("fixture sources parse")
}

pub fn trace(name: &str) -> EventTrace {
    parse_trace(&read_fixture(&format!("traces/{name}.jsonl"))).expect("fixture trace parses")
}

/// Comparable view of a finding.
pub type Key = (FindingClass, Severity, String, Option<String>, Option<String>);

pub fn keys(findings: &[Finding]) -> Vec<Key> {
    let mut keys: Vec<Key> = findings
        .iter()
        .map(|f| (f.class, f.severity, f.subject.clone(), f.expected.clone(), f.observed.clone()))
        .collect();
    keys.sort();
    keys
}

/// `(node, channel, role, type)`; `type` is `None` for external endpoints.
pub type OracleEdge = (String, String, &'static str, Option<String>);

#[derive(Debug, Clone, Default)]
pub struct OracleGraph {
    pub nodes: Vec<String>,
    pub edges: Vec<OracleEdge>,
}

const ROLES: [&str; 6] = ["pub", "sub", "srv", "cli", "act_srv", "act_cli"];

fn join(ns: &str, name: &str) -> String {
    if name.starts_with('/') {
        name.to_string()
    } else if ns == "/" {
        format!("/{name}")
    } else {
        format!("{ns}/{name}")
    }
}

/// Expected graph of the whole model, computed by walking the system tree
/// directly. Only handles what the fixture uses: plain relative and
/// absolute names.
pub fn oracle_expected(model: &SystemModel) -> OracleGraph {
    fn walk<'a>(system: &'a SystemDef, ns: &str, chain: &mut Vec<(String, &'a SystemDef)>, out: &mut OracleGraph) {
        let ns = if system.namespace.is_empty() { ns.to_string() } else { system.namespace.clone() };
        chain.push((ns.clone(), system));
        for node in &system.nodes {
            let fqn = join(&ns, &node.name);
            out.nodes.push(fqn.clone());
            let lists = [
                &node.publishes,
                &node.subscribes,
                &node.serves,
                &node.calls,
                &node.action_servers,
                &node.action_clients,
            ];
            for (role, list) in ROLES.iter().zip(lists) {
                for endpoint in list {
                    if endpoint.external {
                        out.edges.push((fqn.clone(), join(&ns, &endpoint.channel), role, None));
                        continue;
                    }
                    let mut found = None;
                    for (owner_ns, owner) in chain.iter().rev() {
                        if let Some(c) = owner.channels.iter().find(|c| c.name == endpoint.channel) {
                            found = Some((join(owner_ns, &c.channel_name), c.interface_type.clone()));
                            break;
                        }
                    }
                    let (channel, ty) = found.expect("fixture endpoints resolve");
                    out.edges.push((fqn.clone(), channel, role, Some(ty)));
                }
            }
        }
        for child in &system.children {
            walk(child, &ns, chain, out);
        }
        chain.pop();
    }
    let mut out = OracleGraph::default();
    for system in &model.systems {
        walk(system, "/", &mut Vec::new(), &mut out);
    }
    out
}

const PARAMETER_SERVICES: [&str; 7] = [
    "describe_parameters",
    "get_parameter_types",
    "get_parameters",
    "get_type_description",
    "list_parameters",
    "set_parameters",
    "set_parameters_atomically",
];

/// Channels the default policy leaves out, restated independently.
pub fn is_infrastructure(node: &str, channel: &str) -> bool {
    channel == "/rosout"
        || channel == "/parameter_events"
        || PARAMETER_SERVICES.iter().any(|s| channel == format!("{node}/{s}"))
}

pub fn observed_edges(snapshot: &RuntimeSnapshot) -> Vec<(String, String, &'static str, String)> {
    let mut out = Vec::new();
    for node in &snapshot.nodes {
        let lists = [
            &node.publishers,
            &node.subscribers,
            &node.services,
            &node.clients,
            &node.action_servers,
            &node.action_clients,
        ];
        for (role, list) in ROLES.iter().zip(lists) {
            for (channel, ty) in list {
                out.push((node.fqn.clone(), channel.clone(), *role, ty.clone()));
            }
        }
    }
    out
}

/// Brute-force graph diff: two node set differences, then per shared node
/// the edge set differences and type disagreements.
pub fn oracle_diff(
    expected: &OracleGraph,
    observed: &RuntimeSnapshot,
    stage: Stage,
    skip_infrastructure: bool,
) -> Vec<Key> {
    let observed_nodes: Vec<String> = observed.nodes.iter().map(|n| n.fqn.clone()).collect();
    let unexpected_severity = if stage == Stage::Ssrve { Severity::Warning } else { Severity::Error };
    let mut out: Vec<Key> = Vec::new();
    for n in &expected.nodes {
        if !observed_nodes.contains(n) && !out.iter().any(|k| k.0 == FindingClass::MissingNode && &k.2 == n) {
            out.push((FindingClass::MissingNode, Severity::Error, n.clone(), None, None));
        }
    }
    for n in &observed_nodes {
        if !expected.nodes.contains(n) {
            out.push((FindingClass::UnexpectedNode, unexpected_severity, n.clone(), None, None));
        }
    }
    let shared = |n: &String| expected.nodes.contains(n) && observed_nodes.contains(n);
    let keep = |node: &str, channel: &str| !(skip_infrastructure && is_infrastructure(node, channel));
    let observed = observed_edges(observed);

    for (node, channel, role, ty) in &expected.edges {
        if !shared(node) || !keep(node, channel) {
            continue;
        }
        let subject = format!("{node} {role} {channel}");
        if out.iter().any(|k| k.2 == subject) {
            continue;
        }
        match observed.iter().find(|(n, c, r, _)| n == node && c == channel && r == role) {
            None => out.push((FindingClass::MissingEdge, Severity::Error, subject, ty.clone(), None)),
            Some((_, _, _, seen)) => {
                if let Some(ty) = ty {
                    if ty != seen {
                        out.push((FindingClass::TypeMismatch, Severity::Error, subject, Some(ty.clone()), Some(seen.clone())));
                    }
                }
            }
        }
    }
    for (node, channel, role, ty) in &observed {
        if !shared(node) || !keep(node, channel) {
            continue;
        }
        if !expected.edges.iter().any(|(n, c, r, _)| n == node && c == channel && r == role) {
            out.push((FindingClass::UnexpectedEdge, Severity::Error, format!("{node} {role} {channel}"), None, Some(ty.clone())));
        }
    }
    out.sort();
    out
}

/// Brute-force source placement check.
pub fn oracle_sources(model: &SystemModel, observed: &SourceSnapshot) -> Vec<Key> {
    let flatten = |layout: &meros_verify::model::SourceLayout| {
        let mut v = Vec::new();
        for ws in &layout.workspaces {
            for repo in &ws.repositories {
                for p in &repo.packages {
                    v.push((p.clone(), format!("{}/{}", ws.name, repo.name)));
                }
            }
        }
        v
    };
    let want = flatten(&model.sources);
    let have = flatten(observed.layout());
    let mut out = Vec::new();
    for (p, place) in &want {
        match have.iter().find(|(q, _)| q == p) {
            None => out.push((FindingClass::MissingPackage, Severity::Error, p.clone(), Some(place.clone()), None)),
            Some((_, other)) if other != place => out.push((
                FindingClass::MisplacedArtifact,
                Severity::Error,
                p.clone(),
                Some(place.clone()),
                Some(other.clone()),
            )),
            _ => {}
        }
    }
    for (p, place) in &have {
        if !want.iter().any(|(q, _)| q == p) {
            out.push((FindingClass::UnexpectedPackage, Severity::Warning, p.clone(), None, Some(place.clone())));
        }
    }
    out.sort();
    out
}

/// Requirements without allocations.
pub fn oracle_unallocated(model: &SystemModel) -> Vec<Key> {
    let mut out: Vec<Key> = model
        .requirements
        .iter()
        .filter(|r| r.allocations.is_empty())
        .map(|r| (FindingClass::UnallocatedRequirement, Severity::Error, r.id.clone(), None, None))
        .collect();
    out.sort();
    out
}

/// Path to the release binary built by cargo for integration tests.
pub fn binary() -> PathBuf {
    PathBuf::from(env!("CARGO_BIN_EXE_meros-verify"))
}
