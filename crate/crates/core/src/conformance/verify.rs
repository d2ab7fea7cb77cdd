use super::graph::expected_graph_in;
use super::{diff_graphs, ConformanceError, ExpectedGraph, MatchPolicy};
use crate::finding::{Finding, FindingClass, Stage, VerificationReport};
use crate::model::{ElementPath, ModelIndex, PackagePlacement, SystemModel};
use crate::names;
use crate::par::{self, Execution};
use crate::snapshot::{RuntimeNode, RuntimeSnapshot, SourceSnapshot};
use std::collections::{BTreeMap, BTreeSet};

/// Model-derived lookup tables shared by every scoped check.
#[derive(Debug, Clone)]
pub struct Conformance<'m> {
    pub index: ModelIndex<'m>,
    /// Resolved channel names declared in each system's subtree.
    subtree_channels: Vec<BTreeSet<String>>,
    model_nodes: BTreeSet<String>,
}

impl<'m> Conformance<'m> {
    pub fn new(model: &'m SystemModel) -> Self {
        let index = ModelIndex::new(model);
        let mut subtree_channels = vec![BTreeSet::new(); index.systems.len()];
        for endpoint in &index.endpoints {
            let (Some(channel), Some(fqn)) = (endpoint.channel, &endpoint.channel_fqn) else { continue };
            let mut system = Some(index.channels[channel].system);
            while let Some(s) = system {
                subtree_channels[s].insert(fqn.clone());
                system = index.systems[s].parent;
            }
        }
        let model_nodes = index.nodes.iter().filter_map(|n| n.fqn.clone()).collect();
        Conformance { index, subtree_channels, model_nodes }
    }

    pub fn model(&self) -> &'m SystemModel {
        self.index.model
    }

    fn scope_system(&self, scope: &ElementPath) -> Result<Option<usize>, ConformanceError> {
        if scope.is_root() {
            return Ok(None);
        }
        self.index
            .system_at(scope)
            .map(Some)
            .ok_or_else(|| ConformanceError::UnknownScope(scope.to_string()))
    }

    /// System an unknown observed node is attributed to.
    ///
    /// Candidates are systems whose namespace contains the node. The deepest
    /// candidate whose subtree declares one of the node's channels wins (more
    /// shared channels, then document order, break ties). Failing that, the
    /// candidate with the longest explicitly declared namespace owns it.
    pub fn owner_of(&self, node: &RuntimeNode) -> Option<usize> {
        let channels: BTreeSet<&str> = node.edges().map(|(_, c, _)| c).collect();
        let candidates: Vec<usize> = (0..self.index.systems.len())
            .filter(|&s| {
                self.index.systems[s]
                    .namespace
                    .as_deref()
                    .is_some_and(|ns| names::is_under_namespace(&node.fqn, ns))
            })
            .collect();
        let by_channels = candidates
            .iter()
            .map(|&s| {
                let shared = self.subtree_channels[s].iter().filter(|c| channels.contains(c.as_str())).count();
                (s, shared)
            })
            .filter(|&(_, shared)| shared > 0)
            .max_by(|a, b| {
                let depth = |s: usize| self.index.systems[s].path.depth();
                depth(a.0).cmp(&depth(b.0)).then(a.1.cmp(&b.1)).then(b.0.cmp(&a.0))
            });
        if let Some((s, _)) = by_channels {
            return Some(s);
        }
        candidates
            .iter()
            .copied()
            .filter(|&s| self.index.systems[s].explicit_namespace)
            .max_by(|&a, &b| {
                let len = |s: usize| self.index.systems[s].namespace.as_ref().map_or(0, String::len);
                let depth = |s: usize| self.index.systems[s].path.depth();
                len(a).cmp(&len(b)).then(depth(a).cmp(&depth(b))).then(b.cmp(&a))
            })
    }

    /// Restricts the expected graph and the snapshot to one subsystem.
    ///
    /// Observed nodes are kept when the design places them in the scope, or
    /// when they are unknown to the design and attributed to the scope by
    /// [`Self::owner_of`]. Channels declared only outside the scope, and
    /// external channels, are dropped on both sides.
    pub fn scoped(
        &self,
        snapshot: &RuntimeSnapshot,
        scope: &ElementPath,
    ) -> Result<(ExpectedGraph, RuntimeSnapshot), ConformanceError> {
        let system = self.scope_system(scope)?;
        let mut expected = expected_graph_in(&self.index, scope)?;

        let inside: BTreeSet<&str> = match system {
            Some(s) => self.subtree_channels[s].iter().map(String::as_str).collect(),
            None => self.subtree_channels.iter().flatten().map(String::as_str).collect(),
        };
        let mut outside: BTreeSet<&str> = BTreeSet::new();
        for endpoint in &self.index.endpoints {
            let Some(fqn) = endpoint.channel_fqn.as_deref() else { continue };
            let declared_inside = endpoint
                .channel
                .is_some_and(|c| scope.contains(&self.index.systems[self.index.channels[c].system].path));
            if !declared_inside {
                outside.insert(fqn);
            }
        }
        let keep_channel = |fqn: &str| inside.contains(fqn) || !outside.contains(fqn);

        expected.edges.retain(|e| keep_channel(&e.channel_fqn));

        let mut nodes = Vec::new();
        for node in &snapshot.nodes {
            let keep = if expected.nodes.contains(&node.fqn) {
                true
            } else if self.model_nodes.contains(&node.fqn) {
                false
            } else {
                self.owner_of(node)
                    .map_or(scope.is_root(), |owner| scope.contains(&self.index.systems[owner].path))
            };
            if keep {
                let mut node = node.clone();
                for role in crate::model::Role::ALL {
                    node.endpoints_mut(role).retain(|(c, _)| keep_channel(c));
                }
                nodes.push(node);
            }
        }
        Ok((expected, RuntimeSnapshot { captured_at: snapshot.captured_at.clone(), nodes }))
    }

    pub fn verify_subsystem(
        &self,
        snapshot: &RuntimeSnapshot,
        scope: &ElementPath,
        policy: &MatchPolicy,
    ) -> Result<VerificationReport, ConformanceError> {
        let (expected, observed) = self.scoped(snapshot, scope)?;
        let mut findings = diff_graphs(&expected, &observed, policy, Stage::Ssrve);
        findings.extend(unresolved_findings(&expected, Stage::Ssrve));
        Ok(VerificationReport::new(Stage::Ssrve, scope.to_string(), findings))
    }

    pub fn verify_system(&self, snapshot: &RuntimeSnapshot, policy: &MatchPolicy) -> VerificationReport {
        let expected = expected_graph_in(&self.index, &ElementPath::root()).expect("root scope always exists");
        let mut findings = diff_graphs(&expected, snapshot, policy, Stage::Srve);
        findings.extend(unresolved_findings(&expected, Stage::Srve));
        findings.extend(self.design_type_conflicts(policy));
        VerificationReport::new(Stage::Srve, ElementPath::root().to_string(), findings)
    }

    /// Channels that resolve to one name but are declared with different
    /// interface types in different places.
    fn design_type_conflicts(&self, policy: &MatchPolicy) -> Vec<Finding> {
        let mut types: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for endpoint in &self.index.endpoints {
            let (Some(fqn), Some(ty)) = (endpoint.channel_fqn.as_deref(), endpoint.interface_type.as_deref()) else {
                continue;
            };
            if policy.ignores_channel(fqn, self.index.nodes[endpoint.node].fqn.as_deref()) {
                continue;
            }
            let seen = types.entry(fqn).or_default();
            if !seen.contains(&ty) {
                seen.push(ty);
            }
        }
        let mut findings = Vec::new();
        for (fqn, seen) in types {
            for other in &seen[1..] {
                findings.push(
                    Finding::error(Stage::Srve, FindingClass::TypeMismatch, fqn)
                        .expected(seen[0])
                        .observed(*other),
                );
            }
        }
        findings
    }
}

fn unresolved_findings(expected: &ExpectedGraph, stage: Stage) -> Vec<Finding> {
    expected
        .unresolved
        .iter()
        .map(|path| Finding::error(stage, FindingClass::NameViolation, path.to_string()))
        .collect()
}

/// Subsystem verification: compares only what lies inside `scope`.
pub fn verify_subsystem(
    model: &SystemModel,
    snapshot: &RuntimeSnapshot,
    scope: &ElementPath,
    policy: &MatchPolicy,
) -> Result<VerificationReport, ConformanceError> {
    Conformance::new(model).verify_subsystem(snapshot, scope, policy)
}

/// Subsystem verification over several scopes, one report per scope in
/// input order.
pub fn verify_subsystems(
    model: &SystemModel,
    snapshot: &RuntimeSnapshot,
    scopes: &[ElementPath],
    policy: &MatchPolicy,
    execution: Execution,
) -> Result<Vec<VerificationReport>, ConformanceError> {
    let conformance = Conformance::new(model);
    par::map_with(execution, scopes, |scope| conformance.verify_subsystem(snapshot, scope, policy))
        .into_iter()
        .collect()
}

/// Whole-system verification, including inter-subsystem channels and type
/// conflicts inside the design itself.
pub fn verify_system(model: &SystemModel, snapshot: &RuntimeSnapshot, policy: &MatchPolicy) -> VerificationReport {
    Conformance::new(model).verify_system(snapshot, policy)
}

/// Checks that every package sits in its prescribed workspace and repository.
pub fn verify_sources(model: &SystemModel, sources: &SourceSnapshot) -> VerificationReport {
    let prescribed: BTreeMap<&str, PackagePlacement> = model.sources.placements().collect();
    let observed: BTreeMap<&str, PackagePlacement> = sources.layout().placements().collect();
    let mut findings = Vec::new();
    for (package, placement) in &prescribed {
        match observed.get(package) {
            None => findings.push(
                Finding::error(Stage::Sources, FindingClass::MissingPackage, *package).expected(placement.to_string()),
            ),
            Some(actual) if actual != placement => findings.push(
                Finding::error(Stage::Sources, FindingClass::MisplacedArtifact, *package)
                    .expected(placement.to_string())
                    .observed(actual.to_string()),
            ),
            Some(_) => {}
        }
    }
    for (package, placement) in &observed {
        if !prescribed.contains_key(package) {
            findings.push(
                Finding::warning(Stage::Sources, FindingClass::UnexpectedPackage, *package)
                    .observed(placement.to_string()),
            );
        }
    }
    VerificationReport::new(Stage::Sources, ElementPath::root().to_string(), findings)
}
