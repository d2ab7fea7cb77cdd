//! Observed-system snapshots: the runtime computation graph, the source tree
//! and recorded event traces.

use crate::model::{Role, SourceLayout};
use crate::names::{self, NameError};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SnapshotError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("name violation: {0}")]
    NameViolation(#[from] NameError),
    #[error("duplicate name `{0}`")]
    DuplicateName(String),
    #[error("trace seq {seq} on line {line} does not follow {previous}")]
    NonMonotonicSeq { line: usize, seq: u64, previous: u64 },
}

impl SnapshotError {
    fn syntax(err: serde_json::Error, line_offset: usize) -> Self {
        SnapshotError::Syntax {
            line: err.line() + line_offset,
            column: err.column(),
            message: err.to_string(),
        }
    }
}

pub type Endpoint = (String, String);

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuntimeNode {
    pub fqn: String,
    #[serde(default)]
    pub publishers: Vec<Endpoint>,
    #[serde(default)]
    pub subscribers: Vec<Endpoint>,
    #[serde(default)]
    pub services: Vec<Endpoint>,
    #[serde(default)]
    pub clients: Vec<Endpoint>,
    #[serde(default)]
    pub action_servers: Vec<Endpoint>,
    #[serde(default)]
    pub action_clients: Vec<Endpoint>,
    #[serde(default)]
    pub parameters: Vec<String>,
}

impl RuntimeNode {
    pub fn new(fqn: impl Into<String>) -> Self {
        RuntimeNode { fqn: fqn.into(), ..Default::default() }
    }

    pub fn endpoints(&self, role: Role) -> &Vec<Endpoint> {
        match role {
            Role::Pub => &self.publishers,
            Role::Sub => &self.subscribers,
            Role::Srv => &self.services,
            Role::Cli => &self.clients,
            Role::ActSrv => &self.action_servers,
            Role::ActCli => &self.action_clients,
        }
    }

    pub fn endpoints_mut(&mut self, role: Role) -> &mut Vec<Endpoint> {
        match role {
            Role::Pub => &mut self.publishers,
            Role::Sub => &mut self.subscribers,
            Role::Srv => &mut self.services,
            Role::Cli => &mut self.clients,
            Role::ActSrv => &mut self.action_servers,
            Role::ActCli => &mut self.action_clients,
        }
    }

    /// All `(role, channel, type)` triples of this node.
    pub fn edges(&self) -> impl Iterator<Item = (Role, &str, &str)> {
        Role::ALL
            .into_iter()
            .flat_map(move |role| self.endpoints(role).iter().map(move |(c, t)| (role, c.as_str(), t.as_str())))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuntimeSnapshot {
    #[serde(default)]
    pub captured_at: String,
    #[serde(default)]
    pub nodes: Vec<RuntimeNode>,
}

impl RuntimeSnapshot {
    pub fn node(&self, fqn: &str) -> Option<&RuntimeNode> {
        self.nodes.iter().find(|n| n.fqn == fqn)
    }

    pub fn node_mut(&mut self, fqn: &str) -> Option<&mut RuntimeNode> {
        self.nodes.iter_mut().find(|n| n.fqn == fqn)
    }

    /// Resolves every name to its absolute form and enforces uniqueness.
    pub fn normalize(mut self) -> Result<Self, SnapshotError> {
        let mut seen = BTreeSet::new();
        for node in &mut self.nodes {
            let fqn = match names::classify(&node.fqn)? {
                (names::NameKind::Absolute, body) => format!("/{body}"),
                _ => return Err(NameError::NameViolation(node.fqn.clone()).into()),
            };
            if !seen.insert(fqn.clone()) {
                return Err(SnapshotError::DuplicateName(fqn));
            }
            let namespace = names::parent_namespace(&fqn).to_string();
            for role in Role::ALL {
                let mut channels = BTreeSet::new();
                for (channel, _) in node.endpoints_mut(role).iter_mut() {
                    *channel = names::resolve_name(channel, &namespace, Some(&fqn))?;
                    if !channels.insert(channel.clone()) {
                        return Err(SnapshotError::DuplicateName(format!("{fqn} {role} {channel}")));
                    }
                }
            }
            node.fqn = fqn;
        }
        Ok(self)
    }
}

pub fn parse_runtime_snapshot(text: &str) -> Result<RuntimeSnapshot, SnapshotError> {
    let raw: RuntimeSnapshot = serde_json::from_str(text).map_err(|e| SnapshotError::syntax(e, 0))?;
    raw.normalize()
}

pub fn serialize_runtime_snapshot(snapshot: &RuntimeSnapshot) -> String {
    let mut out = serde_json::to_string_pretty(snapshot).expect("snapshot serializes");
    out.push('\n');
    out
}

/// Observed workspace / repository / package layout.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SourceSnapshot(pub SourceLayout);

impl SourceSnapshot {
    pub fn layout(&self) -> &SourceLayout {
        &self.0
    }
}

/// Checks that workspace, repository and package names are each unique.
pub fn check_layout_uniqueness(layout: &SourceLayout) -> Result<(), String> {
    let mut workspaces = BTreeSet::new();
    let mut repositories = BTreeSet::new();
    let mut packages = BTreeSet::new();
    for ws in &layout.workspaces {
        if !workspaces.insert(ws.name.as_str()) {
            return Err(ws.name.clone());
        }
        for repo in &ws.repositories {
            if !repositories.insert(repo.name.as_str()) {
                return Err(format!("{}/{}", ws.name, repo.name));
            }
            for pkg in &repo.packages {
                if !packages.insert(pkg.as_str()) {
                    return Err(pkg.clone());
                }
            }
        }
    }
    Ok(())
}

pub fn parse_source_snapshot(text: &str) -> Result<SourceSnapshot, SnapshotError> {
    let snapshot: SourceSnapshot = serde_json::from_str(text).map_err(|e| SnapshotError::syntax(e, 0))?;
    check_layout_uniqueness(&snapshot.0).map_err(SnapshotError::DuplicateName)?;
    Ok(snapshot)
}

pub fn serialize_source_snapshot(snapshot: &SourceSnapshot) -> String {
    let mut out = serde_json::to_string_pretty(snapshot).expect("snapshot serializes");
    out.push('\n');
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceEvent {
    pub seq: u64,
    pub channel_fqn: String,
    pub actor: String,
    pub label: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EventTrace {
    pub events: Vec<TraceEvent>,
}

impl EventTrace {
    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Builds a trace from `(actor, label, channel)` triples, numbering seq from 1.
    pub fn from_events<'a>(events: impl IntoIterator<Item = (&'a str, &'a str, &'a str)>) -> Self {
        EventTrace {
            events: events
                .into_iter()
                .enumerate()
                .map(|(i, (actor, label, channel))| TraceEvent {
                    seq: i as u64 + 1,
                    channel_fqn: channel.to_string(),
                    actor: actor.to_string(),
                    label: label.to_string(),
                })
                .collect(),
        }
    }
}

/// Parses a JSON-lines trace. Blank lines are skipped; `seq` must be
/// strictly increasing and channel names absolute.
pub fn parse_trace(text: &str) -> Result<EventTrace, SnapshotError> {
    let mut events: Vec<TraceEvent> = Vec::new();
    for (index, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut event: TraceEvent = serde_json::from_str(line).map_err(|e| SnapshotError::syntax(e, index))?;
        event.channel_fqn = match names::classify(&event.channel_fqn)? {
            (names::NameKind::Absolute, body) => format!("/{body}"),
            _ => return Err(NameError::NameViolation(event.channel_fqn).into()),
        };
        if let Some(previous) = events.last() {
            if event.seq <= previous.seq {
                return Err(SnapshotError::NonMonotonicSeq { line: index + 1, seq: event.seq, previous: previous.seq });
            }
        }
        events.push(event);
    }
    Ok(EventTrace { events })
}

pub fn serialize_trace(trace: &EventTrace) -> String {
    trace
        .events
        .iter()
        .map(|e| serde_json::to_string(e).expect("event serializes") + "\n")
        .collect()
}
