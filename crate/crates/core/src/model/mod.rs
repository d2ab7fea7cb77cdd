//! Design-model types: the subset of the MeROS metamodel needed to describe a
//! ROS 2 system, its requirements, hardware and source containers.

mod document;
mod index;
mod path;
mod validate;

pub use document::{canonicalize, parse_model, serialize_model, ModelError};
pub use index::{ChannelEntry, Element, ModelIndex, NodeEntry, ResolvedEndpoint, SystemEntry};
pub use path::{ElementPath, PathError};
pub use validate::validate_model;

use crate::scenario::ValidationPlan;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemModel {
    #[serde(rename = "model_name")]
    pub name: String,
    #[serde(default)]
    pub systems: Vec<SystemDef>,
    #[serde(default)]
    pub requirements: Vec<RequirementDef>,
    #[serde(default)]
    pub hardware: Vec<HardwareDef>,
    /// `(system path, hardware name)` pairs.
    #[serde(default)]
    pub hardware_mappings: Vec<(String, String)>,
    #[serde(default)]
    pub sources: SourceLayout,
    /// Infrastructure channel patterns never declared by the design.
    #[serde(default)]
    pub ignore_channels: Vec<String>,
    #[serde(default)]
    pub plans: Vec<ValidationPlan>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemDef {
    pub name: String,
    /// Absolute namespace, or empty to inherit the parent's.
    #[serde(default)]
    pub namespace: String,
    #[serde(default)]
    pub children: Vec<SystemDef>,
    #[serde(default)]
    pub nodes: Vec<NodeDef>,
    #[serde(default)]
    pub channels: Vec<CommChannelDef>,
    #[serde(default)]
    pub allocated_requirements: Vec<String>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    #[default]
    Node,
    MicroNode,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeDef {
    pub name: String,
    #[serde(default)]
    pub kind: NodeKind,
    #[serde(default)]
    pub package: String,
    #[serde(default)]
    pub publishes: Vec<EndpointDef>,
    #[serde(default)]
    pub subscribes: Vec<EndpointDef>,
    #[serde(default)]
    pub serves: Vec<EndpointDef>,
    #[serde(default)]
    pub calls: Vec<EndpointDef>,
    #[serde(default)]
    pub action_servers: Vec<EndpointDef>,
    #[serde(default)]
    pub action_clients: Vec<EndpointDef>,
    /// `(parameter name, source file)` pairs.
    #[serde(default)]
    pub parameters: Vec<(String, String)>,
}

impl NodeDef {
    /// Endpoint lists paired with the graph role they produce.
    pub fn endpoints(&self) -> impl Iterator<Item = (Role, &EndpointDef)> {
        [
            (Role::Pub, &self.publishes),
            (Role::Sub, &self.subscribes),
            (Role::Srv, &self.serves),
            (Role::Cli, &self.calls),
            (Role::ActSrv, &self.action_servers),
            (Role::ActCli, &self.action_clients),
        ]
        .into_iter()
        .flat_map(|(role, list)| list.iter().map(move |e| (role, e)))
    }
}

/// Role of a node on a channel in the computation graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Pub,
    Sub,
    Srv,
    Cli,
    ActSrv,
    ActCli,
}

impl Role {
    pub const ALL: [Role; 6] = [Role::Pub, Role::Sub, Role::Srv, Role::Cli, Role::ActSrv, Role::ActCli];

    pub fn as_str(self) -> &'static str {
        match self {
            Role::Pub => "pub",
            Role::Sub => "sub",
            Role::Srv => "srv",
            Role::Cli => "cli",
            Role::ActSrv => "act_srv",
            Role::ActCli => "act_cli",
        }
    }

    pub fn channel_kind(self) -> ChannelKind {
        match self {
            Role::Pub | Role::Sub => ChannelKind::Topic,
            Role::Srv | Role::Cli => ChannelKind::Service,
            Role::ActSrv | Role::ActCli => ChannelKind::Action,
        }
    }
}

impl std::fmt::Display for Role {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelKind {
    Topic,
    Service,
    Action,
}

impl ChannelKind {
    /// Middle segment expected in `pkg/<category>/Type`.
    pub fn type_category(self) -> &'static str {
        match self {
            ChannelKind::Topic => "msg",
            ChannelKind::Service => "srv",
            ChannelKind::Action => "action",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommChannelDef {
    pub name: String,
    pub kind: ChannelKind,
    pub channel_name: String,
    pub interface_type: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EndpointDef {
    /// Channel identifier, or a ROS name when `external`.
    pub channel: String,
    #[serde(default)]
    pub external: bool,
}

impl EndpointDef {
    pub fn to(channel: impl Into<String>) -> Self {
        EndpointDef { channel: channel.into(), external: false }
    }

    pub fn external(name: impl Into<String>) -> Self {
        EndpointDef { channel: name.into(), external: true }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RequirementDef {
    pub id: String,
    #[serde(default)]
    pub text: String,
    #[serde(default)]
    pub parent: Option<String>,
    /// Canonical element paths of the elements responsible for the requirement.
    #[serde(default)]
    pub allocations: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HardwareDef {
    pub name: String,
    #[serde(default)]
    pub links: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceLayout {
    #[serde(default)]
    pub workspaces: Vec<WorkspaceDef>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkspaceDef {
    pub name: String,
    #[serde(default)]
    pub repositories: Vec<RepositoryDef>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepositoryDef {
    pub name: String,
    #[serde(default)]
    pub packages: Vec<String>,
}

/// Location of a package inside a source layout.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PackagePlacement {
    pub workspace: String,
    pub repository: String,
}

impl std::fmt::Display for PackagePlacement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.workspace, self.repository)
    }
}

impl SourceLayout {
    /// Every `(package, placement)` pair in layout order.
    pub fn placements(&self) -> impl Iterator<Item = (&str, PackagePlacement)> {
        self.workspaces.iter().flat_map(|ws| {
            ws.repositories.iter().flat_map(move |repo| {
                repo.packages.iter().map(move |pkg| {
                    (
                        pkg.as_str(),
                        PackagePlacement { workspace: ws.name.clone(), repository: repo.name.clone() },
                    )
                })
            })
        })
    }

    pub fn package_count(&self) -> usize {
        self.placements().count()
    }
}

impl SystemModel {
    /// Symmetric hardware adjacency: every declared link in both directions.
    pub fn hardware_adjacency(&self) -> std::collections::BTreeMap<&str, std::collections::BTreeSet<&str>> {
        let mut adjacency: std::collections::BTreeMap<&str, std::collections::BTreeSet<&str>> =
            self.hardware.iter().map(|h| (h.name.as_str(), Default::default())).collect();
        for hw in &self.hardware {
            for peer in &hw.links {
                adjacency.entry(hw.name.as_str()).or_default().insert(peer.as_str());
                adjacency.entry(peer.as_str()).or_default().insert(hw.name.as_str());
            }
        }
        adjacency
    }

    pub fn requirement(&self, id: &str) -> Option<&RequirementDef> {
        self.requirements.iter().find(|r| r.id == id)
    }

    pub fn plan(&self, id: &str) -> Option<&ValidationPlan> {
        self.plans.iter().find(|p| p.id == id)
    }
}
