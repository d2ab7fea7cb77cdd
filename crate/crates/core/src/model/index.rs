//! Flattened, name-resolved view of a model: element paths, namespaces,
//! node fqns and resolved endpoints.

use super::{CommChannelDef, ElementPath, NodeDef, Role, SystemDef, SystemModel};
use crate::names;
use std::collections::BTreeMap;

#[derive(Debug, Clone)]
pub struct SystemEntry<'m> {
    pub path: ElementPath,
    pub def: &'m SystemDef,
    pub parent: Option<usize>,
    /// Effective namespace; `None` when the system or an ancestor declares
    /// an invalid one.
    pub namespace: Option<String>,
    /// The system declares its own namespace rather than inheriting one.
    pub explicit_namespace: bool,
}

#[derive(Debug, Clone)]
pub struct NodeEntry<'m> {
    pub path: ElementPath,
    pub def: &'m NodeDef,
    pub system: usize,
    /// `None` when the node name or its namespace is invalid.
    pub fqn: Option<String>,
}

#[derive(Debug, Clone)]
pub struct ChannelEntry<'m> {
    pub path: ElementPath,
    pub def: &'m CommChannelDef,
    pub system: usize,
}

/// An endpoint with its channel resolved against the model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResolvedEndpoint {
    pub node: usize,
    pub role: Role,
    /// Index of the referenced channel declaration; `None` for external endpoints.
    pub channel: Option<usize>,
    pub channel_fqn: Option<String>,
    pub interface_type: Option<String>,
    pub external: bool,
}

/// A model element, for use with [`ModelIndex::path_of`].
#[derive(Debug, Clone, Copy)]
pub enum Element<'m> {
    System(&'m SystemDef),
    Node(&'m NodeDef),
    Channel(&'m CommChannelDef),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Slot {
    System(usize),
    Node(usize),
    Channel(usize),
}

#[derive(Debug, Clone)]
pub struct ModelIndex<'m> {
    pub model: &'m SystemModel,
    /// Systems in document pre-order.
    pub systems: Vec<SystemEntry<'m>>,
    pub nodes: Vec<NodeEntry<'m>>,
    pub channels: Vec<ChannelEntry<'m>>,
    pub endpoints: Vec<ResolvedEndpoint>,
    by_path: BTreeMap<ElementPath, Slot>,
}

impl<'m> ModelIndex<'m> {
    pub fn new(model: &'m SystemModel) -> Self {
        let mut index = ModelIndex {
            model,
            systems: Vec::new(),
            nodes: Vec::new(),
            channels: Vec::new(),
            endpoints: Vec::new(),
            by_path: BTreeMap::new(),
        };
        for system in &model.systems {
            index.add_system(system, None, &ElementPath::root(), Some("/".to_string()));
        }
        index.resolve_endpoints();
        index
    }

    fn add_system(&mut self, def: &'m SystemDef, parent: Option<usize>, parent_path: &ElementPath, inherited: Option<String>) {
        let path = parent_path.child(&def.name);
        let explicit = !def.namespace.is_empty();
        let namespace = if explicit {
            names::normalize_namespace(&def.namespace).ok()
        } else {
            inherited
        };
        let id = self.systems.len();
        self.by_path.entry(path.clone()).or_insert(Slot::System(id));
        self.systems.push(SystemEntry {
            path: path.clone(),
            def,
            parent,
            namespace: namespace.clone(),
            explicit_namespace: explicit,
        });
        for node in &def.nodes {
            let node_path = path.child(&node.name);
            let fqn = match (&namespace, names::classify(&node.name)) {
                (Some(ns), Ok((names::NameKind::Relative, body))) if !body.contains('/') => {
                    names::resolve_name(&node.name, ns, None).ok()
                }
                _ => None,
            };
            self.by_path.entry(node_path.clone()).or_insert(Slot::Node(self.nodes.len()));
            self.nodes.push(NodeEntry { path: node_path, def: node, system: id, fqn });
        }
        for channel in &def.channels {
            let channel_path = path.child(&channel.name);
            self.by_path.entry(channel_path.clone()).or_insert(Slot::Channel(self.channels.len()));
            self.channels.push(ChannelEntry { path: channel_path, def: channel, system: id });
        }
        for child in &def.children {
            self.add_system(child, Some(id), &path, namespace.clone());
        }
    }

    fn resolve_endpoints(&mut self) {
        let mut endpoints = Vec::new();
        for (node_id, node) in self.nodes.iter().enumerate() {
            for (role, endpoint) in node.def.endpoints() {
                let resolved = if endpoint.external {
                    let fqn = match (&self.systems[node.system].namespace, &node.fqn) {
                        (Some(ns), fqn) => names::resolve_name(&endpoint.channel, ns, fqn.as_deref()).ok(),
                        _ => None,
                    };
                    ResolvedEndpoint {
                        node: node_id,
                        role,
                        channel: None,
                        channel_fqn: fqn,
                        interface_type: None,
                        external: true,
                    }
                } else {
                    let channel = self.lookup_channel(node.system, &endpoint.channel);
                    let (fqn, interface_type) = match channel {
                        Some(c) => {
                            let entry = &self.channels[c];
                            let fqn = self.systems[entry.system].namespace.as_ref().and_then(|ns| {
                                names::resolve_name(&entry.def.channel_name, ns, node.fqn.as_deref()).ok()
                            });
                            (fqn, Some(entry.def.interface_type.clone()))
                        }
                        None => (None, None),
                    };
                    ResolvedEndpoint { node: node_id, role, channel, channel_fqn: fqn, interface_type, external: false }
                };
                endpoints.push(resolved);
            }
        }
        self.endpoints = endpoints;
    }

    /// Nearest enclosing declaration of channel `name`, starting at `system`.
    fn lookup_channel(&self, system: usize, name: &str) -> Option<usize> {
        let mut current = Some(system);
        while let Some(s) = current {
            if let Some(c) = self.channels.iter().position(|c| c.system == s && c.def.name == name) {
                return Some(c);
            }
            current = self.systems[s].parent;
        }
        None
    }

    /// Canonical path of an element owned by this model.
    pub fn path_of(&self, element: Element<'_>) -> Option<&ElementPath> {
        match element {
            Element::System(def) => self.systems.iter().find(|e| std::ptr::eq(e.def, def)).map(|e| &e.path),
            Element::Node(def) => self.nodes.iter().find(|e| std::ptr::eq(e.def, def)).map(|e| &e.path),
            Element::Channel(def) => self.channels.iter().find(|e| std::ptr::eq(e.def, def)).map(|e| &e.path),
        }
    }

    pub fn contains_path(&self, path: &ElementPath) -> bool {
        path.is_root() || self.by_path.contains_key(path)
    }

    pub fn system_at(&self, path: &ElementPath) -> Option<usize> {
        match self.by_path.get(path) {
            Some(Slot::System(id)) => Some(*id),
            _ => None,
        }
    }

    pub fn node_at(&self, path: &ElementPath) -> Option<usize> {
        match self.by_path.get(path) {
            Some(Slot::Node(id)) => Some(*id),
            _ => None,
        }
    }

    pub fn channel_at(&self, path: &ElementPath) -> Option<usize> {
        match self.by_path.get(path) {
            Some(Slot::Channel(id)) => Some(*id),
            _ => None,
        }
    }

    /// Every element path in the model (systems, nodes, channels).
    pub fn all_paths(&self) -> impl Iterator<Item = &ElementPath> {
        self.systems
            .iter()
            .map(|s| &s.path)
            .chain(self.nodes.iter().map(|n| &n.path))
            .chain(self.channels.iter().map(|c| &c.path))
    }

    /// Resolved namespace of the system at `scope`; the root maps to `/`.
    pub fn scope_namespace(&self, scope: &ElementPath) -> Option<String> {
        if scope.is_root() {
            return Some("/".to_string());
        }
        self.system_at(scope).and_then(|s| self.systems[s].namespace.clone())
    }

    pub fn node_by_fqn(&self, fqn: &str) -> Option<&NodeEntry<'m>> {
        self.nodes.iter().find(|n| n.fqn.as_deref() == Some(fqn))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_model;

    const NESTED: &str = r#"{
      "model_name": "m",
      "systems": [
        {"name": "Unloading manipulator", "namespace": "/magician1",
         "channels": [{"name": "Marker Poses", "kind": "topic", "channel_name": "aruco_poses",
                       "interface_type": "geometry_msgs/msg/PoseArray"}],
         "children": [{"name": "Vision System",
           "channels": [{"name": "Vision System ROS Topics", "kind": "topic",
                         "channel_name": "camera/color/image_raw", "interface_type": "sensor_msgs/msg/Image"}],
           "nodes": [{"name": "aruco_node", "subscribes": [{"channel": "Vision System ROS Topics"}],
                      "publishes": [{"channel": "Marker Poses"}, {"channel": "~status", "external": true}]}]}]},
        {"name": "Obstacles", "namespace": "/board"}
      ]
    }"#;

    #[test]
    fn paths_follow_hierarchy() {
        let m = parse_model(NESTED).unwrap();
        let idx = ModelIndex::new(&m);
        let vision = &m.systems[0].children[0];
        assert_eq!(
            idx.path_of(Element::Node(&vision.nodes[0])).unwrap().to_string(),
            "Unloading manipulator/Vision System/aruco_node"
        );
        assert_eq!(
            idx.path_of(Element::Channel(&vision.channels[0])).unwrap().to_string(),
            "Unloading manipulator/Vision System/Vision System ROS Topics"
        );
        assert_eq!(idx.path_of(Element::System(&m.systems[1])).unwrap().to_string(), "Obstacles");
    }

    #[test]
    fn namespaces_and_endpoints_resolve() {
        let m = parse_model(NESTED).unwrap();
        let idx = ModelIndex::new(&m);
        assert_eq!(idx.nodes[0].fqn.as_deref(), Some("/magician1/aruco_node"));
        let fqns: Vec<_> = idx.endpoints.iter().map(|e| e.channel_fqn.clone().unwrap()).collect();
        assert_eq!(
            fqns,
            ["/magician1/aruco_poses", "/magician1/aruco_node/status", "/magician1/camera/color/image_raw"]
        );
        assert!(idx.endpoints[1].external);
        assert_eq!(idx.endpoints[1].interface_type, None);
    }
}
