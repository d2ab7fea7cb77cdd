use super::ConformanceError;
use crate::model::{ElementPath, ModelIndex, Role, SystemModel};
use crate::snapshot::{RuntimeNode, RuntimeSnapshot};
use std::collections::BTreeSet;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub node_fqn: String,
    pub channel_fqn: String,
    pub role: Role,
    /// Interface type from the channel declaration; `None` for external
    /// endpoints, whose type the design does not fix.
    pub interface_type: Option<String>,
    pub external: bool,
}

/// Design-side computation graph for one scope.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ExpectedGraph {
    pub nodes: BTreeSet<String>,
    pub edges: BTreeSet<Edge>,
    pub scope: ElementPath,
    /// Nodes under the scope whose names could not be resolved.
    pub unresolved: Vec<ElementPath>,
}

impl ExpectedGraph {
    /// A runtime snapshot that realises this graph exactly.
    pub fn to_snapshot(&self, captured_at: &str) -> RuntimeSnapshot {
        let mut nodes: Vec<RuntimeNode> = self.nodes.iter().map(RuntimeNode::new).collect();
        for edge in &self.edges {
            if let Ok(i) = nodes.binary_search_by(|n| n.fqn.as_str().cmp(&edge.node_fqn)) {
                let ty = edge.interface_type.clone().unwrap_or_default();
                nodes[i].endpoints_mut(edge.role).push((edge.channel_fqn.clone(), ty));
            }
        }
        RuntimeSnapshot { captured_at: captured_at.to_string(), nodes }
    }
}

/// Expected graph of every node under `scope`, with names resolved through
/// the namespace chain and channel types copied from their declarations.
pub fn expected_graph(model: &SystemModel, scope: &ElementPath) -> Result<ExpectedGraph, ConformanceError> {
    expected_graph_in(&ModelIndex::new(model), scope)
}

pub(crate) fn expected_graph_in(index: &ModelIndex<'_>, scope: &ElementPath) -> Result<ExpectedGraph, ConformanceError> {
    if !scope.is_root() && index.system_at(scope).is_none() {
        return Err(ConformanceError::UnknownScope(scope.to_string()));
    }
    let mut graph = ExpectedGraph { scope: scope.clone(), ..Default::default() };
    for node in index.nodes.iter().filter(|n| scope.contains(&n.path)) {
        match &node.fqn {
            Some(fqn) => {
                graph.nodes.insert(fqn.clone());
            }
            None => graph.unresolved.push(node.path.clone()),
        }
    }
    let mut keys = BTreeSet::new();
    for endpoint in &index.endpoints {
        let node = &index.nodes[endpoint.node];
        if !scope.contains(&node.path) {
            continue;
        }
        if let (Some(node_fqn), Some(channel_fqn)) = (&node.fqn, &endpoint.channel_fqn) {
            if keys.insert((node_fqn, channel_fqn, endpoint.role)) {
                graph.edges.insert(Edge {
                    node_fqn: node_fqn.clone(),
                    channel_fqn: channel_fqn.clone(),
                    role: endpoint.role,
                    interface_type: endpoint.interface_type.clone(),
                    external: endpoint.external,
                });
            }
        }
    }
    Ok(graph)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_model;

    const TWO: &str = r#"{"model_name":"m","systems":[
      {"name":"A","namespace":"/magician1","children":[{"name":"Vision System",
        "channels":[{"name":"img","kind":"topic","channel_name":"image","interface_type":"sensor_msgs/msg/Image"}],
        "nodes":[{"name":"cam","publishes":[{"channel":"img"}]},{"name":"aruco","subscribes":[{"channel":"img"}]},
                 {"name":"scene","subscribes":[{"channel":"img"}]}]},
        {"name":"Empty"}]},
      {"name":"B","nodes":[{"name":"solo"}]}]}"#;

    #[test]
    fn scoped_nodes_prefixed_by_namespace() {
        let m = parse_model(TWO).unwrap();
        let g = expected_graph(&m, &"A/Vision System".parse().unwrap()).unwrap();
        assert_eq!(g.nodes.len(), 3);
        assert!(g.nodes.iter().all(|n| n.starts_with("/magician1/")));
        assert_eq!(g.edges.len(), 3);
    }

    #[test]
    fn empty_scope_and_root() {
        let m = parse_model(TWO).unwrap();
        let g = expected_graph(&m, &"A/Empty".parse().unwrap()).unwrap();
        assert!(g.nodes.is_empty() && g.edges.is_empty());
        let g = expected_graph(&m, &ElementPath::root()).unwrap();
        assert_eq!(g.nodes.len(), 4);
        assert!(g.nodes.contains("/solo"));
    }

    #[test]
    fn unknown_scope() {
        let m = parse_model(TWO).unwrap();
        assert_eq!(
            expected_graph(&m, &"Nope".parse().unwrap()),
            Err(ConformanceError::UnknownScope("Nope".into()))
        );
        assert!(expected_graph(&m, &"A/Vision System/cam".parse().unwrap()).is_err());
    }
}
