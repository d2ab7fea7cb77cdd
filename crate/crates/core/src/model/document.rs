//! JSON model documents: strict parsing, structural checks and canonical
//! serialization.

use super::{ElementPath, SystemDef, SystemModel};
use crate::names::NamePattern;
use crate::scenario::{PlanRegistry, ScenarioError};
use crate::snapshot::check_layout_uniqueness;
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("duplicate name `{0}`")]
    DuplicateName(String),
    #[error("`{path}` references unknown `{target}`")]
    DanglingReference { path: String, target: String },
    #[error("invalid element name `{0}`")]
    InvalidIdentifier(String),
    #[error("channel `{path}` has interface type `{interface_type}` inconsistent with its kind")]
    InvalidInterfaceType { path: String, interface_type: String },
    #[error("requirement parent cycle through `{0}`")]
    ParentCycle(String),
    #[error("invalid channel pattern `{0}`")]
    InvalidPattern(String),
    #[error(transparent)]
    Plan(#[from] ScenarioError),
}

/// Parses a model document and checks its structural rules.
///
/// Unknown fields are rejected. Semantic findings (allocation gaps, name
/// grammar, namespace clashes) are left to [`super::validate_model`].
pub fn parse_model(text: &str) -> Result<SystemModel, ModelError> {
    let model: SystemModel = serde_json::from_str(text).map_err(|e| ModelError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    check_structure(&model)?;
    Ok(model)
}

/// Canonical document text: documented key order, 2-space indent, sibling
/// arrays sorted by name or id, trailing newline.
pub fn serialize_model(model: &SystemModel) -> String {
    let canonical = canonicalize(model);
    let mut out = serde_json::to_string_pretty(&canonical).expect("model serializes");
    out.push('\n');
    out
}

/// Copy of `model` with every named sibling array sorted.
pub fn canonicalize(model: &SystemModel) -> SystemModel {
    fn sort_system(system: &mut SystemDef) {
        system.children.sort_by(|a, b| a.name.cmp(&b.name));
        system.nodes.sort_by(|a, b| a.name.cmp(&b.name));
        system.channels.sort_by(|a, b| a.name.cmp(&b.name));
        system.children.iter_mut().for_each(sort_system);
    }
    let mut m = model.clone();
    m.systems.sort_by(|a, b| a.name.cmp(&b.name));
    m.systems.iter_mut().for_each(sort_system);
    m.requirements.sort_by(|a, b| a.id.cmp(&b.id));
    m.hardware.sort_by(|a, b| a.name.cmp(&b.name));
    m.sources.workspaces.sort_by(|a, b| a.name.cmp(&b.name));
    for ws in &mut m.sources.workspaces {
        ws.repositories.sort_by(|a, b| a.name.cmp(&b.name));
    }
    m.plans.sort_by(|a, b| a.id.cmp(&b.id));
    m
}

fn valid_identifier(name: &str) -> bool {
    !name.is_empty() && !name.contains('/') && name.trim() == name
}

fn check_structure(model: &SystemModel) -> Result<(), ModelError> {
    let mut top = BTreeSet::new();
    for system in &model.systems {
        if !top.insert(system.name.as_str()) {
            return Err(ModelError::DuplicateName(system.name.clone()));
        }
    }
    let mut system_paths = BTreeSet::new();
    let mut scopes: Vec<&SystemDef> = Vec::new();
    for system in &model.systems {
        check_system(system, &ElementPath::root(), &mut scopes, &mut system_paths)?;
    }

    check_requirements(model)?;

    let mut hardware = BTreeSet::new();
    for hw in &model.hardware {
        if !valid_identifier(&hw.name) {
            return Err(ModelError::InvalidIdentifier(hw.name.clone()));
        }
        if !hardware.insert(hw.name.as_str()) {
            return Err(ModelError::DuplicateName(hw.name.clone()));
        }
    }
    for hw in &model.hardware {
        for peer in &hw.links {
            if !hardware.contains(peer.as_str()) {
                return Err(ModelError::DanglingReference { path: hw.name.clone(), target: peer.clone() });
            }
        }
    }
    for (system, hw) in &model.hardware_mappings {
        let known = system.parse::<ElementPath>().is_ok_and(|p| system_paths.contains(&p));
        if !known {
            return Err(ModelError::DanglingReference { path: hw.clone(), target: system.clone() });
        }
        if !hardware.contains(hw.as_str()) {
            return Err(ModelError::DanglingReference { path: system.clone(), target: hw.clone() });
        }
    }

    check_layout_uniqueness(&model.sources).map_err(ModelError::DuplicateName)?;

    for pattern in &model.ignore_channels {
        NamePattern::new(pattern.as_str()).map_err(|_| ModelError::InvalidPattern(pattern.clone()))?;
    }

    PlanRegistry::new(&model.plans)?.check_all()?;
    Ok(())
}

fn check_system<'m>(
    system: &'m SystemDef,
    parent: &ElementPath,
    scopes: &mut Vec<&'m SystemDef>,
    system_paths: &mut BTreeSet<ElementPath>,
) -> Result<(), ModelError> {
    if !valid_identifier(&system.name) {
        return Err(ModelError::InvalidIdentifier(system.name.clone()));
    }
    let path = parent.child(&system.name);
    system_paths.insert(path.clone());

    let mut siblings = BTreeSet::new();
    let names = system
        .children
        .iter()
        .map(|c| c.name.as_str())
        .chain(system.nodes.iter().map(|n| n.name.as_str()))
        .chain(system.channels.iter().map(|c| c.name.as_str()));
    for name in names {
        if !siblings.insert(name) {
            return Err(ModelError::DuplicateName(path.child(name).to_string()));
        }
    }

    for channel in &system.channels {
        let channel_path = path.child(&channel.name);
        if !valid_identifier(&channel.name) {
            return Err(ModelError::InvalidIdentifier(channel.name.clone()));
        }
        let segments: Vec<&str> = channel.interface_type.split('/').collect();
        let well_formed = segments.len() == 3
            && segments.iter().all(|s| !s.is_empty())
            && segments[1] == channel.kind.type_category();
        if !well_formed {
            return Err(ModelError::InvalidInterfaceType {
                path: channel_path.to_string(),
                interface_type: channel.interface_type.clone(),
            });
        }
    }

    scopes.push(system);
    for node in &system.nodes {
        let node_path = path.child(&node.name);
        for (role, endpoint) in node.endpoints() {
            if endpoint.external {
                continue;
            }
            let channel = scopes
                .iter()
                .rev()
                .find_map(|s| s.channels.iter().find(|c| c.name == endpoint.channel));
            match channel {
                None => {
                    return Err(ModelError::DanglingReference {
                        path: node_path.to_string(),
                        target: endpoint.channel.clone(),
                    })
                }
                Some(c) if c.kind != role.channel_kind() => {
                    return Err(ModelError::InvalidInterfaceType {
                        path: format!("{node_path} {role} {}", endpoint.channel),
                        interface_type: c.interface_type.clone(),
                    })
                }
                Some(_) => {}
            }
        }
    }
    for child in &system.children {
        check_system(child, &path, scopes, system_paths)?;
    }
    scopes.pop();
    Ok(())
}

fn check_requirements(model: &SystemModel) -> Result<(), ModelError> {
    let mut parents: BTreeMap<&str, Option<&str>> = BTreeMap::new();
    for req in &model.requirements {
        if req.id.trim().is_empty() {
            return Err(ModelError::InvalidIdentifier(req.id.clone()));
        }
        if parents.insert(req.id.as_str(), req.parent.as_deref()).is_some() {
            return Err(ModelError::DuplicateName(req.id.clone()));
        }
    }
    for req in &model.requirements {
        if let Some(parent) = &req.parent {
            if !parents.contains_key(parent.as_str()) {
                return Err(ModelError::DanglingReference { path: req.id.clone(), target: parent.clone() });
            }
        }
        let mut seen = BTreeSet::new();
        let mut current = Some(req.id.as_str());
        while let Some(id) = current {
            if !seen.insert(id) {
                return Err(ModelError::ParentCycle(req.id.clone()));
            }
            current = parents.get(id).copied().flatten();
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const VISION: &str = r#"{
      "model_name": "vision",
      "systems": [{
        "name": "Vision System",
        "namespace": "/magician1",
        "channels": [{"name": "Vision System ROS Topics", "kind": "topic",
                      "channel_name": "camera/color/image_raw", "interface_type": "sensor_msgs/msg/Image"}],
        "nodes": [
          {"name": "realsense2_camera_node", "publishes": [{"channel": "Vision System ROS Topics"}]},
          {"name": "aruco_node", "subscribes": [{"channel": "Vision System ROS Topics"}],
           "parameters": [["marker_size", "aruco_parameters.yaml"]]},
          {"name": "scene_analyser_node", "subscribes": [{"channel": "Vision System ROS Topics"}]}
        ]
      }]
    }"#;

    #[test]
    fn vision_system_counts() {
        let m = parse_model(VISION).unwrap();
        assert_eq!(m.systems.len(), 1);
        assert_eq!(m.systems[0].nodes.len(), 3);
        assert_eq!(m.systems[0].channels.len(), 1);
    }

    #[test]
    fn empty_model() {
        let m = parse_model(r#"{"model_name": "empty"}"#).unwrap();
        assert!(m.systems.is_empty());
        assert!(m.requirements.is_empty());
        assert_eq!(parse_model(&serialize_model(&m)).unwrap(), m);
    }

    #[test]
    fn dangling_channel() {
        let text = r#"{"model_name":"m","systems":[{"name":"S","nodes":[{"name":"x","publishes":[{"channel":"missing"}]}]}]}"#;
        assert_eq!(
            parse_model(text),
            Err(ModelError::DanglingReference { path: "S/x".into(), target: "missing".into() })
        );
    }

    #[test]
    fn external_endpoint_needs_no_declaration() {
        let text = r#"{"model_name":"m","systems":[{"name":"S","nodes":[{"name":"x","subscribes":[{"channel":"/tf","external":true}]}]}]}"#;
        assert!(parse_model(text).is_ok());
    }

    #[test]
    fn unknown_field_rejected() {
        let text = r#"{"model_name":"m","systems":[{"name":"S","colour":"red"}]}"#;
        match parse_model(text) {
            Err(ModelError::Syntax { line, column, .. }) => assert!(line == 1 && column > 0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn duplicate_siblings() {
        let text = r#"{"model_name":"m","systems":[{"name":"S","children":[{"name":"A"}],"nodes":[{"name":"A"}]}]}"#;
        assert_eq!(parse_model(text), Err(ModelError::DuplicateName("S/A".into())));
        let text = r#"{"model_name":"m","requirements":[{"id":"R1"},{"id":"R1"}]}"#;
        assert_eq!(parse_model(text), Err(ModelError::DuplicateName("R1".into())));
    }

    #[test]
    fn action_type_category_checked() {
        let text = r#"{"model_name":"m","systems":[{"name":"S","channels":[{"name":"c","kind":"action",
            "channel_name":"move","interface_type":"pkg/msg/Move"}]}]}"#;
        assert!(matches!(parse_model(text), Err(ModelError::InvalidInterfaceType { .. })));
    }

    #[test]
    fn requirement_parent_rules() {
        let text = r#"{"model_name":"m","requirements":[{"id":"R1","parent":"R9"}]}"#;
        assert!(matches!(parse_model(text), Err(ModelError::DanglingReference { .. })));
        let text = r#"{"model_name":"m","requirements":[{"id":"R1","parent":"R2"},{"id":"R2","parent":"R1"}]}"#;
        assert!(matches!(parse_model(text), Err(ModelError::ParentCycle(_))));
    }

    #[test]
    fn hardware_references() {
        let text = r#"{"model_name":"m","hardware":[{"name":"pc","links":["router"]}]}"#;
        assert!(matches!(parse_model(text), Err(ModelError::DanglingReference { .. })));
        let text = r#"{"model_name":"m","systems":[{"name":"S"}],"hardware":[{"name":"pc"}],
            "hardware_mappings":[["S","pc"],["T","pc"]]}"#;
        assert!(matches!(parse_model(text), Err(ModelError::DanglingReference { .. })));
    }

    #[test]
    fn plan_shape_enforced() {
        let text = r#"{"model_name":"m","plans":[{"id":"p","stage":"system","scope":"/"}]}"#;
        assert_eq!(parse_model(text), Err(ModelError::Plan(ScenarioError::EmptyPlan("p".into()))));
    }

    #[test]
    fn serialization_is_canonical() {
        let m = parse_model(VISION).unwrap();
        let text = serialize_model(&m);
        let reparsed = parse_model(&text).unwrap();
        assert_eq!(reparsed, canonicalize(&m));
        assert_eq!(serialize_model(&reparsed), text);
        let model_name = text.find("\"model_name\"").unwrap();
        let systems = text.find("\"systems\"").unwrap();
        let plans = text.find("\"plans\"").unwrap();
        assert!(model_name < systems && systems < plans);
        assert!(text.contains("\n  \"systems\""));
    }
}
