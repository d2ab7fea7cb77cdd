use crate::finding::{Severity, Stage};
use crate::model::SystemModel;
use crate::names::{NameError, NamePattern};

/// Channels the middleware creates on its own and a design never declares.
pub const INFRASTRUCTURE_CHANNELS: &[&str] = &[
    "/parameter_events",
    "/rosout",
    "~/describe_parameters",
    "~/get_parameter_types",
    "~/get_parameters",
    "~/get_type_description",
    "~/list_parameters",
    "~/set_parameters",
    "~/set_parameters_atomically",
];

/// Controls which observed names take part in a comparison and how
/// unexpected nodes are graded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchPolicy {
    pub ignore_channels: Vec<NamePattern>,
    pub ignore_nodes: Vec<NamePattern>,
    /// Severity of `UnexpectedNode`; `None` uses the stage default
    /// (warning for ssrve, error otherwise).
    pub treat_unexpected_as: Option<Severity>,
}

impl Default for MatchPolicy {
    fn default() -> Self {
        MatchPolicy {
            ignore_channels: INFRASTRUCTURE_CHANNELS
                .iter()
                .map(|p| NamePattern::new(*p).expect("built-in pattern"))
                .collect(),
            ignore_nodes: Vec::new(),
            treat_unexpected_as: None,
        }
    }
}

impl MatchPolicy {
    /// A policy that ignores nothing.
    pub fn strict() -> Self {
        MatchPolicy { ignore_channels: Vec::new(), ignore_nodes: Vec::new(), treat_unexpected_as: None }
    }

    /// Default policy extended with the model's own ignore list.
    pub fn for_model(model: &SystemModel) -> Result<Self, NameError> {
        let mut policy = MatchPolicy::default();
        policy.extend_channels(model.ignore_channels.iter().map(String::as_str))?;
        Ok(policy)
    }

    pub fn extend_channels<'a>(&mut self, patterns: impl IntoIterator<Item = &'a str>) -> Result<(), NameError> {
        for pattern in patterns {
            let pattern = NamePattern::new(pattern)?;
            if !self.ignore_channels.contains(&pattern) {
                self.ignore_channels.push(pattern);
            }
        }
        Ok(())
    }

    pub fn extend_nodes<'a>(&mut self, patterns: impl IntoIterator<Item = &'a str>) -> Result<(), NameError> {
        for pattern in patterns {
            let pattern = NamePattern::new(pattern)?;
            if !self.ignore_nodes.contains(&pattern) {
                self.ignore_nodes.push(pattern);
            }
        }
        Ok(())
    }

    pub fn ignores_channel(&self, channel: &str, node: Option<&str>) -> bool {
        self.ignore_channels.iter().any(|p| p.matches(channel, node))
    }

    pub fn ignores_node(&self, fqn: &str) -> bool {
        self.ignore_nodes.iter().any(|p| p.matches(fqn, None))
    }

    pub fn unexpected_node_severity(&self, stage: Stage) -> Severity {
        self.treat_unexpected_as.unwrap_or(match stage {
            Stage::Ssrve => Severity::Warning,
            _ => Severity::Error,
        })
    }
}
