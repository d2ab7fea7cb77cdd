//! ROS name grammar and REP-135 style resolution of relative, absolute and
//! private names.
//!
//! Accepted names follow `(~|~/|/)?token('/'token)*` where a token is
//! `[A-Za-z][A-Za-z0-9_]*`. A single trailing `/` is tolerated on input and
//! stripped. Namespaces are either the root `/` or an absolute name.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NameError {
    #[error("`{0}` is not a valid ROS name")]
    NameViolation(String),
    #[error("`{0}` is not a valid absolute namespace")]
    InvalidNamespace(String),
    #[error("private name `{0}` needs a node context")]
    MissingNodeContext(String),
}

/// How a name anchors itself before resolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NameKind {
    Absolute,
    Relative,
    Private,
}

pub fn is_valid_token(token: &str) -> bool {
    let mut chars = token.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn tokens_valid(body: &str) -> bool {
    !body.is_empty() && body.split('/').all(is_valid_token)
}

fn strip_trailing_slash(name: &str) -> &str {
    if name.len() > 1 {
        name.strip_suffix('/').unwrap_or(name)
    } else {
        name
    }
}

/// Classifies `name` and returns its token body (without anchor).
pub fn classify(name: &str) -> Result<(NameKind, &str), NameError> {
    let trimmed = strip_trailing_slash(name);
    let (kind, body) = if let Some(rest) = trimmed.strip_prefix('~') {
        (NameKind::Private, rest.strip_prefix('/').unwrap_or(rest))
    } else if let Some(rest) = trimmed.strip_prefix('/') {
        (NameKind::Absolute, rest)
    } else {
        (NameKind::Relative, trimmed)
    };
    if tokens_valid(body) {
        Ok((kind, body))
    } else {
        Err(NameError::NameViolation(name.to_string()))
    }
}

pub fn is_valid_name(name: &str) -> bool {
    classify(name).is_ok()
}

/// Checks and normalizes an absolute namespace (`/` or `/a/b`).
pub fn normalize_namespace(namespace: &str) -> Result<String, NameError> {
    if namespace == "/" {
        return Ok("/".to_string());
    }
    match classify(namespace) {
        Ok((NameKind::Absolute, body)) => Ok(format!("/{body}")),
        _ => Err(NameError::InvalidNamespace(namespace.to_string())),
    }
}

fn join(prefix: &str, body: &str) -> String {
    if prefix == "/" {
        format!("/{body}")
    } else {
        format!("{prefix}/{body}")
    }
}

/// Resolves `name` to an absolute name.
///
/// Absolute names are returned unchanged, relative names are joined onto
/// `namespace`, and private names (`~x` or `~/x`) are joined onto the node's
/// fully-qualified name.
pub fn resolve_name(name: &str, namespace: &str, node: Option<&str>) -> Result<String, NameError> {
    let (kind, body) = classify(name)?;
    match kind {
        NameKind::Absolute => Ok(format!("/{body}")),
        NameKind::Relative => Ok(join(&normalize_namespace(namespace)?, body)),
        NameKind::Private => {
            let node = node.ok_or_else(|| NameError::MissingNodeContext(name.to_string()))?;
            let node = match classify(node) {
                Ok((NameKind::Absolute, node_body)) => format!("/{node_body}"),
                _ => return Err(NameError::NameViolation(node.to_string())),
            };
            Ok(join(&node, body))
        }
    }
}

/// Namespace part of an absolute name (`/a/b/c` -> `/a/b`, `/a` -> `/`).
pub fn parent_namespace(fqn: &str) -> &str {
    match fqn.rfind('/') {
        Some(0) | None => "/",
        Some(i) => &fqn[..i],
    }
}

/// True when `fqn` lies inside `namespace` (the root contains everything).
pub fn is_under_namespace(fqn: &str, namespace: &str) -> bool {
    if namespace == "/" {
        return fqn.starts_with('/');
    }
    fqn.strip_prefix(namespace)
        .is_some_and(|rest| rest.starts_with('/'))
}

/// A literal name or a prefix pattern ending in a single `*`. Patterns that
/// start with `~` are private and only match after substituting a node name.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
#[serde(transparent)]
pub struct NamePattern(String);

impl NamePattern {
    pub fn new(pattern: impl Into<String>) -> Result<Self, NameError> {
        let pattern = pattern.into();
        let star_count = pattern.matches('*').count();
        if pattern.is_empty() || star_count > 1 || (star_count == 1 && !pattern.ends_with('*')) {
            return Err(NameError::NameViolation(pattern));
        }
        Ok(NamePattern(pattern))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_private(&self) -> bool {
        self.0.starts_with('~')
    }

    fn matches_literal(pattern: &str, name: &str) -> bool {
        match pattern.strip_suffix('*') {
            Some(prefix) => name.starts_with(prefix),
            None => pattern == name,
        }
    }

    /// Matches an absolute name. Private patterns are expanded against
    /// `node` and never match when no node is given.
    pub fn matches(&self, name: &str, node: Option<&str>) -> bool {
        if let Some(rest) = self.0.strip_prefix('~') {
            let Some(node) = node else { return false };
            let rest = rest.strip_prefix('/').unwrap_or(rest);
            let expanded = if node == "/" { format!("/{rest}") } else { format!("{node}/{rest}") };
            Self::matches_literal(&expanded, name)
        } else {
            Self::matches_literal(&self.0, name)
        }
    }
}

impl std::fmt::Display for NamePattern {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relative_joins_namespace() {
        assert_eq!(resolve_name("aruco_node", "/magician1", None).unwrap(), "/magician1/aruco_node");
    }

    #[test]
    fn absolute_unchanged() {
        assert_eq!(resolve_name("/rosout", "/magician1", None).unwrap(), "/rosout");
    }

    #[test]
    fn private_uses_node() {
        assert_eq!(resolve_name("~status", "/m", Some("/m/nodeA")).unwrap(), "/m/nodeA/status");
        assert_eq!(resolve_name("~/status", "/m", Some("/m/nodeA")).unwrap(), "/m/nodeA/status");
    }

    #[test]
    fn private_without_node() {
        assert_eq!(
            resolve_name("~status", "/m", None),
            Err(NameError::MissingNodeContext("~status".into()))
        );
    }

    #[test]
    fn root_namespace_collapses() {
        assert_eq!(resolve_name("chatter", "/", None).unwrap(), "/chatter");
    }

    #[test]
    fn trailing_slash_stripped() {
        assert_eq!(resolve_name("/a/b/", "/", None).unwrap(), "/a/b");
    }

    #[test]
    fn grammar_rejects() {
        for bad in ["bad name", "", "/", "1abc", "a//b", "_hidden", "a/-b", "~", "//a"] {
            assert!(!is_valid_name(bad), "{bad:?} accepted");
        }
        assert!(matches!(resolve_name("bad name", "/", None), Err(NameError::NameViolation(_))));
    }

    #[test]
    fn namespaces() {
        assert_eq!(normalize_namespace("/").unwrap(), "/");
        assert_eq!(normalize_namespace("/a/b/").unwrap(), "/a/b");
        assert!(normalize_namespace("a").is_err());
        assert!(normalize_namespace("~a").is_err());
    }

    #[test]
    fn under_namespace() {
        assert!(is_under_namespace("/magician1/aruco_node", "/magician1"));
        assert!(!is_under_namespace("/magician10/aruco_node", "/magician1"));
        assert!(is_under_namespace("/x", "/"));
        assert_eq!(parent_namespace("/a/b/c"), "/a/b");
        assert_eq!(parent_namespace("/a"), "/");
    }

    #[test]
    fn patterns() {
        let p = NamePattern::new("/rosout").unwrap();
        assert!(p.matches("/rosout", None));
        assert!(!p.matches("/rosout_agg", None));
        let p = NamePattern::new("/launch_ros_*").unwrap();
        assert!(p.matches("/launch_ros_1234", None));
        let p = NamePattern::new("~/get_parameters").unwrap();
        assert!(p.matches("/m/n/get_parameters", Some("/m/n")));
        assert!(!p.matches("/m/n/get_parameters", None));
        assert!(NamePattern::new("/a*b").is_err());
        assert!(NamePattern::new("/a**").is_err());
    }
}
