//! Verification of ROS 2 systems against a MeROS-style design model.
//!
//! The crate checks a design for internal consistency, compares it with
//! runtime graph snapshots at subsystem and system scope, checks source
//! placement, replays validation scenarios over event traces and rolls the
//! results up into a requirement traceability matrix.

pub mod conformance;
pub mod finding;
pub mod model;
pub mod names;
pub mod par;
pub mod scenario;
pub mod snapshot;
pub mod traceability;
pub mod report;
pub mod cli;
