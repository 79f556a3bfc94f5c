//! Pattern-preserving repair of functional-dependency violations.
//!
//! The engine projects a set of FDs onto an instance to build a value-level
//! *instance graph* whose edges are FD patterns (an FD instantiated with
//! concrete values). Edges are weighted by support and confidence propagated
//! along the graph, and each tuple is then repaired by chasing the
//! best-weighted patterns in a fixed FD order. Every repaired tuple comes with
//! a *pattern expression*: the composition of instance-graph edges that
//! produced it.
//!
//! ```
//! use fdpattern::{fixtures, repair, Strategy, RepairConfig};
//!
//! let dirty = fixtures::tour();
//! let result = repair(&dirty, &fixtures::tour_sigma(), Strategy::greedy(), &RepairConfig::default())?;
//! assert_eq!(result.repaired.get(0, "country"), Some("Germany"));
//! assert_eq!(result.stats.gain, 10);
//! # Ok::<(), fdpattern::Error>(())
//! ```

pub mod baseline;
pub mod error;
pub mod errorgen;
pub mod fd;
pub mod fd_graph;
pub mod fixtures;
pub mod instance;
pub mod instance_graph;
pub mod metrics;
pub mod oracle;
pub mod patterns;
pub mod repair;
pub mod violations;

pub use error::{Error, Result};
pub use fd::{BoundFd, BoundSigma, FdId, FunctionalDependency, Sigma};
pub use fd_graph::{
    build_fd_graph, classify_attributes, compute_sccs, order_fds, order_fds_anchored,
    AttributeClassification, FdGraph, FdOrder, SccGraph,
};
pub use instance::Instance;
pub use instance_graph::{
    build_instance_graph, compute_pattern_quality, GraphOptions, InstanceGraph,
};
pub use metrics::{evaluate, gain, instance_quality, EvaluationReport};
pub use oracle::{brute_force_optimal, OracleLimits, OracleResult};
pub use patterns::{FdPattern, PatternExpression};
pub use repair::{explain, repair, RepairConfig, RepairResult, Strategy, StrategyKind};
pub use violations::{delta, detect_violations, satisfies, Delta, ViolationGroup};
