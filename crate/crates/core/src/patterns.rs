//! FD-pattern algebra: composition, independence, maximality, composed
//! quality, repair covers and per-tuple pattern expressions.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fd::{FdId, FunctionalDependency, Sigma};
use crate::fd_graph::AttributeClassification;
use crate::instance_graph::{EdgeId, InstanceGraph, NodeId};

/// How two FDs share attributes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Interaction {
    /// Shared left-hand-side attribute: `A -> B`, `A -> C`.
    Case1,
    /// Shared right-hand side: `A -> C`, `B -> C`.
    Case2,
    /// One right-hand side feeds the other's left-hand side: `A -> B`, `B -> C`.
    Case3,
    /// Mutually cyclic: `A -> B`, `B -> A`.
    Case4,
    None,
}

/// Interaction of two distinct FDs. When several cases apply the strongest
/// (Case4 > Case3 > Case2 > Case1) is reported.
pub fn interaction_case(f1: &FunctionalDependency, f2: &FunctionalDependency) -> Interaction {
    let in_lhs = |f: &FunctionalDependency, a: &str| f.lhs().iter().any(|l| l == a);
    let r1_in_l2 = in_lhs(f2, f1.rhs());
    let r2_in_l1 = in_lhs(f1, f2.rhs());
    if r1_in_l2 && r2_in_l1 {
        Interaction::Case4
    } else if r1_in_l2 || r2_in_l1 {
        Interaction::Case3
    } else if f1.rhs() == f2.rhs() {
        Interaction::Case2
    } else if f1.lhs().iter().any(|a| in_lhs(f2, a)) {
        Interaction::Case1
    } else {
        Interaction::None
    }
}

/// An FD pattern: a set of FDs with one value per attribute they mention.
/// The empty pattern is the failure value of [`compose`].
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize)]
pub struct FdPattern {
    pub fds: BTreeSet<FdId>,
    pub values: BTreeMap<String, String>,
    /// Instance-graph edges the pattern was built from.
    pub edges: BTreeSet<EdgeId>,
}

impl FdPattern {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.fds.is_empty()
    }

    /// Simple pattern for `fd` with the given `(attribute, value)` pairs.
    pub fn simple<A, V>(fd: FdId, values: impl IntoIterator<Item = (A, V)>) -> Self
    where
        A: Into<String>,
        V: Into<String>,
    {
        FdPattern {
            fds: BTreeSet::from([fd]),
            values: values
                .into_iter()
                .map(|(a, v)| (a.into(), v.into()))
                .collect(),
            edges: BTreeSet::new(),
        }
    }

    /// The simple pattern encoded by an instance-graph edge.
    pub fn from_edge(g: &InstanceGraph, edge: EdgeId) -> Self {
        let e = g.edge(edge);
        let mut values: BTreeMap<String, String> = g
            .node_attrs(e.from)
            .iter()
            .cloned()
            .zip(g.node_values(e.from).into_iter().map(str::to_owned))
            .collect();
        values.insert(g.node_attrs(e.to)[0].clone(), g.rhs_value(edge).to_owned());
        FdPattern {
            fds: BTreeSet::from([e.fd]),
            values,
            edges: BTreeSet::from([edge]),
        }
    }

    pub fn get(&self, attr: &str) -> Option<&str> {
        self.values.get(attr).map(String::as_str)
    }
}

fn shared<'a>(p1: &'a FdPattern, p2: &'a FdPattern) -> impl Iterator<Item = &'a str> + 'a {
    p1.values
        .keys()
        .filter(move |a| p2.values.contains_key(*a))
        .map(String::as_str)
}

/// Patterns share at least one attribute and agree on every shared attribute.
pub fn composable(p1: &FdPattern, p2: &FdPattern) -> bool {
    let mut any = false;
    for a in shared(p1, p2) {
        if p1.values[a] != p2.values[a] {
            return false;
        }
        any = true;
    }
    any
}

/// `p1 ▷ p2`: the union of both patterns when composable, else the empty pattern.
pub fn compose(p1: &FdPattern, p2: &FdPattern) -> FdPattern {
    if !composable(p1, p2) {
        return FdPattern::empty();
    }
    let mut out = p1.clone();
    out.fds.extend(p2.fds.iter().copied());
    out.edges.extend(p2.edges.iter().copied());
    for (a, v) in &p2.values {
        out.values.entry(a.clone()).or_insert_with(|| v.clone());
    }
    out
}

/// Patterns are independent when they share no attribute, disagree on a
/// shared attribute, or every interacting pair of their FDs is Case1.
pub fn independent(p1: &FdPattern, p2: &FdPattern, sigma: &Sigma) -> bool {
    let mut any = false;
    for a in shared(p1, p2) {
        if p1.values[a] != p2.values[a] {
            return true;
        }
        any = true;
    }
    if !any {
        return true;
    }
    p1.fds.iter().all(|&f1| {
        p2.fds.iter().all(|&f2| {
            f1 == f2
                || matches!(
                    interaction_case(sigma.fd(f1), sigma.fd(f2)),
                    Interaction::Case1 | Interaction::None
                )
        })
    })
}

/// No simple pattern of `g` over an FD outside `p` can be composed with `p`.
pub fn is_maximal(p: &FdPattern, g: &InstanceGraph) -> bool {
    (0..g.edges().len())
        .filter(|&e| !p.fds.contains(&g.edge(e).fd))
        .all(|e| !composable(p, &FdPattern::from_edge(g, e)))
}

/// Mean quality of the instance-graph edges realizing each FD of `p`.
pub fn composed_quality(p: &FdPattern, g: &InstanceGraph) -> Result<f64> {
    if p.is_empty() {
        return Err(Error::MissingEdge);
    }
    let mut sum = 0.0;
    for &fd in &p.fds {
        let e = g
            .edge_for_values(fd, |a| p.get(a))
            .ok_or(Error::MissingEdge)?;
        sum += g.edge(e).quality;
    }
    Ok(sum / p.fds.len() as f64)
}

/// One incident edge per FD touching a node's attribute.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RepairCover {
    pub node: NodeId,
    /// Ordered by FD id.
    pub edges: Vec<EdgeId>,
    pub quality: f64,
}

/// Most covers enumerated for one node.
pub const MAX_COVERS: usize = 64;

fn other_end(g: &InstanceGraph, node: NodeId, edge: EdgeId) -> NodeId {
    let e = g.edge(edge);
    if e.from == node {
        e.to
    } else {
        e.from
    }
}

/// Incident edges of `node` grouped by FD, each group best quality first.
fn incident_by_fd(g: &InstanceGraph, node: NodeId) -> Vec<Vec<EdgeId>> {
    let mut by_fd: BTreeMap<FdId, Vec<EdgeId>> = BTreeMap::new();
    for &e in g.out_edges(node).iter().chain(g.in_edges(node)) {
        by_fd.entry(g.edge(e).fd).or_default().push(e);
    }
    by_fd
        .into_values()
        .map(|mut list| {
            list.sort_by(|&a, &b| {
                g.edge(b)
                    .quality
                    .partial_cmp(&g.edge(a).quality)
                    .unwrap_or(Ordering::Equal)
                    .then_with(|| {
                        g.node_values(other_end(g, node, a))
                            .cmp(&g.node_values(other_end(g, node, b)))
                    })
            });
            list
        })
        .collect()
}

fn is_bound_node(g: &InstanceGraph, node: NodeId, cls: &AttributeClassification) -> bool {
    g.node_attrs(node).iter().all(|a| cls.is_bound(a))
}

/// Repair covers of `node`, best first, at most [`MAX_COVERS`]. Nodes over
/// bound attributes have none.
pub fn repair_covers(
    node: NodeId,
    g: &InstanceGraph,
    cls: &AttributeClassification,
) -> Vec<RepairCover> {
    if is_bound_node(g, node, cls) {
        return Vec::new();
    }
    let groups = incident_by_fd(g, node);
    if groups.is_empty() {
        return Vec::new();
    }
    let mut covers = Vec::new();
    let mut pick = vec![0usize; groups.len()];
    loop {
        let edges: Vec<EdgeId> = groups.iter().zip(&pick).map(|(l, &i)| l[i]).collect();
        let quality = edges.iter().map(|&e| g.edge(e).quality).sum::<f64>() / edges.len() as f64;
        covers.push(RepairCover {
            node,
            edges,
            quality,
        });
        if covers.len() == MAX_COVERS {
            break;
        }
        let mut k = groups.len();
        loop {
            if k == 0 {
                return covers;
            }
            k -= 1;
            pick[k] += 1;
            if pick[k] < groups[k].len() {
                break;
            }
            pick[k] = 0;
        }
    }
    covers
}

/// Quality of the best repair cover of `node`, `None` when it has no cover.
pub fn best_cover_quality(
    node: NodeId,
    g: &InstanceGraph,
    cls: &AttributeClassification,
) -> Option<f64> {
    if is_bound_node(g, node, cls) {
        return None;
    }
    let mut best: BTreeMap<FdId, f64> = BTreeMap::new();
    for &e in g.out_edges(node).iter().chain(g.in_edges(node)) {
        let edge = g.edge(e);
        let q = best.entry(edge.fd).or_insert(f64::NEG_INFINITY);
        *q = q.max(edge.quality);
    }
    if best.is_empty() {
        return None;
    }
    Some(best.values().sum::<f64>() / best.len() as f64)
}

/// The maximal patterns describing one tuple; each FD of Σ appears in
/// exactly one member.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PatternExpression {
    pub tuple: usize,
    pub patterns: Vec<FdPattern>,
}

impl PatternExpression {
    /// Compose simple patterns in the given order, merging each into every
    /// member it is composable with.
    pub fn compose_all(tuple: usize, simple: impl IntoIterator<Item = FdPattern>) -> Self {
        let mut patterns: Vec<FdPattern> = Vec::new();
        for p in simple {
            let mut merged = p;
            let mut i = 0;
            while i < patterns.len() {
                if composable(&patterns[i], &merged) {
                    merged = compose(&patterns.remove(i), &merged);
                } else {
                    i += 1;
                }
            }
            let at = patterns
                .iter()
                .position(|q| q.fds.first() > merged.fds.first())
                .unwrap_or(patterns.len());
            patterns.insert(at, merged);
        }
        PatternExpression { tuple, patterns }
    }

    /// FD ids over all member patterns, with repetitions.
    pub fn fd_multiset(&self) -> Vec<FdId> {
        let mut out: Vec<FdId> = self
            .patterns
            .iter()
            .flat_map(|p| p.fds.iter().copied())
            .collect();
        out.sort_unstable();
        out
    }

    pub fn covers(&self, sigma: &Sigma) -> bool {
        self.fd_multiset() == (0..sigma.len()).collect::<Vec<_>>()
    }

    pub fn record(&self, g: &InstanceGraph) -> ExpressionRecord {
        ExpressionRecord {
            tuple: self.tuple,
            patterns: self
                .patterns
                .iter()
                .map(|p| PatternRecord {
                    fds: p.fds.iter().copied().collect(),
                    values: p.values.clone(),
                    edges: p.edges.iter().copied().collect(),
                    quality: composed_quality(p, g).ok(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PatternRecord {
    pub fds: Vec<FdId>,
    pub values: BTreeMap<String, String>,
    pub edges: Vec<EdgeId>,
    pub quality: Option<f64>,
}

/// Serializable form of a [`PatternExpression`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpressionRecord {
    pub tuple: usize,
    pub patterns: Vec<PatternRecord>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn p(fd: FdId, pairs: &[(&str, &str)]) -> FdPattern {
        FdPattern::simple(fd, pairs.iter().copied())
    }

    #[test]
    fn cases() {
        let s = Sigma::parse("A -> B\nB -> C\nA -> C\nD -> C\nB -> A\nE -> F\nB,X -> Y").unwrap();
        assert_eq!(interaction_case(s.fd(0), s.fd(1)), Interaction::Case3);
        assert_eq!(interaction_case(s.fd(2), s.fd(3)), Interaction::Case2);
        assert_eq!(interaction_case(s.fd(0), s.fd(2)), Interaction::Case1);
        assert_eq!(interaction_case(s.fd(0), s.fd(4)), Interaction::Case4);
        assert_eq!(interaction_case(s.fd(0), s.fd(5)), Interaction::None);
        assert_eq!(interaction_case(s.fd(0), s.fd(6)), Interaction::Case3);
    }

    #[test]
    fn tour_composition() {
        let p1 = p(0, &[("cyclist", "Marcel Kittel"), ("country", "Russia")]);
        let p2 = p(1, &[("country", "Germany"), ("capital", "Berlin")]);
        let p3 = p(1, &[("country", "Russia"), ("capital", "Berlin")]);
        assert!(composable(&p1, &p3));
        assert!(!composable(&p1, &p2));
        let p13 = compose(&p1, &p3);
        assert_eq!(p13.fds, BTreeSet::from([0, 1]));
        assert_eq!(p13.get("capital"), Some("Berlin"));
        assert_eq!(p13, compose(&p3, &p1));
        assert!(compose(&p1, &p2).is_empty());
        let sigma = fixtures::tour_sigma();
        assert!(independent(&p1, &p2, &sigma));
        assert!(!independent(&p1, &p3, &sigma));
    }

    #[test]
    fn case1_patterns_are_independent() {
        let sigma = Sigma::parse("A -> B\nA -> C").unwrap();
        let p1 = p(0, &[("A", "a"), ("B", "b")]);
        let p2 = p(1, &[("A", "a"), ("C", "c")]);
        assert!(independent(&p1, &p2, &sigma));
    }

    #[test]
    fn compose_all_merges_chains() {
        let e = PatternExpression::compose_all(
            0,
            [
                p(0, &[("cyclist", "M"), ("country", "G")]),
                p(1, &[("country", "G"), ("capital", "B")]),
            ],
        );
        assert_eq!(e.patterns.len(), 1);
        assert!(e.covers(&fixtures::tour_sigma()));
    }
}
