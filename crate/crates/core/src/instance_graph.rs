//! Value-level instance graph and pattern-quality propagation.
//!
//! Nodes are `(attribute set, values)` pairs; every edge is a simple FD
//! pattern `(X -> Y, [x, y])` occurring in at least one tuple. Edge support is
//! `frequency / |T|` and confidence is `frequency / |tuples with X = x|`.
//!
//! Quality is propagated by a DFS forest sharing a single visited set:
//!
//! * tree edge `e = (v, w)`: `score(e) = conf(e) + sup(e) + vq(w)` where
//!   `vq(w)` sums the scores of `w`'s tree out-edges, and
//!   `quality(e) = score(e) / (2 * (reach(e) + 1))` with `reach(e)` the number
//!   of tree edges below `e`;
//! * an edge whose head was already visited is deferred: it adds nothing to
//!   its tail's score and, once the forest is complete, gets
//!   `(conf + sup + vq(w)) / (2 * (reach(w) + 1))`.
//!
//! Root order is fixed (nodes grouped by the FD order of their attribute set,
//! then by value) and out-edges are walked by ascending right-hand value, so
//! deferred-edge qualities are deterministic.

use std::cmp::Ordering;
use std::sync::Arc;

use rustc_hash::FxHashMap;
use serde::Serialize;

use crate::error::Result;
use crate::fd::{BoundFd, FdId, Sigma};
use crate::fd_graph::{build_fd_graph, FdGraph, FdOrder};
use crate::instance::{Dictionary, Instance};
use crate::violations::{key_of, Key};

pub type NodeId = usize;
pub type EdgeId = usize;

const NO_NODE: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct GraphOptions {
    /// Leave tuples with an empty left-hand-side value out of the graph.
    pub skip_empty_lhs: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IgNode {
    /// FD-graph node (attribute set) this value belongs to.
    pub key: usize,
    /// Codes aligned with the attribute set's sorted attributes.
    pub codes: Key,
    pub v_quality: f64,
    pub reach_edge_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IgEdge {
    pub fd: FdId,
    pub from: NodeId,
    pub to: NodeId,
    pub frequency: usize,
    pub sup: f64,
    pub conf: f64,
    pub score: f64,
    pub quality: f64,
    pub reach_count: usize,
    pub deferred: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TraversalStats {
    pub nodes_visited: usize,
    pub edges_examined: usize,
}

/// Flat, serializable view of one edge.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeRecord {
    pub id: EdgeId,
    pub fd: FdId,
    pub lhs: Vec<String>,
    pub rhs: String,
    pub frequency: usize,
    pub sup: f64,
    pub conf: f64,
    pub quality: f64,
    pub deferred: bool,
}

#[derive(Debug, Clone)]
pub struct InstanceGraph {
    fdg: FdGraph,
    fds: Vec<BoundFd>,
    key_columns: Vec<Vec<usize>>,
    dicts: Vec<Arc<Dictionary>>,
    /// Position of each code in the lexicographic order of its column's values.
    ranks: Vec<Vec<u32>>,
    tuple_count: usize,
    nodes: Vec<IgNode>,
    edges: Vec<IgEdge>,
    out: Vec<Vec<EdgeId>>,
    inc: Vec<Vec<EdgeId>>,
    node_index: FxHashMap<(usize, Key), NodeId>,
    /// Dense code-to-node tables for single-attribute keys; empty for composite keys.
    unary: Vec<Vec<u32>>,
    stats: TraversalStats,
}

pub fn build_instance_graph(
    inst: &Instance,
    sigma: &Sigma,
    opts: GraphOptions,
) -> Result<InstanceGraph> {
    let bound = sigma.bind(inst.schema())?;
    let fdg = build_fd_graph(sigma);
    let key_columns = fdg
        .nodes
        .iter()
        .map(|attrs| {
            attrs
                .iter()
                .map(|a| inst.attr_index(a).expect("bound attribute"))
                .collect()
        })
        .collect::<Vec<Vec<usize>>>();
    let unary = key_columns
        .iter()
        .map(|cols| match cols.as_slice() {
            &[c] => vec![NO_NODE; inst.column(c).dictionary().len()],
            _ => Vec::new(),
        })
        .collect();
    let dicts = (0..inst.arity())
        .map(|c| inst.column(c).dictionary().clone())
        .collect();

    let mut g = InstanceGraph {
        fdg,
        fds: bound.fds,
        key_columns,
        ranks: (0..inst.arity())
            .map(|c| {
                if bound.attr_columns.contains(&c) {
                    value_ranks(inst.column(c).dictionary())
                } else {
                    Vec::new()
                }
            })
            .collect(),
        dicts,
        tuple_count: inst.len(),
        nodes: Vec::new(),
        edges: Vec::new(),
        out: Vec::new(),
        inc: Vec::new(),
        node_index: FxHashMap::default(),
        unary,
        stats: TraversalStats::default(),
    };

    let empty_codes: Vec<Option<u32>> = (0..inst.arity())
        .map(|c| inst.column(c).dictionary().code(""))
        .collect();
    let fds = g.fds.clone();
    let mut frequency: Vec<usize> = Vec::new();
    for fd in &fds {
        let (lhs_key, rhs_key) = (g.fdg.lhs_node(fd.id), g.fdg.rhs_node(fd.id));
        let mut index: FxHashMap<(u32, u32), u32> = FxHashMap::default();
        for row in 0..inst.len() {
            if opts.skip_empty_lhs
                && fd
                    .key
                    .iter()
                    .any(|&c| empty_codes[c] == Some(inst.code(row, c)))
            {
                continue;
            }
            let from = match fd.key.as_slice() {
                &[c] => g.intern_unary(lhs_key, inst.code(row, c)),
                cols => g.intern_node(lhs_key, key_of(inst, row, cols)),
            };
            let to = g.intern_unary(rhs_key, inst.code(row, fd.rhs));
            let next = g.edges.len();
            let e = *index.entry((from as u32, to as u32)).or_insert(next as u32) as usize;
            if e == next {
                g.edges.push(IgEdge {
                    fd: fd.id,
                    from,
                    to,
                    frequency: 0,
                    sup: 0.0,
                    conf: 0.0,
                    score: 0.0,
                    quality: 0.0,
                    reach_count: 0,
                    deferred: false,
                });
                g.out[from].push(e);
                g.inc[to].push(e);
                frequency.push(0);
            }
            frequency[e] += 1;
        }
    }
    for (edge, f) in g.edges.iter_mut().zip(frequency) {
        edge.frequency = f;
    }

    let n = inst.len() as f64;
    for v in 0..g.nodes.len() {
        let mut per_fd: FxHashMap<FdId, usize> = FxHashMap::default();
        for &e in &g.out[v] {
            *per_fd.entry(g.edges[e].fd).or_default() += g.edges[e].frequency;
        }
        for i in 0..g.out[v].len() {
            let e = g.out[v][i];
            let edge = &mut g.edges[e];
            edge.sup = edge.frequency as f64 / n;
            edge.conf = edge.frequency as f64 / per_fd[&edge.fd] as f64;
        }
    }

    let mut out = std::mem::take(&mut g.out);
    for list in &mut out {
        list.sort_by(|&a, &b| {
            let (ea, eb) = (&g.edges[a], &g.edges[b]);
            ea.fd
                .cmp(&eb.fd)
                .then_with(|| g.cmp_node_values(ea.to, eb.to))
        });
    }
    g.out = out;
    let mut inc = std::mem::take(&mut g.inc);
    for list in &mut inc {
        list.sort_by(|&a, &b| {
            let (ea, eb) = (&g.edges[a], &g.edges[b]);
            ea.fd
                .cmp(&eb.fd)
                .then_with(|| g.cmp_node_values(ea.from, eb.from))
        });
    }
    g.inc = inc;
    Ok(g)
}

fn value_ranks(dict: &Dictionary) -> Vec<u32> {
    let mut codes: Vec<u32> = (0..dict.len() as u32).collect();
    codes.sort_unstable_by(|&a, &b| dict.value(a).cmp(dict.value(b)));
    let mut ranks = vec![0; codes.len()];
    for (rank, code) in codes.into_iter().enumerate() {
        ranks[code as usize] = rank as u32;
    }
    ranks
}

/// Run the quality DFS over `g`. Idempotent: a second call recomputes the same values.
pub fn compute_pattern_quality(g: &mut InstanceGraph, order: &FdOrder) {
    g.propagate_quality(order);
}

impl InstanceGraph {
    fn intern_unary(&mut self, key: usize, code: u32) -> NodeId {
        match self.unary[key][code as usize] {
            NO_NODE => self.intern_node(key, std::iter::once(code).collect()),
            id => id as NodeId,
        }
    }

    fn intern_node(&mut self, key: usize, codes: Key) -> NodeId {
        let next = self.nodes.len();
        let id = match self.unary[key].get_mut(codes[0] as usize) {
            Some(slot) => {
                if *slot == NO_NODE {
                    *slot = next as u32;
                }
                *slot as NodeId
            }
            None => *self.node_index.entry((key, codes.clone())).or_insert(next),
        };
        if id == next {
            self.nodes.push(IgNode {
                key,
                codes,
                v_quality: 0.0,
                reach_edge_count: 0,
            });
            self.out.push(Vec::new());
            self.inc.push(Vec::new());
        }
        id
    }

    fn cmp_node_values(&self, a: NodeId, b: NodeId) -> Ordering {
        let (na, nb) = (&self.nodes[a], &self.nodes[b]);
        na.key.cmp(&nb.key).then_with(|| {
            let cols = &self.key_columns[na.key];
            for (i, &c) in cols.iter().enumerate() {
                let r = &self.ranks[c];
                let ord = r[na.codes[i] as usize].cmp(&r[nb.codes[i] as usize]);
                if ord != Ordering::Equal {
                    return ord;
                }
            }
            Ordering::Equal
        })
    }

    fn root_order(&self, order: &FdOrder) -> Vec<NodeId> {
        let order_of = order.order_of();
        let mut group = vec![usize::MAX; self.fdg.nodes.len()];
        for e in &self.fdg.edges {
            group[e.from] = group[e.from].min(order_of[e.fd]);
        }
        let mut roots: Vec<NodeId> = (0..self.nodes.len()).collect();
        roots.sort_by(|&a, &b| {
            let (ka, kb) = (self.nodes[a].key, self.nodes[b].key);
            group[ka]
                .cmp(&group[kb])
                .then_with(|| self.fdg.nodes[ka].cmp(&self.fdg.nodes[kb]))
                .then_with(|| self.cmp_node_values(a, b))
        });
        roots
    }

    fn propagate_quality(&mut self, order: &FdOrder) {
        for node in &mut self.nodes {
            node.v_quality = 0.0;
            node.reach_edge_count = 0;
        }
        for e in &mut self.edges {
            e.score = 0.0;
            e.quality = 0.0;
            e.reach_count = 0;
            e.deferred = false;
        }
        let mut stats = TraversalStats::default();
        let mut visited = vec![false; self.nodes.len()];
        let mut deferred = Vec::new();

        struct Frame {
            node: NodeId,
            via: Option<EdgeId>,
            next: usize,
        }
        let mut stack: Vec<Frame> = Vec::new();

        for root in self.root_order(order) {
            if visited[root] {
                continue;
            }
            visited[root] = true;
            stats.nodes_visited += 1;
            stack.push(Frame {
                node: root,
                via: None,
                next: 0,
            });
            while let Some(top) = stack.last_mut() {
                let v = top.node;
                if top.next < self.out[v].len() {
                    let e = self.out[v][top.next];
                    top.next += 1;
                    stats.edges_examined += 1;
                    let w = self.edges[e].to;
                    if visited[w] {
                        self.edges[e].deferred = true;
                        deferred.push(e);
                    } else {
                        visited[w] = true;
                        stats.nodes_visited += 1;
                        stack.push(Frame {
                            node: w,
                            via: Some(e),
                            next: 0,
                        });
                    }
                    continue;
                }
                let done = stack.pop().expect("frame");
                if let Some(e) = done.via {
                    let (vq, reach) = {
                        let n = &self.nodes[done.node];
                        (n.v_quality, n.reach_edge_count)
                    };
                    let edge = &mut self.edges[e];
                    edge.score = edge.conf + edge.sup + vq;
                    edge.reach_count = reach;
                    edge.quality = edge.score / (2.0 * (reach as f64 + 1.0));
                    let (score, from) = (edge.score, edge.from);
                    let parent = &mut self.nodes[from];
                    parent.v_quality += score;
                    parent.reach_edge_count += reach + 1;
                }
            }
        }

        for e in deferred {
            let w = &self.nodes[self.edges[e].to];
            let (vq, reach) = (w.v_quality, w.reach_edge_count);
            let edge = &mut self.edges[e];
            edge.score = edge.conf + edge.sup + vq;
            edge.reach_count = reach;
            edge.quality = edge.score / (2.0 * (reach as f64 + 1.0));
        }
        self.stats = stats;
    }

    pub fn nodes(&self) -> &[IgNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &[IgEdge] {
        &self.edges
    }

    pub fn node(&self, id: NodeId) -> &IgNode {
        &self.nodes[id]
    }

    pub fn edge(&self, id: EdgeId) -> &IgEdge {
        &self.edges[id]
    }

    pub fn tuple_count(&self) -> usize {
        self.tuple_count
    }

    pub fn stats(&self) -> TraversalStats {
        self.stats
    }

    pub fn fd_graph(&self) -> &FdGraph {
        &self.fdg
    }

    pub fn bound_fds(&self) -> &[BoundFd] {
        &self.fds
    }

    /// Out-edges of `node`, ordered by FD then right-hand value.
    pub fn out_edges(&self, node: NodeId) -> &[EdgeId] {
        &self.out[node]
    }

    /// In-edges of `node`, ordered by FD then left-hand value.
    pub fn in_edges(&self, node: NodeId) -> &[EdgeId] {
        &self.inc[node]
    }

    pub fn out_edges_for(&self, node: NodeId, fd: FdId) -> impl Iterator<Item = EdgeId> + '_ {
        self.out[node]
            .iter()
            .copied()
            .filter(move |&e| self.edges[e].fd == fd)
    }

    pub fn in_edges_for(&self, node: NodeId, fd: FdId) -> impl Iterator<Item = EdgeId> + '_ {
        self.inc[node]
            .iter()
            .copied()
            .filter(move |&e| self.edges[e].fd == fd)
    }

    /// Node with the given FD-graph key and codes.
    pub fn find_node(&self, key: usize, codes: &[u32]) -> Option<NodeId> {
        match (self.unary[key].is_empty(), codes) {
            (false, &[c]) => self.unary[key]
                .get(c as usize)
                .copied()
                .filter(|&n| n != NO_NODE)
                .map(|n| n as NodeId),
            _ => self.node_index.get(&(key, Key::from_slice(codes))).copied(),
        }
    }

    /// Left-hand node of `fd` for left-hand codes in key order.
    pub fn lhs_node(&self, fd: FdId, codes: &[u32]) -> Option<NodeId> {
        self.find_node(self.fdg.lhs_node(fd), codes)
    }

    pub fn rhs_node(&self, fd: FdId, code: u32) -> Option<NodeId> {
        self.find_node(self.fdg.rhs_node(fd), &[code])
    }

    pub fn find_edge(&self, fd: FdId, from: NodeId, to: NodeId) -> Option<EdgeId> {
        let out = &self.out[from];
        out.binary_search_by(|&e| {
            let edge = &self.edges[e];
            edge.fd
                .cmp(&fd)
                .then_with(|| self.cmp_node_values(edge.to, to))
        })
        .ok()
        .map(|i| out[i])
        .filter(|&e| self.edges[e].to == to)
    }

    /// Edge for pattern `(fd, lhs codes -> rhs code)`, if it occurs in the instance.
    pub fn pattern_edge(&self, fd: FdId, lhs: &[u32], rhs: u32) -> Option<EdgeId> {
        let from = self.lhs_node(fd, lhs)?;
        let to = self.rhs_node(fd, rhs)?;
        self.find_edge(fd, from, to)
    }

    /// Attribute names of a node, sorted.
    pub fn node_attrs(&self, node: NodeId) -> &[String] {
        &self.fdg.nodes[self.nodes[node].key]
    }

    pub fn node_values(&self, node: NodeId) -> Vec<&str> {
        let n = &self.nodes[node];
        self.key_columns[n.key]
            .iter()
            .zip(&n.codes)
            .map(|(&c, &code)| self.dicts[c].value(code))
            .collect()
    }

    /// Right-hand value of an edge.
    pub fn rhs_value(&self, edge: EdgeId) -> &str {
        self.node_values(self.edges[edge].to)[0]
    }

    /// Edge of `fd` whose attribute values are given by `value_of`.
    pub fn edge_for_values<'v>(
        &self,
        fd: FdId,
        value_of: impl Fn(&str) -> Option<&'v str>,
    ) -> Option<EdgeId> {
        let lhs_key = self.fdg.lhs_node(fd);
        let rhs_key = self.fdg.rhs_node(fd);
        let code = |key: usize, i: usize| -> Option<u32> {
            let v = value_of(&self.fdg.nodes[key][i])?;
            self.dicts[self.key_columns[key][i]].code(v)
        };
        let lhs: Option<Key> = (0..self.fdg.nodes[lhs_key].len())
            .map(|i| code(lhs_key, i))
            .collect();
        self.pattern_edge(fd, &lhs?, code(rhs_key, 0)?)
    }

    pub fn edge_record(&self, id: EdgeId) -> EdgeRecord {
        let e = &self.edges[id];
        EdgeRecord {
            id,
            fd: e.fd,
            lhs: self
                .node_values(e.from)
                .into_iter()
                .map(str::to_owned)
                .collect(),
            rhs: self.rhs_value(id).to_owned(),
            frequency: e.frequency,
            sup: e.sup,
            conf: e.conf,
            quality: e.quality,
            deferred: e.deferred,
        }
    }
}
