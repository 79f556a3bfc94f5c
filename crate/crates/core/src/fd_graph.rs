//! Attribute-level FD graph, its strongly connected components, the FD
//! processing order, and the bound/free split of attr(Σ).

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fd::{FdId, Sigma};
use crate::instance::Instance;

/// One node per attribute set occurring as some left- or right-hand side.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FdGraph {
    /// Sorted attribute sets, in order of first appearance in Σ.
    pub nodes: Vec<Vec<String>>,
    pub edges: Vec<FdEdge>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FdEdge {
    pub fd: FdId,
    pub from: usize,
    pub to: usize,
}

impl FdGraph {
    pub fn node_of(&self, attrs: &[String]) -> Option<usize> {
        self.nodes.iter().position(|n| n == attrs)
    }

    /// Node of the left-hand side of `fd`.
    pub fn lhs_node(&self, fd: FdId) -> usize {
        self.edges[fd].from
    }

    pub fn rhs_node(&self, fd: FdId) -> usize {
        self.edges[fd].to
    }

    /// Links `{X} -> S` for every composite node `S` containing `X`.
    ///
    /// These carry no FD; they only make sure a composite left-hand side is
    /// ranked after the FDs that determine its members.
    pub fn containment_links(&self) -> Vec<(usize, usize)> {
        let mut links = Vec::new();
        for (s, single) in self.nodes.iter().enumerate() {
            if single.len() != 1 {
                continue;
            }
            for (t, set) in self.nodes.iter().enumerate() {
                if set.len() > 1 && set.contains(&single[0]) {
                    links.push((s, t));
                }
            }
        }
        links
    }
}

pub fn build_fd_graph(sigma: &Sigma) -> FdGraph {
    let mut nodes: Vec<Vec<String>> = Vec::new();
    let mut intern = |key: Vec<String>| -> usize {
        match nodes.iter().position(|n| *n == key) {
            Some(i) => i,
            None => {
                nodes.push(key);
                nodes.len() - 1
            }
        }
    };
    let mut edges = Vec::with_capacity(sigma.len());
    for fd in sigma.fds() {
        let from = intern(fd.lhs_key());
        let to = intern(vec![fd.rhs().to_owned()]);
        edges.push(FdEdge {
            fd: fd.id(),
            from,
            to,
        });
    }
    FdGraph { nodes, edges }
}

/// Tarjan's algorithm, iterative. Components come out in reverse
/// topological order (sinks first); members are sorted.
pub fn tarjan_scc(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    const UNSEEN: usize = usize::MAX;
    let n = adj.len();
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut sccs = Vec::new();
    let mut next = 0;
    // (node, position in its adjacency list)
    let mut call: Vec<(usize, usize)> = Vec::new();

    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        call.push((root, 0));
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&(v, pos)) = call.last() {
            if pos < adj[v].len() {
                let w = adj[v][pos];
                call.last_mut().expect("frame").1 += 1;
                if index[w] == UNSEEN {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                let mut comp = Vec::new();
                loop {
                    let w = stack.pop().expect("tarjan stack");
                    on_stack[w] = false;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                comp.sort_unstable();
                sccs.push(comp);
            }
        }
    }
    sccs
}

/// Condensation of the FD graph with topological ranks.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SccGraph {
    /// FD-graph node ids per component.
    pub components: Vec<Vec<usize>>,
    pub component_of: Vec<usize>,
    /// Deduplicated edges between distinct components.
    pub edges: Vec<(usize, usize)>,
    /// Rank 0: no incoming edges; otherwise one more than the highest-ranked predecessor.
    pub ranks: Vec<usize>,
    fd_edges: Vec<FdEdge>,
    node_attrs: Vec<Vec<String>>,
}

impl SccGraph {
    pub fn component_attrs(&self, c: usize) -> BTreeSet<&str> {
        self.components[c]
            .iter()
            .flat_map(|&n| self.node_attrs[n].iter().map(String::as_str))
            .collect()
    }

    /// FD edges with both endpoints inside component `c`, by ascending id.
    pub fn inner_fds(&self, c: usize) -> Vec<FdId> {
        self.fd_edges
            .iter()
            .filter(|e| self.component_of[e.from] == c && self.component_of[e.to] == c)
            .map(|e| e.fd)
            .collect()
    }

    /// FD edges leaving component `c`, by ascending id.
    pub fn outgoing_fds(&self, c: usize) -> Vec<FdId> {
        self.fd_edges
            .iter()
            .filter(|e| self.component_of[e.from] == c && self.component_of[e.to] != c)
            .map(|e| e.fd)
            .collect()
    }

    /// Components by ascending rank; ties by smallest incident FD id.
    pub fn visit_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.components.len()).collect();
        let tie = |c: usize| -> (usize, usize) {
            let fd = self
                .fd_edges
                .iter()
                .filter(|e| self.component_of[e.from] == c)
                .map(|e| e.fd)
                .min()
                .unwrap_or(usize::MAX);
            (fd, self.components[c][0])
        };
        order.sort_by_key(|&c| (self.ranks[c], tie(c)));
        order
    }
}

pub fn compute_sccs(g: &FdGraph) -> SccGraph {
    let n = g.nodes.len();
    let mut adj = vec![Vec::new(); n];
    for e in &g.edges {
        adj[e.from].push(e.to);
    }
    for (a, b) in g.containment_links() {
        adj[a].push(b);
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }

    let mut components = tarjan_scc(&adj);
    // Number components by smallest member so ids do not depend on traversal order.
    components.sort_by_key(|c| c[0]);
    let mut component_of = vec![0; n];
    for (i, comp) in components.iter().enumerate() {
        for &v in comp {
            component_of[v] = i;
        }
    }

    let mut edges: Vec<(usize, usize)> = Vec::new();
    for (v, list) in adj.iter().enumerate() {
        for &w in list {
            let (a, b) = (component_of[v], component_of[w]);
            if a != b {
                edges.push((a, b));
            }
        }
    }
    edges.sort_unstable();
    edges.dedup();

    // Longest-path layering over the condensation DAG (Kahn).
    let k = components.len();
    let mut indeg = vec![0usize; k];
    let mut succ = vec![Vec::new(); k];
    for &(a, b) in &edges {
        indeg[b] += 1;
        succ[a].push(b);
    }
    let mut ranks = vec![0usize; k];
    let mut queue: std::collections::VecDeque<usize> = (0..k).filter(|&c| indeg[c] == 0).collect();
    while let Some(c) = queue.pop_front() {
        for &s in &succ[c] {
            ranks[s] = ranks[s].max(ranks[c] + 1);
            indeg[s] -= 1;
            if indeg[s] == 0 {
                queue.push_back(s);
            }
        }
    }

    SccGraph {
        components,
        component_of,
        edges,
        ranks,
        fd_edges: g.edges.clone(),
        node_attrs: g.nodes.clone(),
    }
}

/// `slots[k]` holds the FDs with order `k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FdOrder {
    pub slots: Vec<Vec<FdId>>,
}

impl FdOrder {
    /// Order index of each FD, indexed by FD id.
    pub fn order_of(&self) -> Vec<usize> {
        let n = self.slots.iter().map(Vec::len).sum();
        let mut out = vec![usize::MAX; n];
        for (k, slot) in self.slots.iter().enumerate() {
            for &fd in slot {
                out[fd] = k;
            }
        }
        out
    }

    /// FDs in processing sequence.
    pub fn sequence(&self) -> impl Iterator<Item = FdId> + '_ {
        self.slots.iter().flatten().copied()
    }
}

/// Inner FDs of each component receive consecutive distinct orders by
/// ascending id; all outgoing FDs of a component then share the next order.
pub fn order_fds(sigma: &Sigma, scc: &SccGraph) -> FdOrder {
    order_with(sigma, scc, None)
}

/// Like [`order_fds`], but inside a cycle the FDs whose left-hand sides are
/// already determined (bound attributes, or right-hand sides of earlier FDs)
/// are visited first, so the chase starts from the cycle's bound attribute.
pub fn order_fds_anchored(sigma: &Sigma, scc: &SccGraph, cls: &AttributeClassification) -> FdOrder {
    order_with(sigma, scc, Some(&cls.bound))
}

fn order_with(sigma: &Sigma, scc: &SccGraph, bound: Option<&BTreeSet<String>>) -> FdOrder {
    let mut slots: Vec<Vec<FdId>> = Vec::new();
    let mut known: BTreeSet<&str> = bound
        .map(|b| b.iter().map(String::as_str).collect())
        .unwrap_or_default();

    for c in scc.visit_order() {
        let mut inner = scc.inner_fds(c);
        while !inner.is_empty() {
            let pick = match bound {
                Some(_) => inner
                    .iter()
                    .position(|&f| sigma.fd(f).lhs().iter().all(|a| known.contains(a.as_str())))
                    .unwrap_or(0),
                None => 0,
            };
            let fd = inner.remove(pick);
            known.insert(sigma.fd(fd).rhs());
            slots.push(vec![fd]);
        }
        let out = scc.outgoing_fds(c);
        if !out.is_empty() {
            for &fd in &out {
                known.insert(sigma.fd(fd).rhs());
            }
            slots.push(out);
        }
    }
    FdOrder { slots }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CycleBreak {
    pub cycle: Vec<String>,
    pub chosen: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct AttributeClassification {
    pub bound: BTreeSet<String>,
    pub free: BTreeSet<String>,
    pub cycle_breaks: Vec<CycleBreak>,
}

impl AttributeClassification {
    pub fn is_bound(&self, attr: &str) -> bool {
        self.bound.contains(attr)
    }
}

/// Bound attributes never appear as a right-hand side. A cycle of free
/// attributes that no FD enters from outside gets one member promoted to
/// bound: the `overrides` entry if one is listed, otherwise the member with
/// the most distinct values in `inst` (ties: smallest name).
pub fn classify_attributes(
    sigma: &Sigma,
    inst: &Instance,
    overrides: &[String],
) -> Result<AttributeClassification> {
    let attrs = sigma.attrs();
    let pos: BTreeMap<&str, usize> = attrs
        .iter()
        .enumerate()
        .map(|(i, a)| (a.as_str(), i))
        .collect();
    for o in overrides {
        if !pos.contains_key(o.as_str()) {
            return Err(Error::UnknownAttribute(o.clone()));
        }
    }

    let rhs = sigma.rhs_attrs();
    let mut bound: BTreeSet<String> = attrs
        .iter()
        .filter(|a| !rhs.contains(a.as_str()))
        .cloned()
        .collect();

    let mut adj = vec![Vec::new(); attrs.len()];
    for fd in sigma.fds() {
        for l in fd.lhs() {
            adj[pos[l.as_str()]].push(pos[fd.rhs()]);
        }
    }
    let mut cycle_breaks = Vec::new();
    let mut used_overrides = BTreeSet::new();
    for comp in tarjan_scc(&adj) {
        if comp.len() < 2 {
            continue;
        }
        let members: BTreeSet<&str> = comp.iter().map(|&i| attrs[i].as_str()).collect();
        let entered = sigma.fds().iter().any(|fd| {
            members.contains(fd.rhs()) && fd.lhs().iter().all(|l| !members.contains(l.as_str()))
        });
        if entered {
            continue;
        }
        let chosen = match overrides.iter().find(|o| members.contains(o.as_str())) {
            Some(o) => o.clone(),
            None => {
                let mut best: Option<(usize, &str)> = None;
                for &m in &members {
                    let col = inst
                        .attr_index(m)
                        .ok_or_else(|| Error::UnknownAttribute(m.to_owned()))?;
                    let d = inst.column(col).distinct_count();
                    if best.is_none_or(|(bd, _)| d > bd) {
                        best = Some((d, m));
                    }
                }
                best.expect("non-empty cycle").1.to_owned()
            }
        };
        used_overrides.insert(chosen.clone());
        bound.insert(chosen.clone());
        cycle_breaks.push(CycleBreak {
            cycle: members.iter().map(|s| s.to_string()).collect(),
            chosen,
        });
    }
    if let Some(unused) = overrides.iter().find(|o| !used_overrides.contains(*o)) {
        return Err(Error::InvalidArgument(format!(
            "`{unused}` is not a member of a cycle that needs a bound attribute"
        )));
    }
    cycle_breaks.sort_by(|a, b| a.cycle.cmp(&b.cycle));

    let free = attrs
        .iter()
        .filter(|a| !bound.contains(*a))
        .cloned()
        .collect();
    Ok(AttributeClassification {
        bound,
        free,
        cycle_breaks,
    })
}
