//! Tuple-at-a-time chase over the instance graph.
//!
//! FDs are processed in [`FdOrder`] sequence. For each tuple and FD the
//! left-hand value comes from the values resolved so far (bound attributes
//! from the tuple, free attributes from earlier steps). Per-FD repair tables
//! map every left-hand value seen so far to a single right-hand value, so
//! tuples agreeing on a left-hand side are repaired alike:
//!
//! 1. a repair-table hit reuses the recorded value;
//! 2. if the right-hand attribute is already resolved, that value is recorded;
//! 3. otherwise an out-edge of the left-hand node is chosen by the strategy.
//!
//! Candidates that would contradict a table entry of an FD still to be
//! processed for the tuple are skipped when an alternative exists. If a
//! table entry contradicts an already resolved value, the earlier FD wins and
//! a [`ConflictRecord`] is emitted.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rustc_hash::FxHashMap;
use serde::Serialize;
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::fd::{BoundFd, FdId, Sigma};
use crate::fd_graph::{
    build_fd_graph, classify_attributes, compute_sccs, order_fds_anchored, AttributeClassification,
    FdOrder,
};
use crate::instance::Instance;
use crate::instance_graph::{
    build_instance_graph, compute_pattern_quality, EdgeId, GraphOptions, InstanceGraph, NodeId,
};
use crate::metrics::instance_quality;
use crate::patterns::{best_cover_quality, FdPattern, PatternExpression};
use crate::violations::Key;

const NONE: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StrategyKind {
    Greedy,
    Rc,
    Hybrid,
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StrategyKind::Greedy => "greedy",
            StrategyKind::Rc => "rc",
            StrategyKind::Hybrid => "hybrid",
        })
    }
}

impl FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "greedy" => Ok(StrategyKind::Greedy),
            "rc" => Ok(StrategyKind::Rc),
            "hybrid" => Ok(StrategyKind::Hybrid),
            other => Err(Error::InvalidArgument(format!(
                "unknown strategy `{other}`"
            ))),
        }
    }
}

/// Edge-selection strategy. `theta` is set only for Hybrid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Strategy {
    pub kind: StrategyKind,
    pub theta: Option<f64>,
}

impl Strategy {
    pub const DEFAULT_THETA: f64 = 0.5;

    /// Highest-quality out-edge.
    pub fn greedy() -> Self {
        Strategy {
            kind: StrategyKind::Greedy,
            theta: None,
        }
    }

    /// Out-edge whose right-hand node has the best repair cover.
    pub fn rc() -> Self {
        Strategy {
            kind: StrategyKind::Rc,
            theta: None,
        }
    }

    /// Greedy when the best adjacent edge reaches `theta`, RC otherwise.
    pub fn hybrid(theta: f64) -> Self {
        Strategy {
            kind: StrategyKind::Hybrid,
            theta: Some(theta),
        }
    }

    pub fn from_kind(kind: StrategyKind, theta: Option<f64>) -> Result<Self> {
        match kind {
            StrategyKind::Greedy | StrategyKind::Rc if theta.is_some() => Err(
                Error::InvalidArgument(format!("theta applies only to hybrid, not {kind}")),
            ),
            StrategyKind::Greedy => Ok(Self::greedy()),
            StrategyKind::Rc => Ok(Self::rc()),
            StrategyKind::Hybrid => {
                let t = theta.unwrap_or(Self::DEFAULT_THETA);
                if !(0.0..=1.0).contains(&t) {
                    return Err(Error::InvalidArgument(format!(
                        "theta {t} is outside [0, 1]"
                    )));
                }
                Ok(Self::hybrid(t))
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RepairConfig {
    /// Attributes to promote to bound when breaking FD cycles.
    pub bound: Vec<String>,
    pub graph: GraphOptions,
    /// Keep a per-tuple decision log for [`explain`].
    pub record_trace: bool,
}

/// How one FD step of the chase was resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    /// The repair table already maps this left-hand value.
    TableHit,
    /// The right-hand attribute was resolved by a bound value or an earlier FD.
    RhsResolved,
    /// The strategy chose an out-edge.
    EdgeSelection,
    /// No admissible edge; the value committed by a sibling FD was used.
    ForcedBySibling,
    /// The left-hand value has no out-edge; the tuple's own value was kept.
    Fallback,
    /// The repair table disagrees with the already resolved value, which is kept.
    Conflict,
}

#[derive(Debug, Clone, Copy)]
struct Step {
    rhs: u32,
    edge: u32,
    branch: Branch,
}

/// Changed cell: row, column and the code it held before the repair.
#[derive(Debug, Clone, Copy)]
struct Delta {
    row: u32,
    col: u32,
    old: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CellChange {
    pub tuple: usize,
    pub attribute: String,
    pub old: String,
    pub new: String,
}

/// A tuple whose FD step contradicted a value fixed earlier in its chase.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ConflictRecord {
    pub tuple: usize,
    pub fd: FdId,
    pub lhs: Vec<String>,
    pub table_value: String,
    pub kept_value: String,
    /// FD that fixed the kept value; `None` when it is a bound value.
    pub kept_by_fd: Option<FdId>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Candidate {
    pub rhs: String,
    pub edge: EdgeId,
    pub quality: f64,
    pub cover_quality: Option<f64>,
    pub admissible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TraceStep {
    pub fd: FdId,
    pub order: usize,
    pub lhs: Vec<String>,
    pub branch: Branch,
    /// Strategy that made the choice (Hybrid resolves to Greedy or RC).
    pub strategy: Option<StrategyKind>,
    pub candidates: Vec<Candidate>,
    pub chosen: String,
    pub edge: Option<EdgeId>,
    pub warning: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TupleTrace {
    pub tuple: usize,
    pub steps: Vec<TraceStep>,
    pub conflicts: Vec<ConflictRecord>,
    pub changes: Vec<CellChange>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RepairStats {
    pub cost: usize,
    pub gain: i64,
    pub quality_before: u64,
    pub quality_after: u64,
    pub fallbacks: usize,
    pub forced: usize,
}

#[derive(Debug, Clone)]
pub struct RepairResult {
    pub repaired: Instance,
    pub conflicts: Vec<ConflictRecord>,
    pub stats: RepairStats,
    pub classification: AttributeClassification,
    pub order: FdOrder,
    pub strategy: Strategy,
    pub config: RepairConfig,
    graph: InstanceGraph,
    sigma: Sigma,
    sequence: Vec<FdId>,
    steps: Vec<Step>,
    deltas: Vec<Delta>,
    traces: Option<Vec<TupleTrace>>,
}

impl RepairResult {
    pub fn graph(&self) -> &InstanceGraph {
        &self.graph
    }

    pub fn sigma(&self) -> &Sigma {
        &self.sigma
    }

    /// Changed cells in row-major order.
    pub fn changes(&self) -> impl Iterator<Item = CellChange> + '_ {
        self.deltas.iter().map(|d| self.change(d))
    }

    fn change(&self, d: &Delta) -> CellChange {
        let (row, col) = (d.row as usize, d.col as usize);
        CellChange {
            tuple: row,
            attribute: self.repaired.schema()[col].clone(),
            old: self
                .repaired
                .column(col)
                .dictionary()
                .value(d.old)
                .to_owned(),
            new: self.repaired.value(row, col).to_owned(),
        }
    }

    pub fn traces(&self) -> Option<&[TupleTrace]> {
        self.traces.as_deref()
    }

    /// Pattern expression of tuple `tuple`.
    pub fn expression(&self, tuple: usize) -> Result<PatternExpression> {
        let len = self.repaired.len();
        if tuple >= len {
            return Err(Error::TupleOutOfRange { index: tuple, len });
        }
        let m = self.sequence.len();
        let simple = self.sequence.iter().enumerate().map(|(k, &fd)| {
            let step = self.steps[tuple * m + k];
            let f = self.sigma.fd(fd);
            let col = self.repaired.attr_index(f.rhs()).expect("bound attribute");
            let rhs = self.repaired.column(col).dictionary().value(step.rhs);
            let mut p = FdPattern::simple(
                fd,
                f.lhs()
                    .iter()
                    .map(|a| {
                        (
                            a.clone(),
                            self.repaired.get(tuple, a).expect("bound attribute"),
                        )
                    })
                    .chain(std::iter::once((f.rhs().to_owned(), rhs))),
            );
            if step.edge != NONE {
                p.edges.insert(step.edge as EdgeId);
            }
            p
        });
        Ok(PatternExpression::compose_all(tuple, simple))
    }

    pub fn expressions(&self) -> impl Iterator<Item = PatternExpression> + '_ {
        (0..self.repaired.len()).map(|t| self.expression(t).expect("in range"))
    }

    /// Branch taken at each FD step of `tuple`, in processing sequence.
    pub fn branches(&self, tuple: usize) -> Vec<(FdId, Branch)> {
        let m = self.sequence.len();
        self.sequence
            .iter()
            .enumerate()
            .map(|(k, &fd)| (fd, self.steps[tuple * m + k].branch))
            .collect()
    }
}

/// Decision log of one tuple; requires `record_trace`.
pub fn explain(r: &RepairResult, tuple: usize) -> Result<&TupleTrace> {
    let len = r.repaired.len();
    if tuple >= len {
        return Err(Error::TupleOutOfRange { index: tuple, len });
    }
    r.traces
        .as_ref()
        .map(|t| &t[tuple])
        .ok_or(Error::TraceUnavailable)
}

pub fn repair(
    inst: &Instance,
    sigma: &Sigma,
    strategy: Strategy,
    cfg: &RepairConfig,
) -> Result<RepairResult> {
    let bound = sigma.bind(inst.schema())?;
    let classification = classify_attributes(sigma, inst, &cfg.bound)?;
    let scc = compute_sccs(&build_fd_graph(sigma));
    let order = order_fds_anchored(sigma, &scc, &classification);
    let mut graph = build_instance_graph(inst, sigma, cfg.graph)?;
    compute_pattern_quality(&mut graph, &order);

    let sequence: Vec<FdId> = order.sequence().collect();
    let order_of = order.order_of();
    let mut chase = Chase::new(
        inst,
        &graph,
        &bound.fds,
        &sequence,
        &classification,
        strategy,
    );
    let mut repaired = inst.clone();
    let mut deltas = Vec::new();
    let mut conflicts = Vec::new();
    let mut steps = Vec::with_capacity(inst.len() * sequence.len());
    let mut traces = cfg.record_trace.then(Vec::new);

    for row in 0..inst.len() {
        let mut trace = traces.as_ref().map(|_| Vec::new());
        let before = conflicts.len();
        chase.run(row, &mut steps, &mut conflicts, trace.as_mut(), &order_of);
        let first_change = deltas.len();
        for &c in &bound.attr_columns {
            let (v, old) = (chase.res[c], inst.code(row, c));
            if v != old {
                repaired.set_code(row, c, v);
                deltas.push(Delta {
                    row: row as u32,
                    col: c as u32,
                    old,
                });
            }
        }
        if let (Some(all), Some(steps)) = (traces.as_mut(), trace) {
            let changes = deltas[first_change..]
                .iter()
                .map(|d| CellChange {
                    tuple: row,
                    attribute: inst.schema()[d.col as usize].clone(),
                    old: inst.value(row, d.col as usize).to_owned(),
                    new: repaired.value(row, d.col as usize).to_owned(),
                })
                .collect();
            all.push(TupleTrace {
                tuple: row,
                steps,
                conflicts: conflicts[before..].to_vec(),
                changes,
            });
        }
    }

    let quality_before = instance_quality(inst, sigma)?;
    let quality_after = instance_quality(&repaired, sigma)?;
    let stats = RepairStats {
        cost: deltas.len(),
        gain: quality_after as i64 - quality_before as i64,
        quality_before,
        quality_after,
        fallbacks: chase.fallbacks,
        forced: chase.forced,
    };
    drop(chase);
    Ok(RepairResult {
        repaired,
        conflicts,
        stats,
        classification,
        order,
        strategy,
        config: cfg.clone(),
        graph,
        sigma: sigma.clone(),
        sequence,
        steps,
        deltas,
        traces,
    })
}

/// Repair table of one FD: left-hand codes to the chosen right-hand code and its edge.
enum Table {
    /// Indexed by the code of a single left-hand attribute.
    Dense(Vec<(u32, u32)>),
    Sparse(FxHashMap<Key, (u32, u32)>),
}

impl Table {
    fn get(&self, key: &[u32]) -> Option<(u32, u32)> {
        match self {
            Table::Dense(slots) => slots.get(key[0] as usize).copied().filter(|s| s.0 != NONE),
            Table::Sparse(map) => map.get(key).copied(),
        }
    }

    fn insert(&mut self, key: &[u32], entry: (u32, u32)) {
        match self {
            Table::Dense(slots) => slots[key[0] as usize] = entry,
            Table::Sparse(map) => {
                map.insert(Key::from_slice(key), entry);
            }
        }
    }
}

struct Chase<'a> {
    inst: &'a Instance,
    g: &'a InstanceGraph,
    fds: &'a [BoundFd],
    sequence: &'a [FdId],
    cls: &'a AttributeClassification,
    strategy: Strategy,
    bound_cols: Vec<usize>,
    /// Later sequence positions sharing the right-hand attribute.
    siblings_after: Vec<Vec<usize>>,
    /// Later sequence positions whose left-hand side contains this right-hand attribute.
    feeds_after: Vec<Vec<usize>>,
    tables: Vec<Table>,
    covers: Vec<Option<Option<f64>>>,
    res: Vec<u32>,
    setter: Vec<Option<FdId>>,
    fallbacks: usize,
    forced: usize,
}

impl<'a> Chase<'a> {
    fn new(
        inst: &'a Instance,
        g: &'a InstanceGraph,
        fds: &'a [BoundFd],
        sequence: &'a [FdId],
        cls: &'a AttributeClassification,
        strategy: Strategy,
    ) -> Self {
        let m = sequence.len();
        let mut siblings_after = vec![Vec::new(); m];
        let mut feeds_after = vec![Vec::new(); m];
        for k in 0..m {
            let f = &fds[sequence[k]];
            for (j, &other) in sequence.iter().enumerate().skip(k + 1) {
                let g = &fds[other];
                if g.rhs == f.rhs {
                    siblings_after[k].push(j);
                }
                if g.key.contains(&f.rhs) {
                    feeds_after[k].push(j);
                }
            }
        }
        let bound_cols = inst
            .schema()
            .iter()
            .enumerate()
            .filter(|(_, a)| cls.is_bound(a))
            .map(|(c, _)| c)
            .collect();
        Chase {
            inst,
            g,
            fds,
            sequence,
            cls,
            strategy,
            bound_cols,
            siblings_after,
            feeds_after,
            tables: fds
                .iter()
                .map(|fd| match fd.key.as_slice() {
                    &[c] => Table::Dense(vec![(NONE, NONE); inst.column(c).dictionary().len()]),
                    _ => Table::Sparse(FxHashMap::default()),
                })
                .collect(),
            covers: vec![None; g.nodes().len()],
            res: vec![NONE; inst.arity()],
            setter: vec![None; inst.arity()],
            fallbacks: 0,
            forced: 0,
        }
    }

    fn key(&self, fd: &BoundFd) -> Option<Key> {
        fd.key
            .iter()
            .map(|&c| (self.res[c] != NONE).then_some(self.res[c]))
            .collect()
    }

    /// Graph edge for the pattern `(fd, lkey -> rhs)`, or `NONE`.
    fn edge_of(&self, fd: FdId, lkey: &[u32], rhs: u32) -> u32 {
        self.g
            .pattern_edge(fd, lkey, rhs)
            .map_or(NONE, |e| e as u32)
    }

    fn value(&self, col: usize, code: u32) -> String {
        self.inst.column(col).dictionary().value(code).to_owned()
    }

    /// Would choosing `r` for the step at position `k` contradict a table
    /// entry of a later FD whose other attributes are already resolved?
    fn admissible(&self, k: usize, r: u32) -> bool {
        let y = self.fds[self.sequence[k]].rhs;
        for &j in &self.siblings_after[k] {
            let g = &self.fds[self.sequence[j]];
            if let Some(key) = self.key(g) {
                if self.tables[g.id].get(&key).is_some_and(|(s, _)| s != r) {
                    return false;
                }
            }
        }
        for &j in &self.feeds_after[k] {
            let g = &self.fds[self.sequence[j]];
            let z = self.res[g.rhs];
            if z == NONE {
                continue;
            }
            let key: Option<Key> = g
                .key
                .iter()
                .map(|&c| {
                    if c == y {
                        Some(r)
                    } else {
                        (self.res[c] != NONE).then_some(self.res[c])
                    }
                })
                .collect();
            if let Some(key) = key {
                if self.tables[g.id].get(&key).is_some_and(|(v, _)| v != z) {
                    return false;
                }
            }
        }
        true
    }

    /// Value already committed for this tuple's left-hand side by a later sibling FD.
    fn sibling_value(&self, k: usize) -> Option<u32> {
        self.siblings_after[k].iter().find_map(|&j| {
            let g = &self.fds[self.sequence[j]];
            let key = self.key(g)?;
            self.tables[g.id].get(&key).map(|(v, _)| v)
        })
    }

    fn cover(&mut self, node: NodeId) -> Option<f64> {
        if let Some(c) = self.covers[node] {
            return c;
        }
        let c = best_cover_quality(node, self.g, self.cls);
        self.covers[node] = Some(c);
        c
    }

    fn rhs_cmp(&self, a: EdgeId, b: EdgeId) -> Ordering {
        self.g.rhs_value(a).cmp(self.g.rhs_value(b))
    }

    fn quality(&self, e: EdgeId) -> f64 {
        self.g.edge(e).quality
    }

    fn pick_greedy(&self, cands: &[EdgeId]) -> EdgeId {
        *cands
            .iter()
            .min_by(|&&a, &&b| {
                self.quality(b)
                    .partial_cmp(&self.quality(a))
                    .unwrap_or(Ordering::Equal)
                    .then_with(|| self.rhs_cmp(a, b))
            })
            .expect("non-empty candidates")
    }

    fn pick_rc(&mut self, cands: &[EdgeId]) -> EdgeId {
        let scored: Vec<(EdgeId, f64)> = cands
            .iter()
            .map(|&e| {
                let to = self.g.edge(e).to;
                (e, self.cover(to).unwrap_or(self.quality(e)))
            })
            .collect();
        scored
            .iter()
            .min_by(|&&(a, sa), &&(b, sb)| {
                sb.partial_cmp(&sa)
                    .unwrap_or(Ordering::Equal)
                    .then_with(|| {
                        self.quality(b)
                            .partial_cmp(&self.quality(a))
                            .unwrap_or(Ordering::Equal)
                    })
                    .then_with(|| self.rhs_cmp(a, b))
            })
            .expect("non-empty candidates")
            .0
    }

    fn choose(&mut self, cands: &[EdgeId]) -> (EdgeId, StrategyKind) {
        let kind = match self.strategy.kind {
            StrategyKind::Hybrid => {
                let theta = self.strategy.theta.unwrap_or(Strategy::DEFAULT_THETA);
                let best = cands
                    .iter()
                    .map(|&e| self.quality(e))
                    .fold(f64::NEG_INFINITY, f64::max);
                if best >= theta {
                    StrategyKind::Greedy
                } else {
                    StrategyKind::Rc
                }
            }
            k => k,
        };
        let e = match kind {
            StrategyKind::Rc => self.pick_rc(cands),
            _ => self.pick_greedy(cands),
        };
        (e, kind)
    }

    fn run(
        &mut self,
        row: usize,
        steps: &mut Vec<Step>,
        conflicts: &mut Vec<ConflictRecord>,
        mut trace: Option<&mut Vec<TraceStep>>,
        order_of: &[usize],
    ) {
        self.res.fill(NONE);
        self.setter.fill(None);
        for &c in &self.bound_cols {
            self.res[c] = self.inst.code(row, c);
        }
        for k in 0..self.sequence.len() {
            let fd = &self.fds[self.sequence[k]];
            let mut warning = None;
            for &c in &fd.key {
                if self.res[c] == NONE {
                    self.res[c] = self.inst.code(row, c);
                    warning = Some(format!(
                        "left-hand attribute `{}` was unresolved; kept the tuple's value",
                        self.inst.schema()[c]
                    ));
                }
            }
            let lkey: Key = fd.key.iter().map(|&c| self.res[c]).collect();
            let current = self.res[fd.rhs];
            let mut candidates: SmallVec<[EdgeId; 8]> = SmallVec::new();
            let mut used = None;
            let (value, branch, edge) = if let Some((r, e)) = self.tables[fd.id].get(&lkey) {
                if current == NONE || current == r {
                    (r, Branch::TableHit, e)
                } else {
                    conflicts.push(ConflictRecord {
                        tuple: row,
                        fd: fd.id,
                        lhs: fd.key.iter().map(|&c| self.value(c, self.res[c])).collect(),
                        table_value: self.value(fd.rhs, r),
                        kept_value: self.value(fd.rhs, current),
                        kept_by_fd: self.setter[fd.rhs],
                    });
                    (r, Branch::Conflict, e)
                }
            } else if current != NONE {
                let e = self.edge_of(fd.id, &lkey, current);
                self.tables[fd.id].insert(&lkey, (current, e));
                (current, Branch::RhsResolved, e)
            } else {
                if let Some(node) = self.g.lhs_node(fd.id, &lkey) {
                    candidates.extend(self.g.out_edges_for(node, fd.id));
                }
                let v = if candidates.is_empty() {
                    self.fallbacks += 1;
                    warning =
                        Some("no out-edge for this left-hand value; kept the tuple's value".into());
                    (self.inst.code(row, fd.rhs), Branch::Fallback)
                } else {
                    let admissible: SmallVec<[EdgeId; 8]> = candidates
                        .iter()
                        .copied()
                        .filter(|&e| self.admissible(k, self.g.node(self.g.edge(e).to).codes[0]))
                        .collect();
                    if !admissible.is_empty() {
                        let (e, kind) = self.choose(&admissible);
                        used = Some(kind);
                        (
                            self.g.node(self.g.edge(e).to).codes[0],
                            Branch::EdgeSelection,
                        )
                    } else if let Some(s) = self.sibling_value(k) {
                        self.forced += 1;
                        warning =
                            Some("no admissible edge; used the value fixed by a sibling FD".into());
                        (s, Branch::ForcedBySibling)
                    } else {
                        let (e, kind) = self.choose(&candidates);
                        used = Some(kind);
                        (
                            self.g.node(self.g.edge(e).to).codes[0],
                            Branch::EdgeSelection,
                        )
                    }
                };
                let e = self.edge_of(fd.id, &lkey, v.0);
                self.tables[fd.id].insert(&lkey, (v.0, e));
                (v.0, v.1, e)
            };
            if self.res[fd.rhs] == NONE {
                self.res[fd.rhs] = value;
                self.setter[fd.rhs] = Some(fd.id);
            }
            steps.push(Step {
                rhs: value,
                edge,
                branch,
            });
            let edge = (edge != NONE).then_some(edge as EdgeId);
            if let Some(trace) = trace.as_deref_mut() {
                let show_cover = used == Some(StrategyKind::Rc);
                let cands = candidates
                    .iter()
                    .map(|&e| {
                        let to = self.g.edge(e).to;
                        Candidate {
                            rhs: self.g.rhs_value(e).to_owned(),
                            edge: e,
                            quality: self.quality(e),
                            cover_quality: if show_cover { self.cover(to) } else { None },
                            admissible: self.admissible(k, self.g.node(to).codes[0]),
                        }
                    })
                    .collect();
                trace.push(TraceStep {
                    fd: fd.id,
                    order: order_of[fd.id],
                    lhs: fd.key.iter().map(|&c| self.value(c, self.res[c])).collect(),
                    branch,
                    strategy: used,
                    candidates: cands,
                    chosen: self.value(fd.rhs, value),
                    edge,
                    warning,
                });
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::violations::satisfies;

    fn run(inst: &Instance, sigma: &Sigma, s: Strategy) -> RepairResult {
        let cfg = RepairConfig {
            record_trace: true,
            ..Default::default()
        };
        repair(inst, sigma, s, &cfg).unwrap()
    }

    #[test]
    fn tour_all_strategies() {
        for s in [Strategy::greedy(), Strategy::rc(), Strategy::hybrid(0.5)] {
            let r = run(&fixtures::tour(), &fixtures::tour_sigma(), s);
            assert_eq!(r.repaired, fixtures::tour_r2(), "{s:?}");
            assert_eq!(r.stats.cost, 1);
            assert_eq!(r.stats.gain, 10);
            assert!(r.conflicts.is_empty());
        }
    }

    #[test]
    fn tour_rank_is_consistent() {
        let sigma = fixtures::tour_rank_sigma();
        for s in [Strategy::greedy(), Strategy::rc(), Strategy::hybrid(0.5)] {
            let r = run(&fixtures::tour_rank(), &sigma, s);
            assert!(r.conflicts.is_empty());
            assert!(satisfies(&r.repaired, &sigma).unwrap());
            assert_eq!(
                r.classification.bound.iter().collect::<Vec<_>>(),
                ["cyclist"]
            );
        }
    }

    #[test]
    fn trace_of_t1() {
        let r = run(
            &fixtures::tour(),
            &fixtures::tour_sigma(),
            Strategy::greedy(),
        );
        let t = explain(&r, 0).unwrap();
        assert_eq!(t.steps.len(), 2);
        assert_eq!(t.steps[0].branch, Branch::EdgeSelection);
        assert_eq!(t.steps[0].chosen, "Germany");
        assert_eq!(t.steps[0].candidates.len(), 2);
        assert_eq!(t.changes.len(), 1);
        assert!(matches!(explain(&r, 9), Err(Error::TupleOutOfRange { .. })));
    }

    #[test]
    fn explain_needs_trace() {
        let r = repair(
            &fixtures::tour(),
            &fixtures::tour_sigma(),
            Strategy::greedy(),
            &RepairConfig::default(),
        )
        .unwrap();
        assert!(matches!(explain(&r, 0), Err(Error::TraceUnavailable)));
    }

    #[test]
    fn strategy_parsing() {
        assert_eq!("RC".parse::<StrategyKind>().unwrap(), StrategyKind::Rc);
        assert!("best".parse::<StrategyKind>().is_err());
        assert!(Strategy::from_kind(StrategyKind::Greedy, Some(0.3)).is_err());
        assert!(Strategy::from_kind(StrategyKind::Hybrid, Some(1.5)).is_err());
        assert_eq!(
            Strategy::from_kind(StrategyKind::Hybrid, None)
                .unwrap()
                .theta,
            Some(0.5)
        );
    }
}
