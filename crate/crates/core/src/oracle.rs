//! Exhaustive search for the best pattern-preserving repair of tiny instances.
//!
//! The search assigns, FD by FD, a single right-hand value to every
//! left-hand value it meets, using the same bound/free classification, FD
//! order and chase rules as [`crate::repair`], but branching over the whole
//! active domain of the right-hand attribute wherever the chase would pick
//! an edge. Branches that contradict an earlier assignment are pruned, so
//! every leaf satisfies Σ. Leaves are scored by instance quality.

use std::collections::{BTreeMap, BTreeSet};

use rustc_hash::FxHashMap;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fd::{BoundFd, FdId, Sigma};
use crate::fd_graph::{build_fd_graph, classify_attributes, compute_sccs, order_fds_anchored};
use crate::instance::Instance;
use crate::metrics::instance_quality;
use crate::violations::Key;

const NONE: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct OracleLimits {
    /// Refuse when the estimate exceeds this, and abort when the search visits more states.
    pub max_states: u64,
    /// Cycle-break overrides, as for the repair engine.
    pub bound: Vec<String>,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits {
            max_states: 10_000_000,
            bound: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct OracleResult {
    pub best_gain: i64,
    pub quality_before: u64,
    /// Every distinct repair attaining `best_gain`.
    pub best_repairs: Vec<Instance>,
    /// Fewest changed cells among the best repairs.
    pub min_cost: usize,
    pub min_cost_repairs: Vec<Instance>,
    /// Highest gain reached at each cost.
    pub gain_by_cost: BTreeMap<usize, i64>,
    /// Search states visited.
    pub searched: u64,
    /// Most distinct values of any attribute of Σ.
    pub d: usize,
    /// `d^|attr(Σ)|`.
    pub estimate: f64,
}

pub fn brute_force_optimal(
    inst: &Instance,
    sigma: &Sigma,
    limits: &OracleLimits,
) -> Result<OracleResult> {
    let bound = sigma.bind(inst.schema())?;
    let d = bound
        .attr_columns
        .iter()
        .map(|&c| inst.column(c).distinct_count())
        .max()
        .unwrap_or(0);
    let estimate = (d as f64).powi(bound.attr_columns.len() as i32);
    if estimate > limits.max_states as f64 {
        return Err(Error::SearchSpaceExceeded {
            estimate,
            limit: limits.max_states,
        });
    }

    let cls = classify_attributes(sigma, inst, &limits.bound)?;
    let order = order_fds_anchored(sigma, &compute_sccs(&build_fd_graph(sigma)), &cls);
    let mut domains = vec![Vec::new(); inst.arity()];
    for &c in &bound.attr_columns {
        let dict = inst.column(c).dictionary();
        let mut dom = inst.column(c).active_domain();
        dom.sort_by(|&a, &b| dict.value(a).cmp(dict.value(b)));
        domains[c] = dom;
    }
    let bound_cols = (0..inst.arity())
        .filter(|&c| cls.is_bound(&inst.schema()[c]))
        .collect();
    let quality_before = instance_quality(inst, sigma)?;

    let mut search = Search {
        inst,
        fds: &bound.fds,
        sequence: order.sequence().collect(),
        attr_columns: &bound.attr_columns,
        bound_cols,
        domains,
        limit: limits.max_states,
        tables: vec![FxHashMap::default(); bound.fds.len()],
        cur: vec![NONE; inst.arity()],
        done: Vec::with_capacity(inst.len()),
        searched: 0,
        quality_before,
        best_gain: i64::MIN,
        best: BTreeSet::new(),
        gain_by_cost: BTreeMap::new(),
    };
    search.start_row(0);
    search.visit(0, 0)?;

    let (searched, best_gain, best, gain_by_cost) = (
        search.searched,
        search.best_gain,
        search.best,
        search.gain_by_cost,
    );
    let build = |cells: &Vec<u32>| {
        let mut out = inst.clone();
        let a = inst.arity();
        for row in 0..inst.len() {
            for &c in &bound.attr_columns {
                out.set_code(row, c, cells[row * a + c]);
            }
        }
        out
    };
    let cost_of = |r: &Instance| -> usize {
        (0..inst.len())
            .map(|row| {
                bound
                    .attr_columns
                    .iter()
                    .filter(|&&c| r.code(row, c) != inst.code(row, c))
                    .count()
            })
            .sum()
    };
    let mut best_repairs: Vec<Instance> = best.iter().map(build).collect();
    best_repairs.sort_by_key(|r| r.to_csv_string());
    let min_cost = best_repairs.iter().map(cost_of).min().unwrap_or(0);
    let min_cost_repairs = best_repairs
        .iter()
        .filter(|r| cost_of(r) == min_cost)
        .cloned()
        .collect();
    Ok(OracleResult {
        best_gain: if best_repairs.is_empty() {
            0
        } else {
            best_gain
        },
        quality_before,
        best_repairs,
        min_cost,
        min_cost_repairs,
        gain_by_cost,
        searched,
        d,
        estimate,
    })
}

struct Search<'a> {
    inst: &'a Instance,
    fds: &'a [BoundFd],
    sequence: Vec<FdId>,
    attr_columns: &'a [usize],
    bound_cols: Vec<usize>,
    domains: Vec<Vec<u32>>,
    limit: u64,
    tables: Vec<FxHashMap<Key, u32>>,
    cur: Vec<u32>,
    done: Vec<Vec<u32>>,
    searched: u64,
    quality_before: u64,
    best_gain: i64,
    best: BTreeSet<Vec<u32>>,
    gain_by_cost: BTreeMap<usize, i64>,
}

impl Search<'_> {
    fn start_row(&mut self, row: usize) {
        self.cur.fill(NONE);
        if row < self.inst.len() {
            for &c in &self.bound_cols {
                self.cur[c] = self.inst.code(row, c);
            }
        }
    }

    fn visit(&mut self, row: usize, k: usize) -> Result<()> {
        self.searched += 1;
        if self.searched > self.limit {
            return Err(Error::SearchSpaceExceeded {
                estimate: self.searched as f64,
                limit: self.limit,
            });
        }
        if row == self.inst.len() {
            self.leaf();
            return Ok(());
        }
        if k == self.sequence.len() {
            let saved = self.cur.clone();
            self.done.push(saved.clone());
            self.start_row(row + 1);
            let r = self.visit(row + 1, 0);
            self.done.pop();
            self.cur = saved;
            return r;
        }

        let fd = &self.fds[self.sequence[k]];
        let mut pinned: Vec<usize> = Vec::new();
        for &c in &fd.key {
            if self.cur[c] == NONE {
                self.cur[c] = self.inst.code(row, c);
                pinned.push(c);
            }
        }
        let lkey: Key = fd.key.iter().map(|&c| self.cur[c]).collect();
        let (id, rhs) = (fd.id, fd.rhs);
        let current = self.cur[rhs];
        let result = match self.tables[id].get(&lkey).copied() {
            Some(r) if current == NONE => {
                self.cur[rhs] = r;
                let res = self.visit(row, k + 1);
                self.cur[rhs] = NONE;
                res
            }
            Some(r) if current == r => self.visit(row, k + 1),
            Some(_) => Ok(()),
            None if current != NONE => {
                self.tables[id].insert(lkey.clone(), current);
                let res = self.visit(row, k + 1);
                self.tables[id].remove(&lkey);
                res
            }
            None => {
                let mut res = Ok(());
                for i in 0..self.domains[rhs].len() {
                    let v = self.domains[rhs][i];
                    self.tables[id].insert(lkey.clone(), v);
                    self.cur[rhs] = v;
                    res = self.visit(row, k + 1);
                    if res.is_err() {
                        break;
                    }
                }
                self.cur[rhs] = NONE;
                self.tables[id].remove(&lkey);
                res
            }
        };
        for c in pinned {
            self.cur[c] = NONE;
        }
        result
    }

    fn leaf(&mut self) {
        let mut quality = 0u64;
        for fd in self.fds {
            let mut freq: FxHashMap<(Key, u32), u64> = FxHashMap::default();
            for row in &self.done {
                let key: Key = fd.lhs.iter().map(|&c| row[c]).collect();
                *freq.entry((key, row[fd.rhs])).or_default() += 1;
            }
            quality += freq.values().map(|f| f * f).sum::<u64>();
        }
        let gain = quality as i64 - self.quality_before as i64;
        let a = self.inst.arity();
        let mut cells = Vec::with_capacity(self.done.len() * a);
        let mut cost = 0;
        for (row, vals) in self.done.iter().enumerate() {
            for (c, &val) in vals.iter().enumerate().take(a) {
                let orig = self.inst.code(row, c);
                let v = if self.attr_columns.contains(&c) {
                    val
                } else {
                    orig
                };
                if v != orig {
                    cost += 1;
                }
                cells.push(v);
            }
        }
        let at_cost = self.gain_by_cost.entry(cost).or_insert(gain);
        *at_cost = (*at_cost).max(gain);
        if gain > self.best_gain {
            self.best_gain = gain;
            self.best.clear();
        }
        if gain == self.best_gain {
            self.best.insert(cells);
        }
    }
}
