use rustc_hash::FxHashMap;
use serde::Serialize;
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::fd::{BoundFd, FdId, Sigma};
use crate::instance::Instance;

pub(crate) type Key = SmallVec<[u32; 2]>;

pub(crate) fn key_of(inst: &Instance, row: usize, cols: &[usize]) -> Key {
    cols.iter().map(|&c| inst.code(row, c)).collect()
}

/// Tuples sharing one left-hand-side value but disagreeing on the right-hand side.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ViolationGroup {
    pub fd: FdId,
    pub lhs_value: Vec<String>,
    pub tuple_indices: Vec<usize>,
    pub rhs_values: Vec<String>,
}

fn groups_for(inst: &Instance, fd: &BoundFd) -> Vec<(usize, Vec<usize>)> {
    let mut index: FxHashMap<Key, usize> = FxHashMap::default();
    let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
    for row in 0..inst.len() {
        let key = key_of(inst, row, &fd.lhs);
        let g = *index.entry(key).or_insert_with(|| {
            groups.push((row, Vec::new()));
            groups.len() - 1
        });
        groups[g].1.push(row);
    }
    groups
}

pub fn detect_violations(inst: &Instance, sigma: &Sigma) -> Result<Vec<ViolationGroup>> {
    let bound = sigma.bind(inst.schema())?;
    let mut out = Vec::new();
    for fd in &bound.fds {
        for (first, rows) in groups_for(inst, fd) {
            let mut rhs: Vec<u32> = Vec::new();
            for &r in &rows {
                let c = inst.code(r, fd.rhs);
                if !rhs.contains(&c) {
                    rhs.push(c);
                }
            }
            if rhs.len() < 2 {
                continue;
            }
            let dict = inst.column(fd.rhs).dictionary();
            out.push(ViolationGroup {
                fd: fd.id,
                lhs_value: fd
                    .lhs
                    .iter()
                    .map(|&c| inst.value(first, c).to_owned())
                    .collect(),
                tuple_indices: rows,
                rhs_values: rhs.iter().map(|&c| dict.value(c).to_owned()).collect(),
            });
        }
    }
    Ok(out)
}

/// `I |= Σ`.
pub fn satisfies(inst: &Instance, sigma: &Sigma) -> Result<bool> {
    let bound = sigma.bind(inst.schema())?;
    Ok(bound.fds.iter().all(|fd| fd_holds(inst, fd)))
}

pub(crate) fn fd_holds(inst: &Instance, fd: &BoundFd) -> bool {
    let mut seen: FxHashMap<Key, u32> = FxHashMap::default();
    (0..inst.len()).all(|row| {
        let rhs = inst.code(row, fd.rhs);
        *seen.entry(key_of(inst, row, &fd.lhs)).or_insert(rhs) == rhs
    })
}

/// A cell `(tuple, attribute)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Cell {
    pub tuple: usize,
    pub attribute: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Delta {
    pub cells: Vec<Cell>,
    pub cost: usize,
}

/// Cells whose values differ between two instances of the same shape.
pub fn delta(a: &Instance, b: &Instance) -> Result<Delta> {
    check_shape(a, b)?;
    let mut cells = Vec::new();
    for row in 0..a.len() {
        for col in 0..a.arity() {
            if a.value(row, col) != b.value(row, col) {
                cells.push(Cell {
                    tuple: row,
                    attribute: a.schema()[col].clone(),
                });
            }
        }
    }
    let cost = cells.len();
    Ok(Delta { cells, cost })
}

pub(crate) fn check_shape(a: &Instance, b: &Instance) -> Result<()> {
    if a.schema() != b.schema() {
        return Err(Error::ShapeMismatch(format!(
            "schemas differ: {:?} vs {:?}",
            a.schema(),
            b.schema()
        )));
    }
    if a.len() != b.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} tuples vs {} tuples",
            a.len(),
            b.len()
        )));
    }
    Ok(())
}
