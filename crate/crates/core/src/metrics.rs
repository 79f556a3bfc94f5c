//! Instance quality, repair gain and precision/recall against ground truth.

use rustc_hash::FxHashMap;
use serde::Serialize;

use crate::error::Result;
use crate::fd::Sigma;
use crate::instance::Instance;
use crate::violations::{check_shape, key_of, Key};

/// Sum over tuples and FDs of the frequency of each tuple's pattern in `inst`
/// itself, i.e. the sum of squared pattern frequencies.
pub fn instance_quality(inst: &Instance, sigma: &Sigma) -> Result<u64> {
    let bound = sigma.bind(inst.schema())?;
    let mut total = 0u64;
    for fd in &bound.fds {
        if let &[c] = fd.lhs.as_slice() {
            let mut freq: FxHashMap<(u32, u32), u64> = FxHashMap::default();
            for row in 0..inst.len() {
                *freq
                    .entry((inst.code(row, c), inst.code(row, fd.rhs)))
                    .or_default() += 1;
            }
            total += freq.values().map(|f| f * f).sum::<u64>();
            continue;
        }
        let mut freq: FxHashMap<(Key, u32), u64> = FxHashMap::default();
        for row in 0..inst.len() {
            *freq
                .entry((key_of(inst, row, &fd.lhs), inst.code(row, fd.rhs)))
                .or_default() += 1;
        }
        total += freq.values().map(|f| f * f).sum::<u64>();
    }
    Ok(total)
}

/// `Q(repaired) - Q(original)`.
pub fn gain(repaired: &Instance, original: &Instance, sigma: &Sigma) -> Result<i64> {
    check_shape(repaired, original)?;
    Ok(instance_quality(repaired, sigma)? as i64 - instance_quality(original, sigma)? as i64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct EvaluationReport {
    pub precision: f64,
    pub recall: f64,
    /// No cell was changed; precision defaults to 1.
    pub precision_vacuous: bool,
    /// The dirty instance had no errors; recall defaults to 1.
    pub recall_vacuous: bool,
    pub changed_cells: usize,
    pub dirty_cells: usize,
    pub correct_changed: usize,
    pub gain: i64,
    pub cost: usize,
}

pub fn evaluate(
    dirty: &Instance,
    repaired: &Instance,
    clean: &Instance,
    sigma: &Sigma,
) -> Result<EvaluationReport> {
    check_shape(dirty, repaired)?;
    check_shape(dirty, clean)?;
    let (mut changed, mut errors, mut correct) = (0, 0, 0);
    for row in 0..dirty.len() {
        for col in 0..dirty.arity() {
            let d = dirty.value(row, col);
            let r = repaired.value(row, col);
            let c = clean.value(row, col);
            if d != c {
                errors += 1;
            }
            if d != r {
                changed += 1;
                if r == c {
                    correct += 1;
                }
            }
        }
    }
    let ratio = |num: usize, den: usize| {
        if den == 0 {
            1.0
        } else {
            num as f64 / den as f64
        }
    };
    Ok(EvaluationReport {
        precision: ratio(correct, changed),
        recall: ratio(correct, errors),
        precision_vacuous: changed == 0,
        recall_vacuous: errors == 0,
        changed_cells: changed,
        dirty_cells: errors,
        correct_changed: correct,
        gain: gain(repaired, dirty, sigma)?,
        cost: changed,
    })
}
