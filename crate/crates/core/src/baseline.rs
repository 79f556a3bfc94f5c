//! Naive reference repair: every violating group is overwritten with one of
//! its right-hand values picked at random.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustc_hash::FxHashMap;

use crate::error::Result;
use crate::fd::Sigma;
use crate::instance::Instance;
use crate::violations::{fd_holds, key_of, Key};

/// Most passes over Σ before giving up on reaching consistency.
pub const MAX_PASSES: usize = 10;

pub fn random_repair(inst: &Instance, sigma: &Sigma, seed: u64) -> Result<Instance> {
    let bound = sigma.bind(inst.schema())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = inst.clone();
    for _ in 0..MAX_PASSES {
        if bound.fds.iter().all(|fd| fd_holds(&out, fd)) {
            break;
        }
        for fd in &bound.fds {
            let mut groups: FxHashMap<Key, usize> = FxHashMap::default();
            let mut members: Vec<(Vec<usize>, Vec<u32>)> = Vec::new();
            for row in 0..out.len() {
                let g = *groups.entry(key_of(&out, row, &fd.lhs)).or_insert_with(|| {
                    members.push((Vec::new(), Vec::new()));
                    members.len() - 1
                });
                let (rows, values) = &mut members[g];
                rows.push(row);
                let v = out.code(row, fd.rhs);
                if !values.contains(&v) {
                    values.push(v);
                }
            }
            for (rows, values) in members {
                if values.len() < 2 {
                    continue;
                }
                let v = values[rng.random_range(0..values.len())];
                for r in rows {
                    out.set_code(r, fd.rhs, v);
                }
            }
        }
    }
    Ok(out)
}
