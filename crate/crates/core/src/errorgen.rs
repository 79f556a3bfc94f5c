//! Seeded synthetic data generation and FD-violating error injection.

use std::collections::BTreeMap;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Zipf};
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fd::Sigma;
use crate::instance::Instance;
use crate::violations::{key_of, Key};

/// How one generated attribute draws its values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum AttrSpec {
    /// Independent draw from `cardinality` values, Zipf-skewed by `zipf` (0 = uniform).
    Root {
        cardinality: usize,
        #[serde(default)]
        zipf: f64,
    },
    /// Fixed random function of attribute `from` into `cardinality` values.
    Derived { from: String, cardinality: usize },
    /// Uniform draw outside any FD.
    Noise { cardinality: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileAttr {
    pub name: String,
    #[serde(flatten)]
    pub spec: AttrSpec,
}

/// Attributes in generation order plus the FDs the data must satisfy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub attributes: Vec<ProfileAttr>,
    /// FD lines in `A,B -> C` form.
    pub fds: Vec<String>,
}

impl Profile {
    /// Tax-records-like profile sized for `n` tuples: names, a Zipf-skewed zip
    /// code, and city, state, area code and tax rate derived from it.
    pub fn tax_like(n: usize) -> Self {
        let zip = (n / 40).max(8);
        let city = (zip / 4).max(4);
        let attr = |name: &str, spec| ProfileAttr {
            name: name.into(),
            spec,
        };
        let derived = |from: &str, cardinality| AttrSpec::Derived {
            from: from.into(),
            cardinality,
        };
        Profile {
            attributes: vec![
                attr("fname", AttrSpec::Noise { cardinality: 500 }),
                attr("lname", AttrSpec::Noise { cardinality: 1000 }),
                attr(
                    "zip",
                    AttrSpec::Root {
                        cardinality: zip,
                        zipf: 0.5,
                    },
                ),
                attr("city", derived("zip", city)),
                attr("state", derived("city", 50)),
                attr("areacode", derived("zip", (zip / 2).max(4))),
                attr("rate", derived("state", 20)),
            ],
            fds: vec![
                "zip -> city".into(),
                "city -> state".into(),
                "zip -> areacode".into(),
                "state -> rate".into(),
            ],
        }
    }

    pub fn sigma(&self) -> Result<Sigma> {
        Sigma::parse(&self.fds.join("\n"))
    }

    /// Checks names, derivation order and that every FD follows from the derivations.
    pub fn validate(&self) -> Result<Sigma> {
        let mut parent: BTreeMap<&str, Option<&str>> = BTreeMap::new();
        for a in &self.attributes {
            if parent.contains_key(a.name.as_str()) {
                return Err(Error::Profile(format!(
                    "attribute `{}` listed twice",
                    a.name
                )));
            }
            let p = match &a.spec {
                AttrSpec::Derived { from, cardinality } => {
                    if !parent.contains_key(from.as_str()) {
                        return Err(Error::Profile(format!(
                            "`{}` derives from `{from}`, which is not defined before it",
                            a.name
                        )));
                    }
                    check_cardinality(&a.name, *cardinality)?;
                    Some(from.as_str())
                }
                AttrSpec::Root { cardinality, zipf } => {
                    check_cardinality(&a.name, *cardinality)?;
                    if zipf.is_nan() || *zipf < 0.0 {
                        return Err(Error::Profile(format!(
                            "`{}` has a negative zipf exponent",
                            a.name
                        )));
                    }
                    None
                }
                AttrSpec::Noise { cardinality } => {
                    check_cardinality(&a.name, *cardinality)?;
                    None
                }
            };
            parent.insert(&a.name, p);
        }
        let sigma = self.sigma()?;
        for fd in sigma.fds() {
            for a in fd.attrs() {
                if !parent.contains_key(a) {
                    return Err(Error::Profile(format!(
                        "FD `{fd}` uses unknown attribute `{a}`"
                    )));
                }
            }
            let implied = fd.lhs().iter().any(|l| {
                let mut cur = parent[fd.rhs()];
                while let Some(p) = cur {
                    if p == l {
                        return true;
                    }
                    cur = parent[p];
                }
                false
            });
            if !implied {
                return Err(Error::Profile(format!(
                    "FD `{fd}` is not implied by the attribute derivations"
                )));
            }
        }
        Ok(sigma)
    }
}

fn check_cardinality(name: &str, c: usize) -> Result<()> {
    if c == 0 {
        return Err(Error::Profile(format!("`{name}` has cardinality 0")));
    }
    Ok(())
}

/// `n` tuples drawn from `profile`; the result satisfies the profile's FDs.
pub fn generate_synthetic(n: usize, profile: &Profile, seed: u64) -> Result<Instance> {
    profile.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names: Vec<&str> = profile.attributes.iter().map(|a| a.name.as_str()).collect();
    let index: BTreeMap<&str, usize> = names.iter().enumerate().map(|(i, &a)| (a, i)).collect();
    let labels: Vec<Vec<String>> = profile
        .attributes
        .iter()
        .map(|a| {
            let card = match a.spec {
                AttrSpec::Root { cardinality, .. }
                | AttrSpec::Derived { cardinality, .. }
                | AttrSpec::Noise { cardinality } => cardinality,
            };
            (0..card).map(|i| format!("{}{i}", a.name)).collect()
        })
        .collect();

    enum Draw {
        Zipf(Zipf<f64>),
        Uniform(usize),
        Map(usize, Vec<usize>),
    }
    let mut draws = Vec::with_capacity(names.len());
    for a in &profile.attributes {
        draws.push(match &a.spec {
            AttrSpec::Root { cardinality, zipf } if *zipf > 0.0 => Draw::Zipf(
                Zipf::new(*cardinality as f64, *zipf).map_err(|e| Error::Profile(e.to_string()))?,
            ),
            AttrSpec::Root { cardinality, .. } | AttrSpec::Noise { cardinality } => {
                Draw::Uniform(*cardinality)
            }
            AttrSpec::Derived { from, cardinality } => {
                let p = index[from.as_str()];
                let map = (0..labels[p].len())
                    .map(|_| rng.random_range(0..*cardinality))
                    .collect();
                Draw::Map(p, map)
            }
        });
    }

    let mut inst = Instance::new(&names)?;
    let mut codes = vec![0usize; names.len()];
    let mut row: Vec<&str> = vec![""; names.len()];
    for _ in 0..n {
        for (i, d) in draws.iter().enumerate() {
            codes[i] = match d {
                Draw::Zipf(z) => z.sample(&mut rng) as usize - 1,
                Draw::Uniform(c) => rng.random_range(0..*c),
                Draw::Map(p, map) => map[codes[*p]],
            };
            row[i] = &labels[i][codes[i]];
        }
        inst.push_row(&row)?;
    }
    Ok(inst)
}

/// Whether the injection rate counts tuples or cells.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InjectionUnit {
    /// `⌈rate·|T|⌉` tuples get one perturbed cell each.
    #[default]
    Tuple,
    /// `⌈rate·|T|·|attr(Σ)|⌉` distinct cells of attr(Σ) are perturbed.
    Cell,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InjectedChange {
    pub tuple: usize,
    pub attribute: String,
    pub old: String,
    pub new: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InjectionLog {
    pub seed: u64,
    pub rate: f64,
    pub unit: InjectionUnit,
    pub changes: Vec<InjectedChange>,
    pub notes: Vec<String>,
}

/// Per-FD counts of right-hand values within each left-hand group.
struct Groups {
    fds: Vec<(Vec<usize>, usize)>,
    counts: Vec<FxHashMap<Key, FxHashMap<u32, usize>>>,
}

impl Groups {
    fn new(inst: &Instance, sigma: &Sigma) -> Result<Self> {
        let bound = sigma.bind(inst.schema())?;
        let fds: Vec<(Vec<usize>, usize)> =
            bound.fds.iter().map(|f| (f.lhs.clone(), f.rhs)).collect();
        let mut counts = vec![FxHashMap::default(); fds.len()];
        for (i, (lhs, rhs)) in fds.iter().enumerate() {
            let map: &mut FxHashMap<Key, FxHashMap<u32, usize>> = &mut counts[i];
            for row in 0..inst.len() {
                *map.entry(key_of(inst, row, lhs))
                    .or_default()
                    .entry(inst.code(row, *rhs))
                    .or_default() += 1;
            }
        }
        Ok(Groups { fds, counts })
    }

    fn lhs_with(inst: &Instance, row: usize, lhs: &[usize], col: usize, v: u32) -> Key {
        lhs.iter()
            .map(|&c| if c == col { v } else { inst.code(row, c) })
            .collect()
    }

    /// Would setting `(row, col)` to `v` break some FD?
    fn violates(&self, inst: &Instance, row: usize, col: usize, v: u32) -> bool {
        self.fds
            .iter()
            .zip(&self.counts)
            .any(|((lhs, rhs), counts)| {
                if *rhs == col {
                    let own = inst.code(row, col);
                    counts[&key_of(inst, row, lhs)]
                        .iter()
                        .any(|(&r, &n)| r != v && (r != own || n > 1))
                } else if lhs.contains(&col) {
                    let key = Self::lhs_with(inst, row, lhs, col, v);
                    let own = inst.code(row, *rhs);
                    counts
                        .get(&key)
                        .is_some_and(|m| m.keys().any(|&r| r != own))
                } else {
                    false
                }
            })
    }

    fn update(&mut self, inst: &Instance, row: usize, col: usize, v: u32, delta: isize) {
        for ((lhs, rhs), counts) in self.fds.iter().zip(&mut self.counts) {
            if *rhs != col && !lhs.contains(&col) {
                continue;
            }
            let key = Self::lhs_with(inst, row, lhs, col, v);
            let r = if *rhs == col { v } else { inst.code(row, *rhs) };
            let group = counts.entry(key.clone()).or_default();
            let n = group.entry(r).or_default();
            *n = n.checked_add_signed(delta).expect("count underflow");
            if *n == 0 {
                group.remove(&r);
                if group.is_empty() {
                    counts.remove(&key);
                }
            }
        }
    }
}

/// Overwrite randomly chosen attr(Σ) cells with other active-domain values,
/// preferring values that introduce an FD violation.
pub fn inject_errors(
    clean: &Instance,
    sigma: &Sigma,
    rate: f64,
    seed: u64,
    unit: InjectionUnit,
) -> Result<(Instance, InjectionLog)> {
    if !(rate > 0.0 && rate <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "error rate {rate} is outside (0, 1]"
        )));
    }
    let bound = sigma.bind(clean.schema())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut log = InjectionLog {
        seed,
        rate,
        unit,
        changes: Vec::new(),
        notes: Vec::new(),
    };
    let mut cols = Vec::new();
    for &c in &bound.attr_columns {
        if clean.column(c).distinct_count() < 2 {
            log.notes.push(format!(
                "attribute `{}` has a single distinct value and cannot be perturbed",
                clean.schema()[c]
            ));
        } else {
            cols.push(c);
        }
    }
    let mut dirty = clean.clone();
    let n = clean.len();
    if cols.is_empty() || n == 0 {
        log.notes.push("no cell can be perturbed".into());
        return Ok((dirty, log));
    }

    let mut cells: Vec<(usize, usize)> = match unit {
        InjectionUnit::Tuple => {
            let k = ((rate * n as f64).ceil() as usize).min(n);
            let mut rows = sample(&mut rng, n, k).into_vec();
            rows.sort_unstable();
            rows.into_iter()
                .map(|r| (r, cols[rng.random_range(0..cols.len())]))
                .collect()
        }
        InjectionUnit::Cell => {
            let total = n * cols.len();
            let k = ((rate * total as f64).ceil() as usize).min(total);
            sample(&mut rng, total, k)
                .into_iter()
                .map(|i| (i / cols.len(), cols[i % cols.len()]))
                .collect()
        }
    };
    cells.sort_unstable();

    let domains: Vec<Vec<u32>> = (0..clean.arity())
        .map(|c| {
            let dict = clean.column(c).dictionary();
            let mut d = clean.column(c).active_domain();
            d.sort_by(|&a, &b| dict.value(a).cmp(dict.value(b)));
            d
        })
        .collect();
    let mut groups = Groups::new(clean, sigma)?;
    for (row, col) in cells {
        let old = dirty.code(row, col);
        let dom = &domains[col];
        let mut pick = None;
        for _ in 0..32 {
            let v = dom[rng.random_range(0..dom.len())];
            if v != old && groups.violates(&dirty, row, col, v) {
                pick = Some(v);
                break;
            }
        }
        if pick.is_none() {
            pick = dom
                .iter()
                .copied()
                .find(|&v| v != old && groups.violates(&dirty, row, col, v));
        }
        let v = match pick {
            Some(v) => v,
            None => {
                log.notes.push(format!(
                    "tuple {row}, `{}`: no replacement violates an FD",
                    clean.schema()[col]
                ));
                let others: Vec<u32> = dom.iter().copied().filter(|&v| v != old).collect();
                others[rng.random_range(0..others.len())]
            }
        };
        groups.update(&dirty, row, col, old, -1);
        dirty.set_code(row, col, v);
        groups.update(&dirty, row, col, v, 1);
        log.changes.push(InjectedChange {
            tuple: row,
            attribute: clean.schema()[col].clone(),
            old: clean.value(row, col).to_owned(),
            new: dirty.value(row, col).to_owned(),
        });
    }
    Ok((dirty, log))
}

/// Apply a log's changes to `clean`.
pub fn replay(clean: &Instance, log: &InjectionLog) -> Result<Instance> {
    let mut out = clean.clone();
    for ch in &log.changes {
        let col = clean
            .attr_index(&ch.attribute)
            .ok_or_else(|| Error::UnknownAttribute(ch.attribute.clone()))?;
        if ch.tuple >= clean.len() {
            return Err(Error::TupleOutOfRange {
                index: ch.tuple,
                len: clean.len(),
            });
        }
        if out.value(ch.tuple, col) != ch.old {
            return Err(Error::InvalidArgument(format!(
                "tuple {} `{}` is `{}`, log expects `{}`",
                ch.tuple,
                ch.attribute,
                out.value(ch.tuple, col),
                ch.old
            )));
        }
        out.set(ch.tuple, col, &ch.new);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::violations::{detect_violations, satisfies};

    #[test]
    fn generated_data_satisfies_profile() {
        let p = Profile::tax_like(500);
        let inst = generate_synthetic(500, &p, 3).unwrap();
        assert_eq!(inst.len(), 500);
        assert!(satisfies(&inst, &p.sigma().unwrap()).unwrap());
        assert_eq!(inst, generate_synthetic(500, &p, 3).unwrap());
        assert!(generate_synthetic(0, &p, 3).unwrap().is_empty());
    }

    #[test]
    fn profile_must_imply_fds() {
        let mut p = Profile::tax_like(100);
        p.fds.push("city -> zip".into());
        assert!(matches!(p.validate(), Err(Error::Profile(_))));
    }

    #[test]
    fn injection_counts_and_replay() {
        let p = Profile::tax_like(100);
        let sigma = p.sigma().unwrap();
        let clean = generate_synthetic(100, &p, 1).unwrap();
        let (dirty, log) = inject_errors(&clean, &sigma, 0.1, 9, InjectionUnit::Tuple).unwrap();
        assert_eq!(log.changes.len(), 10);
        assert!(log.changes.iter().all(|c| c.old != c.new));
        assert!(!detect_violations(&dirty, &sigma).unwrap().is_empty());
        assert_eq!(replay(&clean, &log).unwrap(), dirty);
    }

    #[test]
    fn bad_rate() {
        let p = Profile::tax_like(10);
        let clean = generate_synthetic(10, &p, 1).unwrap();
        let sigma = p.sigma().unwrap();
        assert!(inject_errors(&clean, &sigma, 0.0, 1, InjectionUnit::Tuple).is_err());
        assert!(inject_errors(&clean, &sigma, 1.5, 1, InjectionUnit::Tuple).is_err());
    }
}
