//! Functional dependencies and the line-oriented FD spec format.
//!
//! ```text
//! # comment
//! cyclist -> country
//! A, B -> C
//! A -> B, C        # split into A -> B and A -> C
//! ```

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub type FdId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionalDependency {
    id: FdId,
    lhs: Vec<String>,
    rhs: String,
}

impl FunctionalDependency {
    pub fn id(&self) -> FdId {
        self.id
    }

    /// Left-hand side in declaration order.
    pub fn lhs(&self) -> &[String] {
        &self.lhs
    }

    pub fn rhs(&self) -> &str {
        &self.rhs
    }

    /// Left-hand side as a sorted attribute set; this is the FD-graph node key.
    pub fn lhs_key(&self) -> Vec<String> {
        let mut key = self.lhs.clone();
        key.sort();
        key
    }

    pub fn attrs(&self) -> impl Iterator<Item = &str> {
        self.lhs
            .iter()
            .map(String::as_str)
            .chain(std::iter::once(self.rhs.as_str()))
    }

    pub fn involves(&self, attr: &str) -> bool {
        self.rhs == attr || self.lhs.iter().any(|a| a == attr)
    }
}

impl fmt::Display for FunctionalDependency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.lhs.join(","), self.rhs)
    }
}

/// A canonical FD set: single-attribute right-hand sides, no duplicates.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Sigma {
    fds: Vec<FunctionalDependency>,
    attrs: Vec<String>,
}

impl Sigma {
    pub fn parse(text: &str) -> Result<Self> {
        let mut sigma = Sigma::default();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = match raw.find('#') {
                Some(p) => &raw[..p],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split("->");
            let (lhs, rhs) = match (parts.next(), parts.next(), parts.next()) {
                (Some(l), Some(r), None) => (l, r),
                _ => {
                    return Err(Error::FdSyntax {
                        line: line_no,
                        message: format!("expected `lhs -> rhs`, got `{line}`"),
                    })
                }
            };
            let lhs = split_attrs(lhs, line_no, "left-hand side")?;
            let rhs = split_attrs(rhs, line_no, "right-hand side")?;
            let mut seen = BTreeSet::new();
            for a in &lhs {
                if !seen.insert(a) {
                    return Err(Error::FdSyntax {
                        line: line_no,
                        message: format!("attribute `{a}` repeated on the left-hand side"),
                    });
                }
            }
            for r in rhs {
                sigma.push(lhs.clone(), r, line_no)?;
            }
        }
        Ok(sigma)
    }

    /// Build from `(lhs, rhs)` pairs; used by fixtures and generators.
    pub fn from_pairs<S: AsRef<str>>(pairs: &[(&[S], &str)]) -> Result<Self> {
        let mut sigma = Sigma::default();
        for (i, (lhs, rhs)) in pairs.iter().enumerate() {
            let lhs = lhs.iter().map(|s| s.as_ref().to_owned()).collect();
            sigma.push(lhs, rhs.to_string(), i + 1)?;
        }
        Ok(sigma)
    }

    fn push(&mut self, lhs: Vec<String>, rhs: String, line: usize) -> Result<()> {
        if lhs.contains(&rhs) {
            return Err(Error::RhsInLhs { line, attr: rhs });
        }
        let mut key = lhs.clone();
        key.sort();
        if self.fds.iter().any(|f| f.rhs == rhs && f.lhs_key() == key) {
            return Err(Error::DuplicateFd {
                line,
                fd: format!("{} -> {}", lhs.join(","), rhs),
            });
        }
        for a in lhs.iter().chain(std::iter::once(&rhs)) {
            if !self.attrs.contains(a) {
                self.attrs.push(a.clone());
            }
        }
        self.fds.push(FunctionalDependency {
            id: self.fds.len(),
            lhs,
            rhs,
        });
        Ok(())
    }

    pub fn fds(&self) -> &[FunctionalDependency] {
        &self.fds
    }

    pub fn fd(&self, id: FdId) -> &FunctionalDependency {
        &self.fds[id]
    }

    pub fn len(&self) -> usize {
        self.fds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fds.is_empty()
    }

    /// attr(Σ) in order of first appearance.
    pub fn attrs(&self) -> &[String] {
        &self.attrs
    }

    /// Attributes that appear as the right-hand side of some FD.
    pub fn rhs_attrs(&self) -> BTreeSet<&str> {
        self.fds.iter().map(|f| f.rhs.as_str()).collect()
    }

    /// Resolve attribute names against a schema.
    pub fn bind<S: AsRef<str>>(&self, schema: &[S]) -> Result<BoundSigma> {
        let col = |name: &str| -> Result<usize> {
            schema
                .iter()
                .position(|s| s.as_ref() == name)
                .ok_or_else(|| Error::UnknownAttribute(name.to_owned()))
        };
        let mut fds = Vec::with_capacity(self.fds.len());
        for f in &self.fds {
            let lhs = f.lhs.iter().map(|a| col(a)).collect::<Result<Vec<_>>>()?;
            let key = f
                .lhs_key()
                .iter()
                .map(|a| col(a))
                .collect::<Result<Vec<_>>>()?;
            fds.push(BoundFd {
                id: f.id,
                lhs,
                key,
                rhs: col(&f.rhs)?,
            });
        }
        let attr_columns = self.attrs.iter().map(|a| col(a)).collect::<Result<_>>()?;
        Ok(BoundSigma { fds, attr_columns })
    }
}

fn split_attrs(text: &str, line: usize, side: &str) -> Result<Vec<String>> {
    let attrs: Vec<String> = text.split(',').map(|a| a.trim().to_owned()).collect();
    if attrs.iter().any(String::is_empty) {
        return Err(Error::FdSyntax {
            line,
            message: format!("empty attribute name on the {side}"),
        });
    }
    Ok(attrs)
}

impl FromStr for Sigma {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Sigma::parse(s)
    }
}

impl fmt::Display for Sigma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for fd in &self.fds {
            writeln!(f, "{fd}")?;
        }
        Ok(())
    }
}

/// An FD with attribute names resolved to column positions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundFd {
    pub id: FdId,
    /// Columns in declaration order.
    pub lhs: Vec<usize>,
    /// Columns ordered by attribute name (the FD-graph node key order).
    pub key: Vec<usize>,
    pub rhs: usize,
}

#[derive(Debug, Clone)]
pub struct BoundSigma {
    pub fds: Vec<BoundFd>,
    /// Columns of attr(Σ).
    pub attr_columns: Vec<usize>,
}
