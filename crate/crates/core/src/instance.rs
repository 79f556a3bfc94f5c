//! Column-oriented relational instance with per-attribute value dictionaries.
//!
//! Values are opaque strings compared by exact byte equality. Each column
//! interns its values once; cells hold `u32` codes into the column
//! dictionary. Repairs only ever write values that already occur in a column,
//! so repaired instances share dictionaries with their input.

use std::collections::HashSet;
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use rustc_hash::FxHashMap;

use crate::error::{Error, Result};

/// Interned values of one attribute, in order of first appearance.
#[derive(Debug, Clone, Default)]
pub struct Dictionary {
    values: Vec<String>,
    index: FxHashMap<String, u32>,
}

impl Dictionary {
    pub fn intern(&mut self, value: &str) -> u32 {
        if let Some(&code) = self.index.get(value) {
            return code;
        }
        let code = self.values.len() as u32;
        self.values.push(value.to_owned());
        self.index.insert(value.to_owned(), code);
        code
    }

    pub fn code(&self, value: &str) -> Option<u32> {
        self.index.get(value).copied()
    }

    pub fn value(&self, code: u32) -> &str {
        &self.values[code as usize]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Debug, Clone, Default)]
pub struct Column {
    dict: Arc<Dictionary>,
    codes: Vec<u32>,
}

impl Column {
    pub fn dictionary(&self) -> &Arc<Dictionary> {
        &self.dict
    }

    pub fn codes(&self) -> &[u32] {
        &self.codes
    }

    /// Number of distinct values actually present in the column.
    pub fn distinct_count(&self) -> usize {
        let mut seen = vec![false; self.dict.len()];
        let mut n = 0;
        for &c in &self.codes {
            if !seen[c as usize] {
                seen[c as usize] = true;
                n += 1;
            }
        }
        n
    }

    /// Distinct codes present, in order of first occurrence.
    pub fn active_domain(&self) -> Vec<u32> {
        let mut seen = vec![false; self.dict.len()];
        let mut out = Vec::new();
        for &c in &self.codes {
            if !seen[c as usize] {
                seen[c as usize] = true;
                out.push(c);
            }
        }
        out
    }
}

/// An ordered multiset of tuples over a named schema.
#[derive(Debug, Clone)]
pub struct Instance {
    schema: Vec<String>,
    columns: Vec<Column>,
    len: usize,
}

impl Instance {
    pub fn new<S: AsRef<str>>(schema: &[S]) -> Result<Self> {
        let mut seen = HashSet::new();
        let schema: Vec<String> = schema.iter().map(|s| s.as_ref().to_owned()).collect();
        for name in &schema {
            if !seen.insert(name.as_str()) {
                return Err(Error::DuplicateHeader(name.clone()));
            }
        }
        let columns = schema.iter().map(|_| Column::default()).collect();
        Ok(Instance {
            schema,
            columns,
            len: 0,
        })
    }

    pub fn from_rows<S, R, V>(schema: &[S], rows: R) -> Result<Self>
    where
        S: AsRef<str>,
        R: IntoIterator<Item = Vec<V>>,
        V: AsRef<str>,
    {
        let mut inst = Instance::new(schema)?;
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != inst.arity() {
                return Err(Error::RaggedRow {
                    line: i as u64 + 2,
                    expected: inst.arity(),
                    found: row.len(),
                });
            }
            inst.push_row(&row)?;
        }
        Ok(inst)
    }

    pub fn push_row<V: AsRef<str>>(&mut self, row: &[V]) -> Result<()> {
        if row.len() != self.arity() {
            return Err(Error::ShapeMismatch(format!(
                "row has {} values, schema has {} attributes",
                row.len(),
                self.arity()
            )));
        }
        for (col, v) in self.columns.iter_mut().zip(row) {
            let code = Arc::make_mut(&mut col.dict).intern(v.as_ref());
            col.codes.push(code);
        }
        self.len += 1;
        Ok(())
    }

    pub fn schema(&self) -> &[String] {
        &self.schema
    }

    pub fn arity(&self) -> usize {
        self.schema.len()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn attr_index(&self, name: &str) -> Option<usize> {
        self.schema.iter().position(|a| a == name)
    }

    pub fn column(&self, col: usize) -> &Column {
        &self.columns[col]
    }

    pub fn code(&self, row: usize, col: usize) -> u32 {
        self.columns[col].codes[row]
    }

    pub fn value(&self, row: usize, col: usize) -> &str {
        let c = &self.columns[col];
        c.dict.value(c.codes[row])
    }

    /// Value of a cell addressed by attribute name.
    pub fn get(&self, row: usize, attr: &str) -> Option<&str> {
        self.attr_index(attr).map(|col| self.value(row, col))
    }

    pub fn row(&self, row: usize) -> Vec<&str> {
        (0..self.arity()).map(|c| self.value(row, c)).collect()
    }

    pub fn rows(&self) -> impl Iterator<Item = Vec<&str>> + '_ {
        (0..self.len).map(move |r| self.row(r))
    }

    pub fn set(&mut self, row: usize, col: usize, value: &str) {
        let column = &mut self.columns[col];
        let code = match column.dict.code(value) {
            Some(c) => c,
            None => Arc::make_mut(&mut column.dict).intern(value),
        };
        column.codes[row] = code;
    }

    /// Overwrite a cell with a code from the column's own dictionary.
    pub fn set_code(&mut self, row: usize, col: usize, code: u32) {
        debug_assert!((code as usize) < self.columns[col].dict.len());
        self.columns[col].codes[row] = code;
    }

    /// Same schema and tuple count.
    pub fn same_shape(&self, other: &Instance) -> bool {
        self.schema == other.schema && self.len == other.len
    }

    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_reader(reader);
        let mut records = rdr.records();
        let header = match records.next() {
            Some(h) => h?,
            None => return Err(Error::MissingHeader),
        };
        let schema: Vec<&str> = header.iter().collect();
        let mut inst = Instance::new(&schema)?;
        for rec in records {
            let rec = rec?;
            if rec.len() != inst.arity() {
                return Err(Error::RaggedRow {
                    line: rec.position().map(|p| p.line()).unwrap_or(0),
                    expected: inst.arity(),
                    found: rec.len(),
                });
            }
            let row: Vec<&str> = rec.iter().collect();
            inst.push_row(&row)?;
        }
        Ok(inst)
    }

    pub fn from_csv_str(text: &str) -> Result<Self> {
        Self::from_csv_reader(text.as_bytes())
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::from_csv_reader(std::io::BufReader::new(file))
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(&self.schema)?;
        for r in 0..self.len {
            wtr.write_record(self.row(r))?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is utf-8")
    }
}

impl PartialEq for Instance {
    fn eq(&self, other: &Self) -> bool {
        if !self.same_shape(other) {
            return false;
        }
        (0..self.arity()).all(|c| {
            let (a, b) = (&self.columns[c], &other.columns[c]);
            if Arc::ptr_eq(&a.dict, &b.dict) {
                a.codes == b.codes
            } else {
                (0..self.len).all(|r| self.value(r, c) == other.value(r, c))
            }
        })
    }
}

impl Eq for Instance {}

impl fmt::Display for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_csv_string())
    }
}

/// Serialized as a list of rows, header first.
impl serde::Serialize for Instance {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        let mut seq = s.serialize_seq(Some(self.len() + 1))?;
        seq.serialize_element(self.schema())?;
        for row in self.rows() {
            seq.serialize_element(&row)?;
        }
        seq.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_only_is_empty() {
        let inst = Instance::from_csv_str("a,b,c\n").unwrap();
        assert_eq!(inst.len(), 0);
        assert_eq!(inst.arity(), 3);
    }

    #[test]
    fn ragged_row_reports_line() {
        let err = Instance::from_csv_str("a,b\n1,2\n3\n").unwrap_err();
        match err {
            Error::RaggedRow {
                line,
                expected,
                found,
            } => {
                assert_eq!((line, expected, found), (3, 2, 1));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_header_rejected() {
        assert!(matches!(
            Instance::from_csv_str("a,b,a\n"),
            Err(Error::DuplicateHeader(n)) if n == "a"
        ));
    }

    #[test]
    fn empty_cells_and_whitespace_are_kept() {
        let inst = Instance::from_csv_str("a,b\n, x \n").unwrap();
        assert_eq!(inst.value(0, 0), "");
        assert_eq!(inst.value(0, 1), " x ");
    }

    #[test]
    fn csv_round_trip() {
        let text = "a,b\n\"x,y\",\"q\"\"uote\"\n,z\n";
        let inst = Instance::from_csv_str(text).unwrap();
        let again = Instance::from_csv_str(&inst.to_csv_string()).unwrap();
        assert_eq!(inst, again);
        assert_eq!(again.value(0, 0), "x,y");
        assert_eq!(again.value(0, 1), "q\"uote");
    }

    #[test]
    fn set_shares_dictionary_for_known_values() {
        let inst = Instance::from_csv_str("a\nx\ny\n").unwrap();
        let mut copy = inst.clone();
        copy.set(0, 0, "y");
        assert!(Arc::ptr_eq(
            inst.column(0).dictionary(),
            copy.column(0).dictionary()
        ));
        assert_eq!(copy.value(0, 0), "y");
        assert_ne!(inst, copy);
    }
}
