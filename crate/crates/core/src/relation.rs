//! The single input relation: schema, column storage, CSV I/O, selection
//! and per-attribute statistics.
//!
//! Relations are column-major and immutable once built. Tuple ids are the
//! 0-based row positions.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::RelationError;
use crate::predicate::BasePredicate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttrKind {
    Numeric,
    Categorical,
}

impl AttrKind {
    pub fn name(self) -> &'static str {
        match self {
            AttrKind::Numeric => "numeric",
            AttrKind::Categorical => "categorical",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attribute {
    pub name: String,
    pub kind: AttrKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schema {
    name: String,
    attributes: Vec<Attribute>,
    index: HashMap<String, usize>,
}

impl Schema {
    pub fn new(name: impl Into<String>, attributes: Vec<Attribute>) -> Result<Self, RelationError> {
        if attributes.is_empty() {
            return Err(RelationError::EmptySchema);
        }
        let mut index = HashMap::with_capacity(attributes.len());
        for (i, a) in attributes.iter().enumerate() {
            if a.name.is_empty() {
                return Err(RelationError::EmptyAttributeName(i));
            }
            if index.insert(a.name.clone(), i).is_some() {
                return Err(RelationError::DuplicateAttribute(a.name.clone()));
            }
        }
        Ok(Schema {
            name: name.into(),
            attributes,
            index,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn attributes(&self) -> &[Attribute] {
        &self.attributes
    }

    pub fn arity(&self) -> usize {
        self.attributes.len()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn kind_of(&self, name: &str) -> Option<AttrKind> {
        self.index_of(name).map(|i| self.attributes[i].kind)
    }

    /// Index of `name`, which must be a numeric attribute.
    pub fn numeric_index(&self, name: &str) -> Result<usize, RelationError> {
        let i = self
            .index_of(name)
            .ok_or_else(|| RelationError::UnknownAttribute(name.to_string()))?;
        match self.attributes[i].kind {
            AttrKind::Numeric => Ok(i),
            AttrKind::Categorical => Err(RelationError::KindMismatch {
                attr: name.to_string(),
                expected: "numeric",
                found: "categorical",
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Column {
    Numeric(Vec<f64>),
    Categorical(Vec<String>),
}

impl Column {
    pub fn len(&self) -> usize {
        match self {
            Column::Numeric(v) => v.len(),
            Column::Categorical(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn as_numeric(&self) -> Option<&[f64]> {
        match self {
            Column::Numeric(v) => Some(v),
            Column::Categorical(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Num(f64),
    Cat(String),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Num(v) => write!(f, "{v}"),
            Value::Cat(s) => f.write_str(s),
        }
    }
}

/// An owned copy of one row.
#[derive(Debug, Clone, PartialEq)]
pub struct Tuple {
    pub id: usize,
    pub values: Vec<Value>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Relation {
    schema: Schema,
    columns: Vec<Column>,
    len: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AttrStats {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
}

impl Relation {
    pub fn from_columns(schema: Schema, columns: Vec<Column>) -> Result<Self, RelationError> {
        if columns.len() != schema.arity() {
            return Err(RelationError::ArityMismatch {
                expected: schema.arity(),
                found: columns.len(),
            });
        }
        let len = columns.first().map_or(0, Column::len);
        for (attr, col) in schema.attributes().iter().zip(&columns) {
            let kind = match col {
                Column::Numeric(vals) => {
                    if let Some(row) = vals.iter().position(|v| !v.is_finite()) {
                        return Err(RelationError::NonFinite {
                            row,
                            attr: attr.name.clone(),
                            value: vals[row].to_string(),
                        });
                    }
                    AttrKind::Numeric
                }
                Column::Categorical(_) => AttrKind::Categorical,
            };
            if kind != attr.kind {
                return Err(RelationError::KindMismatch {
                    attr: attr.name.clone(),
                    expected: attr.kind.name(),
                    found: kind.name(),
                });
            }
            if col.len() != len {
                return Err(RelationError::RaggedRow {
                    row: col.len().min(len),
                    expected: len,
                    found: col.len(),
                });
            }
        }
        Ok(Relation {
            schema,
            columns,
            len,
        })
    }

    /// Builds an all-numeric relation from row vectors.
    pub fn from_numeric_rows(
        name: &str,
        attr_names: &[&str],
        rows: &[Vec<f64>],
    ) -> Result<Self, RelationError> {
        let schema = Schema::new(
            name,
            attr_names
                .iter()
                .map(|n| Attribute {
                    name: n.to_string(),
                    kind: AttrKind::Numeric,
                })
                .collect(),
        )?;
        let mut cols = vec![Vec::with_capacity(rows.len()); attr_names.len()];
        for row in rows {
            if row.len() != attr_names.len() {
                return Err(RelationError::ArityMismatch {
                    expected: attr_names.len(),
                    found: row.len(),
                });
            }
            for (c, v) in cols.iter_mut().zip(row) {
                c.push(*v);
            }
        }
        Relation::from_columns(schema, cols.into_iter().map(Column::Numeric).collect())
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn numeric(&self, attr: usize) -> Option<&[f64]> {
        self.columns.get(attr).and_then(Column::as_numeric)
    }

    pub fn numeric_by_name(&self, name: &str) -> Result<&[f64], RelationError> {
        let i = self.schema.numeric_index(name)?;
        Ok(self.columns[i].as_numeric().expect("checked numeric"))
    }

    pub fn tuple(&self, id: usize) -> Option<Tuple> {
        if id >= self.len {
            return None;
        }
        let values = self
            .columns
            .iter()
            .map(|c| match c {
                Column::Numeric(v) => Value::Num(v[id]),
                Column::Categorical(v) => Value::Cat(v[id].clone()),
            })
            .collect();
        Some(Tuple { id, values })
    }

    /// A new relation holding the given rows in the given order; ids are
    /// renumbered from 0.
    pub fn select_rows(&self, ids: &[usize]) -> Relation {
        let columns = self
            .columns
            .iter()
            .map(|c| match c {
                Column::Numeric(v) => Column::Numeric(ids.iter().map(|&i| v[i]).collect()),
                Column::Categorical(v) => {
                    Column::Categorical(ids.iter().map(|&i| v[i].clone()).collect())
                }
            })
            .collect();
        Relation {
            schema: self.schema.clone(),
            columns,
            len: ids.len(),
        }
    }

    /// Ids of the tuples satisfying `pred` (the base relation), ascending.
    pub fn apply_base_predicate(&self, pred: &BasePredicate) -> Result<Vec<usize>, RelationError> {
        Ok(pred.resolve(&self.schema)?.filter(self))
    }

    pub fn attribute_stats(&self, attrs: &[&str]) -> Result<Vec<AttrStats>, RelationError> {
        let cols = attrs
            .iter()
            .map(|a| self.numeric_by_name(a))
            .collect::<Result<Vec<_>, _>>()?;
        if self.len == 0 {
            return Err(RelationError::EmptyRelation);
        }
        Ok(cols
            .into_iter()
            .map(|vals| {
                let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
                let mut sum = 0.0;
                for &v in vals {
                    min = min.min(v);
                    max = max.max(v);
                    sum += v;
                }
                // the mean of values in [min, max] lies in [min, max]
                let mean = (sum / vals.len() as f64).clamp(min, max);
                AttrStats { min, max, mean }
            })
            .collect())
    }

    pub fn load_csv(
        path: impl AsRef<Path>,
        schema_hints: &HashMap<String, AttrKind>,
    ) -> Result<Relation, RelationError> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|source| RelationError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let name = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("relation")
            .to_string();
        Relation::read_csv(file, &name, schema_hints)
    }

    /// Reads CSV text. Column kinds are inferred (numeric when every
    /// non-empty cell parses as a float) unless overridden by `schema_hints`.
    pub fn read_csv<R: Read>(
        reader: R,
        name: &str,
        schema_hints: &HashMap<String, AttrKind>,
    ) -> Result<Relation, RelationError> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .from_reader(reader);
        let headers: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
        let mut seen = HashSet::new();
        for (i, h) in headers.iter().enumerate() {
            if h.is_empty() {
                return Err(RelationError::EmptyAttributeName(i));
            }
            if !seen.insert(h.as_str()) {
                return Err(RelationError::DuplicateAttribute(h.clone()));
            }
        }
        let mut raw: Vec<Vec<String>> = vec![Vec::new(); headers.len()];
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if rec.len() != headers.len() {
                return Err(RelationError::RaggedRow {
                    row,
                    expected: headers.len(),
                    found: rec.len(),
                });
            }
            for (col, field) in raw.iter_mut().zip(rec.iter()) {
                col.push(field.trim().to_string());
            }
        }

        let mut attributes = Vec::with_capacity(headers.len());
        let mut columns = Vec::with_capacity(headers.len());
        for (name, cells) in headers.iter().zip(raw) {
            let kind = schema_hints.get(name).copied().unwrap_or_else(|| {
                let numeric = cells
                    .iter()
                    .filter(|c| !c.is_empty())
                    .all(|c| c.parse::<f64>().is_ok());
                if numeric {
                    AttrKind::Numeric
                } else {
                    AttrKind::Categorical
                }
            });
            let column = match kind {
                AttrKind::Numeric => {
                    let mut vals = Vec::with_capacity(cells.len());
                    for (row, cell) in cells.iter().enumerate() {
                        if cell.is_empty() {
                            return Err(RelationError::MissingValue {
                                row,
                                attr: name.clone(),
                            });
                        }
                        let v: f64 = cell.parse().map_err(|_| RelationError::NotNumeric {
                            row,
                            attr: name.clone(),
                            value: cell.clone(),
                        })?;
                        if !v.is_finite() {
                            return Err(RelationError::NonFinite {
                                row,
                                attr: name.clone(),
                                value: cell.clone(),
                            });
                        }
                        vals.push(v);
                    }
                    Column::Numeric(vals)
                }
                AttrKind::Categorical => Column::Categorical(cells),
            };
            attributes.push(Attribute {
                name: name.clone(),
                kind,
            });
            columns.push(column);
        }
        Relation::from_columns(Schema::new(name, attributes)?, columns)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), RelationError> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(self.schema.attributes().iter().map(|a| a.name.as_str()))?;
        let mut record = Vec::with_capacity(self.columns.len());
        for id in 0..self.len {
            record.clear();
            for c in &self.columns {
                record.push(match c {
                    Column::Numeric(v) => v[id].to_string(),
                    Column::Categorical(v) => v[id].clone(),
                });
            }
            wtr.write_record(&record)?;
        }
        wtr.flush().map_err(|source| RelationError::Io {
            path: Default::default(),
            source,
        })?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<(), RelationError> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|source| RelationError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}
