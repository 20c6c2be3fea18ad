use std::collections::BTreeSet;
use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::graph::{validate_name, VariableRole};

use super::ExperimentKind;

#[derive(Clone, Debug, PartialEq)]
pub enum ColumnData {
    Numeric(Vec<f64>),
    /// Category indices `0..k`.
    Categorical(Vec<u32>),
}

impl ColumnData {
    pub fn len(&self) -> usize {
        match self {
            ColumnData::Numeric(v) => v.len(),
            ColumnData::Categorical(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_categorical(&self) -> bool {
        matches!(self, ColumnData::Categorical(_))
    }

    /// Number of categories (largest index + 1); `None` for numeric data.
    pub fn levels(&self) -> Option<u32> {
        match self {
            ColumnData::Categorical(v) => Some(v.iter().copied().max().map_or(0, |m| m + 1)),
            ColumnData::Numeric(_) => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Column {
    pub name: String,
    pub role: VariableRole,
    pub data: ColumnData,
}

/// Observed experiment table: a condition column plus brain-state features.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    columns: Vec<Column>,
    rows: usize,
    seed: Option<u64>,
}

impl Dataset {
    pub fn new(columns: Vec<Column>, seed: Option<u64>) -> Result<Self> {
        let rows = columns.first().map_or(0, |c| c.data.len());
        if rows == 0 {
            return Err(Error::Degenerate("dataset has no rows".into()));
        }
        let mut names = BTreeSet::new();
        for c in &columns {
            validate_name(&c.name)?;
            if !names.insert(c.name.as_str()) {
                return Err(Error::input(format!("duplicate column `{}`", c.name)));
            }
            if c.role == VariableRole::Hidden {
                return Err(Error::input(format!(
                    "hidden variable `{}` cannot be a column",
                    c.name
                )));
            }
            if c.data.len() != rows {
                return Err(Error::input(format!(
                    "column `{}` has a different length",
                    c.name
                )));
            }
            if let ColumnData::Numeric(v) = &c.data {
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(Error::input(format!(
                        "column `{}` contains non-finite values",
                        c.name
                    )));
                }
            }
        }
        for role in [VariableRole::Stimulus, VariableRole::Response] {
            if columns.iter().filter(|c| c.role == role).count() > 1 {
                return Err(Error::input(format!("more than one {role} column")));
            }
        }
        Ok(Dataset {
            columns,
            rows,
            seed,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.rows
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn with_seed(mut self, seed: Option<u64>) -> Self {
        self.seed = seed;
        self
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column_names(&self) -> Vec<&str> {
        self.columns.iter().map(|c| c.name.as_str()).collect()
    }

    pub fn column(&self, name: &str) -> Result<&Column> {
        self.columns
            .iter()
            .find(|c| c.name == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    /// Feature column names in column order.
    pub fn features(&self) -> Vec<&str> {
        self.columns
            .iter()
            .filter(|c| c.role == VariableRole::Feature)
            .map(|c| c.name.as_str())
            .collect()
    }

    /// Experiment kind implied by the condition column, if there is exactly one.
    pub fn experiment_kind(&self) -> Option<ExperimentKind> {
        let has = |role| self.columns.iter().any(|c| c.role == role);
        match (has(VariableRole::Stimulus), has(VariableRole::Response)) {
            (true, false) => Some(ExperimentKind::StimulusBased),
            (false, true) => Some(ExperimentKind::ResponseBased),
            _ => None,
        }
    }

    pub fn condition(&self, kind: ExperimentKind) -> Result<&Column> {
        let role = kind.condition_role();
        self.columns
            .iter()
            .find(|c| c.role == role)
            .ok_or_else(|| Error::input(format!("{kind} dataset has no {role} column")))
    }

    pub fn numeric(&self, name: &str) -> Result<&[f64]> {
        match &self.column(name)?.data {
            ColumnData::Numeric(v) => Ok(v),
            ColumnData::Categorical(_) => {
                Err(Error::input(format!("column `{name}` is categorical")))
            }
        }
    }

    pub fn categorical(&self, name: &str) -> Result<&[u32]> {
        match &self.column(name)?.data {
            ColumnData::Categorical(v) => Ok(v),
            ColumnData::Numeric(_) => Err(Error::input(format!("column `{name}` is numeric"))),
        }
    }

    /// Thresholded binary view: every numeric column among `names` becomes
    /// categorical with `1` where the value exceeds `threshold`.
    pub fn binarize(&self, names: &[&str], threshold: f64) -> Result<Dataset> {
        for name in names {
            self.column(name)?;
        }
        let columns = self
            .columns
            .iter()
            .map(|c| match &c.data {
                ColumnData::Numeric(v) if names.contains(&c.name.as_str()) => Column {
                    name: c.name.clone(),
                    role: c.role,
                    data: ColumnData::Categorical(
                        v.iter().map(|&x| u32::from(x > threshold)).collect(),
                    ),
                },
                _ => c.clone(),
            })
            .collect();
        Dataset::new(columns, self.seed)
    }

    /// Binarizes every numeric column at `threshold`.
    pub fn binarize_all(&self, threshold: f64) -> Result<Dataset> {
        let names = self.column_names();
        self.binarize(&names, threshold)
    }

    /// Writes CSV with a `name:role` header. Numeric cells always carry a
    /// decimal point or exponent; categorical cells are bare integers, which
    /// is how [`Dataset::read_csv`] tells them apart.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(writer);
        w.write_record(
            self.columns
                .iter()
                .map(|c| format!("{}:{}", c.name, c.role)),
        )
        .map_err(csv_err)?;
        let mut record = Vec::with_capacity(self.columns.len());
        for r in 0..self.rows {
            record.clear();
            for c in &self.columns {
                record.push(match &c.data {
                    ColumnData::Numeric(v) => format_numeric(v[r]),
                    ColumnData::Categorical(v) => v[r].to_string(),
                });
            }
            w.write_record(&record).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)
            .expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("CSV output is UTF-8")
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Dataset> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(reader);
        let header = rdr.headers().map_err(csv_err)?.clone();
        let mut specs = Vec::with_capacity(header.len());
        for field in header.iter() {
            let (name, role) = field.split_once(':').ok_or_else(|| Error::Parse {
                line: 1,
                message: format!("header field `{field}` is not `name:role`"),
            })?;
            let role: VariableRole = role.parse().map_err(|e: Error| Error::Parse {
                line: 1,
                message: e.to_string(),
            })?;
            specs.push((name.trim().to_string(), role));
        }

        let mut cells: Vec<Vec<String>> = vec![Vec::new(); specs.len()];
        for (i, record) in rdr.records().enumerate() {
            let record = record.map_err(csv_err)?;
            if record.len() != specs.len() {
                return Err(Error::Parse {
                    line: i + 2,
                    message: format!("expected {} fields, found {}", specs.len(), record.len()),
                });
            }
            for (col, field) in cells.iter_mut().zip(record.iter()) {
                col.push(field.trim().to_string());
            }
        }

        let mut columns = Vec::with_capacity(specs.len());
        for ((name, role), raw) in specs.into_iter().zip(cells) {
            let categorical = !raw.is_empty()
                && raw
                    .iter()
                    .all(|s| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit()));
            let data = if categorical {
                let values = raw
                    .iter()
                    .map(|s| s.parse::<u32>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|e| Error::input(format!("column `{name}`: {e}")))?;
                ColumnData::Categorical(values)
            } else {
                let mut values = Vec::with_capacity(raw.len());
                for (i, s) in raw.iter().enumerate() {
                    values.push(s.parse::<f64>().map_err(|_| Error::Parse {
                        line: i + 2,
                        message: format!("column `{name}`: `{s}` is not a number"),
                    })?);
                }
                ColumnData::Numeric(values)
            };
            columns.push(Column { name, role, data });
        }
        Dataset::new(columns, None)
    }
}

fn csv_err(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    Error::Parse {
        line,
        message: e.to_string(),
    }
}

/// Shortest round-trip decimal form that always marks the value as numeric.
pub fn format_numeric(x: f64) -> String {
    let s = format!("{x}");
    if s.contains(['.', 'e', 'E']) || !x.is_finite() {
        s
    } else {
        format!("{s}.0")
    }
}
