use crate::config::Format;
use crate::CliError;
use hr_sieve::numeric::{format_sig, round_sig};
use serde_json::{Map, Number, Value};
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

/// Significant digits for every float written in either format.
pub const SIG_DIGITS: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format_sig(*v, SIG_DIGITS),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    pub fn json(&self) -> Value {
        match self {
            Cell::Int(v) => Value::from(*v),
            Cell::Float(v) => num(*v),
            Cell::Text(s) => Value::from(s.as_str()),
            Cell::Empty => Value::Null,
        }
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(i64::from(v))
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

/// A float rounded exactly as the CSV writer prints it; non-finite becomes null.
pub fn num(v: f64) -> Value {
    Number::from_f64(round_sig(v, SIG_DIGITS)).map_or(Value::Null, Value::Number)
}

/// Flat table for CSV.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    /// The table as a JSON object with the given keys.
    pub fn row_object(&self, i: usize) -> Value {
        let mut m = Map::new();
        for (c, v) in self.columns.iter().zip(&self.rows[i]) {
            m.insert((*c).to_string(), v.json());
        }
        Value::Object(m)
    }

    fn write_csv<W: Write>(&self, out: W) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// What a command produced, in both renderings.
#[derive(Debug, Clone)]
pub struct Document {
    pub table: Table,
    pub json: Value,
}

impl Document {
    pub fn write(&self, format: Format, path: Option<&Path>) -> Result<(), CliError> {
        let out: Box<dyn Write> = match path {
            Some(p) => Box::new(BufWriter::new(File::create(p)?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        };
        match format {
            Format::Csv => self.table.write_csv(out),
            Format::Json => {
                let mut out = out;
                serde_json::to_writer_pretty(&mut out, &self.json)?;
                writeln!(out)?;
                out.flush()?;
                Ok(())
            }
        }
    }
}
