//! CSV and JSON Lines emission.

use std::io::{self, Write};

use super::config::Format;
use super::run::{Table, Value};

/// Round-trip decimal form used for every number.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Metadata lines written ahead of the CSV header.
#[derive(Debug, Clone, PartialEq)]
pub struct Metadata {
    pub command: String,
    pub config_echo: String,
}

pub fn write_table<W: Write>(out: &mut W, table: &Table, meta: &Metadata, format: Format) -> io::Result<()> {
    match format {
        Format::Csv => write_csv(out, table, meta),
        Format::Json => write_json(out, table),
    }
}

fn write_csv<W: Write>(out: &mut W, table: &Table, meta: &Metadata) -> io::Result<()> {
    writeln!(out, "# noneq-atomdyn {}", env!("CARGO_PKG_VERSION"))?;
    writeln!(out, "# constants_sha256: {}", crate::constants::table_hash())?;
    writeln!(out, "# command: {}", meta.command)?;
    writeln!(out, "# config:")?;
    for line in meta.config_echo.lines() {
        if line.is_empty() {
            writeln!(out, "#")?;
        } else {
            writeln!(out, "#   {line}")?;
        }
    }
    writeln!(out, "{}", table.columns.join(","))?;
    for row in &table.rows {
        let cells: Vec<String> = row
            .iter()
            .map(|v| match v {
                Value::Num(x) => fmt_num(*x),
                Value::Missing => String::new(),
                Value::Text(s) => s.clone(),
            })
            .collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}

fn write_json<W: Write>(out: &mut W, table: &Table) -> io::Result<()> {
    for row in &table.rows {
        let fields: Vec<String> = table
            .columns
            .iter()
            .zip(row)
            .map(|(k, v)| {
                let val = match v {
                    Value::Num(x) if x.is_finite() => fmt_num(*x),
                    Value::Num(_) | Value::Missing => "null".into(),
                    Value::Text(s) => serde_json::to_string(s).expect("string serializes"),
                };
                format!("{}:{val}", serde_json::to_string(k).expect("string serializes"))
            })
            .collect();
        writeln!(out, "{{{}}}", fields.join(","))?;
    }
    Ok(())
}
