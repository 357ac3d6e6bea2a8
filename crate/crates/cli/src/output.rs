//! Result rendering for the terminal, JSON and CSV.

use std::io::{self, Write};

use clap::ValueEnum;
use kgfed::cypher::{ResultTable, Value};

#[derive(Clone, Copy, ValueEnum)]
pub enum Format {
    Table,
    Json,
    Csv,
}

/// Strings as-is, everything else as JSON text.
pub fn cell_text(v: &Value) -> String {
    match v.to_json() {
        serde_json::Value::String(s) => s,
        other => other.to_string(),
    }
}

pub fn write_table(table: &ResultTable, format: Format, out: &mut impl Write) -> io::Result<()> {
    match format {
        Format::Json => {
            let mut v = table.to_json();
            if let Some(obj) = v.as_object_mut() {
                obj.remove("latency_ms");
            }
            writeln!(out, "{}", serde_json::to_string_pretty(&v)?)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(&table.columns)?;
            for row in &table.rows {
                w.write_record(row.iter().map(cell_text))?;
            }
            w.flush()
        }
        Format::Table => {
            let mut cells = vec![table.columns.clone()];
            cells.extend(table.rows.iter().map(|r| r.iter().map(cell_text).collect()));
            write_aligned(&cells, out)
        }
    }
}

/// Left-aligned columns with a rule under the first row.
pub fn write_aligned(rows: &[Vec<String>], out: &mut impl Write) -> io::Result<()> {
    let Some(header) = rows.first() else {
        return Ok(());
    };
    let mut widths: Vec<usize> = header.iter().map(|c| c.chars().count()).collect();
    for row in rows {
        for (i, c) in row.iter().enumerate() {
            widths[i] = widths[i].max(c.chars().count());
        }
    }
    let line = |row: &[String]| -> String {
        let cells: Vec<String> = row.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
        cells.join(" | ").trim_end().to_string()
    };
    writeln!(out, "{}", line(header))?;
    let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
    writeln!(out, "{}", rule.join("-+-"))?;
    for row in &rows[1..] {
        writeln!(out, "{}", line(row))?;
    }
    Ok(())
}
