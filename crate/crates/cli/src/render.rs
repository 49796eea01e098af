//! Output rendering. Every command builds a [`Report`]; the format flag only
//! decides how it is written.

use std::io::{self, Write};

use overhang_core::config::{OutputFormat, RunConfig};
use overhang_core::Btc;
use serde_json::{json, Value};

/// A table cell. Markdown carries unit suffixes in the cell, CSV in the
/// column header so the data stays numeric.
#[derive(Debug, Clone)]
pub enum Cell {
    Text(String),
    /// Fraction rendered as a percentage with the given decimals.
    Pct(f64, usize),
    Usd(f64),
    Btc(f64),
    Num(f64),
    Int(i64),
}

impl Cell {
    pub fn text(s: impl Into<String>) -> Self {
        Cell::Text(s.into())
    }

    pub fn btc(amount: Btc) -> Self {
        Cell::Btc(amount.as_btc())
    }

    fn raw(&self) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Pct(v, d) => format!("{:.*}", *d, clean(*v * 100.0)),
            Cell::Usd(v) => format!("{:.2}", clean(*v)),
            Cell::Btc(v) => format!("{:.8}", clean(*v)),
            Cell::Num(v) => v.to_string(),
            Cell::Int(v) => v.to_string(),
        }
    }

    fn decorated(&self) -> String {
        match self {
            Cell::Pct(..) => format!("{}%", self.raw()),
            Cell::Usd(v) => format!("{} USD", group(*v)),
            Cell::Btc(v) => format!(
                "{} BTC",
                Btc::from_btc(v.abs()).map_or_else(
                    |_| v.to_string(),
                    |b| {
                        let s = b.to_string();
                        if *v < 0.0 {
                            format!("-{s}")
                        } else {
                            s
                        }
                    }
                )
            ),
            _ => self.raw(),
        }
    }

    fn unit(&self) -> Option<&'static str> {
        match self {
            Cell::Pct(..) => Some("pct"),
            Cell::Usd(_) => Some("usd"),
            Cell::Btc(_) => Some("btc"),
            _ => None,
        }
    }
}

/// Rounds away float noise and negative zero before display.
fn clean(v: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else {
        v
    }
}

fn group(v: f64) -> String {
    let whole = format!("{:.0}", clean(v).abs());
    let mut out = String::new();
    for (i, ch) in whole.chars().enumerate() {
        if i > 0 && (whole.len() - i) % 3 == 0 {
            out.push(',');
        }
        out.push(ch);
    }
    if v < 0.0 && whole != "0" {
        format!("-{out}")
    } else {
        out
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub title: String,
    pub headers: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(title: impl Into<String>, headers: &[&'static str]) -> Self {
        Table { title: title.into(), headers: headers.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    fn csv_headers(&self) -> Vec<String> {
        self.headers
            .iter()
            .enumerate()
            .map(|(i, h)| match self.rows.iter().find_map(|r| r[i].unit()) {
                Some(u) => format!("{h}_{u}"),
                None => h.to_string(),
            })
            .collect()
    }
}

pub struct Report {
    pub command: &'static str,
    pub tables: Vec<Table>,
    pub notes: Vec<String>,
    /// Full-precision payload for `--json`.
    pub data: Value,
}

impl Report {
    pub fn new(command: &'static str, data: Value) -> Self {
        Report { command, tables: Vec::new(), notes: Vec::new(), data }
    }

    pub fn table(mut self, t: Table) -> Self {
        self.tables.push(t);
        self
    }

    pub fn note(mut self, n: impl Into<String>) -> Self {
        self.notes.push(n.into());
        self
    }

    pub fn write(&self, cfg: &RunConfig, out: &mut dyn Write) -> io::Result<()> {
        match cfg.format {
            OutputFormat::Markdown => self.write_markdown(cfg.seed, out),
            OutputFormat::Csv => self.write_csv(cfg.seed, out),
            OutputFormat::Json => {
                let config: Value = serde_json::from_str(&cfg.to_json()).expect("config is valid JSON");
                let doc = json!({ "command": self.command, "seed": cfg.seed, "config": config, "data": self.data });
                writeln!(out, "{}", serde_json::to_string_pretty(&doc).expect("report serializes"))
            }
        }
    }

    fn write_markdown(&self, seed: u64, out: &mut dyn Write) -> io::Result<()> {
        writeln!(out, "# overhang {} (seed {seed})", self.command)?;
        for t in &self.tables {
            writeln!(out, "\n## {}\n", t.title)?;
            writeln!(out, "| {} |", t.headers.join(" | "))?;
            writeln!(out, "|{}", "---|".repeat(t.headers.len()))?;
            for row in &t.rows {
                let cells: Vec<String> = row.iter().map(|c| c.decorated().replace('|', "\\|")).collect();
                writeln!(out, "| {} |", cells.join(" | "))?;
            }
        }
        if !self.notes.is_empty() {
            writeln!(out)?;
            for n in &self.notes {
                writeln!(out, "- {n}")?;
            }
        }
        Ok(())
    }

    /// Tables are separated by two blank lines so gnuplot can address them
    /// with `index`.
    fn write_csv(&self, seed: u64, out: &mut dyn Write) -> io::Result<()> {
        writeln!(out, "# overhang {} seed={seed}", self.command)?;
        for (i, t) in self.tables.iter().enumerate() {
            if i > 0 {
                writeln!(out, "\n")?;
            }
            writeln!(out, "# {}", t.title)?;
            let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
            w.write_record(t.csv_headers()).map_err(io::Error::other)?;
            for row in &t.rows {
                w.write_record(row.iter().map(Cell::raw)).map_err(io::Error::other)?;
            }
            out.write_all(&w.into_inner().map_err(|e| io::Error::other(e.to_string()))?)?;
        }
        if !self.notes.is_empty() {
            writeln!(out)?;
        }
        for n in &self.notes {
            writeln!(out, "# {n}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn percentages_drop_negative_zero() {
        assert_eq!(Cell::Pct(-0.0, 1).decorated(), "0.0%");
        assert_eq!(Cell::Pct(-0.04437, 1).decorated(), "-4.4%");
    }

    #[test]
    fn usd_is_grouped() {
        assert_eq!(Cell::Usd(918_400_000.0).decorated(), "918,400,000 USD");
        assert_eq!(Cell::Usd(-1234.0).decorated(), "-1,234 USD");
        assert_eq!(Cell::Usd(999.0).decorated(), "999 USD");
    }

    #[test]
    fn csv_quotes_embedded_commas() {
        let mut t = Table::new("t", &["name", "share"]);
        t.push(vec![Cell::text("a, \"b\""), Cell::Pct(0.5, 1)]);
        let r = Report::new("x", Value::Null).table(t);
        let mut buf = Vec::new();
        r.write_csv(1, &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.contains("name,share_pct\n\"a, \"\"b\"\"\",50.0\n"), "{s}");
    }
}
