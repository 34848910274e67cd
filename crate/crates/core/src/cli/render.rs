//! Report documents and their JSON, CSV and table renderings.

use std::f64::consts::LN_2;

use clap::ValueEnum;
use serde::ser::{SerializeMap, SerializeSeq};
use serde::{Serialize, Serializer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Units {
    Nats,
    Bits,
}

impl Units {
    fn as_str(self) -> &'static str {
        match self {
            Units::Nats => "nats",
            Units::Bits => "bits",
        }
    }
}

#[derive(Debug, Clone)]
pub enum Cell {
    /// Information quantity; converted by `--units bits`.
    Nats(f64),
    /// In the units of the Hamiltonian.
    Energy(f64),
    Real(f64),
    Count(u64),
    Text(String),
    Flag(bool),
}

#[derive(Debug, Clone)]
pub struct Row {
    pub field: String,
    pub cell: Cell,
    pub certificate: Option<&'static str>,
}

impl Row {
    pub fn new(field: impl Into<String>, cell: Cell) -> Self {
        Row {
            field: field.into(),
            cell,
            certificate: None,
        }
    }

    pub fn certified(field: impl Into<String>, cell: Cell, certificate: &'static str) -> Self {
        Row {
            field: field.into(),
            cell,
            certificate: Some(certificate),
        }
    }
}

#[derive(Debug, Clone)]
pub enum Body {
    Fields(Vec<Row>),
    Records(Vec<Vec<Row>>),
}

#[derive(Debug, Clone)]
pub struct Section {
    pub name: String,
    pub body: Body,
}

impl Section {
    pub fn fields(name: impl Into<String>, rows: Vec<Row>) -> Self {
        Section {
            name: name.into(),
            body: Body::Fields(rows),
        }
    }

    pub fn records(name: impl Into<String>, records: Vec<Vec<Row>>) -> Self {
        Section {
            name: name.into(),
            body: Body::Records(records),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Document {
    pub command: &'static str,
    pub sections: Vec<Section>,
    pub partial: bool,
    pub warnings: Vec<String>,
}

impl Document {
    pub fn new(command: &'static str) -> Self {
        Document {
            command,
            sections: Vec::new(),
            partial: false,
            warnings: Vec::new(),
        }
    }

    pub fn push(&mut self, section: Section) {
        self.sections.push(section);
    }

    pub fn render(&self, format: Format, units: Units) -> String {
        match format {
            Format::Json => {
                let view = JsonView { doc: self, units };
                let mut s = serde_json::to_string_pretty(&view).expect("report values serialize");
                s.push('\n');
                s
            }
            Format::Csv => self.csv(units),
            Format::Table => self.table(units),
        }
    }

    fn csv(&self, units: Units) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut write = |rec: [&str; 5]| w.write_record(rec).expect("writing to memory");
        write(["section", "field", "value", "unit", "certificate"]);
        for section in &self.sections {
            let mut emit = |name: &str, row: &Row| {
                let (value, unit) = plain(&row.cell, units);
                write([name, &row.field, &value, unit, row.certificate.unwrap_or("")]);
            };
            match &section.body {
                Body::Fields(rows) => rows.iter().for_each(|r| emit(&section.name, r)),
                Body::Records(records) => {
                    for (i, rec) in records.iter().enumerate() {
                        let name = format!("{}[{i}]", section.name);
                        rec.iter().for_each(|r| emit(&name, r));
                    }
                }
            }
        }
        write(["status", "partial", if self.partial { "true" } else { "false" }, "", ""]);
        for warning in &self.warnings {
            write(["status", "warning", warning, "", ""]);
        }
        String::from_utf8(w.into_inner().expect("in-memory writer")).expect("UTF-8 output")
    }

    fn table(&self, units: Units) -> String {
        let mut out = format!("{} ({})\n", self.command, units.as_str());
        let line = |row: &Row| {
            let (value, unit) = display(&row.cell, units);
            let unit = if unit.is_empty() {
                String::new()
            } else {
                format!(" {unit}")
            };
            let cert = row.certificate.map(|c| format!("  [{c}]")).unwrap_or_default();
            (row.field.clone(), format!("{value}{unit}{cert}"))
        };
        for section in &self.sections {
            out.push_str(&format!("\n{}\n", section.name));
            match &section.body {
                Body::Fields(rows) => {
                    let lines: Vec<_> = rows.iter().map(line).collect();
                    let width = lines.iter().map(|(f, _)| f.chars().count()).max().unwrap_or(0);
                    for (f, v) in lines {
                        out.push_str(&format!("  {f:<width$}  {v}\n"));
                    }
                }
                Body::Records(records) => {
                    let Some(first) = records.first() else { continue };
                    let cells: Vec<Vec<String>> = records
                        .iter()
                        .map(|rec| rec.iter().map(|r| display(&r.cell, units).0).collect())
                        .collect();
                    let mut widths: Vec<usize> = first.iter().map(|r| r.field.chars().count()).collect();
                    for row in &cells {
                        for (w, s) in widths.iter_mut().zip(row) {
                            *w = (*w).max(s.chars().count());
                        }
                    }
                    let header: Vec<String> = first
                        .iter()
                        .zip(&widths)
                        .map(|(r, w)| format!("{:>w$}", r.field, w = *w))
                        .collect();
                    out.push_str(&format!("  {}\n", header.join("  ")));
                    for row in cells {
                        let padded: Vec<String> = row
                            .iter()
                            .zip(&widths)
                            .map(|(s, w)| format!("{s:>w$}", w = *w))
                            .collect();
                        out.push_str(&format!("  {}\n", padded.join("  ")));
                    }
                }
            }
        }
        if self.partial {
            out.push_str("\nPARTIAL RESULT\n");
        }
        for warning in &self.warnings {
            out.push_str(&format!("warning: {warning}\n"));
        }
        out
    }
}

fn convert(cell: &Cell, units: Units) -> Option<f64> {
    match (cell, units) {
        (Cell::Nats(x), Units::Bits) => Some(x / LN_2),
        (Cell::Nats(x) | Cell::Energy(x) | Cell::Real(x), _) => Some(*x),
        _ => None,
    }
}

fn unit_of(cell: &Cell, units: Units) -> &'static str {
    match cell {
        Cell::Nats(_) => units.as_str(),
        Cell::Energy(_) => "energy",
        _ => "",
    }
}

/// Shortest representation that parses back to the same `f64`.
fn exact(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x:?}")
    }
}

fn plain(cell: &Cell, units: Units) -> (String, &'static str) {
    let unit = unit_of(cell, units);
    let value = match cell {
        Cell::Count(n) => n.to_string(),
        Cell::Text(s) => s.clone(),
        Cell::Flag(b) => b.to_string(),
        _ => exact(convert(cell, units).expect("numeric cell")),
    };
    (value, unit)
}

fn display(cell: &Cell, units: Units) -> (String, &'static str) {
    let unit = unit_of(cell, units);
    let value = match convert(cell, units) {
        Some(x) if x.is_finite() && x != 0.0 && (x.abs() < 1e-4 || x.abs() >= 1e6) => format!("{x:.6e}"),
        Some(x) if x.is_finite() => format!("{x:.10}"),
        Some(x) => exact(x),
        None => plain(cell, units).0,
    };
    (value, unit)
}

struct JsonView<'a> {
    doc: &'a Document,
    units: Units,
}

struct CellJson<'a>(&'a Cell, Units);

impl Serialize for CellJson<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.0 {
            Cell::Count(n) => s.serialize_u64(*n),
            Cell::Text(t) => s.serialize_str(t),
            Cell::Flag(b) => s.serialize_bool(*b),
            cell => {
                let x = convert(cell, self.1).expect("numeric cell");
                if x.is_finite() {
                    s.serialize_f64(x)
                } else {
                    s.serialize_str(&exact(x))
                }
            }
        }
    }
}

struct RowsJson<'a>(&'a [Row], Units);

impl Serialize for RowsJson<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(None)?;
        for row in self.0 {
            map.serialize_entry(&row.field, &CellJson(&row.cell, self.1))?;
            if let Some(cert) = row.certificate {
                map.serialize_entry(&format!("{}_certificate", row.field), cert)?;
            }
        }
        map.end()
    }
}

struct RecordsJson<'a>(&'a [Vec<Row>], Units);

impl Serialize for RecordsJson<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.0.len()))?;
        for rec in self.0 {
            seq.serialize_element(&RowsJson(rec, self.1))?;
        }
        seq.end()
    }
}

impl Serialize for JsonView<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(None)?;
        map.serialize_entry("command", self.doc.command)?;
        map.serialize_entry("units", self.units.as_str())?;
        for section in &self.doc.sections {
            match &section.body {
                Body::Fields(rows) => map.serialize_entry(&section.name, &RowsJson(rows, self.units))?,
                Body::Records(recs) => map.serialize_entry(&section.name, &RecordsJson(recs, self.units))?,
            }
        }
        map.serialize_entry("partial", &self.doc.partial)?;
        map.serialize_entry("warnings", &self.doc.warnings)?;
        map.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc() -> Document {
        let mut d = Document::new("demo");
        d.push(Section::fields(
            "values",
            vec![
                Row::certified("divergence", Cell::Nats(2.0 * LN_2), "exact"),
                Row::new("energy", Cell::Energy(0.5)),
                Row::new("max", Cell::Nats(f64::INFINITY)),
            ],
        ));
        d
    }

    #[test]
    fn bits_convert_only_information_fields() {
        let v: serde_json::Value = serde_json::from_str(&doc().render(Format::Json, Units::Bits)).unwrap();
        assert_eq!(v["values"]["divergence"], 2.0);
        assert_eq!(v["values"]["energy"], 0.5);
        assert_eq!(v["values"]["max"], "inf");
        assert_eq!(v["values"]["divergence_certificate"], "exact");
    }

    #[test]
    fn json_numbers_round_trip() {
        let x = 0.1 + 0.2;
        let mut d = Document::new("demo");
        d.push(Section::fields("v", vec![Row::new("x", Cell::Real(x))]));
        let v: serde_json::Value = serde_json::from_str(&d.render(Format::Json, Units::Nats)).unwrap();
        assert_eq!(v["v"]["x"].as_f64().unwrap().to_bits(), x.to_bits());
    }

    #[test]
    fn csv_has_one_line_per_field() {
        let text = doc().render(Format::Csv, Units::Nats);
        assert!(text.starts_with("section,field,value,unit,certificate\n"));
        assert!(text.contains("values,divergence,1.3862943611198906,nats,exact\n"));
        assert!(text.contains("values,max,inf,nats,\n"));
    }
}
