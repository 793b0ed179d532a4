use serde::Serialize;

use cyclodesign_core::code::{CodeSpec, Regime};

use crate::args::Format;

#[derive(Serialize, Debug, Clone)]
pub struct SpecEcho {
    pub p: u32,
    pub l: u32,
    pub m: u32,
    pub d: u32,
    pub regime: Regime,
    pub length: u64,
    pub dimension: u32,
}

impl SpecEcho {
    pub fn of(spec: &CodeSpec) -> Self {
        SpecEcho {
            p: spec.p(),
            l: spec.l(),
            m: spec.m(),
            d: spec.d(),
            regime: spec.regime(),
            length: spec.length(),
            dimension: spec.dimension(),
        }
    }
}

#[derive(Serialize, Debug, Clone, PartialEq, Eq)]
pub struct Discrepancy {
    pub kind: &'static str,
    pub detail: String,
}

impl Discrepancy {
    pub fn new(kind: &'static str, detail: impl Into<String>) -> Self {
        Discrepancy {
            kind,
            detail: detail.into(),
        }
    }
}

#[derive(Serialize, Debug, Clone, Copy)]
pub struct Timing {
    pub seconds: f64,
}

/// Rows for the csv and text renderings.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

#[derive(Serialize, Debug, Clone)]
pub struct Report {
    pub spec: SpecEcho,
    pub results: serde_json::Value,
    pub discrepancies: Vec<Discrepancy>,
    pub timing: Option<Timing>,
    #[serde(skip)]
    pub table: Table,
}

impl Report {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(self).expect("report serialises");
                s.push('\n');
                s
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(&self.table.header).expect("in-memory write");
                for row in &self.table.rows {
                    w.write_record(row).expect("in-memory write");
                }
                String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
            }
            Format::Text => {
                let s = &self.spec;
                let mut out = format!(
                    "p = {}, l = {}, m = {} (d = {}, {:?}): length {}, dimension {}\n",
                    s.p, s.l, s.m, s.d, s.regime, s.length, s.dimension
                );
                let widths: Vec<usize> = (0..self.table.header.len())
                    .map(|i| {
                        self.table
                            .rows
                            .iter()
                            .map(|r| r[i].len())
                            .chain([self.table.header[i].len()])
                            .max()
                            .unwrap_or(0)
                    })
                    .collect();
                let line = |cells: Vec<&str>| {
                    let padded: Vec<String> = cells
                        .iter()
                        .zip(&widths)
                        .map(|(c, w)| format!("{c:>w$}"))
                        .collect();
                    padded.join("  ").trim_end().to_string() + "\n"
                };
                out += &line(self.table.header.clone());
                for row in &self.table.rows {
                    out += &line(row.iter().map(String::as_str).collect());
                }
                for d in &self.discrepancies {
                    out += &format!("note [{}]: {}\n", d.kind, d.detail);
                }
                if let Some(t) = self.timing {
                    out += &format!("time: {:.3} s\n", t.seconds);
                }
                out
            }
        }
    }
}
