//! Line-oriented trace serialization: one header line, then one
//! `cycle=<n> name=value ...` line per recorded cycle. Undefined values
//! print as `bot`. `load_trace` inverts `dump_trace` exactly.

use super::ParseError;
use crate::ir::Value;
use std::fmt::Write;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraceKind {
    Full,
    /// Carries the compact text of the filter predicate.
    Filtered(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceRow {
    pub cycle: u64,
    pub values: Vec<(String, Value)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceDump {
    pub kind: TraceKind,
    pub rows: Vec<TraceRow>,
}

impl TraceDump {
    /// The sequence of values one output takes across the dump.
    pub fn column(&self, name: &str) -> Vec<Value> {
        self.rows
            .iter()
            .filter_map(|r| r.values.iter().find(|(n, _)| n == name).map(|(_, v)| *v))
            .collect()
    }

    pub fn cycles(&self) -> Vec<u64> {
        self.rows.iter().map(|r| r.cycle).collect()
    }

    /// Value records only, original cycle indices dropped.
    pub fn records(&self) -> Vec<&[(String, Value)]> {
        self.rows.iter().map(|r| r.values.as_slice()).collect()
    }
}

pub fn dump_trace(t: &TraceDump) -> String {
    let mut s = String::new();
    match &t.kind {
        TraceKind::Full => s.push_str("trace=full\n"),
        TraceKind::Filtered(p) => {
            let _ = writeln!(s, "trace=filtered filter={p}");
        }
    }
    for row in &t.rows {
        let _ = write!(s, "cycle={}", row.cycle);
        for (name, v) in &row.values {
            let _ = write!(s, " {name}={v}");
        }
        s.push('\n');
    }
    s
}

pub fn load_trace(src: &str) -> Result<TraceDump, ParseError> {
    let mut lines = src.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| ParseError::line(1, "empty trace dump".into()))?;
    let kind = match header.trim() {
        "trace=full" => TraceKind::Full,
        h if h.starts_with("trace=filtered") => {
            let rest = h["trace=filtered".len()..].trim();
            let pred = rest
                .strip_prefix("filter=")
                .ok_or_else(|| ParseError::line(1, "filtered trace missing filter=".into()))?;
            TraceKind::Filtered(pred.to_string())
        }
        other => {
            return Err(ParseError::line(1, format!("bad trace header {other:?}")));
        }
    };

    let mut rows = Vec::new();
    let mut last_cycle: Option<u64> = None;
    for (i, line) in lines {
        let lineno = i as u32 + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let cyc = fields
            .next()
            .and_then(|f| f.strip_prefix("cycle="))
            .ok_or_else(|| ParseError::line(lineno, "row must start with cycle=".into()))?;
        let cycle: u64 = cyc
            .parse()
            .map_err(|_| ParseError::line(lineno, format!("bad cycle {cyc:?}")))?;
        if let Some(prev) = last_cycle {
            if cycle <= prev {
                return Err(ParseError::line(
                    lineno,
                    format!("cycles must increase strictly, {cycle} after {prev}"),
                ));
            }
        }
        last_cycle = Some(cycle);
        let mut values = Vec::new();
        for f in fields {
            let (name, val) = f
                .split_once('=')
                .ok_or_else(|| ParseError::line(lineno, format!("malformed field {f:?}")))?;
            let v = if val == "bot" {
                Value::Bot
            } else {
                Value::Num(val.parse().map_err(|_| {
                    ParseError::line(lineno, format!("bad value {val:?} for {name}"))
                })?)
            };
            values.push((name.to_string(), v));
        }
        rows.push(TraceRow { cycle, values });
    }
    Ok(TraceDump { kind, rows })
}
