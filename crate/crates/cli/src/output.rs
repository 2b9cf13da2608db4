use std::io::Write;

use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Format, RunConfig};

pub const SIGN_CONVENTION: &str = "positive dB = squeezing below projection noise";

/// `%.12g`: 12 significant digits, trailing zeros trimmed.
pub fn fmt_g(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    if (-4..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim(&format!("{x:.decimals$}")).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim(mantissa), exp.abs())
    }
}

fn trim(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// A table plus trailing `#` lines for CSV, or an extra JSON payload.
pub struct Table {
    pub header: &'static [&'static str],
    pub rows: Vec<Vec<Cell>>,
    pub footer: Vec<String>,
    pub payload: Value,
}

pub enum Cell {
    Num(f64),
    Int(usize),
    Text(&'static str),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => fmt_g(*x),
            Cell::Int(k) => k.to_string(),
            Cell::Text(s) => (*s).to_string(),
        }
    }
}

fn meta(command: &str, cfg: &RunConfig) -> Value {
    json!({
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "config": cfg,
        "convention": SIGN_CONVENTION,
    })
}

pub fn render(command: &str, cfg: &RunConfig, table: &Table) -> String {
    match cfg.format {
        Format::Csv => render_csv(command, cfg, table),
        Format::Json => render_json(command, cfg, table),
    }
}

fn render_csv(command: &str, cfg: &RunConfig, table: &Table) -> String {
    let mut out = String::new();
    out.push_str(&format!("# squeezekit {}\n", env!("CARGO_PKG_VERSION")));
    out.push_str(&format!("# command: {command}\n"));
    out.push_str(&format!(
        "# config: {}\n",
        serde_json::to_string(cfg).unwrap()
    ));
    out.push_str(&format!("# {SIGN_CONVENTION}\n"));
    out.push_str(&table.header.join(","));
    out.push('\n');
    for row in &table.rows {
        let cells: Vec<String> = row.iter().map(Cell::render).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    for line in &table.footer {
        out.push_str(&format!("# {line}\n"));
    }
    out
}

fn render_json(command: &str, cfg: &RunConfig, table: &Table) -> String {
    let mut doc = serde_json::Map::new();
    doc.insert("meta".into(), meta(command, cfg));
    if let Value::Object(extra) = &table.payload {
        for (k, v) in extra {
            doc.insert(k.clone(), v.clone());
        }
    }
    let mut text = serde_json::to_string_pretty(&Value::Object(doc)).unwrap();
    text.push('\n');
    text
}

pub fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).unwrap()
}

pub fn write(cfg: &RunConfig, text: &str) -> std::io::Result<()> {
    match &cfg.out {
        Some(path) => std::fs::write(path, text),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::fmt_g;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_g(0.0), "0");
        assert_eq!(fmt_g(1.0), "1");
        assert_eq!(fmt_g(-2.5), "-2.5");
        assert_eq!(fmt_g(0.1715728752538099), "0.171572875254");
        assert_eq!(fmt_g(1963.4954084936207), "1963.49540849");
        assert_eq!(fmt_g(1e-7), "1e-07");
        assert_eq!(fmt_g(3.25e-9), "3.25e-09");
        assert_eq!(fmt_g(1e12), "1e+12");
        assert_eq!(fmt_g(123456789012.0), "123456789012");
        assert_eq!(fmt_g(0.00012), "0.00012");
        assert_eq!(fmt_g(9.9999999999999e-6), "1e-05");
    }
}
