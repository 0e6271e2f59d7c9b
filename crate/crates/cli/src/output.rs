//! CSV and JSON serialisation with fixed, round-trippable float formatting.

use std::fmt::Write as _;

use bykov::ode::OdeCell;
use bykov::orbit::MapCell;
use bykov::resonance::{FixedBranch, SurfaceSample};
use bykov::ScanGrid;
use serde::Serialize;

/// Seventeen significant digits; parses back to the same `f64`.
pub fn num(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:.16e}")
    }
}

/// Quotes a CSV field when it contains a separator, quote or newline.
pub fn field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("values serialise");
    s.push('\n');
    s
}

pub fn map_grid_csv(grid: &ScanGrid<MapCell>) -> String {
    let mut out = format!(
        "i,j,{},{},class,lyap1,lyap2,rotation,flags\n",
        field(&grid.rows.name),
        field(&grid.cols.name)
    );
    for (i, j, r, c, cell) in grid.iter() {
        let class = cell.class.map_or("error", |k| k.as_str());
        let mut flags = Vec::new();
        if let Some(e) = &cell.error {
            flags.push(format!("error: {e}"));
        }
        if cell.escaped_seeds > 0 {
            flags.push(format!("escaped seeds {}", cell.escaped_seeds));
        }
        let _ = writeln!(
            out,
            "{i},{j},{},{},{class},{},{},{},{}",
            num(r),
            num(c),
            num(cell.exponents[0]),
            num(cell.exponents[1]),
            num(cell.rotation),
            field(&flags.join(";"))
        );
    }
    out
}

pub fn ode_grid_csv(grid: &ScanGrid<OdeCell>) -> String {
    let mut out = format!(
        "i,j,{},{},class,lyap1,lyap2,lyap3,lyap4,rotation,flags\n",
        field(&grid.rows.name),
        field(&grid.cols.name)
    );
    for (i, j, r, c, cell) in grid.iter() {
        let class = cell.class.map_or_else(|| "error".to_string(), |k| k.to_string());
        let mut flags = cell.flags.clone();
        if let Some(e) = &cell.error {
            flags.push(format!("error: {e}"));
        }
        let e = cell.exponents;
        let _ = writeln!(
            out,
            "{i},{j},{},{},{class},{},{},{},{},,{}",
            num(r),
            num(c),
            num(e[0]),
            num(e[1]),
            num(e[2]),
            num(e[3]),
            field(&flags.join(";"))
        );
    }
    out
}

fn branch_name(b: FixedBranch) -> &'static str {
    match b {
        FixedBranch::CosPositive => "cos_positive",
        FixedBranch::CosNegative => "cos_negative",
        FixedBranch::Tangent => "tangent",
    }
}

pub fn surfaces_csv(samples: &[SurfaceSample]) -> String {
    let mut out = String::from("label,A,lambda,omega,branch,residual\n");
    for s in samples {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            s.label.as_str(),
            num(s.a),
            num(s.lambda),
            num(s.omega),
            branch_name(s.branch),
            num(s.residual)
        );
    }
    out
}

/// Splits CSV text into rows of unquoted fields.
pub fn parse_csv(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .map(|line| {
            let mut fields = Vec::new();
            let mut cur = String::new();
            let mut quoted = false;
            let mut chars = line.chars().peekable();
            while let Some(ch) = chars.next() {
                match (ch, quoted) {
                    ('"', true) if chars.peek() == Some(&'"') => {
                        cur.push('"');
                        chars.next();
                    }
                    ('"', _) => quoted = !quoted,
                    (',', false) => fields.push(std::mem::take(&mut cur)),
                    _ => cur.push(ch),
                }
            }
            fields.push(cur);
            fields
        })
        .collect()
}
