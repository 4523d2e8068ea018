//! Artifact writers. Every number goes out as `{:.14e}` so reruns are
//! byte-identical.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use burgers_core::stepper::LevelRecord;
use serde_json::Value;

use crate::CliError;

pub fn num(x: f64) -> String {
    format!("{x:.14e}")
}

/// Empty field for a missing value.
pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        ensure_dir(parent)?;
    }
    fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn write_json(path: &Path, value: &Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("json value serializes");
    text.push('\n');
    write_text(path, &text)
}

/// CSV with a header row; `rows` are already formatted fields.
pub fn csv(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn trajectory_csv(records: &[LevelRecord<f64>]) -> String {
    csv(
        &[
            "n",
            "t",
            "l2",
            "h1_semi",
            "linf",
            "W0",
            "WN",
            "g0",
            "gN",
            "newton_iters",
        ],
        records.iter().map(|r| {
            vec![
                r.n.to_string(),
                num(r.t),
                num(r.l2),
                num(r.h1_semi),
                num(r.linf),
                num(r.w0),
                num(r.wn),
                num(r.g0),
                num(r.gn),
                r.newton.iterations.to_string(),
            ]
        }),
    )
}

/// Two-column whitespace panel for gnuplot-style tools.
pub fn dat_panel(columns: [&str; 2], points: impl IntoIterator<Item = (f64, f64)>) -> String {
    let mut out = format!("# {} {}\n", columns[0], columns[1]);
    for (a, b) in points {
        let _ = writeln!(out, "{} {}", num(a), num(b));
    }
    out
}
