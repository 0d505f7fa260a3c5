//! CSV files for datasets (`t,force_N,disp_m`) and command voltages
//! (`t,voltage_V`). Lines starting with `#` and blank lines are ignored;
//! columns are located by header name.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::signals::{Dataset, TimeSeries};

pub const DATASET_HEADER: [&str; 3] = ["t", "force_N", "disp_m"];
pub const COMMAND_HEADER: [&str; 2] = ["t", "voltage_V"];

/// Largest accepted relative deviation of a time step from the mean step.
pub const TIMESTAMP_TOLERANCE: f64 = 1e-6;

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Reads the named columns; returns `(dt, columns)` in `wanted` order,
/// time excluded.
fn parse_table(text: &str, wanted: &[&str]) -> Result<(f64, Vec<Vec<f64>>)> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (header_line, header) = lines
        .next()
        .ok_or_else(|| parse_error(1, "file has no header"))?;
    let names: Vec<&str> = header.split(',').map(str::trim).collect();
    let index: Vec<usize> = wanted
        .iter()
        .map(|w| {
            names
                .iter()
                .position(|n| n == w)
                .ok_or_else(|| parse_error(header_line, format!("missing column `{w}`")))
        })
        .collect::<Result<_>>()?;

    let mut columns = vec![Vec::new(); wanted.len()];
    let mut row_lines = Vec::new();
    for (line, row) in lines {
        let cells: Vec<&str> = row.split(',').map(str::trim).collect();
        if cells.len() != names.len() {
            return Err(parse_error(
                line,
                format!("expected {} cells, found {}", names.len(), cells.len()),
            ));
        }
        for (col, &i) in columns.iter_mut().zip(&index) {
            let v: f64 = cells[i]
                .parse()
                .map_err(|_| parse_error(line, format!("`{}` is not a number", cells[i])))?;
            if !v.is_finite() {
                return Err(parse_error(line, format!("`{}` is not finite", cells[i])));
            }
            col.push(v);
        }
        row_lines.push(line);
    }

    let t = &columns[0];
    if t.len() < 2 {
        return Err(parse_error(
            row_lines.last().copied().unwrap_or(header_line),
            "need at least two samples",
        ));
    }
    let n = t.len();
    let dt = (t[n - 1] - t[0]) / (n - 1) as f64;
    if !(dt > 0.0) {
        return Err(parse_error(row_lines[1], "timestamps must increase"));
    }
    for k in 1..n {
        let step = t[k] - t[k - 1];
        if ((step - dt) / dt).abs() > TIMESTAMP_TOLERANCE {
            return Err(parse_error(
                row_lines[k],
                format!("non-uniform timestamp: step {step} differs from mean step {dt}"),
            ));
        }
    }
    columns.remove(0);
    Ok((dt, columns))
}

fn write_table(dt: f64, header: &[&str], columns: &[&[f64]]) -> String {
    let n = columns[0].len();
    let mut out = String::with_capacity(n * 48);
    out.push_str(&header.join(","));
    out.push('\n');
    for k in 0..n {
        // `{}` prints the shortest representation that parses back exactly
        let _ = write!(out, "{}", k as f64 * dt);
        for c in columns {
            let _ = write!(out, ",{}", c[k]);
        }
        out.push('\n');
    }
    out
}

pub fn parse_dataset(text: &str) -> Result<Dataset> {
    let (dt, mut cols) = parse_table(text, &DATASET_HEADER)?;
    let disp = cols.pop().expect("two columns");
    let force = cols.pop().expect("two columns");
    Dataset::new(dt, force, disp)
}

pub fn format_dataset(data: &Dataset) -> String {
    write_table(
        data.dt(),
        &DATASET_HEADER,
        &[data.force(), data.displacement()],
    )
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    parse_dataset(&std::fs::read_to_string(path)?)
}

pub fn write_dataset(path: impl AsRef<Path>, data: &Dataset) -> Result<()> {
    Ok(std::fs::write(path, format_dataset(data))?)
}

pub fn parse_command(text: &str) -> Result<TimeSeries> {
    let (dt, mut cols) = parse_table(text, &COMMAND_HEADER)?;
    TimeSeries::new(dt, cols.pop().expect("one column"))
}

pub fn format_command(command: &TimeSeries) -> String {
    write_table(command.dt(), &COMMAND_HEADER, &[command.values()])
}

pub fn load_command(path: impl AsRef<Path>) -> Result<TimeSeries> {
    parse_command(&std::fs::read_to_string(path)?)
}

pub fn write_command(path: impl AsRef<Path>, command: &TimeSeries) -> Result<()> {
    Ok(std::fs::write(path, format_command(command))?)
}
