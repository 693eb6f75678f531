//! Number parsing and CSV/JSON writers.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;

/// Integer from `12345`, `1e7` or `2.5e6`.
pub fn parse_u64(text: &str) -> Result<u64, String> {
    let t = text.trim().replace('_', "");
    if let Ok(v) = t.parse::<u64>() {
        return Ok(v);
    }
    let f: f64 = t.parse().map_err(|_| format!("{text:?} is not a number"))?;
    if f < 0.0 || f.fract() != 0.0 || f > u64::MAX as f64 {
        return Err(format!("{text:?} is not a nonnegative integer"));
    }
    Ok(f as u64)
}

pub fn parse_u128(text: &str) -> Result<u128, String> {
    let t = text.trim().replace('_', "");
    if let Ok(v) = t.parse::<u128>() {
        return Ok(v);
    }
    let f: f64 = t.parse().map_err(|_| format!("{text:?} is not a number"))?;
    if f < 0.0 || f.fract() != 0.0 || f >= u128::MAX as f64 {
        return Err(format!("{text:?} is not a nonnegative integer"));
    }
    Ok(f as u128)
}

/// Comma-separated integers.
pub fn parse_list<T: std::str::FromStr>(text: &str) -> Result<Vec<T>, String> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse::<T>().map_err(|_| format!("{s:?} is not an integer")))
        .collect()
}

/// 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

pub fn is_json(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()
}

pub fn print_json<T: Serialize>(value: &T) -> io::Result<()> {
    let stdout = io::stdout();
    let mut lock = stdout.lock();
    serde_json::to_writer(&mut lock, value)?;
    writeln!(lock)
}

/// CSV with an optional `#key=value,...` metadata line before the header.
pub fn write_csv(
    path: &Path,
    metadata: Option<&[(&str, String)]>,
    header: &[String],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> io::Result<()> {
    let mut file = BufWriter::new(File::create(path)?);
    if let Some(meta) = metadata {
        let line: Vec<String> = meta.iter().map(|(k, v)| format!("{k}={v}")).collect();
        writeln!(file, "#{}", line.join(","))?;
    }
    let mut w = csv::Writer::from_writer(file);
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()
}
