//! CSV emission and parsing for experiment tables.
//!
//! Fixed header row, one row per [`ExperimentRow`], absent values written
//! as `null`. Floats use Rust's shortest round-trip formatting, so parsing
//! a written table gives back the same values bit for bit. The last line
//! is a status marker, `# status=complete` or `# status=incomplete: <why>`.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

use super::experiment::ExperimentRow;

pub const HEADER: &str = "n_dims,max_order,instance,instance_seed,algorithm,best_value,evaluations,\
offspring_mean,offspring_variance,realized_d,theory_mean,theory_variance";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TableStatus {
    Complete,
    Incomplete(String),
}

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map_or_else(|| "null".to_string(), T::to_string)
}

pub fn to_csv_string(rows: &[ExperimentRow], status: &TableStatus) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 2));
    out.push_str(HEADER);
    out.push('\n');
    for r in rows {
        let fields = [
            r.n_dims.to_string(),
            r.max_order.to_string(),
            r.instance.to_string(),
            r.instance_seed.to_string(),
            r.algorithm.to_string(),
            opt(&r.best_value),
            opt(&r.evaluations),
            opt(&r.offspring_mean),
            opt(&r.offspring_variance),
            opt(&r.realized_d),
            opt(&r.theory_mean),
            opt(&r.theory_variance),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    match status {
        TableStatus::Complete => out.push_str("# status=complete\n"),
        TableStatus::Incomplete(why) => {
            out.push_str("# status=incomplete: ");
            out.push_str(&why.replace('\n', " "));
            out.push('\n');
        }
    }
    out
}

pub fn write_csv(path: &Path, rows: &[ExperimentRow], status: &TableStatus) -> Result<()> {
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(to_csv_string(rows, status).as_bytes()).map_err(|e| Error::io(path, e))
}

pub fn parse_csv(text: &str) -> Result<(Vec<ExperimentRow>, TableStatus)> {
    fn bad(line: usize, msg: impl Into<String>) -> Error {
        Error::Format { kind: "experiment csv", msg: format!("line {line}: {}", msg.into()) }
    }
    fn field<T: std::str::FromStr>(line: usize, name: &str, s: &str) -> Result<T> {
        s.parse().map_err(|_| bad(line, format!("{name}: cannot parse {s:?}")))
    }
    fn opt_field<T: std::str::FromStr>(line: usize, name: &str, s: &str) -> Result<Option<T>> {
        if s == "null" {
            Ok(None)
        } else {
            field(line, name, s).map(Some)
        }
    }

    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == HEADER => {}
        _ => return Err(bad(1, "missing or unexpected header")),
    }
    let mut rows = Vec::new();
    let mut status = None;
    for (i, line) in lines {
        let lineno = i + 1;
        if let Some(marker) = line.strip_prefix("# status=") {
            status = Some(match marker.strip_prefix("incomplete") {
                Some(rest) => TableStatus::Incomplete(rest.trim_start_matches(':').trim().to_string()),
                None if marker.trim() == "complete" => TableStatus::Complete,
                None => return Err(bad(lineno, format!("unknown status {marker:?}"))),
            });
            continue;
        }
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 12 {
            return Err(bad(lineno, format!("expected 12 fields, got {}", f.len())));
        }
        rows.push(ExperimentRow {
            n_dims: field(lineno, "n_dims", f[0])?,
            max_order: field(lineno, "max_order", f[1])?,
            instance: field(lineno, "instance", f[2])?,
            instance_seed: field(lineno, "instance_seed", f[3])?,
            algorithm: f[4].parse()?,
            best_value: opt_field(lineno, "best_value", f[5])?,
            evaluations: opt_field(lineno, "evaluations", f[6])?,
            offspring_mean: opt_field(lineno, "offspring_mean", f[7])?,
            offspring_variance: opt_field(lineno, "offspring_variance", f[8])?,
            realized_d: opt_field(lineno, "realized_d", f[9])?,
            theory_mean: opt_field(lineno, "theory_mean", f[10])?,
            theory_variance: opt_field(lineno, "theory_variance", f[11])?,
        });
    }
    // a table without a marker was cut off mid-write
    let status = status.unwrap_or_else(|| TableStatus::Incomplete("missing status marker".into()));
    Ok((rows, status))
}

pub fn read_csv(path: &Path) -> Result<(Vec<ExperimentRow>, TableStatus)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&text)
}
