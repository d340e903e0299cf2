//! CSV and JSON writers for sweep results, plus a CSV reader for checks.
//!
//! CSV layout: `#` provenance lines, then the header
//! `<param>,<outputs...>,ss_residual,fs_residual,eq_residual,flag`.
//! Non-finite values are written as empty cells.

use std::fs::File;
use std::io::{BufRead, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use clap::ValueEnum;
use serde_json::{Map, Value};

use crate::sweep::{Provenance, Row, SweepResult, RESIDUAL_COLUMNS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Shortest representation that parses back to the same bits.
pub fn format_f64(v: f64) -> String {
    if !v.is_finite() {
        String::new()
    } else if v != 0.0 && (v.abs() < 1e-4 || v.abs() >= 1e16) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

pub fn write_csv<W: Write>(result: &SweepResult, mut out: W) -> Result<()> {
    writeln!(out, "# homophily-lab {}", result.provenance.version)?;
    writeln!(out, "# config-sha256 {}", result.provenance.config_sha256)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(result.columns())?;
    for row in &result.rows {
        let mut rec = vec![format_f64(row.value)];
        rec.extend(row.values.iter().map(|&v| format_f64(v)));
        rec.extend(row.residuals.iter().map(|&v| format_f64(v)));
        rec.push(row.flag.clone());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn to_json(result: &SweepResult) -> Value {
    let cols = result.columns();
    let rows = result
        .rows
        .iter()
        .map(|row| {
            let nums = std::iter::once(row.value)
                .chain(row.values.iter().copied())
                .chain(row.residuals.iter().copied());
            let mut obj = Map::new();
            for (name, v) in cols.iter().zip(nums) {
                obj.insert(name.clone(), serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number));
            }
            obj.insert("flag".into(), Value::String(row.flag.clone()));
            Value::Object(obj)
        })
        .collect();
    Value::Array(rows)
}

pub fn write_json<W: Write>(result: &SweepResult, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, &to_json(result))?;
    writeln!(out)?;
    Ok(())
}

/// Writes `result` to `path` in `format`.
pub fn emit(result: &SweepResult, format: Format, path: &Path) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut out = BufWriter::new(file);
    match format {
        Format::Csv => write_csv(result, &mut out),
        Format::Json => write_json(result, &mut out),
    }
    .and_then(|_| Ok(out.flush()?))
    .with_context(|| format!("writing {}", path.display()))
}

fn parse_cell(s: &str) -> Result<f64> {
    if s.is_empty() {
        Ok(f64::NAN)
    } else {
        f64::from_str(s).map_err(|e| anyhow!("bad number {s:?}: {e}"))
    }
}

/// Parses a CSV produced by [`write_csv`].
pub fn read_csv<R: Read>(input: R) -> Result<SweepResult> {
    let mut reader = std::io::BufReader::new(input);
    let mut meta = Vec::new();
    let mut rest = String::new();
    let mut line = String::new();
    while reader.read_line(&mut line)? > 0 {
        if let Some(m) = line.strip_prefix('#') {
            meta.push(m.trim().to_string());
            line.clear();
        } else {
            rest.push_str(&line);
            break;
        }
    }
    reader.read_to_string(&mut rest)?;

    let field = |key: &str| {
        meta.iter()
            .find_map(|m| m.strip_prefix(key).map(|v| v.trim().to_string()))
            .ok_or_else(|| anyhow!("missing `# {key}` header"))
    };
    let provenance = Provenance {
        version: field("homophily-lab")?,
        config_sha256: field("config-sha256")?,
    };

    let mut csv = csv::Reader::from_reader(rest.as_bytes());
    let header: Vec<String> = csv.headers()?.iter().map(String::from).collect();
    let n = header.len();
    if n < 5 || header[n - 1] != "flag" || header[n - 4..n - 1] != RESIDUAL_COLUMNS {
        bail!("unexpected header {header:?}");
    }
    let outputs = header[1..n - 4].to_vec();
    let mut rows = Vec::new();
    for rec in csv.records() {
        let rec = rec?;
        let nums = rec.iter().take(n - 1).map(parse_cell).collect::<Result<Vec<_>>>()?;
        rows.push(Row {
            value: nums[0],
            values: nums[1..n - 4].to_vec(),
            residuals: [nums[n - 4], nums[n - 3], nums[n - 2]],
            flag: rec[n - 1].to_string(),
        });
    }
    Ok(SweepResult {
        param: header[0].clone(),
        outputs,
        rows,
        provenance,
    })
}
