//! Sweep rows, their CSV form, the fixed-width results table and the trend verdict.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::workload::round2;

/// Header of the bench CSV, byte-exact.
pub const CSV_HEADER: &str =
    "func_num,avg_map_ms,avg_reduce_ms,avg_map_mem_mb,avg_reduce_mem_mb,map_pct,reduce_pct,wall_clock_ms";

/// Printed with every report so the percentage columns are never misread.
pub const WORKLOAD_PCT_NOTE: &str =
    "workload % = phase share of (avg_map_ms + avg_reduce_ms), averaged over invocations";

/// One sweep point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub func_num: u32,
    pub avg_map_ms: f64,
    pub avg_reduce_ms: f64,
    pub avg_map_mem_mb: f64,
    pub avg_reduce_mem_mb: f64,
    pub map_pct: f64,
    pub reduce_pct: f64,
    pub wall_clock_ms: f64,
}

impl BenchRow {
    /// The row as it survives a CSV round trip.
    pub fn quantized(&self) -> Self {
        Self {
            func_num: self.func_num,
            avg_map_ms: round2(self.avg_map_ms),
            avg_reduce_ms: round2(self.avg_reduce_ms),
            avg_map_mem_mb: round2(self.avg_map_mem_mb),
            avg_reduce_mem_mb: round2(self.avg_reduce_mem_mb),
            map_pct: round2(self.map_pct),
            reduce_pct: round2(self.reduce_pct),
            wall_clock_ms: round2(self.wall_clock_ms),
        }
    }

    fn values(&self) -> [f64; 7] {
        [
            self.avg_map_ms,
            self.avg_reduce_ms,
            self.avg_map_mem_mb,
            self.avg_reduce_mem_mb,
            self.map_pct,
            self.reduce_pct,
            self.wall_clock_ms,
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CsvError {
    #[error("missing or unexpected header")]
    Header,
    #[error("line {line}: expected 8 fields")]
    FieldCount { line: usize },
    #[error("line {line}: field {field} is not a valid number")]
    Number { line: usize, field: usize },
    #[error("no data rows")]
    Empty,
}

/// Header plus one line per row; floats with two decimals.
pub fn format_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in rows {
        let _ = write!(out, "{}", row.func_num);
        for v in row.values() {
            let _ = write!(out, ",{:.2}", round2(v));
        }
        out.push('\n');
    }
    out
}

pub fn parse_csv(text: &str) -> Result<Vec<BenchRow>, CsvError> {
    let mut lines = text.lines();
    if lines.next() != Some(CSV_HEADER) {
        return Err(CsvError::Header);
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 8 {
            return Err(CsvError::FieldCount { line: line_no });
        }
        let func_num = fields[0].parse::<u32>().map_err(|_| CsvError::Number {
            line: line_no,
            field: 1,
        })?;
        let mut v = [0.0f64; 7];
        for (j, f) in fields[1..].iter().enumerate() {
            v[j] = f
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or(CsvError::Number {
                    line: line_no,
                    field: j + 2,
                })?;
        }
        rows.push(BenchRow {
            func_num,
            avg_map_ms: v[0],
            avg_reduce_ms: v[1],
            avg_map_mem_mb: v[2],
            avg_reduce_mem_mb: v[3],
            map_pct: v[4],
            reduce_pct: v[5],
            wall_clock_ms: v[6],
        });
    }
    if rows.is_empty() {
        return Err(CsvError::Empty);
    }
    Ok(rows)
}

const FUNC_HEADER: &str = "Func Num";
const TIME_HEADER: &str = "Average Execution Time /ms";
const RAM_HEADER: &str = "Average RAM Usage /MB";
const MIN_CELL: usize = 12;

/// Fixed-width table with the columns of the published results table:
/// function count, then mapper/reducer time, then mapper/reducer RAM.
pub fn render_table(rows: &[BenchRow]) -> String {
    let cells: Vec<[String; 4]> = rows
        .iter()
        .map(|r| {
            [
                r.avg_map_ms,
                r.avg_reduce_ms,
                r.avg_map_mem_mb,
                r.avg_reduce_mem_mb,
            ]
            .map(|v| format!("{:.2}", round2(v)))
        })
        .collect();
    let funcs: Vec<String> = rows.iter().map(|r| format!("{}", r.func_num)).collect();

    let group = TIME_HEADER.len().max(RAM_HEADER.len());
    let w = cells
        .iter()
        .flatten()
        .map(String::len)
        .max()
        .unwrap_or(0)
        .max(MIN_CELL)
        .max(group.div_ceil(2) - 1);
    let f = funcs
        .iter()
        .map(String::len)
        .max()
        .unwrap_or(0)
        .max(FUNC_HEADER.len());
    let span = 2 * w + 3;

    let dash = |n: usize| "-".repeat(n);
    let group_rule = format!("+{}+{}+{}+\n", dash(f + 2), dash(span + 2), dash(span + 2));
    let cell_rule = format!(
        "+{}+{}+{}+{}+{}+\n",
        dash(f + 2),
        dash(w + 2),
        dash(w + 2),
        dash(w + 2),
        dash(w + 2)
    );

    let mut out = String::new();
    out.push_str(&group_rule);
    let _ = writeln!(
        out,
        "| {FUNC_HEADER:<f$} | {TIME_HEADER:<span$} | {RAM_HEADER:<span$} |"
    );
    let _ = writeln!(
        out,
        "| {:<f$} | {:>w$} | {:>w$} | {:>w$} | {:>w$} |",
        "", "Mapper", "Reducer", "Mapper", "Reducer"
    );
    out.push_str(&cell_rule);
    for (func, c) in funcs.iter().zip(&cells) {
        let _ = writeln!(
            out,
            "| {func:>f$} | {:>w$} | {:>w$} | {:>w$} | {:>w$} |",
            c[0], c[1], c[2], c[3]
        );
    }
    out.push_str(&cell_rule);
    out
}

/// Decrease between two adjacent sweep points (earlier minus later).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairDelta {
    pub from: u32,
    pub to: u32,
    pub map_ms: f64,
    pub reduce_ms: f64,
    pub map_mem_mb: f64,
    pub reduce_mem_mb: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendVerdict {
    /// Mapper and reducer average times both strictly fall at every step.
    pub time_monotone_decreasing: bool,
    /// Mapper and reducer average memory both strictly fall at every step.
    pub mem_monotone_decreasing: bool,
    /// The first step's mapper-time drop exceeds the last step's. Vacuously
    /// true with fewer than two steps.
    pub diminishing_returns: bool,
    pub details: Vec<PairDelta>,
}

/// Computed on the CSV-quantized rows, so a verdict re-derived from a
/// persisted CSV always agrees.
pub fn evaluate_trend(rows: &[BenchRow]) -> TrendVerdict {
    let mut rows: Vec<BenchRow> = rows.iter().map(BenchRow::quantized).collect();
    rows.sort_by_key(|r| r.func_num);
    let details: Vec<PairDelta> = rows
        .windows(2)
        .map(|p| PairDelta {
            from: p[0].func_num,
            to: p[1].func_num,
            map_ms: round2(p[0].avg_map_ms - p[1].avg_map_ms),
            reduce_ms: round2(p[0].avg_reduce_ms - p[1].avg_reduce_ms),
            map_mem_mb: round2(p[0].avg_map_mem_mb - p[1].avg_map_mem_mb),
            reduce_mem_mb: round2(p[0].avg_reduce_mem_mb - p[1].avg_reduce_mem_mb),
        })
        .collect();
    let time_monotone_decreasing = details.iter().all(|d| d.map_ms > 0.0 && d.reduce_ms > 0.0);
    let mem_monotone_decreasing = details
        .iter()
        .all(|d| d.map_mem_mb > 0.0 && d.reduce_mem_mb > 0.0);
    let diminishing_returns = match (details.first(), details.last()) {
        (Some(first), Some(last)) if details.len() >= 2 => first.map_ms > last.map_ms,
        _ => true,
    };
    TrendVerdict {
        time_monotone_decreasing,
        mem_monotone_decreasing,
        diminishing_returns,
        details,
    }
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

/// Human-readable verdict and workload split, one fact per line.
pub fn render_verdict(rows: &[BenchRow], verdict: &TrendVerdict) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "execution time strictly decreasing: {}",
        yes_no(verdict.time_monotone_decreasing)
    );
    let _ = writeln!(
        out,
        "memory strictly decreasing:         {}",
        yes_no(verdict.mem_monotone_decreasing)
    );
    let _ = writeln!(
        out,
        "diminishing returns (mapper time):  {}",
        yes_no(verdict.diminishing_returns)
    );
    for d in &verdict.details {
        let _ = writeln!(
            out,
            "  {} -> {}: map {:.2} ms, reduce {:.2} ms, map mem {:.2} MB, reduce mem {:.2} MB",
            d.from, d.to, d.map_ms, d.reduce_ms, d.map_mem_mb, d.reduce_mem_mb
        );
    }
    let _ = writeln!(out, "{WORKLOAD_PCT_NOTE}");
    for r in rows {
        let _ = writeln!(
            out,
            "  func {}: map {:.2}% / reduce {:.2}%",
            r.func_num, r.map_pct, r.reduce_pct
        );
    }
    out
}
