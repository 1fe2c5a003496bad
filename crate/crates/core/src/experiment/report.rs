use thiserror::Error;

use crate::train::{aggregate_runs, Aggregate, RunResult};
use crate::trans_repr::ClsStrategy;

use super::{GridPoint, Limit, RunRecord};

#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}: {msg}")]
pub struct ReportError {
    pub line: usize,
    pub msg: String,
}

fn bad(line: usize, msg: impl Into<String>) -> ReportError {
    ReportError { line, msg: msg.into() }
}

fn display_name(p: &GridPoint) -> String {
    if p.is_baseline() {
        "None/None".into()
    } else {
        format!("{}/{}/{}", p.enc, p.dec, p.cls)
    }
}

fn pct(v: f64) -> String {
    format!("{:.2}", 100.0 * v)
}

/// Space-padded columns; the first `left` columns are left-aligned.
pub fn render_table(header: &[String], rows: &[Vec<String>], left: usize) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for r in rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |cells: &[String]| {
        let parts: Vec<String> = cells
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(i, (c, &w))| if i < left { format!("{c:<w$}") } else { format!("{c:>w$}") })
            .collect();
        parts.join("  ").trim_end().to_owned() + "\n"
    };
    let mut out = line(header);
    out.push_str(&line(&widths.iter().map(|&w| "-".repeat(w)).collect::<Vec<_>>()));
    for r in rows {
        out.push_str(&line(r));
    }
    out
}

const RUNS_HEADER: &str = "config,enc,dec,cls,limit,seed,accuracy,precision,recall,f1,edit_distance,best_epoch";

pub fn runs_csv(records: &[RunRecord]) -> String {
    let mut out = format!("{RUNS_HEADER}\n");
    for r in records {
        let m = &r.result;
        out.push_str(&format!(
            "{},{},{},{},{},{},{:.6},{:.6},{:.6},{:.6},{},{}\n",
            r.point.label(),
            r.point.enc,
            r.point.dec,
            r.point.cls,
            r.limit,
            r.seed,
            m.accuracy,
            m.precision,
            m.recall,
            m.f1,
            m.edit_distance,
            r.best_epoch.map_or(String::new(), |e| e.to_string()),
        ));
    }
    out
}

fn field<V: std::str::FromStr>(cells: &[&str], i: usize, line: usize) -> Result<V, ReportError> {
    let c = cells.get(i).ok_or_else(|| bad(line, format!("missing column {i}")))?;
    c.parse().map_err(|_| bad(line, format!("bad value {c:?}")))
}

/// Inverse of [`runs_csv`]; histories are not stored and come back empty.
pub fn parse_runs_csv(text: &str) -> Result<Vec<RunRecord>, ReportError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == RUNS_HEADER => {}
        _ => return Err(bad(1, "missing runs header")),
    }
    lines
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, l)| {
            let n = i + 1;
            let c: Vec<&str> = l.split(',').collect();
            if c.len() != 12 {
                return Err(bad(n, format!("expected 12 columns, found {}", c.len())));
            }
            let cls: ClsStrategy = field(&c, 3, n)?;
            Ok(RunRecord {
                point: GridPoint {
                    enc: field(&c, 1, n)?,
                    dec: field(&c, 2, n)?,
                    cls,
                },
                limit: field(&c, 4, n)?,
                seed: field(&c, 5, n)?,
                result: RunResult {
                    accuracy: field(&c, 6, n)?,
                    precision: field(&c, 7, n)?,
                    recall: field(&c, 8, n)?,
                    f1: field(&c, 9, n)?,
                    edit_distance: field(&c, 10, n)?,
                    history: Vec::new(),
                },
                best_epoch: if c[11].is_empty() { None } else { Some(field(&c, 11, n)?) },
            })
        })
        .collect()
}

/// Mean and std over the seeds of one (configuration, limit) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub point: GridPoint,
    pub limit: Limit,
    pub aggregate: Aggregate,
}

fn ordered<T: PartialEq + Copy>(items: impl Iterator<Item = T>) -> Vec<T> {
    let mut out = Vec::new();
    for x in items {
        if !out.contains(&x) {
            out.push(x);
        }
    }
    out
}

/// Cells in order of first appearance.
pub fn summarize(records: &[RunRecord]) -> Vec<SummaryRow> {
    ordered(records.iter().map(|r| (r.point, r.limit)))
        .into_iter()
        .map(|(point, limit)| {
            let results: Vec<RunResult> = records.iter().filter(|r| r.point == point && r.limit == limit).map(|r| r.result.clone()).collect();
            SummaryRow {
                point,
                limit,
                aggregate: aggregate_runs(&results).expect("cell has at least one run"),
            }
        })
        .collect()
}

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::from("config,enc,dec,cls,limit,runs,accuracy_mean,accuracy_std,f1_mean,f1_std,edit_distance_mean,edit_distance_std\n");
    for r in rows {
        let a = &r.aggregate;
        out.push_str(&format!(
            "{},{},{},{},{},{},{:.6},{:.6},{:.6},{:.6},{:.4},{:.4}\n",
            r.point.label(),
            r.point.enc,
            r.point.dec,
            r.point.cls,
            r.limit,
            a.runs,
            a.accuracy.mean,
            a.accuracy.std,
            a.f1.mean,
            a.f1.std,
            a.edit_distance.mean,
            a.edit_distance.std,
        ));
    }
    out
}

/// Rows are (limit, metric), columns are configurations. `std` selects the
/// standard-deviation table instead of the means.
pub fn metrics_table(rows: &[SummaryRow], std: bool) -> String {
    let points = ordered(rows.iter().map(|r| r.point));
    let limits = ordered(rows.iter().map(|r| r.limit));
    let mut header = vec!["Limit".to_owned(), "Metric".to_owned()];
    header.extend(points.iter().map(display_name));
    let mut body = Vec::new();
    for &limit in &limits {
        for metric in ["Acc", "F1", "ED"] {
            let mut row = vec![limit.to_string(), metric.to_owned()];
            for p in &points {
                let cell = rows.iter().find(|r| r.point == *p && r.limit == limit).map(|r| {
                    let a = &r.aggregate;
                    let m = match metric {
                        "Acc" => a.accuracy,
                        "F1" => a.f1,
                        _ => a.edit_distance,
                    };
                    let v = if std { m.std } else { m.mean };
                    if metric == "ED" {
                        format!("{v:.2}")
                    } else {
                        pct(v)
                    }
                });
                row.push(cell.unwrap_or_else(|| "-".into()));
            }
            body.push(row);
        }
    }
    render_table(&header, &body, 2)
}

/// Report files for a set of runs: per-run CSV, per-cell summary CSV and
/// the mean and std tables.
pub fn experiment_reports(records: &[RunRecord]) -> Vec<(String, String)> {
    let rows = summarize(records);
    vec![
        ("runs.csv".into(), runs_csv(records)),
        ("summary.csv".into(), summary_csv(&rows)),
        ("results.txt".into(), metrics_table(&rows, false)),
        ("results_std.txt".into(), metrics_table(&rows, true)),
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub point: GridPoint,
    /// Accuracy per limit, in the order of [`SweepResult::limits`].
    pub accuracies: Vec<f64>,
    pub average: f64,
}

/// Accuracy matrix of a strategy sweep, sorted by cross-limit average
/// (descending, grid order on ties).
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub limits: Vec<Limit>,
    pub rows: Vec<SweepRow>,
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        0.0
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

impl SweepResult {
    pub fn from_records(points: &[GridPoint], limits: &[Limit], records: &[RunRecord]) -> Self {
        let mut rows: Vec<SweepRow> = points
            .iter()
            .map(|&point| {
                let accuracies: Vec<f64> = limits
                    .iter()
                    .map(|&l| mean(&records.iter().filter(|r| r.point == point && r.limit == l).map(|r| r.result.accuracy).collect::<Vec<_>>()))
                    .collect();
                SweepRow {
                    point,
                    average: mean(&accuracies),
                    accuracies,
                }
            })
            .collect();
        rows.sort_by(|a, b| b.average.total_cmp(&a.average));
        Self { limits: limits.to_vec(), rows }
    }

    fn header(&self, with_cls: bool, csv: bool) -> Vec<String> {
        let mut h: Vec<String> = if csv { vec!["enc".into(), "dec".into()] } else { vec!["Encoder".into(), "Decoder".into()] };
        if with_cls {
            h.push(if csv { "cls" } else { "CLS" }.into());
        }
        h.extend(self.limits.iter().map(|l| l.to_string()));
        h.push(if csv { "average" } else { "Average" }.into());
        if csv {
            h.push("baseline".into());
        }
        h
    }

    pub fn to_csv(&self, with_cls: bool) -> String {
        let mut out = self.header(with_cls, true).join(",") + "\n";
        for r in &self.rows {
            let mut cells = vec![r.point.enc.to_string(), r.point.dec.to_string()];
            if with_cls {
                cells.push(r.point.cls.to_string());
            }
            cells.extend(r.accuracies.iter().map(|a| format!("{a:.6}")));
            cells.push(format!("{:.6}", r.average));
            cells.push(u8::from(r.point.is_baseline()).to_string());
            out.push_str(&(cells.join(",") + "\n"));
        }
        out
    }

    /// Percent accuracies; the baseline's strategy names are wrapped in
    /// underscores.
    pub fn to_text(&self, with_cls: bool) -> String {
        let body: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                let mark = |s: String| if r.point.is_baseline() { format!("_{s}_") } else { s };
                let mut cells = vec![mark(r.point.enc.to_string()), mark(r.point.dec.to_string())];
                if with_cls {
                    cells.push(if r.point.is_baseline() { "-".into() } else { r.point.cls.to_string() });
                }
                cells.extend(r.accuracies.iter().map(|&a| pct(a)));
                cells.push(pct(r.average));
                cells
            })
            .collect();
        render_table(&self.header(with_cls, false), &body, if with_cls { 3 } else { 2 })
    }

    pub fn parse_csv(text: &str, with_cls: bool) -> Result<Self, ReportError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.is_empty());
        let (_, header) = lines.next().ok_or_else(|| bad(1, "empty sweep CSV"))?;
        let h: Vec<&str> = header.split(',').collect();
        let fixed = if with_cls { 3 } else { 2 };
        if h.len() < fixed + 2 || h[h.len() - 2] != "average" || h[h.len() - 1] != "baseline" {
            return Err(bad(1, "malformed sweep header"));
        }
        let limits = h[fixed..h.len() - 2].iter().map(|l| l.parse().map_err(|_| bad(1, format!("bad limit {l:?}")))).collect::<Result<Vec<Limit>, _>>()?;
        let rows = lines
            .map(|(i, l)| {
                let n = i + 1;
                let c: Vec<&str> = l.split(',').collect();
                if c.len() != h.len() {
                    return Err(bad(n, "column count differs from header"));
                }
                let cls = if with_cls { field(&c, 2, n)? } else { ClsStrategy::None };
                Ok(SweepRow {
                    point: GridPoint {
                        enc: field(&c, 0, n)?,
                        dec: field(&c, 1, n)?,
                        cls,
                    },
                    accuracies: (fixed..fixed + limits.len()).map(|j| field(&c, j, n)).collect::<Result<_, _>>()?,
                    average: field(&c, h.len() - 2, n)?,
                })
            })
            .collect::<Result<_, _>>()?;
        Ok(Self { limits, rows })
    }
}
