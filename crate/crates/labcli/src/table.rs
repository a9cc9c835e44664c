//! Quantile tables over the standard ensembles, in CSV, JSON or Markdown.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use steincond::ensemble::{EnsembleKind, EnsembleSpec, SampleRecord};
use steincond::{Error, Result};

use crate::quantile::{QuantileSummary, PROBES};
use crate::runner::{run_ensemble, EnsembleRun, Exclusion};

/// Above this `ln κ(P)` the factor's `κ(L)² ≈ 1/ε²` ceiling makes values untrustworthy.
pub const ACCURACY_CEILING: f64 = 69.0;

pub const SIZES: [usize; 3] = [8, 16, 24];
pub const JORDAN_LAMBDAS: [f64; 3] = [0.3, 0.5, 0.8];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TableId {
    #[serde(rename = "1")]
    Generic,
    #[serde(rename = "2")]
    NormalDiag,
    #[serde(rename = "3")]
    NormalGap,
    #[serde(rename = "4a")]
    CompanionRandomB,
    #[serde(rename = "4b")]
    CompanionAr,
    #[serde(rename = "4c")]
    ArObservability,
    #[serde(rename = "5")]
    Jordan,
}

impl TableId {
    pub const ALL: [TableId; 7] = [
        TableId::Generic,
        TableId::NormalDiag,
        TableId::NormalGap,
        TableId::CompanionRandomB,
        TableId::CompanionAr,
        TableId::ArObservability,
        TableId::Jordan,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TableId::Generic => "1",
            TableId::NormalDiag => "2",
            TableId::NormalGap => "3",
            TableId::CompanionRandomB => "4a",
            TableId::CompanionAr => "4b",
            TableId::ArObservability => "4c",
            TableId::Jordan => "5",
        }
    }

    pub fn kind(self) -> EnsembleKind {
        match self {
            TableId::Generic => EnsembleKind::Generic,
            TableId::NormalDiag | TableId::NormalGap => EnsembleKind::NormalDiag,
            TableId::CompanionRandomB => EnsembleKind::CompanionRandomB,
            TableId::CompanionAr => EnsembleKind::CompanionAr,
            TableId::ArObservability => EnsembleKind::ArObservability,
            TableId::Jordan => EnsembleKind::Jordan,
        }
    }

    pub fn default_samples(self) -> usize {
        if self == TableId::Jordan {
            1200
        } else {
            2500
        }
    }

    pub fn has_lambda(self) -> bool {
        self == TableId::Jordan
    }

    /// Rows are quantiles of `ln κ − bound` rather than of `ln κ`.
    pub fn reports_gap(self) -> bool {
        self == TableId::NormalGap
    }

    pub fn specs(self, seed: u64, samples: usize) -> Vec<EnsembleSpec> {
        if self == TableId::Jordan {
            JORDAN_LAMBDAS
                .iter()
                .flat_map(|&l| SIZES.iter().map(move |&n| EnsembleSpec::jordan(l, n, samples, seed)))
                .collect()
        } else {
            SIZES.iter().map(|&n| EnsembleSpec::new(self.kind(), n, samples, seed)).collect()
        }
    }
}

impl fmt::Display for TableId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TableId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TableId::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown table '{s}' (expected 1, 2, 3, 4a, 4b, 4c or 5)")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Md,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "md" => Ok(Format::Md),
            _ => Err(Error::InvalidArgument(format!("unknown format '{s}'"))),
        }
    }
}

/// A cell whose underlying `ln κ` exceeds [`ACCURACY_CEILING`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyFlag {
    pub row: usize,
    pub column: String,
    pub log_kappa: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowDiagnostics {
    pub bound_violations: usize,
    pub max_residual: f64,
    pub exclusions: Vec<Exclusion>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub table: TableId,
    pub seed: u64,
    pub samples: usize,
    pub rows: Vec<QuantileSummary>,
    pub diagnostics: Vec<RowDiagnostics>,
    pub flags: Vec<AccuracyFlag>,
}

fn probe_label(p: f64) -> String {
    format!("q{:02}", (p * 100.0).round() as u32)
}

fn row_from_run(id: TableId, run: &EnsembleRun) -> Result<(QuantileSummary, Vec<(String, f64)>)> {
    let spec = &run.spec;
    let raw = run.log_kappas();
    let values: Vec<f64> = if id.reports_gap() {
        run.records.iter().map(|r: &SampleRecord| r.log_kappa - r.bound_log.unwrap_or(0.0)).collect()
    } else {
        raw.clone()
    };
    let mut row = QuantileSummary::from_values(spec.n, &values, &PROBES)?;
    row.excluded = run.exclusions.len();
    if id.has_lambda() {
        row.lambda = spec.jordan_lambda;
        row.bound = run.records.first().and_then(|r| r.bound_log);
        row.min = raw.iter().copied().reduce(f64::min);
    }
    let raw_q = crate::quantile::quantile_values(&raw, &PROBES)?;
    let mut over: Vec<(String, f64)> = PROBES
        .iter()
        .zip(&raw_q)
        .filter(|(_, v)| **v > ACCURACY_CEILING)
        .map(|(p, v)| (probe_label(*p), *v))
        .collect();
    if let Some(m) = row.min.filter(|m| *m > ACCURACY_CEILING) {
        over.push(("min".into(), m));
    }
    Ok((row, over))
}

/// Run every cell of a table.
pub fn build_table(id: TableId, seed: u64, samples: usize, workers: usize) -> Result<Table> {
    let mut table = Table { table: id, seed, samples, rows: vec![], diagnostics: vec![], flags: vec![] };
    for spec in id.specs(seed, samples) {
        let run = run_ensemble(&spec, workers)?;
        let (row, over) = row_from_run(id, &run)?;
        let index = table.rows.len();
        table.flags.extend(over.into_iter().map(|(column, log_kappa)| AccuracyFlag { row: index, column, log_kappa }));
        table.diagnostics.push(RowDiagnostics {
            bound_violations: run.bound_violations(),
            max_residual: run.max_residual(),
            exclusions: run.exclusions,
        });
        table.rows.push(row);
    }
    Ok(table)
}

pub fn emit_table(id: TableId, seed: u64, samples: usize, workers: usize, format: Format) -> Result<String> {
    Ok(build_table(id, seed, samples, workers)?.render(format))
}

impl Table {
    fn row_label(&self, i: usize) -> String {
        let r = &self.rows[i];
        match r.lambda {
            Some(l) => format!("n={} lambda={}", r.n, l),
            None => format!("n={}", r.n),
        }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
            Format::Md => self.to_markdown(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("table serializes");
        s.push('\n');
        s
    }

    fn footer_lines(&self) -> Vec<String> {
        let mut lines = vec![
            format!("table {}", self.table),
            format!("seed {}", self.seed),
            format!("samples {}", self.samples),
        ];
        if self.table.reports_gap() {
            lines.push("values are quantiles of ln kappa - normal bound".into());
        }
        for (i, d) in self.diagnostics.iter().enumerate() {
            lines.push(format!(
                "row {}: excluded {}, bound violations {}, max residual {:.3e}",
                self.row_label(i),
                d.exclusions.len(),
                d.bound_violations,
                d.max_residual
            ));
            for e in &d.exclusions {
                lines.push(format!("exclusion {} index {}: {}", self.row_label(i), e.index, e.code));
            }
        }
        for f in &self.flags {
            lines.push(format!(
                "flag {} {}: ln kappa {:.2} above {ACCURACY_CEILING}, beyond double-precision accuracy",
                self.row_label(f.row),
                f.column,
                f.log_kappa
            ));
        }
        lines
    }

    pub fn to_csv(&self) -> String {
        let lambda = self.table.has_lambda();
        let mut head = vec!["n".to_string()];
        if lambda {
            head.push("lambda".into());
        }
        head.extend(PROBES.iter().map(|p| probe_label(*p)));
        if lambda {
            head.push("bound".into());
            head.push("min".into());
        }
        head.push("count".into());
        head.push("excluded".into());
        let mut out = head.join(",");
        out.push('\n');
        for r in &self.rows {
            let mut cells = vec![r.n.to_string()];
            if let Some(l) = r.lambda {
                cells.push(l.to_string());
            }
            cells.extend(r.values.iter().map(f64::to_string));
            if lambda {
                cells.push(r.bound.map(|b| b.to_string()).unwrap_or_default());
                cells.push(r.min.map(|b| b.to_string()).unwrap_or_default());
            }
            cells.push(r.count.to_string());
            cells.push(r.excluded.to_string());
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        for line in self.footer_lines() {
            let _ = writeln!(out, "# {line}");
        }
        out
    }

    pub fn to_markdown(&self) -> String {
        let lambda = self.table.has_lambda();
        let mut head = vec!["n".to_string()];
        if lambda {
            head.extend(["λ".to_string(), "Bound".into(), "min".into()]);
        }
        head.extend(PROBES.iter().map(|p| format!("{}%", (p * 100.0).round())));
        head.extend(["IQ".to_string(), "count".into(), "excluded".into()]);
        let mut out = format!("Table {}\n\n| {} |\n|{}\n", self.table, head.join(" | "), "---|".repeat(head.len()));
        for (i, r) in self.rows.iter().enumerate() {
            let flagged = |col: &str| self.flags.iter().any(|f| f.row == i && f.column == col);
            let mut cells = vec![r.n.to_string()];
            if let Some(l) = r.lambda {
                cells.push(l.to_string());
                cells.push(r.bound.map(|b| format!("{b:.2}")).unwrap_or_default());
                cells.push(
                    r.min.map(|m| format!("{m:.2}{}", if flagged("min") { "†" } else { "" })).unwrap_or_default(),
                );
            }
            for (p, v) in PROBES.iter().zip(&r.values) {
                cells.push(format!("{v:.2}{}", if flagged(&probe_label(*p)) { "†" } else { "" }));
            }
            cells.push(format!("{:.2}", r.iq_distance));
            cells.push(r.count.to_string());
            cells.push(r.excluded.to_string());
            let _ = writeln!(out, "| {} |", cells.join(" | "));
        }
        out.push('\n');
        if !self.flags.is_empty() {
            let _ = writeln!(out, "† ln κ above {ACCURACY_CEILING}: beyond double-precision accuracy.\n");
        }
        for line in self.footer_lines() {
            let _ = writeln!(out, "- {line}");
        }
        out
    }
}

/// Rows of a CSV table written by [`Table::to_csv`]; footer lines are skipped.
pub fn parse_csv(text: &str) -> Result<Vec<QuantileSummary>> {
    let bad = |msg: String| Error::Format(msg);
    let mut lines = text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty());
    let header: Vec<&str> = lines.next().ok_or_else(|| bad("missing header".into()))?.split(',').collect();
    let col = |name: &str| header.iter().position(|h| *h == name);
    let probes: Vec<(usize, f64)> = header
        .iter()
        .enumerate()
        .filter_map(|(i, h)| h.strip_prefix('q').and_then(|p| p.parse::<u32>().ok()).map(|p| (i, p as f64 / 100.0)))
        .collect();
    let n_col = col("n").ok_or_else(|| bad("missing n column".into()))?;
    let count_col = col("count").ok_or_else(|| bad("missing count column".into()))?;
    let mut rows = Vec::new();
    for line in lines {
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != header.len() {
            return Err(bad(format!("row has {} cells, header has {}", cells.len(), header.len())));
        }
        let real = |i: usize| cells[i].parse::<f64>().map_err(|e| bad(format!("'{}': {e}", cells[i])));
        let int = |i: usize| cells[i].parse::<usize>().map_err(|e| bad(format!("'{}': {e}", cells[i])));
        let opt = |name: &str| -> Result<Option<f64>> {
            match col(name) {
                Some(i) if !cells[i].is_empty() => real(i).map(Some),
                _ => Ok(None),
            }
        };
        let mut row = QuantileSummary {
            n: int(n_col)?,
            lambda: opt("lambda")?,
            probes: probes.iter().map(|p| p.1).collect(),
            values: probes.iter().map(|p| real(p.0)).collect::<Result<_>>()?,
            iq_distance: 0.0,
            count: int(count_col)?,
            excluded: col("excluded").map(int).transpose()?.unwrap_or(0),
            bound: opt("bound")?,
            min: opt("min")?,
        };
        row.iq_distance = row.iq_from_values();
        rows.push(row);
    }
    Ok(rows)
}
