//! Side-by-side HM / ICDD table over several run reports.

use std::fmt::Write as _;

use crate::error::{IttaError, Result};
use crate::metrics::RunReport;

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub tta: String,
    pub strategy: String,
    pub hm: Option<f64>,
    pub icdd_pct: f64,
    pub best_hm: bool,
    pub best_icdd: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    /// Sorted by HM, highest first; runs without HM go last.
    pub rows: Vec<ComparisonRow>,
    pub warnings: Vec<String>,
}

fn echo_str(report: &RunReport, key: &str) -> String {
    match report.config_echo.get(key) {
        Some(serde_json::Value::String(s)) => s.clone(),
        Some(v) if !v.is_null() => v.to_string(),
        _ => "?".to_string(),
    }
}

pub fn compare_runs(reports: &[RunReport]) -> Result<Comparison> {
    if reports.len() < 2 {
        return Err(IttaError::Usage("compare needs at least two reports".into()));
    }
    let mut warnings = Vec::new();
    let datasets: Vec<String> = reports.iter().map(|r| echo_str(r, "datasets")).collect();
    if datasets.iter().any(|d| d != &datasets[0]) {
        warnings.push("reports were produced on different datasets".to_string());
    }

    let best_hm = reports
        .iter()
        .filter_map(|r| r.hm)
        .fold(f64::NEG_INFINITY, f64::max);
    let best_icdd = reports
        .iter()
        .map(|r| r.icdd_pct)
        .fold(f64::INFINITY, f64::min);
    let mut rows: Vec<ComparisonRow> = reports
        .iter()
        .map(|r| ComparisonRow {
            tta: echo_str(r, "tta"),
            strategy: echo_str(r, "strategy"),
            hm: r.hm,
            icdd_pct: r.icdd_pct,
            best_hm: r.hm == Some(best_hm),
            best_icdd: r.icdd_pct == best_icdd,
        })
        .collect();
    rows.sort_by(|a, b| match (a.hm, b.hm) {
        (Some(x), Some(y)) => y.total_cmp(&x),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => std::cmp::Ordering::Equal,
    });
    Ok(Comparison { rows, warnings })
}

impl Comparison {
    /// Aligned text table; `*` marks the best value in a column.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:<8} {:<10} {:>9} {:>9}", "tta", "strategy", "HM", "ICDD");
        for r in &self.rows {
            let hm = r.hm.map_or("-".to_string(), |v| format!("{v:.2}"));
            let _ = writeln!(
                out,
                "{:<8} {:<10} {:>8}{} {:>8}{}",
                r.tta,
                r.strategy,
                hm,
                if r.best_hm { "*" } else { " " },
                format!("{:.2}", r.icdd_pct),
                if r.best_icdd { "*" } else { " " },
            );
        }
        for w in &self.warnings {
            let _ = writeln!(out, "warning: {w}");
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("tta,strategy,hm,icdd_pct,best_hm,best_icdd\n");
        for r in &self.rows {
            let hm = r.hm.map_or(String::new(), |v| v.to_string());
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.tta, r.strategy, hm, r.icdd_pct, r.best_hm, r.best_icdd
            );
        }
        out
    }
}
