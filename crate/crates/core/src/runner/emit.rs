use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use super::config::OutputConfig;
use super::run::{RunEvent, RunOutcome};
use crate::error::Result;
use crate::metrics::{Curves, RunReport};

/// Writes whichever of report, event log and curves `paths` names.
/// Returns the files written.
pub fn emit_report(outcome: &RunOutcome, paths: &OutputConfig) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    if let Some(p) = &paths.report {
        write_report(&outcome.report, p)?;
        written.push(p.clone());
    }
    if let Some(p) = &paths.events {
        write_events(&outcome.events, p)?;
        written.push(p.clone());
    }
    if let Some(p) = &paths.curves {
        write_curves(outcome.curves.as_ref(), paths.curve_stride, p)?;
        written.push(p.clone());
    }
    Ok(written)
}

pub fn write_report(report: &RunReport, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, report)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn read_report(path: &Path) -> Result<RunReport> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

pub fn write_events(events: &[RunEvent], path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for e in events {
        serde_json::to_writer(&mut w, e)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

/// Rows sampled at `stride, 2·stride, …`, plus the final index if the
/// stride does not land on it.
pub fn curve_rows(curves: &Curves, stride: usize) -> Vec<(usize, f64, f64, f64)> {
    let t = curves.n_gt.len();
    let stride = stride.max(1);
    let mut idx: Vec<usize> = (stride..=t).step_by(stride).collect();
    if idx.last() != Some(&t) && t > 0 {
        idx.push(t);
    }
    idx.into_iter()
        .map(|i| (i, i as f64 / t as f64, curves.n_gt[i - 1], curves.n_det[i - 1]))
        .collect()
}

/// CSV with columns `index,t_norm,n_gt,n_det`; header only when the
/// stream had no unseen classes.
pub fn write_curves(curves: Option<&Curves>, stride: usize, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "index,t_norm,n_gt,n_det")?;
    if let Some(c) = curves {
        for (i, t, gt, det) in curve_rows(c, stride) {
            writeln!(w, "{i},{t},{gt},{det}")?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stride_row_counts() {
        let c = Curves {
            n_gt: vec![1.0; 10_000],
            n_det: vec![0.0; 10_000],
        };
        assert_eq!(curve_rows(&c, 10).len(), 1000);
        assert_eq!(curve_rows(&c, 1).len(), 10_000);
        let rows = curve_rows(&c, 3);
        assert_eq!(rows.len(), 3334);
        assert_eq!(rows.last().unwrap().0, 10_000);
    }
}
