use std::path::{Path, PathBuf};

use crate::cli::atomic_write;
use crate::error::{Error, Result};
use crate::lab::experiments::{EstimateReport, SweepReport, REPORT_SCHEMA_VERSION};

/// Pretty JSON with a trailing newline.
pub fn to_json<T: serde::Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(value)?;
    out.push(b'\n');
    Ok(out)
}

/// One row per probe.
pub fn probes_csv(report: &EstimateReport) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["index", "kind", "j", "numerator", "reference", "rhs", "ratio", "naive"])
        .map_err(csv_error)?;
    for p in &report.probes {
        let kind = match p.kind {
            crate::operators::ProbeKind::Random => "random",
            crate::operators::ProbeKind::Packet => "packet",
        };
        w.write_record([
            p.index.to_string(),
            kind.to_string(),
            p.j.map(|j| j.to_string()).unwrap_or_default(),
            p.numerator.to_string(),
            p.reference.to_string(),
            p.rhs.to_string(),
            p.ratio.to_string(),
            p.naive.map(|v| v.to_string()).unwrap_or_default(),
        ])
        .map_err(csv_error)?;
    }
    w.into_inner()
        .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e.to_string()))
}

/// Two columns: `j log₂|residual|` when a slope was fitted, `probe ratio` otherwise.
pub fn plot_data(report: &EstimateReport) -> String {
    let mut out = String::new();
    match &report.slope {
        Some(fit) => {
            out.push_str("# j log2_residual_l2\n");
            for p in &fit.points {
                out.push_str(&format!("{} {}\n", p.j, p.log2_norm));
            }
        }
        None => {
            out.push_str("# probe ratio\n");
            for p in &report.probes {
                out.push_str(&format!("{} {}\n", p.index, p.ratio));
            }
        }
    }
    out
}

/// gnuplot script for the data file `data`.
pub fn plot_script(report: &EstimateReport, data: &str) -> String {
    let (xl, yl) = if report.slope.is_some() {
        ("j", "log2 |R u_j|_2")
    } else {
        ("probe", "ratio")
    };
    format!(
        "set title '{} ({})'\nset xlabel '{xl}'\nset ylabel '{yl}'\nplot '{data}' using 1:2 with linespoints notitle\n",
        report.id, report.theorem
    )
}

/// Writes `<id>.json`, `<id>.csv`, `<id>.dat` and `<id>.gp` into `dir`.
pub fn write_report(report: &EstimateReport, dir: &Path) -> Result<Vec<PathBuf>> {
    let json = dir.join(format!("{}.json", report.id));
    let csv = dir.join(format!("{}.csv", report.id));
    let dat = dir.join(format!("{}.dat", report.id));
    let gp = dir.join(format!("{}.gp", report.id));
    atomic_write(&json, &to_json(report)?)?;
    atomic_write(&csv, &probes_csv(report)?)?;
    atomic_write(&dat, plot_data(report).as_bytes())?;
    let data_name = format!("{}.dat", report.id);
    atomic_write(&gp, plot_script(report, &data_name).as_bytes())?;
    Ok(vec![json, csv, dat, gp])
}

pub fn write_sweep(sweep: &SweepReport, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut paths = Vec::new();
    for r in &sweep.reports {
        paths.extend(write_report(r, dir)?);
    }
    let path = dir.join(format!("{}.sweep.json", sweep.id));
    atomic_write(&path, &to_json(sweep)?)?;
    let mut dat = String::from("# n_pts c_emp\n");
    for (n, c) in sweep.n_pts.iter().zip(&sweep.c_emp) {
        dat.push_str(&format!("{n} {c}\n"));
    }
    let dat_path = dir.join(format!("{}.sweep.dat", sweep.id));
    atomic_write(&dat_path, dat.as_bytes())?;
    paths.push(path);
    paths.push(dat_path);
    Ok(paths)
}

/// Checks the internal consistency of a report read back from disk.
pub fn validate_report(report: &EstimateReport) -> Result<()> {
    let bad = |m: &str| Err(Error::Numerical(format!("report {}: {m}", report.id)));
    if report.schema_version != REPORT_SCHEMA_VERSION {
        return Err(Error::Input(format!(
            "report {} has schema version {}, expected {REPORT_SCHEMA_VERSION}",
            report.id, report.schema_version
        )));
    }
    if report.ratios.len() != report.probes.len() {
        return bad("ratio count differs from probe count");
    }
    if report.ratios.iter().any(|r| !r.is_finite() || *r < 0.0) {
        return bad("ratios must be finite and non-negative");
    }
    for (r, p) in report.ratios.iter().zip(&report.probes) {
        if r.to_bits() != p.ratio.to_bits() {
            return bad("ratio array disagrees with the probe rows");
        }
    }
    let max = report.ratios.iter().copied().fold(0.0, f64::max);
    if max.to_bits() != report.c_emp.to_bits() {
        return bad("c_emp is not the maximum ratio");
    }
    if report.degenerate && report.c_emp != 0.0 {
        return bad("degenerate report with nonzero c_emp");
    }
    let slope_ok = report.slope.as_ref().is_none_or(|f| f.pass);
    if report.pass != (report.c_emp.is_finite() && slope_ok) {
        return bad("pass flag disagrees with c_emp and slope");
    }
    if let Some(f) = &report.slope {
        if !f.degenerate && (f.slope - f.expected - f.deviation).abs() > 1e-12 {
            return bad("slope deviation is inconsistent");
        }
        if f.pass != (f.degenerate || f.deviation.abs() <= f.tolerance) {
            return bad("slope pass flag disagrees with its tolerance");
        }
    }
    Ok(())
}

/// Reads and validates a report file.
pub fn read_report(path: &Path) -> Result<EstimateReport> {
    let text = std::fs::read_to_string(path)?;
    let report: EstimateReport = serde_json::from_str(&text)?;
    validate_report(&report)?;
    Ok(report)
}
