//! Result persistence: fixed-format CSV tables, the structured JSON report,
//! and the optional SVG spectrum plot.
//!
//! Every number prints with 9 significant digits through one formatter, all
//! row orders are deterministic, and no output embeds timestamps, so a rerun
//! with the same config and seed reproduces each file byte for byte.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::measure::AhlforsTrace;
use crate::numeric::sig9;
use crate::partition::{QVector, SurfaceRow};
use crate::spectrum::SpectrumCurve;
use crate::verify::SuiteReport;

/// Everything a run wants persisted.
#[derive(Debug, Default)]
pub struct RunOutputs {
    /// Fitted estimates per grid point, with per-point failures kept aside.
    pub dimensions: Option<Vec<SurfaceRow>>,
    /// Oracle rows when the run is oracle-backed (written like estimates).
    pub oracle_rows: Option<Vec<(QVector, f64)>>,
    pub spectra: Vec<SpectrumCurve>,
    /// Gauge/measure diagnostics: one trace per labeled tree.
    pub diagnostics: Vec<(String, AhlforsTrace)>,
    pub suite: Option<SuiteReport>,
    pub warnings: Vec<String>,
}

/// The structured report written next to the CSV tables.
#[derive(Debug, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub seed: u64,
    pub files: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub checks: Option<SuiteReport>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub failures: Vec<String>,
}

fn csv_q_header(k: usize) -> String {
    (1..=k).map(|j| format!("q_{j}")).collect::<Vec<_>>().join(",")
}

fn csv_gamma_header(k: usize) -> String {
    (1..=k)
        .map(|j| format!("gamma_{j}"))
        .collect::<Vec<_>>()
        .join(",")
}

fn csv_row(values: &[f64]) -> String {
    values.iter().map(|&v| sig9(v)).collect::<Vec<_>>().join(",")
}

/// `q_1,...,q_k,b_hat,B_hat,Lambda_hat,residual`, one row per successful
/// grid point.
pub fn dimensions_csv(rows: &[SurfaceRow]) -> String {
    let k = rows.first().map(|(q, _)| q.len()).unwrap_or(1);
    let mut out = format!("{},b_hat,B_hat,Lambda_hat,residual\n", csv_q_header(k));
    for (q, res) in rows {
        if let Ok(est) = res {
            let mut vals = q.as_slice().to_vec();
            vals.extend([est.lower, est.packing, est.upper, est.residual]);
            out.push_str(&csv_row(&vals));
            out.push('\n');
        }
    }
    out
}

/// Oracle exponents in the same table layout (all three estimates coincide).
pub fn oracle_dimensions_csv(rows: &[(QVector, f64)]) -> String {
    let k = rows.first().map(|(q, _)| q.len()).unwrap_or(1);
    let mut out = format!("{},b_hat,B_hat,Lambda_hat,residual\n", csv_q_header(k));
    for (q, b) in rows {
        let mut vals = q.as_slice().to_vec();
        vals.extend([*b, *b, *b, 0.0]);
        out.push_str(&csv_row(&vals));
        out.push('\n');
    }
    out
}

/// `q_1,...,q_k,level,t_star`, one row per (grid point, window level).
pub fn tstar_csv(rows: &[SurfaceRow]) -> String {
    let k = rows.first().map(|(q, _)| q.len()).unwrap_or(1);
    let mut out = format!("{},level,t_star\n", csv_q_header(k));
    for (q, res) in rows {
        if let Ok(est) = res {
            for &(level, root) in &est.roots {
                let mut vals = q.as_slice().to_vec();
                vals.push(level as f64);
                vals.push(root);
                out.push_str(&csv_row(&vals));
                out.push('\n');
            }
        }
    }
    out
}

/// `gamma_1,...,gamma_k,value,method,level,delta` across all curves.
pub fn spectrum_csv(curves: &[SpectrumCurve]) -> String {
    let k = curves
        .iter()
        .flat_map(|c| c.samples.first())
        .map(|(g, _)| g.len())
        .next()
        .unwrap_or(1);
    let mut out = format!("{},value,method,level,delta\n", csv_gamma_header(k));
    for curve in curves {
        for (gamma, value) in &curve.samples {
            let coords = gamma.iter().map(|&g| sig9(g)).collect::<Vec<_>>().join(",");
            let level = curve.level.map(|l| l.to_string()).unwrap_or_default();
            let delta = curve.delta.map(sig9).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                coords,
                sig9(*value),
                curve.method.as_str(),
                level,
                delta
            ));
        }
    }
    out
}

/// `measure,level,alpha_level,alpha_hat` per labeled tree.
pub fn diagnostics_csv(rows: &[(String, AhlforsTrace)]) -> String {
    let mut out = String::from("measure,level,alpha_level,alpha_hat\n");
    for (label, trace) in rows {
        for &(level, v) in &trace.per_level {
            out.push_str(&format!("{},{},{},{}\n", label, level, sig9(v), sig9(trace.alpha)));
        }
    }
    out
}

/// A minimal line plot of one-coordinate spectra: estimator points plus the
/// oracle curve when present.
pub fn spectrum_svg(curves: &[SpectrumCurve]) -> Option<String> {
    let one_dim: Vec<&SpectrumCurve> = curves
        .iter()
        .filter(|c| c.samples.iter().all(|(g, _)| g.len() == 1))
        .collect();
    let pts: Vec<(f64, f64)> = one_dim
        .iter()
        .flat_map(|c| c.samples.iter().map(|(g, v)| (g[0], *v)))
        .collect();
    if pts.is_empty() {
        return None;
    }
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(x, y) in &pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if x1 - x0 < 1e-9 {
        x0 -= 0.5;
        x1 += 0.5;
    }
    if y1 - y0 < 1e-9 {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let (w, h, pad) = (640.0, 420.0, 48.0);
    let sx = |x: f64| pad + (x - x0) / (x1 - x0) * (w - 2.0 * pad);
    let sy = |y: f64| h - pad - (y - y0) / (y1 - y0) * (h - 2.0 * pad);
    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" \
         viewBox=\"0 0 {w} {h}\">\n<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n"
    ));
    svg.push_str(&format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        pad,
        h - pad,
        w - pad,
        h - pad
    ));
    svg.push_str(&format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        pad,
        pad,
        pad,
        h - pad
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"12\">gamma</text>\n",
        w / 2.0 - 20.0,
        h - 12.0
    ));
    svg.push_str(&format!(
        "<text x=\"12\" y=\"{}\" font-size=\"12\" transform=\"rotate(-90 12 {})\">value</text>\n",
        h / 2.0,
        h / 2.0
    ));
    for curve in one_dim {
        let color = match curve.method {
            crate::spectrum::SpectrumMethod::Oracle => "#1f77b4",
            crate::spectrum::SpectrumMethod::Canonical => "#d62728",
            crate::spectrum::SpectrumMethod::Histogram => "#2ca02c",
            crate::spectrum::SpectrumMethod::Legendre => "#9467bd",
        };
        let mut samples = curve.samples.clone();
        samples.sort_by(|a, b| a.0[0].partial_cmp(&b.0[0]).unwrap());
        if matches!(curve.method, crate::spectrum::SpectrumMethod::Oracle) {
            let path: Vec<String> = samples
                .iter()
                .enumerate()
                .map(|(i, (g, v))| {
                    format!(
                        "{}{} {}",
                        if i == 0 { "M" } else { "L" },
                        sig9(sx(g[0])),
                        sig9(sy(*v))
                    )
                })
                .collect();
            svg.push_str(&format!(
                "<path d=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"/>\n",
                path.join(" "),
                color
            ));
        } else {
            for (g, v) in &samples {
                svg.push_str(&format!(
                    "<circle cx=\"{}\" cy=\"{}\" r=\"3\" fill=\"{}\"/>\n",
                    sig9(sx(g[0])),
                    sig9(sy(*v)),
                    color
                ));
            }
        }
    }
    svg.push_str("</svg>\n");
    Some(svg)
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    Ok(path)
}

/// Writes the deterministic file set for a run: the applicable CSV tables,
/// `report.json`, the effective `config.toml`, and the spectrum plot when
/// the run produced one-coordinate spectra. Returns the paths written.
pub fn write_outputs(outputs: &RunOutputs, cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(&cfg.out).map_err(|e| Error::Io {
        path: cfg.out.display().to_string(),
        source: e,
    })?;
    let mut written = Vec::new();
    let mut names = Vec::new();
    let mut failures = Vec::new();
    if let Some(rows) = &outputs.dimensions {
        written.push(write_file(&cfg.out, "dimensions.csv", &dimensions_csv(rows))?);
        names.push("dimensions.csv".to_string());
        written.push(write_file(&cfg.out, "tstar.csv", &tstar_csv(rows))?);
        names.push("tstar.csv".to_string());
        for (q, res) in rows {
            if let Err(msg) = res {
                failures.push(format!("q={:?}: {}", q.as_slice(), msg));
            }
        }
    }
    if let Some(rows) = &outputs.oracle_rows {
        written.push(write_file(
            &cfg.out,
            "dimensions.csv",
            &oracle_dimensions_csv(rows),
        )?);
        names.push("dimensions.csv".to_string());
    }
    if !outputs.spectra.is_empty() {
        written.push(write_file(&cfg.out, "spectrum.csv", &spectrum_csv(&outputs.spectra))?);
        names.push("spectrum.csv".to_string());
        if let Some(svg) = spectrum_svg(&outputs.spectra) {
            written.push(write_file(&cfg.out, "spectrum.svg", &svg)?);
            names.push("spectrum.svg".to_string());
        }
    }
    if !outputs.diagnostics.is_empty() {
        written.push(write_file(
            &cfg.out,
            "diagnostics.csv",
            &diagnostics_csv(&outputs.diagnostics),
        )?);
        names.push("diagnostics.csv".to_string());
    }
    written.push(write_file(&cfg.out, "config.toml", &cfg.to_toml())?);
    names.push("config.toml".to_string());
    names.push("report.json".to_string());
    let report = Report {
        command: cfg.command.as_str().to_string(),
        seed: cfg.seed,
        files: names,
        warnings: outputs.warnings.clone(),
        checks: outputs.suite.clone(),
        failures,
    };
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    written.push(write_file(&cfg.out, "report.json", &json)?);
    Ok(written)
}

/// One human-readable line per check for terminal output.
pub fn suite_summary(report: &SuiteReport) -> String {
    let mut out = String::new();
    for c in &report.checks {
        let status = match c.status {
            crate::verify::CheckStatus::Pass => "PASS",
            crate::verify::CheckStatus::Fail => "FAIL",
            crate::verify::CheckStatus::Unverified => "SKIP",
        };
        out.push_str(&format!(
            "{status}  {:<24} margin {:>14}  {}\n",
            c.id,
            sig9(c.margin),
            c.notes
        ));
    }
    out.push_str(&format!(
        "{} checks, suite {}\n",
        report.checks.len(),
        if report.passed { "passed" } else { "FAILED" }
    ));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Command;
    use crate::measure::{build_cascade, CascadeSpec};
    use crate::partition::{qgrid_surface, QGrid};

    fn outputs_for_estimate() -> (RunOutputs, RunConfig) {
        let spec = CascadeSpec::new(2, 1, 8, vec![vec![0.25, 0.75], vec![0.5, 0.5]]).unwrap();
        let xi = build_cascade(&spec).unwrap();
        let grid = QGrid::cube(1, -1.0, 1.0, 0.5).unwrap();
        let rows = qgrid_surface(&xi, &grid.points(), (5, 8)).unwrap();
        let outputs = RunOutputs {
            dimensions: Some(rows),
            ..Default::default()
        };
        let cfg = RunConfig {
            command: Command::Estimate,
            base: 2,
            dimension: 1,
            levels: 8,
            weights: vec![vec![0.25, 0.75], vec![0.5, 0.5]],
            samples: None,
            q_min: vec![-1.0],
            q_max: vec![1.0],
            q_step: vec![0.5],
            window: Some((5, 8)),
            delta: None,
            out: std::env::temp_dir(),
            seed: 0,
        };
        (outputs, cfg)
    }

    #[test]
    fn csv_headers_are_fixed() {
        let (outputs, _) = outputs_for_estimate();
        let rows = outputs.dimensions.as_ref().unwrap();
        let dims = dimensions_csv(rows);
        assert!(dims.starts_with("q_1,b_hat,B_hat,Lambda_hat,residual\n"));
        assert_eq!(dims.lines().count(), 6);
        let ts = tstar_csv(rows);
        assert!(ts.starts_with("q_1,level,t_star\n"));
        assert_eq!(ts.lines().count(), 1 + 5 * 4);
    }

    #[test]
    fn csv_is_deterministic() {
        let (outputs, _) = outputs_for_estimate();
        let rows = outputs.dimensions.as_ref().unwrap();
        assert_eq!(dimensions_csv(rows), dimensions_csv(rows));
    }

    #[test]
    fn write_outputs_produces_file_set() {
        let (outputs, mut cfg) = outputs_for_estimate();
        let dir = tempfile::tempdir().unwrap();
        cfg.out = dir.path().to_path_buf();
        let written = write_outputs(&outputs, &cfg).unwrap();
        let names: Vec<String> = written
            .iter()
            .map(|p| p.file_name().unwrap().to_string_lossy().to_string())
            .collect();
        assert!(names.contains(&"dimensions.csv".to_string()));
        assert!(names.contains(&"tstar.csv".to_string()));
        assert!(names.contains(&"config.toml".to_string()));
        assert!(names.contains(&"report.json".to_string()));
        // The written config re-parses to an equivalent one.
        let back = RunConfig::load(&dir.path().join("config.toml")).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn svg_only_for_one_coordinate() {
        let curve = SpectrumCurve {
            method: crate::spectrum::SpectrumMethod::Canonical,
            samples: vec![(vec![1.0, 1.2], 0.5)],
            level: Some(8),
            delta: None,
        };
        assert!(spectrum_svg(&[curve]).is_none());
    }
}
