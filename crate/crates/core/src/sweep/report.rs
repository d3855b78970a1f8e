//! Sweep artifacts: `results.csv`, `summary.json`, `regime_diagram.svg`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::fit::{fit_slope, SlopeFit};
use super::{Regime, SweepOutcome, SweepResult};
use crate::error::{Error, Result};

/// Column order of `results.csv`.
pub const CSV_COLUMNS: [&str; 12] = [
    "b",
    "sigma",
    "kappa",
    "lambda",
    "regime",
    "threshold",
    "min_energy",
    "construction_energy",
    "lower_bound_young",
    "lower_bound_mm",
    "grid_n",
    "converged_starts",
];

#[derive(Debug, Serialize)]
struct CsvRow<'a> {
    b: f64,
    sigma: f64,
    kappa: f64,
    lambda: f64,
    regime: &'a str,
    threshold: f64,
    min_energy: f64,
    construction_energy: f64,
    lower_bound_young: f64,
    lower_bound_mm: f64,
    grid_n: usize,
    converged_starts: usize,
}

impl<'a> From<&'a SweepResult> for CsvRow<'a> {
    fn from(r: &'a SweepResult) -> Self {
        CsvRow {
            b: r.params.b,
            sigma: r.params.sigma,
            kappa: r.params.kappa,
            lambda: r.params.lambda,
            regime: r.regime.label.as_str(),
            threshold: r.regime.threshold,
            min_energy: r.min_energy,
            construction_energy: r.construction_energy,
            lower_bound_young: r.lower_bound_young,
            lower_bound_mm: r.lower_bound_mm,
            grid_n: r.grid_n,
            converged_starts: r.converged_starts,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisSlope {
    pub axis: String,
    /// Fit of `ln|min_energy|` against `ln(axis)`; absent when the energies
    /// change sign or fewer than three points exist.
    pub fit: Option<SlopeFit>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub name: String,
    pub well: String,
    pub grid_n: usize,
    pub points: usize,
    pub c_small: f64,
    pub c_big: f64,
    pub c_int: Option<f64>,
    pub regime_counts: BTreeMap<String, usize>,
    pub slope: AxisSlope,
    pub converged_starts: usize,
    pub invariant_violations: Vec<String>,
}

pub fn summarize(outcome: &SweepOutcome) -> Result<Summary> {
    let cfg = &outcome.config;
    let mut regime_counts = BTreeMap::new();
    for r in [Regime::Supercritical, Regime::Subcritical, Regime::Gap] {
        regime_counts.insert(r.as_str().to_string(), 0);
    }
    for r in &outcome.results {
        *regime_counts.entry(r.regime.label.as_str().to_string()).or_insert(0) += 1;
    }
    let xs: Vec<f64> = outcome
        .results
        .iter()
        .map(|r| r.params.get(&cfg.axis))
        .collect::<Result<_>>()?;
    let ys: Vec<f64> = outcome.results.iter().map(|r| r.min_energy).collect();
    let slope = match fit_slope(&xs, &ys, true) {
        Ok(fit) => AxisSlope {
            axis: cfg.axis.clone(),
            fit: Some(fit),
            note: None,
        },
        Err(e) => AxisSlope {
            axis: cfg.axis.clone(),
            fit: None,
            note: Some(e.to_string()),
        },
    };
    Ok(Summary {
        name: cfg.name.clone(),
        well: cfg.well.clone(),
        grid_n: cfg.grid_n,
        points: outcome.results.len(),
        c_small: outcome.c_small,
        c_big: outcome.c_big,
        c_int: outcome.c_int,
        regime_counts,
        slope,
        converged_starts: outcome.results.iter().map(|r| r.converged_starts).sum(),
        invariant_violations: outcome.violations.clone(),
    })
}

pub fn results_csv(results: &[SweepResult]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in results {
        w.serialize(CsvRow::from(r))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

fn color(r: Regime) -> &'static str {
    match r {
        Regime::Supercritical => "#c0392b",
        Regime::Subcritical => "#2471a3",
        Regime::Gap => "#7f8c8d",
    }
}

/// `log₁₀ Λ²` against `log₁₀ threshold`, with the band between the two
/// classification lines shaded.
pub fn regime_diagram_svg(outcome: &SweepOutcome) -> String {
    let (width, height, margin) = (640.0, 480.0, 60.0);
    let pts: Vec<(f64, f64, Regime)> = outcome
        .results
        .iter()
        .filter(|r| r.params.lambda > 0.0 && r.regime.threshold > 0.0)
        .map(|r| {
            (
                r.regime.threshold.log10(),
                (r.params.lambda.powi(2)).log10(),
                r.regime.label,
            )
        })
        .collect();
    let (lc, lb) = (outcome.c_small.log10(), outcome.c_big.log10());
    let (mut x0, mut x1) = pts
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.0), b.max(p.0)));
    if !x0.is_finite() {
        (x0, x1) = (-1.0, 1.0);
    }
    if x1 - x0 < 1.0 {
        let mid = 0.5 * (x0 + x1);
        (x0, x1) = (mid - 0.5, mid + 0.5);
    }
    let (mut y0, mut y1) = (x0 + lc, x1 + lb);
    for p in &pts {
        y0 = y0.min(p.1);
        y1 = y1.max(p.1);
    }
    let pad_x = 0.05 * (x1 - x0);
    let pad_y = 0.05 * (y1 - y0);
    let (x0, x1, y0, y1) = (x0 - pad_x, x1 + pad_x, y0 - pad_y, y1 + pad_y);
    let sx = |x: f64| margin + (x - x0) / (x1 - x0) * (width - 2.0 * margin);
    let sy = |y: f64| height - margin - (y - y0) / (y1 - y0) * (height - 2.0 * margin);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    let _ = writeln!(s, r#"<title>{}</title>"#, xml_escape(&outcome.config.name));
    let _ = writeln!(
        s,
        r#"<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>"#
    );
    let _ = writeln!(
        s,
        r#"<clipPath id="plot"><rect x="{margin}" y="{margin}" width="{:.2}" height="{:.2}"/></clipPath>"#,
        width - 2.0 * margin,
        height - 2.0 * margin
    );
    let _ = writeln!(
        s,
        r##"<polygon class="gap-band" clip-path="url(#plot)" fill="#f4d03f" fill-opacity="0.3" points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2} {:.2},{:.2}"/>"##,
        sx(x0),
        sy(x0 + lc),
        sx(x1),
        sy(x1 + lc),
        sx(x1),
        sy(x1 + lb),
        sx(x0),
        sy(x0 + lb)
    );
    for (class, off) in [("line-subcritical", lc), ("line-supercritical", lb)] {
        let _ = writeln!(
            s,
            r#"<line class="{class}" clip-path="url(#plot)" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black" stroke-dasharray="4 3"/>"#,
            sx(x0),
            sy(x0 + off),
            sx(x1),
            sy(x1 + off)
        );
    }
    let _ = writeln!(
        s,
        r#"<rect class="frame" x="{margin}" y="{margin}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
        width - 2.0 * margin,
        height - 2.0 * margin
    );
    for (x, y, r) in &pts {
        let _ = writeln!(
            s,
            r#"<circle class="point {}" cx="{:.2}" cy="{:.2}" r="5" fill="{}"/>"#,
            r.as_str(),
            sx(*x),
            sy(*y),
            color(*r)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="14">log10 max(b sigma, b kappa, sqrt(b sigma kappa), sqrt(b) kappa)</text>"#,
        width / 2.0,
        height - 20.0
    );
    let _ = writeln!(
        s,
        r#"<text x="20" y="{:.2}" text-anchor="middle" font-size="14" transform="rotate(-90 20 {:.2})">log10 lambda^2</text>"#,
        height / 2.0,
        height / 2.0
    );
    for (i, (x, label)) in [(x0, x0), (x1, x1)].iter().enumerate() {
        let anchor = if i == 0 { "start" } else { "end" };
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="{anchor}" font-size="11">{label:.2}</text>"#,
            sx(*x),
            height - margin + 15.0
        );
    }
    for y in [y0, y1] {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end" font-size="11">{y:.2}</text>"#,
            margin - 5.0,
            sy(y) + 4.0
        );
    }
    for (i, r) in [Regime::Supercritical, Regime::Gap, Regime::Subcritical]
        .iter()
        .enumerate()
    {
        let y = margin + 15.0 + 18.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<circle class="legend" cx="{:.2}" cy="{y:.2}" r="5" fill="{}"/><text x="{:.2}" y="{:.2}" font-size="12">{}</text>"#,
            margin + 15.0,
            color(*r),
            margin + 25.0,
            y + 4.0,
            r.as_str()
        );
    }
    s.push_str("</svg>\n");
    s
}

fn xml_escape(t: &str) -> String {
    t.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Paths of the written artifacts.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportFiles {
    pub csv: PathBuf,
    pub summary: PathBuf,
    pub svg: PathBuf,
}

pub fn emit_report(outcome: &SweepOutcome, out_dir: &Path) -> Result<ReportFiles> {
    if outcome.results.is_empty() {
        return Err(Error::InvalidParameter("no sweep results to report".into()));
    }
    std::fs::create_dir_all(out_dir)?;
    let files = ReportFiles {
        csv: out_dir.join("results.csv"),
        summary: out_dir.join("summary.json"),
        svg: out_dir.join("regime_diagram.svg"),
    };
    std::fs::write(&files.csv, results_csv(&outcome.results)?)?;
    let mut json = serde_json::to_string_pretty(&summarize(outcome)?)?;
    json.push('\n');
    std::fs::write(&files.summary, json)?;
    std::fs::write(&files.svg, regime_diagram_svg(outcome))?;
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::Params;
    use crate::sweep::{RegimeLabel, SweepConfig};

    fn result(lambda: f64, label: Regime) -> SweepResult {
        let p = Params::new(1.0, 1.0, 1.0, lambda).unwrap();
        SweepResult {
            params: p,
            regime: RegimeLabel { label, threshold: 1.0 },
            min_energy: -lambda * lambda / 4.0,
            construction_energy: -lambda * lambda / 8.0,
            lower_bound_young: p.young_bound(),
            lower_bound_mm: 0.5,
            grid_n: 64,
            converged_starts: 3,
        }
    }

    fn outcome(results: Vec<SweepResult>) -> SweepOutcome {
        let config = SweepConfig::from_toml_str(
            "name = \"r\"\nb = 1.0\nsigma = 1.0\nkappa = 1.0\naxis = \"lambda\"\naxis_start = 1.0\naxis_stop = 100.0\naxis_points = 3\nc_small = 0.1\n",
        )
        .unwrap();
        SweepOutcome {
            config,
            c_small: 0.1,
            c_big: 2048.0,
            c_int: None,
            results,
            violations: vec![],
        }
    }

    #[test]
    fn one_result_gives_header_and_one_row() {
        let csv = results_csv(&[result(2.0, Regime::Gap)]).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], CSV_COLUMNS.join(","));
        assert!(lines[1].contains(",gap,"));
    }

    #[test]
    fn mixed_diagram_has_both_colors_and_the_band() {
        let o = outcome(vec![
            result(0.1, Regime::Subcritical),
            result(5.0, Regime::Gap),
            result(100.0, Regime::Supercritical),
        ]);
        let svg = regime_diagram_svg(&o);
        assert_eq!(svg.matches("class=\"point supercritical\"").count(), 1);
        assert_eq!(svg.matches("class=\"point subcritical\"").count(), 1);
        assert_eq!(svg.matches("class=\"point gap\"").count(), 1);
        assert_eq!(svg.matches("class=\"gap-band\"").count(), 1);
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn report_files_are_written() {
        let dir = tempfile::tempdir().unwrap();
        let o = outcome(vec![
            result(1.0, Regime::Gap),
            result(10.0, Regime::Gap),
            result(100.0, Regime::Supercritical),
        ]);
        let files = emit_report(&o, dir.path()).unwrap();
        let summary: Summary = serde_json::from_str(&std::fs::read_to_string(files.summary).unwrap()).unwrap();
        assert!(summary.invariant_violations.is_empty());
        assert_eq!(summary.regime_counts["gap"], 2);
        let fit = summary.slope.fit.unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-12);
        assert!(emit_report(&outcome(vec![]), dir.path()).is_err());
    }
}
