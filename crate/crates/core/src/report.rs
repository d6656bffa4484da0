//! CSV and SVG output for sweep tables.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::simulator::{CoverageEstimate, OutageBreakdown};
use crate::sweep::{Metric, SweepAxis, SweepRow, SweepTable};

#[derive(Debug, Serialize, Deserialize)]
struct CsvRecord {
    sweep: String,
    series_axis: Option<String>,
    series: Option<String>,
    axis: String,
    value: f64,
    metric: String,
    p_hat: Option<f64>,
    ci_low: Option<f64>,
    ci_high: Option<f64>,
    n_trials: Option<u64>,
    ok: Option<u64>,
    no_overlap_satellite: Option<u64>,
    no_route: Option<u64>,
    snr_below_threshold: Option<u64>,
    error: Option<String>,
}

fn io_error(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source: std::io::Error::other(e.to_string()),
    }
}

fn record(table: &SweepTable, row: &SweepRow) -> CsvRecord {
    let e = row.estimate.as_ref();
    let b = e.map(|e| e.outage_breakdown);
    CsvRecord {
        sweep: table.name.clone(),
        series_axis: table.series_axis.map(str::to_string),
        series: row.series.clone(),
        axis: table.axis.name().to_string(),
        value: row.value,
        metric: row.metric.name().to_string(),
        p_hat: row.p_hat(),
        ci_low: e.map(|e| e.ci_low),
        ci_high: e.map(|e| e.ci_high),
        n_trials: e.map(|e| e.n_trials),
        ok: b.map(|b| b.ok),
        no_overlap_satellite: b.map(|b| b.no_overlap_satellite),
        no_route: b.map(|b| b.no_route),
        snr_below_threshold: b.map(|b| b.snr_below_threshold),
        error: row.error.clone(),
    }
}

/// CSV text of a table: a header and one record per row.
pub fn csv_string(table: &SweepTable) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in &table.rows {
        w.serialize(record(table, row)).map_err(|e| invalid(format!("cannot encode row: {e}")))?;
    }
    if table.rows.is_empty() {
        return Err(invalid("cannot write an empty table"));
    }
    let bytes = w.into_inner().map_err(|e| invalid(format!("cannot flush CSV: {e}")))?;
    Ok(String::from_utf8(bytes).expect("CSV of UTF-8 fields is UTF-8"))
}

pub fn emit_csv(table: &SweepTable, path: &Path) -> Result<()> {
    let text = csv_string(table)?;
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads a table written by [`emit_csv`].
pub fn read_csv(path: &Path) -> Result<SweepTable> {
    let mut r = csv::Reader::from_path(path).map_err(|e| io_error(path, e))?;
    let mut table: Option<SweepTable> = None;
    for rec in r.deserialize::<CsvRecord>() {
        let rec = rec.map_err(|e| io_error(path, e))?;
        let metric = Metric::parse(&rec.metric).ok_or_else(|| io_error(path, format!("unknown metric {:?}", rec.metric)))?;
        let axis = SweepAxis::parse(&rec.axis).ok_or_else(|| io_error(path, format!("unknown axis {:?}", rec.axis)))?;
        let estimate = match (rec.p_hat, rec.ci_low, rec.ci_high, rec.n_trials) {
            (Some(p_hat), Some(ci_low), Some(ci_high), Some(n_trials)) if !metric.is_analytic() => Some(CoverageEstimate {
                p_hat,
                ci_low,
                ci_high,
                n_trials,
                outage_breakdown: OutageBreakdown {
                    ok: rec.ok.unwrap_or(0),
                    no_overlap_satellite: rec.no_overlap_satellite.unwrap_or(0),
                    no_route: rec.no_route.unwrap_or(0),
                    snr_below_threshold: rec.snr_below_threshold.unwrap_or(0),
                },
            }),
            _ => None,
        };
        let analytic = if metric.is_analytic() { rec.p_hat } else { None };
        let series_axis = rec.series_axis.as_deref().map(|s| match s {
            "mode" => "mode",
            other => SweepAxis::parse(other).map_or("unknown", |a| a.name()),
        });
        let t = table.get_or_insert_with(|| SweepTable {
            name: rec.sweep.clone(),
            axis,
            series_axis,
            rows: Vec::new(),
        });
        t.rows.push(SweepRow {
            series: rec.series,
            value: rec.value,
            metric,
            estimate,
            analytic,
            error: rec.error,
        });
    }
    table.ok_or_else(|| io_error(path, "no records"))
}

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];
const WIDTH: f64 = 760.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 200.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

struct XScale {
    lo: f64,
    hi: f64,
    log: bool,
}

impl XScale {
    fn new(values: &[f64]) -> Self {
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let log = lo > 0.0 && hi / lo >= 100.0;
        Self { lo, hi, log }
    }

    fn map(&self, x: f64) -> f64 {
        let (a, b, x) = if self.log { (self.lo.log10(), self.hi.log10(), x.log10()) } else { (self.lo, self.hi, x) };
        let t = if b > a { (x - a) / (b - a) } else { 0.5 };
        LEFT + t * (WIDTH - LEFT - RIGHT)
    }
}

fn y_of(p: f64) -> f64 {
    TOP + (1.0 - p.clamp(0.0, 1.0)) * (HEIGHT - TOP - BOTTOM)
}

/// SVG line plot of coverage against the sweep axis: one line per series
/// and metric, with the 95% interval shaded for simulated curves.
pub fn plot_svg(table: &SweepTable) -> Result<String> {
    let values: Vec<f64> = table.rows.iter().filter(|r| r.p_hat().is_some()).map(|r| r.value).collect();
    if values.is_empty() {
        return Err(invalid("no plottable rows"));
    }
    let xs = XScale::new(&values);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
        (LEFT + WIDTH - RIGHT) / 2.0,
        escape(&table.name)
    );
    let x0 = LEFT;
    let x1 = WIDTH - RIGHT;
    let y1 = HEIGHT - BOTTOM;
    let _ = writeln!(s, r#"<g stroke="black" fill="none"><path d="M{x0} {TOP} V{y1} H{x1}"/></g>"#);
    for i in 0..=5 {
        let p = i as f64 / 5.0;
        let y = y_of(p);
        let _ = writeln!(
            s,
            r##"<line x1="{x0}" y1="{y:.1}" x2="{x1}" y2="{y:.1}" stroke="#dddddd"/><text x="{:.1}" y="{:.1}" text-anchor="end">{p:.1}</text>"##,
            x0 - 6.0,
            y + 4.0
        );
    }
    let mut ticks = values.clone();
    ticks.sort_by(f64::total_cmp);
    ticks.dedup();
    for v in &ticks {
        let x = xs.map(*v);
        let _ = writeln!(
            s,
            r#"<line x1="{x:.1}" y1="{y1}" x2="{x:.1}" y2="{:.1}" stroke="black"/><text x="{x:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            y1 + 5.0,
            y1 + 18.0,
            escape(&format!("{v}"))
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 15.0,
        escape(table.axis.name())
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{:.1}" text-anchor="middle" transform="rotate(-90 18 {:.1})">coverage probability</text>"#,
        (TOP + y1) / 2.0,
        (TOP + y1) / 2.0
    );
    for (i, (series, metric)) in table.curves().iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let rows: Vec<&SweepRow> = table
            .curve(*metric, series.as_deref())
            .into_iter()
            .filter(|r| r.p_hat().is_some())
            .collect();
        let band: Vec<(f64, f64, f64)> = rows
            .iter()
            .filter_map(|r| r.estimate.map(|e| (xs.map(r.value), y_of(e.ci_low), y_of(e.ci_high))))
            .collect();
        if band.len() >= 2 {
            let mut d = String::new();
            for (k, (x, _, hi)) in band.iter().enumerate() {
                let _ = write!(d, "{}{x:.2} {hi:.2} ", if k == 0 { "M" } else { "L" });
            }
            for (x, lo, _) in band.iter().rev() {
                let _ = write!(d, "L{x:.2} {lo:.2} ");
            }
            let _ = writeln!(s, r#"<path d="{}Z" fill="{color}" fill-opacity="0.18" stroke="none"/>"#, d);
        }
        let points: Vec<String> = rows
            .iter()
            .map(|r| format!("{:.2},{:.2}", xs.map(r.value), y_of(r.p_hat().unwrap_or(0.0))))
            .collect();
        let dash = if metric.is_analytic() { r#" stroke-dasharray="6 4""# } else { "" };
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"{dash}/>"#,
            points.join(" ")
        );
        let label = match (series, table.series_axis) {
            (Some(v), Some(axis)) => format!("{} {axis}={v}", metric.name()),
            _ => metric.name().to_string(),
        };
        let ly = TOP + 10.0 + 18.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<line x1="{:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"{dash}/><text x="{:.1}" y="{:.1}">{}</text>"#,
            x1 + 12.0,
            x1 + 34.0,
            x1 + 40.0,
            ly + 4.0,
            escape(&label)
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn emit_plot(table: &SweepTable, path: &Path) -> Result<()> {
    let svg = plot_svg(table)?;
    std::fs::write(path, svg).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> SweepTable {
        let est = |ok: u64, n: u64| {
            let mut b = OutageBreakdown::default();
            b.ok = ok;
            b.snr_below_threshold = n - ok;
            CoverageEstimate::from_breakdown(b)
        };
        let row = |value: f64, metric: Metric, estimate: Option<CoverageEstimate>, analytic: Option<f64>| SweepRow {
            series: Some("12".into()),
            value,
            metric,
            estimate,
            analytic,
            error: None,
        };
        SweepTable {
            name: "demo, \"quoted\"".into(),
            axis: SweepAxis::Ns,
            series_axis: Some("gamma_db"),
            rows: vec![
                row(100.0, Metric::Coverage, Some(est(1, 3)), None),
                row(1000.0, Metric::Coverage, Some(est(2, 3)), None),
                row(1000.0, Metric::AnalyticRelay, None, Some(0.123_456_789_012_345)),
            ],
        }
    }

    #[test]
    fn three_rows_make_four_lines() {
        let text = csv_string(&table()).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert!(text.starts_with("sweep,series_axis,series,axis,value,metric,p_hat"));
        assert!(text.contains("\"demo, \"\"quoted\"\"\""));
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let t = table();
        emit_csv(&t, &path).unwrap();
        let back = read_csv(&path).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn flagged_row_round_trips() {
        let mut t = table();
        t.rows.push(SweepRow {
            series: None,
            value: -1.0,
            metric: Metric::Coverage,
            estimate: None,
            analytic: None,
            error: Some("invalid configuration: altitude ds must be positive, got -1".into()),
        });
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        emit_csv(&t, &path).unwrap();
        assert_eq!(read_csv(&path).unwrap(), t);
    }

    #[test]
    fn svg_is_well_formed() {
        let svg = plot_svg(&table()).unwrap();
        let doc = roxmltree::Document::parse(&svg).unwrap();
        assert_eq!(doc.root_element().tag_name().name(), "svg");
        let polylines = doc.descendants().filter(|n| n.has_tag_name("polyline")).count();
        assert_eq!(polylines, 2);
        assert!(doc.descendants().any(|n| n.has_tag_name("path") && n.attribute("fill-opacity").is_some()));
    }

    #[test]
    fn unwritable_path_is_named() {
        let err = emit_csv(&table(), Path::new("/nonexistent-dir/x.csv")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent-dir/x.csv"), "{err}");
    }
}
