use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::experiment::{ExperimentReport, SpectrumRow, TrialMedians};
use super::hexfloat::{format_hex, parse_hex};
use crate::error::{Error, Result};

pub const SUMMARY_HEADER: &str =
    "fig_label,min_exact,min_double,min_demoted,avg_small_exact,avg_small_demoted,gap_ok,small_ok";
pub const SPECTRUM_HEADER: &str = "index,exact,double,demoted,bound";
const NA: &str = "N/A";

/// Writes `summary.csv`, `spectrum.csv` and `plot.svg` for one report into `out`.
pub fn emit_report(report: &ExperimentReport, out: &Path) -> Result<()> {
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let summary = format!("{SUMMARY_HEADER}\n{}\n", summary_row(&report.label, report));
    write(&out.join("summary.csv"), &summary)?;
    write(&out.join("spectrum.csv"), &spectrum_csv(&report.spectrum_rows()))?;
    write(&out.join("plot.svg"), &plot_svg(report))?;
    Ok(())
}

/// Writes every trial into `out/trial-<k>/` and a combined `out/summary.csv`
/// with one row per trial followed by a median row. A single trial is written
/// straight into `out`.
pub fn emit_trials(reports: &[ExperimentReport], out: &Path) -> Result<()> {
    match reports {
        [] => Err(Error::contract("emit_trials", "no reports to write")),
        [single] => emit_report(single, out),
        many => {
            fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
            let mut summary = format!("{SUMMARY_HEADER}\n");
            for (k, report) in many.iter().enumerate() {
                emit_report(report, &out.join(format!("trial-{k}")))?;
                let label = format!("{} seed={}", report.label, report.seed);
                let _ = writeln!(summary, "{}", summary_row(&label, report));
            }
            let m = TrialMedians::of(many);
            let gates = |f: fn(&ExperimentReport) -> Option<bool>| {
                let votes: Vec<Option<bool>> = many.iter().map(f).collect();
                if votes.iter().any(Option::is_none) {
                    NA.to_string()
                } else {
                    let yes = votes.iter().filter(|v| **v == Some(true)).count();
                    format!("{yes}/{}", votes.len())
                }
            };
            let _ = writeln!(
                summary,
                "{} median,{},{},{},{},{},{},{}",
                many[0].label,
                num(m.min_exact),
                num(m.min_double),
                num(m.min_demoted),
                opt(m.avg_small_exact),
                opt(m.avg_small_demoted),
                gates(|r| r.status.map(|s| s.gap_ok)),
                gates(|r| r.status.map(|s| s.small_ok)),
            );
            write(&out.join("summary.csv"), &summary)
        }
    }
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn summary_row(label: &str, r: &ExperimentReport) -> String {
    let flag = |b: Option<bool>| b.map_or(NA.to_string(), |b| b.to_string());
    format!(
        "{},{},{},{},{},{},{},{}",
        label.replace(',', ";"),
        num(r.min_exact),
        num(r.min_double),
        num(r.min_demoted),
        opt(r.avg_small_exact),
        opt(r.avg_small_demoted),
        flag(r.status.map(|s| s.gap_ok)),
        flag(r.status.map(|s| s.small_ok)),
    )
}

/// Shortest decimal text that reads back to the same binary64.
fn num(x: f64) -> String {
    format!("{x:e}")
}

fn opt(x: Option<f64>) -> String {
    x.map_or(NA.to_string(), num)
}

/// Per-index table with hex-float values, so parsing gives back identical bits.
pub fn spectrum_csv(rows: &[SpectrumRow]) -> String {
    let mut out = format!("{SPECTRUM_HEADER}\n");
    for row in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            row.index,
            format_hex(row.exact),
            format_hex(row.double),
            format_hex(row.demoted),
            row.bound.map_or(NA.to_string(), format_hex)
        );
    }
    out
}

pub fn parse_spectrum_csv(text: &str) -> Result<Vec<SpectrumRow>> {
    let err = |line: usize, reason: String| Error::Parse {
        source_name: "spectrum.csv".into(),
        line,
        reason,
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == SPECTRUM_HEADER => {}
        _ => return Err(err(1, format!("expected header `{SPECTRUM_HEADER}`"))),
    }
    lines
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(idx, line)| {
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let [index, exact, double, demoted, bound] = fields[..] else {
                return Err(err(idx + 1, format!("expected 5 fields, got {}", fields.len())));
            };
            let hex = |s: &str| parse_hex(s).map_err(|e| err(idx + 1, e.to_string()));
            Ok(SpectrumRow {
                index: index.parse().map_err(|_| err(idx + 1, format!("bad index `{index}`")))?,
                exact: hex(exact)?,
                double: hex(double)?,
                demoted: hex(demoted)?,
                bound: if bound == NA { None } else { Some(hex(bound)?) },
            })
        })
        .collect()
}

/// Log-scale scatter of singular value against index for the exact, double
/// and demoted spectra, plus the square-rooted bounds where available.
pub fn plot_svg(report: &ExperimentReport) -> String {
    const W: f64 = 720.0;
    const H: f64 = 460.0;
    const LEFT: f64 = 70.0;
    const RIGHT: f64 = 20.0;
    const TOP: f64 = 40.0;
    const BOTTOM: f64 = 50.0;

    let rows = report.spectrum_rows();
    let n = rows.len();
    let positive = rows
        .iter()
        .flat_map(|r| [Some(r.exact), Some(r.double), Some(r.demoted), r.bound])
        .flatten()
        .filter(|v| *v > 0.0);
    let (lo, hi) = positive.fold((f64::INFINITY, 0.0_f64), |(lo, hi), v| (lo.min(v), hi.max(v)));
    let (dec_lo, dec_hi) = if lo.is_finite() {
        let a = lo.log10().floor() as i32;
        let b = hi.log10().ceil() as i32;
        (a, b.max(a + 1))
    } else {
        (-1, 1)
    };
    let x_of = |i: usize| LEFT + (W - LEFT - RIGHT) * if n > 1 { (i - 1) as f64 / (n - 1) as f64 } else { 0.5 };
    let y_of = |v: f64| {
        let t = (v.log10() - dec_lo as f64) / (dec_hi - dec_lo) as f64;
        H - BOTTOM - t * (H - TOP - BOTTOM)
    };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{} ({}, m = {}, seed {})</text>"#,
        W / 2.0,
        escape(&report.label),
        report.level,
        report.m,
        report.seed
    );
    // axes and decade grid
    let _ = writeln!(
        svg,
        r#"<g stroke="black" fill="none"><rect x="{LEFT}" y="{TOP}" width="{}" height="{}"/></g>"#,
        W - LEFT - RIGHT,
        H - TOP - BOTTOM
    );
    for d in dec_lo..=dec_hi {
        let y = y_of(10f64.powi(d));
        let _ = writeln!(
            svg,
            r##"<line x1="{LEFT}" x2="{}" y1="{y:.2}" y2="{y:.2}" stroke="#ddd"/><text x="{}" y="{:.2}" text-anchor="end">1e{d}</text>"##,
            W - RIGHT,
            LEFT - 6.0,
            y + 4.0
        );
    }
    for i in [1, n.div_ceil(2), n] {
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{}" text-anchor="middle">{i}</text>"#,
            x_of(i),
            H - BOTTOM + 18.0
        );
    }
    let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="middle">index</text>"#, W / 2.0, H - 10.0);
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">singular value</text>"#,
        H / 2.0,
        H / 2.0
    );

    let series: [(&str, &str, Box<dyn Fn(&SpectrumRow) -> Option<f64>>); 4] = [
        ("exact", "#000000", Box::new(|r| Some(r.exact))),
        ("double", "#1f77b4", Box::new(|r| Some(r.double))),
        (report.level.name(), "#d62728", Box::new(|r| Some(r.demoted))),
        ("bound", "#2ca02c", Box::new(|r| r.bound)),
    ];
    for (k, (name, colour, value)) in series.iter().enumerate() {
        let _ = writeln!(svg, r#"<g fill="{colour}" stroke="{colour}" data-series="{name}">"#);
        for row in &rows {
            if let Some(v) = value(row).filter(|v| *v > 0.0) {
                let (x, y) = (x_of(row.index), y_of(v));
                let _ = match k {
                    0 => writeln!(svg, r#"<circle cx="{x:.2}" cy="{y:.2}" r="4" fill="none"/>"#),
                    1 => writeln!(svg, r#"<circle cx="{x:.2}" cy="{y:.2}" r="1.8"/>"#),
                    2 => writeln!(svg, r#"<rect x="{:.2}" y="{:.2}" width="4" height="4"/>"#, x - 2.0, y - 2.0),
                    _ => writeln!(
                        svg,
                        r#"<path d="M{x:.2} {:.2} l3 5 h-6 z"/>"#,
                        y - 3.0
                    ),
                };
            }
        }
        let _ = writeln!(svg, "</g>");
        let ly = TOP + 14.0 + 16.0 * k as f64;
        let _ = writeln!(
            svg,
            r#"<circle cx="{}" cy="{ly}" r="4" fill="{colour}"/><text x="{}" y="{}">{name}</text>"#,
            LEFT + 14.0,
            LEFT + 24.0,
            ly + 4.0
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
