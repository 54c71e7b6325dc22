//! Plot-ready CSV and a bare SVG line chart from a results directory.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Deserialize;

use crate::commands::load_summary;
use crate::config::config_err;
use crate::output::{Manifest, OutDir};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 56.0;

/// One figure: labelled points and an optional fitted line `y = a + b x`.
pub struct Figure {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub points: Vec<(f64, f64)>,
    pub line: Option<(f64, f64)>,
}

impl Figure {
    pub fn svg(&self) -> String {
        let xs = self.points.iter().map(|p| p.0);
        let ys = self.points.iter().map(|p| p.1);
        let (x0, x1) = bounds(xs);
        let (y0, y1) = bounds(ys);
        let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
        let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);
        let mut s = String::new();
        let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#);
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle">{}</text>"#, WIDTH / 2.0, esc(&self.title));
        let _ = writeln!(
            s,
            r#"<path d="M{m} {b} H{r} M{m} {b} V{m}" stroke="black" fill="none"/>"#,
            m = MARGIN,
            b = HEIGHT - MARGIN,
            r = WIDTH - MARGIN
        );
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, WIDTH / 2.0, HEIGHT - 12.0, esc(&self.x_label));
        let _ = writeln!(
            s,
            r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{}</text>"#,
            HEIGHT / 2.0,
            HEIGHT / 2.0,
            esc(&self.y_label)
        );
        for (v, x, y, anchor) in [
            (x0, sx(x0), HEIGHT - MARGIN + 16.0, "middle"),
            (x1, sx(x1), HEIGHT - MARGIN + 16.0, "middle"),
        ] {
            let _ = writeln!(s, r#"<text x="{x:.1}" y="{y:.1}" text-anchor="{anchor}">{}</text>"#, tick(v));
        }
        for v in [y0, y1] {
            let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#, MARGIN - 4.0, sy(v) + 4.0, tick(v));
        }
        let pts: Vec<String> = self.points.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        let _ = writeln!(s, r#"<polyline points="{}" stroke="steelblue" stroke-width="2" fill="none"/>"#, pts.join(" "));
        for &(x, y) in &self.points {
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="steelblue"/>"#, sx(x), sy(y));
        }
        if let Some((a, b)) = self.line {
            let _ = writeln!(
                s,
                r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="firebrick" stroke-dasharray="5,4"/>"#,
                sx(x0),
                sy(a + b * x0),
                sx(x1),
                sy(a + b * x1)
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

fn bounds(v: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = v.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, lo + 0.5)
    }
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-2 || v.abs() >= 1e4) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[derive(Deserialize)]
struct TvIn {
    t: f64,
    d: f64,
}

/// Reads the results in `dir` and writes `plot.csv` and `plot.svg`.
pub fn plotdata(dir: &Path, out: Option<&Path>, quiet: bool) -> Result<()> {
    let manifest = Manifest::read(dir)?;
    let cmd: Vec<&str> = manifest.command.iter().map(String::as_str).collect();
    let (fig, csv) = match cmd.as_slice() {
        ["exact", "tv"] => {
            let path = dir.join("tv_curve.csv");
            let mut r = csv::Reader::from_path(&path).with_context(|| format!("reading {}", path.display()))?;
            let rows: Vec<TvIn> = r.deserialize().collect::<Result<_, _>>().map_err(|e| config_err(e.to_string()))?;
            let mut csv = String::from("t,d\n");
            for p in &rows {
                let _ = writeln!(csv, "{},{}", p.t, p.d);
            }
            let fig = Figure {
                title: "worst-case total variation".into(),
                x_label: "t".into(),
                y_label: "d(t)".into(),
                points: rows.iter().map(|p| (p.t, p.d)).collect(),
                line: None,
            };
            (fig, csv)
        }
        ["sweep", kind @ ("sfep-ratio" | "circle-ratio")] => {
            let fit = load_summary(dir)?.fit.ok_or_else(|| config_err("summary has no fit"))?;
            let mut csv = format!("# max/min = {}\nN,ratio\n", fit.statistic);
            for p in &fit.points {
                let _ = writeln!(csv, "{},{}", p.n, p.y);
            }
            let denom = if *kind == "sfep-ratio" { "N² log(N-k)" } else { "N² log N" };
            let fig = Figure {
                title: format!("{kind}: mean time / {denom}"),
                x_label: "N".into(),
                y_label: "ratio".into(),
                points: fit.points.iter().map(|p| (p.x, p.y)).collect(),
                line: None,
            };
            (fig, csv)
        }
        ["sweep", "afep-slope"] => {
            let fit = load_summary(dir)?.fit.ok_or_else(|| config_err("summary has no fit"))?;
            let (a, b) = (fit.intercept.unwrap_or(f64::NAN), fit.statistic);
            let mut csv = format!(
                "# slope = {b}, intercept = {a}, slope_se = {}, target = {}\ngap,log_mean\n",
                fit.slope_se.unwrap_or(f64::NAN),
                fit.target.unwrap_or(f64::NAN)
            );
            for p in &fit.points {
                let _ = writeln!(csv, "{},{}", p.x, p.y);
            }
            let fig = Figure {
                title: "log mean hitting time against N-k".into(),
                x_label: "N-k".into(),
                y_label: "log mean".into(),
                points: fit.points.iter().map(|p| (p.x, p.y)).collect(),
                line: Some((a, b)),
            };
            (fig, csv)
        }
        other => return Err(config_err(format!("no plot defined for results of `{}`", other.join(" ")))),
    };
    if fig.points.is_empty() {
        return Err(config_err(format!("{} holds no results", dir.display())));
    }
    let mut target = OutDir::resolve(Some(out.unwrap_or(dir)), "plotdata")?;
    target.write("plot.csv", csv.as_bytes())?;
    target.write("plot.svg", fig.svg().as_bytes())?;
    if !quiet {
        println!("wrote plot.csv and plot.svg to {}", target.path().display());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svg_is_well_formed_for_one_point() {
        let f = Figure { title: "a<b".into(), x_label: "x".into(), y_label: "y".into(), points: vec![(1.0, 2.0)], line: Some((0.0, 1.0)) };
        let s = f.svg();
        assert!(s.starts_with("<svg") && s.ends_with("</svg>\n"));
        assert!(s.contains("a&lt;b"));
        assert!(!s.contains("NaN"));
    }
}
