//! CSV, JSON and SVG renderings of experiment results.

use std::fmt::Write as _;
use std::io::Write;

use super::{MomentCurve, NonUniqueness, RateReport};
use crate::error::Result;

/// Shortest round-trip decimal so equal runs give equal bytes.
fn num(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else {
        format!("{x:?}")
    }
}

pub fn write_rate_csv<W: Write>(report: &RateReport, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record([report.abscissa.as_str(), "E1", "E1_se", "E2", "E2_se"])?;
    for k in 0..report.ns.len() {
        out.write_record([
            num(report.ns[k]),
            num(report.e1[k]),
            num(report.e1_se[k]),
            num(report.e2[k]),
            num(report.e2_se[k]),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn rate_json(report: &RateReport) -> serde_json::Value {
    let mut v = serde_json::to_value(report).unwrap_or_default();
    if let Some(obj) = v.as_object_mut() {
        obj.insert("fitted_exponent".into(), report.fitted_exponent().into());
        obj.insert("monotone_decay".into(), report.monotone_decay().into());
        obj.insert("decomposition_holds".into(), report.decomposition_holds().into());
    }
    v
}

pub fn write_moment_csv<W: Write>(curve: &MomentCurve, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["N", "estimate", "se", "ln_N"])?;
    for k in 0..curve.ns.len() {
        out.write_record([
            num(curve.ns[k]),
            num(curve.estimates[k]),
            num(curve.standard_errors[k]),
            num(curve.ns[k].ln()),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_nonuniqueness_csv<W: Write>(demo: &NonUniqueness, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["t", "zero_branch", "nonzero_branch", "closed_form"])?;
    for k in 0..demo.nodes.len() {
        out.write_record([
            num(demo.nodes[k]),
            num(demo.zero_branch[k]),
            num(demo.nonzero_branch[k]),
            num(demo.closed_form[k]),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// A series drawn on the plot. `log_y` selects the axis transform.
struct Series<'a> {
    xs: &'a [f64],
    ys: &'a [f64],
    errs: Option<&'a [f64]>,
    colour: &'a str,
    label: &'a str,
}

/// Colour, legend label and curve.
type Guide<'a> = (&'a str, &'a str, Box<dyn Fn(f64) -> f64 + 'a>);

struct Plot<'a> {
    title: &'a str,
    x_label: &'a str,
    y_label: &'a str,
    log_x: bool,
    log_y: bool,
    series: Vec<Series<'a>>,
    lines: Vec<Guide<'a>>,
}

const W: f64 = 640.0;
const H: f64 = 440.0;
const MARGIN: f64 = 60.0;

impl Plot<'_> {
    fn render(&self) -> String {
        let tx = |x: f64| if self.log_x { x.ln() } else { x };
        let ty = |y: f64| if self.log_y { y.ln() } else { y };
        let mut xr = (f64::INFINITY, f64::NEG_INFINITY);
        let mut yr = (f64::INFINITY, f64::NEG_INFINITY);
        for s in &self.series {
            for (k, (&x, &y)) in s.xs.iter().zip(s.ys).enumerate() {
                let e = s.errs.map_or(0.0, |e| e[k]);
                for yy in [y - e, y + e] {
                    let (a, b) = (tx(x), ty(yy));
                    if a.is_finite() && b.is_finite() {
                        xr = (xr.0.min(a), xr.1.max(a));
                        yr = (yr.0.min(b), yr.1.max(b));
                    }
                }
            }
        }
        if !xr.0.is_finite() {
            xr = (0.0, 1.0);
            yr = (0.0, 1.0);
        }
        let pad = |r: (f64, f64)| {
            let w = (r.1 - r.0).max(1e-9);
            (r.0 - 0.05 * w, r.1 + 0.05 * w)
        };
        let (xr, yr) = (pad(xr), pad(yr));
        let px = |a: f64| MARGIN + (a - xr.0) / (xr.1 - xr.0) * (W - 2.0 * MARGIN);
        let py = |b: f64| H - MARGIN - (b - yr.0) / (yr.1 - yr.0) * (H - 2.0 * MARGIN);

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{W}" height="{H}" font-family="sans-serif" font-size="12">
<rect width="{W}" height="{H}" fill="white"/>
<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>
<line x1="{MARGIN}" y1="{}" x2="{}" y2="{}" stroke="black"/>
<line x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" y2="{}" stroke="black"/>
<text x="{}" y="{}" text-anchor="middle">{}</text>
<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
            W / 2.0,
            escape(self.title),
            H - MARGIN,
            W - MARGIN,
            H - MARGIN,
            H - MARGIN,
            W / 2.0,
            H - 16.0,
            escape(self.x_label),
            H / 2.0,
            H / 2.0,
            escape(self.y_label),
        );
        for k in 0..=4 {
            let a = xr.0 + (xr.1 - xr.0) * k as f64 / 4.0;
            let b = yr.0 + (yr.1 - yr.0) * k as f64 / 4.0;
            let lx = if self.log_x { a.exp() } else { a };
            let ly = if self.log_y { b.exp() } else { b };
            let _ = writeln!(
                s,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>
<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
                px(a),
                H - MARGIN + 16.0,
                tick(lx),
                MARGIN - 6.0,
                py(b) + 4.0,
                tick(ly)
            );
        }
        for (row, (colour, label, f)) in self.lines.iter().enumerate() {
            let pts: Vec<String> = (0..=40)
                .filter_map(|k| {
                    let a = xr.0 + (xr.1 - xr.0) * k as f64 / 40.0;
                    let x = if self.log_x { a.exp() } else { a };
                    let b = ty(f(x));
                    (b.is_finite() && b >= yr.0 && b <= yr.1).then(|| format!("{:.1},{:.1}", px(a), py(b)))
                })
                .collect();
            if pts.len() > 1 {
                let _ = writeln!(
                    s,
                    r#"<polyline fill="none" stroke="{colour}" stroke-dasharray="6 3" points="{}"/>"#,
                    pts.join(" ")
                );
            }
            legend(&mut s, row, colour, label);
        }
        for (row, ser) in self.series.iter().enumerate() {
            for (k, (&x, &y)) in ser.xs.iter().zip(ser.ys).enumerate() {
                let (a, b) = (tx(x), ty(y));
                if !(a.is_finite() && b.is_finite()) {
                    continue;
                }
                if let Some(e) = ser.errs {
                    let (lo, hi) = (ty(y - e[k]), ty(y + e[k]));
                    let lo = if lo.is_finite() { lo } else { yr.0 };
                    if hi.is_finite() {
                        let _ = writeln!(
                            s,
                            r#"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="{}"/>"#,
                            px(a),
                            py(lo),
                            px(a),
                            py(hi),
                            ser.colour
                        );
                    }
                }
                let _ = writeln!(
                    s,
                    r#"<circle cx="{:.1}" cy="{:.1}" r="3" fill="{}"/>"#,
                    px(a),
                    py(b),
                    ser.colour
                );
            }
            legend(&mut s, self.lines.len() + row, ser.colour, ser.label);
        }
        s.push_str("</svg>\n");
        s
    }
}

fn legend(s: &mut String, row: usize, colour: &str, label: &str) {
    let y = MARGIN + 14.0 * row as f64;
    let _ = writeln!(
        s,
        r#"<rect x="{:.1}" y="{:.1}" width="10" height="10" fill="{colour}"/>
<text x="{:.1}" y="{:.1}">{}</text>"#,
        W - MARGIN - 170.0,
        y - 9.0,
        W - MARGIN - 155.0,
        y,
        escape(label)
    );
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.1e}")
    } else {
        format!("{v:.3}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Log-log plot of `E_1` (and `E_2` when present) with the fitted line and a
/// guide line of the theoretical slope through the first point.
pub fn rate_svg(report: &RateReport) -> String {
    let mut series = vec![Series {
        xs: &report.ns,
        ys: &report.e1,
        errs: Some(&report.e1_se),
        colour: "#1f77b4",
        label: "E1",
    }];
    if report.e2.iter().any(|e| e.is_finite()) {
        series.push(Series {
            xs: &report.ns,
            ys: &report.e2,
            errs: Some(&report.e2_se),
            colour: "#2ca02c",
            label: "E2",
        });
    }
    let mut lines: Vec<Guide> = Vec::new();
    let lc = report.log_correction;
    let corr = move |x: f64| if lc != 0.0 { x.ln().ln() * lc } else { 0.0 };
    if let Some(fit) = report.fit {
        lines.push(("#d62728", "fitted", Box::new(move |x: f64| (fit.intercept + fit.slope * x.ln() + corr(x)).exp())));
    }
    if let (Some(&x0), Some(&y0)) = (report.ns.first(), report.e1.first()) {
        if y0 > 0.0 {
            let p = report.theoretical_exponent;
            lines.push((
                "#7f7f7f",
                "theoretical slope",
                Box::new(move |x: f64| y0 * (x / x0).powf(p) * (corr(x) - corr(x0)).exp()),
            ));
        }
    }
    Plot {
        title: &report.label,
        x_label: &report.abscissa,
        y_label: "error",
        log_x: true,
        log_y: true,
        series,
        lines,
    }
    .render()
}

pub fn moment_svg(curve: &MomentCurve) -> String {
    let xs: Vec<f64> = curve.ns.iter().map(|n| n.ln()).collect();
    let mut lines: Vec<Guide> = Vec::new();
    if let Some(fit) = curve.fit {
        lines.push(("#d62728", "fitted", Box::new(move |x: f64| fit.intercept + fit.slope * x)));
    }
    let plot = Plot {
        title: "truncated moment",
        x_label: "ln N",
        y_label: "E|Z_N|^p",
        log_x: false,
        log_y: false,
        series: vec![Series {
            xs: &xs,
            ys: &curve.estimates,
            errs: Some(&curve.standard_errors),
            colour: "#1f77b4",
            label: "estimate",
        }],
        lines,
    };
    plot.render()
}

pub fn nonuniqueness_svg(demo: &NonUniqueness) -> String {
    Plot {
        title: "two solutions from zero",
        x_label: "t",
        y_label: "y(t)",
        log_x: false,
        log_y: false,
        series: vec![
            Series {
                xs: &demo.nodes,
                ys: &demo.zero_branch,
                errs: None,
                colour: "#1f77b4",
                label: "Picard from zero",
            },
            Series {
                xs: &demo.nodes,
                ys: &demo.nonzero_branch,
                errs: None,
                colour: "#ff7f0e",
                label: "perturbed start",
            },
        ],
        lines: Vec::new(),
    }
    .render()
}

/// `δ_k` and the noise floor against the iteration count, log scale.
pub fn contraction_svg(distances: &[f64], floors: &[f64]) -> String {
    let ks: Vec<f64> = (1..=distances.len()).map(|k| k as f64).collect();
    let plot = Plot {
        title: "Picard iterates",
        x_label: "iteration",
        y_label: "distance",
        log_x: false,
        log_y: true,
        series: vec![
            Series {
                xs: &ks,
                ys: distances,
                errs: None,
                colour: "#1f77b4",
                label: "delta",
            },
            Series {
                xs: &ks,
                ys: floors,
                errs: None,
                colour: "#7f7f7f",
                label: "noise floor",
            },
        ],
        lines: Vec::new(),
    };
    plot.render()
}
