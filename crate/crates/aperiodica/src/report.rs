//! CSV and SVG emission.
//!
//! Every CSV body is deterministic for a fixed input; the comment header
//! records the full run configuration and the library version, plus a
//! timestamp unless suppressed (the reproducible mode). SVG plots are
//! written directly: stem plots in 1D, disk-area plots in 2D.

use std::fmt::Write as _;

use crate::autocorr::WeightedComb;
use crate::diffraction::PeakList;
use crate::patches::PatchCensus;

/// Comment header recording the configuration; `timestamp = None` keeps
/// the output byte-reproducible.
pub fn csv_header(config: &str, timestamp: Option<&str>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# aperiodica v{}", crate::VERSION);
    let _ = writeln!(out, "# config: {config}");
    if let Some(ts) = timestamp {
        let _ = writeln!(out, "# generated: {ts}");
    }
    out
}

pub fn census_csv(census: &PatchCensus, censused_volume: f64) -> String {
    let mut out = String::from("S,class_id,count,frequency\n");
    for (id, class) in census.classes.iter().enumerate() {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            census.radius,
            id,
            class.count,
            class.count as f64 / censused_volume
        );
    }
    out
}

pub fn entropy_csv(rows: &[(f64, usize, f64)]) -> String {
    let mut out = String::from("S,N,entropy_density\n");
    for (s, n, h) in rows {
        let _ = writeln!(out, "{s},{n},{h}");
    }
    out
}

pub fn comb_csv(comb: &WeightedComb, dim: usize) -> String {
    let mut out = String::new();
    for i in 1..=dim {
        let _ = write!(out, "z_{i},");
    }
    out.push_str("weight,estimator,n\n");
    for (z, w) in comb.support.iter().zip(&comb.weights) {
        for zi in z {
            let _ = write!(out, "{zi},");
        }
        let _ = writeln!(out, "{w},{},{}", comb.estimator, comb.n);
    }
    out
}

pub fn peaks_csv(peaks: &PeakList, dim: usize) -> String {
    let mut out = String::new();
    for i in 1..=dim {
        let _ = write!(out, "xi_{i},");
    }
    out.push_str("s,intensity_bt,intensity_closed,q_label\n");
    let s = peaks.s_used.last().copied().unwrap_or(0.0);
    for e in &peaks.entries {
        for x in &e.xi {
            let _ = write!(out, "{x},");
        }
        let closed = e
            .intensity_closed
            .map(|v| v.to_string())
            .unwrap_or_default();
        let label = e
            .q_label
            .as_ref()
            .map(|q| {
                q.iter()
                    .map(|v| v.to_string())
                    .collect::<Vec<_>>()
                    .join(";")
            })
            .unwrap_or_default();
        let _ = writeln!(out, "{s},{},{closed},{label}", e.intensity_bt);
    }
    out
}

pub fn ww_csv(rows: &[(f64, f64)]) -> String {
    let mut out = String::from("n,sup_dev\n");
    for (n, dev) in rows {
        let _ = writeln!(out, "{n},{dev}");
    }
    out
}

pub fn symmetry_csv(rows: &[(Vec<f64>, f64, f64)], dim: usize) -> String {
    let mut out = String::new();
    for i in 1..=dim {
        let _ = write!(out, "xi_{i},");
    }
    out.push_str("intensity,intensity_rotated,discrepancy\n");
    for (xi, a, b) in rows {
        for x in xi {
            let _ = write!(out, "{x},");
        }
        let _ = writeln!(out, "{a},{b},{}", (a - b).abs());
    }
    out
}

const SVG_W: f64 = 900.0;
const SVG_H: f64 = 480.0;
const MARGIN: f64 = 56.0;

fn svg_open(title: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {SVG_W} {SVG_H}\" \
         font-family=\"sans-serif\" font-size=\"12\">\n\
         <title>{title}</title>\n\
         <rect width=\"{SVG_W}\" height=\"{SVG_H}\" fill=\"white\"/>\n"
    )
}

/// Stem plot of 1D peaks: intensity against frequency.
pub fn svg_stem_plot(peaks: &PeakList, title: &str) -> String {
    let xs: Vec<f64> = peaks.entries.iter().map(|e| e.xi[0]).collect();
    let ys: Vec<f64> = peaks.entries.iter().map(|e| e.intensity_bt).collect();
    let (x_lo, x_hi) = xs
        .iter()
        .fold((0.0f64, 1.0f64), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    let y_hi = ys.iter().fold(1e-300f64, |m, &y| m.max(y));
    let px = |x: f64| MARGIN + (x - x_lo) / (x_hi - x_lo).max(1e-300) * (SVG_W - 2.0 * MARGIN);
    let py = |y: f64| SVG_H - MARGIN - y / y_hi * (SVG_H - 2.0 * MARGIN);
    let mut out = svg_open(title);
    let base = SVG_H - MARGIN;
    let _ = writeln!(
        out,
        "<line x1=\"{MARGIN}\" y1=\"{base}\" x2=\"{}\" y2=\"{base}\" stroke=\"black\"/>",
        SVG_W - MARGIN
    );
    let _ = writeln!(
        out,
        "<line x1=\"{MARGIN}\" y1=\"{MARGIN}\" x2=\"{MARGIN}\" y2=\"{base}\" stroke=\"black\"/>"
    );
    for i in 0..=4 {
        let x = x_lo + (x_hi - x_lo) * i as f64 / 4.0;
        let _ = writeln!(
            out,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{x:.3}</text>",
            px(x),
            base + 18.0
        );
        let y = y_hi * i as f64 / 4.0;
        let _ = writeln!(
            out,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{y:.3}</text>",
            MARGIN - 6.0,
            py(y) + 4.0
        );
    }
    let _ = writeln!(
        out,
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">xi</text>",
        SVG_W / 2.0,
        SVG_H - 12.0
    );
    let _ = writeln!(
        out,
        "<text x=\"16\" y=\"{:.1}\" transform=\"rotate(-90 16 {:.1})\" \
         text-anchor=\"middle\">intensity</text>",
        SVG_H / 2.0,
        SVG_H / 2.0
    );
    for (x, y) in xs.iter().zip(&ys) {
        let _ = writeln!(
            out,
            "<line x1=\"{:.2}\" y1=\"{base}\" x2=\"{:.2}\" y2=\"{:.2}\" \
             stroke=\"steelblue\" stroke-width=\"1.5\"/>",
            px(*x),
            px(*x),
            py(*y)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Disk-area plot of 2D peaks: disk area proportional to intensity.
pub fn svg_disk_plot(peaks: &PeakList, title: &str) -> String {
    let r_hi = peaks
        .entries
        .iter()
        .map(|e| crate::geom::norm(&e.xi))
        .fold(1e-300f64, f64::max);
    let y_hi = peaks
        .entries
        .iter()
        .map(|e| e.intensity_bt)
        .fold(1e-300f64, f64::max);
    let side = SVG_H;
    let scale = (side / 2.0 - MARGIN) / r_hi;
    let cx = SVG_W / 2.0;
    let cy = side / 2.0;
    let max_dot = 12.0;
    let mut out = svg_open(title);
    let _ = writeln!(
        out,
        "<circle cx=\"{cx}\" cy=\"{cy}\" r=\"{:.1}\" fill=\"none\" stroke=\"#ccc\"/>",
        r_hi * scale
    );
    for e in &peaks.entries {
        let r = (e.intensity_bt / y_hi).sqrt() * max_dot;
        if r < 0.3 {
            continue;
        }
        let _ = writeln!(
            out,
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"{:.2}\" fill=\"steelblue\" \
             fill-opacity=\"0.8\"/>",
            cx + e.xi[0] * scale,
            cy - e.xi[1] * scale,
            r
        );
    }
    let _ = writeln!(
        out,
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">xi (radius {r_hi:.2})</text>",
        cx,
        side - 12.0
    );
    out.push_str("</svg>\n");
    out
}
