use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::Row;

const W: f64 = 720.0;
const H: f64 = 440.0;
const PAD: f64 = 60.0;
const COLOURS: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"];

pub(super) fn ratio_plot(rows: &[Row]) -> String {
    let mut series: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    let mut order: Vec<String> = Vec::new();
    for r in rows {
        let Some(ratio) = r.ratio else { continue };
        let key = format!("{} p={} beta={} {}", r.seq, r.p, r.beta, r.class);
        if !series.contains_key(&key) {
            order.push(key.clone());
        }
        series.entry(key).or_default().push((r.m as f64, ratio));
    }
    let pts: Vec<(f64, f64)> = series.values().flatten().copied().collect();
    let (mut x0, mut x1) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y0, mut y1) = (1.0f64, 1.0f64);
    for &(x, y) in &pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        x0 = 0.0;
        x1 = 1.0;
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    let dy = (y1 - y0).max(1e-6);
    y0 -= 0.05 * dy;
    y1 += 0.05 * dy;
    let sx = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let sy = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);

    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\" font-family=\"sans-serif\" font-size=\"11\">"
    );
    let _ = writeln!(out, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");
    let _ = writeln!(
        out,
        "<line x1=\"{PAD}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"black\"/>",
        H - PAD,
        W - PAD,
        H - PAD
    );
    let _ = writeln!(out, "<line x1=\"{PAD}\" y1=\"{PAD}\" x2=\"{PAD}\" y2=\"{:.2}\" stroke=\"black\"/>", H - PAD);
    let _ = writeln!(
        out,
        "<line x1=\"{PAD}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"#999\" stroke-dasharray=\"4 3\"/>",
        W - PAD,
        y = sy(1.0)
    );
    for i in 0..=4 {
        let xv = x0 + (x1 - x0) * i as f64 / 4.0;
        let yv = y0 + (y1 - y0) * i as f64 / 4.0;
        let _ = writeln!(out, "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{xv:.0}</text>", sx(xv), H - PAD + 16.0);
        let _ = writeln!(out, "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{yv:.4}</text>", PAD - 6.0, sy(yv) + 4.0);
    }
    let _ = writeln!(out, "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">n - p + 1</text>", W / 2.0, H - 16.0);
    let _ = writeln!(out, "<text x=\"16\" y=\"{:.2}\" transform=\"rotate(-90 16 {:.2})\" text-anchor=\"middle\">exact / main term</text>", H / 2.0, H / 2.0);
    for (i, key) in order.iter().enumerate() {
        let colour = COLOURS[i % COLOURS.len()];
        let mut p = series[key].clone();
        p.sort_by(|a, b| a.0.total_cmp(&b.0));
        let coords: Vec<String> = p.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        let _ = writeln!(out, "<polyline fill=\"none\" stroke=\"{colour}\" stroke-width=\"1.5\" points=\"{}\"/>", coords.join(" "));
        let _ = writeln!(
            out,
            "<text x=\"{:.2}\" y=\"{:.2}\" fill=\"{colour}\">{}</text>",
            PAD + 8.0,
            PAD + 14.0 * (i as f64 + 1.0),
            escape(key)
        );
    }
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
