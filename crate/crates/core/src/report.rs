//! JSON, CSV and SVG output.
//!
//! Field order is fixed and floats carry 17 significant digits, so equal
//! inputs give byte-identical text. Non-finite floats are written as the
//! strings `"+inf"`, `"-inf"` and `"nan"`.

use crate::claims::ClaimReport;
use crate::cube::DyadicCube;
use crate::examples::Params;
use crate::halfspace::HalfspaceEstimate;
use crate::norms::NormResult;
use crate::profile::{profile_table, LambdaProfile};
use serde_json::{Map, Number, Value};
use std::fmt::Write;

/// Float text with 17 significant digits and a signed exponent; non-finite
/// values spelled out.
pub fn float_text(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x == f64::INFINITY {
        "+inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        let s = format!("{x:.16e}");
        match s.split_once('e') {
            Some((m, e)) if !e.starts_with('-') => format!("{m}e+{e}"),
            _ => s,
        }
    }
}

pub fn float(x: f64) -> Value {
    if x.is_finite() {
        Value::Number(float_text(x).parse::<Number>().expect("formatted float is a JSON number"))
    } else {
        Value::String(float_text(x))
    }
}

fn floats(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|&x| float(x)).collect())
}

fn strings<T: ToString>(v: &[T]) -> Value {
    Value::Array(v.iter().map(|s| Value::String(s.to_string())).collect())
}

fn object(fields: Vec<(&str, Value)>) -> Value {
    let mut m = Map::new();
    for (k, v) in fields {
        m.insert(k.to_string(), v);
    }
    Value::Object(m)
}

pub fn params_json(p: &Params) -> Value {
    let mut m = Map::new();
    for (k, v) in p.iter() {
        m.insert(k.clone(), Value::String(v.clone()));
    }
    Value::Object(m)
}

pub fn cubes_json(c: &[DyadicCube]) -> Value {
    strings(c)
}

pub fn norm_json(r: &NormResult) -> Value {
    object(vec![
        ("norm", Value::String(r.norm.clone())),
        ("value", float(r.value)),
        ("exactness", Value::String(r.exactness.name().into())),
        ("witness", cubes_json(&r.witness)),
        ("lambda", r.lambda.map_or(Value::Null, float)),
        ("error_bound", float(r.error_bound)),
        ("notes", strings(&r.notes)),
    ])
}

pub fn claim_json(r: &ClaimReport) -> Value {
    let series = r
        .series
        .iter()
        .map(|s| {
            object(vec![
                ("name", Value::String(s.name.clone())),
                ("x_label", Value::String(s.x_label.clone())),
                ("x", floats(&s.x)),
                ("y", floats(&s.y)),
            ])
        })
        .collect();
    let checks = r
        .checks
        .iter()
        .map(|c| {
            object(vec![
                ("name", Value::String(c.name.clone())),
                ("lhs", float(c.lhs)),
                ("rel", Value::String(c.rel.symbol().into())),
                ("rhs", float(c.rhs)),
                ("holds", Value::Bool(c.holds())),
            ])
        })
        .collect();
    object(vec![
        ("claim", Value::String(r.claim.name().into())),
        ("params", params_json(&r.params)),
        ("series", Value::Array(series)),
        ("checks", Value::Array(checks)),
        ("notes", strings(&r.notes)),
        ("verdict", Value::String(r.verdict().name().into())),
    ])
}

pub fn halfspace_json(e: &HalfspaceEstimate) -> Value {
    object(vec![
        ("lower", float(e.lower)),
        ("upper", float(e.upper)),
        ("per_lattice", floats(&e.per_lattice)),
        ("sample_estimate", float(e.sample_estimate)),
        ("slack", float(e.slack)),
        ("c_lower", float(e.c_lower)),
        ("c_upper", float(e.c_upper)),
        ("dyadic_complete", Value::Bool(e.dyadic_complete)),
        ("exactness", Value::String(e.exactness.name().into())),
        ("levels", Value::Array(vec![e.levels.0.into(), e.levels.1.into()])),
        ("sample_count", e.sample_count.into()),
        ("notes", strings(&e.notes)),
    ])
}

/// Pretty JSON with a trailing newline.
pub fn to_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Breakpoint table `lambda,W,lambda_p_W,source`.
pub fn profile_csv(prof: &LambdaProfile, p: f64, periods: u32, max_rows: usize) -> String {
    let mut out = String::from("lambda,W,lambda_p_W,source\n");
    for r in profile_table(prof, p, periods, max_rows) {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            float_text(r.lambda),
            float_text(r.w),
            float_text(r.lambda_p_w),
            if r.tail { "tail" } else { "step" }
        );
    }
    out
}

/// Trend table `series,x_label,x,y`, one row per point.
pub fn claim_csv(r: &ClaimReport) -> String {
    let mut out = String::from("series,x_label,x,y\n");
    for s in &r.series {
        for (x, y) in s.x.iter().zip(&s.y) {
            let _ = writeln!(out, "{},{},{},{}", csv_field(&s.name), csv_field(&s.x_label), float_text(*x), float_text(*y));
        }
    }
    out
}

pub fn witness_csv(c: &[DyadicCube]) -> String {
    let mut out = String::from("cube,level,side\n");
    for q in c {
        let _ = writeln!(out, "{},{},{}", csv_field(&q.to_string()), q.level, float_text(q.side()));
    }
    out
}

/// Samples `x,t,a` (1-D abscissa; higher dimensions join coordinates with `;`).
pub fn samples_csv(e: &HalfspaceEstimate) -> String {
    let mut out = String::from("x,t,a\n");
    for (x, t, a) in &e.samples {
        let xs: Vec<String> = x.iter().map(|&v| float_text(v)).collect();
        let _ = writeln!(out, "{},{},{}", xs.join(";"), float_text(*t), float_text(*a));
    }
    out
}

const W: f64 = 640.0;
const H: f64 = 420.0;
const L: f64 = 70.0;
const R: f64 = 170.0;
const T: f64 = 40.0;
const B: f64 = 50.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2"];

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Decade range covering `lo..=hi` (both positive).
fn decades(lo: f64, hi: f64) -> (f64, f64) {
    let a = lo.log10().floor();
    let b = hi.log10().ceil();
    if a == b {
        (a - 0.5, b + 0.5)
    } else {
        (a, b)
    }
}

/// Log-log line plot; points with non-positive or non-finite coordinates are
/// dropped.
pub fn svg_loglog(title: &str, x_label: &str, y_label: &str, series: &[(String, Vec<(f64, f64)>)]) -> String {
    let ok = |v: f64| v.is_finite() && v > 0.0;
    let pts: Vec<(f64, f64)> = series.iter().flat_map(|s| s.1.iter().copied()).filter(|&(x, y)| ok(x) && ok(y)).collect();
    let mut out = String::new();
    let _ = writeln!(out, "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">");
    let _ = writeln!(out, "<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>");
    let _ = writeln!(out, "<text x=\"{}\" y=\"22\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">{}</text>", (L + W - R) / 2.0, esc(title));
    if pts.is_empty() {
        let _ = writeln!(out, "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">no positive data</text>", W / 2.0, H / 2.0);
        out.push_str("</svg>\n");
        return out;
    }
    let (x0, x1) = decades(pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min), pts.iter().map(|p| p.0).fold(0.0, f64::max));
    let (y0, y1) = decades(pts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min), pts.iter().map(|p| p.1).fold(0.0, f64::max));
    let px = |x: f64| L + (x.log10() - x0) / (x1 - x0) * (W - L - R);
    let py = |y: f64| H - B - (y.log10() - y0) / (y1 - y0) * (H - T - B);
    let _ = writeln!(out, "<rect x=\"{L}\" y=\"{T}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>", W - L - R, H - T - B);
    let step = |a: f64, b: f64| ((b - a) / 8.0).ceil().max(1.0);
    let sx = step(x0, x1);
    let mut d = x0.ceil();
    while d <= x1 {
        let x = L + (d - x0) / (x1 - x0) * (W - L - R);
        let _ = writeln!(out, "<line x1=\"{x:.2}\" y1=\"{T}\" x2=\"{x:.2}\" y2=\"{}\" stroke=\"#dddddd\"/>", H - B);
        let _ = writeln!(out, "<text x=\"{x:.2}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">1e{d}</text>", H - B + 16.0);
        d += sx;
    }
    let sy = step(y0, y1);
    let mut d = y0.ceil();
    while d <= y1 {
        let y = H - B - (d - y0) / (y1 - y0) * (H - T - B);
        let _ = writeln!(out, "<line x1=\"{L}\" y1=\"{y:.2}\" x2=\"{}\" y2=\"{y:.2}\" stroke=\"#dddddd\"/>", W - R);
        let _ = writeln!(out, "<text x=\"{}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">1e{d}</text>", L - 6.0, y + 4.0);
        d += sy;
    }
    let _ = writeln!(out, "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">{}</text>", (L + W - R) / 2.0, H - 12.0, esc(x_label));
    let _ = writeln!(out, "<text x=\"16\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">{}</text>", (T + H - B) / 2.0, (T + H - B) / 2.0, esc(y_label));
    for (i, (name, s)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let path: Vec<String> = s.iter().filter(|&&(x, y)| ok(x) && ok(y)).map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
        if path.len() > 1 {
            let _ = writeln!(out, "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>", path.join(" "));
        }
        for p in &path {
            let (cx, cy) = p.split_once(',').unwrap();
            let _ = writeln!(out, "<circle cx=\"{cx}\" cy=\"{cy}\" r=\"2.5\" fill=\"{color}\"/>");
        }
        let ly = T + 14.0 + 18.0 * i as f64;
        let _ = writeln!(out, "<line x1=\"{}\" y1=\"{ly}\" x2=\"{}\" y2=\"{ly}\" stroke=\"{color}\" stroke-width=\"2\"/>", W - R + 10.0, W - R + 30.0);
        let _ = writeln!(out, "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\">{}</text>", W - R + 35.0, ly + 4.0, esc(name));
    }
    out.push_str("</svg>\n");
    out
}

/// `λ ↦ λ^p W(λ⁻)` at the breakpoints, log-log.
pub fn profile_svg(prof: &LambdaProfile, p: f64, title: &str) -> String {
    let rows = profile_table(prof, p, 4, 20_000);
    let pts = rows.iter().map(|r| (r.lambda, r.lambda_p_w)).collect();
    svg_loglog(title, "lambda", "lambda^p W(lambda)", &[("profile".to_string(), pts)])
}

/// Trend series of a claim report, log-log.
pub fn claim_svg(r: &ClaimReport) -> String {
    let series: Vec<(String, Vec<(f64, f64)>)> =
        r.series.iter().map(|s| (s.name.clone(), s.x.iter().copied().zip(s.y.iter().copied()).collect())).collect();
    let x_label = r.series.first().map_or("", |s| s.x_label.as_str());
    svg_loglog(&format!("claim {}", r.claim), x_label, "value", &series)
}

/// Heat map of `log a(x,t)` over the strip (first coordinate against
/// `log2 t`).
pub fn samples_svg(e: &HalfspaceEstimate, title: &str) -> String {
    let pts: Vec<(f64, f64, f64)> =
        e.samples.iter().filter(|s| s.2 > 0.0 && s.1 > 0.0).map(|s| (s.0.first().copied().unwrap_or(0.0), s.1.log2(), s.2.ln())).collect();
    let mut out = String::new();
    let _ = writeln!(out, "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">");
    let _ = writeln!(out, "<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>");
    let _ = writeln!(out, "<text x=\"{}\" y=\"22\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">{}</text>", (L + W - R) / 2.0, esc(title));
    if pts.is_empty() {
        out.push_str("</svg>\n");
        return out;
    }
    let range = |f: &dyn Fn(&(f64, f64, f64)) -> f64| {
        let lo = pts.iter().map(f).fold(f64::INFINITY, f64::min);
        let hi = pts.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
        if hi > lo {
            (lo, hi)
        } else {
            (lo - 0.5, hi + 0.5)
        }
    };
    let (x0, x1) = range(&|p| p.0);
    let (t0, t1) = range(&|p| p.1);
    let (a0, a1) = range(&|p| p.2);
    let _ = writeln!(out, "<rect x=\"{L}\" y=\"{T}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>", W - L - R, H - T - B);
    for &(x, t, a) in &pts {
        let u = (a - a0) / (a1 - a0);
        let (r, g, b) = ((255.0 * u) as u8, (80.0 * (1.0 - (2.0 * u - 1.0).abs())) as u8, (255.0 * (1.0 - u)) as u8);
        let cx = L + (x - x0) / (x1 - x0) * (W - L - R);
        let cy = H - B - (t - t0) / (t1 - t0) * (H - T - B);
        let _ = writeln!(out, "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"3\" height=\"3\" fill=\"rgb({r},{g},{b})\"/>", cx - 1.5, cy - 1.5);
    }
    let _ = writeln!(out, "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">x in [{x0:.3}, {x1:.3}]</text>", (L + W - R) / 2.0, H - 12.0);
    let _ = writeln!(out, "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\">log2 t in [{t0:.1}, {t1:.1}]</text>", W - R + 10.0, T + 14.0);
    let _ = writeln!(out, "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\">ln a in [{a0:.2}, {a1:.2}]</text>", W - R + 10.0, T + 32.0);
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_have_seventeen_digits() {
        assert_eq!(float_text(0.1), "1.0000000000000001e-1");
        assert_eq!(float_text(f64::INFINITY), "+inf");
        assert_eq!(to_text(&float(2.5)), "2.5000000000000000e+0\n");
        assert_eq!(float(f64::NAN), Value::String("nan".into()));
    }

    #[test]
    fn csv_quotes_fields() {
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("plain"), "plain");
    }

    #[test]
    fn svg_is_self_contained() {
        let s = svg_loglog("t", "x", "y", &[("s".into(), vec![(1.0, 2.0), (10.0, 20.0), (0.0, 1.0)])]);
        assert!(s.starts_with("<svg") && s.ends_with("</svg>\n"));
        assert!(!s.contains("href"));
        assert_eq!(s.matches("<circle").count(), 2);
    }

    #[test]
    fn empty_profile_csv_is_header_only() {
        let prof = LambdaProfile::empty();
        assert_eq!(profile_csv(&prof, 2.0, 4, 100), "lambda,W,lambda_p_W,source\n");
    }
}
