//! Plain SVG plots rendered from artifact CSVs, so every figure can be
//! regenerated from the CSV alone.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::{CliError, Result};

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 60.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];
const LEVEL_FILL: [&str; 4] = ["#08519c", "#4292c6", "#9ecae1", "#deebf7"];

type Table = (Vec<String>, Vec<Vec<String>>);

fn parse(csv_bytes: &[u8]) -> Result<Table> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(csv_bytes);
    let header = r.headers()?.iter().map(str::to_string).collect();
    let rows = r
        .records()
        .map(|rec| rec.map(|r| r.iter().map(str::to_string).collect()))
        .collect::<Result<_, _>>()?;
    Ok((header, rows))
}

fn number(s: &str) -> Result<f64> {
    s.parse()
        .map_err(|_| CliError::Runtime(anyhow::anyhow!("svg: `{s}` is not a number")))
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn open(title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    s
}

fn close(mut s: String) -> String {
    s.push_str("</svg>\n");
    s
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN - (y - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - 2.0 * MARGIN)
    }

    fn axes(&self, s: &mut String) {
        let (x0, x1) = (MARGIN, WIDTH - MARGIN);
        let (y0, y1) = (HEIGHT - MARGIN, MARGIN);
        let _ = writeln!(
            s,
            r#"<path d="M{x0},{y1} L{x0},{y0} L{x1},{y0}" fill="none" stroke="black"/>"#
        );
        for i in 0..=4 {
            let v = self.y.0 + (self.y.1 - self.y.0) * i as f64 / 4.0;
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{:.1}" text-anchor="end">{}</text>"#,
                x0 - 6.0,
                self.py(v) + 4.0,
                short(v)
            );
        }
    }
}

fn short(v: f64) -> String {
    if v.abs() >= 1000.0 {
        format!("{v:.0}")
    } else {
        format!("{v:.3}")
    }
}

fn legend(s: &mut String, names: &[String]) {
    for (i, name) in names.iter().enumerate() {
        let y = MARGIN + 14.0 * i as f64;
        let color = PALETTE[i % PALETTE.len()];
        let _ = writeln!(
            s,
            r#"<rect x="{}" y="{}" width="10" height="10" fill="{color}"/><text x="{}" y="{}">{}</text>"#,
            WIDTH - MARGIN + 6.0,
            y,
            WIDTH - MARGIN + 20.0,
            y + 9.0,
            escape(name)
        );
    }
}

fn polylines(title: &str, x_labels: Option<&[String]>, series: &[(String, Vec<(f64, f64)>)]) -> String {
    let mut s = open(title);
    let frame = Frame {
        x: range(series.iter().flat_map(|(_, p)| p.iter().map(|q| q.0))),
        y: range(series.iter().flat_map(|(_, p)| p.iter().map(|q| q.1))),
    };
    frame.axes(&mut s);
    if let Some(labels) = x_labels {
        for (i, l) in labels.iter().enumerate() {
            let _ = writeln!(
                s,
                r#"<text x="{:.1}" y="{}" text-anchor="middle">{}</text>"#,
                frame.px(i as f64),
                HEIGHT - MARGIN + 16.0,
                escape(l)
            );
        }
    }
    for (i, (_, points)) in series.iter().enumerate() {
        let d: Vec<String> = points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", frame.px(x), frame.py(y)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.5"/>"#,
            d.join(" "),
            PALETTE[i % PALETTE.len()]
        );
    }
    if series.len() > 1 {
        legend(&mut s, &series.iter().map(|(n, _)| n.clone()).collect::<Vec<_>>());
    }
    close(s)
}

fn bar_plot(title: &str, labels: &[String], values: &[f64], errors: Option<&[f64]>) -> String {
    let mut s = open(title);
    let hi = values
        .iter()
        .zip(errors.unwrap_or(&vec![0.0; values.len()]))
        .map(|(v, e)| v + e)
        .fold(0.0, f64::max);
    let lo = values.iter().copied().fold(0.0, f64::min);
    let frame = Frame {
        x: (0.0, labels.len().max(1) as f64),
        y: range([lo, hi].into_iter()),
    };
    frame.axes(&mut s);
    let step = (WIDTH - 2.0 * MARGIN) / labels.len().max(1) as f64;
    let every = (labels.len() / 40).max(1);
    for (i, (label, &v)) in labels.iter().zip(values).enumerate() {
        let x = frame.px(i as f64) + step * 0.1;
        let (top, bottom) = (frame.py(v.max(0.0)), frame.py(v.min(0.0)));
        let _ = writeln!(
            s,
            r##"<rect x="{x:.2}" y="{top:.2}" width="{:.2}" height="{:.2}" fill="#4292c6"/>"##,
            step * 0.8,
            bottom - top
        );
        if let Some(e) = errors.map(|e| e[i]).filter(|e| *e > 0.0) {
            let cx = x + step * 0.4;
            let _ = writeln!(
                s,
                r#"<line x1="{cx:.2}" x2="{cx:.2}" y1="{:.2}" y2="{:.2}" stroke="black"/>"#,
                frame.py(v - e),
                frame.py(v + e)
            );
        }
        if i % every == 0 {
            let lx = x + step * 0.4;
            let ly = HEIGHT - MARGIN + 12.0;
            let _ = writeln!(
                s,
                r#"<text x="{lx:.2}" y="{ly}" text-anchor="end" transform="rotate(-45 {lx:.2} {ly})">{}</text>"#,
                escape(label)
            );
        }
    }
    close(s)
}

/// `label,value` bars.
pub fn bars(csv_bytes: &[u8], title: &str) -> Result<String> {
    let (_, rows) = parse(csv_bytes)?;
    let labels: Vec<String> = rows.iter().map(|r| r[0].clone()).collect();
    let values = rows.iter().map(|r| number(&r[1])).collect::<Result<Vec<_>>>()?;
    Ok(bar_plot(title, &labels, &values, None))
}

/// `x,y` single line.
pub fn lines(csv_bytes: &[u8], title: &str) -> Result<String> {
    let (header, rows) = parse(csv_bytes)?;
    let points = rows
        .iter()
        .map(|r| Ok((number(&r[0])?, number(&r[1])?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(polylines(title, None, &[(header[1].clone(), points)]))
}

/// `x,series,value` long format, one line per series.
pub fn long_lines(csv_bytes: &[u8], title: &str) -> Result<String> {
    let (_, rows) = parse(csv_bytes)?;
    let mut series: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for r in &rows {
        series
            .entry(r[1].clone())
            .or_default()
            .push((number(&r[0])?, number(&r[2])?));
    }
    Ok(polylines(title, None, &series.into_iter().collect::<Vec<_>>()))
}

/// `key,period,words` activity: one line per key over the periods.
pub fn activity(csv_bytes: &[u8], title: &str) -> Result<String> {
    let (_, rows) = parse(csv_bytes)?;
    let mut periods: Vec<String> = rows.iter().map(|r| r[1].clone()).collect();
    periods.sort();
    periods.dedup();
    let mut keys: Vec<String> = Vec::new();
    let mut series: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for r in &rows {
        if !keys.contains(&r[0]) {
            keys.push(r[0].clone());
        }
        let x = periods.binary_search(&r[1]).expect("period collected above") as f64;
        series.entry(r[0].clone()).or_default().push((x, number(&r[2])?));
    }
    let ordered: Vec<_> = keys
        .into_iter()
        .map(|k| {
            let mut pts = series.remove(&k).unwrap_or_default();
            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
            (k, pts)
        })
        .collect();
    Ok(polylines(title, Some(&periods), &ordered))
}

/// Square `label,c1,c2,…` matrix as a grid. Integer cells 1 to 4 use the
/// level palette; other values are shaded by magnitude.
pub fn matrix(csv_bytes: &[u8], title: &str) -> Result<String> {
    let (header, rows) = parse(csv_bytes)?;
    let labels = &header[1..];
    let n = labels.len().max(1);
    let cells: Vec<Vec<Option<f64>>> = rows
        .iter()
        .map(|r| {
            r[1..]
                .iter()
                .map(|c| if c.is_empty() { Ok(None) } else { number(c).map(Some) })
                .collect()
        })
        .collect::<Result<_>>()?;
    let levels = cells
        .iter()
        .flatten()
        .flatten()
        .all(|v| v.fract() == 0.0 && (1.0..=4.0).contains(v));
    let (lo, hi) = range(cells.iter().flatten().flatten().copied());
    let mut s = open(title);
    let size = ((HEIGHT - 2.0 * MARGIN) / n as f64).min((WIDTH - 3.0 * MARGIN) / n as f64);
    let x0 = 2.0 * MARGIN;
    for (i, row) in cells.iter().enumerate() {
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
            x0 - 6.0,
            MARGIN + size * (i as f64 + 0.5) + 4.0,
            escape(&rows[i][0])
        );
        for (j, cell) in row.iter().enumerate() {
            let fill = match cell {
                None => "#ffffff".to_string(),
                Some(v) if levels => LEVEL_FILL[*v as usize - 1].to_string(),
                Some(v) => {
                    let t = (v - lo) / (hi - lo);
                    let c = (255.0 - 200.0 * t).round() as u8;
                    format!("#{c:02x}{c:02x}ff")
                }
            };
            let _ = writeln!(
                s,
                r##"<rect x="{:.2}" y="{:.2}" width="{size:.2}" height="{size:.2}" fill="{fill}" stroke="#999"/>"##,
                x0 + size * j as f64,
                MARGIN + size * i as f64
            );
            if let Some(v) = cell {
                let _ = writeln!(
                    s,
                    r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
                    x0 + size * (j as f64 + 0.5),
                    MARGIN + size * (i as f64 + 0.5) + 4.0,
                    if levels { format!("{v}") } else { format!("{v:.2}") }
                );
            }
        }
    }
    for (j, l) in labels.iter().enumerate() {
        let lx = x0 + size * (j as f64 + 0.5);
        let ly = MARGIN + size * n as f64 + 12.0;
        let _ = writeln!(
            s,
            r#"<text x="{lx:.2}" y="{ly:.2}" text-anchor="end" transform="rotate(-45 {lx:.2} {ly:.2})">{}</text>"#,
            escape(l)
        );
    }
    Ok(close(s))
}

/// Distance bars with margin whiskers from `profile.csv`.
pub fn profile(csv_bytes: &[u8], reference: &str) -> Result<String> {
    let (header, rows) = parse(csv_bytes)?;
    let col = |name: &str| header.iter().position(|h| h == name).expect("profile column");
    let (party, issue, period, distance, margin) = (
        col("party"),
        col("issue"),
        col("period"),
        col("distance"),
        col("margin"),
    );
    let mut labels = Vec::new();
    let mut values = Vec::new();
    let mut errors = Vec::new();
    for r in rows.iter().filter(|r| !r[distance].is_empty()) {
        labels.push(format!("{} / {} / {}", r[party], r[issue], r[period]));
        values.push(number(&r[distance])?);
        errors.push(if r[margin].is_empty() { 0.0 } else { number(&r[margin])? });
    }
    Ok(bar_plot(
        &format!("Distance to {reference}"),
        &labels,
        &values,
        Some(&errors),
    ))
}
