//! Static SVG charts. Each chart is a pure function of CSV text, so a chart
//! can always be regenerated from the table it accompanies.

use std::fmt::Write;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PlotError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("row {row}: `{value}` in column `{column}` is not a number")]
    BadNumber { row: usize, column: String, value: String },
    #[error("no rows to plot")]
    Empty,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const LEFT: f64 = 64.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 36.0;
const BOTTOM: f64 = 56.0;
const COLORS: [&str; 4] = ["#1f6fb2", "#d9622b", "#3a9a4a", "#8a4fb0"];

struct Table {
    headers: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn parse(text: &str) -> Result<Self, PlotError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        let headers = rdr.headers()?.iter().map(str::to_string).collect();
        let rows =
            rdr.records().map(|r| r.map(|r| r.iter().map(str::to_string).collect())).collect::<Result<_, _>>()?;
        Ok(Table { headers, rows })
    }

    fn column(&self, name: &str) -> Result<usize, PlotError> {
        self.headers.iter().position(|h| h == name).ok_or_else(|| PlotError::MissingColumn(name.to_string()))
    }

    /// Values of a numeric column; empty cells are None.
    fn numbers(&self, col: usize) -> Result<Vec<Option<f64>>, PlotError> {
        self.rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let cell = r.get(col).map(String::as_str).unwrap_or("");
                if cell.is_empty() {
                    return Ok(None);
                }
                cell.parse::<f64>().ok().filter(|v| v.is_finite()).map(Some).ok_or_else(|| PlotError::BadNumber {
                    row: i + 1,
                    column: self.headers[col].clone(),
                    value: cell.to_string(),
                })
            })
            .collect()
    }

    fn labels(&self, col: usize) -> Vec<String> {
        self.rows.iter().map(|r| r.get(col).cloned().unwrap_or_default()).collect()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

#[derive(Clone, Copy)]
struct Scale {
    lo: f64,
    hi: f64,
    from: f64,
    to: f64,
}

impl Scale {
    /// Maps `[lo, hi]` onto `[from, to]`, padding a degenerate range.
    fn new(lo: f64, hi: f64, from: f64, to: f64) -> Self {
        let (lo, hi) = if hi - lo > 0.0 { (lo, hi) } else { (lo - 0.5, hi + 0.5) };
        Scale { lo, hi, from, to }
    }

    fn map(&self, v: f64) -> f64 {
        self.from + (v - self.lo) / (self.hi - self.lo) * (self.to - self.from)
    }

    fn ticks(&self, n: usize) -> Vec<f64> {
        (0..=n).map(|i| self.lo + (self.hi - self.lo) * i as f64 / n as f64).collect()
    }
}

fn bounds(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    values.fold(None, |acc, v| match acc {
        None => Some((v, v)),
        Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
    })
}

fn tick_label(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-3..1e5).contains(&a) {
        format!("{v:.2e}")
    } else if a >= 100.0 {
        format!("{v:.0}")
    } else {
        format!("{v:.3}").trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn open(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
}

fn y_axis(out: &mut String, y: &Scale, label: &str) {
    for t in y.ticks(4) {
        let py = y.map(t);
        let _ = writeln!(
            out,
            r##"<line x1="{LEFT}" x2="{:.2}" y1="{py:.2}" y2="{py:.2}" stroke="#e4e4e4"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
            WIDTH - RIGHT,
            LEFT - 6.0,
            py + 4.0,
            tick_label(t)
        );
    }
    let _ = writeln!(
        out,
        r#"<text transform="translate(14 {:.2}) rotate(-90)" text-anchor="middle">{}</text>"#,
        (TOP + HEIGHT - BOTTOM) / 2.0,
        escape(label)
    );
}

fn frame(out: &mut String, x_label: &str) {
    let _ = writeln!(
        out,
        r#"<rect x="{LEFT}" y="{TOP}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
        WIDTH - LEFT - RIGHT,
        HEIGHT - TOP - BOTTOM
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        (LEFT + WIDTH - RIGHT) / 2.0,
        HEIGHT - 12.0,
        escape(x_label)
    );
}

/// Scatter of `y_col` against `x_col`, one `<circle class="point">` per row
/// with both values present.
pub fn scatter_svg(csv_text: &str, x_col: &str, y_col: &str, title: &str) -> Result<String, PlotError> {
    let t = Table::parse(csv_text)?;
    let xs = t.numbers(t.column(x_col)?)?;
    let ys = t.numbers(t.column(y_col)?)?;
    let pts: Vec<(f64, f64)> = xs.into_iter().zip(ys).filter_map(|(x, y)| Some((x?, y?))).collect();
    let (xl, xh) = bounds(pts.iter().map(|p| p.0)).ok_or(PlotError::Empty)?;
    let (yl, yh) = bounds(pts.iter().map(|p| p.1)).ok_or(PlotError::Empty)?;
    let x = Scale::new(xl, xh, LEFT + 8.0, WIDTH - RIGHT - 8.0);
    let y = Scale::new(yl, yh, HEIGHT - BOTTOM - 8.0, TOP + 8.0);

    let mut out = String::new();
    open(&mut out, title);
    y_axis(&mut out, &y, y_col);
    for tk in x.ticks(4) {
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            x.map(tk),
            HEIGHT - BOTTOM + 16.0,
            tick_label(tk)
        );
    }
    frame(&mut out, x_col);
    for (px, py) in &pts {
        let _ = writeln!(
            out,
            r#"<circle class="point" cx="{:.2}" cy="{:.2}" r="3" fill="{}" fill-opacity="0.7"/>"#,
            x.map(*px),
            y.map(*py),
            COLORS[0]
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// One line per numeric column other than `x_col`, overlaid, with the
/// `x_col` values as category labels along the horizontal axis.
pub fn lines_svg(csv_text: &str, x_col: &str, title: &str) -> Result<String, PlotError> {
    let t = Table::parse(csv_text)?;
    let xc = t.column(x_col)?;
    if t.rows.is_empty() {
        return Err(PlotError::Empty);
    }
    let labels = t.labels(xc);
    let series: Vec<(String, Vec<Option<f64>>)> = (0..t.headers.len())
        .filter(|&c| c != xc)
        .map(|c| Ok((t.headers[c].clone(), t.numbers(c)?)))
        .collect::<Result<_, PlotError>>()?;
    let (yl, yh) = bounds(series.iter().flat_map(|s| s.1.iter().flatten().copied())).ok_or(PlotError::Empty)?;
    let n = labels.len();
    let x = Scale::new(0.0, n.saturating_sub(1) as f64, LEFT + 8.0, WIDTH - RIGHT - 8.0);
    let y = Scale::new(yl, yh, HEIGHT - BOTTOM - 8.0, TOP + 8.0);

    let mut out = String::new();
    open(&mut out, title);
    y_axis(&mut out, &y, "value");
    let every = n.div_ceil(12).max(1);
    for (i, l) in labels.iter().enumerate().step_by(every) {
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            x.map(i as f64),
            HEIGHT - BOTTOM + 16.0,
            escape(l)
        );
    }
    frame(&mut out, x_col);
    for (k, (name, vals)) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let pts: Vec<String> = vals
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.map(|v| format!("{:.2},{:.2}", x.map(i as f64), y.map(v))))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline class="series" data-name="{}" points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            escape(name),
            pts.join(" ")
        );
        let ly = TOP + 14.0 + 14.0 * k as f64;
        let _ = writeln!(
            out,
            r#"<line x1="{:.2}" x2="{:.2}" y1="{ly:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            LEFT + 12.0,
            LEFT + 30.0,
            LEFT + 34.0,
            ly + 4.0,
            escape(name)
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Bar per row of `value_col` labelled by `label_col`; rows with an empty
/// value leave a gap. The value axis starts at zero.
pub fn bars_svg(csv_text: &str, label_col: &str, value_col: &str, title: &str) -> Result<String, PlotError> {
    let t = Table::parse(csv_text)?;
    let labels = t.labels(t.column(label_col)?);
    let vals = t.numbers(t.column(value_col)?)?;
    if vals.is_empty() {
        return Err(PlotError::Empty);
    }
    let (lo, hi) = bounds(vals.iter().flatten().copied()).unwrap_or((0.0, 1.0));
    let y = Scale::new(lo.min(0.0), hi.max(0.0), HEIGHT - BOTTOM, TOP + 8.0);
    let slot = (WIDTH - LEFT - RIGHT) / vals.len() as f64;

    let mut out = String::new();
    open(&mut out, title);
    y_axis(&mut out, &y, value_col);
    frame(&mut out, label_col);
    let zero = y.map(0.0);
    for (i, (l, v)) in labels.iter().zip(&vals).enumerate() {
        let cx = LEFT + slot * (i as f64 + 0.5);
        if let Some(v) = v {
            let top = y.map(*v).min(zero);
            let _ = writeln!(
                out,
                r#"<rect class="bar" x="{:.2}" y="{top:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
                cx - slot * 0.35,
                slot * 0.7,
                (y.map(*v) - zero).abs(),
                COLORS[0]
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{cx:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            HEIGHT - BOTTOM + 16.0,
            escape(l)
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}
