//! Sweeps over `r`, the scan CSV format, and raster/vector plots of a scan.
//!
//! CSV columns: `r`, `ell`, `endpoints` (space-separated normalized values
//! `lo_1 hi_1 lo_2 hi_2 ...`), `densities` (space-separated `num/den`), and
//! `error` (empty on success). Endpoints are normalized to
//! `x = (v - 1)/(zeta(r) - 1)`.

use std::io::{Read, Write};
use std::path::Path;

use rayon::prelude::*;
use rug::Rational;

use crate::closure::{closure, ClosureResult};
use crate::error::{Error, Result};
use crate::realnum::{format_decimal, Exponent, PrecisionPolicy};

#[derive(Clone, Debug, PartialEq)]
pub struct ScanRow {
    pub r: String,
    pub ell: Option<usize>,
    pub endpoints: Vec<f64>,
    pub densities: Vec<String>,
    pub error: Option<String>,
}

impl ScanRow {
    pub fn from_result(res: &ClosureResult) -> Result<Self> {
        let ev = &res.evaluator;
        let prec = ev.policy().base;
        let zeta = ev.zeta(prec)?.mid_f64();
        let last = res.final_level();
        let mut endpoints = Vec::with_capacity(2 * last.len());
        for iv in &last.intervals {
            for e in [iv.lo(), iv.hi()] {
                let v = ev.eval(&e.expr, prec)?.mid_f64();
                endpoints.push(((v - 1.0) / (zeta - 1.0)).clamp(0.0, 1.0));
            }
        }
        Ok(Self {
            r: res.r.text().to_owned(),
            ell: Some(last.len()),
            endpoints,
            densities: last.densities.iter().map(ToString::to_string).collect(),
            error: None,
        })
    }

    pub fn r_value(&self) -> f64 {
        self.r
            .parse::<Exponent>()
            .map(|r| r.to_f64())
            .unwrap_or(f64::NAN)
    }

    /// Normalized `(lo, hi)` pairs.
    pub fn spans(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.endpoints.chunks_exact(2).map(|c| (c[0], c[1]))
    }
}

/// `r_min, r_min + step, ...` up to and including `r_max`, in exact arithmetic.
pub fn scan_points(r_min: &Rational, r_max: &Rational, step: &Rational) -> Result<Vec<Rational>> {
    if *r_min <= 1 || r_min >= r_max {
        return Err(Error::Domain(format!(
            "need 1 < r-min < r-max, got {} and {}",
            format_decimal(r_min),
            format_decimal(r_max)
        )));
    }
    if *step <= 0 {
        return Err(Error::Domain("step must be positive".into()));
    }
    let mut out = Vec::new();
    let mut k = 0u32;
    loop {
        let r = r_min + Rational::from(step * k);
        if r > *r_max {
            break;
        }
        out.push(r);
        k += 1;
    }
    Ok(out)
}

/// One row per point, computed in parallel and returned in input order.
/// Failures are recorded in the row rather than aborting the scan.
pub fn scan(points: &[Rational], policy: PrecisionPolicy) -> Vec<ScanRow> {
    points
        .par_iter()
        .map(|r| {
            let r = Exponent::from_rational(r.clone());
            match closure(&r, policy).and_then(|res| ScanRow::from_result(&res)) {
                Ok(row) => row,
                Err(e) => ScanRow {
                    r: r.text().to_owned(),
                    ell: None,
                    endpoints: Vec::new(),
                    densities: Vec::new(),
                    error: Some(e.to_string()),
                },
            }
        })
        .collect()
}

fn join<T: ToString>(items: impl IntoIterator<Item = T>) -> String {
    items
        .into_iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn write_csv<W: Write>(rows: &[ScanRow], out: W) -> std::io::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .quote_style(csv::QuoteStyle::NonNumeric)
        .from_writer(out);
    w.write_record(["r", "ell", "endpoints", "densities", "error"])?;
    for row in rows {
        w.write_record([
            row.r.clone(),
            row.ell.map(|l| l.to_string()).unwrap_or_default(),
            join(row.endpoints.iter().map(|x| format!("{x:.15}"))),
            join(&row.densities),
            row.error.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<ScanRow>> {
    let bad = |e: &dyn std::fmt::Display| Error::Parse(format!("bad scan file: {e}"));
    let mut rdr = csv::Reader::from_reader(input);
    let mut rows = Vec::new();
    for record in rdr.records() {
        let rec = record.map_err(|e| bad(&e))?;
        if rec.len() != 5 {
            return Err(bad(&format!("expected 5 columns, got {}", rec.len())));
        }
        let ell = match &rec[1] {
            "" => None,
            s => Some(s.parse().map_err(|e| bad(&e))?),
        };
        let endpoints = rec[2]
            .split_whitespace()
            .map(|x| x.parse::<f64>().map_err(|e| bad(&e)))
            .collect::<Result<Vec<_>>>()?;
        if endpoints.len() % 2 != 0 {
            return Err(bad(&"odd number of endpoints"));
        }
        rows.push(ScanRow {
            r: rec[0].to_owned(),
            ell,
            endpoints,
            densities: rec[3].split_whitespace().map(str::to_owned).collect(),
            error: (!rec[4].is_empty()).then(|| rec[4].to_owned()),
        });
    }
    Ok(rows)
}

const BLACK: u8 = 0;
const WHITE: u8 = 255;
const GRAY: u8 = 128;

/// Scan row shown in image row `y` (top to bottom); the first scan row is at the bottom.
fn row_for(y: usize, height: usize, n: usize) -> usize {
    let from_bottom = height - 1 - y;
    if height == 1 {
        0
    } else {
        (from_bottom * (n - 1) + (height - 1) / 2) / (height - 1)
    }
}

/// One raster line: column `c` is black iff `(c + 0.5)/width` lies in a span.
pub fn raster_line(row: &ScanRow, width: usize) -> Vec<u8> {
    if row.error.is_some() {
        return vec![GRAY; width];
    }
    (0..width)
        .map(|c| {
            let x = (c as f64 + 0.5) / width as f64;
            if row.spans().any(|(lo, hi)| lo <= x && x <= hi) {
                BLACK
            } else {
                WHITE
            }
        })
        .collect()
}

/// Binary PGM (P5).
pub fn render_pgm(rows: &[ScanRow], width: usize, height: usize) -> Result<Vec<u8>> {
    check_plot(rows, width, height)?;
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    for y in 0..height {
        out.extend(raster_line(&rows[row_for(y, height, rows.len())], width));
    }
    Ok(out)
}

pub fn render_svg(rows: &[ScanRow], width: usize, height: usize) -> Result<String> {
    check_plot(rows, width, height)?;
    let n = rows.len();
    let band = height as f64 / n as f64;
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">\n\
         <rect width=\"{width}\" height=\"{height}\" fill=\"white\"/>\n"
    );
    for (i, row) in rows.iter().enumerate() {
        let y = height as f64 - (i + 1) as f64 * band;
        if row.error.is_some() {
            out += &format!(
                "<rect x=\"0\" y=\"{y:.4}\" width=\"{width}\" height=\"{band:.4}\" fill=\"gray\"><title>r = {}</title></rect>\n",
                row.r
            );
            continue;
        }
        for (lo, hi) in row.spans() {
            out += &format!(
                "<rect x=\"{:.4}\" y=\"{y:.4}\" width=\"{:.4}\" height=\"{band:.4}\" fill=\"black\"/>\n",
                lo * width as f64,
                (hi - lo) * width as f64
            );
        }
    }
    out += "</svg>\n";
    Ok(out)
}

fn check_plot(rows: &[ScanRow], width: usize, height: usize) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::Parse("scan has no rows".into()));
    }
    if width == 0 || height == 0 {
        return Err(Error::Domain("image dimensions must be positive".into()));
    }
    Ok(())
}

/// PGM or SVG bytes, chosen by the extension of `path`.
pub fn render_plot(rows: &[ScanRow], width: usize, height: usize, path: &Path) -> Result<Vec<u8>> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("pgm") => render_pgm(rows, width, height),
        Some("svg") => Ok(render_svg(rows, width, height)?.into_bytes()),
        _ => Err(Error::Domain(format!(
            "unknown image format for {}",
            path.display()
        ))),
    }
}
