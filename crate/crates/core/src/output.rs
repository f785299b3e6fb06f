//! CSV and SVG writers.
//!
//! Numbers are written with Rust's shortest round-trip formatting, so the
//! same inputs always produce byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use crate::analytic::PmfResult;
use crate::campaign::{CompareRow, SweepRow};
use crate::codebook::Codebook;
use crate::error::{Error, Result};
use crate::stats::{RunStats, Summary};

pub const USER_HEADER: [&str; 12] = [
    "user_id",
    "nominal_x",
    "nominal_y",
    "real_x",
    "real_y",
    "success",
    "bs_switches",
    "mt_switches",
    "via_db",
    "width_deg",
    "dir_index",
    "path_kind",
];

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    }
}

fn to_file<F>(path: &Path, write: F) -> Result<()>
where
    F: FnOnce(&mut csv::Writer<fs::File>) -> csv::Result<()>,
{
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    write(&mut w).map_err(csv_err(path))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_users<W: io::Write>(w: &mut csv::Writer<W>, stats: &RunStats, codebook: &Codebook) -> csv::Result<()> {
    w.write_record(USER_HEADER)?;
    for r in &stats.records {
        let res = &r.result;
        let (width, dir) = match res.config {
            Some(c) => (codebook.width_deg(c.level).to_string(), c.dir.to_string()),
            None => (String::new(), String::new()),
        };
        w.write_record([
            r.user_id.to_string(),
            r.nominal.x.to_string(),
            r.nominal.y.to_string(),
            r.true_pos.x.to_string(),
            r.true_pos.y.to_string(),
            res.success.to_string(),
            res.bs_switches.to_string(),
            res.mt_switches.to_string(),
            res.via_db.to_string(),
            width,
            dir,
            res.path_kind.map_or("", |k| k.as_str()).to_string(),
        ])?;
    }
    Ok(())
}

/// Per-user results as CSV text.
pub fn users_csv(stats: &RunStats, codebook: &Codebook) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    write_users(&mut w, stats, codebook).expect("in-memory write");
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
}

pub fn write_user_csv(path: &Path, stats: &RunStats, codebook: &Codebook) -> Result<()> {
    to_file(path, |w| write_users(w, stats, codebook))
}

pub fn write_summary_csv(path: &Path, summaries: &[Summary]) -> Result<()> {
    to_file(path, |w| {
        w.write_record(Summary::HEADER)?;
        summaries.iter().try_for_each(|s| w.write_record(s.fields()))
    })
}

/// Long-form sweep table: one row per axis value.
pub fn write_sweep_csv(path: &Path, rows: &[SweepRow]) -> Result<()> {
    to_file(path, |w| write_sweep(w, rows))
}

pub fn write_sweep<W: io::Write>(w: &mut csv::Writer<W>, rows: &[SweepRow]) -> csv::Result<()> {
    let mut header = vec!["axis", "value"];
    header.extend(Summary::HEADER);
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![r.axis.to_string(), r.value.to_string()];
        rec.extend(r.summary.fields());
        w.write_record(&rec)?;
    }
    Ok(())
}

pub fn write_compare<W: io::Write>(w: &mut csv::Writer<W>, rows: &[CompareRow]) -> csv::Result<()> {
    w.write_record(CompareRow::HEADER)?;
    rows.iter().try_for_each(|r| w.write_record(r.fields()))
}

/// One row per BS step (`step, p_bs, p_mt, cumulative`; `p_mt` is the
/// probability of each of the step's MT switches), then a summary row
/// carrying the means and the unreachable mass.
pub fn write_analytic<W: io::Write>(w: &mut csv::Writer<W>, pmf: &PmfResult) -> csv::Result<()> {
    w.write_record(["step", "p_bs", "p_mt", "cumulative"])?;
    let mut cum = 0.0;
    for (n, p) in pmf.p_bs.iter().enumerate() {
        cum += p;
        w.write_record([
            n.to_string(),
            p.to_string(),
            pmf.p_mt[n * pmf.mt_beams].to_string(),
            cum.to_string(),
        ])?;
    }
    w.write_record([
        "summary".to_string(),
        format!("mean_bs={}", pmf.mean_bs),
        format!("mean_mt={}", pmf.mean_mt),
        format!("unreachable={}", pmf.p_unreachable),
    ])
}

pub fn write_analytic_csv(path: &Path, pmf: &PmfResult) -> Result<()> {
    to_file(path, |w| write_analytic(w, pmf))
}

/// Stdout-friendly CSV rendering.
pub fn render<F>(write: F) -> String
where
    F: FnOnce(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    write(&mut w).expect("in-memory write");
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
}

const SVG_W: f64 = 640.0;
const SVG_H: f64 = 400.0;
const MARGIN: f64 = 50.0;

/// Step plot of the MT-switch CDF; `None` for an empty population.
/// The x axis ends at the largest observed switch count.
pub fn cdf_svg(stats: &RunStats) -> Option<String> {
    let cdf = stats.mt_cdf();
    let x_max = cdf.last()?.0.max(1) as f64;
    let (pw, ph) = (SVG_W - 2.0 * MARGIN, SVG_H - 2.0 * MARGIN);
    let sx = |x: f64| MARGIN + x / x_max * pw;
    let sy = |y: f64| SVG_H - MARGIN - y * ph;

    let mut pts = format!("{:.2},{:.2}", sx(0.0), sy(0.0));
    let mut prev = 0.0;
    for &(x, f) in &cdf {
        let _ = write!(pts, " {:.2},{:.2} {:.2},{:.2}", sx(x as f64), sy(prev), sx(x as f64), sy(f));
        prev = f;
    }

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_W}" height="{SVG_H}" viewBox="0 0 {SVG_W} {SVG_H}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<path d="M{l},{t} V{b} H{r}" stroke="black" fill="none"/>"#,
        l = MARGIN,
        t = MARGIN,
        b = SVG_H - MARGIN,
        r = SVG_W - MARGIN
    );
    for (v, label) in [(0.0, "0"), (0.5, "0.5"), (1.0, "1")] {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="end">{label}</text>"#,
            MARGIN - 6.0,
            sy(v) + 4.0
        );
    }
    for x in [0.0, x_max] {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="middle">{x}</text>"#,
            sx(x),
            SVG_H - MARGIN + 18.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-size="13" text-anchor="middle">MT switches ({})</text>"#,
        SVG_W / 2.0,
        SVG_H - 10.0,
        stats.algorithm
    );
    let _ = writeln!(s, r#"<polyline points="{pts}" stroke="steelblue" stroke-width="1.5" fill="none"/>"#);
    s.push_str("</svg>\n");
    Some(s)
}

/// Writes the CDF plot; returns `false` (and writes nothing) when there is
/// nothing to plot.
pub fn write_cdf_svg(path: &Path, stats: &RunStats) -> Result<bool> {
    match cdf_svg(stats) {
        Some(svg) => {
            fs::write(path, svg).map_err(|e| Error::io(path, e))?;
            Ok(true)
        }
        None => Ok(false),
    }
}
