use std::fmt::Write as _;
use std::fs::OpenOptions;
use std::io::Write;
use std::path::Path;

use ctmc_sens::estimators::{EstimateReport, VarianceTrace};
use serde::Serialize;

use crate::CliError;

/// Header of every estimate/bench CSV file.
pub const CSV_HEADER: &str = "method,param,theta,epsilon,mode,T,R,seed,estimate,var_d,ci95,n_updates,elapsed_s";

/// One machine-readable estimate row; field order matches [`CSV_HEADER`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CsvRow {
    pub method: String,
    pub param: String,
    pub theta: f64,
    pub epsilon: f64,
    pub mode: String,
    #[serde(rename = "T")]
    pub horizon: f64,
    #[serde(rename = "R")]
    pub paths: usize,
    pub seed: u64,
    pub estimate: f64,
    pub var_d: f64,
    pub ci95: f64,
    pub n_updates: u64,
    pub elapsed_s: f64,
}

impl From<&EstimateReport> for CsvRow {
    fn from(r: &EstimateReport) -> Self {
        CsvRow {
            method: r.method.clone(),
            param: r.param.clone(),
            theta: r.theta,
            epsilon: r.epsilon,
            mode: r.mode.clone(),
            horizon: r.horizon,
            paths: r.paths,
            seed: r.seed,
            estimate: r.estimate,
            var_d: r.sample_variance,
            ci95: r.ci95,
            n_updates: r.n_updates,
            elapsed_s: r.elapsed_s,
        }
    }
}

/// Serializes rows (header first when `header`) to a string.
pub(crate) fn csv_string(rows: &[CsvRow], header: bool) -> Result<String, CliError> {
    let mut w = csv::WriterBuilder::new().has_headers(header).from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    if rows.is_empty() && header {
        return Ok(format!("{CSV_HEADER}\n"));
    }
    let bytes = w.into_inner().map_err(|e| CliError::Runtime(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

/// Appends rows to `path`, writing the header first if the file is new or
/// empty.
pub(crate) fn append_csv(path: &Path, rows: &[CsvRow]) -> Result<(), CliError> {
    let fresh = std::fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
    let mut file = OpenOptions::new().create(true).append(true).open(path)?;
    file.write_all(csv_string(rows, fresh)?.as_bytes())?;
    Ok(())
}

/// Long-format trace CSV: `t,method,mean_d,var_d,var_estimator`.
pub(crate) fn trace_csv(traces: &[VarianceTrace]) -> String {
    let mut s = String::from("t,method,mean_d,var_d,var_estimator\n");
    for tr in traces {
        for i in 0..tr.grid.len() {
            let _ = writeln!(
                s,
                "{},{},{},{},{}",
                tr.grid[i], tr.method, tr.mean_d[i], tr.var_d[i], tr.var_estimator[i]
            );
        }
    }
    s
}

/// Parses `start:stop:step` (inclusive of `stop` up to rounding) or a
/// comma-separated list of times.
pub fn parse_grid(text: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Config(format!("invalid --grid `{text}`: expected start:stop:step or t1,t2,..."));
    let text = text.trim();
    if text.is_empty() {
        return Err(CliError::Config("--grid is empty".into()));
    }
    if text.contains(':') {
        let parts: Vec<f64> = text
            .split(':')
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| bad())?;
        let [start, stop, step] = parts[..] else {
            return Err(bad());
        };
        if !(step > 0.0) || !(stop >= start) || !start.is_finite() || !stop.is_finite() {
            return Err(bad());
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize;
        Ok((0..=n).map(|i| start + i as f64 * step).collect())
    } else {
        text.split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
            .collect()
    }
}

const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Line chart of estimator variance against time: one `<polyline>` per
/// trace, with axes, tick labels and a legend.
pub fn render_svg(traces: &[VarianceTrace], title: &str) -> String {
    let (w, h) = (720.0, 440.0);
    let (left, right, top, bottom) = (80.0, 150.0, 40.0, 50.0);
    let (pw, ph) = (w - left - right, h - top - bottom);

    let finite = |v: &f64| v.is_finite();
    let t_min = traces.iter().flat_map(|t| t.grid.iter()).cloned().fold(f64::INFINITY, f64::min);
    let t_max = traces.iter().flat_map(|t| t.grid.iter()).cloned().fold(f64::NEG_INFINITY, f64::max);
    let v_max = traces
        .iter()
        .flat_map(|t| t.var_estimator.iter().filter(|v| finite(v)))
        .cloned()
        .fold(0.0, f64::max);
    let (t_min, t_max) = if t_min.is_finite() && t_max > t_min { (t_min, t_max) } else { (0.0, 1.0) };
    let v_max = if v_max > 0.0 { v_max * 1.05 } else { 1.0 };
    let sx = |t: f64| left + (t - t_min) / (t_max - t_min) * pw;
    let sy = |v: f64| top + ph - v / v_max * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#, left + pw / 2.0, escape(title));
    // axes
    let _ = writeln!(
        s,
        r#"<g stroke="black" stroke-width="1"><line x1="{left}" y1="{}" x2="{}" y2="{}"/><line x1="{left}" y1="{top}" x2="{left}" y2="{}"/></g>"#,
        top + ph,
        left + pw,
        top + ph,
        top + ph
    );
    for i in 0..=5 {
        let f = i as f64 / 5.0;
        let t = t_min + f * (t_max - t_min);
        let v = f * v_max;
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            sx(t),
            top + ph + 18.0,
            fmt_tick(t)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
            left - 6.0,
            sy(v) + 4.0,
            fmt_tick(v)
        );
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">t</text>"#, left + pw / 2.0, h - 10.0);
    let _ = writeln!(
        s,
        r#"<text x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">variance of estimator</text>"#,
        top + ph / 2.0,
        top + ph / 2.0
    );
    for (i, tr) in traces.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let points: Vec<String> = tr
            .grid
            .iter()
            .zip(&tr.var_estimator)
            .filter(|(_, v)| v.is_finite())
            .map(|(t, v)| format!("{:.2},{:.2}", sx(*t), sy(*v)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"><title>{}</title></polyline>"#,
            points.join(" "),
            escape(&tr.method)
        );
        let ly = top + 10.0 + 18.0 * i as f64;
        let lx = left + pw + 16.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
            lx + 24.0,
            lx + 30.0,
            ly + 4.0,
            escape(&tr.method)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e4 || v.abs() < 1e-2 {
        format!("{v:.2e}")
    } else {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_forms() {
        assert_eq!(parse_grid("0:2:0.5").unwrap(), vec![0.0, 0.5, 1.0, 1.5, 2.0]);
        assert_eq!(parse_grid("1, 5,10").unwrap(), vec![1.0, 5.0, 10.0]);
        assert_eq!(parse_grid("0:100:1").unwrap().len(), 101);
        assert!(parse_grid("").is_err());
        assert!(parse_grid("1:2").is_err());
        assert!(parse_grid("0:1:0").is_err());
        assert!(parse_grid("a,b").is_err());
    }

    #[test]
    fn csv_header_is_stable() {
        let s = csv_string(&[], true).unwrap();
        assert_eq!(s.lines().next().unwrap(), CSV_HEADER);
        let row = CsvRow {
            method: "cfd".into(),
            param: "theta".into(),
            theta: 0.25,
            epsilon: 0.05,
            mode: "centered".into(),
            horizon: 30.0,
            paths: 10,
            seed: 1,
            estimate: -1.0,
            var_d: 2.0,
            ci95: 0.5,
            n_updates: 7,
            elapsed_s: 0.1,
        };
        let s = csv_string(&[row], true).unwrap();
        assert_eq!(s.lines().next().unwrap(), CSV_HEADER);
        assert_eq!(s.lines().count(), 2);
    }
}
