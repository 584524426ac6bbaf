//! File formats: CSV for clouds, selector curves and sampled functions,
//! SVG polyline rendering of wave fronts.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use jetops_core::front::{CuspKind, CuspPoint, WaveFront};
use jetops_core::grid::TailModel;
use jetops_core::selector::SelectorCurve;
use jetops_core::{GridFunction, LegendrianCloud};

/// Write a cloud as CSV with columns `u, q0.., p0.., branch`.
pub fn cloud_to_csv(cloud: &LegendrianCloud, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)
        .with_context(|| format!("creating {}", path.display()))?;
    let n = cloud.base_dim;
    let mut header = vec!["u".to_string()];
    header.extend((0..n).map(|i| format!("q{i}")));
    header.extend((0..n).map(|i| format!("p{i}")));
    header.push("branch".into());
    w.write_record(&header)?;
    for (pt, &b) in cloud.points.iter().zip(&cloud.branch_id) {
        let mut rec = vec![format!("{:.12e}", pt.u)];
        rec.extend(pt.q.iter().map(|v| format!("{v:.12e}")));
        rec.extend(pt.p.iter().map(|v| format!("{v:.12e}")));
        rec.push(b.to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Write a selector curve as CSV with columns `q, s, iota, n_critical`.
pub fn selector_to_csv(curve: &SelectorCurve, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)
        .with_context(|| format!("creating {}", path.display()))?;
    w.write_record(["q", "s", "iota", "n_critical"])?;
    for i in 0..curve.q_grid.len() {
        w.write_record(&[
            format!("{:.12e}", curve.q_grid[i]),
            format!("{:.12e}", curve.s_values[i]),
            curve.iota.to_string(),
            curve.critical_values[i].values.len().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Tail model sidecar for sampled functions.
#[derive(Debug, Serialize, Deserialize)]
pub struct TailSidecar {
    pub kind: String,
    pub coefficients: Vec<f64>,
    pub index: usize,
}

/// Read a sampled function from CSV (`x,value` columns) plus a JSON sidecar
/// declaring its tail model.
pub fn grid_from_csv(path: &Path, sidecar: &Path) -> Result<GridFunction> {
    let mut rd = csv::Reader::from_path(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let mut xs = Vec::new();
    let mut vals = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        xs.push(rec.get(0).context("missing x column")?.parse::<f64>()?);
        vals.push(rec.get(1).context("missing value column")?.parse::<f64>()?);
    }
    if xs.len() < 2 {
        bail!("sampled function needs at least two rows");
    }
    let step = xs[1] - xs[0];
    for w in xs.windows(2) {
        if ((w[1] - w[0]) - step).abs() > 1e-9 * (1.0 + step.abs()) {
            bail!("x column is not uniformly spaced");
        }
    }
    let tail: TailSidecar = serde_json::from_str(
        &std::fs::read_to_string(sidecar)
            .with_context(|| format!("reading {}", sidecar.display()))?,
    )?;
    if tail.kind != "poly" {
        bail!("unsupported tail kind {:?}", tail.kind);
    }
    Ok(GridFunction::new(xs[0], step, vals, TailModel::poly(tail.coefficients, tail.index))?)
}

/// Write a sampled function as CSV (`x,value`; masked entries written as
/// `inf`).
pub fn grid_to_csv(g: &GridFunction, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)
        .with_context(|| format!("creating {}", path.display()))?;
    w.write_record(["x", "value"])?;
    for i in 0..g.len() {
        let v = if g.is_finite_at(i) { format!("{:.12e}", g.values()[i]) } else { "inf".into() };
        w.write_record(&[format!("{:.12e}", g.x(i)), v])?;
    }
    w.flush()?;
    Ok(())
}

const PALETTE: &[&str] = &["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

struct SvgCanvas {
    body: String,
    xmin: f64,
    xmax: f64,
    ymin: f64,
    ymax: f64,
    width: f64,
    height: f64,
}

impl SvgCanvas {
    fn new(xmin: f64, xmax: f64, ymin: f64, ymax: f64) -> Self {
        SvgCanvas { body: String::new(), xmin, xmax, ymin, ymax, width: 640.0, height: 480.0 }
    }

    fn tx(&self, x: f64) -> f64 {
        20.0 + (x - self.xmin) / (self.xmax - self.xmin).max(1e-12) * (self.width - 40.0)
    }

    // SVG y grows downward
    fn ty(&self, y: f64) -> f64 {
        self.height - 20.0 - (y - self.ymin) / (self.ymax - self.ymin).max(1e-12) * (self.height - 40.0)
    }

    fn polyline(&mut self, pts: &[(f64, f64)], color: &str) {
        if pts.len() < 2 {
            return;
        }
        let coords: Vec<String> = pts
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", self.tx(x), self.ty(y)))
            .collect();
        let _ = writeln!(
            self.body,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            coords.join(" ")
        );
    }

    fn marker(&mut self, x: f64, y: f64, color: &str) {
        let _ = writeln!(
            self.body,
            r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            self.tx(x),
            self.ty(y)
        );
    }

    fn finish(self, title: &str) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n<title>{title}</title>\n<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n{body}</svg>\n",
            w = self.width,
            h = self.height,
            body = self.body
        )
    }
}

fn branch_polylines(front: &WaveFront) -> Vec<Vec<(f64, f64)>> {
    let mut branches: Vec<usize> = front.branch_id.clone();
    branches.sort_unstable();
    branches.dedup();
    branches
        .into_iter()
        .map(|b| {
            let mut pts: Vec<(f64, f64, f64)> = front
                .points
                .iter()
                .zip(&front.branch_id)
                .zip(&front.param)
                .filter(|((_, &bb), _)| bb == b)
                .map(|(((u, q), _), &t)| (t, q[0], *u))
                .collect();
            pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            pts.into_iter().map(|(_, q, u)| (q, u)).collect()
        })
        .collect()
}

/// Render a 1-D wave front as SVG polylines (one per branch) with circle
/// markers at cusps and corners.
pub fn front_to_svg(front: &WaveFront, cusps: &[CuspPoint], title: &str) -> Result<String> {
    if front.points.is_empty() {
        bail!("cannot render an empty front");
    }
    if front.points[0].1.len() != 1 {
        bail!("front_to_svg renders 1-D fronts; use front2_to_svg for 2-D bases");
    }
    let (mut xmin, mut xmax) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut ymin, mut ymax) = (f64::INFINITY, f64::NEG_INFINITY);
    for (u, q) in &front.points {
        xmin = xmin.min(q[0]);
        xmax = xmax.max(q[0]);
        ymin = ymin.min(*u);
        ymax = ymax.max(*u);
    }
    let mut canvas = SvgCanvas::new(xmin, xmax, ymin, ymax);
    for (bi, line) in branch_polylines(front).iter().enumerate() {
        canvas.polyline(line, PALETTE[bi % PALETTE.len()]);
    }
    for c in cusps {
        let color = match c.kind {
            CuspKind::Cusp => "#000000",
            CuspKind::Vertex => "#888888",
        };
        canvas.marker(c.q, c.u, color);
    }
    Ok(canvas.finish(title))
}

/// Render a 2-D front as three orthographic projections side by side:
/// `(q₁, u)`, `(q₂, u)` and `(q₁, q₂)`.
pub fn front2_to_svg(cloud: &LegendrianCloud, title: &str) -> Result<String> {
    if cloud.base_dim != 2 {
        bail!("front2_to_svg needs a 2-D base");
    }
    if cloud.is_empty() {
        bail!("cannot render an empty front");
    }
    let mut panels = String::new();
    for (panel, (fx, fy)) in [("q1", "u"), ("q2", "u"), ("q1", "q2")].iter().enumerate() {
        let get = |pt: &jetops_core::Point1Jet, axis: &str| -> f64 {
            match axis {
                "q1" => pt.q[0],
                "q2" => pt.q[1],
                _ => pt.u,
            }
        };
        let (mut xmin, mut xmax) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut ymin, mut ymax) = (f64::INFINITY, f64::NEG_INFINITY);
        for pt in &cloud.points {
            xmin = xmin.min(get(pt, fx));
            xmax = xmax.max(get(pt, fx));
            ymin = ymin.min(get(pt, fy));
            ymax = ymax.max(get(pt, fy));
        }
        let mut canvas = SvgCanvas::new(xmin, xmax, ymin, ymax);
        canvas.width = 320.0;
        canvas.height = 320.0;
        for (pt, &b) in cloud.points.iter().zip(&cloud.branch_id) {
            let x = canvas.tx(get(pt, fx));
            let y = canvas.ty(get(pt, fy));
            let _ = writeln!(
                canvas.body,
                r#"<circle cx="{x:.2}" cy="{y:.2}" r="1" fill="{}"/>"#,
                PALETTE[b % PALETTE.len()]
            );
        }
        let _ = writeln!(
            panels,
            r#"<g transform="translate({},0)">{}</g>"#,
            panel as f64 * 330.0,
            canvas.body
        );
    }
    Ok(format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"990\" height=\"320\" viewBox=\"0 0 990 320\">\n<title>{title}</title>\n<rect width=\"990\" height=\"320\" fill=\"white\"/>\n{panels}</svg>\n"
    ))
}
