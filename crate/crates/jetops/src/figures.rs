//! Deterministic figure generation: each figure id writes one or more SVG
//! (and JSON/CSV feature) files into an output directory.

use std::path::Path;

use anyhow::{anyhow, Result};
use serde_json::json;

use jetops_core::convex;
use jetops_core::expr::Rect;
use jetops_core::front::{
    detect_cusps, geometric_sum, geometric_t, linspace, q_grid_1d, q_grid_2d, sample_legendrian,
    wave_front, CuspKind,
};
use jetops_core::grid::TailModel;
use jetops_core::ops;
use jetops_core::selector::{self, Field};
use jetops_core::{GfExpr, GridFunction};

use crate::io;

pub const FIGURE_IDS: &[&str] = &["fig1", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9"];
pub const EXPERIMENTAL_IDS: &[&str] = &["fig2", "fig3"];

fn quartic() -> GfExpr {
    GfExpr::poly1d(vec![0.0, 0.0, -3.0, 0.0, 1.0])
}

fn write(out: &Path, name: &str, text: &str) -> Result<()> {
    std::fs::create_dir_all(out)?;
    std::fs::write(out.join(name), text)?;
    Ok(())
}

/// Transformed double-well front with its two cusps, plus a JSON feature
/// file recording cusp locations and branch count.
fn fig1(out: &Path) -> Result<()> {
    let e = ops::transform_t(&quartic());
    let cloud =
        sample_legendrian(&e, &q_grid_1d(&linspace(-3.2, 3.2, 641)), &Rect::centered(1, 2.2), 0.02)?;
    let front = wave_front(&cloud);
    let cusps = detect_cusps(&front);
    write(out, "fig1.svg", &io::front_to_svg(&front, &cusps, "transformed double well")?)?;
    let mut branches: Vec<usize> = front.branch_id.clone();
    branches.sort_unstable();
    branches.dedup();
    let features = json!({
        "branches": branches.len(),
        "cusps": cusps
            .iter()
            .filter(|c| c.kind == CuspKind::Cusp)
            .map(|c| json!({"u": c.u, "q": c.q}))
            .collect::<Vec<_>>(),
    });
    write(out, "fig1.json", &serde_json::to_string_pretty(&features)?)?;
    Ok(())
}

/// Experimental 2-D front mesh: three projections of the transform of a
/// two-variable graph with a saddle.
fn fig2(out: &Path) -> Result<()> {
    let f = ops::sum_gf(
        &ops::product_gf(&GfExpr::poly1d(vec![0.0, 0.0, -1.0, 0.0, 0.25]), &GfExpr::poly1d(vec![0.0, 0.0, 1.0])),
        &GfExpr::base_pairing(1),
    )?;
    let axis = linspace(-2.0, 2.0, 61);
    let cloud = sample_legendrian(&f, &q_grid_2d(&axis, &axis), &Rect::centered(1, 1.0), 0.1)?;
    let t = geometric_t(&cloud);
    write(out, "fig2.svg", &io::front2_to_svg(&t, "transformed saddle graph")?)
}

/// Experimental 2-D convolution mesh.
fn fig3(out: &Path) -> Result<()> {
    let f = ops::product_gf(&ops::transform_t(&quartic()), &ops::transform_t(&GfExpr::poly1d(vec![0.0, 0.0, 1.0])));
    let axis = linspace(-2.0, 2.0, 41);
    let cloud = sample_legendrian(&f, &q_grid_2d(&axis, &axis), &Rect::centered(2, 2.2), 0.05)?;
    write(out, "fig3.svg", &io::front2_to_svg(&cloud, "product of transformed fronts")?)
}

/// Three regimes of the sum of a cusped front with parabolas of growing
/// curvature: the cusps persist, merge and disappear.
fn fig4(out: &Path) -> Result<()> {
    let e = ops::transform_t(&quartic());
    let qs = linspace(-3.2, 3.2, 641);
    let base = sample_legendrian(&e, &q_grid_1d(&qs), &Rect::centered(1, 2.2), 0.02)?;
    for (i, c) in [0.05, 0.5, 4.0].iter().enumerate() {
        let para = sample_legendrian(
            &GfExpr::poly1d(vec![0.0, 0.0, *c]),
            &q_grid_1d(&qs),
            &Rect::centered(1, 1.0),
            0.1,
        )?;
        let sum = geometric_sum(&base, &para, &qs)?;
        let front = wave_front(&sum);
        let cusps = detect_cusps(&front);
        write(
            out,
            &format!("fig4_{}.svg", ["flat", "medium", "steep"][i]),
            &io::front_to_svg(&front, &cusps, &format!("cusped front plus {c} q²"))?,
        )?;
    }
    Ok(())
}

/// A two-variable front with a fold network: transform of a product of
/// double wells, shown in three projections.
fn fig5(out: &Path) -> Result<()> {
    let f = ops::product_gf(&quartic(), &quartic());
    let axis = linspace(-1.8, 1.8, 61);
    let cloud = sample_legendrian(&f, &q_grid_2d(&axis, &axis), &Rect::centered(1, 1.0), 0.1)?;
    let t = geometric_t(&cloud);
    write(out, "fig5.svg", &io::front2_to_svg(&t, "transform of a product of double wells")?)
}

/// Selector of the transform of q² + 3q: the construction reproduces the
/// classical conjugate (q − 3)²/4.
fn fig6(out: &Path) -> Result<()> {
    let e = ops::transform_t(&GfExpr::poly1d(vec![0.0, 3.0, 1.0]));
    let grid = linspace(-2.0, 8.0, 201);
    let s = selector::selector(&e, &grid, &Rect::centered(1, 6.0), 0.05, Field::Z2, None)?;
    io::selector_to_csv(&s, &out.join("fig6.csv"))?;
    let mut pts = String::new();
    write(out, "fig6.svg", &{
        let front: Vec<(f64, f64)> = grid.iter().zip(&s.s_values).map(|(&q, &v)| (q, v)).collect();
        let exact: Vec<(f64, f64)> =
            grid.iter().map(|&q| (q, (q - 3.0) * (q - 3.0) / 4.0)).collect();
        pts.push_str(&polyline_svg(&[("selector", &front), ("conjugate", &exact)]));
        pts
    })
}

/// Emergence of a corner: fronts of the transform of the double well for
/// sublevels around the exchange of global minima at q = 0.
fn fig7(out: &Path) -> Result<()> {
    let e = ops::transform_t(&quartic());
    let grid = linspace(-1.5, 1.5, 301);
    let s = selector::selector(&e, &grid, &Rect::centered(1, 3.0), 0.02, Field::Z2, None)?;
    io::selector_to_csv(&s, &out.join("fig7.csv"))?;
    let curve: Vec<(f64, f64)> = grid.iter().zip(&s.s_values).map(|(&q, &v)| (q, v)).collect();
    write(out, "fig7.svg", &polyline_svg(&[("selector", &curve)]))
}

/// Round trips: the double transform against the original graph, and the
/// biconjugate against the convex hull.
fn fig8(out: &Path) -> Result<()> {
    let grid = linspace(-2.0, 2.0, 81);
    // re-assert the tracked index with zero perturbation slack; see the
    // involution suite for why the inherited bound is too conservative
    let ett = ops::transform_t(&ops::transform_t(&quartic())).with_fiber_index(1, 0.0)?;
    // the first fiber variable tracks P'(q), which reaches +-20 on this grid
    let bx = Rect::new(vec![-21.0, -2.5], vec![21.0, 2.5])?;
    let s = selector::selector(&ett, &grid, &bx, 0.05, Field::Z2, None)?;
    let original: Vec<(f64, f64)> =
        grid.iter().map(|&q| (q, q.powi(4) - 3.0 * q * q)).collect();
    let round: Vec<(f64, f64)> = grid.iter().zip(&s.s_values).map(|(&q, &v)| (q, v)).collect();
    write(out, "fig8_double_transform.svg", &polyline_svg(&[("round-trip", &round), ("original", &original)]))?;

    let f = GridFunction::sample(
        -3.0,
        3.0,
        0.01,
        |x| x.powi(4) - 3.0 * x * x,
        TailModel::poly(vec![0.0, 0.0, -3.0, 0.0, 1.0], 0),
    )?;
    let bi = convex::biconjugate(&f)?;
    let hull: Vec<(f64, f64)> = (0..bi.len()).map(|i| (bi.x(i), bi.values()[i])).collect();
    let orig: Vec<(f64, f64)> = (0..f.len()).map(|i| (f.x(i), f.values()[i])).collect();
    write(out, "fig8_biconjugate.svg", &polyline_svg(&[("biconjugate", &hull), ("original", &orig)]))
}

/// Non-convex selector round trip vs convexification, side by side.
fn fig9(out: &Path) -> Result<()> {
    let grid = linspace(-2.0, 2.0, 81);
    // re-assert the tracked index with zero perturbation slack; see the
    // involution suite for why the inherited bound is too conservative
    let ett = ops::transform_t(&ops::transform_t(&quartic())).with_fiber_index(1, 0.0)?;
    // the first fiber variable tracks P'(q), which reaches +-20 on this grid
    let bx = Rect::new(vec![-21.0, -2.5], vec![21.0, 2.5])?;
    let s = selector::selector(&ett, &grid, &bx, 0.05, Field::Z2, None)?;
    let f = GridFunction::sample(
        -2.0,
        2.0,
        0.05,
        |x| x.powi(4) - 3.0 * x * x,
        TailModel::poly(vec![0.0, 0.0, -3.0, 0.0, 1.0], 0),
    )?;
    let bi = convex::biconjugate(&f)?;
    let selector_curve: Vec<(f64, f64)> =
        grid.iter().zip(&s.s_values).map(|(&q, &v)| (q, v)).collect();
    let convexified: Vec<(f64, f64)> = (0..bi.len()).map(|i| (bi.x(i), bi.values()[i])).collect();
    write(
        out,
        "fig9.svg",
        &polyline_svg(&[("selector-round-trip", &selector_curve), ("convexification", &convexified)]),
    )
}

fn polyline_svg(curves: &[(&str, &Vec<(f64, f64)>)]) -> String {
    let colors = ["#1f77b4", "#d62728", "#2ca02c"];
    let (mut xmin, mut xmax) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut ymin, mut ymax) = (f64::INFINITY, f64::NEG_INFINITY);
    for (_, c) in curves {
        for &(x, y) in c.iter() {
            xmin = xmin.min(x);
            xmax = xmax.max(x);
            ymin = ymin.min(y);
            ymax = ymax.max(y);
        }
    }
    let (w, h) = (640.0, 480.0);
    let tx = |x: f64| 20.0 + (x - xmin) / (xmax - xmin).max(1e-12) * (w - 40.0);
    let ty = |y: f64| h - 20.0 - (y - ymin) / (ymax - ymin).max(1e-12) * (h - 40.0);
    let mut body = String::new();
    for (i, (name, c)) in curves.iter().enumerate() {
        let pts: Vec<String> =
            c.iter().map(|&(x, y)| format!("{:.2},{:.2}", tx(x), ty(y))).collect();
        body.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"><title>{}</title></polyline>\n",
            colors[i % colors.len()],
            pts.join(" "),
            name
        ));
    }
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n{body}</svg>\n"
    )
}

pub fn generate(id: &str, out: &Path, experimental: bool) -> Result<()> {
    match id {
        "fig1" => fig1(out),
        "fig2" | "fig3" if !experimental => {
            Err(anyhow!("{id} is experimental; pass --experimental to generate it"))
        }
        "fig2" => fig2(out),
        "fig3" => fig3(out),
        "fig4" => fig4(out),
        "fig5" => fig5(out),
        "fig6" => fig6(out),
        "fig7" => fig7(out),
        "fig8" => fig8(out),
        "fig9" => fig9(out),
        other => Err(anyhow!(
            "unknown figure {other:?}; known: {}, experimental: {}",
            FIGURE_IDS.join(", "),
            EXPERIMENTAL_IDS.join(", ")
        )),
    }
}
