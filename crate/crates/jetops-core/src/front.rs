//! Legendrian point clouds and wave fronts.
//!
//! A generating function describes a submanifold through its fiber-critical
//! set; this module samples that set into a [`LegendrianCloud`], projects
//! clouds to [`WaveFront`]s, applies the geometric operations directly to
//! clouds (for cross-checking the combinator level), finds cusps, and
//! measures cloud distance.

use alloc::vec;
use alloc::vec::Vec;

pub use crate::expr::Point1Jet;

use crate::error::{Error, Result};
use crate::expr::{GfExpr, Rect};
use crate::math;

/// Sampled Legendrian submanifold: jet points plus the bookkeeping that ties
/// each point back to the `(q, w)` parameters that produced it.
#[derive(Debug, Clone, Default)]
pub struct LegendrianCloud {
    pub points: Vec<Point1Jet>,
    pub branch_id: Vec<usize>,
    /// `(q, w)` source of each point; empty `w` for parametrically built clouds.
    pub source_params: Vec<(Vec<f64>, Vec<f64>)>,
    pub base_dim: usize,
    /// Grid cells where fiber root-finding did not converge.
    pub unresolved_cells: usize,
    /// Adjacent-q branch count changes that were not matched to a fold.
    pub branch_events: usize,
}

impl LegendrianCloud {
    pub fn new(base_dim: usize) -> Self {
        LegendrianCloud { base_dim, ..Default::default() }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn push(&mut self, p: Point1Jet, branch: usize, source: (Vec<f64>, Vec<f64>)) {
        debug_assert_eq!(p.dim(), self.base_dim);
        self.points.push(p);
        self.branch_id.push(branch);
        self.source_params.push(source);
    }

    /// Build a cloud from an explicit curve parametrization `t ↦ (u, q, p)`.
    pub fn from_curve(
        ts: impl Iterator<Item = f64>,
        map: impl Fn(f64) -> (f64, Vec<f64>, Vec<f64>),
        base_dim: usize,
    ) -> Result<Self> {
        let mut c = LegendrianCloud::new(base_dim);
        for t in ts {
            let (u, q, p) = map(t);
            c.push(Point1Jet::new(u, q, p)?, 0, (vec![t], Vec::new()));
        }
        Ok(c)
    }
}

/// Projection of a cloud to `(u, q)`-space, with a per-point curve parameter
/// used for cusp bracketing.
#[derive(Debug, Clone, Default)]
pub struct WaveFront {
    pub points: Vec<(f64, Vec<f64>)>,
    pub branch_id: Vec<usize>,
    /// Monotone parameter along the source curve: the last fiber coordinate
    /// for gf-sampled clouds, the base coordinate for 1-graphs.
    pub param: Vec<f64>,
    pub cusps: Vec<CuspPoint>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CuspKind {
    /// Smooth semicubical point: `dq` reverses along the curve.
    Cusp,
    /// Corner: the front direction jumps without a `dq` reversal.
    Vertex,
}

#[derive(Debug, Clone, Copy)]
pub struct CuspPoint {
    pub u: f64,
    pub q: f64,
    pub kind: CuspKind,
}

/// Roots of `∇_w F(q, ·) = 0` in a fiber box.
#[derive(Debug, Clone)]
pub struct FiberRoots {
    pub roots: Vec<Vec<f64>>,
    pub unresolved: usize,
}

/// Find all fiber-critical points over one base point by a grid scan with
/// Newton polish, deduplicated at radius `3·step`.
pub fn solve_fiber_critical(f: &GfExpr, q: &[f64], bx: &Rect, step: f64) -> Result<FiberRoots> {
    let k = f.fiber_dim();
    if k == 0 || k > 3 {
        return Err(Error::Unsupported("fiber dimension must be 1..=3 for root scanning".into()));
    }
    if bx.dim() != k {
        return Err(Error::DimensionMismatch { expected: k, got: bx.dim(), what: "fiber box" });
    }
    if q.len() != f.base_dim() {
        return Err(Error::DimensionMismatch { expected: f.base_dim(), got: q.len(), what: "base point q" });
    }
    let counts: Vec<usize> = (0..k)
        .map(|i| (crate::math::ceil((bx.hi[i] - bx.lo[i]) / step) as usize).max(1) + 1)
        .collect();
    let slack = bx.scaled(1.0 + 2.0 * step / (bx.hi[0] - bx.lo[0]));
    let mut roots: Vec<Vec<f64>> = Vec::new();
    let mut unresolved = 0usize;
    let mut idx = vec![0usize; k];
    loop {
        let w0: Vec<f64> = (0..k)
            .map(|i| bx.lo[i] + (bx.hi[i] - bx.lo[i]) * idx[i] as f64 / (counts[i] - 1).max(1) as f64)
            .collect();
        let mut found = f.newton_fiber(q, &w0, 40);
        if found.is_none() {
            // a small residual here suggests a root the first start missed:
            // subdivide the cell once before flagging it unresolved
            let g = math::norm(&f.grad(q, &w0)?.1);
            if g < step {
                for axis in 0..k {
                    for sgn in [-0.5, 0.5] {
                        let mut w1 = w0.clone();
                        w1[axis] += sgn * step;
                        found = f.newton_fiber(q, &w1, 40);
                        if found.is_some() {
                            break;
                        }
                    }
                    if found.is_some() {
                        break;
                    }
                }
                if found.is_none() {
                    unresolved += 1;
                }
            }
        }
        if let Some(w) = found {
            if slack.contains(&w) && !roots.iter().any(|r| math::dist(r, &w) < 3.0 * step) {
                roots.push(w);
            }
        }
        let mut carry = true;
        for i in 0..k {
            if carry {
                idx[i] += 1;
                if idx[i] >= counts[i] {
                    idx[i] = 0;
                } else {
                    carry = false;
                }
            }
        }
        if carry {
            break;
        }
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(FiberRoots { roots, unresolved })
}

/// 1-D base grids as generic base points.
pub fn q_grid_1d(qs: &[f64]) -> Vec<Vec<f64>> {
    qs.iter().map(|&q| vec![q]).collect()
}

/// Uniform grid with `count` nodes on `[a, b]`.
pub fn linspace(a: f64, b: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| a + (b - a) * i as f64 / (count - 1).max(1) as f64)
        .collect()
}

/// Product grid of two 1-D grids, row-major.
pub fn q_grid_2d(qa: &[f64], qb: &[f64]) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(qa.len() * qb.len());
    for &a in qa {
        for &b in qb {
            out.push(vec![a, b]);
        }
    }
    out
}

/// Sample the Legendrian of a generating function over a base grid: each
/// fiber-critical `w` over `q` contributes `(F(q,w), q, ∇_q F(q,w))`.
/// For a 1-D base the roots are stitched into branches by nearest-`w`
/// matching across adjacent grid nodes.
pub fn sample_legendrian(
    f: &GfExpr,
    q_grid: &[Vec<f64>],
    fiber_box: &Rect,
    step: f64,
) -> Result<LegendrianCloud> {
    let n = f.base_dim();
    let mut cloud = LegendrianCloud::new(n);
    if f.fiber_dim() == 0 {
        for q in q_grid {
            let u = f.eval(q, &[])?;
            let p = f.grad(q, &[])?.0;
            cloud.push(Point1Jet::new(u, q.clone(), p)?, 0, (q.clone(), Vec::new()));
        }
        return Ok(cloud);
    }
    let stitch_radius = 8.0 * step;
    let mut active: Vec<(usize, Vec<f64>)> = Vec::new(); // (branch, last w)
    let mut next_branch = 0usize;
    let mut prev_count = 0usize;
    for q in q_grid {
        let sol = solve_fiber_critical(f, q, fiber_box, step)?;
        cloud.unresolved_cells += sol.unresolved;
        let mut assigned: Vec<Option<usize>> = vec![None; sol.roots.len()];
        if n == 1 {
            // greedy nearest matching of roots to still-active branches
            let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
            for (ri, r) in sol.roots.iter().enumerate() {
                for (bi, (_, w)) in active.iter().enumerate() {
                    let d = math::dist(r, w);
                    if d < stitch_radius {
                        pairs.push((d, ri, bi));
                    }
                }
            }
            pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            let mut branch_used = vec![false; active.len()];
            for (_, ri, bi) in pairs {
                if assigned[ri].is_none() && !branch_used[bi] {
                    assigned[ri] = Some(active[bi].0);
                    branch_used[bi] = true;
                }
            }
            if sol.roots.len() != prev_count
                && sol.roots.len() + active.iter().len() > 0
                && assigned.iter().any(|a| a.is_none())
                && prev_count > 0
            {
                cloud.branch_events += 1;
            }
            prev_count = sol.roots.len();
        }
        let mut new_active = Vec::with_capacity(sol.roots.len());
        for (ri, w) in sol.roots.iter().enumerate() {
            let b = assigned[ri].unwrap_or_else(|| {
                let b = next_branch;
                next_branch += 1;
                b
            });
            let u = f.eval(q, w)?;
            let p = f.grad(q, w)?.0;
            cloud.push(Point1Jet::new(u, q.clone(), p)?, b, (q.clone(), w.clone()));
            new_active.push((b, w.clone()));
        }
        active = new_active;
    }
    Ok(cloud)
}

/// Forget `p`: the `(u, q)` projection with branch labels and curve params.
pub fn wave_front(cloud: &LegendrianCloud) -> WaveFront {
    let param = cloud
        .points
        .iter()
        .zip(&cloud.source_params)
        .map(|(pt, (src_q, src_w))| {
            if let Some(&w) = src_w.last() {
                w
            } else if let Some(&t) = src_q.first() {
                t
            } else {
                pt.q.first().copied().unwrap_or(0.0)
            }
        })
        .collect();
    WaveFront {
        points: cloud.points.iter().map(|p| (p.u, p.q.clone())).collect(),
        branch_id: cloud.branch_id.clone(),
        param,
        cusps: Vec::new(),
    }
}

/// The pointwise contact transformation `(u, q, p) ↦ (p·q − u, p, q)`.
pub fn geometric_t(cloud: &LegendrianCloud) -> LegendrianCloud {
    let mut out = cloud.clone();
    for p in &mut out.points {
        let u = math::dot(&p.p, &p.q) - p.u;
        core::mem::swap(&mut p.q, &mut p.p);
        p.u = u;
    }
    out
}

/// Maximal strictly monotone (in the chosen coordinate) runs of one branch,
/// each usable for linear interpolation.
fn monotone_segments(points: &[(f64, f64, f64)]) -> Vec<Vec<(f64, f64, f64)>> {
    // points are (x, u, y): match on x, carry (u, y)
    let mut segs = Vec::new();
    let mut cur: Vec<(f64, f64, f64)> = Vec::new();
    let mut dir = 0i8;
    for &p in points {
        if let Some(&last) = cur.last() {
            let d = (p.0 - last.0).partial_cmp(&0.0).map(|o| o as i8).unwrap_or(0);
            let d = if p.0 > last.0 {
                1
            } else if p.0 < last.0 {
                -1
            } else {
                let _ = d;
                0
            };
            if d == 0 || (dir != 0 && d != dir) {
                if cur.len() >= 2 {
                    segs.push(core::mem::take(&mut cur));
                } else {
                    cur.clear();
                }
                dir = 0;
            } else {
                dir = d;
            }
        }
        cur.push(p);
    }
    if cur.len() >= 2 {
        segs.push(cur);
    }
    segs
}

fn interp_segment(seg: &[(f64, f64, f64)], x: f64) -> Option<(f64, f64)> {
    let (lo, hi) = if seg[0].0 < seg[seg.len() - 1].0 {
        (seg[0].0, seg[seg.len() - 1].0)
    } else {
        (seg[seg.len() - 1].0, seg[0].0)
    };
    if x < lo || x > hi {
        return None;
    }
    for w in seg.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (x0, x1) = (a.0, b.0);
        if (x - x0) * (x - x1) <= 0.0 && (x1 - x0).abs() > 1e-15 {
            let t = (x - x0) / (x1 - x0);
            return Some((a.1 + t * (b.1 - a.1), a.2 + t * (b.2 - a.2)));
        }
    }
    None
}

/// Branches of a 1-D cloud as monotone segments in the coordinate selected
/// by `by_p`.
fn branch_segments(cloud: &LegendrianCloud, by_p: bool) -> Vec<Vec<(f64, f64, f64)>> {
    let mut branches: Vec<(usize, Vec<(f64, f64, f64)>)> = Vec::new();
    for (i, pt) in cloud.points.iter().enumerate() {
        let rec = if by_p {
            (pt.p[0], pt.u, pt.q[0])
        } else {
            (pt.q[0], pt.u, pt.p[0])
        };
        let b = cloud.branch_id[i];
        if let Some(e) = branches.iter_mut().find(|(bb, _)| *bb == b) {
            e.1.push(rec);
        } else {
            branches.push((b, vec![rec]));
        }
    }
    branches
        .into_iter()
        .flat_map(|(_, pts)| monotone_segments(&pts))
        .collect()
}

fn combine_1d(
    a: &LegendrianCloud,
    b: &LegendrianCloud,
    grid: &[f64],
    by_p: bool,
) -> Result<LegendrianCloud> {
    if a.base_dim != 1 || b.base_dim != 1 {
        return Err(Error::Unsupported("cloud combination needs 1-D base".into()));
    }
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let segs_a = branch_segments(a, by_p);
    let segs_b = branch_segments(b, by_p);
    let mut out = LegendrianCloud::new(1);
    for (ia, sa) in segs_a.iter().enumerate() {
        for (ib, sb) in segs_b.iter().enumerate() {
            let branch = ia * segs_b.len() + ib;
            for &x in grid {
                let (Some((u1, y1)), Some((u2, y2))) =
                    (interp_segment(sa, x), interp_segment(sb, x))
                else {
                    continue;
                };
                let pt = if by_p {
                    // matched on p; sum u and q
                    Point1Jet::new(u1 + u2, vec![y1 + y2], vec![x])?
                } else {
                    // matched on q; sum u and p
                    Point1Jet::new(u1 + u2, vec![x], vec![y1 + y2])?
                };
                out.push(pt, branch, (vec![x], Vec::new()));
            }
        }
    }
    Ok(out)
}

/// Fiberwise sum over a shared `q`-grid: `(u₁+u₂, q, p₁+p₂)`.
pub fn geometric_sum(a: &LegendrianCloud, b: &LegendrianCloud, q_grid: &[f64]) -> Result<LegendrianCloud> {
    combine_1d(a, b, q_grid, false)
}

/// Convolution over a shared `p`-grid: `(u₁+u₂, q₁+q₂, p)`.
pub fn geometric_convolution(
    a: &LegendrianCloud,
    b: &LegendrianCloud,
    p_grid: &[f64],
) -> Result<LegendrianCloud> {
    combine_1d(a, b, p_grid, true)
}

/// All-pairs product `(u₁+u₂, (q₁,q₂), (p₁,p₂))`.
pub fn geometric_product(a: &LegendrianCloud, b: &LegendrianCloud) -> LegendrianCloud {
    let mut out = LegendrianCloud::new(a.base_dim + b.base_dim);
    for (i, pa) in a.points.iter().enumerate() {
        for (j, pb) in b.points.iter().enumerate() {
            let mut q = pa.q.clone();
            q.extend_from_slice(&pb.q);
            let mut p = pa.p.clone();
            p.extend_from_slice(&pb.p);
            out.push(
                Point1Jet { u: pa.u + pb.u, q, p },
                i * b.points.len() + j,
                (Vec::new(), Vec::new()),
            );
        }
    }
    out
}

/// Slice a cloud along the demoted base directions: keep points whose
/// demoted `q`-coordinates vanish (within `tol`), forget those coordinates
/// and their momenta.
pub fn geometric_slice(cloud: &LegendrianCloud, kept: &[usize], tol: f64) -> LegendrianCloud {
    project_cloud(cloud, kept, tol, false)
}

/// Contour of a cloud: keep points whose demoted momenta vanish.
pub fn geometric_contour(cloud: &LegendrianCloud, kept: &[usize], tol: f64) -> LegendrianCloud {
    project_cloud(cloud, kept, tol, true)
}

fn project_cloud(cloud: &LegendrianCloud, kept: &[usize], tol: f64, on_p: bool) -> LegendrianCloud {
    let demoted: Vec<usize> = (0..cloud.base_dim).filter(|i| !kept.contains(i)).collect();
    let mut out = LegendrianCloud::new(kept.len());
    for (i, pt) in cloud.points.iter().enumerate() {
        let small = demoted.iter().all(|&d| {
            let v = if on_p { pt.p[d] } else { pt.q[d] };
            v.abs() <= tol
        });
        if !small {
            continue;
        }
        let q = kept.iter().map(|&ki| pt.q[ki]).collect();
        let p = kept.iter().map(|&ki| pt.p[ki]).collect();
        out.push(
            Point1Jet { u: pt.u, q, p },
            cloud.branch_id[i],
            cloud.source_params[i].clone(),
        );
    }
    out
}

/// Extremum of the parabola through three samples `(x, y)`; falls back to
/// the middle sample when the fit degenerates.
fn parabola_extremum(x: [f64; 3], y: [f64; 3]) -> (f64, f64) {
    let d0 = (y[1] - y[0]) / (x[1] - x[0]);
    let d1 = (y[2] - y[1]) / (x[2] - x[1]);
    let c2 = (d1 - d0) / (x[2] - x[0]);
    if c2.abs() < 1e-14 {
        return (x[1], y[1]);
    }
    let xs = 0.5 * (x[0] + x[1]) - d0 / (2.0 * c2);
    let ys = y[0] + d0 * (xs - x[0]) + c2 * (xs - x[0]) * (xs - x[1]);
    (xs, ys)
}

/// Cusps and corners of a 1-D front.
///
/// Cusps are bracketed as reversals of `q` along the curve parameter and
/// refined by parabolic interpolation of both `q` and `u`; corners are sharp
/// direction changes of the `(q, u)` polyline away from any cusp.
pub fn detect_cusps(front: &WaveFront) -> Vec<CuspPoint> {
    let mut out: Vec<CuspPoint> = Vec::new();
    if front.points.is_empty() || front.points[0].1.len() != 1 {
        return out;
    }
    // order the whole front by curve parameter
    let mut order: Vec<usize> = (0..front.points.len()).collect();
    order.sort_by(|&a, &b| front.param[a].partial_cmp(&front.param[b]).unwrap());
    let t: Vec<f64> = order.iter().map(|&i| front.param[i]).collect();
    let qs: Vec<f64> = order.iter().map(|&i| front.points[i].1[0]).collect();
    let us: Vec<f64> = order.iter().map(|&i| front.points[i].0).collect();
    // near-zero steps (two roots of the same base point straddling the fold)
    // must not mask the reversal, so track the last clearly nonzero step
    let mut last_sign = 0.0f64;
    let mut run_end = 0usize; // index closing the previous nonzero step
    for i in 1..qs.len() {
        let d = qs[i] - qs[i - 1];
        if d.abs() < 1e-9 {
            continue;
        }
        let s = d.signum();
        if last_sign != 0.0 && s != last_sign && run_end >= 1 {
            let (a, m) = (run_end - 1, run_end);
            let (_, qc) = parabola_extremum([t[a], t[m], t[i]], [qs[a], qs[m], qs[i]]);
            let (tc, _) = parabola_extremum([t[a], t[m], t[i]], [qs[a], qs[m], qs[i]]);
            // evaluate the interpolating u-parabola at the q-reversal
            // parameter rather than at its own vertex
            let du0 = (us[m] - us[a]) / (t[m] - t[a]);
            let du1 = (us[i] - us[m]) / (t[i] - t[m]);
            let c2 = (du1 - du0) / (t[i] - t[a]);
            let uc = us[a] + du0 * (tc - t[a]) + c2 * (tc - t[a]) * (tc - t[m]);
            if !out
                .iter()
                .any(|c| (c.q - qc).abs() < 1e-6 && (c.u - uc).abs() < 1e-6)
            {
                out.push(CuspPoint { u: uc, q: qc, kind: CuspKind::Cusp });
            }
        }
        last_sign = s;
        run_end = i;
    }
    // corner pass: sharp turns of the q-ordered polyline per branch
    let mut branches: Vec<usize> = front.branch_id.clone();
    branches.sort_unstable();
    branches.dedup();
    for b in branches {
        let mut pts: Vec<(f64, f64)> = front
            .points
            .iter()
            .zip(&front.branch_id)
            .filter(|(_, &bb)| bb == b)
            .map(|((u, q), _)| (q[0], *u))
            .collect();
        pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        for w in pts.windows(3) {
            let (a, m, c) = (w[0], w[1], w[2]);
            let v1 = (m.0 - a.0, m.1 - a.1);
            let v2 = (c.0 - m.0, c.1 - m.1);
            let n1 = math::hypot(v1.0, v1.1);
            let n2 = math::hypot(v2.0, v2.1);
            if n1 < 1e-12 || n2 < 1e-12 {
                continue;
            }
            let cosang = (v1.0 * v2.0 + v1.1 * v2.1) / (n1 * n2);
            // a genuine corner turns by a step-independent angle; smooth
            // curvature at these sampling densities stays well under 60°
            if cosang < 0.5 {
                let near_cusp = out
                    .iter()
                    .any(|cp| (cp.q - m.0).abs() < 5.0 * n1.max(n2));
                if !near_cusp
                    && !out
                        .iter()
                        .any(|cp| cp.kind == CuspKind::Vertex && (cp.q - m.0).abs() < 2.0 * n1.max(n2))
                {
                    out.push(CuspPoint { u: m.1, q: m.0, kind: CuspKind::Vertex });
                }
            }
        }
    }
    out
}

/// Symmetric Hausdorff distance between clouds in `(u, q, p)`-space;
/// `+∞` when either cloud is empty.
pub fn hausdorff(a: &LegendrianCloud, b: &LegendrianCloud) -> f64 {
    if a.is_empty() || b.is_empty() {
        return f64::INFINITY;
    }
    fn one_sided(a: &LegendrianCloud, b: &LegendrianCloud, cutoff: f64) -> f64 {
        let mut worst: f64 = 0.0;
        for pa in &a.points {
            let mut best = f64::INFINITY;
            for pb in &b.points {
                let du = pa.u - pb.u;
                let mut d2 = du * du;
                for (x, y) in pa.q.iter().zip(&pb.q) {
                    d2 += (x - y) * (x - y);
                }
                for (x, y) in pa.p.iter().zip(&pb.p) {
                    d2 += (x - y) * (x - y);
                }
                if d2 < best {
                    best = d2;
                    if best <= worst {
                        break; // cannot raise the supremum
                    }
                }
            }
            if best > worst {
                worst = best;
            }
            let _ = cutoff;
        }
        math::sqrt(worst)
    }
    let ab = one_sided(a, b, f64::INFINITY);
    let ba = one_sided(b, a, ab);
    ab.max(ba)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::GfExpr;
    use crate::ops;

    fn quartic() -> GfExpr {
        GfExpr::poly1d(vec![0.0, 0.0, -3.0, 0.0, 1.0])
    }

    #[test]
    fn fiber_roots_of_transformed_quartic_at_origin() {
        // dF/dv = q - (4v^3 - 6v); at q = 0 roots are 0 and ±sqrt(3/2)
        let f = ops::transform_t(&quartic());
        let r = solve_fiber_critical(&f, &[0.0], &Rect::centered(1, 2.0), 0.05).unwrap();
        assert_eq!(r.roots.len(), 3, "expected three roots, got {:?}", r.roots);
        let s = (1.5f64).sqrt();
        for (root, expect) in r.roots.iter().zip([-s, 0.0, s]) {
            assert!((root[0] - expect).abs() < 1e-8, "root {} vs {}", root[0], expect);
        }
    }

    #[test]
    fn fiber_root_linear_case() {
        // F = T(w^2/2): dF/dw = q - w, single root w = q
        let f = ops::transform_t(&GfExpr::poly1d(vec![0.0, 0.0, 0.5]));
        let r = solve_fiber_critical(&f, &[1.0], &Rect::centered(1, 3.0), 0.1).unwrap();
        assert_eq!(r.roots.len(), 1);
        assert!((r.roots[0][0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn single_root_outside_bump_regime() {
        let f = ops::transform_t(&quartic());
        let r = solve_fiber_critical(&f, &[10.0], &Rect::centered(1, 3.0), 0.05).unwrap();
        assert_eq!(r.roots.len(), 1, "cubic 4w^3-6w = 10 has one real root, got {:?}", r.roots);
    }

    #[test]
    fn one_graph_cloud_matches_jet_formula() {
        let f = quartic();
        let grid = q_grid_1d(&linspace(-1.5, 1.5, 31));
        let cloud = sample_legendrian(&f, &grid, &Rect::centered(1, 1.0), 0.1).unwrap();
        assert_eq!(cloud.len(), 31);
        for p in &cloud.points {
            let x = p.q[0];
            assert!((p.u - (x.powi(4) - 3.0 * x * x)).abs() < 1e-9);
            assert!((p.p[0] - (4.0 * x.powi(3) - 6.0 * x)).abs() < 1e-9);
        }
    }

    #[test]
    fn transformed_cloud_matches_dual_parametrization() {
        // points of T(j1(x^4-3x^2)) are (3x^4-3x^2, 4x^3-6x, x)
        let f = ops::transform_t(&quartic());
        let grid = q_grid_1d(&linspace(-3.0, 3.0, 61));
        let cloud = sample_legendrian(&f, &grid, &Rect::centered(1, 2.2), 0.05).unwrap();
        assert!(!cloud.is_empty());
        for p in &cloud.points {
            let x = p.p[0]; // the root parametrizes the curve
            assert!((p.u - (3.0 * x.powi(4) - 3.0 * x * x)).abs() < 1e-7);
            assert!((p.q[0] - (4.0 * x.powi(3) - 6.0 * x)).abs() < 1e-7);
        }
    }

    #[test]
    fn empty_contour_gives_empty_cloud() {
        // F = qw - w: grad_w = q - 1, no roots for q != 1
        let f = ops::transform_t(&GfExpr::poly1d(vec![0.0, 1.0]));
        let grid = q_grid_1d(&[0.0, 0.5, 2.0]);
        let cloud = sample_legendrian(&f, &grid, &Rect::centered(1, 3.0), 0.1).unwrap();
        assert!(cloud.is_empty());
    }

    #[test]
    fn geometric_t_pointwise_and_involutive() {
        let mut c = LegendrianCloud::new(1);
        c.push(Point1Jet::new(0.0, vec![1.0], vec![-2.0]).unwrap(), 0, (vec![], vec![]));
        let t = geometric_t(&c);
        assert_eq!(t.points[0].u, -2.0);
        assert_eq!(t.points[0].q, vec![-2.0]);
        assert_eq!(t.points[0].p, vec![1.0]);
        let back = geometric_t(&t);
        assert!(hausdorff(&back, &c) < 1e-12);
    }

    #[test]
    fn sum_of_one_graphs() {
        let g = linspace(-1.0, 1.0, 41);
        let fb = Rect::centered(1, 1.0);
        let a = sample_legendrian(&GfExpr::poly1d(vec![0.0, 0.0, 1.0]), &q_grid_1d(&g), &fb, 0.05).unwrap();
        let b = sample_legendrian(&GfExpr::poly1d(vec![0.0, 3.0]), &q_grid_1d(&g), &fb, 0.05).unwrap();
        let s = geometric_sum(&a, &b, &g).unwrap();
        let expect =
            sample_legendrian(&GfExpr::poly1d(vec![0.0, 3.0, 1.0]), &q_grid_1d(&g), &fb, 0.05).unwrap();
        let d = hausdorff(&s, &expect);
        assert!(d < 0.05, "sum of 1-graphs off by {d}");
    }

    #[test]
    fn convolution_of_quadratics_halves_the_coefficient() {
        // q^2/2 convolved with itself is q^2/4
        let g = linspace(-2.0, 2.0, 81);
        let fb = Rect::centered(1, 1.0);
        let f = GfExpr::poly1d(vec![0.0, 0.0, 0.5]);
        let a = sample_legendrian(&f, &q_grid_1d(&g), &fb, 0.05).unwrap();
        let p_grid = linspace(-1.5, 1.5, 61);
        let c = geometric_convolution(&a, &a, &p_grid).unwrap();
        let expect = sample_legendrian(
            &GfExpr::poly1d(vec![0.0, 0.0, 0.25]),
            &q_grid_1d(&linspace(-3.0, 3.0, 121)),
            &fb,
            0.05,
        )
        .unwrap();
        // compare on the shared support by one-sided containment
        for pt in &c.points {
            let best = expect
                .points
                .iter()
                .map(|e| {
                    math::hypot(math::hypot(pt.u - e.u, pt.q[0] - e.q[0]), pt.p[0] - e.p[0])
                })
                .fold(f64::INFINITY, f64::min);
            assert!(best < 0.06, "convolved point {pt:?} off by {best}");
        }
    }

    #[test]
    fn cusps_of_transformed_quartic_front() {
        let f = ops::transform_t(&quartic());
        let grid = q_grid_1d(&linspace(-3.2, 3.2, 321));
        let cloud = sample_legendrian(&f, &grid, &Rect::centered(1, 2.2), 0.02).unwrap();
        let front = wave_front(&cloud);
        let cusps: Vec<_> = detect_cusps(&front)
            .into_iter()
            .filter(|c| c.kind == CuspKind::Cusp)
            .collect();
        assert_eq!(cusps.len(), 2, "expected two cusps, got {cusps:?}");
        let s = 2.0 * (2.0f64).sqrt();
        for c in &cusps {
            assert!((c.u - (-0.75)).abs() < 1e-3, "cusp height {} vs -0.75", c.u);
            assert!((c.q.abs() - s).abs() < 1e-3, "cusp position {} vs ±2√2", c.q);
        }
    }

    #[test]
    fn graph_front_has_no_cusps() {
        let f = quartic();
        let grid = q_grid_1d(&linspace(-1.5, 1.5, 61));
        let cloud = sample_legendrian(&f, &grid, &Rect::centered(1, 1.0), 0.1).unwrap();
        let cusps = detect_cusps(&wave_front(&cloud));
        assert!(cusps.is_empty(), "unexpected cusps {cusps:?}");
    }

    #[test]
    fn hausdorff_basics() {
        let mut a = LegendrianCloud::new(1);
        a.push(Point1Jet::new(0.0, vec![0.0], vec![0.0]).unwrap(), 0, (vec![], vec![]));
        let mut b = a.clone();
        assert_eq!(hausdorff(&a, &b), 0.0);
        b.points[0].u += 0.25;
        assert!((hausdorff(&a, &b) - 0.25).abs() < 1e-12);
        let empty = LegendrianCloud::new(1);
        assert!(hausdorff(&a, &empty).is_infinite());
    }
}
