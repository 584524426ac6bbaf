//! Min-max selector of almost-simple fiber functions.
//!
//! For a fiber function `f` that agrees with a simple function of Morse
//! index `ι` outside a bounded-gradient perturbation, the min-max `s(f)` is
//! the birth of the unique essential class of degree `ι` in the relative
//! sublevel homology `H_*(f^λ, f^{−∞})`.  Index 0 and index `k` collapse to
//! the global minimum and maximum of the critical values; everything in
//! between goes through cubical persistence on a box.

mod cubical;
pub mod persistence;

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

pub use persistence::{Bar, Field, PersistenceDiagram};

use crate::error::{Error, Result};
use crate::expr::{solve_dense, GfExpr, Rect, SymMatrix};
use crate::math;

/// A function of the fiber variables alone.
pub trait FiberFunction: Sync {
    fn dim(&self) -> usize;
    fn eval(&self, w: &[f64]) -> f64;
    fn grad(&self, w: &[f64]) -> Vec<f64> {
        let h = 1e-6;
        (0..self.dim())
            .map(|i| {
                let mut wp = w.to_vec();
                let mut wm = w.to_vec();
                wp[i] += h;
                wm[i] -= h;
                (self.eval(&wp) - self.eval(&wm)) / (2.0 * h)
            })
            .collect()
    }
}

/// A generating function frozen at one base point.
pub struct ExprFiber<'a> {
    pub expr: &'a GfExpr,
    pub q: Vec<f64>,
}

impl<'a> FiberFunction for ExprFiber<'a> {
    fn dim(&self) -> usize {
        self.expr.fiber_dim()
    }
    fn eval(&self, w: &[f64]) -> f64 {
        self.expr.eval_unchecked(&self.q, w)
    }
    fn grad(&self, w: &[f64]) -> Vec<f64> {
        self.expr.grad_unchecked(&self.q, w).1
    }
}

/// A closed-form fiber function given by a closure (test oracles, direct
/// sums of model functions).
pub struct ClosureFiber<F: Fn(&[f64]) -> f64 + Sync> {
    dim: usize,
    f: F,
}

impl<F: Fn(&[f64]) -> f64 + Sync> ClosureFiber<F> {
    pub fn new(dim: usize, f: F) -> Self {
        ClosureFiber { dim, f }
    }
}

impl<F: Fn(&[f64]) -> f64 + Sync> FiberFunction for ClosureFiber<F> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, w: &[f64]) -> f64 {
        (self.f)(w)
    }
}

/// `(f₁ ⊕ f₂)(w₁, w₂) = f₁(w₁) + f₂(w₂)` on disjoint variable blocks.
pub struct DirectSumFiber<'a> {
    pub left: &'a dyn FiberFunction,
    pub right: &'a dyn FiberFunction,
}

impl<'a> FiberFunction for DirectSumFiber<'a> {
    fn dim(&self) -> usize {
        self.left.dim() + self.right.dim()
    }
    fn eval(&self, w: &[f64]) -> f64 {
        let (a, b) = w.split_at(self.left.dim());
        self.left.eval(a) + self.right.eval(b)
    }
    fn grad(&self, w: &[f64]) -> Vec<f64> {
        let (a, b) = w.split_at(self.left.dim());
        let mut g = self.left.grad(a);
        g.extend(self.right.grad(b));
        g
    }
}

/// One polished critical point.
#[derive(Debug, Clone)]
pub struct CriticalPoint {
    pub w: Vec<f64>,
    pub value: f64,
    /// Negative-eigenvalue count of the Hessian.
    pub index: usize,
    /// Smallest Hessian eigenvalue magnitude was below tolerance.
    pub degenerate: bool,
}

/// Critical values of a fiber function on a box, sorted, with multiplicity
/// and Morse-index estimates, and the compactness bound `C`.
#[derive(Debug, Clone)]
pub struct CriticalValueSet {
    pub values: Vec<f64>,
    pub multiplicity: Vec<usize>,
    pub indices: Vec<Vec<usize>>,
    pub points: Vec<CriticalPoint>,
    pub bound_c: f64,
    pub unresolved: usize,
}

impl CriticalValueSet {
    fn from_points(points: Vec<CriticalPoint>, unresolved: usize) -> Self {
        let mut pts = points;
        pts.sort_by(|a, b| a.value.partial_cmp(&b.value).unwrap());
        let mut values: Vec<f64> = Vec::new();
        let mut multiplicity: Vec<usize> = Vec::new();
        let mut indices: Vec<Vec<usize>> = Vec::new();
        for p in &pts {
            match values.last() {
                Some(&v) if (p.value - v).abs() < 1e-8 => {
                    *multiplicity.last_mut().unwrap() += 1;
                    indices.last_mut().unwrap().push(p.index);
                }
                _ => {
                    values.push(p.value);
                    multiplicity.push(1);
                    indices.push(vec![p.index]);
                }
            }
        }
        let bound_c = 2.0 * values.iter().fold(0.0f64, |m, v| m.max(v.abs())) + 1.0;
        CriticalValueSet { values, multiplicity, indices, points: pts, bound_c, unresolved }
    }

    pub fn min(&self) -> Option<f64> {
        self.values.first().copied()
    }

    pub fn max(&self) -> Option<f64> {
        self.values.last().copied()
    }

    /// Whether `v` matches some critical value within `tol`.
    pub fn contains(&self, v: f64, tol: f64) -> bool {
        self.values.iter().any(|&cv| (cv - v).abs() <= tol)
    }
}

/// Newton iteration on `∇f = 0` with a finite-difference Jacobian.
fn newton(f: &dyn FiberFunction, w0: &[f64], max_iter: usize) -> Option<Vec<f64>> {
    let k = f.dim();
    let mut w = w0.to_vec();
    for _ in 0..max_iter {
        let g = f.grad(&w);
        let res = math::norm(&g);
        if res < 1e-9 {
            return Some(w);
        }
        if !res.is_finite() || res > 1e8 {
            return None;
        }
        let h = 1e-5;
        let mut jac = vec![0.0; k * k];
        for j in 0..k {
            let mut wp = w.clone();
            let mut wm = w.clone();
            wp[j] += h;
            wm[j] -= h;
            let gp = f.grad(&wp);
            let gm = f.grad(&wm);
            for i in 0..k {
                jac[i * k + j] = (gp[i] - gm[i]) / (2.0 * h);
            }
        }
        let step = solve_dense(&jac, &g, k)?;
        if math::norm(&step) > 1e6 {
            return None;
        }
        for i in 0..k {
            w[i] -= step[i];
        }
    }
    let res = math::norm(&f.grad(&w));
    if res < 1e-7 {
        Some(w)
    } else {
        None
    }
}

fn hessian_index(f: &dyn FiberFunction, w: &[f64]) -> (usize, bool) {
    let k = f.dim();
    let h = 1e-4;
    let mut data = vec![0.0; k * k];
    for j in 0..k {
        let mut wp = w.to_vec();
        let mut wm = w.to_vec();
        wp[j] += h;
        wm[j] -= h;
        let gp = f.grad(&wp);
        let gm = f.grad(&wm);
        for i in 0..k {
            data[i * k + j] = (gp[i] - gm[i]) / (2.0 * h);
        }
    }
    // symmetrize FD noise
    for i in 0..k {
        for j in 0..i {
            let s = 0.5 * (data[i * k + j] + data[j * k + i]);
            data[i * k + j] = s;
            data[j * k + i] = s;
        }
    }
    let eig = SymMatrix::new(k, data).expect("symmetrized").eigenvalues();
    let neg = eig.iter().filter(|&&l| l < 0.0).count();
    let degenerate = eig.iter().any(|l| l.abs() < 1e-5);
    (neg, degenerate)
}

/// Scan + polish all critical points of `f` in the box.
pub fn critical_points(f: &dyn FiberFunction, bx: &Rect, step: f64) -> Result<CriticalValueSet> {
    let k = f.dim();
    if k == 0 || k > 3 {
        return Err(Error::Unsupported("critical point scan needs fiber dimension 1..=3".into()));
    }
    if bx.dim() != k {
        return Err(Error::DimensionMismatch { expected: k, got: bx.dim(), what: "fiber box" });
    }
    // Newton polishing has a wide basin; cap the seed density in higher
    // fiber dimensions to keep the scan affordable
    let cap = match k {
        1 => 80,
        2 => 30,
        _ => 12,
    };
    let counts: Vec<usize> = (0..k)
        .map(|i| (crate::math::ceil((bx.hi[i] - bx.lo[i]) / step) as usize).clamp(1, cap) + 1)
        .collect();
    let mut points: Vec<CriticalPoint> = Vec::new();
    let mut unresolved = 0usize;
    let mut idx = vec![0usize; k];
    loop {
        let w0: Vec<f64> = (0..k)
            .map(|i| bx.lo[i] + (bx.hi[i] - bx.lo[i]) * idx[i] as f64 / (counts[i] - 1).max(1) as f64)
            .collect();
        match newton(f, &w0, 40) {
            Some(w) => {
                let inside = bx.scaled(1.02).contains(&w);
                if inside && !points.iter().any(|p| math::dist(&p.w, &w) < 3.0 * step) {
                    let (index, degenerate) = hessian_index(f, &w);
                    points.push(CriticalPoint { w: w.clone(), value: f.eval(&w), index, degenerate });
                }
            }
            None => {
                if math::norm(&f.grad(&w0)) < step {
                    unresolved += 1;
                }
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
    Ok(CriticalValueSet::from_points(points, unresolved))
}

/// Critical values of a 1-D fiber function: sign changes of `f′` bracketed
/// and bisected to full precision.
pub fn critical_values_1d(f: &dyn FiberFunction, bx: &Rect, step: f64) -> Result<CriticalValueSet> {
    if f.dim() != 1 {
        return Err(Error::Unsupported("critical_values_1d needs fiber dimension 1".into()));
    }
    let (a, b) = (bx.lo[0], bx.hi[0]);
    let n = (crate::math::ceil((b - a) / step) as usize).max(2);
    let g = |x: f64| f.grad(&[x])[0];
    let mut points: Vec<CriticalPoint> = Vec::new();
    let mut unresolved = 0usize;
    let mut prev_x = a;
    let mut prev_g = g(a);
    for i in 1..=n {
        let x = a + (b - a) * i as f64 / n as f64;
        let gx = g(x);
        if prev_g == 0.0 || prev_g * gx < 0.0 {
            let (mut lo, mut hi) = (prev_x, x);
            let mut glo = prev_g;
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                let gm = g(mid);
                if glo * gm <= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                    glo = gm;
                }
                if hi - lo < 1e-12 {
                    break;
                }
            }
            let w = 0.5 * (lo + hi);
            let (index, degenerate) = hessian_index(f, &[w]);
            points.push(CriticalPoint { w: vec![w], value: f.eval(&[w]), index, degenerate });
        } else if gx.abs() < prev_g.abs() && gx.abs() < step {
            // possible tangential root: polish from the small-|g| node
            if let Some(w) = newton(f, &[x], 40) {
                if w[0] >= a && w[0] <= b && !points.iter().any(|p| (p.w[0] - w[0]).abs() < 3.0 * step)
                {
                    let (index, degenerate) = hessian_index(f, &w);
                    points.push(CriticalPoint { w: w.clone(), value: f.eval(&w), index, degenerate });
                }
            } else {
                unresolved += 1;
            }
        }
        prev_x = x;
        prev_g = gx;
    }
    Ok(CriticalValueSet::from_points(points, unresolved))
}

/// Smallest `∥∇f∥` over the boundary shell of the box.
fn min_boundary_grad(f: &dyn FiberFunction, bx: &Rect, step: f64) -> f64 {
    let k = f.dim();
    let counts: Vec<usize> = (0..k)
        .map(|i| (crate::math::ceil((bx.hi[i] - bx.lo[i]) / (2.0 * step)) as usize).clamp(1, 40) + 1)
        .collect();
    let mut best = f64::INFINITY;
    for face_axis in 0..k {
        for &side in &[0usize, 1] {
            let mut idx = vec![0usize; k];
            loop {
                let w: Vec<f64> = (0..k)
                    .map(|i| {
                        if i == face_axis {
                            if side == 0 {
                                bx.lo[i]
                            } else {
                                bx.hi[i]
                            }
                        } else {
                            bx.lo[i]
                                + (bx.hi[i] - bx.lo[i]) * idx[i] as f64 / (counts[i] - 1).max(1) as f64
                        }
                    })
                    .collect();
                best = best.min(math::norm(&f.grad(&w)));
                let mut carry = true;
                for i in 0..k {
                    if i == face_axis {
                        continue;
                    }
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
        }
    }
    best
}

/// Min-max of an almost-simple fiber function with index `ι` and gradient
/// perturbation bound `B`.  The box must trap all critical points
/// (`∥∇f∥ > B` on its boundary, checked); index 0 and `k` use the global
/// min/max of the critical values, everything else the homology path.
pub fn minmax(
    f: &dyn FiberFunction,
    iota: usize,
    bound: f64,
    bx: &Rect,
    step: f64,
    field: Field,
) -> Result<f64> {
    let k = f.dim();
    if iota > k {
        return Err(Error::Range { what: "morse index", value: iota as f64 });
    }
    let shell = min_boundary_grad(f, bx, step);
    if shell <= bound {
        return Err(Error::BoxInsufficient(format!(
            "min boundary gradient {shell:.3e} does not exceed the perturbation bound {bound:.3e}"
        )));
    }
    let cvs = if k == 1 {
        critical_values_1d(f, bx, step)?
    } else {
        critical_points(f, bx, step)?
    };
    if cvs.values.is_empty() {
        return Err(Error::HomologyNotSimple("no critical values in the box".into()));
    }
    if iota == 0 {
        return Ok(cvs.min().unwrap());
    }
    if iota == k {
        return Ok(cvs.max().unwrap());
    }
    minmax_via_homology(f, iota, bx, step, field, &cvs)
}

/// The cubical-persistence path, usable directly as an oracle cross-check
/// for the fast paths.
pub fn minmax_via_homology(
    f: &dyn FiberFunction,
    iota: usize,
    bx: &Rect,
    step: f64,
    field: Field,
    cvs: &CriticalValueSet,
) -> Result<f64> {
    let k = f.dim();
    let cells: usize = (0..k)
        .map(|i| (crate::math::ceil((bx.hi[i] - bx.lo[i]) / step) as usize).clamp(4, 48))
        .max()
        .unwrap();
    let threshold = -cvs.bound_c;
    // when the box never reaches the deep sublevel set the pair degenerates
    // to absolute homology (the apex stays an isolated vertex, and its bar
    // is still the one dropped below)
    let out = cubical::build(f, bx, cells, threshold);
    let diagram = persistence::reduce(&out.complex, field);
    // drop the apex component (reduced homology of the coned complex)
    let mut essential: Vec<&Bar> = diagram.essential().collect();
    if let Some(apex_pos) = essential
        .iter()
        .enumerate()
        .filter(|(_, b)| b.degree == 0)
        .min_by(|a, b| a.1.birth.partial_cmp(&b.1.birth).unwrap())
        .map(|(i, _)| i)
    {
        essential.remove(apex_pos);
    }
    if essential.len() != 1 || essential[0].degree != iota {
        let pattern: Vec<String> = essential
            .iter()
            .map(|b| format!("deg {} at {:.4}", b.degree, b.birth))
            .collect();
        return Err(Error::HomologyNotSimple(format!(
            "essential pattern {:?} instead of one bar in degree {iota}; enlarge box or refine grid",
            pattern
        )));
    }
    let bar = essential[0];
    let raw = bar.birth;
    // snap the birth to the creating critical value: polish from the birth
    // cell's barycenter, fall back to the nearest enumerated critical value
    let cell_size = (0..k).map(|i| (bx.hi[i] - bx.lo[i]) / cells as f64).fold(0.0f64, f64::max);
    if let Some(Some(bary)) = out.barycenters.get(bar.creator) {
        if let Some(root) = newton(f, bary, 40) {
            if math::dist(&root, bary) <= 2.0 * cell_size * math::sqrt(k as f64) {
                return Ok(f.eval(&root));
            }
        }
    }
    let snap_tol = cell_size * math::sqrt(k as f64) * local_lipschitz(f, bx, cell_size);
    if let Some(&cv) = cvs
        .values
        .iter()
        .min_by(|a, b| (*a - raw).abs().partial_cmp(&(*b - raw).abs()).unwrap())
    {
        if (cv - raw).abs() <= snap_tol {
            return Ok(cv);
        }
    }
    Ok(raw)
}

/// Crude gradient-magnitude bound from a coarse probe of the box.
fn local_lipschitz(f: &dyn FiberFunction, bx: &Rect, step: f64) -> f64 {
    let k = f.dim();
    let mut best = 1.0f64;
    let mut idx = vec![0usize; k];
    let counts = vec![5usize; k];
    loop {
        let w: Vec<f64> = (0..k)
            .map(|i| bx.lo[i] + (bx.hi[i] - bx.lo[i]) * idx[i] as f64 / 4.0)
            .collect();
        best = best.max(math::norm(&f.grad(&w)));
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
    let _ = step;
    best
}

/// The selector curve `q ↦ s(F(q, ·))` over a 1-D base grid.
#[derive(Debug, Clone)]
pub struct SelectorCurve {
    pub q_grid: Vec<f64>,
    pub s_values: Vec<f64>,
    pub iota: usize,
    pub critical_values: Vec<CriticalValueSet>,
    /// Largest jump between adjacent nodes, and the continuity modulus it
    /// is checked against (`∥∇_q F∥` bound × step × 10).
    pub max_jump: f64,
    pub modulus: f64,
    pub continuity_ok: bool,
}

/// Compute the selector of a generating function over a `q`-grid.  The
/// fiber box is auto-expanded (≤ 3 times) until the boundary-gradient
/// precondition holds.  `index` overrides the tracked Morse index.
pub fn selector(
    expr: &GfExpr,
    q_grid: &[f64],
    fiber_box: &Rect,
    step: f64,
    field: Field,
    index: Option<usize>,
) -> Result<SelectorCurve> {
    if expr.base_dim() != 1 {
        return Err(Error::Unsupported("selector curves need a 1-D base".into()));
    }
    if expr.fiber_dim() == 0 || expr.fiber_dim() > 3 {
        return Err(Error::Unsupported("selector needs fiber dimension 1..=3".into()));
    }
    let meta = expr.as_meta();
    let iota = match index.or(meta.map(|m| m.iota)) {
        Some(i) => i,
        None => return Err(Error::IndexNotTracked),
    };
    let bound = meta.map(|m| m.bound).unwrap_or(0.0);
    let mut s_values = Vec::with_capacity(q_grid.len());
    let mut cvsets = Vec::with_capacity(q_grid.len());
    let mut grad_q_max = 0.0f64;
    for &q in q_grid {
        let fiber = ExprFiber { expr, q: vec![q] };
        let mut bx = fiber_box.clone();
        let mut attempts = 0;
        let s = loop {
            match minmax(&fiber, iota, bound, &bx, step, field) {
                Ok(s) => break s,
                Err(Error::BoxInsufficient(_)) | Err(Error::HomologyNotSimple(_))
                    if attempts < 3 =>
                {
                    attempts += 1;
                    bx = bx.scaled(1.5);
                }
                Err(e) => {
                    return Err(match e {
                        Error::HomologyNotSimple(msg) => {
                            Error::HomologyNotSimple(format!("at q = {q}: {msg}"))
                        }
                        other => other,
                    })
                }
            }
        };
        let cvs = if expr.fiber_dim() == 1 {
            critical_values_1d(&fiber, &bx, step)?
        } else {
            critical_points(&fiber, &bx, step)?
        };
        // the base-gradient at the selected critical point drives the
        // continuity modulus
        if let Some(p) = cvs.points.iter().min_by(|a, b| {
            (a.value - s).abs().partial_cmp(&(b.value - s).abs()).unwrap()
        }) {
            let gq = expr.grad(&[q], &p.w)?.0;
            grad_q_max = grad_q_max.max(math::norm(&gq));
        }
        s_values.push(s);
        cvsets.push(cvs);
    }
    let q_step = if q_grid.len() > 1 {
        q_grid.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0f64, f64::max)
    } else {
        0.0
    };
    let max_jump = s_values
        .windows(2)
        .map(|w| (w[1] - w[0]).abs())
        .fold(0.0f64, f64::max);
    let modulus = (grad_q_max + bound) * q_step * 10.0;
    Ok(SelectorCurve {
        q_grid: q_grid.to_vec(),
        s_values,
        iota,
        critical_values: cvsets,
        max_jump,
        modulus,
        continuity_ok: q_grid.len() < 2 || max_jump <= modulus,
    })
}

/// Comparison of `s(f₁ ⊕ f₂)` against `s(f₁) + s(f₂)`.
#[derive(Debug, Clone)]
pub struct DirectSumReport {
    pub sum_value: f64,
    pub parts_value: f64,
    pub gap: f64,
}

/// Check the direct-sum additivity of the min-max on two fiber functions.
#[allow(clippy::too_many_arguments)]
pub fn minmax_direct_sum_check(
    f1: &dyn FiberFunction,
    iota1: usize,
    bound1: f64,
    bx1: &Rect,
    f2: &dyn FiberFunction,
    iota2: usize,
    bound2: f64,
    bx2: &Rect,
    step: f64,
    field: Field,
) -> Result<DirectSumReport> {
    if f1.dim() + f2.dim() > 3 {
        return Err(Error::Unsupported("direct sum check needs total fiber dimension <= 3".into()));
    }
    let s1 = minmax(f1, iota1, bound1, bx1, step, field)?;
    let s2 = minmax(f2, iota2, bound2, bx2, step, field)?;
    let joined = DirectSumFiber { left: f1, right: f2 };
    let mut lo = bx1.lo.clone();
    lo.extend_from_slice(&bx2.lo);
    let mut hi = bx1.hi.clone();
    hi.extend_from_slice(&bx2.hi);
    let bx = Rect::new(lo, hi)?;
    // each factor's box already traps its own critical points, so the
    // product-box boundary only needs a nonvanishing gradient
    let sum_value = minmax(&joined, iota1 + iota2, 0.0, &bx, step, field)?;
    let parts_value = s1 + s2;
    Ok(DirectSumReport { sum_value, parts_value, gap: (sum_value - parts_value).abs() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ops;

    fn bump() -> ClosureFiber<impl Fn(&[f64]) -> f64 + Sync> {
        // -w^4 + 3w^2: max 9/4 at w = ±sqrt(3/2), min 0 at w = 0
        ClosureFiber::new(1, |w: &[f64]| -w[0].powi(4) + 3.0 * w[0] * w[0])
    }

    #[test]
    fn critical_values_of_the_bump() {
        let cvs = critical_values_1d(&bump(), &Rect::centered(1, 2.0), 0.05).unwrap();
        assert_eq!(cvs.values.len(), 2, "{:?}", cvs.values);
        assert!((cvs.values[0] - 0.0).abs() < 1e-9);
        assert!((cvs.values[1] - 2.25).abs() < 1e-9);
        assert_eq!(cvs.multiplicity[1], 2, "9/4 attained twice");
        assert_eq!(cvs.indices[1], vec![1, 1]);
    }

    #[test]
    fn critical_values_of_flipped_bump() {
        let f = ClosureFiber::new(1, |w: &[f64]| w[0].powi(4) - 3.0 * w[0] * w[0]);
        let cvs = critical_values_1d(&f, &Rect::centered(1, 2.0), 0.05).unwrap();
        assert_eq!(cvs.values.len(), 2);
        assert!((cvs.values[0] + 2.25).abs() < 1e-9);
        assert_eq!(cvs.multiplicity[0], 2);
        assert!((cvs.values[1] - 0.0).abs() < 1e-9);
    }

    #[test]
    fn minmax_fast_paths() {
        let parab = ClosureFiber::new(1, |w: &[f64]| w[0] * w[0]);
        let s = minmax(&parab, 0, 0.0, &Rect::centered(1, 2.0), 0.05, Field::Z2).unwrap();
        assert!(s.abs() < 1e-9, "min of w^2 is 0, got {s}");
        let s = minmax(&bump(), 1, 6.0, &Rect::centered(1, 3.0), 0.05, Field::Z2).unwrap();
        assert!((s - 2.25).abs() < 1e-9, "max of bump is 9/4, got {s}");
    }

    #[test]
    fn minmax_saddle_by_homology() {
        let saddle = ClosureFiber::new(2, |w: &[f64]| w[0] * w[0] - w[1] * w[1]);
        for field in [Field::Z2, Field::Q] {
            let s = minmax(&saddle, 1, 0.0, &Rect::centered(2, 2.5), 0.25, field).unwrap();
            assert!(s.abs() < 1e-8, "saddle value 0, got {s} over {field:?}");
        }
    }

    #[test]
    fn homology_path_agrees_with_fast_paths() {
        let parab = ClosureFiber::new(1, |w: &[f64]| w[0] * w[0] - 0.7);
        let bx = Rect::centered(1, 2.0);
        let cvs = critical_values_1d(&parab, &bx, 0.05).unwrap();
        let hom = minmax_via_homology(&parab, 0, &bx, 0.05, Field::Z2, &cvs).unwrap();
        assert!((hom - (-0.7)).abs() < 1e-8, "homology min {hom} vs -0.7");
        let bx = Rect::centered(1, 3.0);
        let cvs = critical_values_1d(&bump(), &bx, 0.05).unwrap();
        let hom = minmax_via_homology(&bump(), 1, &bx, 0.05, Field::Z2, &cvs).unwrap();
        assert!((hom - 2.25).abs() < 1e-8, "homology max {hom} vs 9/4");
    }

    #[test]
    fn box_insufficiency_is_reported() {
        // critical points of the bump at ±sqrt(1.5) sit outside [-1,1], and
        // the boundary gradient |g(±1)| = 2 does not clear the bound 6
        let r = minmax(&bump(), 1, 6.0, &Rect::centered(1, 1.0), 0.05, Field::Z2);
        assert!(matches!(r, Err(Error::BoxInsufficient(_))), "got {r:?}");
    }

    #[test]
    fn selector_of_transformed_shifted_parabola() {
        // F = T(q^2 + 3q): s(F)(q) = (q-3)^2/4
        let f = ops::transform_t(&GfExpr::poly1d(vec![0.0, 3.0, 1.0]));
        let qs: Vec<f64> = (0..21).map(|i| -2.0 + 0.3 * i as f64).collect();
        let c = selector(&f, &qs, &Rect::centered(1, 4.0), 0.05, Field::Z2, None).unwrap();
        for (q, s) in c.q_grid.iter().zip(&c.s_values) {
            let expect = (q - 3.0) * (q - 3.0) / 4.0;
            assert!((s - expect).abs() < 1e-6, "s({q}) = {s} vs {expect}");
        }
        assert!(c.continuity_ok, "jump {} vs modulus {}", c.max_jump, c.modulus);
    }

    #[test]
    fn selector_value_is_a_critical_value() {
        let f = ops::transform_t(&GfExpr::poly1d(vec![0.0, 0.0, -3.0, 0.0, 1.0]));
        let qs: Vec<f64> = (0..11).map(|i| -1.0 + 0.2 * i as f64).collect();
        let c = selector(&f, &qs, &Rect::centered(1, 2.2), 0.02, Field::Z2, None).unwrap();
        for i in 0..qs.len() {
            assert!(
                c.critical_values[i].contains(c.s_values[i], 1e-8),
                "s({}) = {} not among {:?}",
                qs[i],
                c.s_values[i],
                c.critical_values[i].values
            );
        }
        // at q = 0 the selector is the conjugate value sup(-v^4 + 3v^2) = 9/4
        let at0 = c.s_values[5];
        assert!((at0 - 2.25).abs() < 1e-8, "s(0) = {at0}");
    }

    #[test]
    fn selector_requires_tracked_index() {
        let cyl = ops::product_gf(
            &GfExpr::poly1d(vec![0.0]),
            &GfExpr::poly1d(vec![0.0, 0.0, 1.0]),
        );
        let f = ops::contour_gf(&cyl, &[0]).unwrap();
        let qs = [0.0, 0.5];
        let r = selector(&f, &qs, &Rect::centered(1, 2.0), 0.05, Field::Z2, None);
        assert!(matches!(r, Err(Error::IndexNotTracked)));
        // supplying the index unblocks it
        let c = selector(&f, &qs, &Rect::centered(1, 2.0), 0.05, Field::Z2, Some(0)).unwrap();
        assert_eq!(c.s_values.len(), 2);
    }

    #[test]
    fn direct_sum_additivity() {
        let up = ClosureFiber::new(1, |w: &[f64]| w[0] * w[0]);
        let down = ClosureFiber::new(1, |w: &[f64]| -w[0] * w[0]);
        let r = minmax_direct_sum_check(
            &up,
            0,
            0.0,
            &Rect::centered(1, 2.0),
            &down,
            1,
            0.0,
            &Rect::centered(1, 2.0),
            0.1,
            Field::Z2,
        )
        .unwrap();
        assert!(r.gap < 1e-8, "s(f1⊕f2) = {} vs {}", r.sum_value, r.parts_value);

        let r = minmax_direct_sum_check(
            &bump(),
            1,
            6.0,
            &Rect::centered(1, 3.0),
            &up,
            0,
            0.0,
            &Rect::centered(1, 2.0),
            0.1,
            Field::Z2,
        )
        .unwrap();
        assert!((r.sum_value - 2.25).abs() < 1e-7, "9/4 + 0 case: {r:?}");
        assert!(r.gap < 1e-7);
    }

    #[test]
    fn direct_sum_of_two_bumps_needs_a_genuine_saddle() {
        // iota = 2 on k = 2: essential bar in degree 2 at 9/2
        let r = minmax_direct_sum_check(
            &bump(),
            1,
            6.0,
            &Rect::centered(1, 3.0),
            &bump(),
            1,
            6.0,
            &Rect::centered(1, 3.0),
            0.1,
            Field::Z2,
        )
        .unwrap();
        assert!((r.sum_value - 4.5).abs() < 1e-7, "s = {}", r.sum_value);
        assert!(r.gap < 1e-7);
    }

    #[test]
    fn stabilization_leaves_the_selector_unchanged() {
        let f = ops::transform_t(&GfExpr::poly1d(vec![0.0, 3.0, 1.0]));
        let form = crate::expr::SymMatrix::diag(&[-1.0]);
        let stab = ops::stabilize(&f, form).unwrap();
        assert_eq!(stab.fiber_dim(), 2);
        let qs = [-1.0, 0.0, 1.5];
        let plain = selector(&f, &qs, &Rect::centered(1, 4.0), 0.05, Field::Z2, None).unwrap();
        let mut lo = Rect::centered(1, 4.0).lo;
        lo.push(-3.0);
        let mut hi = Rect::centered(1, 4.0).hi;
        hi.push(3.0);
        let bx = Rect::new(lo, hi).unwrap();
        let stabbed = selector(&stab, &qs, &bx, 0.1, Field::Z2, None).unwrap();
        for i in 0..qs.len() {
            assert!(
                (plain.s_values[i] - stabbed.s_values[i]).abs() < 1e-6,
                "q = {}: {} vs {}",
                qs[i],
                plain.s_values[i],
                stabbed.s_values[i]
            );
        }
    }
}
