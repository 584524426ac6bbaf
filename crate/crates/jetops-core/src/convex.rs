//! Discrete convex analysis on sampled 1-D functions.
//!
//! The conjugate `f*(p) = sup_v { pv − f(v) }` is computed over the sampled
//! window by a lower-convex-hull pass plus a monotone pointer (linear time),
//! with a brute-force quadratic oracle behind a flag.  Suprema attained at
//! the window edge are resolved against the declared tail model: pushed
//! beyond the window when the tail derivative reaches the slope, masked
//! `+∞` when it never does.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::{polyder, polyval, GridFunction, TailModel};

/// Requested uniform output grid.
#[derive(Debug, Clone, Copy)]
pub struct GridSpec {
    pub x0: f64,
    pub step: f64,
    pub count: usize,
}

impl GridSpec {
    pub fn covering(a: f64, b: f64, step: f64) -> Self {
        let count = crate::math::ceil((b - a) / step) as usize + 1;
        GridSpec { x0: a, step, count: count.max(2) }
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.step
    }
}

/// Conjugation algorithm choice; `Hull` is the default, `Brute` the oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConjMethod {
    Hull,
    Brute,
}

enum TailSup {
    /// Supremum over the ray, attained at the returned value.
    Finite(f64),
    /// The ray adds nothing beyond the window edge.
    None,
    /// The supremum over the ray diverges.
    Infinite,
}

/// Supremum of `p·x − T(x)` over the ray beyond `edge` (right if `right`).
fn tail_sup(tail: &[f64], edge: f64, p: f64, right: bool) -> TailSup {
    let der = polyder(tail);
    let slope_gap = |x: f64| {
        // derivative of p·x − T(x) along the outward direction
        let g = p - polyval(&der, x);
        if right {
            g
        } else {
            -g
        }
    };
    if slope_gap(edge) <= 1e-12 {
        return TailSup::None;
    }
    // march outward until the objective turns around
    let mut span = 1.0;
    let mut x1;
    loop {
        x1 = if right { edge + span } else { edge - span };
        if slope_gap(x1) < 0.0 {
            break;
        }
        span *= 2.0;
        if span > 1e8 {
            return TailSup::Infinite;
        }
    }
    let (mut lo, mut hi) = if right { (edge, x1) } else { (x1, edge) };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let g = p - polyval(&der, mid);
        if (g > 0.0) == right {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 * (1.0 + hi.abs()) {
            break;
        }
    }
    let x = 0.5 * (lo + hi);
    TailSup::Finite(p * x - polyval(tail, x))
}

/// Finite samples of a grid function as `(x, y)` pairs.
fn finite_samples(f: &GridFunction) -> Vec<(f64, f64)> {
    (0..f.len())
        .filter(|&i| f.is_finite_at(i))
        .map(|i| (f.x(i), f.values()[i]))
        .collect()
}

/// Lower convex hull of x-sorted samples (monotone chain).
fn lower_hull(pts: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(pts.len());
    for &p in pts {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            // keep turns that stay below the chord
            if (b.0 - a.0) * (p.1 - a.1) - (p.0 - a.0) * (b.1 - a.1) <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    hull
}

/// Legendre–Fenchel conjugate of a sampled function on the requested slope
/// grid.  Fails when the tail model is not in the convex regime
/// (`tail.index != 0`); entries whose supremum diverges are masked `+∞`.
pub fn lf_transform(f: &GridFunction, spec: &GridSpec, method: ConjMethod) -> Result<GridFunction> {
    if f.tail().index != 0 {
        return Err(Error::ConjugateNotFinite(format!(
            "tail index {} (concave tail): the conjugate is not finite-valued",
            f.tail().index
        )));
    }
    let pts = finite_samples(f);
    if pts.len() < 2 {
        return Err(Error::Arity("conjugation needs at least two finite samples".into()));
    }
    let (x_lo, x_hi) = (pts[0].0, pts[pts.len() - 1].0);
    let hull = lower_hull(&pts);
    let mut hull_cursor = 0usize;
    let mut values = vec![0.0; spec.count];
    let mut mask = vec![true; spec.count];
    for i in 0..spec.count {
        let p = spec.x(i);
        let (window_best, at_left_edge, at_right_edge) = match method {
            ConjMethod::Hull => {
                // advance while the next hull edge still improves p·x − y
                while hull_cursor + 1 < hull.len() {
                    let (x0, y0) = hull[hull_cursor];
                    let (x1, y1) = hull[hull_cursor + 1];
                    let edge_slope = (y1 - y0) / (x1 - x0);
                    if edge_slope <= p {
                        hull_cursor += 1;
                    } else {
                        break;
                    }
                }
                let (x, y) = hull[hull_cursor];
                (p * x - y, hull_cursor == 0, hull_cursor == hull.len() - 1)
            }
            ConjMethod::Brute => {
                let mut best = f64::NEG_INFINITY;
                let mut arg = 0usize;
                for (j, &(x, y)) in pts.iter().enumerate() {
                    let v = p * x - y;
                    if v > best {
                        best = v;
                        arg = j;
                    }
                }
                (best, arg == 0, arg == pts.len() - 1)
            }
        };
        let mut best = window_best;
        if at_right_edge {
            match tail_sup(&f.tail().coeffs, x_hi, p, true) {
                TailSup::Finite(v) => best = best.max(v),
                TailSup::Infinite => {
                    mask[i] = false;
                    continue;
                }
                TailSup::None => {}
            }
        }
        if at_left_edge {
            match tail_sup(&f.tail().coeffs, x_lo, p, false) {
                TailSup::Finite(v) => best = best.max(v),
                TailSup::Infinite => {
                    mask[i] = false;
                    continue;
                }
                TailSup::None => {}
            }
        }
        values[i] = best;
    }
    // note: the hull cursor only moves forward, so Hull mode requires the
    // slope grid increasing — GridSpec guarantees it (step > 0)
    let tail = conjugate_tail(&values, &mask, spec, x_lo, x_hi);
    GridFunction::new(spec.x0, spec.step, values, tail)?.with_mask(mask)
}

/// Linear continuation of the computed conjugate: beyond the slope window
/// the maximizer sticks to the corresponding window edge.
fn conjugate_tail(values: &[f64], mask: &[bool], spec: &GridSpec, _x_lo: f64, x_hi: f64) -> TailModel {
    let last = (0..values.len()).rev().find(|&i| mask[i]);
    match last {
        Some(i) => {
            let p = spec.x(i);
            TailModel::poly(vec![values[i] - x_hi * p, x_hi], 0)
        }
        None => TailModel::poly(vec![0.0], 0),
    }
}

/// Infimal convolution `(f₁ □ f₂)(q) = inf_v { f₁(v) + f₂(q−v) }`, brute
/// force over the finite samples of `f₁`.
pub fn inf_conv(f1: &GridFunction, f2: &GridFunction, spec: &GridSpec) -> Result<GridFunction> {
    let pts = finite_samples(f1);
    if pts.is_empty() {
        return Err(Error::Arity("infimal convolution needs finite samples".into()));
    }
    let mut values = vec![0.0; spec.count];
    let mut mask = vec![true; spec.count];
    for i in 0..spec.count {
        let q = spec.x(i);
        let mut best = f64::INFINITY;
        for &(v, y) in &pts {
            let other = f2.value(q - v);
            if other.is_finite() {
                best = best.min(y + other);
            }
        }
        if best.is_finite() {
            values[i] = best;
        } else {
            mask[i] = false;
        }
    }
    let tail = continuation_tail(&values, &mask, spec);
    GridFunction::new(spec.x0, spec.step, values, tail)?.with_mask(mask)
}

/// Convex fast path for the infimal convolution through the conjugate
/// identity `(f₁ □ f₂)* = f₁* + f₂*`.
pub fn inf_conv_fast(f1: &GridFunction, f2: &GridFunction, spec: &GridSpec) -> Result<GridFunction> {
    let (lo1, hi1) = f1.slope_range();
    let (lo2, hi2) = f2.slope_range();
    let lo = lo1.max(lo2);
    let hi = hi1.min(hi2);
    if !(hi > lo) {
        return Err(Error::Arity("slope ranges of the factors do not overlap".into()));
    }
    let p_spec = GridSpec::covering(lo, hi, (hi - lo) / (2.0 * (f1.len() + f2.len()) as f64));
    let c1 = lf_transform(f1, &p_spec, ConjMethod::Hull)?;
    let c2 = lf_transform(f2, &p_spec, ConjMethod::Hull)?;
    let mut sum_values = Vec::with_capacity(c1.len());
    let mut sum_mask = Vec::with_capacity(c1.len());
    for i in 0..c1.len() {
        sum_values.push(c1.values()[i] + c2.values()[i]);
        sum_mask.push(c1.is_finite_at(i) && c2.is_finite_at(i));
    }
    let tail = TailModel::poly(
        c1.tail().coeffs.iter().zip(&c2.tail().coeffs).map(|(a, b)| a + b).collect(),
        0,
    );
    let summed = GridFunction::new(p_spec.x0, p_spec.step, sum_values, tail)?.with_mask(sum_mask)?;
    lf_transform(&summed, spec, ConjMethod::Hull)
}

fn continuation_tail(values: &[f64], mask: &[bool], spec: &GridSpec) -> TailModel {
    let fin: Vec<usize> = (0..values.len()).filter(|&i| mask[i]).collect();
    if fin.len() < 2 {
        return TailModel::poly(vec![0.0], 0);
    }
    let (a, b) = (fin[fin.len() - 2], fin[fin.len() - 1]);
    let slope = (values[b] - values[a]) / ((b - a) as f64 * spec.step);
    TailModel::poly(vec![values[b] - slope * spec.x(b), slope], 0)
}

/// `f** = (f*)*`: the lower convex envelope of `f`, sampled back on `f`'s
/// own grid.
pub fn biconjugate(f: &GridFunction) -> Result<GridFunction> {
    let (lo, hi) = f.slope_range();
    let pad = 0.1 * (hi - lo).max(1.0);
    let p_spec = GridSpec::covering(lo - pad, hi + pad, (hi - lo + 2.0 * pad) / (4.0 * f.len() as f64));
    let conj = lf_transform(f, &p_spec, ConjMethod::Hull)?;
    let x_spec = GridSpec { x0: f.x0(), step: f.step(), count: f.len() };
    lf_transform(&conj, &x_spec, ConjMethod::Hull)
}

/// Evaluable Legendre transform `f^t(q) = q·g(q) − f(g(q))` of a simple
/// function, where `g = (f′)⁻¹` is found by monotone bisection.
#[derive(Debug, Clone)]
pub struct LegendreHandle {
    xs: Vec<f64>,
    values: Vec<f64>,
    derivs: Vec<f64>,
    increasing: bool,
}

impl LegendreHandle {
    /// Slope range covered by the handle.
    pub fn slope_domain(&self) -> (f64, f64) {
        if self.increasing {
            (self.derivs[0], *self.derivs.last().unwrap())
        } else {
            (*self.derivs.last().unwrap(), self.derivs[0])
        }
    }

    /// `(f′)⁻¹(q)` by bisection on the sampled derivative.
    pub fn grad_inverse(&self, q: f64) -> Result<f64> {
        let (lo, hi) = self.slope_domain();
        if q < lo || q > hi {
            return Err(Error::Range { what: "slope outside the sampled derivative range", value: q });
        }
        let cmp = |d: f64| if self.increasing { d < q } else { d > q };
        // binary search for the bracketing node interval
        let (mut a, mut b) = (0usize, self.derivs.len() - 1);
        while b - a > 1 {
            let m = (a + b) / 2;
            if cmp(self.derivs[m]) {
                a = m;
            } else {
                b = m;
            }
        }
        let (da, db) = (self.derivs[a], self.derivs[b]);
        let t = if (db - da).abs() < 1e-15 { 0.5 } else { (q - da) / (db - da) };
        Ok(self.xs[a] + t * (self.xs[b] - self.xs[a]))
    }

    /// `f^t(q) = q·v − f(v)` with `v = (f′)⁻¹(q)`.
    pub fn eval(&self, q: f64) -> Result<f64> {
        let v = self.grad_inverse(q)?;
        // interpolate f at v
        let i = self
            .xs
            .windows(2)
            .position(|w| v >= w[0] - 1e-12 && v <= w[1] + 1e-12)
            .unwrap_or(self.xs.len() - 2);
        let t = (v - self.xs[i]) / (self.xs[i + 1] - self.xs[i]);
        let fv = self.values[i] * (1.0 - t) + self.values[i + 1] * t;
        Ok(q * v - fv)
    }
}

/// Build the Legendre transform of a sampled simple function; rejects
/// non-monotone derivatives with a witness interval.  Boundary nodes are
/// dropped so the derivative comes from centered differences only, never
/// from the tail model.
pub fn legendre_simple(f: &GridFunction) -> Result<LegendreHandle> {
    if f.len() < 4 {
        return Err(Error::Arity("legendre transform needs at least four samples".into()));
    }
    let xs: Vec<f64> = (1..f.len() - 1).map(|i| f.x(i)).collect();
    let values: Vec<f64> = f.values()[1..f.len() - 1].to_vec();
    let derivs: Vec<f64> = (1..f.len() - 1)
        .map(|i| (f.values()[i + 1] - f.values()[i - 1]) / (2.0 * f.step()))
        .collect();
    build_handle(xs, values, derivs)
}

/// Legendre transform of a polynomial, sampled on `[a, b]`.
pub fn legendre_simple_poly(coeffs: &[f64], a: f64, b: f64, count: usize) -> Result<LegendreHandle> {
    let der = polyder(coeffs);
    let xs: Vec<f64> = (0..count)
        .map(|i| a + (b - a) * i as f64 / (count - 1).max(1) as f64)
        .collect();
    let values = xs.iter().map(|&x| polyval(coeffs, x)).collect();
    let derivs = xs.iter().map(|&x| polyval(&der, x)).collect();
    build_handle(xs, values, derivs)
}

fn build_handle(xs: Vec<f64>, values: Vec<f64>, derivs: Vec<f64>) -> Result<LegendreHandle> {
    let increasing = derivs[derivs.len() - 1] > derivs[0];
    for (i, w) in derivs.windows(2).enumerate() {
        let ok = if increasing { w[1] > w[0] } else { w[1] < w[0] };
        if !ok {
            return Err(Error::NotSimple { witness: (xs[i], xs[i + 1]) });
        }
    }
    Ok(LegendreHandle { xs, values, derivs, increasing })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math;

    fn quad_tail(a: f64) -> TailModel {
        TailModel::poly(vec![0.0, 0.0, a / 2.0], 0)
    }

    #[test]
    fn conjugate_of_quadratic() {
        // f = q^2 (a = 2) -> f* = q^2/4
        let f = GridFunction::sample(-4.0, 4.0, 0.01, |x| x * x, quad_tail(2.0)).unwrap();
        let spec = GridSpec::covering(-3.0, 3.0, 0.05);
        for method in [ConjMethod::Hull, ConjMethod::Brute] {
            let c = lf_transform(&f, &spec, method).unwrap();
            for i in 0..c.len() {
                let p = c.x(i);
                assert!(
                    (c.values()[i] - p * p / 4.0).abs() < 5.0 * 0.01,
                    "f*({p}) = {} vs {}",
                    c.values()[i],
                    p * p / 4.0
                );
            }
        }
    }

    #[test]
    fn conjugate_of_exponential_masks_negative_slopes() {
        // f = e^q on [-5, 5]: f*(q) = q(ln q - 1) on q > 0, +inf for q < 0
        let f = GridFunction::sample(-5.0, 5.0, 0.005, math::exp, TailModel::poly(vec![0.0], 0))
            .unwrap();
        let spec = GridSpec::covering(-1.0, 5.0, 0.05);
        let c = lf_transform(&f, &spec, ConjMethod::Hull).unwrap();
        for i in 0..c.len() {
            let p = c.x(i);
            if p < -1e-9 {
                assert!(!c.is_finite_at(i), "f*({p}) should be masked +inf");
            } else if p >= 0.1 && p <= 5.0 {
                let expect = p * (math::log(p) - 1.0);
                assert!(
                    (c.values()[i] - expect).abs() < 5.0 * 0.005,
                    "f*({p}) = {} vs {}",
                    c.values()[i],
                    expect
                );
            }
        }
    }

    #[test]
    fn conjugate_of_corner_function() {
        // f = (|v|-1)_+^2 -> f* = q^2/4 + |q|
        let f = GridFunction::sample(
            -6.0,
            6.0,
            0.005,
            |x| {
                let t = (x.abs() - 1.0).max(0.0);
                t * t
            },
            TailModel::poly(vec![1.0, -2.0, 1.0], 0),
        )
        .unwrap();
        let spec = GridSpec::covering(-3.0, 3.0, 0.05);
        let c = lf_transform(&f, &spec, ConjMethod::Hull).unwrap();
        for i in 0..c.len() {
            let p = c.x(i);
            let expect = p * p / 4.0 + p.abs();
            assert!(
                (c.values()[i] - expect).abs() < 5.0 * 0.005,
                "f*({p}) = {} vs {}",
                c.values()[i],
                expect
            );
        }
    }

    #[test]
    fn hull_and_brute_agree() {
        let f = GridFunction::sample(-3.0, 3.0, 0.01, |x| x.powi(4) - 3.0 * x * x, {
            TailModel::poly(vec![0.0, 0.0, -3.0, 0.0, 1.0], 0)
        })
        .unwrap();
        let spec = GridSpec::covering(-2.0, 2.0, 0.1);
        let a = lf_transform(&f, &spec, ConjMethod::Hull).unwrap();
        let b = lf_transform(&f, &spec, ConjMethod::Brute).unwrap();
        for i in 0..a.len() {
            assert!((a.values()[i] - b.values()[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn concave_tail_rejected() {
        let f = GridFunction::sample(-1.0, 1.0, 0.1, |x| -x * x, TailModel::poly(vec![0.0, 0.0, -1.0], 1))
            .unwrap();
        let spec = GridSpec::covering(-1.0, 1.0, 0.1);
        assert!(matches!(
            lf_transform(&f, &spec, ConjMethod::Hull),
            Err(Error::ConjugateNotFinite(_))
        ));
    }

    #[test]
    fn inf_conv_of_quadratics() {
        // a = b = 2: 1/c = 1/2 + 1/2 -> c = 1, result q^2/2
        let f = GridFunction::sample(-4.0, 4.0, 0.01, |x| x * x, quad_tail(2.0)).unwrap();
        let spec = GridSpec::covering(-2.0, 2.0, 0.05);
        let brute = inf_conv(&f, &f, &spec).unwrap();
        let fast = inf_conv_fast(&f, &f, &spec).unwrap();
        for i in 0..brute.len() {
            let q = brute.x(i);
            assert!(
                (brute.values()[i] - q * q / 2.0).abs() < 5.0 * 0.01,
                "brute (f□f)({q}) = {}",
                brute.values()[i]
            );
            assert!(
                (fast.values()[i] - brute.values()[i]).abs() < 5.0 * 0.01,
                "fast vs brute at {q}: {} vs {}",
                fast.values()[i],
                brute.values()[i]
            );
        }
    }

    #[test]
    fn conjugate_identity_for_inf_conv() {
        // (f1 □ f2)* = f1* + f2* on the overlap of finite regions
        let f1 = GridFunction::sample(-4.0, 4.0, 0.01, |x| x * x, quad_tail(2.0)).unwrap();
        let f2 = GridFunction::sample(-4.0, 4.0, 0.01, |x| 0.5 * x * x + x, {
            TailModel::poly(vec![0.0, 1.0, 0.5], 0)
        })
        .unwrap();
        // the window must be wide enough that every p in the slope grid has
        // its maximizer strictly inside
        let q_spec = GridSpec::covering(-4.0, 4.0, 0.02);
        let conv = inf_conv(&f1, &f2, &q_spec).unwrap();
        let p_spec = GridSpec::covering(-1.0, 1.0, 0.05);
        let lhs = lf_transform(&conv, &p_spec, ConjMethod::Hull).unwrap();
        let c1 = lf_transform(&f1, &p_spec, ConjMethod::Hull).unwrap();
        let c2 = lf_transform(&f2, &p_spec, ConjMethod::Hull).unwrap();
        for i in 0..lhs.len() {
            let rhs = c1.values()[i] + c2.values()[i];
            assert!(
                (lhs.values()[i] - rhs).abs() < 0.05,
                "identity off at p = {}: {} vs {}",
                lhs.x(i),
                lhs.values()[i],
                rhs
            );
        }
    }

    #[test]
    fn biconjugate_bridges_the_double_well() {
        let f = GridFunction::sample(-3.0, 3.0, 0.01, |x| x.powi(4) - 3.0 * x * x, {
            TailModel::poly(vec![0.0, 0.0, -3.0, 0.0, 1.0], 0)
        })
        .unwrap();
        let h = biconjugate(&f).unwrap();
        // hull is constant -9/4 between the minimizers ±sqrt(3/2)
        let at0 = h.value(0.0);
        assert!((at0 - (-2.25)).abs() < 5.0 * 0.01, "f**(0) = {at0} vs -9/4");
        // and equals f outside the bump (convex region)
        assert!((h.value(2.0) - (16.0 - 12.0)).abs() < 5.0 * 0.01);
    }

    #[test]
    fn biconjugate_of_convex_is_identity() {
        let f = GridFunction::sample(-2.0, 2.0, 0.01, |x| x * x + 0.5 * x, {
            TailModel::poly(vec![0.0, 0.5, 1.0], 0)
        })
        .unwrap();
        let h = biconjugate(&f).unwrap();
        for i in (1..f.len() - 1).step_by(7) {
            assert!(
                (h.values()[i] - f.values()[i]).abs() < 5.0 * 0.01,
                "f** vs f at {}: {} vs {}",
                f.x(i),
                h.values()[i],
                f.values()[i]
            );
        }
    }

    #[test]
    fn fenchel_young_with_equality_at_matched_slopes() {
        let f = GridFunction::sample(-3.0, 3.0, 0.01, |x| x * x, quad_tail(2.0)).unwrap();
        let spec = GridSpec::covering(-2.0, 2.0, 0.05);
        let c = lf_transform(&f, &spec, ConjMethod::Hull).unwrap();
        for i in (0..f.len()).step_by(13) {
            let v = f.x(i);
            for j in 0..c.len() {
                let p = c.x(j);
                let gap = f.values()[i] + c.values()[j] - p * v;
                assert!(gap > -1e-9, "Fenchel–Young violated at v={v}, p={p}: {gap}");
                if (p - 2.0 * v).abs() < 0.025 {
                    assert!(gap < 5.0 * 0.01 + 0.1 * 0.05, "equality case too loose: {gap}");
                }
            }
        }
    }

    #[test]
    fn legendre_of_shifted_quadratic() {
        // f = q^2 + 3q -> f^t(q) = (q-3)^2/4
        let h = legendre_simple_poly(&[0.0, 3.0, 1.0], -8.0, 8.0, 1601).unwrap();
        for i in 0..41 {
            let q = -2.0 + 0.2 * i as f64;
            let expect = (q - 3.0) * (q - 3.0) / 4.0;
            let got = h.eval(q).unwrap();
            assert!((got - expect).abs() < 1e-4, "f^t({q}) = {got} vs {expect}");
        }
        // gradient inversion: (f^t)'(q) = (f')^{-1}(q)
        let gi = h.grad_inverse(1.0).unwrap();
        assert!((gi - (-1.0)).abs() < 1e-6, "(f')^{{-1}}(1) = {gi} vs -1");
    }

    #[test]
    fn legendre_self_dual_quadratic() {
        let h = legendre_simple_poly(&[0.0, 0.0, 0.5], -5.0, 5.0, 1001).unwrap();
        for q in [-2.0, -0.5, 0.0, 1.0, 2.5] {
            assert!((h.eval(q).unwrap() - q * q / 2.0).abs() < 1e-5);
        }
    }

    #[test]
    fn legendre_rejects_non_simple() {
        // f = q^4 - 3q^2 has non-monotone derivative
        let r = legendre_simple_poly(&[0.0, 0.0, -3.0, 0.0, 1.0], -2.0, 2.0, 201);
        match r {
            Err(Error::NotSimple { witness }) => {
                assert!(witness.0 < witness.1);
            }
            other => panic!("expected NotSimple, got {other:?}"),
        }
    }

    #[test]
    fn legendre_of_exponential_from_grid() {
        let f = GridFunction::sample(0.001, 5.0, 0.001, math::exp, {
            // tail only used at the window edges for derivative estimates
            TailModel::poly(vec![1.0, 1.0, 0.5, 1.0 / 6.0], 0)
        })
        .unwrap();
        let h = legendre_simple(&f).unwrap();
        // query slopes inside the sampled derivative range [e^0.001, e^5)
        for q in [1.5, 2.0, 5.0, 20.0, 100.0] {
            let expect = q * (math::log(q) - 1.0);
            let got = h.eval(q).unwrap();
            assert!((got - expect).abs() < 5e-3, "f^t({q}) = {got} vs {expect}");
        }
    }
}
