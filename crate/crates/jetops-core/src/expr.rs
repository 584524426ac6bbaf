//! Expression model for generating functions `F(q, w)`.
//!
//! A [`GfExpr`] is an immutable tree over a small closed-form base set
//! (polynomials of the base variable, quadratic forms of fiber variables,
//! grid-sampled functions with a declared tail model), closed under the
//! combinators that realise the geometric operations on Legendrian
//! submanifolds.  Evaluation and gradients are exact by structural recursion;
//! the almost-simple decomposition (simple part, gradient bound, Morse index)
//! is tracked structurally where possible.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::{polydeg, polyder, polyval, GridFunction};
use crate::math;

/// Axis-aligned box in ℝᵈ, used for fiber boxes and scan windows.
#[derive(Debug, Clone, PartialEq)]
pub struct Rect {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Rect {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch { expected: lo.len(), got: hi.len(), what: "box" });
        }
        for (a, b) in lo.iter().zip(&hi) {
            if !(b > a) {
                return Err(Error::Range { what: "box extent", value: b - a });
            }
        }
        Ok(Rect { lo, hi })
    }

    /// The cube `[-r, r]^dim`.
    pub fn centered(dim: usize, r: f64) -> Self {
        Rect { lo: vec![-r; dim], hi: vec![r; dim] }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(v, (a, b))| *v >= *a - 1e-12 && *v <= *b + 1e-12)
    }

    /// Grow every side by the factor `s` about the center.
    pub fn scaled(&self, s: f64) -> Self {
        let lo = self
            .lo
            .iter()
            .zip(&self.hi)
            .map(|(a, b)| 0.5 * (a + b) - 0.5 * s * (b - a))
            .collect();
        let hi = self
            .lo
            .iter()
            .zip(&self.hi)
            .map(|(a, b)| 0.5 * (a + b) + 0.5 * s * (b - a))
            .collect();
        Rect { lo, hi }
    }
}

/// Dense symmetric matrix of small dimension (quadratic forms, Hessians).
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    data: Vec<f64>, // row-major, dim*dim
}

impl SymMatrix {
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, got: data.len(), what: "matrix data" });
        }
        for i in 0..dim {
            for j in 0..i {
                if (data[i * dim + j] - data[j * dim + i]).abs() > 1e-12 {
                    return Err(Error::Arity("matrix is not symmetric".into()));
                }
            }
        }
        Ok(SymMatrix { dim, data })
    }

    pub fn diag(entries: &[f64]) -> Self {
        let dim = entries.len();
        let mut data = vec![0.0; dim * dim];
        for (i, &e) in entries.iter().enumerate() {
            data[i * dim + i] = e;
        }
        SymMatrix { dim, data }
    }

    /// The standard hyperbolic form `diag(+1, -1)` in two fresh variables.
    pub fn hyperbolic() -> Self {
        SymMatrix::diag(&[1.0, -1.0])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    /// `zᵀ A z`.
    pub fn quad(&self, z: &[f64]) -> f64 {
        let mut s = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                s += z[i] * self.data[i * self.dim + j] * z[j];
            }
        }
        s
    }

    /// Gradient `2 A z` of the quadratic form.
    pub fn quad_grad(&self, z: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|i| 2.0 * (0..self.dim).map(|j| self.data[i * self.dim + j] * z[j]).sum::<f64>())
            .collect()
    }

    /// Eigenvalues by cyclic Jacobi rotations.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let n = self.dim;
        let mut a = self.data.clone();
        for _sweep in 0..64 {
            let mut off = 0.0;
            for i in 0..n {
                for j in (i + 1)..n {
                    off += a[i * n + j] * a[i * n + j];
                }
            }
            if off < 1e-24 {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[p * n + q];
                    if apq.abs() < 1e-15 {
                        continue;
                    }
                    let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                    let t = if theta >= 0.0 {
                        1.0 / (theta + math::sqrt(1.0 + theta * theta))
                    } else {
                        -1.0 / (-theta + math::sqrt(1.0 + theta * theta))
                    };
                    let c = 1.0 / math::sqrt(1.0 + t * t);
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[k * n + p];
                        let akq = a[k * n + q];
                        a[k * n + p] = c * akp - s * akq;
                        a[k * n + q] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[p * n + k];
                        let aqk = a[q * n + k];
                        a[p * n + k] = c * apk - s * aqk;
                        a[q * n + k] = s * apk + c * aqk;
                    }
                }
            }
        }
        (0..n).map(|i| a[i * n + i]).collect()
    }

    /// Number of negative eigenvalues (the index of the form).
    pub fn negative_index(&self) -> usize {
        self.eigenvalues().iter().filter(|&&l| l < 0.0).count()
    }

    pub fn is_nondegenerate(&self) -> bool {
        self.eigenvalues().iter().all(|l| l.abs() > 1e-9)
    }
}

/// A named linear fiber-preserving change of variables from the fixed
/// catalog (negation of one variable, the sum/convolution shuffle, …).
#[derive(Debug, Clone, PartialEq)]
pub struct FiberMap {
    name: String,
    dim: usize,
    forward: Vec<f64>, // row-major dim*dim, w' = M w
    inverse: Vec<f64>,
}

impl FiberMap {
    pub fn new(name: impl Into<String>, dim: usize, forward: Vec<f64>, inverse: Vec<f64>) -> Result<Self> {
        if forward.len() != dim * dim || inverse.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, got: forward.len(), what: "fiber map" });
        }
        let m = FiberMap { name: name.into(), dim, forward, inverse };
        // round-trip sanity on the basis vectors
        for i in 0..dim {
            let mut e = vec![0.0; dim];
            e[i] = 1.0;
            let r = m.apply_inverse(&m.apply(&e));
            if math::dist(&r, &e) > 1e-9 {
                return Err(Error::Arity(format!("fiber map {} has an inconsistent inverse", m.name)));
            }
        }
        Ok(m)
    }

    /// Negation of variable `i` among `dim`.
    pub fn negate_var(dim: usize, i: usize) -> Self {
        let mut fwd = vec![0.0; dim * dim];
        for j in 0..dim {
            fwd[j * dim + j] = if j == i { -1.0 } else { 1.0 };
        }
        FiberMap { name: format!("negate#{i}"), dim, forward: fwd.clone(), inverse: fwd }
    }

    /// The shuffle `φ⁻¹(v₁,w₁,v₂,w₂) = (v₁+v₂, v₁, w₁, w₂)` used to identify
    /// the sum-of-transforms with the transform-of-convolution; block sizes
    /// are those of the two transform factors.
    pub fn sum_conv_shuffle(n: usize, k1: usize, k2: usize) -> Self {
        // source order: [v1(n), w1(k1), v2(n), w2(k2)]
        // target order: [V(n), v(n), w1(k1), w2(k2)] with V=v1+v2, v=v1
        let dim = 2 * n + k1 + k2;
        let mut fwd = vec![0.0; dim * dim];
        let mut inv = vec![0.0; dim * dim];
        for i in 0..n {
            let v1 = i;
            let w1_off = n;
            let v2 = n + k1 + i;
            fwd[i * dim + v1] = 1.0; // V_i = v1_i + v2_i
            fwd[i * dim + v2] = 1.0;
            fwd[(n + i) * dim + v1] = 1.0; // v_i = v1_i
            let _ = w1_off;
            inv[v1 * dim + (n + i)] = 1.0; // v1_i = v_i
            inv[v2 * dim + i] = 1.0; // v2_i = V_i - v_i
            inv[v2 * dim + (n + i)] = -1.0;
        }
        for j in 0..k1 {
            // w1: source slot n+j, target slot 2n+j
            fwd[(2 * n + j) * dim + (n + j)] = 1.0;
            inv[(n + j) * dim + (2 * n + j)] = 1.0;
        }
        for j in 0..k2 {
            // w2: slot 2n+k1+j on both sides
            fwd[(2 * n + k1 + j) * dim + (2 * n + k1 + j)] = 1.0;
            inv[(2 * n + k1 + j) * dim + (2 * n + k1 + j)] = 1.0;
        }
        FiberMap { name: format!("sum-conv-shuffle(n={n})"), dim, forward: fwd, inverse: inv }
    }

    /// The same diffeomorphism read in the opposite direction.
    pub fn inverted(self) -> Self {
        FiberMap {
            name: format!("{}^-1", self.name),
            dim: self.dim,
            forward: self.inverse,
            inverse: self.forward,
        }
    }

    /// Permutation sending source slot `i` to target slot `perm[i]`.
    pub fn permutation(name: impl Into<String>, perm: &[usize]) -> Self {
        let dim = perm.len();
        let mut fwd = vec![0.0; dim * dim];
        let mut inv = vec![0.0; dim * dim];
        for (i, &p) in perm.iter().enumerate() {
            fwd[p * dim + i] = 1.0;
            inv[i * dim + p] = 1.0;
        }
        FiberMap { name: name.into(), dim, forward: fwd, inverse: inv }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn apply(&self, w: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.forward[i * self.dim + j] * w[j]).sum())
            .collect()
    }

    pub fn apply_inverse(&self, w: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.inverse[i * self.dim + j] * w[j]).sum())
            .collect()
    }

    /// `Mᵀ g`, the pull-back of a gradient.
    pub fn apply_transpose(&self, g: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|j| (0..self.dim).map(|i| self.forward[i * self.dim + j] * g[i]).sum())
            .collect()
    }

    /// Conservative operator-norm bound (Frobenius).
    pub fn norm_bound(&self) -> f64 {
        math::sqrt(self.forward.iter().map(|x| x * x).sum())
    }
}

/// Almost-simple decomposition metadata tracked per expression: the Morse
/// index `ι` of the fiber functions `F(q,·)`, the index of the simple model
/// viewed jointly in all `(q,w)` variables (when meaningful), and a
/// conservative bound on the gradient of the bounded part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsMeta {
    pub iota: usize,
    pub joint: Option<usize>,
    pub bound: f64,
}

/// Result of [`GfExpr::as_decomposition`]: simple part handle, gradient
/// bound and fiber Morse index.
#[derive(Debug, Clone)]
pub struct AsDecomposition {
    pub simple: GfExpr,
    pub bound: f64,
    pub index: usize,
}

#[derive(Debug, Clone)]
pub(crate) enum GfNode {
    Poly1d { coeffs: Vec<f64> },
    /// `Σ qᵢ q_{n+i}` on `2n` base variables, no fiber: the pairing that
    /// underlies the transform written as a closed form of the base alone.
    BasePairing { n: usize },
    QuadraticForm { form: SymMatrix },
    SampledTail { grid: GridFunction },
    TransformT { child: Arc<GfExpr> },
    Slice { child: Arc<GfExpr>, kept: Vec<usize> },
    Contour { child: Arc<GfExpr>, kept: Vec<usize> },
    Product { left: Arc<GfExpr>, right: Arc<GfExpr> },
    SumOp { left: Arc<GfExpr>, right: Arc<GfExpr> },
    Convolution { left: Arc<GfExpr>, right: Arc<GfExpr> },
    Stabilize { child: Arc<GfExpr>, form: SymMatrix },
    FiberDiffeo { child: Arc<GfExpr>, map: FiberMap },
    PathBlend { left: Arc<GfExpr>, right: Arc<GfExpr>, t: f64 },
}

/// A generating function `F(q, w)` with `base_dim` base variables and
/// `fiber_dim` fiber variables, immutable after construction.
#[derive(Debug, Clone)]
pub struct GfExpr {
    pub(crate) node: GfNode,
    pub(crate) base_dim: usize,
    pub(crate) fiber_dim: usize,
    pub(crate) fiber_names: Vec<String>,
    pub(crate) as_meta: Option<AsMeta>,
}

/// Rename later duplicates until all names are distinct.
pub(crate) fn uniquify(names: Vec<String>) -> Vec<String> {
    let mut out: Vec<String> = Vec::with_capacity(names.len());
    for mut n in names {
        while out.contains(&n) {
            n.push('\'');
        }
        out.push(n);
    }
    out
}

/// Backtracking amplitude of a scalar derivative `d` over `[-r, r]`: how far
/// `d` moves against the declared monotone direction.  This bounds the
/// gradient of the non-simple remainder of an almost-simple 1-D function.
fn derivative_backtrack(d: impl Fn(f64) -> f64, increasing: bool, r: f64) -> f64 {
    let samples = 4801;
    let step = 2.0 * r / (samples - 1) as f64;
    let mut extreme = f64::NEG_INFINITY;
    let mut worst: f64 = 0.0;
    for i in 0..samples {
        let x = -r + i as f64 * step;
        let v = if increasing { d(x) } else { -d(x) };
        extreme = extreme.max(v);
        worst = worst.max(extreme - v);
    }
    worst
}

fn poly_meta(coeffs: &[f64]) -> Option<AsMeta> {
    let deg = polydeg(coeffs);
    if deg <= 1 {
        // pure bounded perturbation; degenerate but harmless as a summand
        return Some(AsMeta { iota: 0, joint: Some(0), bound: coeffs.get(1).copied().unwrap_or(0.0).abs() });
    }
    if deg % 2 != 0 {
        return None;
    }
    let leading = coeffs[deg];
    let der = polyder(coeffs);
    if leading > 0.0 {
        let b = derivative_backtrack(|x| polyval(&der, x), true, 12.0);
        Some(AsMeta { iota: 0, joint: Some(0), bound: b })
    } else {
        let b = derivative_backtrack(|x| polyval(&der, x), false, 12.0);
        Some(AsMeta { iota: 0, joint: Some(1), bound: b })
    }
}

impl GfExpr {
    // ---- leaf constructors ----------------------------------------------

    /// Polynomial of the single base variable, `coeffs[i]` multiplying `qⁱ`.
    pub fn poly1d(coeffs: Vec<f64>) -> GfExpr {
        let as_meta = poly_meta(&coeffs);
        GfExpr {
            node: GfNode::Poly1d { coeffs },
            base_dim: 1,
            fiber_dim: 0,
            fiber_names: Vec::new(),
            as_meta,
        }
    }

    /// The bilinear pairing `Σ qᵢ q_{n+i}` of `2n` base variables.
    pub fn base_pairing(n: usize) -> GfExpr {
        GfExpr {
            node: GfNode::BasePairing { n },
            base_dim: 2 * n,
            fiber_dim: 0,
            fiber_names: Vec::new(),
            as_meta: None,
        }
    }

    /// Quadratic form `wᵀ A w` of `k` fresh fiber variables, no base variable.
    pub fn quadratic_form(form: SymMatrix) -> GfExpr {
        let k = form.dim();
        let meta = if form.is_nondegenerate() {
            let neg = form.negative_index();
            Some(AsMeta { iota: neg, joint: Some(neg), bound: 0.0 })
        } else {
            None
        };
        GfExpr {
            node: GfNode::QuadraticForm { form },
            base_dim: 0,
            fiber_dim: k,
            fiber_names: (0..k).map(|i| format!("z{i}")).collect(),
            as_meta: meta,
        }
    }

    /// Grid-sampled function of one base variable with its declared tail.
    pub fn sampled_tail(grid: GridFunction) -> GfExpr {
        let tail = grid.tail().clone();
        let meta = {
            let deg = polydeg(&tail.coeffs);
            if deg >= 2 && deg % 2 == 0 {
                let increasing = tail.index == 0;
                let g = grid.clone();
                let b = derivative_backtrack(|x| g.derivative(x), increasing, g.xmax().abs().max(g.x0().abs()));
                Some(AsMeta { iota: 0, joint: Some(tail.index), bound: b })
            } else {
                None
            }
        };
        GfExpr {
            node: GfNode::SampledTail { grid },
            base_dim: 1,
            fiber_dim: 0,
            fiber_names: Vec::new(),
            as_meta: meta,
        }
    }

    /// Override the tracked Morse index (for constructions such as contour
    /// where structural tracking gives up).  The joint index is cleared.
    pub fn with_fiber_index(mut self, iota: usize, bound: f64) -> Result<GfExpr> {
        if iota > self.fiber_dim {
            return Err(Error::Range { what: "morse index", value: iota as f64 });
        }
        self.as_meta = Some(AsMeta { iota, joint: None, bound });
        Ok(self)
    }

    /// Override the index together with a joint index claim (the function
    /// is a bounded perturbation of a simple one with that joint index).
    pub fn with_joint_index(mut self, iota: usize, joint: usize, bound: f64) -> Result<GfExpr> {
        if iota > self.fiber_dim {
            return Err(Error::Range { what: "morse index", value: iota as f64 });
        }
        self.as_meta = Some(AsMeta { iota, joint: Some(joint), bound });
        Ok(self)
    }

    // ---- accessors -------------------------------------------------------

    pub fn base_dim(&self) -> usize {
        self.base_dim
    }

    pub fn fiber_dim(&self) -> usize {
        self.fiber_dim
    }

    pub fn fiber_names(&self) -> &[String] {
        &self.fiber_names
    }

    pub fn as_meta(&self) -> Option<AsMeta> {
        self.as_meta
    }

    // ---- evaluation ------------------------------------------------------

    pub fn eval(&self, q: &[f64], w: &[f64]) -> Result<f64> {
        self.check_dims(q, w)?;
        Ok(self.eval_unchecked(q, w))
    }

    pub fn grad(&self, q: &[f64], w: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        self.check_dims(q, w)?;
        Ok(self.grad_unchecked(q, w))
    }

    fn check_dims(&self, q: &[f64], w: &[f64]) -> Result<()> {
        if q.len() != self.base_dim {
            return Err(Error::DimensionMismatch { expected: self.base_dim, got: q.len(), what: "base point q" });
        }
        if w.len() != self.fiber_dim {
            return Err(Error::DimensionMismatch { expected: self.fiber_dim, got: w.len(), what: "fiber point w" });
        }
        Ok(())
    }

    pub(crate) fn eval_unchecked(&self, q: &[f64], w: &[f64]) -> f64 {
        match &self.node {
            GfNode::Poly1d { coeffs } => polyval(coeffs, q[0]),
            GfNode::BasePairing { n } => math::dot(&q[..*n], &q[*n..]),
            GfNode::QuadraticForm { form } => form.quad(w),
            GfNode::SampledTail { grid } => grid.value(q[0]),
            GfNode::TransformT { child } => {
                let n = child.base_dim;
                let (v, wc) = w.split_at(n);
                math::dot(q, v) - child.eval_unchecked(v, wc)
            }
            GfNode::Slice { child, kept } => {
                let mut qf = vec![0.0; child.base_dim];
                for (i, &ki) in kept.iter().enumerate() {
                    qf[ki] = q[i];
                }
                child.eval_unchecked(&qf, w)
            }
            GfNode::Contour { child, kept } => {
                let demoted = complement(kept, child.base_dim);
                let mut qf = vec![0.0; child.base_dim];
                for (i, &ki) in kept.iter().enumerate() {
                    qf[ki] = q[i];
                }
                for (j, &dj) in demoted.iter().enumerate() {
                    qf[dj] = w[j];
                }
                child.eval_unchecked(&qf, &w[demoted.len()..])
            }
            GfNode::Product { left, right } => {
                let (q1, q2) = q.split_at(left.base_dim);
                let (w1, w2) = w.split_at(left.fiber_dim);
                left.eval_unchecked(q1, w1) + right.eval_unchecked(q2, w2)
            }
            GfNode::SumOp { left, right } => {
                let (w1, w2) = w.split_at(left.fiber_dim);
                left.eval_unchecked(q, w1) + right.eval_unchecked(q, w2)
            }
            GfNode::Convolution { left, right } => {
                let n = self.base_dim;
                let (v, rest) = w.split_at(n);
                let (w1, w2) = rest.split_at(left.fiber_dim);
                let qmv: Vec<f64> = q.iter().zip(v).map(|(a, b)| a - b).collect();
                left.eval_unchecked(v, w1) + right.eval_unchecked(&qmv, w2)
            }
            GfNode::Stabilize { child, form } => {
                let (wc, z) = w.split_at(child.fiber_dim);
                child.eval_unchecked(q, wc) + form.quad(z)
            }
            GfNode::FiberDiffeo { child, map } => {
                let wi = map.apply(w);
                child.eval_unchecked(q, &wi)
            }
            GfNode::PathBlend { left, right, t } => {
                let n = self.base_dim;
                let (v, rest) = w.split_at(n);
                let (vp, rest) = rest.split_at(n);
                let (cap_v, rest) = rest.split_at(n);
                let (w1, w2) = rest.split_at(left.fiber_dim);
                let s: Vec<f64> = v.iter().zip(vp).map(|(a, b)| (1.0 - t) * a + t * b).collect();
                let vpmv: Vec<f64> = vp.iter().zip(v).map(|(a, b)| a - b).collect();
                math::dot(q, v) - (left.eval_unchecked(&s, w1) + right.eval_unchecked(v, w2))
                    + math::dot(cap_v, &vpmv)
            }
        }
    }

    pub(crate) fn grad_unchecked(&self, q: &[f64], w: &[f64]) -> (Vec<f64>, Vec<f64>) {
        match &self.node {
            GfNode::Poly1d { coeffs } => (vec![polyval(&polyder(coeffs), q[0])], Vec::new()),
            GfNode::BasePairing { n } => {
                let mut gq: Vec<f64> = q[*n..].to_vec();
                gq.extend_from_slice(&q[..*n]);
                (gq, Vec::new())
            }
            GfNode::QuadraticForm { form } => (Vec::new(), form.quad_grad(w)),
            GfNode::SampledTail { grid } => (vec![grid.derivative(q[0])], Vec::new()),
            GfNode::TransformT { child } => {
                let n = child.base_dim;
                let (v, wc) = w.split_at(n);
                let (gq_c, gw_c) = child.grad_unchecked(v, wc);
                let gq = v.to_vec();
                let mut gw: Vec<f64> = q.iter().zip(&gq_c).map(|(a, b)| a - b).collect();
                gw.extend(gw_c.iter().map(|g| -g));
                (gq, gw)
            }
            GfNode::Slice { child, kept } => {
                let mut qf = vec![0.0; child.base_dim];
                for (i, &ki) in kept.iter().enumerate() {
                    qf[ki] = q[i];
                }
                let (gq_c, gw_c) = child.grad_unchecked(&qf, w);
                (kept.iter().map(|&ki| gq_c[ki]).collect(), gw_c)
            }
            GfNode::Contour { child, kept } => {
                let demoted = complement(kept, child.base_dim);
                let mut qf = vec![0.0; child.base_dim];
                for (i, &ki) in kept.iter().enumerate() {
                    qf[ki] = q[i];
                }
                for (j, &dj) in demoted.iter().enumerate() {
                    qf[dj] = w[j];
                }
                let (gq_c, gw_c) = child.grad_unchecked(&qf, &w[demoted.len()..]);
                let gq = kept.iter().map(|&ki| gq_c[ki]).collect();
                let mut gw: Vec<f64> = demoted.iter().map(|&dj| gq_c[dj]).collect();
                gw.extend(gw_c);
                (gq, gw)
            }
            GfNode::Product { left, right } => {
                let (q1, q2) = q.split_at(left.base_dim);
                let (w1, w2) = w.split_at(left.fiber_dim);
                let (mut gq, mut gw) = left.grad_unchecked(q1, w1);
                let (gq2, gw2) = right.grad_unchecked(q2, w2);
                gq.extend(gq2);
                gw.extend(gw2);
                (gq, gw)
            }
            GfNode::SumOp { left, right } => {
                let (w1, w2) = w.split_at(left.fiber_dim);
                let (gq1, mut gw) = left.grad_unchecked(q, w1);
                let (gq2, gw2) = right.grad_unchecked(q, w2);
                gw.extend(gw2);
                (gq1.iter().zip(&gq2).map(|(a, b)| a + b).collect(), gw)
            }
            GfNode::Convolution { left, right } => {
                let n = self.base_dim;
                let (v, rest) = w.split_at(n);
                let (w1, w2) = rest.split_at(left.fiber_dim);
                let qmv: Vec<f64> = q.iter().zip(v).map(|(a, b)| a - b).collect();
                let (gq1, gw1) = left.grad_unchecked(v, w1);
                let (gq2, gw2) = right.grad_unchecked(&qmv, w2);
                let mut gw: Vec<f64> = gq1.iter().zip(&gq2).map(|(a, b)| a - b).collect();
                gw.extend(gw1);
                gw.extend(gw2);
                (gq2, gw)
            }
            GfNode::Stabilize { child, form } => {
                let (wc, z) = w.split_at(child.fiber_dim);
                let (gq, mut gw) = child.grad_unchecked(q, wc);
                gw.extend(form.quad_grad(z));
                (gq, gw)
            }
            GfNode::FiberDiffeo { child, map } => {
                let wi = map.apply(w);
                let (gq, gw_c) = child.grad_unchecked(q, &wi);
                (gq, map.apply_transpose(&gw_c))
            }
            GfNode::PathBlend { left, right, t } => {
                let n = self.base_dim;
                let (v, rest) = w.split_at(n);
                let (vp, rest) = rest.split_at(n);
                let (cap_v, rest) = rest.split_at(n);
                let (w1, w2) = rest.split_at(left.fiber_dim);
                let s: Vec<f64> = v.iter().zip(vp).map(|(a, b)| (1.0 - t) * a + t * b).collect();
                let (g1q, g1w) = left.grad_unchecked(&s, w1);
                let (g2q, g2w) = right.grad_unchecked(v, w2);
                let gq = v.to_vec();
                let mut gw = Vec::with_capacity(self.fiber_dim);
                for i in 0..n {
                    gw.push(q[i] - (1.0 - t) * g1q[i] - g2q[i] - cap_v[i]);
                }
                for i in 0..n {
                    gw.push(-t * g1q[i] + cap_v[i]);
                }
                for i in 0..n {
                    gw.push(vp[i] - v[i]);
                }
                gw.extend(g1w.iter().map(|g| -g));
                gw.extend(g2w.iter().map(|g| -g));
                (gq, gw)
            }
        }
    }

    /// Gradient of the fiber part only, at fixed base point.
    pub fn grad_w(&self, q: &[f64], w: &[f64]) -> Result<Vec<f64>> {
        Ok(self.grad(q, w)?.1)
    }

    // ---- almost-simple decomposition ------------------------------------

    /// Structurally tracked almost-simple decomposition `F = G + H` with
    /// `‖∇H‖ ≤ B` and the Morse index of the simple part's fiber functions.
    ///
    /// When the index was supplied by the caller rather than tracked, the
    /// simple handle falls back to the expression itself.
    pub fn as_decomposition(&self) -> Result<AsDecomposition> {
        let meta = self.as_meta.ok_or(Error::IndexNotTracked)?;
        let simple = self.simple_part().unwrap_or_else(|| self.clone());
        Ok(AsDecomposition { simple, bound: meta.bound, index: meta.iota })
    }

    fn simple_part(&self) -> Option<GfExpr> {
        match &self.node {
            GfNode::Poly1d { coeffs } => {
                let deg = polydeg(coeffs);
                if deg >= 2 && deg % 2 == 0 {
                    let mut c = vec![0.0; deg + 1];
                    c[deg] = coeffs[deg];
                    Some(GfExpr::poly1d(c))
                } else if deg <= 1 {
                    Some(GfExpr::poly1d(vec![0.0]))
                } else {
                    None
                }
            }
            GfNode::BasePairing { .. } => None,
            GfNode::QuadraticForm { .. } => Some(self.clone()),
            GfNode::SampledTail { grid } => {
                let tail = grid.tail();
                if polydeg(&tail.coeffs) >= 2 {
                    Some(GfExpr::poly1d(tail.coeffs.clone()))
                } else {
                    None
                }
            }
            GfNode::TransformT { child } => Some(GfExpr {
                node: GfNode::TransformT { child: Arc::new(child.simple_part()?) },
                ..self.clone()
            }),
            GfNode::Slice { child, kept } => Some(GfExpr {
                node: GfNode::Slice { child: Arc::new(child.simple_part()?), kept: kept.clone() },
                ..self.clone()
            }),
            GfNode::Contour { .. } => None,
            GfNode::Product { left, right } => Some(GfExpr {
                node: GfNode::Product {
                    left: Arc::new(left.simple_part()?),
                    right: Arc::new(right.simple_part()?),
                },
                ..self.clone()
            }),
            GfNode::SumOp { left, right } => Some(GfExpr {
                node: GfNode::SumOp {
                    left: Arc::new(left.simple_part()?),
                    right: Arc::new(right.simple_part()?),
                },
                ..self.clone()
            }),
            GfNode::Convolution { left, right } => Some(GfExpr {
                node: GfNode::Convolution {
                    left: Arc::new(left.simple_part()?),
                    right: Arc::new(right.simple_part()?),
                },
                ..self.clone()
            }),
            GfNode::Stabilize { child, form } => Some(GfExpr {
                node: GfNode::Stabilize { child: Arc::new(child.simple_part()?), form: form.clone() },
                ..self.clone()
            }),
            GfNode::FiberDiffeo { child, map } => Some(GfExpr {
                node: GfNode::FiberDiffeo { child: Arc::new(child.simple_part()?), map: map.clone() },
                ..self.clone()
            }),
            GfNode::PathBlend { left, right, t } => Some(GfExpr {
                node: GfNode::PathBlend {
                    left: Arc::new(left.simple_part()?),
                    right: Arc::new(right.simple_part()?),
                    t: *t,
                },
                ..self.clone()
            }),
        }
    }

    // ---- condition (∗) ---------------------------------------------------

    /// Scan the `(q,w)` box for solutions of `∇_w F = 0` (grid scan plus
    /// Newton polish in the fiber) and check the transversality of `∇_w F`
    /// to `{0}`: the smallest singular value of its `k×(n+k)` Jacobian must
    /// exceed `1e-6·(1 + ‖J‖_max)` at every witness.
    pub fn check_star_condition(&self, bx: &Rect, grid_step: f64) -> Result<StarReport> {
        if self.fiber_dim == 0 {
            return Err(Error::Arity("condition (*) needs at least one fiber variable".into()));
        }
        let dim = self.base_dim + self.fiber_dim;
        if bx.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: bx.dim(), what: "(q,w) box" });
        }
        let counts: Vec<usize> = (0..dim)
            .map(|i| (crate::math::ceil((bx.hi[i] - bx.lo[i]) / grid_step) as usize).clamp(1, 60) + 1)
            .collect();
        let mut witnesses: Vec<StarWitness> = Vec::new();
        let mut idx = vec![0usize; dim];
        loop {
            let x: Vec<f64> = (0..dim)
                .map(|i| bx.lo[i] + (bx.hi[i] - bx.lo[i]) * idx[i] as f64 / (counts[i] - 1).max(1) as f64)
                .collect();
            let (q0, w0) = x.split_at(self.base_dim);
            if let Some(w) = self.newton_fiber(q0, w0, 40) {
                let full: Vec<f64> = q0.iter().chain(&w).copied().collect();
                if bx.contains(&full)
                    && !witnesses.iter().any(|wt| {
                        math::dist(&wt.q, q0) + math::dist(&wt.w, &w) < 3.0 * grid_step
                    })
                {
                    let (sigma, maxnorm) = self.fiber_jacobian_sigma_min(q0, &w);
                    witnesses.push(StarWitness {
                        q: q0.to_vec(),
                        w,
                        sigma_min: sigma,
                        threshold: 1e-6 * (1.0 + maxnorm),
                    });
                }
            }
            // advance the multi-index
            let mut carry = true;
            for i in 0..dim {
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
        let empty = witnesses.is_empty();
        let satisfied = witnesses.iter().all(|wt| wt.sigma_min > wt.threshold);
        let worst = witnesses
            .iter()
            .map(|wt| wt.sigma_min)
            .fold(f64::INFINITY, f64::min);
        Ok(StarReport {
            satisfied,
            worst_sigma_min: if empty { f64::INFINITY } else { worst },
            witnesses: witnesses.into_iter().filter(|wt| wt.sigma_min <= wt.threshold).collect(),
            empty_contour: empty,
        })
    }

    /// Newton iteration on `∇_w F(q,·) = 0` from `w0`; `None` on divergence.
    pub(crate) fn newton_fiber(&self, q: &[f64], w0: &[f64], max_iter: usize) -> Option<Vec<f64>> {
        let k = self.fiber_dim;
        let mut w = w0.to_vec();
        for _ in 0..max_iter {
            let g = self.grad_unchecked(q, &w).1;
            let res = math::norm(&g);
            // tight in-loop target: degenerate (tangential) roots converge
            // only linearly, and the transversality check needs them polished
            // well below its singular-value threshold
            if res < 1e-14 {
                return Some(w);
            }
            if !res.is_finite() || res > 1e8 {
                return None;
            }
            // finite-difference Jacobian of the (exact) fiber gradient
            let h = 1e-6;
            let mut jac = vec![0.0; k * k];
            for j in 0..k {
                let mut wp = w.clone();
                let mut wm = w.clone();
                wp[j] += h;
                wm[j] -= h;
                let gp = self.grad_unchecked(q, &wp).1;
                let gm = self.grad_unchecked(q, &wm).1;
                for i in 0..k {
                    jac[i * k + j] = (gp[i] - gm[i]) / (2.0 * h);
                }
            }
            let step = solve_dense(&jac, &g, k)?;
            for i in 0..k {
                w[i] -= step[i];
            }
            if math::norm(&step) > 1e6 {
                return None;
            }
        }
        // accept slow (tangential) convergence when the residual is tiny
        let res = math::norm(&self.grad_unchecked(q, &w).1);
        if res < 1e-8 {
            Some(w)
        } else {
            None
        }
    }

    /// Smallest singular value of the full Jacobian of `∇_w F` at a point,
    /// together with the Jacobian max-norm.
    fn fiber_jacobian_sigma_min(&self, q: &[f64], w: &[f64]) -> (f64, f64) {
        let n = self.base_dim;
        let k = self.fiber_dim;
        let h = 1e-5;
        let mut jac = vec![0.0; k * (n + k)]; // rows: components of grad_w
        for j in 0..n + k {
            let mut qp = q.to_vec();
            let mut qm = q.to_vec();
            let mut wp = w.to_vec();
            let mut wm = w.to_vec();
            if j < n {
                qp[j] += h;
                qm[j] -= h;
            } else {
                wp[j - n] += h;
                wm[j - n] -= h;
            }
            let gp = self.grad_unchecked(&qp, &wp).1;
            let gm = self.grad_unchecked(&qm, &wm).1;
            for i in 0..k {
                jac[i * (n + k) + j] = (gp[i] - gm[i]) / (2.0 * h);
            }
        }
        let maxnorm = jac.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        // sigma_min^2 = smallest eigenvalue of J Jᵀ (k×k)
        let mut jjt = vec![0.0; k * k];
        for i in 0..k {
            for l in 0..k {
                jjt[i * k + l] = (0..n + k)
                    .map(|j| jac[i * (n + k) + j] * jac[l * (n + k) + j])
                    .sum();
            }
        }
        let m = SymMatrix { dim: k, data: jjt };
        let min_eig = m.eigenvalues().into_iter().fold(f64::INFINITY, f64::min);
        (math::sqrt(min_eig.max(0.0)), maxnorm)
    }
}

/// Witness of a (near-)solution of `∇_w F = 0` where transversality fails
/// or was measured.
#[derive(Debug, Clone)]
pub struct StarWitness {
    pub q: Vec<f64>,
    pub w: Vec<f64>,
    pub sigma_min: f64,
    pub threshold: f64,
}

/// Outcome of the condition-(∗) check over a box.
#[derive(Debug, Clone)]
pub struct StarReport {
    pub satisfied: bool,
    pub worst_sigma_min: f64,
    /// Witnesses where the rank check failed.
    pub witnesses: Vec<StarWitness>,
    /// No solution of `∇_w F = 0` was found in the box; `satisfied` is then
    /// vacuously true.
    pub empty_contour: bool,
}

pub(crate) fn complement(kept: &[usize], dim: usize) -> Vec<usize> {
    (0..dim).filter(|i| !kept.contains(i)).collect()
}

/// Gaussian elimination with partial pivoting for small dense systems.
pub(crate) fn solve_dense(a: &[f64], b: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut m = a.to_vec();
    let mut rhs = b.to_vec();
    for col in 0..n {
        let (piv, pv) = (col..n)
            .map(|r| (r, m[r * n + col].abs()))
            .fold((col, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if pv < 1e-14 {
            return None;
        }
        if piv != col {
            for j in 0..n {
                m.swap(piv * n + j, col * n + j);
            }
            rhs.swap(piv, col);
        }
        for r in col + 1..n {
            let f = m[r * n + col] / m[col * n + col];
            for j in col..n {
                m[r * n + j] -= f * m[col * n + j];
            }
            rhs[r] -= f * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|j| m[r * n + j] * x[j]).sum();
        x[r] = (rhs[r] - s) / m[r * n + r];
    }
    Some(x)
}

/// A 1-jet sample `(u, q, p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Point1Jet {
    pub u: f64,
    pub q: Vec<f64>,
    pub p: Vec<f64>,
}

impl Point1Jet {
    pub fn new(u: f64, q: Vec<f64>, p: Vec<f64>) -> Result<Self> {
        if q.len() != p.len() {
            return Err(Error::DimensionMismatch { expected: q.len(), got: p.len(), what: "slope p" });
        }
        if !u.is_finite() || q.iter().chain(&p).any(|x| !x.is_finite()) {
            return Err(Error::Range { what: "jet coordinate", value: f64::NAN });
        }
        Ok(Point1Jet { u, q, p })
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ops;

    fn fd_grad(f: &GfExpr, q: &[f64], w: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let h = 1e-4;
        let mut gq = Vec::new();
        for i in 0..q.len() {
            let mut qp = q.to_vec();
            let mut qm = q.to_vec();
            qp[i] += h;
            qm[i] -= h;
            gq.push((f.eval(&qp, w).unwrap() - f.eval(&qm, w).unwrap()) / (2.0 * h));
        }
        let mut gw = Vec::new();
        for i in 0..w.len() {
            let mut wp = w.to_vec();
            let mut wm = w.to_vec();
            wp[i] += h;
            wm[i] -= h;
            gw.push((f.eval(q, &wp).unwrap() - f.eval(q, &wm).unwrap()) / (2.0 * h));
        }
        (gq, gw)
    }

    #[test]
    fn poly_eval_and_grad() {
        // F = q^2 + 3q at q = 1
        let f = GfExpr::poly1d(vec![0.0, 3.0, 1.0]);
        assert_eq!(f.eval(&[1.0], &[]).unwrap(), 4.0);
        let (gq, gw) = f.grad(&[1.0], &[]).unwrap();
        assert_eq!(gq, vec![5.0]);
        assert!(gw.is_empty());
    }

    #[test]
    fn transform_eval() {
        // T of q^2/2 at (q=3, v=1): 3*1 - 1/2
        let f = ops::transform_t(&GfExpr::poly1d(vec![0.0, 0.0, 0.5]));
        assert_eq!(f.eval(&[3.0], &[1.0]).unwrap(), 2.5);
    }

    #[test]
    fn transform_grad_example() {
        // T of q^4 - 3q^2 at (q=0, v=1): grad_q = 1, grad_v = 0 - (4 - 6) = 2
        let f = ops::transform_t(&GfExpr::poly1d(vec![0.0, 0.0, -3.0, 0.0, 1.0]));
        let (gq, gw) = f.grad(&[0.0], &[1.0]).unwrap();
        assert!((gq[0] - 1.0).abs() < 1e-12);
        assert!((gw[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn sum_with_no_fiber() {
        let f = ops::sum_gf(&GfExpr::poly1d(vec![0.0, 0.0, 1.0]), &GfExpr::poly1d(vec![0.0, 0.0, 1.0]))
            .unwrap();
        assert_eq!(f.eval(&[2.0], &[]).unwrap(), 8.0);
    }

    #[test]
    fn quadratic_form_grad() {
        let f = GfExpr::quadratic_form(SymMatrix::diag(&[1.0, -1.0]));
        let (_, gw) = f.grad(&[], &[2.0, 3.0]).unwrap();
        assert_eq!(gw, vec![4.0, -6.0]);
    }

    #[test]
    fn dimension_mismatch_is_structured() {
        let f = GfExpr::poly1d(vec![0.0, 1.0]);
        match f.eval(&[1.0, 2.0], &[]) {
            Err(Error::DimensionMismatch { expected: 1, got: 2, .. }) => {}
            other => panic!("expected dimension mismatch, got {other:?}"),
        }
    }

    #[test]
    fn gradients_match_finite_differences_on_composites() {
        let f1 = GfExpr::poly1d(vec![0.1, -0.3, 0.7, 0.0, 0.25]);
        let f2 = GfExpr::poly1d(vec![0.0, 1.0, 0.5]);
        let exprs = vec![
            ops::transform_t(&f1),
            ops::sum_gf(&f1, &f2).unwrap(),
            ops::convolution_gf(&f1, &f2).unwrap(),
            ops::product_gf(&f1, &f2),
            ops::stabilize(&ops::transform_t(&f2), SymMatrix::hyperbolic()).unwrap(),
            ops::deformation_path(&f1, &f2, 0.37).unwrap(),
        ];
        for f in exprs {
            let q: Vec<f64> = (0..f.base_dim()).map(|i| 0.3 + 0.1 * i as f64).collect();
            let w: Vec<f64> = (0..f.fiber_dim()).map(|i| -0.2 + 0.15 * i as f64).collect();
            let (gq, gw) = f.grad(&q, &w).unwrap();
            let (fq, fw) = fd_grad(&f, &q, &w);
            for (a, b) in gq.iter().zip(&fq).chain(gw.iter().zip(&fw)) {
                assert!((a - b).abs() <= 1e-6 * (1.0 + a.abs()), "grad mismatch: {a} vs {b}");
            }
        }
    }

    #[test]
    fn index_tracking_examples() {
        // T(Poly1D(q^2)) -> iota = 1, k = 1
        let f = ops::transform_t(&GfExpr::poly1d(vec![0.0, 0.0, 1.0]));
        let d = f.as_decomposition().unwrap();
        assert_eq!(d.index, 1);
        assert_eq!(f.fiber_dim(), 1);

        // sum of two iota=1 factors -> iota = 2
        let s = ops::sum_gf(&f, &f).unwrap();
        assert_eq!(s.as_decomposition().unwrap().index, 2);
        assert_eq!(s.fiber_dim(), 2);

        // stabilization by diag(1,-1) adds one to the index
        let g = ops::stabilize(&GfExpr::poly1d(vec![0.0, 0.0, 1.0]), SymMatrix::hyperbolic()).unwrap();
        let d = g.as_decomposition().unwrap();
        assert_eq!(d.index, 1);
        assert_eq!(g.fiber_dim(), 2);
    }

    #[test]
    fn index_within_fiber_dim() {
        let f = ops::transform_t(&ops::transform_t(&GfExpr::poly1d(vec![0.0, 0.0, -3.0, 0.0, 1.0])));
        let d = f.as_decomposition().unwrap();
        assert!(d.index <= f.fiber_dim());
        assert_eq!(d.index, 1); // saddle selection for the double transform
    }

    #[test]
    fn star_condition_constant_rank() {
        // T of q^2/2: Jacobian row (1, -1) everywhere
        let f = ops::transform_t(&GfExpr::poly1d(vec![0.0, 0.0, 0.5]));
        let rep = f.check_star_condition(&Rect::centered(2, 2.0), 0.25).unwrap();
        assert!(rep.satisfied);
        assert!(!rep.empty_contour);
    }

    #[test]
    fn star_condition_cubic_fold_is_transverse() {
        // F(q,w) = qw - w^3/3: Jacobian of grad_w is (1, -2w), full rank at w=0
        let f = ops::transform_t(&GfExpr::poly1d(vec![0.0, 0.0, 0.0, 1.0 / 3.0]));
        let rep = f.check_star_condition(&Rect::centered(2, 1.5), 0.2).unwrap();
        assert!(rep.satisfied);
    }

    #[test]
    fn star_condition_rejects_w_cubed() {
        // F(q,w) = w^3: grad_w = 3w^2 not transverse to 0 at w = 0
        let cyl = ops::product_gf(
            &GfExpr::poly1d(vec![0.0]),
            &GfExpr::poly1d(vec![0.0, 0.0, 0.0, 1.0]),
        );
        let f = ops::contour_gf(&cyl, &[0]).unwrap();
        let rep = f.check_star_condition(&Rect::centered(2, 1.0), 0.1).unwrap();
        assert!(!rep.satisfied);
        let wt = &rep.witnesses[0];
        assert!(wt.w[0].abs() < 1e-2, "witness should be near w = 0, got {}", wt.w[0]);
    }

    #[test]
    fn untracked_contour_requires_explicit_index() {
        let cyl = ops::product_gf(
            &GfExpr::poly1d(vec![0.0]),
            &GfExpr::poly1d(vec![0.0, 0.0, 0.0, 1.0]),
        );
        let f = ops::contour_gf(&cyl, &[0]).unwrap();
        assert!(matches!(f.as_decomposition(), Err(Error::IndexNotTracked)));
        let f = f.with_fiber_index(1, 2.0).unwrap();
        assert_eq!(f.as_decomposition().unwrap().index, 1);
    }
}

