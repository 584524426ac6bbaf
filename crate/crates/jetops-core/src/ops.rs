//! Combinators on generating functions.
//!
//! Each constructor builds the corresponding [`GfNode`](crate::expr) with
//! fresh fiber names, validated shapes and structurally tracked
//! almost-simple metadata.  All constructors are pure; expressions are
//! immutable and cheap to share.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::expr::{uniquify, AsMeta, FiberMap, GfExpr, GfNode, SymMatrix};

fn checked_meta(meta: Option<AsMeta>, fiber_dim: usize) -> Option<AsMeta> {
    meta.filter(|m| m.iota <= fiber_dim && m.joint.map_or(true, |j| j <= fiber_dim))
}

/// `F_T(q, v, w) = q·v − F(v, w)`: the generating function of the
/// transformed submanifold `T L_F`.  Fiber dimension grows by the base
/// dimension.
pub fn transform_t(f: &GfExpr) -> GfExpr {
    let n = f.base_dim();
    let k = f.fiber_dim();
    let mut names: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
    names.extend(f.fiber_names().iter().cloned());
    let meta = f.as_meta().and_then(|m| {
        let joint = m.joint?;
        Some(AsMeta { iota: n + k - joint, joint: Some(n + k - m.iota), bound: m.bound })
    });
    GfExpr {
        node: GfNode::TransformT { child: Arc::new(f.clone()) },
        base_dim: n,
        fiber_dim: n + k,
        fiber_names: uniquify(names),
        as_meta: checked_meta(meta, n + k),
    }
}

fn check_kept(kept: &[usize], base_dim: usize) -> Result<()> {
    if kept.is_empty() || kept.len() >= base_dim {
        return Err(Error::Arity(format!(
            "kept base indices must form a proper nonempty subset of 0..{base_dim}"
        )));
    }
    for w in kept.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::Arity("kept base indices must be strictly increasing".into()));
        }
    }
    if *kept.last().unwrap() >= base_dim {
        return Err(Error::Arity(format!("kept base index {} out of range", kept.last().unwrap())));
    }
    Ok(())
}

/// `F_σ`: pin the demoted base variables to 0, keep `kept` as the new base.
pub fn slice_gf(f: &GfExpr, kept: &[usize]) -> Result<GfExpr> {
    check_kept(kept, f.base_dim())?;
    let meta = f.as_meta().map(|m| AsMeta { iota: m.iota, joint: None, bound: m.bound });
    Ok(GfExpr {
        node: GfNode::Slice { child: Arc::new(f.clone()), kept: kept.to_vec() },
        base_dim: kept.len(),
        fiber_dim: f.fiber_dim(),
        fiber_names: f.fiber_names().to_vec(),
        as_meta: checked_meta(meta, f.fiber_dim()),
    })
}

/// `F_κ`: demote the complementary base variables to fiber variables.
/// The fiber Morse index is not structurally tracked for contours; supply
/// it with [`GfExpr::with_fiber_index`] when a selector is needed.
pub fn contour_gf(f: &GfExpr, kept: &[usize]) -> Result<GfExpr> {
    check_kept(kept, f.base_dim())?;
    let demoted: Vec<usize> = (0..f.base_dim()).filter(|i| !kept.contains(i)).collect();
    let mut names: Vec<String> = demoted.iter().map(|i| format!("v{i}")).collect();
    names.extend(f.fiber_names().iter().cloned());
    Ok(GfExpr {
        node: GfNode::Contour { child: Arc::new(f.clone()), kept: kept.to_vec() },
        base_dim: kept.len(),
        fiber_dim: demoted.len() + f.fiber_dim(),
        fiber_names: uniquify(names),
        as_meta: None,
    })
}

/// `F₁(q₁,w₁) + F₂(q₂,w₂)` on the disjoint union of base variables.
pub fn product_gf(f1: &GfExpr, f2: &GfExpr) -> GfExpr {
    let fiber_dim = f1.fiber_dim() + f2.fiber_dim();
    let mut names = f1.fiber_names().to_vec();
    names.extend(f2.fiber_names().iter().cloned());
    let meta = match (f1.as_meta(), f2.as_meta()) {
        (Some(a), Some(b)) => Some(AsMeta {
            iota: a.iota + b.iota,
            joint: match (a.joint, b.joint) {
                (Some(x), Some(y)) => Some(x + y),
                _ => None,
            },
            bound: a.bound + b.bound,
        }),
        _ => None,
    };
    GfExpr {
        node: GfNode::Product { left: Arc::new(f1.clone()), right: Arc::new(f2.clone()) },
        base_dim: f1.base_dim() + f2.base_dim(),
        fiber_dim,
        fiber_names: uniquify(names),
        as_meta: checked_meta(meta, fiber_dim),
    }
}

fn require_same_base(f1: &GfExpr, f2: &GfExpr) -> Result<()> {
    if f1.base_dim() != f2.base_dim() {
        return Err(Error::DimensionMismatch {
            expected: f1.base_dim(),
            got: f2.base_dim(),
            what: "base dimension of second operand",
        });
    }
    Ok(())
}

/// `F₁(q,w₁) + F₂(q,w₂)` over a shared base point.
pub fn sum_gf(f1: &GfExpr, f2: &GfExpr) -> Result<GfExpr> {
    require_same_base(f1, f2)?;
    let n = f1.base_dim();
    let (k1, k2) = (f1.fiber_dim(), f2.fiber_dim());
    let mut names = f1.fiber_names().to_vec();
    names.extend(f2.fiber_names().iter().cloned());
    let meta = match (f1.as_meta(), f2.as_meta()) {
        (Some(a), Some(b)) => {
            // the joint index only survives in the extreme (all-convex /
            // all-concave) cases; mixed signatures interact through q
            let joint = match (a.joint, b.joint) {
                (Some(0), Some(0)) => Some(0),
                (Some(x), Some(y)) if x == n + k1 && y == n + k2 => Some(n + k1 + k2),
                _ => None,
            };
            Some(AsMeta { iota: a.iota + b.iota, joint, bound: a.bound + b.bound })
        }
        _ => None,
    };
    Ok(GfExpr {
        node: GfNode::SumOp { left: Arc::new(f1.clone()), right: Arc::new(f2.clone()) },
        base_dim: n,
        fiber_dim: k1 + k2,
        fiber_names: uniquify(names),
        as_meta: checked_meta(meta, k1 + k2),
    })
}

/// `F₁(v,w₁) + F₂(q−v,w₂)` with the splitting point `v` as an extra fiber
/// block.
pub fn convolution_gf(f1: &GfExpr, f2: &GfExpr) -> Result<GfExpr> {
    require_same_base(f1, f2)?;
    let n = f1.base_dim();
    let fiber_dim = n + f1.fiber_dim() + f2.fiber_dim();
    let mut names: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
    names.extend(f1.fiber_names().iter().cloned());
    names.extend(f2.fiber_names().iter().cloned());
    let meta = match (f1.as_meta(), f2.as_meta()) {
        (Some(a), Some(b)) => match (a.joint, b.joint) {
            (Some(j1), Some(j2)) => {
                Some(AsMeta { iota: j1 + j2, joint: Some(j1 + j2), bound: a.bound + b.bound })
            }
            _ => None,
        },
        _ => None,
    };
    Ok(GfExpr {
        node: GfNode::Convolution { left: Arc::new(f1.clone()), right: Arc::new(f2.clone()) },
        base_dim: n,
        fiber_dim,
        fiber_names: uniquify(names),
        as_meta: checked_meta(meta, fiber_dim),
    })
}

/// Add a nondegenerate quadratic form of fresh fiber variables; the contour
/// and selector are unchanged, the fiber index grows by the form's index.
pub fn stabilize(f: &GfExpr, form: SymMatrix) -> Result<GfExpr> {
    if !form.is_nondegenerate() {
        return Err(Error::Arity("stabilization form must be nondegenerate".into()));
    }
    let m = form.dim();
    let neg = form.negative_index();
    let fiber_dim = f.fiber_dim() + m;
    let mut names = f.fiber_names().to_vec();
    names.extend((0..m).map(|i| format!("z{i}")));
    let meta = f.as_meta().map(|a| AsMeta {
        iota: a.iota + neg,
        joint: a.joint.map(|j| j + neg),
        bound: a.bound,
    });
    Ok(GfExpr {
        node: GfNode::Stabilize { child: Arc::new(f.clone()), form },
        base_dim: f.base_dim(),
        fiber_dim,
        fiber_names: uniquify(names),
        as_meta: checked_meta(meta, fiber_dim),
    })
}

/// Undo a stabilization.  Succeeds on an exact `Stabilize` node, and on the
/// deformation path at `t = 0`, whose trailing `V·(v′ − v)` term is (after the
/// shear `v′ ↦ v′ + v`) the hyperbolic stabilization of the transform-of-sum.
pub fn strip_stabilization(f: &GfExpr) -> Result<GfExpr> {
    match &f.node {
        GfNode::Stabilize { child, .. } => Ok((**child).clone()),
        GfNode::PathBlend { left, right, t } if *t == 0.0 => {
            Ok(transform_t(&sum_gf(left, right)?))
        }
        _ => Err(Error::NoStabilizationFound),
    }
}

/// Compose a fiber-preserving linear change of variables:
/// `(q, w) ↦ F(q, map(w))`.
pub fn fiber_diffeo(f: &GfExpr, map: FiberMap) -> Result<GfExpr> {
    if map.dim() != f.fiber_dim() {
        return Err(Error::DimensionMismatch {
            expected: f.fiber_dim(),
            got: map.dim(),
            what: "fiber map dimension",
        });
    }
    let scale = map.norm_bound().max(1.0);
    let meta = f
        .as_meta()
        .map(|a| AsMeta { iota: a.iota, joint: a.joint, bound: a.bound * scale });
    Ok(GfExpr {
        node: GfNode::FiberDiffeo { child: Arc::new(f.clone()), map },
        base_dim: f.base_dim(),
        fiber_dim: f.fiber_dim(),
        fiber_names: f.fiber_names().to_vec(),
        as_meta: checked_meta(meta, f.fiber_dim()),
    })
}

/// Recognise the sum-of-two-transforms shape
/// `q·v₁ − F₁(v₁,w₁) + q·v₂ − F₂(v₂,w₂)` and compose the fiber shuffle that
/// rewrites it, pointwise, as the transform of the convolution:
/// `(V, v, w₁, w₂) ↦ (v₁, w₁, v₂, w₂) = (v, w₁, V−v, w₂)`.
pub fn fiber_diffeo_sum_conv(f: &GfExpr) -> Result<GfExpr> {
    let (f1, f2) = match &f.node {
        GfNode::SumOp { left, right } => match (&left.node, &right.node) {
            (GfNode::TransformT { child: c1 }, GfNode::TransformT { child: c2 }) => {
                ((**c1).clone(), (**c2).clone())
            }
            _ => {
                return Err(Error::PatternNotApplicable(
                    "sum operands are not both transforms".into(),
                ))
            }
        },
        _ => return Err(Error::PatternNotApplicable("expression is not a sum".into())),
    };
    let n = f.base_dim();
    let (k1, k2) = (f1.fiber_dim(), f2.fiber_dim());
    let map = FiberMap::sum_conv_shuffle(n, k1, k2).inverted();
    let mut out = fiber_diffeo(f, map)?;
    // relabel to the transform-of-convolution layout: outer v block, then
    // the splitting point, then the original fiber blocks
    let mut names: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
    names.extend((0..n).map(|i| format!("v{i}'")));
    names.extend(f1.fiber_names().iter().cloned());
    names.extend(f2.fiber_names().iter().cloned());
    out.fiber_names = uniquify(names);
    Ok(out)
}

/// The one-parameter family
/// `F_t(q, v, v′, V, w₁, w₂) = q·v − (F₁((1−t)v + t v′, w₁) + F₂(v, w₂)) + V·(v′ − v)`
/// joining the stabilized transform-of-sum (`t = 0`) to the
/// convolution-of-transforms (`t = 1`) through fiber-quadratic-at-infinity
/// functions.
pub fn deformation_path(f1: &GfExpr, f2: &GfExpr, t: f64) -> Result<GfExpr> {
    require_same_base(f1, f2)?;
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::Range { what: "path parameter t", value: t });
    }
    let n = f1.base_dim();
    let (k1, k2) = (f1.fiber_dim(), f2.fiber_dim());
    let fiber_dim = 3 * n + k1 + k2;
    let mut names: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
    names.extend((0..n).map(|i| format!("v{i}'")));
    names.extend((0..n).map(|i| format!("V{i}")));
    names.extend(f1.fiber_names().iter().cloned());
    names.extend(f2.fiber_names().iter().cloned());
    // index tracking only for jointly convex inputs: the path then has
    // constant fiber index 2n + k1 + k2 (transform contributes n + k each,
    // the hyperbolic block one n, minus the shared splitting block)
    let meta = match (f1.as_meta(), f2.as_meta()) {
        (Some(a), Some(b)) if a.joint == Some(0) && b.joint == Some(0) => Some(AsMeta {
            iota: 2 * n + k1 + k2,
            joint: None,
            bound: a.bound + b.bound,
        }),
        _ => None,
    };
    Ok(GfExpr {
        node: GfNode::PathBlend { left: Arc::new(f1.clone()), right: Arc::new(f2.clone()), t },
        base_dim: n,
        fiber_dim,
        fiber_names: uniquify(names),
        as_meta: checked_meta(meta, fiber_dim),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Rect;
    use alloc::vec;

    fn quartic() -> GfExpr {
        GfExpr::poly1d(vec![0.0, 0.0, -3.0, 0.0, 1.0]) // q^4 - 3q^2
    }

    fn square() -> GfExpr {
        GfExpr::poly1d(vec![0.0, 0.0, 1.0])
    }

    fn probes(dim: usize, seed: u64) -> Vec<Vec<f64>> {
        // deterministic low-discrepancy probes in [-1.5, 1.5]^dim
        let mut state = seed.wrapping_mul(2654435761).wrapping_add(12345);
        (0..24)
            .map(|_| {
                (0..dim)
                    .map(|_| {
                        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                        ((state >> 33) as f64 / (1u64 << 31) as f64 - 1.0) * 1.5
                    })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn slice_pins_demoted_base_to_zero() {
        // F(q1,q2) = q1^2 + q2^2 keeping q1 -> q1^2
        let f = product_gf(&square(), &square());
        let s = slice_gf(&f, &[0]).unwrap();
        assert_eq!(s.base_dim(), 1);
        assert_eq!(s.eval(&[2.0], &[]).unwrap(), 4.0);
    }

    #[test]
    fn slice_rejects_empty_and_full_kept_sets() {
        let f = product_gf(&square(), &square());
        assert!(slice_gf(&f, &[]).is_err());
        assert!(slice_gf(&f, &[0, 1]).is_err());
        assert!(contour_gf(&f, &[]).is_err());
    }

    #[test]
    fn contour_demotes_base_to_fiber() {
        // F(q1,q2) = q1^2 + q2^2 keeping q1: fiber critical point v = 0
        let f = product_gf(&square(), &square());
        let c = contour_gf(&f, &[0]).unwrap();
        assert_eq!(c.base_dim(), 1);
        assert_eq!(c.fiber_dim(), 1);
        assert_eq!(c.eval(&[2.0], &[3.0]).unwrap(), 13.0);
        let gw = c.grad(&[2.0], &[0.0]).unwrap().1;
        assert_eq!(gw, vec![0.0]);
    }

    #[test]
    fn contour_of_bilinear_matches_transform() {
        // F(q1,q2) = q1 q2 - q2^4 + 3 q2^2 keeping q1 equals T(j1(q^4-3q^2))
        let base = contour_gf(
            &sum_gf(
                &product_gf(&GfExpr::poly1d(vec![0.0]), &GfExpr::poly1d(vec![0.0, 0.0, 3.0, 0.0, -1.0])),
                &bilinear(),
            )
            .unwrap(),
            &[0],
        )
        .unwrap();
        let t = transform_t(&quartic());
        for p in probes(2, 7) {
            let a = base.eval(&[p[0]], &[p[1]]).unwrap();
            let b = t.eval(&[p[0]], &[p[1]]).unwrap();
            assert!((a - b).abs() < 1e-12, "contour/transform mismatch at {p:?}: {a} vs {b}");
        }
    }

    fn bilinear() -> GfExpr {
        GfExpr::base_pairing(1) // F(q1, q2) = q1 q2
    }

    #[test]
    fn transform_involution_pointwise_on_closed_forms() {
        // (T T f)(q, v, v') = q v - (v v' - f(v')) ; its contour is the
        // original 1-graph. Check the double-transform evaluates correctly.
        let f = quartic();
        let tt = transform_t(&transform_t(&f));
        assert_eq!(tt.base_dim(), 1);
        assert_eq!(tt.fiber_dim(), 2);
        let q = 0.7;
        let (v, vp) = (0.3, -0.4);
        let expect = q * v - (v * vp - f.eval(&[vp], &[]).unwrap());
        assert!((tt.eval(&[q], &[v, vp]).unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn product_commutes_with_transform_up_to_reordering() {
        // T(F1 x F2)(q1,q2; v1,v2,w...) vs (T F1) x (T F2) after reordering
        let f1 = quartic();
        let f2 = square();
        let lhs = transform_t(&product_gf(&f1, &f2));
        let rhs = product_gf(&transform_t(&f1), &transform_t(&f2));
        assert_eq!(lhs.fiber_dim(), rhs.fiber_dim());
        for p in probes(4, 3) {
            // lhs fiber order: [v1, v2]; rhs fiber order: [v1, v2] too here
            let a = lhs.eval(&p[0..2], &p[2..4]).unwrap();
            let b = rhs.eval(&p[0..2], &p[2..4]).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn strip_stabilization_roundtrip() {
        let f = quartic();
        let s = stabilize(&f, SymMatrix::hyperbolic()).unwrap();
        let back = strip_stabilization(&s).unwrap();
        assert_eq!(back.fiber_dim(), f.fiber_dim());
        assert_eq!(back.eval(&[0.5], &[]).unwrap(), f.eval(&[0.5], &[]).unwrap());
        assert!(matches!(strip_stabilization(&f), Err(Error::NoStabilizationFound)));
    }

    #[test]
    fn stabilize_rejects_degenerate_form() {
        let deg = SymMatrix::diag(&[1.0, 0.0]);
        assert!(stabilize(&quartic(), deg).is_err());
    }

    #[test]
    fn path_t0_equals_stabilized_transform_of_sum() {
        // t=0, F1=F2=Poly1D(q^2): F_0 = qv - 2v^2 + V (v' - v)
        let p = deformation_path(&square(), &square(), 0.0).unwrap();
        assert_eq!(p.fiber_dim(), 3);
        for x in probes(4, 11) {
            let (q, v, vp, cv) = (x[0], x[1], x[2], x[3]);
            let expect = q * v - 2.0 * v * v + cv * (vp - v);
            assert!((p.eval(&[q], &[v, vp, cv]).unwrap() - expect).abs() < 1e-12);
        }
        // strip recognises the V·v' pattern
        let stripped = strip_stabilization(&p).unwrap();
        let direct = transform_t(&sum_gf(&square(), &square()).unwrap());
        for x in probes(2, 5) {
            let a = stripped.eval(&[x[0]], &[x[1]]).unwrap();
            let b = direct.eval(&[x[0]], &[x[1]]).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn path_t1_equals_convolution_of_transforms() {
        // F_1(q, v, v', V, w1, w2) should match
        // conv(T F1, T F2)(q; s, v1, w1, v2, w2) under s=V, v1=v', v2=v
        let f1 = quartic();
        let f2 = square();
        let path = deformation_path(&f1, &f2, 1.0).unwrap();
        let conv = convolution_gf(&transform_t(&f1), &transform_t(&f2)).unwrap();
        for x in probes(4, 23) {
            let (q, v, vp, cv) = (x[0], x[1], x[2], x[3]);
            let a = path.eval(&[q], &[v, vp, cv]).unwrap();
            let b = conv.eval(&[q], &[cv, vp, v]).unwrap();
            assert!((a - b).abs() < 1e-12, "path(1) vs convolution: {a} vs {b}");
        }
    }

    #[test]
    fn path_rejects_t_outside_unit_interval() {
        assert!(matches!(
            deformation_path(&square(), &square(), 1.5),
            Err(Error::Range { .. })
        ));
    }

    #[test]
    fn sum_conv_shuffle_rewrites_sum_as_transform_of_convolution() {
        let f1 = quartic();
        let f2 = square();
        let s = sum_gf(&transform_t(&f1), &transform_t(&f2)).unwrap();
        let rewritten = fiber_diffeo_sum_conv(&s).unwrap();
        let target = transform_t(&convolution_gf(&f1, &f2).unwrap());
        assert_eq!(rewritten.fiber_dim(), target.fiber_dim());
        for x in probes(3, 41) {
            let (q, s_, v) = (x[0], x[1], x[2]);
            let a = rewritten.eval(&[q], &[s_, v]).unwrap();
            let b = target.eval(&[q], &[s_, v]).unwrap();
            assert!((a - b).abs() < 1e-12, "shuffle mismatch: {a} vs {b}");
        }
        // identity still holds with nontrivial fiber blocks
        let g1 = transform_t(&quartic()); // fiber 1
        let g2 = transform_t(&square()); // fiber 1
        let s = sum_gf(&transform_t(&g1), &transform_t(&g2)).unwrap();
        let rewritten = fiber_diffeo_sum_conv(&s).unwrap();
        let target = transform_t(&convolution_gf(&g1, &g2).unwrap());
        for x in probes(5, 43) {
            let a = rewritten.eval(&[x[0]], &x[1..5]).unwrap();
            let b = target.eval(&[x[0]], &x[1..5]).unwrap();
            assert!((a - b).abs() < 1e-12, "shuffle mismatch with fibers: {a} vs {b}");
        }
        assert!(matches!(
            fiber_diffeo_sum_conv(&quartic()),
            Err(Error::PatternNotApplicable(_))
        ));
    }

    #[test]
    fn conjugation_of_slice_and_contour_expressions() {
        // (F_T)_sigma and (F_kappa)_T coincide pointwise after renaming:
        // both are q1 v - F(v, 0, w) restricted appropriately.
        let f = product_gf(&quartic(), &square()); // F(q1,q2) = q1^4-3q1^2 + q2^2
        let lhs = slice_gf(&transform_t(&f), &[0]).unwrap(); // base q1, fiber (v1,v2)
        // T of the slice keeps only the kept block: compare on the v2=0 slice
        let rhs = transform_t(&slice_gf(&f, &[0]).unwrap()); // base q1, fiber v1
        for x in probes(2, 17) {
            let a = lhs.eval(&[x[0]], &[x[1], 0.0]).unwrap();
            let b = rhs.eval(&[x[0]], &[x[1]]).unwrap();
            // lhs has the demoted base pinned to 0 and v2 free; at v2 = 0
            // the extra pairing term q2 v2 vanishes and F2(v2)=0
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn star_condition_holds_along_the_deformation_path() {
        let p = deformation_path(&square(), &square(), 0.5).unwrap();
        let rep = p
            .check_star_condition(&Rect::centered(1 + p.fiber_dim(), 1.5), 0.5)
            .unwrap();
        assert!(rep.satisfied, "path expression should satisfy the rank condition");
    }
}
