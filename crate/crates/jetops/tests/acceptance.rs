//! End-to-end acceptance: every numbered criterion runs the relevant
//! verification suite(s), checks the pinned tolerances and time budgets, and
//! prints a single pass/fail line.  Run with `cargo test --test acceptance`
//! (add `-- --nocapture` to see the lines even on success).

use std::time::Instant;

use jetops::suites::{self, Report};

struct Outcome {
    id: usize,
    label: &'static str,
    passed: bool,
    note: String,
}

fn run(name: &str) -> (Report, f64) {
    let t = Instant::now();
    let rep = suites::run_suite(name).unwrap_or_else(|e| panic!("suite {name} errored: {e:#}"));
    (rep, t.elapsed().as_secs_f64())
}

/// True iff every listed check exists and passed.
fn checks_pass(rep: &Report, names: &[&str]) -> bool {
    names.iter().all(|n| rep.check(n).map(|c| c.passed).unwrap_or(false))
}

fn worst_defect(rep: &Report, names: &[&str]) -> f64 {
    names
        .iter()
        .filter_map(|n| rep.check(n))
        .map(|c| c.defect)
        .fold(0.0, f64::max)
}

#[test]
fn acceptance() {
    let mut outcomes: Vec<Outcome> = Vec::new();
    let mut push = |id: usize, label: &'static str, passed: bool, note: String| {
        outcomes.push(Outcome { id, label, passed, note });
    };

    // 1. closed-form conjugates at step 1e-3, each transform under 5 s
    let (rep, secs) = run("conjugate-forms");
    let names = [
        "exp-conjugate-sup-error",
        "exp-conjugate-negative-slopes-masked",
        "corner-conjugate-sup-error",
    ];
    push(
        1,
        "closed-form-conjugates",
        checks_pass(&rep, &names) && secs < 10.0,
        format!("sup defect {:.2e}, suite {secs:.2}s (budget 2 x 5s)", worst_defect(&rep, &names)),
    );

    // 2. transform duality on the double-well pair and two random pairs,
    //    Hausdorff within 5 grid steps, under 30 s
    let (rep, secs) = run("transform-duality");
    let names = [
        "double-well-pair-sum-becomes-convolution",
        "double-well-pair-convolution-becomes-sum",
        "random-pair-0-sum-becomes-convolution",
        "random-pair-0-convolution-becomes-sum",
        "random-pair-1-sum-becomes-convolution",
        "random-pair-1-convolution-becomes-sum",
    ];
    push(
        2,
        "transform-duality-both-directions",
        checks_pass(&rep, &names) && secs < 30.0,
        format!("worst Hausdorff {:.2e}, {secs:.2}s (budget 30s)", worst_defect(&rep, &names)),
    );

    // 3. cloud identities on a 2-D input: slice/contour conjugation and
    //    product compatibility
    let (rep, _) = run("conjugation");
    let names = ["slice-conjugates-to-contour", "transform-respects-products"];
    push(
        3,
        "two-dimensional-cloud-identities",
        checks_pass(&rep, &names),
        format!("worst Hausdorff {:.2e}", worst_defect(&rep, &names)),
    );

    // 4. each combinator's contour cloud matches the geometric construction
    let (rep, _) = run("combinator-contours");
    let names = [
        "transform-contour-matches-cloud-map",
        "sum-contour-matches-fiberwise-sum",
        "convolution-contour-matches-momentum-matching",
        "product-contour-matches-cartesian-product",
        "slice-contour-matches-restriction",
        "contour-matches-vanishing-momentum-set",
    ];
    push(
        4,
        "six-combinator-cross-checks",
        checks_pass(&rep, &names),
        format!("worst Hausdorff {:.2e}", worst_defect(&rep, &names)),
    );

    // 5. random near-extremal fibers: selector equals the grid extremum and
    //    the homology path agrees with the fast path
    let (rep, _) = run("minmax-extremes");
    let names = [
        "convex-selector-equals-grid-extremum",
        "convex-homology-agrees-with-fast-path",
        "concave-selector-equals-grid-extremum",
        "concave-homology-agrees-with-fast-path",
    ];
    push(
        5,
        "selector-extremes-on-random-fibers",
        checks_pass(&rep, &names),
        format!("worst defect {:.2e} (tol 1e-8)", worst_defect(&rep, &names)),
    );

    // 6. selector additivity on a 101-point grid, including the genuine
    //    two-bump degree-2 class of value 9/2
    let (rep, _) = run("selector-additivity");
    let names = [
        "selector-additive-on-direct-sum",
        "two-bump-saddle-value-mod-2",
        "two-bump-saddle-value-rational",
    ];
    push(
        6,
        "selector-additivity-with-two-bump-saddle",
        checks_pass(&rep, &names),
        format!("worst defect {:.2e} (tol 1e-6)", worst_defect(&rep, &names)),
    );

    // 7. paired constructions agree; the stabilized and deformed variants
    //    keep the selector constant; whole suite under 5 minutes
    let (rep, secs) = run("path-invariance");
    let names = [
        "convolution-of-transforms-matches-transform-of-sum",
        "stabilization-preserves-selector",
        "deformation-selector-constant-at-t-0.00",
        "deformation-selector-constant-at-t-0.25",
        "deformation-selector-constant-at-t-0.50",
        "deformation-selector-constant-at-t-0.75",
        "deformation-selector-constant-at-t-1.00",
    ];
    push(
        7,
        "paired-constructions-and-deformation",
        checks_pass(&rep, &names) && secs < 300.0,
        format!("worst defect {:.2e}, {secs:.1}s (budget 300s)", worst_defect(&rep, &names)),
    );

    // 8. double transform keeps the double well (selector 0 at q = 0) while
    //    biconjugation convexifies it (-9/4 at the origin)
    let (rep, _) = run("selector-involution");
    let names = [
        "double-transform-selector-returns-the-function",
        "biconjugate-convexifies-the-double-well",
    ];
    push(
        8,
        "involution-versus-convexification",
        checks_pass(&rep, &names),
        format!("worst defect {:.2e}", worst_defect(&rep, &names)),
    );

    // 9-11 share one suite run
    let (rep, _) = run("expression-comparison");

    // 9. cusps of the transformed double-well front at (-3/4, +-2*sqrt(2))
    let names = ["transformed-front-cusp-locations"];
    push(
        9,
        "front-cusp-locations",
        checks_pass(&rep, &names),
        format!("worst coordinate error {:.2e} (tol 1e-3)", worst_defect(&rep, &names)),
    );

    // 10. analytic gradients match finite differences on 1000 random probes
    let names = ["analytic-gradients-match-finite-differences"];
    push(
        10,
        "gradient-consistency",
        checks_pass(&rep, &names),
        format!("worst relative error {:.2e} (tol 1e-6)", worst_defect(&rep, &names)),
    );

    // 11. the rank condition rejects the cubic witness and accepts every
    //     suite input
    let names = ["degenerate-contour-rejected", "suite-inputs-satisfy-rank-condition"];
    push(
        11,
        "fiber-rank-condition",
        checks_pass(&rep, &names),
        "cubic witness rejected, suite inputs accepted".into(),
    );

    let mut failures = Vec::new();
    for o in &outcomes {
        let status = if o.passed { "pass" } else { "FAIL" };
        println!("criterion {:02} {:<42} {status}  ({})", o.id, o.label, o.note);
        if !o.passed {
            failures.push(format!("criterion {:02} {}: {}", o.id, o.label, o.note));
        }
    }
    assert!(failures.is_empty(), "failed criteria:\n{}", failures.join("\n"));
}
