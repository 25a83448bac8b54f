//! Integration tests of the assembled global candidate: closed-form
//! agreement, boundary exactness, junction continuity, and concavity on the
//! strip presets.

use bellman_foliation::evolution::{simple_picture, EvolveOptions};
use bellman_foliation::foliation::{assemble, check_admissible, AssembleOptions};
use bellman_foliation::geometry::{
    essential_roots, make_domain, BoundaryFunction, CurveSpec, DomainSpec, Point, Preset,
    RootScanOptions,
};
use bellman_foliation::num::CounterRng;

fn strip() -> DomainSpec {
    make_domain(&CurveSpec::Preset(Preset::ParabolicStrip { eps_max: 4.0 })).unwrap()
}

fn build(
    spec: &DomainSpec,
    f: &BoundaryFunction,
    eps: f64,
) -> bellman_foliation::foliation::GlobalCandidate {
    let profile = essential_roots(f, spec, &RootScanOptions::default()).unwrap();
    let graph = simple_picture(spec, f, &profile, eps, &EvolveOptions::default()).unwrap();
    assemble(&graph, spec, f, &AssembleOptions::default()).unwrap()
}

/// Random point inside the strip domain at `eps`, `x1` within `[-span, span]`.
fn random_point(rng: &mut CounterRng, eps: f64, span: f64) -> Point {
    let x1 = rng.uniform(-span, span);
    let frac = rng.uniform(0.02, 0.98);
    Point::new(x1, x1 * x1 + frac * eps * eps)
}

#[test]
fn exponential_candidate_matches_closed_form() {
    let spec = strip();
    let f = BoundaryFunction::from_expr("exp(t)").unwrap();
    for &eps in &[0.1, 0.5, 0.9] {
        let cand = build(&spec, &f, eps);
        let closed = |x: Point| -> f64 {
            let d = (x.x * x.x - x.y + eps * eps).sqrt();
            (1.0 - d) / (1.0 - eps) * (x.x - eps + d).exp()
        };
        let mut rng = CounterRng::new(7);
        let mut worst: f64 = 0.0;
        for _ in 0..200 {
            let x = random_point(&mut rng, eps, 3.0);
            let got = cand.evaluate(x).unwrap().value;
            let expect = closed(x);
            worst = worst.max((got - expect).abs() / expect.abs());
        }
        assert!(
            worst <= 1e-6,
            "eps = {eps}: worst relative error {worst:.3e}"
        );
    }
}

#[test]
fn boundary_values_exact_on_presets() {
    let spec = strip();
    for (expr, eps) in [("exp(t)", 0.5), ("-(t^4)", 0.3), ("t^6 - 5*t^4", 0.1)] {
        let f = BoundaryFunction::from_expr(expr).unwrap();
        let cand = build(&spec, &f, eps);
        let mut worst: f64 = 0.0;
        for i in 0..=1000 {
            let t = -2.0 + 4.0 * i as f64 / 1000.0;
            let g = spec.fixed(t).p;
            let got = cand.evaluate(g).unwrap().value;
            worst = worst.max((got - f.f(t)).abs() / (1.0 + f.f(t).abs()));
        }
        assert!(worst <= 1e-9, "{expr}: boundary error {worst:.3e}");
    }
}

#[test]
fn neg_quartic_cup_evaluates_continuously() {
    let spec = strip();
    let f = BoundaryFunction::from_expr("-(t^4)").unwrap();
    let eps = 0.3;
    let cand = build(&spec, &f, eps);
    // Junction between the chordal domain and the right fence: sample
    // points just left/right of the long chord's side segment.
    let b = eps; // symmetric case: chord endpoint at +eps
    for frac in [0.2, 0.5, 0.8] {
        let y = b * b + frac * (eps * eps - b * b).max(0.0) + frac * 0.00;
        let x_on = Point::new(b, b * b + frac * (eps * eps) * 0.0 + 1e-4);
        let _ = y;
        let left = cand
            .evaluate(Point::new(x_on.x - 1e-7, x_on.y))
            .unwrap()
            .value;
        let right = cand
            .evaluate(Point::new(x_on.x + 1e-7, x_on.y))
            .unwrap()
            .value;
        assert!(
            (left - right).abs() < 1e-5 * (1.0 + left.abs()),
            "jump across the junction: {left} vs {right}"
        );
    }
    // The cup's interior: two-point chords of equal data give B = f(a).
    let a = 0.15;
    let x_mid = Point::new(0.0, a * a);
    let v = cand.evaluate(x_mid).unwrap();
    assert!(
        (v.value - f.f(a)).abs() < 1e-8,
        "axis value {} vs f(a) = {}",
        v.value,
        f.f(a)
    );
}

#[test]
fn concavity_scan_exponential() {
    let spec = strip();
    let f = BoundaryFunction::from_expr("exp(t)").unwrap();
    let eps = 0.5;
    let cand = build(&spec, &f, eps);
    let mut rng = CounterRng::new(11);
    let mut checked = 0;
    while checked < 2000 {
        let p = random_point(&mut rng, eps, 2.0);
        let q = random_point(&mut rng, eps, 2.0);
        let mid = Point::new(0.5 * (p.x + q.x), 0.5 * (p.y + q.y));
        // The segment must stay inside the (nonconvex) domain: check the
        // midpoint and quarter points.
        let inside = |x: Point| x.y >= x.x * x.x && x.y <= x.x * x.x + eps * eps;
        let q1 = Point::new(0.75 * p.x + 0.25 * q.x, 0.75 * p.y + 0.25 * q.y);
        let q3 = Point::new(0.25 * p.x + 0.75 * q.x, 0.25 * p.y + 0.75 * q.y);
        if !(inside(mid) && inside(q1) && inside(q3)) {
            continue;
        }
        checked += 1;
        let bp = cand.evaluate(p).unwrap().value;
        let bq = cand.evaluate(q).unwrap().value;
        let bm = cand.evaluate(mid).unwrap().value;
        assert!(
            bm >= 0.5 * (bp + bq) - 1e-7 * (1.0 + bm.abs()),
            "concavity violated: B({mid:?}) = {bm} vs avg {}",
            0.5 * (bp + bq)
        );
    }
}

#[test]
fn gradient_constant_along_extremal_segments() {
    let spec = strip();
    let f = BoundaryFunction::from_expr("exp(t)").unwrap();
    let eps = 0.5;
    let cand = build(&spec, &f, eps);
    let mut rng = CounterRng::new(13);
    for _ in 0..100 {
        let x = random_point(&mut rng, eps, 2.0);
        let Some((p, q)) = cand.extremal_segment(x).unwrap() else {
            continue;
        };
        // Gradients at two interior points of the segment agree.
        let y1 = Point::new(p.x + 0.3 * (q.x - p.x), p.y + 0.3 * (q.y - p.y));
        let y2 = Point::new(p.x + 0.7 * (q.x - p.x), p.y + 0.7 * (q.y - p.y));
        let g1 = cand.evaluate(y1).unwrap().gradient;
        let g2 = cand.evaluate(y2).unwrap().gradient;
        let scale = 1.0 + g1.norm();
        assert!(
            (g1 - g2).norm() <= 1e-7 * scale,
            "gradient varies along the segment: {g1:?} vs {g2:?}"
        );
    }
}

#[test]
fn admissibility_of_simple_pictures() {
    let spec = strip();
    for (expr, eps) in [
        ("exp(t)", 0.5),
        ("-(t^4)", 0.3),
        ("t^4", 0.3),
        ("t^6 - 5*t^4", 0.1),
    ] {
        let f = BoundaryFunction::from_expr(expr).unwrap();
        let profile = essential_roots(&f, &spec, &RootScanOptions::default()).unwrap();
        let graph = simple_picture(&spec, &f, &profile, eps, &EvolveOptions::default()).unwrap();
        let report = check_admissible(&graph, &spec, &f, &AssembleOptions::default()).unwrap();
        assert!(
            report.all_pass(),
            "{expr}: {:#?}",
            report
                .items
                .iter()
                .filter(|i| !i.pass)
                .collect::<Vec<_>>()
        );
    }
}

#[test]
fn tiling_unique_owner() {
    let spec = strip();
    let f = BoundaryFunction::from_expr("t^6 - 5*t^4").unwrap();
    let eps = 0.1;
    let cand = build(&spec, &f, eps);
    let mut rng = CounterRng::new(17);
    for _ in 0..2000 {
        let x = random_point(&mut rng, eps, 2.0);
        let r = cand.evaluate(x);
        assert!(r.is_ok(), "point {x:?} not owned by any figure");
    }
}
