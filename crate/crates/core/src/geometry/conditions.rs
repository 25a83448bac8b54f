//! Domain validation scans, summability checks at the infinities, and the
//! classification of degenerate infinities.

use super::{tangency, BoundaryFunction, DomainSpec, Side};
use crate::error::{Error, Result};
use crate::num;

/// One validated condition with up to a handful of failure witnesses.
#[derive(Debug, Clone, serde::Serialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    /// `(t, eps, value)` triples where the condition failed.
    pub failures: Vec<(f64, f64, f64)>,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct ValidationReport {
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

const MAX_WITNESSES: usize = 8;

fn push_failure(check: &mut CheckResult, t: f64, eps: f64, v: f64) {
    check.pass = false;
    if check.failures.len() < MAX_WITNESSES {
        check.failures.push((t, eps, v));
    }
}

/// Scan the domain conditions on the product of the given grids.
pub fn validate_domain(spec: &DomainSpec, t_grid: &[f64], eps_grid: &[f64]) -> ValidationReport {
    let mut g1_positive = CheckResult {
        name: "g1' > 0 on fixed and free boundaries".into(),
        pass: true,
        failures: vec![],
    };
    let mut convex = CheckResult {
        name: "g2''g1' - g2'g1'' > 0 (strict convexity)".into(),
        pass: true,
        failures: vec![],
    };
    let mut nesting = CheckResult {
        name: "epigraphs strictly nested in eps".into(),
        pass: true,
        failures: vec![],
    };
    let mut kappa_eps = CheckResult {
        name: "d kappa / d eps != 0 (monotone tangent slopes)".into(),
        pass: true,
        failures: vec![],
    };
    let mut two_tangents = CheckResult {
        name: "two tangents from every fixed-boundary point".into(),
        pass: true,
        failures: vec![],
    };

    for &t in t_grid {
        let fj = spec.fixed(t);
        if !(fj.d1.x > 0.0) {
            push_failure(&mut g1_positive, t, 0.0, fj.d1.x);
        }
        let conv = fj.d2.y * fj.d1.x - fj.d1.y * fj.d2.x;
        if !(conv > 0.0) {
            push_failure(&mut convex, t, 0.0, conv);
        }
        for &eps in eps_grid {
            let fr = spec.free(t, eps);
            if !(fr.d1.x > 0.0) {
                push_failure(&mut g1_positive, t, eps, fr.d1.x);
            }
            let convf = fr.d2.y * fr.d1.x - fr.d1.y * fr.d2.x;
            if !(convf > 0.0) {
                push_failure(&mut convex, t, eps, convf);
            }
        }
    }

    // Nesting: free boundary at eps1 strictly below the free graph at eps2.
    for pair in eps_grid.windows(2) {
        let (e1, e2) = (pair[0], pair[1]);
        if !(e1 < e2) {
            continue;
        }
        for &t in t_grid {
            let lower = spec.free(t, e1).p;
            match spec.free_param_at_x1(lower.x, e2) {
                Ok(s2) => {
                    let upper = spec.free(s2, e2).p;
                    if !(lower.y < upper.y) {
                        push_failure(&mut nesting, t, e2, upper.y - lower.y);
                    }
                }
                Err(_) => push_failure(&mut nesting, t, e2, f64::NAN),
            }
        }
    }

    // Tangency existence and eps-monotonicity of the tangent slopes.
    for &t in t_grid {
        let mut prev: Option<(f64, f64, f64)> = None;
        for &eps in eps_grid {
            if !(eps > 0.0) || eps >= spec.eps_max() {
                continue;
            }
            match tangency(spec, t, eps) {
                Ok(td) => {
                    if let Some((pe, pkr, pkl)) = prev {
                        let dkr = (td.kappa_right - pkr) / (eps - pe);
                        let dkl = (td.kappa_left - pkl) / (eps - pe);
                        if !(dkr < 0.0) {
                            push_failure(&mut kappa_eps, t, eps, dkr);
                        }
                        if !(dkl > 0.0) {
                            push_failure(&mut kappa_eps, t, eps, dkl);
                        }
                    }
                    prev = Some((eps, td.kappa_right, td.kappa_left));
                }
                Err(_) => {
                    push_failure(&mut two_tangents, t, eps, f64::NAN);
                    prev = None;
                }
            }
        }
    }

    ValidationReport {
        checks: vec![g1_positive, convex, nesting, kappa_eps, two_tangents],
    }
}

/// Integral of `lambda_side` between two parameters (tangency solves inside).
pub fn lambda_integral(spec: &DomainSpec, side: Side, a: f64, b: f64, eps: f64) -> f64 {
    num::integrate(
        |t| tangency(spec, t, eps).map(|td| td.lambda(side)).unwrap_or(f64::NAN),
        a,
        b,
        1e-11,
    )
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct SummabilityReport {
    /// Condition "reg": finitely many monotonicity intervals of the torsion.
    pub reg_pass: bool,
    pub monotonicity_intervals: usize,
    /// The `-infinity` integral (right tangents) converges.
    pub neg_inf_pass: bool,
    /// The `+infinity` integral (left tangents) converges.
    pub pos_inf_pass: bool,
    /// Estimated truncation bounds for the two integrals.
    pub neg_inf_tail_bound: f64,
    pub pos_inf_tail_bound: f64,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct ConditionsReport {
    pub summability: SummabilityReport,
}

/// Check Conditions "reg" and "sum" for given data and eps.
pub fn check_conditions(
    f: &BoundaryFunction,
    spec: &DomainSpec,
    eps: f64,
    opts: &super::profile::RootScanOptions,
) -> ConditionsReport {
    let (reg_pass, intervals) = match super::essential_roots(f, spec, opts) {
        Ok(_) => (true, count_monotonicity_intervals(f, spec, opts)),
        Err(Error::Budget { residual, .. }) => (false, residual as usize),
        Err(_) => (false, usize::MAX),
    };

    let (wlo, whi) = spec.window();
    let v = 0.5 * (wlo + whi);

    // -infinity side: integral of f'(tau) exp(-int_tau^v lambda_R) as the
    // panels march left; convergence is judged by panel decay.
    let neg = summability_side(f, spec, eps, v, Side::Right, wlo);
    let pos = summability_side(f, spec, eps, v, Side::Left, whi);

    ConditionsReport {
        summability: SummabilityReport {
            reg_pass,
            monotonicity_intervals: intervals,
            neg_inf_pass: neg.0,
            pos_inf_pass: pos.0,
            neg_inf_tail_bound: neg.1,
            pos_inf_tail_bound: pos.1,
        },
    }
}

fn count_monotonicity_intervals(
    f: &BoundaryFunction,
    spec: &DomainSpec,
    opts: &super::profile::RootScanOptions,
) -> usize {
    let (lo, hi) = spec.window();
    let n = opts.samples.max(16);
    let mut count = 0usize;
    let mut last = 0i8;
    for i in 0..=n {
        let t = lo + (hi - lo) * i as f64 / n as f64;
        let v = f.tors_prime(spec, t);
        let s = if v > 0.0 {
            1
        } else if v < 0.0 {
            -1
        } else {
            0
        };
        if s != 0 && s != last {
            count += 1;
            last = s;
        }
    }
    count
}

/// Convergence scan for one summability integral. Returns (pass, tail bound).
fn summability_side(
    f: &BoundaryFunction,
    spec: &DomainSpec,
    eps: f64,
    v: f64,
    side: Side,
    window_end: f64,
) -> (bool, f64) {
    // Panel walk: accumulate int f'(tau) K(tau) over panels marching toward
    // the infinity; K is the exponential lambda kernel anchored at v.
    let dir: f64 = match side {
        Side::Right => -1.0,
        Side::Left => 1.0,
    };
    let mut cum_lambda = 0.0; // int from the moving edge to v of lambda
    let mut edge = v;
    let mut span = 0.5;
    let mut total = 0.0;
    let mut last_panel = f64::INFINITY;
    let mut growth = 0usize;
    for _ in 0..64 {
        let next = edge + dir * span;
        let next = if dir < 0.0 {
            next.max(window_end)
        } else {
            next.min(window_end)
        };
        // lambda integral over [next, edge] (or [edge, next] on the left side)
        let lam = |t: f64| {
            tangency(spec, t, eps)
                .map(|td| td.lambda(side))
                .unwrap_or(f64::NAN)
        };
        let dl = match side {
            Side::Right => num::gauss15(lam, next, edge),
            Side::Left => num::gauss15(lam, edge, next),
        };
        let base = cum_lambda;
        let panel = num::gauss15(
            |tau| {
                let lam_part = match side {
                    Side::Right => num::gauss15(lam, tau, edge),
                    Side::Left => num::gauss15(lam, edge, tau),
                };
                let expo = match side {
                    Side::Right => -(base + lam_part),
                    Side::Left => base + lam_part,
                };
                f.jet(tau)[1] * expo.exp()
            },
            if dir < 0.0 { next } else { edge },
            if dir < 0.0 { edge } else { next },
        );
        total += panel;
        cum_lambda += dl;
        edge = next;
        span *= 1.7;
        let pa = panel.abs();
        if pa <= 1e-10 * (1.0 + total.abs()) {
            return (true, pa);
        }
        if pa > last_panel * 1.05 {
            growth += 1;
            if growth >= 4 {
                return (false, pa);
            }
        } else {
            growth = 0;
        }
        let ratio = pa / last_panel;
        last_panel = pa;
        if (edge - window_end).abs() < 1e-12 {
            // Window exhausted. Accept when the panels are decaying and
            // bound the tail by the geometric extrapolation.
            if ratio < 0.95 {
                let bound = pa * ratio / (1.0 - ratio);
                return (true, bound);
            }
            return (false, pa);
        }
    }
    (false, last_panel)
}

/// Infinity case labels per side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum InfinityCase {
    /// The technical decay conditions hold; optimizers exist.
    Regular,
    /// The lambda integral converges at the infinity.
    A,
    /// Lambda diverges but theta_1 does not vanish.
    B,
    /// Lambda diverges, theta_1 vanishes, theta_2 does not.
    C,
    Inconclusive,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct SideDiagnostics {
    pub case: InfinityCase,
    /// Estimated total lambda integral toward the infinity (may be large
    /// when divergent; see `lambda_converges`).
    pub lambda_integral: f64,
    pub lambda_converges: bool,
    pub theta1_limit: f64,
    pub theta2_limit: f64,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct InfinityClassification {
    pub neg: SideDiagnostics,
    pub pos: SideDiagnostics,
}

/// Classify both infinities of the domain at `eps`.
pub fn classify_infinities(spec: &DomainSpec, eps: f64) -> Result<InfinityClassification> {
    let (wlo, whi) = spec.window();
    let neg = classify_side(spec, eps, Side::Right, 0.25 * wlo + 0.75 * whi, wlo)?;
    let pos = classify_side(spec, eps, Side::Left, 0.75 * wlo + 0.25 * whi, whi)?;
    Ok(InfinityClassification { neg, pos })
}

fn classify_side(
    spec: &DomainSpec,
    eps: f64,
    side: Side,
    v: f64,
    window_end: f64,
) -> Result<SideDiagnostics> {
    let dir: f64 = match side {
        Side::Right => -1.0,
        Side::Left => 1.0,
    };
    // Sample points marching toward the infinity.
    let mut taus = vec![];
    let mut step = 1.0f64;
    let mut tau = v;
    while (window_end - tau) * dir > 0.05 {
        tau += dir * step;
        if (window_end - tau) * dir < 0.0 {
            tau = window_end;
        }
        taus.push(tau);
        step *= 1.5;
    }
    if taus.len() < 4 {
        return Err(Error::Domain {
            op: "classify_infinities",
            msg: "window too small to probe the infinity".into(),
        });
    }
    // Cumulative lambda integral and theta values at the samples.
    let mut cum = 0.0;
    let mut edge = v;
    let mut lam_cum = Vec::with_capacity(taus.len());
    let mut th1 = Vec::with_capacity(taus.len());
    let mut th2 = Vec::with_capacity(taus.len());
    for &tau in &taus {
        let dl = match side {
            Side::Right => lambda_integral(spec, side, tau, edge, eps),
            Side::Left => lambda_integral(spec, side, edge, tau, eps),
        };
        cum += dl;
        edge = tau;
        lam_cum.push(cum);
        let td = tangency(spec, tau, eps)?;
        let g = spec.fixed(tau).p;
        let w = td.w(side);
        // theta = (g - w) exp(-int_tau^v lambda_R) toward -infinity,
        //         (g - w) exp(+int_v^tau lambda_L) toward +infinity;
        // `cum` accumulates the integral between v and tau in both cases.
        let kernel = match side {
            Side::Right => (-cum).exp(),
            Side::Left => cum.exp(),
        };
        th1.push((g.x - w.x) * kernel);
        th2.push((g.y - w.y) * kernel);
    }
    let k = taus.len();
    let lam_increments: Vec<f64> = lam_cum.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    // Convergence: increments decaying geometrically despite the growing
    // panel widths, and the last one already negligible against the total.
    let m = lam_increments.len();
    let lambda_converges = m >= 3 && {
        let last = lam_increments[m - 1];
        let prev = lam_increments[m - 2];
        let prev2 = lam_increments[m - 3];
        last < prev && prev < prev2
            && last < 0.8 * prev
            && last < 1e-3 * (1.0 + lam_cum[k - 1].abs())
    };
    let tol = 1e-7;
    let t1 = th1[k - 1];
    let t2 = th2[k - 1];
    let t1_vanishes = t1.abs() < tol * (1.0 + th1[0].abs());
    let t2_vanishes = t2.abs() < tol * (1.0 + th2[0].abs());
    let t1_stable = (th1[k - 1] - th1[k - 2]).abs() < 0.05 * th1[k - 1].abs().max(1e-300);
    let t2_stable = (th2[k - 1] - th2[k - 2]).abs() < 0.05 * th2[k - 1].abs().max(1e-300);
    let case = if lambda_converges {
        InfinityCase::A
    } else if !t1_vanishes && t1_stable {
        InfinityCase::B
    } else if t1_vanishes && !t2_vanishes && t2_stable {
        InfinityCase::C
    } else if t1_vanishes && t2_vanishes {
        InfinityCase::Regular
    } else {
        InfinityCase::Inconclusive
    };
    Ok(SideDiagnostics {
        case,
        lambda_integral: lam_cum[k - 1],
        lambda_converges,
        theta1_limit: t1,
        theta2_limit: t2,
    })
}

/// The companion condition from the infinite-Bellman tables: given a side's
/// case, decide whether the boundary data forces `B = +infinity` off the
/// fixed boundary. Returns the reason when it does.
pub fn bellman_infinite_reason(
    spec: &DomainSpec,
    f: &BoundaryFunction,
    class: &InfinityClassification,
    eps: f64,
) -> Option<String> {
    let (wlo, whi) = spec.window();
    // Probe the companion limits near each infinity.
    let probe_neg = wlo + 0.02 * (whi - wlo);
    let probe_pos = whi - 0.02 * (whi - wlo);
    let sc_neg = f.scalars(spec, probe_neg);
    let sc_pos = f.scalars(spec, probe_pos);
    let big = 1e6;
    match class.neg.case {
        InfinityCase::A => {
            if f.f(probe_neg) > big {
                return Some(format!(
                    "case A at -infinity with f(-inf) = +inf (f({probe_neg:.2}) = {:.3e})",
                    f.f(probe_neg)
                ));
            }
        }
        InfinityCase::B => {
            if sc_neg.kappa3 < -big {
                return Some("case B at -infinity with kappa3(-inf) = -inf".into());
            }
        }
        InfinityCase::C => {
            if sc_neg.tors > big {
                return Some("case C at -infinity with tors(-inf) = +inf".into());
            }
        }
        _ => {}
    }
    match class.pos.case {
        InfinityCase::A => {
            if f.f(probe_pos) > big {
                return Some("case A at +infinity with f(+inf) = +inf".into());
            }
        }
        InfinityCase::B => {
            if sc_pos.kappa3 > big {
                return Some("case B at +infinity with kappa3(+inf) = +inf".into());
            }
        }
        InfinityCase::C => {
            if sc_pos.tors > big {
                return Some("case C at +infinity with tors(+inf) = +inf".into());
            }
        }
        _ => {}
    }
    // Regular sides: the summability conditions decide.
    let report = check_conditions(f, spec, eps, &super::profile::RootScanOptions::default());
    if class.neg.case == InfinityCase::Regular && !report.summability.neg_inf_pass {
        return Some("summability fails at -infinity".into());
    }
    if class.pos.case == InfinityCase::Regular && !report.summability.pos_inf_pass {
        return Some("summability fails at +infinity".into());
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_domain, CurveSpec, Preset};

    fn strip() -> DomainSpec {
        make_domain(&CurveSpec::Preset(Preset::ParabolicStrip { eps_max: 4.0 })).unwrap()
    }

    fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect()
    }

    #[test]
    fn strip_validates() {
        let spec = strip();
        let rep = validate_domain(&spec, &grid(-3.0, 3.0, 13), &[0.25, 0.5, 1.0]);
        assert!(rep.all_pass(), "{rep:?}");
    }

    #[test]
    fn eps_independent_free_boundary_fails_nesting() {
        let spec = make_domain(&CurveSpec::Preset(Preset::Custom {
            fixed: ["t".into(), "t*t".into()],
            free: ["t".into(), "t*t + 1".into()],
            eps_max: 1.0,
        }))
        .unwrap();
        let rep = validate_domain(&spec, &grid(-2.0, 2.0, 9), &[0.2, 0.4, 0.8]);
        let nesting = rep.checks.iter().find(|c| c.name.contains("nested")).unwrap();
        assert!(!nesting.pass);
    }

    #[test]
    fn strip_exp_summability_depends_on_eps() {
        let spec = strip();
        let f = BoundaryFunction::from_expr("exp(t)").unwrap();
        let opts = super::super::profile::RootScanOptions::default();
        let ok = check_conditions(&f, &spec, 0.5, &opts);
        assert!(ok.summability.reg_pass);
        assert!(ok.summability.neg_inf_pass);
        assert!(ok.summability.pos_inf_pass, "{ok:?}");
        let bad = check_conditions(&f, &spec, 2.0, &opts);
        assert!(!bad.summability.pos_inf_pass, "{bad:?}");
        // The -infinity side still converges for eps = 2.
        assert!(bad.summability.neg_inf_pass);
    }

    #[test]
    fn strip_is_regular_at_both_infinities() {
        let spec = strip();
        let c = classify_infinities(&spec, 0.5).unwrap();
        assert_eq!(c.neg.case, InfinityCase::Regular, "{c:?}");
        assert_eq!(c.pos.case, InfinityCase::Regular, "{c:?}");
    }

    #[test]
    fn example_domains_classify_a_b_c() {
        let cases = [
            (Preset::ExampleA, InfinityCase::A),
            (Preset::ExampleB, InfinityCase::B),
            (Preset::ExampleC, InfinityCase::C),
        ];
        for (preset, expect) in cases {
            let spec = make_domain(&CurveSpec::Preset(preset.clone())).unwrap();
            let c = classify_infinities(&spec, 0.5).unwrap();
            assert_eq!(c.neg.case, expect, "{preset:?}: {:?}", c.neg);
        }
    }
}
