//! Force functions of chords, multifigure spans, and infinities; their
//! tails; and the balance equation whose roots place angle vertices.

use crate::error::{Error, Result};
use crate::fences::{
    beta2_from_infinity, beta2_on_interval, differentials, SeedRecord, TangentFence,
};
use crate::geometry::{BoundaryFunction, DomainSpec, Side};
use crate::num;

/// What a force emanates from.
#[derive(Debug, Clone, PartialEq)]
pub enum ForceSource {
    /// A chord `(a, b)` satisfying the cup equation (a cup's upper chord, a
    /// long chord, or the spanning chord of a multifigure).
    Chord { a: f64, b: f64 },
    /// The infinity of the given sign.
    Infinity { sign: f64 },
}

/// A one-sided force function on the tail of its source.
pub struct ForceFunction {
    pub side: Side,
    pub source: ForceSource,
    pub eps: f64,
    fence: TangentFence,
    /// Cached tail endpoint: `Some(t)` when the force vanishes at a finite
    /// parameter inside the window, `None` when the tail is window-open.
    tail: Option<f64>,
}

impl std::fmt::Debug for ForceFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ForceFunction")
            .field("side", &self.side)
            .field("source", &self.source)
            .field("tail", &self.tail)
            .finish()
    }
}

impl ForceFunction {
    pub fn value(&self, t: f64) -> Result<f64> {
        self.fence.force_at(t)
    }

    pub fn fence(&self) -> &TangentFence {
        &self.fence
    }

    /// The parameter where the force reaches zero, or `None` when it stays
    /// negative up to the window end ("open" tail).
    pub fn tail_end(&self) -> Option<f64> {
        self.tail
    }

    /// Start of the force's domain: the source chord endpoint (or the
    /// window end toward the infinity).
    pub fn source_param(&self) -> f64 {
        match (&self.source, self.side) {
            (ForceSource::Chord { b, .. }, Side::Right) => *b,
            (ForceSource::Chord { a, .. }, Side::Left) => *a,
            (ForceSource::Infinity { .. }, Side::Right) => *self.fence.knots().first().unwrap(),
            (ForceSource::Infinity { .. }, Side::Left) => *self.fence.knots().last().unwrap(),
        }
    }

    /// The interval on which the force is defined and nonpositive.
    pub fn domain(&self) -> (f64, f64) {
        let kf = *self.fence.knots().first().unwrap();
        let kl = *self.fence.knots().last().unwrap();
        match self.side {
            Side::Right => (self.source_param(), self.tail.unwrap_or(kl)),
            Side::Left => (self.tail.unwrap_or(kf), self.source_param()),
        }
    }
}

/// Build the force of a source in the given direction, propagated until it
/// reaches zero or the window boundary.
pub fn force_outside(
    spec: &DomainSpec,
    f: &BoundaryFunction,
    source: ForceSource,
    side: Side,
    eps: f64,
    refine: &[f64],
) -> Result<ForceFunction> {
    let (wlo, whi) = spec.window();
    let fence = match (&source, side) {
        (ForceSource::Chord { a, b }, Side::Right) => {
            let cd = differentials(spec, f, *a, *b)?;
            let sc = f.scalars(spec, *b);
            let g1p = spec.fixed(*b).d1.x;
            let f0 = cd.d_right / (g1p * sc.kappa2_prime);
            beta2_on_interval(
                spec,
                f,
                *b,
                whi.max(*b + 1.0),
                Side::Right,
                eps,
                SeedRecord::ForceAt { t0: *b, force: f0 },
                refine,
            )?
        }
        (ForceSource::Chord { a, b }, Side::Left) => {
            let cd = differentials(spec, f, *a, *b)?;
            let sc = f.scalars(spec, *a);
            let g1p = spec.fixed(*a).d1.x;
            let f0 = cd.d_left / (g1p * sc.kappa2_prime);
            beta2_on_interval(
                spec,
                f,
                wlo.min(*a - 1.0),
                *a,
                Side::Left,
                eps,
                SeedRecord::ForceAt { t0: *a, force: f0 },
                refine,
            )?
        }
        (ForceSource::Infinity { .. }, Side::Right) => {
            beta2_from_infinity(spec, f, Side::Right, eps, whi, 1e-12, refine)?
        }
        (ForceSource::Infinity { .. }, Side::Left) => {
            beta2_from_infinity(spec, f, Side::Left, eps, wlo, 1e-12, refine)?
        }
    };
    let mut force = ForceFunction {
        side,
        source,
        eps,
        fence,
        tail: None,
    };
    force.tail = locate_tail_end(&force)?;
    Ok(force)
}

/// First zero of the force beyond its source, by sign bracketing over the
/// fence knots.
///
/// A force that never leaves the zero band has an empty tail (no standard
/// candidate extends strictly, so the tail ends at the source itself); one
/// that goes strictly negative ends where it first crosses back to zero, or
/// stays open to the window end.
fn locate_tail_end(force: &ForceFunction) -> Result<Option<f64>> {
    let knots = force.fence().knots();
    let forces = force.fence().knot_forces();
    let n = knots.len();
    let src = force.source_param();
    let order: Box<dyn Iterator<Item = usize>> = match force.side {
        Side::Right => Box::new(0..n),
        Side::Left => Box::new((0..n).rev()),
    };
    let slack = 1e-13;
    // Last knot with a strictly negative force, and the first knot of the
    // trailing zero band (if the force grazes zero exactly at a knot).
    let mut last_negative: Option<f64> = None;
    let mut band_entry: Option<f64> = None;
    for i in order {
        let t = knots[i];
        let beyond = match force.side {
            Side::Right => t > src,
            Side::Left => t < src,
        };
        if !beyond {
            continue;
        }
        let val = forces[i];
        let local_scale = 1.0 + force.fence().boundary().tors(force.fence().spec(), t).abs();
        if val > slack * local_scale {
            // Crossed to positive. The zero is at the band entry when the
            // force grazed zero at a knot, else inside the last bracket.
            if let Some(tb) = band_entry {
                return Ok(Some(tb));
            }
            let tp = match last_negative {
                Some(tn) => tn,
                None => return Ok(Some(src)),
            };
            let (lo, hi) = if tp < t { (tp, t) } else { (t, tp) };
            let root = num::solve_bracketed(
                |u| force.value(u).unwrap_or(f64::NAN),
                lo,
                hi,
                1e-13 * (1.0 + hi.abs()),
            );
            return Ok(Some(root.unwrap_or(tp)));
        }
        if val < -slack * local_scale {
            last_negative = Some(t);
            band_entry = None;
        } else if band_entry.is_none() {
            band_entry = Some(t);
        }
    }
    if last_negative.is_some() {
        // Strictly negative to the window end: open tail.
        Ok(None)
    } else {
        // Identically zero within tolerance: empty tail at the source.
        Ok(Some(src))
    }
}

/// Propagate a force value across an interval by the force ODE; used as a
/// consistency check against the fence propagation.
pub fn integrate_force_ode(
    spec: &DomainSpec,
    f: &BoundaryFunction,
    side: Side,
    eps: f64,
    t0: f64,
    f0: f64,
    t1: f64,
    rtol: f64,
) -> f64 {
    num::ode_dopri5(
        |t, y| {
            let sc = f.scalars(spec, t);
            let kappa = match crate::geometry::tangency(spec, t, eps) {
                Ok(td) => td.kappa(side),
                Err(_) => return f64::NAN,
            };
            sc.tors_prime - sc.kappa2_prime / (sc.kappa2 - kappa) * y
        },
        t0,
        f0,
        t1,
        rtol,
        1e-14,
    )
}

/// Solve the balance equation `F_R(u) = F_L(u)` on the intersection of the
/// two tails. The difference is strictly increasing there, which certifies
/// uniqueness; ties at a tail endpoint resolve to the endpoint.
pub fn solve_balance(fr: &ForceFunction, fl: &ForceFunction) -> Result<f64> {
    debug_assert_eq!(fr.side, Side::Right);
    debug_assert_eq!(fl.side, Side::Left);
    let (rlo, rhi) = fr.domain();
    let (llo, lhi) = fl.domain();
    let lo = rlo.max(llo);
    let hi = rhi.min(lhi);
    if !(lo < hi) {
        return Err(Error::Bracket {
            op: "solve_balance",
            lo,
            hi,
            msg: "force tails do not intersect".into(),
        });
    }
    let diff = |u: f64| -> f64 {
        let a = fr.value(u).unwrap_or(f64::NAN);
        let b = fl.value(u).unwrap_or(f64::NAN);
        a - b
    };
    let (dlo, dhi) = (diff(lo), diff(hi));
    if dlo > 0.0 {
        // F_R already above F_L at the left end: the root pins to the
        // endpoint (birdie formation).
        return Ok(lo);
    }
    if dhi < 0.0 {
        return Ok(hi);
    }
    let u = num::brent(diff, lo, hi, dlo, dhi, 1e-13 * (1.0 + hi.abs()), 200)?;
    // Certify monotonicity of the difference on the bracket.
    let samples = 17;
    let mut prev = f64::NEG_INFINITY;
    for i in 0..=samples {
        let x = lo + (hi - lo) * i as f64 / samples as f64;
        let d = diff(x);
        if !(d >= prev - 1e-9 * (1.0 + d.abs())) {
            return Err(Error::Domain {
                op: "solve_balance",
                msg: format!("force difference not increasing near u = {x}"),
            });
        }
        prev = d;
    }
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cups::{chord_at_eps, grow_cup, GrowOptions};
    use crate::geometry::{make_domain, CurveSpec, Preset};

    fn strip() -> DomainSpec {
        make_domain(&CurveSpec::Preset(Preset::ParabolicStrip { eps_max: 4.0 })).unwrap()
    }

    fn sextic_cup_chord(spec: &DomainSpec, f: &BoundaryFunction, eps: f64) -> (f64, f64) {
        let cup = grow_cup(spec, f, 0.0, 1.2, eps, &GrowOptions::default()).unwrap();
        let lc = chord_at_eps(&cup, spec, eps).unwrap();
        assert!(lc.full);
        (lc.a, lc.b)
    }

    #[test]
    fn chord_force_initial_value_and_ode() {
        let spec = strip();
        let f = BoundaryFunction::from_expr("t^6 - 5*t^4").unwrap();
        let eps = 0.1;
        let (a, b) = sextic_cup_chord(&spec, &f, eps);
        let force = force_outside(
            &spec,
            &f,
            ForceSource::Chord { a, b },
            Side::Right,
            eps,
            &[],
        )
        .unwrap();
        // Initial value F(b) = D_R / (g1' kappa2').
        let cd = differentials(&spec, &f, a, b).unwrap();
        let sc = f.scalars(&spec, b);
        let f0 = cd.d_right / (spec.fixed(b).d1.x * sc.kappa2_prime);
        assert!((force.value(b).unwrap() - f0).abs() < 1e-9 * (1.0 + f0.abs()));
        assert!(f0 < 0.0);
        // ODE propagation agrees with the fence propagation.
        let t1 = b + 0.6;
        let by_ode = integrate_force_ode(&spec, &f, Side::Right, eps, b, f0, t1, 1e-11);
        let by_fence = force.value(t1).unwrap();
        assert!(
            (by_ode - by_fence).abs() < 1e-7 * (1.0 + by_fence.abs()),
            "ode {by_ode} vs fence {by_fence}"
        );
    }

    #[test]
    fn right_tail_covers_v2_for_small_eps() {
        let spec = strip();
        let f = BoundaryFunction::from_expr("t^6 - 5*t^4").unwrap();
        let eps = 0.05;
        let (a, b) = sextic_cup_chord(&spec, &f, eps);
        let force = force_outside(
            &spec,
            &f,
            ForceSource::Chord { a, b },
            Side::Right,
            eps,
            &[1.0],
        )
        .unwrap();
        let tr = force.tail_end().expect("finite right tail");
        assert!(tr > 1.0, "tail end {tr} should pass v2 = 1");
        assert!(force.value(1.0).unwrap() < 0.0);
        // The tail endpoint tends to v2 as eps -> 0 (monotone gap).
        let mut last_gap = f64::INFINITY;
        for e in [0.2, 0.1, 0.05] {
            let (a, b) = sextic_cup_chord(&spec, &f, e);
            let fo = force_outside(&spec, &f, ForceSource::Chord { a, b }, Side::Right, e, &[1.0])
                .unwrap();
            let t = fo.tail_end().unwrap();
            let gap = (t - 1.0).abs();
            assert!(gap < last_gap + 1e-12, "gap {gap} vs {last_gap} at eps={e}");
            last_gap = gap;
        }
    }

    #[test]
    fn forces_decrease_in_eps_outside_chord() {
        let spec = strip();
        let f = BoundaryFunction::from_expr("t^6 - 5*t^4").unwrap();
        let probe = 0.9;
        let mut prev = f64::INFINITY;
        for eps in [0.05, 0.1, 0.2] {
            let (a, b) = sextic_cup_chord(&spec, &f, eps);
            let force =
                force_outside(&spec, &f, ForceSource::Chord { a, b }, Side::Right, eps, &[])
                    .unwrap();
            let v = force.value(probe).unwrap();
            assert!(v < prev - 1e-12, "force not strictly decreasing: {v} vs {prev}");
            prev = v;
        }
    }

    #[test]
    fn monotonicity_of_f_minus_tors() {
        let spec = strip();
        let f = BoundaryFunction::from_expr("t^6 - 5*t^4").unwrap();
        let eps = 0.1;
        let (a, b) = sextic_cup_chord(&spec, &f, eps);
        let fr = force_outside(&spec, &f, ForceSource::Chord { a, b }, Side::Right, eps, &[])
            .unwrap();
        let (lo, hi) = fr.domain();
        let mut prev = f64::NEG_INFINITY;
        for i in 0..=1000 {
            let t = lo + (hi - lo).min(2.0) * i as f64 / 1000.0;
            let v = fr.value(t).unwrap() - f.tors(&spec, t);
            assert!(v >= prev - 1e-10 * (1.0 + v.abs()), "not increasing at {t}");
            prev = v;
        }
    }

    #[test]
    fn balance_roots_near_v_roots_for_small_eps() {
        let spec = strip();
        let f = BoundaryFunction::from_expr("t^6 - 5*t^4").unwrap();
        // u2 between the cup at 0 and +infinity, near v2 = 1.
        let mut prev_gap = f64::INFINITY;
        for eps in [0.2, 0.1, 0.05] {
            let (a, b) = sextic_cup_chord(&spec, &f, eps);
            let fr = force_outside(&spec, &f, ForceSource::Chord { a, b }, Side::Right, eps, &[])
                .unwrap();
            let fl = force_outside(
                &spec,
                &f,
                ForceSource::Infinity { sign: 1.0 },
                Side::Left,
                eps,
                &[],
            )
            .unwrap();
            let u2 = solve_balance(&fr, &fl).unwrap();
            let gap = (u2 - 1.0).abs();
            assert!(gap < prev_gap + 1e-12, "|u2 - v2| = {gap} not shrinking");
            assert!(gap < 0.5);
            prev_gap = gap;
            // Residual certificate.
            let r = fr.value(u2).unwrap() - fl.value(u2).unwrap();
            assert!(r.abs() < 1e-10 * (1.0 + fr.value(u2).unwrap().abs()));
        }
    }

    #[test]
    fn symmetric_balance_root_at_zero() {
        let spec = strip();
        let f = BoundaryFunction::from_expr("t^4").unwrap();
        let eps = 0.25;
        let fr = force_outside(
            &spec,
            &f,
            ForceSource::Infinity { sign: -1.0 },
            Side::Right,
            eps,
            &[],
        )
        .unwrap();
        let fl = force_outside(
            &spec,
            &f,
            ForceSource::Infinity { sign: 1.0 },
            Side::Left,
            eps,
            &[],
        )
        .unwrap();
        let u = solve_balance(&fr, &fl).unwrap();
        assert!(u.abs() < 1e-9, "u = {u}");
    }

    #[test]
    fn torsion_free_force_is_zero() {
        let spec = strip();
        let f = BoundaryFunction::from_expr("1 + t + t*t").unwrap();
        // Any pair satisfies the cup equation; D = 0, so F = 0 identically.
        let force = force_outside(
            &spec,
            &f,
            ForceSource::Chord { a: -1.0, b: 1.0 },
            Side::Right,
            0.3,
            &[],
        )
        .unwrap();
        assert_eq!(force.tail_end(), Some(1.0));
        assert!(force.value(1.0).unwrap().abs() < 1e-12);
    }
}
