//! Growing chordal domains: a cup from a torsion root and a general chordal
//! domain from a starting chord, by continuation in the width parameter.

use crate::error::{Error, Result};
use crate::fences::{cup_residual, cup_scale, differentials, ChordData, ChordalCandidate};
use crate::geometry::{BoundaryFunction, DomainSpec, Point};
use crate::num;

/// Continuation options for chordal-domain growth.
#[derive(Debug, Clone)]
pub struct GrowOptions {
    pub steps: usize,
    /// Grading exponent of the theta grid (dense near zero width).
    pub grading: f64,
    pub residual_rtol: f64,
    /// When set, growth failures past the first few steps return the family
    /// grown so far instead of an error.
    pub best_effort: bool,
}

impl Default for GrowOptions {
    fn default() -> Self {
        GrowOptions {
            steps: 160,
            grading: 1.6,
            residual_rtol: 1e-11,
            best_effort: false,
        }
    }
}

/// `h(t, theta)`: the cup-equation determinant for the pair
/// `(t - width(theta), t)`, in the orientation for which
/// `h(origin) > 0 > h(origin + theta)` inside a growing cup.
fn h_fn(spec: &DomainSpec, f: &BoundaryFunction, t: f64, s: f64) -> f64 {
    -cup_residual(spec, f, s, t)
}

fn predictor_slope(cd: &ChordData) -> f64 {
    let num = cd.c_left * cd.d_left;
    let den = cd.c_left * cd.d_left - cd.c_right * cd.d_right;
    if den.abs() < 1e-300 {
        0.5
    } else {
        num / den
    }
}

/// Grow a cup from a torsion root of kind `c` (sign change + to -) at `c`.
///
/// Emits the chord family `(a(theta), b(theta))` for `theta` on a graded
/// grid up to `theta_max`, each pair solving the cup equation, with both
/// differentials strictly negative for positive width.
pub fn grow_cup(
    spec: &DomainSpec,
    f: &BoundaryFunction,
    c: f64,
    theta_max: f64,
    eps: f64,
    opts: &GrowOptions,
) -> Result<ChordalCandidate> {
    if !(theta_max > 0.0) {
        return Err(Error::Domain {
            op: "grow_cup",
            msg: format!("theta_max must be positive, got {theta_max}"),
        });
    }
    let mut pairs: Vec<(f64, f64)> = vec![(c, c)];
    let mut b_prev = c;
    let mut theta_prev = 0.0f64;
    let mut cd_prev: Option<ChordData> = None;
    for j in 1..=opts.steps {
        let theta = theta_max * ((j as f64) / (opts.steps as f64)).powf(opts.grading);
        // Predictor for the upper endpoint.
        let guess = match &cd_prev {
            Some(cd) => b_prev + predictor_slope(cd) * (theta - theta_prev),
            None => c + 0.5 * theta,
        };
        // Corrector: the unique root of h(., theta) in (c, c + theta).
        let res = |t: f64| h_fn(spec, f, t, t - theta);
        let lo = b_prev.max(c + 1e-14 * (1.0 + c.abs()));
        let hi = c + theta;
        let (flo, fhi) = (res(lo), res(hi));
        let b = if flo >= 0.0 && fhi <= 0.0 {
            num::brent(res, lo, hi, flo, fhi, 1e-14 * (1.0 + hi.abs()), 200)?
        } else if flo <= 0.0 && j == 1 {
            // Zero-differential start: seed by the explicit corrector at a
            // tiny width before continuing.
            guess
        } else if opts.best_effort && pairs.len() >= 2 {
            return ChordalCandidate::new(spec, f, pairs, eps);
        } else {
            return Err(Error::Bracket {
                op: "grow_cup",
                lo,
                hi,
                msg: format!(
                    "bracket property failed at theta = {theta}: h({lo:.6}) = {flo:.3e}, \
                     h({hi:.6}) = {fhi:.3e} (shrink theta_max)"
                ),
            });
        };
        let a = b - theta;
        let scale = cup_scale(spec, f, a, b);
        let cd = differentials(spec, f, a, b)?;
        if cd.residual.abs() > opts.residual_rtol * scale {
            return Err(Error::Budget {
                op: "grow_cup",
                residual: cd.residual.abs() / scale,
            });
        }
        if !(cd.d_left < 0.0 && cd.d_right < 0.0) {
            return Err(Error::Domain {
                op: "grow_cup",
                msg: format!(
                    "differentials not negative at theta = {theta}: D_L = {:.3e}, D_R = {:.3e}",
                    cd.d_left, cd.d_right
                ),
            });
        }
        pairs.push((a, b));
        b_prev = b;
        theta_prev = theta;
        cd_prev = Some(cd);
    }
    ChordalCandidate::new(spec, f, pairs, eps)
}

/// Sample-based check of Condition StartChord: the determinant
/// `L(t) = det(gamma'(t), gamma'(a0), gamma'(b0))` is negative just right of
/// `b0` and positive just left of `a0`.
pub fn start_chord_condition(
    spec: &DomainSpec,
    f: &BoundaryFunction,
    a0: f64,
    b0: f64,
    probe: f64,
) -> bool {
    let ja = f.gamma_jets(spec, a0);
    let jb = f.gamma_jets(spec, b0);
    let l = |t: f64| -> f64 {
        let jt = f.gamma_jets(spec, t);
        let d = jt[0];
        d[0] * (ja[0][1] * jb[0][2] - ja[0][2] * jb[0][1])
            - d[1] * (ja[0][0] * jb[0][2] - ja[0][2] * jb[0][0])
            + d[2] * (ja[0][0] * jb[0][1] - ja[0][1] * jb[0][0])
    };
    for k in 1..=4 {
        let d = probe * k as f64 / 4.0;
        if !(l(b0 + d) < 0.0) || !(l(a0 - d) > 0.0) {
            return false;
        }
    }
    true
}

/// Grow a chordal domain upward from a starting chord `(a0, b0)` satisfying
/// the cup equation.
pub fn grow_chord(
    spec: &DomainSpec,
    f: &BoundaryFunction,
    a0: f64,
    b0: f64,
    theta_max: f64,
    eps: f64,
    opts: &GrowOptions,
) -> Result<ChordalCandidate> {
    let scale0 = cup_scale(spec, f, a0, b0);
    let r0 = cup_residual(spec, f, a0, b0);
    if r0.abs() > 1e-9 * scale0 {
        return Err(Error::Domain {
            op: "grow_chord",
            msg: format!("starting chord violates the cup equation: residual {r0:.3e}"),
        });
    }
    if !start_chord_condition(spec, f, a0, b0, 1e-3 * (1.0 + (b0 - a0).abs())) {
        return Err(Error::Domain {
            op: "grow_chord",
            msg: "StartChord sign condition fails at the starting chord".into(),
        });
    }
    let gap = b0 - a0;
    let mut pairs: Vec<(f64, f64)> = vec![(a0, b0)];
    let mut b_prev = b0;
    let mut theta_prev = 0.0f64;
    let mut cd_prev = differentials(spec, f, a0, b0).ok();
    for j in 1..=opts.steps {
        let theta = theta_max * ((j as f64) / (opts.steps as f64)).powf(opts.grading);
        let res = |t: f64| h_fn(spec, f, t, t - gap - theta);
        let lo = b_prev.max(b0 + 1e-14 * (1.0 + b0.abs()));
        let hi = b0 + theta;
        let (flo, fhi) = (res(lo), res(hi));
        let b = if flo >= 0.0 && fhi <= 0.0 {
            num::brent(res, lo, hi, flo, fhi, 1e-14 * (1.0 + hi.abs()), 200)?
        } else {
            // Fall back to the predictor with a local polish.
            let guess = match &cd_prev {
                Some(cd) => b_prev + predictor_slope(cd) * (theta - theta_prev),
                None => b_prev + 0.5 * (theta - theta_prev),
            };
            let half = (theta - theta_prev).max(1e-9);
            let (g_lo, g_hi) = (guess - half, guess + half);
            let (glo, ghi) = (res(g_lo), res(g_hi));
            if glo * ghi <= 0.0 {
                num::brent(res, g_lo, g_hi, glo, ghi, 1e-14 * (1.0 + hi.abs()), 200)?
            } else {
                return Err(Error::Bracket {
                    op: "grow_chord",
                    lo,
                    hi,
                    msg: format!("continuation step rejected at theta = {theta}"),
                });
            }
        };
        let a = b - gap - theta;
        let scale = cup_scale(spec, f, a, b);
        let cd = differentials(spec, f, a, b)?;
        if cd.residual.abs() > opts.residual_rtol * scale {
            return Err(Error::Budget {
                op: "grow_chord",
                residual: cd.residual.abs() / scale,
            });
        }
        if !(cd.d_left < 0.0 && cd.d_right < 0.0) {
            return Err(Error::Domain {
                op: "grow_chord",
                msg: format!(
                    "differentials not negative at theta = {theta}: D_L = {:.3e}, D_R = {:.3e}",
                    cd.d_left, cd.d_right
                ),
            });
        }
        pairs.push((a, b));
        b_prev = b;
        theta_prev = theta;
        cd_prev = Some(cd);
    }
    ChordalCandidate::new(spec, f, pairs, eps)
}

/// The chord of a grown family tangent to the free boundary at `eps`.
#[derive(Debug, Clone, Copy)]
pub struct LongChord {
    pub a: f64,
    pub b: f64,
    /// Free-boundary parameter of the tangency point.
    pub s_tangent: f64,
    /// False when the family's bottom chord already lies above the free
    /// boundary (the domain is not yet full at this eps).
    pub full: bool,
}

/// Signed gap between the chord `(a, b)` and the free boundary: positive when
/// the free boundary lies strictly above the chord line, zero at tangency.
/// Also returns the free parameter of the nearest point.
pub fn chord_gap(
    spec: &DomainSpec,
    a: f64,
    b: f64,
    eps: f64,
) -> Result<(f64, f64)> {
    let ga = spec.fixed(a).p;
    let gb = spec.fixed(b).p;
    let d = gb - ga;
    // The minimizer: free tangent parallel to the chord.
    let slope_res = |s: f64| -> f64 {
        let fj = spec.free(s, eps);
        d.cross(fj.d1)
    };
    let (wlo, whi) = spec.free_window();
    let s0 = spec.free_param_at_x1(0.5 * (ga.x + gb.x), eps).unwrap_or(0.5 * (a + b));
    // The slope residual is increasing in s (convex free boundary), so the
    // root lies to the right when the residual starts negative.
    let dir = if slope_res(s0) < 0.0 { 1.0 } else { -1.0 };
    let s_star = num::expand_and_solve(
        slope_res,
        s0,
        dir,
        0.1,
        if dir > 0.0 { whi } else { wlo },
        1e-13 * (1.0 + s0.abs()),
    )?;
    let w = spec.free(s_star, eps).p;
    let gap = d.cross(w - ga) / d.norm();
    Ok((gap, s_star))
}

/// Locate the chord of a grown chordal family that is tangent to the free
/// boundary of `Omega_eps`.
pub fn chord_at_eps(
    domain: &ChordalCandidate,
    spec: &DomainSpec,
    eps: f64,
) -> Result<LongChord> {
    let (a_bot, b_bot) = domain.bottom();
    let (_, b_top) = domain.top();
    let gap_of_b = |b: f64| -> f64 {
        let a = match domain.a_of_b(b) {
            Ok(a) => a,
            Err(_) => return f64::NAN,
        };
        chord_gap(spec, a, b, eps).map(|p| p.0).unwrap_or(f64::NAN)
    };
    let bot_gap = if a_bot == b_bot {
        // Degenerate bottom (cup origin): gap is the distance from the
        // origin point to the free boundary, always positive inside.
        let g = spec.fixed(a_bot).p;
        let s = spec.free_param_at_x1(g.x, eps)?;
        spec.free(s, eps).p.y - g.y
    } else {
        gap_of_b(b_bot)
    };
    if bot_gap <= 0.0 {
        let (gap, s) = if a_bot == b_bot {
            (bot_gap, spec.free_param_at_x1(spec.fixed(a_bot).p.x, eps)?)
        } else {
            chord_gap(spec, a_bot, b_bot, eps)?
        };
        let _ = gap;
        return Ok(LongChord {
            a: a_bot,
            b: b_bot,
            s_tangent: s,
            full: false,
        });
    }
    let top_gap = gap_of_b(b_top);
    if top_gap > 0.0 {
        return Err(Error::Bracket {
            op: "chord_at_eps",
            lo: b_bot,
            hi: b_top,
            msg: format!(
                "no tangent chord in the grown family (top gap {top_gap:.3e} still positive): \
                 grow further"
            ),
        });
    }
    let b_lo = if a_bot == b_bot {
        // Skip the degenerate origin for bracketing.
        b_bot + 1e-9 * (1.0 + b_bot.abs())
    } else {
        b_bot
    };
    let b = num::solve_bracketed(gap_of_b, b_lo, b_top, 1e-13 * (1.0 + b_top.abs()))?;
    let a = domain.a_of_b(b)?;
    let (gap, s_tangent) = chord_gap(spec, a, b, eps)?;
    if gap.abs() > 1e-9 * (1.0 + spec.fixed(b).p.norm()) {
        return Err(Error::Budget {
            op: "chord_at_eps",
            residual: gap.abs(),
        });
    }
    Ok(LongChord {
        a,
        b,
        s_tangent,
        full: true,
    })
}

/// Truncate a grown chordal family at the long chord for `eps`, appending
/// the exact tangent chord as the top pair.
pub fn clip_at_long_chord(
    domain: &ChordalCandidate,
    spec: &DomainSpec,
    f: &BoundaryFunction,
    lc: &LongChord,
    eps: f64,
) -> Result<ChordalCandidate> {
    let mut pairs: Vec<(f64, f64)> = domain
        .pairs
        .iter()
        .copied()
        .filter(|&(_, b)| b < lc.b)
        .collect();
    pairs.push((lc.a, lc.b));
    ChordalCandidate::new(spec, f, pairs, eps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_domain, CurveSpec, Preset};

    fn strip() -> DomainSpec {
        make_domain(&CurveSpec::Preset(Preset::ParabolicStrip { eps_max: 4.0 })).unwrap()
    }

    #[test]
    fn symmetric_cup_for_even_data() {
        let spec = strip();
        let f = BoundaryFunction::from_expr("-(t^4)").unwrap();
        let cup = grow_cup(&spec, &f, 0.0, 0.8, 0.3, &GrowOptions::default()).unwrap();
        for &(a, b) in &cup.pairs {
            assert!(
                (a + b).abs() < 1e-9,
                "cup not symmetric: a = {a}, b = {b}"
            );
        }
        cup.standard_candidate_check(1e-10).unwrap();
        // Continuation consistency: db/dtheta stays in (0, 1).
        for w in cup.pairs.windows(2).skip(1) {
            let (a0, b0) = w[0];
            let (a1, b1) = w[1];
            let dtheta = (b1 - a1) - (b0 - a0);
            let db = b1 - b0;
            assert!(db > 0.0 && db < dtheta + 1e-12, "db = {db}, dtheta = {dtheta}");
        }
    }

    #[test]
    fn cup_continuation_matches_derivative() {
        let spec = strip();
        let f = BoundaryFunction::from_expr("t^6 - 5*t^4").unwrap();
        let cup = grow_cup(&spec, &f, 0.0, 0.4, 0.3, &GrowOptions::default()).unwrap();
        // First-order agreement of the b-increment with C_L D_L/(C_L D_L - C_R D_R).
        for w in cup.pairs.windows(2).skip(3) {
            let (a0, b0) = w[0];
            let (a1, b1) = w[1];
            let cd = differentials(&spec, &f, a0, b0).unwrap();
            let slope = super::predictor_slope(&cd);
            let dtheta = (b1 - a1) - (b0 - a0);
            let db = b1 - b0;
            assert!(
                (db - slope * dtheta).abs() < 12.0 * dtheta * dtheta + 1e-12,
                "db = {db}, predicted {}",
                slope * dtheta
            );
        }
    }

    #[test]
    fn cup_rejects_v_root() {
        let spec = strip();
        // f = t^4 has a v root at 0 (torsion changes - to +): no cup can
        // originate there.
        let f = BoundaryFunction::from_expr("t^4").unwrap();
        assert!(grow_cup(&spec, &f, 0.0, 0.5, 0.3, &GrowOptions::default()).is_err());
    }

    #[test]
    fn long_chord_for_even_quartic() {
        let spec = strip();
        let f = BoundaryFunction::from_expr("-(t^4)").unwrap();
        let eps = 0.3;
        let cup = grow_cup(&spec, &f, 0.0, 1.0, eps, &GrowOptions::default()).unwrap();
        let lc = chord_at_eps(&cup, &spec, eps).unwrap();
        assert!(lc.full);
        // Symmetry forces the tangent chord at height eps^2 with endpoints
        // +- eps.
        assert!((lc.b - eps).abs() < 1e-7, "b = {}", lc.b);
        assert!((lc.a + eps).abs() < 1e-7, "a = {}", lc.a);
        assert!(lc.s_tangent.abs() < 1e-7);
        // Monotone nesting in eps.
        let lc2 = chord_at_eps(&cup, &spec, 0.45).unwrap();
        assert!(lc2.b > lc.b && lc2.a < lc.a);
    }

    #[test]
    fn chord_not_yet_full_below_first_level() {
        let spec = strip();
        let f = BoundaryFunction::from_expr("-(t^4)").unwrap();
        // Family grown only up to tiny widths: at a larger eps there is no
        // tangent chord inside.
        let cup = grow_cup(&spec, &f, 0.0, 0.05, 0.3, &GrowOptions::default()).unwrap();
        let e = chord_at_eps(&cup, &spec, 0.3);
        assert!(e.is_err(), "{e:?}");
    }

    #[test]
    fn grow_from_chord_preserves_width_law() {
        let spec = strip();
        let f = BoundaryFunction::from_expr("t^6 - 5*t^4").unwrap();
        // Start from a cup-grown chord and continue upward.
        let cup = grow_cup(&spec, &f, 0.0, 0.4, 0.3, &GrowOptions::default()).unwrap();
        let (a0, b0) = cup.top();
        let dom = grow_chord(&spec, &f, a0, b0, 0.5, 0.3, &GrowOptions::default()).unwrap();
        for &(a, b) in &dom.pairs {
            // Width law b - a = b0 - a0 + theta holds by construction;
            // check the cup equation independently.
            let scale = cup_scale(&spec, &f, a, b);
            assert!(cup_residual(&spec, &f, a, b).abs() <= 1e-10 * scale);
        }
        let (al, bl) = dom.top();
        assert!(bl - al > b0 - a0);
        assert!(bl > b0 && al < a0);
    }

    #[test]
    fn theta_zero_returns_start() {
        let spec = strip();
        let f = BoundaryFunction::from_expr("t^6 - 5*t^4").unwrap();
        let cup = grow_cup(&spec, &f, 0.0, 0.4, 0.3, &GrowOptions::default()).unwrap();
        let (a0, b0) = cup.top();
        let dom = grow_chord(
            &spec,
            &f,
            a0,
            b0,
            1e-9,
            0.3,
            &GrowOptions {
                steps: 2,
                ..Default::default()
            },
        )
        .unwrap();
        assert!((dom.bottom().0 - a0).abs() < 1e-12);
        assert!((dom.bottom().1 - b0).abs() < 1e-12);
    }
}
