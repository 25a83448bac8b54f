//! Construction of the foliation graph across the strip-width range: the
//! simple picture for small `eps`, and continuation in `eps` with crash
//! detection and graph rewrites.

use crate::cups::{chord_at_eps, clip_at_long_chord, grow_cup, GrowOptions, LongChord};
use crate::error::{Error, Result};
use crate::foliation::{
    check_admissible, graph_rewrite, AssembleOptions, CrashEvent, Edge, EdgeKind, FoliationGraph,
    VertexKind,
};
use crate::forces::{force_outside, solve_balance, ForceFunction, ForceSource};
use crate::geometry::{
    BoundaryFunction, DomainSpec, RootLocus, Side, TorsionProfile,
};

#[derive(Debug, Clone)]
pub struct EvolveOptions {
    pub assemble: AssembleOptions,
    /// Starting eps for sweeps when no simple threshold is supplied.
    pub eps_start: f64,
    /// Initial step of the eps continuation.
    pub deps_init: f64,
    /// Smallest accepted step before giving up, relative to eps_max.
    pub deps_floor_rel: f64,
    /// Cap on rewrite events per sweep.
    pub event_budget: usize,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions {
            assemble: AssembleOptions::default(),
            eps_start: 0.05,
            deps_init: 0.05,
            deps_floor_rel: 1e-12,
            event_budget: 10_000,
        }
    }
}

/// One source figure of a simple picture, ordered along the boundary.
#[derive(Debug, Clone)]
enum SimpleSource {
    NegInfinity,
    PosInfinity,
    /// A full cup at a point root with its long chord.
    Cup { c: f64, chord: LongChord },
    /// A multicup on a solid root arc.
    Multicup { arc: (f64, f64) },
}

impl SimpleSource {
    /// Rightmost boundary parameter of the figure (start of its right fence).
    fn right_end(&self) -> f64 {
        match self {
            SimpleSource::NegInfinity => f64::NEG_INFINITY,
            SimpleSource::PosInfinity => f64::INFINITY,
            SimpleSource::Cup { chord, .. } => chord.b,
            SimpleSource::Multicup { arc } => arc.1,
        }
    }

    fn left_end(&self) -> f64 {
        match self {
            SimpleSource::NegInfinity => f64::NEG_INFINITY,
            SimpleSource::PosInfinity => f64::INFINITY,
            SimpleSource::Cup { chord, .. } => chord.a,
            SimpleSource::Multicup { arc } => arc.0,
        }
    }

    fn right_force_source(&self) -> ForceSource {
        match self {
            SimpleSource::NegInfinity | SimpleSource::PosInfinity => {
                ForceSource::Infinity { sign: -1.0 }
            }
            SimpleSource::Cup { chord, .. } => ForceSource::Chord {
                a: chord.a,
                b: chord.b,
            },
            SimpleSource::Multicup { arc } => ForceSource::Chord { a: arc.0, b: arc.1 },
        }
    }

    fn left_force_source(&self) -> ForceSource {
        match self {
            SimpleSource::NegInfinity | SimpleSource::PosInfinity => {
                ForceSource::Infinity { sign: 1.0 }
            }
            SimpleSource::Cup { chord, .. } => ForceSource::Chord {
                a: chord.a,
                b: chord.b,
            },
            SimpleSource::Multicup { arc } => ForceSource::Chord { a: arc.0, b: arc.1 },
        }
    }
}

/// Grow a cup at the point root `c` until it is full at `eps`, returning the
/// clipped chordal family and the tangent long chord.
pub fn full_cup(
    spec: &DomainSpec,
    f: &BoundaryFunction,
    c: f64,
    eps: f64,
    grow: &GrowOptions,
) -> Result<(crate::fences::ChordalCandidate, LongChord)> {
    let mut theta = 2.0 * eps.max(0.05);
    let mut attempts = 0;
    loop {
        attempts += 1;
        if attempts > 14 {
            return Err(Error::Budget {
                op: "full_cup",
                residual: theta,
            });
        }
        let mut opts = grow.clone();
        opts.best_effort = true;
        let cand = grow_cup(spec, f, c, theta, eps, &opts)?;
        match chord_at_eps(&cand, spec, eps) {
            Ok(lc) if lc.full => {
                let clipped = clip_at_long_chord(&cand, spec, f, &lc, eps)?;
                return Ok((clipped, lc));
            }
            Ok(_) | Err(Error::Bracket { .. }) => {
                // Not full yet within what we grew.
                let (a_top, b_top) = cand.top();
                if b_top - a_top < 0.95 * theta {
                    // Growth stalled before theta: the cup cannot reach the
                    // free boundary at this eps.
                    return Err(Error::Domain {
                        op: "full_cup",
                        msg: format!(
                            "cup at {c} stalls at width {:.4} before reaching \
                             the free boundary at eps = {eps}",
                            b_top - a_top
                        ),
                    });
                }
                theta *= 2.0;
            }
            Err(e) => return Err(e),
        }
    }
}

/// Build the simple foliation graph for small `eps`: full cups at point
/// roots, multicups on solid roots, infinities at the ends, and angles at
/// the balance roots between them.
pub fn simple_picture(
    spec: &DomainSpec,
    f: &BoundaryFunction,
    profile: &TorsionProfile,
    eps: f64,
    opts: &EvolveOptions,
) -> Result<FoliationGraph> {
    if !(eps > 0.0 && eps < spec.eps_max()) {
        return Err(Error::Domain {
            op: "simple_picture",
            msg: format!("eps = {eps} outside (0, {})", spec.eps_max()),
        });
    }
    // Sources in order: one per c-root. An empty profile (torsion-free
    // data) gets the degenerate single left fence from +infinity.
    let mut sources: Vec<SimpleSource> = Vec::new();
    if profile.roots.is_empty() {
        sources.push(SimpleSource::PosInfinity);
    }
    for root in profile.c_roots() {
        let src = match root.locus {
            RootLocus::NegInfinity => SimpleSource::NegInfinity,
            RootLocus::PosInfinity => SimpleSource::PosInfinity,
            RootLocus::Point(c) => {
                let (_, chord) = full_cup(spec, f, c, eps, &opts.assemble.grow)?;
                SimpleSource::Cup { c, chord }
            }
            RootLocus::Interval(l, r) => {
                // A multicup stays simple while its chord exits the domain.
                let (gap, _) = crate::cups::chord_gap(spec, l, r, eps)?;
                if gap <= 0.0 {
                    return Err(Error::Domain {
                        op: "simple_picture",
                        msg: format!(
                            "multicup chord ({l}, {r}) already inside Omega_eps: \
                             eps = {eps} is past the simple regime"
                        ),
                    });
                }
                SimpleSource::Multicup { arc: (l, r) }
            }
        };
        sources.push(src);
    }
    // Disjointness of consecutive figures.
    for w in sources.windows(2) {
        if !(w[0].right_end() < w[1].left_end()) {
            return Err(Error::Domain {
                op: "simple_picture",
                msg: format!(
                    "figures overlap: {:?} and {:?} (eps too large for the simple picture)",
                    w[0], w[1]
                ),
            });
        }
    }
    // Balance roots between consecutive sources.
    let mut angles: Vec<f64> = Vec::new();
    for w in sources.windows(2) {
        let fr = force_outside(spec, f, w[0].right_force_source(), Side::Right, eps, &[])?;
        let fl = force_outside(spec, f, w[1].left_force_source(), Side::Left, eps, &[])?;
        let u = solve_balance(&fr, &fl)?;
        angles.push(u);
    }

    build_simple_graph(eps, &sources, &angles)
}

/// Assemble the vertex/edge lists of a simple picture.
fn build_simple_graph(
    eps: f64,
    sources: &[SimpleSource],
    angles: &[f64],
) -> Result<FoliationGraph> {
    let mut vertices: Vec<VertexKind> = Vec::new();
    let mut edges: Vec<Edge> = Vec::new();
    // Vertex ids per source.
    let mut source_vid: Vec<usize> = Vec::new();
    for s in sources {
        match s {
            SimpleSource::NegInfinity => {
                vertices.push(VertexKind::Infinity { sign: -1 });
                source_vid.push(vertices.len() - 1);
            }
            SimpleSource::PosInfinity => {
                vertices.push(VertexKind::Infinity { sign: 1 });
                source_vid.push(vertices.len() - 1);
            }
            SimpleSource::Cup { c, chord } => {
                vertices.push(VertexKind::LongChord {
                    a: chord.a,
                    b: chord.b,
                });
                let lc = vertices.len() - 1;
                vertices.push(VertexKind::CupOrigin { c: *c });
                let co = vertices.len() - 1;
                edges.push(Edge {
                    from: lc,
                    to: co,
                    kind: EdgeKind::Chordal {
                        top: (chord.a, chord.b),
                        bottom: (*c, *c),
                    },
                });
                source_vid.push(lc);
            }
            SimpleSource::Multicup { arc } => {
                vertices.push(VertexKind::Multicup { arcs: vec![*arc] });
                source_vid.push(vertices.len() - 1);
            }
        }
    }
    // Angles and tangent edges.
    for (k, &u) in angles.iter().enumerate() {
        vertices.push(VertexKind::Angle { u });
        let av = vertices.len() - 1;
        let left_src = &sources[k];
        let right_src = &sources[k + 1];
        edges.push(Edge {
            from: source_vid[k],
            to: av,
            kind: EdgeKind::Tangent {
                side: Side::Right,
                lo: left_src.right_end(),
                hi: u,
            },
        });
        edges.push(Edge {
            from: source_vid[k + 1],
            to: av,
            kind: EdgeKind::Tangent {
                side: Side::Left,
                lo: u,
                hi: right_src.left_end(),
            },
        });
    }
    // A lone source (no angles): its fences run to the infinities.
    if angles.is_empty() {
        match &sources[0] {
            SimpleSource::Cup { .. } | SimpleSource::Multicup { .. } => {
                let (l, r) = match &sources[0] {
                    SimpleSource::Cup { chord, .. } => (chord.a, chord.b),
                    SimpleSource::Multicup { arc } => (arc.0, arc.1),
                    _ => unreachable!(),
                };
                vertices.push(VertexKind::Infinity { sign: -1 });
                let ninf = vertices.len() - 1;
                vertices.push(VertexKind::Infinity { sign: 1 });
                let pinf = vertices.len() - 1;
                edges.push(Edge {
                    from: source_vid[0],
                    to: ninf,
                    kind: EdgeKind::Tangent {
                        side: Side::Left,
                        lo: f64::NEG_INFINITY,
                        hi: l,
                    },
                });
                edges.push(Edge {
                    from: source_vid[0],
                    to: pinf,
                    kind: EdgeKind::Tangent {
                        side: Side::Right,
                        lo: r,
                        hi: f64::INFINITY,
                    },
                });
            }
            SimpleSource::PosInfinity => {
                // Single fence of left tangents across the whole line.
                vertices.push(VertexKind::Infinity { sign: -1 });
                let ninf = vertices.len() - 1;
                edges.push(Edge {
                    from: source_vid[0],
                    to: ninf,
                    kind: EdgeKind::Tangent {
                        side: Side::Left,
                        lo: f64::NEG_INFINITY,
                        hi: f64::INFINITY,
                    },
                });
            }
            SimpleSource::NegInfinity => {
                vertices.push(VertexKind::Infinity { sign: 1 });
                let pinf = vertices.len() - 1;
                edges.push(Edge {
                    from: source_vid[0],
                    to: pinf,
                    kind: EdgeKind::Tangent {
                        side: Side::Right,
                        lo: f64::NEG_INFINITY,
                        hi: f64::INFINITY,
                    },
                });
            }
        }
    }
    let graph = FoliationGraph {
        eps,
        vertices,
        edges,
    };
    graph.validate_structure()?;
    Ok(graph)
}

/// Threshold below which the simple picture is certified, found by
/// bisection on the construction succeeding.
pub fn simple_picture_threshold(
    spec: &DomainSpec,
    f: &BoundaryFunction,
    profile: &TorsionProfile,
    opts: &EvolveOptions,
) -> f64 {
    let ok = |eps: f64| simple_picture(spec, f, profile, eps, opts).is_ok();
    let mut lo = 0.0f64;
    let mut hi = spec.eps_max() * 0.999;
    if ok(hi) {
        return hi;
    }
    // Find some working eps first.
    let mut probe = 0.1 * hi;
    while probe > 1e-6 && !ok(probe) {
        probe *= 0.5;
    }
    if probe <= 1e-6 {
        return 0.0;
    }
    lo = lo.max(probe);
    for _ in 0..24 {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

// ---------------------------------------------------------------------------
// Continuation in eps
// ---------------------------------------------------------------------------

/// Advance every figure's parameters from `graph.eps` to `eps_new`,
/// preserving the topology. Errors signal that a crash must be handled.
pub fn step(
    spec: &DomainSpec,
    f: &BoundaryFunction,
    graph: &FoliationGraph,
    eps_new: f64,
    opts: &EvolveOptions,
) -> Result<FoliationGraph> {
    let mut out = graph.clone();
    out.eps = eps_new;
    // Pass 1: full chords above cups re-tangent to the new free boundary.
    for vid in 0..out.vertices.len() {
        let vk = out.vertices[vid].clone();
        match vk {
            VertexKind::LongChord { .. } => {
                // Find the chordal edge below to identify the bottom.
                let below = out.edges.iter().find(|e| {
                    e.from == vid && matches!(e.kind, EdgeKind::Chordal { .. })
                });
                let Some(Edge {
                    kind: EdgeKind::Chordal { bottom, .. },
                    to,
                    ..
                }) = below.cloned()
                else {
                    return Err(Error::Domain {
                        op: "step",
                        msg: format!("long chord {vid} has no chordal edge below"),
                    });
                };
                let lc_new = if (bottom.1 - bottom.0).abs() < 1e-12 {
                    let (_, lc) = full_cup(spec, f, bottom.0, eps_new, &opts.assemble.grow)?;
                    lc
                } else {
                    // Re-tangent a chordal domain grown from a chord.
                    let mut gopts = opts.assemble.grow.clone();
                    gopts.best_effort = true;
                    let mut theta = 1.0;
                    loop {
                        let cand = crate::cups::grow_chord(
                            spec, f, bottom.0, bottom.1, theta, eps_new, &gopts,
                        )?;
                        match chord_at_eps(&cand, spec, eps_new) {
                            Ok(lc) if lc.full => break lc,
                            Ok(_) | Err(Error::Bracket { .. }) if theta < 64.0 => theta *= 2.0,
                            Ok(lc) => break lc,
                            Err(e) => return Err(e),
                        }
                    }
                };
                out.vertices[vid] = VertexKind::LongChord {
                    a: lc_new.a,
                    b: lc_new.b,
                };
                // Update the chordal edge's top and the tangent edges'
                // shared endpoints.
                for e in out.edges.iter_mut() {
                    if e.from == vid {
                        match &mut e.kind {
                            EdgeKind::Chordal { top, .. } => *top = (lc_new.a, lc_new.b),
                            EdgeKind::Tangent { side, lo, hi } => match side {
                                Side::Right => *lo = lc_new.b,
                                Side::Left => *hi = lc_new.a,
                            },
                        }
                        let _ = to;
                    }
                }
            }
            _ => {}
        }
    }
    // Pass 2: angles re-balance against the updated neighbor forces.
    for vid in 0..out.vertices.len() {
        if let VertexKind::Angle { .. } = out.vertices[vid] {
            let (fr, fl) = angle_neighbor_forces(spec, f, &out, vid, eps_new)?;
            let u_new = solve_balance(&fr, &fl)?;
            out.vertices[vid] = VertexKind::Angle { u: u_new };
            for e in out.edges.iter_mut() {
                if e.to == vid {
                    if let EdgeKind::Tangent { side, lo, hi } = &mut e.kind {
                        match side {
                            Side::Right => *hi = u_new,
                            Side::Left => *lo = u_new,
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// The right and left forces meeting at an angle vertex, rebuilt at `eps`.
fn angle_neighbor_forces(
    spec: &DomainSpec,
    f: &BoundaryFunction,
    graph: &FoliationGraph,
    vid: usize,
    eps: f64,
) -> Result<(ForceFunction, ForceFunction)> {
    let mut right: Option<ForceFunction> = None;
    let mut left: Option<ForceFunction> = None;
    for e in &graph.edges {
        if e.to != vid {
            continue;
        }
        if let EdgeKind::Tangent { side, .. } = e.kind {
            let source_vk = &graph.vertices[e.from];
            let source = match source_vk {
                VertexKind::Infinity { sign } => ForceSource::Infinity {
                    sign: *sign as f64,
                },
                VertexKind::LongChord { a, b } | VertexKind::PastedChord { a, b } => {
                    ForceSource::Chord { a: *a, b: *b }
                }
                VertexKind::Multicup { arcs } => ForceSource::Chord {
                    a: arcs.first().unwrap().0,
                    b: arcs.last().unwrap().1,
                },
                VertexKind::Trolleybus { a, b, .. } => ForceSource::Chord { a: *a, b: *b },
                other => {
                    return Err(Error::Domain {
                        op: "step",
                        msg: format!("unsupported angle neighbor {other:?}"),
                    })
                }
            };
            let force = force_outside(spec, f, source, side, eps, &[])?;
            match side {
                Side::Right => right = Some(force),
                Side::Left => left = Some(force),
            }
        }
    }
    match (right, left) {
        (Some(r), Some(l)) => Ok((r, l)),
        _ => Err(Error::Domain {
            op: "step",
            msg: format!("angle {vid} lacks a force pair"),
        }),
    }
}

/// Gap functions monitored for crash events, evaluated on a graph.
fn min_edge_gap(graph: &FoliationGraph) -> (f64, Option<CrashEvent>) {
    let mut min_gap = f64::INFINITY;
    let mut event = None;
    for (eid, e) in graph.edges.iter().enumerate() {
        if let EdgeKind::Tangent { lo, hi, .. } = e.kind {
            if lo.is_finite() && hi.is_finite() {
                let gap = hi - lo;
                if gap < min_gap {
                    min_gap = gap;
                    event = Some(CrashEvent::ZeroTangentEdge { edge: eid });
                }
            }
        }
    }
    for (vid, vk) in graph.vertices.iter().enumerate() {
        if let VertexKind::Trolleybus { a, b, .. } = vk {
            let gap = b - a;
            if gap < min_gap {
                min_gap = gap;
                event = Some(CrashEvent::ZeroWidthTrolleybus { vertex: vid });
            }
        }
    }
    (min_gap, event)
}

/// A snapshot of the evolution trace.
#[derive(Debug)]
pub struct TraceEntry {
    pub eps: f64,
    pub graph: FoliationGraph,
}

#[derive(Debug)]
pub struct EvolutionTrace {
    pub entries: Vec<TraceEntry>,
    pub events: Vec<(f64, String)>,
}

/// Detect the eps of the nearest crash inside `(eps_lo, eps_hi]` by
/// bisection on the monitored gap functions.
pub fn detect_critical(
    spec: &DomainSpec,
    f: &BoundaryFunction,
    graph: &FoliationGraph,
    eps_hi: f64,
    opts: &EvolveOptions,
) -> Result<Option<(f64, CrashEvent)>> {
    let (gap_now, _) = min_edge_gap(graph);
    let stepped = step(spec, f, graph, eps_hi, opts)?;
    let (gap_hi, event_hi) = min_edge_gap(&stepped);
    if gap_now <= 0.0 {
        // Already degenerate at the current parameters.
        let (_, ev) = min_edge_gap(graph);
        return Ok(ev.map(|e| (graph.eps, e)));
    }
    if gap_hi > 0.0 {
        return Ok(None);
    }
    let mut lo = graph.eps;
    let mut hi = eps_hi;
    let mut event = event_hi;
    for _ in 0..48 {
        let mid = 0.5 * (lo + hi);
        let stepped = step(spec, f, graph, mid, opts)?;
        let (gap, ev) = min_edge_gap(&stepped);
        if gap > 0.0 {
            lo = mid;
        } else {
            hi = mid;
            event = ev;
        }
        if (hi - lo) < 1e-10 * (1.0 + hi) {
            break;
        }
    }
    Ok(event.map(|e| (hi, e)))
}

/// Evolve from the simple regime up to `eps_target`, recording snapshots at
/// the requested eps values plus any critical points.
pub fn evolve_to(
    spec: &DomainSpec,
    f: &BoundaryFunction,
    profile: &TorsionProfile,
    eps_target: f64,
    snapshots: &[f64],
    opts: &EvolveOptions,
) -> Result<EvolutionTrace> {
    if !(eps_target > 0.0 && eps_target < spec.eps_max()) {
        return Err(Error::Domain {
            op: "evolve_to",
            msg: format!("eps_target = {eps_target} outside (0, {})", spec.eps_max()),
        });
    }
    let eps0 = opts.eps_start.min(0.5 * eps_target).max(1e-4);
    let mut graph = simple_picture(spec, f, profile, eps0, opts)?;
    let mut trace = EvolutionTrace {
        entries: vec![],
        events: vec![],
    };
    let mut wanted: Vec<f64> = snapshots
        .iter()
        .copied()
        .filter(|&e| e >= eps0 && e <= eps_target)
        .collect();
    wanted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    wanted.dedup();
    if wanted.last().copied() != Some(eps_target) {
        wanted.push(eps_target);
    }
    trace.entries.push(TraceEntry {
        eps: graph.eps,
        graph: graph.clone(),
    });
    let deps_floor = opts.deps_floor_rel * spec.eps_max();
    let mut events_used = 0usize;
    for &target in &wanted {
        while graph.eps < target - 1e-14 {
            let mut deps = opts.deps_init.min(target - graph.eps);
            loop {
                let eps_new = graph.eps + deps;
                match detect_critical(spec, f, &graph, eps_new, opts) {
                    Ok(None) => {
                        graph = step(spec, f, &graph, eps_new, opts)?;
                        break;
                    }
                    Ok(Some((eps_star, event))) => {
                        events_used += 1;
                        if events_used > opts.event_budget {
                            return Err(Error::Budget {
                                op: "evolve_to",
                                residual: events_used as f64,
                            });
                        }
                        // Step exactly to the critical point, rewrite, and
                        // continue.
                        let at = step(spec, f, &graph, eps_star, opts)?;
                        let (_, ev_at) = min_edge_gap(&at);
                        let ev = ev_at.unwrap_or(event);
                        let rewritten = graph_rewrite(&at, &ev)?;
                        trace.events.push((eps_star, format!("{ev:?}")));
                        trace.entries.push(TraceEntry {
                            eps: eps_star,
                            graph: rewritten.clone(),
                        });
                        graph = rewritten;
                        break;
                    }
                    Err(e) => {
                        deps *= 0.5;
                        if deps < deps_floor {
                            return Err(e);
                        }
                    }
                }
            }
        }
        trace.entries.push(TraceEntry {
            eps: graph.eps,
            graph: graph.clone(),
        });
    }
    Ok(trace)
}

/// Admissibility wrapper for trace snapshots.
pub fn snapshot_admissible(
    spec: &DomainSpec,
    f: &BoundaryFunction,
    graph: &FoliationGraph,
    opts: &EvolveOptions,
) -> Result<bool> {
    Ok(check_admissible(graph, spec, f, &opts.assemble)?.all_pass())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{essential_roots, make_domain, CurveSpec, Preset, RootScanOptions};

    fn strip() -> DomainSpec {
        make_domain(&CurveSpec::Preset(Preset::ParabolicStrip { eps_max: 4.0 })).unwrap()
    }

    fn profile_of(f: &BoundaryFunction, spec: &DomainSpec) -> TorsionProfile {
        essential_roots(f, spec, &RootScanOptions::default()).unwrap()
    }

    #[test]
    fn exponential_gives_single_edge_graph() {
        let spec = strip();
        let f = BoundaryFunction::from_expr("exp(t)").unwrap();
        let profile = profile_of(&f, &spec);
        let g = simple_picture(&spec, &f, &profile, 0.5, &EvolveOptions::default()).unwrap();
        assert_eq!(g.edges.len(), 1);
        assert_eq!(g.vertices.len(), 2);
        assert!(matches!(
            g.edges[0].kind,
            EdgeKind::Tangent {
                side: Side::Left,
                ..
            }
        ));
    }

    #[test]
    fn quartic_symmetric_angle() {
        let spec = strip();
        let f = BoundaryFunction::from_expr("t^4").unwrap();
        let profile = profile_of(&f, &spec);
        let g = simple_picture(&spec, &f, &profile, 0.3, &EvolveOptions::default()).unwrap();
        // -inf -> angle(0) <- +inf
        assert_eq!(g.edges.len(), 2);
        let angle = g
            .vertices
            .iter()
            .find_map(|v| match v {
                VertexKind::Angle { u } => Some(*u),
                _ => None,
            })
            .expect("angle");
        assert!(angle.abs() < 1e-9, "angle at {angle}");
    }

    #[test]
    fn neg_quartic_cup_with_infinite_fences() {
        let spec = strip();
        let f = BoundaryFunction::from_expr("-(t^4)").unwrap();
        let profile = profile_of(&f, &spec);
        let g = simple_picture(&spec, &f, &profile, 0.3, &EvolveOptions::default()).unwrap();
        // long chord + cup origin + 2 infinities; chordal edge + 2 tangent.
        assert_eq!(g.edges.len(), 3);
        let lc = g
            .vertices
            .iter()
            .find_map(|v| match v {
                VertexKind::LongChord { a, b } => Some((*a, *b)),
                _ => None,
            })
            .expect("long chord");
        assert!((lc.1 - 0.3).abs() < 1e-6, "b = {}", lc.1);
        assert!((lc.0 + 0.3).abs() < 1e-6, "a = {}", lc.0);
    }

    #[test]
    fn sextic_full_simple_picture() {
        let spec = strip();
        let f = BoundaryFunction::from_expr("t^6 - 5*t^4").unwrap();
        let profile = profile_of(&f, &spec);
        let g = simple_picture(&spec, &f, &profile, 0.05, &EvolveOptions::default()).unwrap();
        // Structure: inf- -> angle(u1) <- longchord -> angle(u2) <- inf+
        // plus the chordal edge: 5 edges, 6 vertices.
        assert_eq!(g.vertices.len(), 6);
        assert_eq!(g.edges.len(), 5);
        let angles: Vec<f64> = g
            .vertices
            .iter()
            .filter_map(|v| match v {
                VertexKind::Angle { u } => Some(*u),
                _ => None,
            })
            .collect();
        assert_eq!(angles.len(), 2);
        assert!((angles[0] + 1.0).abs() < 0.3, "u1 = {}", angles[0]);
        assert!((angles[1] - 1.0).abs() < 0.3, "u2 = {}", angles[1]);
    }

    #[test]
    fn sextic_sweep_monotone() {
        let spec = strip();
        let f = BoundaryFunction::from_expr("t^6 - 5*t^4").unwrap();
        let profile = profile_of(&f, &spec);
        let opts = EvolveOptions::default();
        let trace = evolve_to(&spec, &f, &profile, 0.3, &[0.1, 0.2, 0.3], &opts).unwrap();
        assert!(trace.events.is_empty(), "unexpected events: {:?}", trace.events);
        // Long-chord endpoint b(eps) nondecreasing across snapshots.
        let mut last_b = f64::NEG_INFINITY;
        for entry in &trace.entries {
            if let Some((_, b)) = entry.graph.vertices.iter().find_map(|v| match v {
                VertexKind::LongChord { a, b } => Some((*a, *b)),
                _ => None,
            }) {
                assert!(b >= last_b - 1e-12, "b not monotone: {b} after {last_b}");
                last_b = b;
            }
        }
    }
}
